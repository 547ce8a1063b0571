//! Sobol' low-discrepancy sequence in Gray-code order.
//!
//! Direction numbers for dimensions 2..=50 come from the Joe-Kuo
//! `new-joe-kuo-6.21201` table, shipped as `data/sobol_directions.txt`
//! (one record per dimension: `d s a m_1 .. m_s`). Dimension 1 is the
//! van der Corput sequence in base 2.

use std::sync::OnceLock;

use crate::error::{domain, Error, Result};
use crate::geometry::{Design, Provenance};

pub const MAX_DIM: usize = 50;
const BITS: usize = 32;
const TABLE: &str = include_str!("../data/sobol_directions.txt");

/// One record of the direction-number table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionRecord {
    pub dim: usize,
    /// Degree of the primitive polynomial.
    pub degree: usize,
    /// Interior coefficients of the polynomial, most significant first.
    pub coefficients: u32,
    pub initial: Vec<u32>,
}

pub fn parse_table(text: &str) -> Result<Vec<DirectionRecord>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<u32> = line
            .split_whitespace()
            .map(|f| f.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Domain(format!("direction table line {}: {e}", lineno + 1)))?;
        if fields.len() < 3 || fields.len() != 3 + fields[1] as usize {
            return domain(format!("direction table line {}: malformed record", lineno + 1));
        }
        let degree = fields[1] as usize;
        let initial = fields[3..].to_vec();
        for (k, &m) in initial.iter().enumerate() {
            if m % 2 == 0 || m >= 1 << (k + 1) {
                return domain(format!("direction table line {}: m_{} = {m} invalid", lineno + 1, k + 1));
            }
        }
        out.push(DirectionRecord { dim: fields[0] as usize, degree, coefficients: fields[2], initial });
    }
    Ok(out)
}

fn table() -> &'static [[u32; BITS]] {
    static DIRECTIONS: OnceLock<Vec<[u32; BITS]>> = OnceLock::new();
    DIRECTIONS.get_or_init(|| {
        let records = parse_table(TABLE).expect("embedded direction table is well formed");
        let mut dirs = Vec::with_capacity(MAX_DIM);
        let mut first = [0u32; BITS];
        for (k, v) in first.iter_mut().enumerate() {
            *v = 1 << (BITS - 1 - k);
        }
        dirs.push(first);
        for rec in records.iter().take(MAX_DIM - 1) {
            dirs.push(directions(rec));
        }
        dirs
    })
}

fn directions(rec: &DirectionRecord) -> [u32; BITS] {
    let s = rec.degree;
    let mut v = [0u32; BITS];
    for (k, (vk, &m)) in v.iter_mut().zip(&rec.initial).take(s.min(BITS)).enumerate() {
        *vk = m << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (rec.coefficients >> (s - 1 - i)) & 1 == 1 {
                x ^= v[k - i];
            }
        }
        v[k] = x;
    }
    v
}

/// Incremental Sobol generator. Point 0 is the origin.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    dim: usize,
    state: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return domain("Sobol dimension must be positive");
        }
        if dim > MAX_DIM {
            return Err(Error::UnsupportedDimension { dim, max: MAX_DIM });
        }
        Ok(SobolSequence { dim, state: vec![0; dim], index: 0 })
    }

    /// Positions the generator at point `index` using its Gray code.
    pub fn seek(&mut self, index: u64) {
        let gray = index ^ (index >> 1);
        let dirs = table();
        for (j, s) in self.state.iter_mut().enumerate() {
            *s = (0..BITS).filter(|&k| (gray >> k) & 1 == 1).fold(0, |acc, k| acc ^ dirs[j][k]);
        }
        self.index = index;
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Writes the current point into `out` and advances.
    pub fn next_into(&mut self, out: &mut [f64]) {
        const SCALE: f64 = 1.0 / 4_294_967_296.0;
        for (o, &s) in out.iter_mut().zip(&self.state) {
            *o = s as f64 * SCALE;
        }
        let c = (!self.index).trailing_zeros() as usize;
        let dirs = table();
        if c < BITS {
            for (j, s) in self.state.iter_mut().enumerate() {
                *s ^= dirs[j][c];
            }
        }
        self.index += 1;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// The `n` Sobol points following the first `skip` points.
pub fn sobol_points(d: usize, n: usize, skip: u64) -> Result<Design> {
    if n == 0 {
        return domain("number of points must be positive");
    }
    if (n as u64).saturating_add(skip) > 1u64 << 31 {
        return domain("n + skip exceeds 2^31");
    }
    let mut seq = SobolSequence::new(d)?;
    seq.seek(skip);
    let mut design = Design::with_capacity(d, n);
    let mut row = vec![0.0; d];
    for _ in 0..n {
        seq.next_into(&mut row);
        design.extend_flat(&row);
    }
    design.provenance = Provenance { scheme: format!("sobol(skip={skip})"), seed: None };
    Ok(design)
}
