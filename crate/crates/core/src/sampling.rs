//! Design and target samplers.
//!
//! Random designs are generated in chunks of [`CHUNK`] points, chunk `c`
//! drawn from `stream.substream(c)`. A design of size `n` is therefore a
//! prefix of every larger design drawn from the same stream, and designs
//! drawn for different δ from one stream are affine images of the same
//! unit-cube variates (common random numbers).

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use rand::RngCore;

use crate::error::{domain, Error, Result};
use crate::geometry::{check_delta, DeltaCube, Design, Point, Provenance};
use crate::rng::{open_unit_f64, unit_f64, SeededStream, StreamRng};
use crate::sobol::SobolSequence;
use crate::special::beta_reg_inv;

pub const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    UniformDeltaCube,
    BetaDeltaCube,
    SobolDeltaCube,
    VertexDesign,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::UniformDeltaCube => "uniform",
            SchemeKind::BetaDeltaCube => "beta",
            SchemeKind::SobolDeltaCube => "sobol",
            SchemeKind::VertexDesign => "vertex",
        }
    }

    /// Schemes whose points are i.i.d. draws from a product density.
    pub fn is_iid(&self) -> bool {
        matches!(self, SchemeKind::UniformDeltaCube | SchemeKind::BetaDeltaCube)
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SchemeKind::UniformDeltaCube),
            "beta" => Ok(SchemeKind::BetaDeltaCube),
            "sobol" => Ok(SchemeKind::SobolDeltaCube),
            "vertex" => Ok(SchemeKind::VertexDesign),
            other => domain(format!("unknown scheme '{other}' (uniform, beta, sobol, vertex)")),
        }
    }
}

/// How design points are placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingScheme {
    pub kind: SchemeKind,
    pub delta: f64,
    /// Beta shape; only read by [`SchemeKind::BetaDeltaCube`].
    pub alpha: f64,
    pub dim: usize,
    /// Sobol points skipped before the first emitted point.
    pub sobol_skip: u64,
}

impl SamplingScheme {
    pub fn uniform(dim: usize, delta: f64) -> Result<Self> {
        Self::build(SchemeKind::UniformDeltaCube, dim, delta, 1.0)
    }

    pub fn beta(dim: usize, delta: f64, alpha: f64) -> Result<Self> {
        Self::build(SchemeKind::BetaDeltaCube, dim, delta, alpha)
    }

    pub fn sobol(dim: usize, delta: f64) -> Result<Self> {
        Self::build(SchemeKind::SobolDeltaCube, dim, delta, 1.0)
    }

    /// Centre plus random vertices of `[1/4, 3/4]^d`.
    pub fn vertex(dim: usize) -> Result<Self> {
        Self::build(SchemeKind::VertexDesign, dim, 0.5, 1.0)
    }

    pub fn build(kind: SchemeKind, dim: usize, delta: f64, alpha: f64) -> Result<Self> {
        let scheme = SamplingScheme { kind, delta, alpha, dim, sobol_skip: 0 };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return domain("scheme dimension must be positive");
        }
        check_delta(self.delta)?;
        if self.kind == SchemeKind::BetaDeltaCube && !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return domain(format!("beta shape alpha must be positive, got {}", self.alpha));
        }
        if self.kind == SchemeKind::VertexDesign && self.delta != 0.5 {
            return domain("the vertex design lives on [1/4, 3/4]^d (delta = 0.5)");
        }
        Ok(())
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let s = SamplingScheme { delta, ..*self };
        s.validate()?;
        Ok(s)
    }

    pub fn cube(&self) -> DeltaCube {
        DeltaCube::new(self.dim, self.delta).expect("validated scheme")
    }

    /// Shape of the per-coordinate law (1 for uniform-like schemes).
    pub fn effective_alpha(&self) -> f64 {
        match self.kind {
            SchemeKind::BetaDeltaCube => self.alpha,
            _ => 1.0,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            SchemeKind::BetaDeltaCube => format!("beta(alpha={},delta={})", self.alpha, self.delta),
            SchemeKind::VertexDesign => "vertex".to_string(),
            k => format!("{}(delta={})", k.name(), self.delta),
        }
    }
}

/// Symmetric Beta(α, α) quantile on `[0, 1]`, with fast paths for α = 1 and α = 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricBeta {
    alpha: f64,
}

impl SymmetricBeta {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("beta shape alpha must be positive, got {alpha}"));
        }
        Ok(SymmetricBeta { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if self.alpha == 1.0 {
            p
        } else if self.alpha == 0.5 {
            let s = (FRAC_PI_2 * p).sin();
            s * s
        } else {
            beta_reg_inv(self.alpha, self.alpha, p).expect("p in (0, 1) and alpha > 0")
        }
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.alpha == 1.0 {
            unit_f64(rng)
        } else {
            self.quantile(open_unit_f64(rng))
        }
    }
}

/// Lazily extends a nested design, one chunk at a time.
pub struct DesignGenerator {
    scheme: SamplingScheme,
    stream: SeededStream,
    state: GeneratorState,
}

// One generator per design; size is irrelevant.
#[allow(clippy::large_enum_variant)]
enum GeneratorState {
    Iid { law: SymmetricBeta, cube: DeltaCube },
    Sobol(SobolSequence),
    Vertex(VertexSampler),
}

impl DesignGenerator {
    pub fn new(scheme: SamplingScheme, stream: SeededStream) -> Result<Self> {
        scheme.validate()?;
        let state = match scheme.kind {
            SchemeKind::UniformDeltaCube | SchemeKind::BetaDeltaCube => GeneratorState::Iid {
                law: SymmetricBeta::new(scheme.effective_alpha())?,
                cube: scheme.cube(),
            },
            SchemeKind::SobolDeltaCube => {
                let mut seq = SobolSequence::new(scheme.dim)?;
                seq.seek(scheme.sobol_skip);
                GeneratorState::Sobol(seq)
            }
            SchemeKind::VertexDesign => GeneratorState::Vertex(VertexSampler::new(scheme.dim, stream)),
        };
        Ok(DesignGenerator { scheme, stream, state })
    }

    /// Appends points to `design` until it holds `n` points.
    pub fn extend_to(&mut self, design: &mut Design, n: usize) -> Result<()> {
        let d = self.scheme.dim;
        if design.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: design.dim() });
        }
        let mut row = vec![0.0; d];
        while design.len() < n {
            match &mut self.state {
                GeneratorState::Iid { law, cube } => {
                    let start = design.len();
                    let chunk = start / CHUNK;
                    let mut rng = self.stream.substream(chunk as u64).rng();
                    // Skip the part of the chunk already emitted.
                    let offset = start - chunk * CHUNK;
                    let upto = (n - chunk * CHUNK).min(CHUNK);
                    for k in 0..upto {
                        for x in row.iter_mut() {
                            *x = cube.map_unit(law.sample(&mut rng));
                        }
                        if k >= offset {
                            design.extend_flat(&row);
                        }
                    }
                }
                GeneratorState::Sobol(seq) => {
                    let cube = self.scheme.cube();
                    seq.next_into(&mut row);
                    for x in row.iter_mut() {
                        *x = cube.map_unit(*x);
                    }
                    design.extend_flat(&row);
                }
                GeneratorState::Vertex(v) => {
                    if design.is_empty() {
                        row.fill(0.5);
                    } else {
                        v.next_distinct(&mut row)?;
                    }
                    design.extend_flat(&row);
                }
            }
        }
        Ok(())
    }
}

/// Draws `n` design points from `scheme`.
pub fn sample_design(scheme: &SamplingScheme, n: usize, stream: SeededStream) -> Result<Design> {
    if n == 0 {
        return domain("design size must be positive");
    }
    scheme.validate()?;
    if scheme.kind == SchemeKind::VertexDesign {
        check_vertex_capacity(scheme.dim, n - 1)?;
    }
    let mut gen = DesignGenerator::new(*scheme, stream)?;
    let mut design = Design::with_capacity(scheme.dim, n);
    gen.extend_to(&mut design, n)?;
    design.provenance = Provenance {
        scheme: scheme.label(),
        seed: match scheme.kind {
            SchemeKind::SobolDeltaCube => None,
            _ => Some((stream.master_seed, stream.stream_id)),
        },
    };
    Ok(design)
}

fn check_vertex_capacity(d: usize, vertices: usize) -> Result<()> {
    if d < 64 && vertices as u128 > 1u128 << d {
        return Err(Error::Infeasible(format!("{vertices} distinct vertices requested but the cube has only 2^{d}")));
    }
    Ok(())
}

/// Vertex bit patterns, one bit per coordinate (1 ↦ 3/4, 0 ↦ 1/4).
type Mask = Vec<u64>;

struct VertexSampler {
    dim: usize,
    rng: StreamRng,
    seen: HashSet<Mask>,
}

impl VertexSampler {
    fn new(dim: usize, stream: SeededStream) -> Self {
        VertexSampler { dim, rng: stream.child("vertices").rng(), seen: HashSet::new() }
    }

    fn random_mask(&mut self) -> Mask {
        let words = self.dim.div_ceil(64);
        let mut m: Mask = (0..words).map(|_| self.rng.next_u64()).collect();
        let tail = self.dim % 64;
        if tail != 0 {
            m[words - 1] &= (1u64 << tail) - 1;
        }
        m
    }

    fn next_distinct(&mut self, out: &mut [f64]) -> Result<()> {
        check_vertex_capacity(self.dim, self.seen.len() + 1)?;
        loop {
            let m = self.random_mask();
            if self.seen.insert(m.clone()) {
                write_vertex(&m, out);
                return Ok(());
            }
        }
    }
}

fn write_vertex(mask: &[u64], out: &mut [f64]) {
    for (j, x) in out.iter_mut().enumerate() {
        *x = if (mask[j / 64] >> (j % 64)) & 1 == 1 { 0.75 } else { 0.25 };
    }
}

fn hamming(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Default number of consecutive rejected candidates before giving up.
pub const DEFAULT_RETRY_BUDGET: usize = 10_000;

/// A vertex design whose vertices are pairwise Hamming-separated.
#[derive(Debug, Clone)]
pub struct HammingDesign {
    pub design: Design,
    pub threshold: u32,
    pub requested: usize,
    /// Points missing because the retry budget ran out.
    pub shortfall: usize,
}

/// `⌊d − log₂(n_max − 1)⌋ + 1`.
pub fn hamming_threshold(d: usize, n_max: usize) -> u32 {
    let raw = d as f64 - ((n_max - 1) as f64).log2();
    (raw.floor() as i64 + 1).max(0) as u32
}

pub fn min_hamming_vertex_design(d: usize, n_max: usize, stream: SeededStream) -> Result<HammingDesign> {
    min_hamming_vertex_design_with_budget(d, n_max, stream, DEFAULT_RETRY_BUDGET)
}

pub fn min_hamming_vertex_design_with_budget(
    d: usize,
    n_max: usize,
    stream: SeededStream,
    retry_budget: usize,
) -> Result<HammingDesign> {
    if d == 0 {
        return domain("dimension must be positive");
    }
    if n_max < 2 || (d < 64 && n_max as u128 > 1u128 << d) {
        return domain(format!("n_max must satisfy 2 <= n_max <= 2^d, got {n_max} for d={d}"));
    }
    let threshold = hamming_threshold(d, n_max);
    let mut sampler = VertexSampler::new(d, stream);
    let mut kept: Vec<Mask> = Vec::new();
    let mut design = Design::with_capacity(d, n_max);
    design.push(&vec![0.5; d])?;
    let mut row = vec![0.0; d];
    let mut failures = 0;
    while design.len() < n_max && failures < retry_budget {
        let m = sampler.random_mask();
        if kept.iter().all(|k| hamming(k, &m) >= threshold) {
            write_vertex(&m, &mut row);
            design.extend_flat(&row);
            kept.push(m);
            failures = 0;
        } else {
            failures += 1;
        }
    }
    design.provenance = Provenance {
        scheme: format!("vertex(min_hamming={threshold})"),
        seed: Some((stream.master_seed, stream.stream_id)),
    };
    let shortfall = n_max - design.len();
    Ok(HammingDesign { design, threshold, requested: n_max, shortfall })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    Uniform,
    ProductBeta,
}

/// Distribution of the unknown target `x*` on `[0, 1]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPrior {
    pub kind: PriorKind,
    pub alpha: f64,
    pub dim: usize,
}

impl TargetPrior {
    pub fn uniform(dim: usize) -> Result<Self> {
        let p = TargetPrior { kind: PriorKind::Uniform, alpha: 1.0, dim };
        p.validate()?;
        Ok(p)
    }

    pub fn product_beta(dim: usize, alpha: f64) -> Result<Self> {
        let p = TargetPrior { kind: PriorKind::ProductBeta, alpha, dim };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return domain("prior dimension must be positive");
        }
        if self.kind == PriorKind::ProductBeta && !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return domain(format!("prior alpha must be positive, got {}", self.alpha));
        }
        Ok(())
    }

    pub fn law(&self) -> SymmetricBeta {
        match self.kind {
            PriorKind::Uniform => SymmetricBeta { alpha: 1.0 },
            PriorKind::ProductBeta => SymmetricBeta { alpha: self.alpha },
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.kind == PriorKind::Uniform || self.alpha == 1.0
    }

    pub fn label(&self) -> String {
        match self.kind {
            PriorKind::Uniform => "uniform".into(),
            PriorKind::ProductBeta => format!("beta(alpha={})", self.alpha),
        }
    }

    pub fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let law = self.law();
        for x in out.iter_mut() {
            *x = law.sample(rng);
        }
    }
}

/// One draw from the prior.
pub fn sample_target(prior: &TargetPrior, stream: SeededStream) -> Result<Point> {
    prior.validate()?;
    let mut out = vec![0.0; prior.dim];
    prior.sample_into(&mut stream.rng(), &mut out);
    Point::new(out)
}

/// `n` prior draws, row-major; chunk `c` of [`CHUNK`] targets uses `stream.substream(c)`.
pub fn sample_targets(prior: &TargetPrior, n: usize, stream: SeededStream) -> Result<Vec<f64>> {
    prior.validate()?;
    let d = prior.dim;
    let mut out = vec![0.0; n * d];
    for (c, block) in out.chunks_mut(CHUNK * d).enumerate() {
        let mut rng = stream.substream(c as u64).rng();
        for row in block.chunks_exact_mut(d) {
            prior.sample_into(&mut rng, row);
        }
    }
    Ok(out)
}
