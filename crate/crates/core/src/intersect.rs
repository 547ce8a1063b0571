//! Probability that a random design point falls in a ball of radius `r`
//! around a fixed point `U`:
//!
//! `P_{U,δ,r} = P_X{ |U - X|² <= r² }`, `X` with i.i.d. coordinates on the
//! δ-cube (uniform, or the symmetric beta law rescaled to the δ-cube).
//!
//! `|U - X|²` is a sum of independent terms `η_j = (u_j - x_j)²`, so its
//! distribution is approximated by the normal law (CLT) and by the
//! Edgeworth-type expansion built from the cumulants of the `η_j`. A Monte
//! Carlo oracle provides reference values.

use rayon::prelude::*;

use crate::coverage::{CoverageEstimate, Method};
use crate::error::{domain, Error, Result};
use crate::geometry::{check_delta, ln_unit_ball_volume, DeltaCube, Point};
use crate::quadrature::integrate;
use crate::rng::SeededStream;
use crate::sampling::{SymmetricBeta, TargetPrior};
use crate::special::{hermite, ln_beta, normal_cdf, normal_pdf};

/// Highest cumulant order available, which caps the expansion order at 2.
pub const MAX_CUMULANT: usize = 4;
const ORACLE_CHUNK: usize = 1 << 16;

/// First three central moments of `η = (z - u)²`, `z` uniform on the δ-interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateMoments {
    pub mean: f64,
    pub variance: f64,
    pub third_central: f64,
}

/// Closed forms for the uniform coordinate law:
/// `E η = (u-1/2)² + δ²/12`,
/// `var η = (δ²/3)[(u-1/2)² + δ²/60]`,
/// `E(η - Eη)³ = (δ⁴/15)[(u-1/2)² + δ²/252]`.
pub fn coordinate_moments(u: f64, delta: f64) -> Result<CoordinateMoments> {
    check_delta(delta)?;
    let c = uniform_cumulants(u - 0.5, delta);
    Ok(CoordinateMoments { mean: c[0], variance: c[1], third_central: c[2] })
}

/// `[mean, κ2, κ3, κ4]` of `(a - δw)²`, `w` uniform on `[-1/2, 1/2]`.
fn uniform_cumulants(a: f64, delta: f64) -> [f64; 4] {
    let a2 = a * a;
    let d2 = delta * delta;
    let d4 = d2 * d2;
    [
        a2 + d2 / 12.0,
        d2 / 3.0 * (a2 + d2 / 60.0),
        d4 / 15.0 * (a2 + d2 / 252.0),
        -d4 * (5040.0 * a2 * a2 - 240.0 * a2 * d2 + d4) / 37800.0,
    ]
}

/// Even moments `E[w^k]`, `k = 0..=8`, of `w = b - 1/2` with `b ~ Beta(α, α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateLaw {
    alpha: f64,
    w_moments: [f64; 9],
}

impl CoordinateLaw {
    /// Exact moments for α = 1; adaptive quadrature (relative error 1e-9)
    /// of the beta density otherwise.
    pub fn new(alpha: f64) -> Result<Self> {
        SymmetricBeta::new(alpha)?;
        let mut w_moments = [0.0; 9];
        w_moments[0] = 1.0;
        for k in (2..=8).step_by(2) {
            w_moments[k] = if alpha == 1.0 {
                1.0 / ((k + 1) as f64 * 2f64.powi(k as i32))
            } else {
                beta_centered_moment(alpha, k)?
            };
        }
        Ok(CoordinateLaw { alpha, w_moments })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn w_moments(&self) -> &[f64; 9] {
        &self.w_moments
    }

    /// `[mean, κ2, κ3, κ4]` of `η = (u - x)²`, `x = 1/2 + δ w`.
    pub fn cumulants(&self, u: f64, delta: f64) -> [f64; 4] {
        let a = u - 0.5;
        if self.alpha == 1.0 {
            return uniform_cumulants(a, delta);
        }
        let m = &self.w_moments;
        let d2 = delta * delta;
        let mean = a * a + d2 * m[2];
        // η - Eη = c0 + c1 w + c2 w², expanded exactly in powers of w.
        let z = [-d2 * m[2], -2.0 * a * delta, d2];
        let z2 = poly_mul(&z, &z);
        let z3 = poly_mul(&z2, &z);
        let z4 = poly_mul(&z3, &z);
        let expect = |p: &[f64]| p.iter().zip(m.iter()).map(|(c, mk)| c * mk).sum::<f64>();
        let mu2 = expect(&z2);
        let mu3 = expect(&z3);
        let mu4 = expect(&z4);
        [mean, mu2, mu3, mu4 - 3.0 * mu2 * mu2]
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `E[(b - 1/2)^k]` for even `k`, `b ~ Beta(α, α)`, by quadrature over the
/// left half of the support (the law is symmetric).
fn beta_centered_moment(alpha: f64, k: usize) -> Result<f64> {
    let norm = (-ln_beta(alpha, alpha)).exp();
    let km = k as i32;
    let res = if alpha < 1.0 {
        // y = b^α removes the endpoint singularity: b^{α-1} db = dy / α.
        let inv = 1.0 / alpha;
        integrate(
            |y: f64| {
                let b = y.powf(inv);
                (0.5 - b).powi(km) * (1.0 - b).powf(alpha - 1.0)
            },
            0.0,
            0.5f64.powf(alpha),
            1e-11,
            0.0,
            4000,
        )
        .map(|r| r.value / alpha)
    } else {
        integrate(
            |b: f64| (0.5 - b).powi(km) * (b * (1.0 - b)).powf(alpha - 1.0),
            0.0,
            0.5,
            1e-11,
            0.0,
            4000,
        )
        .map(|r| r.value)
    };
    res.map(|v| 2.0 * norm * v)
        .map_err(|e| Error::Numeric(format!("moment E[w^{k}] for alpha={alpha}: {e}")))
}

/// Moments and cumulants of `|U - X|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub mean: f64,
    pub variance: f64,
    pub third_central: f64,
    /// Per coordinate `[γ_2, γ_3, γ_4]`.
    pub per_coordinate_cumulants: Vec<[f64; 3]>,
}

impl MomentSet {
    pub fn dim(&self) -> usize {
        self.per_coordinate_cumulants.len()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// `Σ_j γ_{ν,j}` for `ν` in `2..=4`.
    pub fn cumulant_sum(&self, nu: usize) -> Option<f64> {
        if !(2..=MAX_CUMULANT).contains(&nu) {
            return None;
        }
        Some(self.per_coordinate_cumulants.iter().map(|c| c[nu - 2]).sum())
    }

    fn summary(&self) -> CumulantSums {
        CumulantSums {
            dim: self.dim(),
            mean: self.mean,
            sums: [self.variance, self.third_central, self.cumulant_sum(4).unwrap_or(0.0)],
        }
    }
}

/// Allocation-free summary used on hot paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSums {
    pub dim: usize,
    pub mean: f64,
    /// `Σ_j γ_{ν,j}` for `ν = 2, 3, 4`.
    pub sums: [f64; 3],
}

pub fn sum_moments(u: &Point, delta: f64, alpha: f64) -> Result<MomentSet> {
    let model = IntersectionModel::new(delta, alpha)?;
    Ok(model.moment_set(u.coords()))
}

/// Coordinate law on a δ-cube, ready for repeated evaluation at many centres.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionModel {
    delta: f64,
    law: CoordinateLaw,
}

impl IntersectionModel {
    pub fn new(delta: f64, alpha: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(IntersectionModel { delta, law: CoordinateLaw::new(alpha)? })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.law.alpha
    }

    pub fn moment_set(&self, u: &[f64]) -> MomentSet {
        let mut mean = 0.0;
        let mut per = Vec::with_capacity(u.len());
        for &uj in u {
            let c = self.law.cumulants(uj, self.delta);
            mean += c[0];
            per.push([c[1], c[2], c[3]]);
        }
        let variance = per.iter().map(|c| c[0]).sum();
        let third_central = per.iter().map(|c| c[1]).sum();
        MomentSet { mean, variance, third_central, per_coordinate_cumulants: per }
    }

    pub fn cumulant_sums(&self, u: &[f64]) -> CumulantSums {
        let mut mean = 0.0;
        let mut sums = [0.0; 3];
        for &uj in u {
            let c = self.law.cumulants(uj, self.delta);
            mean += c[0];
            sums[0] += c[1];
            sums[1] += c[2];
            sums[2] += c[3];
        }
        CumulantSums { dim: u.len(), mean, sums }
    }

    pub fn clt(&self, u: &[f64], r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(clt_from(&self.cumulant_sums(u), r))
    }

    pub fn edgeworth(&self, u: &[f64], r: f64, cfg: EdgeworthConfig) -> Result<Approximation> {
        check_radius(r)?;
        edgeworth_from(&self.cumulant_sums(u), r, cfg)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return domain(format!("radius must be finite and nonnegative, got {r}"));
    }
    Ok(())
}

fn clt_from(c: &CumulantSums, r: f64) -> f64 {
    let sigma = c.sums[0].sqrt();
    let r2 = r * r;
    if sigma == 0.0 {
        return if c.mean <= r2 { 1.0 } else { 0.0 };
    }
    normal_cdf((r2 - c.mean) / sigma).clamp(0.0, 1.0)
}

/// Normal approximation `Φ((r² - μ)/σ)`.
pub fn clt_probability(u: &Point, delta: f64, alpha: f64, r: f64) -> Result<f64> {
    IntersectionModel::new(delta, alpha)?.clt(u.coords(), r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeworthConfig {
    /// Correction terms retained; 0 is the plain normal approximation.
    pub order: usize,
    /// Clip the result into `[0, 1]`.
    pub clamp: bool,
}

impl EdgeworthConfig {
    pub fn new(order: usize) -> Self {
        EdgeworthConfig { order, clamp: true }
    }
}

impl Default for EdgeworthConfig {
    fn default() -> Self {
        EdgeworthConfig::new(1)
    }
}

/// Expansion value with its unclipped counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approximation {
    pub probability: f64,
    pub raw: f64,
    /// The raw value left `[0, 1]` and was clipped.
    pub clamped: bool,
}

/// All `(k_1, .., k_ν)` with `k_1 + 2 k_2 + .. + ν k_ν = ν`.
pub fn partitions(nu: usize) -> Vec<Vec<usize>> {
    fn rec(part: usize, remaining: usize, k: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if part == 0 {
            if remaining == 0 {
                out.push(k.clone());
            }
            return;
        }
        for count in 0..=remaining / part {
            k[part - 1] = count;
            rec(part - 1, remaining - count * part, k, out);
        }
        k[part - 1] = 0;
    }
    let mut out = Vec::new();
    if nu == 0 {
        return vec![vec![]];
    }
    rec(nu, nu, &mut vec![0; nu], &mut out);
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn edgeworth_from(c: &CumulantSums, r: f64, cfg: EdgeworthConfig) -> Result<Approximation> {
    if cfg.order + 2 > MAX_CUMULANT {
        return domain(format!(
            "expansion order {} needs cumulants up to order {}, only {MAX_CUMULANT} are available",
            cfg.order,
            cfg.order + 2
        ));
    }
    let sigma = c.sums[0].sqrt();
    if sigma == 0.0 {
        let p = if c.mean <= r * r { 1.0 } else { 0.0 };
        return Ok(Approximation { probability: p, raw: p, clamped: false });
    }
    let t = (r * r - c.mean) / sigma;
    let d = c.dim as f64;
    // λ_{ν,d} = d^{(ν-2)/2} σ^{-ν} Σ_j γ_{ν,j}
    let lambda = |nu: usize| d.powf((nu as f64 - 2.0) / 2.0) / sigma.powi(nu as i32) * c.sums[nu - 2];
    let mut value = normal_cdf(t);
    for nu in 1..=cfg.order {
        let mut q = 0.0;
        for k in partitions(nu) {
            let s: usize = k.iter().sum();
            let mut term = hermite(nu + 2 * s - 1, t);
            for (m, &km) in k.iter().enumerate().map(|(i, km)| (i + 1, km)) {
                if km > 0 {
                    term *= (lambda(m + 2) / factorial(m + 2)).powi(km as i32) / factorial(km);
                }
            }
            q += term;
        }
        value += -normal_pdf(t) * q / d.powf(nu as f64 / 2.0);
    }
    let clipped = value.clamp(0.0, 1.0);
    let clamped = clipped != value;
    Ok(Approximation { probability: if cfg.clamp { clipped } else { value }, raw: value, clamped })
}

/// Edgeworth-corrected `P_{U,δ,r}`; order 0 coincides with [`clt_probability`].
pub fn edgeworth_probability(u: &Point, delta: f64, alpha: f64, r: f64, cfg: EdgeworthConfig) -> Result<Approximation> {
    let model = IntersectionModel::new(delta, alpha)?;
    check_radius(r)?;
    edgeworth_from(&model.moment_set(u.coords()).summary(), r, cfg)
}

/// Monte Carlo estimate of `P_{U,δ,r}` from `n_samples` draws of `X`.
pub fn mc_intersection_oracle(
    u: &Point,
    delta: f64,
    alpha: f64,
    r: f64,
    n_samples: usize,
    stream: SeededStream,
) -> Result<CoverageEstimate> {
    if n_samples == 0 {
        return domain("the oracle needs at least one sample");
    }
    check_radius(r)?;
    let cube = DeltaCube::new(u.dim(), delta)?;
    let law = SymmetricBeta::new(alpha)?;
    let hits = count_hits(u.coords(), &cube, law, r * r, n_samples, stream);
    Ok(CoverageEstimate::proportion(hits, n_samples as u64, Method::IntersectionOracle))
}

fn count_hits(u: &[f64], cube: &DeltaCube, law: SymmetricBeta, r2: f64, n: usize, stream: SeededStream) -> u64 {
    let chunks = n.div_ceil(ORACLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.substream(c as u64).rng();
            let len = ORACLE_CHUNK.min(n - c * ORACLE_CHUNK);
            let mut hits = 0u64;
            for _ in 0..len {
                let mut s = 0.0;
                for &uj in u {
                    let t = uj - cube.map_unit(law.sample(&mut rng));
                    s += t * t;
                }
                if s <= r2 {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// `κ_U = P_X{|U - X| <= r} / (r^d V_d)` for one centre, by Monte Carlo.
pub fn kappa_value(u: &Point, r: f64, delta: f64, n_inner: usize, stream: SeededStream) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("kappa needs r > 0, got {r}"));
    }
    if let Some(p) = crate::coverage::exact_ball_probability(u, delta, r)? {
        return kappa_from(p, u.dim(), r);
    }
    let p = mc_intersection_oracle(u, delta, 1.0, r, n_inner, stream)?.value;
    kappa_from(p, u.dim(), r)
}

fn kappa_from(p: f64, d: usize, r: f64) -> Result<f64> {
    if p == 0.0 {
        return Ok(0.0);
    }
    let ln_k = p.ln() - d as f64 * r.ln() - ln_unit_ball_volume(d)?;
    if ln_k > f64::MAX.ln() {
        return Err(Error::Numeric(format!("kappa overflows: ln kappa = {ln_k}")));
    }
    Ok(ln_k.exp())
}

/// `n_outer` draws of `κ_U` with `U` uniform on `[0, 1]^d`.
pub fn kappa_density_sample(
    d: usize,
    r: f64,
    delta: f64,
    n_outer: usize,
    n_inner: usize,
    stream: SeededStream,
) -> Result<Vec<f64>> {
    if !(r > 0.0) {
        return domain(format!("kappa needs r > 0, got {r}"));
    }
    check_delta(delta)?;
    let prior = TargetPrior::uniform(d)?;
    let centres = crate::sampling::sample_targets(&prior, n_outer, stream.child("kappa-centres"))?;
    let inner = stream.child("kappa-inner");
    let cube = DeltaCube::new(d, delta)?;
    let law = SymmetricBeta::new(1.0)?;
    centres
        .par_chunks(d)
        .enumerate()
        .map(|(i, u)| {
            if let Some(p) = crate::coverage::exact_ball_probability(&Point::new(u.to_vec())?, delta, r)? {
                return kappa_from(p, d, r);
            }
            let hits = count_hits(u, &cube, law, r * r, n_inner, inner.substream(i as u64));
            kappa_from(hits as f64 / n_inner as f64, d, r)
        })
        .collect()
}
