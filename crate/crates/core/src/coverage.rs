//! Estimators of the covered fraction `F_d(r, X_n) = Pr(ρ(U, X_n) <= r)`.
//!
//! Every estimator draws its targets from `stream.child("targets")` and its
//! designs from `stream.child("designs")`, so calls that differ only in `r`,
//! `n` or `δ` see the same random numbers.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::geometry::{ln_unit_ball_volume, Ball, Design, Point};
use crate::intersect::{mc_intersection_oracle, EdgeworthConfig, IntersectionModel};
use crate::kernels::{count_covered, min_sq_distances};
use crate::rng::SeededStream;
use crate::sampling::{sample_design, sample_targets, SamplingScheme, SchemeKind, SymmetricBeta, TargetPrior, CHUNK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Fixed design, Monte Carlo over targets.
    DesignConditional,
    /// `E_U[1 - (1 - p(U))^n]` with `p(U)` approximated or simulated.
    ProductForm,
    /// Mean of design-conditional estimates over independent designs.
    DesignAveraged,
    /// Monte Carlo estimate of a single-ball intersection probability.
    IntersectionOracle,
    /// `1 - (1 - p̄)^n` with `p̄ = P_{U,X}{|U - X| <= r}` from paired draws.
    PairedIntersection,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::DesignConditional => "design_conditional",
            Method::ProductForm => "product_form",
            Method::DesignAveraged => "design_averaged",
            Method::IntersectionOracle => "intersection_oracle",
            Method::PairedIntersection => "paired_intersection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_targets: usize,
    pub n_designs: usize,
    pub method: Method,
}

impl CoverageEstimate {
    pub(crate) fn proportion(hits: u64, n: u64, method: Method) -> Self {
        let p = hits as f64 / n as f64;
        CoverageEstimate {
            value: p,
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            n_targets: n as usize,
            n_designs: 1,
            method,
        }
    }
}

/// Arguments of `F_d(r, X_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageQuery {
    pub dim: usize,
    pub radius: f64,
    pub n: usize,
    pub scheme: SamplingScheme,
    pub prior: TargetPrior,
}

impl CoverageQuery {
    pub fn new(dim: usize, radius: f64, n: usize, scheme: SamplingScheme, prior: TargetPrior) -> Result<Self> {
        let q = CoverageQuery { dim, radius, n, scheme, prior };
        q.validate()?;
        Ok(q)
    }

    /// Uniform design on the δ-cube, uniform target.
    pub fn uniform(dim: usize, radius: f64, n: usize, delta: f64) -> Result<Self> {
        CoverageQuery::new(dim, radius, n, SamplingScheme::uniform(dim, delta)?, TargetPrior::uniform(dim)?)
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        CoverageQuery::new(self.dim, radius, self.n, self.scheme, self.prior)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        CoverageQuery::new(self.dim, self.radius, n, self.scheme, self.prior)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= 0.0) || !self.radius.is_finite() {
            return domain(format!("radius must be finite and nonnegative, got {}", self.radius));
        }
        if self.n == 0 {
            return domain("design size n must be at least 1");
        }
        self.scheme.validate()?;
        self.prior.validate()?;
        if self.scheme.dim != self.dim || self.prior.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: if self.scheme.dim != self.dim { self.scheme.dim } else { self.prior.dim },
            });
        }
        Ok(())
    }

    fn require_iid(&self) -> Result<()> {
        if !self.scheme.kind.is_iid() {
            return domain(format!("{} designs are not i.i.d.; this estimator needs an i.i.d. scheme", self.scheme.kind.name()));
        }
        Ok(())
    }
}

fn target_stream(stream: SeededStream) -> SeededStream {
    stream.child("targets")
}

fn design_stream(stream: SeededStream) -> SeededStream {
    stream.child("designs")
}

/// Fraction of prior targets within `r` of a given design.
pub fn coverage_design_conditional(
    q: &CoverageQuery,
    design: &Design,
    n_targets: usize,
    stream: SeededStream,
) -> Result<CoverageEstimate> {
    q.validate()?;
    if design.is_empty() {
        return domain("design is empty");
    }
    if design.dim() != q.dim {
        return Err(Error::DimensionMismatch { expected: q.dim, got: design.dim() });
    }
    if n_targets == 0 {
        return domain("n_targets must be positive");
    }
    let targets = sample_targets(&q.prior, n_targets, target_stream(stream))?;
    let hits = count_covered(design, &targets, q.radius * q.radius);
    Ok(CoverageEstimate::proportion(hits, n_targets as u64, Method::DesignConditional))
}

/// Combines per-design fractions into one estimate.
fn average(values: &[f64], n_targets: usize, method: Method) -> CoverageEstimate {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let binomial = mean * (1.0 - mean) / (k * n_targets as f64);
    let between = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / ((k - 1.0) * k)
    } else {
        0.0
    };
    CoverageEstimate {
        value: mean,
        std_error: binomial.max(between).sqrt(),
        n_targets,
        n_designs: values.len(),
        method,
    }
}

fn check_averaging(q: &CoverageQuery, n_designs: usize, n_targets: usize) -> Result<()> {
    q.validate()?;
    if q.scheme.kind == SchemeKind::SobolDeltaCube {
        return domain("Sobol designs are deterministic; use the design-conditional estimator");
    }
    if n_designs == 0 || n_targets == 0 {
        return domain("n_designs and n_targets must be positive");
    }
    Ok(())
}

/// Mean over `n_designs` independent designs of the design-conditional estimate.
pub fn coverage_design_averaged(
    q: &CoverageQuery,
    n_designs: usize,
    n_targets: usize,
    stream: SeededStream,
) -> Result<CoverageEstimate> {
    check_averaging(q, n_designs, n_targets)?;
    let r2 = q.radius * q.radius;
    let mut values = Vec::with_capacity(n_designs);
    for k in 0..n_designs {
        let design = sample_design(&q.scheme, q.n, design_stream(stream).substream(k as u64))?;
        let targets = sample_targets(&q.prior, n_targets, target_stream(stream).substream(k as u64))?;
        values.push(count_covered(&design, &targets, r2) as f64 / n_targets as f64);
    }
    Ok(average(&values, n_targets, Method::DesignAveraged))
}

/// Cached nearest-design distances for common-random-number sweeps over `r`.
///
/// Holds, for each of `n_designs` designs, the sorted squared distances from
/// its targets to the design; `coverage(r)` reproduces
/// [`coverage_design_averaged`] for the same stream exactly.
#[derive(Debug, Clone)]
pub struct DistanceSample {
    per_design: Vec<Vec<f64>>,
    n_targets: usize,
}

impl DistanceSample {
    pub fn draw(q: &CoverageQuery, n_designs: usize, n_targets: usize, stream: SeededStream) -> Result<Self> {
        check_averaging(q, n_designs, n_targets)?;
        let mut per_design = Vec::with_capacity(n_designs);
        for k in 0..n_designs {
            let design = sample_design(&q.scheme, q.n, design_stream(stream).substream(k as u64))?;
            let targets = sample_targets(&q.prior, n_targets, target_stream(stream).substream(k as u64))?;
            per_design.push(Self::sorted(&design, &targets));
        }
        Ok(DistanceSample { per_design, n_targets })
    }

    /// Distances from conditional targets to one fixed design.
    pub fn for_design(q: &CoverageQuery, design: &Design, n_targets: usize, stream: SeededStream) -> Result<Self> {
        q.validate()?;
        if design.is_empty() || n_targets == 0 {
            return domain("design and targets must be nonempty");
        }
        let targets = sample_targets(&q.prior, n_targets, target_stream(stream))?;
        Ok(DistanceSample { per_design: vec![Self::sorted(design, &targets)], n_targets })
    }

    fn sorted(design: &Design, targets: &[f64]) -> Vec<f64> {
        let mut d = min_sq_distances(design, targets);
        d.sort_by(f64::total_cmp);
        d
    }

    pub fn n_designs(&self) -> usize {
        self.per_design.len()
    }

    pub fn coverage(&self, r: f64) -> CoverageEstimate {
        let r2 = r * r;
        let values: Vec<f64> = self
            .per_design
            .iter()
            .map(|d| d.partition_point(|&x| x <= r2) as f64 / self.n_targets as f64)
            .collect();
        let method = if self.per_design.len() == 1 { Method::DesignConditional } else { Method::DesignAveraged };
        let mut est = average(&values, self.n_targets, method);
        if self.per_design.len() == 1 {
            est.method = Method::DesignConditional;
        }
        est
    }

    /// Largest pooled distance; coverage reaches 1 there.
    pub fn max_distance(&self) -> f64 {
        self.per_design.iter().filter_map(|d| d.last()).fold(0.0f64, |a, &b| a.max(b)).sqrt()
    }
}

/// How the product form evaluates `p(U) = P_X{|U - X| <= r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerMethod {
    Edgeworth(EdgeworthConfig),
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductFormEstimate {
    pub estimate: CoverageEstimate,
    /// Inner Monte Carlo noise may bias `1 - (1 - p̂)^n` noticeably.
    pub bias_warning: bool,
    /// `n · max_U p̂(1 - p̂) / inner`; zero for analytic inner methods.
    pub bias_indicator: f64,
}

/// `1 - (1 - p)^n`, accurate for tiny `p` and huge `n`.
pub fn hit_probability(p: f64, n: usize) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    -(n as f64 * (-p).ln_1p()).exp_m1()
}

/// Neumaier-compensated sum of `(value, value²)` pairs.
#[derive(Debug, Clone, Copy, Default)]
struct Moments2 {
    sum: f64,
    comp: f64,
    sum_sq: f64,
}

impl Moments2 {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
        self.sum_sq += v * v;
    }

    fn merge(&mut self, other: &Moments2) {
        self.add(other.sum);
        self.comp += other.comp;
        self.sum_sq += other.sum_sq;
    }

    fn mean_and_se(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        let mean = (self.sum + self.comp) / nf;
        let var = if n > 1 { ((self.sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
        (mean, (var / nf).sqrt())
    }
}

/// `E_U[1 - (1 - p(U))^n]` by Monte Carlo over `U`.
pub fn coverage_product_form(
    q: &CoverageQuery,
    n_targets: usize,
    inner: InnerMethod,
    stream: SeededStream,
) -> Result<ProductFormEstimate> {
    q.validate()?;
    q.require_iid()?;
    if n_targets == 0 {
        return domain("n_targets must be positive");
    }
    if let InnerMethod::MonteCarlo { samples: 0 } = inner {
        return domain("inner Monte Carlo needs at least one sample");
    }
    let d = q.dim;
    let targets = sample_targets(&q.prior, n_targets, target_stream(stream))?;
    let model = IntersectionModel::new(q.scheme.delta, q.scheme.effective_alpha())?;
    let inner_stream = stream.child("inner");
    let per_chunk: Vec<Result<(Moments2, f64)>> = targets
        .par_chunks(CHUNK * d)
        .enumerate()
        .map(|(c, block)| {
            let mut acc = Moments2::default();
            let mut worst = 0.0f64;
            for (i, u) in block.chunks_exact(d).enumerate() {
                let p = match inner {
                    InnerMethod::Edgeworth(cfg) => model.edgeworth(u, q.radius, cfg)?.probability,
                    InnerMethod::MonteCarlo { samples } => {
                        let idx = (c * CHUNK + i) as u64;
                        let p = mc_intersection_oracle(
                            &Point::new(u.to_vec())?,
                            q.scheme.delta,
                            q.scheme.effective_alpha(),
                            q.radius,
                            samples,
                            inner_stream.substream(idx),
                        )?
                        .value;
                        worst = worst.max(p * (1.0 - p));
                        p
                    }
                };
                acc.add(hit_probability(p, q.n));
            }
            Ok((acc, worst))
        })
        .collect();
    let mut total = Moments2::default();
    let mut worst = 0.0f64;
    for r in per_chunk {
        let (acc, w) = r?;
        total.merge(&acc);
        worst = worst.max(w);
    }
    let (value, std_error) = total.mean_and_se(n_targets);
    let bias_indicator = match inner {
        InnerMethod::MonteCarlo { samples } => q.n as f64 * worst / samples as f64,
        InnerMethod::Edgeworth(_) => 0.0,
    };
    Ok(ProductFormEstimate {
        estimate: CoverageEstimate {
            value: value.clamp(0.0, 1.0),
            std_error,
            n_targets,
            n_designs: 1,
            method: Method::ProductForm,
        },
        bias_warning: bias_indicator > 0.01,
        bias_indicator,
    })
}

/// How a Jensen bound evaluates its inner probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JensenInner {
    Edgeworth(EdgeworthConfig),
    MonteCarlo { samples: usize, stream: SeededStream },
}

/// A bound value with the standard error inherited from a simulated inner probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub std_error: f64,
    /// Single-ball probability that went into the bound.
    pub inner_probability: f64,
}

fn jensen_bound_at(q: &CoverageQuery, centre: f64, inner: JensenInner) -> Result<BoundValue> {
    q.validate()?;
    if q.scheme.kind != SchemeKind::UniformDeltaCube || !q.prior.is_uniform() {
        return domain("Jensen bounds need a uniform prior and an i.i.d. uniform scheme");
    }
    let u = Point::splat(q.dim, centre)?;
    let (p, p_se) = match exact_ball_probability(&u, q.scheme.delta, q.radius)? {
        Some(p) => (p, 0.0),
        None => match inner {
            JensenInner::Edgeworth(cfg) => {
                let model = IntersectionModel::new(q.scheme.delta, 1.0)?;
                (model.edgeworth(u.coords(), q.radius, cfg)?.probability, 0.0)
            }
            JensenInner::MonteCarlo { samples, stream } => {
                let e = mc_intersection_oracle(&u, q.scheme.delta, 1.0, q.radius, samples, stream)?;
                (e.value, e.std_error)
            }
        },
    };
    let value = hit_probability(p, q.n);
    // d/dp [1 - (1 - p)^n] = n (1 - p)^{n-1}
    let slope = if p < 1.0 { q.n as f64 * ((q.n as f64 - 1.0) * (-p).ln_1p()).exp() } else { 0.0 };
    Ok(BoundValue { value, std_error: slope * p_se, inner_probability: p })
}

/// Exact `P_X{|U - X| <= r}` for uniform `X` on the δ-cube when the ball is
/// inside the cube (`r^d V_d / δ^d`) or contains it (1).
pub fn exact_ball_probability(u: &Point, delta: f64, r: f64) -> Result<Option<f64>> {
    let cube = crate::geometry::DeltaCube::new(u.dim(), delta)?;
    let ball = Ball::new(u.clone(), r)?;
    if r == 0.0 {
        return Ok(Some(0.0));
    }
    if cube.contains_ball(&ball) {
        let d = u.dim() as f64;
        let ln_p = d * r.ln() + ln_unit_ball_volume(u.dim())? - d * delta.ln();
        return Ok(Some(ln_p.exp().min(1.0)));
    }
    let far: f64 = u
        .coords()
        .iter()
        .map(|&c| {
            let m = (c - cube.lower()).abs().max((c - cube.upper()).abs());
            m * m
        })
        .sum();
    if far <= r * r {
        return Ok(Some(1.0));
    }
    Ok(None)
}

/// `1 - (1 - P_{U=1/2,δ,r})^n`.
pub fn jensen_bound_center(q: &CoverageQuery, inner: JensenInner) -> Result<BoundValue> {
    jensen_bound_at(q, 0.5, inner)
}

/// `1 - (1 - P_{U=3/4,δ,r})^n`.
pub fn jensen_bound_refined(q: &CoverageQuery, inner: JensenInner) -> Result<BoundValue> {
    jensen_bound_at(q, 0.75, inner)
}

/// `1 - (1 - p̄)^n` with `p̄ = E_{U,X} 1{|U - X| <= r}` from `inner` paired draws.
pub fn product_form_approximation(q: &CoverageQuery, inner: usize, stream: SeededStream) -> Result<CoverageEstimate> {
    q.validate()?;
    q.require_iid()?;
    if inner == 0 {
        return domain("inner must be positive");
    }
    let d = q.dim;
    let cube = q.scheme.cube();
    let law = SymmetricBeta::new(q.scheme.effective_alpha())?;
    let prior = q.prior;
    let r2 = q.radius * q.radius;
    let pairs = stream.child("pairs");
    let chunks = inner.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = pairs.substream(c as u64).rng();
            let len = CHUNK.min(inner - c * CHUNK);
            let mut u = vec![0.0; d];
            let mut hits = 0u64;
            for _ in 0..len {
                prior.sample_into(&mut rng, &mut u);
                let s: f64 = u
                    .iter()
                    .map(|&uj| {
                        let t = uj - cube.map_unit(law.sample(&mut rng));
                        t * t
                    })
                    .sum();
                if s <= r2 {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let p = hits as f64 / inner as f64;
    let p_se = (p * (1.0 - p) / inner as f64).sqrt();
    let slope = if p < 1.0 { q.n as f64 * ((q.n as f64 - 1.0) * (-p).ln_1p()).exp() } else { 0.0 };
    Ok(CoverageEstimate {
        value: hit_probability(p, q.n),
        std_error: slope * p_se,
        n_targets: inner,
        n_designs: 1,
        method: Method::PairedIntersection,
    })
}

/// `max` over uniform probes of `ρ(U, X_n)`: a lower estimate of the covering radius.
pub fn approx_covering_radius(design: &Design, n_probes: usize, stream: SeededStream) -> Result<f64> {
    if design.is_empty() {
        return domain("design is empty");
    }
    if n_probes == 0 {
        return domain("n_probes must be positive");
    }
    let prior = TargetPrior::uniform(design.dim())?;
    let probes = sample_targets(&prior, n_probes, stream.child("probes"))?;
    let d = min_sq_distances(design, &probes);
    Ok(d.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt())
}
