//! Closed-form and Monte Carlo solvers for `n_γ` and `r_{n,1-γ}`.
//!
//! The empirical solvers reuse the target and design streams of
//! [`crate::coverage`], so a radius or size returned here reproduces the
//! level `1 - γ` when fed back into `coverage_design_averaged` with the same
//! stream.

use crate::coverage::{coverage_design_averaged, CoverageEstimate, CoverageQuery, DistanceSample};
use crate::error::{domain, Error, Result};
use crate::geometry::{check_delta, ln_unit_ball_volume, Design};
use crate::kernels::first_hits;
use crate::rng::SeededStream;
use crate::sampling::{sample_targets, DesignGenerator, SchemeKind};

/// Default cap for the empirical `n_γ` search.
pub const DEFAULT_N_CAP: usize = 1 << 22;
/// Default bisection tolerance on `r`.
pub const DEFAULT_RADIUS_TOL: f64 = 0.005;

/// Miss probability `γ` of a "with probability at least `1 - γ`" statement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLevel {
    gamma: f64,
}

impl GammaLevel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return domain(format!("gamma must lie in (0, 1), got {gamma}"));
        }
        Ok(GammaLevel { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `1 - γ`.
    pub fn level(&self) -> f64 {
        1.0 - self.gamma
    }

    /// `t_{1-γ}^d = -ln γ`, the quantile of the limiting law `1 - exp(-t^d)`
    /// raised to the power `d`.
    pub fn neg_ln(&self) -> f64 {
        -self.gamma.ln()
    }
}

/// A positive quantity stored through its base-10 logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Magnitude {
    pub log10: f64,
}

impl Magnitude {
    fn from_ln(ln: f64) -> Self {
        Magnitude { log10: ln / std::f64::consts::LN_10 }
    }

    /// `None` when the value exceeds `f64::MAX`.
    pub fn value(&self) -> Option<f64> {
        let v = 10f64.powf(self.log10);
        v.is_finite().then_some(v)
    }

    pub fn overflows(&self) -> bool {
        self.value().is_none()
    }

    /// Nearest integer, when representable.
    pub fn rounded(&self) -> Option<u64> {
        self.value().filter(|v| *v < u64::MAX as f64).map(|v| v.round() as u64)
    }
}

/// `⌈ln γ / ln(1 - p)⌉`, at least 1.
pub fn n_gamma_classical(p: f64, gamma: GammaLevel) -> Result<u64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("hit probability must lie in (0, 1), got {p}"));
    }
    let n = (gamma.gamma().ln() / (-p).ln_1p()).ceil();
    if !(n < u64::MAX as f64) {
        return Err(Error::Numeric(format!("n_gamma = {n:e} does not fit in u64")));
    }
    Ok((n as u64).max(1))
}

/// `-ln γ / (ε^d V_d)`.
pub fn n_gamma_asymptotic(d: usize, epsilon: f64, gamma: GammaLevel) -> Result<Magnitude> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return domain(format!("epsilon must be positive, got {epsilon}"));
    }
    let ln = gamma.neg_ln().ln() - d as f64 * epsilon.ln() - ln_unit_ball_volume(d)?;
    Ok(Magnitude::from_ln(ln))
}

/// `log10 n(γ)` with `n(γ) ≃ exp{-ln γ / P_U(B)}` and `P_U(B) = ε^d V_d`:
/// the sample size needed by a sampler whose mixture weight on the uniform
/// component decays like `1/j`.
pub fn worst_case_n_mixture(d: usize, epsilon: f64, gamma: GammaLevel) -> Result<f64> {
    let exponent = n_gamma_asymptotic(d, epsilon, gamma)?;
    match exponent.value() {
        Some(v) => Ok(v / std::f64::consts::LN_10),
        None => Err(Error::Numeric(format!("log10 n(gamma) overflows: its own log10 is {}", exponent.log10))),
    }
}

/// `n^{-1/d} V_d^{-1/d} (-ln γ)^{1/d}`.
pub fn asymptotic_radius(d: usize, n: usize, gamma: GammaLevel) -> Result<f64> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    let ln = (gamma.neg_ln().ln() - (n as f64).ln() - ln_unit_ball_volume(d)?) / d as f64;
    Ok(ln.exp())
}

/// Limiting coverage `1 - exp(-n V_d r^d)`.
pub fn asymptotic_coverage(d: usize, n: usize, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let ln_t = (n as f64).ln() + ln_unit_ball_volume(d)? + d as f64 * r.ln();
    Ok(-(-ln_t.exp()).exp_m1())
}

/// Monte Carlo budget: `designs` independent designs, `targets` targets each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McBudget {
    pub designs: usize,
    pub targets: usize,
}

impl McBudget {
    pub fn new(designs: usize, targets: usize) -> Result<Self> {
        if designs == 0 || targets == 0 {
            return domain("Monte Carlo budgets must be positive");
        }
        Ok(McBudget { designs, targets })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusQuantile {
    /// Midpoint of the final bracket.
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    /// Estimated coverage at `upper`.
    pub coverage: CoverageEstimate,
}

/// Smallest `r` whose design-averaged coverage reaches `1 - γ`, located to
/// within `tol` by bisection on a common-random-number coverage curve.
/// `q.radius` is ignored.
pub fn empirical_radius_quantile(
    q: &CoverageQuery,
    gamma: GammaLevel,
    budget: McBudget,
    tol: f64,
    stream: SeededStream,
) -> Result<RadiusQuantile> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let sample = if q.scheme.kind == SchemeKind::SobolDeltaCube {
        let design = crate::sampling::sample_design(&q.scheme, q.n, stream.child("designs").substream(0))?;
        DistanceSample::for_design(q, &design, budget.targets, stream)?
    } else {
        DistanceSample::draw(q, budget.designs, budget.targets, stream)?
    };
    radius_from_sample(&sample, q, gamma, tol)
}

fn radius_from_sample(sample: &DistanceSample, q: &CoverageQuery, gamma: GammaLevel, tol: f64) -> Result<RadiusQuantile> {
    let level = gamma.level();
    let diameter = (q.dim as f64).sqrt();
    let mut lo = 0.0;
    let mut hi = (2.0 * asymptotic_radius(q.dim, q.n, gamma)?).min(diameter);
    while sample.coverage(hi).value < level {
        if hi >= diameter {
            return Err(Error::Numeric(format!("coverage stays below {level} up to the cube diameter {diameter}")));
        }
        lo = hi;
        hi = (2.0 * hi).min(diameter);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if sample.coverage(mid).value >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RadiusQuantile { radius: 0.5 * (lo + hi), lower: lo, upper: hi, coverage: sample.coverage(hi) })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return domain("delta grid is empty");
    }
    for &d in grid {
        check_delta(d)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("delta grid must be strictly increasing");
    }
    Ok(())
}

/// `0.05, 0.10, .., 1.0`.
pub fn default_delta_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSweepResult {
    pub grid: Vec<(f64, CoverageEstimate)>,
    pub best_delta: f64,
    pub best_coverage: f64,
}

/// Coverage at each δ of `grid` with shared random numbers; the best δ
/// maximises coverage, ties going to the larger δ. `q.scheme.delta` is
/// ignored.
pub fn delta_sweep(q: &CoverageQuery, grid: &[f64], budget: McBudget, stream: SeededStream) -> Result<DeltaSweepResult> {
    check_grid(grid)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &delta in grid {
        let qd = CoverageQuery { scheme: q.scheme.with_delta(delta)?, ..*q };
        rows.push((delta, coverage_design_averaged(&qd, budget.designs, budget.targets, stream)?));
    }
    let (best_delta, best) = rows
        .iter()
        .fold((grid[0], f64::NEG_INFINITY), |acc, (d, e)| if e.value >= acc.1 { (*d, e.value) } else { acc });
    Ok(DeltaSweepResult { grid: rows, best_delta, best_coverage: best })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRadius {
    pub per_delta: Vec<(f64, RadiusQuantile)>,
    pub best_delta: f64,
    pub best: RadiusQuantile,
}

/// Radius quantile at each δ of `grid`; the best δ minimises the radius,
/// ties going to the larger δ.
pub fn optimal_delta_radius(
    q: &CoverageQuery,
    gamma: GammaLevel,
    grid: &[f64],
    budget: McBudget,
    tol: f64,
    stream: SeededStream,
) -> Result<DeltaRadius> {
    check_grid(grid)?;
    let mut per_delta = Vec::with_capacity(grid.len());
    for &delta in grid {
        let qd = CoverageQuery { scheme: q.scheme.with_delta(delta)?, ..*q };
        per_delta.push((delta, empirical_radius_quantile(&qd, gamma, budget, tol, stream)?));
    }
    let (best_delta, best) = smallest_radius(&per_delta);
    Ok(DeltaRadius { per_delta, best_delta, best })
}

fn smallest_radius(per_delta: &[(f64, RadiusQuantile)]) -> (f64, RadiusQuantile) {
    per_delta
        .iter()
        .copied()
        .reduce(|acc, cur| if cur.1.radius < acc.1.radius || (cur.1.radius == acc.1.radius && cur.0 > acc.0) { cur } else { acc })
        .expect("grid is nonempty")
}

/// [`optimal_delta_radius`] on a coarse grid, then at the two neighbours
/// `best ± step` of the coarse optimum.
pub fn refined_delta_radius(
    q: &CoverageQuery,
    gamma: GammaLevel,
    coarse: &[f64],
    step: f64,
    budget: McBudget,
    tol: f64,
    stream: SeededStream,
) -> Result<DeltaRadius> {
    if !(step > 0.0) {
        return domain(format!("refinement step must be positive, got {step}"));
    }
    let first = optimal_delta_radius(q, gamma, coarse, budget, tol, stream)?;
    let extra: Vec<f64> = [first.best_delta - step, first.best_delta + step]
        .into_iter()
        .map(|d| (d * 1e12).round() / 1e12)
        .filter(|&d| d > 0.0 && d <= 1.0 && !coarse.iter().any(|c| (c - d).abs() < 1e-9))
        .collect();
    if extra.is_empty() {
        return Ok(first);
    }
    let second = optimal_delta_radius(q, gamma, &extra, budget, tol, stream)?;
    let mut per_delta = first.per_delta;
    per_delta.extend(second.per_delta);
    per_delta.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (best_delta, best) = smallest_radius(&per_delta);
    Ok(DeltaRadius { per_delta, best_delta, best })
}

/// Result of an `n_γ` search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NGammaOutcome {
    Found { n: usize, coverage: f64 },
    /// A single design point already reaches the level.
    Degenerate { coverage: f64 },
    /// The level is not reached with `n_cap` points.
    Unreachable { n_cap: usize, coverage: f64 },
}

impl NGammaOutcome {
    pub fn value(&self) -> Option<usize> {
        match self {
            NGammaOutcome::Found { n, .. } => Some(*n),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.value().is_some()
    }
}

const FIRST_ROUND: usize = 64;

/// Smallest `n` whose design-averaged coverage reaches `1 - γ`, over nested
/// designs: each target records the index of the first design point within
/// `r`, and the answer is an order statistic of those indices. `q.n` is
/// ignored.
pub fn empirical_n_gamma(
    q: &CoverageQuery,
    gamma: GammaLevel,
    budget: McBudget,
    n_cap: usize,
    stream: SeededStream,
) -> Result<NGammaOutcome> {
    if !(q.radius > 0.0) {
        return domain(format!("n_gamma needs r > 0, got {}", q.radius));
    }
    if n_cap == 0 {
        return domain("n_cap must be positive");
    }
    q.validate()?;
    let designs = if q.scheme.kind == SchemeKind::SobolDeltaCube { 1 } else { budget.designs };
    let total = designs * budget.targets;
    let need = ((gamma.level() * total as f64) - 1e-9).ceil().max(1.0) as usize;
    let r2 = q.radius * q.radius;

    let mut runs = Vec::with_capacity(designs);
    for k in 0..designs {
        let targets = sample_targets(&q.prior, budget.targets, stream.child("targets").substream(k as u64))?;
        let gen = DesignGenerator::new(q.scheme, stream.child("designs").substream(k as u64))?;
        runs.push(Run { gen, design: Design::with_capacity(q.dim, 0), targets, hits: vec![None; budget.targets] });
    }

    let mut m = FIRST_ROUND.min(n_cap);
    loop {
        for run in runs.iter_mut() {
            let from = run.design.len();
            if let Err(e) = run.gen.extend_to(&mut run.design, m) {
                // Vertex designs run out of distinct vertices.
                if matches!(e, Error::Infeasible(_)) {
                    return Ok(NGammaOutcome::Unreachable { n_cap: run.design.len(), coverage: hit_fraction(&runs, total) });
                }
                return Err(e);
            }
            first_hits(&run.design, from, &run.targets, r2, &mut run.hits);
        }
        let hit: usize = runs.iter().map(|r| r.hits.iter().flatten().count()).sum();
        if hit >= need {
            break;
        }
        if m >= n_cap {
            return Ok(NGammaOutcome::Unreachable { n_cap, coverage: hit as f64 / total as f64 });
        }
        m = (2 * m).min(n_cap);
    }

    let mut idx: Vec<usize> = runs.iter().flat_map(|r| r.hits.iter().flatten().copied()).collect();
    idx.sort_unstable();
    let n = idx[need - 1] + 1;
    let covered = idx.partition_point(|&i| i < n);
    Ok(NGammaOutcome::Found { n, coverage: covered as f64 / total as f64 })
}

struct Run {
    gen: DesignGenerator,
    design: Design,
    targets: Vec<f64>,
    hits: Vec<Option<usize>>,
}

fn hit_fraction(runs: &[Run], total: usize) -> f64 {
    runs.iter().map(|r| r.hits.iter().flatten().count()).sum::<usize>() as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaNGamma {
    pub per_delta: Vec<(f64, NGammaOutcome)>,
    /// Best δ and its `n_γ`, including the degenerate `n_γ = 1` case.
    pub best: Option<(f64, usize)>,
    /// `Degenerate` when the best size is a single point.
    pub outcome: NGammaOutcome,
}

/// `n_γ` minimised over `grid`. Each δ is searched only up to the best size
/// found so far; ties go to the larger δ.
pub fn optimal_delta_n_gamma(
    q: &CoverageQuery,
    gamma: GammaLevel,
    grid: &[f64],
    budget: McBudget,
    n_cap: usize,
    stream: SeededStream,
) -> Result<DeltaNGamma> {
    check_grid(grid)?;
    let mut per_delta = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, usize, f64)> = None;
    for &delta in grid.iter().rev() {
        let cap = best.map_or(n_cap, |(_, n, _)| n);
        let qd = CoverageQuery { scheme: q.scheme.with_delta(delta)?, ..*q };
        let out = empirical_n_gamma(&qd, gamma, budget, cap, stream)?;
        if let NGammaOutcome::Found { n, coverage } = out {
            if best.is_none_or(|(_, b, _)| n < b) {
                best = Some((delta, n, coverage));
            }
        }
        per_delta.push((delta, out));
    }
    per_delta.reverse();
    let outcome = match best {
        Some((_, 1, coverage)) => NGammaOutcome::Degenerate { coverage },
        Some((_, n, coverage)) => NGammaOutcome::Found { n, coverage },
        None => NGammaOutcome::Unreachable {
            n_cap,
            coverage: per_delta.iter().map(|(_, o)| outcome_coverage(o)).fold(0.0, f64::max),
        },
    };
    Ok(DeltaNGamma { per_delta, best: best.map(|(d, n, _)| (d, n)), outcome })
}

fn outcome_coverage(o: &NGammaOutcome) -> f64 {
    match *o {
        NGammaOutcome::Found { coverage, .. }
        | NGammaOutcome::Degenerate { coverage }
        | NGammaOutcome::Unreachable { coverage, .. } => coverage,
    }
}
