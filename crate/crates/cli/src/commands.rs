use std::time::Instant;

use weakcover::coverage::{
    coverage_design_averaged, coverage_design_conditional, exact_ball_probability, jensen_bound_center,
    jensen_bound_refined, product_form_approximation, CoverageQuery, DistanceSample, JensenInner,
};
use weakcover::geometry::unit_ball_volume;
use weakcover::intersect::{kappa_density_sample, kappa_value, mc_intersection_oracle, EdgeworthConfig, IntersectionModel};
use weakcover::sampling::{sample_design, SamplingScheme, SchemeKind, TargetPrior};
use weakcover::solvers::{
    asymptotic_coverage, asymptotic_radius, delta_sweep, empirical_n_gamma, empirical_radius_quantile,
    n_gamma_asymptotic, optimal_delta_n_gamma, optimal_delta_radius, refined_delta_radius, GammaLevel, McBudget,
    NGammaOutcome,
};
use weakcover::{Design, Point, SeededStream};

use crate::args::*;
use crate::output::{Cell, Row};
use crate::CliError;

pub enum Output {
    Rows(Vec<Row>),
    Design(Design),
}

type Res<T> = Result<T, CliError>;

fn usage<T>(flag: &str, msg: impl std::fmt::Display) -> Res<T> {
    Err(CliError::Usage(format!("{flag}: {msg}")))
}

fn timed<T>(f: impl FnOnce() -> Res<T>) -> Res<(T, f64)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64()))
}

/// `a,b,c` or `start:stop:step` (inclusive).
pub fn parse_grid(flag: &str, s: &str) -> Res<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().or_else(|_| usage(flag, format!("'{t}' is not a number")));
    let grid = match parts.as_slice() {
        [list] => list.split(',').map(num).collect::<Res<Vec<f64>>>()?,
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return usage(flag, "range needs start <= stop and a positive step");
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            (0..=count).map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12).collect()
        }
        _ => return usage(flag, format!("expected a comma list or start:stop:step, got '{s}'")),
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return usage(flag, "grid values must be finite");
    }
    Ok(grid)
}

fn parse_point(flag: &str, s: &str, dim: usize) -> Res<Point> {
    let vals = parse_grid(flag, s)?;
    let coords = match vals.len() {
        1 => vec![vals[0]; dim],
        k if k == dim => vals,
        k => return usage(flag, format!("expected 1 or {dim} coordinates, got {k}")),
    };
    if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return usage(flag, "coordinates must lie in [0, 1]");
    }
    Point::new(coords).or_else(|e| usage(flag, e))
}

fn check_dim(dim: usize) -> Res<()> {
    if dim == 0 {
        return usage("--dim", "must be at least 1");
    }
    Ok(())
}

fn check_positive(flag: &str, v: usize) -> Res<()> {
    if v == 0 {
        return usage(flag, "must be at least 1");
    }
    Ok(())
}

fn gamma_level(g: f64) -> Res<GammaLevel> {
    GammaLevel::new(g).or_else(|e| usage("--gamma", e))
}

fn radius_grid(grid: &[f64]) -> Res<()> {
    if grid.iter().any(|r| *r < 0.0) {
        return usage("--r-grid", "radii must be nonnegative");
    }
    Ok(())
}

fn delta_grid(flag: &str, s: &str) -> Res<Vec<f64>> {
    let g = parse_grid(flag, s)?;
    if g.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) {
        return usage(flag, "deltas must lie in (0, 1]");
    }
    if g.windows(2).any(|w| w[0] >= w[1]) {
        return usage(flag, "deltas must be strictly increasing");
    }
    Ok(g)
}

fn scheme_from(a: &SchemeArgs, dim: usize) -> Res<(SamplingScheme, TargetPrior)> {
    let kind: SchemeKind = a.scheme.parse().or_else(|e| usage("--scheme", e))?;
    if !(a.delta > 0.0 && a.delta <= 1.0) {
        return usage("--delta", format!("must lie in (0, 1], got {}", a.delta));
    }
    if kind == SchemeKind::BetaDeltaCube && !(a.alpha > 0.0 && a.alpha.is_finite()) {
        return usage("--alpha", format!("must be positive, got {}", a.alpha));
    }
    let scheme = match kind {
        SchemeKind::VertexDesign => SamplingScheme::vertex(dim)?,
        k => SamplingScheme::build(k, dim, a.delta, a.alpha)?,
    };
    let prior = match a.prior.as_str() {
        "uniform" => TargetPrior::uniform(dim)?,
        "beta" => {
            if !(a.prior_alpha > 0.0 && a.prior_alpha.is_finite()) {
                return usage("--prior-alpha", format!("must be positive, got {}", a.prior_alpha));
            }
            TargetPrior::product_beta(dim, a.prior_alpha)?
        }
        other => return usage("--prior", format!("unknown prior '{other}' (uniform, beta)")),
    };
    Ok((scheme, prior))
}

fn budget_from(designs: usize, targets: usize) -> Res<McBudget> {
    check_positive("--designs", designs)?;
    check_positive("--targets", targets)?;
    Ok(McBudget::new(designs, targets)?)
}

pub fn execute(cmd: &Command, stream: SeededStream) -> Res<Output> {
    let rows = match cmd {
        Command::Coverage(a) => coverage(a, stream)?,
        Command::Table1(a) => table1(a, stream)?,
        Command::Ngamma(a) => ngamma(a, stream)?,
        Command::Intersect(a) => intersect(a, stream)?,
        Command::Kappa(a) => kappa(a, stream)?,
        Command::SobolCompare(a) => sobol_compare(a, stream)?,
        Command::DeltaSweep(a) => sweep(a, stream)?,
        Command::Radius(a) => radius(a, stream)?,
        Command::Design(a) => return design(a, stream).map(Output::Design),
    };
    Ok(Output::Rows(rows))
}

fn coverage(a: &CoverageArgs, stream: SeededStream) -> Res<Vec<Row>> {
    check_dim(a.dim)?;
    check_positive("--n", a.n)?;
    let grid = match (a.r, &a.r_grid) {
        (Some(r), None) => vec![r],
        (None, Some(g)) => parse_grid("--r-grid", g)?,
        (Some(_), Some(_)) => return usage("--r", "give either --r or --r-grid, not both"),
        (None, None) => return usage("--r-grid", "one of --r or --r-grid is required"),
    };
    radius_grid(&grid)?;
    let (scheme, prior) = scheme_from(&a.scheme, a.dim)?;
    let budget = budget_from(a.budget.designs, a.budget.targets)?;
    if (a.jensen || a.product) && a.inner == 0 {
        return usage("--inner", "must be at least 1");
    }
    if a.jensen && (scheme.kind != SchemeKind::UniformDeltaCube || !prior.is_uniform()) {
        return usage("--jensen", "Jensen bounds need --scheme uniform and --prior uniform");
    }
    if a.product && !scheme.kind.is_iid() {
        return usage("--product", "the product form needs an i.i.d. scheme (uniform or beta)");
    }
    let q = CoverageQuery::new(a.dim, grid[0], a.n, scheme, prior)?;
    let (sample, setup) = timed(|| {
        Ok(if scheme.kind == SchemeKind::SobolDeltaCube {
            let design = sample_design(&scheme, a.n, stream.child("designs").substream(0))?;
            DistanceSample::for_design(&q, &design, budget.targets, stream)?
        } else {
            DistanceSample::draw(&q, budget.designs, budget.targets, stream)?
        })
    })?;
    let share = setup / grid.len() as f64;
    let inner = match a.inner_method {
        InnerKind::Edgeworth => JensenInner::Edgeworth(EdgeworthConfig::new(a.order)),
        InnerKind::Mc => JensenInner::MonteCarlo { samples: a.inner, stream: stream.child("jensen") },
    };
    let base = |quantity, est: Cell, method: &str, r: f64| {
        Row::new(quantity, est, method).d(a.dim).n(a.n).r(r).delta(scheme.delta).alpha(scheme.effective_alpha()).x(r)
    };
    let mut rows = Vec::new();
    for &r in &grid {
        let est = sample.coverage(r);
        rows.push(base("coverage", est.value.into(), est.method.tag(), r).se(est.std_error).timed(share));
        if a.asymptotic {
            let (v, dt) = timed(|| Ok(asymptotic_coverage(a.dim, a.n, r)?))?;
            rows.push(base("asymptotic", v.into(), "limit_law", r).timed(dt));
        }
        if a.jensen {
            let qr = q.with_radius(r)?;
            let tag = match a.inner_method {
                InnerKind::Mc => "jensen;inner=mc".to_string(),
                InnerKind::Edgeworth => format!("jensen;inner=edgeworth{}", a.order),
            };
            let (c, dt) = timed(|| Ok(jensen_bound_center(&qr, inner)?))?;
            rows.push(base("jensen_center", c.value.into(), &tag, r).se(c.std_error).timed(dt));
            let (f, dt) = timed(|| Ok(jensen_bound_refined(&qr, inner)?))?;
            rows.push(base("jensen_refined", f.value.into(), &tag, r).se(f.std_error).timed(dt));
        }
        if a.product {
            let qr = q.with_radius(r)?;
            let (p, dt) = timed(|| Ok(product_form_approximation(&qr, a.inner, stream.child("paired"))?))?;
            rows.push(base("product_form", p.value.into(), p.method.tag(), r).se(p.std_error).timed(dt));
        }
    }
    Ok(rows)
}

const TABLE1_DIMS: [usize; 6] = [5, 10, 15, 20, 25, 50];
const TABLE1_SIZES: [usize; 4] = [100, 1000, 10_000, 100_000];

fn parse_cells(s: &str) -> Res<Vec<(usize, usize)>> {
    if s.trim() == "all" {
        return Ok(TABLE1_DIMS.iter().flat_map(|&d| TABLE1_SIZES.iter().map(move |&n| (d, n))).collect());
    }
    s.split(',')
        .map(|cell| {
            let (d, n) = cell.trim().split_once('x').ok_or_else(|| CliError::Usage(format!("--cells: '{cell}' is not dxn")))?;
            let d: usize = d.parse().or_else(|_| usage("--cells", format!("bad dimension in '{cell}'")))?;
            let n: usize = n.parse().or_else(|_| usage("--cells", format!("bad size in '{cell}'")))?;
            if d == 0 || n == 0 {
                return usage("--cells", format!("'{cell}' needs d, n >= 1"));
            }
            Ok((d, n))
        })
        .collect()
}

fn table1(a: &Table1Args, stream: SeededStream) -> Res<Vec<Row>> {
    let cells = parse_cells(&a.cells)?;
    let gamma = gamma_level(a.gamma)?;
    let coarse = delta_grid("--delta-grid", &a.delta_grid)?;
    if !(a.tol > 0.0) {
        return usage("--tol", "must be positive");
    }
    if !(a.refine_step > 0.0) {
        return usage("--refine-step", "must be positive");
    }
    let budget = budget_from(a.designs, a.targets)?;
    let mut rows = Vec::new();
    for (d, n) in cells {
        let cell_stream = stream.child(&format!("{d}x{n}"));
        let q = CoverageQuery::uniform(d, 0.0, n, 1.0)?;
        let (res, dt) = timed(|| Ok(refined_delta_radius(&q, gamma, &coarse, a.refine_step, budget, a.tol, cell_stream)?))?;
        let unit = match res.per_delta.iter().find(|(delta, _)| *delta == 1.0) {
            Some((_, rq)) => *rq,
            None => empirical_radius_quantile(&q, gamma, budget, a.tol, cell_stream)?,
        };
        let tag = |rq: &weakcover::solvers::RadiusQuantile| {
            if rq.coverage.std_error > 0.01 { "bisection;low_budget" } else { "bisection" }
        };
        let base = |quantity, est: f64, method: &str, delta: f64| {
            Row::new(quantity, est, method).d(d).n(n).delta(delta).gamma(a.gamma).timed(dt)
        };
        rows.push(base("r_unit", unit.radius, tag(&unit), 1.0).se(0.5 * (unit.upper - unit.lower)));
        rows.push(
            base("r_delta_opt", res.best.radius, tag(&res.best), res.best_delta)
                .se(0.5 * (res.best.upper - res.best.lower)),
        );
        rows.push(base("delta_opt", res.best_delta, "grid_argmin", res.best_delta));
    }
    Ok(rows)
}

fn outcome_cell(o: &NGammaOutcome) -> (Cell, &'static str) {
    match o {
        NGammaOutcome::Found { n, .. } => (Cell::Int(*n as u64), "first_hit"),
        NGammaOutcome::Degenerate { .. } => (Cell::Na, "first_hit;degenerate"),
        NGammaOutcome::Unreachable { .. } => (Cell::Na, "first_hit;unreachable"),
    }
}

fn ngamma(a: &NgammaArgs, stream: SeededStream) -> Res<Vec<Row>> {
    check_dim(a.dim)?;
    let grid = match (&a.r_grid, a.dim) {
        (Some(g), _) => parse_grid("--r-grid", g)?,
        (None, 20) => vec![0.9, 0.95, 1.0, 1.05, 1.1, 1.15],
        (None, 50) => vec![2.0, 2.05, 2.1, 2.15, 2.2, 2.25, 2.3],
        (None, _) => return usage("--r-grid", "required unless --dim is 20 or 50"),
    };
    if grid.iter().any(|r| !(*r > 0.0)) {
        return usage("--r-grid", "radii must be positive");
    }
    let gamma = gamma_level(a.gamma)?;
    let deltas = delta_grid("--delta-grid", &a.delta_grid)?;
    check_positive("--n-cap", a.n_cap)?;
    let budget = budget_from(a.designs, a.targets)?;
    let mut rows = Vec::new();
    for &r in &grid {
        let q = CoverageQuery::uniform(a.dim, r, 1, 1.0)?;
        let base = |quantity, est: Cell, method: &str| Row::new(quantity, est, method).d(a.dim).r(r).gamma(a.gamma).x(r);
        let (unit, dt) = timed(|| Ok(empirical_n_gamma(&q, gamma, budget, a.n_cap, stream)?))?;
        let (cell, tag) = outcome_cell(&unit);
        rows.push(base("n_gamma_unit", cell, tag).delta(1.0).timed(dt));
        let (opt, dt) = timed(|| Ok(optimal_delta_n_gamma(&q, gamma, &deltas, budget, a.n_cap, stream)?))?;
        let (cell, tag) = outcome_cell(&opt.outcome);
        let mut row = base("n_gamma_opt", cell, tag).timed(dt);
        let mut delta_row = base("delta_opt", Cell::Na, "grid_argmin").timed(dt);
        if let Some((delta, _)) = opt.best {
            row = row.delta(delta);
            if opt.outcome.is_feasible() {
                delta_row = base("delta_opt", delta.into(), "grid_argmin").delta(delta).timed(dt);
            }
        }
        rows.push(row);
        rows.push(delta_row);
        let asym = n_gamma_asymptotic(a.dim, r, gamma)?;
        let row = match asym.rounded() {
            Some(v) => base("n_gamma_asymptotic", Cell::Int(v), "asymptotic;rounded"),
            None => base("n_gamma_asymptotic", Cell::Na, "asymptotic;overflow"),
        };
        rows.push(row.delta(1.0));
    }
    Ok(rows)
}

fn intersect(a: &IntersectArgs, stream: SeededStream) -> Res<Vec<Row>> {
    check_dim(a.dim)?;
    let u = parse_point("--u", &a.u, a.dim)?;
    let grid = parse_grid("--r-grid", &a.r_grid)?;
    radius_grid(&grid)?;
    check_positive("--inner", a.inner)?;
    if !(a.delta > 0.0 && a.delta <= 1.0) {
        return usage("--delta", "must lie in (0, 1]");
    }
    if !(a.alpha > 0.0 && a.alpha.is_finite()) {
        return usage("--alpha", "must be positive");
    }
    if a.order > 2 {
        return usage("--order", "orders 0, 1 and 2 are available");
    }
    let model = IntersectionModel::new(a.delta, a.alpha)?;
    let cfg = EdgeworthConfig::new(a.order);
    let oracle_stream = stream.child("oracle");
    let mut rows = Vec::new();
    for &r in &grid {
        let base = |quantity, est: f64, method: &str| {
            Row::new(quantity, est, method).d(a.dim).r(r).delta(a.delta).alpha(a.alpha).x(r)
        };
        let (o, dt) = timed(|| Ok(mc_intersection_oracle(&u, a.delta, a.alpha, r, a.inner, oracle_stream)?))?;
        let clt = model.clt(u.coords(), r)?;
        let e = model.edgeworth(u.coords(), r, cfg)?;
        let tag = if e.clamped { format!("edgeworth;order={};clamped", a.order) } else { format!("edgeworth;order={}", a.order) };
        rows.push(base("oracle", o.value, o.method.tag()).se(o.std_error).timed(dt));
        rows.push(base("clt", clt, "clt"));
        rows.push(base("edgeworth", e.probability, &tag));
        rows.push(base("clt_abs_error", (clt - o.value).abs(), "clt").se(o.std_error));
        rows.push(base("edgeworth_abs_error", (e.probability - o.value).abs(), &tag).se(o.std_error));
    }
    Ok(rows)
}

fn kappa(a: &KappaArgs, stream: SeededStream) -> Res<Vec<Row>> {
    check_dim(a.dim)?;
    if !(a.r > 0.0 && a.r.is_finite()) {
        return usage("--r", "must be positive");
    }
    if !(a.delta > 0.0 && a.delta <= 1.0) {
        return usage("--delta", "must lie in (0, 1]");
    }
    check_positive("--targets", a.targets)?;
    check_positive("--inner", a.inner)?;
    check_positive("--bins", a.bins)?;
    let (samples, dt) = timed(|| match &a.u {
        Some(s) => {
            let u = parse_point("--u", s, a.dim)?;
            if exact_ball_probability(&u, a.delta, a.r)?.is_some() {
                let k = kappa_value(&u, a.r, a.delta, a.inner, stream)?;
                return Ok(vec![k; a.targets]);
            }
            let inner = stream.child("kappa-inner");
            (0..a.targets)
                .map(|i| Ok(kappa_value(&u, a.r, a.delta, a.inner, inner.substream(i as u64))?))
                .collect()
        }
        None => Ok(kappa_density_sample(a.dim, a.r, a.delta, a.targets, a.inner, stream)?),
    })?;
    let hi = samples.iter().copied().fold(1.0f64, f64::max);
    let width = hi / a.bins as f64;
    let mut counts = vec![0u64; a.bins];
    for &k in &samples {
        counts[((k / width) as usize).min(a.bins - 1)] += 1;
    }
    let total = samples.len() as f64;
    let base = |quantity, est: f64, method: &str| Row::new(quantity, est, method).d(a.dim).r(a.r).delta(a.delta).timed(dt);
    let mut rows: Vec<Row> = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| base("density", c as f64 / (total * width), "histogram").x((b as f64 + 0.5) * width))
        .collect();
    let mean = samples.iter().sum::<f64>() / total;
    let var = samples.iter().map(|k| (k - mean) * (k - mean)).sum::<f64>() / (total - 1.0).max(1.0);
    rows.push(base("mean_kappa", mean, "sample_mean").se((var / total).sqrt()));
    rows.push(base("ball_volume", a.r.powi(a.dim as i32) * unit_ball_volume(a.dim)?, "closed_form"));
    Ok(rows)
}

fn sobol_compare(a: &SobolCompareArgs, stream: SeededStream) -> Res<Vec<Row>> {
    let dims: Vec<usize> = a
        .dims
        .split(',')
        .map(|t| t.trim().parse::<usize>().or_else(|_| usage("--dims", format!("'{t}' is not a dimension"))))
        .collect::<Res<_>>()?;
    for &d in &dims {
        check_dim(d)?;
    }
    check_positive("--n", a.n)?;
    let gamma = gamma_level(a.gamma)?;
    let deltas = delta_grid("--delta-grid", &a.delta_grid)?;
    let budget = budget_from(a.budget.designs, a.budget.targets)?;
    if let Some(r) = a.r {
        if !(r >= 0.0) {
            return usage("--r", "must be nonnegative");
        }
    }
    let suffix = if a.n.is_power_of_two() {
        ""
    } else {
        eprintln!("warning: --n {} is not a power of two; Sobol nets are balanced only at powers of two", a.n);
        ";n_not_pow2"
    };
    let pooled = budget.designs * budget.targets;
    let mut rows = Vec::new();
    for &d in &dims {
        let r = match a.r {
            Some(r) => r,
            None => asymptotic_radius(d, a.n, gamma)?,
        };
        let ds = stream.child(&format!("d={d}"));
        let ((cells, best_delta), dt) = timed(|| {
            let qu = CoverageQuery::uniform(d, r, a.n, 1.0)?;
            let uniform = coverage_design_averaged(&qu, budget.designs, budget.targets, ds)?;
            let sobol_at = |delta: f64| -> Res<_> {
                let scheme = SamplingScheme::sobol(d, delta)?;
                let qs = CoverageQuery::new(d, r, a.n, scheme, qu.prior)?;
                let design = sample_design(&scheme, a.n, ds.child("sobol"))?;
                Ok(coverage_design_conditional(&qs, &design, pooled, ds)?)
            };
            let sobol = sobol_at(1.0)?;
            let sweep = delta_sweep(&qu, &deltas, budget, ds)?;
            let uniform_opt = sweep.grid.iter().find(|(x, _)| *x == sweep.best_delta).expect("best delta is on the grid").1;
            let sobol_opt = sobol_at(sweep.best_delta)?;
            Ok(([uniform, sobol, uniform_opt, sobol_opt], sweep.best_delta))
        })?;
        let [uniform, sobol, uniform_opt, sobol_opt] = cells;
        let base = |quantity, est: Cell, method: String, delta: f64| {
            Row::new(quantity, est, method).d(d).n(a.n).r(r).delta(delta).gamma(a.gamma).x(d as f64).timed(dt)
        };
        let ratio = |u: &weakcover::coverage::CoverageEstimate, s: &weakcover::coverage::CoverageEstimate| {
            if s.value == 0.0 {
                return (Cell::Na, None);
            }
            let q = u.value / s.value;
            let rel = if u.value > 0.0 { (u.std_error / u.value).powi(2) } else { 0.0 } + (s.std_error / s.value).powi(2);
            (Cell::Num(q), Some(q * rel.sqrt()))
        };
        rows.push(base("cov_uniform", uniform.value.into(), uniform.method.tag().into(), 1.0).se(uniform.std_error));
        rows.push(base("cov_sobol", sobol.value.into(), format!("{}{suffix}", sobol.method.tag()), 1.0).se(sobol.std_error));
        let (q, se) = ratio(&uniform, &sobol);
        let mut row = base("ratio", q, format!("uniform_over_sobol{suffix}"), 1.0);
        if let Some(se) = se {
            row = row.se(se);
        }
        rows.push(row);
        rows.push(base("delta_opt", best_delta.into(), "grid_argmax".into(), best_delta));
        rows.push(
            base("cov_uniform_opt", uniform_opt.value.into(), uniform_opt.method.tag().into(), best_delta)
                .se(uniform_opt.std_error),
        );
        rows.push(
            base("cov_sobol_opt", sobol_opt.value.into(), format!("{}{suffix}", sobol_opt.method.tag()), best_delta)
                .se(sobol_opt.std_error),
        );
        let (q, se) = ratio(&uniform_opt, &sobol_opt);
        let mut row = base("ratio_opt", q, format!("uniform_over_sobol{suffix}"), best_delta);
        if let Some(se) = se {
            row = row.se(se);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn sweep(a: &DeltaSweepArgs, stream: SeededStream) -> Res<Vec<Row>> {
    check_dim(a.dim)?;
    check_positive("--n", a.n)?;
    if !(a.r >= 0.0) {
        return usage("--r", "must be nonnegative");
    }
    let deltas = delta_grid("--delta-grid", &a.delta_grid)?;
    let (scheme, prior) = scheme_from(&a.scheme, a.dim)?;
    if !scheme.kind.is_iid() {
        return usage("--scheme", "delta sweeps average over random designs (uniform or beta)");
    }
    let budget = budget_from(a.budget.designs, a.budget.targets)?;
    let q = CoverageQuery::new(a.dim, a.r, a.n, scheme, prior)?;
    let (res, dt) = timed(|| Ok(delta_sweep(&q, &deltas, budget, stream)?))?;
    let share = dt / deltas.len() as f64;
    let base = |quantity, est: f64, method: &str, delta: f64| {
        Row::new(quantity, est, method).d(a.dim).n(a.n).r(a.r).delta(delta).alpha(scheme.effective_alpha())
    };
    let mut rows: Vec<Row> = res
        .grid
        .iter()
        .map(|(delta, e)| base("coverage", e.value, e.method.tag(), *delta).x(*delta).se(e.std_error).timed(share))
        .collect();
    rows.push(base("best_delta", res.best_delta, "grid_argmax", res.best_delta).timed(dt));
    rows.push(base("best_coverage", res.best_coverage, "grid_argmax", res.best_delta).timed(dt));
    Ok(rows)
}

fn radius(a: &RadiusArgs, stream: SeededStream) -> Res<Vec<Row>> {
    check_dim(a.dim)?;
    check_positive("--n", a.n)?;
    let gamma = gamma_level(a.gamma)?;
    if !(a.tol > 0.0) {
        return usage("--tol", "must be positive");
    }
    let (scheme, prior) = scheme_from(&a.scheme, a.dim)?;
    let budget = budget_from(a.budget.designs, a.budget.targets)?;
    let q = CoverageQuery::new(a.dim, 0.0, a.n, scheme, prior)?;
    let base = |quantity, est: f64, method: &str, delta: f64| {
        Row::new(quantity, est, method).d(a.dim).n(a.n).delta(delta).alpha(scheme.effective_alpha()).gamma(a.gamma)
    };
    let (rq, dt) = timed(|| Ok(empirical_radius_quantile(&q, gamma, budget, a.tol, stream)?))?;
    let mut rows = vec![
        base("r_empirical", rq.radius, "bisection", scheme.delta).se(0.5 * (rq.upper - rq.lower)).timed(dt),
        base("r_asymptotic", asymptotic_radius(a.dim, a.n, gamma)?, "limit_law", scheme.delta),
    ];
    if let Some(g) = &a.delta_grid {
        let deltas = delta_grid("--delta-grid", g)?;
        let (res, dt) = timed(|| Ok(optimal_delta_radius(&q, gamma, &deltas, budget, a.tol, stream)?))?;
        rows.push(
            base("r_delta_opt", res.best.radius, "bisection", res.best_delta)
                .se(0.5 * (res.best.upper - res.best.lower))
                .timed(dt),
        );
        rows.push(base("delta_opt", res.best_delta, "grid_argmin", res.best_delta).timed(dt));
    }
    Ok(rows)
}

fn design(a: &DesignArgs, stream: SeededStream) -> Res<Design> {
    check_dim(a.dim)?;
    check_positive("--n", a.n)?;
    let (scheme, _) = scheme_from(&a.scheme, a.dim)?;
    Ok(sample_design(&scheme, a.n, stream.child("designs").substream(0))?)
}
