//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints its own PASS/FAIL line; exits nonzero if any criterion fails.
//!
//!     cargo test --release -p weakcover-cli --test acceptance

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use weakcover::coverage::{
    coverage_design_averaged, coverage_design_conditional, coverage_product_form, jensen_bound_center,
    jensen_bound_refined, product_form_approximation, CoverageEstimate, CoverageQuery, DistanceSample, InnerMethod,
    JensenInner,
};
use weakcover::geometry::unit_ball_volume;
use weakcover::intersect::{coordinate_moments, mc_intersection_oracle, EdgeworthConfig, IntersectionModel};
use weakcover::sampling::{sample_design, SamplingScheme};
use weakcover::solvers::{
    asymptotic_radius, empirical_n_gamma, n_gamma_asymptotic, optimal_delta_n_gamma, refined_delta_radius,
    worst_case_n_mixture, GammaLevel, McBudget, NGammaOutcome, DEFAULT_N_CAP,
};
use weakcover::{Point, SeededStream};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn stream(tag: &str) -> SeededStream {
    SeededStream::new(20240611, 0).child(tag)
}

fn gamma(g: f64) -> GammaLevel {
    GammaLevel::new(g).unwrap()
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let k = ((b - a) / step + 1e-9).floor() as usize;
    (0..=k).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect()
}

fn joint(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

fn table1_cells() -> Outcome {
    // (d, n, r at δ = 1, tolerance, best δ, targets)
    let cells = [(10, 1000, 0.61, 0.02, 0.9, 10_000), (20, 10_000, 1.01, 0.03, 0.8, 4000), (50, 100_000, 1.96, 0.03, 0.6, 1000)];
    let coarse = grid(0.1, 1.0, 0.1);
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, n, r_ref, tol, delta_ref, targets) in cells {
        let q = CoverageQuery::uniform(d, 0.0, n, 1.0).unwrap();
        let budget = McBudget::new(if d == 10 { 4 } else { 1 }, targets).unwrap();
        let res = refined_delta_radius(&q, gamma(0.1), &coarse, 0.05, budget, 0.005, stream(&format!("t1-{d}"))).unwrap();
        let unit = res.per_delta.iter().find(|(x, _)| *x == 1.0).unwrap().1;
        let good = (unit.radius - r_ref).abs() <= tol && (res.best_delta - delta_ref).abs() <= 0.1 + 1e-9;
        ok &= good;
        parts.push(format!("d={d} n={n}: r={:.3} (ref {r_ref}) delta*={} (ref {delta_ref})", unit.radius, res.best_delta));
    }
    check(ok, parts.join("; "))
}

fn asymptotic_rows() -> Outcome {
    let d20: Vec<u64> = [0.9, 0.95, 1.0, 1.05, 1.1, 1.15]
        .iter()
        .map(|&r| n_gamma_asymptotic(20, r, gamma(0.1)).unwrap().rounded().unwrap())
        .collect();
    let d50: Vec<u64> = [2.0, 2.05, 2.1, 2.15, 2.2, 2.25, 2.3]
        .iter()
        .map(|&r| n_gamma_asymptotic(50, r, gamma(0.1)).unwrap().rounded().unwrap())
        .collect();
    check(d20 == [734, 249, 89, 34, 13, 5] && d50.iter().all(|&v| v == 0), format!("d=20 {d20:?}; d=50 {d50:?}"))
}

fn ngamma_rows() -> Outcome {
    let budget = McBudget::new(2, 2000).unwrap();
    let deltas = grid(0.05, 1.0, 0.05);
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, r, reference) in [(20, 1.0, 10_800.0), (50, 2.1, 10_000.0)] {
        let q = CoverageQuery::uniform(d, r, 1, 1.0).unwrap();
        let n = empirical_n_gamma(&q, gamma(0.1), budget, DEFAULT_N_CAP, stream("ng")).unwrap().value();
        let good = n.is_some_and(|n| (n as f64 / reference - 1.0).abs() <= 0.15);
        ok &= good;
        parts.push(format!("d={d} r={r}: n={n:?} (ref {reference})"));
    }
    let q = CoverageQuery::uniform(50, 2.1, 1, 1.0).unwrap();
    let opt = optimal_delta_n_gamma(&q, gamma(0.1), &deltas, budget, DEFAULT_N_CAP, stream("ng")).unwrap();
    let n_opt = opt.outcome.value();
    ok &= n_opt.is_some_and(|n| (30..=80).contains(&n));
    parts.push(format!("d=50 r=2.1 opt: n={n_opt:?} delta={:?}", opt.best.map(|b| b.0)));
    for r in [2.25, 2.3] {
        let q = CoverageQuery::uniform(50, r, 1, 1.0).unwrap();
        let opt = optimal_delta_n_gamma(&q, gamma(0.1), &deltas, budget, DEFAULT_N_CAP, stream("ng")).unwrap();
        let na = !opt.outcome.is_feasible();
        ok &= na;
        let tag = match opt.outcome {
            NGammaOutcome::Found { .. } => "found",
            NGammaOutcome::Degenerate { .. } => "NA (degenerate)",
            NGammaOutcome::Unreachable { .. } => "NA (unreachable)",
        };
        parts.push(format!("d=50 r={r} opt: {tag}"));
    }
    check(ok, parts.join("; "))
}

fn limit_law_d2() -> Outcome {
    let (d, n, targets) = (2, 100_000, 100_000);
    let q = CoverageQuery::uniform(d, 0.0, n, 1.0).unwrap();
    let sample = DistanceSample::draw(&q, 1, targets, stream("limit")).unwrap();
    let scale = (n as f64 * unit_ball_volume(d).unwrap()).powf(1.0 / d as f64);
    let mut sup = 0.0f64;
    // The empirical cdf is a step function; compare both ends of each small cell.
    let ts = grid(0.0, 3.0, 0.0005);
    for w in ts.windows(2) {
        let lo = sample.coverage(w[0] / scale).value;
        let hi = sample.coverage(w[1] / scale).value;
        let g = |t: f64| 1.0 - (-t.powi(2)).exp();
        sup = sup.max((hi - g(w[1])).abs()).max((lo - g(w[0])).abs());
    }
    check(sup <= 0.01, format!("sup deviation {sup:.5}"))
}

fn edgeworth_accuracy() -> Outcome {
    let d = 10;
    let u = Point::center(d).unwrap();
    let model = IntersectionModel::new(1.0, 1.0).unwrap();
    let (mut e0, mut e1, mut used) = (0.0f64, 0.0f64, 0);
    for r in grid(0.55, 1.3, 0.025) {
        let o = mc_intersection_oracle(&u, 1.0, 1.0, r, 10_000_000, stream("edgeworth")).unwrap().value;
        if !(0.01..=0.99).contains(&o) {
            continue;
        }
        used += 1;
        let p0 = model.edgeworth(u.coords(), r, EdgeworthConfig::new(0)).unwrap().probability;
        let p1 = model.edgeworth(u.coords(), r, EdgeworthConfig::new(1)).unwrap().probability;
        e0 = e0.max((p0 - o).abs());
        e1 = e1.max((p1 - o).abs());
    }
    check(used >= 5 && e1 <= e0 && e1 <= 0.01, format!("{used} radii; max error order 0 {e0:.4}, order 1 {e1:.4}"))
}

fn bound_ordering() -> Outcome {
    let n = 1000;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = String::new();
    let mut count = 0;
    for (d, r_ref) in [(10, 0.61), (20, 1.17), (50, 2.26)] {
        for f in [0.8, 0.9, 1.0, 1.1, 1.2] {
            let r = r_ref * f;
            let q = CoverageQuery::uniform(d, r, n, 1.0).unwrap();
            let s = stream(&format!("bounds-{d}-{f}"));
            let est = coverage_design_averaged(&q, 4, 4000, s).unwrap();
            let inner = JensenInner::MonteCarlo { samples: 1_000_000, stream: s.child("inner") };
            let refined = jensen_bound_refined(&q, inner).unwrap();
            let center = jensen_bound_center(&q, inner).unwrap();
            // p̄ is about 5e-6 in the smallest d = 50 cell; 10^7 pairs give ~50 hits there.
            let product = product_form_approximation(&q, 10_000_000, s.child("paired")).unwrap();
            // Excess of each inequality in units of its joint standard error.
            let z = |lo: f64, lo_se: f64, hi: f64, hi_se: f64| {
                let se = joint(lo_se, hi_se);
                if se == 0.0 {
                    if lo <= hi + 1e-12 { f64::NEG_INFINITY } else { f64::INFINITY }
                } else {
                    (lo - hi) / se
                }
            };
            for (label, v) in [
                ("F <= refined", z(est.value, est.std_error, refined.value, refined.std_error)),
                ("refined <= center", z(refined.value, refined.std_error, center.value, center.std_error)),
                ("F <= product", z(est.value, est.std_error, product.value, product.std_error)),
            ] {
                if v > worst {
                    worst = v;
                    worst_at = format!("{label} at d={d} r={r:.3}: F={:.4} refined={:.4} center={:.4} product={:.4}", est.value, refined.value, center.value, product.value);
                }
                count += 1;
            }
        }
    }
    check(worst <= 3.0, format!("{count} comparisons; largest excess {worst:.2} joint stderr ({worst_at})"))
}

fn sobol_value(d: usize, n: usize, r: f64, targets: usize, s: SeededStream) -> CoverageEstimate {
    let scheme = SamplingScheme::sobol(d, 1.0).unwrap();
    let q = CoverageQuery::new(d, r, n, scheme, CoverageQuery::uniform(d, r, n, 1.0).unwrap().prior).unwrap();
    let design = sample_design(&scheme, n, s.child("sobol")).unwrap();
    coverage_design_conditional(&q, &design, targets, s).unwrap()
}

fn sobol_parity() -> Outcome {
    let n = 1024;
    let s = stream("sobol20");
    let uni = coverage_design_averaged(&CoverageQuery::uniform(20, 1.17, n, 1.0).unwrap(), 4, 4000, s).unwrap();
    let sob = sobol_value(20, n, 1.17, 16_000, s);
    let ratio = uni.value / sob.value;
    let mut ok = (ratio - 1.0).abs() <= 0.1;
    let mut parts = vec![format!("d=20: uniform {:.4} sobol {:.4} ratio {ratio:.4}", uni.value, sob.value)];
    for g in [0.3, 0.5, 0.7] {
        let r = asymptotic_radius(10, n, gamma(g)).unwrap();
        let s = stream(&format!("sobol10-{g}"));
        let uni = coverage_design_averaged(&CoverageQuery::uniform(10, r, n, 1.0).unwrap(), 4, 4000, s).unwrap();
        let sob = sobol_value(10, n, r, 16_000, s);
        ok &= sob.value >= uni.value - joint(uni.std_error, sob.std_error);
        parts.push(format!("d=10 r={r:.3}: uniform {:.4} sobol {:.4}", uni.value, sob.value));
    }
    check(ok, parts.join("; "))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_weakcover");
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 9] = [
        &["coverage", "--dim", "8", "--n", "300", "--r-grid", "0.3:0.7:0.1", "--asymptotic", "--jensen", "--product", "--inner", "20000"],
        &["table1", "--cells", "5x100,10x100", "--targets", "500"],
        &["ngamma", "--dim", "10", "--r-grid", "0.8,0.9", "--targets", "300", "--delta-grid", "0.5:1:0.25"],
        &["intersect", "--dim", "10", "--r-grid", "0.8,1.0", "--inner", "50000"],
        &["kappa", "--dim", "5", "--r", "0.4", "--targets", "200", "--inner", "2000", "--bins", "10"],
        &["sobol-compare", "--dims", "5,10", "--n", "256", "--targets", "500", "--delta-grid", "0.5:1:0.25"],
        &["delta-sweep", "--dim", "10", "--n", "200", "--r", "0.7", "--delta-grid", "0.5:1:0.1", "--targets", "500"],
        &["radius", "--dim", "6", "--n", "200", "--targets", "500", "--delta-grid", "0.8,1"],
        &["design", "--dim", "4", "--n", "50", "--scheme", "beta", "--alpha", "0.5", "--delta", "0.8"],
    ];
    let mut bad = Vec::new();
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let path = dir.path().join(format!("{}-{threads}.csv", args[0]));
            let status = Command::new(bin)
                .args(args)
                .args(["--seed", "99", "--threads", threads, "--out"])
                .arg(&path)
                .status()
                .unwrap();
            assert!(status.success(), "{args:?} failed");
            outputs.push(std::fs::read(&path).unwrap());
        }
        if outputs[0] != outputs[1] {
            bad.push(args[0]);
        }
    }
    check(bad.is_empty(), format!("{} commands compared; differing: {bad:?}", runs.len()))
}

fn central_moments_mc(u: f64, delta: f64, draws: usize, s: SeededStream) -> ([f64; 3], [f64; 3]) {
    let m0 = coordinate_moments(u, delta).unwrap().mean;
    const CHUNK: usize = 1 << 16;
    let sums = (0..draws.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = s.substream(c as u64).rng();
            let mut a = [0.0f64; 6];
            for _ in 0..CHUNK.min(draws - c * CHUNK) {
                let x = 0.5 - delta / 2.0 + delta * rng.random::<f64>();
                let e = (u - x) * (u - x) - m0;
                let mut p = 1.0;
                for v in a.iter_mut() {
                    p *= e;
                    *v += p;
                }
            }
            a
        })
        .reduce(|| [0.0; 6], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    let nf = draws as f64;
    let a: Vec<f64> = sums.iter().map(|v| v / nf).collect();
    let m2 = a[1] - a[0] * a[0];
    let m3 = a[2] - 3.0 * a[0] * a[1] + 2.0 * a[0].powi(3);
    let (m4, m6) = (a[3], a[5]);
    let se = [
        (m2 / nf).sqrt(),
        ((m4 - m2 * m2) / nf).sqrt(),
        ((m6 - m3 * m3 - 6.0 * m4 * m2 + 9.0 * m2.powi(3)) / nf).sqrt(),
    ];
    ([m0 + a[0], m2, m3], se)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let d = rng.random_range(1..=8usize);
        let delta = rng.random_range(0.3..=1.0);
        let r = (0.3 / unit_ball_volume(d).unwrap()).powf(1.0 / d as f64) * delta * rng.random_range(0.6..1.4);
        let q = CoverageQuery::uniform(d, r, 1, delta).unwrap();
        let s = stream("oracle").substream(k);
        let averaged = coverage_design_averaged(&q, 4000, 250, s).unwrap();
        let product = coverage_product_form(&q, 20_000, InnerMethod::MonteCarlo { samples: 200 }, s.child("product"))
            .unwrap()
            .estimate;
        let paired = product_form_approximation(&q, 1_000_000, s.child("paired")).unwrap();
        for (a, b) in [(&averaged, &product), (&averaged, &paired), (&product, &paired)] {
            worst = worst.max((a.value - b.value).abs() / joint(a.std_error, b.std_error));
        }
    }
    let mut worst_moment = 0.0f64;
    for k in 0..100 {
        let u = rng.random::<f64>();
        let delta = rng.random_range(0.05..=1.0);
        let closed = coordinate_moments(u, delta).unwrap();
        let (mc, se) = central_moments_mc(u, delta, 10_000_000, stream("moments").substream(k));
        for (c, (m, s)) in [closed.mean, closed.variance, closed.third_central].iter().zip(mc.iter().zip(se)) {
            worst_moment = worst_moment.max((c - m).abs() / s);
        }
    }
    check(
        worst <= 3.0 && worst_moment <= 4.0,
        format!("estimators: largest gap {worst:.2} joint stderr; moments: largest gap {worst_moment:.2} stderr"),
    )
}

fn worst_case_exponent() -> Outcome {
    let v = worst_case_n_mixture(3, 0.1, gamma(0.1)).unwrap();
    check((238.0..=240.0).contains(&v), format!("log10 n = {v:.3}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 radius quantiles and best delta", table1_cells),
        ("2 asymptotic n_gamma rows", asymptotic_rows),
        ("3 empirical n_gamma rows and NA cells", ngamma_rows),
        ("4 limit law at d=2, n=1e5", limit_law_d2),
        ("5 Edgeworth order 1 vs normal", edgeworth_accuracy),
        ("6 bound ordering", bound_ordering),
        ("7 Sobol parity", sobol_parity),
        ("8 determinism across thread counts", determinism),
        ("9 n=1 estimators and moment oracle", oracle_equivalence),
        ("10 worst-case log10 n(3, 0.1, 0.1)", worst_case_exponent),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("{verdict} [{name}] {} ({:.1}s)", out.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!out.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
