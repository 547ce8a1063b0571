//! Special functions: normal cdf/pdf, probabilists' Hermite polynomials and
//! the inverse of the regularized incomplete beta function.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use statrs::function::{beta, gamma};

use crate::error::{domain, Error, Result};

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    beta::ln_beta(a, b)
}

/// Standard normal cdf `Φ(t)`, accurate in both tails.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t * FRAC_1_SQRT_2)
}

/// Standard normal density `φ(t)`.
pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Probabilists' Hermite polynomial `He_m(t)`, via `He_{m+1} = t He_m - m He_{m-1}`.
pub fn hermite(m: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, t);
    if m == 0 {
        return prev;
    }
    for k in 1..m {
        let next = t * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    beta::beta_reg(a, b, x)
}

/// Inverse of `x -> I_x(a, b)`: the `p`-quantile of Beta(a, b).
///
/// Safeguarded Newton iteration: every step is kept inside a shrinking
/// bracket, falling back to bisection whenever Newton would leave it.
pub fn beta_reg_inv(a: f64, b: f64, p: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return domain(format!("beta shapes must be positive, got ({a}, {b})"));
    }
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("probability must lie in [0, 1], got {p}"));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    // Symmetric shapes: work in the lower half so tiny quantiles keep precision.
    if a == b && p > 0.5 {
        return beta_reg_inv(a, b, 1.0 - p).map(|x| 1.0 - x);
    }
    let ln_b = ln_beta(a, b);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = initial_guess(a, b, p, ln_b);
    for _ in 0..200 {
        let f = beta_reg(a, b, x) - p;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_b;
        let step = f / ln_pdf.exp();
        let mut next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * next.max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Numeric(format!("beta quantile did not converge for a={a}, b={b}, p={p}")))
}

fn initial_guess(a: f64, b: f64, p: f64, ln_b: f64) -> f64 {
    // Lower tail: I_x(a, b) ≈ x^a / (a B(a, b)).
    let tail = ((p.ln() + a.ln() + ln_b) / a).exp();
    if tail > 0.0 && tail < 0.5 {
        return tail;
    }
    let mean = a / (a + b);
    mean.clamp(1e-3, 1.0 - 1e-3)
}
