//! Points, cubes, balls and Euclidean distances in `R^d`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::special::ln_gamma;

/// A point of `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return domain("a point needs at least one coordinate");
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return domain(format!("coordinate {i} is not finite"));
        }
        Ok(Point(coords))
    }

    /// The point `(a, a, ..., a)`.
    pub fn splat(dim: usize, a: f64) -> Result<Self> {
        Point::new(vec![a; dim])
    }

    /// Centre of the unit cube.
    pub fn center(dim: usize) -> Result<Self> {
        Point::splat(dim, 0.5)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// The concentric cube `[1/2 - δ/2, 1/2 + δ/2]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaCube {
    delta: f64,
    dim: usize,
}

impl DeltaCube {
    pub fn new(dim: usize, delta: f64) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be positive");
        }
        check_delta(delta)?;
        Ok(DeltaCube { delta, dim })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        DeltaCube::new(dim, 1.0)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> f64 {
        0.5 - 0.5 * self.delta
    }

    pub fn upper(&self) -> f64 {
        0.5 + 0.5 * self.delta
    }

    /// Affine image of a unit-cube coordinate, clamped into the cube so that
    /// rounding never leaves the support.
    #[inline]
    pub fn map_unit(&self, v: f64) -> f64 {
        (0.5 + self.delta * (v - 0.5)).clamp(self.lower(), self.upper())
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim && p.iter().all(|&x| x >= self.lower() && x <= self.upper())
    }

    /// Whether `ball` lies entirely inside the cube.
    pub fn contains_ball(&self, ball: &Ball) -> bool {
        let r = ball.radius();
        ball.center()
            .coords()
            .iter()
            .all(|&c| c - r >= self.lower() && c + r <= self.upper())
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.delta * (self.dim as f64).sqrt()
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta must lie in (0, 1], got {delta}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return domain(format!("radius must be finite and nonnegative, got {radius}"));
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        sq_dist(self.center.coords(), p) <= self.radius * self.radius
    }
}

/// Where a design came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub scheme: String,
    /// `(master_seed, stream_id)` for random designs.
    pub seed: Option<(u64, u64)>,
}

/// An ordered finite point set, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    dim: usize,
    coords: Vec<f64>,
    pub provenance: Provenance,
}

impl Design {
    pub fn new(dim: usize) -> Self {
        Design { dim, coords: Vec::new(), provenance: Provenance::default() }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Design { dim, coords: Vec::with_capacity(dim * n), provenance: Provenance::default() }
    }

    /// Builds a design from row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be positive");
        }
        if !coords.len().is_multiple_of(dim) {
            return domain(format!("{} coordinates do not split into rows of {dim}", coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return domain("design coordinates must be finite");
        }
        Ok(Design { dim, coords, provenance: Provenance::default() })
    }

    pub fn from_points(points: &[Point]) -> Result<Self> {
        let dim = match points.first() {
            Some(p) => p.dim(),
            None => return domain("cannot infer the dimension of an empty point list"),
        };
        let mut design = Design::with_capacity(dim, points.len());
        for p in points {
            design.push(p.coords())?;
        }
        Ok(design)
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    pub(crate) fn extend_flat(&mut self, rows: &[f64]) {
        debug_assert_eq!(rows.len() % self.dim, 0);
        self.coords.extend_from_slice(rows);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// The first `n` points (nested designs share prefixes).
    pub fn prefix(&self, n: usize) -> Design {
        let n = n.min(self.len());
        Design {
            dim: self.dim,
            coords: self.coords[..n * self.dim].to_vec(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Volume of the unit Euclidean ball in `R^d`, evaluated through log-gamma.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    ln_unit_ball_volume(d).map(f64::exp)
}

/// `ln V_d = (d/2) ln π - ln Γ(d/2 + 1)`.
pub fn ln_unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return domain("unit ball volume needs d >= 1");
    }
    let half = d as f64 / 2.0;
    Ok(half * PI.ln() - ln_gamma(half + 1.0))
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn squared_distance(a: &Point, b: &Point) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(sq_dist(a.coords(), b.coords()))
}

/// `ρ(u, X) = min_j |u - x_j|`.
pub fn min_distance_to_set(u: &Point, xs: &Design) -> Result<f64> {
    if xs.is_empty() {
        return domain("distance to an empty design is undefined");
    }
    if u.dim() != xs.dim() {
        return Err(Error::DimensionMismatch { expected: xs.dim(), got: u.dim() });
    }
    let best = xs
        .iter()
        .map(|x| sq_dist(u.coords(), x))
        .fold(f64::INFINITY, f64::min);
    Ok(best.sqrt())
}
