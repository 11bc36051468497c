//! Desk-scale realization of the multiplication-operator model: weighted
//! spectral grids, complex coefficient vectors on them, band projections,
//! and quadrature norms.
//!
//! A grid is a finite weighted set of `(s, b)` modes standing in for a
//! continuous spectral measure; the weights realize the measure by
//! quadrature, so refinement is the only discretization knob. Grids are
//! immutable after construction and carry a content hash so that states
//! from different grids cannot be combined silently.

use crate::friction::{kdv_condition_47, kdv_printed_crossover_x, FrictionError, FrictionSpec};
use crate::numerics::{linspace, logspace, KahanSum};
use crate::symbols::{ModeSymbol, SymbolError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("state vector belongs to a different grid (tag {state_tag:#x} vs {grid_tag:#x})")]
    GridMismatch { state_tag: u64, grid_tag: u64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("data shape parameters outside grid support: {0}")]
    BadShape(String),
    #[error("file format error at {path}, line {line}: {reason}")]
    FileFormat {
        path: String,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Friction(#[from] FrictionError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Grid point: coordinate label, mode symbols, quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub xi: f64,
    pub mode: ModeSymbol,
    pub weight: f64,
}

/// Point spacing for generated grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Quadrature weight rule for generated grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// Equal weights summing to the interval length.
    Uniform,
    /// Trapezoid rule on the chosen spacing.
    Trapezoid,
}

/// Frequency band with configurable endpoint openness. `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Band {
    /// Open interval `(lo, hi)`.
    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    /// Closed interval `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    /// `[lo, +inf)`.
    pub fn at_least(lo: f64) -> Self {
        Self {
            lo,
            hi: f64::INFINITY,
            lo_open: false,
            hi_open: true,
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        let above = if self.lo_open { s > self.lo } else { s >= self.lo };
        let below = if self.hi_open { s < self.hi } else { s <= self.hi };
        above && below
    }

    pub fn is_valid(&self) -> bool {
        self.lo < self.hi && self.lo >= 0.0
    }
}

fn hash_f64<H: Hasher>(h: &mut H, x: f64) {
    x.to_bits().hash(h);
}

/// Finite weighted set of modes, ordered by increasing `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    points: Vec<GridPoint>,
    tag: u64,
    annotations: Vec<(String, String)>,
}

impl SpectralGrid {
    /// Builds a grid from explicit `(xi, s, b, weight)` rows. Rows must be
    /// ordered by strictly increasing `s` with positive finite weights.
    pub fn from_points(rows: Vec<(f64, f64, f64, f64)>) -> Result<Self, SpectralError> {
        if rows.is_empty() {
            return Err(SpectralError::InvalidGrid("grid needs at least one mode".into()));
        }
        let mut points = Vec::with_capacity(rows.len());
        for (xi, s, b, weight) in rows {
            if !(weight.is_finite() && weight > 0.0) {
                return Err(SpectralError::InvalidGrid(format!(
                    "weight must be positive and finite, got {weight} at s = {s}"
                )));
            }
            points.push(GridPoint {
                xi,
                mode: ModeSymbol::new(s, b)?,
                weight,
            });
        }
        if points.windows(2).any(|w| w[1].mode.s() <= w[0].mode.s()) {
            return Err(SpectralError::InvalidGrid(
                "mode s-values must be strictly increasing".into(),
            ));
        }
        let tag = Self::content_tag(&points);
        Ok(Self {
            points,
            tag,
            annotations: Vec::new(),
        })
    }

    /// Single-mode grid with unit weight.
    pub fn single(s: f64, b: f64) -> Result<Self, SpectralError> {
        Self::from_points(vec![(s, s, b, 1.0)])
    }

    fn content_tag(points: &[GridPoint]) -> u64 {
        let mut h = DefaultHasher::new();
        points.len().hash(&mut h);
        for p in points {
            hash_f64(&mut h, p.xi);
            hash_f64(&mut h, p.mode.s());
            hash_f64(&mut h, p.mode.b());
            hash_f64(&mut h, p.weight);
        }
        h.finish()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn annotations(&self) -> &[(String, String)] {
        &self.annotations
    }

    pub fn annotate(&mut self, key: &str, value: String) {
        self.annotations.push((key.to_string(), value));
    }

    pub fn min_s(&self) -> f64 {
        self.points[0].mode.s()
    }

    pub fn max_s(&self) -> f64 {
        self.points[self.points.len() - 1].mode.s()
    }

    fn check_tag(&self, v: &StateVector) -> Result<(), SpectralError> {
        if v.grid_tag != self.tag {
            return Err(SpectralError::GridMismatch {
                state_tag: v.grid_tag,
                grid_tag: self.tag,
            });
        }
        Ok(())
    }

    /// Weighted L2 norm `sqrt(sum_k w_k |c_k|^2)`, accumulated in grid order
    /// with compensated summation.
    pub fn norm(&self, v: &StateVector) -> Result<f64, SpectralError> {
        self.check_tag(v)?;
        let mut acc = KahanSum::new();
        for (p, c) in self.points.iter().zip(&v.coeffs) {
            acc.add(p.weight * c.norm_sqr());
        }
        Ok(acc.value().sqrt())
    }

    /// Weighted energy `sum_k w_k (s_k^2 |u_k|^2 + |du_k|^2)`.
    pub fn energy(&self, u: &StateVector, u_dot: &StateVector) -> Result<f64, SpectralError> {
        self.check_tag(u)?;
        self.check_tag(u_dot)?;
        let mut acc = KahanSum::new();
        for ((p, cu), cdu) in self.points.iter().zip(&u.coeffs).zip(&u_dot.coeffs) {
            acc.add(p.weight * crate::symbols::mode_energy(&p.mode, *cu, *cdu));
        }
        Ok(acc.value())
    }

    /// Band projection: zeroes coefficients at modes with `s` outside `band`.
    pub fn project(&self, v: &StateVector, band: &Band) -> Result<StateVector, SpectralError> {
        self.check_tag(v)?;
        let coeffs = self
            .points
            .iter()
            .zip(&v.coeffs)
            .map(|(p, c)| {
                if band.contains(p.mode.s()) {
                    *c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(StateVector {
            coeffs,
            grid_tag: self.tag,
        })
    }

    /// Builds initial data of the requested shape on this grid.
    pub fn make_data(&self, shape: &DataShape, target: DataTarget) -> Result<StateVector, SpectralError> {
        let coeffs: Vec<Complex64> = match shape {
            DataShape::Indicator { band } => {
                if !band.is_valid() {
                    return Err(SpectralError::BadShape(format!(
                        "indicator band ({}, {}) invalid while building {target}",
                        band.lo, band.hi
                    )));
                }
                self.points
                    .iter()
                    .map(|p| {
                        if band.contains(p.mode.s()) {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            }
            DataShape::Gaussian { center, width } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(SpectralError::BadShape(format!(
                        "gaussian width must be positive, got {width} while building {target}"
                    )));
                }
                self.points
                    .iter()
                    .map(|p| {
                        let z = (p.mode.s() - center) / width;
                        Complex64::new((-0.5 * z * z).exp(), 0.0)
                    })
                    .collect()
            }
            DataShape::Point { index } => {
                if *index >= self.points.len() {
                    return Err(SpectralError::BadShape(format!(
                        "point index {index} outside grid of {} modes while building {target}",
                        self.points.len()
                    )));
                }
                let mut c = vec![Complex64::new(0.0, 0.0); self.points.len()];
                c[*index] = Complex64::new(1.0, 0.0);
                c
            }
            DataShape::FromFile { path } => {
                return self.read_state(Path::new(path));
            }
        };
        Ok(StateVector {
            coeffs,
            grid_tag: self.tag,
        })
    }

    /// Seeded standard-complex-normal coefficients; the randomized test-data
    /// generator behind the CLI `--seed` flag.
    pub fn random_state(&self, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..self.points.len())
            .map(|_| {
                // Box-Muller from uniform draws keeps us independent of
                // distribution-crate version details.
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (-2.0 * u1.ln()).sqrt();
                Complex64::new(r * u2.cos(), r * u2.sin())
            })
            .collect();
        StateVector {
            coeffs,
            grid_tag: self.tag,
        }
    }

    pub fn zeros(&self) -> StateVector {
        StateVector {
            coeffs: vec![Complex64::new(0.0, 0.0); self.points.len()],
            grid_tag: self.tag,
        }
    }

    pub fn state_from_coeffs(&self, coeffs: Vec<Complex64>) -> Result<StateVector, SpectralError> {
        if coeffs.len() != self.points.len() {
            return Err(SpectralError::InvalidGrid(format!(
                "coefficient vector length {} does not match grid of {} modes",
                coeffs.len(),
                self.points.len()
            )));
        }
        Ok(StateVector {
            coeffs,
            grid_tag: self.tag,
        })
    }

    /// Grid rows as delimited text with the `xi,s,b,weight` header.
    pub fn to_delimited(&self) -> String {
        let mut out = String::from("xi,s,b,weight\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.xi, p.mode.s(), p.mode.b(), p.weight);
        }
        out
    }

    /// State rows as delimited text with the `xi,s,b,weight,re,im` header.
    pub fn state_to_delimited(&self, v: &StateVector) -> Result<String, SpectralError> {
        self.check_tag(v)?;
        let mut out = String::from("xi,s,b,weight,re,im\n");
        for (p, c) in self.points.iter().zip(&v.coeffs) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                p.xi,
                p.mode.s(),
                p.mode.b(),
                p.weight,
                c.re,
                c.im
            );
        }
        Ok(out)
    }

    pub fn write_delimited(&self, path: &Path) -> Result<(), SpectralError> {
        std::fs::write(path, self.to_delimited()).map_err(|source| SpectralError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Parses a grid from delimited text (`xi,s,b,weight` header required).
    pub fn read_delimited(path: &Path) -> Result<Self, SpectralError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpectralError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let rows = parse_delimited(&text, path, 4)?;
        Self::from_points(rows.into_iter().map(|r| (r[0], r[1], r[2], r[3])).collect())
    }

    /// Parses a state on this grid from delimited text
    /// (`xi,s,b,weight,re,im` header required); the grid columns must match
    /// this grid to 1e-12 relative.
    pub fn read_state(&self, path: &Path) -> Result<StateVector, SpectralError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpectralError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let rows = parse_delimited(&text, path, 6)?;
        if rows.len() != self.points.len() {
            return Err(SpectralError::FileFormat {
                path: path.display().to_string(),
                line: rows.len() + 1,
                reason: format!(
                    "state file has {} rows but the grid has {} modes",
                    rows.len(),
                    self.points.len()
                ),
            });
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        let mut coeffs = Vec::with_capacity(rows.len());
        for (k, r) in rows.iter().enumerate() {
            let p = &self.points[k];
            if !(close(r[0], p.xi) && close(r[1], p.mode.s()) && close(r[2], p.mode.b()) && close(r[3], p.weight)) {
                return Err(SpectralError::FileFormat {
                    path: path.display().to_string(),
                    line: k + 2,
                    reason: "grid columns do not match the target grid".into(),
                });
            }
            coeffs.push(Complex64::new(r[4], r[5]));
        }
        Ok(StateVector {
            coeffs,
            grid_tag: self.tag,
        })
    }
}

fn parse_delimited(text: &str, path: &Path, cols: usize) -> Result<Vec<Vec<f64>>, SpectralError> {
    let err = |line: usize, reason: String| SpectralError::FileFormat {
        path: path.display().to_string(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    let expected_header = if cols == 4 {
        "xi,s,b,weight"
    } else {
        "xi,s,b,weight,re,im"
    };
    match lines.next() {
        Some((_, header)) if header.trim() == expected_header => {}
        Some((_, header)) => {
            return Err(err(1, format!("expected header '{expected_header}', got '{}'", header.trim())))
        }
        None => return Err(err(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(err(idx + 1, format!("expected {cols} fields, got {}", fields.len())));
        }
        let mut row = Vec::with_capacity(cols);
        for f in fields {
            row.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| err(idx + 1, format!("bad number '{}': {e}", f.trim())))?,
            );
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Which datum a generator builds; only used for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataTarget {
    Position,
    Velocity,
}

impl std::fmt::Display for DataTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DataTarget::Position => write!(f, "position data"),
            DataTarget::Velocity => write!(f, "velocity data"),
        }
    }
}

/// Initial data profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum DataShape {
    Indicator { band: Band },
    Gaussian { center: f64, width: f64 },
    Point { index: usize },
    FromFile { path: String },
}

/// Complex coefficient vector bound to a grid by content tag.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    coeffs: Vec<Complex64>,
    grid_tag: u64,
}

impl StateVector {
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn grid_tag(&self) -> u64 {
        self.grid_tag
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            grid_tag: self.grid_tag,
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector, SpectralError> {
        self.binary_op(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector, SpectralError> {
        self.binary_op(other, |a, b| a - b)
    }

    fn binary_op(
        &self,
        other: &StateVector,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<StateVector, SpectralError> {
        if self.grid_tag != other.grid_tag {
            return Err(SpectralError::GridMismatch {
                state_tag: other.grid_tag,
                grid_tag: self.grid_tag,
            });
        }
        Ok(StateVector {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| op(*a, *b))
                .collect(),
            grid_tag: self.grid_tag,
        })
    }
}

fn spaced(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>, SpectralError> {
    match spacing {
        Spacing::Linear => Ok(linspace(lo, hi, n)),
        Spacing::Log => {
            if lo <= 0.0 {
                return Err(SpectralError::InvalidGrid(format!(
                    "log spacing needs a positive lower bound, got {lo}"
                )));
            }
            Ok(logspace(lo, hi, n))
        }
    }
}

fn quadrature_weights(xs: &[f64], lo: f64, hi: f64, rule: WeightRule) -> Vec<f64> {
    let n = xs.len();
    if n == 1 {
        return vec![hi - lo];
    }
    match rule {
        WeightRule::Uniform => vec![(hi - lo) / n as f64; n],
        WeightRule::Trapezoid => (0..n)
            .map(|k| {
                if k == 0 {
                    0.5 * (xs[1] - xs[0])
                } else if k == n - 1 {
                    0.5 * (xs[n - 1] - xs[n - 2])
                } else {
                    0.5 * (xs[k + 1] - xs[k - 1])
                }
            })
            .collect(),
    }
}

/// Grid over a frequency interval with `b = F(s)` per point.
///
/// `n = 1` degenerates to a point mass at `lo` carrying the full interval
/// weight.
pub fn grid_from_friction(
    spec: &FrictionSpec,
    s_range: (f64, f64),
    n: usize,
    spacing: Spacing,
    weights: WeightRule,
) -> Result<SpectralGrid, SpectralError> {
    spec.validate()?;
    let (lo, hi) = s_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(SpectralError::InvalidGrid(format!(
            "s-range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    if n == 0 {
        return Err(SpectralError::InvalidGrid("grid needs at least one mode".into()));
    }
    let xs = spaced(lo, hi, n, spacing)?;
    let ws = quadrature_weights(&xs, lo, hi, weights);
    let mut rows = Vec::with_capacity(n);
    for (&s, &w) in xs.iter().zip(&ws) {
        rows.push((s, s, spec.evaluate(s)?, w));
    }
    SpectralGrid::from_points(rows)
}

/// Grid over Fourier coordinates for the shifted-Laplacian family:
/// `s(xi) = (xi^2 + w^2)^(k/2)`, `b = a s^alpha`. The frequency floor is
/// `w^k`, attained at `xi = 0`.
pub fn grid_from_fourier_symbol(
    w: f64,
    k: u32,
    a: f64,
    alpha: f64,
    xi_range: (f64, f64),
    n: usize,
    spacing: Spacing,
) -> Result<SpectralGrid, SpectralError> {
    if !(w.is_finite() && w > 0.0) {
        return Err(SpectralError::InvalidGrid(format!("need w > 0, got {w}")));
    }
    if k == 0 {
        return Err(SpectralError::InvalidGrid("need k >= 1".into()));
    }
    FrictionSpec::Power { a, alpha }.validate()?;
    let (lo, hi) = xi_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(SpectralError::InvalidGrid(format!(
            "xi-range must satisfy 0 <= lo < hi, got ({lo}, {hi})"
        )));
    }
    if n == 0 {
        return Err(SpectralError::InvalidGrid("grid needs at least one mode".into()));
    }
    let xs = spaced(lo, hi, n, spacing)?;
    let ws = quadrature_weights(&xs, lo, hi, WeightRule::Trapezoid);
    let mut rows = Vec::with_capacity(n);
    for (&xi, &wt) in xs.iter().zip(&ws) {
        let s = (xi * xi + w * w).powf(k as f64 / 2.0);
        rows.push((xi, s, a * s.powf(alpha), wt));
    }
    let mut grid = SpectralGrid::from_points(rows)?;
    grid.annotate("family", format!("fourier(w={w}, k={k}, a={a}, alpha={alpha})"));
    Ok(grid)
}

/// Grid over Fourier coordinates for linearized third-order dispersion:
/// `s(xi) = sqrt(xi^6 + a0 xi^4 + a1 xi^2)`, `b(xi) = a xi^2`. Records the
/// printed-formula uniqueness condition in the grid annotations.
pub fn grid_from_kdv_symbols(
    a: f64,
    a0: f64,
    a1: f64,
    xi_range: (f64, f64),
    n: usize,
    spacing: Spacing,
) -> Result<SpectralGrid, SpectralError> {
    FrictionSpec::ParametricKdv { a, a0, a1 }.validate()?;
    let (lo, hi) = xi_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(SpectralError::InvalidGrid(format!(
            "xi-range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    if n == 0 {
        return Err(SpectralError::InvalidGrid("grid needs at least one mode".into()));
    }
    let xs = spaced(lo, hi, n, spacing)?;
    let ws = quadrature_weights(&xs, lo, hi, WeightRule::Trapezoid);
    let mut rows = Vec::with_capacity(n);
    for (&xi, &wt) in xs.iter().zip(&ws) {
        let x2 = xi * xi;
        let s = (x2 * x2 * x2 + a0 * x2 * x2 + a1 * x2).sqrt();
        rows.push((xi, s, a * x2, wt));
    }
    let mut grid = SpectralGrid::from_points(rows)?;
    grid.annotate("family", format!("kdv(a={a}, a0={a0}, a1={a1})"));
    grid.annotate(
        "condition_4_7",
        format!("{}", kdv_condition_47(a, a0, a1)),
    );
    if let Some(x) = kdv_printed_crossover_x(a, a0, a1) {
        grid.annotate("printed_crossover_x", format!("{x}"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn telegraph_grid(n: usize) -> SpectralGrid {
        grid_from_friction(
            &FrictionSpec::Constant { a: 1.0 },
            (0.1, 2.0),
            n,
            Spacing::Linear,
            WeightRule::Trapezoid,
        )
        .unwrap()
    }

    #[test]
    fn single_point_mass() {
        let g = grid_from_friction(
            &FrictionSpec::Constant { a: 1.0 },
            (0.5, 0.5 + 1e-6),
            1,
            Spacing::Linear,
            WeightRule::Trapezoid,
        )
        .unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.points()[0].mode.s(), 0.5);
        assert!((g.points()[0].weight - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn friction_grid_spot_checks() {
        let g = grid_from_friction(
            &FrictionSpec::Power { a: 2.0, alpha: 0.5 },
            (1e-3, 10.0),
            256,
            Spacing::Log,
            WeightRule::Trapezoid,
        )
        .unwrap();
        assert_eq!(g.len(), 256);
        for &idx in &[0usize, 100, 255] {
            let p = &g.points()[idx];
            assert!((p.mode.b() - 2.0 * p.mode.s().sqrt()).abs() <= 1e-14 * p.mode.b());
        }
        assert!(g.points().windows(2).all(|w| w[1].mode.s() > w[0].mode.s()));
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for rule in [WeightRule::Uniform, WeightRule::Trapezoid] {
            let g = grid_from_friction(
                &FrictionSpec::Constant { a: 1.0 },
                (1e-9, 3.0),
                100,
                Spacing::Linear,
                rule,
            )
            .unwrap();
            let total: f64 = g.points().iter().map(|p| p.weight).sum();
            assert!((total - 3.0).abs() < 1e-9, "{rule:?}: {total}");
        }
    }

    #[test]
    fn fourier_grid_matches_symbol_values() {
        let g = grid_from_fourier_symbol(1.0, 3, 1.0, 2.0 / 3.0, (0.0, 2.0), 21, Spacing::Linear)
            .unwrap();
        // xi = 0 -> s = w^k = 1
        assert!((g.points()[0].mode.s() - 1.0).abs() < 1e-15);
        // xi = 1 -> s = 2^(3/2), b = s^(2/3) = 2
        let p = &g.points()[10];
        assert!((p.xi - 1.0).abs() < 1e-15);
        assert!((p.mode.s() - 2.0f64.powf(1.5)).abs() < 1e-14);
        assert!((p.mode.b() - 2.0).abs() < 1e-14);
        assert!(g.min_s() >= 1.0 - 1e-12);
    }

    #[test]
    fn kdv_grid_matches_symbol_values_and_records_condition() {
        let g = grid_from_kdv_symbols(2.0, 0.0, 0.0, (0.5, 3.0), 26, Spacing::Linear).unwrap();
        let p = g
            .points()
            .iter()
            .find(|p| (p.xi - 2.0).abs() < 1e-12)
            .unwrap();
        assert!((p.mode.s() - 8.0).abs() < 1e-12);
        assert!((p.mode.b() - 8.0).abs() < 1e-12);
        assert!(g
            .annotations()
            .iter()
            .any(|(k, v)| k == "condition_4_7" && v == "true"));
        let g2 = grid_from_kdv_symbols(2.0, 1.0, 1.0, (0.5, 3.0), 26, Spacing::Linear).unwrap();
        assert!(g2
            .annotations()
            .iter()
            .any(|(k, v)| k == "condition_4_7" && v == "true")); // 2 > 1.25
    }

    #[test]
    fn norm_basics() {
        let g = SpectralGrid::single(1.0, 2.0).unwrap();
        assert_eq!(g.norm(&g.zeros()).unwrap(), 0.0);
        let v = g.state_from_coeffs(vec![Complex64::new(3.0, 4.0)]).unwrap();
        assert!((g.norm(&v).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn norm_rejects_foreign_state() {
        let g1 = telegraph_grid(8);
        let g2 = telegraph_grid(9);
        let v = g2.zeros();
        assert!(matches!(
            g1.norm(&v),
            Err(SpectralError::GridMismatch { .. })
        ));
    }

    #[test]
    fn norm_homogeneity() {
        let g = telegraph_grid(64);
        let v = g.random_state(7);
        let lambda = Complex64::new(-2.5, 1.3);
        let lhs = g.norm(&v.scaled(lambda)).unwrap();
        let rhs = lambda.norm() * g.norm(&v).unwrap();
        assert!((lhs - rhs).abs() <= 1e-13 * rhs);
    }

    #[test]
    fn projection_identity_idempotence_complement() {
        let g = telegraph_grid(32);
        let v = g.random_state(3);
        let all = Band::open(0.0, f64::INFINITY);
        assert_eq!(g.project(&v, &all).unwrap(), v);
        let band = Band::open(0.4, 1.1);
        let once = g.project(&v, &band).unwrap();
        assert_eq!(g.project(&once, &band).unwrap(), once);
        // complementary bands reassemble the state
        let low = Band { lo: 0.0, hi: 0.7, lo_open: true, hi_open: true };
        let high = Band { lo: 0.7, hi: f64::INFINITY, lo_open: false, hi_open: true };
        let sum = g
            .project(&v, &low)
            .unwrap()
            .add(&g.project(&v, &high).unwrap())
            .unwrap();
        assert_eq!(sum, v);
    }

    #[test]
    fn make_data_shapes() {
        let g = telegraph_grid(32);
        let ind = g
            .make_data(
                &DataShape::Indicator {
                    band: Band::open(0.0, 0.5),
                },
                DataTarget::Position,
            )
            .unwrap();
        for (p, c) in g.points().iter().zip(ind.coeffs()) {
            let expected = if p.mode.s() < 0.5 { 1.0 } else { 0.0 };
            assert_eq!(c.re, expected);
        }
        let pt = g
            .make_data(&DataShape::Point { index: 5 }, DataTarget::Velocity)
            .unwrap();
        assert_eq!(pt.coeffs()[5], Complex64::new(1.0, 0.0));
        assert!((g.norm(&pt).unwrap().powi(2) - g.points()[5].weight).abs() < 1e-15);
        let gauss = g
            .make_data(
                &DataShape::Gaussian {
                    center: 1.0,
                    width: 0.2,
                },
                DataTarget::Position,
            )
            .unwrap();
        for &idx in &[0usize, 15, 31] {
            let s = g.points()[idx].mode.s();
            let expected = (-(s - 1.0) * (s - 1.0) / (2.0 * 0.04)).exp();
            assert!((gauss.coeffs()[idx].re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn make_data_rejects_bad_parameters() {
        let g = telegraph_grid(8);
        assert!(g
            .make_data(&DataShape::Point { index: 99 }, DataTarget::Position)
            .is_err());
        assert!(g
            .make_data(
                &DataShape::Gaussian {
                    center: 1.0,
                    width: 0.0
                },
                DataTarget::Position
            )
            .is_err());
    }

    #[test]
    fn delimited_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = telegraph_grid(16);
        let grid_path = dir.path().join("grid.csv");
        g.write_delimited(&grid_path).unwrap();
        let g2 = SpectralGrid::read_delimited(&grid_path).unwrap();
        assert_eq!(g.tag(), g2.tag());

        let v = g.random_state(11);
        let state_path = dir.path().join("state.csv");
        std::fs::write(&state_path, g.state_to_delimited(&v).unwrap()).unwrap();
        let v2 = g.read_state(&state_path).unwrap();
        for (a, b) in v.coeffs().iter().zip(v2.coeffs()) {
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn delimited_rejects_malformed_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "s,b,weight\n1,2,3\n").unwrap();
        assert!(matches!(
            SpectralGrid::read_delimited(&path),
            Err(SpectralError::FileFormat { line: 1, .. })
        ));
        std::fs::write(&path, "xi,s,b,weight\n1,2,xyz,3\n").unwrap();
        assert!(matches!(
            SpectralGrid::read_delimited(&path),
            Err(SpectralError::FileFormat { line: 2, .. })
        ));
    }

    #[test]
    fn random_state_is_seed_deterministic() {
        let g = telegraph_grid(16);
        assert_eq!(g.random_state(42), g.random_state(42));
        assert_ne!(g.random_state(42), g.random_state(43));
    }

    #[test]
    fn grid_rejects_unsorted_modes() {
        assert!(SpectralGrid::from_points(vec![(0.0, 1.0, 1.0, 1.0), (1.0, 0.5, 1.0, 1.0)]).is_err());
    }
}
