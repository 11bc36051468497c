//! Friction symbol families, crossover detection, and the hypothesis
//! auditor.
//!
//! A friction function `F` maps frequencies to damping strengths; the
//! crossover `gamma` is its fixed point `F(gamma) = gamma`. The auditor
//! samples `F` on a log grid and checks the structural hypotheses the decay
//! theory needs: `F(x) > x` below the crossover, `F(x) < x` above it,
//! boundedness near zero, and a strict slack below the identity at the top
//! of the sampled range. Audits witness, they do not prove.

use crate::numerics::{bisect, logspace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FrictionError {
    #[error("invalid friction spec: {0}")]
    InvalidSpec(String),
    #[error("s = {s} outside table range [{lo}, {hi}]")]
    OutOfTable { s: f64, lo: f64, hi: f64 },
    #[error("F(x) - x has the same sign at both bracket ends [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("sign scan found {count} crossings of the identity in the bracket; the crossover is not unique")]
    MultipleCrossings { count: usize },
    #[error("bisection converged but |F(gamma) - gamma| = {residual} exceeds tol = {tol}")]
    ToleranceNotMet { residual: f64, tol: f64 },
}

/// Friction symbol generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrictionSpec {
    /// Telegraph friction `F(x) = a`.
    Constant { a: f64 },
    /// Power friction `F(x) = a x^alpha` with `0 <= alpha < 1`.
    Power { a: f64, alpha: f64 },
    /// Friction induced by third-order dispersion: given `s`, the auxiliary
    /// variable `x > 0` solves `x^3 + a0 x^2 + a1 x = s^2` and `F(s) = a x`.
    ParametricKdv { a: f64, a0: f64, a1: f64 },
    /// Piecewise-linear interpolation of `(s, b)` samples with strictly
    /// increasing `s`.
    Table { samples: Vec<(f64, f64)> },
}

impl FrictionSpec {
    pub fn validate(&self) -> Result<(), FrictionError> {
        let bad = |msg: String| Err(FrictionError::InvalidSpec(msg));
        match self {
            FrictionSpec::Constant { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return bad(format!("constant friction needs a > 0, got {a}"));
                }
            }
            FrictionSpec::Power { a, alpha } => {
                if !(a.is_finite() && *a > 0.0) {
                    return bad(format!("power friction needs a > 0, got {a}"));
                }
                if !(alpha.is_finite() && (0.0..1.0).contains(alpha)) {
                    return bad(format!("power friction needs 0 <= alpha < 1, got {alpha}"));
                }
            }
            FrictionSpec::ParametricKdv { a, a0, a1 } => {
                if !(a.is_finite() && *a > 0.0 && a0.is_finite() && *a0 >= 0.0 && a1.is_finite() && *a1 >= 0.0)
                {
                    return bad(format!(
                        "kdv friction needs a > 0 and a0, a1 >= 0, got a = {a}, a0 = {a0}, a1 = {a1}"
                    ));
                }
            }
            FrictionSpec::Table { samples } => {
                if samples.len() < 2 {
                    return bad("table friction needs at least two samples".into());
                }
                for pair in samples.windows(2) {
                    if !(pair[1].0 > pair[0].0) {
                        return bad("table s-samples must be strictly increasing".into());
                    }
                }
                if samples.iter().any(|(s, b)| !(s.is_finite() && b.is_finite() && *s > 0.0 && *b > 0.0)) {
                    return bad("table samples must be finite and positive".into());
                }
            }
        }
        Ok(())
    }

    /// Friction symbol value at frequency `s > 0`.
    pub fn evaluate(&self, s: f64) -> Result<f64, FrictionError> {
        match self {
            FrictionSpec::Constant { a } => Ok(*a),
            FrictionSpec::Power { a, alpha } => Ok(a * s.powf(*alpha)),
            FrictionSpec::ParametricKdv { a, a0, a1 } => {
                Ok(a * kdv_auxiliary_variable(s, *a0, *a1))
            }
            FrictionSpec::Table { samples } => {
                let lo = samples[0].0;
                let hi = samples[samples.len() - 1].0;
                if s < lo || s > hi {
                    return Err(FrictionError::OutOfTable { s, lo, hi });
                }
                let idx = samples.partition_point(|(x, _)| *x <= s);
                if idx == 0 {
                    return Ok(samples[0].1);
                }
                if idx == samples.len() {
                    return Ok(samples[samples.len() - 1].1);
                }
                let (x0, y0) = samples[idx - 1];
                let (x1, y1) = samples[idx];
                Ok(y0 + (y1 - y0) * (s - x0) / (x1 - x0))
            }
        }
    }
}

/// Unique positive root `x` of the monotone cubic `x^3 + a0 x^2 + a1 x = s^2`.
pub fn kdv_auxiliary_variable(s: f64, a0: f64, a1: f64) -> f64 {
    let target = s * s;
    let cubic = |x: f64| x * x * x + a0 * x * x + a1 * x - target;
    // The cubic dominates x^3, so the root lies in (0, s^(2/3)]; pad the
    // bracket against rounding at the endpoint.
    let hi = target.cbrt() * (1.0 + 1e-12) + 1e-300;
    bisect(cubic, 0.0, hi, 0.0)
}

/// Crossover `x` printed for the dispersion example, in the auxiliary
/// `T`-variable: the positive root of `x^2 + a0 x + (a1 - a) = 0`. Exists
/// exactly when `a > a1 + a0^2/4` fails to matter... it exists whenever
/// `a > a1`; the printed uniqueness condition is `a > a1 + a0^2/4`.
pub fn kdv_printed_crossover_x(a: f64, a0: f64, a1: f64) -> Option<f64> {
    let disc = a0 * a0 - 4.0 * (a1 - a);
    if disc < 0.0 {
        return None;
    }
    let x = 0.5 * (-a0 + disc.sqrt());
    (x > 0.0).then_some(x)
}

/// Uniqueness condition `a > a1 + a0^2/4` attached to the printed formula.
pub fn kdv_condition_47(a: f64, a0: f64, a1: f64) -> bool {
    a > a1 + a0 * a0 / 4.0
}

/// Located fixed point `F(gamma) = gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverResult {
    pub gamma: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
    pub unique_on_sampled_range: bool,
}

const SCAN_POINTS: usize = 512;

/// Counts sign changes of `F(x) - x` over the sampled grid, skipping exact
/// zeros (a zero sample is the crossover itself, not an extra crossing).
fn count_sign_changes(spec: &FrictionSpec, grid: &[f64]) -> Result<usize, FrictionError> {
    let mut changes = 0usize;
    let mut last_sign = 0i8;
    for &x in grid {
        let d = spec.evaluate(x)? - x;
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                changes += 1;
            }
            last_sign = sign;
        }
    }
    Ok(changes)
}

/// Bisection root of `F(x) - x` inside `bracket`, with a 512-point log-grid
/// sign scan establishing uniqueness over the bracket.
pub fn find_crossover(
    spec: &FrictionSpec,
    bracket: (f64, f64),
    tol: f64,
) -> Result<CrossoverResult, FrictionError> {
    spec.validate()?;
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(FrictionError::InvalidSpec(format!(
            "crossover bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let d_lo = spec.evaluate(lo)? - lo;
    let d_hi = spec.evaluate(hi)? - hi;
    if d_lo == 0.0 || d_hi == 0.0 {
        let gamma = if d_lo == 0.0 { lo } else { hi };
        return Ok(CrossoverResult {
            gamma,
            bracket,
            residual: 0.0,
            unique_on_sampled_range: true,
        });
    }
    if (d_lo > 0.0) == (d_hi > 0.0) {
        return Err(FrictionError::NoSignChange { lo, hi });
    }
    let changes = count_sign_changes(spec, &logspace(lo, hi, SCAN_POINTS))?;
    if changes > 1 {
        return Err(FrictionError::MultipleCrossings { count: changes });
    }
    // Evaluation errors inside the bracket would have surfaced in the scan.
    let gamma = bisect(|x| spec.evaluate(x).unwrap_or(f64::NAN) - x, lo, hi, 0.0);
    let residual = spec.evaluate(gamma)? - gamma;
    if residual.abs() > tol {
        return Err(FrictionError::ToleranceNotMet {
            residual: residual.abs(),
            tol,
        });
    }
    Ok(CrossoverResult {
        gamma,
        bracket,
        residual,
        unique_on_sampled_range: true,
    })
}

/// Which audited hypothesis a witness violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditCondition {
    /// `F(x) > x` required below the crossover.
    BelowGamma,
    /// `F(x) < x` required above the crossover.
    AboveGamma,
    /// `F` bounded as `x -> 0+`.
    BoundedNearZero,
    /// `(1 - delta) x - F(x) >= 0` required on the top decade.
    LiminfSlack,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationWitness {
    pub x: f64,
    pub fx: f64,
    pub condition: AuditCondition,
}

impl ViolationWitness {
    /// Re-evaluates the violated inequality from scratch; the audit
    /// soundness property demands every reported witness reproduce.
    /// `delta` must be the slack the audit ran with.
    pub fn reproduces(&self, spec: &FrictionSpec, delta: f64) -> bool {
        let Ok(fx) = spec.evaluate(self.x) else {
            return false;
        };
        match self.condition {
            AuditCondition::BelowGamma => fx <= self.x,
            AuditCondition::AboveGamma => fx >= self.x,
            // The boundedness judgment is a property of the sampled decade;
            // the witness records the sup and must recompute to it.
            AuditCondition::BoundedNearZero => fx == self.fx,
            AuditCondition::LiminfSlack => (1.0 - delta) * self.x - fx < 0.0,
        }
    }
}

/// Sampled audit of the friction hypotheses. Violations are reported, never
/// thrown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisAudit {
    pub gamma: Option<CrossoverResult>,
    pub below_ok: bool,
    pub above_ok: bool,
    pub bounded_near_zero: bool,
    pub witnessed_sup_near_zero: f64,
    pub liminf_ok: bool,
    pub delta: f64,
    /// Largest slack `delta` for which the top-decade check passes on the
    /// sampled grid.
    pub largest_delta_pass: f64,
    pub violations: Vec<ViolationWitness>,
}

impl HypothesisAudit {
    pub fn all_pass(&self) -> bool {
        self.gamma.is_some() && self.below_ok && self.above_ok && self.bounded_near_zero && self.liminf_ok
    }
}

/// Relative exclusion window around the located crossover when classifying
/// below/above samples; the hypotheses hold on open intervals.
const GAMMA_WINDOW: f64 = 1e-9;

/// If the lowest sampled decade's sup exceeds this multiple of the next
/// decade's sup, `F` is flagged as growing toward zero.
const NEAR_ZERO_GROWTH_CAP: f64 = 8.0;

/// Samples `F` on a log grid over `[s_min, s_max]` and checks the fixed-point
/// hypotheses. Needs `0 < s_min < s_max`, `n_samples >= 16`, `0 < delta < 1`.
pub fn audit(
    spec: &FrictionSpec,
    s_min: f64,
    s_max: f64,
    n_samples: usize,
    delta: f64,
) -> Result<HypothesisAudit, FrictionError> {
    spec.validate()?;
    if !(s_min.is_finite() && s_max.is_finite() && 0.0 < s_min && s_min < s_max) {
        return Err(FrictionError::InvalidSpec(format!(
            "audit range must satisfy 0 < s_min < s_max, got [{s_min}, {s_max}]"
        )));
    }
    if n_samples < 16 {
        return Err(FrictionError::InvalidSpec(format!(
            "audit needs n_samples >= 16, got {n_samples}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(FrictionError::InvalidSpec(format!(
            "audit slack delta must lie in (0, 1), got {delta}"
        )));
    }

    let grid = logspace(s_min, s_max, n_samples);
    let values: Vec<f64> = grid
        .iter()
        .map(|&x| spec.evaluate(x))
        .collect::<Result<_, _>>()?;

    let mut violations = Vec::new();

    // Locate the crossover from the samples; the audit never throws on a
    // structurally broken F, it reports gamma as absent or non-unique.
    let mut crossing_brackets = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&x, &fx) in grid.iter().zip(&values) {
        let d = fx - x;
        if d == 0.0 {
            crossing_brackets.push((x, x));
            last = None;
            continue;
        }
        if let Some((px, pd)) = last {
            if (pd > 0.0) != (d > 0.0) {
                crossing_brackets.push((px, x));
            }
        }
        last = Some((x, d));
    }
    let gamma = crossing_brackets.first().map(|&(blo, bhi)| {
        let g = if blo == bhi {
            blo
        } else {
            bisect(|x| spec.evaluate(x).unwrap_or(f64::NAN) - x, blo, bhi, 0.0)
        };
        CrossoverResult {
            gamma: g,
            bracket: (blo, bhi),
            residual: spec.evaluate(g).map(|fg| fg - g).unwrap_or(f64::NAN),
            unique_on_sampled_range: crossing_brackets.len() == 1,
        }
    });

    // F(x) > x below gamma, F(x) < x above, skipping a thin window at the
    // crossover itself where the strict inequalities degenerate.
    let (mut below_ok, mut above_ok) = (true, true);
    if let Some(cr) = &gamma {
        let g = cr.gamma;
        for (&x, &fx) in grid.iter().zip(&values) {
            if x < g * (1.0 - GAMMA_WINDOW) {
                if fx <= x {
                    below_ok = false;
                    violations.push(ViolationWitness {
                        x,
                        fx,
                        condition: AuditCondition::BelowGamma,
                    });
                }
            } else if x > g * (1.0 + GAMMA_WINDOW) && fx >= x {
                above_ok = false;
                violations.push(ViolationWitness {
                    x,
                    fx,
                    condition: AuditCondition::AboveGamma,
                });
            }
        }
    } else {
        below_ok = false;
        above_ok = false;
    }

    // Boundedness near zero: compare the lowest sampled decade's sup against
    // the decade above it; growth toward the infrared end is the witness.
    let first_decade_top = s_min * 10.0;
    let second_decade_top = s_min * 100.0;
    let mut sup_first: f64 = 0.0;
    let mut arg_first = s_min;
    let mut sup_second: f64 = 0.0;
    for (&x, &fx) in grid.iter().zip(&values) {
        if x <= first_decade_top {
            if fx > sup_first {
                sup_first = fx;
                arg_first = x;
            }
        } else if x <= second_decade_top && fx > sup_second {
            sup_second = fx;
        }
    }
    let bounded_near_zero = sup_first.is_finite()
        && (sup_second == 0.0 || sup_first <= NEAR_ZERO_GROWTH_CAP * sup_second);
    if !bounded_near_zero {
        violations.push(ViolationWitness {
            x: arg_first,
            fx: sup_first,
            condition: AuditCondition::BoundedNearZero,
        });
    }

    // Top-decade slack below the identity: (1 - delta) x - F(x) >= 0.
    let top_decade_lo = s_max / 10.0;
    let mut liminf_ok = true;
    let mut largest_delta_pass = f64::INFINITY;
    for (&x, &fx) in grid.iter().zip(&values) {
        if x < top_decade_lo {
            continue;
        }
        if (1.0 - delta) * x - fx < 0.0 {
            liminf_ok = false;
            violations.push(ViolationWitness {
                x,
                fx,
                condition: AuditCondition::LiminfSlack,
            });
        }
        largest_delta_pass = largest_delta_pass.min(1.0 - fx / x);
    }
    let largest_delta_pass = largest_delta_pass.max(0.0);

    Ok(HypothesisAudit {
        gamma,
        below_ok,
        above_ok,
        bounded_near_zero,
        witnessed_sup_near_zero: sup_first,
        liminf_ok,
        delta,
        largest_delta_pass,
        violations,
    })
}
