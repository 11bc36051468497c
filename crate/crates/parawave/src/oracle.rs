//! Independent brute-force verification of the closed forms.
//!
//! The integrators here evaluate the mode ODEs directly from `(s, b)` with a
//! classical Runge-Kutta scheme; they deliberately share no code with the
//! closed-form evaluators they are used to check.

use crate::symbols::ModeSymbol;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("adaptive step control stalled at t = {t} (step {step})")]
    StepUnderflow { t: f64, step: f64 },
    #[error("invalid oracle config: {0}")]
    InvalidConfig(String),
    #[error("requested times must be nonnegative and increasing")]
    BadTimes,
}

/// Integration method selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMethod {
    /// Classical RK4 with a fixed step. `None` uses the default
    /// `min(1e-3, 0.05 / max(s, b))`, which keeps the scheme well inside its
    /// stability region for any mode.
    FixedStep { step: Option<f64> },
    /// Step-doubling RK4 with a per-step relative error target.
    Adaptive { tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub method: OracleMethod,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            method: OracleMethod::FixedStep { step: None },
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        match self.method {
            OracleMethod::FixedStep { step: Some(h) } if !(h.is_finite() && h > 0.0) => Err(
                OracleError::InvalidConfig(format!("fixed step must be positive, got {h}")),
            ),
            OracleMethod::Adaptive { tolerance } if !(tolerance > 0.0 && tolerance <= 1e-3) => {
                Err(OracleError::InvalidConfig(format!(
                    "adaptive tolerance must lie in (0, 1e-3], got {tolerance}"
                )))
            }
            _ => Ok(()),
        }
    }
}

fn default_step(m: &ModeSymbol) -> f64 {
    (1e-3f64).min(0.05 / m.s().max(m.b()))
}

fn check_times(times: &[f64]) -> Result<(), OracleError> {
    let increasing = times.windows(2).all(|w| w[1] > w[0]);
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || !increasing {
        return Err(OracleError::BadTimes);
    }
    Ok(())
}

type WaveState = (Complex64, Complex64);

// Right-hand side of [u, u']' = [[0, 1], [-s^2, -2b]] [u, u'].
#[inline]
fn wave_rhs(s2: f64, two_b: f64, y: WaveState) -> WaveState {
    (y.1, -s2 * y.0 - two_b * y.1)
}

#[inline]
fn rk4_wave_step(s2: f64, two_b: f64, y: WaveState, h: f64) -> WaveState {
    let k1 = wave_rhs(s2, two_b, y);
    let k2 = wave_rhs(s2, two_b, (y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
    let k3 = wave_rhs(s2, two_b, (y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
    let k4 = wave_rhs(s2, two_b, (y.0 + h * k3.0, y.1 + h * k3.1));
    (
        y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

fn integrate_wave_fixed(
    s2: f64,
    two_b: f64,
    mut y: WaveState,
    mut t: f64,
    t_end: f64,
    h: f64,
) -> WaveState {
    let span = t_end - t;
    if span <= 0.0 {
        return y;
    }
    let n_steps = (span / h).ceil().max(1.0) as u64;
    let h = span / n_steps as f64;
    for _ in 0..n_steps {
        y = rk4_wave_step(s2, two_b, y, h);
        t += h;
    }
    let _ = t;
    y
}

fn integrate_wave_adaptive(
    s2: f64,
    two_b: f64,
    mut y: WaveState,
    mut t: f64,
    t_end: f64,
    tol: f64,
) -> Result<WaveState, OracleError> {
    let mut h = (1e-3f64).min(0.05 / s2.sqrt().max(0.5 * two_b).max(1e-30));
    let min_step = 1e-14 * (t_end.max(1.0));
    while t < t_end {
        if h < min_step {
            return Err(OracleError::StepUnderflow { t, step: h });
        }
        let h_try = h.min(t_end - t);
        let coarse = rk4_wave_step(s2, two_b, y, h_try);
        let half = rk4_wave_step(s2, two_b, y, 0.5 * h_try);
        let fine = rk4_wave_step(s2, two_b, half, 0.5 * h_try);
        let scale = fine.0.norm().max(fine.1.norm()).max(1e-30);
        let err = ((coarse.0 - fine.0).norm().max((coarse.1 - fine.1).norm())) / (15.0 * scale);
        if err <= tol {
            // Richardson-extrapolated accept.
            y = (
                fine.0 + (fine.0 - coarse.0) / 15.0,
                fine.1 + (fine.1 - coarse.1) / 15.0,
            );
            t += h_try;
            if err < tol / 32.0 {
                h *= 2.0;
            }
        } else {
            h *= 0.5;
        }
    }
    Ok(y)
}

/// Numerical solution of the mode's second-order equation, reported as
/// `(u, u')` at each requested time. Times must be nonnegative and strictly
/// increasing.
pub fn integrate_mode(
    m: &ModeSymbol,
    f: Complex64,
    g: Complex64,
    times: &[f64],
    config: &OracleConfig,
) -> Result<Vec<WaveState>, OracleError> {
    config.validate()?;
    check_times(times)?;
    let s2 = m.s() * m.s();
    let two_b = 2.0 * m.b();
    let mut out = Vec::with_capacity(times.len());
    let mut y = (f, g);
    let mut t = 0.0;
    for &target in times {
        match config.method {
            OracleMethod::FixedStep { step } => {
                let h = step.unwrap_or_else(|| default_step(m));
                y = integrate_wave_fixed(s2, two_b, y, t, target, h);
            }
            OracleMethod::Adaptive { tolerance } => {
                y = integrate_wave_adaptive(s2, two_b, y, t, target, tolerance)?;
            }
        }
        t = target;
        out.push(y);
    }
    Ok(out)
}

/// Numerical solution of the scalar parabolic equation `2b v' + s^2 v = 0`.
pub fn integrate_parabolic_mode(
    m: &ModeSymbol,
    h0: Complex64,
    times: &[f64],
    config: &OracleConfig,
) -> Result<Vec<Complex64>, OracleError> {
    config.validate()?;
    check_times(times)?;
    let rate = -(m.s() * m.s()) / (2.0 * m.b());
    let step = match config.method {
        OracleMethod::FixedStep { step } => step.unwrap_or_else(|| default_step(m)),
        OracleMethod::Adaptive { .. } => default_step(m),
    };
    let mut out = Vec::with_capacity(times.len());
    let mut v = h0;
    let mut t = 0.0;
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let n_steps = (span / step).ceil().max(1.0) as u64;
            let h = span / n_steps as f64;
            for _ in 0..n_steps {
                // RK4 for v' = rate * v
                let k1 = rate * v;
                let k2 = rate * (v + 0.5 * h * k1);
                let k3 = rate * (v + 0.5 * h * k2);
                let k4 = rate * (v + h * k3);
                v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
        }
        t = target;
        out.push(v);
    }
    Ok(out)
}
