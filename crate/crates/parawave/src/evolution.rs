//! Assembly of full solutions on a grid: the exact wave evolution, the
//! canonical parabolic approximant, and the three-way split of the wave
//! solution used to compare their decay.
//!
//! Roots and d'Alembert coefficients are computed once per `(grid, f, g)`;
//! evaluation at each time is a pure per-mode map, so time sweeps at
//! distinct times can run fully in parallel.

use crate::spectral::{Band, SpectralError, SpectralGrid, StateVector};
use crate::symbols::{
    characteristic_roots, coefficients_from_roots, conditioning_indicator, mode_parabolic_rate,
    mode_wave_derivative, mode_wave_derivative_critical, mode_wave_value,
    mode_wave_value_critical, ModeCoefficients, ModeRoots, ModeSymbol, Regime,
    DEFAULT_CRITICAL_TOL,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("canonical initial datum h is identically zero; the parabolic comparison is undefined")]
    ZeroH,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Which canonical-datum formula to use. `Derived` is the inverse square
/// root that actually solves the 2x2 system; `Literal` multiplies by the
/// square root instead and exists so the alternative can be probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HFormula {
    #[default]
    Derived,
    Literal,
}

/// Per-mode solved data.
#[derive(Debug, Clone, Copy)]
enum ModeSolution {
    Regular {
        roots: ModeRoots,
        coeffs: ModeCoefficients,
    },
    /// Double root at the crossover; position and velocity data kept as-is.
    Jordan { f: Complex64, g: Complex64 },
}

/// Modes whose d'Alembert inversion is close to singular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditioningDiagnostic {
    pub index: usize,
    pub s: f64,
    pub b: f64,
    /// `|b f + g| / sqrt(q0^2 + q^2)`.
    pub indicator: f64,
}

/// Relative closeness of `sqrt(q0^2+q^2)` to `max(s, b)` under which a mode
/// is recorded in the conditioning diagnostics.
const CONDITIONING_WINDOW: f64 = 1e-6;

/// Precomputed exact wave evolution for one `(grid, f, g, gamma)`.
#[derive(Debug, Clone)]
pub struct WaveEvolution {
    grid: SpectralGrid,
    solutions: Vec<ModeSolution>,
    gamma: f64,
    f: StateVector,
    g: StateVector,
    critical_indices: Vec<usize>,
    diagnostics: Vec<ConditioningDiagnostic>,
}

impl WaveEvolution {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn critical_indices(&self) -> &[usize] {
        &self.critical_indices
    }

    pub fn diagnostics(&self) -> &[ConditioningDiagnostic] {
        &self.diagnostics
    }

    pub fn initial_position(&self) -> &StateVector {
        &self.f
    }

    pub fn initial_velocity(&self) -> &StateVector {
        &self.g
    }
}

/// Solves every mode of the grid for the given initial data. Critical modes
/// are routed to the Jordan evaluator; modes whose inversion is nearly
/// singular are recorded in the conditioning diagnostics.
pub fn prepare_wave(
    grid: &SpectralGrid,
    f: &StateVector,
    g: &StateVector,
    gamma: f64,
) -> Result<WaveEvolution, EvolutionError> {
    // Tag checks piggyback on a no-op projection.
    let all = Band::open(0.0, f64::INFINITY);
    grid.project(f, &all)?;
    grid.project(g, &all)?;

    let mut solutions = Vec::with_capacity(grid.len());
    let mut critical_indices = Vec::new();
    let mut diagnostics = Vec::new();
    for (k, p) in grid.points().iter().enumerate() {
        let (fk, gk) = (f.coeffs()[k], g.coeffs()[k]);
        let roots = characteristic_roots(&p.mode, DEFAULT_CRITICAL_TOL);
        if roots.regime == Regime::Critical {
            critical_indices.push(k);
            solutions.push(ModeSolution::Jordan { f: fk, g: gk });
            continue;
        }
        let scale = p.mode.s().max(p.mode.b());
        if roots.q0.hypot(roots.q) < CONDITIONING_WINDOW * scale {
            diagnostics.push(ConditioningDiagnostic {
                index: k,
                s: p.mode.s(),
                b: p.mode.b(),
                indicator: conditioning_indicator(&p.mode, &roots, fk, gk),
            });
        }
        let coeffs = coefficients_from_roots(&p.mode, &roots, fk, gk)
            .expect("non-critical mode cannot fail the coefficient solve");
        solutions.push(ModeSolution::Regular { roots, coeffs });
    }
    Ok(WaveEvolution {
        grid: grid.clone(),
        solutions,
        gamma,
        f: f.clone(),
        g: g.clone(),
        critical_indices,
        diagnostics,
    })
}

/// Exact solution at time `t >= 0`. At `t = 0` the stored initial position
/// is returned as-is, making the initial condition exact to the bit.
pub fn wave_state(we: &WaveEvolution, t: f64) -> StateVector {
    if t == 0.0 {
        return we.f.clone();
    }
    let coeffs = we
        .grid
        .points()
        .iter()
        .zip(&we.solutions)
        .map(|(p, sol)| match sol {
            ModeSolution::Regular { roots, coeffs } => mode_wave_value(roots, coeffs, t),
            ModeSolution::Jordan { f, g } => mode_wave_value_critical(&p.mode, *f, *g, t),
        })
        .collect();
    we.grid
        .state_from_coeffs(coeffs)
        .expect("evolution coefficients match their own grid")
}

/// Analytic time derivative of the solution at `t >= 0`.
pub fn wave_velocity(we: &WaveEvolution, t: f64) -> StateVector {
    let coeffs = we
        .grid
        .points()
        .iter()
        .zip(&we.solutions)
        .map(|(p, sol)| match sol {
            ModeSolution::Regular { roots, coeffs } => mode_wave_derivative(roots, coeffs, t),
            ModeSolution::Jordan { f, g } => mode_wave_derivative_critical(&p.mode, *f, *g, t),
        })
        .collect();
    we.grid
        .state_from_coeffs(coeffs)
        .expect("evolution coefficients match their own grid")
}

/// Canonical initial datum of the limiting parabolic flow: `h_+` restricted
/// to the band below `gamma`, zero at and above `gamma` and at critical
/// modes.
pub fn canonical_initial(
    grid: &SpectralGrid,
    f: &StateVector,
    g: &StateVector,
    gamma: f64,
) -> Result<StateVector, EvolutionError> {
    canonical_initial_with(grid, f, g, gamma, HFormula::Derived)
}

/// [`canonical_initial`] with an explicit formula choice.
pub fn canonical_initial_with(
    grid: &SpectralGrid,
    f: &StateVector,
    g: &StateVector,
    gamma: f64,
    formula: HFormula,
) -> Result<StateVector, EvolutionError> {
    let all = Band::open(0.0, f64::INFINITY);
    grid.project(f, &all)?;
    grid.project(g, &all)?;
    let zero = Complex64::new(0.0, 0.0);
    let coeffs = grid
        .points()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if p.mode.s() >= gamma {
                return zero;
            }
            let roots = characteristic_roots(&p.mode, DEFAULT_CRITICAL_TOL);
            if roots.regime == Regime::Critical {
                return zero;
            }
            let (fk, gk) = (f.coeffs()[k], g.coeffs()[k]);
            match formula {
                HFormula::Derived => {
                    coefficients_from_roots(&p.mode, &roots, fk, gk)
                        .expect("non-critical")
                        .h_plus
                }
                HFormula::Literal => {
                    // Printed variant: multiply by the square root instead of
                    // inverting it. The principal complex root covers modes
                    // below gamma that are nevertheless underdamped.
                    let disc = Complex64::new(
                        p.mode.b() * p.mode.b() - p.mode.s() * p.mode.s(),
                        0.0,
                    );
                    0.5 * (fk + disc.sqrt() * (p.mode.b() * fk + gk))
                }
            }
        })
        .collect();
    Ok(grid.state_from_coeffs(coeffs)?)
}

/// Precomputed parabolic evolution `v(t) = e^{-t s^2/(2b)} h` per mode.
#[derive(Debug, Clone)]
pub struct ParabolicEvolution {
    grid: SpectralGrid,
    h: StateVector,
    rates: Vec<f64>,
    gamma: f64,
}

impl ParabolicEvolution {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn initial(&self) -> &StateVector {
        &self.h
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Restricts `h` to the band below `gamma` (zeroing critical modes as well)
/// and precomputes the per-mode decay rates. Fails with [`EvolutionError::ZeroH`]
/// if nothing survives the projection.
pub fn prepare_parabolic(
    grid: &SpectralGrid,
    h: &StateVector,
    gamma: f64,
) -> Result<ParabolicEvolution, EvolutionError> {
    let below = Band::open(0.0, gamma);
    let mut projected = grid.project(h, &below)?;
    let critical: Vec<usize> = grid
        .points()
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            characteristic_roots(&p.mode, DEFAULT_CRITICAL_TOL).regime == Regime::Critical
        })
        .map(|(k, _)| k)
        .collect();
    if !critical.is_empty() {
        let mut coeffs = projected.coeffs().to_vec();
        for k in critical {
            coeffs[k] = Complex64::new(0.0, 0.0);
        }
        projected = grid.state_from_coeffs(coeffs)?;
    }
    if projected.is_zero() {
        return Err(EvolutionError::ZeroH);
    }
    let rates = grid
        .points()
        .iter()
        .map(|p| mode_parabolic_rate(&p.mode))
        .collect();
    Ok(ParabolicEvolution {
        grid: grid.clone(),
        h: projected,
        rates,
        gamma,
    })
}

/// Parabolic state at time `t >= 0`.
pub fn parabolic_state(pe: &ParabolicEvolution, t: f64) -> StateVector {
    if t == 0.0 {
        return pe.h.clone();
    }
    let coeffs = pe
        .h
        .coeffs()
        .iter()
        .zip(&pe.rates)
        .map(|(hk, rate)| hk * (rate * t).exp())
        .collect();
    pe.grid
        .state_from_coeffs(coeffs)
        .expect("parabolic coefficients match their own grid")
}

/// Three-way split of the wave solution: slow part below the crossover,
/// fast part at and above it, and the conjugate branch. Critical-mode
/// contributions carry no `h_±` split and are assigned whole to the second
/// component, which matches their band membership when the crossover lies
/// at `b = s`.
pub fn decompose(we: &WaveEvolution, t: f64) -> (StateVector, StateVector, StateVector) {
    let zero = Complex64::new(0.0, 0.0);
    let n = we.grid.len();
    let mut u1 = vec![zero; n];
    let mut u2 = vec![zero; n];
    let mut u3 = vec![zero; n];
    for (k, (p, sol)) in we.grid.points().iter().zip(&we.solutions).enumerate() {
        match sol {
            ModeSolution::Regular { roots, coeffs } => {
                let plus = (roots.c_plus * t).exp() * coeffs.h_plus;
                if p.mode.s() < we.gamma {
                    u1[k] = plus;
                } else {
                    u2[k] = plus;
                }
                u3[k] = (roots.c_minus * t).exp() * coeffs.h_minus;
            }
            ModeSolution::Jordan { f, g } => {
                u2[k] = mode_wave_value_critical(&p.mode, *f, *g, t);
            }
        }
    }
    let pack = |c: Vec<Complex64>| {
        we.grid
            .state_from_coeffs(c)
            .expect("decomposition matches its own grid")
    };
    (pack(u1), pack(u2), pack(u3))
}
