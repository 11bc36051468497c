//! Exact scalar mathematics of a single spectral mode.
//!
//! A mode is a pair `(s, b)` of frequency and friction symbol values. The
//! damped oscillator `u'' + 2b u' + s^2 u = 0` has characteristic roots
//! `c = -b ± sqrt(b^2 - s^2)`; everything else in the crate is assembled
//! from the closed forms derived here: the d'Alembert coefficients, the
//! parabolic decay rate `-s^2/(2b)`, and the gap between the slow wave
//! root and the parabolic rate.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance under which `|b - s|` is treated as an exact double
/// root. Discrete grids can land on the crossover even though it carries no
/// spectral mass in the continuum model.
pub const DEFAULT_CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SymbolError {
    #[error("invalid mode symbol: s = {s}, b = {b} (need finite s > 0, b >= 0)")]
    InvalidSymbol { s: f64, b: f64 },
    #[error("mode sits at the critical crossover b = s = {value}; the d'Alembert system is singular")]
    CriticalMode { value: f64 },
    #[error("operation requires an overdamped mode (b > s), got s = {s}, b = {b}")]
    RequiresOverdamped { s: f64, b: f64 },
    #[error("argument {value} outside domain [{lo}, {hi})")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
}

/// One spectral point: the pair of `S`- and `B`-symbol values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSymbol {
    s: f64,
    b: f64,
}

impl ModeSymbol {
    /// A mode with positive frequency and positive friction.
    pub fn new(s: f64, b: f64) -> Result<Self, SymbolError> {
        if !(s.is_finite() && b.is_finite() && s > 0.0 && b > 0.0) {
            return Err(SymbolError::InvalidSymbol { s, b });
        }
        Ok(Self { s, b })
    }

    /// Validation-only constructor with `b = 0`: the skewadjoint case whose
    /// trajectories conserve energy exactly. Not accepted by the parabolic
    /// machinery.
    pub fn undamped(s: f64) -> Result<Self, SymbolError> {
        if !(s.is_finite() && s > 0.0) {
            return Err(SymbolError::InvalidSymbol { s, b: 0.0 });
        }
        Ok(Self { s, b: 0.0 })
    }

    #[inline]
    pub fn s(&self) -> f64 {
        self.s
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Damping regime of a mode, decided by the sign of `b - s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Overdamped,
    Critical,
    Underdamped,
}

/// Characteristic roots of `c^2 + 2bc + s^2 = 0` together with the real and
/// imaginary parts `q0`, `q` of the discriminant square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRoots {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub regime: Regime,
    pub q0: f64,
    pub q: f64,
}

/// d'Alembert coefficients `h_±` for given initial data `(f, g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub h_plus: Complex64,
    pub h_minus: Complex64,
}

/// Roots of the mode's characteristic polynomial, using the nonnegative
/// square root throughout.
///
/// Overdamped modes compute the slow root as `-s^2 / (b + q0)` instead of
/// `-b + q0`; the two are identical in exact arithmetic and the former does
/// not cancel when `s << b`.
pub fn characteristic_roots(m: &ModeSymbol, critical_tol: f64) -> ModeRoots {
    let (s, b) = (m.s, m.b);
    if (b - s).abs() <= critical_tol * b.max(s) {
        return ModeRoots {
            c_plus: Complex64::new(-b, 0.0),
            c_minus: Complex64::new(-b, 0.0),
            regime: Regime::Critical,
            q0: 0.0,
            q: 0.0,
        };
    }
    if b > s {
        let q0 = ((b - s) * (b + s)).sqrt();
        ModeRoots {
            c_plus: Complex64::new(-(s * s) / (b + q0), 0.0),
            c_minus: Complex64::new(-(b + q0), 0.0),
            regime: Regime::Overdamped,
            q0,
            q: 0.0,
        }
    } else {
        let q = ((s - b) * (s + b)).sqrt();
        ModeRoots {
            c_plus: Complex64::new(-b, q),
            c_minus: Complex64::new(-b, -q),
            regime: Regime::Underdamped,
            q0: 0.0,
            q,
        }
    }
}

/// Solves the 2x2 system `f = h_+ + h_-`, `g = c_+ h_+ + c_- h_-`:
/// `h_± = (f ± (q0 + iq)^{-1} (b f + g)) / 2`.
pub fn dalembert_coefficients(
    m: &ModeSymbol,
    f: Complex64,
    g: Complex64,
) -> Result<ModeCoefficients, SymbolError> {
    let roots = characteristic_roots(m, DEFAULT_CRITICAL_TOL);
    coefficients_from_roots(m, &roots, f, g)
}

/// Same as [`dalembert_coefficients`] but reuses precomputed roots.
pub fn coefficients_from_roots(
    m: &ModeSymbol,
    roots: &ModeRoots,
    f: Complex64,
    g: Complex64,
) -> Result<ModeCoefficients, SymbolError> {
    if roots.regime == Regime::Critical {
        return Err(SymbolError::CriticalMode { value: m.b });
    }
    let half_shift = (m.b * f + g) / Complex64::new(roots.q0, roots.q);
    Ok(ModeCoefficients {
        h_plus: 0.5 * (f + half_shift),
        h_minus: 0.5 * (f - half_shift),
    })
}

/// Condition indicator `|b f + g| / sqrt(q0^2 + q^2)` for the inversion in
/// [`dalembert_coefficients`]; blows up as the mode approaches the crossover.
pub fn conditioning_indicator(m: &ModeSymbol, roots: &ModeRoots, f: Complex64, g: Complex64) -> f64 {
    let denom = roots.q0.hypot(roots.q);
    if denom == 0.0 {
        f64::INFINITY
    } else {
        (m.b * f + g).norm() / denom
    }
}

/// `u(t) = e^{t c_+} h_+ + e^{t c_-} h_-`.
pub fn mode_wave_value(roots: &ModeRoots, coeffs: &ModeCoefficients, t: f64) -> Complex64 {
    (roots.c_plus * t).exp() * coeffs.h_plus + (roots.c_minus * t).exp() * coeffs.h_minus
}

/// `u'(t) = c_+ e^{t c_+} h_+ + c_- e^{t c_-} h_-`.
pub fn mode_wave_derivative(roots: &ModeRoots, coeffs: &ModeCoefficients, t: f64) -> Complex64 {
    roots.c_plus * (roots.c_plus * t).exp() * coeffs.h_plus
        + roots.c_minus * (roots.c_minus * t).exp() * coeffs.h_minus
}

/// Jordan-form solution at a double root: `e^{-bt} (f + (g + b f) t)`.
pub fn mode_wave_value_critical(m: &ModeSymbol, f: Complex64, g: Complex64, t: f64) -> Complex64 {
    (-m.b * t).exp() * (f + (g + m.b * f) * t)
}

/// Time derivative of the Jordan-form solution.
pub fn mode_wave_derivative_critical(
    m: &ModeSymbol,
    f: Complex64,
    g: Complex64,
    t: f64,
) -> Complex64 {
    let slope = g + m.b * f;
    (-m.b * t).exp() * (slope - m.b * (f + slope * t))
}

/// Decay exponent `-s^2 / (2b)` of the parabolic flow at this mode.
pub fn mode_parabolic_rate(m: &ModeSymbol) -> f64 {
    -(m.s * m.s) / (2.0 * m.b)
}

/// Gap between the slow wave decay and the parabolic decay of an overdamped
/// mode: `-Re c_+ - s^2/(2b) = s^4 / (2b (b + q0)^2) >= 0`.
///
/// Computed in product form; the literal difference cancels catastrophically
/// when `s << b`.
pub fn rate_gap(m: &ModeSymbol) -> Result<f64, SymbolError> {
    if m.b <= m.s {
        return Err(SymbolError::RequiresOverdamped { s: m.s, b: m.b });
    }
    let q0 = ((m.b - m.s) * (m.b + m.s)).sqrt();
    let s2 = m.s * m.s;
    Ok(s2 * s2 / (2.0 * m.b * (m.b + q0) * (m.b + q0)))
}

/// Remainder `r(w) = 1 - sqrt(1-w) - w/2 - w^2/8` of the second-order Taylor
/// expansion of `1 - sqrt(1-w)` at 0, for `w` in `[0, 1)`.
///
/// For small `w` the defining expression loses all significant digits, so the
/// series `sum_{k>=3} b_k w^k` with `b_{k+1} = b_k (2k-1)/(2k+2)` is used on
/// `w <= 1/2`.
pub fn taylor_remainder(w: f64) -> Result<f64, SymbolError> {
    if !(0.0..1.0).contains(&w) {
        return Err(SymbolError::OutOfDomain {
            value: w,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    if w <= 0.5 {
        // b_3 = 1/16, b_{k+1} = b_k (2k-1)/(2k+2)
        let mut coeff = 1.0 / 16.0;
        let mut power = w * w * w;
        let mut sum = coeff * power;
        let mut k = 3usize;
        loop {
            coeff *= (2 * k - 1) as f64 / (2 * k + 2) as f64;
            power *= w;
            let term = coeff * power;
            sum += term;
            k += 1;
            if term < sum * f64::EPSILON || k > 1000 {
                break;
            }
        }
        Ok(sum)
    } else {
        Ok(1.0 - (1.0 - w).sqrt() - 0.5 * w - 0.125 * w * w)
    }
}

/// Mode energy `s^2 |u|^2 + |u'|^2`.
pub fn mode_energy(m: &ModeSymbol, u: Complex64, u_dot: Complex64) -> f64 {
    m.s * m.s * u.norm_sqr() + u_dot.norm_sqr()
}

/// Residual of the characteristic polynomial at `c`, used by tests and the
/// hypothesis auditor.
pub fn root_residual(m: &ModeSymbol, c: Complex64) -> f64 {
    (c * c + 2.0 * m.b * c + Complex64::new(m.s * m.s, 0.0)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z: Complex64 = Complex64::new(0.0, 0.0);
    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    fn telegraph_mode() -> ModeSymbol {
        ModeSymbol::new(0.6, 1.0).unwrap()
    }

    #[test]
    fn overdamped_roots_match_hand_values() {
        let roots = characteristic_roots(&telegraph_mode(), DEFAULT_CRITICAL_TOL);
        assert_eq!(roots.regime, Regime::Overdamped);
        assert!((roots.c_plus.re + 0.2).abs() < 1e-15);
        assert!((roots.c_minus.re + 1.8).abs() < 1e-15);
        assert!((roots.q0 - 0.8).abs() < 1e-15);
        assert_eq!(roots.q, 0.0);
        for c in [roots.c_plus, roots.c_minus] {
            let m = telegraph_mode();
            assert!(root_residual(&m, c) <= 1e-12 * (m.s() * m.s() + m.b() * m.b()));
        }
    }

    #[test]
    fn critical_double_root_at_crossover() {
        for gamma in [0.3, 1.0, 42.0] {
            let m = ModeSymbol::new(gamma, gamma).unwrap();
            let roots = characteristic_roots(&m, DEFAULT_CRITICAL_TOL);
            assert_eq!(roots.regime, Regime::Critical);
            assert_eq!(roots.c_plus, Complex64::new(-gamma, 0.0));
            assert_eq!(roots.c_plus, roots.c_minus);
            assert_eq!((roots.q0, roots.q), (0.0, 0.0));
        }
    }

    #[test]
    fn underdamped_roots_conjugate_pair() {
        let m = ModeSymbol::new(1.3, 0.5).unwrap();
        let roots = characteristic_roots(&m, DEFAULT_CRITICAL_TOL);
        assert_eq!(roots.regime, Regime::Underdamped);
        assert!((roots.q - 1.2).abs() < 1e-15);
        assert!((roots.c_plus - Complex64::new(-0.5, 1.2)).norm() < 1e-15);
        assert_eq!(roots.c_minus, roots.c_plus.conj());
        assert!(root_residual(&m, roots.c_plus) <= 1e-12 * (m.s() * m.s() + m.b() * m.b()));
    }

    #[test]
    fn slow_root_stays_negative_for_tiny_s() {
        let m = ModeSymbol::new(1e-4, 1e4).unwrap();
        let roots = characteristic_roots(&m, DEFAULT_CRITICAL_TOL);
        assert!(roots.c_plus.re < 0.0);
        assert!(roots.c_minus.re < 0.0);
        // s^2/(2b) = 5e-13; the stable form keeps full precision.
        assert!((roots.c_plus.re + 5e-13).abs() < 1e-27);
    }

    #[test]
    fn coefficients_match_hand_solve() {
        let m = telegraph_mode();
        let coeffs = dalembert_coefficients(&m, ONE, Z).unwrap();
        assert!((coeffs.h_plus - Complex64::new(1.125, 0.0)).norm() < 1e-15);
        assert!((coeffs.h_minus - Complex64::new(-0.125, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn coefficients_zero_data() {
        let m = ModeSymbol::new(2.7, 0.4).unwrap();
        let coeffs = dalembert_coefficients(&m, Z, Z).unwrap();
        assert_eq!(coeffs.h_plus, Z);
        assert_eq!(coeffs.h_minus, Z);
    }

    #[test]
    fn coefficients_underdamped_match_hand_values() {
        // h_± = (1 ∓ i(0.5/1.2))/2
        let m = ModeSymbol::new(1.3, 0.5).unwrap();
        let coeffs = dalembert_coefficients(&m, ONE, Z).unwrap();
        let expected = Complex64::new(0.5, -0.5 * 0.5 / 1.2);
        assert!((coeffs.h_plus - expected).norm() < 1e-15);
        assert!((coeffs.h_minus - expected.conj()).norm() < 1e-15);
    }

    #[test]
    fn coefficients_reject_critical_mode() {
        let m = ModeSymbol::new(1.0, 1.0).unwrap();
        assert_eq!(
            dalembert_coefficients(&m, ONE, Z).unwrap_err(),
            SymbolError::CriticalMode { value: 1.0 }
        );
    }

    #[test]
    fn reconstruction_recovers_initial_data() {
        let m = ModeSymbol::new(1.3, 0.5).unwrap();
        let roots = characteristic_roots(&m, DEFAULT_CRITICAL_TOL);
        let (f, g) = (Complex64::new(0.7, -0.2), Complex64::new(-1.1, 0.35));
        let coeffs = coefficients_from_roots(&m, &roots, f, g).unwrap();
        assert!((coeffs.h_plus + coeffs.h_minus - f).norm() <= 1e-12 * f.norm());
        let g_back = roots.c_plus * coeffs.h_plus + roots.c_minus * coeffs.h_minus;
        assert!((g_back - g).norm() <= 1e-12 * g.norm());
    }

    #[test]
    fn wave_value_initial_condition_and_oracle_point() {
        let m = telegraph_mode();
        let roots = characteristic_roots(&m, DEFAULT_CRITICAL_TOL);
        let coeffs = coefficients_from_roots(&m, &roots, ONE, Z).unwrap();
        assert!((mode_wave_value(&roots, &coeffs, 0.0) - ONE).norm() < 1e-15);
        let expected = 1.125 * (-0.2f64).exp() - 0.125 * (-1.8f64).exp();
        assert!((mode_wave_value(&roots, &coeffs, 1.0).re - expected).abs() < 1e-15);
        // analytic derivative at 0 recovers g = 0
        assert!(mode_wave_derivative(&roots, &coeffs, 0.0).norm() < 1e-15);
    }

    #[test]
    fn critical_value_matches_jordan_form() {
        let m = ModeSymbol::new(1.0, 1.0).unwrap();
        assert_eq!(mode_wave_value_critical(&m, ONE, Z, 0.0), ONE);
        // g = -b f collapses to pure decay
        let g = Complex64::new(-1.0, 0.0);
        let v = mode_wave_value_critical(&m, ONE, g, 2.5);
        assert!((v.re - (-2.5f64).exp()).abs() < 1e-15);
        // (s=b=1, f=1, g=0, t=2) -> 3 e^{-2}
        let v = mode_wave_value_critical(&m, ONE, Z, 2.0);
        assert!((v.re - 3.0 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn critical_derivative_matches_difference_quotient() {
        let m = ModeSymbol::new(0.8, 0.8).unwrap();
        let (f, g) = (Complex64::new(0.4, 0.9), Complex64::new(-0.3, 0.1));
        let t = 1.7;
        let d = 1e-6;
        let numeric = (mode_wave_value_critical(&m, f, g, t + d)
            - mode_wave_value_critical(&m, f, g, t - d))
            / (2.0 * d);
        assert!((mode_wave_derivative_critical(&m, f, g, t) - numeric).norm() < 1e-9);
    }

    #[test]
    fn parabolic_rate_values() {
        assert!((mode_parabolic_rate(&telegraph_mode()) + 0.18).abs() < 1e-15);
        let m = ModeSymbol::new(2.0, 2.0).unwrap();
        assert!((mode_parabolic_rate(&m) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rate_gap_matches_hand_value_and_taylor_form() {
        let m = telegraph_mode();
        let gap = rate_gap(&m).unwrap();
        assert!((gap - 0.02).abs() < 1e-15);
        let w = (m.s() / m.b()).powi(2);
        let via_taylor = m.b() * (w * w / 8.0 + taylor_remainder(w).unwrap());
        assert!((gap - via_taylor).abs() <= 1e-12 * gap);
    }

    #[test]
    fn rate_gap_small_s_limit() {
        // gap / s^4 -> 1/(8 b^3)
        let m = ModeSymbol::new(1e-3, 1.0).unwrap();
        let gap = rate_gap(&m).unwrap();
        let limit = m.s().powi(4) / 8.0;
        assert!((gap / limit - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rate_gap_rejects_underdamped() {
        let m = ModeSymbol::new(2.0, 1.0).unwrap();
        assert!(matches!(
            rate_gap(&m),
            Err(SymbolError::RequiresOverdamped { .. })
        ));
    }

    #[test]
    fn taylor_remainder_reference_points() {
        assert_eq!(taylor_remainder(0.0).unwrap(), 0.0);
        let direct_half = 1.0 - 0.5f64.sqrt() - 0.25 - 0.03125;
        assert!((taylor_remainder(0.5).unwrap() - direct_half).abs() < 1e-14);
        let direct_high = 1.0 - 0.01f64.sqrt() - 0.495 - 0.99f64.powi(2) / 8.0;
        assert!((taylor_remainder(0.99).unwrap() - direct_high).abs() < 1e-14);
        assert!(taylor_remainder(0.99).unwrap() > 0.28);
    }

    #[test]
    fn taylor_remainder_domain_errors() {
        assert!(taylor_remainder(-0.1).is_err());
        assert!(taylor_remainder(1.0).is_err());
    }

    #[test]
    fn taylor_remainder_continuous_across_branch_switch() {
        let below = taylor_remainder(0.5 - 1e-12).unwrap();
        let above = taylor_remainder(0.5 + 1e-12).unwrap();
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn energy_zero_state_and_dissipation() {
        let m = telegraph_mode();
        assert_eq!(mode_energy(&m, Z, Z), 0.0);
        let roots = characteristic_roots(&m, DEFAULT_CRITICAL_TOL);
        let coeffs = coefficients_from_roots(&m, &roots, ONE, Complex64::new(0.3, -0.4)).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..100 {
            let t = 0.1 * k as f64;
            let e = mode_energy(
                &m,
                mode_wave_value(&roots, &coeffs, t),
                mode_wave_derivative(&roots, &coeffs, t),
            );
            assert!(e <= prev * (1.0 + 1e-12));
            prev = e;
        }
    }

    #[test]
    fn undamped_mode_conserves_energy() {
        let m = ModeSymbol::undamped(1.7).unwrap();
        let roots = characteristic_roots(&m, DEFAULT_CRITICAL_TOL);
        let coeffs =
            coefficients_from_roots(&m, &roots, Complex64::new(0.5, 0.5), ONE).unwrap();
        let e0 = mode_energy(
            &m,
            mode_wave_value(&roots, &coeffs, 0.0),
            mode_wave_derivative(&roots, &coeffs, 0.0),
        );
        for k in 1..=100 {
            let t = 0.1 * k as f64;
            let e = mode_energy(
                &m,
                mode_wave_value(&roots, &coeffs, t),
                mode_wave_derivative(&roots, &coeffs, t),
            );
            assert!((e - e0).abs() <= 1e-10 * e0);
        }
    }

    #[test]
    fn factorized_decay_identity() {
        // e^{t c_+} = e^{-t s^2/(2b)} e^{-t gap} for overdamped modes
        let m = ModeSymbol::new(0.9, 1.7).unwrap();
        let gap = rate_gap(&m).unwrap();
        let roots = characteristic_roots(&m, DEFAULT_CRITICAL_TOL);
        for t in [0.3, 1.0, 4.0, 9.5] {
            let lhs = (roots.c_plus.re * t).exp();
            let rhs = (mode_parabolic_rate(&m) * t).exp() * (-gap * t).exp();
            assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs());
        }
    }
}
