//! Gamma, the `₂F₁(1, b; 2; z)` series and the fractional-log kernel.
//!
//! The inverse Mittag-Leffler logarithm `Ln_η` has no closed form. Every
//! measure in this crate uses the approximation `Ln_η x ≈ Γ(η + 1) · log x`,
//! which turns the kernel `{−Ln_η x}^{1/η}` into
//! `Γ(η + 1)^{1/η} · (−log x)^{1/η}`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Fractional exponent `η`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(eta: f64) -> Result<Self> {
        if eta > 0.0 && eta < 1.0 {
            Ok(Self(eta))
        } else {
            Err(Error::Parameter(format!(
                "fractional order must lie in (0, 1), got {eta}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 / η`, the outer exponent of the kernel.
    #[inline]
    pub fn exponent(self) -> f64 {
        1.0 / self.0
    }
}

impl fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(eta: f64) -> Result<Self> {
        Self::new(eta)
    }
}

// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` for `x > 0`.
///
/// Arguments below `1/2` are shifted up with `Γ(x) = Γ(x + 1) / x` so the
/// Lanczos sum is only ever evaluated on `[1/2, ∞)`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(gamma_positive(x))
}

pub(crate) fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        return gamma_positive(x + 1.0) / x;
    }
    let z = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // split the power so large arguments do not overflow before exp(-t) is applied
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * sum
}

/// `η! = Γ(η + 1)`.
pub fn eta_factorial(eta: FractionalOrder) -> f64 {
    gamma_positive(eta.value() + 1.0)
}

/// `Ln_η x ≈ Γ(η + 1) · log x` on `(0, 1]`.
pub fn inverse_mlf_log(x: f64, eta: FractionalOrder) -> Result<f64> {
    check_unit(x)?;
    Ok(eta_factorial(eta) * x.ln())
}

/// `{−Ln_η x}^{1/η} = Γ(η + 1)^{1/η} · (−log x)^{1/η}`; exactly zero at `x = 1`.
pub fn fractional_log_kernel(x: f64, eta: FractionalOrder) -> Result<f64> {
    check_unit(x)?;
    Ok(FractionalKernel::new(eta).eval(x))
}

fn check_unit(x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "fractional logarithm requires 0 < x <= 1, got {x}"
        )))
    }
}

/// Precomputed kernel for a fixed `η`, used in the hot loops.
#[derive(Debug, Clone, Copy)]
pub struct FractionalKernel {
    prefactor: f64,
    exponent: f64,
}

impl FractionalKernel {
    pub fn new(eta: FractionalOrder) -> Self {
        let exponent = eta.exponent();
        Self {
            prefactor: eta_factorial(eta).powf(exponent),
            exponent,
        }
    }

    /// `Γ(η + 1)^{1/η}`.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// Kernel value for `x ∈ (0, 1]`; the caller guarantees the range.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return 0.0;
        }
        self.prefactor * (-x.ln()).powf(self.exponent)
    }
}

const F21_TOLERANCE: f64 = 1e-15;
const F21_MAX_TERMS: usize = 10_000;

/// `₂F₁(1, b; 2; z)` by direct summation for `|z| < 1`.
///
/// Terms obey `t_{n+1} = t_n · z · (b + n) / (n + 2)`; summation stops once
/// `|t_n| < 1e-15` or after 10 000 terms.
pub fn gauss_2f1(b: f64, z: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("2F1 requires b > 0, got {b}")));
    }
    if !(z.abs() < 1.0) {
        return Err(Error::Domain(format!("2F1 series requires |z| < 1, got {z}")));
    }
    // Kahan-compensated, since alternating series at z < 0 cancel
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut term = 1.0_f64;
    for n in 0..F21_MAX_TERMS {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let nf = n as f64;
        term *= z * (b + nf) / (nf + 2.0);
        if term.abs() < F21_TOLERANCE {
            break;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Stirling series after shifting the argument above 30: an evaluation
    // path independent of the Lanczos sum.
    fn gamma_oracle(x: f64) -> f64 {
        let mut shift = 1.0;
        let mut y = x;
        while y < 30.0 {
            shift *= y;
            y += 1.0;
        }
        let inv = 1.0 / y;
        let inv2 = inv * inv;
        let series = inv
            * (1.0 / 12.0
                - inv2
                    * (1.0 / 360.0
                        - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
        let ln_gamma = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series;
        ln_gamma.exp() / shift
    }

    fn eta(x: f64) -> FractionalOrder {
        FractionalOrder::new(x).unwrap()
    }

    #[test]
    fn gamma_anchor_values() {
        assert_relative_eq!(gamma(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5).unwrap(), 0.886_226_925_452_758, max_relative = 1e-13);
        assert_relative_eq!(gamma(5.0).unwrap(), 24.0, max_relative = 1e-13);
    }

    #[test]
    fn gamma_matches_stirling_oracle() {
        let mut x = 0.05;
        while x <= 50.0 {
            let rel = (gamma(x).unwrap() - gamma_oracle(x)).abs() / gamma_oracle(x);
            assert!(rel < 1e-12, "x={x} rel={rel}");
            x += 0.0937;
        }
    }

    #[test]
    fn gamma_recurrence() {
        let mut x = 0.1;
        while x <= 10.0 + 1e-9 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-11);
            x += 0.15;
        }
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(gamma(f64::NAN).is_err());
    }

    #[test]
    fn fractional_order_bounds() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.0).is_err());
        assert!(FractionalOrder::new(-0.2).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(0.999).is_ok());
    }

    #[test]
    fn eta_factorial_values() {
        assert_relative_eq!(eta_factorial(eta(0.5)), 0.886_226_925_452_758, max_relative = 1e-13);
        assert!((eta_factorial(eta(0.999)) - 0.9994).abs() < 1e-3);
        assert_relative_eq!(eta_factorial(eta(0.5)).powf(2.0), PI / 4.0, max_relative = 1e-13);
    }

    #[test]
    fn inverse_log_values() {
        assert_eq!(inverse_mlf_log(1.0, eta(0.5)).unwrap(), 0.0);
        assert_relative_eq!(
            inverse_mlf_log((-1.0f64).exp(), eta(0.5)).unwrap(),
            -0.886_226_925_452_758,
            max_relative = 1e-13
        );
        let expected = gamma_oracle(1.9) * 0.25f64.ln();
        assert_relative_eq!(inverse_mlf_log(0.25, eta(0.9)).unwrap(), expected, max_relative = 1e-12);
        assert!((expected - -1.33329).abs() < 1e-4);
        assert!(inverse_mlf_log(0.0, eta(0.5)).is_err());
        assert!(inverse_mlf_log(1.5, eta(0.5)).is_err());
    }

    #[test]
    fn kernel_values() {
        assert_eq!(fractional_log_kernel(1.0, eta(0.7)).unwrap(), 0.0);
        assert_relative_eq!(
            fractional_log_kernel((-1.0f64).exp(), eta(0.5)).unwrap(),
            PI / 4.0,
            max_relative = 1e-13
        );
        let ln2 = 2.0f64.ln();
        assert_relative_eq!(
            fractional_log_kernel(0.5, eta(0.5)).unwrap(),
            PI / 4.0 * ln2 * ln2,
            max_relative = 1e-13
        );
        assert!(fractional_log_kernel(0.0, eta(0.5)).is_err());
    }

    fn f21_closed_form(b: f64, z: f64) -> f64 {
        // 2F1(1, b; 2; z) = ((1 - z)^(1 - b) - 1) / ((b - 1) z)
        ((1.0 - z).powf(1.0 - b) - 1.0) / ((b - 1.0) * z)
    }

    #[test]
    fn f21_anchor_values() {
        assert_eq!(gauss_2f1(4.0, 0.0).unwrap(), 1.0);
        let z: f64 = -0.5;
        let rational = (6.0 - 6.0 * z + 2.0 * z * z) / (6.0 * (1.0 - z).powi(3));
        assert!((gauss_2f1(4.0, z).unwrap() - rational).abs() < 1e-14);
        assert!((gauss_2f1(4.0, z).unwrap() - 0.469_135_802_5).abs() < 1e-10);
    }

    #[test]
    fn f21_matches_partial_sums_oracle() {
        for b in [2.0, 3.0, 4.0, 6.0] {
            // brute-force partial sums in pairs, accumulated smallest-first
            let mut terms = Vec::new();
            let mut t = 1.0f64;
            let mut n = 0.0;
            while t.abs() > 1e-18 {
                terms.push(t);
                t *= -0.5 * (b + n) / (n + 2.0);
                n += 1.0;
            }
            let oracle: f64 = terms.iter().rev().sum();
            let value = gauss_2f1(b, -0.5).unwrap();
            assert!((value - oracle).abs() < 1e-13, "b={b}");
            assert!((value - f21_closed_form(b, -0.5)).abs() < 1e-13, "b={b}");
        }
    }

    #[test]
    fn f21_domain() {
        assert!(gauss_2f1(2.0, 1.0).is_err());
        assert!(gauss_2f1(2.0, -1.0).is_err());
        assert!(gauss_2f1(0.0, 0.2).is_err());
    }

    proptest! {
        #[test]
        fn additive_rule(u in 1e-12f64..=1.0, v in 1e-12f64..=1.0, e in 0.01f64..0.99) {
            let e = eta(e);
            let lhs = inverse_mlf_log(u * v, e).unwrap();
            let rhs = inverse_mlf_log(u, e).unwrap() + inverse_mlf_log(v, e).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn kernel_strictly_decreasing(x in 1e-6f64..0.999, dx in 1e-4f64..1e-2, e in 0.05f64..0.95) {
            let k = FractionalKernel::new(eta(e));
            let y = (x + dx).min(1.0);
            prop_assert!(k.eval(x) > k.eval(y));
        }

        #[test]
        fn f21_series_matches_closed_form(b in 0.5f64..8.0, z in -0.9f64..0.9) {
            prop_assume!((b - 1.0).abs() > 1e-3 && z.abs() > 1e-3);
            let exact = f21_closed_form(b, z);
            let value = gauss_2f1(b, z).unwrap();
            prop_assert!((value - exact).abs() <= 1e-10 * exact.abs().max(1.0));
        }
    }
}
