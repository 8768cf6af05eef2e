//! Fréchet–Hoeffding envelopes of the cumulative fractional inaccuracy.
//!
//! Replacing `C_X` by `W(u,v) = max(u+v−1, 0)` or `M(u,v) = min(u,v)` in the
//! integrand brackets every bivariate measure value. For an independent
//! reference with PRHR margins the reference argument is `u^γ v^δ`, and the
//! closed forms of [`ccfi_frechet_bounds`] follow from splitting the kernel
//! additively:
//!
//! ```text
//! (−log(u^γ v^δ))^{1/η}  →  γ(−log u)^{1/η} + δ(−log v)^{1/η}
//! ```
//!
//! That split is exact only for `η = 1`. [`split_kernel_envelope`] integrates
//! the split kernel and reproduces the closed forms; [`prhr_envelope`]
//! integrates the true kernel.

use crate::error::{Error, Result};
use crate::integrate::{
    integrate_region, IntegralResult, IntegrationConfig, KernelKind, SquareRegion,
};
use crate::measures::{with_mapped, MeasureJob};
use crate::special::{eta_factorial, gamma, gauss_2f1, FractionalOrder};

/// Closed-form envelope values, labelled by the envelope copula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetBounds {
    /// Integral against `W(u,v) = max(u+v−1, 0)`.
    pub w_side: f64,
    /// Integral against `M(u,v) = min(u,v)`.
    pub m_side: f64,
}

fn check_exponents(gamma_: f64, delta: f64) -> Result<()> {
    for (name, x) in [("gamma", gamma_), ("delta", delta)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Parameter(format!("{name} must be positive and finite, got {x}")));
        }
    }
    Ok(())
}

pub fn ccfi_frechet_bounds(eta: FractionalOrder, gamma_: f64, delta: f64) -> Result<FrechetBounds> {
    check_exponents(gamma_, delta)?;
    let a = eta.exponent();
    let pre = eta_factorial(eta).powf(a);
    let g1a = gamma(1.0 + a)?;

    let w_side = pre * g1a / (2.0 * 3f64.powf(1.0 + a)) * (gamma_ + delta);

    let t1 = gamma_ * 3f64.powf(-a) * gamma(a)? / (6.0 * eta.value());
    let t2 = delta * gamma(2.0 + a)? * gauss_2f1(2.0 + a, -0.5)? / (4.0 * 2f64.powf(a));
    let t3 = gamma_ * g1a * (2f64.powf(-1.0 - a) - 3f64.powf(-1.0 - a));
    let t4 = delta * g1a / (2.0 * 3f64.powf(1.0 + a));
    let m_side = pre * (t1 + t2 + t3 + t4);

    Ok(FrechetBounds { w_side, m_side })
}

/// Quadrature of an integrand against both envelope copulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeIntegrals {
    pub w: IntegralResult,
    pub m: IntegralResult,
}

/// `∫∫ W·h` and `∫∫ M·h` for a pointwise integrand factor `h(u, v)`.
///
/// Each envelope is integrated on the triangles where it is smooth.
pub fn envelope_integrals<H>(h: H, cfg: &IntegrationConfig) -> Result<EnvelopeIntegrals>
where
    H: Fn(f64, f64) -> f64 + Sync,
{
    let w = integrate_region(|u, v| (u + v - 1.0) * h(u, v), SquareRegion::AboveAntiDiagonal, cfg)?;
    let below = integrate_region(|u, v| v * h(u, v), SquareRegion::BelowDiagonal, cfg)?;
    let above = integrate_region(|u, v| u * h(u, v), SquareRegion::AboveDiagonal, cfg)?;
    let m = IntegralResult {
        value: below.value + above.value,
        error_estimate: below.error_estimate + above.error_estimate,
        evaluations: below.evaluations + above.evaluations,
        clamped: 0,
    };
    Ok(EnvelopeIntegrals { w, m })
}

/// Envelopes of a bivariate joint job: the job's weight is replaced by `W`
/// and `M` while the reference argument and kernel are kept.
pub fn job_envelope(job: &MeasureJob) -> Result<EnvelopeIntegrals> {
    if job.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            operation: "Fréchet envelope",
            dim: job.dim(),
        });
    }
    let p = job.prepare()?;
    let eps = job.integration().clamp_epsilon;
    let h = |u: f64, v: f64| {
        let arg = with_mapped(&[u, v], &p.compositions, |m| p.kernel_copula.value(m));
        p.kernel.eval(arg.max(eps))
    };
    envelope_integrals(h, job.integration())
}

/// Envelopes for an independent reference with PRHR exponents: the true
/// kernel evaluated at `u^γ v^δ`.
pub fn prhr_envelope(
    eta: FractionalOrder,
    gamma_: f64,
    delta: f64,
    cfg: &IntegrationConfig,
) -> Result<EnvelopeIntegrals> {
    check_exponents(gamma_, delta)?;
    let k = KernelKind::fractional(eta);
    let eps = cfg.clamp_epsilon;
    envelope_integrals(|u, v| k.eval((u.powf(gamma_) * v.powf(delta)).max(eps)), cfg)
}

/// Envelopes of the additively split kernel
/// `(η!)^{1/η}(γ(−log u)^{1/η} + δ(−log v)^{1/η})`; these equal the closed
/// forms.
pub fn split_kernel_envelope(
    eta: FractionalOrder,
    gamma_: f64,
    delta: f64,
    cfg: &IntegrationConfig,
) -> Result<EnvelopeIntegrals> {
    check_exponents(gamma_, delta)?;
    let a = eta.exponent();
    let pre = eta_factorial(eta).powf(a);
    envelope_integrals(
        |u, v| pre * (gamma_ * (-u.ln()).powf(a) + delta * (-v.ln()).powf(a)),
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn eta(x: f64) -> FractionalOrder {
        FractionalOrder::new(x).unwrap()
    }

    #[test]
    fn w_side_anchor() {
        // (π/4)·Γ(3)/(2·27)·5
        let b = ccfi_frechet_bounds(eta(0.5), 2.0, 3.0).unwrap();
        assert!((b.w_side - PI / 4.0 * 2.0 / 54.0 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn m_side_anchor() {
        // Γ(2)=1, Γ(3)=2, Γ(4)=6, ₂F₁(1,4;2;−½) = 9.5/20.25 at η = ½
        let f = 9.5 / 20.25;
        let expected = PI / 4.0
            * (2.0 * 1.0 / 9.0 / 6.0 * 2.0
                + 3.0 * 6.0 * f / 16.0
                + 2.0 * 2.0 * (1.0 / 8.0 - 1.0 / 27.0)
                + 3.0 * 2.0 / 54.0);
        let b = ccfi_frechet_bounds(eta(0.5), 2.0, 3.0).unwrap();
        assert!((b.m_side - expected).abs() < 1e-12, "{} vs {expected}", b.m_side);
    }

    #[test]
    fn closed_forms_match_split_kernel_quadrature() {
        let cfg = IntegrationConfig::default();
        for e in [0.3, 0.5, 0.7, 0.9] {
            for g in [0.5, 2.0, 3.0] {
                for d in [0.5, 2.0, 3.0] {
                    let b = ccfi_frechet_bounds(eta(e), g, d).unwrap();
                    let q = split_kernel_envelope(eta(e), g, d, &cfg).unwrap();
                    assert!((b.w_side - q.w.value).abs() < 1e-8, "W η={e} γ={g} δ={d}");
                    assert!((b.m_side - q.m.value).abs() < 1e-8, "M η={e} γ={g} δ={d}");
                    assert!(b.w_side <= b.m_side);
                }
            }
        }
    }

    #[test]
    fn true_kernel_envelope_is_ordered() {
        let cfg = IntegrationConfig::default();
        for e in [0.3, 0.5, 0.7, 0.9] {
            let q = prhr_envelope(eta(e), 2.0, 3.0, &cfg).unwrap();
            assert!(q.w.value < q.m.value);
        }
    }

    #[test]
    fn split_equals_true_kernel_at_eta_one_limit() {
        // exponent 1/η → 1: the split is exact and the two envelopes coincide
        let cfg = IntegrationConfig::default();
        let e = eta(0.999_999);
        let a = prhr_envelope(e, 2.0, 3.0, &cfg).unwrap();
        let b = split_kernel_envelope(e, 2.0, 3.0, &cfg).unwrap();
        assert!((a.w.value - b.w.value).abs() < 1e-5);
        assert!((a.m.value - b.m.value).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(ccfi_frechet_bounds(eta(0.5), 0.0, 1.0).is_err());
        assert!(ccfi_frechet_bounds(eta(0.5), 1.0, f64::NAN).is_err());
    }
}
