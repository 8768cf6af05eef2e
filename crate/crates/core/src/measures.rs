//! Copula-based fractional inaccuracy measures and their entropy forms.
//!
//! Every joint measure has the shape
//!
//! ```text
//! ∫_{(0,1)ⁿ} W(v) · K( A(c₁(v₁), …, cₙ(vₙ)) ) dv
//! ```
//!
//! where `W` is a copula-like weight built from the truth model, `A` the
//! matching structure of the reference model, `cᵢ` the margin compositions
//! and `K` the kernel (fractional, inverse Mittag-Leffler log, or `−log`).

use std::fmt;
use std::str::FromStr;

use crate::copula::{Copula, Family};
use crate::error::{Error, Result};
use crate::integrate::{
    integrate_region, integrate_unit_cube, GuardedIntegrand, IntegralResult, IntegrationConfig,
    KernelKind, Method, SquareRegion,
};
use crate::margins::{Composition, Margin};
use crate::model::JointModel;
use crate::special::{eta_factorial, FractionalKernel, FractionalOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Ccfi,
    CcfiTilde,
    Cci,
    Ccfe,
    Scfi,
    Scfe,
    Cocfi,
    Dcfi,
    Fcri,
    Fcpi,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 10] = [
        MeasureKind::Ccfi,
        MeasureKind::CcfiTilde,
        MeasureKind::Cci,
        MeasureKind::Ccfe,
        MeasureKind::Scfi,
        MeasureKind::Scfe,
        MeasureKind::Cocfi,
        MeasureKind::Dcfi,
        MeasureKind::Fcri,
        MeasureKind::Fcpi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Ccfi => "ccfi",
            MeasureKind::CcfiTilde => "ccfi_tilde",
            MeasureKind::Cci => "cci",
            MeasureKind::Ccfe => "ccfe",
            MeasureKind::Scfi => "scfi",
            MeasureKind::Scfe => "scfe",
            MeasureKind::Cocfi => "cocfi",
            MeasureKind::Dcfi => "dcfi",
            MeasureKind::Fcri => "fcri",
            MeasureKind::Fcpi => "fcpi",
        }
    }

    pub fn is_univariate(self) -> bool {
        matches!(self, MeasureKind::Fcri | MeasureKind::Fcpi)
    }

    /// Entropy kinds use the truth model only.
    pub fn is_entropy(self) -> bool {
        matches!(self, MeasureKind::Ccfe | MeasureKind::Scfe)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| {
                let names: Vec<_> = MeasureKind::ALL.iter().map(|k| k.name()).collect();
                Error::Parameter(format!(
                    "unknown measure kind '{s}', expected one of: {}",
                    names.join(", ")
                ))
            })
    }
}

/// A joint (n ≥ 2) measure evaluation request.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureJob {
    kind: MeasureKind,
    truth: JointModel,
    reference: JointModel,
    eta: FractionalOrder,
    integration: IntegrationConfig,
}

impl MeasureJob {
    pub fn new(
        kind: MeasureKind,
        truth: JointModel,
        reference: JointModel,
        eta: FractionalOrder,
        integration: IntegrationConfig,
    ) -> Result<Self> {
        let job = Self {
            kind,
            truth,
            reference,
            eta,
            integration,
        };
        job.prepare()?;
        Ok(job)
    }

    /// Entropy job (`ccfe` or `scfe`) on a single model.
    pub fn entropy(
        kind: MeasureKind,
        model: JointModel,
        eta: FractionalOrder,
        integration: IntegrationConfig,
    ) -> Result<Self> {
        if !kind.is_entropy() {
            return Err(Error::Parameter(format!("{kind} is not an entropy measure")));
        }
        Self::new(kind, model.clone(), model, eta, integration)
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn truth(&self) -> &JointModel {
        &self.truth
    }

    pub fn reference(&self) -> &JointModel {
        &self.reference
    }

    pub fn eta(&self) -> FractionalOrder {
        self.eta
    }

    pub fn integration(&self) -> &IntegrationConfig {
        &self.integration
    }

    pub fn dim(&self) -> usize {
        self.truth.dim()
    }

    /// Same job with a different kind, revalidated.
    pub fn with_kind(&self, kind: MeasureKind) -> Result<Self> {
        Self::new(kind, self.truth.clone(), self.reference.clone(), self.eta, self.integration)
    }

    pub fn with_eta(&self, eta: FractionalOrder) -> Self {
        Self { eta, ..self.clone() }
    }

    pub fn with_integration(&self, integration: IntegrationConfig) -> Result<Self> {
        integration.validate()?;
        Ok(Self {
            integration,
            ..self.clone()
        })
    }

    pub fn evaluate(&self) -> Result<IntegralResult> {
        let p = self.prepare()?;
        let dim = self.dim();
        let comps = &p.compositions;
        let kc = &p.kernel_copula;
        let weight = &p.weight;
        let g = GuardedIntegrand::new(
            |v: &[f64]| weight.value(v),
            |v: &[f64]| with_mapped(v, comps, |m| kc.value(m)),
            p.kernel,
            self.integration.clamp_epsilon,
        );
        let kink = kink_line(weight).or_else(|| {
            if self.truth.margins() == self.reference.margins() {
                kink_line(kc)
            } else {
                None
            }
        });
        let Some(regions) = kink else {
            return g.integrate(dim, &self.integration);
        };
        let f = |u: f64, v: f64| g.eval(&[u, v]);
        let mut r = integrate_region(f, regions[0], &self.integration)?
            + integrate_region(f, regions[1], &self.integration)?;
        r.clamped = g.clamped();
        Ok(r)
    }

    /// Weight, reference structure and kernel argument map of the integrand.
    pub(crate) fn prepare(&self) -> Result<Prepared> {
        let kind = self.kind;
        if kind.is_univariate() {
            return Err(Error::Parameter(format!(
                "{kind} is a univariate measure; use UnivariateJob"
            )));
        }
        self.integration.validate()?;
        let dim = self.truth.dim();
        if self.reference.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "truth has dimension {dim} but reference has dimension {}",
                self.reference.dim()
            )));
        }
        if dim < 2 {
            return Err(Error::DimensionMismatch(format!(
                "joint measures need dimension at least 2, got {dim}"
            )));
        }
        if kind.is_entropy() && self.reference != self.truth {
            return Err(Error::Parameter(format!(
                "{kind} is an entropy measure; the reference model must equal the truth model"
            )));
        }
        let (weight, kernel_copula, survival) = match kind {
            MeasureKind::Ccfi | MeasureKind::CcfiTilde | MeasureKind::Cci | MeasureKind::Ccfe => {
                (self.truth.structure(), self.reference.structure(), false)
            }
            MeasureKind::Scfi | MeasureKind::Scfe => (
                self.truth.survival_copula()?,
                self.reference.survival_copula()?,
                true,
            ),
            MeasureKind::Cocfi => (self.truth.cocopula()?, self.reference.cocopula()?, false),
            MeasureKind::Dcfi => (
                self.truth.dual_copula()?,
                self.reference.dual_copula()?,
                false,
            ),
            MeasureKind::Fcri | MeasureKind::Fcpi => unreachable!(),
        };
        let compositions = self
            .reference
            .margins()
            .iter()
            .zip(self.truth.margins())
            .map(|(g, f)| {
                if survival {
                    Composition::survival(g, f)
                } else {
                    Composition::cdf(g, f)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel = match kind {
            MeasureKind::CcfiTilde => KernelKind::InverseMlf(eta_factorial(self.eta)),
            MeasureKind::Cci => KernelKind::Log,
            _ => KernelKind::fractional(self.eta),
        };
        Ok(Prepared {
            weight,
            kernel_copula,
            compositions,
            kernel,
        })
    }
}

pub(crate) struct Prepared {
    pub weight: Copula,
    pub kernel_copula: Copula,
    pub compositions: Vec<Composition>,
    pub kernel: KernelKind,
}

/// Halves of the unit square separated by the line where a Fréchet-bound
/// weight has its kink; integrating them separately keeps the rule's
/// polynomial accuracy. Transforms of `M` and `W` keep the same line.
fn kink_line(c: &Copula) -> Option<[SquareRegion; 2]> {
    match c {
        Copula::Spec(s) if s.dim() == 2 => match s.family() {
            Family::Comonotone => Some([SquareRegion::BelowDiagonal, SquareRegion::AboveDiagonal]),
            Family::Countermonotone => Some([
                SquareRegion::BelowAntiDiagonal,
                SquareRegion::AboveAntiDiagonal,
            ]),
            _ => None,
        },
        Copula::Spec(_) => None,
        Copula::Derived(d) => kink_line(d.base()),
    }
}

/// Applies the compositions coordinate-wise without heap allocation in low
/// dimension.
#[inline]
pub(crate) fn with_mapped<R>(v: &[f64], comps: &[Composition], f: impl FnOnce(&[f64]) -> R) -> R {
    const STACK: usize = 8;
    if v.len() <= STACK {
        let mut buf = [0.0; STACK];
        for (b, (c, &x)) in buf.iter_mut().zip(comps.iter().zip(v)) {
            *b = c.eval(x);
        }
        f(&buf[..v.len()])
    } else {
        let mapped: Vec<f64> = comps.iter().zip(v).map(|(c, &x)| c.eval(x)).collect();
        f(&mapped)
    }
}

fn expect_kind(job: &MeasureJob, kinds: &[MeasureKind]) -> Result<()> {
    if kinds.contains(&job.kind) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "job kind {} does not match the requested measure {}",
            job.kind, kinds[0]
        )))
    }
}

/// Cumulative copula fractional inaccuracy.
pub fn ccfi(job: &MeasureJob) -> Result<IntegralResult> {
    expect_kind(job, &[MeasureKind::Ccfi])?;
    job.evaluate()
}

/// Variant without the outer `1/η` power: `Γ(η+1) · cci`.
pub fn ccfi_tilde(job: &MeasureJob) -> Result<IntegralResult> {
    expect_kind(job, &[MeasureKind::CcfiTilde])?;
    job.evaluate()
}

/// Cumulative copula inaccuracy (`−log` kernel).
pub fn cci(job: &MeasureJob) -> Result<IntegralResult> {
    expect_kind(job, &[MeasureKind::Cci])?;
    job.evaluate()
}

/// Cumulative copula fractional entropy.
pub fn ccfe(job: &MeasureJob) -> Result<IntegralResult> {
    expect_kind(job, &[MeasureKind::Ccfe])?;
    job.evaluate()
}

/// Survival copula fractional inaccuracy.
pub fn scfi(job: &MeasureJob) -> Result<IntegralResult> {
    expect_kind(job, &[MeasureKind::Scfi])?;
    job.evaluate()
}

/// Survival copula fractional entropy.
pub fn scfe(job: &MeasureJob) -> Result<IntegralResult> {
    expect_kind(job, &[MeasureKind::Scfe])?;
    job.evaluate()
}

/// Co-copula fractional inaccuracy (bivariate).
pub fn cocfi(job: &MeasureJob) -> Result<IntegralResult> {
    expect_kind(job, &[MeasureKind::Cocfi])?;
    job.evaluate()
}

/// Dual-copula fractional inaccuracy (bivariate).
pub fn dcfi(job: &MeasureJob) -> Result<IntegralResult> {
    expect_kind(job, &[MeasureKind::Dcfi])?;
    job.evaluate()
}

/// Univariate cumulative residual (`fcri`) or past (`fcpi`) fractional
/// inaccuracy between a truth margin `F` and a reference margin `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateJob {
    kind: MeasureKind,
    truth: Margin,
    reference: Margin,
    eta: FractionalOrder,
    integration: IntegrationConfig,
}

/// Survival level at which unbounded domains are truncated.
const TAIL_LEVEL: f64 = 1e-18;
/// Equal panels per smooth piece of the truncated route.
const PANELS: usize = 32;

/// Panel ends on the probability scale: geometric towards 0, where the
/// substituted integrand carries its log or power singularity, and halving
/// towards 1.
fn probability_breaks(top: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend((1..=15).rev().map(|k| top * 2f64.powi(-4 * k)));
    b.extend([0.25, 0.5, 0.75, 0.875, 0.9375, 1.0].map(|x| top * x));
    b
}

/// `∫ f` over consecutive pieces `[b₀, b₁], [b₁, b₂], …`.
fn integrate_pieces<F>(f: F, breaks: &[f64], cfg: &IntegrationConfig) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    let mut total = IntegralResult::ZERO;
    for w in breaks.windows(2) {
        let (a, h) = (w[0], w[1] - w[0]);
        if h > 0.0 {
            total = total + integrate_unit_cube(|t: &[f64]| h * f(a + h * t[0]), 1, cfg)?;
        }
    }
    Ok(total)
}

fn equal_pieces(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    let mut v: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    v.push(b);
    v
}

impl UnivariateJob {
    pub fn new(
        kind: MeasureKind,
        truth: Margin,
        reference: Margin,
        eta: FractionalOrder,
        integration: IntegrationConfig,
    ) -> Result<Self> {
        if !kind.is_univariate() {
            return Err(Error::Parameter(format!(
                "{kind} is a joint measure; use MeasureJob"
            )));
        }
        integration.validate()?;
        let job = Self {
            kind,
            truth,
            reference,
            eta,
            integration,
        };
        job.check_finite()?;
        Ok(job)
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn truth(&self) -> &Margin {
        &self.truth
    }

    pub fn reference(&self) -> &Margin {
        &self.reference
    }

    pub fn eta(&self) -> FractionalOrder {
        self.eta
    }

    pub fn integration(&self) -> &IntegrationConfig {
        &self.integration
    }

    fn residual(&self) -> bool {
        self.kind == MeasureKind::Fcri
    }

    /// The kernel blows up where the reference puts no mass but the truth
    /// does; such integrals diverge.
    fn check_finite(&self) -> Result<()> {
        let (tlo, thi) = self.truth.support();
        let (rlo, rhi) = self.reference.support();
        if self.residual() && rhi < thi {
            return Err(Error::Divergent(format!(
                "reference survival function vanishes at {rhi} inside the truth support [{tlo}, {thi}]"
            )));
        }
        if !self.residual() && rlo > tlo {
            return Err(Error::Divergent(format!(
                "reference CDF vanishes at {rlo} inside the truth support [{tlo}, {thi}]"
            )));
        }
        Ok(())
    }

    /// `{−Ln_η Ḡ(x)}^{1/η}` (fcri) or `{−Ln_η G(x)}^{1/η}` (fcpi), taking
    /// the logarithm through `log1p` when its argument is close to 1.
    fn kernel_at(&self, x: f64) -> f64 {
        let (p, q) = if self.residual() {
            (self.reference.survival(x), self.reference.cdf(x))
        } else {
            (self.reference.cdf(x), self.reference.survival(x))
        };
        let neglog = if p > 0.5 { -(-q).ln_1p() } else { -p.ln() };
        let neglog = neglog.min(-self.integration.clamp_epsilon.ln());
        if neglog <= 0.0 {
            return 0.0;
        }
        FractionalKernel::new(self.eta).prefactor() * neglog.powf(self.eta.exponent())
    }

    /// Probability-scale evaluation through the substitution `s = F̄(x)`,
    /// plus the stretch where the truth is degenerate (`F̄ = 1` for fcri,
    /// `F = 1` for fcpi) but the reference kernel is not.
    pub fn evaluate(&self) -> Result<IntegralResult> {
        self.check_finite()?;
        let cfg = &self.integration;
        let (tlo, thi) = self.truth.support();
        let (rlo, rhi) = self.reference.support();

        let main = |s: f64| {
            let w = if self.residual() { s } else { 1.0 - s };
            if w == 0.0 {
                return 0.0;
            }
            let x = self.truth.survival_quantile(s);
            let k = self.kernel_at(x);
            if k == 0.0 {
                0.0
            } else {
                w * k / self.truth.pdf(x)
            }
        };
        let mut r = integrate_pieces(main, &probability_breaks(1.0), cfg)?;

        if self.residual() && rlo < tlo {
            r = r + integrate_pieces(|x| self.kernel_at(x), &[rlo, tlo], cfg)?;
        } else if !self.residual() && rhi > thi {
            if rhi.is_finite() {
                r = r + integrate_pieces(|x| self.kernel_at(x), &[thi, rhi], cfg)?;
            } else {
                // s = Ḡ(x) on (0, Ḡ(thi))
                let top = self.reference.survival(thi);
                let tail = |s: f64| {
                    let x = self.reference.survival_quantile(s);
                    let k = self.kernel_at(x);
                    if k == 0.0 {
                        0.0
                    } else {
                        k / self.reference.pdf(x)
                    }
                };
                r = r + integrate_pieces(tail, &probability_breaks(top), cfg)?;
            }
        }
        Ok(r)
    }

    /// Direct evaluation of `∫ F̄(x) k(Ḡ(x)) dx` (or `∫ F(x) k(G(x)) dx`) on a
    /// truncated domain split at every support endpoint. The tail beyond the
    /// truncation point is estimated over an equally long stretch and
    /// reported as a divergence if it is not negligible.
    pub fn evaluate_truncated(&self) -> Result<IntegralResult> {
        self.check_finite()?;
        let cfg = IntegrationConfig {
            method: Method::GaussLegendreTensor,
            ..self.integration
        };
        let (tlo, thi) = self.truth.support();
        let (rlo, rhi) = self.reference.support();
        let (lo, hi, truncated) = if self.residual() {
            let lo = tlo.min(rlo);
            if thi.is_finite() {
                (lo, thi, false)
            } else {
                (lo, self.truth.survival_quantile(TAIL_LEVEL), true)
            }
        } else if rhi.is_finite() {
            (tlo, rhi, false)
        } else {
            let mut hi = self.reference.survival_quantile(TAIL_LEVEL);
            if thi.is_finite() {
                hi = hi.max(thi);
            }
            (tlo, hi, true)
        };
        let integrand = |x: f64| {
            let w = if self.residual() {
                self.truth.survival(x)
            } else {
                self.truth.cdf(x)
            };
            if w == 0.0 {
                0.0
            } else {
                w * self.kernel_at(x)
            }
        };

        let mut cuts = vec![lo, hi];
        cuts.extend([tlo, thi, rlo, rhi].into_iter().filter(|p| p.is_finite() && *p > lo && *p < hi));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut total = IntegralResult::ZERO;
        for w in cuts.windows(2) {
            total = total + integrate_pieces(integrand, &equal_pieces(w[0], w[1], PANELS), &cfg)?;
        }
        if truncated {
            let tail = integrate_pieces(integrand, &equal_pieces(hi, hi + (hi - lo), PANELS), &cfg)?;
            let allowed = 1e-12 + cfg.rel_tolerance * total.value.abs();
            if !(tail.value.abs() <= allowed) {
                return Err(Error::Divergent(format!(
                    "{} tail beyond x = {hi} contributes {} (allowed {allowed})",
                    self.kind, tail.value
                )));
            }
            total.error_estimate += tail.value.abs();
            total.evaluations += tail.evaluations;
        }
        Ok(total)
    }
}

/// Fractional cumulative residual inaccuracy `∫ F̄(x) {−Ln_η Ḡ(x)}^{1/η} dx`.
pub fn fcri_univariate(
    truth: &Margin,
    reference: &Margin,
    eta: FractionalOrder,
    cfg: &IntegrationConfig,
) -> Result<IntegralResult> {
    UnivariateJob::new(MeasureKind::Fcri, truth.clone(), reference.clone(), eta, *cfg)?.evaluate()
}

/// Fractional cumulative past inaccuracy `∫ F(x) {−Ln_η G(x)}^{1/η} dx`.
pub fn fcpi_univariate(
    truth: &Margin,
    reference: &Margin,
    eta: FractionalOrder,
    cfg: &IntegrationConfig,
) -> Result<IntegralResult> {
    UnivariateJob::new(MeasureKind::Fcpi, truth.clone(), reference.clone(), eta, *cfg)?.evaluate()
}

/// Either kind of job.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Joint(MeasureJob),
    Univariate(UnivariateJob),
}

impl Job {
    pub fn kind(&self) -> MeasureKind {
        match self {
            Job::Joint(j) => j.kind(),
            Job::Univariate(j) => j.kind(),
        }
    }

    pub fn evaluate(&self) -> Result<IntegralResult> {
        match self {
            Job::Joint(j) => j.evaluate(),
            Job::Univariate(j) => j.evaluate(),
        }
    }
}

impl From<MeasureJob> for Job {
    fn from(j: MeasureJob) -> Self {
        Job::Joint(j)
    }
}

impl From<UnivariateJob> for Job {
    fn from(j: UnivariateJob) -> Self {
        Job::Univariate(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{CopulaSpec, Family};
    use std::f64::consts::PI;

    fn eta(x: f64) -> FractionalOrder {
        FractionalOrder::new(x).unwrap()
    }

    fn model(f: Family, theta: f64, m: Margin) -> JointModel {
        JointModel::bivariate(CopulaSpec::bivariate(f, theta).unwrap(), m).unwrap()
    }

    fn exp(rate: f64) -> Margin {
        Margin::exponential(rate).unwrap()
    }

    fn job(kind: MeasureKind, x: &JointModel, y: &JointModel, e: f64) -> MeasureJob {
        MeasureJob::new(kind, x.clone(), y.clone(), eta(e), IntegrationConfig::default()).unwrap()
    }

    /// Midpoint-rule oracle on a uniform grid, independent of the library
    /// integrators.
    fn midpoint_2d(f: impl Fn(f64, f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            }
        }
        s * h * h
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in MeasureKind::ALL {
            assert_eq!(k.name().parse::<MeasureKind>().unwrap(), k);
        }
        assert!("nope".parse::<MeasureKind>().is_err());
    }

    #[test]
    fn independence_ccfi_is_three_pi_over_32() {
        let pi = model(Family::Independence, 0.0, exp(1.0));
        let r = ccfi(&job(MeasureKind::Ccfi, &pi, &pi, 0.5)).unwrap();
        assert!((r.value - 3.0 * PI / 32.0).abs() < 1e-10, "{}", r.value);
        let e = ccfe(&MeasureJob::entropy(MeasureKind::Ccfe, pi, eta(0.5), IntegrationConfig::default()).unwrap())
            .unwrap();
        assert_eq!(e.value.to_bits(), r.value.to_bits());
    }

    #[test]
    fn independence_cci_is_five_sixteenths() {
        // ∫∫uv(−log u − log v) = 2·(1/4)(1/2)
        let pi = model(Family::Independence, 0.0, Margin::uniform(0.0, 1.0).unwrap());
        let r = cci(&job(MeasureKind::Cci, &pi, &pi, 0.5)).unwrap();
        assert!((r.value - 0.25).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn tilde_identity() {
        let x = model(Family::Gumbel, 2.0, exp(1.0));
        let y = JointModel::new(
            CopulaSpec::bivariate(Family::Fgm, 0.5).unwrap(),
            vec![exp(2.0), exp(3.0)],
        )
        .unwrap();
        for e in [0.3, 0.5, 0.8] {
            let t = job(MeasureKind::CcfiTilde, &x, &y, e).evaluate().unwrap().value;
            let c = job(MeasureKind::Cci, &x, &y, e).evaluate().unwrap().value;
            assert!((t - eta_factorial(eta(e)) * c).abs() < 1e-12);
        }
    }

    #[test]
    fn scfi_matches_midpoint_oracle() {
        let x = model(Family::Frank, 2.0, exp(1.0));
        let y = JointModel::new(
            CopulaSpec::bivariate(Family::Joe, 2.0).unwrap(),
            vec![exp(2.0), exp(3.0)],
        )
        .unwrap();
        let r = scfi(&job(MeasureKind::Scfi, &x, &y, 0.5)).unwrap().value;
        let cx = CopulaSpec::bivariate(Family::Frank, 2.0).unwrap();
        let cy = CopulaSpec::bivariate(Family::Joe, 2.0).unwrap();
        // Ḡᵢ(F̄⁻¹(v)) = v^μᵢ for exponential margins
        let oracle = midpoint_2d(
            |u, v| {
                let w = cx.eval_survival(&[u, v]).unwrap();
                let a = cy.eval_survival(&[u.powi(2), v.powi(3)]).unwrap();
                w * (PI / 4.0) * a.ln().powi(2)
            },
            2000,
        );
        assert!((r - oracle).abs() < 1e-5, "{r} vs {oracle}");
    }

    #[test]
    fn cocfi_and_dcfi_match_midpoint_oracle() {
        let pi = model(Family::Independence, 0.0, exp(1.0));
        let co = cocfi(&job(MeasureKind::Cocfi, &pi, &pi, 0.5)).unwrap().value;
        let du = dcfi(&job(MeasureKind::Dcfi, &pi, &pi, 0.5)).unwrap().value;
        let co_oracle = midpoint_2d(
            |u, v| {
                let c = 1.0 - (1.0 - u) * (1.0 - v);
                c * (PI / 4.0) * c.ln().powi(2)
            },
            2000,
        );
        let du_oracle = midpoint_2d(
            |u, v| {
                let c = u + v - u * v;
                c * (PI / 4.0) * c.ln().powi(2)
            },
            2000,
        );
        assert!((co - co_oracle).abs() < 1e-6);
        assert!((du - du_oracle).abs() < 1e-6);
    }

    #[test]
    fn comonotone_dual_weight_is_max() {
        let m = model(Family::Comonotone, 0.0, exp(1.0));
        let pi = model(Family::Independence, 0.0, exp(1.0));
        let d = job(MeasureKind::Dcfi, &m, &pi, 0.5).evaluate().unwrap().value;
        let oracle = midpoint_2d(
            |u, v| {
                let c = u + v - u * v;
                u.max(v) * (PI / 4.0) * c.ln().powi(2)
            },
            2000,
        );
        assert!((d - oracle).abs() < 1e-5, "{d} vs {oracle}");
    }

    #[test]
    fn radially_symmetric_frank_has_equal_scfi_and_ccfi() {
        let m = Margin::uniform(0.0, 1.0).unwrap();
        let x = model(Family::Frank, 3.0, m.clone());
        let c = job(MeasureKind::Ccfi, &x, &x, 0.5).evaluate().unwrap().value;
        let s = job(MeasureKind::Scfi, &x, &x, 0.5).evaluate().unwrap().value;
        assert!((c - s).abs() < 1e-6);
    }

    #[test]
    fn prhr_homogeneity() {
        let base = exp(1.0);
        let x = model(Family::Gumbel, 2.0, base.clone());
        let eval = |scale: f64| {
            let y = JointModel::new(
                CopulaSpec::independence(2).unwrap(),
                vec![
                    Margin::prhr(base.clone(), 1.5 * scale).unwrap(),
                    Margin::prhr(base.clone(), 2.0 * scale).unwrap(),
                ],
            )
            .unwrap();
            job(MeasureKind::Ccfi, &x, &y, 0.6).evaluate().unwrap().value
        };
        let ratio = eval(2.0) / eval(1.0);
        assert!((ratio - 2f64.powf(1.0 / 0.6)).abs() < 1e-8);
    }

    #[test]
    fn validation_errors() {
        let x = model(Family::Gumbel, 2.0, exp(1.0));
        let y = model(Family::Frank, 2.0, exp(2.0));
        let cfg = IntegrationConfig::default();
        assert!(matches!(
            MeasureJob::new(MeasureKind::Ccfe, x.clone(), y.clone(), eta(0.5), cfg),
            Err(Error::Parameter(_))
        ));
        assert!(MeasureJob::new(MeasureKind::Fcri, x.clone(), y.clone(), eta(0.5), cfg).is_err());
        let c3 = CopulaSpec::new(Family::Gumbel, 2.0, 3).unwrap();
        let m3 = JointModel::new(c3, vec![exp(1.0); 3]).unwrap();
        assert!(MeasureJob::new(MeasureKind::Ccfi, m3.clone(), m3.clone(), eta(0.5), cfg).is_ok());
        assert!(matches!(
            MeasureJob::new(MeasureKind::Scfi, m3.clone(), m3.clone(), eta(0.5), cfg),
            Err(Error::UnsupportedDimension { .. })
        ));
        assert!(matches!(
            MeasureJob::new(MeasureKind::Ccfi, x.clone(), m3, eta(0.5), cfg),
            Err(Error::DimensionMismatch(_))
        ));
        let u = model(Family::Gumbel, 2.0, Margin::uniform(5.0, 6.0).unwrap());
        let w = model(Family::Gumbel, 2.0, Margin::uniform(0.0, 1.0).unwrap());
        assert!(matches!(
            MeasureJob::new(MeasureKind::Ccfi, u, w, eta(0.5), cfg),
            Err(Error::Composition(_))
        ));
        assert!(ccfi(&job(MeasureKind::Cci, &x, &y, 0.5)).is_err());
    }

    #[test]
    fn trivariate_independence_ccfi() {
        // ∫ uvw(−log uvw)² over the cube, times π/4
        let c3 = CopulaSpec::independence(3).unwrap();
        let m3 = JointModel::new(c3, vec![exp(1.0); 3]).unwrap();
        let r = job(MeasureKind::Ccfi, &m3, &m3, 0.5).evaluate().unwrap().value;
        // E-style expansion: 3·∫t(log t)² (1/2)² + 6·(∫t log t)²(1/2) = 3·(1/4)(1/4) + 6·(1/16)(1/2)
        let oracle = (PI / 4.0) * (3.0 * 0.25 * 0.25 + 6.0 / 16.0 * 0.5);
        assert!((r - oracle).abs() < 1e-9, "{r} vs {oracle}");
    }

    #[test]
    fn fcri_analytic_values() {
        let cfg = IntegrationConfig::default();
        let r = fcri_univariate(&exp(1.0), &exp(1.0), eta(0.5), &cfg).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-8, "{}", r.value);
        let r = fcri_univariate(&exp(2.0), &exp(1.0), eta(0.5), &cfg).unwrap();
        assert!((r.value - PI / 16.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn fcpi_analytic_values() {
        let cfg = IntegrationConfig::default();
        let u = Margin::uniform(0.0, 1.0).unwrap();
        let r = fcpi_univariate(&u, &u, eta(0.5), &cfg).unwrap();
        assert!((r.value - PI / 16.0).abs() < 1e-8, "{}", r.value);
        // G = F^γ scales the kernel by γ^{1/η}
        let g = Margin::prhr(u.clone(), 1.7).unwrap();
        let s = fcpi_univariate(&u, &g, eta(0.5), &cfg).unwrap();
        assert!((s.value - 1.7f64.powi(2) * PI / 16.0).abs() < 1e-8);
    }

    #[test]
    fn fcri_phr_homogeneity() {
        let cfg = IntegrationConfig::default();
        let f = exp(1.3);
        let g = Margin::phr(f.clone(), 2.5).unwrap();
        let base = fcri_univariate(&f, &f, eta(0.7), &cfg).unwrap().value;
        let scaled = fcri_univariate(&f, &g, eta(0.7), &cfg).unwrap().value;
        assert!((scaled / base - 2.5f64.powf(1.0 / 0.7)).abs() < 1e-8);
    }

    #[test]
    fn fcpi_uniform_reference_on_wider_support() {
        // ∫₀¹ x·k(x/2) dx + ∫₁² k(x/2) dx with k(t) = (π/4)(log t)²
        let cfg = IntegrationConfig::default();
        let u1 = Margin::uniform(0.0, 1.0).unwrap();
        let u2 = Margin::uniform(0.0, 2.0).unwrap();
        let r = fcpi_univariate(&u1, &u2, eta(0.5), &cfg).unwrap().value;
        let n = 2_000_000;
        let h = 2.0 / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                x.min(1.0) * (PI / 4.0) * (x / 2.0).ln().powi(2) * h
            })
            .sum();
        assert!((r - oracle).abs() < 1e-6, "{r} vs {oracle}");
    }

    #[test]
    fn both_univariate_routes_agree() {
        let cfg = IntegrationConfig::default();
        let cases = [
            (MeasureKind::Fcri, exp(1.0), exp(1.0)),
            (MeasureKind::Fcri, exp(2.0), exp(0.5)),
            (MeasureKind::Fcri, Margin::uniform(1.0, 2.0).unwrap(), exp(1.0)),
            (MeasureKind::Fcpi, Margin::uniform(0.0, 1.0).unwrap(), Margin::uniform(0.0, 2.0).unwrap()),
            (MeasureKind::Fcpi, Margin::uniform(0.0, 1.0).unwrap(), exp(1.0)),
            (MeasureKind::Fcpi, exp(1.0), exp(3.0)),
        ];
        for e in [0.3, 0.5, 0.9] {
            for (k, t, r) in &cases {
                let j = UnivariateJob::new(*k, t.clone(), r.clone(), eta(e), cfg).unwrap();
                let a = j.evaluate().unwrap().value;
                let b = j.evaluate_truncated().unwrap().value;
                assert!((a - b).abs() < 1e-8 * a.max(1.0), "{k} {t} {r} η={e}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn univariate_divergence_detected() {
        let cfg = IntegrationConfig::default();
        let e = fcri_univariate(&exp(1.0), &Margin::uniform(0.0, 3.0).unwrap(), eta(0.5), &cfg);
        assert!(matches!(e, Err(Error::Divergent(_))));
        let e = fcpi_univariate(&Margin::uniform(0.0, 1.0).unwrap(), &Margin::uniform(0.5, 2.0).unwrap(), eta(0.5), &cfg);
        assert!(matches!(e, Err(Error::Divergent(_))));
    }

    #[test]
    fn non_negative_on_assorted_jobs() {
        let fams = [
            (Family::Gumbel, 2.0),
            (Family::Frank, -3.0),
            (Family::Fgm, -0.7),
            (Family::Joe, 1.5),
            (Family::Amh, 0.4),
            (Family::Countermonotone, 0.0),
        ];
        for (fx, tx) in fams {
            for (fy, ty) in fams {
                let x = model(fx, tx, exp(1.0));
                let y = JointModel::new(
                    CopulaSpec::bivariate(fy, ty).unwrap(),
                    vec![exp(2.0), Margin::uniform(0.0, 4.0).unwrap()],
                )
                .unwrap();
                for k in [MeasureKind::Ccfi, MeasureKind::Scfi, MeasureKind::Cocfi, MeasureKind::Dcfi] {
                    let j = MeasureJob::new(k, x.clone(), y.clone(), eta(0.5), IntegrationConfig::gauss_legendre(24))
                        .unwrap();
                    let v = j.evaluate().unwrap().value;
                    assert!(v >= -1e-12, "{k} {fx} {fy}: {v}");
                }
            }
        }
    }
}
