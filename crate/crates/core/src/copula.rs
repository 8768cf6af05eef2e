//! Copula families, the Fréchet–Hoeffding envelope and the bivariate
//! survival, co-copula and dual-copula transforms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Independence,
    Comonotone,
    Countermonotone,
    Gumbel,
    Fgm,
    Frank,
    Joe,
    /// Ali–Mikhail–Haq.
    Amh,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Independence,
        Family::Comonotone,
        Family::Countermonotone,
        Family::Gumbel,
        Family::Fgm,
        Family::Frank,
        Family::Joe,
        Family::Amh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "independence",
            Family::Comonotone => "comonotone",
            Family::Countermonotone => "countermonotone",
            Family::Gumbel => "gumbel",
            Family::Fgm => "fgm",
            Family::Frank => "frank",
            Family::Joe => "joe",
            Family::Amh => "amh",
        }
    }

    /// Whether the family takes a parameter at all.
    pub fn has_theta(self) -> bool {
        !matches!(
            self,
            Family::Independence | Family::Comonotone | Family::Countermonotone
        )
    }

    fn check_theta(self, theta: f64, dim: usize) -> Result<()> {
        if !theta.is_finite() && self.has_theta() {
            return Err(Error::Parameter(format!(
                "{} requires a finite theta, got {theta}",
                self.name()
            )));
        }
        let ok = match self {
            Family::Independence | Family::Comonotone | Family::Countermonotone => true,
            Family::Gumbel | Family::Joe => theta >= 1.0,
            Family::Fgm => (-1.0..=1.0).contains(&theta),
            Family::Frank => theta != 0.0 && (dim == 2 || theta > 0.0),
            Family::Amh => (-1.0..1.0).contains(&theta),
        };
        if ok {
            return Ok(());
        }
        let rule = match self {
            Family::Gumbel | Family::Joe => "theta >= 1",
            Family::Fgm => "theta in [-1, 1]",
            Family::Frank if dim > 2 => "theta > 0 in dimension above 2",
            Family::Frank => "theta != 0",
            Family::Amh => "theta in [-1, 1)",
            _ => unreachable!(),
        };
        Err(Error::Parameter(format!("{} requires {rule}", self.name())))
    }

    /// Largest dimension the family supports (`None` = any).
    fn max_dim(self) -> Option<usize> {
        match self {
            Family::Countermonotone | Family::Fgm | Family::Amh => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|fam| fam.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown copula family {s:?}")))
    }
}

/// Frank parameters this close to zero evaluate as the independence copula.
const FRANK_INDEPENDENCE_CUTOFF: f64 = 1e-8;

/// A parameterized copula family instance on `[0, 1]^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaSpec {
    family: Family,
    theta: f64,
    dim: usize,
}

impl CopulaSpec {
    pub fn new(family: Family, theta: f64, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Parameter(format!(
                "copula dimension must be at least 2, got {dim}"
            )));
        }
        if let Some(max) = family.max_dim() {
            if dim > max {
                return Err(Error::UnsupportedDimension {
                    operation: family.name(),
                    dim,
                });
            }
        }
        family.check_theta(theta, dim)?;
        Ok(Self { family, theta, dim })
    }

    pub fn bivariate(family: Family, theta: f64) -> Result<Self> {
        Self::new(family, theta, 2)
    }

    pub fn independence(dim: usize) -> Result<Self> {
        Self::new(Family::Independence, 0.0, dim)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `C(v)`, validating the point first.
    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        check_point(v, self.dim)?;
        Ok(self.value(v))
    }

    /// `C(v)` without validation. Points outside the cube give unspecified
    /// (but finite) results.
    pub fn value(&self, v: &[f64]) -> f64 {
        if let Some(b) = boundary_value(v) {
            return b;
        }
        let c = match self.family {
            Family::Independence => v.iter().product(),
            Family::Comonotone => v.iter().copied().fold(1.0, f64::min),
            Family::Countermonotone => (v[0] + v[1] - 1.0).max(0.0),
            Family::Gumbel => gumbel(v, self.theta),
            Family::Fgm => {
                let (u, w) = (v[0], v[1]);
                u * w * (1.0 + self.theta * (1.0 - u) * (1.0 - w))
            }
            Family::Frank => {
                if self.theta.abs() < FRANK_INDEPENDENCE_CUTOFF {
                    v.iter().product()
                } else {
                    frank(v, self.theta)
                }
            }
            Family::Joe => joe(v, self.theta),
            Family::Amh => {
                let (u, w) = (v[0], v[1]);
                u * w / (1.0 - self.theta * (1.0 - u) * (1.0 - w))
            }
        };
        c.clamp(0.0, 1.0)
    }

    /// Survival copula `C̄(u, v) = u + v − 1 + C(1 − u, 1 − v)`.
    pub fn eval_survival(&self, v: &[f64]) -> Result<f64> {
        self.require_bivariate("survival copula")?;
        check_point(v, 2)?;
        Ok(self.survival_value(v[0], v[1]))
    }

    /// Co-copula `Ĉ(u, v) = 1 − C(1 − u, 1 − v)`.
    pub fn eval_cocopula(&self, v: &[f64]) -> Result<f64> {
        self.require_bivariate("co-copula")?;
        check_point(v, 2)?;
        Ok((v[0] + v[1] - self.survival_value(v[0], v[1])).clamp(0.0, 1.0))
    }

    /// Dual copula `C̃(u, v) = u + v − C(u, v)`.
    pub fn eval_dualcopula(&self, v: &[f64]) -> Result<f64> {
        self.require_bivariate("dual copula")?;
        check_point(v, 2)?;
        Ok(dual_of(|p| self.value(p), v[0], v[1]))
    }

    /// Bivariate survival copula, written per family so that it keeps full
    /// relative precision near the origin, where the generic
    /// `u + v − 1 + C(1 − u, 1 − v)` cancels to noise.
    pub(crate) fn survival_value(&self, u: f64, w: f64) -> f64 {
        if let Some(b) = boundary_value(&[u, w]) {
            return b;
        }
        let t = self.theta;
        let c = match self.family {
            // radially symmetric families
            Family::Independence
            | Family::Comonotone
            | Family::Countermonotone
            | Family::Fgm
            | Family::Frank => self.value(&[u, w]),
            // with p = −log(1 − hi) ≥ q = −log(1 − lo) and
            // A = p + d = (p^θ + q^θ)^{1/θ}: C̄ = lo + (1 − hi)·expm1(−d)
            Family::Gumbel => {
                let (hi, lo) = if u >= w { (u, w) } else { (w, u) };
                let (p, q) = (-(-hi).ln_1p(), -(-lo).ln_1p());
                let d = p * ((q / p).powf(t).ln_1p() / t).exp_m1();
                lo + (1.0 - hi) * (-d).exp_m1()
            }
            // (hi^θ + lo^θ − hi^θ lo^θ)^{1/θ} = hi·(1 + r)^{1/θ}
            Family::Joe if t == 1.0 => u * w,
            Family::Joe => {
                let (hi, lo) = if u >= w { (u, w) } else { (w, u) };
                let r = (lo / hi).powf(t) * -(t * hi.ln()).exp_m1();
                lo - hi * (r.ln_1p() / t).exp_m1()
            }
            Family::Amh => u * w * (1.0 - t * (u + w - 1.0)) / (1.0 - t * u * w),
        };
        c.clamp(0.0, 1.0)
    }

    /// Closed-form survival copula for the families that have one written
    /// out directly (Frank, Joe). Used to cross-check the generic transform.
    pub fn survival_direct(&self, v: &[f64]) -> Option<f64> {
        if self.dim != 2 || v.len() != 2 {
            return None;
        }
        let (u, w, t) = (v[0], v[1], self.theta);
        match self.family {
            Family::Frank => {
                let num = (-t * (1.0 - u)).exp_m1() * (-t * (1.0 - w)).exp_m1();
                Some(u + w - 1.0 - (num / (-t).exp_m1()).ln_1p() / t)
            }
            Family::Joe => {
                let (a, b) = (u.powf(t), w.powf(t));
                Some(u + w - (a + b - a * b).powf(1.0 / t))
            }
            _ => None,
        }
    }

    fn require_bivariate(&self, operation: &'static str) -> Result<()> {
        if self.dim == 2 {
            Ok(())
        } else {
            Err(Error::UnsupportedDimension {
                operation,
                dim: self.dim,
            })
        }
    }
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.family.has_theta() {
            write!(f, "{}(theta={}, dim={})", self.family, self.theta, self.dim)
        } else {
            write!(f, "{}(dim={})", self.family, self.dim)
        }
    }
}

fn check_point(v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, copula has dimension {dim}",
            v.len()
        )));
    }
    if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!(
            "copula coordinates must lie in [0, 1], got {x}"
        )));
    }
    Ok(())
}

/// Axiom values on the boundary of the cube: 0 if any coordinate is 0,
/// `v_i` if every other coordinate is 1.
fn boundary_value(v: &[f64]) -> Option<f64> {
    if v.iter().any(|&x| x <= 0.0) {
        return Some(0.0);
    }
    let mut free = None;
    for &x in v {
        if x < 1.0 {
            if free.is_some() {
                return None;
            }
            free = Some(x);
        }
    }
    Some(free.unwrap_or(1.0))
}

fn gumbel(v: &[f64], theta: f64) -> f64 {
    let s: f64 = v.iter().map(|x| (-x.ln()).powf(theta)).sum();
    (-s.powf(1.0 / theta)).exp()
}

fn frank(v: &[f64], theta: f64) -> f64 {
    let denom = (-theta).exp_m1();
    let mut ratio = 1.0;
    for (i, x) in v.iter().enumerate() {
        ratio *= (-theta * x).exp_m1();
        if i > 0 {
            ratio /= denom;
        }
    }
    if ratio < -0.5 && v.len() == 2 {
        // 1 + ratio cancels; in two dimensions it equals
        // (e^{−θu}·expm1(−θv) + e^{−θv}·expm1(−θ(1−v))) / expm1(−θ),
        // whose two terms share a sign
        let (u, w) = (v[0], v[1]);
        let sum = (-theta * u).exp() * (-theta * w).exp_m1() + (-theta * w).exp() * (-theta * (1.0 - w)).exp_m1();
        let q = sum / denom;
        if q.is_finite() && q > 0.0 {
            return -q.ln() / theta;
        }
    }
    -ratio.ln_1p() / theta
}

fn joe(v: &[f64], theta: f64) -> f64 {
    // 1 − Π(1 − a_i) with a_i = (1 − x_i)^θ, as −expm1(Σ log(1 − a_i)),
    // taking log(1 − a_i) through log1p or expm1, whichever is exact
    let log_sum: f64 = v
        .iter()
        .map(|x| {
            let log_a = theta * (-x).ln_1p();
            if log_a < -std::f64::consts::LN_2 {
                (-log_a.exp()).ln_1p()
            } else {
                (-log_a.exp_m1()).ln()
            }
        })
        .sum();
    1.0 - (-log_sum.exp_m1()).powf(1.0 / theta)
}

pub(crate) fn survival_of(c: impl Fn(&[f64]) -> f64, u: f64, v: f64) -> f64 {
    if let Some(b) = boundary_value(&[u, v]) {
        return b;
    }
    (u + v - 1.0 + c(&[1.0 - u, 1.0 - v])).clamp(0.0, 1.0)
}

pub(crate) fn cocopula_of(c: impl Fn(&[f64]) -> f64, u: f64, v: f64) -> f64 {
    (1.0 - c(&[1.0 - u, 1.0 - v])).clamp(0.0, 1.0)
}

pub(crate) fn dual_of(c: impl Fn(&[f64]) -> f64, u: f64, v: f64) -> f64 {
    (u + v - c(&[u, v])).clamp(0.0, 1.0)
}

/// Fréchet–Hoeffding envelope `(W(u, v), M(u, v))`.
pub fn frechet_envelope(v: [f64; 2]) -> (f64, f64) {
    let [u, w] = v;
    ((u + w - 1.0).max(0.0), u.min(w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    Survival,
    CoCopula,
    DualCopula,
}

/// A copula family instance or a bivariate transform of one.
#[derive(Debug, Clone, PartialEq)]
pub enum Copula {
    Spec(CopulaSpec),
    Derived(DerivedCopula),
}

impl Copula {
    pub fn dim(&self) -> usize {
        match self {
            Copula::Spec(s) => s.dim(),
            Copula::Derived(_) => 2,
        }
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        check_point(v, self.dim())?;
        Ok(self.value(v))
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        match self {
            Copula::Spec(s) => s.value(v),
            Copula::Derived(d) => d.value(v),
        }
    }

    pub fn transformed(self, transform: Transform) -> Result<Copula> {
        DerivedCopula::new(self, transform).map(Copula::Derived)
    }
}

impl From<CopulaSpec> for Copula {
    fn from(spec: CopulaSpec) -> Self {
        Copula::Spec(spec)
    }
}

/// `C̄`, `Ĉ` or `C̃` of a bivariate base. Bases may themselves be derived.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedCopula {
    base: Box<Copula>,
    transform: Transform,
}

impl DerivedCopula {
    pub fn new(base: impl Into<Copula>, transform: Transform) -> Result<Self> {
        let base = base.into();
        if base.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                operation: match transform {
                    Transform::Survival => "survival copula",
                    Transform::CoCopula => "co-copula",
                    Transform::DualCopula => "dual copula",
                },
                dim: base.dim(),
            });
        }
        Ok(Self {
            base: Box::new(base),
            transform,
        })
    }

    pub fn base(&self) -> &Copula {
        &self.base
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        check_point(v, 2)?;
        Ok(self.value(v))
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        if let Copula::Spec(s) = self.base.as_ref() {
            match self.transform {
                Transform::Survival => return s.survival_value(v[0], v[1]),
                Transform::CoCopula => return (v[0] + v[1] - s.survival_value(v[0], v[1])).clamp(0.0, 1.0),
                Transform::DualCopula => {}
            }
        }
        let base = |p: &[f64]| self.base.value(p);
        match self.transform {
            Transform::Survival => survival_of(base, v[0], v[1]),
            Transform::CoCopula => cocopula_of(base, v[0], v[1]),
            Transform::DualCopula => dual_of(base, v[0], v[1]),
        }
    }
}
