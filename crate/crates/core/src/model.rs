use std::fmt;

use crate::copula::{Copula, CopulaSpec, Transform};
use crate::error::{Error, Result};
use crate::margins::Margin;

/// A random vector described by its copula and margins (Sklar).
///
/// In dimension 2 the survival, co- and dual copulas are derived from the
/// copula. Above dimension 2 only a directly supplied survival copula is
/// available.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    copula: CopulaSpec,
    survival: Option<CopulaSpec>,
    margins: Vec<Margin>,
}

impl JointModel {
    pub fn new(copula: CopulaSpec, margins: Vec<Margin>) -> Result<Self> {
        if margins.len() != copula.dim() {
            return Err(Error::DimensionMismatch(format!(
                "copula has dimension {} but {} margins were given",
                copula.dim(),
                margins.len()
            )));
        }
        Ok(Self {
            copula,
            survival: None,
            margins,
        })
    }

    /// Bivariate model with the same margin on both axes.
    pub fn bivariate(copula: CopulaSpec, margin: Margin) -> Result<Self> {
        Self::new(copula, vec![margin.clone(), margin])
    }

    /// Supplies the survival copula directly instead of deriving it.
    pub fn with_survival_copula(mut self, survival: CopulaSpec) -> Result<Self> {
        if survival.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "survival copula has dimension {} but the model has dimension {}",
                survival.dim(),
                self.dim()
            )));
        }
        self.survival = Some(survival);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.copula.dim()
    }

    pub fn copula(&self) -> &CopulaSpec {
        &self.copula
    }

    pub fn supplied_survival(&self) -> Option<&CopulaSpec> {
        self.survival.as_ref()
    }

    pub fn margins(&self) -> &[Margin] {
        &self.margins
    }

    pub fn structure(&self) -> Copula {
        Copula::Spec(self.copula)
    }

    pub fn survival_copula(&self) -> Result<Copula> {
        match self.survival {
            Some(s) => Ok(Copula::Spec(s)),
            None => Copula::Spec(self.copula).transformed(Transform::Survival),
        }
    }

    pub fn cocopula(&self) -> Result<Copula> {
        Copula::Spec(self.copula).transformed(Transform::CoCopula)
    }

    pub fn dual_copula(&self) -> Result<Copula> {
        Copula::Spec(self.copula).transformed(Transform::DualCopula)
    }

    /// Joint CDF `C(F₁(x₁), …, Fₙ(xₙ))`.
    pub fn cdf(&self, x: &[f64]) -> f64 {
        let p: Vec<f64> = self.margins.iter().zip(x).map(|(m, &x)| m.cdf(x)).collect();
        self.copula.value(&p)
    }

    /// Joint survival function `C̄(F̄₁(x₁), …, F̄ₙ(xₙ))`.
    pub fn survival_fn(&self, x: &[f64]) -> Result<f64> {
        let c = self.survival_copula()?;
        let p: Vec<f64> = self
            .margins
            .iter()
            .zip(x)
            .map(|(m, &x)| m.survival(x))
            .collect();
        Ok(c.value(&p))
    }
}

impl fmt::Display for JointModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} with margins [", self.copula)?;
        for (i, m) in self.margins.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::Family;

    #[test]
    fn dimension_checks() {
        let c = CopulaSpec::bivariate(Family::Gumbel, 2.0).unwrap();
        let m = Margin::exponential(1.0).unwrap();
        assert!(JointModel::new(c, vec![m.clone()]).is_err());
        let model = JointModel::bivariate(c, m.clone()).unwrap();
        assert!(model.survival_copula().is_ok());
        let c3 = CopulaSpec::new(Family::Gumbel, 2.0, 3).unwrap();
        let m3 = JointModel::new(c3, vec![m.clone(), m.clone(), m.clone()]).unwrap();
        assert!(matches!(m3.survival_copula(), Err(Error::UnsupportedDimension { .. })));
        assert!(m3.cocopula().is_err());
        let supplied = m3.with_survival_copula(c3).unwrap();
        assert!(supplied.survival_copula().is_ok());
    }

    #[test]
    fn joint_functions() {
        let c = CopulaSpec::independence(2).unwrap();
        let m = Margin::uniform(0.0, 2.0).unwrap();
        let model = JointModel::bivariate(c, m).unwrap();
        assert!((model.cdf(&[1.0, 0.5]) - 0.125).abs() < 1e-15);
        assert!((model.survival_fn(&[1.0, 0.5]).unwrap() - 0.375).abs() < 1e-15);
    }
}
