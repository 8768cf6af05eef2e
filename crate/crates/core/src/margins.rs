//! Univariate margins and the probability-scale maps `v ↦ G(F⁻¹(v))` and
//! `v ↦ Ḡ(F̄⁻¹(v))` that sit inside every measure.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowerMode {
    /// Proportional reversed hazard rate: `G = F^γ`.
    Prhr,
    /// Proportional hazard rate: `Ḡ = F̄^γ`.
    Phr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Margin {
    Exponential { rate: f64 },
    Uniform { a: f64, b: f64 },
    Power {
        base: Box<Margin>,
        gamma: f64,
        mode: PowerMode,
    },
}

impl Margin {
    pub fn exponential(rate: f64) -> Result<Self> {
        if rate > 0.0 && rate.is_finite() {
            Ok(Margin::Exponential { rate })
        } else {
            Err(Error::Parameter(format!(
                "exponential requires rate > 0, got {rate}"
            )))
        }
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Margin::Uniform { a, b })
        } else {
            Err(Error::Parameter(format!("uniform requires a < b, got a={a}, b={b}")))
        }
    }

    pub fn power(base: Margin, gamma: f64, mode: PowerMode) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(Margin::Power {
                base: Box::new(base),
                gamma,
                mode,
            })
        } else {
            Err(Error::Parameter(format!("power requires gamma > 0, got {gamma}")))
        }
    }

    /// `F^γ`.
    pub fn prhr(base: Margin, gamma: f64) -> Result<Self> {
        Self::power(base, gamma, PowerMode::Prhr)
    }

    /// `F̄^γ`.
    pub fn phr(base: Margin, gamma: f64) -> Result<Self> {
        Self::power(base, gamma, PowerMode::Phr)
    }

    /// Closed support `[lo, hi]`; `hi` may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Margin::Exponential { .. } => (0.0, f64::INFINITY),
            Margin::Uniform { a, b } => (*a, *b),
            Margin::Power { base, .. } => base.support(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Margin::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Margin::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Margin::Power { base, gamma, mode } => match mode {
                PowerMode::Prhr => base.cdf(x).powf(*gamma),
                PowerMode::Phr => 1.0 - base.survival(x).powf(*gamma),
            },
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        match self {
            Margin::Exponential { rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Margin::Uniform { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            Margin::Power { base, gamma, mode } => match mode {
                PowerMode::Prhr => 1.0 - base.cdf(x).powf(*gamma),
                PowerMode::Phr => base.survival(x).powf(*gamma),
            },
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        match self {
            Margin::Exponential { rate } => rate * (-rate * x).exp(),
            Margin::Uniform { a, b } => 1.0 / (b - a),
            Margin::Power { base, gamma, mode } => match mode {
                PowerMode::Prhr => gamma * base.cdf(x).powf(gamma - 1.0) * base.pdf(x),
                PowerMode::Phr => gamma * base.survival(x).powf(gamma - 1.0) * base.pdf(x),
            },
        }
    }

    /// `F⁻¹(p)`; `p = 0` and `p = 1` map to the support endpoints.
    pub fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        match self {
            Margin::Exponential { rate } => -(-p).ln_1p() / rate,
            Margin::Uniform { a, b } => a + p * (b - a),
            Margin::Power { base, gamma, mode } => match mode {
                PowerMode::Prhr => base.quantile(p.powf(1.0 / gamma)),
                PowerMode::Phr => base.survival_quantile((1.0 - p).powf(1.0 / gamma)),
            },
        }
    }

    /// `F̄⁻¹(s)`; `s = 1` maps to the lower support endpoint, `s = 0` to the upper.
    pub fn survival_quantile(&self, s: f64) -> f64 {
        let (lo, hi) = self.support();
        if s >= 1.0 {
            return lo;
        }
        if s <= 0.0 {
            return hi;
        }
        match self {
            Margin::Exponential { rate } => -s.ln() / rate,
            Margin::Uniform { a, b } => b - s * (b - a),
            Margin::Power { base, gamma, mode } => match mode {
                PowerMode::Prhr => base.quantile((1.0 - s).powf(1.0 / gamma)),
                PowerMode::Phr => base.survival_quantile(s.powf(1.0 / gamma)),
            },
        }
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Margin::Exponential { rate } => write!(f, "Exp({rate})"),
            Margin::Uniform { a, b } => write!(f, "U({a}, {b})"),
            Margin::Power { base, gamma, mode } => {
                let m = match mode {
                    PowerMode::Prhr => "prhr",
                    PowerMode::Phr => "phr",
                };
                write!(f, "{base}^{gamma}[{m}]")
            }
        }
    }
}

/// How a composition is evaluated. Algebraically forced cases are recognized
/// so that e.g. a PRHR pair evaluates as `v^γ` without a quantile round trip.
#[derive(Debug, Clone, PartialEq)]
enum Route {
    Identity,
    Power(f64),
    General,
}

/// The map `v ↦ G(F⁻¹(v))` (or `Ḡ(F̄⁻¹(v))`) for a fixed reference `G` and
/// truth `F`, validated once.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    reference: Margin,
    truth: Margin,
    survival: bool,
    route: Route,
}

impl Composition {
    /// `v ↦ G(F⁻¹(v))`.
    pub fn cdf(reference: &Margin, truth: &Margin) -> Result<Self> {
        Self::build(reference, truth, false)
    }

    /// `v ↦ Ḡ(F̄⁻¹(v))`.
    pub fn survival(reference: &Margin, truth: &Margin) -> Result<Self> {
        Self::build(reference, truth, true)
    }

    fn build(reference: &Margin, truth: &Margin, survival: bool) -> Result<Self> {
        let (rlo, rhi) = reference.support();
        let (tlo, thi) = truth.support();
        if rhi <= tlo || thi <= rlo {
            return Err(Error::Composition(format!(
                "supports of reference {reference} [{rlo}, {rhi}] and truth {truth} [{tlo}, {thi}] do not overlap"
            )));
        }
        let route = if reference == truth {
            Route::Identity
        } else {
            match reference {
                Margin::Power { base, gamma, mode } if **base == *truth => {
                    match (mode, survival) {
                        (PowerMode::Prhr, false) | (PowerMode::Phr, true) => Route::Power(*gamma),
                        _ => Route::General,
                    }
                }
                _ => Route::General,
            }
        };
        Ok(Self {
            reference: reference.clone(),
            truth: truth.clone(),
            survival,
            route,
        })
    }

    pub fn eval(&self, v: f64) -> f64 {
        if v <= 0.0 || v >= 1.0 {
            // endpoint limits
            let x = if self.survival {
                self.truth.survival_quantile(v)
            } else {
                self.truth.quantile(v)
            };
            return self.outer(x);
        }
        match self.route {
            Route::Identity => v,
            Route::Power(g) => v.powf(g),
            Route::General => {
                if self.survival {
                    self.outer(self.truth.survival_quantile(v))
                } else {
                    self.outer(self.truth.quantile(v))
                }
            }
        }
    }

    fn outer(&self, x: f64) -> f64 {
        if self.survival {
            self.reference.survival(x)
        } else {
            self.reference.cdf(x)
        }
    }
}

/// `G(F⁻¹(v))` for `v ∈ [0, 1]`.
pub fn compose_cdf(reference: &Margin, truth: &Margin, v: f64) -> Result<f64> {
    check_probability(v)?;
    Ok(Composition::cdf(reference, truth)?.eval(v))
}

/// `Ḡ(F̄⁻¹(v))` for `v ∈ [0, 1]`.
pub fn compose_survival(reference: &Margin, truth: &Margin, v: f64) -> Result<f64> {
    check_probability(v)?;
    Ok(Composition::survival(reference, truth)?.eval(v))
}

fn check_probability(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("composition argument must lie in [0, 1], got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exp(rate: f64) -> Margin {
        Margin::exponential(rate).unwrap()
    }

    fn margins() -> Vec<Margin> {
        vec![
            exp(1.0),
            exp(2.5),
            Margin::uniform(-1.0, 3.0).unwrap(),
            Margin::prhr(exp(1.0), 2.0).unwrap(),
            Margin::phr(exp(1.0), 0.5).unwrap(),
            Margin::prhr(Margin::uniform(0.0, 2.0).unwrap(), 3.0).unwrap(),
            Margin::phr(Margin::uniform(0.0, 1.0).unwrap(), 1.7).unwrap(),
        ]
    }

    #[test]
    fn constructor_validation() {
        assert!(Margin::exponential(0.0).is_err());
        assert!(Margin::uniform(1.0, 1.0).is_err());
        assert!(Margin::prhr(exp(1.0), -1.0).is_err());
    }

    #[test]
    fn roundtrips() {
        for m in margins() {
            for i in 1..100 {
                let v = i as f64 / 100.0;
                assert!((m.cdf(m.quantile(v)) - v).abs() < 1e-10, "{m} v={v}");
                assert!((m.survival(m.survival_quantile(v)) - v).abs() < 1e-10, "{m} v={v}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf_on_interior() {
        for m in margins() {
            let (lo, hi) = m.support();
            let hi = if hi.is_finite() { hi } else { m.quantile(0.999) };
            for i in 1..50 {
                let x = lo + (hi - lo) * i as f64 / 50.0;
                assert!((m.quantile(m.cdf(x)) - x).abs() < 1e-10 * (1.0 + x.abs()), "{m} x={x}");
            }
        }
    }

    #[test]
    fn cdf_grid_properties() {
        for m in margins() {
            let (lo, _) = m.support();
            assert_eq!(m.cdf(lo - 1.0), 0.0);
            assert!((m.cdf(1e6) - 1.0).abs() < 1e-12);
            let mut prev = 0.0;
            for i in 0..1000 {
                let x = lo - 0.5 + i as f64 * 0.01;
                let c = m.cdf(x);
                assert!(c >= prev, "{m}");
                prev = c;
            }
        }
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        for m in margins() {
            let (lo, _) = m.support();
            let x = m.quantile(0.7);
            let n = 20_000;
            let h = (x - lo) / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                s += m.pdf(lo + (i as f64 + 0.5) * h) * h;
            }
            assert!((s - 0.7).abs() < 1e-6, "{m}: {s}");
        }
    }

    #[test]
    fn compose_examples() {
        let f = exp(1.0);
        let g = Margin::prhr(f.clone(), 2.5).unwrap();
        for i in 0..=20 {
            let v = i as f64 / 20.0;
            assert!((compose_cdf(&g, &f, v).unwrap() - v.powf(2.5)).abs() < 1e-15);
            assert_eq!(compose_cdf(&f, &f, v).unwrap(), v);
            assert_eq!(compose_survival(&f, &f, v).unwrap(), v);
            let mu = 3.0;
            let expected = 1.0 - (1.0 - v).powf(mu);
            assert!((compose_cdf(&exp(mu), &f, v).unwrap() - expected).abs() < 1e-14);
            assert!((compose_survival(&exp(mu), &f, v).unwrap() - v.powf(mu)).abs() < 1e-14);
        }
        let h = Margin::phr(f.clone(), 0.7).unwrap();
        assert!((compose_survival(&h, &f, 0.3).unwrap() - 0.3f64.powf(0.7)).abs() < 1e-15);
        // PHR reference seen through the CDF takes the general route
        let general = compose_cdf(&h, &f, 0.3).unwrap();
        assert!((general - (1.0 - 0.7f64.powf(0.7))).abs() < 1e-14);
    }

    #[test]
    fn nested_prhr_composes_exponents() {
        let f = exp(1.0);
        let inner = Margin::prhr(f.clone(), 1.5).unwrap();
        let outer = Margin::prhr(inner, 2.0).unwrap();
        for i in 1..20 {
            let v = i as f64 / 20.0;
            assert!((compose_cdf(&outer, &f, v).unwrap() - v.powf(3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoint_limits() {
        let f = exp(1.0);
        let g = exp(2.0);
        assert_eq!(compose_cdf(&g, &f, 0.0).unwrap(), 0.0);
        assert_eq!(compose_cdf(&g, &f, 1.0).unwrap(), 1.0);
        assert_eq!(compose_survival(&g, &f, 0.0).unwrap(), 0.0);
        assert_eq!(compose_survival(&g, &f, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn non_overlapping_supports() {
        let a = Margin::uniform(0.0, 1.0).unwrap();
        let b = Margin::uniform(2.0, 3.0).unwrap();
        let err = compose_cdf(&a, &b, 0.5).unwrap_err();
        assert!(matches!(err, Error::Composition(_)));
        assert!(err.to_string().contains("do not overlap"));
        assert!(compose_cdf(&a, &a, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn compositions_monotone(rate in 0.2f64..5.0, gamma in 0.2f64..4.0, i in 0usize..999) {
            let f = exp(1.0);
            let refs = [exp(rate), Margin::phr(f.clone(), gamma).unwrap(), Margin::prhr(f.clone(), gamma).unwrap()];
            let (v, w) = (i as f64 / 1000.0, (i + 1) as f64 / 1000.0);
            for g in &refs {
                prop_assert!(compose_cdf(g, &f, v).unwrap() <= compose_cdf(g, &f, w).unwrap());
                prop_assert!(compose_survival(g, &f, v).unwrap() <= compose_survival(g, &f, w).unwrap());
            }
        }
    }
}
