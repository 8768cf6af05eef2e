//! Orthant stochastic orders and numerical checks of the ordering results.
//!
//! `X ≤_LO Y` means `F_X ≥ F_Y` pointwise; `X ≤_UO Y` means `F̄_X ≤ F̄_Y`.
//! Both are checked on a tensor grid, and the proposition harness builds
//! hypothesis-satisfying scenarios, confirms the hypotheses with these
//! checkers, then compares measure values.

use std::fmt;

use rayon::prelude::*;

use crate::bounds::{ccfi_frechet_bounds, job_envelope};
use crate::copula::{CopulaSpec, Family};
use crate::error::{Error, Result};
use crate::integrate::IntegrationConfig;
use crate::margins::{Margin, PowerMode};
use crate::measures::{MeasureJob, MeasureKind};
use crate::model::JointModel;
use crate::special::FractionalOrder;

pub const DEFAULT_GRID: usize = 101;
/// Pointwise slack for the orthant checkers.
pub const ORDER_TOLERANCE: f64 = 1e-12;
/// Default slack for measure comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub holds: bool,
    pub max_violation: f64,
    /// Grid point of the largest violation, when the order fails.
    pub witness: Option<Vec<f64>>,
}

/// Per-axis grid: quantiles of `a`'s margin at equally spaced levels, clipped
/// to the intersection of both supports.
fn axis_grid(a: &Margin, b: &Margin, n: usize) -> Result<Vec<f64>> {
    let (alo, ahi) = a.support();
    let (blo, bhi) = b.support();
    let lo = alo.max(blo);
    let hi = ahi.min(bhi);
    if !(lo < hi) {
        return Err(Error::Domain(format!(
            "supports of {a} and {b} do not overlap"
        )));
    }
    let n = n.max(2);
    let top = if hi.is_finite() {
        hi
    } else {
        a.quantile(1.0 - 1e-12).max(b.quantile(1.0 - 1e-12)).min(hi)
    };
    Ok((0..n)
        .map(|j| {
            let p = j as f64 / (n - 1) as f64;
            let x = if j + 1 == n { top } else { a.quantile(p) };
            x.clamp(lo, top)
        })
        .collect())
}

/// Largest value of `diff` over the tensor grid and where it occurs.
fn grid_max(
    a: &JointModel,
    b: &JointModel,
    n: usize,
    diff: impl Fn(&[f64]) -> Result<f64> + Sync,
) -> Result<(f64, Vec<f64>)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare models of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let axes = a
        .margins()
        .iter()
        .zip(b.margins())
        .map(|(ma, mb)| axis_grid(ma, mb, n))
        .collect::<Result<Vec<_>>>()?;
    let total: usize = axes.iter().map(Vec::len).product();
    let point = |mut idx: usize| -> Vec<f64> {
        axes.iter()
            .map(|ax| {
                let x = ax[idx % ax.len()];
                idx /= ax.len();
                x
            })
            .collect()
    };
    let values = (0..total)
        .into_par_iter()
        .map(|i| diff(&point(i)))
        .collect::<Result<Vec<_>>>()?;
    let (best, &worst) = values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("grid is non-empty");
    Ok((worst, point(best)))
}

fn report(worst: f64, at: Vec<f64>, tol: f64) -> OrderReport {
    let max_violation = worst.max(0.0);
    let holds = max_violation <= tol;
    OrderReport {
        holds,
        max_violation,
        witness: (!holds).then_some(at),
    }
}

/// `a ≤_LO b`, i.e. `F_a ≥ F_b` on the grid up to `tol`.
pub fn check_lower_orthant(a: &JointModel, b: &JointModel, grid: usize, tol: f64) -> Result<OrderReport> {
    let (worst, at) = grid_max(a, b, grid, |x| Ok(b.cdf(x) - a.cdf(x)))?;
    Ok(report(worst, at, tol))
}

/// `a ≤_UO b`, i.e. `F̄_a ≤ F̄_b` on the grid up to `tol`.
pub fn check_upper_orthant(a: &JointModel, b: &JointModel, grid: usize, tol: f64) -> Result<OrderReport> {
    a.survival_copula()?;
    b.survival_copula()?;
    let (worst, at) = grid_max(a, b, grid, |x| Ok(a.survival_fn(x)? - b.survival_fn(x)?))?;
    Ok(report(worst, at, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Proposition {
    /// `W`-envelope ≤ CCFI ≤ `M`-envelope for an independent PRHR reference.
    P3_1Sandwich,
    /// Truth margins raised to PRHR powers (report only).
    P3_2Probe,
    P3_3,
    P3_4,
    P3_5,
    P3_6_1,
    P3_6_2,
    P3_6_3,
    P4_2,
    /// Truth margins raised to PHR powers (report only).
    P4_3Probe,
    P4_4,
    P4_5,
    P4_6,
    P4_7_1,
    P4_7_2,
    P4_7_3,
    P5_1,
    P5_2,
    P5_3,
    P5_4,
}

impl Proposition {
    pub const ALL: [Proposition; 20] = [
        Proposition::P3_1Sandwich,
        Proposition::P3_2Probe,
        Proposition::P3_3,
        Proposition::P3_4,
        Proposition::P3_5,
        Proposition::P3_6_1,
        Proposition::P3_6_2,
        Proposition::P3_6_3,
        Proposition::P4_2,
        Proposition::P4_3Probe,
        Proposition::P4_4,
        Proposition::P4_5,
        Proposition::P4_6,
        Proposition::P4_7_1,
        Proposition::P4_7_2,
        Proposition::P4_7_3,
        Proposition::P5_1,
        Proposition::P5_2,
        Proposition::P5_3,
        Proposition::P5_4,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Proposition::P3_1Sandwich => "P3_1_sandwich",
            Proposition::P3_2Probe => "P3_2_probe",
            Proposition::P3_3 => "P3_3",
            Proposition::P3_4 => "P3_4",
            Proposition::P3_5 => "P3_5",
            Proposition::P3_6_1 => "P3_6_1",
            Proposition::P3_6_2 => "P3_6_2",
            Proposition::P3_6_3 => "P3_6_3",
            Proposition::P4_2 => "P4_2",
            Proposition::P4_3Probe => "P4_3_probe",
            Proposition::P4_4 => "P4_4",
            Proposition::P4_5 => "P4_5",
            Proposition::P4_6 => "P4_6",
            Proposition::P4_7_1 => "P4_7_1",
            Proposition::P4_7_2 => "P4_7_2",
            Proposition::P4_7_3 => "P4_7_3",
            Proposition::P5_1 => "P5_1",
            Proposition::P5_2 => "P5_2",
            Proposition::P5_3 => "P5_3",
            Proposition::P5_4 => "P5_4",
        }
    }

    pub fn is_probe(self) -> bool {
        matches!(self, Proposition::P3_2Probe | Proposition::P4_3Probe)
    }

    /// Propositions whose id starts with `filter` (case-insensitive).
    pub fn matching(filter: &str) -> Vec<Proposition> {
        let f = filter.to_ascii_lowercase();
        Proposition::ALL
            .into_iter()
            .filter(|p| p.id().to_ascii_lowercase().starts_with(&f))
            .collect()
    }

    pub fn scenarios(self) -> Result<Vec<Scenario>> {
        build_scenarios(self)
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Three models and an order, enough to instantiate any proposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub proposition: Proposition,
    pub name: String,
    pub x: JointModel,
    pub y: JointModel,
    pub z: JointModel,
    pub eta: FractionalOrder,
    pub integration: IntegrationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        }
    }
}

/// One compared inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: &'static str,
    pub scenario: String,
    /// Human-readable statement, e.g. `CCFI(X,Y) <= CCFI(X,Z)`.
    pub statement: String,
    pub relation: Relation,
    pub hypotheses_ok: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// Signed slack: non-negative when the relation holds (`Le`, `Ge`);
    /// absolute difference for `Eq`.
    pub gap: f64,
    /// Whether the relation holds numerically within the tolerance.
    pub holds: bool,
    /// `None` for probes and for scenarios whose hypotheses are unmet.
    pub pass: Option<bool>,
    pub note: String,
}

impl Record {
    pub fn is_failure(&self) -> bool {
        self.pass == Some(false)
    }
}

struct Ctx<'a> {
    s: &'a Scenario,
    tol: f64,
    hypotheses_ok: bool,
    hyp_note: String,
    out: Vec<Record>,
}

impl<'a> Ctx<'a> {
    fn measure(&self, kind: MeasureKind, truth: &JointModel, reference: &JointModel) -> Result<f64> {
        let job = MeasureJob::new(kind, truth.clone(), reference.clone(), self.s.eta, self.s.integration)?;
        Ok(job.evaluate()?.value)
    }

    fn compare(&mut self, statement: String, relation: Relation, lhs: f64, rhs: f64, probe: bool, note: &str) {
        let gap = match relation {
            Relation::Le => rhs - lhs,
            Relation::Ge => lhs - rhs,
            Relation::Eq => (lhs - rhs).abs(),
        };
        let holds = match relation {
            Relation::Eq => gap <= self.tol,
            _ => gap >= -self.tol,
        };
        let pass = (!probe && self.hypotheses_ok).then_some(holds);
        let mut notes = Vec::new();
        if !self.hypotheses_ok {
            notes.push(format!("hypotheses unmet: {}", self.hyp_note));
        }
        if probe {
            notes.push(format!("probe: {}", if holds { "holds" } else { "does not hold" }));
        }
        if !note.is_empty() {
            notes.push(note.to_string());
        }
        self.out.push(Record {
            id: self.s.proposition.id(),
            scenario: self.s.name.clone(),
            statement,
            relation,
            hypotheses_ok: self.hypotheses_ok,
            lhs,
            rhs,
            gap,
            holds,
            pass,
            note: notes.join("; "),
        });
    }

    fn require(&mut self, ok: bool, what: &str) {
        if !ok {
            self.hypotheses_ok = false;
            if !self.hyp_note.is_empty() {
                self.hyp_note.push_str(", ");
            }
            self.hyp_note.push_str(what);
        }
    }
}

fn lo(a: &JointModel, b: &JointModel) -> Result<bool> {
    Ok(check_lower_orthant(a, b, DEFAULT_GRID, ORDER_TOLERANCE)?.holds)
}

fn uo(a: &JointModel, b: &JointModel) -> Result<bool> {
    Ok(check_upper_orthant(a, b, DEFAULT_GRID, ORDER_TOLERANCE)?.holds)
}

/// Exponents `γᵢ` when every margin of `m` is `base_i` raised in `mode`.
fn power_exponents(base: &JointModel, m: &JointModel, mode: PowerMode) -> Option<Vec<f64>> {
    base.margins()
        .iter()
        .zip(m.margins())
        .map(|(b, mi)| match mi {
            Margin::Power { base: inner, gamma, mode: md } if **inner == *b && *md == mode => Some(*gamma),
            _ => None,
        })
        .collect()
}

fn radially_symmetric(m: &JointModel) -> Result<bool> {
    let s = m.survival_copula()?;
    let c = m.structure();
    let n = 21;
    for i in 0..=n {
        for j in 0..=n {
            let p = [i as f64 / n as f64, j as f64 / n as f64];
            if (s.value(&p) - c.value(&p)).abs() > 1e-12 {
                return Ok(false);
            }
        }
    }
    // margins symmetric about their centres
    Ok(m.margins().iter().all(|mg| matches!(mg, Margin::Uniform { .. })))
}

const C: MeasureKind = MeasureKind::Ccfi;
const S: MeasureKind = MeasureKind::Scfi;

/// Evaluates one scenario; hypotheses are checked before any measure.
pub fn verify_scenario(s: &Scenario, tol: f64) -> Result<Vec<Record>> {
    let mut c = Ctx {
        s,
        tol,
        hypotheses_ok: true,
        hyp_note: String::new(),
        out: Vec::new(),
    };
    let (x, y, z) = (&s.x, &s.y, &s.z);
    match s.proposition {
        Proposition::P3_1Sandwich => {
            let exps = power_exponents(x, y, PowerMode::Prhr);
            c.require(y.copula().family() == Family::Independence, "reference copula is independence");
            c.require(exps.as_ref().is_some_and(|e| e.len() == 2), "reference margins are PRHR powers of the truth margins");
            let job = MeasureJob::new(C, x.clone(), y.clone(), s.eta, s.integration)?;
            let value = job.evaluate()?.value;
            let env = job_envelope(&job)?;
            let note = match exps {
                Some(e) if e.len() == 2 => {
                    let b = ccfi_frechet_bounds(s.eta, e[0], e[1])?;
                    format!(
                        "closed forms from the additive kernel split: w_side = {:.10}, m_side = {:.10}",
                        b.w_side, b.m_side
                    )
                }
                _ => String::new(),
            };
            c.compare("W-envelope <= CCFI(X,Y)".into(), Relation::Le, env.w.value, value, false, &note);
            c.compare("CCFI(X,Y) <= M-envelope".into(), Relation::Le, value, env.m.value, false, &note);
        }
        Proposition::P3_2Probe | Proposition::P4_3Probe => {
            let (kind, mode, name) = if s.proposition == Proposition::P3_2Probe {
                (C, PowerMode::Prhr, "CCFI")
            } else {
                (S, PowerMode::Phr, "SCFI")
            };
            let exps = power_exponents(x, z, mode);
            c.require(z.copula() == x.copula(), "Z shares the copula of X");
            c.require(exps.is_some(), "Z margins are powers of the X margins");
            let e = exps.unwrap_or_default();
            let zy = c.measure(kind, z, y)?;
            let xy = c.measure(kind, x, y)?;
            let all_above = e.iter().all(|&g| g > 1.0);
            let stated = if all_above { Relation::Ge } else { Relation::Le };
            c.compare(format!("{name}(Z,Y) {} {name}(X,Y)", stated.symbol()), stated, zy, xy, true, "stated direction");
            let prod: f64 = e.iter().product();
            c.compare(
                format!("{name}(Z,Y) {} prod(gamma)*{name}(X,Y)", stated.flip().symbol()),
                stated.flip(),
                zy,
                prod * xy,
                true,
                "scaled direction from the proof",
            );
        }
        Proposition::P3_3 | Proposition::P4_4 => {
            let (kind, mode, name) = if s.proposition == Proposition::P3_3 {
                (C, PowerMode::Prhr, "CCFI")
            } else {
                (S, PowerMode::Phr, "SCFI")
            };
            let g = power_exponents(x, y, mode);
            let d = power_exponents(x, z, mode);
            c.require(z.copula() == y.copula(), "Z and Y share a copula");
            c.require(
                matches!((&g, &d), (Some(g), Some(d)) if g.iter().zip(d).all(|(a, b)| a < b)),
                "gamma_i < delta_i power exponents",
            );
            if s.proposition == Proposition::P4_4 {
                c.require(g.as_ref().is_some_and(|g| g.iter().all(|&v| v > 1.0)), "gamma_i > 1");
            }
            let xy = c.measure(kind, x, y)?;
            let xz = c.measure(kind, x, z)?;
            c.compare(format!("{name}(X,Y) <= {name}(X,Z)"), Relation::Le, xy, xz, false, "");
        }
        Proposition::P3_4 | Proposition::P5_1 => {
            let (kind, name) = if s.proposition == Proposition::P3_4 {
                (C, "CCFI")
            } else {
                (MeasureKind::Cocfi, "CoCFI")
            };
            let h = lo(x, y)?;
            c.require(h, "X <=_LO Y");
            let zx = c.measure(kind, z, x)?;
            let zy = c.measure(kind, z, y)?;
            let note = if s.proposition == Proposition::P5_1 {
                format!("reverse direction {name}(Z,X) >= {name}(Z,Y) {}", holds_word(zx - zy >= -tol))
            } else {
                String::new()
            };
            c.compare(format!("{name}(Z,X) <= {name}(Z,Y)"), Relation::Le, zx, zy, false, &note);
        }
        Proposition::P3_5 | Proposition::P5_2 => {
            let (kind, name) = if s.proposition == Proposition::P3_5 {
                (C, "CCFI")
            } else {
                (MeasureKind::Cocfi, "CoCFI")
            };
            let h = lo(x, y)?;
            c.require(h, "X <=_LO Y");
            c.require(x.margins() == y.margins(), "X_i =st Y_i");
            let xz = c.measure(kind, x, z)?;
            let yz = c.measure(kind, y, z)?;
            let note = if s.proposition == Proposition::P5_2 {
                format!("reverse direction {name}(X,Z) <= {name}(Y,Z) {}", holds_word(yz - xz >= -tol))
            } else {
                String::new()
            };
            c.compare(format!("{name}(X,Z) >= {name}(Y,Z)"), Relation::Ge, xz, yz, false, &note);
        }
        Proposition::P3_6_1 | Proposition::P4_7_1 => {
            let (kind, name) = chain_kind(s.proposition);
            let (h1, h2) = (lo(z, y)?, lo(z, x)?);
            c.require(h1, "Z <=_LO Y");
            c.require(h2, "Z <=_LO X");
            c.require(z.margins() == x.margins(), "Z_i =st X_i");
            let xz = c.measure(kind, x, z)?;
            let xy = c.measure(kind, x, y)?;
            let zy = c.measure(kind, z, y)?;
            c.compare(format!("{name}(X,Z) <= {name}(X,Y)"), Relation::Le, xz, xy, false, "");
            c.compare(format!("{name}(X,Y) <= {name}(Z,Y)"), Relation::Le, xy, zy, false, "");
        }
        Proposition::P3_6_2 | Proposition::P4_7_2 => {
            let (kind, name) = chain_kind(s.proposition);
            let (h1, h2) = (lo(x, z)?, lo(z, y)?);
            c.require(h1, "X <=_LO Z");
            c.require(h2, "Z <=_LO Y");
            c.require(z.margins() == x.margins(), "Z_i =st X_i");
            let xy = c.measure(kind, x, y)?;
            let zy = c.measure(kind, z, y)?;
            let xz = c.measure(kind, x, z)?;
            c.compare(format!("{name}(X,Y) >= {name}(Z,Y)"), Relation::Ge, xy, zy, false, "");
            c.compare(format!("{name}(X,Y) >= {name}(X,Z)"), Relation::Ge, xy, xz, false, "");
        }
        Proposition::P3_6_3 | Proposition::P4_7_3 => {
            let (kind, name) = chain_kind(s.proposition);
            let (h1, h2) = (lo(y, z)?, lo(x, z)?);
            c.require(h1, "Y <=_LO Z");
            c.require(h2, "X <=_LO Z");
            c.require(z.margins() == x.margins(), "Z_i =st X_i");
            let zy = c.measure(kind, z, y)?;
            let xy = c.measure(kind, x, y)?;
            let xz = c.measure(kind, x, z)?;
            c.compare(format!("{name}(Z,Y) <= {name}(X,Y)"), Relation::Le, zy, xy, false, "");
            c.compare(format!("{name}(X,Y) <= {name}(X,Z)"), Relation::Le, xy, xz, false, "");
            c.compare(
                format!("{name}(X,Y) >= {name}(X,Z)"),
                Relation::Ge,
                xy,
                xz,
                true,
                "second inequality as displayed in the chain",
            );
        }
        Proposition::P4_2 => {
            c.require(radially_symmetric(x)?, "X radially symmetric");
            c.require(radially_symmetric(y)?, "Y radially symmetric");
            c.require(
                x.margins().iter().zip(y.margins()).all(|(a, b)| a.support() == b.support()),
                "common support",
            );
            let sc = c.measure(S, x, y)?;
            let cc = c.measure(C, x, y)?;
            c.compare("SCFI(X,Y) == CCFI(X,Y)".into(), Relation::Eq, sc, cc, false, "");
        }
        Proposition::P4_5 | Proposition::P5_3 => {
            let (kind, name, rel) = if s.proposition == Proposition::P4_5 {
                (S, "SCFI", Relation::Ge)
            } else {
                (MeasureKind::Dcfi, "DCFI", Relation::Le)
            };
            let h = uo(x, y)?;
            c.require(h, "X <=_UO Y");
            let zx = c.measure(kind, z, x)?;
            let zy = c.measure(kind, z, y)?;
            c.compare(format!("{name}(Z,X) {} {name}(Z,Y)", rel.symbol()), rel, zx, zy, false, "");
        }
        Proposition::P4_6 | Proposition::P5_4 => {
            let (kind, name) = if s.proposition == Proposition::P4_6 {
                (S, "SCFI")
            } else {
                (MeasureKind::Dcfi, "DCFI")
            };
            let h = uo(x, y)?;
            c.require(h, "X <=_UO Y");
            c.require(x.margins() == y.margins(), "X_i =st Y_i");
            let xz = c.measure(kind, x, z)?;
            let yz = c.measure(kind, y, z)?;
            let note = if s.proposition == Proposition::P5_4 {
                format!("reverse direction {name}(X,Z) >= {name}(Y,Z) {}", holds_word(xz - yz >= -tol))
            } else {
                String::new()
            };
            c.compare(format!("{name}(X,Z) <= {name}(Y,Z)"), Relation::Le, xz, yz, false, &note);
        }
    }
    Ok(c.out)
}

impl Relation {
    fn flip(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

fn holds_word(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "does not hold"
    }
}

fn chain_kind(p: Proposition) -> (MeasureKind, &'static str) {
    match p {
        Proposition::P4_7_1 | Proposition::P4_7_2 | Proposition::P4_7_3 => (S, "SCFI"),
        _ => (C, "CCFI"),
    }
}

/// Runs every scenario of the matching propositions.
pub fn verify_proposition(p: Proposition, tol: f64) -> Result<Vec<Record>> {
    let scenarios = p.scenarios()?;
    let nested = scenarios
        .par_iter()
        .map(|s| verify_scenario(s, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// All records for propositions whose id starts with `filter` (all when
/// `None`), in a fixed order.
pub fn run_suite(filter: Option<&str>, tol: f64) -> Result<Vec<Record>> {
    let props = match filter {
        Some(f) => Proposition::matching(f),
        None => Proposition::ALL.to_vec(),
    };
    if props.is_empty() {
        return Err(Error::Parameter(format!(
            "no proposition matches '{}'",
            filter.unwrap_or_default()
        )));
    }
    let nested = props
        .par_iter()
        .map(|&p| verify_proposition(p, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// scenario construction

fn cop(f: Family, theta: f64) -> Result<CopulaSpec> {
    CopulaSpec::bivariate(f, theta)
}

fn biv(f: Family, theta: f64, m: &Margin) -> Result<JointModel> {
    JointModel::bivariate(cop(f, theta)?, m.clone())
}

fn pair(f: Family, theta: f64, m1: &Margin, m2: &Margin) -> Result<JointModel> {
    JointModel::new(cop(f, theta)?, vec![m1.clone(), m2.clone()])
}

fn powers(c: CopulaSpec, base: &JointModel, exps: &[f64], mode: PowerMode) -> Result<JointModel> {
    let margins = base
        .margins()
        .iter()
        .zip(exps)
        .map(|(m, &g)| Margin::power(m.clone(), g, mode))
        .collect::<Result<Vec<_>>>()?;
    JointModel::new(c, margins)
}

type OrderCheck = fn(&JointModel, &JointModel) -> Result<bool>;

/// `(smaller, larger)` in the given order, decided by the grid checker.
fn ordered(a: JointModel, b: JointModel, check: OrderCheck) -> Result<(JointModel, JointModel)> {
    if check(&a, &b)? {
        Ok((a, b))
    } else if check(&b, &a)? {
        Ok((b, a))
    } else {
        Err(Error::Parameter(format!("models {a} and {b} are not ordered")))
    }
}

/// Three models sorted ascending in the given order.
fn ordered3(ms: [JointModel; 3], check: OrderCheck) -> Result<[JointModel; 3]> {
    let [a, b, c] = ms;
    let (a, b) = ordered(a, b, check)?;
    let (b, c) = ordered(b, c, check)?;
    let (a, b) = ordered(a, b, check)?;
    Ok([a, b, c])
}

fn exp(rate: f64) -> Result<Margin> {
    Margin::exponential(rate)
}

fn unit() -> Result<Margin> {
    Margin::uniform(0.0, 1.0)
}

fn build_scenarios(p: Proposition) -> Result<Vec<Scenario>> {
    let cfg = IntegrationConfig::default();
    let e = |v: f64| FractionalOrder::new(v);
    let mk = |name: String, x: JointModel, y: JointModel, z: JointModel, eta: f64| -> Result<Scenario> {
        Ok(Scenario {
            proposition: p,
            name,
            x,
            y,
            z,
            eta: e(eta)?,
            integration: cfg,
        })
    };
    let e1 = exp(1.0)?;
    let indep = CopulaSpec::independence(2)?;
    let mut out = Vec::new();
    match p {
        Proposition::P3_1Sandwich => {
            let x = biv(Family::Gumbel, 2.0, &e1)?;
            for eta in [0.3, 0.5, 0.7, 0.9] {
                for g in [0.5, 2.0, 3.0] {
                    for d in [0.5, 2.0, 3.0] {
                        let y = powers(indep, &x, &[g, d], PowerMode::Prhr)?;
                        let name = format!("gumbel(2) vs independence, eta={eta}, gamma={g}, delta={d}");
                        out.push(mk(name, x.clone(), y, x.clone(), eta)?);
                    }
                }
            }
        }
        Proposition::P3_2Probe | Proposition::P4_3Probe => {
            let mode = if p == Proposition::P3_2Probe {
                PowerMode::Prhr
            } else {
                PowerMode::Phr
            };
            let x = biv(Family::Gumbel, 2.0, &e1)?;
            let y = pair(Family::Frank, 2.0, &exp(1.5)?, &exp(2.0)?)?;
            for g in [[1.5, 2.0], [0.5, 0.7]] {
                let z = powers(*x.copula(), &x, &g, mode)?;
                let name = format!("gumbel(2) truth, frank(2) reference, gamma=({}, {})", g[0], g[1]);
                out.push(mk(name, x.clone(), y.clone(), z, 0.5)?);
            }
        }
        Proposition::P3_3 | Proposition::P4_4 => {
            let mode = if p == Proposition::P3_3 {
                PowerMode::Prhr
            } else {
                PowerMode::Phr
            };
            let cases: [(Family, f64, CopulaSpec, [Margin; 2], [f64; 2], [f64; 2]); 3] = [
                (Family::Gumbel, 2.0, indep, [e1.clone(), e1.clone()], [1.2, 1.5], [2.0, 3.0]),
                (Family::Fgm, 0.5, indep, [e1.clone(), e1.clone()], [1.2, 1.5], [2.0, 3.0]),
                (
                    Family::Frank,
                    3.0,
                    cop(Family::Joe, 2.0)?,
                    [e1.clone(), unit()?],
                    [1.3, 1.1],
                    [1.5, 2.0],
                ),
            ];
            for (f, t, cy, m, g, d) in cases {
                let x = pair(f, t, &m[0], &m[1])?;
                let y = powers(cy, &x, &g, mode)?;
                let z = powers(cy, &x, &d, mode)?;
                let name = format!("{} truth, {} reference, gamma=({}, {}), delta=({}, {})", x.copula(), cy, g[0], g[1], d[0], d[1]);
                out.push(mk(name, x, y, z, 0.5)?);
            }
        }
        Proposition::P3_4 | Proposition::P3_5 | Proposition::P5_1 | Proposition::P5_2 => {
            let check: OrderCheck = lo;
            for (name, a, b, z, eta) in pair_cases()? {
                let (x, y) = ordered(a, b, check)?;
                out.push(mk(name, x, y, z, eta)?);
            }
        }
        Proposition::P4_5 | Proposition::P4_6 | Proposition::P5_3 | Proposition::P5_4 => {
            let check: OrderCheck = uo;
            for (name, a, b, z, eta) in pair_cases()? {
                let (x, y) = ordered(a, b, check)?;
                out.push(mk(name, x, y, z, eta)?);
            }
        }
        Proposition::P3_6_1
        | Proposition::P3_6_2
        | Proposition::P3_6_3
        | Proposition::P4_7_1
        | Proposition::P4_7_2
        | Proposition::P4_7_3 => {
            // radially asymmetric families for the survival version, so that
            // it does not collapse onto the cumulative one
            let families = if chain_kind(p).0 == S {
                [
                    ("gumbel(1.2, 2, 4), exponential(1) margins", Family::Gumbel, [1.2, 2.0, 4.0], e1.clone()),
                    ("joe(1.2, 2, 4), uniform(0, 1) margins", Family::Joe, [1.2, 2.0, 4.0], unit()?),
                ]
            } else {
                [
                    ("frank(1, 3, 6), exponential(1) margins", Family::Frank, [1.0, 3.0, 6.0], e1.clone()),
                    ("fgm(-0.6, 0.2, 0.9), uniform(0, 1) margins", Family::Fgm, [-0.6, 0.2, 0.9], unit()?),
                ]
            };
            for (name, f, thetas, m) in families {
                let [small, mid, large] = ordered3(
                    [biv(f, thetas[0], &m)?, biv(f, thetas[1], &m)?, biv(f, thetas[2], &m)?],
                    lo,
                )?;
                // order positions demanded by each part
                let (x, y, z) = match p {
                    Proposition::P3_6_1 | Proposition::P4_7_1 => (mid, large, small),
                    Proposition::P3_6_2 | Proposition::P4_7_2 => (small, large, mid),
                    _ => (mid, small, large),
                };
                out.push(mk(name.to_string(), x, y, z, 0.5)?);
            }
        }
        Proposition::P4_2 => {
            for theta in [1.0, 3.0] {
                for eta in [0.4, 0.7] {
                    let x = biv(Family::Frank, theta, &unit()?)?;
                    let name = format!("frank({theta}) both, uniform(0, 1) margins, eta={eta}");
                    out.push(mk(name, x.clone(), x.clone(), x, eta)?);
                }
            }
            let m = Margin::uniform(-1.0, 1.0)?;
            let x = biv(Family::Frank, -2.0, &m)?;
            let y = biv(Family::Fgm, 0.4, &m)?;
            out.push(mk("frank(-2) truth, fgm(0.4) reference, uniform(-1, 1) margins".into(), x.clone(), y, x, 0.5)?);
        }
    }
    Ok(out)
}

/// Ordered-pair candidates `(name, a, b, third model, eta)`; orientation is
/// fixed later by the checker.
fn pair_cases() -> Result<Vec<(String, JointModel, JointModel, JointModel, f64)>> {
    let e1 = exp(1.0)?;
    let e2 = exp(2.0)?;
    let u = unit()?;
    Ok(vec![
        (
            "fgm(-0.5) vs fgm(0.5), exponential(1) margins; third model gumbel(2) with exponential(2), exponential(3)".into(),
            biv(Family::Fgm, -0.5, &e1)?,
            biv(Family::Fgm, 0.5, &e1)?,
            pair(Family::Gumbel, 2.0, &e2, &exp(3.0)?)?,
            0.5,
        ),
        (
            "frank(1) vs frank(4), exponential(2) margins; third model joe(2) with exponential(1)".into(),
            biv(Family::Frank, 1.0, &e2)?,
            biv(Family::Frank, 4.0, &e2)?,
            biv(Family::Joe, 2.0, &e1)?,
            0.7,
        ),
        (
            "frank(-2) vs amh(0.5), uniform(0, 1) margins; third model gumbel(1.5) with uniform(0, 1)".into(),
            biv(Family::Frank, -2.0, &u)?,
            biv(Family::Amh, 0.5, &u)?,
            biv(Family::Gumbel, 1.5, &u)?,
            0.3,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(f: Family, t: f64) -> JointModel {
        biv(f, t, &exp(1.0).unwrap()).unwrap()
    }

    #[test]
    fn orders_are_reflexive() {
        let a = m(Family::Gumbel, 2.0);
        let r = check_lower_orthant(&a, &a, DEFAULT_GRID, 0.0).unwrap();
        assert!(r.holds && r.max_violation == 0.0 && r.witness.is_none());
        let r = check_upper_orthant(&a, &a, DEFAULT_GRID, 0.0).unwrap();
        assert!(r.holds && r.max_violation == 0.0);
    }

    #[test]
    fn fgm_orientation() {
        // larger theta, larger CDF: LO-smaller
        let hi = m(Family::Fgm, 0.5);
        let lo_ = m(Family::Fgm, -0.5);
        assert!(check_lower_orthant(&hi, &lo_, DEFAULT_GRID, ORDER_TOLERANCE).unwrap().holds);
        let back = check_lower_orthant(&lo_, &hi, DEFAULT_GRID, ORDER_TOLERANCE).unwrap();
        assert!(!back.holds && back.witness.is_some() && back.max_violation > 1e-3);
        assert!(check_upper_orthant(&lo_, &hi, DEFAULT_GRID, ORDER_TOLERANCE).unwrap().holds);
    }

    #[test]
    fn frechet_bounds_are_ordered() {
        let w = m(Family::Countermonotone, 0.0);
        let mm = m(Family::Comonotone, 0.0);
        let r = check_lower_orthant(&mm, &w, DEFAULT_GRID, 0.0).unwrap();
        assert!(r.holds);
        assert!(check_upper_orthant(&w, &mm, DEFAULT_GRID, 0.0).unwrap().holds);
        assert!(!check_lower_orthant(&w, &mm, DEFAULT_GRID, 0.0).unwrap().holds);
    }

    #[test]
    fn non_overlapping_supports_rejected() {
        let a = biv(Family::Gumbel, 2.0, &Margin::uniform(0.0, 1.0).unwrap()).unwrap();
        let b = biv(Family::Gumbel, 2.0, &Margin::uniform(2.0, 3.0).unwrap()).unwrap();
        assert!(matches!(check_lower_orthant(&a, &b, 11, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn every_proposition_has_two_scenarios_with_hypotheses() {
        for p in Proposition::ALL {
            let s = p.scenarios().unwrap();
            assert!(s.len() >= 2, "{p}");
        }
    }

    #[test]
    fn matching_filters_by_prefix() {
        assert_eq!(Proposition::matching("P3_6").len(), 3);
        assert_eq!(Proposition::matching("p4_2"), vec![Proposition::P4_2]);
        assert!(Proposition::matching("P9").is_empty());
        assert!(run_suite(Some("P9"), 1e-6).is_err());
    }

    #[test]
    fn p3_3_example_holds() {
        let recs = run_suite(Some("P3_3"), 1e-8).unwrap();
        assert!(recs.len() >= 2);
        for r in recs {
            assert!(r.hypotheses_ok);
            assert_eq!(r.pass, Some(true), "{r:?}");
            assert!(r.gap > 0.0);
        }
    }
}
