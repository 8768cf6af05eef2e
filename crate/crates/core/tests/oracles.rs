//! Measure values against reference integrals computed independently in
//! 25–40 digit arithmetic (tanh-sinh quadrature of the defining integrals).

use copfrac::{
    CopulaSpec, Family, FractionalOrder, IntegrationConfig, JointModel, Margin, MeasureJob, MeasureKind, Result,
};

fn model(family: Family, theta: f64, rates: [f64; 2]) -> Result<JointModel> {
    JointModel::new(
        CopulaSpec::bivariate(family, theta)?,
        vec![Margin::exponential(rates[0])?, Margin::exponential(rates[1])?],
    )
}

fn value(kind: MeasureKind, truth: JointModel, reference: JointModel, eta: f64) -> Result<f64> {
    let job = MeasureJob::new(kind, truth, reference, FractionalOrder::new(eta)?, IntegrationConfig::default())?;
    Ok(job.evaluate()?.value)
}

fn frank_joe(kind: MeasureKind) -> Result<f64> {
    value(
        kind,
        model(Family::Frank, 2.0, [1.0, 1.0])?,
        model(Family::Joe, 2.0, [2.0, 3.0])?,
        0.5,
    )
}

fn close(got: f64, want: f64, rel: f64) {
    assert!((got - want).abs() <= rel * want.abs(), "got {got}, want {want}");
}

#[test]
fn ccfi_gumbel_against_fgm() -> Result<()> {
    let truth = || model(Family::Gumbel, 2.0, [1.0, 1.0]);
    let reference = || model(Family::Fgm, 0.5, [2.0, 3.0]);
    close(value(MeasureKind::Ccfi, truth()?, reference()?, 0.5)?, 0.0949704449073719, 1e-12);
    close(value(MeasureKind::Ccfi, truth()?, reference()?, 0.3)?, 0.16202008207505308, 1e-12);
    Ok(())
}

#[test]
fn scfi_frank_against_joe() -> Result<()> {
    close(frank_joe(MeasureKind::Scfi)?, 1.4624132980256814, 1e-9);
    Ok(())
}

#[test]
fn cocfi_frank_against_joe() -> Result<()> {
    close(frank_joe(MeasureKind::Cocfi)?, 0.015555287720951667, 1e-10);
    Ok(())
}

#[test]
fn dcfi_frank_against_joe() -> Result<()> {
    close(frank_joe(MeasureKind::Dcfi)?, 0.014962233762968144, 1e-10);
    Ok(())
}

#[test]
fn gauss_legendre_agrees_with_monte_carlo() -> Result<()> {
    let job = MeasureJob::new(
        MeasureKind::Cocfi,
        model(Family::Frank, 2.0, [1.0, 1.0])?,
        model(Family::Joe, 2.0, [2.0, 3.0])?,
        FractionalOrder::new(0.5)?,
        IntegrationConfig::monte_carlo(300_000, 11),
    )?;
    let mc = job.evaluate()?;
    assert!((mc.value - 0.015555287720951667).abs() < 4.0 * mc.error_estimate);
    Ok(())
}
