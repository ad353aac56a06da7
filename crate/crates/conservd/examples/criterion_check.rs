//! The log-power criterion on the planar drift-compensated system: with the
//! reference constants the rotational drift cancels the unbounded diffusion
//! entry exactly and the verdict is satisfied; with the drift removed the
//! same criterion is violated with a sampled witness point.
//!
//! ```bash
//! cargo run --release --example criterion_check
//! ```

use conservd::criteria::{
    auto_constants, check_gauge_criterion, CheckOptions, CriterionKind, GaugeConstants,
    GaugeVariant,
};
use conservd::registry;
use conservd::sampling::SamplePlan;

fn main() -> conservd::Result<()> {
    let entry = registry::lookup("gim-trutnau-2d")?;
    let schedule = [1u32, 2, 4, 8, 16, 32, 64];
    let plan = SamplePlan::default().with_samples(150_000).with_seed(42);
    let opts = CheckOptions::default();
    let constants = GaugeConstants {
        m: None, // fitted
        c: 5.0,
        beta: 1.0,
        alpha: Some(0.8),
    };

    let data = entry.form_data(false);
    let verdict = check_gauge_criterion(
        &data,
        GaugeVariant::LogPower,
        constants,
        &schedule,
        &plan,
        &opts,
        "g1i",
    )?;
    println!("with drift:    {:?}", verdict.verdict);
    println!("  fitted M = {:.4}", verdict.constants["M"]);
    println!("  A_hat growth exponent = {:.3}", verdict.growth_exponent.unwrap());

    let zero_drift = entry.form_data(true);
    let verdict = check_gauge_criterion(
        &zero_drift,
        GaugeVariant::LogPower,
        constants,
        &schedule,
        &plan,
        &opts,
        "g1i",
    )?;
    println!("\nwithout drift: {:?}", verdict.verdict);
    if let Some(w) = &verdict.witness {
        println!(
            "  witness point {:?}, ratio {:.3}",
            w.point.as_ref().unwrap(),
            w.value.unwrap()
        );
    }

    // The constant grid search also fails wholesale without the drift.
    let fit = auto_constants(
        CriterionKind::Gauge(GaugeVariant::LogPower),
        &zero_drift,
        &schedule,
        &plan,
        &opts,
        "g1i",
    )?;
    println!("  grid search over (C, beta): {}", match fit {
        Some(_) => "found passing constants (unexpected)",
        None => "no admissible constants (expected)",
    });
    Ok(())
}
