//! End-to-end pipeline through the library API: resolve a model, run its
//! canonical criterion plus the scale/speed oracle, and write the versioned
//! JSON report with its CSV views.
//!
//! ```bash
//! cargo run --release --example full_report
//! ```

use conservd::criteria::{check_gauge_criterion, CheckOptions, GaugeConstants, GaugeVariant};
use conservd::growth::{build_caches, build_growth_table};
use conservd::oracle::{feller_test, FellerConfig};
use conservd::registry;
use conservd::report::{write_outputs, GrowthTableReport, Report};
use conservd::sampling::SamplePlan;

fn main() -> conservd::Result<()> {
    let entry = registry::lookup("gim-trutnau-1d")?;
    let data = entry.form_data(false);
    let schedule = [1u32, 2, 4, 8, 16, 32, 64];
    let plan = SamplePlan::default().with_samples(100_000).with_seed(42);
    let constants = GaugeConstants {
        m: None,
        c: 3.0,
        beta: 1.0,
        alpha: Some(5.0 / 6.0),
    };

    let verdict = check_gauge_criterion(
        &data,
        GaugeVariant::LogPower,
        constants,
        &schedule,
        &plan,
        &CheckOptions::default(),
        "cor13i",
    )?;
    println!("criterion cor13i: {:?}", verdict.verdict);

    let feller = feller_test(entry.a.entry(0, 0), &entry.weight, &FellerConfig::default())?;
    println!(
        "scale/speed oracle: positive {:?}, negative {:?}",
        feller.positive.verdict, feller.negative.verdict
    );

    let caches = build_caches(&data, &schedule, &plan)?;
    let phi = GaugeVariant::LogPower.phi_family(3.0, 1.0);
    let table = build_growth_table(&data, &phi, &schedule, &plan, &caches)?;
    let t = verdict.decay_time.unwrap_or(1.0);

    let mut report = Report::new("analyze", plan.seed);
    report.registry = Some(entry.name.to_string());
    report.growth_table = Some(GrowthTableReport::new(&table, t));
    report.criteria = vec![verdict];
    report.feller = Some(feller);

    let dir = std::env::temp_dir().join("conservd-full-report");
    let written = write_outputs(&dir, &report, true, true)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
