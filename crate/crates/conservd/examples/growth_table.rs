//! Build the annulus growth table for a registry system and print the
//! quantities the criteria consume: a_n, b_n, c_n, the annulus measure, the
//! drift L² norm, Â_n, and the decay sequence log q_n.
//!
//! ```bash
//! cargo run --release --example growth_table
//! ```

use conservd::growth::{build_caches, build_growth_table, PhiFamily};
use conservd::registry;
use conservd::sampling::SamplePlan;

fn main() -> conservd::Result<()> {
    let entry = registry::lookup("gim-trutnau-1d")?;
    let data = entry.form_data(false);
    let schedule = [1u32, 2, 4, 8, 16, 32, 64];
    let plan = SamplePlan::default().with_samples(100_000).with_seed(42);
    let phi = PhiFamily::LogPower { c: 3.0, beta: 1.0 };

    let caches = build_caches(&data, &schedule, &plan)?;
    let table = build_growth_table(&data, &phi, &schedule, &plan, &caches)?;
    let t = table.default_decay_time(5.0 / 6.0);
    let log_q = table.decay_log_sequence(t);

    println!("weight family: {phi:?},  decay time T = {t:.4}\n");
    println!(
        "{:>4} {:>14} {:>14} {:>10} {:>12} {:>12} {:>14} {:>10}",
        "n", "a_n", "b_n", "c_n", "vol_n", "bnorm_n", "A_hat_n", "log_q_n"
    );
    for (row, lq) in table.rows.iter().zip(&log_q) {
        println!(
            "{:>4} {:>14.4} {:>14.4} {:>10.4} {:>12.4} {:>12.4} {:>14.4} {:>10.4}",
            row.n,
            row.a_sup.value,
            row.b_sup.value,
            row.c_sup.value,
            row.volume.value,
            row.drift_norm.value,
            row.a_hat,
            lq
        );
    }
    println!(
        "\nfitted growth exponent of A_hat_n: {:.3}",
        table.fitted_growth_exponent().unwrap()
    );
    Ok(())
}
