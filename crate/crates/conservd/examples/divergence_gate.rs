//! The divergence-free drift gate: ∫⟨B, ∇f⟩ φ^p dx must vanish for every
//! smooth compactly supported f. Stream-function fields pass; gradient-like
//! fields fail with a clear signed estimate.
//!
//! ```bash
//! cargo run --release --example divergence_gate
//! ```

use conservd::divergence::{check_divergence_free, DivergenceOptions};
use conservd::field::{ScalarField, VectorField};
use conservd::registry;

fn main() -> conservd::Result<()> {
    let opts = DivergenceOptions {
        seed: 7,
        ..DivergenceOptions::default()
    };

    // The planar registry drift B = (x2^2, -x1^4)/phi against phi dx.
    let entry = registry::lookup("gim-trutnau-2d")?;
    let report = check_divergence_free(&entry.b, &entry.weight, entry.mu_power, &opts)?;
    println!(
        "planar drift-compensated system: {} ({} bump tests)",
        if report.pass { "PASS" } else { "FAIL" },
        report.tests.len()
    );

    // A rotated stream field (d2 h, -d1 h) is divergence free for any h;
    // here h = x1^2 x2.
    let stream = VectorField::from_exprs(&["x1^2", "-2*x1*x2"], 2)?;
    let flat = ScalarField::constant(2, 1.0);
    let report = check_divergence_free(&stream, &flat, 1, &opts)?;
    println!(
        "stream field of h = x1^2 x2:     {}",
        if report.pass { "PASS" } else { "FAIL" }
    );

    // B = (x1, 0) is a gradient-like field: integration by parts gives
    // -∫ f dx < 0 for every positive bump, so the gate must fail.
    let gradient_like = VectorField::from_exprs(&["x1", "0"], 2)?;
    let report = check_divergence_free(&gradient_like, &flat, 1, &opts)?;
    println!(
        "gradient-like field (x1, 0):     {}",
        if report.pass { "PASS" } else { "FAIL" }
    );
    for t in report.tests.iter().take(3) {
        println!(
            "  bump at ({:+.2}, {:+.2}) r={:.2}: estimate {:+.4e} (3 SE = {:.1e})",
            t.center[0],
            t.center[1],
            t.radius,
            t.estimate,
            3.0 * t.std_error
        );
    }
    Ok(())
}
