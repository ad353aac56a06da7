//! Monte-Carlo escape probabilities by Euler–Maruyama simulation: the SDE is
//! identified from the form data (σσᵀ = 2A, drift from the weight and the
//! matrix divergence), and P(sup_{t≤T} |X_t| ≥ R) is estimated per radius
//! rung with Wilson confidence intervals.
//!
//! ```bash
//! cargo run --release --example escape_probability
//! ```

use conservd::field::{MatrixField, ScalarField, VectorField};
use conservd::oracle::{em_explosion_mc, ExplosionConfig};
use conservd::registry;

fn main() -> conservd::Result<()> {
    // Standard planar Brownian motion (A = I/2 gives sigma = I).
    let a = MatrixField::scaled_identity(2, 0.5);
    let b = VectorField::zero(2);
    let flat = ScalarField::constant(2, 1.0);
    let cfg = ExplosionConfig {
        x0: vec![0.0, 0.0],
        t_sim: 1.0,
        dt: 1e-3,
        radii: vec![1.0, 2.0, 4.0, 8.0],
        paths: 50_000,
        seed: 42,
    };
    let est = em_explosion_mc(&a, &b, &flat, 1, &cfg)?;
    println!("standard Brownian motion, T = 1:");
    for rung in &est.rungs {
        println!(
            "  P(sup |X| >= {:>3}) = {:.6}  Wilson [{:.6}, {:.6}]",
            rung.radius, rung.p_hat, rung.wilson_low, rung.wilson_high
        );
    }

    // The one-dimensional registry system: the escape curve decays in R,
    // consistent with the divergence verdict of the scale/speed oracle.
    let entry = registry::lookup("gim-trutnau-1d")?;
    let cfg = ExplosionConfig {
        x0: vec![0.0],
        t_sim: 0.5,
        dt: 1e-3,
        radii: vec![4.0, 8.0, 16.0, 32.0],
        paths: 20_000,
        seed: 42,
    };
    let est = em_explosion_mc(&entry.a, &entry.b, &entry.weight, entry.mu_power, &cfg)?;
    println!("\npiecewise one-dimensional system, T = 0.5:");
    for rung in &est.rungs {
        println!(
            "  P(sup |X| >= {:>3}) = {:.6}  Wilson [{:.6}, {:.6}]",
            rung.radius, rung.p_hat, rung.wilson_low, rung.wilson_high
        );
    }
    if est.invalid_paths > 0 {
        println!("  invalid paths: {}", est.invalid_paths);
    }
    Ok(())
}
