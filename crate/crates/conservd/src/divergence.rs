//! Monte-Carlo check that a drift is μ-divergence free:
//! ∫ ⟨B, ∇f⟩ φ^{mu_power} dx = 0 for smooth compactly supported f.
//!
//! Test functions are standard mollifier bumps
//! f(x) = exp(1 − 1/(1 − |x−c|²/r²)) inside the ball B(c, r), zero outside,
//! whose gradient is available in closed form. Each randomly placed bump
//! yields one integral estimate; the gate passes when every estimate is
//! within three standard errors of zero.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::sampling::unit_ball_volume;

/// One bump-function test.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BumpTest {
    pub center: Vec<f64>,
    pub radius: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub pass: bool,
}

/// Outcome of the divergence-free gate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DivergenceReport {
    pub mu_power: u8,
    pub tests: Vec<BumpTest>,
    pub pass: bool,
}

/// Options for bump placement and per-bump sampling.
#[derive(Debug, Clone, Copy)]
pub struct DivergenceOptions {
    pub tests: usize,
    pub samples_per_test: usize,
    /// Bump centers are drawn uniformly from [−center_box, center_box]^d.
    pub center_box: f64,
    pub radius_range: (f64, f64),
    pub seed: u64,
}

impl Default for DivergenceOptions {
    fn default() -> Self {
        DivergenceOptions {
            tests: 12,
            samples_per_test: 30_000,
            center_box: 4.0,
            radius_range: (0.8, 2.0),
            seed: 0,
        }
    }
}

/// Value and gradient of the mollifier bump at `x`.
fn bump_and_gradient(x: &[f64], center: &[f64], radius: f64) -> (f64, Vec<f64>) {
    let u: f64 = x
        .iter()
        .zip(center)
        .map(|(xi, ci)| (xi - ci) * (xi - ci))
        .sum::<f64>()
        / (radius * radius);
    if u >= 1.0 {
        return (0.0, vec![0.0; x.len()]);
    }
    let f = (1.0 - 1.0 / (1.0 - u)).exp();
    let dfdu = -f / ((1.0 - u) * (1.0 - u));
    let grad = x
        .iter()
        .zip(center)
        .map(|(xi, ci)| dfdu * 2.0 * (xi - ci) / (radius * radius))
        .collect();
    (f, grad)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_one(
    b: &VectorField,
    weight: &ScalarField,
    mu_power: u8,
    center: Vec<f64>,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<BumpTest> {
    use rand::SeedableRng;
    let dim = b.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let volume = unit_ball_volume(dim) * radius.powi(dim as i32);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut x = vec![0.0; dim];
    for _ in 0..samples {
        // Uniform point in the support ball.
        let mut norm_sq = 0.0;
        for xi in x.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            norm_sq += g * g;
            *xi = g;
        }
        let u: f64 = rng.random();
        let scale = radius * u.powf(1.0 / dim as f64) / norm_sq.sqrt();
        for (xi, ci) in x.iter_mut().zip(&center) {
            *xi = ci + *xi * scale;
        }
        let (_, grad_f) = bump_and_gradient(&x, &center, radius);
        let bv = b.value(&x);
        let w = weight.value(&x).powi(mu_power as i32);
        let integrand: f64 = bv.iter().zip(&grad_f).map(|(bi, gi)| bi * gi).sum::<f64>() * w;
        if !integrand.is_finite() {
            return Err(Error::NonFinite {
                context: "divergence-free integrand".to_string(),
                point: x.clone(),
            });
        }
        let v = volume * integrand;
        sum += v;
        sum_sq += v * v;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    let se = (var / nf).sqrt();
    Ok(BumpTest {
        center,
        radius,
        estimate: mean,
        std_error: se,
        pass: mean.abs() <= 3.0 * se,
    })
}

/// Run the divergence-free gate for `B` against the measure φ^{mu_power} dx.
pub fn check_divergence_free(
    b: &VectorField,
    weight: &ScalarField,
    mu_power: u8,
    opts: &DivergenceOptions,
) -> Result<DivergenceReport> {
    use rand::SeedableRng;
    let dim = b.dim();
    // Bump placement is drawn up front so tests parallelize deterministically.
    let mut placer = ChaCha8Rng::seed_from_u64(splitmix(opts.seed ^ 0x00D1_BE55));
    let placements: Vec<(Vec<f64>, f64, u64)> = (0..opts.tests)
        .map(|i| {
            let center: Vec<f64> = (0..dim)
                .map(|_| placer.random_range(-opts.center_box..opts.center_box))
                .collect();
            let radius = placer.random_range(opts.radius_range.0..opts.radius_range.1);
            (center, radius, splitmix(opts.seed ^ (i as u64 + 1)))
        })
        .collect();

    let tests: Result<Vec<BumpTest>> = placements
        .into_par_iter()
        .map(|(center, radius, seed)| {
            run_one(
                b,
                weight,
                mu_power,
                center,
                radius,
                opts.samples_per_test,
                seed,
            )
        })
        .collect();
    let tests = tests?;
    let pass = tests.iter().all(|t| t.pass);
    Ok(DivergenceReport {
        mu_power,
        tests,
        pass,
    })
}
