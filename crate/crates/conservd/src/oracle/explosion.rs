//! Monte-Carlo escape-probability estimation by Euler–Maruyama simulation.
//!
//! The simulated SDE is identified from the form
//! ∫⟨A∇f,∇g⟩ φ^p dx − ∫⟨B,∇f⟩ g φ^p dx by integration by parts:
//!
//!   dX = b(X) dt + σ(X) dW,   σσᵀ = 2A,
//!   b_i = Σ_j [ ∂_j a_ij + a_ij · p·∂_jφ/φ ] + B_i,
//!
//! with p = mu_power. The diffusion square root comes from a symmetric
//! eigendecomposition of 2A; a negative eigenvalue beyond tolerance marks the
//! path invalid (counted as escaped at every radius, conservatively, with a
//! witness point recorded).
//!
//! True explosion is unreachable in finite simulation: the estimate is the
//! probability of leaving |x| < R by the horizon, reported per radius rung
//! with Wilson confidence intervals. Escape probabilities are nonincreasing
//! in R by construction (nested events over the same paths).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{MatrixField, ScalarField, VectorField};

#[derive(Debug, Clone, Serialize)]
pub struct ExplosionConfig {
    pub x0: Vec<f64>,
    pub t_sim: f64,
    pub dt: f64,
    /// Escape radii, strictly increasing.
    pub radii: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
}

impl Default for ExplosionConfig {
    fn default() -> Self {
        ExplosionConfig {
            x0: vec![0.0, 0.0],
            t_sim: 1.0,
            dt: 1e-3,
            radii: vec![2.0, 4.0, 8.0],
            paths: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RungEstimate {
    pub radius: f64,
    pub escaped: u64,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplosionEstimate {
    pub rungs: Vec<RungEstimate>,
    pub paths: usize,
    pub invalid_paths: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invalid_witness: Option<Vec<f64>>,
    pub t_sim: f64,
    pub dt: f64,
    pub seed: u64,
}

/// Wilson score interval for k successes out of n at z = 1.96.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (small d)
// ---------------------------------------------------------------------------

/// Eigen-decompose a symmetric d×d matrix (row-major). Returns eigenvalues
/// and the column eigenvectors flattened row-major.
fn sym_eigen(m: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    match d {
        1 => (vec![m[0]], vec![1.0]),
        2 => {
            let (a, b, c) = (m[0], m[1], m[3]);
            let tr = a + c;
            let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
            let l1 = 0.5 * (tr - disc);
            let l2 = 0.5 * (tr + disc);
            if b.abs() < 1e-300 * (a.abs() + c.abs()).max(1.0) {
                if a <= c {
                    (vec![a, c], vec![1.0, 0.0, 0.0, 1.0])
                } else {
                    (vec![c, a], vec![0.0, 1.0, 1.0, 0.0])
                }
            } else {
                // Eigenvector for l: (b, l - a), normalized.
                let mut vecs = Vec::with_capacity(4);
                let mut cols = Vec::new();
                for l in [l1, l2] {
                    let v = [b, l - a];
                    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
                    cols.push([v[0] / norm, v[1] / norm]);
                }
                vecs.extend([cols[0][0], cols[1][0], cols[0][1], cols[1][1]]);
                (vec![l1, l2], vecs)
            }
        }
        _ => jacobi_eigen(m, d),
    }
}

fn jacobi_eigen(m: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = m.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                off += a[i * d + j] * a[i * d + j];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..d).map(|i| a[i * d + i]).collect();
    (values, v)
}

/// σ = sqrt(M) of a symmetric PSD matrix via eigendecomposition. Eigenvalues
/// below −tol·scale are an error; slightly negative ones clamp to zero.
fn sym_sqrt(m: &[f64], d: usize, x: &[f64]) -> Result<Vec<f64>> {
    let (vals, vecs) = sym_eigen(m, d);
    let scale = vals.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let mut roots = Vec::with_capacity(d);
    for &l in &vals {
        if l < -1e-9 * scale {
            return Err(Error::NotPositiveDefinite {
                point: x.to_vec(),
                eigenvalue: l,
            });
        }
        roots.push(l.max(0.0).sqrt());
    }
    // sigma = V diag(sqrt(l)) V^T
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += vecs[i * d + k] * roots[k] * vecs[j * d + k];
            }
            out[i * d + j] = s;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

/// Coefficient bundle with the derived stepping data.
pub struct Simulator {
    a: MatrixField,
    b: VectorField,
    weight: ScalarField,
    mu_power: u8,
    h_rel: f64,
    dim: usize,
    /// (drift, sigma) when every coefficient is constant.
    frozen: Option<(Vec<f64>, Vec<f64>)>,
}

impl Simulator {
    pub fn new(
        a: &MatrixField,
        b: &VectorField,
        weight: &ScalarField,
        mu_power: u8,
        h_rel: f64,
    ) -> Result<Self> {
        let dim = a.dim();
        let mut sim = Simulator {
            a: a.clone(),
            b: b.clone(),
            weight: weight.clone(),
            mu_power,
            h_rel,
            dim,
            frozen: None,
        };
        let all_const = a.constant_value().is_some()
            && weight.constant_value().is_some()
            && b.is_constant();
        if all_const {
            let x0 = vec![0.0; dim];
            let coeffs = sim.step_coefficients(&x0)?;
            sim.frozen = Some(coeffs);
        }
        Ok(sim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Drift and diffusion square root at `x`: b as above, σ with σσᵀ = 2Ã(x)
    /// (Ã the symmetrized matrix value).
    pub fn step_coefficients(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if let Some(frozen) = &self.frozen {
            return Ok(frozen.clone());
        }
        let d = self.dim;
        let av = self.a.value(x);
        let phi = self.weight.value(x);
        if !phi.is_finite() || phi <= 0.0 {
            return Err(Error::NonPositiveWeight {
                value: phi,
                point: x.to_vec(),
            });
        }
        let phi_grad = if self.mu_power == 0 {
            vec![0.0; d]
        } else {
            self.weight.gradient(x, self.h_rel)?
        };
        let p = self.mu_power as f64;

        let mut drift = Vec::with_capacity(d);
        for i in 0..d {
            let mut s = 0.0;
            for j in 0..d {
                let entry = self.a.entry(i, j);
                let da = entry.gradient(x, self.h_rel)?[j];
                s += da + av[i * d + j] * p * phi_grad[j] / phi;
            }
            s += self.b.component(i).value(x);
            if !s.is_finite() {
                return Err(Error::NonFinite {
                    context: "drift coefficient".to_string(),
                    point: x.to_vec(),
                });
            }
            drift.push(s);
        }

        // Symmetrize and double for the diffusion part.
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = av[i * d + j] + av[j * d + i];
            }
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "diffusion matrix".to_string(),
                point: x.to_vec(),
            });
        }
        let sigma = sym_sqrt(&m, d, x)?;
        Ok((drift, sigma))
    }

    fn run_path(&self, cfg: &ExplosionConfig, path_index: u64) -> PathOutcome {
        let d = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(cfg.seed ^ splitmix(path_index + 1)));
        let mut x = cfg.x0.clone();
        let mut max_r = norm(&x);
        let r1 = cfg.radii.first().copied().unwrap_or(1.0);
        let steps = (cfg.t_sim / cfg.dt).ceil() as u64;
        let mut t = 0.0;
        for _ in 0..steps {
            let dt_step = cfg.dt.min(cfg.t_sim - t);
            if dt_step <= 0.0 {
                break;
            }
            let (mut b, mut sigma) = match self.step_coefficients(&x) {
                Ok(c) => c,
                Err(_) => return PathOutcome::Invalid(x),
            };
            // Halve the step while the drift displacement is too coarse.
            let mut substeps = 1u64;
            while norm(&b) * dt_step / substeps as f64 > 0.1 * r1 {
                substeps *= 2;
                if substeps > 1 << 20 {
                    return PathOutcome::Invalid(x);
                }
            }
            let h = dt_step / substeps as f64;
            let sqrt_h = h.sqrt();
            for sub in 0..substeps {
                if sub > 0 && self.frozen.is_none() {
                    match self.step_coefficients(&x) {
                        Ok((bb, ss)) => {
                            b = bb;
                            sigma = ss;
                        }
                        Err(_) => return PathOutcome::Invalid(x),
                    }
                }
                let z: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                for i in 0..d {
                    let mut noise = 0.0;
                    for j in 0..d {
                        noise += sigma[i * d + j] * z[j];
                    }
                    x[i] += b[i] * h + sqrt_h * noise;
                }
                let r = norm(&x);
                if !r.is_finite() {
                    return PathOutcome::Invalid(x);
                }
                if r > max_r {
                    max_r = r;
                }
            }
            t += dt_step;
        }
        PathOutcome::MaxRadius(max_r)
    }
}

enum PathOutcome {
    MaxRadius(f64),
    Invalid(Vec<f64>),
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Estimate escape probabilities P(sup_{t ≤ T} |X_t| ≥ R) for each rung.
pub fn em_explosion_mc(
    a: &MatrixField,
    b: &VectorField,
    weight: &ScalarField,
    mu_power: u8,
    cfg: &ExplosionConfig,
) -> Result<ExplosionEstimate> {
    if cfg.radii.is_empty() || !cfg.radii.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config(
            "escape radii must be non-empty and strictly increasing".to_string(),
        ));
    }
    if cfg.x0.len() != a.dim() {
        return Err(Error::Config(format!(
            "x0 has dimension {}, coefficients have dimension {}",
            cfg.x0.len(),
            a.dim()
        )));
    }
    let sim = Simulator::new(a, b, weight, mu_power, crate::field::DEFAULT_H_REL)?;
    let outcomes: Vec<PathOutcome> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| sim.run_path(cfg, i))
        .collect();

    let mut invalid_paths = 0u64;
    let mut invalid_witness = None;
    let mut escaped = vec![0u64; cfg.radii.len()];
    for outcome in &outcomes {
        match outcome {
            PathOutcome::MaxRadius(r) => {
                for (k, radius) in cfg.radii.iter().enumerate() {
                    if r >= radius {
                        escaped[k] += 1;
                    }
                }
            }
            PathOutcome::Invalid(x) => {
                invalid_paths += 1;
                if invalid_witness.is_none() {
                    invalid_witness = Some(x.clone());
                }
                for e in escaped.iter_mut() {
                    *e += 1;
                }
            }
        }
    }

    let rungs = cfg
        .radii
        .iter()
        .zip(&escaped)
        .map(|(radius, k)| {
            let (lo, hi) = wilson_interval(*k, cfg.paths as u64);
            RungEstimate {
                radius: *radius,
                escaped: *k,
                p_hat: *k as f64 / cfg.paths as f64,
                wilson_low: lo,
                wilson_high: hi,
            }
        })
        .collect();

    Ok(ExplosionEstimate {
        rungs,
        paths: cfg.paths,
        invalid_paths,
        invalid_witness,
        t_sim: cfg.t_sim,
        dt: cfg.dt,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brownian_half() -> (MatrixField, VectorField, ScalarField) {
        (
            MatrixField::scaled_identity(2, 0.5),
            VectorField::zero(2),
            ScalarField::constant(2, 1.0),
        )
    }

    #[test]
    fn wilson_basics() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert!(lo < 1e-12);
        assert!(hi < 0.005);
        let (lo, hi) = wilson_interval(500, 1000);
        assert!(lo < 0.5 && hi > 0.5);
        assert!(hi - lo < 0.07);
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let s = sym_sqrt(&[4.0, 0.0, 0.0, 9.0], 2, &[0.0, 0.0]).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-12);
        assert!((s[3] - 3.0).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = [2.0, 0.7, 0.7, 1.3];
        let s = sym_sqrt(&m, 2, &[0.0, 0.0]).unwrap();
        let mut sq = [0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    sq[i * 2 + j] += s[i * 2 + k] * s[k * 2 + j];
                }
            }
        }
        for (got, want) in sq.iter().zip(&m) {
            assert!((got - want).abs() < 1e-10);
        }
        // Jacobi path for d = 3.
        let m3 = [3.0, 0.5, 0.1, 0.5, 2.0, 0.2, 0.1, 0.2, 1.5];
        let s3 = sym_sqrt(&m3, 3, &[0.0; 3]).unwrap();
        let mut sq3 = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    sq3[i * 3 + j] += s3[i * 3 + k] * s3[k * 3 + j];
                }
            }
        }
        for (got, want) in sq3.iter().zip(&m3) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let err = sym_sqrt(&[1.0, 0.0, 0.0, -2.0], 2, &[1.0, -1.0]);
        assert!(matches!(err, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn brownian_generator_identification() {
        // A = I/2, B = 0, phi = 1: drift 0 and sigma = identity.
        let (a, b, w) = brownian_half();
        let sim = Simulator::new(&a, &b, &w, 1, 1e-5).unwrap();
        let (drift, sigma) = sim.step_coefficients(&[0.3, -0.7]).unwrap();
        assert_eq!(drift, vec![0.0, 0.0]);
        assert!((sigma[0] - 1.0).abs() < 1e-12);
        assert!((sigma[3] - 1.0).abs() < 1e-12);
        assert!(sigma[1].abs() < 1e-12);
    }

    #[test]
    fn weighted_generator_drift() {
        // A = I, phi = e^{x1}, p = 1: b = (1, 0).
        let a = MatrixField::identity(1);
        let b = VectorField::zero(1);
        let w = ScalarField::from_fn(1, "expw", |x| x[0].exp())
            .with_gradient(|x| vec![x[0].exp()]);
        let sim = Simulator::new(&a, &b, &w, 1, 1e-5).unwrap();
        let (drift, sigma) = sim.step_coefficients(&[0.4]).unwrap();
        assert!((drift[0] - 1.0).abs() < 1e-9);
        assert!((sigma[0] - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn escape_probabilities_are_monotone_and_small() {
        let (a, b, w) = brownian_half();
        let cfg = ExplosionConfig {
            x0: vec![0.0, 0.0],
            t_sim: 1.0,
            dt: 1e-2,
            radii: vec![1.0, 2.0, 4.0],
            paths: 4000,
            seed: 7,
        };
        let est = em_explosion_mc(&a, &b, &w, 1, &cfg).unwrap();
        assert_eq!(est.invalid_paths, 0);
        assert!(est
            .rungs
            .windows(2)
            .all(|w| w[1].p_hat <= w[0].p_hat));
        // Standard planar Brownian motion rarely exits radius 4 by t = 1.
        assert!(est.rungs[2].p_hat < 0.01, "{:?}", est.rungs[2]);
        // Deterministic under the seed.
        let est2 = em_explosion_mc(&a, &b, &w, 1, &cfg).unwrap();
        assert_eq!(est.rungs[0].escaped, est2.rungs[0].escaped);
    }

    #[test]
    fn one_step_expectations_match_generator() {
        // Exact one-step Gaussian moments through the implemented (b, sigma):
        // for f = |x|^2 the residual against f + dt*Lf vanishes identically;
        // for f = |x|^4 it is (d^2 + 2d) dt^2, slope 2 in log-log.
        let (a, b, w) = brownian_half();
        let sim = Simulator::new(&a, &b, &w, 1, 1e-5).unwrap();
        let x0 = [0.6, -0.2];
        let d = 2.0;
        let norm0_sq: f64 = x0.iter().map(|v| v * v).sum();
        let mut quartic = Vec::new();
        for dt in [1e-2, 5e-3, 2.5e-3] {
            let (bv, sigma) = sim.step_coefficients(&x0).unwrap();
            let m: Vec<f64> = x0.iter().zip(&bv).map(|(x, b)| x + b * dt).collect();
            let m_sq: f64 = m.iter().map(|v| v * v).sum();
            let sigma_frob: f64 = sigma.iter().map(|v| v * v).sum();
            // E|X|^2 = |m|^2 + dt * ||sigma||_F^2 ; (1/2 Laplacian of |x|^2) = d.
            let resid_sq = m_sq + dt * sigma_frob - norm0_sq - dt * d;
            assert!(resid_sq.abs() < 1e-14, "quadratic residual {resid_sq}");
            // E|X|^4 for X ~ N(m, dt I).
            let e4 = m_sq * m_sq
                + 4.0 * dt * m_sq
                + (d * dt) * (d * dt)
                + 2.0 * d * dt * dt
                + 2.0 * m_sq * d * dt;
            let lf4 = (2.0 * d + 4.0) * norm0_sq;
            let resid_quart = e4 - norm0_sq * norm0_sq - dt * lf4;
            quartic.push((dt.ln(), resid_quart.abs().ln()));
        }
        let slope = crate::growth::fit_slope(&quartic).unwrap();
        assert!(slope > 1.8, "weak-order slope {slope}");
    }

    #[test]
    fn halved_step_changes_estimates_within_interval_widths() {
        let (a, b, w) = brownian_half();
        let mut cfg = ExplosionConfig {
            x0: vec![0.0, 0.0],
            t_sim: 0.5,
            dt: 2e-2,
            radii: vec![1.0, 2.0],
            paths: 6000,
            seed: 11,
        };
        let coarse = em_explosion_mc(&a, &b, &w, 1, &cfg).unwrap();
        cfg.dt /= 2.0;
        cfg.seed = 12;
        let fine = em_explosion_mc(&a, &b, &w, 1, &cfg).unwrap();
        for (c, f) in coarse.rungs.iter().zip(&fine.rungs) {
            let radius_c = (c.wilson_high - c.wilson_low) / 2.0;
            let radius_f = (f.wilson_high - f.wilson_low) / 2.0;
            assert!(
                (c.p_hat - f.p_hat).abs() <= 2.0 * (radius_c + radius_f),
                "dt robustness: {} vs {}",
                c.p_hat,
                f.p_hat
            );
        }
    }
}
