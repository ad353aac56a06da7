//! Seeded sampling over gauge shells and the Monte-Carlo reductions built on
//! it: integrals with standard errors, L² norms, and refined sampled maxima
//! standing in for essential suprema.
//!
//! Reproducibility contract: every estimate is a pure function of
//! (domain, shell, plan, salt). Samples are generated in fixed-size chunks
//! with per-chunk derived seeds, and chunk results are merged in chunk order,
//! so values are bit-identical regardless of thread count. Growing
//! `plan.samples` extends the sample stream without disturbing its prefix,
//! which makes sampled maxima monotone in the sample count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::DomainSpec;

/// Samples per deterministic chunk.
const CHUNK: usize = 8192;

/// Proposal budget multiplier before rejection sampling reports failure.
const MAX_REJECTION_FACTOR: usize = 10_000;

/// How a gauge shell is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SampleMethod {
    /// Uniform proposals in the bounding box, rejected against the shell.
    BoxRejection,
    /// Direct radius/direction sampling; valid only for the Euclidean norm gauge.
    RadialShell,
    /// Halton low-discrepancy proposals in the bounding box.
    LowDiscrepancy,
}

/// Sampling budget and seed. `method: None` selects radial-shell sampling
/// when the gauge is the Euclidean norm and box rejection otherwise.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SamplePlan {
    pub method: Option<SampleMethod>,
    pub samples: usize,
    pub seed: u64,
    pub refine_rounds: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            method: None,
            samples: 200_000,
            seed: 0,
            refine_rounds: 4,
        }
    }
}

impl SamplePlan {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    fn resolve(&self, domain: &DomainSpec) -> SampleMethod {
        self.method.unwrap_or(if domain.gauge_is_norm {
            SampleMethod::RadialShell
        } else {
            SampleMethod::BoxRejection
        })
    }
}

/// A gauge annulus {inner ≤ ρ < outer}; the criteria use [2n, 4n).
#[derive(Debug, Clone, Copy)]
pub struct GaugeShell {
    pub inner: f64,
    pub outer: f64,
}

impl GaugeShell {
    pub fn annulus(n: u32) -> Self {
        GaugeShell {
            inner: 2.0 * n as f64,
            outer: 4.0 * n as f64,
        }
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.inner && rho < self.outer
    }
}

/// SplitMix64 finalizer; used to derive chunk seeds.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Distinct deterministic salt per (quantity, shell).
pub fn shell_salt(tag: u64, shell: GaugeShell) -> u64 {
    mix64(tag ^ mix64(shell.inner.to_bits()) ^ mix64(shell.outer.to_bits().rotate_left(17)))
}

fn chunk_rng(seed: u64, salt: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(salt ^ mix64(chunk.wrapping_add(1)))))
}

/// Interior volume of the unit ball in d dimensions.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(dim - 2) * 2.0 * std::f64::consts::PI / dim as f64,
    }
}

/// Lebesgue volume of {inner ≤ |x| < outer}.
pub fn shell_volume(dim: usize, inner: f64, outer: f64) -> f64 {
    unit_ball_volume(dim) * (outer.powi(dim as i32) - inner.powi(dim as i32))
}

fn box_point(rng: &mut ChaCha8Rng, half: f64, dim: usize, out: &mut Vec<f64>) {
    out.clear();
    for _ in 0..dim {
        out.push(rng.random_range(-half..half));
    }
}

/// Uniform point on the shell {inner ≤ |x| < outer} (uniform in volume).
fn shell_point(rng: &mut ChaCha8Rng, dim: usize, inner: f64, outer: f64, out: &mut Vec<f64>) {
    out.clear();
    let u: f64 = rng.random();
    let d = dim as f64;
    let r = (inner.powf(d) + u * (outer.powf(d) - inner.powf(d))).powf(1.0 / d);
    if dim == 1 {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        out.push(sign * r);
        return;
    }
    let mut norm_sq = 0.0;
    for _ in 0..dim {
        let g: f64 = rng.sample(StandardNormal);
        norm_sq += g * g;
        out.push(g);
    }
    let scale = r / norm_sq.sqrt();
    for v in out.iter_mut() {
        *v *= scale;
    }
}

/// Uniform point in the Euclidean ball around `center`.
pub fn sample_in_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, out: &mut Vec<f64>) {
    let dim = center.len();
    out.clear();
    if dim == 1 {
        out.push(center[0] + rng.random_range(-radius..radius));
        return;
    }
    let mut norm_sq = 0.0;
    for _ in 0..dim {
        let g: f64 = rng.sample(StandardNormal);
        norm_sq += g * g;
        out.push(g);
    }
    let u: f64 = rng.random();
    let scale = radius * u.powf(1.0 / dim as f64) / norm_sq.sqrt();
    for (v, c) in out.iter_mut().zip(center) {
        *v = c + *v * scale;
    }
}

fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton_point(index: u64, half: f64, dim: usize, out: &mut Vec<f64>) {
    out.clear();
    for (j, base) in HALTON_BASES.iter().take(dim).enumerate() {
        let _ = j;
        out.push((halton(index, *base) * 2.0 - 1.0) * half);
    }
}

/// Kahan-compensated accumulator.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// A refined sampled maximum with the point attaining it. This is a lower
/// bound for the essential supremum; verdicts built on it hold at the sampled
/// resolution only.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub witness: Vec<f64>,
    pub evaluated: u64,
}

struct ChunkSums {
    sum: Kahan,
    sum_sq: Kahan,
    count: u64,
    bad_point: Option<Vec<f64>>,
}

/// Monte-Carlo estimate of ∫_{shell ∩ domain} g(x) dx.
///
/// `g` is evaluated only at points inside the shell and the domain; the
/// estimator weights by the proposal volume. Non-finite values abort with the
/// offending point.
pub fn integrate_shell(
    domain: &DomainSpec,
    shell: GaugeShell,
    plan: &SamplePlan,
    salt: u64,
    g: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<Estimate> {
    let method = plan.resolve(domain);
    let n = plan.samples.max(1);
    let chunks = n.div_ceil(CHUNK);
    let half = domain.bound(shell.outer);
    let dim = domain.dim;
    let proposal_volume = match method {
        SampleMethod::RadialShell => {
            assert!(
                domain.gauge_is_norm,
                "radial-shell sampling requires the Euclidean norm gauge"
            );
            shell_volume(dim, shell.inner, shell.outer)
        }
        _ => (2.0 * half).powi(dim as i32),
    };

    let results: Vec<ChunkSums> = (0..chunks as u64)
        .into_par_iter()
        .map(|ci| {
            let mut rng = chunk_rng(plan.seed, salt, ci);
            let take = CHUNK.min(n - ci as usize * CHUNK);
            let mut sums = ChunkSums {
                sum: Kahan::default(),
                sum_sq: Kahan::default(),
                count: 0,
                bad_point: None,
            };
            let mut x = Vec::with_capacity(dim);
            for k in 0..take {
                match method {
                    SampleMethod::RadialShell => {
                        shell_point(&mut rng, dim, shell.inner, shell.outer, &mut x)
                    }
                    SampleMethod::BoxRejection => box_point(&mut rng, half, dim, &mut x),
                    SampleMethod::LowDiscrepancy => {
                        let index = mix64(plan.seed) % (1 << 20) + ci * CHUNK as u64 + k as u64 + 1;
                        halton_point(index, half, dim, &mut x)
                    }
                }
                sums.count += 1;
                let inside = match method {
                    SampleMethod::RadialShell => domain.contains(&x),
                    _ => shell.contains(domain.gauge_value(&x)) && domain.contains(&x),
                };
                let v = if inside {
                    let gv = g(&x);
                    if !gv.is_finite() && sums.bad_point.is_none() {
                        sums.bad_point = Some(x.clone());
                    }
                    proposal_volume * gv
                } else {
                    0.0
                };
                sums.sum.add(v);
                sums.sum_sq.add(v * v);
            }
            sums
        })
        .collect();

    let mut total = Kahan::default();
    let mut total_sq = Kahan::default();
    let mut count = 0u64;
    for r in results {
        if let Some(p) = r.bad_point {
            return Err(Error::NonFinite {
                context: "shell integrand".to_string(),
                point: p,
            });
        }
        total.add(r.sum.sum);
        total_sq.add(r.sum_sq.sum);
        count += r.count;
    }
    let nf = count as f64;
    let mean = total.sum / nf;
    let var = ((total_sq.sum - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(Estimate {
        value: mean,
        std_error: (var / nf).sqrt(),
    })
}

/// μ(shell) = ∫ φ^{mu_power} dx over the shell.
pub fn shell_measure(
    domain: &DomainSpec,
    shell: GaugeShell,
    weight: &crate::field::ScalarField,
    mu_power: u8,
    plan: &SamplePlan,
    salt: u64,
) -> Result<Estimate> {
    let p = mu_power as i32;
    integrate_shell(domain, shell, plan, salt, |x| weight.value(x).powi(p))
}

/// ‖f‖_{L²(shell, μ)} = (∫ f² φ^{mu_power} dx)^{1/2}, standard error propagated
/// through the square root.
pub fn l2_norm_shell(
    domain: &DomainSpec,
    shell: GaugeShell,
    field: &crate::field::ScalarField,
    weight: &crate::field::ScalarField,
    mu_power: u8,
    plan: &SamplePlan,
    salt: u64,
) -> Result<Estimate> {
    let p = mu_power as i32;
    let sq = integrate_shell(domain, shell, plan, salt, |x| {
        let f = field.value(x);
        f * f * weight.value(x).powi(p)
    })?;
    let value = sq.value.max(0.0).sqrt();
    let std_error = if value > 0.0 {
        sq.std_error / (2.0 * value)
    } else {
        sq.std_error.sqrt()
    };
    Ok(Estimate { value, std_error })
}

/// Sampled maximum of `g` over the shell, then `refine_rounds` of local
/// resampling in balls shrinking 4× around the running argmax.
pub fn ess_sup(
    domain: &DomainSpec,
    shell: GaugeShell,
    plan: &SamplePlan,
    salt: u64,
    g: impl Fn(&[f64]) -> f64 + Sync,
) -> Result<SupEstimate> {
    let method = plan.resolve(domain);
    let n = plan.samples.max(1);
    let chunks = n.div_ceil(CHUNK);
    let half = domain.bound(shell.outer);
    let dim = domain.dim;

    struct ChunkMax {
        best: Option<(f64, Vec<f64>)>,
        evaluated: u64,
        bad_point: Option<Vec<f64>>,
    }

    let results: Vec<ChunkMax> = (0..chunks as u64)
        .into_par_iter()
        .map(|ci| {
            let mut rng = chunk_rng(plan.seed, salt, ci);
            let take = CHUNK.min(n - ci as usize * CHUNK);
            let mut out = ChunkMax {
                best: None,
                evaluated: 0,
                bad_point: None,
            };
            let mut x = Vec::with_capacity(dim);
            for k in 0..take {
                match method {
                    SampleMethod::RadialShell => {
                        shell_point(&mut rng, dim, shell.inner, shell.outer, &mut x)
                    }
                    SampleMethod::BoxRejection => box_point(&mut rng, half, dim, &mut x),
                    SampleMethod::LowDiscrepancy => {
                        let index = mix64(plan.seed) % (1 << 20) + ci * CHUNK as u64 + k as u64 + 1;
                        halton_point(index, half, dim, &mut x)
                    }
                }
                let inside = match method {
                    SampleMethod::RadialShell => domain.contains(&x),
                    _ => shell.contains(domain.gauge_value(&x)) && domain.contains(&x),
                };
                if !inside {
                    continue;
                }
                let v = g(&x);
                out.evaluated += 1;
                if v.is_nan() {
                    if out.bad_point.is_none() {
                        out.bad_point = Some(x.clone());
                    }
                    continue;
                }
                if out.best.as_ref().map(|(b, _)| v > *b).unwrap_or(true) {
                    out.best = Some((v, x.clone()));
                }
            }
            out
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluated = 0u64;
    for r in results {
        if let Some(p) = r.bad_point {
            return Err(Error::NonFinite {
                context: "essential-sup field".to_string(),
                point: p,
            });
        }
        evaluated += r.evaluated;
        if let Some((v, x)) = r.best {
            if best.as_ref().map(|(b, _)| v > *b).unwrap_or(true) {
                best = Some((v, x));
            }
        }
    }
    let (mut best_v, mut best_x) = best.ok_or(Error::AcceptanceRate {
        rate: 0.0,
        inner: shell.inner,
        outer: shell.outer,
    })?;

    // Local refinement around the argmax.
    let mut radius = (shell.outer - shell.inner) / 2.0 * domain.bound_factor.max(1.0);
    let per_round = (plan.samples / 32).max(2000);
    let mut x = Vec::with_capacity(dim);
    for round in 0..plan.refine_rounds {
        let mut rng = chunk_rng(plan.seed, salt ^ 0xA5A5_5A5A_0000_0000, round as u64);
        for _ in 0..per_round {
            sample_in_ball(&mut rng, &best_x, radius, &mut x);
            if !shell.contains(domain.gauge_value(&x)) || !domain.contains(&x) {
                continue;
            }
            let v = g(&x);
            evaluated += 1;
            if v.is_nan() {
                return Err(Error::NonFinite {
                    context: "essential-sup refinement".to_string(),
                    point: x.clone(),
                });
            }
            if v > best_v {
                best_v = v;
                best_x = x.clone();
            }
        }
        radius /= 4.0;
    }

    Ok(SupEstimate {
        value: best_v,
        witness: best_x,
        evaluated,
    })
}

/// Local refinement only: resample in balls shrinking 4× around a known
/// argmax candidate. Used when the base maximum was already taken over a
/// cached sample set.
pub fn refine_max(
    domain: &DomainSpec,
    shell: GaugeShell,
    plan: &SamplePlan,
    salt: u64,
    start_value: f64,
    start_point: &[f64],
    g: impl Fn(&[f64]) -> f64,
) -> SupEstimate {
    let mut best_v = start_value;
    let mut best_x = start_point.to_vec();
    let mut radius = (shell.outer - shell.inner) / 2.0 * domain.bound_factor.max(1.0);
    let per_round = (plan.samples / 32).max(2000);
    let mut evaluated = 0u64;
    let mut x = Vec::with_capacity(domain.dim);
    for round in 0..plan.refine_rounds {
        let mut rng = chunk_rng(plan.seed, salt ^ 0x5EED_0000_0000_0001, round as u64);
        for _ in 0..per_round {
            sample_in_ball(&mut rng, &best_x, radius, &mut x);
            if !shell.contains(domain.gauge_value(&x)) || !domain.contains(&x) {
                continue;
            }
            let v = g(&x);
            evaluated += 1;
            if v > best_v {
                best_v = v;
                best_x = x.clone();
            }
        }
        radius /= 4.0;
    }
    SupEstimate {
        value: best_v,
        witness: best_x,
        evaluated,
    }
}

/// Points accepted into the shell, with the observed acceptance rate.
#[derive(Debug, Clone)]
pub struct SampledPoints {
    /// Flat row-major buffer of `count` points of dimension `dim`.
    pub flat: Vec<f64>,
    pub dim: usize,
    pub count: usize,
    pub acceptance: f64,
}

impl SampledPoints {
    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.flat.chunks_exact(self.dim)
    }
}

/// Draw exactly `plan.samples` points from the shell (the sample_annulus
/// operation). Rejection methods abort when the acceptance rate falls below
/// 1e-4, which signals a misconfigured gauge bounding box.
pub fn sample_shell_points(
    domain: &DomainSpec,
    shell: GaugeShell,
    plan: &SamplePlan,
    salt: u64,
) -> Result<SampledPoints> {
    let method = plan.resolve(domain);
    let dim = domain.dim;
    let want = plan.samples;
    let half = domain.bound(shell.outer);
    let mut flat = Vec::with_capacity(want * dim);
    let mut accepted = 0usize;
    let mut proposals = 0usize;
    let cap = want.saturating_mul(MAX_REJECTION_FACTOR).max(1_000_000);
    let mut chunk_index = 0u64;
    let mut x = Vec::with_capacity(dim);
    'outer: while accepted < want {
        let mut rng = chunk_rng(plan.seed, salt, chunk_index);
        for k in 0..CHUNK {
            if accepted >= want {
                break 'outer;
            }
            proposals += 1;
            match method {
                SampleMethod::RadialShell => {
                    shell_point(&mut rng, dim, shell.inner, shell.outer, &mut x)
                }
                SampleMethod::BoxRejection => box_point(&mut rng, half, dim, &mut x),
                SampleMethod::LowDiscrepancy => {
                    let index =
                        mix64(plan.seed) % (1 << 20) + chunk_index * CHUNK as u64 + k as u64 + 1;
                    halton_point(index, half, dim, &mut x)
                }
            }
            let inside = match method {
                SampleMethod::RadialShell => domain.contains(&x),
                _ => shell.contains(domain.gauge_value(&x)) && domain.contains(&x),
            };
            if inside {
                flat.extend_from_slice(&x);
                accepted += 1;
            }
            if proposals >= cap {
                return Err(Error::AcceptanceRate {
                    rate: accepted as f64 / proposals as f64,
                    inner: shell.inner,
                    outer: shell.outer,
                });
            }
        }
        chunk_index += 1;
    }
    Ok(SampledPoints {
        flat,
        dim,
        count: accepted,
        acceptance: accepted as f64 / proposals as f64,
    })
}
