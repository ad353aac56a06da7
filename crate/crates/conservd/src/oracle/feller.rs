//! The exact one-dimensional non-explosion test.
//!
//! For a diffusion on ℝ with coefficient A > 0 and speed density φ > 0, the
//! scale function and its growth functional are
//!
//!   h(x) = ∫₀ˣ 1/(A(y)φ(y)) dy,
//!   Φ(x) = ∫₀ˣ (h(x) − h(y)) φ(y) dy,
//!
//! and the process is conservative iff Φ(x) → ∞ as x → +∞ and x → −∞.
//! Divergence is decided per side from Φ evaluated on an increasing ladder of
//! levels L: a side diverges when Φ keeps growing with log-log slope at least
//! `slope_delta`, and is bounded when Φ is Cauchy across the top three rungs.
//!
//! Φ is computed along two independent routes — the nested integral above and
//! the algebraic rearrangement Φ(x) = h(x)∫₀ˣφ − ∫₀ˣ hφ — whose agreement is
//! a quality gate on the quadrature.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;

#[derive(Debug, Clone, Serialize)]
pub struct FellerConfig {
    /// Increasing levels |x| = L at which Φ is evaluated.
    pub ladder: Vec<f64>,
    /// Relative quadrature tolerance.
    pub quad_tol: f64,
    /// Minimal log-log slope of Φ against L that still counts as divergence.
    pub slope_delta: f64,
    /// Relative Cauchy tolerance across the top three rungs for boundedness.
    pub cauchy_tol: f64,
}

impl Default for FellerConfig {
    fn default() -> Self {
        FellerConfig {
            ladder: vec![10.0, 100.0, 1_000.0, 10_000.0],
            quad_tol: 1e-12,
            slope_delta: 0.05,
            cauchy_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideVerdict {
    Diverges,
    Bounded,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct FellerSide {
    /// Ladder levels, as signed coordinates.
    pub levels: Vec<f64>,
    pub phi_big: Vec<f64>,
    pub phi_big_algebraic: Vec<f64>,
    pub verdict: SideVerdict,
    /// Smallest log-log slope across the last two ladder gaps.
    pub loglog_slope: f64,
    /// Largest relative change across the top three rungs.
    pub cauchy_delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FellerResult {
    /// Sample grid of (x, h(x)) pairs across the whole window.
    pub scale_grid: Vec<(f64, f64)>,
    pub positive: FellerSide,
    pub negative: FellerSide,
    pub config: FellerConfig,
}

impl FellerResult {
    pub fn both_diverge(&self) -> bool {
        self.positive.verdict == SideVerdict::Diverges
            && self.negative.verdict == SideVerdict::Diverges
    }

    /// Exit-code mapping: 0 both sides diverge, 2 any side bounded,
    /// 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.both_diverge() {
            0
        } else if self.positive.verdict == SideVerdict::Bounded
            || self.negative.verdict == SideVerdict::Bounded
        {
            2
        } else {
            3
        }
    }
}

// ---------------------------------------------------------------------------
// Adaptive quadrature
// ---------------------------------------------------------------------------

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::NonFinite {
            context: "quadrature integrand".to_string(),
            point: vec![if flm.is_finite() { rm } else { lm }],
        });
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::QuadratureNonConvergence { a, b });
    }
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    Ok(adaptive(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?)
}

/// Adaptive Simpson on [a, b] (a may exceed b) with an absolute tolerance.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps_abs: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-integrate(f, b, a, eps_abs)?);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return Err(Error::NonFinite {
            context: "quadrature integrand".to_string(),
            point: vec![a],
        });
    }
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, eps_abs.max(1e-300), 52)
}

/// Integrate with forced subdivision at the interior breakpoints.
pub fn integrate_split(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    eps_abs: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-integrate_split(f, b, a, eps_abs, breakpoints)?);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|c| *c > a && *c < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    let mut lo = a;
    let eps_each = eps_abs / (cuts.len() + 1) as f64;
    for c in cuts {
        total += integrate(f, lo, c, eps_each)?;
        lo = c;
    }
    total += integrate(f, lo, b, eps_each)?;
    Ok(total)
}

// ---------------------------------------------------------------------------
// Scale function with anchored cumulative quadrature
// ---------------------------------------------------------------------------

struct ScaleFunction<'a> {
    a: &'a ScalarField,
    phi: &'a ScalarField,
    /// Sorted anchor positions with cumulative h values; always contains 0.
    anchors: Vec<(f64, f64)>,
    eps: f64,
    breakpoints: Vec<f64>,
}

impl<'a> ScaleFunction<'a> {
    fn new(
        a: &'a ScalarField,
        phi: &'a ScalarField,
        l_max: f64,
        eps: f64,
        breakpoints: &[f64],
    ) -> Result<Self> {
        let mut positions = vec![0.0];
        let mut v = 0.01 * l_max.clamp(1.0, 100.0);
        while v < l_max {
            positions.push(v);
            positions.push(-v);
            v *= 1.4;
        }
        positions.push(l_max);
        positions.push(-l_max);
        for b in breakpoints {
            if b.abs() < l_max && *b != 0.0 {
                positions.push(*b);
            }
        }
        positions.sort_by(|x, y| x.partial_cmp(y).unwrap());
        positions.dedup();

        let integrand = |y: f64| 1.0 / (a.value(&[y]) * phi.value(&[y]));
        let zero_idx = positions.iter().position(|p| *p == 0.0).unwrap();
        let mut anchors = vec![(0.0, 0.0); positions.len()];
        anchors[zero_idx] = (0.0, 0.0);
        let mut acc = 0.0;
        for i in zero_idx + 1..positions.len() {
            acc += integrate_split(&integrand, positions[i - 1], positions[i], eps, breakpoints)?;
            anchors[i] = (positions[i], acc);
        }
        acc = 0.0;
        for i in (0..zero_idx).rev() {
            acc -= integrate_split(&integrand, positions[i], positions[i + 1], eps, breakpoints)?;
            anchors[i] = (positions[i], acc);
        }
        Ok(ScaleFunction {
            a,
            phi,
            anchors,
            eps,
            breakpoints: breakpoints.to_vec(),
        })
    }

    /// h(y) = anchor value plus an exact segment integral from the nearest
    /// anchor (no interpolation).
    fn h(&self, y: f64) -> f64 {
        let idx = match self
            .anchors
            .binary_search_by(|(p, _)| p.partial_cmp(&y).unwrap())
        {
            Ok(i) => return self.anchors[i].1,
            Err(i) => i,
        };
        // Nearest anchor among neighbors.
        let candidates = [idx.wrapping_sub(1), idx];
        let mut best = None;
        for c in candidates {
            if let Some((p, h)) = self.anchors.get(c) {
                let d = (p - y).abs();
                if best.map(|(bd, _, _)| d < bd).unwrap_or(true) {
                    best = Some((d, *p, *h));
                }
            }
        }
        let (_, p, h0) = best.expect("anchors non-empty");
        let integrand = |t: f64| 1.0 / (self.a.value(&[t]) * self.phi.value(&[t]));
        h0 + integrate_split(&integrand, p, y, self.eps * 0.01, &self.breakpoints)
            .unwrap_or(f64::NAN)
    }
}

// ---------------------------------------------------------------------------
// The test
// ---------------------------------------------------------------------------

fn side_verdict(levels: &[f64], phi_big: &[f64], cfg: &FellerConfig) -> (SideVerdict, f64, f64) {
    let k = phi_big.len();
    let top = &phi_big[k.saturating_sub(3)..];
    let cauchy_delta = top
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[1].abs().max(1e-300))
        .fold(0.0f64, f64::max);

    let mut slopes = Vec::new();
    for i in k.saturating_sub(2)..k {
        if i == 0 {
            continue;
        }
        let (l0, l1) = (levels[i - 1].abs(), levels[i].abs());
        let (p0, p1) = (phi_big[i - 1], phi_big[i]);
        if p0 > 0.0 && p1 > 0.0 {
            slopes.push((p1.ln() - p0.ln()) / (l1.ln() - l0.ln()));
        } else {
            slopes.push(f64::NEG_INFINITY);
        }
    }
    let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);

    let increasing = phi_big.windows(2).all(|w| w[1] >= w[0]);
    let verdict = if k >= 3 && cauchy_delta <= cfg.cauchy_tol {
        SideVerdict::Bounded
    } else if increasing && min_slope >= cfg.slope_delta {
        SideVerdict::Diverges
    } else {
        SideVerdict::Inconclusive
    };
    (verdict, min_slope, cauchy_delta)
}

/// Run the scale/speed test for a one-dimensional coefficient pair.
pub fn feller_test(a: &ScalarField, phi: &ScalarField, cfg: &FellerConfig) -> Result<FellerResult> {
    assert_eq!(a.dim(), 1, "scale/speed test is one-dimensional");
    assert_eq!(phi.dim(), 1);
    if cfg.ladder.is_empty() || !cfg.ladder.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config(
            "feller ladder must be non-empty and increasing".to_string(),
        ));
    }
    let l_max = *cfg.ladder.last().unwrap();

    // Positivity of A and phi on the working window (sampled check).
    let mut breakpoints = a.breakpoints_1d();
    breakpoints.extend(phi.breakpoints_1d());
    breakpoints.sort_by(|x, y| x.partial_cmp(y).unwrap());
    breakpoints.dedup();
    let check_points = 2001;
    for i in 0..check_points {
        let x = -l_max + 2.0 * l_max * i as f64 / (check_points - 1) as f64;
        let (av, pv) = (a.value(&[x]), phi.value(&[x]));
        if !av.is_finite() || av <= 0.0 {
            return Err(Error::NonPositiveWeight {
                value: av,
                point: vec![x],
            });
        }
        if !pv.is_finite() || pv <= 0.0 {
            return Err(Error::NonPositiveWeight {
                value: pv,
                point: vec![x],
            });
        }
    }

    // Scale of h used to convert the relative tolerance into absolute ones.
    let probe = |y: f64| 1.0 / (a.value(&[y]) * phi.value(&[y]));
    let rough: f64 = integrate_split(&probe, 0.0, l_max.min(100.0), 1e-6, &breakpoints)?
        .abs()
        .max(1e-6);
    let eps_h = cfg.quad_tol * rough.max(1.0);
    let scale = ScaleFunction::new(a, phi, l_max, eps_h, &breakpoints)?;

    let run_side = |sign: f64| -> Result<FellerSide> {
        let levels: Vec<f64> = cfg.ladder.iter().map(|l| sign * l).collect();
        let mut nested = Vec::with_capacity(levels.len());
        let mut algebraic = Vec::with_capacity(levels.len());
        for &level in &levels {
            let h_l = scale.h(level);
            // Nested route: integrand (h(L) - h(y)) phi(y), non-negative.
            let nested_integrand = |y: f64| (h_l - scale.h(y)) * phi.value(&[y]);
            let phi_scale = (h_l.abs() + 1.0) * level.abs().max(1.0);
            let v_nested =
                integrate_split(&nested_integrand, 0.0, level, cfg.quad_tol * phi_scale, &breakpoints)?;
            // Algebraic route: h(L) * I1 - I2.
            let i1 = integrate_split(
                &|y: f64| phi.value(&[y]),
                0.0,
                level,
                cfg.quad_tol * phi_scale,
                &breakpoints,
            )?;
            let i2 = integrate_split(
                &|y: f64| scale.h(y) * phi.value(&[y]),
                0.0,
                level,
                cfg.quad_tol * phi_scale,
                &breakpoints,
            )?;
            nested.push(v_nested);
            algebraic.push(h_l * i1 - i2);
        }
        let (verdict, slope, cauchy) = side_verdict(&levels, &nested, cfg);
        Ok(FellerSide {
            levels,
            phi_big: nested,
            phi_big_algebraic: algebraic,
            verdict,
            loglog_slope: slope,
            cauchy_delta: cauchy,
        })
    };

    let positive = run_side(1.0)?;
    let negative = run_side(-1.0)?;

    // Reported h grid: the anchors themselves (strictly increasing since
    // h' = 1/(A phi) > 0).
    let scale_grid: Vec<(f64, f64)> = scale.anchors.clone();

    Ok(FellerResult {
        scale_grid,
        positive,
        negative,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(text: &str) -> ScalarField {
        ScalarField::from_expr(text, 1).unwrap()
    }

    #[test]
    fn integrate_polynomial_exactly() {
        let v = integrate(&|x: f64| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-10);
        let v = integrate(&|x: f64| x.exp(), 1.0, 0.0, 1e-12).unwrap();
        assert!((v - (1.0 - std::f64::consts::E)).abs() < 1e-10);
    }

    #[test]
    fn flat_coefficients_diverge_quadratically() {
        // A = 1, phi = 1: h(x) = x, Phi(L) = L^2/2.
        let result = feller_test(&field("1"), &field("1"), &FellerConfig::default()).unwrap();
        assert!(result.both_diverge());
        for (level, phi_big) in result
            .positive
            .levels
            .iter()
            .zip(&result.positive.phi_big)
        {
            assert!(
                (phi_big - level * level / 2.0).abs() / (level * level / 2.0) < 1e-9,
                "Phi({level}) = {phi_big}"
            );
        }
        assert!((result.positive.loglog_slope - 2.0).abs() < 1e-6);
        // h grid strictly increasing.
        assert!(result.scale_grid.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn dual_route_agreement() {
        let a = field("piecewise(x1 >= 0 ? (x1 + sqrt(2))^2 : (x1^4 - x1^3 + 6)/3)");
        let phi = field("piecewise(x1 > -1 ? 1 : abs(x1)^(-3))");
        let result = feller_test(&a, &phi, &FellerConfig::default()).unwrap();
        for side in [&result.positive, &result.negative] {
            for (n, alg) in side.phi_big.iter().zip(&side.phi_big_algebraic) {
                assert!(
                    (n - alg).abs() / n.abs().max(1e-300) < 1e-8,
                    "nested {n} vs algebraic {alg}"
                );
            }
            // Phi is non-negative and nondecreasing along each side.
            assert!(side.phi_big.iter().all(|p| *p >= 0.0));
            assert!(side.phi_big.windows(2).all(|w| w[1] >= w[0]));
        }
        assert!(result.scale_grid.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn shifted_square_coefficient_closed_form() {
        // For A = (x + sqrt 2)^2, phi = 1 on the positive side:
        // Phi(x) = ln((x+sqrt2)/sqrt2) + sqrt2/(x+sqrt2) - 1.
        let a = field("piecewise(x1 >= 0 ? (x1 + sqrt(2))^2 : (x1^4 - x1^3 + 6)/3)");
        let phi = field("piecewise(x1 > -1 ? 1 : abs(x1)^(-3))");
        let result = feller_test(&a, &phi, &FellerConfig::default()).unwrap();
        let closed = |x: f64| {
            let s = 2f64.sqrt();
            ((x + s) / s).ln() + s / (x + s) - 1.0
        };
        for (level, phi_big) in result
            .positive
            .levels
            .iter()
            .zip(&result.positive.phi_big)
        {
            let want = closed(*level);
            assert!(
                (phi_big - want).abs() / want < 1e-8,
                "Phi({level}) = {phi_big}, closed form {want}"
            );
        }
        // The jump across the top decade of the ladder, frozen from the
        // closed-form antiderivative.
        let diff = result.positive.phi_big[3] - result.positive.phi_big[2];
        let want = closed(1e4) - closed(1e3);
        assert!((want - 2.300_042_4).abs() < 1e-6);
        assert!((diff - want).abs() < 1e-6, "diff {diff} vs {want}");
        assert!(result.both_diverge());
    }

    #[test]
    fn explosive_coefficient_is_bounded_both_sides() {
        // A = (1 + x^2)^2: h converges at both ends and Phi stays bounded.
        let result =
            feller_test(&field("(1 + x1^2)^2"), &field("1"), &FellerConfig::default()).unwrap();
        assert_eq!(result.positive.verdict, SideVerdict::Bounded);
        assert_eq!(result.negative.verdict, SideVerdict::Bounded);
        assert_eq!(result.exit_code(), 2);
    }

    #[test]
    fn rejects_nonpositive_coefficients() {
        let err = feller_test(&field("x1"), &field("1"), &FellerConfig::default());
        assert!(matches!(err, Err(Error::NonPositiveWeight { .. })));
    }
}
