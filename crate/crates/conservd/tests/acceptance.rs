//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them on success).
//!
//! Tolerances and thresholds are pinned here, not configurable.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use conservd::criteria::{
    check_gauge_criterion, check_symmetric_criterion, decay_check, CheckOptions, DecayPolicy,
    GaugeConstants, GaugeVariant, SymConstants, SymVariant, VerdictKind,
};
use conservd::divergence::{check_divergence_free, DivergenceOptions};
use conservd::expr::{parse_expression, Ast, BinOp, Func};
use conservd::field::{
    gamma_rho, split_matrix, DomainSpec, MatrixField, ScalarField, VectorField, DEFAULT_H_REL,
};
use conservd::growth::{build_caches, build_growth_table, FormData, GrowthRow, GrowthTable, PhiFamily};
use conservd::oracle::explosion::Simulator;
use conservd::oracle::{em_explosion_mc, feller_test, ExplosionConfig, FellerConfig};
use conservd::registry;
use conservd::sampling::{shell_measure, Estimate, GaugeShell, SamplePlan, SupEstimate};

const FULL_SCHEDULE: [u32; 7] = [1, 2, 4, 8, 16, 32, 64];

fn plan(samples: usize, seed: u64) -> SamplePlan {
    SamplePlan {
        method: None,
        samples,
        seed,
        refine_rounds: 4,
    }
}

fn report(number: u32, name: &str, failures: &[String], started: Instant) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!(
        "acceptance {number} ({name}): {status} [{:.1} s]{}",
        started.elapsed().as_secs_f64(),
        if failures.is_empty() {
            String::new()
        } else {
            format!(" — {}", failures.join("; "))
        }
    );
    assert!(failures.is_empty(), "{failures:?}");
}

// ---------------------------------------------------------------------------
// 1. Brownian baseline
// ---------------------------------------------------------------------------

#[test]
fn acceptance_1_brownian_baseline() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let entry = registry::lookup("brownian").unwrap();
    let data = entry.form_data(false);
    let verdict = check_symmetric_criterion(
        &data,
        SymVariant::Quadratic,
        SymConstants {
            m: Some(1.0),
            n_const: Some(1.0),
            beta: 0.0,
        },
        &FULL_SCHEDULE,
        &plan(100_000, 42),
        &CheckOptions::default(),
        "symexamii",
    )
    .unwrap();
    if verdict.verdict != VerdictKind::SatisfiedUpToHorizon {
        failures.push(format!("symexamii verdict {:?}", verdict.verdict));
    }

    // sigma = I via A = I/2; the reflection-principle bound makes escape
    // beyond radius 8 by t = 1 effectively impossible.
    let a = MatrixField::scaled_identity(2, 0.5);
    let b = VectorField::zero(2);
    let flat = ScalarField::constant(2, 1.0);
    let est = em_explosion_mc(
        &a,
        &b,
        &flat,
        1,
        &ExplosionConfig {
            x0: vec![0.0, 0.0],
            t_sim: 1.0,
            dt: 1e-3,
            radii: vec![2.0, 4.0, 8.0],
            paths: 100_000,
            seed: 42,
        },
    )
    .unwrap();
    let p8 = est.rungs.last().unwrap().p_hat;
    if p8 >= 1e-3 || !p8.is_finite() {
        failures.push(format!("escape probability at R=8 is {p8}"));
    }
    if started.elapsed().as_secs() >= 60 {
        failures.push(format!("runtime {:?} exceeds 60 s", started.elapsed()));
    }
    report(1, "brownian baseline", &failures, started);
}

// ---------------------------------------------------------------------------
// 2. One-dimensional reproduction
// ---------------------------------------------------------------------------

#[test]
fn acceptance_2_one_dimensional_reproduction() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let entry = registry::lookup("gim-trutnau-1d").unwrap();
    let data = entry.form_data(false);
    let verdict = check_gauge_criterion(
        &data,
        GaugeVariant::LogPower,
        GaugeConstants {
            m: None,
            c: 3.0,
            beta: 1.0,
            alpha: Some(5.0 / 6.0),
        },
        &FULL_SCHEDULE,
        &plan(200_000, 42),
        &CheckOptions::default(),
        "cor13i",
    )
    .unwrap();
    if verdict.verdict != VerdictKind::SatisfiedUpToHorizon {
        failures.push(format!("cor13i verdict {:?}", verdict.verdict));
    }

    let feller = feller_test(entry.a.entry(0, 0), &entry.weight, &FellerConfig::default()).unwrap();
    if !feller.both_diverge() {
        failures.push(format!(
            "scale/speed verdicts {:?}/{:?}",
            feller.positive.verdict, feller.negative.verdict
        ));
    }

    // Independent oracle: the closed-form antiderivative of y/(y+sqrt 2)^2 is
    // ln(y+sqrt 2) + sqrt2/(y+sqrt 2); the growth functional on the positive
    // side is its definite integral from 0.
    let closed = |x: f64| {
        let s = 2f64.sqrt();
        ((x + s) / s).ln() + s / (x + s) - 1.0
    };
    let diff = feller.positive.phi_big[3] - feller.positive.phi_big[2];
    let oracle = closed(1e4) - closed(1e3);
    if (diff - oracle).abs() / oracle > 1e-6 {
        failures.push(format!("quadrature {diff} vs closed form {oracle}"));
    }
    // Pinned reproduction constant (relative tolerance).
    if (diff - 2.3013).abs() > 1e-3 * 2.3013 {
        failures.push(format!("Phi(1e4)-Phi(1e3) = {diff} not within 1e-3 of 2.3013"));
    }
    if started.elapsed().as_secs() >= 120 {
        failures.push(format!("runtime {:?} exceeds 120 s", started.elapsed()));
    }
    report(2, "one-dimensional reproduction", &failures, started);
}

// ---------------------------------------------------------------------------
// 3. Planar reproduction
// ---------------------------------------------------------------------------

#[test]
fn acceptance_3_planar_reproduction() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let entry = registry::lookup("gim-trutnau-2d").unwrap();
    let constants = GaugeConstants {
        m: None,
        c: 5.0,
        beta: 1.0,
        alpha: Some(0.8),
    };
    let verdict = check_gauge_criterion(
        &entry.form_data(false),
        GaugeVariant::LogPower,
        constants,
        &FULL_SCHEDULE,
        &plan(200_000, 42),
        &CheckOptions::default(),
        "g1i",
    )
    .unwrap();
    if verdict.verdict != VerdictKind::SatisfiedUpToHorizon {
        failures.push(format!("g1i verdict {:?}", verdict.verdict));
    }
    match verdict.growth_exponent {
        Some(exp) if (exp - 4.0).abs() <= 0.5 => {}
        other => failures.push(format!("A_hat growth exponent {other:?} not 4.0 +- 0.5")),
    }

    let zero = check_gauge_criterion(
        &entry.form_data(true),
        GaugeVariant::LogPower,
        constants,
        &FULL_SCHEDULE,
        &plan(200_000, 42),
        &CheckOptions::default(),
        "g1i",
    )
    .unwrap();
    if zero.verdict != VerdictKind::Violated {
        failures.push(format!("zero-drift verdict {:?}", zero.verdict));
    }
    if zero.witness.as_ref().and_then(|w| w.point.as_ref()).is_none() {
        failures.push("zero-drift violation lacks a pointwise witness".to_string());
    }
    if started.elapsed().as_secs() >= 120 {
        failures.push(format!("runtime {:?} exceeds 120 s", started.elapsed()));
    }
    report(3, "planar reproduction", &failures, started);
}

// ---------------------------------------------------------------------------
// 4. Divergence-free gate
// ---------------------------------------------------------------------------

/// Random polynomial h(x1, x2) of total degree <= 3 with its exact partials.
struct StreamPolynomial {
    coeffs: Vec<(u32, u32, f64)>,
}

impl StreamPolynomial {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut coeffs = Vec::new();
        for i in 0..=3u32 {
            for j in 0..=(3 - i) {
                coeffs.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        StreamPolynomial { coeffs }
    }

    fn d1(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .filter(|(i, _, _)| *i > 0)
            .map(|(i, j, c)| c * *i as f64 * x[0].powi(*i as i32 - 1) * x[1].powi(*j as i32))
            .sum()
    }

    fn d2(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .filter(|(_, j, _)| *j > 0)
            .map(|(i, j, c)| c * *j as f64 * x[0].powi(*i as i32) * x[1].powi(*j as i32 - 1))
            .sum()
    }
}

#[test]
fn acceptance_4_divergence_free_gate() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let opts = DivergenceOptions {
        seed: 42,
        ..DivergenceOptions::default()
    };

    // The planar registry drift against its own weight.
    let entry = registry::lookup("gim-trutnau-2d").unwrap();
    let gate = check_divergence_free(&entry.b, &entry.weight, entry.mu_power, &opts).unwrap();
    if !gate.pass {
        failures.push("planar registry drift failed the gate".to_string());
    }

    // Twenty random rotated stream fields (1/phi)(d2 h, -d1 h): divergence
    // free against phi dx for any positive phi and any h.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let light = DivergenceOptions {
        tests: 6,
        samples_per_test: 15_000,
        seed: 42,
        ..DivergenceOptions::default()
    };
    for field_index in 0..20 {
        let h = std::sync::Arc::new(StreamPolynomial::random(&mut rng));
        let with_weight = field_index % 2 == 1;
        let weight = if with_weight {
            ScalarField::from_fn(2, "wob", |x| 1.0 + 0.5 * (x[0] * 0.7).cos().powi(2))
        } else {
            ScalarField::constant(2, 1.0)
        };
        let w1 = weight.clone();
        let w2 = weight.clone();
        let h1 = h.clone();
        let h2 = h.clone();
        let b = VectorField::from_components(vec![
            ScalarField::from_fn(2, "b1", move |x| h1.d2(x) / w1.value(x)),
            ScalarField::from_fn(2, "b2", move |x| -h2.d1(x) / w2.value(x)),
        ]);
        let gate = check_divergence_free(&b, &weight, 1, &light).unwrap();
        if !gate.pass {
            failures.push(format!("stream field {field_index} failed the gate"));
        }
    }

    // The gradient-like field must fail.
    let bad = VectorField::from_exprs(&["x1", "0"], 2).unwrap();
    let flat = ScalarField::constant(2, 1.0);
    let gate = check_divergence_free(&bad, &flat, 1, &opts).unwrap();
    if gate.pass {
        failures.push("gradient-like field (x1, 0) passed the gate".to_string());
    }
    if started.elapsed().as_secs() >= 60 {
        failures.push(format!("runtime {:?} exceeds 60 s", started.elapsed()));
    }
    report(4, "divergence-free gate", &failures, started);
}

// ---------------------------------------------------------------------------
// 5. Invariant suite
// ---------------------------------------------------------------------------

fn random_ast(rng: &mut ChaCha8Rng, dim: usize, depth: usize) -> Ast {
    if depth == 0 || rng.random_range(0..10) < 2 {
        return if rng.random::<bool>() {
            Ast::Const((rng.random_range(0..512) as f64) / 16.0)
        } else {
            Ast::Var(rng.random_range(0..dim))
        };
    }
    match rng.random_range(0..10) {
        0 => Ast::Neg(Box::new(random_ast(rng, dim, depth - 1))),
        1..=4 => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]
                [rng.random_range(0..5)];
            Ast::Binary(
                op,
                Box::new(random_ast(rng, dim, depth - 1)),
                Box::new(random_ast(rng, dim, depth - 1)),
            )
        }
        5 | 6 => {
            let f = [Func::Exp, Func::Log, Func::Sqrt, Func::Abs][rng.random_range(0..4)];
            Ast::Call(f, vec![random_ast(rng, dim, depth - 1)])
        }
        7 => {
            let f = [Func::Pow, Func::Min, Func::Max][rng.random_range(0..3)];
            Ast::Call(
                f,
                vec![
                    random_ast(rng, dim, depth - 1),
                    random_ast(rng, dim, depth - 1),
                ],
            )
        }
        _ => {
            let op = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge][rng.random_range(0..4)];
            Ast::Piecewise {
                cond: Box::new(Ast::Binary(
                    op,
                    Box::new(random_ast(rng, dim, depth - 1)),
                    Box::new(random_ast(rng, dim, depth - 1)),
                )),
                then: Box::new(random_ast(rng, dim, depth - 1)),
                otherwise: Box::new(random_ast(rng, dim, depth - 1)),
            }
        }
    }
}

fn synthetic_table(ns: &[u32], a_hat: impl Fn(u32) -> f64) -> GrowthTable {
    GrowthTable {
        phi: PhiFamily::Quadratic { c: 1.0 },
        k0: 0.5,
        rows: ns
            .iter()
            .map(|&n| GrowthRow {
                n,
                a_sup: SupEstimate {
                    value: 0.0,
                    witness: vec![],
                    evaluated: 0,
                },
                b_sup: SupEstimate {
                    value: 0.0,
                    witness: vec![],
                    evaluated: 0,
                },
                c_sup: SupEstimate {
                    value: 0.0,
                    witness: vec![],
                    evaluated: 0,
                },
                volume: Estimate {
                    value: 0.0,
                    std_error: 0.0,
                },
                drift_norm: Estimate {
                    value: 0.0,
                    std_error: 0.0,
                },
                a_hat: a_hat(n),
            })
            .collect(),
    }
}

#[test]
fn acceptance_5_invariant_suite() {
    let started = Instant::now();
    let mut failures = Vec::new();

    // Parser round trip on 500 generated expressions.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut round_trip_failures = 0;
    for _ in 0..500 {
        let ast = random_ast(&mut rng, 3, 5);
        let printed = ast.to_string();
        match parse_expression(&printed, 3) {
            Ok(reparsed) if reparsed == ast => {}
            _ => round_trip_failures += 1,
        }
    }
    if round_trip_failures > 0 {
        failures.push(format!("{round_trip_failures}/500 round trips failed"));
    }

    // split_matrix exactness: exact anti-symmetry and symmetric symmetry, and
    // reconstruction at machine precision on sampled points.
    let a = MatrixField::from_exprs(
        &[
            &["x1^2 + 1", "exp(x1/4) * x2"],
            &["x1 - 3*x2", "abs(x2) + 2"],
        ],
        2,
    )
    .unwrap();
    let (sym, anti) = split_matrix(&a);
    for _ in 0..200 {
        let x = [rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0)];
        let (av, sv, nv) = (a.value(&x), sym.value(&x), anti.value(&x));
        if nv[1] != -nv[2] || nv[0] != 0.0 || nv[3] != 0.0 {
            failures.push("anti part not exactly anti-symmetric".to_string());
            break;
        }
        if sv[1] != sv[2] {
            failures.push("symmetric part not exactly symmetric".to_string());
            break;
        }
        for k in 0..4 {
            let scale = av[k].abs().max(sv[k].abs()).max(nv[k].abs()).max(1.0);
            if (sv[k] + nv[k] - av[k]).abs() > 2.0 * f64::EPSILON * scale {
                failures.push(format!("reconstruction off at {x:?} entry {k}"));
                break;
            }
        }
    }

    // Gamma(rho, rho) = 1 for A = I, rho = |x| within 1e-10.
    let gamma = gamma_rho(
        &MatrixField::identity(2),
        &ScalarField::norm_gauge(2),
        DEFAULT_H_REL,
    );
    for _ in 0..1000 {
        let x = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
        if x[0] == 0.0 && x[1] == 0.0 {
            continue;
        }
        if (gamma.value(&x) - 1.0).abs() > 1e-10 {
            failures.push(format!("Gamma != 1 at {x:?}"));
            break;
        }
    }

    // Measure additivity within 3 SE on 20 random weights.
    let domain = DomainSpec::euclidean(2, 0.5);
    for w_index in 0..20u64 {
        let coeffs: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = coeffs.clone();
        let weight = ScalarField::from_fn(2, "rand-w", move |x| {
            let p = c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[1];
            0.1 + p * p
        });
        let p = plan(100_000, 1000 + w_index);
        let inner = GaugeShell {
            inner: 1.0,
            outer: 2.0,
        };
        let outer = GaugeShell {
            inner: 2.0,
            outer: 4.0,
        };
        let whole = GaugeShell {
            inner: 1.0,
            outer: 4.0,
        };
        let a = shell_measure(&domain, inner, &weight, 1, &p, 3 * w_index).unwrap();
        let b = shell_measure(&domain, outer, &weight, 1, &p, 3 * w_index + 1).unwrap();
        let c = shell_measure(&domain, whole, &weight, 1, &p, 3 * w_index + 2).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2) + c.std_error.powi(2)).sqrt();
        if (a.value + b.value - c.value).abs() > 3.0 * se {
            failures.push(format!("measure additivity failed for weight {w_index}"));
        }
    }

    // c_n monotonicity and exact A_hat recomposition on every registry entry.
    for name in registry::NAMES {
        let entry = registry::lookup(name).unwrap();
        let data = entry.form_data(false);
        let p = plan(40_000, 42);
        let caches = build_caches(&data, &FULL_SCHEDULE, &p).unwrap();
        let table = build_growth_table(
            &data,
            &PhiFamily::LogPower { c: 3.0, beta: 1.0 },
            &FULL_SCHEDULE,
            &p,
            &caches,
        )
        .unwrap();
        if !table
            .rows
            .windows(2)
            .all(|w| w[0].c_sup.value <= w[1].c_sup.value)
        {
            failures.push(format!("c_n not monotone for {name}"));
        }
        if !table
            .rows
            .iter()
            .all(|r| r.a_hat.to_bits() == r.recompose_a_hat().to_bits())
        {
            failures.push(format!("A_hat recomposition not exact for {name}"));
        }
    }

    // Verdict invariance under lambda-scaling of (Gamma, N) with rescaled M.
    let brown = registry::lookup("brownian").unwrap().form_data(false);
    let schedule = [1u32, 2, 4, 8, 16];
    let zero2d = registry::lookup("gim-trutnau-2d").unwrap().form_data(true);
    for lambda in [0.5, 2.0] {
        for (data, m, expect_violated) in
            [(&brown, 1.0, false), (&zero2d, 1.0, true)]
        {
            let run = |d: &FormData, m: f64| {
                check_gauge_criterion(
                    d,
                    GaugeVariant::Quadratic,
                    GaugeConstants {
                        m: Some(m),
                        c: 1.0,
                        beta: 0.0,
                        alpha: Some(1.0),
                    },
                    &schedule,
                    &plan(40_000, 7),
                    &CheckOptions::default(),
                    "g1iii",
                )
                .unwrap()
            };
            let base = run(data, m);
            let scaled = run(&data.scaled(lambda), lambda * m);
            if base.verdict != scaled.verdict {
                failures.push(format!(
                    "verdict changed under lambda = {lambda}: {:?} vs {:?}",
                    base.verdict, scaled.verdict
                ));
            }
            if expect_violated && base.verdict != VerdictKind::Violated {
                failures.push(format!("expected violated baseline, got {:?}", base.verdict));
            }
        }
    }

    // Decay test closed form: c_n = 0, A_hat = n gives log q_n = -phi(2n)
    // to 1e-12 in log space.
    let table = synthetic_table(&[1, 2, 4, 8, 16, 32, 64], |n| n as f64);
    let verdict = decay_check(&table, 0.37, &DecayPolicy::default());
    let phi = PhiFamily::Quadratic { c: 1.0 };
    for (lq, row) in verdict.log_q.iter().zip(&table.rows) {
        if (lq - (-phi.phi(2.0 * row.n as f64))).abs() > 1e-12 {
            failures.push(format!("decay closed form off at n = {}", row.n));
        }
    }

    report(5, "invariant suite", &failures, started);
}

// ---------------------------------------------------------------------------
// 6. Oracle quality gates
// ---------------------------------------------------------------------------

#[test]
fn acceptance_6_oracle_quality_gates() {
    let started = Instant::now();
    let mut failures = Vec::new();

    // Generator-identification gate via exact one-step Gaussian expectations
    // through the implemented (b, sigma). For A = I/2, B = 0, phi = 1 and
    // f = |x|^2 the residual against f + dt*(Lf) vanishes identically (the
    // Euler step is exact for quadratics); the quartic probe f = |x|^4 has
    // residual (d^2 + 2d) dt^2, so its log-log slope measures the weak order.
    let a = MatrixField::scaled_identity(2, 0.5);
    let b = VectorField::zero(2);
    let flat = ScalarField::constant(2, 1.0);
    let sim = Simulator::new(&a, &b, &flat, 1, DEFAULT_H_REL).unwrap();
    let x0 = [0.7, -0.4];
    let d = 2.0;
    let n0: f64 = x0.iter().map(|v| v * v).sum();
    let mut quartic = Vec::new();
    for dt in [1e-2, 5e-3, 2.5e-3] {
        let (bv, sigma) = sim.step_coefficients(&x0).unwrap();
        let m: Vec<f64> = x0.iter().zip(&bv).map(|(x, b)| x + b * dt).collect();
        let m_sq: f64 = m.iter().map(|v| v * v).sum();
        let frob: f64 = sigma.iter().map(|v| v * v).sum();
        let resid_sq = m_sq + dt * frob - n0 - dt * d;
        if resid_sq.abs() > 1e-10 {
            failures.push(format!("quadratic residual {resid_sq} at dt = {dt}"));
        }
        let e4 = m_sq * m_sq
            + 4.0 * dt * m_sq
            + (d * dt) * (d * dt)
            + 2.0 * d * dt * dt
            + 2.0 * m_sq * d * dt;
        let resid_quartic = e4 - n0 * n0 - dt * (2.0 * d + 4.0) * n0;
        quartic.push((dt.ln(), resid_quartic.abs().ln()));
    }
    match conservd::growth::fit_slope(&quartic) {
        Some(slope) if slope >= 1.8 => {}
        other => failures.push(format!("weak-order slope {other:?} below 1.8")),
    }

    // Dual-route agreement of the growth functional at 1e-8 relative.
    let entry = registry::lookup("gim-trutnau-1d").unwrap();
    let feller = feller_test(entry.a.entry(0, 0), &entry.weight, &FellerConfig::default()).unwrap();
    for side in [&feller.positive, &feller.negative] {
        for (nested, algebraic) in side.phi_big.iter().zip(&side.phi_big_algebraic) {
            if (nested - algebraic).abs() / nested.abs().max(1e-300) > 1e-8 {
                failures.push(format!("dual routes disagree: {nested} vs {algebraic}"));
            }
        }
    }

    // The explosive coefficient is recognized as bounded on both sides.
    let explosive = ScalarField::from_expr("(1 + x1^2)^2", 1).unwrap();
    let one = ScalarField::constant(1, 1.0);
    let result = feller_test(&explosive, &one, &FellerConfig::default()).unwrap();
    if result.exit_code() != 2 {
        failures.push(format!(
            "explosive example verdicts {:?}/{:?}",
            result.positive.verdict, result.negative.verdict
        ));
    }

    report(6, "oracle quality gates", &failures, started);
}

// ---------------------------------------------------------------------------
// 7. Determinism of command-line outputs
// ---------------------------------------------------------------------------

#[test]
fn acceptance_7_byte_identical_reports() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let bin = env!("CARGO_BIN_EXE_conservd");

    let run = |dir: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args([
                "analyze",
                "--registry",
                "brownian",
                "--criterion",
                "symexamii",
                "--samples",
                "40000",
                "--seed",
                "7",
                "--out-dir",
            ])
            .arg(dir)
            .env_remove("CONSERVD_SEED")
            .stdout(std::process::Stdio::null())
            .status()
            .expect("binary runs");
        assert!(status.success());
    };

    let tmp = tempfile::tempdir().unwrap();
    let (dir1, dir2) = (tmp.path().join("run1"), tmp.path().join("run2"));
    run(&dir1);
    run(&dir2);
    for file in ["report.json", "growth.csv"] {
        let a = std::fs::read(dir1.join(file)).unwrap();
        let b = std::fs::read(dir2.join(file)).unwrap();
        if a != b {
            failures.push(format!("{file} differs between identical runs"));
        }
        if a.is_empty() {
            failures.push(format!("{file} is empty"));
        }
    }
    report(7, "byte-identical reports", &failures, started);
}
