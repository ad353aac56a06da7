//! Command-line front end: `analyze`, `feller`, `simulate`, `examples`,
//! `plot-data`.
//!
//! Exit codes: 0 success / all criteria satisfied; 2 any criterion violated
//! (or example mismatch / bounded scale-function side); 3 inconclusive;
//! 64 configuration errors; 70 numerical failures.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_constant, parse_float_list, parse_key_values, parse_u32_list, ConstantFlags,
    ResolvedModel, RunConfig,
};
use crate::criteria::{
    auto_constants, check_gauge_criterion, check_symmetric_criterion, decay_check,
    sectorial_check, CheckOptions, CriterionKind, CriterionVerdict, DecayPolicy, GaugeConstants,
    GaugeVariant, SectorialConstants, SymConstants, SymVariant, VerdictKind,
};
use crate::divergence::{check_divergence_free, DivergenceOptions};
use crate::error::{Error, Result};
use crate::field::{beta_field, gamma_rho, n_rho, split_matrix, VectorField, DEFAULT_H_REL};
use crate::growth::{build_caches, build_growth_table, FormData};
use crate::oracle::{em_explosion_mc, feller_test, ExplosionConfig, FellerConfig};
use crate::registry::{self, CanonCriterion, CanonOracle};
use crate::report::{write_outputs, GrowthTableReport, Report};

#[derive(Parser)]
#[command(
    name = "conservd",
    version,
    about = "Numerical conservativeness (non-explosion) tests for divergence-free perturbations of weighted energy forms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the growth table and evaluate criteria.
    Analyze(AnalyzeArgs),
    /// One-dimensional scale/speed non-explosion oracle.
    Feller(FellerArgs),
    /// Monte-Carlo escape-probability estimation.
    Simulate(SimulateArgs),
    /// Run built-in examples against their expected verdict table.
    Examples(ExamplesArgs),
    /// Re-emit the CSV views from a previously written JSON report.
    PlotData(PlotDataArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Flat key/value configuration file; flags override file keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in coefficient set by name.
    #[arg(long)]
    registry: Option<String>,
    /// Diffusion-matrix entry expression, row-major (repeat d*d times).
    #[arg(long = "A")]
    a: Vec<String>,
    /// Drift component expression (repeat d times).
    #[arg(long = "B")]
    b: Vec<String>,
    /// Measure weight expression.
    #[arg(long = "phi")]
    phi: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Measure convention: 1 for phi dx, 2 for phi^2 dx.
    #[arg(long)]
    mu_power: Option<u8>,
    /// Gauge radius of the excluded compact core.
    #[arg(long)]
    k0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo samples per annulus.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write the JSON report only.
    #[arg(long)]
    json: bool,
    /// Write the CSV exports only.
    #[arg(long)]
    csv: bool,
}

impl ModelArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let map = parse_key_values(&text)?;
            cfg.merge_file(&map)?;
        }
        if self.registry.is_some() {
            cfg.model.registry = self.registry;
            cfg.model.a_exprs.clear();
            cfg.model.b_exprs.clear();
        }
        if !self.a.is_empty() {
            cfg.model.a_exprs = self.a;
            cfg.model.registry = None;
        }
        if !self.b.is_empty() {
            cfg.model.b_exprs = self.b;
        }
        if self.phi.is_some() {
            cfg.model.weight_expr = self.phi;
        }
        if self.dim.is_some() {
            cfg.model.dim = self.dim;
        }
        if self.mu_power.is_some() {
            cfg.model.mu_power = self.mu_power;
        }
        if self.k0.is_some() {
            cfg.model.k0 = self.k0;
        }
        if let Some(seed) = self.seed {
            cfg.plan.seed = seed;
        }
        if let Some(samples) = self.samples {
            cfg.plan.samples = samples;
        }
        if self.out_dir.is_some() {
            cfg.out_dir = self.out_dir;
        }
        if self.json || self.csv {
            cfg.json = self.json;
            cfg.csv = self.csv;
        }
        cfg.apply_env();
        Ok(cfg)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Criterion id: g1i, g1ii, g1iii, cor13i..cor13iii, symexami,
    /// symexamii, sectorial (repeatable).
    #[arg(long)]
    criterion: Vec<String>,
    /// Pointwise bound constant M (fitted when omitted).
    #[arg(long = "M")]
    m: Option<String>,
    /// Weight-family constant C.
    #[arg(long = "C")]
    c: Option<String>,
    /// Exponent beta (family i).
    #[arg(long)]
    beta: Option<String>,
    /// Growth exponent alpha (fitted when omitted).
    #[arg(long)]
    alpha: Option<String>,
    /// Volume-growth constant N (symmetric criteria; fitted when omitted).
    #[arg(long = "N")]
    n: Option<String>,
    /// Grid-search all constants.
    #[arg(long)]
    auto: bool,
    /// Replace the drift B by zero before the analysis.
    #[arg(long)]
    zero_drift: bool,
    /// Annulus schedule, e.g. 1,2,4,8,16,32,64.
    #[arg(long)]
    schedule: Option<String>,
    /// Also run the decay test on the growth table.
    #[arg(long)]
    decay: bool,
    /// Override the decay-time constant T.
    #[arg(long = "decay-T")]
    decay_time: Option<String>,
}

#[derive(Args)]
struct FellerArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Evaluation levels, e.g. 10,100,1000,10000.
    #[arg(long)]
    ladder: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    paths: Option<usize>,
    /// Simulation horizon.
    #[arg(long = "T")]
    t_sim: Option<f64>,
    /// Euler-Maruyama step.
    #[arg(long)]
    dt: Option<f64>,
    /// Escape radii, e.g. 2,4,8.
    #[arg(long)]
    radii: Option<String>,
    /// Start point, e.g. 1,1 (origin when omitted).
    #[arg(long)]
    x0: Option<String>,
}

#[derive(Args)]
struct ExamplesArgs {
    /// Example name or "all".
    name: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PlotDataArgs {
    /// A report.json produced by analyze/feller/simulate/examples.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Feller(args) => cmd_feller(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Examples(args) => cmd_examples(args),
        Command::PlotData(args) => cmd_plot_data(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::UnknownIdentifier { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidConstants(_)
        | Error::Config(_)
        | Error::Io(_)
        | Error::Json(_) => 64,
        Error::NonFinite { .. }
        | Error::NonPositiveWeight { .. }
        | Error::AcceptanceRate { .. }
        | Error::QuadratureNonConvergence { .. }
        | Error::NotPositiveDefinite { .. } => 70,
    }
}

// ---------------------------------------------------------------------------
// Criterion dispatch shared by analyze and examples
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CriterionSpec {
    Gauge(GaugeVariant),
    Symmetric(SymVariant),
    Sectorial,
}

fn parse_criterion_id(id: &str) -> Result<CriterionSpec> {
    Ok(match id {
        "g1i" | "cor13i" => CriterionSpec::Gauge(GaugeVariant::LogPower),
        "g1ii" | "cor13ii" => CriterionSpec::Gauge(GaugeVariant::LogLog),
        "g1iii" | "cor13iii" => CriterionSpec::Gauge(GaugeVariant::Quadratic),
        "symexami" => CriterionSpec::Symmetric(SymVariant::LogPower),
        "symexamii" => CriterionSpec::Symmetric(SymVariant::Quadratic),
        "sectorial" => CriterionSpec::Sectorial,
        other => {
            return Err(Error::Config(format!(
                "unknown criterion `{other}` (known: g1i, g1ii, g1iii, cor13i, cor13ii, cor13iii, symexami, symexamii, sectorial)"
            )))
        }
    })
}

/// Data for the direct (Γ from A, N from B) and sectorial (Γ from Ã, N from
/// the compensating β) readings of one model.
struct PreparedData {
    direct: FormData,
    model_mu_power: u8,
}

impl PreparedData {
    fn new(model: &ResolvedModel, zero_drift: bool) -> Self {
        let b = if zero_drift {
            VectorField::zero(model.domain.dim)
        } else {
            model.b.clone()
        };
        let gamma = gamma_rho(&model.a, &model.domain.gauge, DEFAULT_H_REL);
        let drift = n_rho(&b, &model.domain.gauge, DEFAULT_H_REL);
        let direct = FormData::new(
            gamma,
            drift,
            model.weight.clone(),
            model.mu_power,
            model.domain.clone(),
        )
        .with_zero_drift_flag(b.is_zero_const());
        PreparedData {
            direct,
            model_mu_power: model.mu_power,
        }
    }

    fn sectorial(&self, model: &ResolvedModel, zero_drift: bool) -> Result<FormData> {
        if self.model_mu_power != 2 {
            return Err(Error::InvalidConstants(
                "sectorial criterion needs mu_power = 2 (measure phi^2 dx)".to_string(),
            ));
        }
        let b = if zero_drift {
            VectorField::zero(model.domain.dim)
        } else {
            model.b.clone()
        };
        let (sym, anti) = split_matrix(&model.a);
        let beta = beta_field(&anti, &b, &model.weight, DEFAULT_H_REL);
        Ok(crate::criteria::sectorial_form_data(
            &sym,
            &beta,
            &model.weight,
            model.domain.clone(),
            DEFAULT_H_REL,
        ))
    }
}

#[allow(clippy::too_many_arguments)]
fn run_criterion(
    id: &str,
    spec: CriterionSpec,
    data: &FormData,
    constants: &ConstantFlags,
    schedule: &[u32],
    plan: &crate::sampling::SamplePlan,
    opts: &CheckOptions,
) -> Result<CriterionVerdict> {
    match spec {
        CriterionSpec::Gauge(variant) => {
            let needs_grid = constants.auto || constants.c.is_none();
            if needs_grid {
                match auto_constants(
                    CriterionKind::Gauge(variant),
                    data,
                    schedule,
                    plan,
                    opts,
                    id,
                )? {
                    Some(fit) => Ok(fit.verdict),
                    None => {
                        let mut verdict = check_gauge_criterion(
                            data,
                            variant,
                            GaugeConstants {
                                m: None,
                                c: constants.c.unwrap_or(1.0),
                                beta: constants.beta.unwrap_or(match variant {
                                    GaugeVariant::LogPower => 1.0,
                                    _ => 0.0,
                                }),
                                alpha: None,
                            },
                            schedule,
                            plan,
                            opts,
                            id,
                        )?;
                        verdict.notes.push(
                            "constant grid search found no admissible constants; shown for the neutral grid point".to_string(),
                        );
                        if verdict.verdict == VerdictKind::SatisfiedUpToHorizon {
                            verdict.verdict = VerdictKind::Inconclusive;
                        }
                        Ok(verdict)
                    }
                }
            } else {
                check_gauge_criterion(
                    data,
                    variant,
                    GaugeConstants {
                        m: constants.m,
                        c: constants.c.unwrap(),
                        beta: constants.beta.unwrap_or(match variant {
                            GaugeVariant::LogPower => 1.0,
                            _ => 0.0,
                        }),
                        alpha: constants.alpha,
                    },
                    schedule,
                    plan,
                    opts,
                    id,
                )
            }
        }
        CriterionSpec::Symmetric(variant) => {
            let needs_grid = constants.auto
                || (variant == SymVariant::LogPower && constants.beta.is_none());
            if needs_grid {
                match auto_constants(
                    CriterionKind::Symmetric(variant),
                    data,
                    schedule,
                    plan,
                    opts,
                    id,
                )? {
                    Some(fit) => Ok(fit.verdict),
                    None => {
                        let mut verdict = check_symmetric_criterion(
                            data,
                            variant,
                            SymConstants {
                                m: constants.m,
                                n_const: constants.n_const,
                                beta: constants.beta.unwrap_or(0.0),
                            },
                            schedule,
                            plan,
                            opts,
                            id,
                        )?;
                        verdict.notes.push(
                            "constant grid search found no admissible constants".to_string(),
                        );
                        Ok(verdict)
                    }
                }
            } else {
                check_symmetric_criterion(
                    data,
                    variant,
                    SymConstants {
                        m: constants.m,
                        n_const: constants.n_const,
                        beta: constants.beta.unwrap_or(0.0),
                    },
                    schedule,
                    plan,
                    opts,
                    id,
                )
            }
        }
        CriterionSpec::Sectorial => sectorial_check(
            data,
            SectorialConstants {
                m: constants.m,
                c: constants.c,
                alpha: constants.alpha,
            },
            schedule,
            plan,
            opts,
        ),
    }
}

fn print_verdict(v: &CriterionVerdict) {
    let consts: Vec<String> = v
        .constants
        .iter()
        .map(|(k, val)| format!("{k}={val:.6}"))
        .collect();
    println!(
        "  criterion {}: {}  ({}; horizon n={}, fitted: [{}])",
        v.id,
        verdict_str(v.verdict),
        consts.join(", "),
        v.horizon,
        v.fitted.join(", ")
    );
    if let Some(w) = &v.witness {
        if let Some(p) = &w.point {
            println!("    witness point {p:?} (value {:?})", w.value);
        } else if let Some(i) = w.index {
            println!("    witness index n={i} (value {:?})", w.value);
        }
    }
}

fn verdict_str(v: VerdictKind) -> &'static str {
    match v {
        VerdictKind::SatisfiedUpToHorizon => "satisfied-up-to-horizon",
        VerdictKind::Violated => "violated",
        VerdictKind::Inconclusive => "inconclusive",
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs) -> Result<i32> {
    let mut cfg = args.model.into_config()?;
    if !args.criterion.is_empty() {
        cfg.criteria = args.criterion;
    }
    if let Some(v) = &args.m {
        cfg.constants.m = Some(parse_constant(v)?);
    }
    if let Some(v) = &args.c {
        cfg.constants.c = Some(parse_constant(v)?);
    }
    if let Some(v) = &args.beta {
        cfg.constants.beta = Some(parse_constant(v)?);
    }
    if let Some(v) = &args.alpha {
        cfg.constants.alpha = Some(parse_constant(v)?);
    }
    if let Some(v) = &args.n {
        cfg.constants.n_const = Some(parse_constant(v)?);
    }
    cfg.constants.auto |= args.auto;
    cfg.zero_drift |= args.zero_drift;
    cfg.include_decay |= args.decay;
    if let Some(v) = &args.decay_time {
        cfg.decay_time = Some(parse_constant(v)?);
    }
    if let Some(s) = &args.schedule {
        cfg.schedule = parse_u32_list(s)?;
    }

    let model = cfg.resolve_model()?;
    let prepared = PreparedData::new(&model, cfg.zero_drift);

    // Default criterion: the registry entry's canonical one.
    let mut criteria = cfg.criteria.clone();
    let mut canonical_constants: Option<ConstantFlags> = None;
    if criteria.is_empty() {
        if let Some(entry) = &model.entry {
            criteria.push(entry.criterion.id().to_string());
            canonical_constants = Some(canon_constants(&entry.criterion));
        } else {
            return Err(Error::Config(
                "no criterion selected; pass --criterion".to_string(),
            ));
        }
    }

    let opts = CheckOptions::default();
    let mut verdicts = Vec::new();
    println!(
        "conservd analyze{} seed={} samples={} horizon n={}",
        model
            .name
            .as_deref()
            .map(|n| format!(" registry={n}"))
            .unwrap_or_default(),
        cfg.plan.seed,
        cfg.plan.samples,
        cfg.schedule.last().copied().unwrap_or(0)
    );
    let mut first_family = None;
    for id in &criteria {
        let spec = parse_criterion_id(id)?;
        let constants = canonical_constants.unwrap_or(cfg.constants);
        let data = match spec {
            CriterionSpec::Sectorial => prepared.sectorial(&model, cfg.zero_drift)?,
            _ => prepared.direct.clone(),
        };
        let verdict = run_criterion(id, spec, &data, &constants, &cfg.schedule, &cfg.plan, &opts)?;
        print_verdict(&verdict);
        if first_family.is_none() {
            let c = verdict.constants.get("C").copied().unwrap_or(3.0);
            let beta = verdict.constants.get("beta").copied().unwrap_or(1.0);
            let family = match spec {
                CriterionSpec::Gauge(v) => v.phi_family(c, beta),
                CriterionSpec::Sectorial => GaugeVariant::LogPower.phi_family(c, 1.0),
                CriterionSpec::Symmetric(SymVariant::Quadratic) => {
                    GaugeVariant::Quadratic.phi_family(3.0, 0.0)
                }
                CriterionSpec::Symmetric(SymVariant::LogPower) => {
                    if beta >= 2.0 {
                        GaugeVariant::LogLog.phi_family(3.0, 0.0)
                    } else {
                        GaugeVariant::LogPower.phi_family(3.0, beta)
                    }
                }
            };
            first_family = Some((family, data.clone(), verdict.decay_time));
        }
        verdicts.push(verdict);
    }

    // Growth table for the report, in the first criterion's weight family.
    let (family, data, decay_time) = first_family.expect("at least one criterion ran");
    let caches = build_caches(&data, &cfg.schedule, &cfg.plan)?;
    let table = build_growth_table(&data, &family, &cfg.schedule, &cfg.plan, &caches)?;
    let t = cfg
        .decay_time
        .or(decay_time)
        .unwrap_or_else(|| table.default_decay_time(0.5));
    if cfg.include_decay {
        let decay = decay_check(&table, t, &DecayPolicy::default());
        print_verdict(&decay);
        verdicts.push(decay);
    }

    let mut report = Report::new("analyze", cfg.plan.seed);
    report.registry = model.name.clone();
    report.parameters = cfg.parameters_json();
    report.growth_table = Some(GrowthTableReport::new(&table, t));
    report.criteria = verdicts.clone();
    if let Some(dir) = &cfg.out_dir {
        let written = write_outputs(dir, &report, cfg.json, cfg.csv)?;
        for path in written {
            println!("  wrote {}", path.display());
        }
    }

    let code = verdicts
        .iter()
        .map(|v| v.exit_code())
        .fold(0, |acc, c| match (acc, c) {
            (2, _) | (_, 2) => 2,
            (3, _) | (_, 3) => 3,
            _ => 0,
        });
    Ok(code)
}

fn canon_constants(c: &CanonCriterion) -> ConstantFlags {
    match c {
        CanonCriterion::Gauge {
            m, c, beta, alpha, ..
        } => ConstantFlags {
            m: *m,
            c: Some(*c),
            beta: Some(*beta),
            alpha: *alpha,
            n_const: None,
            auto: false,
        },
        CanonCriterion::Symmetric { m, n, beta, .. } => ConstantFlags {
            m: *m,
            c: None,
            beta: Some(*beta),
            alpha: None,
            n_const: *n,
            auto: false,
        },
        CanonCriterion::Sectorial { m, c, alpha } => ConstantFlags {
            m: *m,
            c: *c,
            beta: None,
            alpha: *alpha,
            n_const: None,
            auto: false,
        },
    }
}

// ---------------------------------------------------------------------------
// feller
// ---------------------------------------------------------------------------

fn cmd_feller(args: FellerArgs) -> Result<i32> {
    let mut cfg = args.model.into_config()?;
    if let Some(ladder) = &args.ladder {
        cfg.ladder = parse_float_list(ladder)?;
    }
    if cfg.model.registry.is_none() && !cfg.model.a_exprs.is_empty() {
        cfg.model.dim = Some(1);
    }
    let model = cfg.resolve_model()?;
    if model.domain.dim != 1 {
        return Err(Error::Config(format!(
            "the scale/speed test is one-dimensional; model has dimension {}",
            model.domain.dim
        )));
    }
    let a_field = model.a.entry(0, 0).clone();
    let feller_cfg = FellerConfig {
        ladder: cfg.ladder.clone(),
        ..FellerConfig::default()
    };
    let result = feller_test(&a_field, &model.weight, &feller_cfg)?;
    println!(
        "conservd feller{}: positive side {:?} (slope {:.4}), negative side {:?} (slope {:.4})",
        model
            .name
            .as_deref()
            .map(|n| format!(" registry={n}"))
            .unwrap_or_default(),
        result.positive.verdict,
        result.positive.loglog_slope,
        result.negative.verdict,
        result.negative.loglog_slope,
    );
    for side in [&result.positive, &result.negative] {
        for (level, phi) in side.levels.iter().zip(&side.phi_big) {
            println!("  Phi({level}) = {phi}");
        }
    }

    let code = result.exit_code();
    let mut report = Report::new("feller", cfg.plan.seed);
    report.registry = model.name.clone();
    report.parameters = cfg.parameters_json();
    report.feller = Some(result);
    if let Some(dir) = &cfg.out_dir {
        for path in write_outputs(dir, &report, cfg.json, cfg.csv)? {
            println!("  wrote {}", path.display());
        }
    }
    Ok(code)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let mut cfg = args.model.into_config()?;
    if let Some(paths) = args.paths {
        cfg.sim.paths = paths;
    }
    if let Some(t) = args.t_sim {
        cfg.sim.t_sim = t;
    }
    if let Some(dt) = args.dt {
        cfg.sim.dt = dt;
    }
    if let Some(radii) = &args.radii {
        cfg.sim.radii = parse_float_list(radii)?;
    }
    if let Some(x0) = &args.x0 {
        cfg.sim.x0 = Some(parse_float_list(x0)?);
    }
    let model = cfg.resolve_model()?;
    if model.domain.is_closed_region() {
        // Reflected dynamics are not implemented; paths ignore the region.
        eprintln!(
            "note: the domain restriction is ignored by the simulator (no reflected dynamics); \
             escape probabilities refer to the unrestricted process"
        );
    }
    let explosion_cfg = ExplosionConfig {
        x0: cfg
            .sim
            .x0
            .clone()
            .unwrap_or_else(|| vec![0.0; model.domain.dim]),
        t_sim: cfg.sim.t_sim,
        dt: cfg.sim.dt,
        radii: cfg.sim.radii.clone(),
        paths: cfg.sim.paths,
        seed: cfg.plan.seed,
    };
    let est = em_explosion_mc(
        &model.a,
        &model.b,
        &model.weight,
        model.mu_power,
        &explosion_cfg,
    )?;
    println!(
        "conservd simulate{} paths={} T={} dt={} seed={}",
        model
            .name
            .as_deref()
            .map(|n| format!(" registry={n}"))
            .unwrap_or_default(),
        est.paths,
        est.t_sim,
        est.dt,
        est.seed
    );
    for rung in &est.rungs {
        println!(
            "  P(sup |X| >= {: <8}) = {:.6}  [{:.6}, {:.6}]  ({} / {})",
            rung.radius, rung.p_hat, rung.wilson_low, rung.wilson_high, rung.escaped, est.paths
        );
    }
    if est.invalid_paths > 0 {
        println!(
            "  {} path(s) hit invalid coefficients (counted as escaped); first witness {:?}",
            est.invalid_paths, est.invalid_witness
        );
    }

    let mut report = Report::new("simulate", cfg.plan.seed);
    report.registry = model.name.clone();
    report.parameters = cfg.parameters_json();
    report.escape = Some(est);
    if let Some(dir) = &cfg.out_dir {
        for path in write_outputs(dir, &report, cfg.json, cfg.csv)? {
            println!("  wrote {}", path.display());
        }
    }
    // The simulator reports; it never judges.
    Ok(0)
}

// ---------------------------------------------------------------------------
// examples
// ---------------------------------------------------------------------------

fn cmd_examples(args: ExamplesArgs) -> Result<i32> {
    let names: Vec<&str> = if args.name == "all" {
        registry::NAMES.to_vec()
    } else {
        vec![args.name.as_str()]
    };
    let mut all_ok = true;
    for name in names {
        let entry = registry::lookup(name)?;
        let seed = args.seed.unwrap_or(42);
        let samples = args.samples.unwrap_or(200_000);
        let plan = crate::sampling::SamplePlan {
            method: None,
            samples,
            seed,
            refine_rounds: 4,
        };
        println!("example {name}: {}", entry.description);

        // Canonical criterion with its reference constants.
        let data = entry.form_data(false);
        let schedule = crate::config::DEFAULT_SCHEDULE;
        let opts = CheckOptions::default();
        let id = entry.criterion.id();
        let spec = parse_criterion_id(id)?;
        let constants = canon_constants(&entry.criterion);
        let verdict = run_criterion(id, spec, &data, &constants, &schedule, &plan, &opts)?;
        print_verdict(&verdict);
        let criterion_ok = verdict.verdict == VerdictKind::SatisfiedUpToHorizon;
        if !criterion_ok {
            println!("  MISMATCH: expected satisfied-up-to-horizon");
        }
        all_ok &= criterion_ok;

        // Oracles.
        for oracle in &entry.oracles {
            match oracle {
                CanonOracle::FellerBothDiverge => {
                    let result = feller_test(
                        entry.a.entry(0, 0),
                        &entry.weight,
                        &FellerConfig::default(),
                    )?;
                    let ok = result.both_diverge();
                    println!(
                        "  oracle feller: positive {:?}, negative {:?} -> {}",
                        result.positive.verdict,
                        result.negative.verdict,
                        if ok { "ok" } else { "MISMATCH (expected diverges/diverges)" }
                    );
                    all_ok &= ok;
                }
                CanonOracle::EscapeBelow {
                    radii,
                    t_sim,
                    dt,
                    paths,
                    threshold,
                } => {
                    let est = em_explosion_mc(
                        &entry.a,
                        &entry.b,
                        &entry.weight,
                        entry.mu_power,
                        &ExplosionConfig {
                            x0: vec![0.0; entry.dim],
                            t_sim: *t_sim,
                            dt: *dt,
                            radii: radii.clone(),
                            paths: *paths,
                            seed,
                        },
                    )?;
                    let last = est.rungs.last().expect("radii non-empty");
                    let ok = last.p_hat < *threshold;
                    println!(
                        "  oracle escape: P(sup |X| >= {}) = {:.2e} (threshold {:.0e}) -> {}",
                        last.radius,
                        last.p_hat,
                        threshold,
                        if ok { "ok" } else { "MISMATCH" }
                    );
                    all_ok &= ok;
                }
                CanonOracle::DivergenceFreePass => {
                    let drift = entry.effective_drift();
                    let report = check_divergence_free(
                        &drift,
                        &entry.weight,
                        entry.mu_power,
                        &DivergenceOptions {
                            seed,
                            ..DivergenceOptions::default()
                        },
                    )?;
                    println!(
                        "  oracle divergence-free: {} ({} bump tests) -> {}",
                        if report.pass { "pass" } else { "fail" },
                        report.tests.len(),
                        if report.pass { "ok" } else { "MISMATCH" }
                    );
                    all_ok &= report.pass;
                }
            }
        }

        if let Some(dir) = &args.out_dir {
            let mut report = Report::new("examples", seed);
            report.registry = Some(name.to_string());
            report.criteria = vec![verdict];
            let sub = dir.join(name);
            for path in write_outputs(&sub, &report, true, true)? {
                println!("  wrote {}", path.display());
            }
        }
    }
    Ok(if all_ok { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// plot-data
// ---------------------------------------------------------------------------

fn cmd_plot_data(args: PlotDataArgs) -> Result<i32> {
    let bytes = std::fs::read(&args.input)?;
    let written = crate::report::csv_from_report_json(&bytes, &args.out_dir)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    if written.is_empty() {
        println!("report contains no tabular data");
    }
    Ok(0)
}
