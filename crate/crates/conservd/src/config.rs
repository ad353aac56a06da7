//! Run configuration: a flat key/value text file with `[section]` headers,
//! merged with command-line flags (flags win) and the `CONSERVD_SEED`
//! environment variable (strongest).
//!
//! ```text
//! # example run configuration
//! [model]
//! registry = gim-trutnau-1d      # or: dim = 2, a11 = "...", b1 = "...", ...
//! mu_power = 1
//! k0 = 1
//!
//! [plan]
//! samples = 200000
//! seed = 42
//! refine_rounds = 4
//!
//! [schedule]
//! n = 1,2,4,8,16,32,64
//!
//! [criterion]
//! id = cor13i
//! C = 3
//! beta = 1
//! alpha = 0.8333333333333334
//!
//! [output]
//! dir = out
//! json = true
//! csv = true
//! ```
//!
//! Expressions are quoted strings over `x1..xd`; matrix entries are keyed
//! `a11, a12, ..., add`, drift components `b1..bd`, the measure weight `phi`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::field::{DomainSpec, MatrixField, ScalarField, VectorField};
use crate::registry;
use crate::sampling::{SampleMethod, SamplePlan};

pub const DEFAULT_SCHEDULE: [u32; 7] = [1, 2, 4, 8, 16, 32, 64];

/// Criterion constants as given (None = fit from data).
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantFlags {
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub n_const: Option<f64>,
    /// Force the full constant grid search.
    pub auto: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ModelConfig {
    pub registry: Option<String>,
    pub dim: Option<usize>,
    /// Row-major matrix entry expressions (d*d of them).
    pub a_exprs: Vec<String>,
    pub b_exprs: Vec<String>,
    pub weight_expr: Option<String>,
    pub mu_power: Option<u8>,
    pub k0: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SimFlags {
    pub paths: usize,
    pub t_sim: f64,
    pub dt: f64,
    pub radii: Vec<f64>,
    pub x0: Option<Vec<f64>>,
}

impl Default for SimFlags {
    fn default() -> Self {
        SimFlags {
            paths: 100_000,
            t_sim: 1.0,
            dt: 1e-3,
            radii: vec![2.0, 4.0, 8.0],
            x0: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub plan: SamplePlan,
    pub schedule: Vec<u32>,
    pub criteria: Vec<String>,
    pub constants: ConstantFlags,
    pub zero_drift: bool,
    pub include_decay: bool,
    pub decay_time: Option<f64>,
    pub ladder: Vec<f64>,
    pub sim: SimFlags,
    pub out_dir: Option<PathBuf>,
    pub json: bool,
    pub csv: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            plan: SamplePlan::default(),
            schedule: DEFAULT_SCHEDULE.to_vec(),
            criteria: Vec::new(),
            constants: ConstantFlags::default(),
            zero_drift: false,
            include_decay: false,
            decay_time: None,
            ladder: vec![10.0, 100.0, 1_000.0, 10_000.0],
            sim: SimFlags::default(),
            out_dir: None,
            json: true,
            csv: true,
        }
    }
}

/// The model resolved into evaluable fields.
pub struct ResolvedModel {
    pub name: Option<String>,
    pub a: MatrixField,
    pub b: VectorField,
    pub weight: ScalarField,
    pub mu_power: u8,
    pub domain: DomainSpec,
    pub entry: Option<registry::RegistryEntry>,
}

impl RunConfig {
    /// Apply the `CONSERVD_SEED` environment override.
    pub fn apply_env(&mut self) {
        if let Ok(seed) = std::env::var("CONSERVD_SEED") {
            if let Ok(seed) = seed.trim().parse::<u64>() {
                self.plan.seed = seed;
            }
        }
    }

    pub fn resolve_model(&self) -> Result<ResolvedModel> {
        let has_exprs = !self.model.a_exprs.is_empty();
        match (&self.model.registry, has_exprs) {
            (Some(_), true) => Err(Error::Config(
                "give either a registry name or explicit coefficient expressions, not both"
                    .to_string(),
            )),
            (None, false) => Err(Error::Config(
                "no model: pass --registry NAME or coefficient expressions".to_string(),
            )),
            (Some(name), false) => {
                let entry = registry::lookup(name)?;
                Ok(ResolvedModel {
                    name: Some(name.clone()),
                    a: entry.a.clone(),
                    b: entry.b.clone(),
                    weight: entry.weight.clone(),
                    mu_power: self.model.mu_power.unwrap_or(entry.mu_power),
                    domain: {
                        let mut d = entry.domain.clone();
                        if let Some(k0) = self.model.k0 {
                            d.k0 = k0;
                        }
                        d
                    },
                    entry: Some(entry),
                })
            }
            (None, true) => {
                let dim = self.model.dim.unwrap_or_else(|| {
                    // Infer the dimension from the entry count when square.
                    (self.model.a_exprs.len() as f64).sqrt().round() as usize
                });
                if dim == 0 || self.model.a_exprs.len() != dim * dim {
                    return Err(Error::Config(format!(
                        "need {} matrix entries for dimension {dim}, got {}",
                        dim * dim,
                        self.model.a_exprs.len()
                    )));
                }
                let entries = self
                    .model
                    .a_exprs
                    .iter()
                    .map(|t| ScalarField::from_expr(t, dim))
                    .collect::<Result<Vec<_>>>()?;
                let a = MatrixField::from_entries(dim, entries);
                let b = if self.model.b_exprs.is_empty() {
                    VectorField::zero(dim)
                } else if self.model.b_exprs.len() == dim {
                    let comps = self
                        .model
                        .b_exprs
                        .iter()
                        .map(|t| ScalarField::from_expr(t, dim))
                        .collect::<Result<Vec<_>>>()?;
                    VectorField::from_components(comps)
                } else {
                    return Err(Error::Config(format!(
                        "need {dim} drift components, got {}",
                        self.model.b_exprs.len()
                    )));
                };
                let weight = match &self.model.weight_expr {
                    Some(t) => ScalarField::from_expr(t, dim)?,
                    None => ScalarField::constant(dim, 1.0),
                };
                Ok(ResolvedModel {
                    name: None,
                    a,
                    b,
                    weight,
                    mu_power: self.model.mu_power.unwrap_or(1),
                    domain: DomainSpec::euclidean(dim, self.model.k0.unwrap_or(1.0)),
                    entry: None,
                })
            }
        }
    }

    /// Parameter echo for the report (no paths).
    pub fn parameters_json(&self) -> serde_json::Value {
        serde_json::json!({
            "registry": self.model.registry,
            "dim": self.model.dim,
            "a": self.model.a_exprs,
            "b": self.model.b_exprs,
            "phi": self.model.weight_expr,
            "mu_power": self.model.mu_power,
            "k0": self.model.k0,
            "schedule": self.schedule,
            "samples": self.plan.samples,
            "seed": self.plan.seed,
            "refine_rounds": self.plan.refine_rounds,
            "criteria": self.criteria,
            "zero_drift": self.zero_drift,
            "ladder": self.ladder,
            "paths": self.sim.paths,
            "t_sim": self.sim.t_sim,
            "dt": self.sim.dt,
            "radii": self.sim.radii,
            "x0": self.sim.x0,
        })
    }
}

// ---------------------------------------------------------------------------
// Config file parsing
// ---------------------------------------------------------------------------

/// Parse `[section]` / `key = value` text into `section.key` entries.
/// `#` and `;` start comments; values may be double-quoted.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim().to_string();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::Config(format!(
                    "line {}: malformed section header `{line}`",
                    lineno + 1
                )));
            }
            section = line[1..line.len() - 1].trim().to_ascii_lowercase();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_ascii_lowercase();
        let mut value = value.trim().to_string();
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = value[1..value.len() - 1].to_string();
        }
        let full = if section.is_empty() {
            key
        } else {
            format!("{section}.{key}")
        };
        out.insert(full, value);
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    // Comments start at # or ; outside double quotes.
    let mut in_quotes = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => in_quotes = !in_quotes,
            '#' | ';' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

pub fn parse_list_f64(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("malformed number `{s}`")))
        })
        .collect()
}

pub fn parse_list_u32(v: &str) -> Result<Vec<u32>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("malformed integer `{s}`")))
        })
        .collect()
}

fn parse_bool(v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(Error::Config(format!("malformed boolean `{other}`"))),
    }
}

impl RunConfig {
    /// Merge keys from a parsed config file into this configuration.
    pub fn merge_file(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in map {
            match key.as_str() {
                "model.registry" => self.model.registry = Some(value.clone()),
                "model.dim" => {
                    self.model.dim = Some(value.parse().map_err(|_| {
                        Error::Config(format!("malformed dimension `{value}`"))
                    })?)
                }
                "model.phi" | "model.weight" => self.model.weight_expr = Some(value.clone()),
                "model.mu_power" => {
                    let p: u8 = value
                        .parse()
                        .map_err(|_| Error::Config(format!("malformed mu_power `{value}`")))?;
                    if p != 1 && p != 2 {
                        return Err(Error::Config("mu_power must be 1 or 2".to_string()));
                    }
                    self.model.mu_power = Some(p);
                }
                "model.k0" => {
                    self.model.k0 = Some(value.parse().map_err(|_| {
                        Error::Config(format!("malformed k0 `{value}`"))
                    })?)
                }
                "plan.samples" => {
                    self.plan.samples = value.parse().map_err(|_| {
                        Error::Config(format!("malformed samples `{value}`"))
                    })?
                }
                "plan.seed" => {
                    self.plan.seed = value.parse().map_err(|_| {
                        Error::Config(format!("malformed seed `{value}`"))
                    })?
                }
                "plan.refine_rounds" => {
                    self.plan.refine_rounds = value.parse().map_err(|_| {
                        Error::Config(format!("malformed refine_rounds `{value}`"))
                    })?
                }
                "plan.method" => {
                    self.plan.method = Some(match value.as_str() {
                        "box" | "box-rejection" => SampleMethod::BoxRejection,
                        "radial" | "radial-shell" => SampleMethod::RadialShell,
                        "halton" | "low-discrepancy" => SampleMethod::LowDiscrepancy,
                        other => {
                            return Err(Error::Config(format!("unknown sample method `{other}`")))
                        }
                    })
                }
                "schedule.n" => self.schedule = parse_list_u32(value)?,
                "criterion.id" => {
                    self.criteria = value.split(',').map(|s| s.trim().to_string()).collect()
                }
                "criterion.m" => self.constants.m = Some(parse_f64(value)?),
                "criterion.c" => self.constants.c = Some(parse_f64(value)?),
                "criterion.beta" => self.constants.beta = Some(parse_f64(value)?),
                "criterion.alpha" => self.constants.alpha = Some(parse_f64(value)?),
                "criterion.n" => self.constants.n_const = Some(parse_f64(value)?),
                "criterion.auto" => self.constants.auto = parse_bool(value)?,
                "criterion.decay" => self.include_decay = parse_bool(value)?,
                "criterion.decay_time" => self.decay_time = Some(parse_f64(value)?),
                "feller.ladder" => self.ladder = parse_list_f64(value)?,
                "simulate.paths" => {
                    self.sim.paths = value.parse().map_err(|_| {
                        Error::Config(format!("malformed paths `{value}`"))
                    })?
                }
                "simulate.t" => self.sim.t_sim = parse_f64(value)?,
                "simulate.dt" => self.sim.dt = parse_f64(value)?,
                "simulate.radii" => self.sim.radii = parse_list_f64(value)?,
                "simulate.x0" => self.sim.x0 = Some(parse_list_f64(value)?),
                "output.dir" => self.out_dir = Some(PathBuf::from(value)),
                "output.json" => self.json = parse_bool(value)?,
                "output.csv" => self.csv = parse_bool(value)?,
                other if other.starts_with("model.a") => {
                    // Matrix entries a11..add arrive in lexicographic key order,
                    // which is row-major for d <= 9.
                    self.model.a_exprs.push(value.clone());
                }
                other if other.starts_with("model.b") => {
                    self.model.b_exprs.push(value.clone());
                }
                other => return Err(Error::Config(format!("unknown config key `{other}`"))),
            }
        }
        Ok(())
    }
}

pub fn parse_f64(v: &str) -> Result<f64> {
    // Accept simple fractions like 5/6 for constants.
    if let Some((num, den)) = v.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("malformed number `{v}`")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("malformed number `{v}`")))?;
        return Ok(n / d);
    }
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("malformed number `{v}`")))
}

pub use parse_f64 as parse_constant;
pub use parse_list_f64 as parse_float_list;
pub use parse_list_u32 as parse_u32_list;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_sections_and_quotes() {
        let text = r#"
# comment
[model]
registry = brownian
phi = "piecewise(x1 > -1 ? 1 : abs(x1)^(-3))"  # trailing comment

[plan]
samples = 5000
seed = 9
"#;
        let map = parse_key_values(text).unwrap();
        assert_eq!(map["model.registry"], "brownian");
        assert!(!map["model.phi"].contains('#'));
        assert_eq!(map["model.phi"], "piecewise(x1 > -1 ? 1 : abs(x1)^(-3))");
        assert_eq!(map["plan.samples"], "5000");

        let mut cfg = RunConfig::default();
        cfg.merge_file(&map).unwrap();
        assert_eq!(cfg.plan.samples, 5000);
        assert_eq!(cfg.plan.seed, 9);
        assert_eq!(cfg.model.registry.as_deref(), Some("brownian"));
    }

    #[test]
    fn model_resolution_rules() {
        let mut cfg = RunConfig::default();
        assert!(cfg.resolve_model().is_err());
        cfg.model.registry = Some("brownian".to_string());
        let model = cfg.resolve_model().unwrap();
        assert_eq!(model.mu_power, 1);
        cfg.model.a_exprs = vec!["1".to_string()];
        assert!(cfg.resolve_model().is_err()); // both given

        let mut expl = RunConfig::default();
        expl.model.a_exprs = vec!["1".into(), "0".into(), "0".into(), "1".into()];
        expl.model.dim = Some(2);
        let model = expl.resolve_model().unwrap();
        assert_eq!(model.domain.dim, 2);
        assert!(model.b.is_zero_const());
    }

    #[test]
    fn fraction_constants() {
        assert_eq!(parse_f64("5/6").unwrap(), 5.0 / 6.0);
        assert_eq!(parse_f64("0.8").unwrap(), 0.8);
        assert!(parse_f64("x").is_err());
    }

    #[test]
    fn env_seed_override() {
        let mut cfg = RunConfig::default();
        cfg.plan.seed = 3;
        std::env::set_var("CONSERVD_SEED", "99");
        cfg.apply_env();
        std::env::remove_var("CONSERVD_SEED");
        assert_eq!(cfg.plan.seed, 99);
    }
}
