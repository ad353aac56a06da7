//! Built-in coefficient registry.
//!
//! Six named systems exercise every code path: a flat baseline, a symmetric
//! form with log-quadratic energy growth, a Muckenhoupt-style weighted form
//! (synthetic single weight standing in for the weight class), a
//! sectorial example whose drift comes from an anti-symmetric diffusion part,
//! and the two drift-compensated systems — a planar one whose a₂₂ entry grows
//! like |x|³ along diagonal rays and is compensated exactly by the rotational
//! drift, and a one-dimensional one with piecewise coefficients where the
//! compensation happens on the negative axis.
//!
//! Each entry carries a canonical pipeline: the criterion it is expected to
//! satisfy with its reference constants, plus the oracle checks that
//! corroborate the verdict.

use crate::criteria::{GaugeVariant, SymVariant};
use crate::error::{Error, Result};
use crate::field::{
    beta_field, gamma_rho, n_rho, split_matrix, DomainSpec, MatrixField, ScalarField, VectorField,
    DEFAULT_H_REL,
};
use crate::growth::FormData;

/// Canonical criterion selection with reference constants (None = fitted).
#[derive(Debug, Clone)]
pub enum CanonCriterion {
    Gauge {
        id: &'static str,
        variant: GaugeVariant,
        m: Option<f64>,
        c: f64,
        beta: f64,
        alpha: Option<f64>,
    },
    Symmetric {
        id: &'static str,
        variant: SymVariant,
        m: Option<f64>,
        n: Option<f64>,
        beta: f64,
    },
    Sectorial {
        m: Option<f64>,
        c: Option<f64>,
        alpha: Option<f64>,
    },
}

impl CanonCriterion {
    pub fn id(&self) -> &'static str {
        match self {
            CanonCriterion::Gauge { id, .. } => id,
            CanonCriterion::Symmetric { id, .. } => id,
            CanonCriterion::Sectorial { .. } => "sectorial",
        }
    }
}

/// Oracle runs in the canonical pipeline, with their expected outcomes.
#[derive(Debug, Clone)]
pub enum CanonOracle {
    /// Scale/speed test must report divergence on both sides.
    FellerBothDiverge,
    /// Escape probability at the largest rung must stay below the threshold.
    EscapeBelow {
        radii: Vec<f64>,
        t_sim: f64,
        dt: f64,
        paths: usize,
        threshold: f64,
    },
    /// The drift must pass the divergence-free gate.
    DivergenceFreePass,
}

pub struct RegistryEntry {
    pub name: &'static str,
    pub dim: usize,
    pub description: &'static str,
    pub a: MatrixField,
    pub b: VectorField,
    pub weight: ScalarField,
    pub mu_power: u8,
    pub domain: DomainSpec,
    pub criterion: CanonCriterion,
    pub oracles: Vec<CanonOracle>,
}

impl RegistryEntry {
    /// Form data along the gauge for this entry; `zero_drift` replaces B by 0.
    pub fn form_data(&self, zero_drift: bool) -> FormData {
        let b = if zero_drift {
            VectorField::zero(self.dim)
        } else {
            self.b.clone()
        };
        match &self.criterion {
            CanonCriterion::Sectorial { .. } => {
                let (sym, anti) = split_matrix(&self.a);
                let beta = beta_field(&anti, &b, &self.weight, DEFAULT_H_REL);
                crate::criteria::sectorial_form_data(
                    &sym,
                    &beta,
                    &self.weight,
                    self.domain.clone(),
                    DEFAULT_H_REL,
                )
            }
            _ => {
                let gamma = gamma_rho(&self.a, &self.domain.gauge, DEFAULT_H_REL);
                let drift = n_rho(&b, &self.domain.gauge, DEFAULT_H_REL);
                FormData::new(gamma, drift, self.weight.clone(), self.mu_power, self.domain.clone())
                    .with_zero_drift_flag(b.is_zero_const())
            }
        }
    }

    /// The compensating drift of the anti-symmetric part plus B (sectorial
    /// entries), or B itself.
    pub fn effective_drift(&self) -> VectorField {
        match &self.criterion {
            CanonCriterion::Sectorial { .. } => {
                let (_, anti) = split_matrix(&self.a);
                beta_field(&anti, &self.b, &self.weight, DEFAULT_H_REL)
            }
            _ => self.b.clone(),
        }
    }
}

pub const NAMES: [&str; 6] = [
    "brownian",
    "symdf",
    "rst-muckenhoupt",
    "tatr",
    "gim-trutnau-2d",
    "gim-trutnau-1d",
];

/// Look up a registry entry by name.
pub fn lookup(name: &str) -> Result<RegistryEntry> {
    match name {
        "brownian" => Ok(brownian()),
        "symdf" => Ok(symdf()),
        "rst-muckenhoupt" => Ok(rst_muckenhoupt()),
        "tatr" => Ok(tatr()),
        "gim-trutnau-2d" => Ok(gim_trutnau_2d()),
        "gim-trutnau-1d" => Ok(gim_trutnau_1d()),
        other => Err(Error::Config(format!(
            "unknown registry entry `{other}` (known: {})",
            NAMES.join(", ")
        ))),
    }
}

fn norm2(x: &[f64]) -> f64 {
    (x[0] * x[0] + x[1] * x[1]).sqrt()
}

fn brownian() -> RegistryEntry {
    RegistryEntry {
        name: "brownian",
        dim: 2,
        description: "flat baseline: A = I, B = 0, Lebesgue measure",
        a: MatrixField::identity(2),
        b: VectorField::zero(2),
        weight: ScalarField::constant(2, 1.0),
        mu_power: 1,
        domain: DomainSpec::euclidean(2, 1.0),
        criterion: CanonCriterion::Symmetric {
            id: "symexamii",
            variant: SymVariant::Quadratic,
            m: Some(1.0),
            n: Some(1.0),
            beta: 0.0,
        },
        oracles: vec![
            CanonOracle::EscapeBelow {
                radii: vec![2.0, 4.0, 8.0],
                t_sim: 1.0,
                dt: 1e-3,
                paths: 100_000,
                threshold: 1e-3,
            },
            CanonOracle::DivergenceFreePass,
        ],
    }
}

fn symdf() -> RegistryEntry {
    // Isotropic energy density (1+|x|)^2 log(1+|x|) + 1: saturates the
    // symmetric log-power bound with beta = 1 while staying elliptic at 0.
    let a_scalar = ScalarField::from_fn(2, "symdf-a", |x| {
        let r = norm2(x);
        (1.0 + r).powi(2) * (1.0 + r).ln() + 1.0
    });
    let zero = ScalarField::constant(2, 0.0);
    let a = MatrixField::from_entries(
        2,
        vec![a_scalar.clone(), zero.clone(), zero, a_scalar],
    );
    RegistryEntry {
        name: "symdf",
        dim: 2,
        description: "symmetric form with (1+|x|)^2 log(1+|x|) energy growth",
        a,
        b: VectorField::zero(2),
        weight: ScalarField::constant(2, 1.0),
        mu_power: 1,
        domain: DomainSpec::euclidean(2, 1.0),
        criterion: CanonCriterion::Symmetric {
            id: "symexami",
            variant: SymVariant::LogPower,
            m: None,
            n: None,
            beta: 1.0,
        },
        oracles: vec![],
    }
}

fn rst_muckenhoupt() -> RegistryEntry {
    // Synthetic stand-in for the Muckenhoupt-weight class: a single weight
    // phi(x) = (1+|x|)^{-1} in d = 2 with a bounded rotational drift. The
    // original example is a class of weights, not one weight.
    let weight = ScalarField::from_fn(2, "muck-weight", |x| 1.0 / (1.0 + norm2(x))).with_gradient(
        |x| {
            let r = norm2(x);
            let c = -1.0 / ((1.0 + r) * (1.0 + r) * r);
            vec![c * x[0], c * x[1]]
        },
    );
    let b = VectorField::from_components(vec![
        ScalarField::from_fn(2, "muck-b1", |x| -x[1] / (1.0 + norm2(x))),
        ScalarField::from_fn(2, "muck-b2", |x| x[0] / (1.0 + norm2(x))),
    ]);
    RegistryEntry {
        name: "rst-muckenhoupt",
        dim: 2,
        description: "weighted form, synthetic A2-style weight (1+|x|)^{-1}, bounded rotational drift",
        a: MatrixField::identity(2),
        b,
        weight,
        mu_power: 1,
        domain: DomainSpec::euclidean(2, 1.0),
        criterion: CanonCriterion::Gauge {
            id: "g1iii",
            variant: GaugeVariant::Quadratic,
            m: Some(1.0),
            c: 1.0,
            beta: 0.0,
            alpha: Some(1.0),
        },
        oracles: vec![CanonOracle::DivergenceFreePass],
    }
}

fn tatr() -> RegistryEntry {
    // Non-symmetric diffusion matrix with anti-symmetric entry x1*x2 on the
    // Lebesgue measure; its compensating drift is beta = (x1, -x2).
    let one = ScalarField::constant(2, 1.0);
    let g = ScalarField::from_expr("x1 * x2", 2)
        .unwrap()
        .with_gradient(|x| vec![x[1], x[0]]);
    let neg_g = ScalarField::from_expr("-(x1 * x2)", 2)
        .unwrap()
        .with_gradient(|x| vec![-x[1], -x[0]]);
    let a = MatrixField::from_entries(2, vec![one.clone(), g, neg_g, one]);
    RegistryEntry {
        name: "tatr",
        dim: 2,
        description: "sectorial example: anti-symmetric diffusion entry x1*x2, flat weight",
        a,
        b: VectorField::zero(2),
        weight: ScalarField::constant(2, 1.0),
        mu_power: 2,
        domain: DomainSpec::euclidean(2, 1.0),
        criterion: CanonCriterion::Sectorial {
            m: None,
            c: None, // d/2 + 3
            alpha: None,
        },
        oracles: vec![CanonOracle::DivergenceFreePass],
    }
}

fn gim_trutnau_2d() -> RegistryEntry {
    // Planar drift-compensated system: a22 = x1^4/x2 grows like |x|^3 along
    // diagonal rays and is cancelled exactly by the rotational drift
    // B = (x2^2, -x1^4)/phi with phi = |x|(|x|+1)/5.
    let a11 = ScalarField::from_fn(2, "(|x|+1)^2", |x| {
        let r = norm2(x);
        (r + 1.0) * (r + 1.0)
    })
    .with_gradient(|x| {
        let r = norm2(x);
        let c = 2.0 * (r + 1.0) / r;
        vec![c * x[0], c * x[1]]
    });
    let one = ScalarField::constant(2, 1.0);
    let a22 = ScalarField::from_fn(2, "x1^4/x2", |x| x[0].powi(4) / x[1]).with_gradient(|x| {
        vec![
            4.0 * x[0].powi(3) / x[1],
            -x[0].powi(4) / (x[1] * x[1]),
        ]
    });
    let a = MatrixField::from_entries(2, vec![a11, one.clone(), one, a22]);

    let weight = ScalarField::from_fn(2, "|x|(|x|+1)/5", |x| {
        let r = norm2(x);
        r * (r + 1.0) / 5.0
    })
    .with_gradient(|x| {
        let r = norm2(x);
        let c = (2.0 * r + 1.0) / (5.0 * r);
        vec![c * x[0], c * x[1]]
    });
    let b = VectorField::from_components(vec![
        ScalarField::from_fn(2, "x2^2/phi", |x| {
            let r = norm2(x);
            5.0 * x[1] * x[1] / (r * (r + 1.0))
        }),
        ScalarField::from_fn(2, "-x1^4/phi", |x| {
            let r = norm2(x);
            -5.0 * x[0].powi(4) / (r * (r + 1.0))
        }),
    ]);
    RegistryEntry {
        name: "gim-trutnau-2d",
        dim: 2,
        description: "planar drift-compensated diffusion: a22 = x1^4/x2, B = (x2^2, -x1^4)/phi",
        a,
        b,
        weight,
        mu_power: 1,
        domain: DomainSpec::euclidean(2, 1.0),
        criterion: CanonCriterion::Gauge {
            id: "g1i",
            variant: GaugeVariant::LogPower,
            m: None,
            c: 5.0,
            beta: 1.0,
            alpha: Some(0.8),
        },
        oracles: vec![CanonOracle::DivergenceFreePass],
    }
}

fn gim_trutnau_1d() -> RegistryEntry {
    let a = MatrixField::from_exprs(
        &[&["piecewise(x1 >= 0 ? (x1 + sqrt(2))^2 : (x1^4 - x1^3 + 6)/3)"]],
        1,
    )
    .unwrap();
    let weight =
        ScalarField::from_expr("piecewise(x1 > -1 ? 1 : abs(x1)^(-3))", 1).unwrap();
    let b = VectorField::from_exprs(&["piecewise(x1 > -1 ? 1 : abs(x1)^3)"], 1).unwrap();
    RegistryEntry {
        name: "gim-trutnau-1d",
        dim: 1,
        description: "one-dimensional drift-compensated diffusion with piecewise coefficients",
        a,
        b,
        weight,
        mu_power: 1,
        domain: DomainSpec::euclidean(1, 1.0),
        criterion: CanonCriterion::Gauge {
            id: "cor13i",
            variant: GaugeVariant::LogPower,
            m: None,
            c: 3.0,
            beta: 1.0,
            alpha: Some(5.0 / 6.0),
        },
        oracles: vec![CanonOracle::FellerBothDiverge],
    }
}
