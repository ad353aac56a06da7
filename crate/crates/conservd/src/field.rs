//! Evaluable coefficient fields over ℝᵈ.
//!
//! A field wraps either a parsed expression, a Rust closure, or a constant,
//! together with an optional analytic gradient. Derived constructors build the
//! quantities the criteria consume: the symmetric/anti-symmetric split of a
//! diffusion matrix, the compensating drift of the anti-symmetric part, and
//! the gauge fields Γ(ρ,ρ) = ⟨A∇ρ,∇ρ⟩ and N(ρ) = ⟨B,∇ρ⟩.
//!
//! Fields are immutable after construction and safe to evaluate from many
//! threads concurrently.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Ast};

/// Default relative step for central differences: h = h_rel * (1 + |x|).
pub const DEFAULT_H_REL: f64 = 1e-5;

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum Eval {
    Const(f64),
    Expr(Arc<Ast>),
    Fn(Arc<EvalFn>),
}

/// A scalar-valued field on ℝᵈ.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: Eval,
    gradient: Option<Arc<GradFn>>,
    provenance: String,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl ScalarField {
    pub fn constant(dim: usize, value: f64) -> Self {
        ScalarField {
            dim,
            eval: Eval::Const(value),
            gradient: Some(Arc::new(move |x: &[f64]| vec![0.0; x.len()])),
            provenance: format!("{value}"),
        }
    }

    /// Parse an expression over `x1..x<dim>`.
    pub fn from_expr(text: &str, dim: usize) -> Result<Self> {
        let ast = parse_expression(text, dim)?;
        Ok(ScalarField {
            dim,
            eval: Eval::Expr(Arc::new(ast)),
            gradient: None,
            provenance: text.to_string(),
        })
    }

    pub fn from_fn(
        dim: usize,
        name: &str,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            dim,
            eval: Eval::Fn(Arc::new(f)),
            gradient: None,
            provenance: format!("fn:{name}"),
        }
    }

    /// Attach an analytic gradient; numeric differencing is skipped when set.
    pub fn with_gradient(
        mut self,
        g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// The Euclidean norm gauge ρ(x) = |x|, with its analytic gradient x/|x|.
    pub fn norm_gauge(dim: usize) -> Self {
        ScalarField {
            dim,
            eval: Eval::Fn(Arc::new(|x: &[f64]| {
                x.iter().map(|v| v * v).sum::<f64>().sqrt()
            })),
            gradient: Some(Arc::new(|x: &[f64]| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter().map(|v| v / r).collect()
            })),
            provenance: "fn:norm".to_string(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.eval {
            Eval::Const(c) => *c,
            Eval::Expr(ast) => ast.eval(x),
            Eval::Fn(f) => f(x),
        }
    }

    /// Branch signature of the underlying expression at `x` (0 for closures
    /// and constants, which are assumed smooth).
    pub fn signature(&self, x: &[f64]) -> u64 {
        match &self.eval {
            Eval::Expr(ast) => {
                let mut sig = 0u64;
                ast.eval_signed(x, &mut sig);
                sig
            }
            _ => 0,
        }
    }

    /// Expression breakpoints along the coordinate of a 1-d field.
    pub fn breakpoints_1d(&self) -> Vec<f64> {
        match &self.eval {
            Eval::Expr(ast) => ast.breakpoints_1d(),
            _ => Vec::new(),
        }
    }

    /// Gradient at `x`: analytic when available, otherwise central differences
    /// with piecewise-aware one-sided fallback.
    pub fn gradient(&self, x: &[f64], h_rel: f64) -> Result<Vec<f64>> {
        if let Some(g) = &self.gradient {
            let v = g(x);
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("analytic gradient of {}", self.provenance),
                    point: x.to_vec(),
                });
            }
            return Ok(v);
        }
        numeric_gradient(self, x, h_rel)
    }

    /// The constant value, if this field is a literal constant.
    pub fn constant_value(&self) -> Option<f64> {
        match &self.eval {
            Eval::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Pointwise scaling λ·f. Powers of two scale exactly.
    pub fn scaled(&self, lambda: f64) -> Self {
        let inner = self.clone();
        let grad = self.gradient.clone();
        ScalarField {
            dim: self.dim,
            eval: Eval::Fn(Arc::new(move |x: &[f64]| lambda * inner.value(x))),
            gradient: grad.map(|g| {
                Arc::new(move |x: &[f64]| g(x).into_iter().map(|c| lambda * c).collect())
                    as Arc<GradFn>
            }),
            provenance: format!("{lambda}*({})", self.provenance),
        }
    }
}

/// Central-difference gradient with step h = h_rel·(1+|x|) per coordinate.
///
/// Stencil points whose branch signature differs from the base point trigger
/// one-sided differencing so the difference never straddles a breakpoint.
pub fn numeric_gradient(f: &ScalarField, x: &[f64], h_rel: f64) -> Result<Vec<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sig0 = f.signature(x);
    let f0 = f.value(x);
    let mut out = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let mut h = h_rel * (1.0 + norm);
        let mut d = None;
        for _ in 0..8 {
            xp[j] = x[j] + h;
            let sig_plus = f.signature(&xp);
            let fp = f.value(&xp);
            xp[j] = x[j] - h;
            let sig_minus = f.signature(&xp);
            let fm = f.value(&xp);
            xp[j] = x[j];
            let plus_ok = sig_plus == sig0;
            let minus_ok = sig_minus == sig0;
            let est = if plus_ok && minus_ok {
                (fp - fm) / (2.0 * h)
            } else if plus_ok {
                (fp - f0) / h
            } else if minus_ok {
                (f0 - fm) / h
            } else {
                // Both stencil points crossed a breakpoint; shrink the step.
                h *= 0.25;
                continue;
            };
            d = Some(est);
            break;
        }
        let est = d.unwrap_or(f64::NAN);
        if !est.is_finite() {
            return Err(Error::NonFinite {
                context: format!("numeric gradient of {}", f.provenance()),
                point: x.to_vec(),
            });
        }
        out.push(est);
    }
    Ok(out)
}

/// A vector-valued field, stored componentwise.
#[derive(Clone, Debug)]
pub struct VectorField {
    dim: usize,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn zero(dim: usize) -> Self {
        VectorField {
            dim,
            components: (0..dim).map(|_| ScalarField::constant(dim, 0.0)).collect(),
        }
    }

    pub fn from_components(components: Vec<ScalarField>) -> Self {
        let dim = components.len();
        assert!(components.iter().all(|c| c.dim() == dim));
        VectorField { dim, components }
    }

    pub fn from_exprs(texts: &[&str], dim: usize) -> Result<Self> {
        assert_eq!(texts.len(), dim);
        let components = texts
            .iter()
            .map(|t| ScalarField::from_expr(t, dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { dim, components })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    /// True if every component is the literal constant zero.
    pub fn is_zero_const(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.constant_value() == Some(0.0))
    }

    /// True if every component is a literal constant.
    pub fn is_constant(&self) -> bool {
        self.components.iter().all(|c| c.constant_value().is_some())
    }
}

/// A d×d matrix-valued field, stored entrywise (row-major).
#[derive(Clone, Debug)]
pub struct MatrixField {
    dim: usize,
    entries: Vec<ScalarField>,
}

impl MatrixField {
    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let entries = (0..dim * dim)
            .map(|k| {
                let (i, j) = (k / dim, k % dim);
                ScalarField::constant(dim, if i == j { c } else { 0.0 })
            })
            .collect();
        MatrixField { dim, entries }
    }

    pub fn from_entries(dim: usize, entries: Vec<ScalarField>) -> Self {
        assert_eq!(entries.len(), dim * dim);
        MatrixField { dim, entries }
    }

    pub fn from_exprs(rows: &[&[&str]], dim: usize) -> Result<Self> {
        assert_eq!(rows.len(), dim);
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim);
            for text in *row {
                entries.push(ScalarField::from_expr(text, dim)?);
            }
        }
        Ok(MatrixField { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.entries[i * self.dim + j]
    }

    /// Row-major matrix value at `x`.
    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|e| e.value(x)).collect()
    }

    /// All entries constant? Returns the row-major values if so.
    pub fn constant_value(&self) -> Option<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| match &e.eval {
                Eval::Const(v) => Some(*v),
                _ => None,
            })
            .collect()
    }

    /// Symmetric part Ã(x) = (A(x) + A(x)ᵀ)/2.
    pub fn symmetric_part(&self) -> MatrixField {
        self.combine_transpose(0.5, 0.5, "sym")
    }

    /// Anti-symmetric part Ǎ(x) = (A(x) − A(x)ᵀ)/2. Exactly anti-symmetric:
    /// fl((b−a)/2) = −fl((a−b)/2) for every float pair.
    pub fn antisymmetric_part(&self) -> MatrixField {
        self.combine_transpose(0.5, -0.5, "anti")
    }

    fn combine_transpose(&self, ca: f64, cat: f64, tag: &str) -> MatrixField {
        let dim = self.dim;
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let a = self.entry(i, j).clone();
                let at = self.entry(j, i).clone();
                let f = move |x: &[f64]| ca * a.value(x) + cat * at.value(x);
                entries.push(ScalarField::from_fn(
                    dim,
                    &format!("{tag}[{},{}]", i + 1, j + 1),
                    f,
                ));
            }
        }
        MatrixField { dim, entries }
    }
}

/// Symmetric/anti-symmetric split: Ã = (A+Aᵀ)/2, Ǎ = (A−Aᵀ)/2.
pub fn split_matrix(a: &MatrixField) -> (MatrixField, MatrixField) {
    (a.symmetric_part(), a.antisymmetric_part())
}

/// The drift produced by an anti-symmetric diffusion part under the weight
/// convention dμ = φ² dx:
///
/// β_i(x) = Σ_j [ ∂_j ǎ_ij(x) + ǎ_ij(x)·2 ∂_j φ(x)/φ(x) ] + B_i(x).
///
/// Entry derivatives use analytic gradients when the entries carry them and
/// central differences otherwise. Components evaluate to NaN where φ ≤ 0 or a
/// derivative fails; `beta_value` surfaces those as errors.
pub fn beta_field(
    anti: &MatrixField,
    b: &VectorField,
    phi: &ScalarField,
    h_rel: f64,
) -> VectorField {
    let dim = anti.dim();
    let mut components = Vec::with_capacity(dim);
    for i in 0..dim {
        let anti = anti.clone();
        let b_i = b.component(i).clone();
        let phi = phi.clone();
        let f = move |x: &[f64]| beta_component(&anti, &b_i, &phi, i, x, h_rel).unwrap_or(f64::NAN);
        components.push(ScalarField::from_fn(dim, &format!("beta[{}]", i + 1), f));
    }
    VectorField::from_components(components)
}

/// Checked evaluation of the full β vector at one point.
pub fn beta_value(
    anti: &MatrixField,
    b: &VectorField,
    phi: &ScalarField,
    x: &[f64],
    h_rel: f64,
) -> Result<Vec<f64>> {
    (0..anti.dim())
        .map(|i| beta_component(anti, b.component(i), phi, i, x, h_rel))
        .collect()
}

fn beta_component(
    anti: &MatrixField,
    b_i: &ScalarField,
    phi: &ScalarField,
    i: usize,
    x: &[f64],
    h_rel: f64,
) -> Result<f64> {
    let phi_x = phi.value(x);
    if !phi_x.is_finite() || phi_x <= 0.0 {
        return Err(Error::NonPositiveWeight {
            value: phi_x,
            point: x.to_vec(),
        });
    }
    let phi_grad = phi.gradient(x, h_rel)?;
    let mut sum = 0.0;
    for (j, phi_dj) in phi_grad.iter().enumerate() {
        let entry = anti.entry(i, j);
        let d_j = entry.gradient(x, h_rel)?[j];
        sum += d_j + entry.value(x) * 2.0 * phi_dj / phi_x;
    }
    let out = sum + b_i.value(x);
    if !out.is_finite() {
        return Err(Error::NonFinite {
            context: "beta component".to_string(),
            point: x.to_vec(),
        });
    }
    Ok(out)
}

/// Γ(ρ,ρ)(x) = ⟨A(x)∇ρ(x), ∇ρ(x)⟩ as a scalar field.
pub fn gamma_rho(a: &MatrixField, rho: &ScalarField, h_rel: f64) -> ScalarField {
    let a = a.clone();
    let rho_f = rho.clone();
    let dim = a.dim();
    ScalarField::from_fn(dim, "gamma_rho", move |x: &[f64]| {
        let g = match rho_f.gradient(x, h_rel) {
            Ok(g) => g,
            Err(_) => return f64::NAN,
        };
        let av = a.value(x);
        let d = g.len();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += av[i * d + j] * g[i] * g[j];
            }
        }
        s
    })
}

/// N(ρ)(x) = ⟨B(x), ∇ρ(x)⟩ as a scalar field.
pub fn n_rho(b: &VectorField, rho: &ScalarField, h_rel: f64) -> ScalarField {
    let b = b.clone();
    let rho_f = rho.clone();
    let dim = b.dim();
    ScalarField::from_fn(dim, "n_rho", move |x: &[f64]| {
        let g = match rho_f.gradient(x, h_rel) {
            Ok(g) => g,
            Err(_) => return f64::NAN,
        };
        b.value(x).iter().zip(&g).map(|(bi, gi)| bi * gi).sum()
    })
}

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

/// State-space membership: all of ℝᵈ or a region cut out by an indicator.
#[derive(Clone, Debug)]
pub enum Region {
    Full,
    /// Inside where the indicator field exceeds 1/2.
    Indicator(ScalarField),
}

/// The state space together with its exhausting gauge ρ.
///
/// The sublevel sets E_r = {ρ < r} must be bounded; `bound_factor` configures
/// the bounding box E_r ⊆ [−bound_factor·r, bound_factor·r]^d used by
/// rejection sampling.
#[derive(Clone, Debug)]
pub struct DomainSpec {
    pub dim: usize,
    pub region: Region,
    pub gauge: ScalarField,
    /// Gauge radius of the excluded compact core K ⊇ K₀.
    pub k0: f64,
    pub bound_factor: f64,
    /// True when the gauge is exactly the Euclidean norm, enabling direct
    /// radial-shell sampling.
    pub gauge_is_norm: bool,
}

impl DomainSpec {
    /// ℝᵈ with the Euclidean norm gauge.
    pub fn euclidean(dim: usize, k0: f64) -> Self {
        DomainSpec {
            dim,
            region: Region::Full,
            gauge: ScalarField::norm_gauge(dim),
            k0,
            bound_factor: 1.0,
            gauge_is_norm: true,
        }
    }

    /// ℝᵈ with a custom gauge and bounding-box factor.
    pub fn with_gauge(dim: usize, gauge: ScalarField, k0: f64, bound_factor: f64) -> Self {
        DomainSpec {
            dim,
            region: Region::Full,
            gauge,
            k0,
            bound_factor,
            gauge_is_norm: false,
        }
    }

    pub fn restricted(mut self, indicator: ScalarField) -> Self {
        self.region = Region::Indicator(indicator);
        self
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.region {
            Region::Full => true,
            Region::Indicator(ind) => ind.value(x) > 0.5,
        }
    }

    pub fn gauge_value(&self, x: &[f64]) -> f64 {
        self.gauge.value(x)
    }

    /// Half-width of the bounding box containing E_r.
    pub fn bound(&self, r: f64) -> f64 {
        self.bound_factor * r
    }

    pub fn is_closed_region(&self) -> bool {
        matches!(self.region, Region::Indicator(_))
    }

    /// Sampled sanity check of the gauge at level `r`: the gauge must be
    /// non-negative on the region, and no point of the doubled bounding box
    /// with ρ(x) < r may fall outside the configured box (the sublevel set
    /// would not be covered by rejection sampling).
    pub fn validate_gauge(&self, r: f64, samples: usize, seed: u64) -> Result<()> {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let half = self.bound(r);
        let wide = 2.0 * half;
        let mut x = vec![0.0; self.dim];
        for _ in 0..samples {
            for xi in x.iter_mut() {
                *xi = rng.random_range(-wide..wide);
            }
            if !self.contains(&x) {
                continue;
            }
            let rho = self.gauge_value(&x);
            if rho < 0.0 || rho.is_nan() {
                return Err(Error::NonFinite {
                    context: "gauge is negative on the region".to_string(),
                    point: x.clone(),
                });
            }
            if rho < r && x.iter().any(|v| v.abs() > half) {
                return Err(Error::Config(format!(
                    "gauge sublevel set {{rho < {r}}} escapes the bounding box at {x:?}; \
                     raise the bound factor"
                )));
            }
        }
        Ok(())
    }
}
