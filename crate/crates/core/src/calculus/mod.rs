//! Cylindrical functions `f(μ) = g(μ(ψ₁), …, μ(ψₙ))` and their intrinsic
//! derivatives.
//!
//! The intrinsic derivative of a cylindrical function is the vector field
//! `Df(μ)(x) = Σᵢ ∂ᵢg(μ(ψ₁),…,μ(ψₙ)) ∇ψᵢ(x)`; it represents the derivative
//! of `ε ↦ f(μ ∘ (id + εφ)⁻¹)` at zero as `⟨Df(μ), φ⟩_{L²(μ)}`.

mod catalogue;
mod primitives;
mod reference;

use std::fmt;

pub use catalogue::parse_function;
pub use primitives::{Inner, Outer};
pub use reference::{chi, chi_deriv, gamma_k, gamma_k_deriv, gamma_tail_radius, u_k_function, u_k_ref};

use crate::error::{invalid, Error, Result};
use crate::measure::{pushforward, DiscreteMeasure, VectorField};

#[derive(Debug, Clone, PartialEq)]
pub struct CylindricalFunction {
    outer: Outer,
    inner: Vec<Inner>,
}

impl CylindricalFunction {
    pub fn new(outer: Outer, inner: Vec<Inner>) -> Result<Self> {
        if outer.is_unary() && inner.len() != 1 {
            return invalid(format!("`{outer}` takes exactly one statistic, got {}", inner.len()));
        }
        if inner.is_empty() && !matches!(outer, Outer::Const(_)) {
            return invalid("a cylindrical function needs at least one statistic");
        }
        Ok(Self { outer, inner })
    }

    pub fn constant(c: f64) -> Self {
        Self { outer: Outer::Const(c), inner: Vec::new() }
    }

    /// `g(μ(ψ))` with a single statistic.
    pub fn unary(outer: Outer, psi: Inner) -> Self {
        Self { outer, inner: vec![psi] }
    }

    pub fn outer(&self) -> Outer {
        self.outer
    }

    pub fn inner(&self) -> &[Inner] {
        &self.inner
    }

    pub fn arity(&self) -> usize {
        self.inner.len()
    }

    /// Smallest support dimension the inner functions can be evaluated on.
    pub fn min_dim(&self) -> usize {
        self.inner.iter().filter_map(Inner::max_coord).map(|k| k + 1).max().unwrap_or(1)
    }

    fn check_dim(&self, mu: &DiscreteMeasure) -> Result<()> {
        if mu.dim() < self.min_dim() {
            return Err(Error::DimensionMismatch { expected: self.min_dim(), got: mu.dim() });
        }
        Ok(())
    }

    /// The linear statistics `μ(ψᵢ)`.
    pub fn statistics(&self, mu: &DiscreteMeasure) -> Vec<f64> {
        self.inner.iter().map(|psi| mu.integrate(|x| psi.eval(x))).collect()
    }

    pub fn eval(&self, mu: &DiscreteMeasure) -> f64 {
        self.outer.eval(&self.statistics(mu))
    }

    /// Closed-form `Df(μ)`.
    pub fn intrinsic_derivative(&self, mu: &DiscreteMeasure) -> IntrinsicGradient<'_> {
        let stats = self.statistics(mu);
        let mut partials = vec![0.0; stats.len()];
        self.outer.grad(&stats, &mut partials);
        IntrinsicGradient { partials, inner: &self.inner }
    }

    /// `Df(μ)` evaluated at the atoms of `μ`.
    pub fn gradient_field(&self, mu: &DiscreteMeasure) -> Result<VectorField> {
        self.check_dim(mu)?;
        let grad = self.intrinsic_derivative(mu);
        Ok(VectorField::from_fn(mu, |x, out| grad.eval_into(x, out)))
    }

    /// Declared `sup_x |∂ᵢg|·‖∇ψᵢ(x)‖` summed over the statistics; bounds
    /// `‖Df(μ)(x)‖` uniformly in `μ` and `x`.
    pub fn uniform_gradient_bound(&self) -> f64 {
        let gb = self.outer.partial_bound();
        if gb == 0.0 {
            return 0.0;
        }
        self.inner.iter().map(|psi| gb * psi.grad_bound()).sum()
    }
}

impl fmt::Display for CylindricalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.outer)?;
        for (k, psi) in self.inner.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{psi}")?;
        }
        f.write_str("]")
    }
}

/// `x ↦ Df(μ)(x)` for a fixed `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicGradient<'a> {
    partials: Vec<f64>,
    inner: &'a [Inner],
}

impl IntrinsicGradient<'_> {
    /// `∂ᵢg` at the statistics of `μ`.
    pub fn outer_partials(&self) -> &[f64] {
        &self.partials
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (psi, &c) in self.inner.iter().zip(&self.partials) {
            if c != 0.0 {
                psi.add_grad(x, c, out);
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.eval_into(x, &mut out);
        out
    }
}

/// `μ ∘ (id + εφ)⁻¹`: atom `xᵢ` moves to `xᵢ + εφ(xᵢ)`.
pub fn displace(mu: &DiscreteMeasure, phi: &VectorField, eps: f64) -> Result<DiscreteMeasure> {
    mu.check_field(phi)?;
    pushforward(mu, &VectorField::identity(mu).axpy(eps, phi)?)
}

/// Analytic `⟨Df(μ), φ⟩_{L²(μ)}`.
pub fn directional_derivative(f: &CylindricalFunction, mu: &DiscreteMeasure, phi: &VectorField) -> Result<f64> {
    mu.field_inner(&f.gradient_field(mu)?, phi)
}

/// Central difference `[f(μ∘(id+hφ)⁻¹) - f(μ∘(id-hφ)⁻¹)]/(2h)`.
pub fn directional_derivative_fd(f: &CylindricalFunction, mu: &DiscreteMeasure, phi: &VectorField, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return invalid(format!("finite-difference step must be positive, got {h}"));
    }
    let plus = f.eval(&displace(mu, phi, h)?);
    let minus = f.eval(&displace(mu, phi, -h)?);
    Ok((plus - minus) / (2.0 * h))
}

/// Default step `1e-5·(1 + scale)`.
pub fn default_step(scale: f64) -> f64 {
    1e-5 * (1.0 + scale.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRuleCheck {
    pub finite_difference: f64,
    pub analytic: f64,
    pub residual: f64,
}

/// Compares the central difference of `ε ↦ u(Ψ(φ + εξ))` at zero with
/// `Σᵢ wᵢ ⟨Du(Ψφ)(φ(xᵢ)), ξ(xᵢ)⟩`, i.e. `⟨∇(u∘Ψ)(φ), ξ⟩` through the chain
/// rule `∇(u∘Ψ)(φ) = Du(Ψ(φ)) ∘ φ`.
pub fn chain_rule_residual(
    u: &CylindricalFunction,
    base: &DiscreteMeasure,
    phi: &VectorField,
    xi: &VectorField,
    h: f64,
) -> Result<ChainRuleCheck> {
    if !(h > 0.0) {
        return invalid(format!("finite-difference step must be positive, got {h}"));
    }
    base.check_field(xi)?;
    let image = pushforward(base, phi)?;
    let lifted = u.gradient_field(&image)?;
    let analytic = base.field_inner(&lifted, xi)?;
    let plus = u.eval(&pushforward(base, &phi.axpy(h, xi)?)?);
    let minus = u.eval(&pushforward(base, &phi.axpy(-h, xi)?)?);
    let fd = (plus - minus) / (2.0 * h);
    Ok(ChainRuleCheck { finite_difference: fd, analytic, residual: (fd - analytic).abs() })
}

/// `‖Df(μ)‖_{L^{p*}(μ)}` with `p* = p/(p-1)`; the max-norm over atoms for
/// `p = 1`.
pub fn dual_norm(f: &CylindricalFunction, mu: &DiscreteMeasure, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("p must lie in [1, ∞), got {p}"));
    }
    let g = f.gradient_field(mu)?;
    let norms = g.rows().map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt());
    if p == 1.0 {
        return Ok(norms.fold(0.0, f64::max));
    }
    let q = p / (p - 1.0);
    let s: f64 = norms.zip(mu.weights()).map(|(n, w)| w * n.powf(q)).sum();
    Ok(s.powf(1.0 / q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C1Report {
    /// Largest sampled `‖Df(μ)‖_{T*_{μ,p}}`.
    pub sup_dual_norm_estimate: f64,
    /// Declared `sup_{μ,x} ‖Df(μ)(x)‖`.
    pub uniform_bound: f64,
}

/// Brackets `sup_μ ‖Df(μ)‖_{T*_{μ,p}}` from below by a sampled maximum and
/// from above by the declared uniform gradient bound.
pub fn c1_functional(f: &CylindricalFunction, sample: &[DiscreteMeasure], p: f64) -> Result<C1Report> {
    if sample.is_empty() {
        return invalid("the (C1) functional needs at least one sampled measure");
    }
    let mut est = 0.0f64;
    for mu in sample {
        est = est.max(dual_norm(f, mu, p)?);
    }
    Ok(C1Report { sup_dual_norm_estimate: est, uniform_bound: f.uniform_gradient_bound() })
}
