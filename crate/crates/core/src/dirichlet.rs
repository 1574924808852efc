//! Dirichlet-form energies on the Wasserstein space, evaluated through the
//! tangent lift `u ↦ u∘Ψ` on `T₀ = L²(μ₀)` under the Gaussian measure `G`.
//!
//! A state is `φ = anchor + Σ cₙφₙ`. For a cylindrical `u`, the gradient of
//! `u∘Ψ` at `φ` is the field `xᵢ ↦ Du(Ψφ)(φ(xᵢ))`, so every energy below is
//! computed from closed-form intrinsic derivatives, never by differencing.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::calculus::{CylindricalFunction, Outer};
use crate::error::{invalid, Error, Result};
use crate::measure::{check_modes, draw_pushed, DiscreteMeasure, EigenBasis, TangentVector};
use crate::rng::stream;
use crate::spectral::{hermite_eigenfunction, hermite_eigenfunction_deriv, Spectrum};
use crate::stats::{sample_moments, MCEstimate};

/// Decomposable coefficient `Q_φ` of the gradient form.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientField {
    Identity,
    /// `Q = Σ qₙ φₙ ⊗ φₙ`.
    Diagonal(Vec<f64>),
    /// `Q = η ⊗ η`, with `η` stored by its basis coefficients.
    RankOne(Vec<f64>),
}

impl CoefficientField {
    pub fn diagonal(q: Vec<f64>) -> Result<Self> {
        if let Some(bad) = q.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return invalid(format!("diagonal coefficients must be finite and nonnegative, got {bad}"));
        }
        Ok(Self::Diagonal(q))
    }

    /// Raw fields are projected with the Gram solve of the basis.
    pub fn rank_one(basis: &EigenBasis, eta: &TangentVector) -> Result<Self> {
        let c = basis.to_coeffs(eta)?;
        if c.iter().any(|v| !v.is_finite()) {
            return invalid("rank-one direction must have a finite norm");
        }
        Ok(Self::RankOne(c))
    }

    fn check(&self, basis: &EigenBasis) -> Result<()> {
        match self {
            Self::Identity => Ok(()),
            Self::Diagonal(v) | Self::RankOne(v) if v.len() != basis.modes() => {
                Err(Error::ModeMismatch { spectrum: v.len(), basis: basis.modes() })
            }
            _ => Ok(()),
        }
    }

    /// `⟨Q a, b⟩_{T₀}` for fields given by their values at the base atoms.
    pub fn form(&self, basis: &EigenBasis, a: &[f64], b: &[f64]) -> f64 {
        let base = basis.base().measure();
        let d = base.dim();
        let inner = |f: &[f64], g: &[f64]| -> f64 {
            f.chunks_exact(d)
                .zip(g.chunks_exact(d))
                .zip(base.weights())
                .map(|((x, y), w)| w * x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
                .sum()
        };
        match self {
            Self::Identity => inner(a, b),
            Self::Diagonal(q) => (1..=basis.modes())
                .filter(|&n| q[n - 1] != 0.0)
                .map(|n| {
                    let phi = basis.mode_values(n);
                    q[n - 1] * inner(phi, a) * inner(phi, b)
                })
                .sum(),
            Self::RankOne(eta) => {
                let (mut ea, mut eb) = (0.0, 0.0);
                for (n, &e) in eta.iter().enumerate() {
                    if e != 0.0 {
                        let phi = basis.mode_values(n + 1);
                        ea += e * inner(phi, a);
                        eb += e * inner(phi, b);
                    }
                }
                ea * eb
            }
        }
    }
}

/// A function on `T₀` with a closed-form gradient.
#[derive(Debug, Clone, PartialEq)]
pub enum TangentFunctional {
    /// `φ ↦ u(Ψ(φ))`.
    Pullback(CylindricalFunction),
    /// `φ ↦ ⟨φₙ, φ - anchor⟩`, the Gaussian coordinate `cₙ` (1-based).
    Coefficient(usize),
    /// `φ ↦ H̄ₖ(cₙ)` for the mode variance `1/α`.
    Hermite { mode: usize, k: usize, alpha: f64 },
    /// `τ_w ∘ F` with the smooth unit clamp of ramp width `w`.
    Clamped { width: f64, inner: Box<TangentFunctional> },
}

impl From<CylindricalFunction> for TangentFunctional {
    fn from(u: CylindricalFunction) -> Self {
        Self::Pullback(u)
    }
}

impl TangentFunctional {
    pub fn hermite(spectrum: &Spectrum, mode: usize, k: usize) -> Result<Self> {
        Ok(Self::Hermite { mode, k, alpha: spectrum.alpha(mode)? })
    }

    pub fn clamped(width: f64, inner: TangentFunctional) -> Result<Self> {
        if !(width > 0.0 && width < 1.0) {
            return invalid(format!("clamp ramp width must lie in (0, 1), got {width}"));
        }
        Ok(Self::Clamped { width, inner: Box::new(inner) })
    }

    pub fn is_pullback(&self) -> bool {
        matches!(self, Self::Pullback(_))
    }

    pub(crate) fn check(&self, basis: &EigenBasis) -> Result<()> {
        match self {
            Self::Pullback(u) if u.min_dim() > basis.base().dim() => {
                Err(Error::DimensionMismatch { expected: u.min_dim(), got: basis.base().dim() })
            }
            Self::Coefficient(n) | Self::Hermite { mode: n, .. } if *n == 0 || *n > basis.modes() => {
                invalid(format!("mode {n} outside 1..={}", basis.modes()))
            }
            Self::Clamped { inner, .. } => inner.check(basis),
            _ => Ok(()),
        }
    }

    /// Value at the state with coefficients `coeffs` and image `pushed`.
    pub fn value(&self, coeffs: &[f64], pushed: &DiscreteMeasure) -> f64 {
        match self {
            Self::Pullback(u) => u.eval(pushed),
            Self::Coefficient(n) => coeffs[n - 1],
            Self::Hermite { mode, k, alpha } => hermite_eigenfunction(*k, *alpha, coeffs[mode - 1]),
            Self::Clamped { width, inner } => Outer::SmoothClamp(*width).eval(&[inner.value(coeffs, pushed)]),
        }
    }

    /// Value and gradient field (values at the base atoms, written to `grad`).
    pub fn value_and_gradient(&self, basis: &EigenBasis, coeffs: &[f64], pushed: &DiscreteMeasure, grad: &mut [f64]) -> f64 {
        match self {
            Self::Pullback(u) => {
                let du = u.intrinsic_derivative(pushed);
                let d = pushed.dim();
                for (i, out) in grad.chunks_exact_mut(d).enumerate() {
                    du.eval_into(pushed.atom(i), out);
                }
                u.outer().eval(&u.statistics(pushed))
            }
            Self::Coefficient(n) => {
                grad.copy_from_slice(basis.mode_values(*n));
                coeffs[n - 1]
            }
            Self::Hermite { mode, k, alpha } => {
                let c = coeffs[mode - 1];
                let s = hermite_eigenfunction_deriv(*k, *alpha, c);
                for (g, p) in grad.iter_mut().zip(basis.mode_values(*mode)) {
                    *g = s * p;
                }
                hermite_eigenfunction(*k, *alpha, c)
            }
            Self::Clamped { width, inner } => {
                let v = inner.value_and_gradient(basis, coeffs, pushed, grad);
                let mut slope = [0.0];
                Outer::SmoothClamp(*width).grad(&[v], &mut slope);
                grad.iter_mut().for_each(|g| *g *= slope[0]);
                Outer::SmoothClamp(*width).eval(&[v])
            }
        }
    }

    /// `∂ₙF(φ) = ⟨∇F(φ), φₙ⟩_{T₀}` together with `F(φ)`.
    pub fn value_and_partial(&self, basis: &EigenBasis, coeffs: &[f64], pushed: &DiscreteMeasure, mode: usize, scratch: &mut [f64]) -> (f64, f64) {
        let v = self.value_and_gradient(basis, coeffs, pushed, scratch);
        (v, CoefficientField::Identity.form(basis, scratch, basis.mode_values(mode)))
    }
}

impl std::fmt::Display for TangentFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Pullback(u) => write!(f, "{u}"),
            Self::Coefficient(n) => write!(f, "c{n}"),
            Self::Hermite { mode, k, .. } => write!(f, "H{k}(c{mode})"),
            Self::Clamped { width, inner } => write!(f, "clamp{width}({inner})"),
        }
    }
}

/// Shared inputs of the Monte Carlo estimators.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSetup<'a> {
    pub spectrum: &'a Spectrum,
    pub basis: &'a EigenBasis,
    pub n_samples: usize,
    pub seed: u64,
}

impl GaussianSetup<'_> {
    fn check(&self, min_samples: usize) -> Result<()> {
        check_modes(self.spectrum, self.basis)?;
        if self.n_samples < min_samples {
            return invalid(format!("need at least {min_samples} samples, got {}", self.n_samples));
        }
        Ok(())
    }

    fn field_len(&self) -> usize {
        self.basis.base().len() * self.basis.base().dim()
    }
}

/// `Γ(u,v)(Ψφ) = ⟨Q_φ ∇(u∘Ψ)(φ), ∇(v∘Ψ)(φ)⟩_{T₀}`.
///
/// `phi` is the perturbation: the state is `anchor + phi`.
pub fn square_field(
    u: &CylindricalFunction,
    v: &CylindricalFunction,
    basis: &EigenBasis,
    phi: &TangentVector,
    q: &CoefficientField,
) -> Result<f64> {
    q.check(basis)?;
    let (fu, fv) = (TangentFunctional::from(u.clone()), TangentFunctional::from(v.clone()));
    fu.check(basis)?;
    fv.check(basis)?;
    let perturbation = basis.to_field(phi)?;
    let state = basis.anchor().axpy(1.0, &perturbation)?;
    let pushed = crate::measure::pushforward(basis.base().measure(), &state)?;
    let coeffs = basis.to_coeffs(phi)?;
    let len = state.values().len();
    let (mut ga, mut gb) = (vec![0.0; len], vec![0.0; len]);
    fu.value_and_gradient(basis, &coeffs, &pushed, &mut ga);
    fv.value_and_gradient(basis, &coeffs, &pushed, &mut gb);
    Ok(q.form(basis, &ga, &gb))
}

/// `ℰ(u, v) = E_G ⟨Q ∇(u∘Ψ), ∇(v∘Ψ)⟩` by Monte Carlo.
pub fn form_energy_bilinear_mc(
    u: &TangentFunctional,
    v: &TangentFunctional,
    q: &CoefficientField,
    setup: GaussianSetup<'_>,
) -> Result<MCEstimate> {
    setup.check(2)?;
    q.check(setup.basis)?;
    u.check(setup.basis)?;
    v.check(setup.basis)?;
    let len = setup.field_len();
    let [acc] = sample_moments::<1, _>(setup.n_samples, setup.seed, |rng, _, out| {
        let (c, pushed) = draw_pushed(setup.spectrum, setup.basis, rng);
        let (mut ga, mut gb) = (vec![0.0; len], vec![0.0; len]);
        u.value_and_gradient(setup.basis, &c, &pushed, &mut ga);
        v.value_and_gradient(setup.basis, &c, &pushed, &mut gb);
        out[0] = q.form(setup.basis, &ga, &gb);
    });
    Ok(acc.estimate(setup.seed))
}

/// `ℰ(u, u)` for a cylindrical `u`.
pub fn form_energy_mc(u: &CylindricalFunction, q: &CoefficientField, setup: GaussianSetup<'_>) -> Result<MCEstimate> {
    let f = TangentFunctional::from(u.clone());
    form_energy_bilinear_mc(&f, &f, q, setup)
}

/// The same energy computed on the measure side, `E ‖Du(Ψφ)‖²_{L²(Ψφ)}`,
/// for the identity coefficient.
pub fn form_energy_measure_side(u: &CylindricalFunction, setup: GaussianSetup<'_>) -> Result<MCEstimate> {
    setup.check(2)?;
    TangentFunctional::from(u.clone()).check(setup.basis)?;
    let [acc] = sample_moments::<1, _>(setup.n_samples, setup.seed, |rng, _, out| {
        let (_, pushed) = draw_pushed(setup.spectrum, setup.basis, rng);
        let g = u.gradient_field(&pushed).expect("dimension checked");
        out[0] = pushed.field_inner(&g, &g).expect("field lives on the atoms");
    });
    Ok(acc.estimate(setup.seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C1EnergyCheck {
    pub energy: MCEstimate,
    /// `(sup ‖∇(u∘Ψ)‖_{T₀*})²` from the declared uniform gradient bound.
    pub bound: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Tests `ℰ(u,u) ≤ C · sup_φ ‖∇(u∘Ψ)(φ)‖²` for the identity coefficient.
pub fn c1_energy_check(u: &CylindricalFunction, constant: f64, setup: GaussianSetup<'_>) -> Result<C1EnergyCheck> {
    if !(constant > 0.0 && constant.is_finite()) {
        return invalid(format!("energy constant must be positive, got {constant}"));
    }
    let energy = form_energy_mc(u, &CoefficientField::Identity, setup)?;
    let b = u.uniform_gradient_bound();
    let bound = b * b;
    let holds = energy.value - 4.0 * energy.std_error <= constant * bound;
    Ok(C1EnergyCheck { energy, bound, constant, holds })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCheck {
    pub clamped: MCEstimate,
    pub original: MCEstimate,
    /// Standard error of the paired difference.
    pub difference_se: f64,
    pub holds: bool,
}

/// `ℰ(τ∘u, τ∘u) ≤ ℰ(u,u)` on common samples, with `τ` the smooth unit clamp.
pub fn contraction_check(u: &TangentFunctional, width: f64, q: &CoefficientField, setup: GaussianSetup<'_>) -> Result<ContractionCheck> {
    setup.check(2)?;
    q.check(setup.basis)?;
    let tu = TangentFunctional::clamped(width, u.clone())?;
    tu.check(setup.basis)?;
    let len = setup.field_len();
    let [a, b, d] = sample_moments::<3, _>(setup.n_samples, setup.seed, |rng, _, out| {
        let (c, pushed) = draw_pushed(setup.spectrum, setup.basis, rng);
        let mut g = vec![0.0; len];
        let v = u.value_and_gradient(setup.basis, &c, &pushed, &mut g);
        let e = q.form(setup.basis, &g, &g);
        let mut slope = [0.0];
        Outer::SmoothClamp(width).grad(&[v], &mut slope);
        out[0] = slope[0] * slope[0] * e;
        out[1] = e;
        out[2] = out[0] - out[1];
    });
    let (clamped, original) = (a.estimate(setup.seed), b.estimate(setup.seed));
    let difference_se = d.std_error();
    let holds = clamped.value <= original.value + 4.0 * difference_se;
    Ok(ContractionCheck { clamped, original, difference_se, holds })
}

/// Number of batches used for the eigenvalue standard errors.
pub const GALERKIN_BATCHES: usize = 20;
/// Largest accepted condition number of a Galerkin mass matrix.
pub const MASS_CONDITION_CAP: f64 = 1e10;
pub const GALERKIN_MAX_SIZE: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinComparison {
    /// Ascending generalized eigenvalues over the big dictionary.
    pub sigma: Vec<f64>,
    /// Ascending generalized eigenvalues over the sub dictionary.
    pub lambda: Vec<f64>,
    pub sigma_se: Vec<f64>,
    pub lambda_se: Vec<f64>,
    pub mass_condition: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// `λ̂ₙ ≥ σ̂ₙ - 4·√(SE_λ² + SE_σ²)` for every `n ≤ |sub|`.
    pub holds: bool,
}

/// Stiffness `K_ij = E⟨∇fᵢ, ∇fⱼ⟩` and mass `M_ij = E[fᵢ fⱼ]` per batch.
fn galerkin_batches(dict: &[TangentFunctional], setup: GaussianSetup<'_>) -> Vec<(DMatrix<f64>, DMatrix<f64>, usize)> {
    let k = dict.len();
    let len = setup.field_len();
    let n = setup.n_samples;
    (0..GALERKIN_BATCHES)
        .into_par_iter()
        .map(|b| {
            let (lo, hi) = (b * n / GALERKIN_BATCHES, (b + 1) * n / GALERKIN_BATCHES);
            let mut stiff = DMatrix::zeros(k, k);
            let mut mass = DMatrix::zeros(k, k);
            let mut grads = vec![0.0; k * len];
            let mut vals = vec![0.0; k];
            for j in lo..hi {
                let mut rng = stream(setup.seed, j as u64);
                let (c, pushed) = draw_pushed(setup.spectrum, setup.basis, &mut rng);
                for (i, f) in dict.iter().enumerate() {
                    vals[i] = f.value_and_gradient(setup.basis, &c, &pushed, &mut grads[i * len..(i + 1) * len]);
                }
                for i in 0..k {
                    for l in 0..=i {
                        let gi = &grads[i * len..(i + 1) * len];
                        let gl = &grads[l * len..(l + 1) * len];
                        stiff[(i, l)] += CoefficientField::Identity.form(setup.basis, gi, gl);
                        mass[(i, l)] += vals[i] * vals[l];
                    }
                }
            }
            for i in 0..k {
                for l in 0..i {
                    stiff[(l, i)] = stiff[(i, l)];
                    mass[(l, i)] = mass[(i, l)];
                }
            }
            (stiff, mass, hi - lo)
        })
        .collect()
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let ev = SymmetricEigen::new(m.clone()).eigenvalues;
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Ascending eigenvalues of the pencil `K v = λ M v` for symmetric `K` and
/// positive definite `M`.
pub fn generalized_eigenvalues(stiffness: &DMatrix<f64>, mass: &DMatrix<f64>) -> Result<Vec<f64>> {
    let cond = condition_number(mass);
    if cond > MASS_CONDITION_CAP {
        return Err(Error::RankDeficient { condition: cond });
    }
    let chol = mass.clone().cholesky().ok_or(Error::RankDeficient { condition: cond })?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(Error::RankDeficient { condition: cond })?;
    let reduced = &linv * stiffness * linv.transpose();
    let sym = (&reduced + reduced.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn principal(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Courant–Fischer comparison between the Galerkin spectra of the gradient
/// form over `big` and over `sub ⊆ big`, both built from one shared sample.
pub fn galerkin_eig_compare(big: &[TangentFunctional], sub: &[TangentFunctional], setup: GaussianSetup<'_>) -> Result<GalerkinComparison> {
    setup.check(2 * GALERKIN_BATCHES)?;
    if big.len() > GALERKIN_MAX_SIZE {
        return invalid(format!("dictionary of {} functions exceeds the cap of {GALERKIN_MAX_SIZE}", big.len()));
    }
    if sub.is_empty() {
        return invalid("sub dictionary is empty");
    }
    for f in big {
        f.check(setup.basis)?;
    }
    let mut idx = Vec::with_capacity(sub.len());
    for f in sub {
        if !f.is_pullback() {
            return invalid(format!("sub dictionary entry `{f}` is not a pull-back u∘Ψ"));
        }
        let i = big.iter().position(|g| g == f).ok_or_else(|| Error::InvalidArgument(format!("`{f}` is not in the big dictionary")))?;
        if idx.contains(&i) {
            return invalid(format!("`{f}` appears twice in the sub dictionary"));
        }
        idx.push(i);
    }

    let batches = galerkin_batches(big, setup);
    let k = big.len();
    let (mut stiff, mut mass) = (DMatrix::zeros(k, k), DMatrix::zeros(k, k));
    for (s, m, _) in &batches {
        stiff += s;
        mass += m;
    }
    let n = setup.n_samples as f64;
    stiff /= n;
    mass /= n;
    let mass_condition = condition_number(&mass);
    let sigma = generalized_eigenvalues(&stiff, &mass)?;
    let lambda = generalized_eigenvalues(&principal(&stiff, &idx), &principal(&mass, &idx))?;

    let mut sig_b = Vec::with_capacity(batches.len());
    let mut lam_b = Vec::with_capacity(batches.len());
    for (s, m, count) in &batches {
        let (s, m) = (s / *count as f64, m / *count as f64);
        sig_b.push(generalized_eigenvalues(&s, &m)?);
        lam_b.push(generalized_eigenvalues(&principal(&s, &idx), &principal(&m, &idx))?);
    }
    let sigma_se = batch_se(&sig_b, k);
    let lambda_se = batch_se(&lam_b, idx.len());
    let holds = (0..idx.len()).all(|i| {
        let se = (lambda_se[i].powi(2) + sigma_se[i].powi(2)).sqrt();
        lambda[i] >= sigma[i] - 4.0 * se
    });
    Ok(GalerkinComparison { sigma, lambda, sigma_se, lambda_se, mass_condition, n_samples: setup.n_samples, seed: setup.seed, holds })
}

fn batch_se(batches: &[Vec<f64>], k: usize) -> Vec<f64> {
    let b = batches.len() as f64;
    (0..k)
        .map(|i| {
            let mean = batches.iter().map(|e| e[i]).sum::<f64>() / b;
            let var = batches.iter().map(|e| (e[i] - mean).powi(2)).sum::<f64>() / (b - 1.0);
            (var / b).sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{parse_function, Inner};
    use crate::measure::BaseMeasure;

    fn fixture(modes: usize) -> (Spectrum, EigenBasis) {
        let base = BaseMeasure::uniform01(32).unwrap();
        (Spectrum::power(1.0, 2.0, modes).unwrap(), EigenBasis::cosine(&base, modes).unwrap())
    }

    fn setup<'a>(s: &'a Spectrum, b: &'a EigenBasis, n: usize) -> GaussianSetup<'a> {
        GaussianSetup { spectrum: s, basis: b, n_samples: n, seed: 11 }
    }

    #[test]
    fn constant_has_zero_energy() {
        let (s, b) = fixture(4);
        let e = form_energy_mc(&CylindricalFunction::constant(2.0), &CoefficientField::Identity, setup(&s, &b, 100)).unwrap();
        assert_eq!((e.value, e.std_error), (0.0, 0.0));
    }

    #[test]
    fn mean_has_unit_energy() {
        let (s, b) = fixture(4);
        let e = form_energy_mc(&parse_function("mean").unwrap(), &CoefficientField::Identity, setup(&s, &b, 200)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12 && e.std_error < 1e-12, "{e:?}");
    }

    #[test]
    fn null_diagonal_kills_energy() {
        let (s, b) = fixture(4);
        let q = CoefficientField::diagonal(vec![0.0; 4]).unwrap();
        let e = form_energy_mc(&parse_function("sin_second_moment").unwrap(), &q, setup(&s, &b, 100)).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn rejects_negative_diagonal() {
        assert!(CoefficientField::diagonal(vec![1.0, -0.1]).is_err());
    }

    #[test]
    fn rank_one_square_field_is_projection_squared() {
        let (_, b) = fixture(4);
        let eta = TangentVector::Coeffs(vec![0.3, -1.0, 0.5, 0.2]);
        let q = CoefficientField::rank_one(&b, &eta).unwrap();
        let u = parse_function("sin_second_moment").unwrap();
        let phi = TangentVector::Coeffs(vec![0.1, 0.4, -0.2, 0.05]);
        let gamma = square_field(&u, &u, &b, &phi, &q).unwrap();

        let eta_field = b.to_field(&eta).unwrap();
        let state = b.anchored(&[0.1, 0.4, -0.2, 0.05]).unwrap();
        let pushed = crate::measure::pushforward(b.base().measure(), &state).unwrap();
        let grad = u.gradient_field(&pushed).unwrap();
        let proj = b.base().measure().field_inner(&eta_field, &grad).unwrap();
        assert!((gamma - proj * proj).abs() < 1e-12 * (1.0 + proj * proj));
    }

    #[test]
    fn rank_one_from_raw_field_matches_coeffs() {
        let (_, b) = fixture(4);
        let c = vec![0.3, -1.0, 0.5, 0.2];
        let raw = CoefficientField::rank_one(&b, &TangentVector::Field(b.synthesize(&c).unwrap())).unwrap();
        let CoefficientField::RankOne(got) = raw else { unreachable!() };
        for (g, e) in got.iter().zip(&c) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn square_field_is_psd_and_bilinear() {
        let (_, b) = fixture(4);
        let qs = [
            CoefficientField::Identity,
            CoefficientField::diagonal(vec![1.0, 0.5, 2.0, 0.0]).unwrap(),
            CoefficientField::rank_one(&b, &TangentVector::Coeffs(vec![1.0, 0.2, -0.3, 0.0])).unwrap(),
        ];
        let u = parse_function("tanh_mean").unwrap();
        let v = parse_function("second_moment").unwrap();
        let w = parse_function("cos[x]").unwrap();
        // Γ(u, v + x) = Γ(u, v) + Γ(u, x) with v + x = sum[sq, x].
        let vw = CylindricalFunction::new(Outer::Sum, vec![Inner::SquaredNorm, Inner::Coord(0)]).unwrap();
        let x = parse_function("mean").unwrap();
        for q in &qs {
            for seed in 0..5 {
                let phi = crate::measure::sample_gaussian_tangent(&Spectrum::power(1.0, 2.0, 4).unwrap(), &b, seed).unwrap();
                for f in [&u, &v, &w] {
                    assert!(square_field(f, f, &b, &phi, q).unwrap() >= 0.0);
                }
                let lhs = square_field(&u, &vw, &b, &phi, q).unwrap();
                let rhs = square_field(&u, &v, &b, &phi, q).unwrap() + square_field(&u, &x, &b, &phi, q).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()), "{lhs} {rhs}");
            }
        }
    }

    #[test]
    fn energy_is_symmetric_on_shared_samples() {
        let (s, b) = fixture(6);
        let u = TangentFunctional::from(parse_function("tanh_mean").unwrap());
        let v = TangentFunctional::from(parse_function("sin_second_moment").unwrap());
        let q = CoefficientField::diagonal(vec![1.0, 2.0, 0.5, 0.0, 1.0, 3.0]).unwrap();
        let a = form_energy_bilinear_mc(&u, &v, &q, setup(&s, &b, 500)).unwrap();
        let c = form_energy_bilinear_mc(&v, &u, &q, setup(&s, &b, 500)).unwrap();
        assert!((a.value - c.value).abs() <= 1e-12 * (1.0 + a.value.abs()));
    }

    #[test]
    fn tangent_and_measure_side_agree() {
        let (s, b) = fixture(6);
        let u = parse_function("sin_second_moment").unwrap();
        let a = form_energy_mc(&u, &CoefficientField::Identity, setup(&s, &b, 300)).unwrap();
        let m = form_energy_measure_side(&u, setup(&s, &b, 300)).unwrap();
        assert!((a.value - m.value).abs() <= 1e-12 * a.value.abs().max(1.0));
    }

    #[test]
    fn c1_check_examples() {
        let (s, b) = fixture(6);
        for name in ["mean", "tanh_mean"] {
            let r = c1_energy_check(&parse_function(name).unwrap(), 1.0, setup(&s, &b, 2000)).unwrap();
            assert!(r.holds && r.bound == 1.0, "{name}: {r:?}");
        }
        let r = c1_energy_check(&CylindricalFunction::constant(1.0), 1.0, setup(&s, &b, 10)).unwrap();
        assert!(r.holds && r.energy.value == 0.0 && r.bound == 0.0);
    }

    #[test]
    fn clamp_contracts_energy() {
        let (s, b) = fixture(6);
        let u = TangentFunctional::from(parse_function("mean").unwrap());
        let r = contraction_check(&u, 0.2, &CoefficientField::Identity, setup(&s, &b, 2000)).unwrap();
        assert!(r.holds && r.clamped.value < r.original.value, "{r:?}");
    }

    fn sub_dictionary() -> Vec<TangentFunctional> {
        ["const1[]", "mean", "second_moment", "tanh_mean", "sin_second_moment", "cos[x]"]
            .iter()
            .map(|n| parse_function(n).unwrap().into())
            .collect()
    }

    #[test]
    fn galerkin_identical_dictionaries_agree() {
        let (s, b) = fixture(4);
        let sub = sub_dictionary();
        let r = galerkin_eig_compare(&sub, &sub, setup(&s, &b, 2000)).unwrap();
        assert_eq!(r.sigma, r.lambda);
        assert!(r.holds);
        assert!(r.sigma[0].abs() < 1e-8, "constants have zero energy: {:?}", r.sigma);
    }

    #[test]
    fn galerkin_superset_lowers_spectrum() {
        let (s, b) = fixture(4);
        let sub = sub_dictionary();
        let mut big = sub.clone();
        big.push(TangentFunctional::Coefficient(2));
        let r = galerkin_eig_compare(&big, &sub, setup(&s, &b, 4000)).unwrap();
        assert!(r.holds);
        for n in 0..sub.len() {
            assert!(r.lambda[n] >= r.sigma[n] - 1e-9 * r.sigma[n].abs().max(1.0), "{r:?}");
        }
    }

    #[test]
    fn galerkin_singletons_are_rayleigh_quotients() {
        let (s, b) = fixture(4);
        let f: TangentFunctional = parse_function("tanh_mean").unwrap().into();
        let r = galerkin_eig_compare(std::slice::from_ref(&f), std::slice::from_ref(&f), setup(&s, &b, 2000)).unwrap();
        let e = form_energy_bilinear_mc(&f, &f, &CoefficientField::Identity, setup(&s, &b, 2000)).unwrap();
        let [m] = sample_moments::<1, _>(2000, 11, |rng, _, out| {
            let (c, pushed) = draw_pushed(&s, &b, rng);
            let v = f.value(&c, &pushed);
            out[0] = v * v;
        });
        assert!((r.lambda[0] - e.value / m.mean()).abs() < 1e-10 * r.lambda[0]);
    }

    #[test]
    fn galerkin_rejects_dependent_and_foreign_entries() {
        let (s, b) = fixture(4);
        let mut dup = sub_dictionary();
        // mean = 1/2 + c₁ on the uniform base, so c₁ is dependent.
        dup.push(TangentFunctional::Coefficient(1));
        assert!(matches!(galerkin_eig_compare(&dup, &sub_dictionary(), setup(&s, &b, 2000)), Err(Error::RankDeficient { .. })));
        let foreign = vec![TangentFunctional::Coefficient(2)];
        assert!(galerkin_eig_compare(&dup, &foreign, setup(&s, &b, 2000)).is_err());
    }

    #[test]
    fn hermite_gradient_matches_difference() {
        let (s, b) = fixture(4);
        let f = TangentFunctional::hermite(&s, 2, 3).unwrap();
        let c = vec![0.2, -0.3, 0.1, 0.05];
        let pushed = crate::measure::pushforward(b.base().measure(), &b.anchored(&c).unwrap()).unwrap();
        let mut g = vec![0.0; 32];
        f.value_and_gradient(&b, &c, &pushed, &mut g);
        let d = CoefficientField::Identity.form(&b, &g, b.mode_values(2));
        let h = 1e-6;
        let (mut cp, mut cm) = (c.clone(), c.clone());
        cp[1] += h;
        cm[1] -= h;
        let fd = (f.value(&cp, &pushed) - f.value(&cm, &pushed)) / (2.0 * h);
        assert!((d - fd).abs() < 1e-7, "{d} {fd}");
    }
}
