//! Discrete reference measures, tangent vector fields and the push-forward
//! map `Ψ(φ) = μ₀ ∘ φ⁻¹`.
//!
//! All measures are finitely supported and immutable; transforms return new
//! values. Coincident atoms are never merged.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::{std_normal, stream};
use crate::spectral::Spectrum;

/// Field values at the `N` support points of a measure, row-major `N × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    dim: usize,
    values: Vec<f64>,
}

impl VectorField {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("field dimension must be positive");
        }
        if values.len() % dim != 0 {
            return invalid(format!("{} values do not split into rows of {dim}", values.len()));
        }
        Ok(Self { dim, values })
    }

    /// Scalar field on a 1-D support.
    pub fn scalar(values: Vec<f64>) -> Self {
        Self { dim: 1, values }
    }

    pub fn zeros(dim: usize, len: usize) -> Self {
        Self { dim, values: vec![0.0; dim * len] }
    }

    pub fn constant(dim: usize, len: usize, c: &[f64]) -> Self {
        assert_eq!(c.len(), dim);
        Self { dim, values: c.iter().copied().cycle().take(dim * len).collect() }
    }

    /// The identity map `x ↦ x` on the support of `measure`.
    pub fn identity(measure: &DiscreteMeasure) -> Self {
        Self { dim: measure.dim, values: measure.points.clone() }
    }

    /// Evaluates `f` at every support point.
    pub fn from_fn(measure: &DiscreteMeasure, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let d = measure.dim;
        let mut values = vec![0.0; measure.points.len()];
        for (x, out) in measure.points.chunks_exact(d).zip(values.chunks_exact_mut(d)) {
            f(x, out);
        }
        Self { dim: d, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    fn check_same_shape(&self, other: &VectorField) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(())
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &VectorField) -> Result<VectorField> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + s * b).collect();
        Ok(Self { dim: self.dim, values })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, s: f64) -> VectorField {
        Self { dim: self.dim, values: self.values.iter().map(|v| v * s).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-9;

impl DiscreteMeasure {
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("measure dimension must be positive");
        }
        if weights.is_empty() {
            return invalid("a probability measure needs at least one atom");
        }
        if points.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch { expected: dim * weights.len(), got: points.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return invalid(format!("atom weights must be positive, got {w}"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return invalid("atom locations must be finite");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        Ok(Self { dim, points, weights })
    }

    /// Uniform weights on the given 1-D points.
    pub fn uniform_1d(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        Self::new(1, points, vec![1.0 / n as f64; n])
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// `μ(ψ) = Σᵢ wᵢ ψ(xᵢ)`.
    pub fn integrate(&self, mut psi: impl FnMut(&[f64]) -> f64) -> f64 {
        self.atoms().map(|(x, w)| w * psi(x)).sum()
    }

    /// `⟨a, b⟩_{L²(μ)} = Σᵢ wᵢ ⟨a(xᵢ), b(xᵢ)⟩`.
    pub fn field_inner(&self, a: &VectorField, b: &VectorField) -> Result<f64> {
        self.check_field(a)?;
        self.check_field(b)?;
        Ok(a
            .rows()
            .zip(b.rows())
            .zip(&self.weights)
            .map(|((x, y), w)| w * dot(x, y))
            .sum())
    }

    pub fn check_field(&self, f: &VectorField) -> Result<()> {
        if f.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: f.dim });
        }
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: f.len() });
        }
        Ok(())
    }

    /// Largest distance between two support points.
    pub fn diameter_with(&self, other: &DiscreteMeasure) -> f64 {
        let mut diam = 0.0f64;
        let pts: Vec<&[f64]> = self.points.chunks_exact(self.dim).chain(other.points.chunks_exact(other.dim)).collect();
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                diam = diam.max(euclid(a, b));
            }
        }
        diam
    }

    /// CSV with header `x_1,…,x_d,weight`; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for k in 1..=self.dim {
            let _ = write!(out, "x_{k},");
        }
        out.push_str("weight\n");
        for (x, w) in self.atoms() {
            for v in x {
                let _ = write!(out, "{v:.16e},");
            }
            let _ = writeln!(out, "{w:.16e}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty measure file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols.last() != Some(&"weight") {
            return Err(Error::Parse(format!("bad header `{header}`; expected x_1,…,x_d,weight")));
        }
        for (k, c) in cols[..cols.len() - 1].iter().enumerate() {
            if *c != format!("x_{}", k + 1) {
                return Err(Error::Parse(format!("bad header column `{c}`")));
            }
        }
        let dim = cols.len() - 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != dim + 1 {
                return Err(Error::Parse(format!("row {} has {} fields, expected {}", lineno + 2, fields.len(), dim + 1)));
            }
            for (k, f) in fields.iter().enumerate() {
                let v: f64 = f.parse().map_err(|_| Error::Parse(format!("row {}: `{f}` is not a number", lineno + 2)))?;
                if k < dim {
                    points.push(v);
                } else {
                    weights.push(v);
                }
            }
        }
        Self::new(dim, points, weights).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Parse(m),
            other => other,
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    /// Midpoints of `N` equal cells of `[0,1]`.
    Uniform01,
    /// `N` iid standard normal points in `ℝ^d`.
    Gaussian,
    /// Supplied explicitly, e.g. the image of another base.
    Custom,
}

/// The reference measure `μ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMeasure {
    kind: BaseKind,
    measure: DiscreteMeasure,
}

impl BaseMeasure {
    pub fn new(kind: BaseKind, n: usize, dim: usize, seed: Option<u64>) -> Result<Self> {
        if n == 0 {
            return invalid("base measure needs N >= 1 atoms");
        }
        let w = vec![1.0 / n as f64; n];
        let measure = match kind {
            BaseKind::Uniform01 => {
                if dim != 1 {
                    return invalid("uniform01 base measure is one-dimensional");
                }
                let pts = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
                DiscreteMeasure::new(1, pts, w)?
            }
            BaseKind::Gaussian => {
                let mut rng = stream(seed.unwrap_or(0), 0);
                let pts = (0..n * dim).map(|_| std_normal(&mut rng)).collect();
                DiscreteMeasure::new(dim, pts, w)?
            }
            BaseKind::Custom => return invalid("custom bases are built with BaseMeasure::custom"),
        };
        Ok(Self { kind, measure })
    }

    pub fn uniform01(n: usize) -> Result<Self> {
        Self::new(BaseKind::Uniform01, n, 1, None)
    }

    pub fn custom(measure: DiscreteMeasure) -> Self {
        Self { kind: BaseKind::Custom, measure }
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.measure.dim
    }
}

/// Midpoint-rule Gram tolerance `max(1e-9, 10·M²/N²)`.
pub fn gram_tol(modes: usize, n: usize) -> f64 {
    let r = modes as f64 / n as f64;
    (10.0 * r * r).max(1e-9)
}

/// Orthonormal fields `φ₁..φ_M` on the support of a base measure, together
/// with the anchor field around which Gaussian perturbations are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    base: BaseMeasure,
    modes: usize,
    /// `modes × N × d`.
    values: Vec<f64>,
    anchor: VectorField,
}

impl EigenBasis {
    /// `φ₁ ≡ 1`, `φₙ(x) = √2·cos((n-1)πx)` on the uniform midpoint base.
    pub fn cosine(base: &BaseMeasure, modes: usize) -> Result<Self> {
        if base.kind != BaseKind::Uniform01 {
            return invalid("cosine basis requires the uniform01 base measure");
        }
        let n = base.len();
        if 2 * modes > n {
            return invalid(format!("M = {modes} modes alias on N = {n} atoms; need M <= N/2"));
        }
        let mut values = Vec::with_capacity(modes * n);
        for m in 0..modes {
            for &x in base.measure.points() {
                values.push(if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 * (m as f64 * std::f64::consts::PI * x).cos() });
            }
        }
        Self::from_values(base.clone(), modes, values, VectorField::identity(base.measure()))
    }

    /// Fields `p_k(x)·e_j` for scalar polynomials `p_k` orthonormalized in
    /// `L²(μ₀)` (monomials in graded order, Gram–Schmidt applied twice) and
    /// coordinate directions `e_j`, ordered by `k` first. Works on any base.
    pub fn polynomial(base: &BaseMeasure, modes: usize) -> Result<Self> {
        let (n, d) = (base.len(), base.dim());
        let needed = modes.div_ceil(d);
        let w = base.measure.weights();
        let mut scalars: Vec<Vec<f64>> = Vec::with_capacity(needed);
        let mut degree = 0u32;
        while scalars.len() < needed {
            for exps in graded_exponents(d, degree) {
                if scalars.len() == needed {
                    break;
                }
                let mut v: Vec<f64> = base.measure.points().chunks_exact(d).map(|x| x.iter().zip(&exps).map(|(xi, &e)| xi.powi(e as i32)).product()).collect();
                let before = v.iter().zip(w).map(|(a, w)| w * a * a).sum::<f64>().sqrt();
                for _ in 0..2 {
                    for q in &scalars {
                        let c: f64 = v.iter().zip(q).zip(w).map(|((a, b), w)| w * a * b).sum();
                        v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                    }
                }
                let norm = v.iter().zip(w).map(|(a, w)| w * a * a).sum::<f64>().sqrt();
                if !(norm > 1e-8 * before.max(1.0)) {
                    return invalid(format!("polynomial basis degenerates after {} modes on N = {n} atoms", scalars.len() * d));
                }
                v.iter_mut().for_each(|a| *a /= norm);
                scalars.push(v);
            }
            degree += 1;
        }
        let mut values = Vec::with_capacity(modes * n * d);
        for m in 0..modes {
            let (k, j) = (m / d, m % d);
            for i in 0..n {
                for c in 0..d {
                    values.push(if c == j { scalars[k][i] } else { 0.0 });
                }
            }
        }
        Self::from_values(base.clone(), modes, values, VectorField::identity(base.measure()))
    }

    /// Builds a basis from explicit mode values, checking the Gram invariant.
    pub fn from_values(base: BaseMeasure, modes: usize, values: Vec<f64>, anchor: VectorField) -> Result<Self> {
        let per_mode = base.len() * base.dim();
        if values.len() != modes * per_mode {
            return Err(Error::DimensionMismatch { expected: modes * per_mode, got: values.len() });
        }
        base.measure.check_field(&anchor)?;
        let basis = Self { base, modes, values, anchor };
        let err = basis.gram_error();
        let tol = gram_tol(modes, basis.base.len());
        if err > tol {
            return invalid(format!("basis Gram deviation {err:e} exceeds tolerance {tol:e}"));
        }
        Ok(basis)
    }

    pub fn base(&self) -> &BaseMeasure {
        &self.base
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn anchor(&self) -> &VectorField {
        &self.anchor
    }

    /// Values of 1-based mode `n` (`N × d`, row-major).
    pub fn mode_values(&self, n: usize) -> &[f64] {
        let per = self.base.len() * self.base.dim();
        &self.values[(n - 1) * per..n * per]
    }

    pub fn mode_field(&self, n: usize) -> VectorField {
        VectorField { dim: self.base.dim(), values: self.mode_values(n).to_vec() }
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let w = self.base.measure.weights();
        let d = self.base.dim();
        DMatrix::from_fn(self.modes, self.modes, |a, b| {
            let (fa, fb) = (self.mode_values(a + 1), self.mode_values(b + 1));
            fa.chunks_exact(d).zip(fb.chunks_exact(d)).zip(w).map(|((x, y), w)| w * dot(x, y)).sum()
        })
    }

    pub fn gram_error(&self) -> f64 {
        let g = self.gram();
        let mut err = 0.0f64;
        for i in 0..self.modes {
            for j in 0..self.modes {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((g[(i, j)] - target).abs());
            }
        }
        err
    }

    fn check_coeffs(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.modes {
            return Err(Error::ModeMismatch { spectrum: coeffs.len(), basis: self.modes });
        }
        Ok(())
    }

    /// `Σₙ cₙ φₙ`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<VectorField> {
        self.check_coeffs(coeffs)?;
        let mut values = vec![0.0; self.base.len() * self.base.dim()];
        self.accumulate(coeffs, &mut values);
        Ok(VectorField { dim: self.base.dim(), values })
    }

    /// `anchor + Σₙ cₙ φₙ`, the state carried by the diffusion.
    pub fn anchored(&self, coeffs: &[f64]) -> Result<VectorField> {
        self.check_coeffs(coeffs)?;
        let mut values = self.anchor.values.clone();
        self.accumulate(coeffs, &mut values);
        Ok(VectorField { dim: self.base.dim(), values })
    }

    fn accumulate(&self, coeffs: &[f64], values: &mut [f64]) {
        for (n, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                for (v, phi) in values.iter_mut().zip(self.mode_values(n + 1)) {
                    *v += c * phi;
                }
            }
        }
    }

    /// `⟨φₙ, f⟩_{L²(μ₀)}` for every mode.
    pub fn inner_products(&self, field: &VectorField) -> Result<Vec<f64>> {
        self.base.measure.check_field(field)?;
        let w = self.base.measure.weights();
        let d = self.base.dim();
        Ok((1..=self.modes)
            .map(|n| {
                self.mode_values(n)
                    .chunks_exact(d)
                    .zip(field.rows())
                    .zip(w)
                    .map(|((p, f), w)| w * dot(p, f))
                    .sum()
            })
            .collect())
    }

    /// Least-squares coefficients of `field` in the basis (Gram solve).
    pub fn analyze(&self, field: &VectorField) -> Result<Vec<f64>> {
        let b = DVector::from_vec(self.inner_products(field)?);
        if self.modes == 0 {
            return Ok(Vec::new());
        }
        let chol = self.gram().cholesky().ok_or(Error::RankDeficient { condition: f64::INFINITY })?;
        Ok(chol.solve(&b).iter().copied().collect())
    }

    pub fn to_field(&self, v: &TangentVector) -> Result<VectorField> {
        match v {
            TangentVector::Coeffs(c) => self.synthesize(c),
            TangentVector::Field(f) => {
                self.base.measure.check_field(f)?;
                Ok(f.clone())
            }
        }
    }

    pub fn to_coeffs(&self, v: &TangentVector) -> Result<Vec<f64>> {
        match v {
            TangentVector::Coeffs(c) => {
                self.check_coeffs(c)?;
                Ok(c.clone())
            }
            TangentVector::Field(f) => self.analyze(f),
        }
    }

    /// Carries the basis to the image base `μ₀ ∘ (φ*)⁻¹`.
    ///
    /// The transported mode `φₙ ∘ (φ*)⁻¹` takes the value `φₙ(xᵢ)` at the
    /// image atom `φ*(xᵢ)`, and so does the anchor, which makes the map
    /// `φ ↦ φ ∘ (φ*)⁻¹` an isometry intertwining both push-forwards. Rejects
    /// transports that merge atoms.
    pub fn transport(&self, phi_star: &VectorField) -> Result<EigenBasis> {
        let image = pushforward(self.base.measure(), phi_star)?;
        let mut rows: Vec<&[f64]> = phi_star.rows().collect();
        rows.sort_by(|a, b| a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        if rows.windows(2).any(|w| w[0] == w[1]) {
            return invalid("transport map is not injective on the atoms");
        }
        Ok(Self {
            base: BaseMeasure::custom(image),
            modes: self.modes,
            values: self.values.clone(),
            anchor: self.anchor.clone(),
        })
    }
}

/// Exponent vectors of total degree `deg` in `d` variables, lexicographically
/// descending in the first coordinate.
fn graded_exponents(d: usize, deg: u32) -> Vec<Vec<u32>> {
    if d == 1 {
        return vec![vec![deg]];
    }
    let mut out = Vec::new();
    for first in (0..=deg).rev() {
        for mut rest in graded_exponents(d - 1, deg - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A tangent vector in `T₀ = L²(μ₀)`, either through basis coefficients or
/// as raw values at the atoms of `μ₀`.
#[derive(Debug, Clone, PartialEq)]
pub enum TangentVector {
    Coeffs(Vec<f64>),
    Field(VectorField),
}

/// Draws independent coefficients `cₙ ~ N(0, 1/αₙ)`.
pub fn gaussian_coeffs<R: Rng + ?Sized>(spectrum: &Spectrum, rng: &mut R) -> Vec<f64> {
    spectrum.alphas().iter().map(|a| std_normal(rng) / a.sqrt()).collect()
}

/// A draw from the Gaussian measure `G` on `T₀`, deterministic in `seed`.
pub fn sample_gaussian_tangent(spectrum: &Spectrum, basis: &EigenBasis, seed: u64) -> Result<TangentVector> {
    check_modes(spectrum, basis)?;
    let mut rng = stream(seed, 0);
    Ok(TangentVector::Coeffs(gaussian_coeffs(spectrum, &mut rng)))
}

/// Checks that a spectrum and a basis describe the same number of modes.
pub fn check_modes(spectrum: &Spectrum, basis: &EigenBasis) -> Result<()> {
    if spectrum.len() != basis.modes() {
        return Err(Error::ModeMismatch { spectrum: spectrum.len(), basis: basis.modes() });
    }
    Ok(())
}

/// One draw `φ = anchor + Σ cₙφₙ` with `cₙ ~ N(0, 1/αₙ)`, returned as the
/// coefficients and the pushed measure `Ψ(φ)`. Callers check the mode count.
pub fn draw_pushed<R: Rng + ?Sized>(spectrum: &Spectrum, basis: &EigenBasis, rng: &mut R) -> (Vec<f64>, DiscreteMeasure) {
    let coeffs = gaussian_coeffs(spectrum, rng);
    let state = basis.anchored(&coeffs).expect("mode count checked by caller");
    let measure = pushforward(basis.base().measure(), &state).expect("state lives on the base atoms");
    (coeffs, measure)
}

/// `Ψ(φ)`: atom `xᵢ` moves to `φ(xᵢ)` with its weight.
pub fn pushforward(base: &DiscreteMeasure, phi: &VectorField) -> Result<DiscreteMeasure> {
    if phi.len() != base.len() {
        return Err(Error::DimensionMismatch { expected: base.len(), got: phi.len() });
    }
    Ok(DiscreteMeasure { dim: phi.dim, points: phi.values.clone(), weights: base.weights.clone() })
}

/// `‖φ‖_{L^p(μ₀)} = (Σᵢ wᵢ ‖φ(xᵢ)‖^p)^{1/p}`.
pub fn tangent_norm(base: &DiscreteMeasure, phi: &VectorField, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("tangent norm needs p in [1, ∞), got {p}"));
    }
    if phi.len() != base.len() {
        return Err(Error::DimensionMismatch { expected: base.len(), got: phi.len() });
    }
    let s: f64 = phi
        .rows()
        .zip(base.weights())
        .map(|(v, w)| w * dot(v, v).sqrt().powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}
