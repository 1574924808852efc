//! The Ornstein–Uhlenbeck-type diffusion on the Wasserstein space, simulated
//! exactly mode by mode and pushed through `Ψ`, plus Monte Carlo checks of
//! its semigroup, its invariant law `N_G` and Gaussian integration by parts.

use crate::calculus::CylindricalFunction;
use crate::dirichlet::{GaussianSetup, TangentFunctional};
use crate::error::{invalid, Error, Result};
use crate::measure::{check_modes, draw_pushed, gaussian_coeffs, pushforward, DiscreteMeasure, EigenBasis, VectorField};
use crate::rng::{derive_seed, std_normal, stream, StreamRng};
use crate::spectral::{hermite_eigenfunction, ou_transition, Spectrum};
use crate::stats::{ks_two_sample, sample_moments, KsResult, MCEstimate};

/// Starting point of a path.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// `c₀ ~ G`.
    Stationary,
    Coeffs(Vec<f64>),
}

/// One path of mode coefficients on a time grid. Pushed measures are
/// materialized on demand with [`OUPathSample::pushed`].
#[derive(Debug, Clone, PartialEq)]
pub struct OUPathSample {
    t_grid: Vec<f64>,
    states: Vec<Vec<f64>>,
    seed: u64,
}

impl OUPathSample {
    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Ψ(anchor + Σₙ cₙ(t_k) φₙ)`.
    pub fn pushed(&self, basis: &EigenBasis, k: usize) -> Result<DiscreteMeasure> {
        let state = self.states.get(k).ok_or_else(|| Error::InvalidArgument(format!("no snapshot {k}")))?;
        pushforward(basis.base().measure(), &basis.anchored(state)?)
    }

    /// Long-format CSV `t,mode,coeff` with 1-based modes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mode,coeff\n");
        for (t, c) in self.t_grid.iter().zip(&self.states) {
            for (n, v) in c.iter().enumerate() {
                out.push_str(&format!("{t:.16e},{},{v:.16e}\n", n + 1));
            }
        }
        out
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return invalid("time grid is empty");
    }
    if !(t_grid[0] >= 0.0 && t_grid[0].is_finite()) {
        return invalid(format!("time grid must start at t >= 0, got {}", t_grid[0]));
    }
    if let Some(w) = t_grid.windows(2).find(|w| !(w[1] > w[0] && w[1].is_finite())) {
        return invalid(format!("time grid is not strictly increasing at {} -> {}", w[0], w[1]));
    }
    Ok(())
}

fn run_path(spectrum: &Spectrum, t_grid: &[f64], init: &Init, rng: &mut StreamRng) -> Result<Vec<Vec<f64>>> {
    let mut c = match init {
        Init::Stationary => gaussian_coeffs(spectrum, rng),
        Init::Coeffs(c) => {
            if c.len() != spectrum.len() {
                return Err(Error::ModeMismatch { spectrum: spectrum.len(), basis: c.len() });
            }
            c.clone()
        }
    };
    let mut states = Vec::with_capacity(t_grid.len());
    let mut t_prev = 0.0;
    for &t in t_grid {
        let dt = t - t_prev;
        if dt > 0.0 {
            for (v, &a) in c.iter_mut().zip(spectrum.alphas()) {
                *v = ou_transition(a, dt, *v, std_normal(rng))?;
            }
        }
        states.push(c.clone());
        t_prev = t;
    }
    Ok(states)
}

/// Exact simulation: each coefficient moves by the OU transition over every
/// grid increment, starting at time zero.
pub fn simulate_path(spectrum: &Spectrum, basis: &EigenBasis, t_grid: &[f64], init: &Init, seed: u64) -> Result<OUPathSample> {
    simulate_path_indexed(spectrum, basis, t_grid, init, seed, 0)
}

/// Path `index` of an ensemble sharing `seed`; paths use disjoint streams.
pub fn simulate_path_indexed(spectrum: &Spectrum, basis: &EigenBasis, t_grid: &[f64], init: &Init, seed: u64, index: u64) -> Result<OUPathSample> {
    check_modes(spectrum, basis)?;
    check_grid(t_grid)?;
    let states = run_path(spectrum, t_grid, init, &mut stream(seed, index))?;
    Ok(OUPathSample { t_grid: t_grid.to_vec(), states, seed })
}

/// `n` independent draws from `N_G = G ∘ Ψ⁻¹`.
pub fn sample_invariant(spectrum: &Spectrum, basis: &EigenBasis, n: usize, seed: u64) -> Result<Vec<DiscreteMeasure>> {
    check_modes(spectrum, basis)?;
    if n == 0 {
        return invalid("need at least one draw");
    }
    Ok((0..n).map(|j| draw_pushed(spectrum, basis, &mut stream(seed, j as u64)).1).collect())
}

fn check_degree(k: usize, t: f64) -> Result<()> {
    if k > 6 {
        return invalid(format!("Hermite degree {k} exceeds 6"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return invalid(format!("time must be nonnegative, got {t}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenDecay {
    pub lhs: MCEstimate,
    pub rhs: f64,
    pub holds: bool,
}

/// `E[H̄ₖ(X_t)] = e^{-kαₙt} H̄ₖ(x₀)` for mode `n` started at `x₀`.
pub fn semigroup_eigen_check(spectrum: &Spectrum, k: usize, mode: usize, t: f64, x0: f64, n_samples: usize, seed: u64) -> Result<EigenDecay> {
    check_degree(k, t)?;
    if t == 0.0 {
        return invalid("eigen decay needs t > 0");
    }
    let alpha = spectrum.alpha(mode)?;
    let [acc] = sample_moments::<1, _>(n_samples, seed, |rng, _, out| {
        let x = ou_transition(alpha, t, x0, std_normal(rng)).expect("validated");
        out[0] = hermite_eigenfunction(k, alpha, x);
    });
    let lhs = acc.estimate(seed);
    let rhs = (-(k as f64) * alpha * t).exp() * hermite_eigenfunction(k, alpha, x0);
    let holds = (lhs.value - rhs).abs() <= 4.0 * lhs.std_error;
    Ok(EigenDecay { lhs, rhs, holds })
}

/// Ensemble mean of `H̄ₖ(X_t) - e^{-kαₙt} H̄ₖ(X₀)` over `n_paths` paths of
/// mode `n`, started at `x0` or from the stationary law when `x0` is `None`.
pub fn generator_residual(spectrum: &Spectrum, k: usize, mode: usize, t: f64, x0: Option<f64>, n_paths: usize, seed: u64) -> Result<MCEstimate> {
    check_degree(k, t)?;
    let alpha = spectrum.alpha(mode)?;
    let decay = (-(k as f64) * alpha * t).exp();
    let [acc] = sample_moments::<1, _>(n_paths, seed, |rng, _, out| {
        let start = x0.unwrap_or_else(|| std_normal(rng) / alpha.sqrt());
        let x = ou_transition(alpha, t, start, std_normal(rng)).expect("validated");
        out[0] = hermite_eigenfunction(k, alpha, x) - decay * hermite_eigenfunction(k, alpha, start);
    });
    Ok(acc.estimate(seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpCheck {
    /// `E[∂ₙF · G]`.
    pub lhs: MCEstimate,
    /// `-E[F (∂ₙG - αₙ cₙ G)]`.
    pub rhs: MCEstimate,
    /// Standard error of the paired difference.
    pub difference_se: f64,
    pub holds: bool,
}

/// Gaussian integration by parts along mode `n` under `G`, with common
/// random numbers on both sides.
///
/// For pull-backs `F = u∘Ψ`, `∂ₙF(φ) = ⟨∇(u∘Ψ)(φ), φₙ⟩_{T₀}` is the
/// measure-side derivative along the lifted coefficient field, and `cₙ` is
/// the coordinate of `φ - anchor`.
pub fn ibp_check(u: &TangentFunctional, v: &TangentFunctional, mode: usize, setup: GaussianSetup<'_>) -> Result<IbpCheck> {
    check_modes(setup.spectrum, setup.basis)?;
    if setup.n_samples < 2 {
        return invalid("need at least 2 samples");
    }
    u.check(setup.basis)?;
    v.check(setup.basis)?;
    let alpha = setup.spectrum.alpha(mode)?;
    if mode > setup.basis.modes() {
        return invalid(format!("mode {mode} outside the basis"));
    }
    let len = setup.basis.base().len() * setup.basis.base().dim();
    let [l, r, d] = sample_moments::<3, _>(setup.n_samples, setup.seed, |rng, _, out| {
        let (c, pushed) = draw_pushed(setup.spectrum, setup.basis, rng);
        let mut scratch = vec![0.0; len];
        let (fu, du) = u.value_and_partial(setup.basis, &c, &pushed, mode, &mut scratch);
        let (fv, dv) = v.value_and_partial(setup.basis, &c, &pushed, mode, &mut scratch);
        out[0] = du * fv;
        out[1] = -fu * (dv - alpha * c[mode - 1] * fv);
        out[2] = out[0] - out[1];
    });
    let difference_se = d.std_error();
    let holds = d.mean().abs() <= 4.0 * difference_se;
    Ok(IbpCheck { lhs: l.estimate(setup.seed), rhs: r.estimate(setup.seed), difference_se, holds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    /// One KS result per test functional.
    pub rows: Vec<(String, KsResult)>,
    /// Per-test level after the Bonferroni correction.
    pub level: f64,
    pub holds: bool,
}

/// Family-wise level of the invariance test.
pub const INVARIANCE_LEVEL: f64 = 0.01;

/// Samples `N_G` from the reference `μ₀ = base_a` and from the transported
/// representation on `base_b = μ₀ ∘ (φ*)⁻¹`, and compares the laws of each
/// functional by a two-sample KS test.
pub fn reference_invariance_check(
    basis_a: &EigenBasis,
    phi_star: &VectorField,
    base_b: &DiscreteMeasure,
    spectrum: &Spectrum,
    functionals: &[CylindricalFunction],
    n: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    check_modes(spectrum, basis_a)?;
    if functionals.is_empty() {
        return invalid("no test functionals");
    }
    let image = pushforward(basis_a.base().measure(), phi_star)?;
    if image != *base_b {
        return invalid("base_b is not the push-forward of base_a under the transport map");
    }
    let basis_b = basis_a.transport(phi_star)?;
    let draws_a = sample_invariant(spectrum, basis_a, n, seed)?;
    let draws_b = sample_invariant(spectrum, &basis_b, n, derive_seed(seed, 1))?;
    let level = INVARIANCE_LEVEL / functionals.len() as f64;
    let rows: Vec<(String, KsResult)> = functionals
        .iter()
        .map(|f| {
            let a: Vec<f64> = draws_a.iter().map(|m| f.eval(m)).collect();
            let b: Vec<f64> = draws_b.iter().map(|m| f.eval(m)).collect();
            (f.to_string(), ks_two_sample(&a, &b))
        })
        .collect();
    let holds = rows.iter().all(|(_, r)| r.p_value >= level);
    Ok(InvarianceReport { rows, level, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse_function;
    use crate::measure::BaseMeasure;
    use crate::quadrature::gauss_hermite;
    use crate::stats::Welford;

    fn fixture(modes: usize) -> (Spectrum, EigenBasis) {
        let base = BaseMeasure::uniform01(32).unwrap();
        (Spectrum::power(1.0, 2.0, modes).unwrap(), EigenBasis::cosine(&base, modes).unwrap())
    }

    #[test]
    fn single_time_zero_keeps_init() {
        let (s, b) = fixture(3);
        let p = simulate_path(&s, &b, &[0.0], &Init::Coeffs(vec![0.1, -0.2, 0.3]), 1).unwrap();
        assert_eq!(p.states(), &[vec![0.1, -0.2, 0.3]]);
    }

    #[test]
    fn rejects_bad_grids() {
        let (s, b) = fixture(2);
        for g in [vec![], vec![-0.1, 1.0], vec![0.0, 1.0, 1.0], vec![0.5, 0.2]] {
            assert!(simulate_path(&s, &b, &g, &Init::Stationary, 0).is_err(), "{g:?}");
        }
    }

    #[test]
    fn same_seed_same_path() {
        let (s, b) = fixture(4);
        let g = [0.0, 0.1, 0.5, 2.0];
        let p = simulate_path(&s, &b, &g, &Init::Stationary, 9).unwrap();
        assert_eq!(p, simulate_path(&s, &b, &g, &Init::Stationary, 9).unwrap());
        assert_ne!(p, simulate_path(&s, &b, &g, &Init::Stationary, 10).unwrap());
    }

    #[test]
    fn stationary_marginal_variance() {
        let (s, b) = fixture(3);
        let g = [0.0, 0.3, 1.0];
        let mut acc = vec![[Welford::default(); 3]; 3];
        for j in 0..10_000 {
            let p = simulate_path_indexed(&s, &b, &g, &Init::Stationary, 5, j).unwrap();
            for (k, c) in p.states().iter().enumerate() {
                for n in 0..3 {
                    acc[k][n].push(c[n] * c[n]);
                }
            }
        }
        for row in &acc {
            for (n, w) in row.iter().enumerate() {
                let target = 1.0 / s.alphas()[n];
                assert!((w.mean() - target).abs() <= 4.0 * w.std_error(), "mode {} {} vs {target}", n + 1, w.mean());
            }
        }
    }

    #[test]
    fn grid_refinement_keeps_marginal_law() {
        let (s, b) = fixture(2);
        let init = Init::Coeffs(vec![1.5, -0.5]);
        let (coarse, fine): (Vec<f64>, Vec<f64>) = (0..4000)
            .map(|j| {
                let c = simulate_path_indexed(&s, &b, &[1.0], &init, 3, j).unwrap();
                let f = simulate_path_indexed(&s, &b, &[0.1, 0.35, 0.6, 1.0], &init, 4, j).unwrap();
                (c.states()[0][0], f.states()[3][0])
            })
            .unzip();
        assert!(ks_two_sample(&coarse, &fine).p_value > 0.01);
    }

    #[test]
    fn path_csv_long_format() {
        let (s, b) = fixture(2);
        let p = simulate_path(&s, &b, &[0.0, 1.0], &Init::Coeffs(vec![0.5, 0.25]), 0).unwrap();
        let csv = p.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,mode,coeff");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with(",1,5.0000000000000000e-1"));
        assert_eq!(p.pushed(&b, 0).unwrap(), pushforward(b.base().measure(), &b.anchored(&[0.5, 0.25]).unwrap()).unwrap());
    }

    #[test]
    fn invariant_without_modes_is_base() {
        let base = BaseMeasure::uniform01(8).unwrap();
        let b = EigenBasis::cosine(&base, 0).unwrap();
        let s = Spectrum::explicit(vec![]).unwrap();
        for m in sample_invariant(&s, &b, 5, 1).unwrap() {
            assert_eq!(&m, base.measure());
        }
    }

    #[test]
    fn invariant_mean_is_anchored_mean() {
        let (s, b) = fixture(5);
        let mean = parse_function("mean").unwrap();
        let mut w = Welford::default();
        for m in sample_invariant(&s, &b, 20_000, 2).unwrap() {
            w.push(mean.eval(&m));
        }
        assert!((w.mean() - 0.5).abs() <= 4.0 * w.std_error());
    }

    #[test]
    fn invariant_law_is_seed_free() {
        let (s, b) = fixture(5);
        let f = parse_function("tanh_mean").unwrap();
        let a: Vec<f64> = sample_invariant(&s, &b, 3000, 1).unwrap().iter().map(|m| f.eval(m)).collect();
        let c: Vec<f64> = sample_invariant(&s, &b, 3000, 2).unwrap().iter().map(|m| f.eval(m)).collect();
        assert!(ks_two_sample(&a, &c).p_value > 0.01);
    }

    #[test]
    fn eigen_decay_examples() {
        let s = Spectrum::power(1.0, 2.0, 2).unwrap();
        let r = semigroup_eigen_check(&s, 0, 1, 0.7, 1.3, 100, 0).unwrap();
        assert_eq!((r.lhs.value, r.rhs, r.lhs.std_error), (1.0, 1.0, 0.0));
        let r = semigroup_eigen_check(&s, 1, 1, 2f64.ln(), 2.0, 20_000, 0).unwrap();
        assert!((r.rhs - 0.5 * hermite_eigenfunction(1, 1.0, 2.0)).abs() < 1e-15);
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn residual_examples() {
        let s = Spectrum::power(1.0, 2.0, 2).unwrap();
        let r = generator_residual(&s, 0, 1, 0.4, None, 500, 0).unwrap();
        assert_eq!((r.value, r.std_error), (0.0, 0.0));
        let r = generator_residual(&s, 3, 2, 0.0, Some(0.7), 500, 0).unwrap();
        assert_eq!(r.value, 0.0);
        let r = generator_residual(&s, 2, 1, 0.3, None, 20_000, 4).unwrap();
        assert!(r.within(0.0, 4.0), "{r:?}");
    }

    #[test]
    fn ibp_linear_case_is_one() {
        let (s, b) = fixture(3);
        let one: TangentFunctional = CylindricalFunction::constant(1.0).into();
        for n in 1..=3 {
            let r = ibp_check(&TangentFunctional::Coefficient(n), &one, n, GaussianSetup { spectrum: &s, basis: &b, n_samples: 20_000, seed: 8 }).unwrap();
            assert!((r.lhs.value - 1.0).abs() < 1e-12);
            assert!(r.rhs.within(1.0, 4.0) && r.holds, "{r:?}");
        }
    }

    #[test]
    fn ibp_constant_u_vanishes() {
        let (s, b) = fixture(3);
        let u: TangentFunctional = CylindricalFunction::constant(2.0).into();
        let v: TangentFunctional = parse_function("tanh_mean").unwrap().into();
        let r = ibp_check(&u, &v, 2, GaussianSetup { spectrum: &s, basis: &b, n_samples: 5000, seed: 1 }).unwrap();
        assert_eq!(r.lhs.value, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn ibp_tanh_matches_quadrature() {
        // tanh(μ(x)) = tanh(1/2 + c₁): a one-dimensional Gaussian integral.
        let (s, b) = fixture(3);
        let f: TangentFunctional = parse_function("tanh_mean").unwrap().into();
        let r = ibp_check(&f, &f, 1, GaussianSetup { spectrum: &s, basis: &b, n_samples: 50_000, seed: 2 }).unwrap();
        let (x, w) = gauss_hermite(40);
        let oracle: f64 = x.iter().zip(&w).map(|(z, w)| {
            let t = (0.5 + z).tanh();
            w * (1.0 - t * t) * t
        }).sum();
        assert!(r.holds);
        assert!(r.lhs.within(oracle, 4.0) && r.rhs.within(oracle, 4.0), "{r:?} vs {oracle}");
    }

    #[test]
    fn hermite_coordinate_ibp() {
        let (s, b) = fixture(3);
        let u = TangentFunctional::hermite(&s, 2, 2).unwrap();
        let v = TangentFunctional::Coefficient(2);
        let r = ibp_check(&u, &v, 2, GaussianSetup { spectrum: &s, basis: &b, n_samples: 20_000, seed: 3 }).unwrap();
        // E[H̄₂'(c) c] = √(2α)·E[H̄₁(c) c] = √2.
        assert!(r.holds && r.lhs.within(2f64.sqrt(), 4.0), "{r:?}");
    }

    #[test]
    fn invariance_under_doubling() {
        let (s, b) = fixture(4);
        let phi_star = VectorField::from_fn(b.base().measure(), |x, out| out[0] = 2.0 * x[0]);
        let base_b = pushforward(b.base().measure(), &phi_star).unwrap();
        let fs: Vec<CylindricalFunction> = ["mean", "second_moment", "tanh_mean"].iter().map(|n| parse_function(n).unwrap()).collect();
        let r = reference_invariance_check(&b, &phi_star, &base_b, &s, &fs, 2000, 6).unwrap();
        assert!(r.holds, "{r:?}");
        let id = VectorField::identity(b.base().measure());
        assert!(reference_invariance_check(&b, &id, b.base().measure(), &s, &fs, 500, 6).unwrap().holds);
        assert!(reference_invariance_check(&b, &phi_star, b.base().measure(), &s, &fs, 10, 6).is_err());
        let collide = VectorField::from_fn(b.base().measure(), |x, out| out[0] = (x[0] - 0.5).abs());
        let img = pushforward(b.base().measure(), &collide).unwrap();
        assert!(reference_invariance_check(&b, &collide, &img, &s, &fs, 10, 6).is_err());
    }

    #[test]
    fn stationary_snapshots_share_a_law() {
        let (s, b) = fixture(4);
        let f = parse_function("second_moment").unwrap();
        let (start, end): (Vec<f64>, Vec<f64>) = (0..3000)
            .map(|j| {
                let p = simulate_path_indexed(&s, &b, &[0.0, 3.0], &Init::Stationary, 12, j).unwrap();
                (f.eval(&p.pushed(&b, 0).unwrap()), f.eval(&p.pushed(&b, 1).unwrap()))
            })
            .unzip();
        assert!(ks_two_sample(&start, &end).p_value > 0.01);
    }
}
