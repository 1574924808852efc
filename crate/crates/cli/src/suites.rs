//! Verification suites. Each returns one report row per checked quantity.

use wgauss::calculus::{chain_rule_residual, default_step, directional_derivative, directional_derivative_fd, CylindricalFunction};
use wgauss::dirichlet::{
    c1_energy_check, contraction_check, galerkin_eig_compare, CoefficientField, GaussianSetup, TangentFunctional, MASS_CONDITION_CAP,
};
use wgauss::measure::{draw_pushed, pushforward, tangent_norm, EigenBasis, VectorField};
use wgauss::ou::{generator_residual, ibp_check, reference_invariance_check, semigroup_eigen_check};
use wgauss::quadrature::gauss_hermite;
use wgauss::rng::{derive_seed, std_normal, stream, StreamRng};
use wgauss::spectral::{hermite_eigenfunction, Spectrum};
use wgauss::wasserstein::{w1d, w_exact, DEFAULT_EXACT_CAP};

use crate::config::Settings;
use crate::report::{Report, Row};
use crate::{CliError, Suite};

/// Width of the smooth clamp used by the contraction rows.
const CLAMP_WIDTH: f64 = 0.5;
/// Hermite Gram matrices are checked for degrees up to this.
const HERMITE_MAX_DEGREE: usize = 6;
const HERMITE_MODES: usize = 4;
const HERMITE_GRAM_TOL: f64 = 1e-10;

pub fn run_suite(s: &Settings, suite: Suite) -> Result<Report, CliError> {
    let mut report = Report::default();
    let each: &[Suite] = if suite == Suite::All { &Suite::EACH } else { std::slice::from_ref(&suite) };
    for &one in each {
        report.extend(match one {
            Suite::ChainRule => chain_rule(s)?,
            Suite::Lipschitz => lipschitz(s)?,
            Suite::Ibp => ibp(s)?,
            Suite::Semigroup => semigroup(s)?,
            Suite::Orthonormality => orthonormality(s)?,
            Suite::C1 => c1(s)?,
            Suite::Galerkin => galerkin(s)?,
            Suite::Invariance => invariance(s)?,
            Suite::All => unreachable!("`all` expands to the individual suites"),
        });
    }
    Ok(report)
}

struct Fixture {
    spectrum: Spectrum,
    basis: EigenBasis,
    seed: u64,
    n_samples: usize,
}

impl Fixture {
    fn load(s: &Settings) -> Result<Self, CliError> {
        Ok(Self { spectrum: s.spectrum()?, basis: s.basis()?, seed: s.seed()?, n_samples: s.parse("mc.n_samples")? })
    }

    fn setup(&self, salt: u64) -> GaussianSetup<'_> {
        GaussianSetup { spectrum: &self.spectrum, basis: &self.basis, n_samples: self.n_samples, seed: derive_seed(self.seed, salt) }
    }
}

fn cases(s: &Settings) -> Result<usize, CliError> {
    let n: usize = s.parse("verify.cases")?;
    if n == 0 {
        return Err(CliError::Config("verify.cases must be at least 1".into()));
    }
    Ok(n)
}

fn noise(rng: &mut StreamRng, len: usize, dim: usize) -> VectorField {
    VectorField::new(dim, (0..len * dim).map(|_| std_normal(rng)).collect()).expect("matching length")
}

/// Chain rule along a random direction at Gaussian states, plus the
/// intrinsic derivative against a central difference at the pushed measure.
fn chain_rule(s: &Settings) -> Result<Report, CliError> {
    let fx = Fixture::load(s)?;
    let functions = s.functions("functions")?;
    let tol = s.positive("tol.chain_rule")?;
    let base = fx.basis.base().measure();
    let mut rng = stream(fx.seed, 1);
    let mut report = Report::default();
    for i in 0..cases(s)? {
        let u = &functions[i % functions.len()];
        let (coeffs, mu) = draw_pushed(&fx.spectrum, &fx.basis, &mut rng);
        let phi = fx.basis.anchored(&coeffs)?;
        let xi = noise(&mut rng, base.len(), base.dim());
        let h = default_step(phi.values().iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let c = chain_rule_residual(u, base, &phi, &xi, h)?;
        let rel = c.residual / c.analytic.abs().max(1.0);
        report.push(Row::new(format!("chain_rule[{u},{i}]"), c.finite_difference, c.analytic, rel <= tol, fx.seed).tolerance(tol));

        let dir = noise(&mut rng, mu.len(), mu.dim());
        let analytic = directional_derivative(u, &mu, &dir)?;
        let fd = directional_derivative_fd(u, &mu, &dir, default_step(1.0))?;
        let rel = (fd - analytic).abs() / analytic.abs().max(1.0);
        report.push(Row::new(format!("intrinsic[{u},{i}]"), fd, analytic, rel <= tol, fx.seed).tolerance(tol));
    }
    Ok(report)
}

/// `W_p(Ψφ₁, Ψφ₂) ≤ ‖φ₁ - φ₂‖_{L^p}` for pairs of Gaussian states.
fn lipschitz(s: &Settings) -> Result<Report, CliError> {
    let fx = Fixture::load(s)?;
    let p: f64 = s.parse("solver.p")?;
    let tol = s.positive("tol.lipschitz")?;
    let base = fx.basis.base().measure();
    if base.len() > DEFAULT_EXACT_CAP && base.dim() != 1 {
        return Err(CliError::Config(format!("lipschitz suite needs base.N <= {DEFAULT_EXACT_CAP} in dimension > 1")));
    }
    let mut rng = stream(fx.seed, 2);
    let mut report = Report::default();
    for i in 0..cases(s)? {
        let (c1, mu1) = draw_pushed(&fx.spectrum, &fx.basis, &mut rng);
        let (c2, mu2) = draw_pushed(&fx.spectrum, &fx.basis, &mut rng);
        let w = if base.len() <= DEFAULT_EXACT_CAP { w_exact(&mu1, &mu2, p)?.0 } else { w1d(&mu1, &mu2, p)?.0 };
        let diff = fx.basis.synthesize(&c1)?.sub(&fx.basis.synthesize(&c2)?)?;
        let norm = tangent_norm(base, &diff, p)?;
        report.push(Row::new(format!("lipschitz[{i}]"), w, norm, w <= norm + tol, fx.seed).tolerance(tol));
    }
    Ok(report)
}

fn ibp(s: &Settings) -> Result<Report, CliError> {
    let fx = Fixture::load(s)?;
    let us = s.functions("ibp.u")?;
    let vs = s.functions("ibp.v")?;
    let modes: Vec<usize> = s.parse_list("ibp.modes")?;
    let mut report = Report::default();
    let mut salt = 0;
    let row = |report: &mut Report, name: String, u: &TangentFunctional, v: &TangentFunctional, n: usize, salt: u64| -> Result<(), CliError> {
        let setup = fx.setup(salt);
        let r = ibp_check(u, v, n, setup)?;
        report.push(
            Row::new(name, r.lhs.value, r.rhs.value, r.holds, setup.seed)
                .std_error(r.difference_se)
                .tolerance(4.0 * r.difference_se),
        );
        Ok(())
    };
    for u in &us {
        for v in &vs {
            for &n in &modes {
                salt += 1;
                row(&mut report, format!("ibp[{u},{v},{n}]"), &u.clone().into(), &v.clone().into(), n, 100 + salt)?;
            }
        }
    }
    // Linear case: both sides are exactly ⟨φₙ, φₙ⟩ = 1 up to rounding.
    let one: TangentFunctional = CylindricalFunction::constant(1.0).into();
    for &n in &modes {
        let setup = fx.setup(200 + n as u64);
        let r = ibp_check(&TangentFunctional::Coefficient(n), &one, n, setup)?;
        let near = |v: f64, se: f64| (v - 1.0).abs() <= 4.0 * se + 1e-12;
        let holds = r.holds && near(r.lhs.value, r.lhs.std_error) && near(r.rhs.value, r.rhs.std_error);
        report.push(Row::new(format!("ibp_linear[{n}]"), r.rhs.value, 1.0, holds, setup.seed).std_error(r.rhs.std_error));
    }
    Ok(report)
}

fn semigroup(s: &Settings) -> Result<Report, CliError> {
    let fx = Fixture::load(s)?;
    let k_max: usize = s.parse("semigroup.k_max")?;
    let modes: Vec<usize> = s.parse_list("semigroup.modes")?;
    let times: Vec<f64> = s.parse_list("semigroup.t")?;
    let x0: f64 = s.parse("semigroup.x0")?;
    let mut report = Report::default();
    let mut salt = 300;
    for k in 0..=k_max {
        for &mode in &modes {
            for &t in &times {
                salt += 1;
                let seed = derive_seed(fx.seed, salt);
                let r = semigroup_eigen_check(&fx.spectrum, k, mode, t, x0, fx.n_samples, seed)?;
                report.push(
                    Row::new(format!("eigen_decay[k={k},mode={mode},t={t}]"), r.lhs.value, r.rhs, r.holds, seed)
                        .std_error(r.lhs.std_error)
                        .tolerance(4.0 * r.lhs.std_error),
                );
                let g = generator_residual(&fx.spectrum, k, mode, t, None, fx.n_samples, derive_seed(seed, 1))?;
                report.push(
                    Row::new(format!("stationary_residual[k={k},mode={mode},t={t}]"), g.value, 0.0, g.within(0.0, 4.0), g.seed)
                        .std_error(g.std_error)
                        .tolerance(4.0 * g.std_error),
                );
            }
        }
    }
    Ok(report)
}

/// Basis Gram matrix on the base atoms, and the Hermite coordinate
/// functions in `L²(N(0, 1/α))` by Gauss–Hermite quadrature.
fn orthonormality(s: &Settings) -> Result<Report, CliError> {
    let fx = Fixture::load(s)?;
    let tol = s.orthonormality_tol(&fx.basis)?;
    let mut report = Report::default();
    let err = fx.basis.gram_error();
    report.push(Row::new("basis_gram_error", err, 0.0, err <= tol, fx.seed).tolerance(tol));

    let (nodes, weights) = gauss_hermite(HERMITE_MAX_DEGREE + 2);
    for mode in 1..=fx.spectrum.len().min(HERMITE_MODES) {
        let alpha = fx.spectrum.alpha(mode)?;
        let mut worst = 0.0f64;
        for j in 0..=HERMITE_MAX_DEGREE {
            for k in 0..=HERMITE_MAX_DEGREE {
                let g: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(z, w)| {
                        let x = z / alpha.sqrt();
                        w * hermite_eigenfunction(j, alpha, x) * hermite_eigenfunction(k, alpha, x)
                    })
                    .sum();
                worst = worst.max((g - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        report.push(Row::new(format!("hermite_gram_error[mode={mode}]"), worst, 0.0, worst <= HERMITE_GRAM_TOL, fx.seed).tolerance(HERMITE_GRAM_TOL));
    }
    Ok(report)
}

fn c1(s: &Settings) -> Result<Report, CliError> {
    let fx = Fixture::load(s)?;
    let constant = s.positive("c1.constant")?;
    let mut report = Report::default();
    for (i, u) in s.functions("functions")?.iter().enumerate() {
        let setup = fx.setup(400 + 2 * i as u64);
        let r = c1_energy_check(u, constant, setup)?;
        report.push(
            Row::new(format!("energy_bound[{u}]"), r.energy.value, r.constant * r.bound, r.holds, setup.seed).std_error(r.energy.std_error),
        );
        let setup = fx.setup(401 + 2 * i as u64);
        let c = contraction_check(&u.clone().into(), CLAMP_WIDTH, &CoefficientField::Identity, setup)?;
        report.push(
            Row::new(format!("contraction[{u}]"), c.clamped.value, c.original.value, c.holds, setup.seed)
                .std_error(c.difference_se)
                .tolerance(4.0 * c.difference_se),
        );
    }
    Ok(report)
}

fn galerkin(s: &Settings) -> Result<Report, CliError> {
    let fx = Fixture::load(s)?;
    let sub = s.dictionary("galerkin.sub", &fx.spectrum)?;
    let mut big = sub.clone();
    big.extend(s.dictionary("galerkin.extra", &fx.spectrum)?);
    let setup = fx.setup(500);
    let r = galerkin_eig_compare(&big, &sub, setup)?;
    let mut report = Report::default();
    for n in 0..sub.len() {
        let se = r.lambda_se[n].hypot(r.sigma_se[n]);
        let holds = r.lambda[n] >= r.sigma[n] - 4.0 * se;
        report.push(Row::new(format!("eigenvalue[{}]", n + 1), r.lambda[n], r.sigma[n], holds, setup.seed).std_error(se).tolerance(4.0 * se));
    }
    report.push(Row::new("mass_condition", r.mass_condition, MASS_CONDITION_CAP, r.mass_condition <= MASS_CONDITION_CAP, setup.seed));
    Ok(report)
}

fn invariance(s: &Settings) -> Result<Report, CliError> {
    let fx = Fixture::load(s)?;
    let scale = s.positive("invariance.scale")?;
    let functions = s.functions("invariance.functions")?;
    let level = s.positive("tol.ks_level")? / functions.len().max(1) as f64;
    let mu0 = fx.basis.base().measure();
    let phi_star = VectorField::from_fn(mu0, |x, out| out.iter_mut().zip(x).for_each(|(o, v)| *o = scale * v));
    let base_b = pushforward(mu0, &phi_star)?;
    let seed = derive_seed(fx.seed, 600);
    let r = reference_invariance_check(&fx.basis, &phi_star, &base_b, &fx.spectrum, &functions, s.parse("invariance.draws")?, seed)?;
    Ok(Report {
        rows: r
            .rows
            .iter()
            .map(|(name, ks)| Row::new(format!("ks_p_value[{name}]"), ks.p_value, level, ks.p_value >= level, seed))
            .collect(),
    })
}
