use super::{check_p, ground_cost, root};
use crate::error::{invalid, Error, Result};
use crate::measure::DiscreteMeasure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornResult {
    /// `(⟨P, C⟩)^{1/p}` for the final entropic plan `P`.
    pub distance: f64,
    /// `max |P·1 - a|` after the final column update (columns are exact).
    pub marginal_violation: f64,
    pub converged: bool,
    pub iterations: usize,
    pub epsilon: f64,
}

const VIOLATION_TOL: f64 = 1e-9;
/// Looser tolerance for the intermediate stages of the ε schedule.
const STAGE_TOL: f64 = 1e-6;

/// Log-domain Sinkhorn with ε-scaling.
///
/// Starts at `ε₀ = diam^p` and halves down to the target `epsilon`, warm
/// starting the dual potentials at each stage. `max_iter` bounds the total
/// number of half-iteration pairs across all stages; running out is reported
/// through `converged = false`, never silently.
pub fn w_sinkhorn(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64, epsilon: f64, max_iter: usize) -> Result<SinkhornResult> {
    check_p(p)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return invalid(format!("entropic regularization must be positive, got {epsilon}"));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), got: nu.dim() });
    }
    let (m, n) = (mu.len(), nu.len());
    let cost: Vec<f64> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| ground_cost(mu.atom(i), nu.atom(j), p))
        .collect();
    let log_a: Vec<f64> = mu.weights().iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = nu.weights().iter().map(|w| w.ln()).collect();

    let diam_p = cost.iter().fold(0.0f64, |a, &c| a.max(c));
    let mut eps = if diam_p > epsilon { diam_p } else { epsilon };
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let mut iterations = 0usize;
    let mut violation;
    let mut scratch = vec![0.0; m.max(n)];

    loop {
        let last = eps <= epsilon;
        let tol = if last { VIOLATION_TOL } else { STAGE_TOL };
        violation = f64::INFINITY;
        while iterations < max_iter {
            iterations += 1;
            // f_i = -ε log Σ_j b_j exp((g_j - C_ij)/ε)
            for i in 0..m {
                for j in 0..n {
                    scratch[j] = log_b[j] + (g[j] - cost[i * n + j]) / eps;
                }
                f[i] = -eps * log_sum_exp(&scratch[..n]);
            }
            for j in 0..n {
                for i in 0..m {
                    scratch[i] = log_a[i] + (f[i] - cost[i * n + j]) / eps;
                }
                g[j] = -eps * log_sum_exp(&scratch[..m]);
            }
            if iterations % 5 == 0 || iterations == max_iter {
                violation = row_violation(&f, &g, &cost, &log_a, &log_b, eps, &mut scratch);
                if violation <= tol {
                    break;
                }
            }
        }
        if violation == f64::INFINITY {
            violation = row_violation(&f, &g, &cost, &log_a, &log_b, eps, &mut scratch);
        }
        if last || iterations >= max_iter {
            break;
        }
        eps = (eps * 0.5).max(epsilon);
    }

    let converged = eps <= epsilon && violation <= VIOLATION_TOL;
    let mut transported = 0.0;
    for i in 0..m {
        for j in 0..n {
            let c = cost[i * n + j];
            transported += (log_a[i] + log_b[j] + (f[i] + g[j] - c) / eps).exp() * c;
        }
    }
    Ok(SinkhornResult { distance: root(transported, p), marginal_violation: violation, converged, iterations, epsilon: eps })
}

fn row_violation(f: &[f64], g: &[f64], cost: &[f64], log_a: &[f64], log_b: &[f64], eps: f64, scratch: &mut [f64]) -> f64 {
    let n = g.len();
    let mut worst = 0.0f64;
    for i in 0..f.len() {
        for j in 0..n {
            scratch[j] = log_a[i] + log_b[j] + (f[i] + g[j] - cost[i * n + j]) / eps;
        }
        let row = log_sum_exp(&scratch[..n]).exp();
        worst = worst.max((row - log_a[i].exp()).abs());
    }
    worst
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wasserstein::w1d;

    #[test]
    fn identical_measures_vanish() {
        let mu = DiscreteMeasure::uniform_1d(vec![0.0, 0.3, 0.5, 1.0]).unwrap();
        let r = w_sinkhorn(&mu, &mu, 2.0, 1e-3, 100_000).unwrap();
        assert!(r.converged);
        assert!(r.distance <= 1e-3, "{}", r.distance);
    }

    #[test]
    fn close_to_exact_on_line() {
        let mu = DiscreteMeasure::uniform_1d(vec![0.1, 0.4, 0.45, 0.9, 0.2]).unwrap();
        let nu = DiscreteMeasure::new(1, vec![0.0, 0.6, 1.0], vec![0.3, 0.3, 0.4]).unwrap();
        let (exact, _) = w1d(&mu, &nu, 1.0).unwrap();
        let r = w_sinkhorn(&mu, &nu, 1.0, 1e-4, 200_000).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.marginal_violation <= 1e-9);
        assert!((r.distance - exact).abs() <= 1e-2, "{} vs {exact}", r.distance);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let mu = DiscreteMeasure::uniform_1d(vec![0.0, 1.0, 2.0]).unwrap();
        let nu = DiscreteMeasure::uniform_1d(vec![0.5, 1.7, 3.0]).unwrap();
        let r = w_sinkhorn(&mu, &nu, 1.0, 1e-6, 3).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let mu = DiscreteMeasure::uniform_1d(vec![0.0]).unwrap();
        assert!(w_sinkhorn(&mu, &mu, 1.0, 0.0, 10).is_err());
    }
}
