//! `W_p` distances between finitely supported measures.
//!
//! * [`w1d`]: exact on the line through the quantile coupling.
//! * [`w_exact`]: exact in any dimension through a transportation simplex.
//! * [`w_sinkhorn`]: entropic approximation in the log domain.

mod quantile;
mod simplex;
mod sinkhorn;

pub use quantile::w1d;
pub use simplex::{w_exact, w_exact_with_cap, DEFAULT_EXACT_CAP};
pub use sinkhorn::{w_sinkhorn, SinkhornResult};

use crate::error::{invalid, Result};
use crate::measure::{euclid, DiscreteMeasure};

/// A transport plan: `(source atom, target atom, mass)` triples.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub pairs: Vec<(usize, usize, f64)>,
    /// `Σ mass·‖xᵢ - yⱼ‖^p`.
    pub cost: f64,
}

impl Coupling {
    /// Largest deviation of the plan's marginals from the given weights.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut rows = vec![0.0; mu.len()];
        let mut cols = vec![0.0; nu.len()];
        for &(i, j, m) in &self.pairs {
            rows[i] += m;
            cols[j] += m;
        }
        let r = rows.iter().zip(mu.weights()).map(|(a, b)| (a - b).abs());
        let c = cols.iter().zip(nu.weights()).map(|(a, b)| (a - b).abs());
        r.chain(c).fold(0.0, f64::max)
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("Wasserstein order must lie in [1, ∞), got {p}"));
    }
    Ok(())
}

pub(crate) fn ground_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    let d = euclid(a, b);
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

pub(crate) fn root(cost: f64, p: f64) -> f64 {
    let c = cost.max(0.0);
    if p == 1.0 {
        c
    } else if p == 2.0 {
        c.sqrt()
    } else {
        c.powf(1.0 / p)
    }
}
