//! Eigenvalue sequences of the covariance operator, exact per-mode
//! Ornstein–Uhlenbeck transitions, normalized Hermite eigenfunctions and the
//! heat-kernel trace bounds.
//!
//! Mode `n` of the Gaussian measure is `N(0, 1/αₙ)` and evolves under
//! `dX = -αₙ X dt + √2 dW`, whose generator `h'' - αₙ x h'` has eigenvalues
//! `-kαₙ` with Hermite eigenfunctions.

use crate::error::{invalid, Error, Result};
use crate::stats::compensated_sum;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumFamily {
    /// `αₙ = a·n^s`, `a > 0`, `s > 1`.
    Power { a: f64, s: f64 },
    /// Explicit eigenvalues, sorted on construction.
    Explicit(Vec<f64>),
}

/// Truncated eigenvalue sequence `α₁ ≤ … ≤ α_M` together with a certified
/// bound on the neglected reciprocal tail `Σ_{n>M} 1/αₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    family: SpectrumFamily,
    alphas: Vec<f64>,
    tail_sum_bound: f64,
}

impl Spectrum {
    pub fn new(family: SpectrumFamily, m: usize) -> Result<Self> {
        match family {
            SpectrumFamily::Power { a, s } => Self::power(a, s, m),
            SpectrumFamily::Explicit(v) => Self::explicit(v),
        }
    }

    pub fn power(a: f64, s: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return invalid("power-law spectrum needs M >= 1");
        }
        if !(a > 0.0 && a.is_finite()) {
            return invalid(format!("power-law base must be positive, got {a}"));
        }
        if !(s > 1.0 && s.is_finite()) {
            return invalid(format!("power-law exponent must exceed 1 for summable reciprocals, got {s}"));
        }
        let alphas = (1..=m).map(|n| a * (n as f64).powf(s)).collect();
        // Σ_{n>M} 1/(a n^s) ≤ ∫_M^∞ t^{-s}/a dt
        let tail = (m as f64).powf(1.0 - s) / (a * (s - 1.0));
        Ok(Self { family: SpectrumFamily::Power { a, s }, alphas, tail_sum_bound: tail })
    }

    /// An explicit list; the empty list is the zero-mode spectrum.
    pub fn explicit(mut alphas: Vec<f64>) -> Result<Self> {
        if let Some(bad) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return invalid(format!("eigenvalues must be positive and finite, got {bad}"));
        }
        alphas.sort_by(f64::total_cmp);
        Ok(Self { family: SpectrumFamily::Explicit(alphas.clone()), alphas, tail_sum_bound: 0.0 })
    }

    pub fn family(&self) -> &SpectrumFamily {
        &self.family
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Eigenvalue of 1-based mode `n`.
    pub fn alpha(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.alphas.len() {
            return invalid(format!("mode {n} outside 1..={}", self.alphas.len()));
        }
        Ok(self.alphas[n - 1])
    }

    pub fn tail_sum_bound(&self) -> f64 {
        self.tail_sum_bound
    }

    /// First neglected eigenvalue, if the family continues past `M`.
    pub fn next_alpha(&self) -> Option<f64> {
        match self.family {
            SpectrumFamily::Power { a, s } => Some(a * ((self.alphas.len() + 1) as f64).powf(s)),
            SpectrumFamily::Explicit(_) => None,
        }
    }
}

/// One exact step of `dX = -αX dt + √2 dW` driven by the standard normal
/// draw `z`.
pub fn ou_transition(alpha: f64, t: f64, x0: f64, z: f64) -> Result<f64> {
    let (mean_factor, sd) = ou_kernel(alpha, t)?;
    Ok(mean_factor * x0 + sd * z)
}

/// `(e^{-αt}, sqrt((1 - e^{-2αt})/α))`.
pub fn ou_kernel(alpha: f64, t: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return invalid(format!("rate must be positive, got {alpha}"));
    }
    if !(t >= 0.0) {
        return invalid(format!("transition time must be nonnegative, got {t}"));
    }
    let decay = (-alpha * t).exp();
    // 1 - e^{-2αt} without cancellation for small αt
    let var = -(-2.0 * alpha * t).exp_m1() / alpha;
    Ok((decay, var.sqrt()))
}

/// Normalized probabilists' Hermite polynomials `h₀..h_k` at `y`, orthonormal
/// under the standard normal law.
pub fn hermite_table(k: usize, y: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(k + 1);
    h.push(1.0);
    if k >= 1 {
        h.push(y);
    }
    for j in 1..k {
        let jf = j as f64;
        let next = (y * h[j] - jf.sqrt() * h[j - 1]) / (jf + 1.0).sqrt();
        h.push(next);
    }
    h
}

/// `H̄_k(x) = He_k(√α·x)/√(k!)`, the `L²(N(0,1/α))`-orthonormal eigenfunction
/// of `-(h'' - αxh')` with eigenvalue `kα` and positive leading coefficient.
pub fn hermite_eigenfunction(k: usize, alpha: f64, x: f64) -> f64 {
    debug_assert!(alpha > 0.0);
    hermite_table(k, alpha.sqrt() * x)[k]
}

/// `d/dx H̄_k(x) = √(kα)·H̄_{k-1}(x)`.
pub fn hermite_eigenfunction_deriv(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    (k as f64 * alpha).sqrt() * hermite_eigenfunction(k - 1, alpha, x)
}

fn check_positive_time(alpha: f64, t: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return invalid(format!("rate must be positive, got {alpha}"));
    }
    if !(t > 0.0) {
        return invalid(format!("trace bound needs t > 0, got {t}"));
    }
    Ok(())
}

/// `Σ_k e^{-2kαt} = 1/(1 - e^{-2αt})`.
pub fn mode_trace_exact(alpha: f64, t: f64) -> Result<f64> {
    check_positive_time(alpha, t)?;
    Ok(-1.0 / (-2.0 * alpha * t).exp_m1())
}

/// `1 + 2e^{-2αt}/((2αt) ∧ 1)`.
pub fn mode_trace_bound(alpha: f64, t: f64) -> Result<f64> {
    check_positive_time(alpha, t)?;
    Ok(1.0 + mode_bound_excess(alpha, t))
}

fn mode_bound_excess(alpha: f64, t: f64) -> f64 {
    let x = 2.0 * alpha * t;
    2.0 * (-x).exp() / x.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelBound {
    /// `Σ_{n≤M} log(1 + 2e^{-2αₙt}/((2αₙt)∧1))`.
    pub log_head: f64,
    /// Upper bound on the log of the neglected factors.
    pub log_tail_bound: f64,
    /// `Σ_{n≤M} log(1/(1 - e^{-2αₙt}))`, the exact truncated trace.
    pub log_exact: f64,
}

impl HeatKernelBound {
    pub fn log_bound(&self) -> f64 {
        self.log_head + self.log_tail_bound
    }

    pub fn bound(&self) -> f64 {
        self.log_bound().exp()
    }

    pub fn exact(&self) -> f64 {
        self.log_exact.exp()
    }
}

/// Product bound `∏ₙ (1 + 2e^{-2αₙt}/((2αₙt)∧1))` in log space.
///
/// The tail past `M` is bounded through `log(1+x) ≤ x`, `e^{-2αₙt} ≤
/// e^{-2α_{M+1}t}` and `2/(2αₙt) = 1/(αₙt)`, which needs `2α_{M+1}t ≥ 1`.
pub fn heat_kernel_sq_bound(spectrum: &Spectrum, t: f64) -> Result<HeatKernelBound> {
    if !(t > 0.0) {
        return invalid(format!("trace bound needs t > 0, got {t}"));
    }
    let log_head = compensated_sum(spectrum.alphas().iter().map(|&a| mode_bound_excess(a, t).ln_1p()));
    let log_exact = compensated_sum(spectrum.alphas().iter().map(|&a| -(-(-2.0 * a * t).exp_m1()).ln()));
    let log_tail_bound = match spectrum.next_alpha() {
        None => 0.0,
        Some(next) => {
            if 2.0 * next * t < 1.0 {
                return Err(Error::TailRegime { alpha: next, t });
            }
            (-2.0 * next * t).exp() * spectrum.tail_sum_bound() / t
        }
    };
    Ok(HeatKernelBound { log_head, log_tail_bound, log_exact })
}
