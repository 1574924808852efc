//! Reference functions for the tightness construction: the cutoff `χ_l`,
//! the moment weights `γ_k` and `u_k(μ) = χ₁(μ(γ_k(‖·‖)))`.

use super::primitives::{Inner, Outer};
use super::CylindricalFunction;
use crate::measure::DiscreteMeasure;

/// `χ_l(s) = -3l/2 + ∫_{-∞}^s [((t/l + 2)⁺ ∧ 1) ∧ ((2 - t/l)⁺ ∧ 1)] dt`.
///
/// The integrand is a trapezoid: zero outside `[-2l, 2l]`, one on `[-l, l]`
/// and linear in between, so `χ_l` is the identity on `[-l, l]` and
/// saturates at `±3l/2`.
pub fn chi(l: f64, s: f64) -> f64 {
    debug_assert!(l > 0.0);
    if s <= -2.0 * l {
        -1.5 * l
    } else if s <= -l {
        -1.5 * l + (s + 2.0 * l) * (s + 2.0 * l) / (2.0 * l)
    } else if s <= l {
        s
    } else if s <= 2.0 * l {
        let r = s - l;
        l + r - r * r / (2.0 * l)
    } else {
        1.5 * l
    }
}

pub fn chi_deriv(l: f64, s: f64) -> f64 {
    ((s / l + 2.0).max(0.0).min(1.0)).min((2.0 - s / l).max(0.0).min(1.0))
}

/// `γ_k(s) = (1 + ((s - k)⁺)²)^{p/2} - 1`.
pub fn gamma_k(p: f64, k: f64, s: f64) -> f64 {
    let r = (s - k).max(0.0);
    if r == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        r * r
    } else {
        (1.0 + r * r).powf(0.5 * p) - 1.0
    }
}

pub fn gamma_k_deriv(p: f64, k: f64, s: f64) -> f64 {
    let r = (s - k).max(0.0);
    if r == 0.0 {
        return 0.0;
    }
    p * r * (1.0 + r * r).powf(0.5 * p - 1.0)
}

/// Radius past which `γ_k(s) ≥ 2^{-p}·s^p` for every `p ≥ 1`.
///
/// With `r = s - k ≥ s/2 + 1`: `γ_k(s) ≥ r^p - 1 ≥ (s/2)^p`, using
/// `(a + 1)^p ≥ a^p + 1` for `a ≥ 0`, `p ≥ 1`.
pub fn gamma_tail_radius(k: f64) -> f64 {
    2.0 * k + 2.0
}

/// `u_k` as a cylindrical function, so its intrinsic derivative is available.
pub fn u_k_function(p: f64, k: f64) -> CylindricalFunction {
    CylindricalFunction::new(Outer::Chi(1.0), vec![Inner::GammaNorm { p, k }]).expect("unary composition")
}

/// `u_k(μ) = χ₁(μ(γ_k(‖·‖)))`.
pub fn u_k_ref(p: f64, k: f64, mu: &DiscreteMeasure) -> f64 {
    chi(1.0, mu.integrate(|x| gamma_k(p, k, x.iter().map(|v| v * v).sum::<f64>().sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid-rule integral of the slope as an independent oracle.
    fn chi_by_quadrature(l: f64, s: f64) -> f64 {
        let lo = -2.0 * l;
        if s <= lo {
            return -1.5 * l;
        }
        let n = 200_000;
        let h = (s - lo) / n as f64;
        let mut acc = 0.5 * (chi_deriv(l, lo) + chi_deriv(l, s));
        for i in 1..n {
            acc += chi_deriv(l, lo + i as f64 * h);
        }
        -1.5 * l + acc * h
    }

    #[test]
    fn chi_identity_window() {
        for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            assert_eq!(chi(1.0, s), s);
        }
    }

    #[test]
    fn chi_saturation() {
        assert_eq!(chi(1.0, 3.0), 1.5);
        assert_eq!(chi(1.0, -3.0), -1.5);
    }

    #[test]
    fn chi_matches_slope_integral() {
        for l in [1.0, 2.0, 3.0] {
            for i in 0..41 {
                let s = -3.0 * l + i as f64 * 0.15 * l;
                assert!((chi(l, s) - chi_by_quadrature(l, s)).abs() < 1e-8, "l={l} s={s}");
            }
        }
    }

    #[test]
    fn gamma_values() {
        for s in [-1.0, 0.0, 0.5, 1.0] {
            assert_eq!(gamma_k(2.0, 1.0, s), 0.0);
        }
        assert_eq!(gamma_k(2.0, 1.0, 3.0), 4.0);
        assert!((gamma_k(1.0, 1.0, 3.0) - (5f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn gamma_tail_domination() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            for k in 1..=6 {
                let k = k as f64;
                let r = gamma_tail_radius(k);
                for i in 0..2000 {
                    let s = r + i as f64 * 0.05;
                    assert!(gamma_k(p, k, s) >= 0.5f64.powf(p) * s.powf(p), "p={p} k={k} s={s}");
                }
            }
        }
    }

    #[test]
    fn u_k_vanishes_past_support() {
        let mu = DiscreteMeasure::new(1, vec![-2.5, 0.3, 1.7], vec![0.2, 0.5, 0.3]).unwrap();
        assert!(u_k_ref(2.0, 1.0, &mu) > 0.0);
        assert_eq!(u_k_ref(2.0, 3.0, &mu), 0.0);
        assert_eq!(u_k_function(2.0, 1.0).eval(&mu), u_k_ref(2.0, 1.0, &mu));
    }
}
