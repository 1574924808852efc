//! Gauss–Hermite quadrature for the standard normal law.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::spectral::hermite_table;

/// Nodes and weights of the `n`-point rule for `E[f(Z)]`, `Z ~ N(0,1)`.
/// Weights sum to one; the rule is exact for polynomials of degree `≤ 2n-1`.
///
/// Nodes come from the Jacobi matrix (Golub–Welsch), are polished by Newton
/// steps on the normalized Hermite polynomial, and weights use the
/// Christoffel form `1/Σ_{k<n} h_k(x)²`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let h = hermite_table(n, *x);
            // h_n' = √n h_{n-1}
            let deriv = (n as f64).sqrt() * h[n - 1];
            if deriv == 0.0 {
                break;
            }
            *x -= h[n] / deriv;
        }
    }
    let weights = nodes
        .iter()
        .map(|&x| 1.0 / hermite_table(n - 1, x).iter().map(|h| h * h).sum::<f64>())
        .collect();
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments() {
        let (x, w) = gauss_hermite(64);
        let moment = |p: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum::<f64>();
        assert!((moment(0) - 1.0).abs() < 1e-13);
        assert!(moment(1).abs() < 1e-13);
        assert!((moment(2) - 1.0).abs() < 1e-13);
        assert!((moment(4) - 3.0).abs() < 1e-12);
        assert!((moment(8) - 105.0).abs() < 1e-9);
    }

    #[test]
    fn small_rules_are_symmetric() {
        let (x, w) = gauss_hermite(3);
        assert!((x[2] - 3f64.sqrt()).abs() < 1e-14);
        assert!(x[1].abs() < 1e-14);
        assert!((w[1] - 2.0 / 3.0).abs() < 1e-14);
        assert!((w[0] - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrand() {
        // E[cos Z] = e^{-1/2}
        let (x, w) = gauss_hermite(40);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        assert!((v - (-0.5f64).exp()).abs() < 1e-13);
    }
}
