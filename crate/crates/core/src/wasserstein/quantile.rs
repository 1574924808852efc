use super::{check_p, ground_cost, root, Coupling};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Exact `W_p` on the line: `(∫₀¹ |F_μ⁻¹(q) - F_ν⁻¹(q)|^p dq)^{1/p}`.
///
/// Both measures are sorted (stable, so tied atoms keep their input order)
/// and their cumulative masses are merged; each merge step transports the
/// overlap of the current quantile cells.
pub fn w1d(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<(f64, Coupling)> {
    check_p(p)?;
    for m in [mu, nu] {
        if m.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: m.dim() });
        }
    }
    let order = |m: &DiscreteMeasure| {
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&a, &b| m.points()[a].total_cmp(&m.points()[b]));
        idx
    };
    let (si, sj) = (order(mu), order(nu));
    let (x, y) = (mu.points(), nu.points());
    let (wa, wb) = (mu.weights(), nu.weights());

    let mut pairs = Vec::with_capacity(mu.len() + nu.len());
    let mut cost = 0.0;
    let (mut a, mut b) = (0usize, 0usize);
    let mut ra = wa[si[0]];
    let mut rb = wb[sj[0]];
    loop {
        let (i, j) = (si[a], sj[b]);
        let mass = ra.min(rb);
        if mass > 0.0 {
            pairs.push((i, j, mass));
            cost += mass * ground_cost(&x[i..=i], &y[j..=j], p);
        }
        // advance whichever cell is exhausted; on an exact tie both advance
        let a_done = ra <= rb;
        let b_done = rb <= ra;
        ra -= mass;
        rb -= mass;
        if a_done {
            a += 1;
            if a == si.len() {
                break;
            }
            ra = wa[si[a]];
        }
        if b_done {
            b += 1;
            if b == sj.len() {
                break;
            }
            rb = wb[sj[b]];
        }
    }
    // floating leftovers: weights sum to 1 only up to rounding
    if a < si.len() && b == sj.len() && ra > 0.0 {
        let j = sj[sj.len() - 1];
        for (k, &i) in si[a..].iter().enumerate() {
            let m = if k == 0 { ra } else { wa[i] };
            pairs.push((i, j, m));
            cost += m * ground_cost(&x[i..=i], &y[j..=j], p);
        }
    } else if b < sj.len() && a == si.len() && rb > 0.0 {
        let i = si[si.len() - 1];
        for (k, &j) in sj[b..].iter().enumerate() {
            let m = if k == 0 { rb } else { wb[j] };
            pairs.push((i, j, m));
            cost += m * ground_cost(&x[i..=i], &y[j..=j], p);
        }
    }
    Ok((root(cost, p), Coupling { pairs, cost }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(1, points.to_vec(), weights.to_vec()).unwrap()
    }

    #[test]
    fn diracs() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let (d, c) = w1d(&m(&[0.3], &[1.0]), &m(&[-1.2], &[1.0]), p).unwrap();
            assert!((d - 1.5).abs() < 1e-12, "p={p}: {d}");
            assert_eq!(c.pairs.len(), 1);
        }
    }

    #[test]
    fn two_point_example() {
        let (d, c) = w1d(&m(&[0.0, 1.0], &[0.5, 0.5]), &m(&[0.0, 2.0], &[0.5, 0.5]), 1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert_eq!(c.pairs, vec![(0, 0, 0.5), (1, 1, 0.5)]);
    }

    #[test]
    fn self_distance_zero() {
        let mu = m(&[0.4, -2.0, 3.0, 0.4], &[0.1, 0.2, 0.3, 0.4]);
        let (d, c) = w1d(&mu, &mu, 2.0).unwrap();
        assert_eq!(d, 0.0);
        assert!(c.marginal_error(&mu, &mu) < 1e-15);
    }

    #[test]
    fn unequal_weights_marginals() {
        let mu = m(&[0.0, 1.0, 5.0], &[0.2, 0.3, 0.5]);
        let nu = m(&[2.0, -1.0], &[0.6, 0.4]);
        let (_, c) = w1d(&mu, &nu, 1.0).unwrap();
        assert!(c.marginal_error(&mu, &nu) < 1e-12);
        // quantile pairing: 0.4 of {0, 1} → -1 ... computed by hand
        // q∈[0,0.2): 0→-1 ; [0.2,0.4): 1→-1 ; [0.4,0.5): 1→2 ; [0.5,1): 5→2
        let expect = 0.2 * 1.0 + 0.2 * 2.0 + 0.1 * 1.0 + 0.5 * 3.0;
        assert!((c.cost - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_multidimensional() {
        let a = DiscreteMeasure::new(2, vec![0.0, 0.0], vec![1.0]).unwrap();
        assert!(w1d(&a, &a, 1.0).is_err());
        assert!(w1d(&m(&[0.0], &[1.0]), &m(&[0.0], &[1.0]), 0.5).is_err());
    }
}
