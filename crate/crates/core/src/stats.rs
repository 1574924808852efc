//! Monte Carlo estimates, deterministic parallel reduction and the
//! two-sample Kolmogorov–Smirnov test.

use rayon::prelude::*;

use crate::rng::{stream, StreamRng};

/// Samples per reduction chunk. Fixed so the merge tree never depends on
/// the thread pool size.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl MCEstimate {
    pub fn exact(value: f64, n_samples: usize, seed: u64) -> Self {
        Self { value, std_error: 0.0, n_samples, seed }
    }

    /// `|value - target| <= k·SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }

    pub fn csv_row(&self, quantity: &str) -> String {
        format!(
            "{},{:.17e},{:.17e},{},{}",
            quantity, self.value, self.std_error, self.n_samples, self.seed
        )
    }
}

pub const MC_CSV_HEADER: &str = "quantity,value,std_error,n_samples,seed";

/// Running mean/variance (Welford). Identical inputs give exactly zero
/// variance, which the constant-integrand cases rely on.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let nf = n as f64;
        self.mean += delta * other.n as f64 / nf;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / nf;
        self.n = n;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self, seed: u64) -> MCEstimate {
        MCEstimate { value: self.mean, std_error: self.std_error(), n_samples: self.n, seed }
    }
}

/// Runs `n` independent samples, sample `j` drawing from stream `(seed, j)`,
/// and accumulates `K` jointly observed scalars per sample. The closure
/// writes its `K` outputs into the provided slice.
///
/// Reduction is chunked and merged in index order, so the result is
/// bit-identical regardless of thread count.
pub fn sample_moments<const K: usize, F>(n: usize, seed: u64, f: F) -> [Welford; K]
where
    F: Fn(&mut StreamRng, usize, &mut [f64; K]) + Sync,
{
    let chunks: Vec<[Welford; K]> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = [Welford::default(); K];
            let mut out = [0.0; K];
            for j in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut rng = stream(seed, j as u64);
                f(&mut rng, j, &mut out);
                for (a, &x) in acc.iter_mut().zip(out.iter()) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = [Welford::default(); K];
    for chunk in &chunks {
        for (t, c) in total.iter_mut().zip(chunk.iter()) {
            t.merge(c);
        }
    }
    total
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic Kolmogorov
/// distribution (Stephens' small-sample correction).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "KS test needs nonempty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    KsResult { statistic: d, p_value: kolmogorov_q(lambda) }
}

/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2k²λ²)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
