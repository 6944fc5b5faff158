//! Forward, backward and Viterbi recursions in log space.

use super::potentials::Potentials;

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `alpha[t][j]`: log-sum of scores of all prefixes ending in tag `j` at `t`
/// (start and emissions included, end excluded).
fn forward(p: &Potentials) -> Vec<f64> {
    let (n, k) = (p.n, p.k);
    let mut alpha = vec![0.0; n * k];
    for j in 0..k {
        alpha[j] = p.start[j] + p.emission(0, j);
    }
    for t in 1..n {
        let (prev, cur) = alpha.split_at_mut(t * k);
        let prev = &prev[(t - 1) * k..];
        for j in 0..k {
            cur[j] = log_sum_exp((0..k).map(|i| prev[i] + p.transition(i, j))) + p.emission(t, j);
        }
    }
    alpha
}

/// `beta[t][i]`: log-sum of scores of all suffixes after tag `i` at `t`
/// (end included).
fn backward(p: &Potentials) -> Vec<f64> {
    let (n, k) = (p.n, p.k);
    let mut beta = vec![0.0; n * k];
    beta[(n - 1) * k..].copy_from_slice(&p.end);
    for t in (0..n - 1).rev() {
        let (cur, next) = beta.split_at_mut((t + 1) * k);
        let cur = &mut cur[t * k..];
        for i in 0..k {
            cur[i] = log_sum_exp((0..k).map(|j| p.transition(i, j) + p.emission(t + 1, j) + next[j]));
        }
    }
    beta
}

/// Log of the sum over all `k^n` tag paths of `exp(path score)`.
pub fn forward_log_partition(p: &Potentials) -> f64 {
    assert!(p.n >= 1, "empty sequence");
    let alpha = forward(p);
    let last = &alpha[(p.n - 1) * p.k..];
    log_sum_exp((0..p.k).map(|j| last[j] + p.end[j]))
}

/// Highest-scoring path and its score. Ties resolve to the lowest tag index
/// at every backtracking step.
pub fn viterbi(p: &Potentials) -> (Vec<usize>, f64) {
    assert!(p.n >= 1, "empty sequence");
    let (n, k) = (p.n, p.k);
    let mut delta = vec![0.0; n * k];
    let mut back = vec![0usize; n * k];
    for j in 0..k {
        delta[j] = p.start[j] + p.emission(0, j);
    }
    for t in 1..n {
        for j in 0..k {
            let mut best = 0;
            let mut best_score = delta[(t - 1) * k] + p.transition(0, j);
            for i in 1..k {
                let s = delta[(t - 1) * k + i] + p.transition(i, j);
                if s > best_score {
                    best = i;
                    best_score = s;
                }
            }
            delta[t * k + j] = best_score + p.emission(t, j);
            back[t * k + j] = best;
        }
    }
    let mut last = 0;
    let mut score = delta[(n - 1) * k] + p.end[0];
    for j in 1..k {
        let s = delta[(n - 1) * k + j] + p.end[j];
        if s > score {
            last = j;
            score = s;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t * k + path[t]];
    }
    (path, score)
}

/// Posterior marginals from forward-backward.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub log_partition: f64,
    /// `[n x k]`: P(y_t = j).
    pub unary: Vec<f64>,
    /// `[(n-1) x k x k]`: P(y_t = i, y_{t+1} = j).
    pub pairwise: Vec<f64>,
}

impl Marginals {
    pub fn unary_at(&self, t: usize, k: usize) -> &[f64] {
        &self.unary[t * k..(t + 1) * k]
    }
}

pub fn marginals(p: &Potentials) -> Marginals {
    assert!(p.n >= 1, "empty sequence");
    let (n, k) = (p.n, p.k);
    let alpha = forward(p);
    let beta = backward(p);
    let last = &alpha[(n - 1) * k..];
    let log_z = log_sum_exp((0..k).map(|j| last[j] + p.end[j]));

    let unary = (0..n * k).map(|idx| (alpha[idx] + beta[idx] - log_z).exp()).collect();
    let mut pairwise = vec![0.0; n.saturating_sub(1) * k * k];
    for t in 0..n.saturating_sub(1) {
        for i in 0..k {
            for j in 0..k {
                let s = alpha[t * k + i] + p.transition(i, j) + p.emission(t + 1, j) + beta[(t + 1) * k + j];
                pairwise[(t * k + i) * k + j] = (s - log_z).exp();
            }
        }
    }
    Marginals {
        log_partition: log_z,
        unary,
        pairwise,
    }
}
