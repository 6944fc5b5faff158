/// Log-space scores of a linear-chain CRF over one sequence.
///
/// A tag path `y` scores
/// `start[y0] + sum_t emission(t, y_t) + sum_t transition(y_{t-1}, y_t) + end[y_{n-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    pub n: usize,
    pub k: usize,
    /// Row-major `[n x k]`.
    pub emissions: Vec<f64>,
    /// Row-major `[k x k]`, `transitions[from * k + to]`.
    pub transitions: Vec<f64>,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl Potentials {
    pub fn zeros(n: usize, k: usize) -> Self {
        Potentials {
            n,
            k,
            emissions: vec![0.0; n * k],
            transitions: vec![0.0; k * k],
            start: vec![0.0; k],
            end: vec![0.0; k],
        }
    }

    #[inline]
    pub fn emission(&self, t: usize, tag: usize) -> f64 {
        self.emissions[t * self.k + tag]
    }

    #[inline]
    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transitions[from * self.k + to]
    }

    pub fn emission_row(&self, t: usize) -> &[f64] {
        &self.emissions[t * self.k..(t + 1) * self.k]
    }

    pub fn path_score(&self, path: &[usize]) -> f64 {
        assert_eq!(path.len(), self.n, "path length must equal sequence length");
        let mut score = self.start[path[0]] + self.emission(0, path[0]);
        for t in 1..self.n {
            score += self.transition(path[t - 1], path[t]) + self.emission(t, path[t]);
        }
        score + self.end[path[self.n - 1]]
    }
}
