//! Exact inference on a linear chain given dense potentials.

/// Log-potentials of one sequence. Matrices are row-major: `emit[t * n + j]`,
/// `trans[i * n + j]` scores label `i` followed by `j`.
#[derive(Debug, Clone, Copy)]
pub struct Potentials<'a> {
    pub len: usize,
    pub num_tags: usize,
    pub emit: &'a [f64],
    pub trans: &'a [f64],
    pub start: &'a [f64],
    pub stop: &'a [f64],
}

pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl Potentials<'_> {
    fn e(&self, t: usize, j: usize) -> f64 {
        self.emit[t * self.num_tags + j]
    }

    fn tr(&self, i: usize, j: usize) -> f64 {
        self.trans[i * self.num_tags + j]
    }

    /// Score of a full label sequence, including start and stop terms.
    pub fn energy(&self, y: &[usize]) -> f64 {
        assert_eq!(y.len(), self.len, "label sequence length");
        assert!(y.iter().all(|&l| l < self.num_tags), "label index out of range");
        let mut s = self.start[y[0]] + self.stop[y[self.len - 1]];
        for (t, &l) in y.iter().enumerate() {
            s += self.e(t, l);
        }
        for w in y.windows(2) {
            s += self.tr(w[0], w[1]);
        }
        s
    }

    fn exp_trans(&self) -> Vec<f64> {
        self.trans.iter().map(|x| x.exp()).collect()
    }

    /// Forward log-messages `alpha[t * n + j]` and the log-partition.
    ///
    /// Each step shifts the incoming messages by their maximum before exponentiating,
    /// so only `n` exponentials are needed per position.
    pub fn forward(&self) -> (Vec<f64>, f64) {
        let n = self.num_tags;
        let et = self.exp_trans();
        let mut alpha = vec![0.0; self.len * n];
        for j in 0..n {
            alpha[j] = self.start[j] + self.e(0, j);
        }
        let mut scaled = vec![0.0; n];
        for t in 1..self.len {
            let (done, rest) = alpha.split_at_mut(t * n);
            let prev = &done[(t - 1) * n..];
            let m = prev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (s, a) in scaled.iter_mut().zip(prev) {
                *s = (a - m).exp();
            }
            for (j, out) in rest[..n].iter_mut().enumerate() {
                let sum: f64 = (0..n).map(|i| scaled[i] * et[i * n + j]).sum();
                *out = m + sum.ln() + self.e(t, j);
            }
        }
        let last = &alpha[(self.len - 1) * n..];
        let log_z = log_sum_exp((0..n).map(|j| last[j] + self.stop[j]));
        (alpha, log_z)
    }

    /// Backward log-messages `beta[t * n + i]` and the log-partition.
    pub fn backward(&self) -> (Vec<f64>, f64) {
        let n = self.num_tags;
        let et = self.exp_trans();
        let mut beta = vec![0.0; self.len * n];
        beta[(self.len - 1) * n..].copy_from_slice(self.stop);
        let mut scaled = vec![0.0; n];
        for t in (0..self.len - 1).rev() {
            let (head, tail) = beta.split_at_mut((t + 1) * n);
            let next = &tail[..n];
            let m = (0..n)
                .map(|j| self.e(t + 1, j) + next[j])
                .fold(f64::NEG_INFINITY, f64::max);
            for (j, s) in scaled.iter_mut().enumerate() {
                *s = (self.e(t + 1, j) + next[j] - m).exp();
            }
            for (i, out) in head[t * n..].iter_mut().enumerate() {
                let row = &et[i * n..(i + 1) * n];
                let sum: f64 = row.iter().zip(&scaled).map(|(a, b)| a * b).sum();
                *out = m + sum.ln();
            }
        }
        let log_z = log_sum_exp((0..n).map(|j| self.start[j] + self.e(0, j) + beta[j]));
        (beta, log_z)
    }

    pub fn log_partition(&self) -> f64 {
        self.forward().1
    }

    /// Node marginals `[len * n]`, edge marginals summed over positions `[n * n]`, and log Z.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>, f64) {
        let n = self.num_tags;
        let (alpha, log_z) = self.forward();
        let (beta, _) = self.backward();
        let et = self.exp_trans();
        let node: Vec<f64> = alpha
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a + b - log_z).exp())
            .collect();
        let mut edge = vec![0.0; n * n];
        let mut left = vec![0.0; n];
        let mut right = vec![0.0; n];
        for t in 0..self.len.saturating_sub(1) {
            let a = &alpha[t * n..(t + 1) * n];
            let ma = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mb = (0..n)
                .map(|j| self.e(t + 1, j) + beta[(t + 1) * n + j])
                .fold(f64::NEG_INFINITY, f64::max);
            let c = (ma + mb - log_z).exp();
            for i in 0..n {
                left[i] = (a[i] - ma).exp() * c;
                right[i] = (self.e(t + 1, i) + beta[(t + 1) * n + i] - mb).exp();
            }
            for i in 0..n {
                let row = &et[i * n..(i + 1) * n];
                for j in 0..n {
                    edge[i * n + j] += left[i] * row[j] * right[j];
                }
            }
        }
        (node, edge, log_z)
    }

    /// Highest-energy sequence and its energy. Ties go to the smaller label index,
    /// first for the final label and then at each backtrack step.
    pub fn viterbi(&self) -> (Vec<usize>, f64) {
        let n = self.num_tags;
        let mut delta = vec![0.0; self.len * n];
        let mut back = vec![0usize; self.len * n];
        for j in 0..n {
            delta[j] = self.start[j] + self.e(0, j);
        }
        for t in 1..self.len {
            for j in 0..n {
                let mut best = 0;
                let mut best_score = delta[(t - 1) * n] + self.tr(0, j);
                for i in 1..n {
                    let s = delta[(t - 1) * n + i] + self.tr(i, j);
                    if s > best_score {
                        best = i;
                        best_score = s;
                    }
                }
                delta[t * n + j] = best_score + self.e(t, j);
                back[t * n + j] = best;
            }
        }
        let last = (self.len - 1) * n;
        let mut y_last = 0;
        let mut best = delta[last] + self.stop[0];
        for j in 1..n {
            let s = delta[last + j] + self.stop[j];
            if s > best {
                y_last = j;
                best = s;
            }
        }
        let mut y = vec![0; self.len];
        y[self.len - 1] = y_last;
        for t in (1..self.len).rev() {
            y[t - 1] = back[t * n + y[t]];
        }
        (y, best)
    }
}
