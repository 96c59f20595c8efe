//! Small dense linear algebra for the linear resolvents (d ≤ 64).

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Dense<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Real> Dense<S> {
    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let n = rows.len();
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self { n, data }
    }

    pub fn identity_plus(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] = out.data[i * self.n + i] + S::one();
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Checks ⟨x, Mx⟩ ≥ 0 for all x by attempting a Cholesky factorisation of
    /// the symmetric part shifted by `slack · max(1, ‖H‖_max)`.
    pub fn is_monotone(&self, slack: S) -> bool {
        let n = self.n;
        let half = S::lit(0.5);
        let mut h: Vec<S> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                half * (self.get(i, j) + self.get(j, i))
            })
            .collect();
        let shift = slack * h.iter().fold(S::one(), |m, v| m.max(v.abs()));
        for i in 0..n {
            h[i * n + i] = h[i * n + i] + shift;
        }
        for j in 0..n {
            let mut diag = h[j * n + j];
            for k in 0..j {
                diag = diag - h[j * n + k] * h[j * n + k];
            }
            if !(diag > S::zero()) {
                return false;
            }
            let diag = diag.sqrt();
            h[j * n + j] = diag;
            for i in j + 1..n {
                let mut s = h[i * n + j];
                for k in 0..j {
                    s = s - h[i * n + k] * h[j * n + k];
                }
                h[i * n + j] = s / diag;
            }
        }
        true
    }
}

/// LU factorisation with partial pivoting.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Lu<S> {
    n: usize,
    lu: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Real> Lu<S> {
    pub fn factor(m: &Dense<S>) -> Option<Self> {
        let n = m.n;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&a, &b| {
                    lu[a * n + k]
                        .abs()
                        .partial_cmp(&lu[b * n + k].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(k);
            if lu[pivot * n + k] == S::zero() || !lu[pivot * n + k].is_finite() {
                return None;
            }
            if pivot != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot * n + j);
                }
                perm.swap(k, pivot);
            }
            let p = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / p;
                lu[i * n + k] = factor;
                for j in k + 1..n {
                    lu[i * n + j] = lu[i * n + j] - factor * lu[k * n + j];
                }
            }
        }
        Some(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] = y[i] - self.lu[i * n + k] * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] = y[i] - self.lu[i * n + k] * y[k];
            }
            y[i] = y[i] / self.lu[i * n + i];
        }
        y
    }
}
