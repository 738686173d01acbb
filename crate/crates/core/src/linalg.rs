//! Dense LU factorization with partial pivoting.

use crate::scalar::Real;

/// Row-major square matrix factored in place.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    data: Vec<T>,
    perm: Vec<usize>,
    /// Smallest pivot magnitude encountered.
    pub min_pivot: T,
}

impl<T: Real> Lu<T> {
    /// Factors the `n x n` row-major matrix `a`.
    pub fn factor(mut data: Vec<T>, n: usize) -> Self {
        assert_eq!(data.len(), n * n, "matrix must be square");
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = T::infinity();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, data[i * n + k].abs()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            min_pivot = min_pivot.min(best);
            if p != k {
                for j in 0..n {
                    data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = data[k * n + k];
            if pivot == T::zero() {
                continue;
            }
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let row_k = &head[k * n..];
            for row_i in tail.chunks_exact_mut(n) {
                let f = row_i[k] / pivot;
                if f == T::zero() {
                    continue;
                }
                row_i[k] = f;
                for j in k + 1..n {
                    row_i[j] = row_i[j] - f * row_k[j];
                }
            }
        }
        Self {
            n,
            data,
            perm,
            min_pivot,
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let row = &self.data[i * n..i * n + i];
            x[i] = row
                .iter()
                .zip(&x[..i])
                .fold(x[i], |acc, (&l, &v)| acc - l * v);
        }
        for i in (0..n).rev() {
            let row = &self.data[i * n + i + 1..(i + 1) * n];
            let acc = row
                .iter()
                .zip(&x[i + 1..])
                .fold(x[i], |acc, (&u, &v)| acc - u * v);
            x[i] = acc / self.data[i * n + i];
        }
        x
    }
}
