//! Dense Cholesky factorization for the GP covariance.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [T::zero(); 4];
    let chunks = n / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] = acc[0] + a[j] * b[j];
        acc[1] = acc[1] + a[j + 1] * b[j + 1];
        acc[2] = acc[2] + a[j + 2] * b[j + 2];
        acc[3] = acc[3] + a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..n {
        s = s + a[j] * b[j];
    }
    s
}

/// Lower factor `L` with `A = L Lᵀ`, stored row-major `n × n`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors the symmetric matrix `a` (row-major, only the lower triangle
    /// is read). Returns `None` if a pivot is not strictly positive.
    pub fn factor(mut a: Vec<T>, n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        for i in 0..n {
            for j in 0..=i {
                let (head, tail) = a.split_at_mut(i * n);
                let row_i = &tail[..n];
                let s = if j == i {
                    row_i[j] - dot(&row_i[..j], &row_i[..j])
                } else {
                    let row_j = &head[j * n..j * n + j + 1];
                    (row_i[j] - dot(&row_i[..j], &row_j[..j])) / row_j[j]
                };
                if j == i {
                    if !(s > T::zero()) || !s.is_finite() {
                        return None;
                    }
                    tail[j] = s.sqrt();
                } else {
                    tail[j] = s;
                }
            }
            for v in &mut a[i * n + i + 1..(i + 1) * n] {
                *v = T::zero();
            }
        }
        Some(Self { n, l: a })
    }

    /// Factors `a + jitter·I`, starting from `jitter` and multiplying it by
    /// ten on failure until it exceeds `max_jitter`. Returns the jitter used.
    pub fn factor_jittered(a: &[T], n: usize, jitter: T, max_jitter: T) -> Result<(Self, T)> {
        let mut j = jitter;
        loop {
            let mut m = a.to_vec();
            for i in 0..n {
                m[i * n + i] = m[i * n + i] + j;
            }
            if let Some(c) = Self::factor(m, n) {
                return Ok((c, j));
            }
            j = j * T::c(10.0);
            if j > max_jitter * T::c(1.000001) {
                return Err(Error::NotPositiveDefinite { jitter: j.as_f64() });
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.l[i * self.n..i * self.n + i + 1]
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let mut z = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let r = self.row(i);
            let v = (b[i] - dot(&r[..i], &z)) / r[i];
            z.push(v);
        }
        z
    }

    /// Solves `Lᵀ x = z`.
    pub fn solve_upper(&self, z: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x = z.to_vec();
        for i in (0..n).rev() {
            x[i] = x[i] / self.l[i * n + i];
            let xi = x[i];
            for (k, xk) in x.iter_mut().enumerate().take(i) {
                *xk = *xk - self.l[i * n + k] * xi;
            }
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }

    pub fn log_det(&self) -> T {
        (0..self.n)
            .map(|i| self.l[i * self.n + i].ln())
            .fold(T::zero(), |a, b| a + b)
            * T::c(2.0)
    }

    /// `L Lᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<T> {
        let n = self.n;
        let mut a = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = dot(&self.row(i)[..=j], &self.row(j)[..=j]);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }
}
