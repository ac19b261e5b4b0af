use super::{NumericsError, Scalar};

/// Dense symmetric matrix. Writes go to both `(i, j)` and `(j, i)`, so the
/// storage is symmetric bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds the matrix from the upper triangle `f(i, j)` with `i <= j`.
    pub fn from_upper_fn<F: FnMut(usize, usize) -> T>(n: usize, mut f: F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }
}

/// Eigen-decomposition with eigenvalues ascending and eigenvectors stored
/// as columns (column `k` belongs to `values[k]`).
#[derive(Debug, Clone)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    n: usize,
    vectors: Vec<T>,
}

impl<T: Scalar> SymEigen<T> {
    pub fn vector(&self, k: usize) -> &[T] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver.
///
/// Off-diagonal entries are annihilated while they exceed
/// `eps * sqrt(|a_pp a_qq|)`, which keeps small eigenvalues of graded
/// positive definite matrices accurate to high relative precision.
pub fn sym_eig<T: Scalar>(a: &SymMatrix<T>) -> Result<SymEigen<T>, NumericsError> {
    let n = a.n;
    if !a.is_finite() {
        return Err(NumericsError::NonFinite {
            at: f64::NAN,
            value: f64::NAN,
        });
    }
    let mut m = a.data.clone();
    // v is stored row-major as V[i][k]; column k is the k-th eigenvector.
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let eps = T::epsilon();
    let tiny = eps * eps * a.frobenius_norm();
    let half = T::lit(0.5);
    let one = T::one();

    let mut converged = n < 2;
    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                if apq.abs() <= eps * (app.abs() * aqq.abs()).sqrt() || apq.abs() <= tiny {
                    m[p * n + q] = T::zero();
                    m[q * n + p] = T::zero();
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) * half / apq;
                let t = theta.signum() / (theta.abs() + (one + theta * theta).sqrt());
                let c = one / (one + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = T::zero();
                m[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap());
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[col * n + k] = v[k * n + src];
        }
    }
    Ok(SymEigen { values, n, vectors })
}
