//! Dense linear algebra helpers on top of nalgebra.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest dimension solved with a dense eigen-decomposition.
pub const DENSE_EIGEN_MAX: usize = 200;
pub const POWER_TOL: f64 = 1e-9;
pub const POWER_MAX_ITER: usize = 10_000;

/// Spectral radius (largest eigenvalue modulus) of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() <= DENSE_EIGEN_MAX {
        dense_spectral_radius(m)
    } else {
        power_spectral_radius(m, POWER_TOL, POWER_MAX_ITER)
    }
}

pub fn dense_spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| libm::hypot(z.re, z.im)).fold(0.0, f64::max)
}

/// Power-iteration estimate of the spectral radius.
///
/// Iterates a small orthonormal block rather than a single vector so that a
/// dominant complex-conjugate pair converges as well as a real eigenvalue;
/// the estimate is the largest eigenvalue modulus of the block's projected
/// matrix.
pub fn power_spectral_radius(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let p = n.min(POWER_BLOCK);
    let mut q = DMatrix::from_fn(n, p, |i, j| {
        // deterministic, full-rank start
        libm::sin((i * p + j) as f64 * 0.618_033_988_7 + 1.0)
    });
    q = q.qr().q();
    let mut prev = f64::NAN;
    for _ in 0..max_iter {
        let z = m * &q;
        let h = q.tr_mul(&z);
        let est = h.complex_eigenvalues().iter().map(|c| libm::hypot(c.re, c.im)).fold(0.0, f64::max);
        if z.norm() == 0.0 {
            return 0.0;
        }
        q = z.qr().q();
        if libm::fabs(est - prev) <= tol * est {
            return est;
        }
        prev = est;
    }
    prev
}

const POWER_BLOCK: usize = 8;

/// Cholesky-factored ridge system `(X^T X + reg I) w = X^T y`.
///
/// All columns, including the bias, are penalized.
pub struct RidgeSystem {
    // lower-triangular factor, row-major
    chol: Vec<f64>,
    dim: usize,
    design: DMatrix<f64>,
}

/// Pivots below this fraction of the largest diagonal entry count as singular.
const PIVOT_TOL: f64 = 1e-13;

impl RidgeSystem {
    pub fn new(design: DMatrix<f64>, reg: f64) -> Result<Self> {
        if !(reg >= 0.0) {
            return Err(Error::InvalidArgument(format!("ridge coefficient {reg} must be >= 0")));
        }
        let dim = design.ncols();
        let gram = design.tr_mul(&design);
        let mut a = vec![0.0; dim * dim];
        let mut max_diag: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                a[i * dim + j] = gram[(i, j)];
            }
            a[i * dim + i] += reg;
            max_diag = max_diag.max(a[i * dim + i]);
        }
        for j in 0..dim {
            let mut d = a[j * dim + j];
            for k in 0..j {
                d -= a[j * dim + k] * a[j * dim + k];
            }
            if !(d > PIVOT_TOL * max_diag) || !d.is_finite() {
                return Err(Error::NumericFailure(format!(
                    "singular normal equations (pivot {j})"
                )));
            }
            let d = libm::sqrt(d);
            a[j * dim + j] = d;
            for i in j + 1..dim {
                let mut s = a[i * dim + j];
                for k in 0..j {
                    s -= a[i * dim + k] * a[j * dim + k];
                }
                a[i * dim + j] = s / d;
            }
        }
        Ok(Self { chol: a, dim, design })
    }

    pub fn solve(&self, target: &[f64]) -> Result<DVector<f64>> {
        if target.len() != self.design.nrows() {
            return Err(Error::InvalidArgument(format!(
                "target has {} rows, design has {}",
                target.len(),
                self.design.nrows()
            )));
        }
        let n = self.dim;
        let rhs = self.design.tr_mul(&DVector::from_column_slice(target));
        let l = &self.chol;
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i * n + k] * z[k];
            }
            z[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= l[k * n + i] * z[k];
            }
            z[i] = s / l[i * n + i];
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("non-finite ridge weights".into()));
        }
        Ok(DVector::from_vec(z))
    }
}

/// Smallest singular value by full SVD.
pub fn sigma_min_svd(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Smallest singular value of `diag(d) * W` for a sequence of diagonals `d`.
///
/// Uses `sigma_min(D W)^-2 = lambda_max(W^-1 D^-2 W^-T)` with `W^-1` formed
/// once, and power iteration warm-started from the previous step. Steps that
/// do not converge, or an ill-conditioned `W`, fall back to a full SVD.
pub struct ScaledSigmaMin<'a> {
    w: &'a DMatrix<f64>,
    inv: Option<DMatrix<f64>>,
    v: DVector<f64>,
    u: DVector<f64>,
    mv: DVector<f64>,
    scratch: DMatrix<f64>,
}

const SIGMA_RESIDUAL_TOL: f64 = 1e-10;
const SIGMA_MAX_ITER: usize = 400;
const INVERSE_COND_MAX: f64 = 1e10;

impl<'a> ScaledSigmaMin<'a> {
    pub fn new(w: &'a DMatrix<f64>) -> Self {
        let n = w.nrows();
        let inv = w.clone().try_inverse().filter(|inv| {
            inv.iter().all(|x| x.is_finite()) && w.norm() * inv.norm() < INVERSE_COND_MAX
        });
        let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.01 * i as f64);
        let nv = v.norm();
        if nv > 0.0 {
            v /= nv;
        }
        Self {
            w,
            inv,
            v,
            u: DVector::zeros(n),
            mv: DVector::zeros(n),
            scratch: DMatrix::zeros(n, n),
        }
    }

    pub fn compute(&mut self, diag: &[f64]) -> f64 {
        if diag.iter().any(|&d| d == 0.0) {
            return 0.0;
        }
        if let Some(s) = self.iterate(diag) {
            return s;
        }
        self.scratch.copy_from(self.w);
        for (i, &d) in diag.iter().enumerate() {
            self.scratch.row_mut(i).scale_mut(d);
        }
        sigma_min_svd(&self.scratch)
    }

    fn iterate(&mut self, diag: &[f64]) -> Option<f64> {
        let inv = self.inv.as_ref()?;
        for _ in 0..SIGMA_MAX_ITER {
            // mv = W^-1 D^-2 W^-T v
            self.u.gemv_tr(1.0, inv, &self.v, 0.0);
            for (x, &d) in self.u.iter_mut().zip(diag) {
                *x /= d * d;
            }
            self.mv.gemv(1.0, inv, &self.u, 0.0);
            let mu = self.v.dot(&self.mv);
            if !(mu > 0.0) || !mu.is_finite() {
                return None;
            }
            let mut resid = 0.0;
            for (a, b) in self.mv.iter().zip(self.v.iter()) {
                let r = a - mu * b;
                resid += r * r;
            }
            let norm = self.mv.norm();
            self.v.copy_from(&self.mv);
            self.v /= norm;
            if libm::sqrt(resid) <= SIGMA_RESIDUAL_TOL * mu {
                return Some(1.0 / libm::sqrt(mu));
            }
        }
        None
    }
}
