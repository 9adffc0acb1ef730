use faer::linalg::solvers::{DenseSolveCore, Llt};
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Relative asymmetry tolerated (and then averaged away) when importing a
/// matrix from an external source.
const SYMMETRY_TOL: f64 = 1e-10;

/// Dense symmetric `n × n` matrix stored as a full row-major square.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricDense {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricDense {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.n + i] = d;
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle
    /// (`i <= j`) and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Wraps row-major data. Entries must be symmetric up to a relative
    /// `1e-10`; the two triangles are then averaged so the invariant holds
    /// exactly.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        let scale = data.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        if worst > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric(worst));
        }
        let mut m = Self { n, data };
        m.symmetrize();
        Ok(m)
    }

    /// Imports a faer matrix, averaging the two triangles.
    pub fn from_faer(m: MatRef<'_, f64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    /// Imports a faer matrix reading only its lower triangle.
    pub(crate) fn from_faer_lower(m: MatRef<'_, f64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |i, j| m[(j, i)])
    }

    pub fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j])
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets entries `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Element-wise `self - other`.
    pub fn sub(&self, other: &SymmetricDense) -> Result<SymmetricDense> {
        self.check_dim(other.n)?;
        Ok(Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scaled(&self, alpha: f64) -> SymmetricDense {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| alpha * x).collect(),
        }
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> SymmetricDense {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += shift;
        }
        m
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = A`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    llt: Llt<f64>,
    log_det: f64,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.llt.L().nrows()
    }

    /// The factor `L` (column-major view, upper triangle zero).
    pub fn lower(&self) -> MatRef<'_, f64> {
        self.llt.L()
    }

    /// Entry `L(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.llt.L()[(i, j)]
        }
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `A⁻¹` as a dense symmetric matrix.
    pub fn inverse(&self) -> SymmetricDense {
        SymmetricDense::from_faer_lower(self.llt.inverse().as_ref())
    }

    /// Solves `Lᵀ x = z` in place by back substitution.
    pub fn solve_upper_in_place(&self, z: &mut [f64]) {
        let l = self.llt.L();
        let n = l.nrows();
        assert_eq!(z.len(), n);
        for i in (0..n).rev() {
            let col = l.col(i);
            let mut acc = z[i];
            for j in (i + 1)..n {
                acc -= col[j] * z[j];
            }
            z[i] = acc / col[i];
        }
    }

    /// `L·Lᵀ`, for verification.
    pub fn reconstruct(&self) -> SymmetricDense {
        let l = self.llt.L();
        let product = l * l.transpose();
        SymmetricDense::from_faer(product.as_ref())
    }
}

/// Cholesky factorization; fails with [`Error::NotSpd`] on a non-positive pivot.
pub fn cholesky(m: &SymmetricDense) -> Result<CholeskyFactor> {
    cholesky_faer(m.to_faer().as_ref())
}

pub(crate) fn cholesky_faer(m: MatRef<'_, f64>) -> Result<CholeskyFactor> {
    if !all_finite(m) {
        return Err(Error::NotSpd);
    }
    let llt = m.llt(Side::Lower).map_err(|_| Error::NotSpd)?;
    let l = llt.L();
    let mut log_det = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotSpd);
        }
        log_det += d.ln();
    }
    Ok(CholeskyFactor {
        llt,
        log_det: 2.0 * log_det,
    })
}

fn all_finite(m: MatRef<'_, f64>) -> bool {
    (0..m.ncols()).all(|j| (j..m.nrows()).all(|i| m[(i, j)].is_finite()))
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn eigenvalues_sym(m: &SymmetricDense) -> Vec<f64> {
    let mut ev = m
        .to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("symmetric eigenvalue iteration did not converge");
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cholesky_of_identity_is_identity() {
        let l = cholesky(&SymmetricDense::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.entry(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(l.log_det(), 0.0);
    }

    #[test]
    fn cholesky_two_by_two_by_hand() {
        // [[4,2],[2,3]] = [[2,0],[1,√2]] · transpose
        let m = SymmetricDense::from_row_major(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let l = cholesky(&m).unwrap();
        assert!(close(l.entry(0, 0), 2.0, 1e-14));
        assert!(close(l.entry(1, 0), 1.0, 1e-14));
        assert!(close(l.entry(1, 1), 2f64.sqrt(), 1e-14));
        assert_eq!(l.entry(0, 1), 0.0);
        let r = l.reconstruct();
        assert!(r.sub(&m).unwrap().frobenius_norm() <= 1e-10 * m.frobenius_norm());
        assert!(close(l.log_det(), 8f64.ln(), 1e-12));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = SymmetricDense::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(cholesky(&m), Err(Error::NotSpd)));
        assert!(matches!(cholesky(&SymmetricDense::zeros(2)), Err(Error::NotSpd)));
        let nan = SymmetricDense::from_diagonal(&[1.0, f64::NAN]);
        assert!(matches!(cholesky(&nan), Err(Error::NotSpd)));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let err = SymmetricDense::from_row_major(2, vec![1.0, 0.5, 0.4, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric(_)));
        let err = SymmetricDense::from_row_major(2, vec![1.0; 3]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn eigenvalues_are_sorted() {
        assert_eq!(eigenvalues_sym(&SymmetricDense::identity(4)), vec![1.0; 4]);
        let ev = eigenvalues_sym(&SymmetricDense::from_diagonal(&[3.0, 1.0, 2.0]));
        for (a, b) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!(close(*a, b, 1e-12));
        }
    }

    #[test]
    fn back_substitution_solves_upper_system() {
        let m = SymmetricDense::from_row_major(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let l = cholesky(&m).unwrap();
        let mut z = vec![1.0, 2.0];
        l.solve_upper_in_place(&mut z);
        // Lᵀ = [[2,1],[0,√2]]
        let s2 = 2f64.sqrt();
        assert!(close(2.0 * z[0] + z[1], 1.0, 1e-14));
        assert!(close(s2 * z[1], 2.0, 1e-14));
    }
}
