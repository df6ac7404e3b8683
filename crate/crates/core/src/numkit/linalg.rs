use nalgebra::DMatrix;

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Solves `a · x = b` by LU factorization with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::Dimension(format!(
            "solve: {}x{} system with {}x{} right-hand side",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let m = b.cols();
    let mut lu = a.as_slice().to_vec();
    let mut x = b.as_slice().to_vec();

    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[i * n + k].norm()))
            .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pmax == 0.0 || !pmax.is_finite() {
            return Err(Error::Singular { factor: "LU pivot" });
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            for j in 0..m {
                x.swap(k * m + j, p * m + j);
            }
        }
        let pivot = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / pivot;
            if f == ZERO {
                continue;
            }
            lu[i * n + k] = f;
            for j in k + 1..n {
                let t = lu[k * n + j];
                lu[i * n + j] -= f * t;
            }
            for j in 0..m {
                let t = x[k * m + j];
                x[i * m + j] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let pivot = lu[k * n + k];
        for j in 0..m {
            let mut s = x[k * m + j];
            for l in k + 1..n {
                s -= lu[k * n + l] * x[l * m + j];
            }
            x[k * m + j] = s / pivot;
        }
    }
    ComplexMatrix::from_vec(n, m, x)
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns.
pub fn eigh(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !h.is_square() {
        return Err(Error::Dimension("eigh needs a square matrix".into()));
    }
    let n = h.rows();
    let m = DMatrix::<C64>::from_row_slice(n, n, h.as_slice());
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvalues of a general square matrix, in no particular order.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    if !a.is_square() {
        return Err(Error::Dimension("eigenvalues need a square matrix".into()));
    }
    let n = a.rows();
    let m = DMatrix::<C64>::from_row_slice(n, n, a.as_slice());
    let schur = m.try_schur(1e-15, 10_000).ok_or_else(|| Error::NoSolution {
        reason: "Schur iteration did not converge".into(),
        best_residual: f64::NAN,
    })?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// `exp(-i·t·h)` for Hermitian `h` through its eigen-decomposition.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let (w, v) = eigh(h)?;
    let phases: Vec<C64> = w.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect();
    Ok(v.left_diag_mul_cols(&phases).matmul(&v.adjoint()))
}

impl ComplexMatrix {
    /// Scales column `j` by `d[j]`, i.e. returns `self · diag(d)`.
    pub fn left_diag_mul_cols(&self, d: &[C64]) -> ComplexMatrix {
        assert_eq!(d.len(), self.cols());
        ComplexMatrix::from_fn(self.rows(), self.cols(), |i, j| self[(i, j)] * d[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::matrix::ONE;

    #[test]
    fn eigenvalues_of_triangular_and_rotated() {
        let t = ComplexMatrix::from_rows(&[[C64::new(2.0, 1.0), ONE], [ZERO, C64::new(-1.0, 0.5)]]);
        let mut ev = eigenvalues(&t).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - C64::new(-1.0, 0.5)).norm() < 1e-12 && (ev[1] - C64::new(2.0, 1.0)).norm() < 1e-12);
        let h = ComplexMatrix::from_rows(&[[ONE, ONE], [ONE, -ONE]]).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        let mut ev = eigenvalues(&h.matmul(&t).matmul(&h)).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - C64::new(-1.0, 0.5)).norm() < 1e-12 && (ev[1] - C64::new(2.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(((i * 7 + j * 3) % 5) as f64 + if i == j { 4.0 } else { 0.0 }, (i as f64) - (j as f64)));
        let x = ComplexMatrix::from_fn(4, 2, |i, j| C64::new(i as f64, j as f64 + 1.0));
        let b = a.matmul(&x);
        let got = solve(&a, &b).unwrap();
        assert!(got.max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = ComplexMatrix::from_rows(&[[ONE, ONE], [ONE, ONE]]);
        assert!(matches!(solve(&a, &ComplexMatrix::identity(2)), Err(Error::Singular { .. })));
    }

    #[test]
    fn eigh_reconstructs() {
        let h = ComplexMatrix::from_rows(&[
            [C64::new(1.0, 0.0), C64::new(0.5, 0.2), ZERO],
            [C64::new(0.5, -0.2), C64::new(-1.0, 0.0), C64::new(0.3, 0.0)],
            [ZERO, C64::new(0.3, 0.0), C64::new(2.0, 0.0)],
        ]);
        let (w, v) = eigh(&h).unwrap();
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
        let d: Vec<C64> = w.iter().map(|&x| C64::new(x, 0.0)).collect();
        let back = v.left_diag_mul_cols(&d).matmul(&v.adjoint());
        assert!(back.max_abs_diff(&h) < 1e-12);
    }
}
