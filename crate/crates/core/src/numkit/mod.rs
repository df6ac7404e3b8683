//! Dense complex linear algebra and seeded sampling.

mod expm;
mod linalg;
mod matrix;
mod rng;

pub use expm::expm;
pub use linalg::{eigenvalues, eigh, expm_hermitian, solve};
pub use matrix::{kron, ComplexMatrix, C64, I, ONE, ZERO};
pub(crate) use matrix::matmul_into;
pub use rng::Rng;

use crate::error::{Error, Result};

/// Column-stacking vectorization: `v[j·n + i] = rho[i, j]`.
///
/// With this convention `vec(U ρ U†) = (conj(U) ⊗ U) · vec(ρ)`.
pub fn vectorize(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !rho.is_square() {
        return Err(Error::Dimension(format!("vectorize of a {}x{} matrix", rho.rows(), rho.cols())));
    }
    let n = rho.rows();
    let mut v = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            v.push(rho[(i, j)]);
        }
    }
    ComplexMatrix::from_vec(n * n, 1, v)
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let len = v.rows() * v.cols();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len || v.cols() != 1 {
        return Err(Error::Dimension(format!("cannot unvectorize a {}x{} vector", v.rows(), v.cols())));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| v.as_slice()[j * n + i]))
}

/// Superoperator `conj(U) ⊗ U` acting on column-stacked density matrices.
pub fn superoperator(u: &ComplexMatrix) -> ComplexMatrix {
    u.conj().kron(u)
}

/// Projector `|ψ⟩⟨ψ|`.
pub fn outer(psi: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj())
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Haar-random unitary from QR of a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gaussian(), rng.gaussian())).collect();
        for c in &cols {
            let p = inner(c, &v);
            for (x, y) in v.iter_mut().zip(c) {
                *x -= p * y;
            }
        }
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        cols.push(v);
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Haar-random normalized state.
pub fn random_state(n: usize, rng: &mut Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gaussian(), rng.gaussian())).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, rng: &mut Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gaussian(), rng.gaussian()))
    }

    #[test]
    fn vectorized_identity() {
        let v = vectorize(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(v.as_slice(), &[ONE, ZERO, ZERO, ONE]);
    }

    #[test]
    fn vectorize_round_trip() {
        let mut rng = Rng::new(11, 0);
        let rho = random_matrix(4, &mut rng);
        assert_eq!(unvectorize(&vectorize(&rho).unwrap()).unwrap(), rho);
    }

    #[test]
    fn unvectorize_rejects_bad_length() {
        assert!(unvectorize(&ComplexMatrix::zeros(5, 1)).is_err());
    }

    #[test]
    fn superoperator_matches_conjugation() {
        let mut rng = Rng::new(12, 0);
        let u = random_unitary(3, &mut rng);
        assert!(u.is_unitary(1e-12));
        let rho = random_matrix(3, &mut rng);
        let lhs = superoperator(&u).matmul(&vectorize(&rho).unwrap());
        let rhs = vectorize(&u.matmul(&rho).matmul(&u.adjoint())).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}
