//! Matrix exponential by Padé approximation with scaling and squaring.
//!
//! Degree selection and the theta thresholds follow Higham, "The scaling and
//! squaring method for the matrix exponential revisited" (2005).

use super::linalg::solve;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential of a general (not necessarily normal) square matrix.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("expm of a {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(a.clone());
    }
    if a.is_diagonal() {
        let d: Vec<C64> = a.diag().into_iter().map(|z| z.exp()).collect();
        return Ok(ComplexMatrix::from_diag(&d));
    }
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(Error::InvalidParameter("expm of a non-finite matrix".into()));
    }
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, coeffs);
            return pade_solve(&u, &v);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a.scale_real(0.5f64.powi(s));
    let (u, v) = pade_13(&scaled);
    let mut r = pade_solve(&u, &v)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn axpy(acc: &mut ComplexMatrix, s: f64, x: &ComplexMatrix) {
    for (a, b) in acc.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *a += b * s;
    }
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let a2 = a.matmul(a);
    let mut powers = vec![ComplexMatrix::identity(n), a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut u = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        axpy(&mut v, b[2 * k], p);
        if 2 * k + 1 < b.len() {
            axpy(&mut u, b[2 * k + 1], p);
        }
    }
    (a.matmul(&u), v)
}

fn pade_13(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let b = &B13;
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner_u = ComplexMatrix::zeros(n, n);
    axpy(&mut inner_u, b[13], &a6);
    axpy(&mut inner_u, b[11], &a4);
    axpy(&mut inner_u, b[9], &a2);
    let mut u = a6.matmul(&inner_u);
    axpy(&mut u, b[7], &a6);
    axpy(&mut u, b[5], &a4);
    axpy(&mut u, b[3], &a2);
    axpy(&mut u, b[1], &id);
    let u = a.matmul(&u);

    let mut inner_v = ComplexMatrix::zeros(n, n);
    axpy(&mut inner_v, b[12], &a6);
    axpy(&mut inner_v, b[10], &a4);
    axpy(&mut inner_v, b[8], &a2);
    let mut v = a6.matmul(&inner_v);
    axpy(&mut v, b[6], &a6);
    axpy(&mut v, b[4], &a4);
    axpy(&mut v, b[2], &a2);
    axpy(&mut v, b[0], &id);
    (u, v)
}

fn pade_solve(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(&(v - u), &(v + u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::matrix::{I, ONE, ZERO};
    use std::f64::consts::PI;

    fn rel_err(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).frobenius_norm() / b.frobenius_norm()
    }

    #[test]
    fn zero_gives_identity() {
        assert_eq!(expm(&ComplexMatrix::zeros(3, 3)).unwrap(), ComplexMatrix::identity(3));
    }

    #[test]
    fn diagonal_closed_form() {
        let a = ComplexMatrix::from_diag(&[I * PI, ZERO]);
        let e = expm(&a).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::from_real_diag(&[-1.0, 1.0])) < 1e-15);
    }

    #[test]
    fn rejects_non_square() {
        assert!(expm(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn nilpotent_is_exact() {
        let a = ComplexMatrix::from_rows(&[[ZERO, C64::new(3.0, 1.0)], [ZERO, ZERO]]);
        let e = expm(&a).unwrap();
        let want = ComplexMatrix::from_rows(&[[ONE, C64::new(3.0, 1.0)], [ZERO, ONE]]);
        assert!(e.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn rabi_oracle() {
        for &(delta, omega, t) in &[(0.0, 1.0, 2.0), (1.3, 0.7, 5.0), (-4.0, 2.5, 11.0), (40.0, 3.0, 30.0)] {
            let h = ComplexMatrix::from_rows(&[
                [C64::new(delta / 2.0, 0.0), C64::new(omega / 2.0, 0.0)],
                [C64::new(omega / 2.0, 0.0), C64::new(-delta / 2.0, 0.0)],
            ]);
            let u = expm(&h.scale(-I * t)).unwrap();
            let w2 = omega * omega + delta * delta;
            let want = omega * omega / w2 * (w2.sqrt() * t / 2.0).sin().powi(2);
            assert!((u[(1, 0)].norm_sqr() - want).abs() < 1e-10, "{delta} {omega} {t}");
        }
    }

    #[test]
    fn every_pade_degree_matches_hermitian_path() {
        let h = ComplexMatrix::from_rows(&[
            [C64::new(0.3, 0.0), C64::new(0.1, 0.4), C64::new(-0.2, 0.0)],
            [C64::new(0.1, -0.4), C64::new(-0.5, 0.0), C64::new(0.0, 0.7)],
            [C64::new(-0.2, 0.0), C64::new(0.0, -0.7), C64::new(1.1, 0.0)],
        ]);
        for &t in &[1e-3, 0.05, 0.3, 0.8, 1.5, 4.0, 60.0] {
            let got = expm(&h.scale(-I * t)).unwrap();
            let want = crate::numkit::expm_hermitian(&h, t).unwrap();
            assert!(rel_err(&got, &want) < 1e-12, "t = {t}");
        }
    }
}
