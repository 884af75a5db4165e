//! Thin SVD and Moore-Penrose pseudo-inverse on complex matrices.
//!
//! The decomposition itself is delegated to LAPACK's divide-and-conquer
//! routine; everything downstream handles rank deficiency through the
//! relative singular-value cutoff.

use ndarray::ShapeBuilder;
use ndarray_linalg::{JobSvd, SVDDC};

use crate::error::{Error, Result};
use crate::types::{c, CMat, C64};

/// Thin singular value decomposition `A = U Σ Vᴴ` with singular values in
/// non-increasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v_h: CMat,
}

fn check_nonempty_finite(a: &CMat) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::dims("svd: empty matrix".to_string()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("svd: non-finite entries".to_string()));
    }
    Ok(())
}

pub fn svd(a: &CMat) -> Result<Svd> {
    check_nonempty_finite(a)?;
    let (rows, cols) = a.shape();
    // nalgebra stores column-major, which is exactly Fortran order.
    let arr = ndarray::Array2::<C64>::from_shape_vec((rows, cols).f(), a.as_slice().to_vec())
        .expect("consistent shape");
    let (u, s, v_h) = arr
        .svddc(JobSvd::Some)
        .map_err(|e| Error::Numerical(format!("svd did not converge: {e}")))?;
    let u = u.expect("left vectors requested");
    let v_h = v_h.expect("right vectors requested");
    let k = s.len();
    Ok(Svd {
        u: CMat::from_fn(rows, k, |i, j| u[(i, j)]),
        singular_values: s.iter().copied().collect(),
        v_h: CMat::from_fn(k, cols, |i, j| v_h[(i, j)]),
    })
}

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// `max(rows, cols) · ε · σ_max` are treated as zero, so rank-deficient and
/// all-zero inputs are handled without error.
pub fn pseudo_inverse(a: &CMat) -> Result<CMat> {
    let Svd {
        u,
        singular_values,
        v_h,
    } = svd(a)?;
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let tol = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * sigma_max;
    let k = singular_values.len();
    // V Σ⁺ Uᴴ, built by scaling the columns of V before the product.
    let v = v_h.adjoint();
    let mut v_scaled = v;
    for (i, &s) in singular_values.iter().enumerate().take(k) {
        let inv = if s > tol {
            c(1.0 / s, 0.0)
        } else {
            c(0.0, 0.0)
        };
        for r in 0..v_scaled.nrows() {
            v_scaled[(r, i)] *= inv;
        }
    }
    Ok(v_scaled * u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::c;
    use approx::assert_relative_eq;

    fn lcg_mat(rows: usize, cols: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        CMat::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    #[test]
    fn diagonal_singular_values() {
        let a = CMat::from_diagonal(&crate::types::CVec::from_vec(vec![
            c(3.0, 0.0),
            c(1.0, 0.0),
        ]));
        let dec = svd(&a).unwrap();
        assert_relative_eq!(dec.singular_values[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(dec.singular_values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_one_has_single_singular_value() {
        let u = CMat::from_column_slice(3, 1, &[c(1.0, 1.0), c(0.0, -2.0), c(0.5, 0.0)]);
        let v = CMat::from_column_slice(2, 1, &[c(2.0, 0.0), c(0.0, 1.0)]);
        let a = &u * v.adjoint();
        let dec = svd(&a).unwrap();
        assert_relative_eq!(dec.singular_values[0], u.norm() * v.norm(), epsilon = 1e-12);
        assert!(dec.singular_values[1] < 1e-12);
    }

    #[test]
    fn reconstruction_random_8x5() {
        let a = lcg_mat(8, 5, 42);
        let dec = svd(&a).unwrap();
        let mut sig = CMat::zeros(dec.u.ncols(), dec.v_h.nrows());
        for (i, &s) in dec.singular_values.iter().enumerate() {
            sig[(i, i)] = c(s, 0.0);
        }
        let rec = &dec.u * sig * &dec.v_h;
        assert!((&a - rec).norm() / a.norm() < 1e-12);
    }

    #[test]
    fn pinv_of_identity_and_diagonal() {
        let i4 = CMat::identity(4, 4);
        assert_relative_eq!(pseudo_inverse(&i4).unwrap(), i4, epsilon = 1e-13);
        let d = CMat::from_diagonal(&crate::types::CVec::from_vec(vec![
            c(2.0, 0.0),
            c(4.0, 0.0),
        ]));
        let p = pseudo_inverse(&d).unwrap();
        assert_relative_eq!(p[(0, 0)], c(0.5, 0.0), epsilon = 1e-14);
        assert_relative_eq!(p[(1, 1)], c(0.25, 0.0), epsilon = 1e-14);
    }

    #[test]
    fn pinv_semi_unitary_is_adjoint() {
        // Orthonormal columns from the QR of a random tall matrix.
        let a = lcg_mat(6, 3, 7);
        let qr = a.qr();
        let q = qr.q();
        let p = pseudo_inverse(&q).unwrap();
        assert_relative_eq!(p, q.adjoint(), epsilon = 1e-12);
    }

    #[test]
    fn pinv_zero_matrix_is_zero() {
        let z = CMat::zeros(3, 2);
        let p = pseudo_inverse(&z).unwrap();
        assert_eq!(p.shape(), (2, 3));
        assert!(p.norm() == 0.0);
    }

    #[test]
    fn moore_penrose_identities_rank_deficient() {
        // Third column is the sum of the first two.
        let mut a = lcg_mat(6, 3, 99);
        let col2 = a.column(0) + a.column(1);
        a.set_column(2, &col2);
        let p = pseudo_inverse(&a).unwrap();
        let apa = &a * &p * &a;
        let pap = &p * &a * &p;
        assert!((&apa - &a).norm() / a.norm() < 1e-10);
        assert!((&pap - &p).norm() / p.norm() < 1e-10);
        let ap = &a * &p;
        let pa = &p * &a;
        assert!((&ap - ap.adjoint()).norm() < 1e-10 * ap.norm().max(1.0));
        assert!((&pa - pa.adjoint()).norm() < 1e-10 * pa.norm().max(1.0));
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 0)] = c(f64::NAN, 0.0);
        assert!(svd(&a).is_err());
    }
}
