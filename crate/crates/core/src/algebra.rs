//! Matrix products used throughout the estimators: Khatri-Rao, Kronecker and
//! Hadamard, plus column-major vectorization helpers.
//!
//! The Khatri-Rao product is the column-wise Kronecker product: for
//! `A (I×Q)` and `B (J×Q)`, column `q` of `A ⋄ B` is `a_q ⊗ b_q`, so row
//! `(i, j)` of the result maps to index `i·J + j` (the right factor varies
//! fastest). Every unfolding identity in this crate relies on exactly that
//! ordering.

use crate::error::{Error, Result};
use crate::types::{CMat, CVec};

/// Column-wise Kronecker product of two matrices with equal column counts.
pub fn khatri_rao(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.ncols() != b.ncols() {
        return Err(Error::dims(format!(
            "khatri-rao: column counts differ ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    let (ia, jb, q) = (a.nrows(), b.nrows(), a.ncols());
    let mut out = CMat::zeros(ia * jb, q);
    for c in 0..q {
        for i in 0..ia {
            let aic = a[(i, c)];
            for j in 0..jb {
                out[(i * jb + j, c)] = aic * b[(j, c)];
            }
        }
    }
    Ok(out)
}

/// Kronecker product with the standard block structure.
pub fn kronecker(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Element-wise (Hadamard) product of two same-shape matrices.
pub fn hadamard(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.shape() != b.shape() {
        return Err(Error::dims(format!(
            "hadamard: shapes differ ({:?} vs {:?})",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.component_mul(b))
}

/// Stacks the columns of a matrix into a single vector.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`]: reshapes a vector into an `rows × cols` matrix
/// column by column.
pub fn unvectorize(v: &CVec, rows: usize, cols: usize) -> Result<CMat> {
    if v.len() != rows * cols {
        return Err(Error::dims(format!(
            "unvectorize: vector length {} does not match {}x{}",
            v.len(),
            rows,
            cols
        )));
    }
    Ok(CMat::from_column_slice(rows, cols, v.as_slice()))
}
