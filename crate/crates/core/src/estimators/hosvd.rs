//! Closed-form estimator for the short-term model via per-column rank-one
//! truncated higher-order SVDs.

use super::tals::expect_dims;
use super::EstimateSti;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{pseudo_inverse, svd};
use crate::tensor::DenseTensor;
use crate::types::{CMat, C64};

/// Short-term estimator that first strips the known activation patterns with
/// a matched filter, `Ỹ = [Y]₍₃₎ᵀ (Sᵀ)⁺`, then factors each column of `Ỹ`
/// (an `L×M×P` tensor that is rank one in the noiseless case) through a
/// truncated HOSVD. The cube root of the leading core entry distributes the
/// column's magnitude evenly over the three singular vectors; the leftover
/// per-column complex scale lands in the usual ambiguity class.
///
/// Requires `K ≥ N` so the matched filter is well posed. All-zero filtered
/// columns produce zero estimates and are reported in `degenerate_columns`.
pub fn hosvd_sti(y: &DenseTensor, s: &CMat, cfg: &SystemConfig) -> Result<EstimateSti> {
    expect_dims(y, s, cfg, 4)?;
    if cfg.k < cfg.n {
        return Err(Error::Identifiability(format!(
            "hosvd_sti requires K >= N (got K={}, N={})",
            cfg.k, cfg.n
        )));
    }
    let (l, m, p, n) = (cfg.l, cfg.m, cfg.p, cfg.n);

    let y3t = y.unfold(3)?.transpose();
    let filtered = y3t * pseudo_inverse(&s.transpose())?; // LMP × N

    let mut g_hat = CMat::zeros(l, n);
    let mut h_hat = CMat::zeros(m, n);
    let mut e_hat = CMat::zeros(p, n);
    let mut degenerate = Vec::new();
    // Columns at the round-off floor of the matched filter carry no signal.
    let zero_tol = f64::EPSILON * filtered.norm() * ((l * m * p).max(n) as f64);

    for ni in 0..n {
        let col = filtered.column(ni);
        if col.norm() <= zero_tol {
            degenerate.push(ni);
            continue;
        }
        // The column is vec(g ∘ h ∘ e) with the receive index fastest, which
        // is exactly the storage order of an L×M×P tensor.
        let col_mat = CMat::from_column_slice(l, m * p, col.as_slice());
        let t = DenseTensor::fold(&col_mat, 1, &[l, m, p])?;

        let u1 = svd(&t.unfold(1)?)?.u;
        let u2 = svd(&t.unfold(2)?)?.u;
        let u3 = svd(&t.unfold(3)?)?.u;
        let core = t
            .n_mode_product(&u1.adjoint(), 1)?
            .n_mode_product(&u2.adjoint(), 2)?
            .n_mode_product(&u3.adjoint(), 3)?;
        let scale: C64 = core.get(&[0, 0, 0]).cbrt();

        for r in 0..l {
            g_hat[(r, ni)] = scale * u1[(r, 0)];
        }
        for r in 0..m {
            h_hat[(r, ni)] = scale * u2[(r, 0)];
        }
        for r in 0..p {
            e_hat[(r, ni)] = scale * u3[(r, 0)];
        }
    }

    Ok(EstimateSti {
        g_hat,
        h_hat,
        e_mat_hat: e_hat,
        residuals: Vec::new(),
        iterations: 0,
        converged: true,
        degenerate_columns: degenerate,
    })
}
