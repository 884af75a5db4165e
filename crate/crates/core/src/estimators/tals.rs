//! Alternating least-squares estimators for the trilinear (long-term) and
//! quadrilinear (short-term) received-signal models.
//!
//! Each factor is refreshed by a conditional LS solve against the matching
//! unfolding while the others stay fixed, with the known activation patterns
//! held constant throughout. The residual is the squared Frobenius error of
//! the 1-mode unfolding; iteration stops once the change between successive
//! residuals drops to the configured threshold (or the residual itself does,
//! which covers exact fits reached in the very first sweep).

use rand::Rng;

use super::{EstimateLti, EstimateSti};
use crate::algebra::{khatri_rao, vectorize};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::pseudo_inverse;
use crate::model::random_gaussian_mat;
use crate::tensor::DenseTensor;
use crate::types::{CMat, CVec};

pub(super) fn expect_dims(
    y: &DenseTensor,
    s: &CMat,
    cfg: &SystemConfig,
    order: usize,
) -> Result<()> {
    if y.order() != order {
        return Err(Error::dims(format!(
            "expected an order-{order} received tensor, got order {}",
            y.order()
        )));
    }
    let mut want = vec![cfg.l, cfg.m, cfg.k];
    if order == 4 {
        want.push(cfg.p);
    }
    if y.dims() != want.as_slice() {
        return Err(Error::dims(format!(
            "received tensor dims {:?} do not match config {:?}",
            y.dims(),
            want
        )));
    }
    if s.shape() != (cfg.k, cfg.n) {
        return Err(Error::dims(format!(
            "pattern matrix {:?} does not match (k={}, n={})",
            s.shape(),
            cfg.k,
            cfg.n
        )));
    }
    Ok(())
}

/// `(S ⋄ H) diag(e)`: the coefficient matrix whose transpose multiplies a
/// factor in the trilinear model.
fn scaled_khatri_rao(s: &CMat, other: &CMat, e: &CVec) -> Result<CMat> {
    let mut kr = khatri_rao(s, other)?;
    for (ni, scale) in e.iter().enumerate() {
        for r in 0..kr.nrows() {
            kr[(r, ni)] *= scale;
        }
    }
    Ok(kr)
}

fn stop(residuals: &[f64], delta: f64) -> bool {
    match residuals {
        [] => false,
        [.., last] if *last <= delta => true,
        [.., prev, last] => (last - prev).abs() <= delta,
        _ => false,
    }
}

/// Trilinear ALS for the long-term model. `H` and `e` start from random
/// complex Gaussian draws; the first LS sweep absorbs their scale.
pub fn tals_lti(
    y: &DenseTensor,
    s: &CMat,
    cfg: &SystemConfig,
    rng: &mut impl Rng,
) -> Result<EstimateLti> {
    let h0 = random_gaussian_mat(cfg.m, cfg.n, rng);
    let e0 = CVec::from_column_slice(random_gaussian_mat(cfg.n, 1, rng).as_slice());
    tals_lti_from(y, s, cfg, h0, e0)
}

/// Same solver with explicit starting factors.
pub fn tals_lti_from(
    y: &DenseTensor,
    s: &CMat,
    cfg: &SystemConfig,
    h0: CMat,
    e0: CVec,
) -> Result<EstimateLti> {
    expect_dims(y, s, cfg, 3)?;
    let y1 = y.unfold(1)?;
    let y2 = y.unfold(2)?;
    let y1_vec = vectorize(&y1);

    let mut h_hat = h0;
    let mut e_hat = e0;
    let mut g_hat = CMat::zeros(cfg.l, cfg.n);
    let mut residuals = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        let coeff_g = scaled_khatri_rao(s, &h_hat, &e_hat)?;
        g_hat = &y1 * pseudo_inverse(&coeff_g.transpose())?;

        let coeff_h = scaled_khatri_rao(s, &g_hat, &e_hat)?;
        h_hat = &y2 * pseudo_inverse(&coeff_h.transpose())?;

        let kr3 = khatri_rao(s, &khatri_rao(&h_hat, &g_hat)?)?;
        e_hat = pseudo_inverse(&kr3)? * &y1_vec;

        let recon = &g_hat * scaled_khatri_rao(s, &h_hat, &e_hat)?.transpose();
        residuals.push((&y1 - recon).norm_squared());
        if stop(&residuals, cfg.delta) {
            converged = true;
            break;
        }
    }

    Ok(EstimateLti {
        g_hat,
        h_hat,
        e_hat,
        iterations: residuals.len(),
        converged,
        residuals,
    })
}

/// Quadrilinear ALS for the short-term model. `H` and `E` start random; the
/// pattern factor is known and never updated.
pub fn tals_sti(
    y: &DenseTensor,
    s: &CMat,
    cfg: &SystemConfig,
    rng: &mut impl Rng,
) -> Result<EstimateSti> {
    let h0 = random_gaussian_mat(cfg.m, cfg.n, rng);
    let e0 = random_gaussian_mat(cfg.p, cfg.n, rng);
    tals_sti_from(y, s, cfg, h0, e0)
}

/// Same solver with explicit starting factors.
pub fn tals_sti_from(
    y: &DenseTensor,
    s: &CMat,
    cfg: &SystemConfig,
    h0: CMat,
    e0: CMat,
) -> Result<EstimateSti> {
    expect_dims(y, s, cfg, 4)?;
    let y1 = y.unfold(1)?;
    let y2 = y.unfold(2)?;
    let y4 = y.unfold(4)?;

    let mut h_hat = h0;
    let mut e_hat = e0;
    let mut g_hat = CMat::zeros(cfg.l, cfg.n);
    let mut residuals = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        let coeff_g = khatri_rao(&e_hat, &khatri_rao(s, &h_hat)?)?;
        g_hat = &y1 * pseudo_inverse(&coeff_g.transpose())?;

        let coeff_h = khatri_rao(&e_hat, &khatri_rao(s, &g_hat)?)?;
        h_hat = &y2 * pseudo_inverse(&coeff_h.transpose())?;

        let coeff_e = khatri_rao(s, &khatri_rao(&h_hat, &g_hat)?)?;
        e_hat = &y4 * pseudo_inverse(&coeff_e.transpose())?;

        let recon = &g_hat * khatri_rao(&e_hat, &khatri_rao(s, &h_hat)?)?.transpose();
        residuals.push((&y1 - recon).norm_squared());
        if stop(&residuals, cfg.delta) {
            converged = true;
            break;
        }
    }

    Ok(EstimateSti {
        g_hat,
        h_hat,
        e_mat_hat: e_hat,
        iterations: residuals.len(),
        converged,
        residuals,
        degenerate_columns: Vec::new(),
    })
}
