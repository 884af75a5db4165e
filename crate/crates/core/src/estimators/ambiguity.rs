//! Removal of the per-column complex scaling ambiguity left by the PARAFAC
//! factorizations. Because the activation patterns are known, columns never
//! permute; only reciprocal scales move between the factors.

use super::{EstimateLti, EstimateSti};
use crate::model::ChannelPair;
use crate::types::{c, CMat, C64};

/// LS-optimal scalar aligning `est` to `truth`: minimizes ‖truth − a·est‖₂.
/// `None` when the estimated column is zero.
fn ls_scale(est: nalgebra::DVectorView<C64>, truth: nalgebra::DVectorView<C64>) -> Option<C64> {
    let denom: f64 = est.iter().map(|z| z.norm_sqr()).sum();
    if denom == 0.0 {
        return None;
    }
    let num: C64 = est
        .iter()
        .zip(truth.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Some(num / denom)
}

fn scale_column(m: &mut CMat, col: usize, s: C64) {
    for r in 0..m.nrows() {
        m[(r, col)] *= s;
    }
}

/// Aligns a column pair of (Ĥ, Ĝ) against the true channels and pushes the
/// compensating reciprocal scale into the imperfection factor via the
/// supplied closure. Returns the columns that could not be normalized.
fn align_columns(
    h_hat: &mut CMat,
    g_hat: &mut CMat,
    truth: &ChannelPair,
    mut scale_e: impl FnMut(usize, C64),
) -> Vec<usize> {
    let n = h_hat.ncols();
    let mut skipped = Vec::new();
    for ni in 0..n {
        let lambda = ls_scale(h_hat.column(ni), truth.h.column(ni));
        let mu = ls_scale(g_hat.column(ni), truth.g.column(ni));
        let (lambda, mu) = match (lambda, mu) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                skipped.push(ni);
                continue;
            }
        };
        let prod = lambda * mu;
        if prod.norm_sqr() == 0.0 {
            skipped.push(ni);
            continue;
        }
        scale_column(h_hat, ni, lambda);
        scale_column(g_hat, ni, mu);
        // λ·μ·ν = 1 keeps the reconstruction unchanged.
        scale_e(ni, c(1.0, 0.0) / prod);
    }
    skipped
}

/// Truth-aided normalization for the long-term estimate.
pub fn align_to_truth_lti(est: &mut EstimateLti, truth: &ChannelPair) -> Vec<usize> {
    let e = &mut est.e_hat;
    align_columns(&mut est.h_hat, &mut est.g_hat, truth, |ni, nu| {
        e[ni] *= nu;
    })
}

/// Truth-aided normalization for the short-term estimate.
pub fn align_to_truth_sti(est: &mut EstimateSti, truth: &ChannelPair) -> Vec<usize> {
    let e = &mut est.e_mat_hat;
    align_columns(&mut est.h_hat, &mut est.g_hat, truth, |ni, nu| {
        for r in 0..e.nrows() {
            e[(r, ni)] *= nu;
        }
    })
}

/// Truth-aided normalization restricted to the two-factor ambiguity class:
/// one scale per column, applied as `λ` to Ĥ and `1/λ` to Ĝ, with no third
/// factor to absorb a residual. This is the class available to an estimator
/// that assumes a perfect RIS, so any imperfection mismatch stays in the
/// channel estimates; `λ` is the geometric mean of the two one-sided optima,
/// splitting that mismatch evenly between Ĥ and Ĝ.
fn align_pair(h_hat: &mut CMat, g_hat: &mut CMat, truth: &ChannelPair) -> Vec<usize> {
    let n = h_hat.ncols();
    let mut skipped = Vec::new();
    for ni in 0..n {
        let lambda_h = ls_scale(h_hat.column(ni), truth.h.column(ni));
        // 1/λ aligning Ĝ means λ = ‖ĝ‖² / (ĝᴴ g).
        let lambda_g = {
            let col = g_hat.column(ni);
            let denom: C64 = col
                .iter()
                .zip(truth.g.column(ni).iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let num: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            if denom.norm_sqr() == 0.0 || num == 0.0 {
                None
            } else {
                Some(c(num, 0.0) / denom)
            }
        };
        let lambda = match (lambda_h, lambda_g) {
            (Some(a), Some(b)) if (a * b).norm_sqr() > 0.0 => (a * b).sqrt(),
            (Some(a), _) if a.norm_sqr() > 0.0 => a,
            _ => {
                skipped.push(ni);
                continue;
            }
        };
        scale_column(h_hat, ni, lambda);
        scale_column(g_hat, ni, c(1.0, 0.0) / lambda);
    }
    skipped
}

/// Two-factor truth-aided normalization for a long-term estimate; the
/// imperfection vector is left untouched.
pub fn align_pair_to_truth_lti(est: &mut EstimateLti, truth: &ChannelPair) -> Vec<usize> {
    align_pair(&mut est.h_hat, &mut est.g_hat, truth)
}

/// Two-factor truth-aided normalization for a short-term estimate; the
/// imperfection matrix is left untouched.
pub fn align_pair_to_truth_sti(est: &mut EstimateSti, truth: &ChannelPair) -> Vec<usize> {
    align_pair(&mut est.h_hat, &mut est.g_hat, truth)
}

/// Scale factor that maps a column to unit norm with a real-positive leading
/// entry. `None` for the zero column.
fn unit_scale(col: nalgebra::DVectorView<C64>) -> Option<C64> {
    let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let lead = col
        .iter()
        .find(|z| z.norm_sqr() > 0.0)
        .copied()
        .unwrap_or(c(1.0, 0.0));
    let phase = lead / lead.norm();
    Some(c(1.0, 0.0) / (phase * norm))
}

/// Truth-free normalization: each column of Ĥ becomes unit norm with a
/// real-positive first nonzero entry, the reciprocal scale moves into Ĝ.
/// Where an element is known to be non-impaired (its entry in the impairment
/// mask is false), its imperfection entry is pinned to one and the leftover
/// scale also moves into Ĝ; otherwise the imperfection scale stays put.
/// Returns the columns that could not be normalized.
pub fn normalize_columns_lti(est: &mut EstimateLti, impaired_mask: Option<&[bool]>) -> Vec<usize> {
    let n = est.h_hat.ncols();
    let mut skipped = Vec::new();
    for ni in 0..n {
        match unit_scale(est.h_hat.column(ni)) {
            Some(t) => {
                scale_column(&mut est.h_hat, ni, t);
                scale_column(&mut est.g_hat, ni, c(1.0, 0.0) / t);
            }
            None => skipped.push(ni),
        }
        if let Some(mask) = impaired_mask {
            if !mask[ni] {
                let ev = est.e_hat[ni];
                if ev.norm_sqr() > 0.0 {
                    est.e_hat[ni] = c(1.0, 0.0);
                    scale_column(&mut est.g_hat, ni, ev);
                }
            }
        }
    }
    skipped
}

/// Truth-free normalization for the short-term estimate; see
/// [`normalize_columns_lti`].
pub fn normalize_columns_sti(est: &mut EstimateSti, impaired_mask: Option<&[bool]>) -> Vec<usize> {
    let n = est.h_hat.ncols();
    let mut skipped = Vec::new();
    for ni in 0..n {
        match unit_scale(est.h_hat.column(ni)) {
            Some(t) => {
                scale_column(&mut est.h_hat, ni, t);
                scale_column(&mut est.g_hat, ni, c(1.0, 0.0) / t);
            }
            None => skipped.push(ni),
        }
        if let Some(mask) = impaired_mask {
            if !mask[ni] {
                // First frame of a clean element carries coefficient one.
                let ev = est.e_mat_hat[(0, ni)];
                if ev.norm_sqr() > 0.0 {
                    let inv = c(1.0, 0.0) / ev;
                    for r in 0..est.e_mat_hat.nrows() {
                        est.e_mat_hat[(r, ni)] *= inv;
                    }
                    scale_column(&mut est.g_hat, ni, ev);
                }
            }
        }
    }
    skipped
}
