//! Benchmark estimators: the genie-aided single-shot LS bounds and the
//! imperfection-blind ALS baseline that assumes an ideal RIS.

use rand::Rng;

use super::tals::expect_dims;
use super::{EstimateLti, EstimateSti};
use crate::algebra::{khatri_rao, vectorize};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::linalg::pseudo_inverse;
use crate::model::{random_gaussian_mat, ChannelPair, Imperfection};
use crate::tensor::DenseTensor;
use crate::types::{c, CMat, CVec};

fn scaled_kr(s: &CMat, other: &CMat, e: &CVec) -> Result<CMat> {
    let mut kr = khatri_rao(s, other)?;
    for (ni, scale) in e.iter().enumerate() {
        for r in 0..kr.nrows() {
            kr[(r, ni)] *= scale;
        }
    }
    Ok(kr)
}

/// Genie-aided LS for the long-term model: every factor is solved once from
/// its conditional LS update with the true remaining factors substituted.
/// Lower bound for the NMSE curves.
pub fn clairvoyant_lti(
    y: &DenseTensor,
    s: &CMat,
    truth: &ChannelPair,
    e_true: &CVec,
    cfg: &SystemConfig,
) -> Result<EstimateLti> {
    expect_dims(y, s, cfg, 3)?;
    let y1 = y.unfold(1)?;
    let y2 = y.unfold(2)?;

    let g_hat = &y1 * pseudo_inverse(&scaled_kr(s, &truth.h, e_true)?.transpose())?;
    let h_hat = &y2 * pseudo_inverse(&scaled_kr(s, &truth.g, e_true)?.transpose())?;
    let kr3 = khatri_rao(s, &khatri_rao(&truth.h, &truth.g)?)?;
    let e_hat = pseudo_inverse(&kr3)? * vectorize(&y1);

    let residual = (&y1 - &g_hat * scaled_kr(s, &h_hat, &e_hat)?.transpose()).norm_squared();
    Ok(EstimateLti {
        g_hat,
        h_hat,
        e_hat,
        residuals: vec![residual],
        iterations: 1,
        converged: true,
    })
}

/// Genie-aided LS for the short-term model.
pub fn clairvoyant_sti(
    y: &DenseTensor,
    s: &CMat,
    truth: &ChannelPair,
    e_true: &CMat,
    cfg: &SystemConfig,
) -> Result<EstimateSti> {
    expect_dims(y, s, cfg, 4)?;
    let y1 = y.unfold(1)?;
    let y2 = y.unfold(2)?;
    let y4 = y.unfold(4)?;

    let g_hat = &y1 * pseudo_inverse(&khatri_rao(e_true, &khatri_rao(s, &truth.h)?)?.transpose())?;
    let h_hat = &y2 * pseudo_inverse(&khatri_rao(e_true, &khatri_rao(s, &truth.g)?)?.transpose())?;
    let e_hat =
        &y4 * pseudo_inverse(&khatri_rao(s, &khatri_rao(&truth.h, &truth.g)?)?.transpose())?;

    let residual =
        (&y1 - &g_hat * khatri_rao(&e_hat, &khatri_rao(s, &h_hat)?)?.transpose()).norm_squared();
    Ok(EstimateSti {
        g_hat,
        h_hat,
        e_mat_hat: e_hat,
        residuals: vec![residual],
        iterations: 1,
        converged: true,
        degenerate_columns: Vec::new(),
    })
}

/// Dispatches on the stored imperfection kind; used by the harness.
pub enum ClairvoyantResult {
    Lti(EstimateLti),
    Sti(EstimateSti),
}

pub(crate) fn clairvoyant_for(
    y: &DenseTensor,
    s: &CMat,
    truth: &ChannelPair,
    imp: &Imperfection,
    cfg: &SystemConfig,
) -> Result<ClairvoyantResult> {
    Ok(match imp {
        Imperfection::Lti { e, .. } => {
            ClairvoyantResult::Lti(clairvoyant_lti(y, s, truth, e, cfg)?)
        }
        Imperfection::Sti { e, .. } => {
            ClairvoyantResult::Sti(clairvoyant_sti(y, s, truth, e, cfg)?)
        }
    })
}

fn stop(residuals: &[f64], delta: f64) -> bool {
    match residuals {
        [] => false,
        [.., last] if *last <= delta => true,
        [.., prev, last] => (last - prev).abs() <= delta,
        _ => false,
    }
}

/// Two-factor ALS that ignores imperfections: the coefficient vector is
/// frozen at all-ones, exactly the estimator built for an ideal RIS. Kept as
/// the degraded benchmark in the sweep curves.
pub fn baseline_lti(
    y: &DenseTensor,
    s: &CMat,
    cfg: &SystemConfig,
    rng: &mut impl Rng,
) -> Result<EstimateLti> {
    expect_dims(y, s, cfg, 3)?;
    let y1 = y.unfold(1)?;
    let y2 = y.unfold(2)?;
    let ones = CVec::from_element(cfg.n, c(1.0, 0.0));

    let mut h_hat = random_gaussian_mat(cfg.m, cfg.n, rng);
    let mut g_hat = CMat::zeros(cfg.l, cfg.n);
    let mut residuals = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        let coeff_g = khatri_rao(s, &h_hat)?;
        g_hat = &y1 * pseudo_inverse(&coeff_g.transpose())?;
        let coeff_h = khatri_rao(s, &g_hat)?;
        h_hat = &y2 * pseudo_inverse(&coeff_h.transpose())?;

        let recon = &g_hat * khatri_rao(s, &h_hat)?.transpose();
        residuals.push((&y1 - recon).norm_squared());
        if stop(&residuals, cfg.delta) {
            converged = true;
            break;
        }
    }

    Ok(EstimateLti {
        g_hat,
        h_hat,
        e_hat: ones,
        iterations: residuals.len(),
        converged,
        residuals,
    })
}

/// Short-term counterpart of [`baseline_lti`]: frames are fitted with the
/// imperfection matrix frozen at all-ones.
pub fn baseline_sti(
    y: &DenseTensor,
    s: &CMat,
    cfg: &SystemConfig,
    rng: &mut impl Rng,
) -> Result<EstimateSti> {
    expect_dims(y, s, cfg, 4)?;
    let y1 = y.unfold(1)?;
    let y2 = y.unfold(2)?;
    let ones = CMat::from_element(cfg.p, cfg.n, c(1.0, 0.0));

    let mut h_hat = random_gaussian_mat(cfg.m, cfg.n, rng);
    let mut g_hat = CMat::zeros(cfg.l, cfg.n);
    let mut residuals = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        let coeff_g = khatri_rao(&ones, &khatri_rao(s, &h_hat)?)?;
        g_hat = &y1 * pseudo_inverse(&coeff_g.transpose())?;
        let coeff_h = khatri_rao(&ones, &khatri_rao(s, &g_hat)?)?;
        h_hat = &y2 * pseudo_inverse(&coeff_h.transpose())?;

        let recon = &g_hat * khatri_rao(&ones, &khatri_rao(s, &h_hat)?)?.transpose();
        residuals.push((&y1 - recon).norm_squared());
        if stop(&residuals, cfg.delta) {
            converged = true;
            break;
        }
    }

    Ok(EstimateSti {
        g_hat,
        h_hat,
        e_mat_hat: ones,
        iterations: residuals.len(),
        converged,
        residuals,
        degenerate_columns: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{align_to_truth_lti, tals_lti};
    use crate::harness::nmse;
    use crate::model::Imperfection;
    use crate::model::{
        design_ris_patterns, gen_imperfections, gen_rayleigh_channels, synthesize_rx,
        ImperfectionKind,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn make_cfg(snr_db: f64, r_b: f64) -> SystemConfig {
        SystemConfig {
            n: 4,
            k: 8,
            p: 1,
            snr_db,
            r_b,
            delta: 1e-12,
            ..SystemConfig::default()
        }
    }

    fn make_case(
        cfg: &SystemConfig,
        seed: u64,
    ) -> (ChannelPair, CVec, crate::model::RisPatterns, DenseTensor) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = gen_rayleigh_channels(cfg, &mut rng);
        let pat = design_ris_patterns(cfg);
        let imp = gen_imperfections(cfg, ImperfectionKind::Lti, &mut rng);
        let e = match &imp {
            Imperfection::Lti { e, .. } => e.clone(),
            _ => unreachable!(),
        };
        let rx = synthesize_rx(cfg, &ch, &pat, &imp, &mut rng).unwrap();
        (ch, e, pat, rx.y)
    }

    #[test]
    fn clairvoyant_exact_on_noiseless_data() {
        let cfg = make_cfg(f64::INFINITY, 0.5);
        let (ch, e, pat, y) = make_case(&cfg, 301);
        let est = clairvoyant_lti(&y, &pat.s, &ch, &e, &cfg).unwrap();
        assert!(nmse(&ch.h, &est.h_hat).unwrap() < 1e-24);
        assert!(nmse(&ch.g, &est.g_hat).unwrap() < 1e-24);
        let e_err: f64 = est
            .e_hat
            .iter()
            .zip(e.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        assert!(e_err < 1e-24);
    }

    #[test]
    fn clairvoyant_not_worse_than_tals_on_average() {
        // The genie bound sits below the blind estimator in the mean; single
        // runs can cross by a hair, so the ordering is checked on the
        // average at the usual benchmark dimensions.
        let cfg = SystemConfig {
            n: 8,
            k: 20,
            p: 1,
            snr_db: 20.0,
            r_b: 0.5,
            delta: 1e-8,
            ..SystemConfig::default()
        };
        let runs = 40;
        let (mut sum_t, mut sum_c) = (0.0, 0.0);
        for seed in 0..runs {
            let (ch, e, pat, y) = make_case(&cfg, 400 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let mut tals = tals_lti(&y, &pat.s, &cfg, &mut rng).unwrap();
            let mut cl = clairvoyant_lti(&y, &pat.s, &ch, &e, &cfg).unwrap();
            align_to_truth_lti(&mut tals, &ch);
            align_to_truth_lti(&mut cl, &ch);
            sum_t += nmse(&ch.h, &tals.h_hat).unwrap();
            sum_c += nmse(&ch.h, &cl.h_hat).unwrap();
        }
        // Strict per-run (or even small-sample mean) ordering is not a
        // theorem: the converged ALS solves nearly the same LS systems, so
        // crossings of a fraction of a dB occur. Half a dB of slack covers
        // them.
        assert!(
            sum_c <= sum_t * 1.12,
            "clairvoyant mean {sum_c} above tals mean {sum_t}"
        );
    }

    #[test]
    fn clairvoyant_linear_snr_decay() {
        // Ten times the SNR, about a tenth of the NMSE.
        let mut acc = Vec::new();
        for snr in [20.0, 30.0] {
            let cfg = make_cfg(snr, 0.5);
            let mut total = 0.0;
            let runs = 60;
            for seed in 0..runs {
                let (ch, e, pat, y) = make_case(&cfg, 500 + seed);
                let mut est = clairvoyant_lti(&y, &pat.s, &ch, &e, &cfg).unwrap();
                align_to_truth_lti(&mut est, &ch);
                total += nmse(&ch.h, &est.h_hat).unwrap();
            }
            acc.push(total / runs as f64);
        }
        let ratio = acc[0] / acc[1];
        assert!((4.0..25.0).contains(&ratio), "decay ratio {ratio}");
    }

    #[test]
    fn baseline_recovers_clean_planted_factors() {
        let cfg = make_cfg(f64::INFINITY, 0.0);
        let (ch, _, pat, y) = make_case(&cfg, 601);
        let mut rng = ChaCha8Rng::seed_from_u64(602);
        let mut est = baseline_lti(&y, &pat.s, &cfg, &mut rng).unwrap();
        align_to_truth_lti(&mut est, &ch);
        let worst = est
            .h_hat
            .iter()
            .zip(ch.h.iter())
            .chain(est.g_hat.iter().zip(ch.g.iter()))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-6, "max entrywise error {worst}");
    }

    #[test]
    fn baseline_absorbs_static_imperfections_into_g() {
        // Static unit-modulus imperfections are exactly a column rescaling of
        // G, so the two-factor fit still matches the data and truth-aided
        // normalization recovers both channels. The failure mode only shows
        // up once imperfections vary across frames.
        let cfg = SystemConfig {
            max_iters: 200,
            ..make_cfg(f64::INFINITY, 0.5)
        };
        let (ch, _, pat, y) = make_case(&cfg, 701);
        let mut rng = ChaCha8Rng::seed_from_u64(702);
        let mut base = baseline_lti(&y, &pat.s, &cfg, &mut rng).unwrap();
        align_to_truth_lti(&mut base, &ch);
        assert!(nmse(&ch.h, &base.h_hat).unwrap() < 1e-10);
        assert!(nmse(&ch.g, &base.g_hat).unwrap() < 1e-10);
    }

    #[test]
    fn baseline_floors_on_frame_varying_imperfections() {
        // Per-frame imperfection draws cannot be absorbed by any static
        // column scaling, so the ideal-RIS baseline keeps a large channel
        // error even on noiseless data while the frame-aware solver is exact.
        let cfg = SystemConfig {
            n: 4,
            k: 8,
            p: 3,
            snr_db: f64::INFINITY,
            r_b: 0.5,
            delta: 1e-12,
            max_iters: 200,
            ..SystemConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(801);
        let ch = gen_rayleigh_channels(&cfg, &mut rng);
        let pat = design_ris_patterns(&cfg);
        let imp = gen_imperfections(&cfg, ImperfectionKind::Sti, &mut rng);
        let rx = synthesize_rx(&cfg, &ch, &pat, &imp, &mut rng).unwrap();

        let mut base = baseline_sti(&rx.y, &pat.s, &cfg, &mut rng).unwrap();
        let mut tals = crate::estimators::tals_sti(&rx.y, &pat.s, &cfg, &mut rng).unwrap();
        crate::estimators::align_pair_to_truth_sti(&mut base, &ch);
        crate::estimators::align_to_truth_sti(&mut tals, &ch);
        let nm_base = nmse(&ch.h, &base.h_hat).unwrap();
        let nm_tals = nmse(&ch.h, &tals.h_hat).unwrap();
        assert!(nm_tals < 1e-10, "frame-aware solver not exact: {nm_tals}");
        assert!(nm_base > 1e-3, "baseline unexpectedly accurate: {nm_base}");
    }
}
