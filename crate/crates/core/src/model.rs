//! Signal synthesis: RIS activation patterns, channel realizations,
//! imperfection draws and the noisy received tensors for both imperfection
//! models.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{ChannelModel, SystemConfig};
use crate::error::{Error, Result};
use crate::tensor::{parafac3_reconstruct, parafac4_reconstruct, DenseTensor};
use crate::types::{c, cis, CMat, CVec, C64};

/// RIS activation patterns, one row per time-block. Entries are unit modulus.
#[derive(Debug, Clone)]
pub struct RisPatterns {
    pub s: CMat,
}

/// Tx-RIS channel `H (M×N)` and RIS-Rx channel `G (L×N)`.
#[derive(Debug, Clone)]
pub struct ChannelPair {
    pub h: CMat,
    pub g: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImperfectionKind {
    Lti,
    Sti,
}

/// Per-element perturbation coefficients with the impaired positions.
///
/// Long-term: a static unit-modulus phase vector over the training window.
/// Short-term: per-frame amplitude/phase coefficients; non-impaired entries
/// stay at one in every frame.
#[derive(Debug, Clone)]
pub enum Imperfection {
    Lti { e: CVec, mask: Vec<bool> },
    Sti { e: CMat, mask: Vec<bool> },
}

impl Imperfection {
    pub fn kind(&self) -> ImperfectionKind {
        match self {
            Imperfection::Lti { .. } => ImperfectionKind::Lti,
            Imperfection::Sti { .. } => ImperfectionKind::Sti,
        }
    }

    pub fn mask(&self) -> &[bool] {
        match self {
            Imperfection::Lti { mask, .. } | Imperfection::Sti { mask, .. } => mask,
        }
    }
}

/// Received tensor with the noiseless part kept for SNR bookkeeping.
#[derive(Debug, Clone)]
pub struct RxTensor {
    pub y: DenseTensor,
    pub noiseless: DenseTensor,
}

/// Truncated DFT activation patterns.
///
/// For `K ≥ N` the patterns are the first `N` columns of the `K×K` DFT
/// matrix, so `SᴴS = K·I_N`. For `K < N` they are the first `K` rows of the
/// `N×N` DFT matrix, a Vandermonde section with distinct unit-circle nodes.
/// Angles are reduced modulo the DFT size before evaluation to keep the
/// roots of unity accurate.
pub fn design_ris_patterns(cfg: &SystemConfig) -> RisPatterns {
    let (k, n) = (cfg.k, cfg.n);
    let d = k.max(n);
    let s = CMat::from_fn(k, n, |ki, ni| {
        let phase = ((ki * ni) % d) as f64;
        cis(-TAU * phase / d as f64)
    });
    RisPatterns { s }
}

fn standard_complex(rng: &mut impl Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im) / c(2.0f64.sqrt(), 0.0)
}

/// Fills column-major so the draw order is independent of matrix shape
/// changes elsewhere.
pub(crate) fn random_gaussian_mat(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    let data: Vec<C64> = (0..rows * cols).map(|_| standard_complex(rng)).collect();
    CMat::from_vec(rows, cols, data)
}

/// i.i.d. circularly-symmetric complex Gaussian channels, unit entry variance.
pub fn gen_rayleigh_channels(cfg: &SystemConfig, rng: &mut impl Rng) -> ChannelPair {
    let h = random_gaussian_mat(cfg.m, cfg.n, rng);
    let g = random_gaussian_mat(cfg.l, cfg.n, rng);
    ChannelPair { h, g }
}

/// Half-wavelength ULA response, unit-modulus entries.
fn ula_response(count: usize, angle: f64) -> CVec {
    CVec::from_fn(count, |i, _| cis(PI * i as f64 * angle.sin()))
}

/// Half-wavelength URA response on an `n1 × n2` grid, vectorized with the
/// first grid axis varying fastest.
fn ura_response(n1: usize, n2: usize, azimuth: f64, elevation: f64) -> CVec {
    let u = elevation.sin() * azimuth.cos();
    let v = elevation.sin() * azimuth.sin();
    CVec::from_fn(n1 * n2, |i, _| {
        let i1 = (i % n1) as f64;
        let i2 = (i / n1) as f64;
        cis(PI * (i1 * u + i2 * v))
    })
}

/// Factorization of `n` as `n1 × n2` with `n1 ≤ n2` minimizing `|n1 - n2|`.
/// Primes degrade to a 1 × n grid.
pub fn ris_grid_dims(n: usize) -> (usize, usize) {
    let mut n1 = 1;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n1 = d;
        }
        d += 1;
    }
    (n1, n / n1)
}

/// Geometric channels: one path on the Tx-RIS link, two on the RIS-Rx link.
/// Path gains are unit modulus with uniform phase; each link is normalized by
/// the square root of its path count.
pub fn gen_mmwave_channels(cfg: &SystemConfig, rng: &mut impl Rng) -> ChannelPair {
    let (n1, n2) = ris_grid_dims(cfg.n);
    let azimuth = |rng: &mut dyn rand::RngCore| (rng.random::<f64>() - 0.5) * PI;
    let elevation = |rng: &mut dyn rand::RngCore| rng.random::<f64>() * PI / 2.0;

    // Tx-RIS: single path.
    let theta_tx = azimuth(rng);
    let (az_h, el_h) = (azimuth(rng), elevation(rng));
    let gain_h = cis(rng.random::<f64>() * TAU);
    let a_tx = ula_response(cfg.m, theta_tx);
    let a_ris_h = ura_response(n1, n2, az_h, el_h);
    let h = (&a_tx * a_ris_h.transpose()) * gain_h;

    // RIS-Rx: two paths.
    let mut g = CMat::zeros(cfg.l, cfg.n);
    for _ in 0..2 {
        let theta_rx = azimuth(rng);
        let (az_g, el_g) = (azimuth(rng), elevation(rng));
        let gain = cis(rng.random::<f64>() * TAU);
        let a_rx = ula_response(cfg.l, theta_rx);
        let a_ris_g = ura_response(n1, n2, az_g, el_g);
        g += (&a_rx * a_ris_g.transpose()) * gain;
    }
    g /= c(2.0f64.sqrt(), 0.0);

    ChannelPair { h, g }
}

pub fn gen_channels(cfg: &SystemConfig, rng: &mut impl Rng) -> ChannelPair {
    match cfg.channel_model {
        ChannelModel::Rayleigh => gen_rayleigh_channels(cfg, rng),
        ChannelModel::Mmwave => gen_mmwave_channels(cfg, rng),
    }
}

/// Draws `round(N·R_B)` impaired positions without replacement and the
/// corresponding perturbation coefficients. Long-term impairments are pure
/// phase rotations; short-term ones draw an amplitude in [0, 1] and a phase
/// per frame.
pub fn gen_imperfections(
    cfg: &SystemConfig,
    kind: ImperfectionKind,
    rng: &mut impl Rng,
) -> Imperfection {
    let n = cfg.n;
    let n_b = ((n as f64) * cfg.r_b).round() as usize;
    let n_b = n_b.min(n);
    let mut mask = vec![false; n];
    for idx in rand::seq::index::sample(rng, n, n_b) {
        mask[idx] = true;
    }
    match kind {
        ImperfectionKind::Lti => {
            let mut e = CVec::from_element(n, c(1.0, 0.0));
            for (ni, &impaired) in mask.iter().enumerate() {
                if impaired {
                    e[ni] = cis(rng.random::<f64>() * TAU);
                }
            }
            Imperfection::Lti { e, mask }
        }
        ImperfectionKind::Sti => {
            let mut e = CMat::from_element(cfg.p, n, c(1.0, 0.0));
            for ni in 0..n {
                if !mask[ni] {
                    continue;
                }
                for pi in 0..cfg.p {
                    let alpha = rng.random::<f64>();
                    let theta = rng.random::<f64>() * TAU;
                    e[(pi, ni)] = cis(theta) * alpha;
                }
            }
            Imperfection::Sti { e, mask }
        }
    }
}

fn noise_sigma(noiseless: &DenseTensor, snr_db: f64) -> f64 {
    let snr_lin = 10f64.powf(snr_db / 10.0);
    (noiseless.norm_sq() / (noiseless.len() as f64 * snr_lin)).sqrt()
}

fn add_noise(noiseless: &DenseTensor, snr_db: f64, rng: &mut impl Rng) -> DenseTensor {
    if snr_db.is_infinite() {
        return noiseless.clone();
    }
    let sigma = noise_sigma(noiseless, snr_db);
    let mut y = noiseless.clone();
    let dims = y.dims().to_vec();
    let mut idx = vec![0usize; dims.len()];
    let total: usize = dims.iter().product();
    for lin in 0..total {
        let mut rem = lin;
        for (k, &d) in dims.iter().enumerate() {
            idx[k] = rem % d;
            rem /= d;
        }
        let v = standard_complex(rng) * sigma;
        y.set(&idx, y.get(&idx) + v);
    }
    y
}

/// Synthesizes the received tensor for the given realization. The pilot
/// matrix is the identity, so the long-term model yields an `L×M×K` tensor
/// with frontal slices `G diag(e ⊙ s[k]) Hᵀ`, and the short-term model an
/// `L×M×K×P` tensor with slices `G D_p(E) D_k(S) Hᵀ`. Noise is complex
/// Gaussian scaled so the realized signal-to-noise energy ratio matches
/// `snr_db` in expectation.
pub fn synthesize_rx(
    cfg: &SystemConfig,
    channels: &ChannelPair,
    patterns: &RisPatterns,
    imperfection: &Imperfection,
    rng: &mut impl Rng,
) -> Result<RxTensor> {
    let s = &patterns.s;
    if channels.h.shape() != (cfg.m, cfg.n) || channels.g.shape() != (cfg.l, cfg.n) {
        return Err(Error::dims(format!(
            "channels H {:?} / G {:?} inconsistent with config (m={}, l={}, n={})",
            channels.h.shape(),
            channels.g.shape(),
            cfg.m,
            cfg.l,
            cfg.n
        )));
    }
    if s.shape() != (cfg.k, cfg.n) {
        return Err(Error::dims(format!(
            "patterns {:?} inconsistent with config (k={}, n={})",
            s.shape(),
            cfg.k,
            cfg.n
        )));
    }
    let noiseless = match imperfection {
        Imperfection::Lti { e, .. } => {
            if e.len() != cfg.n {
                return Err(Error::dims(format!(
                    "imperfection vector length {} != n={}",
                    e.len(),
                    cfg.n
                )));
            }
            // Effective third factor: row k is e ⊙ s[k].
            let s_bar = CMat::from_fn(cfg.k, cfg.n, |ki, ni| s[(ki, ni)] * e[ni]);
            parafac3_reconstruct(&channels.g, &channels.h, &s_bar)?
        }
        Imperfection::Sti { e, .. } => {
            if e.shape() != (cfg.p, cfg.n) {
                return Err(Error::dims(format!(
                    "imperfection matrix {:?} != (p={}, n={})",
                    e.shape(),
                    cfg.p,
                    cfg.n
                )));
            }
            parafac4_reconstruct(&channels.g, &channels.h, s, e)?
        }
    };
    let y = add_noise(&noiseless, cfg.snr_db, rng);
    Ok(RxTensor { y, noiseless })
}
