//! Fixture builders shared by the estimator benchmarks.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use risce_core::model::{
    design_ris_patterns, gen_channels, gen_imperfections, synthesize_rx, ImperfectionKind,
    RisPatterns,
};
use risce_core::{DenseTensor, SystemConfig};

pub struct Fixture {
    pub cfg: SystemConfig,
    pub patterns: RisPatterns,
    pub y: DenseTensor,
    pub rng: ChaCha8Rng,
}

/// Synthesizes one noisy received tensor for the given scenario; `p = 1`
/// produces the order-3 (long-term) tensor, anything larger the order-4 one.
pub fn fixture(n: usize, k: usize, p: usize, snr_db: f64) -> Fixture {
    let cfg = SystemConfig {
        n,
        k,
        p,
        snr_db,
        ..SystemConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let patterns = design_ris_patterns(&cfg);
    let channels = gen_channels(&cfg, &mut rng);
    let kind = if p == 1 {
        ImperfectionKind::Lti
    } else {
        ImperfectionKind::Sti
    };
    let imp = gen_imperfections(&cfg, kind, &mut rng);
    let rx = synthesize_rx(&cfg, &channels, &patterns, &imp, &mut rng).expect("valid scenario");
    Fixture {
        cfg,
        patterns,
        y: rx.y,
        rng,
    }
}
