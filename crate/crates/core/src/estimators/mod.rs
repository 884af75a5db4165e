//! Joint channel/imperfection estimators: the iterative trilinear and
//! quadrilinear ALS solvers, the closed-form per-column HOSVD solver, the
//! genie-aided least-squares bounds, the imperfection-blind ALS baseline and
//! scaling-ambiguity removal.

mod ambiguity;
mod hosvd;
mod reference;
mod tals;

pub use ambiguity::{
    align_pair_to_truth_lti, align_pair_to_truth_sti, align_to_truth_lti, align_to_truth_sti,
    normalize_columns_lti, normalize_columns_sti,
};
pub use hosvd::hosvd_sti;
pub use reference::{baseline_lti, baseline_sti, clairvoyant_lti, clairvoyant_sti};
pub(crate) use reference::{clairvoyant_for, ClairvoyantResult};
pub use tals::{tals_lti, tals_lti_from, tals_sti, tals_sti_from};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::types::{CMat, CVec};

/// Estimation result for the long-term imperfection model.
#[derive(Debug, Clone)]
pub struct EstimateLti {
    pub g_hat: CMat,
    pub h_hat: CMat,
    pub e_hat: CVec,
    /// Squared-Frobenius residual of the 1-mode unfolding per iteration.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Estimation result for the short-term imperfection model. The HOSVD solver
/// is closed-form: it reports no residual trace and zero iterations, and
/// lists any all-zero filtered columns it had to skip.
#[derive(Debug, Clone)]
pub struct EstimateSti {
    pub g_hat: CMat,
    pub h_hat: CMat,
    pub e_mat_hat: CMat,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate_columns: Vec<usize>,
}

/// Estimator selector as exposed by the experiment harness and the CLI.
///
/// `Clairvoyant` and `Baseline` follow the imperfection model implied by the
/// frame count: `p == 1` selects the long-term variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    TalsLti,
    TalsSti,
    HosvdSti,
    Clairvoyant,
    Baseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::TalsLti,
        Algorithm::TalsSti,
        Algorithm::HosvdSti,
        Algorithm::Clairvoyant,
        Algorithm::Baseline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::TalsLti => "tals_lti",
            Algorithm::TalsSti => "tals_sti",
            Algorithm::HosvdSti => "hosvd_sti",
            Algorithm::Clairvoyant => "clairvoyant",
            Algorithm::Baseline => "baseline",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown algorithm '{s}' (expected one of tals_lti, tals_sti, hosvd_sti, clairvoyant, baseline)"
                ))
            })
    }
}

/// Outcome of a minimum-time-block check for one estimator.
#[derive(Debug, Clone, Copy)]
pub struct Identifiability {
    pub ok: bool,
    pub required_k: usize,
}

fn ceil_div(num: usize, den: usize) -> usize {
    num.div_ceil(den)
}

/// Minimum number of time-blocks for unique least-squares updates.
///
/// The trilinear solver needs every Khatri-Rao coefficient matrix full rank,
/// giving `K ≥ ⌈N / min(L, M)⌉`; the quadrilinear one relaxes this to
/// `K ≥ ⌈N / min(MP, LP, LM)⌉`; the closed-form HOSVD solver inverts the
/// pattern matrix directly and needs `K ≥ N`. The imperfection-blind baseline
/// estimates only two factors, so frames add no diversity and the trilinear
/// bound applies regardless of `P`.
pub fn check_identifiability(cfg: &SystemConfig, algorithm: Algorithm) -> Identifiability {
    let n = cfg.n;
    let required_k = match algorithm {
        Algorithm::TalsLti => ceil_div(n, cfg.l.min(cfg.m)),
        Algorithm::TalsSti => ceil_div(n, (cfg.m * cfg.p).min(cfg.l * cfg.p).min(cfg.l * cfg.m)),
        Algorithm::HosvdSti => n,
        Algorithm::Clairvoyant => {
            if cfg.p == 1 {
                ceil_div(n, cfg.l.min(cfg.m))
            } else {
                ceil_div(n, (cfg.m * cfg.p).min(cfg.l * cfg.p).min(cfg.l * cfg.m))
            }
        }
        Algorithm::Baseline => ceil_div(n, cfg.l.min(cfg.m)),
    };
    Identifiability {
        ok: cfg.k >= required_k,
        required_k,
    }
}
