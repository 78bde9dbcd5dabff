//! Smoothed Markov measures of every finite order and their infinite mixture.
//!
//! The order-k measure predicts each symbol from additively smoothed counts
//! of its length-k context (truncated to the available prefix near the
//! start). The mixture Σ_k w_k P_k runs over *all* orders k ≥ 0; it is
//! computable exactly in finite time because under truncated contexts every
//! order k ≥ n−1 assigns the same probability to a length-n string, so the
//! tail collapses into a single closed-form term.
//!
//! Two evaluation routes are kept deliberately separate: a direct
//! per-order route built on hash-map count tables ([`table`], [`reference`]),
//! and an incremental O(depth)-per-symbol evaluator ([`evaluator`]) backed by
//! a suffix-chain trie ([`trie`]). Tests pin them against each other.

mod evaluator;
mod reference;
mod table;
pub(crate) mod trie;

pub use evaluator::{PpmEvaluator, PpmMixture};
pub use reference::{
    reference_conditional, reference_mixture_log_prob, reference_truncated_log_prob,
};
pub use table::{markov_conditional, ppm_order_log_prob, ContextCountTable};

use crate::measure::{ConditionalDistribution, LogWeight, SymbolSequence};

/// Additive smoothing constant β for the count estimator
/// P(a|c) = (N(c,a)+β) / (N(c)+β·|A|).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothingRule {
    /// β = 1.
    Laplace,
    /// β = 1/2.
    KrichevskyTrofimov,
}

impl SmoothingRule {
    pub fn beta(&self) -> f64 {
        match self {
            SmoothingRule::Laplace => 1.0,
            SmoothingRule::KrichevskyTrofimov => 0.5,
        }
    }
}

/// Prior weights w_k over Markov orders. Both schemes are strictly positive
/// and sum to 1 over k = 0, 1, 2, …, with closed-form tails.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    /// w_k = 1/(k+1) − 1/(k+2); tail Σ_{k≥K} = 1/(K+1).
    Rational,
    /// w_k = 1/log₂(k+2) − 1/log₂(k+3); tail Σ_{k≥K} = 1/log₂(K+2).
    /// (Index-shifted so the k = 0 term is defined.)
    LogTelescoping,
}

impl WeightScheme {
    /// w_k in linear domain.
    pub fn w(&self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            WeightScheme::Rational => 1.0 / ((k + 1.0) * (k + 2.0)),
            WeightScheme::LogTelescoping => 1.0 / (k + 2.0).log2() - 1.0 / (k + 3.0).log2(),
        }
    }

    /// Σ_{j≥k} w_j in linear domain.
    pub fn tail(&self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            WeightScheme::Rational => 1.0 / (k + 1.0),
            WeightScheme::LogTelescoping => 1.0 / (k + 2.0).log2(),
        }
    }
}

/// 2^e with saturation to 0/∞ outside f64 range. The mixture tail anchors
/// the shared scale from below (z ≥ tail·2^{−S} with tail ≥ 1/(n+1) forces
/// S ≳ −420), so the ∞ branch is unreachable in practice; the 0 branch is
/// the documented birth-underflow of very late orders on low-entropy input,
/// whose true ratio also underflows.
pub(crate) fn pow2(e: i64) -> f64 {
    if e < -1074 {
        0.0
    } else if e > 1023 {
        f64::INFINITY
    } else {
        2.0f64.powi(e as i32)
    }
}

/// Prior weight of Markov order k.
pub fn weight(k: usize, scheme: WeightScheme) -> LogWeight {
    LogWeight::from_linear(scheme.w(k))
}

/// Closed-form tail Σ_{k≥K} weight(k) — what makes the infinite mixture
/// exactly evaluable.
pub fn weight_tail(k: usize, scheme: WeightScheme) -> LogWeight {
    LogWeight::from_linear(scheme.tail(k))
}

/// log Σ_{k=0..∞} w_k · P_k(seq), evaluated exactly: orders k ≥ n−1 all equal
/// P_{n−1}(seq), so the sum is Σ_{k<n−1} w_k P_k + tail(n−1)·P_{n−1}.
pub fn ppm_mixture_log_prob(
    seq: &SymbolSequence,
    smoothing: SmoothingRule,
    scheme: WeightScheme,
) -> LogWeight {
    let mut ev = PpmEvaluator::new(seq.alphabet(), smoothing, scheme);
    for &x in seq.symbols() {
        ev.step(x);
    }
    ev.log_prob()
}

/// One-step conditional of the mixture: entry a is
/// exp(log PPM(history ⧺ a) − log PPM(history)). Sums to 1 within 1e-12.
pub fn ppm_conditional(
    history: &SymbolSequence,
    smoothing: SmoothingRule,
    scheme: WeightScheme,
) -> ConditionalDistribution {
    let mut ev = PpmEvaluator::new(history.alphabet(), smoothing, scheme);
    for &x in history.symbols() {
        ev.step(x);
    }
    ev.conditional()
}
