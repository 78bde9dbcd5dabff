//! From-scratch mixture evaluation straight off the definition: one
//! independent per-order pass per term, combined in log domain. Quadratic and
//! meant for n ≤ a few hundred; the incremental evaluator is pinned against
//! this route.

use crate::measure::{log_sum_exp, ConditionalDistribution, LogWeight, SymbolSequence};

use super::{ppm_order_log_prob, weight, weight_tail, SmoothingRule, WeightScheme};

/// Exact infinite mixture: Σ_{k<n−1} w_k P_k(seq) + tail(n−1)·P_{n−1}(seq).
pub fn reference_mixture_log_prob(
    seq: &SymbolSequence,
    smoothing: SmoothingRule,
    scheme: WeightScheme,
) -> LogWeight {
    let n = seq.len();
    if n == 0 {
        return LogWeight::ONE;
    }
    let mut terms = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(1) {
        terms.push(weight(k, scheme) * ppm_order_log_prob(seq, k, smoothing));
    }
    terms.push(weight_tail(n - 1, scheme) * ppm_order_log_prob(seq, n - 1, smoothing));
    log_sum_exp(&terms)
}

/// Naive truncation Σ_{k≤max_order} w_k P_k(seq) — a strict lower bound on
/// the full mixture, used to audit the closed-form tail.
pub fn reference_truncated_log_prob(
    seq: &SymbolSequence,
    max_order: usize,
    smoothing: SmoothingRule,
    scheme: WeightScheme,
) -> LogWeight {
    if seq.is_empty() {
        // Σ_{k≤K} w_k < 1: even the empty string loses the tail mass here.
        return LogWeight::from_linear(1.0 - scheme.tail(max_order + 1));
    }
    let terms: Vec<LogWeight> = (0..=max_order)
        .map(|k| weight(k, scheme) * ppm_order_log_prob(seq, k, smoothing))
        .collect();
    log_sum_exp(&terms)
}

/// Mixture conditional by the ratio definition:
/// P(a|h) = PPM(h ⧺ a) / PPM(h), each side evaluated from scratch.
pub fn reference_conditional(
    history: &SymbolSequence,
    smoothing: SmoothingRule,
    scheme: WeightScheme,
) -> ConditionalDistribution {
    let alphabet = history.alphabet();
    let denom = reference_mixture_log_prob(history, smoothing, scheme);
    let probs: Vec<LogWeight> = alphabet
        .symbols()
        .map(|a| {
            let num = reference_mixture_log_prob(&history.extended(a), smoothing, scheme);
            LogWeight::new(num.ln() - denom.ln())
        })
        .collect();
    ConditionalDistribution::new(alphabet, probs)
}
