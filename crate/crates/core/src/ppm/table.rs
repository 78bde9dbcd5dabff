//! Per-order count tables and the smoothed Markov conditional — the direct,
//! easily auditable bricks under the mixture. The incremental evaluator does
//! not use these; equivalence tests do.

use std::collections::HashMap;

use crate::measure::{Alphabet, ConditionalDistribution, LogWeight, Symbol, SymbolSequence};

use super::SmoothingRule;

/// Occurrence counts N(context, symbol) for one Markov order. Counts only
/// ever increment by one; the total at a context equals the number of
/// positions where it occurred.
#[derive(Clone, Debug)]
pub struct ContextCountTable {
    order: usize,
    counts: HashMap<(Box<[Symbol]>, Symbol), u64>,
    totals: HashMap<Box<[Symbol]>, u64>,
}

impl ContextCountTable {
    pub fn new(order: usize) -> Self {
        ContextCountTable {
            order,
            counts: HashMap::new(),
            totals: HashMap::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn increment(&mut self, context: &[Symbol], symbol: Symbol) {
        debug_assert!(context.len() <= self.order);
        *self.counts.entry((context.into(), symbol)).or_insert(0) += 1;
        *self.totals.entry(context.into()).or_insert(0) += 1;
    }

    pub fn count(&self, context: &[Symbol], symbol: Symbol) -> u64 {
        self.counts
            .get(&(Box::from(context), symbol))
            .copied()
            .unwrap_or(0)
    }

    pub fn context_total(&self, context: &[Symbol]) -> u64 {
        self.totals.get(context).copied().unwrap_or(0)
    }
}

/// P(a|c) = (N(c,a)+β) / (N(c)+β·|A|): strictly positive, sums to 1, and
/// uniform when the context is unseen.
pub fn markov_conditional(
    table: &ContextCountTable,
    context: &[Symbol],
    smoothing: SmoothingRule,
    alphabet: Alphabet,
) -> ConditionalDistribution {
    for &s in context {
        assert!(alphabet.contains(s), "context symbol {s} outside alphabet");
    }
    let beta = smoothing.beta();
    let denom = table.context_total(context) as f64 + beta * alphabet.size() as f64;
    let probs: Vec<f64> = alphabet
        .symbols()
        .map(|a| (table.count(context, a) as f64 + beta) / denom)
        .collect();
    ConditionalDistribution::from_linear(alphabet, &probs)
}

/// log P_k(seq): the prequential product of `markov_conditional` terms, where
/// position i conditions on the last min(k, i−1) symbols and counts reflect
/// positions 1..i−1 only. The empty sequence has probability 1.
pub fn ppm_order_log_prob(seq: &SymbolSequence, k: usize, smoothing: SmoothingRule) -> LogWeight {
    let alphabet = seq.alphabet();
    let xs = seq.symbols();
    let mut table = ContextCountTable::new(k);
    let mut lp = 0.0;
    for i in 0..xs.len() {
        let ctx = &xs[i.saturating_sub(k)..i];
        lp += markov_conditional(&table, ctx, smoothing, alphabet)
            .log_prob(xs[i])
            .ln();
        table.increment(ctx, xs[i]);
    }
    LogWeight::new(lp)
}
