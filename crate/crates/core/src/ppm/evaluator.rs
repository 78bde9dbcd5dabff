//! Incremental evaluation of the full order-mixture, linear in the history.
//!
//! The mixture Σ_k w_k·P_k has one term per Markov order, but after n symbols
//! every order k ≥ n−1 conditions on the entire available history, so all
//! those tails share one value P_{n−1}. The evaluator keeps, for each order
//! that has ever *individualized* (seen a positive context count), the ratio
//!
//! ```text
//! u[k] = w_k · (P_k / U) · 2^(−S)
//! ```
//!
//! against the uniform measure U, in linear space with a shared power-of-two
//! scale S. Orders still riding the uniform factor sequence are covered in
//! closed form by the weight tail, so the per-symbol work is bounded by the
//! longest repeated suffix, not by any order cap.
//!
//! Per symbol: each active order k multiplies u[k] by |A|·f_k(x), where
//! f_k(x) = (c(context⧺x)+β)/(c(context)+β|A|) and the counts come off the
//! suffix chain — the denominator read before the trie extends, the
//! numerator read after (post-extension count minus one ≡ prior occurrences).
//! Rescaling swaps powers of two in and out of S only, so every u[k] retains
//! full relative precision.

use crate::measure::{
    Alphabet, ConditionalDistribution, LogWeight, SequentialMeasure, Symbol, LN_2,
};
use crate::ppm::{pow2, SmoothingRule, WeightScheme};

const SCALE_LIMIT_EXP: i32 = 400;

pub struct PpmEvaluator {
    alphabet: Alphabet,
    smoothing: SmoothingRule,
    weights: WeightScheme,
    trie: super::trie::ContextTrie,
    /// u[k] for individualized orders k = 0..u.len().
    u: Vec<f64>,
    /// Shared scale: true ratio = u[k] · 2^scale_exp.
    scale_exp: i64,
    /// ln of the mixture probability so far.
    log_prob: f64,
}

impl PpmEvaluator {
    pub fn new(alphabet: Alphabet, smoothing: SmoothingRule, weights: WeightScheme) -> Self {
        PpmEvaluator {
            alphabet,
            smoothing,
            weights,
            trie: super::trie::ContextTrie::new(alphabet, usize::MAX, false),
            u: Vec::new(),
            scale_exp: 0,
            log_prob: 0.0,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn n(&self) -> usize {
        self.trie.n()
    }

    /// ln P(x_{1..n}) of the full mixture for the symbols consumed so far.
    pub fn log_prob(&self) -> LogWeight {
        LogWeight::new(self.log_prob)
    }

    /// Individualizes every order whose context count is now positive: such
    /// an order's next factor departs from uniform. Until that moment P_k
    /// equals the uniform-factor product exactly (every preceding step had
    /// count 0 and factor β/(β|A|) = 1/|A|), so the new entry is w_k·2^{−S}.
    fn prepare_orders(&mut self) {
        let n = self.trie.n();
        if n == 0 {
            return;
        }
        // Order k's denominator is positive iff the k-suffix occurred ≥ 2
        // times (the chain covers exactly those depths, see the trie).
        // Order 0's denominator is n > 0. Orders individualize in depth
        // order, so extend the ladder while the context stays repeated.
        let chain = self.trie.chain();
        let mut want = 1; // order 0
        for (idx, &id) in chain.iter().enumerate() {
            if self.trie.node(id).ends.count() >= 2 {
                want = idx + 2; // orders 0..=idx+1
            } else {
                break;
            }
        }
        let base = pow2(-self.scale_exp);
        while self.u.len() < want {
            let k = self.u.len();
            self.u.push(self.weights.w(k) * base);
        }
    }

    /// Scaled mixture mass z = Σ_k u[k] + tail, where the tail covers every
    /// order not yet individualized (all still uniform ⟹ ratio 2^{−S}).
    fn z(&self) -> f64 {
        self.u.iter().sum::<f64>() + self.weights.tail(self.u.len()) * pow2(-self.scale_exp)
    }

    /// Per-order predictive factors |A|·f_k(x → a) for each individualized k,
    /// evaluated against the *current* history. factors[k][a].
    fn order_factors(&self) -> Vec<Vec<f64>> {
        let asize = self.alphabet.size() as usize;
        let beta = self.smoothing.beta();
        let n = self.trie.n() as f64;
        let ba = beta * asize as f64;
        let chain = self.trie.chain();
        let mut out = Vec::with_capacity(self.u.len());
        for k in 0..self.u.len() {
            let mut f = vec![0.0f64; asize];
            if k == 0 {
                let den = n + ba;
                for (a, fa) in f.iter_mut().enumerate() {
                    let num = self
                        .trie
                        .root_child(a as Symbol)
                        .map_or(0, |id| self.trie.node(id).ends.count())
                        as f64;
                    *fa = asize as f64 * (num + beta) / den;
                }
            } else if k - 1 < chain.len() {
                // Context = k-suffix = chain[k−1]; successors = its children.
                // The node's end count includes the current suffix position,
                // which is not a usable context occurrence: subtract one.
                let ctx = chain[k - 1];
                let den = self.trie.node(ctx).ends.count() as f64 - 1.0 + ba;
                for (a, fa) in f.iter_mut().enumerate() {
                    let num = self
                        .trie
                        .node(ctx)
                        .child(a as Symbol)
                        .map_or(0.0, |c| self.trie.node(c).ends.count() as f64);
                    *fa = asize as f64 * (num + beta) / den;
                }
            } else {
                // Off-chain suffix ⟹ the context occurred at most once, i.e.
                // only as the current suffix: zero usable occurrences, so the
                // factor is exactly uniform.
                f.fill(1.0);
            }
            out.push(f);
        }
        out
    }

    /// One-symbol-ahead distribution of the mixture given the history so far.
    pub fn conditional(&mut self) -> ConditionalDistribution {
        self.prepare_orders();
        let asize = self.alphabet.size() as usize;
        let z = self.z();
        let factors = self.order_factors();
        // Everything lives in ratio-to-uniform space: each order contributes
        // u_k·|A|f_k(a), the un-individualized tail contributes its mass
        // once (uniform over symbols), and z normalizes:
        //   P(a) = (Σ_k u_k·|A|f_k(a) + tail_mass) / (|A|·z).
        let tail_mass = z - self.u.iter().sum::<f64>();
        let mut probs = vec![0.0f64; asize];
        for (a, p) in probs.iter_mut().enumerate() {
            let mut acc = tail_mass;
            for (k, f) in factors.iter().enumerate() {
                acc += self.u[k] * f[a];
            }
            *p = acc / (z * asize as f64);
        }
        ConditionalDistribution::from_linear(self.alphabet, &probs)
    }

    /// Consumes one symbol, updating every order's ratio and the running
    /// log-probability.
    pub fn step(&mut self, x: Symbol) {
        assert!(self.alphabet.contains(x), "symbol outside alphabet");
        self.prepare_orders();
        let asize = self.alphabet.size() as f64;
        let beta = self.smoothing.beta();
        let ba = beta * asize;
        let n = self.trie.n();

        // Phase 1: denominators against the current history.
        let chain_len = self.trie.chain().len();
        let mut dens = Vec::with_capacity(self.u.len());
        for k in 0..self.u.len() {
            let den = if k == 0 {
                n as f64
            } else if k - 1 < chain_len {
                self.trie.node(self.trie.chain()[k - 1]).ends.count() as f64 - 1.0
            } else {
                0.0
            };
            dens.push(den);
        }

        // Phase 2: extend, then read numerators off the new chain — the
        // (k+1)-suffix node's count minus one is exactly the number of prior
        // occurrences of context⧺x.
        self.trie.extend(x);
        let new_chain = self.trie.chain();
        for k in 0..self.u.len() {
            let num = if k < new_chain.len() {
                self.trie.node(new_chain[k]).ends.count() as f64 - 1.0
            } else {
                0.0
            };
            let f = (num + beta) / (dens[k] + ba);
            self.u[k] *= asize * f;
        }

        // Fresh mass; rescale by exact powers of two if it drifts far.
        let mut z = self.z();
        debug_assert!(z.is_finite() && z > 0.0, "mixture mass collapsed");
        let limit = 2.0f64.powi(SCALE_LIMIT_EXP);
        while z > limit || (z < 1.0 / limit && z > 0.0) {
            let shift = if z > limit {
                SCALE_LIMIT_EXP
            } else {
                -SCALE_LIMIT_EXP
            };
            let factor = 2.0f64.powi(-shift);
            for u in &mut self.u {
                *u *= factor;
            }
            self.scale_exp += shift as i64;
            z = self.z();
        }
        self.log_prob = z.ln() + self.scale_exp as f64 * LN_2
            - self.trie.n() as f64 * (self.alphabet.size() as f64).ln();
    }

    /// ln P of a whole sequence under a fresh evaluator.
    pub fn sequence_log_prob(
        alphabet: Alphabet,
        smoothing: SmoothingRule,
        weights: WeightScheme,
        xs: &[Symbol],
    ) -> LogWeight {
        let mut ev = PpmEvaluator::new(alphabet, smoothing, weights);
        for &x in xs {
            ev.step(x);
        }
        ev.log_prob()
    }

    /// One-step conditional given an explicit history (fresh replay).
    pub fn conditional_after(
        alphabet: Alphabet,
        smoothing: SmoothingRule,
        weights: WeightScheme,
        history: &[Symbol],
    ) -> ConditionalDistribution {
        let mut ev = PpmEvaluator::new(alphabet, smoothing, weights);
        for &x in history {
            ev.step(x);
        }
        ev.conditional()
    }
}

/// The order-mixture as a sequential measure. Stateless from the caller's
/// view; each conditional replays the history into a fresh evaluator, while
/// `sequence_log_prob` runs the linear-time incremental path.
#[derive(Clone, Copy)]
pub struct PpmMixture {
    alphabet: Alphabet,
    smoothing: SmoothingRule,
    weights: WeightScheme,
}

impl PpmMixture {
    pub fn new(alphabet: Alphabet, smoothing: SmoothingRule, weights: WeightScheme) -> Self {
        PpmMixture {
            alphabet,
            smoothing,
            weights,
        }
    }

    pub fn smoothing(&self) -> SmoothingRule {
        self.smoothing
    }

    pub fn weights(&self) -> WeightScheme {
        self.weights
    }

    pub fn evaluator(&self) -> PpmEvaluator {
        PpmEvaluator::new(self.alphabet, self.smoothing, self.weights)
    }
}

impl SequentialMeasure for PpmMixture {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn conditional(&self, history: &[Symbol]) -> ConditionalDistribution {
        let mut ev = self.evaluator();
        for &x in history {
            ev.step(x);
        }
        ev.conditional()
    }

    fn sequence_log_prob(&self, seq: &crate::measure::SymbolSequence) -> LogWeight {
        assert_eq!(
            seq.alphabet(),
            self.alphabet,
            "sequence alphabet does not match the measure's"
        );
        PpmEvaluator::sequence_log_prob(self.alphabet, self.smoothing, self.weights, seq.symbols())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SymbolSequence;
    use crate::ppm::reference::{reference_conditional, reference_mixture_log_prob};

    fn all_strings(asize: u32, len: usize) -> Vec<Vec<Symbol>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..asize).map(move |a| {
                        let mut t = s.clone();
                        t.push(a);
                        t
                    })
                })
                .collect();
        }
        out
    }

    fn seq(asize: u32, xs: &[Symbol]) -> SymbolSequence {
        SymbolSequence::new(Alphabet::new(asize), xs.to_vec())
    }

    #[test]
    fn matches_directly_summed_mixture_exhaustively() {
        for &asize in &[2u32, 3] {
            for smoothing in [SmoothingRule::Laplace, SmoothingRule::KrichevskyTrofimov] {
                for weights in [WeightScheme::Rational, WeightScheme::LogTelescoping] {
                    for len in 0..=6 {
                        for xs in all_strings(asize, len) {
                            let got = PpmEvaluator::sequence_log_prob(
                                Alphabet::new(asize),
                                smoothing,
                                weights,
                                &xs,
                            );
                            let want =
                                reference_mixture_log_prob(&seq(asize, &xs), smoothing, weights);
                            assert!(
                                (got.ln() - want.ln()).abs() < 1e-11,
                                "{asize} {smoothing:?} {weights:?} {xs:?}: {} vs {}",
                                got.ln(),
                                want.ln()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn matches_reference_on_long_strings() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        for &asize in &[2u32, 3, 4] {
            for smoothing in [SmoothingRule::Laplace, SmoothingRule::KrichevskyTrofimov] {
                for weights in [WeightScheme::Rational, WeightScheme::LogTelescoping] {
                    // Repetitive strings stress deep chains; random ones the
                    // shallow mixture.
                    let mut cases: Vec<Vec<Symbol>> = vec![
                        vec![0; 200],
                        (0..200).map(|i| (i % asize) as Symbol).collect(),
                    ];
                    cases.push((0..200).map(|_| rng.gen_range(0..asize)).collect());
                    for xs in cases {
                        let got = PpmEvaluator::sequence_log_prob(
                            Alphabet::new(asize),
                            smoothing,
                            weights,
                            &xs,
                        );
                        let want = reference_mixture_log_prob(&seq(asize, &xs), smoothing, weights);
                        let rel = (got.ln() - want.ln()).abs() / want.ln().abs().max(1.0);
                        assert!(rel < 1e-9, "{asize} {smoothing:?} {weights:?}: rel {rel}");
                    }
                }
            }
        }
    }

    #[test]
    fn binary_two_symbol_probability_is_five_twentyfourths() {
        // Laplace, rational weights, "01": closed form 5/24.
        let lp = PpmEvaluator::sequence_log_prob(
            Alphabet::new(2),
            SmoothingRule::Laplace,
            WeightScheme::Rational,
            &[0, 1],
        );
        assert!((lp.linear() - 5.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn conditional_after_one_zero_is_seven_twelfths() {
        let m = PpmMixture::new(
            Alphabet::new(2),
            SmoothingRule::Laplace,
            WeightScheme::Rational,
        );
        let d = m.conditional(&[0]);
        assert!((d.prob(0) - 7.0 / 12.0).abs() < 1e-14);
        assert!((d.prob(1) - 5.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn conditional_matches_reference_ratio() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for &asize in &[2u32, 3] {
            for smoothing in [SmoothingRule::Laplace, SmoothingRule::KrichevskyTrofimov] {
                let m = PpmMixture::new(Alphabet::new(asize), smoothing, WeightScheme::Rational);
                for len in [0usize, 1, 2, 5, 30, 120] {
                    let hist: Vec<Symbol> = (0..len).map(|_| rng.gen_range(0..asize)).collect();
                    let got = m.conditional(&hist);
                    let want = reference_conditional(
                        &seq(asize, &hist),
                        smoothing,
                        WeightScheme::Rational,
                    );
                    for a in 0..asize {
                        assert!(
                            (got.prob(a) - want.prob(a)).abs() < 1e-10,
                            "len {len} a {a}: {} vs {}",
                            got.prob(a),
                            want.prob(a)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn conditionals_sum_to_one() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for &asize in &[2u32, 5] {
            let m = PpmMixture::new(
                Alphabet::new(asize),
                SmoothingRule::KrichevskyTrofimov,
                WeightScheme::LogTelescoping,
            );
            for len in [0usize, 3, 50] {
                let hist: Vec<Symbol> = (0..len).map(|_| rng.gen_range(0..asize)).collect();
                let d = m.conditional(&hist);
                let total: f64 = (0..asize).map(|a| d.prob(a)).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chain_rule_consistency() {
        // P(x_{1..n}) must equal Π conditionals; both paths share counts.
        let m = PpmMixture::new(
            Alphabet::new(2),
            SmoothingRule::Laplace,
            WeightScheme::Rational,
        );
        let xs: Vec<Symbol> = vec![0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 0, 1];
        let mut acc = 0.0;
        for i in 0..xs.len() {
            let d = m.conditional(&xs[..i]);
            acc += d.log_prob(xs[i]).ln();
        }
        let whole = m.sequence_log_prob(&seq(2, &xs));
        assert!((acc - whole.ln()).abs() < 1e-11);
    }

    #[test]
    fn deep_scale_stays_finite_on_constant_input() {
        // 20k identical symbols push every per-order ratio far outside f64
        // range; the shared power-of-two scale must absorb it without drift.
        let lp = PpmEvaluator::sequence_log_prob(
            Alphabet::new(2),
            SmoothingRule::KrichevskyTrofimov,
            WeightScheme::Rational,
            &vec![0; 20_000],
        );
        assert!(lp.ln().is_finite());
        // A constant source costs far less than one bit per symbol.
        assert!(lp.ln() > -0.05 * 20_000.0);
        assert!(lp.ln() < 0.0);
    }
}
