//! Core domain types: alphabets, symbol sequences, log-domain weights, and
//! the sequential-measure trait all estimators implement.

/// Symbols are dense integers `0..alphabet.size()`.
pub type Symbol = u32;

/// A finite symbol set `{0, 1, …, size−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    /// Panics if `size == 0`.
    pub fn new(size: u32) -> Self {
        assert!(size >= 1, "alphabet must have at least one symbol");
        Alphabet { size }
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s < self.size
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size
    }

    /// ln(1/size), the per-symbol log-probability of the uniform distribution.
    pub fn log_uniform(&self) -> f64 {
        -(self.size as f64).ln()
    }
}

/// A finite string over an [`Alphabet`]. The empty sequence is permitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSequence {
    alphabet: Alphabet,
    data: Vec<Symbol>,
}

impl SymbolSequence {
    /// Panics if any symbol is outside the alphabet.
    pub fn new(alphabet: Alphabet, data: Vec<Symbol>) -> Self {
        for (i, &s) in data.iter().enumerate() {
            assert!(
                alphabet.contains(s),
                "symbol {s} at position {i} outside alphabet of size {}",
                alphabet.size()
            );
        }
        SymbolSequence { alphabet, data }
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        SymbolSequence {
            alphabet,
            data: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.data
    }

    pub fn push(&mut self, s: Symbol) {
        assert!(self.alphabet.contains(s));
        self.data.push(s);
    }

    /// The sequence extended by one symbol (used for conditional-measure ratios).
    pub fn extended(&self, s: Symbol) -> SymbolSequence {
        let mut out = self.clone();
        out.push(s);
        out
    }
}

/// A nonnegative weight stored as its natural logarithm; `−∞` encodes zero.
/// Never NaN.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    /// Panics on NaN.
    pub fn new(ln_value: f64) -> Self {
        assert!(!ln_value.is_nan(), "LogWeight cannot be NaN");
        LogWeight(ln_value)
    }

    /// From a linear-domain weight `p ≥ 0`.
    pub fn from_linear(p: f64) -> Self {
        assert!(p >= 0.0, "negative weight {p}");
        if p == 0.0 {
            LogWeight::ZERO
        } else {
            LogWeight(p.ln())
        }
    }

    /// The stored natural logarithm.
    pub fn ln(&self) -> f64 {
        self.0
    }

    /// Back to linear domain (may underflow to 0 for very small weights).
    pub fn linear(&self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl std::ops::Mul for LogWeight {
    type Output = LogWeight;
    // Product of weights = sum of logs. `−∞ + ∞` cannot arise: weights are
    // never `+∞`-valued probabilities in this crate.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogWeight) -> LogWeight {
        LogWeight::new(self.0 + rhs.0)
    }
}

/// log(Σ exp(tᵢ)) computed stably: factor out the maximum. Empty input is the
/// zero weight. The result is always ≥ max(terms).
pub fn log_sum_exp(terms: &[LogWeight]) -> LogWeight {
    let mut m = f64::NEG_INFINITY;
    for t in terms {
        if t.0 > m {
            m = t.0;
        }
    }
    if m == f64::NEG_INFINITY {
        return LogWeight::ZERO;
    }
    let mut sum = 0.0;
    for t in terms {
        sum += (t.0 - m).exp();
    }
    LogWeight::new(m + sum.ln())
}

/// A probability distribution over one alphabet, stored in log domain.
/// Entries sum to 1 (within 1e-12 after exponentiation) for every
/// distribution produced by this crate.
#[derive(Clone, Debug)]
pub struct ConditionalDistribution {
    alphabet: Alphabet,
    probs: Vec<LogWeight>,
}

impl ConditionalDistribution {
    pub fn new(alphabet: Alphabet, probs: Vec<LogWeight>) -> Self {
        assert_eq!(probs.len(), alphabet.size() as usize);
        ConditionalDistribution { alphabet, probs }
    }

    pub fn from_linear(alphabet: Alphabet, probs: &[f64]) -> Self {
        assert_eq!(probs.len(), alphabet.size() as usize);
        ConditionalDistribution {
            alphabet,
            probs: probs.iter().map(|&p| LogWeight::from_linear(p)).collect(),
        }
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let w = LogWeight::new(alphabet.log_uniform());
        ConditionalDistribution {
            alphabet,
            probs: vec![w; alphabet.size() as usize],
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn log_prob(&self, s: Symbol) -> LogWeight {
        self.probs[s as usize]
    }

    pub fn prob(&self, s: Symbol) -> f64 {
        self.probs[s as usize].linear()
    }

    pub fn probs(&self) -> &[LogWeight] {
        &self.probs
    }

    /// Σ exp(probs) — should be 1 within 1e-12.
    pub fn total(&self) -> f64 {
        log_sum_exp(&self.probs).linear()
    }

    /// Most probable symbol; ties break toward the smallest index.
    pub fn argmax(&self) -> Symbol {
        let mut best = 0usize;
        for i in 1..self.probs.len() {
            if self.probs[i].0 > self.probs[best].0 {
                best = i;
            }
        }
        best as Symbol
    }
}

/// Anything that assigns Kolmogorov-consistent probabilities to finite
/// strings via one-step conditionals. Histories are plain slices so callers
/// can average over suffixes without copying.
pub trait SequentialMeasure {
    fn alphabet(&self) -> Alphabet;

    /// P(· | history). Must sum to 1 within 1e-12.
    fn conditional(&self, history: &[Symbol]) -> ConditionalDistribution;

    /// log P(seq) by the chain rule over `conditional`. The empty sequence
    /// has probability 1. Panics if the sequence's alphabet differs.
    fn sequence_log_prob(&self, seq: &SymbolSequence) -> LogWeight {
        assert_eq!(
            seq.alphabet(),
            self.alphabet(),
            "sequence alphabet does not match the measure's"
        );
        let xs = seq.symbols();
        let mut lp = 0.0;
        for i in 0..xs.len() {
            lp += self.conditional(&xs[..i]).log_prob(xs[i]).ln();
        }
        LogWeight::new(lp)
    }
}

/// The i.i.d. uniform measure: every conditional is uniform.
#[derive(Clone, Copy, Debug)]
pub struct UniformIid {
    alphabet: Alphabet,
}

impl UniformIid {
    pub fn new(alphabet: Alphabet) -> Self {
        UniformIid { alphabet }
    }
}

impl SequentialMeasure for UniformIid {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn conditional(&self, _history: &[Symbol]) -> ConditionalDistribution {
        ConditionalDistribution::uniform(self.alphabet)
    }

    fn sequence_log_prob(&self, seq: &SymbolSequence) -> LogWeight {
        assert_eq!(seq.alphabet(), self.alphabet);
        LogWeight::new(seq.len() as f64 * self.alphabet.log_uniform())
    }
}

pub const LN_2: f64 = std::f64::consts::LN_2;

/// nats → bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}
