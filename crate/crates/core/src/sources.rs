//! Synthetic stationary ergodic sources with exact sampling, true one-step
//! conditionals, and analytic entropy rates — the oracle side of every
//! consistency experiment.
//!
//! All randomness flows through ChaCha12 seeded from a caller-supplied u64,
//! so a (model, seed) pair reproduces byte-identical data on every platform;
//! replicas use consecutive seeds.

use crate::measure::{
    Alphabet, ConditionalDistribution, LogWeight, SequentialMeasure, Symbol, SymbolSequence,
};
use crate::quantize::ReferenceMeasure;
use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::distribution::Normal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SourceError {
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no analytic rate for this model/reference pair")]
    UnsupportedRate,
}

/// What an entropy rate is measured against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateRelativeTo {
    CountingMeasure,
    Reference(ReferenceMeasure),
}

/// A closed-form entropy rate, used as the oracle in consistency tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticRate {
    pub nats: f64,
    pub relative_to: RateRelativeTo,
}

/// An order-k Markov chain over a finite alphabet, started from the
/// stationary distribution of its k-tuple embedding. Construction requires
/// the full tuple chain to be irreducible and aperiodic (every length-k
/// context recurrent), which keeps conditionals and rates well defined.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovSource {
    alphabet_size: u32,
    order: usize,
    /// rows[context_index] = next-symbol distribution; contexts are coded
    /// big-endian (oldest symbol in the highest digit).
    rows: Vec<Vec<f64>>,
    /// Stationary distribution over k-tuples, same coding.
    pi: Vec<f64>,
}

fn context_index(ctx: &[Symbol], m: u32) -> usize {
    ctx.iter()
        .fold(0usize, |acc, &s| acc * m as usize + s as usize)
}

fn check_distribution(p: &[f64], what: &str) -> Result<(), SourceError> {
    if p.is_empty() {
        return Err(SourceError::InvalidProbabilities(format!("{what}: empty")));
    }
    if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(SourceError::InvalidProbabilities(format!(
            "{what}: entries must lie in [0,1]"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(SourceError::InvalidProbabilities(format!(
            "{what}: sums to {total}, not 1"
        )));
    }
    Ok(())
}

fn entropy_nats(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum()
}

/// Solves π = πP, Σπ = 1 for a stochastic matrix given by `next(state)`
/// edge weights, by dense elimination on (Pᵀ−I) with the last equation
/// replaced by normalization.
#[allow(clippy::needless_range_loop)] // row/column indexing is the natural idiom here
fn stationary(t: usize, prob: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut a = vec![vec![0.0f64; t + 1]; t];
    for i in 0..t {
        for j in 0..t {
            a[i][j] = prob(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..t {
        a[t - 1][j] = 1.0;
    }
    a[t - 1][t] = 1.0;
    // Partial-pivot Gaussian elimination.
    for col in 0..t {
        let piv = (col..t)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        assert!(d.abs() > 1e-14, "singular stationary system");
        for j in col..=t {
            a[col][j] /= d;
        }
        for row in 0..t {
            if row != col && a[row][col] != 0.0 {
                let f = a[row][col];
                for j in col..=t {
                    a[row][j] -= f * a[col][j];
                }
            }
        }
    }
    (0..t).map(|i| a[i][t].max(0.0)).collect()
}

impl MarkovSource {
    pub fn new(alphabet_size: u32, rows: Vec<Vec<f64>>) -> Result<Self, SourceError> {
        let m = alphabet_size as usize;
        if m < 2 {
            return Err(SourceError::InvalidParameter(
                "alphabet must have at least 2 symbols".into(),
            ));
        }
        if rows.is_empty() {
            return Err(SourceError::InvalidParameter("no transition rows".into()));
        }
        // Row count m^k determines the order.
        let mut order = 0usize;
        let mut count = 1usize;
        while count < rows.len() {
            count *= m;
            order += 1;
        }
        if count != rows.len() {
            return Err(SourceError::InvalidParameter(format!(
                "{} rows is not a power of the alphabet size {m}",
                rows.len()
            )));
        }
        let order = order.max(1);
        let t = m.pow(order as u32);
        let rows = if rows.len() == 1 {
            // A single row is an order-"0" spec; lift it to order 1 so the
            // tuple machinery below is uniform.
            vec![rows[0].clone(); m]
        } else {
            rows
        };
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(SourceError::InvalidParameter(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            check_distribution(row, &format!("row {i}"))?;
        }

        // Tuple chain: tuple u → v iff v = (u mod m^{k−1})·m + b with
        // rows[u][b] > 0. Ergodicity = strong connectivity + gcd(levels) 1.
        let succ = |u: usize| -> Vec<usize> {
            let base = (u % (t / m)) * m;
            (0..m)
                .filter(|&b| rows[u][b] > 0.0)
                .map(|b| base + b)
                .collect()
        };
        let reach = |reverse: bool| -> Vec<bool> {
            let mut seen = vec![false; t];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                #[allow(clippy::needless_range_loop)] // `v` is a node id, not just an index
                for v in 0..t {
                    let edge = if reverse {
                        succ(v).contains(&u)
                    } else {
                        succ(u).contains(&v)
                    };
                    if edge && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        };
        if !reach(false).iter().all(|&s| s) || !reach(true).iter().all(|&s| s) {
            return Err(SourceError::NotErgodic(
                "tuple chain is not irreducible (some context unreachable)".into(),
            ));
        }
        // Aperiodicity: BFS levels; the gcd of (level(u)+1−level(v)) over all
        // edges u→v equals the chain period for strongly connected graphs.
        let mut level = vec![usize::MAX; t];
        let mut queue = std::collections::VecDeque::from([0usize]);
        level[0] = 0;
        while let Some(u) = queue.pop_front() {
            for v in succ(u) {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g: i64 = 0;
        for u in 0..t {
            for v in succ(u) {
                let d = level[u] as i64 + 1 - level[v] as i64;
                g = gcd(g, d.abs());
            }
        }
        if g != 1 {
            return Err(SourceError::NotErgodic(format!("chain has period {g}")));
        }

        let pi = stationary(t, |u, v| {
            // Tuple u can only step to v = (u mod m^{k−1})·m + b.
            let base = (u % (t / m)) * m;
            if (base..base + m).contains(&v) {
                rows[u][v - base]
            } else {
                0.0
            }
        });
        Ok(MarkovSource {
            alphabet_size,
            order,
            rows,
            pi,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.alphabet_size)
    }

    /// Stationary probability of each k-tuple.
    pub fn stationary_tuples(&self) -> &[f64] {
        &self.pi
    }

    /// Exact conditional of the stationary process after any history: full
    /// rows once k symbols are available, tuple-marginal ratios before that.
    pub fn conditional(&self, history: &[Symbol]) -> Vec<f64> {
        let m = self.alphabet_size as usize;
        let k = self.order;
        if history.len() >= k {
            let ctx = &history[history.len() - k..];
            return self.rows[context_index(ctx, self.alphabet_size)].clone();
        }
        // P(b | prefix) = Σ_{tuples extending prefix·b} π / Σ_{tuples extending prefix}.
        // Big-endian coding makes each prefix a contiguous tuple range.
        let j = history.len();
        let span = m.pow((k - j) as u32);
        let lo = context_index(history, self.alphabet_size) * span;
        let den: f64 = self.pi[lo..lo + span].iter().sum();
        let child_span = span / m;
        (0..m)
            .map(|b| {
                let clo = lo + b * child_span;
                self.pi[clo..clo + child_span].iter().sum::<f64>() / den
            })
            .collect()
    }

    /// Σ_tuples π(tuple) · H(row(tuple)) in nats.
    pub fn entropy_rate(&self) -> f64 {
        self.pi
            .iter()
            .zip(&self.rows)
            .map(|(&p, row)| p * entropy_nats(row))
            .sum()
    }

    /// Σ_tuples π(tuple) · (1 − max row(tuple)): the Bayes 0-1 error.
    pub fn bayes_error(&self) -> f64 {
        self.pi
            .iter()
            .zip(&self.rows)
            .map(|(&p, row)| p * (1.0 - row.iter().fold(f64::MIN, |a, &b| a.max(b))))
            .sum()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceModel {
    IidCategorical {
        probs: Vec<f64>,
    },
    Markov(MarkovSource),
    IidUniformReal,
    GaussianAr1 {
        rho: f64,
    },
    Periodic {
        pattern: Vec<Symbol>,
        alphabet: Alphabet,
    },
}

impl SourceModel {
    pub fn iid_categorical(probs: Vec<f64>) -> Result<Self, SourceError> {
        check_distribution(&probs, "categorical")?;
        if probs.len() < 2 {
            return Err(SourceError::InvalidParameter(
                "categorical needs at least 2 symbols".into(),
            ));
        }
        Ok(SourceModel::IidCategorical { probs })
    }

    pub fn fair_coin() -> Self {
        SourceModel::IidCategorical {
            probs: vec![0.5, 0.5],
        }
    }

    pub fn markov(alphabet_size: u32, rows: Vec<Vec<f64>>) -> Result<Self, SourceError> {
        Ok(SourceModel::Markov(MarkovSource::new(alphabet_size, rows)?))
    }

    /// The two-state chain [[0.9, 0.1], [0.2, 0.8]] used across the
    /// consistency experiments (stationary π = (2/3, 1/3)).
    pub fn two_state_markov() -> Self {
        SourceModel::Markov(
            MarkovSource::new(2, vec![vec![0.9, 0.1], vec![0.2, 0.8]]).expect("valid chain"),
        )
    }

    pub fn gaussian_ar1(rho: f64) -> Result<Self, SourceError> {
        if !(rho.is_finite() && rho.abs() < 1.0) {
            return Err(SourceError::InvalidParameter(format!(
                "|rho| must be < 1, got {rho}"
            )));
        }
        Ok(SourceModel::GaussianAr1 { rho })
    }

    /// Deterministic repetition of `pattern`, phase-locked to position 0.
    /// The alphabet covers the pattern symbols but never collapses below
    /// binary, so a constant pattern still exercises real prediction.
    pub fn periodic(pattern: Vec<Symbol>) -> Result<Self, SourceError> {
        if pattern.is_empty() {
            return Err(SourceError::InvalidParameter("empty pattern".into()));
        }
        let size = pattern.iter().max().unwrap() + 1;
        Ok(SourceModel::Periodic {
            pattern,
            alphabet: Alphabet::new(size.max(2)),
        })
    }

    /// Alphabet for finite kinds; None for real-valued kinds.
    pub fn alphabet(&self) -> Option<Alphabet> {
        match self {
            SourceModel::IidCategorical { probs } => Some(Alphabet::new(probs.len() as u32)),
            SourceModel::Markov(m) => Some(m.alphabet()),
            SourceModel::Periodic { alphabet, .. } => Some(*alphabet),
            SourceModel::IidUniformReal | SourceModel::GaussianAr1 { .. } => None,
        }
    }

    pub fn is_real_valued(&self) -> bool {
        self.alphabet().is_none()
    }

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    /// Samples a finite-alphabet path of length n. Panics on real kinds.
    pub fn sample_symbols(&self, n: usize, seed: u64) -> SymbolSequence {
        let alphabet = self.alphabet().expect("finite-alphabet source required");
        let mut rng = Self::rng(seed);
        let mut data = Vec::with_capacity(n);
        match self {
            SourceModel::IidCategorical { probs } => {
                for _ in 0..n {
                    data.push(draw(&mut rng, probs));
                }
            }
            SourceModel::Markov(m) => {
                // Start from the stationary tuple, then roll transitions.
                let t = m.pi.len();
                let msize = m.alphabet_size as usize;
                let mut tuple = draw(&mut rng, &m.pi) as usize;
                let mut digits = Vec::with_capacity(m.order);
                let mut tmp = tuple;
                for _ in 0..m.order {
                    digits.push((tmp % msize) as Symbol);
                    tmp /= msize;
                }
                digits.reverse();
                for &d in digits.iter().take(n) {
                    data.push(d);
                }
                while data.len() < n {
                    let b = draw(&mut rng, &m.rows[tuple]);
                    data.push(b);
                    tuple = (tuple % (t / msize)) * msize + b as usize;
                }
            }
            SourceModel::Periodic { pattern, .. } => {
                for i in 0..n {
                    data.push(pattern[i % pattern.len()]);
                }
            }
            _ => unreachable!(),
        }
        SymbolSequence::new(alphabet, data)
    }

    /// Samples a real-valued path of length n. Panics on finite kinds.
    pub fn sample_reals(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = Self::rng(seed);
        match self {
            SourceModel::IidUniformReal => (0..n).map(|_| rng.gen::<f64>()).collect(),
            SourceModel::GaussianAr1 { rho } => {
                let std_normal = Normal::new(0.0, 1.0).unwrap();
                let innov = (1.0 - rho * rho).sqrt();
                let mut out = Vec::with_capacity(n);
                let mut x = std_normal.sample(&mut rng);
                for _ in 0..n {
                    out.push(x);
                    x = rho * x + innov * std_normal.sample(&mut rng);
                }
                out
            }
            _ => panic!("real-valued source required"),
        }
    }

    /// Exact next-symbol distribution for finite kinds. Panics on real kinds.
    pub fn true_conditional(&self, history: &[Symbol]) -> ConditionalDistribution {
        let alphabet = self.alphabet().expect("finite-alphabet source required");
        assert!(
            history.iter().all(|&s| alphabet.contains(s)),
            "history contains out-of-alphabet symbols"
        );
        match self {
            SourceModel::IidCategorical { probs } => {
                ConditionalDistribution::from_linear(alphabet, probs)
            }
            SourceModel::Markov(m) => {
                ConditionalDistribution::from_linear(alphabet, &m.conditional(history))
            }
            SourceModel::Periodic { pattern, .. } => {
                let next = pattern[history.len() % pattern.len()];
                let probs: Vec<LogWeight> = alphabet
                    .symbols()
                    .map(|a| {
                        if a == next {
                            LogWeight::ONE
                        } else {
                            LogWeight::ZERO
                        }
                    })
                    .collect();
                ConditionalDistribution::new(alphabet, probs)
            }
            _ => panic!("finite-alphabet source required"),
        }
    }

    /// Conditional density at `query` given the last sample, for real kinds:
    /// AR(1) is N(ρ·xₙ, 1−ρ²) (N(0,1) for an empty history); uniform is 1.
    pub fn real_conditional_density(&self, query: f64, last: Option<f64>) -> f64 {
        match self {
            SourceModel::IidUniformReal => {
                if (0.0..=1.0).contains(&query) {
                    1.0
                } else {
                    0.0
                }
            }
            SourceModel::GaussianAr1 { rho } => {
                let (mean, var) = match last {
                    Some(x) => (rho * x, 1.0 - rho * rho),
                    None => (0.0, 1.0),
                };
                (-0.5 * (query - mean) * (query - mean) / var).exp()
                    / (2.0 * std::f64::consts::PI * var).sqrt()
            }
            _ => panic!("real-valued source required"),
        }
    }

    /// Closed-form entropy rate: counting-measure nats for finite kinds,
    /// reference-relative nats for real kinds (matching reference required).
    pub fn analytic_entropy_rate(
        &self,
        reference: Option<ReferenceMeasure>,
    ) -> Result<AnalyticRate, SourceError> {
        match (self, reference) {
            (SourceModel::IidCategorical { probs }, None) => Ok(AnalyticRate {
                nats: entropy_nats(probs),
                relative_to: RateRelativeTo::CountingMeasure,
            }),
            (SourceModel::Markov(m), None) => Ok(AnalyticRate {
                nats: m.entropy_rate(),
                relative_to: RateRelativeTo::CountingMeasure,
            }),
            (SourceModel::Periodic { .. }, None) => Ok(AnalyticRate {
                nats: 0.0,
                relative_to: RateRelativeTo::CountingMeasure,
            }),
            (SourceModel::IidUniformReal, Some(ReferenceMeasure::Uniform01)) => Ok(AnalyticRate {
                nats: 0.0,
                relative_to: RateRelativeTo::Reference(ReferenceMeasure::Uniform01),
            }),
            (SourceModel::GaussianAr1 { rho }, Some(ReferenceMeasure::StandardGaussian)) => {
                // Reference-relative rate = −KL rate of the process against
                // i.i.d. standard Gaussians = 0.5·ln(1−ρ²).
                Ok(AnalyticRate {
                    nats: 0.5 * (1.0 - rho * rho).ln(),
                    relative_to: RateRelativeTo::Reference(ReferenceMeasure::StandardGaussian),
                })
            }
            _ => Err(SourceError::UnsupportedRate),
        }
    }

    /// Bayes 0-1 error of the one-step optimal predictor, finite kinds only.
    pub fn bayes_error(&self) -> Option<f64> {
        match self {
            SourceModel::IidCategorical { probs } => {
                Some(1.0 - probs.iter().fold(f64::MIN, |a, &b| a.max(b)))
            }
            SourceModel::Markov(m) => Some(m.bayes_error()),
            SourceModel::Periodic { .. } => Some(0.0),
            _ => None,
        }
    }

    /// View of a finite-alphabet model as a sequential measure (its own true
    /// law), for plugging into the diagnostic machinery.
    pub fn as_measure(&self) -> SourceMeasure<'_> {
        assert!(!self.is_real_valued(), "finite-alphabet source required");
        SourceMeasure { model: self }
    }
}

fn draw<R: Rng>(rng: &mut R, probs: &[f64]) -> Symbol {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as Symbol;
        }
    }
    (probs.len() - 1) as Symbol
}

/// A finite-alphabet source's true law as a `SequentialMeasure`.
pub struct SourceMeasure<'a> {
    model: &'a SourceModel,
}

impl SequentialMeasure for SourceMeasure<'_> {
    fn alphabet(&self) -> Alphabet {
        self.model.alphabet().unwrap()
    }

    fn conditional(&self, history: &[Symbol]) -> ConditionalDistribution {
        self.model.true_conditional(history)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_pattern_and_conditional() {
        let s = SourceModel::periodic(vec![0, 1]).unwrap();
        assert_eq!(s.sample_symbols(5, 123).symbols(), &[0, 1, 0, 1, 0]);
        // Phase is the history length, regardless of content.
        let d = s.true_conditional(&[0, 1, 0]);
        assert_eq!(d.prob(1), 1.0);
        assert_eq!(d.prob(0), 0.0);
        // Constant pattern keeps a binary alphabet.
        let c = SourceModel::periodic(vec![0]).unwrap();
        assert_eq!(c.alphabet().unwrap().size(), 2);
        assert!(c.analytic_entropy_rate(None).unwrap().nats == 0.0);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let s = SourceModel::two_state_markov();
        assert_eq!(
            s.sample_symbols(500, 9).symbols(),
            s.sample_symbols(500, 9).symbols()
        );
        assert_ne!(
            s.sample_symbols(500, 9).symbols(),
            s.sample_symbols(500, 10).symbols()
        );
        let g = SourceModel::gaussian_ar1(0.5).unwrap();
        assert_eq!(g.sample_reals(100, 4), g.sample_reals(100, 4));
    }

    #[test]
    fn two_state_stationary_distribution_is_two_thirds() {
        let SourceModel::Markov(m) = SourceModel::two_state_markov() else {
            unreachable!()
        };
        assert!((m.stationary_tuples()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.stationary_tuples()[1] - 1.0 / 3.0).abs() < 1e-12);
        // Rate: (2/3)·H(0.9,0.1) + (1/3)·H(0.2,0.8).
        let h = |p: f64| -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
        let want = h(0.9) * 2.0 / 3.0 + h(0.2) / 3.0;
        assert!((m.entropy_rate() - want).abs() < 1e-12);
        // Bayes error: (2/3)·0.1 + (1/3)·0.2 = 2/15.
        assert!((m.bayes_error() - 2.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn markov_conditionals_read_off_rows_and_marginals() {
        let s = SourceModel::two_state_markov();
        let d = s.true_conditional(&[0, 0, 1]);
        assert!((d.prob(0) - 0.2).abs() < 1e-15);
        assert!((d.prob(1) - 0.8).abs() < 1e-15);
        // Empty history: the stationary marginal.
        let d = s.true_conditional(&[]);
        assert!((d.prob(0) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn order_two_short_history_conditional_matches_brute_marginal() {
        // Order-2 binary chain with distinct rows per context.
        let rows = vec![
            vec![0.7, 0.3],   // 00
            vec![0.4, 0.6],   // 01
            vec![0.25, 0.75], // 10
            vec![0.9, 0.1],   // 11
        ];
        let SourceModel::Markov(m) = SourceModel::markov(2, rows).unwrap() else {
            unreachable!()
        };
        assert_eq!(m.order(), 2);
        let pi = m.stationary_tuples().to_vec();
        // P(x₂=b | x₁=a) = π(ab)/(π(a0)+π(a1)) under big-endian coding.
        for a in 0..2usize {
            let den = pi[2 * a] + pi[2 * a + 1];
            let got = m.conditional(&[a as Symbol]);
            for b in 0..2usize {
                assert!((got[b] - pi[2 * a + b] / den).abs() < 1e-12);
            }
        }
        // Empty history: tuple-first-coordinate marginal.
        let got = m.conditional(&[]);
        assert!((got[0] - (pi[0] + pi[1])).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_ergodic_chains() {
        // Reducible: two absorbing states.
        let err = SourceModel::markov(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, SourceError::NotErgodic(_)));
        // Periodic: deterministic two-cycle.
        let err = SourceModel::markov(2, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, SourceError::NotErgodic(_)));
        // Bad row sum.
        let err = SourceModel::markov(2, vec![vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, SourceError::InvalidProbabilities(_)));
    }

    #[test]
    fn analytic_rates_match_closed_forms() {
        let coin = SourceModel::fair_coin();
        assert!(
            (coin.analytic_entropy_rate(None).unwrap().nats - std::f64::consts::LN_2).abs() < 1e-15
        );
        assert_eq!(coin.bayes_error(), Some(0.5));

        let skew = SourceModel::iid_categorical(vec![0.3, 0.7]).unwrap();
        let want = -(0.3f64.ln() * 0.3 + 0.7f64.ln() * 0.7);
        assert!((skew.analytic_entropy_rate(None).unwrap().nats - want).abs() < 1e-15);
        assert!((skew.bayes_error().unwrap() - 0.3).abs() < 1e-15);

        let ar = SourceModel::gaussian_ar1(0.5).unwrap();
        let rate = ar
            .analytic_entropy_rate(Some(ReferenceMeasure::StandardGaussian))
            .unwrap()
            .nats;
        assert!((rate - 0.5 * 0.75f64.ln()).abs() < 1e-15);
        assert!((rate - (-0.14384103622589045)).abs() < 1e-10);
        // Mismatched reference is an error, not a silent wrong number.
        assert_eq!(
            ar.analytic_entropy_rate(Some(ReferenceMeasure::Uniform01)),
            Err(SourceError::UnsupportedRate)
        );
    }

    #[test]
    fn ar1_conditional_density_examples() {
        let ar = SourceModel::gaussian_ar1(0.5).unwrap();
        // N(0.5, 0.75) density at 0.5: peak value (2π·0.75)^{−1/2}.
        let want = 1.0 / (2.0 * std::f64::consts::PI * 0.75).sqrt();
        assert!((ar.real_conditional_density(0.5, Some(1.0)) - want).abs() < 1e-12);
    }

    #[test]
    fn gaussian_ar1_rejects_unit_root() {
        assert!(SourceModel::gaussian_ar1(1.0).is_err());
        assert!(SourceModel::gaussian_ar1(-1.2).is_err());
    }
}
