//! Cesàro-mean prediction: average a measure's conditionals over every
//! suffix of the observed history and predict the argmax.
//!
//! Conditioning a single model on the full past need not converge pointwise
//! for every stationary ergodic source, but the *average* of its conditionals
//! over all history suffixes does, and the induced argmax predictor attains
//! the source's Bayes 0-1 loss in the limit. [`cesaro_conditional`] is the
//! exact rule; [`run_prediction_ppm`] evaluates it prequentially over long
//! inputs with a bounded set of suffix windows (see [`runner`]).

mod diagnostic;
mod runner;

pub use diagnostic::{log_ratio_diagnostic, DiagnosticPoint};
pub use runner::{run_prediction_ppm, RunnerConfig};

use crate::measure::{ConditionalDistribution, SequentialMeasure, Symbol, SymbolSequence};

/// Default bound on how many suffix lengths participate in one average.
pub const DEFAULT_SUFFIX_CAP: usize = 4096;

/// (1/(n+1)) Σ_{m=0}^{n} base(· | last m symbols of `history`) — the exact
/// suffix-averaged conditional, m = 0 contributing the empty-history term.
pub fn cesaro_conditional<M: SequentialMeasure>(
    base: &M,
    history: &[Symbol],
) -> ConditionalDistribution {
    averaged_conditional(base, history, 1)
}

fn averaged_conditional<M: SequentialMeasure>(
    base: &M,
    history: &[Symbol],
    stride: usize,
) -> ConditionalDistribution {
    let alphabet = base.alphabet();
    let n = history.len();
    let asize = alphabet.size() as usize;
    let mut acc = vec![0.0f64; asize];
    let mut terms = 0usize;
    // Suffix lengths n, n−stride, …; the full history always participates.
    for m in (0..=n).rev().step_by(stride) {
        let c = base.conditional(&history[n - m..]);
        for (a, slot) in acc.iter_mut().enumerate() {
            *slot += c.prob(a as Symbol);
        }
        terms += 1;
    }
    let inv = 1.0 / terms as f64;
    for slot in &mut acc {
        *slot *= inv;
    }
    ConditionalDistribution::from_linear(alphabet, &acc)
}

/// Most probable next symbol under `measure` given `history`; ties break
/// toward the smallest symbol.
pub fn predict_next<M: SequentialMeasure>(measure: &M, history: &[Symbol]) -> Symbol {
    measure.conditional(history).argmax()
}

/// The suffix-averaged companion of a base measure, itself a sequential
/// measure. Beyond `suffix_cap` history lengths the average subsamples
/// suffix lengths on an arithmetic grid anchored at the full history, the
/// same scheme the windowed runner uses.
#[derive(Clone, Debug)]
pub struct CesaroMeasure<M: SequentialMeasure> {
    base: M,
    suffix_cap: usize,
}

impl<M: SequentialMeasure> CesaroMeasure<M> {
    pub fn new(base: M) -> Self {
        Self::with_suffix_cap(base, DEFAULT_SUFFIX_CAP)
    }

    pub fn with_suffix_cap(base: M, suffix_cap: usize) -> Self {
        assert!(suffix_cap >= 1);
        CesaroMeasure { base, suffix_cap }
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    fn stride_for(&self, n: usize) -> usize {
        n / self.suffix_cap + 1
    }
}

impl<M: SequentialMeasure> SequentialMeasure for CesaroMeasure<M> {
    fn alphabet(&self) -> crate::measure::Alphabet {
        self.base.alphabet()
    }

    fn conditional(&self, history: &[Symbol]) -> ConditionalDistribution {
        averaged_conditional(&self.base, history, self.stride_for(history.len()))
    }
}

/// One prequential prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredictionStep {
    pub predicted: Symbol,
    pub actual: Symbol,
    pub mistake: bool,
}

/// Prequential 0-1-loss record of a prediction run.
#[derive(Clone, Debug)]
pub struct PredictionTrace {
    pub steps: Vec<PredictionStep>,
    /// Bound on simultaneously maintained suffix lengths.
    pub suffix_cap: usize,
    /// Spacing between retained window starts at the end of the run
    /// (1 = every suffix participated in every average).
    pub final_stride: usize,
}

impl PredictionTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn mistake_count(&self) -> usize {
        self.steps.iter().filter(|s| s.mistake).count()
    }

    /// Mistakes among the first `n` predictions, divided by n.
    pub fn mistake_density_through(&self, n: usize) -> f64 {
        assert!(n >= 1 && n <= self.steps.len());
        self.steps[..n].iter().filter(|s| s.mistake).count() as f64 / n as f64
    }

    /// M_n over the whole run.
    pub fn mistake_density(&self) -> f64 {
        self.mistake_density_through(self.steps.len())
    }
}

/// Predicts each symbol of `seq` from the preceding ones under `measure`,
/// by direct evaluation of the averaged conditional at every step.
/// Θ(n) conditionals of the base measure per step — fine for moderate n;
/// use [`run_prediction_ppm`] for long inputs.
pub fn run_prediction<M: SequentialMeasure>(
    seq: &SymbolSequence,
    measure: &CesaroMeasure<M>,
) -> PredictionTrace {
    assert_eq!(seq.alphabet(), measure.alphabet());
    let xs = seq.symbols();
    let mut steps = Vec::with_capacity(xs.len());
    for (i, &actual) in xs.iter().enumerate() {
        let predicted = measure.conditional(&xs[..i]).argmax();
        steps.push(PredictionStep {
            predicted,
            actual,
            mistake: predicted != actual,
        });
    }
    let final_stride = if xs.is_empty() {
        1
    } else {
        measure.stride_for(xs.len() - 1)
    };
    PredictionTrace {
        steps,
        suffix_cap: measure.suffix_cap,
        final_stride,
    }
}
