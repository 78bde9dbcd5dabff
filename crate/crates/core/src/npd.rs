//! Universal density for real-valued data: a mixture over nested dyadic
//! quantization levels, each level scoring the quantized sequence with the
//! full order-mixture over its own alphabet and correcting by the exact
//! reciprocal reference mass of the visited cells,
//!
//! ```text
//! g(x_{1:n}) = Σ_{r=0..R_max} w_r · PPM^{(2^r)}(cells_r(x_{1:n})) · 2^{r·n},
//! ```
//!
//! with rational level weights w_r = 1/(r+1) − 1/(r+2). Equal-mass cells in
//! quantile space make the correction factor exactly 2^{r·n}; truncation at
//! R_max lower-bounds the infinite mixture (the sums are nested), losing at
//! most the tail weight 1/(R_max+2).
//!
//! Level 0 has a single cell, so its term is exactly w_0 = 1/2 for every
//! input: the density has a positive floor and −log g grows at most linearly.

use crate::measure::{log_sum_exp, LogWeight, SymbolSequence, LN_2};
use crate::ppm::{PpmEvaluator, SmoothingRule, WeightScheme};
use crate::quantize::{cell_index, QuantizationLevel, QuantizeError, ReferenceMeasure};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NpdError {
    #[error("sample {x} outside reference support at position {position}")]
    OutOfSupport { x: f64, position: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("level tables need ~{needed} bytes, over the {budget}-byte budget")]
    TableBudgetExceeded { needed: usize, budget: usize },
}

/// Truncation level: fixed, or ⌈log₂ n⌉ + 2 resolved against the data length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxLevel {
    Auto,
    Fixed(u32),
}

impl MaxLevel {
    /// Resolved R_max for an n-sample evaluation; always ≥ 1, < 32.
    pub fn resolve(&self, n: usize) -> u32 {
        let r = match self {
            MaxLevel::Auto => ceil_log2(n.max(1)) + 2,
            MaxLevel::Fixed(r) => *r,
        };
        r.clamp(1, 31)
    }
}

fn ceil_log2(n: usize) -> u32 {
    n.next_power_of_two().trailing_zeros()
}

#[derive(Clone, Copy, Debug)]
pub struct NpdConfig {
    pub reference: ReferenceMeasure,
    pub smoothing: SmoothingRule,
    pub scheme: WeightScheme,
    pub max_level: MaxLevel,
    /// Upper bound on the dense per-level symbol tables (they grow as 2^r).
    pub max_table_bytes: usize,
}

impl NpdConfig {
    pub fn new(reference: ReferenceMeasure) -> Self {
        NpdConfig {
            reference,
            smoothing: SmoothingRule::Laplace,
            scheme: WeightScheme::Rational,
            max_level: MaxLevel::Auto,
            max_table_bytes: 1 << 30,
        }
    }
}

/// Rational level weight w_r (independent of the per-level order weights).
fn level_weight_ln(r: u32) -> f64 {
    WeightScheme::Rational.w(r as usize).ln()
}

/// Incremental evaluation of g over a growing sample: one order-mixture
/// evaluator per level, all fed in lockstep.
pub struct NpdEvaluator {
    reference: ReferenceMeasure,
    levels: Vec<PpmEvaluator>,
    n: usize,
}

impl NpdEvaluator {
    pub fn new(config: &NpdConfig, r_max: u32) -> Result<Self, NpdError> {
        let r_max = r_max.clamp(1, 31);
        // The dominating fixed cost is the dense root-successor table of
        // each level: 4·2^r bytes, summing to < 8·2^R_max.
        let needed = 8usize << r_max;
        if needed > config.max_table_bytes {
            return Err(NpdError::TableBudgetExceeded {
                needed,
                budget: config.max_table_bytes,
            });
        }
        let levels = (0..=r_max)
            .map(|r| {
                PpmEvaluator::new(
                    QuantizationLevel::new(r).alphabet(),
                    config.smoothing,
                    config.scheme,
                )
            })
            .collect();
        Ok(NpdEvaluator {
            reference: config.reference,
            levels,
            n: 0,
        })
    }

    pub fn r_max(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Feeds one sample to every level.
    pub fn step(&mut self, x: f64) -> Result<(), NpdError> {
        for (r, level) in self.levels.iter_mut().enumerate() {
            let cell = cell_index(x, r as u32, self.reference).map_err(|e| {
                let QuantizeError::OutOfSupport { x, .. } = e;
                NpdError::OutOfSupport {
                    x,
                    position: self.n,
                }
            })?;
            level.step(cell);
        }
        self.n += 1;
        Ok(())
    }

    /// ln g of the samples consumed so far; the empty product is 1.
    pub fn log_density(&self) -> LogWeight {
        if self.n == 0 {
            return LogWeight::ONE;
        }
        let terms: Vec<LogWeight> = self
            .levels
            .iter()
            .enumerate()
            .map(|(r, level)| {
                LogWeight::new(
                    level_weight_ln(r as u32)
                        + level.log_prob().ln()
                        + r as f64 * self.n as f64 * LN_2,
                )
            })
            .collect();
        log_sum_exp(&terms)
    }
}

/// ln g(xs) with R_max resolved against the full length.
pub fn npd_log_density(xs: &[f64], config: &NpdConfig) -> Result<LogWeight, NpdError> {
    if xs.is_empty() {
        return Err(NpdError::EmptyInput);
    }
    let mut ev = NpdEvaluator::new(config, config.max_level.resolve(xs.len()))?;
    for &x in xs {
        ev.step(x)?;
    }
    Ok(ev.log_density())
}

/// An entropy-rate estimate −log(measure)/n, optionally with the running
/// estimate at chosen prefixes.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub n: usize,
    pub nats: f64,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// −ln g(xs)/n: the entropy rate of the data relative to the reference
/// measure (tends to a nonpositive limit, since the reference is itself a
/// probability measure). Truncation makes it an upper bound of the
/// untruncated estimate by at most −ln(1 − 1/(R_max+2))/n.
pub fn differential_entropy_rate(
    xs: &[f64],
    config: &NpdConfig,
) -> Result<EntropyEstimate, NpdError> {
    differential_entropy_trace(xs, config, &[])
}

/// Same estimate, recording −ln g(x_{1:i})/i at each requested prefix i
/// (R_max stays resolved against the full length so the trace is one model).
pub fn differential_entropy_trace(
    xs: &[f64],
    config: &NpdConfig,
    checkpoints: &[usize],
) -> Result<EntropyEstimate, NpdError> {
    if xs.is_empty() {
        return Err(NpdError::EmptyInput);
    }
    let mut ev = NpdEvaluator::new(config, config.max_level.resolve(xs.len()))?;
    let mut trace = Vec::new();
    let mut want = checkpoints.iter().copied().filter(|&c| c >= 1).peekable();
    for (i, &x) in xs.iter().enumerate() {
        ev.step(x)?;
        while want.peek() == Some(&(i + 1)) {
            trace.push((i + 1, -ev.log_density().ln() / (i + 1) as f64));
            want.next();
        }
    }
    Ok(EntropyEstimate {
        n: xs.len(),
        nats: -ev.log_density().ln() / xs.len() as f64,
        trace: if checkpoints.is_empty() {
            None
        } else {
            Some(trace)
        },
    })
}

/// g(history ⧺ x) / g(history). Both evaluations share one R_max, resolved
/// against the extended length when automatic; g(ε) = 1, so with an empty
/// history this is the single-sample density (constant 1 − 1/(R_max+2)).
pub fn predictive_density(x: f64, history: &[f64], config: &NpdConfig) -> Result<f64, NpdError> {
    let r_max = config.max_level.resolve(history.len() + 1);
    let mut ev = NpdEvaluator::new(config, r_max)?;
    for &h in history {
        ev.step(h)?;
    }
    let base = ev.log_density();
    ev.step(x)?;
    Ok((ev.log_density().ln() - base.ln()).exp())
}

/// −log PPM(seq)/n for finite-alphabet data, in nats.
pub fn discrete_entropy_rate(
    seq: &SymbolSequence,
    smoothing: SmoothingRule,
    scheme: WeightScheme,
) -> EntropyEstimate {
    assert!(!seq.is_empty(), "entropy rate of an empty sequence");
    let lp = crate::ppm::ppm_mixture_log_prob(seq, smoothing, scheme);
    EntropyEstimate {
        n: seq.len(),
        nats: -lp.ln() / seq.len() as f64,
        trace: None,
    }
}
