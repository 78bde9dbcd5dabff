//! Universal sequence measures and densities over finite alphabets and the
//! real line, plus the estimation/prediction tooling built on them:
//!
//! - [`measure`]: log-domain weights, alphabets, and the sequential-measure
//!   contract (a measure is anything that maps a finite history to a
//!   conditional distribution over the next symbol).
//! - [`ppm`]: additively smoothed Markov measures of every order and their
//!   infinite mixture (PPM), evaluated exactly in O(depth) per symbol.
//! - [`quantize`]: finite reference measures on the reals and nested dyadic
//!   quantization in quantile space.
//! - [`npd`]: a universal density relative to a reference measure — the
//!   mixture of quantized PPM measures over all quantization levels — and the
//!   entropy-rate estimators derived from it.
//! - [`predict`]: the Cesàro-mean measure over history suffixes, the induced
//!   argmax predictor for 0-1 loss, and its convergence diagnostic.
//! - [`sources`]: synthetic stationary ergodic sources with exact sampling,
//!   true conditionals, and closed-form entropy rates, used as test oracles.

pub mod exec;
pub mod measure;
pub mod npd;
pub mod ppm;
pub mod predict;
pub mod quantize;
pub mod sources;
