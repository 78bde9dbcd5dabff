//! Bounded-state prequential evaluation of the suffix-averaged mixture.
//!
//! Evaluating the suffix average exactly costs one full model replay per
//! suffix per step. This runner instead keeps one *incremental* mixture
//! state per window x_{1+jΔ..n} on an arithmetic grid of starts, spawning a
//! new window whenever the grid reaches the present and doubling the stride
//! Δ (dropping every other window) when the window count would exceed a cap.
//! The average over the retained windows is the same subsampling rule
//! [`CesaroMeasure`](super::CesaroMeasure) applies, and at Δ = 1 the runner
//! is exact.
//!
//! Each window carries the scaled per-order ratio ladder of the incremental
//! evaluator (u_k = w_k·(P_k/U_window)·2^{−S}), laid out k-major across
//! windows so each order's count lookups become contiguous fills from the
//! shared suffix trie's per-node bucket sums:
//!
//!   den_k(j) = (in-window count of the order-k context) − 1,
//!   num_k(j, a) = in-window count of context⧺a, read before extension,
//!
//! with Σ_a num_k(j, a) = den_k(j), so one child fill per order suffices on
//! binary alphabets. The per-window normalizer updates as
//! z ← z + Σ_k u_k·(|A|f_k(x) − 1) in the same pass. Windows where today's
//! order-k context occurs at most once (den ≤ 0) contribute an exactly
//! uniform factor and are skipped; they form the grid's tail because
//! in-window counts are nonincreasing in the window start.
//!
//! Cost control beyond the cap is a per-window component drop: once order k
//! holds less than `posterior_stop` of window j's posterior, that component
//! is collapsed into "P_k so far, uniform afterwards" — its ladder entry is
//! zeroed and never updated again, while its mass stays inside z, so the
//! window remains a valid measure. Posteriors sharpen with window age,
//! making the dropped lanes a prefix of the grid that is skipped wholesale.

use crate::measure::{Alphabet, SequentialMeasure, Symbol, SymbolSequence};
use crate::ppm::trie::ContextTrie;
use crate::ppm::{pow2, PpmMixture, WeightScheme};

use super::{PredictionStep, PredictionTrace};

/// Tuning for the windowed runner. The defaults trade a provably vanishing
/// bias (stride subsampling, finite order ladder, posterior drops) for
/// per-step work far below state_cap · max_order on stationary inputs.
#[derive(Clone, Copy, Debug)]
pub struct RunnerConfig {
    /// Maximum number of simultaneously maintained windows; exceeding it
    /// doubles the start spacing and drops every other window.
    pub state_cap: usize,
    /// Number of explicitly tracked Markov orders per window; deeper orders
    /// remain inside the closed-form prior tail (uniform prediction).
    pub max_order: usize,
    /// Collapse a window's order-k component into its uniform tail once it
    /// carries less than this share of the window's posterior (one-way; the
    /// collapsed mass stays in the window's normalizer). 0 disables drops
    /// and makes the runner an exact average over the retained windows.
    pub posterior_stop: f64,
}

impl Default for RunnerConfig {
    fn default() -> Self {
        RunnerConfig {
            state_cap: super::DEFAULT_SUFFIX_CAP,
            max_order: 64,
            posterior_stop: 1e-10,
        }
    }
}

/// Stored per-window normalizers are kept within 2^±RESCALE_EXP.
const RESCALE_EXP: i32 = 400;

pub(crate) struct WindowedCesaro {
    alphabet: Alphabet,
    asize: usize,
    beta: f64,
    scheme: WeightScheme,
    cfg: RunnerConfig,
    trie: ContextTrie,
    n: usize,
    log2_delta: u32,
    // Per-window state; index j ↔ window start 1 + j·Δ (1-based).
    z: Vec<f64>,
    s_exp: Vec<i32>,
    inv_z: Vec<f64>,
    /// u[k][j] for j < active[k]; active[k] is nonincreasing in k.
    u: Vec<Vec<f64>>,
    active: Vec<usize>,
    /// Windows below live[k] hold dropped (zeroed) order-k components.
    live: Vec<usize>,
    // Per-step scratch.
    den_c: Vec<u32>,
    num_c: Vec<u32>,
    num_all: Vec<Vec<u32>>,
    qx: Vec<f64>,
    scores: Vec<f64>,
}

impl WindowedCesaro {
    pub(crate) fn new(mixture: &PpmMixture, cfg: RunnerConfig) -> Self {
        assert!(cfg.state_cap >= 1);
        assert!(cfg.max_order >= 1);
        assert!(cfg.posterior_stop >= 0.0);
        let alphabet = mixture.alphabet();
        let asize = alphabet.size() as usize;
        WindowedCesaro {
            alphabet,
            asize,
            beta: mixture.smoothing().beta(),
            scheme: mixture.weights(),
            cfg,
            trie: ContextTrie::new(alphabet, cfg.max_order, true),
            n: 0,
            log2_delta: 0,
            z: Vec::new(),
            s_exp: Vec::new(),
            inv_z: Vec::new(),
            u: Vec::new(),
            active: Vec::new(),
            live: Vec::new(),
            den_c: Vec::new(),
            num_c: Vec::new(),
            num_all: vec![Vec::new(); asize],
            qx: Vec::new(),
            scores: Vec::new(),
        }
    }

    pub(crate) fn stride(&self) -> usize {
        1 << self.log2_delta
    }

    #[cfg(test)]
    pub(crate) fn state_count(&self) -> usize {
        self.z.len()
    }

    /// One prequential step: returns the 0-1-loss prediction for the next
    /// symbol and the averaged conditional probability assigned to the
    /// symbol actually observed, then consumes that symbol.
    pub(crate) fn step(&mut self, x: Symbol) -> (Symbol, f64) {
        assert!(self.alphabet.contains(x));
        // The empty window spawns before prediction so the uniform term
        // participates from its birth step.
        if self.n.is_multiple_of(self.stride()) {
            self.z.push(1.0);
            self.s_exp.push(0);
            if self.z.len() > self.cfg.state_cap {
                self.halve_grid();
            }
        }
        let count = self.z.len();
        let n = self.n;
        let delta = self.stride();
        let asize_f = self.asize as f64;
        let drop = self.cfg.posterior_stop;
        let xu = x as usize;

        self.inv_z.clear();
        self.inv_z.extend(self.z.iter().map(|&zj| 1.0 / zj));
        self.qx.clear();
        self.qx.resize(count, 0.0);
        self.scores.clear();
        self.scores.resize(self.asize, 0.0);

        let chain: Vec<_> = self.trie.chain().to_vec();
        let mut k = 0usize;
        while k < self.cfg.max_order {
            // Windows where the order-k context occurs at least twice form a
            // grid prefix (in-window counts are nonincreasing in the start),
            // and those prefixes are nested across orders.
            let p = if k == 0 {
                if n == 0 {
                    0
                } else {
                    ((n - 1) / delta + 1).min(count)
                }
            } else if k <= chain.len() {
                self.trie
                    .node(chain[k - 1])
                    .buckets
                    .active_prefix()
                    .min(count)
            } else {
                0
            };
            if self.active.len() <= k {
                if p == 0 {
                    break;
                }
                self.active.push(0);
                self.live.push(0);
                self.u.push(Vec::new());
            }

            // Birth: the first step a window's order-k denominator turns
            // positive, every earlier factor was exactly uniform, so the
            // order enters with its prior weight at the window's scale.
            let born = self.active[k];
            if p > born {
                let w_k = self.scheme.w(k);
                for j in born..p {
                    self.u[k].push(w_k * pow2(-(self.s_exp[j] as i64)));
                }
                self.active[k] = p;
            }
            debug_assert_eq!(self.u[k].len(), self.active[k]);

            let lo = self.live[k].min(p);
            if lo < p {
                let ctx = if k == 0 { None } else { Some(chain[k - 1]) };
                if self.asize == 2 {
                    self.apply_order_binary(k, ctx, lo, p, xu);
                } else {
                    self.apply_order_general(k, ctx, lo, p, xu);
                }
                // Advance the dropped prefix against the pre-update
                // normalizer; each lane is dropped at most once, ever.
                if drop > 0.0 {
                    let uk = &mut self.u[k];
                    let mut ls = self.live[k];
                    while ls < p && uk[ls] * self.inv_z[ls] < drop {
                        uk[ls] = 0.0;
                        ls += 1;
                    }
                    self.live[k] = ls;
                }
            }
            k += 1;
        }

        // Averaged conditional, up to the shared affine map
        // P̄(a) = (score_a/count + 1)/|A|: argmax on scores is enough.
        let mut predicted = 0u32;
        let mut best = f64::NEG_INFINITY;
        for (a, &s) in self.scores.iter().enumerate() {
            if s > best {
                best = s;
                predicted = a as Symbol;
            }
        }
        let p_obs = (self.scores[xu] / count as f64 + 1.0) / asize_f;

        self.trie.extend(x);
        for (zj, &qj) in self.z.iter_mut().zip(&self.qx) {
            *zj += qj;
        }
        self.rescale();
        self.n += 1;
        (predicted, p_obs)
    }

    /// Raw in-window context counts for windows [lo, p); k = 0 counts are
    /// the window lengths themselves.
    fn fill_den(&mut self, k: usize, ctx: Option<u32>, lo: usize, p: usize) {
        let m = p - lo;
        resize_uninit(&mut self.den_c, m);
        match ctx {
            None => {
                let n = self.n;
                let delta = self.stride();
                for (i, slot) in self.den_c.iter_mut().enumerate() {
                    *slot = (n - (lo + i) * delta) as u32;
                }
            }
            Some(id) => self.trie.node(id).buckets.fill_counts(&mut self.den_c, lo),
        }
        debug_assert!(k > 0 || ctx.is_none());
    }

    /// In-window counts of context⧺a for windows [lo, p).
    fn fill_num(
        out: &mut Vec<u32>,
        trie: &ContextTrie,
        ctx: Option<u32>,
        a: usize,
        lo: usize,
        p: usize,
    ) {
        resize_uninit(out, p - lo);
        let child = match ctx {
            None => trie.root_child(a as Symbol),
            Some(id) => trie.node(id).child(a as Symbol),
        };
        match child {
            Some(cid) => trie.node(cid).buckets.fill_counts(out, lo),
            None => out.fill(0),
        }
    }

    /// Fused per-order update on a binary alphabet: one pass computes both
    /// factors (the unobserved one via Σ_a num = den), folds the scores, the
    /// normalizer increments, and the ladder update.
    fn apply_order_binary(&mut self, k: usize, ctx: Option<u32>, lo: usize, p: usize, xu: usize) {
        self.fill_den(k, ctx, lo, p);
        let num_c = std::mem::take(&mut self.num_c);
        let mut num_c = num_c;
        Self::fill_num(&mut num_c, &self.trie, ctx, xu, lo, p);
        // den = count − 1 for contexts (the boundary occurrence has no
        // continuation yet); the k = 0 "context" is the window itself.
        let (shift, sum_adj) = if k == 0 {
            (2.0 * self.beta, 0.0)
        } else {
            (2.0 * self.beta - 1.0, 1.0)
        };
        let beta = self.beta;
        let uk = &mut self.u[k][..p];
        let qx = &mut self.qx[..p];
        let iz = &self.inv_z[..p];
        let den_c = &self.den_c[..];
        let numx = &num_c[..];
        let mut s_obs = 0.0f64;
        let mut s_oth = 0.0f64;
        for i in 0..p - lo {
            let j = lo + i;
            let cnt = den_c[i] as f64;
            let rden = 2.0 / (cnt + shift);
            let nx = numx[i] as f64;
            let f_obs = (nx + beta) * rden;
            let f_oth = (cnt - sum_adj - nx + beta) * rden;
            let uj = uk[j];
            let t = uj * (f_obs - 1.0);
            qx[j] += t;
            s_obs += t * iz[j];
            s_oth += uj * (f_oth - 1.0) * iz[j];
            uk[j] = uj * f_obs;
        }
        self.scores[xu] += s_obs;
        self.scores[1 - xu] += s_oth;
        self.num_c = num_c;
    }

    /// General-alphabet variant: fills every child's counts and loops
    /// symbols inside the window pass, the observed one last.
    fn apply_order_general(&mut self, k: usize, ctx: Option<u32>, lo: usize, p: usize, xu: usize) {
        self.fill_den(k, ctx, lo, p);
        let mut num_all = std::mem::take(&mut self.num_all);
        for (a, out) in num_all.iter_mut().enumerate() {
            Self::fill_num(out, &self.trie, ctx, a, lo, p);
        }
        let shift = if k == 0 {
            self.beta * self.asize as f64
        } else {
            self.beta * self.asize as f64 - 1.0
        };
        let beta = self.beta;
        let asize_f = self.asize as f64;
        let uk = &mut self.u[k][..p];
        let qx = &mut self.qx[..p];
        let iz = &self.inv_z[..p];
        let den_c = &self.den_c[..];
        for i in 0..p - lo {
            let j = lo + i;
            let rden = asize_f / (den_c[i] as f64 + shift);
            let uj = uk[j];
            let w = uj * iz[j];
            for (a, num_a) in num_all.iter().enumerate() {
                if a == xu {
                    continue;
                }
                let f = (num_a[i] as f64 + beta) * rden;
                self.scores[a] += w * (f - 1.0);
            }
            let f = (num_all[xu][i] as f64 + beta) * rden;
            let t = uj * (f - 1.0);
            qx[j] += t;
            self.scores[xu] += t * iz[j];
            uk[j] = uj * f;
        }
        self.num_all = num_all;
    }

    fn halve_grid(&mut self) {
        retain_even(&mut self.z);
        retain_even(&mut self.s_exp);
        for uk in &mut self.u {
            retain_even(uk);
        }
        for a in &mut self.active {
            *a = a.div_ceil(2);
        }
        for l in &mut self.live {
            *l = l.div_ceil(2);
        }
        self.trie.double_delta();
        self.log2_delta += 1;
    }

    fn rescale(&mut self) {
        let hi = pow2(RESCALE_EXP as i64);
        let lo = pow2(-(RESCALE_EXP as i64));
        for j in 0..self.z.len() {
            while self.z[j] > hi {
                self.scale_window(j, RESCALE_EXP);
            }
            while self.z[j] < lo {
                self.scale_window(j, -RESCALE_EXP);
            }
        }
    }

    /// Multiplies every stored component of window j by 2^{−shift} and folds
    /// the shift into its exponent; the represented value is unchanged.
    fn scale_window(&mut self, j: usize, shift: i32) {
        let f = pow2(-(shift as i64));
        self.z[j] *= f;
        self.s_exp[j] += shift;
        let mut k = 0usize;
        while k < self.active.len() && self.active[k] > j {
            self.u[k][j] *= f;
            k += 1;
        }
    }
}

fn retain_even<T: Copy>(v: &mut Vec<T>) {
    let mut w = 0usize;
    let mut r = 0usize;
    while r < v.len() {
        v[w] = v[r];
        w += 1;
        r += 2;
    }
    v.truncate(w);
}

/// Length change without zero-filling; every slot is overwritten by a fill.
fn resize_uninit(v: &mut Vec<u32>, m: usize) {
    if v.len() < m {
        v.resize(m, 0);
    } else {
        v.truncate(m);
    }
}

/// Prequential 0-1-loss run of the suffix-averaged mixture over `seq`,
/// with bounded per-step work (see [`RunnerConfig`]). At stride 1 — inputs
/// no longer than the state cap — and posterior_stop 0 the averages are
/// exact.
pub fn run_prediction_ppm(
    seq: &SymbolSequence,
    mixture: &PpmMixture,
    cfg: RunnerConfig,
) -> PredictionTrace {
    assert_eq!(seq.alphabet(), mixture.alphabet());
    let mut runner = WindowedCesaro::new(mixture, cfg);
    let mut steps = Vec::with_capacity(seq.len());
    for &actual in seq.symbols() {
        let (predicted, _) = runner.step(actual);
        steps.push(PredictionStep {
            predicted,
            actual,
            mistake: predicted != actual,
        });
    }
    PredictionTrace {
        steps,
        suffix_cap: cfg.state_cap,
        final_stride: runner.stride(),
    }
}
