//! Convergence diagnostic for the suffix-averaged predictor: how far its
//! conditional sits from the source's true conditional along real
//! trajectories, as a function of history length.

use crate::exec::map_indexed;
use crate::measure::SequentialMeasure;
use crate::ppm::PpmMixture;
use crate::sources::SourceModel;

use super::runner::{RunnerConfig, WindowedCesaro};

/// Mean over replicas of ln p(x_{m+1}|x_{1:m}) − ln R̄(x_{m+1}|x_{1:m}) at
/// one history length m, where p is the source's conditional and R̄ the
/// suffix-averaged model conditional, both evaluated at the symbol actually
/// drawn.
#[derive(Clone, Copy, Debug)]
pub struct DiagnosticPoint {
    pub history_len: usize,
    pub mean_log_ratio: f64,
}

/// Runs `replicas` independent trajectories of `source` (seeds `base_seed`,
/// `base_seed`+1, …), pushes each through the windowed suffix-averaged
/// mixture, and records the realized-symbol log-ratio at every history
/// length in `grid`, averaged across replicas.
///
/// Each term's expectation over the next symbol is the KL divergence from
/// the source's one-step law to the averaged model conditional, which
/// vanishes as the history grows; a mean near zero at large m is the
/// observable signature of that convergence.
pub fn log_ratio_diagnostic(
    source: &SourceModel,
    mixture: &PpmMixture,
    grid: &[usize],
    replicas: usize,
    base_seed: u64,
    cfg: RunnerConfig,
) -> Vec<DiagnosticPoint> {
    let alphabet = source
        .alphabet()
        .expect("diagnostic needs a finite-alphabet source");
    assert_eq!(alphabet, mixture.alphabet());
    assert!(replicas >= 1);
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Vec::new();
    }
    let n_max = grid.last().unwrap() + 1;
    let per_replica: Vec<Vec<f64>> = map_indexed(replicas, |r| {
        let seq = source.sample_symbols(n_max, base_seed + r as u64);
        let xs = seq.symbols();
        let mut runner = WindowedCesaro::new(mixture, cfg);
        let mut vals = Vec::with_capacity(grid.len());
        let mut next = 0usize;
        for (i, &x) in xs.iter().enumerate() {
            let (_, p_obs) = runner.step(x);
            if next < grid.len() && grid[next] == i {
                let truth = source.true_conditional(&xs[..i]).prob(x);
                vals.push(truth.ln() - p_obs.ln());
                next += 1;
            }
        }
        vals
    });
    grid.iter()
        .enumerate()
        .map(|(gi, &m)| DiagnosticPoint {
            history_len: m,
            mean_log_ratio: per_replica.iter().map(|v| v[gi]).sum::<f64>() / replicas as f64,
        })
        .collect()
}
