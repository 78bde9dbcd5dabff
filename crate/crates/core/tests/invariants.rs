//! Statistical cross-checks tying the samplers to their analytic
//! conditionals and rates, the predictor to the Bayes error, and the
//! predictive density to exact sub-normalization — at scales where sampling
//! noise sits far below the asserted tolerances.

use entroscope_core::measure::{Alphabet, Symbol};
use entroscope_core::npd::{predictive_density, MaxLevel, NpdConfig};
use entroscope_core::ppm::{PpmMixture, SmoothingRule, WeightScheme};
use entroscope_core::predict::{run_prediction_ppm, RunnerConfig};
use entroscope_core::quantize::ReferenceMeasure;
use entroscope_core::sources::SourceModel;

/// Empirical next-symbol frequencies after each context of length `ctx_len`
/// must match the source's analytic conditional.
fn check_conditionals(source: &SourceModel, n: usize, ctx_len: usize, tol: f64) {
    let asize = source.alphabet().unwrap().size() as usize;
    let xs = source.sample_symbols(n, 9).symbols().to_vec();
    let contexts = asize.pow(ctx_len as u32);
    let mut hits = vec![vec![0u64; asize]; contexts];
    for w in xs.windows(ctx_len + 1) {
        let ctx = w[..ctx_len]
            .iter()
            .fold(0usize, |acc, &s| acc * asize + s as usize);
        hits[ctx][w[ctx_len] as usize] += 1;
    }
    for (ctx, counts) in hits.iter().enumerate() {
        let total: u64 = counts.iter().sum();
        if total < 1000 {
            continue;
        }
        // Decode the context index back into symbols, most recent last.
        let mut history = vec![0 as Symbol; ctx_len];
        let mut c = ctx;
        for slot in history.iter_mut().rev() {
            *slot = (c % asize) as Symbol;
            c /= asize;
        }
        let truth = source.true_conditional(&history);
        for (a, &cnt) in counts.iter().enumerate() {
            let freq = cnt as f64 / total as f64;
            let want = truth.prob(a as Symbol);
            assert!(
                (freq - want).abs() <= tol,
                "context {history:?}: empirical P({a}|·) = {freq:.4}, analytic {want:.4}"
            );
        }
    }
}

#[test]
fn sampled_conditionals_match_the_analytic_ones() {
    let markov = SourceModel::two_state_markov();
    // Length-2 contexts also exercise the order-1 property P(x|ab) = P(x|b).
    check_conditionals(&markov, 1_000_000, 1, 0.01);
    check_conditionals(&markov, 1_000_000, 2, 0.01);
    let iid = SourceModel::iid_categorical(vec![0.3, 0.7]).unwrap();
    check_conditionals(&iid, 500_000, 1, 0.01);

    // Stationary start: symbol frequencies match (2/3, 1/3) from step one.
    let xs = markov.sample_symbols(1_000_000, 5);
    let ones = xs.symbols().iter().filter(|&&s| s == 1).count() as f64;
    let frac = ones / xs.len() as f64;
    assert!((frac - 1.0 / 3.0).abs() <= 0.005, "P(state 1) = {frac:.4}");
}

#[test]
fn plug_in_log_loss_matches_the_analytic_rate() {
    let cases = [
        SourceModel::fair_coin(),
        SourceModel::two_state_markov(),
        SourceModel::iid_categorical(vec![0.3, 0.7]).unwrap(),
        SourceModel::periodic(vec![0, 1]).unwrap(),
    ];
    for source in cases {
        let n = 100_000usize;
        let xs = source.sample_symbols(n, 13).symbols().to_vec();
        let mut nll = 0.0f64;
        for i in 0..n {
            nll -= source.true_conditional(&xs[..i]).prob(xs[i]).ln();
        }
        let rate = source.analytic_entropy_rate(None).unwrap().nats;
        assert!(
            (nll / n as f64 - rate).abs() <= 0.01,
            "plug-in {:.4} vs analytic {rate:.4}",
            nll / n as f64
        );
    }
}

#[test]
fn ar1_sample_moments_match_the_stationary_law() {
    let xs = SourceModel::gaussian_ar1(0.5)
        .unwrap()
        .sample_reals(1_000_000, 17);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let lag1 = xs
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum::<f64>()
        / (n - 1.0);
    assert!(mean.abs() <= 0.01, "mean {mean:.4}");
    assert!((var - 1.0).abs() <= 0.01, "variance {var:.4}");
    assert!(
        (lag1 / var - 0.5).abs() <= 0.01,
        "lag-1 autocorrelation {:.4}",
        lag1 / var
    );
}

#[test]
fn mistake_density_approaches_the_bayes_error() {
    let mixture = PpmMixture::new(
        Alphabet::new(2),
        SmoothingRule::Laplace,
        WeightScheme::Rational,
    );
    // Biased i.i.d.: the best achievable 0-1 loss is min(p, 1−p) = 0.3.
    let iid = SourceModel::iid_categorical(vec![0.3, 0.7]).unwrap();
    for seed in 0..10u64 {
        let seq = iid.sample_symbols(30_000, seed);
        let d = run_prediction_ppm(&seq, &mixture, RunnerConfig::default()).mistake_density();
        assert!((d - 0.3).abs() <= 0.015, "seed {seed}: density {d:.4}");
    }
    // Deterministic alternation is learned outright.
    let seq = SourceModel::periodic(vec![0, 1])
        .unwrap()
        .sample_symbols(4000, 0);
    let trace = run_prediction_ppm(&seq, &mixture, RunnerConfig::default());
    assert!(
        trace.mistake_density() < 0.01,
        "density {}",
        trace.mistake_density()
    );
    assert!(trace.steps[2000..].iter().all(|s| !s.mistake));
}

#[test]
fn predictive_density_integrates_to_its_exact_mass() {
    // With R_max = 8 the conditional density is constant on each dyadic cell
    // of width 2^-8, so a 1024-point midpoint rule integrates it exactly:
    // 1 − 1/(R_max+2) for an empty history (level weights only), and 1 for
    // any nonempty history (per-level marginal consistency).
    let mut config = NpdConfig::new(ReferenceMeasure::Uniform01);
    config.max_level = MaxLevel::Fixed(8);
    let histories: [&[f64]; 3] = [&[], &[0.3], &[0.11, 0.52, 0.93, 0.48, 0.27]];
    for history in histories {
        let m = 1024usize;
        let mut integral = 0.0f64;
        for i in 0..m {
            let x = (i as f64 + 0.5) / m as f64;
            integral += predictive_density(x, history, &config).unwrap();
        }
        integral /= m as f64;
        let want = if history.is_empty() {
            1.0 - 1.0 / 10.0
        } else {
            1.0
        };
        assert!(
            (integral - want).abs() <= 1e-9,
            "history of {} samples: ∫ = {integral:.12}, want {want}",
            history.len()
        );
    }
}
