//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances are fixed here and are not
//! tuned to the implementation.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lexlink::bitext::{Bitext, LinkClass};
use lexlink::cooc::{build_cooc, CoocConfig};
use lexlink::estimation::{derive_tau, estimate_params, PairStats, SearchConfig};
use lexlink::evalkit::{
    bimodality, generate_synthetic_bitext, precision_recall_curve, score_against_truth, threshold_grid, GenerationSpec,
    Synthetic,
};
use lexlink::induction::{induce, load_model, save_model, InduceConfig, Model};
use lexlink::lexicon::{export_lexicon, Lexicon};
use lexlink::linking::{link_bitext, link_bitext_chunked};
use lexlink::scoring::{g2_score, initial_scores, log_binomial_pmf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

const SEED: u64 = 20_240_601;
const CUTOFF: f64 = 2.0;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn synthetic(noise: f64, collocations: usize) -> Synthetic {
    let spec = GenerationSpec {
        entries: 500,
        segments: 5000,
        noise,
        collocations,
        ..Default::default()
    };
    generate_synthetic_bitext(&spec, SEED).expect("valid generation spec")
}

fn induce_at_cutoff(bitext: &Bitext) -> Model {
    let config = InduceConfig {
        cutoff: CUTOFF,
        ..Default::default()
    };
    induce(bitext, &config).expect("induction succeeds")
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(f)
}

fn parameter_recovery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut draw = |p: f64, types: usize| -> Vec<(u64, u64)> {
        (0..types)
            .map(|_| {
                let n = rng.random_range(5..=50u64);
                (Binomial::new(n, p).unwrap().sample(&mut rng), n)
            })
            .collect()
    };
    let mut pairs = draw(0.8, 500);
    pairs.extend(draw(0.001, 5000));
    let stats = PairStats::from_counts(pairs);
    let lambda = stats.links() as f64 / stats.cooccurrences() as f64;
    let p = estimate_params(
        &stats,
        lambda,
        LinkClass::Content,
        &SearchConfig::default(),
        &mut |_, _, _| {},
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (dp, dm) = ((p.lambda_plus - 0.8).abs(), (p.lambda_minus - 0.001).abs());
    ensure(
        dp <= 0.02 && dm <= 0.02 && elapsed < Duration::from_secs(10),
        format!(
            "lambda+={:.5} (|err| {dp:.5}) lambda-={:.6} (|err| {dm:.6}) in {elapsed:.2?}; need both <= 0.02 and < 10s",
            p.lambda_plus, p.lambda_minus
        ),
    )
}

fn noise_free_recovery() -> Outcome {
    let s = synthetic(0.0, 0);
    let model = induce_at_cutoff(&s.bitext);
    let score = score_against_truth(&export_lexicon(&model, CUTOFF), &s.truth);
    let iterations = model.history.len();
    ensure(
        score.precision == 1.0 && !score.empty && score.recall >= 0.95 && model.converged && iterations <= 10,
        format!(
            "precision={} recall={:.4} ({} of {} reachable) converged={} after {iterations} iterations; need precision 1.0, recall >= 0.95, <= 10 iterations",
            score.precision, score.recall, score.true_positives, score.reachable, model.converged
        ),
    )
}

fn noise_robustness() -> Outcome {
    let s = synthetic(0.1, 0);
    let model = induce_at_cutoff(&s.bitext);
    let score = score_against_truth(&export_lexicon(&model, CUTOFF), &s.truth);
    let curve = precision_recall_curve(&model, &s.truth, &threshold_grid(&model, 10));
    let law = curve.len() == 10
        && curve
            .windows(2)
            .all(|w| w[1].precision >= w[0].precision && w[1].recall <= w[0].recall);
    let points: Vec<String> = curve
        .iter()
        .map(|c| format!("{:.1}:{:.3}/{:.3}", c.threshold, c.precision, c.recall))
        .collect();
    ensure(
        score.precision >= 0.95 && law,
        format!(
            "precision at cutoff={:.4} ({} of {} entries true), threshold law holds={law} over lnL:P/R [{}]; need precision >= 0.95 and the law",
            score.precision,
            score.true_positives,
            score.entries,
            points.join(" ")
        ),
    )
}

fn indirect_association() -> Outcome {
    let s = synthetic(0.0, 10);
    let model = induce_at_cutoff(&s.bitext);
    let lexicon = export_lexicon(&model, CUTOFF);
    let has = |u: String, v: String| lexicon.entries.iter().any(|e| e.u == u && e.v == v);
    let heads = s.truth.spec.collocation_heads();
    let indirect: Vec<usize> = heads
        .iter()
        .copied()
        .filter(|&h| has(format!("s{}", h + 1), format!("t{h}")))
        .collect();
    let missing: Vec<usize> = heads
        .iter()
        .copied()
        .filter(|&h| !has(format!("s{h}"), format!("t{h}")))
        .collect();
    ensure(
        indirect.is_empty() && missing.is_empty() && !heads.is_empty(),
        format!(
            "{} collocations; indirect entries {indirect:?}; missing direct entries {missing:?}",
            heads.len()
        ),
    )
}

fn bimodality_after_first_iteration() -> Outcome {
    let s = synthetic(0.0, 0);
    let cooc = build_cooc(&s.bitext, &CoocConfig::default()).map_err(|e| e.to_string())?;
    let links = link_bitext(&s.bitext, &initial_scores(&cooc), false).stats;
    let b = bimodality(&cooc, &links, 5, 0.2, 0.6);
    ensure(
        b.considered > 0 && b.fraction < 0.10,
        format!(
            "{} of {} pair types with n >= 5 have k/n in [0.2, 0.6] ({:.4}); need < 0.10",
            b.in_band, b.considered, b.fraction
        ),
    )
}

fn algebraic_identities() -> Outcome {
    let mut worst_mix = 0.0f64;
    let grid = [1e-9, 1e-6, 1e-4, 0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999999];
    for (a, &minus) in grid.iter().enumerate() {
        for &plus in &grid[a + 1..] {
            for t in 0..=20 {
                let lambda = minus + (plus - minus) * t as f64 / 20.0;
                let tau = derive_tau(plus, minus, lambda).map_err(|e| e.to_string())?;
                worst_mix = worst_mix.max((tau * plus + (1.0 - tau) * minus - lambda).abs());
            }
        }
    }
    let mut worst_pmf = 0.0f64;
    for n in 0..=200u64 {
        for &p in &[1e-6, 0.001, 0.05, 0.3, 0.5, 0.78, 0.99, 1.0 - 1e-6] {
            let total: f64 = (0..=n).map(|k| log_binomial_pmf(k, n, p).unwrap().exp()).sum();
            worst_pmf = worst_pmf.max((total - 1.0).abs());
        }
    }
    let mut worst_sym = 0.0f64;
    let mut worst_zero = 0.0f64;
    let mut zero_cases = 0;
    for total in [10u64, 24, 60, 100, 360] {
        for n_u in 1..=total {
            for n_v in 1..=total {
                for n_uv in (n_u + n_v).saturating_sub(total)..=n_u.min(n_v) {
                    let a = g2_score(n_uv, n_u, n_v, total).unwrap();
                    let b = g2_score(n_uv, n_v, n_u, total).unwrap();
                    worst_sym = worst_sym.max((a - b).abs());
                    if n_uv * total == n_u * n_v {
                        zero_cases += 1;
                        worst_zero = worst_zero.max(a.abs());
                    }
                }
            }
        }
    }
    ensure(
        worst_mix <= 1e-12 && worst_pmf <= 1e-9 && worst_sym == 0.0 && worst_zero <= 1e-9 && zero_cases > 0,
        format!(
            "mixture identity max err {worst_mix:.2e} (<= 1e-12); pmf sum max err {worst_pmf:.2e} (<= 1e-9); G2 asymmetry {worst_sym:.2e} (== 0); G2 at independence max {worst_zero:.2e} over {zero_cases} cases (<= 1e-9)"
        ),
    )
}

fn linking_invariants() -> Outcome {
    let (bitext, scores) = common::random_linking_case(SEED, 1000, 12);
    let cooc = build_cooc(&bitext, &CoocConfig::default()).map_err(|e| e.to_string())?;
    let reference = single_threaded(|| link_bitext_chunked(&bitext, &scores, true, 1000));
    let segments = reference.segments.as_ref().unwrap();
    if segments.len() != 1000 {
        return Err(format!("expected 1000 segment results, got {}", segments.len()));
    }
    for out in segments {
        common::replay_greedy(&bitext, &scores, out)?;
    }
    for class in LinkClass::ALL {
        for (&(u, v), &k) in reference.stats.class(class) {
            let n = cooc.class(class).n(u, v);
            if k > n {
                return Err(format!("k={k} exceeds n={n} for class {class} pair ({u}, {v})"));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    for chunk in [1, 3, 64, 256, 1000] {
        let out = pool.install(|| link_bitext_chunked(&bitext, &scores, true, chunk));
        if out.stats != reference.stats || out.segments != reference.segments {
            return Err(format!("results differ with chunk size {chunk} on 4 threads"));
        }
    }
    Ok(format!(
        "1000 segments, {} links: greedy replay, one-to-one, links <= min(l,m), k <= n, deterministic across 5 partitions and 1/4 threads",
        reference.stats.grand_total()
    ))
}

fn best_of<T>(runs: usize, mut f: impl FnMut() -> T) -> Duration {
    (0..runs)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn linking_performance() -> Outcome {
    let spec = GenerationSpec {
        entries: 2000,
        segments: 20_000,
        min_len: 6,
        max_len: 18,
        ..Default::default()
    };
    let s = generate_synthetic_bitext(&spec, SEED).map_err(|e| e.to_string())?;
    let fw = s.truth.function_words();
    let half = Bitext::from_lines(
        s.source_lines[..10_000]
            .iter()
            .map(String::as_str)
            .zip(s.target_lines[..10_000].iter().map(String::as_str)),
        &Default::default(),
        &fw,
    );
    let full = &s.bitext;
    let table = |b: &Bitext| initial_scores(&build_cooc(b, &CoocConfig::default()).unwrap());
    let (half_scores, full_scores) = (table(&half), table(full));
    let mean_len = half
        .segments()
        .iter()
        .map(|p| p.source.len() + p.target.len())
        .sum::<usize>() as f64
        / (2.0 * half.len() as f64);
    let (t10, t20) = single_threaded(|| {
        (
            best_of(3, || link_bitext(&half, &half_scores, false)),
            best_of(3, || link_bitext(full, &full_scores, false)),
        )
    });
    let ratio = t20.as_secs_f64() / t10.as_secs_f64();
    ensure(
        t10 < Duration::from_secs(5) && (1.4..=2.6).contains(&ratio),
        format!(
            "10k segments (mean length {mean_len:.1}) in {t10:.2?}, 20k in {t20:.2?}, ratio {ratio:.2}; need < 5s and ratio in [1.4, 2.6]"
        ),
    )
}

fn determinism_and_round_trips() -> Outcome {
    let s = synthetic(0.1, 0);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let first = single_threaded(|| induce_at_cutoff(&s.bitext));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let second = pool.install(|| induce_at_cutoff(&s.bitext));
    save_model(&first, &a).map_err(|e| e.to_string())?;
    save_model(&second, &b).map_err(|e| e.to_string())?;
    let identical = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    let reloaded = load_model(&a).map_err(|e| e.to_string())?;
    let lexicon = export_lexicon(&first, CUTOFF);
    let lex_path = dir.path().join("lexicon.tsv");
    lexicon.save(&lex_path).map_err(|e| e.to_string())?;
    let lex_back = Lexicon::load(&lex_path).map_err(|e| e.to_string())?;
    ensure(
        identical && reloaded == first && lex_back.entries == lexicon.entries,
        format!(
            "model files identical across 1 and 4 threads={identical}; model round trip={}; lexicon round trip={} ({} entries)",
            reloaded == first,
            lex_back.entries == lexicon.entries,
            lexicon.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("parameter recovery", parameter_recovery),
        ("noise-free end-to-end recovery", noise_free_recovery),
        ("noise robustness and threshold law", noise_robustness),
        ("indirect-association suppression", indirect_association),
        ("bimodality after iteration 1", bimodality_after_first_iteration),
        ("algebraic identities", algebraic_identities),
        ("linking invariants", linking_invariants),
        ("linking performance", linking_performance),
        ("determinism and round trips", determinism_and_round_trips),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
