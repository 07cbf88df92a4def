use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use lexlink::bitext::{load_bitext, FunctionWords, TokenizerOptions};
use lexlink::evalkit::{
    build_bundle, generate_synthetic_bitext, precision_recall_curve, score_bundle, threshold_grid, write_curve_csv,
    AdjudicationBundle, GenerationSpec, GroundTruth, JudgmentSet,
};
use lexlink::induction::{induce_traced, load_model, save_model, InduceConfig};
use lexlink::lexicon::{export_lexicon, Lexicon};
use lexlink::linking::{link_bitext, write_links_tsv};
use serde::Serialize;

use crate::error::{self, CliError, CliResult};
use crate::{CurveArgs, InduceArgs, LexiconArgs, LinkArgs, SampleArgs, ScoreArgs, SynthArgs, TokenizerFlags};

/// Every run echoes its fully resolved settings to stderr.
fn announce<T: Serialize>(command: &str, settings: &T) -> CliResult {
    let text = toml::to_string(settings).map_err(|e| CliError::new("config", e))?;
    eprintln!("# lexlink {command}: resolved configuration\n{}", text.trim_end());
    Ok(())
}

pub fn init_threads(threads: usize) -> CliResult {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::new("threads", e))
}

/// Buffered output to `path`, or stdout when absent.
fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut out: Box<dyn Write>, path: Option<&Path>, result: io::Result<()>) -> CliResult {
    let shown = path.unwrap_or(Path::new("<stdout>"));
    result.and_then(|_| out.flush()).map_err(|e| error::io(shown, e))
}

fn tokenizer(flags: &TokenizerFlags, mut base: TokenizerOptions) -> TokenizerOptions {
    if flags.no_lowercase {
        base.lowercase = false;
    }
    if flags.no_split_hyphens {
        base.split_hyphens = false;
    }
    base
}

fn resolve_induce_config(args: &InduceArgs, threads: Option<usize>) -> CliResult<InduceConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| error::io(path, e))?;
            toml::from_str(&text).map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?
        }
        None => InduceConfig::default(),
    };
    config.tokenizer = tokenizer(&args.tokenizer, config.tokenizer);
    if let Some(p) = &args.source_function_words {
        config.source_function_words = Some(p.clone());
    }
    if let Some(p) = &args.target_function_words {
        config.target_function_words = Some(p.clone());
    }
    if let Some(c) = args.cutoff {
        config.cutoff = c;
    }
    if let Some(m) = args.max_iters {
        config.max_iters = m;
    }
    if let Some(m) = args.max_segment_len {
        config.max_segment_len = m;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = threads {
        config.threads = t;
    }
    if config.cutoff.is_nan() || config.cutoff <= 0.0 {
        return Err(CliError::new(
            "config",
            format!("cutoff must be positive, got {}", config.cutoff),
        ));
    }
    Ok(config)
}

pub fn induce(args: InduceArgs, threads: Option<usize>) -> CliResult {
    let config = resolve_induce_config(&args, threads)?;
    announce("induce", &config)?;
    init_threads(config.threads)?;
    let fw = FunctionWords::load(
        config.source_function_words.as_deref(),
        config.target_function_words.as_deref(),
        config.tokenizer.lowercase,
    )?;
    let bitext = load_bitext(&args.source, &args.target, &config.tokenizer, &fw)?;
    if !bitext.dropped().is_empty() {
        log::warn!(
            "{} segment pair(s) with an empty side were dropped",
            bitext.dropped().len()
        );
    }

    let mut trace_out = match &args.trace {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| error::io(p, e))?);
            writeln!(w, "class\titeration\tlambda_plus\tlambda_minus\tlog_likelihood").map_err(|e| error::io(p, e))?;
            Some(w)
        }
        None => None,
    };
    let mut trace_error = None;
    let model = induce_traced(&bitext, &config, &mut |t| {
        if let Some(w) = trace_out.as_mut() {
            if trace_error.is_none() {
                trace_error = writeln!(
                    w,
                    "{}\t{}\t{}\t{}\t{}",
                    t.class, t.iteration, t.lambda_plus, t.lambda_minus, t.log_likelihood
                )
                .err();
            }
        }
    })?;
    if let (Some(p), Some(mut w)) = (&args.trace, trace_out) {
        match trace_error {
            Some(e) => return Err(error::io(p, e)),
            None => w.flush().map_err(|e| error::io(p, e))?,
        }
    }
    save_model(&model, &args.output)?;

    eprintln!(
        "induced {} entries from {} segments: {} iterations, selected {}, converged={}",
        model.entries.len(),
        bitext.len(),
        model.history.len(),
        model.selected_iteration,
        model.converged
    );
    for p in &model.params {
        eprintln!(
            "  {}: lambda+={} lambda-={} tau={} logL={}",
            p.class, p.lambda_plus, p.lambda_minus, p.tau, p.log_likelihood
        );
    }
    Ok(())
}

pub fn lexicon(args: LexiconArgs) -> CliResult {
    announce("lexicon", &args)?;
    let model = load_model(&args.model)?;
    let lexicon = export_lexicon(&model, args.threshold.unwrap_or(model.config.cutoff));
    let mut out = output(args.output.as_deref())?;
    let result = lexicon.write_tsv(&mut out);
    finish(out, args.output.as_deref(), result)?;
    eprintln!("{} entries at ln L >= {}", lexicon.len(), lexicon.log_threshold);
    Ok(())
}

pub fn link(args: LinkArgs) -> CliResult {
    announce("link", &args)?;
    let model = load_model(&args.model)?;
    let source_fw = args
        .source_function_words
        .as_ref()
        .or(model.config.source_function_words.as_ref());
    let target_fw = args
        .target_function_words
        .as_ref()
        .or(model.config.target_function_words.as_ref());
    let fw = FunctionWords::load(
        source_fw.map(PathBuf::as_path),
        target_fw.map(PathBuf::as_path),
        model.config.tokenizer.lowercase,
    )?;
    let bitext = load_bitext(&args.source, &args.target, &model.config.tokenizer, &fw)?;
    let linked = link_bitext(&bitext, &model.score_table(&bitext), true);
    let segments = linked.segments.unwrap_or_default();
    let mut out = output(args.output.as_deref())?;
    let result = write_links_tsv(&bitext, &segments, &mut out);
    finish(out, args.output.as_deref(), result)?;
    eprintln!("{} links in {} segments", linked.stats.grand_total(), segments.len());
    Ok(())
}

pub fn sample(args: SampleArgs) -> CliResult {
    announce("eval sample", &args)?;
    let mut lexicon = Lexicon::load(&args.lexicon)?;
    lexicon.entries.sort_by(|a, b| {
        b.log_l
            .total_cmp(&a.log_l)
            .then_with(|| a.u.cmp(&b.u))
            .then_with(|| a.v.cmp(&b.v))
    });
    if let Some(t) = args.threshold {
        let floor = t.ln();
        lexicon.entries.retain(|e| e.log_l >= floor);
        lexicon.log_threshold = floor;
    } else if let Some(n) = args.top {
        lexicon.entries.truncate(n);
        if let Some(last) = lexicon.entries.last() {
            lexicon.log_threshold = last.log_l;
        }
    }
    let options = tokenizer(&args.tokenizer, TokenizerOptions::default());
    let bitext = load_bitext(&args.source, &args.target, &options, &FunctionWords::default())?;
    let bundle = build_bundle(&lexicon, &bitext, args.sets, args.size, args.seed, args.contexts)?;
    bundle.save(&args.output)?;
    eprintln!(
        "bundle {}: {} items from {} entries (recall {:.4})",
        bundle.bundle_id,
        bundle.items().count(),
        lexicon.len(),
        bundle.recall_level
    );
    Ok(())
}

pub fn score(args: ScoreArgs) -> CliResult {
    announce("eval score", &args)?;
    let bundle = AdjudicationBundle::load(&args.bundle)?;
    let judgments = JudgmentSet::load(&args.judgments)?;
    let report = score_bundle(&bundle, &judgments)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::new("schema", e))?;
    let mut out = output(args.output.as_deref())?;
    let result = writeln!(out, "{text}");
    finish(out, args.output.as_deref(), result)
}

pub fn curve(args: CurveArgs) -> CliResult {
    announce("eval curve", &args)?;
    let model = load_model(&args.model)?;
    let truth = GroundTruth::load(&args.truth)?;
    let thresholds = match &args.thresholds {
        Some(t) => t.clone(),
        None => threshold_grid(&model, args.points),
    };
    let points = precision_recall_curve(&model, &truth, &thresholds);
    let mut out = output(args.output.as_deref())?;
    let result = write_curve_csv(&points, &mut out);
    finish(out, args.output.as_deref(), result)
}

pub fn synth(args: SynthArgs) -> CliResult {
    announce("synth", &args)?;
    let spec = GenerationSpec {
        entries: args.entries,
        segments: args.segments,
        min_len: args.min_len,
        max_len: args.max_len,
        zipf_exponent: args.zipf_exponent,
        noise: args.noise,
        function_fraction: args.function_fraction,
        collocations: args.collocations,
    };
    let synthetic = generate_synthetic_bitext(&spec, args.seed)?;
    let dir = &args.output;
    std::fs::create_dir_all(dir).map_err(|e| error::io(dir, e))?;
    synthetic.write_text(&dir.join("source.txt"), &dir.join("target.txt"))?;
    synthetic.truth.save(&dir.join("truth.json"))?;
    for (name, words) in [
        ("source.fw", &synthetic.truth.source_function_words),
        ("target.fw", &synthetic.truth.target_function_words),
    ] {
        let path = dir.join(name);
        let body: String = words.iter().map(|w| format!("{w}\n")).collect();
        std::fs::write(&path, body).map_err(|e| error::io(&path, e))?;
    }
    eprintln!(
        "wrote {} segments to {} ({} of {} target tokens replaced)",
        synthetic.bitext.len(),
        dir.display(),
        synthetic.truth.replaced_tokens,
        synthetic.truth.target_tokens
    );
    Ok(())
}
