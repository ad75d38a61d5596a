//! Command-line entry point: enrich embeddings, evaluate them on
//! word-similarity benchmarks, inspect nearest neighbors, and print file
//! facts. Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure.

use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use embedfit::{
    evaluate_with_policy, load_dataset, load_embeddings, load_lexicon, neighbors,
    parse_pipeline_file, run_pipeline, save_embeddings, BetaMode, BetweenWeighting, Error,
    ErrorCategory, ExtrofitOptions, OovPolicy, PipelineOptions, PipelineSpec, ResourceRef,
    Result, RetrofitConfig, Step, UnsupConfig,
};

#[derive(Parser)]
#[command(
    name = "embedfit",
    version,
    about = "Post-processing toolkit for word embeddings: retrofitting, \
             extrofitting, unsupervised enrichment, and evaluation",
    after_help = "Everything is deterministic: identical inputs and flags \
                  always produce identical outputs, regardless of --threads."
)]
struct Cli {
    /// Cap the number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)] // parsed once; the size gap is irrelevant
enum Command {
    /// Transform an embedding and write the result.
    Enrich(EnrichArgs),
    /// Score an embedding against word-similarity benchmarks (TSV output).
    Eval(EvalArgs),
    /// List the nearest words to one or more cues by cosine.
    Neighbors(NeighborsArgs),
    /// Print vocabulary size, dimensionality, and a finiteness check.
    Info(InfoArgs),
}

#[derive(Args)]
struct EnrichArgs {
    /// Method: retro, extro, unsup-extro, extro-n, rextro, eretro,
    /// stepwise-rextro, stepwise-eretro, or unsup-then-<scheme>.
    #[arg(long, conflicts_with = "pipeline")]
    method: Option<String>,

    /// Pipeline spec file (one step per line, `#` comments, optional
    /// `repeat=N`; steps `retro`, `extro`, `unsup` with key=value knobs).
    #[arg(long)]
    pipeline: Option<PathBuf>,

    /// Synonym lexicon: one line per headword followed by its synonyms.
    #[arg(long)]
    lexicon: Option<PathBuf>,

    /// First count for named schemes (e.g. rounds of stepwise-rextro).
    #[arg(long, default_value_t = 1)]
    n: usize,

    /// Second count for rextro/eretro.
    #[arg(long, default_value_t = 0)]
    m: usize,

    /// Retrofit: weight of the stay-close-to-original term.
    #[arg(long)]
    alpha: Option<f64>,

    /// Retrofit: number of coordinate-minimization sweeps.
    #[arg(long)]
    iterations: Option<usize>,

    /// Retrofit: pair weight, "invdeg" or a nonnegative constant.
    #[arg(long)]
    beta: Option<String>,

    /// Extrofit: output dimensionality, a number or "input".
    #[arg(long)]
    out_dim: Option<String>,

    /// Extrofit: within-class scatter shrinkage in [0, 1].
    #[arg(long)]
    shrinkage: Option<f64>,

    /// Extrofit: between-class weighting, "size" or "uniform".
    #[arg(long)]
    weighting: Option<String>,

    /// Unsupervised: latent dimensionality for class mining.
    #[arg(long)]
    k: Option<usize>,

    /// Unsupervised: cosine threshold for relatedness in (0, 1].
    #[arg(long)]
    threshold: Option<f64>,

    /// Unsupervised: per-word cap on accepted related words.
    #[arg(long)]
    max_candidates: Option<usize>,

    /// Unsupervised: embedding file to mine classes from
    /// (default: the matrix entering the step).
    #[arg(long)]
    resource: Option<PathBuf>,

    /// Write the matrix after every step to {PREFIX}.stepNNN.txt
    /// ({PREFIX}.step000.txt is the input).
    #[arg(long, value_name = "PREFIX")]
    checkpoint: Option<PathBuf>,

    /// Input embedding (text format: word followed by its values).
    input: PathBuf,

    /// Output path for the enriched embedding.
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// How to treat pairs with out-of-vocabulary words.
    #[arg(long, value_enum, default_value_t = OovArg::Skip)]
    oov: OovArg,

    /// Embedding to evaluate.
    embedding: PathBuf,

    /// Benchmark files (`word1 word2 score` per line), one report row each.
    #[arg(required = true)]
    datasets: Vec<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OovArg {
    /// Drop the pair and report it in the pairs_oov column.
    Skip,
    /// Score the pair 0 and count it as used.
    Zero,
}

#[derive(Args)]
struct NeighborsArgs {
    /// Cue word; repeat the flag for several cues (blocks are separated
    /// by a blank line).
    #[arg(long = "word", required = true)]
    words: Vec<String>,

    /// Number of neighbors per cue.
    #[arg(long, default_value_t = 10)]
    k: usize,

    /// Embedding to search.
    embedding: PathBuf,
}

#[derive(Args)]
struct InfoArgs {
    /// Embedding to inspect.
    embedding: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprintln!("{err}");
            std::process::exit(1);
        }
    };

    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let outcome = match cli.command {
        Command::Enrich(args) => cmd_enrich(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Neighbors(args) => cmd_neighbors(args),
        Command::Info(args) => cmd_info(args),
    };

    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(match err.category() {
            ErrorCategory::Usage => 1,
            ErrorCategory::Data => 2,
            ErrorCategory::Numerical => 3,
        });
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParam(msg)
}

fn retro_config(args: &EnrichArgs) -> Result<RetrofitConfig> {
    let mut config = RetrofitConfig::default();
    if let Some(alpha) = args.alpha {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(invalid(format!("--alpha must be a nonnegative number, got {alpha}")));
        }
        config.alpha = alpha;
    }
    if let Some(iterations) = args.iterations {
        if iterations == 0 {
            return Err(invalid("--iterations must be at least 1".into()));
        }
        config.iterations = iterations;
    }
    if let Some(beta) = &args.beta {
        config.beta_mode = if beta == "invdeg" {
            BetaMode::InverseDegree
        } else {
            let value: f64 = beta
                .parse()
                .map_err(|_| invalid(format!("--beta must be \"invdeg\" or a number, got {beta:?}")))?;
            if !value.is_finite() || value < 0.0 {
                return Err(invalid(format!("--beta constant must be nonnegative, got {value}")));
            }
            BetaMode::Constant(value)
        };
    }
    Ok(config)
}

fn extro_options(args: &EnrichArgs) -> Result<ExtrofitOptions> {
    let mut options = ExtrofitOptions::default();
    if let Some(out_dim) = &args.out_dim {
        options.out_dim = if out_dim == "input" {
            None
        } else {
            let value: usize = out_dim.parse().map_err(|_| {
                invalid(format!("--out-dim must be \"input\" or a number, got {out_dim:?}"))
            })?;
            Some(value)
        };
    }
    if let Some(shrinkage) = args.shrinkage {
        if !(0.0..=1.0).contains(&shrinkage) {
            return Err(invalid(format!("--shrinkage must lie in [0, 1], got {shrinkage}")));
        }
        options.shrinkage = shrinkage;
    }
    if let Some(weighting) = &args.weighting {
        options.between_weighting = match weighting.as_str() {
            "size" => BetweenWeighting::SizeWeighted,
            "uniform" => BetweenWeighting::Uniform,
            other => {
                return Err(invalid(format!(
                    "--weighting must be \"size\" or \"uniform\", got {other:?}"
                )))
            }
        };
    }
    Ok(options)
}

fn unsup_config(args: &EnrichArgs) -> Result<UnsupConfig> {
    let mut config = UnsupConfig::default();
    if let Some(k) = args.k {
        if k == 0 {
            return Err(invalid("--k must be at least 1".into()));
        }
        config.latent_dim = k;
    }
    if let Some(threshold) = args.threshold {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(invalid(format!("--threshold must lie in (0, 1], got {threshold}")));
        }
        config.threshold = threshold;
    }
    if let Some(cap) = args.max_candidates {
        if cap == 0 {
            return Err(invalid("--max-candidates must be at least 1".into()));
        }
        config.max_candidates = cap;
    }
    Ok(config)
}

/// Turn the enrich flags into an explicit pipeline spec.
fn build_spec(args: &EnrichArgs) -> Result<(String, PipelineSpec)> {
    let retro = retro_config(args)?;
    let extro = extro_options(args)?;
    let unsup = unsup_config(args)?;
    let resource = match &args.resource {
        Some(path) => ResourceRef::File(path.clone()),
        None => ResourceRef::Current,
    };

    if let Some(path) = &args.pipeline {
        let spec = parse_pipeline_file(path)?;
        return Ok((format!("pipeline {}", path.display()), spec));
    }

    let method = args
        .method
        .as_deref()
        .ok_or_else(|| invalid("pass --method or --pipeline".into()))?;

    let spec = match method.replace('-', "_").as_str() {
        "retro" => PipelineSpec {
            steps: vec![Step::Retro(retro)],
            repeat: 1,
        },
        "extro" => PipelineSpec {
            steps: vec![Step::Extro(extro)],
            repeat: 1,
        },
        "unsup_extro" => PipelineSpec {
            steps: vec![Step::UnsupExtro(unsup, resource)],
            repeat: 1,
        },
        _ => {
            let mut spec = embedfit::named_pipeline(method, args.n, args.m)?;
            for step in &mut spec.steps {
                match step {
                    Step::Retro(c) => *c = retro,
                    Step::Extro(o) => *o = extro,
                    Step::UnsupExtro(c, r) => {
                        *c = unsup;
                        *r = resource.clone();
                    }
                }
            }
            spec
        }
    };
    Ok((method.to_string(), spec))
}

fn cmd_enrich(args: EnrichArgs) -> Result<()> {
    let start = Instant::now();
    let (label, spec) = build_spec(&args)?;

    let (w, _) = load_embeddings(&args.input)?;
    let lexicon = match &args.lexicon {
        Some(path) => Some(load_lexicon(path)?),
        None => None,
    };
    let options = PipelineOptions {
        checkpoint_prefix: args.checkpoint.clone(),
    };

    let out = run_pipeline(&w, lexicon.as_ref(), &spec, &options)?;
    save_embeddings(&out, &args.output)?;

    println!(
        "{label}: {} step(s) x {} in {:.2}s -> {}",
        spec.steps.len(),
        spec.repeat,
        start.elapsed().as_secs_f64(),
        args.output.display()
    );
    Ok(())
}

/// Aggregate bucket for a benchmark, guessed from its file stem.
fn bucket(name: &str) -> Option<&'static str> {
    let lower = name.to_ascii_lowercase();
    for prefix in ["men", "wordsim", "ws"] {
        if lower.starts_with(prefix) {
            return Some("gen");
        }
    }
    for prefix in ["simlex", "simverb", "sl", "sv"] {
        if lower.starts_with(prefix) {
            return Some("spec");
        }
    }
    None
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let (w, _) = load_embeddings(&args.embedding)?;
    let policy = match args.oov {
        OovArg::Skip => OovPolicy::Skip,
        OovArg::Zero => OovPolicy::Zero,
    };

    let mut general = Vec::new();
    let mut special = Vec::new();
    for path in &args.datasets {
        let dataset = load_dataset(path)?;
        let report = evaluate_with_policy(&w, &dataset, policy)?;
        println!(
            "{}\t{:.4}\t{}\t{}",
            dataset.name, report.rho, report.pairs_used, report.pairs_oov
        );
        match bucket(&dataset.name) {
            Some("gen") => general.push(report.rho),
            Some("spec") => special.push(report.rho),
            _ => {}
        }
    }

    if !general.is_empty() {
        println!("Gen.\t{:.4}", general.iter().sum::<f64>() / general.len() as f64);
    }
    if !special.is_empty() {
        println!("Spec.\t{:.4}", special.iter().sum::<f64>() / special.len() as f64);
    }
    Ok(())
}

fn cmd_neighbors(args: NeighborsArgs) -> Result<()> {
    let (w, _) = load_embeddings(&args.embedding)?;
    for (i, cue) in args.words.iter().enumerate() {
        if i > 0 {
            println!();
        }
        for (rank, (word, cos)) in neighbors(&w, cue, args.k)?.iter().enumerate() {
            println!("{} {} {:.4}", rank + 1, word, cos);
        }
    }
    Ok(())
}

fn cmd_info(args: InfoArgs) -> Result<()> {
    let (w, stats) = load_embeddings(&args.embedding)?;
    let finite = w.matrix().iter().all(|v| v.is_finite());
    println!("words: {}", w.len());
    println!("dimensions: {}", w.dim());
    println!("finite: {}", if finite { "yes" } else { "no" });
    if stats.duplicates > 0 {
        println!("duplicates dropped: {}", stats.duplicates);
    }
    Ok(())
}
