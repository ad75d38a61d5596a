//! Composition of enrichment passes into deep variants: stacked
//! extrofitting, retrofit-then-extrofit (and the reverse), stepwise
//! alternation, and unsupervised bootstrapping.
//!
//! A pipeline is an ordered list of steps plus an outer repetition count.
//! Steps run strictly left to right, `repeat` times; lexicon-derived
//! synonym pairs and classes are rebuilt each repetition (the vocabulary
//! never changes, so this is idempotent, but it keeps the loop honest if
//! that ever changes). Optionally the matrix is checkpointed to disk after
//! every step — checkpoint 0 is the untouched input — which is how
//! per-iteration score curves are produced.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::embedding::{load_embeddings, save_embeddings, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::extrofit::{extrofit, ExtrofitOptions};
use crate::lexicon::{build_classes, synonym_pairs, Lexicon};
use crate::linalg::BetweenWeighting;
use crate::retrofit::{retrofit, BetaMode, RetrofitConfig};
use crate::unsupervised::{unsup_extrofit, UnsupConfig};

/// Where an unsupervised step mines its classes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ResourceRef {
    /// Mine from the matrix as it stands when the step runs.
    Current,
    /// Mine from a pretrained embedding file.
    File(PathBuf),
}

/// One enrichment pass.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    /// Retrofit against lexicon synonym pairs.
    Retro(RetrofitConfig),
    /// Extrofit with lexicon-derived classes.
    Extro(ExtrofitOptions),
    /// Extrofit with classes mined from an embedding.
    UnsupExtro(UnsupConfig, ResourceRef),
}

/// An ordered step list with an outer repetition count.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub steps: Vec<Step>,
    pub repeat: usize,
}

/// Execution knobs for [`run_pipeline`].
#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    /// When set, the matrix is written to `{prefix}.step{NNN}.txt` after
    /// every step, with `{prefix}.step000.txt` holding the input.
    pub checkpoint_prefix: Option<PathBuf>,
}

fn save_checkpoint(
    options: &PipelineOptions,
    emb: &EmbeddingMatrix,
    counter: usize,
) -> Result<()> {
    if let Some(prefix) = &options.checkpoint_prefix {
        let path = format!("{}.step{counter:03}.txt", prefix.display());
        save_embeddings(emb, path)?;
    }
    Ok(())
}

/// Apply `spec` to `w`. The lexicon is required whenever the pipeline
/// contains a retrofit or (supervised) extrofit step.
pub fn run_pipeline(
    w: &EmbeddingMatrix,
    lexicon: Option<&Lexicon>,
    spec: &PipelineSpec,
    options: &PipelineOptions,
) -> Result<EmbeddingMatrix> {
    if spec.steps.is_empty() {
        return Err(Error::InvalidParam("pipeline has no steps".into()));
    }
    if spec.repeat == 0 {
        return Err(Error::InvalidParam("pipeline repeat count must be ≥ 1".into()));
    }
    let needs_lexicon = spec
        .steps
        .iter()
        .any(|s| matches!(s, Step::Retro(_) | Step::Extro(_)));
    let lexicon = if needs_lexicon {
        Some(lexicon.ok_or_else(|| {
            Error::InvalidParam(
                "pipeline contains retrofit/extrofit steps but no semantic lexicon was provided"
                    .into(),
            )
        })?)
    } else {
        None
    };

    let mut current = w.clone();
    let mut counter = 0usize;
    save_checkpoint(options, &current, counter)?;

    let mut resources: HashMap<PathBuf, EmbeddingMatrix> = HashMap::new();

    for _rep in 0..spec.repeat {
        let mut pairs = None;
        let mut classes = None;
        for step in &spec.steps {
            current = match step {
                Step::Retro(config) => {
                    let lex = lexicon.expect("checked above");
                    let p = pairs.get_or_insert_with(|| synonym_pairs(lex, current.vocab()));
                    retrofit(&current, p, config)?
                }
                Step::Extro(opts) => {
                    let lex = lexicon.expect("checked above");
                    let c = classes.get_or_insert_with(|| build_classes(lex, current.vocab()));
                    extrofit(&current, c, opts)?
                }
                Step::UnsupExtro(config, resource) => match resource {
                    ResourceRef::Current => unsup_extrofit(&current, &current, config)?,
                    ResourceRef::File(path) => {
                        if !resources.contains_key(path) {
                            let (emb, _) = load_embeddings(path)?;
                            resources.insert(path.clone(), emb);
                        }
                        unsup_extrofit(&current, &resources[path], config)?
                    }
                },
            };
            counter += 1;
            save_checkpoint(options, &current, counter)?;
        }
    }
    Ok(current)
}

/// Expand a named composition scheme into an explicit spec.
///
/// Recognized names (hyphens and underscores interchangeable):
///
/// * `extro_n` — n extrofit steps, repeat 1
/// * `rextro` — n retrofit steps then m extrofit steps, repeat 1
/// * `eretro` — n extrofit steps then m retrofit steps, repeat 1
/// * `stepwise_rextro` — `[Retro, Extro]`, repeat n
/// * `stepwise_eretro` — `[Extro, Retro]`, repeat n
/// * `unsup_then_<any of the above>` — the inner scheme unrolled to
///   repeat 1 with one unsupervised step prepended
///
/// All steps carry default configurations; adjust `spec.steps` afterwards
/// to override.
pub fn named_pipeline(name: &str, n: usize, m: usize) -> Result<PipelineSpec> {
    let canonical = name.to_ascii_lowercase().replace('-', "_");

    if let Some(inner_name) = canonical.strip_prefix("unsup_then_") {
        let inner = named_pipeline(inner_name, n, m)?;
        // Unroll so the unsupervised bootstrap runs exactly once, up front.
        let mut steps = vec![Step::UnsupExtro(
            UnsupConfig::default(),
            ResourceRef::Current,
        )];
        for _ in 0..inner.repeat {
            steps.extend(inner.steps.iter().cloned());
        }
        return Ok(PipelineSpec { steps, repeat: 1 });
    }

    let retro = || Step::Retro(RetrofitConfig::default());
    let extro = || Step::Extro(ExtrofitOptions::default());

    let spec = match canonical.as_str() {
        "extro_n" => {
            if n == 0 {
                return Err(Error::InvalidParam("extro_n needs n ≥ 1".into()));
            }
            PipelineSpec {
                steps: (0..n).map(|_| extro()).collect(),
                repeat: 1,
            }
        }
        "rextro" => {
            if n == 0 && m == 0 {
                return Err(Error::InvalidParam("rextro needs n + m ≥ 1".into()));
            }
            let mut steps: Vec<Step> = (0..n).map(|_| retro()).collect();
            steps.extend((0..m).map(|_| extro()));
            PipelineSpec { steps, repeat: 1 }
        }
        "eretro" => {
            if n == 0 && m == 0 {
                return Err(Error::InvalidParam("eretro needs n + m ≥ 1".into()));
            }
            let mut steps: Vec<Step> = (0..n).map(|_| extro()).collect();
            steps.extend((0..m).map(|_| retro()));
            PipelineSpec { steps, repeat: 1 }
        }
        "stepwise_rextro" => {
            if n == 0 {
                return Err(Error::InvalidParam("stepwise_rextro needs n ≥ 1".into()));
            }
            PipelineSpec {
                steps: vec![retro(), extro()],
                repeat: n,
            }
        }
        "stepwise_eretro" => {
            if n == 0 {
                return Err(Error::InvalidParam("stepwise_eretro needs n ≥ 1".into()));
            }
            PipelineSpec {
                steps: vec![extro(), retro()],
                repeat: n,
            }
        }
        other => {
            return Err(Error::InvalidParam(format!(
                "unknown pipeline name {other:?}"
            )))
        }
    };
    Ok(spec)
}

fn parse_kv(token: &str) -> Option<(&str, &str)> {
    token.split_once('=')
}

/// Parse a plain-text pipeline file: one step per line, `#` comments,
/// an optional `repeat=N` directive, and `key=value` step parameters.
///
/// ```text
/// # stepwise alternation, six rounds
/// repeat=6
/// retro alpha=1 iterations=10 beta=invdeg
/// extro shrinkage=0.1 weighting=size
/// ```
///
/// Step names: `retro` (keys `alpha`, `iterations`, `beta` — a number or
/// `invdeg`), `extro` (keys `out_dim` — a number or `input`, `shrinkage`,
/// `weighting` — `size` or `uniform`), `unsup` (keys `k`, `threshold`,
/// `max_candidates`, `resource` — `current` or a file path).
pub fn parse_pipeline_file(path: impl AsRef<Path>) -> Result<PipelineSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;

    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut steps = Vec::new();
    let mut repeat: Option<usize> = None;

    for (lineno0, raw) in text.lines().enumerate() {
        let lineno = lineno0 + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }

        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("non-empty line");

        if head == "repeat" || head.starts_with("repeat=") {
            let value = if let Some((_, v)) = head.split_once('=') {
                v.to_string()
            } else {
                tokens
                    .clone()
                    .collect::<Vec<_>>()
                    .join("")
                    .trim_start_matches('=')
                    .to_string()
            };
            let parsed: usize = value
                .parse()
                .map_err(|_| err(lineno, format!("bad repeat count {value:?}")))?;
            if repeat.replace(parsed).is_some() {
                return Err(err(lineno, "repeat specified twice".into()));
            }
            continue;
        }

        let step = match head {
            "retro" => {
                let mut config = RetrofitConfig::default();
                for token in tokens {
                    let (key, value) = parse_kv(token)
                        .ok_or_else(|| err(lineno, format!("expected key=value, got {token:?}")))?;
                    match key {
                        "alpha" => {
                            config.alpha = value.parse().map_err(|_| {
                                err(lineno, format!("bad alpha {value:?}"))
                            })?
                        }
                        "iterations" => {
                            config.iterations = value.parse().map_err(|_| {
                                err(lineno, format!("bad iterations {value:?}"))
                            })?
                        }
                        "beta" => {
                            config.beta_mode = if value == "invdeg" {
                                BetaMode::InverseDegree
                            } else {
                                BetaMode::Constant(value.parse().map_err(|_| {
                                    err(lineno, format!("bad beta {value:?}"))
                                })?)
                            }
                        }
                        other => return Err(err(lineno, format!("unknown retro key {other:?}"))),
                    }
                }
                Step::Retro(config)
            }
            "extro" => {
                let mut opts = ExtrofitOptions::default();
                for token in tokens {
                    let (key, value) = parse_kv(token)
                        .ok_or_else(|| err(lineno, format!("expected key=value, got {token:?}")))?;
                    match key {
                        "out_dim" => {
                            opts.out_dim = if value == "input" {
                                None
                            } else {
                                Some(value.parse().map_err(|_| {
                                    err(lineno, format!("bad out_dim {value:?}"))
                                })?)
                            }
                        }
                        "shrinkage" => {
                            opts.shrinkage = value.parse().map_err(|_| {
                                err(lineno, format!("bad shrinkage {value:?}"))
                            })?
                        }
                        "weighting" => {
                            opts.between_weighting = match value {
                                "size" => BetweenWeighting::SizeWeighted,
                                "uniform" => BetweenWeighting::Uniform,
                                other => {
                                    return Err(err(
                                        lineno,
                                        format!("unknown weighting {other:?}"),
                                    ))
                                }
                            }
                        }
                        other => return Err(err(lineno, format!("unknown extro key {other:?}"))),
                    }
                }
                Step::Extro(opts)
            }
            "unsup" => {
                let mut config = UnsupConfig::default();
                let mut resource = ResourceRef::Current;
                for token in tokens {
                    let (key, value) = parse_kv(token)
                        .ok_or_else(|| err(lineno, format!("expected key=value, got {token:?}")))?;
                    match key {
                        "k" => {
                            config.latent_dim = value.parse().map_err(|_| {
                                err(lineno, format!("bad k {value:?}"))
                            })?
                        }
                        "threshold" => {
                            config.threshold = value.parse().map_err(|_| {
                                err(lineno, format!("bad threshold {value:?}"))
                            })?
                        }
                        "max_candidates" => {
                            config.max_candidates = value.parse().map_err(|_| {
                                err(lineno, format!("bad max_candidates {value:?}"))
                            })?
                        }
                        "resource" => {
                            resource = if value == "current" {
                                ResourceRef::Current
                            } else {
                                ResourceRef::File(PathBuf::from(value))
                            }
                        }
                        other => return Err(err(lineno, format!("unknown unsup key {other:?}"))),
                    }
                }
                Step::UnsupExtro(config, resource)
            }
            other => return Err(err(lineno, format!("unknown step {other:?}"))),
        };
        steps.push(step);
    }

    if steps.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no pipeline steps in {}",
            path.display()
        )));
    }
    Ok(PipelineSpec {
        steps,
        repeat: repeat.unwrap_or(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;
    use std::io::Write as _;

    fn toy() -> (EmbeddingMatrix, Lexicon) {
        let n = 12;
        let d = 6;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..d)
                    .map(|j| ((i * d + j) as f64 * 0.59).sin() + ((i / 3) as f64))
                    .collect()
            })
            .collect();
        let emb = EmbeddingMatrix::from_rows(
            (0..n).map(|i| format!("w{i}")).collect(),
            rows,
        )
        .unwrap();
        let lexicon = Lexicon::from_entries(vec![
            ("w0".into(), vec!["w1".into(), "w2".into()]),
            ("w3".into(), vec!["w4".into()]),
            ("w6".into(), vec!["w7".into(), "w8".into()]),
        ]);
        (emb, lexicon)
    }

    #[test]
    fn extro_n_expands_to_n_steps() {
        let spec = named_pipeline("extro_n", 3, 0).unwrap();
        assert_eq!(spec.repeat, 1);
        assert_eq!(spec.steps.len(), 3);
        assert!(spec
            .steps
            .iter()
            .all(|s| matches!(s, Step::Extro(_))));
    }

    #[test]
    fn stepwise_eretro_alternates_with_repeat() {
        let spec = named_pipeline("stepwise_eretro", 2, 0).unwrap();
        assert_eq!(spec.repeat, 2);
        assert!(matches!(spec.steps[0], Step::Extro(_)));
        assert!(matches!(spec.steps[1], Step::Retro(_)));
        assert_eq!(spec.steps.len(), 2);
    }

    #[test]
    fn rextro_11_equals_stepwise_rextro_1() {
        let a = named_pipeline("rextro", 1, 1).unwrap();
        let b = named_pipeline("stepwise_rextro", 1, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unsup_prefix_unrolls_the_inner_scheme() {
        let spec = named_pipeline("unsup_then_stepwise_rextro", 2, 0).unwrap();
        assert_eq!(spec.repeat, 1);
        assert_eq!(spec.steps.len(), 5);
        assert!(matches!(spec.steps[0], Step::UnsupExtro(_, ResourceRef::Current)));
        assert!(matches!(spec.steps[1], Step::Retro(_)));
        assert!(matches!(spec.steps[2], Step::Extro(_)));
        assert!(matches!(spec.steps[3], Step::Retro(_)));
        assert!(matches!(spec.steps[4], Step::Extro(_)));
    }

    #[test]
    fn hyphenated_names_are_accepted() {
        assert!(named_pipeline("stepwise-rextro", 1, 0).is_ok());
        assert!(named_pipeline("unsup-then-extro-n", 1, 0).is_ok());
        assert!(named_pipeline("unsup-then-extro_n", 1, 0).is_ok());
    }

    #[test]
    fn bad_names_and_zero_counts_are_rejected() {
        assert!(matches!(
            named_pipeline("mystery", 1, 1).unwrap_err(),
            Error::InvalidParam(_)
        ));
        assert!(named_pipeline("extro_n", 0, 5).is_err());
        assert!(named_pipeline("rextro", 0, 0).is_err());
        assert!(named_pipeline("rextro", 0, 2).is_ok());
    }

    #[test]
    fn single_extro_pipeline_matches_direct_call() {
        let (w, lexicon) = toy();
        let spec = PipelineSpec {
            steps: vec![Step::Extro(ExtrofitOptions::default())],
            repeat: 1,
        };
        let piped = run_pipeline(&w, Some(&lexicon), &spec, &PipelineOptions::default()).unwrap();
        let classes = build_classes(&lexicon, w.vocab());
        let direct = extrofit(&w, &classes, &ExtrofitOptions::default()).unwrap();
        assert_eq!(piped.matrix(), direct.matrix());
    }

    #[test]
    fn two_steps_compose_like_sequential_calls() {
        let (w, lexicon) = toy();
        let spec = PipelineSpec {
            steps: vec![
                Step::Retro(RetrofitConfig::default()),
                Step::Extro(ExtrofitOptions::default()),
            ],
            repeat: 1,
        };
        let piped = run_pipeline(&w, Some(&lexicon), &spec, &PipelineOptions::default()).unwrap();

        let pairs = synonym_pairs(&lexicon, w.vocab());
        let after_retro = retrofit(&w, &pairs, &RetrofitConfig::default()).unwrap();
        let classes = build_classes(&lexicon, after_retro.vocab());
        let direct = extrofit(&after_retro, &classes, &ExtrofitOptions::default()).unwrap();
        assert_eq!(piped.matrix(), direct.matrix());
    }

    #[test]
    fn missing_lexicon_is_named_in_the_error() {
        let (w, _) = toy();
        let spec = named_pipeline("stepwise_rextro", 2, 0).unwrap();
        let err = run_pipeline(&w, None, &spec, &PipelineOptions::default()).unwrap_err();
        match err {
            Error::InvalidParam(msg) => assert!(msg.contains("lexicon"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vocabulary_is_shared_through_the_whole_pipeline() {
        let (w, lexicon) = toy();
        let spec = named_pipeline("stepwise_eretro", 2, 0).unwrap();
        let out = run_pipeline(&w, Some(&lexicon), &spec, &PipelineOptions::default()).unwrap();
        assert!(std::ptr::eq(w.vocab(), out.vocab()));
    }

    #[test]
    fn checkpoints_cover_input_and_every_step() {
        let (w, lexicon) = toy();
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("run");
        let spec = PipelineSpec {
            steps: vec![
                Step::Retro(RetrofitConfig::default()),
                Step::Extro(ExtrofitOptions::default()),
            ],
            repeat: 2,
        };
        let options = PipelineOptions {
            checkpoint_prefix: Some(prefix.clone()),
        };
        run_pipeline(&w, Some(&lexicon), &spec, &options).unwrap();

        for i in 0..=4 {
            let path = format!("{}.step{i:03}.txt", prefix.display());
            assert!(std::path::Path::new(&path).exists(), "missing {path}");
        }
        assert!(!std::path::Path::new(&format!("{}.step005.txt", prefix.display())).exists());

        // Checkpoint 0 is the input, verbatim at six decimals.
        let (reloaded, _) =
            load_embeddings(format!("{}.step000.txt", prefix.display())).unwrap();
        for i in 0..w.len() {
            for (a, b) in reloaded.row(i).iter().zip(w.row(i).iter()) {
                assert!((a - b).abs() < 5e-7);
            }
        }
    }

    #[test]
    fn empty_spec_and_zero_repeat_are_rejected() {
        let (w, lexicon) = toy();
        let empty = PipelineSpec {
            steps: vec![],
            repeat: 1,
        };
        assert!(matches!(
            run_pipeline(&w, Some(&lexicon), &empty, &PipelineOptions::default()).unwrap_err(),
            Error::InvalidParam(_)
        ));
        let zero = PipelineSpec {
            steps: vec![Step::Retro(RetrofitConfig::default())],
            repeat: 0,
        };
        assert!(matches!(
            run_pipeline(&w, Some(&lexicon), &zero, &PipelineOptions::default()).unwrap_err(),
            Error::InvalidParam(_)
        ));
    }

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn pipeline_file_round_trips() {
        let f = write_temp(
            "# alternation with tuned knobs\n\
             repeat=2\n\
             retro alpha=0.5 iterations=3 beta=0.25\n\
             extro out_dim=4 shrinkage=0.2 weighting=uniform\n\
             unsup k=2 threshold=0.8 max_candidates=10 resource=current\n",
        );
        let parsed = parse_pipeline_file(f.path()).unwrap();
        let expected = PipelineSpec {
            steps: vec![
                Step::Retro(RetrofitConfig {
                    alpha: 0.5,
                    beta_mode: BetaMode::Constant(0.25),
                    iterations: 3,
                }),
                Step::Extro(ExtrofitOptions {
                    out_dim: Some(4),
                    shrinkage: 0.2,
                    between_weighting: BetweenWeighting::Uniform,
                }),
                Step::UnsupExtro(
                    UnsupConfig {
                        latent_dim: 2,
                        threshold: 0.8,
                        max_candidates: 10,
                    },
                    ResourceRef::Current,
                ),
            ],
            repeat: 2,
        };
        assert_eq!(parsed, expected);
    }

    #[test]
    fn pipeline_file_errors_name_the_line() {
        let f = write_temp("retro alpha=1\nwarp speed=9\n");
        match parse_pipeline_file(f.path()).unwrap_err() {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("warp"));
            }
            other => panic!("unexpected {other:?}"),
        }

        let f = write_temp("retro alpha=fast\n");
        assert!(matches!(
            parse_pipeline_file(f.path()).unwrap_err(),
            Error::Parse { line: 1, .. }
        ));

        let f = write_temp("# nothing but comments\n");
        assert!(matches!(
            parse_pipeline_file(f.path()).unwrap_err(),
            Error::EmptyInput(_)
        ));

        let f = write_temp("repeat=2\nrepeat=3\nretro\n");
        assert!(matches!(
            parse_pipeline_file(f.path()).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn resource_files_are_loaded_for_unsup_steps() {
        let (w, _) = toy();
        let dir = tempfile::tempdir().unwrap();
        let resource_path = dir.path().join("resource.txt");
        save_embeddings(&w, &resource_path).unwrap();

        let spec = PipelineSpec {
            steps: vec![Step::UnsupExtro(
                UnsupConfig {
                    latent_dim: 3,
                    ..UnsupConfig::default()
                },
                ResourceRef::File(resource_path),
            )],
            repeat: 1,
        };
        let out = run_pipeline(&w, None, &spec, &PipelineOptions::default()).unwrap();
        assert_eq!(out.dim(), w.dim());
    }
}
