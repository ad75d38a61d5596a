//! Post-processing for pretrained word embeddings.
//!
//! This crate enriches fixed word-vector spaces with semantic-lexicon
//! knowledge, without retraining:
//!
//! * [`retrofit`] — pull synonym vectors together by minimizing a
//!   quadratic objective over the lexicon graph.
//! * [`extrofit`] — expand each vector with class-mean information, then
//!   project through discriminant directions that tighten synonym classes
//!   while keeping unrelated words spread out.
//! * [`unsup_extrofit`] — the same projection with classes mined from the
//!   embedding itself (latent cosine threshold), so no lexicon is needed.
//! * [`pipeline`] — compose the above into deep and stepwise variants, with
//!   optional per-step checkpoints.
//! * [`eval`] — Spearman-ρ word-similarity benchmarks and top-k
//!   nearest-neighbor listings.
//!
//! Everything is deterministic: no randomness anywhere, fixed reduction
//! orders, and parallelism that never changes results (only wall time).

pub mod embedding;
pub mod error;
pub mod eval;
pub mod extrofit;
pub mod lexicon;
pub mod linalg;
pub mod pipeline;
pub mod retrofit;
pub mod unsupervised;

mod union_find;

pub use embedding::{load_embeddings, save_embeddings, EmbeddingMatrix, LoadStats, Vocab};
pub use error::{Error, ErrorCategory, Result};
pub use eval::{
    evaluate, evaluate_with_policy, load_dataset, neighbors, spearman, EvalReport, OovPolicy,
    SimilarityDataset,
};
pub use extrofit::{expand, extrofit, ExtrofitOptions};
pub use lexicon::{
    build_classes, load_lexicon, synonym_pairs, ClassAssignment, Lexicon, SynonymPairs,
};
pub use linalg::{
    cosine, discriminant_directions, scatter_matrices, truncated_svd, BetweenWeighting,
    ScatterPair, TransformMatrix, TruncatedSvd,
};
pub use pipeline::{
    named_pipeline, parse_pipeline_file, run_pipeline, PipelineOptions, PipelineSpec, ResourceRef,
    Step,
};
pub use retrofit::{objective, retrofit, BetaMode, RetrofitConfig};
pub use unsupervised::{latent_vectors, related_classes, unsup_extrofit, UnsupConfig};
