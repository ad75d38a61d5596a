//! Property tests for order-independence, round-tripping, and rank
//! invariances. Case counts are kept small; these guard structural
//! invariants, not numerics (the oracle tests do that).

use embedfit::{
    build_classes, load_embeddings, neighbors, save_embeddings, spearman, EmbeddingMatrix,
    Lexicon,
};
use proptest::prelude::*;

fn canonical_partition(classes: &embedfit::ClassAssignment) -> Vec<usize> {
    let mut representative = std::collections::HashMap::new();
    (0..classes.len())
        .map(|i| *representative.entry(classes.class_of(i)).or_insert(i))
        .collect()
}

/// Entries over a 20-word vocabulary: (headword index, synonym indices).
fn lexicon_entries() -> impl Strategy<Value = Vec<(usize, Vec<usize>)>> {
    proptest::collection::vec(
        (0usize..20, proptest::collection::vec(0usize..20, 1..4)),
        1..12,
    )
}

fn to_lexicon(entries: &[(usize, Vec<usize>)]) -> Lexicon {
    Lexicon::from_entries(
        entries
            .iter()
            .map(|(h, syns)| {
                (
                    format!("w{h:02}"),
                    syns.iter().map(|s| format!("w{s:02}")).collect(),
                )
            })
            .collect(),
    )
}

fn vocab20() -> EmbeddingMatrix {
    EmbeddingMatrix::from_rows(
        (0..20).map(|i| format!("w{i:02}")).collect(),
        (0..20).map(|i| vec![i as f64, 1.0]).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn class_partition_ignores_lexicon_entry_order(
        (entries, shuffled) in lexicon_entries()
            .prop_flat_map(|e| (Just(e.clone()), Just(e).prop_shuffle()))
    ) {
        let w = vocab20();
        let a = build_classes(&to_lexicon(&entries), w.vocab());
        let b = build_classes(&to_lexicon(&shuffled), w.vocab());
        prop_assert_eq!(canonical_partition(&a), canonical_partition(&b));
    }

    #[test]
    fn save_then_load_round_trips_to_quantization(
        rows in (1usize..6, 1usize..5).prop_flat_map(|(n, d)| {
            proptest::collection::vec(
                proptest::collection::vec(-1000.0f64..1000.0, d..=d),
                n..=n,
            )
        })
    ) {
        let words = (0..rows.len()).map(|i| format!("w{i}")).collect();
        let w = EmbeddingMatrix::from_rows(words, rows).unwrap();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_embeddings(&w, file.path()).unwrap();
        let (reloaded, stats) = load_embeddings(file.path()).unwrap();

        prop_assert_eq!(stats.duplicates, 0);
        prop_assert_eq!(reloaded.len(), w.len());
        prop_assert_eq!(reloaded.dim(), w.dim());
        for i in 0..w.len() {
            prop_assert_eq!(reloaded.vocab().word(i), w.vocab().word(i));
            for (a, b) in reloaded.row(i).iter().zip(w.row(i).iter()) {
                // Written at six decimal places.
                prop_assert!((a - b).abs() <= 5e-7);
            }
        }
    }

    #[test]
    fn spearman_is_rank_invariant(
        grid in proptest::collection::vec((-1_000_000i32..1_000_000, -1_000_000i32..1_000_000), 3..40)
    ) {
        let x: Vec<f64> = grid.iter().map(|&(a, _)| a as f64 / 1000.0).collect();
        let y: Vec<f64> = grid.iter().map(|&(_, b)| b as f64 / 1000.0).collect();
        let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
        prop_assume!(!constant(&x) && !constant(&y));

        let base = spearman(&x, &y).unwrap();

        // Exact monotone transform: scaling by a power of two.
        let scaled: Vec<f64> = x.iter().map(|&v| v * 8.0).collect();
        prop_assert_eq!(spearman(&scaled, &y).unwrap(), base);

        // Nonlinear strictly increasing transform; the 1e-3 input grid
        // keeps distinct values distinct through atan.
        let warped: Vec<f64> = x.iter().map(|&v| v.atan()).collect();
        prop_assert_eq!(spearman(&warped, &y).unwrap(), base);
    }

    #[test]
    fn neighbor_lists_are_prefix_consistent(
        rows in proptest::collection::vec(
            proptest::collection::vec(-10.0f64..10.0, 4..=4),
            4..9,
        ),
        k1 in 0usize..4,
        k2 in 4usize..8,
    ) {
        prop_assume!(rows[0].iter().any(|&v| v != 0.0));
        let words = (0..rows.len()).map(|i| format!("w{i}")).collect();
        let w = EmbeddingMatrix::from_rows(words, rows).unwrap();

        let small = neighbors(&w, "w0", k1).unwrap();
        let large = neighbors(&w, "w0", k2).unwrap();
        prop_assert!(small.len() <= large.len());
        prop_assert_eq!(&small[..], &large[..small.len()]);
    }
}
