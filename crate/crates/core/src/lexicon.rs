//! Semantic lexicons and the synonym pairs / word classes derived from them.
//!
//! A lexicon file lists one headword per line followed by its related words
//! (the format used by the widely distributed WordNet-style lexicon files).
//! Against a fixed vocabulary, a lexicon induces a set of synonym index
//! pairs and, via transitive closure, a partition of the vocabulary into
//! word classes.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::embedding::Vocab;
use crate::error::{Error, Result};
use crate::union_find::UnionFind;

/// An ordered list of `(headword, synonyms)` entries.
///
/// Headwords may repeat across entries; every entry carries at least one
/// synonym (lines without any are dropped when parsing).
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<(String, Vec<String>)>,
}

impl Lexicon {
    /// Build from in-memory entries, dropping any without synonyms.
    pub fn from_entries(entries: Vec<(String, Vec<String>)>) -> Self {
        Lexicon {
            entries: entries.into_iter().filter(|(_, s)| !s.is_empty()).collect(),
        }
    }

    pub fn entries(&self) -> &[(String, Vec<String>)] {
        &self.entries
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Synonym index pairs over a vocabulary, with the symmetric closure
/// applied and self-pairs removed.
#[derive(Debug, Clone)]
pub struct SynonymPairs {
    /// Ordered pairs `(i, j)`; whenever `(i, j)` is present so is `(j, i)`.
    /// Sorted and deduplicated.
    pub pairs: Vec<(usize, usize)>,
    /// Occurrences of lexicon tokens that were not in the vocabulary.
    pub oov_count: usize,
}

impl SynonymPairs {
    /// Distinct neighbor lists per vocabulary index (ascending), i.e. the
    /// adjacency view of the pair set.
    pub fn neighbors(&self, vocab_len: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); vocab_len];
        for &(i, j) in &self.pairs {
            adj[i].push(j);
        }
        // pairs are sorted, so each list is already ascending and unique
        adj
    }
}

/// A partition of the vocabulary into word classes.
///
/// Class ids are contiguous in `[0, num_classes)`, numbered by first
/// appearance in vocabulary order.
#[derive(Debug, Clone)]
pub struct ClassAssignment {
    class_of: Vec<usize>,
    num_classes: usize,
}

impl ClassAssignment {
    /// Renumber arbitrary labels into contiguous class ids.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut remap: std::collections::HashMap<usize, usize> =
            std::collections::HashMap::new();
        let mut class_of = Vec::with_capacity(raw.len());
        for &label in raw {
            let next = remap.len();
            class_of.push(*remap.entry(label).or_insert(next));
        }
        ClassAssignment {
            class_of,
            num_classes: remap.len(),
        }
    }

    pub(crate) fn from_union_find(uf: &mut UnionFind, n: usize) -> Self {
        let roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        Self::from_labels(&roots)
    }

    /// Class id of vocabulary index `i`.
    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Number of vocabulary indices covered.
    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    /// Member indices per class, each list ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.num_classes];
        for (i, &c) in self.class_of.iter().enumerate() {
            m[c].push(i);
        }
        m
    }

    /// Member counts per class.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_classes];
        for &c in &self.class_of {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Parse a lexicon file: one `headword syn1 syn2 ...` entry per line.
///
/// Entry order is preserved; lines carrying only a headword are dropped.
/// An empty file is an error.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut entries = Vec::new();
    let mut any_line = false;
    for line in reader.lines() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        any_line = true;
        let mut tokens = line.split_whitespace();
        let Some(head) = tokens.next() else { continue };
        let synonyms: Vec<String> = tokens.map(str::to_string).collect();
        if synonyms.is_empty() {
            continue;
        }
        entries.push((head.to_string(), synonyms));
    }
    if !any_line {
        return Err(Error::EmptyInput(format!(
            "lexicon file {} is empty",
            path.display()
        )));
    }
    Ok(Lexicon { entries })
}

/// Synonym pairs induced by `lexicon` over `vocab`.
///
/// Every `(headword, synonym)` pair with both words in the vocabulary is
/// emitted in both orientations; self-pairs are suppressed. Lexicon tokens
/// missing from the vocabulary are skipped, counted once per occurrence.
pub fn synonym_pairs(lexicon: &Lexicon, vocab: &Vocab) -> SynonymPairs {
    let mut pairs = Vec::new();
    let mut oov_count = 0usize;
    for (head, synonyms) in lexicon.entries() {
        let head_idx = vocab.index_of(head);
        if head_idx.is_none() {
            oov_count += 1;
        }
        for syn in synonyms {
            let Some(j) = vocab.index_of(syn) else {
                oov_count += 1;
                continue;
            };
            if let Some(i) = head_idx {
                if i != j {
                    pairs.push((i, j));
                    pairs.push((j, i));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    SynonymPairs { pairs, oov_count }
}

/// Partition `vocab` into classes: words linked by any chain of synonym
/// pairs share a class; every other word is a singleton.
pub fn build_classes(lexicon: &Lexicon, vocab: &Vocab) -> ClassAssignment {
    let pairs = synonym_pairs(lexicon, vocab);
    let mut uf = UnionFind::new(vocab.len());
    for &(i, j) in &pairs.pairs {
        uf.union(i, j);
    }
    ClassAssignment::from_union_find(&mut uf, vocab.len())
}
