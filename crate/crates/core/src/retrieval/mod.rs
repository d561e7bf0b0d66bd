//! Hybrid skill retrieval: a BM25 inverted index and a vector index over
//! the same documents, merged by rank interleave.
//!
//! Each skill is indexed as one document, `"{id} {intent}"`, so both the
//! camel-case name and the natural-language intent are searchable. Scores
//! from the two channels are incommensurable; merging goes by rank, and the
//! merge policy lives in one function (`merge_ranked`) so it can be swapped.

mod embed;
mod tokenize;
mod wire;

pub use embed::{cosine, EmbeddingProvider, HashingEmbedder, ProviderError};
pub use tokenize::tokenize;
pub use wire::{serve_embedder, WireEmbeddingProvider};

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::skill::SkillLibrary;

const BM25_K1: f64 = 1.2;
const BM25_B: f64 = 0.75;
const INDEX_FORMAT: &str = "skill-index";
const INDEX_VERSION: u32 = 1;

/// Everything persisted for one library: inverted index plus vectors.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
struct IndexData {
    format: String,
    version: u32,
    provider_id: String,
    dimension: usize,
    /// Token -> (skill id -> term frequency).
    postings: BTreeMap<String, BTreeMap<String, u32>>,
    /// Skill id -> document token count.
    doc_lengths: BTreeMap<String, u32>,
    /// Skill id -> unit-norm embedding.
    vectors: BTreeMap<String, Vec<f64>>,
}

/// Immutable after build; queries embed through the same provider that
/// built the index.
pub struct SkillIndex {
    data: IndexData,
    provider: Box<dyn EmbeddingProvider + Send + Sync>,
}

impl std::fmt::Debug for SkillIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SkillIndex")
            .field("provider_id", &self.data.provider_id)
            .field("documents", &self.data.doc_lengths.len())
            .finish_non_exhaustive()
    }
}

/// One scored hit from a single channel.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScoredSkill {
    pub skill: String,
    pub score: f64,
}

/// Which channels surfaced a merged candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Lexical,
    Semantic,
    Both,
}

/// One merged candidate: best per-channel scores over all queries and the
/// final interleaved rank.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RetrievalResult {
    pub skill: String,
    pub lexical_score: Option<f64>,
    pub semantic_score: Option<f64>,
    pub channel: Channel,
    /// 1-based position in the merged list.
    pub rank: usize,
}

/// Problems loading or saving a persisted index.
#[derive(Debug, thiserror::Error)]
pub enum IndexFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: not a skill index file: {reason}")]
    Malformed { path: String, reason: String },
    #[error("{path}: index version {found}, this build reads {expected}")]
    WrongVersion { path: String, found: u32, expected: u32 },
    #[error("index was built by provider `{file}`, loaded with `{given}`")]
    ProviderMismatch { file: String, given: String },
}

/// The indexed document text for one skill.
fn document_text(id: &str, intent: &str) -> String {
    format!("{id} {intent}")
}

/// Build both channels over the whole library. Aborts on the first provider
/// failure; a partially built index is never returned.
pub fn build_index(
    lib: &SkillLibrary,
    provider: Box<dyn EmbeddingProvider + Send + Sync>,
) -> Result<SkillIndex, ProviderError> {
    let mut postings: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    let mut doc_lengths = BTreeMap::new();
    let mut vectors = BTreeMap::new();
    for (id, spec) in &lib.skills {
        let text = document_text(id, &spec.intent);
        let tokens = tokenize(&text);
        doc_lengths.insert(id.clone(), tokens.len() as u32);
        for token in tokens {
            *postings.entry(token).or_default().entry(id.clone()).or_insert(0) += 1;
        }
        let vector = provider.embed(&text)?;
        if vector.len() != provider.dimension() {
            return Err(ProviderError::DimensionMismatch {
                expected: provider.dimension(),
                got: vector.len(),
            });
        }
        vectors.insert(id.clone(), vector);
    }
    Ok(SkillIndex {
        data: IndexData {
            format: INDEX_FORMAT.to_string(),
            version: INDEX_VERSION,
            provider_id: provider.id(),
            dimension: provider.dimension(),
            postings,
            doc_lengths,
            vectors,
        },
        provider,
    })
}

impl SkillIndex {
    pub fn len(&self) -> usize {
        self.data.doc_lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.doc_lengths.is_empty()
    }

    pub fn provider_id(&self) -> &str {
        &self.data.provider_id
    }

    pub fn vector(&self, skill: &str) -> Option<&[f64]> {
        self.data.vectors.get(skill).map(Vec::as_slice)
    }

    fn avg_doc_len(&self) -> f64 {
        if self.data.doc_lengths.is_empty() {
            return 0.0;
        }
        let total: u64 = self.data.doc_lengths.values().map(|l| *l as u64).sum();
        total as f64 / self.data.doc_lengths.len() as f64
    }

    /// Top-k documents by BM25, descending; ties broken by skill id.
    pub fn lexical_search(&self, query: &str, k: usize) -> Vec<ScoredSkill> {
        assert!(k >= 1, "k must be positive");
        let n = self.len() as f64;
        if n == 0.0 {
            return Vec::new();
        }
        let avg_len = self.avg_doc_len();
        let qtokens: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        for token in &qtokens {
            let Some(entry) = self.data.postings.get(token) else { continue };
            let df = entry.len() as f64;
            let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
            for (doc, tf) in entry {
                let len = self.data.doc_lengths[doc] as f64;
                let tf = *tf as f64;
                let saturated =
                    (tf * (BM25_K1 + 1.0)) / (tf + BM25_K1 * (1.0 - BM25_B + BM25_B * len / avg_len));
                *scores.entry(doc).or_insert(0.0) += idf * saturated;
            }
        }
        rank_hits(scores, k)
    }

    /// Top-k documents by cosine against the embedded query.
    pub fn semantic_search(&self, query: &str, k: usize) -> Result<Vec<ScoredSkill>, ProviderError> {
        assert!(k >= 1, "k must be positive");
        let qvec = self.provider.embed(query)?;
        if qvec.len() != self.data.dimension {
            return Err(ProviderError::DimensionMismatch {
                expected: self.data.dimension,
                got: qvec.len(),
            });
        }
        let scores: BTreeMap<&str, f64> = self
            .data
            .vectors
            .iter()
            .map(|(doc, vec)| (doc.as_str(), cosine(&qvec, vec)))
            .collect();
        Ok(rank_hits(scores, k))
    }

    /// Run every query through both channels and merge the union by rank
    /// interleave. Result size ≤ queries × 2 × per_channel_k.
    pub fn hybrid_retrieve(
        &self,
        queries: &[String],
        per_channel_k: usize,
    ) -> Result<Vec<RetrievalResult>, ProviderError> {
        assert!(!queries.is_empty(), "hybrid retrieval needs at least one query");
        let mut lexical_hits: Vec<Vec<ScoredSkill>> = Vec::new();
        let mut semantic_hits: Vec<Vec<ScoredSkill>> = Vec::new();
        for query in queries {
            lexical_hits.push(self.lexical_search(query, per_channel_k));
            semantic_hits.push(self.semantic_search(query, per_channel_k)?);
        }
        Ok(merge_ranked(&lexical_hits, &semantic_hits))
    }

    /// Serialize to one versioned JSON file. Rebuilding the same library
    /// with the same provider writes byte-identical output.
    pub fn save(&self, path: &Path) -> Result<(), IndexFileError> {
        let text = serde_json::to_string(&self.data).expect("index serializes");
        std::fs::write(path, text).map_err(|source| IndexFileError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Load a persisted index; the provider must match the one that built it.
    pub fn load(
        path: &Path,
        provider: Box<dyn EmbeddingProvider + Send + Sync>,
    ) -> Result<SkillIndex, IndexFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| IndexFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let data: IndexData =
            serde_json::from_str(&text).map_err(|e| IndexFileError::Malformed {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
        if data.format != INDEX_FORMAT {
            return Err(IndexFileError::Malformed {
                path: path.display().to_string(),
                reason: format!("format `{}`", data.format),
            });
        }
        if data.version != INDEX_VERSION {
            return Err(IndexFileError::WrongVersion {
                path: path.display().to_string(),
                found: data.version,
                expected: INDEX_VERSION,
            });
        }
        if data.provider_id != provider.id() {
            return Err(IndexFileError::ProviderMismatch {
                file: data.provider_id,
                given: provider.id(),
            });
        }
        Ok(SkillIndex { data, provider })
    }
}

/// Sort a score map into a descending top-k list, ties by skill id. The
/// caller decides which documents enter: lexical search admits only token
/// matches, semantic search scores every document.
fn rank_hits(scores: BTreeMap<&str, f64>, k: usize) -> Vec<ScoredSkill> {
    let mut hits: Vec<ScoredSkill> = scores
        .into_iter()
        .map(|(skill, score)| ScoredSkill { skill: skill.to_string(), score })
        .collect();
    hits.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.skill.cmp(&b.skill))
    });
    hits.truncate(k);
    hits
}

/// Merge policy: a candidate's key is its best (lowest) rank in any channel
/// of any query; ties break by skill id. Isolated here so an alternative
/// fusion can replace it wholesale.
fn merge_ranked(
    lexical: &[Vec<ScoredSkill>],
    semantic: &[Vec<ScoredSkill>],
) -> Vec<RetrievalResult> {
    #[derive(Default)]
    struct Entry {
        best_rank: usize,
        lexical: Option<f64>,
        semantic: Option<f64>,
    }
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut fold = |hits: &[Vec<ScoredSkill>], is_lexical: bool| {
        for per_query in hits {
            for (i, hit) in per_query.iter().enumerate() {
                let rank = i + 1;
                let entry = entries.entry(hit.skill.clone()).or_insert(Entry {
                    best_rank: rank,
                    ..Entry::default()
                });
                entry.best_rank = entry.best_rank.min(rank);
                let slot = if is_lexical { &mut entry.lexical } else { &mut entry.semantic };
                *slot = Some(slot.map_or(hit.score, |s: f64| s.max(hit.score)));
            }
        }
    };
    fold(lexical, true);
    fold(semantic, false);

    let mut merged: Vec<(String, Entry)> = entries.into_iter().collect();
    merged.sort_by(|a, b| a.1.best_rank.cmp(&b.1.best_rank).then_with(|| a.0.cmp(&b.0)));
    merged
        .into_iter()
        .enumerate()
        .map(|(i, (skill, entry))| RetrievalResult {
            skill,
            lexical_score: entry.lexical,
            semantic_score: entry.semantic,
            channel: match (entry.lexical.is_some(), entry.semantic.is_some()) {
                (true, true) => Channel::Both,
                (true, false) => Channel::Lexical,
                (false, true) => Channel::Semantic,
                (false, false) => unreachable!("entry came from some channel"),
            },
            rank: i + 1,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skill::{parse_skill, SkillLibrary};

    /// Five-skill corpus mirrored by the frozen scoring oracle in
    /// fixtures/golden/bm25_toy_scores.json.
    const TOY_SKILLS: [&str; 5] = [
        "skill CalculatorLaunch\napp SimCalculator\nintent \"Open the calculator\"\n\
         node n0 start\nnode t terminal\nedge n0 -> t action launch_app(app=SimCalculator)\n",
        "skill CalculatorEnterNumber\napp SimCalculator\nintent \"Enter the number {number} on the calculator\"\n\
         arg number open int_range(0,999)\n\
         node n0 start\nnode t terminal\nedge n0 -> t action type_text(text={number}, input_mode=keyboard)\n",
        "skill FilesCreateFolder\napp SimFiles\nintent \"Create a folder named {folder_name} in the current directory\"\n\
         arg folder_name open text(3,16)\n\
         node n0 start\nnode t terminal\nedge n0 -> t action script(command=mkdir {folder_name})\n",
        "skill EditorSave\napp SimEditor\nintent \"Save the document as {file_name}\"\n\
         arg file_name open filename(txt, md)\n\
         node n0 start\nnode t terminal\nedge n0 -> t action hotkey(keys=ctrl+s)\n",
        "skill EdgeOpenHomePage\napp Edge\nintent \"Open home page in Edge\"\n\
         node n0 start\nnode t terminal\nedge n0 -> t action single_click(target=Home)\n",
    ];

    fn toy_library() -> SkillLibrary {
        let mut lib = SkillLibrary::default();
        for text in TOY_SKILLS {
            let spec = parse_skill(text).expect("toy skill parses");
            lib.skills.insert(spec.id.clone(), spec);
        }
        lib
    }

    fn toy_index() -> SkillIndex {
        build_index(&toy_library(), Box::new(HashingEmbedder::default())).unwrap()
    }

    #[test]
    fn bm25_scores_match_the_frozen_oracle() {
        let golden_path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures/golden/bm25_toy_scores.json");
        let golden: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(golden_path).unwrap()).unwrap();

        // The oracle scored exactly this corpus; drift in either copy must
        // fail loudly rather than silently weaken the comparison.
        let lib = toy_library();
        for (id, text) in golden["corpus"].as_object().unwrap() {
            let spec = lib.skill(id).expect("oracle corpus id exists");
            assert_eq!(
                document_text(id, &spec.intent),
                *text.as_str().unwrap(),
                "corpus drift for {id}"
            );
        }

        let index = toy_index();
        for (query, expected) in golden["results"].as_object().unwrap() {
            let expected = expected.as_array().unwrap();
            let got = index.lexical_search(query, 5);
            assert_eq!(got.len(), expected.len(), "hit count for `{query}`");
            for (hit, want) in got.iter().zip(expected) {
                assert_eq!(hit.skill, want["skill"].as_str().unwrap(), "order for `{query}`");
                let want_score = want["score"].as_f64().unwrap();
                assert!(
                    (hit.score - want_score).abs() <= 1e-9,
                    "`{query}` -> {}: {} vs oracle {want_score}",
                    hit.skill,
                    hit.score
                );
            }
        }
    }

    #[test]
    fn disjoint_query_returns_no_lexical_hits() {
        let index = toy_index();
        assert!(index.lexical_search("zzz qqqq", 5).is_empty());
    }

    #[test]
    fn identical_document_text_scores_cosine_one_at_rank_one() {
        let index = toy_index();
        let query = document_text("EdgeOpenHomePage", "Open home page in Edge");
        let hits = index.semantic_search(&query, 5).unwrap();
        assert_eq!(hits[0].skill, "EdgeOpenHomePage");
        assert!((hits[0].score - 1.0).abs() < 1e-6);
    }

    #[test]
    fn semantic_ordering_equals_a_brute_force_scan() {
        let index = toy_index();
        let provider = HashingEmbedder::default();
        for query in ["open something", "save the file", "calculator number"] {
            let qvec = provider.embed(query).unwrap();
            let mut brute: Vec<ScoredSkill> = toy_library()
                .skills
                .iter()
                .map(|(id, spec)| ScoredSkill {
                    skill: id.clone(),
                    score: cosine(&qvec, &provider.embed(&document_text(id, &spec.intent)).unwrap()),
                })
                .collect();
            brute.sort_by(|a, b| {
                b.score
                    .partial_cmp(&a.score)
                    .unwrap()
                    .then_with(|| a.skill.cmp(&b.skill))
            });
            let got = index.semantic_search(query, 5).unwrap();
            assert_eq!(got, brute, "query `{query}`");
        }
    }

    #[test]
    fn hybrid_set_is_the_union_of_channel_sets() {
        let index = toy_index();
        let queries = ["open the calculator".to_string(), "save document".to_string()];
        let merged = index.hybrid_retrieve(&queries, 3).unwrap();
        let got: std::collections::BTreeSet<&str> =
            merged.iter().map(|r| r.skill.as_str()).collect();
        let mut want = std::collections::BTreeSet::new();
        for q in &queries {
            for hit in index.lexical_search(q, 3) {
                want.insert(hit.skill.clone());
            }
            for hit in index.semantic_search(q, 3).unwrap() {
                want.insert(hit.skill.clone());
            }
        }
        let want: std::collections::BTreeSet<&str> = want.iter().map(String::as_str).collect();
        assert_eq!(got, want);
        assert!(merged.len() <= queries.len() * 2 * 3);
    }

    #[test]
    fn candidate_in_both_channels_appears_once_as_both() {
        let index = toy_index();
        let merged = index
            .hybrid_retrieve(&["open the calculator".to_string()], 5)
            .unwrap();
        let launches: Vec<&RetrievalResult> =
            merged.iter().filter(|r| r.skill == "CalculatorLaunch").collect();
        assert_eq!(launches.len(), 1);
        assert_eq!(launches[0].channel, Channel::Both);
        assert_eq!(launches[0].rank, 1);
        assert!(launches[0].lexical_score.is_some() && launches[0].semantic_score.is_some());
    }

    #[test]
    fn merged_ranks_are_dense_and_deterministic() {
        let index = toy_index();
        let queries = vec!["open home page".to_string(), "create a folder".to_string()];
        let a = index.hybrid_retrieve(&queries, 4).unwrap();
        let b = index.hybrid_retrieve(&queries, 4).unwrap();
        assert_eq!(a, b);
        for (i, r) in a.iter().enumerate() {
            assert_eq!(r.rank, i + 1);
        }
    }

    #[test]
    fn empty_library_builds_an_empty_index() {
        let lib = SkillLibrary::default();
        let index = build_index(&lib, Box::new(HashingEmbedder::default())).unwrap();
        assert!(index.is_empty());
        assert!(index.lexical_search("anything", 3).is_empty());
        assert!(index.semantic_search("anything", 3).unwrap().is_empty());
    }

    #[test]
    fn rebuild_writes_byte_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        toy_index().save(&a).unwrap();
        toy_index().save(&b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn saved_index_loads_and_answers_identically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        let built = toy_index();
        built.save(&path).unwrap();
        let loaded = SkillIndex::load(&path, Box::new(HashingEmbedder::default())).unwrap();
        assert_eq!(built.data, loaded.data);
        assert_eq!(
            built.lexical_search("open the calculator", 5),
            loaded.lexical_search("open the calculator", 5)
        );
        assert_eq!(
            built.semantic_search("open the calculator", 5).unwrap(),
            loaded.semantic_search("open the calculator", 5).unwrap()
        );
    }

    #[test]
    fn loading_with_a_different_provider_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        toy_index().save(&path).unwrap();
        let err = SkillIndex::load(&path, Box::new(HashingEmbedder::new(64))).unwrap_err();
        assert!(matches!(err, IndexFileError::ProviderMismatch { .. }), "{err}");
    }

    #[test]
    fn version_and_format_mismatches_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        toy_index().save(&path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("\"version\":1", "\"version\":9")).unwrap();
        let err = SkillIndex::load(&path, Box::new(HashingEmbedder::default())).unwrap_err();
        assert!(matches!(err, IndexFileError::WrongVersion { found: 9, .. }), "{err}");

        std::fs::write(&path, "{\"not\":\"an index\"}").unwrap();
        let err = SkillIndex::load(&path, Box::new(HashingEmbedder::default())).unwrap_err();
        assert!(matches!(err, IndexFileError::Malformed { .. }), "{err}");
    }

    #[test]
    fn index_built_over_the_wire_matches_the_local_build() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = listener.local_addr().unwrap().to_string();
        std::thread::spawn(move || {
            let provider = HashingEmbedder::default();
            let _ = serve_embedder(listener, &provider, 1);
        });
        let wire = WireEmbeddingProvider::connect(&endpoint).unwrap();
        let over_wire = build_index(&toy_library(), Box::new(wire)).unwrap();
        assert_eq!(over_wire.data, toy_index().data);
    }
}
