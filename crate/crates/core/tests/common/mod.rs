//! Toy audit workspace shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use tonebias_core::catalog::Catalog;
use tonebias_core::store::write_dump;
use tonebias_core::{Embedding, EmbeddingRecord, EmbeddingSet, RecordKind, TokenSequenceEmbedding};

pub const DIM: usize = 8;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data_file() -> PathBuf {
    manifest_dir().join("data/emoji-test-15.1.txt")
}

pub fn manifest(name: &str) -> PathBuf {
    manifest_dir().join("data/manifests").join(name)
}

pub fn vad_fixture() -> PathBuf {
    manifest_dir().join("tests/fixtures/vad_sample.tsv")
}

/// Deterministic pseudo-random vector keyed by a string.
pub fn vector(key: &str) -> Vec<f64> {
    let digest = Sha256::digest(key.as_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from_le_bytes(digest[..8].try_into().unwrap()));
    (0..DIM).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn emb(v: Vec<f64>) -> Embedding {
    Embedding::new(v).unwrap()
}

pub const WORDS: [&str; 16] = [
    "table", "window", "paper", "street", "number", "corner", "basket", "metal", "joy", "love", "hate", "agony",
    "rose", "tulip", "wasp", "flea",
];

pub const BENCHMARK: &str = "\
[[pairs]]
name = \"pleasant-unpleasant\"
a_label = \"pleasant\"
a = [\"joy\", \"love\"]
b_label = \"unpleasant\"
b = [\"hate\", \"agony\"]

[[pairs]]
name = \"flowers-insects\"
a_label = \"flowers\"
a = [\"rose\", \"tulip\"]
b_label = \"insects\"
b = [\"wasp\", \"flea\"]
";

/// Every catalog sequence as a two-token emoji record, its CLDR name as a
/// description record, and the vocabulary in [`WORDS`].
pub fn toy_set(label: &str) -> EmbeddingSet {
    let catalog = Catalog::from_path(data_file()).unwrap();
    let mut set = EmbeddingSet::new(DIM, label);
    for seq in catalog.sequences() {
        let id = seq.id();
        if set.get(&id).is_some() {
            continue;
        }
        let tokens = vec![emb(vector(&format!("{id}#0"))), emb(vector(&format!("{id}#1")))];
        let aggregated = tokens[1].clone();
        let discrete = TokenSequenceEmbedding::new(tokens, Some(vec![1, 2])).unwrap();
        set.insert(EmbeddingRecord {
            id: id.clone(),
            kind: RecordKind::Emoji,
            text: None,
            aggregated,
            discrete: Some(discrete),
        })
        .unwrap();
        let mut desc = EmbeddingRecord::single(format!("desc:{id}"), RecordKind::Text, emb(vector(&seq.name)));
        desc.text = Some(seq.name.clone());
        let _ = set.insert(desc);
    }
    for w in WORDS {
        set.insert(EmbeddingRecord::single(w, RecordKind::Text, emb(vector(w)))).unwrap();
    }
    set
}

/// Writes a dump, benchmark sets and an audit config covering every analysis
/// into `dir`; returns the config path.
pub fn toy_workspace(dir: &Path, seed: u64) -> PathBuf {
    let mut dump = Vec::new();
    write_dump(&toy_set("toy model"), &mut dump).unwrap();
    std::fs::write(dir.join("toy.jsonl"), dump).unwrap();
    std::fs::write(dir.join("bench.toml"), BENCHMARK).unwrap();
    let manifests: Vec<String> = [
        "gemma-2-2b.jsonl",
        "gemma-2-modifiers.jsonl",
        "qwen-2-modifiers.jsonl",
        "llama-3-modifiers.jsonl",
        "mistral-modifiers.jsonl",
    ]
    .iter()
    .map(|m| format!("{:?}", manifest(m).display().to_string()))
    .collect();
    let config = format!(
        "data_file = {data:?}
unicode_version = \"15.1\"
output_dir = \"out\"
seed = {seed}
analyses = [\"coverage\", \"tokens\", \"align\", \"pairwise\", \"rnd\", \"weat_roles\", \"weat_caliskan\", \"rnsb\"]
manifests = [{manifests}]

[[embedding_sources]]
path = \"toy.jsonl\"
format = \"dump\"
label = \"toy model\"

[rnd]
lexicon = {vad:?}

[weat]
samples = 400
benchmark_sets = \"bench.toml\"

[rnsb]
accelerated = true
",
        data = data_file().display().to_string(),
        manifests = manifests.join(", "),
        vad = vad_fixture().display().to_string(),
    );
    let path = dir.join("audit.toml");
    std::fs::write(&path, config).unwrap();
    path
}
