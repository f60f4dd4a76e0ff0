use std::io::BufRead;
use std::path::Path;

use super::BiasError;

#[derive(Debug, Clone, PartialEq)]
pub struct VadEntry {
    pub word: String,
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
}

/// Words whose valence lies inside `[low, high]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeutralLexicon {
    pub low: f64,
    pub high: f64,
    pub words: Vec<(String, f64)>,
}

impl NeutralLexicon {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(|(w, _)| w.as_str())
    }
}

/// Parses `word<TAB>valence<TAB>arousal<TAB>dominance` rows after a header line.
pub fn parse_vad<R: BufRead>(reader: R) -> Result<Vec<VadEntry>, BiasError> {
    let mut entries = Vec::new();
    let mut seen_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| BiasError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            seen_header = true;
            continue;
        }
        let parse = |reason: String| BiasError::Parse { line: line_no, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let word = fields[0].trim();
        if word.is_empty() {
            return Err(parse("empty word".into()));
        }
        let score = |name: &str, s: &str| -> Result<f64, BiasError> {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| parse(format!("{name} `{s}` is not a number")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(parse(format!("{name} {v} outside [0, 1]")));
            }
            Ok(v)
        };
        entries.push(VadEntry {
            word: word.to_string(),
            valence: score("valence", fields[1])?,
            arousal: score("arousal", fields[2])?,
            dominance: score("dominance", fields[3])?,
        });
    }
    Ok(entries)
}

pub fn load_vad_path(path: impl AsRef<Path>) -> Result<Vec<VadEntry>, BiasError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| BiasError::Io(format!("{}: {e}", path.display())))?;
    parse_vad(std::io::BufReader::new(file))
}

/// Keeps entries with `low <= valence <= high`.
pub fn filter_neutral(entries: &[VadEntry], low: f64, high: f64) -> Result<NeutralLexicon, BiasError> {
    if !(0.0 <= low && low <= high && high <= 1.0) {
        return Err(BiasError::Bounds { low, high });
    }
    let words = entries
        .iter()
        .filter(|e| low <= e.valence && e.valence <= high)
        .map(|e| (e.word.clone(), e.valence))
        .collect();
    Ok(NeutralLexicon { low, high, words })
}
