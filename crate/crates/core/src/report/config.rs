use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ReportError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Coverage,
    Tokens,
    Align,
    Pairwise,
    Rnd,
    WeatRoles,
    WeatCaliskan,
    Rnsb,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Coverage => "coverage",
            Analysis::Tokens => "tokens",
            Analysis::Align => "align",
            Analysis::Pairwise => "pairwise",
            Analysis::Rnd => "rnd",
            Analysis::WeatRoles => "weat_roles",
            Analysis::WeatCaliskan => "weat_caliskan",
            Analysis::Rnsb => "rnsb",
        }
    }

    fn needs_embeddings(self) -> bool {
        !matches!(self, Analysis::Tokens)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceFormat {
    Word2vec,
    Word2vecBinary,
    Dump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSource {
    pub path: PathBuf,
    pub format: SourceFormat,
    pub label: String,
    /// False for sources only referenced as word or seed sources.
    #[serde(default = "yes")]
    pub audit: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignOptions {
    /// Modifier manifest whose token ids are removed from emoji sequences.
    pub strip_manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairwiseOptions {
    pub group: String,
}

impl Default for PairwiseOptions {
    fn default() -> Self {
        PairwiseOptions {
            group: crate::catalog::HAND_GESTURE_PRESET.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RndOptions {
    pub lexicon: Option<PathBuf>,
    pub low: f64,
    pub high: f64,
    pub normalize: bool,
    pub group: String,
    /// Label of the source holding the neutral words; defaults to each audited source.
    pub word_source: Option<String>,
}

impl Default for RndOptions {
    fn default() -> Self {
        RndOptions {
            lexicon: None,
            low: 0.48,
            high: 0.52,
            normalize: true,
            group: crate::catalog::HAND_GESTURE_PRESET.to_string(),
            word_source: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeatOptions {
    pub alpha: f64,
    pub samples: usize,
    pub exact_limit: u64,
    /// Emoji attribute sets for the role suite; bundled Good/Bad when absent.
    pub role_sets: Option<PathBuf>,
    /// Word attribute pairs for the tone-target suite; bundled benchmark when absent.
    pub benchmark_sets: Option<PathBuf>,
    /// Source resolving benchmark words; defaults to each audited source.
    pub word_source: Option<String>,
}

impl Default for WeatOptions {
    fn default() -> Self {
        WeatOptions {
            alpha: 0.05,
            samples: 10_000,
            exact_limit: 20_000,
            role_sets: None,
            benchmark_sets: None,
            word_source: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RnsbOptions {
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub accelerated: bool,
    /// Sentiment seed sets; bundled Good/Bad emoji when absent.
    pub seeds: Option<PathBuf>,
    /// Source resolving the seeds; defaults to each audited source.
    pub seed_source: Option<String>,
}

impl Default for RnsbOptions {
    fn default() -> Self {
        RnsbOptions {
            lambda: 0.1,
            tolerance: 1e-8,
            max_iterations: 50_000,
            accelerated: false,
            seeds: None,
            seed_source: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub data_file: PathBuf,
    #[serde(default)]
    pub unicode_version: Option<String>,
    #[serde(default)]
    pub embedding_sources: Vec<EmbeddingSource>,
    #[serde(default)]
    pub manifests: Vec<PathBuf>,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub align: AlignOptions,
    #[serde(default)]
    pub pairwise: PairwiseOptions,
    #[serde(default)]
    pub rnd: RndOptions,
    #[serde(default)]
    pub weat: WeatOptions,
    #[serde(default)]
    pub rnsb: RnsbOptions,
}

impl AuditConfig {
    pub fn parse(text: &str) -> Result<AuditConfig, ReportError> {
        toml::from_str(text).map_err(|e| ReportError::Config(e.to_string()))
    }

    /// Parses, resolves relative paths against the file's directory and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<AuditConfig, ReportError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ReportError::Config(format!("{}: {e}", path.display())))?;
        let mut config = AuditConfig::parse(&text)?;
        config.resolve_paths(path.parent().unwrap_or(Path::new("")));
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_file);
        fix(&mut self.output_dir);
        self.embedding_sources.iter_mut().for_each(|s| fix(&mut s.path));
        self.manifests.iter_mut().for_each(fix);
        for p in [
            &mut self.align.strip_manifest,
            &mut self.rnd.lexicon,
            &mut self.weat.role_sets,
            &mut self.weat.benchmark_sets,
            &mut self.rnsb.seeds,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        let fail = |m: String| Err(ReportError::Config(m));
        if self.analyses.is_empty() {
            return fail("`analyses` must name at least one analysis".into());
        }
        let mut paths: Vec<&Path> = vec![&self.data_file];
        paths.extend(self.embedding_sources.iter().map(|s| s.path.as_path()));
        paths.extend(self.manifests.iter().map(PathBuf::as_path));
        paths.extend(
            [
                &self.align.strip_manifest,
                &self.rnd.lexicon,
                &self.weat.role_sets,
                &self.weat.benchmark_sets,
                &self.rnsb.seeds,
            ]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path),
        );
        if let Some(p) = paths.iter().find(|p| !p.is_file()) {
            return fail(format!("input file {} does not exist", p.display()));
        }
        let mut labels: Vec<&str> = self.embedding_sources.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return fail(format!("duplicate embedding source label `{}`", w[0]));
        }
        if let Some(a) = self.analyses.iter().find(|a| a.needs_embeddings()) {
            if !self.embedding_sources.iter().any(|s| s.audit) {
                return fail(format!("analysis `{}` needs at least one embedding source", a.name()));
            }
        }
        if self.analyses.contains(&Analysis::Tokens) && self.manifests.is_empty() {
            return fail("analysis `tokens` needs at least one manifest".into());
        }
        if self.analyses.contains(&Analysis::Rnd) && self.rnd.lexicon.is_none() {
            return fail("analysis `rnd` needs `rnd.lexicon`".into());
        }
        for (key, value) in [
            ("rnd.word_source", &self.rnd.word_source),
            ("weat.word_source", &self.weat.word_source),
            ("rnsb.seed_source", &self.rnsb.seed_source),
        ] {
            if let Some(w) = value {
                if !labels.contains(&w.as_str()) {
                    return fail(format!("`{key}` names unknown source `{w}`"));
                }
            }
        }
        if !(self.weat.alpha > 0.0 && self.weat.alpha < 1.0) {
            return fail(format!("`weat.alpha` must lie in (0, 1), got {}", self.weat.alpha));
        }
        if self.weat.samples == 0 {
            return fail("`weat.samples` must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_with_defaults() {
        let c = AuditConfig::parse(
            "data_file = 'e.txt'\noutput_dir = 'out'\nanalyses = ['coverage', 'weat_roles']\n",
        )
        .unwrap();
        assert_eq!(c.analyses, [Analysis::Coverage, Analysis::WeatRoles]);
        assert_eq!(c.weat.samples, 10_000);
        assert_eq!(c.rnd.low, 0.48);
        assert!(c.rnd.normalize);
    }

    #[test]
    fn lookup_only_sources() {
        let c = AuditConfig::parse(
            "data_file='e'\noutput_dir='o'\nanalyses=['rnd']\n\
             [[embedding_sources]]\npath='w.txt'\nformat='word2vec'\nlabel='words'\naudit=false\n\
             [[embedding_sources]]\npath='m.jsonl'\nformat='dump'\nlabel='model'\n",
        )
        .unwrap();
        assert_eq!(c.embedding_sources.iter().map(|s| s.audit).collect::<Vec<_>>(), [false, true]);
        assert_eq!(c.embedding_sources[0].format, SourceFormat::Word2vec);
    }

    #[test]
    fn unknown_fields_and_analyses_rejected() {
        assert!(AuditConfig::parse("data_file='e'\noutput_dir='o'\nanalyses=['bogus']\n").is_err());
        assert!(AuditConfig::parse("data_file='e'\noutput_dir='o'\nanalyses=[]\ncolour=1\n").is_err());
    }

    #[test]
    fn empty_analyses_fail_validation() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("e.txt");
        std::fs::write(&data, "").unwrap();
        let mut c = AuditConfig::parse("data_file='e.txt'\noutput_dir='o'\nanalyses=[]\n").unwrap();
        c.resolve_paths(dir.path());
        assert!(matches!(c.validate(), Err(ReportError::Config(m)) if m.contains("at least one")));
        c.analyses = vec![Analysis::Coverage];
        assert!(c.validate().is_err(), "coverage without sources");
        c.analyses = vec![Analysis::Tokens];
        c.manifests = vec![dir.path().join("missing.jsonl")];
        assert!(matches!(c.validate(), Err(ReportError::Config(m)) if m.contains("missing.jsonl")));
    }
}
