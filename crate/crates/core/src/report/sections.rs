use std::collections::BTreeMap;

use super::svg::{render_heatmap, Palette};
use super::table::{num, opt, short, Table};
use super::{sanitize_label, Analysis, AnalysisFailure, AuditConfig};
use crate::bias::{
    bundled_caliskan, bundled_emoji_sentiment, derive_seed, filter_neutral, load_vad_path, resolve_members,
    rnd_matrix, rnsb_roles, train_sentiment_direction, weat_roles, weat_tone_targets, AttributePair,
    OptimizerConfig, PermutationConfig, Sentiment, SetConfig, WeatSuite,
};
use crate::catalog::{is_modifier, Catalog, SkinTone, SubsetFilter};
use crate::ids;
use crate::similarity::{alignment_table, tone_pair_matrix, AlignmentOptions, Pairing, ToneMatrix};
use crate::store::EmbeddingSet;
use crate::tokens::{asymmetry_flags, modifier_lengths, summarize, TokenManifest};

type Outcome<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub(super) struct Context<'a> {
    pub config: &'a AuditConfig,
    pub catalog: &'a Catalog,
    /// Label, audit flag and set of every source that loaded.
    pub loaded: &'a [(String, bool, EmbeddingSet)],
    pub provenance: &'a str,
    pub files: BTreeMap<String, Vec<u8>>,
    pub markdown: Vec<String>,
    pub failures: Vec<AnalysisFailure>,
    pub significance: Option<Table>,
}

fn audited(loaded: &[(String, bool, EmbeddingSet)]) -> impl Iterator<Item = (&String, &EmbeddingSet)> {
    loaded.iter().filter(|(_, audit, _)| *audit).map(|(label, _, set)| (label, set))
}

fn tone_header<'s>(lead: &[&'s str]) -> Vec<&'s str> {
    let mut h = lead.to_vec();
    h.extend(SkinTone::ALL.iter().map(|t| t.label()));
    h
}

fn matrix_table(matrix: &ToneMatrix, counts: &[[usize; 6]; 6]) -> Table {
    let mut t = Table::new(["tone_a", "tone_b", "value", "families"]);
    for a in SkinTone::ALL {
        for b in SkinTone::ALL {
            t.push(vec![
                a.label().into(),
                b.label().into(),
                opt(matrix.get(a, b)),
                counts[a.index()][b.index()].to_string(),
            ]);
        }
    }
    t
}

fn matrix_markdown(matrix: &ToneMatrix) -> String {
    let mut t = Table::new(tone_header(&[""]));
    for a in SkinTone::ALL {
        let mut row = vec![a.label().to_string()];
        row.extend(SkinTone::ALL.iter().map(|&b| short(matrix.get(a, b))));
        t.push(row);
    }
    t.to_markdown()
}

impl Context<'_> {
    fn fail(&mut self, analysis: Analysis, source: &str, message: String) {
        self.failures.push(AnalysisFailure {
            analysis: analysis.name().into(),
            source: source.into(),
            message,
        });
    }

    fn emit(&mut self, name: &str, table: &Table) {
        self.files.insert(name.into(), table.to_csv(self.provenance));
    }

    fn source(&self, label: &Option<String>) -> Option<&EmbeddingSet> {
        label
            .as_ref()
            .and_then(|l| self.loaded.iter().find(|(k, _, _)| k == l).map(|(_, _, s)| s))
    }

    fn subset(&self, filter: &SubsetFilter) -> Outcome<Catalog> {
        self.catalog.subset(filter).map_err(err)
    }

    pub fn run(&mut self, analysis: Analysis) {
        match analysis {
            Analysis::Coverage => self.coverage(),
            Analysis::Tokens => self.tokens(),
            Analysis::Align => self.align(),
            Analysis::Pairwise => self.pairwise(),
            Analysis::Rnd => self.rnd(),
            Analysis::WeatRoles => self.weat_roles(),
            Analysis::WeatCaliskan => self.weat_caliskan(),
            Analysis::Rnsb => self.rnsb(),
        }
    }

    fn coverage(&mut self) {
        let mut t = Table::new(["source", "total_tokens", "emojis_supported", "skin_toned_supported"]);
        for (label, set) in audited(self.loaded) {
            let c = crate::store::coverage(set, self.catalog);
            t.push(vec![
                label.clone(),
                c.total_tokens.to_string(),
                c.emojis_supported.to_string(),
                c.skin_toned_supported.to_string(),
            ]);
        }
        self.markdown.push(format!("## Coverage\n\n{}", t.to_markdown()));
        self.emit("coverage.csv", &t);
    }

    fn tokens(&mut self) {
        let ids = self.catalog.skin_toned_ids();
        let mut stats = Table::new([
            "model", "tokenizer", "n", "mean", "min", "max", "mode", "mode_frequency", "q1", "median", "q3",
        ]);
        let mut mods = Table::new(tone_header(&["model", "tokenizer"]));
        mods.header.remove(2);
        mods.header.push("asymmetry".into());
        for path in &self.config.manifests {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let manifest = match TokenManifest::load_path(path) {
                Ok(m) => m,
                Err(e) => {
                    self.fail(Analysis::Tokens, &name, err(e));
                    continue;
                }
            };
            let h = &manifest.header;
            let modifier_only = manifest.entries.keys().all(|id| {
                ids::id_to_codepoints(id).is_ok_and(|cps| cps.len() == 1 && is_modifier(cps[0]))
            });
            if !modifier_only {
                match summarize(&manifest, &ids) {
                    Ok(s) => stats.push(vec![
                        h.model_label.clone(),
                        h.tokenizer_label.clone(),
                        s.n.to_string(),
                        num(s.mean),
                        s.min.to_string(),
                        s.max.to_string(),
                        s.mode.to_string(),
                        s.mode_frequency.to_string(),
                        num(s.q1),
                        num(s.median),
                        num(s.q3),
                    ]),
                    Err(e) => self.fail(Analysis::Tokens, &name, err(e)),
                }
            }
            match modifier_lengths(&manifest) {
                Ok(lengths) => {
                    let flags = asymmetry_flags(&lengths);
                    let asym = if flags.is_empty() {
                        "none".to_string()
                    } else {
                        flags
                            .iter()
                            .map(|f| format!("{}={}/{}", f.tone.label(), f.count, f.minimum))
                            .collect::<Vec<_>>()
                            .join(";")
                    };
                    let mut row = vec![h.model_label.clone(), h.tokenizer_label.clone()];
                    row.extend(lengths.values().map(|c| c.to_string()));
                    row.push(asym);
                    mods.push(row);
                }
                Err(e) => self.fail(Analysis::Tokens, &name, err(e)),
            }
        }
        self.markdown.push(format!(
            "## Tokenization\n\nToken counts over {} skin-toned sequences.\n\n{}\nBare modifier token counts.\n\n{}",
            ids.len(),
            stats.to_markdown(),
            mods.to_markdown()
        ));
        self.emit("tokens.csv", &stats);
        self.emit("modifiers.csv", &mods);
    }

    fn strip_ids(&self) -> Outcome<Vec<i64>> {
        let Some(path) = &self.config.align.strip_manifest else {
            return Ok(Vec::new());
        };
        let manifest = TokenManifest::load_path(path).map_err(err)?;
        let mut out = Vec::new();
        for tone in SkinTone::MODIFIERS {
            let id = ids::codepoints_to_id(&[tone.codepoint().expect("modifier codepoint")]);
            let entry = manifest
                .entries
                .get(&id)
                .ok_or_else(|| format!("strip manifest lacks the {tone} modifier"))?;
            out.extend_from_slice(&entry.token_ids);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn align(&mut self) {
        let mut t = Table::new([
            "source", "tone", "mean_cosine", "mean_wmd_cosine", "mean_wmd_euclidean", "pairs", "skipped",
        ]);
        let options = match self.strip_ids() {
            Ok(ids) => AlignmentOptions { strip_token_ids: ids },
            Err(e) => {
                self.fail(Analysis::Align, "strip_manifest", e);
                return;
            }
        };
        let families = self.catalog.families();
        let pairing = Pairing::cldr_names(families);
        for (label, set) in audited(self.loaded) {
            match alignment_table(families, set, &pairing, &options) {
                Ok(table) => {
                    for r in &table.rows {
                        t.push(vec![
                            label.clone(),
                            r.tone.label().into(),
                            opt(r.mean_cosine),
                            opt(r.mean_wmd_cosine),
                            opt(r.mean_wmd_euclidean),
                            r.pairs.to_string(),
                            r.skipped.to_string(),
                        ]);
                    }
                }
                Err(e) => self.fail(Analysis::Align, label, err(e)),
            }
        }
        self.markdown.push(format!("## Emoji-description alignment\n\n{}", t.to_markdown()));
        self.emit("align.csv", &t);
    }

    fn heatmap(&mut self, prefix: &str, label: &str, title: &str, palette: Palette, m: &ToneMatrix, counts: &[[usize; 6]; 6]) {
        let stem = format!("{prefix}_{}", sanitize_label(label));
        self.emit(&format!("{stem}.csv"), &matrix_table(m, counts));
        self.files
            .insert(format!("{stem}.svg"), render_heatmap(m, palette, title).into_bytes());
        self.markdown.push(format!(
            "### {label}\n\n![{title}]({stem}.svg)\n\n{}",
            matrix_markdown(m)
        ));
    }

    fn pairwise(&mut self) {
        let group = &self.config.pairwise.group;
        let subset = match self.subset(&SubsetFilter::from_name(group, self.catalog)) {
            Ok(c) => c,
            Err(e) => return self.fail(Analysis::Pairwise, group, e),
        };
        self.markdown
            .push(format!("## Pairwise tone distances ({group}, {} families)", subset.families().len()));
        for (label, set) in audited(self.loaded) {
            match tone_pair_matrix(subset.families(), set) {
                Ok(p) => self.heatmap(
                    "pairwise",
                    label,
                    &format!("{label}: mean cosine distance"),
                    Palette::Sequential,
                    &p.matrix,
                    &p.counts,
                ),
                Err(e) => self.fail(Analysis::Pairwise, label, err(e)),
            }
        }
    }

    fn rnd(&mut self) {
        let opts = &self.config.rnd;
        let lexicon = opts
            .lexicon
            .as_ref()
            .ok_or_else(|| "no lexicon configured".to_string())
            .and_then(|p| load_vad_path(p).map_err(err))
            .and_then(|entries| filter_neutral(&entries, opts.low, opts.high).map_err(err));
        let lexicon = match lexicon {
            Ok(l) => l,
            Err(e) => return self.fail(Analysis::Rnd, "lexicon", e),
        };
        let subset = match self.subset(&SubsetFilter::from_name(&opts.group, self.catalog)) {
            Ok(c) => c,
            Err(e) => return self.fail(Analysis::Rnd, &opts.group, e),
        };
        self.markdown.push(format!(
            "## Relative norm distance ({}, {} families, {} neutral words in [{}, {}])",
            opts.group,
            subset.families().len(),
            lexicon.len(),
            opts.low,
            opts.high
        ));
        for (label, set) in audited(self.loaded) {
            let words = self.source(&opts.word_source).unwrap_or(set);
            match rnd_matrix(subset.families(), set, &lexicon, words, opts.normalize) {
                Ok(r) => self.heatmap(
                    "rnd",
                    label,
                    &format!("{label}: RND (row minus column)"),
                    Palette::Diverging,
                    &r.matrix,
                    &r.counts,
                ),
                Err(e) => self.fail(Analysis::Rnd, label, err(e)),
            }
        }
    }

    fn permutation(&self, key: &str) -> PermutationConfig {
        PermutationConfig {
            exact_limit: self.config.weat.exact_limit,
            samples: self.config.weat.samples,
            seed: derive_seed(self.config.seed, key),
        }
    }

    fn record_significance(&mut self, suite: &str, source: &str, attributes: &str, result: &WeatSuite) {
        let t = self.significance.get_or_insert_with(|| {
            Table::new([
                "suite",
                "source",
                "attributes",
                "tone_x",
                "tone_y",
                "mean_effect_size",
                "tests",
                "significant",
                "significance_rate",
            ])
        });
        for s in &result.summary {
            t.push(vec![
                suite.into(),
                source.into(),
                attributes.into(),
                s.tone_x.label().into(),
                s.tone_y.label().into(),
                opt(s.mean_effect_size),
                s.tests.to_string(),
                s.significant.to_string(),
                opt(s.significance_rate),
            ]);
        }
    }

    fn weat_rows(t: &mut Table, source: &str, attributes: Option<&str>, suite: &WeatSuite) {
        for r in &suite.rows {
            let mut row = vec![source.to_string()];
            row.push(attributes.unwrap_or(&r.test).to_string());
            row.extend([r.tone_x.label().to_string(), r.tone_y.label().to_string()]);
            if attributes.is_some() {
                row.push(r.test.clone());
            }
            row.extend([
                r.targets.to_string(),
                num(r.result.statistic),
                num(r.result.effect_size),
                num(r.result.p_value),
                r.result.permutations.to_string(),
                r.result.exact.to_string(),
            ]);
            t.push(row);
        }
    }

    fn summary_markdown(suite: &WeatSuite) -> String {
        let mut t = Table::new(["tone_x", "tone_y", "mean_effect_size", "significant", "tests"]);
        for s in &suite.summary {
            t.push(vec![
                s.tone_x.label().into(),
                s.tone_y.label().into(),
                short(s.mean_effect_size),
                s.significant.to_string(),
                s.tests.to_string(),
            ]);
        }
        t.to_markdown()
    }

    fn set_config(path: &Option<std::path::PathBuf>, bundled: fn() -> SetConfig) -> Outcome<SetConfig> {
        match path {
            Some(p) => SetConfig::load_path(p).map_err(err),
            None => Ok(bundled()),
        }
    }

    fn weat_roles(&mut self) {
        let sets = match Self::set_config(&self.config.weat.role_sets, bundled_emoji_sentiment) {
            Ok(s) if !s.pairs.is_empty() => s,
            Ok(_) => return self.fail(Analysis::WeatRoles, "role_sets", "no attribute pairs".into()),
            Err(e) => return self.fail(Analysis::WeatRoles, "role_sets", e),
        };
        let roles = match self.subset(&SubsetFilter::person_roles()) {
            Ok(c) => c,
            Err(e) => return self.fail(Analysis::WeatRoles, "catalog", e),
        };
        let mut t = Table::new([
            "source", "attributes", "tone_x", "tone_y", "role", "targets", "statistic", "effect_size", "p_value",
            "permutations", "exact",
        ]);
        let mut md = format!(
            "## WEAT over person roles ({} roles, alpha {})\n",
            roles.families().len(),
            self.config.weat.alpha
        );
        for (label, set) in audited(self.loaded) {
            for pair in &sets.pairs {
                let cfg = self.permutation(&format!("weat_roles/{label}/{}", pair.name));
                match weat_roles(roles.families(), set, set, pair, &cfg, self.config.weat.alpha) {
                    Ok(suite) => {
                        Self::weat_rows(&mut t, label, Some(&pair.name), &suite);
                        self.record_significance("weat_roles", label, &pair.name, &suite);
                        md.push_str(&format!("\n### {label}, {}\n\n{}", pair.name, Self::summary_markdown(&suite)));
                    }
                    Err(e) => self.fail(Analysis::WeatRoles, label, format!("{}: {e}", pair.name)),
                }
            }
        }
        self.markdown.push(md);
        self.emit("weat_roles.csv", &t);
    }

    fn weat_caliskan(&mut self) {
        let sets = match Self::set_config(&self.config.weat.benchmark_sets, bundled_caliskan) {
            Ok(s) if !s.pairs.is_empty() => s,
            Ok(_) => return self.fail(Analysis::WeatCaliskan, "benchmark_sets", "no attribute pairs".into()),
            Err(e) => return self.fail(Analysis::WeatCaliskan, "benchmark_sets", e),
        };
        let pairs: &[AttributePair] = &sets.pairs;
        let mut t = Table::new([
            "source", "attributes", "tone_x", "tone_y", "targets", "statistic", "effect_size", "p_value",
            "permutations", "exact",
        ]);
        let mut md = format!(
            "## WEAT with tone groups as targets ({} attribute pairs, alpha {})\n",
            pairs.len(),
            self.config.weat.alpha
        );
        for (label, set) in audited(self.loaded) {
            let words = self.source(&self.config.weat.word_source).unwrap_or(set);
            let cfg = self.permutation(&format!("weat_caliskan/{label}"));
            match weat_tone_targets(self.catalog.families(), set, words, pairs, &cfg, self.config.weat.alpha) {
                Ok(suite) => {
                    Self::weat_rows(&mut t, label, None, &suite);
                    self.record_significance("weat_caliskan", label, "all", &suite);
                    md.push_str(&format!("\n### {label}\n\n{}", Self::summary_markdown(&suite)));
                }
                Err(e) => self.fail(Analysis::WeatCaliskan, label, err(e)),
            }
        }
        self.markdown.push(md);
        self.emit("weat_caliskan.csv", &t);
    }

    fn rnsb(&mut self) {
        let opts = &self.config.rnsb;
        let seeds = Self::set_config(&opts.seeds, bundled_emoji_sentiment)
            .and_then(|s| s.sentiment.ok_or_else(|| "seed file has no [sentiment] table".to_string()));
        let seeds = match seeds {
            Ok(s) => s,
            Err(e) => return self.fail(Analysis::Rnsb, "seeds", e),
        };
        let roles = match self.subset(&SubsetFilter::person_roles()) {
            Ok(c) => c,
            Err(e) => return self.fail(Analysis::Rnsb, "catalog", e),
        };
        let optimizer = OptimizerConfig {
            lambda: opts.lambda,
            tolerance: opts.tolerance,
            max_iterations: opts.max_iterations,
            accelerated: opts.accelerated,
        };
        let mut header = tone_header(&["source", "role", "name"]);
        header.push("kl_divergence");
        let mut t = Table::new(header);
        let mut summary = Table::new(["source", "roles", "mean_kl", "training_loss", "iterations"]);
        for (label, set) in audited(self.loaded) {
            let seed_set = self.source(&opts.seed_source).unwrap_or(set);
            let result = (|| {
                let pos = resolve_members(seed_set, "positive", &seeds.positive).map_err(err)?;
                let neg = resolve_members(seed_set, "negative", &seeds.negative).map_err(err)?;
                let samples: Vec<(&[f64], Sentiment)> = pos
                    .into_iter()
                    .map(|v| (v, Sentiment::Pos))
                    .chain(neg.into_iter().map(|v| (v, Sentiment::Neg)))
                    .collect();
                let direction = train_sentiment_direction(&samples, &optimizer).map_err(err)?;
                let suite = rnsb_roles(roles.families(), set, &direction).map_err(err)?;
                Ok::<_, String>((direction, suite))
            })();
            match result {
                Ok((direction, suite)) => {
                    for r in &suite.rows {
                        let mut row = vec![label.clone(), r.role.clone(), r.name.clone()];
                        row.extend(SkinTone::ALL.iter().map(|tone| opt(r.shares.get(tone).copied())));
                        row.push(num(r.kl_divergence));
                        t.push(row);
                    }
                    summary.push(vec![
                        label.clone(),
                        suite.rows.len().to_string(),
                        short(suite.mean_kl),
                        short(Some(direction.training_loss)),
                        direction.iterations.to_string(),
                    ]);
                }
                Err(e) => self.fail(Analysis::Rnsb, label, e),
            }
        }
        self.markdown.push(format!("## RNSB over person roles\n\n{}", summary.to_markdown()));
        self.emit("rnsb.csv", &t);
    }

    pub fn finish(mut self) -> super::AuditReport {
        if let Some(t) = self.significance.take() {
            self.emit("significance.csv", &t);
        }
        let mut md = format!("# Skin-tone emoji audit\n\n`{}`\n\n", self.provenance);
        md.push_str(&self.markdown.join("\n\n"));
        md.push_str("\n\n## Failures\n\n");
        if self.failures.is_empty() {
            md.push_str("None.\n");
        } else {
            let mut t = Table::new(["analysis", "source", "message"]);
            for f in &self.failures {
                t.push(vec![f.analysis.clone(), f.source.clone(), f.message.replace('\n', " ")]);
            }
            md.push_str(&t.to_markdown());
        }
        self.files.insert("report.md".into(), md.into_bytes());
        super::AuditReport {
            files: self.files,
            failures: self.failures,
        }
    }
}
