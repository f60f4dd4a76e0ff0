//! Unicode emoji catalog.
//!
//! Parses `emoji-test.txt`, classifies each sequence by the skin-tone
//! modifiers it carries, and groups single-tone sequences with their base
//! into [`EmojiFamily`] values. Only fully-qualified sequences take part in
//! families; the other qualification levels stay in the catalog for lookup.
//! Sequences carrying two or more modifiers (mixed-tone handshakes, couples)
//! are counted but never assigned a family slot.

mod parse;
mod tone;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ids::{self, normalized_key};

pub use tone::{is_modifier, SkinTone, FIRST_MODIFIER, LAST_MODIFIER};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unknown status `{status}`")]
    UnknownStatus { line: usize, status: String },
    #[error("entry {entry}: duplicate fully-qualified sequence {id}")]
    Duplicate { entry: usize, id: String },
    #[error("unknown {kind} name(s) {unknown:?}; valid names: {valid:?}")]
    UnknownFilter {
        kind: &'static str,
        unknown: Vec<String>,
        valid: Vec<String>,
    },
    #[error("unicode version mismatch: expected {expected}, data file declares {found}")]
    VersionMismatch { expected: String, found: String },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Qualification {
    FullyQualified,
    MinimallyQualified,
    Unqualified,
    Component,
}

impl Qualification {
    pub fn from_status(status: &str) -> Option<Self> {
        match status {
            "fully-qualified" => Some(Self::FullyQualified),
            "minimally-qualified" => Some(Self::MinimallyQualified),
            "unqualified" => Some(Self::Unqualified),
            "component" => Some(Self::Component),
            _ => None,
        }
    }
}

fn serialize_hex<S: Serializer>(cps: &[u32], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(cps.iter().map(|cp| format!("{cp:X}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmojiSequence {
    #[serde(serialize_with = "serialize_hex")]
    pub codepoints: Vec<u32>,
    pub qualification: Qualification,
    /// CLDR short name, e.g. `raised fist: dark skin tone`.
    pub name: String,
    pub group: String,
    pub subgroup: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emoji_version: Option<String>,
}

impl EmojiSequence {
    /// Codepoint-hex id, e.g. `270A-1F3FF`.
    pub fn id(&self) -> String {
        ids::codepoints_to_id(&self.codepoints)
    }

    pub fn key(&self) -> String {
        normalized_key(&self.codepoints)
    }

    pub fn as_string(&self) -> String {
        ids::codepoints_to_string(&self.codepoints)
    }

    pub fn tone_modifier_count(&self) -> usize {
        self.codepoints.iter().filter(|&&cp| is_modifier(cp)).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "tones", rename_all = "kebab-case")]
pub enum ToneClassification {
    NonModifiable,
    DefaultOfModifiable,
    Toned(SkinTone),
    MultiTone(Vec<SkinTone>),
}

impl ToneClassification {
    pub fn is_skin_toned(&self) -> bool {
        matches!(self, Self::Toned(_) | Self::MultiTone(_))
    }
}

/// Classifies by modifier codepoints alone. Without a catalog there is no
/// family index, so unmodified input is always `NonModifiable`; use
/// [`Catalog::classify`] to detect family bases.
pub fn classify_sequence(codepoints: &[u32]) -> ToneClassification {
    let tones: Vec<SkinTone> = codepoints
        .iter()
        .filter_map(|&cp| SkinTone::from_codepoint(cp))
        .collect();
    match tones.len() {
        0 => ToneClassification::NonModifiable,
        1 => ToneClassification::Toned(tones[0]),
        _ => ToneClassification::MultiTone(tones),
    }
}

/// Removes tone modifiers and U+FE0F. Idempotent.
pub fn base_codepoints(codepoints: &[u32]) -> Vec<u32> {
    codepoints
        .iter()
        .copied()
        .filter(|&cp| !is_modifier(cp) && cp != ids::VARIATION_SELECTOR_16)
        .collect()
}

/// Strips tone modifiers from the codepoints and the `…skin tone` qualifiers
/// from the CLDR name. Variation selectors are dropped, so the result is in
/// normalized form; [`Catalog::base_entry`] finds the catalog's own entry.
pub fn base_of(seq: &EmojiSequence) -> EmojiSequence {
    EmojiSequence {
        codepoints: base_codepoints(&seq.codepoints),
        name: strip_tone_from_name(&seq.name),
        ..seq.clone()
    }
}

fn strip_tone_from_name(name: &str) -> String {
    let Some((head, tail)) = name.split_once(": ") else {
        return name.to_string();
    };
    let kept: Vec<&str> = tail
        .split(", ")
        .filter(|part| !part.ends_with("skin tone"))
        .collect();
    if kept.is_empty() {
        head.to_string()
    } else {
        format!("{head}: {}", kept.join(", "))
    }
}

/// A base emoji plus its single-tone variants. `Default` resolves to the base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmojiFamily {
    pub base: EmojiSequence,
    pub variants: BTreeMap<SkinTone, EmojiSequence>,
}

impl EmojiFamily {
    pub fn variant(&self, tone: SkinTone) -> Option<&EmojiSequence> {
        match tone {
            SkinTone::Default => Some(&self.base),
            t => self.variants.get(&t),
        }
    }

    pub fn name(&self) -> &str {
        &self.base.name
    }

    /// Tones present, Default first.
    pub fn tones(&self) -> impl Iterator<Item = SkinTone> + '_ {
        std::iter::once(SkinTone::Default).chain(self.variants.keys().copied())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ToneCounts {
    pub sequences: usize,
    pub fully_qualified: usize,
    /// Fully-qualified, non-component, exactly one modifier.
    pub single_tone: usize,
    /// Fully-qualified, two or more modifiers.
    pub multi_tone: usize,
    /// Every line carrying at least one modifier, any status.
    pub with_modifier_any_status: usize,
    pub families: usize,
    /// Single-tone sequences whose base has no fully-qualified entry.
    pub orphan_variants: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    sequences: Vec<EmojiSequence>,
    families: Vec<EmojiFamily>,
    unicode_version: String,
    orphan_variants: usize,
    /// normalized key -> sequence index (fully-qualified entries win).
    by_key: HashMap<String, usize>,
    /// normalized base key -> family index.
    family_by_base: HashMap<String, usize>,
}

impl Catalog {
    pub fn parse<R: BufRead>(reader: R) -> Result<Catalog, CatalogError> {
        let parsed = parse::parse_lines(reader)?;
        Catalog::from_sequences(parsed.sequences, parsed.unicode_version)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| CatalogError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Catalog::parse(std::io::BufReader::new(file))
    }

    pub fn parse_str(text: &str) -> Result<Catalog, CatalogError> {
        Catalog::parse(text.as_bytes())
    }

    /// Builds the catalog and assembles families. Sequence order is kept;
    /// families follow the order of their base entries.
    pub fn from_sequences(
        sequences: Vec<EmojiSequence>,
        unicode_version: String,
    ) -> Result<Catalog, CatalogError> {
        let mut seen_fq = HashMap::new();
        for (i, seq) in sequences.iter().enumerate() {
            if seq.qualification == Qualification::FullyQualified
                && seen_fq.insert(seq.codepoints.clone(), i).is_some()
            {
                return Err(CatalogError::Duplicate {
                    entry: i + 1,
                    id: seq.id(),
                });
            }
        }

        let mut by_key: HashMap<String, usize> = HashMap::new();
        for (i, seq) in sequences.iter().enumerate() {
            let key = seq.key();
            match by_key.get(&key) {
                Some(&j) if sequences[j].qualification == Qualification::FullyQualified => {}
                _ => {
                    by_key.insert(key, i);
                }
            }
        }

        // Group fully-qualified single-tone sequences by their base key.
        let mut variants_by_base: HashMap<String, BTreeMap<SkinTone, usize>> = HashMap::new();
        for (i, seq) in sequences.iter().enumerate() {
            if seq.qualification != Qualification::FullyQualified {
                continue;
            }
            if let ToneClassification::Toned(tone) = classify_sequence(&seq.codepoints) {
                let base = base_codepoints(&seq.codepoints);
                if base.is_empty() {
                    continue;
                }
                variants_by_base
                    .entry(ids::codepoints_to_id(&base))
                    .or_default()
                    .insert(tone, i);
            }
        }

        let mut families = Vec::new();
        let mut family_by_base = HashMap::new();
        let mut attached = 0usize;
        for seq in &sequences {
            if seq.qualification != Qualification::FullyQualified || seq.tone_modifier_count() > 0 {
                continue;
            }
            let key = seq.key();
            if family_by_base.contains_key(&key) {
                continue;
            }
            if let Some(variants) = variants_by_base.get(&key) {
                attached += variants.len();
                family_by_base.insert(key, families.len());
                families.push(EmojiFamily {
                    base: seq.clone(),
                    variants: variants
                        .iter()
                        .map(|(&t, &i)| (t, sequences[i].clone()))
                        .collect(),
                });
            }
        }
        let orphan_variants = variants_by_base.values().map(BTreeMap::len).sum::<usize>() - attached;

        Ok(Catalog {
            sequences,
            families,
            unicode_version,
            orphan_variants,
            by_key,
            family_by_base,
        })
    }

    pub fn sequences(&self) -> &[EmojiSequence] {
        &self.sequences
    }

    pub fn families(&self) -> &[EmojiFamily] {
        &self.families
    }

    pub fn unicode_version(&self) -> &str {
        &self.unicode_version
    }

    pub fn check_version(&self, expected: &str) -> Result<(), CatalogError> {
        if self.unicode_version == expected {
            Ok(())
        } else {
            Err(CatalogError::VersionMismatch {
                expected: expected.to_string(),
                found: self.unicode_version.clone(),
            })
        }
    }

    /// Looks a sequence up regardless of U+FE0F presence, preferring the
    /// fully-qualified entry.
    pub fn lookup(&self, codepoints: &[u32]) -> Option<&EmojiSequence> {
        self.by_key
            .get(&normalized_key(codepoints))
            .map(|&i| &self.sequences[i])
    }

    pub fn family_of(&self, codepoints: &[u32]) -> Option<&EmojiFamily> {
        self.family_by_base
            .get(&ids::codepoints_to_id(&base_codepoints(codepoints)))
            .map(|&i| &self.families[i])
    }

    /// Modifier-based classification, refined with the family index so that
    /// bases of known families report `DefaultOfModifiable`.
    pub fn classify(&self, codepoints: &[u32]) -> ToneClassification {
        match classify_sequence(codepoints) {
            ToneClassification::NonModifiable
                if self.family_by_base.contains_key(&normalized_key(codepoints)) =>
            {
                ToneClassification::DefaultOfModifiable
            }
            other => other,
        }
    }

    /// The catalog's fully-qualified entry for the base of `seq`.
    pub fn base_entry(&self, seq: &EmojiSequence) -> Option<&EmojiSequence> {
        self.lookup(&base_codepoints(&seq.codepoints))
            .filter(|s| s.qualification == Qualification::FullyQualified)
    }

    pub fn counts(&self) -> ToneCounts {
        let mut counts = ToneCounts {
            sequences: self.sequences.len(),
            families: self.families.len(),
            orphan_variants: self.orphan_variants,
            ..ToneCounts::default()
        };
        for seq in &self.sequences {
            let n = seq.tone_modifier_count();
            if n > 0 {
                counts.with_modifier_any_status += 1;
            }
            if seq.qualification == Qualification::FullyQualified {
                counts.fully_qualified += 1;
                match n {
                    0 => {}
                    1 => counts.single_tone += 1,
                    _ => counts.multi_tone += 1,
                }
            }
        }
        counts
    }

    /// Ids of every sequence that carries at least one modifier, any status,
    /// in file order.
    pub fn skin_toned_ids(&self) -> Vec<String> {
        self.sequences
            .iter()
            .filter(|s| s.tone_modifier_count() > 0)
            .map(EmojiSequence::id)
            .collect()
    }

    pub fn group_names(&self) -> BTreeSet<String> {
        self.sequences.iter().map(|s| s.group.clone()).collect()
    }

    pub fn subgroup_names(&self) -> BTreeSet<String> {
        self.sequences.iter().map(|s| s.subgroup.clone()).collect()
    }

    /// Keeps families whose base matches `filter`, and sequences whose own
    /// group/subgroup match it.
    pub fn subset(&self, filter: &SubsetFilter) -> Result<Catalog, CatalogError> {
        filter.validate(self)?;
        let sequences: Vec<EmojiSequence> = self
            .sequences
            .iter()
            .filter(|s| filter.matches(s))
            .cloned()
            .collect();
        let families: Vec<EmojiFamily> = self
            .families
            .iter()
            .filter(|f| filter.matches(&f.base))
            .cloned()
            .collect();
        Ok(Catalog::from_parts(sequences, families, self.unicode_version.clone()))
    }

    fn from_parts(
        sequences: Vec<EmojiSequence>,
        families: Vec<EmojiFamily>,
        unicode_version: String,
    ) -> Catalog {
        let mut by_key: HashMap<String, usize> = HashMap::new();
        for (i, seq) in sequences.iter().enumerate() {
            let key = seq.key();
            match by_key.get(&key) {
                Some(&j) if sequences[j].qualification == Qualification::FullyQualified => {}
                _ => {
                    by_key.insert(key, i);
                }
            }
        }
        let family_by_base = families
            .iter()
            .enumerate()
            .map(|(i, f)| (f.base.key(), i))
            .collect();
        Catalog {
            sequences,
            families,
            unicode_version,
            orphan_variants: 0,
            by_key,
            family_by_base,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let families: Vec<serde_json::Value> = self
            .families
            .iter()
            .map(|f| {
                let variants: BTreeMap<String, String> = f
                    .variants
                    .iter()
                    .map(|(t, s)| (t.label().to_string(), s.id()))
                    .collect();
                serde_json::json!({
                    "base": f.base.id(),
                    "name": f.base.name,
                    "group": f.base.group,
                    "subgroup": f.base.subgroup,
                    "variants": variants,
                })
            })
            .collect();
        serde_json::json!({
            "unicode_version": self.unicode_version,
            "counts": self.counts(),
            "sequences": self.sequences,
            "families": families,
        })
    }
}

/// Group/subgroup predicate. Empty lists match everything; a sequence must
/// satisfy both lists when both are non-empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubsetFilter {
    pub groups: Vec<String>,
    pub subgroups: Vec<String>,
}

pub const HAND_GESTURE_PRESET: &str = "hand-gesture";
pub const PERSON_ROLE_SUBGROUP: &str = "person-role";

impl SubsetFilter {
    pub fn subgroups<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SubsetFilter {
            groups: Vec::new(),
            subgroups: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn person_roles() -> Self {
        Self::subgroups([PERSON_ROLE_SUBGROUP])
    }

    /// Every `hand-*` subgroup plus `hands` present in the catalog.
    pub fn hand_gestures(catalog: &Catalog) -> Self {
        Self::subgroups(
            catalog
                .subgroup_names()
                .into_iter()
                .filter(|s| s.starts_with("hand")),
        )
    }

    /// Resolves a subgroup name or the `hand-gesture` preset.
    pub fn from_name(name: &str, catalog: &Catalog) -> Self {
        if name == HAND_GESTURE_PRESET {
            Self::hand_gestures(catalog)
        } else {
            Self::subgroups([name])
        }
    }

    pub fn matches(&self, seq: &EmojiSequence) -> bool {
        (self.groups.is_empty() || self.groups.iter().any(|g| *g == seq.group))
            && (self.subgroups.is_empty() || self.subgroups.iter().any(|s| *s == seq.subgroup))
    }

    fn validate(&self, catalog: &Catalog) -> Result<(), CatalogError> {
        check_names("group", &self.groups, catalog.group_names())?;
        check_names("subgroup", &self.subgroups, catalog.subgroup_names())
    }
}

fn check_names(
    kind: &'static str,
    requested: &[String],
    valid: BTreeSet<String>,
) -> Result<(), CatalogError> {
    let unknown: Vec<String> = requested
        .iter()
        .filter(|n| !valid.contains(*n))
        .cloned()
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(CatalogError::UnknownFilter {
            kind,
            unknown,
            valid: valid.into_iter().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RAISED_FIST: &str = "\
# Version: 15.1
# group: People & Body

# subgroup: hand-fingers-closed
270A                                                   ; fully-qualified     # ✊ E0.6 raised fist
270A 1F3FB                                             ; fully-qualified     # ✊🏻 E1.0 raised fist: light skin tone
270A 1F3FC                                             ; fully-qualified     # ✊🏼 E1.0 raised fist: medium-light skin tone
270A 1F3FD                                             ; fully-qualified     # ✊🏽 E1.0 raised fist: medium skin tone
270A 1F3FE                                             ; fully-qualified     # ✊🏾 E1.0 raised fist: medium-dark skin tone
270A 1F3FF                                             ; fully-qualified     # ✊🏿 E1.0 raised fist: dark skin tone
";

    #[test]
    fn empty_input() {
        let c = Catalog::parse_str("").unwrap();
        assert!(c.sequences().is_empty());
        assert!(c.families().is_empty());
    }

    #[test]
    fn raised_fist_family() {
        let c = Catalog::parse_str(RAISED_FIST).unwrap();
        assert_eq!(c.unicode_version(), "15.1");
        assert_eq!(c.sequences().len(), 6);
        assert_eq!(c.families().len(), 1);
        let fam = &c.families()[0];
        assert_eq!(fam.base.codepoints, vec![0x270A]);
        assert_eq!(fam.base.name, "raised fist");
        assert_eq!(fam.variants.len(), 5);
        // Hand-built expectation for each tone slot.
        for (tone, cp) in SkinTone::MODIFIERS.iter().zip(0x1F3FB..=0x1F3FF) {
            assert_eq!(fam.variant(*tone).unwrap().codepoints, vec![0x270A, cp]);
        }
        assert_eq!(fam.variant(SkinTone::Default).unwrap(), &fam.base);
    }

    #[test]
    fn classification() {
        let c = Catalog::parse_str(RAISED_FIST).unwrap();
        assert_eq!(
            c.classify(&[0x270A, 0x1F3FF]),
            ToneClassification::Toned(SkinTone::Dark)
        );
        assert_eq!(c.classify(&[0x270A]), ToneClassification::DefaultOfModifiable);
        assert_eq!(c.classify(&[0x1F600]), ToneClassification::NonModifiable);
        assert_eq!(
            classify_sequence(&[0x1FAF1, 0x1F3FB, 0x200D, 0x1FAF2, 0x1F3FF]),
            ToneClassification::MultiTone(vec![SkinTone::Light, SkinTone::Dark])
        );
    }

    #[test]
    fn base_of_strips_modifiers() {
        let c = Catalog::parse_str(RAISED_FIST).unwrap();
        let medium = &c.sequences()[3];
        let base = base_of(medium);
        assert_eq!(base.codepoints, vec![0x270A]);
        assert_eq!(base.name, "raised fist");
        assert_eq!(base_of(&base), base);
        assert_eq!(c.base_entry(medium).unwrap().codepoints, vec![0x270A]);
    }

    #[test]
    fn tone_name_stripping() {
        assert_eq!(strip_tone_from_name("woman cook: medium skin tone"), "woman cook");
        assert_eq!(
            strip_tone_from_name("kiss: woman, man, medium-light skin tone, dark skin tone"),
            "kiss: woman, man"
        );
        assert_eq!(strip_tone_from_name("flag: Japan"), "flag: Japan");
        assert_eq!(strip_tone_from_name("raised fist"), "raised fist");
    }

    #[test]
    fn duplicate_fully_qualified_rejected() {
        let text = "270A ; fully-qualified # ✊ E0.6 raised fist\n270A ; fully-qualified # ✊ E0.6 raised fist\n";
        assert!(matches!(
            Catalog::parse_str(text),
            Err(CatalogError::Duplicate { .. })
        ));
    }

    #[test]
    fn subset_filters() {
        let c = Catalog::parse_str(RAISED_FIST).unwrap();
        let sub = c
            .subset(&SubsetFilter::subgroups(["hand-fingers-closed"]))
            .unwrap();
        assert_eq!(sub.families().len(), 1);
        assert_eq!(sub.families()[0].variants.len(), 5);

        let err = c.subset(&SubsetFilter::subgroups(["no-such"])).unwrap_err();
        match err {
            CatalogError::UnknownFilter { unknown, valid, .. } => {
                assert_eq!(unknown, vec!["no-such".to_string()]);
                assert_eq!(valid, vec!["hand-fingers-closed".to_string()]);
            }
            other => panic!("{other:?}"),
        }

        let none = c
            .subset(&SubsetFilter {
                groups: vec!["People & Body".into()],
                subgroups: vec![],
            })
            .unwrap();
        assert_eq!(none.families().len(), 1);
    }

    #[test]
    fn subset_matching_nothing_is_empty() {
        let text = format!(
            "{RAISED_FIST}# subgroup: face-smiling\n1F600 ; fully-qualified # 😀 E1.0 grinning face\n"
        );
        let c = Catalog::parse_str(&text).unwrap();
        let sub = c.subset(&SubsetFilter::subgroups(["face-smiling"])).unwrap();
        assert!(sub.families().is_empty());
        assert_eq!(sub.sequences().len(), 1);
    }

    #[test]
    fn json_uses_uppercase_hex() {
        let c = Catalog::parse_str(RAISED_FIST).unwrap();
        let json = c.to_json();
        assert_eq!(json["sequences"][1]["codepoints"][1], "1F3FB");
        assert_eq!(json["families"][0]["variants"]["dark"], "270A-1F3FF");
        assert_eq!(json["counts"]["single_tone"], 5);
    }
}
