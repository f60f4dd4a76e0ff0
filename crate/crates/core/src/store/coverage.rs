use serde::Serialize;

use super::{EmbeddingSet, RecordKind};
use crate::catalog::Catalog;
use crate::ids;

/// Vocabulary support for emojis and skin-toned emojis in one embedding set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub total_tokens: usize,
    pub emojis_supported: usize,
    pub skin_toned_supported: usize,
}

/// Counts records whose id resolves to a catalog sequence, and among those
/// the ones carrying at least one tone modifier.
pub fn coverage(set: &EmbeddingSet, catalog: &Catalog) -> CoverageReport {
    let mut report = CoverageReport {
        total_tokens: set.len(),
        ..CoverageReport::default()
    };
    for record in set.records().filter(|r| r.kind == RecordKind::Emoji) {
        let Ok(cps) = ids::id_to_codepoints(&record.id) else {
            continue;
        };
        if catalog.lookup(&cps).is_some() {
            report.emojis_supported += 1;
            if catalog.classify(&cps).is_skin_toned() {
                report.skin_toned_supported += 1;
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Embedding, EmbeddingRecord};

    const DATA: &str = "\
# subgroup: hand-fingers-closed
270A ; fully-qualified # ✊ E0.6 raised fist
270A 1F3FB ; fully-qualified # ✊🏻 E1.0 raised fist: light skin tone
1F600 ; fully-qualified # 😀 E1.0 grinning face
";

    fn record(id: &str, kind: RecordKind) -> EmbeddingRecord {
        EmbeddingRecord::single(id, kind, Embedding::new(vec![1.0, 0.0]).unwrap())
    }

    #[test]
    fn empty_set() {
        let catalog = Catalog::parse_str(DATA).unwrap();
        let set = EmbeddingSet::new(2, "x");
        assert_eq!(coverage(&set, &catalog), CoverageReport::default());
    }

    #[test]
    fn counts_and_monotonicity() {
        let catalog = Catalog::parse_str(DATA).unwrap();
        let mut set = EmbeddingSet::new(2, "x");
        let mut last = coverage(&set, &catalog);
        for r in [
            record("calm", RecordKind::Text),
            record("270A", RecordKind::Emoji),
            record("270A-1F3FB", RecordKind::Emoji),
            record("1F600-FE0F", RecordKind::Emoji),
            record("1F9FF", RecordKind::Emoji),
        ] {
            set.insert(r).unwrap();
            let now = coverage(&set, &catalog);
            assert!(now.total_tokens >= last.total_tokens);
            assert!(now.emojis_supported >= last.emojis_supported);
            assert!(now.skin_toned_supported >= last.skin_toned_supported);
            assert!(now.skin_toned_supported <= now.emojis_supported);
            assert!(now.emojis_supported <= now.total_tokens);
            last = now;
        }
        assert_eq!(
            last,
            CoverageReport {
                total_tokens: 5,
                emojis_supported: 3,
                skin_toned_supported: 1
            }
        );
    }
}
