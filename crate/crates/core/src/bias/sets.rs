use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BiasError;

const CALISKAN: &str = include_str!("../../data/caliskan.toml");
const EMOJI_SENTIMENT: &str = include_str!("../../data/emoji_sentiment.toml");

/// Two attribute sets; `a` holds the culturally favoured pole.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributePair {
    pub name: String,
    pub a_label: String,
    pub a: Vec<String>,
    pub b_label: String,
    pub b: Vec<String>,
}

/// Labelled seeds for the sentiment classifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentSeeds {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    #[serde(default)]
    pub pairs: Vec<AttributePair>,
    #[serde(default)]
    pub sentiment: Option<SentimentSeeds>,
}

impl SetConfig {
    pub fn parse(text: &str) -> Result<SetConfig, BiasError> {
        let config: SetConfig = toml::from_str(text).map_err(|e| BiasError::Config(e.to_string()))?;
        for pair in &config.pairs {
            if pair.a.is_empty() || pair.b.is_empty() {
                return Err(BiasError::Config(format!("pair `{}` has an empty side", pair.name)));
            }
        }
        let mut names: Vec<&str> = config.pairs.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(BiasError::Config(format!("duplicate pair name `{}`", w[0])));
        }
        if let Some(s) = &config.sentiment {
            if s.positive.is_empty() || s.negative.is_empty() {
                return Err(BiasError::Config("sentiment seeds need both labels".into()));
            }
        }
        Ok(config)
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<SetConfig, BiasError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| BiasError::Io(format!("{}: {e}", path.display())))?;
        SetConfig::parse(&text)
    }
}

/// The fifteen word-level benchmark pairs.
pub fn bundled_caliskan() -> SetConfig {
    SetConfig::parse(CALISKAN).expect("bundled benchmark sets parse")
}

/// Good/Bad emoji attributes, also used as classifier seeds.
pub fn bundled_emoji_sentiment() -> SetConfig {
    SetConfig::parse(EMOJI_SENTIMENT).expect("bundled emoji sets parse")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sets() {
        let c = bundled_caliskan();
        assert_eq!(c.pairs.len(), 15);
        let first = &c.pairs[0];
        assert_eq!((first.a_label.as_str(), first.b_label.as_str()), ("flowers", "insects"));
        assert_eq!(&first.a[..2], ["aster", "clover"]);
        assert_eq!(&first.b[..2], ["ant", "caterpillar"]);
        let e = bundled_emoji_sentiment();
        assert_eq!(e.pairs.len(), 1);
        assert_eq!(e.pairs[0].a.len(), 5);
        assert_eq!(e.pairs[0].b.len(), 5);
        let seeds = e.sentiment.unwrap();
        assert_eq!(seeds.positive, e.pairs[0].a);
        assert_eq!(seeds.negative, e.pairs[0].b);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SetConfig::parse("[[pairs]]\nname='x'\na_label='a'\na=[]\nb_label='b'\nb=['y']\n").is_err());
        assert!(SetConfig::parse("unknown = 1\n").is_err());
        let dup = "[[pairs]]\nname='x'\na_label='a'\na=['p']\nb_label='b'\nb=['q']\n".repeat(2);
        assert!(SetConfig::parse(&dup).is_err());
    }
}
