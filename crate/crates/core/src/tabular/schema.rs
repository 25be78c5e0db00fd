use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;

use super::TabularError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Ordinal,
    Continuous,
}

/// One column of the schema.
///
/// Ordinal features take the integer levels `0..=max_level`; continuous
/// features take any real in `[min, max]`. The range is also what random
/// initialisation in the counterfactual search draws from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default = "default_true")]
    pub default_mutable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

fn default_true() -> bool {
    true
}

impl FeatureSpec {
    pub fn ordinal(name: impl Into<String>, max_level: u32) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Ordinal,
            max_level: Some(max_level),
            min: None,
            max: None,
            default_mutable: true,
            description: None,
        }
    }

    pub fn continuous(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Continuous,
            max_level: None,
            min: Some(min),
            max: Some(max),
            default_mutable: true,
            description: None,
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    pub fn is_ordinal(&self) -> bool {
        self.kind == FeatureKind::Ordinal
    }

    /// Number of one-hot slots (ordinal) or 1 (continuous).
    pub fn encoded_width(&self) -> usize {
        match self.kind {
            FeatureKind::Ordinal => self.max_level.unwrap_or(0) as usize + 1,
            FeatureKind::Continuous => 1,
        }
    }

    pub fn lower(&self) -> f64 {
        match self.kind {
            FeatureKind::Ordinal => 0.0,
            FeatureKind::Continuous => self.min.unwrap_or(f64::NEG_INFINITY),
        }
    }

    pub fn upper(&self) -> f64 {
        match self.kind {
            FeatureKind::Ordinal => f64::from(self.max_level.unwrap_or(0)),
            FeatureKind::Continuous => self.max.unwrap_or(f64::INFINITY),
        }
    }

    /// Clamps into range and, for ordinal features, rounds to the nearest level.
    pub fn snap(&self, value: f64) -> f64 {
        let v = value.clamp(self.lower(), self.upper());
        match self.kind {
            FeatureKind::Ordinal => v.round(),
            FeatureKind::Continuous => v,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        value.is_finite() && value >= self.lower() && value <= self.upper()
    }

    fn validate(&self) -> Result<(), TabularError> {
        if self.name.trim().is_empty() {
            return Err(TabularError::InvalidSchema("feature name is empty".into()));
        }
        match self.kind {
            FeatureKind::Ordinal => match self.max_level {
                Some(m) if m >= 1 => Ok(()),
                _ => Err(TabularError::InvalidSchema(format!(
                    "ordinal feature `{}` needs max_level >= 1",
                    self.name
                ))),
            },
            FeatureKind::Continuous => match (self.min, self.max) {
                (Some(lo), Some(hi)) if lo.is_finite() && hi.is_finite() && lo < hi => Ok(()),
                _ => Err(TabularError::InvalidSchema(format!(
                    "continuous feature `{}` needs finite min < max",
                    self.name
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureSpec>,
    pub label_name: String,
    pub positive_label_meaning: String,
}

/// 17-item depression rating scale. Items listed here score 0-4, the rest 0-2.
const WIDE_ITEMS: [usize; 9] = [1, 2, 3, 7, 8, 9, 10, 11, 15];

const HAMD_ITEMS: [&str; 17] = [
    "Depressed mood",
    "Feelings of guilt",
    "Suicidal thoughts or actions",
    "Insomnia-early (sleep onset delay)",
    "Insomnia-middle (mid-sleep wakening)",
    "Insomnia-late (early morning wakening)",
    "Work and activities (assessing pleasure and functioning)",
    "Psychomotor retardation (slow movement/speech)",
    "Psychomotor agitation (restless, fidgeting, etc.)",
    "Psychic anxiety (worry, apprehension, etc.)",
    "Somatic anxiety (heart racing, sweating, etc.)",
    "Loss of appetite",
    "Tiredness/pain",
    "Loss of sexual interest",
    "Hypochondriasis",
    "Weight loss",
    "Lack of insight",
];

impl FeatureSchema {
    pub fn new(
        features: Vec<FeatureSpec>,
        label_name: impl Into<String>,
        positive_label_meaning: impl Into<String>,
    ) -> Result<Self, TabularError> {
        let schema = Self {
            features,
            label_name: label_name.into(),
            positive_label_meaning: positive_label_meaning.into(),
        };
        schema.validate()?;
        Ok(schema)
    }

    /// The default HAM-D-17 schema with columns `ham01`..`ham17` and label `label`.
    pub fn hamd17() -> Self {
        let features = HAMD_ITEMS
            .iter()
            .enumerate()
            .map(|(i, desc)| {
                let item = i + 1;
                let max_level = if WIDE_ITEMS.contains(&item) { 4 } else { 2 };
                FeatureSpec::ordinal(format!("ham{item:02}"), max_level).with_description(*desc)
            })
            .collect();
        Self {
            features,
            label_name: "label".into(),
            positive_label_meaning: "SNRI".into(),
        }
    }

    pub fn validate(&self) -> Result<(), TabularError> {
        if self.features.is_empty() {
            return Err(TabularError::InvalidSchema("schema has no features".into()));
        }
        if self.label_name.trim().is_empty() {
            return Err(TabularError::InvalidSchema("label name is empty".into()));
        }
        let mut seen = HashSet::new();
        for f in &self.features {
            f.validate()?;
            if !seen.insert(f.name.as_str()) {
                return Err(TabularError::InvalidSchema(format!(
                    "duplicate feature name `{}`",
                    f.name
                )));
            }
        }
        if seen.contains(self.label_name.as_str()) {
            return Err(TabularError::InvalidSchema(format!(
                "label `{}` collides with a feature name",
                self.label_name
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn require_index(&self, name: &str) -> Result<usize, TabularError> {
        self.index_of(name)
            .ok_or_else(|| TabularError::UnknownFeature(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    /// Sum of per-feature one-hot widths.
    pub fn encoded_width(&self) -> usize {
        self.features.iter().map(FeatureSpec::encoded_width).sum()
    }

    /// SHA-256 over the canonical JSON form, hex encoded.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schema serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn from_json(text: &str) -> Result<Self, TabularError> {
        let schema: Self = serde_json::from_str(text)
            .map_err(|e| TabularError::InvalidSchema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }
}
