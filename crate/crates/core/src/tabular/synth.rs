//! Synthetic ordinal-scale data with a planted labeling rule.
//!
//! Features are drawn independently and uniformly over their ranges. The
//! clean label is `1` iff `sum(weight * value) >= threshold` over the decisive
//! features; each label is then flipped with probability `noise_rate`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind, FeatureSchema, Instance, TabularError};
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTerm {
    pub feature: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub rows: usize,
    pub noise_rate: f64,
    pub decisive: Vec<RuleTerm>,
    pub threshold: f64,
    /// Defaults to the HAM-D-17 schema when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<FeatureSchema>,
}

impl SynthConfig {
    /// 2000 rows, 10% label noise, rule `ham01 + ham09 + ham13 >= 5`.
    pub fn standard() -> Self {
        Self {
            rows: 2000,
            noise_rate: 0.1,
            decisive: ["ham01", "ham09", "ham13"]
                .iter()
                .map(|f| RuleTerm {
                    feature: (*f).into(),
                    weight: 1.0,
                })
                .collect(),
            threshold: 5.0,
            schema: None,
        }
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema.clone().unwrap_or_else(FeatureSchema::hamd17)
    }

    pub fn decisive_features(&self) -> Vec<&str> {
        self.decisive.iter().map(|t| t.feature.as_str()).collect()
    }

    fn resolved_terms(&self, schema: &FeatureSchema) -> Result<Vec<(usize, f64)>, TabularError> {
        if self.decisive.is_empty() {
            return Err(TabularError::BadConfig(
                "at least one decisive feature is required".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.noise_rate) {
            return Err(TabularError::BadConfig(format!(
                "noise_rate {} outside [0, 0.5)",
                self.noise_rate
            )));
        }
        if !self.threshold.is_finite() {
            return Err(TabularError::BadConfig("threshold must be finite".into()));
        }
        self.decisive
            .iter()
            .map(|t| {
                let idx = schema.index_of(&t.feature).ok_or_else(|| {
                    TabularError::BadConfig(format!("unknown decisive feature `{}`", t.feature))
                })?;
                if !t.weight.is_finite() {
                    return Err(TabularError::BadConfig(format!(
                        "weight of `{}` must be finite",
                        t.feature
                    )));
                }
                Ok((idx, t.weight))
            })
            .collect()
    }

    /// Noise-free label of `instance` under the planted rule.
    pub fn planted_label(&self, instance: &Instance) -> Result<u8, TabularError> {
        let terms = self.resolved_terms(&self.schema())?;
        Ok(rule_label(&terms, instance, self.threshold))
    }
}

fn rule_label(terms: &[(usize, f64)], instance: &Instance, threshold: f64) -> u8 {
    let score: f64 = terms.iter().map(|&(i, w)| w * instance[i]).sum();
    u8::from(score >= threshold)
}

pub fn synth_generate(config: &SynthConfig, seed: u64) -> Result<Dataset, TabularError> {
    let schema = config.schema();
    schema.validate().map_err(|e| TabularError::BadConfig(e.to_string()))?;
    let terms = config.resolved_terms(&schema)?;

    let mut rng = seeded(seed);
    let mut rows = Vec::with_capacity(config.rows);
    let mut labels = Vec::with_capacity(config.rows);
    for _ in 0..config.rows {
        let values: Vec<f64> = schema
            .features
            .iter()
            .map(|f| match f.kind {
                FeatureKind::Ordinal => f64::from(rng.random_range(0..=f.max_level.unwrap_or(1))),
                FeatureKind::Continuous => rng.random_range(f.lower()..=f.upper()),
            })
            .collect();
        let instance = Instance(values);
        let mut label = rule_label(&terms, &instance, config.threshold);
        if rng.random_bool(config.noise_rate) {
            label = 1 - label;
        }
        rows.push(instance);
        labels.push(label);
    }
    Ok(Dataset {
        schema,
        rows,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_rule(noise: f64, rows: usize) -> SynthConfig {
        SynthConfig {
            rows,
            noise_rate: noise,
            decisive: vec![RuleTerm {
                feature: "ham01".into(),
                weight: 1.0,
            }],
            threshold: 2.0,
            schema: None,
        }
    }

    #[test]
    fn noiseless_rule_is_reproduced() {
        let cfg = single_rule(0.0, 100);
        let ds = synth_generate(&cfg, 5).unwrap();
        assert_eq!(ds.len(), 100);
        for (row, &label) in ds.rows.iter().zip(&ds.labels) {
            assert_eq!(label, u8::from(row[0] >= 2.0));
            row.validate(&ds.schema, 0).unwrap();
        }
    }

    #[test]
    fn same_seed_same_data() {
        let cfg = SynthConfig::standard();
        assert_eq!(synth_generate(&cfg, 11).unwrap(), synth_generate(&cfg, 11).unwrap());
        assert_ne!(synth_generate(&cfg, 11).unwrap(), synth_generate(&cfg, 12).unwrap());
    }

    #[test]
    fn noise_rate_matches_binomial_expectation() {
        // Binomial(10000, 0.1): sd = 0.003, so +-0.02 is > 6 sd.
        let cfg = single_rule(0.1, 10_000);
        let ds = synth_generate(&cfg, 21).unwrap();
        let disagree = ds
            .rows
            .iter()
            .zip(&ds.labels)
            .filter(|(r, &l)| cfg.planted_label(r).unwrap() != l)
            .count();
        let rate = disagree as f64 / 10_000.0;
        assert!((rate - 0.10).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn bad_configs() {
        let mut cfg = single_rule(0.5, 10);
        assert!(matches!(synth_generate(&cfg, 0), Err(TabularError::BadConfig(_))));
        cfg.noise_rate = 0.0;
        cfg.decisive.clear();
        assert!(matches!(synth_generate(&cfg, 0), Err(TabularError::BadConfig(_))));
        cfg.decisive.push(RuleTerm {
            feature: "ham99".into(),
            weight: 1.0,
        });
        assert!(matches!(synth_generate(&cfg, 0), Err(TabularError::BadConfig(_))));
    }

    #[test]
    fn config_json_field_names() {
        let v = serde_json::to_value(SynthConfig::standard()).unwrap();
        assert_eq!(v["rows"], 2000);
        assert_eq!(v["decisive"][1]["feature"], "ham09");
        let back: SynthConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, SynthConfig::standard());
    }
}
