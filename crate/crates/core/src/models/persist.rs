use serde::{Deserialize, Serialize};

use super::{ModelError, TrainedModel};
use crate::tabular::FeatureSchema;

/// On-disk model: `{model_kind, parameters, schema_fingerprint, feature_mads}`.
///
/// `feature_mads` are the training-data MADs used to normalize continuous
/// distances when the model is later explained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    #[serde(flatten)]
    pub model: TrainedModel,
    pub schema_fingerprint: String,
    pub feature_mads: Vec<f64>,
}

impl ModelDocument {
    pub fn new(model: TrainedModel, schema: &FeatureSchema, feature_mads: Vec<f64>) -> Self {
        Self {
            model,
            schema_fingerprint: schema.fingerprint(),
            feature_mads,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Document(e.to_string()))
    }

    /// Fails unless the model was trained under `schema`.
    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<(), ModelError> {
        let found = schema.fingerprint();
        if found != self.schema_fingerprint {
            return Err(ModelError::SchemaMismatch {
                expected: self.schema_fingerprint.clone(),
                found,
            });
        }
        if self.feature_mads.len() != schema.len() {
            return Err(ModelError::Document(format!(
                "{} feature MADs for {} features",
                self.feature_mads.len(),
                schema.len()
            )));
        }
        if self.model.input_width() != schema.encoded_width() {
            return Err(ModelError::WidthMismatch {
                expected: schema.encoded_width(),
                actual: self.model.input_width(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LogisticModel, TreeNode};
    use crate::tabular::FeatureSpec;

    #[test]
    fn document_round_trip_and_keys() {
        let schema = FeatureSchema::hamd17();
        let model = TrainedModel::Logistic(LogisticModel {
            weights: vec![0.25; schema.encoded_width()],
            bias: -1.0,
        });
        let doc = ModelDocument::new(model, &schema, vec![1.0; 17]);
        let text = doc.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["model_kind"], "logistic");
        assert_eq!(v["parameters"]["bias"], -1.0);
        assert_eq!(v["schema_fingerprint"], schema.fingerprint());
        let back = ModelDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        back.check_schema(&schema).unwrap();
    }

    #[test]
    fn schema_mismatch_is_detected() {
        let schema = FeatureSchema::hamd17();
        let other = FeatureSchema::new(vec![FeatureSpec::ordinal("a", 2)], "label", "SNRI").unwrap();
        let model = TrainedModel::Forest(crate::models::ForestModel {
            trees: vec![TreeNode::leaf(0.5)],
            n_trees: 1,
            max_depth: 0,
            seed: 0,
            n_features: 3,
            single_class: false,
        });
        let doc = ModelDocument::new(model, &other, vec![1.0]);
        assert!(matches!(
            doc.check_schema(&schema),
            Err(ModelError::SchemaMismatch { .. })
        ));
        doc.check_schema(&other).unwrap();
    }
}
