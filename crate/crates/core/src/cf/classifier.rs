use crate::models::TrainedModel;
use crate::tabular::{Encoder, FeatureSchema};

/// Anything that maps raw feature values to a class-1 probability.
pub trait Classifier: Sync {
    fn probability(&self, values: &[f64]) -> f64;
}

impl<F> Classifier for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn probability(&self, values: &[f64]) -> f64 {
        self(values)
    }
}

/// A trained model together with the encoder for its schema.
#[derive(Debug, Clone)]
pub struct SchemaModel<'a> {
    model: &'a TrainedModel,
    encoder: Encoder,
}

impl<'a> SchemaModel<'a> {
    /// Returns `None` when the schema's encoded width does not match the model.
    pub fn new(model: &'a TrainedModel, schema: &FeatureSchema) -> Option<Self> {
        let encoder = Encoder::new(schema);
        (encoder.width() == model.input_width()).then_some(Self { model, encoder })
    }

    pub fn model(&self) -> &TrainedModel {
        self.model
    }
}

impl Classifier for SchemaModel<'_> {
    fn probability(&self, values: &[f64]) -> f64 {
        self.model.predict_bits(&self.encoder.encode_values(values))
    }
}
