//! Schema-aware tabular data: ingestion, encoding, robust statistics, class
//! balancing, splits and synthetic data generation.

mod dataset;
mod encoding;
mod error;
mod schema;
mod smote;
mod split;
mod stats;
mod synth;

pub use dataset::{load_csv, read_csv, write_csv, Dataset, Instance};
pub use encoding::{decode_one_hot, one_hot_encode, EncodedInstance, Encoder, FeatureSlot};
pub use error::TabularError;
pub use schema::{FeatureKind, FeatureSchema, FeatureSpec};
pub use smote::{smote_oversample, DEFAULT_SMOTE_NEIGHBORS};
pub use split::{kfold_indices, kfold_split, Fold};
pub use stats::{feature_mads, mad, mad_of, median, MAD_FALLBACK};
pub use synth::{synth_generate, RuleTerm, SynthConfig};
