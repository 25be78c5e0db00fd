//! Reading and writing the artifacts shared by the CLI and the service.

use std::fs;
use std::path::Path;

use cfexplain::models::ModelDocument;
use cfexplain::tabular::{load_csv, Dataset, FeatureSchema, Instance};
use serde::Deserialize;

use crate::CliError;

pub fn read_text(path: &Path, what: &'static str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new(what, format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str, what: &'static str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::new(what, format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::new(what, format!("{}: {e}", path.display())))
}

/// The HAM-D-17 schema unless a schema file is given.
pub fn load_schema(path: Option<&Path>) -> Result<FeatureSchema, CliError> {
    match path {
        None => Ok(FeatureSchema::hamd17()),
        Some(p) => FeatureSchema::from_json(&read_text(p, "load schema")?)
            .map_err(|e| CliError::new("load schema", e)),
    }
}

pub fn load_dataset(path: &Path, schema: &FeatureSchema) -> Result<Dataset, CliError> {
    load_csv(path, schema).map_err(|e| CliError::new("load data", format!("{}: {e}", path.display())))
}

/// Loads a model document and checks it against `schema`.
pub fn load_model(path: &Path, schema: &FeatureSchema) -> Result<ModelDocument, CliError> {
    let doc = ModelDocument::from_json(&read_text(path, "load model")?)
        .map_err(|e| CliError::new("load model", e))?;
    doc.check_schema(schema).map_err(|e| CliError::new("load model", e))?;
    Ok(doc)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InstanceFile {
    Wrapped { values: Vec<f64> },
    Bare(Vec<f64>),
}

/// Reads `{"values": [...]}` or a bare JSON array and validates it.
pub fn load_instance(path: &Path, schema: &FeatureSchema) -> Result<Instance, CliError> {
    let parsed: InstanceFile = serde_json::from_str(&read_text(path, "load instance")?)
        .map_err(|e| CliError::new("load instance", e))?;
    let values = match parsed {
        InstanceFile::Wrapped { values } | InstanceFile::Bare(values) => values,
    };
    let instance = Instance(values);
    instance
        .validate(schema, 0)
        .map_err(|e| CliError::new("load instance", e))?;
    Ok(instance)
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
