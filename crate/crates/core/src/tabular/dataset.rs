use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use super::{FeatureKind, FeatureSchema, TabularError};

/// One patient's feature vector, in schema order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance(pub Vec<f64>);

impl Instance {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks width, finiteness, ranges and ordinal integrality. `row` is only
    /// used to label errors.
    pub fn validate(&self, schema: &FeatureSchema, row: usize) -> Result<(), TabularError> {
        if self.0.len() != schema.len() {
            return Err(TabularError::WidthMismatch {
                expected: schema.len(),
                actual: self.0.len(),
            });
        }
        for (spec, &v) in schema.features.iter().zip(&self.0) {
            if spec.kind == FeatureKind::Ordinal && v.is_finite() && v.fract() != 0.0 {
                return Err(TabularError::NonIntegerOrdinal {
                    row,
                    feature: spec.name.clone(),
                    value: v,
                });
            }
            if !spec.contains(v) {
                return Err(TabularError::OutOfRangeValue {
                    row,
                    feature: spec.name.clone(),
                    value: v,
                });
            }
        }
        Ok(())
    }
}

impl From<Vec<f64>> for Instance {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl std::ops::Index<usize> for Instance {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Labeled rows under a schema. Labels are 0 (SSRI) or 1 (SNRI).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub rows: Vec<Instance>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(
        schema: FeatureSchema,
        rows: Vec<Instance>,
        labels: Vec<u8>,
    ) -> Result<Self, TabularError> {
        schema.validate()?;
        if rows.len() != labels.len() {
            return Err(TabularError::MalformedRow {
                row: rows.len().min(labels.len()),
                reason: format!("{} rows but {} labels", rows.len(), labels.len()),
            });
        }
        for (i, (row, &label)) in rows.iter().zip(&labels).enumerate() {
            row.validate(&schema, i)?;
            if label > 1 {
                return Err(TabularError::OutOfRangeValue {
                    row: i,
                    feature: schema.label_name.clone(),
                    value: f64::from(label),
                });
            }
        }
        Ok(Self {
            schema,
            rows,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.0[feature]).collect()
    }

    /// `[count of label 0, count of label 1]`
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset, TabularError> {
    let file = std::fs::File::open(path)?;
    read_csv(file, schema)
}

/// Reads a headed CSV. Columns are located by name; every schema feature and
/// the label column must be present.
pub fn read_csv<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Dataset, TabularError> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| TabularError::MalformedRow {
            row: 0,
            reason: format!("unreadable header: {e}"),
        })?
        .clone();

    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TabularError::MissingColumn(name.to_string()))
    };
    let feature_cols = schema
        .features
        .iter()
        .map(|f| find(&f.name))
        .collect::<Result<Vec<_>, _>>()?;
    let label_col = find(&schema.label_name)?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| TabularError::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        let cell = |col: usize, name: &str| -> Result<f64, TabularError> {
            let raw = record.get(col).ok_or_else(|| TabularError::MalformedRow {
                row,
                reason: format!("missing cell for `{name}`"),
            })?;
            raw.parse::<f64>().map_err(|_| TabularError::MalformedRow {
                row,
                reason: format!("`{name}` is not a number: {raw:?}"),
            })
        };
        let values = schema
            .features
            .iter()
            .zip(&feature_cols)
            .map(|(f, &c)| cell(c, &f.name))
            .collect::<Result<Vec<_>, _>>()?;
        let instance = Instance(values);
        instance.validate(schema, row)?;

        let label = cell(label_col, &schema.label_name)?;
        if label != 0.0 && label != 1.0 {
            return Err(TabularError::OutOfRangeValue {
                row,
                feature: schema.label_name.clone(),
                value: label,
            });
        }
        rows.push(instance);
        labels.push(label as u8);
    }
    Ok(Dataset {
        schema: schema.clone(),
        rows,
        labels,
    })
}

pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<(), TabularError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| TabularError::Io(e.to_string());
    let mut header: Vec<&str> = dataset.schema.names().collect();
    header.push(&dataset.schema.label_name);
    wtr.write_record(&header).map_err(io)?;
    for (row, label) in dataset.rows.iter().zip(&dataset.labels) {
        let mut record: Vec<String> = row.0.iter().map(|v| v.to_string()).collect();
        record.push(label.to_string());
        wtr.write_record(&record).map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        let s = FeatureSchema::hamd17();
        let mut h: Vec<&str> = s.names().collect();
        h.push("label");
        h.join(",")
    }

    #[test]
    fn reads_well_formed_file() {
        let text = format!(
            "{}\n{}\n{}\n{}\n",
            header(),
            "1,2,3,0,1,2,4,0,1,2,3,0,1,2,4,0,1,0",
            "0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1",
            "4,4,4,2,2,2,4,4,4,4,4,2,2,2,4,2,2,1",
        );
        let ds = read_csv(text.as_bytes(), &FeatureSchema::hamd17()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.labels, vec![0, 1, 1]);
        assert_eq!(ds.rows[0][2], 3.0);
    }

    #[test]
    fn out_of_range_names_row_and_feature() {
        let text = format!(
            "{}\n{}\n{}\n",
            header(),
            "0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1",
            "0,0,9,0,0,0,0,0,0,0,0,0,0,0,0,0,0,1",
        );
        let err = read_csv(text.as_bytes(), &FeatureSchema::hamd17()).unwrap_err();
        assert_eq!(
            err,
            TabularError::OutOfRangeValue {
                row: 1,
                feature: "ham03".into(),
                value: 9.0
            }
        );
    }

    #[test]
    fn missing_label_column() {
        let s = FeatureSchema::hamd17();
        let h: Vec<&str> = s.names().collect();
        let text = format!("{}\n{}\n", h.join(","), vec!["0"; 17].join(","));
        let err = read_csv(text.as_bytes(), &s).unwrap_err();
        assert_eq!(err, TabularError::MissingColumn("label".into()));
    }

    #[test]
    fn non_integer_and_malformed_cells() {
        let schema = FeatureSchema::new(
            vec![super::super::FeatureSpec::ordinal("a", 3)],
            "label",
            "SNRI",
        )
        .unwrap();
        let err = read_csv("a,label\n1.5,0\n".as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, TabularError::NonIntegerOrdinal { row: 0, .. }));

        let err = read_csv("a,label\nx,0\n".as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, TabularError::MalformedRow { row: 0, .. }));

        let err = read_csv("a,label\n1,0,7\n".as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, TabularError::MalformedRow { .. }));

        let err = read_csv("a,label\n1,2\n".as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, TabularError::OutOfRangeValue { .. }));
    }

    #[test]
    fn write_then_read_preserves_rows() {
        let schema = FeatureSchema::hamd17();
        let rows = vec![Instance(vec![1.0; 17]), Instance(vec![2.0; 17])];
        let ds = Dataset::new(schema.clone(), rows, vec![0, 1]).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("1,1,"));
        let back = read_csv(buf.as_slice(), &schema).unwrap();
        assert_eq!(back, ds);
    }
}
