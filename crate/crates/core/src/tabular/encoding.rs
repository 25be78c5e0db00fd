use serde::{Deserialize, Serialize};

use super::{FeatureKind, FeatureSchema, Instance, TabularError};

/// Position of one raw feature inside an encoded vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSlot {
    pub offset: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedInstance {
    pub bits: Vec<f64>,
    pub mapping: Vec<FeatureSlot>,
}

/// Precomputed one-hot layout for a schema.
///
/// Ordinal level `v` of a feature with `L` levels sets slot `v` of an
/// `L`-wide slice; continuous values occupy one slot and pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    kinds: Vec<FeatureKind>,
    slots: Vec<FeatureSlot>,
    names: Vec<String>,
    width: usize,
}

impl Encoder {
    pub fn new(schema: &FeatureSchema) -> Self {
        let mut offset = 0;
        let mut slots = Vec::with_capacity(schema.len());
        for f in &schema.features {
            let width = f.encoded_width();
            slots.push(FeatureSlot { offset, width });
            offset += width;
        }
        Self {
            kinds: schema.features.iter().map(|f| f.kind).collect(),
            names: schema.features.iter().map(|f| f.name.clone()).collect(),
            slots,
            width: offset,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn slots(&self) -> &[FeatureSlot] {
        &self.slots
    }

    /// Writes the encoding of `values` into `out`, which is resized to the
    /// encoded width. Values are assumed valid under the schema.
    pub fn encode_into(&self, values: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.width, 0.0);
        for ((kind, slot), &v) in self.kinds.iter().zip(&self.slots).zip(values) {
            match kind {
                FeatureKind::Ordinal => {
                    let level = (v.round().max(0.0) as usize).min(slot.width - 1);
                    out[slot.offset + level] = 1.0;
                }
                FeatureKind::Continuous => out[slot.offset] = v,
            }
        }
    }

    pub fn encode_values(&self, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width);
        self.encode_into(values, &mut out);
        out
    }

    pub fn encode(&self, instance: &Instance) -> EncodedInstance {
        EncodedInstance {
            bits: self.encode_values(&instance.0),
            mapping: self.slots.clone(),
        }
    }

    pub fn decode(&self, bits: &[f64]) -> Result<Instance, TabularError> {
        if bits.len() != self.width {
            return Err(TabularError::WidthMismatch {
                expected: self.width,
                actual: bits.len(),
            });
        }
        let mut values = Vec::with_capacity(self.slots.len());
        for ((kind, slot), name) in self.kinds.iter().zip(&self.slots).zip(&self.names) {
            let slice = &bits[slot.offset..slot.offset + slot.width];
            match kind {
                FeatureKind::Ordinal => {
                    let well_formed = slice.iter().all(|&b| b == 0.0 || b == 1.0);
                    let mut active = slice.iter().enumerate().filter(|(_, &b)| b == 1.0);
                    match (well_formed, active.next(), active.next()) {
                        (true, Some((level, _)), None) => values.push(level as f64),
                        _ => return Err(TabularError::NotOneHot(name.clone())),
                    }
                }
                FeatureKind::Continuous => values.push(slice[0]),
            }
        }
        Ok(Instance(values))
    }
}

pub fn one_hot_encode(instance: &Instance, schema: &FeatureSchema) -> EncodedInstance {
    Encoder::new(schema).encode(instance)
}

pub fn decode_one_hot(
    enc: &EncodedInstance,
    schema: &FeatureSchema,
) -> Result<Instance, TabularError> {
    Encoder::new(schema).decode(&enc.bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::FeatureSpec;
    use proptest::prelude::*;

    fn one_feature(levels: u32) -> FeatureSchema {
        FeatureSchema::new(vec![FeatureSpec::ordinal("a", levels - 1)], "label", "SNRI").unwrap()
    }

    #[test]
    fn three_level_examples() {
        let s = one_feature(3);
        assert_eq!(one_hot_encode(&Instance(vec![2.0]), &s).bits, vec![0.0, 0.0, 1.0]);
        assert_eq!(one_hot_encode(&Instance(vec![0.0]), &s).bits, vec![1.0, 0.0, 0.0]);

        let enc = EncodedInstance {
            bits: vec![0.0, 0.0, 1.0],
            mapping: vec![FeatureSlot {
                offset: 0,
                width: 3,
            }],
        };
        assert_eq!(decode_one_hot(&enc, &s).unwrap(), Instance(vec![2.0]));
    }

    #[test]
    fn not_one_hot_slices_are_rejected() {
        let s = one_feature(3);
        let enc = Encoder::new(&s);
        for bad in [[0.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.5, 0.5, 0.0]] {
            assert_eq!(enc.decode(&bad), Err(TabularError::NotOneHot("a".into())));
        }
    }

    #[test]
    fn five_level_round_trip() {
        let s = one_feature(5);
        for v in 0..5 {
            let x = Instance(vec![f64::from(v)]);
            assert_eq!(decode_one_hot(&one_hot_encode(&x, &s), &s).unwrap(), x);
        }
    }

    #[test]
    fn hamd_width_is_sum_of_levels() {
        let s = FeatureSchema::hamd17();
        let levels: usize = s.features.iter().map(|f| f.max_level.unwrap() as usize + 1).sum();
        let x = Instance(vec![0.0; 17]);
        let enc = one_hot_encode(&x, &s);
        assert_eq!(enc.bits.len(), levels);
        assert_eq!(enc.bits.iter().sum::<f64>(), 17.0);
    }

    #[test]
    fn continuous_passes_through() {
        let s = FeatureSchema::new(
            vec![
                FeatureSpec::ordinal("a", 2),
                FeatureSpec::continuous("x", -1.0, 1.0),
            ],
            "label",
            "SNRI",
        )
        .unwrap();
        let x = Instance(vec![1.0, -0.25]);
        let enc = one_hot_encode(&x, &s);
        assert_eq!(enc.bits, vec![0.0, 1.0, 0.0, -0.25]);
        assert_eq!(decode_one_hot(&enc, &s).unwrap(), x);
    }

    /// Exhaustive over every instance of a small mixed-width schema.
    #[test]
    fn exhaustive_round_trip_small_schema() {
        let s = FeatureSchema::new(
            vec![
                FeatureSpec::ordinal("a", 1),
                FeatureSpec::ordinal("b", 2),
                FeatureSpec::ordinal("c", 4),
            ],
            "label",
            "SNRI",
        )
        .unwrap();
        let enc = Encoder::new(&s);
        let mut count = 0;
        for a in 0..=1 {
            for b in 0..=2 {
                for c in 0..=4 {
                    let x = Instance(vec![f64::from(a), f64::from(b), f64::from(c)]);
                    let bits = enc.encode_values(&x.0);
                    assert_eq!(enc.decode(&bits).unwrap(), x);
                    count += 1;
                }
            }
        }
        assert_eq!(count, 30);
    }

    proptest! {
        #[test]
        fn hamd_round_trip(levels in prop::collection::vec(0u32..5, 17)) {
            let s = FeatureSchema::hamd17();
            let values: Vec<f64> = levels
                .iter()
                .zip(&s.features)
                .map(|(&l, f)| f64::from(l.min(f.max_level.unwrap())))
                .collect();
            let x = Instance(values);
            let enc = one_hot_encode(&x, &s);
            for (slot, f) in enc.mapping.iter().zip(&s.features) {
                let slice = &enc.bits[slot.offset..slot.offset + slot.width];
                prop_assert_eq!(slice.iter().filter(|&&b| b == 1.0).count(), 1);
                prop_assert_eq!(slot.width, f.max_level.unwrap() as usize + 1);
            }
            prop_assert_eq!(decode_one_hot(&enc, &s).unwrap(), x);
        }
    }
}
