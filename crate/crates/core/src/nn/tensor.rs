use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{Error, Result};

/// Dense row-major array of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != values.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} holds {n} values, got {}",
                values.len()
            )));
        }
        Ok(Tensor { shape, values })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            values: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
    range: Range<usize>,
}

impl ParamEntry {
    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn range(&self) -> Range<usize> {
        self.range.clone()
    }

    /// Bias tensors are named `<layer>.b`.
    pub fn is_bias(&self) -> bool {
        self.name.ends_with(".b")
    }
}

/// Named parameter tensors stored contiguously in name-sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    entries: Vec<ParamEntry>,
    values: Vec<f64>,
}

impl ParamSet {
    pub fn from_tensors(tensors: impl IntoIterator<Item = (String, Tensor)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (name, t) in tensors {
            if map.insert(name.clone(), t).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate parameter {name}")));
            }
        }
        let mut entries = Vec::with_capacity(map.len());
        let mut values = Vec::new();
        for (name, t) in map {
            let start = values.len();
            values.extend_from_slice(t.values());
            entries.push(ParamEntry {
                name,
                shape: t.shape().to_vec(),
                range: start..values.len(),
            });
        }
        Ok(ParamSet { entries, values })
    }

    pub fn zeros_like(&self) -> Self {
        ParamSet {
            entries: self.entries.clone(),
            values: vec![0.0; self.values.len()],
        }
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn same_layout(&self, other: &ParamSet) -> bool {
        self.entries == other.entries
    }

    pub fn entry(&self, name: &str) -> Option<&ParamEntry> {
        self.entries
            .binary_search_by(|e| e.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.entry(name).map(|e| &self.values[e.range()])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let range = self.entry(name)?.range();
        Some(&mut self.values[range])
    }

    pub(crate) fn req(&self, name: &str) -> &[f64] {
        self.get(name)
            .unwrap_or_else(|| panic!("parameter {name} missing from a validated set"))
    }

    /// Disjoint mutable views of several named tensors.
    pub(crate) fn slices_mut<const N: usize>(&mut self, names: [&str; N]) -> [&mut [f64]; N] {
        let ranges = names.map(|n| {
            self.entry(n)
                .unwrap_or_else(|| panic!("parameter {n} missing from a validated set"))
                .range()
        });
        self.values
            .get_disjoint_mut(ranges)
            .expect("parameter ranges are disjoint")
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParamEntry, &[f64])> {
        self.entries.iter().map(|e| (e, &self.values[e.range()]))
    }

    pub fn to_tensors(&self) -> BTreeMap<String, Tensor> {
        self.iter()
            .map(|(e, v)| (e.name.clone(), Tensor { shape: e.shape.clone(), values: v.to_vec() }))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_contiguous_layout() {
        let p = ParamSet::from_tensors([
            ("z.w".to_string(), Tensor::new(vec![2], vec![1.0, 2.0]).unwrap()),
            ("a.b".to_string(), Tensor::new(vec![1], vec![3.0]).unwrap()),
        ])
        .unwrap();
        assert_eq!(p.values(), &[3.0, 1.0, 2.0]);
        assert_eq!(p.get("z.w").unwrap(), &[1.0, 2.0]);
        assert!(p.entry("a.b").unwrap().is_bias());
        assert!(p.get("nope").is_none());
        let mut g = p.zeros_like();
        let [a, z] = g.slices_mut(["a.b", "z.w"]);
        a[0] = 1.0;
        z[1] = 2.0;
        assert_eq!(g.values(), &[1.0, 0.0, 2.0]);
    }

    #[test]
    fn rejects_bad_shapes_and_duplicates() {
        assert!(Tensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        let t = Tensor::zeros(vec![1]);
        assert!(ParamSet::from_tensors([("a".into(), t.clone()), ("a".into(), t)]).is_err());
    }
}
