//! Data-backed predicates: total truth tables over domain element
//! indices, constant with respect to every parameter.

use super::ModelError;

/// Dense truth table indexed by one element index per predicate argument.
#[derive(Debug, Clone, PartialEq)]
pub struct GivenTable {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl GivenTable {
    /// Crisp table: every entry must be exactly 0 or 1.
    pub fn crisp(dims: Vec<usize>, values: Vec<f64>) -> Result<Self, ModelError> {
        for &v in &values {
            if v != 0.0 && v != 1.0 {
                return Err(ModelError::NotCrisp { value: v });
            }
        }
        Self::fuzzy(dims, values)
    }

    /// Fixed fuzzy table: entries anywhere in `[0,1]`.
    pub fn fuzzy(dims: Vec<usize>, values: Vec<f64>) -> Result<Self, ModelError> {
        let volume: usize = dims.iter().product();
        assert_eq!(volume, values.len(), "table must be total on its domain");
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::OutOfRange { value: v });
            }
        }
        Ok(Self { dims, values })
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn eval(&self, index: &[usize]) -> Result<f64, ModelError> {
        if index.len() != self.dims.len() {
            return Err(ModelError::UnknownElement {
                index: index.to_vec(),
            });
        }
        let mut flat = 0;
        for (i, (&idx, &dim)) in index.iter().zip(&self.dims).enumerate() {
            if idx >= dim {
                return Err(ModelError::UnknownElement {
                    index: index.to_vec(),
                });
            }
            flat = flat * dim + idx;
            let _ = i;
        }
        Ok(self.values[flat])
    }

    /// The pointwise complement `1 − v`, for mutually exclusive givens.
    pub fn complement(&self) -> GivenTable {
        GivenTable {
            dims: self.dims.clone(),
            values: self.values.iter().map(|v| 1.0 - v).collect(),
        }
    }

    /// Unary table from a membership closure.
    pub fn unary_from(n: usize, f: impl Fn(usize) -> bool) -> GivenTable {
        GivenTable {
            dims: vec![n],
            values: (0..n).map(|i| if f(i) { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Symmetric binary table from a pair list.
    pub fn binary_from_pairs(n: usize, pairs: &[(usize, usize)], symmetric: bool) -> GivenTable {
        let mut values = vec![0.0; n * n];
        for &(a, b) in pairs {
            values[a * n + b] = 1.0;
            if symmetric {
                values[b * n + a] = 1.0;
            }
        }
        GivenTable {
            dims: vec![n, n],
            values,
        }
    }
}
