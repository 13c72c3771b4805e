//! Precomputed per-instance lexical feature vectors.
//!
//! One instance per line: `ID<TAB>v1 v2 ... vf`. Every line carries the
//! same number of values.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LexFeatures {
    dim: usize,
    by_id: HashMap<u64, Vec<f64>>,
}

impl LexFeatures {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = LexFeatures::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |m: String| Error::Format(format!("lexical features line {}: {m}", i + 1));
            let (id, values) = line.split_once('\t').ok_or_else(|| err("expected `ID<TAB>values`".into()))?;
            let id: u64 = id.trim().parse().map_err(|_| err(format!("bad id {id:?}")))?;
            let values = values
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| err(format!("bad number {v:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(err("feature values must be finite and non-empty".into()));
            }
            if out.by_id.is_empty() {
                out.dim = values.len();
            } else if values.len() != out.dim {
                return Err(Error::Dimension(format!(
                    "lexical features line {}: {} values, expected {}",
                    i + 1,
                    values.len(),
                    out.dim
                )));
            }
            if out.by_id.insert(id, values).is_some() {
                return Err(err(format!("duplicate id {id}")));
            }
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn get(&self, id: u64) -> Result<&[f64]> {
        self.by_id
            .get(&id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Format(format!("no lexical features for instance {id}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_checks_dims() {
        let f = LexFeatures::parse("1\t0 1 0.5\n2\t1 1 1\n").unwrap();
        assert_eq!((f.dim(), f.len()), (3, 2));
        assert_eq!(f.get(1).unwrap(), [0.0, 1.0, 0.5]);
        assert!(f.get(3).is_err());
        assert!(LexFeatures::parse("1\t0 1\n2\t1\n").is_err());
        assert!(LexFeatures::parse("1\t0\n1\t1\n").is_err());
    }
}
