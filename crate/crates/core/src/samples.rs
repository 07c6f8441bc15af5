//! Sample sets and the one-value-per-line text format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Where a sample set came from: generator parameters and seed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub params: Vec<(String, f64)>,
    pub seed: Option<u64>,
}

/// A finite, non-empty set of scalar observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    provenance: Option<Provenance>,
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sample set is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "sample {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(SampleSet {
            values,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance. Zero for a single sample.
    pub fn variance(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    }

    /// Concatenation of several sets, used to size a shared grid.
    pub fn union<'a>(sets: impl IntoIterator<Item = &'a SampleSet>) -> Result<SampleSet> {
        let values: Vec<f64> = sets
            .into_iter()
            .flat_map(|s| s.values.iter().copied())
            .collect();
        SampleSet::new(values)
    }

    /// FNV-1a hash of the raw bit patterns; recorded in manifests to show
    /// which sample sets were consumed.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.values {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }

    /// Parses one value per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &Path) -> Result<SampleSet> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Parse {
                path: origin.to_path_buf(),
                line: lineno + 1,
                msg: format!("not a number: {line:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: origin.to_path_buf(),
                    line: lineno + 1,
                    msg: format!("non-finite value: {line:?}"),
                });
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: 0,
                msg: "no samples".into(),
            });
        }
        Ok(SampleSet::new(values)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<SampleSet> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Renders the text format. `header` lines are written as `#` comments.
    pub fn to_text(&self, header: &[String]) -> String {
        let mut out = String::with_capacity(self.len() * 24);
        for h in header {
            let _ = writeln!(out, "# {h}");
        }
        for v in &self.values {
            let _ = writeln!(out, "{v:e}");
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>, header: &[String]) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text(header)).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(SampleSet::new(vec![]).is_err());
        assert!(SampleSet::new(vec![1.0, f64::NAN]).is_err());
        assert!(SampleSet::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn text_round_trip_keeps_bits() {
        let s = SampleSet::new(vec![0.1, -2.5e-300, 1.0 / 3.0, 7e12]).unwrap();
        let text = s.to_text(&["L=16 T=2.2".to_string()]);
        assert!(text.starts_with("# L=16"));
        let back = SampleSet::parse(&text, Path::new("mem")).unwrap();
        assert_eq!(back.values(), s.values());
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = SampleSet::parse("# c\n1.0\n\nabc\n", Path::new("f.txt")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
        assert!(SampleSet::parse("# only comments\n", Path::new("f")).is_err());
    }

    #[test]
    fn moments() {
        let s = SampleSet::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean(), 2.5);
        assert!((s.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.range(), (1.0, 4.0));
    }
}
