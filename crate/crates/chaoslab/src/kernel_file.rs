//! JSON kernel/experiment files.
//!
//! ```json
//! {
//!   "dim": 3,
//!   "basis": [
//!     {"channel": 1, "time": 0.1},
//!     {"channel": 2, "time": 0.6},
//!     {"channel": 2, "time": 1.0}
//!   ],
//!   "kernels": [
//!     {"order": 2, "entries": [[1, 2, 0.5], [1, 3, 0.5]]}
//!   ],
//!   "y": {"square": [[1, 1.0]]}
//! }
//! ```
//!
//! Indices are 1-based and tuples must be ascending; they address the
//! canonical (sorted) representative of each symmetric entry. The optional
//! `y` block certifies a mixture variance, either `{"constant": c}` with
//! `c >= 0` or `{"square": [[index, coeff], ...]}` for `X(h)^2`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::filtration::FilteredBasis;
use crate::limitlab::MixtureLaw;
use crate::tensor::SymmetricKernel;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    dim: usize,
    basis: Vec<RawBasisEntry>,
    kernels: Vec<RawKernel>,
    #[serde(default)]
    y: Option<RawY>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasisEntry {
    channel: u32,
    time: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    order: usize,
    entries: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
enum RawY {
    #[serde(rename = "constant")]
    Constant(f64),
    #[serde(rename = "square")]
    Square(Vec<(usize, f64)>),
}

/// Validated contents of a kernel file.
#[derive(Debug, Clone)]
pub struct ParsedKernelFile {
    pub basis: FilteredBasis,
    /// Kernels with pairwise distinct orders, ascending.
    pub kernels: Vec<SymmetricKernel>,
    pub law: Option<MixtureLaw>,
}

pub fn parse_kernel_file(path: &Path) -> Result<ParsedKernelFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::KernelFile(format!("{}: {e}", path.display())))?;
    parse_kernel_str(&text).map_err(|e| match e {
        Error::KernelFile(msg) => Error::KernelFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_kernel_str(text: &str) -> Result<ParsedKernelFile> {
    let raw: RawFile = serde_json::from_str(text)
        .map_err(|e| Error::KernelFile(format!("malformed JSON at line {}: {e}", e.line())))?;

    if raw.basis.len() != raw.dim {
        return Err(Error::KernelFile(format!(
            "dim is {} but basis lists {} directions",
            raw.dim,
            raw.basis.len()
        )));
    }
    for (i, entry) in raw.basis.iter().enumerate() {
        if !(entry.time > 0.0 && entry.time <= 1.0) {
            return Err(Error::KernelFile(format!(
                "basis entry {}: time must lie in (0,1], got {}",
                i + 1,
                entry.time
            )));
        }
        if entry.channel == 0 {
            return Err(Error::KernelFile(format!(
                "basis entry {}: channel labels are 1-based",
                i + 1
            )));
        }
    }
    let times = raw.basis.iter().map(|b| b.time).collect();
    let channels = raw.basis.iter().map(|b| b.channel).collect();
    let basis = FilteredBasis::new(times, channels)?;

    let mut kernels: Vec<SymmetricKernel> = Vec::new();
    for (ki, rk) in raw.kernels.iter().enumerate() {
        if kernels.iter().any(|k| k.order() == rk.order) {
            return Err(Error::KernelFile(format!(
                "kernel {}: duplicate order {}",
                ki + 1,
                rk.order
            )));
        }
        let mut kernel = SymmetricKernel::zeros(rk.order, raw.dim)?;
        for (ei, entry) in rk.entries.iter().enumerate() {
            let place = format!("kernel {} entry {}", ki + 1, ei + 1);
            if entry.len() != rk.order + 1 {
                return Err(Error::KernelFile(format!(
                    "{place}: expected {} indices plus a value, got {} numbers",
                    rk.order,
                    entry.len()
                )));
            }
            let mut tuple = Vec::with_capacity(rk.order);
            for &x in &entry[..rk.order] {
                if x.fract() != 0.0 || x < 1.0 {
                    return Err(Error::KernelFile(format!(
                        "{place}: index {x} is not a positive integer"
                    )));
                }
                let idx = x as usize;
                if idx > raw.dim {
                    return Err(Error::KernelFile(format!(
                        "{place}: index {idx} out of range for dim {}",
                        raw.dim
                    )));
                }
                tuple.push(idx - 1);
            }
            if tuple.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::KernelFile(format!(
                    "{place}: tuple {:?} is not ascending",
                    &entry[..rk.order]
                )));
            }
            let value = entry[rk.order];
            if !value.is_finite() {
                return Err(Error::KernelFile(format!("{place}: non-finite value")));
            }
            if kernel.get(&tuple) != 0.0 {
                return Err(Error::KernelFile(format!(
                    "{place}: duplicate tuple {:?}",
                    &entry[..rk.order]
                )));
            }
            kernel.add_canonical(&tuple, value)?;
        }
        kernels.push(kernel);
    }
    kernels.sort_by_key(|k| k.order());

    let law = match raw.y {
        None => None,
        Some(RawY::Constant(c)) => Some(MixtureLaw::from_constant(raw.dim, c)?),
        Some(RawY::Square(entries)) => {
            let mut h = vec![0.0; raw.dim];
            for (idx, coeff) in &entries {
                if *idx == 0 || *idx > raw.dim {
                    return Err(Error::KernelFile(format!(
                        "y.square: index {idx} out of range for dim {}",
                        raw.dim
                    )));
                }
                h[*idx - 1] += coeff;
            }
            Some(MixtureLaw::from_square(&h)?)
        }
    };

    Ok(ParsedKernelFile {
        basis,
        kernels,
        law,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_parses() {
        let text = r#"{
            "dim": 1,
            "basis": [{"channel": 1, "time": 1.0}],
            "kernels": [{"order": 1, "entries": [[1, 1.0]]}]
        }"#;
        let parsed = parse_kernel_str(text).unwrap();
        assert_eq!(parsed.basis.dim(), 1);
        assert_eq!(parsed.kernels.len(), 1);
        assert_eq!(parsed.kernels[0].get(&[0]), 1.0);
        assert!(parsed.law.is_none());
    }

    #[test]
    fn duplicate_tuple_is_named() {
        let text = r#"{
            "dim": 2,
            "basis": [{"channel": 1, "time": 0.5}, {"channel": 1, "time": 1.0}],
            "kernels": [{"order": 2, "entries": [[1, 2, 0.5], [1, 2, 0.25]]}]
        }"#;
        let err = parse_kernel_str(text).unwrap_err().to_string();
        assert!(err.contains("duplicate tuple"), "{err}");
        assert!(err.contains("[1.0, 2.0]"), "{err}");
    }

    #[test]
    fn zero_time_rejected_with_boundary_message() {
        let text = r#"{
            "dim": 1,
            "basis": [{"channel": 1, "time": 0.0}],
            "kernels": []
        }"#;
        let err = parse_kernel_str(text).unwrap_err().to_string();
        assert!(err.contains("time must lie in (0,1]"), "{err}");
    }

    #[test]
    fn non_ascending_tuple_rejected() {
        let text = r#"{
            "dim": 2,
            "basis": [{"channel": 1, "time": 0.5}, {"channel": 1, "time": 1.0}],
            "kernels": [{"order": 2, "entries": [[2, 1, 0.5]]}]
        }"#;
        let err = parse_kernel_str(text).unwrap_err().to_string();
        assert!(err.contains("not ascending"), "{err}");
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = parse_kernel_str("{\n  \"dim\": 1,\n  oops\n}")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn mixture_law_from_file() {
        let text = r#"{
            "dim": 2,
            "basis": [{"channel": 1, "time": 0.1}, {"channel": 2, "time": 1.0}],
            "kernels": [{"order": 2, "entries": [[1, 2, 0.5]]}],
            "y": {"square": [[1, 1.0]]}
        }"#;
        let parsed = parse_kernel_str(text).unwrap();
        let law = parsed.law.unwrap();
        assert_eq!(law.mean(), 1.0);
        let bad = r#"{
            "dim": 1,
            "basis": [{"channel": 1, "time": 1.0}],
            "kernels": [],
            "y": {"constant": -1.0}
        }"#;
        assert!(parse_kernel_str(bad).is_err());
    }
}
