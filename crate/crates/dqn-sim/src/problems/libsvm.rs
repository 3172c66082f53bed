//! LIBSVM sparse text format ingestion.
//!
//! Lines are `label idx:val idx:val ...` with 1-indexed feature ids. Feature
//! ids beyond the largest previously seen extend the dimension.

use super::{GlobalProblem, LocalProblem, Loss};
use crate::numerics::Matrix;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// Raw sparse dataset as read from disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// (sparse features as (0-indexed id, value), label)
    pub samples: Vec<(Vec<(usize, f64)>, f64)>,
    pub dim: usize,
}

pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_libsvm(&text)
}

pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut samples = Vec::new();
    let mut dim = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let label_tok = toks.next().unwrap();
        let label: f64 = label_tok.parse().map_err(|_| Error::MalformedLine {
            line: lineno + 1,
            reason: format!("bad label `{label_tok}`"),
        })?;
        // Labels are mapped onto {-1, +1}; 0 and 2 (covtype-style binary
        // encodings) map to -1.
        let label = if label == 1.0 {
            1.0
        } else if label == -1.0 || label == 0.0 || label == 2.0 {
            -1.0
        } else {
            return Err(Error::MalformedLine {
                line: lineno + 1,
                reason: format!("unknown label {label}"),
            });
        };
        let mut feats = Vec::new();
        for tok in toks {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::MalformedLine {
                line: lineno + 1,
                reason: format!("expected idx:val, got `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::MalformedLine {
                line: lineno + 1,
                reason: format!("bad feature index `{idx}`"),
            })?;
            if idx == 0 {
                return Err(Error::MalformedLine {
                    line: lineno + 1,
                    reason: "feature indices are 1-based".into(),
                });
            }
            let val: f64 = val.parse().map_err(|_| Error::MalformedLine {
                line: lineno + 1,
                reason: format!("bad feature value `{val}`"),
            })?;
            dim = dim.max(idx);
            feats.push((idx - 1, val));
        }
        samples.push((feats, label));
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput("dataset has no samples".into()));
    }
    Ok(Dataset { samples, dim })
}

/// Scales every sample to unit Euclidean norm. Zero samples are left as is.
pub fn normalize_samples(ds: &mut Dataset) {
    for (feats, _) in &mut ds.samples {
        let n: f64 = feats.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            for (_, v) in feats.iter_mut() {
                *v /= n;
            }
        }
    }
}

/// Shuffles samples with the given seed and splits them over `n` nodes so
/// that node sizes differ by at most one.
pub fn partition(ds: &Dataset, n: usize, iota: f64, seed: u64) -> Result<GlobalProblem> {
    if n == 0 || ds.samples.len() < n {
        return Err(Error::InvalidInput(format!(
            "cannot split {} samples over {n} nodes",
            ds.samples.len()
        )));
    }
    let mut order: Vec<usize> = (0..ds.samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let total = ds.samples.len();
    let base = total / n;
    let extra = total % n;

    let mut locals = Vec::with_capacity(n);
    let mut cursor = 0usize;
    for i in 0..n {
        let take = base + usize::from(i < extra);
        let mut rows = Vec::with_capacity(take);
        let mut labels = Vec::with_capacity(take);
        for &s in &order[cursor..cursor + take] {
            let (feats, label) = &ds.samples[s];
            let mut dense = vec![0.0; ds.dim];
            for &(idx, val) in feats {
                dense[idx] = val;
            }
            rows.push(dense);
            labels.push(*label);
        }
        cursor += take;
        let features = Matrix::from_rows(&rows)?;
        locals.push(LocalProblem::new(i, features, labels, Loss::Logistic { iota })?);
    }
    GlobalProblem::new(locals)
}
