//! Degraded-read overhead of systematic codes and code profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FailureModel;
use crate::numeric::CompensatedSum;

/// Blocks read to rebuild each data block of an `(n, m)` systematic code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessPattern {
    n: usize,
    m: usize,
    set_sizes: Vec<usize>,
}

impl AccessPattern {
    pub fn new(n: usize, m: usize, set_sizes: Vec<usize>) -> Result<Self> {
        if m < 1 || m >= n {
            return Err(Error::InvalidParameter(format!("need 1 <= m < n, got ({n}, {m})")));
        }
        if set_sizes.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} set sizes for {m} data blocks",
                set_sizes.len()
            )));
        }
        if let Some(s) = set_sizes.iter().find(|s| **s < 1 || **s > n - 1) {
            return Err(Error::InvalidParameter(format!("set size {s} outside 1..={}", n - 1)));
        }
        Ok(AccessPattern { n, m, set_sizes })
    }

    /// Every data block is rebuilt from any `m` survivors.
    pub fn mds(n: usize, m: usize) -> Result<Self> {
        AccessPattern::new(n, m, vec![m; m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn set_sizes(&self) -> &[usize] {
        &self.set_sizes
    }

    /// Per-block average set size.
    pub fn mean_set_size(&self) -> f64 {
        self.set_sizes.iter().sum::<usize>() as f64 / self.m as f64
    }
}

/// Average whole-device reads per data access with `j` failed blocks.
///
/// Sums `(iS̄ + m - i)/m` over the hypergeometric law of `i`, the number of
/// failed blocks that are data blocks.
pub fn avg_read_overhead(pattern: &AccessPattern, j: usize) -> Result<f64> {
    let (n, m) = (pattern.n, pattern.m);
    if j > n - m {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: n - m,
        });
    }
    let sbar = pattern.mean_set_size();
    let weights = hypergeometric_weights(n, m, j);
    let lo = j.saturating_sub(n - m);
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (k, w) in weights.iter().enumerate() {
        let i = lo + k;
        num.add(w * (i as f64 * sbar + (m - i) as f64) / m as f64);
        den.add(*w);
    }
    Ok(num.value() / den.value())
}

/// Unnormalized hypergeometric weights for drawing `i` of `m` marked items
/// in `j` draws from `n`, for `i` from `max(0, j - (n - m))` to `min(j, m)`.
///
/// Built outward from the mode with the term ratio so nothing overflows and
/// every weight carries only a few rounding errors.
fn hypergeometric_weights(n: usize, m: usize, j: usize) -> Vec<f64> {
    let lo = j.saturating_sub(n - m);
    let hi = j.min(m);
    let mode = ((j + 1) * (m + 1) / (n + 2)).clamp(lo, hi);
    // w(i + 1) / w(i)
    let ratio = |i: usize| ((m - i) * (j - i)) as f64 / ((i + 1) * (n - m + i + 1 - j)) as f64;
    let mut w = vec![0.0; hi - lo + 1];
    w[mode - lo] = 1.0;
    for i in mode..hi {
        w[i + 1 - lo] = w[i - lo] * ratio(i);
    }
    for i in (lo..mode).rev() {
        w[i - lo] = w[i + 1 - lo] / ratio(i);
    }
    w
}

/// Large-`n` form `1 + S̄ j / n` (`1 + m j / n` for MDS). The exact value is
/// `1 + (S̄ - 1) j / n`, so the two differ by exactly `j / n`.
pub fn asymptotic_overhead(pattern: &AccessPattern, j: usize) -> f64 {
    1.0 + pattern.mean_set_size() * j as f64 / pattern.n as f64
}

/// Overheads for `j = 0..=n-m`.
pub fn overhead_table(pattern: &AccessPattern) -> Vec<f64> {
    (0..=pattern.n - pattern.m)
        .map(|j| avg_read_overhead(pattern, j).expect("j within range"))
        .collect()
}

/// Recoverability and read overhead of a code, indexed by failure count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeProfile {
    name: String,
    n: usize,
    m: usize,
    recoverability: Vec<f64>,
    read_overhead: Vec<f64>,
}

/// Serialized form of a [`CodeProfile`]; recoverability as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeProfileRecord {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub recoverability: Vec<f64>,
    pub read_overhead: Vec<f64>,
}

impl CodeProfile {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn recoverability(&self) -> &[f64] {
        &self.recoverability
    }

    pub fn read_overhead(&self) -> &[f64] {
        &self.read_overhead
    }

    pub fn to_record(&self) -> CodeProfileRecord {
        CodeProfileRecord {
            name: self.name.clone(),
            n: self.n,
            m: self.m,
            recoverability: self.recoverability.clone(),
            read_overhead: self.read_overhead.clone(),
        }
    }
}

pub fn load_code_profile(record: CodeProfileRecord) -> Result<CodeProfile> {
    let CodeProfileRecord {
        name,
        n,
        m,
        recoverability,
        read_overhead,
    } = record;
    let bad = |msg: String| Err(Error::MalformedProfile(format!("{name}: {msg}")));
    if m < 1 || m >= n {
        return bad(format!("need 1 <= m < n, got ({n}, {m})"));
    }
    let len = n - m + 1;
    if recoverability.len() != len || read_overhead.len() != len {
        return bad(format!(
            "expected {len} entries, got {} recoverability and {} overhead",
            recoverability.len(),
            read_overhead.len()
        ));
    }
    if recoverability[0] != 1.0 {
        return bad(format!("recoverability with no failures is {}, not 1", recoverability[0]));
    }
    if read_overhead[0] != 1.0 {
        return bad(format!("read overhead with no failures is {}, not 1", read_overhead[0]));
    }
    if let Some(x) = recoverability.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return bad(format!("recoverability {x} is not a fraction"));
    }
    if let Some(x) = read_overhead.iter().find(|x| !(x.is_finite() && **x >= 1.0)) {
        return bad(format!("read overhead {x} is below 1"));
    }
    Ok(CodeProfile {
        name,
        n,
        m,
        recoverability,
        read_overhead,
    })
}

fn builtin(name: &str, recoverability: [f64; 7], read_overhead: [f64; 7]) -> CodeProfile {
    load_code_profile(CodeProfileRecord {
        name: name.into(),
        n: 18,
        m: 12,
        recoverability: recoverability.to_vec(),
        read_overhead: read_overhead.to_vec(),
    })
    .expect("built-in profile is well formed")
}

pub const MDS_18_12: &str = "Generic MDS (18,12)";
pub const PYRAMID: &str = "Pyramid Code";
pub const GENERALIZED_PYRAMID: &str = "Generalized Pyramid Code";
pub const PYRAMID_NO_GLOBALS: &str = "GPC w/o global symbols";

/// (18,12) MDS and three pyramid-code variants.
pub fn builtin_profiles() -> Vec<CodeProfile> {
    vec![
        builtin(
            MDS_18_12,
            [1.0; 7],
            [1.0, 1.61, 2.22, 2.83, 3.44, 4.06, 4.67],
        ),
        builtin(
            PYRAMID,
            [1.0, 1.0, 1.0, 1.0, 1.0, 0.9412, 0.5932],
            [1.0, 1.28, 1.56, 1.99, 2.59, 3.29, 3.83],
        ),
        builtin(
            GENERALIZED_PYRAMID,
            [1.0, 1.0, 1.0, 1.0, 1.0, 0.9419, 0.7644],
            [1.0, 1.28, 1.56, 1.99, 2.59, 3.29, 4.12],
        ),
        builtin(
            PYRAMID_NO_GLOBALS,
            [1.0, 1.0, 1.0, 1.0, 0.9794, 0.8857, 0.6563],
            [1.0, 1.28, 1.56, 1.87, 2.32, 2.93, 3.85],
        ),
    ]
}

pub fn builtin_profile(name: &str) -> Option<CodeProfile> {
    builtin_profiles().into_iter().find(|p| p.name == name)
}

/// Folds unrecoverable failure patterns into direct data-loss transitions.
///
/// A fraction `1 - rec_j / rec_{j-1}` of the failures that would move the
/// chain from `j - 1` to `j` failures is instead sent to data loss.
pub fn apply_recoverability(model: &FailureModel, profile: &CodeProfile) -> Result<FailureModel> {
    if model.n() != profile.n || model.m() != profile.m {
        return Err(Error::DimensionMismatch(format!(
            "profile is ({}, {}), model is ({}, {})",
            profile.n,
            profile.m,
            model.n(),
            model.m()
        )));
    }
    let mut lambda = model.lambda().to_vec();
    let mut gamma = model.gamma().to_vec();
    let rec = &profile.recoverability;
    for j in 1..=model.p() {
        let c = if rec[j - 1] > 0.0 { rec[j] / rec[j - 1] } else { 0.0 };
        if c >= 1.0 {
            continue;
        }
        let rate = lambda[j - 1] * (model.n() - j + 1) as f64;
        lambda[j - 1] *= c;
        gamma[j - 1] += rate * (1.0 - c);
    }
    model.with_rates(lambda, model.mu().to_vec(), gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mds_18_12_row() {
        let pat = AccessPattern::mds(18, 12).unwrap();
        let row = overhead_table(&pat);
        let table = [1.0, 1.61, 2.22, 2.83, 3.44, 4.06, 4.67];
        for (a, b) in row.iter().zip(table) {
            assert!((a - b).abs() < 0.005, "{a} vs {b}");
        }
        assert!((row[1] - 29.0 / 18.0).abs() < 1e-14);
        assert!(matches!(avg_read_overhead(&pat, 7), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn asymptotic_mds_form() {
        let pat = AccessPattern::mds(18, 12).unwrap();
        assert!((asymptotic_overhead(&pat, 3) - (1.0 + 12.0 * 3.0 / 18.0)).abs() < 1e-15);
    }

    #[test]
    fn builtin_values() {
        let mds = builtin_profile(MDS_18_12).unwrap();
        assert!(mds.recoverability().iter().all(|&r| r == 1.0));
        let pc = builtin_profile(PYRAMID).unwrap();
        assert_eq!(pc.recoverability()[5], 0.9412);
        assert_eq!(pc.recoverability()[6], 0.5932);
        assert_eq!(builtin_profiles().len(), 4);
    }

    #[test]
    fn malformed_profiles() {
        let rec = CodeProfileRecord {
            name: "x".into(),
            n: 4,
            m: 2,
            recoverability: vec![0.9, 1.0, 1.0],
            read_overhead: vec![1.0, 1.2, 1.4],
        };
        assert!(matches!(load_code_profile(rec.clone()), Err(Error::MalformedProfile(_))));
        let short = CodeProfileRecord {
            recoverability: vec![1.0, 1.0],
            ..rec.clone()
        };
        assert!(matches!(load_code_profile(short), Err(Error::MalformedProfile(_))));
        let ok = CodeProfileRecord {
            recoverability: vec![1.0, 1.0, 0.5],
            ..rec
        };
        assert!(load_code_profile(ok).is_ok());
    }

    #[test]
    fn recoverability_preserves_exit_rates() {
        let model = FailureModel::uniform(12, 6, 1e-5, 0.01).unwrap();
        let pc = builtin_profile(PYRAMID).unwrap();
        let out = apply_recoverability(&model, &pc).unwrap();
        for i in 0..6 {
            let before = model.forward_rate(i) + model.gamma()[i];
            let after = out.forward_rate(i) + out.gamma()[i];
            assert!((before - after).abs() <= 1e-15 * before);
        }
        assert_eq!(out.gamma()[..4], [0.0; 4]);
        assert!(out.gamma()[4] > 0.0 && out.gamma()[5] > 0.0);
    }
}
