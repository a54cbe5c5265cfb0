//! Failure-rate growth laws and overhead-driven repair rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logistic growth of the per-disk failure rate with the number of failed
/// disks. `lambda_max = None` means no cap (pure exponential growth).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthSpec {
    lambda0: f64,
    r: f64,
    lambda_max: Option<f64>,
}

impl GrowthSpec {
    pub fn new(lambda0: f64, r: f64, lambda_max: Option<f64>) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda0 = {lambda0} must be positive")));
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParameter(format!("r = {r} must be non-negative")));
        }
        // An infinite cap is the same as no cap.
        let lambda_max = lambda_max.filter(|x| !x.is_infinite());
        if let Some(cap) = lambda_max {
            if !(cap >= lambda0) {
                return Err(Error::InvalidParameter(format!(
                    "lambda_max = {cap} must be at least lambda0 = {lambda0}"
                )));
            }
        }
        Ok(GrowthSpec {
            lambda0,
            r,
            lambda_max,
        })
    }

    pub fn constant(lambda0: f64) -> Result<Self> {
        GrowthSpec::new(lambda0, 0.0, None)
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda_max(&self) -> Option<f64> {
        self.lambda_max
    }
}

/// `λ_i = λ_0 e^{i r*} / (1 + (e^{i r*} - 1) λ_0 / λ_max)` with `r* = ln(1 + r)`.
pub fn logistic_lambda(spec: &GrowthSpec, i: usize) -> f64 {
    let rs = spec.r.ln_1p() * i as f64;
    match spec.lambda_max {
        None => spec.lambda0 * rs.exp(),
        // Divided through by e^{i r*} so large i saturates instead of
        // overflowing.
        Some(cap) => {
            let u = (-rs).exp();
            let rho = spec.lambda0 / cap;
            spec.lambda0 / (u * (1.0 - rho) + rho)
        }
    }
}

/// `[λ_0, …, λ_{len-1}]`.
pub fn lambda_sequence(spec: &GrowthSpec, len: usize) -> Vec<f64> {
    (0..len).map(|i| logistic_lambda(spec, i)).collect()
}

/// Failure-rate vector for a group with `p` parities (`p + 1` entries).
pub fn build_lambda_vector(spec: &GrowthSpec, p: usize) -> Result<Vec<f64>> {
    if p < 1 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    Ok(lambda_sequence(spec, p + 1))
}

/// Repair rates scaled by how much cheaper a code's degraded reads are than
/// those of an MDS code of the same shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairSpec {
    mu_nominal: f64,
    delta: f64,
    overhead_mds: Vec<f64>,
    overhead_code: Vec<f64>,
}

impl RepairSpec {
    pub fn new(mu_nominal: f64, delta: f64, overhead_mds: Vec<f64>, overhead_code: Vec<f64>) -> Result<Self> {
        if !(mu_nominal.is_finite() && mu_nominal > 0.0) {
            return Err(Error::InvalidParameter(format!("mu = {mu_nominal} must be positive")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
        }
        if overhead_mds.len() != overhead_code.len() {
            return Err(Error::DimensionMismatch(format!(
                "overhead tables have {} and {} entries",
                overhead_mds.len(),
                overhead_code.len()
            )));
        }
        if let Some(x) = overhead_mds.iter().chain(&overhead_code).find(|x| !(**x >= 1.0 && x.is_finite())) {
            return Err(Error::InvalidParameter(format!("read overhead {x} is below 1")));
        }
        Ok(RepairSpec {
            mu_nominal,
            delta,
            overhead_mds,
            overhead_code,
        })
    }

    pub fn mu_nominal(&self) -> f64 {
        self.mu_nominal
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `μ_j = δμ ln((j+1)Φ^MDS_{j+1}) / ln((j+1)Φ^code_{j+1})`.
pub fn repair_rate(spec: &RepairSpec, j: usize) -> Result<f64> {
    let k = j + 1;
    if k >= spec.overhead_mds.len() {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: spec.overhead_mds.len().saturating_sub(2),
        });
    }
    let base = spec.delta * spec.mu_nominal;
    let (mds, code) = (spec.overhead_mds[k], spec.overhead_code[k]);
    if mds == code {
        return Ok(base);
    }
    let (a, b) = (k as f64 * mds, k as f64 * code);
    if a <= 1.0 || b <= 1.0 {
        return Err(Error::DomainError(format!(
            "log arguments {a} and {b} at j = {j} must both exceed 1"
        )));
    }
    Ok(base * a.ln() / b.ln())
}

/// `[μ_0, …, μ_{p-1}]` from [`repair_rate`].
pub fn repair_vector(spec: &RepairSpec, p: usize) -> Result<Vec<f64>> {
    (0..p).map(|j| repair_rate(spec, j)).collect()
}

/// How a nominal repair rate maps onto the chain's `iμ_{i-1}` transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairMode {
    /// The whole `i`-failures state is repaired at the nominal rate.
    #[default]
    PerState,
    /// Each failed disk is repaired at the nominal rate.
    PerDisk,
}

impl RepairMode {
    /// Per-transition `μ_{i-1}` values for nominal rates `[ν_0, …]`.
    pub fn chain_rates(self, nominal: &[f64]) -> Vec<f64> {
        match self {
            RepairMode::PerDisk => nominal.to_vec(),
            RepairMode::PerState => nominal
                .iter()
                .enumerate()
                .map(|(j, v)| v / (j + 1) as f64)
                .collect(),
        }
    }
}
