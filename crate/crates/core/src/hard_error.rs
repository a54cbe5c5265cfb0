//! Unrecoverable read errors during rebuild.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::FailureModel;

/// Per-unit read error probability and device size in the same unit
/// (both per bit or both per byte).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UcerSpec {
    ucer: f64,
    device_capacity: f64,
}

impl UcerSpec {
    pub fn new(ucer: f64, device_capacity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ucer) {
            return Err(Error::InvalidParameter(format!("ucer = {ucer} is not a probability")));
        }
        if !(device_capacity.is_finite() && device_capacity >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "device capacity {device_capacity} must be at least 1"
            )));
        }
        Ok(UcerSpec {
            ucer,
            device_capacity,
        })
    }

    pub fn ucer(&self) -> f64 {
        self.ucer
    }

    pub fn device_capacity(&self) -> f64 {
        self.device_capacity
    }
}

/// Probability that reading a whole device hits at least one error.
pub fn eta(spec: &UcerSpec) -> f64 {
    if spec.ucer == 1.0 {
        return 1.0;
    }
    -(spec.device_capacity * (-spec.ucer).ln_1p()).exp_m1()
}

/// Probability that reading `m` devices hits at least one error.
pub fn p_ucer(eta: f64, m: usize) -> f64 {
    if eta == 1.0 {
        return 1.0;
    }
    -(m as f64 * (-eta).ln_1p()).exp_m1()
}

/// Splits the critical-state failure rate into a rebuild that survives and
/// one that hits a read error and loses data.
///
/// With `P = p_ucer(eta, m)`, `λ_{p-1}` becomes `λ_{p-1}(1 - P)` and
/// `γ_{p-1}` is set to the state exit rate `(m + 1)λ_{p-1}P`.
pub fn apply_hard_error(model: &FailureModel, eta: f64) -> Result<FailureModel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta = {eta} is not a probability")));
    }
    if model.has_gamma() {
        return Err(Error::AlreadyHasGamma);
    }
    let p = model.p();
    let prob = p_ucer(eta, model.m());
    let mut lambda = model.lambda().to_vec();
    let mut gamma = model.gamma().to_vec();
    let old = lambda[p - 1];
    lambda[p - 1] = old * (1.0 - prob);
    gamma[p - 1] = (model.m() + 1) as f64 * old * prob;
    model.with_rates(lambda, model.mu().to_vec(), gamma)
}
