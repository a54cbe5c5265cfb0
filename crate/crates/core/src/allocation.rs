//! Spreading `z` protection groups over `z` storage nodes.
//!
//! Horizontal allocation keeps a whole group inside one node, so the group
//! chain sees the node's dependent failure rates and groups fail
//! independently. Vertical allocation places one disk of every group in
//! each node; each group then sees disks whose state is governed by the
//! node-level birth-death chain.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::growth::{lambda_sequence, GrowthSpec};
use crate::markov::{mttdl_linear_solve, mttdl_with_initial_distribution};
use crate::model::{FailureModel, InitialDistribution};
use crate::numeric::compensated_sum;
use crate::solver;

/// Largest node count solved through the full generator.
pub const EXACT_STEADY_STATE_MAX_Z: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Horizontal,
    Vertical,
}

impl Policy {
    fn name(self) -> &'static str {
        match self {
            Policy::Horizontal => "horizontal",
            Policy::Vertical => "vertical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationScenario {
    z: usize,
    policy: Policy,
    weibull_k: f64,
    epg_model: FailureModel,
    growth: GrowthSpec,
}

impl AllocationScenario {
    pub fn new(
        z: usize,
        policy: Policy,
        weibull_k: f64,
        epg_model: FailureModel,
        growth: GrowthSpec,
    ) -> Result<Self> {
        if z < 1 {
            return Err(Error::InvalidParameter("z must be at least 1".into()));
        }
        if !(weibull_k.is_finite() && weibull_k > 0.0) {
            return Err(Error::InvalidParameter(format!("weibull_k = {weibull_k} must be positive")));
        }
        if policy == Policy::Vertical && z != epg_model.n() {
            return Err(Error::DimensionMismatch(format!(
                "vertical allocation needs z = n, got z = {z}, n = {}",
                epg_model.n()
            )));
        }
        Ok(AllocationScenario {
            z,
            policy,
            weibull_k,
            epg_model,
            growth,
        })
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn weibull_k(&self) -> f64 {
        self.weibull_k
    }

    pub fn epg_model(&self) -> &FailureModel {
        &self.epg_model
    }

    pub fn growth(&self) -> &GrowthSpec {
        &self.growth
    }

    /// Node-level rate vectors: growth law for failures, the group's first
    /// repair rate for every repair.
    pub fn node_rates(&self) -> (Vec<f64>, Vec<f64>) {
        let lambda = lambda_sequence(&self.growth, self.z);
        let mu = vec![self.epg_model.mu()[0]; self.z];
        (lambda, mu)
    }
}

/// Weibull rate parameter `ω = Γ(1 + 1/k) / mean`.
pub fn weibull_rate(mean: f64, k: f64) -> f64 {
    gamma(1.0 + 1.0 / k) / mean
}

/// Mean of the minimum of `z` independent Weibull lifetimes with shape `k`
/// and mean `epg_mttdl` each: `epg_mttdl / z^{1/k}`.
pub fn horizontal_system_mttdl(epg_mttdl: f64, z: usize, k: f64) -> f64 {
    // min of z Weibull(ω, k) is Weibull(ω z^{1/k}, k)
    let omega = weibull_rate(epg_mttdl, k) * (z as f64).powf(1.0 / k);
    gamma(1.0 + 1.0 / k) / omega
}

/// Steady state of the node chain: `pi[j]` is the probability that `j` of
/// the node's `z` disks are failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSteadyState {
    pub pi: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_f: f64,
}

impl NodeSteadyState {
    fn from_pi(pi: Vec<f64>) -> Self {
        let z = pi.len() - 1;
        let zf = z as f64;
        let theta = (0..z).map(|j| (z - j) as f64 * pi[j] / zf).collect();
        let theta_f = compensated_sum((1..=z).map(|i| i as f64 * pi[i] / zf));
        NodeSteadyState { pi, theta, theta_f }
    }

    pub fn z(&self) -> usize {
        self.pi.len() - 1
    }
}

fn check_rates(z: usize, lambda: &[f64], mu: &[f64]) -> Result<()> {
    if z < 1 {
        return Err(Error::RateVectorMismatch("z must be at least 1".into()));
    }
    if lambda.len() != z || mu.len() != z {
        return Err(Error::RateVectorMismatch(format!(
            "need {z} failure and repair rates, got {} and {}",
            lambda.len(),
            mu.len()
        )));
    }
    if let Some(x) = lambda.iter().chain(mu).find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::RateVectorMismatch(format!("rate {x} must be positive")));
    }
    Ok(())
}

/// Product-form steady state, evaluated in log space.
pub fn node_steady_state_product_form(z: usize, lambda: &[f64], mu: &[f64]) -> Result<NodeSteadyState> {
    check_rates(z, lambda, mu)?;
    let mut logw = Vec::with_capacity(z + 1);
    logw.push(0.0);
    let mut acc = 0.0;
    for s in 0..z {
        acc += ((z - s) as f64 * lambda[s] / mu[s]).ln();
        logw.push(acc);
    }
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let total = compensated_sum(w.iter().copied());
    Ok(NodeSteadyState::from_pi(w.into_iter().map(|x| x / total).collect()))
}

/// Steady state from the full `(z + 1)`-state generator.
pub fn node_steady_state_generator(z: usize, lambda: &[f64], mu: &[f64]) -> Result<NodeSteadyState> {
    check_rates(z, lambda, mu)?;
    let mut rates = vec![vec![0.0; z + 1]; z + 1];
    for j in 0..z {
        rates[j][j + 1] = (z - j) as f64 * lambda[j];
        rates[j + 1][j] = mu[j];
    }
    Ok(NodeSteadyState::from_pi(solver::stationary_distribution(&rates)?))
}

/// Generator solve for small `z`, product form otherwise.
pub fn node_steady_state(z: usize, lambda: &[f64], mu: &[f64]) -> Result<NodeSteadyState> {
    if z <= EXACT_STEADY_STATE_MAX_Z {
        node_steady_state_generator(z, lambda, mu)
    } else {
        node_steady_state_product_form(z, lambda, mu)
    }
}

/// `λ_avg = Σ_{j<z} λ_j θ_j`.
pub fn average_failure_rate(state: &NodeSteadyState, lambda: &[f64]) -> Result<f64> {
    if lambda.len() != state.theta.len() {
        return Err(Error::RateVectorMismatch(format!(
            "need {} failure rates, got {}",
            state.theta.len(),
            lambda.len()
        )));
    }
    Ok(compensated_sum(lambda.iter().zip(&state.theta).map(|(l, t)| l * t)))
}

/// Per-group MTTDL under vertical allocation.
pub fn vertical_epg_mttdl(scenario: &AllocationScenario) -> Result<f64> {
    if scenario.policy != Policy::Vertical {
        return Err(Error::PolicyMismatch {
            expected: Policy::Vertical.name(),
        });
    }
    let (lambda, mu) = scenario.node_rates();
    let state = node_steady_state(scenario.z, &lambda, &mu)?;
    let lambda_avg = average_failure_rate(&state, &lambda)?;
    vertical_mttdl_from(scenario.epg_model(), lambda_avg, state.theta_f)
}

/// Group MTTDL with every failure rate set to `lambda_avg` and the starting
/// failure count binomial in `rho`.
pub fn vertical_mttdl_from(model: &FailureModel, lambda_avg: f64, rho: f64) -> Result<f64> {
    let (n, p) = (model.n(), model.p());
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("failure probability {rho} outside [0, 1)")));
    }
    let averaged = model.with_rates(vec![lambda_avg; p + 1], model.mu().to_vec(), model.gamma().to_vec())?;
    let mut eps: Vec<f64> = (0..=p)
        .map(|nu| {
            let ln = ln_binomial(n as u64, nu as u64) + (n - nu) as f64 * (-rho).ln_1p();
            if nu == 0 {
                ln.exp()
            } else {
                (ln + nu as f64 * rho.ln()).exp()
            }
        })
        .collect();
    let operational = compensated_sum(eps.iter().copied());
    eps.push((1.0 - operational).max(0.0));
    let eps = InitialDistribution::new(eps)?;
    Ok(mttdl_with_initial_distribution(&averaged, &eps)?.hours)
}

/// System MTTDL of `z` groups under the scenario's policy.
pub fn system_mttdl(scenario: &AllocationScenario) -> Result<f64> {
    let per_group = match scenario.policy {
        Policy::Horizontal => mttdl_linear_solve(&scenario.epg_model)?.hours,
        Policy::Vertical => vertical_epg_mttdl(scenario)?,
    };
    Ok(horizontal_system_mttdl(per_group, scenario.z, scenario.weibull_k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizontal_formula() {
        assert!((horizontal_system_mttdl(1e10, 200, 1.0) - 5e7).abs() < 1e-3);
        assert!((horizontal_system_mttdl(1e10, 1, 0.9) - 1e10).abs() < 1e-3);
        let h = horizontal_system_mttdl(1e10, 200, 0.9);
        let expect = 1e10 / 200f64.powf(1.0 / 0.9);
        assert!((h - expect).abs() / expect < 1e-13);
    }

    #[test]
    fn single_node_balance() {
        let s = node_steady_state(1, &[0.2], &[0.8]).unwrap();
        assert!((s.pi[0] - 0.8).abs() < 1e-15);
        assert!((s.pi[1] - 0.2).abs() < 1e-15);
        assert!((s.theta[0] - 0.8).abs() < 1e-15);
        assert!((s.theta_f - 0.2).abs() < 1e-15);
        assert!((average_failure_rate(&s, &[0.2]).unwrap() - 0.16).abs() < 1e-15);
    }

    #[test]
    fn rate_vector_checks() {
        assert!(matches!(
            node_steady_state(3, &[0.1; 2], &[1.0; 3]),
            Err(Error::RateVectorMismatch(_))
        ));
        let s = node_steady_state(2, &[0.1; 2], &[1.0; 2]).unwrap();
        assert!(average_failure_rate(&s, &[0.1; 3]).is_err());
    }

    #[test]
    fn constant_rate_average() {
        let z = 20;
        let s = node_steady_state(z, &vec![0.01; z], &vec![2.0; z]).unwrap();
        let avg = average_failure_rate(&s, &vec![0.01; z]).unwrap();
        assert!((avg - 0.01 * (1.0 - s.theta_f)).abs() < 1e-16);
    }

    #[test]
    fn policy_checks() {
        let model = FailureModel::uniform(3, 2, 1e-3, 1.0).unwrap();
        let g = GrowthSpec::constant(1e-3).unwrap();
        let h = AllocationScenario::new(5, Policy::Horizontal, 1.0, model.clone(), g).unwrap();
        assert_eq!(
            vertical_epg_mttdl(&h),
            Err(Error::PolicyMismatch {
                expected: "vertical"
            })
        );
        assert!(AllocationScenario::new(6, Policy::Vertical, 1.0, model.clone(), g).is_err());
        assert!(AllocationScenario::new(5, Policy::Vertical, 0.0, model, g).is_err());
    }
}
