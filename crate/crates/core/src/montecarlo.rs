//! Discrete-event simulation of the failure chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FailureModel, MttdlEstimate};

pub const DEFAULT_EVENT_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub max_events_per_trial: u64,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimConfig {
            trials,
            seed,
            max_events_per_trial: DEFAULT_EVENT_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.max_events_per_trial < 1 {
            return Err(Error::InvalidParameter("event cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sample statistics over the trials that reached data loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub mean_hours: f64,
    pub stderr_hours: f64,
    pub trials_completed: u64,
    pub trials_truncated: u64,
}

impl SimResult {
    /// Normal-approximation 95% interval.
    pub fn estimate(&self) -> MttdlEstimate {
        MttdlEstimate::monte_carlo(self.mean_hours, 1.96 * self.stderr_hours)
    }
}

/// Exit table of one transient state.
struct StateExits {
    total: f64,
    // cumulative thresholds: below `fail` advance, below `repair` go to 0,
    // otherwise data loss
    fail: f64,
    repair: f64,
}

fn exit_table(model: &FailureModel) -> Vec<StateExits> {
    let p = model.p();
    (0..=p)
        .map(|i| {
            let fail = model.forward_rate(i);
            let repair = if i > 0 { i as f64 * model.mu()[i - 1] } else { 0.0 };
            let error = if i < p { model.gamma()[i] } else { 0.0 };
            StateExits {
                total: fail + repair + error,
                fail,
                repair: fail + repair,
            }
        })
        .collect()
}

fn run_trial(table: &[StateExits], rng: &mut ChaCha8Rng, cap: u64) -> Option<f64> {
    let p = table.len() - 1;
    let mut state = 0usize;
    let mut t = 0.0;
    for _ in 0..cap {
        let ex = &table[state];
        let hold: f64 = rng.sample(Exp1);
        t += hold / ex.total;
        let u = rng.random::<f64>() * ex.total;
        if u < ex.fail {
            if state == p {
                return Some(t);
            }
            state += 1;
        } else if u < ex.repair {
            state = 0;
        } else {
            return Some(t);
        }
    }
    None
}

/// Mean time to absorption over `config.trials` independent runs.
///
/// Trial `k` draws from its own ChaCha stream `k` of `config.seed`, and
/// results are reduced in trial order, so the output does not depend on
/// thread scheduling.
pub fn simulate_mttdl(model: &FailureModel, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let table = exit_table(model);
    let times: Vec<Option<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k);
            run_trial(&table, &mut rng, config.max_events_per_trial)
        })
        .collect();

    let mut count = 0u64;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for t in times.iter().flatten() {
        count += 1;
        let d = t - mean;
        mean += d / count as f64;
        m2 += d * (t - mean);
    }
    let truncated = config.trials - count;
    let (mean_hours, stderr_hours) = match count {
        0 => (f64::NAN, f64::NAN),
        1 => (mean, f64::INFINITY),
        c => (mean, (m2 / (c - 1) as f64).sqrt() / (c as f64).sqrt()),
    };
    Ok(SimResult {
        mean_hours,
        stderr_hours,
        trials_completed: count,
        trials_truncated: truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_stage_chain() {
        let lam = 0.5;
        let model = FailureModel::new(2, 1, vec![lam, lam], vec![0.0], vec![0.0]).unwrap();
        let r = simulate_mttdl(&model, &SimConfig::new(100_000, 7)).unwrap();
        let exact = 1.0 / (2.0 * lam) + 1.0 / lam;
        assert_eq!(r.trials_completed, 100_000);
        assert!((r.mean_hours - exact).abs() < 3.0 * r.stderr_hours);
    }

    #[test]
    fn huge_error_rate_absorbs_at_once() {
        let model = FailureModel::new(4, 2, vec![1e-3; 3], vec![1.0; 2], vec![1e3, 0.0]).unwrap();
        let r = simulate_mttdl(&model, &SimConfig::new(20_000, 3)).unwrap();
        let race = 1.0 / (4e-3 + 1e3);
        assert!((r.mean_hours - race).abs() / race < 0.05);
    }

    #[test]
    fn same_seed_same_bits() {
        let model = FailureModel::uniform(4, 2, 0.1, 1.0).unwrap();
        let cfg = SimConfig::new(5_000, 42);
        let a = simulate_mttdl(&model, &cfg).unwrap();
        let b = simulate_mttdl(&model, &cfg).unwrap();
        assert_eq!(a.mean_hours.to_bits(), b.mean_hours.to_bits());
        assert_eq!(a.stderr_hours.to_bits(), b.stderr_hours.to_bits());
        let c = simulate_mttdl(&model, &SimConfig::new(5_000, 43)).unwrap();
        assert_ne!(a.mean_hours, c.mean_hours);
    }

    #[test]
    fn cap_truncates() {
        let model = FailureModel::uniform(4, 2, 0.1, 100.0).unwrap();
        let cfg = SimConfig {
            trials: 200,
            seed: 1,
            max_events_per_trial: 3,
        };
        let r = simulate_mttdl(&model, &cfg).unwrap();
        assert!(r.trials_truncated > 0);
        assert_eq!(r.trials_completed + r.trials_truncated, 200);
    }
}
