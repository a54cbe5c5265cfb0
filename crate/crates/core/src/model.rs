use serde::Serialize;

use crate::error::{Error, Result};

/// Markov-chain parameters of one protection group of `n = m + p` disks.
///
/// Rates are indexed by the number of disks that have already failed:
/// `lambda[i]` and `gamma[i]` are in force with `i` failures, `mu[i - 1]` is
/// the rate of the repair-to-full transition out of the `i`-failures state.
/// `lambda` is a per-disk rate; the chain multiplies it by the number of
/// surviving disks. `gamma` is a per-state rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureModel {
    n: usize,
    m: usize,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    gamma: Vec<f64>,
}

impl FailureModel {
    pub fn new(n: usize, m: usize, lambda: Vec<f64>, mu: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if m < 1 || m >= n {
            return Err(Error::InvalidModel(format!(
                "need 1 <= m < n, got n = {n}, m = {m}"
            )));
        }
        let p = n - m;
        if lambda.len() != p + 1 {
            return Err(Error::InvalidModel(format!(
                "lambda has {} entries, expected p + 1 = {}",
                lambda.len(),
                p + 1
            )));
        }
        if mu.len() != p {
            return Err(Error::InvalidModel(format!(
                "mu has {} entries, expected p = {p}",
                mu.len()
            )));
        }
        if gamma.len() != p {
            return Err(Error::InvalidModel(format!(
                "gamma has {} entries, expected p = {p}",
                gamma.len()
            )));
        }
        for (name, v) in [("lambda", &lambda), ("mu", &mu), ("gamma", &gamma)] {
            if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "{name}[{i}] = {x} is not a finite non-negative rate"
                )));
            }
        }
        // Every transient state needs a way forward, otherwise the chain
        // never reaches data loss from there.
        for i in 0..p {
            if lambda[i] == 0.0 && gamma[i] == 0.0 {
                return Err(Error::InvalidModel(format!(
                    "lambda[{i}] is zero and state {i} has no error transition"
                )));
            }
        }
        if lambda[p] == 0.0 {
            return Err(Error::InvalidModel(format!("lambda[{p}] must be positive")));
        }
        Ok(FailureModel {
            n,
            m,
            lambda,
            mu,
            gamma,
        })
    }

    /// Constant failure and repair rates, no error transitions.
    pub fn uniform(m: usize, p: usize, lambda: f64, mu: f64) -> Result<Self> {
        FailureModel::new(m + p, m, vec![lambda; p + 1], vec![mu; p], vec![0.0; p])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.n - self.m
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn has_gamma(&self) -> bool {
        self.gamma.iter().any(|&g| g > 0.0)
    }

    pub(crate) fn first_gamma(&self) -> Option<(usize, f64)> {
        self.gamma.iter().copied().enumerate().find(|&(_, g)| g > 0.0)
    }

    pub(crate) fn require_no_gamma(&self) -> Result<()> {
        match self.first_gamma() {
            Some((index, value)) => Err(Error::GammaNotZero { index, value }),
            None => Ok(()),
        }
    }

    pub(crate) fn require_positive_lambda(&self) -> Result<()> {
        match self.lambda.iter().position(|&l| l == 0.0) {
            Some(i) => Err(Error::InvalidModel(format!(
                "lambda[{i}] is zero; the transform-domain expressions need positive failure rates"
            ))),
            None => Ok(()),
        }
    }

    /// `λ_i (n - i)`: total failure rate out of the `i`-failures state.
    pub fn forward_rate(&self, i: usize) -> f64 {
        self.lambda[i] * (self.n - i) as f64
    }

    /// Same data-disk count, only the first `l` parities (`n' = m + l`).
    pub fn with_parity(&self, l: usize) -> Result<Self> {
        if l == 0 || l > self.p() {
            return Err(Error::IndexOutOfRange {
                index: l,
                max: self.p(),
            });
        }
        FailureModel::new(
            self.m + l,
            self.m,
            self.lambda[..=l].to_vec(),
            self.mu[..l].to_vec(),
            self.gamma[..l].to_vec(),
        )
    }

    /// Same total disk count, `l` parities (`m' = n - l`).
    pub fn with_parity_fixed_n(&self, l: usize) -> Result<Self> {
        if l == 0 || l > self.p() {
            return Err(Error::IndexOutOfRange {
                index: l,
                max: self.p(),
            });
        }
        FailureModel::new(
            self.n,
            self.n - l,
            self.lambda[..=l].to_vec(),
            self.mu[..l].to_vec(),
            self.gamma[..l].to_vec(),
        )
    }

    /// Every rate multiplied by `c`; MTTDL scales by `1 / c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale factor {c} must be positive")));
        }
        let s = |v: &[f64]| v.iter().map(|x| x * c).collect::<Vec<_>>();
        FailureModel::new(self.n, self.m, s(&self.lambda), s(&self.mu), s(&self.gamma))
    }

    pub fn with_gamma(&self, gamma: Vec<f64>) -> Result<Self> {
        FailureModel::new(self.n, self.m, self.lambda.clone(), self.mu.clone(), gamma)
    }

    pub fn with_rates(&self, lambda: Vec<f64>, mu: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        FailureModel::new(self.n, self.m, lambda, mu, gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    LinearSolve,
    Recursion,
    UpperBound,
    MonteCarlo,
}

/// An MTTDL value with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MttdlEstimate {
    pub hours: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_halfwidth: Option<f64>,
}

impl MttdlEstimate {
    pub(crate) fn analytic(hours: f64, method: Method) -> Self {
        debug_assert!(method != Method::MonteCarlo);
        MttdlEstimate {
            hours,
            method,
            ci_halfwidth: None,
        }
    }

    pub fn monte_carlo(hours: f64, ci_halfwidth: f64) -> Self {
        MttdlEstimate {
            hours,
            method: Method::MonteCarlo,
            ci_halfwidth: Some(ci_halfwidth),
        }
    }
}

/// Starting-state probabilities `[ε_{m+p}, …, ε_m, ε_F]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialDistribution {
    eps: Vec<f64>,
}

impl InitialDistribution {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least two entries, got {}",
                eps.len()
            )));
        }
        if let Some((i, e)) = eps
            .iter()
            .enumerate()
            .find(|(_, e)| !(0.0..=1.0).contains(*e))
        {
            return Err(Error::InvalidDistribution(format!("eps[{i}] = {e} outside [0, 1]")));
        }
        let total = crate::numeric::compensated_sum(eps.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}, not 1")));
        }
        Ok(InitialDistribution { eps })
    }

    /// All mass on the fully operational state.
    pub fn healthy(p: usize) -> Self {
        let mut eps = vec![0.0; p + 2];
        eps[0] = 1.0;
        InitialDistribution { eps }
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Parity count this distribution is sized for.
    pub fn p(&self) -> usize {
        self.eps.len() - 2
    }

    pub fn failed(&self) -> f64 {
        self.eps[self.eps.len() - 1]
    }
}
