//! Failure-chain construction and the MTTDL routines built on it.
//!
//! States are indexed by failure count `0..=p`; index `p + 1` is data loss.

use crate::error::{Error, Result};
use crate::model::{FailureModel, InitialDistribution, Method, MttdlEstimate};
use crate::numeric::{compensated_sum, DoubleDouble};
use crate::solver;

/// Dense `(p + 2) x (p + 2)` transform-domain matrix `A(s)`.
///
/// Column `j` collects the outflow of state `j`, so off-diagonal entries are
/// negated rates into the row's state.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    s: f64,
    size: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    fn set(&mut self, row: usize, col: usize, v: f64) {
        self.entries[row * self.size + col] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.size)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size).map(|i| self.get(i, i)).collect()
    }
}

pub fn build_transition_matrix(model: &FailureModel, s: f64) -> TransitionMatrix {
    let p = model.p();
    let size = p + 2;
    let mut a = TransitionMatrix {
        s,
        size,
        entries: vec![0.0; size * size],
    };
    let (mu, gamma) = (model.mu(), model.gamma());
    for i in 0..=p {
        let repair = if i > 0 { i as f64 * mu[i - 1] } else { 0.0 };
        let error = if i < p { gamma[i] } else { 0.0 };
        a.set(i, i, s + model.forward_rate(i) + repair + error);
        if i > 0 {
            a.set(0, i, -repair);
        }
        if i < p {
            a.set(i + 1, i, -model.forward_rate(i));
            a.set(p + 1, i, -gamma[i]);
        }
    }
    a.set(p + 1, p, -model.forward_rate(p));
    a.set(p + 1, p + 1, s);
    a
}

/// Sum of the solution of `A_{p+1}(0) x = e_0`.
///
/// The transient block is solved through its transpose (expected absorption
/// times), which has the same value at the starting state.
pub fn mttdl_linear_solve(model: &FailureModel) -> Result<MttdlEstimate> {
    let a = build_transition_matrix(model, 0.0);
    let t = model.p() + 1;
    let rates: Vec<Vec<f64>> = (0..t)
        .map(|from| {
            (0..t)
                .map(|to| if to == from { 0.0 } else { -a.get(to, from) })
                .collect()
        })
        .collect();
    let absorb: Vec<f64> = (0..t).map(|from| -a.get(t, from)).collect();
    let tau = solver::absorption_times(&rates, &absorb)?;
    Ok(MttdlEstimate::analytic(tau[0], Method::LinearSolve))
}

/// Row `x` of the masked rate array: `λ_j(n - j)`, plus `jμ_{j-1} + γ_j`
/// for every `j >= x`.
pub fn lambda_array(model: &FailureModel, x: usize) -> Result<Vec<f64>> {
    let p = model.p();
    if x >= p {
        return Err(Error::IndexOutOfRange {
            index: x,
            max: p - 1,
        });
    }
    Ok((0..p).map(|j| model.forward_rate(j) + masked_extra(model, x, j)).collect())
}

fn masked_extra(model: &FailureModel, x: usize, j: usize) -> f64 {
    if j < x {
        return 0.0;
    }
    let repair = if j > 0 { j as f64 * model.mu()[j - 1] } else { 0.0 };
    repair + model.gamma()[j]
}

/// Numerator of the closed form divided by `Π_{i=0}^p λ_i(n-i)`.
///
/// Evaluated as ratios `Λ_x(j) / f_j >= 1` so that long products neither
/// underflow nor overflow.
fn scaled_numerator(model: &FailureModel) -> f64 {
    let p = model.p();
    let f: Vec<f64> = (0..=p).map(|i| model.forward_rate(i)).collect();
    let tail = compensated_sum((0..p).map(|x| {
        let prod: f64 = (0..p)
            .filter(|&j| j != x)
            .map(|j| 1.0 + masked_extra(model, x, j) / f[j])
            .product();
        prod / f[x]
    }));
    let exit = p as f64 * model.mu()[p - 1] + f[p];
    exit / f[p] * tail + 1.0 / f[p]
}

/// Transform-domain closed form, exact when no error transitions exist.
pub fn mttdl_closed_form(model: &FailureModel) -> Result<MttdlEstimate> {
    model.require_no_gamma()?;
    Ok(MttdlEstimate::analytic(scaled_numerator(model), Method::ClosedForm))
}

/// Default correction constants `[ξ_1, ξ_2, ξ_3]` (shorter for `p < 3`).
pub fn default_xi(model: &FailureModel) -> Vec<f64> {
    let xi = [0.0, 0.0, model.gamma()[0] * model.mu()[0]];
    xi[..model.p().min(3)].to_vec()
}

fn xi_value(model: &FailureModel, xi: &[f64], t: usize) -> Result<f64> {
    if let Some(&v) = xi.get(t - 1) {
        return Ok(v);
    }
    match t {
        1 | 2 => Ok(0.0),
        3 => Ok(model.gamma()[0] * model.mu()[0]),
        _ if model.gamma()[t - 1] == 0.0 => Ok(0.0),
        _ => Err(Error::UnknownXi { t }),
    }
}

/// `φ_p(0) = P_p (1 + δ_p)` with `P_p = Π λ_i(n - i)`; returns `(P_p, δ_p)`.
///
/// `δ` follows the denominator recursion divided through by `P_t`:
/// `δ_t = (g_t / f_t) [δ_{t-1} + γ_{t-1}(Π_{i<=t-2}(1 + γ_i/f_i) / f_{t-1} + ξ_t / P_{t-1})]`
/// with `g_t = tμ_{t-1} + f_t`. Every term is non-negative.
fn phi_parts(model: &FailureModel, xi: Option<&[f64]>) -> Result<(f64, DoubleDouble)> {
    model.require_positive_lambda()?;
    let p = model.p();
    let f: Vec<f64> = (0..=p).map(|i| model.forward_rate(i)).collect();
    let (mu, gamma) = (model.mu(), model.gamma());

    let mut delta = DoubleDouble::ZERO;
    let mut prefix = DoubleDouble::ONE; // Π_{i<=t-2} (1 + γ_i / f_i)
    let mut p_prev = DoubleDouble::from(f[0]); // P_{t-1}
    for t in 1..=p {
        let g = t as f64 * mu[t - 1] + f[t];
        let ratio = DoubleDouble::from(g) / DoubleDouble::from(f[t]);
        let mut inner = prefix / DoubleDouble::from(f[t - 1]);
        if let Some(xi) = xi {
            let x = xi_value(model, xi, t)?;
            if gamma[t - 1] > 0.0 && x != 0.0 {
                inner = inner + DoubleDouble::from(x) / p_prev;
            }
        }
        delta = ratio * (delta + inner * gamma[t - 1]);
        prefix = prefix * (DoubleDouble::ONE + DoubleDouble::from(gamma[t - 1]) / DoubleDouble::from(f[t - 1]));
        p_prev = p_prev * f[t];
    }
    Ok((p_prev.to_f64(), delta))
}

/// Denominator `φ_p(0)` from the recursion with caller-supplied `ξ_t`.
///
/// `xi[t - 1]` is `ξ_t`. Missing entries fall back to the known values for
/// `t <= 3`; beyond that they are only needed when `γ_{t-1} > 0`.
pub fn phi_recursive(model: &FailureModel, xi: &[f64]) -> Result<f64> {
    let (prod, delta) = phi_parts(model, Some(xi))?;
    Ok(prod * (1.0 + delta.to_f64()))
}

/// Underestimator `φ*_p(0)`: the same recursion with every `ξ_t = 0`.
pub fn phi_star(model: &FailureModel) -> Result<f64> {
    let (prod, delta) = phi_parts(model, None)?;
    Ok(prod * (1.0 + delta.to_f64()))
}

/// `φ_p(0) - φ*_p(0)`, differenced in extended precision.
///
/// The gap is often sixteen or more orders of magnitude below `φ` itself, so
/// subtracting the two `f64` results would leave only rounding noise.
pub fn phi_gap(model: &FailureModel, xi: &[f64]) -> Result<f64> {
    let (prod, delta) = phi_parts(model, Some(xi))?;
    let (_, delta_star) = phi_parts(model, None)?;
    Ok(prod * (delta - delta_star).to_f64())
}

/// Closed-form numerator over `φ*_p(0)`; never below the true MTTDL.
pub fn mttdl_upper_bound(model: &FailureModel) -> Result<MttdlEstimate> {
    let (_, delta) = phi_parts(model, None)?;
    let hours = scaled_numerator(model) / (1.0 + delta.to_f64());
    Ok(MttdlEstimate::analytic(hours, Method::UpperBound))
}

/// Closed-form numerator over the recursive `φ_p(0)`.
///
/// Exact whenever every required `ξ_t` is known. If one is missing the
/// bound over `φ*` is returned and tagged as such.
pub fn mttdl_transform(model: &FailureModel, xi: &[f64]) -> Result<MttdlEstimate> {
    match phi_parts(model, Some(xi)) {
        Ok((_, delta)) => Ok(MttdlEstimate::analytic(
            scaled_numerator(model) / (1.0 + delta.to_f64()),
            Method::ClosedForm,
        )),
        Err(Error::UnknownXi { .. }) => mttdl_upper_bound(model),
        Err(e) => Err(e),
    }
}

/// One step of the fixed-`n` parity recursion.
///
/// `model` is the `p`-parity configuration that `current` describes and
/// `model_next` has one data disk turned into parity. Rates of the shared
/// states must agree.
pub fn mttdl_recursive_step(
    current: &MttdlEstimate,
    model: &FailureModel,
    model_next: &FailureModel,
) -> Result<MttdlEstimate> {
    if model.n() != model_next.n() {
        return Err(Error::DimensionMismatch(format!(
            "n changes from {} to {}",
            model.n(),
            model_next.n()
        )));
    }
    if model_next.m() + 1 != model.m() || model_next.m() < 1 {
        return Err(Error::DimensionMismatch(format!(
            "next model must have m - 1 = {} data disks, has {}",
            model.m() as isize - 1,
            model_next.m()
        )));
    }
    model.require_no_gamma()?;
    model_next.require_no_gamma()?;
    let p = model.p();
    if model_next.lambda()[..=p] != *model.lambda() || model_next.mu()[..p] != *model.mu() {
        return Err(Error::DimensionMismatch(
            "rates of the shared states differ between the two models".into(),
        ));
    }
    let hours = next_hours(current.hours, model_next);
    Ok(MttdlEstimate::analytic(hours, Method::Recursion))
}

fn next_hours(current: f64, model_next: &FailureModel) -> f64 {
    let q = model_next.p();
    let last = model_next.forward_rate(q); // λ_{p+1}(m - 1)
    current * (1.0 + q as f64 * model_next.mu()[q - 1] / last) + 1.0 / last
}

/// MTTDL by seeding the single-parity result at the model's `n` and
/// applying the parity recursion up to `p`.
pub fn mttdl_recursion(model: &FailureModel) -> Result<MttdlEstimate> {
    model.require_no_gamma()?;
    let (f0, f1) = (model.forward_rate(0), model.forward_rate(1));
    let mut hours = (f0 + model.mu()[0] + f1) / (f0 * f1);
    for q in 2..=model.p() {
        hours = next_hours(hours, &model.with_parity_fixed_n(q)?);
    }
    Ok(MttdlEstimate::analytic(hours, Method::Recursion))
}

/// MTTDL when the group may start with failed disks.
///
/// `eps[p - l]` weights a fresh group with the same `m` and `l` parities;
/// `l = 0` is a bare stripe with MTTDL `1/(mλ_0)`.
pub fn mttdl_with_initial_distribution(
    model: &FailureModel,
    eps: &InitialDistribution,
) -> Result<MttdlEstimate> {
    let p = model.p();
    if eps.p() != p {
        return Err(Error::InvalidDistribution(format!(
            "distribution has {} entries, model needs p + 2 = {}",
            eps.eps().len(),
            p + 2
        )));
    }
    let exact = !model.has_gamma();
    let method = if exact { Method::ClosedForm } else { Method::LinearSolve };
    let mut terms = Vec::with_capacity(p + 1);
    for l in 0..=p {
        let w = eps.eps()[p - l];
        if w == 0.0 {
            continue;
        }
        let hours = if l == 0 {
            1.0 / (model.m() as f64 * model.lambda()[0])
        } else {
            let sub = model.with_parity(l)?;
            if exact {
                mttdl_closed_form(&sub)?.hours
            } else {
                mttdl_linear_solve(&sub)?.hours
            }
        };
        terms.push(w * hours);
    }
    Ok(MttdlEstimate::analytic(compensated_sum(terms), method))
}
