//! Subtraction-free elimination for Markov-chain linear systems.
//!
//! Both solvers work on the off-diagonal rates of a generator and rebuild
//! every pivot from non-negative quantities, which keeps full relative
//! accuracy on stiff chains where ordinary LU loses all digits.

use crate::error::{Error, Result};

/// Expected time to absorption from every transient state.
///
/// `rates[i][j]` (`i != j`) is the transition rate from transient state `i`
/// to transient state `j`; the diagonal is ignored. `absorb[i]` is the total
/// rate from `i` into the absorbing set.
pub fn absorption_times(rates: &[Vec<f64>], absorb: &[f64]) -> Result<Vec<f64>> {
    let t = absorb.len();
    if rates.len() != t || rates.iter().any(|r| r.len() != t) {
        return Err(Error::DimensionMismatch(format!(
            "rate matrix must be {t}x{t}"
        )));
    }
    let mut q: Vec<Vec<f64>> = rates.to_vec();
    let mut a = absorb.to_vec();
    let mut rhs = vec![1.0; t];
    let mut pivots = vec![0.0; t];

    for k in (0..t).rev() {
        let d = a[k] + (0..k).map(|j| q[k][j]).sum::<f64>();
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::SingularMatrix { pivot: k });
        }
        pivots[k] = d;
        for i in 0..k {
            let w = q[i][k] / d;
            if w == 0.0 {
                continue;
            }
            for j in 0..k {
                if j != i {
                    q[i][j] += w * q[k][j];
                }
            }
            a[i] += w * a[k];
            rhs[i] += w * rhs[k];
        }
    }

    let mut tau = vec![0.0; t];
    for k in 0..t {
        let s: f64 = (0..k).map(|j| q[k][j] * tau[j]).sum();
        tau[k] = (rhs[k] + s) / pivots[k];
    }
    Ok(tau)
}

/// Stationary distribution of an irreducible generator given by its
/// off-diagonal rates (Grassmann–Taksar–Heyman).
pub fn stationary_distribution(rates: &[Vec<f64>]) -> Result<Vec<f64>> {
    let t = rates.len();
    if t == 0 || rates.iter().any(|r| r.len() != t) {
        return Err(Error::DimensionMismatch(
            "rate matrix must be square and non-empty".into(),
        ));
    }
    let mut q: Vec<Vec<f64>> = rates.to_vec();
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    let mut out = vec![0.0; t];
    for k in (1..t).rev() {
        let s: f64 = (0..k).map(|j| q[k][j]).sum();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::SingularMatrix { pivot: k });
        }
        out[k] = s;
        for i in 0..k {
            let w = q[i][k] / s;
            if w == 0.0 {
                continue;
            }
            for j in 0..k {
                if j != i {
                    q[i][j] += w * q[k][j];
                }
            }
        }
    }
    let mut pi = vec![0.0; t];
    pi[0] = 1.0;
    for k in 1..t {
        let inflow: f64 = (0..k).map(|i| pi[i] * q[i][k]).sum();
        pi[k] = inflow / out[k];
    }
    let total: f64 = pi.iter().sum();
    for x in &mut pi {
        *x /= total;
    }
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_stage_series() {
        // 0 -> 1 at rate 2, 1 -> absorbed at rate 3.
        let tau = absorption_times(&[vec![0.0, 2.0], vec![0.0, 0.0]], &[0.0, 3.0]).unwrap();
        assert!((tau[0] - (0.5 + 1.0 / 3.0)).abs() < 1e-15);
        assert!((tau[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unreachable_absorption_is_singular() {
        let r = absorption_times(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[0.0, 0.0]);
        assert!(matches!(r, Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn stiff_chain_keeps_precision() {
        // Birth-death with tiny failure and huge repair rates; the answer
        // has a closed form: 1/l0 * (1 + r/l1) + 1/l1 for r = repair.
        let (l0, l1, r) = (1e-9, 1e-9, 1e6);
        let tau = absorption_times(&[vec![0.0, l0], vec![r, 0.0]], &[0.0, l1]).unwrap();
        let exact = (l0 + l1 + r) / (l0 * l1);
        assert!((tau[0] - exact).abs() / exact < 1e-14);
    }

    #[test]
    fn stationary_two_state() {
        let pi = stationary_distribution(&[vec![0.0, 1.0], vec![3.0, 0.0]]).unwrap();
        assert!((pi[0] - 0.75).abs() < 1e-15);
        assert!((pi[1] - 0.25).abs() < 1e-15);
    }
}
