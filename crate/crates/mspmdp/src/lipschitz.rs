//! Coefficient recursions that turn regularity data into Lipschitz
//! constants of value functions, feasible sets and optimal values.
//!
//! Tables are indexed by stage: entry `t` belongs to stage `t`, and
//! entries that have no meaning (such as `L_0`) are stored as zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Growth, Regularity};

/// `L_t` of `v_t` in `(s_{t-1}, x_{t-1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunctionConstants {
    /// `L_{X,t} = A L_{g,t} / rho`, `t = 0..=T`.
    pub l_x: Vec<f64>,
    /// `L_t`, `t = 0..=T+1` with `L_{T+1} = 0`.
    pub l: Vec<f64>,
}

pub fn value_function_constants(reg: &Regularity) -> Result<ValueFunctionConstants> {
    let t_max = reg.horizon;
    let mut l_x = vec![0.0; t_max + 1];
    for t in 1..=t_max {
        l_x[t] = reg.ratio(reg.l_g[t])?;
    }
    let mut l = vec![0.0; t_max + 2];
    for t in (1..=t_max).rev() {
        let l_s = reg.l_s[t - 1];
        l[t] = (reg.l_c[t] + l[t + 1]) * l_s + l_x[t] + l_x[t] * l_s;
    }
    Ok(ValueFunctionConstants { l_x, l })
}

/// Lipschitz moduli of the feasible-set mapping under exogenous
/// perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSetConstants {
    /// `L_{X,t}`, `t = 0..=T` with `L_{X,0} = 0`.
    pub l_x: Vec<f64>,
    /// `l_{s,t}`, `t = 0..=T+1` with `l_{s,0} = l_{s,1} = 0`.
    pub l_s: Vec<f64>,
    /// `L_{X,t}` from the characteristic-root closed form.
    pub closed_form: Vec<f64>,
    /// Roots of `r^2 - (a L_S + a + L_S) r + a L_S = 0`, `a = A L_g / rho`.
    pub roots: Option<(f64, f64)>,
    /// True on the branch `1 - a - L_S = 0`.
    pub critical: bool,
}

/// Closed form of `L_{X,t}` for scalar `a = A L_g / rho` and `L_S`.
pub fn feasible_set_closed_form(a: f64, l_s: f64, t: usize) -> (f64, Option<(f64, f64)>, bool) {
    if a == 0.0 {
        return (0.0, None, false);
    }
    let c = 1.0 - a - l_s;
    let tf = t as f64;
    if c.abs() < 1e-12 {
        let al = a * l_s;
        let v = a * a * l_s / (1.0 - al).powi(2) * (al.powi(t as i32) - 1.0) + a * tf / (1.0 - al);
        return (v, None, true);
    }
    let p = a * l_s + a + l_s;
    let disc = (p * p - 4.0 * a * l_s).max(0.0).sqrt();
    let (r1, r2) = (0.5 * (p + disc), 0.5 * (p - disc));
    let e = t as i32 + 1;
    let v = a / (c * (r1 - r2)) * ((r2 - 1.0) * r1.powi(e) - (r1 - 1.0) * r2.powi(e)) + a / c;
    (v, Some((r1, r2)), false)
}

pub fn feasible_set_constants(reg: &Regularity) -> Result<FeasibleSetConstants> {
    let t_max = reg.horizon;
    let a = reg.ratio(reg.max_l_g())?;
    let l_s_mod = reg.max_l_s();
    let mut l_x = vec![0.0; t_max + 1];
    let mut l_s = vec![0.0; t_max + 2];
    for t in 1..=t_max {
        l_x[t] = a * (l_s[t] + l_x[t - 1] + 1.0);
        l_s[t + 1] = l_s_mod * (l_s[t] + l_x[t] + 1.0);
    }
    let mut closed_form = vec![0.0; t_max + 1];
    let mut roots = None;
    let mut critical = false;
    for (t, slot) in closed_form.iter_mut().enumerate().skip(1) {
        let (v, r, c) = feasible_set_closed_form(a, l_s_mod, t);
        let rec = l_x[t];
        debug_assert!(
            (v - rec).abs() <= 1e-9 * rec.abs().max(1.0),
            "closed form {v} disagrees with recursion {rec} at t = {t}"
        );
        *slot = v;
        roots = r;
        critical = c;
    }
    Ok(FeasibleSetConstants {
        l_x,
        l_s,
        closed_form,
        roots,
        critical,
    })
}

/// Coefficients of the bounds under endogenous perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndogenousCoeffs {
    /// `L-hat_t`, `t = 0..=T` (entry 0 unused).
    pub l_hat: Vec<f64>,
    /// `L_{X,t} = A L_{g,t} L_S / rho`, `t = 0..=T`.
    pub l_x: Vec<f64>,
    /// `L_t` of the value functions, `t = 0..=T+1`.
    pub l: Vec<f64>,
    /// `L_{X,t,j}` stored at `[t][j]` for `j < t`.
    pub l_x_tj: Vec<Vec<f64>>,
    /// `H_t`, `t = 0..=T`.
    pub h: Vec<f64>,
    pub l_c: f64,
}

pub fn endogenous_coeffs(reg: &Regularity) -> Result<EndogenousCoeffs> {
    let t_max = reg.horizon;
    let l_c = reg.max_l_c();
    let l_s = reg.max_l_s();
    let vf = value_function_constants(reg)?;
    let l = vf.l;
    let mut l_x = vec![0.0; t_max + 1];
    for t in 1..=t_max {
        l_x[t] = reg.ratio(reg.l_g[t])? * l_s;
    }
    let mut l_hat = vec![0.0; t_max + 1];
    for t in 1..=t_max {
        l_hat[t] = l_c * l_s + l_c * l_x[t] + l_c + l[t + 1] * l_s + l[t + 1] * l_x[t];
    }
    let mut tj = vec![vec![0.0; t_max + 1]; t_max + 1];
    for t in 1..=t_max {
        let k_t = reg.ratio(reg.l_g[t])?;
        tj[t][t - 1] = k_t * l_s;
        for j in (0..t.saturating_sub(1)).rev() {
            let mut inner = tj[t - 1][j] + l_s.powi((t - j) as i32);
            for k in (j + 1)..t {
                inner += l_s.powi((t - 1 - k) as i32) * tj[k][j];
            }
            tj[t][j] = k_t * inner;
        }
    }
    let mut h = vec![0.0; t_max + 1];
    h[t_max] = l_c;
    for t in 0..t_max {
        let mut v = l_hat[t + 1] + l_c;
        v += l_c * ((t + 1)..=t_max).map(|k| tj[k][t]).sum::<f64>();
        for k in 1..t_max.saturating_sub(t) {
            for ll in (k + t + 1)..=t_max {
                v += l_c * l_s.powi(k as i32) * tj[ll - k][t];
            }
        }
        v += l_c * (1..=(t_max - t)).map(|k| l_s.powi(k as i32)).sum::<f64>();
        h[t] = v;
    }
    Ok(EndogenousCoeffs {
        l_hat,
        l_x,
        l,
        l_x_tj: tj,
        h,
        l_c,
    })
}

/// Coefficients of the global bounds under exogenous perturbations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousGlobalCoeffs {
    pub l_theta: f64,
    pub l_sigma_1: f64,
    pub l_sigma_2: f64,
    pub l_sigma: f64,
    /// `max_t L_{X,t}`.
    pub l_x: f64,
}

fn geometric(l: f64, from: usize, to: usize) -> f64 {
    (from..=to).map(|k| l.powi(k as i32)).sum()
}

pub fn exogenous_global_coeffs(reg: &Regularity) -> Result<ExogenousGlobalCoeffs> {
    let t_max = reg.horizon;
    let l_c = reg.max_l_c();
    let l_s = reg.max_l_s();
    let fs = feasible_set_constants(reg)?;
    let l_x = fs.l_x.iter().copied().fold(0.0, f64::max);
    let tf = t_max as f64;
    let inner: f64 = (1..=t_max)
        .map(|t| {
            if t >= 2 {
                geometric(l_s, 1, t - 1)
            } else {
                0.0
            }
        })
        .sum();
    let l_theta = tf * l_c * (l_x + 1.0) + l_c * (l_x + 1.0) * inner;
    let l_sigma_1 = l_c * (tf + 1.0 + (1..=t_max).map(|t| geometric(l_s, 1, t)).sum::<f64>());
    let l_sigma_2 = l_c * (tf + 1.0 + tf * (tf + 1.0) / 2.0);
    Ok(ExogenousGlobalCoeffs {
        l_theta,
        l_sigma_1,
        l_sigma_2,
        l_sigma: l_sigma_1.max(l_sigma_2),
        l_x,
    })
}

/// Coefficients of the stagewise bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagewiseCoeffs {
    /// `L_{v,t}`, `t = 0..=T+1` with `L_{v,T+1} = 0` (entry 0 unused).
    pub l_v: Vec<f64>,
    /// `L_{xi,t}`, `t = 0..=T` (entry 0 unused).
    pub l_xi: Vec<f64>,
    /// `L_{X,t}` used above.
    pub l_x: Vec<f64>,
    /// `L_{Q,t}`, `t = 0..=T+1` with `L_{Q,T+1} = 0` (entry 0 unused).
    pub l_q: Vec<f64>,
}

/// `l_q[t-1]` is the kernel modulus `L_{Q,t}` of stage `t = 1..=T`.
pub fn stagewise_coeffs(reg: &Regularity, l_q: &[f64]) -> Result<StagewiseCoeffs> {
    let t_max = reg.horizon;
    if l_q.len() != t_max {
        return Err(Error::MissingRegularity("l_q"));
    }
    let a = reg.ratio(reg.max_l_g())?;
    let l_s = reg.max_l_s();
    let fs = feasible_set_constants(reg)?;
    let mut q = vec![0.0f64; t_max + 2];
    q[1..=t_max].copy_from_slice(l_q);
    let mut l_v = vec![0.0f64; t_max + 2];
    for t in (1..=t_max).rev() {
        let next = l_v[t + 1].max(l_v[t + 1] * q[t + 1]);
        l_v[t] = (reg.l_c[t] + next) * (a + 1.0) * (l_s + 1.0);
    }
    let mut l_xi = vec![0.0; t_max + 1];
    for t in 1..=t_max {
        l_xi[t] = reg.l_c[t] * (fs.l_x[t] + 1.0) + l_v[t + 1] * (fs.l_x[t] + q[t + 1]);
    }
    Ok(StagewiseCoeffs {
        l_v,
        l_xi,
        l_x: fs.l_x,
        l_q: q,
    })
}

/// Quadratic growth with `beta = mu` from strong convexity modulus `mu`.
pub fn growth_from_strong_convexity(mu: f64) -> Result<Growth> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidModulus(mu));
    }
    Ok(Growth { beta: mu, nu: 2.0 })
}

/// Every coefficient the bounds need, in one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantTable {
    pub value_function: ValueFunctionConstants,
    pub feasible_set: FeasibleSetConstants,
    pub endogenous: EndogenousCoeffs,
    pub exogenous_global: ExogenousGlobalCoeffs,
    pub stagewise: Option<StagewiseCoeffs>,
}

impl ConstantTable {
    pub fn compute(reg: &Regularity) -> Result<Self> {
        Ok(ConstantTable {
            value_function: value_function_constants(reg)?,
            feasible_set: feasible_set_constants(reg)?,
            endogenous: endogenous_coeffs(reg)?,
            exogenous_global: exogenous_global_coeffs(reg)?,
            stagewise: match &reg.l_q {
                Some(q) => Some(stagewise_coeffs(reg, q)?),
                None => None,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(l_c: f64, l_s: f64, l_g: f64, rho: f64, a: f64, t: usize) -> Regularity {
        Regularity::uniform(t, l_c, l_s, l_g, rho, a)
    }

    #[test]
    fn box_only_value_constants() {
        let r = reg(2.0, 1.0, 0.0, 1.0, 10.0, 2);
        let vf = value_function_constants(&r).unwrap();
        assert_eq!(vf.l_x, vec![0.0, 0.0, 0.0]);
        assert_eq!(vf.l[2], 2.0);
        assert_eq!(vf.l[3], 0.0);
    }

    #[test]
    fn one_stage_value_constant() {
        let vf = value_function_constants(&reg(2.0, 1.0, 1.0, 40.0, 10.0, 1)).unwrap();
        assert_eq!(vf.l_x[1], 0.25);
        assert_eq!(vf.l[1], 2.5);
    }

    #[test]
    fn l_hat_single_stage() {
        let e = endogenous_coeffs(&reg(2.0, 1.0, 1.0, 40.0, 10.0, 1)).unwrap();
        assert_eq!(e.l_hat[1], 4.5);
        assert_eq!(e.h[1], 2.0);
    }

    #[test]
    fn closed_form_branches() {
        // a = 0.25, L_S = 1
        assert!((feasible_set_closed_form(0.25, 1.0, 1).0 - 0.25).abs() < 1e-12);
        assert!((feasible_set_closed_form(0.25, 1.0, 2).0 - 0.625).abs() < 1e-12);
        // critical branch: a + L_S = 1
        let (v, _, crit) = feasible_set_closed_form(0.5, 0.5, 2);
        assert!(crit);
        // recursion: L_X1 = .5, l_s2 = .5 * 1.5 = .75, L_X2 = .5 (0.75 + 0.5 + 1)
        assert!((v - 1.125).abs() < 1e-12);
    }

    #[test]
    fn sigma_two() {
        let g = exogenous_global_coeffs(&reg(2.0, 1.0, 0.0, 1.0, 10.0, 2)).unwrap();
        assert_eq!(g.l_sigma_2, 12.0);
        // L_S = 1: T L_C (L_X + 1) + T (T - 1) L_C (L_X + 1) / 2
        assert_eq!(g.l_theta, 2.0 * 2.0 + 2.0 * 2.0 / 2.0);
    }

    #[test]
    fn growth_rejects_nonpositive() {
        assert_eq!(
            growth_from_strong_convexity(0.5).unwrap(),
            Growth { beta: 0.5, nu: 2.0 }
        );
        assert!(growth_from_strong_convexity(0.0).is_err());
    }
}
