//! Zero-forcing directions and robust max-min power loading.
//!
//! The robust constraint for user `k` scales the expected leakage from the
//! other beams by `a`:
//!
//! ```text
//! g_k beta_k / gamma - a sigma_ek^2 sum_{j != k} beta_j >= sigma_k^2
//! ```
//!
//! Stacked, that is `A beta >= sigma^2` with `A` diagonal plus a rank-one
//! term, so the power needed to meet a common target collapses to the scalar
//! condition
//!
//! ```text
//! sum_k gamma (sigma_k^2 + P_t a sigma_ek^2) / (g_k + a sigma_ek^2 gamma) <= P_t
//! ```
//!
//! which is increasing in `gamma`; the max-min target is found by bisection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const UNIT_NORM_TOL: f64 = 1e-9;
const MAX_CONDITION: f64 = 1e8;

/// Default relative tolerance of the bisection on the SINR target.
pub const DEFAULT_GAMMA_TOL: f64 = 1e-8;

/// Unit-norm beam directions with their power loads and the design point
/// (common SINR target and interference scale factor) they were solved for.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformDesign {
    directions: Vec<DVector<Complex64>>,
    powers: Vec<f64>,
    gamma: f64,
    a: f64,
}

impl BeamformDesign {
    pub fn new(
        directions: Vec<DVector<Complex64>>,
        powers: Vec<f64>,
        gamma: f64,
        a: f64,
    ) -> Result<Self> {
        if directions.is_empty() || directions.len() != powers.len() {
            return Err(Error::invalid(format!(
                "{} directions for {} powers",
                directions.len(),
                powers.len()
            )));
        }
        let n = directions[0].len();
        for (k, u) in directions.iter().enumerate() {
            if u.len() != n {
                return Err(Error::invalid(format!("direction {k} has length {}, expected {n}", u.len())));
            }
            if (u.norm() - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::invalid(format!("direction {k} is not unit norm ({})", u.norm())));
            }
        }
        if let Some(p) = powers.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::invalid(format!("negative power load {p}")));
        }
        if !(a >= 0.0) {
            return Err(Error::invalid(format!("scale factor must be >= 0, got {a}")));
        }
        if !(gamma >= 0.0) {
            return Err(Error::invalid(format!("SINR target must be >= 0, got {gamma}")));
        }
        Ok(Self {
            directions,
            powers,
            gamma,
            a,
        })
    }

    pub fn directions(&self) -> &[DVector<Complex64>] {
        &self.directions
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n_users(&self) -> usize {
        self.directions.len()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// `sum_{j != user} beta_j u_j u_j^H`.
    pub fn leakage_matrix(&self, user: usize) -> DMatrix<Complex64> {
        let n = self.directions[0].len();
        let mut m = DMatrix::zeros(n, n);
        for (j, (u, &p)) in self.directions.iter().zip(&self.powers).enumerate() {
            if j != user {
                m += u * u.adjoint() * Complex64::from(p);
            }
        }
        m
    }
}

/// Zero-forcing directions: normalized columns of the right pseudo-inverse
/// of the stacked estimates (row `k` is `h_k^H`).
pub fn zf_directions(h_est: &[DVector<Complex64>]) -> Result<Vec<DVector<Complex64>>> {
    let k = h_est.len();
    if k == 0 {
        return Err(Error::invalid("no channel estimates"));
    }
    let n = h_est[0].len();
    if k > n {
        return Err(Error::invalid(format!("{k} users exceed {n} antennas")));
    }
    let h = DMatrix::from_fn(k, n, |r, c| h_est[r][c].conj());
    let sv = h.clone().svd(false, false).singular_values;
    let condition = sv.max() / sv.min();
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let h_adj = h.adjoint();
    let gram_inv = (&h * &h_adj)
        .try_inverse()
        .ok_or(Error::IllConditioned { condition })?;
    let w = h_adj * gram_inv;
    Ok((0..k).map(|j| {
        let col = w.column(j).into_owned();
        let norm = col.norm();
        col.unscale(norm)
    })
    .collect())
}

/// Expected leakage power `E[e^H (sum_{j != k} w_j w_j^H) e]` for
/// `e ~ CN(err_mean, err_cov)`.
pub fn effective_noise(
    design: &BeamformDesign,
    user: usize,
    err_mean: &DVector<Complex64>,
    err_cov: &DMatrix<Complex64>,
) -> f64 {
    design
        .directions
        .iter()
        .zip(&design.powers)
        .enumerate()
        .filter(|(j, _)| *j != user)
        .map(|(_, (u, &p))| {
            let mean_part = u.dotc(err_mean).norm_sqr();
            let cov_part = u.dotc(&(err_cov * u)).re;
            p * (mean_part + cov_part)
        })
        .sum()
}

/// Per-user link quantities entering the max-min power loading.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinProblem {
    /// Signal gains `|h_ek^H u_k|^2`.
    pub gains: Vec<f64>,
    /// Noise powers `sigma_k^2` (including any inter-cell term), watts.
    pub noise: Vec<f64>,
    /// Error powers `sigma_ek^2`, watts.
    pub err_power: Vec<f64>,
    pub total_power: f64,
}

/// Outcome of the scalar power condition at one SINR target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCondition {
    pub feasible: bool,
    /// `1^T A^{-1} sigma^2` by the rank-one inverse; infinite once the
    /// target is past the point where the equality powers stop being positive.
    pub total_power: f64,
    /// Left side of the rearranged condition. Equals `total_power` only on
    /// the boundary, where both equal the budget.
    pub condition_lhs: f64,
}

impl MaxMinProblem {
    pub fn new(gains: Vec<f64>, noise: Vec<f64>, err_power: Vec<f64>, total_power: f64) -> Result<Self> {
        let k = gains.len();
        if k == 0 || noise.len() != k || err_power.len() != k {
            return Err(Error::invalid("gains, noise and err_power must have equal nonzero length"));
        }
        if gains.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::invalid("signal gains must be positive"));
        }
        if noise.iter().any(|s| !(*s > 0.0)) || err_power.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::invalid("noise must be positive and error power nonnegative"));
        }
        if !(total_power > 0.0) {
            return Err(Error::invalid("total power must be positive"));
        }
        Ok(Self {
            gains,
            noise,
            err_power,
            total_power,
        })
    }

    pub fn n_users(&self) -> usize {
        self.gains.len()
    }

    /// Closed-form power condition at a common target `gamma`.
    pub fn condition(&self, gamma: f64, a: f64) -> PowerCondition {
        let p_t = self.total_power;
        let (mut lhs, mut noise_sum, mut leak_sum) = (0.0, 0.0, 0.0);
        for k in 0..self.n_users() {
            let e = a * self.err_power[k];
            // diagonal of B^{-1}
            let b = gamma / (self.gains[k] + e * gamma);
            lhs += b * (self.noise[k] + p_t * e);
            noise_sum += b * self.noise[k];
            leak_sum += b * e;
        }
        let denom = 1.0 - leak_sum;
        PowerCondition {
            feasible: lhs <= p_t,
            total_power: if denom > 0.0 { noise_sum / denom } else { f64::INFINITY },
            condition_lhs: lhs,
        }
    }

    /// `[A]_ii = g_i / gamma`, `[A]_ij = -a sigma_ei^2`.
    pub fn constraint_matrix(&self, gamma: f64, a: f64) -> DMatrix<f64> {
        let k = self.n_users();
        DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                self.gains[i] / gamma
            } else {
                -a * self.err_power[i]
            }
        })
    }

    /// Powers meeting every robust constraint with equality, `A^{-1} sigma^2`.
    pub fn solve_power_loading(&self, gamma: f64, a: f64) -> Result<Vec<f64>> {
        if !(gamma > 0.0) {
            return Err(Error::invalid(format!("SINR target must be positive, got {gamma}")));
        }
        let rhs = DVector::from_column_slice(&self.noise);
        let beta = self
            .constraint_matrix(gamma, a)
            .lu()
            .solve(&rhs)
            .ok_or(Error::InfeasibleTarget { gamma })?;
        if beta.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::InfeasibleTarget { gamma });
        }
        Ok(beta.iter().copied().collect())
    }

    /// Largest common target satisfying the power condition, with its powers.
    pub fn maxmin_gamma(&self, a: f64, tol: f64) -> Result<(f64, Vec<f64>)> {
        if !(tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        let p_t = self.total_power;
        let mut hi = (0..self.n_users())
            .map(|k| p_t * self.gains[k] / self.noise[k])
            .fold(0.0, f64::max);
        while self.condition(hi, a).feasible {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if self.condition(mid, a).feasible {
                lo = mid;
            } else {
                hi = mid;
            }
            let gap_ok = hi - lo <= tol * lo;
            let power_ok = p_t - self.condition(lo, a).total_power <= tol * p_t;
            if gap_ok && power_ok {
                break;
            }
        }
        let powers = self.solve_power_loading(lo, a)?;
        Ok((lo, powers))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_user_zf_is_matched_filter() {
        let h = DVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -0.7)]);
        let u = zf_directions(std::slice::from_ref(&h)).unwrap();
        let expected = h.unscale(h.norm());
        assert_relative_eq!((&u[0] - expected).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_estimates_give_matched_filters() {
        let h1 = DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let h2 = DVector::from_vec(vec![c(0.0, 0.0), c(0.0, -3.0), c(0.0, 0.0)]);
        let u = zf_directions(&[h1.clone(), h2.clone()]).unwrap();
        assert_relative_eq!((&u[0] - h1.unscale(h1.norm())).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!((&u[1] - h2.unscale(h2.norm())).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_estimates_are_rejected() {
        let h1 = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 1.0)]);
        let h2 = h1.scale(2.0);
        assert!(matches!(zf_directions(&[h1, h2]), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn effective_noise_white_error() {
        let e = |i: usize| DVector::from_fn(3, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let design = BeamformDesign::new(vec![e(0), e(1), e(2)], vec![1.0, 2.0, 3.0], 1.0, 0.0).unwrap();
        let s2 = 0.25;
        let cov = DMatrix::<Complex64>::identity(3, 3) * c(s2, 0.0);
        let n = effective_noise(&design, 0, &DVector::zeros(3), &cov);
        assert_relative_eq!(n, s2 * 5.0, epsilon = 1e-14);
        let single = BeamformDesign::new(vec![e(0)], vec![4.0], 1.0, 0.0).unwrap();
        assert_eq!(effective_noise(&single, 0, &DVector::zeros(3), &cov), 0.0);
    }

    #[test]
    fn condition_collapses_without_scaling() {
        let p = MaxMinProblem::new(vec![2.0, 0.5], vec![1.0, 3.0], vec![0.1, 0.2], 10.0).unwrap();
        let gamma = 0.7;
        let expect = gamma * (1.0 / 2.0 + 3.0 / 0.5);
        let cond = p.condition(gamma, 0.0);
        assert_relative_eq!(cond.total_power, expect, max_relative = 1e-14);
        assert_relative_eq!(cond.condition_lhs, expect, max_relative = 1e-14);
        let single = MaxMinProblem::new(vec![2.0], vec![0.5], vec![0.1], 10.0).unwrap();
        let limit = 10.0 * 2.0 / 0.5;
        assert!(single.condition(limit * (1.0 - 1e-12), 0.0).feasible);
        assert!(!single.condition(limit * (1.0 + 1e-12), 0.0).feasible);
    }

    #[test]
    fn two_user_hand_derivation() {
        // g = (1,1), sigma^2 = (1,1), a sigma_e^2 = t: condition is gamma (2 + P_t t) <= P_t
        let (p_t, t) = (5.0, 0.3);
        let p = MaxMinProblem::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![t, t], p_t).unwrap();
        for &gamma in &[0.1, 0.5, 1.0, 1.4] {
            let total = p.condition(gamma, 1.0).total_power;
            // both routes reduce to 2 gamma / (1 - t gamma)
            let direct = 2.0 * gamma / (1.0 - t * gamma);
            assert_relative_eq!(total, direct, max_relative = 1e-13);
            let inv = p.constraint_matrix(gamma, 1.0).try_inverse().unwrap();
            let sum: f64 = (inv * DVector::from_element(2, 1.0)).sum();
            assert_relative_eq!(sum, direct, max_relative = 1e-13);
            assert_eq!(p.condition(gamma, 1.0).feasible, gamma * (2.0 + p_t * t) <= p_t);
        }
    }

    #[test]
    fn unscaled_power_loading_is_diagonal() {
        let p = MaxMinProblem::new(vec![2.0, 0.5, 4.0], vec![1.0, 3.0, 0.2], vec![0.1; 3], 10.0).unwrap();
        let gamma = 0.9;
        let beta = p.solve_power_loading(gamma, 0.0).unwrap();
        for k in 0..3 {
            assert_relative_eq!(beta[k], gamma * p.noise[k] / p.gains[k], max_relative = 1e-14);
        }
    }

    #[test]
    fn maxmin_closed_forms() {
        let single = MaxMinProblem::new(vec![3.0], vec![0.2], vec![0.01], 40.0).unwrap();
        let (g, beta) = single.maxmin_gamma(0.0, 1e-10).unwrap();
        assert_relative_eq!(g, 40.0 * 3.0 / 0.2, max_relative = 1e-9);
        assert_relative_eq!(beta[0], 40.0, max_relative = 1e-9);

        let p = MaxMinProblem::new(vec![2.0, 0.5, 4.0], vec![1.0, 3.0, 0.2], vec![0.1; 3], 10.0).unwrap();
        let (g, _) = p.maxmin_gamma(0.0, 1e-10).unwrap();
        let expect = 10.0 / (1.0 / 2.0 + 3.0 / 0.5 + 0.2 / 4.0);
        assert_relative_eq!(g, expect, max_relative = 1e-9);
    }

    #[test]
    fn infeasible_target_is_an_error() {
        let p = MaxMinProblem::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0], 10.0).unwrap();
        // A = [[1/g, -1], [-1, 1/g]] is singular at gamma = 1 and indefinite beyond
        assert!(matches!(p.solve_power_loading(2.0, 1.0), Err(Error::InfeasibleTarget { .. })));
    }

    #[test]
    fn design_validation() {
        let u = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(BeamformDesign::new(vec![u], vec![1.0], 1.0, 0.0).is_err());
        let u = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(BeamformDesign::new(vec![u.clone()], vec![-1.0], 1.0, 0.0).is_err());
        assert!(BeamformDesign::new(vec![u], vec![1.0], 1.0, -0.5).is_err());
    }
}
