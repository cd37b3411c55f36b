//! Goodput of a fixed-rate downlink under outage with partial HARQ recovery,
//! rate and scale-factor sweeps, and the outage estimators they use.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beamform::{zf_directions, BeamformDesign, MaxMinProblem};
use crate::channel::{complex_normal, covariance_factor, derive_seed, Scenario};
use crate::error::{Error, Result};
use crate::indefinite::{build_q, embed_complex_form, outage_probability, ComplexQuadraticProblem};
use crate::quadform::fit_form;

pub const DEFAULT_ETA: f64 = 0.3;
pub const DEFAULT_RATE_POINTS: usize = 64;
pub const DEFAULT_RATE_LO: f64 = 0.1;
pub const DEFAULT_RATE_HI: f64 = 4.0;
/// Fixed scale factors used for the table and the flatness sweep.
pub const DEFAULT_A_GRID: [f64; 51] = {
    let mut g = [0.0; 51];
    g[0] = 0.5;
    let mut i = 1;
    while i < 51 {
        g[i] = i as f64;
        i += 1;
    }
    g
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutageMethod {
    Alg1,
    Mc,
    ExpA,
    InterferenceOnly,
}

impl OutageMethod {
    pub fn label(self) -> &'static str {
        match self {
            OutageMethod::Alg1 => "alg1",
            OutageMethod::Mc => "mc",
            OutageMethod::ExpA => "exp_a",
            OutageMethod::InterferenceOnly => "interference_only",
        }
    }
}

impl fmt::Display for OutageMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodputPoint {
    /// bits/s/Hz
    pub rate: f64,
    /// Outage probability per user.
    pub outage: Vec<f64>,
    pub goodput_per_user: f64,
    pub method: OutageMethod,
}

impl GoodputPoint {
    pub fn new(rate: f64, outage: Vec<f64>, eta: f64, method: OutageMethod) -> Self {
        let goodput_per_user = goodput(rate, &outage, eta);
        Self {
            rate,
            outage,
            goodput_per_user,
            method,
        }
    }
}

/// Mean per-user goodput `(1/K) sum_k [(1 - d_k) R + eta d_k R]`.
pub fn goodput(rate: f64, delta: &[f64], eta: f64) -> f64 {
    if delta.is_empty() {
        return 0.0;
    }
    let sum: f64 = delta.iter().map(|d| (1.0 - d) * rate + eta * d * rate).sum();
    sum / delta.len() as f64
}

pub fn rate_from_gamma(gamma: f64) -> f64 {
    (1.0 + gamma).log2()
}

pub fn gamma_from_rate(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// Max-min power problem for the given unit directions on a scenario.
pub fn problem_for(scenario: &Scenario, directions: &[DVector<Complex64>]) -> Result<MaxMinProblem> {
    let gains = scenario
        .h_est
        .iter()
        .zip(directions)
        .map(|(h, u)| h.dotc(u).norm_sqr())
        .collect();
    let err_power = (0..scenario.n_users()).map(|k| scenario.err_power(k)).collect();
    MaxMinProblem::new(gains, scenario.noise.clone(), err_power, scenario.total_power)
}

/// Zero-forcing design with the robust max-min powers for scale factor `a`.
pub fn design_for(scenario: &Scenario, a: f64, tol: f64) -> Result<BeamformDesign> {
    let directions = zf_directions(&scenario.h_est)?;
    let problem = problem_for(scenario, &directions)?;
    let (gamma, powers) = problem.maxmin_gamma(a, tol)?;
    BeamformDesign::new(directions, powers, gamma, a)
}

/// Outage event of `user` at target `gamma` for a fixed design.
pub fn user_problem(
    scenario: &Scenario,
    design: &BeamformDesign,
    user: usize,
    gamma: f64,
) -> Result<ComplexQuadraticProblem> {
    ComplexQuadraticProblem::new(
        build_q(design, user, gamma)?,
        scenario.h_est[user].clone(),
        scenario.err_mean[user].clone(),
        scenario.err_cov[user].clone(),
        scenario.noise[user],
    )
}

/// Per-user outage at target `gamma` from the series approximation.
pub fn alg1_outages(scenario: &Scenario, design: &BeamformDesign, gamma: f64, degree: usize) -> Result<Vec<f64>> {
    (0..scenario.n_users())
        .map(|k| outage_probability(&user_problem(scenario, design, k, gamma)?, degree))
        .collect()
}

/// Goodput at each rate with the design's beams and powers held fixed.
/// Failed points are reported individually.
pub fn sweep_rate(
    scenario: &Scenario,
    design: &BeamformDesign,
    rates: &[f64],
    eta: f64,
    degree: usize,
) -> Vec<Result<GoodputPoint>> {
    rates
        .iter()
        .map(|&r| {
            let delta = alg1_outages(scenario, design, gamma_from_rate(r), degree)?;
            Ok(GoodputPoint::new(r, delta, eta, OutageMethod::Alg1))
        })
        .collect()
}

/// Realized SINR of `user` on the true channel `h`.
pub fn sinr(design: &BeamformDesign, user: usize, h: &DVector<Complex64>, noise: f64) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, (u, &p)) in design.directions().iter().zip(design.powers()).enumerate() {
        let g = p * h.dotc(u).norm_sqr();
        if j == user {
            signal = g;
        } else {
            interference += g;
        }
    }
    signal / (interference + noise)
}

/// Monte Carlo goodput: each (user, rate) pair gets its own error stream
/// keyed by `(seed, user, rate index)`.
pub fn mc_goodput(
    scenario: &Scenario,
    design: &BeamformDesign,
    rates: &[f64],
    eta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<GoodputPoint>> {
    if n_samples == 0 {
        return Err(Error::invalid("Monte Carlo needs at least one sample"));
    }
    let n = scenario.n_antennas();
    let factors: Vec<_> = scenario.err_cov.iter().map(covariance_factor).collect();
    let points = rates
        .iter()
        .enumerate()
        .map(|(ri, &r)| {
            let gamma = gamma_from_rate(r);
            let delta = (0..scenario.n_users())
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[k as u64, ri as u64]));
                    let mut fails = 0usize;
                    for _ in 0..n_samples {
                        let z = DVector::from_fn(n, |_, _| complex_normal(&mut rng));
                        let h = &scenario.h_est[k] + &scenario.err_mean[k] + &factors[k] * z;
                        if sinr(design, k, &h, scenario.noise[k]) < gamma {
                            fails += 1;
                        }
                    }
                    fails as f64 / n_samples as f64
                })
                .collect();
            GoodputPoint::new(r, delta, eta, OutageMethod::Mc)
        })
        .collect();
    Ok(points)
}

/// Tail `P[Y > a E Y]` of an exponential variable.
pub fn exp_a_outage(a: f64) -> f64 {
    (-a.max(0.0)).exp()
}

/// Outage from the interference term alone,
/// `P[e^H L e > beta_k |h_ek^H u_k|^2 / gamma - sigma_k^2]` with `L` the
/// leakage matrix. The estimate is used for the signal term.
pub fn interference_only_outage(
    scenario: &Scenario,
    design: &BeamformDesign,
    user: usize,
    gamma: f64,
    degree: usize,
) -> Result<f64> {
    if user >= design.n_users() {
        return Err(Error::invalid(format!("user {user} out of range")));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("SINR target must be positive, got {gamma}")));
    }
    let u = &design.directions()[user];
    let signal = design.powers()[user] * scenario.h_est[user].dotc(u).norm_sqr();
    let threshold = signal / gamma - scenario.noise[user];
    if threshold <= 0.0 {
        return Ok(1.0);
    }
    let leak = design.leakage_matrix(user);
    let form = embed_complex_form(&leak, &scenario.err_mean[user], &scenario.err_cov[user])?;
    let fitted = fit_form(&form, degree)?;
    Ok((1.0 - fitted.cdf(threshold)).clamp(0.0, 1.0))
}

/// Result of the scale-factor search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChosenA {
    pub a: f64,
    pub gamma: f64,
    /// Goodput predicted with the `e^{-a}` outage law.
    pub goodput: f64,
    /// The maximizer sits on an end of the search range.
    pub at_boundary: bool,
}

/// Golden-section maximization of `objective` over `[lo, hi]`.
/// Returns the maximizer, its value and whether it is at a range end.
pub fn golden_section_max<F>(mut objective: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, bool)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(Error::invalid(format!("bad search range [{lo}, {hi}] or tolerance {tol}")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
    }
    // compare the interior estimate with both ends
    let mid = 0.5 * (a + b);
    let mut best = (mid, objective(mid)?);
    for end in [lo, hi] {
        let v = objective(end)?;
        if v > best.1 {
            best = (end, v);
        }
    }
    let at_boundary = (best.0 - lo).abs() <= tol || (hi - best.0).abs() <= tol;
    Ok((best.0, best.1, at_boundary))
}

/// Scale factor maximizing `R(a) [(1 - e^{-a}) + eta e^{-a}]` with
/// `R(a) = log2(1 + gamma(a))` and `gamma(a)` from `gamma_of_a`.
pub fn choose_a_with<F>(mut gamma_of_a: F, eta: f64, a_range: (f64, f64), tol: f64) -> Result<ChosenA>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut objective = |a: f64| -> Result<f64> {
        let r = rate_from_gamma(gamma_of_a(a)?);
        let d = exp_a_outage(a);
        Ok(goodput(r, &[d], eta))
    };
    let (a, goodput, at_boundary) = golden_section_max(&mut objective, a_range.0, a_range.1, tol)?;
    Ok(ChosenA {
        a,
        gamma: gamma_of_a(a)?,
        goodput,
        at_boundary,
    })
}

/// Scale factor for a scenario from the `e^{-a}` outage law.
pub fn choose_a(scenario: &Scenario, eta: f64, a_range: (f64, f64), tol: f64) -> Result<ChosenA> {
    let directions = zf_directions(&scenario.h_est)?;
    let problem = problem_for(scenario, &directions)?;
    choose_a_with(
        |a| problem.maxmin_gamma(a, crate::beamform::DEFAULT_GAMMA_TOL).map(|(g, _)| g),
        eta,
        a_range,
        tol,
    )
}

/// Robust design for `a` transmitted at its own max-min rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGoodput {
    pub a: f64,
    pub gamma: f64,
    /// Goodput with the series outage.
    pub alg1: GoodputPoint,
    /// Goodput with the `e^{-a}` outage law.
    pub exp_a: GoodputPoint,
}

pub fn evaluate_design_goodput(scenario: &Scenario, a: f64, eta: f64, degree: usize) -> Result<DesignGoodput> {
    if !(a >= 0.0) {
        return Err(Error::invalid(format!("scale factor must be nonnegative, got {a}")));
    }
    let design = design_for(scenario, a, crate::beamform::DEFAULT_GAMMA_TOL)?;
    let gamma = design.gamma();
    let rate = rate_from_gamma(gamma);
    let delta = alg1_outages(scenario, &design, gamma, degree)?;
    let k = scenario.n_users();
    Ok(DesignGoodput {
        a,
        gamma,
        alg1: GoodputPoint::new(rate, delta, eta, OutageMethod::Alg1),
        exp_a: GoodputPoint::new(rate, vec![exp_a_outage(a); k], eta, OutageMethod::ExpA),
    })
}

/// `points` rates whose SINR targets are geometric from `lo * gamma` to
/// `hi * gamma`.
pub fn rate_grid(gamma: f64, points: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0) || !(lo > 0.0) || !(hi >= lo) || points == 0 {
        return Err(Error::invalid("rate grid needs gamma > 0, 0 < lo <= hi and at least one point"));
    }
    if points == 1 {
        return Ok(vec![rate_from_gamma(gamma * lo)]);
    }
    let ratio = (hi / lo).ln();
    Ok((0..points)
        .map(|i| {
            let f = lo * (ratio * i as f64 / (points - 1) as f64).exp();
            rate_from_gamma(gamma * f)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate, ScenarioConfig};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn scenario(seed: u64) -> Scenario {
        generate(&ScenarioConfig {
            seed,
            ..ScenarioConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn goodput_limits() {
        assert_eq!(goodput(5.0, &[0.0, 0.0], 0.3), 5.0);
        assert_eq!(goodput(5.0, &[1.0], 0.0), 0.0);
        assert_eq!(goodput(5.0, &[1.0], 1.0), 5.0);
        assert_relative_eq!(goodput(4.0, &[0.5, 1.0], 0.5), (3.0 + 2.0) / 2.0);
    }

    #[test]
    fn exp_a_values() {
        assert_eq!(exp_a_outage(0.0), 1.0);
        assert_relative_eq!(exp_a_outage(3.0), 0.049787068367863944, max_relative = 1e-15);
    }

    #[test]
    fn rate_grid_brackets_target() {
        let g = rate_grid(100.0, 5, 0.1, 4.0).unwrap();
        assert_eq!(g.len(), 5);
        assert_relative_eq!(g[0], 11f64.log2(), max_relative = 1e-12);
        assert_relative_eq!(g[4], 401f64.log2(), max_relative = 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_covariance_mc_is_deterministic_sinr_test() {
        let mut sc = scenario(3);
        let n = sc.n_antennas();
        for c in sc.err_cov.iter_mut() {
            *c = DMatrix::zeros(n, n);
        }
        let design = design_for(&sc, 0.0, 1e-10).unwrap();
        let g = design.gamma();
        let rates = [rate_from_gamma(0.9 * g), rate_from_gamma(1.1 * g)];
        let pts = mc_goodput(&sc, &design, &rates, 0.3, 50, 1).unwrap();
        // the estimates are exact here, so SINR sits at the max-min target
        assert!(pts[0].outage.iter().all(|&d| d == 0.0));
        assert!(pts[1].outage.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn mc_is_deterministic() {
        let sc = scenario(5);
        let design = design_for(&sc, 0.0, 1e-8).unwrap();
        let rates = [2.0, 6.0];
        let a = mc_goodput(&sc, &design, &rates, 0.3, 200, 9).unwrap();
        let b = mc_goodput(&sc, &design, &rates, 0.3, 200, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_low_rate_is_small_and_high_rate_tends_to_eta_r() {
        let sc = scenario(11);
        let design = design_for(&sc, 0.0, 1e-8).unwrap();
        let rates = [1e-4, 60.0];
        let pts: Vec<_> = sweep_rate(&sc, &design, &rates, 0.3, 6).into_iter().map(|p| p.unwrap()).collect();
        assert!(pts[0].goodput_per_user < 1e-3);
        assert!(pts[1].outage.iter().all(|&d| d > 0.999));
        assert_relative_eq!(pts[1].goodput_per_user, 0.3 * 60.0, max_relative = 1e-3);
    }

    #[test]
    fn choose_a_with_full_recovery_prefers_smallest_a() {
        let c = choose_a_with(|a| Ok(1000.0 / (1.0 + a)), 1.0, (0.5, 50.0), 1e-6).unwrap();
        assert!((c.a - 0.5).abs() < 1e-5);
        assert!(c.at_boundary);
    }

    #[test]
    fn choose_a_with_fixed_rate_prefers_largest_a() {
        // past a ~ 35 the outage term is below double precision of R
        let c = choose_a_with(|_| Ok(100.0), 0.3, (0.5, 10.0), 1e-6).unwrap();
        assert!((c.a - 10.0).abs() < 1e-5);
        assert!(c.at_boundary);
    }

    #[test]
    fn interference_only_edges() {
        let sc = scenario(2);
        let design = design_for(&sc, 0.0, 1e-8).unwrap();
        assert_eq!(interference_only_outage(&sc, &design, 0, 1e300, 6).unwrap(), 1.0);
        assert!(interference_only_outage(&sc, &design, 0, 1e-6, 6).unwrap() < 1e-6);
    }

    #[test]
    fn naive_design_rate_matches_max_min() {
        let sc = scenario(4);
        let d = evaluate_design_goodput(&sc, 0.0, 0.3, 6).unwrap();
        assert_eq!(d.exp_a.outage, vec![1.0; 3]);
        assert!(d.alg1.rate > 0.0);
        assert!(d.alg1.goodput_per_user <= d.alg1.rate);
    }
}
