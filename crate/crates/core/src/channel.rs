//! Scenario generation: users dropped uniformly over a disc around the
//! serving base station, log-distance path loss with log-normal shadowing,
//! i.i.d. Rayleigh small-scale fading and additive Gaussian estimation error.
//! In the multi-cell setting a ring of co-channel base stations adds its mean
//! received power to each user's noise floor.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Deterministic seed for a sub-stream identified by `keys`.
pub fn derive_seed(base: u64, keys: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &k in keys {
        state = splitmix64(state ^ splitmix64(k.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    state
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_antennas: usize,
    pub n_users: usize,
    /// meters
    pub cell_radius: f64,
    pub pathloss_exponent: f64,
    pub shadow_std_db: f64,
    /// Receiver noise per user, watts.
    pub noise_power: f64,
    /// Per-entry estimation error variance, watts.
    pub error_power: f64,
    /// Transmit power budget, watts.
    pub total_power: f64,
    pub multicell: bool,
    /// Distance from the serving to each interfering base station, meters.
    pub interferer_distance: f64,
    pub n_interferers: usize,
    pub seed: u64,
    /// Distances are clamped to at least this many meters.
    pub min_distance: f64,
    /// Path gain at the 1 m reference distance, dB.
    pub reference_gain_db: f64,
    /// Use one shadowing draw per user for all interfering base stations.
    pub correlated_interferer_shadowing: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_antennas: 8,
            n_users: 3,
            cell_radius: 1000.0,
            pathloss_exponent: 3.52,
            shadow_std_db: 8.0,
            noise_power: dbm_to_watts(-90.0),
            error_power: dbm_to_watts(-100.0),
            total_power: 40.0,
            multicell: false,
            interferer_distance: 2000.0,
            n_interferers: 6,
            seed: 0,
            min_distance: 10.0,
            reference_gain_db: 0.0,
            correlated_interferer_shadowing: false,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 {
            return Err(Error::validation("n_users", "must be at least 1"));
        }
        if self.n_antennas < self.n_users {
            return Err(Error::validation("n_antennas", "must be at least n_users"));
        }
        let positive = [
            ("cell_radius", self.cell_radius),
            ("noise_power", self.noise_power),
            ("error_power", self.error_power),
            ("total_power", self.total_power),
            ("min_distance", self.min_distance),
            ("interferer_distance", self.interferer_distance),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(field, format!("must be positive and finite, got {v}")));
            }
        }
        let nonneg = [
            ("pathloss_exponent", self.pathloss_exponent),
            ("shadow_std_db", self.shadow_std_db),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::validation(field, format!("must be nonnegative, got {v}")));
            }
        }
        if !self.reference_gain_db.is_finite() {
            return Err(Error::validation("reference_gain_db", "must be finite"));
        }
        Ok(())
    }

    /// Large-scale power gain at `distance` meters with `shadow_db` shadowing.
    pub fn large_scale_gain(&self, distance: f64, shadow_db: f64) -> f64 {
        let d = distance.max(self.min_distance);
        10f64.powf((self.reference_gain_db + shadow_db) / 10.0) * d.powf(-self.pathloss_exponent)
    }
}

/// One drop of users with their true and estimated channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub h_true: Vec<DVector<Complex64>>,
    pub h_est: Vec<DVector<Complex64>>,
    pub err_mean: Vec<DVector<Complex64>>,
    pub err_cov: Vec<DMatrix<Complex64>>,
    /// Noise per user including any inter-cell term, watts.
    pub noise: Vec<f64>,
    pub total_power: f64,
    /// User coordinates relative to the serving base station, meters.
    pub positions: Vec<(f64, f64)>,
    pub large_scale_gain: Vec<f64>,
}

/// One row of the flat audit export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRecord {
    pub user: usize,
    pub antenna: usize,
    pub x_m: f64,
    pub y_m: f64,
    pub large_scale_gain: f64,
    pub noise_w: f64,
    pub err_power_w: f64,
    pub h_true_re: f64,
    pub h_true_im: f64,
    pub h_est_re: f64,
    pub h_est_im: f64,
}

impl Scenario {
    pub fn n_users(&self) -> usize {
        self.h_est.len()
    }

    pub fn n_antennas(&self) -> usize {
        self.h_est[0].len()
    }

    /// White-equivalent error power `tr(C_k) / N_t`.
    pub fn err_power(&self, user: usize) -> f64 {
        self.err_cov[user].trace().re / self.n_antennas() as f64
    }

    pub fn to_records(&self) -> Vec<ScenarioRecord> {
        let mut out = Vec::with_capacity(self.n_users() * self.n_antennas());
        for k in 0..self.n_users() {
            for n in 0..self.n_antennas() {
                out.push(ScenarioRecord {
                    user: k,
                    antenna: n,
                    x_m: self.positions[k].0,
                    y_m: self.positions[k].1,
                    large_scale_gain: self.large_scale_gain[k],
                    noise_w: self.noise[k],
                    err_power_w: self.err_power(k),
                    h_true_re: self.h_true[k][n].re,
                    h_true_im: self.h_true[k][n].im,
                    h_est_re: self.h_est[k][n].re,
                    h_est_im: self.h_est[k][n].im,
                });
            }
        }
        out
    }
}

/// `CN(0, 1)` sample.
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn generate(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_antennas;
    let shadow = Normal::new(0.0, config.shadow_std_db).expect("validated std");
    let err_sd = config.error_power.sqrt();

    let mut sc = Scenario {
        h_true: Vec::new(),
        h_est: Vec::new(),
        err_mean: Vec::new(),
        err_cov: Vec::new(),
        noise: Vec::new(),
        total_power: config.total_power,
        positions: Vec::new(),
        large_scale_gain: Vec::new(),
    };
    for _ in 0..config.n_users {
        let r = config.cell_radius * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        let pos = (r * theta.cos(), r * theta.sin());
        let gain = config.large_scale_gain(r, shadow.sample(&mut rng));
        let amp = gain.sqrt();
        let h = DVector::from_fn(n, |_, _| complex_normal(&mut rng) * amp);
        let e = DVector::from_fn(n, |_, _| complex_normal(&mut rng) * err_sd);
        let noise = intercell_noise(config, pos, &mut rng);

        sc.h_est.push(&h - &e);
        sc.h_true.push(h);
        sc.err_mean.push(DVector::zeros(n));
        sc.err_cov.push(DMatrix::identity(n, n) * Complex64::from(config.error_power));
        sc.noise.push(noise);
        sc.positions.push(pos);
        sc.large_scale_gain.push(gain);
    }
    Ok(sc)
}

/// Noise at `position` plus, in the multi-cell setting, the mean power
/// received from a ring of interfering base stations at full power.
pub fn intercell_noise<R: Rng + ?Sized>(config: &ScenarioConfig, position: (f64, f64), rng: &mut R) -> f64 {
    if !config.multicell {
        return config.noise_power;
    }
    let shadow = Normal::new(0.0, config.shadow_std_db).expect("validated std");
    let common = if config.correlated_interferer_shadowing {
        Some(shadow.sample(rng))
    } else {
        None
    };
    let mut total = config.noise_power;
    for j in 0..config.n_interferers {
        let angle = 2.0 * PI * j as f64 / config.n_interferers as f64;
        let bs = (config.interferer_distance * angle.cos(), config.interferer_distance * angle.sin());
        let d = ((position.0 - bs.0).powi(2) + (position.1 - bs.1).powi(2)).sqrt();
        let x = common.unwrap_or_else(|| shadow.sample(rng));
        total += config.total_power * config.large_scale_gain(d, x);
    }
    total
}

/// Factor `L` with `L L^H = cov`, from the Hermitian eigendecomposition.
pub(crate) fn covariance_factor(cov: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = ((cov + cov.adjoint()) * Complex64::from(0.5)).symmetric_eigen();
    let mut l = eig.eigenvectors;
    for (j, v) in eig.eigenvalues.iter().enumerate() {
        l.column_mut(j).scale_mut(v.max(0.0).sqrt());
    }
    l
}

/// `count` draws of user `user`'s error vector from `CN(mu_k, C_k)`.
pub fn sample_errors(scenario: &Scenario, user: usize, count: usize, seed: u64) -> Vec<DVector<Complex64>> {
    let factor = covariance_factor(&scenario.err_cov[user]);
    let mean = &scenario.err_mean[user];
    let n = mean.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z = DVector::from_fn(n, |_, _| complex_normal(&mut rng));
            mean + &factor * z
        })
        .collect()
}
