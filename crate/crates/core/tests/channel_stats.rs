use nalgebra::DMatrix;
use num_complex::Complex64;

use goodput_core::channel::{derive_seed, generate, sample_errors, ScenarioConfig};

#[test]
fn unit_fading_has_unit_power_per_antenna() {
    let cfg = ScenarioConfig {
        shadow_std_db: 0.0,
        pathloss_exponent: 0.0,
        error_power: 1e-30,
        n_users: 1,
        ..ScenarioConfig::default()
    };
    let draws: Vec<f64> = (0..10_000)
        .map(|i| {
            let sc = generate(&ScenarioConfig {
                seed: derive_seed(1, &[i]),
                ..cfg.clone()
            })
            .unwrap();
            sc.h_true[0].norm_squared()
        })
        .collect();
    let n = draws.len() as f64;
    let m = draws.iter().sum::<f64>() / n;
    let sd = (draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((m - 8.0).abs() <= 3.0 * sd / n.sqrt(), "mean {m}");
}

#[test]
fn path_loss_regression_recovers_exponent() {
    let cfg = ScenarioConfig {
        shadow_std_db: 0.0,
        n_users: 1,
        ..ScenarioConfig::default()
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..10_000 {
        let sc = generate(&ScenarioConfig {
            seed: derive_seed(2, &[i]),
            ..cfg.clone()
        })
        .unwrap();
        let (x, y) = sc.positions[0];
        let d = (x * x + y * y).sqrt().max(cfg.min_distance);
        // received power over the antennas averages out the fading
        let p = sc.h_true[0].norm_squared() / 8.0;
        xs.push(d.log10());
        ys.push(10.0 * p.log10());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = -sxy / sxx / 10.0;
    assert!((exponent - 3.52).abs() < 0.05, "exponent {exponent}");
}

#[test]
fn large_scale_gain_uses_unit_intercept() {
    let cfg = ScenarioConfig::default();
    assert_eq!(cfg.large_scale_gain(1.0, 0.0), 10f64.powf(-3.52));
    assert_eq!(cfg.large_scale_gain(100.0, 0.0), 100f64.powf(-3.52));
    assert!((cfg.large_scale_gain(100.0, 10.0) / cfg.large_scale_gain(100.0, 0.0) - 10.0).abs() < 1e-12);
}

fn sample_cov(vs: &[nalgebra::DVector<Complex64>]) -> DMatrix<Complex64> {
    let n = vs[0].len();
    let mut c = DMatrix::zeros(n, n);
    for v in vs {
        c += v * v.adjoint();
    }
    c / Complex64::from(vs.len() as f64)
}

#[test]
fn estimation_error_is_white_with_the_configured_power() {
    let cfg = ScenarioConfig::default();
    let mut errs = Vec::new();
    let mut i = 0;
    while errs.len() < 100_000 {
        let sc = generate(&ScenarioConfig {
            seed: derive_seed(3, &[i]),
            ..cfg.clone()
        })
        .unwrap();
        for k in 0..sc.n_users() {
            errs.push((&sc.h_true[k] - &sc.h_est[k]).unscale(cfg.error_power.sqrt()));
        }
        i += 1;
    }
    let c = sample_cov(&errs);
    let rel = (&c - DMatrix::identity(8, 8)).norm() / DMatrix::<Complex64>::identity(8, 8).norm();
    assert!(rel < 0.05, "relative error {rel}");
}

#[test]
fn sampled_errors_follow_their_covariance() {
    let mut sc = generate(&ScenarioConfig::default()).unwrap();
    let n = sc.n_antennas();
    let l = DMatrix::from_fn(n, n, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
    sc.err_cov[0] = (&l * l.adjoint()) * Complex64::from(1e-13) + DMatrix::identity(n, n) * Complex64::from(1e-14);
    let draws = sample_errors(&sc, 0, 100_000, 5);
    let c = sample_cov(&draws);
    let rel = (&c - &sc.err_cov[0]).norm() / sc.err_cov[0].norm();
    assert!(rel < 0.05, "relative error {rel}");
    assert_eq!(draws, sample_errors(&sc, 0, 100_000, 5));
}

#[test]
fn multicell_noise_exceeds_thermal_noise() {
    for i in 0..50 {
        let sc = generate(&ScenarioConfig {
            seed: i,
            multicell: true,
            ..ScenarioConfig::default()
        })
        .unwrap();
        assert!(sc.noise.iter().all(|&s| s > 1e-12));
    }
}

#[test]
fn records_flatten_every_entry() {
    let sc = generate(&ScenarioConfig::default()).unwrap();
    let recs = sc.to_records();
    assert_eq!(recs.len(), 24);
    let r = &recs[3 * 8 - 1];
    assert_eq!((r.user, r.antenna), (2, 7));
    assert_eq!(r.h_est_re, sc.h_est[2][7].re);
    assert!((r.err_power_w / 1e-13 - 1.0).abs() < 1e-12);
}
