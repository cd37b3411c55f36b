//! Density and distribution of a positive (semi)definite quadratic form
//! `x^T A x` with `x ~ N(mu, C)` real Gaussian.
//!
//! The pipeline is cumulants -> moments -> Laguerre-series density. The fitted
//! density is a Gamma(nu + 1, beta) base times a degree-`d` polynomial chosen
//! so the first `d` moments are reproduced exactly:
//!
//! ```text
//! f(y) = y^nu e^{-y/beta} / (beta^nu Gamma(nu+1)) * sum_k xi_k y^k / beta^{k+1}
//!      = g(y/beta) / beta * sum_i eta_i L_i^{(nu)}(y/beta)
//! ```
//!
//! The two lines are the same polynomial written in the monomial and in the
//! Laguerre basis (`xi_k = sum_i eta_i d_{i,k}`). Evaluation uses the Laguerre
//! basis and `eta_i` is computed from central moments; in the monomial form the
//! alternating sums cancel to roughly `nu^d` relative error, which is fatal
//! for the strongly noncentral forms that carry the useful signal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::special::{gamma_p, laguerre, laguerre_all, ln_gamma_kernel};

/// Degree used when the caller does not choose one.
pub const DEFAULT_DEGREE: usize = 6;

/// Forms whose variance falls below this fraction of the squared mean are
/// treated as a point mass at the mean.
pub const DEGENERATE_REL_VARIANCE: f64 = 1e-14;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// `x^T A x` for `x ~ N(mean, covariance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealQuadraticForm {
    matrix: DMatrix<f64>,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl RealQuadraticForm {
    pub fn new(matrix: DMatrix<f64>, mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if matrix.shape() != (n, n) || covariance.shape() != (n, n) {
            return Err(Error::invalid(format!(
                "dimension mismatch: A is {:?}, mu has {n}, C is {:?}",
                matrix.shape(),
                covariance.shape()
            )));
        }
        check_symmetric_psd(&matrix, "A")?;
        check_symmetric_psd(&covariance, "C")?;
        Ok(Self {
            matrix,
            mean,
            covariance,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `x^T A x`.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.matrix * x))
    }
}

fn check_symmetric_psd(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let scale = m.amax();
    if scale == 0.0 {
        return Ok(());
    }
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::invalid(format!("{name} is not symmetric (asymmetry {asym:.3e})")));
    }
    let sym = (m + m.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().min();
    let norm = sym.norm();
    if min_eig < -PSD_TOL * norm {
        return Err(Error::invalid(format!(
            "{name} is not positive semidefinite (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

/// Cumulants `c_1 .. c_count` of `x^T A x`:
/// `c_i = 2^{i-1} i! (tr((AC)^i)/i + mu^T (AC)^{i-1} A mu)`.
pub fn cumulants(form: &RealQuadraticForm, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::invalid("cumulant count must be at least 1"));
    }
    let ac = &form.matrix * &form.covariance;
    let a_mu = &form.matrix * &form.mean;
    let mut power = DMatrix::<f64>::identity(form.dim(), form.dim());
    let mut scale = 1.0; // 2^{i-1} i!
    let mut out = Vec::with_capacity(count);
    for i in 1..=count {
        let prev = power.clone(); // (AC)^{i-1}
        power = &power * &ac;
        scale *= if i == 1 { 1.0 } else { 2.0 * i as f64 };
        let trace = power.trace() / i as f64;
        let noncentral = form.mean.dot(&(&prev * &a_mu));
        out.push(scale * (trace + noncentral));
    }
    Ok(out)
}

/// Raw moments `chi_0 = 1, chi_1 .. chi_d` from cumulants `c_1 ..`:
/// `chi_i = sum_{k<i} (i-1)!/((i-k-1)! k!) c_{i-k} chi_k`.
pub fn moments_from_cumulants(c: &[f64], degree: usize) -> Result<Vec<f64>> {
    if c.len() < degree {
        return Err(Error::invalid(format!(
            "need {degree} cumulants, got {}",
            c.len()
        )));
    }
    Ok(moment_recursion(c, degree))
}

fn moment_recursion(c: &[f64], degree: usize) -> Vec<f64> {
    let mut chi = vec![1.0];
    for i in 1..=degree {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(i-1, k)
        for k in 0..i {
            acc += binom * c[i - k - 1] * chi[k];
            binom *= (i - 1 - k) as f64 / (k + 1) as f64;
        }
        chi.push(acc);
    }
    chi
}

/// Inverse of the moment recursion.
fn cumulants_from_moments(chi: &[f64], degree: usize) -> Vec<f64> {
    let mut c: Vec<f64> = Vec::with_capacity(degree);
    for i in 1..=degree {
        let mut acc = chi[i];
        let mut binom = 1.0;
        for k in 0..i {
            if k > 0 {
                acc -= binom * c[i - k - 1] * chi[k];
            }
            binom *= (i - 1 - k) as f64 / (k + 1) as f64;
        }
        c.push(acc);
    }
    c
}

/// Laguerre-series density of a positive quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerrePdf {
    nu: f64,
    beta: f64,
    degree: usize,
    xi: Vec<f64>,
    eta: Vec<f64>,
    moments: Vec<f64>,
    /// `(x, raw cdf)` at each local maximum of the unclamped CDF, in the
    /// scaled variable `x = y / beta`; used to keep the CDF monotone.
    cdf_peaks: Vec<(f64, f64)>,
}

/// Value of the density with its clamping diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEval {
    /// Density clamped at zero.
    pub value: f64,
    /// Series value before clamping.
    pub raw: f64,
    /// The series rang negative here.
    pub clamped: bool,
}

/// Fit from raw moments `chi_0 .. chi_d` (with `chi_0 = 1`).
pub fn fit_laguerre(chi: &[f64], degree: usize) -> Result<LaguerrePdf> {
    if degree < 1 {
        return Err(Error::invalid("degree must be at least 1"));
    }
    if chi.len() < degree + 1 {
        return Err(Error::invalid(format!(
            "need moments chi_0..chi_{degree}, got {}",
            chi.len()
        )));
    }
    let c = cumulants_from_moments(chi, degree.max(2));
    fit_laguerre_from_cumulants(&c, degree)
}

/// Fit from cumulants `c_1 .. c_d`. Same density as [`fit_laguerre`] but
/// avoids the `chi_2 - chi_1^2` cancellation when the form is strongly
/// noncentral.
pub fn fit_laguerre_from_cumulants(c: &[f64], degree: usize) -> Result<LaguerrePdf> {
    if degree < 1 {
        return Err(Error::invalid("degree must be at least 1"));
    }
    let need = degree.max(2);
    if c.len() < need {
        return Err(Error::invalid(format!("need {need} cumulants, got {}", c.len())));
    }
    let (mean, var) = (c[0], c[1]);
    if !(mean > 0.0) || !(var > DEGENERATE_REL_VARIANCE * mean * mean) {
        return Err(Error::Degenerate(format!("mean {mean:e}, variance {var:e}")));
    }
    let beta = var / mean;
    let nu = mean * mean / var - 1.0;

    // central moments of x = y / beta; x has mean and variance nu + 1
    let mut scaled: Vec<f64> = c[..degree.max(2)]
        .iter()
        .enumerate()
        .map(|(j, cj)| cj / beta.powi(j as i32 + 1))
        .collect();
    scaled[0] = 0.0;
    let central = moment_recursion(&scaled, degree);

    // E[L_i^{(nu)}(x)] by Taylor expansion about the mean:
    // L_i^{(j)} derivative is (-1)^j L_{i-j}^{(nu+j)}
    let m = nu + 1.0;
    let mut eta = Vec::with_capacity(degree + 1);
    let mut norm = 1.0; // i! Gamma(nu+1) / Gamma(nu+i+1)
    for i in 0..=degree {
        if i > 0 {
            norm *= i as f64 / (nu + i as f64);
        }
        let mut expect = 0.0;
        let mut inv_fact = 1.0;
        for (j, mj) in central.iter().enumerate().take(i + 1) {
            if j > 0 {
                inv_fact /= j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            expect += sign * laguerre(i - j, nu + j as f64, m) * mj * inv_fact;
        }
        eta.push(norm * expect);
    }
    eta[0] = 1.0;

    let xi = (0..=degree)
        .map(|k| (k..=degree).map(|i| eta[i] * laguerre_coefficient(i, k, nu)).sum())
        .collect();

    let mut pdf = LaguerrePdf {
        nu,
        beta,
        degree,
        xi,
        eta,
        moments: moment_recursion(c, degree),
        cdf_peaks: Vec::new(),
    };
    pdf.cdf_peaks = pdf.find_cdf_peaks();
    Ok(pdf)
}

/// `d_{i,k} = (-1)^k Gamma(i+nu+1) / ((i-k)! k! Gamma(nu+k+1))`, the monomial
/// coefficients of `L_i^{(nu)}`.
pub fn laguerre_coefficient(i: usize, k: usize, nu: f64) -> f64 {
    assert!(k <= i);
    let mut v = if k % 2 == 0 { 1.0 } else { -1.0 };
    for j in (k + 1)..=i {
        v *= nu + j as f64;
    }
    for j in 1..=(i - k) {
        v /= j as f64;
    }
    for j in 1..=k {
        v /= j as f64;
    }
    v
}

impl LaguerrePdf {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monomial weights `xi_0 .. xi_d`.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Laguerre-basis weights `eta_0 .. eta_d`.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Raw moments `chi_0 .. chi_d` of the source form.
    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn mean(&self) -> f64 {
        (self.nu + 1.0) * self.beta
    }

    pub fn std_dev(&self) -> f64 {
        (self.nu + 1.0).sqrt() * self.beta
    }

    fn series(&self, x: f64) -> f64 {
        laguerre_all(self.degree, self.nu, x)
            .iter()
            .zip(&self.eta)
            .map(|(l, e)| l * e)
            .sum()
    }

    pub fn evaluate(&self, y: f64) -> Result<DensityEval> {
        if !(y >= 0.0) {
            return Err(Error::invalid(format!("density argument must be >= 0, got {y}")));
        }
        let x = y / self.beta;
        let base = ln_gamma_kernel(self.nu, x).exp();
        let raw = if base == 0.0 {
            0.0
        } else {
            // kernel is x^nu e^{-x}/Gamma(nu+1); the density is that over beta
            base / self.beta * self.series(x)
        };
        Ok(DensityEval {
            value: raw.max(0.0),
            raw,
            clamped: raw < 0.0,
        })
    }

    /// Density at `y`, negative ringing clamped to zero.
    pub fn density(&self, y: f64) -> Result<f64> {
        self.evaluate(y).map(|e| e.value)
    }

    /// Same polynomial as [`density`](Self::density), evaluated through the
    /// monomial weights `xi_k`. Only well conditioned for small `nu`.
    pub fn density_monomial(&self, y: f64) -> f64 {
        let x = y / self.beta;
        let poly: f64 = self.xi.iter().rev().fold(0.0, |acc, c| acc * x + c);
        ln_gamma_kernel(self.nu, x).exp() / self.beta * poly
    }

    /// Unclamped series CDF in the scaled variable.
    fn raw_cdf_scaled(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        // d/dx [x^{nu+1} e^{-x} L_{i-1}^{(nu+1)}(x)] = i x^nu e^{-x} L_i^{(nu)}(x)
        let lower = gamma_p(self.nu + 1.0, x);
        let tail_weight = (ln_gamma_kernel(self.nu, x) + x.ln()).exp();
        if tail_weight == 0.0 || self.degree == 0 {
            return lower;
        }
        let l = laguerre_all(self.degree - 1, self.nu + 1.0, x);
        let corr: f64 = (1..=self.degree)
            .map(|i| self.eta[i] * l[i - 1] / i as f64)
            .sum();
        lower + tail_weight * corr
    }

    fn find_cdf_peaks(&self) -> Vec<(f64, f64)> {
        const GRID: usize = 400;
        let m = self.nu + 1.0;
        let s = m.sqrt();
        let lo = (m - 30.0 * s).max(0.0);
        let hi = m + 30.0 * s + 30.0;
        let step = (hi - lo) / GRID as f64;
        let mut peaks = Vec::new();
        let mut prev_x = lo.max(step * 1e-6);
        let mut prev = self.series(prev_x);
        for i in 1..=GRID {
            let x = lo + step * i as f64;
            let cur = self.series(x);
            if prev > 0.0 && cur < 0.0 {
                let (mut a, mut b) = (prev_x, x);
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if self.series(mid) > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                peaks.push((a, self.raw_cdf_scaled(a)));
            }
            prev_x = x;
            prev = cur;
        }
        peaks
    }

    /// Approximate CDF: term-wise integral of the series, made monotone by
    /// holding the running maximum across negative-density stretches, then
    /// clamped to `[0, 1]`. Returns 0 for `y < 0`.
    pub fn cdf(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        let x = y / self.beta;
        let mut v = self.raw_cdf_scaled(x);
        for &(px, pv) in &self.cdf_peaks {
            if px <= x {
                v = v.max(pv);
            }
        }
        v.clamp(0.0, 1.0)
    }
}

/// Distribution of one side of a split: a fitted series, or a point mass when
/// the variance has collapsed.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedForm {
    Laguerre(LaguerrePdf),
    PointMass(f64),
}

impl FittedForm {
    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            FittedForm::Laguerre(p) => p.cdf(y),
            FittedForm::PointMass(m) => {
                if y >= *m {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            FittedForm::Laguerre(p) => p.mean(),
            FittedForm::PointMass(m) => *m,
        }
    }

    pub fn std_dev(&self) -> f64 {
        match self {
            FittedForm::Laguerre(p) => p.std_dev(),
            FittedForm::PointMass(_) => 0.0,
        }
    }
}

/// Fit a form, falling back to a point mass at its mean when degenerate.
pub fn fit_form(form: &RealQuadraticForm, degree: usize) -> Result<FittedForm> {
    let c = cumulants(form, degree.max(2))?;
    match fit_laguerre_from_cumulants(&c, degree) {
        Ok(p) => Ok(FittedForm::Laguerre(p)),
        Err(Error::Degenerate(_)) => Ok(FittedForm::PointMass(c[0].max(0.0))),
        Err(e) => Err(e),
    }
}
