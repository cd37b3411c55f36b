//! Outage probability of `h^H Q h < sigma^2` for `h = h_est + e`,
//! `e ~ CN(mu, C)`, with `Q` indefinite.
//!
//! Whitening the error turns the form into `(v + z)^H M (v + z)` with
//! `z ~ CN(0, I)` and `M = C^{1/2} Q C^{1/2}`. Rotating onto the eigenbasis of
//! `M` splits it into two independent positive forms, one per eigenvalue
//! sign. Each side is embedded into real coordinates, fitted with a Laguerre
//! series, and the outage is `P[X_pos - X_neg < sigma^2]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::beamform::BeamformDesign;
use crate::error::{Error, Result};
use crate::quadform::{fit_form, FittedForm, RealQuadraticForm, DEFAULT_DEGREE};

/// Eigenvalues of the whitened form below this fraction of the largest
/// magnitude are dropped.
pub const EIG_DROP_TOL: f64 = 1e-10;
/// Covariance eigenvalues below this fraction of the largest are treated as
/// outside its range.
pub const COV_RANGE_TOL: f64 = 1e-12;
/// Points of the uniform grid over the negative side.
pub const DIFFERENCE_GRID: usize = 2048;

const HERMITIAN_TOL: f64 = 1e-12;
const SUPPORT_TOL: f64 = 1e-9;
const TAIL_MASS: f64 = 1e-8;
const WINDOW_GRID: usize = 512;

/// Outage event of one user: `h^H Q h < noise` with `h = h_est + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexQuadraticProblem {
    pub q: DMatrix<Complex64>,
    pub h_est: DVector<Complex64>,
    pub err_mean: DVector<Complex64>,
    pub err_cov: DMatrix<Complex64>,
    pub noise: f64,
}

impl ComplexQuadraticProblem {
    pub fn new(
        q: DMatrix<Complex64>,
        h_est: DVector<Complex64>,
        err_mean: DVector<Complex64>,
        err_cov: DMatrix<Complex64>,
        noise: f64,
    ) -> Result<Self> {
        let n = h_est.len();
        if q.shape() != (n, n) || err_cov.shape() != (n, n) || err_mean.len() != n {
            return Err(Error::invalid("Q, estimate, error mean and covariance dimensions disagree"));
        }
        check_hermitian(&q, "Q")?;
        check_hermitian(&err_cov, "error covariance")?;
        if !(noise > 0.0) {
            return Err(Error::invalid(format!("noise power must be positive, got {noise}")));
        }
        Ok(Self {
            q,
            h_est,
            err_mean,
            err_cov,
            noise,
        })
    }

    /// `h^H Q h` at a realized error.
    pub fn form_value(&self, err: &DVector<Complex64>) -> f64 {
        let h = &self.h_est + err;
        h.dotc(&(&self.q * &h)).re
    }
}

fn check_hermitian(m: &DMatrix<Complex64>, name: &str) -> Result<()> {
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let asym = (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::invalid(format!("{name} is not Hermitian (asymmetry {asym:.3e})")));
    }
    Ok(())
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::from(0.5)
}

/// `Q_k = beta_k u_k u_k^H / gamma - sum_{j != k} beta_j u_j u_j^H`.
pub fn build_q(design: &BeamformDesign, user: usize, gamma: f64) -> Result<DMatrix<Complex64>> {
    if user >= design.n_users() {
        return Err(Error::invalid(format!("user {user} out of range")));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("SINR target must be positive, got {gamma}")));
    }
    let u = &design.directions()[user];
    let own = u * u.adjoint() * Complex64::from(design.powers()[user] / gamma);
    Ok(own - design.leakage_matrix(user))
}

/// One sign class of the split: `sum_i delta_i |b_i + z_i|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSide {
    pub b: DVector<Complex64>,
    pub delta: Vec<f64>,
    /// Eigenvectors (columns) in whitened coordinates; `z_i = basis^H z`.
    basis: DMatrix<Complex64>,
}

impl SplitSide {
    fn value(&self, z: &DVector<Complex64>) -> f64 {
        let zr = self.basis.adjoint() * z;
        self.delta
            .iter()
            .enumerate()
            .map(|(i, d)| d * (self.b[i] + zr[i]).norm_sqr())
            .sum()
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }
}

/// `h^H Q h = constant + pos(z) - neg(z)` with `e = mu + whitening z`,
/// `z ~ CN(0, I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndefiniteSplit {
    pub pos: Option<SplitSide>,
    pub neg: Option<SplitSide>,
    /// Deterministic part; nonzero only when the error has no randomness.
    pub constant: f64,
    whitening: DMatrix<Complex64>,
}

impl IndefiniteSplit {
    /// Dimension of the whitened error `z`.
    pub fn white_dim(&self) -> usize {
        self.whitening.ncols()
    }

    /// Error vector `e = mu + C^{1/2} z` for whitened coordinates `z`.
    pub fn error_from_white(&self, err_mean: &DVector<Complex64>, z: &DVector<Complex64>) -> DVector<Complex64> {
        err_mean + &self.whitening * z
    }

    /// Value of the split form at whitened coordinates `z`.
    pub fn value(&self, z: &DVector<Complex64>) -> f64 {
        let pos = self.pos.as_ref().map_or(0.0, |s| s.value(z));
        let neg = self.neg.as_ref().map_or(0.0, |s| s.value(z));
        self.constant + pos - neg
    }
}

/// Split the outage form into two independent positive forms.
pub fn decompose(prob: &ComplexQuadraticProblem) -> Result<IndefiniteSplit> {
    decompose_with(prob, EIG_DROP_TOL)
}

pub fn decompose_with(prob: &ComplexQuadraticProblem, eig_drop_tol: f64) -> Result<IndefiniteSplit> {
    let n = prob.h_est.len();
    let center = &prob.h_est + &prob.err_mean;

    let cov_eig = hermitian_part(&prob.err_cov).symmetric_eigen();
    let cmax = cov_eig.eigenvalues.max();
    let keep: Vec<usize> = (0..n)
        .filter(|&i| cmax > 0.0 && cov_eig.eigenvalues[i] > COV_RANGE_TOL * cmax)
        .collect();
    let r = keep.len();

    if r == 0 {
        return Ok(IndefiniteSplit {
            pos: None,
            neg: None,
            constant: center.dotc(&(&prob.q * &center)).re,
            whitening: DMatrix::zeros(n, 0),
        });
    }

    let range = DMatrix::from_fn(n, r, |row, col| cov_eig.eigenvectors[(row, keep[col])]);
    let sqrt_c: Vec<f64> = keep.iter().map(|&i| cov_eig.eigenvalues[i].sqrt()).collect();
    if r < n {
        let proj = &range * range.adjoint();
        let q_norm = prob.q.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let off = (&prob.q - &proj * &prob.q * &proj).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if off > SUPPORT_TOL * q_norm {
            return Err(Error::SingularCovariance);
        }
    }
    let mut whitening = range.clone();
    for (j, s) in sqrt_c.iter().enumerate() {
        whitening.column_mut(j).scale_mut(*s);
    }

    let m = hermitian_part(&(whitening.adjoint() * &prob.q * &whitening));
    let mut v = range.adjoint() * &center;
    for (j, s) in sqrt_c.iter().enumerate() {
        v[j] /= *s;
    }

    let eig = m.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let b_all = eig.eigenvectors.adjoint() * &v;

    let side = |positive: bool| -> Option<SplitSide> {
        let idx: Vec<usize> = (0..r)
            .filter(|&i| {
                let l = eig.eigenvalues[i];
                l.abs() > eig_drop_tol * lmax && (l > 0.0) == positive
            })
            .collect();
        if idx.is_empty() {
            return None;
        }
        Some(SplitSide {
            b: DVector::from_iterator(idx.len(), idx.iter().map(|&i| b_all[i])),
            delta: idx.iter().map(|&i| eig.eigenvalues[i].abs()).collect(),
            basis: DMatrix::from_fn(r, idx.len(), |row, col| eig.eigenvectors[(row, idx[col])]),
        })
    };

    Ok(IndefiniteSplit {
        pos: if lmax > 0.0 { side(true) } else { None },
        neg: if lmax > 0.0 { side(false) } else { None },
        constant: 0.0,
        whitening,
    })
}

/// Real form of `(b + z)^H diag(delta) (b + z)` for `z ~ CN(0, I)`:
/// `A = diag(delta, delta)`, `mu = [Re b; Im b]`, `C = I/2`.
pub fn embed_real(b: &DVector<Complex64>, delta: &[f64]) -> Result<RealQuadraticForm> {
    if b.len() != delta.len() {
        return Err(Error::invalid("b and delta lengths differ"));
    }
    if delta.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::invalid("embedded eigenvalues must be positive"));
    }
    let m = delta.len();
    let diag = DVector::from_iterator(2 * m, delta.iter().chain(delta.iter()).copied());
    let mean = DVector::from_iterator(2 * m, b.iter().map(|c| c.re).chain(b.iter().map(|c| c.im)));
    RealQuadraticForm::new(
        DMatrix::from_diagonal(&diag),
        mean,
        DMatrix::identity(2 * m, 2 * m) * 0.5,
    )
}

fn real_block(m: &DMatrix<Complex64>, scale: f64) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let v = m[(r % n, c % n)];
        scale
            * match (r < n, c < n) {
                (true, true) | (false, false) => v.re,
                (true, false) => -v.im,
                (false, true) => v.im,
            }
    })
}

/// Real form of `e^H M e` for `e ~ CN(mean, cov)` and Hermitian PSD `M`:
/// `[Re M, -Im M; Im M, Re M]` over `[Re e; Im e]`, whose covariance is the
/// same block pattern of `cov` scaled by 1/2.
pub fn embed_complex_form(
    m: &DMatrix<Complex64>,
    mean: &DVector<Complex64>,
    cov: &DMatrix<Complex64>,
) -> Result<RealQuadraticForm> {
    let n = mean.len();
    let mu = DVector::from_iterator(2 * n, mean.iter().map(|c| c.re).chain(mean.iter().map(|c| c.im)));
    RealQuadraticForm::new(
        real_block(&hermitian_part(m), 1.0),
        mu,
        real_block(&hermitian_part(cov), 0.5),
    )
}

/// Knobs of the outage evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageOptions {
    pub degree: usize,
    pub eig_drop_tol: f64,
    pub grid_points: usize,
}

impl Default for OutageOptions {
    fn default() -> Self {
        Self {
            degree: DEFAULT_DEGREE,
            eig_drop_tol: EIG_DROP_TOL,
            grid_points: DIFFERENCE_GRID,
        }
    }
}

/// Outage probability `P[h^H Q h < sigma^2]` with a degree-`degree` fit on
/// each side.
pub fn outage_probability(prob: &ComplexQuadraticProblem, degree: usize) -> Result<f64> {
    outage_probability_with(
        prob,
        &OutageOptions {
            degree,
            ..OutageOptions::default()
        },
    )
}

pub fn outage_probability_with(prob: &ComplexQuadraticProblem, opts: &OutageOptions) -> Result<f64> {
    let split = decompose_with(prob, opts.eig_drop_tol)?;
    let threshold = prob.noise - split.constant;
    let pos = match &split.pos {
        Some(s) => Some(fit_form(&embed_real(&s.b, &s.delta)?, opts.degree)?),
        None => None,
    };
    let neg = match &split.neg {
        Some(s) => Some(fit_form(&embed_real(&s.b, &s.delta)?, opts.degree)?),
        None => None,
    };
    let p = match (pos, neg) {
        (None, None) => indicator(0.0 < threshold),
        (None, Some(_)) => 1.0,
        (Some(p), None) => below(&p, threshold),
        (Some(p), Some(n)) => difference_below(&p, &n, threshold, opts.grid_points),
    };
    Ok(p.clamp(0.0, 1.0))
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `P[X < s]`.
fn below(x: &FittedForm, s: f64) -> f64 {
    match x {
        FittedForm::PointMass(m) => indicator(*m < s),
        FittedForm::Laguerre(p) => p.cdf(s),
    }
}

/// `P[X1 - X2 < s]` for independent nonnegative `X1`, `X2`.
///
/// Computed as the Stieltjes integral `int F1(s + t) dF2(t)` with the
/// trapezoid rule on a grid that is uniform over the bulk of `X2`, refined
/// geometrically near zero, and refined again where `F1(s + t)` moves.
pub fn difference_below(x1: &FittedForm, x2: &FittedForm, s: f64, grid_points: usize) -> f64 {
    match (x1, x2) {
        (FittedForm::PointMass(m1), FittedForm::PointMass(m2)) => indicator(m1 - m2 < s),
        (_, FittedForm::PointMass(m2)) => below(x1, s + m2),
        (FittedForm::PointMass(m1), FittedForm::Laguerre(p2)) => {
            let t = m1 - s;
            if t < 0.0 {
                1.0
            } else {
                1.0 - p2.cdf(t)
            }
        }
        (FittedForm::Laguerre(p1), FittedForm::Laguerre(p2)) => {
            laguerre_difference(p1, p2, s, grid_points.max(16))
        }
    }
}

fn laguerre_difference(
    p1: &crate::quadform::LaguerrePdf,
    p2: &crate::quadform::LaguerrePdf,
    s: f64,
    n: usize,
) -> f64 {
    let (m2, sd2) = (p2.mean(), p2.std_dev());
    let mut t_hi = m2 + 8.0 * sd2;
    let mut widen = 8.0;
    while 1.0 - p2.cdf(t_hi) > TAIL_MASS && widen < 400.0 {
        widen *= 1.5;
        t_hi = m2 + widen * sd2;
    }

    let (m1, sd1) = (p1.mean(), p1.std_dev());
    let lo1 = (m1 - 12.0 * sd1).max(0.0);
    let fine_hi1 = m1 + 12.0 * sd1;
    let hi1 = m1 + 40.0 * sd1;

    let mut ts: Vec<f64> = (0..=n).map(|i| t_hi * i as f64 / n as f64).collect();
    let first = t_hi / n as f64;
    ts.extend((1..=40).map(|k| first * 0.5f64.powi(k)));
    let (wlo, whi) = ((lo1 - s).max(0.0), (fine_hi1 - s).min(t_hi));
    if whi > wlo {
        ts.extend((0..=WINDOW_GRID).map(|i| wlo + (whi - wlo) * i as f64 / WINDOW_GRID as f64));
    }
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup();

    let f1 = |t: f64| {
        let y = s + t;
        if y < lo1 {
            if lo1 == 0.0 {
                p1.cdf(y)
            } else {
                0.0
            }
        } else if y > hi1 {
            1.0
        } else {
            p1.cdf(y)
        }
    };

    let mut acc = 0.0;
    let mut prev_f2 = p2.cdf(ts[0]);
    let mut prev_f1 = f1(ts[0]);
    acc += prev_f2 * f1(0.0);
    for &t in &ts[1..] {
        let cur_f2 = p2.cdf(t);
        let cur_f1 = f1(t);
        acc += (cur_f2 - prev_f2) * 0.5 * (prev_f1 + cur_f1);
        prev_f2 = cur_f2;
        prev_f1 = cur_f1;
    }
    acc + (1.0 - prev_f2) * prev_f1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(n: usize, i: usize) -> DVector<Complex64> {
        DVector::from_fn(n, |r, _| if r == i { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn single_user_q_is_rank_one() {
        let d = BeamformDesign::new(vec![unit(2, 0)], vec![1.0], 1.0, 0.0).unwrap();
        let q = build_q(&d, 0, 1.0).unwrap();
        assert_relative_eq!((q - unit(2, 0) * unit(2, 0).adjoint()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_user_q_eigenvalues() {
        let d = BeamformDesign::new(vec![unit(2, 0), unit(2, 1)], vec![2.0, 2.0], 2.0, 0.0).unwrap();
        let q = build_q(&d, 0, 2.0).unwrap();
        let mut eig: Vec<f64> = q.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| a.total_cmp(b));
        assert_relative_eq!(eig[0], -2.0, epsilon = 1e-14);
        assert_relative_eq!(eig[1], 1.0, epsilon = 1e-14);
        assert!(build_q(&d, 0, 0.0).is_err());
        assert!(build_q(&d, 5, 1.0).is_err());
    }

    #[test]
    fn symmetric_split() {
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let prob = ComplexQuadraticProblem::new(
            q,
            DVector::zeros(2),
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            1.0,
        )
        .unwrap();
        let split = decompose(&prob).unwrap();
        let pos = split.pos.unwrap();
        let neg = split.neg.unwrap();
        assert_eq!(pos.delta.len(), 1);
        assert_eq!(neg.delta.len(), 1);
        assert_relative_eq!(pos.delta[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(neg.delta[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(pos.b[0].norm(), 0.0);
        assert_relative_eq!(neg.b[0].norm(), 0.0);
    }

    #[test]
    fn psd_form_has_no_negative_side() {
        let u = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let d = BeamformDesign::new(vec![u], vec![3.0], 1.0, 0.0).unwrap();
        let prob = ComplexQuadraticProblem::new(
            build_q(&d, 0, 2.0).unwrap(),
            DVector::from_vec(vec![c(1.0, 0.5), c(-0.3, 0.2)]),
            DVector::zeros(2),
            DMatrix::identity(2, 2) * c(0.1, 0.0),
            0.5,
        )
        .unwrap();
        let split = decompose(&prob).unwrap();
        assert!(split.neg.is_none());
        assert_eq!(split.pos.unwrap().dim(), 1);
    }

    #[test]
    fn embedding_examples() {
        let form = embed_real(&DVector::from_vec(vec![c(1.0, 1.0)]), &[2.0]).unwrap();
        assert_eq!(form.matrix(), &DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0])));
        assert_eq!(form.mean(), &DVector::from_vec(vec![1.0, 1.0]));
        // value at z = 0 is (1-i) 2 (1+i) = 4
        assert_relative_eq!(form.value(form.mean()), 4.0, epsilon = 1e-14);
        let central = embed_real(&DVector::from_vec(vec![c(0.0, 0.0)]), &[1.0]).unwrap();
        let c1 = crate::quadform::cumulants(&central, 1).unwrap()[0];
        assert_relative_eq!(c1, 1.0, epsilon = 1e-14);
        assert!(embed_real(&DVector::from_vec(vec![c(0.0, 0.0)]), &[0.0]).is_err());
    }

    #[test]
    fn complex_embedding_preserves_value() {
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, -0.3), c(0.5, 0.3), c(1.0, 0.0)]);
        let e = DVector::from_vec(vec![c(0.7, -1.2), c(0.1, 0.4)]);
        let form = embed_complex_form(&m, &DVector::zeros(2), &DMatrix::identity(2, 2)).unwrap();
        let x = DVector::from_vec(vec![e[0].re, e[1].re, e[0].im, e[1].im]);
        assert_relative_eq!(form.value(&x), e.dotc(&(&m * &e)).re, max_relative = 1e-14);
    }

    fn deterministic_problem(ratio: f64) -> ComplexQuadraticProblem {
        // beta |h^H u|^2 / gamma = ratio * sigma^2 with near-zero error
        let h = DVector::from_vec(vec![c(2e-3, 0.0), c(0.0, 1e-3)]);
        let u = h.unscale(h.norm());
        let gain = h.norm_squared();
        let sigma2 = 1e-6;
        let gamma = 1.0;
        let beta = ratio * sigma2 * gamma / gain;
        let d = BeamformDesign::new(vec![u], vec![beta], gamma, 0.0).unwrap();
        ComplexQuadraticProblem::new(
            build_q(&d, 0, gamma).unwrap(),
            h,
            DVector::zeros(2),
            DMatrix::identity(2, 2) * c(1e-20, 0.0),
            sigma2,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_limits() {
        assert!(outage_probability(&deterministic_problem(2.0), 6).unwrap() < 1e-6);
        assert!(outage_probability(&deterministic_problem(0.5), 6).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn zero_covariance_is_an_indicator() {
        let mut prob = deterministic_problem(2.0);
        prob.err_cov = DMatrix::zeros(2, 2);
        assert_eq!(outage_probability(&prob, 6).unwrap(), 0.0);
        let mut prob = deterministic_problem(0.5);
        prob.err_cov = DMatrix::zeros(2, 2);
        assert_eq!(outage_probability(&prob, 6).unwrap(), 1.0);
    }

    #[test]
    fn singular_covariance_off_support_is_rejected() {
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let prob = ComplexQuadraticProblem::new(q, DVector::zeros(2), DVector::zeros(2), cov, 1.0).unwrap();
        assert!(matches!(decompose(&prob), Err(Error::SingularCovariance)));

        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let prob = ComplexQuadraticProblem::new(q, DVector::zeros(2), DVector::zeros(2), cov, 1.0).unwrap();
        let split = decompose(&prob).unwrap();
        assert_eq!(split.white_dim(), 1);
        // |z|^2 < 1 for z ~ CN(0,1): 1 - e^{-1}
        let p = outage_probability(&prob, 6).unwrap();
        assert_relative_eq!(p, 1.0 - (-1.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn exponential_difference_closed_form() {
        // X1 ~ Exp(mean 2), X2 ~ Exp(mean 1): P[X1 - X2 < s] = 1 - (2/3) e^{-s/2}
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(-1.0, 0.0)]));
        for &s in &[0.1, 1.0, 3.0] {
            let prob = ComplexQuadraticProblem::new(
                q.clone(),
                DVector::zeros(2),
                DVector::zeros(2),
                DMatrix::identity(2, 2),
                s,
            )
            .unwrap();
            let p = outage_probability(&prob, 6).unwrap();
            let exact = 1.0 - 2.0 / 3.0 * (-s / 2.0).exp();
            assert!((p - exact).abs() < 1e-5, "s={s}: {p} vs {exact}");
        }
    }
}
