//! Geometric Brownian motion paths driven by points of the unit cube, the
//! Asian payoff and Greek estimands, and the geometric-average oracle.
//!
//! A path is built as `S_i = S0 exp((r - sigma^2/2) t_i + sigma (A z)_i)`
//! with `z_j = Phi^-1(u_j)` and `A A^T = Sigma`, `Sigma_ij = dt min(i, j)`.
//! Two choices of `A` are offered: the Cholesky factor and the orthogonal
//! transformation (OT) factor, which rotates the Cholesky factor so that a
//! chosen linear functional of the Brownian path depends on `z_1` alone.

pub mod linalg;
pub mod normal;
pub mod payoff;

use serde::{Deserialize, Serialize};

use crate::digital_nets::{generate_net, NetSpec};
use crate::error::{contract, Error, Result};
use crate::scrambling::{scramble, ScrambleSeed, SCRAMBLE_DEPTH};

pub use linalg::Matrix;
pub use normal::{inv_norm_cdf, norm_cdf, norm_pdf};
pub use payoff::{PayoffKind, PayoffSpec};

/// Market and contract parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub s0: f64,
    pub r: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub steps: usize,
    pub strike: f64,
}

impl GbmModel {
    pub fn new(
        s0: f64,
        r: f64,
        sigma: f64,
        maturity: f64,
        steps: usize,
        strike: f64,
    ) -> Result<Self> {
        if !(s0 > 0.0 && s0.is_finite()) {
            return contract(format!("S0 must be positive and finite, got {s0}"));
        }
        if !r.is_finite() {
            return contract(format!("r must be finite, got {r}"));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return contract(format!("sigma must be nonnegative and finite, got {sigma}"));
        }
        if !(maturity > 0.0 && maturity.is_finite()) {
            return contract(format!("T must be positive and finite, got {maturity}"));
        }
        if steps == 0 {
            return contract("d must be at least 1");
        }
        if !(strike >= 0.0 && strike.is_finite()) {
            return contract(format!("K must be nonnegative and finite, got {strike}"));
        }
        Ok(Self {
            s0,
            r,
            sigma,
            maturity,
            steps,
            strike,
        })
    }

    /// `S0 = 1, r = 0.05, sigma = 0.2, T = 1, d = 4, K = 1`.
    pub fn standard() -> Self {
        Self {
            s0: 1.0,
            r: 0.05,
            sigma: 0.2,
            maturity: 1.0,
            steps: 4,
            strike: 1.0,
        }
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.steps as f64
    }

    /// Monitoring date `t_i` for `i` in `1..=d`.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }

    pub fn discount(&self) -> f64 {
        (-self.r * self.maturity).exp()
    }

    pub(crate) fn log_drift(&self) -> f64 {
        self.r - 0.5 * self.sigma * self.sigma
    }
}

/// `Sigma_ij = dt min(i, j)`.
pub fn covariance(model: &GbmModel) -> Matrix {
    let d = model.steps;
    let dt = model.dt();
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = dt * (i.min(j) + 1) as f64;
        }
    }
    m
}

pub fn cholesky_factor(sigma: &Matrix) -> Result<Matrix> {
    linalg::cholesky(sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Cholesky,
    Ot,
}

impl std::str::FromStr for FactorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(Self::Cholesky),
            "ot" => Ok(Self::Ot),
            other => contract(format!(
                "unknown factor '{other}' (expected cholesky or ot)"
            )),
        }
    }
}

impl std::fmt::Display for FactorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Cholesky => "cholesky",
            Self::Ot => "ot",
        })
    }
}

/// A generating matrix `A` with `A A^T = Sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFactor {
    matrix: Matrix,
    kind: FactorKind,
    weights: Option<Vec<f64>>,
}

impl PathFactor {
    pub fn cholesky(sigma: &Matrix) -> Result<Self> {
        Ok(Self {
            matrix: cholesky_factor(sigma)?,
            kind: FactorKind::Cholesky,
            weights: None,
        })
    }

    /// OT factor `A = A0 H`, where `H` is orthogonal with first column
    /// `A0^T w / |A0^T w|`. Then `w^T A z = |A0^T w| z_1`.
    pub fn ot(sigma: &Matrix, w: &[f64]) -> Result<Self> {
        if w.len() != sigma.dim() {
            return contract(format!(
                "weight vector has length {}, covariance is {}x{}",
                w.len(),
                sigma.dim(),
                sigma.dim()
            ));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return contract("weight vector must be finite");
        }
        if w.iter().all(|&x| x == 0.0) {
            return contract("weight vector must be nonzero");
        }
        let a0 = cholesky_factor(sigma)?;
        let aw = a0.transpose_mul_vec(w);
        let norm = aw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let q: Vec<f64> = aw.iter().map(|x| x / norm).collect();
        let h = linalg::orthogonal_with_first_column(&q);
        Ok(Self {
            matrix: a0.mul(&h),
            kind: FactorKind::Ot,
            weights: Some(w.to_vec()),
        })
    }

    /// Factor of the requested kind for `model`; OT aligns the geometric
    /// average.
    pub fn for_model(model: &GbmModel, kind: FactorKind) -> Result<Self> {
        let sigma = covariance(model);
        match kind {
            FactorKind::Cholesky => Self::cholesky(&sigma),
            FactorKind::Ot => Self::ot(&sigma, &geometric_alignment(model)),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Weight vector `(sigma/d) 1` of the geometric average:
/// `log S_G = log S0 + drift + w^T B`.
pub fn geometric_weights(model: &GbmModel) -> Vec<f64> {
    vec![model.sigma / model.steps as f64; model.steps]
}

// Same direction as the geometric weights, but usable when sigma = 0.
fn geometric_alignment(model: &GbmModel) -> Vec<f64> {
    if model.sigma > 0.0 {
        geometric_weights(model)
    } else {
        vec![1.0 / model.steps as f64; model.steps]
    }
}

/// Reusable buffers for path construction.
#[derive(Debug, Clone, Default)]
pub struct PathScratch {
    z: Vec<f64>,
    x: Vec<f64>,
}

/// Asset prices at the `d` monitoring dates for `u` in the open cube.
pub fn generate_path(u: &[f64], model: &GbmModel, factor: &PathFactor) -> Result<Vec<f64>> {
    if u.len() != model.steps || factor.dim() != model.steps {
        return contract(format!(
            "point has {} coordinates, model has {} dates, factor is {}x{}",
            u.len(),
            model.steps,
            factor.dim(),
            factor.dim()
        ));
    }
    for &p in u {
        inv_norm_cdf(p)?;
    }
    let mut s = vec![0.0; model.steps];
    path_into(u, model, factor, &mut PathScratch::default(), &mut s);
    Ok(s)
}

/// Unchecked path construction; `u` must lie strictly inside the cube.
pub(crate) fn path_into(
    u: &[f64],
    model: &GbmModel,
    factor: &PathFactor,
    scratch: &mut PathScratch,
    s: &mut [f64],
) {
    let d = model.steps;
    scratch.z.clear();
    scratch
        .z
        .extend(u.iter().map(|&p| normal::inv_norm_cdf_open(p)));
    scratch.x.resize(d, 0.0);
    factor.matrix.mul_vec_into(&scratch.z, &mut scratch.x);
    let drift = model.log_drift();
    let log_s0 = model.s0.ln();
    for (i, (si, xi)) in s.iter_mut().zip(&scratch.x).enumerate() {
        *si = (log_s0 + drift * model.time(i + 1) + model.sigma * xi).exp();
    }
}

/// Mean and variance of `log S_G`.
fn geometric_moments(model: &GbmModel) -> (f64, f64) {
    let d = model.steps as f64;
    let dt = model.dt();
    let mu = model.s0.ln() + model.log_drift() * (dt / d) * d * (d + 1.0) / 2.0;
    let var = (model.sigma / d).powi(2) * dt * d * (d + 1.0) * (2.0 * d + 1.0) / 6.0;
    (mu, var)
}

/// Threshold `kappa` with `S_G(u) > K` iff `u_1 > kappa`, for an OT factor
/// aligned with the geometric average.
pub fn geometric_threshold(model: &GbmModel, factor: &PathFactor) -> Result<f64> {
    if factor.kind != FactorKind::Ot || factor.dim() != model.steps {
        return contract("geometric threshold needs an OT factor of matching size");
    }
    let w = factor.weights.as_deref().unwrap_or(&[]);
    let aligned = w[0] > 0.0 && w.iter().all(|&x| (x - w[0]).abs() <= 1e-15 * w[0]);
    if !aligned {
        return contract("OT factor is not aligned with the geometric average");
    }
    let (mu, _) = geometric_moments(model);
    let log_k = model.strike.ln();
    if model.sigma == 0.0 {
        return Ok(if mu > log_k { 0.0 } else { 1.0 });
    }
    // |A0^T w| read off the rotated factor: w^T A = (norm, 0, ..., 0).
    let norm: f64 = (0..model.steps)
        .map(|i| model.sigma / model.steps as f64 * factor.matrix[(i, 0)])
        .sum();
    Ok(norm_cdf((log_k - mu) / norm))
}

/// Closed-form `e^{-rT} E[(S_G - K)^+]` for the geometric average `S_G`.
pub fn geometric_asian_price(model: &GbmModel) -> f64 {
    let (mu, var) = geometric_moments(model);
    let disc = model.discount();
    let k = model.strike;
    if var == 0.0 {
        return disc * (mu.exp() - k).max(0.0);
    }
    let sd = var.sqrt();
    let forward = (mu + 0.5 * var).exp();
    if k == 0.0 {
        return disc * forward;
    }
    let d1 = (mu - k.ln() + var) / sd;
    let d2 = d1 - sd;
    disc * (forward * norm_cdf(d1) - k * norm_cdf(d2))
}

/// RQMC estimate over independent scramblings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub points: usize,
    pub replicates: usize,
}

/// Average the payoff over `replicates` scramblings of a `2^m`-point Sobol'
/// net. The standard error is the sample deviation of the replicate means
/// over `sqrt(replicates)`.
pub fn price(
    spec: &PayoffSpec,
    factor: &PathFactor,
    m: u32,
    replicates: usize,
    seed: u64,
) -> Result<PriceEstimate> {
    let model = spec.model();
    if factor.dim() != model.steps {
        return contract("factor size does not match the model");
    }
    if replicates < 2 {
        return contract("at least two replicates are needed for a standard error");
    }
    let net = generate_net(&NetSpec::sobol(m, model.steps)?)?;
    let mut scratch = PathScratch::default();
    let mut path = vec![0.0; model.steps];
    let mut means = Vec::with_capacity(replicates);
    for rep in 0..replicates {
        let pts = scramble(
            &net,
            ScrambleSeed::new(seed, rep as u64 + 1),
            SCRAMBLE_DEPTH,
        )?;
        let mut sum = 0.0;
        for u in pts.iter() {
            path_into(u, model, factor, &mut scratch, &mut path);
            sum += spec.eval(&path);
        }
        means.push(sum / pts.len() as f64);
    }
    let (mean, se) = mean_and_standard_error(&means);
    Ok(PriceEstimate {
        estimate: mean,
        std_error: se,
        points: net.len(),
        replicates,
    })
}

pub(crate) fn mean_and_standard_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(d: usize, t: f64) -> GbmModel {
        GbmModel::new(1.0, 0.05, 0.2, t, d, 1.0).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let s = covariance(&model(2, 1.0));
        assert_eq!(
            s,
            Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 1.0]]).unwrap()
        );
        assert_eq!(
            covariance(&model(1, 2.0)),
            Matrix::from_rows(&[vec![2.0]]).unwrap()
        );
        // d = 3, T = 3 is [[1,1,1],[1,2,2],[1,2,3]]: leading minors 1, 1, 1.
        let s = covariance(&model(3, 3.0));
        assert!(cholesky_factor(&s).is_ok());
        let det = s[(0, 0)] * (s[(1, 1)] * s[(2, 2)] - s[(1, 2)] * s[(2, 1)])
            - s[(0, 1)] * (s[(1, 0)] * s[(2, 2)] - s[(1, 2)] * s[(2, 0)])
            + s[(0, 2)] * (s[(1, 0)] * s[(2, 1)] - s[(1, 1)] * s[(2, 0)]);
        assert!((det - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ot_small_cases() {
        let s1 = covariance(&model(1, 2.0));
        for w in [[1.0], [-3.0]] {
            let f = PathFactor::ot(&s1, &w).unwrap();
            assert!((f.matrix()[(0, 0)].abs() - 2f64.sqrt()).abs() < 1e-15);
        }
        let s2 = covariance(&model(2, 1.0));
        let f = PathFactor::ot(&s2, &[1.0, 1.0]).unwrap();
        let a = f.matrix();
        assert!((a[(0, 1)] + a[(1, 1)]).abs() < 1e-15);
        assert!(a[(0, 0)] + a[(1, 0)] > 0.0);
        assert!(a.gram().max_abs_diff(&s2) < 1e-15);
        assert!(matches!(
            PathFactor::ot(&s2, &[0.0, 0.0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn flat_and_median_paths() {
        let flat = GbmModel::new(2.0, 0.03, 0.0, 1.0, 4, 1.0).unwrap();
        let f = PathFactor::for_model(&flat, FactorKind::Cholesky).unwrap();
        let s = generate_path(&[0.1, 0.9, 0.3, 0.7], &flat, &f).unwrap();
        for (i, si) in s.iter().enumerate() {
            let want = 2.0 * (0.03 * flat.time(i + 1)).exp();
            assert!((si - want).abs() < 1e-15 * want);
        }
        let m = model(4, 1.0);
        for kind in [FactorKind::Cholesky, FactorKind::Ot] {
            let f = PathFactor::for_model(&m, kind).unwrap();
            let s = generate_path(&[0.5; 4], &m, &f).unwrap();
            for (i, si) in s.iter().enumerate() {
                let want = (m.log_drift() * m.time(i + 1)).exp();
                assert!((si - want).abs() < 1e-15);
            }
        }
        assert!(matches!(
            generate_path(
                &[0.0, 0.5, 0.5, 0.5],
                &m,
                &PathFactor::for_model(&m, FactorKind::Ot).unwrap()
            ),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn threshold_limits() {
        let mut m = model(4, 1.0);
        let f = PathFactor::for_model(&m, FactorKind::Ot).unwrap();
        m.strike = 1e-300;
        assert!(geometric_threshold(&m, &f).unwrap() < 1e-100);
        m.strike = 0.0;
        assert_eq!(geometric_threshold(&m, &f).unwrap(), 0.0);
        m.strike = 1e30;
        assert_eq!(geometric_threshold(&m, &f).unwrap(), 1.0);
        let chol = PathFactor::for_model(&m, FactorKind::Cholesky).unwrap();
        assert!(geometric_threshold(&m, &chol).is_err());
        m.strike = 1.0;
        assert!((geometric_threshold(&m, &f).unwrap() - 0.445_542_810_108_608_36).abs() < 1e-12);
    }

    #[test]
    fn geometric_price_values() {
        let m = model(4, 1.0);
        assert!((geometric_asian_price(&m) - 0.067_334_874_325_269_29).abs() < 1e-14);
        let k0 = GbmModel { strike: 0.0, ..m };
        let (mu, var) = geometric_moments(&k0);
        assert!(
            (geometric_asian_price(&k0) - k0.discount() * (mu + var / 2.0).exp()).abs() < 1e-15
        );
        let flat = GbmModel {
            sigma: 0.0,
            strike: 0.9,
            ..m
        };
        let want = flat.discount() * ((0.05 * 5.0 / 8.0f64).exp() - 0.9);
        assert!((geometric_asian_price(&flat) - want).abs() < 1e-15);
        let tiny = GbmModel {
            sigma: 1e-9,
            strike: 0.9,
            ..m
        };
        assert!((geometric_asian_price(&tiny) - want).abs() < 1e-12);
    }
}
