//! Boundary growth condition, the avoidance region `K(eps)` and the
//! anchored extension `g_eps` that agrees with `g` on `K(eps)`.
//!
//! The general-dimension extension is evaluated by nested adaptive
//! quadrature and exists as an oracle; the one-dimensional case has the
//! closed form `g(clamp(u, eps, 1 - eps))`, which the error and sup-norm
//! laws below are stated for.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scrambling::{uniform_points, ScrambleSeed};

/// Anchor coordinate shared by every dimension.
pub const ANCHOR: f64 = 0.5;

/// Exponents `A_i` and constant `B` of the boundary growth condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSpec {
    exponents: Vec<f64>,
    constant: f64,
}

impl GrowthSpec {
    pub fn new(exponents: Vec<f64>, constant: f64) -> Result<Self> {
        if exponents.is_empty() {
            return contract("growth spec needs at least one exponent");
        }
        if let Some(a) = exponents.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return contract(format!("growth exponent {a} must be positive and finite"));
        }
        if !(constant > 0.0 && constant.is_finite()) {
            return contract(format!(
                "growth constant {constant} must be positive and finite"
            ));
        }
        Ok(Self {
            exponents,
            constant,
        })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn max_exponent(&self) -> f64 {
        self.exponents.iter().copied().fold(f64::MIN, f64::max)
    }

    /// `max A_i < 1`: the regime covered by the rate bounds.
    pub fn is_feasible(&self) -> bool {
        self.max_exponent() < 1.0
    }

    /// `max A_i < 1/2`: `f^2` is integrable.
    pub fn is_square_integrable(&self) -> bool {
        self.max_exponent() < 0.5
    }

    /// Right-hand side of the growth bound for the subset `v` (bit mask).
    pub fn bound(&self, subset: u32, u: &[f64]) -> f64 {
        self.constant
            * u.iter()
                .zip(&self.exponents)
                .enumerate()
                .map(|(i, (&ui, &a))| {
                    let dist = ui.min(1.0 - ui);
                    if subset >> i & 1 == 1 {
                        dist.powf(-a - 1.0)
                    } else {
                        dist.powf(-a)
                    }
                })
                .product::<f64>()
    }
}

/// `K(eps) = { u : prod min(u_i, 1 - u_i) >= eps }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceRegion {
    epsilon: f64,
    dim: usize,
}

impl AvoidanceRegion {
    /// `0 < eps <= 2^-d`, so the anchor lies in the region.
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return contract("dimension must be >= 1");
        }
        let cap = 0.5f64.powi(dim as i32);
        if !(epsilon > 0.0 && epsilon <= cap) {
            return contract(format!("epsilon {epsilon} outside (0, 2^-{dim}]"));
        }
        Ok(Self { epsilon, dim })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        k_epsilon_contains(u, self)
    }
}

pub fn k_epsilon_contains(u: &[f64], region: &AvoidanceRegion) -> bool {
    debug_assert_eq!(u.len(), region.dim);
    u.iter().map(|&x| x.min(1.0 - x)).product::<f64>() >= region.epsilon
}

/// `g(u) = prod u_i^{-A_i}` with every `A_i` in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSingularFunction {
    exponents: Vec<f64>,
}

impl ProductSingularFunction {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return contract("need at least one exponent");
        }
        if let Some(a) = exponents.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return contract(format!("exponent {a} outside (0, 1)"));
        }
        Ok(Self { exponents })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.exponents)
            .map(|(&x, &a)| x.powf(-a))
            .product()
    }

    /// Mixed partial derivative over the coordinates in `subset` (bit mask).
    pub fn mixed_partial(&self, subset: u32, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.exponents)
            .enumerate()
            .map(|(i, (&x, &a))| {
                if subset >> i & 1 == 1 {
                    -a * x.powf(-a - 1.0)
                } else {
                    x.powf(-a)
                }
            })
            .product()
    }

    /// The growth spec this function satisfies with `B = 1`: each `A_i < 1`
    /// and `u_i >= min(u_i, 1 - u_i)`.
    pub fn growth_spec(&self) -> GrowthSpec {
        GrowthSpec::new(self.exponents.clone(), 1.0).expect("exponents validated")
    }
}

fn check_epsilon_1d(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("epsilon {epsilon} outside (0, 1/2)")));
    }
    Ok(())
}

fn check_exponent(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("exponent {a} outside (0, 1)")));
    }
    Ok(())
}

/// `g_eps(u)` for `g(u) = u^{-A}` in one dimension with anchor 1/2.
///
/// `u = 0` is accepted: the extension is defined there even though `g` is not.
pub fn extension_1d(a: f64, u: f64, epsilon: f64) -> Result<f64> {
    check_exponent(a)?;
    check_epsilon_1d(epsilon)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("u = {u} outside [0, 1]")));
    }
    Ok(u.clamp(epsilon, 1.0 - epsilon).powf(-a))
}

/// Exact `int_0^1 |g - g_eps| du` for `g(u) = u^{-A}`: the clip below `eps`
/// plus the clip above `1 - eps`.
pub fn approx_error_1d(a: f64, epsilon: f64) -> Result<f64> {
    check_exponent(a)?;
    check_epsilon_1d(epsilon)?;
    let lower = a / (1.0 - a) * epsilon.powf(1.0 - a);
    let top = 1.0 - epsilon;
    // (1 - top^{1-A}) computed without cancellation for small eps.
    let one_minus_pow = -((1.0 - a) * (-epsilon).ln_1p()).exp_m1();
    let upper = top.powf(-a) * epsilon - one_minus_pow / (1.0 - a);
    Ok(lower + upper)
}

/// `sup_u |g_eps(u)| = eps^{-A}`, attained for every `u <= eps`.
pub fn sup_extension_1d(a: f64, epsilon: f64) -> Result<f64> {
    check_exponent(a)?;
    check_epsilon_1d(epsilon)?;
    Ok(epsilon.powf(-a))
}

/// Evaluate `g_eps(u)` from its anchored-integral definition by nested
/// adaptive quadrature. Only `d <= 3` is supported.
pub fn extension_nd_oracle(
    g: &ProductSingularFunction,
    u: &[f64],
    epsilon: f64,
    quad_tol: f64,
) -> Result<f64> {
    let d = g.dim();
    if d > 3 {
        return Err(Error::Capacity {
            what: "oracle dimension",
            requested: d,
            available: 3,
        });
    }
    if u.len() != d {
        return contract(format!(
            "point has {} coordinates, function has {d}",
            u.len()
        ));
    }
    if let Some(x) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("coordinate {x} outside [0, 1]")));
    }
    AvoidanceRegion::new(epsilon, d)?;
    if !(quad_tol > 0.0) {
        return contract("quadrature tolerance must be positive");
    }
    let anchor = vec![ANCHOR; d];
    let subsets = (1u32 << d) - 1;
    let per_subset = quad_tol / subsets as f64;
    let mut total = g.eval(&anchor);
    let mut error_estimate = 0.0;
    let mut failed = false;
    for subset in 1..=subsets {
        let coords: Vec<usize> = (0..d).filter(|i| subset >> i & 1 == 1).collect();
        let mut z = anchor.clone();
        let ctx = Anchored {
            g,
            subset,
            coords: &coords,
            u,
            epsilon,
        };
        match ctx.integrate_level(0, &mut z, per_subset) {
            Ok(v) => total += v,
            Err(Error::Tolerance {
                estimate, error, ..
            }) => {
                total += estimate;
                error_estimate += error;
                failed = true;
            }
            Err(e) => return Err(e),
        }
    }
    if failed {
        return Err(Error::Tolerance {
            estimate: total,
            error: error_estimate,
            tolerance: quad_tol,
        });
    }
    Ok(total)
}

struct Anchored<'a> {
    g: &'a ProductSingularFunction,
    subset: u32,
    coords: &'a [usize],
    u: &'a [f64],
    epsilon: f64,
}

impl Anchored<'_> {
    /// Signed integral over coordinates `coords[level..]` with the outer
    /// ones fixed in `z`, restricted to `K(eps)`.
    fn integrate_level(&self, level: usize, z: &mut [f64], tol: f64) -> Result<f64> {
        let d = z.len();
        let i = self.coords[level];
        // Distances of fixed coordinates; free inner ones can reach at most 1/2.
        let fixed: f64 = (0..d)
            .filter(|j| !self.coords[level..].contains(j))
            .map(|j| z[j].min(1.0 - z[j]))
            .product();
        let free_inner = (self.coords.len() - level - 1) as i32;
        let tau = self.epsilon / (fixed * 0.5f64.powi(free_inner));
        if tau > 0.5 {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if self.u[i] >= ANCHOR {
            (ANCHOR, self.u[i], 1.0)
        } else {
            (self.u[i], ANCHOR, -1.0)
        };
        let (lo, hi) = (lo.max(tau), hi.min(1.0 - tau));
        if lo >= hi {
            return Ok(0.0);
        }
        let last = level + 1 == self.coords.len();
        let inner_tol = 0.5 * tol;
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let zcell = RefCell::new(z.to_vec());
        let integrand = |x: f64| -> f64 {
            let mut zz = zcell.borrow_mut();
            zz[i] = x;
            if last {
                self.g.mixed_partial(self.subset, &zz)
            } else {
                let mut local = zz.clone();
                drop(zz);
                match self.integrate_level(level + 1, &mut local, inner_tol) {
                    Ok(v) => v,
                    Err(e) => {
                        let v = match &e {
                            Error::Tolerance { estimate, .. } => *estimate,
                            _ => 0.0,
                        };
                        failure.borrow_mut().get_or_insert(e);
                        v
                    }
                }
            }
        };
        let opts = QuadOptions {
            abs_tol: if last { tol } else { 0.5 * tol },
            max_panels: 2000,
        };
        let result = integrate(integrand, lo, hi, opts);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(sign * result?.value)
    }
}

/// How the finite-difference step is chosen at each sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdStep {
    /// `h_i = fraction * min(u_i, 1 - u_i)`.
    Relative(f64),
    /// A fixed step; samples closer than `h` to the boundary are skipped.
    Absolute(f64),
}

impl Default for FdStep {
    fn default() -> Self {
        FdStep::Relative(0.125)
    }
}

/// Deepest dyadic level `2^-k` probed on the boundary ladder.
pub const LADDER_DEPTH: i32 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCheck {
    /// `max |d^v f| / bound` over samples and subsets.
    pub max_ratio: f64,
    pub worst_point: Vec<f64>,
    pub worst_subset: u32,
    pub samples_used: usize,
    pub skipped: Vec<Vec<f64>>,
}

impl GrowthCheck {
    /// Ratio at most one, allowing for rounding in the finite differences.
    pub fn is_consistent(&self) -> bool {
        self.max_ratio <= 1.0 + 1e-9
    }
}

/// Probe the growth condition of a black-box `f` by central mixed finite
/// differences at points that approach every face along a dyadic ladder.
///
/// Every sample evaluates `3^d` stencil points, so `d <= 4`.
pub fn check_growth<F>(
    f: F,
    spec: &GrowthSpec,
    sample_count: usize,
    fd_step: FdStep,
) -> Result<GrowthCheck>
where
    F: Fn(&[f64]) -> f64,
{
    let d = spec.dim();
    if d > 4 {
        return Err(Error::Capacity {
            what: "growth-check dimension",
            requested: d,
            available: 4,
        });
    }
    let samples = ladder_samples(d, sample_count)?;
    let mut report = GrowthCheck {
        max_ratio: 0.0,
        worst_point: vec![ANCHOR; d],
        worst_subset: 0,
        samples_used: 0,
        skipped: Vec::new(),
    };
    for u in samples {
        let steps: Vec<f64> = u
            .iter()
            .map(|&x| match fd_step {
                FdStep::Relative(frac) => frac * x.min(1.0 - x),
                FdStep::Absolute(h) => h,
            })
            .collect();
        if u.iter()
            .zip(&steps)
            .any(|(&x, &h)| !(h > 0.0) || h >= x.min(1.0 - x))
        {
            report.skipped.push(u);
            continue;
        }
        report.samples_used += 1;
        for subset in 0..(1u32 << d) {
            let estimate = mixed_difference(&f, &u, &steps, subset);
            let ratio = estimate.abs() / spec.bound(subset, &u);
            if ratio > report.max_ratio || ratio.is_nan() {
                report.max_ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
                report.worst_point = u.clone();
                report.worst_subset = subset;
            }
        }
    }
    Ok(report)
}

fn mixed_difference<F: Fn(&[f64]) -> f64>(f: &F, u: &[f64], steps: &[f64], subset: u32) -> f64 {
    let members: Vec<usize> = (0..u.len()).filter(|i| subset >> i & 1 == 1).collect();
    let mut point = u.to_vec();
    let mut sum = 0.0;
    for signs in 0..(1u32 << members.len()) {
        let mut parity = 1.0;
        for (bit, &i) in members.iter().enumerate() {
            if signs >> bit & 1 == 1 {
                point[i] = u[i] + steps[i];
            } else {
                point[i] = u[i] - steps[i];
                parity = -parity;
            }
        }
        sum += parity * f(&point);
    }
    let denom: f64 = members.iter().map(|&i| 2.0 * steps[i]).product();
    sum / denom
}

/// Axis ladders toward each face, the joint corner ladders, then
/// `sample_count` mixed points (each coordinate is a ladder rung or uniform).
fn ladder_samples(d: usize, sample_count: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for k in 1..=LADDER_DEPTH {
        let r = 0.5f64.powi(k);
        for side in [r, 1.0 - r] {
            out.push(vec![side; d]);
            if d > 1 {
                for i in 0..d {
                    let mut p = vec![ANCHOR; d];
                    p[i] = side;
                    out.push(p);
                }
            }
        }
    }
    if sample_count > 0 {
        let raw = uniform_points(sample_count, 3 * d, ScrambleSeed::new(0x6772_6f77, 0))?;
        for row in raw.iter() {
            let p = (0..d)
                .map(|i| {
                    let (pick, level, side) = (row[3 * i], row[3 * i + 1], row[3 * i + 2]);
                    if pick < 0.5 {
                        let k = 1 + (level * LADDER_DEPTH as f64) as i32;
                        let r = 0.5f64.powi(k.min(LADDER_DEPTH));
                        if side < 0.5 {
                            r
                        } else {
                            1.0 - r
                        }
                    } else {
                        side
                    }
                })
                .collect();
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_epsilon_examples() {
        for d in 1..=4 {
            let r = AvoidanceRegion::new(0.5f64.powi(d as i32), d).unwrap();
            assert!(r.contains(&vec![0.5; d]));
            let mut u = vec![0.5; d];
            u[0] = 0.0;
            assert!(!r.contains(&u));
        }
        let r = AvoidanceRegion::new(0.08, 2).unwrap();
        assert!(r.contains(&[0.2, 0.4]));
        assert!(!r.contains(&[0.2, 0.39]));
    }

    #[test]
    fn k_epsilon_is_monotone() {
        let big = AvoidanceRegion::new(0.05, 2).unwrap();
        let small = AvoidanceRegion::new(0.01, 2).unwrap();
        for i in 0..=40 {
            for j in 0..=40 {
                let u = [i as f64 / 40.0, j as f64 / 40.0];
                if big.contains(&u) {
                    assert!(small.contains(&u));
                }
            }
        }
    }

    #[test]
    fn region_rejects_bad_epsilon() {
        assert!(AvoidanceRegion::new(0.0, 2).is_err());
        assert!(AvoidanceRegion::new(0.3, 2).is_err());
    }

    #[test]
    fn extension_1d_examples() {
        assert_eq!(extension_1d(0.5, 0.25, 0.1).unwrap(), 2.0);
        assert!((extension_1d(0.5, 0.05, 0.1).unwrap() - 3.162_277_660_168_379_5).abs() < 1e-12);
        for a in [0.1, 0.5, 0.9] {
            assert_eq!(extension_1d(a, 0.5, 0.2).unwrap(), 0.5f64.powf(-a));
        }
        assert_eq!(extension_1d(0.5, 0.0, 0.01).unwrap(), 10.0);
        assert!(extension_1d(0.5, 0.2, 0.5).is_err());
    }

    #[test]
    fn extension_is_bounded_by_sup() {
        for a in [0.25, 0.5, 0.75] {
            for eps in [0.3, 0.1, 0.01] {
                let sup = sup_extension_1d(a, eps).unwrap();
                for i in 0..=1000 {
                    let u = i as f64 / 1000.0;
                    assert!(extension_1d(a, u, eps).unwrap() <= sup);
                }
                assert_eq!(extension_1d(a, eps, eps).unwrap(), sup);
            }
        }
    }

    #[test]
    fn sup_examples() {
        assert!((sup_extension_1d(0.5, 0.01).unwrap() - 10.0).abs() < 1e-12);
        assert!((sup_extension_1d(1e-9, 0.01).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn approx_error_frozen_values() {
        // Reference values from 50-digit quadrature, split at the clip points.
        let cases = [
            (0.5, 0.01, 0.100_025_252_365_832_03),
            (0.25, 0.0625, 0.042_181_797_239_197_016),
            (0.75, 2f64.powi(-16), 0.187_500_000_087_313_05),
            (0.75, 0.1, 1.691_261_599_763_934_0),
        ];
        for (a, eps, want) in cases {
            let got = approx_error_1d(a, eps).unwrap();
            assert!(
                (got - want).abs() < 1e-14 * want.max(1.0),
                "A={a} eps={eps}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn approx_error_ratio_tends_to_limit() {
        for a in [0.25, 0.5, 0.75] {
            let limit = a / (1.0 - a);
            let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&e| approx_error_1d(a, e).unwrap() / e.powf(1.0 - a))
                .collect();
            for w in ratios.windows(2) {
                assert!((w[1] - limit).abs() <= (w[0] - limit).abs());
            }
            assert!((ratios[2] - limit).abs() < 1e-3 * limit);
        }
    }

    #[test]
    fn oracle_matches_closed_form_in_one_dimension() {
        let g = ProductSingularFunction::new(vec![0.5]).unwrap();
        for (u, eps) in [
            (0.25, 0.1),
            (0.05, 0.1),
            (0.97, 0.1),
            (0.5, 0.2),
            (0.001, 0.01),
        ] {
            let oracle = extension_nd_oracle(&g, &[u], eps, 1e-10).unwrap();
            let closed = extension_1d(0.5, u, eps).unwrap();
            assert!(
                (oracle - closed).abs() < 1e-10,
                "u={u}: {oracle} vs {closed}"
            );
        }
    }

    #[test]
    fn oracle_at_anchor() {
        let g = ProductSingularFunction::new(vec![0.3, 0.6]).unwrap();
        let v = extension_nd_oracle(&g, &[0.5, 0.5], 0.1, 1e-10).unwrap();
        assert!((v - 2f64.powf(0.9)).abs() < 1e-12);
    }

    #[test]
    fn oracle_exact_on_k_epsilon() {
        let g = ProductSingularFunction::new(vec![0.3, 0.6]).unwrap();
        let eps = 0.02;
        let region = AvoidanceRegion::new(eps, 2).unwrap();
        let tol = 1e-8;
        let pts = uniform_points(400, 2, ScrambleSeed::new(5, 5)).unwrap();
        let mut checked = 0;
        for p in pts.iter().filter(|p| region.contains(p)).take(100) {
            let v = extension_nd_oracle(&g, p, eps, tol).unwrap();
            assert!((v - g.eval(p)).abs() <= tol, "{p:?}: {v} vs {}", g.eval(p));
            checked += 1;
        }
        assert_eq!(checked, 100);
    }

    #[test]
    fn oracle_is_bounded_outside_k_epsilon() {
        // Off K(eps) the extension stays finite even at the corner.
        let g = ProductSingularFunction::new(vec![0.3, 0.6]).unwrap();
        let v = extension_nd_oracle(&g, &[0.0, 0.0], 0.01, 1e-8).unwrap();
        assert!(v.is_finite() && v > g.eval(&[0.5, 0.5]));
    }

    #[test]
    fn oracle_capacity() {
        let g = ProductSingularFunction::new(vec![0.1; 4]).unwrap();
        assert!(matches!(
            extension_nd_oracle(&g, &[0.5; 4], 0.01, 1e-6),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn growth_check_linear() {
        let spec = GrowthSpec::new(vec![0.3, 0.3], 1.0).unwrap();
        let r = check_growth(|u| u[0], &spec, 200, FdStep::default()).unwrap();
        assert!(r.is_consistent(), "ratio {}", r.max_ratio);
    }

    #[test]
    fn growth_check_detects_mismatch() {
        let f = |u: &[f64]| u[0].powf(-0.5);
        let ok = check_growth(
            f,
            &GrowthSpec::new(vec![0.5], 1.0).unwrap(),
            100,
            FdStep::default(),
        )
        .unwrap();
        assert!(ok.is_consistent(), "ratio {}", ok.max_ratio);
        let bad = check_growth(
            f,
            &GrowthSpec::new(vec![0.1], 1.0).unwrap(),
            100,
            FdStep::default(),
        )
        .unwrap();
        assert!(!bad.is_consistent());
        assert!(bad.worst_point[0] <= 0.5f64.powi(LADDER_DEPTH));
    }

    #[test]
    fn growth_check_skips_wide_steps() {
        let spec = GrowthSpec::new(vec![0.5], 1.0).unwrap();
        let r = check_growth(|u| u[0], &spec, 0, FdStep::Absolute(0.01)).unwrap();
        assert!(!r.skipped.is_empty());
        assert!(r.samples_used > 0);
    }

    #[test]
    fn product_function_satisfies_its_growth_spec() {
        let g = ProductSingularFunction::new(vec![0.2, 0.4]).unwrap();
        let r = check_growth(|u| g.eval(u), &g.growth_spec(), 300, FdStep::default()).unwrap();
        assert!(
            r.is_consistent(),
            "ratio {} at {:?}",
            r.max_ratio,
            r.worst_point
        );
    }
}
