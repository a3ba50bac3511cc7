//! Test integrands with closed-form or oracle reference values.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::finance::{self, FactorKind, GbmModel, PathFactor, PathScratch, PayoffKind, PayoffSpec};
use crate::quadrature::{integrate, QuadOptions};

/// Boundary of the singular-discontinuous region for `axis_singular`.
pub const AXIS_CUT: f64 = 1.0 / 3.0;
/// `corner_singular` keeps points with `u_1 + u_2 < CORNER_SUM`.
pub const CORNER_SUM: f64 = 1.5;

/// A named catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "integrand", rename_all = "snake_case")]
pub enum IntegrandSpec {
    /// `prod (1 + u_i) / (3/2)^d`, integral 1.
    SmoothProduct { d: usize },
    /// `1{sum u_i < d/2}`, integral 1/2.
    Halfspace { d: usize },
    /// `prod u_i^-a 1{u_i < 1/2 for all i}`.
    AxisBox { d: usize, a: f64 },
    /// `(u_1 u_2)^-a 1{u_1 > 1/3}`.
    AxisSingular { a: f64 },
    /// `(u_1 u_2)^-a 1{u_1 + u_2 < 3/2}`.
    CornerSingular { a: f64 },
    /// A payoff or Greek estimand composed with a path map.
    Payoff {
        payoff: PayoffKind,
        factor: FactorKind,
        model: GbmModel,
    },
}

impl IntegrandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SmoothProduct { .. } => "smooth_product",
            Self::Halfspace { .. } => "halfspace",
            Self::AxisBox { .. } => "axis_box",
            Self::AxisSingular { .. } => "axis_singular",
            Self::CornerSingular { .. } => "corner_singular",
            Self::Payoff { payoff, .. } => payoff.name(),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::SmoothProduct { d } | Self::Halfspace { d } | Self::AxisBox { d, .. } => d,
            Self::AxisSingular { .. } | Self::CornerSingular { .. } => 2,
            Self::Payoff { model, .. } => model.steps,
        }
    }

    /// Number of axes not parallel to the discontinuity, floored at 1.
    pub fn irregular_dimension(&self) -> usize {
        match *self {
            Self::SmoothProduct { .. } | Self::AxisBox { .. } | Self::AxisSingular { .. } => 1,
            Self::Halfspace { d } => d,
            Self::CornerSingular { .. } => 2,
            Self::Payoff {
                payoff,
                factor,
                model,
            } => {
                if payoff == PayoffKind::GeometricIndicatorPayoff && factor == FactorKind::Ot {
                    1
                } else {
                    model.steps
                }
            }
        }
    }

    /// Largest growth exponent `A_i` in the boundary growth condition.
    /// Path-driven payoffs satisfy it for arbitrarily small exponents.
    pub fn max_growth(&self) -> f64 {
        match *self {
            Self::AxisBox { a, .. } | Self::AxisSingular { a } | Self::CornerSingular { a } => a,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::SmoothProduct { d } | Self::Halfspace { d } | Self::AxisBox { d, .. }
                if d == 0 =>
            {
                contract("dimension must be >= 1")
            }
            Self::AxisBox { a, .. } | Self::AxisSingular { a } | Self::CornerSingular { a }
                if !(0.0..1.0).contains(&a) =>
            {
                contract(format!("singularity exponent must lie in [0, 1), got {a}"))
            }
            Self::Payoff { payoff, model, .. } => PayoffSpec::new(payoff, model).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Exact integral over the unit cube, from a closed form or an oracle.
    pub fn reference(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Self::SmoothProduct { .. } => 1.0,
            Self::Halfspace { .. } => 0.5,
            Self::AxisBox { d, a } => (0.5f64.powf(1.0 - a) / (1.0 - a)).powi(d as i32),
            Self::AxisSingular { a } => {
                let b = 1.0 - a;
                (1.0 - AXIS_CUT.powf(b)) / b / b
            }
            Self::CornerSingular { a } => corner_singular_reference(a)?,
            Self::Payoff { payoff, model, .. } => match payoff {
                PayoffKind::GeometricIndicatorPayoff => finance::geometric_asian_price(&model),
                PayoffKind::AsianCall if model.strike == 0.0 => {
                    let mean: f64 = (1..=model.steps)
                        .map(|i| (model.r * model.time(i)).exp())
                        .sum::<f64>()
                        / model.steps as f64;
                    model.discount() * model.s0 * mean
                }
                other => {
                    return Err(Error::OracleUnavailable(format!(
                        "{other} has no closed form; supply an explicit reference value"
                    )))
                }
            },
        })
    }

    pub fn build(&self) -> Result<Integrand> {
        self.validate()?;
        let name = self.name();
        let d = self.dim();
        Ok(match *self {
            Self::SmoothProduct { d } => {
                let scale = 1.5f64.powi(d as i32);
                Integrand::new(name, d, move |u| {
                    u.iter().map(|x| 1.0 + x).product::<f64>() / scale
                })
            }
            Self::Halfspace { d } => {
                let half = d as f64 / 2.0;
                Integrand::new(name, d, move |u| f64::from(u.iter().sum::<f64>() < half))
            }
            Self::AxisBox { a, .. } => Integrand::new(name, d, move |u| {
                if u.iter().all(|&x| x < 0.5) {
                    u.iter().map(|x| x.powf(-a)).product()
                } else {
                    0.0
                }
            }),
            Self::AxisSingular { a } => Integrand::new(name, 2, move |u| {
                if u[0] > AXIS_CUT {
                    (u[0] * u[1]).powf(-a)
                } else {
                    0.0
                }
            }),
            Self::CornerSingular { a } => Integrand::new(name, 2, move |u| {
                if u[0] + u[1] < CORNER_SUM {
                    (u[0] * u[1]).powf(-a)
                } else {
                    0.0
                }
            }),
            Self::Payoff {
                payoff,
                factor,
                model,
            } => {
                let spec = PayoffSpec::new(payoff, model)?;
                let factor = PathFactor::for_model(&model, factor)?;
                Integrand::new(name, d, move |u| payoff_at(u, &spec, &factor))
            }
        })
    }
}

impl fmt::Display for IntegrandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

thread_local! {
    static PATH: RefCell<(PathScratch, Vec<f64>)> = RefCell::new((PathScratch::default(), Vec::new()));
}

fn payoff_at(u: &[f64], spec: &PayoffSpec, factor: &PathFactor) -> f64 {
    PATH.with(|cell| {
        let (scratch, path) = &mut *cell.borrow_mut();
        path.resize(u.len(), 0.0);
        finance::path_into(u, spec.model(), factor, scratch, path);
        spec.eval(path)
    })
}

/// Integral of `(u_1 u_2)^-a` over `u_1 + u_2 < 3/2`: the full square minus
/// the corner triangle, the latter as a one-dimensional quadrature.
fn corner_singular_reference(a: f64) -> Result<f64> {
    let b = 1.0 - a;
    let corner = integrate(
        |x| x.powf(-a) * (1.0 - (CORNER_SUM - x).powf(b)) / b,
        CORNER_SUM - 1.0,
        1.0,
        QuadOptions {
            abs_tol: 1e-14,
            max_panels: 4000,
        },
    )?;
    Ok(1.0 / (b * b) - corner.value)
}

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A pure integrand on the unit cube, shareable across threads.
#[derive(Clone)]
pub struct Integrand {
    name: String,
    dim: usize,
    f: Arc<EvalFn>,
}

impl Integrand {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, u: &[f64]) -> f64 {
        (self.f)(u)
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_singular_closed_form() {
        let r = IntegrandSpec::AxisSingular { a: 0.1 }.reference().unwrap();
        assert!((r - 0.775_257_953_072_467_4).abs() < 1e-15);
        let by_quadrature = integrate(
            |x| x.powf(-0.1) / 0.9,
            AXIS_CUT,
            1.0,
            QuadOptions {
                abs_tol: 1e-13,
                max_panels: 4000,
            },
        )
        .unwrap()
        .value;
        assert!((r - by_quadrature).abs() < 1e-10);
    }

    #[test]
    fn corner_singular_oracle() {
        let r1 = IntegrandSpec::CornerSingular { a: 0.1 }
            .reference()
            .unwrap();
        let r3 = IntegrandSpec::CornerSingular { a: 0.3 }
            .reference()
            .unwrap();
        assert!((r1 - 1.104_629_935_259_717_3).abs() < 1e-12, "{r1}");
        assert!((r3 - 1.900_313_990_596_365_2).abs() < 1e-12, "{r3}");
    }

    #[test]
    fn axis_box_closed_form() {
        let r = IntegrandSpec::AxisBox { d: 2, a: 0.0 }.reference().unwrap();
        assert!((r - 0.25).abs() < 1e-15);
        let r = IntegrandSpec::AxisBox { d: 1, a: 0.5 }.reference().unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn payoff_oracles() {
        let m = GbmModel::standard();
        let spec = IntegrandSpec::Payoff {
            payoff: PayoffKind::GeometricIndicatorPayoff,
            factor: FactorKind::Ot,
            model: m,
        };
        assert!((spec.reference().unwrap() - 0.067_334_874_325_269_29).abs() < 1e-14);
        assert_eq!(spec.irregular_dimension(), 1);
        let k0 = IntegrandSpec::Payoff {
            payoff: PayoffKind::AsianCall,
            factor: FactorKind::Cholesky,
            model: GbmModel {
                r: 0.0,
                strike: 0.0,
                ..m
            },
        };
        assert_eq!(k0.reference().unwrap(), 1.0);
        let rho = IntegrandSpec::Payoff {
            payoff: PayoffKind::AsianRho,
            factor: FactorKind::Cholesky,
            model: m,
        };
        assert!(matches!(rho.reference(), Err(Error::OracleUnavailable(_))));
    }

    #[test]
    fn evaluations() {
        let f = IntegrandSpec::SmoothProduct { d: 2 }.build().unwrap();
        assert!((f.eval(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        let h = IntegrandSpec::Halfspace { d: 2 }.build().unwrap();
        assert_eq!(h.eval(&[0.4, 0.5]), 1.0);
        assert_eq!(h.eval(&[0.5, 0.5]), 0.0);
        let s = IntegrandSpec::AxisSingular { a: 0.5 }.build().unwrap();
        assert_eq!(s.eval(&[0.3, 0.5]), 0.0);
        assert!((s.eval(&[0.5, 0.5]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(IntegrandSpec::AxisSingular { a: 1.0 }.build().is_err());
        assert!(IntegrandSpec::Halfspace { d: 0 }.reference().is_err());
    }
}
