//! Discounted Asian payoff and its pathwise Greek estimands.
//!
//! Every kind has the form `g(S) 1{S_A > K}` with `S_A` the arithmetic
//! average, except the geometric variant, which uses `S_G` in both places.

use serde::{Deserialize, Serialize};

use super::GbmModel;
use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    AsianCall,
    AsianDelta,
    AsianGamma,
    AsianRho,
    AsianTheta,
    AsianVega,
    GeometricIndicatorPayoff,
}

impl PayoffKind {
    pub const ALL: [PayoffKind; 7] = [
        Self::AsianCall,
        Self::AsianDelta,
        Self::AsianGamma,
        Self::AsianRho,
        Self::AsianTheta,
        Self::AsianVega,
        Self::GeometricIndicatorPayoff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::AsianCall => "asian_call",
            Self::AsianDelta => "asian_delta",
            Self::AsianGamma => "asian_gamma",
            Self::AsianRho => "asian_rho",
            Self::AsianTheta => "asian_theta",
            Self::AsianVega => "asian_vega",
            Self::GeometricIndicatorPayoff => "geometric_indicator_payoff",
        }
    }
}

impl std::str::FromStr for PayoffKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .map_or_else(|| contract(format!("unknown payoff '{s}'")), Ok)
    }
}

impl std::fmt::Display for PayoffKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Drift weight `omega` in `dS_A/dT = (1/d) sum_j S_j [omega j/(2d) + log(S_j/S0)/(2T)]`.
///
/// With `t_j = jT/d` and `B(t_j)` scaling like `sqrt(T)` at fixed `u`,
/// `d log S_j / dT = (r - sigma^2/2) j/(2d) + log(S_j/S0)/(2T)`.
pub fn theta_omega(model: &GbmModel) -> f64 {
    model.r - 0.5 * model.sigma * model.sigma
}

/// A payoff kind bound to a model, with the path-independent constants
/// precomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffSpec {
    kind: PayoffKind,
    model: GbmModel,
    discount: f64,
    log_s0: f64,
}

impl PayoffSpec {
    pub fn new(kind: PayoffKind, model: GbmModel) -> Result<Self> {
        if matches!(kind, PayoffKind::AsianGamma | PayoffKind::AsianVega) && model.sigma == 0.0 {
            return Err(Error::Domain(format!(
                "{kind} divides by sigma, which is 0"
            )));
        }
        Ok(Self {
            kind,
            model,
            discount: model.discount(),
            log_s0: model.s0.ln(),
        })
    }

    pub fn kind(&self) -> PayoffKind {
        self.kind
    }

    pub fn model(&self) -> &GbmModel {
        &self.model
    }

    /// Estimand value on a path of positive prices `S_1..S_d`.
    pub fn eval(&self, s: &[f64]) -> f64 {
        let m = &self.model;
        let d = s.len() as f64;
        let k = m.strike;
        if self.kind == PayoffKind::GeometricIndicatorPayoff {
            let sg = (s.iter().map(|x| x.ln()).sum::<f64>() / d).exp();
            return if sg > k {
                self.discount * (sg - k)
            } else {
                0.0
            };
        }
        let sa = s.iter().sum::<f64>() / d;
        if !(sa > k) {
            return 0.0;
        }
        let g = match self.kind {
            PayoffKind::AsianCall => sa - k,
            PayoffKind::AsianDelta => sa / m.s0,
            PayoffKind::AsianGamma => {
                let dt = m.dt();
                let var = m.sigma * m.sigma;
                sa * ((s[0].ln() - self.log_s0) - (m.r + 0.5 * var) * dt) / (m.s0 * m.s0 * var * dt)
            }
            PayoffKind::AsianRho => {
                let weighted: f64 = s.iter().enumerate().map(|(j, x)| (j + 1) as f64 * x).sum();
                m.maturity / (d * d) * weighted - m.maturity * (sa - k)
            }
            PayoffKind::AsianTheta => {
                let omega = theta_omega(m);
                let ds_dt = s
                    .iter()
                    .enumerate()
                    .map(|(j, x)| {
                        x * (omega * (j + 1) as f64 / (2.0 * d)
                            + (x.ln() - self.log_s0) / (2.0 * m.maturity))
                    })
                    .sum::<f64>()
                    / d;
                ds_dt - m.r * (sa - k)
            }
            PayoffKind::AsianVega => {
                let c = m.r + 0.5 * m.sigma * m.sigma;
                s.iter()
                    .enumerate()
                    .map(|(i, x)| x * ((x.ln() - self.log_s0) - c * m.time(i + 1)) / m.sigma)
                    .sum::<f64>()
                    / d
            }
            PayoffKind::GeometricIndicatorPayoff => unreachable!(),
        };
        self.discount * g
    }
}
