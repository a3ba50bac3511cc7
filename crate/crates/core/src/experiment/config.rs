//! Flat `key = value` configuration documents.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Unknown and repeated keys are errors.
//!
//! Rate-study keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `integrand` | `smooth_product`, `halfspace`, `axis_box`, `axis_singular`, `corner_singular` or `payoff` | required |
//! | `d` | dimension (number of monitoring dates for `payoff`) | 2, or 4 for `payoff` |
//! | `A` | singularity exponent of `axis_box`, `axis_singular`, `corner_singular` | 0.1 |
//! | `d_u` | irregular dimension used for the predicted exponent (0 is read as 1) | from the integrand |
//! | `maxA` | growth exponent used for the predicted exponent | from the integrand |
//! | `n_min`, `n_max` | grid bounds, powers of 2 | 64, 65536 |
//! | `R` | replicates, at least 8 | 32 |
//! | `sampler` | `scrambled_net` or `plain_mc` | `scrambled_net` |
//! | `slack` | verdict slack on the slope | 0.12 |
//! | `seed` | master seed | 0 |
//! | `reference` | a number, or `oracle` / `oracle:<name>` for the built-in value | `oracle` |
//! | `workers` | worker threads, 0 for all cores | 0 |
//!
//! Model keys, shared with `rqmc price --config`: `s0`, `r`, `sigma`, `T`,
//! `d`, `K` (defaults 1, 0.05, 0.2, 1, 4, 1), `payoff` (one of the payoff
//! names) and `factor` (`cholesky` or `ot`, default `ot`).

use std::collections::BTreeMap;
use std::str::FromStr;

use super::catalog::IntegrandSpec;
use super::{powers_of_two, SamplingPlan, StudyConfig};
use crate::error::{contract, Error, Result};
use crate::finance::{FactorKind, GbmModel, PayoffKind};

pub const MODEL_KEYS: [&str; 8] = ["s0", "r", "sigma", "T", "d", "K", "payoff", "factor"];
pub const STUDY_KEYS: [&str; 12] = [
    "integrand",
    "d",
    "A",
    "d_u",
    "maxA",
    "n_min",
    "n_max",
    "R",
    "sampler",
    "slack",
    "seed",
    "reference",
];
const RUNTIME_KEYS: [&str; 1] = ["workers"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

pub fn parse_key_values(text: &str) -> Result<KeyValues> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected 'key = value', got '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: "empty key or value".into(),
            });
        }
        if let Some((first, _)) = entries.insert(key.to_string(), (line_no, value.to_string())) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("key '{key}' already set on line {first}"),
            });
        }
    }
    Ok(KeyValues { entries })
}

impl KeyValues {
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| Error::Parse {
                line: *line,
                msg: format!("bad value for '{key}': {e}"),
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Reject keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (key, (line, _)) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("unknown key '{key}'"),
                });
            }
        }
        Ok(())
    }
}

/// Model from `s0, r, sigma, T, d, K`, each defaulting to the standard
/// model.
pub fn model_from(kv: &KeyValues) -> Result<GbmModel> {
    let std = GbmModel::standard();
    GbmModel::new(
        kv.get_or("s0", std.s0)?,
        kv.get_or("r", std.r)?,
        kv.get_or("sigma", std.sigma)?,
        kv.get_or("T", std.maturity)?,
        kv.get_or("d", std.steps)?,
        kv.get_or("K", std.strike)?,
    )
}

fn grid_exponent(kv: &KeyValues, key: &str, default: usize) -> Result<u32> {
    let n: usize = kv.get_or(key, default)?;
    if !n.is_power_of_two() {
        return contract(format!("{key} = {n} is not a power of 2"));
    }
    Ok(n.trailing_zeros())
}

impl StudyConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let name = kv
            .raw("integrand")
            .ok_or_else(|| Error::Contract("missing key 'integrand'".into()))?;
        let a: f64 = kv.get_or("A", 0.1)?;
        let is_payoff = name == "payoff";
        let mut allowed: Vec<&str> = STUDY_KEYS.iter().chain(&RUNTIME_KEYS).copied().collect();
        if is_payoff {
            allowed.extend(MODEL_KEYS);
        }
        kv.check_keys(&allowed)?;
        let d: usize = kv.get_or("d", 2)?;
        let integrand = match name {
            "smooth_product" => IntegrandSpec::SmoothProduct { d },
            "halfspace" => IntegrandSpec::Halfspace { d },
            "axis_box" => IntegrandSpec::AxisBox { d, a },
            "axis_singular" | "corner_singular" if d != 2 => {
                return contract(format!("{name} is two-dimensional, got d = {d}"))
            }
            "axis_singular" => IntegrandSpec::AxisSingular { a },
            "corner_singular" => IntegrandSpec::CornerSingular { a },
            "payoff" => IntegrandSpec::Payoff {
                payoff: kv.get::<PayoffKind>("payoff")?.ok_or_else(|| {
                    Error::Contract("integrand = payoff needs a 'payoff' key".into())
                })?,
                factor: kv.get_or("factor", FactorKind::Ot)?,
                model: model_from(kv)?,
            },
            other => return contract(format!("unknown integrand '{other}'")),
        };
        let reference = match kv.raw("reference") {
            None => None,
            Some(v) if v == "oracle" || v.starts_with("oracle:") => None,
            Some(_) => kv.get::<f64>("reference")?,
        };
        let lo = grid_exponent(kv, "n_min", 1 << 6)?;
        let hi = grid_exponent(kv, "n_max", 1 << 16)?;
        if lo > hi {
            return contract("n_min exceeds n_max");
        }
        let plan = SamplingPlan {
            n_grid: powers_of_two(lo, hi),
            replicates: kv.get_or("R", super::DEFAULT_REPLICATES)?,
            master_seed: kv.get_or("seed", 0)?,
            sampler: kv.get_or("sampler", super::Sampler::ScrambledNet)?,
            workers: kv.get_or("workers", 0)?,
        };
        let mut config = StudyConfig::new(integrand);
        config.reference = reference;
        config.plan = plan;
        config.irregular_dimension = kv.get_or("d_u", integrand.irregular_dimension())?.max(1);
        config.max_growth = kv.get_or("maxA", integrand.max_growth())?;
        config.slack = kv.get_or("slack", super::DEFAULT_SLACK)?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Sampler;

    #[test]
    fn parses_study() {
        let text = "# study\nintegrand = halfspace\nd = 2\nmaxA = 0 # smooth\nn_min=16\nn_max = 1024\nR = 8\nsampler = plain_mc\n";
        let c = StudyConfig::from_key_values(&parse_key_values(text).unwrap()).unwrap();
        assert_eq!(c.integrand, IntegrandSpec::Halfspace { d: 2 });
        assert_eq!(c.plan.n_grid, powers_of_two(4, 10));
        assert_eq!(c.plan.sampler, Sampler::PlainMc);
        assert_eq!(c.irregular_dimension, 2);
        assert_eq!(c.slack, 0.12);
    }

    #[test]
    fn parses_payoff_study() {
        let text = "integrand = payoff\npayoff = geometric_indicator_payoff\nfactor = ot\nsigma = 0.3\nd = 8\nreference = oracle:geometric_asian\n";
        let c = StudyConfig::from_key_values(&parse_key_values(text).unwrap()).unwrap();
        match c.integrand {
            IntegrandSpec::Payoff { model, factor, .. } => {
                assert_eq!(model.steps, 8);
                assert_eq!(model.sigma, 0.3);
                assert_eq!(factor, FactorKind::Ot);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.reference, None);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(
            parse_key_values("a = 1\na = 2"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_key_values("just words"),
            Err(Error::Parse { line: 1, .. })
        ));
        let kv = parse_key_values("integrand = halfspace\nsigma = 0.2").unwrap();
        assert!(matches!(
            StudyConfig::from_key_values(&kv),
            Err(Error::Parse { line: 2, .. })
        ));
        let kv = parse_key_values("integrand = halfspace\nn_max = 1000").unwrap();
        assert!(StudyConfig::from_key_values(&kv).is_err());
        let kv = parse_key_values("integrand = halfspace\nR = many").unwrap();
        assert!(matches!(
            StudyConfig::from_key_values(&kv),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn zero_irregular_dimension_floors_to_one() {
        let kv = parse_key_values("integrand = axis_box\nd_u = 0").unwrap();
        assert_eq!(
            StudyConfig::from_key_values(&kv)
                .unwrap()
                .irregular_dimension,
            1
        );
    }
}
