//! Replicated error studies: estimate `E|I - I_hat|` on a grid of sample
//! sizes, fit the log-log slope, and compare it with the predicted exponent.
//!
//! Each replicate scrambles the first `n_max` points of the Sobol' sequence
//! once and reads every grid size off running prefix sums, so the estimate
//! at `n` uses exactly the first `n` scrambled points. Replicates run in
//! parallel and are aggregated in index order, which makes every report
//! independent of the worker count.

pub mod catalog;
pub mod config;
pub mod fit;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digital_nets::{DirectionTable, PointSet, PRECISION_DEPTH};
use crate::error::{contract, Error, Result};
use crate::finance::mean_and_standard_error;
use crate::scrambling::{
    scramble_point_into, uniform_keys, uniform_point_into, PermutationTree, ScrambleSeed,
};

pub use catalog::{Integrand, IntegrandSpec};
pub use config::{parse_key_values, KeyValues};
pub use fit::{fit_rate, theoretical_exponent, RateFit};

/// Largest sample size a study may request.
pub const MAX_STUDY_POINTS: usize = 1 << 24;
pub const DEFAULT_SLACK: f64 = 0.12;
pub const DEFAULT_REPLICATES: usize = 32;
pub const MIN_REPLICATES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    ScrambledNet,
    PlainMc,
}

impl std::str::FromStr for Sampler {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scrambled_net" => Ok(Self::ScrambledNet),
            "plain_mc" => Ok(Self::PlainMc),
            other => contract(format!(
                "unknown sampler '{other}' (expected scrambled_net or plain_mc)"
            )),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ScrambledNet => "scrambled_net",
            Self::PlainMc => "plain_mc",
        })
    }
}

/// How points are drawn and how many replicates are run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    pub sampler: Sampler,
    /// Worker threads; 0 uses all cores. Never affects results.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            n_grid: powers_of_two(6, 16),
            replicates: DEFAULT_REPLICATES,
            master_seed: 0,
            sampler: Sampler::ScrambledNet,
            workers: 0,
        }
    }
}

/// `2^lo, 2^(lo+1), ..., 2^hi`.
pub fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return contract("sample-size grid is empty");
        }
        for (i, &n) in self.n_grid.iter().enumerate() {
            if !n.is_power_of_two() {
                return contract(format!("grid entry {n} is not a power of 2"));
            }
            if i > 0 && n <= self.n_grid[i - 1] {
                return contract("sample-size grid must be strictly increasing");
            }
        }
        let n_max = *self.n_grid.last().unwrap();
        if n_max > MAX_STUDY_POINTS {
            return Err(Error::Capacity {
                what: "study sample size",
                requested: n_max,
                available: MAX_STUDY_POINTS,
            });
        }
        if self.replicates < MIN_REPLICATES {
            return contract(format!(
                "at least {MIN_REPLICATES} replicates are required, got {}",
                self.replicates
            ));
        }
        Ok(())
    }
}

/// Full description of a rate study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub integrand: IntegrandSpec,
    /// Overrides the catalog reference value when set.
    pub reference: Option<f64>,
    #[serde(flatten)]
    pub plan: SamplingPlan,
    pub irregular_dimension: usize,
    pub max_growth: f64,
    pub slack: f64,
}

impl StudyConfig {
    /// Defaults: grid `2^6..2^16`, 32 replicates, scrambled net, and the
    /// integrand's own irregular dimension and growth exponent.
    pub fn new(integrand: IntegrandSpec) -> Self {
        Self {
            integrand,
            reference: None,
            plan: SamplingPlan::default(),
            irregular_dimension: integrand.irregular_dimension(),
            max_growth: integrand.max_growth(),
            slack: DEFAULT_SLACK,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        if let Some(r) = self.reference {
            if !r.is_finite() {
                return contract(format!("reference value must be finite, got {r}"));
            }
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return contract(format!(
                "slack must be a nonnegative number, got {}",
                self.slack
            ));
        }
        Ok(())
    }

    pub fn reference_value(&self) -> Result<f64> {
        match self.reference {
            Some(r) => Ok(r),
            None => self.integrand.reference(),
        }
    }
}

/// Replicated error at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub n: usize,
    pub replicates: usize,
    pub mean_abs_error: f64,
    /// Standard error of `mean_abs_error` over the replicates.
    pub std_error: f64,
    /// Per-replicate estimates `I_hat_k`, in replicate order.
    pub estimates: Vec<f64>,
}

impl ErrorRecord {
    fn from_estimates(n: usize, reference: f64, estimates: Vec<f64>) -> Self {
        let errors: Vec<f64> = estimates.iter().map(|e| (e - reference).abs()).collect();
        let (mean, se) = mean_and_standard_error(&errors);
        Self {
            n,
            replicates: estimates.len(),
            mean_abs_error: mean,
            std_error: se,
            estimates,
        }
    }

    /// Root mean squared error over the replicates.
    pub fn rmse(&self, reference: f64) -> f64 {
        let k = self.estimates.len() as f64;
        (self
            .estimates
            .iter()
            .map(|e| (e - reference).powi(2))
            .sum::<f64>()
            / k)
            .sqrt()
    }
}

/// Compensated running sum.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Estimates of one replicate at every grid size.
fn replicate_estimates(
    f: &Integrand,
    net: Option<&PointSet>,
    plan: &SamplingPlan,
    replicate: u64,
) -> Result<Vec<f64>> {
    let d = f.dim();
    let seed = ScrambleSeed::new(plan.master_seed, replicate);
    let n_max = *plan.n_grid.last().unwrap();
    let mut u = vec![0.0; d];
    let mut out = Vec::with_capacity(plan.n_grid.len());
    let mut next = plan.n_grid.iter().copied().peekable();
    let mut sum = Neumaier::default();
    let tree = PermutationTree::new(seed);
    let keys = uniform_keys(d, seed);
    for i in 0..n_max {
        match net {
            Some(net) => scramble_point_into(net.point(i), &tree, net.precision_depth(), &mut u),
            None => uniform_point_into(&keys, i as u64, &mut u),
        }
        let v = f.eval(&u);
        if !v.is_finite() {
            return Err(Error::NonFinite { value: v, point: u });
        }
        sum.add(v);
        if next.peek() == Some(&(i + 1)) {
            next.next();
            out.push(sum.value() / (i + 1) as f64);
        }
    }
    Ok(out)
}

/// Error records for every grid size in `plan`.
pub fn measure(f: &Integrand, reference: f64, plan: &SamplingPlan) -> Result<Vec<ErrorRecord>> {
    plan.validate()?;
    if !reference.is_finite() {
        return contract(format!("reference value must be finite, got {reference}"));
    }
    let n_max = *plan.n_grid.last().unwrap();
    let net = match plan.sampler {
        Sampler::ScrambledNet => {
            let generator = DirectionTable::bundled().generator(f.dim())?;
            let pts = generator.points(0, n_max)?;
            debug_assert_eq!(pts.precision_depth(), PRECISION_DEPTH);
            Some(pts)
        }
        Sampler::PlainMc => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?;
    let per_replicate: Vec<Vec<f64>> = pool.install(|| {
        (1..=plan.replicates as u64)
            .into_par_iter()
            .map(|k| replicate_estimates(f, net.as_ref(), plan, k))
            .collect::<Result<_>>()
    })?;
    Ok(plan
        .n_grid
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let estimates = per_replicate.iter().map(|r| r[j]).collect();
            ErrorRecord::from_estimates(n, reference, estimates)
        })
        .collect())
}

/// Error record at a single sample size `n` for the configured integrand.
pub fn expected_abs_error(config: &StudyConfig, n: usize) -> Result<ErrorRecord> {
    config.validate()?;
    let plan = SamplingPlan {
        n_grid: vec![n],
        ..config.plan.clone()
    };
    let f = config.integrand.build()?;
    let reference = config.reference_value()?;
    Ok(measure(&f, reference, &plan)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub reference: f64,
    pub records: Vec<ErrorRecord>,
    pub fit: RateFit,
    pub theoretical_exponent: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

/// Measure, fit, and compare. The verdict is consistent iff the fitted
/// slope is at most `-theoretical_exponent + slack`; the slack absorbs the
/// log factors carried by the bound.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    let theory = theoretical_exponent(
        config.integrand.dim(),
        config.irregular_dimension,
        config.max_growth,
    )?;
    let f = config.integrand.build()?;
    let reference = config.reference_value()?;
    let records = measure(&f, reference, &config.plan)?;
    let mut fit = fit_rate(&records, config.plan.n_grid[0])?;
    fit.theoretical_exponent = Some(theory);
    let verdict = if fit.slope <= -theory + config.slack {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    Ok(StudyReport {
        config: config.clone(),
        reference,
        records,
        fit,
        theoretical_exponent: theory,
        slack: config.slack,
        verdict,
    })
}

impl StudyReport {
    /// One row per grid size: integrand, sampler, n, R, mean_abs_error,
    /// std_error.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("integrand,sampler,n,R,mean_abs_error,std_error\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{:e},{:e}\n",
                self.config.integrand.name(),
                self.config.plan.sampler,
                r.n,
                r.replicates,
                r.mean_abs_error,
                r.std_error
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
