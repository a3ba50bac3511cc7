use serde::{Deserialize, Serialize};

use super::ErrorRecord;
use crate::error::{contract, Error, Result};

/// Minimum number of nonzero-error records for a fit.
pub const MIN_FIT_RECORDS: usize = 4;

/// Predicted decay exponent of `E|I - I_hat|` for `d_u` irregular axes and
/// growth exponent `max_a`: `(1 - max_a) (1/2 + 1/(4 d_u - 2))`.
pub fn theoretical_exponent(d: usize, d_u: usize, max_a: f64) -> Result<f64> {
    if d_u == 0 || d_u > d {
        return contract(format!("irregular dimension {d_u} must lie in 1..={d}"));
    }
    if !(max_a >= 0.0) {
        return contract(format!("max growth exponent must be >= 0, got {max_a}"));
    }
    if max_a >= 1.0 {
        return Err(Error::Infeasible(max_a));
    }
    let gamma = 1.0 - max_a;
    Ok(gamma * (0.5 + 1.0 / (4.0 * d_u as f64 - 2.0)))
}

/// Least-squares line through `(log2 n, log2 mean_abs_error)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub points_used: usize,
    /// Grid sizes dropped because their error was exactly zero.
    pub excluded_zero: Vec<usize>,
    pub theoretical_exponent: Option<f64>,
}

pub fn fit_rate(records: &[ErrorRecord], n_min: usize) -> Result<RateFit> {
    let mut excluded_zero = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in records.iter().filter(|r| r.n >= n_min) {
        if r.mean_abs_error > 0.0 {
            xs.push((r.n as f64).log2());
            ys.push(r.mean_abs_error.log2());
        } else {
            excluded_zero.push(r.n);
        }
    }
    if xs.len() < MIN_FIT_RECORDS {
        return Err(Error::InsufficientData {
            usable: xs.len(),
            needed: MIN_FIT_RECORDS,
        });
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return contract("all usable records share one n; the slope is undefined");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let used = records
        .iter()
        .filter(|r| r.n >= n_min && r.mean_abs_error > 0.0);
    let (lo, hi) = used.fold((usize::MAX, 0), |(lo, hi), r| (lo.min(r.n), hi.max(r.n)));
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        n_min: lo,
        n_max: hi,
        points_used: xs.len(),
        excluded_zero,
        theoretical_exponent: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(f: impl Fn(usize) -> f64) -> Vec<ErrorRecord> {
        (4..=14)
            .map(|k| {
                let n = 1usize << k;
                ErrorRecord {
                    n,
                    replicates: 8,
                    mean_abs_error: f(n),
                    std_error: 0.0,
                    estimates: vec![],
                }
            })
            .collect()
    }

    #[test]
    fn exponent_examples() {
        assert!((theoretical_exponent(2, 2, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((theoretical_exponent(5, 1, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((theoretical_exponent(2, 2, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((theoretical_exponent(2, 1, 0.1).unwrap() - 0.9).abs() < 1e-15);
        assert!(matches!(
            theoretical_exponent(2, 2, 1.2),
            Err(Error::Infeasible(_))
        ));
        assert!(theoretical_exponent(2, 3, 0.0).is_err());
        assert!(theoretical_exponent(2, 0, 0.0).is_err());
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_rate(&records(|n| 1.0 / n as f64), 1).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_errors() {
        let fit = fit_rate(&records(|_| 0.25), 1).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn perturbed_power_law() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let noise: Vec<f64> = (0..11).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fit = fit_rate(
            &records(|n| {
                (n as f64).powf(-2.0 / 3.0) * (1.0 + 0.05 * noise[n.trailing_zeros() as usize - 4])
            }),
            1,
        )
        .unwrap();
        assert!((-0.70..=-0.63).contains(&fit.slope), "{}", fit.slope);
    }

    #[test]
    fn zeros_excluded_and_minimum_enforced() {
        let fit = fit_rate(&records(|n| if n < 64 { 0.0 } else { 1.0 / n as f64 }), 1).unwrap();
        assert_eq!(fit.excluded_zero, vec![16, 32]);
        assert_eq!(fit.n_min, 64);
        let err = fit_rate(&records(|n| 1.0 / n as f64), 1 << 12).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientData {
                usable: 3,
                needed: 4
            }
        ));
    }
}
