//! The `rqmc` command line.
//!
//! Exit codes: 0 success (or a consistent rate study), 1 a checked failure
//! (net property violated, study inconsistent with the predicted rate),
//! 2 usage, parse, contract or numerical errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::digital_nets::{
    generate_net, verify_net, NetSpec, NetVerdict, PointSet, PRECISION_DEPTH,
};
use crate::error::{contract, Error, Result};
use crate::experiment::config::{model_from, MODEL_KEYS};
use crate::experiment::{parse_key_values, run_study, IntegrandSpec, StudyConfig, Verdict};
use crate::finance::{self, FactorKind, GbmModel, PathFactor, PayoffKind, PayoffSpec};
use crate::scrambling::{scramble, ScrambleSeed, SCRAMBLE_DEPTH};

pub const MAX_POINTS_M: u32 = 20;
pub const MAX_POINTS_D: usize = 64;

#[derive(Debug, Parser)]
#[command(
    name = "rqmc",
    version,
    about = "Scrambled digital nets and RQMC rate studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the first 2^m points of the d-dimensional Sobol' sequence.
    Points {
        #[arg(short)]
        m: u32,
        #[arg(short)]
        d: usize,
        /// Apply nested uniform scrambling determined by --seed.
        #[arg(long)]
        scramble: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check the (t,m,d)-net property of a point file (or stdin).
    VerifyNet {
        /// Point file, one point per line; `-` or omitted reads stdin.
        file: Option<PathBuf>,
        #[arg(short, default_value_t = 2)]
        b: u32,
        /// Defaults to the Sobol' bound for (m, d) when b = 2.
        #[arg(short)]
        t: Option<u32>,
        /// Defaults to log_b of the number of points.
        #[arg(short)]
        m: Option<u32>,
        /// Defaults to the number of columns.
        #[arg(short)]
        d: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an error-rate study described by a key-value config file.
    RateStudy {
        config: PathBuf,
        /// Worker threads (0 = all cores); does not change the output.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Price an Asian payoff or Greek by RQMC.
    Price {
        /// Key-value file with s0, r, sigma, T, d, K, payoff, factor.
        /// Command-line flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long = "T")]
        maturity: Option<f64>,
        #[arg(long = "d")]
        steps: Option<usize>,
        #[arg(long = "K")]
        strike: Option<f64>,
        #[arg(long)]
        payoff: Option<String>,
        #[arg(long)]
        factor: Option<String>,
        /// Points per replicate, a power of 2.
        #[arg(short, long, default_value_t = 1 << 14)]
        n: usize,
        /// Replicates.
        #[arg(short = 'R', long = "replicates", default_value_t = 16)]
        replicates: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Parse `args` (including the program name) and run; returns the exit
/// code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn dispatch(
    command: Command,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    match command {
        Command::Points {
            m,
            d,
            scramble,
            common,
        } => {
            let text = cmd_points(m, d, scramble, common.seed, common.format)?;
            emit(common.out.as_deref(), stdout, &text)?;
            Ok(0)
        }
        Command::VerifyNet {
            file,
            b,
            t,
            m,
            d,
            common,
        } => {
            let text = match file.as_deref() {
                Some(p) if p != Path::new("-") => fs::read_to_string(p)?,
                _ => {
                    let mut s = String::new();
                    stdin.read_to_string(&mut s)?;
                    s
                }
            };
            let (passed, report) = cmd_verify(&text, b, t, m, d, common.format)?;
            emit(common.out.as_deref(), stdout, &report)?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::RateStudy {
            config,
            workers,
            seed,
            out,
            format,
        } => {
            let kv = parse_key_values(&fs::read_to_string(&config)?)?;
            let mut cfg = StudyConfig::from_key_values(&kv)?;
            if let Some(w) = workers {
                cfg.plan.workers = w;
            }
            if let Some(s) = seed {
                cfg.plan.master_seed = s;
            }
            let report = run_study(&cfg)?;
            let text = match format.unwrap_or(Format::Csv) {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json() + "\n",
            };
            emit(out.as_deref(), stdout, &text)?;
            writeln!(
                stderr,
                "slope {:.4} (r^2 {:.4}), predicted {:.4} with slack {}: {}",
                report.fit.slope,
                report.fit.r_squared,
                -report.theoretical_exponent,
                report.slack,
                match report.verdict {
                    Verdict::Consistent => "consistent",
                    Verdict::Inconsistent => "inconsistent",
                }
            )?;
            Ok(match report.verdict {
                Verdict::Consistent => 0,
                Verdict::Inconsistent => 1,
            })
        }
        Command::Price {
            config,
            s0,
            r,
            sigma,
            maturity,
            steps,
            strike,
            payoff,
            factor,
            n,
            replicates,
            common,
        } => {
            let kv = match config {
                Some(p) => parse_key_values(&fs::read_to_string(p)?)?,
                None => Default::default(),
            };
            kv.check_keys(&MODEL_KEYS)?;
            let base = model_from(&kv)?;
            let model = GbmModel::new(
                s0.unwrap_or(base.s0),
                r.unwrap_or(base.r),
                sigma.unwrap_or(base.sigma),
                maturity.unwrap_or(base.maturity),
                steps.unwrap_or(base.steps),
                strike.unwrap_or(base.strike),
            )?;
            let payoff: PayoffKind = match payoff {
                Some(p) => p.parse()?,
                None => kv.get_or("payoff", PayoffKind::AsianCall)?,
            };
            let factor: FactorKind = match factor {
                Some(f) => f.parse()?,
                None => kv.get_or("factor", FactorKind::Ot)?,
            };
            let text = cmd_price(
                model,
                payoff,
                factor,
                n,
                replicates,
                common.seed,
                common.format,
            )?;
            emit(common.out.as_deref(), stdout, &text)?;
            Ok(0)
        }
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Shortest decimal that round-trips the binary64 value, in scientific
/// notation for very small or very large magnitudes.
fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn cmd_points(
    m: u32,
    d: usize,
    scramble_points: bool,
    seed: u64,
    format: Option<Format>,
) -> Result<String> {
    if m > MAX_POINTS_M {
        return Err(Error::Capacity {
            what: "points exponent m",
            requested: m as usize,
            available: MAX_POINTS_M as usize,
        });
    }
    if d > MAX_POINTS_D {
        return Err(Error::Capacity {
            what: "dimension d",
            requested: d,
            available: MAX_POINTS_D,
        });
    }
    let mut pts = generate_net(&NetSpec::sobol(m, d)?)?;
    if scramble_points {
        pts = scramble(&pts, ScrambleSeed::new(seed, 0), SCRAMBLE_DEPTH)?;
    }
    Ok(match format {
        None => join_rows(&pts, " "),
        Some(Format::Csv) => join_rows(&pts, ","),
        Some(Format::Json) => {
            let rows: Vec<&[f64]> = pts.iter().collect();
            serde_json::to_string(&rows).expect("points serialize") + "\n"
        }
    })
}

fn join_rows(pts: &PointSet, sep: &str) -> String {
    let mut out = String::with_capacity(pts.len() * pts.dim() * 20);
    for p in pts.iter() {
        let row: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
        out.push_str(&row.join(sep));
        out.push('\n');
    }
    out
}

/// Parse whitespace- or comma-separated rows, or a JSON array of rows.
pub fn parse_points(text: &str) -> Result<PointSet> {
    let trimmed = text.trim_start();
    let rows: Vec<Vec<f64>> = if trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?
    } else {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|e| Error::Parse {
                        line: i + 1,
                        msg: format!("'{s}': {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        rows
    };
    if rows.is_empty() {
        return contract("no points in input");
    }
    let d = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != d) {
        return Err(Error::Parse {
            line: i + 1,
            msg: format!("row has {} coordinates, expected {d}", rows[i].len()),
        });
    }
    PointSet::from_rows(&rows, PRECISION_DEPTH)
}

#[derive(Serialize)]
struct VerifyReport {
    base: u32,
    t: u32,
    m: u32,
    d: usize,
    passed: bool,
    interval: Option<String>,
    count: Option<u64>,
    expected: Option<u64>,
}

pub fn cmd_verify(
    text: &str,
    b: u32,
    t: Option<u32>,
    m: Option<u32>,
    d: Option<usize>,
    format: Option<Format>,
) -> Result<(bool, String)> {
    if b < 2 {
        return contract(format!("base must be >= 2, got {b}"));
    }
    let pts = parse_points(text)?;
    let d = d.unwrap_or(pts.dim());
    let m = match m {
        Some(m) => m,
        None => {
            let mut m = 0;
            let mut size = 1usize;
            while size < pts.len() {
                size = size.saturating_mul(b as usize);
                m += 1;
            }
            m
        }
    };
    let expected_rows = (b as usize).checked_pow(m);
    if expected_rows != Some(pts.len()) {
        return contract(format!("input has {} points, expected {b}^{m}", pts.len()));
    }
    let t = match t {
        Some(t) => t,
        None if b == 2 => NetSpec::sobol(m, d)?.t,
        None => return contract("-t is required when b != 2"),
    };
    let verdict = verify_net(&pts, b, t, m, d)?;
    let (passed, interval, count, expected) = match &verdict {
        NetVerdict::Pass => (true, None, None, None),
        NetVerdict::Fail {
            interval,
            count,
            expected,
        } => (
            false,
            Some(interval.to_string()),
            Some(*count),
            Some(*expected),
        ),
    };
    let report = VerifyReport {
        base: b,
        t,
        m,
        d,
        passed,
        interval,
        count,
        expected,
    };
    let text = match format {
        Some(Format::Json) => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Some(Format::Csv) => format!(
            "base,t,m,d,passed,interval,count,expected\n{b},{t},{m},{d},{passed},{},{},{}\n",
            report.interval.as_deref().map(|s| format!("\"{s}\"")).unwrap_or_default(),
            count.map(|c| c.to_string()).unwrap_or_default(),
            expected.map(|c| c.to_string()).unwrap_or_default()
        ),
        None => match &verdict {
            NetVerdict::Pass => format!("pass: ({t},{m},{d})-net in base {b}\n"),
            NetVerdict::Fail { interval, count, expected } => format!(
                "fail: ({t},{m},{d})-net in base {b}: {interval} holds {count} points, expected {expected}\n"
            ),
        },
    };
    Ok((passed, text))
}

#[derive(Serialize)]
struct PriceReport {
    payoff: PayoffKind,
    factor: FactorKind,
    model: GbmModel,
    n: usize,
    replicates: usize,
    seed: u64,
    estimate: f64,
    std_error: f64,
    oracle: Option<f64>,
}

pub fn cmd_price(
    model: GbmModel,
    payoff: PayoffKind,
    factor: FactorKind,
    n: usize,
    replicates: usize,
    seed: u64,
    format: Option<Format>,
) -> Result<String> {
    if !n.is_power_of_two() {
        return contract(format!("n = {n} is not a power of 2"));
    }
    let m = n.trailing_zeros();
    if m > MAX_POINTS_M + 4 {
        return Err(Error::Capacity {
            what: "points per replicate",
            requested: n,
            available: 1 << (MAX_POINTS_M + 4),
        });
    }
    let spec = PayoffSpec::new(payoff, model)?;
    let path_factor = PathFactor::for_model(&model, factor)?;
    let est = finance::price(&spec, &path_factor, m, replicates, seed)?;
    let oracle = IntegrandSpec::Payoff {
        payoff,
        factor,
        model,
    }
    .reference()
    .ok();
    let report = PriceReport {
        payoff,
        factor,
        model,
        n,
        replicates,
        seed,
        estimate: est.estimate,
        std_error: est.std_error,
        oracle,
    };
    Ok(match format {
        Some(Format::Json) => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Some(Format::Csv) => format!(
            "payoff,factor,n,R,estimate,std_error,oracle\n{payoff},{factor},{n},{replicates},{},{},{}\n",
            fmt_f64(est.estimate),
            fmt_f64(est.std_error),
            oracle.map(fmt_f64).unwrap_or_default()
        ),
        None => {
            let mut s = format!(
                "{payoff} ({factor}, n = {n}, R = {replicates}): {} +/- {}\n",
                fmt_f64(est.estimate),
                fmt_f64(est.std_error)
            );
            if let Some(o) = oracle {
                s.push_str(&format!("closed form: {}\n", fmt_f64(o)));
            }
            s
        }
    })
}

/// Entry point of the `rqmc` binary.
pub fn main_with_env() -> i32 {
    run(
        std::env::args_os(),
        &mut io::stdin().lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    )
}
