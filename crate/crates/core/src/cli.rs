//! Command-line front end for the `yfr` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boundary::{plancherel, BoundaryMeasure, BoundaryVertex};
use crate::closed_form::{dr_closed, dr_suffix_class};
use crate::error::{Result, YfError};
use crate::experiments::{
    gk_ratio_trace, kernel_trace, tail_q_report, tail_r_report, TailParams, TailReport, Trace,
};
use crate::graph::{count_paths_dp, level};
use crate::numeric::DEFAULT_PRECISION;
use crate::verify::{run_suite, Suite};
use crate::word::Word;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "yfr", version, about = "Path counts and boundary measures on the r-differential Young-Fibonacci graph")]
pub struct Cli {
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the vertices of one level.
    Levels {
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        n: usize,
    },
    /// Count saturated chains between two words.
    Count {
        #[arg(long)]
        r: Option<u32>,
        #[arg(long, default_value = "")]
        from: String,
        #[arg(long)]
        to: String,
        /// Omit to run every method and compare.
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Run an exhaustive identity sweep.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        max_weight: Option<usize>,
    },
    /// Evaluate a measure on one word.
    Measure {
        #[arg(value_enum)]
        kind: MeasureKind,
        #[command(flatten)]
        args: MeasureArgs,
    },
    /// Run a tail or convergence experiment.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[command(flatten)]
        args: ExperimentArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dp,
    Closed,
    Reduce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Plancherel,
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    TailsQ,
    TailsR,
    KernelTrace,
    GkRatio,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    #[arg(long)]
    r: Option<u32>,
    #[arg(long, default_value = "")]
    w: String,
    #[arg(long)]
    v: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Mantissa bits for certified products.
    #[arg(long)]
    precision: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    v: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    w: Option<String>,
    /// Exponent in `π_i`.
    #[arg(long)]
    i: Option<u64>,
    /// Truncation sample points.
    #[arg(long)]
    points: Option<usize>,
}

/// Defaults read from `--config`; command-line flags take precedence.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub r: Option<u32>,
    pub max_weight: Option<usize>,
    pub tolerance: Option<f64>,
    pub precision: Option<usize>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub v: Option<String>,
    pub beta: Option<f64>,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    pub m_max: Option<usize>,
    pub points: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &PathBuf) -> std::result::Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

const DEFAULT_V: &str = "runs=[1,2];idx=const(1);tail=geometric(4,2);tidx=const(1)";

/// A failed run: an error, or a completed report whose checks did not all pass.
enum Failure {
    Error(YfError),
    Violation,
}

impl From<YfError> for Failure {
    fn from(e: YfError) -> Failure {
        Failure::Error(e)
    }
}

fn exit_code(e: &YfError) -> i32 {
    match e {
        YfError::Budget(_) => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(msg) => {
                let _ = writeln!(err, "error: {msg}");
                return EXIT_USAGE;
            }
        },
        None => RunConfig::default(),
    };
    let threads = cli.threads.or(config.threads);
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| execute(&cli, &config, &mut buf));
    if let Err(e) = out.write_all(&buf) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Violation) => EXIT_VIOLATION,
        Err(Failure::Error(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
        .map_err(|e| YfError::Output(e.to_string()))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| YfError::Output(e.to_string());
    wtr.write_record(header).map_err(io)?;
    for row in rows {
        wtr.write_record(row).map_err(io)?;
    }
    let bytes = wtr.into_inner().map_err(|e| YfError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| YfError::Output(e.to_string()))
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn show_word(w: &Word) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.to_string()
    }
}

fn execute(cli: &Cli, cfg: &RunConfig, out: &mut Vec<u8>) -> std::result::Result<(), Failure> {
    let format = cli.format.or(cfg.format).unwrap_or(Format::Text);
    let r_of = |r: Option<u32>| r.or(cfg.r).unwrap_or(1);
    match &cli.command {
        Command::Levels { r, n } => {
            let r = r_of(*r);
            let lv = level(r, *n)?.vertices;
            let text = match format {
                Format::Json => json_text(&json!({
                    "r": r,
                    "n": n,
                    "size": lv.len(),
                    "vertices": lv.iter().map(|w| json!({"word": w, "stats": w.stats()})).collect::<Vec<_>>(),
                })),
                Format::Csv => csv_text(
                    &["word", "weight", "length", "units", "twos"],
                    &lv.iter()
                        .map(|w| {
                            let s = w.stats();
                            vec![
                                w.to_string(),
                                s.weight.to_string(),
                                s.length.to_string(),
                                s.units.to_string(),
                                s.twos.to_string(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                )?,
                Format::Text => lv
                    .iter()
                    .map(|w| {
                        let s = w.stats();
                        format!("{}\tweight={} length={} units={} twos={}\n", show_word(w), s.weight, s.length, s.units, s.twos)
                    })
                    .collect(),
            };
            emit(out, &text)?;
            Ok(())
        }
        Command::Count { r, from, to, method } => {
            let r = r_of(*r);
            let w = Word::parse(from, r)?;
            let v = Word::parse(to, r)?;
            if w.weight() > v.weight() {
                return Err(YfError::OutOfRange {
                    what: "|from|",
                    value: w.weight() as i64,
                    max: v.weight() as i64,
                }
                .into());
            }
            let methods = match method {
                Some(m) => vec![*m],
                None => vec![Method::Dp, Method::Closed, Method::Reduce],
            };
            let mut results: Vec<(&str, BigUint)> = Vec::new();
            for m in methods {
                let (name, value) = match m {
                    Method::Dp => ("dp", count_paths_dp(&w, &v)?),
                    Method::Closed => ("closed", dr_closed(&w, &v)?),
                    Method::Reduce => {
                        let h = w.common_suffix_len(&v);
                        let mut total = BigUint::from(0u32);
                        for l in 0..=h {
                            total += dr_suffix_class(&w, &v, l)?;
                        }
                        ("reduce", total)
                    }
                };
                results.push((name, value));
            }
            let agree = results.windows(2).all(|p| p[0].1 == p[1].1);
            let text = match format {
                Format::Json => {
                    let counts: serde_json::Map<String, Value> = results
                        .iter()
                        .map(|(n, c)| (n.to_string(), json!(c.to_string())))
                        .collect();
                    json_text(&json!({"r": r, "from": w, "to": v, "counts": counts, "agree": agree}))
                }
                Format::Csv => csv_text(
                    &["method", "count"],
                    &results.iter().map(|(n, c)| vec![n.to_string(), c.to_string()]).collect::<Vec<_>>(),
                )?,
                Format::Text => {
                    if agree {
                        format!("{}\n", results[0].1)
                    } else {
                        results.iter().map(|(n, c)| format!("{n}\t{c}\n")).collect()
                    }
                }
            };
            emit(out, &text)?;
            if agree {
                Ok(())
            } else {
                Err(Failure::Violation)
            }
        }
        Command::Verify { suite, r, max_weight } => {
            let r = r_of(*r);
            let max_weight = max_weight.or(cfg.max_weight).unwrap_or(6);
            let report = run_suite(*suite, r, max_weight)?;
            let text = match format {
                Format::Json => json_text(&serde_json::to_value(&report).expect("report serializes")),
                Format::Csv => csv_text(
                    &["suite", "r", "max_weight", "checked", "failures", "passed"],
                    &[vec![
                        report.suite.to_string(),
                        report.r.to_string(),
                        report.max_weight.to_string(),
                        report.checked.to_string(),
                        report.failures.to_string(),
                        report.passed().to_string(),
                    ]],
                )?,
                Format::Text => {
                    let mut t = format!(
                        "{} r={} max_weight={}: {} checked, {} failed: {}\n",
                        report.suite,
                        report.r,
                        report.max_weight,
                        report.checked,
                        report.failures,
                        if report.passed() { "PASS" } else { "FAIL" }
                    );
                    if let Some(c) = &report.first_counterexample {
                        t.push_str(&format!("first counterexample: {c}\n"));
                    }
                    t
                }
            };
            emit(out, &text)?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Violation)
            }
        }
        Command::Measure { kind, args } => {
            let r = r_of(args.r);
            let w = Word::parse(&args.w, r)?;
            let (value, manifest) = match kind {
                MeasureKind::Plancherel => {
                    let q = plancherel(&w);
                    (json!(q.to_string()), json!({"measure": "plancherel", "r": r, "w": w}))
                }
                MeasureKind::Boundary => {
                    let spec = args.v.clone().or(cfg.v.clone()).unwrap_or(DEFAULT_V.to_string());
                    let v = BoundaryVertex::parse(&spec, r)?;
                    let beta = args.beta.or(cfg.beta).unwrap_or(1.0);
                    let tol = args.tol.or(cfg.tolerance).unwrap_or(1e-12);
                    let prec = args.precision.or(cfg.precision).unwrap_or(DEFAULT_PRECISION);
                    let m = BoundaryMeasure::new(&v, beta, tol)?.with_precision(prec);
                    let mu = m.eval(&w)?;
                    (
                        serde_json::to_value(&mu).expect("measure serializes"),
                        json!({"measure": "boundary", "r": r, "w": w, "v": v.to_string(),
                               "beta": beta, "tol": tol, "precision": prec}),
                    )
                }
            };
            let text = match format {
                Format::Json => {
                    let mut m = manifest;
                    m["value"] = value;
                    json_text(&m)
                }
                Format::Csv => {
                    let (val, rad) = split_value(&value);
                    csv_text(&["word", "value", "radius"], &[vec![w.to_string(), val, rad]])?
                }
                Format::Text => match &value {
                    Value::String(s) => format!("{s}\n"),
                    _ => {
                        let (val, rad) = split_value(&value);
                        format!("{val} ± {rad}\n")
                    }
                },
            };
            emit(out, &text)?;
            Ok(())
        }
        Command::Experiment { kind, args } => {
            let r = r_of(args.r);
            let spec = args.v.clone().or(cfg.v.clone()).unwrap_or(DEFAULT_V.to_string());
            let v = BoundaryVertex::parse(&spec, r)?;
            let beta = args.beta.or(cfg.beta).unwrap_or(1.0);
            let tol = args.tol.or(cfg.tolerance).unwrap_or(1e-9);
            let points = args.points.or(cfg.points).unwrap_or(10);
            match kind {
                ExperimentKind::TailsQ | ExperimentKind::TailsR => {
                    let m_max = args.m_max.or(cfg.m_max).unwrap_or(if r == 1 { 8 } else { 6 });
                    let params = TailParams::new(v, beta, tol, m_max);
                    let report = if *kind == ExperimentKind::TailsQ {
                        tail_q_report(&params, args.k.or(cfg.k).unwrap_or(1))?
                    } else {
                        tail_r_report(&params, args.eps.or(cfg.eps).unwrap_or(0.3))?
                    };
                    emit(out, &render_report(&report, format)?)?;
                }
                ExperimentKind::KernelTrace => {
                    let w = Word::parse(args.w.as_deref().unwrap_or(""), r)?;
                    let trace = kernel_trace(&w, &v, beta, points, tol)?;
                    emit(out, &render_trace(&trace, format)?)?;
                }
                ExperimentKind::GkRatio => {
                    let i = args.i.unwrap_or(2);
                    let trace = gk_ratio_trace(&v, beta, i, points, tol)?;
                    emit(out, &render_trace(&trace, format)?)?;
                }
            }
            Ok(())
        }
    }
}

fn split_value(v: &Value) -> (String, String) {
    match v {
        Value::String(s) => (s.clone(), "0".to_string()),
        _ => (
            v["value"].as_f64().map(|x| format!("{x:e}")).unwrap_or_default(),
            v["radius"].as_f64().map(|x| format!("{x:e}")).unwrap_or_default(),
        ),
    }
}

fn render_report(report: &TailReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => report.to_json(),
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| YfError::Output(e.to_string()))?
        }
        Format::Text => {
            let mut t = format!("# {}\n", report.manifest);
            for row in &report.rows {
                t.push_str(&format!(
                    "m={} set={}/{} mass={:.6e} ± {:.1e}\n",
                    row.m,
                    row.set_size,
                    row.level_size,
                    row.mass.value(),
                    row.mass.radius()
                ));
            }
            t
        }
    })
}

fn render_trace(trace: &Trace, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => trace.to_json(),
        Format::Csv => {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf)?;
            String::from_utf8(buf).map_err(|e| YfError::Output(e.to_string()))?
        }
        Format::Text => {
            let mut t = format!("# {}\n", trace.manifest);
            for p in &trace.points {
                t.push_str(&format!(
                    "n={} len={} value={:.12e} target={:.12e} distance={:.3e}\n",
                    p.n,
                    p.length,
                    p.value.value(),
                    p.target,
                    p.distance
                ));
            }
            t
        }
    })
}
