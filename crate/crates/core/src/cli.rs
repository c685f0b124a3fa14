//! Command-line front end. `run` parses argv, dispatches and returns the
//! process exit code: 0 on success, 1 when verification has failing entries
//! or a computation does not converge, 2 on bad usage or bad input.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::extension::{energy_curve, mode_series, paired_fit_model};
use crate::format::{opt17, sig17};
use crate::logseries::{series_khat, series_ktilde, LogLaurentSeries, SingularModel};
use crate::method::MethodRegistry;
use crate::renorm::{geometric_grid, renorm_limit_fit, CurveMeta, EnergyCurve};
use crate::specfun::{bessel_k, Order, ScaledKind};
use crate::spectral::{gaussian_profile, make_symbol, pairing, SymbolKind};
use crate::verify::{oracle_symbol, symbol_constant, verify_run, ProfileSpec, SymbolVariant, VerifyConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ndext",
    version,
    about = "Renormalized extension-problem symbols and finite parts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate K_ν, z^{-ν}K_ν or z^{ν}K_ν.
    #[command(allow_negative_numbers = true)]
    Bessel {
        #[arg(long, value_parser = parse_kind, default_value = "plain")]
        kind: ScaledKind,
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        z: f64,
        /// Print a JSON object instead of the bare value.
        #[arg(long)]
        json: bool,
    },
    /// Print a small-z expansion as (exponent, logpower, coefficient) rows.
    #[command(allow_negative_numbers = true)]
    Series {
        #[arg(long, value_enum)]
        which: SeriesKind,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 8.0)]
        order: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Fit the finite part of a sampled curve (CSV columns epsilon,value).
    #[command(allow_negative_numbers = true)]
    Renorm {
        /// pow:a,b;log;corr:a,b;logcorr:a;log2corr:a, or SingularModel JSON.
        #[arg(long, value_parser = parse_model)]
        model: SingularModel,
        /// Curve file; `-` reads stdin.
        #[arg(long, default_value = "-")]
        input: String,
        /// Keep only rows with epsilon ≥ this.
        #[arg(long)]
        eps_min: Option<f64>,
        /// Keep only rows with epsilon ≤ this.
        #[arg(long)]
        eps_max: Option<f64>,
        /// Require exactly this many rows after windowing.
        #[arg(long)]
        eps_count: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plancherel pairing of two Gaussians against a multiplier.
    #[command(allow_negative_numbers = true)]
    Pairing {
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Width of the second Gaussian; defaults to --width.
        #[arg(long)]
        width2: Option<f64>,
        /// frac:σ, log or affine:c0,clog.
        #[arg(long, value_parser = parse_symbol)]
        symbol: SymbolKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the Gaussian self-energy E(ε) on a geometric grid.
    #[command(allow_negative_numbers = true)]
    Energy {
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        eps_max: f64,
        #[arg(long, default_value_t = 48)]
        eps_count: usize,
        /// With --format csv, also write the singular model JSON here.
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Extract the per-frequency symbol at (ν, r).
    #[command(allow_negative_numbers = true)]
    Symbol {
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value = "subtract")]
        method: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the symbol verification suite and emit the report.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 0.5, 1.0, 1.5])]
        nu: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values = ["fit", "subtract"])]
        method: Vec<String>,
        /// Gaussian profiles as d:width, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_profile)]
        profile: Vec<ProfileSpec>,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Skip the K-tilde limit and K-hat constant audit entries.
        #[arg(long)]
        no_audit: bool,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesKind {
    /// z^{-ν}K_ν(z)
    Khat,
    /// z^{ν}K_ν(z)
    Ktilde,
    /// Per-frequency energy at r = 1.
    Mode,
}

fn parse_kind(s: &str) -> std::result::Result<ScaledKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_symbol(s: &str) -> std::result::Result<SymbolKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_profile(s: &str) -> std::result::Result<ProfileSpec, String> {
    let bad = || format!("bad profile '{s}', expected d:width");
    let (d, w) = s.split_once(':').ok_or_else(bad)?;
    Ok(ProfileSpec {
        d: d.trim().parse().map_err(|_| bad())?,
        width: w.trim().parse().map_err(|_| bad())?,
    })
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| format!("bad number '{t}'")))
        .collect()
}

fn parse_model(s: &str) -> std::result::Result<SingularModel, String> {
    let model = if s.trim_start().starts_with('{') {
        serde_json::from_str(s).map_err(|e| format!("bad model JSON: {e}"))?
    } else {
        let mut m = SingularModel::default();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "log" {
                m.has_log = true;
                continue;
            }
            let (key, values) = part
                .split_once(':')
                .ok_or_else(|| format!("bad model part '{part}'"))?;
            let values = parse_list(values)?;
            match key {
                "pow" => m.power_exponents = values,
                "corr" => m.correction_exponents = values,
                "logcorr" => m.log_corrections = values,
                "log2corr" => m.log2_corrections = values,
                other => return Err(format!("unknown model part '{other}'")),
            }
        }
        m
    };
    SingularModel::new(
        model.power_exponents,
        model.has_log,
        model.correction_exponents,
        model.log_corrections,
        model.log2_corrections,
    )
    .map_err(|e| e.to_string())
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return 2;
        }
    };
    match dispatch(cli.command, stdin) {
        Ok((text, out, code)) => match emit(&text, out.as_ref(), stdout) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                2
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::UnsupportedOrder(..)
        | Error::Config(_)
        | Error::Structure(_)
        | Error::DimensionMismatch(..) => 2,
        _ => 1,
    }
}

fn emit(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

type Dispatched = (String, Option<PathBuf>, i32);

fn dispatch(command: Command, stdin: &mut dyn Read) -> Result<Dispatched> {
    match command {
        Command::Bessel { kind, nu, z, json } => {
            let v = bessel_k(kind, nu, z)?;
            let text = if json {
                to_json(&json!({ "kind": kind, "nu": nu, "z": z, "value": v }))
            } else {
                format!("{}\n", sig17(v))
            };
            Ok((text, None, 0))
        }
        Command::Series {
            which,
            nu,
            order,
            output,
        } => {
            let s = match which {
                SeriesKind::Khat => series_khat(Order::new(nu), order)?,
                SeriesKind::Ktilde => series_ktilde(nu, order)?,
                SeriesKind::Mode => mode_series(Order::new(nu), order)?,
            };
            Ok((series_text(&s, output.format), output.out, 0))
        }
        Command::Renorm {
            model,
            input,
            eps_min,
            eps_max,
            eps_count,
            out,
        } => {
            let raw = if input == "-" {
                let mut s = String::new();
                stdin
                    .read_to_string(&mut s)
                    .map_err(|e| Error::Config(format!("cannot read stdin: {e}")))?;
                s
            } else {
                fs::read_to_string(&input)
                    .map_err(|e| Error::Config(format!("cannot read --input {input}: {e}")))?
            };
            let lo = eps_min.unwrap_or(0.0);
            let hi = eps_max.unwrap_or(f64::INFINITY);
            let mut rows: Vec<(f64, f64)> = read_curve(&raw)?
                .into_iter()
                .filter(|(e, _)| *e >= lo && *e <= hi)
                .collect();
            rows.sort_by(|a, b| b.0.total_cmp(&a.0));
            let (eps, values): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
            if let Some(n) = eps_count {
                if eps.len() != n {
                    return Err(Error::Config(format!(
                        "--eps-count {n} but {} rows fall in the window",
                        eps.len()
                    )));
                }
            }
            let curve = EnergyCurve::new(
                eps,
                values,
                CurveMeta {
                    nu: None,
                    description: input,
                },
            )?;
            let fit = renorm_limit_fit(&curve, &model)?;
            Ok((to_json(&fit), out, 0))
        }
        Command::Pairing {
            d,
            width,
            width2,
            symbol,
            out,
        } => {
            let f = gaussian_profile(d, width)?;
            let g = gaussian_profile(d, width2.unwrap_or(width))?;
            let value = pairing(&f, &g, &make_symbol(symbol))?;
            let text = to_json(&json!({
                "d": d,
                "width": width,
                "width2": width2.unwrap_or(width),
                "symbol": symbol.to_string(),
                "value": value,
            }));
            Ok((text, out, 0))
        }
        Command::Energy {
            nu,
            d,
            width,
            eps_min,
            eps_max,
            eps_count,
            model_out,
            output,
        } => {
            let order = Order::new(nu);
            let f = gaussian_profile(d, width)?;
            let grid = geometric_grid(eps_min, eps_max, eps_count)?;
            let curve = energy_curve(order, &f, &f, &grid)?;
            let model = paired_fit_model(order, 0.0)?;
            let mut rows: Vec<(f64, f64)> = curve
                .eps
                .iter()
                .copied()
                .zip(curve.values.iter().copied())
                .collect();
            rows.sort_by(|a, b| b.0.total_cmp(&a.0));
            let text = match output.format {
                Format::Csv => {
                    if let Some(path) = &model_out {
                        fs::write(path, to_json(&model))
                            .map_err(|e| Error::Config(format!("cannot write --model-out: {e}")))?;
                    }
                    let mut s = String::from("epsilon,E\n");
                    for (e, v) in rows {
                        s.push_str(&format!("{},{}\n", sig17(e), sig17(v)));
                    }
                    s
                }
                Format::Json => to_json(&json!({
                    "nu": nu,
                    "profile": f.label,
                    "model": model,
                    "curve": rows.iter().map(|(e, v)| json!({"epsilon": e, "E": v})).collect::<Vec<_>>(),
                })),
            };
            Ok((text, output.out, 0))
        }
        Command::Symbol { nu, r, method, out } => {
            let registry = MethodRegistry::default();
            let m = registry.get(&method)?;
            let order = Order::new(nu);
            let extracted = m.mode_symbol(order, r)?;
            let text = to_json(&json!({
                "nu": nu,
                "r": r,
                "method": method,
                "extracted": extracted,
                "oracle": oracle_symbol(order, r),
                "corrected": symbol_constant(order, r, SymbolVariant::Corrected).ok(),
                "paper_printed": symbol_constant(order, r, SymbolVariant::Printed).ok(),
            }));
            Ok((text, out, 0))
        }
        Command::Verify {
            nu,
            r,
            method,
            profile,
            tolerance,
            no_audit,
            output,
        } => {
            let config = VerifyConfig {
                nus: nu,
                rs: r,
                profiles: profile,
                methods: method,
                tolerance,
                audit: !no_audit,
            };
            let report = verify_run(&config, &MethodRegistry::default())?;
            let code = if report.has_failures() { 1 } else { 0 };
            let text = match output.format {
                Format::Json => to_json(&report),
                Format::Csv => report_csv(&report)?,
            };
            Ok((text, output.out, code))
        }
    }
}

fn series_text(s: &LogLaurentSeries, format: Format) -> String {
    match format {
        Format::Json => to_json(s),
        Format::Csv => {
            let mut text = String::from("exponent,logpower,coefficient\n");
            for t in s.terms() {
                text.push_str(&format!(
                    "{},{},{}\n",
                    sig17(t.exponent),
                    t.log_power,
                    sig17(t.coeff)
                ));
            }
            text
        }
    }
}

fn read_curve(raw: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(raw.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Config(format!("bad curve CSV: {e}")))?;
        if record.len() < 2 {
            return Err(Error::Config(format!("curve row {} needs epsilon,value", i + 1)));
        }
        match (f64::from_str(&record[0]), f64::from_str(&record[1])) {
            (Ok(e), Ok(v)) => rows.push((e, v)),
            // header line
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Config(format!("curve row {} is not numeric", i + 1)));
            }
        }
    }
    Ok(rows)
}

fn report_csv(report: &crate::verify::VerificationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record([
        "nu",
        "target",
        "method",
        "extracted",
        "oracle",
        "corrected",
        "paper_printed",
        "abs_residual",
        "rel_residual",
        "printed_ratio",
        "status",
        "error",
    ])
    .map_err(io)?;
    for e in &report.entries {
        w.write_record([
            sig17(e.nu),
            e.target.clone(),
            e.method.clone(),
            opt17(e.extracted),
            opt17(e.oracle),
            opt17(e.corrected),
            opt17(e.printed),
            opt17(e.abs_residual),
            opt17(e.rel_residual),
            opt17(e.printed_ratio),
            e.status.to_string(),
            e.error.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
