//! Command-line front end: analytic switch reports, parameter sweeps,
//! Monte-Carlo cross-checks, and user circuit files.
//!
//! Exit codes: 0 success, 1 statistical-check failure (`mc`), 2 usage or
//! parse error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvswitch::algebra::variance;
use cvswitch::dsl;
use cvswitch::montecarlo::{compare_to_analytic, ShotConfig};
use cvswitch::protocol::{switch_report, SwitchParams};
use cvswitch::report::{
    fmt_g17, mc_csv, mc_json, report_csv, report_json, OutputFormat, REPORT_CSV_HEADER,
};

#[derive(Parser)]
#[command(name = "cvswitch", version, about = "Continuous-variable teleportation switch simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output format (csv or json). Defaults to CVSWITCH_FORMAT, then to
    /// json (csv for `sweep`).
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analytic report: variances, fidelities, witnesses, routing verdict.
    Fidelity(ParamArgs),
    /// Grid sweep over up to two parameter axes; CSV rows in row-major order.
    Sweep(SweepArgs),
    /// Monte-Carlo estimates with z-scores against the exact algebra.
    Mc(McArgs),
    /// Parse, elaborate, and evaluate a circuit file.
    Run(RunArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Squeezing parameter of the a-side EPR source.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ra: f64,
    /// Squeezing parameter of the b-side EPR source.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rb: f64,
    /// Feedforward gain toward Bob1.
    #[arg(long, default_value_t = 1.0)]
    g1: f64,
    /// Feedforward gain toward Bob2.
    #[arg(long, default_value_t = 1.0)]
    g2: f64,
    /// Input coherent amplitude, real part.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_re: f64,
    /// Input coherent amplitude, imaginary part.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_im: f64,
}

impl ParamArgs {
    fn params(&self) -> SwitchParams {
        SwitchParams::new(self.ra, self.rb, self.g1, self.g2)
            .with_alpha(self.alpha_re, self.alpha_im)
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Value or range `start:stop:count` for r_a.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    ra: String,
    /// Value or range `start:stop:count` for r_b.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    rb: String,
    /// Value or range `start:stop:count` for g1.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    g1: String,
    /// Value or range `start:stop:count` for g2.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    g2: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_im: f64,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Number of shots.
    #[arg(long, default_value_t = 1_000_000)]
    shots: u64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    /// Circuit file (`.cvc`).
    circuit: PathBuf,
    /// Placeholder substitutions, `name=value`; repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
    /// Name of the INPUT mode to score teleportation fidelity against.
    #[arg(long)]
    input: Option<String>,
    /// Feedforward gain used in the fidelity formula (with --input).
    #[arg(long, allow_negative_numbers = true)]
    gain: Option<f64>,
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn resolve_format(flag: Option<OutputFormat>, default: OutputFormat) -> OutputFormat {
    if let Some(f) = flag {
        return f;
    }
    if let Ok(env) = std::env::var("CVSWITCH_FORMAT") {
        if let Ok(f) = env.parse() {
            return f;
        }
    }
    default
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), std::io::Error> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Parses `x` or `start:stop:count` into grid values.
fn parse_axis(spec: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("malformed range `{spec}` (expected value or start:stop:count)");
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [v] => {
            let v: f64 = v.parse().map_err(|_| bad())?;
            Ok(vec![v])
        }
        [start, stop, count] => {
            let start: f64 = start.parse().map_err(|_| bad())?;
            let stop: f64 = stop.parse().map_err(|_| bad())?;
            let count: usize = count.parse().map_err(|_| bad())?;
            if count == 0 {
                return Err(bad());
            }
            if count == 1 {
                return Ok(vec![start]);
            }
            let step = (stop - start) / (count - 1) as f64;
            Ok((0..count).map(|i| start + step * i as f64).collect())
        }
        _ => Err(bad()),
    }
}

fn cmd_fidelity(args: &ParamArgs, format: OutputFormat, out: &Option<PathBuf>) -> ExitCode {
    let rep = match switch_report(&args.params()) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let text = match format {
        OutputFormat::Csv => report_csv(&rep),
        OutputFormat::Json => report_json(&rep),
    };
    match emit(out, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage_error(e),
    }
}

fn cmd_sweep(args: &SweepArgs, format: OutputFormat, out: &Option<PathBuf>) -> ExitCode {
    let axes = [
        parse_axis(&args.ra),
        parse_axis(&args.rb),
        parse_axis(&args.g1),
        parse_axis(&args.g2),
    ];
    let mut grids = Vec::new();
    for axis in axes {
        match axis {
            Ok(v) => grids.push(v),
            Err(e) => return usage_error(e),
        }
    }
    let swept = grids.iter().filter(|g| g.len() > 1).count();
    if swept > 2 {
        return usage_error("at most 2 swept axes are allowed");
    }

    let mut rows = Vec::new();
    for &ra in &grids[0] {
        for &rb in &grids[1] {
            for &g1 in &grids[2] {
                for &g2 in &grids[3] {
                    let p = SwitchParams::new(ra, rb, g1, g2)
                        .with_alpha(args.alpha_re, args.alpha_im);
                    match switch_report(&p) {
                        Ok(r) => rows.push(r),
                        Err(e) => return usage_error(e),
                    }
                }
            }
        }
    }

    let text = match format {
        OutputFormat::Csv => {
            let mut s = String::from(REPORT_CSV_HEADER);
            s.push('\n');
            for r in &rows {
                s.push_str(&cvswitch::report::report_csv_row(r));
                s.push('\n');
            }
            s
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("json serialization");
            s.push('\n');
            s
        }
    };
    match emit(out, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage_error(e),
    }
}

fn cmd_mc(args: &McArgs, format: OutputFormat, out: &Option<PathBuf>) -> ExitCode {
    if args.shots < 1 {
        return usage_error("--shots must be at least 1");
    }
    let config = ShotConfig::new(args.shots, args.seed);
    let rep = match compare_to_analytic(&args.params.params(), &config) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    if rep.degenerate {
        eprintln!("warning: too few shots for variance standard errors");
    }
    let text = match format {
        OutputFormat::Csv => mc_csv(&rep),
        OutputFormat::Json => mc_json(&rep),
    };
    if let Err(e) = emit(out, &text) {
        return usage_error(e);
    }
    if rep.any_flagged {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_run(args: &RunArgs, format: OutputFormat, out: &Option<PathBuf>) -> ExitCode {
    let source = match std::fs::read_to_string(&args.circuit) {
        Ok(s) => s,
        Err(e) => return usage_error(format!("{}: {e}", args.circuit.display())),
    };
    let mut values = BTreeMap::new();
    for kv in &args.set {
        match kv.split_once('=') {
            Some((k, v)) => {
                values.insert(k.to_string(), v.to_string());
            }
            None => return usage_error(format!("--set expects NAME=VALUE, got `{kv}`")),
        }
    }
    let substituted = match dsl::substitute_placeholders(&source, &values) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let ast = match dsl::parse(&substituted) {
        Ok(a) => a,
        Err(e) => return usage_error(e),
    };
    let el = dsl::elaborate(&ast);

    let alpha_sq = match &args.input {
        Some(name) => match el.inputs.get(name) {
            Some(&(re, im)) => Some(re * re + im * im),
            None => return usage_error(format!("`{name}` is not an INPUT mode of the circuit")),
        },
        None => None,
    };
    let fidelity_of = |vx: f64, vy: f64| -> Option<f64> {
        let alpha_sq = alpha_sq?;
        let gain = args.gain?;
        Some(cvswitch::protocol::fidelity_from_variances(vx, vy, gain, alpha_sq))
    };

    let text = match format {
        OutputFormat::Csv => {
            let mut s = String::from("output,mean_x,mean_y,var_x,var_y,fidelity\n");
            for (name, mode) in &el.outputs {
                let (vx, vy) = (variance(&mode.x, &el.noise), variance(&mode.y, &el.noise));
                let f = fidelity_of(vx, vy).map(fmt_g17).unwrap_or_default();
                s.push_str(&format!(
                    "{name},{},{},{},{},{f}\n",
                    fmt_g17(mode.x.mean()),
                    fmt_g17(mode.y.mean()),
                    fmt_g17(vx),
                    fmt_g17(vy)
                ));
            }
            s
        }
        OutputFormat::Json => {
            let mut map = serde_json::Map::new();
            for (name, mode) in &el.outputs {
                let (vx, vy) = (variance(&mode.x, &el.noise), variance(&mode.y, &el.noise));
                let mut obj = serde_json::json!({
                    "mean_x": mode.x.mean(),
                    "mean_y": mode.y.mean(),
                    "var_x": vx,
                    "var_y": vy,
                });
                if let Some(f) = fidelity_of(vx, vy) {
                    obj["fidelity"] = serde_json::json!(f);
                }
                map.insert(name.clone(), obj);
            }
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ "outputs": map }))
                .expect("json serialization");
            s.push('\n');
            s
        }
    };
    match emit(out, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage_error(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Fidelity(args) => {
            let format = resolve_format(cli.format, OutputFormat::Json);
            cmd_fidelity(args, format, &cli.output)
        }
        Cmd::Sweep(args) => {
            let format = resolve_format(cli.format, OutputFormat::Csv);
            cmd_sweep(args, format, &cli.output)
        }
        Cmd::Mc(args) => {
            let format = resolve_format(cli.format, OutputFormat::Csv);
            cmd_mc(args, format, &cli.output)
        }
        Cmd::Run(args) => {
            let format = resolve_format(cli.format, OutputFormat::Json);
            cmd_run(args, format, &cli.output)
        }
    }
}
