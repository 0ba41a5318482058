//! Command-line front end: build networks, run certification sweeps, and
//! evaluate saved networks.
//!
//! Exit codes: 0 on success, 1 when a certification fails, 2 for usage,
//! capacity, or input errors.

use clap::{Args, Parser, Subcommand};
use karelu::measure::{
    bad_set_intervals, certification_bound, default_grid_bits, lp_error, rate_fit, ErrorReport,
};
use karelu::registry;
use karelu::relunet::{
    assemble_full_with_budget, full_architecture, load_network, save_network, BitExtractorPlan,
    NetworkMeta, ReluNetwork, BUILDER_VERSION,
};
use karelu::digits::ratio_to_f64;
use karelu::HolderFunction;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CERTIFICATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "karelu",
    about = "Compile Hölder functions into explicit ReLU networks and certify their error bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a network for a registry function and write it as JSON.
    Build(BuildArgs),
    /// Run the certification suite for a configuration or a saved network.
    Verify(VerifyArgs),
    /// Evaluate a saved network at a point.
    Eval(EvalArgs),
}

#[derive(Args)]
struct FunctionArgs {
    /// Registry function id (coord1, dist05, dist1, sines, product, pwc1..pwc3).
    #[arg(long = "fn", value_name = "NAME")]
    function: String,
    /// Input dimension d.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Seed for the random piecewise-constant tables.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Truncation depth K.
    #[arg(long = "K")]
    k: usize,
    /// L^p exponent the weight plan targets.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Output file for the network JSON.
    #[arg(long)]
    out: PathBuf,
    /// Override for the outer-layer unit budget.
    #[arg(long, default_value_t = karelu::outer::DEFAULT_UNIT_BUDGET)]
    max_units: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Saved network to verify instead of building from a configuration.
    #[arg(long, conflicts_with_all = ["function", "k", "k_range"])]
    net: Option<PathBuf>,
    #[arg(long = "fn", value_name = "NAME")]
    function: Option<String>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Single truncation depth K.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Inclusive K sweep, e.g. 3..6.
    #[arg(long = "K-range", value_name = "A..B")]
    k_range: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Midpoint-grid resolution per axis; default K+2 capped by budget.
    #[arg(long)]
    grid_bits: Option<usize>,
    /// Append the report rows to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    #[arg(long, default_value_t = karelu::outer::DEFAULT_UNIT_BUDGET)]
    max_units: usize,
}

#[derive(Args)]
struct EvalArgs {
    /// Network file to evaluate.
    #[arg(long)]
    net: PathBuf,
    /// Comma-separated input point, e.g. 0.3,0.3.
    #[arg(long)]
    point: String,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Build(args) => run_build(args),
        Command::Verify(args) => run_verify(args),
        Command::Eval(args) => run_eval(args),
    }
}

fn usage_err(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn lookup(function: &str, d: usize, seed: u64) -> Result<HolderFunction, ExitCode> {
    registry::get(function, d, seed)
        .ok_or_else(|| usage_err(format!("unknown registry function {function:?}")))
}

fn build_network(
    f: &HolderFunction,
    k: usize,
    p: f64,
    max_units: usize,
) -> Result<ReluNetwork, ExitCode> {
    assemble_full_with_budget(f, k, p, max_units).map_err(usage_err)
}

fn meta_for(f: &HolderFunction, k: usize, p: f64, seed: u64) -> Result<NetworkMeta, ExitCode> {
    let plan = BitExtractorPlan::new(k, f.dimension(), f.beta(), p).map_err(usage_err)?;
    Ok(NetworkMeta {
        function: f.name().to_string(),
        d: f.dimension(),
        k,
        p,
        beta: f.beta(),
        q: f.holder_constant(),
        r: plan.r,
        builder_version: BUILDER_VERSION.to_string(),
        seed: if f.name().starts_with("pwc") {
            Some(seed)
        } else {
            None
        },
    })
}

fn run_build(args: BuildArgs) -> ExitCode {
    let f = match lookup(&args.function.function, args.function.d, args.function.seed) {
        Ok(f) => f,
        Err(code) => return code,
    };
    let net = match build_network(&f, args.k, args.p, args.max_units) {
        Ok(net) => net,
        Err(code) => return code,
    };
    let meta = match meta_for(&f, args.k, args.p, args.function.seed) {
        Ok(meta) => meta,
        Err(code) => return code,
    };
    if let Err(e) = save_network(&args.out, &net, &meta) {
        return usage_err(e);
    }
    println!("architecture {}", net.architecture());
    println!("max_weight {}", net.max_abs_weight());
    println!("wrote {}", args.out.display());
    ExitCode::SUCCESS
}

fn parse_k_range(args: &VerifyArgs) -> Result<Vec<usize>, ExitCode> {
    match (&args.k, &args.k_range) {
        (Some(k), None) => Ok(vec![*k]),
        (None, Some(range)) => {
            let (a, b) = range
                .split_once("..")
                .ok_or_else(|| usage_err(format!("bad K range {range:?}, expected a..b")))?;
            let a: usize = a.trim().parse().map_err(usage_err)?;
            let b: usize = b.trim().parse().map_err(usage_err)?;
            if a > b {
                return Err(usage_err(format!("empty K range {range:?}")));
            }
            Ok((a..=b).collect())
        }
        (None, None) => Err(usage_err("verify needs --K, --K-range, or --net")),
        (Some(_), Some(_)) => Err(usage_err("--K and --K-range are mutually exclusive")),
    }
}

struct Certification {
    passed: bool,
    report: ErrorReport,
}

/// One pass/fail line per check; returns the report row.
fn certify(
    f: &HolderFunction,
    net: &ReluNetwork,
    k: usize,
    p: f64,
    grid_bits: usize,
) -> Result<Certification, ExitCode> {
    let d = f.dimension();
    let mut passed = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        passed &= ok;
    };

    let arch = net.architecture();
    let expected = full_architecture(d, k);
    check(
        "architecture",
        arch == expected,
        format!("{arch} vs expected {expected}"),
    );

    let plan = BitExtractorPlan::new(k, d, f.beta(), p).map_err(usage_err)?;
    let max_weight = net.max_abs_weight();
    let weight_bound =
        2.0 * (k as f64).max(f.sup_norm()) * 2f64.powf(k as f64 * (d as f64).max(p * f.beta()));
    check(
        "weight_bound",
        max_weight <= weight_bound,
        format!("max |w| = {max_weight} vs bound {weight_bound}"),
    );

    let bad = bad_set_intervals(k, plan.r);
    let bad_bound = k as f64 * 2f64.powi(-plan.r);
    check(
        "bad_set_measure",
        bad.within_measure_bound(),
        format!("{} vs K*2^-r = {bad_bound}", bad.total_measure_f64()),
    );

    let measured = lp_error(f, net, p, grid_bits).map_err(usage_err)?;
    let bound = certification_bound(f, k);
    check(
        "lp_error",
        measured <= bound,
        format!("L^{p} error {measured} vs bound {bound}"),
    );

    Ok(Certification {
        passed,
        report: ErrorReport {
            function: f.name().to_string(),
            d,
            k,
            p,
            beta: f.beta(),
            q: f.holder_constant(),
            measured_lp: measured,
            bound,
            max_weight,
            bad_set_measure: bad.total_measure,
            grid_bits,
        },
    })
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    let mut reports = Vec::new();
    let mut all_passed = true;

    if let Some(path) = &args.net {
        let (net, meta) = match load_network(path) {
            Ok(v) => v,
            Err(e) => return usage_err(e),
        };
        let f = match lookup(&meta.function, meta.d, meta.seed.unwrap_or(0)) {
            Ok(f) => f,
            Err(code) => return code,
        };
        // Determinism makes rebuild-and-compare an exact authenticity check.
        let rebuilt = match build_network(&f, meta.k, meta.p, args.max_units) {
            Ok(net) => net,
            Err(code) => return code,
        };
        let authentic = rebuilt == net;
        println!(
            "{} authenticity: file matches deterministic rebuild",
            if authentic { "PASS" } else { "FAIL" }
        );
        all_passed &= authentic;
        let grid_bits = args
            .grid_bits
            .unwrap_or_else(|| default_grid_bits(meta.k, meta.d));
        match certify(&f, &net, meta.k, meta.p, grid_bits) {
            Ok(cert) => {
                all_passed &= cert.passed;
                reports.push(cert.report);
            }
            Err(code) => return code,
        }
    } else {
        let name = match &args.function {
            Some(name) => name.clone(),
            None => return usage_err("verify needs --fn or --net"),
        };
        let f = match lookup(&name, args.d, args.seed) {
            Ok(f) => f,
            Err(code) => return code,
        };
        let ks = match parse_k_range(&args) {
            Ok(ks) => ks,
            Err(code) => return code,
        };
        for &k in &ks {
            println!("== {} d={} K={k} p={}", f.name(), args.d, args.p);
            let net = match build_network(&f, k, args.p, args.max_units) {
                Ok(net) => net,
                Err(code) => return code,
            };
            let grid_bits = args
                .grid_bits
                .unwrap_or_else(|| default_grid_bits(k, args.d));
            match certify(&f, &net, k, args.p, grid_bits) {
                Ok(cert) => {
                    all_passed &= cert.passed;
                    reports.push(cert.report);
                }
                Err(code) => return code,
            }
        }
        if reports.len() >= 3 {
            match rate_fit(&reports) {
                Ok(slope) => {
                    let ok = (slope + f.beta()).abs() <= 0.3;
                    println!(
                        "{} rate_fit: slope {slope} vs -beta = {}",
                        if ok { "PASS" } else { "FAIL" },
                        -f.beta()
                    );
                    all_passed &= ok;
                }
                Err(e) => {
                    println!("FAIL rate_fit: {e}");
                    all_passed = false;
                }
            }
        }
    }

    if let Some(out) = &args.out {
        if let Err(e) = append_reports(out, &args.format, &reports) {
            return usage_err(e);
        }
    } else if args.format == "json" {
        println!("{}", reports_json(&reports));
    }

    if all_passed {
        println!("all certifications passed");
        ExitCode::SUCCESS
    } else {
        println!("certification FAILED");
        ExitCode::from(EXIT_CERTIFICATION)
    }
}

fn reports_json(reports: &[ErrorReport]) -> String {
    let rows: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            serde_json::json!({
                "function": r.function,
                "d": r.d,
                "K": r.k,
                "p": r.p,
                "beta": r.beta,
                "Q": r.q,
                "measured_lp": r.measured_lp,
                "bound": r.bound,
                "max_weight": r.max_weight,
                "bad_set_measure": ratio_to_f64(&r.bad_set_measure),
                "grid_bits": r.grid_bits,
            })
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("report rows serialize")
}

fn append_reports(
    path: &PathBuf,
    format: &str,
    reports: &[ErrorReport],
) -> Result<(), std::io::Error> {
    use std::io::Write;
    let existing = path.exists();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    if format == "json" {
        writeln!(file, "{}", reports_json(reports))?;
    } else {
        if !existing {
            writeln!(file, "{}", ErrorReport::csv_header())?;
        }
        for r in reports {
            writeln!(file, "{}", r.csv_row())?;
        }
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> ExitCode {
    let (net, _meta) = match load_network(&args.net) {
        Ok(v) => v,
        Err(e) => return usage_err(e),
    };
    let point: Result<Vec<f64>, _> = args
        .point
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    let point = match point {
        Ok(p) => p,
        Err(e) => return usage_err(format!("bad point {:?}: {e}", args.point)),
    };
    match net.eval(&point) {
        Ok(out) => {
            for v in out {
                println!("{v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => usage_err(e),
    }
}
