use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sl2count_core::counting::{
    ap_density_report, det_eq_bruteforce, divisor_correlation, error_budget, k_term_eval, main_term_eval,
    nontrivial_ranges, r_term_eval, CountSpec, CountWeight, Cutoff, ErrorBudget, Profile, SmoothWindow,
    DEFAULT_RATIO_CEILING, ITERATION_CAP, THETA,
};
use sl2count_core::fault::{with_fault, Fault};
use sl2count_core::report::{Criterion, Report, Table};
use sl2count_core::verify::{run_suite, Scale, Suite};
use sl2count_core::weights::PeriodicWeight;
use sl2count_core::Error;

#[derive(Parser)]
#[command(name = "sl2count", version, about = "Orbit counting, spectral-kernel checks and determinant-equation experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, default_value_t = ITERATION_CAP)]
    max_iterations: u64,
    /// Threshold override `criterion=value`; repeatable.
    #[arg(long = "tolerance", global = true, value_parser = parse_override)]
    tolerances: Vec<(String, f64)>,
    #[arg(long, global = true, hide = true, value_parser = parse_fault)]
    inject_fault: Option<Fault>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run module invariant suites.
    Verify {
        #[arg(long, value_parser = parse_suite, default_value = "all")]
        suite: Suite,
        #[arg(long, value_parser = parse_scale, default_value = "quick")]
        scale: Scale,
    },
    /// Run a counting experiment.
    Count {
        #[command(subcommand)]
        kind: CountKind,
    },
    /// Main term, K, R, the error budget and nontriviality ranges.
    Predict(PredictArgs),
}

#[derive(Subcommand)]
enum CountKind {
    /// Residue distribution of d(n) d(n + h) for n <= X.
    Divisor {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 1)]
        h: u64,
        #[arg(long, default_value_t = 1)]
        q: u64,
        /// Periodic weight file; adds the weighted correlation sum.
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = WindowKind::Sharp)]
        cutoff: WindowKind,
    },
    /// Brute force of ad - bc = h against the main term and budget.
    DetEq(DetEqArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowKind {
    Sharp,
    Bump,
}

#[derive(Args)]
struct WeightArgs {
    #[arg(long, default_value_t = 1)]
    q1: u64,
    #[arg(long, default_value_t = 1)]
    q2: u64,
    /// Weight 1_{bc = r mod q1 q2}; without it the weight is 1_{q1 | b, q2 | d}.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["weight", "zero_weight"])]
    r: Option<i64>,
    /// Periodic weight file `{q, values}`; the weight is t(bc).
    #[arg(long, conflicts_with = "zero_weight")]
    weight: Option<PathBuf>,
    #[arg(long)]
    zero_weight: bool,
}

#[derive(Args)]
struct DetEqArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = 1)]
    h: i64,
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, value_enum, default_value_t = WindowKind::Bump)]
    window: WindowKind,
    #[arg(long, default_value_t = DEFAULT_RATIO_CEILING)]
    ceiling: f64,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    d: f64,
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(long, value_enum, default_value_t = WindowKind::Bump)]
    window: WindowKind,
    /// Spectral exponent, as a decimal or a fraction such as 7/64.
    #[arg(long, value_parser = parse_theta, default_value = "7/64")]
    theta: f64,
    /// Length X for the nontriviality ranges.
    #[arg(long, default_value_t = 1e6)]
    x: f64,
    /// Shift h for the nontriviality ranges.
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected criterion=value")?;
    let value = value.parse::<f64>().map_err(|e| e.to_string())?;
    Ok((name.to_string(), value))
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    Fault::parse(s).ok_or_else(|| format!("unknown fault {s}"))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_theta(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|e| format!("{e}"))?;
            let d: f64 = d.trim().parse().map_err(|e| format!("{e}"))?;
            n / d
        }
        None => s.parse().map_err(|e| format!("{e}"))?,
    };
    if (0.0..0.5).contains(&value) {
        Ok(value)
    } else {
        Err(format!("theta = {value} must lie in [0, 1/2)"))
    }
}

/// Failure of a run, mapped onto the exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::AccuracyFailure { .. } | Error::SingularityWarning { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.common.inject_fault {
        Some(fault) => with_fault(fault, || run(&cli)),
        None => run(&cli),
    };
    match outcome {
        Ok(report) => match emit(&cli.common, &report) {
            Ok(()) if report.passed() => ExitCode::SUCCESS,
            Ok(()) => {
                for c in report.failures() {
                    eprintln!("FAIL {}: {} (threshold {})", c.name, c.value, c.threshold);
                }
                ExitCode::from(1)
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let common = &cli.common;
    let mut report = match &cli.command {
        Command::Verify { suite, scale } => cmd_verify(common, *suite, *scale)?,
        Command::Count { kind: CountKind::Divisor { x, h, q, weight, cutoff } } => {
            cmd_count_divisor(common, *x, *h, *q, weight.as_ref(), *cutoff)?
        }
        Command::Count { kind: CountKind::DetEq(args) } => cmd_count_det_eq(common, args)?,
        Command::Predict(args) => cmd_predict(common, args)?,
    };
    if let Some(fault) = common.inject_fault {
        report.param("inject_fault", fault.name());
    }
    for (name, value) in &common.tolerances {
        let mut hit = false;
        for c in report.criteria.iter_mut().filter(|c| &c.name == name) {
            c.rethreshold(*value);
            hit = true;
        }
        if !hit {
            return Err(Failure::Usage(format!("tolerance override names unknown criterion {name}")));
        }
        report.param(&format!("tolerance.{name}"), *value);
    }
    Ok(report)
}

fn emit(common: &Common, report: &Report) -> Result<(), String> {
    let document = match common.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv().map_err(|e| e.to_string())?,
    };
    match &common.out {
        Some(path) => {
            fs::write(path, document).map_err(|e| format!("{}: {e}", path.display()))?;
            print_summary(report);
        }
        None => {
            std::io::stdout().write_all(document.as_bytes()).map_err(|e| e.to_string())?;
        }
    }
    Ok(())
}

fn print_summary(report: &Report) {
    println!("{} (seed {})", report.command, report.seed);
    for t in &report.tables {
        if t.rows.len() > 40 {
            println!("  table {}: {} rows", t.name, t.rows.len());
            continue;
        }
        println!("  {}", t.columns.join("\t"));
        for row in &t.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => match n.as_f64() {
                        Some(f) if n.is_f64() => format!("{f:.6}"),
                        _ => n.to_string(),
                    },
                    other => other.to_string(),
                })
                .collect();
            println!("  {}", cells.join("\t"));
        }
    }
    for c in &report.criteria {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {} = {:.6e} (threshold {:.3e})", c.name, c.value, c.threshold);
    }
}

fn base_report(command: &str, common: &Common) -> Report {
    let mut report = Report::new(command, common.seed);
    report.param("format", match common.format {
        Format::Json => "json",
        Format::Csv => "csv",
    });
    report
}

fn cmd_verify(common: &Common, suite: Suite, scale: Scale) -> Result<Report, Failure> {
    let mut report = base_report("verify", common);
    report.param("suite", suite.name());
    report.param("scale", scale.name());
    let outcome = run_suite(suite, common.seed, scale)?;
    report.criteria = outcome.criteria;
    report.tables = outcome.tables;
    Ok(report)
}

fn read_weight(path: &PathBuf) -> Result<PeriodicWeight, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(PeriodicWeight::from_json(&doc)?)
}

fn cmd_count_divisor(
    common: &Common,
    x: u64,
    h: u64,
    q: u64,
    weight: Option<&PathBuf>,
    cutoff: WindowKind,
) -> Result<Report, Failure> {
    let mut report = base_report("count divisor", common);
    report.param("x", x);
    report.param("h", h);
    report.param("q", q);
    let density = ap_density_report(x, h, q)?;
    let mut table = Table::new("residues", &["r", "weighted_count", "ratio", "omega", "omega_exact", "deviation"]);
    for row in &density.rows {
        table.push(vec![
            json!(row.r),
            json!(row.weighted_count),
            json!(row.ratio),
            json!(row.omega),
            json!(row.omega_exact),
            json!(row.deviation),
        ]);
    }
    report.tables.push(table);
    report.param("total", density.total);
    if let Some(path) = weight {
        let t = read_weight(path)?;
        let g = match cutoff {
            WindowKind::Sharp => Cutoff::Sharp,
            WindowKind::Bump => Cutoff::Smooth(Profile::Bump),
        };
        let value = divisor_correlation(x, h, &t, g)?;
        let mut weighted = Table::new("weighted_correlation", &["weight_modulus", "cutoff", "re", "im"]);
        let cutoff_name = match cutoff {
            WindowKind::Sharp => "sharp",
            WindowKind::Bump => "bump",
        };
        weighted.push(vec![json!(t.modulus()), json!(cutoff_name), json!(value.re), json!(value.im)]);
        report.tables.push(weighted);
        report.param("weight", path.display().to_string());
    }
    report.criteria.push(Criterion::at_most("count.ap_density_deviation", density.max_deviation, 0.02));
    Ok(report)
}

fn count_weight(args: &WeightArgs) -> Result<CountWeight, Failure> {
    if args.zero_weight {
        return Ok(CountWeight::Zero);
    }
    if let Some(path) = &args.weight {
        return Ok(CountWeight::Periodic(read_weight(path)?));
    }
    let (q1, q2) = (args.q1, args.q2);
    Ok(match args.r {
        Some(r) => CountWeight::ProductCongruence { q: q1 * q2, r },
        None if q1 == 1 && q2 == 1 => CountWeight::Unit,
        None => CountWeight::Divisibility { q1, q2 },
    })
}

fn weight_params(report: &mut Report, args: &WeightArgs) {
    report.param("q1", args.q1);
    report.param("q2", args.q2);
    if let Some(r) = args.r {
        report.param("r", r);
    }
    if let Some(path) = &args.weight {
        report.param("weight", path.display().to_string());
    }
    if args.zero_weight {
        report.param("zero_weight", true);
    }
}

fn window(kind: WindowKind, a: f64, c: f64, d: f64) -> Result<SmoothWindow, Failure> {
    Ok(match kind {
        WindowKind::Sharp => SmoothWindow::sharp(a, c, d)?,
        WindowKind::Bump => SmoothWindow::bump(a, c, d)?,
    })
}

fn window_name(kind: WindowKind) -> &'static str {
    match kind {
        WindowKind::Sharp => "sharp",
        WindowKind::Bump => "bump",
    }
}

fn cmd_count_det_eq(common: &Common, args: &DetEqArgs) -> Result<Report, Failure> {
    let mut report = base_report("count det-eq", common);
    for (key, v) in [("a", args.a), ("c", args.c), ("d", args.d), ("ceiling", args.ceiling)] {
        report.param(key, v);
    }
    report.param("h", args.h);
    report.param("window", window_name(args.window));
    weight_params(&mut report, &args.weight);
    let spec = CountSpec::new(count_weight(&args.weight)?, args.h, window(args.window, args.a, args.c, args.d)?)?;
    let mut table = Table::new("det_eq", &["quantity", "re", "im"]);
    if args.h == 1 {
        let cmp = error_budget(&spec, args.ceiling, common.max_iterations)?;
        table.push(vec![json!("S"), json!(cmp.brute.re), json!(cmp.brute.im)]);
        table.push(vec![json!("M"), json!(cmp.main.value.re), json!(cmp.main.value.im)]);
        for (name, v) in [
            ("orbit_sum", cmp.main.orbit_sum.re),
            ("index", cmp.main.index as f64),
            ("integral", cmp.main.integral),
            ("K", cmp.budget.k_value),
            ("R", cmp.budget.r_value),
            ("budget", cmp.budget.budget),
            ("deviation", cmp.deviation),
            ("ratio", cmp.ratio),
        ] {
            table.push(vec![json!(name), json!(v), json!(0.0)]);
        }
        if let Some(rel) = cmp.relative {
            table.push(vec![json!("relative"), json!(rel), json!(0.0)]);
        }
        report.criteria.push(Criterion::at_most("count.det_eq_ratio", cmp.ratio, cmp.ceiling));
    } else {
        let brute = det_eq_bruteforce(&spec, common.max_iterations)?;
        let main = main_term_eval(&spec)?;
        table.push(vec![json!("S"), json!(brute.re), json!(brute.im)]);
        table.push(vec![json!("M"), json!(main.value.re), json!(main.value.im)]);
        table.push(vec![json!("orbit_sum"), json!(main.orbit_sum.re), json!(main.orbit_sum.im)]);
        if main.value.norm() > 0.0 {
            table.push(vec![json!("relative"), json!((brute / main.value - 1.0).norm()), json!(0.0)]);
        }
    }
    report.tables.push(table);
    Ok(report)
}

fn cmd_predict(common: &Common, args: &PredictArgs) -> Result<Report, Failure> {
    let mut report = base_report("predict", common);
    for (key, v) in [("a", args.a), ("c", args.c), ("d", args.d), ("theta", args.theta), ("x", args.x), ("shift", args.shift)] {
        report.param(key, v);
    }
    report.param("window", window_name(args.window));
    weight_params(&mut report, &args.weight);
    let weight = count_weight(&args.weight)?;
    let spec = CountSpec::new(weight, 1, window(args.window, args.a, args.c, args.d)?)?;
    let (q1, q2) = (args.weight.q1, args.weight.q2);
    let main = main_term_eval(&spec)?;
    let k_value = k_term_eval(&spec.weight, args.c / args.d)?;
    let r_value = r_term_eval(args.a, args.c, args.d, q1, q2, args.theta)?;
    let budget = ErrorBudget::new(args.a * args.d, k_value, r_value, args.theta)?;
    let simplified = 1.0 + args.c / (args.a * q2 as f64) + args.a / (args.c * q1 as f64);
    let mut terms = Table::new("prediction", &["quantity", "value"]);
    for (name, v) in [
        ("M", main.value.re),
        ("M_im", main.value.im),
        ("K", k_value),
        ("R", r_value),
        ("R_simplified", simplified),
        ("budget", budget.budget),
    ] {
        terms.push(vec![json!(name), json!(v)]);
    }
    report.tables.push(terms);

    let mut scan = Table::new("budget_vs_q2", &["q2", "R", "budget"]);
    let mut previous = f64::INFINITY;
    let mut increases = 0;
    for factor in [1u64, 2, 4, 8, 16, 32] {
        let q2_scan = q2 * factor;
        let r = r_term_eval(args.a, args.c, args.d, q1, q2_scan, args.theta)?;
        let b = ErrorBudget::new(args.a * args.d, k_value, r, args.theta)?.budget;
        if b > previous {
            increases += 1;
        }
        previous = b;
        scan.push(vec![json!(q2_scan), json!(r), json!(b)]);
    }
    report.tables.push(scan);

    let ranges = nontrivial_ranges(args.x, args.shift, args.theta)?;
    let mut range_table = Table::new("nontrivial_ranges", &["kind", "exponent", "max_q"]);
    range_table.push(vec![json!("fixed"), json!(ranges.fixed_exponent), json!(ranges.fixed_max_q)]);
    range_table.push(vec![json!("average"), json!(ranges.average_exponent), json!(ranges.average_max_q)]);
    report.tables.push(range_table);

    report.criteria.push(Criterion::holds("predict.budget_monotone_in_inverse_q2", increases));
    if args.theta == THETA {
        report.param("theta_exact", "7/64");
    }
    Ok(report)
}
