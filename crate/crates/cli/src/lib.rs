//! Command-line front end: parameter validation, run orchestration, and
//! deterministic CSV/JSON/SVG report emission.
//!
//! Exit codes: 0 success, 1 parameter/validation error (the message names the
//! violated precondition and the minimal valid parameter where known),
//! 2 numerical tolerance failure (the failing residual is printed).

pub mod plot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Once;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kslab::{
    assignment_search, bell_eps_product_check, bell_sample, convergence_sweep, fantasy_unsat,
    fmt_f64, make_family, mermin_relations_check, p_plus_quantum, relation_suite, run_audit,
    two_dof_check, weyl_check, AuditParams, BellModel, Error, GaussianSpec, ResidualTable,
    StateSpec,
};

use plot::{emit_plot, Series};

const EXIT_OK: i32 = 0;
const EXIT_VALIDATION: i32 = 1;
const EXIT_TOLERANCE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "kslab",
    version,
    about = "Numerical laboratory for canonical-pair operator families on a periodic lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify the family's commutation/anticommutation table, the shifted
    /// projection decomposition, and the shift/phase relations
    CheckRelations(CheckRelationsArgs),
    /// Disturbance norms across a list of family indices, with a log-log fit
    SweepDisturbance(SweepArgs),
    /// End-to-end obstruction audit with contradiction certificate
    Audit(AuditArgs),
    /// Two-qubit operator-square residuals and exhaustive assignment search
    Mermin(MerminArgs),
    /// Single-spin hidden-variable model statistics and product-rule check
    Bell(BellArgs),
    /// Two-degree-of-freedom cosine construction residuals
    TwoDof(TwoDofArgs),
    /// Integer-parity certificate for the exact four-equation system
    FantasyCheck(FantasyArgs),
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// Family index n
    #[arg(long, default_value_t = 4)]
    n: u32,
    /// Commensurability multiplier c
    #[arg(long, default_value_t = 1)]
    c: u32,
    /// Free constant a
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Grid sites N (must be divisible by 4nc)
    #[arg(long, default_value_t = 2048)]
    grid: usize,
    /// Test state, repeatable: gaussian:x0=..,p0=..,sigma=.. (box-relative
    /// units; p0 in momentum quanta 2*pi/L). Default: the standard family.
    #[arg(long = "state")]
    states: Vec<String>,
}

#[derive(Args, Debug)]
struct CheckRelationsArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON output path
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated family indices
    #[arg(long = "n-list", default_value = "2,4,8,16,32")]
    n_list: String,
    #[arg(long, default_value_t = 1)]
    c: u32,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Grid sites per family (must be divisible by 4nc for every n)
    #[arg(long, default_value_t = 2048)]
    grid: usize,
    /// Highest moment order k
    #[arg(long = "k-max", default_value_t = 4)]
    k_max: u32,
    #[arg(long = "state")]
    states: Vec<String>,
    /// CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON output path
    #[arg(long)]
    json: Option<PathBuf>,
    /// Log-log SVG plot of the peak disturbance versus n
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Failure budget delta (0 < delta < 1/2)
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long = "k-max", default_value_t = 4)]
    k_max: u32,
    /// Value-zero exclusion band eta
    #[arg(long, default_value_t = 1e-6)]
    eta: f64,
    /// Output path; .csv gets the summary table, anything else the JSON report
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON output path
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MerminArgs {
    /// CSV output path for the residual table
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON output path (residuals plus assignment traces)
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BellArgs {
    /// Seed for the deterministic sample streams
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Monte-Carlo samples per direction pair
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Number of random (state, measurement) pairs for the Born-rule check
    #[arg(long, default_value_t = 20)]
    pairs: u32,
    /// CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON output path
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TwoDofArgs {
    /// Mode-1 grid sites (multiple of 8)
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Mode-2 grid sites (default: same as --grid)
    #[arg(long)]
    grid2: Option<usize>,
    /// Odd-product index m for mode 1 (a1*b1 = (2m+1)*pi)
    #[arg(long, default_value_t = 0)]
    m: u32,
    /// Odd-product index n for mode 2 (a2*b2 = (2n+1)*pi)
    #[arg(long, default_value_t = 0)]
    n: u32,
    #[arg(long = "state")]
    states: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FantasyArgs {
    /// Exhaustive scan bound for |k|, |l|, |m|, |n|
    #[arg(long, default_value_t = 50)]
    bound: u32,
    /// JSON output path for the certificate
    #[arg(long)]
    out: Option<PathBuf>,
}

static THREAD_POOL_INIT: Once = Once::new();

/// KSLAB_THREADS caps worker threads; absent or invalid means all cores.
fn init_threads() {
    THREAD_POOL_INIT.call_once(|| {
        if let Ok(v) = std::env::var("KSLAB_THREADS") {
            if let Ok(t) = v.parse::<usize>() {
                if t >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(t)
                        .build_global();
                }
            }
        }
    });
}

fn parse_state_spec(raw: &str) -> Result<StateSpec, String> {
    let body = raw
        .strip_prefix("gaussian:")
        .ok_or_else(|| format!("unsupported state spec '{raw}': expected gaussian:x0=..,p0=..,sigma=.."))?;
    let mut x0 = None;
    let mut p0 = None;
    let mut sigma = None;
    for field in body.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("malformed state field '{field}'"))?;
        let parsed: f64 = value
            .parse()
            .map_err(|_| format!("state field '{key}' has non-numeric value '{value}'"))?;
        match key {
            "x0" => x0 = Some(parsed),
            "p0" => p0 = Some(parsed),
            "sigma" => sigma = Some(parsed),
            other => return Err(format!("unknown state field '{other}'")),
        }
    }
    match (x0, p0, sigma) {
        (Some(x0), Some(p0), Some(sigma)) => Ok(StateSpec::gaussian(x0, p0, sigma)),
        _ => Err(format!(
            "state spec '{raw}' must set all of x0, p0, sigma"
        )),
    }
}

fn parse_states(raw: &[String]) -> Result<Vec<StateSpec>, String> {
    if raw.is_empty() {
        return Ok(StateSpec::standard_family());
    }
    raw.iter().map(|s| parse_state_spec(s)).collect()
}

fn parse_n_list(raw: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        let n: u32 = part
            .trim()
            .parse()
            .map_err(|_| format!("invalid family index '{part}' in n-list"))?;
        if n == 0 {
            return Err("family index n must be >= 1".into());
        }
        out.push(n);
    }
    if out.is_empty() {
        return Err("empty n-list".into());
    }
    Ok(out)
}

fn write_file(path: &Path, content: &str) -> Result<(), String> {
    std::fs::write(path, content)
        .map_err(|e| format!("cannot write output path {}: {e}", path.display()))
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ToleranceFailure { .. } => EXIT_TOLERANCE,
        _ => EXIT_VALIDATION,
    }
}

fn fail(err: &Error) -> i32 {
    eprintln!("error: {err}");
    exit_code_for(err)
}

fn fail_msg(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_VALIDATION
}

/// Print the table, write requested outputs, and derive the exit code from
/// the tolerance-checked rows.
fn finish_table(
    table: &ResidualTable,
    out: &Option<PathBuf>,
    json: &Option<PathBuf>,
) -> Result<i32, String> {
    for row in &table.rows {
        match row.tolerance {
            Some(tol) => println!(
                "{:<36} {:>12.3e}  (tol {:.1e}) {}",
                row.name,
                row.residual,
                tol,
                if row.passes() { "pass" } else { "FAIL" }
            ),
            None => println!("{:<36} {:>12.3e}  (reported)", row.name, row.residual),
        }
    }
    if let Some(path) = out {
        write_file(path, &table.to_csv())?;
    }
    if let Some(path) = json {
        write_file(path, &table.to_json())?;
    }
    if table.all_pass() {
        Ok(EXIT_OK)
    } else {
        for row in table.rows.iter().filter(|r| !r.passes()) {
            eprintln!(
                "tolerance failure: {} residual {} exceeds {}",
                row.name,
                fmt_f64(row.residual),
                fmt_f64(row.tolerance.unwrap())
            );
        }
        Ok(EXIT_TOLERANCE)
    }
}

fn cmd_check_relations(args: &CheckRelationsArgs) -> i32 {
    let specs = match parse_states(&args.family.states) {
        Ok(s) => s,
        Err(m) => return fail_msg(&m),
    };
    let family = match make_family(args.family.grid, args.family.n, args.family.c, args.family.a)
    {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let states = match family.instantiate_states(&specs) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    println!(
        "family n={} c={} a={} grid={}: a1n={:.6}, a2n={:.6}, b1={:.6} ({} sites), b2n={:.6} ({} sites), eps_n={:.6}",
        family.n(),
        family.c(),
        family.free_constant(),
        family.config().n(),
        family.a1n(),
        family.a2n(),
        family.b1(),
        family.b1_sites(),
        family.b2n(),
        family.b2n_sites(),
        family.eps_n()
    );
    let mut table = match relation_suite(&family, &states) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let weyl = match weyl_check(&family, &states) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    table.rows.extend(weyl.rows);
    match finish_table(&table, &args.out, &args.json) {
        Ok(code) => code,
        Err(m) => fail_msg(&m),
    }
}

fn cmd_sweep(args: &SweepArgs) -> i32 {
    let ns = match parse_n_list(&args.n_list) {
        Ok(v) => v,
        Err(m) => return fail_msg(&m),
    };
    let specs = match parse_states(&args.states) {
        Ok(s) => s,
        Err(m) => return fail_msg(&m),
    };
    let grid = args.grid;
    let report = match convergence_sweep(&ns, args.c, args.a, |_| grid, args.k_max, &specs) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let peaks = report.peak_delta_by_n();
    for (n, d) in &peaks {
        println!("n = {n:>4}: max ||delta(B1; A2n) psi|| = {d:.6e}");
    }
    if let Some(fit) = &report.fit {
        println!(
            "log-log fit: slope {:.4}, intercept {:.4}",
            fit.slope, fit.intercept
        );
    }
    if let Some(path) = &args.out {
        if let Err(m) = write_file(path, &report.to_csv()) {
            return fail_msg(&m);
        }
    }
    if let Some(path) = &args.json {
        if let Err(m) = write_file(path, &report.to_json()) {
            return fail_msg(&m);
        }
    }
    if let Some(path) = &args.svg {
        let series = Series {
            label: "max ||delta(B1;A2n) psi||".into(),
            points: peaks.iter().map(|&(n, d)| (n as f64, d)).collect(),
        };
        let svg = match emit_plot(&[series], true, "n", "disturbance norm") {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        if let Err(m) = write_file(path, &svg) {
            return fail_msg(&m);
        }
    }
    EXIT_OK
}

fn cmd_audit(args: &AuditArgs) -> i32 {
    let specs = match parse_states(&args.family.states) {
        Ok(s) => s,
        Err(m) => return fail_msg(&m),
    };
    let params = AuditParams {
        grid: args.family.grid,
        n: args.family.n,
        c: args.family.c,
        a: args.family.a,
        delta: args.delta,
        k_max: args.k_max,
        eta: args.eta,
        states: specs,
        ..AuditParams::default()
    };
    let report = match run_audit(&params) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    println!(
        "audit n = {}: verdict {}, epsilon = {}, p_threshold = {:.6}",
        report.n,
        report.verdict,
        fmt_f64(report.epsilon),
        report.p_threshold
    );
    if let Some(cert) = &report.certificate {
        println!(
            "certificate: upper_gap = {:.6e}, lower_gap = {:.6e}, contradiction = {}",
            cert.upper_gap, cert.lower_gap, cert.contradiction
        );
    }
    if let Some(path) = &args.out {
        let body = if path.extension().and_then(|e| e.to_str()) == Some("csv") {
            report.to_csv_summary()
        } else {
            report.to_json()
        };
        if let Err(m) = write_file(path, &body) {
            return fail_msg(&m);
        }
    }
    if let Some(path) = &args.json {
        if let Err(m) = write_file(path, &report.to_json()) {
            return fail_msg(&m);
        }
    }
    if report.pass() {
        EXIT_OK
    } else {
        for (name, residual) in report.failures() {
            eprintln!("premise failure: {name} residual {}", fmt_f64(residual));
        }
        if report.epsilon <= 0.0 {
            eprintln!("no positive epsilon satisfies the threshold at delta = {}", report.delta);
        }
        EXIT_TOLERANCE
    }
}

fn cmd_mermin(args: &MerminArgs) -> i32 {
    let table = mermin_relations_check();
    let search = assignment_search();
    print!("{}", search.render());
    if let Some(path) = &args.json {
        let mut json = String::from("{\n  \"residuals\": ");
        json.push_str(&table.to_json());
        json.pop(); // trailing newline
        json.push_str(",\n  \"assignment_search\": ");
        json.push_str(&search.to_json());
        json.pop();
        json.push_str("\n}\n");
        if let Err(m) = write_file(path, &json) {
            return fail_msg(&m);
        }
    }
    let code = match finish_table(&table, &args.out, &None) {
        Ok(code) => code,
        Err(m) => return fail_msg(&m),
    };
    if search.consistent_count != 0 {
        eprintln!(
            "assignment search found {} consistent assignments, expected 0",
            search.consistent_count
        );
        return EXIT_TOLERANCE;
    }
    code
}

fn bell_direction_stats(
    seed: u64,
    pairs: u32,
    samples: u64,
) -> Vec<(f64, f64, f64)> {
    let mut dir_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(pairs as usize);
    for _ in 0..pairs {
        let n_hat = kslab::random_unit_vector(&mut dir_rng);
        let m_hat = kslab::random_unit_vector(&mut dir_rng);
        let model = BellModel::new(n_hat).expect("unit vector by construction");
        let mut rng = ChaCha8Rng::seed_from_u64(dir_rng.random());
        let mut plus = 0u64;
        for _ in 0..samples {
            if bell_sample(&model, m_hat, &mut rng).expect("unit vector") == 1 {
                plus += 1;
            }
        }
        let theta = kslab::angle_between(n_hat, m_hat);
        rows.push((
            theta,
            plus as f64 / samples as f64,
            p_plus_quantum(n_hat, m_hat),
        ));
    }
    rows
}

/// The standard decreasing-angle pair sequence used by the product-rule
/// check: both directions tilted from the state axis, separated by theta.
pub fn standard_eps_pairs() -> Vec<([f64; 3], [f64; 3])> {
    let tilt = std::f64::consts::FRAC_PI_4;
    [
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_8,
        std::f64::consts::PI / 16.0,
    ]
    .iter()
    .map(|&theta| {
        (
            [tilt.sin(), 0.0, tilt.cos()],
            [(tilt + theta).sin(), 0.0, (tilt + theta).cos()],
        )
    })
    .collect()
}

fn cmd_bell(args: &BellArgs) -> i32 {
    if args.samples == 0 {
        return fail_msg("sample count must be >= 1");
    }
    if args.pairs == 0 {
        return fail_msg("pair count must be >= 1");
    }
    let stats = bell_direction_stats(args.seed, args.pairs, args.samples);
    let pairs = standard_eps_pairs();
    let eps_rows = match bell_eps_product_check(
        [0.0, 0.0, 1.0],
        &pairs,
        0.3,
        args.samples,
        args.seed,
    ) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };

    for (theta, emp, expected) in &stats {
        println!("p_plus: theta = {theta:.4}, empirical = {emp:.5}, born = {expected:.5}");
    }
    for row in &eps_rows {
        println!(
            "eps_product: angle = {:.5}, pass rate = {:.5}",
            row.angle, row.pass_rate
        );
    }

    let mut csv = String::from("check,x,value,reference\n");
    for (theta, emp, expected) in &stats {
        let _ = writeln!(
            csv,
            "p_plus,{},{},{}",
            fmt_f64(*theta),
            fmt_f64(*emp),
            fmt_f64(*expected)
        );
    }
    for row in &eps_rows {
        let _ = writeln!(
            csv,
            "eps_product,{},{},",
            fmt_f64(row.angle),
            fmt_f64(row.pass_rate)
        );
    }
    if let Some(path) = &args.out {
        if let Err(m) = write_file(path, &csv) {
            return fail_msg(&m);
        }
    }
    if let Some(path) = &args.json {
        let mut json = String::from("{\n  \"direction_stats\": [\n");
        for (i, (theta, emp, expected)) in stats.iter().enumerate() {
            let _ = write!(
                json,
                "    {{\"theta\": {}, \"empirical\": {}, \"born\": {}}}",
                fmt_f64(*theta),
                fmt_f64(*emp),
                fmt_f64(*expected)
            );
            json.push_str(if i + 1 < stats.len() { ",\n" } else { "\n" });
        }
        json.push_str("  ],\n  \"eps_product\": [\n");
        for (i, row) in eps_rows.iter().enumerate() {
            let _ = write!(
                json,
                "    {{\"angle\": {}, \"pass_rate\": {}}}",
                fmt_f64(row.angle),
                fmt_f64(row.pass_rate)
            );
            json.push_str(if i + 1 < eps_rows.len() { ",\n" } else { "\n" });
        }
        json.push_str("  ]\n}\n");
        if let Err(m) = write_file(path, &json) {
            return fail_msg(&m);
        }
    }
    EXIT_OK
}

fn cmd_two_dof(args: &TwoDofArgs) -> i32 {
    let specs = match parse_states(&args.states) {
        Ok(s) => s,
        Err(m) => return fail_msg(&m),
    };
    // product states are built per mode from the Gaussian components
    let gaussians: Vec<GaussianSpec> = specs
        .iter()
        .filter_map(|s| match s {
            StateSpec::Gaussian(g) => Some(*g),
            StateSpec::Superposition(_) => None,
        })
        .collect();
    if gaussians.is_empty() {
        return fail_msg("two-dof requires at least one gaussian state spec");
    }
    let n2 = args.grid2.unwrap_or(args.grid);
    let table = match two_dof_check(args.grid, n2, args.m, args.n, &gaussians) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    match finish_table(&table, &args.out, &args.json) {
        Ok(code) => code,
        Err(m) => fail_msg(&m),
    }
}

fn cmd_fantasy(args: &FantasyArgs) -> i32 {
    let cert = match fantasy_unsat(args.bound) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    print!("{}", cert.summary());
    if let Some(path) = &args.out {
        if let Err(m) = write_file(path, &cert.to_json()) {
            return fail_msg(&m);
        }
    }
    if cert.contradiction_established() {
        EXIT_OK
    } else {
        eprintln!(
            "scan found {} consistent quadruples, expected 0",
            cert.consistent_found
        );
        EXIT_TOLERANCE
    }
}

/// Parse argv and dispatch; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_threads();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits
            use clap::error::ErrorKind;
            let benign = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if benign { EXIT_OK } else { EXIT_VALIDATION };
        }
    };
    match &cli.command {
        Command::CheckRelations(args) => cmd_check_relations(args),
        Command::SweepDisturbance(args) => cmd_sweep(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Mermin(args) => cmd_mermin(args),
        Command::Bell(args) => cmd_bell(args),
        Command::TwoDof(args) => cmd_two_dof(args),
        Command::FantasyCheck(args) => cmd_fantasy(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_spec_parsing() {
        let spec = parse_state_spec("gaussian:x0=0.1,p0=-2,sigma=0.08").unwrap();
        assert_eq!(spec, StateSpec::gaussian(0.1, -2.0, 0.08));
        assert!(parse_state_spec("gaussian:x0=0.1,p0=2").is_err());
        assert!(parse_state_spec("gaussian:x0=a,p0=2,sigma=0.1").is_err());
        assert!(parse_state_spec("plane:k=3").is_err());
        assert!(parse_state_spec("gaussian:x0=0,p0=0,sigma=0.1,w=2").is_err());
    }

    #[test]
    fn n_list_parsing() {
        assert_eq!(parse_n_list("2,4,8").unwrap(), vec![2, 4, 8]);
        assert!(parse_n_list("2,x").is_err());
        assert!(parse_n_list("0").is_err());
    }

    #[test]
    fn default_states_used_when_none_given() {
        assert_eq!(parse_states(&[]).unwrap(), StateSpec::standard_family());
    }
}
