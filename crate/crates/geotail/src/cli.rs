//! Command-line front end: the solvers, the oracles, and a cross-validation
//! mode, with JSON or CSV reports.
//!
//! Exit codes: 0 on success (and on a passing `verify`), 1 on input errors,
//! 2 on validation failures (a cross-check between independent routes
//! missed its tolerance).

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::dist::{IntegerPMF, StepDistribution, StepLaw};
use crate::error::{Error, Result};
use crate::{kp_left, kp_right, sim, tandem};

pub const DEFAULT_K: usize = crate::dist::DEFAULT_ORDER;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 42;
/// Environment variable overriding the default seed.
pub const SEED_ENV: &str = "GEOTAIL_SEED";

const TV_THRESHOLD: f64 = 1e-6;
const MC_SIGMA_THRESHOLD: f64 = 4.0;
const MC_MIN_EXPECTED: f64 = 100.0;

#[derive(Parser, Debug)]
#[command(name = "geotail", version, about = "Supremum laws for integer random walks with geometric tails", long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandSpec,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum CommandSpec {
    /// Solve a step law with a geometric right tail: P(X >= x) = xi r^x.
    Right(RightArgs),
    /// Solve a step law with a geometric left tail: P(X <= x) = xi r^-x.
    Left(LeftArgs),
    /// Analyze the two-stage queue with rates (alpha, beta, gamma).
    Tandem(TandemArgs),
    /// Event-driven simulation of the two-stage queue.
    Simulate(SimulateArgs),
    /// Run the analytic route plus both oracles and compare.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RightArgs {
    /// Tail scale xi in (0,1).
    #[arg(long)]
    pub xi: f64,
    /// Tail ratio r in (0,1).
    #[arg(long)]
    pub r: f64,
    /// Atoms of the negative part as `x:prob`, comma separated or repeated.
    #[arg(long = "atom", value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub atoms: Vec<String>,
    /// Table/truncation order.
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Validation tolerance (sup-norm against the Lindley oracle).
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct LeftArgs {
    #[arg(long)]
    pub xi: f64,
    #[arg(long)]
    pub r: f64,
    /// Atoms of the positive part as `x:prob`, comma separated or repeated.
    #[arg(long = "atom", value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub atoms: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct TandemArgs {
    /// Mean inter-arrival time at stage 1.
    #[arg(long)]
    pub alpha: f64,
    /// Mean stage-1 service time.
    #[arg(long)]
    pub beta: f64,
    /// Mean stage-2 service time.
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Busy cycles to record (after warm-up).
    #[arg(long, default_value_t = 1_000_000)]
    pub n_cycles: u64,
    /// RNG seed; substreams are derived per replica.
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Tail scale for a right/left law.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Tail ratio for a right/left law.
    #[arg(long)]
    pub r: Option<f64>,
    /// Finite-part atoms (`x:prob`); their sign picks the tail side.
    #[arg(long = "atom", value_delimiter = ',', allow_hyphen_values = true)]
    pub atoms: Vec<String>,
    /// Tandem rates (give all three instead of xi/r/atoms).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo paths (right/left) or cycles (tandem).
    #[arg(long, default_value_t = 200_000)]
    pub n_samples: u64,
}

/// A parsed, validated invocation.
#[derive(Debug)]
pub struct RunConfig {
    pub command: CommandSpec,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        Self { command: cli.command, output_format: cli.format, output_path: cli.output }
    }
}

/// What the caller should do with a finished run.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// The report document (already in the requested format).
    pub body: String,
    /// Human-readable notes for stderr.
    pub notes: Vec<String>,
}

pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_validation_failure() {
        2
    } else {
        1
    }
}

/// Top-level JSON report document; the key set is stable across commands.
#[derive(Serialize)]
struct SolveReport {
    params: serde_json::Value,
    solution: SolutionDoc,
    sup_pmf: Vec<f64>,
    tail_bound: f64,
    diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct SolutionDoc {
    p: f64,
    zeta: Option<f64>,
    s_star: Option<f64>,
    decay: Option<f64>,
}

#[derive(Serialize, Default)]
struct Diagnostics {
    oracle_tv: Option<f64>,
    oracle_supnorm: Option<f64>,
    iterations: u64,
}

struct CommandOutput {
    body: String,
    notes: Vec<String>,
    validation_failed: bool,
}

pub fn run(config: RunConfig) -> RunOutcome {
    match execute(&config) {
        Ok(out) => RunOutcome {
            exit_code: if out.validation_failed { 2 } else { 0 },
            body: out.body,
            notes: out.notes,
        },
        Err(e) => RunOutcome {
            exit_code: exit_code_for(&e),
            body: String::new(),
            notes: vec![format!("error: {e}")],
        },
    }
}

fn execute(config: &RunConfig) -> Result<CommandOutput> {
    match &config.command {
        CommandSpec::Right(args) => right_command(args, config.output_format),
        CommandSpec::Left(args) => left_command(args, config.output_format),
        CommandSpec::Tandem(args) => tandem_command(args, config.output_format),
        CommandSpec::Simulate(args) => simulate_command(args, config.output_format),
        CommandSpec::Verify(args) => verify_command(args, config.output_format),
    }
}

/// Parses `x:prob` atom specs; input masses may miss exact normalization by
/// up to 1e-9 (decimal input slack) and are rescaled to close it.
fn parse_atoms(specs: &[String], xi: f64) -> Result<BTreeMap<i64, f64>> {
    let mut atoms = BTreeMap::new();
    for spec in specs {
        let (x, p) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("atom `{spec}` is not `x:prob`")))?;
        let x: i64 = x
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad atom position in `{spec}`")))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad atom probability in `{spec}`")))?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "atom probability must lie in (0,1), got {p}"
            )));
        }
        if atoms.insert(x, p).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate atom at {x}")));
        }
    }
    let total: f64 = atoms.values().sum();
    if (total + xi - 1.0).abs() > 1e-9 {
        return Err(Error::MassMismatch(format!(
            "atoms sum to {total}, plus xi {xi} misses 1 by more than 1e-9"
        )));
    }
    let scale = (1.0 - xi) / total;
    for p in atoms.values_mut() {
        *p *= scale;
    }
    Ok(atoms)
}

fn lindley_tol(tol: f64) -> f64 {
    (tol * 1e-3).clamp(1e-12, 1e-9)
}

/// Lattice size for the Lindley oracle: enough room that the certified
/// bound on the missing top mass is far below `tol`.
fn oracle_x_max(law: &impl StepLaw, k: usize, tol: f64) -> usize {
    let need = crate::ladder::lundberg_base(law)
        .map(|s| ((10.0 / lindley_tol(tol)).ln() / s.ln()).ceil() as usize + 8)
        .unwrap_or(400);
    k.max(need)
}

fn right_command(args: &RightArgs, format: OutputFormat) -> Result<CommandOutput> {
    validate_k(args.k)?;
    let atoms = parse_atoms(&args.atoms, args.xi)?;
    let step = StepDistribution::from_right_tail(args.xi, args.r, &atoms)?;
    let sol = kp_right::solve(&step)?;
    let sup = kp_right::sup_law(&sol, args.k);

    let x_max = oracle_x_max(&step, args.k, args.tol);
    let (oracle, state) =
        sim::lindley_fixed_point_with_state(&step, x_max, lindley_tol(args.tol), 2_000_000)?;
    // compare closed form and oracle on the oracle's full window, not the
    // user-sized table, so the diagnostics reflect solver accuracy
    let sup_full = kp_right::sup_law(&sol, x_max);
    let report = SolveReport {
        params: json!({
            "xi": args.xi, "r": args.r,
            "atoms": atoms.iter().map(|(x, p)| json!({"x": x, "prob": p})).collect::<Vec<_>>(),
            "k": args.k, "tol": args.tol,
        }),
        solution: SolutionDoc { p: sol.p, zeta: None, s_star: Some(sol.s_star), decay: Some(sol.decay) },
        sup_pmf: sup.pmf().to_vec(),
        tail_bound: sup.tail_bound(),
        diagnostics: Diagnostics {
            oracle_tv: Some(sup_full.tv_distance(&oracle)),
            oracle_supnorm: Some(sup_full.survival_sup_norm(&oracle, 50)),
            iterations: state.iteration as u64,
        },
    };
    Ok(CommandOutput { body: render_solve(&report, format)?, notes: vec![], validation_failed: false })
}

fn left_command(args: &LeftArgs, format: OutputFormat) -> Result<CommandOutput> {
    validate_k(args.k)?;
    let step = left_step_from_args(args.xi, args.r, &args.atoms)?;
    let sol = kp_left::solve(&step, args.k)?;

    let x_max = oracle_x_max(&step, args.k, args.tol);
    let (oracle, state) =
        sim::lindley_fixed_point_with_state(&step, x_max, lindley_tol(args.tol), 2_000_000)?;
    let report = SolveReport {
        params: json!({
            "xi": args.xi, "r": args.r,
            "atoms": step.finite_part().iter().filter(|&(_, p)| p > 0.0)
                .map(|(x, p)| json!({"x": x, "prob": p})).collect::<Vec<_>>(),
            "k": args.k, "tol": args.tol,
        }),
        solution: SolutionDoc { p: sol.p, zeta: Some(sol.zeta), s_star: None, decay: None },
        sup_pmf: sol.sup.pmf().to_vec(),
        tail_bound: sol.sup.tail_bound(),
        diagnostics: Diagnostics {
            oracle_tv: Some(sol.sup.tv_distance(&oracle)),
            oracle_supnorm: Some(sol.sup.survival_sup_norm(&oracle, args.k as i64)),
            iterations: state.iteration as u64,
        },
    };
    Ok(CommandOutput { body: render_solve(&report, format)?, notes: vec![], validation_failed: false })
}

fn left_step_from_args(xi: f64, r: f64, atom_specs: &[String]) -> Result<StepDistribution> {
    let atoms = parse_atoms(atom_specs, xi)?;
    if atoms.keys().next().copied().unwrap_or(1) < 1 {
        return Err(Error::InvalidParameter(
            "left-tail laws take atoms on x >= 1 (the tail covers x <= 0)".into(),
        ));
    }
    let hi = *atoms.keys().next_back().unwrap();
    let mut mass = vec![0.0; hi as usize];
    for (&x, &p) in &atoms {
        mass[(x - 1) as usize] = p;
    }
    StepDistribution::from_left_tail(xi, r, IntegerPMF::new(1, mass, xi, 0.0)?)
}

fn tandem_command(args: &TandemArgs, format: OutputFormat) -> Result<CommandOutput> {
    validate_k(args.k)?;
    let params = tandem::TandemParams::new(args.alpha, args.beta, args.gamma)?;
    let report = tandem::analyze(&params, args.k)?;
    let sol = &report.solution;

    let x_max = oracle_x_max(&report.step, args.k, args.tol);
    let (oracle, state) =
        sim::lindley_fixed_point_with_state(&report.step, x_max, lindley_tol(args.tol), 2_000_000)?;
    let doc = SolveReport {
        params: json!({
            "alpha": args.alpha, "beta": args.beta, "gamma": args.gamma,
            "a": params.a, "r": params.r, "b": params.b, "xi": report.xi,
            "k": args.k, "tol": args.tol,
        }),
        solution: SolutionDoc { p: sol.p, zeta: Some(sol.zeta), s_star: None, decay: None },
        sup_pmf: sol.sup.pmf().to_vec(),
        tail_bound: sol.sup.tail_bound(),
        diagnostics: Diagnostics {
            oracle_tv: Some(sol.sup.tv_distance(&oracle)),
            oracle_supnorm: Some(sol.sup.survival_sup_norm(&oracle, args.k as i64)),
            iterations: state.iteration as u64,
        },
    };
    Ok(CommandOutput { body: render_solve(&doc, format)?, notes: vec![], validation_failed: false })
}

fn simulate_command(args: &SimulateArgs, format: OutputFormat) -> Result<CommandOutput> {
    let params = tandem::TandemParams::new(args.alpha, args.beta, args.gamma)?;
    let mut notes = vec![];
    if params.b >= 1.0 {
        notes.push(format!(
            "warning: load b = {} >= 1, the stage-2 backlog drifts upward; histograms are transient",
            params.b
        ));
    }
    let report = sim::simulate_tandem(&params, args.n_cycles, args.seed);
    let body = match format {
        OutputFormat::Json => serde_json::to_string_pretty(&report)?,
        OutputFormat::Csv => {
            let mut out = String::from("histogram,x,count\n");
            let mut emit = |name: &str, hist: &BTreeMap<i64, u64>| {
                for (x, c) in hist {
                    let _ = writeln!(out, "{name},{x},{c}");
                }
            };
            emit("busy_period", &report.busy_period_hist);
            emit("dissociation", &report.dissociation_hist);
            emit("occupancy", &report.occupancy_hist);
            out
        }
    };
    Ok(CommandOutput { body, notes, validation_failed: false })
}

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.threshold
    }
}

fn verify_command(args: &VerifyArgs, format: OutputFormat) -> Result<CommandOutput> {
    validate_k(args.k)?;
    let tandem_mode = args.alpha.is_some() || args.beta.is_some() || args.gamma.is_some();
    if tandem_mode && !(args.alpha.is_some() && args.beta.is_some() && args.gamma.is_some()) {
        return Err(Error::InvalidParameter(
            "tandem verification needs all of --alpha, --beta, --gamma".into(),
        ));
    }
    if !tandem_mode && (args.xi.is_none() || args.r.is_none() || args.atoms.is_empty()) {
        return Err(Error::InvalidParameter(
            "give either --alpha/--beta/--gamma or --xi/--r/--atom".into(),
        ));
    }

    let (mut doc, mc_check, label) = if tandem_mode {
        verify_tandem(args)?
    } else {
        verify_walk(args)?
    };
    if let Some(obj) = doc.params.as_object_mut() {
        obj.insert("seed".into(), json!(args.seed));
        obj.insert("n_samples".into(), json!(args.n_samples));
    }

    let checks = vec![
        Check {
            name: "oracle_supnorm",
            value: doc.diagnostics.oracle_supnorm.unwrap_or(f64::NAN),
            threshold: args.tol,
        },
        Check {
            name: "oracle_tv",
            value: doc.diagnostics.oracle_tv.unwrap_or(f64::NAN),
            threshold: TV_THRESHOLD,
        },
        mc_check,
    ];

    let mut notes = vec![format!("verify [{label}]: analytic route vs Lindley fixed point vs Monte Carlo")];
    let mut failed = false;
    for c in &checks {
        let ok = c.pass();
        failed |= !ok;
        notes.push(format!(
            "  {:<16} {:>12.3e}  threshold {:>9.1e}  {}",
            c.name,
            c.value,
            c.threshold,
            if ok { "pass" } else { "FAIL" }
        ));
    }

    let body = match format {
        OutputFormat::Json => render_solve(&doc, OutputFormat::Json)?,
        OutputFormat::Csv => {
            let mut out = String::from("check,value,threshold,pass\n");
            for c in &checks {
                let _ = writeln!(out, "{},{:e},{:e},{}", c.name, c.value, c.threshold, c.pass());
            }
            out
        }
    };
    Ok(CommandOutput { body, notes, validation_failed: failed })
}

/// Max per-bin deviation, in standard errors, between a histogram and an
/// expected pmf, over bins with expected count >= [`MC_MIN_EXPECTED`].
fn max_bin_sigma(hist: &BTreeMap<i64, u64>, n: u64, pmf: impl Fn(i64) -> f64, x_hi: i64) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..=x_hi {
        let p = pmf(x);
        let expect = n as f64 * p;
        if expect < MC_MIN_EXPECTED {
            continue;
        }
        let got = hist.get(&x).copied().unwrap_or(0) as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        worst = worst.max((got - expect).abs() / sigma);
    }
    worst
}

fn verify_walk(args: &VerifyArgs) -> Result<(SolveReport, Check, &'static str)> {
    let (xi, r) = (args.xi.unwrap(), args.r.unwrap());
    let atoms = parse_atoms(&args.atoms, xi)?;
    let all_negative = atoms.keys().all(|&x| x <= -1);
    let all_positive = atoms.keys().all(|&x| x >= 1);

    let (out, label) = if all_negative {
        let cmd = RightArgs { xi, r, atoms: args.atoms.clone(), k: args.k, tol: args.tol };
        (right_command(&cmd, OutputFormat::Json)?, "right tail")
    } else if all_positive {
        let cmd = LeftArgs { xi, r, atoms: args.atoms.clone(), k: args.k, tol: args.tol };
        (left_command(&cmd, OutputFormat::Json)?, "left tail")
    } else {
        return Err(Error::InvalidParameter(
            "atoms must be all negative (right tail) or all positive (left tail)".into(),
        ));
    };
    let doc: SolveReport = rebuild_report(&out.body)?;

    let step = if all_negative {
        StepDistribution::from_right_tail(xi, r, &atoms)?
    } else {
        left_step_from_args(xi, r, &args.atoms)?
    };
    let mc = sim::mc_sup(&step, args.n_samples, 256, args.seed)?;
    let pmf = doc.sup_pmf.clone();
    let check = Check {
        name: "mc_max_sigma",
        value: max_bin_sigma(
            &mc.histogram,
            args.n_samples,
            |x| pmf.get(x as usize).copied().unwrap_or(0.0),
            doc.sup_pmf.len() as i64 - 1,
        ),
        threshold: MC_SIGMA_THRESHOLD,
    };
    Ok((doc, check, label))
}

fn verify_tandem(args: &VerifyArgs) -> Result<(SolveReport, Check, &'static str)> {
    let cmd = TandemArgs {
        alpha: args.alpha.unwrap(),
        beta: args.beta.unwrap(),
        gamma: args.gamma.unwrap(),
        k: args.k,
        tol: args.tol,
    };
    let out = tandem_command(&cmd, OutputFormat::Json)?;
    let doc: SolveReport = rebuild_report(&out.body)?;

    let params = tandem::TandemParams::new(cmd.alpha, cmd.beta, cmd.gamma)?;
    // replica traces give batch-means standard errors; the backlog samples
    // are autocorrelated, so plain multinomial errors would be too tight
    let traces = sim::simulate_tandem_replicas(&params, args.n_samples, args.seed);
    let pmf = doc.sup_pmf.clone();
    let check = Check {
        name: "mc_max_sigma",
        value: sim::max_batch_sigma(
            &traces,
            |t| &t.z,
            |x| pmf.get(x as usize).copied().unwrap_or(0.0),
            doc.sup_pmf.len() as i64 - 1,
            MC_MIN_EXPECTED,
        ),
        threshold: MC_SIGMA_THRESHOLD,
    };
    Ok((doc, check, "tandem"))
}

fn rebuild_report(body: &str) -> Result<SolveReport> {
    let v: serde_json::Value = serde_json::from_str(body)?;
    Ok(SolveReport {
        params: v["params"].clone(),
        solution: SolutionDoc {
            p: v["solution"]["p"].as_f64().unwrap_or(f64::NAN),
            zeta: v["solution"]["zeta"].as_f64(),
            s_star: v["solution"]["s_star"].as_f64(),
            decay: v["solution"]["decay"].as_f64(),
        },
        sup_pmf: v["sup_pmf"]
            .as_array()
            .map(|a| a.iter().filter_map(|x| x.as_f64()).collect())
            .unwrap_or_default(),
        tail_bound: v["tail_bound"].as_f64().unwrap_or(f64::NAN),
        diagnostics: Diagnostics {
            oracle_tv: v["diagnostics"]["oracle_tv"].as_f64(),
            oracle_supnorm: v["diagnostics"]["oracle_supnorm"].as_f64(),
            iterations: v["diagnostics"]["iterations"].as_u64().unwrap_or(0),
        },
    })
}

fn validate_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    Ok(())
}

fn render_solve(report: &SolveReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(report)?),
        OutputFormat::Csv => {
            let mut out = String::from("x,pmf,cdf,tail_bound\n");
            let mut cdf = 0.0;
            for (x, p) in report.sup_pmf.iter().enumerate() {
                cdf += p;
                let _ = writeln!(out, "{x},{p:e},{cdf:e},{:e}", report.tail_bound);
            }
            Ok(out)
        }
    }
}
