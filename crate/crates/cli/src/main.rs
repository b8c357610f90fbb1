use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use riskrule::bounds::{self, BoundInputs, DiamConvention, RuleReport};
use riskrule::datagen::{self, DataKind, DataSpec};
use riskrule::lpformat;
use riskrule::rng::seeded;
use riskrule::search::{gen_scenarios, Grid, Parameterization, ProblemKind, SearchInstance, SearchPath};
use riskrule::train::{decompose, DecompResult, TrainingConfig};
use riskrule::{solve_exact, AffineRule, Error, MarginSpec, RiskSpec};

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "riskrule", version, about = "Train and certify affine decision rules for moving-target search")]
#[command(args_override_self = true)]
struct Cli {
    /// Cap on concurrent solves (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Also print human-readable markdown tables.
    #[arg(long, global = true)]
    markdown: bool,

    /// JSON file whose keys supply flag values for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a search instance with Markov-chain target scenarios.
    GenInstance(GenInstance),
    /// Generate a parameter point set.
    GenPoints(GenPoints),
    /// Run the decomposition algorithm on a training set.
    Train(Train),
    /// Evaluate direct, MDR and AMDR prescriptions on test points.
    Evaluate(Evaluate),
    /// Lower-bound and suboptimality certificates.
    BoundReport(BoundReport),
    /// Shrinking-training-set experiment at xi = 0.
    Convergence(Convergence),
    /// Write a linearized problem in CPLEX-LP format.
    EmitLp(EmitLp),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    A,
    B,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KindArg {
    Sp1,
    Sp2,
}

impl From<KindArg> for ProblemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Sp1 => ProblemKind::Sp1,
            KindArg::Sp2 => ProblemKind::Sp2,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum RiskArg {
    Expectation,
    WorstCase,
    Quantile,
    Superquantile,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PointKind {
    Shrinking,
    Uniform,
    Beta,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ConventionArg {
    Nominal,
    Scan,
}

#[derive(Args, Debug)]
struct GenInstance {
    #[arg(long, default_value_t = 9)]
    rows: usize,
    #[arg(long, default_value_t = 9)]
    cols: usize,
    #[arg(short = 'T', long = "horizon", default_value_t = 8)]
    horizon: usize,
    #[arg(short = 'I', long = "scenarios", default_value_t = 100)]
    scenarios: usize,
    /// Start cell of target 1 (1-based); the grid center by default.
    #[arg(long)]
    t1_start: Option<usize>,
    /// Start cell of target 2 (1-based); omit for a single-target instance.
    #[arg(long)]
    t2_start: Option<usize>,
    /// Draw target 1's start uniformly from the middle row.
    #[arg(long)]
    dispersed: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::A)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.45)]
    tau: f64,
    /// Nominal detection rate; 2.74887 in mode A and 0.510826 in mode B by default.
    #[arg(long)]
    alpha_bar: Option<f64>,
    #[arg(long, default_value_t = 0.6)]
    stay: f64,
    #[arg(long, default_value = "instance")]
    name: String,
    #[arg(long, env = "RISKRULE_SEED")]
    seed: u64,
}

#[derive(Args, Debug)]
struct GenPoints {
    #[arg(long, value_enum)]
    kind: PointKind,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    a: f64,
    #[arg(long, default_value_t = 0.1)]
    b: f64,
    #[arg(long)]
    count: usize,
    /// Point dimension; taken from --instance when omitted.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "points")]
    name: String,
    #[arg(long, env = "RISKRULE_SEED")]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct TrainFlags {
    #[arg(long, value_enum, default_value_t = RiskArg::Expectation)]
    risk: RiskArg,
    /// Level of the quantile or superquantile objective.
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    #[arg(long, default_value_t = 0.001)]
    theta: f64,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    step1_tol: f64,
    #[arg(long)]
    heuristic: bool,
}

impl TrainFlags {
    fn config(&self) -> anyhow::Result<TrainingConfig> {
        let risk0 = match self.risk {
            RiskArg::Expectation => RiskSpec::Expectation,
            RiskArg::WorstCase => RiskSpec::WorstCase,
            RiskArg::Quantile => RiskSpec::quantile(self.beta)?,
            RiskArg::Superquantile => RiskSpec::superquantile(self.beta)?,
        };
        let cfg = TrainingConfig {
            risk0,
            margin: MarginSpec::new(self.epsilon, self.delta)?,
            theta: self.theta,
            step1_tol: self.step1_tol,
            heuristic: self.heuristic,
            probabilities: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct Train {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    points: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Sp2)]
    mode: KindArg,
    #[command(flatten)]
    train: TrainFlags,
    #[arg(long, default_value = "train")]
    name: String,
}

#[derive(Args, Debug)]
struct Evaluate {
    #[arg(long)]
    instance: PathBuf,
    /// Rule JSON, or a decomposition JSON containing one.
    #[arg(long)]
    rule: PathBuf,
    #[arg(long)]
    training: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Sp1)]
    mode: KindArg,
    #[arg(long, default_value = "eval")]
    name: String,
}

#[derive(Args, Debug)]
struct BoundReport {
    /// Print the bound for explicit constants only.
    #[arg(long)]
    replay: bool,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    decomp: Option<PathBuf>,
    #[arg(long)]
    training: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Scan)]
    convention: ConventionArg,
    /// Ball radius used by the nominal convention.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    kappa0: Option<f64>,
    #[arg(long)]
    diam: Option<f64>,
    #[arg(long, default_value = "bounds")]
    name: String,
}

#[derive(Args, Debug)]
struct Convergence {
    #[arg(long)]
    instance: PathBuf,
    /// Training points per level.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Sp2)]
    mode: KindArg,
    #[command(flatten)]
    train: TrainFlags,
    #[arg(long, default_value = "convergence")]
    name: String,
    #[arg(long, env = "RISKRULE_SEED")]
    seed: u64,
}

#[derive(Args, Debug)]
struct EmitLp {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Sp2)]
    mode: KindArg,
    /// Point file holding the parameter vector; xi = 0 when omitted.
    #[arg(long)]
    points: Option<PathBuf>,
    /// 1-based row of --points.
    #[arg(long, default_value_t = 1)]
    index: usize,
    /// Emit the training problem over this point file instead.
    #[arg(long)]
    training: Option<PathBuf>,
    #[command(flatten)]
    train: TrainFlags,
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = Cli::parse_from(args);
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Infeasible(_)) => EXIT_INFEASIBLE,
        Some(Error::Numerical(_) | Error::Stall { .. } | Error::RankDeficient { .. }) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

/// Splices `--key value` pairs from the `--config` file in right after the
/// subcommand name, so flags given on the command line still win.
fn expand_config(args: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args.get(pos + 1).ok_or_else(|| anyhow!("--config needs a file"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let mut rest: Vec<String> = args[..pos].to_vec();
    rest.extend_from_slice(&args[pos + 2..]);
    let sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-') && SUBCOMMANDS.contains(&a.as_str()))
        .map(|p| p + 1)
        .ok_or_else(|| anyhow!("--config needs a subcommand"))?;
    let mut extra = Vec::new();
    for (k, v) in map {
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            serde_json::Value::Bool(true) => extra.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => extra.extend([flag, s]),
            serde_json::Value::Number(n) => extra.extend([flag, n.to_string()]),
            other => bail!("config key '{k}' has unsupported value {other}"),
        }
    }
    let mut out = rest[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[sub + 1..]);
    Ok(out)
}

const SUBCOMMANDS: &[&str] =
    &["gen-instance", "gen-points", "train", "evaluate", "bound-report", "convergence", "emit-lp"];

fn run(cli: &Cli) -> anyhow::Result<()> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    match &cli.cmd {
        Command::GenInstance(a) => gen_instance(cli, a),
        Command::GenPoints(a) => gen_points(cli, a),
        Command::Train(a) => train(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::BoundReport(a) => bound_report(cli, a),
        Command::Convergence(a) => convergence(cli, a),
        Command::EmitLp(a) => emit_lp(cli, a),
    }
}

fn load_instance(path: &Path) -> anyhow::Result<SearchInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SearchInstance::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn load_points(path: &Path) -> anyhow::Result<Vec<Vec<f64>>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    datagen::read_points(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn create(cli: &Cli, file: &str) -> anyhow::Result<(PathBuf, BufWriter<File>)> {
    let path = cli.out.join(file);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(f)))
}

fn write_json<T: Serialize>(cli: &Cli, file: &str, value: &T) -> anyhow::Result<PathBuf> {
    let (path, mut w) = create(cli, file)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

fn markdown_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n|{}\n", headers.join(" | "), "---|".repeat(headers.len()));
    for r in rows {
        s.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    s
}

fn one_based(cell: usize, cells: usize, what: &str) -> anyhow::Result<usize> {
    if cell == 0 || cell > cells {
        return Err(Error::Domain(format!("{what} {cell} outside 1..={cells}")).into());
    }
    Ok(cell - 1)
}

fn gen_instance(cli: &Cli, a: &GenInstance) -> anyhow::Result<()> {
    let grid = Grid::new(a.rows, a.cols)?;
    let cells = grid.cell_count();
    let mode = match a.mode {
        ModeArg::A => Parameterization::A,
        ModeArg::B => Parameterization::B,
    };
    let alpha_bar = a.alpha_bar.unwrap_or(match mode {
        Parameterization::A => 2.74887,
        Parameterization::B => 0.510826,
    });
    let center = (a.rows / 2) * a.cols + a.cols / 2;
    let t1 = match a.t1_start {
        Some(c) => one_based(c, cells, "target-1 start")?,
        None => center,
    };
    let starts1 = if a.dispersed { grid.row_cells(a.rows / 2) } else { vec![t1] };
    let mut rng = seeded(a.seed);
    let mut targets = vec![gen_scenarios(&mut rng, &grid, &starts1, a.horizon, a.scenarios, a.stay)?];
    if let Some(c) = a.t2_start {
        let t2 = one_based(c, cells, "target-2 start")?;
        targets.push(gen_scenarios(&mut rng, &grid, &[t2], a.horizon, a.scenarios, a.stay)?);
    }
    let inst = SearchInstance::new(grid, a.horizon, targets, alpha_bar, mode, a.tau)?;
    let path = write_json(cli, &format!("{}.json", a.name), &inst.to_file())?;
    println!("{}", path.display());
    Ok(())
}

fn gen_points(cli: &Cli, a: &GenPoints) -> anyhow::Result<()> {
    let dim = match (a.dim, &a.instance) {
        (Some(d), _) => d,
        (None, Some(p)) => load_instance(p)?.param_dim(),
        (None, None) => bail!(Error::Domain("give --dim or --instance".into())),
    };
    let kind = match a.kind {
        PointKind::Shrinking => DataKind::ShrinkingUniform {
            nu: a.nu.ok_or_else(|| Error::Domain("shrinking points need --nu".into()))?,
        },
        PointKind::Uniform => DataKind::SimplexUniform { radius: a.radius.unwrap_or(0.05) },
        PointKind::Beta => DataKind::SimplexBeta { a: a.a, b: a.b, radius: a.radius.unwrap_or(0.1) },
    };
    let spec = DataSpec { kind, count: a.count, seed: a.seed, dim };
    let points = spec.generate()?;
    let (path, w) = create(cli, &format!("{}.csv", a.name))?;
    datagen::write_points(w, &spec, &points)?;
    println!("{}", path.display());
    Ok(())
}

fn train(cli: &Cli, a: &Train) -> anyhow::Result<()> {
    let inst = load_instance(&a.instance)?;
    let training = load_points(&a.points)?;
    let cfg = a.train.config()?;
    let d = decompose(&inst, &training, &cfg, a.mode.into())?;
    write_json(cli, &format!("{}_decomp.json", a.name), &d)?;
    write_json(cli, &format!("{}_rule.json", a.name), &d.rule)?;
    let (_, w) = create(cli, &format!("{}_omega.csv", a.name))?;
    d.write_csv(w)?;
    println!("L = {:e}  U = {:e}  gap = {:.4}%", d.lower, d.upper, 100.0 * d.gap);
    if d.is_partial() {
        println!("rule is partial: {} coordinates could not be separated", d.partial.len());
    }
    if cli.markdown {
        let rows: Vec<Vec<String>> = d
            .per_omega
            .iter()
            .enumerate()
            .map(|(k, s)| {
                vec![(k + 1).to_string(), format!("{:.6}", s.value), d.paths[k].display_one_based()]
            })
            .collect();
        print!("{}", markdown_table(&["omega", "optimum", "path"], &rows));
    }
    Ok(())
}

fn load_rule(path: &Path) -> anyhow::Result<AffineRule> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(rule) = AffineRule::from_json(&text) {
        return Ok(rule);
    }
    let d = DecompResult::from_json(&text).with_context(|| format!("{} holds neither a rule nor a decomposition", path.display()))?;
    Ok(d.rule)
}

fn fmt_opt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        "NA".into()
    }
}

fn evaluate(cli: &Cli, a: &Evaluate) -> anyhow::Result<()> {
    let inst = load_instance(&a.instance)?;
    let rule = load_rule(&a.rule)?;
    let training = load_points(&a.training)?;
    let tests = load_points(&a.test)?;
    let report = bounds::rule_certificate(&inst, &rule, &training, &tests, &BoundInputs::default(), a.mode.into())?;

    let (_, w) = create(cli, &format!("{}.csv", a.name))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rule", "point_id", "feasible", "value", "optimum", "subopt"])?;
    for r in &report.rows {
        out.write_record([
            r.rule.label().to_string(),
            r.point_id.to_string(),
            r.feasible.to_string(),
            format!("{:e}", r.value),
            format!("{:e}", r.optimum),
            fmt_opt(r.subopt),
        ])?;
    }
    out.flush()?;

    let summary = summarize(&report);
    let (_, w) = create(cli, &format!("{}_summary.csv", a.name))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rule", "points", "feasible", "min", "avg", "max"])?;
    for s in &summary {
        out.write_record(s)?;
    }
    out.flush()?;
    if cli.markdown {
        print!("{}", markdown_table(&["rule", "points", "feasible", "min", "avg", "max"], &summary));
    }
    Ok(())
}

/// Per-rule feasible count and min/avg/max suboptimality over feasible points.
fn summarize(report: &RuleReport) -> Vec<Vec<String>> {
    ["direct", "mdr", "amdr"]
        .iter()
        .map(|label| {
            let rows: Vec<_> = report.rows.iter().filter(|r| r.rule.label() == *label).collect();
            let subs: Vec<f64> = rows.iter().filter(|r| r.feasible).map(|r| r.subopt).collect();
            let (min, avg, max) = if subs.is_empty() {
                ("NA".to_string(), "NA".to_string(), "NA".to_string())
            } else {
                let min = subs.iter().copied().fold(f64::INFINITY, f64::min);
                let max = subs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let avg = subs.iter().sum::<f64>() / subs.len() as f64;
                (format!("{min:e}"), format!("{avg:e}"), format!("{max:e}"))
            };
            vec![label.to_string(), rows.len().to_string(), subs.len().to_string(), min, avg, max]
        })
        .collect()
}

fn bound_report(cli: &Cli, a: &BoundReport) -> anyhow::Result<()> {
    if a.replay {
        let inputs = BoundInputs {
            sigma: a.sigma,
            tau: a.tau.unwrap_or(0.02),
            kappa0: a.kappa0.unwrap_or(10.0),
            kappa0_prime: a.kappa0.unwrap_or(10.0),
            lambda: 0.0,
            diam: a.diam.unwrap_or(0.05),
        };
        inputs.validate()?;
        return write_bounds_row(cli, a, &inputs, None);
    }
    let need = |p: &Option<PathBuf>, flag: &str| -> anyhow::Result<PathBuf> {
        p.clone().ok_or_else(|| anyhow!(Error::Domain(format!("bound-report needs {flag} (or --replay)"))))
    };
    let inst = load_instance(&need(&a.instance, "--instance")?)?;
    let decomp_path = need(&a.decomp, "--decomp")?;
    let text = fs::read_to_string(&decomp_path)?;
    let d = DecompResult::from_json(&text)?;
    let training = load_points(&need(&a.training, "--training")?)?;
    let tests = load_points(&need(&a.test, "--test")?)?;

    let all: Vec<Vec<f64>> = training.iter().chain(&tests).cloned().collect();
    let scan = bounds::diameter(&all)?;
    let diam = match a.convention {
        ConventionArg::Scan => DiamConvention::Scan.pick(0.0, scan),
        ConventionArg::Nominal => {
            let r = a.radius.ok_or_else(|| Error::Domain("the nominal convention needs --radius".into()))?;
            DiamConvention::Nominal.pick(r, scan)
        }
    };
    let diam = a.diam.unwrap_or(diam);
    let kappa0 = match a.kappa0 {
        Some(k) => k,
        None => bounds::kappa0(&inst)?,
    };
    let tau = a.tau.unwrap_or(d.abs_gap());
    let inputs = BoundInputs::for_rule(&d.rule, a.sigma, tau, kappa0, diam);
    inputs.validate()?;

    let lower = if d.kind == ProblemKind::Sp1 {
        Some(bounds::lower_bound_certificate(&d, &inputs, &inst, &tests)?)
    } else {
        None
    };
    let report = bounds::rule_certificate(&inst, &d.rule, &training, &tests, &inputs, d.kind)?;
    let (_, w) = create(cli, &format!("{}_rules.csv", a.name))?;
    report.write_csv(w)?;
    if let Some(lb) = &lower {
        let (_, w) = create(cli, &format!("{}_lower.csv", a.name))?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["point_id", "optimum", "certificate", "slack"])?;
        for r in &lb.rows {
            out.write_record([r.point_id.to_string(), format!("{:e}", r.optimum), format!("{:e}", r.certificate), format!("{:e}", r.slack)])?;
        }
        out.flush()?;
    }
    write_bounds_row(cli, a, &inputs, Some(scan))?;

    let lower_ok = lower.as_ref().is_none_or(|l| l.holds());
    if !(lower_ok && report.holds()) {
        return Err(Error::Numerical("a certificate is violated; see the report files".into()).into());
    }
    Ok(())
}

fn write_bounds_row(cli: &Cli, a: &BoundReport, inputs: &BoundInputs, scan: Option<f64>) -> anyhow::Result<()> {
    let mdr = bounds::mdr_amdr_bound(inputs);
    let direct = bounds::direct_rule_bound(inputs);
    let (_, w) = create(cli, &format!("{}.csv", a.name))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["sigma", "tau", "kappa0", "diam", "diam_scan", "mdr_amdr_bound", "direct_bound"])?;
    out.write_record([
        inputs.sigma.to_string(),
        inputs.tau.to_string(),
        inputs.kappa0.to_string(),
        inputs.diam.to_string(),
        scan.map_or_else(|| "NA".into(), |s| s.to_string()),
        mdr.to_string(),
        direct.to_string(),
    ])?;
    out.flush()?;
    println!("mdr/amdr bound = {mdr}  direct-rule bound = {direct}");
    if cli.markdown {
        let row = vec![inputs.sigma.to_string(), inputs.tau.to_string(), inputs.kappa0.to_string(), inputs.diam.to_string(), mdr.to_string()];
        print!("{}", markdown_table(&["sigma", "tau", "kappa0", "diam", "bound"], &[row]));
    }
    Ok(())
}

/// Cells searched in each period, 1-based, `+`-joined; `-` for none.
fn cells_by_period(y: &[bool], cells: usize, horizon: usize) -> Vec<String> {
    (0..horizon)
        .map(|t| {
            let on: Vec<String> = (0..cells).filter(|&c| y[t * cells + c]).map(|c| (c + 1).to_string()).collect();
            if on.is_empty() {
                "-".into()
            } else {
                on.join("+")
            }
        })
        .collect()
}

fn convergence(cli: &Cli, a: &Convergence) -> anyhow::Result<()> {
    let inst = load_instance(&a.instance)?;
    let kind: ProblemKind = a.mode.into();
    let cfg = a.train.config()?;
    let cells = inst.grid().cell_count();
    let horizon = inst.horizon();
    let dim = inst.param_dim();
    let zero = vec![0.0; dim];
    let exact = solve_exact(&inst, &zero, kind, 0.0)?;
    let best = exact.path.clone().ok_or_else(|| Error::Infeasible("the problem at xi = 0 is infeasible".into()))?;
    let second = |y: &[bool]| -> anyhow::Result<String> {
        Ok(if inst.target_count() > 1 { format!("{:.6}", inst.nondetect_prob_raw(&zero, y, 1)?) } else { "NA".into() })
    };

    let mut rows = Vec::new();
    for nu in 1..=8u32 {
        let training = datagen::shrinking_uniform(nu, dim, a.count, a.seed.wrapping_add(u64::from(nu)))?;
        let d = decompose(&inst, &training, &cfg, kind)?;
        let (_, y) = d.rule.apply(&zero)?;
        let feasible = inst.feasible(&zero, &y, kind)?;
        let matches = SearchPath::from_binary(&y, cells, horizon).is_some_and(|p| p == best);
        rows.push(vec![
            nu.to_string(),
            cells_by_period(&y, cells, horizon).join(" "),
            feasible.to_string(),
            matches.to_string(),
            format!("{:.6}", inst.nondetect_prob_raw(&zero, &y, 0)?),
            second(&y)?,
            format!("{:e}", d.lower),
            format!("{:e}", d.upper),
            format!("{:e}", d.gap),
        ]);
    }
    let y = best.to_binary(cells);
    rows.push(vec![
        "inf".into(),
        cells_by_period(&y, cells, horizon).join(" "),
        "true".into(),
        "true".into(),
        format!("{:.6}", exact.value),
        second(&y)?,
        String::new(),
        String::new(),
        String::new(),
    ]);
    let headers = ["nu", "cells", "path_feasible", "matches_optimum", "p1", "p2", "L", "U", "gap"];
    let (path, w) = create(cli, &format!("{}.csv", a.name))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(headers)?;
    for r in &rows {
        out.write_record(r)?;
    }
    out.flush()?;
    println!("{}", path.display());
    if cli.markdown {
        print!("{}", markdown_table(&headers, &rows));
    }
    Ok(())
}

fn emit_lp(cli: &Cli, a: &EmitLp) -> anyhow::Result<()> {
    let inst = load_instance(&a.instance)?;
    let kind: ProblemKind = a.mode.into();
    let name = stem(&a.instance);
    let (file, text) = if let Some(tp) = &a.training {
        let training = load_points(tp)?;
        let cfg = a.train.config()?;
        let flat: Vec<f64> = training.iter().flatten().copied().collect();
        let file = lpformat::lp_file_name(&format!("{name}_train"), kind, &flat);
        (file, lpformat::emit_training_milp(&inst, &training, &cfg, kind)?)
    } else {
        let xi = match &a.points {
            Some(p) => {
                let pts = load_points(p)?;
                pts.get(a.index.wrapping_sub(1))
                    .cloned()
                    .ok_or_else(|| Error::Domain(format!("--index {} outside 1..={}", a.index, pts.len())))?
            }
            None => vec![0.0; inst.param_dim()],
        };
        (lpformat::lp_file_name(&name, kind, &xi), lpformat::emit_milp(&inst, &xi, kind)?)
    };
    let (path, mut w) = create(cli, &file)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    println!("{}", path.display());
    Ok(())
}
