//! Command-line front end. Every subcommand is computed in memory first
//! ([`execute`]); [`run`] then writes the outputs and the run manifest, and
//! `replay` re-executes a manifest's command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gbirthday_core::exhaustive::{census, count_zero};
use gbirthday_core::instance::sample_instance;
use gbirthday_core::limitpoly::LimitPolynomials;
use gbirthday_core::recursion::{self, lambda_mean, mu_mean, Limits, Mode};
use gbirthday_core::stats::{
    self, chen_stein_bound_v0, chen_stein_bound_w, exact_distribution, l1_poisson, preferred_mode, MonteCarloConfig,
    Statistic, DEFAULT_ENUMERATION_BUDGET,
};
use gbirthday_core::wagner::{count_wagner, list_wagner_solutions, tree_depth};
use gbirthday_core::{Instance, RingContext};
use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::instance_file::{instance_to_string, load_instance};
use crate::manifest::{strip_run_options, OutputRecord, RunManifest};
use crate::parallel::{monte_carlo_parallel, with_threads};
use crate::report::{self, fmt_sig, round_sig, FigurePoint};
use crate::svg::figure_svg;

/// Environment variable overriding the exhaustive enumeration budget.
pub const BUDGET_ENV: &str = "GBIRTHDAY_ENUM_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "gbirthday", version, about = "Wagner's tree algorithm for the generalised birthday problem modulo M")]
pub struct Cli {
    /// Worker threads for Monte Carlo and figure sweeps. Outputs do not
    /// depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Manifest path. Defaults to `<first output file>.manifest.json`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample a random instance and write it as JSON.
    Gen(GenArgs),
    /// Count V_b for every residue b.
    Census(CensusArgs),
    /// Count (and optionally list) Wagner solutions.
    Wagner(WagnerArgs),
    /// Ratio R_(n,m) of the mean Wagner count to the mean zero-sum count.
    Ratio(RatioArgs),
    /// Limit phi_n(0) of R_(n,m) as m grows.
    Limit(LimitArgs),
    /// Level probability tables p_(i,m)(j).
    Table(TableArgs),
    /// R_(n,m) against m with the limits as dotted lines (CSV + SVG).
    Figure2(FigureArgs),
    /// Monte Carlo distribution of V_0 or W.
    Mc(McArgs),
    /// Means and Chen-Stein bounds for V_0 and W.
    Bounds(BoundsArgs),
    /// Exact distribution of V_0 or W over all matrices.
    ExactDist(ExactDistArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Census(_) => "census",
            Command::Wagner(_) => "wagner",
            Command::Ratio(_) => "ratio",
            Command::Limit(_) => "limit",
            Command::Table(_) => "table",
            Command::Figure2(_) => "figure2",
            Command::Mc(_) => "mc",
            Command::Bounds(_) => "bounds",
            Command::ExactDist(_) => "exact-dist",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct ModulusArgs {
    /// Modulus M.
    #[arg(long = "M")]
    pub modulus: Option<u64>,
    /// Dyadic exponent, M = 2^m + 1.
    #[arg(long = "m")]
    pub m: Option<u32>,
}

impl ModulusArgs {
    fn ring(&self) -> Result<RingContext> {
        Ok(match (self.modulus, self.m) {
            (Some(modulus), _) => RingContext::new(modulus)?,
            (None, Some(m)) => RingContext::dyadic(m)?,
            (None, None) => bail!("one of --M or --m is required"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatArg {
    V0,
    W,
}

impl From<StatArg> for Statistic {
    fn from(s: StatArg) -> Self {
        match s {
            StatArg::V0 => Statistic::V0,
            StatArg::W => Statistic::W,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    /// Rows L.
    #[arg(long = "L")]
    pub rows: usize,
    /// Columns N.
    #[arg(long = "N")]
    pub cols: usize,
    #[command(flatten)]
    pub modulus: ModulusArgs,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CensusArgs {
    /// Instance file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// CSV with columns b,V_b.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Only write non-zero counts.
    #[arg(long)]
    pub sparse: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WagnerArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Write up to --cap solutions (1-based row indices) to --out.
    #[arg(long, requires = "out")]
    pub list: bool,
    #[arg(long, default_value_t = 100)]
    pub cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RatioArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    /// Emit rows for m..=m-max.
    #[arg(long)]
    pub m_max: Option<u32>,
    /// Exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LimitArgs {
    /// One or more n, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the exact coefficients of phi_n.
    #[arg(long)]
    pub coeffs_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TableArgs {
    #[arg(long)]
    pub m: u32,
    /// Highest level to tabulate (default: m).
    #[arg(long)]
    pub levels: Option<u32>,
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FigureArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub n: Vec<u32>,
    #[arg(long, default_value_t = 14)]
    pub m_max: u32,
    #[arg(long)]
    pub out_csv: PathBuf,
    #[arg(long)]
    pub out_svg: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McArgs {
    #[arg(long = "L")]
    pub rows: usize,
    #[arg(long = "N")]
    pub cols: usize,
    #[command(flatten)]
    pub modulus: ModulusArgs,
    #[arg(long, value_enum)]
    pub stat: StatArg,
    /// Number of replicates.
    #[arg(long = "K")]
    pub replicates: u64,
    #[arg(long)]
    pub seed: u64,
    /// Empirical distribution, columns k,probability.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the JSON summary to this file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long = "L")]
    pub rows: u64,
    #[arg(long = "N")]
    pub cols: u32,
    /// Modulus M, any size.
    #[arg(long = "M", conflicts_with = "m", required_unless_present = "m")]
    pub modulus: Option<String>,
    #[arg(long = "m")]
    pub m: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExactDistArgs {
    #[arg(long = "L")]
    pub rows: usize,
    #[arg(long = "N")]
    pub cols: usize,
    #[command(flatten)]
    pub modulus: ModulusArgs,
    #[arg(long, value_enum)]
    pub stat: StatArg,
    /// Cap on M^(L N); overrides the environment variable.
    #[arg(long)]
    pub budget: Option<u128>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest_path: PathBuf,
    /// Compare against the recorded outputs instead of rewriting them.
    #[arg(long)]
    pub verify: bool,
}

/// One produced artifact: a file, or standard output when `path` is `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub contents: String,
}

impl Output {
    fn stdout(contents: String) -> Self {
        Output { path: None, contents }
    }

    fn file(path: &Path, contents: String) -> Self {
        Output { path: Some(path.to_path_buf()), contents }
    }

    fn to(path: Option<&PathBuf>, contents: String) -> Self {
        Output { path: path.cloned(), contents }
    }
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub outputs: Vec<Output>,
    pub seeds: Vec<u64>,
    pub parameters: serde_json::Value,
}

fn wagner_applicable(inst: &Instance) -> bool {
    let ring = inst.ring();
    match (ring.dyadic_exponent(), tree_depth(inst.cols())) {
        (Some(m), Ok(n)) => n <= m,
        _ => false,
    }
}

fn load(path: &Path) -> Result<Instance> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    load_instance(std::io::BufReader::new(file)).with_context(|| format!("cannot load {}", path.display()))
}

fn enumeration_budget(arg: Option<u128>) -> Result<u128> {
    if let Some(b) = arg {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().with_context(|| format!("{BUDGET_ENV}={v} is not an integer")),
        Err(_) => Ok(DEFAULT_ENUMERATION_BUDGET),
    }
}

fn mode(exact: bool) -> Mode {
    if exact {
        Mode::Exact
    } else {
        Mode::Float
    }
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

/// Mean of the statistic: `mu` for `V_0`, `lambda` for `W`.
fn expected_mean(rows: usize, cols: usize, ring: &RingContext, stat: Statistic) -> Result<f64> {
    Ok(match stat {
        Statistic::V0 => mu_mean(rows as u64, cols as u32, &BigUint::from(ring.modulus()))?,
        Statistic::W => {
            let m = ring.require_dyadic()?;
            let n = tree_depth(cols)?;
            lambda_mean(rows as u64, n, m, preferred_mode(n, m))?
        }
    })
}

/// The bound that applies to the statistic, if its hypotheses hold.
fn chen_stein_bound(rows: usize, cols: usize, ring: &RingContext, stat: Statistic) -> Option<f64> {
    match stat {
        Statistic::V0 => chen_stein_bound_v0(rows as u64, cols as u32, &BigUint::from(ring.modulus())).ok(),
        Statistic::W => {
            let m = ring.dyadic_exponent()?;
            let n = tree_depth(cols).ok()?;
            chen_stein_bound_w(rows as u64, n, m).ok()
        }
    }
}

fn json_f64(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(round_sig(x)).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

/// Computes every output of a subcommand without touching the filesystem
/// (other than reading inputs).
pub fn execute(command: &Command, threads: Option<usize>) -> Result<Execution> {
    let mut seeds = Vec::new();
    let mut parameters = json!({});
    let outputs = match command {
        Command::Gen(a) => {
            parameters = params(a);
            seeds.push(a.seed);
            let inst = sample_instance(a.rows, a.cols, a.modulus.ring()?, a.seed)?;
            vec![Output::file(&a.out, instance_to_string(&inst))]
        }
        Command::Census(a) => {
            parameters = params(a);
            let inst = load(&a.input)?;
            let c = census(&inst)?;
            let v0 = c.count(gbirthday_core::Residue::ZERO);
            let w = if wagner_applicable(&inst) { count_wagner(&inst)?.to_string() } else { "NA".into() };
            let mut out = vec![Output::stdout(format!("V0={v0} W={w}\n"))];
            if let Some(path) = &a.out {
                out.push(Output::file(path, report::census_csv(&c, a.sparse)));
            }
            out
        }
        Command::Wagner(a) => {
            parameters = params(a);
            let inst = load(&a.input)?;
            ensure!(wagner_applicable(&inst), "Wagner's algorithm needs M = 2^m + 1 and N = 2^n with n <= m");
            let v0 = count_zero(&inst)?;
            let w = count_wagner(&inst)?;
            let mut summary = format!("V0={v0} W={w}");
            let mut out = Vec::new();
            if a.list {
                let list = list_wagner_solutions(&inst, a.cap)?;
                summary.push_str(&format!(" listed={} truncated={}", list.solutions.len(), list.truncated));
                let path = a.out.as_ref().expect("clap enforces --out with --list");
                out.push(Output::file(path, report::solutions_csv(&list, inst.cols())));
            }
            summary.push('\n');
            out.insert(0, Output::stdout(summary));
            out
        }
        Command::Ratio(a) => {
            parameters = params(a);
            let top = a.m_max.unwrap_or(a.m);
            ensure!(top >= a.m, "--m-max must be >= --m");
            let rows = (a.m..=top)
                .map(|m| Ok((a.n, m, recursion::ratio(a.n, m, mode(a.exact))?)))
                .collect::<Result<Vec<_>>>()?;
            vec![Output::to(a.out.as_ref(), report::ratio_csv(&rows))]
        }
        Command::Limit(a) => {
            parameters = params(a);
            let mut table = LimitPolynomials::default();
            let mut rows = Vec::new();
            let mut coeffs = Vec::new();
            for &n in &a.n {
                let phi = table.get(n)?;
                rows.push((n, phi.at_zero()));
                coeffs.push((n, phi.poly().coeffs().to_vec()));
            }
            let mut out = vec![Output::to(a.out.as_ref(), report::limit_csv(&rows))];
            if let Some(path) = &a.coeffs_out {
                out.push(Output::file(path, report::coefficients_csv(&coeffs)));
            }
            out
        }
        Command::Table(a) => {
            parameters = params(a);
            let levels = a.levels.unwrap_or(a.m);
            Limits::default().check(levels, a.m, mode(a.exact))?;
            let tables = recursion::tables(levels, a.m, mode(a.exact))?;
            vec![Output::to(a.out.as_ref(), report::tables_csv(&tables))]
        }
        Command::Figure2(a) => {
            parameters = params(a);
            let cap = Limits::default().float_max_m;
            ensure!(a.m_max <= cap, "--m-max {} exceeds the float-mode cap {cap}", a.m_max);
            ensure!(!a.n.is_empty() && a.n.iter().all(|&n| n >= 2), "every n must be >= 2");
            let mut table = LimitPolynomials::default();
            let mut jobs = Vec::new();
            for &n in &a.n {
                ensure!(n < a.m_max, "n = {n} leaves no m in n+1..=m-max");
                let limit = report::rational_f64(&table.phi_at_zero(n)?);
                jobs.extend((n + 1..=a.m_max).map(|m| (n, m, limit)));
            }
            let points = with_threads(threads, || {
                jobs.par_iter()
                    .map(|&(n, m, limit)| {
                        let ratio = recursion::ratio(n, m, Mode::Float)?.to_f64();
                        Ok(FigurePoint { n, m, ratio, limit })
                    })
                    .collect::<Result<Vec<_>>>()
            })??;
            vec![Output::file(&a.out_csv, report::figure_csv(&points)), Output::file(&a.out_svg, figure_svg(&points))]
        }
        Command::Mc(a) => {
            parameters = params(a);
            seeds.push(a.seed);
            let ring = a.modulus.ring()?;
            let statistic = Statistic::from(a.stat);
            let config = MonteCarloConfig {
                rows: a.rows,
                cols: a.cols,
                ring,
                statistic,
                replicates: a.replicates,
                seed: a.seed,
            };
            let mc = with_threads(threads, || monte_carlo_parallel(&config))??;
            let expected = expected_mean(a.rows, a.cols, &ring, statistic)?;
            let s = mc.summary;
            let summary = json!({
                "statistic": a.stat,
                "L": a.rows,
                "N": a.cols,
                "M": ring.modulus(),
                "replicates": s.replicates,
                "seed": a.seed,
                "mean": json_f64(s.mean),
                "variance": json_f64(s.variance),
                "std_error": json_f64(s.std_error),
                "expected_mean": json_f64(expected),
                "l1_poisson": json_f64(l1_poisson(&mc.distribution, expected)?),
                "noise_l1": json_f64(mc.noise_l1),
                "chen_stein_bound": chen_stein_bound(a.rows, a.cols, &ring, statistic).map_or(serde_json::Value::Null, json_f64),
            });
            let summary = format!("{}\n", serde_json::to_string(&summary)?);
            let mut out =
                vec![Output::file(&a.out, report::distribution_csv(&mc.distribution)), Output::stdout(summary.clone())];
            if let Some(path) = &a.summary {
                out.push(Output::file(path, summary));
            }
            out
        }
        Command::Bounds(a) => {
            parameters = params(a);
            let modulus = match (&a.modulus, a.m) {
                (Some(text), _) => text.trim().parse::<BigUint>().context("--M is not a decimal integer")?,
                (None, Some(m)) => (BigUint::one() << m) + 1u32,
                (None, None) => bail!("one of --M or --m is required"),
            };
            let mu = mu_mean(a.rows, a.cols, &modulus)?;
            let mut text =
                format!("mu={}\nbound_v0={}\n", fmt_sig(mu), fmt_sig(chen_stein_bound_v0(a.rows, a.cols, &modulus)?));
            let below = &modulus - 1u32;
            let dyadic = (below.count_ones() == 1).then(|| below.trailing_zeros().unwrap_or(0) as u32);
            match (dyadic, tree_depth(a.cols as usize)) {
                (Some(m), Ok(n)) if m > n => {
                    let lambda = lambda_mean(a.rows, n, m, preferred_mode(n, m))?;
                    text.push_str(&format!(
                        "lambda={}\nbound_w={}\n",
                        fmt_sig(lambda),
                        fmt_sig(chen_stein_bound_w(a.rows, n, m)?)
                    ));
                }
                (Some(_), Ok(_)) => text.push_str("bound_w=NA (needs m > n)\n"),
                _ => text.push_str("bound_w=NA (needs N = 2^n and M = 2^m + 1)\n"),
            }
            vec![Output::to(a.out.as_ref(), text)]
        }
        Command::ExactDist(a) => {
            let budget = enumeration_budget(a.budget)?;
            let mut p = params(a);
            p["budget"] = json!(budget.to_string());
            parameters = p;
            let ring = a.modulus.ring()?;
            let statistic = Statistic::from(a.stat);
            let dist = exact_distribution(a.rows, a.cols, ring.modulus(), statistic, budget)?;
            let expected = expected_mean(a.rows, a.cols, &ring, statistic)?;
            let l1 = stats::l1_poisson(&dist, expected)?;
            let bound = chen_stein_bound(a.rows, a.cols, &ring, statistic).map_or("NA".into(), fmt_sig);
            let summary = format!(
                "matrices={} mean={} expected={} l1={} bound={}\n",
                dist.total(),
                dist.mean_exact(),
                fmt_sig(expected),
                fmt_sig(l1),
                bound
            );
            let mut out = vec![Output::stdout(summary)];
            if let Some(path) = &a.out {
                out.push(Output::file(path, report::distribution_csv(&dist)));
            }
            out
        }
        Command::Replay(_) => bail!("replay cannot be executed from within a replay"),
    };
    Ok(Execution { outputs, seeds, parameters })
}

fn default_manifest_path(outputs: &[Output]) -> Option<PathBuf> {
    outputs.iter().find_map(|o| o.path.as_ref()).map(|p| {
        let mut s = p.clone().into_os_string();
        s.push(".manifest.json");
        PathBuf::from(s)
    })
}

fn write_outputs(outputs: &[Output]) -> Result<()> {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    for o in outputs {
        match &o.path {
            Some(path) => fs::write(path, &o.contents).with_context(|| format!("cannot write {}", path.display()))?,
            None => stdout.write_all(o.contents.as_bytes())?,
        }
    }
    stdout.flush()?;
    Ok(())
}

fn build_manifest(command: &Command, argv: Vec<String>, exec: &Execution) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: command.name().into(),
        argv,
        parameters: exec.parameters.clone(),
        seeds: exec.seeds.clone(),
        outputs: exec.outputs.iter().map(|o| OutputRecord::new(o.path.clone(), &o.contents)).collect(),
    }
}

/// Parses `args` (program name first), executes, writes outputs and the
/// manifest.
pub fn run(args: Vec<String>) -> Result<()> {
    let cli = Cli::try_parse_from(&args).unwrap_or_else(|e| e.exit());
    let argv = strip_run_options(&args[1..]);
    if let Command::Replay(r) = &cli.command {
        return replay(&r.manifest_path, r.verify, cli.threads);
    }
    let exec = execute(&cli.command, cli.threads)?;
    write_outputs(&exec.outputs)?;
    if let Some(path) = cli.manifest.clone().or_else(|| default_manifest_path(&exec.outputs)) {
        let manifest = build_manifest(&cli.command, argv, &exec);
        fs::write(&path, manifest.to_json()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// Re-executes the recorded command line. With `verify`, every recorded
/// output is recomputed and compared by size and SHA-256, and existing
/// files are compared byte for byte; nothing is written.
pub fn replay(manifest_path: &Path, verify: bool, threads: Option<usize>) -> Result<()> {
    let manifest = RunManifest::load(manifest_path)
        .with_context(|| format!("cannot read manifest {}", manifest_path.display()))?;
    let mut args = vec![manifest.tool.clone()];
    args.extend(manifest.argv.iter().cloned());
    let cli = Cli::try_parse_from(&args).context("manifest command line does not parse")?;
    ensure!(!matches!(cli.command, Command::Replay(_)), "a manifest cannot record a replay");
    let exec = execute(&cli.command, threads)?;
    let fresh = build_manifest(&cli.command, manifest.argv.clone(), &exec);
    if verify {
        ensure!(
            fresh.outputs == manifest.outputs,
            "replayed outputs differ from the manifest:\nrecorded: {:?}\nreplayed: {:?}",
            manifest.outputs,
            fresh.outputs
        );
        for o in &exec.outputs {
            if let Some(path) = &o.path {
                let on_disk = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
                ensure!(on_disk == o.contents.as_bytes(), "{} differs from the replayed output", path.display());
            }
        }
        println!("verified {} outputs", exec.outputs.len());
        return Ok(());
    }
    write_outputs(&exec.outputs)?;
    fs::write(manifest_path, fresh.to_json())?;
    Ok(())
}
