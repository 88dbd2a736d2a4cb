use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lamperti_core::experiments::{self, Engine, ExperimentConfig, ExperimentKind, Model, Outcome, PartialConfig};
use lamperti_core::LawKind;

#[derive(Parser)]
#[command(name = "lamperti", version, about = "Waiting-time experiments for infinite-measure interval maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Renewal surrogate: Y_n/n, V_n/n and the distorted processes against their limit laws
    DynkinLamperti(Common),
    /// Farey (or Lasota–Yorke) map: KS distance of the critical statistics to Uniform[0,1]
    CriticalFarey(Common),
    /// Thaler map at alpha = 0: censored CDF estimates of log n / log V_n
    CriticalThaler(Common),
    /// Farey map: large-deviation ratios and straddling-digit tails
    LargeDeviation(Common),
    /// Farey map: log sigma_n / log n against Uniform[0,1] and sigma_n tails
    ContinuedFractions(Common),
    /// Density and CDF tables of the limit laws
    Tables(Common),
    /// Per-sample waiting-time records as CSV
    Records(Common),
    /// Continued-fraction digits of random points as CSV
    Digits(Common),
    /// Run the experiment named by --experiment or the config file
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    experiment: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Default)]
struct Common {
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// farey, lasota-yorke, thaler0 or renewal
    #[arg(long)]
    map: Option<String>,
    /// Comma-separated indices
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Comma-separated horizons; 1e6 style is accepted
    #[arg(long, alias = "horizon", value_delimiter = ',', value_parser = parse_count)]
    horizons: Option<Vec<u64>>,
    /// Number of sampled points or paths
    #[arg(long, value_parser = parse_count)]
    samples: Option<u64>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: out/<experiment>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [default: one per core]
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated x values of the CDF and tail estimates
    #[arg(long, value_delimiter = ',')]
    x_grid: Option<Vec<f64>>,
    /// Comma-separated x:y pairs
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    xy_grid: Option<Vec<[f64; 2]>>,
    /// Iteration cap of the Thaler orbits
    #[arg(long, value_parser = parse_count)]
    cap: Option<u64>,
    /// chain or exact
    #[arg(long)]
    engine: Option<String>,
    /// Bit budget per exact digit stream
    #[arg(long, value_parser = parse_count)]
    bit_cap: Option<u64>,
    /// Largest tolerated fraction of uncertified Thaler orbits
    #[arg(long)]
    max_degraded: Option<f64>,
    /// Comma-separated bit precisions retried for uncertified Thaler orbits
    #[arg(long, value_delimiter = ',')]
    precisions: Option<Vec<usize>>,
    /// Comma-separated law names for tables
    #[arg(long, value_delimiter = ',')]
    laws: Option<Vec<String>>,
    /// Points per table
    #[arg(long)]
    grid_points: Option<usize>,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if f >= 0.0 && f.fract() == 0.0 && f < u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("not a non-negative integer: {s:?}"))
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s.split_once(':').ok_or_else(|| format!("expected x:y, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
    Ok([p(x)?, p(y)?])
}

impl Common {
    fn partial(&self) -> Result<PartialConfig> {
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            experiment: None,
            map: self.map.as_deref().map(str::parse::<Model>).transpose()?,
            engine: self.engine.as_deref().map(str::parse::<Engine>).transpose()?,
            alphas: self.alpha.clone(),
            horizons: self.horizons.clone(),
            samples: self.samples.map(|s| s as usize),
            seed: self.seed,
            x_grid: self.x_grid.clone(),
            xy_grid: self.xy_grid.clone(),
            cap: self.cap,
            bit_cap: self.bit_cap,
            max_degraded: self.max_degraded,
            precisions: self.precisions.clone(),
            laws: self
                .laws
                .as_ref()
                .map(|l| l.iter().map(|s| s.parse::<LawKind>()).collect::<Result<Vec<_>, _>>())
                .transpose()?,
            grid_points: self.grid_points,
        };
        Ok(base.overlay(flags))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    files: Vec<String>,
    pass: bool,
}

fn write_outputs(dir: &Path, config: &ExperimentConfig, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = vec!["report.json".to_string()];
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&outcome.report)? + "\n")?;
    for a in &outcome.artifacts {
        fs::write(dir.join(&a.name), &a.contents).with_context(|| format!("writing {}", a.name))?;
        files.push(a.name.clone());
    }
    let manifest = Manifest {
        tool: "lamperti",
        version: env!("CARGO_PKG_VERSION"),
        config,
        files,
        pass: outcome.report.pass,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn print_summary(outcome: &Outcome) {
    for row in &outcome.report.rows {
        let status = match row.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "    ",
        };
        let mut params = String::new();
        for (k, v) in [("alpha", row.alpha), ("x", row.x), ("y", row.y)] {
            if let Some(v) = v {
                params.push_str(&format!(" {k}={v}"));
            }
        }
        let band = row.band.map(|b| format!(" band {b}")).unwrap_or_default();
        println!(
            "{status} n={} N={} {}{params} = {}{band}",
            row.n, row.samples, row.statistic, row.value
        );
    }
    println!(
        "{}: {}",
        outcome.report.experiment,
        if outcome.report.pass { "pass" } else { "FAIL" }
    );
}

fn execute(kind: Option<ExperimentKind>, common: &Common) -> Result<bool> {
    let mut partial = common.partial()?;
    match (kind, partial.experiment) {
        (Some(k), Some(c)) if k != c => bail!("config is for {c}, not {k}"),
        (Some(k), _) => partial.experiment = Some(k),
        (None, None) => bail!("no experiment given; pass --experiment or set it in the config"),
        (None, Some(_)) => {}
    }
    let config = ExperimentConfig::resolve(partial)?;
    let outcome = experiments::run(&config, common.threads)?;
    let dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(config.experiment.name()));
    write_outputs(&dir, &config, &outcome)?;
    print_summary(&outcome);
    Ok(outcome.report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::DynkinLamperti(c) => execute(Some(ExperimentKind::DynkinLamperti), c),
        Command::CriticalFarey(c) => execute(Some(ExperimentKind::CriticalFarey), c),
        Command::CriticalThaler(c) => execute(Some(ExperimentKind::CriticalThaler), c),
        Command::LargeDeviation(c) => execute(Some(ExperimentKind::LargeDeviation), c),
        Command::ContinuedFractions(c) => execute(Some(ExperimentKind::ContinuedFractions), c),
        Command::Tables(c) => execute(Some(ExperimentKind::Tables), c),
        Command::Records(c) => execute(Some(ExperimentKind::Records), c),
        Command::Digits(c) => execute(Some(ExperimentKind::Digits), c),
        Command::Run(r) => r
            .experiment
            .as_deref()
            .map(str::parse::<ExperimentKind>)
            .transpose()
            .map_err(anyhow::Error::from)
            .and_then(|k| execute(k, &r.common)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
