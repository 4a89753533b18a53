use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use couette_core::data::DataClass;
use couette_core::evans::{zero_free_scan, ScanRegion};
use couette_core::experiments::{run_criterion, SuiteConfig, CRITERIA};
use couette_core::resolvent::QuadParams;
use couette_core::weights::RateSpec;
use rayon::prelude::*;
use serde::Serialize;

mod compare;
mod report;
mod scenario;

/// Worker-count override for the thread pool.
const WORKERS_ENV: &str = "COUETTE_WORKERS";

#[derive(Parser)]
#[command(name = "couette", version, about = "Free evolution plus boundary corrector for Couette flow in a channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a config file (or a bundled scenario) and write reports.
    Run(RunArgs),
    /// Tabulate constant drifts between two scenario report directories.
    Compare(CompareArgs),
    /// Scan the Evans function over the zero-free region.
    EvansScan(ScanArgs),
    /// Run acceptance criteria and print PASS/FAIL per criterion.
    VerifyBounds(VerifyArgs),
}

/// Overrides shared by `run` and `verify-bounds`.
#[derive(Args, Clone, Default)]
struct ModeFlags {
    /// Wavenumbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Viscosities, comma separated.
    #[arg(long, value_delimiter = ',')]
    nu: Vec<f64>,
    /// Data class: `separated:<δ₀>`, `h1-boundary` or `l2-boundary`.
    #[arg(long, value_parser = parse_data_class)]
    data: Option<DataClass>,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(required_unless_present = "bundled", conflicts_with = "bundled")]
    config: Option<PathBuf>,
    /// Name of a bundled scenario, e.g. `sep-alpha1`.
    #[arg(long)]
    bundled: Option<String>,
    /// Report root; each scenario writes to `<out>/<name>/`.
    #[arg(long, short, default_value = "reports")]
    out: PathBuf,
    #[command(flatten)]
    mode: ModeFlags,
}

#[derive(Args)]
struct CompareArgs {
    run_a: PathBuf,
    run_b: PathBuf,
    /// Write the diff table here as CSV.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    nu: f64,
    /// `δ` of the region `c_i ≥ -αν - δε`.
    #[arg(long, default_value_t = RateSpec::default().delta)]
    delta: f64,
    #[arg(long, default_value_t = 121)]
    n_r: usize,
    #[arg(long, default_value_t = 21)]
    n_i: usize,
    /// Write `scan.csv` and `scan.json` into this directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Criteria to run, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
    /// Viscosity decades for the uniformity criteria, comma separated.
    #[arg(long, value_delimiter = ',')]
    nu_decades: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    mode: ModeFlags,
    /// Write `criteria.csv` and `constants.csv` into this directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn parse_data_class(s: &str) -> Result<DataClass, String> {
    match s {
        "h1-boundary" => Ok(DataClass::H1Boundary),
        "l2-boundary" => Ok(DataClass::L2Boundary),
        _ => match s.strip_prefix("separated:") {
            Some(d) => {
                let delta0: f64 = d.parse().map_err(|e| format!("bad δ₀ {d:?}: {e}"))?;
                if delta0 > 0.0 && delta0 < 1.0 {
                    Ok(DataClass::Separated { delta0 })
                } else {
                    Err(format!("δ₀ must lie in (0, 1), got {delta0}"))
                }
            }
            None => Err(format!("unknown data class {s:?}; expected separated:<δ₀>, h1-boundary or l2-boundary")),
        },
    }
}

fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{WORKERS_ENV}={v:?} is not a worker count"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn print_criterion(id: u8, name: &str, pass: bool, summary: &str) {
    println!("{} [{id:>2}] {name}: {summary}", if pass { "PASS" } else { "FAIL" });
}

fn cmd_run(args: RunArgs) -> Result<bool> {
    let mut file = match (&args.config, &args.bundled) {
        (Some(p), _) => scenario::load(p)?,
        (None, Some(name)) => scenario::bundled(name)?,
        (None, None) => unreachable!("clap requires one of config and --bundled"),
    };
    for s in &mut file.scenario {
        if !args.mode.alpha.is_empty() {
            s.alpha = args.mode.alpha.clone();
        }
        if !args.mode.nu.is_empty() {
            s.nu = args.mode.nu.clone();
        }
        if let Some(d) = args.mode.data {
            s.data = d;
        }
        s.validate()?;
    }
    if file.scenario.is_empty() {
        println!("no scenarios; nothing to do");
        return Ok(true);
    }
    let outcomes: Vec<_> = file.scenario.par_iter().map(|s| report::run_scenario(s, &args.out)).collect::<Result<_>>()?;
    let mut ok = true;
    for o in &outcomes {
        println!("scenario {} -> {}", o.name, o.dir.display());
        for c in &o.criteria {
            print_criterion(c.id, c.name, c.pass, &c.summary);
        }
        ok &= o.all_pass();
    }
    Ok(ok)
}

fn cmd_compare(args: CompareArgs) -> Result<bool> {
    let rows = compare::compare_runs(&args.run_a, &args.run_b)?;
    if let Some(p) = &args.out {
        report::write_csv(p, &rows)?;
    }
    if rows.is_empty() {
        println!("no differences");
        return Ok(true);
    }
    let flagged = rows.iter().filter(|r| r.flagged).count();
    for r in &rows {
        println!(
            "{}{} {} alpha={} nu {:e} -> {:e}: {:.6e} / {:.6e} = {:.4}",
            if r.flagged { "DRIFT " } else { "" },
            r.source,
            r.metric,
            r.alpha,
            r.nu_a,
            r.nu_b,
            r.value_a,
            r.value_b,
            r.ratio
        );
    }
    println!("{} differing constants, {flagged} drifted by more than {}x", rows.len(), compare::DRIFT_FLAG);
    Ok(flagged == 0)
}

#[derive(Serialize)]
struct ScanRow {
    c_r: f64,
    c_i: f64,
    ln_abs_det: f64,
    ln_ratio: f64,
}

#[derive(Serialize)]
struct ScanSummary {
    alpha: f64,
    nu: f64,
    delta: f64,
    c_i_min: f64,
    winding: i64,
    min_ln_abs_det: f64,
    min_ln_ratio: f64,
    boundary_samples: usize,
}

fn cmd_scan(args: ScanArgs) -> Result<bool> {
    let mut region = ScanRegion::zero_free(args.alpha, args.nu, args.delta);
    region.n_r = args.n_r;
    region.n_i = args.n_i;
    let rep = zero_free_scan(args.alpha, args.nu, region, &QuadParams::default())?;
    let summary = ScanSummary {
        alpha: args.alpha,
        nu: args.nu,
        delta: args.delta,
        c_i_min: region.c_i_min,
        winding: rep.winding,
        min_ln_abs_det: rep.min_ln_abs_det,
        min_ln_ratio: rep.min_ln_ratio,
        boundary_samples: rep.boundary_samples,
    };
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let rows: Vec<ScanRow> =
            rep.samples.iter().map(|s| ScanRow { c_r: s.c.re, c_i: s.c.im, ln_abs_det: s.det.ln_abs(), ln_ratio: s.ln_ratio() }).collect();
        report::write_csv(&dir.join("scan.csv"), &rows)?;
        std::fs::write(dir.join("scan.json"), serde_json::to_string_pretty(&summary)?)?;
    }
    println!(
        "alpha={} nu={:e}: winding {}, min ln|D| {:.4}, min ln(|D|/surrogate) {:.4} over c_i >= {:.6e}",
        args.alpha, args.nu, rep.winding, rep.min_ln_abs_det, rep.min_ln_ratio, region.c_i_min
    );
    Ok(rep.winding == 0)
}


fn cmd_verify(args: VerifyArgs) -> Result<bool> {
    let mut cfg = SuiteConfig { seed: args.seed, ..SuiteConfig::default() };
    if !args.mode.alpha.is_empty() {
        cfg.alpha = args.mode.alpha[0];
        cfg.alphas = args.mode.alpha.clone();
    }
    if !args.mode.nu.is_empty() {
        cfg.nus = args.mode.nu.clone();
    }
    if !args.nu_decades.is_empty() {
        cfg.nu_decades = args.nu_decades.clone();
    }
    if let Some(d) = args.mode.data {
        cfg.data = d;
    }
    let ids: Vec<u8> = if args.criteria.is_empty() { CRITERIA.map(|c| c.0).to_vec() } else { args.criteria.clone() };
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, &cfg)?;
        print_criterion(r.id, r.name, r.pass, &r.summary);
        results.push(r);
    }
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let summaries: Vec<report::CriterionSummary> = results
            .iter()
            .map(|c| report::CriterionSummary { id: c.id, name: c.name.to_string(), pass: c.pass, summary: c.summary.clone() })
            .collect();
        report::write_csv(&dir.join(report::CRITERIA_CSV), &summaries)?;
        let constants: Vec<report::ConstantRow> = results
            .iter()
            .flat_map(|c| {
                c.rows.iter().map(move |r| report::ConstantRow {
                    source: format!("criterion-{}", c.id),
                    metric: r.metric.clone(),
                    alpha: r.alpha,
                    nu: r.nu,
                    value: r.value,
                })
            })
            .collect();
        report::write_csv(&dir.join(report::CONSTANTS_CSV), &constants)?;
    }
    Ok(results.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_workers().and_then(|_| match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::EvansScan(a) => cmd_scan(a),
        Command::VerifyBounds(a) => cmd_verify(a),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
