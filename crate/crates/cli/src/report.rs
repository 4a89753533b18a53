//! Running a scenario and writing its report directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use couette_core::channel::ChannelOperator;
use couette_core::data::InitialData;
use couette_core::experiments::{corrector_fields, run_criterion, CriterionResult};
use couette_core::field::{ModeField, YGrid};
use couette_core::free::PhysicalFree;
use couette_core::weights::{epsilon, fit_exp_rate, weighted_lp_norm, WeightSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

pub const MANIFEST: &str = "manifest.json";
pub const CRITERIA_CSV: &str = "criteria.csv";
pub const CONSTANTS_CSV: &str = "constants.csv";
pub const NORMS_CSV: &str = "norms.csv";

/// Fewest time samples for which a decay rate is fitted.
const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub summary: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub scenario: Scenario,
    pub criteria: Vec<CriterionSummary>,
    pub files: Vec<String>,
}

/// One fitted rate or recorded constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub source: String,
    pub metric: String,
    pub alpha: f64,
    pub nu: f64,
    pub value: f64,
}

#[derive(Debug, Serialize)]
struct NormRow {
    alpha: f64,
    nu: f64,
    t: f64,
    l2_free: f64,
    l2_corrector: f64,
    l2_total: f64,
    l1_corrector: f64,
}

pub struct ScenarioOutcome {
    pub name: String,
    pub dir: PathBuf,
    pub criteria: Vec<CriterionResult>,
}

impl ScenarioOutcome {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

/// Norm time series of one `(α, ν)` pair: one row per time plus the
/// weighted norms of `ω_b` in the requested weights.
fn norm_series(s: &Scenario, alpha: f64, nu: f64) -> Result<(Vec<NormRow>, Vec<Vec<f64>>)> {
    let data = InitialData::generate(s.data, alpha, s.seed);
    let n = s.channel_n.unwrap_or_else(|| ChannelOperator::min_resolution(alpha, nu).max(256));
    let grid: Arc<YGrid> = YGrid::chebyshev(n);
    let times = s.times.times(alpha, nu);
    let (wb, _) = corrector_fields(&data, alpha, nu, &grid, &times)?;
    let free = PhysicalFree::new(&data, alpha, nu);
    let eps = epsilon(alpha, nu);
    let mut rows = Vec::with_capacity(times.len());
    let mut weighted = Vec::with_capacity(times.len());
    for (&t, b) in times.iter().zip(&wb) {
        let f = ModeField::from_fn(alpha, grid.clone(), |y| free.value(t, y).0);
        let total = f.add(b);
        rows.push(NormRow { alpha, nu, t, l2_free: f.l2_norm(), l2_corrector: b.l2_norm(), l2_total: total.l2_norm(), l1_corrector: b.l1_norm() });
        let w: Vec<f64> = s
            .weights
            .iter()
            .map(|w| weighted_lp_norm(b, &WeightSpec::new(w.family, w.p, eps), w.p))
            .collect::<couette_core::Result<_>>()?;
        weighted.push(w);
    }
    Ok((rows, weighted))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_norms(path: &Path, s: &Scenario, series: &[(Vec<NormRow>, Vec<Vec<f64>>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header: Vec<String> = ["alpha", "nu", "t", "l2_free", "l2_corrector", "l2_total", "l1_corrector"].map(String::from).to_vec();
    header.extend(s.weights.iter().map(|w| format!("corrector_{}", w.column())));
    w.write_record(&header)?;
    for (rows, weighted) in series {
        for (r, ws) in rows.iter().zip(weighted) {
            let mut rec: Vec<String> =
                [r.alpha, r.nu, r.t, r.l2_free, r.l2_corrector, r.l2_total, r.l1_corrector].iter().map(|v| v.to_string()).collect();
            rec.extend(ws.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs every requested criterion and the norm series, then writes
/// `out/<name>/{manifest.json, criteria.csv, constants.csv, norms.csv}`.
pub fn run_scenario(s: &Scenario, out: &Path) -> Result<ScenarioOutcome> {
    let cfg = s.suite_config();
    let dir = out.join(&s.name);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let criteria: Vec<CriterionResult> = s
        .criteria
        .par_iter()
        .map(|&id| run_criterion(id, &cfg).with_context(|| format!("scenario {}: criterion {id}", s.name)))
        .collect::<Result<_>>()?;
    let pairs: Vec<(f64, f64)> = s.alpha.iter().flat_map(|&a| s.nu.iter().map(move |&n| (a, n))).collect();
    let series: Vec<_> = pairs
        .par_iter()
        .map(|&(a, n)| norm_series(s, a, n).with_context(|| format!("scenario {}: norms at alpha={a}, nu={n}", s.name)))
        .collect::<Result<_>>()?;

    let mut constants = Vec::new();
    for c in &criteria {
        for r in &c.rows {
            constants.push(ConstantRow { source: format!("criterion-{}", c.id), metric: r.metric.clone(), alpha: r.alpha, nu: r.nu, value: r.value });
        }
    }
    for ((a, n), (rows, _)) in pairs.iter().zip(&series) {
        if rows.len() >= MIN_FIT_SAMPLES {
            let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
            let v: Vec<f64> = rows.iter().map(|r| r.l2_total).collect();
            let fit = fit_exp_rate(&t, &v)?;
            constants.push(ConstantRow { source: "norms".into(), metric: "decay_rate".into(), alpha: *a, nu: *n, value: fit.rate });
            constants.push(ConstantRow { source: "norms".into(), metric: "decay_rate_residual".into(), alpha: *a, nu: *n, value: fit.residual });
        }
    }

    let summaries: Vec<CriterionSummary> =
        criteria.iter().map(|c| CriterionSummary { id: c.id, name: c.name.to_string(), pass: c.pass, summary: c.summary.clone() }).collect();
    write_csv(&dir.join(CRITERIA_CSV), &summaries)?;
    write_csv(&dir.join(CONSTANTS_CSV), &constants)?;
    write_norms(&dir.join(NORMS_CSV), s, &series)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: s.clone(),
        criteria: summaries,
        files: [CRITERIA_CSV, CONSTANTS_CSV, NORMS_CSV].map(String::from).to_vec(),
    };
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(ScenarioOutcome { name: s.name.clone(), dir, criteria })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_constants(dir: &Path) -> Result<Vec<ConstantRow>> {
    let path = dir.join(CONSTANTS_CSV);
    let mut r = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().map(|row| row.with_context(|| format!("parsing {}", path.display()))).collect()
}
