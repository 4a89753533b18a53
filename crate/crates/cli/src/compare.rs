//! Drift report between two scenario runs.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;

use crate::report::{read_constants, read_manifest, ConstantRow};

/// Ratio beyond which a constant counts as drifted.
pub const DRIFT_FLAG: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffRow {
    pub source: String,
    pub metric: String,
    pub alpha: f64,
    pub nu_a: f64,
    pub nu_b: f64,
    pub value_a: f64,
    pub value_b: f64,
    /// `value_a / value_b`.
    pub ratio: f64,
    pub flagged: bool,
}

fn drift(ratio: f64) -> f64 {
    if ratio == 0.0 || !ratio.is_finite() {
        f64::INFINITY
    } else {
        ratio.abs().max(1.0 / ratio.abs())
    }
}

type Key = (String, String, u64);

/// Rows grouped by `(source, metric, α)`, kept in file order within a group.
fn group(rows: Vec<ConstantRow>) -> BTreeMap<Key, Vec<ConstantRow>> {
    let mut m: BTreeMap<Key, Vec<ConstantRow>> = BTreeMap::new();
    for r in rows {
        m.entry((r.source.clone(), r.metric.clone(), r.alpha.to_bits())).or_default().push(r);
    }
    m
}

/// Pairs constants of the same source, metric and `α` in file order and
/// reports every pair whose values differ. Runs over different data
/// classes or wavenumbers are rejected.
pub fn diff_constants(a: Vec<ConstantRow>, b: Vec<ConstantRow>) -> Vec<DiffRow> {
    let (ga, gb) = (group(a), group(b));
    let mut out = Vec::new();
    for (key, ra) in &ga {
        let Some(rb) = gb.get(key) else { continue };
        for (x, y) in ra.iter().zip(rb) {
            if x.value.to_bits() == y.value.to_bits() && x.nu.to_bits() == y.nu.to_bits() {
                continue;
            }
            let ratio = x.value / y.value;
            out.push(DiffRow {
                source: key.0.clone(),
                metric: key.1.clone(),
                alpha: x.alpha,
                nu_a: x.nu,
                nu_b: y.nu,
                value_a: x.value,
                value_b: y.value,
                ratio,
                flagged: drift(ratio) > DRIFT_FLAG,
            });
        }
    }
    out
}

pub fn compare_runs(a: &Path, b: &Path) -> Result<Vec<DiffRow>> {
    let (ma, mb) = (read_manifest(a)?, read_manifest(b)?);
    if ma.scenario.data != mb.scenario.data {
        bail!("mismatched scenarios: data classes {:?} and {:?}", ma.scenario.data, mb.scenario.data);
    }
    if ma.scenario.alpha != mb.scenario.alpha {
        bail!("mismatched scenarios: wavenumbers {:?} and {:?}", ma.scenario.alpha, mb.scenario.alpha);
    }
    if ma.scenario.seed != mb.scenario.seed {
        bail!("mismatched scenarios: seeds {} and {}", ma.scenario.seed, mb.scenario.seed);
    }
    Ok(diff_constants(read_constants(a)?, read_constants(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(metric: &str, nu: f64, value: f64) -> ConstantRow {
        ConstantRow { source: "norms".into(), metric: metric.into(), alpha: 1.0, nu, value }
    }

    #[test]
    fn identical_runs_give_empty_diff() {
        let a = vec![row("decay_rate", 1e-3, 0.2), row("x", 1e-3, 5.0)];
        assert!(diff_constants(a.clone(), a).is_empty());
    }

    #[test]
    fn decade_step_reports_rate_ratio() {
        let a = vec![row("decay_rate", 1e-3, 0.2154)];
        let b = vec![row("decay_rate", 1e-4, 0.1)];
        let d = diff_constants(a, b);
        assert_eq!(d.len(), 1);
        assert!((d[0].ratio - 2.154).abs() < 1e-9 && !d[0].flagged);
    }

    #[test]
    fn large_drift_is_flagged() {
        let d = diff_constants(vec![row("c", 1e-3, 1.0)], vec![row("c", 1e-3, 3.5)]);
        assert!(d[0].flagged);
        let d = diff_constants(vec![row("c", 1e-3, 1.0)], vec![row("c", 1e-3, 0.0)]);
        assert!(d[0].flagged);
    }
}
