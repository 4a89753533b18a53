//! Scenario files: TOML with unit-suffixed keys, unknown keys rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use couette_core::data::DataClass;
use couette_core::experiments::{SuiteConfig, Tolerances, CRITERIA};
use couette_core::quad::geometric_grid;
use couette_core::weights::{RateSpec, WeightFamily};
use serde::{Deserialize, Serialize};

pub const BUNDLED: [(&str, &str); 1] = [("sep-alpha1", include_str!("../scenarios/sep-alpha1.toml"))];

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub scenario: Vec<Scenario>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Geometric,
}

/// Output times in multiples of `α^{-2/3} ν^{-1/3}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start_ed: f64,
    pub t_stop_ed: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { t_start_ed: 0.5, t_stop_ed: 5.0, count: 12, spacing: Spacing::Geometric }
    }
}

impl TimeGrid {
    pub fn times(&self, alpha: f64, nu: f64) -> Vec<f64> {
        let unit = alpha.powf(-2.0 / 3.0) * nu.powf(-1.0 / 3.0);
        let (a, b) = (self.t_start_ed * unit, self.t_stop_ed * unit);
        match self.spacing {
            Spacing::Geometric => geometric_grid(a, b, self.count),
            Spacing::Linear if self.count == 1 => vec![a],
            Spacing::Linear => (0..self.count).map(|k| a + (b - a) * k as f64 / (self.count - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightRequest {
    pub family: WeightFamily,
    pub p: f64,
}

impl WeightRequest {
    pub fn column(&self) -> String {
        let fam = match self.family {
            WeightFamily::EtaP => "eta_p",
            WeightFamily::EtaStarP => "eta_star_p",
            WeightFamily::EtaTilde => "eta_tilde",
            WeightFamily::EtaTildeIn => "eta_tilde_in",
        };
        if self.p.is_infinite() {
            format!("{fam}_inf")
        } else {
            format!("{fam}_{}", self.p)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub alpha: Vec<f64>,
    pub nu: Vec<f64>,
    #[serde(default = "default_decades")]
    pub nu_decades: Vec<f64>,
    /// Wavenumber of the single-mode criteria.
    #[serde(default = "default_single_alpha")]
    pub single_alpha: f64,
    pub data: DataClass,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default)]
    pub weights: Vec<WeightRequest>,
    #[serde(default)]
    pub criteria: Vec<u8>,
    #[serde(default)]
    pub rate: RateSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub channel_n: Option<usize>,
}

fn default_decades() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

fn default_single_alpha() -> f64 {
    1.0
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            bail!("scenario name {:?} is not a valid directory name", self.name);
        }
        for &a in self.alpha.iter().chain([&self.single_alpha]) {
            if !(a.is_finite() && a > 0.0) {
                bail!("scenario {}: alpha must be positive, got {a}", self.name);
            }
        }
        for &n in self.nu.iter().chain(&self.nu_decades) {
            if !(n.is_finite() && n > 0.0) {
                bail!("scenario {}: nu must be positive, got {n}", self.name);
            }
        }
        if let DataClass::Separated { delta0 } = self.data {
            if !(delta0 > 0.0 && delta0 < 1.0) {
                bail!("scenario {}: delta0 must lie in (0, 1), got {delta0}", self.name);
            }
        }
        let t = &self.times;
        if !(t.t_start_ed > 0.0 && t.t_stop_ed >= t.t_start_ed && t.count >= 1) {
            bail!("scenario {}: time grid needs 0 < t_start_ed <= t_stop_ed and count >= 1", self.name);
        }
        if t.spacing == Spacing::Geometric && t.count < 2 {
            bail!("scenario {}: geometric time grid needs count >= 2", self.name);
        }
        for w in &self.weights {
            if !(w.p >= 1.0) {
                bail!("scenario {}: weight exponent p must be >= 1, got {}", self.name, w.p);
            }
        }
        for &c in &self.criteria {
            if !CRITERIA.iter().any(|(id, _)| *id == c) {
                bail!("scenario {}: unknown criterion {c}", self.name);
            }
        }
        Ok(())
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            alphas: self.alpha.clone(),
            nus: self.nu.clone(),
            nu_decades: self.nu_decades.clone(),
            alpha: self.single_alpha,
            data: self.data,
            seed: self.seed,
            rate: self.rate,
            tol: self.tolerances.clone(),
            channel_n: self.channel_n,
        }
    }
}

pub fn parse(text: &str, origin: &str) -> Result<ScenarioFile> {
    let file: ScenarioFile = toml::from_str(text).with_context(|| format!("malformed scenario file {origin}"))?;
    let mut names = std::collections::BTreeSet::new();
    for s in &file.scenario {
        s.validate().with_context(|| format!("in {origin}"))?;
        if !names.insert(s.name.clone()) {
            bail!("duplicate scenario name {:?} in {origin}", s.name);
        }
    }
    Ok(file)
}

pub fn load(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text, &path.display().to_string())
}

pub fn bundled(name: &str) -> Result<ScenarioFile> {
    match BUNDLED.iter().find(|(n, _)| *n == name) {
        Some((n, text)) => parse(text, &format!("bundled scenario {n}")),
        None => bail!("no bundled scenario {name:?}; available: {}", BUNDLED.map(|b| b.0).join(", ")),
    }
}
