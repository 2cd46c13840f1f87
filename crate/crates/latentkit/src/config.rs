//! Pipeline configuration shared by every subcommand.

use std::collections::BTreeMap;
use std::path::PathBuf;

use latentkit_core::cluster::Linkage;
use latentkit_core::dataset::{Aggregation, DisqualifyRule};
use latentkit_core::mds::{MIN_BASELINE_TRIALS, Transform};
use latentkit_core::screening::CorrMethod;
use latentkit_core::validity::Direction;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SEED_ENV: &str = "LATENTKIT_SEED";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RotationChoice {
    None,
    Varimax,
    #[default]
    Promax,
}

/// Where the scales scored by the downstream stages come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScaleSource {
    /// Codebook subscales when the codebook declares any, factors otherwise.
    #[default]
    Auto,
    Codebook,
    Efa,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Composite {
    pub name: String,
    pub items: Vec<String>,
}

impl Composite {
    /// `NAME=item1,item2,...`
    pub fn parse(s: &str) -> Result<Self> {
        let (name, items) = s.split_once('=').ok_or_else(|| Error::config(format!("composite `{s}` is not NAME=ITEMS")))?;
        let items: Vec<String> = items.split(',').map(|i| i.trim().to_string()).filter(|i| !i.is_empty()).collect();
        if name.trim().is_empty() || items.is_empty() {
            return Err(Error::config(format!("composite `{s}` needs a name and at least one item")));
        }
        Ok(Composite { name: name.trim().to_string(), items })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub outcome: String,
    pub predictors: Vec<String>,
}

impl RegressionSpec {
    /// `outcome ~ x1 + x2`
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("regression `{s}` is not `outcome ~ x1 + x2`"));
        let (y, xs) = s.split_once('~').ok_or_else(bad)?;
        let predictors: Vec<String> = xs.split('+').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
        if y.trim().is_empty() || predictors.is_empty() {
            return Err(bad());
        }
        Ok(RegressionSpec { outcome: y.trim().to_string(), predictors })
    }
}

pub fn parse_disqualify(s: &str) -> Result<DisqualifyRule> {
    let (column, allowed) =
        s.split_once('=').ok_or_else(|| Error::config(format!("disqualify rule `{s}` is not COLUMN=V1,V2")))?;
    Ok(DisqualifyRule {
        column: column.trim().to_string(),
        allowed: allowed.split(',').map(|v| v.trim().to_string()).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdsConfig {
    /// Items to scale; defaults to every codebook item.
    pub items: Option<Vec<String>>,
    /// Alternatively, the items of one codebook subscale.
    pub scale: Option<String>,
    pub dims: usize,
    pub transform: Transform,
    pub correlation: CorrMethod,
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Random-dissimilarity trials for the stress baseline; 0 skips it.
    pub baseline_trials: usize,
}

impl Default for MdsConfig {
    fn default() -> Self {
        MdsConfig {
            items: None,
            scale: None,
            dims: 2,
            transform: Transform::Ordinal,
            correlation: CorrMethod::Pearson,
            restarts: 10,
            tol: 1e-6,
            max_iter: 500,
            baseline_trials: MIN_BASELINE_TRIALS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub responses: Option<PathBuf>,
    pub codebook: Option<PathBuf>,
    pub out: PathBuf,
    pub dedup_key: String,
    pub id_column: Option<String>,
    pub disqualify: Vec<DisqualifyRule>,
    pub max_missing_items: Option<usize>,
    /// Fixed number of factors; otherwise `min(Kaiser count, max_factors)`.
    pub factors: Option<usize>,
    pub max_factors: usize,
    pub rotation: RotationChoice,
    pub kappa: f64,
    pub threshold: f64,
    /// Item id to 1-based factor number.
    pub overrides: BTreeMap<String, usize>,
    pub scales: ScaleSource,
    pub aggregation: Aggregation,
    pub composite: Option<Composite>,
    pub mds: MdsConfig,
    /// Clusters cut from the dendrogram; defaults to the number of scales.
    pub clusters: Option<usize>,
    pub linkage: Linkage,
    pub group_column: Option<String>,
    /// Score column split into quartiles for the known-groups comparison.
    pub criterion: Option<String>,
    pub direction: Direction,
    pub alpha: f64,
    pub regressions: Vec<RegressionSpec>,
    pub seed: u64,
    /// Worker threads for MDS restarts and baseline trials.
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            responses: None,
            codebook: None,
            out: PathBuf::from("latentkit-out"),
            dedup_key: "id".into(),
            id_column: None,
            disqualify: Vec::new(),
            max_missing_items: None,
            factors: None,
            max_factors: 10,
            rotation: RotationChoice::Promax,
            kappa: 4.0,
            threshold: 0.4,
            overrides: BTreeMap::new(),
            scales: ScaleSource::Auto,
            aggregation: Aggregation::Mean,
            composite: None,
            mds: MdsConfig::default(),
            clusters: None,
            linkage: Linkage::Single,
            group_column: None,
            criterion: None,
            direction: Direction::HighAbove,
            alpha: 0.05,
            regressions: Vec::new(),
            seed: 0,
            threads: 1,
        }
    }
}

impl PipelineConfig {
    /// Applies `LATENTKIT_SEED` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| Error::config(format!("{SEED_ENV}=`{v}` is not an integer")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.factors == Some(0) {
            return fail("--factors must be at least 1".into());
        }
        if self.max_factors == 0 {
            return fail("--max-factors must be at least 1".into());
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return fail(format!("--threshold {} not in (0, 1)", self.threshold));
        }
        if !(self.kappa >= 1.0) {
            return fail(format!("--kappa {} must be at least 1", self.kappa));
        }
        if self.overrides.values().any(|&f| f == 0) {
            return fail("factor overrides are 1-based".into());
        }
        if self.mds.dims == 0 {
            return fail("--dims must be at least 1".into());
        }
        if self.mds.restarts == 0 {
            return fail("--restarts must be at least 1".into());
        }
        if !(self.mds.tol > 0.0) || self.mds.max_iter == 0 {
            return fail("MDS tolerance and iteration limit must be positive".into());
        }
        if self.mds.baseline_trials != 0 && self.mds.baseline_trials < MIN_BASELINE_TRIALS {
            return fail(format!("--baseline-trials must be 0 or at least {MIN_BASELINE_TRIALS}"));
        }
        if self.mds.items.is_some() && self.mds.scale.is_some() {
            return fail("give either MDS items or an MDS scale, not both".into());
        }
        if self.clusters == Some(0) {
            return fail("--clusters must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("--alpha {} not in (0, 1)", self.alpha));
        }
        if self.threads == 0 {
            return fail("--threads must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        let r = RegressionSpec::parse("practice ~ usefulness + intention").unwrap();
        assert_eq!(r.predictors, vec!["usefulness", "intention"]);
        assert!(RegressionSpec::parse("practice").is_err());
        let c = Composite::parse("total=q1, q2,q3").unwrap();
        assert_eq!(c.items.len(), 3);
        let d = parse_disqualify("consent=yes").unwrap();
        assert_eq!(d.allowed, vec!["yes"]);
    }

    #[test]
    fn defaults_validate_and_roundtrip() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        let back: PipelineConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let bad = PipelineConfig { factors: Some(0), ..PipelineConfig::default() };
        assert_eq!(bad.validate().unwrap_err().exit_code(), 2);
    }
}
