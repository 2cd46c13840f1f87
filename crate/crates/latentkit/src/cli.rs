//! Argument parsing and command execution.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use latentkit_core::Matrix;
use latentkit_core::dataset::{Codebook, ItemSpec};
use latentkit_core::synth::{self, FactorModelSpec};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::config::{Composite, PipelineConfig, RegressionSpec, RotationChoice, ScaleSource, parse_disqualify};
use crate::error::{Error, Result};
use crate::io::{self, OutputDir};
use crate::stages::{Context, STAGES, StageOutput};

#[derive(Debug, Parser)]
#[command(name = "latentkit", version, about = "Likert scale development and validation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean and deduplicate responses, apply disqualification rules.
    Ingest(RunArgs),
    /// Item descriptives, normality and factorability.
    Screen(RunArgs),
    /// Principal axis factoring, rotation and item assignment.
    Efa(RunArgs),
    /// Cronbach's alpha, item-total statistics, disattenuated correlations.
    Reliability(RunArgs),
    /// Average variance extracted, Fornell-Larcker, known groups.
    Validity(RunArgs),
    /// Multidimensional scaling of item correlations.
    Mds(RunArgs),
    /// Hierarchical clustering of the MDS configuration.
    Cluster(RunArgs),
    /// Group comparisons of scale scores.
    Compare(RunArgs),
    /// Multiple regression on scale scores.
    Regress(RunArgs),
    /// Generate Likert responses from a known factor model.
    Synth(SynthArgs),
    /// Every stage in order, plus a consolidated report.
    Pipeline(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Screen(_) => "screen",
            Command::Efa(_) => "efa",
            Command::Reliability(_) => "reliability",
            Command::Validity(_) => "validity",
            Command::Mds(_) => "mds",
            Command::Cluster(_) => "cluster",
            Command::Compare(_) => "compare",
            Command::Regress(_) => "regress",
            Command::Synth(_) => "synth",
            Command::Pipeline(_) => "pipeline",
        }
    }
}

fn serde_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(json!(s.replace('-', "_"))).map_err(|e| e.to_string())
}

/// Flags mirror the fields of the JSON configuration; a flag wins over the
/// file, and `LATENTKIT_SEED` wins over both.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub responses: Option<PathBuf>,
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Column identifying a respondent for duplicate detection.
    #[arg(long)]
    pub dedup_key: Option<String>,
    #[arg(long)]
    pub id_column: Option<String>,
    /// COLUMN=V1,V2: keep only rows whose column takes one of the values.
    #[arg(long, value_name = "RULE")]
    pub disqualify: Vec<String>,
    #[arg(long)]
    pub max_missing_items: Option<usize>,
    /// Number of factors; default is the Kaiser count capped at --max-factors.
    #[arg(long)]
    pub factors: Option<usize>,
    #[arg(long)]
    pub max_factors: Option<usize>,
    #[arg(long, value_enum)]
    pub rotation: Option<RotationChoice>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Salient loading threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// ITEM=FACTOR (1-based) assignment override.
    #[arg(long = "assign", value_name = "ITEM=FACTOR")]
    pub assign: Vec<String>,
    #[arg(long, value_enum)]
    pub scales: Option<ScaleSource>,
    /// mean or sum.
    #[arg(long, value_parser = serde_enum::<latentkit_core::dataset::Aggregation>)]
    pub aggregation: Option<latentkit_core::dataset::Aggregation>,
    /// NAME=ITEM,ITEM,...: summed composite score.
    #[arg(long)]
    pub composite: Option<String>,
    /// Comma-separated items to scale.
    #[arg(long, value_delimiter = ',')]
    pub mds_items: Option<Vec<String>>,
    /// Scale the items of one codebook subscale.
    #[arg(long)]
    pub mds_scale: Option<String>,
    #[arg(long)]
    pub dims: Option<usize>,
    /// ordinal or interval.
    #[arg(long, value_parser = serde_enum::<latentkit_core::mds::Transform>)]
    pub transform: Option<latentkit_core::mds::Transform>,
    /// pearson, spearman or kendall-tau-b.
    #[arg(long, value_parser = serde_enum::<latentkit_core::screening::CorrMethod>)]
    pub correlation: Option<latentkit_core::screening::CorrMethod>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Random-dissimilarity trials for the stress baseline (0 skips it).
    #[arg(long)]
    pub baseline_trials: Option<usize>,
    /// Clusters cut from the dendrogram.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// single or average.
    #[arg(long, value_parser = serde_enum::<latentkit_core::cluster::Linkage>)]
    pub linkage: Option<latentkit_core::cluster::Linkage>,
    #[arg(long)]
    pub group_column: Option<String>,
    /// Score column split into quartiles for known-groups validity.
    #[arg(long)]
    pub criterion: Option<String>,
    /// high-above or high-below.
    #[arg(long, value_parser = serde_enum::<latentkit_core::validity::Direction>)]
    pub direction: Option<latentkit_core::validity::Direction>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// "outcome ~ x1 + x2"
    #[arg(long = "regress", value_name = "MODEL")]
    pub regress: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

impl RunArgs {
    pub fn to_config(&self) -> Result<PipelineConfig> {
        let mut c: PipelineConfig = match &self.config {
            Some(p) => io::read_json(p)?,
            None => PipelineConfig::default(),
        };
        if self.responses.is_some() {
            c.responses = self.responses.clone();
        }
        if self.codebook.is_some() {
            c.codebook = self.codebook.clone();
        }
        set!(c.out, self.out.clone());
        set!(c.dedup_key, self.dedup_key.clone());
        if self.id_column.is_some() {
            c.id_column = self.id_column.clone();
        }
        if !self.disqualify.is_empty() {
            c.disqualify = self.disqualify.iter().map(|s| parse_disqualify(s)).collect::<Result<_>>()?;
        }
        if self.max_missing_items.is_some() {
            c.max_missing_items = self.max_missing_items;
        }
        if self.factors.is_some() {
            c.factors = self.factors;
        }
        set!(c.max_factors, self.max_factors);
        set!(c.rotation, self.rotation);
        set!(c.kappa, self.kappa);
        set!(c.threshold, self.threshold);
        for a in &self.assign {
            let (item, f) = a.split_once('=').ok_or_else(|| Error::config(format!("--assign `{a}` is not ITEM=FACTOR")))?;
            let f: usize = f.trim().parse().map_err(|_| Error::config(format!("--assign `{a}`: factor is not a number")))?;
            c.overrides.insert(item.trim().to_string(), f);
        }
        set!(c.scales, self.scales);
        set!(c.aggregation, self.aggregation);
        if let Some(s) = &self.composite {
            c.composite = Some(Composite::parse(s)?);
        }
        if self.mds_items.is_some() {
            c.mds.items = self.mds_items.clone();
        }
        if self.mds_scale.is_some() {
            c.mds.scale = self.mds_scale.clone();
        }
        set!(c.mds.dims, self.dims);
        set!(c.mds.transform, self.transform);
        set!(c.mds.correlation, self.correlation);
        set!(c.mds.restarts, self.restarts);
        set!(c.mds.tol, self.tol);
        set!(c.mds.max_iter, self.max_iter);
        set!(c.mds.baseline_trials, self.baseline_trials);
        if self.clusters.is_some() {
            c.clusters = self.clusters;
        }
        set!(c.linkage, self.linkage);
        if self.group_column.is_some() {
            c.group_column = self.group_column.clone();
        }
        if self.criterion.is_some() {
            c.criterion = self.criterion.clone();
        }
        set!(c.direction, self.direction);
        set!(c.alpha, self.alpha);
        if !self.regress.is_empty() {
            c.regressions = self.regress.iter().map(|s| RegressionSpec::parse(s)).collect::<Result<_>>()?;
        }
        set!(c.seed, self.seed);
        set!(c.threads, self.threads);
        c.apply_env()?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON factor-model specification; replaces the block-model flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, short, default_value = "latentkit-synth")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 25)]
    pub items: usize,
    #[arg(long, default_value_t = 5)]
    pub factors: usize,
    /// Lowest planted loading.
    #[arg(long, default_value_t = 0.6)]
    pub loading_min: f64,
    /// Highest planted loading.
    #[arg(long, default_value_t = 0.8)]
    pub loading_max: f64,
    /// Common correlation between factors.
    #[arg(long, default_value_t = 0.3)]
    pub phi: f64,
    #[arg(long, short, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn to_spec(&self) -> Result<FactorModelSpec> {
        let mut spec = match &self.spec {
            Some(p) => io::read_json(p)?,
            None => {
                if self.factors == 0 || self.items < self.factors {
                    return Err(Error::config("--items must be at least --factors, which must be at least 1"));
                }
                let l = synth::block_loadings(self.items, self.factors, self.loading_min, self.loading_max);
                FactorModelSpec::new(l, Matrix::equicorrelation(self.factors, self.phi), self.n, self.seed)
            }
        };
        if let Ok(v) = std::env::var(crate::config::SEED_ENV) {
            spec.seed = v.trim().parse().map_err(|_| Error::config(format!("{}=`{v}` is not an integer", crate::config::SEED_ENV)))?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Writes one stage's files.
pub fn write_stage(out: &mut OutputDir, s: &StageOutput) -> Result<()> {
    for (name, bytes) in s.all_files() {
        out.write(&name, &bytes)?;
    }
    Ok(())
}

/// A failure together with where it happened, for `error.json`.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
    pub stage: Option<String>,
    pub out: Option<PathBuf>,
}

/// Configuration errors found before the output directory exists are still
/// recorded there when the directory was named on the command line.
fn config_failure(args: &RunArgs, command: &str) -> impl Fn(Error) -> Failure {
    let out = args.out.clone();
    let command = command.to_string();
    move |error| {
        let f = Failure { error, stage: None, out: out.clone() };
        if let Some(out) = &out
            && let Ok(mut dir) = OutputDir::create(out) {
                let _ = dir.write("error.json", &io::json_bytes(&f.error.report(None)));
                let _ = dir.finish(&command, "error");
            }
        f
    }
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { error: e.into(), stage: None, out: None }
    }
}

fn at(stage: &str, out: &Path) -> impl Fn(Error) -> Failure {
    let (stage, out) = (stage.to_string(), out.to_path_buf());
    move |error| Failure { error, stage: Some(stage.clone()), out: Some(out.clone()) }
}

/// Runs a command, writing outputs and a manifest. On failure, files already
/// written stay in place and the manifest records the error.
pub fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    let name = cli.command.name();
    match &cli.command {
        Command::Synth(a) => {
            let mut out = OutputDir::create(&a.out)?;
            let res = synth_command(a, &mut out).map_err(at(name, &a.out));
            finish(&mut out, name, res)
        }
        Command::Pipeline(a) => {
            let config = a.to_config().map_err(config_failure(a, name))?;
            let mut out = OutputDir::create(&config.out)?;
            let res = pipeline(config.clone(), &mut out).map_err(|mut f| {
                f.out = Some(config.out.clone());
                f
            });
            finish(&mut out, name, res)
        }
        Command::Ingest(a)
        | Command::Screen(a)
        | Command::Efa(a)
        | Command::Reliability(a)
        | Command::Validity(a)
        | Command::Mds(a)
        | Command::Cluster(a)
        | Command::Compare(a)
        | Command::Regress(a) => {
            let config = a.to_config().map_err(config_failure(a, name))?;
            let mut out = OutputDir::create(&config.out)?;
            let res = Context::load(config.clone())
                .and_then(|mut ctx| ctx.run(name))
                .and_then(|s| write_stage(&mut out, &s))
                .map_err(at(name, &config.out));
            finish(&mut out, name, res)
        }
    }
}

fn finish(out: &mut OutputDir, command: &str, res: std::result::Result<(), Failure>) -> std::result::Result<(), Failure> {
    match res {
        Ok(()) => Ok(out.finish(command, "ok")?),
        Err(f) => {
            // best effort: the original failure matters more than a second one
            let _ = out.write("error.json", &io::json_bytes(&f.error.report(f.stage.as_deref())));
            let _ = out.finish(command, "error");
            Err(f)
        }
    }
}

fn pipeline(config: PipelineConfig, out: &mut OutputDir) -> std::result::Result<(), Failure> {
    let root = config.out.clone();
    let mut ctx = Context::load(config).map_err(at("ingest", &root))?;
    let mut reports = serde_json::Map::new();
    let mut md = String::from("# latentkit report\n\n");
    for stage in STAGES {
        if !ctx.configured(stage) {
            continue;
        }
        let s = ctx.run(stage).map_err(at(stage, &root))?;
        write_stage(out, &s).map_err(at(stage, &root))?;
        reports.insert(stage.to_string(), s.report.clone());
        md.push_str(&s.summary);
    }
    out.write("report.json", &io::json_bytes(&reports))?;
    out.write("report.md", md.as_bytes())?;
    Ok(())
}

fn synth_command(a: &SynthArgs, out: &mut OutputDir) -> Result<()> {
    let spec = a.to_spec()?;
    let m = synth::gen_likert(&spec)?;
    let membership = synth::planted_membership(&spec.loadings);
    let items: Vec<ItemSpec> =
        spec.ids().into_iter().zip(&membership).map(|(id, f)| ItemSpec::new(id).in_subscale(format!("F{}", f + 1))).collect();
    let codebook = Codebook::new(items, m.scale_min, m.scale_max)?;
    out.write("responses.csv", &io::responses_csv(&m, "id"))?;
    out.write("codebook.json", &io::json_bytes(&codebook))?;
    let planted: Vec<usize> = membership.iter().map(|f| f + 1).collect();
    out.write("synth.json", &io::json_bytes(&json!({ "spec": spec, "planted_factor": planted, "n": m.n(), "p": m.p() })))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"threshold": 0.3, "seed": 4, "mds": {"dims": 3}}"#).unwrap();
        let args = RunArgs { config: Some(path), threshold: Some(0.5), ..RunArgs::default() };
        let c = args.to_config().unwrap();
        assert_eq!(c.threshold, 0.5);
        assert_eq!(c.mds.dims, 3);
        if std::env::var(crate::config::SEED_ENV).is_err() {
            assert_eq!(c.seed, 4);
        }
    }

    #[test]
    fn enum_flags_accept_dashes() {
        let d: latentkit_core::validity::Direction = serde_enum("high-below").unwrap();
        assert_eq!(d, latentkit_core::validity::Direction::HighBelow);
        assert!(serde_enum::<latentkit_core::cluster::Linkage>("complete").is_err());
    }
}
