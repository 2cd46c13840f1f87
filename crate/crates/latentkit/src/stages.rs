//! Analysis stages. Each stage returns its files in memory; the caller
//! decides where they go. Stages recompute what they need from the inputs,
//! so running one alone gives the same bytes as running it in the pipeline.

use std::collections::BTreeMap;
use std::fmt::Write;

use latentkit_core::cluster::{self, Dendrogram};
use latentkit_core::dataset::{
    self, Codebook, Group, Ingested, IngestOptions, ResponseMatrix, ScoreTable,
};
use latentkit_core::efa::{self, AssignmentReport, EfaOptions, FactorScores, FactorSolution, RetentionAdvice};
use latentkit_core::inference::{self, CorrelationKind, MwMode, PostHoc, TVariant, Tails};
use latentkit_core::mds::{self, DissimilarityTransform, MdsOptions, MdsSolution, Source, StressBaseline};
use latentkit_core::reliability::{self, DisattenuatedMatrix, ReliabilityReport};
use latentkit_core::screening::{self, CorrMatrix, CorrMethod};
use latentkit_core::validity::{self, FornellLarckerMatrix, KnownGroupsReport};
use latentkit_core::{Matrix, stats};
use serde::Serialize;
use serde_json::{Value, json};

use crate::config::{PipelineConfig, RotationChoice, ScaleSource};
use crate::error::{Error, Result};
use crate::io::{self, CsvDoc, num, opt_num};
use crate::parallel;
use crate::svg;

pub const STAGES: [&str; 9] = ["ingest", "screen", "efa", "reliability", "validity", "mds", "cluster", "compare", "regress"];

/// Files and summary produced by one stage. The JSON report is written as
/// `<stage>.json` and the summary as `<stage>.txt`.
pub struct StageOutput {
    pub stage: &'static str,
    pub report: Value,
    pub summary: String,
    pub files: Vec<(String, Vec<u8>)>,
}

impl StageOutput {
    fn new(stage: &'static str, report: impl Serialize, summary: String) -> Self {
        let report = serde_json::to_value(report).expect("reports serialize to JSON");
        StageOutput { stage, report, summary, files: Vec::new() }
    }

    fn file(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.files.push((name.to_string(), bytes));
        self
    }

    /// Every file including the JSON report and the summary.
    pub fn all_files(&self) -> Vec<(String, Vec<u8>)> {
        let mut out = vec![
            (format!("{}.json", self.stage), io::json_bytes(&self.report)),
            (format!("{}.txt", self.stage), self.summary.clone().into_bytes()),
        ];
        out.extend(self.files.iter().cloned());
        out
    }
}

fn f3(v: f64) -> String {
    if v.is_finite() { format!("{v:.3}") } else { "-".into() }
}

fn f3o(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), f3)
}

/// Plain-text table with left-aligned first column.
fn text_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0; cols];
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (j, c) in r.iter().enumerate().take(cols) {
            width[j] = width[j].max(c.chars().count());
        }
    }
    let line = |r: &[String]| -> String {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = width[j]) } else { format!("{c:>w$}", w = width[j]) })
            .collect();
        cells.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(header);
    s.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * cols.saturating_sub(1)));
    s.push('\n');
    for r in rows {
        s.push_str(&line(r));
    }
    s
}

fn strings<I: IntoIterator<Item = S>, S: Into<String>>(it: I) -> Vec<String> {
    it.into_iter().map(Into::into).collect()
}

fn heading(title: &str) -> String {
    format!("## {title}\n\n")
}

#[derive(Clone, Debug, Serialize)]
pub struct Scale {
    pub name: String,
    pub items: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Agreement {
    /// Majority codebook subscale among each factor's items.
    pub factor_subscale: Vec<Option<String>>,
    pub matched: usize,
    pub total: usize,
    pub mismatched_items: Vec<String>,
}

pub struct EfaRun {
    pub n: usize,
    pub advice: RetentionAdvice,
    pub m: usize,
    pub m_source: &'static str,
    pub solution: FactorSolution,
    pub assignment: AssignmentReport,
    pub names: Vec<String>,
    pub scores: FactorScores,
    pub agreement: Option<Agreement>,
}

pub struct ReliabilityRun {
    pub reports: Vec<ReliabilityReport>,
    pub corr: CorrMatrix,
    pub disattenuated: Option<DisattenuatedMatrix>,
}

pub struct MdsRun {
    pub items: Vec<String>,
    pub solution: MdsSolution,
    pub baseline: Option<StressBaseline>,
}

/// Loaded inputs plus lazily computed intermediate results.
pub struct Context {
    pub config: PipelineConfig,
    pub codebook: Codebook,
    pub ingested: Ingested,
    /// Responses after reverse coding.
    pub coded: ResponseMatrix,
    pool: rayon::ThreadPool,
    efa: Option<EfaRun>,
    reliability: Option<ReliabilityRun>,
    mds: Option<MdsRun>,
}

impl Context {
    pub fn load(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let responses = config.responses.clone().ok_or_else(|| Error::config("--responses is required"))?;
        let cb_path = config.codebook.clone().ok_or_else(|| Error::config("--codebook is required"))?;
        let codebook: Codebook = io::read_json(&cb_path)?;
        codebook.validate()?;
        let table = io::read_table(&responses)?;
        let opts = IngestOptions {
            dedup_key: config.dedup_key.clone(),
            id_column: config.id_column.clone(),
            disqualify: config.disqualify.clone(),
            max_missing_items: config.max_missing_items,
        };
        let ingested = dataset::ingest(&table, &codebook, &opts)?;
        let coded = dataset::reverse_code(&ingested.matrix, &codebook);
        let pool = parallel::pool(config.threads)?;
        Ok(Context { config, codebook, ingested, coded, pool, efa: None, reliability: None, mds: None })
    }

    fn id_column(&self) -> &str {
        self.config.id_column.as_deref().unwrap_or(&self.config.dedup_key)
    }

    pub fn run(&mut self, stage: &str) -> Result<StageOutput> {
        match stage {
            "ingest" => Ok(self.ingest()),
            "screen" => self.screen(),
            "efa" => self.efa_stage(),
            "reliability" => self.reliability_stage(),
            "validity" => self.validity_stage(),
            "mds" => self.mds_stage(),
            "cluster" => self.cluster_stage(),
            "compare" => self.compare_stage(),
            "regress" => self.regress_stage(),
            other => Err(Error::config(format!("unknown stage `{other}`"))),
        }
    }

    /// Whether the pipeline should run `stage` with this configuration.
    pub fn configured(&self, stage: &str) -> bool {
        match stage {
            "compare" => self.config.group_column.is_some(),
            "regress" => !self.config.regressions.is_empty(),
            _ => true,
        }
    }

    // -- ingest -------------------------------------------------------------

    fn ingest(&self) -> StageOutput {
        let r = &self.ingested.report;
        let mut s = heading("Ingestion");
        let rows = vec![
            strings(["Questionnaires received", &r.received.to_string()]),
            strings(["Malformed rows", &r.malformed.to_string()]),
            strings(["Duplicate submissions", &r.duplicates.to_string()]),
            strings(["Disqualified", &r.disqualified.to_string()]),
            strings(["Effective sample size (n)", &r.retained.to_string()]),
        ];
        s.push_str(&text_table(&strings(["Step", "Count"]), &rows));
        if !r.cell_errors.is_empty() {
            let _ = writeln!(s, "\n{} cells outside the scale were set to missing.", r.cell_errors.len());
        }
        s.push('\n');
        StageOutput::new("ingest", json!({ "report": r, "items": self.codebook.item_ids() }), s)
            .file("responses_clean.csv", io::responses_csv(&self.ingested.matrix, self.id_column()))
    }

    // -- screen -------------------------------------------------------------

    fn screen(&self) -> Result<StageOutput> {
        let desc = screening::item_descriptives(&self.coded)?;
        let fact = screening::factorability_report(&self.coded)?;
        let corr = screening::correlation_matrix(&self.coded, CorrMethod::Pearson)?;
        let mut warnings = Vec::new();
        if fact.verdict == screening::Verdict::NotFactorable {
            warnings.push("NOT_FACTORABLE".to_string());
        }
        for f in &fact.normality {
            if f.skew_flag || f.kurtosis_flag {
                warnings.push(format!("NON_NORMAL:{}", f.item));
            }
        }
        if corr.n_spread_flag {
            warnings.push("PAIRWISE_N_SPREAD".into());
        }
        let mut s = heading("Item descriptives (after reverse coding)");
        let rows: Vec<Vec<String>> = desc
            .iter()
            .map(|d| vec![d.item.clone(), d.n.to_string(), f3(d.mean), f3(d.sd), f3o(d.skew), f3o(d.kurtosis)])
            .collect();
        s.push_str(&text_table(&strings(["Item", "n", "Mean", "SD", "Skew", "Kurtosis"]), &rows));
        let _ = writeln!(s, "\nFactorability (listwise n = {}):", fact.n);
        if let Some(k) = &fact.kmo {
            let _ = writeln!(s, "  KMO = {}", f3(k.overall));
        }
        if let Some(b) = &fact.bartlett {
            let _ = writeln!(s, "  Bartlett chi2 = {}, df = {}, p = {}", f3(b.statistic), b.df[0], f3(b.p_value));
        }
        let _ = writeln!(s, "  share of |r| >= .30 = {}", f3(fact.share_of_pairs_abs_r_ge_0_3));
        let _ = writeln!(s, "  verdict: {:?}\n", fact.verdict);
        let ids = self.coded.item_ids.clone();
        Ok(StageOutput::new(
            "screen",
            json!({ "descriptives": desc, "factorability": fact, "pairwise_n": corr.pairwise_n, "warnings": warnings }),
            s,
        )
        .file("correlations.csv", io::matrix_csv("item", &ids, &ids, &corr.values)))
    }

    // -- efa ----------------------------------------------------------------

    fn ensure_efa(&mut self) -> Result<&EfaRun> {
        if self.efa.is_none() {
            self.efa = Some(self.compute_efa()?);
        }
        Ok(self.efa.as_ref().unwrap())
    }

    fn compute_efa(&self) -> Result<EfaRun> {
        let items = self.coded.item_ids.clone();
        let complete = dataset::listwise(&self.coded, &items)?.matrix;
        let corr = screening::correlation_matrix(&complete, CorrMethod::Pearson)?;
        if !corr.is_complete() {
            return Err(latentkit_core::Error::Degenerate("an item is constant among complete cases".into()).into());
        }
        let advice = efa::retention_advice(&corr.values)?;
        let (m, m_source) = match self.config.factors {
            Some(m) => (m, "override"),
            None if advice.kaiser_count <= self.config.max_factors => (advice.kaiser_count.max(1), "kaiser"),
            None => (self.config.max_factors, "cap"),
        };
        let opts = EfaOptions {
            factors: m,
            rotation: match self.config.rotation {
                RotationChoice::None => efa::Rotation::None,
                RotationChoice::Varimax => efa::Rotation::Varimax,
                RotationChoice::Promax => efa::Rotation::Promax,
            },
            kappa: self.config.kappa,
            ..EfaOptions::default()
        };
        let solution = efa::factor_analysis(&corr.values, &opts)?;
        let mut overrides = BTreeMap::new();
        for (item, &f) in &self.config.overrides {
            if f > m {
                return Err(Error::config(format!("override for `{item}` names factor {f} of {m}")));
            }
            overrides.insert(item.clone(), f - 1);
        }
        let assignment = efa::assign_items(&solution.pattern, &items, self.config.threshold, &overrides)?;
        let names: Vec<String> = (1..=m).map(|f| format!("F{f}")).collect();
        let scores = efa::factor_scores(&self.coded, &assignment, &names)?;
        let agreement = self.agreement(&assignment, m);
        Ok(EfaRun { n: complete.n(), advice, m, m_source, solution, assignment, names, scores, agreement })
    }

    fn agreement(&self, a: &AssignmentReport, m: usize) -> Option<Agreement> {
        let sub = |id: &str| self.codebook.item(id).and_then(|i| i.subscale.clone());
        if self.codebook.items.iter().all(|i| i.subscale.is_none()) {
            return None;
        }
        let factor_subscale: Vec<Option<String>> = (0..m)
            .map(|f| {
                let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                for it in a.items.iter().filter(|it| it.assigned == Some(f)) {
                    if let Some(s) = sub(&it.item) {
                        *counts.entry(s).or_default() += 1;
                    }
                }
                counts.into_iter().fold(None, |best: Option<(String, usize)>, (s, c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((s, c)),
                })
                .map(|b| b.0)
            })
            .collect();
        let mut matched = 0;
        let mut mismatched_items = Vec::new();
        for it in &a.items {
            let ok = match (it.assigned, sub(&it.item)) {
                (Some(f), Some(s)) => factor_subscale[f].as_deref() == Some(s.as_str()),
                _ => false,
            };
            if ok {
                matched += 1;
            } else {
                mismatched_items.push(it.item.clone());
            }
        }
        Some(Agreement { factor_subscale, matched, total: a.items.len(), mismatched_items })
    }

    fn efa_stage(&mut self) -> Result<StageOutput> {
        let threshold = self.config.threshold;
        let e = self.ensure_efa()?;
        let sol = &e.solution;
        let items = &e.assignment.items;
        let ids: Vec<String> = items.iter().map(|i| i.item.clone()).collect();
        let mut warnings = Vec::new();
        if !sol.converged {
            warnings.push("NOT_CONVERGED".to_string());
        }
        if sol.heywood {
            warnings.push("HEYWOOD".into());
        }
        if sol.overfactored {
            warnings.push("OVERFACTORED".into());
        }
        for it in items {
            if it.cross_loading {
                warnings.push(format!("CROSS_LOADING:{}", it.item));
            }
            if it.below_threshold {
                warnings.push(format!("BELOW_THRESHOLD:{}", it.item));
            }
        }
        for f in &e.scores.empty_factors {
            warnings.push(format!("EMPTY_FACTOR:{}", e.names[*f]));
        }

        let mut s = heading("Exploratory factor analysis");
        let _ = writeln!(
            s,
            "Listwise n = {}. Kaiser criterion suggests {} factor(s); {} retained ({}).\n",
            e.n, e.advice.kaiser_count, e.m, e.m_source
        );
        s.push_str("Initial and extracted communalities\n");
        let rows: Vec<Vec<String>> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| vec![id.clone(), f3(sol.communalities_initial[i]), f3(sol.communalities[i])])
            .collect();
        s.push_str(&text_table(&strings(["Item", "Initial", "Extraction"]), &rows));
        s.push_str("\nPercentage of variance explained\n");
        let mut cum_ext = 0.0;
        let p = ids.len() as f64;
        let rows: Vec<Vec<String>> = (0..e.m)
            .map(|f| {
                let ext = 100.0 * sol.ss_loadings[f] / p;
                cum_ext += ext;
                vec![
                    (f + 1).to_string(),
                    f3(e.advice.scree_full[f]),
                    f3(e.advice.percent_of_variance[f]),
                    f3(e.advice.cumulative_percent[f]),
                    f3(sol.ss_loadings[f]),
                    f3(ext),
                    f3(cum_ext),
                    f3(sol.variance.percent_total[f]),
                ]
            })
            .collect();
        s.push_str(&text_table(
            &strings(["Factor", "Eigen", "% Var", "Cum %", "Extr SS", "% Var", "Cum %", "Rotated %"]),
            &rows,
        ));
        let _ = writeln!(
            s,
            "Rotated factors explain {}% of total variance.\n\nPattern matrix (|coefficient| >= {})",
            f3(sol.variance.total_percent),
            threshold
        );
        let mut header = vec!["Item".to_string()];
        header.extend(e.names.iter().cloned());
        header.push("h2".into());
        let rows: Vec<Vec<String>> = (0..ids.len())
            .map(|i| {
                let mut r = vec![ids[i].clone()];
                r.extend((0..e.m).map(|f| {
                    let v = sol.pattern[(i, f)];
                    if v.abs() >= threshold { f3(v) } else { String::new() }
                }));
                r.push(f3(sol.communalities[i]));
                r
            })
            .collect();
        s.push_str(&text_table(&header, &rows));
        if let Some(a) = &e.agreement {
            let _ = writeln!(s, "\nAssignments agreeing with codebook subscales: {}/{}", a.matched, a.total);
        }
        if !warnings.is_empty() {
            let _ = writeln!(s, "\nWarnings: {}", warnings.join(", "));
        }
        s.push('\n');

        let mut scree = CsvDoc::new(&["factor", "eigen_full", "eigen_reduced", "percent_of_variance", "cumulative_percent"]);
        for (f, v) in e.advice.scree_full.iter().enumerate() {
            scree.row(&[
                (f + 1).to_string(),
                num(*v),
                num(e.advice.scree_reduced[f]),
                num(e.advice.percent_of_variance[f]),
                num(e.advice.cumulative_percent[f]),
            ]);
        }
        let mut pattern = CsvDoc::new(&{
            let mut h = vec!["item".to_string()];
            h.extend(e.names.iter().cloned());
            h.extend(strings(["communality", "assigned"]));
            h
        });
        for (i, it) in items.iter().enumerate() {
            let mut r = vec![it.item.clone()];
            r.extend((0..e.m).map(|f| num(sol.pattern[(i, f)])));
            r.push(num(sol.communalities[i]));
            r.push(it.assigned.map_or_else(String::new, |f| e.names[f].clone()));
            pattern.row(&r);
        }
        let report = json!({
            "n": e.n,
            "retention": e.advice,
            "m": e.m,
            "m_source": e.m_source,
            "factor_names": e.names,
            "solution": sol,
            "assignment": e.assignment,
            "codebook_agreement": e.agreement,
            "empty_factors": e.scores.empty_factors,
            "warnings": warnings,
        });
        Ok(StageOutput::new("efa", report, s)
            .file("scree.csv", scree.into_bytes())
            .file("scree.svg", svg::scree(&e.advice.scree_full, &e.advice.scree_reduced).into_bytes())
            .file("efa_pattern.csv", pattern.into_bytes())
            .file("efa_structure.csv", io::matrix_csv("item", &ids, &e.names, &sol.structure))
            .file("efa_phi.csv", io::matrix_csv("factor", &e.names, &e.names, &sol.phi))
            .file("factor_scores.csv", io::scores_csv(&e.scores.scores)))
    }

    // -- scales and scores --------------------------------------------------

    fn scale_source(&self) -> ScaleSource {
        match self.config.scales {
            ScaleSource::Auto if self.codebook.items.iter().any(|i| i.subscale.is_some()) => ScaleSource::Codebook,
            ScaleSource::Auto => ScaleSource::Efa,
            s => s,
        }
    }

    pub fn scales(&mut self) -> Result<Vec<Scale>> {
        match self.scale_source() {
            ScaleSource::Codebook => {
                let groups = self.codebook.subscale_groups();
                if groups.is_empty() {
                    return Err(Error::config("--scales codebook but the codebook defines no subscales"));
                }
                Ok(groups.into_iter().map(|(name, items)| Scale { name, items }).collect())
            }
            _ => {
                let e = self.ensure_efa()?;
                Ok(e.assignment
                    .members(e.m)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, items)| !items.is_empty())
                    .map(|(f, items)| Scale { name: e.names[f].clone(), items })
                    .collect())
            }
        }
    }

    /// Scale scores plus the composite, if one is configured.
    pub fn scores(&mut self) -> Result<ScoreTable> {
        let groups: Vec<(String, Vec<String>)> = self.scales()?.into_iter().map(|s| (s.name, s.items)).collect();
        let mut t = dataset::score_groups(&self.coded, &groups, self.config.aggregation)?;
        if let Some(c) = &self.config.composite {
            if t.column(&c.name).is_some() {
                return Err(Error::config(format!("composite `{}` clashes with a scale name", c.name)));
            }
            t = t.merge(dataset::composite_score(&self.coded, &c.name, &c.items)?)?;
        }
        Ok(t)
    }

    // -- reliability --------------------------------------------------------

    fn ensure_reliability(&mut self) -> Result<&ReliabilityRun> {
        if self.reliability.is_none() {
            let scales = self.scales()?;
            let mut reports = Vec::new();
            for sc in &scales {
                let complete = dataset::listwise(&self.coded, &sc.items)?.matrix.select_items(&sc.items)?;
                reports.push(reliability::reliability_report(&sc.name, &sc.items, &complete.complete_columns())?);
            }
            let groups: Vec<(String, Vec<String>)> = scales.iter().map(|s| (s.name.clone(), s.items.clone())).collect();
            let t = dataset::score_groups(&self.coded, &groups, self.config.aggregation)?;
            let cols: Vec<Vec<Option<f64>>> = t.columns.iter().map(|c| c.values.clone()).collect();
            let corr = screening::correlation_from_columns(t.names(), &cols, CorrMethod::Pearson)?;
            let alphas: Vec<f64> = reports.iter().map(|r| r.alpha).collect();
            let disattenuated = if corr.is_complete() && alphas.iter().all(|a| *a > 0.0 && *a <= 1.0) {
                Some(reliability::disattenuated_matrix(&corr, &alphas)?)
            } else {
                None
            };
            self.reliability = Some(ReliabilityRun { reports, corr, disattenuated });
        }
        Ok(self.reliability.as_ref().unwrap())
    }

    fn reliability_stage(&mut self) -> Result<StageOutput> {
        let scores = self.scores()?;
        let r = self.ensure_reliability()?;
        let mut warnings = Vec::new();
        for rep in &r.reports {
            for it in rep.items.iter().filter(|i| i.low_item_total) {
                warnings.push(format!("LOW_ITEM_TOTAL:{}:{}", rep.scale, it.item));
            }
        }
        if r.disattenuated.is_none() {
            warnings.push("NO_DISATTENUATION".into());
        }
        if let Some(d) = &r.disattenuated {
            for (i, j) in &d.overcorrected {
                warnings.push(format!("OVERCORRECTED:{}:{}", d.labels[*i], d.labels[*j]));
            }
        }
        let descriptives: Vec<Value> = scores
            .columns
            .iter()
            .map(|c| {
                let v: Vec<f64> = c.values.iter().flatten().copied().collect();
                json!({
                    "scale": c.name,
                    "items": c.items.len(),
                    "n": v.len(),
                    "mean": stats::mean(&v),
                    "sd": stats::std_dev(&v),
                    "min": v.iter().copied().fold(f64::INFINITY, f64::min),
                    "max": v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                })
            })
            .collect();

        let mut s = heading("Scale descriptives and reliability");
        let rows: Vec<Vec<String>> = scores
            .columns
            .iter()
            .map(|c| {
                let v: Vec<f64> = c.values.iter().flatten().copied().collect();
                let alpha = r.reports.iter().find(|x| x.scale == c.name).map(|x| x.alpha);
                vec![c.name.clone(), c.items.len().to_string(), v.len().to_string(), f3(stats::mean(&v)), f3(stats::std_dev(&v)), f3o(alpha)]
            })
            .collect();
        s.push_str(&text_table(&strings(["Scale", "Items", "n", "Mean", "SD", "Alpha"]), &rows));
        for rep in &r.reports {
            let _ = writeln!(s, "\n{}: alpha = {}, standardized = {}, n = {}", rep.scale, f3(rep.alpha), f3o(rep.standardized_alpha), rep.n);
            let rows: Vec<Vec<String>> = rep
                .items
                .iter()
                .map(|i| vec![i.item.clone(), f3o(i.corrected_item_total), f3o(i.alpha_if_deleted)])
                .collect();
            s.push_str(&text_table(&strings(["Item", "Item-total r", "Alpha if deleted"]), &rows));
        }
        let labels = r.corr.labels.clone();
        let matrix_bytes = match &r.disattenuated {
            Some(d) => {
                s.push_str("\nAlphas (diagonal), observed (below) and corrected (above) correlations\n");
                s.push_str(&matrix_text(&labels, &d.values));
                io::matrix_csv("layout=diagonal:alpha;lower:observed;upper:corrected", &labels, &labels, &d.values)
            }
            None => io::matrix_csv("layout=observed", &labels, &labels, &r.corr.values),
        };
        if !warnings.is_empty() {
            let _ = writeln!(s, "\nWarnings: {}", warnings.join(", "));
        }
        s.push('\n');
        let report = json!({
            "scales": r.reports,
            "descriptives": descriptives,
            "score_correlations": r.corr,
            "disattenuated": r.disattenuated,
            "warnings": warnings,
        });
        Ok(StageOutput::new("reliability", report, s)
            .file("reliability_matrix.csv", matrix_bytes)
            .file("scale_scores.csv", io::scores_csv(&scores)))
    }

    // -- validity -----------------------------------------------------------

    fn validity_stage(&mut self) -> Result<StageOutput> {
        let scales = self.scales()?;
        let scores = self.scores()?;
        let (alphas, corr) = {
            let r = self.ensure_reliability()?;
            (r.reports.iter().map(|x| x.alpha).collect::<Vec<f64>>(), r.corr.clone())
        };
        let e = self.ensure_efa()?;
        let pattern = &e.solution.pattern;
        let item_row = |id: &str| e.assignment.items.iter().position(|i| i.item == id);
        // each scale is measured by the factor carrying most of its items' variance
        let mut aves = Vec::new();
        let mut ave_rows = Vec::new();
        for sc in &scales {
            let rows: Vec<usize> = sc.items.iter().filter_map(|i| item_row(i)).collect();
            let factor = (0..e.m)
                .max_by(|&a, &b| {
                    let ss = |f: usize| rows.iter().map(|&i| pattern[(i, f)].powi(2)).sum::<f64>();
                    ss(a).total_cmp(&ss(b)).then(b.cmp(&a))
                })
                .unwrap_or(0);
            let loadings: Vec<f64> = rows.iter().map(|&i| pattern[(i, factor)]).collect();
            let a = validity::ave(&loadings)?;
            ave_rows.push(json!({ "scale": sc.name, "factor": e.names[factor], "ave": a.value, "out_of_range": a.out_of_range }));
            aves.push(a.value);
        }
        let mut warnings = Vec::new();
        let fl: Option<FornellLarckerMatrix> = if corr.is_complete() && alphas.iter().all(|a| *a > 0.0 && *a <= 1.0) {
            Some(validity::fornell_larcker(&aves, &corr, &alphas)?)
        } else {
            warnings.push("NO_FORNELL_LARCKER".to_string());
            None
        };

        let mut known: Option<(dataset::QuartileSplit, KnownGroupsReport)> = None;
        if let Some(crit) = &self.config.criterion {
            let col = scores.column(crit).ok_or_else(|| Error::config(format!("criterion `{crit}` is not a score column")))?;
            let split = dataset::quartile_classify(&scores.respondent_ids, &col.values)?;
            if split.degenerate_split {
                warnings.push("DEGENERATE_SPLIT".to_string());
            }
            let others = ScoreTable {
                respondent_ids: scores.respondent_ids.clone(),
                columns: scores.columns.iter().filter(|c| &c.name != crit).cloned().collect(),
            };
            let kg = validity::known_groups(&others, &split.labels, self.config.direction, self.config.alpha)?;
            known = Some((split, kg));
        }
        if let Some(f) = &fl {
            for p in &f.pairs {
                if p.observed == validity::CellVerdict::Fail {
                    warnings.push(format!("NOT_DISCRIMINANT:{}:{}", f.labels[p.i], f.labels[p.j]));
                }
            }
        }

        let mut s = heading("Construct validity");
        let rows: Vec<Vec<String>> = scales
            .iter()
            .zip(&ave_rows)
            .map(|(sc, r)| vec![sc.name.clone(), r["factor"].as_str().unwrap_or("").to_string(), f3(r["ave"].as_f64().unwrap_or(f64::NAN))])
            .collect();
        s.push_str(&text_table(&strings(["Scale", "Factor", "AVE"]), &rows));
        let mut fl_bytes = None;
        if let Some(f) = &fl {
            s.push_str("\nDiscriminant validity: AVE (diagonal), squared observed (below) and corrected (above) correlations\n");
            s.push_str(&matrix_text(&f.labels, &f.values));
            let rows: Vec<Vec<String>> = f
                .pairs
                .iter()
                .map(|p| {
                    vec![
                        format!("{} / {}", f.labels[p.i], f.labels[p.j]),
                        format!("{:?}", p.observed).to_uppercase(),
                        format!("{:?}", p.corrected).to_uppercase(),
                    ]
                })
                .collect();
            s.push('\n');
            s.push_str(&text_table(&strings(["Pair", "Observed", "Corrected"]), &rows));
            fl_bytes = Some(io::matrix_csv(
                "layout=diagonal:ave;lower:observed_r2;upper:corrected_r2",
                &f.labels,
                &f.labels,
                &f.values,
            ));
        }
        if let Some((split, kg)) = &known {
            let _ = writeln!(
                s,
                "\nKnown groups on `{}`: Q1 = {}, Q3 = {}, LOW n = {}, HIGH n = {}",
                self.config.criterion.as_deref().unwrap_or_default(),
                f3(split.q1),
                f3(split.q3),
                split.count(Group::Low),
                split.count(Group::High)
            );
            let rows: Vec<Vec<String>> = kg
                .scales
                .iter()
                .map(|c| {
                    vec![
                        c.scale.clone(),
                        format!("{} ({})", f3(c.low.mean), f3(c.low.sd)),
                        format!("{} ({})", f3(c.high.mean), f3(c.high.sd)),
                        f3(c.t_test.statistic),
                        f3(c.t_test.p_value),
                        f3(c.mann_whitney.p_value),
                        serde_json::to_value(c.verdict).unwrap().as_str().unwrap_or("").to_string(),
                    ]
                })
                .collect();
            s.push_str(&text_table(&strings(["Scale", "LOW M (SD)", "HIGH M (SD)", "t", "p", "MW p", "Verdict"]), &rows));
        }
        if !warnings.is_empty() {
            let _ = writeln!(s, "\nWarnings: {}", warnings.join(", "));
        }
        s.push('\n');
        let report = json!({
            "ave": ave_rows,
            "fornell_larcker": fl,
            "quartiles": known.as_ref().map(|k| json!({ "q1": k.0.q1, "q3": k.0.q3, "degenerate_split": k.0.degenerate_split, "labels": k.0.labels })),
            "known_groups": known.as_ref().map(|k| &k.1),
            "warnings": warnings,
        });
        let mut out = StageOutput::new("validity", report, s);
        if let Some(b) = fl_bytes {
            out = out.file("fornell_larcker.csv", b);
        }
        Ok(out)
    }

    // -- mds ----------------------------------------------------------------

    fn mds_items(&self) -> Result<Vec<String>> {
        if let Some(items) = &self.config.mds.items {
            return Ok(items.clone());
        }
        if let Some(scale) = &self.config.mds.scale {
            let groups = self.codebook.subscale_groups();
            return groups
                .into_iter()
                .find(|(s, _)| s == scale)
                .map(|(_, items)| items)
                .ok_or_else(|| Error::config(format!("MDS scale `{scale}` is not a codebook subscale")));
        }
        Ok(self.codebook.item_ids())
    }

    fn ensure_mds(&mut self) -> Result<&MdsRun> {
        if self.mds.is_none() {
            let c = &self.config.mds;
            let items = self.mds_items()?;
            let complete = dataset::listwise(&self.coded, &items)?.matrix.select_items(&items)?;
            let corr = screening::correlation_matrix(&complete, c.correlation)?;
            let mut delta = mds::corr_to_dissimilarity(&corr, DissimilarityTransform::OneMinusR)?;
            delta.source = match c.correlation {
                CorrMethod::Pearson => Source::Pearson,
                CorrMethod::Spearman => Source::Spearman,
                CorrMethod::KendallTauB => Source::Kendall,
            };
            let opts = MdsOptions {
                k: c.dims,
                transform: c.transform,
                seed: self.config.seed,
                restarts: c.restarts,
                tol: c.tol,
                max_iter: c.max_iter,
            };
            let solution = parallel::mds(&self.pool, &delta, &opts)?;
            let baseline = if c.baseline_trials > 0 {
                Some(parallel::stress_baseline(&self.pool, items.len(), c.baseline_trials, self.config.seed, &opts)?)
            } else {
                None
            };
            self.mds = Some(MdsRun { items, solution, baseline });
        }
        Ok(self.mds.as_ref().unwrap())
    }

    /// Number of clusters for the MDS loops: the flag, else the number of
    /// codebook subscales among the scaled items.
    fn cluster_count(&self, items: &[String]) -> Option<usize> {
        let k = self.config.clusters.or_else(|| {
            let mut subs: Vec<&str> =
                items.iter().filter_map(|i| self.codebook.item(i).and_then(|s| s.subscale.as_deref())).collect();
            subs.sort();
            subs.dedup();
            (!subs.is_empty()).then_some(subs.len())
        })?;
        Some(k.min(items.len()))
    }

    fn clustering(&mut self) -> Result<(Dendrogram, Option<usize>, Option<Vec<usize>>)> {
        let linkage = self.config.linkage;
        let run = self.ensure_mds()?;
        let conf = run.solution.configuration.clone();
        let items = run.items.clone();
        let tree = cluster::agglomerate(&cluster::squared_euclidean(&conf), linkage)?;
        let k = self.cluster_count(&items);
        let labels = k.map(|k| cluster::cut(&tree, k)).transpose()?;
        Ok((tree, k, labels))
    }

    fn mds_stage(&mut self) -> Result<StageOutput> {
        let (_, k_clusters, labels) = self.clustering()?;
        let c = self.config.mds.clone();
        let run = self.ensure_mds()?;
        let sol = &run.solution;
        let mut warnings = Vec::new();
        if sol.stability_warning {
            warnings.push("STABILITY_WARNING".to_string());
        }
        if sol.degenerate {
            warnings.push("DEGENERATE".into());
        }
        if !sol.converged {
            warnings.push("NOT_CONVERGED".into());
        }
        if sol.init_fallback {
            warnings.push("INIT_FALLBACK".into());
        }
        let ratio = run.baseline.as_ref().map(|b| sol.stress1 / b.mean);
        if ratio.is_some_and(|r| !(r < 0.5)) {
            warnings.push("STRESS_NOT_BELOW_HALF_BASELINE".into());
        }
        let mut s = heading("Multidimensional scaling");
        let _ = writeln!(
            s,
            "{} items, {} dimension(s), {:?} transform of 1 - r ({:?}).",
            run.items.len(),
            sol.k,
            sol.transform,
            c.correlation
        );
        let _ = writeln!(s, "Stress-1 = {}, RSQ = {}, best of {} starts.", f3(sol.stress1), f3o(sol.rsq), sol.restarts_used);
        if let Some(b) = &run.baseline {
            let _ = writeln!(s, "Random baseline ({} trials): mean stress {}, 5th percentile {}.", b.trials, f3(b.mean), f3(b.p05));
        }
        let mut header = vec!["Item".to_string()];
        header.extend((1..=sol.k).map(|d| format!("Dim {d}")));
        let rows: Vec<Vec<String>> = run
            .items
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let mut r = vec![id.clone()];
                r.extend((0..sol.k).map(|d| f3(sol.configuration[(i, d)])));
                r
            })
            .collect();
        s.push('\n');
        s.push_str(&text_table(&header, &rows));
        if !warnings.is_empty() {
            let _ = writeln!(s, "\nWarnings: {}", warnings.join(", "));
        }
        s.push('\n');

        let mut csv_header = vec!["item".to_string()];
        csv_header.extend((1..=sol.k).map(|d| format!("dim{d}")));
        csv_header.push("cluster".into());
        let mut conf = CsvDoc::new(&csv_header);
        for (i, id) in run.items.iter().enumerate() {
            let mut r = vec![id.clone()];
            r.extend((0..sol.k).map(|d| num(sol.configuration[(i, d)])));
            r.push(labels.as_ref().map_or_else(String::new, |l| (l[i] + 1).to_string()));
            conf.row(&r);
        }
        let map = svg::mds_map(&run.items, &sol.configuration, labels.as_deref(), "MDS configuration");
        let report = json!({
            "items": run.items,
            "correlation": c.correlation,
            "solution": sol,
            "baseline": run.baseline,
            "stress_to_baseline": ratio,
            "clusters": k_clusters,
            "cluster_labels": labels,
            "warnings": warnings,
        });
        Ok(StageOutput::new("mds", report, s)
            .file("mds_configuration.csv", conf.into_bytes())
            .file("mds_map.svg", map.into_bytes()))
    }

    // -- cluster ------------------------------------------------------------

    fn cluster_stage(&mut self) -> Result<StageOutput> {
        let (tree, k, labels) = self.clustering()?;
        let items = self.ensure_mds()?.items.clone();
        let mut s = heading("Hierarchical clustering of the MDS configuration");
        let _ = writeln!(s, "{:?} linkage on squared Euclidean distances.", tree.linkage);
        let rows: Vec<Vec<String>> = tree
            .merges
            .iter()
            .enumerate()
            .map(|(st, m)| {
                let name = |id: usize| if id < items.len() { items[id].clone() } else { format!("#{}", id) };
                vec![(st + 1).to_string(), name(m.a), name(m.b), f3(m.height), m.new_id.to_string(), m.size.to_string()]
            })
            .collect();
        s.push_str(&text_table(&strings(["Step", "A", "B", "Height", "New id", "Size"]), &rows));
        let mut csv = CsvDoc::new(&["item", "cluster"]);
        if let (Some(k), Some(l)) = (k, &labels) {
            let _ = writeln!(s, "\nCut at {k} cluster(s):");
            for c in 0..k {
                let members: Vec<&str> = items.iter().zip(l).filter(|(_, x)| **x == c).map(|(i, _)| i.as_str()).collect();
                let _ = writeln!(s, "  {}: {}", c + 1, members.join(", "));
            }
            for (i, id) in items.iter().enumerate() {
                csv.row(&[id.clone(), (l[i] + 1).to_string()]);
            }
        }
        s.push('\n');
        let svg = svg::dendrogram(&tree, &items, "Dendrogram");
        let report = json!({ "items": items, "dendrogram": tree, "k": k, "labels": labels });
        Ok(StageOutput::new("cluster", report, s)
            .file("clusters.csv", csv.into_bytes())
            .file("dendrogram.svg", svg.into_bytes()))
    }

    // -- compare ------------------------------------------------------------

    fn compare_stage(&mut self) -> Result<StageOutput> {
        let column = self.config.group_column.clone().ok_or_else(|| Error::config("compare needs --group-column"))?;
        let groups = dataset::group_by_column(&self.ingested.metadata, &column)?;
        let scores = self.scores()?;
        let mut warnings = Vec::new();
        let mut results = Vec::new();
        let mut posthoc_csv = CsvDoc::new(&[
            "scale",
            "group_a",
            "group_b",
            "mean_difference",
            "std_error",
            "t",
            "df",
            "p_lsd",
            "p_bonferroni",
        ]);
        let mut s = heading(&format!("Group comparisons by `{column}`"));
        for col in &scores.columns {
            let mut names = Vec::new();
            let mut samples = Vec::new();
            for (g, rows) in &groups {
                let v: Vec<f64> = rows.iter().filter_map(|&i| col.values[i]).collect();
                if v.len() >= 2 {
                    names.push(g.clone());
                    samples.push(v);
                } else {
                    warnings.push(format!("SMALL_GROUP:{}:{g}", col.name));
                }
            }
            if samples.len() < 2 {
                warnings.push(format!("TOO_FEW_GROUPS:{}", col.name));
                continue;
            }
            let desc: Vec<Value> = names
                .iter()
                .zip(&samples)
                .map(|(g, v)| {
                    let ci = inference::ci_mean(v, 0.95).ok();
                    json!({ "group": g, "n": v.len(), "mean": stats::mean(v), "sd": stats::std_dev(v), "ci95": ci })
                })
                .collect();
            let levene = inference::levene(&samples).ok();
            let anova = inference::one_way_anova(&samples)?;
            let kruskal = inference::kruskal_wallis(&samples).ok();
            let lsd = inference::posthoc(&samples, PostHoc::Lsd)?;
            let bonf = inference::posthoc(&samples, PostHoc::Bonferroni)?;
            let two = if samples.len() == 2 {
                let mode = if samples[0].len() + samples[1].len() <= inference::MW_EXACT_MAX { MwMode::Exact } else { MwMode::NormalApprox };
                Some(json!({
                    "student": inference::t_test(&samples[0], &samples[1], TVariant::Student, Tails::TwoSided).ok(),
                    "welch": inference::t_test(&samples[0], &samples[1], TVariant::Welch, Tails::TwoSided).ok(),
                    "mann_whitney": inference::mann_whitney(&samples[0], &samples[1], mode, Tails::TwoSided).ok(),
                }))
            } else {
                None
            };
            for (a, b) in lsd.iter().zip(&bonf) {
                posthoc_csv.row(&[
                    col.name.clone(),
                    names[a.group_a].clone(),
                    names[a.group_b].clone(),
                    num(a.mean_difference),
                    num(a.std_error),
                    num(a.t),
                    num(a.df),
                    num(a.p_raw),
                    num(b.p_adjusted),
                ]);
            }
            let _ = writeln!(
                s,
                "{}: F({}, {}) = {}, p = {}; Kruskal-Wallis p = {}; Levene p = {}",
                col.name,
                anova.df[0],
                anova.df[1],
                f3(anova.statistic),
                f3(anova.p_value),
                f3o(kruskal.as_ref().map(|k| k.p_value)),
                f3o(levene.as_ref().map(|l| l.p_value))
            );
            let rows: Vec<Vec<String>> = names
                .iter()
                .zip(&samples)
                .map(|(g, v)| vec![g.clone(), v.len().to_string(), f3(stats::mean(v)), f3(stats::std_dev(v))])
                .collect();
            s.push_str(&text_table(&strings(["Group", "n", "Mean", "SD"]), &rows));
            let rows: Vec<Vec<String>> = lsd
                .iter()
                .zip(&bonf)
                .map(|(a, b)| {
                    vec![
                        format!("{} - {}", names[a.group_a], names[a.group_b]),
                        f3(a.mean_difference),
                        f3(a.std_error),
                        f3(a.p_raw),
                        f3(b.p_adjusted),
                    ]
                })
                .collect();
            s.push_str(&text_table(&strings(["Pair", "Mean diff", "SE", "p (LSD)", "p (Bonf.)"]), &rows));
            s.push('\n');
            results.push(json!({
                "scale": col.name,
                "groups": desc,
                "levene": levene,
                "anova": anova,
                "kruskal_wallis": kruskal,
                "posthoc_lsd": lsd,
                "posthoc_bonferroni": bonf,
                "two_groups": two,
            }));
        }
        if !warnings.is_empty() {
            let _ = writeln!(s, "Warnings: {}\n", warnings.join(", "));
        }
        let report = json!({ "group_column": column, "groups": groups.keys().collect::<Vec<_>>(), "scales": results, "warnings": warnings });
        Ok(StageOutput::new("compare", report, s).file("posthoc.csv", posthoc_csv.into_bytes()))
    }

    // -- regress ------------------------------------------------------------

    fn variable(&self, scores: &ScoreTable, name: &str) -> Result<Vec<Option<f64>>> {
        if let Some(c) = scores.column(name) {
            return Ok(c.values.clone());
        }
        let col = self
            .ingested
            .metadata
            .column(name)
            .ok_or_else(|| Error::config(format!("`{name}` is neither a score nor a data column")))?;
        Ok(col
            .into_iter()
            .map(|v| if dataset::is_missing_token(v) { None } else { v.trim().parse().ok() })
            .collect())
    }

    fn regress_stage(&mut self) -> Result<StageOutput> {
        if self.config.regressions.is_empty() {
            return Err(Error::config("regress needs at least one --regress \"y ~ x1 + x2\""));
        }
        let scores = self.scores()?;
        let specs = self.config.regressions.clone();
        let mut out = Vec::new();
        let mut csv = CsvDoc::new(&["model", "term", "b", "std_error", "beta", "t", "p_value"]);
        let mut s = heading("Regression");
        for (mi, spec) in specs.iter().enumerate() {
            let y = self.variable(&scores, &spec.outcome)?;
            let xs: Vec<Vec<Option<f64>>> = spec.predictors.iter().map(|p| self.variable(&scores, p)).collect::<Result<_>>()?;
            let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i].is_some() && xs.iter().all(|x| x[i].is_some())).collect();
            let yv: Vec<f64> = rows.iter().map(|&i| y[i].unwrap()).collect();
            let xm = Matrix::from_fn(rows.len(), xs.len(), |r, j| xs[j][rows[r]].unwrap());
            let fit = inference::ols(&yv, &xm, &spec.predictors, true)?;
            let correlations: Vec<Value> = spec
                .predictors
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    let r = inference::correlate(&xm.column(j), &yv, CorrelationKind::Pearson, Tails::TwoSided).ok();
                    json!({ "predictor": p, "test": r })
                })
                .collect();
            let model = format!("{} ~ {}", spec.outcome, spec.predictors.join(" + "));
            let _ = writeln!(
                s,
                "Model {}: {model} (n = {})\nR2 = {}, adjusted R2 = {}, F({}, {}) = {}, p = {}",
                mi + 1,
                fit.n,
                f3(fit.r_squared),
                f3(fit.adj_r_squared),
                fit.df[0],
                fit.df[1],
                f3(fit.f),
                f3(fit.p_value)
            );
            let trows: Vec<Vec<String>> = fit
                .coefficients
                .iter()
                .map(|c| vec![c.name.clone(), f3(c.b), f3(c.std_error), f3o(c.beta), f3(c.t), f3(c.p_value)])
                .collect();
            s.push_str(&text_table(&strings(["Term", "B", "SE", "Beta", "t", "p"]), &trows));
            s.push('\n');
            for c in &fit.coefficients {
                csv.row(&[model.clone(), c.name.clone(), num(c.b), num(c.std_error), opt_num(c.beta), num(c.t), num(c.p_value)]);
            }
            out.push(json!({ "model": model, "spec": spec, "fit": fit, "correlations": correlations }));
        }
        Ok(StageOutput::new("regress", json!({ "models": out }), s).file("regression.csv", csv.into_bytes()))
    }
}

fn matrix_text(labels: &[String], m: &Matrix) -> String {
    let mut header = vec![String::new()];
    header.extend((1..=labels.len()).map(|i| i.to_string()));
    let rows: Vec<Vec<String>> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut r = vec![format!("{}. {l}", i + 1)];
            r.extend((0..m.ncols()).map(|j| f3(m[(i, j)])));
            r
        })
        .collect();
    text_table(&header, &rows)
}
