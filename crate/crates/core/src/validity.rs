//! Construct validity: average variance extracted, the Fornell–Larcker
//! discriminant comparison and known-groups contrasts.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Group, GroupLabel, ScoreTable};
use crate::efa::{AssignmentReport, FactorSolution};
use crate::inference::{self, MwMode, TVariant, Tails, TestResult};
use crate::linalg::Matrix;
use crate::reliability;
use crate::screening::CorrMatrix;
use crate::stats;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ave {
    pub value: f64,
    /// Some loading exceeded one in magnitude.
    pub out_of_range: bool,
}

/// Mean of squared loadings.
pub fn ave(loadings: &[f64]) -> Result<Ave> {
    if loadings.is_empty() {
        return Err(Error::config("AVE needs at least one loading"));
    }
    Ok(Ave {
        value: loadings.iter().map(|l| l * l).sum::<f64>() / loadings.len() as f64,
        out_of_range: loadings.iter().any(|l| l.abs() > 1.0),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadingBasis {
    #[default]
    Pattern,
    Structure,
}

/// AVE per factor over the items assigned to it.
pub fn ave_from_solution(
    solution: &FactorSolution,
    assignment: &AssignmentReport,
    basis: LoadingBasis,
) -> Result<Vec<Ave>> {
    let l = match basis {
        LoadingBasis::Pattern => &solution.pattern,
        LoadingBasis::Structure => &solution.structure,
    };
    (0..solution.m)
        .map(|f| {
            let vals: Vec<f64> = assignment
                .items
                .iter()
                .enumerate()
                .filter(|(_, a)| a.assigned == Some(f))
                .map(|(i, _)| l[(i, f)])
                .collect();
            ave(&vals)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CellVerdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub i: usize,
    pub j: usize,
    pub observed_r2: f64,
    pub corrected_r2: f64,
    pub observed: CellVerdict,
    pub corrected: CellVerdict,
}

/// AVE on the diagonal, squared observed correlations below it and squared
/// corrected correlations above it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FornellLarckerMatrix {
    pub labels: Vec<String>,
    pub values: Matrix,
    pub pairs: Vec<PairVerdict>,
}

impl FornellLarckerMatrix {
    pub fn pair(&self, i: usize, j: usize) -> Option<&PairVerdict> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs.iter().find(|p| p.i == a && p.j == b)
    }
}

/// A comparison passes when both constructs' AVE exceed the squared
/// correlation between them.
pub fn fornell_larcker(ave: &[f64], corr: &CorrMatrix, alphas: &[f64]) -> Result<FornellLarckerMatrix> {
    let m = corr.p();
    if ave.len() != m {
        return Err(Error::Dimension(format!("{} AVE values for {m} scales", ave.len())));
    }
    let d = reliability::disattenuated_matrix(corr, alphas)?;
    let mut values = Matrix::zeros(m, m);
    let mut pairs = Vec::new();
    let verdict = |floor: f64, r2: f64| if floor > r2 { CellVerdict::Pass } else { CellVerdict::Fail };
    for i in 0..m {
        values[(i, i)] = ave[i];
        for j in (i + 1)..m {
            let obs = d.observed(i, j);
            let cor = d.corrected(i, j);
            let (o2, c2) = (obs * obs, cor * cor);
            values[(j, i)] = o2;
            values[(i, j)] = c2;
            let floor = ave[i].min(ave[j]);
            pairs.push(PairVerdict {
                i,
                j,
                observed_r2: o2,
                corrected_r2: c2,
                observed: verdict(floor, o2),
                corrected: verdict(floor, c2),
            });
        }
    }
    Ok(FornellLarckerMatrix { labels: corr.labels.clone(), values, pairs })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The HIGH group is expected to score higher.
    #[default]
    HighAbove,
    HighBelow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GroupVerdict {
    Confirmed,
    NotDistinguished,
    Contradicted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleComparison {
    pub scale: String,
    pub high: GroupStats,
    pub low: GroupStats,
    /// Student t of HIGH minus LOW.
    pub t_test: TestResult,
    pub mann_whitney: TestResult,
    pub verdict: GroupVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownGroupsReport {
    pub direction: Direction,
    pub alpha: f64,
    pub scales: Vec<ScaleComparison>,
}

fn group_stats(x: &[f64]) -> GroupStats {
    GroupStats { n: x.len(), mean: stats::mean(x), sd: stats::std_dev(x) }
}

/// Compare HIGH against LOW respondents on every score column. The verdict
/// follows the two-sided t test at `alpha` and the sign of the difference.
pub fn known_groups(
    scores: &ScoreTable,
    labels: &[GroupLabel],
    direction: Direction,
    alpha: f64,
) -> Result<KnownGroupsReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!("significance level {alpha} not in (0, 1)")));
    }
    let by_id: BTreeMap<&str, Group> = labels.iter().map(|l| (l.respondent_id.as_str(), l.group)).collect();
    let mut out = Vec::new();
    for col in &scores.columns {
        let (mut high, mut low) = (Vec::new(), Vec::new());
        for (id, v) in scores.respondent_ids.iter().zip(&col.values) {
            match (by_id.get(id.as_str()), v) {
                (Some(Group::High), Some(v)) => high.push(*v),
                (Some(Group::Low), Some(v)) => low.push(*v),
                _ => {}
            }
        }
        if high.len() < 2 || low.len() < 2 {
            return Err(Error::insufficient(format!(
                "`{}`: HIGH n = {}, LOW n = {}; both need at least 2",
                col.name,
                high.len(),
                low.len()
            )));
        }
        let t = inference::t_test(&high, &low, TVariant::Student, Tails::TwoSided)?;
        let mode = if high.len() + low.len() <= inference::MW_EXACT_MAX { MwMode::Exact } else { MwMode::NormalApprox };
        let mw = inference::mann_whitney(&high, &low, mode, Tails::TwoSided)?;
        let expected = match direction {
            Direction::HighAbove => 1.0,
            Direction::HighBelow => -1.0,
        };
        let verdict = if t.p_value >= alpha || t.statistic == 0.0 {
            GroupVerdict::NotDistinguished
        } else if t.statistic * expected > 0.0 {
            GroupVerdict::Confirmed
        } else {
            GroupVerdict::Contradicted
        };
        out.push(ScaleComparison {
            scale: col.name.clone(),
            high: group_stats(&high),
            low: group_stats(&low),
            t_test: t,
            mann_whitney: mw,
            verdict,
        });
    }
    Ok(KnownGroupsReport { direction, alpha, scales: out })
}
