//! Internal consistency (Cronbach's alpha and item diagnostics) and the
//! correction of correlations for attenuation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::screening::CorrMatrix;
use crate::stats;
use crate::{Error, Result};

/// Items below this corrected item-total correlation are flagged.
pub const ITEM_TOTAL_MIN: f64 = 0.3;

fn check_items(items: &[Vec<f64>], min_k: usize) -> Result<usize> {
    let k = items.len();
    if k < min_k {
        return Err(Error::insufficient(format!("need at least {min_k} items, got {k}")));
    }
    let n = items[0].len();
    if items.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension("item columns differ in length".into()));
    }
    if n < 3 {
        return Err(Error::insufficient(format!("need at least 3 complete rows, got {n}")));
    }
    Ok(n)
}

fn totals(items: &[Vec<f64>], skip: Option<usize>) -> Vec<f64> {
    let n = items[0].len();
    (0..n)
        .map(|r| items.iter().enumerate().filter(|(j, _)| Some(*j) != skip).map(|(_, c)| c[r]).sum())
        .collect()
}

/// Covariance-form alpha over complete item columns.
pub fn cronbach_alpha(items: &[Vec<f64>]) -> Result<f64> {
    check_items(items, 2)?;
    let k = items.len() as f64;
    let item_var: f64 = items.iter().map(|c| stats::variance(c)).sum();
    let total_var = stats::variance(&totals(items, None));
    if !(total_var > 0.0) {
        return Err(Error::degenerate("total score has zero variance"));
    }
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

/// Standardized alpha `k·r̄ / (1 + (k − 1)·r̄)` from the mean inter-item
/// correlation.
pub fn standardized_alpha(items: &[Vec<f64>]) -> Result<f64> {
    check_items(items, 2)?;
    let k = items.len();
    let mut sum = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            sum += stats::pearson(&items[i], &items[j])
                .ok_or_else(|| Error::degenerate("an item has zero variance"))?;
        }
    }
    let rbar = sum / (k * (k - 1) / 2) as f64;
    let kf = k as f64;
    Ok(kf * rbar / (1.0 + (kf - 1.0) * rbar))
}

pub fn alpha_if_deleted(items: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_items(items, 3)?;
    (0..items.len())
        .map(|d| {
            let rest: Vec<Vec<f64>> =
                items.iter().enumerate().filter(|(j, _)| *j != d).map(|(_, c)| c.clone()).collect();
            cronbach_alpha(&rest)
        })
        .collect()
}

/// Pearson correlation of each item with the sum of the other items.
/// `None` when either side has zero variance.
pub fn corrected_item_total(items: &[Vec<f64>]) -> Result<Vec<Option<f64>>> {
    check_items(items, 2)?;
    Ok((0..items.len()).map(|j| stats::pearson(&items[j], &totals(items, Some(j)))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemReliability {
    pub item: String,
    pub alpha_if_deleted: Option<f64>,
    pub corrected_item_total: Option<f64>,
    pub low_item_total: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub scale: String,
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub standardized_alpha: Option<f64>,
    pub items: Vec<ItemReliability>,
}

/// Full report for one scale. Alpha-if-deleted is omitted for two-item scales.
pub fn reliability_report(scale: &str, item_ids: &[String], items: &[Vec<f64>]) -> Result<ReliabilityReport> {
    if item_ids.len() != items.len() {
        return Err(Error::Dimension("one id per item column required".into()));
    }
    let n = check_items(items, 2)?;
    let alpha = cronbach_alpha(items)?;
    let deleted = if items.len() >= 3 { Some(alpha_if_deleted(items)?) } else { None };
    let rit = corrected_item_total(items)?;
    let items_out = item_ids
        .iter()
        .enumerate()
        .map(|(j, id)| ItemReliability {
            item: id.clone(),
            alpha_if_deleted: deleted.as_ref().map(|d| d[j]),
            corrected_item_total: rit[j],
            low_item_total: rit[j].is_none_or(|r| r < ITEM_TOTAL_MIN),
        })
        .collect();
    Ok(ReliabilityReport {
        scale: scale.into(),
        k: items.len(),
        n,
        alpha,
        standardized_alpha: standardized_alpha(items).ok(),
        items: items_out,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corrected {
    pub value: f64,
    /// The corrected value exceeds one in magnitude.
    pub overcorrected: bool,
}

/// `r / sqrt(alpha_a · alpha_b)`.
pub fn disattenuate(r_obs: f64, alpha_a: f64, alpha_b: f64) -> Result<Corrected> {
    for a in [alpha_a, alpha_b] {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::Domain(format!("reliability {a} not in (0, 1]")));
        }
    }
    let value = r_obs / (alpha_a * alpha_b).sqrt();
    Ok(Corrected { value, overcorrected: value.abs() > 1.0 })
}

/// Square layout: reliabilities on the diagonal, observed correlations in
/// the lower triangle, corrected correlations in the upper triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisattenuatedMatrix {
    pub labels: Vec<String>,
    pub values: Matrix,
    /// Upper-triangle cells `(i, j)` with i < j whose value exceeds one.
    pub overcorrected: Vec<(usize, usize)>,
}

impl DisattenuatedMatrix {
    pub fn observed(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i > j { (i, j) } else { (j, i) };
        self.values[(a, b)]
    }

    pub fn corrected(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.values[(a, b)]
    }
}

pub fn disattenuated_matrix(corr: &CorrMatrix, alphas: &[f64]) -> Result<DisattenuatedMatrix> {
    let m = corr.p();
    if alphas.len() != m {
        return Err(Error::Dimension(format!("{} reliabilities for {m} scales", alphas.len())));
    }
    let mut values = Matrix::zeros(m, m);
    let mut overcorrected = Vec::new();
    for i in 0..m {
        values[(i, i)] = alphas[i];
        for j in 0..i {
            let r = corr.values[(i, j)];
            values[(i, j)] = r;
            let c = disattenuate(r, alphas[j], alphas[i])?;
            values[(j, i)] = c.value;
            if c.overcorrected {
                overcorrected.push((j, i));
            }
        }
    }
    overcorrected.sort();
    Ok(DisattenuatedMatrix { labels: corr.labels.clone(), values, overcorrected })
}
