//! Item descriptives, correlation matrices and factorability diagnostics.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dataset::ResponseMatrix;
use crate::dist;
use crate::inference::{Effect, Tails, TestResult};
use crate::linalg::{self, Matrix};
use crate::stats;
use crate::{Error, Result};

/// Thresholds above which an item's distribution is flagged as non-normal.
pub const SKEW_LIMIT: f64 = 2.0;
pub const KURTOSIS_LIMIT: f64 = 7.0;
/// Correlation magnitude counted as a meaningful inter-item relationship.
pub const SALIENT_R: f64 = 0.3;
/// Minimum KMO for a FACTORABLE verdict.
pub const KMO_MIN: f64 = 0.6;
/// Significance level for Bartlett's test in the verdict.
pub const BARTLETT_ALPHA: f64 = 0.05;
/// Pairwise n spread (relative to the largest) that raises a flag.
pub const PAIRWISE_N_SPREAD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemDescriptive {
    pub item: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub skew: Option<f64>,
    pub kurtosis: Option<f64>,
    pub constant: bool,
}

pub fn describe(item: &str, values: &[f64]) -> Result<ItemDescriptive> {
    if values.len() < 2 {
        return Err(Error::insufficient(format!("item `{item}` has {} values", values.len())));
    }
    let sd = stats::std_dev(values);
    Ok(ItemDescriptive {
        item: item.into(),
        n: values.len(),
        mean: stats::mean(values),
        sd,
        skew: stats::skewness(values),
        kurtosis: stats::excess_kurtosis(values),
        constant: sd == 0.0,
    })
}

/// Per-item n, mean, sample sd, adjusted skewness and excess kurtosis over
/// the non-missing responses.
pub fn item_descriptives(m: &ResponseMatrix) -> Result<Vec<ItemDescriptive>> {
    (0..m.p())
        .map(|j| {
            let vals: Vec<f64> = m.column(j).into_iter().flatten().collect();
            describe(&m.item_ids[j], &vals)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrMethod {
    #[default]
    Pearson,
    Spearman,
    KendallTauB,
}

/// Kendall's tau-b from concordant/discordant pair counts with the
/// tie-corrected denominator. `None` if either variable is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut conc, mut disc, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                tie_x += 1;
                tie_y += 1;
            } else if dx == 0.0 {
                tie_x += 1;
            } else if dy == 0.0 {
                tie_y += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                conc += 1;
            } else {
                disc += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - tie_x) as f64) * ((n0 - tie_y) as f64)).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some(((conc - disc) as f64 / denom).clamp(-1.0, 1.0))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    stats::pearson(&stats::midranks(x), &stats::midranks(y))
}

pub fn correlate_pair(x: &[f64], y: &[f64], method: CorrMethod) -> Option<f64> {
    match method {
        CorrMethod::Pearson => stats::pearson(x, y),
        CorrMethod::Spearman => spearman(x, y),
        CorrMethod::KendallTauB => kendall_tau_b(x, y),
    }
}

/// Symmetric correlation matrix with unit diagonal. Cells that could not be
/// computed are NaN and listed in `missing_cells`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub method: CorrMethod,
    pub labels: Vec<String>,
    pub values: Matrix,
    pub pairwise_n: Vec<Vec<usize>>,
    pub missing_cells: Vec<(usize, usize)>,
    /// Pairwise n differs by more than 5% across cells.
    pub n_spread_flag: bool,
}

impl CorrMatrix {
    /// Wrap an externally supplied matrix after checking the invariants.
    pub fn from_matrix(labels: Vec<String>, values: Matrix, method: CorrMethod, n: usize) -> Result<Self> {
        let p = values.nrows();
        if !values.is_square() || labels.len() != p {
            return Err(Error::Dimension("correlation matrix must be square with one label per row".into()));
        }
        if !values.is_symmetric(1e-12) {
            return Err(Error::Domain("correlation matrix is not symmetric".into()));
        }
        for i in 0..p {
            if (values[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Domain("correlation matrix needs a unit diagonal".into()));
            }
            for j in 0..p {
                if values[(i, j)].abs() > 1.0 + 1e-12 {
                    return Err(Error::Domain(format!("entry ({i},{j}) outside [-1, 1]")));
                }
            }
        }
        Ok(CorrMatrix {
            method,
            labels,
            values,
            pairwise_n: vec![vec![n; p]; p],
            missing_cells: Vec::new(),
            n_spread_flag: false,
        })
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_cells.is_empty()
    }
}

/// Pairwise-complete correlation matrix over columns with missing values.
pub fn correlation_from_columns(
    labels: Vec<String>,
    columns: &[Vec<Option<f64>>],
    method: CorrMethod,
) -> Result<CorrMatrix> {
    let p = columns.len();
    if labels.len() != p {
        return Err(Error::Dimension("one label per column required".into()));
    }
    let mut values = Matrix::identity(p);
    let mut pairwise_n = vec![vec![0usize; p]; p];
    let mut missing_cells = Vec::new();
    for i in 0..p {
        pairwise_n[i][i] = columns[i].iter().flatten().count();
        for j in i + 1..p {
            let (x, y): (Vec<f64>, Vec<f64>) = columns[i]
                .iter()
                .zip(&columns[j])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .unzip();
            pairwise_n[i][j] = x.len();
            pairwise_n[j][i] = x.len();
            let r = if x.len() >= 3 { correlate_pair(&x, &y, method) } else { None };
            let r = r.unwrap_or_else(|| {
                missing_cells.push((i, j));
                f64::NAN
            });
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    let off: Vec<usize> =
        (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).map(|(i, j)| pairwise_n[i][j]).collect();
    let n_spread_flag = match (off.iter().max(), off.iter().min()) {
        (Some(&hi), Some(&lo)) if hi > 0 => (hi - lo) as f64 / hi as f64 > PAIRWISE_N_SPREAD,
        _ => false,
    };
    Ok(CorrMatrix { method, labels, values, pairwise_n, missing_cells, n_spread_flag })
}

pub fn correlation_matrix(m: &ResponseMatrix, method: CorrMethod) -> Result<CorrMatrix> {
    let cols: Vec<Vec<Option<f64>>> = (0..m.p()).map(|j| m.column(j)).collect();
    correlation_from_columns(m.item_ids.clone(), &cols, method)
}

/// Bartlett's sphericity test: `χ² = −(n − 1 − (2p + 5)/6)·ln det R`.
pub fn bartlett_sphericity(r: &Matrix, n: usize) -> Result<TestResult> {
    let p = r.nrows();
    if n <= p {
        return Err(Error::insufficient(format!("Bartlett needs n > p ({n} <= {p})")));
    }
    let det = linalg::determinant(r);
    if !(det > 0.0) {
        return Err(Error::SingularMatrix);
    }
    let chi2 = (-((n - 1) as f64 - (2 * p + 5) as f64 / 6.0) * det.ln()).max(0.0);
    let df = (p * (p - 1) / 2) as f64;
    Ok(TestResult {
        method: "bartlett_sphericity".into(),
        statistic: chi2,
        df: vec![df],
        p_value: dist::chi2_sf(chi2, df),
        tails: Tails::Greater,
        effect: Effect::None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kmo {
    pub overall: f64,
    /// Measure of sampling adequacy per item.
    pub per_item: Vec<f64>,
}

/// Anti-image partial correlations `q_ij = −S_ij / sqrt(S_ii S_jj)` with
/// `S = R⁻¹`.
pub fn anti_image_correlations(r: &Matrix) -> Result<Matrix> {
    let s = linalg::inverse_spd(r)?;
    let p = r.nrows();
    Ok(Matrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { -s[(i, j)] / (s[(i, i)] * s[(j, j)]).sqrt() }))
}

/// Kaiser–Meyer–Olkin sampling adequacy, overall and per item.
pub fn kmo(r: &Matrix) -> Result<Kmo> {
    let q = anti_image_correlations(r)?;
    let p = r.nrows();
    let (mut sr, mut sq) = (0.0, 0.0);
    let mut per_item = Vec::with_capacity(p);
    for i in 0..p {
        let (mut ri, mut qi) = (0.0, 0.0);
        for j in (0..p).filter(|&j| j != i) {
            ri += r[(i, j)] * r[(i, j)];
            qi += q[(i, j)] * q[(i, j)];
        }
        per_item.push(if ri + qi > 0.0 { ri / (ri + qi) } else { f64::NAN });
        sr += ri;
        sq += qi;
    }
    if sr + sq == 0.0 || sr == 0.0 {
        return Err(Error::degenerate("KMO undefined: no off-diagonal correlation"));
    }
    Ok(Kmo { overall: sr / (sr + sq), per_item })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Factorable,
    NotFactorable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityFlag {
    pub item: String,
    pub skew: Option<f64>,
    pub kurtosis: Option<f64>,
    pub skew_flag: bool,
    pub kurtosis_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorabilityReport {
    pub n: usize,
    pub p: usize,
    pub bartlett: Option<TestResult>,
    pub kmo: Option<Kmo>,
    /// Reason KMO or Bartlett could not be computed.
    pub notes: Vec<String>,
    pub share_of_pairs_abs_r_ge_0_3: f64,
    pub normality: Vec<NormalityFlag>,
    pub verdict: Verdict,
}

/// Aggregated factorability screen on listwise-complete Pearson correlations.
pub fn factorability_report(m: &ResponseMatrix) -> Result<FactorabilityReport> {
    let cols = m.complete_columns();
    let n = cols.first().map_or(0, Vec::len);
    if n < 3 {
        return Err(Error::NoCompleteCases);
    }
    let p = m.p();
    let full: Vec<Vec<Option<f64>>> = cols.iter().map(|c| c.iter().map(|&v| Some(v)).collect()).collect();
    let corr = correlation_from_columns(m.item_ids.clone(), &full, CorrMethod::Pearson)?;
    let mut notes = Vec::new();
    let pairs = p * (p - 1) / 2;
    let salient = (0..p)
        .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
        .filter(|&(i, j)| corr.values[(i, j)].abs() >= SALIENT_R)
        .count();
    let share = if pairs > 0 { salient as f64 / pairs as f64 } else { 0.0 };
    let (bartlett, kmo_res) = if corr.is_complete() {
        let b = bartlett_sphericity(&corr.values, n).map_err(|e| notes.push(format!("bartlett: {e}"))).ok();
        let k = kmo(&corr.values).map_err(|e| notes.push(format!("kmo: {e}"))).ok();
        (b, k)
    } else {
        notes.push("correlation matrix has undefined cells (constant items)".into());
        (None, None)
    };
    let mut normality = Vec::with_capacity(p);
    for (j, c) in cols.iter().enumerate() {
        let d = describe(&m.item_ids[j], c)?;
        normality.push(NormalityFlag {
            item: d.item,
            skew_flag: d.skew.is_some_and(|s| s.abs() > SKEW_LIMIT),
            kurtosis_flag: d.kurtosis.is_some_and(|k| k.abs() > KURTOSIS_LIMIT),
            skew: d.skew,
            kurtosis: d.kurtosis,
        });
    }
    let factorable = bartlett.as_ref().is_some_and(|b| b.p_value < BARTLETT_ALPHA)
        && kmo_res.as_ref().is_some_and(|k| k.overall >= KMO_MIN);
    Ok(FactorabilityReport {
        n,
        p,
        bartlett,
        kmo: kmo_res,
        notes,
        share_of_pairs_abs_r_ge_0_3: share,
        normality,
        verdict: if factorable { Verdict::Factorable } else { Verdict::NotFactorable },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign(v: f64) -> f64 {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// Exhaustive pair enumeration with sign products.
    fn tau_b_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut num, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let a = sign(x[i] - x[j]);
                let b = sign(y[i] - y[j]);
                num += a * b;
                sx += a * a;
                sy += b * b;
            }
        }
        num / (sx * sy).sqrt()
    }

    #[test]
    fn tau_b_small_example() {
        let x = [1.0, 2.0, 2.0, 3.0];
        let y = [1.0, 2.0, 3.0, 3.0];
        let want = tau_b_oracle(&x, &y);
        // concordant 4, discordant 0, one tie in each: 4 / sqrt(5·5)
        assert!((want - 0.8).abs() < 1e-15);
        assert!((kendall_tau_b(&x, &y).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn reversal_gives_minus_one() {
        let x = [1.0, 3.0, 2.0, 5.0, 4.0, 4.0];
        let rev: Vec<f64> = x.iter().map(|v| 6.0 - v).collect();
        assert!((stats::pearson(&x, &rev).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman(&x, &rev).unwrap() + 1.0).abs() < 1e-15);
        assert!((stats::pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_variance_cell_flagged() {
        let cols = vec![
            vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0)],
            vec![Some(2.0), Some(2.0), Some(2.0), Some(2.0)],
            vec![Some(1.0), None, Some(3.0), Some(2.0)],
        ];
        let c = correlation_from_columns(vec!["a".into(), "b".into(), "c".into()], &cols, CorrMethod::Pearson)
            .unwrap();
        assert_eq!(c.missing_cells, vec![(0, 1), (1, 2)]);
        assert!(c.values[(0, 1)].is_nan());
        assert_eq!(c.pairwise_n[0][2], 3);
        assert!(c.n_spread_flag);
    }

    #[test]
    fn bartlett_examples() {
        let b = bartlett_sphericity(&Matrix::identity(4), 50).unwrap();
        assert_eq!(b.statistic, 0.0);
        assert_eq!(b.p_value, 1.0);
        assert_eq!(b.df, vec![6.0]);
        // det = 1 − 3(.25) + 2(.125) = .5 by cofactor expansion
        let r = Matrix::equicorrelation(3, 0.5);
        let b = bartlett_sphericity(&r, 100).unwrap();
        let want = -(99.0 - 11.0 / 6.0) * 0.5f64.ln();
        assert!((b.statistic - want).abs() < 1e-10);
        assert_eq!(bartlett_sphericity(&Matrix::identity(25), 219).unwrap().df, vec![300.0]);
        assert_eq!(bartlett_sphericity(&Matrix::equicorrelation(3, 1.0), 10).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn kmo_examples() {
        let r = Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        assert!((kmo(&r).unwrap().overall - 0.5).abs() < 1e-12);
        assert_eq!(kmo(&Matrix::identity(3)).unwrap_err().code(), "DEGENERATE");
        // 3×3 equicorrelated .5: adjugate inverse has diagonal 1.5, off-diagonal −.5,
        // so q = .5/1.5 = 1/3; KMO = 6(.25) / (6(.25) + 6/9) = 1.5 / (1.5 + 2/3)
        let k = kmo(&Matrix::equicorrelation(3, 0.5)).unwrap();
        assert!((k.overall - 1.5 / (1.5 + 2.0 / 3.0)).abs() < 1e-12);
        assert!(k.per_item.iter().all(|v| (v - k.overall).abs() < 1e-12));
    }
}
