//! Group comparisons, correlation tests, post-hoc tables, OLS regression and
//! confidence intervals.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dist;
use crate::linalg::{self, Matrix};
use crate::stats;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tails {
    #[default]
    TwoSided,
    /// Alternative: first group / coefficient below.
    Less,
    /// Alternative: first group / coefficient above.
    Greater,
}

impl Tails {
    /// p-value for a statistic whose null distribution is symmetric with the
    /// given lower-tail cdf.
    fn p_from_cdf(self, cdf: impl Fn(f64) -> f64, stat: f64) -> f64 {
        let p = match self {
            Tails::TwoSided => 2.0 * cdf(-stat.abs()),
            Tails::Less => cdf(stat),
            Tails::Greater => cdf(-stat),
        };
        p.clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    None,
    MeanDifference { difference: f64, std_error: f64 },
    RankSum { u: f64, u_other: f64, z: Option<f64> },
    RankVariance { h: f64, tie_correction: f64 },
    Variance { ss_between: f64, ss_within: f64, ms_within: f64, eta_squared: f64 },
    Correlation { r: f64, n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: String,
    pub statistic: f64,
    /// Zero, one or two degrees-of-freedom values.
    pub df: Vec<f64>,
    pub p_value: f64,
    pub tails: Tails,
    pub effect: Effect,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TVariant {
    #[default]
    Student,
    Welch,
}

fn require_len(x: &[f64], min: usize, what: &str) -> Result<()> {
    if x.len() < min {
        return Err(Error::insufficient(format!("{what}: need at least {min} observations, got {}", x.len())));
    }
    Ok(())
}

/// Independent-samples t test of `mean(a) − mean(b)`.
pub fn t_test(a: &[f64], b: &[f64], variant: TVariant, tails: Tails) -> Result<TestResult> {
    require_len(a, 2, "group a")?;
    require_len(b, 2, "group b")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let diff = stats::mean(a) - stats::mean(b);
    let (va, vb) = (stats::variance(a), stats::variance(b));
    let (se, df) = match variant {
        TVariant::Student => {
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), na + nb - 2.0)
        }
        TVariant::Welch => {
            let (sa, sb) = (va / na, vb / nb);
            let se2 = sa + sb;
            let df = if se2 > 0.0 {
                se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0))
            } else {
                na + nb - 2.0
            };
            (se2.sqrt(), df)
        }
    };
    let t = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        return Err(Error::degenerate("zero variance in both groups with unequal means"));
    };
    let method = match variant {
        TVariant::Student => "student_t",
        TVariant::Welch => "welch_t",
    };
    Ok(TestResult {
        method: method.into(),
        statistic: t,
        df: vec![df],
        p_value: tails.p_from_cdf(|x| dist::t_cdf(x, df), t),
        tails,
        effect: Effect::MeanDifference { difference: diff, std_error: se },
    })
}

/// One-way ANOVA: between/within decomposition and F test.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::insufficient("ANOVA needs at least two groups"));
    }
    for g in groups {
        require_len(g, 1, "ANOVA group")?;
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let k = groups.len();
    if n <= k {
        return Err(Error::insufficient("ANOVA needs more observations than groups"));
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = stats::mean(g);
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    let (df1, df2) = ((k - 1) as f64, (n - k) as f64);
    let msw = ssw / df2;
    let f = if ssw > 0.0 {
        (ssb / df1) / msw
    } else if ssb > 0.0 {
        f64::INFINITY
    } else {
        return Err(Error::degenerate("no variation within or between groups"));
    };
    Ok(TestResult {
        method: "one_way_anova".into(),
        statistic: f,
        df: vec![df1, df2],
        p_value: dist::f_sf(f, df1, df2),
        tails: Tails::Greater,
        effect: Effect::Variance {
            ss_between: ssb,
            ss_within: ssw,
            ms_within: msw,
            eta_squared: ssb / (ssb + ssw),
        },
    })
}

/// Levene's test, mean-centred: ANOVA on absolute deviations from group means.
pub fn levene(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::insufficient("Levene needs at least two groups"));
    }
    let dev: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            require_len(g, 2, "Levene group")?;
            let m = stats::mean(g);
            Ok(g.iter().map(|v| (v - m).abs()).collect())
        })
        .collect::<Result<_>>()?;
    let mut res = match one_way_anova(&dev) {
        Ok(r) => r,
        // identical spreads with no within-group variation
        Err(Error::Degenerate(_)) => TestResult {
            method: String::new(),
            statistic: 0.0,
            df: vec![(groups.len() - 1) as f64, (dev.iter().map(Vec::len).sum::<usize>() - groups.len()) as f64],
            p_value: 1.0,
            tails: Tails::Greater,
            effect: Effect::None,
        },
        Err(e) => return Err(e),
    };
    res.method = "levene_mean".into();
    Ok(res)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwMode {
    Exact,
    #[default]
    NormalApprox,
}

/// Largest pooled sample for which the exact distribution is enumerated.
pub const MW_EXACT_MAX: usize = 16;

/// Mann–Whitney U for group `a` (midranks for ties).
///
/// Exact mode counts every assignment of the pooled midranks to group `a`
/// with a subset-sum table over doubled ranks, so ties are handled exactly.
/// The approximate mode uses the tie-corrected normal law with a 0.5
/// continuity correction.
pub fn mann_whitney(a: &[f64], b: &[f64], mode: MwMode, tails: Tails) -> Result<TestResult> {
    require_len(a, 1, "group a")?;
    require_len(b, 1, "group b")?;
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = stats::midranks(&pooled);
    let ra: f64 = ranks[..na].iter().sum();
    let u = ra - (na * (na + 1)) as f64 / 2.0;
    let u_other = (na * nb) as f64 - u;
    let (p, z) = match mode {
        MwMode::Exact => {
            if n > MW_EXACT_MAX {
                return Err(Error::config(format!("exact Mann–Whitney limited to {MW_EXACT_MAX} observations")));
            }
            (mw_exact_p(&ranks, na, tails), None)
        }
        MwMode::NormalApprox => {
            let mean = (na * nb) as f64 / 2.0;
            let nf = n as f64;
            let ties: f64 = stats::tie_groups(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
            let var = (na * nb) as f64 / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
            if var <= 0.0 {
                (1.0, Some(0.0))
            } else {
                let sd = var.sqrt();
                let d = u - mean;
                let z = match tails {
                    Tails::TwoSided => d.signum() * (d.abs() - 0.5).max(0.0) / sd,
                    Tails::Less => (d + 0.5) / sd,
                    Tails::Greater => (d - 0.5) / sd,
                };
                (tails.p_from_cdf(dist::normal_cdf, z), Some(z))
            }
        }
    };
    Ok(TestResult {
        method: match mode {
            MwMode::Exact => "mann_whitney_exact".into(),
            MwMode::NormalApprox => "mann_whitney_normal".into(),
        },
        statistic: u,
        df: Vec::new(),
        p_value: p,
        tails,
        effect: Effect::RankSum { u, u_other, z },
    })
}

fn mw_exact_p(ranks: &[f64], na: usize, tails: Tails) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // counts[j][s]: subsets of size j with doubled rank sum s
    let mut counts = vec![vec![0f64; max_sum + 1]; na + 1];
    counts[0][0] = 1.0;
    for &r in &doubled {
        for j in (1..=na).rev() {
            for s in (r..=max_sum).rev() {
                let c = counts[j - 1][s - r];
                if c != 0.0 {
                    counts[j][s] += c;
                }
            }
        }
    }
    let obs: usize = doubled[..na].iter().sum();
    let nb = ranks.len() - na;
    // doubled U = doubled R - na(na+1); centre of doubled U is na*nb
    let offset = (na * (na + 1)) as i64;
    let centre = (na * nb) as i64;
    let u2 = |s: usize| s as i64 - offset;
    let dev_obs = (u2(obs) - centre).abs();
    let total: f64 = counts[na].iter().sum();
    let hit: f64 = counts[na]
        .iter()
        .enumerate()
        .filter(|&(s, c)| {
            *c != 0.0
                && match tails {
                    Tails::TwoSided => (u2(s) - centre).abs() >= dev_obs,
                    Tails::Less => u2(s) <= u2(obs),
                    Tails::Greater => u2(s) >= u2(obs),
                }
        })
        .map(|(_, c)| c)
        .sum();
    (hit / total).clamp(0.0, 1.0)
}

/// Kruskal–Wallis H with tie correction, chi-square reference on `k − 1` df.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::insufficient("Kruskal–Wallis needs at least two groups"));
    }
    for g in groups {
        require_len(g, 1, "Kruskal–Wallis group")?;
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = pooled.len() as f64;
    let ranks = stats::midranks(&pooled);
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let ties: f64 = stats::tie_groups(&pooled).iter().map(|&t| (t * t * t - t) as f64).sum();
    let correction = 1.0 - ties / (n * n * n - n);
    let raw = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
    let h = if correction > 0.0 { (raw / correction).max(0.0) } else { 0.0 };
    let df = (groups.len() - 1) as f64;
    Ok(TestResult {
        method: "kruskal_wallis".into(),
        statistic: h,
        df: vec![df],
        p_value: dist::chi2_sf(h, df),
        tails: Tails::Greater,
        effect: Effect::RankVariance { h, tie_correction: correction },
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostHoc {
    #[default]
    Lsd,
    Bonferroni,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub group_a: usize,
    pub group_b: usize,
    pub mean_difference: f64,
    pub std_error: f64,
    pub t: f64,
    pub df: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

/// `min(1, m·p)`.
pub fn bonferroni(p: f64, comparisons: usize) -> f64 {
    (p * comparisons as f64).min(1.0)
}

/// All pairwise comparisons using the ANOVA mean square error. LSD leaves
/// p-values unadjusted; Bonferroni multiplies by the number of pairs.
pub fn posthoc(groups: &[Vec<f64>], method: PostHoc) -> Result<Vec<PairwiseComparison>> {
    let anova = one_way_anova(groups)?;
    let Effect::Variance { ms_within, .. } = anova.effect else { unreachable!() };
    let df = anova.df[1];
    let k = groups.len();
    let m = k * (k - 1) / 2;
    let mut out = Vec::with_capacity(m);
    for i in 0..k {
        for j in i + 1..k {
            let diff = stats::mean(&groups[i]) - stats::mean(&groups[j]);
            let se = (ms_within * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
            let t = if se > 0.0 { diff / se } else { 0.0 };
            let p = if se > 0.0 { dist::t_two_sided(t, df) } else if diff == 0.0 { 1.0 } else { 0.0 };
            let p_adjusted = match method {
                PostHoc::Lsd => p,
                PostHoc::Bonferroni => bonferroni(p, m),
            };
            out.push(PairwiseComparison {
                group_a: i,
                group_b: j,
                mean_difference: diff,
                std_error: se,
                t,
                df,
                p_raw: p,
                p_adjusted,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    #[default]
    Pearson,
    Spearman,
}

/// Correlation coefficient with its t-approximation test on `n − 2` df.
pub fn correlate(x: &[f64], y: &[f64], kind: CorrelationKind, tails: Tails) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::Dimension("x and y differ in length".into()));
    }
    require_len(x, 3, "correlation")?;
    let r = match kind {
        CorrelationKind::Pearson => stats::pearson(x, y),
        CorrelationKind::Spearman => stats::pearson(&stats::midranks(x), &stats::midranks(y)),
    }
    .ok_or_else(|| Error::degenerate("zero variance"))?;
    let df = (x.len() - 2) as f64;
    let t = if r.abs() >= 1.0 { r.signum() * f64::INFINITY } else { r * (df / (1.0 - r * r)).sqrt() };
    Ok(TestResult {
        method: match kind {
            CorrelationKind::Pearson => "pearson_r".into(),
            CorrelationKind::Spearman => "spearman_rho".into(),
        },
        statistic: r,
        df: vec![df],
        p_value: tails.p_from_cdf(|v| dist::t_cdf(v, df), t),
        tails,
        effect: Effect::Correlation { r, n: x.len() },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub b: f64,
    pub std_error: f64,
    /// Standardized weight `b · sd(x) / sd(y)`; absent for the intercept
    /// or when not requested.
    pub beta: Option<f64>,
    pub t: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub n: usize,
    /// Intercept first, then predictors in input order.
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f: f64,
    pub df: Vec<f64>,
    pub p_value: f64,
    pub residual_std_error: f64,
    /// Condition number of the column-standardized predictor matrix.
    pub condition_number: f64,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

/// Rank tolerance on |R_jj| relative to the largest diagonal of R.
const RANK_RTOL: f64 = 1e-10;

/// Least squares of `y` on an intercept plus the columns of `x` (n × k),
/// solved by Householder QR.
pub fn ols(y: &[f64], x: &Matrix, names: &[String], standardize_report: bool) -> Result<RegressionResult> {
    let n = y.len();
    let k = x.ncols();
    if x.nrows() != n {
        return Err(Error::Dimension(format!("{} rows in X, {n} responses", x.nrows())));
    }
    if names.len() != k {
        return Err(Error::Dimension("one name per predictor required".into()));
    }
    if n <= k + 1 {
        return Err(Error::insufficient(format!("{n} observations for {k} predictors")));
    }
    let sd_y = stats::std_dev(y);
    if sd_y.is_nan() || sd_y == 0.0 {
        return Err(Error::degenerate("response has zero variance"));
    }
    let cols: Vec<Vec<f64>> = (0..k).map(|j| x.column(j)).collect();
    let condition = condition_number(&cols);
    let design = Matrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let qr = design.to_na().qr();
    let r = qr.r();
    let rmax = (0..=k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if (0..=k).any(|j| r[(j, j)].abs() <= RANK_RTOL * rmax) || !condition.is_finite() {
        return Err(Error::Collinear { condition });
    }
    let rinv = linalg::inverse(&Matrix::from_na(&r))?;
    let qty = qr.q().transpose() * nalgebra::DVector::from_column_slice(y);
    let coef: Vec<f64> = (0..=k).map(|i| (0..=k).map(|j| rinv[(i, j)] * qty[j]).sum()).collect();
    let fitted: Vec<f64> = (0..n).map(|i| (0..=k).map(|j| design[(i, j)] * coef[j]).sum()).collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let my = stats::mean(y);
    let sst: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let df_res = (n - k - 1) as f64;
    let sigma2 = sse / df_res;
    let r2 = (1.0 - sse / sst).clamp(0.0, 1.0);
    let adj = 1.0 - (1.0 - r2) * (n - 1) as f64 / df_res;
    let f = if sse > 0.0 { ((sst - sse) / k as f64) / sigma2 } else { f64::INFINITY };
    let mut coefficients = Vec::with_capacity(k + 1);
    for j in 0..=k {
        // diag of (XᵀX)⁻¹ = R⁻¹R⁻ᵀ
        let var = (0..=k).map(|c| rinv[(j, c)] * rinv[(j, c)]).sum::<f64>() * sigma2;
        let se = var.sqrt();
        let t = if se > 0.0 { coef[j] / se } else { coef[j].signum() * f64::INFINITY };
        let beta = (j > 0 && standardize_report).then(|| coef[j] * stats::std_dev(&cols[j - 1]) / sd_y);
        coefficients.push(Coefficient {
            name: if j == 0 { "(intercept)".into() } else { names[j - 1].clone() },
            b: coef[j],
            std_error: se,
            beta,
            t,
            p_value: if se > 0.0 { dist::t_two_sided(t, df_res) } else { 0.0 },
        });
    }
    Ok(RegressionResult {
        n,
        coefficients,
        r_squared: r2,
        adj_r_squared: adj,
        f,
        df: vec![k as f64, df_res],
        p_value: dist::f_sf(f, k as f64, df_res),
        residual_std_error: sigma2.sqrt(),
        condition_number: condition,
        residuals,
    })
}

fn condition_number(cols: &[Vec<f64>]) -> f64 {
    if cols.is_empty() {
        return 1.0;
    }
    let n = cols[0].len();
    let z = Matrix::from_fn(n, cols.len(), |i, j| {
        let m = stats::mean(&cols[j]);
        let sd = stats::std_dev(&cols[j]);
        if sd > 0.0 { (cols[j][i] - m) / sd } else { 0.0 }
    });
    let (_, s, _) = linalg::svd(&z);
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= max * 1e-14 { f64::INFINITY } else { max / min }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// t-based confidence interval for the mean.
pub fn ci_mean(x: &[f64], level: f64) -> Result<Interval> {
    require_len(x, 2, "confidence interval")?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::config(format!("confidence level {level} not in (0, 1)")));
    }
    let m = stats::mean(x);
    let n = x.len() as f64;
    let half = dist::t_quantile(0.5 + level / 2.0, n - 1.0) * stats::std_dev(x) / n.sqrt();
    Ok(Interval { mean: m, lower: m - half, upper: m + half, level })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn t_test_examples() {
        let same = [1.0, 2.0, 3.0];
        let r = t_test(&same, &same, TVariant::Student, Tails::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);

        // pooled variance 1, se = sqrt(2/3), t = -3/sqrt(2/3)
        let r = t_test(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], TVariant::Student, Tails::TwoSided).unwrap();
        assert!((r.statistic + 3.0 / (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(r.df, vec![4.0]);
        let s = t_test(&[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0], TVariant::Student, Tails::TwoSided).unwrap();
        assert_eq!(s.statistic, -r.statistic);
        assert!((s.p_value - r.p_value).abs() < 1e-15);

        let w = t_test(&[1.0, 2.0, 3.0, 4.0], &[2.0, 6.0, 10.0], TVariant::Welch, Tails::TwoSided).unwrap();
        // Satterthwaite: va/na = 5/12, vb/nb = 16/3
        let (sa, sb) = (5.0 / 12.0, 16.0 / 3.0);
        let df = (sa + sb) * (sa + sb) / (sa * sa / 3.0 + sb * sb / 2.0);
        assert!((w.df[0] - df).abs() < 1e-12);
    }

    #[test]
    fn t_test_degenerate() {
        let r = t_test(&[2.0, 2.0], &[2.0, 2.0], TVariant::Student, Tails::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        let e = t_test(&[2.0, 2.0], &[3.0, 3.0], TVariant::Student, Tails::TwoSided).unwrap_err();
        assert_eq!(e.code(), "DEGENERATE");
        assert_eq!(t_test(&[1.0], &[1.0, 2.0], TVariant::Student, Tails::TwoSided).unwrap_err().code(), "INSUFFICIENT_DATA");
    }

    #[test]
    fn anova_hand_example() {
        // means 2, 5, 8; grand 5; SSB = 3·9 + 0 + 3·9 = 54; SSW = 2+2+2 = 6
        let g = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]];
        let r = one_way_anova(&g).unwrap();
        assert!((r.statistic - (54.0 / 2.0) / (6.0 / 6.0)).abs() < 1e-12);
        assert_eq!(r.df, vec![2.0, 6.0]);
        let same = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]];
        let r = one_way_anova(&same).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(one_way_anova(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap_err().code(), "DEGENERATE");
    }

    #[test]
    fn levene_examples() {
        let r = levene(&[vec![1.0, 2.0, 4.0], vec![1.0, 2.0, 4.0]]).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        // equal spread, shifted means
        let r = levene(&[vec![1.0, 2.0, 4.0], vec![11.0, 12.0, 14.0]]).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        // hand: deviations {1,0,1} (mean 2/3) and {2,0,2} (mean 4/3), grand 1
        // SSB = 3(1/9)+3(1/9) = 2/3; SSW = (1/9+4/9+1/9) + (4/9+16/9+4/9) = 30/9
        let r = levene(&[vec![1.0, 2.0, 3.0], vec![0.0, 2.0, 4.0]]).unwrap();
        let f = (2.0 / 3.0) / ((30.0 / 9.0) / 4.0);
        assert!((r.statistic - f).abs() < 1e-12);
    }

    #[test]
    fn mann_whitney_examples() {
        let r = mann_whitney(&[1.0, 2.0], &[3.0, 4.0], MwMode::Exact, Tails::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 2.0 / 6.0).abs() < 1e-12);
        let r = mann_whitney(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], MwMode::NormalApprox, Tails::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        let big: Vec<f64> = (0..17).map(f64::from).collect();
        assert!(mann_whitney(&big[..9], &big[9..], MwMode::Exact, Tails::TwoSided).is_err());
    }

    #[test]
    fn kruskal_examples() {
        let r = kruskal_wallis(&[vec![2.0, 2.0], vec![2.0, 2.0, 2.0]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        // ranks {1,2,3} {4,5} {6,7,8}: sums 6, 9, 21; N = 8
        let r = kruskal_wallis(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0], vec![6.0, 7.0, 8.0]]).unwrap();
        let h = 12.0 / 72.0 * (36.0 / 3.0 + 81.0 / 2.0 + 441.0 / 3.0) - 27.0;
        assert!((r.statistic - h).abs() < 1e-12);
        assert_eq!(r.df, vec![2.0]);
    }

    #[test]
    fn bonferroni_examples() {
        assert!((bonferroni(0.01, 3) - 0.03).abs() < 1e-15);
        assert_eq!(bonferroni(0.5, 3), 1.0);
        let g = vec![vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 5.0], vec![6.0, 7.0, 9.0]];
        let lsd = posthoc(&g, PostHoc::Lsd).unwrap();
        let bon = posthoc(&g, PostHoc::Bonferroni).unwrap();
        assert_eq!(lsd.len(), 3);
        for (l, b) in lsd.iter().zip(&bon) {
            assert_eq!(l.p_raw, l.p_adjusted);
            assert!(b.p_adjusted >= b.p_raw);
            assert_eq!(b.p_adjusted, bonferroni(b.p_raw, 3));
        }
    }

    #[test]
    fn correlate_examples() {
        let x = [1.0, 2.0, 3.0, 5.0, 8.0];
        let r = correlate(&x, &x, CorrelationKind::Pearson, Tails::TwoSided).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-15);
        assert_eq!(r.p_value, 0.0);
        let rev = [9.0, 7.0, 4.0, 2.0, 1.0];
        let r = correlate(&x, &rev, CorrelationKind::Spearman, Tails::TwoSided).unwrap();
        assert!((r.statistic + 1.0).abs() < 1e-15);
        // hand: x=(1,2,3), y=(1,3,2): r = 0.5, t = 0.5·sqrt(1/0.75)
        let r = correlate(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0], CorrelationKind::Pearson, Tails::TwoSided).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-15);
        let t = 0.5 * (1.0f64 / 0.75).sqrt();
        assert!((r.p_value - dist::t_two_sided(t, 1.0)).abs() < 1e-14);
        assert_eq!(
            correlate(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], CorrelationKind::Pearson, Tails::TwoSided).unwrap_err().code(),
            "DEGENERATE"
        );
    }

    #[test]
    fn ols_exact_fit_and_collinearity() {
        let x = Matrix::from_fn(6, 2, |i, j| if j == 0 { i as f64 } else { ((i * i) % 5) as f64 });
        let y: Vec<f64> = (0..6).map(|i| 2.0 + 3.0 * x[(i, 0)] - x[(i, 1)]).collect();
        let names = ["a".to_string(), "b".to_string()];
        let r = ols(&y, &x, &names, true).unwrap();
        assert!((r.r_squared - 1.0).abs() < 1e-12);
        assert!(r.residuals.iter().all(|e| e.abs() < 1e-10));
        assert!((r.coefficients[1].b - 3.0).abs() < 1e-10);

        let dup = Matrix::from_fn(6, 2, |i, _| i as f64);
        assert_eq!(ols(&y, &dup, &names, true).unwrap_err().code(), "COLLINEAR");
    }

    #[test]
    fn ci_examples() {
        let flat = ci_mean(&[3.0, 3.0, 3.0], 0.95).unwrap();
        assert_eq!((flat.lower, flat.upper), (3.0, 3.0));
        let x = [2.0, 4.0, 4.0, 5.0, 10.0];
        // mean 5, sd = sqrt(9) = 3, t_{.975,4} = 2.7764451051977987
        let ci = ci_mean(&x, 0.95).unwrap();
        let half = 2.7764451051977987 * 3.0 / 5.0f64.sqrt();
        assert!((ci.upper - 5.0 - half).abs() < 1e-9);
        let wider = ci_mean(&x, 0.99).unwrap();
        assert!(wider.upper - wider.lower > ci.upper - ci.lower);
    }
}
