//! Exploratory factor analysis: principal axis factoring with iterated
//! communalities, factor retention aids, varimax and promax rotation,
//! rotated-variance accounting and item-to-factor assignment.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dataset::{self, Aggregation, ResponseMatrix, ScoreTable};
use crate::linalg::{self, Matrix};
use crate::{Error, Result};

/// Squared multiple correlation of each item on all others:
/// `1 − 1/(R⁻¹)_ii`.
pub fn smc(r: &Matrix) -> Result<Vec<f64>> {
    let inv = linalg::inverse_spd(r)?;
    Ok(inv.diagonal().iter().map(|d| 1.0 - 1.0 / d).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Eigenvalues of R, descending.
    pub full: Vec<f64>,
    /// Eigenvalues of R with communalities on the diagonal, descending.
    pub reduced: Vec<f64>,
}

/// Full and reduced spectra. Without explicit communalities the reduced
/// matrix uses SMCs.
pub fn eigen_spectrum(r: &Matrix, communalities: Option<&[f64]>) -> Result<Spectrum> {
    let (full, _) = linalg::symmetric_eigen(r);
    let h2 = match communalities {
        Some(h) => h.to_vec(),
        None => smc(r)?,
    };
    let (reduced, _) = linalg::symmetric_eigen(&with_diagonal(r, &h2));
    Ok(Spectrum { full, reduced })
}

fn with_diagonal(r: &Matrix, d: &[f64]) -> Matrix {
    let mut m = r.clone();
    for (i, v) in d.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

/// Number of eigenvalues strictly greater than one.
pub fn kaiser_count(eigen_full: &[f64]) -> usize {
    eigen_full.iter().filter(|&&l| l > 1.0).count()
}

/// `100·λ/p` per eigenvalue.
pub fn percent_of_variance(eigen: &[f64], p: usize) -> Vec<f64> {
    eigen.iter().map(|l| 100.0 * l / p as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetentionAdvice {
    pub kaiser_count: usize,
    pub scree_full: Vec<f64>,
    pub scree_reduced: Vec<f64>,
    pub percent_of_variance: Vec<f64>,
    pub cumulative_percent: Vec<f64>,
}

pub fn retention_advice(r: &Matrix) -> Result<RetentionAdvice> {
    let s = eigen_spectrum(r, None)?;
    let pct = percent_of_variance(&s.full, r.nrows());
    let cumulative_percent = pct
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    Ok(RetentionAdvice {
        kaiser_count: kaiser_count(&s.full),
        scree_full: s.full,
        scree_reduced: s.reduced,
        percent_of_variance: pct,
        cumulative_percent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCommunalities {
    Smc,
    Custom(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PafOptions {
    /// Convergence threshold on the largest communality change.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PafOptions {
    fn default() -> Self {
        PafOptions { tol: 1e-4, max_iter: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub loadings: Matrix,
    pub communalities_initial: Vec<f64>,
    pub communalities: Vec<f64>,
    /// Sums of squared loadings per extracted factor.
    pub ss_loadings: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Items whose communality exceeded one.
    pub heywood_items: Vec<usize>,
}

/// Flip columns so that each column's largest-magnitude entry is positive.
/// Returns the signs applied.
fn fix_column_signs(l: &mut Matrix) -> Vec<f64> {
    let mut signs = Vec::with_capacity(l.ncols());
    for j in 0..l.ncols() {
        let mut best = 0.0f64;
        for i in 0..l.nrows() {
            if l[(i, j)].abs() > best.abs() {
                best = l[(i, j)];
            }
        }
        let s = if best < 0.0 { -1.0 } else { 1.0 };
        if s < 0.0 {
            for i in 0..l.nrows() {
                l[(i, j)] = -l[(i, j)];
            }
        }
        signs.push(s);
    }
    signs
}

/// Principal axis factoring of `m` factors.
///
/// Each pass puts the current communalities on the diagonal, takes the top
/// `m` eigenpairs, forms loadings `v·sqrt(λ)` and recomputes communalities as
/// row sums of squared loadings, until the largest change is below `tol`.
pub fn paf_extract(r: &Matrix, m: usize, init: &InitialCommunalities, opts: PafOptions) -> Result<Extraction> {
    let p = r.nrows();
    if !r.is_square() || p == 0 {
        return Err(Error::Dimension("correlation matrix must be square".into()));
    }
    if m == 0 || m > p {
        return Err(Error::config(format!("factor count {m} must be in 1..={p}")));
    }
    let initial = match init {
        InitialCommunalities::Smc => smc(r)?,
        InitialCommunalities::Custom(h) if h.len() == p => h.clone(),
        InitialCommunalities::Custom(h) => {
            return Err(Error::Dimension(format!("{} initial communalities for {p} items", h.len())));
        }
    };
    let mut h2 = initial.clone();
    let mut loadings = Matrix::zeros(p, m);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let (vals, vecs) = linalg::symmetric_eigen(&with_diagonal(r, &h2));
        if !(vals[0] >= -1e-12 * p as f64) {
            return Err(Error::ExtractionFailed(format!("leading eigenvalue {} is negative", vals[0])));
        }
        loadings = Matrix::from_fn(p, m, |i, j| vecs[(i, j)] * vals[j].max(0.0).sqrt());
        let next: Vec<f64> = (0..p).map(|i| loadings.row(i).iter().map(|v| v * v).sum()).collect();
        let delta = next.iter().zip(&h2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        h2 = next;
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    fix_column_signs(&mut loadings);
    let ss_loadings = (0..m).map(|j| loadings.column(j).iter().map(|v| v * v).sum()).collect();
    let heywood_items = h2.iter().enumerate().filter(|(_, h)| **h > 1.0).map(|(i, _)| i).collect();
    Ok(Extraction {
        loadings,
        communalities_initial: initial,
        communalities: h2,
        ss_loadings,
        iterations,
        converged,
        heywood_items,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Varimax {
    pub loadings: Matrix,
    /// Orthogonal transform: `loadings = input · rotation`.
    pub rotation: Matrix,
    /// Varimax criterion (on normalized rows) after each sweep.
    pub criterion_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Raw varimax criterion: sum over columns of the variance of squared loadings.
pub fn varimax_criterion(l: &Matrix) -> f64 {
    let p = l.nrows() as f64;
    (0..l.ncols())
        .map(|j| {
            let sq: Vec<f64> = (0..l.nrows()).map(|i| l[(i, j)] * l[(i, j)]).collect();
            let m = sq.iter().sum::<f64>() / p;
            sq.iter().map(|s| s * s).sum::<f64>() / p - m * m
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarimaxOptions {
    /// Kaiser row normalization before rotating.
    pub normalize: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for VarimaxOptions {
    fn default() -> Self {
        VarimaxOptions { normalize: true, tol: 1e-10, max_iter: 1000 }
    }
}

/// Orthogonal varimax rotation by the SVD fixed-point iteration.
pub fn varimax(l: &Matrix, opts: VarimaxOptions) -> Varimax {
    let (p, m) = (l.nrows(), l.ncols());
    if m < 2 {
        return Varimax {
            loadings: l.clone(),
            rotation: Matrix::identity(m),
            criterion_history: vec![varimax_criterion(l)],
            iterations: 0,
            converged: true,
        };
    }
    let h: Vec<f64> = (0..p)
        .map(|i| if opts.normalize { l.row(i).iter().map(|v| v * v).sum::<f64>().sqrt() } else { 1.0 })
        .collect();
    let x = Matrix::from_fn(p, m, |i, j| if h[i] > 0.0 { l[(i, j)] / h[i] } else { 0.0 });
    let mut t = Matrix::identity(m);
    let mut d = 0.0;
    let mut history = vec![varimax_criterion(&x)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let z = x.matmul(&t);
        let colsq: Vec<f64> = (0..m).map(|j| (0..p).map(|i| z[(i, j)] * z[(i, j)]).sum::<f64>() / p as f64).collect();
        let target = Matrix::from_fn(p, m, |i, j| z[(i, j)].powi(3) - z[(i, j)] * colsq[j]);
        let b = x.transpose().matmul(&target);
        let (u, s, v) = linalg::svd(&b);
        t = u.matmul(&v.transpose());
        let d_old = d;
        d = s.iter().sum();
        history.push(varimax_criterion(&x.matmul(&t)));
        if d_old > 0.0 && d <= d_old * (1.0 + opts.tol) {
            converged = true;
            break;
        }
    }
    let z = x.matmul(&t);
    let loadings = Matrix::from_fn(p, m, |i, j| z[(i, j)] * h[i]);
    Varimax { loadings, rotation: t, criterion_history: history, iterations, converged }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Promax {
    pub pattern: Matrix,
    pub structure: Matrix,
    pub phi: Matrix,
    /// Transform applied to the varimax loadings: `pattern = varimax · transform`.
    pub transform: Matrix,
}

/// Promax from varimax loadings: fit the target `sign(λ)|λ|^κ` by least
/// squares, rescale so the factor correlations have unit diagonal.
pub fn promax(varimax_loadings: &Matrix, kappa: f64) -> Result<Promax> {
    if !(kappa >= 1.0) {
        return Err(Error::config(format!("promax kappa {kappa} must be >= 1")));
    }
    let x = varimax_loadings;
    let m = x.ncols();
    if m < 2 {
        return Ok(Promax {
            pattern: x.clone(),
            structure: x.clone(),
            phi: Matrix::identity(m),
            transform: Matrix::identity(m),
        });
    }
    let target = x.map(|v| v.signum() * v.abs().powf(kappa));
    let xtx = x.transpose().matmul(x);
    let xtq = x.transpose().matmul(&target);
    let u = linalg::solve(&xtx, &xtq).map_err(|_| Error::RotationFailed("singular normal equations".into()))?;
    let utu_inv = linalg::inverse(&u.transpose().matmul(&u))
        .map_err(|_| Error::RotationFailed("target fit is rank deficient".into()))?;
    let d = utu_inv.diagonal();
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::RotationFailed("non-positive column scale".into()));
    }
    let transform = Matrix::from_fn(m, m, |i, j| u[(i, j)] * d[j].sqrt());
    let pattern = x.matmul(&transform);
    let phi = linalg::inverse(&transform.transpose().matmul(&transform))
        .map_err(|_| Error::RotationFailed("singular transform".into()))?;
    let phi = Matrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { 0.5 * (phi[(i, j)] + phi[(j, i)]) });
    let structure = pattern.matmul(&phi);
    Ok(Promax { pattern, structure, phi, transform })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatedVariance {
    /// Per-factor variance `Σ_i pattern_ij · structure_ij`.
    pub variance: Vec<f64>,
    pub percent_total: Vec<f64>,
    pub percent_common: Vec<f64>,
    pub total_percent: f64,
}

/// Percentages of total (`100·V/p`) and common (`100·V/ΣV`) variance.
pub fn variance_accounting(variance: &[f64], p: usize) -> Result<RotatedVariance> {
    let sum: f64 = variance.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::degenerate("rotated variance sums to zero or less"));
    }
    let percent_total: Vec<f64> = variance.iter().map(|v| 100.0 * v / p as f64).collect();
    Ok(RotatedVariance {
        variance: variance.to_vec(),
        total_percent: percent_total.iter().sum(),
        percent_total,
        percent_common: variance.iter().map(|v| 100.0 * v / sum).collect(),
    })
}

pub fn rotated_variance(pattern: &Matrix, structure: &Matrix) -> Result<RotatedVariance> {
    if pattern.nrows() != structure.nrows() || pattern.ncols() != structure.ncols() {
        return Err(Error::Dimension("pattern and structure differ in shape".into()));
    }
    let v: Vec<f64> = (0..pattern.ncols())
        .map(|j| (0..pattern.nrows()).map(|i| pattern[(i, j)] * structure[(i, j)]).sum())
        .collect();
    variance_accounting(&v, pattern.nrows())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Rotation {
    None,
    Varimax,
    #[default]
    Promax,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfaOptions {
    pub factors: usize,
    pub init: InitialCommunalities,
    pub paf: PafOptions,
    pub rotation: Rotation,
    pub kappa: f64,
}

impl Default for EfaOptions {
    fn default() -> Self {
        EfaOptions {
            factors: 1,
            init: InitialCommunalities::Smc,
            paf: PafOptions::default(),
            rotation: Rotation::Promax,
            kappa: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSolution {
    pub m: usize,
    pub rotation: Rotation,
    pub unrotated: Matrix,
    pub pattern: Matrix,
    pub structure: Matrix,
    pub phi: Matrix,
    pub communalities_initial: Vec<f64>,
    pub communalities: Vec<f64>,
    pub eigen_full: Vec<f64>,
    pub eigen_reduced: Vec<f64>,
    pub ss_loadings: Vec<f64>,
    pub variance: RotatedVariance,
    pub iterations: usize,
    pub converged: bool,
    pub heywood: bool,
    pub heywood_items: Vec<usize>,
    /// More factors than p/3 were requested.
    pub overfactored: bool,
}

/// Extraction, rotation and variance accounting in one call. Rotated factors
/// are ordered by decreasing rotated variance and sign-fixed so each column's
/// largest pattern coefficient is positive.
pub fn factor_analysis(r: &Matrix, opts: &EfaOptions) -> Result<FactorSolution> {
    let p = r.nrows();
    let spectrum = eigen_spectrum(r, None)?;
    let ex = paf_extract(r, opts.factors, &opts.init, opts.paf)?;
    let m = opts.factors;
    let (mut pattern, mut phi) = match opts.rotation {
        Rotation::None => (ex.loadings.clone(), Matrix::identity(m)),
        Rotation::Varimax => (varimax(&ex.loadings, VarimaxOptions::default()).loadings, Matrix::identity(m)),
        Rotation::Promax => {
            let vm = varimax(&ex.loadings, VarimaxOptions::default());
            let pm = promax(&vm.loadings, opts.kappa)?;
            (pm.pattern, pm.phi)
        }
    };
    let signs = fix_column_signs(&mut pattern);
    phi = Matrix::from_fn(m, m, |i, j| phi[(i, j)] * signs[i] * signs[j]);
    let mut structure = pattern.matmul(&phi);
    if opts.rotation != Rotation::None {
        let v = rotated_variance(&pattern, &structure)?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| v.variance[b].total_cmp(&v.variance[a]));
        pattern = pattern.select_columns(&order);
        phi = Matrix::from_fn(m, m, |i, j| phi[(order[i], order[j])]);
        structure = pattern.matmul(&phi);
    }
    let variance = rotated_variance(&pattern, &structure)?;
    Ok(FactorSolution {
        m,
        rotation: opts.rotation,
        unrotated: ex.loadings,
        pattern,
        structure,
        phi,
        communalities_initial: ex.communalities_initial,
        heywood: !ex.heywood_items.is_empty(),
        heywood_items: ex.heywood_items,
        communalities: ex.communalities,
        eigen_full: spectrum.full,
        eigen_reduced: spectrum.reduced,
        ss_loadings: ex.ss_loadings,
        variance,
        iterations: ex.iterations,
        converged: ex.converged,
        overfactored: 3 * m > p,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemAssignment {
    pub item: String,
    pub assigned: Option<usize>,
    /// Factors whose |pattern| reaches the threshold, with the coefficient.
    pub salient: Vec<(usize, f64)>,
    pub max_abs_loading: f64,
    pub cross_loading: bool,
    pub below_threshold: bool,
    pub tie: bool,
    pub overridden: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentReport {
    pub threshold: f64,
    pub items: Vec<ItemAssignment>,
}

impl AssignmentReport {
    /// Items assigned to each of `m` factors.
    pub fn members(&self, m: usize) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); m];
        for it in &self.items {
            if let Some(f) = it.assigned
                && f < m {
                    out[f].push(it.item.clone());
                }
        }
        out
    }
}

/// Assign each item to the factor with its largest salient |pattern|
/// coefficient. Overrides (item id → factor index) take precedence.
pub fn assign_items(
    pattern: &Matrix,
    item_ids: &[String],
    threshold: f64,
    overrides: &BTreeMap<String, usize>,
) -> Result<AssignmentReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::config(format!("loading threshold {threshold} not in (0, 1)")));
    }
    if item_ids.len() != pattern.nrows() {
        return Err(Error::Dimension("one item id per pattern row required".into()));
    }
    let m = pattern.ncols();
    let mut items = Vec::with_capacity(item_ids.len());
    for (i, id) in item_ids.iter().enumerate() {
        let row = pattern.row(i);
        let salient: Vec<(usize, f64)> =
            row.iter().enumerate().filter(|(_, v)| v.abs() >= threshold).map(|(j, v)| (j, *v)).collect();
        let max_abs = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let best = salient.iter().map(|s| s.1.abs()).fold(0.0f64, f64::max);
        let winners: Vec<usize> = salient.iter().filter(|s| s.1.abs() == best).map(|s| s.0).collect();
        let mut assigned = winners.first().copied();
        let over = overrides.get(id).copied();
        if let Some(f) = over {
            if f >= m {
                return Err(Error::config(format!("override for `{id}` names factor {f} of {m}")));
            }
            assigned = Some(f);
        }
        items.push(ItemAssignment {
            item: id.clone(),
            assigned,
            cross_loading: salient.len() >= 2,
            below_threshold: salient.is_empty(),
            tie: winners.len() > 1,
            overridden: over.is_some(),
            salient,
            max_abs_loading: max_abs,
        });
    }
    Ok(AssignmentReport { threshold, items })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorScores {
    pub scores: ScoreTable,
    /// Factors that received no items and therefore have no score column.
    pub empty_factors: Vec<usize>,
}

/// Equal-weight mean of each factor's assigned items.
pub fn factor_scores(m: &ResponseMatrix, assignment: &AssignmentReport, names: &[String]) -> Result<FactorScores> {
    let members = assignment.members(names.len());
    let mut groups = Vec::new();
    let mut empty_factors = Vec::new();
    for (f, items) in members.into_iter().enumerate() {
        if items.is_empty() {
            empty_factors.push(f);
        } else {
            groups.push((names[f].clone(), items));
        }
    }
    let scores = if groups.is_empty() {
        ScoreTable { respondent_ids: m.respondent_ids.clone(), columns: Vec::new() }
    } else {
        dataset::score_groups(m, &groups, Aggregation::Mean)?
    };
    Ok(FactorScores { scores, empty_factors })
}

/// Tucker's congruence coefficient.
pub fn congruence(a: &[f64], b: &[f64]) -> f64 {
    let d = linalg::norm(a) * linalg::norm(b);
    if d == 0.0 { 0.0 } else { linalg::dot(a, b) / d }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorMatch {
    /// `mapping[k]` is the recovered column matched to reference column `k`.
    pub mapping: Vec<usize>,
    /// Signed congruence per reference column (after sign alignment, ≥ 0).
    pub congruence: Vec<f64>,
}

/// Match recovered factors to reference factors by the permutation that
/// maximizes total |congruence|. Exhaustive over permutations; m ≤ 8.
pub fn match_factors(reference: &Matrix, recovered: &Matrix) -> Result<FactorMatch> {
    let m = reference.ncols();
    if recovered.ncols() != m || recovered.nrows() != reference.nrows() {
        return Err(Error::Dimension("factor matrices differ in shape".into()));
    }
    if m > 8 {
        return Err(Error::Dimension("factor matching limited to 8 factors".into()));
    }
    let c = Matrix::from_fn(m, m, |k, j| congruence(&reference.column(k), &recovered.column(j)).abs());
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best = (f64::NEG_INFINITY, perm.clone());
    permute(&mut perm, 0, &mut |p| {
        let s: f64 = p.iter().enumerate().map(|(k, &j)| c[(k, j)]).sum();
        if s > best.0 {
            best = (s, p.to_vec());
        }
    });
    let congruence = best.1.iter().enumerate().map(|(k, &j)| c[(k, j)]).collect();
    Ok(FactorMatch { mapping: best.1, congruence })
}

fn permute(v: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}
