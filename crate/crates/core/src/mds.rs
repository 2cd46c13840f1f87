//! Metric (interval) and non-metric (ordinal) multidimensional scaling by
//! Guttman-transform majorization, with Kruskal stress-1 and RSQ.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::isotonic;
use crate::linalg::{self, Matrix};
use crate::screening::{CorrMatrix, CorrMethod};
use crate::stats;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Pearson,
    Spearman,
    Kendall,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dissimilarity {
    pub values: Matrix,
    pub source: Source,
}

impl Dissimilarity {
    /// Validates symmetry, nonnegativity and the zero diagonal.
    pub fn new(values: Matrix, source: Source) -> Result<Self> {
        let p = values.nrows();
        if !values.is_square() {
            return Err(Error::Dimension("dissimilarities must be square".into()));
        }
        for i in 0..p {
            if values[(i, i)] != 0.0 {
                return Err(Error::Domain(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..p {
                let v = values[(i, j)];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Domain(format!("entry ({i},{j}) must be finite and nonnegative")));
                }
                if (v - values[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Domain("dissimilarities are not symmetric".into()));
                }
            }
        }
        Ok(Dissimilarity { values, source })
    }

    pub fn p(&self) -> usize {
        self.values.nrows()
    }

    /// Upper-triangle values in pair order.
    pub fn pair_values(&self) -> Vec<f64> {
        pairs(self.p()).into_iter().map(|(i, j)| self.values[(i, j)]).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissimilarityTransform {
    /// `1 − r`
    #[default]
    OneMinusR,
    /// `sqrt(2(1 − r))`
    Chord,
}

pub fn corr_to_dissimilarity(r: &CorrMatrix, transform: DissimilarityTransform) -> Result<Dissimilarity> {
    let p = r.p();
    if !r.is_complete() {
        return Err(Error::Domain("correlation matrix has missing cells".into()));
    }
    let values = Matrix::from_fn(p, p, |i, j| {
        if i == j {
            return 0.0;
        }
        let c = r.values[(i, j)].clamp(-1.0, 1.0);
        match transform {
            DissimilarityTransform::OneMinusR => 1.0 - c,
            DissimilarityTransform::Chord => (2.0 * (1.0 - c)).sqrt(),
        }
    });
    let source = match r.method {
        CorrMethod::Pearson => Source::Pearson,
        CorrMethod::Spearman => Source::Spearman,
        CorrMethod::KendallTauB => Source::Kendall,
    };
    Dissimilarity::new(values, source)
}

/// Index pairs `(i, j)` with `i < j`, row by row.
pub fn pairs(p: usize) -> Vec<(usize, usize)> {
    (0..p).flat_map(|i| ((i + 1)..p).map(move |j| (i, j))).collect()
}

/// Euclidean distances between configuration rows, in pair order.
pub fn pair_distances(x: &Matrix) -> Vec<f64> {
    pairs(x.nrows())
        .into_iter()
        .map(|(i, j)| x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .collect()
}

pub fn distance_matrix(x: &Matrix) -> Matrix {
    let p = x.nrows();
    let mut d = Matrix::zeros(p, p);
    for ((i, j), v) in pairs(p).into_iter().zip(pair_distances(x)) {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    d
}

/// `sqrt(Σ(d − d̂)² / Σd²)`
pub fn stress1(d: &[f64], d_hat: &[f64]) -> Result<f64> {
    if d.len() != d_hat.len() {
        return Err(Error::Dimension("distances and disparities differ in length".into()));
    }
    let den: f64 = d.iter().map(|v| v * v).sum();
    if !(den > 0.0) {
        return Err(Error::degenerate("all distances are zero"));
    }
    let num: f64 = d.iter().zip(d_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((num / den).sqrt())
}

/// Squared Pearson correlation between disparities and distances.
pub fn rsq(d_hat: &[f64], d: &[f64]) -> Result<f64> {
    if d.len() != d_hat.len() {
        return Err(Error::Dimension("distances and disparities differ in length".into()));
    }
    let r = stats::pearson(d_hat, d).ok_or_else(|| Error::degenerate("constant disparities or distances"))?;
    Ok(r * r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalInit {
    pub x: Matrix,
    /// No positive eigenvalue was available; a seeded random start was used.
    pub fallback: bool,
}

/// Torgerson scaling: top-k eigenpairs of the double-centered `−½δ²`.
pub fn classical_init(delta: &Matrix, k: usize, seed: u64) -> Result<ClassicalInit> {
    let p = delta.nrows();
    check_dims(p, k)?;
    let sq = delta.map(|v| v * v);
    let row_means: Vec<f64> = (0..p).map(|i| sq.row(i).iter().sum::<f64>() / p as f64).collect();
    let grand = row_means.iter().sum::<f64>() / p as f64;
    let b = Matrix::from_fn(p, p, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let (vals, vecs) = linalg::symmetric_eigen(&b);
    if vals.iter().take(k).all(|v| *v <= 0.0) {
        return Ok(ClassicalInit { x: random_start(p, k, seed), fallback: true });
    }
    let x = Matrix::from_fn(p, k, |i, j| vecs[(i, j)] * vals[j].max(0.0).sqrt());
    Ok(ClassicalInit { x, fallback: false })
}

fn random_start(p: usize, k: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(p, k, |_, _| rng.random_range(-1.0..1.0))
}

fn check_dims(p: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::config("dimension count must be at least 1"));
    }
    if p <= k {
        return Err(Error::Dimension(format!("{p} objects cannot be scaled in {k} dimensions")));
    }
    Ok(())
}

/// Rotate a configuration onto its principal axes after centering. Columns
/// come out in decreasing variance, each with its largest coordinate positive.
pub fn rotate_principal(x: &Matrix) -> Matrix {
    let (p, k) = (x.nrows(), x.ncols());
    let means: Vec<f64> = (0..k).map(|j| x.column(j).iter().sum::<f64>() / p as f64).collect();
    let c = Matrix::from_fn(p, k, |i, j| x[(i, j)] - means[j]);
    let (_, v) = linalg::symmetric_eigen(&c.transpose().matmul(&c));
    let mut y = c.matmul(&v);
    for j in 0..k {
        let mut best = 0.0f64;
        for i in 0..p {
            if y[(i, j)].abs() > best.abs() {
                best = y[(i, j)];
            }
        }
        if best < 0.0 {
            for i in 0..p {
                y[(i, j)] = -y[(i, j)];
            }
        }
    }
    y
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Disparities are an increasing linear function of δ.
    Interval,
    /// Disparities are a monotone function of δ.
    #[default]
    Ordinal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsOptions {
    pub k: usize,
    pub transform: Transform,
    pub seed: u64,
    /// Total starts: the classical start plus `restarts − 1` random ones.
    pub restarts: usize,
    /// Stop when stress-1 changes by less than `tol` times its current value.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MdsOptions {
    fn default() -> Self {
        MdsOptions { k: 2, transform: Transform::Ordinal, seed: 0, restarts: 10, tol: 1e-6, max_iter: 500 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Start {
    Classical,
    Random { seed: u64 },
}

/// The starts tried for `opts`, in selection-priority order.
pub fn starts(opts: &MdsOptions) -> Vec<Start> {
    let n = opts.restarts.max(1);
    let mut out = vec![Start::Classical];
    out.extend((1..n).map(|i| Start::Random { seed: opts.seed.wrapping_add(i as u64) }));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartFit {
    pub start: Start,
    pub x: Matrix,
    pub stress1: f64,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
    pub init_fallback: bool,
}

/// Least-squares disparities for the current distances.
fn fit_disparities(delta: &[f64], d: &[f64], t: Transform) -> Vec<f64> {
    match t {
        Transform::Ordinal => isotonic::monotone_fit_primary(delta, d),
        Transform::Interval => {
            let (a, b) = affine_fit(delta, d);
            delta.iter().map(|v| a + b * v).collect()
        }
    }
}

/// Intercept and slope of `d` on `delta`, slope constrained to be ≥ 0.
fn affine_fit(delta: &[f64], d: &[f64]) -> (f64, f64) {
    let md = stats::mean(delta);
    let mv = stats::mean(d);
    let sxx: f64 = delta.iter().map(|x| (x - md) * (x - md)).sum();
    let sxy: f64 = delta.iter().zip(d).map(|(x, y)| (x - md) * (y - mv)).sum();
    let b = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    (mv - b * md, b)
}

fn rank_image(delta: &Matrix) -> Matrix {
    let p = delta.nrows();
    let pr = pairs(p);
    let vals: Vec<f64> = pr.iter().map(|&(i, j)| delta[(i, j)]).collect();
    let ranks = stats::midranks(&vals);
    let mut out = Matrix::zeros(p, p);
    for (&(i, j), r) in pr.iter().zip(ranks) {
        out[(i, j)] = r;
        out[(j, i)] = r;
    }
    out
}

fn center_and_scale(x: &mut Matrix, target_ss: f64) {
    let (p, k) = (x.nrows(), x.ncols());
    for j in 0..k {
        let m = x.column(j).iter().sum::<f64>() / p as f64;
        for i in 0..p {
            x[(i, j)] -= m;
        }
    }
    let ss: f64 = pair_distances(x).iter().map(|v| v * v).sum();
    if ss > 0.0 {
        let s = (target_ss / ss).sqrt();
        *x = x.map(|v| v * s);
    }
}

fn is_degenerate(d: &[f64], delta: &[f64]) -> bool {
    if d.iter().any(|v| !v.is_finite()) {
        return true;
    }
    let spread = |v: &[f64]| {
        let m = stats::mean(v);
        if m > 0.0 { stats::std_dev(v) / m } else { 0.0 }
    };
    spread(delta) > 1e-9 && spread(d) < 1e-3
}

/// Run the majorization loop from one start.
pub fn fit_start(delta: &Dissimilarity, opts: &MdsOptions, start: Start) -> Result<StartFit> {
    let p = delta.p();
    check_dims(p, opts.k)?;
    let dv = delta.pair_values();
    let npairs = dv.len() as f64;
    let (mut x, init_fallback) = match start {
        Start::Classical => {
            let base = match opts.transform {
                Transform::Ordinal => rank_image(&delta.values),
                Transform::Interval => delta.values.clone(),
            };
            let c = classical_init(&base, opts.k, opts.seed)?;
            (c.x, c.fallback)
        }
        Start::Random { seed } => (random_start(p, opts.k, seed), false),
    };
    center_and_scale(&mut x, npairs);
    let pr = pairs(p);
    let mut d = pair_distances(&x);
    let mut stress = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut dhat = fit_disparities(&dv, &d, opts.transform);
        let current = stress1(&d, &dhat).unwrap_or(0.0);
        if (stress - current).abs() < opts.tol * stress || current < 1e-12 {
            stress = current;
            converged = true;
            break;
        }
        stress = current;
        let ss: f64 = dhat.iter().map(|v| v * v).sum();
        if !(ss > 0.0) {
            break;
        }
        let s = (npairs / ss).sqrt();
        dhat.iter_mut().for_each(|v| *v *= s);
        // Guttman transform with unit weights: X ← B(X)·X / p
        let mut b = Matrix::zeros(p, p);
        for (&(i, j), (&dij, &hij)) in pr.iter().zip(d.iter().zip(&dhat)) {
            let v = if dij > 0.0 { -hij / dij } else { 0.0 };
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
        for i in 0..p {
            let s: f64 = (0..p).filter(|&j| j != i).map(|j| b[(i, j)]).sum();
            b[(i, i)] = -s;
        }
        x = b.matmul(&x).map(|v| v / p as f64);
        d = pair_distances(&x);
    }
    if !converged {
        let dhat = fit_disparities(&dv, &d, opts.transform);
        stress = stress1(&d, &dhat).unwrap_or(f64::INFINITY);
    }
    let degenerate = is_degenerate(&d, &dv);
    Ok(StartFit { start, x, stress1: stress, iterations, converged, degenerate, init_fallback })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsSolution {
    pub k: usize,
    pub transform: Transform,
    /// Principal-axis aligned, centered configuration (p × k).
    pub configuration: Matrix,
    pub pairs: Vec<(usize, usize)>,
    pub dissimilarities: Vec<f64>,
    pub distances: Vec<f64>,
    pub disparities: Vec<f64>,
    pub stress1: f64,
    pub rsq: Option<f64>,
    /// Intercept and slope of the interval transform.
    pub interval_fit: Option<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    pub best_start: Start,
    pub start_stress: Vec<f64>,
    /// Fewer than `4k + 1` objects.
    pub stability_warning: bool,
    /// Every start produced a degenerate configuration.
    pub degenerate: bool,
    pub init_fallback: bool,
}

/// Whether `p` objects are too few for a stable `k`-dimensional solution.
pub fn stability_warning(p: usize, k: usize) -> bool {
    p < 4 * k + 1
}

/// Pick the non-degenerate start with the lowest stress (earliest start on
/// ties) and assemble the final solution.
pub fn select_best(delta: &Dissimilarity, opts: &MdsOptions, fits: Vec<StartFit>) -> Result<MdsSolution> {
    if fits.is_empty() {
        return Err(Error::config("at least one start is required"));
    }
    let pick = |allow_degenerate: bool| {
        let mut best: Option<usize> = None;
        for (i, f) in fits.iter().enumerate() {
            if f.degenerate && !allow_degenerate {
                continue;
            }
            if best.is_none_or(|b| f.stress1 < fits[b].stress1) {
                best = Some(i);
            }
        }
        best
    };
    let (idx, degenerate) = match pick(false) {
        Some(i) => (i, false),
        None => (pick(true).unwrap(), true),
    };
    let start_stress = fits.iter().map(|f| f.stress1).collect();
    let restarts_used = fits.len();
    let f = fits.into_iter().nth(idx).unwrap();
    let dv = delta.pair_values();
    let mut x = rotate_principal(&f.x);
    // express distances on the scale of the dissimilarities
    let ss_d: f64 = pair_distances(&x).iter().map(|v| v * v).sum();
    let ss_delta: f64 = dv.iter().map(|v| v * v).sum();
    if ss_d > 0.0 && ss_delta > 0.0 {
        let s = (ss_delta / ss_d).sqrt();
        x = x.map(|v| v * s);
    }
    let distances = pair_distances(&x);
    let disparities = fit_disparities(&dv, &distances, opts.transform);
    let stress = stress1(&distances, &disparities)?;
    Ok(MdsSolution {
        k: opts.k,
        transform: opts.transform,
        configuration: x,
        pairs: pairs(delta.p()),
        interval_fit: match opts.transform {
            Transform::Interval => Some(affine_fit(&dv, &distances)),
            Transform::Ordinal => None,
        },
        rsq: rsq(&disparities, &distances).ok(),
        dissimilarities: dv,
        distances,
        disparities,
        stress1: stress,
        iterations: f.iterations,
        converged: f.converged,
        restarts_used,
        best_start: f.start,
        start_stress,
        stability_warning: stability_warning(delta.p(), opts.k),
        degenerate,
        init_fallback: f.init_fallback,
    })
}

/// All starts, run serially.
pub fn mds(delta: &Dissimilarity, opts: &MdsOptions) -> Result<MdsSolution> {
    check_dims(delta.p(), opts.k)?;
    let fits = starts(opts).into_iter().map(|s| fit_start(delta, opts, s)).collect::<Result<Vec<_>>>()?;
    select_best(delta, opts, fits)
}

pub fn nonmetric_mds(
    delta: &Dissimilarity,
    k: usize,
    seed: u64,
    restarts: usize,
    tol: f64,
    max_iter: usize,
) -> Result<MdsSolution> {
    mds(delta, &MdsOptions { k, transform: Transform::Ordinal, seed, restarts, tol, max_iter })
}

pub fn metric_mds(
    delta: &Dissimilarity,
    k: usize,
    seed: u64,
    restarts: usize,
    tol: f64,
    max_iter: usize,
) -> Result<MdsSolution> {
    mds(delta, &MdsOptions { k, transform: Transform::Interval, seed, restarts, tol, max_iter })
}

pub const MIN_BASELINE_TRIALS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressBaseline {
    pub p: usize,
    pub k: usize,
    pub trials: usize,
    pub mean: f64,
    pub p05: f64,
    pub stresses: Vec<f64>,
}

/// Random uniform dissimilarities for trial `t` of a baseline run.
pub fn random_dissimilarity(p: usize, seed: u64) -> Dissimilarity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::zeros(p, p);
    for (i, j) in pairs(p) {
        let v: f64 = rng.random();
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Dissimilarity { values: m, source: Source::External }
}

/// Stress of one baseline trial under `opts` (its seed is replaced).
pub fn baseline_trial(p: usize, opts: &MdsOptions, seed: u64, trial: usize) -> Result<f64> {
    let s = seed.wrapping_add(trial as u64);
    let delta = random_dissimilarity(p, s);
    let o = MdsOptions { seed: s, transform: Transform::Ordinal, ..*opts };
    Ok(mds(&delta, &o)?.stress1)
}

pub fn summarize_baseline(p: usize, k: usize, stresses: Vec<f64>) -> Result<StressBaseline> {
    if stresses.len() < MIN_BASELINE_TRIALS {
        return Err(Error::MinTrials { min: MIN_BASELINE_TRIALS, got: stresses.len() });
    }
    Ok(StressBaseline {
        p,
        k,
        trials: stresses.len(),
        mean: stats::mean(&stresses),
        p05: stats::quantile(&stresses, 0.05),
        stresses,
    })
}

/// Monte Carlo distribution of non-metric stress on uniform random
/// dissimilarities of `p` objects.
pub fn random_stress_baseline(p: usize, k: usize, trials: usize, seed: u64, opts: &MdsOptions) -> Result<StressBaseline> {
    if trials < MIN_BASELINE_TRIALS {
        return Err(Error::MinTrials { min: MIN_BASELINE_TRIALS, got: trials });
    }
    check_dims(p, k)?;
    let o = MdsOptions { k, ..*opts };
    let stresses = (0..trials).map(|t| baseline_trial(p, &o, seed, t)).collect::<Result<Vec<_>>>()?;
    summarize_baseline(p, k, stresses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;

    fn delta_of(x: &Matrix) -> Dissimilarity {
        Dissimilarity::new(distance_matrix(x), Source::External).unwrap()
    }

    #[test]
    fn dissimilarity_transform() {
        let v = Matrix::from_row_slice(3, 3, &[1.0, 1.0, -1.0, 1.0, 1.0, 0.5, -1.0, 0.5, 1.0]);
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| String::from(*s)).collect();
        let c = CorrMatrix::from_matrix(labels, v, CorrMethod::Pearson, 10).unwrap();
        let d = corr_to_dissimilarity(&c, DissimilarityTransform::OneMinusR).unwrap();
        assert_eq!(d.values[(0, 1)], 0.0);
        assert_eq!(d.values[(0, 2)], 2.0);
        assert_eq!(d.values[(1, 2)], 0.5);
        assert_eq!(d.values[(1, 1)], 0.0);
        let d = corr_to_dissimilarity(&c, DissimilarityTransform::Chord).unwrap();
        assert!((d.values[(1, 2)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classical_examples() {
        let eq = Matrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
        let c = classical_init(&eq, 2, 0).unwrap();
        let d = pair_distances(&c.x);
        assert!(d.iter().all(|v| (v - 1.0).abs() < 1e-8));
        let two = Matrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]);
        let c = classical_init(&two, 1, 0).unwrap();
        assert!((pair_distances(&c.x)[0] - 3.0).abs() < 1e-10);
        assert_eq!(classical_init(&two, 2, 0).unwrap_err().code(), "DIMENSION_ERROR");
        let zero = Matrix::zeros(3, 3);
        assert!(classical_init(&zero, 1, 0).unwrap().fallback);
    }

    #[test]
    fn stress_and_rsq_hand() {
        let d = [1.0, 2.0, 3.0];
        assert_eq!(stress1(&d, &d).unwrap(), 0.0);
        assert!((rsq(&d, &d).unwrap() - 1.0).abs() < 1e-12);
        let dh = [1.5, 1.5, 3.0];
        assert!((stress1(&d, &dh).unwrap() - (0.5f64 / 14.0).sqrt()).abs() < 1e-15);
        assert_eq!(rsq(&[2.0, 2.0, 2.0], &d).unwrap_err().code(), "DEGENERATE");
        assert_eq!(stress1(&[0.0, 0.0], &[1.0, 1.0]).unwrap_err().code(), "DEGENERATE");
    }

    #[test]
    fn principal_rotation_isometry() {
        let x = Matrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 2.0, 3.0, 1.0, -1.0, 4.0]);
        let y = rotate_principal(&x);
        let (a, b) = (pair_distances(&x), pair_distances(&y));
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
        let v0: f64 = y.column(0).iter().map(|v| v * v).sum();
        let v1: f64 = y.column(1).iter().map(|v| v * v).sum();
        assert!(v0 >= v1);
    }

    #[test]
    fn metric_exact_and_nonmetric_planted() {
        let x = Matrix::from_row_slice(
            6,
            2,
            &[0.0, 0.0, 1.0, 0.2, 2.1, 1.0, 0.3, 2.2, 1.7, 3.0, 3.1, 0.4],
        );
        let delta = delta_of(&x);
        let m = metric_mds(&delta, 2, 7, 3, 1e-10, 2000).unwrap();
        assert!(m.stress1 < 1e-6, "metric stress {}", m.stress1);
        let (a, b) = m.interval_fit.unwrap();
        assert!(a.abs() < 1e-4 && (b - 1.0).abs() < 1e-4);
        let n = nonmetric_mds(&delta, 2, 7, 3, 1e-8, 2000).unwrap();
        assert!(n.stress1 <= 0.01);
        assert!(stability_warning(6, 2));
        assert!(!stability_warning(9, 2));
    }

    #[test]
    fn baseline_min_trials() {
        let e = random_stress_baseline(10, 2, 1, 0, &MdsOptions::default()).unwrap_err();
        assert_eq!(e.code(), "MIN_TRIALS");
    }
}
