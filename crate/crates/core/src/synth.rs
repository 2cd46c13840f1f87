//! Seeded synthetic data with known structure: Likert responses from a
//! common-factor model and planted point configurations.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::ResponseMatrix;
use crate::linalg::{self, Matrix};
use crate::mds::{self, Dissimilarity, Source};
use crate::{Error, Result};

/// Standard-normal cut points giving five equally likely categories.
pub const QUINTILE_THRESHOLDS: [f64; 4] = [-0.8416212335729143, -0.2533471031357997, 0.2533471031357997, 0.8416212335729143];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorModelSpec {
    pub loadings: Matrix,
    pub phi: Matrix,
    /// Unique variances; by default `1 − communality`.
    #[serde(default)]
    pub uniqueness: Option<Vec<f64>>,
    /// Ascending cut points shared by all items.
    pub thresholds: Vec<f64>,
    /// Per-item cut points overriding the shared ones.
    #[serde(default)]
    pub item_thresholds: Option<Vec<Vec<f64>>>,
    pub scale_min: i32,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub item_ids: Option<Vec<String>>,
}

impl FactorModelSpec {
    pub fn new(loadings: Matrix, phi: Matrix, n: usize, seed: u64) -> Self {
        FactorModelSpec {
            loadings,
            phi,
            uniqueness: None,
            thresholds: QUINTILE_THRESHOLDS.to_vec(),
            item_thresholds: None,
            scale_min: 1,
            n,
            seed,
            item_ids: None,
        }
    }

    pub fn p(&self) -> usize {
        self.loadings.nrows()
    }

    pub fn m(&self) -> usize {
        self.loadings.ncols()
    }

    pub fn ids(&self) -> Vec<String> {
        match &self.item_ids {
            Some(ids) => ids.clone(),
            None => (1..=self.p()).map(|i| format!("item{i:02}")).collect(),
        }
    }

    fn thresholds_for(&self, item: usize) -> &[f64] {
        match &self.item_thresholds {
            Some(t) => &t[item],
            None => &self.thresholds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (p, m) = (self.p(), self.m());
        if p == 0 || m == 0 {
            return Err(Error::config("loadings must be nonempty"));
        }
        if self.phi.nrows() != m || self.phi.ncols() != m {
            return Err(Error::Dimension(format!("phi must be {m}×{m}")));
        }
        if !self.phi.is_symmetric(1e-12) || self.phi.diagonal().iter().any(|d| (d - 1.0).abs() > 1e-12) {
            return Err(Error::Domain("phi must be symmetric with unit diagonal".into()));
        }
        if let Some(u) = &self.uniqueness
            && (u.len() != p || u.iter().any(|v| !(*v >= 0.0))) {
                return Err(Error::Domain("uniqueness needs p nonnegative values".into()));
            }
        let check = |t: &[f64]| t.windows(2).all(|w| w[0] < w[1]);
        match &self.item_thresholds {
            Some(t) if t.len() != p || !t.iter().all(|v| check(v)) => {
                Err(Error::config("item thresholds must be p ascending lists"))
            }
            None if !check(&self.thresholds) => Err(Error::config("thresholds must be ascending")),
            _ => Ok(()),
        }
    }
}

/// Loadings for `m` consecutive blocks of `p/m` items, each block loading on
/// its own factor with values spaced evenly over `[lo, hi]`.
pub fn block_loadings(p: usize, m: usize, lo: f64, hi: f64) -> Matrix {
    let per = p.div_ceil(m);
    Matrix::from_fn(p, m, |i, j| {
        if i / per != j {
            return 0.0;
        }
        let pos = i % per;
        if per == 1 { hi } else { hi - (hi - lo) * pos as f64 / (per - 1) as f64 }
    })
}

/// Factor index of each item's largest absolute loading.
pub fn planted_membership(loadings: &Matrix) -> Vec<usize> {
    (0..loadings.nrows())
        .map(|i| {
            let row = loadings.row(i);
            (0..row.len()).fold(0, |b, j| if row[j].abs() > row[b].abs() { j } else { b })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub correlation: Matrix,
    pub uniqueness: Vec<f64>,
    /// The implied diagonal was not one and the matrix was rescaled.
    pub rescaled: bool,
}

/// `ΛΦΛᵀ + Ψ`, rescaled to unit diagonal when Ψ does not complete it.
pub fn population(spec: &FactorModelSpec) -> Result<Population> {
    spec.validate()?;
    let common = spec.loadings.matmul(&spec.phi).matmul(&spec.loadings.transpose());
    let h2 = common.diagonal();
    let uniqueness = match &spec.uniqueness {
        Some(u) => u.clone(),
        None => {
            if let Some(i) = h2.iter().position(|h| *h > 1.0) {
                return Err(Error::Domain(format!("item {i} has communality {} > 1", h2[i])));
            }
            h2.iter().map(|h| 1.0 - h).collect()
        }
    };
    let p = spec.p();
    let diag: Vec<f64> = (0..p).map(|i| h2[i] + uniqueness[i]).collect();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Domain("an item has zero implied variance".into()));
    }
    let rescaled = diag.iter().any(|d| (d - 1.0).abs() > 1e-12);
    let correlation = Matrix::from_fn(p, p, |i, j| {
        let v = if i == j { diag[i] } else { common[(i, j)] };
        v / (diag[i] * diag[j]).sqrt()
    });
    Ok(Population { correlation, uniqueness, rescaled })
}

fn respondent_rng(seed: u64, respondent: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(respondent as u64);
    rng
}

/// Continuous standardized item scores (n × p). Respondent `r` draws from
/// its own ChaCha stream, so any subset can be regenerated independently.
pub fn gen_latent(spec: &FactorModelSpec) -> Result<Matrix> {
    let pop = population(spec)?;
    let chol = linalg::cholesky(&spec.phi).map_err(|_| Error::Domain("phi is not positive definite".into()))?;
    let (p, m) = (spec.p(), spec.m());
    let scale: Vec<f64> = (0..p)
        .map(|i| {
            let h2: f64 = (0..m)
                .flat_map(|a| (0..m).map(move |b| (a, b)))
                .map(|(a, b)| spec.loadings[(i, a)] * spec.phi[(a, b)] * spec.loadings[(i, b)])
                .sum();
            (h2 + pop.uniqueness[i]).sqrt()
        })
        .collect();
    let psi_sd: Vec<f64> = pop.uniqueness.iter().map(|u| u.sqrt()).collect();
    let mut out = Matrix::zeros(spec.n, p);
    for r in 0..spec.n {
        let mut rng = respondent_rng(spec.seed, r);
        let z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let f: Vec<f64> = (0..m).map(|a| (0..=a).map(|b| chol[(a, b)] * z[b]).sum()).collect();
        for i in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            let common: f64 = (0..m).map(|a| spec.loadings[(i, a)] * f[a]).sum();
            out[(r, i)] = (common + psi_sd[i] * e) / scale[i];
        }
    }
    Ok(out)
}

/// Likert responses: latent scores cut at the thresholds.
pub fn gen_likert(spec: &FactorModelSpec) -> Result<ResponseMatrix> {
    let latent = gen_latent(spec)?;
    let p = spec.p();
    let rows = (0..spec.n)
        .map(|r| {
            (0..p)
                .map(|i| {
                    let cat = spec.thresholds_for(i).iter().filter(|t| latent[(r, i)] > **t).count();
                    Some(spec.scale_min + cat as i32)
                })
                .collect()
        })
        .collect();
    let kmax = (0..p).map(|i| spec.thresholds_for(i).len()).max().unwrap_or(0);
    let ids = (1..=spec.n).map(|r| format!("s{r:05}")).collect();
    ResponseMatrix::new(ids, spec.ids(), spec.scale_min, spec.scale_min + kmax as i32, rows)
}

/// Seeded coordinates uniform in `[−spread, spread]^k` and their distances,
/// optionally multiplied by `1 + noise·u` with `u` uniform in `[−1, 1]`.
pub fn planted_points(p: usize, k: usize, spread: f64, noise: f64, seed: u64) -> Result<(Matrix, Dissimilarity)> {
    if p <= k || k == 0 {
        return Err(Error::Dimension(format!("{p} points in {k} dimensions")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Matrix::from_fn(p, k, |_, _| rng.random_range(-spread..=spread));
    let mut d = mds::distance_matrix(&x);
    if noise > 0.0 {
        for (i, j) in mds::pairs(p) {
            let u: f64 = rng.random_range(-1.0..=1.0);
            let v = (d[(i, j)] * (1.0 + noise * u)).max(0.0);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok((x, Dissimilarity::new(d, Source::External)?))
}
