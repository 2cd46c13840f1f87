//! Agglomerative hierarchical clustering (single linkage by default).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    #[default]
    Single,
    Average,
}

/// One agglomeration step. Leaves are `0..p`; the cluster formed by merge
/// `s` gets id `p + s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub new_id: usize,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub linkage: Linkage,
    pub merges: Vec<Merge>,
}

/// Squared Euclidean distances between rows of `x`.
pub fn squared_euclidean(x: &Matrix) -> Matrix {
    let p = x.nrows();
    Matrix::from_fn(p, p, |i, j| x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Agglomerate on a symmetric distance matrix. The closest pair of active
/// clusters merges first; equal distances go to the smallest `(a, b)` ids.
pub fn agglomerate(d: &Matrix, linkage: Linkage) -> Result<Dendrogram> {
    let p = d.nrows();
    if !d.is_square() || p < 2 {
        return Err(Error::Dimension("clustering needs a square matrix of at least 2 objects".into()));
    }
    if !d.is_symmetric(1e-12) {
        return Err(Error::Domain("distance matrix is not symmetric".into()));
    }
    // distances between active clusters keyed by (smaller id, larger id)
    let mut dist: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..p {
        for j in (i + 1)..p {
            dist.insert((i, j), d[(i, j)]);
        }
    }
    let mut size: BTreeMap<usize, usize> = (0..p).map(|i| (i, 1)).collect();
    let mut merges = Vec::with_capacity(p - 1);
    for step in 0..p - 1 {
        let (&(a, b), &h) = dist
            .iter()
            .min_by(|x, y| x.1.total_cmp(y.1).then(x.0.cmp(y.0)))
            .expect("at least one active pair");
        let new_id = p + step;
        let (na, nb) = (size[&a], size[&b]);
        let others: Vec<usize> = size.keys().copied().filter(|&c| c != a && c != b).collect();
        let get = |m: &BTreeMap<(usize, usize), f64>, x: usize, y: usize| m[&(x.min(y), x.max(y))];
        let mut updates = Vec::with_capacity(others.len());
        for &c in &others {
            let (da, db) = (get(&dist, a, c), get(&dist, b, c));
            let v = match linkage {
                Linkage::Single => da.min(db),
                Linkage::Average => (na as f64 * da + nb as f64 * db) / (na + nb) as f64,
            };
            updates.push((c, v));
        }
        dist.retain(|&(x, y), _| x != a && x != b && y != a && y != b);
        for (c, v) in updates {
            dist.insert((c, new_id), v);
        }
        size.remove(&a);
        size.remove(&b);
        size.insert(new_id, na + nb);
        merges.push(Merge { a, b, height: h, new_id, size: na + nb });
    }
    Ok(Dendrogram { leaves: p, linkage, merges })
}

pub fn single_linkage(d: &Matrix) -> Result<Dendrogram> {
    agglomerate(d, Linkage::Single)
}

/// Single linkage on squared Euclidean distances between configuration rows.
pub fn single_linkage_points(x: &Matrix) -> Result<Dendrogram> {
    agglomerate(&squared_euclidean(x), Linkage::Single)
}

/// Flat clustering into `k` groups by undoing the last `k − 1` merges.
/// Labels are numbered by first appearance in leaf order.
pub fn cut(tree: &Dendrogram, k: usize) -> Result<Vec<usize>> {
    let p = tree.leaves;
    if k == 0 || k > p {
        return Err(Error::Domain(format!("cut level {k} not in 1..={p}")));
    }
    // union-find over the first p − k merges
    let mut parent: Vec<usize> = (0..2 * p).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in tree.merges.iter().take(p - k) {
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = m.new_id;
        parent[rb] = m.new_id;
    }
    let mut labels = vec![0; p];
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, label) in labels.iter_mut().enumerate() {
        let r = find(&mut parent, i);
        let next = seen.len();
        *label = *seen.entry(r).or_insert(next);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> Matrix {
        Matrix::from_row_slice(3, 3, &[0.0, 1.0, 5.0, 1.0, 0.0, 4.0, 5.0, 4.0, 0.0])
    }

    #[test]
    fn hand_trace() {
        let t = single_linkage(&three()).unwrap();
        assert_eq!((t.merges[0].a, t.merges[0].b, t.merges[0].height), (0, 1, 1.0));
        assert_eq!((t.merges[1].a, t.merges[1].b, t.merges[1].height), (2, 3, 4.0));
        assert_eq!(cut(&t, 2).unwrap(), vec![0, 0, 1]);
        assert_eq!(cut(&t, 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(cut(&t, 1).unwrap(), vec![0, 0, 0]);
        assert_eq!(cut(&t, 0).unwrap_err().code(), "DOMAIN_ERROR");
        assert_eq!(cut(&t, 4).unwrap_err().code(), "DOMAIN_ERROR");
        let t = agglomerate(&three(), Linkage::Average).unwrap();
        assert_eq!(t.merges[1].height, 4.5);
    }

    #[test]
    fn identical_points_merge_at_zero() {
        let x = Matrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 4.0, 5.0]);
        let t = single_linkage_points(&x).unwrap();
        assert_eq!(t.merges[0].height, 0.0);
        assert_eq!(t.merges[1].height, 25.0);
    }
}
