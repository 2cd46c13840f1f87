//! Independent brute-force oracles for the core numerical routines.

use latentkit_core::cluster::{self, Linkage};
use latentkit_core::inference::{self, MwMode, PostHoc, TVariant, Tails};
use latentkit_core::isotonic::pava;
use latentkit_core::mds::{self, distance_matrix};
use latentkit_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Least-squares isotonic fit by enumerating every partition of the
/// sequence into contiguous blocks, keeping only partitions whose block
/// means are non-decreasing.
fn isotonic_oracle(y: &[f64], w: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for cuts in 0u32..(1 << (n - 1)) {
        let mut fit = vec![0.0; n];
        let mut start = 0;
        let mut prev = f64::NEG_INFINITY;
        let mut ok = true;
        for end in 1..=n {
            if end == n || cuts & (1 << (end - 1)) != 0 {
                let sw: f64 = w[start..end].iter().sum();
                let m = (start..end).map(|i| w[i] * y[i]).sum::<f64>() / sw;
                if m < prev - 1e-12 {
                    ok = false;
                    break;
                }
                prev = m;
                fit[start..end].iter_mut().for_each(|v| *v = m);
                start = end;
            }
        }
        if !ok {
            continue;
        }
        let sse: f64 = (0..n).map(|i| w[i] * (y[i] - fit[i]).powi(2)).sum();
        if best.as_ref().is_none_or(|b| sse < b.0 - 1e-12) {
            best = Some((sse, fit));
        }
    }
    best.unwrap().1
}

#[test]
fn pava_matches_block_partition_oracle_exhaustively() {
    for n in 0..=6u32 {
        for code in 0..3u32.pow(n) {
            let y: Vec<f64> = (0..n).map(|i| f64::from(code / 3u32.pow(i) % 3 + 1)).collect();
            let w = vec![1.0; y.len()];
            let got = pava(&y, &w);
            let want = isotonic_oracle(&y, &w);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12, "y = {y:?}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn weighted_pava_matches_oracle_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..400 {
        let n = rng.random_range(1..=8);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let got = pava(&y, &w);
        let want = isotonic_oracle(&y, &w);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{y:?} {w:?}");
        }
    }
}

/// U of group `a` by direct pair counting.
fn u_by_pairs(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

fn split(pooled: &[f64], mask: u32) -> (Vec<f64>, Vec<f64>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, v) in pooled.iter().enumerate() {
        if mask & (1 << i) != 0 { a.push(*v) } else { b.push(*v) }
    }
    (a, b)
}

#[test]
fn exact_mann_whitney_matches_enumeration() {
    let pools: Vec<Vec<f64>> = vec![
        vec![1.0, 2.0],
        vec![3.0, 1.0, 2.0],
        vec![1.0, 1.0, 2.0, 3.0],
        vec![5.0, 3.0, 3.0, 1.0, 4.0],
        vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        vec![2.0, 2.0, 2.0, 1.0, 3.0, 3.0, 4.0],
        vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        vec![4.0, 1.0, 4.0, 2.0, 5.0, 2.0, 3.0, 5.0, 1.0],
        vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0],
        vec![3.0, 3.0, 1.0, 2.0, 5.0, 4.0, 4.0, 5.0, 1.0, 3.0],
    ];
    for pooled in pools {
        let n = pooled.len();
        let masks: Vec<u32> = (1u32..(1 << n) - 1).collect();
        let us: Vec<f64> = masks
            .iter()
            .map(|&m| {
                let (a, b) = split(&pooled, m);
                u_by_pairs(&a, &b)
            })
            .collect();
        for (k, &mask) in masks.iter().enumerate() {
            let na = mask.count_ones();
            let (a, b) = split(&pooled, mask);
            let centre = (a.len() * b.len()) as f64 / 2.0;
            let obs = us[k];
            let same: Vec<f64> =
                masks.iter().zip(&us).filter(|(m, _)| m.count_ones() == na).map(|(_, u)| *u).collect();
            let total = same.len() as f64;
            let frac = |f: &dyn Fn(f64) -> bool| same.iter().filter(|u| f(**u)).count() as f64 / total;
            let want_two = frac(&|u| (u - centre).abs() >= (obs - centre).abs() - 1e-9);
            let want_less = frac(&|u| u <= obs + 1e-9);
            let want_greater = frac(&|u| u >= obs - 1e-9);
            for (tails, want) in
                [(Tails::TwoSided, want_two), (Tails::Less, want_less), (Tails::Greater, want_greater)]
            {
                let got = inference::mann_whitney(&a, &b, MwMode::Exact, tails).unwrap();
                assert!((got.statistic - obs).abs() < 1e-12);
                assert!((got.p_value - want).abs() < 1e-12, "{pooled:?} mask {mask:b} {tails:?}");
            }
        }
    }
}

#[test]
fn two_group_anova_equals_t_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let na = rng.random_range(2..30);
        let nb = rng.random_range(2..30);
        let a: Vec<f64> = (0..na).map(|_| rng.random_range(0.0..10.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random_range(1.0..12.0)).collect();
        let t = inference::t_test(&a, &b, TVariant::Student, Tails::TwoSided).unwrap();
        let f = inference::one_way_anova(&[a, b]).unwrap();
        let t2 = t.statistic * t.statistic;
        assert!((f.statistic - t2).abs() < 1e-10 * t2.max(1.0));
        assert!((f.p_value - t.p_value).abs() < 1e-9);
    }
}

#[test]
fn single_standardized_predictor_beta_equals_r() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.random_range(5..60);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.7 * v + rng.random_range(-4.0..4.0)).collect();
        let reg = inference::ols(&y, &Matrix::from_fn(n, 1, |i, _| x[i]), &["x".to_string()], true).unwrap();
        let r = inference::correlate(&x, &y, inference::CorrelationKind::Pearson, Tails::TwoSided).unwrap();
        assert!((reg.coefficients[1].beta.unwrap() - r.statistic).abs() < 1e-12);
    }
}

#[test]
fn bonferroni_examples() {
    assert!((inference::bonferroni(0.01, 3) - 0.03).abs() < 1e-15);
    assert_eq!(inference::bonferroni(0.5, 3), 1.0);
    let g = vec![vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0], vec![6.0, 7.0, 8.0]];
    let lsd = inference::posthoc(&g, PostHoc::Lsd).unwrap();
    let bon = inference::posthoc(&g, PostHoc::Bonferroni).unwrap();
    for (l, b) in lsd.iter().zip(&bon) {
        assert!((b.p_adjusted - (3.0 * l.p_adjusted).min(1.0_f64)).abs() < 1e-15);
    }
}

/// Agglomeration recomputed from scratch at every step.
fn brute_single_linkage(d: &Matrix) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let p = d.nrows();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..p).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..p - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in (x + 1)..clusters.len() {
                let mut h = f64::INFINITY;
                for &i in &clusters[x].1 {
                    for &j in &clusters[y].1 {
                        h = h.min(d[(i, j)]);
                    }
                }
                let ids = (clusters[x].0.min(clusters[y].0), clusters[x].0.max(clusters[y].0));
                let better = match best {
                    None => true,
                    Some((bh, bx, by)) => {
                        let bids = (clusters[bx].0.min(clusters[by].0), clusters[bx].0.max(clusters[by].0));
                        h < bh || (h == bh && ids < bids)
                    }
                };
                if better {
                    best = Some((h, x, y));
                }
            }
        }
        let (h, x, y) = best.unwrap();
        let cy = clusters.remove(y);
        let cx = clusters.remove(x);
        let mut merged = cx.1.clone();
        merged.extend(&cy.1);
        merged.sort();
        let (mut a, mut b) = (cx.1, cy.1);
        a.sort();
        b.sort();
        out.push((a, b, h));
        clusters.push((p + step, merged));
    }
    out
}

fn members(tree: &cluster::Dendrogram, id: usize) -> Vec<usize> {
    if id < tree.leaves {
        return vec![id];
    }
    let m = &tree.merges[id - tree.leaves];
    let mut v = members(tree, m.a);
    v.extend(members(tree, m.b));
    v.sort();
    v
}

#[test]
fn single_linkage_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..200 {
        let p = rng.random_range(2..=10);
        let mut d = Matrix::zeros(p, p);
        for i in 0..p {
            for j in (i + 1)..p {
                // coarse values force ties in some trials
                let v = if trial % 2 == 0 { f64::from(rng.random_range(1..5)) } else { rng.random::<f64>() };
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        let tree = cluster::single_linkage(&d).unwrap();
        let oracle = brute_single_linkage(&d);
        assert_eq!(tree.merges.len(), p - 1);
        for (m, (a, b, h)) in tree.merges.iter().zip(&oracle) {
            assert_eq!(m.height, *h);
            let (ma, mb) = (members(&tree, m.a), members(&tree, m.b));
            assert!((&ma, &mb) == (a, b) || (&ma, &mb) == (b, a), "trial {trial}");
        }
    }
    let _ = Linkage::Average;
}

#[test]
fn classical_scaling_recovers_planted_configuration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let p = rng.random_range(3..12);
        let x = Matrix::from_fn(p, 2, |_, _| rng.random_range(-2.0..2.0));
        let d = distance_matrix(&x);
        let c = mds::classical_init(&d, 2, 0).unwrap();
        let e = distance_matrix(&c.x);
        // congruent configurations have identical distance matrices
        assert!(e.max_abs_diff(&d) < 1e-8);
    }
}

#[test]
fn principal_rotation_matches_coordinate_pca() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = Matrix::from_fn(12, 2, |_, j| rng.random_range(-1.0..1.0) * if j == 0 { 1.0 } else { 3.0 });
    let y = mds::rotate_principal(&x);
    // PCA oracle: the 2×2 scatter of the rotated coordinates is diagonal
    let s01: f64 = (0..12).map(|i| y[(i, 0)] * y[(i, 1)]).sum();
    assert!(s01.abs() < 1e-10);
    // and its diagonal holds the eigenvalues of the original scatter
    let m: Vec<f64> = (0..2).map(|j| x.column(j).iter().sum::<f64>() / 12.0).collect();
    let c = Matrix::from_fn(12, 2, |i, j| x[(i, j)] - m[j]);
    let s = c.transpose().matmul(&c);
    let tr = s[(0, 0)] + s[(1, 1)];
    let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
    let l1 = tr / 2.0 + (tr * tr / 4.0 - det).sqrt();
    let v0: f64 = y.column(0).iter().map(|v| v * v).sum();
    assert!((v0 - l1).abs() < 1e-9);
}
