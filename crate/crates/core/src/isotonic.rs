//! Weighted isotonic (monotone non-decreasing) least-squares regression.

use alloc::vec;
use alloc::vec::Vec;

/// Pool-adjacent-violators fit of `y` (already in the target order) with
/// positive weights. Pooled blocks carry their weighted mean.
pub fn pava(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len(), "pava: one weight per value");
    // (weighted sum, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&v, &wt) in y.iter().zip(w) {
        blocks.push((v * wt, wt, 1));
        while blocks.len() > 1 {
            let (s1, w1, _) = blocks[blocks.len() - 1];
            let (s0, w0, _) = blocks[blocks.len() - 2];
            if s0 / w0 <= s1 / w1 {
                break;
            }
            let (s, wt, l) = blocks.pop().unwrap();
            let last = blocks.last_mut().unwrap();
            last.0 += s;
            last.1 += wt;
            last.2 += l;
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (s, wt, l) in blocks {
        out.extend(core::iter::repeat_n(s / wt, l));
    }
    out
}

pub fn pava_unweighted(y: &[f64]) -> Vec<f64> {
    pava(y, &vec![1.0; y.len()])
}

/// Monotone regression of `y` on the ordering of `x`, returned in the
/// original positions. Ties in `x` are handled by the primary approach:
/// tied observations may be reordered freely, so within a tie block they are
/// sorted by `y` before pooling.
pub fn monotone_fit_primary(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])).then(a.cmp(&b)));
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let fit = pava_unweighted(&ys);
    let mut out = vec![0.0; x.len()];
    for (k, &i) in order.iter().enumerate() {
        out[i] = fit[k];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pava_examples() {
        assert_eq!(pava_unweighted(&[3.0, 1.0, 2.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(pava_unweighted(&[1.0, 2.0, 2.0, 5.0]), vec![1.0, 2.0, 2.0, 5.0]);
        assert_eq!(pava(&[2.0, 1.0], &[3.0, 1.0]), vec![1.75, 1.75]);
        assert!(pava_unweighted(&[]).is_empty());
    }

    #[test]
    fn primary_ties_reorder_within_block() {
        // the tied pair (x = 1) can absorb the decrease without pooling
        let fit = monotone_fit_primary(&[1.0, 1.0, 2.0], &[3.0, 1.0, 3.0]);
        assert_eq!(fit, vec![3.0, 1.0, 3.0]);
        let fit = monotone_fit_primary(&[2.0, 1.0], &[1.0, 3.0]);
        assert_eq!(fit, vec![2.0, 2.0]);
    }
}
