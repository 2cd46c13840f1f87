//! Static SVG plots: scree plot, MDS map with cluster loops, dendrogram.

use std::fmt::Write;

use latentkit_core::Matrix;
use latentkit_core::cluster::Dendrogram;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<!-- generator: latentkit {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>", W / 2.0, escape(title));
    s
}

fn close(mut s: String) -> String {
    s.push_str("</svg>\n");
    s
}

/// Maps `[lo, hi]` onto `[a, b]`; a degenerate range maps to the midpoint.
fn scaler(lo: f64, hi: f64, a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |v| if hi > lo { a + (v - lo) / (hi - lo) * (b - a) } else { (a + b) / 2.0 }
}

fn axes(s: &mut String, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        s,
        "<path d=\"M{MARGIN} {MARGIN} V{} H{}\" fill=\"none\" stroke=\"black\"/>",
        H - MARGIN,
        W - MARGIN
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", W / 2.0, H - 20.0, escape(xlabel));
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>",
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

/// Eigenvalues of the full (and optionally reduced) correlation matrix with
/// a reference line at one.
pub fn scree(full: &[f64], reduced: &[f64]) -> String {
    let mut s = open("Scree plot");
    axes(&mut s, "Factor", "Eigenvalue");
    let n = full.len().max(reduced.len()).max(1);
    let top = full.iter().chain(reduced).copied().fold(1.0, f64::max);
    let bottom = reduced.iter().copied().fold(0.0, f64::min);
    let x = scaler(1.0, n as f64, MARGIN + 10.0, W - MARGIN - 10.0);
    let y = scaler(bottom, top, H - MARGIN, MARGIN + 10.0);
    let _ = writeln!(
        s,
        "<line x1=\"{MARGIN}\" y1=\"{:.2}\" x2=\"{}\" y2=\"{:.2}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>",
        y(1.0),
        W - MARGIN,
        y(1.0)
    );
    for i in 1..=n {
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{i}</text>", x(i as f64), H - MARGIN + 16.0);
    }
    for (series, colour, name) in [(full, PALETTE[0], "full"), (reduced, PALETTE[1], "reduced")] {
        if series.is_empty() {
            continue;
        }
        let pts: Vec<String> =
            series.iter().enumerate().map(|(i, v)| format!("{:.2},{:.2}", x((i + 1) as f64), y(*v))).collect();
        let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\"/>", pts.join(" "));
        for p in &pts {
            let (px, py) = p.split_once(',').unwrap();
            let _ = writeln!(s, "<circle cx=\"{px}\" cy=\"{py}\" r=\"3\" fill=\"{colour}\"><title>{name}</title></circle>");
        }
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" fill=\"{}\">full</text>", W - MARGIN - 60.0, MARGIN + 10.0, PALETTE[0]);
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" fill=\"{}\">reduced</text>", W - MARGIN - 60.0, MARGIN + 24.0, PALETTE[1]);
    close(s)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; collinear points are dropped.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn loop_path(points: &[(f64, f64)], pad: f64, colour: &str) -> String {
    let n = points.len() as f64;
    let c = (points.iter().map(|p| p.0).sum::<f64>() / n, points.iter().map(|p| p.1).sum::<f64>() / n);
    let hull = convex_hull(points.to_vec());
    if hull.len() >= 3 {
        let pushed: Vec<String> = hull
            .iter()
            .map(|p| {
                let (dx, dy) = (p.0 - c.0, p.1 - c.1);
                let len = (dx * dx + dy * dy).sqrt().max(1e-9);
                format!("{:.2},{:.2}", p.0 + dx / len * pad, p.1 + dy / len * pad)
            })
            .collect();
        return format!(
            "<polygon points=\"{}\" fill=\"{colour}\" fill-opacity=\"0.08\" stroke=\"{colour}\" stroke-linejoin=\"round\" stroke-width=\"1.5\"/>",
            pushed.join(" ")
        );
    }
    // one point or a collinear set: an ellipse along the spread
    let (a, b) = match hull.as_slice() {
        [a, b] => (*a, *b),
        _ => (c, c),
    };
    let half = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt() / 2.0;
    let angle = (b.1 - a.1).atan2(b.0 - a.0).to_degrees();
    format!(
        "<ellipse cx=\"{:.2}\" cy=\"{:.2}\" rx=\"{:.2}\" ry=\"{pad:.2}\" transform=\"rotate({angle:.2} {:.2} {:.2})\" fill=\"{colour}\" fill-opacity=\"0.08\" stroke=\"{colour}\" stroke-width=\"1.5\"/>",
        c.0,
        c.1,
        half + pad,
        c.0,
        c.1
    )
}

/// First two dimensions of an MDS configuration, labelled, with a loop
/// around each cluster when labels are given.
pub fn mds_map(labels: &[String], x: &Matrix, clusters: Option<&[usize]>, title: &str) -> String {
    let mut s = open(title);
    axes(&mut s, "Dimension 1", "Dimension 2");
    let col = |j: usize| -> Vec<f64> { if j < x.ncols() { x.column(j) } else { vec![0.0; x.nrows()] } };
    let (d1, d2) = (col(0), col(1));
    let span = d1.iter().chain(&d2).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12) * 1.15;
    let sx = scaler(-span, span, MARGIN + 20.0, W - MARGIN - 20.0);
    let sy = scaler(-span, span, H - MARGIN - 20.0, MARGIN + 20.0);
    let pts: Vec<(f64, f64)> = d1.iter().zip(&d2).map(|(a, b)| (sx(*a), sy(*b))).collect();
    if let Some(cl) = clusters {
        let k = cl.iter().copied().max().map_or(0, |m| m + 1);
        for c in 0..k {
            let members: Vec<(f64, f64)> = pts.iter().zip(cl).filter(|(_, l)| **l == c).map(|(p, _)| *p).collect();
            if !members.is_empty() {
                let _ = writeln!(s, "{}", loop_path(&members, 16.0, PALETTE[c % PALETTE.len()]));
            }
        }
    }
    let _ = writeln!(s, "<line x1=\"{:.2}\" y1=\"{MARGIN}\" x2=\"{:.2}\" y2=\"{}\" stroke=\"#ddd\"/>", sx(0.0), sx(0.0), H - MARGIN);
    let _ = writeln!(s, "<line x1=\"{MARGIN}\" y1=\"{:.2}\" x2=\"{}\" y2=\"{:.2}\" stroke=\"#ddd\"/>", sy(0.0), W - MARGIN, sy(0.0));
    for (i, (px, py)) in pts.iter().enumerate() {
        let colour = clusters.map_or("black", |cl| PALETTE[cl[i] % PALETTE.len()]);
        let _ = writeln!(s, "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{colour}\"/>");
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", px + 5.0, py - 5.0, escape(&labels[i]));
    }
    close(s)
}

/// Leaves in the left-to-right order implied by the merges.
pub fn leaf_order(tree: &Dendrogram) -> Vec<usize> {
    let p = tree.leaves;
    if tree.merges.is_empty() {
        return (0..p).collect();
    }
    let mut order = Vec::with_capacity(p);
    let mut stack = vec![tree.merges.last().unwrap().new_id];
    while let Some(id) = stack.pop() {
        if id < p {
            order.push(id);
        } else {
            let m = &tree.merges[id - p];
            stack.push(m.b);
            stack.push(m.a);
        }
    }
    order
}

pub fn dendrogram(tree: &Dendrogram, labels: &[String], title: &str) -> String {
    let mut s = open(title);
    let p = tree.leaves;
    let order = leaf_order(tree);
    let top = tree.merges.iter().map(|m| m.height).fold(0.0, f64::max);
    let sx = scaler(0.0, (p.max(2) - 1) as f64, MARGIN + 20.0, W - MARGIN - 20.0);
    let sy = scaler(0.0, top, H - MARGIN - 40.0, MARGIN + 10.0);
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">Height</text>",
        H / 2.0,
        H / 2.0
    );
    // x position and height for every node id
    let mut pos = vec![(0.0, 0.0); p + tree.merges.len()];
    for (slot, &leaf) in order.iter().enumerate() {
        pos[leaf] = (sx(slot as f64), 0.0);
        let (lx, ly) = (sx(slot as f64), H - MARGIN - 30.0);
        let _ = writeln!(
            s,
            "<text x=\"{lx:.2}\" y=\"{ly:.2}\" text-anchor=\"end\" transform=\"rotate(-60 {lx:.2} {ly:.2})\">{}</text>",
            escape(&labels[leaf])
        );
    }
    for m in &tree.merges {
        let (xa, ha) = pos[m.a];
        let (xb, hb) = pos[m.b];
        let _ = writeln!(
            s,
            "<path d=\"M{xa:.2} {:.2} V{:.2} H{xb:.2} V{:.2}\" fill=\"none\" stroke=\"black\"/>",
            sy(ha),
            sy(m.height),
            sy(hb)
        );
        pos[m.new_id] = ((xa + xb) / 2.0, m.height);
    }
    close(s)
}
