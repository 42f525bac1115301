//! Marching squares on a rectangular grid of samples.
//!
//! Coordinates are grid-index coordinates: vertex `(i, j)` sits at `(i, j)`
//! and a crossing on an edge sits at the linearly interpolated fraction.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Re,
    Im,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Re => "re",
            CurveKind::Im => "im",
        }
    }
}

/// A grid edge: horizontal edges join `(i, j)`–`(i+1, j)`, vertical ones
/// `(i, j)`–`(i, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// One straight piece of a level curve inside a single cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSegment {
    pub cell: (usize, usize),
    pub a: (f64, f64),
    pub b: (f64, f64),
    edges: (Edge, Edge),
}

/// A chain of connected segments, in the coordinates chosen by the caller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub kind: CurveKind,
    pub points: Vec<Complex64>,
}

/// Zero set of `field` (row-major, `field[j * nu + i]`) as cell segments.
/// Cells touching a non-finite sample are skipped; zero samples count as
/// positive. Four-crossing cells are resolved by the sign of the cell mean.
pub fn march(field: &[f64], nu: usize, nv: usize) -> Vec<CellSegment> {
    assert_eq!(field.len(), nu * nv);
    let at = |i: usize, j: usize| field[j * nu + i];
    let mut out = Vec::new();
    for j in 0..nv.saturating_sub(1) {
        for i in 0..nu.saturating_sub(1) {
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if corners.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let [p00, p10, p11, p01] = corners;
            let pos = |v: f64| v >= 0.0;
            let cross = |a: f64, b: f64| a / (a - b);
            // bottom, right, top, left
            let mut hits: Vec<(Edge, (f64, f64))> = Vec::with_capacity(4);
            if pos(p00) != pos(p10) {
                hits.push((Edge::H(i, j), (i as f64 + cross(p00, p10), j as f64)));
            }
            if pos(p10) != pos(p11) {
                hits.push((Edge::V(i + 1, j), ((i + 1) as f64, j as f64 + cross(p10, p11))));
            }
            if pos(p01) != pos(p11) {
                hits.push((Edge::H(i, j + 1), (i as f64 + cross(p01, p11), (j + 1) as f64)));
            }
            if pos(p00) != pos(p01) {
                hits.push((Edge::V(i, j), (i as f64, j as f64 + cross(p00, p01))));
            }
            let mut push = |x: (Edge, (f64, f64)), y: (Edge, (f64, f64))| {
                out.push(CellSegment {
                    cell: (i, j),
                    a: x.1,
                    b: y.1,
                    edges: (x.0, y.0),
                })
            };
            match hits.len() {
                2 => push(hits[0], hits[1]),
                4 => {
                    let centre = 0.25 * (p00 + p10 + p11 + p01);
                    if pos(centre) == pos(p00) {
                        // p00 and p11 joined through the centre: cut off p10 and p01
                        push(hits[0], hits[1]);
                        push(hits[2], hits[3]);
                    } else {
                        push(hits[0], hits[3]);
                        push(hits[1], hits[2]);
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Joins segments that share a grid edge into polylines.
pub fn chain(segments: &[CellSegment]) -> Vec<Vec<(f64, f64)>> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, s) in segments.iter().enumerate() {
        by_edge.entry(s.edges.0).or_default().push(k);
        by_edge.entry(s.edges.1).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let other = |k: usize, e: Edge| -> Option<usize> {
        by_edge[&e].iter().copied().find(|&m| m != k)
    };
    let walk = |start: usize, from: Edge, used: &mut Vec<bool>| {
        let mut pts = Vec::new();
        let mut k = start;
        let mut entry = from;
        loop {
            used[k] = true;
            let s = &segments[k];
            let (p_in, p_out, e_out) = if s.edges.0 == entry {
                (s.a, s.b, s.edges.1)
            } else {
                (s.b, s.a, s.edges.0)
            };
            if pts.is_empty() {
                pts.push(p_in);
            }
            pts.push(p_out);
            match other(k, e_out) {
                Some(m) if !used[m] => {
                    k = m;
                    entry = e_out;
                }
                _ => break,
            }
        }
        pts
    };
    // open curves start at an edge owned by a single segment
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let s = &segments[k];
        if by_edge[&s.edges.0].len() == 1 {
            lines.push(walk(k, s.edges.0, &mut used));
        } else if by_edge[&s.edges.1].len() == 1 {
            lines.push(walk(k, s.edges.1, &mut used));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            lines.push(walk(k, segments[k].edges.0, &mut used));
        }
    }
    lines
}

/// Intersection of two cell segments, allowing a small overshoot so that a
/// crossing sitting on a cell edge is not lost between neighbours.
pub fn segment_intersection(p: &CellSegment, q: &CellSegment) -> Option<(f64, f64)> {
    const SLACK: f64 = 0.25;
    let r = (p.b.0 - p.a.0, p.b.1 - p.a.1);
    let s = (q.b.0 - q.a.0, q.b.1 - q.a.1);
    let den = r.0 * s.1 - r.1 * s.0;
    if den == 0.0 {
        return None;
    }
    let w = (q.a.0 - p.a.0, q.a.1 - p.a.1);
    let t = (w.0 * s.1 - w.1 * s.0) / den;
    let u = (w.0 * r.1 - w.1 * r.0) / den;
    let ok = |x: f64| (-SLACK..=1.0 + SLACK).contains(&x);
    (ok(t) && ok(u)).then(|| (p.a.0 + t * r.0, p.a.1 + t * r.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(nu: usize, nv: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(nu * nv);
        for j in 0..nv {
            for i in 0..nu {
                v.push(f(i as f64, j as f64));
            }
        }
        v
    }

    #[test]
    fn circle_is_one_closed_polyline() {
        let field = sample(41, 41, |x, y| (x - 20.0).powi(2) + (y - 20.0).powi(2) - 100.0);
        let segs = march(&field, 41, 41);
        let lines = chain(&segs);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert_eq!(line.first(), line.last());
        for (x, y) in line {
            let r = ((x - 20.0).powi(2) + (y - 20.0).powi(2)).sqrt();
            assert!((r - 10.0).abs() < 0.1, "r = {r}");
        }
    }

    #[test]
    fn straight_line_is_open_and_exact() {
        let field = sample(11, 7, |x, y| 2.0 * x - y - 3.3);
        let lines = chain(&march(&field, 11, 7));
        assert_eq!(lines.len(), 1);
        for (x, y) in &lines[0] {
            assert!((2.0 * x - y - 3.3).abs() < 1e-12);
        }
    }

    #[test]
    fn crossing_lines_intersect_once() {
        let (nu, nv) = (21, 21);
        let f = sample(nu, nv, |x, y| x + 0.3 * y - 9.7);
        let g = sample(nu, nv, |x, y| -0.2 * x + y - 6.1);
        let sf = march(&f, nu, nv);
        let sg = march(&g, nu, nv);
        let mut hits = Vec::new();
        for p in &sf {
            for q in sg.iter().filter(|q| q.cell == p.cell) {
                if let Some(x) = segment_intersection(p, q) {
                    hits.push(x);
                }
            }
        }
        assert!(!hits.is_empty());
        // exact solution of the two linear equations
        let y = (6.1 + 0.2 * 9.7) / (1.0 + 0.06);
        let x = 9.7 - 0.3 * y;
        for (hx, hy) in hits {
            assert!((hx - x).abs() < 1e-9 && (hy - y).abs() < 1e-9);
        }
    }

    #[test]
    fn nan_cells_are_skipped() {
        let mut field = sample(5, 5, |x, _| x - 2.5);
        field[2 * 5 + 2] = f64::NAN;
        let segs = march(&field, 5, 5);
        assert!(segs.iter().all(|s| s.cell != (2, 2) && s.cell != (1, 1)));
        assert_eq!(segs.len(), 2);
    }

    #[test]
    fn saddle_resolved_by_centre() {
        // corners + - + - with positive mean
        let field = vec![1.0, -0.5, -0.5, 1.0];
        let segs = march(&field, 2, 2);
        assert_eq!(segs.len(), 2);
        for s in segs {
            let (ex, ey) = s.edges;
            // each segment cuts off a negative corner, (1,0) or (0,1)
            let pair = [ex, ey];
            let cuts_10 = pair.contains(&Edge::H(0, 0)) && pair.contains(&Edge::V(1, 0));
            let cuts_01 = pair.contains(&Edge::H(0, 1)) && pair.contains(&Edge::V(0, 0));
            assert!(cuts_10 || cuts_01);
        }
    }
}
