//! Deterministic SVG drawings of matchings, region tilings, edge
//! probabilities and the octic overlay for fortresses.

use std::fmt::Write as _;

use crate::diamond::{edge_vertices, CellSlot, Matching, Vertex};
use crate::probs::ProbGrid;
use crate::regions::{Point, RegionGraph, RegionTiling, TileKind};

/// Default contouring grid for the octic overlay, per side.
pub const DEFAULT_OVERLAY_RESOLUTION: usize = 800;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polygon {
        class: &'static str,
        points: Vec<Point>,
    },
    /// Disjoint segments drawn as one path.
    Segments {
        class: &'static str,
        segments: Vec<(Point, Point)>,
    },
    Line {
        class: &'static str,
        from: Point,
        to: Point,
        opacity: f64,
    },
}

/// Shapes in mathematical coordinates (y up), in drawing order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub shapes: Vec<Shape>,
}

const STYLE: &str = ".domino-n{fill:#d9534f}.domino-s{fill:#f0ad4e}.domino-e{fill:#5bc0de}.domino-w{fill:#5cb85c}\
.tile{fill:#f7f7f7}.shaded-square{fill:#808080}.triangle{fill:#ffffff}\
.domino-n,.domino-s,.domino-e,.domino-w,.tile,.shaded-square,.triangle{stroke:#000;stroke-width:0.04;stroke-linejoin:round}\
.edge{stroke:#1f4e79;stroke-width:0.25;stroke-linecap:round}.octic{fill:none;stroke:#c00;stroke-width:0.08}";

fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn pt(out: &mut String, (x, y): Point) {
    let _ = write!(out, "{},{}", num(x), num(-y));
}

impl Scene {
    pub fn new() -> Self {
        Scene::default()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn push(&mut self, shape: Shape) {
        self.shapes.push(shape);
    }

    /// Smallest box holding every shape, as `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let mut b: Option<(f64, f64, f64, f64)> = None;
        let mut take = |(x, y): Point| {
            b = Some(match b {
                None => (x, y, x, y),
                Some((a, c, d, e)) => (a.min(x), c.min(y), d.max(x), e.max(y)),
            });
        };
        for s in &self.shapes {
            match s {
                Shape::Polygon { points, .. } => points.iter().copied().for_each(&mut take),
                Shape::Segments { segments, .. } => segments.iter().for_each(|&(p, q)| {
                    take(p);
                    take(q);
                }),
                Shape::Line { from, to, .. } => {
                    take(*from);
                    take(*to);
                }
            }
        }
        b
    }

    pub fn to_svg(&self) -> String {
        let (x0, y0, x1, y1) = self.bounds().unwrap_or((0.0, 0.0, 0.0, 0.0));
        let pad = 0.5;
        let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
        let scale = if w.max(h) > 0.0 { 800.0 / w.max(h) } else { 1.0 };
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="{} {} {} {}">"#,
            num((w * scale).round()),
            num((h * scale).round()),
            num(x0 - pad),
            num(-y1 - pad),
            num(w),
            num(h)
        );
        let _ = writeln!(out, "<style>{STYLE}</style>");
        for s in &self.shapes {
            match s {
                Shape::Polygon { class, points } => {
                    let _ = write!(out, r#"<polygon class="{class}" points=""#);
                    for (i, &p) in points.iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        pt(&mut out, p);
                    }
                    out.push_str("\"/>\n");
                }
                Shape::Segments { class, segments } => {
                    let _ = write!(out, r#"<path class="{class}" d=""#);
                    for (i, &(p, q)) in segments.iter().enumerate() {
                        out.push_str(if i > 0 { " M" } else { "M" });
                        pt(&mut out, p);
                        out.push('L');
                        pt(&mut out, q);
                    }
                    out.push_str("\"/>\n");
                }
                Shape::Line { class, from, to, opacity } => {
                    let _ = write!(
                        out,
                        r#"<line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}" stroke-opacity="{}"/>"#,
                        num(from.0),
                        num(-from.1),
                        num(to.0),
                        num(-to.1),
                        num(*opacity)
                    );
                    out.push('\n');
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Convex hull, counterclockwise from the lowest-leftmost point.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-12 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn diamond_tile((x, y): Vertex) -> [Point; 4] {
    let (x, y) = (x as f64, y as f64);
    [(x - 1.0, y), (x, y + 1.0), (x + 1.0, y), (x, y - 1.0)]
}

fn domino_class(slot: CellSlot) -> &'static str {
    match slot {
        CellSlot::NW => "domino-n",
        CellSlot::NE => "domino-e",
        CellSlot::SW => "domino-w",
        CellSlot::SE => "domino-s",
    }
}

/// Dominoes dual to a diamond matching: each matched edge becomes the union
/// of its endpoints' unit squares.
pub fn matching_scene(m: &Matching) -> Scene {
    let mut scene = Scene::new();
    for e in m.edges() {
        let (p, q) = edge_vertices(m.order(), e).expect("matching edges lie in the diamond");
        let mut pts = diamond_tile(p).to_vec();
        pts.extend(diamond_tile(q));
        scene.push(Shape::Polygon { class: domino_class(e.slot), points: convex_hull(&pts) });
    }
    scene
}

/// Tiles of a region tiling: each matched region edge becomes the hull of
/// its two endpoint tiles. Square diabolos are shaded.
pub fn tiling_scene(region: &RegionGraph, tiling: &RegionTiling) -> Scene {
    let mut scene = Scene::new();
    for &idx in &tiling.edges {
        let edge = &region.graph.edges()[idx];
        let mut pts = region.tiles[edge.u].clone();
        pts.extend(region.tiles[edge.v].iter().copied());
        let class = match region.kinds[idx] {
            TileKind::Plain => "tile",
            TileKind::Square => "shaded-square",
            TileKind::Triangle => "triangle",
        };
        scene.push(Shape::Polygon { class, points: convex_hull(&pts) });
    }
    scene
}

/// Every diamond edge drawn with opacity equal to its probability.
pub fn probability_scene(probs: &ProbGrid<f64>) -> Scene {
    let n = probs.order();
    let mut scene = Scene::new();
    for (r, c, slot, &p) in probs.entries() {
        let (a, b) = edge_vertices(n, crate::diamond::EdgeRef::new(r, c, slot)).expect("edge of the diamond");
        scene.push(Shape::Line {
            class: "edge",
            from: (a.0 as f64, a.1 as f64),
            to: (b.0 as f64, b.1 as f64),
            opacity: p.clamp(0.0, 1.0),
        });
    }
    scene
}

/// The octic whose real components bound the frozen and tropical regions of
/// a large fortress with corners at `(0, ±2)` and `(±2, 0)`.
pub fn octic(x: f64, y: f64) -> f64 {
    let (x2, y2) = (x * x, y * y);
    let (x4, y4) = (x2 * x2, y2 * y2);
    400.0 * (x4 * x4 + y4 * y4)
        + 3400.0 * (x2 * y4 * y2 + y2 * x4 * x2)
        + 8025.0 * x4 * y4
        + 1000.0 * (x4 * x2 + y4 * y2)
        - 17250.0 * (x4 * y2 + x2 * y4)
        - 1431.0 * (x4 + y4)
        + 25812.0 * x2 * y2
        - 3402.0 * (x2 + y2)
        + 729.0
}

/// Zero set of `f` on `[lo, hi]^2` by marching squares on a
/// `resolution x resolution` grid.
pub fn contour(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64, resolution: usize) -> Vec<(Point, Point)> {
    let res = resolution.max(2);
    let step = (hi - lo) / res as f64;
    let at = |k: usize| lo + k as f64 * step;
    let mut row: Vec<f64> = (0..=res).map(|i| f(at(i), at(0))).collect();
    let mut segments = Vec::new();
    for j in 0..res {
        let next: Vec<f64> = (0..=res).map(|i| f(at(i), at(j + 1))).collect();
        for i in 0..res {
            // Corners counterclockwise from bottom-left.
            let corners = [
                (at(i), at(j), row[i]),
                (at(i + 1), at(j), row[i + 1]),
                (at(i + 1), at(j + 1), next[i + 1]),
                (at(i), at(j + 1), next[i]),
            ];
            let mut crossings: Vec<Point> = Vec::with_capacity(4);
            for k in 0..4 {
                let (xa, ya, va) = corners[k];
                let (xb, yb, vb) = corners[(k + 1) % 4];
                if (va < 0.0) != (vb < 0.0) {
                    let s = va / (va - vb);
                    crossings.push((xa + s * (xb - xa), ya + s * (yb - ya)));
                }
            }
            match crossings.len() {
                2 => segments.push((crossings[0], crossings[1])),
                4 => {
                    segments.push((crossings[0], crossings[1]));
                    segments.push((crossings[2], crossings[3]));
                }
                _ => {}
            }
        }
        row = next;
    }
    segments
}

/// Adds the octic curve to a fortress scene of order `n`, whose squares span
/// `[-n/2, n/2]^2`.
pub fn add_octic_overlay(scene: &mut Scene, n: usize, resolution: usize) {
    let scale = n as f64 / 4.0;
    let segments = contour(octic, -2.0, 2.0, resolution)
        .into_iter()
        .map(|(p, q)| {
            let map = |(x, y): Point| (scale * (x - y), scale * (x + y));
            (map(p), map(q))
        })
        .collect();
    scene.push(Shape::Segments { class: "octic", segments });
}
