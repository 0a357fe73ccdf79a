//! Planar polygons and convex clipping.
//!
//! Polygons are stored as a counter-clockwise vertex ring without a repeated
//! closing vertex. All clipping is Sutherland-Hodgman against convex clip
//! regions, which is exact for any (possibly non-convex) subject polygon.

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Vertices closer than this are merged after clipping.
const MERGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point2<f64>>,
}

impl Polygon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a polygon from a vertex ring, normalising it to counter-clockwise
    /// order. Rings with fewer than three distinct vertices collapse to empty.
    pub fn new(vertices: Vec<Point2<f64>>) -> Self {
        let mut poly = Self { vertices };
        poly.cleanup();
        if poly.signed_area() < 0.0 {
            poly.vertices.reverse();
        }
        poly
    }

    /// Regular `n`-gon inscribed in the circle of `radius` around `center`,
    /// first vertex at angle `phase`.
    pub fn regular(center: Point2<f64>, radius: f64, n: usize, phase: f64) -> Self {
        let n = n.max(3);
        let vertices = (0..n)
            .map(|i| {
                let a = phase + TAU * i as f64 / n as f64;
                center + Vector2::new(radius * a.cos(), radius * a.sin())
            })
            .collect();
        Self { vertices }
    }

    /// Disc approximation whose vertex spacing matches `angular_resolution`.
    pub fn disc(center: Point2<f64>, radius: f64, angular_resolution: f64, phase: f64) -> Self {
        Self::regular(center, radius, segments_for(angular_resolution), phase)
    }

    /// Axis-aligned rectangle, mostly useful in tests and examples.
    pub fn rectangle(min: Point2<f64>, max: Point2<f64>) -> Self {
        Self::new(vec![
            min,
            Point2::new(max.x, min.y),
            max,
            Point2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            acc += a.x * b.y - b.x * a.y;
        }
        0.5 * acc
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Option<Point2<f64>> {
        let a = self.signed_area();
        if a.abs() < f64::EPSILON {
            return None;
        }
        let n = self.vertices.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let cross = p.x * q.y - q.x * p.y;
            cx += (p.x + q.x) * cross;
            cy += (p.y + q.y) * cross;
        }
        Some(Point2::new(cx / (6.0 * a), cy / (6.0 * a)))
    }

    /// Even-odd point membership; boundary points count as inside.
    pub fn contains(&self, p: &Point2<f64>) -> bool {
        if self.is_empty() {
            return false;
        }
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if on_segment(p, &a, &b) {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Keeps the part of the polygon where `normal · p + offset >= 0`.
    pub fn clip_half_plane(&self, normal: Vector2<f64>, offset: f64) -> Polygon {
        if self.is_empty() {
            return Polygon::empty();
        }
        let mut out = Vec::new();
        if !clip_ring(&self.vertices, normal, offset, &mut out) {
            return self.clone();
        }
        let mut poly = Polygon { vertices: out };
        poly.cleanup();
        poly
    }

    /// Intersection with a convex clip polygon (counter-clockwise).
    pub fn clip_convex(&self, clipper: &Polygon) -> Polygon {
        if self.is_empty() || clipper.is_empty() {
            return Polygon::empty();
        }
        let (center, radius) = self.bounding_circle();
        let m = clipper.vertices.len();
        let mut ring = self.vertices.clone();
        let mut scratch = Vec::with_capacity(ring.len() + 2);
        for i in 0..m {
            let a = clipper.vertices[i];
            let b = clipper.vertices[(i + 1) % m];
            let edge = b - a;
            // inward normal of a CCW edge
            let normal = Vector2::new(-edge.y, edge.x);
            let len = normal.norm();
            if len == 0.0 || normal.dot(&(center - a)) >= radius * len {
                continue;
            }
            if clip_ring(&ring, normal, -normal.dot(&a.coords), &mut scratch) {
                std::mem::swap(&mut ring, &mut scratch);
                if ring.len() < 3 {
                    return Polygon::empty();
                }
            }
        }
        let mut poly = Polygon { vertices: ring };
        poly.cleanup();
        poly
    }

    /// A circle enclosing every vertex (not the minimal one).
    fn bounding_circle(&self) -> (Point2<f64>, f64) {
        let n = self.vertices.len() as f64;
        let sum = self
            .vertices
            .iter()
            .fold(Vector2::zeros(), |acc, p| acc + p.coords);
        let center = Point2::from(sum / n);
        let radius = self
            .vertices
            .iter()
            .map(|p| (p - center).norm())
            .fold(0.0, f64::max);
        (center, radius)
    }

    /// Removes consecutive duplicates and collapses degenerate rings.
    fn cleanup(&mut self) {
        let mut cleaned: Vec<Point2<f64>> = Vec::with_capacity(self.vertices.len());
        for p in self.vertices.drain(..) {
            if cleaned
                .last()
                .is_none_or(|q: &Point2<f64>| (p - q).norm() > MERGE_EPS)
            {
                cleaned.push(p);
            }
        }
        while cleaned.len() > 1 && (cleaned[0] - cleaned[cleaned.len() - 1]).norm() <= MERGE_EPS {
            cleaned.pop();
        }
        if cleaned.len() < 3 {
            cleaned.clear();
        }
        self.vertices = cleaned;
    }
}

/// Sutherland-Hodgman step keeping `normal · p + offset >= 0`. Writes the
/// clipped ring into `out` and returns true, or returns false without touching
/// `out` when every vertex is already inside.
fn clip_ring(
    ring: &[Point2<f64>],
    normal: Vector2<f64>,
    offset: f64,
    out: &mut Vec<Point2<f64>>,
) -> bool {
    let side = |p: &Point2<f64>| normal.dot(&p.coords) + offset;
    if ring.iter().all(|p| side(p) >= 0.0) {
        return false;
    }
    out.clear();
    let n = ring.len();
    let mut sc = side(&ring[0]);
    for i in 0..n {
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let sn = side(&next);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc >= 0.0) != (sn >= 0.0) {
            let t = sc / (sc - sn);
            out.push(cur + (next - cur) * t);
        }
        sc = sn;
    }
    true
}

/// Number of polygon segments used to approximate a full circle.
pub fn segments_for(angular_resolution: f64) -> usize {
    ((TAU / angular_resolution).ceil() as usize).max(8)
}

fn on_segment(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> bool {
    let ab = b - a;
    let ap = p - a;
    let cross = ab.x * ap.y - ab.y * ap.x;
    if cross.abs() > 1e-12 * (1.0 + ab.norm()) {
        return false;
    }
    let dot = ap.dot(&ab);
    dot >= 0.0 && dot <= ab.norm_squared()
}
