//! Planar primitives: vectors, 2x2 matrices, isometries, polygons with signed
//! distance, and rasterized overlap metrics.
//!
//! Conventions used throughout the crate:
//! - angles are radians, rotations are counter-clockwise;
//! - the polygon signed distance is positive inside, negative outside;
//! - polygons are simple and stored counter-clockwise (normalized on build).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has (near-)zero area")]
    DegenerateArea,
    #[error("polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("polygon has a non-finite vertex")]
    NonFiniteVertex,
    #[error("lattice basis is degenerate (|det| = {0:e})")]
    DegenerateBasis(f64),
    #[error("line direction must be unit length (got {0})")]
    NonUnitDirection(f64),
}

/// Plane vector. Also used for points; `Point2` is an alias.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

pub type Point2 = Vec2;

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; positive when `o` is CCW of `self`.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Rotation by +90 degrees.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl std::ops::AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

/// Column-major-free 2x2 matrix: [[a, b], [c, d]] acts as (x, y) -> (ax+by, cx+dy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    #[inline]
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    /// Matrix with the given column vectors.
    #[inline]
    pub fn from_cols(c0: Vec2, c1: Vec2) -> Self {
        Mat2::new(c0.x, c1.x, c0.y, c1.y)
    }

    #[inline]
    pub fn col(self, i: usize) -> Vec2 {
        match i {
            0 => Vec2::new(self.a, self.c),
            _ => Vec2::new(self.b, self.d),
        }
    }

    #[inline]
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    /// Reflection across a line through the origin with unit direction `d`.
    #[inline]
    pub fn reflection(d: Vec2) -> Self {
        Mat2::new(
            2.0 * d.x * d.x - 1.0,
            2.0 * d.x * d.y,
            2.0 * d.x * d.y,
            2.0 * d.y * d.y - 1.0,
        )
    }

    #[inline]
    pub fn det(self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    #[inline]
    pub fn trace(self) -> f64 {
        self.a + self.d
    }

    #[inline]
    pub fn transpose(self) -> Self {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn inverse(self) -> Result<Mat2, GeomError> {
        let det = self.det();
        if det.abs() <= 1e-12 {
            return Err(GeomError::DegenerateBasis(det));
        }
        Ok(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    #[inline]
    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    #[inline]
    pub fn mul_mat(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    #[inline]
    pub fn scale(self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

/// A line `anchor + t * direction` with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub anchor: Point2,
    pub direction: Vec2,
}

impl Line {
    pub fn new(anchor: Point2, direction: Vec2) -> Result<Self, GeomError> {
        let n = direction.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(GeomError::NonUnitDirection(n));
        }
        Ok(Line { anchor, direction })
    }

    /// Builds the line, normalizing the direction.
    pub fn through(anchor: Point2, direction: Vec2) -> Self {
        Line {
            anchor,
            direction: direction.normalized(),
        }
    }
}

/// Counter-clockwise rotation of `p` by `angle` about center `c`.
#[inline]
pub fn rotate_about(p: Point2, c: Point2, angle: f64) -> Point2 {
    let r = Mat2::rotation(angle);
    c + r.mul_vec(p - c)
}

/// Mirror reflection of `p` about the line `l`.
#[inline]
pub fn reflect_line(p: Point2, l: &Line) -> Point2 {
    let d = l.direction;
    let rel = p - l.anchor;
    l.anchor + d * (2.0 * rel.dot(d)) - rel
}

/// Transflection (glide reflection): reflect about `l`, then translate by `mu`
/// along the line direction.
#[inline]
pub fn transflect(p: Point2, l: &Line, mu: f64) -> Point2 {
    reflect_line(p, l) + l.direction * mu
}

/// Lattice translation `p + m b1 + n b2` for basis columns b1, b2 of `basis`.
pub fn lattice_translate(p: Point2, basis: Mat2, m: i64, n: i64) -> Result<Point2, GeomError> {
    if basis.det().abs() <= 1e-12 {
        return Err(GeomError::DegenerateBasis(basis.det()));
    }
    Ok(p + basis.col(0) * (m as f64) + basis.col(1) * (n as f64))
}

/// Rotation + uniform scale + translation, in that order:
/// `A(p) = scale * R(angle) * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub angle: f64,
    pub scale: f64,
    pub translation: Vec2,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        angle: 0.0,
        scale: 1.0,
        translation: Vec2::ZERO,
    };

    pub fn new(angle: f64, scale: f64, translation: Vec2) -> Self {
        assert!(scale > 0.0, "affine scale must be positive");
        AffineMap {
            angle,
            scale,
            translation,
        }
    }

    /// Linear part `scale * R(angle)`.
    #[inline]
    pub fn linear(&self) -> Mat2 {
        Mat2::rotation(self.angle).scale(self.scale)
    }

    #[inline]
    pub fn linear_inverse(&self) -> Mat2 {
        Mat2::rotation(-self.angle).scale(1.0 / self.scale)
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        self.linear().mul_vec(p) + self.translation
    }

    #[inline]
    pub fn apply_inverse(&self, p: Point2) -> Point2 {
        self.linear_inverse().mul_vec(p - self.translation)
    }

    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        // self(inner(p)) = s1 R1 (s2 R2 p + t2) + t1
        AffineMap {
            angle: self.angle + inner.angle,
            scale: self.scale * inner.scale,
            translation: self.linear().mul_vec(inner.translation) + self.translation,
        }
    }
}

/// A plane isometry `p -> linear * p + translation` with orthogonal linear part.
/// Used for tiling-group elements and edge pairings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub linear: Mat2,
    pub translation: Vec2,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        linear: Mat2::IDENTITY,
        translation: Vec2::ZERO,
    };

    pub fn translation(t: Vec2) -> Self {
        Isometry {
            linear: Mat2::IDENTITY,
            translation: t,
        }
    }

    pub fn rotation_about(c: Point2, angle: f64) -> Self {
        let r = Mat2::rotation(angle);
        Isometry {
            linear: r,
            translation: c - r.mul_vec(c),
        }
    }

    pub fn transflection(l: &Line, mu: f64) -> Self {
        let m = Mat2::reflection(l.direction);
        let anchor_part = l.anchor - m.mul_vec(l.anchor);
        Isometry {
            linear: m,
            translation: anchor_part + l.direction * mu,
        }
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        self.linear.mul_vec(p) + self.translation
    }

    pub fn compose(&self, inner: &Isometry) -> Isometry {
        Isometry {
            linear: self.linear.mul_mat(inner.linear),
            translation: self.linear.mul_vec(inner.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Isometry {
        // Orthogonal linear part: inverse = transpose.
        let li = self.linear.transpose();
        Isometry {
            linear: li,
            translation: -li.mul_vec(self.translation),
        }
    }

    pub fn approx_eq(&self, o: &Isometry, tol: f64) -> bool {
        (self.linear.a - o.linear.a).abs() <= tol
            && (self.linear.b - o.linear.b).abs() <= tol
            && (self.linear.c - o.linear.c).abs() <= tol
            && (self.linear.d - o.linear.d).abs() <= tol
            && (self.translation - o.translation).norm() <= tol
    }
}

/// Simple polygon, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Builds a polygon, normalizing orientation to CCW. Rejects degenerate
    /// and self-intersecting inputs.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self, GeomError> {
        if vertices.len() < 3 {
            return Err(GeomError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::NonFiniteVertex);
        }
        let signed = signed_area(&vertices);
        let scale: f64 = vertices
            .iter()
            .map(|v| v.norm())
            .fold(1.0_f64, |a, b| a.max(b));
        if signed.abs() <= 1e-12 * scale * scale {
            return Err(GeomError::DegenerateArea);
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        let poly = Polygon { vertices };
        if let Some((i, j)) = poly.find_self_intersection() {
            return Err(GeomError::SelfIntersecting(i, j));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        // Area-weighted centroid.
        let mut acc = Vec2::ZERO;
        let mut a = 0.0;
        let n = self.vertices.len();
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p.cross(q);
            acc += (p + q) * w;
            a += w;
        }
        acc * (1.0 / (3.0 * a))
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    /// Even-odd point containment test.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        let n = self.vertices.len();
        let mut j = n - 1;
        for i in 0..n {
            let vi = self.vertices[i];
            let vj = self.vertices[j];
            if (vi.y > p.y) != (vj.y > p.y) {
                let x_cross = vj.x + (p.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Signed distance: positive inside, negative outside, zero on the boundary.
    pub fn sdf(&self, p: Point2) -> f64 {
        let d = self.distance_to_boundary(p);
        if self.contains(p) {
            d
        } else {
            -d
        }
    }

    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        let mut best = f64::INFINITY;
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = self.edge(i);
            best = best.min(segment_distance(p, a, b));
        }
        best
    }

    /// Signed distance together with its spatial gradient. At ridge points
    /// (several equidistant edges) the subgradient of the lowest-index edge is
    /// taken, which keeps the choice deterministic.
    pub fn sdf_with_gradient(&self, p: Point2) -> (f64, Vec2) {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        let mut best_point = self.vertices[0];
        for i in 0..n {
            let (a, b) = self.edge(i);
            let q = closest_point_on_segment(p, a, b);
            let d = (p - q).norm();
            if d < best - 1e-15 {
                best = d;
                best_point = q;
            }
        }
        let inside = self.contains(p);
        let sign = if inside { 1.0 } else { -1.0 };
        let diff = p - best_point;
        let grad = if best > 1e-12 {
            diff * (sign / best)
        } else {
            // On the boundary: fall back to the inward edge normal.
            Vec2::ZERO
        };
        (sign * best, grad)
    }

    fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = self.edge(i);
            for j in (i + 1)..n {
                // Skip adjacent edges (they share an endpoint).
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (c, d) = self.edge(j);
                if segments_properly_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

pub fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn polygon_area(poly: &Polygon) -> f64 {
    poly.area()
}

pub fn polygon_sdf(poly: &Polygon, p: Point2) -> f64 {
    poly.sdf(p)
}

fn closest_point_on_segment(p: Point2, a: Point2, b: Point2) -> Point2 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    a + ab * t
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    (p - closest_point_on_segment(p, a, b)).norm()
}

/// Strict (interior) crossing test; shared endpoints do not count.
fn segments_properly_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Binary occupancy raster with a physical extent. Row 0 is the bottom row
/// (y increases with row index), so world y maps directly.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    pub width: usize,
    pub height: usize,
    /// World coordinates of the lower-left corner of pixel (0, 0).
    pub origin: Point2,
    /// World size of one pixel (pixels are square).
    pub pixel_size: f64,
    pub data: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, origin: Point2, pixel_size: f64) -> Self {
        OccupancyGrid {
            width,
            height,
            origin,
            pixel_size,
            data: vec![false; width * height],
        }
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.data[iy * self.width + ix]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, v: bool) {
        self.data[iy * self.width + ix] = v;
    }

    #[inline]
    pub fn pixel_center(&self, ix: usize, iy: usize) -> Point2 {
        Vec2::new(
            self.origin.x + (ix as f64 + 0.5) * self.pixel_size,
            self.origin.y + (iy as f64 + 0.5) * self.pixel_size,
        )
    }

    /// Nearest-pixel occupancy lookup; outside the extent counts as empty.
    pub fn occupancy_at(&self, p: Point2) -> bool {
        let fx = (p.x - self.origin.x) / self.pixel_size;
        let fy = (p.y - self.origin.y) / self.pixel_size;
        if fx < 0.0 || fy < 0.0 {
            return false;
        }
        let ix = fx as usize;
        let iy = fy as usize;
        if ix >= self.width || iy >= self.height {
            return false;
        }
        self.get(ix, iy)
    }

    pub fn count_occupied(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn area_fraction(&self) -> f64 {
        self.count_occupied() as f64 / (self.width * self.height) as f64
    }

    pub fn extent(&self) -> (Point2, Point2) {
        (
            self.origin,
            self.origin
                + Vec2::new(
                    self.width as f64 * self.pixel_size,
                    self.height as f64 * self.pixel_size,
                ),
        )
    }
}

/// Scanline-rasterizes `poly` into a fresh grid congruent with `reference`
/// (same resolution and extent), sampling at pixel centers.
pub fn rasterize_polygon(poly: &Polygon, reference: &OccupancyGrid) -> OccupancyGrid {
    let mut out = OccupancyGrid::new(
        reference.width,
        reference.height,
        reference.origin,
        reference.pixel_size,
    );
    let verts = poly.vertices();
    let n = verts.len();
    let mut crossings: Vec<f64> = Vec::with_capacity(8);
    for iy in 0..out.height {
        let y = out.origin.y + (iy as f64 + 0.5) * out.pixel_size;
        crossings.clear();
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            if (a.y > y) != (b.y > y) {
                let t = (y - a.y) / (b.y - a.y);
                crossings.push(a.x + t * (b.x - a.x));
            }
        }
        crossings.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut k = 0;
        while k + 1 < crossings.len() {
            let (x0, x1) = (crossings[k], crossings[k + 1]);
            let i0 = (((x0 - out.origin.x) / out.pixel_size - 0.5).ceil().max(0.0)) as usize;
            let i1f = (x1 - out.origin.x) / out.pixel_size - 0.5;
            if i1f >= 0.0 {
                let i1 = (i1f.floor() as usize).min(out.width.saturating_sub(1));
                for ix in i0..=i1 {
                    if ix < out.width {
                        out.set(ix, iy, true);
                    }
                }
            }
            k += 2;
        }
    }
    out
}

/// Intersection-over-union and pixel accuracy of a polygon rasterized onto the
/// grid of `mask`. When both rasters are empty the IoU is 1 by convention.
pub fn rasterize_metrics(tile: &Polygon, mask: &OccupancyGrid) -> (f64, f64) {
    let raster = rasterize_polygon(tile, mask);
    let mut inter = 0usize;
    let mut union = 0usize;
    let mut agree = 0usize;
    for (a, b) in raster.data.iter().zip(mask.data.iter()) {
        match (a, b) {
            (true, true) => {
                inter += 1;
                union += 1;
                agree += 1;
            }
            (false, false) => agree += 1,
            _ => union += 1,
        }
    }
    let iou = if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    };
    let acc = agree as f64 / mask.data.len() as f64;
    (iou, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn rotate_quarter_turn_about_center() {
        let p = rotate_about(Vec2::ZERO, Vec2::new(1.0, 1.0), PI / 2.0);
        assert!((p - Vec2::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rotate_fixed_point() {
        let c = Vec2::new(0.3, 0.7);
        let p = rotate_about(c, c, 1.234);
        assert!((p - c).norm() < 1e-15);
    }

    #[test]
    fn rotate_unit_circle() {
        let p = rotate_about(Vec2::new(1.0, 0.0), Vec2::ZERO, 2.0 * PI / 3.0);
        assert!((p - Vec2::new(-0.5, 3.0_f64.sqrt() / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn reflect_vertical_mirror() {
        let l = Line::through(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0));
        let p = reflect_line(Vec2::new(0.2, 0.3), &l);
        assert!((p - Vec2::new(0.8, 0.3)).norm() < 1e-12);
    }

    #[test]
    fn reflect_point_on_axis_fixed() {
        let l = Line::through(Vec2::ZERO, Vec2::new(1.0, 1.0));
        let p = reflect_line(Vec2::new(1.0, 1.0), &l);
        assert!((p - Vec2::new(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn transflect_reflect_then_slide() {
        let l = Line::through(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0));
        let p = transflect(Vec2::new(0.2, 0.3), &l, 1.0);
        assert!((p - Vec2::new(0.8, 1.3)).norm() < 1e-12);
        // mu = 0 degenerates to a reflection
        let q = transflect(Vec2::new(0.2, 0.3), &l, 0.0);
        assert!((q - reflect_line(Vec2::new(0.2, 0.3), &l)).norm() < 1e-15);
    }

    #[test]
    fn transflect_squared_is_translation() {
        let l = Line::through(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0));
        let p = Vec2::new(0.2, 0.3);
        let g2 = transflect(transflect(p, &l, 1.0), &l, 1.0);
        assert!((g2 - (p + Vec2::new(0.0, 2.0))).norm() < 1e-12);
    }

    #[test]
    fn lattice_translate_basic() {
        let p = lattice_translate(Vec2::new(0.1, 0.1), Mat2::IDENTITY, 1, -2).unwrap();
        assert!((p - Vec2::new(1.1, -1.9)).norm() < 1e-15);
        let b = Mat2::from_cols(Vec2::new(3.0, 0.0), Vec2::new(1.0, 2.0));
        let q = lattice_translate(Vec2::ZERO, b, 1, 1).unwrap();
        assert!((q - Vec2::new(4.0, 2.0)).norm() < 1e-15);
        let id = lattice_translate(Vec2::new(0.4, -0.3), b, 0, 0).unwrap();
        assert!((id - Vec2::new(0.4, -0.3)).norm() < 1e-15);
    }

    #[test]
    fn lattice_degenerate_basis_rejected() {
        let b = Mat2::from_cols(Vec2::new(1.0, 2.0), Vec2::new(2.0, 4.0));
        assert!(lattice_translate(Vec2::ZERO, b, 1, 0).is_err());
    }

    #[test]
    fn sdf_unit_square() {
        let sq = unit_square();
        assert!((sq.sdf(Vec2::new(0.5, 0.5)) - 0.5).abs() < 1e-12);
        assert!((sq.sdf(Vec2::new(2.0, 0.5)) + 1.0).abs() < 1e-12);
        assert!(sq.sdf(Vec2::new(0.0, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn polygon_area_cases() {
        assert!((unit_square().area() - 1.0).abs() < 1e-12);
        let hex: Vec<Point2> = (0..6)
            .map(|k| {
                let t = PI / 3.0 * k as f64;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let hex = Polygon::new(hex).unwrap();
        assert!((hex.area() - 1.5 * 3.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let collinear = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
        ]);
        assert_eq!(collinear.unwrap_err(), GeomError::DegenerateArea);
        let tangled = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 4.0),
            Vec2::new(1.0, -1.0),
            Vec2::new(0.0, 4.0),
        ]);
        assert!(matches!(tangled, Err(GeomError::SelfIntersecting(_, _))));
    }

    #[test]
    fn cw_input_normalized_to_ccw() {
        let p = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(p.area() > 0.0);
    }

    #[test]
    fn metrics_identical_and_disjoint() {
        let sq = unit_square();
        let mut mask = OccupancyGrid::new(64, 64, Vec2::new(-0.5, -0.5), 2.0 / 64.0);
        let raster = rasterize_polygon(&sq, &mask);
        mask.data = raster.data.clone();
        let (iou, acc) = rasterize_metrics(&sq, &mask);
        assert_eq!(iou, 1.0);
        assert_eq!(acc, 1.0);

        // Disjoint equal halves: mask holds the left half-plane strip, the
        // polygon covers the right strip.
        let mut mask = OccupancyGrid::new(64, 64, Vec2::ZERO, 1.0 / 64.0);
        for iy in 0..64 {
            for ix in 0..32 {
                mask.set(ix, iy, true);
            }
        }
        let right = Polygon::new(vec![
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.5, 1.0),
        ])
        .unwrap();
        let (iou, acc) = rasterize_metrics(&right, &mask);
        assert_eq!(iou, 0.0);
        assert_eq!(acc, 0.0);
    }

    #[test]
    fn sdf_gradient_matches_fd() {
        let sq = unit_square();
        let pts = [
            Vec2::new(0.3, 0.4),
            Vec2::new(1.3, 0.6),
            Vec2::new(-0.2, -0.1),
            Vec2::new(0.5, 0.9),
        ];
        let h = 1e-6;
        for p in pts {
            let (_, g) = sq.sdf_with_gradient(p);
            let gx = (sq.sdf(p + Vec2::new(h, 0.0)) - sq.sdf(p - Vec2::new(h, 0.0))) / (2.0 * h);
            let gy = (sq.sdf(p + Vec2::new(0.0, h)) - sq.sdf(p - Vec2::new(0.0, h))) / (2.0 * h);
            assert!((g.x - gx).abs() < 1e-5, "{p:?}: {g:?} vs ({gx},{gy})");
            assert!((g.y - gy).abs() < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn isometries_preserve_distance(
            x1 in -5.0..5.0f64, y1 in -5.0..5.0f64,
            x2 in -5.0..5.0f64, y2 in -5.0..5.0f64,
            cx in -2.0..2.0f64, cy in -2.0..2.0f64,
            angle in -6.3..6.3f64,
        ) {
            let p = Vec2::new(x1, y1);
            let q = Vec2::new(x2, y2);
            let c = Vec2::new(cx, cy);
            let d0 = (p - q).norm();
            let dr = (rotate_about(p, c, angle) - rotate_about(q, c, angle)).norm();
            prop_assert!((d0 - dr).abs() <= 1e-12 * (1.0 + d0));
            let l = Line::through(c, Vec2::new(angle.cos(), angle.sin()));
            let dm = (reflect_line(p, &l) - reflect_line(q, &l)).norm();
            prop_assert!((d0 - dm).abs() <= 1e-12 * (1.0 + d0));
        }

        #[test]
        fn reflection_is_involution(
            x in -5.0..5.0f64, y in -5.0..5.0f64,
            ax in -2.0..2.0f64, ay in -2.0..2.0f64,
            t in 0.0..std::f64::consts::TAU,
        ) {
            let l = Line::through(Vec2::new(ax, ay), Vec2::new(t.cos(), t.sin()));
            let p = Vec2::new(x, y);
            let pp = reflect_line(reflect_line(p, &l), &l);
            prop_assert!((p - pp).norm() <= 1e-12 * (1.0 + p.norm()));
        }

        #[test]
        fn rotation_by_full_turn_in_k_steps(
            x in -5.0..5.0f64, y in -5.0..5.0f64,
            cx in -2.0..2.0f64, cy in -2.0..2.0f64,
            k in 2usize..9,
        ) {
            let p = Vec2::new(x, y);
            let c = Vec2::new(cx, cy);
            let mut q = p;
            for _ in 0..k {
                q = rotate_about(q, c, 2.0 * PI / k as f64);
            }
            prop_assert!((p - q).norm() <= 1e-12 * (1.0 + p.norm()));
        }

        #[test]
        fn sdf_sign_matches_even_odd_oracle(
            x in -2.0..2.0f64, y in -2.0..2.0f64,
        ) {
            // Non-convex simple polygon exercises both lobes.
            let poly = Polygon::new(vec![
                Vec2::new(-1.0, -1.0),
                Vec2::new(1.0, -1.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(0.0, 0.0),
                Vec2::new(-1.0, 1.0),
            ]).unwrap();
            let p = Vec2::new(x, y);
            let s = poly.sdf(p);
            if s.abs() > 1e-9 {
                prop_assert_eq!(s > 0.0, poly.contains(p));
            }
        }
    }
}
