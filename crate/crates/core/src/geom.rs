//! Planar points, similarity transforms, cubic Béziers and the descriptors
//! of a control polygon in standard position.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Polar angle in (−π, π].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }

    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Point2::new(a[0], a[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Point2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into [0, 2π).
pub fn wrap_two_pi(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_pi(a: f64) -> f64 {
    let r = wrap_two_pi(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `p ↦ scale · R(rotation) · p + translation`, orientation preserving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub scale: f64,
    pub rotation: f64,
    pub translation: Point2,
}

impl Default for Similarity {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity { scale: 1.0, rotation: 0.0, translation: Point2::ORIGIN };

    pub fn new(scale: f64, rotation: f64, translation: Point2) -> Self {
        debug_assert!(scale > 0.0 && scale.is_finite(), "similarity scale must be positive");
        Self { scale, rotation, translation }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        p.rotate(self.rotation) * self.scale + self.translation
    }

    /// Applies only the linear part (for direction vectors).
    pub fn apply_vector(&self, v: Point2) -> Point2 {
        v.rotate(self.rotation) * self.scale
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Similarity) -> Similarity {
        Similarity {
            scale: self.scale * other.scale,
            rotation: self.rotation + other.rotation,
            translation: self.apply(other.translation),
        }
    }

    pub fn inverse(&self) -> Similarity {
        let inv_scale = 1.0 / self.scale;
        Similarity {
            scale: inv_scale,
            rotation: -self.rotation,
            translation: -(self.translation.rotate(-self.rotation) * inv_scale),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBezier {
    pub p0: Point2,
    pub p1: Point2,
    pub p2: Point2,
    pub p3: Point2,
}

#[derive(Serialize, Deserialize)]
struct CurveWire {
    control_points: [Point2; 4],
}

impl Serialize for CubicBezier {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CurveWire { control_points: self.points() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CubicBezier {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = CurveWire::deserialize(d)?;
        Ok(CubicBezier::from_points(w.control_points))
    }
}

/// Speed below which a curve point counts as a cusp, relative to polygon size.
const CUSP_RELATIVE_TOL: f64 = 1e-12;

impl CubicBezier {
    pub const fn new(p0: Point2, p1: Point2, p2: Point2, p3: Point2) -> Self {
        Self { p0, p1, p2, p3 }
    }

    pub fn from_points(p: [Point2; 4]) -> Self {
        Self::new(p[0], p[1], p[2], p[3])
    }

    pub fn from_coords(c: [[f64; 2]; 4]) -> Self {
        Self::new(c[0].into(), c[1].into(), c[2].into(), c[3].into())
    }

    pub fn points(&self) -> [Point2; 4] {
        [self.p0, self.p1, self.p2, self.p3]
    }

    /// Finite control points and distinct endpoints.
    pub fn validate(&self) -> Result<()> {
        if !self.points().iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidInput("non-finite control point".into()));
        }
        if self.p0 == self.p3 {
            return Err(Error::Degenerate("coincident endpoints".into()));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Point2 {
        let s = 1.0 - t;
        let b0 = s * s * s;
        let b1 = 3.0 * s * s * t;
        let b2 = 3.0 * s * t * t;
        let b3 = t * t * t;
        Point2::new(
            b0 * self.p0.x + b1 * self.p1.x + b2 * self.p2.x + b3 * self.p3.x,
            b0 * self.p0.y + b1 * self.p1.y + b2 * self.p2.y + b3 * self.p3.y,
        )
    }

    /// de Casteljau evaluation; slower, used to cross-check [`Self::eval`].
    pub fn eval_de_casteljau(&self, t: f64) -> Point2 {
        let a = self.p0.lerp(self.p1, t);
        let b = self.p1.lerp(self.p2, t);
        let c = self.p2.lerp(self.p3, t);
        let d = a.lerp(b, t);
        let e = b.lerp(c, t);
        d.lerp(e, t)
    }

    pub fn derivative(&self, t: f64) -> Point2 {
        let s = 1.0 - t;
        let d0 = self.p1 - self.p0;
        let d1 = self.p2 - self.p1;
        let d2 = self.p3 - self.p2;
        (d0 * (s * s) + d1 * (2.0 * s * t) + d2 * (t * t)) * 3.0
    }

    pub fn second_derivative(&self, t: f64) -> Point2 {
        let a = self.p2 - self.p1 * 2.0 + self.p0;
        let b = self.p3 - self.p2 * 2.0 + self.p1;
        (a * (1.0 - t) + b * t) * 6.0
    }

    fn size(&self) -> f64 {
        let c = self.p0;
        self.points().iter().map(|p| p.distance(c)).fold(0.0, f64::max)
    }

    /// Signed curvature, counterclockwise positive.
    pub fn curvature(&self, t: f64) -> Result<f64> {
        let d1 = self.derivative(t);
        let speed = d1.norm();
        if speed < CUSP_RELATIVE_TOL * self.size().max(f64::MIN_POSITIVE) {
            return Err(Error::Cusp { t, speed });
        }
        Ok(d1.cross(self.second_derivative(t)) / (speed * speed * speed))
    }

    /// Curvature without the cusp check; infinite or NaN at an exact cusp.
    pub fn curvature_unchecked(&self, t: f64) -> f64 {
        let d1 = self.derivative(t);
        let speed = d1.norm();
        d1.cross(self.second_derivative(t)) / (speed * speed * speed)
    }

    /// Tangent angle of γ′(t) in (−π, π].
    pub fn tangent_angle(&self, t: f64) -> f64 {
        self.derivative(t).angle()
    }

    pub fn arc_length(&self, t0: f64, t1: f64) -> f64 {
        debug_assert!(t0 <= t1);
        let scale = self.size().max(f64::MIN_POSITIVE);
        // adaptive rule tolerance is relative to max(1, |I|); rescale so the
        // absolute error is 1e-10 of the curve size
        let v = quad::integrate_adaptive(t0, t1, quad::DEFAULT_TOL, |t| self.derivative(t).norm() / scale);
        v * scale
    }

    pub fn length(&self) -> f64 {
        self.arc_length(0.0, 1.0)
    }

    pub fn transformed(&self, s: &Similarity) -> CubicBezier {
        CubicBezier::new(s.apply(self.p0), s.apply(self.p1), s.apply(self.p2), s.apply(self.p3))
    }

    /// Reflection about the x-axis.
    pub fn mirrored_x(&self) -> CubicBezier {
        let m = |p: Point2| Point2::new(p.x, -p.y);
        CubicBezier::new(m(self.p0), m(self.p1), m(self.p2), m(self.p3))
    }

    /// Same trace traversed backwards.
    pub fn reversed(&self) -> CubicBezier {
        CubicBezier::new(self.p3, self.p2, self.p1, self.p0)
    }

    pub fn is_standard(&self) -> bool {
        self.p0 == Point2::ORIGIN && self.p3 == Point2::new(1.0, 0.0)
    }

    /// Maps the curve so that p0 ↦ (0,0) and p3 ↦ (1,0). Returns the mapped
    /// curve and the transform that produced it.
    pub fn standard_position(&self) -> Result<(CubicBezier, Similarity)> {
        self.validate()?;
        if self.is_standard() {
            return Ok((*self, Similarity::IDENTITY));
        }
        let chord = self.p3 - self.p0;
        let scale = 1.0 / chord.norm();
        let rotation = -chord.angle();
        let translation = -(self.p0.rotate(rotation) * scale);
        let t = Similarity::new(scale, rotation, translation);
        let mut c = self.transformed(&t);
        c.p0 = Point2::ORIGIN;
        c.p3 = Point2::new(1.0, 0.0);
        Ok((c, t))
    }

    pub fn outer_lengths(&self) -> (f64, f64) {
        ((self.p1 - self.p0).norm(), (self.p2 - self.p3).norm())
    }

    /// Moves the inner control points along their outer edges so that the
    /// edges have lengths `l1`, `l2`; endpoints and edge directions are kept.
    pub fn set_edge_lengths(&self, l1: f64, l2: f64) -> CubicBezier {
        let u1 = self.p1 - self.p0;
        let u2 = self.p2 - self.p3;
        let n1 = u1.norm();
        let n2 = u2.norm();
        let p1 = if n1 > 0.0 { self.p0 + u1 * (l1 / n1) } else { self.p1 };
        let p2 = if n2 > 0.0 { self.p3 + u2 * (l2 / n2) } else { self.p2 };
        CubicBezier::new(self.p0, p1, p2, self.p3)
    }

    /// Intersection of the two outer edges p0p1 and p2p3, if any.
    pub fn outer_edge_intersection(&self) -> Option<Point2> {
        segment_intersection(self.p0, self.p1, self.p3, self.p2)
    }

    /// Shrinks the outer edges until they no longer intersect: when they meet
    /// at q, L1 ← 0.9·|p0 q| and L2 ← 0.9·|p3 q|.
    pub fn remove_self_intersection(&self) -> CubicBezier {
        match self.outer_edge_intersection() {
            None => *self,
            Some(q) => {
                let c = self.set_edge_lengths(0.9 * q.distance(self.p0), 0.9 * q.distance(self.p3));
                // a second crossing is impossible for straight segments, but
                // collinear overlaps can need one more shrink
                match c.outer_edge_intersection() {
                    None => c,
                    Some(q2) => c.set_edge_lengths(0.9 * q2.distance(c.p0), 0.9 * q2.distance(c.p3)),
                }
            }
        }
    }

    /// Control-polygon descriptors; the curve must be in standard position.
    pub fn polygon_geometry(&self) -> Result<PolygonGeometry> {
        PolygonGeometry::of(self)
    }
}

/// Intersection point of closed segments [a0,a1] and [b0,b1]. For collinear
/// overlapping segments the midpoint of the overlap is returned.
pub fn segment_intersection(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> Option<Point2> {
    let r = a1 - a0;
    let s = b1 - b0;
    let denom = r.cross(s);
    let qp = b0 - a0;
    let scale = (r.norm() * s.norm()).max(f64::MIN_POSITIVE);
    if denom.abs() <= 1e-14 * scale {
        // parallel
        if qp.cross(r).abs() > 1e-14 * r.norm().max(s.norm()).max(f64::MIN_POSITIVE) * qp.norm().max(1.0) {
            return None;
        }
        let rr = r.norm_sq();
        if rr == 0.0 {
            return None;
        }
        let t0 = qp.dot(r) / rr;
        let t1 = (b1 - a0).dot(r) / rr;
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        if lo > hi {
            return None;
        }
        return Some(a0 + r * (0.5 * (lo + hi)));
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some(a0 + r * t)
    } else {
        None
    }
}

/// Angles and outer edge lengths of a control polygon in standard position.
///
/// * `theta1` is the angle of p1 − p0, `theta2` the angle of the third edge
///   leaving the end point, p2 − p3; both in (−π, π] from the positive x-axis.
/// * `beta1` is measured clockwise from the negative x-axis to p0→p1, and
///   `beta2` anticlockwise from the positive x-axis to p3→p2; both in [0, 2π).
/// * `phi1` / `phi2` are the inner angles at p1 / p2 from the outer edge to
///   the middle edge, oriented so that both equal π for a straight polygon
///   and both are below π for a convex arch above the chord.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonGeometry {
    pub beta1: f64,
    pub beta2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub l1: f64,
    pub l2: f64,
    pub inflectional: bool,
}

impl PolygonGeometry {
    pub fn of(c: &CubicBezier) -> Result<Self> {
        if !c.is_standard() {
            return Err(Error::InvalidInput("polygon geometry requires standard position".into()));
        }
        let e1 = c.p1 - c.p0;
        let e3 = c.p2 - c.p3;
        let l1 = e1.norm();
        let l2 = e3.norm();
        if l1 == 0.0 || l2 == 0.0 {
            return Err(Error::Degenerate("zero-length outer edge".into()));
        }
        let theta1 = e1.angle();
        let theta2 = e3.angle();
        let middle = (c.p2 - c.p1).angle();
        // inner angle at p1 from (p0 - p1) anticlockwise to (p2 - p1); at p2
        // from (p3 - p2) clockwise to (p1 - p2)
        let phi1 = wrap_two_pi(middle - (theta1 + PI));
        let phi2 = wrap_two_pi((theta2 + PI) - (middle + PI));
        Ok(Self {
            beta1: wrap_two_pi(PI - theta1),
            beta2: wrap_two_pi(theta2),
            phi1,
            phi2,
            theta1,
            theta2,
            l1,
            l2,
            inflectional: is_inflectional(phi1, phi2),
        })
    }
}

/// π separates the two inner angles (boundary included).
pub fn is_inflectional(phi1: f64, phi2: f64) -> bool {
    (phi2 <= PI && PI <= phi1) || (phi1 <= PI && PI <= phi2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn arch() -> CubicBezier {
        CubicBezier::new(p(0.0, 0.0), p(0.25, 0.3), p(0.75, 0.3), p(1.0, 0.0))
    }

    #[test]
    fn endpoint_interpolation() {
        let c = CubicBezier::new(p(0.3, -1.0), p(2.0, 5.0), p(-1.0, 2.0), p(4.0, 4.0));
        assert_eq!(c.eval(0.0), c.p0);
        assert_eq!(c.eval(1.0), c.p3);
    }

    #[test]
    fn bernstein_midpoint() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.0, 1.0), p(1.0, 1.0), p(1.0, 0.0));
        let m = c.eval(0.5);
        assert!((m.x - 0.5).abs() < 1e-15 && (m.y - 0.75).abs() < 1e-15);
    }

    #[test]
    fn de_casteljau_agrees() {
        let c = CubicBezier::new(p(0.3, -1.0), p(2.0, 5.0), p(-1.0, 2.0), p(4.0, 4.0));
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!(c.eval(t).distance(c.eval_de_casteljau(t)) < 1e-14);
        }
    }

    #[test]
    fn straight_line_has_zero_curvature_and_unit_length() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.2, 0.0), p(0.6, 0.0), p(1.0, 0.0));
        for i in 0..=10 {
            assert_eq!(c.curvature(i as f64 / 10.0).unwrap(), 0.0);
        }
        assert!((c.length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_negates_curvature() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.1, 0.5), p(0.8, 0.2), p(1.0, 0.0));
        let m = c.mirrored_x();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let (a, b) = (c.curvature(t).unwrap(), m.curvature(t).unwrap());
            assert!((a + b).abs() < 1e-12);
        }
    }

    /// Tangent-angle finite differences against the closed-form curvature.
    #[test]
    fn curvature_matches_finite_difference_oracle() {
        let c = CubicBezier::new(p(0.0, 0.0), p(1.0 / 3.0, 0.0), p(2.0 / 3.0, 1.0 / 3.0), p(1.0, 1.0));
        let h = 1e-5;
        for &t in &[0.0f64, 0.2, 0.5, 0.9] {
            let (a, b) = (t.max(h) - h, t.max(h) + h);
            let dtheta = wrap_pi(c.tangent_angle(b) - c.tangent_angle(a));
            let ds = c.arc_length(a, b);
            let fd = dtheta / ds;
            let k = c.curvature(t.max(h)).unwrap();
            assert!((fd - k).abs() < 1e-5, "t={t}: fd {fd} vs {k}");
        }
        // t = 0 exactly: x' = 1, y' = 0, x'' = 2, y'' = 2 → κ = 2
        assert!((c.curvature(0.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cusp_is_reported() {
        // symmetric crossing polygon with a cusp at t = 1/2
        let c = CubicBezier::new(p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0), p(1.0, 0.0));
        assert!(matches!(c.curvature(0.5), Err(Error::Cusp { .. })));
    }

    #[test]
    fn arc_length_matches_polyline_oracle() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.9, 1.4), p(-0.4, 0.8), p(1.0, 0.0));
        let n = 100_000;
        let mut acc = 0.0;
        let mut prev = c.eval(0.0);
        for i in 1..=n {
            let q = c.eval(i as f64 / n as f64);
            acc += q.distance(prev);
            prev = q;
        }
        assert!((c.length() - acc).abs() < 1e-6);
        let mut last = 0.0;
        for i in 0..=20 {
            let v = c.arc_length(0.0, i as f64 / 20.0);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn standard_position_examples() {
        let (s, t) = arch().standard_position().unwrap();
        assert_eq!(s, arch());
        assert_eq!(t, Similarity::IDENTITY);

        let c = CubicBezier::new(p(2.0, 1.0), p(2.0, 2.0), p(4.0, 2.0), p(4.0, 1.0));
        let (s, t) = c.standard_position().unwrap();
        assert_eq!(s.p0, Point2::ORIGIN);
        assert_eq!(s.p3, p(1.0, 0.0));
        assert!((t.scale - 0.5).abs() < 1e-15);
        let back = s.transformed(&t.inverse());
        for (a, b) in back.points().iter().zip(c.points().iter()) {
            assert!(a.distance(*b) < 1e-12);
        }
        let d = CubicBezier::new(p(1.0, 1.0), p(2.0, 2.0), p(4.0, 2.0), p(1.0, 1.0));
        assert!(matches!(d.standard_position(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn similarity_compose_and_inverse() {
        let a = Similarity::new(2.5, 0.7, p(1.0, -3.0));
        let b = Similarity::new(0.3, -2.1, p(-0.4, 0.2));
        let q = p(0.77, -1.3);
        let ab = a.compose(&b);
        assert!(ab.apply(q).distance(a.apply(b.apply(q))) < 1e-14);
        assert!(a.inverse().apply(a.apply(q)).distance(q) < 1e-14);
        assert!(a.compose(&a.inverse()).apply(q).distance(q) < 1e-14);
    }

    #[test]
    fn collinear_polygon_geometry() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.3, 0.0), p(0.6, 0.0), p(1.0, 0.0));
        let g = c.polygon_geometry().unwrap();
        assert!((g.phi1 - PI).abs() < 1e-15 && (g.phi2 - PI).abs() < 1e-15);
        assert!(g.inflectional);
    }

    #[test]
    fn symmetric_arch_geometry() {
        let g = arch().polygon_geometry().unwrap();
        assert!((g.phi1 - g.phi2).abs() < 1e-14);
        assert!((g.beta1 - g.beta2).abs() < 1e-14);
        assert!((g.l1 - g.l2).abs() < 1e-15);
        assert!(g.phi1 < PI && !g.inflectional);
        let m = arch().mirrored_x().polygon_geometry().unwrap();
        assert!(m.phi1 > PI && m.phi2 > PI && !m.inflectional);
        assert!((m.phi1 - (TAU - g.phi1)).abs() < 1e-14);
    }

    #[test]
    fn s_curve_is_inflectional() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.3, 0.2), p(0.7, -0.2), p(1.0, 0.0));
        let g = c.polygon_geometry().unwrap();
        assert!(g.inflectional);
        assert!((g.phi1 - PI) * (g.phi2 - PI) <= 0.0);
        // direct angle computation: φ1 = arg(p2−p1) − arg(p0−p1)
        let phi1 = wrap_two_pi((c.p2 - c.p1).angle() - (c.p0 - c.p1).angle());
        assert!((phi1 - g.phi1).abs() < 1e-14);
    }

    #[test]
    fn set_edge_lengths_contract() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.2, 0.4), p(0.9, 0.3), p(1.0, 0.0));
        let (l1, l2) = c.outer_lengths();
        let same = c.set_edge_lengths(l1, l2);
        for (a, b) in same.points().iter().zip(c.points().iter()) {
            assert!(a.distance(*b) < 1e-15);
        }
        let g0 = c.polygon_geometry().unwrap();
        let d = c.set_edge_lengths(0.7, 0.25);
        let g = d.polygon_geometry().unwrap();
        assert!((g.l1 - 0.7).abs() < 1e-15 && (g.l2 - 0.25).abs() < 1e-15);
        assert!((g.theta1 - g0.theta1).abs() < 1e-15 && (g.theta2 - g0.theta2).abs() < 1e-15);
        // sweep L1 down: (φ1, φ2) stays on φ1 + φ2 = const (mod 2π)
        let sum0 = g0.phi1 + g0.phi2;
        for i in 1..=20 {
            let g = c.set_edge_lengths(l1 * (1.0 - i as f64 * 0.045), l2).polygon_geometry().unwrap();
            let d = wrap_pi(g.phi1 + g.phi2 - sum0);
            assert!(d.abs() < 1e-10, "step {i}: {d}");
        }
    }

    #[test]
    fn self_intersection_removal() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.9, 0.5), p(0.1, 0.5), p(1.0, 0.0));
        assert!(c.outer_edge_intersection().is_some());
        let r = c.remove_self_intersection();
        assert!(segment_intersection(r.p0, r.p1, r.p3, r.p2).is_none());
        let (a, b) = r.outer_lengths();
        let (a0, b0) = c.outer_lengths();
        assert!(a <= a0 && b <= b0);
        assert_eq!(r.remove_self_intersection(), r);
        assert_eq!(arch().remove_self_intersection(), arch());

        let overlap = CubicBezier::new(p(0.0, 0.0), p(0.7, 0.0), p(0.3, 0.0), p(1.0, 0.0));
        let r = overlap.remove_self_intersection();
        assert!(r.outer_edge_intersection().is_none());
    }

    #[test]
    fn curve_json_format() {
        let c = CubicBezier::new(p(0.0, 0.0), p(0.25, 0.5), p(0.75, -0.125), p(1.0, 0.0));
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"control_points":[[0.0,0.0],[0.25,0.5],[0.75,-0.125],[1.0,0.0]]}"#);
        let back: CubicBezier = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
