//! The projection zone Π: angle constraints, edge-length constraints and a
//! spline-bounded region of inner polygon angles (φ₁, φ₂), plus the
//! projection that moves a curve into it by changing only its outer edge
//! lengths.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{is_inflectional, segment_intersection, CubicBezier, Point2, PolygonGeometry};

/// Upper bound on max(L₁/L₂, L₂/L₁) for inflectional curves.
pub const RATIO_CAP: f64 = 1.3;
/// Boundary vertices per spline span.
pub const SAMPLES_PER_SPAN: usize = 128;
/// Steps of the length sweep before bisection.
pub const SWEEP_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeLengthBounds {
    pub l_min: f64,
    pub l_max: f64,
    pub delta: f64,
}

impl EdgeLengthBounds {
    pub fn contains(&self, l: f64) -> bool {
        self.l_min <= l && l <= self.l_max
    }

    pub fn clamp(&self, l: f64) -> f64 {
        l.clamp(self.l_min, self.l_max)
    }
}

fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `Δ = sign(θ₂)(θ₁ − θ₂)/π`, `L_min = max(0.4(1+6Δ), 0.27)`,
/// `L_max = max(1.2(1+5Δ), 0.58)`.
pub fn edge_length_bounds(theta1: f64, theta2: f64) -> EdgeLengthBounds {
    let delta = sign0(theta2) * (theta1 - theta2) / PI;
    EdgeLengthBounds {
        l_min: (0.4 * (1.0 + 6.0 * delta)).max(0.27),
        l_max: (1.2 * (1.0 + 5.0 * delta)).max(0.58),
        delta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleProfile {
    Strict,
    RelaxedQuarter,
    RelaxedSixth,
}

impl AngleProfile {
    pub const ALL: [AngleProfile; 3] = [AngleProfile::Strict, AngleProfile::RelaxedQuarter, AngleProfile::RelaxedSixth];

    /// (margin, symmetry): β ∈ (margin, 2π − margin) and |β₁ − β₂| < symmetry.
    pub fn limits(self) -> (f64, f64) {
        match self {
            AngleProfile::Strict => (PI / 3.0, 0.4 * PI),
            AngleProfile::RelaxedQuarter => (PI / 4.0, 0.6 * PI),
            AngleProfile::RelaxedSixth => (PI / 6.0, 0.75 * PI),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AngleProfile::Strict => "strict",
            AngleProfile::RelaxedQuarter => "relaxed_quarter",
            AngleProfile::RelaxedSixth => "relaxed_sixth",
        }
    }

    pub fn parse(s: &str) -> Option<AngleProfile> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

pub fn angle_constraints(geom: &PolygonGeometry, profile: AngleProfile) -> bool {
    let (margin, sym) = profile.limits();
    let inside = |b: f64| margin < b && b < TAU - margin;
    inside(geom.beta1) && inside(geom.beta2) && (geom.beta1 - geom.beta2).abs() < sym
}

/// Closed boundary of Π in the (φ₁, φ₂) plane.
#[derive(Debug, Clone)]
pub struct ProjectionZone {
    anchors: Vec<Point2>,
    boundary: Vec<Point2>,
    /// bounding box of the boundary polyline
    lo: Point2,
    hi: Point2,
}

impl ProjectionZone {
    /// The five defining anchors; the rest follow by reflection.
    pub const BASE_ANCHORS: [(f64, f64); 5] = [(1.05, 1.05), (1.9, 1.3), (PI, 1.35), (4.3, 1.3), (5.2, TAU - 5.2)];

    pub fn new() -> Self {
        let anchors = Self::anchor_loop();
        let boundary = periodic_spline(&anchors, SAMPLES_PER_SPAN);
        let mut lo = Point2::new(f64::MAX, f64::MAX);
        let mut hi = Point2::new(f64::MIN, f64::MIN);
        for p in &boundary {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Self { anchors, boundary, lo, hi }
    }

    /// Shared instance.
    pub fn global() -> &'static ProjectionZone {
        static ZONE: OnceLock<ProjectionZone> = OnceLock::new();
        ZONE.get_or_init(ProjectionZone::new)
    }

    /// The 16 distinct anchors in counterclockwise order: the base points,
    /// their mirror images in φ₁ + φ₂ = 2π, and the swaps of both.
    fn anchor_loop() -> Vec<Point2> {
        let base: Vec<Point2> = Self::BASE_ANCHORS.iter().map(|&(a, b)| Point2::new(a, b)).collect();
        let anti = |p: Point2| Point2::new(TAU - p.y, TAU - p.x);
        let swap = |p: Point2| Point2::new(p.y, p.x);
        let mut out = base.clone();
        // lower-right corner up to the upper-right corner
        out.extend(base[1..4].iter().rev().map(|&p| anti(p)));
        out.push(anti(base[0]));
        // upper-right corner back to the lower-left one
        out.extend(base[1..4].iter().map(|&p| swap(anti(p))));
        out.push(swap(base[4]));
        out.extend(base[1..4].iter().rev().map(|&p| swap(p)));
        out
    }

    pub fn anchors(&self) -> &[Point2] {
        &self.anchors
    }

    /// Closed polyline (first vertex not repeated) of the boundary spline.
    pub fn boundary(&self) -> &[Point2] {
        &self.boundary
    }

    /// Strict interior test on the boundary polyline (even–odd rule).
    pub fn contains_angles(&self, phi1: f64, phi2: f64) -> bool {
        if !(phi1 > self.lo.x && phi1 < self.hi.x && phi2 > self.lo.y && phi2 < self.hi.y) {
            return false;
        }
        let n = self.boundary.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.boundary[i], self.boundary[j]);
            if (a.y > phi2) != (b.y > phi2) {
                let x = a.x + (phi2 - a.y) * (b.x - a.x) / (b.y - a.y);
                if phi1 < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// `phi1,phi2` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("phi1,phi2\n");
        for p in &self.boundary {
            let _ = writeln!(s, "{},{}", p.x, p.y);
        }
        s
    }
}

impl Default for ProjectionZone {
    fn default() -> Self {
        Self::new()
    }
}

/// Uniform-parameter periodic C² cubic spline through `pts`, sampled with
/// `per_span` points per span starting at each anchor.
fn periodic_spline(pts: &[Point2], per_span: usize) -> Vec<Point2> {
    let n = pts.len();
    // second derivatives M: M[i-1] + 4M[i] + M[i+1] = 6(P[i-1] - 2P[i] + P[i+1])
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, (i + n - 1) % n)] += 1.0;
        a[(i, i)] += 4.0;
        a[(i, (i + 1) % n)] += 1.0;
    }
    let lu = a.lu();
    let solve = |f: &dyn Fn(Point2) -> f64| {
        let rhs = DVector::from_fn(n, |i, _| {
            6.0 * (f(pts[(i + n - 1) % n]) - 2.0 * f(pts[i]) + f(pts[(i + 1) % n]))
        });
        lu.solve(&rhs).expect("cyclic spline system is nonsingular")
    };
    let mx = solve(&|p| p.x);
    let my = solve(&|p| p.y);
    let mut out = Vec::with_capacity(n * per_span);
    for i in 0..n {
        let j = (i + 1) % n;
        for s in 0..per_span {
            let t = s as f64 / per_span as f64;
            let u = 1.0 - t;
            let eval = |p0: f64, p1: f64, m0: f64, m1: f64| {
                u * p0 + t * p1 + ((u * u * u - u) * m0 + (t * t * t - t) * m1) / 6.0
            };
            out.push(Point2::new(eval(pts[i].x, pts[j].x, mx[i], mx[j]), eval(pts[i].y, pts[j].y, my[i], my[j])));
        }
    }
    out
}

/// Outer edges of a standard-position polygon rebuilt from its descriptors
/// cross.
fn edges_cross(g: &PolygonGeometry) -> bool {
    let p0 = Point2::ORIGIN;
    let p3 = Point2::new(1.0, 0.0);
    let p1 = Point2::from_angle(g.theta1) * g.l1;
    let p2 = p3 + Point2::from_angle(g.theta2) * g.l2;
    segment_intersection(p0, p1, p3, p2).is_some()
}

/// Membership in Π: angles inside the boundary, both edge lengths within
/// their bounds, the ratio cap for inflectional polygons and no crossing of
/// the outer edges.
pub fn zone_contains(geom: &PolygonGeometry) -> bool {
    zone_contains_in(ProjectionZone::global(), geom)
}

pub fn zone_contains_in(zone: &ProjectionZone, g: &PolygonGeometry) -> bool {
    if !zone.contains_angles(g.phi1, g.phi2) {
        return false;
    }
    let b = edge_length_bounds(g.theta1, g.theta2);
    if !(b.contains(g.l1) && b.contains(g.l2)) {
        return false;
    }
    if g.inflectional && (g.l1 / g.l2).max(g.l2 / g.l1) > RATIO_CAP {
        return false;
    }
    !edges_cross(g)
}

/// Membership test for a curve in any position.
pub fn curve_in_zone(curve: &CubicBezier) -> Result<bool> {
    let (std, _) = curve.standard_position()?;
    Ok(zone_contains(&std.polygon_geometry()?))
}

/// Which routine a geometric projection ended in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometricPhase {
    AlreadyInside,
    Inflectional,
    NonInflectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricProjection {
    pub curve: CubicBezier,
    pub in_zone: bool,
    pub phase: GeometricPhase,
    /// inflectional on entry to the sweep (after clamping)
    pub started_inflectional: bool,
}

/// End-data preserving projection into Π for curves satisfying the strict
/// angle constraints.
pub fn geometric_project(curve: &CubicBezier) -> Result<CubicBezier> {
    Ok(geometric_project_with(curve, AngleProfile::Strict)?.curve)
}

pub fn geometric_project_with(curve: &CubicBezier, profile: AngleProfile) -> Result<GeometricProjection> {
    let (std, t) = curve.standard_position()?;
    let g0 = std.polygon_geometry()?;
    if !angle_constraints(&g0, profile) {
        return Err(Error::AngleConstraintViolation { beta1: g0.beta1, beta2: g0.beta2 });
    }
    let back = t.inverse();
    let finish = |c: CubicBezier| restore(curve, &c.transformed(&back));

    let zone = ProjectionZone::global();
    let inside = |c: &CubicBezier| c.polygon_geometry().map(|g| zone_contains_in(zone, &g)).unwrap_or(false);
    if inside(&std) {
        return Ok(GeometricProjection {
            curve: *curve,
            in_zone: true,
            phase: GeometricPhase::AlreadyInside,
            started_inflectional: g0.inflectional,
        });
    }

    let c = std.remove_self_intersection();
    let bounds = edge_length_bounds(g0.theta1, g0.theta2);
    let (l1, l2) = c.outer_lengths();
    let c = c.set_edge_lengths(bounds.clamp(l1), bounds.clamp(l2));
    let g = c.polygon_geometry()?;
    let started_inflectional = g.inflectional;
    if inside(&c) {
        return Ok(GeometricProjection {
            curve: finish(c),
            in_zone: true,
            phase: if started_inflectional { GeometricPhase::Inflectional } else { GeometricPhase::NonInflectional },
            started_inflectional,
        });
    }

    let mut c = c;
    if g.inflectional {
        let (l1, l2) = c.outer_lengths();
        let at = |t: f64| {
            let lerp = |l: f64| (1.0 - t) * l + t * bounds.l_min;
            c.set_edge_lengths(lerp(l1), lerp(l2))
        };
        let stop = |x: &CubicBezier| {
            inside(x) || x.polygon_geometry().map(|g| !g.inflectional).unwrap_or(false)
        };
        let out = sweep(&at, &stop);
        if inside(&out) {
            return Ok(GeometricProjection {
                curve: finish(out),
                in_zone: true,
                phase: GeometricPhase::Inflectional,
                started_inflectional,
            });
        }
        c = out;
        if c.polygon_geometry()?.inflectional {
            // reached L_min without entering Π
            return Ok(GeometricProjection {
                curve: finish(c),
                in_zone: false,
                phase: GeometricPhase::Inflectional,
                started_inflectional,
            });
        }
    }

    let g = c.polygon_geometry()?;
    let (l1, l2) = c.outer_lengths();
    // the leg whose inner angle is farther from π is shortened
    let shorten_first = (g.phi1 - PI).abs() >= (g.phi2 - PI).abs();
    let (t1, t2) = if shorten_first { (bounds.l_min, bounds.l_max) } else { (bounds.l_max, bounds.l_min) };
    let at = |t: f64| c.set_edge_lengths((1.0 - t) * l1 + t * t1, (1.0 - t) * l2 + t * t2);
    let out = sweep(&at, &|x: &CubicBezier| inside(x));
    Ok(GeometricProjection {
        curve: finish(out),
        in_zone: inside(&out),
        phase: GeometricPhase::NonInflectional,
        started_inflectional,
    })
}

/// First t on a uniform grid where `stop` holds, refined by bisection to the
/// boundary (on the side where it holds). Returns `at(1)` if it never holds.
fn sweep<A, S>(at: &A, stop: &S) -> CubicBezier
where
    A: Fn(f64) -> CubicBezier,
    S: Fn(&CubicBezier) -> bool,
{
    let first = at(0.0);
    if stop(&first) {
        return first;
    }
    let mut prev = 0.0;
    for i in 1..=SWEEP_STEPS {
        let t = i as f64 / SWEEP_STEPS as f64;
        let c = at(t);
        if stop(&c) {
            let (mut lo, mut hi) = (prev, t);
            let mut best = c;
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                let m = at(mid);
                if stop(&m) {
                    hi = mid;
                    best = m;
                } else {
                    lo = mid;
                }
            }
            return best;
        }
        prev = t;
    }
    at(1.0)
}

/// Copies the endpoints of `original` exactly and keeps each inner control
/// point on its original outer-edge ray, so that round-off from the frame
/// change cannot move the end data.
pub(crate) fn restore(original: &CubicBezier, moved: &CubicBezier) -> CubicBezier {
    let l1 = moved.p1.distance(original.p0);
    let l2 = moved.p2.distance(original.p3);
    original.set_edge_lengths(l1, l2)
}

/// Inflectionality of a curve in any position.
pub fn curve_is_inflectional(curve: &CubicBezier) -> Result<bool> {
    let (std, _) = curve.standard_position()?;
    let g = std.polygon_geometry()?;
    Ok(is_inflectional(g.phi1, g.phi2))
}
