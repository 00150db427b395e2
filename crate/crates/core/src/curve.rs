//! Minimal interface for planar parametric curves on t ∈ [0, 1].

use crate::geom::{CubicBezier, Point2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub point: Point2,
    /// ds/dt
    pub speed: f64,
    /// direction of the tangent, in (−π, π] or continuous
    pub tangent_angle: f64,
    /// signed curvature, counterclockwise positive
    pub curvature: f64,
}

pub trait ParametricCurve {
    fn sample(&self, t: f64) -> CurveSample;
}

impl ParametricCurve for CubicBezier {
    fn sample(&self, t: f64) -> CurveSample {
        let d1 = self.derivative(t);
        let d2 = self.second_derivative(t);
        let speed = d1.norm();
        CurveSample {
            point: self.eval(t),
            speed,
            tangent_angle: d1.angle(),
            curvature: d1.cross(d2) / (speed * speed * speed),
        }
    }
}

/// A curve given by closures for position, speed, tangent angle and curvature.
pub struct FnCurve<P, S, A, K> {
    pub position: P,
    pub speed: S,
    pub tangent_angle: A,
    pub curvature: K,
}

impl<P, S, A, K> ParametricCurve for FnCurve<P, S, A, K>
where
    P: Fn(f64) -> Point2,
    S: Fn(f64) -> f64,
    A: Fn(f64) -> f64,
    K: Fn(f64) -> f64,
{
    fn sample(&self, t: f64) -> CurveSample {
        CurveSample {
            point: (self.position)(t),
            speed: (self.speed)(t),
            tangent_angle: (self.tangent_angle)(t),
            curvature: (self.curvature)(t),
        }
    }
}

impl<C: ParametricCurve + ?Sized> ParametricCurve for &C {
    fn sample(&self, t: f64) -> CurveSample {
        (**self).sample(t)
    }
}
