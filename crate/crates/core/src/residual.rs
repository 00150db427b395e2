//! The λ-residual: how far the curvature of a curve is from an affine
//! function of position.
//!
//! Along a curve γ(t) = (x, y) we fit `κ + λ₁y − λ₂x − α ≈ 0` in the
//! arc-length-weighted least-squares sense and report
//! `e_λ = √(∫(κ + λ₁y − λ₂x − α)² ds / ∫κ² ds)`.
//! An elastica satisfies the law exactly, so e_λ = 0 there.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::ParametricCurve;
use crate::error::{Error, Result};
use crate::geom::{CubicBezier, Point2};
use crate::quad::{adaptive_nodes, GaussLegendre, Node, DEFAULT_TOL};

/// Below this value of `L·∫κ² ds` a curve counts as a straight line.
pub const STRAIGHT_LINE_ENERGY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaFit {
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
    pub e_lambda: f64,
    /// ∫κ² ds
    pub energy: f64,
    pub straight_line: bool,
}

impl LambdaFit {
    pub fn class(&self) -> QualityClass {
        QualityClass::classify(self.e_lambda)
    }

    /// Value of the affine law `κ + λ₁y − λ₂x − α` for a given curvature and point.
    pub fn law(&self, kappa: f64, p: Point2) -> f64 {
        kappa + self.lambda1 * p.y - self.lambda2 * p.x - self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QualityClass {
    Best,
    Good,
    Borderline,
    Reject,
}

impl QualityClass {
    pub const BEST_MAX: f64 = 0.22;
    pub const GOOD_MAX: f64 = 0.4;
    pub const BORDERLINE_MAX: f64 = 0.5;

    pub fn classify(e_lambda: f64) -> QualityClass {
        if e_lambda <= Self::BEST_MAX {
            QualityClass::Best
        } else if e_lambda <= Self::GOOD_MAX {
            QualityClass::Good
        } else if e_lambda <= Self::BORDERLINE_MAX {
            QualityClass::Borderline
        } else {
            QualityClass::Reject
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QualityClass::Best => "Best",
            QualityClass::Good => "Good",
            QualityClass::Borderline => "Borderline",
            QualityClass::Reject => "Reject",
        }
    }
}

impl fmt::Display for QualityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// λ-residual of a cubic Bézier curve.
pub fn lambda_fit(curve: &CubicBezier) -> Result<LambdaFit> {
    curve.validate()?;
    let size = curve.points().windows(2).map(|w| w[0].distance(w[1])).sum::<f64>();
    let cusp_speed = 1e-12 * size;
    // a zero-speed point makes the curvature blow up
    for &t in &[0.0, 1.0] {
        let speed = curve.derivative(t).norm();
        if speed < cusp_speed {
            return Err(Error::Cusp { t, speed });
        }
    }
    residual_of_parametric(curve)
}

/// λ-residual of any parametric curve on t ∈ [0, 1].
pub fn residual_of_parametric<C: ParametricCurve>(curve: &C) -> Result<LambdaFit> {
    let rough = GaussLegendre::default_rule().integrate(0.0, 1.0, |t| curve.sample(t).speed);
    if !(rough.is_finite() && rough > 0.0) {
        return Err(Error::Degenerate("curve has zero length".into()));
    }
    let (nodes, _) = adaptive_nodes(0.0, 1.0, DEFAULT_TOL, |t| {
        let s = curve.sample(t);
        let ds = s.speed / rough;
        let p = s.point * (1.0 / rough);
        [ds, s.curvature * s.curvature * s.speed * rough, p.x * ds, p.y * ds]
    });
    fit_on_nodes(curve, &nodes)
}

/// Least-squares fit on a fixed set of quadrature nodes in t.
pub fn fit_on_nodes<C: ParametricCurve>(curve: &C, nodes: &[Node]) -> Result<LambdaFit> {
    let samples: Vec<_> = nodes
        .iter()
        .map(|n| {
            let s = curve.sample(n.t);
            (s.point, s.curvature, s.speed * n.w)
        })
        .collect();
    if samples.iter().any(|(p, k, w)| !(p.is_finite() && k.is_finite() && w.is_finite())) {
        let t = nodes
            .iter()
            .zip(&samples)
            .find(|(_, (_, k, _))| !k.is_finite())
            .map_or(0.0, |(n, _)| n.t);
        return Err(Error::Cusp { t, speed: 0.0 });
    }

    let length: f64 = samples.iter().map(|s| s.2).sum();
    if !(length > 0.0) {
        return Err(Error::Degenerate("curve has zero length".into()));
    }
    let mut origin = Point2::ORIGIN;
    for (p, _, w) in &samples {
        origin += *p * (*w / length);
    }
    let energy: f64 = samples.iter().map(|(_, k, w)| k * k * w).sum();
    if !(length * energy >= STRAIGHT_LINE_ENERGY) {
        return Ok(LambdaFit {
            lambda1: 0.0,
            lambda2: 0.0,
            alpha: 0.0,
            e_lambda: 0.0,
            energy,
            straight_line: true,
        });
    }

    // centred, unit-length frame: q = (p - origin)/L, κ' = κL, ds' = ds/L
    let mut g = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    let local: Vec<([f64; 3], f64, f64)> = samples
        .iter()
        .map(|(p, k, w)| {
            let q = (*p - origin) * (1.0 / length);
            ([q.y, -q.x, -1.0], k * length, w / length)
        })
        .collect();
    for (basis, k, w) in &local {
        for i in 0..3 {
            b[i] -= w * k * basis[i];
            for j in 0..3 {
                g[i][j] += w * basis[i] * basis[j];
            }
        }
    }
    let c = solve_spd3(g, b);
    let mut res = 0.0;
    let mut norm = 0.0;
    for (basis, k, w) in &local {
        let r = k + c[0] * basis[0] + c[1] * basis[1] + c[2] * basis[2];
        res += w * r * r;
        norm += w * k * k;
    }
    let e_lambda = (res / norm).sqrt().clamp(0.0, 1.0);

    let l2 = length * length;
    let lambda1 = c[0] / l2;
    let lambda2 = c[1] / l2;
    let alpha = c[2] / length + lambda1 * origin.y - lambda2 * origin.x;
    Ok(LambdaFit { lambda1, lambda2, alpha, e_lambda, energy, straight_line: false })
}

/// Cholesky solve of a symmetric positive semidefinite 3×3 system, with a
/// small ridge added when the factorization breaks down.
fn solve_spd3(g: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let trace = g[0][0] + g[1][1] + g[2][2];
    cholesky3(g, b).unwrap_or_else(|| {
        let mut r = g;
        for (i, row) in r.iter_mut().enumerate() {
            row[i] += 1e-12 * trace;
        }
        cholesky3(r, b).unwrap_or([0.0; 3])
    })
}

fn cholesky3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut l = [[0.0f64; 3]; 3];
    let eps = 1e-14 * (a[0][0] + a[1][1] + a[2][2]);
    for i in 0..3 {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > eps) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0; 3];
    for i in 0..3 {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = y[i];
        for k in i + 1..3 {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}
