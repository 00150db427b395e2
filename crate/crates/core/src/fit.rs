//! Elastica approximation of a Bézier curve: a first guess read off the
//! λ-fit, then local minimization of the L² distance.
//!
//! Both distances compare the Bézier point at arc length s with the
//! elastica point at the same fraction s/L of its own length:
//!
//! ```text
//! L²  = √( ∫ ‖γ_B − γ_e‖² ds / L³ )
//! H¹  = √( L²² + ∫ (θ_B − θ_e)² ds / L )
//! ```

use serde::{Deserialize, Serialize};

use crate::elastica::{Canonical, ElasticaSegment};
use crate::error::{Error, Result};
use crate::geom::{wrap_pi, CubicBezier, Point2, Similarity};
use crate::optim::{levenberg_marquardt, nelder_mead, LevenbergMarquardtOptions, NelderMeadOptions};
use crate::quad::GaussLegendre;
use crate::curve::ParametricCurve;
use crate::residual::{lambda_fit, residual_of_parametric, LambdaFit};

/// Largest modulus the first guess will produce.
pub const K_MAX: f64 = 1000.0;
/// Modulus used for nearly circular input.
pub const K_CIRCLE: f64 = 50.0;

const GRID: usize = 64;
const SEPARATRIX_SPAN: f64 = 12.0;

/// Samples of a Bézier curve on quadrature nodes, with arc-length fraction
/// and unwrapped tangent angle.
#[derive(Debug, Clone)]
pub struct BezierProfile {
    pub length: f64,
    pub nodes: Vec<ProfileNode>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileNode {
    /// s(t)/L
    pub u: f64,
    pub point: Point2,
    pub theta: f64,
    pub curvature: f64,
    /// quadrature weight of ds/L; the weights sum to 1
    pub weight: f64,
}

impl BezierProfile {
    /// Composite rule of `panels` equal panels in t, `order` nodes each.
    pub fn new<C: ParametricCurve>(curve: &C, panels: usize, order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let g16 = GaussLegendre::rule16();
        let speed = |t: f64| curve.sample(t).speed;
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut s_acc = 0.0;
        let mut prev = curve.sample(0.0).tangent_angle;
        for p in 0..panels {
            let a = p as f64 * h;
            let b = if p + 1 == panels { 1.0 } else { a + h };
            for (t, w) in rule.mapped(a, b) {
                let c = curve.sample(t);
                let theta = prev + wrap_pi(c.tangent_angle - prev);
                prev = theta;
                nodes.push(ProfileNode {
                    u: s_acc + g16.integrate(a, t, speed),
                    point: c.point,
                    theta,
                    curvature: c.curvature,
                    weight: w * c.speed,
                });
            }
            s_acc += g16.integrate(a, b, speed);
        }
        for n in &mut nodes {
            n.u /= s_acc;
            n.weight /= s_acc;
        }
        Self { length: s_acc, nodes }
    }

    /// Profile used inside the optimizer.
    pub fn coarse<C: ParametricCurve>(curve: &C) -> Self {
        Self::new(curve, 8, 12)
    }

    /// Profile used for reported distances.
    pub fn fine<C: ParametricCurve>(curve: &C) -> Self {
        Self::new(curve, 32, 16)
    }

    /// Squared L² distance.
    pub fn l2_sq(&self, seg: &ElasticaSegment) -> f64 {
        let ev = seg.evaluator();
        let inv = 1.0 / (self.length * self.length);
        self.nodes.iter().map(|n| n.weight * (n.point - ev.point(n.u)).norm_sq()).sum::<f64>() * inv
    }

    pub fn l2(&self, seg: &ElasticaSegment) -> f64 {
        self.l2_sq(seg).sqrt()
    }

    /// (L², H¹) in one pass.
    pub fn distances(&self, seg: &ElasticaSegment) -> (f64, f64) {
        let ev = seg.evaluator();
        let inv = 1.0 / (self.length * self.length);
        let mut l2 = 0.0;
        let mut mean = 0.0;
        let mut diffs = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let e = ev.at(n.u);
            l2 += n.weight * (n.point - e.point).norm_sq() * inv;
            let d = n.theta - e.tangent_angle;
            mean += n.weight * d;
            diffs.push(d);
        }
        let shift = std::f64::consts::TAU * (mean / std::f64::consts::TAU).round();
        let ang: f64 = self.nodes.iter().zip(&diffs).map(|(n, d)| n.weight * (d - shift).powi(2)).sum();
        (l2.sqrt(), (l2 + ang).sqrt())
    }
}

pub fn l2_distance(bezier: &CubicBezier, seg: &ElasticaSegment) -> f64 {
    BezierProfile::fine(bezier).l2(seg)
}

pub fn h1_distance(bezier: &CubicBezier, seg: &ElasticaSegment) -> f64 {
    BezierProfile::fine(bezier).distances(seg).1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub segment: ElasticaSegment,
    pub l2: f64,
    pub h1: f64,
    pub first_guess: ElasticaSegment,
    pub first_guess_l2: f64,
    /// objective evaluations spent in refinement
    pub iterations: usize,
    pub converged: bool,
}

/// First guess followed by refinement.
pub fn approximate(curve: &CubicBezier) -> Result<FitResult> {
    approximate_with(curve, &RefineOptions::default())
}

pub fn approximate_with(curve: &CubicBezier, opts: &RefineOptions) -> Result<FitResult> {
    let guess = first_guess(curve)?;
    refine_with(curve, &guess, opts)
}

/// Elastica segment with roughly the shape of `curve`, read off the λ-fit.
pub fn first_guess(curve: &CubicBezier) -> Result<ElasticaSegment> {
    let fit = lambda_fit(curve)?;
    guess_from_fit(curve, &fit)
}

/// [`first_guess`] for any parametric curve.
pub fn first_guess_parametric<C: ParametricCurve>(curve: &C) -> Result<ElasticaSegment> {
    let fit = residual_of_parametric(curve)?;
    guess_from_fit(curve, &fit)
}

fn guess_from_fit<C: ParametricCurve>(curve: &C, fit: &LambdaFit) -> Result<ElasticaSegment> {
    let profile = BezierProfile::coarse(curve);
    let len = profile.length;
    let start = curve.sample(0.0);
    let p0 = start.point;
    if fit.straight_line {
        let p3 = curve.sample(1.0).point;
        return ElasticaSegment::new(0.0, 0.0, 1.0, Similarity::new(len, (p3 - p0).angle(), p0));
    }
    let lam = Point2::new(fit.lambda1, fit.lambda2);
    let mean_kappa: f64 = profile.nodes.iter().map(|n| n.weight * n.curvature).sum();

    let circle = |mean_kappa: f64| {
        if !(mean_kappa.abs() * len > 1e-12) {
            return ElasticaSegment::new(0.0, 0.0, 1.0, Similarity::new(len, start.tangent_angle, p0));
        }
        let k = K_CIRCLE.copysign(mean_kappa);
        let sigma = 2.0 * K_CIRCLE / mean_kappa.abs();
        let rotation = start.tangent_angle;
        let pl = Similarity::new(sigma, rotation, p0);
        ElasticaSegment::new(k, 0.0, len / sigma, pl)
    };

    if lam.norm() * len * len < 1e-8 {
        return circle(mean_kappa);
    }
    let sigma = lam.norm().powf(-0.5);
    let psi = lam.y.atan2(lam.x);
    let k_sq: f64 = profile
        .nodes
        .iter()
        .map(|n| {
            let kt = sigma * n.curvature;
            n.weight * (kt * kt + 2.0 * (1.0 - (n.theta - psi).cos())) / 4.0
        })
        .sum();
    let k_abs = k_sq.sqrt();
    if !(k_abs <= K_MAX) {
        return circle(mean_kappa);
    }
    let span = len / sigma;

    let mut best: Option<(f64, ElasticaSegment)> = None;
    for sign in [1.0, -1.0] {
        let k = sign * k_abs;
        let xi = Canonical::new(k);
        let period = xi.period();
        let range = if period.is_finite() && period < SEPARATRIX_SPAN { period } else { SEPARATRIX_SPAN };
        let offset = if period.is_finite() && period < SEPARATRIX_SPAN { 0.0 } else { -0.5 * SEPARATRIX_SPAN };
        for i in 0..GRID {
            let s0 = offset + range * i as f64 / GRID as f64;
            let rot = Similarity::new(sigma, psi, Point2::ORIGIN);
            let t = p0 - rot.apply(xi.point(s0));
            let seg = ElasticaSegment { k, s_start: s0, s_end: s0 + span, placement: Similarity::new(sigma, psi, t) };
            let d = profile.l2_sq(&seg);
            if best.as_ref().map_or(true, |(b, _)| d < *b) {
                best = Some((d, seg));
            }
        }
    }
    let (_, seg) = best.ok_or_else(|| Error::Degenerate("no first guess".into()))?;
    seg.validate()?;
    Ok(seg)
}

/// Parameterization used by the optimizer, relative to the curve's standard frame:
/// `[asinh k, s_start, ln span, ln scale, rotation, tx, ty]`.
fn encode(seg: &ElasticaSegment) -> [f64; 7] {
    let pl = &seg.placement;
    [
        seg.k.asinh(),
        seg.s_start,
        seg.span().ln(),
        pl.scale.ln(),
        pl.rotation,
        pl.translation.x,
        pl.translation.y,
    ]
}

fn decode(p: &[f64]) -> Option<ElasticaSegment> {
    let k = p[0].sinh();
    let span = p[2].exp();
    let scale = p[3].exp();
    let ok = k.is_finite()
        && k.abs() <= K_MAX
        && p[1] + span > p[1]
        && scale.is_finite()
        && scale > 0.0
        && span <= Canonical::new(k).max_span();
    ok.then(|| ElasticaSegment {
        k,
        s_start: p[1],
        s_end: p[1] + span,
        placement: Similarity::new(scale, p[4], Point2::new(p[5], p[6])),
    })
}

/// Budget of the refinement stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    /// Nelder–Mead runs after the first one, each from a perturbed simplex
    pub restarts: usize,
    /// evaluations per Nelder–Mead run; 0 skips the simplex stage
    pub nm_max_evals: usize,
    /// Levenberg–Marquardt iterations before and after the simplex stage
    pub lm_iters: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { restarts: 3, nm_max_evals: 400, lm_iters: 60 }
    }
}

/// Local minimization of the L² distance starting from `init`.
pub fn refine(curve: &CubicBezier, init: &ElasticaSegment) -> Result<FitResult> {
    refine_with(curve, init, &RefineOptions::default())
}

pub fn refine_with(curve: &CubicBezier, init: &ElasticaSegment, opts: &RefineOptions) -> Result<FitResult> {
    init.validate()?;
    let (std, t) = curve.standard_position()?;
    let init_std = init.transformed(&t);
    let coarse = BezierProfile::coarse(&std);
    let fine = BezierProfile::fine(&std);

    let objective = |p: &[f64]| match decode(p) {
        Some(seg) => coarse.l2_sq(&seg),
        None => f64::INFINITY,
    };
    let residuals = |p: &[f64], out: &mut Vec<f64>| {
        let Some(seg) = decode(p) else { return false };
        let ev = seg.evaluator();
        out.clear();
        let inv = 1.0 / coarse.length;
        for n in &coarse.nodes {
            let d = (n.point - ev.point(n.u)) * (n.weight.sqrt() * inv);
            out.push(d.x);
            out.push(d.y);
        }
        true
    };
    let lm_opts = LevenbergMarquardtOptions { max_iters: opts.lm_iters, ..Default::default() };

    let x0 = encode(&init_std);
    let mut best_x = x0.to_vec();
    let mut best_f = objective(&x0);
    let mut evals = 1;
    let mut converged = best_f < 1e-26;
    let consider = |m: crate::optim::Minimum, best_x: &mut Vec<f64>, best_f: &mut f64, evals: &mut usize| {
        *evals += m.evals;
        if m.f <= *best_f {
            *best_x = m.x;
            *best_f = m.f;
        }
        m.converged
    };

    // exact start (straight lines): nothing to refine
    let exact = best_f < 1e-26;
    if opts.lm_iters > 0 && !exact {
        let m = levenberg_marquardt(residuals, &best_x, lm_opts);
        converged = consider(m, &mut best_x, &mut best_f, &mut evals);
    }
    if opts.nm_max_evals > 0 && !exact {
        let base = [0.1, 0.1 * init_std.span().max(0.1), 0.1, 0.1, 0.1, 0.05, 0.05];
        let nm_opts = NelderMeadOptions { max_evals: opts.nm_max_evals, ..Default::default() };
        for r in 0..=opts.restarts {
            let scale = [1.0, 0.5, -0.3, 0.2][r % 4] / (1 + r / 4) as f64;
            let steps: Vec<f64> =
                base.iter().enumerate().map(|(i, s)| s * scale * if r > 0 && i % 2 == 1 { -1.0 } else { 1.0 }).collect();
            let start = best_x.clone();
            let m = nelder_mead(objective, &start, &steps, nm_opts);
            converged = consider(m, &mut best_x, &mut best_f, &mut evals);
        }
        if opts.lm_iters > 0 {
            let m = levenberg_marquardt(residuals, &best_x, lm_opts);
            converged |= consider(m, &mut best_x, &mut best_f, &mut evals);
        }
    }

    let back = t.inverse();
    let init_l2 = fine.l2(&init_std);
    let candidate = decode(&best_x).unwrap_or(init_std);
    let (mut seg_std, (mut l2, mut h1)) = (candidate, fine.distances(&candidate));
    if !(l2 <= init_l2) {
        seg_std = init_std;
        (l2, h1) = fine.distances(&init_std);
    }
    Ok(FitResult {
        segment: seg_std.transformed(&back),
        l2,
        h1,
        first_guess: *init,
        first_guess_l2: init_l2,
        iterations: evals,
        converged,
    })
}
