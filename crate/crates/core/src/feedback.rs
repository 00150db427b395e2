//! Residual-guided projection: the outer edge lengths are swept along fixed
//! deformation paths while e_λ is monitored, and the best grid point wins.
//! Also a gradient-descent diagnostic on (L₁, L₂).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{wrap_pi, CubicBezier, Similarity};
use crate::residual::lambda_fit;
use crate::zone::{angle_constraints, edge_length_bounds, restore, AngleProfile};

/// Lower bound on the primary terminal lengths of the non-inflectional sweep.
pub const TERMINAL_CAP: f64 = 0.12;
/// Floor on the secondary terminal lengths; keeps the swept curve away from a cusp.
pub const TERMINAL_FLOOR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedbackConfig {
    /// stop as soon as e_λ ≤ threshold
    pub threshold: f64,
    /// lower length for the outer edges of inflectional curves
    pub l_min_inflectional: f64,
    /// number of equally spaced t values in [0, 1], endpoints included
    pub t_grid: usize,
    pub passes: usize,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self { threshold: 0.0, l_min_inflectional: 0.27, t_grid: 11, passes: 2 }
    }
}

impl FeedbackConfig {
    pub fn with_threshold(threshold: f64) -> Self {
        Self { threshold, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.threshold) {
            return Err(Error::InvalidInput(format!("threshold {} outside [0, 1)", self.threshold)));
        }
        if self.t_grid < 2 || self.passes < 1 {
            return Err(Error::InvalidInput("need t_grid >= 2 and passes >= 1".into()));
        }
        if !(self.l_min_inflectional > 0.0 && self.l_min_inflectional.is_finite()) {
            return Err(Error::InvalidInput("l_min_inflectional must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Inflectional,
    NonInflectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Threshold,
    SweepEnd,
    BecameNoninflectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub pass: usize,
    pub branch: Classification,
    pub t: f64,
    pub e_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub output: CubicBezier,
    pub e_lambda: f64,
    /// class of the input after the first classification step
    pub classification: Classification,
    pub terminated_by: Termination,
    pub trace: Vec<TracePoint>,
    /// the input fails even the widest angle profile
    pub out_of_warranty: bool,
}

/// The fitted local-minimizer formula for the first terminal length, valid
/// for θ₁ ≥ 0.
pub fn terminal_length_f(theta1: f64, theta2: f64) -> f64 {
    0.00001475 * (10.39 * theta1 - 10.48 * theta2).exp()
        + 0.4574 * theta1 * (1.711 * theta1 - 2.535 * theta2).exp()
        + 2.772 * theta2 * (-0.08504 * theta1 - 0.9109 * theta2).exp()
        - 0.2957 * theta1 * theta2 * (-0.6606 * theta1).exp()
}

fn terminal_first(theta1: f64, theta2: f64, lower: f64) -> f64 {
    // below the chord: mirror in the x-axis
    let (a, b) = if theta1 < 0.0 { (-theta1, wrap_pi(-theta2)) } else { (theta1, theta2) };
    let f = terminal_length_f(a, b);
    if f.is_nan() {
        lower
    } else {
        f.max(lower)
    }
}

fn terminal_pair(theta1: f64, theta2: f64, lower: f64) -> (f64, f64) {
    let l1 = terminal_first(theta1, theta2, lower);
    let l2 = terminal_first(wrap_pi(PI - theta2), wrap_pi(PI - theta1), lower);
    (l1, l2)
}

/// Terminal lengths (𝓛₁, 𝓛₂) for a polygon with end tangent angles θ₁, θ₂
/// (standard position, θ₂ the angle of p2 − p3), bounded below by
/// [`TERMINAL_CAP`]. 𝓛₂ is 𝓛₁ of the curve reflected in the vertical line
/// x = ½, which swaps the ends.
pub fn terminal_lengths(theta1: f64, theta2: f64) -> (f64, f64) {
    terminal_pair(theta1, theta2, TERMINAL_CAP)
}

/// The same formula bounded below by [`TERMINAL_FLOOR`] only. When it
/// differs from [`terminal_lengths`] the sweep visits both targets.
pub fn secondary_terminal_lengths(theta1: f64, theta2: f64) -> (f64, f64) {
    terminal_pair(theta1, theta2, TERMINAL_FLOOR)
}

struct Candidate {
    curve: CubicBezier,
    e: f64,
}

/// Evaluates curves in the standard frame and scores them in the caller's
/// frame, where the report is read.
struct Scorer<'a> {
    input: &'a CubicBezier,
    back: Similarity,
    best: Option<Candidate>,
}

impl Scorer<'_> {
    fn score(&mut self, c: &CubicBezier) -> f64 {
        let world = restore(self.input, &c.transformed(&self.back));
        let e = lambda_fit(&world).map(|f| f.e_lambda).unwrap_or(f64::INFINITY);
        if self.best.as_ref().map_or(true, |b| e < b.e) {
            self.best = Some(Candidate { curve: *c, e });
        }
        e
    }
}

pub fn feedback_project(curve: &CubicBezier, config: &FeedbackConfig) -> Result<ProjectionReport> {
    config.validate()?;
    let (std, t) = curve.standard_position()?;
    let g0 = std.polygon_geometry()?;
    let out_of_warranty = !angle_constraints(&g0, AngleProfile::RelaxedSixth);

    let e0 = lambda_fit(curve)?.e_lambda;
    let mut trace = vec![];
    if e0 <= config.threshold {
        let branch = if g0.inflectional { Classification::Inflectional } else { Classification::NonInflectional };
        trace.push(TracePoint { pass: 0, branch, t: 0.0, e_lambda: e0 });
        return Ok(ProjectionReport {
            output: *curve,
            e_lambda: e0,
            classification: branch,
            terminated_by: Termination::Threshold,
            trace,
            out_of_warranty,
        });
    }

    let bounds = edge_length_bounds(g0.theta1, g0.theta2);
    let l_max = bounds.l_max.max(config.l_min_inflectional);
    let mut targets = vec![terminal_lengths(g0.theta1, g0.theta2)];
    let secondary = secondary_terminal_lengths(g0.theta1, g0.theta2);
    if secondary != targets[0] {
        targets.push(secondary);
    }
    let grid: Vec<f64> = (0..config.t_grid).map(|i| i as f64 / (config.t_grid - 1) as f64).collect();

    let mut scorer = Scorer { input: curve, back: t.inverse(), best: None };
    let mut current = std;
    let mut classification = None;
    let mut crossed = false;
    let mut met = false;

    'passes: for pass in 0..config.passes {
        let c = current.remove_self_intersection();
        let (l1, l2) = c.outer_lengths();
        let clamp = |l: f64| l.clamp(config.l_min_inflectional, l_max);
        let clamped = c.set_edge_lengths(clamp(l1), clamp(l2));
        let inflectional = clamped.polygon_geometry().map(|g| g.inflectional).unwrap_or(false);
        if classification.is_none() {
            classification =
                Some(if inflectional { Classification::Inflectional } else { Classification::NonInflectional });
        }

        let mut start = c;
        if inflectional {
            let (a1, a2) = clamped.outer_lengths();
            let target = config.l_min_inflectional;
            let mut noninf_from = None;
            for &tt in &grid {
                let x = clamped.set_edge_lengths((1.0 - tt) * a1 + tt * target, (1.0 - tt) * a2 + tt * target);
                let still = x.polygon_geometry().map(|g| g.inflectional).unwrap_or(false);
                let e = scorer.score(&x);
                trace.push(TracePoint { pass: pass + 1, branch: Classification::Inflectional, t: tt, e_lambda: e });
                if e <= config.threshold {
                    met = true;
                    break 'passes;
                }
                if !still {
                    noninf_from = Some(x);
                    break;
                }
            }
            match noninf_from {
                Some(x) => {
                    crossed = true;
                    start = x;
                }
                None => {
                    current = scorer.best.as_ref().map_or(clamped, |b| b.curve);
                    continue;
                }
            }
        }

        let (a1, a2) = start.outer_lengths();
        for (k, &(t1, t2)) in targets.iter().enumerate() {
            // t = 0 is the shared start
            for &tt in grid.iter().skip(k.min(1)) {
                let x = start.set_edge_lengths((1.0 - tt) * a1 + tt * t1, (1.0 - tt) * a2 + tt * t2);
                let e = scorer.score(&x);
                trace.push(TracePoint { pass: pass + 1, branch: Classification::NonInflectional, t: tt, e_lambda: e });
                if e <= config.threshold {
                    met = true;
                    break 'passes;
                }
            }
        }
        current = scorer.best.as_ref().map_or(start, |b| b.curve);
    }

    let best = scorer.best.ok_or_else(|| Error::Degenerate("no admissible candidate".into()))?;
    let output = restore(curve, &best.curve.transformed(&scorer.back));
    let e_lambda = lambda_fit(&output)?.e_lambda;
    let terminated_by = if met {
        Termination::Threshold
    } else if crossed {
        Termination::BecameNoninflectional
    } else {
        Termination::SweepEnd
    };
    Ok(ProjectionReport {
        output,
        e_lambda,
        classification: classification.unwrap_or(Classification::NonInflectional),
        terminated_by,
        trace,
        out_of_warranty,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Energy {
    /// ∫κ² ds in standard position
    Bending,
    LambdaResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientStep {
    pub l1: f64,
    pub l2: f64,
    pub energy: f64,
}

const GRADIENT_MIN_LENGTH: f64 = 1e-3;

fn energy_of(c: &CubicBezier, energy: Energy) -> f64 {
    match lambda_fit(c) {
        Ok(f) => match energy {
            Energy::Bending => f.energy,
            Energy::LambdaResidual => f.e_lambda,
        },
        Err(_) => f64::INFINITY,
    }
}

/// Projected gradient descent on the outer edge lengths with fixed end
/// tangents. Uses central differences and a backtracking line search; the
/// trace holds the start point and every accepted step.
pub fn gradient_project(curve: &CubicBezier, energy: Energy, steps: usize) -> Result<(CubicBezier, Vec<GradientStep>)> {
    let (std, t) = curve.standard_position()?;
    std.polygon_geometry()?;
    let at = |l: [f64; 2]| std.set_edge_lengths(l[0], l[1]);
    let f = |l: [f64; 2]| energy_of(&at(l), energy);
    let (a, b) = std.outer_lengths();
    let mut x = [a, b];
    let mut fx = f(x);
    let mut trace = vec![GradientStep { l1: x[0], l2: x[1], energy: fx }];
    let mut step = 0.1;
    for _ in 0..steps {
        if !(fx.is_finite() && fx > 0.0) {
            break;
        }
        let mut g = [0.0; 2];
        for i in 0..2 {
            let h = 1e-6 * x[i].max(1e-2);
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] = (xm[i] - h).max(GRADIENT_MIN_LENGTH);
            g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i]);
        }
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if !(gn > 0.0 && gn.is_finite()) {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [
                (x[0] - step * g[0] / gn).max(GRADIENT_MIN_LENGTH),
                (x[1] - step * g[1] / gn).max(GRADIENT_MIN_LENGTH),
            ];
            let ft = f(trial);
            let moved = (trial[0] - x[0]) * g[0] + (trial[1] - x[1]) * g[1];
            if ft < fx + 1e-4 * moved && trial != x {
                x = trial;
                fx = ft;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(GradientStep { l1: x[0], l2: x[1], energy: fx });
    }
    if trace.len() == 1 {
        return Ok((*curve, trace));
    }
    let out = restore(curve, &at(x).transformed(&t.inverse()));
    Ok((out, trace))
}
