//! The canonical elastica family `ξ_k(s) = (2E(s,k) − s, 2k(1 − cn(s,k)))`
//! and positioned segments of it.
//!
//! ξ_k is unit speed with tangent `(2dn² − 1, 2k·sn·dn)` and curvature
//! `2k·cn`, so `κ + y − 2k = 0` along the whole curve. Segments carry a
//! *signed* modulus: `k < 0` denotes the mirror image of `ξ_|k|` in the
//! x-axis, which is what the same formula gives for negative k. Without it,
//! curves that only turn clockwise (|k| > 1) would not be reachable through
//! an orientation-preserving placement.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveSample, ParametricCurve};
use crate::elliptic::{JacobiKernel, Modulus};
use crate::error::{Error, Result};
use crate::geom::{Point2, Similarity};

/// Maximum span of a segment, in real periods of cn.
pub const MAX_PERIODS: f64 = 8.0;

/// `ξ_k(s)`.
pub fn xi_eval(s: f64, k: Modulus) -> Point2 {
    Canonical::new(k.get()).point(s)
}

/// Signed curvature of ξ_k at arc parameter s: `2k·cn(s, k)`.
pub fn xi_curvature(s: f64, k: Modulus) -> f64 {
    Canonical::new(k.get()).curvature(s)
}

/// Evaluator for ξ_k with a signed modulus.
#[derive(Debug, Clone)]
pub struct Canonical {
    k: f64,
    kernel: JacobiKernel,
}

/// Point, tangent angle and curvature of ξ_k at one arc parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalSample {
    pub point: Point2,
    /// continuous (unwrapped) tangent angle
    pub tangent_angle: f64,
    pub curvature: f64,
}

impl Canonical {
    pub fn new(k: f64) -> Self {
        let kernel = JacobiKernel::new(Modulus::new(k.abs()).expect("finite modulus"));
        Self { k, kernel }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn sample(&self, s: f64) -> CanonicalSample {
        let v = self.kernel.eval(s);
        let sign = if self.k < 0.0 { -1.0 } else { 1.0 };
        CanonicalSample {
            point: Point2::new(2.0 * v.e - s, 2.0 * self.k * (1.0 - v.cn)),
            tangent_angle: 2.0 * sign * v.phase,
            curvature: 2.0 * self.k * v.cn,
        }
    }

    pub fn point(&self, s: f64) -> Point2 {
        self.sample(s).point
    }

    pub fn curvature(&self, s: f64) -> f64 {
        2.0 * self.k * self.kernel.eval(s).cn
    }

    /// Real period of the curvature function (infinite at |k| = 1; 2π at k = 0).
    pub fn period(&self) -> f64 {
        self.kernel.cn_period()
    }

    /// Longest admissible `s_end − s_start`.
    pub fn max_span(&self) -> f64 {
        MAX_PERIODS * self.period()
    }
}

/// A piece of ξ_k on `[s_start, s_end]` placed in the plane by a similarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticaSegment {
    /// signed modulus; negative values are mirror images
    pub k: f64,
    pub s_start: f64,
    pub s_end: f64,
    #[serde(flatten)]
    pub placement: Similarity,
}

impl ElasticaSegment {
    pub fn new(k: f64, s_start: f64, s_end: f64, placement: Similarity) -> Result<Self> {
        let seg = Self { k, s_start, s_end, placement };
        seg.validate()?;
        Ok(seg)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.k, self.s_start, self.s_end, self.placement.scale, self.placement.rotation]
            .iter()
            .all(|v| v.is_finite())
            && self.placement.translation.is_finite();
        if !finite {
            return Err(Error::InvalidInput("non-finite segment parameter".into()));
        }
        if self.s_end <= self.s_start {
            return Err(Error::InvalidInput("segment needs s_end > s_start".into()));
        }
        if self.placement.scale <= 0.0 {
            return Err(Error::InvalidInput("segment scale must be positive".into()));
        }
        Ok(())
    }

    /// World length: scale · (s_end − s_start).
    pub fn length(&self) -> f64 {
        self.placement.scale * (self.s_end - self.s_start)
    }

    pub fn span(&self) -> f64 {
        self.s_end - self.s_start
    }

    pub fn evaluator(&self) -> SegmentEvaluator {
        SegmentEvaluator { seg: *self, xi: Canonical::new(self.k) }
    }

    /// Point at u ∈ [0, 1]; u is proportional to arc length.
    pub fn eval(&self, u: f64) -> Point2 {
        self.evaluator().point(u)
    }

    /// Applies a further similarity to the placement.
    pub fn transformed(&self, t: &Similarity) -> ElasticaSegment {
        ElasticaSegment { placement: t.compose(&self.placement), ..*self }
    }

    /// `n` points equally spaced in arc length.
    pub fn polyline(&self, n: usize) -> Vec<Point2> {
        let ev = self.evaluator();
        let n = n.max(2);
        (0..n).map(|i| ev.point(i as f64 / (n - 1) as f64)).collect()
    }
}

/// Segment with its elliptic kernel prepared, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct SegmentEvaluator {
    seg: ElasticaSegment,
    xi: Canonical,
}

/// World-space sample of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSample {
    pub point: Point2,
    pub tangent_angle: f64,
    pub curvature: f64,
}

impl SegmentEvaluator {
    pub fn segment(&self) -> &ElasticaSegment {
        &self.seg
    }

    pub fn at(&self, u: f64) -> SegmentSample {
        let s = self.seg.s_start + u * (self.seg.s_end - self.seg.s_start);
        let c = self.xi.sample(s);
        let pl = &self.seg.placement;
        SegmentSample {
            point: pl.apply(c.point),
            tangent_angle: c.tangent_angle + pl.rotation,
            curvature: c.curvature / pl.scale,
        }
    }

    pub fn point(&self, u: f64) -> Point2 {
        self.at(u).point
    }
}

impl ParametricCurve for SegmentEvaluator {
    fn sample(&self, t: f64) -> CurveSample {
        let s = self.at(t);
        CurveSample { point: s.point, speed: self.seg.length(), tangent_angle: s.tangent_angle, curvature: s.curvature }
    }
}
