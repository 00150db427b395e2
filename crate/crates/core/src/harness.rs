//! Seeded curve samples, batch experiments and their summary statistics.
//!
//! Samples are generated in blocks of [`BLOCK`] curves; block `b` draws from
//! its own ChaCha stream, so a sample is identical whatever the thread count.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics, Statistics};

use crate::error::{Error, Result};
use crate::feedback::{feedback_project, FeedbackConfig};
use crate::fit::{approximate_with, RefineOptions};
use crate::geom::{wrap_pi, CubicBezier, Point2};
use crate::residual::{lambda_fit, QualityClass};
use crate::zone::{angle_constraints, edge_length_bounds, zone_contains, AngleProfile};

/// Curves per RNG stream.
pub const BLOCK: usize = 1024;

/// Upper bound of L_max over all strict-admissible angles.
const ZONE_L_CEILING: f64 = 3.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// p0 = (0,0), p3 = (1,0), inner points uniform in [−0.5, 1.5] × [−1, 1]
    InnerPointsUnitBox,
    /// four points uniform in the unit disc
    RandomQuadUnitDisc,
    /// standard-position curves uniform in (p1, p2) among those inside the
    /// projection zone with strict angles
    ZoneInterior,
}

impl Generator {
    pub fn parse(s: &str) -> Option<Generator> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintProfile {
    None,
    Strict,
    RelaxedQuarter,
    RelaxedSixth,
}

impl ConstraintProfile {
    pub fn angle_profile(self) -> Option<AngleProfile> {
        match self {
            ConstraintProfile::None => None,
            ConstraintProfile::Strict => Some(AngleProfile::Strict),
            ConstraintProfile::RelaxedQuarter => Some(AngleProfile::RelaxedQuarter),
            ConstraintProfile::RelaxedSixth => Some(AngleProfile::RelaxedSixth),
        }
    }

    pub fn parse(s: &str) -> Option<ConstraintProfile> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).ok()
    }

    /// Whether a curve (any position) passes the profile.
    pub fn admits(self, c: &CubicBezier) -> bool {
        match self.angle_profile() {
            None => true,
            Some(p) => c
                .standard_position()
                .and_then(|(s, _)| s.polygon_geometry())
                .map(|g| angle_constraints(&g, p))
                .unwrap_or(false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub count: usize,
    pub generator: Generator,
    pub seed: u64,
    pub constraint_profile: ConstraintProfile,
}

impl SampleSpec {
    pub fn new(count: usize, generator: Generator, seed: u64, constraint_profile: ConstraintProfile) -> Self {
        Self { count, generator, seed, constraint_profile }
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn unit_disc(rng: &mut ChaCha8Rng) -> Point2 {
    let r = rng.random::<f64>().sqrt();
    Point2::from_angle(TAU * rng.random::<f64>()) * r
}

/// One raw draw from the generator, before any profile filter. `None` for
/// rejected or degenerate draws.
fn draw(generator: Generator, rng: &mut ChaCha8Rng) -> Option<CubicBezier> {
    match generator {
        Generator::InnerPointsUnitBox => {
            let mut inner = || Point2::new(rng.random_range(-0.5..1.5), rng.random_range(-1.0..1.0));
            let p1 = inner();
            let p2 = inner();
            Some(CubicBezier::new(Point2::ORIGIN, p1, p2, Point2::new(1.0, 0.0)))
        }
        Generator::RandomQuadUnitDisc => {
            let c = CubicBezier::new(unit_disc(rng), unit_disc(rng), unit_disc(rng), unit_disc(rng));
            c.standard_position().ok().map(|_| c)
        }
        Generator::ZoneInterior => draw_zone(rng),
    }
}

/// Uniform in (p1, p2): angles uniform, lengths with density ∝ L.
fn draw_zone(rng: &mut ChaCha8Rng) -> Option<CubicBezier> {
    let (lo, hi) = (PI / 3.0, TAU - PI / 3.0);
    let beta1 = rng.random_range(lo..hi);
    let beta2 = rng.random_range(lo..hi);
    let l1 = ZONE_L_CEILING * rng.random::<f64>().sqrt();
    let l2 = ZONE_L_CEILING * rng.random::<f64>().sqrt();
    if (beta1 - beta2).abs() >= 0.4 * PI {
        return None;
    }
    let theta1 = wrap_pi(PI - beta1);
    let theta2 = wrap_pi(beta2);
    let b = edge_length_bounds(theta1, theta2);
    if !(b.contains(l1) && b.contains(l2)) {
        return None;
    }
    let p1 = Point2::from_angle(theta1) * l1;
    let p2 = Point2::new(1.0, 0.0) + Point2::from_angle(theta2) * l2;
    let c = CubicBezier::new(Point2::ORIGIN, p1, p2, Point2::new(1.0, 0.0));
    let g = c.polygon_geometry().ok()?;
    zone_contains(&g).then_some(c)
}

fn admitted(spec: &SampleSpec, c: &CubicBezier) -> bool {
    spec.constraint_profile.admits(c)
}

/// Deterministic sample of `spec.count` curves satisfying the profile.
pub fn sample_curves(spec: &SampleSpec) -> Vec<CubicBezier> {
    let blocks = spec.count.div_ceil(BLOCK);
    let per_block: Vec<Vec<CubicBezier>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let want = BLOCK.min(spec.count - b * BLOCK);
            let mut rng = block_rng(spec.seed, b);
            let mut out = Vec::with_capacity(want);
            while out.len() < want {
                if let Some(c) = draw(spec.generator, &mut rng) {
                    if admitted(spec, &c) {
                        out.push(c);
                    }
                }
            }
            out
        })
        .collect();
    per_block.into_iter().flatten().collect()
}

/// Fraction of `n` raw generator draws accepted by `profile`.
pub fn acceptance_fraction(generator: Generator, profile: ConstraintProfile, n: usize, seed: u64) -> f64 {
    let blocks = n.div_ceil(BLOCK);
    let (hit, total) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let m = BLOCK.min(n - b * BLOCK);
            let mut rng = block_rng(seed, b);
            let mut hit = 0usize;
            let mut total = 0usize;
            while total < m {
                if let Some(c) = draw(generator, &mut rng) {
                    total += 1;
                    hit += profile.admits(&c) as usize;
                }
            }
            (hit, total)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    hit as f64 / total.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub p99: f64,
    pub max: f64,
}

impl Stats {
    /// `None` for an empty slice; NaNs are ignored.
    pub fn of(values: &[f64]) -> Option<Stats> {
        let v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        if v.is_empty() {
            return None;
        }
        let mean = v.iter().mean();
        let max = Statistics::max(v.iter());
        let mut data = Data::new(v);
        Some(Stats { mean, median: data.median(), p99: data.percentile(99), max })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub n: usize,
    pub failures: usize,
    pub e_lambda: Stats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spearman: Option<f64>,
    pub runtime_s: f64,
    pub spec: SampleSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<FeedbackConfig>,
}

/// One CSV row. `l2`/`h1` are absent for residual-only experiments and all
/// values are absent for failed curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub curve_id: usize,
    pub e_lambda: Option<f64>,
    pub l2: Option<f64>,
    pub h1: Option<f64>,
    pub classification: Option<QualityClass>,
    #[serde(skip)]
    pub error: Option<String>,
}

impl Row {
    fn failed(curve_id: usize, err: Error) -> Row {
        log::warn!("curve {curve_id}: {err}");
        Row { curve_id, e_lambda: None, l2: None, h1: None, classification: None, error: Some(err.to_string()) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub summary: ExperimentSummary,
    pub rows: Vec<Row>,
    /// curves actually processed, in row order
    pub curves: Vec<CubicBezier>,
}

impl Experiment {
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["curve_id", "e_lambda", "l2", "h1", "classification"]).expect("in-memory write");
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.curve_id.to_string(),
            num(r.e_lambda),
            num(r.l2),
            num(r.h1),
            r.classification.map(|c| c.as_str().to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

/// Fractional ranks, ties sharing the average rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation; `None` with fewer than two points or a
/// constant input.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ra = ranks(a);
    let rb = ranks(b);
    let cov = ra.iter().covariance(rb.iter());
    let sa = ra.iter().std_dev();
    let sb = rb.iter().std_dev();
    let rho = cov / (sa * sb);
    rho.is_finite().then_some(rho)
}

fn summarize(name: &str, spec: &SampleSpec, rows: &[Row], started: Instant, config: Option<FeedbackConfig>) -> ExperimentSummary {
    let pick = |f: fn(&Row) -> Option<f64>| rows.iter().filter_map(f).collect::<Vec<f64>>();
    let e = pick(|r| r.e_lambda);
    let l2 = pick(|r| r.l2);
    let h1 = pick(|r| r.h1);
    let nan = Stats { mean: f64::NAN, median: f64::NAN, p99: f64::NAN, max: f64::NAN };
    let paired: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.e_lambda?, r.l2?))).collect();
    let (pa, pb): (Vec<f64>, Vec<f64>) = paired.into_iter().unzip();
    ExperimentSummary {
        experiment: name.to_string(),
        n: rows.len(),
        failures: rows.iter().filter(|r| r.error.is_some()).count(),
        e_lambda: Stats::of(&e).unwrap_or(nan),
        l2: Stats::of(&l2),
        h1: Stats::of(&h1),
        spearman: spearman(&pa, &pb),
        runtime_s: started.elapsed().as_secs_f64(),
        spec: *spec,
        config,
    }
}

/// λ-fit and full elastica fit for every sampled curve.
pub fn run_correlation_experiment(spec: &SampleSpec) -> Experiment {
    run_correlation_with(spec, &RefineOptions::default())
}

pub fn run_correlation_with(spec: &SampleSpec, opts: &RefineOptions) -> Experiment {
    let started = Instant::now();
    let curves = sample_curves(spec);
    let rows = correlation_rows(&curves, opts);
    let summary = summarize("correlation", spec, &rows, started, None);
    Experiment { summary, rows, curves }
}

/// Correlation rows for given curves.
pub fn correlation_rows(curves: &[CubicBezier], opts: &RefineOptions) -> Vec<Row> {
    curves
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let fit = match lambda_fit(c) {
                Ok(f) => f,
                Err(e) => return Row::failed(i, e),
            };
            match approximate_with(c, opts) {
                Ok(r) => Row {
                    curve_id: i,
                    e_lambda: Some(fit.e_lambda),
                    l2: Some(r.l2),
                    h1: Some(r.h1),
                    classification: Some(fit.class()),
                    error: None,
                },
                Err(e) => Row::failed(i, e),
            }
        })
        .collect()
}

/// Feedback projection of every sampled curve; statistics of the output e_λ.
pub fn run_projection_experiment(spec: &SampleSpec, config: &FeedbackConfig) -> Experiment {
    let started = Instant::now();
    let curves = sample_curves(spec);
    let rows: Vec<Row> = curves
        .par_iter()
        .enumerate()
        .map(|(i, c)| match feedback_project(c, config) {
            Ok(r) => Row {
                curve_id: i,
                e_lambda: Some(r.e_lambda),
                l2: None,
                h1: None,
                classification: Some(QualityClass::classify(r.e_lambda)),
                error: None,
            },
            Err(e) => Row::failed(i, e),
        })
        .collect();
    let summary = summarize("projection", spec, &rows, started, Some(*config));
    Experiment { summary, rows, curves }
}

/// λ-residual over `n` zone-interior curves.
pub fn run_zone_sweep(n: usize, seed: u64) -> Experiment {
    let started = Instant::now();
    let spec = SampleSpec::new(n, Generator::ZoneInterior, seed, ConstraintProfile::None);
    let curves = sample_curves(&spec);
    let rows: Vec<Row> = curves
        .par_iter()
        .enumerate()
        .map(|(i, c)| match lambda_fit(c) {
            Ok(f) => Row {
                curve_id: i,
                e_lambda: Some(f.e_lambda),
                l2: None,
                h1: None,
                classification: Some(f.class()),
                error: None,
            },
            Err(e) => Row::failed(i, e),
        })
        .collect();
    let summary = summarize("zone_sweep", &spec, &rows, started, None);
    Experiment { summary, rows, curves }
}

/// Thread pool sized by `ELB_THREADS` when set, otherwise rayon's default.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("ELB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("ELB_THREADS must be a positive integer, got {v:?}")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_sized() {
        for g in [Generator::InnerPointsUnitBox, Generator::RandomQuadUnitDisc, Generator::ZoneInterior] {
            let spec = SampleSpec::new(BLOCK + 37, g, 7, ConstraintProfile::Strict);
            let a = sample_curves(&spec);
            assert_eq!(a.len(), BLOCK + 37);
            assert_eq!(a, sample_curves(&spec));
            assert_ne!(a, sample_curves(&SampleSpec { seed: 8, ..spec }));
            assert!(a.iter().all(|c| ConstraintProfile::Strict.admits(c)));
        }
    }

    #[test]
    fn single_thread_pool_gives_same_sample() {
        let spec = SampleSpec::new(3000, Generator::RandomQuadUnitDisc, 3, ConstraintProfile::RelaxedQuarter);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        assert_eq!(pool.install(|| sample_curves(&spec)), sample_curves(&spec));
    }

    #[test]
    fn zone_interior_curves_are_in_zone() {
        let spec = SampleSpec::new(2000, Generator::ZoneInterior, 11, ConstraintProfile::None);
        for c in sample_curves(&spec) {
            assert!(c.is_standard());
            assert!(zone_contains(&c.polygon_geometry().unwrap()));
        }
    }

    #[test]
    fn unit_box_inner_points_in_range() {
        let spec = SampleSpec::new(500, Generator::InnerPointsUnitBox, 1, ConstraintProfile::None);
        for c in sample_curves(&spec) {
            assert!(c.is_standard());
            for p in [c.p1, c.p2] {
                assert!((-0.5..1.5).contains(&p.x) && (-1.0..1.0).contains(&p.y));
            }
        }
    }

    #[test]
    fn stats_order() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        let s = Stats::of(&v).unwrap();
        assert!((s.mean - 500.5).abs() < 1e-12);
        assert!(s.median <= s.p99 && s.p99 <= s.max);
        assert_eq!(s.max, 1000.0);
        assert!((s.p99 - 990.0).abs() < 1.5);
        assert!(Stats::of(&[]).is_none());
    }

    #[test]
    fn spearman_oracle() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((spearman(&a, &[2.0, 4.0, 9.0, 16.0, 100.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&a, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        // textbook formula without ties: 1 − 6Σd²/(n(n²−1))
        let b = [2.0, 1.0, 4.0, 3.0, 5.0];
        let want = 1.0 - 6.0 * 4.0 / (5.0 * 24.0);
        assert!((spearman(&a, &b).unwrap() - want).abs() < 1e-12);
        assert_eq!(ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert!(spearman(&a, &[1.0; 5]).is_none());
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            Row { curve_id: 0, e_lambda: Some(0.5), l2: Some(0.01), h1: Some(0.02), classification: Some(QualityClass::Borderline), error: None },
            Row::failed(1, Error::Degenerate("x".into())),
        ];
        let csv = rows_to_csv(&rows);
        assert_eq!(csv, "curve_id,e_lambda,l2,h1,classification\n0,0.5,0.01,0.02,Borderline\n1,,,,\n");
    }

    #[test]
    fn parse_names() {
        assert_eq!(Generator::parse("zone_interior"), Some(Generator::ZoneInterior));
        assert_eq!(ConstraintProfile::parse("relaxed_sixth"), Some(ConstraintProfile::RelaxedSixth));
        assert_eq!(ConstraintProfile::parse("none"), Some(ConstraintProfile::None));
        assert!(Generator::parse("nope").is_none());
    }

    #[test]
    fn small_projection_experiment_summary() {
        let spec = SampleSpec::new(40, Generator::RandomQuadUnitDisc, 5, ConstraintProfile::Strict);
        let ex = run_projection_experiment(&spec, &FeedbackConfig::default());
        assert_eq!(ex.summary.n, 40);
        assert_eq!(ex.summary.failures, 0);
        let s = ex.summary.e_lambda;
        assert!(s.median <= s.p99 && s.p99 <= s.max);
        let json = serde_json::to_value(&ex.summary).unwrap();
        assert_eq!(json["spec"]["seed"], 5);
        assert_eq!(json["config"]["passes"], 2);
    }
}
