//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use elastibez::curve::FnCurve;
use elastibez::elastica::{xi_curvature, xi_eval, ElasticaSegment};
use elastibez::elliptic::{JacobiKernel, Modulus};
use elastibez::feedback::{feedback_project, gradient_project, Energy, FeedbackConfig};
use elastibez::fit::RefineOptions;
use elastibez::geom::{CubicBezier, Point2, Similarity};
use elastibez::harness::{
    acceptance_fraction, correlation_rows, run_zone_sweep, sample_curves, spearman, ConstraintProfile, Generator,
    SampleSpec, Stats,
};
use elastibez::residual::{lambda_fit, residual_of_parametric};
use elastibez::zone::{geometric_project_with, AngleProfile};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Five-point Gauss–Legendre, composite over `pieces` equal panels.
fn gl5<F: Fn(f64) -> f64>(a: f64, b: f64, pieces: usize, f: F) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / pieces as f64;
    let mut acc = 0.0;
    for p in 0..pieces {
        let mid = a + (p as f64 + 0.5) * h;
        for i in 0..5 {
            acc += W[i] * f(mid + 0.5 * h * X[i]);
        }
    }
    acc * 0.5 * h
}

fn elliptic_kernel() -> Outcome {
    let started = Instant::now();
    let mut worst_id = 0.0f64;
    let mut worst_e = 0.0f64;
    for j in 0..=20 {
        let k = j as f64 * 0.05;
        let kern = JacobiKernel::new(Modulus::new(k).unwrap());
        let mut prev = (0.0, 0.0);
        for i in 0..=80 {
            let s = -20.0 + i as f64 * 0.5;
            let v = kern.eval(s);
            worst_id = worst_id.max((v.sn * v.sn + v.cn * v.cn - 1.0).abs());
            worst_id = worst_id.max((v.dn * v.dn + k * k * v.sn * v.sn - 1.0).abs());
            if i > 0 {
                let q = gl5(prev.0, s, 4, |t| kern.eval(t).dn.powi(2));
                worst_e = worst_e.max((v.e - prev.1 - q).abs());
            }
            prev = (s, v.e);
        }
    }
    let mut worst_ext = 0.0f64;
    for k in [1.05, 1.3, 1.7, 2.5, 4.0] {
        let kern = JacobiKernel::new(Modulus::new(k).unwrap());
        for s in [-3.0, -1.1, 0.4, 1.0, 2.7, 6.0] {
            let q = gl5(0.0, s, 400, |t| kern.eval(t).dn.powi(2));
            worst_ext = worst_ext.max((kern.eval(s).e - q).abs());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    check(
        worst_id <= 1e-10 && worst_e <= 1e-10 && worst_ext <= 1e-8 && secs < 5.0,
        format!("identities {worst_id:.1e}, E' vs dn² {worst_e:.1e}, k>1 quadrature {worst_ext:.1e}, {secs:.2}s"),
    )
}

fn elastica_structure() -> Outcome {
    let started = Instant::now();
    let (mut speed_err, mut kappa_err) = (0.0f64, 0.0f64);
    // central differences with one Richardson step
    let diffs = |s: f64, m: Modulus, h: f64| {
        let (a, b, c) = (xi_eval(s - h, m), xi_eval(s, m), xi_eval(s + h, m));
        ((c - a) * (0.5 / h), (c - b * 2.0 + a) * (1.0 / (h * h)))
    };
    let h = 2e-3;
    for j in 1..=20 {
        let k = j as f64 * 0.1;
        let m = Modulus::new(k).unwrap();
        let kern = JacobiKernel::new(m);
        for i in 0..50 {
            let s = -6.0 + i as f64 * 0.245;
            let (c1, c2) = diffs(s, m, h);
            let (f1, f2) = diffs(s, m, 0.5 * h);
            let d1 = (f1 * 4.0 - c1) * (1.0 / 3.0);
            let d2 = (f2 * 4.0 - c2) * (1.0 / 3.0);
            speed_err = speed_err.max((d1.norm() - 1.0).abs());
            let fd_kappa = d1.cross(d2) / d1.norm().powi(3);
            let want = 2.0 * k * kern.eval(s).cn;
            kappa_err = kappa_err.max((fd_kappa - want).abs()).max((xi_curvature(s, m) - want).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let k = rng.random_range(-1.8..1.8);
        let s0 = rng.random_range(-3.0..3.0);
        let len = rng.random_range(0.3..3.0);
        let place = Similarity::new(rng.random_range(0.1..5.0), rng.random_range(-PI..PI), Point2::new(1.0, -2.0));
        let Ok(seg) = ElasticaSegment::new(k, s0, s0 + len, place) else { continue };
        if let Ok(fit) = residual_of_parametric(&seg.evaluator()) {
            worst = worst.max(fit.e_lambda);
        }
    }
    let secs = started.elapsed().as_secs_f64();
    check(
        speed_err < 1e-6 && kappa_err < 1e-6 && worst < 1e-6 && secs < 10.0,
        format!("|ξ'|−1 {speed_err:.1e}, κ−2k·cn {kappa_err:.1e}, max segment e_λ {worst:.1e}, {secs:.2}s"),
    )
}

fn residual_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_inv = 0.0f64;
    let mut range_ok = true;
    for _ in 0..200 {
        let mut pts = [[0.0; 2]; 4];
        for p in &mut pts {
            *p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        }
        let c = CubicBezier::from_coords(pts);
        let Ok(base) = lambda_fit(&c) else { continue };
        range_ok &= (0.0..=1.0).contains(&base.e_lambda);
        for _ in 0..100 {
            let t = Similarity::new(
                10f64.powf(rng.random_range(-2.0..2.0)),
                rng.random_range(-PI..PI),
                Point2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)),
            );
            let e = lambda_fit(&c.transformed(&t)).map(|f| f.e_lambda).unwrap_or(f64::NAN);
            worst_inv = worst_inv.max((e - base.e_lambda).abs());
            if e.is_nan() {
                worst_inv = f64::INFINITY;
            }
        }
    }
    let mut worst_arc = 0.0f64;
    for (r, a0, a1) in [(1.0, 0.0, 1.5), (0.3, 2.0, -1.0), (7.0, -0.4, 0.2)] {
        let arc = FnCurve {
            position: move |t: f64| Point2::from_angle(a0 + t * (a1 - a0)) * r,
            speed: move |_| r * f64::abs(a1 - a0),
            tangent_angle: move |t: f64| a0 + t * (a1 - a0) + PI / 2.0 * f64::signum(a1 - a0),
            curvature: move |_| f64::signum(a1 - a0) / r,
        };
        let e = residual_of_parametric(&arc).map(|f| f.e_lambda).unwrap_or(f64::NAN);
        worst_arc = worst_arc.max(if e.is_nan() { f64::INFINITY } else { e });
    }
    check(
        worst_inv <= 1e-10 && range_ok && worst_arc < 1e-8,
        format!("max change under similarities {worst_inv:.1e}, range ok {range_ok}, arc e_λ {worst_arc:.1e}"),
    )
}

fn zone_soundness() -> Outcome {
    let ex = run_zone_sweep(100_000, 4);
    let s = ex.summary.e_lambda;
    let secs = ex.summary.runtime_s;
    check(
        ex.summary.failures == 0 && s.max <= 0.45 && s.p99 <= 0.40 && secs < 60.0,
        format!("n=100000 max {:.4} p99 {:.4} mean {:.4}, {secs:.1}s", s.max, s.p99, s.mean),
    )
}

fn zone_quality() -> Outcome {
    let started = Instant::now();
    let curves = sample_curves(&SampleSpec::new(1000, Generator::ZoneInterior, 5, ConstraintProfile::None));
    let rows = correlation_rows(&curves, &RefineOptions::default());
    let l2: Vec<f64> = rows.iter().filter_map(|r| r.l2).collect();
    let secs = started.elapsed().as_secs_f64();
    let within = l2.iter().filter(|&&x| x <= 0.012).count();
    let tight = l2.iter().filter(|&&x| x <= 0.008).count() as f64 / curves.len() as f64;
    let max = l2.iter().copied().fold(0.0, f64::max);
    check(
        within == curves.len() && tight >= 0.95 && secs < 600.0,
        format!("{within}/{} with l2 ≤ 0.012, {:.1}% ≤ 0.008, max {max:.4}, {secs:.1}s", curves.len(), 100.0 * tight),
    )
}

struct ProjectionRun {
    stats: Stats,
    failures: usize,
    secs: f64,
    end_error: f64,
}

fn end_error(a: &CubicBezier, b: &CubicBezier) -> f64 {
    let angle_gap = |x: Point2, y: Point2| {
        let d = x.angle() - y.angle();
        d.sin().atan2(d.cos()).abs()
    };
    a.p0.distance(b.p0)
        .max(a.p3.distance(b.p3))
        .max(angle_gap(a.p1 - a.p0, b.p1 - b.p0))
        .max(angle_gap(a.p2 - a.p3, b.p2 - b.p3))
}

fn project_population(profile: ConstraintProfile, seed: u64) -> ProjectionRun {
    let started = Instant::now();
    let curves = sample_curves(&SampleSpec::new(10_000, Generator::RandomQuadUnitDisc, seed, profile));
    let config = FeedbackConfig::default();
    let results: Vec<Option<(f64, f64)>> = curves
        .par_iter()
        .map(|c| feedback_project(c, &config).ok().map(|r| (r.e_lambda, end_error(c, &r.output))))
        .collect();
    let secs = started.elapsed().as_secs_f64();
    let e: Vec<f64> = results.iter().flatten().map(|r| r.0).collect();
    ProjectionRun {
        stats: Stats::of(&e).unwrap_or(Stats { mean: f64::NAN, median: f64::NAN, p99: f64::NAN, max: f64::NAN }),
        failures: results.iter().filter(|r| r.is_none()).count(),
        secs,
        end_error: results.iter().flatten().map(|r| r.1).fold(0.0, f64::max),
    }
}

fn describe(r: &ProjectionRun) -> String {
    format!(
        "mean {:.4} median {:.4} p99 {:.4} max {:.4}, {} failures, {:.1}s",
        r.stats.mean, r.stats.median, r.stats.p99, r.stats.max, r.failures, r.secs
    )
}

fn projection_strict(run: &ProjectionRun) -> Outcome {
    let s = run.stats;
    check(
        run.failures == 0 && s.mean <= 0.07 && s.median <= 0.06 && s.p99 <= 0.20 && s.max <= 0.35 && run.secs < 300.0,
        format!("strict: {}", describe(run)),
    )
}

fn projection_relaxed(quarter: &ProjectionRun, sixth: &ProjectionRun) -> Outcome {
    let (q, s) = (quarter.stats, sixth.stats);
    check(
        quarter.failures == 0
            && sixth.failures == 0
            && q.mean <= 0.09
            && q.max <= 0.50
            && s.mean <= 0.13
            && s.max <= 0.80,
        format!("relaxed_quarter: {}; relaxed_sixth: {}", describe(quarter), describe(sixth)),
    )
}

fn admissibility_rate() -> Outcome {
    let f = acceptance_fraction(Generator::RandomQuadUnitDisc, ConstraintProfile::Strict, 10_000, 8);
    check((0.50..=0.60).contains(&f), format!("strict acceptance {f:.4}"))
}

fn end_data(runs: &[&ProjectionRun]) -> Outcome {
    let feedback = runs.iter().map(|r| r.end_error).fold(0.0, f64::max);
    let curves = sample_curves(&SampleSpec::new(2000, Generator::RandomQuadUnitDisc, 9, ConstraintProfile::RelaxedSixth));
    let geometric = curves
        .par_iter()
        .filter_map(|c| geometric_project_with(c, AngleProfile::RelaxedSixth).ok().map(|g| end_error(c, &g.curve)))
        .reduce(|| 0.0, f64::max);
    check(
        feedback <= 1e-9 && geometric <= 1e-9,
        format!("feedback max deviation {feedback:.1e}, geometric {geometric:.1e}"),
    )
}

fn gradient_diagnostic() -> Outcome {
    let d = Point2::from_angle(2.0) * 0.3;
    let c = CubicBezier::new(Point2::ORIGIN, d, Point2::new(1.0 - d.x, d.y), Point2::new(1.0, 0.0));
    let (_, steps) = gradient_project(&c, Energy::Bending, 60).map_err(|e| e.to_string())?;
    let increasing = steps.windows(2).take_while(|w| w[1].l1 + w[1].l2 > w[0].l1 + w[0].l2).count();
    let first = steps.first().map(|s| s.l1 + s.l2).unwrap_or(f64::NAN);
    let last = steps.get(increasing).map(|s| s.l1 + s.l2).unwrap_or(f64::NAN);
    check(
        increasing >= 50,
        format!("{increasing} monotone steps, outer length {first:.3} -> {last:.3e}"),
    )
}

fn correlation() -> Outcome {
    let started = Instant::now();
    let curves = sample_curves(&SampleSpec::new(2000, Generator::InnerPointsUnitBox, 11, ConstraintProfile::Strict));
    let rows = correlation_rows(&curves, &RefineOptions::default());
    let pairs: Vec<(f64, f64)> = rows.iter().filter_map(|r| Some((r.e_lambda?, r.l2?))).collect();
    let (e, l2): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let rho = spearman(&e, &l2).unwrap_or(f64::NAN);
    let low: Vec<&(f64, f64)> = pairs.iter().filter(|p| p.0 < 0.4).collect();
    let good = low.iter().filter(|p| p.1 < 0.012).count() as f64 / low.len().max(1) as f64;
    let secs = started.elapsed().as_secs_f64();
    check(
        pairs.len() == curves.len() && rho > 0.8 && good >= 0.97,
        format!(
            "spearman {rho:.4}, {:.2}% of {} curves with e_λ < 0.4 have l2 < 0.012, {} failures, {secs:.1}s",
            100.0 * good,
            low.len(),
            curves.len() - pairs.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, outcome: Outcome| {
        match &outcome {
            Ok(d) => println!("PASS {id:>2} {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {d}");
            }
        }
    };
    report(1, "elliptic kernel", elliptic_kernel());
    report(2, "elastica structure", elastica_structure());
    report(3, "residual invariance", residual_invariance());
    report(4, "zone soundness", zone_soundness());
    report(5, "zone quality", zone_quality());
    let strict = project_population(ConstraintProfile::Strict, 6);
    report(6, "feedback projection", projection_strict(&strict));
    let quarter = project_population(ConstraintProfile::RelaxedQuarter, 7);
    let sixth = project_population(ConstraintProfile::RelaxedSixth, 7);
    report(7, "relaxed profiles", projection_relaxed(&quarter, &sixth));
    report(8, "admissibility rate", admissibility_rate());
    report(9, "end-data preservation", end_data(&[&strict, &quarter, &sixth]));
    report(10, "gradient diagnostic", gradient_diagnostic());
    report(11, "correlation", correlation());
    if failed == 0 {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
