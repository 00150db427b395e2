//! HTTP endpoints over the elastibez library. Every handler is a pure
//! function of its request body.

use std::f64::consts::PI;

use axum::extract::rejection::JsonRejection;
use axum::extract::FromRequest;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{Any, CorsLayer};

use elastibez::error::Error;
use elastibez::feedback::{feedback_project, FeedbackConfig};
use elastibez::fit::{approximate, first_guess, FitResult};
use elastibez::geom::{CubicBezier, Point2};
use elastibez::residual::{lambda_fit, QualityClass};
use elastibez::zone::{AngleProfile, ProjectionZone, RATIO_CAP};

pub const MIN_POLYLINE: usize = 128;
pub const MAX_POLYLINE: usize = 512;

#[derive(Debug, Serialize)]
pub struct ApiError {
    pub error: String,
    pub code: &'static str,
    #[serde(skip)]
    status: StatusCode,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, error: impl Into<String>) -> Self {
        Self { error: error.into(), code, status }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Degenerate(_) | Error::Cusp { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "degenerate_curve", msg),
            Error::AngleConstraintViolation { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "angle_constraint_violation", msg)
            }
            Error::InvalidInput(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid_input", msg),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_request", r.body_text())
    }
}

/// JSON body whose rejections are reported as 400 with the common error body.
#[derive(FromRequest)]
#[from_request(via(Json), rejection(ApiError))]
pub struct Body<T>(pub T);

type ApiResult = Result<Json<Value>, ApiError>;

pub fn app() -> Router {
    Router::new()
        .route("/api/residual", post(residual))
        .route("/api/project", post(project))
        .route("/api/approximate", post(approximate_handler))
        .route("/api/zone-boundary", get(zone_boundary))
        .layer(CorsLayer::new().allow_origin(Any).allow_methods(Any).allow_headers(Any))
}

fn checked(curve: CubicBezier) -> Result<CubicBezier, ApiError> {
    curve.validate()?;
    Ok(curve)
}

/// Point count between 128 and 512, growing with the ratio of curve length
/// to chord.
pub fn polyline_size(curve: &CubicBezier) -> usize {
    let chord = curve.p0.distance(curve.p3);
    let ratio = curve.length() / chord;
    let n = (MIN_POLYLINE as f64 * ratio).round();
    if n.is_finite() {
        (n as usize).clamp(MIN_POLYLINE, MAX_POLYLINE)
    } else {
        MAX_POLYLINE
    }
}

pub fn bezier_polyline(curve: &CubicBezier, n: usize) -> Vec<Point2> {
    (0..n).map(|i| curve.eval(i as f64 / (n - 1) as f64)).collect()
}

async fn residual(Body(curve): Body<CubicBezier>) -> ApiResult {
    let fit = lambda_fit(&checked(curve)?)?;
    Ok(Json(json!({
        "e_lambda": fit.e_lambda,
        "class": fit.class(),
        "lambda1": fit.lambda1,
        "lambda2": fit.lambda2,
        "alpha": fit.alpha,
        "straight_line_flag": fit.straight_line,
    })))
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Feedback,
    Geometric,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectRequest {
    pub curve: CubicBezier,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub threshold: f64,
    #[serde(default = "strict")]
    pub profile: AngleProfile,
}

fn strict() -> AngleProfile {
    AngleProfile::Strict
}

async fn project(Body(req): Body<ProjectRequest>) -> ApiResult {
    let curve = checked(req.curve)?;
    let (output, report) = match req.method {
        Method::Feedback => {
            let r = feedback_project(&curve, &FeedbackConfig::with_threshold(req.threshold))?;
            (r.output, serde_json::to_value(&r).expect("serializable report"))
        }
        Method::Geometric => {
            let g = elastibez::zone::geometric_project_with(&curve, req.profile)?;
            let e = lambda_fit(&g.curve)?.e_lambda;
            let v = json!({
                "output": g.curve,
                "e_lambda": e,
                "in_zone": g.in_zone,
                "phase": g.phase,
                "started_inflectional": g.started_inflectional,
            });
            (g.curve, v)
        }
    };
    let e_lambda = report["e_lambda"].clone();
    let guess = first_guess(&output)?;
    let n_in = polyline_size(&curve);
    let n_out = polyline_size(&output);
    Ok(Json(json!({
        "method": req.method,
        "e_lambda": e_lambda,
        "report": report,
        "first_guess": guess,
        "polylines": {
            "input": bezier_polyline(&curve, n_in),
            "output": bezier_polyline(&output, n_out),
            "first_guess": guess.polyline(n_out),
        },
    })))
}

#[derive(Serialize)]
struct ApproximateResponse {
    e_lambda: f64,
    #[serde(flatten)]
    fit: FitResult,
    polyline: Vec<Point2>,
}

async fn approximate_handler(Body(curve): Body<CubicBezier>) -> Result<Json<Value>, ApiError> {
    let curve = checked(curve)?;
    let e_lambda = lambda_fit(&curve)?.e_lambda;
    let fit = approximate(&curve)?;
    let polyline = fit.segment.polyline(polyline_size(&curve));
    let v = serde_json::to_value(ApproximateResponse { e_lambda, fit, polyline }).expect("serializable fit");
    Ok(Json(v))
}

async fn zone_boundary() -> Json<Value> {
    let zone = ProjectionZone::global();
    let profiles: Vec<Value> = AngleProfile::ALL
        .iter()
        .map(|p| {
            let (beta_min, symmetry) = p.limits();
            json!({ "name": p.name(), "beta_min": beta_min, "beta_max": 2.0 * PI - beta_min, "max_beta_difference": symmetry })
        })
        .collect();
    Json(json!({
        "boundary": zone.boundary(),
        "anchors": zone.anchors(),
        "constants": {
            "ratio_cap": RATIO_CAP,
            "l_min": { "base": 0.4, "slope": 6.0, "floor": 0.27 },
            "l_max": { "base": 1.2, "slope": 5.0, "floor": 0.58 },
            "angle_profiles": profiles,
            "quality_thresholds": {
                "best": QualityClass::BEST_MAX,
                "good": QualityClass::GOOD_MAX,
                "borderline": QualityClass::BORDERLINE_MAX,
            },
        },
    }))
}
