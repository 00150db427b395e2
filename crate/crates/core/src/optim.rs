//! Small local optimizers used by the elastica fit.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// simplex diameter (max-norm) below which the search stops
    pub x_tol: f64,
    /// spread of function values below which the search stops
    pub f_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 2000, x_tol: 1e-9, f_tol: 1e-16 }
    }
}

/// Nelder–Mead with the standard coefficients (1, 2, 1/2, 1/2).
///
/// The returned point is the best vertex ever evaluated, so the result is
/// never worse than `f(x0)`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diam = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diam < opts.x_tol || (worst - best).abs() <= opts.f_tol * best.abs().max(1e-300) {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < best {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let x = along(-0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = eval(x, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    Minimum { x, f: fx, evals, converged }
}

#[derive(Debug, Clone, Copy)]
pub struct LevenbergMarquardtOptions {
    pub max_iters: usize,
    /// relative step used for forward-difference Jacobians
    pub fd_step: f64,
    /// relative decrease of the cost below which the iteration stops
    pub f_tol: f64,
}

impl Default for LevenbergMarquardtOptions {
    fn default() -> Self {
        Self { max_iters: 60, fd_step: 1e-7, f_tol: 1e-14 }
    }
}

/// Levenberg–Marquardt on `½‖r(x)‖²` with a forward-difference Jacobian.
/// `residuals(x, out)` fills `out` and returns `false` if x is infeasible.
/// The reported `f` is `‖r‖²` and is never larger than at `x0`.
pub fn levenberg_marquardt<R>(mut residuals: R, x0: &[f64], opts: LevenbergMarquardtOptions) -> Minimum
where
    R: FnMut(&[f64], &mut Vec<f64>) -> bool,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut r = Vec::new();
    let mut x = x0.to_vec();
    evals += 1;
    if !residuals(&x, &mut r) {
        return Minimum { x, f: f64::INFINITY, evals, converged: false };
    }
    let m = r.len();
    let mut cost = sq(&r);
    let mut mu = 1e-3;
    let mut converged = false;
    let mut trial = Vec::with_capacity(m);
    let mut jac = DMatrix::<f64>::zeros(m, n);
    for _ in 0..opts.max_iters {
        for j in 0..n {
            let h = opts.fd_step * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            evals += 1;
            if !residuals(&xp, &mut trial) {
                xp[j] = x[j] - h;
                evals += 1;
                if !residuals(&xp, &mut trial) {
                    return Minimum { x, f: cost, evals, converged: false };
                }
                for i in 0..m {
                    jac[(i, j)] = (r[i] - trial[i]) / h;
                }
            } else {
                for i in 0..m {
                    jac[(i, j)] = (trial[i] - r[i]) / h;
                }
            }
        }
        let jt = jac.transpose();
        let a = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..12 {
            let mut damped = a.clone();
            for i in 0..n {
                damped[(i, i)] += mu * a[(i, i)].max(1e-12);
            }
            let step = match damped.cholesky() {
                Some(c) => c.solve(&(-&g)),
                None => {
                    mu *= 10.0;
                    continue;
                }
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            evals += 1;
            if residuals(&xn, &mut trial) {
                let c = sq(&trial);
                if c < cost {
                    let rel = (cost - c) / cost.max(1e-300);
                    x = xn;
                    std::mem::swap(&mut r, &mut trial);
                    cost = c;
                    mu = (mu / 3.0).max(1e-12);
                    improved = true;
                    if rel < opts.f_tol || cost == 0.0 {
                        converged = true;
                    }
                    break;
                }
            }
            mu *= 8.0;
        }
        if !improved {
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    Minimum { x, f: cost, evals, converged }
}

fn sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}
