//! Gauss–Legendre quadrature on [a, b], fixed and adaptive.
//!
//! The adaptive rule bisects panels until the n-point estimate on a panel
//! agrees with the sum of the estimates on its two halves. Callers that need
//! several integrals over the same curve can ask for the accepted node set
//! and reuse it ([`adaptive_nodes`]).

use std::sync::OnceLock;

/// Default number of nodes per panel.
pub const DEFAULT_ORDER: usize = 32;
/// Default absolute tolerance, relative to the magnitude of the integral.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 24;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre polynomial roots.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared instance of the default 32-point rule.
    pub fn default_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(DEFAULT_ORDER))
    }

    /// Shared 16-point rule, used for short sub-intervals.
    pub fn rule16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Maps the rule to [a, b], yielding (t, w) pairs.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Integrates a scalar function over [a, b] with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(t, w)| w * f(t)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A quadrature node with its weight on the integration interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub t: f64,
    pub w: f64,
}

/// Adaptive integration of a scalar function to absolute tolerance `tol`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> f64 {
    adaptive_nodes(a, b, tol, |t| [f(t)]).1[0]
}

/// Adaptive bisection driven by a vector of integrands. Returns the accepted
/// nodes and the integral estimates for each component.
///
/// A panel is accepted when every component satisfies
/// `|whole - halves| <= tol * max(1, |scale_i|) * width / (b - a)`, where
/// `scale_i` is the single-panel estimate of the full interval.
pub fn adaptive_nodes<const N: usize, F>(a: f64, b: f64, tol: f64, mut f: F) -> (Vec<Node>, [f64; N])
where
    F: FnMut(f64) -> [f64; N],
{
    let rule = GaussLegendre::default_rule();
    let mut total = [0.0; N];
    let mut out = Vec::new();
    if b <= a {
        return (out, total);
    }
    let whole = panel(rule, a, b, &mut f);
    let mut scale = [1.0f64; N];
    for i in 0..N {
        scale[i] = whole[i].abs().max(1.0);
    }
    let span = b - a;
    // explicit stack: (a, b, estimate, depth)
    let mut stack = vec![(a, b, whole, 0u32)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(rule, lo, mid, &mut f);
        let right = panel(rule, mid, hi, &mut f);
        let mut ok = true;
        for i in 0..N {
            let err = (est[i] - (left[i] + right[i])).abs();
            if !(err <= tol * scale[i] * (hi - lo) / span) {
                ok = false;
                break;
            }
        }
        if ok || depth >= MAX_DEPTH {
            for i in 0..N {
                total[i] += left[i] + right[i];
            }
            out.extend(rule.mapped(lo, mid).map(|(t, w)| Node { t, w }));
            out.extend(rule.mapped(mid, hi).map(|(t, w)| Node { t, w }));
        } else {
            // push right first so panels come out left to right
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    (out, total)
}

fn panel<const N: usize, F>(rule: &GaussLegendre, a: f64, b: f64, f: &mut F) -> [f64; N]
where
    F: FnMut(f64) -> [f64; N],
{
    let mut acc = [0.0; N];
    for (t, w) in rule.mapped(a, b) {
        let v = f(t);
        for i in 0..N {
            acc[i] += w * v[i];
        }
    }
    acc
}

/// Composite fixed rule: `panels` equal panels of the given rule.
pub fn composite_nodes(rule: &GaussLegendre, a: f64, b: f64, panels: usize) -> Vec<Node> {
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + h * p as f64;
            let hi = if p + 1 == panels { b } else { lo + h };
            rule.mapped(lo, hi).map(|(t, w)| Node { t, w }).collect::<Vec<_>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 32] {
            let r = GaussLegendre::new(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let r = GaussLegendre::new(5);
        // x^9 odd -> 0 on [-1,1]; x^8 -> 2/9
        let v8 = r.integrate(-1.0, 1.0, |x| x.powi(8));
        assert!((v8 - 2.0 / 9.0).abs() < 1e-14);
        let v = r.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 102.4).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫_0^1 1/(1e-4 + (x-0.3)^2) dx
        let eps: f64 = 1e-4;
        let s = eps.sqrt();
        let exact = ((0.7 / s).atan() + (0.3 / s).atan()) / s;
        let v = integrate_adaptive(0.0, 1.0, 1e-10, |x| 1.0 / (eps + (x - 0.3).powi(2)));
        assert!((v - exact).abs() < 1e-8 * exact, "{v} vs {exact}");
    }

    #[test]
    fn nodes_reproduce_estimate() {
        let (nodes, est) = adaptive_nodes(0.0, 2.0, 1e-12, |x| [x.sin(), x.exp()]);
        let s: f64 = nodes.iter().map(|n| n.w * n.t.sin()).sum();
        let e: f64 = nodes.iter().map(|n| n.w * n.t.exp()).sum();
        assert!((s - est[0]).abs() < 1e-14);
        assert!((e - est[1]).abs() < 1e-13);
        assert!((s - (1.0 - 2.0f64.cos())).abs() < 1e-12);
        assert!(nodes.windows(2).all(|w| w[0].t < w[1].t));
    }
}
