//! Jacobi elliptic functions and the incomplete elliptic integral of the
//! second kind, for real argument and modulus `k ∈ [0, ∞)`.
//!
//! For `k < 1` everything comes out of one arithmetic–geometric mean (AGM)
//! sequence: the amplitude by the descending Landen recursion, and
//! `E(s, k) = ∫₀ˢ dn²` from the Jacobi zeta sum over the same sequence.
//! `k = 1` uses the hyperbolic closed forms. `k > 1` goes through the
//! reciprocal modulus:
//!
//! ```text
//! sn(s,k) = sn(ks,1/k)/k   cn(s,k) = dn(ks,1/k)   dn(s,k) = cn(ks,1/k)
//! E(s,k)  = k·E(ks,1/k) − (k² − 1)·s
//! ```
//!
//! which keeps `sn² + cn² = 1`, `dn² + k² sn² = 1` and `E′ = dn²` for all k.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elliptic modulus `k ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && k >= 0.0 {
            Ok(Self(k))
        } else {
            Err(Error::InvalidInput(format!("elliptic modulus must be finite and ≥ 0, got {k}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Modulus {
    type Error = Error;
    fn try_from(k: f64) -> Result<Self> {
        Modulus::new(k)
    }
}

impl From<Modulus> for f64 {
    fn from(m: Modulus) -> f64 {
        m.0
    }
}

/// Values of the Jacobi functions at one argument.
///
/// `phase` is the continuous angle with `cos(phase) = dn`, `sin(phase) = k·sn`.
/// It is bounded for `k < 1` and grows without bound for `k > 1`; twice the
/// phase is the tangent angle of the canonical elastica.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiValues {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    /// Incomplete integral of the second kind, `∫₀ˢ dn²(t, k) dt`.
    pub e: f64,
    pub phase: f64,
}

const MAX_AGM: usize = 40;

/// Precomputed AGM data for a classical parameter `m = k² ∈ [0, 1)`.
#[derive(Debug, Clone)]
struct Agm {
    m: f64,
    a: [f64; MAX_AGM],
    c: [f64; MAX_AGM],
    /// index of the last AGM step
    n: usize,
    /// complete integral K(m)
    k_complete: f64,
    /// E(m)/K(m)
    e_over_k: f64,
}

impl Agm {
    fn new(m: f64) -> Self {
        debug_assert!((0.0..1.0).contains(&m));
        let mut a = [0.0; MAX_AGM];
        let mut c = [0.0; MAX_AGM];
        a[0] = 1.0;
        let mut b = (1.0 - m).sqrt();
        c[0] = m.sqrt();
        let mut n = 0;
        // Σ 2^(j−1) c_j², j ≥ 0
        let mut sum = 0.5 * m;
        let mut pow = 0.5;
        while c[n].abs() > 1e-17 * a[n] && n + 1 < MAX_AGM {
            let an = a[n];
            a[n + 1] = 0.5 * (an + b);
            c[n + 1] = 0.5 * (an - b);
            b = (an * b).sqrt();
            n += 1;
            pow *= 2.0;
            sum += pow * c[n] * c[n];
        }
        let k_complete = PI / (2.0 * a[n]);
        Self { m, a, c, n, k_complete, e_over_k: 1.0 - sum }
    }

    /// Returns (sn, cn, dn, am, E) at `u` for the classical parameter.
    fn eval(&self, u: f64) -> (f64, f64, f64, f64, f64) {
        if self.n == 0 {
            // m == 0
            let (s, c) = u.sin_cos();
            return (s, c, 1.0, u, u);
        }
        // reduce modulo the real period 4K
        let period = 4.0 * self.k_complete;
        let turns = (u / period).round();
        let ur = u - turns * period;

        let mut phi = [0.0; MAX_AGM];
        let n = self.n;
        phi[n] = (1u64 << n) as f64 * self.a[n] * ur;
        for j in (1..=n).rev() {
            let ratio = (self.c[j] / self.a[j] * phi[j].sin()).clamp(-1.0, 1.0);
            phi[j - 1] = 0.5 * (phi[j] + ratio.asin());
        }
        let (sn, cn) = phi[0].sin_cos();
        // dn² = cn² + (1 − m)·sn², free of cancellation
        let dn = (cn * cn + (1.0 - self.m) * sn * sn).sqrt();
        let zeta: f64 = (1..=n).map(|j| self.c[j] * phi[j].sin()).sum();
        let e_complete = self.e_over_k * self.k_complete;
        let e = ur * self.e_over_k + zeta + turns * 4.0 * e_complete;
        let am = phi[0] + turns * 2.0 * PI;
        (sn, cn, dn, am, e)
    }
}

/// Evaluator for a fixed modulus; reuses the AGM sequence across arguments.
#[derive(Debug, Clone)]
pub struct JacobiKernel {
    k: f64,
    regime: Regime,
}

#[derive(Debug, Clone)]
enum Regime {
    Classical(Agm),
    Separatrix,
    /// k > 1: AGM of the reciprocal parameter 1/k²
    Reciprocal(Agm),
}

impl JacobiKernel {
    pub fn new(k: Modulus) -> Self {
        let k = k.get();
        let regime = if k < 1.0 {
            Regime::Classical(Agm::new(k * k))
        } else if k == 1.0 {
            Regime::Separatrix
        } else {
            Regime::Reciprocal(Agm::new(1.0 / (k * k)))
        };
        Self { k, regime }
    }

    pub fn modulus(&self) -> f64 {
        self.k
    }

    /// Real period of cn (and of the curvature of the canonical elastica);
    /// infinite at k = 1.
    pub fn cn_period(&self) -> f64 {
        match &self.regime {
            Regime::Classical(agm) => 4.0 * agm.k_complete,
            Regime::Separatrix => f64::INFINITY,
            // dn(ks, 1/k) has period 2K(1/k²) in ks
            Regime::Reciprocal(agm) => 2.0 * agm.k_complete / self.k,
        }
    }

    pub fn eval(&self, s: f64) -> JacobiValues {
        match &self.regime {
            Regime::Classical(agm) => {
                let (sn, cn, dn, _am, e) = agm.eval(s);
                JacobiValues { sn, cn, dn, e, phase: (self.k * sn).atan2(dn) }
            }
            Regime::Separatrix => {
                let sech = 1.0 / s.cosh();
                let th = s.tanh();
                JacobiValues { sn: th, cn: sech, dn: sech, e: th, phase: s.sinh().atan() }
            }
            Regime::Reciprocal(agm) => {
                let k = self.k;
                let (sn1, cn1, dn1, am1, e1) = agm.eval(k * s);
                JacobiValues { sn: sn1 / k, cn: dn1, dn: cn1, e: k * e1 - (k * k - 1.0) * s, phase: am1 }
            }
        }
    }
}

/// `cn(s, k)`; for k > 1 this is `dn(ks, 1/k)`.
pub fn jacobi_cn(s: f64, k: Modulus) -> f64 {
    JacobiKernel::new(k).eval(s).cn
}

/// `(sn(s, k), dn(s, k))` under the same extension as [`jacobi_cn`].
pub fn jacobi_sn_dn(s: f64, k: Modulus) -> (f64, f64) {
    let v = JacobiKernel::new(k).eval(s);
    (v.sn, v.dn)
}

/// `E(s, k) = ∫₀ˢ dn²(t, k) dt`, odd in s.
pub fn elliptic_e_inc(s: f64, k: Modulus) -> f64 {
    JacobiKernel::new(k).eval(s).e
}

/// Complete integral of the first kind K(k) for k < 1.
pub fn complete_k(k: Modulus) -> f64 {
    let k = k.get();
    if k >= 1.0 {
        return f64::INFINITY;
    }
    if k == 0.0 {
        return FRAC_PI_2;
    }
    Agm::new(k * k).k_complete
}

/// Complete integral of the second kind E(k) for k ≤ 1.
pub fn complete_e(k: Modulus) -> f64 {
    let k = k.get();
    if k >= 1.0 {
        return 1.0;
    }
    let agm = Agm::new(k * k);
    agm.e_over_k * agm.k_complete
}
