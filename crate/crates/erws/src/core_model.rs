//! Model parameters (p, q, r, s), the derived memory parameters (a, b),
//! and regime classification at the critical value a_c(b) = b/2.

use crate::error::{ErwsError, Result};
use crate::real::Real;

/// Tolerance for |p + q + r - 1| on input; r is renormalized afterwards.
pub const SUM_TOL: f64 = 1e-12;

/// Tie tolerance for detecting a = b/2 exactly.
pub const CRIT_TOL: f64 = 1e-12;

/// Validated parameter set. `a` and `b` are always derived from (p, q, r),
/// never stored.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ModelParams<F: Real> {
    p: F,
    q: F,
    r: F,
    s: F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Regime::Subcritical => write!(f, "subcritical"),
            Regime::Critical => write!(f, "critical"),
            Regime::Supercritical => write!(f, "supercritical"),
        }
    }
}

fn in_unit<F: Real>(x: F) -> bool {
    x >= F::zero() && x <= F::one()
}

impl<F: Real> ModelParams<F> {
    /// Build from the step probabilities (p, q, r) and first-step law s.
    pub fn new(p: F, q: F, r: F, s: F) -> Result<Self> {
        if !(in_unit(p) && in_unit(q) && in_unit(s)) || !(r >= F::zero() && r < F::one()) {
            return Err(ErwsError::Domain(format!(
                "need p,q,s in [0,1] and r in [0,1): p={p:?} q={q:?} r={r:?} s={s:?}"
            )));
        }
        let sum = p + q + r;
        if (sum - F::one()).abs() > F::from_f(SUM_TOL) {
            return Err(ErwsError::Sum {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        // renormalize so b = p + q holds exactly
        let r = F::one() - (p + q);
        Ok(Self { p, q, r, s })
    }

    /// Build from the memory parameters: p = (b+a)/2, q = (b-a)/2, r = 1-b.
    pub fn from_ab(a: F, b: F, s: F) -> Result<Self> {
        if !(b > F::zero() && b <= F::one()) {
            return Err(ErwsError::Domain(format!("need b in (0,1], got {b:?}")));
        }
        if a.abs() > b {
            return Err(ErwsError::Domain(format!("need |a| <= b: a={a:?} b={b:?}")));
        }
        if !in_unit(s) {
            return Err(ErwsError::Domain(format!("need s in [0,1], got {s:?}")));
        }
        let half = F::from_f(0.5);
        Self::new(half * (b + a), half * (b - a), F::one() - b, s)
    }

    pub fn p(&self) -> F {
        self.p
    }
    pub fn q(&self) -> F {
        self.q
    }
    pub fn r(&self) -> F {
        self.r
    }
    pub fn s(&self) -> F {
        self.s
    }

    /// a = p - q.
    pub fn a(&self) -> F {
        self.p - self.q
    }

    /// b = 1 - r.
    pub fn b(&self) -> F {
        F::one() - self.r
    }

    /// Regime relative to the critical value a_c(b) = b/2, with a
    /// 1e-12 tie window so exactly-critical parameters classify as such.
    pub fn classify(&self) -> Regime {
        let two = F::from_f(2.0);
        let gap = two * self.a() - self.b();
        if gap.abs() <= F::from_f(CRIT_TOL) {
            Regime::Critical
        } else if gap < F::zero() {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }
}

impl ModelParams<f64> {
    /// Lossless cast for feeding the f64-validated params into generic code.
    pub fn cast<F: Real>(&self) -> ModelParams<F> {
        ModelParams {
            p: F::from_f(self.p),
            q: F::from_f(self.q),
            r: F::from_f(self.r),
            s: F::from_f(self.s),
        }
    }
}
