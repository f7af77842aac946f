//! Asymptotic constants and predicted scaling laws for the three regimes.

use crate::core_model::{ModelParams, Regime};
use crate::error::{ErwsError, Result};
use crate::real::Real;
use crate::special::{beta, gamma};

/// Leading constant of ρ[S_n, Σ_n] ~ (2s-1) P_{a,b} n^{-(b-2a)/2}, subcritical.
pub fn const_p<F: Real>(a: F, b: F) -> Result<F> {
    let two = F::from_f(2.0);
    if !(b > F::zero() && b < F::one()) {
        return Err(ErwsError::Domain("const_p needs b in (0,1)".into()));
    }
    if a == F::zero() || a < -b || !(a < b / two) {
        return Err(ErwsError::Domain(
            "const_p needs a in [-b, b/2) with a != 0".into(),
        ));
    }
    let num = ((b - two * a) * gamma(b)).sqrt() * ((a + b) * beta(a + F::one(), b) - F::one());
    let den = gamma(a + F::one()) * (b * beta(b, b) - F::one()).sqrt();
    Ok(num / den)
}

/// Leading constant of ρ[S_n, Σ_n] ~ (2s-1) Q_a (log n)^{-1/2}, critical (a = b/2).
pub fn const_q<F: Real>(a: F) -> Result<F> {
    let two = F::from_f(2.0);
    if !(a > F::zero() && two * a <= F::one()) {
        return Err(ErwsError::Domain("const_q needs a = b/2 in (0, 1/2]".into()));
    }
    let inner = two * a * beta(two * a, two * a) - F::one();
    debug_assert!(inner > F::zero());
    let num = gamma(two * a).sqrt() * (a * beta(a, two * a) - F::one());
    let den = gamma(a + F::one()) * inner.sqrt();
    Ok(num / den)
}

/// Limit of ρ[S_n, Σ_n]/(2s-1), supercritical.
pub fn const_r<F: Real>(a: F, b: F, s: F) -> Result<F> {
    let two = F::from_f(2.0);
    if !(b > F::zero() && b < F::one()) || !(a > b / two && a <= b) {
        return Err(ErwsError::Domain("const_r needs b in (0,1), a in (b/2, b]".into()));
    }
    let skew = two * s - F::one();
    let d1 = a * a * beta(a, a) - skew * skew * (two * a - b);
    let d2 = b * beta(b, b) - F::one();
    if !(d1 > F::zero()) || !(d2 > F::zero()) {
        return Err(ErwsError::Domain(
            "const_r denominator not positive for these parameters".into(),
        ));
    }
    Ok((two * a - b).sqrt() * (a * beta(a, b) - F::one()) / (d1 * d2).sqrt())
}

/// Limit of ρ[S_n², Σ_n] for a in [-b, b/2].
pub fn const_q_prime<F: Real>(b: F) -> Result<F> {
    if !(b > F::zero() && b < F::one()) {
        return Err(ErwsError::Domain("const_q_prime needs b in (0,1)".into()));
    }
    let three = F::from_f(3.0);
    let bb = b * beta(b, b);
    Ok(((bb - F::one()) / (three * bb - F::one())).sqrt())
}

/// Limit of ρ[S_n², Σ_n] for a in (b/2, b].
pub fn const_r_prime<F: Real>(a: F, b: F) -> Result<F> {
    let two = F::from_f(2.0);
    if !(b > F::zero() && b < F::one()) || !(a > b / two && a <= b) {
        return Err(ErwsError::Domain(
            "const_r_prime needs b in (0,1), a in (b/2, b]".into(),
        ));
    }
    let six = F::from_f(6.0);
    let four = F::from_f(4.0);
    let num = two * a * beta(two * a, b) - F::one();
    let inner = six * (two * a * a + two * a * b - b * b) / (four * a - b)
        * beta(two * a, two * a)
        - F::one();
    let den = (inner * (b * beta(b, b) - F::one())).sqrt();
    Ok(num / den)
}

/// ρ[S_n², Σ_n] limit curve: Q'_b on [-b, b/2], R'_{a,b} on (b/2, b].
pub fn rho_s2_sigma_limit<F: Real>(params: &ModelParams<F>) -> Result<F> {
    match params.classify() {
        Regime::Supercritical => const_r_prime(params.a(), params.b()),
        _ => const_q_prime(params.b()),
    }
}

/// Leading-order asymptotic approximant of ρ[S_n, Σ_n] at finite n.
pub fn predicted_rho<F: Real>(params: &ModelParams<F>, n: u64) -> Result<F> {
    let (a, b, s) = (params.a(), params.b(), params.s());
    let two = F::from_f(2.0);
    let half = F::from_f(0.5);
    if a == F::zero() || s == half {
        return Err(ErwsError::Domain(
            "rho is exactly 0 for a = 0 or s = 1/2; use the exact path".into(),
        ));
    }
    if !(b < F::one()) {
        return Err(ErwsError::Domain("predicted_rho needs b in (0,1)".into()));
    }
    if n < 3 {
        return Err(ErwsError::Domain("predicted_rho needs n >= 3".into()));
    }
    let skew = two * s - F::one();
    let nf = F::from_u(n);
    match params.classify() {
        Regime::Subcritical => {
            Ok(skew * const_p(a, b)? * nf.powf(-(b - two * a) / two))
        }
        Regime::Critical => Ok(skew * const_q(a)? / nf.ln().sqrt()),
        Regime::Supercritical => Ok(skew * const_r(a, b, s)?),
    }
}

/// φ(x) = √(2x log log x), defined for x > e.
pub fn phi<F: Real>(x: F) -> Result<F> {
    if !(x > F::from_f(core::f64::consts::E)) {
        return Err(ErwsError::Domain("phi needs x > e".into()));
    }
    Ok((F::from_f(2.0) * x * x.ln().ln()).sqrt())
}

/// Law-of-iterated-logarithm envelope constant for S_n/φ(·):
/// √(b/(b-2a)) subcritically (with φ(Σ_n)), 1 critically (with φ(Σ_n log Σ_n)).
pub fn lil_envelope<F: Real>(params: &ModelParams<F>) -> Result<F> {
    let (a, b) = (params.a(), params.b());
    let two = F::from_f(2.0);
    match params.classify() {
        Regime::Subcritical => Ok((b / (b - two * a)).sqrt()),
        Regime::Critical => Ok(F::one()),
        Regime::Supercritical => Err(ErwsError::Regime(
            "no LIL envelope in the supercritical regime".into(),
        )),
    }
}

/// Limit moments of Σ_n/n^b: mean 1/Γ(1+b), second moment 2/Γ(1+2b).
#[derive(Clone, Copy, Debug)]
pub struct SigmaScaling<F: Real> {
    pub limit_mean: F,
    pub limit_second_moment: F,
}

pub fn predicted_sigma_scaling<F: Real>(b: F) -> Result<SigmaScaling<F>> {
    if !(b > F::zero() && b <= F::one()) {
        return Err(ErwsError::Domain("sigma scaling needs b in (0,1]".into()));
    }
    let two = F::from_f(2.0);
    Ok(SigmaScaling {
        limit_mean: F::one() / gamma(F::one() + b),
        limit_second_moment: two / gamma(F::one() + two * b),
    })
}
