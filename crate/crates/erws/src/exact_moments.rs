//! Exact finite-n moments, covariances, and correlations of (S_n, Σ_n).
//!
//! The primary computation path is the one-step conditional-expectation
//! recursions, which are pole-free in all regimes:
//!
//!   E[S²_{k+1}]    = (1 + 2a/k) E[S²_k] + (b/k) E[Σ_k]
//!   E[S²Σ_{k+1}]   = (1 + (2a+b)/k) E[S²Σ_k] + (2a/k) E[S²_k] + (b/k) E[Σ_k(Σ_k+1)]
//!   E[S⁴_{k+1}]    = (1 + 4a/k) E[S⁴_k] + (6b/k) E[S²Σ_k] + (4a/k) E[S²_k] + (b/k) E[Σ_k]
//!
//! with the closed forms E[S_k] = (2s-1) c_k(a), E[Σ_k] = c_k(b),
//! E[S_kΣ_k] = (2s-1)/b {(a+b) c_k(a+b) - a c_k(a)}, E[Σ_k(Σ_k+1)] = 2 c_k(2b).
//! Closed forms for the recursion targets exist away from the poles at
//! b = 2a and b = 4a and serve as cross-checks only.

use crate::core_model::ModelParams;
use crate::error::{ErwsError, Result};
use crate::real::Real;
use crate::special::c;

/// Poles guard: closed forms are suppressed within this distance of b = 2a
/// (and b = 4a for the fourth moment).
pub const NEAR_CRITICAL_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Method {
    ClosedForm,
    Recursion,
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Method::ClosedForm => write!(f, "ClosedForm"),
            Method::Recursion => write!(f, "Recursion"),
        }
    }
}

/// Exact values of the seven tracked moments at a fixed n.
#[derive(Clone, Copy, Debug)]
pub struct MomentTable<F: Real> {
    pub n: u64,
    pub e_s: F,
    pub e_sigma: F,
    pub e_s_sigma: F,
    pub e_s2: F,
    pub e_sigma2: F,
    pub e_s2_sigma: F,
    pub e_s4: F,
    pub method: Method,
}

/// Derived covariances and variances.
#[derive(Clone, Copy, Debug)]
pub struct CovarianceSuite<F: Real> {
    pub cov_s_sigma: F,
    pub var_s: F,
    pub var_sigma: F,
    pub cov_s2_sigma: F,
    pub var_s2: F,
}

struct RecursionState<F: Real> {
    k: u64,
    c_a: F,
    c_b: F,
    c_2b: F,
    c_ab: F,
    e_s2: F,
    e_s2_sigma: F,
    e_s4: F,
}

impl<F: Real> RecursionState<F> {
    fn start() -> Self {
        Self {
            k: 1,
            c_a: F::one(),
            c_b: F::one(),
            c_2b: F::one(),
            c_ab: F::one(),
            e_s2: F::one(),
            e_s2_sigma: F::one(),
            e_s4: F::one(),
        }
    }

    fn advance(&mut self, a: F, b: F) {
        let inv_k = F::one() / F::from_u(self.k);
        let two = F::from_f(2.0);
        let four = F::from_f(4.0);
        let six = F::from_f(6.0);

        let e_sigma = self.c_b;
        let e_sigma_sigma1 = two * self.c_2b;

        let e_s4 = (F::one() + four * a * inv_k) * self.e_s4
            + six * b * inv_k * self.e_s2_sigma
            + four * a * inv_k * self.e_s2
            + b * inv_k * e_sigma;
        let e_s2_sigma = (F::one() + (two * a + b) * inv_k) * self.e_s2_sigma
            + two * a * inv_k * self.e_s2
            + b * inv_k * e_sigma_sigma1;
        let e_s2 = (F::one() + two * a * inv_k) * self.e_s2 + b * inv_k * e_sigma;

        self.c_a = self.c_a * (F::one() + a * inv_k);
        self.c_b = self.c_b * (F::one() + b * inv_k);
        self.c_2b = self.c_2b * (F::one() + two * b * inv_k);
        self.c_ab = self.c_ab * (F::one() + (a + b) * inv_k);
        self.e_s4 = e_s4;
        self.e_s2_sigma = e_s2_sigma;
        self.e_s2 = e_s2;
        self.k += 1;
    }

    fn table(&self, params: &ModelParams<F>) -> MomentTable<F> {
        let (a, b, s) = (params.a(), params.b(), params.s());
        let two = F::from_f(2.0);
        let skew = two * s - F::one();
        MomentTable {
            n: self.k,
            e_s: skew * self.c_a,
            e_sigma: self.c_b,
            e_s_sigma: skew / b * ((a + b) * self.c_ab - a * self.c_a),
            e_s2: self.e_s2,
            e_sigma2: two * self.c_2b - self.c_b,
            e_s2_sigma: self.e_s2_sigma,
            e_s4: self.e_s4,
            method: Method::Recursion,
        }
    }
}

/// All seven moments at time n via the recursion path.
pub fn moment_table<F: Real>(params: &ModelParams<F>, n: u64) -> MomentTable<F> {
    assert!(n >= 1, "moments are defined for n >= 1");
    let mut st = RecursionState::start();
    let (a, b) = (params.a(), params.b());
    while st.k < n {
        st.advance(a, b);
    }
    st.table(params)
}

/// Moment tables at each checkpoint (sorted, deduplicated) in one pass.
pub fn moment_tables_at<F: Real>(
    params: &ModelParams<F>,
    checkpoints: &[u64],
) -> Vec<MomentTable<F>> {
    let mut ks: Vec<u64> = checkpoints.iter().copied().filter(|&k| k >= 1).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut out = Vec::with_capacity(ks.len());
    let mut st = RecursionState::start();
    let (a, b) = (params.a(), params.b());
    for k in ks {
        while st.k < k {
            st.advance(a, b);
        }
        out.push(st.table(params));
    }
    out
}

/// E[S_n] = (2s-1) c_n(a).
pub fn mean_s<F: Real>(params: &ModelParams<F>, n: u64) -> F {
    (F::from_f(2.0) * params.s() - F::one()) * c(n, params.a())
}

/// E[Σ_n] = c_n(b).
pub fn mean_sigma<F: Real>(params: &ModelParams<F>, n: u64) -> F {
    c(n, params.b())
}

/// Closed form for E[S_n²], valid away from the b = 2a pole.
pub fn closed_e_s2<F: Real>(params: &ModelParams<F>, n: u64) -> Result<F> {
    let (a, b) = (params.a(), params.b());
    let two = F::from_f(2.0);
    let gap = b - two * a;
    if gap.abs() <= F::from_f(NEAR_CRITICAL_GUARD) {
        return Err(ErwsError::Degenerate(
            "closed form for E[S^2] has a pole at b = 2a".into(),
        ));
    }
    Ok((b * c(n, b) - two * a * c(n, two * a)) / gap)
}

/// Closed form for E[S_n²Σ_n], valid away from the b = 2a pole.
pub fn closed_e_s2_sigma<F: Real>(params: &ModelParams<F>, n: u64) -> Result<F> {
    let (a, b) = (params.a(), params.b());
    let two = F::from_f(2.0);
    let gap = b - two * a;
    if gap.abs() <= F::from_f(NEAR_CRITICAL_GUARD) {
        return Err(ErwsError::Degenerate(
            "closed form for E[S^2 Σ] has a pole at b = 2a".into(),
        ));
    }
    let inner = two * a * c(n, two * a) - (two * a + b) * c(n, two * a + b);
    Ok((two * b * c(n, two * b) - b * c(n, b) + two * a / b * inner) / gap)
}

/// Closed form for E[S_n⁴], valid away from the poles at b = 2a and b = 4a.
pub fn closed_e_s4<F: Real>(params: &ModelParams<F>, n: u64) -> Result<F> {
    let (a, b) = (params.a(), params.b());
    let two = F::from_f(2.0);
    let four = F::from_f(4.0);
    let gap2 = two * a - b;
    let gap4 = four * a - b;
    if gap2.abs() <= F::from_f(NEAR_CRITICAL_GUARD) || gap4.abs() <= F::from_f(NEAR_CRITICAL_GUARD)
    {
        return Err(ErwsError::Degenerate(
            "closed form for E[S^4] has poles at b = 2a and b = 4a".into(),
        ));
    }
    let six = F::from_f(6.0);
    let t1 = F::from_f(24.0) * a * (two * a * a + two * a * b - b * b)
        / (gap2 * gap2 * gap4)
        * c(n, four * a);
    let t2 = F::from_f(12.0) * a * (two * a + b) / (gap2 * gap2) * c(n, two * a + b);
    let t3 = F::from_f(8.0) * a / gap2 * c(n, two * a);
    let t4 = six * b * b / (gap2 * gap2) * c(n, two * b);
    let t5 = b * (F::from_f(5.0) * b - two * a) / (gap2 * gap4) * c(n, b);
    Ok(t1 - t2 + t3 + t4 - t5)
}

/// Covariances and variances assembled from a moment table.
pub fn covariance_suite<F: Real>(t: &MomentTable<F>) -> CovarianceSuite<F> {
    CovarianceSuite {
        cov_s_sigma: t.e_s_sigma - t.e_s * t.e_sigma,
        var_s: t.e_s2 - t.e_s * t.e_s,
        var_sigma: t.e_sigma2 - t.e_sigma * t.e_sigma,
        cov_s2_sigma: t.e_s2_sigma - t.e_s2 * t.e_sigma,
        var_s2: t.e_s4 - t.e_s2 * t.e_s2,
    }
}

fn check_nondegenerate<F: Real>(params: &ModelParams<F>, var_x: F, var_sigma: F) -> Result<()> {
    if params.b() == F::one() {
        return Err(ErwsError::Degenerate(
            "b = 1 makes Σ_n deterministic; correlation undefined".into(),
        ));
    }
    if !(var_x > F::zero()) || !(var_sigma > F::zero()) {
        return Err(ErwsError::Degenerate(
            "vanishing variance; correlation undefined".into(),
        ));
    }
    Ok(())
}

/// ρ[S_n, Σ_n] from a moment table; exactly 0 when a = 0 or s = 1/2.
pub fn rho_s_sigma_from<F: Real>(params: &ModelParams<F>, t: &MomentTable<F>) -> Result<F> {
    if params.a() == F::zero() || params.s() == F::from_f(0.5) {
        return Ok(F::zero());
    }
    let cov = covariance_suite(t);
    check_nondegenerate(params, cov.var_s, cov.var_sigma)?;
    Ok(cov.cov_s_sigma / (cov.var_s * cov.var_sigma).sqrt())
}

/// ρ[S_n², Σ_n] from a moment table.
pub fn rho_s2_sigma_from<F: Real>(params: &ModelParams<F>, t: &MomentTable<F>) -> Result<F> {
    let cov = covariance_suite(t);
    check_nondegenerate(params, cov.var_s2, cov.var_sigma)?;
    Ok(cov.cov_s2_sigma / (cov.var_s2 * cov.var_sigma).sqrt())
}

/// ρ[S_n, Σ_n] at time n.
pub fn rho_s_sigma<F: Real>(params: &ModelParams<F>, n: u64) -> Result<F> {
    rho_s_sigma_from(params, &moment_table(params, n))
}

/// ρ[S_n², Σ_n] at time n.
pub fn rho_s2_sigma<F: Real>(params: &ModelParams<F>, n: u64) -> Result<F> {
    rho_s2_sigma_from(params, &moment_table(params, n))
}

/// Relative residual of the summation identity
/// Σ_{k=1}^{n-1} c_k(x)/(k c_{k+1}(y)) = {c_n(x)/c_n(y) - 1}/(x - y).
pub fn partial_sum_identity_check<F: Real>(x: F, y: F, n: u64) -> F {
    assert!(x != y, "identity requires x != y");
    assert!(
        x > -F::one() && y > -F::one(),
        "identity requires x, y > -1"
    );
    assert!(n >= 2);
    let mut lhs = F::zero();
    let mut c_x = F::one();
    let mut c_y_next = F::one(); // c_{k+1}(y) built incrementally
    for k in 1..n {
        let kf = F::from_u(k);
        c_y_next = c_y_next * (F::one() + y / kf);
        lhs = lhs + c_x / (kf * c_y_next);
        c_x = c_x * (F::one() + x / kf);
    }
    let rhs = (c_x / c_y_next - F::one()) / (x - y);
    (lhs - rhs).abs() / rhs.abs().max(F::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_model::ModelParams;

    fn p(a: f64, b: f64, s: f64) -> ModelParams<f64> {
        ModelParams::from_ab(a, b, s).unwrap()
    }

    #[test]
    fn mean_s_examples() {
        let m = p(0.3, 0.6, 0.8);
        assert!((mean_s(&m, 1) - 0.6).abs() < 1e-15);
        let sym = p(0.3, 0.6, 0.5);
        for n in [1u64, 5, 50] {
            assert_eq!(mean_s(&sym, n), 0.0);
        }
        // s=1, a=0.5: E[S_2] = c_2(0.5) = 1.5
        assert!((mean_s(&p(0.5, 0.5, 1.0), 2) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn mean_sigma_examples() {
        let no_stops = p(0.2, 1.0, 0.5);
        assert!((mean_sigma(&no_stops, 50) - 50.0).abs() < 1e-12);
        let m = p(0.1, 0.5, 0.5);
        assert!((mean_sigma(&m, 2) - 1.5).abs() < 1e-15);
        assert!((mean_sigma(&m, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_moment_examples() {
        // s=1, a=b=0.5, n=2
        let m = p(0.5, 0.5, 1.0);
        let t = moment_table(&m, 2);
        assert!((t.e_s_sigma - 2.5).abs() < 1e-15);
        assert!((t.e_s2 - 2.5).abs() < 1e-15); // 1 + 2a + b
        assert!((t.e_sigma2 + t.e_sigma - 4.0).abs() < 1e-15); // E[Σ(Σ+1)] = 2(1+2b)

        // critical a=0.25, b=0.5: E[S_2^2] = 1 + 2a + b = 2.0
        let crit = p(0.25, 0.5, 1.0);
        assert!((moment_table(&crit, 2).e_s2 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn higher_moment_examples() {
        let m = p(0.5, 0.5, 1.0);
        let t1 = moment_table(&m, 1);
        assert_eq!(t1.e_s2_sigma, 1.0);
        assert_eq!(t1.e_s4, 1.0);
        let t2 = moment_table(&m, 2);
        assert!((t2.e_s2_sigma - 4.5).abs() < 1e-15); // .5*8 + .5*1
        assert!((t2.e_s4 - 8.5).abs() < 1e-15); // .5*16 + .5*1
    }

    #[test]
    fn covariance_examples() {
        // a=0 -> Cov[S, Σ] = 0 for all n
        let m = p(0.0, 0.5, 1.0);
        for n in [1u64, 2, 7, 30] {
            let cov = covariance_suite(&moment_table(&m, n));
            assert!(cov.cov_s_sigma.abs() < 1e-13);
        }
        // b=0.5, n=2: V[Σ_2] = b(1-b)
        let cov = covariance_suite(&moment_table(&p(0.1, 0.5, 0.3), 2));
        assert!((cov.var_sigma - 0.25).abs() < 1e-15);
        // s=1, a=b=0.5, n=2: V[S_2] = 2.5 - 1.5^2
        let cov = covariance_suite(&moment_table(&p(0.5, 0.5, 1.0), 2));
        assert!((cov.var_s - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rho_examples() {
        // exact zero short-circuits
        assert_eq!(rho_s_sigma(&p(0.0, 0.5, 1.0), 10).unwrap(), 0.0);
        assert_eq!(rho_s_sigma(&p(0.3, 0.6, 0.5), 10).unwrap(), 0.0);
        // two-point aligned joint law at n=2
        let r = rho_s_sigma(&p(0.5, 0.5, 1.0), 2).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r2 = rho_s2_sigma(&p(0.5, 0.5, 1.0), 2).unwrap();
        assert!((r2 - 1.0).abs() < 1e-12);
        // b=1 is degenerate
        assert!(matches!(
            rho_s2_sigma(&p(0.2, 1.0, 1.0), 10),
            Err(ErwsError::Degenerate(_))
        ));
    }

    #[test]
    fn closed_forms_match_recursion() {
        for &(a, b) in &[(0.2, 0.8), (-0.45, 0.9), (0.4, 0.5), (0.0, 0.3)] {
            let m = p(a, b, 1.0);
            for n in [2u64, 5, 17, 100, 1000] {
                let t = moment_table(&m, n);
                let s2 = closed_e_s2(&m, n).unwrap();
                let s2s = closed_e_s2_sigma(&m, n).unwrap();
                assert!((t.e_s2 - s2).abs() <= 1e-10 * s2.abs().max(1.0), "{a} {b} {n}");
                assert!(
                    (t.e_s2_sigma - s2s).abs() <= 1e-10 * s2s.abs().max(1.0),
                    "{a} {b} {n}"
                );
                if (4.0 * a - b).abs() > 1e-3 {
                    let s4 = closed_e_s4(&m, n).unwrap();
                    assert!(
                        (t.e_s4 - s4).abs() <= 1e-9 * s4.abs().max(1.0),
                        "{a} {b} {n}: {} vs {s4}",
                        t.e_s4
                    );
                }
            }
        }
    }

    #[test]
    fn closed_forms_guard_near_critical() {
        let crit = p(0.3, 0.6, 1.0);
        assert!(closed_e_s2(&crit, 10).is_err());
        assert!(closed_e_s2_sigma(&crit, 10).is_err());
        assert!(closed_e_s4(&crit, 10).is_err());
        // b = 4a pole only affects the fourth moment
        let quarter = p(0.15, 0.6, 1.0);
        assert!(closed_e_s2(&quarter, 10).is_ok());
        assert!(closed_e_s4(&quarter, 10).is_err());
    }

    #[test]
    fn partial_sum_identity_examples() {
        // n=2: single term 1/(1+y) on both sides
        assert!(partial_sum_identity_check(0.3_f64, 0.7, 2) < 1e-15);
        assert!(partial_sum_identity_check(0.9_f64, 0.1, 10_000) < 1e-10);
        assert!(partial_sum_identity_check(-0.5_f64, 1.5, 5_000) < 1e-10);
    }

    #[test]
    #[should_panic(expected = "x != y")]
    fn partial_sum_identity_rejects_equal_args() {
        partial_sum_identity_check(0.5_f64, 0.5, 10);
    }

    #[test]
    fn checkpointed_pass_matches_single_calls() {
        let m = p(0.35, 0.7, 0.9);
        let ks = [1u64, 2, 10, 63, 64, 1000];
        let tables = moment_tables_at(&m, &ks);
        for t in tables {
            let direct = moment_table(&m, t.n);
            assert_eq!(t.e_s4, direct.e_s4);
            assert_eq!(t.e_s_sigma, direct.e_s_sigma);
        }
    }

    #[test]
    fn moment_table_f32_smoke() {
        let m = ModelParams::<f32>::from_ab(0.2, 0.8, 1.0).unwrap();
        let t = moment_table(&m, 50);
        assert!(t.e_s2 > 0.0 && t.e_s4 >= t.e_s2 * t.e_s2 - 1e-3);
    }
}
