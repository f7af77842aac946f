//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with --nocapture, or automatically on failure).
//!
//! Two checks are known to fail at desk scale and are kept faithful rather
//! than weakened; their failure output documents the measured values:
//! - criterion 04: the exact correlation of (S_n², Σ_n) at n = 10⁶ is still
//!   up to ~0.07 away from its limit near the critical point (convergence
//!   is O(1/log n), so n ~ 10²¹ would be needed for 0.02);
//! - criterion 05 (critical half): the normalized statistic carries a
//!   variance offset ~ 1 + 0.55/log Σ, which a 10⁴-replica KS test at
//!   n = 10⁵ resolves easily, so p < 0.01 at both documented seeds.

use std::time::Instant;

use erws::asymptotics::{const_p, const_q, const_q_prime, const_r, const_r_prime, rho_s2_sigma_limit};
use erws::core_model::ModelParams;
use erws::exact_moments::{
    covariance_suite, moment_table, moment_tables_at, rho_s2_sigma_from, rho_s_sigma_from,
};
use erws::montecarlo::{clt_test, estimate, sigma_scaling_test, EnsembleSpec};
use erws::oracle::{exact_joint_law, exact_moment};
use erws::range_analysis::{lemma31_case_i, lemma31_case_ii, range_scaling_ensemble};

fn report(id: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn params(a: f64, b: f64, s: f64) -> ModelParams<f64> {
    ModelParams::from_ab(a, b, s).unwrap()
}

/// |x - y| relative to y with an absolute floor at 1, matching the oracle
/// comparisons where exact zeros occur.
fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut where_ = String::new();
    let mut quantities = 0u64;
    for &b in &[0.3, 0.6, 0.9] {
        for &af in &[-0.5, 0.5, 1.0] {
            for &s in &[0.0, 0.5, 1.0] {
                let m = params(af * b, b, s);
                for n in 1..=12u64 {
                    let law = exact_joint_law(&m, n).unwrap();
                    let t = moment_table(&m, n);
                    let cov = covariance_suite(&t);

                    let o = |i, j| exact_moment(&law, i, j);
                    let (es, esig) = (o(1, 0), o(0, 1));
                    let (es2, esig2, es_sig) = (o(2, 0), o(0, 2), o(1, 1));
                    let (es2sig, es4) = (o(2, 1), o(4, 0));
                    let mut pairs = vec![
                        (t.e_s, es),
                        (t.e_sigma, esig),
                        (t.e_s_sigma, es_sig),
                        (t.e_s2, es2),
                        (t.e_sigma2, esig2),
                        (t.e_s2_sigma, es2sig),
                        (t.e_s4, es4),
                        (cov.cov_s_sigma, es_sig - es * esig),
                        (cov.var_s, es2 - es * es),
                        (cov.var_sigma, esig2 - esig * esig),
                        (cov.cov_s2_sigma, es2sig - es2 * esig),
                        (cov.var_s2, es4 - es2 * es2),
                    ];
                    let (ovar_s, ovar_sig, ovar_s2) =
                        (es2 - es * es, esig2 - esig * esig, es4 - es2 * es2);
                    if let Ok(r) = rho_s_sigma_from(&m, &t) {
                        if ovar_s > 1e-12 && ovar_sig > 1e-12 {
                            pairs.push((r, (es_sig - es * esig) / (ovar_s * ovar_sig).sqrt()));
                        }
                    }
                    if let Ok(r) = rho_s2_sigma_from(&m, &t) {
                        if ovar_s2 > 1e-12 && ovar_sig > 1e-12 {
                            pairs.push((r, (es2sig - es2 * esig) / (ovar_s2 * ovar_sig).sqrt()));
                        }
                    }
                    for (engine, oracle) in pairs {
                        quantities += 1;
                        let e = rel(engine, oracle);
                        if e > worst {
                            worst = e;
                            where_ = format!("a={} b={b} s={s} n={n}", af * b);
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "01 oracle equivalence",
        worst <= 1e-10 && elapsed < 60.0,
        &format!(
            "{quantities} quantities, worst rel err {worst:.3e} at {where_}, {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_02_subcritical_correlation_decay() {
    let start = Instant::now();
    let m = params(0.2, 0.8, 1.0);
    let target = const_p(0.2f64, 0.8).unwrap();
    let ns = [1_000u64, 10_000, 100_000, 1_000_000];
    let tables = moment_tables_at(&m, &ns);
    let ratios: Vec<f64> = tables
        .iter()
        .map(|t| {
            rho_s_sigma_from(&m, t).unwrap() * (t.n as f64).powf((0.8 - 0.4) / 2.0) / target
        })
        .collect();
    let final_ok = (ratios[3] - 1.0).abs() < 0.05;
    let monotone = ratios
        .windows(2)
        .all(|w| (w[1] - 1.0).abs() <= (w[0] - 1.0).abs());
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "02 subcritical correlation decay",
        final_ok && monotone && elapsed < 60.0,
        &format!("ratio trend {ratios:.4?}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_03_critical_and_supercritical_constants() {
    let crit = params(0.3, 0.6, 1.0);
    let rho = rho_s_sigma_from(&crit, &moment_table(&crit, 1_000_000)).unwrap();
    let q = const_q(0.3f64).unwrap();
    let crit_ratio = rho * (1e6f64).ln().sqrt() / q;

    let sup = params(0.4, 0.5, 1.0);
    let rho_sup = rho_s_sigma_from(&sup, &moment_table(&sup, 1_000_000)).unwrap();
    let r = const_r(0.4f64, 0.5, 1.0).unwrap();
    let sup_ratio = rho_sup / r;

    report(
        "03 critical/supercritical constants",
        (crit_ratio - 1.0).abs() < 0.10 && (sup_ratio - 1.0).abs() < 0.02,
        &format!("critical ratio {crit_ratio:.4} (tol 10%), supercritical ratio {sup_ratio:.4} (tol 2%)"),
    );
}

#[test]
fn criterion_04_limit_curve_overlay() {
    let n = 1_000_000u64;
    let mut max_dev = 0.0f64;
    let mut per_b = String::new();
    let mut flat_ok = true;
    let mut cont_ok = true;
    for &b in &[0.3f64, 0.6, 0.9] {
        let mut b_dev = 0.0f64;
        let mut flat_min = f64::MAX;
        let mut flat_max = f64::MIN;
        for i in 0..201 {
            let a = (-b + 2.0 * b * i as f64 / 200.0).clamp(-b, b);
            let m = params(a, b, 1.0);
            let limit = rho_s2_sigma_limit(&m).unwrap();
            let exact = rho_s2_sigma_from(&m, &moment_table(&m, n)).unwrap();
            b_dev = b_dev.max((exact - limit).abs());
            if a <= b / 2.0 {
                flat_min = flat_min.min(limit);
                flat_max = flat_max.max(limit);
            }
        }
        flat_ok &= (flat_max - flat_min) / flat_min < 0.02;
        let gap = (const_r_prime(b / 2.0 + 1e-6, b).unwrap() - const_q_prime(b).unwrap()).abs();
        cont_ok &= gap < 1e-4;
        max_dev = max_dev.max(b_dev);
        per_b.push_str(&format!(" b={b}: max|exact-limit|={b_dev:.4}, continuity gap={gap:.1e};"));
    }
    report(
        "04 limit-curve overlay at n=10^6",
        max_dev < 0.02 && flat_ok && cont_ok,
        &format!("overlay tol 0.02;{per_b} convergence is O(1/log n) near a=b/2, so the 0.02 overlay bound is unattainable at n=10^6"),
    );
}

#[test]
fn criterion_05_gaussian_limits() {
    // documented seeds: 2024, retry 2025
    let mut details = String::new();
    let mut all_pass = true;
    for (label, m) in [
        ("subcritical (0.2,0.8,1)", params(0.2, 0.8, 1.0)),
        ("critical (0.3,0.6,1)", params(0.3, 0.6, 1.0)),
    ] {
        let mut pass = false;
        let mut seen = Vec::new();
        for seed in [2024u64, 2025] {
            let rep = clt_test(&m, &EnsembleSpec::new(100_000, 10_000, seed)).unwrap();
            seen.push(format!("seed {seed}: D={:.4} p={:.4}", rep.ks.statistic, rep.ks.p_value));
            if rep.ks.p_value > 0.01 {
                pass = true;
                break;
            }
        }
        details.push_str(&format!(" {label}: [{}];", seen.join(", ")));
        all_pass &= pass;
    }
    report(
        "05 Gaussian limit KS tests",
        all_pass,
        &format!("n=10^5, 10^4 replicas;{details} the critical statistic carries a 1+O(1/log n) variance excess that fails KS at this scale"),
    );
}

#[test]
fn criterion_06_sigma_scaling() {
    let m = params(0.0, 0.5, 0.5);
    let rep = sigma_scaling_test(&m, &EnsembleSpec::new(1_000_000, 10_000, 31)).unwrap();
    let mean_ok = (rep.mean.mean - rep.exact_mean).abs() < 4.0 * rep.mean.se;
    let second_ok =
        (rep.second_moment.mean - rep.exact_second_moment).abs() < 4.0 * rep.second_moment.se;
    report(
        "06 move-count scaling moments",
        mean_ok && second_ok,
        &format!(
            "mean {:.5}±{:.5} vs exact {:.5}; second {:.5}±{:.5} vs exact {:.5}",
            rep.mean.mean,
            rep.mean.se,
            rep.exact_mean,
            rep.second_moment.mean,
            rep.second_moment.se,
            rep.exact_second_moment
        ),
    );
}

#[test]
fn criterion_07_range_scaling() {
    let sup = params(0.75, 0.9, 1.0);
    let rep = range_scaling_ensemble(&sup, &EnsembleSpec::new(1_000_000, 400, 17)).unwrap();
    let median = rep.quantiles[1];
    let sup_ok = (0.95..=1.05).contains(&median);

    let sub = params(0.0, 0.8, 0.5);
    let rep_sub = range_scaling_ensemble(&sub, &EnsembleSpec::new(1_000_000, 400, 17)).unwrap();
    let frac = rep_sub.in_band_fraction.unwrap();
    let sub_ok = frac >= 0.9;
    report(
        "07 range scaling diagnostics",
        sup_ok && sub_ok,
        &format!(
            "supercritical median ratio {median:.4} (need [0.95,1.05], conditioned fraction {:.2}); subcritical in-band fraction {frac:.3} (need >= 0.9; a.s. limsup not reproducible at this scale, band check only)",
            rep.conditioned_fraction.unwrap()
        ),
    );
}

#[test]
fn criterion_08_deterministic_range_harness() {
    let f = |n: u64| (n as f64).sqrt();
    let n = 1_000_000u64;
    let mut detail = String::new();
    let mut pass = true;
    for &c in &[-2.0, 0.0, 3.0] {
        let rep = lemma31_case_i(f, c, n).unwrap();
        detail.push_str(&format!(" c={c}: dev={:.2e} slack={:.2e};", rep.max_abs_dev, rep.slack));
        pass &= rep.pass;
    }
    let (toucher, zig) = lemma31_case_ii(f, n).unwrap();
    detail.push_str(&format!(
        " toucher={:.4} zigzag={:.4} band=[{:.4},{:.4}]",
        toucher.limsup_estimate, zig.limsup_estimate, toucher.band_lo, toucher.band_hi
    ));
    pass &= toucher.pass && zig.pass;
    report("08 deterministic range harness", pass, &detail);
}

#[test]
fn criterion_09_reproducibility() {
    let m = params(0.3, 0.6, 0.7);
    let mut spec = EnsembleSpec::new(10_000, 500, 99);
    spec.parallelism = Some(1);
    let r1 = serde_json::to_string(&estimate(&m, &spec).unwrap()).unwrap();
    spec.parallelism = Some(8);
    let r8 = serde_json::to_string(&estimate(&m, &spec).unwrap()).unwrap();
    report(
        "09 parallelism-independent reproducibility",
        r1 == r8,
        &format!("report bytes equal: {}", r1 == r8),
    );
}

#[test]
fn criterion_10_critical_second_moment_regression() {
    // at n=2, a=b/2 the second moment is 1 + 2a + b by direct enumeration;
    // the recursion reproduces it (the displayed critical-branch closed
    // form does not, which is why the recursion is the primary path).
    let m = params(0.25, 0.5, 1.0);
    let engine = moment_table(&m, 2).e_s2;
    let law = exact_joint_law(&m, 2).unwrap();
    let oracle = exact_moment(&law, 2, 0);
    let expected = 1.0 + 2.0 * 0.25 + 0.5;
    report(
        "10 critical second-moment regression",
        (engine - expected).abs() < 1e-14 && (oracle - expected).abs() < 1e-14,
        &format!("engine {engine}, oracle {oracle}, expected {expected}"),
    );
}
