//! Ensemble statistics: deterministic reductions, correlation estimators
//! with standard errors, and goodness-of-fit tests.
//!
//! All reductions are pairwise trees over slices in index order, so results
//! are bit-identical regardless of how replicas were scheduled.

use crate::error::{ErwsError, Result};
use crate::special::ln_gamma;

/// Below this length a pairwise-tree leaf sums sequentially.
const PAIRWISE_LEAF: usize = 32;

/// Deterministic pairwise summation; error grows like O(log n) rather than
/// the O(n) of a naive left fold.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

/// Sample mean with its standard error (n >= 2).
pub fn mean_se(xs: &[f64]) -> Result<MeanSe> {
    if xs.len() < 2 {
        return Err(ErwsError::Domain("mean_se needs at least 2 samples".into()));
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let ss: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&ss) / (n - 1.0);
    Ok(MeanSe {
        mean,
        se: (var / n).sqrt(),
        n: xs.len(),
    })
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Correlation {
    pub r: f64,
    pub se: f64,
    pub n: usize,
}

/// Pearson correlation with a standard error: leave-one-out jackknife for
/// small ensembles, Fisher's (1-r²)/√(n-3) beyond 1000 replicas where the
/// two agree and the jackknife pass stops paying for itself.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() {
        return Err(ErwsError::Domain("pearson needs equal-length samples".into()));
    }
    let n = xs.len();
    if n < 4 {
        return Err(ErwsError::Domain("pearson needs at least 4 samples".into()));
    }
    let nf = n as f64;
    let mx = pairwise_sum(xs) / nf;
    let my = pairwise_sum(ys) / nf;
    let dx: Vec<f64> = xs.iter().map(|&x| x - mx).collect();
    let dy: Vec<f64> = ys.iter().map(|&y| y - my).collect();
    let sxx = pairwise_sum(&dx.iter().map(|&d| d * d).collect::<Vec<_>>());
    let syy = pairwise_sum(&dy.iter().map(|&d| d * d).collect::<Vec<_>>());
    let sxy = pairwise_sum(&dx.iter().zip(&dy).map(|(&a, &b)| a * b).collect::<Vec<_>>());
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(ErwsError::Degenerate(
            "constant sample; correlation undefined".into(),
        ));
    }
    let r = sxy / (sxx * syy).sqrt();

    let se = if n <= 1000 {
        // leave-one-out in O(n) from the centered sufficient statistics
        let mut loo = Vec::with_capacity(n);
        for i in 0..n {
            let w = nf / (nf - 1.0); // centering shift correction factor
            let sxx_i = sxx - dx[i] * dx[i] * w;
            let syy_i = syy - dy[i] * dy[i] * w;
            let sxy_i = sxy - dx[i] * dy[i] * w;
            if sxx_i > 0.0 && syy_i > 0.0 {
                loo.push(sxy_i / (sxx_i * syy_i).sqrt());
            } else {
                loo.push(r);
            }
        }
        let lm = pairwise_sum(&loo) / nf;
        let dev: Vec<f64> = loo.iter().map(|&v| (v - lm) * (v - lm)).collect();
        ((nf - 1.0) / nf * pairwise_sum(&dev)).sqrt()
    } else {
        (1.0 - r * r) / (nf - 3.0).sqrt()
    };
    Ok(Correlation { r, se, n })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}.
/// For small λ that series converges too slowly, so the Jacobi-theta dual
/// form of the CDF is used instead.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let t = -core::f64::consts::PI * core::f64::consts::PI / (8.0 * lambda * lambda);
        let cdf = (2.0 * core::f64::consts::PI).sqrt() / lambda
            * (t.exp() + (9.0 * t).exp() + (25.0 * t).exp() + (49.0 * t).exp());
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_test<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    let n = sample.len();
    if n < 8 {
        return Err(ErwsError::Domain("ks_test needs at least 8 samples".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN sample"));
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    let lambda = (nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(lambda),
        n,
    })
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square goodness of fit of observed counts against expected
/// counts (same total mass; every expected cell must be positive).
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(ErwsError::Domain("chi_square needs matching bins".into()));
    }
    if observed.len() < 2 {
        return Err(ErwsError::Domain("chi_square needs at least 2 bins".into()));
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return Err(ErwsError::Domain(
            "chi_square needs strictly positive expected counts".into(),
        ));
    }
    let terms: Vec<f64> = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .collect();
    let statistic = pairwise_sum(&terms);
    let dof = observed.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: reg_gamma_upper(dof as f64 / 2.0, statistic / 2.0),
    })
}

/// Regularized upper incomplete gamma Q(a, x): series for x < a+1,
/// Lentz continued fraction otherwise.
pub fn reg_gamma_upper(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    let lg = ln_gamma(a);
    if x < a + 1.0 {
        // P(a,x) by power series, return 1 - P
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        1.0 - sum * (a * x.ln() - x - lg).exp()
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (a * x.ln() - x - lg).exp() * h
    }
}
