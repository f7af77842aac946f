//! Reproducible Monte Carlo ensembles and the distributional checks built
//! on them.
//!
//! Replica streams are derived from (seed, replica index) alone and results
//! are reduced in replica order, so a report is a pure function of its spec
//! regardless of thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::predicted_sigma_scaling;
use crate::core_model::{ModelParams, Regime};
use crate::error::{ErwsError, Result};
use crate::exact_moments::{
    mean_s, mean_sigma, moment_table, rho_s2_sigma_from, rho_s_sigma_from,
};
use crate::simulator::{run_replica, TrajectorySummary};
use crate::stats::{ks_test, mean_se, normal_cdf, pearson, Correlation, KsResult, MeanSe};

/// Ensembles below this size give standard errors too wide to report.
pub const MIN_REPLICAS: u64 = 100;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnsembleSpec {
    pub n: u64,
    pub replicas: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
}

impl EnsembleSpec {
    pub fn new(n: u64, replicas: u64, seed: u64) -> Self {
        Self {
            n,
            replicas,
            seed,
            parallelism: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(ErwsError::Domain("ensemble horizon must be >= 1".into()));
        }
        if self.replicas < MIN_REPLICAS {
            return Err(ErwsError::Domain(format!(
                "need at least {MIN_REPLICAS} replicas, got {}",
                self.replicas
            )));
        }
        Ok(())
    }
}

/// All replica summaries, in replica order.
pub fn run_ensemble(
    params: &ModelParams<f64>,
    spec: &EnsembleSpec,
    with_checkpoints: bool,
) -> Result<Vec<TrajectorySummary>> {
    spec.validate()?;
    let job = |replica: u64| run_replica(params, spec.n, spec.seed, replica, with_checkpoints);
    let summaries = match spec.parallelism {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| ErwsError::Domain(format!("thread pool: {e}")))?;
            pool.install(|| (0..spec.replicas).into_par_iter().map(job).collect())
        }
        None => (0..spec.replicas).into_par_iter().map(job).collect(),
    };
    Ok(summaries)
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleReport {
    pub params: ModelParams<f64>,
    pub regime: Regime,
    pub n: u64,
    pub replicas: u64,
    pub seed: u64,
    pub mean_s: MeanSe,
    pub mean_sigma: MeanSe,
    pub mean_range: MeanSe,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_s_sigma: Option<Correlation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_s2_sigma: Option<Correlation>,
    pub exact_mean_s: f64,
    pub exact_mean_sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_rho_s_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_rho_s2_sigma: Option<f64>,
}

/// Ensemble point estimates with standard errors, side by side with the
/// exact finite-n values.
pub fn estimate(params: &ModelParams<f64>, spec: &EnsembleSpec) -> Result<EnsembleReport> {
    let summaries = run_ensemble(params, spec, false)?;
    let s: Vec<f64> = summaries.iter().map(|t| t.s_n as f64).collect();
    let sigma: Vec<f64> = summaries.iter().map(|t| t.sigma_n as f64).collect();
    let range: Vec<f64> = summaries.iter().map(|t| t.range_n as f64).collect();
    let s2: Vec<f64> = s.iter().map(|&v| v * v).collect();

    let table = moment_table(params, spec.n);
    Ok(EnsembleReport {
        params: *params,
        regime: params.classify(),
        n: spec.n,
        replicas: spec.replicas,
        seed: spec.seed,
        mean_s: mean_se(&s)?,
        mean_sigma: mean_se(&sigma)?,
        mean_range: mean_se(&range)?,
        rho_s_sigma: pearson(&s, &sigma).ok(),
        rho_s2_sigma: pearson(&s2, &sigma).ok(),
        exact_mean_s: mean_s(params, spec.n),
        exact_mean_sigma: mean_sigma(params, spec.n),
        exact_rho_s_sigma: rho_s_sigma_from(params, &table).ok(),
        exact_rho_s2_sigma: rho_s2_sigma_from(params, &table).ok(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CltReport {
    pub regime: Regime,
    pub n: u64,
    pub replicas: u64,
    pub seed: u64,
    pub ks: KsResult,
    pub sample_mean: f64,
    pub sample_var: f64,
    /// Replicas dropped because Σ_n was too small for the normalization.
    pub skipped: u64,
}

/// Gaussian-limit check: S_n centered by its exact mean and scaled by
/// √(b/(b-2a) Σ_n) subcritically or √(Σ_n log Σ_n) critically is tested
/// against N(0,1) by Kolmogorov–Smirnov. The centering term vanishes in the
/// limit but removes the O(n^a) drift a biased first step leaves at
/// finite n. Supercritical parameters have no Gaussian limit and are
/// rejected.
pub fn clt_test(params: &ModelParams<f64>, spec: &EnsembleSpec) -> Result<CltReport> {
    let regime = params.classify();
    let (a, b) = (params.a(), params.b());
    let scale_var = match regime {
        Regime::Subcritical => b / (b - 2.0 * a),
        Regime::Critical => 1.0,
        Regime::Supercritical => {
            return Err(ErwsError::Regime(
                "no Gaussian limit for S_n in the supercritical regime".into(),
            ))
        }
    };
    let summaries = run_ensemble(params, spec, false)?;
    let center = mean_s(params, spec.n);
    let mut zs = Vec::with_capacity(summaries.len());
    let mut skipped = 0u64;
    for t in &summaries {
        let sigma = t.sigma_n as f64;
        let denom2 = match regime {
            Regime::Subcritical => scale_var * sigma,
            _ => sigma * sigma.ln(),
        };
        if !(denom2 > 0.0) {
            skipped += 1;
            continue;
        }
        zs.push((t.s_n as f64 - center) / denom2.sqrt());
    }
    let ks = ks_test(&zs, normal_cdf)?;
    let m = mean_se(&zs)?;
    let var = m.se * m.se * zs.len() as f64;
    Ok(CltReport {
        regime,
        n: spec.n,
        replicas: spec.replicas,
        seed: spec.seed,
        ks,
        sample_mean: m.mean,
        sample_var: var,
        skipped,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SigmaScalingReport {
    pub b: f64,
    pub n: u64,
    pub replicas: u64,
    pub seed: u64,
    /// Ensemble moments of Σ_n/n^b.
    pub mean: MeanSe,
    pub second_moment: MeanSe,
    /// Mittag-Leffler limit values 1/Γ(1+b) and 2/Γ(1+2b).
    pub limit_mean: f64,
    pub limit_second_moment: f64,
    /// Exact finite-n values of the same scaled moments.
    pub exact_mean: f64,
    pub exact_second_moment: f64,
}

/// Moments of Σ_n/n^b against their Mittag-Leffler limits.
pub fn sigma_scaling_test(
    params: &ModelParams<f64>,
    spec: &EnsembleSpec,
) -> Result<SigmaScalingReport> {
    let b = params.b();
    let limits = predicted_sigma_scaling(b)?;
    let summaries = run_ensemble(params, spec, false)?;
    let scale = (spec.n as f64).powf(b);
    let xs: Vec<f64> = summaries.iter().map(|t| t.sigma_n as f64 / scale).collect();
    let x2: Vec<f64> = xs.iter().map(|&x| x * x).collect();
    let table = moment_table(params, spec.n);
    Ok(SigmaScalingReport {
        b,
        n: spec.n,
        replicas: spec.replicas,
        seed: spec.seed,
        mean: mean_se(&xs)?,
        second_moment: mean_se(&x2)?,
        limit_mean: limits.limit_mean,
        limit_second_moment: limits.limit_second_moment,
        exact_mean: table.e_sigma / scale,
        exact_second_moment: table.e_sigma2 / (scale * scale),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RecurrenceReport {
    pub regime: Regime,
    pub n: u64,
    pub replicas: u64,
    pub seed: u64,
    /// Fraction of replicas that revisit the origin at least once.
    pub return_fraction: f64,
    pub mean_returns: MeanSe,
    /// Mean of (time of last visit to 0)/n, counting never-returning
    /// replicas as 0.
    pub mean_last_zero_fraction: f64,
}

/// Summary of origin visits across an ensemble — a finite-horizon proxy
/// for the recurrence/transience dichotomy across regimes.
pub fn recurrence_diagnostic(
    params: &ModelParams<f64>,
    spec: &EnsembleSpec,
) -> Result<RecurrenceReport> {
    let summaries = run_ensemble(params, spec, false)?;
    let returns: Vec<f64> = summaries.iter().map(|t| t.returns_to_zero as f64).collect();
    let returned = summaries.iter().filter(|t| t.returns_to_zero > 0).count();
    let lz: Vec<f64> = summaries
        .iter()
        .map(|t| t.last_zero.unwrap_or(0) as f64 / spec.n as f64)
        .collect();
    Ok(RecurrenceReport {
        regime: params.classify(),
        n: spec.n,
        replicas: spec.replicas,
        seed: spec.seed,
        return_fraction: returned as f64 / summaries.len() as f64,
        mean_returns: mean_se(&returns)?,
        mean_last_zero_fraction: crate::stats::pairwise_sum(&lz) / lz.len() as f64,
    })
}
