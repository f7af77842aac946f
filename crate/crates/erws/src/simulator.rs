//! Trajectory generation in O(1) memory per step.
//!
//! The conditional law of the next step given the history depends only on
//! the counts (N⁺, N⁻) of past +1 and -1 moves:
//!
//! P(+1) = (p N⁺ + q N⁻)/n,  P(-1) = (q N⁺ + p N⁻)/n,  P(0) = 1 - bΣ_n/n,
//!
//! so a walk is simulated from this sufficient statistic with exactly one
//! uniform variate per step.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::core_model::ModelParams;
use crate::error::{ErwsError, Result};

/// Cap for materializing full increment paths.
pub const PATH_CAP: u64 = 10_000_000;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the 256-bit seed of the replica's ChaCha stream from the ensemble
/// seed and the replica index. Distinct replicas get distinct streams and
/// the derivation is independent of thread scheduling.
pub fn replica_stream(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut state = seed ^ replica.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Sufficient statistic of a running walk plus its RNG stream.
#[derive(Clone, Debug)]
pub struct WalkState<R: RngCore = ChaCha8Rng> {
    n: u64,
    n_plus: u64,
    n_minus: u64,
    pos: i64,
    min_pos: i64,
    max_pos: i64,
    returns_to_zero: u64,
    last_zero: Option<u64>,
    rng: R,
}

impl WalkState<ChaCha8Rng> {
    pub fn new(seed: u64) -> Self {
        Self::with_rng(replica_stream(seed, 0))
    }

    pub fn for_replica(seed: u64, replica: u64) -> Self {
        Self::with_rng(replica_stream(seed, replica))
    }
}

impl<R: RngCore> WalkState<R> {
    pub fn with_rng(rng: R) -> Self {
        Self {
            n: 0,
            n_plus: 0,
            n_minus: 0,
            pos: 0,
            min_pos: 0,
            max_pos: 0,
            returns_to_zero: 0,
            last_zero: None,
            rng,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// S_n = N⁺ - N⁻.
    pub fn s(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }

    /// Σ_n = N⁺ + N⁻.
    pub fn sigma(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    /// R_n = max - min + 1 (interval identity for unit/zero increments).
    pub fn range(&self) -> u64 {
        (self.max_pos - self.min_pos + 1) as u64
    }

    pub fn returns_to_zero(&self) -> u64 {
        self.returns_to_zero
    }

    /// Time of the last visit to 0 after n >= 1, if any.
    pub fn last_zero(&self) -> Option<u64> {
        self.last_zero
    }

    fn apply(&mut self, inc: i8) {
        self.n += 1;
        match inc {
            1 => self.n_plus += 1,
            -1 => self.n_minus += 1,
            _ => {}
        }
        self.pos += inc as i64;
        if self.pos < self.min_pos {
            self.min_pos = self.pos;
        }
        if self.pos > self.max_pos {
            self.max_pos = self.pos;
        }
        if self.pos == 0 {
            self.returns_to_zero += 1;
            self.last_zero = Some(self.n);
        }
    }

    /// First step: +1 with probability s, -1 otherwise. One uniform draw.
    pub fn first_step(&mut self, params: &ModelParams<f64>) -> Result<i8> {
        if self.n != 0 {
            return Err(ErwsError::State(format!(
                "first_step requires n = 0, walk is at n = {}",
                self.n
            )));
        }
        let u: f64 = self.rng.random();
        let inc = if u < params.s() { 1 } else { -1 };
        self.apply(inc);
        Ok(inc)
    }

    /// One step of the marginalized transition law. One uniform draw.
    pub fn step(&mut self, params: &ModelParams<f64>) -> Result<i8> {
        if self.n == 0 {
            return Err(ErwsError::State(
                "step requires n >= 1; call first_step first".into(),
            ));
        }
        let nf = self.n as f64;
        let plus = (params.p() * self.n_plus as f64 + params.q() * self.n_minus as f64) / nf;
        let minus = (params.q() * self.n_plus as f64 + params.p() * self.n_minus as f64) / nf;
        let u: f64 = self.rng.random();
        let inc = if u < plus {
            1
        } else if u < plus + minus {
            -1
        } else {
            0
        };
        self.apply(inc);
        Ok(inc)
    }
}

/// State snapshot at a checkpoint time k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Checkpoint {
    pub k: u64,
    pub s: i64,
    pub sigma: u64,
    pub range: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub n: u64,
    pub seed: u64,
    pub s_n: i64,
    pub sigma_n: u64,
    pub range_n: u64,
    pub returns_to_zero: u64,
    pub last_zero: Option<u64>,
    pub checkpoints: Vec<Checkpoint>,
}

impl TrajectorySummary {
    pub const CSV_HEADER: &'static str = "n,seed,s_n,sigma_n,range_n,returns_to_zero";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n, self.seed, self.s_n, self.sigma_n, self.range_n, self.returns_to_zero
        )
    }

    /// Rebuild summary statistics from a full increment path.
    pub fn from_path(path: &[i8], seed: u64) -> Self {
        let (mut pos, mut min, mut max) = (0i64, 0i64, 0i64);
        let (mut n_plus, mut n_minus, mut returns, mut last_zero) = (0u64, 0u64, 0u64, None);
        for (i, &inc) in path.iter().enumerate() {
            pos += inc as i64;
            match inc {
                1 => n_plus += 1,
                -1 => n_minus += 1,
                _ => {}
            }
            min = min.min(pos);
            max = max.max(pos);
            if pos == 0 {
                returns += 1;
                last_zero = Some(i as u64 + 1);
            }
        }
        Self {
            n: path.len() as u64,
            seed,
            s_n: n_plus as i64 - n_minus as i64,
            sigma_n: n_plus + n_minus,
            range_n: (max - min + 1) as u64,
            returns_to_zero: returns,
            last_zero,
            checkpoints: Vec::new(),
        }
    }
}

/// Geometric checkpoint times k = ⌈2^{j/2}⌉ up to n, deduplicated.
pub fn checkpoint_schedule(n: u64) -> Vec<u64> {
    let mut ks = Vec::new();
    let mut j = 0u32;
    loop {
        let k = 2f64.powf(j as f64 / 2.0).ceil() as u64;
        if k > n {
            break;
        }
        if ks.last() != Some(&k) {
            ks.push(k);
        }
        j += 1;
    }
    if ks.last() != Some(&n) {
        ks.push(n);
    }
    ks
}

/// Run a trajectory to horizon n; deterministic in (params, n, seed).
pub fn run(params: &ModelParams<f64>, n: u64, seed: u64) -> TrajectorySummary {
    run_replica(params, n, seed, 0, true)
}

/// Same as [`run`] but on the replica's derived stream.
pub fn run_replica(
    params: &ModelParams<f64>,
    n: u64,
    seed: u64,
    replica: u64,
    with_checkpoints: bool,
) -> TrajectorySummary {
    assert!(n >= 1, "horizon must be >= 1");
    let mut state = WalkState::for_replica(seed, replica);
    let schedule = if with_checkpoints {
        checkpoint_schedule(n)
    } else {
        Vec::new()
    };
    let mut checkpoints = Vec::with_capacity(schedule.len());
    let mut next = schedule.iter().copied().peekable();

    state.first_step(params).expect("fresh state");
    while let Some(&k) = next.peek() {
        if k > state.n {
            break;
        }
        checkpoints.push(Checkpoint {
            k,
            s: state.s(),
            sigma: state.sigma(),
            range: state.range(),
        });
        next.next();
    }
    for _ in 1..n {
        state.step(params).expect("n >= 1");
        while let Some(&k) = next.peek() {
            if k > state.n {
                break;
            }
            checkpoints.push(Checkpoint {
                k,
                s: state.s(),
                sigma: state.sigma(),
                range: state.range(),
            });
            next.next();
        }
    }
    TrajectorySummary {
        n,
        seed,
        s_n: state.s(),
        sigma_n: state.sigma(),
        range_n: state.range(),
        returns_to_zero: state.returns_to_zero(),
        last_zero: state.last_zero(),
        checkpoints,
    }
}

/// Full increment sequence; running stats equal [`run`]'s summary.
pub fn run_path(params: &ModelParams<f64>, n: u64, seed: u64) -> Result<Vec<i8>> {
    if n > PATH_CAP {
        return Err(ErwsError::Cap {
            what: "path length",
            value: n,
            cap: PATH_CAP,
        });
    }
    assert!(n >= 1, "horizon must be >= 1");
    let mut state = WalkState::for_replica(seed, 0);
    let mut path = Vec::with_capacity(n as usize);
    path.push(state.first_step(params)?);
    for _ in 1..n {
        path.push(state.step(params)?);
    }
    Ok(path)
}
