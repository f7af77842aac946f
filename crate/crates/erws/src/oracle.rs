//! Exact small-n ground truth.
//!
//! The pair (N⁺, N⁻) is Markov under the marginalized transition law, so
//! the joint law of (S_n, Σ_n) follows from an O(n²)-state forward DP.
//! Range distributions need genuine path enumeration (the range is not a
//! function of the step counts) and are capped accordingly.

use std::collections::BTreeMap;

use crate::core_model::ModelParams;
use crate::error::{ErwsError, Result};
use crate::special::KahanSum;

/// DP horizon cap (O(n³) work).
pub const JOINT_LAW_CAP: u64 = 4000;

/// Path-enumeration horizon cap (3ⁿ paths).
pub const RANGE_LAW_CAP: u64 = 14;

/// Exact law of (N⁺, N⁻) at a fixed time n, stored densely.
#[derive(Clone, Debug)]
pub struct JointLaw {
    pub n: u64,
    stride: usize,
    grid: Vec<f64>,
}

impl JointLaw {
    pub fn prob(&self, n_plus: u64, n_minus: u64) -> f64 {
        if n_plus + n_minus > self.n {
            return 0.0;
        }
        self.grid[n_plus as usize * self.stride + n_minus as usize]
    }

    /// Non-zero entries (n_plus, n_minus, probability).
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        let stride = self.stride;
        self.grid.iter().enumerate().filter_map(move |(idx, &p)| {
            (p != 0.0).then(|| ((idx / stride) as u64, (idx % stride) as u64, p))
        })
    }

    pub fn total(&self) -> f64 {
        let mut acc = KahanSum::new();
        for (_, _, p) in self.entries() {
            acc.add(p);
        }
        acc.value()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "entries": self.entries().map(|(i, j, p)| serde_json::json!({
                "n_plus": i, "n_minus": j, "p": p,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Forward DP for the joint law of (N⁺, N⁻) at time n.
pub fn exact_joint_law(params: &ModelParams<f64>, n: u64) -> Result<JointLaw> {
    if n == 0 {
        return Err(ErwsError::Domain("joint law needs n >= 1".into()));
    }
    if n > JOINT_LAW_CAP {
        return Err(ErwsError::Cap {
            what: "joint law horizon",
            value: n,
            cap: JOINT_LAW_CAP,
        });
    }
    let stride = n as usize + 1;
    let mut cur = vec![0.0f64; stride * stride];
    cur[stride] = params.s(); // (1, 0)
    cur[1] = 1.0 - params.s(); // (0, 1)
    let (p, q, b) = (params.p(), params.q(), params.b());

    let mut next = vec![0.0f64; stride * stride];
    for t in 1..n {
        next.iter_mut().for_each(|x| *x = 0.0);
        let tf = t as f64;
        for i in 0..=t as usize {
            for j in 0..=(t as usize - i) {
                let w = cur[i * stride + j];
                if w == 0.0 {
                    continue;
                }
                let plus = (p * i as f64 + q * j as f64) / tf;
                let minus = (q * i as f64 + p * j as f64) / tf;
                let stay = 1.0 - b * (i + j) as f64 / tf;
                next[(i + 1) * stride + j] += w * plus;
                next[i * stride + j + 1] += w * minus;
                next[i * stride + j] += w * stay;
            }
        }
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(JointLaw {
        n,
        stride,
        grid: cur,
    })
}

/// E[S^i Σ^j] under the law, by direct compensated summation.
pub fn exact_moment(law: &JointLaw, i: u32, j: u32) -> f64 {
    assert!(i + j <= 8, "moment order cap");
    let mut acc = KahanSum::new();
    for (np, nm, p) in law.entries() {
        let s = np as f64 - nm as f64;
        let sigma = (np + nm) as f64;
        acc.add(p * s.powi(i as i32) * sigma.powi(j as i32));
    }
    acc.value()
}

/// Exact distribution of the range R_n by weighted path enumeration.
pub fn exact_range_law(params: &ModelParams<f64>, n: u64) -> Result<BTreeMap<u64, f64>> {
    if n == 0 {
        return Err(ErwsError::Domain("range law needs n >= 1".into()));
    }
    if n > RANGE_LAW_CAP {
        return Err(ErwsError::Cap {
            what: "range law horizon",
            value: n,
            cap: RANGE_LAW_CAP,
        });
    }
    let mut acc: BTreeMap<u64, KahanSum> = BTreeMap::new();

    struct Frame {
        t: u64,
        n_plus: u64,
        n_minus: u64,
        pos: i64,
        min: i64,
        max: i64,
        weight: f64,
    }

    let (p, q, b, s) = (params.p(), params.q(), params.b(), params.s());
    let mut stack = vec![
        Frame {
            t: 1,
            n_plus: 1,
            n_minus: 0,
            pos: 1,
            min: 0,
            max: 1,
            weight: s,
        },
        Frame {
            t: 1,
            n_plus: 0,
            n_minus: 1,
            pos: -1,
            min: -1,
            max: 0,
            weight: 1.0 - s,
        },
    ];

    while let Some(f) = stack.pop() {
        if f.weight == 0.0 {
            continue;
        }
        if f.t == n {
            acc.entry((f.max - f.min + 1) as u64)
                .or_insert_with(KahanSum::new)
                .add(f.weight);
            continue;
        }
        let tf = f.t as f64;
        let plus = (p * f.n_plus as f64 + q * f.n_minus as f64) / tf;
        let minus = (q * f.n_plus as f64 + p * f.n_minus as f64) / tf;
        let stay = 1.0 - b * (f.n_plus + f.n_minus) as f64 / tf;
        for (di, w) in [(1i64, plus), (-1, minus), (0, stay)] {
            let pos = f.pos + di;
            stack.push(Frame {
                t: f.t + 1,
                n_plus: f.n_plus + u64::from(di == 1),
                n_minus: f.n_minus + u64::from(di == -1),
                pos,
                min: f.min.min(pos),
                max: f.max.max(pos),
                weight: f.weight * w,
            });
        }
    }
    Ok(acc.into_iter().map(|(k, v)| (k, v.value())).collect())
}
