//! Scalar abstraction for the exact-moment and asymptotics engines.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the analytic code is generic over: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + core::fmt::Debug + Send + Sync + 'static {
    fn from_f(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }
    fn from_u(n: u64) -> Self {
        Self::from_u64(n).expect("u64 conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
