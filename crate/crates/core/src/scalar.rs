//! Scalar abstraction for the state and channel algebra.

use nalgebra as na;
use num_traits as nt;

/// Real floating point type the channel algebra is generic over (`f32` or `f64`).
pub trait Real: Copy + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + na::RealField {
    /// Machine epsilon.
    const EPSILON: Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// A validation tolerance: the requested value, floored at a few thousand ulps so the
    /// `f32` instantiation does not reject states it constructed itself.
    fn tolerance(requested: f64) -> Self {
        let floor = Self::EPSILON * Self::lit(4096.0);
        let t = Self::lit(requested);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f32 {
    const EPSILON: Self = f32::EPSILON;
}

impl Real for f64 {
    const EPSILON: Self = f64::EPSILON;
}
