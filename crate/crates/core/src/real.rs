use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Scalar type of the analytic modules: `f32` or `f64`.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy {
    /// Tolerance `tol` at double precision, widened for coarser types.
    fn tol(tol: f64) -> Self {
        let eps = Self::default_epsilon().to_f64().unwrap_or(f64::EPSILON);
        lit(tol.max(eps * 256.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in T")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `(cosh(2r)·e^ls, sinh(2r)·e^ls)` without forming `cosh(2r)` on its own.
pub(crate) fn scaled_cosh_sinh<T: Real>(r: T, log_scale: T) -> (T, T) {
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    if two * r < lit(20.0) {
        let scale = log_scale.exp();
        return ((two * r).cosh() * scale, (two * r).sinh() * scale);
    }
    let up = (two * r + log_scale).exp();
    let down = (log_scale - two * r).exp();
    (half * (up + down), half * (up - down))
}
