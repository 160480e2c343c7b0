use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating-point scalar used by the geometry and dynamics kernels (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Convergence threshold for iterative projections at this precision.
    fn solver_tolerance() -> Self;

    /// Distance at or below which two convex sets are treated as touching.
    fn contact_tolerance() -> Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn solver_tolerance() -> Self {
        1e-8
    }

    fn contact_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn solver_tolerance() -> Self {
        1e-5
    }

    fn contact_tolerance() -> Self {
        1e-5
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Scalar>(theta: T) -> T {
    let pi = T::lit(std::f64::consts::PI);
    let two_pi = pi + pi;
    let mut w = theta % two_pi;
    if w <= -pi {
        w = w + two_pi;
    } else if w > pi {
        w = w - two_pi;
    }
    w
}

pub fn clamp<T: Scalar>(v: T, lo: T, hi: T) -> T {
    v.max(lo).min(hi)
}

/// `sign` with `sign(0) = 0`, matching numpy.
pub fn signum0<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(7.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.3f32) - 0.3).abs() < 1e-7);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(signum0(0.0f64), 0.0);
        assert_eq!(signum0(-2.0f64), -1.0);
        assert_eq!(signum0(1e-30f32), 1.0);
    }
}
