//! Scalar helpers backed by `libm` so results do not depend on the platform's
//! C math library.

pub use core::f64::consts::{PI, TAU};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn asin(x: f64) -> f64 {
    libm::asin(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Numerically stable `log(sum(exp(x)))`. Returns `-inf` for an empty slice.
pub fn logsumexp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.map(|v| exp(v - max)).sum();
    max + ln(sum)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(mut a: f64) -> f64 {
    while a <= -PI {
        a += TAU;
    }
    while a > PI {
        a -= TAU;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_matches_naive_sum() {
        let xs = [0.1, -2.0, 3.5];
        let naive = ln(xs.iter().map(|&v| exp(v)).sum::<f64>());
        assert!(abs(logsumexp(xs.iter().copied()) - naive) < 1e-14);
    }

    #[test]
    fn logsumexp_survives_large_magnitudes() {
        let xs = [1000.0, 1000.0];
        assert!(abs(logsumexp(xs.iter().copied()) - (1000.0 + ln(2.0))) < 1e-12);
        let ys = [-1e9, 0.0];
        assert_eq!(logsumexp(ys.iter().copied()), 0.0);
    }

    #[test]
    fn wrap_angle_range() {
        assert!(abs(wrap_angle(3.0 * PI) - PI) < 1e-12);
        assert!(abs(wrap_angle(-PI / 2.0 - TAU) + PI / 2.0) < 1e-12);
    }
}
