//! Scalar float functions routed to `std` intrinsics or `libm`.
//!
//! `core` provides no transcendental methods on `f64`, so every call site in
//! the crate goes through these thin wrappers. With the `std` feature they
//! compile to the usual intrinsics; without it they fall back to `libm`.

#![allow(dead_code)]

macro_rules! unary {
    ($(($name:ident, $std:ident, $libm:ident)),* $(,)?) => {
        $(
            #[inline(always)]
            pub(crate) fn $name(x: f64) -> f64 {
                #[cfg(feature = "std")]
                {
                    f64::$std(x)
                }
                #[cfg(not(feature = "std"))]
                {
                    libm::$libm(x)
                }
            }
        )*
    };
}

unary![
    (abs, abs, fabs),
    (sqrt, sqrt, sqrt),
    (cbrt, cbrt, cbrt),
    (exp, exp, exp),
    (exp_m1, exp_m1, expm1),
    (ln, ln, log),
    (sin, sin, sin),
    (cos, cos, cos),
    (tan, tan, tan),
    (acos, acos, acos),
    (asin, asin, asin),
    (atan, atan, atan),
    (floor, floor, floor),
    (ceil, ceil, ceil),
    (round, round, round),
];

#[inline(always)]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        f64::atan2(y, x)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::atan2(y, x)
    }
}

#[inline(always)]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        f64::hypot(x, y)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::hypot(x, y)
    }
}

#[inline(always)]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        f64::powf(x, y)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::pow(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrappers_match_reference_values() {
        assert_eq!(abs(-2.5), 2.5);
        assert_eq!(sqrt(4.0), 2.0);
        assert!((cos(core::f64::consts::PI) + 1.0).abs() < 1e-15);
        assert!((atan2(1.0, 1.0) - core::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((hypot(3.0, 4.0) - 5.0).abs() < 1e-15);
        assert!((powf(2.0, 10.0) - 1024.0).abs() < 1e-12);
        assert!((exp_m1(0.0)).abs() == 0.0);
    }
}
