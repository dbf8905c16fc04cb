//! f64 transcendentals from std when available, libm (via num-traits) otherwise.

#![allow(dead_code)]

#[cfg(feature = "std")]
pub(crate) fn ln(x: f64) -> f64 {
    x.ln()
}

#[cfg(feature = "std")]
pub(crate) fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(feature = "std")]
pub(crate) fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(feature = "std")]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    x.powi(n)
}

#[cfg(feature = "std")]
pub(crate) fn round(x: f64) -> f64 {
    x.round()
}

#[cfg(feature = "std")]
pub(crate) fn ln_1p(x: f64) -> f64 {
    x.ln_1p()
}

#[cfg(feature = "std")]
pub(crate) fn exp_m1(x: f64) -> f64 {
    x.exp_m1()
}

#[cfg(not(feature = "std"))]
pub(crate) fn ln(x: f64) -> f64 {
    num_traits::Float::ln(x)
}

#[cfg(not(feature = "std"))]
pub(crate) fn exp(x: f64) -> f64 {
    num_traits::Float::exp(x)
}

#[cfg(not(feature = "std"))]
pub(crate) fn sqrt(x: f64) -> f64 {
    num_traits::Float::sqrt(x)
}

#[cfg(not(feature = "std"))]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    num_traits::Float::powi(x, n)
}

#[cfg(not(feature = "std"))]
pub(crate) fn round(x: f64) -> f64 {
    num_traits::Float::round(x)
}

#[cfg(not(feature = "std"))]
pub(crate) fn ln_1p(x: f64) -> f64 {
    num_traits::Float::ln_1p(x)
}

#[cfg(not(feature = "std"))]
pub(crate) fn exp_m1(x: f64) -> f64 {
    num_traits::Float::exp_m1(x)
}
