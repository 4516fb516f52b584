//! Thin wrappers around `libm` so the crate stays `no_std`-clean.

pub(crate) const LN_2: f64 = core::f64::consts::LN_2;

#[inline(always)]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline(always)]
pub(crate) fn log1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// log2(1 + x), accurate near zero.
#[inline(always)]
pub(crate) fn log2_1p(x: f64) -> f64 {
    log1p(x) / LN_2
}

/// x^n by repeated squaring; exact sign handling for negative bases.
pub(crate) fn ipow(x: f64, n: u32) -> f64 {
    let mut base = x;
    let mut exp = n;
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}
