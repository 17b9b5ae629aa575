//! Thin libm wrappers plus a few cancellation-free combinations.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn powi(x: f64, k: i32) -> f64 {
    let mut r = 1.0;
    let mut b = if k < 0 { 1.0 / x } else { x };
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            r *= b;
        }
        b *= b;
        e >>= 1;
    }
    r
}
#[inline]
pub fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}
#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}

/// x − ln(1+x) without cancellation for small x.
pub fn x_minus_ln1p(x: f64) -> f64 {
    if x.abs() < 0.05 {
        // alternating series x²/2 − x³/3 + ...
        let mut term = x * x;
        let mut s = 0.0;
        let mut k = 2.0;
        let mut sign = 1.0;
        while k < 40.0 {
            s += sign * term / k;
            term *= x;
            sign = -sign;
            k += 1.0;
        }
        s
    } else {
        x - ln1p(x)
    }
}

/// (1+x)^{-m} − 1 for x ≥ 0 without cancellation.
pub fn pow_m1(x: f64, m: f64) -> f64 {
    expm1(-m * ln1p(x))
}
