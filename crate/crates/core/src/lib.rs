//! Numerical companion to the Lin-Ni blow-up construction in dimensions 4 and 6:
//! bubble profiles, Neumann Green functions on balls and boxes, the approximate
//! solution W with its residual and kernel elements, reduced energies and their
//! critical points, and a radial shooting solver.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ansatz;
pub mod energy;
pub mod error;
pub mod green;
pub mod mathx;
pub mod profiles;
pub mod quad;
pub mod search;
pub mod shooting;
pub mod special;

pub use error::{Error, Result};

/// Points carry up to six coordinates; only the first `n` are used.
pub type Pt = [f64; 6];

pub const PI: f64 = core::f64::consts::PI;

/// |S^{n-1}|, the area of the unit sphere in R^n.
pub fn sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * libm::pow(PI, half) / libm::tgamma(half)
}

/// c_n = (n-2)|S^{n-1}|, so that 1/(c_n r^{n-2}) is the fundamental solution of -Δ.
pub fn c_n(n: usize) -> f64 {
    (n as f64 - 2.0) * sphere_area(n)
}

pub fn dot(n: usize, a: &Pt, b: &Pt) -> f64 {
    (0..n).map(|i| a[i] * b[i]).sum()
}

pub fn norm(n: usize, a: &Pt) -> f64 {
    libm::sqrt(dot(n, a, a))
}

pub fn dist(n: usize, a: &Pt, b: &Pt) -> f64 {
    libm::sqrt((0..n).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum::<f64>())
}

pub fn sub(a: &Pt, b: &Pt) -> Pt {
    let mut c = [0.0; 6];
    for i in 0..6 {
        c[i] = a[i] - b[i];
    }
    c
}

pub fn scale(s: f64, a: &Pt) -> Pt {
    let mut c = *a;
    for v in c.iter_mut() {
        *v *= s;
    }
    c
}

/// Builds a point from a slice, zero padded.
pub fn pt(xs: &[f64]) -> Pt {
    let mut p = [0.0; 6];
    p[..xs.len()].copy_from_slice(xs);
    p
}
