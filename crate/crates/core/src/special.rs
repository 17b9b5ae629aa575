//! Gegenbauer polynomials and the regular radial solutions of Δf = f.

use alloc::vec::Vec;

/// Fills `c[l] = C_l^α(t)` and `dc[l] = d/dt C_l^α(t)` for l = 0..=lmax.
pub fn gegenbauer(alpha: f64, lmax: usize, t: f64, c: &mut Vec<f64>, dc: &mut Vec<f64>) {
    c.clear();
    dc.clear();
    c.push(1.0);
    if lmax >= 1 {
        c.push(2.0 * alpha * t);
    }
    for l in 1..lmax {
        let lf = l as f64;
        let next = (2.0 * (lf + alpha) * t * c[l] - (lf + 2.0 * alpha - 1.0) * c[l - 1]) / (lf + 1.0);
        c.push(next);
    }
    // d/dt C_l^α = 2α C_{l-1}^{α+1}
    let a1 = alpha + 1.0;
    dc.push(0.0);
    let mut p0 = 1.0;
    let mut p1 = 2.0 * a1 * t;
    for l in 1..=lmax {
        let v = match l {
            1 => 1.0,
            2 => p1,
            _ => {
                let k = (l - 2) as f64;
                let nx = (2.0 * (k + a1) * t * p1 - (k - 1.0 + 2.0 * a1) * p0) / (k + 1.0);
                p0 = p1;
                p1 = nx;
                nx
            }
        };
        dc.push(2.0 * alpha * v);
    }
}

/// Normalization h_l = ∫_{-1}^{1} (C_l^α)² (1−t²)^{α−1/2} dt.
pub fn gegenbauer_norm(alpha: f64, l: usize) -> f64 {
    let lf = l as f64;
    let lg = libm::lgamma(lf + 2.0 * alpha) - libm::lgamma(lf + 1.0) - 2.0 * libm::lgamma(alpha);
    crate::PI * libm::pow(2.0, 1.0 - 2.0 * alpha) * libm::exp(lg) / (lf + alpha)
}

/// Regular solution of f'' + (n−1)f'/r − l(l+n−2)f/r² = f normalised as f ~ r^l,
/// i.e. r^{1−n/2} I_{l+n/2−1}(r) up to a constant. Returns (f, f', f'').
pub fn screened_radial(n: usize, l: usize, r: f64) -> (f64, f64, f64) {
    let nu1 = l as f64 + n as f64 / 2.0;
    let x = r * r / 4.0;
    let mut a = 1.0;
    let mut s = 1.0;
    let mut sd = l as f64;
    let mut k = 0.0;
    loop {
        k += 1.0;
        a *= x / (k * (k - 1.0 + nu1));
        s += a;
        sd += a * (l as f64 + 2.0 * k);
        if a < 1e-18 * s {
            break;
        }
    }
    let f = libm::pow(r, l as f64) * s;
    let fp = if l == 0 {
        // r^{-1} Σ 2k a_k, finite at 0
        if r == 0.0 {
            0.0
        } else {
            sd / r
        }
    } else if r == 0.0 {
        if l == 1 {
            1.0
        } else {
            0.0
        }
    } else {
        libm::pow(r, l as f64 - 1.0) * sd
    };
    let fpp = if r == 0.0 {
        // from the series: f ≈ r^l (1 + r²/(4·nu1)), so f''(0) is 1/(n) for l = 0
        match l {
            0 => 1.0 / n as f64,
            2 => 2.0,
            _ => 0.0,
        }
    } else {
        let lf = l as f64;
        f * (1.0 + lf * (lf + n as f64 - 2.0) / (r * r)) - (n as f64 - 1.0) * fp / r
    };
    (f, fp, fpp)
}
