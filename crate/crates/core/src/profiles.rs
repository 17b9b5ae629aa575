//! Bubbles, the correction profiles Ψ̄ (n=4) and Ψ (n=6), and whole-space bubble integrals.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mathx::{ln, powi, x_minus_ln1p};
use crate::quad::{gk21, integrate, integrate_breaks, integrate_to_inf, GaussRule};
use crate::{sphere_area, Pt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bubble {
    pub n: usize,
    pub lambda: f64,
    pub center: Pt,
}

impl Bubble {
    pub fn new(n: usize, lambda: f64, center: Pt) -> Self {
        Bubble { n, lambda, center }
    }

    fn check(&self, x: &Pt) -> Result<f64> {
        if !(self.lambda > 0.0) {
            return Err(Error::Domain("bubble scale must be positive"));
        }
        let mut d2 = 0.0;
        for i in 0..self.n {
            if !x[i].is_finite() {
                return Err(Error::Domain("non-finite coordinate"));
            }
            d2 += (x[i] - self.center[i]) * (x[i] - self.center[i]);
        }
        Ok(d2)
    }

    /// (Λ/(Λ²+|x−Q|²))^{(n−2)/2}
    pub fn eval(&self, x: &Pt) -> Result<f64> {
        let d2 = self.check(x)?;
        Ok(bubble_d2(self.n, self.lambda, d2))
    }

    /// (∂_Λ U, ∂_Q U).
    pub fn derivs(&self, x: &Pt) -> Result<(f64, Pt)> {
        let d2 = self.check(x)?;
        let l = self.lambda;
        let m = (self.n as f64 - 2.0) / 2.0;
        let u = bubble_d2(self.n, l, d2);
        let s = l * l + d2;
        let dl = m * u * (d2 - l * l) / (l * s);
        let mut dq = [0.0; 6];
        for i in 0..self.n {
            dq[i] = 2.0 * m * u * (x[i] - self.center[i]) / s;
        }
        Ok((dl, dq))
    }
}

#[inline]
pub fn bubble_d2(n: usize, lambda: f64, d2: f64) -> f64 {
    let b = lambda / (lambda * lambda + d2);
    match n {
        4 => b,
        6 => b * b,
        _ => libm::pow(b, (n as f64 - 2.0) / 2.0),
    }
}

/// U_{1,0} as a function of radius.
#[inline]
pub fn unit_bubble(n: usize, r: f64) -> f64 {
    bubble_d2(n, 1.0, r * r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Asymptotics {
    /// Ψ̄(r) + ½ ln r → I
    Log { slope: f64, constant: f64 },
    /// Ψ(r) ~ coef / r²
    InverseSquare { coef: f64 },
}

/// Tabulated radial solution of Ψ'' + (n−1)Ψ'/r + U_{1,0} = 0.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub n: usize,
    pub r: Vec<f64>,
    pub value: Vec<f64>,
    pub deriv: Vec<f64>,
    pub asym: Asymptotics,
    dd: Vec<f64>,
    log_r0: f64,
    log_q: f64,
}

pub const GRID_NODES: usize = 2048;
pub const R_MIN: f64 = 1e-6;
pub const R_MAX: f64 = 1e4;

fn grid() -> Vec<f64> {
    let q = libm::pow(R_MAX / R_MIN, 1.0 / (GRID_NODES - 1) as f64);
    let mut r = Vec::with_capacity(GRID_NODES);
    for i in 0..GRID_NODES {
        r.push(R_MIN * libm::pow(q, i as f64));
    }
    r[GRID_NODES - 1] = R_MAX;
    r
}

/// Closed derivative Ψ̄'(r) = −r^{-3}·½[r² − ln(1+r²)].
pub fn psi_bar_prime(r: f64) -> f64 {
    if r < 1e-3 {
        let r2 = r * r;
        return -r / 4.0 + r * r2 / 6.0 - r * r2 * r2 / 8.0;
    }
    -x_minus_ln1p(r * r) / (2.0 * r * r * r)
}

/// ∫_0^t s⁵(1+s²)^{-2} ds.
pub fn psi6_inner(t: f64) -> f64 {
    let x = t * t;
    if x < 0.05 {
        // ½ Σ_{k≥3} (−1)^{k+1}(1 − 2/k) x^k
        let mut s = 0.0;
        let mut p = x * x * x;
        let mut sign = 1.0;
        for k in 3..40 {
            let kf = k as f64;
            s += sign * (1.0 - 2.0 / kf) * p;
            p *= x;
            sign = -sign;
        }
        return 0.5 * s;
    }
    0.5 * (x - 2.0 * libm::log1p(x) + x / (1.0 + x))
}

/// Ψ'(r) = −r^{-5} ∫_0^r s⁵(1+s²)^{-2} ds.
pub fn psi6_prime(r: f64) -> f64 {
    if r < 1e-3 {
        let r2 = r * r;
        return -r / 6.0 + r * r2 / 4.0;
    }
    -psi6_inner(r) / powi(r, 5)
}

impl RadialProfile {
    /// Value, first and second derivative.
    pub fn eval3(&self, r: f64) -> (f64, f64, f64) {
        let n = self.r.len();
        if r <= self.r[0] {
            return self.series(r);
        }
        if r >= self.r[n - 1] {
            return self.tail(r);
        }
        let mut i = ((ln(r) - self.log_r0) / self.log_q) as usize;
        if i >= n - 1 {
            i = n - 2;
        }
        while i > 0 && self.r[i] > r {
            i -= 1;
        }
        while i + 2 < n && self.r[i + 1] < r {
            i += 1;
        }
        let a = self.r[i];
        let h = self.r[i + 1] - a;
        let t = (r - a) / h;
        let (f0, d0, s0) = (self.value[i], self.deriv[i] * h, self.dd[i] * h * h);
        let (f1, d1, s1) = (self.value[i + 1], self.deriv[i + 1] * h, self.dd[i + 1] * h * h);
        let aa = f1 - (f0 + d0 + 0.5 * s0);
        let bb = d1 - (d0 + s0);
        let cc = s1 - s0;
        let c3 = 10.0 * aa - 4.0 * bb + 0.5 * cc;
        let c4 = -15.0 * aa + 7.0 * bb - cc;
        let c5 = 6.0 * aa - 3.0 * bb + 0.5 * cc;
        let v = f0 + t * (d0 + t * (0.5 * s0 + t * (c3 + t * (c4 + t * c5))));
        // derivative gets its own quintic Hermite: value differences lose digits at small r
        let (g0, m0, k0) = (self.deriv[i], self.dd[i] * h, self.d3(i) * h * h);
        let (g1, m1, k1) = (self.deriv[i + 1], self.dd[i + 1] * h, self.d3(i + 1) * h * h);
        let aa = g1 - (g0 + m0 + 0.5 * k0);
        let bb = m1 - (m0 + k0);
        let cc = k1 - k0;
        let c3 = 10.0 * aa - 4.0 * bb + 0.5 * cc;
        let c4 = -15.0 * aa + 7.0 * bb - cc;
        let c5 = 6.0 * aa - 3.0 * bb + 0.5 * cc;
        let dv = g0 + t * (m0 + t * (0.5 * k0 + t * (c3 + t * (c4 + t * c5))));
        let ddv = -unit_bubble(self.n, r) - (self.n as f64 - 1.0) * dv / r;
        (v, dv, ddv)
    }

    fn d3(&self, i: usize) -> f64 {
        let (r, d, dd) = (self.r[i], self.deriv[i], self.dd[i]);
        let nf = self.n as f64;
        let du = -(nf - 2.0) * r * libm::pow(1.0 + r * r, -nf / 2.0);
        -du - (nf - 1.0) * (dd / r - d / (r * r))
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval3(r).0
    }

    pub fn deriv_at(&self, r: f64) -> f64 {
        self.eval3(r).1
    }

    fn series(&self, r: f64) -> (f64, f64, f64) {
        let r2 = r * r;
        match self.n {
            4 => (1.0 - r2 / 8.0 + r2 * r2 / 24.0, -r / 4.0 + r * r2 / 6.0, -0.25 + r2 / 2.0),
            _ => (0.125 - r2 / 12.0 + r2 * r2 / 16.0, -r / 6.0 + r * r2 / 4.0, -1.0 / 6.0 + 0.75 * r2),
        }
    }

    fn tail(&self, r: f64) -> (f64, f64, f64) {
        let a = self.r[self.r.len() - 1];
        let va = self.value[self.value.len() - 1];
        match self.n {
            4 => {
                // integrate −1/(2s) + ln s/s³ + 1/(2 s⁵)·O(1) from a to r
                let prim = |s: f64| -ln(s) / (2.0 * s * s) - 1.0 / (4.0 * s * s);
                let v = va - 0.5 * ln(r / a) + prim(r) - prim(a);
                let d = psi_bar_prime(r);
                let u = unit_bubble(4, r);
                (v, d, -u - 3.0 * d / r)
            }
            _ => {
                let r2 = r * r;
                let v = 0.25 / r2 - ln(r) / (2.0 * r2 * r2) - 0.25 / (r2 * r2 * r2);
                let d = psi6_prime(r);
                let u = unit_bubble(6, r);
                (v, d, -u - 5.0 * d / r)
            }
        }
    }

    /// Pointwise residual of the radial ODE at node i (finite-difference free: uses the
    /// interpolant's second derivative at the midpoint of the cell).
    pub fn ode_residual(&self, r: f64) -> f64 {
        let (_, d, dd) = self.eval3(r);
        dd + (self.n as f64 - 1.0) * d / r + unit_bubble(self.n, r)
    }

    /// Writes `radius,value,derivative` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.r.iter().zip(&self.value).zip(&self.deriv).map(|((r, v), d)| (*r, *v, *d))
    }
}

fn finish(n: usize, r: Vec<f64>, value: Vec<f64>, deriv: Vec<f64>, asym: Asymptotics) -> RadialProfile {
    let dd = r
        .iter()
        .zip(&deriv)
        .map(|(&ri, &di)| -unit_bubble(n, ri) - (n as f64 - 1.0) * di / ri)
        .collect();
    let log_r0 = ln(r[0]);
    let log_q = (ln(r[r.len() - 1]) - log_r0) / (r.len() - 1) as f64;
    RadialProfile { n, r, value, deriv, asym, dd, log_r0, log_q }
}

/// Ψ̄ with Ψ̄(0) = 1, by cumulative GK quadrature of the closed derivative.
pub fn solve_psi_bar() -> Result<RadialProfile> {
    let r = grid();
    let mut value = Vec::with_capacity(r.len());
    let mut deriv = Vec::with_capacity(r.len());
    let mut f = psi_bar_prime;
    let r0 = r[0];
    let mut acc = 1.0 - r0 * r0 / 8.0 + r0 * r0 * r0 * r0 / 24.0;
    value.push(acc);
    deriv.push(psi_bar_prime(r0));
    for w in r.windows(2) {
        let (v, _) = gk21(&mut f, w[0], w[1]);
        acc += v;
        value.push(acc);
        deriv.push(psi_bar_prime(w[1]));
    }
    let g = |i: usize| value[i] + 0.5 * ln(r[i]);
    // I + (a ln r + b)/r² fitted through three large radii
    let idx = [index_of(&r, 1e2), index_of(&r, 1e3), r.len() - 1];
    let mut m = [[0.0; 4]; 3];
    for (row, &i) in idx.iter().enumerate() {
        let ri = r[i];
        m[row] = [1.0, ln(ri) / (ri * ri), 1.0 / (ri * ri), g(i)];
    }
    let constant = solve3(m);
    let i3 = index_of(&r, 1e3);
    let drift = (g(r.len() - 1) - g(i3)).abs();
    if drift > 1e-4 {
        return Err(Error::Accuracy { what: "psi_bar constant I", estimate: drift });
    }
    Ok(finish(4, r, value, deriv, Asymptotics::Log { slope: -0.5, constant }))
}

/// Ψ decaying at infinity, Ψ(r) = ∫_r^∞ t^{-5} ∫_0^t s⁵(1+s²)^{-2} ds dt.
pub fn solve_psi6() -> Result<RadialProfile> {
    let r = grid();
    let n = r.len();
    let mut value = alloc::vec![0.0; n];
    let mut deriv = alloc::vec![0.0; n];
    let mut f = |t: f64| -psi6_prime(t);
    let rm = r[n - 1];
    let rm2 = rm * rm;
    let mut acc = 0.25 / rm2 - ln(rm) / (2.0 * rm2 * rm2) - 0.25 / (rm2 * rm2 * rm2);
    value[n - 1] = acc;
    deriv[n - 1] = psi6_prime(rm);
    for i in (0..n - 1).rev() {
        let (v, _) = gk21(&mut f, r[i], r[i + 1]);
        acc += v;
        value[i] = acc;
        deriv[i] = psi6_prime(r[i]);
    }
    let i100 = index_of(&r, 100.0);
    let check = value[i100] * 4.0 * r[i100] * r[i100];
    if (check - 1.0).abs() > 1e-3 {
        return Err(Error::Accuracy { what: "psi6 decay", estimate: (check - 1.0).abs() });
    }
    Ok(finish(6, r, value, deriv, Asymptotics::InverseSquare { coef: 0.25 }))
}

/// Ψ(0) by a second, independent rule: Gauss-Legendre on the outer integral in
/// log-radius with the inner integral itself done by adaptive quadrature.
pub fn psi6_origin_crosscheck() -> f64 {
    let gl = GaussRule::new(40);
    let breaks = crate::quad::geometric_breaks(1e-4, 1e5, 4);
    let mut total = 0.0;
    // [0,1e-4]: integrand t^{-5}·t⁶/6 = t/6
    total += 1e-8 / 12.0;
    for w in breaks.windows(2) {
        let (la, lb) = (ln(w[0]), ln(w[1]));
        total += gl.integrate(
            |s| {
                let t = libm::exp(s);
                let inner = integrate(|x| powi(x, 5) / powi(1.0 + x * x, 2), 0.0, t, 1e-300, 1e-14).value;
                inner / powi(t, 5) * t
            },
            la,
            lb,
        );
    }
    // tail beyond 1e5: ∫ 1/(2t³) dt to leading order
    total + 0.25 / 1e10
}

fn index_of(r: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, &ri) in r.iter().enumerate() {
        if (ri - x).abs() < (r[best] - x).abs() {
            best = i;
        }
    }
    best
}

fn solve3(mut m: [[f64; 4]; 3]) -> f64 {
    for c in 0..3 {
        let mut p = c;
        for r in c + 1..3 {
            if m[r][c].abs() > m[p][c].abs() {
                p = r;
            }
        }
        m.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..4 {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    m[0][3] / m[0][0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleIntegrals {
    pub n: usize,
    /// ∫ U_{1,0}^{2n/(n−2)}
    pub critical: f64,
    /// ∫ U_{1,0}^{(n+2)/(n−2)}
    pub source: f64,
    /// ∫ U_{1,0}² (n=6 only)
    pub square: Option<f64>,
    /// ∫ |∇U_{1,0}|²
    pub dirichlet: f64,
}

/// Radial integral |S^{n−1}| ∫_0^∞ f(r) r^{n−1} dr.
pub fn radial_integral<F: FnMut(f64) -> f64>(n: usize, mut f: F) -> f64 {
    let nn = n as i32 - 1;
    let mut g = |r: f64| f(r) * powi(r, nn);
    let breaks = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    let head = integrate_breaks(&mut g, &breaks, 1e-15, 1e-14).value;
    let tail = integrate_to_inf(&mut g, 16.0, 1e-16, 1e-14).value;
    sphere_area(n) * (head + tail)
}

pub fn bubble_integrals(n: usize) -> Result<BubbleIntegrals> {
    if n != 4 && n != 6 {
        return Err(Error::Domain("bubble integrals need n = 4 or 6"));
    }
    let nf = n as f64;
    let p_crit = 2.0 * nf / (nf - 2.0);
    let p_src = (nf + 2.0) / (nf - 2.0);
    let m = (nf - 2.0) / 2.0;
    let critical = radial_integral(n, |r| libm::pow(unit_bubble(n, r), p_crit));
    let source = radial_integral(n, |r| libm::pow(unit_bubble(n, r), p_src));
    let square = if n == 6 { Some(radial_integral(n, |r| powi(unit_bubble(n, r), 2))) } else { None };
    let dirichlet = radial_integral(n, |r| {
        let u = unit_bubble(n, r);
        let du = -2.0 * m * r * u / (1.0 + r * r);
        du * du
    });
    Ok(BubbleIntegrals { n, critical, source, square, dirichlet })
}

/// (γ0, γ1) = (∫|∇∂_Λ U|², ∫|∇∂_{y_1} U|²) at Λ = 1.
pub fn gram_constants(n: usize) -> Result<(f64, f64)> {
    if n != 4 && n != 6 {
        return Err(Error::Domain("gram constants need n = 4 or 6"));
    }
    let nf = n as f64;
    let m = (nf - 2.0) / 2.0;
    let g0 = radial_integral(n, |r| {
        let v = 2.0 * m * r * libm::pow(1.0 + r * r, -m - 2.0) * (m + 2.0 - m * r * r);
        v * v
    });
    let g1 = radial_integral(n, |r| {
        let s = 1.0 + r * r;
        let g = 2.0 * m * r * libm::pow(s, -m - 1.0);
        let gp = 2.0 * m * libm::pow(s, -m - 2.0) * (1.0 - (2.0 * m + 1.0) * r * r);
        gp * gp / nf + if r > 0.0 { g * g * (nf - 1.0) / (nf * r * r) } else { 0.0 }
    });
    Ok((g0, g1))
}

/// ∫ ∇∂_Λ U · ∇∂_{y_1} U over R^n, by explicit (r, θ) quadrature (should vanish).
pub fn gram_cross(n: usize) -> f64 {
    let nf = n as f64;
    let m = (nf - 2.0) / 2.0;
    let gl = GaussRule::new(32);
    // ∂_Λ U = V(r) radial; ∂_{y1} U = g(r) cosθ; ∇V·∇(g cosθ) = V' g' cosθ
    let radial = radial_integral(n, |r| {
        let s = 1.0 + r * r;
        let vp = 2.0 * m * r * libm::pow(s, -m - 2.0) * (m + 2.0 - m * r * r);
        let gp = 2.0 * m * libm::pow(s, -m - 2.0) * (1.0 - (2.0 * m + 1.0) * r * r);
        vp * gp
    }) / sphere_area(n);
    let ang = gl.integrate(|th| libm::cos(th) * powi(libm::sin(th), n as i32 - 2), 0.0, crate::PI);
    radial * ang * sphere_area(n - 1)
}

