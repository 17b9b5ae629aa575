//! Neumann Green function G(x,Q) with ∫_Ω G = 0 and regular part H = K − G on balls
//! and boxes, plus the n = 6 quartic potential ∫_Ω |x−Q|^{-4} and the landscape F.

use crate::error::{Error, Result};
use crate::mathx::{exp, expm1, sqrt};
use crate::quad::{geometric_breaks, integrate, integrate_breaks, integrate_to_inf};
use crate::{c_n, dist, norm, sphere_area, Pt, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Ball { radius: f64 },
    /// [0, L_1] × … × [0, L_n]
    Box { lengths: Pt },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub n: usize,
    pub shape: Shape,
    pub volume: f64,
    pub cn: f64,
}

/// A value with its numerical error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// H(x,Q) with its gradients in both arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HGrad {
    pub h: f64,
    pub dx: Pt,
    pub dq: Pt,
    pub error: f64,
}

/// Largest |Q|/R for which the ball series is trusted.
pub const BALL_MAX_RATIO: f64 = 0.95;
const SERIES_TOL: f64 = 1e-14;

fn check_dim(n: usize) -> Result<()> {
    if n == 4 || n == 6 {
        Ok(())
    } else {
        Err(Error::Domain("dimension must be 4 or 6"))
    }
}

impl DomainSpec {
    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        check_dim(n)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain("ball radius must be positive"));
        }
        let volume = libm::pow(radius, n as f64) * sphere_area(n) / n as f64;
        Ok(DomainSpec { n, shape: Shape::Ball { radius }, volume, cn: c_n(n) })
    }

    pub fn cuboid(n: usize, lengths: &[f64]) -> Result<Self> {
        check_dim(n)?;
        if lengths.len() != n || lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Domain("box needs n positive edge lengths"));
        }
        let mut l = [0.0; 6];
        l[..n].copy_from_slice(lengths);
        let volume = lengths.iter().product();
        Ok(DomainSpec { n, shape: Shape::Box { lengths: l }, volume, cn: c_n(n) })
    }

    pub fn unit_ball(n: usize) -> Result<Self> {
        Self::ball(n, 1.0)
    }

    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::cuboid(n, &[1.0; 6][..n])
    }

    pub fn center(&self) -> Pt {
        match self.shape {
            Shape::Ball { .. } => [0.0; 6],
            Shape::Box { lengths } => {
                let mut c = [0.0; 6];
                for i in 0..self.n {
                    c[i] = 0.5 * lengths[i];
                }
                c
            }
        }
    }

    /// Signed distance to ∂Ω, positive inside.
    pub fn boundary_distance(&self, x: &Pt) -> f64 {
        match self.shape {
            Shape::Ball { radius } => radius - norm(self.n, x),
            Shape::Box { lengths } => (0..self.n)
                .map(|i| x[i].min(lengths[i] - x[i]))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, x: &Pt) -> bool {
        self.boundary_distance(x) > 0.0
    }

    /// Smallest box edge, or the diameter for a ball; sets length scales for steps.
    pub fn length_scale(&self) -> f64 {
        match self.shape {
            Shape::Ball { radius } => 2.0 * radius,
            Shape::Box { lengths } => lengths[..self.n].iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    fn check_point(&self, x: &Pt, what: &'static str) -> Result<()> {
        if x[..self.n].iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(what));
        }
        Ok(())
    }

    fn check_source(&self, q: &Pt) -> Result<()> {
        self.check_point(q, "non-finite source point")?;
        if !self.contains(q) {
            return Err(Error::Domain("source point must lie inside the domain"));
        }
        if let Shape::Ball { radius } = self.shape {
            let ratio = norm(self.n, q) / radius;
            if ratio > BALL_MAX_RATIO {
                return Err(Error::Accuracy { what: "ball series near the boundary", estimate: ratio });
            }
        }
        Ok(())
    }

    /// K(r) = 1/(c_n r^{n−2}).
    pub fn fundamental(&self, r: f64) -> f64 {
        1.0 / (self.cn * libm::pow(r, self.n as f64 - 2.0))
    }

    pub fn h(&self, x: &Pt, q: &Pt) -> Result<f64> {
        Ok(self.h_est(x, q)?.value)
    }

    pub fn h_est(&self, x: &Pt, q: &Pt) -> Result<Estimate> {
        self.check_source(q)?;
        self.check_point(x, "non-finite evaluation point")?;
        match self.shape {
            Shape::Ball { radius } => {
                let g = ball_series(self, radius, x, q, false)?;
                Ok(Estimate { value: g.h, error: g.error })
            }
            Shape::Box { lengths } => box_h(self, &lengths, x, q),
        }
    }

    pub fn h_grad(&self, x: &Pt, q: &Pt) -> Result<HGrad> {
        self.check_source(q)?;
        self.check_point(x, "non-finite evaluation point")?;
        match self.shape {
            Shape::Ball { radius } => ball_series(self, radius, x, q, true),
            Shape::Box { lengths } => {
                // central differences; the heat-kernel form is smooth in both arguments
                let base = box_h(self, &lengths, x, q)?;
                let step = 1e-4 * self.length_scale();
                let mut dx = [0.0; 6];
                let mut dq = [0.0; 6];
                let mut err = base.error;
                for i in 0..self.n {
                    let mut xp = *x;
                    let mut xm = *x;
                    xp[i] += step;
                    xm[i] -= step;
                    let (a, b) = (box_h(self, &lengths, &xp, q)?, box_h(self, &lengths, &xm, q)?);
                    dx[i] = (a.value - b.value) / (2.0 * step);
                    let mut qp = *q;
                    let mut qm = *q;
                    qp[i] += step;
                    qm[i] -= step;
                    let (c, d) = (box_h(self, &lengths, x, &qp)?, box_h(self, &lengths, x, &qm)?);
                    dq[i] = (c.value - d.value) / (2.0 * step);
                    err = err.max((a.error + b.error + c.error + d.error) / step);
                }
                Ok(HGrad { h: base.value, dx, dq, error: err })
            }
        }
    }

    /// G(x,Q) = K(|x−Q|) − H(x,Q).
    pub fn g(&self, x: &Pt, q: &Pt) -> Result<f64> {
        let r = dist(self.n, x, q);
        if r == 0.0 {
            return Err(Error::Domain("G is singular at x = Q"));
        }
        Ok(self.fundamental(r) - self.h(x, q)?)
    }

    pub fn robin(&self, q: &Pt) -> Result<Estimate> {
        self.h_est(q, q)
    }

    /// ∫_Ω |x−Q|^{-4} dx (n = 6).
    pub fn quartic_potential(&self, q: &Pt) -> Result<f64> {
        if self.n != 6 {
            return Err(Error::Domain("quartic potential diverges unless n = 6"));
        }
        self.check_point(q, "non-finite source point")?;
        if !self.contains(q) {
            return Err(Error::Domain("source point must lie inside the domain"));
        }
        match self.shape {
            Shape::Ball { radius } => {
                // polar coordinates about Q, axis along Q̂: ∫ρ(t)²/2 |S⁴|(1−t²)^{3/2} dt
                let qn = norm(6, q);
                let s4 = sphere_area(5);
                let f = |t: f64| {
                    let w = 1.0 - t * t;
                    let rho = -qn * t + sqrt(radius * radius - qn * qn * w);
                    0.5 * rho * rho * w * sqrt(w)
                };
                Ok(s4 * integrate(f, -1.0, 1.0, 1e-15, 1e-13).value)
            }
            Shape::Box { lengths } => {
                // 1/a² = ∫ s e^{-sa} ds turns the box integral into a product of erfs
                let f = |u: f64| {
                    let s = exp(u);
                    let rs = sqrt(s);
                    let mut prod = s * s;
                    for i in 0..6 {
                        let e = libm::erf(rs * (lengths[i] - q[i])) + libm::erf(rs * q[i]);
                        prod *= 0.5 * sqrt(PI) / rs * e;
                    }
                    prod
                };
                let lo = -2.0 * libm::log(self.volume.max(1e-300)) / 6.0 - 40.0;
                let dmin = self.boundary_distance(q);
                let hi = -2.0 * libm::log(dmin) + 45.0;
                let breaks: alloc::vec::Vec<f64> =
                    (0..=60).map(|k| lo + (hi - lo) * k as f64 / 60.0).collect();
                Ok(integrate_breaks(f, &breaks, 1e-14, 1e-13).value)
            }
        }
    }

    /// F(Q) = (|Ω|/18432)(|Ω| H(Q,Q) + (1/c₆)∫_Ω |x−Q|^{-4}).
    pub fn f_landscape(&self, q: &Pt) -> Result<f64> {
        if self.n != 6 {
            return Err(Error::Domain("F is defined for n = 6"));
        }
        let h = self.robin(q)?.value;
        let i = self.quartic_potential(q)?;
        Ok(self.volume / 18432.0 * (self.volume * h + i / self.cn))
    }
}

/// A Green function bound to one source point.
#[derive(Debug, Clone, Copy)]
pub struct GreenField {
    pub domain: DomainSpec,
    pub q: Pt,
    pub robin: Estimate,
}

impl GreenField {
    pub fn new(domain: DomainSpec, q: Pt) -> Result<Self> {
        let robin = domain.robin(&q)?;
        Ok(GreenField { domain, q, robin })
    }

    pub fn g(&self, x: &Pt) -> Result<f64> {
        self.domain.g(x, &self.q)
    }

    pub fn h(&self, x: &Pt) -> Result<f64> {
        self.domain.h(x, &self.q)
    }

    pub fn grad_h(&self, x: &Pt) -> Result<Pt> {
        Ok(self.domain.h_grad(x, &self.q)?.dx)
    }
}

pub fn green_ball(n: usize, radius: f64, q: Pt) -> Result<GreenField> {
    GreenField::new(DomainSpec::ball(n, radius)?, q)
}

pub fn green_box(n: usize, lengths: &[f64], q: Pt) -> Result<GreenField> {
    GreenField::new(DomainSpec::cuboid(n, lengths)?, q)
}

/// C_l^α(1) = binom(l+2α−1, l) for α ∈ {1, 2}.
fn gegenbauer_at_one(alpha: f64, l: f64) -> f64 {
    if alpha == 1.0 {
        l + 1.0
    } else {
        (l + 1.0) * (l + 2.0) * (l + 3.0) / 6.0
    }
}

/// H = P(x) + b₀(|Q|) + Σ_{l≥1} a_l (|x||Q|/R²)^l C_l^α(t), P = −|x|²/(2n|Ω|).
fn ball_series(d: &DomainSpec, radius: f64, x: &Pt, q: &Pt, grad: bool) -> Result<HGrad> {
    let n = d.n;
    let nf = n as f64;
    let alpha = 0.5 * (nf - 2.0);
    let r = norm(n, x);
    let qn = norm(n, q);
    let r2 = radius * radius;
    let s = r * qn / r2;
    if s > BALL_MAX_RATIO {
        return Err(Error::Accuracy { what: "ball series ratio", estimate: s });
    }
    // unit directions; a degenerate one may be chosen freely since it cancels
    let mut xh = [0.0; 6];
    let mut qh = [0.0; 6];
    match (r > 0.0, qn > 0.0) {
        (true, true) => {
            for i in 0..n {
                xh[i] = x[i] / r;
                qh[i] = q[i] / qn;
            }
        }
        (true, false) => {
            for i in 0..n {
                xh[i] = x[i] / r;
            }
            qh = xh;
        }
        (false, true) => {
            for i in 0..n {
                qh[i] = q[i] / qn;
            }
            xh = qh;
        }
        (false, false) => {
            xh[0] = 1.0;
            qh[0] = 1.0;
        }
    }
    let t = crate::dot(n, &xh, &qh).clamp(-1.0, 1.0);
    let scale = 1.0 / (d.cn * libm::pow(radius, nf - 2.0));
    let vol = d.volume;

    let b0 = (r2 / (2.0 * (nf - 2.0)) + r2 / (2.0 * (nf + 2.0)) - qn * qn / (2.0 * nf)) / vol;
    let mut h = -r * r / (2.0 * nf * vol) + b0;

    // S = Σ c_l s^l C_l, with c_l = −(1 + (n−2)/l)·scale
    // ∇_x S = (|Q|/R²) Σ c_l s^{l−1}[l C_l x̂ + C_l'(Q̂ − t x̂)] and symmetrically for Q
    let mut sum = 0.0;
    let mut ax = 0.0; // coefficient of x̂ in ∇_x S (without |Q|/R²)
    let mut bx = 0.0; // coefficient of Q̂
    let mut aq = 0.0; // coefficient of Q̂ in ∇_Q S
    let mut bq = 0.0; // coefficient of x̂
    let (mut c0, mut c1) = (1.0, 2.0 * alpha * t);
    let a1 = alpha + 1.0;
    let (mut d0, mut d1) = (0.0, 1.0); // C_{l−2}^{α+1}, C_{l−1}^{α+1}
    let mut sp = 1.0; // s^{l−1}
    let mut tail = 0.0;
    let mut l = 1usize;
    loop {
        let lf = l as f64;
        let (cl, dcl) = (c1, 2.0 * alpha * d1);
        let coef = -(1.0 + (nf - 2.0) / lf) * scale;
        sum += coef * sp * s * cl;
        if grad {
            let w = coef * sp;
            ax += w * (lf * cl - t * dcl);
            bx += w * dcl;
            aq += w * (lf * cl - t * dcl);
            bq += w * dcl;
        }
        // tail bound for degrees > l, including one power of l for the gradient
        let ratio = s * gegenbauer_at_one(alpha, lf + 1.0) / gegenbauer_at_one(alpha, lf) * (lf + 1.0) / lf;
        let bound = scale * (1.0 + (nf - 2.0) / lf) * sp * s * gegenbauer_at_one(alpha, lf) * (lf + 1.0);
        if ratio < 1.0 {
            tail = bound * ratio / (1.0 - ratio);
            if tail < SERIES_TOL * scale || sp * s == 0.0 {
                break;
            }
        }
        if l > 5000 {
            return Err(Error::Accuracy { what: "ball series truncation", estimate: tail });
        }
        // advance C_l^α and C_{l−1}^{α+1}
        let c2 = (2.0 * (lf + alpha) * t * c1 - (lf + 2.0 * alpha - 1.0) * c0) / (lf + 1.0);
        c0 = c1;
        c1 = c2;
        let d2 = if l == 1 {
            2.0 * a1 * t
        } else {
            let k = lf - 2.0;
            (2.0 * (k + 1.0 + a1) * t * d1 - (k + 2.0 * a1) * d0) / (k + 2.0)
        };
        d0 = d1;
        d1 = d2;
        sp *= s;
        l += 1;
    }
    h += sum;
    let mut dx = [0.0; 6];
    let mut dq = [0.0; 6];
    if grad {
        let fx = qn / r2;
        let fq = r / r2;
        for i in 0..n {
            dx[i] = -x[i] / (nf * vol) + fx * (ax * xh[i] + bx * qh[i]);
            dq[i] = -q[i] / (nf * vol) + fq * (aq * qh[i] + bq * xh[i]);
        }
    }
    Ok(HGrad { h, dx, dq, error: tail })
}

/// (1/c_n) r^{2−n} P(n/2−1, r²/4τ), the part of K carried by times t > τ.
fn kernel_late(n: usize, cn: f64, r: f64, tau: f64) -> f64 {
    let m = n / 2 - 1;
    let x = r * r / (4.0 * tau);
    if x < 0.5 {
        // P(m,x)/x^m = Σ (−x)^k / (k!(m+k)Γ(m)), and Γ(m) = 1 for m ∈ {1,2}
        let mut term = 1.0;
        let mut s = 0.0;
        for k in 0..30 {
            s += term / (m + k) as f64;
            term *= -x / (k + 1) as f64;
        }
        return s / (cn * libm::pow(4.0 * tau, m as f64));
    }
    let p = match m {
        1 => -expm1(-x),
        _ => 1.0 - (1.0 + x) * exp(-x),
    };
    p / (cn * libm::pow(r, 2.0 * m as f64))
}

#[inline]
fn gauss1(z: f64, t: f64) -> f64 {
    exp(-z * z / (4.0 * t)) / sqrt(4.0 * PI * t)
}

/// Direct free-space Gaussian and the sum of all Neumann images on [0, L].
fn images(x: f64, y: f64, len: f64, t: f64) -> (f64, f64) {
    let direct = gauss1(x - y, t);
    let mut rest = 0.0;
    for m in -3i32..=3 {
        let shift = 2.0 * m as f64 * len;
        if m != 0 {
            rest += gauss1(x - y - shift, t);
        }
        rest += gauss1(x + y - shift, t);
    }
    (direct, rest)
}

/// L·p(x,y,t) − 1 from the cosine expansion.
fn cosine_excess(x: f64, y: f64, len: f64, t: f64) -> f64 {
    let mut s = 0.0;
    let w = PI / len;
    let mut k = 1.0;
    loop {
        let decay = exp(-k * k * w * w * t);
        if decay < 1e-18 {
            break;
        }
        s += 2.0 * libm::cos(k * w * x) * libm::cos(k * w * y) * decay;
        k += 1.0;
    }
    s
}

/// H = ∫_0^∞ (Φ_t − p_t + 1/|Ω|) dt split at τ: images before, cosine modes after.
fn box_h(d: &DomainSpec, lengths: &Pt, x: &Pt, q: &Pt) -> Result<Estimate> {
    let n = d.n;
    let lmin = d.length_scale();
    let tau = 0.1 * lmin * lmin;
    let r = dist(n, x, q);
    let early_val = kernel_late(n, d.cn, r, tau);
    // p − Φ by D_k = D_{k−1}(g_k + r_k) + G_{k−1} r_k
    let early = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let mut dd = 0.0;
        let mut gg = 1.0;
        for i in 0..n {
            let (g, rr) = images(x[i], q[i], lengths[i], t);
            dd = dd * (g + rr) + gg * rr;
            gg *= g;
        }
        dd
    };
    let breaks = {
        let mut b = alloc::vec![0.0];
        b.extend(geometric_breaks(tau * 1e-6, tau, 2));
        b
    };
    let e = integrate_breaks(early, &breaks, 1e-15, 1e-13);
    let lmax = lengths[..n].iter().cloned().fold(0.0, f64::max);
    let tscale = lmax * lmax / (PI * PI);
    let late = |u: f64| {
        let t = tau + u * tscale;
        let mut ex = 0.0;
        for i in 0..n {
            let a = cosine_excess(x[i], q[i], lengths[i], t);
            ex = ex * (1.0 + a) + a;
        }
        ex * tscale / d.volume
    };
    let l = integrate_to_inf(late, 0.0, 1e-15, 1e-13);
    let err = e.error + l.error;
    if err > 1e-8 {
        return Err(Error::Accuracy { what: "box heat-kernel splitting", estimate: err });
    }
    Ok(Estimate { value: early_val - e.value - l.value + tau / d.volume, error: err })
}
