//! Critical points of the reduced energies: the interior maximizer (Λ*, Q*) for n = 4,
//! the saddle (a*, b*, Q*) for n = 6 and a discrete check of the min-max inequalities.
//! Everything here runs on the truncated models (displayed terms only).

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::ansatz::Sampler;
use crate::energy::{k_eps4_h, k_eps6_ab_f};
use crate::error::{Error, Result};
use crate::green::{DomainSpec, Shape};
use crate::mathx::{exp, ln, sqrt};
use crate::{norm, Pt};

/// Q samples with d(Q,∂Ω) > margin: radii × directions on a ball, a tensor grid on a box.
pub fn q_lattice(domain: &DomainSpec, margin: f64, radial: usize, angular: usize) -> Result<Vec<Pt>> {
    let n = domain.n;
    let mut out = Vec::new();
    match domain.shape {
        Shape::Ball { radius } => {
            let rmax = radius - margin;
            if rmax <= 0.0 {
                return Err(Error::Domain("margin exceeds the ball radius"));
            }
            out.push([0.0; 6]);
            let mut rng = Sampler::new(0x1a77_1ce5);
            let dirs: Vec<Pt> = (0..angular).map(|_| rng.direction(n)).collect();
            for k in 1..radial {
                let r = rmax * k as f64 / radial as f64;
                for d in &dirs {
                    out.push(crate::scale(r, d));
                }
            }
        }
        Shape::Box { lengths } => {
            let per = radial.max(2);
            let mut idx = alloc::vec![0usize; n];
            loop {
                let mut q = [0.0; 6];
                for i in 0..n {
                    let lo = margin;
                    let hi = lengths[i] - margin;
                    if hi <= lo {
                        return Err(Error::Domain("margin exceeds half a box side"));
                    }
                    // cell centers, so no sample touches ∂M_δ
                    q[i] = lo + (hi - lo) * (idx[i] as f64 + 0.5) / per as f64;
                }
                out.push(q);
                let mut i = 0;
                while i < n {
                    idx[i] += 1;
                    if idx[i] < per {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Samples on ∂M_δ = {d(Q,∂Ω) = δ}.
pub fn inner_boundary_samples(domain: &DomainSpec, margin: f64, count: usize) -> Result<Vec<Pt>> {
    let n = domain.n;
    let mut rng = Sampler::new(0xb0_0dd1);
    let mut out = Vec::new();
    match domain.shape {
        Shape::Ball { radius } => {
            for _ in 0..count {
                out.push(crate::scale(radius - margin, &rng.direction(n)));
            }
        }
        Shape::Box { lengths } => {
            for k in 0..count {
                let mut q = [0.0; 6];
                for i in 0..n {
                    q[i] = margin + (lengths[i] - 2.0 * margin) * rng.uniform();
                }
                let face = k % (2 * n);
                let i = face / 2;
                q[i] = if face % 2 == 0 { margin } else { lengths[i] - margin };
                out.push(q);
            }
        }
    }
    Ok(out)
}

/// Relative distance of Q to ∂M_δ, measured against the extent of M_δ.
pub fn interior_margin(domain: &DomainSpec, margin: f64, q: &Pt) -> f64 {
    let n = domain.n;
    match domain.shape {
        Shape::Ball { radius } => (radius - margin - norm(n, q)) / (2.0 * (radius - margin)),
        Shape::Box { lengths } => (0..n)
            .map(|i| {
                let ext = lengths[i] - 2.0 * margin;
                (q[i] - margin).min(lengths[i] - margin - q[i]) / ext
            })
            .fold(f64::INFINITY, f64::min),
    }
}

/// ∇_Q H(Q,Q).
pub fn robin_gradient(domain: &DomainSpec, q: &Pt) -> Result<Pt> {
    let g = domain.h_grad(q, q)?;
    let mut out = [0.0; 6];
    for i in 0..domain.n {
        out[i] = g.dx[i] + g.dq[i];
    }
    Ok(out)
}

fn central_gradient<F: Fn(&Pt) -> Result<f64>>(n: usize, f: &F, q: &Pt, h: f64) -> Result<Pt> {
    let mut g = [0.0; 6];
    for i in 0..n {
        let mut a = *q;
        let mut b = *q;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(&a)? - f(&b)?) / (2.0 * h);
    }
    Ok(g)
}

/// Damped Newton ascent to a local maximum of f from `start`, with a finite-difference
/// Hessian of the supplied gradient. Falls back to a gradient step whenever the Hessian
/// is not negative definite. Returns the point and its gradient norm.
fn newton_ascent<F, G>(n: usize, f: &F, grad: &G, start: &Pt, inside: &dyn Fn(&Pt) -> bool, tol: f64) -> Result<(Pt, f64)>
where
    F: Fn(&Pt) -> Result<f64>,
    G: Fn(&Pt) -> Result<Pt>,
{
    let mut q = *start;
    let mut fq = f(&q)?;
    let h = 1e-4;
    for _ in 0..60 {
        let g = grad(&q)?;
        let gn = norm(n, &g);
        if gn < tol {
            return Ok((q, gn));
        }
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut a = q;
            let mut b = q;
            a[j] += h;
            b[j] -= h;
            let (ga, gb) = (grad(&a)?, grad(&b)?);
            for i in 0..n {
                hess[(i, j)] = (ga[i] - gb[i]) / (2.0 * h);
            }
        }
        let hs = (&hess + hess.transpose()) * 0.5;
        let gv = DVector::from_iterator(n, g.iter().take(n).copied());
        let neg = -hs.clone();
        let step: DVector<f64> = match neg.cholesky() {
            Some(ch) => ch.solve(&gv),
            None => {
                let scale = hs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
                gv / scale
            }
        };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let mut trial = q;
            for i in 0..n {
                trial[i] += t * step[i];
            }
            if inside(&trial) {
                let ft = f(&trial)?;
                if ft >= fq - 1e-15 * fq.abs() {
                    let gt = norm(n, &grad(&trial)?);
                    if ft > fq || gt < gn {
                        q = trial;
                        fq = ft;
                        moved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !moved {
            let g = grad(&q)?;
            let gn = norm(n, &g);
            return if gn < tol * 1e3 { Ok((q, gn)) } else { Err(Error::NoConvergence("Newton ascent stalled")) };
        }
    }
    let gn = norm(n, &grad(&q)?);
    if gn < tol * 1e3 {
        Ok((q, gn))
    } else {
        Err(Error::NoConvergence("Newton ascent iteration limit"))
    }
}

/// Golden-section maximization of a unimodal function on [a, b].
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (sqrt(5.0) - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

// ---------------------------------------------------------------- n = 4

#[derive(Debug, Clone)]
pub struct SearchBox4 {
    pub beta: f64,
    pub delta4: f64,
    pub lattice: Vec<Pt>,
}

impl SearchBox4 {
    pub fn new(domain: &DomainSpec, beta: f64, delta4: f64, radial: usize, angular: usize) -> Result<Self> {
        if domain.n != 4 {
            return Err(Error::Domain("SearchBox4 needs n = 4"));
        }
        if !(beta > 0.0 && beta < 1.0 / 3.0) {
            return Err(Error::Domain("β must lie in (0, 1/3)"));
        }
        let lattice = q_lattice(domain, delta4, radial, angular)?;
        if lattice.iter().any(|q| domain.boundary_distance(q) <= delta4) {
            return Err(Error::Domain("lattice leaves M_δ"));
        }
        Ok(SearchBox4 { beta, delta4, lattice })
    }

    /// [e^{-1/2}ε^β, e^{-1/2}ε^{-β}]
    pub fn lambda_range(&self, eps: f64) -> (f64, f64) {
        let c = exp(-0.5);
        (c * libm::pow(eps, self.beta), c * libm::pow(eps, -self.beta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Max4 {
    pub lambda: f64,
    pub q: Pt,
    pub value: f64,
    pub robin: f64,
    pub gradient_norm: f64,
    /// relative distance of ln Λ* to the ends of the Λ range
    pub lambda_margin: f64,
    /// relative distance of Q* to ∂M_δ
    pub q_margin: f64,
}

/// ∂_Λ K_ε for n = 4 at Robin value h.
pub fn k_eps4_dlambda(lambda: f64, h: f64, eps: f64, domain: &DomainSpec, c1: f64) -> f64 {
    let c4 = domain.cn;
    let r = c1 / -ln(eps);
    0.5 * c4 * lambda * -(ln(lambda) + ln(eps)) * r - 0.25 * c4 * lambda * r - c4 * c4 * lambda / domain.volume
        + c4 * c4 * lambda * h * sqrt(r)
}

/// Stationarity prediction for the n = 4 maximizer at Robin value h:
/// ln(1/Λ) = ½ + 2c₄(−ln ε)/(|Ω|c₁) + ln ε − 2c₄h(−ln ε/c₁)^{1/2};
/// with c₁ = 2c₄/|Ω| this is ln Λ* = −½ + h|Ω|(c₁(−ln ε))^{1/2}.
pub fn lambda_star4(h: f64, eps: f64, domain: &DomainSpec, c1: f64) -> f64 {
    let l = -ln(eps);
    let c4 = domain.cn;
    exp(-(0.5 + 2.0 * c4 * l / (domain.volume * c1) - l - 2.0 * c4 * h * sqrt(l / c1)))
}

/// Maximizer of K_ε over Λ ∈ range at fixed Robin value h: grid in ln Λ, golden section,
/// Newton polish on ∂_ΛK.
pub fn max_over_lambda4(h: f64, eps: f64, domain: &DomainSpec, c1: f64, range: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = (ln(range.0), ln(range.1));
    let k = |t: f64| k_eps4_h(exp(t), h, eps, domain, c1);
    let m = 64;
    let mut best = 0;
    let mut bv = f64::NEG_INFINITY;
    for i in 0..=m {
        let v = k(lo + (hi - lo) * i as f64 / m as f64);
        if v > bv {
            bv = v;
            best = i;
        }
    }
    let step = (hi - lo) / m as f64;
    let a = (lo + step * (best as f64 - 1.0)).max(lo);
    let b = (lo + step * (best as f64 + 1.0)).min(hi);
    let (mut t, _) = golden_max(k, a, b, 1e-9);
    for _ in 0..8 {
        // ∂_t K = Λ ∂_ΛK, ∂_t² K by a central difference of it
        let d = |s: f64| exp(s) * k_eps4_dlambda(exp(s), h, eps, domain, c1);
        let e = 1e-5;
        let d2 = (d(t + e) - d(t - e)) / (2.0 * e);
        if d2 >= 0.0 {
            break;
        }
        let nt = (t - d(t) / d2).clamp(lo, hi);
        if (nt - t).abs() < 1e-15 {
            t = nt;
            break;
        }
        t = nt;
    }
    (exp(t), k(t))
}

/// Interior maximizer of the n = 4 reduced energy. `with_robin = false` drops the Robin
/// term, leaving F_ε(Λ) whose maximizer is e^{-1/2}.
pub fn find_max4(eps: f64, domain: &DomainSpec, bx: &SearchBox4, c1: f64, with_robin: bool) -> Result<Max4> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::Domain("find_max4 needs ε < 0.1"));
    }
    let n = 4;
    let range = bx.lambda_range(eps);
    let (q, h) = if with_robin {
        // K is increasing in H(Q,Q) at every Λ, so Q* maximizes the Robin function
        let mut best = bx.lattice[0];
        let mut hb = f64::NEG_INFINITY;
        for q in &bx.lattice {
            let h = domain.robin(q)?.value;
            if h > hb {
                hb = h;
                best = *q;
            }
        }
        let f = |q: &Pt| Ok(domain.robin(q)?.value);
        let g = |q: &Pt| robin_gradient(domain, q);
        let inside = |q: &Pt| domain.contains(q) && domain.boundary_distance(q) > bx.delta4;
        let (q, _) = newton_ascent(n, &f, &g, &best, &inside, 1e-10)?;
        (q, domain.robin(&q)?.value)
    } else {
        (bx.lattice[0], 0.0)
    };
    let (lambda, value) = max_over_lambda4(h, eps, domain, c1, range);
    let (lo, hi) = (ln(range.0), ln(range.1));
    let lambda_margin = (ln(lambda) - lo).min(hi - ln(lambda)) / (hi - lo);
    let q_margin = interior_margin(domain, bx.delta4, &q);
    let r = c1 / -ln(eps);
    let dl = k_eps4_dlambda(lambda, h, eps, domain, c1);
    let gradient_norm = if with_robin {
        let gq = robin_gradient(domain, &q)?;
        let s = 0.5 * domain.cn * domain.cn * lambda * lambda * sqrt(r);
        sqrt(dl * dl + s * s * gq.iter().take(n).map(|v| v * v).sum::<f64>())
    } else {
        dl.abs()
    };
    if lambda_margin < 0.01 {
        return Err(Error::BoundaryHit { what: "n = 4 maximizer in Λ", margin: lambda_margin });
    }
    if with_robin && q_margin < 0.01 {
        return Err(Error::BoundaryHit { what: "n = 4 maximizer in Q", margin: q_margin });
    }
    Ok(Max4 { lambda, q, value, robin: h, gradient_norm, lambda_margin, q_margin })
}

/// One checked inequality lhs < rhs (or lhs ≤ rhs), with margin rhs − lhs.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    /// violating sample, if any
    pub witness: Option<Pt>,
}

impl Inequality {
    fn less(name: &'static str, lhs: f64, rhs: f64, witness: Option<Pt>) -> Self {
        let pass = lhs < rhs;
        Inequality { name, lhs, rhs, margin: rhs - lhs, pass, witness: if pass { None } else { witness } }
    }
}

#[derive(Debug, Clone)]
pub struct Rejection4 {
    pub maximum: Max4,
    pub inequalities: Vec<Inequality>,
    /// K(ε^{β/2}, p)/ε^β and its limit βc₄²/(4|Ω|)
    pub small_ratio: (f64, f64),
    /// K(Λ_{4,1}, Q*)/ε^{2β} and its limit βc₄²/(2e|Ω|)
    pub lower_ratio: (f64, f64),
}

impl Rejection4 {
    pub fn pass(&self) -> bool {
        self.inequalities.iter().all(|i| i.pass)
    }
}

/// The three boundary-rejection inequalities of the n = 4 reduction (truncated model).
pub fn boundary_rejection4(eps: f64, domain: &DomainSpec, bx: &SearchBox4, c1: f64, boundary_samples: usize) -> Result<Rejection4> {
    let mx = find_max4(eps, domain, bx, c1, true)?;
    let range = bx.lambda_range(eps);
    let mut ineq = Vec::new();
    // (i) interior beats every point of ∂M_δ
    let mut worst = f64::NEG_INFINITY;
    let mut wq = None;
    for q in inner_boundary_samples(domain, bx.delta4, boundary_samples)? {
        let h = domain.robin(&q)?.value;
        let (_, v) = max_over_lambda4(h, eps, domain, c1, range);
        if v > worst {
            worst = v;
            wq = Some(q);
        }
    }
    ineq.push(Inequality::less("max over ∂M_δ < interior max", worst, mx.value, wq));
    // (ii) Λ_{4,2} end: K < 0 < interior max
    let mut all: Vec<Pt> = bx.lattice.clone();
    all.extend(inner_boundary_samples(domain, bx.delta4, boundary_samples)?);
    let hs: Vec<f64> = all.iter().map(|q| domain.robin(q).map(|e| e.value)).collect::<Result<_>>()?;
    let (mut top, mut tq) = (f64::NEG_INFINITY, None);
    for (q, h) in all.iter().zip(&hs) {
        let v = k_eps4_h(range.1, *h, eps, domain, c1);
        if v > top {
            top = v;
            tq = Some(*q);
        }
    }
    ineq.push(Inequality::less("K(Λ_{4,2},Q) < 0", top, 0.0, tq));
    ineq.push(Inequality::less("K(Λ_{4,2},Q) < interior max", top, mx.value, tq));
    // (iii) K(ε^{β/2}, p) > K(Λ_{4,1}, Q) for all Q
    let ls = libm::pow(eps, 0.5 * bx.beta);
    let k_small = k_eps4_h(ls, mx.robin, eps, domain, c1);
    let (mut low, mut lq) = (f64::NEG_INFINITY, None);
    for (q, h) in all.iter().zip(&hs) {
        let v = k_eps4_h(range.0, *h, eps, domain, c1);
        if v > low {
            low = v;
            lq = Some(*q);
        }
    }
    ineq.push(Inequality::less("K(Λ_{4,1},Q) < K(ε^{β/2},p)", low, k_small, lq));
    let c4 = domain.cn;
    let beta = bx.beta;
    let small_ratio = (k_small / libm::pow(eps, beta), beta * c4 * c4 / (4.0 * domain.volume));
    let lower_ratio = (
        k_eps4_h(range.0, mx.robin, eps, domain, c1) / libm::pow(eps, 2.0 * beta),
        beta * c4 * c4 / (2.0 * core::f64::consts::E * domain.volume),
    );
    Ok(Rejection4 { maximum: mx, inequalities: ineq, small_ratio, lower_ratio })
}

// ---------------------------------------------------------------- n = 6

/// Free constants of the min-max construction. C₀ = F(p₀) is computed; C₁, C₂ are
/// given as fractions of C₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consts6 {
    pub eta6: f64,
    pub lambda6: f64,
    pub c1_frac: f64,
    pub c2_frac: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl Default for Consts6 {
    fn default() -> Self {
        Consts6 { eta6: 0.01, lambda6: 0.01, c1_frac: 0.9, c2_frac: 0.8, c3: 5e-4, c4: 1e-3, c5: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct SearchBox6 {
    pub consts: Consts6,
    /// C₀ … C₇
    pub c: [f64; 8],
    pub p0: Pt,
    pub lattice: Vec<Pt>,
    /// lattice spacing (largest gap between neighbouring radii)
    pub spacing: f64,
}

/// max of 8a³ + ab over the disc a² + b² ≤ r²; the only interior critical point is 0.
pub fn disc_max_cubic(r: f64) -> f64 {
    let f = |t: f64| {
        let (a, b) = (r * libm::cos(t), r * libm::sin(t));
        8.0 * a * a * a + a * b
    };
    let m = 720;
    let mut best = 0;
    let mut bv = f64::NEG_INFINITY;
    for i in 0..m {
        let v = f(2.0 * crate::PI * i as f64 / m as f64);
        if v > bv {
            bv = v;
            best = i;
        }
    }
    let h = 2.0 * crate::PI / m as f64;
    golden_max(f, (best as f64 - 1.0) * h, (best as f64 + 1.0) * h, 1e-12).1.max(0.0)
}

fn f_gradient(domain: &DomainSpec, q: &Pt) -> Result<Pt> {
    let f = |x: &Pt| domain.f_landscape(x);
    central_gradient(domain.n, &f, q, 1e-4)
}

impl SearchBox6 {
    /// Builds the lattice, locates p₀ = argmax F and validates the constant inequalities.
    pub fn new(domain: &DomainSpec, consts: Consts6, margin: f64, radial: usize, angular: usize) -> Result<Self> {
        if domain.n != 6 {
            return Err(Error::Domain("SearchBox6 needs n = 6"));
        }
        let k = consts;
        if !(0.0 < k.c3 && k.c3 < k.c4 && k.c4 < k.eta6) {
            return Err(Error::Domain("need 0 < C₃ < C₄ < η₆"));
        }
        if !(k.c3 < k.c5 && k.c5 < k.lambda6) {
            return Err(Error::Domain("need 0 < C₃ < C₅ < Λ₆"));
        }
        if !(24.0 * k.c4 * k.c4 < k.c5) {
            return Err(Error::Domain("need 24C₄² < C₅"));
        }
        if !(0.0 < k.c2_frac && k.c2_frac < k.c1_frac && k.c1_frac < 1.0) {
            return Err(Error::Domain("need C₂ < C₁ < C₀"));
        }
        let lattice = q_lattice(domain, margin, radial, angular)?;
        let spacing = match domain.shape {
            Shape::Ball { radius } => (radius - margin) / radial as f64,
            Shape::Box { lengths } => (0..6).map(|i| lengths[i]).fold(0.0, f64::max) / radial as f64,
        };
        let p0 = argmax_f(domain, &lattice, margin)?.0;
        let c0 = domain.f_landscape(&p0)?;
        if c0 <= 0.0 {
            return Err(Error::Domain("max F must be positive for the level fractions"));
        }
        let c6 = 8.0 * k.c4 * k.c4 * k.c4 + k.c4 * k.c5;
        let c7 = disc_max_cubic(k.c3);
        let c = [c0, k.c1_frac * c0, k.c2_frac * c0, k.c3, k.c4, k.c5, c6, c7];
        // gap: C₀ − C₁ > (C₆ + C₇)|Ω|
        if !(c[0] - c[1] > (c6 + c7) * domain.volume) {
            return Err(Error::Domain("need C₀ − C₁ > (8C₄³ + C₄C₅ + C₇)|Ω|"));
        }
        Ok(SearchBox6 { consts: k, c, p0, lattice, spacing })
    }

    pub fn c6(&self) -> f64 {
        self.c[6]
    }

    pub fn c7(&self) -> f64 {
        self.c[7]
    }
}

/// argmax F over the lattice, refined by Newton ascent from the best few samples.
fn argmax_f(domain: &DomainSpec, lattice: &[Pt], margin: f64) -> Result<(Pt, f64, usize)> {
    let mut vals: Vec<(f64, Pt)> = Vec::with_capacity(lattice.len());
    for q in lattice {
        vals.push((domain.f_landscape(q)?, *q));
    }
    vals.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let f = |q: &Pt| domain.f_landscape(q);
    let g = |q: &Pt| f_gradient(domain, q);
    let inside = |q: &Pt| domain.contains(q) && domain.boundary_distance(q) > margin;
    let mut best: Option<(Pt, f64)> = None;
    let mut converged = 0;
    for (_, q0) in vals.iter().take(4) {
        if let Ok((q, _)) = newton_ascent(domain.n, &f, &g, q0, &inside, 1e-12) {
            converged += 1;
            let v = domain.f_landscape(&q)?;
            if best.map_or(true, |(_, bv)| v > bv) {
                best = Some((q, v));
            }
        }
    }
    match best {
        Some((q, v)) => Ok((q, v, converged)),
        None => Err(Error::NoConvergence("Newton for ∇F = 0 failed from every start")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saddle6 {
    pub a: f64,
    pub b: f64,
    pub q: Pt,
    pub value: f64,
    pub f_value: f64,
    pub gradient_norm: f64,
    pub starts_converged: usize,
}

/// Critical point of K_ε(a,b,Q) = |Ω|/6912 + [F(Q) − (8a³+ab)|Ω|]ε.
pub fn find_saddle6(eps: f64, domain: &DomainSpec, bx: &SearchBox6) -> Result<Saddle6> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::Domain("find_saddle6 needs ε < 0.1"));
    }
    let vol = domain.volume;
    // Newton on ∇_{a,b}(8a³ + ab) = (24a² + b, a) from several starts
    let k = bx.consts;
    let mut ab = None;
    let mut converged = 0;
    for (a0, b0) in [(0.5 * k.c4, 0.5 * k.c5), (-0.5 * k.c4, 0.3 * k.c5), (0.2 * k.c4, -0.7 * k.c5), (-0.9 * k.c4, -0.9 * k.c5)] {
        let (mut a, mut b) = (a0, b0);
        for _ in 0..50 {
            let g = DVector::from_vec(alloc::vec![24.0 * a * a + b, a]);
            if g.norm() < 1e-15 {
                break;
            }
            let j = DMatrix::from_row_slice(2, 2, &[48.0 * a, 1.0, 1.0, 0.0]);
            let Some(s) = j.lu().solve(&g) else { break };
            a -= s[0];
            b -= s[1];
        }
        if (24.0 * a * a + b).abs() < 1e-14 && a.abs() < 1e-14 {
            converged += 1;
            ab = Some((a, b));
        }
    }
    let (a, b) = ab.ok_or(Error::NoConvergence("(a,b) Newton failed from every start"))?;
    let q = bx.p0;
    let fv = domain.f_landscape(&q)?;
    let gq = f_gradient(domain, &q)?;
    let ga = -(24.0 * a * a + b) * vol * eps;
    let gb = -a * vol * eps;
    let gradient_norm = sqrt(ga * ga + gb * gb + eps * eps * gq.iter().map(|v| v * v).sum::<f64>());
    Ok(Saddle6 { a, b, q, value: k_eps6_ab_f(a, b, fv, eps, domain), f_value: fv, gradient_norm, starts_converged: converged })
}

/// Radius r with F(r ê) = level on a ball (F radial and decreasing near the center).
fn level_radius(domain: &DomainSpec, level: f64, rmax: f64) -> Result<f64> {
    let f = |r: f64| domain.f_landscape(&crate::pt(&[r])).map(|v| v - level);
    let (mut lo, mut hi) = (0.0, rmax);
    if f(lo)? <= 0.0 || f(hi)? >= 0.0 {
        return Err(Error::Domain("level set of F is not a sphere inside the margin"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A boundary-fixing deformation φ of B: the shift is scaled by w(Q) = (F(Q) − C₁)/(C₀ − C₁),
/// clamped to [0,1], which vanishes on ∂N_{C₁}.
#[derive(Debug, Clone, Copy)]
pub struct Deformation {
    pub da: f64,
    pub db: f64,
    pub v: Pt,
}

impl Deformation {
    pub fn identity() -> Self {
        Deformation { da: 0.0, db: 0.0, v: [0.0; 6] }
    }

    fn weight(&self, domain: &DomainSpec, bx: &SearchBox6, q: &Pt) -> Result<f64> {
        let f = domain.f_landscape(q)?;
        Ok(((f - bx.c[1]) / (bx.c[0] - bx.c[1])).clamp(0.0, 1.0))
    }

    pub fn apply(&self, domain: &DomainSpec, bx: &SearchBox6, a: f64, b: f64, q: &Pt) -> Result<(f64, f64, Pt)> {
        let w = self.weight(domain, bx, q)?;
        let mut out = *q;
        for i in 0..6 {
            out[i] += w * self.v[i];
        }
        Ok((a + w * self.da, b + w * self.db, out))
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub eps: f64,
    pub inequalities: Vec<Inequality>,
    /// per map: max over B of K(φ(y))
    pub map_maxima: Vec<f64>,
    /// distance from p₀ of the Q at which the identity map attains its max
    pub argmax_offset: f64,
    pub r1: f64,
    pub r2: f64,
}

impl Certificate {
    pub fn pass(&self) -> bool {
        self.inequalities.iter().all(|i| i.pass)
    }
}

/// Discrete min-max certificate on a ball: the lower bound for c holds for the identity and
/// `maps` random deformations, the B₀ values stay below it, and so does ∂N_{C₂}.
pub fn minmax_certificate(eps: f64, domain: &DomainSpec, bx: &SearchBox6, maps: usize, seed: u64) -> Result<Certificate> {
    let radius = match domain.shape {
        Shape::Ball { radius } => radius,
        _ => return Err(Error::Domain("min-max certificate is implemented on balls")),
    };
    if norm(6, &bx.p0) > 1e-6 * radius {
        return Err(Error::Domain("certificate expects p₀ at the ball center"));
    }
    let n = 6;
    let vol = domain.volume;
    let k = bx.consts;
    let base = vol / 6912.0;
    let kab = |a: f64, b: f64, q: &Pt| -> Result<f64> { Ok(k_eps6_ab_f(a, b, domain.f_landscape(q)?, eps, domain)) };
    let r1 = level_radius(domain, bx.c[1], 0.9 * radius)?;
    let r2 = level_radius(domain, bx.c[2], 0.9 * radius)?;
    let lower = base + (bx.c[0] - bx.c6() * vol) * eps;
    let mut rng = Sampler::new(seed);
    let dirs: Vec<Pt> = (0..24).map(|_| rng.direction(n)).collect();
    let mut disc = alloc::vec![(0.0, 0.0)];
    for i in 1..=4 {
        for j in 0..12 {
            let t = 2.0 * crate::PI * j as f64 / 12.0;
            let r = k.c3 * i as f64 / 4.0;
            disc.push((r * libm::cos(t), r * libm::sin(t)));
        }
    }
    let mut qs = alloc::vec![[0.0; 6]];
    for i in 1..=4 {
        for d in &dirs {
            qs.push(crate::scale(r1 * i as f64 / 4.0, d));
        }
    }
    let mut ineq = Vec::new();
    let mut maps_v = alloc::vec![Deformation::identity()];
    for _ in 0..maps {
        let s = 0.3 + 0.6 * rng.uniform();
        let dv = rng.direction(n);
        maps_v.push(Deformation {
            da: (k.c4 - k.c3) * (2.0 * rng.uniform() - 1.0) * 0.9,
            db: (k.c5 - k.c3) * (2.0 * rng.uniform() - 1.0) * 0.9,
            v: crate::scale(s * (r2 - r1), &dv),
        });
    }
    let mut map_maxima = Vec::new();
    let mut argmax_offset = 0.0;
    for (mi, phi) in maps_v.iter().enumerate() {
        let mut best = f64::NEG_INFINITY;
        let mut bq = [0.0; 6];
        let mut in_sigma = true;
        // the topological step: some Q' is sent to p₀; find it along −v
        let mut samples = qs.clone();
        let vn = norm(n, &phi.v);
        if vn > 0.0 {
            let vhat = crate::scale(1.0 / vn, &phi.v);
            let g = |s: f64| -> Result<f64> {
                let q = crate::scale(-s, &vhat);
                Ok(s - phi.weight(domain, bx, &q)? * vn)
            };
            let (mut lo, mut hi) = (0.0, r1);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            samples.push(crate::scale(-0.5 * (lo + hi), &vhat));
        }
        for q in &samples {
            for &(a, b) in &disc {
                let (pa, pb, pq) = phi.apply(domain, bx, a, b, q)?;
                if pa.abs() > k.c4 || pb.abs() > k.c5 || domain.f_landscape(&pq)? <= bx.c[2] {
                    in_sigma = false;
                }
                let v = kab(pa, pb, &pq)?;
                if v > best {
                    best = v;
                    bq = pq;
                }
            }
        }
        if mi == 0 {
            argmax_offset = norm(n, &bq);
        }
        map_maxima.push(best);
        ineq.push(Inequality::less("linking level ≤ max_B K(φ)", lower, best + 1e-300, Some(bq)));
        if !in_sigma {
            ineq.push(Inequality::less("φ(B) ⊂ Σ₀", 1.0, 0.0, None));
        }
    }
    // upper bound on B₀ = disc × ∂N_{C₁}
    let upper_b0 = base + (bx.c[1] + bx.c7() * vol) * eps;
    let (mut top, mut tq) = (f64::NEG_INFINITY, None);
    for d in &dirs {
        let q = crate::scale(r1, d);
        for &(a, b) in &disc {
            let v = kab(a, b, &q)?;
            if v > top {
                top = v;
                tq = Some(q);
            }
        }
    }
    ineq.push(Inequality::less("max_{B₀} K ≤ B₀ bound", top, upper_b0 * (1.0 + 1e-14), tq));
    ineq.push(Inequality::less("B₀ bound < linking level", upper_b0, lower, None));
    // upper bound on ∂N_{C₂} with (a,b) over the whole Σ₀ box
    let upper_c2 = base + (bx.c[2] + bx.c6() * vol) * eps;
    let (mut top2, mut tq2) = (f64::NEG_INFINITY, None);
    for d in &dirs {
        let q = crate::scale(r2, d);
        for i in 0..=8 {
            for j in 0..=8 {
                let a = k.c4 * (i as f64 / 4.0 - 1.0);
                let b = k.c5 * (j as f64 / 4.0 - 1.0);
                let v = kab(a, b, &q)?;
                if v > top2 {
                    top2 = v;
                    tq2 = Some(q);
                }
            }
        }
    }
    ineq.push(Inequality::less("max_{∂N_{C₂}} K ≤ ∂N_{C₂} bound", top2, upper_c2 * (1.0 + 1e-14), tq2));
    ineq.push(Inequality::less("∂N_{C₂} bound < linking level", upper_c2, lower, None));
    // tangential derivatives on the (a,b) faces of Σ₀
    let face_a = k.c4 * vol * eps;
    let face_b = (k.c5 - 24.0 * k.c4 * k.c4) * vol * eps;
    ineq.push(Inequality::less("|∂_b K| > 0 on a = ±C₄", 0.0, face_a, None));
    ineq.push(Inequality::less("|∂_a K| > 0 on b = ±C₅", 0.0, face_b, None));
    Ok(Certificate { eps, inequalities: ineq, map_maxima, argmax_offset, r1, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 2.0, 1e-10);
        // a flat peak pins x only to ~sqrt(machine eps)
        assert!((x - 0.3).abs() < 1e-7 && (v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cubic_disc_max_below_crude_bound() {
        for r in [1e-4, 5e-4, 1e-2, 0.1] {
            let m = disc_max_cubic(r);
            assert!(m > 0.0 && m < 8.0 * r * r * r + r * r);
            // a = b = r/√2 is admissible
            assert!(m >= 8.0 * libm::pow(r / libm::sqrt(2.0), 3.0) + 0.5 * r * r - 1e-18);
        }
    }
}
