//! The energy J_ε[W] by quadrature, its closed-form expansions, the reduced
//! functionals K_ε and the term-by-term bookkeeping of the expansion.

use alloc::vec::Vec;

use crate::ansatz::{AnsatzField, BlowupParams, FieldSample};
use crate::error::{Error, Result};
use crate::green::{DomainSpec, Shape};
use crate::mathx::{ln, powi, sqrt};
use crate::profiles::bubble_d2;
use crate::quad::{gauss_legendre, integrate_to_inf, GaussRule};
use crate::{norm, sphere_area, Pt, PI};

/// 2∫_{R⁴}U⁴ = π²/3 (n=4) and 4∫_{R⁶}U³ = π³/15 (n=6).
pub fn leading_constant(n: usize) -> Result<f64> {
    match n {
        4 => Ok(PI * PI / 3.0),
        6 => Ok(powi(PI, 3) / 15.0),
        _ => Err(Error::Domain("energy needs n = 4 or 6")),
    }
}

/// ∫_{R^n} U^{2n/(n−2)}: π²/6 and π³/60.
fn critical_integral(n: usize) -> f64 {
    if n == 4 {
        PI * PI / 6.0
    } else {
        powi(PI, 3) / 60.0
    }
}

/// (n−2)²/2 and n(n−2).
fn coefficients(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (0.5 * (nf - 2.0) * (nf - 2.0), nf * (nf - 2.0))
}

/// One quadrature node in Ω_ε.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub z: Pt,
    pub w: f64,
}

/// Integrals of the field pieces over Ω_ε.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    /// ∫∇U·∇V (gradient form only)
    pub grad_uv: f64,
    /// ∫|∇V|² (gradient form only)
    pub grad_vv: f64,
    pub w2: f64,
    /// ∫(|W|^{2n/(n−2)} − U^{2n/(n−2)})
    pub crit_diff: f64,
    /// ∫U^p V with V = W − U
    pub upv: f64,
    /// ∫D W with D = −ΔW + με²W − n(n−2)U^p
    pub dw: f64,
    pub uhat_w: f64,
    /// ∫Δ(Rχ) W
    pub lap_w: f64,
    pub w1: f64,
    /// ∫_{Ω_ε} U^{2n/(n−2)} (diagnostic)
    pub u_crit: f64,
}

impl Moments {
    fn add(&mut self, o: &Moments, s: f64) {
        self.grad_uv += s * o.grad_uv;
        self.grad_vv += s * o.grad_vv;
        self.w2 += s * o.w2;
        self.crit_diff += s * o.crit_diff;
        self.upv += s * o.upv;
        self.dw += s * o.dw;
        self.uhat_w += s * o.uhat_w;
        self.lap_w += s * o.lap_w;
        self.w1 += s * o.w1;
        self.u_crit += s * o.u_crit;
    }

    fn max_abs_diff(&self, o: &Moments) -> Moments {
        let d = |a: f64, b: f64| (a - b).abs();
        Moments {
            grad_uv: d(self.grad_uv, o.grad_uv),
            grad_vv: d(self.grad_vv, o.grad_vv),
            w2: d(self.w2, o.w2),
            crit_diff: d(self.crit_diff, o.crit_diff),
            upv: d(self.upv, o.upv),
            dw: d(self.dw, o.dw),
            uhat_w: d(self.uhat_w, o.uhat_w),
            lap_w: d(self.lap_w, o.lap_w),
            w1: d(self.w1, o.w1),
            u_crit: d(self.u_crit, o.u_crit),
        }
    }
}

/// Pointwise integrands at one sample.
fn local(field: &AnsatzField, z: &Pt, s: &FieldSample) -> Moments {
    let p = &field.params;
    let n = p.n;
    let nf = n as f64;
    let m = 0.5 * (nf - 2.0);
    let (_, k) = coefficients(n);
    let pe = field.exponent();
    let me2 = p.mu * p.eps * p.eps;
    let qb = p.qbar();
    let mut d2 = 0.0;
    for i in 0..n {
        d2 += (z[i] - qb[i]) * (z[i] - qb[i]);
    }
    let u = s.u;
    let v = me2 * s.uhat + s.tail;
    let w = s.w;
    // ∇U = −2mU(z − Q̄)/(Λ² + |z − Q̄|²)
    let f = -2.0 * m * u / (p.lambda * p.lambda + d2);
    let mut guv = 0.0;
    let mut gvv = 0.0;
    for i in 0..n {
        guv += f * (z[i] - qb[i]) * s.grad_v[i];
        gvv += s.grad_v[i] * s.grad_v[i];
    }
    let crit_diff = if w >= 0.0 {
        if n == 4 {
            v * (4.0 * u * u * u + v * (6.0 * u * u + v * (4.0 * u + v)))
        } else {
            v * (3.0 * u * u + v * (3.0 * u + v))
        }
    } else {
        powi(w.abs(), 2 * n as i32 / (n as i32 - 2)) - libm::pow(u, pe + 1.0)
    };
    let up = libm::pow(u, pe);
    let dpart = s.rhs - k * up;
    Moments {
        grad_uv: guv,
        grad_vv: gvv,
        w2: w * w,
        crit_diff,
        upv: up * v,
        dw: dpart * w,
        uhat_w: s.uhat * w,
        lap_w: s.lap_rchi * w,
        w1: w,
        u_crit: up * u,
    }
}

fn ball_radius(domain: &DomainSpec) -> Result<f64> {
    match domain.shape {
        Shape::Ball { radius } => Ok(radius),
        _ => Err(Error::Domain("energy quadrature is implemented on balls")),
    }
}

/// True when Q sits at the ball center, so every piece of W is radial.
pub fn is_radial(field: &AnsatzField) -> bool {
    match field.domain.shape {
        Shape::Ball { radius } => norm(field.params.n, &field.params.q) <= 1e-14 * radius,
        _ => false,
    }
}

/// Radial nodes along a ray from Q̄ = 0, weights carrying |S^{n−1}| r^{n−1}.
/// Break points at the cutoff plateaus keep every panel smooth.
pub fn radial_nodes(field: &AnsatzField, per_decade: usize, order: usize) -> Result<Vec<Node>> {
    if !is_radial(field) {
        return Err(Error::Domain("radial energy path needs Q at the ball center"));
    }
    let radius = ball_radius(&field.domain)?;
    let p = &field.params;
    let n = p.n;
    let rho = radius / p.eps;
    let (inner, outer) = (rho - 0.5 * p.delta / p.eps, rho - 0.25 * p.delta / p.eps);
    let r0 = 1e-4 * p.lambda;
    let mut breaks = Vec::new();
    breaks.push(0.0);
    let decades = libm::log10(inner / r0);
    let k = (libm::ceil(decades * per_decade as f64) as usize).max(1);
    for j in 0..=k {
        breaks.push(r0 * libm::pow(inner / r0, j as f64 / k as f64));
    }
    for j in 1..=4 {
        breaks.push(inner + (outer - inner) * j as f64 / 4.0);
    }
    for j in 1..=4 {
        breaks.push(outer + (rho - outer) * j as f64 / 4.0);
    }
    let rule = GaussRule::new(order);
    let area = sphere_area(n);
    let mut out = Vec::new();
    for wdw in breaks.windows(2) {
        for (r, w) in rule.mapped(wdw[0], wdw[1]) {
            let mut z = [0.0; 6];
            z[0] = r;
            out.push(Node { z, w: w * area * powi(r, n as i32 - 1) });
        }
    }
    Ok(out)
}

/// Axisymmetric nodes for an off-center Q on a ball.
pub fn axisym_nodes(field: &AnsatzField, fine: bool) -> Result<Vec<Node>> {
    let (nt, pd, fp) = if fine { (48, 12, 24) } else { (32, 8, 16) };
    Ok(field.axisym_nodes(nt, pd, fp)?.into_iter().map(|(z, w, _)| Node { z, w }).collect())
}

pub fn moments(field: &AnsatzField, nodes: &[Node]) -> Result<Moments> {
    let mut acc = Moments::default();
    for nd in nodes {
        let s = field.eval(&nd.z)?;
        acc.add(&local(field, &nd.z, &s), nd.w);
    }
    Ok(acc)
}

/// ∫ over R^n ∖ Ω_ε of f(|z − Q̄|), for a ball.
fn exterior<F: Fn(f64) -> f64>(field: &AnsatzField, f: F) -> Result<f64> {
    let radius = ball_radius(&field.domain)?;
    let p = &field.params;
    let n = p.n;
    let eps = p.eps;
    let radial = |rho: f64| {
        integrate_to_inf(|r| f(r) * powi(r, n as i32 - 1), rho, 0.0, 1e-14).value
    };
    let qn = norm(n, &p.q);
    if qn <= 1e-14 * radius {
        return Ok(sphere_area(n) * radial(radius / eps));
    }
    let (tx, tw) = gauss_legendre(64);
    let mut acc = 0.0;
    for (t, w) in tx.iter().zip(&tw) {
        let th = 0.5 * PI * (t + 1.0);
        let (ct, st) = (libm::cos(th), libm::sin(th));
        let rho = (-qn * ct + sqrt(radius * radius - qn * qn * st * st)) / eps;
        acc += w * 0.5 * PI * powi(st, n as i32 - 2) * radial(rho);
    }
    Ok(sphere_area(n - 1) * acc)
}

/// Exterior pieces of the pure bubble: (∫U^{2n/(n−2)}, ∫|∇U|²) outside Ω_ε.
fn bubble_exterior(field: &AnsatzField) -> Result<(f64, f64)> {
    let p = &field.params;
    let n = p.n;
    let lam = p.lambda;
    let m = 0.5 * (n as f64 - 2.0);
    let pe = field.exponent();
    let crit = exterior(field, |r| libm::pow(bubble_d2(n, lam, r * r), pe + 1.0))?;
    let grad = exterior(field, |r| {
        let u = bubble_d2(n, lam, r * r);
        let du = 2.0 * m * r * u / (lam * lam + r * r);
        du * du
    })?;
    Ok((crit, grad))
}

/// Quadrature value of J_ε[W] with an error estimate from two resolutions.
#[derive(Debug, Clone, Copy)]
pub struct EnergyQuadrature {
    pub value: f64,
    pub error: f64,
    /// the same energy from the weak form ½∫(−ΔW + με²W)W − c∫|W|^{2n/(n−2)}
    pub weak_form: f64,
    pub moments: Moments,
    pub moment_errors: Moments,
    /// outside Ω_ε: ∫U^{2n/(n−2)} and ∫|∇U|²
    pub exterior_crit: f64,
    pub exterior_grad: f64,
    /// true when the gradient form (radial path) was used
    pub radial: bool,
}

impl EnergyQuadrature {
    /// ½∫|∇W|² + ½με²∫W² (gradient form when available).
    pub fn quadratic_part(&self, field: &AnsatzField) -> f64 {
        let p = &field.params;
        let (_, k) = coefficients(p.n);
        let me2 = p.mu * p.eps * p.eps;
        let crit = critical_integral(p.n);
        let mo = &self.moments;
        if self.radial {
            0.5 * (k * crit - self.exterior_grad) + mo.grad_uv + 0.5 * mo.grad_vv + 0.5 * me2 * mo.w2
        } else {
            0.5 * k * (crit - self.exterior_crit) + 0.5 * k * mo.upv + 0.5 * mo.dw
        }
    }
}

fn assemble_j(field: &AnsatzField, mo: &Moments, ext_crit: f64, ext_grad: f64) -> Result<(f64, f64)> {
    let p = &field.params;
    let (c, k) = coefficients(p.n);
    let lead = leading_constant(p.n)?;
    let me2 = p.mu * p.eps * p.eps;
    let gradient =
        lead - (0.5 * ext_grad - c * ext_crit) + mo.grad_uv + 0.5 * mo.grad_vv + 0.5 * me2 * mo.w2 - c * mo.crit_diff;
    let weak = lead - (0.5 * k - c) * ext_crit + 0.5 * k * mo.upv + 0.5 * mo.dw - c * mo.crit_diff;
    Ok((gradient, weak))
}

/// J_ε[W] by quadrature on a ball. With Q at the center the integrand is radial and
/// the gradient form is used; otherwise axisymmetric nodes and the weak form.
pub fn j_eps_quadrature(field: &AnsatzField) -> Result<EnergyQuadrature> {
    ball_radius(&field.domain)?;
    if field.correction.is_none() {
        return Err(Error::Domain("energy quadrature needs the boundary correction"));
    }
    let (ext_crit, ext_grad) = bubble_exterior(field)?;
    let radial = is_radial(field);
    let (lo, hi) = if radial {
        (radial_nodes(field, 4, 16)?, radial_nodes(field, 6, 24)?)
    } else {
        (axisym_nodes(field, false)?, axisym_nodes(field, true)?)
    };
    let m_lo = moments(field, &lo)?;
    let m_hi = moments(field, &hi)?;
    let (g_lo, w_lo) = assemble_j(field, &m_lo, ext_crit, ext_grad)?;
    let (g_hi, w_hi) = assemble_j(field, &m_hi, ext_crit, ext_grad)?;
    let (value, error) = if radial { (g_hi, (g_hi - g_lo).abs()) } else { (w_hi, (w_hi - w_lo).abs()) };
    Ok(EnergyQuadrature {
        value,
        error,
        weak_form: w_hi,
        moments: m_hi,
        moment_errors: m_hi.max_abs_diff(&m_lo),
        exterior_crit: ext_crit,
        exterior_grad: ext_grad,
        radial,
    })
}

/// J of the bare bubble U_Λ restricted to the ball of radius ρ about its center.
pub fn bubble_energy_in_ball(n: usize, lambda: f64, rho: f64) -> Result<f64> {
    let lead = leading_constant(n)?;
    let (c, _) = coefficients(n);
    let nf = n as f64;
    let m = 0.5 * (nf - 2.0);
    let pe = (nf + 2.0) / (nf - 2.0);
    let f = |r: f64| {
        let u = bubble_d2(n, lambda, r * r);
        let du = 2.0 * m * r * u / (lambda * lambda + r * r);
        (0.5 * du * du - c * libm::pow(u, pe + 1.0)) * powi(r, n as i32 - 1)
    };
    Ok(lead - sphere_area(n) * integrate_to_inf(f, rho, 0.0, 1e-14).value)
}

/// One displayed term of the expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerm {
    pub name: &'static str,
    pub value: f64,
}

/// (c₁/(−ln ε))^{1/2}
fn mu4(eps: f64, c1: f64) -> f64 {
    sqrt(c1 / -ln(eps))
}

/// ∫_Ω f(|x − Q|) dx on a ball, given the radial antiderivative g(ρ) = ∫_0^ρ f(r) r^{n−1} dr.
pub fn ball_radial_integral<G: Fn(f64) -> f64>(domain: &DomainSpec, q: &Pt, g: G) -> Result<f64> {
    let radius = ball_radius(domain)?;
    let n = domain.n;
    let qn = norm(n, q);
    if qn <= 1e-14 * radius {
        return Ok(sphere_area(n) * g(radius));
    }
    let (tx, tw) = gauss_legendre(96);
    let mut acc = 0.0;
    for (t, w) in tx.iter().zip(&tw) {
        let th = 0.5 * PI * (t + 1.0);
        let (ct, st) = (libm::cos(th), libm::sin(th));
        let rho = -qn * ct + sqrt(radius * radius - qn * qn * st * st);
        acc += w * 0.5 * PI * powi(st, n as i32 - 2) * g(rho);
    }
    Ok(sphere_area(n - 1) * acc)
}

/// Displayed terms of the energy expansion: for n = 4
/// 2∫U⁴ + (c₄Λ²/4)ε²μ ln(1/(Λε)) − (c₄²Λ²/(2|Ω|))ε²/μ + ½c₄²Λ²ε²H(Q,Q);
/// for n = 6
/// 4∫U³ + P(η,Λ)ε³ + ½c₆²Λ⁴ε⁴H(Q,Q) + ½(η − c₆Λ²/|Ω|)ε⁴∫_Ω Λ²|x−Q|^{-4}.
pub fn j_expansion_terms(params: &BlowupParams, domain: &DomainSpec) -> Result<Vec<ExpansionTerm>> {
    let p = params;
    let lam = p.lambda;
    let eps = p.eps;
    let vol = domain.volume;
    let cn = domain.cn;
    let h = domain.robin(&p.q)?.value;
    let lead = leading_constant(p.n)?;
    let mut t = Vec::new();
    t.push(ExpansionTerm { name: "leading", value: lead });
    if p.n == 4 {
        let mu = mu4(eps, p.c1);
        let e2 = eps * eps;
        let l2 = lam * lam;
        t.push(ExpansionTerm { name: "log", value: 0.25 * cn * l2 * e2 * mu * ln(1.0 / (lam * eps)) });
        t.push(ExpansionTerm { name: "mass", value: -cn * cn * l2 * e2 / (2.0 * vol * mu) });
        t.push(ExpansionTerm { name: "robin", value: 0.5 * cn * cn * l2 * e2 * h });
    } else {
        let e3 = powi(eps, 3);
        let e4 = e3 * eps;
        let pot = domain.quartic_potential(&p.q)?;
        t.push(ExpansionTerm { name: "cubic", value: center_polynomial6(p.eta, lam, domain) * e3 });
        t.push(ExpansionTerm { name: "robin", value: 0.5 * cn * cn * powi(lam, 4) * e4 * h });
        t.push(ExpansionTerm {
            name: "potential",
            value: 0.5 * (p.eta - cn * lam * lam / vol) * e4 * lam * lam * pot,
        });
    }
    Ok(t)
}

/// Sum of the displayed expansion.
pub fn j_expansion(params: &BlowupParams, domain: &DomainSpec) -> Result<f64> {
    Ok(j_expansion_terms(params, domain)?.iter().map(|t| t.value).sum())
}

/// The expansion without the ε⁴ potential term. For n = 6 the pieces ε⁶∫ÛW and
/// −ε³∫Δ(Rχ)W cancel, and the constant part of Û integrates against a mean-zero
/// quantity, so no ε⁴∫|x−Q|^{-4} term survives. Identical to the displayed form for n = 4.
pub fn j_expansion_corrected(params: &BlowupParams, domain: &DomainSpec) -> Result<f64> {
    Ok(j_expansion_terms(params, domain)?.iter().filter(|t| t.name != "potential").map(|t| t.value).sum())
}

/// ½η²|Ω| − c₆Λ²η + c₆Λ²/48 − 8η³|Ω|.
pub fn center_polynomial6(eta: f64, lambda: f64, domain: &DomainSpec) -> f64 {
    let vol = domain.volume;
    let c = domain.cn * lambda * lambda;
    0.5 * eta * eta * vol - c * eta + c / 48.0 - 8.0 * eta * eta * eta * vol
}

/// The n = 6 constant-term quadratic 24η² − η + s with s = c₆Λ²/|Ω|.
pub fn constant_quadratic6(eta: f64, s: f64) -> f64 {
    24.0 * eta * eta - eta + s
}

/// ∂_η and ∂_s of the center polynomial divided by |Ω| (s = c₆Λ²/|Ω|).
pub fn center_polynomial6_gradient(eta: f64, s: f64) -> (f64, f64) {
    (eta - s - 24.0 * eta * eta, -eta + 1.0 / 48.0)
}

/// The center polynomial divided by |Ω| in the variables (η, s).
pub fn center_polynomial6_scaled(eta: f64, s: f64) -> f64 {
    0.5 * eta * eta - s * eta + s / 48.0 - 8.0 * eta * eta * eta
}

/// K_ε(Λ,Q) for n = 4 from the Robin value h = H(Q,Q) (displayed terms only).
pub fn k_eps4_h(lambda: f64, h: f64, eps: f64, domain: &DomainSpec, c1: f64) -> f64 {
    let c4 = domain.cn;
    let l2 = lambda * lambda;
    let r = c1 / -ln(eps);
    0.25 * c4 * l2 * -(ln(lambda) + ln(eps)) * r - c4 * c4 * l2 / (2.0 * domain.volume)
        + 0.5 * c4 * c4 * l2 * h * sqrt(r)
}

pub fn k_eps4(lambda: f64, q: &Pt, eps: f64, domain: &DomainSpec, c1: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(k_eps4_h(lambda, domain.robin(q)?.value, eps, domain, c1))
}

/// F_ε(Λ): the Λ-part of K_ε without the Robin term.
pub fn f_eps4(lambda: f64, eps: f64, domain: &DomainSpec, c1: f64) -> f64 {
    k_eps4_h(lambda, 0.0, eps, domain, c1)
}

/// ∂_Λ F_ε.
pub fn f_eps4_dlambda(lambda: f64, eps: f64, domain: &DomainSpec, c1: f64) -> f64 {
    let c4 = domain.cn;
    let r = c1 / -ln(eps);
    0.5 * c4 * lambda * -(ln(lambda) + ln(eps)) * r - 0.25 * c4 * lambda * r - c4 * c4 * lambda / domain.volume
}

/// K_ε(Λ,η,Q) for n = 6 from h = H(Q,Q) and the quartic potential (displayed terms only).
pub fn k_eps6_parts(lambda: f64, eta: f64, h: f64, potential: f64, eps: f64, domain: &DomainSpec) -> f64 {
    let c6 = domain.cn;
    let l2 = lambda * lambda;
    center_polynomial6(eta, lambda, domain)
        + 0.5 * c6 * c6 * l2 * l2 * h * eps
        + 0.5 * (eta - c6 * l2 / domain.volume) * eps * l2 * potential
}

pub fn k_eps6(lambda: f64, eta: f64, q: &Pt, eps: f64, domain: &DomainSpec) -> Result<f64> {
    check_eps(eps)?;
    let h = domain.robin(q)?.value;
    let pot = domain.quartic_potential(q)?;
    Ok(k_eps6_parts(lambda, eta, h, pot, eps, domain))
}

/// |Ω|/6912 + [F(Q) − (8a³ + ab)|Ω|]ε.
pub fn k_eps6_ab_f(a: f64, b: f64, f: f64, eps: f64, domain: &DomainSpec) -> f64 {
    domain.volume / 6912.0 + (f - (8.0 * a * a * a + a * b) * domain.volume) * eps
}

pub fn k_eps6_ab(a: f64, b: f64, q: &Pt, eps: f64, domain: &DomainSpec) -> Result<f64> {
    check_eps(eps)?;
    Ok(k_eps6_ab_f(a, b, domain.f_landscape(q)?, eps, domain))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("need 0 < ε < 1"))
    }
}

/// One appendix identity: quadrature against its displayed closed form, with the size
/// of the displayed error term (constant dropped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermCheck {
    pub name: &'static str,
    pub quadrature: f64,
    pub closed_form: f64,
    pub difference: f64,
    /// the displayed error order evaluated at this ε
    pub error_scale: f64,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone)]
pub struct EnergyBreakdown {
    pub n: usize,
    pub eps: f64,
    pub j_quadrature: f64,
    pub j_quadrature_error: f64,
    pub j_expansion: f64,
    pub leading: f64,
    pub expansion_terms: Vec<ExpansionTerm>,
    pub terms: Vec<TermCheck>,
    /// J_quad − J_exp
    pub remainder: f64,
    /// J_quad minus the expansion without the potential term
    pub remainder_corrected: f64,
}

fn check(name: &'static str, quadrature: f64, closed_form: f64, error_scale: f64, quadrature_error: f64) -> TermCheck {
    TermCheck { name, quadrature, closed_form, difference: quadrature - closed_form, error_scale, quadrature_error }
}

/// Quadrature of each intermediate identity of the expansion, next to its closed form.
pub fn appendix_terms(field: &AnsatzField) -> Result<EnergyBreakdown> {
    let p = &field.params;
    let d = &field.domain;
    let q = j_eps_quadrature(field)?;
    let mo = &q.moments;
    let me = &q.moment_errors;
    let n = p.n;
    let eps = p.eps;
    let lam = p.lambda;
    let l2 = lam * lam;
    let vol = d.volume;
    let cn = d.cn;
    let h = d.robin(&p.q)?.value;
    let crit = critical_integral(n);
    let u_in = crit - q.exterior_crit;
    let mut terms = Vec::new();
    if n == 4 {
        let mu = mu4(eps, p.c1);
        let e2 = eps * eps;
        let big_l = ln(1.0 / (lam * eps));
        let e_main = e2 * mu + e2 * e2 / mu;
        terms.push(check(
            "∫U³W",
            u_in + mo.upv,
            crit + cn * cn * l2 * e2 / (8.0 * vol * mu) - cn * l2 / 16.0 * big_l * e2 * mu - cn * cn * l2 / 8.0 * e2 * h,
            e_main,
            me.upv,
        ));
        let inv2 = ball_radial_integral(d, &p.q, |r| 0.5 * r * r)?;
        terms.push(check("ε⁴μ²∫ÛW", e2 * e2 * mu * mu * mo.uhat_w, cn * l2 / vol * e2 * inv2, e2 * mu, e2 * e2 * mu * mu * me.uhat_w));
        let a2 = e2 * l2;
        let soft = ball_radial_integral(d, &p.q, |r| 0.5 * (r * r - a2 * libm::log1p(r * r / a2)))?;
        terms.push(check("∫Δ(Rχ)W", mo.lap_w, cn * l2 / (vol * mu) * soft, 1.0 + e2 * -ln(eps), me.lap_w));
        terms.push(check(
            "∫W⁴",
            u_in + mo.crit_diff,
            crit - 0.25 * cn * l2 * e2 * mu * big_l - 0.5 * cn * cn * l2 * e2 * h + cn * cn * l2 * e2 / (2.0 * vol * mu),
            e2 * mu + e2 * e2 / powi(mu, 4),
            me.crit_diff,
        ));
    } else {
        let e3 = powi(eps, 3);
        let e4 = e3 * eps;
        let e5 = e4 * eps;
        let s = cn * l2 / vol;
        let pot = d.quartic_potential(&p.q)?;
        let eta = p.eta;
        terms.push(check(
            "∫U²W",
            u_in + mo.upv,
            crit + cn * eta * l2 * e3 / 24.0 - cn * cn * l2 * l2 * e4 * h / 24.0 - cn * l2 * e3 / 576.0,
            e5,
            me.upv,
        ));
        terms.push(check("ε⁶∫ÛW", e3 * e3 * mo.uhat_w, -eta * l2 * e4 * pot, e5, e3 * e3 * me.uhat_w));
        terms.push(check("−ε³∫Δ(Rχ)W", -e3 * mo.lap_w, eta * l2 * e4 * pot, e5, e3 * me.lap_w));
        terms.push(check(
            "ε⁶(η−c₆Λ²/|Ω|)∫W",
            e3 * e3 * (eta - s) * mo.w1,
            (eta * eta * vol - cn * eta * l2) * e3 + (eta - s) * e4 * l2 * pot,
            e5,
            e3 * e3 * (eta - s).abs() * me.w1,
        ));
        let k = 24.0;
        let quad_err = 0.5 * me.grad_vv + me.grad_uv + 0.5 * e3 * me.w2;
        terms.push(check(
            "½∫|∇W|²+½ε³∫W²",
            q.quadratic_part(field),
            0.5 * k * crit + (0.5 * eta * eta * vol - cn * l2 / 48.0) * e3 - 0.5 * cn * cn * l2 * l2 * h * e4
                + 0.5 * (eta - s) * e4 * l2 * pot,
            e5,
            quad_err,
        ));
        terms.push(check(
            "∫W³",
            u_in + mo.crit_diff,
            crit + cn * eta * l2 * e3 / 8.0 - cn * l2 * e3 / 192.0 + eta * eta * eta * vol * e3
                - cn * cn * l2 * l2 * h * e4 / 8.0,
            e5,
            me.crit_diff,
        ));
    }
    let expansion_terms = j_expansion_terms(p, d)?;
    let j_exp: f64 = expansion_terms.iter().map(|t| t.value).sum();
    let j_cor: f64 = expansion_terms.iter().filter(|t| t.name != "potential").map(|t| t.value).sum();
    Ok(EnergyBreakdown {
        n,
        eps,
        j_quadrature: q.value,
        j_quadrature_error: q.error,
        j_expansion: j_exp,
        leading: leading_constant(n)?,
        expansion_terms,
        terms,
        remainder: q.value - j_exp,
        remainder_corrected: q.value - j_cor,
    })
}
