//! The approximate solution W on Ω_ε = Ω/ε, its pieces, parameter derivatives,
//! the residual S_ε[W], the kernel elements Z and the weighted norms.
//!
//! Points `z` live in Ω_ε; the physical point is x = εz. The boundary
//! correction is built in physical variables, where it solves Δr − r = 0 in Ω
//! and R(z) = r(εz).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::green::{DomainSpec, Shape};
use crate::mathx::{ln, pow_m1, powi, sqrt};
use crate::profiles::{unit_bubble, RadialProfile};
use crate::quad::gauss_legendre;
use crate::special::{gegenbauer, gegenbauer_norm, screened_radial};
use crate::{dot, norm, sphere_area, Pt, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupParams {
    pub n: usize,
    pub eps: f64,
    pub mu: f64,
    pub lambda: f64,
    /// physical concentration point
    pub q: Pt,
    /// n = 6 only
    pub eta: f64,
    /// cutoff width; kept fixed when parameters are perturbed
    pub delta: f64,
    /// n = 4 only
    pub c1: f64,
}

/// μ for n = 4 from ε and c₁.
pub fn mu_from_eps4(eps: f64, c1: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain("need 0 < ε < 1"));
    }
    Ok(sqrt(c1 / -ln(eps)))
}

/// Inverse of `mu_from_eps4`: ε = exp(−c₁/μ²).
pub fn eps_from_mu4(mu: f64, c1: f64) -> f64 {
    libm::exp(-c1 / (mu * mu))
}

/// Default c₁ = 2c₄/|Ω|.
pub fn default_c1(domain: &DomainSpec) -> f64 {
    2.0 * domain.cn / domain.volume
}

/// Λ at the center of the n = 6 box: c₆Λ²/|Ω| = 1/96.
pub fn lambda6_center(domain: &DomainSpec) -> f64 {
    sqrt(domain.volume / (96.0 * domain.cn))
}

impl BlowupParams {
    pub fn new4(domain: &DomainSpec, eps: f64, lambda: f64, q: Pt, c1: Option<f64>) -> Result<Self> {
        if domain.n != 4 {
            return Err(Error::Domain("n = 4 parameters need a 4-dimensional domain"));
        }
        let c1 = c1.unwrap_or_else(|| default_c1(domain));
        let mu = mu_from_eps4(eps, c1)?;
        Self::finish(domain, 4, eps, mu, lambda, q, 0.0, c1)
    }

    pub fn new6(domain: &DomainSpec, eps: f64, lambda: f64, eta: f64, q: Pt) -> Result<Self> {
        if domain.n != 6 {
            return Err(Error::Domain("n = 6 parameters need a 6-dimensional domain"));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain("need 0 < ε < 1"));
        }
        Self::finish(domain, 6, eps, eps, lambda, q, eta, 0.0)
    }

    /// η = 1/48 + aε^{1/3}, c₆Λ²/|Ω| = 1/96 + bε^{2/3}.
    pub fn from_ab(domain: &DomainSpec, eps: f64, a: f64, b: f64, q: Pt) -> Result<Self> {
        let (lambda, eta) = ab_to_lambda_eta(domain, eps, a, b)?;
        Self::new6(domain, eps, lambda, eta, q)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(d: &DomainSpec, n: usize, eps: f64, mu: f64, lambda: f64, q: Pt, eta: f64, c1: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain("Λ must be positive"));
        }
        if q[..n].iter().any(|v| !v.is_finite()) || !d.contains(&q) {
            return Err(Error::Domain("Q must lie inside Ω"));
        }
        let delta = 0.4 * d.boundary_distance(&q);
        Ok(BlowupParams { n, eps, mu, lambda, q, eta, delta, c1 })
    }

    pub fn qbar(&self) -> Pt {
        crate::scale(1.0 / self.eps, &self.q)
    }

    /// Λ_{4,1} = e^{-1/2}ε^β and Λ_{4,2} = e^{-1/2}ε^{-β}.
    pub fn lambda_box4(eps: f64, beta: f64) -> (f64, f64) {
        let c = libm::exp(-0.5);
        (c * libm::pow(eps, beta), c * libm::pow(eps, -beta))
    }
}

pub fn ab_to_lambda_eta(domain: &DomainSpec, eps: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let eta = 1.0 / 48.0 + a * libm::cbrt(eps);
    let l2 = (1.0 / 96.0 + b * libm::pow(eps, 2.0 / 3.0)) * domain.volume / domain.cn;
    if l2 <= 0.0 {
        return Err(Error::Domain("b too negative: Λ² ≤ 0"));
    }
    Ok((sqrt(l2), eta))
}

/// quintic smoothstep, C² with flat ends
fn smooth(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let u2 = u * u;
    (u2 * u * (10.0 - 15.0 * u + 6.0 * u2), 30.0 * u2 * (1.0 - u) * (1.0 - u), 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u))
}

/// Boundary correction on a ball: r = Σ β_l f_l(|x|)/f_l'(ρ) C_l^α(x̂·Q̂), with
/// ∂_Λβ_l and ∂_{|Q|}β_l for parameter derivatives.
#[derive(Debug, Clone)]
pub struct BoundaryCorrection {
    pub n: usize,
    pub radius: f64,
    pub qhat: Pt,
    pub qnorm: f64,
    pub beta: Vec<f64>,
    pub dbeta_l: Vec<f64>,
    pub dbeta_q: Vec<f64>,
    pub fp_rho: Vec<f64>,
    /// size of the first dropped coefficients relative to the largest
    pub tail: f64,
}

/// Values of r, ∂_r r and their Λ and Q derivatives at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct CorrectionSample {
    pub r: f64,
    pub dr: f64,
    pub r_l: f64,
    pub dr_l: f64,
    pub r_q: Pt,
    pub dr_q: Pt,
}

const BC_NODES: usize = 256;
const BC_LMAX: usize = 160;

impl BoundaryCorrection {
    pub fn solve(p: &BlowupParams, domain: &DomainSpec, profile: &RadialProfile) -> Result<Self> {
        let radius = match domain.shape {
            Shape::Ball { radius } => radius,
            Shape::Box { .. } => return Err(Error::Domain("boundary correction is implemented for balls")),
        };
        let n = p.n;
        let nf = n as f64;
        let m = 0.5 * (nf - 2.0);
        let alpha = m;
        let eps = p.eps;
        let lam = p.lambda;
        let a = eps * lam;
        let qn = norm(n, &p.q);
        let mut qhat = [0.0; 6];
        if qn > 0.0 {
            for i in 0..n {
                qhat[i] = p.q[i] / qn;
            }
        } else {
            qhat[0] = 1.0;
        }
        let cf = libm::pow(eps, nf - 2.0) / (p.mu * eps * eps);
        let lm = libm::pow(lam, m);
        let (xs, ws) = gauss_legendre(BC_NODES);
        let lmax = BC_LMAX;
        let mut beta = alloc::vec![0.0; lmax + 1];
        let mut dbl = alloc::vec![0.0; lmax + 1];
        let mut dbq = alloc::vec![0.0; lmax + 1];
        let mut c = Vec::new();
        let mut dc = Vec::new();
        for (xi, wi) in xs.iter().zip(&ws) {
            let th = 0.5 * PI * (xi + 1.0);
            let t = libm::cos(th);
            let w = wi * 0.5 * PI * powi(libm::sin(th), n as i32 - 2);
            let d2 = radius * radius + qn * qn - 2.0 * radius * qn * t;
            let d = sqrt(d2);
            let nu = (radius - qn * t) / d;
            let dd_q = (qn - radius * t) / d;
            let dnu_q = -t / d - (radius - qn * t) * (qn - radius * t) / (d2 * d);
            // E(d) = (a²+d²)^{-m} − d^{-2m}
            let x = a * a / d2;
            let dm = libm::pow(d, -2.0 * m - 2.0);
            let e1 = -2.0 * m * d * dm * pow_m1(x, m + 1.0);
            let e2 = dm * (-2.0 * m * pow_m1(x, m + 1.0) + 4.0 * m * (m + 1.0) * pow_m1(x, m + 2.0));
            let e1_a = 4.0 * m * (m + 1.0) * a * d * libm::pow(a * a + d2, -m - 2.0);
            let s = d / a;
            let (_, ps1, _) = profile.eval3(s);
            let ps2 = -unit_bubble(n, s) - (nf - 1.0) * ps1 / s;
            let (kappa, k_l) = if n == 4 { (1.0 / eps, 0.0) } else { (1.0 / a, -1.0 / (a * lam)) };
            // κΨ'(d/a) and its derivatives
            let g = kappa * ps1;
            let g_d = kappa * ps2 / a;
            let g_l = k_l * ps1 + kappa * ps2 * (-s / lam);
            let b = (-cf * lm * e1 + g) * nu;
            let b_l = (-cf * (m * lm / lam * e1 + lm * eps * e1_a) + g_l) * nu;
            let b_q = (-cf * lm * e2 + g_d) * dd_q * nu + (-cf * lm * e1 + g) * dnu_q;
            gegenbauer(alpha, lmax, t, &mut c, &mut dc);
            for l in 0..=lmax {
                beta[l] += w * b * c[l];
                dbl[l] += w * b_l * c[l];
                dbq[l] += w * b_q * c[l];
            }
        }
        let mut fp_rho = Vec::with_capacity(lmax + 1);
        for l in 0..=lmax {
            let h = gegenbauer_norm(alpha, l);
            beta[l] /= h;
            dbl[l] /= h;
            dbq[l] /= h;
            fp_rho.push(screened_radial(n, l, radius).1);
        }
        // truncate where all three coefficient families have died out
        let big = |v: &[f64]| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let scale = big(&beta).max(big(&dbl)).max(big(&dbq)).max(f64::MIN_POSITIVE);
        // cut at the first run of four coefficients below the projection noise floor
        let mag = |l: usize| beta[l].abs().max(dbl[l].abs()).max(dbq[l].abs()) / scale;
        let cut = (1..=lmax - 3).find(|&l| (l..l + 4).all(|j| mag(j) < 1e-13));
        let (keep, tail) = match cut {
            Some(l) => (l - 1, (l..l + 4).map(mag).fold(0.0, f64::max)),
            None => (lmax, (lmax - 3..=lmax).map(mag).fold(0.0, f64::max)),
        };
        if tail > 1e-8 {
            return Err(Error::Accuracy { what: "boundary correction harmonic truncation", estimate: tail });
        }
        beta.truncate(keep + 1);
        dbl.truncate(keep + 1);
        dbq.truncate(keep + 1);
        fp_rho.truncate(keep + 1);
        Ok(BoundaryCorrection { n, radius, qhat, qnorm: qn, beta, dbeta_l: dbl, dbeta_q: dbq, fp_rho, tail })
    }

    pub fn degree(&self) -> usize {
        self.beta.len() - 1
    }

    /// Evaluates at a physical point x.
    pub fn sample(&self, x: &Pt) -> CorrectionSample {
        let n = self.n;
        let alpha = 0.5 * (n as f64 - 2.0);
        let r = norm(n, x);
        let mut xh = self.qhat;
        if r > 0.0 {
            for i in 0..n {
                xh[i] = x[i] / r;
            }
        }
        let t = dot(n, &xh, &self.qhat).clamp(-1.0, 1.0);
        let lmax = self.degree();
        let mut c = Vec::with_capacity(lmax + 1);
        let mut dc = Vec::with_capacity(lmax + 1);
        gegenbauer(alpha, lmax, t, &mut c, &mut dc);
        let mut out = CorrectionSample::default();
        let (mut a_par, mut a_perp, mut b_par, mut b_perp) = (0.0, 0.0, 0.0, 0.0);
        for l in 0..=lmax {
            let (f, fp, _) = screened_radial(n, l, r);
            let big_f = f / self.fp_rho[l];
            let big_fp = fp / self.fp_rho[l];
            out.r += self.beta[l] * big_f * c[l];
            out.dr += self.beta[l] * big_fp * c[l];
            out.r_l += self.dbeta_l[l] * big_f * c[l];
            out.dr_l += self.dbeta_l[l] * big_fp * c[l];
            // ∂_{Q_i} = Σ F_l [β_l' C_l Q̂_i + (β_l/|Q|) C_l' (x̂_i − t Q̂_i)]
            let over_q = if self.qnorm > 0.0 { self.beta[l] / self.qnorm } else { self.dbeta_q[l] };
            a_par += big_f * (self.dbeta_q[l] * c[l] - over_q * dc[l] * t);
            a_perp += big_f * over_q * dc[l];
            b_par += big_fp * (self.dbeta_q[l] * c[l] - over_q * dc[l] * t);
            b_perp += big_fp * over_q * dc[l];
        }
        for i in 0..n {
            out.r_q[i] = a_par * self.qhat[i] + a_perp * xh[i];
            out.dr_q[i] = b_par * self.qhat[i] + b_perp * xh[i];
        }
        out
    }
}

/// Everything the field knows at one point of Ω_ε.
#[derive(Debug, Clone, Copy, Default)]
pub struct FieldSample {
    pub w: f64,
    pub u: f64,
    pub uhat: f64,
    /// Ψ_{Λ,Q̄}
    pub psi: f64,
    /// H(εz, Q)
    pub h: f64,
    pub rchi: f64,
    pub tail: f64,
    /// Δ_z(Rχ)
    pub lap_rchi: f64,
    /// −ΔW + με²W
    pub rhs: f64,
    pub residual: f64,
    pub y_lambda: f64,
    pub y_q: Pt,
    pub y_eta: f64,
    pub z_lambda: f64,
    pub z_q: Pt,
    pub z_eta: f64,
    /// ∇_z W, with only the radial part of ∇R in the boundary layer direction
    pub grad_w: Pt,
    /// ∇_z(W − U), same caveat
    pub grad_v: Pt,
}

#[derive(Debug, Clone)]
pub struct AnsatzField {
    pub params: BlowupParams,
    pub domain: DomainSpec,
    pub profile: RadialProfile,
    pub correction: Option<BoundaryCorrection>,
}

impl AnsatzField {
    /// Builds W; the boundary correction is included when `with_correction` and Ω is a ball.
    pub fn assemble(params: BlowupParams, domain: DomainSpec, profile: &RadialProfile, with_correction: bool) -> Result<Self> {
        if params.n != domain.n || profile.n != domain.n {
            return Err(Error::Domain("dimension mismatch between parameters, profile and domain"));
        }
        if !(params.delta > 0.0 && domain.boundary_distance(&params.q) > params.delta) {
            return Err(Error::Domain("need d(Q, ∂Ω) > δ"));
        }
        // the Green series must accept this Q
        domain.robin(&params.q)?;
        let correction = if with_correction && matches!(domain.shape, Shape::Ball { .. }) {
            Some(BoundaryCorrection::solve(&params, &domain, profile)?)
        } else {
            None
        };
        Ok(AnsatzField { params, domain, profile: profile.clone(), correction })
    }

    pub fn exponent(&self) -> f64 {
        let nf = self.params.n as f64;
        (nf + 2.0) / (nf - 2.0)
    }

    /// χ(x) and its first two derivatives with respect to the boundary distance d_b.
    fn cutoff(&self, x: &Pt) -> (f64, f64, f64) {
        let delta = self.params.delta;
        let db = self.domain.boundary_distance(x);
        let (s, s1, s2) = smooth((db - 0.25 * delta) / (0.25 * delta));
        let k = 4.0 / delta;
        // χ = 1 − s(u), u = (d_b − δ/4)/(δ/4)
        (1.0 - s, -s1 * k, -s2 * k * k)
    }

    /// Tail constant added to W: c₄Λμ^{-1}ε²/|Ω| (n=4) or ημ^{-1}ε⁴ (n=6).
    pub fn tail_constant(&self) -> f64 {
        let p = &self.params;
        if p.n == 4 {
            self.domain.cn * p.lambda * p.eps * p.eps / (p.mu * self.domain.volume)
        } else {
            p.eta * powi(p.eps, 4) / p.mu
        }
    }

    /// με²T − c_nε^nΛ^m/|Ω|, the constant part of −ΔW + με²W.
    pub fn rhs_constant(&self) -> f64 {
        let p = &self.params;
        let nf = p.n as f64;
        let m = 0.5 * (nf - 2.0);
        p.mu * p.eps * p.eps * self.tail_constant()
            - self.domain.cn * libm::pow(p.eps, nf) * libm::pow(p.lambda, m) / self.domain.volume
    }

    pub fn eval(&self, z: &Pt) -> Result<FieldSample> {
        let p = &self.params;
        let n = p.n;
        let nf = n as f64;
        let m = 0.5 * (nf - 2.0);
        let pe = self.exponent();
        let eps = p.eps;
        let lam = p.lambda;
        let mu = p.mu;
        let me2 = mu * eps * eps;
        let x = crate::scale(eps, z);
        let qb = p.qbar();
        let s = crate::sub(z, &qb);
        let rz2 = dot(n, &s, &s);
        let rz = sqrt(rz2);

        // bubble
        let den = lam * lam + rz2;
        let u = bubble_d2(n, lam, rz2);
        let u_l = m * u * (rz2 - lam * lam) / (lam * den);
        let mut u_q = [0.0; 6];
        for i in 0..n {
            u_q[i] = 2.0 * m * u * s[i] / den;
        }

        // Ψ_{Λ,Q̄}
        let sig = rz / lam;
        let (pv, p1, p2) = self.profile.eval3(sig);
        // Ψ'(σ)/σ, finite at the origin
        let p1_over = if sig > 1e-8 { p1 / sig } else { p2 };
        let (psi, psi_l, psi_qf) = if n == 4 {
            let off = 0.5 * ln(1.0 / (lam * eps));
            (lam * off + lam * pv, off - 0.5 + pv - sig * p1, -p1_over / lam)
        } else {
            (pv, -sig * p1 / lam, -p1_over / (lam * lam))
        };
        // ∂_{Q̄_i}Ψ = psi_qf · s_i

        // Green regular part
        let hg = self.domain.h_grad(&x, &p.q)?;
        let hc = -self.domain.cn / mu * libm::pow(eps, nf - 4.0);
        let lm = libm::pow(lam, m);
        let hterm = hc * lm * hg.h;
        let hterm_l = hc * m * libm::pow(lam, m - 1.0) * hg.h;

        // boundary correction
        let (chi, chi1, chi2) = self.cutoff(&x);
        let mut rchi = 0.0;
        let mut rchi_l = 0.0;
        let mut rchi_q = [0.0; 6];
        let mut lap = 0.0;
        let mut lap_l = 0.0;
        let mut lap_q = [0.0; 6];
        let mut dr_rad = 0.0;
        if let Some(bc) = &self.correction {
            let cs = bc.sample(&x);
            let xr = norm(n, &x);
            // on a ball d_b = ρ − |x|
            let c1r = -chi1;
            let c2r = chi2;
            let angular = if xr > 0.0 { c2r + (nf - 1.0) * c1r / xr } else { 0.0 };
            let lapf = |v: f64, dv: f64| eps * eps * (chi * v + 2.0 * c1r * dv + v * angular);
            rchi = cs.r * chi;
            rchi_l = cs.r_l * chi;
            lap = lapf(cs.r, cs.dr);
            lap_l = lapf(cs.r_l, cs.dr_l);
            for i in 0..n {
                rchi_q[i] = eps * cs.r_q[i] * chi;
                lap_q[i] = eps * lapf(cs.r_q[i], cs.dr_q[i]);
            }
            dr_rad = eps * (cs.dr * chi + cs.r * c1r);
        }

        let uhat = -psi + hterm + rchi;
        let uhat_l = -psi_l + hterm_l + rchi_l;
        let mut uhat_q = [0.0; 6];
        for i in 0..n {
            uhat_q[i] = -psi_qf * s[i] + hc * lm * eps * hg.dq[i] + rchi_q[i];
        }
        let tail = self.tail_constant();
        let w = u + me2 * uhat + tail;
        let tail_l = if n == 4 { tail / lam } else { 0.0 };
        let y_lambda = u_l + me2 * uhat_l + tail_l;
        let mut y_q = [0.0; 6];
        for i in 0..n {
            y_q[i] = u_q[i] + me2 * uhat_q[i];
        }
        let y_eta = if n == 6 { powi(eps, 4) / mu } else { 0.0 };

        let k = nf * (nf - 2.0);
        let c0 = self.rhs_constant();
        let rhs = k * libm::pow(u, pe) + me2 * me2 * uhat - me2 * lap + c0;
        let residual = rhs - k * libm::pow(w.max(0.0), pe);
        let dup = k * pe * libm::pow(u, pe - 1.0);
        let c0_l = if n == 4 {
            0.0
        } else {
            -2.0 * self.domain.cn * powi(eps, 6) * lam / self.domain.volume
        };
        let z_lambda = dup * u_l + me2 * me2 * uhat_l - me2 * lap_l + c0_l;
        let mut z_q = [0.0; 6];
        for i in 0..n {
            z_q[i] = dup * u_q[i] + me2 * me2 * uhat_q[i] - me2 * lap_q[i];
        }
        let z_eta = if n == 6 { me2 * y_eta } else { 0.0 };

        // ∇_z W: bubble and Ψ are radial about Q̄, H via ∇_x, R radially about the ball center
        let mut grad_w = [0.0; 6];
        let mut grad_v = [0.0; 6];
        let xr = norm(n, &x);
        for i in 0..n {
            let radial = if xr > 0.0 { x[i] / xr } else { 0.0 };
            grad_v[i] = me2 * (psi_qf * s[i] + hc * lm * eps * hg.dx[i] + dr_rad * radial);
            grad_w[i] = -u_q[i] + grad_v[i];
        }

        Ok(FieldSample {
            w,
            u,
            uhat,
            psi,
            h: hg.h,
            rchi,
            tail,
            lap_rchi: lap,
            rhs,
            residual,
            y_lambda,
            y_q,
            y_eta,
            z_lambda,
            z_q,
            z_eta,
            grad_w,
            grad_v,
        })
    }

    /// W alone, for finite-difference checks.
    pub fn w(&self, z: &Pt) -> Result<f64> {
        Ok(self.eval(z)?.w)
    }

    /// Same field with one parameter moved (δ stays frozen).
    pub fn perturbed(&self, lambda: f64, q: Pt, eta: f64) -> Result<Self> {
        let mut p = self.params;
        p.lambda = lambda;
        p.q = q;
        p.eta = eta;
        let correction = match &self.correction {
            Some(_) => Some(BoundaryCorrection::solve(&p, &self.domain, &self.profile)?),
            None => None,
        };
        Ok(AnsatzField { params: p, domain: self.domain, profile: self.profile.clone(), correction })
    }

    /// ∂_ν W at a boundary point z of Ω_ε (ball: outward radial direction).
    pub fn normal_derivative(&self, z: &Pt) -> Result<f64> {
        let n = self.params.n;
        let g = self.eval(z)?.grad_w;
        match self.domain.shape {
            Shape::Ball { .. } => {
                let r = norm(n, z);
                Ok((0..n).map(|i| g[i] * z[i] / r).sum())
            }
            Shape::Box { lengths } => {
                let x = crate::scale(self.params.eps, z);
                let mut best = (f64::INFINITY, 0usize, 1.0);
                for i in 0..n {
                    if x[i] < best.0 {
                        best = (x[i], i, -1.0);
                    }
                    if lengths[i] - x[i] < best.0 {
                        best = (lengths[i] - x[i], i, 1.0);
                    }
                }
                Ok(best.2 * g[best.1])
            }
        }
    }

    /// Sup-norm sample: 64 shells × 32 directions about Q̄ plus 500 points in the
    /// boundary layer (where χ varies) and on ∂Ω_ε.
    pub fn sample_points(&self, shells: usize, dirs: usize, boundary: usize) -> Vec<Pt> {
        let p = &self.params;
        let n = p.n;
        let eps = p.eps;
        let qb = p.qbar();
        let mut rng = Sampler::new(0x5eed_1234_abcd_0001);
        let directions: Vec<Pt> = (0..dirs).map(|_| rng.direction(n)).collect();
        let mut out = Vec::with_capacity(shells * dirs + boundary + 1);
        out.push(qb);
        let rmax = self.max_extent() / eps;
        let rmin = 1e-2 * p.lambda.min(1.0);
        for k in 0..shells {
            let r = rmin * libm::pow(rmax / rmin, k as f64 / (shells - 1).max(1) as f64);
            for d in &directions {
                let mut z = qb;
                for i in 0..n {
                    z[i] += r * d[i];
                }
                if self.domain.contains(&crate::scale(eps, &z)) {
                    out.push(z);
                }
            }
        }
        // boundary layer: d_b ∈ [0, δ/2] along random rays from the domain center
        let c = self.domain.center();
        for k in 0..boundary {
            let d = rng.direction(n);
            let frac = (k % 10) as f64 / 20.0;
            if let Some(x) = self.ray_point(&c, &d, frac * p.delta) {
                out.push(crate::scale(1.0 / eps, &x));
            }
        }
        out
    }

    /// Point on the ray c + s·d at boundary distance `db` (found by bisection).
    fn ray_point(&self, c: &Pt, d: &Pt, db: f64) -> Option<Pt> {
        let n = self.params.n;
        let at = |s: f64| {
            let mut x = *c;
            for i in 0..n {
                x[i] += s * d[i];
            }
            x
        };
        let (mut lo, mut hi) = (0.0, self.max_extent() * 2.0);
        if self.domain.boundary_distance(&at(lo)) < db {
            return None;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.domain.boundary_distance(&at(mid)) > db {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = at(lo);
        if db == 0.0 {
            // keep strictly inside so evaluation stays in the closed domain
            x = at(lo * (1.0 - 1e-14));
        }
        Some(x)
    }

    fn max_extent(&self) -> f64 {
        match self.domain.shape {
            Shape::Ball { radius } => radius + norm(self.params.n, &self.params.q),
            Shape::Box { lengths } => sqrt(lengths[..self.params.n].iter().map(|l| l * l).sum()),
        }
    }

    /// Axisymmetric quadrature nodes about the axis through Q̄ along Q̂ (ball only):
    /// (point on the meridian plane, weight, sinθ) with ∫_{Ω_ε} f = Σ w f(point) for
    /// functions symmetric about that axis.
    pub fn axisym_nodes(&self, n_theta: usize, per_decade: usize, far_panels: usize) -> Result<Vec<(Pt, f64, f64)>> {
        let radius = match self.domain.shape {
            Shape::Ball { radius } => radius,
            _ => return Err(Error::Domain("axisymmetric quadrature needs a ball")),
        };
        let p = &self.params;
        let n = p.n;
        let eps = p.eps;
        let qn = norm(n, &p.q);
        let (axis, perp) = frame(n, &p.q);
        let qb = p.qbar();
        let (tx, tw) = gauss_legendre(n_theta);
        let (gx, gw) = gauss_legendre(16);
        let sn2 = sphere_area(n - 1);
        let mut out = Vec::new();
        for (ti, twi) in tx.iter().zip(&tw) {
            let th = 0.5 * PI * (ti + 1.0);
            let (ct, st) = (libm::cos(th), libm::sin(th));
            let wt = twi * 0.5 * PI * powi(st, n as i32 - 2) * sn2;
            let rho = (-qn * ct + sqrt(radius * radius - qn * qn * st * st)) / eps;
            let mut breaks = Vec::new();
            breaks.push(0.0);
            let r0 = 1e-3 * p.lambda;
            if r0 < rho {
                let decades = libm::log10(rho / r0);
                let k = (libm::ceil(decades * per_decade as f64) as usize).max(1);
                for j in 0..=k {
                    breaks.push(r0 * libm::pow(rho / r0, j as f64 / k as f64));
                }
            } else {
                breaks.push(rho);
            }
            // uniform panels over the outer half for the boundary layer
            let start = 0.5 * rho;
            for j in 1..far_panels {
                breaks.push(start + (rho - start) * j as f64 / far_panels as f64);
            }
            breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
            breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * rho);
            for wdw in breaks.windows(2) {
                let (a, b) = (wdw[0], wdw[1]);
                let h = 0.5 * (b - a);
                for (gxi, gwi) in gx.iter().zip(&gw) {
                    let r = a + h * (gxi + 1.0);
                    let mut z = qb;
                    for i in 0..n {
                        z[i] += r * (ct * axis[i] + st * perp[i]);
                    }
                    out.push((z, wt * gwi * h * powi(r, n as i32 - 1), st));
                }
            }
        }
        Ok(out)
    }

    /// ∫_{Ω_ε} f for f axisymmetric about the Q axis.
    pub fn integrate_axisym<F: FnMut(&FieldSample) -> f64>(&self, mut f: F, nodes: &[(Pt, f64, f64)]) -> Result<f64> {
        let mut acc = 0.0;
        for (z, w, _) in nodes {
            acc += w * f(&self.eval(z)?);
        }
        Ok(acc)
    }

    /// Gram matrix ⟨Z_i, Y_j⟩ in the frame (Λ, Q̂, transverse…, η).
    pub fn gram_matrix(&self, nodes: &[(Pt, f64, f64)]) -> Result<Vec<Vec<f64>>> {
        let p = &self.params;
        let n = p.n;
        let (axis, perp) = frame(n, &p.q);
        let k = if n == 6 { n + 2 } else { n + 1 };
        let mut g = alloc::vec![alloc::vec![0.0; k]; k];
        let mut zsum = alloc::vec![0.0; 3];
        for (z, w, _) in nodes {
            let f = self.eval(z)?;
            let y = [f.y_lambda, dot(n, &f.y_q, &axis), dot(n, &f.y_q, &perp)];
            let zz = [f.z_lambda, dot(n, &f.z_q, &axis), dot(n, &f.z_q, &perp)];
            g[0][0] += w * zz[0] * y[0];
            g[0][1] += w * zz[0] * y[1];
            g[1][0] += w * zz[1] * y[0];
            g[1][1] += w * zz[1] * y[1];
            // transverse: Σ over the S^{n−2} fibre gives |S^{n−2}|/(n−1) × meridian value
            g[2][2] += w * zz[2] * y[2] / (n as f64 - 1.0);
            if n == 6 {
                zsum[0] += w * zz[0];
                zsum[1] += w * zz[1];
                g[k - 1][k - 1] += w * f.z_eta * f.y_eta;
                g[k - 1][0] += w * f.z_eta * y[0];
                g[k - 1][1] += w * f.z_eta * y[1];
            }
        }
        for i in 3..=n {
            g[i][i] = g[2][2];
        }
        if n == 6 {
            let y7 = powi(p.eps, 4) / p.mu;
            g[0][k - 1] = zsum[0] * y7;
            g[1][k - 1] = zsum[1] * y7;
        }
        Ok(g)
    }
}

#[inline]
fn bubble_d2(n: usize, lam: f64, d2: f64) -> f64 {
    crate::profiles::bubble_d2(n, lam, d2)
}

/// Axis along Q̂ (e₁ when Q = 0) and a unit vector perpendicular to it.
pub fn frame(n: usize, q: &Pt) -> (Pt, Pt) {
    let qn = norm(n, q);
    let mut axis = [0.0; 6];
    if qn > 0.0 {
        for i in 0..n {
            axis[i] = q[i] / qn;
        }
    } else {
        axis[0] = 1.0;
    }
    // least aligned coordinate direction, orthogonalized
    let j = (0..n).min_by(|&a, &b| axis[a].abs().partial_cmp(&axis[b].abs()).unwrap()).unwrap_or(1);
    let mut perp = [0.0; 6];
    perp[j] = 1.0;
    let c = axis[j];
    for i in 0..n {
        perp[i] -= c * axis[i];
    }
    let pn = norm(n, &perp);
    for v in perp.iter_mut() {
        *v /= pn;
    }
    (axis, perp)
}

/// Kinds of weighted norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// ‖⟨z−Q̄⟩φ‖_∞
    Star,
    /// ε^{-3}(−lnε)^{1/2}|f̄| + ‖⟨z−Q̄⟩³f‖_∞
    StarStar,
    /// ‖⟨z−Q̄⟩²φ‖_∞
    TriStar,
    /// ‖⟨z−Q̄⟩⁴f‖_∞
    QuadStar,
}

impl NormKind {
    pub fn power(self) -> i32 {
        match self {
            NormKind::Star => 1,
            NormKind::StarStar => 3,
            NormKind::TriStar => 2,
            NormKind::QuadStar => 4,
        }
    }
}

/// Weighted norm from samples (z, f(z)); `mean` is f̄ over Ω_ε (used by StarStar only).
pub fn weighted_norm(kind: NormKind, params: &BlowupParams, samples: &[(Pt, f64)], mean: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("empty sample set"));
    }
    if matches!(kind, NormKind::Star | NormKind::StarStar) != (params.n == 4) {
        return Err(Error::Domain("norm kind does not match the dimension"));
    }
    let qb = params.qbar();
    let n = params.n;
    let k = kind.power();
    let mut sup = 0.0f64;
    for (z, f) in samples {
        let d2 = (0..n).map(|i| (z[i] - qb[i]) * (z[i] - qb[i])).sum::<f64>();
        let weight = libm::pow(1.0 + d2, 0.5 * k as f64);
        sup = sup.max(weight * f.abs());
    }
    if kind == NormKind::StarStar {
        let e = params.eps;
        sup += libm::pow(e, -3.0) * sqrt(-ln(e)) * mean.abs();
    }
    Ok(sup)
}

/// Small deterministic generator for sample directions.
/// Seeded sampler for sample points, directions and perturbation maps.
pub struct Sampler(ChaCha8Rng);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn direction(&mut self, n: usize) -> Pt {
        let mut d = [0.0; 6];
        for v in d.iter_mut().take(n) {
            *v = self.normal();
        }
        let s = norm(n, &d);
        for v in d.iter_mut() {
            *v /= s;
        }
        d
    }
}
