//! Radial Neumann problem u″ + ((n−1)/r)u′ − μu + a·u^p = 0 on a ball, u′(0) = u′(R) = 0,
//! with a = 1 (plain form) or a = n(n−2) (normalized form).
//!
//! Two integrators share one Dormand-Prince 5(4) stepper. `shoot` is the textbook forward
//! shot from the center in r. The classifier uses a backward shot from r = R in Emden-Fowler
//! variables t = ln r, w = r^m u (m = (n−2)/2), where the critical equation becomes
//! w_tt − m²w + w^p − μe^{2t}w = 0. Writing y = ln w, z = y_t:
//!     y_t = z,  z_t = m² − z² − e^{(p−1)y} + μe^{2t},
//! and E = ½w_t² − ½m²w² + w^{p+1}/(p+1) obeys E_t = μe^{2t}w w_t. A solution is regular at
//! the origin iff E → 0 as t → −∞. Integrating backward keeps every phase stable (the plateau
//! z ≈ −m attracts backward), so bubbles with u(0) ~ e^{1000s} are reachable in doubles.

use alloc::vec::Vec;

use crate::mathx::{exp, ln, powf, sqrt};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// coefficient 1 on u^p
    Plain,
    /// coefficient n(n−2) on u^p
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingProblem {
    pub n: usize,
    pub mu: f64,
    pub radius: f64,
    pub form: Form,
}

impl ShootingProblem {
    pub fn new(n: usize, mu: f64, radius: f64, form: Form) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain("shooting needs n >= 3"));
        }
        if !(mu > 0.0 && mu.is_finite()) || !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain("mu and R must be positive"));
        }
        Ok(Self { n, mu, radius, form })
    }

    pub fn p(&self) -> f64 {
        (self.n as f64 + 2.0) / (self.n as f64 - 2.0)
    }

    pub fn m(&self) -> f64 {
        0.5 * (self.n as f64 - 2.0)
    }

    pub fn coefficient(&self) -> f64 {
        match self.form {
            Form::Plain => 1.0,
            Form::Normalized => (self.n * (self.n - 2)) as f64,
        }
    }

    /// ln of the factor taking this form to the plain one: u_plain = a^{1/(p−1)} u.
    pub fn ln_shift(&self) -> f64 {
        ln(self.coefficient()) / (self.p() - 1.0)
    }

    pub fn constant(&self) -> f64 {
        powf(self.mu / self.coefficient(), 1.0 / (self.p() - 1.0))
    }

    /// −μu + a·u^p
    pub fn source(&self, u: f64) -> f64 {
        self.coefficient() * powf(u, self.p()) - self.mu * u
    }

    fn source_prime(&self, u: f64) -> f64 {
        self.coefficient() * self.p() * powf(u, self.p() - 1.0) - self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14 }
    }
}

impl Tolerance {
    pub fn halved(self) -> Self {
        Self { rtol: 0.5 * self.rtol, atol: 0.5 * self.atol }
    }
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dp_step<const N: usize, F: FnMut(f64, &[f64; N]) -> [f64; N]>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N]) {
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..N {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    // the seventh stage is evaluated at the 5th-order solution (FSAL)
    let mut y5 = *y;
    for j in 0..6 {
        for i in 0..N {
            y5[i] += h * A[6][j] * k[j][i];
        }
    }
    let mut err = [0.0; N];
    for j in 0..7 {
        for i in 0..N {
            err[i] += h * E[j] * k[j][i];
        }
    }
    (y5, err)
}

enum Flow {
    Go,
    Stop,
}

/// Adaptive driver from t0 toward t1 (either direction). `absolute[i]` drops the relative
/// part of the tolerance for component i. `after` sees each accepted step and may stop the
/// run or rescale the state. Returns the final time.
fn integrate<const N: usize, F, G>(
    mut f: F,
    t0: f64,
    t1: f64,
    y: &mut [f64; N],
    h0: f64,
    tol: Tolerance,
    absolute: [bool; N],
    log_t: bool,
    mut after: G,
) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    G: FnMut(f64, f64, &[f64; N], &mut [f64; N]) -> Flow,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut h = h0.abs().min((t1 - t0).abs()).max(1e-300);
    let mut steps = 0usize;
    while dir * (t1 - t) > 0.0 {
        steps += 1;
        if steps > 5_000_000 {
            return Err(Error::NoConvergence("integrator step budget"));
        }
        // the step no longer moves t
        if h < 4.0 * f64::EPSILON * t.abs() || h < 1e-300 {
            return Err(Error::Stiff { r: if log_t { exp(t) } else { t } });
        }
        let hs = h.min((t1 - t).abs());
        let (yn, err) = dp_step(&mut f, t, y, dir * hs);
        let mut acc = 0.0;
        for i in 0..N {
            let sc = if absolute[i] { tol.atol.max(tol.rtol) } else { tol.atol + tol.rtol * y[i].abs().max(yn[i].abs()) };
            let r = err[i] / sc;
            acc += r * r;
        }
        let en = sqrt(acc / N as f64);
        if !en.is_finite() {
            h = 0.2 * hs;
            continue;
        }
        if en <= 1.0 {
            let told = t;
            t += dir * hs;
            let mut ynew = yn;
            let flow = after(told, t, y, &mut ynew);
            *y = ynew;
            if let Flow::Stop = flow {
                return Ok(t);
            }
            let fac = if en == 0.0 { 5.0 } else { (0.9 * powf(en, -0.2)).clamp(0.2, 5.0) };
            h = hs * fac;
        } else {
            h = hs * (0.9 * powf(en, -0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(t)
}

/// Slope returned when the forward shot leaves the positive, bounded regime.
pub const SENTINEL: f64 = 1e6;
/// Forward shots abort once u exceeds this multiple of max(u0, constant).
pub const BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotEnd {
    Reached,
    /// u crossed zero at this radius
    Crossed(f64),
    /// u exceeded the blow-up bound at this radius
    Exceeded(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    /// u′(R), or ∓SENTINEL
    pub slope: f64,
    pub value: f64,
    pub end: ShotEnd,
}

/// Forward shot from the center; u′(R) or a signed sentinel.
pub fn shoot(pr: &ShootingProblem, u0: f64) -> Result<f64> {
    shoot_with(pr, u0, Tolerance::default()).map(|s| s.slope)
}

pub fn shoot_with(pr: &ShootingProblem, u0: f64, tol: Tolerance) -> Result<Shot> {
    shoot_sampled(pr, u0, tol, None)
}

/// Forward shot that also records (r, u) at every accepted step.
pub fn shoot_sampled(pr: &ShootingProblem, u0: f64, tol: Tolerance, samples: Option<&mut Vec<(f64, f64)>>) -> Result<Shot> {
    forward(pr, u0, tol, samples).map(|(s, _)| s)
}

// Also returns the weak-form ratio |∫(a u^p − μu) r^{n−1}| / ∫a u^p r^{n−1}, with both
// integrals carried as extra ODE states.
fn forward(pr: &ShootingProblem, u0: f64, tol: Tolerance, mut samples: Option<&mut Vec<(f64, f64)>>) -> Result<(Shot, f64)> {
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::Domain("u0 must be positive"));
    }
    let n = pr.n as f64;
    let a = pr.coefficient();
    let p = pr.p();
    // degree-4 Taylor start: u = u0 + αr² + βr⁴
    let f0 = pr.source(u0);
    let alpha = -f0 / (2.0 * n);
    let beta = -pr.source_prime(u0) * alpha / (4.0 * (n + 2.0));
    // shrink the start inside the core of very tall bubbles
    let r0 = 1e-4f64.min(1e-2 / sqrt(pr.source_prime(u0).abs().max(1e-300))).min(0.5 * pr.radius);
    let rn = powf(r0, n) / n;
    let mut y = [
        u0 + alpha * r0 * r0 + beta * r0 * r0 * r0 * r0,
        2.0 * alpha * r0 + 4.0 * beta * r0 * r0 * r0,
        f0 * rn,
        a * powf(u0, p) * rn,
    ];
    if let Some(s) = samples.as_deref_mut() {
        s.push((0.0, u0));
        s.push((r0, y[0]));
    }
    let cap = BLOWUP * u0.max(pr.constant());
    let mut end = ShotEnd::Reached;
    let rhs = |r: f64, s: &[f64; 4]| {
        let u = s[0].max(0.0);
        let w = powf(r, n - 1.0);
        [s[1], -(n - 1.0) / r * s[1] - pr.source(u), pr.source(u) * w, a * powf(u, p) * w]
    };
    integrate(rhs, r0, pr.radius, &mut y, r0, tol, [false; 4], false, |_, r, _, s| {
        if let Some(v) = samples.as_deref_mut() {
            v.push((r, s[0]));
        }
        if s[0] <= 0.0 {
            end = ShotEnd::Crossed(r);
            Flow::Stop
        } else if s[0] > cap {
            end = ShotEnd::Exceeded(r);
            Flow::Stop
        } else {
            Flow::Go
        }
    })?;
    let slope = match end {
        ShotEnd::Reached => y[1],
        ShotEnd::Crossed(_) => -SENTINEL,
        ShotEnd::Exceeded(_) => SENTINEL,
    };
    Ok((Shot { slope, value: y[0], end }, (y[2] / y[3]).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    NonconstantFound,
    NoneFound,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::NonconstantFound => "nonconstant-found",
            Classification::NoneFound => "none-found",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub classification: Classification,
    /// ln u(0) in the problem's own form
    pub ln_u0: f64,
    /// ln u(R)
    pub ln_ur: f64,
    /// u′(R); exactly zero for backward solutions, whose Neumann condition is imposed
    pub slope: f64,
    /// forward re-shot from u(0), when u(0) is small enough for the forward shot to be meaningful
    pub forward_slope: Option<f64>,
    /// |∫(a u^p − μu)| / ∫a u^p over the ball: the integrated equation with u′(R) = 0
    pub weak_residual: f64,
    /// ln(u(R)/constant)
    pub lambda: f64,
    /// final bisection width in λ (zero for forward solutions)
    pub bracket_width: f64,
    /// (r, u) for forward solutions, (ln r, ln u) for backward ones
    pub samples: Vec<(f64, f64)>,
    pub log_samples: bool,
}

impl ShootingResult {
    fn none(pr: &ShootingProblem) -> Self {
        let c = ln(pr.constant());
        Self {
            classification: Classification::NoneFound,
            ln_u0: c,
            ln_ur: c,
            slope: 0.0,
            forward_slope: None,
            weak_residual: 0.0,
            lambda: 0.0,
            bracket_width: 0.0,
            samples: Vec::new(),
            log_samples: false,
        }
    }

    /// ln(max u / min u) on the ball
    pub fn ln_ratio(&self) -> f64 {
        (self.ln_u0 - self.ln_ur).abs()
    }
}

/// Forward bisection plus secant on u0 between two shots of opposite slope sign.
pub fn find_nonconstant(pr: &ShootingProblem, bracket: (f64, f64), tol: Tolerance) -> Result<ShootingResult> {
    let (mut a, mut b) = (ln(bracket.0.min(bracket.1)), ln(bracket.0.max(bracket.1)));
    let c = ln(pr.constant());
    if a <= c && c <= b {
        return Err(Error::Domain("bracket contains the constant solution"));
    }
    let mut fa = shoot_with(pr, exp(a), tol)?.slope;
    let fb = shoot_with(pr, exp(b), tol)?.slope;
    if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
        return Ok(ShootingResult::none(pr));
    }
    // bisection until both ends are genuine slopes and small, then secant
    let mut fbv = fb;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = shoot_with(pr, exp(mid), tol)?.slope;
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fbv = fm;
        }
        if (b - a) < 1e-15 * (1.0 + a.abs()) || (fa.abs() < SENTINEL && fbv.abs() < SENTINEL && fa.abs().max(fbv.abs()) < 1e-3) {
            break;
        }
    }
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fbv);
    let mut best = if f0.abs() < f1.abs() { (x0, f0) } else { (x1, f1) };
    for _ in 0..60 {
        if best.1.abs() < 1e-9 || f1 == f0 {
            break;
        }
        // Illinois-style regula falsi keeps the bracket
        let x = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x > x0.min(x1) && x < x0.max(x1)) {
            break;
        }
        let fx = shoot_with(pr, exp(x), tol)?.slope;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.signum() == f1.signum() {
            f0 *= 0.5;
        } else {
            x0 = x1;
            f0 = f1;
        }
        x1 = x;
        f1 = fx;
    }
    let (x, slope) = best;
    if slope.abs() >= 1e-9 {
        // a jump between sentinel regimes, not a root
        return Ok(ShootingResult::none(pr));
    }
    let mut samples = Vec::new();
    let (shot, weak) = forward(pr, exp(x), tol, Some(&mut samples))?;
    let far = (exp(x - c) - 1.0).abs() > 1e-6;
    Ok(ShootingResult {
        classification: if far { Classification::NonconstantFound } else { Classification::NoneFound },
        ln_u0: x,
        ln_ur: ln(shot.value),
        slope,
        forward_slope: Some(slope),
        weak_residual: weak,
        lambda: ln(shot.value) - c,
        bracket_width: 0.0,
        samples,
        log_samples: false,
    })
}

/// Forward scan over u0/constant ∈ [lo, hi] on a log grid, returning every classified root.
pub fn forward_scan(pr: &ShootingProblem, lo: f64, hi: f64, points: usize, tol: Tolerance) -> Result<Vec<ShootingResult>> {
    let c = pr.constant();
    let grid: Vec<f64> = (0..points)
        .map(|i| c * exp(ln(lo) + (ln(hi) - ln(lo)) * i as f64 / (points - 1) as f64))
        .filter(|u| ((u / c) - 1.0).abs() > 1e-9)
        .collect();
    let slopes = grid.iter().map(|&u| shoot_with(pr, u, tol).map(|s| s.slope)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        let (a, b) = (grid[i], grid[i + 1]);
        if a < c && b > c {
            continue;
        }
        if slopes[i].signum() != slopes[i + 1].signum() {
            let r = find_nonconstant(pr, (a, b), tol)?;
            if r.classification == Classification::NonconstantFound {
                out.push(r);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackEnd {
    /// passed a bubble peak where μe^{2t} is negligible
    Peak,
    /// w reached zero: u changes sign inside the ball
    Crossed,
    /// ran to the floor without a peak (near-constant orbits)
    Floor,
    /// sign settled on the z ≈ −m plateau before the core
    Plateau,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackShot {
    /// sign carries the regularity defect E(−∞); magnitude is scaled by e^{log_scale}
    pub residual: f64,
    pub log_scale: f64,
    pub end: BackEnd,
    pub t_end: f64,
    /// t of the last bubble peak (z = 0 with z rising backward)
    pub t_peak: Option<f64>,
}

impl BackShot {
    /// E/w_R² unscaled (may be ±inf or 0 for extreme shots; only the sign is robust)
    pub fn defect(&self) -> f64 {
        self.residual * exp(self.log_scale)
    }
}

struct BackRun {
    shot: BackShot,
    ln_u0: Option<f64>,
    samples: Vec<(f64, f64)>,
    weak: f64,
}

/// μe^{2t} below this is invisible next to m² in double precision.
const MU_FLOOR: f64 = 1e-18;

fn back_run(pr: &ShootingProblem, lambda: f64, tol: Tolerance, detail: bool) -> Result<BackRun> {
    let m = pr.m();
    let p = pr.p();
    let mu = pr.mu;
    let t0 = ln(pr.radius);
    // work in the plain form; ln u_R = ln u_c + λ
    let ln_uc_plain = ln(pr.constant()) + pr.ln_shift();
    let y_r = ln_uc_plain + lambda + m * t0;
    let ln_mu = ln(mu);
    let t_mu = 0.5 * (ln(MU_FLOOR) - ln_mu);
    // past the core (y ≈ 0 at t ≈ y_R/m) with room to spare
    let t_floor = t_mu.min(y_r / m).min(t0) - 80.0 / m - 40.0;
    if !detail && (p - 1.0) * y_r > ln(1e8) {
        // the nonlinearity swamps everything: w reaches zero within ~e^{−(p−1)y_R/2} of R,
        // long before μ can move E(R) = w_R^{p+1}/(p+1) > 0
        return Ok(BackRun {
            shot: BackShot { residual: 1.0, log_scale: (p - 1.0) * y_r - ln(p + 1.0), end: BackEnd::Crossed, t_end: t0, t_peak: None },
            ln_u0: None,
            samples: Vec::new(),
            weak: f64::NAN,
        });
    }
    // state: y, z, scaled energy e·e^{−K}, and (for detail) the two weak-form integrals
    // scaled by e^{−y_R}
    let mut k = 2.0 * t0 + ln_mu;
    let mut st = [y_r, m, exp((p - 1.0) * y_r - k) / (p + 1.0), 0.0, 0.0];
    let mut t_peak = None;
    let mut end = BackEnd::Floor;
    let mut samples = Vec::new();
    // after the final peak, track the approach to the regular branch z → m
    let mut settling = false;
    let mut best = (f64::INFINITY, 0.0);
    let mut t_settle_end = f64::NEG_INFINITY;
    let mut frozen: Option<(f64, f64)> = None;
    if detail {
        samples.push((t0, y_r - m * t0 - pr.ln_shift()));
    }
    let kk = core::cell::Cell::new(k);
    let rhs = |t: f64, s: &[f64; 5]| {
        let (y, z) = (s[0], s[1]);
        let me = mu * exp(2.0 * t);
        let de = exp(2.0 * t + 2.0 * (y - y_r) + ln_mu - kk.get()) * z;
        let ip = exp(p * y + m * t - y_r);
        let i1 = exp(y + (m + 2.0) * t - y_r);
        [z, m * m - z * z - exp((p - 1.0) * y) + me, de, -ip, -i1]
    };
    let t_end = integrate(rhs, t0, t_floor - 200.0, &mut st, 1e-3, tol, [true, false, false, false, false], true, |_, t, old, s| {
        if detail {
            samples.push((t, s[0] - m * t - pr.ln_shift()));
        }
        if s[1] > 1e6 || !s[0].is_finite() || s[0] < -1e6 {
            end = BackEnd::Crossed;
            return Flow::Stop;
        }
        if settling {
            let d = (s[1] - m).abs();
            if d < best.0 {
                best = (d, s[0] - m * t);
                // u ≈ u0 further in; close both integrals with the flat-core tail e^{...+nt}/n
                let nn = pr.n as f64;
                frozen = Some((s[3] + exp(p * s[0] + m * t - y_r) / nn, s[4] + exp(s[0] + (m + 2.0) * t - y_r) / nn));
            }
            if t < t_settle_end || d > 1e-2 && d > 100.0 * best.0 {
                return Flow::Stop;
            }
            return Flow::Go;
        }
        // peak: z crosses zero upward as t decreases
        if old[1] < 0.0 && s[1] >= 0.0 {
            t_peak = Some(t);
            if detail {
                end = BackEnd::Peak;
                settling = true;
                t_settle_end = t - 60.0 / m;
                return Flow::Go;
            }
            if t < t_mu {
                end = BackEnd::Peak;
                return Flow::Stop;
            }
        }
        // For m ≥ 1 the plateau integrand μe^{2t}w² is constant (m = 1) or grows toward the
        // core, and it only pushes E up, so once E > 0 there its sign is final.
        if !detail && m >= 1.0 && t < t_mu && (s[1] + m).abs() < 1e-6 && s[2] > 0.0 && exp((p - 1.0) * s[0]) < 1e-6 {
            end = BackEnd::Plateau;
            return Flow::Stop;
        }
        if t < t_floor {
            return Flow::Stop;
        }
        // keep the energy integrand O(1)
        let knew = 2.0 * t + 2.0 * (s[0] - y_r) + ln_mu;
        s[2] *= exp(kk.get() - knew);
        kk.set(knew);
        Flow::Go
    })?;
    k = kk.get();
    let (ln_u0, weak) = match frozen {
        Some((ip, i1)) if detail && end == BackEnd::Peak => (Some(best.1 - pr.ln_shift()), ((ip - mu * i1) / ip).abs()),
        _ => (None, f64::NAN),
    };
    Ok(BackRun {
        shot: BackShot { residual: st[2], log_scale: k, end, t_end, t_peak },
        ln_u0,
        samples,
        weak,
    })
}

/// Backward shot from r = R with u(R) = e^λ·constant and u′(R) = 0.
pub fn shoot_back(pr: &ShootingProblem, lambda: f64, tol: Tolerance) -> Result<BackShot> {
    back_run(pr, lambda, tol, false).map(|r| r.shot)
}

/// Family of backward starting heights: λ = ln(u(R)/constant) on log grids of |λ|, below
/// the constant over [lo, neg_hi] and above it over [lo, pos_hi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackBracket {
    pub lo: f64,
    pub neg_hi: f64,
    pub pos_hi: f64,
    pub points: usize,
}

impl Default for BackBracket {
    fn default() -> Self {
        // u(R)/constant ∈ [e^{-1e5}, 1e3]
        Self { lo: 1e-3, neg_hi: 1e5, pos_hi: 6.907755278982137, points: 61 }
    }
}

impl BackBracket {
    pub fn widened(self) -> Self {
        Self { lo: 0.5 * self.lo, neg_hi: 2.0 * self.neg_hi, pos_hi: 2.0 * self.pos_hi, points: self.points }
    }

    pub fn grid(&self) -> (Vec<f64>, Vec<f64>) {
        let side = |hi: f64, sign: f64| -> Vec<f64> {
            (0..self.points)
                .map(|i| sign * exp(ln(self.lo) + (ln(hi) - ln(self.lo)) * i as f64 / (self.points - 1) as f64))
                .collect()
        };
        (side(self.neg_hi, -1.0), side(self.pos_hi, 1.0))
    }
}

/// Backward scan plus sign bisection in λ. Returns the nonconstant solution nearest the
/// constant, if any, and the number of distinct roots seen.
pub fn find_nonconstant_back(pr: &ShootingProblem, bracket: BackBracket, tol: Tolerance) -> Result<(ShootingResult, usize)> {
    let (neg, pos) = bracket.grid();
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for side in [neg, pos] {
        let signs = side
            .iter()
            .map(|&l| shoot_back(pr, l, tol).map(|s| s.residual.signum()))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..side.len() - 1 {
            if signs[i] != signs[i + 1] {
                let (mut a, mut b) = (side[i], side[i + 1]);
                let sa = signs[i];
                while (b - a).abs() > 1e-12 * (1.0 + a.abs()) {
                    let mid = 0.5 * (a + b);
                    if shoot_back(pr, mid, tol)?.residual.signum() == sa {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                roots.push((0.5 * (a + b), (b - a).abs()));
            }
        }
    }
    roots.sort_by(|x, y| x.0.abs().total_cmp(&y.0.abs()));
    let count = roots.len();
    for (lambda, width) in roots {
        if (exp(lambda) - 1.0).abs() <= 1e-6 {
            continue;
        }
        let run = back_run(pr, lambda, tol, true)?;
        let ln_u0 = match (run.shot.end, run.ln_u0) {
            (BackEnd::Peak, Some(v)) => v,
            // a jump of the sign, not a regular solution
            _ => continue,
        };
        let ln_c = ln(pr.constant());
        let forward_slope = if ln_u0 - ln_c < ln(1e8) {
            Some(shoot_with(pr, exp(ln_u0), tol)?.slope)
        } else {
            None
        };
        return Ok((
            ShootingResult {
                classification: Classification::NonconstantFound,
                ln_u0,
                ln_ur: ln_c + lambda,
                slope: 0.0,
                forward_slope,
                weak_residual: run.weak,
                lambda,
                bracket_width: width,
                samples: run.samples,
                log_samples: true,
            },
            count,
        ));
    }
    Ok((ShootingResult::none(pr), count))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyCell {
    pub n: usize,
    pub mu: f64,
    pub classification: Classification,
    pub result: ShootingResult,
    pub roots: usize,
    /// outcome of the forward scan over u(0)/constant ∈ [1e-3, 1e3]
    pub forward: Classification,
    /// same classification with the bracket widened 2× and with the tolerance halved
    pub stable: bool,
}

pub fn dichotomy_cell(n: usize, mu: f64, radius: f64, form: Form, bracket: BackBracket, tol: Tolerance) -> Result<DichotomyCell> {
    let pr = ShootingProblem::new(n, mu, radius, form)?;
    let (result, roots) = find_nonconstant_back(&pr, bracket, tol)?;
    let wide = find_nonconstant_back(&pr, bracket.widened(), tol)?.0.classification;
    let fine = find_nonconstant_back(&pr, bracket, tol.halved())?.0.classification;
    let forward = if forward_scan(&pr, 1e-3, 1e3, 61, tol)?.is_empty() {
        Classification::NoneFound
    } else {
        Classification::NonconstantFound
    };
    let classification = result.classification;
    Ok(DichotomyCell { n, mu, classification, result, roots, forward, stable: wide == classification && fine == classification })
}

/// Sequential scan; callers with threads can map `dichotomy_cell` themselves.
pub fn dichotomy_scan(dims: &[usize], mus: &[f64], radius: f64, form: Form, bracket: BackBracket, tol: Tolerance) -> Result<Vec<DichotomyCell>> {
    let mut out = Vec::new();
    for &n in dims {
        for &mu in mus {
            out.push(dichotomy_cell(n, mu, radius, form, bracket, tol)?);
        }
    }
    Ok(out)
}
