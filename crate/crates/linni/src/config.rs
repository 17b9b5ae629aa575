use linni_core::ansatz::{default_c1, lambda6_center, BlowupParams};
use linni_core::green::DomainSpec;
use linni_core::search::Consts6;
use linni_core::{pt, Pt};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Profiles,
    Green,
    AnsatzResidual,
    EnergyVerify,
    ReducedLandscape,
    FindCritical,
    MinmaxCertificate,
    Shoot,
    Dichotomy,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Profiles => "profiles",
            Command::Green => "green",
            Command::AnsatzResidual => "ansatz-residual",
            Command::EnergyVerify => "energy-verify",
            Command::ReducedLandscape => "reduced-landscape",
            Command::FindCritical => "find-critical",
            Command::MinmaxCertificate => "minmax-certificate",
            Command::Shoot => "shoot",
            Command::Dichotomy => "dichotomy",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstOverrides {
    pub c1_frac: Option<f64>,
    pub c2_frac: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
    pub eta6: Option<f64>,
    pub lambda6: Option<f64>,
}

impl ConstOverrides {
    pub fn apply(&self) -> Consts6 {
        let d = Consts6::default();
        Consts6 {
            eta6: self.eta6.unwrap_or(d.eta6),
            lambda6: self.lambda6.unwrap_or(d.lambda6),
            c1_frac: self.c1_frac.unwrap_or(d.c1_frac),
            c2_frac: self.c2_frac.unwrap_or(d.c2_frac),
            c3: self.c3.unwrap_or(d.c3),
            c4: self.c4.unwrap_or(d.c4),
            c5: self.c5.unwrap_or(d.c5),
        }
    }
}

/// Everything a run depends on. Unset fields take per-command defaults; the summary records
/// the resolved values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Option<String>,
    pub dim: Option<usize>,
    pub eps: Vec<f64>,
    pub lambda: Option<f64>,
    pub eta: Option<f64>,
    pub q: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub c1: Option<f64>,
    pub delta: Option<f64>,
    pub consts: ConstOverrides,
    pub mu: Vec<f64>,
    pub dims: Vec<usize>,
    pub u0: Vec<f64>,
    pub radius: Option<f64>,
    pub normalized: bool,
    pub rtol: Option<f64>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    pub seed: u64,
    #[serde(rename = "unsafe")]
    pub unsafe_overrides: bool,
}

pub fn parse_domain(name: &str) -> Result<DomainSpec, String> {
    let d = match name {
        "ball4" => DomainSpec::unit_ball(4),
        "ball6" => DomainSpec::unit_ball(6),
        "cube4" => DomainSpec::unit_cube(4),
        "cube6" => DomainSpec::unit_cube(6),
        "slab4" => DomainSpec::cuboid(4, &[2.5, 1.0, 1.0, 1.0]),
        _ => return Err(format!("unknown domain '{name}' (ball4, ball6, cube4, cube6, slab4)")),
    };
    d.map_err(|e| e.to_string())
}

/// Resolved inputs for one run.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub domain: String,
    pub dim: usize,
    pub eps: Vec<f64>,
    pub lambda: Option<f64>,
    pub eta: Option<f64>,
    pub q: Vec<f64>,
    pub beta: f64,
    pub c1: f64,
    pub delta: f64,
    pub consts: [f64; 7],
    pub mu: Vec<f64>,
    pub dims: Vec<usize>,
    pub u0: Vec<f64>,
    pub radius: f64,
    pub normalized: bool,
    pub rtol: f64,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(rename = "unsafe")]
    pub unsafe_overrides: bool,
    #[serde(skip)]
    pub spec: Option<DomainSpec>,
    #[serde(skip)]
    pub qpt: Pt,
}

impl RunConfig {
    pub fn resolve(&self, cmd: Command) -> Result<Resolved, String> {
        let dim = match (&self.domain, self.dim) {
            (Some(d), Some(n)) => {
                let s = parse_domain(d)?;
                if s.n != n {
                    return Err(format!("domain {d} has dimension {}, not {n}", s.n));
                }
                n
            }
            (Some(d), None) => parse_domain(d)?.n,
            (None, Some(n)) => n,
            (None, None) => 6,
        };
        let needs_domain = !matches!(cmd, Command::Profiles | Command::Shoot | Command::Dichotomy);
        let domain = match &self.domain {
            Some(d) => d.clone(),
            None if cmd == Command::FindCritical && dim == 4 => "slab4".to_string(),
            None if needs_domain && dim != 4 && dim != 6 => return Err(format!("dimension {dim} needs an explicit domain; only 4 and 6 are supported")),
            None if needs_domain => format!("ball{dim}"),
            None => String::new(),
        };
        let spec = if domain.is_empty() { None } else { Some(parse_domain(&domain)?) };
        let eps = if !self.eps.is_empty() {
            self.eps.clone()
        } else {
            match (cmd, dim) {
                (Command::AnsatzResidual, _) => vec![0.1, 0.05, 0.025, 0.0125],
                (Command::EnergyVerify, 6) => vec![0.1, 0.05, 0.025],
                (Command::EnergyVerify, _) => vec![0.05, 0.025],
                (Command::ReducedLandscape | Command::FindCritical, 4) => vec![1e-2, 1e-3, 1e-4],
                (Command::FindCritical, _) => vec![0.05, 0.025, 0.0125],
                (Command::MinmaxCertificate, _) => vec![0.05, 0.025],
                _ => vec![0.05],
            }
        };
        for &e in &eps {
            if !(e > 0.0 && e <= 0.2) {
                return Err(format!("ε = {e} outside (0, 0.2]"));
            }
        }
        let qpt = match (&self.q, &spec) {
            (Some(v), Some(s)) => {
                if v.len() > s.n || v.iter().any(|x| !x.is_finite()) {
                    return Err(format!("Q needs at most {} finite coordinates", s.n));
                }
                pt(v)
            }
            (Some(_), None) => return Err("Q given but the command takes no domain".into()),
            (None, Some(s)) => s.center(),
            (None, None) => [0.0; 6],
        };
        let consts = self.consts.apply();
        let c1 = match (self.c1, &spec) {
            (Some(c), _) => c,
            (None, Some(s)) if s.n == 4 => default_c1(s),
            _ => 0.0,
        };
        let r = Resolved {
            command: cmd.name(),
            domain,
            dim,
            eps,
            lambda: self.lambda,
            eta: self.eta,
            q: qpt[..spec.map_or(0, |s| s.n)].to_vec(),
            beta: self.beta.unwrap_or(0.3),
            c1,
            delta: self.delta.unwrap_or(0.1),
            consts: [consts.c1_frac, consts.c2_frac, consts.c3, consts.c4, consts.c5, consts.eta6, consts.lambda6],
            mu: if self.mu.is_empty() { vec![0.1, 0.05, 0.02] } else { self.mu.clone() },
            dims: if self.dims.is_empty() { vec![3, 4, 5, 6, 7] } else { self.dims.clone() },
            u0: if self.u0.is_empty() { vec![0.5, 2.0] } else { self.u0.clone() },
            radius: self.radius.unwrap_or(1.0),
            normalized: self.normalized,
            rtol: self.rtol.unwrap_or(1e-12),
            grid: self.grid.unwrap_or(if dim == 6 { 16 } else { 32 }),
            samples: self.samples.unwrap_or(41),
            seed: self.seed,
            unsafe_overrides: self.unsafe_overrides,
            spec,
            qpt,
        };
        r.validate(cmd)?;
        Ok(r)
    }
}

impl Resolved {
    pub fn consts6(&self) -> Consts6 {
        let c = self.consts;
        Consts6 { c1_frac: c[0], c2_frac: c[1], c3: c[2], c4: c[3], c5: c[4], eta6: c[5], lambda6: c[6] }
    }

    fn validate(&self, cmd: Command) -> Result<(), String> {
        if let Some(s) = &self.spec {
            if !s.contains(&self.qpt) {
                return Err("Q must lie inside the domain".into());
            }
        }
        if !(self.radius > 0.0) || !self.mu.iter().all(|m| *m > 0.0 && m.is_finite()) {
            return Err("radius and μ must be positive".into());
        }
        if self.dims.iter().any(|n| *n < 3) || self.dim < 3 {
            return Err("dimensions must be at least 3".into());
        }
        if !(self.rtol > 0.0 && self.rtol < 1e-3) {
            return Err("rtol must lie in (0, 1e-3)".into());
        }
        if self.u0.iter().any(|u| !(*u > 0.0 && u.is_finite())) {
            return Err("u0 ratios must be positive".into());
        }
        if self.unsafe_overrides {
            return Ok(());
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(format!("β = {} outside (0, 1/2); pass --unsafe to override", self.beta));
        }
        let Some(s) = &self.spec else { return Ok(()) };
        if !(self.delta > 0.0 && s.boundary_distance(&self.qpt) >= self.delta) {
            return Err(format!("Q must stay δ = {} away from the boundary; pass --unsafe to override", self.delta));
        }
        let uses_params = matches!(cmd, Command::AnsatzResidual | Command::EnergyVerify);
        if uses_params && s.n == 4 {
            if let Some(l) = self.lambda {
                for &e in &self.eps {
                    let (lo, hi) = BlowupParams::lambda_box4(e, self.beta);
                    if !(lo <= l && l <= hi) {
                        return Err(format!("Λ = {l} outside [Λ₄,₁, Λ₄,₂] = [{lo:.3e}, {hi:.3e}] at ε = {e}; pass --unsafe to override"));
                    }
                }
            }
        }
        if uses_params && s.n == 6 {
            let k = self.consts6();
            if let Some(eta) = self.eta {
                if (eta - 1.0 / 48.0).abs() > k.eta6 {
                    return Err(format!("|η − 1/48| > η₆ = {}; pass --unsafe to override", k.eta6));
                }
            }
            if let Some(l) = self.lambda {
                let sc = s.cn * l * l / s.volume;
                if (sc - 1.0 / 96.0).abs() > k.lambda6 {
                    return Err(format!("|c₆Λ²/|Ω| − 1/96| > Λ₆ = {} (Λ center {:.6e}); pass --unsafe to override", k.lambda6, lambda6_center(s)));
                }
            }
        }
        Ok(())
    }
}
