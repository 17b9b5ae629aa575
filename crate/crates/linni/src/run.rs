use crate::checks::{self, FieldSpec, ShootSetup};
use crate::config::{Command, Resolved, RunConfig};
use crate::report::{self, Section};
use linni_core::green::Shape;
use linni_core::shooting::{BackBracket, Form, Tolerance};
use linni_core::Error;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum RunError {
    Invalid(String),
    Numerical(Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invalid(_) | RunError::Io(_) | RunError::Numerical(Error::Domain(_)) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Invalid(m) => write!(f, "invalid configuration: {m}"),
            RunError::Numerical(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numerical(e)
    }
}

fn field_spec(r: &Resolved) -> Result<FieldSpec, RunError> {
    let domain = r.spec.ok_or_else(|| RunError::Invalid("no domain".into()))?;
    Ok(FieldSpec { domain, lambda: r.lambda, eta: r.eta, q: r.qpt, c1: (domain.n == 4).then_some(r.c1) })
}

fn shoot_setup(r: &Resolved) -> ShootSetup {
    ShootSetup {
        radius: r.radius,
        form: if r.normalized { Form::Normalized } else { Form::Plain },
        bracket: BackBracket::default(),
        tol: Tolerance { rtol: r.rtol, atol: 1e-2 * r.rtol },
    }
}

/// Runs one pipeline and returns its section; nothing is written.
pub fn execute(cmd: Command, r: &Resolved) -> Result<Section, RunError> {
    let mut s = Section::default();
    let need = |n: &[usize]| {
        if n.contains(&r.dim) {
            Ok(())
        } else {
            Err(RunError::Invalid(format!("{} supports n in {n:?}, got {}", cmd.name(), r.dim)))
        }
    };
    match cmd {
        Command::Profiles => s.merge(checks::profiles()?),
        Command::Green => {
            let d = r.spec.unwrap();
            s.merge(checks::green(&d, &r.qpt, r.samples)?);
            if matches!(d.shape, Shape::Box { .. }) {
                s.merge(checks::grid_oracle(&d, &r.qpt, r.grid)?);
            }
        }
        Command::AnsatzResidual => {
            need(&[4, 6])?;
            let f = field_spec(r)?;
            s.merge(checks::residual_decay(&f, &r.eps)?);
            s.merge(checks::derivatives(&f, r.eps[0], 100, r.seed)?);
            s.merge(checks::gram(&f, (0.02, 0.01))?);
        }
        Command::EnergyVerify => {
            need(&[4, 6])?;
            s.merge(checks::energy(&field_spec(r)?, &r.eps)?);
        }
        Command::ReducedLandscape => {
            need(&[4, 6])?;
            let d = r.spec.unwrap();
            if r.dim == 4 {
                s.merge(checks::f_only_max(&d, &r.eps, r.beta, r.delta, r.c1)?);
            } else {
                s.merge(checks::stationarity(&d)?);
                s.merge(checks::f_landscape(&d)?);
            }
        }
        Command::FindCritical => {
            need(&[4, 6])?;
            let d = r.spec.unwrap();
            if r.dim == 4 {
                s.merge(checks::full_max4(&d, &r.eps, r.beta, r.delta, r.c1)?);
            } else {
                s.merge(checks::saddle6(&d, &r.eps, r.consts6())?);
            }
        }
        Command::MinmaxCertificate => {
            need(&[6])?;
            s.merge(checks::certificate(&r.spec.unwrap(), &r.eps, r.consts6(), r.seed)?);
        }
        Command::Shoot => s.merge(checks::shoot(r.dim, r.mu[0], &r.u0, shoot_setup(r))?),
        Command::Dichotomy => s.merge(checks::dichotomy(&r.dims, &r.mu, shoot_setup(r))?),
    }
    Ok(s)
}

/// Resolves, runs and writes `summary.json` plus CSVs into `out`. Returns whether every
/// assertion passed.
pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Section, RunError> {
    let r = cfg.resolve(cmd).map_err(RunError::Invalid)?;
    let s = execute(cmd, &r)?;
    report::write_run(out, cmd.name(), &r, &s).map_err(RunError::Io)?;
    Ok(s)
}
