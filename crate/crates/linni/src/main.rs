use clap::Parser;
use linni::config::{Command, RunConfig};
use linni::run::{run, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "linni", version, about = "Numerical checks of the blow-up construction for the Lin-Ni problem in n = 4 and n = 6")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config; flags given on the command line win
    #[arg(long)]
    config: Option<PathBuf>,
    /// ball4, ball6, cube4, cube6 or slab4 ([0,2.5]×[0,1]³)
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// concentration point, zero padded
    #[arg(long = "Q", value_delimiter = ',', allow_hyphen_values = true)]
    q: Option<Vec<f64>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "C3")]
    c3: Option<f64>,
    #[arg(long = "C4")]
    c4: Option<f64>,
    #[arg(long = "C5")]
    c5: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    mu: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// u(0)/constant ratios for `shoot`
    #[arg(long, value_delimiter = ',')]
    u0: Vec<f64>,
    #[arg(long)]
    radius: Option<f64>,
    /// use the normalized form with coefficient n(n−2) on the power
    #[arg(long)]
    normalized: bool,
    #[arg(long)]
    rtol: Option<f64>,
    /// grid oracle cells per axis
    #[arg(long)]
    grid: Option<usize>,
    /// landscape samples
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// allow parameters outside the admissible boxes
    #[arg(long = "unsafe")]
    unsafe_overrides: bool,
    #[arg(long, env = "LINNI_JOBS")]
    jobs: Option<usize>,
    /// output directory (default linni-out/<command>)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(cli: &Cli) -> Result<RunConfig, RunError> {
    let mut c = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(RunError::Io)?;
            serde_json::from_str(&text).map_err(|e| RunError::Invalid(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => { $( if cli.$f.is_some() { c.$f = cli.$f.clone(); } )* };
    }
    set!(domain, dim, lambda, eta, q, beta, c1, delta, radius, rtol, grid, samples);
    macro_rules! list {
        ($($f:ident),*) => { $( if !cli.$f.is_empty() { c.$f = cli.$f.clone(); } )* };
    }
    list!(eps, mu, dims, u0);
    if cli.c3.is_some() {
        c.consts.c3 = cli.c3;
    }
    if cli.c4.is_some() {
        c.consts.c4 = cli.c4;
    }
    if cli.c5.is_some() {
        c.consts.c5 = cli.c5;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    c.normalized |= cli.normalized;
    c.unsafe_overrides |= cli.unsafe_overrides;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 || rayon::ThreadPoolBuilder::new().num_threads(j).build_global().is_err() {
            eprintln!("invalid --jobs {j}");
            return ExitCode::from(2);
        }
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("linni-out").join(cli.command.name()));
    let result = load(&cli).and_then(|c| run(cli.command, &c, &out));
    match result {
        Ok(s) => {
            for a in &s.assertions {
                println!("{} {} = {:.6e} (target {:.6e}, tol {:.1e})", if a.pass { "PASS" } else { "FAIL" }, a.name, a.value, a.target, a.tolerance);
            }
            let failed = s.assertions.iter().filter(|a| !a.pass).count();
            println!("{} assertions, {failed} failed; artifacts in {}", s.assertions.len(), out.display());
            ExitCode::from(if failed == 0 { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("linni {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
