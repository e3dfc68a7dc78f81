//! Run configuration: command-line flags over a TOML file over defaults,
//! validated against the parameters each subcommand uses.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fraclap_dyadic::verify::Tolerances;
use serde::Deserialize;

use crate::error::CliError;

pub const OUTPUT_ENV: &str = "FRACLAP_OUT";
pub const DEFAULT_J: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Sierpinski,
    Halfline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Metric,
    Dyadic,
    Ball,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Metric => "metric",
            Mode::Dyadic => "dyadic",
            Mode::Ball => "ball",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Via {
    Quadrature,
    Haar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Christ,
    Ultrametric,
    Lemma1,
    Lemma2,
    Haar,
    EnergyEquivalence,
    Coercivity,
    Duality,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Christ => "christ",
            Suite::Ultrametric => "ultrametric",
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::Haar => "haar",
            Suite::EnergyEquivalence => "energy-equivalence",
            Suite::Coercivity => "coercivity",
            Suite::Duality => "duality",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Tree,
    Transform,
    Energy,
    Verify(Suite),
    Green,
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::Tree => "tree".into(),
            Command::Transform => "transform".into(),
            Command::Energy => "energy".into(),
            Command::Verify(s) => format!("verify {}", s.as_str()),
            Command::Green => "green".into(),
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with the same keys as the flags
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Deepest level of the dyadic tree
    #[arg(long = "J", value_name = "J")]
    pub j: Option<usize>,
    /// Window exponent: the top cube has scale 2^m0
    #[arg(long)]
    pub m0: Option<u32>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Metric-mode smoothness s
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// Dyadic or ball-mode exponent sigma
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Coercivity threshold: wavelets on cubes of measure <= lambda
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Leaf address, e.g. 4:1111
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for pairwise sums
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory (default: $FRACLAP_OUT, else the current directory)
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// one | random | indicator:ADDRESS | csv:PATH
    #[arg(long)]
    pub function: Option<String>,
    /// Energy evaluation route (dyadic mode only)
    #[arg(long, value_enum)]
    pub via: Option<Via>,
    #[arg(long = "tol-solver")]
    pub tol_solver: Option<f64>,
    #[arg(long = "tol-orthonormality")]
    pub tol_orthonormality: Option<f64>,
    #[arg(long = "tol-parseval")]
    pub tol_parseval: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTolerances {
    solver: Option<f64>,
    orthonormality: Option<f64>,
    parseval: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<ModelName>,
    #[serde(rename = "J")]
    j: Option<usize>,
    m0: Option<u32>,
    mode: Option<Mode>,
    s: Option<f64>,
    sigma: Option<f64>,
    lambda: Option<f64>,
    x: Option<String>,
    seed: Option<u64>,
    workers: Option<usize>,
    output: Option<PathBuf>,
    function: Option<String>,
    via: Option<Via>,
    tolerances: Option<FileTolerances>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    One,
    Random,
    Indicator(String),
    Csv(PathBuf),
}

impl FunctionSpec {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s.split_once(':') {
            _ if s == "one" => Ok(Self::One),
            _ if s == "random" => Ok(Self::Random),
            Some(("indicator", a)) => Ok(Self::Indicator(a.to_string())),
            Some(("csv", p)) => Ok(Self::Csv(PathBuf::from(p))),
            _ => Err(CliError::Usage(format!(
                "unknown function `{s}`; expected one, random, indicator:ADDRESS or csv:PATH"
            ))),
        }
    }
}

/// Fully resolved configuration for one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelName,
    pub j: usize,
    pub m0: u32,
    pub mode: Mode,
    pub s: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub x: Option<String>,
    pub seed: u64,
    pub workers: usize,
    pub output: PathBuf,
    pub function: FunctionSpec,
    pub via: Via,
    pub tolerances: Tolerances,
}

/// Parameters a command reads; anything else supplied is an error.
fn allowed(command: Command, mode: Mode) -> (Vec<&'static str>, Vec<&'static str>) {
    let mut allow = vec!["model", "J", "m0", "output"];
    let mut need = Vec::new();
    let exponent = if mode == Mode::Metric { "s" } else { "sigma" };
    match command {
        Command::Tree => {}
        Command::Transform => allow.extend(["function", "seed"]),
        Command::Energy => {
            allow.extend(["mode", exponent, "function", "seed", "workers", "via"]);
            need.push(exponent);
        }
        Command::Verify(suite) => match suite {
            Suite::Christ | Suite::Ultrametric | Suite::Lemma2 => allow.push("seed"),
            Suite::Lemma1 => {
                allow.extend(["s", "x"]);
                need.push("s");
            }
            Suite::Haar => allow.extend(["seed", "tolerances.orthonormality", "tolerances.parseval"]),
            Suite::EnergyEquivalence => {
                allow.extend(["sigma", "seed", "workers"]);
                need.push("sigma");
            }
            Suite::Coercivity => {
                allow.extend(["lambda", "sigma", "seed", "workers"]);
                need.extend(["lambda", "sigma"]);
            }
            Suite::Duality => {
                allow.extend(["mode", exponent, "seed", "workers"]);
                need.push(exponent);
            }
        },
        Command::Green => {
            allow.extend(["mode", exponent, "lambda", "x", "workers", "tolerances.solver"]);
            need.push(exponent);
        }
    }
    (allow, need)
}

pub fn resolve(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let ft = file.tolerances.clone().unwrap_or_default();

    let mut given = BTreeSet::new();
    macro_rules! pick {
        ($flag:expr, $file:expr, $key:literal) => {{
            let v = $flag.clone().or($file.clone());
            if v.is_some() {
                given.insert($key);
            }
            v
        }};
    }
    let model = pick!(flags.model, file.model, "model");
    let j = pick!(flags.j, file.j, "J");
    let m0 = pick!(flags.m0, file.m0, "m0");
    let mode = pick!(flags.mode, file.mode, "mode");
    let s = pick!(flags.s, file.s, "s");
    let sigma = pick!(flags.sigma, file.sigma, "sigma");
    let lambda = pick!(flags.lambda, file.lambda, "lambda");
    let x = pick!(flags.x, file.x, "x");
    let seed = pick!(flags.seed, file.seed, "seed");
    let workers = pick!(flags.workers, file.workers, "workers");
    let output = pick!(flags.output, file.output, "output");
    let function = pick!(flags.function, file.function, "function");
    let via = pick!(flags.via, file.via, "via");
    let tol_solver = pick!(flags.tol_solver, ft.solver, "tolerances.solver");
    let tol_ortho = pick!(flags.tol_orthonormality, ft.orthonormality, "tolerances.orthonormality");
    let tol_parseval = pick!(flags.tol_parseval, ft.parseval, "tolerances.parseval");

    let mode = mode.unwrap_or(Mode::Metric);
    let (allow, need) = allowed(command, mode);
    let extras: Vec<&str> = given.iter().copied().filter(|k| !allow.contains(k)).collect();
    if !extras.is_empty() {
        return Err(CliError::Usage(format!(
            "`{}` does not use: {}{}",
            command.name(),
            extras.join(", "),
            if given.contains("mode") { format!(" (with mode {})", mode.as_str()) } else { String::new() }
        )));
    }
    let missing: Vec<&str> = need.into_iter().filter(|k| !given.contains(k)).collect();
    if !missing.is_empty() {
        return Err(CliError::Usage(format!(
            "`{}` needs: {}",
            command.name(),
            missing.join(", ")
        )));
    }

    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        solver: tol_solver.unwrap_or(defaults.solver),
        orthonormality: tol_ortho.unwrap_or(defaults.orthonormality),
        parseval: tol_parseval.unwrap_or(defaults.parseval),
    };
    for (name, v) in [
        ("tolerances.solver", tolerances.solver),
        ("tolerances.orthonormality", tolerances.orthonormality),
        ("tolerances.parseval", tolerances.parseval),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
        }
    }
    let workers = workers.unwrap_or(1);
    if workers == 0 {
        return Err(CliError::Usage("workers must be at least 1".into()));
    }
    let via = via.unwrap_or(Via::Quadrature);
    if via == Via::Haar && mode != Mode::Dyadic {
        return Err(CliError::Usage("--via haar needs --mode dyadic".into()));
    }
    let output = output
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let function = match function {
        Some(f) => FunctionSpec::parse(&f)?,
        None => FunctionSpec::Random,
    };

    Ok(RunConfig {
        command,
        model: model.unwrap_or(ModelName::Sierpinski),
        j: j.unwrap_or(DEFAULT_J),
        m0: m0.unwrap_or(0),
        mode,
        s,
        sigma,
        lambda,
        x,
        seed: seed.unwrap_or(0),
        workers,
        output,
        function,
        via,
        tolerances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags::default()
    }

    #[test]
    fn extras_are_named() {
        let mut f = flags();
        f.s = Some(0.5);
        f.lambda = Some(1.0);
        match resolve(Command::Verify(Suite::Haar), &f) {
            Err(CliError::Usage(m)) => assert!(m.contains("s, lambda") || m.contains("lambda, s"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mode_decides_the_exponent() {
        let mut f = flags();
        f.mode = Some(Mode::Dyadic);
        f.s = Some(0.5);
        assert!(resolve(Command::Energy, &f).is_err());
        f.s = None;
        f.sigma = Some(0.5);
        assert!(resolve(Command::Energy, &f).is_ok());
    }

    #[test]
    fn missing_parameters() {
        match resolve(Command::Verify(Suite::Coercivity), &flags()) {
            Err(CliError::Usage(m)) => assert!(m.contains("lambda") && m.contains("sigma")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn function_specs() {
        assert_eq!(FunctionSpec::parse("one").unwrap(), FunctionSpec::One);
        assert_eq!(
            FunctionSpec::parse("indicator:2:13").unwrap(),
            FunctionSpec::Indicator("2:13".into())
        );
        assert!(FunctionSpec::parse("sine").is_err());
    }
}
