//! Command-line front end: argument parsing, input resolution and report output.

pub mod commands;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qwcat::dynamics::{parse_state, StateVector};
use qwcat::{parse_walk, registry, QwError, WalkDefinition};
use serde::{Deserialize, Serialize};

pub use report::{emit_report, parse_report, Report};

/// Exit status for a mathematically negative answer.
pub const EXIT_NEGATIVE: u8 = 3;
/// Exit status for any failure.
pub const EXIT_ERROR: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "qwcat", version, about = "Homogeneous quantum walks: simulation, spectra, intertwiners, continuous-time realizations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Tracking grid points per 2π (power of two, at least 512).
    #[arg(long, global = true)]
    pub grid: Option<usize>,

    /// Window size in sites for k-space materializations.
    #[arg(long, global = true)]
    pub window: Option<usize>,

    /// Number of time steps.
    #[arg(long, global = true)]
    pub t: Option<u64>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Walks are JSON files or registry names such as `@coin(0.6)`. States are
/// JSON files, `@delta(x[,y]:j)` or `@gaussian(center,sigma,momentum)`.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a walk for unitarity and report its shape.
    Validate { walk: String },
    /// Evolve a state; several walks are applied as a periodic schedule.
    Simulate {
        #[arg(required = true)]
        walks: Vec<String>,
        /// Initial state; defaults to `@delta(0:0)`.
        #[arg(long)]
        init: Option<String>,
    },
    /// Velocity distribution of the evolved state.
    Velocity {
        #[arg(required = true)]
        walks: Vec<String>,
        /// Initial state; defaults to `@delta(0:0)`.
        #[arg(long)]
        init: Option<String>,
    },
    /// Characteristic function of the velocity distribution on a k-grid.
    Charfn {
        #[arg(required = true)]
        walks: Vec<String>,
        /// Initial state; defaults to `@delta(0:0)`.
        #[arg(long)]
        init: Option<String>,
        /// `start:end:count`.
        #[arg(long, default_value = "-3:3:16")]
        kgrid: String,
    },
    /// Eigenvalue branches with periods and winding numbers.
    Spectrum { walk: String },
    /// Weak limit of the velocity distribution.
    Limit {
        walk: String,
        /// Initial state; defaults to `@delta(0:0)`.
        #[arg(long)]
        init: Option<String>,
    },
    /// Decomposition into model walks at minimal periods.
    Decompose { walk: String },
    /// Uniform intertwiners between two walks.
    Intertwine {
        left: String,
        right: String,
        /// Materialize the intertwiner and measure its defect.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 20)]
        states: usize,
    },
    /// Realizability by a continuous-time walk.
    Ctqw {
        walk: String,
        /// Construct the generator.
        #[arg(long)]
        build: bool,
        /// Compare its time-one map with the walk.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// List the built-in walks.
    Examples {
        /// Also write each walk as JSON into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

/// Echo of everything that determines a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<String>,
    pub init: Option<String>,
    pub grid: Option<usize>,
    pub window: Option<usize>,
    pub t: Option<u64>,
    pub seed: u64,
    pub out: Option<String>,
    pub format: Format,
    pub kgrid: Option<String>,
    pub build: bool,
    pub verify: bool,
    pub trials: Option<usize>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let mut cfg = Self {
            command: String::new(),
            inputs: Vec::new(),
            init: None,
            grid: cli.grid,
            window: cli.window,
            t: cli.t,
            seed: cli.seed,
            out: cli.out.as_ref().map(|p| p.display().to_string()),
            format: cli.format,
            kgrid: None,
            build: false,
            verify: false,
            trials: None,
        };
        let (name, inputs): (&str, Vec<String>) = match &cli.command {
            Command::Validate { walk } => ("validate", vec![walk.clone()]),
            Command::Simulate { walks, init } => {
                cfg.init = init.clone();
                ("simulate", walks.clone())
            }
            Command::Velocity { walks, init } => {
                cfg.init = init.clone();
                ("velocity", walks.clone())
            }
            Command::Charfn { walks, init, kgrid } => {
                cfg.init = init.clone();
                cfg.kgrid = Some(kgrid.clone());
                ("charfn", walks.clone())
            }
            Command::Spectrum { walk } => ("spectrum", vec![walk.clone()]),
            Command::Limit { walk, init } => {
                cfg.init = init.clone();
                ("limit", vec![walk.clone()])
            }
            Command::Decompose { walk } => ("decompose", vec![walk.clone()]),
            Command::Intertwine {
                left,
                right,
                verify,
                states,
            } => {
                cfg.verify = *verify;
                cfg.trials = Some(*states);
                ("intertwine", vec![left.clone(), right.clone()])
            }
            Command::Ctqw {
                walk,
                build,
                verify,
                trials,
            } => {
                cfg.build = *build || *verify;
                cfg.verify = *verify;
                cfg.trials = Some(*trials);
                ("ctqw", vec![walk.clone()])
            }
            Command::Examples { export } => (
                "examples",
                export.iter().map(|p| p.display().to_string()).collect(),
            ),
        };
        cfg.command = name.into();
        cfg.inputs = inputs;
        cfg
    }

    /// Tracking grid, checked to be a power of two of at least 512 points.
    pub fn grid_size(&self) -> Result<usize, QwError> {
        let g = self.grid.unwrap_or(qwcat::spectral::DEFAULT_GRID);
        if g < qwcat::spectral::MIN_GRID || !g.is_power_of_two() {
            return Err(QwError::InvalidArgument(format!(
                "--grid must be a power of two of at least {}, got {g}",
                qwcat::spectral::MIN_GRID
            )));
        }
        Ok(g)
    }
}

/// Registry name (`@name(arg)`) or path to a walk document.
pub fn load_walk(spec: &str) -> Result<WalkDefinition, QwError> {
    if spec.starts_with('@') {
        registry::resolve(spec)
    } else {
        parse_walk(&std::fs::read_to_string(spec)?)
    }
}

/// State argument for a walk of shape `(d, n)`; `δ₀ ⊗ e₀` when absent.
pub fn load_state(spec: Option<&str>, d: usize, n: usize) -> Result<StateVector, QwError> {
    let Some(spec) = spec else {
        return StateVector::delta(d, n, &vec![0; d], 0);
    };
    let state = if let Some(body) = spec.strip_prefix("@delta(").and_then(|s| s.strip_suffix(')')) {
        let (sites, comp) = match body.split_once(':') {
            Some((s, c)) => (s, parse_num::<usize>(c)?),
            None => (body, 0),
        };
        let site = sites.split(',').map(parse_num::<i64>).collect::<Result<Vec<_>, _>>()?;
        StateVector::delta(d, n, &site, comp)?
    } else if let Some(body) = spec.strip_prefix("@gaussian(").and_then(|s| s.strip_suffix(')')) {
        let p = body.split(',').map(parse_num::<f64>).collect::<Result<Vec<_>, _>>()?;
        if p.len() != 3 || d != 1 {
            return Err(QwError::InvalidArgument(
                "@gaussian(center,sigma,momentum) needs three numbers and a 1-D walk".into(),
            ));
        }
        let mut internal = vec![Complex64::default(); n];
        internal[0] = Complex64::new(1.0, 0.0);
        StateVector::gaussian_1d(p[0], p[1], p[2], &internal)?
    } else if spec.starts_with('@') {
        return Err(QwError::InvalidArgument(format!("unknown state shorthand {spec}")));
    } else {
        parse_state(&std::fs::read_to_string(spec)?)?
    };
    if state.dim() != d || state.degree() != n {
        return Err(QwError::DimensionMismatch(format!(
            "state has d = {}, n = {} but the walk has d = {d}, n = {n}",
            state.dim(),
            state.degree()
        )));
    }
    Ok(state)
}

fn parse_num<T: std::str::FromStr>(text: &str) -> Result<T, QwError> {
    text.trim()
        .parse()
        .map_err(|_| QwError::InvalidArgument(format!("cannot parse {text:?} as a number")))
}
