//! Resolution of flags, configuration file and defaults into a validated run.
//!
//! The configuration file is flat TOML; every key is optional and mirrors a flag
//! with dashes turned into underscores:
//!
//! ```toml
//! j = "3/2"
//! m = "1/2"
//! delta = "-1"
//! eps = 1.3
//! eps_im = 0.0
//! mass = 0.7
//! omega = 0.7854
//! from = 0.3
//! to = 1.2
//! tol = 1e-10
//! seed = 7
//! out_dir = "runs/a"
//! points = 20
//! endpoint = "both"
//! launch = 3
//! compatible = true
//! raw = false
//! js = ["1/2", "3/2"]
//! deltas = ["+1", "-1"]
//! eps_list = [1.3, 2.0]
//! masses = [0.0, 0.7]
//! threads = 4
//! ```

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spin32_core::ansatz::ModeLabel;
use spin32_core::profile::Endpoint;
use spin32_core::{Complex64, HalfInt, Parity};

use crate::args::{Cli, Command, EndpointChoice, ModeArgs, RangeArgs, Suite};
use crate::error::{usage, CliError};

pub const OUT_DIR_ENV: &str = "SPIN32_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "spin32-out";
pub const DEFAULT_SEED: u64 = 20240601;
const DEFAULT_TOL: f64 = 1e-10;
const TOL_RANGE: (f64, f64) = (1e-14, 1e-4);

/// Integer or string, so `delta = -1` and `delta = "-1"` both work.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum Label {
    Int(i64),
    Text(String),
}

impl Label {
    fn text(&self) -> String {
        match self {
            Label::Int(i) => i.to_string(),
            Label::Text(s) => s.clone(),
        }
    }
}

/// Integer or float, so `mass = 0` is accepted.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn value(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(x) => x,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    j: Option<String>,
    m: Option<String>,
    delta: Option<Label>,
    eps: Option<Number>,
    eps_im: Option<Number>,
    mass: Option<Number>,
    omega: Option<Number>,
    from: Option<Number>,
    to: Option<Number>,
    tol: Option<Number>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    points: Option<usize>,
    endpoint: Option<String>,
    launch: Option<usize>,
    compatible: Option<bool>,
    raw: Option<bool>,
    js: Option<Vec<String>>,
    deltas: Option<Vec<Label>>,
    eps_list: Option<Vec<Number>>,
    masses: Option<Vec<Number>>,
    threads: Option<usize>,
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .or_else(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).or_else(|e| usage(format!("invalid config {}: {e}", path.display())))
}

/// One fully specified mode.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Mode {
    pub j: HalfInt,
    pub m: HalfInt,
    pub delta: Parity,
    /// Energy as `[re, im]`.
    pub eps: [f64; 2],
    pub mass: f64,
}

impl Mode {
    pub fn label(&self) -> ModeLabel {
        ModeLabel::new(
            self.j,
            self.m,
            Complex64::new(self.eps[0], self.eps[1]),
            self.mass,
        )
        .expect("validated when resolved")
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Task {
    Verify {
        suite: &'static str,
        js: Vec<HalfInt>,
        points: Option<usize>,
    },
    Reduce {
        mode: Mode,
        omega: f64,
    },
    Indices {
        mode: Mode,
        endpoints: Vec<Endpoint>,
    },
    Integrate {
        mode: Mode,
        range: Range,
        launch: Option<usize>,
        compatible: bool,
        raw: bool,
    },
    Sweep {
        modes: Vec<Mode>,
        range: Range,
        threads: Option<usize>,
    },
}

impl Task {
    /// Stem shared by the data files and manifest of this command.
    pub fn stem(&self) -> String {
        match self {
            Task::Verify { suite, .. } => format!("verify-{suite}"),
            Task::Reduce { .. } => "reduce".into(),
            Task::Indices { .. } => "indices".into(),
            Task::Integrate { .. } => "integrate".into(),
            Task::Sweep { .. } => "sweep".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(flatten)]
    pub task: Task,
}

pub fn parse_j(s: &str) -> Result<HalfInt, CliError> {
    let j = HalfInt::parse_half_odd(s)?;
    if j.twice() <= 0 {
        return usage(format!("j must be positive, got {s}"));
    }
    Ok(j)
}

fn parse_parity(s: &str) -> Result<Parity, CliError> {
    Ok(s.parse()?)
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        usage(format!("{name} must be finite, got {x}"))
    }
}

fn interior(name: &str, w: f64) -> Result<f64, CliError> {
    if w > 0.0 && w < FRAC_PI_2 {
        Ok(w)
    } else {
        usage(format!("{name} must lie inside (0, pi/2), got {w}"))
    }
}

fn mode_of(
    j: HalfInt,
    m: Option<&str>,
    delta: Parity,
    eps: [f64; 2],
    mass: f64,
) -> Result<Mode, CliError> {
    let m = match m {
        Some(s) => HalfInt::parse_half_odd(s)?,
        None => HalfInt::from_twice(1),
    };
    let mode = Mode {
        j,
        m,
        delta,
        eps: [finite("eps", eps[0])?, finite("eps_im", eps[1])?],
        mass: finite("mass", mass)?,
    };
    ModeLabel::new(mode.j, mode.m, Complex64::new(eps[0], eps[1]), mode.mass)?;
    Ok(mode)
}

fn resolve_mode(a: &ModeArgs, f: &FileConfig) -> Result<Mode, CliError> {
    let j = parse_j(a.j.as_deref().or(f.j.as_deref()).unwrap_or("1/2"))?;
    let delta = match a
        .delta
        .clone()
        .or_else(|| f.delta.as_ref().map(Label::text))
    {
        Some(s) => parse_parity(&s)?,
        None => Parity::Plus,
    };
    let eps = [
        a.eps.or(f.eps.map(Number::value)).unwrap_or(1.3),
        a.eps_im.or(f.eps_im.map(Number::value)).unwrap_or(0.0),
    ];
    let mass = a.mass.or(f.mass.map(Number::value)).unwrap_or(0.7);
    mode_of(j, a.m.as_deref().or(f.m.as_deref()), delta, eps, mass)
}

fn resolve_range(a: &RangeArgs, f: &FileConfig) -> Result<Range, CliError> {
    let from = interior("from", a.from.or(f.from.map(Number::value)).unwrap_or(0.3))?;
    let to = interior("to", a.to.or(f.to.map(Number::value)).unwrap_or(1.2))?;
    if from >= to {
        return usage(format!(
            "inverted range: from = {from} must be below to = {to}"
        ));
    }
    let tol = a.tol.or(f.tol.map(Number::value)).unwrap_or(DEFAULT_TOL);
    if !(tol >= TOL_RANGE.0 && tol <= TOL_RANGE.1) {
        return usage(format!(
            "tol must lie in [{:e}, {:e}], got {tol:e}",
            TOL_RANGE.0, TOL_RANGE.1
        ));
    }
    Ok(Range { from, to, tol })
}

fn resolve_out_dir(cli: &Cli, f: &FileConfig) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| f.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let out_dir = resolve_out_dir(cli, &file);
    let seed_of = |flag: Option<u64>| flag.or(file.seed).unwrap_or(DEFAULT_SEED);
    let (seed, task) = match &cli.command {
        Command::Verify(a) => {
            let js = match a.j.as_deref().or(file.j.as_deref()) {
                Some(s) => vec![parse_j(s)?],
                None => match a.suite {
                    Suite::Wigner => [1, 3, 5, 7].map(HalfInt::from_twice).to_vec(),
                    _ => [1, 3, 5].map(HalfInt::from_twice).to_vec(),
                },
            };
            let points = a.points.or(file.points);
            if points == Some(0) {
                return usage("points must be positive");
            }
            let task = Task::Verify {
                suite: a.suite.name(),
                js,
                points,
            };
            (seed_of(a.seed), task)
        }
        Command::Reduce(a) => {
            let omega = a.omega.or(file.omega.map(Number::value)).unwrap_or(0.7854);
            let task = Task::Reduce {
                mode: resolve_mode(&a.mode, &file)?,
                omega: interior("omega", omega)?,
            };
            (seed_of(None), task)
        }
        Command::Indices(a) => {
            let choice = match (a.endpoint, file.endpoint.as_deref()) {
                (Some(c), _) => c,
                (None, Some("origin")) => EndpointChoice::Origin,
                (None, Some("horizon")) => EndpointChoice::Horizon,
                (None, Some("both")) | (None, None) => EndpointChoice::Both,
                (None, Some(other)) => {
                    return usage(format!(
                        "endpoint must be origin, horizon or both, got {other:?}"
                    ))
                }
            };
            let endpoints = match choice {
                EndpointChoice::Origin => vec![Endpoint::Origin],
                EndpointChoice::Horizon => vec![Endpoint::Horizon],
                EndpointChoice::Both => vec![Endpoint::Origin, Endpoint::Horizon],
            };
            let task = Task::Indices {
                mode: resolve_mode(&a.mode, &file)?,
                endpoints,
            };
            (seed_of(None), task)
        }
        Command::Integrate(a) => {
            let launch = a.launch.or(file.launch);
            let raw = a.raw || file.raw.unwrap_or(false);
            if raw && launch.is_some() {
                return usage("raw and launch cannot be combined");
            }
            let range = resolve_range(&a.range, &file)?;
            if launch.is_some() && range.from >= 0.5 {
                return usage(format!(
                    "an origin launch needs from < 0.5, got {}",
                    range.from
                ));
            }
            let task = Task::Integrate {
                mode: resolve_mode(&a.mode, &file)?,
                range,
                launch,
                compatible: a.compatible || file.compatible.unwrap_or(false),
                raw,
            };
            (seed_of(a.range.seed), task)
        }
        Command::Sweep(a) => {
            let js = match a.js.clone().or_else(|| file.js.clone()) {
                Some(v) => v
                    .iter()
                    .map(|s| parse_j(s))
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![HalfInt::from_twice(1), HalfInt::from_twice(3)],
            };
            let deltas = match a.deltas.clone().or_else(|| {
                file.deltas
                    .as_ref()
                    .map(|v| v.iter().map(Label::text).collect())
            }) {
                Some(v) => v
                    .iter()
                    .map(|s| parse_parity(s))
                    .collect::<Result<Vec<_>, _>>()?,
                None => Parity::BOTH.to_vec(),
            };
            let eps_list = a
                .eps_list
                .clone()
                .or_else(|| {
                    file.eps_list
                        .as_ref()
                        .map(|v| v.iter().map(|n| n.value()).collect())
                })
                .unwrap_or_else(|| vec![1.3]);
            let masses = a
                .masses
                .clone()
                .or_else(|| {
                    file.masses
                        .as_ref()
                        .map(|v| v.iter().map(|n| n.value()).collect())
                })
                .unwrap_or_else(|| vec![0.7]);
            let mut modes = Vec::new();
            for &j in &js {
                for &delta in &deltas {
                    for &e in &eps_list {
                        for &mass in &masses {
                            modes.push(mode_of(j, None, delta, [e, 0.0], mass)?);
                        }
                    }
                }
            }
            if modes.is_empty() {
                return usage("sweep has no jobs");
            }
            let threads = a.threads.or(file.threads);
            if threads == Some(0) {
                return usage("threads must be positive");
            }
            let task = Task::Sweep {
                modes,
                range: resolve_range(&a.range, &file)?,
                threads,
            };
            (seed_of(a.range.seed), task)
        }
    };
    Ok(RunConfig {
        seed,
        out_dir,
        task,
    })
}
