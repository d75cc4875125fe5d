//! Run configuration shared by the JSON config file and the command-line flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coin::{dirac_coin, hadamard, Coin2, CoinField, CoinState};
use crate::ctqw::FtdRun;
use crate::error::{Error, Result};

/// Normalization error accepted silently on the initial coin state.
pub const INIT_EXACT_TOL: f64 = 1e-9;
/// Normalization error repaired with a warning; anything larger is rejected.
pub const INIT_REPAIR_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Dtqw,
    Ctqw,
    Classical,
    LimitCheck,
    Crossover,
    DiracCompare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dtqw => "dtqw",
            Command::Ctqw => "ctqw",
            Command::Classical => "classical",
            Command::LimitCheck => "limit-check",
            Command::Crossover => "crossover",
            Command::DiracCompare => "dirac-compare",
        }
    }

    /// Config keys the command reads.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Dtqw => &["command", "output", "format", "coin", "init", "steps", "checkpoints", "samples", "seed"],
            Command::Ctqw => &[
                "command", "output", "format", "gamma", "time", "method", "dt", "window", "T", "alpha", "r", "init",
                "samples", "seed",
            ],
            Command::Classical => &[
                "command", "output", "format", "kind", "p", "steps", "T", "alpha", "r", "time", "window", "samples",
                "seed",
            ],
            Command::LimitCheck => &[
                "command", "output", "format", "walk", "law", "times", "coin", "init", "gamma", "p", "alpha", "r",
            ],
            Command::Crossover => &["command", "output", "format", "alphas", "r", "T", "init"],
            Command::DiracCompare => &["command", "output", "format", "eps", "time", "sigma", "init"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CtqwMethod {
    #[default]
    Exact,
    Integrate,
    Ftd,
    Decomposition,
}

impl CtqwMethod {
    pub fn name(self) -> &'static str {
        match self {
            CtqwMethod::Exact => "exact",
            CtqwMethod::Integrate => "integrate",
            CtqwMethod::Ftd => "ftd",
            CtqwMethod::Decomposition => "decomposition",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalKind {
    #[default]
    Rw,
    Lazy,
    Ctrw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WalkKind {
    #[default]
    Hadamard,
    Dtqw,
    Ctqw,
    Rw,
    Lazy,
    Ftd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    #[default]
    Konno,
    Arcsine,
    Normal,
    #[serde(alias = "ftd_a")]
    #[value(alias = "ftd_a")]
    FtdA,
    #[serde(alias = "bessel_parity")]
    #[value(alias = "bessel_parity")]
    BesselParity,
    #[serde(alias = "mod_bessel")]
    #[value(alias = "mod_bessel")]
    ModBessel,
    Delta,
}

/// Coin as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoinSpec {
    Hadamard,
    Matrix { a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2] },
    DiracEps { eps: f64 },
    /// Diagonal `sqrt(r(T))` with `sqrt(r(T)) = r / T^alpha`, `T` the step count.
    Ftd { alpha: f64, r: f64 },
}

impl CoinSpec {
    /// `hadamard`, `matrix:are,aim,bre,bim,cre,cim,dre,dim`, `dirac_eps:EPS` or `ftd:ALPHA,R`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums = || parse_f64_list(rest);
        match kind.trim() {
            "hadamard" if rest.is_empty() => Ok(CoinSpec::Hadamard),
            "matrix" => {
                let v = nums()?;
                if v.len() != 8 {
                    return Err(Error::Configuration(format!("matrix coin needs 8 numbers, got {}", v.len())));
                }
                Ok(CoinSpec::Matrix { a: [v[0], v[1]], b: [v[2], v[3]], c: [v[4], v[5]], d: [v[6], v[7]] })
            }
            "dirac_eps" => match nums()?.as_slice() {
                [eps] => Ok(CoinSpec::DiracEps { eps: *eps }),
                _ => Err(Error::Configuration("dirac_eps coin needs one number".into())),
            },
            "ftd" => match nums()?.as_slice() {
                [alpha, r] => Ok(CoinSpec::Ftd { alpha: *alpha, r: *r }),
                _ => Err(Error::Configuration("ftd coin needs ALPHA,R".into())),
            },
            _ => Err(Error::Configuration(format!("unknown coin `{s}`"))),
        }
    }

    /// The coin field for a run of `steps` steps.
    pub fn field(&self, steps: u64) -> Result<CoinField> {
        match *self {
            CoinSpec::Ftd { alpha, r } => FtdRun::new(steps.max(1), alpha, r)?.field(),
            _ => CoinField::homogeneous(self.coin()?),
        }
    }

    /// The homogeneous coin; FTD coins need the run length and are rejected.
    pub fn coin(&self) -> Result<Coin2> {
        let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
        match *self {
            CoinSpec::Hadamard => Ok(hadamard()),
            CoinSpec::Matrix { a, b, c: cc, d } => Coin2::new(c(a), c(b), c(cc), c(d)),
            CoinSpec::DiracEps { eps } => {
                if !eps.is_finite() {
                    return Err(Error::Configuration("eps must be finite".into()));
                }
                Ok(dirac_coin(eps))
            }
            CoinSpec::Ftd { .. } => Err(Error::Configuration("ftd coin depends on the run length".into())),
        }
    }
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Configuration(format!("`{x}` is not a number")))
        })
        .collect()
}

/// `re,im`.
pub fn parse_complex_pair(s: &str) -> Result<[f64; 2]> {
    match parse_f64_list(s)?.as_slice() {
        [re, im] => Ok([*re, *im]),
        _ => Err(Error::Configuration(format!("expected RE,IM, got `{s}`"))),
    }
}

/// `qL_re,qL_im,qR_re,qR_im`.
pub fn parse_init(s: &str) -> Result<[[f64; 2]; 2]> {
    match parse_f64_list(s)?.as_slice() {
        [a, b, c, d] => Ok([[*a, *b], [*c, *d]]),
        _ => Err(Error::Configuration(format!("expected qL_re,qL_im,qR_re,qR_im, got `{s}`"))),
    }
}

/// The initial coin state. A norm off by at most [`INIT_REPAIR_TOL`] is
/// rescaled and reported through the returned warning.
pub fn resolve_init(q: [[f64; 2]; 2]) -> Result<(CoinState, Option<String>)> {
    let ql = Complex64::new(q[0][0], q[0][1]);
    let qr = Complex64::new(q[1][0], q[1][1]);
    let n2 = ql.norm_sqr() + qr.norm_sqr();
    if !n2.is_finite() {
        return Err(Error::Configuration("initial state is not finite".into()));
    }
    let err = (n2 - 1.0).abs();
    if err <= INIT_EXACT_TOL {
        return Ok((CoinState::normalized(ql, qr)?, None));
    }
    if err <= INIT_REPAIR_TOL {
        let warn = format!("initial state has |q_L|^2 + |q_R|^2 = {n2}; normalized");
        return Ok((CoinState::normalized(ql, qr)?, Some(warn)));
    }
    Err(Error::Configuration(format!(
        "initial state violates |q_L|^2 + |q_R|^2 = 1: got {n2}"
    )))
}

/// Everything a command may read. Absent fields take documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coin: Option<CoinSpec>,
    /// `[[qL_re, qL_im], [qR_re, qR_im]]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<CtqwMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Half-width of the simulation window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub final_time: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ClassicalKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Configuration(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Configuration(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Fields set in `top` win over those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay_fields!(base, top;
            command, coin, init, steps, checkpoints, gamma, time, method, dt, window, final_time,
            alpha, alphas, r, p, kind, walk, law, times, eps, sigma, output, format, samples, seed)
    }

    pub fn command(&self) -> Result<Command> {
        self.command.ok_or_else(|| Error::Configuration("no command given".into()))
    }

    /// Rejects keys that the command would ignore.
    pub fn check_keys(&self) -> Result<()> {
        let cmd = self.command()?;
        let allowed = cmd.keys();
        let value = serde_json::to_value(self)?;
        let mut extra: Vec<&str> = value
            .as_object()
            .map(|m| m.keys().map(String::as_str).filter(|k| !allowed.contains(k)).collect())
            .unwrap_or_default();
        extra.sort_unstable();
        if !extra.is_empty() {
            return Err(Error::Configuration(format!(
                "option(s) {} not used by command `{}`",
                extra.join(", "),
                cmd.name()
            )));
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// Output path; defaults to `<command>.<csv|json>`.
    pub fn output_path(&self) -> Result<PathBuf> {
        Ok(match &self.output {
            Some(p) => p.clone(),
            None => PathBuf::from(format!("{}.{}", self.command()?.name(), self.format().extension())),
        })
    }

    /// Initial coin state; defaults to `(|L> + i|R>) / sqrt 2`.
    pub fn init_state(&self) -> Result<(CoinState, Option<String>)> {
        match self.init {
            Some(q) => resolve_init(q),
            None => Ok((CoinState::symmetric(), None)),
        }
    }

    pub fn gamma(&self) -> Complex64 {
        let g = self.gamma.unwrap_or([1.0, 0.0]);
        Complex64::new(g[0], g[1])
    }
}

/// Defaults, as listed in `--help`.
pub mod defaults {
    pub const STEPS: u64 = 100;
    pub const TIME: f64 = 10.0;
    pub const DT: f64 = 0.002;
    pub const FINAL_TIME: u64 = 1000;
    pub const ALPHA: f64 = 0.0;
    pub const R: f64 = 0.5;
    pub const P: f64 = 0.5;
    pub const TIMES: [f64; 4] = [125.0, 250.0, 500.0, 1000.0];
    pub const ALPHAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
    pub const EPS: [f64; 3] = [0.04, 0.02, 0.01];
    pub const SIGMA: f64 = 0.1;
}
