//! The `qwalk` command line.
//!
//! Every command reads an optional JSON config (`--config`) and flags that
//! override it. Data files are written atomically next to a `.meta.json`
//! sidecar. A single JSON line on stdout summarizes the run; failures print
//! one JSON line on stderr and exit with 2 (configuration) or 3 (numerics).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::classical::{ctrw_pmf, lazy_rw, rw_distribution, LazyRun};
use crate::config::{
    defaults, parse_complex_pair, parse_init, ClassicalKind, CoinSpec, Command, CtqwMethod, Format, LawKind,
    RunConfig, WalkKind,
};
use crate::ctqw::{crossover, ctqw_exact, ctqw_integrate, ftd_decomposition, ftd_run, ftd_state, FtdRun};
use crate::dirac::continuum_compare;
use crate::distribution::Distribution;
use crate::dtqw::{evolve, evolve_with_checkpoints};
use crate::error::{Error, Result};
use crate::laws::LimitLaw;
use crate::output::{
    ctqw_rows, distribution_rows, records_to_csv, rows_to_csv, rows_to_json, to_json_bytes, walker_rows,
    write_with_sidecar, SiteRow,
};
use crate::stats::{convergence_sweep, Scaling};

/// Exit status for malformed or inconsistent configuration.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for numerical failures inside an engine.
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Exact one-dimensional quantum and classical walks and their limit laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Discrete-time walk; writes n, re_L, im_L, re_R, im_R, prob.
    Dtqw(DtqwArgs),
    /// Continuous-time walk, or the FTD walk and its two-CTQW decomposition.
    Ctqw(CtqwArgs),
    /// Simple, lazy or continuous-time classical walk.
    Classical(ClassicalArgs),
    /// Kolmogorov distance and moment deviations over a time sweep.
    LimitCheck(LimitCheckArgs),
    /// FTD walk against its limit law for each exponent alpha.
    Crossover(CrossoverArgs),
    /// Walk with coin C(eps) against the Dirac-type continuum solution.
    DiracCompare(DiracArgs),
    /// Run the command named in a config file.
    Run(RunArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file [default: <command>.<format>].
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args, Default)]
pub struct SampleArgs {
    /// Also draw this many positions from the final distribution.
    #[arg(long, requires = "seed")]
    pub samples: Option<usize>,
    /// Seed for --samples.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn coin_arg(s: &str) -> Result<CoinSpec> {
    CoinSpec::parse(s)
}

fn init_arg(s: &str) -> Result<[[f64; 2]; 2]> {
    parse_init(s)
}

fn complex_arg(s: &str) -> Result<[f64; 2]> {
    parse_complex_pair(s)
}

#[derive(Debug, Args, Default)]
pub struct DtqwArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// hadamard | matrix:ARE,AIM,BRE,BIM,CRE,CIM,DRE,DIM | dirac_eps:EPS | ftd:ALPHA,R [default: hadamard].
    #[arg(long, value_parser = coin_arg)]
    pub coin: Option<CoinSpec>,
    /// Initial coin state qL_re,qL_im,qR_re,qR_im [default: (1, i)/sqrt 2].
    #[arg(long, value_parser = init_arg, allow_hyphen_values = true)]
    pub init: Option<[[f64; 2]; 2]>,
    /// Number of steps [default: 100].
    #[arg(long)]
    pub steps: Option<u64>,
    /// Extra steps at which to write <stem>_t<step>.<ext>.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<u64>>,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Args, Default)]
pub struct CtqwArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// exact | integrate (gamma, time) or ftd | decomposition (T, alpha, r, init) [default: exact].
    #[arg(long, value_enum)]
    pub method: Option<CtqwMethod>,
    /// Hopping amplitude RE,IM [default: 1,0].
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub gamma: Option<[f64; 2]>,
    /// Evolution time [default: 10].
    #[arg(long)]
    pub time: Option<f64>,
    /// RK4 step for --method integrate [default: 0.002].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Window half-width [default: |gamma| t + max(40, 10 (|gamma| t)^(1/3))].
    #[arg(long)]
    pub window: Option<i64>,
    /// Final time of the FTD walk [default: 1000].
    #[arg(long = "T")]
    pub final_time: Option<u64>,
    /// Exponent in sqrt(r(T)) = r / T^alpha [default: 0].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Prefactor in sqrt(r(T)) = r / T^alpha [default: 0.5].
    #[arg(long)]
    pub r: Option<f64>,
    /// Initial coin state of the FTD walk.
    #[arg(long, value_parser = init_arg, allow_hyphen_values = true)]
    pub init: Option<[[f64; 2]; 2]>,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Args, Default)]
pub struct ClassicalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// rw (p, steps) | lazy (T, alpha, r) | ctrw (time, window) [default: rw].
    #[arg(long, value_enum)]
    pub kind: Option<ClassicalKind>,
    /// Probability of a step to the right [default: 0.5].
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of steps [default: 100].
    #[arg(long)]
    pub steps: Option<u64>,
    /// Final time of the lazy walk [default: 1000].
    #[arg(long = "T")]
    pub final_time: Option<u64>,
    /// Exponent in r(T) = r / T^alpha [default: 0].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Prefactor in r(T) = r / T^alpha [default: 0.5].
    #[arg(long)]
    pub r: Option<f64>,
    /// Time of the continuous-time walk [default: 10].
    #[arg(long)]
    pub time: Option<f64>,
    /// Window half-width for ctrw.
    #[arg(long)]
    pub window: Option<i64>,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Args, Default)]
pub struct LimitCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Walk whose distribution is swept [default: hadamard].
    #[arg(long, value_enum)]
    pub walk: Option<WalkKind>,
    /// Limit law [default: konno].
    #[arg(long, value_enum)]
    pub law: Option<LawKind>,
    /// Sweep times, strictly increasing [default: 125,250,500,1000].
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Coin for --walk dtqw.
    #[arg(long, value_parser = coin_arg)]
    pub coin: Option<CoinSpec>,
    #[arg(long, value_parser = init_arg, allow_hyphen_values = true)]
    pub init: Option<[[f64; 2]; 2]>,
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub gamma: Option<[f64; 2]>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct CrossoverArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Exponents [default: 0,0.5,1,2].
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Prefactor in sqrt(r(T)) = r / T^alpha [default: 0.5].
    #[arg(long)]
    pub r: Option<f64>,
    /// Final time [default: 1000].
    #[arg(long = "T")]
    pub final_time: Option<u64>,
    #[arg(long, value_parser = init_arg, allow_hyphen_values = true)]
    pub init: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Args, Default)]
pub struct DiracArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Lattice spacings, strictly decreasing [default: 0.04,0.02,0.01].
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Comparison time [default: 1].
    #[arg(long)]
    pub time: Option<f64>,
    /// Width of the Gaussian envelope [default: 0.1].
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_parser = init_arg, allow_hyphen_values = true)]
    pub init: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

fn base(common: &CommonArgs, command: Command) -> (Option<PathBuf>, RunConfig) {
    let cfg = RunConfig {
        command: Some(command),
        output: common.output.clone(),
        format: common.format,
        ..Default::default()
    };
    (common.config.clone(), cfg)
}

impl Sub {
    /// Config file (if any) and the flag overlay.
    fn into_parts(self) -> (Option<PathBuf>, RunConfig) {
        match self {
            Sub::Dtqw(a) => {
                let (file, cfg) = base(&a.common, Command::Dtqw);
                (file, RunConfig {
                    coin: a.coin,
                    init: a.init,
                    steps: a.steps,
                    checkpoints: a.checkpoints,
                    samples: a.sample.samples,
                    seed: a.sample.seed,
                    ..cfg
                })
            }
            Sub::Ctqw(a) => {
                let (file, cfg) = base(&a.common, Command::Ctqw);
                (file, RunConfig {
                    method: a.method,
                    gamma: a.gamma,
                    time: a.time,
                    dt: a.dt,
                    window: a.window,
                    final_time: a.final_time,
                    alpha: a.alpha,
                    r: a.r,
                    init: a.init,
                    samples: a.sample.samples,
                    seed: a.sample.seed,
                    ..cfg
                })
            }
            Sub::Classical(a) => {
                let (file, cfg) = base(&a.common, Command::Classical);
                (file, RunConfig {
                    kind: a.kind,
                    p: a.p,
                    steps: a.steps,
                    final_time: a.final_time,
                    alpha: a.alpha,
                    r: a.r,
                    time: a.time,
                    window: a.window,
                    samples: a.sample.samples,
                    seed: a.sample.seed,
                    ..cfg
                })
            }
            Sub::LimitCheck(a) => {
                let (file, cfg) = base(&a.common, Command::LimitCheck);
                (file, RunConfig {
                    walk: a.walk,
                    law: a.law,
                    times: a.times,
                    coin: a.coin,
                    init: a.init,
                    gamma: a.gamma,
                    p: a.p,
                    alpha: a.alpha,
                    r: a.r,
                    ..cfg
                })
            }
            Sub::Crossover(a) => {
                let (file, cfg) = base(&a.common, Command::Crossover);
                (file, RunConfig { alphas: a.alphas, r: a.r, final_time: a.final_time, init: a.init, ..cfg })
            }
            Sub::DiracCompare(a) => {
                let (file, cfg) = base(&a.common, Command::DiracCompare);
                (file, RunConfig { eps: a.eps, time: a.time, sigma: a.sigma, init: a.init, ..cfg })
            }
            Sub::Run(a) => (Some(a.config), RunConfig::default()),
        }
    }
}

/// Merges the config file and the flags. A file naming a different command
/// than the subcommand is an error.
pub fn parse_config(sub: Sub) -> Result<RunConfig> {
    let (file, flags) = sub.into_parts();
    let cfg = match file {
        Some(path) => {
            let from_file = RunConfig::load(&path)?;
            if let (Some(a), Some(b)) = (from_file.command, flags.command) {
                if a != b {
                    return Err(Error::Configuration(format!(
                        "config file is for `{}`, not `{}`",
                        a.name(),
                        b.name()
                    )));
                }
            }
            from_file.overlay(flags)
        }
        None => flags,
    };
    cfg.command()?;
    cfg.check_keys()?;
    Ok(cfg)
}

/// Outcome of a successful run.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: &'static str,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub summary: Value,
}

/// Rejects fields that the selected variant of a command would ignore.
fn reject(cfg: &RunConfig, keys: &[&str], context: &str) -> Result<()> {
    let v = serde_json::to_value(cfg)?;
    let present: Vec<&str> = keys.iter().copied().filter(|k| v.get(*k).is_some()).collect();
    if present.is_empty() {
        Ok(())
    } else {
        Err(Error::Configuration(format!("option(s) {} not used by {context}", present.join(", "))))
    }
}

fn suffixed(path: &Path, t: u64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_t{t}.{}", ext.to_string_lossy()),
        None => format!("{stem}_t{t}"),
    };
    path.with_file_name(name)
}

fn sample_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_samples.csv"))
}

fn rows_bytes(format: Format, t: f64, rows: &[SiteRow]) -> Result<Vec<u8>> {
    match format {
        Format::Csv => rows_to_csv(rows),
        Format::Json => rows_to_json(t, rows),
    }
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    outputs: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        write_with_sidecar(&path, bytes, self.cfg)?;
        self.outputs.push(path);
        Ok(())
    }

    /// `--samples N --seed S`: positions drawn from `d` with ChaCha8.
    fn samples(&mut self, main: &Path, d: &Distribution) -> Result<()> {
        let Some(n) = self.cfg.samples else { return Ok(()) };
        let seed = self
            .cfg
            .seed
            .ok_or_else(|| Error::Configuration("--samples needs an explicit --seed".into()))?;
        let index = WeightedIndex::new(d.probs()).map_err(|e| Error::invalid(format!("sampling: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        #[derive(Serialize)]
        struct Sample {
            sample: usize,
            n: i64,
        }
        let draws: Vec<Sample> = (0..n)
            .map(|i| Sample { sample: i, n: d.start() + index.sample(&mut rng) as i64 })
            .collect();
        self.write(sample_path(main), &records_to_csv(&draws)?)
    }
}

fn window(cfg: &RunConfig) -> Option<(i64, i64)> {
    cfg.window.map(|h| (-h.abs(), h.abs()))
}

fn run_dtqw(cfg: &RunConfig, w: &mut Writer, warnings: &mut Vec<String>) -> Result<Value> {
    let steps = cfg.steps.unwrap_or(defaults::STEPS);
    let coin = cfg.coin.unwrap_or(CoinSpec::Hadamard);
    let field = coin.field(steps)?;
    let (init, warn) = cfg.init_state()?;
    warnings.extend(warn);
    let out = cfg.output_path()?;
    let mut cps = cfg.checkpoints.clone().unwrap_or_default();
    if let Some(bad) = cps.iter().find(|&&c| c > steps) {
        return Err(Error::Configuration(format!("checkpoint {bad} exceeds steps = {steps}")));
    }
    cps.push(steps);
    let mut total = 0.0;
    let mut last = None;
    evolve_with_checkpoints(&init, &field, &cps, |s| {
        let path = if s.t() == steps { out.clone() } else { suffixed(&out, s.t()) };
        w.write(path, &rows_bytes(cfg.format(), s.t() as f64, &walker_rows(s, None))?)?;
        if s.t() == steps {
            total = s.norm_sqr();
            last = Some(s.distribution());
        }
        Ok(())
    })?;
    if let Some(d) = &last {
        w.samples(&out, d)?;
    }
    Ok(json!({ "steps": steps, "total_probability": total }))
}

fn run_ctqw(cfg: &RunConfig, w: &mut Writer, warnings: &mut Vec<String>) -> Result<Value> {
    let method = cfg.method.unwrap_or_default();
    let out = cfg.output_path()?;
    let fmt = cfg.format();
    let name = Some(method.name());
    match method {
        CtqwMethod::Exact | CtqwMethod::Integrate => {
            reject(cfg, &["T", "alpha", "r", "init"], "ctqw --method exact|integrate")?;
            let gamma = cfg.gamma();
            let t = cfg.time.unwrap_or(defaults::TIME);
            let state = if method == CtqwMethod::Exact {
                reject(cfg, &["dt"], "ctqw --method exact")?;
                ctqw_exact(gamma, t, window(cfg))?
            } else {
                ctqw_integrate(gamma, t, cfg.dt.unwrap_or(defaults::DT), window(cfg))?
            };
            w.write(out.clone(), &rows_bytes(fmt, t, &ctqw_rows(&state, name))?)?;
            w.samples(&out, &state.distribution())?;
            Ok(json!({ "method": method.name(), "time": t, "total_probability": state.norm_sqr() }))
        }
        CtqwMethod::Ftd | CtqwMethod::Decomposition => {
            reject(cfg, &["gamma", "time", "dt", "window"], "ctqw --method ftd|decomposition")?;
            let run = FtdRun::new(
                cfg.final_time.unwrap_or(defaults::FINAL_TIME),
                cfg.alpha.unwrap_or(defaults::ALPHA),
                cfg.r.unwrap_or(defaults::R),
            )?;
            let (init, warn) = cfg.init_state()?;
            warnings.extend(warn);
            let t = run.final_time as f64;
            if method == CtqwMethod::Ftd {
                let state = ftd_state(&run, &init)?;
                w.write(out.clone(), &rows_bytes(fmt, t, &walker_rows(&state, name))?)?;
                w.samples(&out, &state.distribution())?;
                Ok(json!({ "method": "ftd", "T": run.final_time, "t_eff": run.t_eff(), "total_probability": state.norm_sqr() }))
            } else {
                let dec = ftd_decomposition(&run, &init)?;
                w.write(out.clone(), &rows_bytes(fmt, t, &walker_rows(&dec.recombined_state, name))?)?;
                w.samples(&out, &dec.recombined)?;
                Ok(json!({
                    "method": "decomposition",
                    "T": run.final_time,
                    "t_eff": run.t_eff(),
                    "l1_to_direct": dec.l1_to_direct,
                    "total_probability": dec.recombined.total(),
                }))
            }
        }
    }
}

fn run_classical(cfg: &RunConfig, w: &mut Writer) -> Result<Value> {
    let kind = cfg.kind.unwrap_or_default();
    let out = cfg.output_path()?;
    let (d, t, summary) = match kind {
        ClassicalKind::Rw => {
            reject(cfg, &["T", "alpha", "r", "time", "window"], "classical --kind rw")?;
            let p = cfg.p.unwrap_or(defaults::P);
            let steps = cfg.steps.unwrap_or(defaults::STEPS);
            let d = rw_distribution(p, steps)?;
            (d, steps as f64, json!({ "kind": "rw", "p": p, "steps": steps }))
        }
        ClassicalKind::Lazy => {
            reject(cfg, &["p", "steps", "time", "window"], "classical --kind lazy")?;
            let run = LazyRun::new(
                cfg.final_time.unwrap_or(defaults::FINAL_TIME),
                cfg.alpha.unwrap_or(defaults::ALPHA),
                cfg.r.unwrap_or(defaults::R),
            )?;
            let d = lazy_rw(&run)?;
            (d, run.final_time as f64, json!({ "kind": "lazy", "T": run.final_time, "rate": run.rate() }))
        }
        ClassicalKind::Ctrw => {
            reject(cfg, &["p", "steps", "T", "alpha", "r"], "classical --kind ctrw")?;
            let t = cfg.time.unwrap_or(defaults::TIME);
            let h = match cfg.window {
                Some(h) => h.abs(),
                None => t.ceil() as i64 + 40 + (10.0 * t.cbrt()).ceil() as i64,
            };
            let probs = (-h..=h).map(|x| ctrw_pmf(t, x)).collect::<Result<Vec<_>>>()?;
            (Distribution::new(-h, probs)?, t, json!({ "kind": "ctrw", "time": t }))
        }
    };
    w.write(out.clone(), &rows_bytes(cfg.format(), t, &distribution_rows(&d, None))?)?;
    w.samples(&out, &d)?;
    let mut summary = summary;
    summary["total_probability"] = json!(d.total());
    Ok(summary)
}

fn integer_times(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !(t.fract() == 0.0 && **t >= 1.0)) {
        return Err(Error::Configuration(format!("this walk needs positive integer times, got {t}")));
    }
    Ok(())
}

fn run_limit_check(cfg: &RunConfig, w: &mut Writer, warnings: &mut Vec<String>) -> Result<Value> {
    let walk = cfg.walk.unwrap_or_default();
    let law_kind = cfg.law.unwrap_or_default();
    let times = cfg.times.clone().unwrap_or_else(|| defaults::TIMES.to_vec());
    let (init, warn) = cfg.init_state()?;
    warnings.extend(warn);
    let mismatch = || {
        Error::Configuration(format!("law {law_kind:?} is not a limit of walk {walk:?} supported by limit-check"))
    };
    let report = match walk {
        WalkKind::Hadamard | WalkKind::Dtqw => {
            if law_kind != LawKind::Konno {
                return Err(mismatch());
            }
            reject(cfg, &["gamma", "p", "alpha", "r"], "limit-check --walk dtqw")?;
            if walk == WalkKind::Hadamard {
                reject(cfg, &["coin"], "limit-check --walk hadamard")?;
            }
            integer_times(&times)?;
            let coin = cfg.coin.unwrap_or(CoinSpec::Hadamard).coin()?;
            let field = crate::coin::CoinField::homogeneous(coin)?;
            let law = LimitLaw::konno_for(&coin, &init)?;
            convergence_sweep(|t| Ok(evolve(&init, &field, t as u64)?.distribution()), &times, Scaling::Linear, law)?
        }
        WalkKind::Ctqw => {
            if law_kind != LawKind::Arcsine {
                return Err(mismatch());
            }
            reject(cfg, &["coin", "init", "p", "alpha", "r"], "limit-check --walk ctqw")?;
            let gamma = cfg.gamma();
            let law = LimitLaw::arcsine(gamma)?;
            convergence_sweep(|t| Ok(ctqw_exact(gamma, t, None)?.distribution()), &times, Scaling::Linear, law)?
        }
        WalkKind::Rw => {
            if law_kind != LawKind::Normal {
                return Err(mismatch());
            }
            reject(cfg, &["coin", "init", "gamma", "alpha", "r"], "limit-check --walk rw")?;
            integer_times(&times)?;
            let p = cfg.p.unwrap_or(defaults::P);
            let law = LimitLaw::normal(0.0, 1.0)?;
            convergence_sweep(|t| rw_distribution(p, t as u64), &times, Scaling::Standardized { p }, law)?
        }
        WalkKind::Lazy => {
            reject(cfg, &["coin", "init", "gamma", "p"], "limit-check --walk lazy")?;
            integer_times(&times)?;
            let alpha = cfg.alpha.unwrap_or(defaults::ALPHA);
            let r = cfg.r.unwrap_or(defaults::R);
            let build = |t: f64| lazy_rw(&LazyRun::new(t as u64, alpha, r)?);
            match law_kind {
                LawKind::Normal => {
                    convergence_sweep(build, &times, Scaling::LazyCentral { alpha, r }, LimitLaw::normal(0.0, 1.0)?)?
                }
                LawKind::ModBessel if alpha == 1.0 => {
                    convergence_sweep(build, &times, Scaling::Unit, LimitLaw::mod_bessel(r)?)?
                }
                _ => return Err(mismatch()),
            }
        }
        WalkKind::Ftd => {
            reject(cfg, &["coin", "gamma", "p"], "limit-check --walk ftd")?;
            integer_times(&times)?;
            let alpha = cfg.alpha.unwrap_or(defaults::ALPHA);
            let r = cfg.r.unwrap_or(defaults::R);
            let build = |t: f64| ftd_run(&FtdRun::new(t as u64, alpha, r)?, &init);
            let (scaling, law) = match law_kind {
                LawKind::Konno if alpha == 0.0 => {
                    (Scaling::Linear, LimitLaw::konno_for(&crate::coin::ftd_coin(r * r)?, &init)?)
                }
                LawKind::FtdA if alpha > 0.0 && alpha < 1.0 => (Scaling::FtdPower { alpha }, LimitLaw::ftd_a(r, &init)?),
                LawKind::BesselParity if alpha == 1.0 => {
                    let parity = times[0] as u64 % 2;
                    if times.iter().any(|t| *t as u64 % 2 != parity) {
                        return Err(Error::Configuration("bessel-parity sweeps need times of one parity".into()));
                    }
                    (Scaling::Unit, LimitLaw::bessel_parity(r, &init, parity as u8)?)
                }
                LawKind::Delta if alpha > 1.0 => (Scaling::Unit, LimitLaw::delta(0.0)?),
                _ => return Err(mismatch()),
            };
            convergence_sweep(build, &times, scaling, law)?
        }
    };
    let bytes = match cfg.format() {
        Format::Csv => report.to_csv().into_bytes(),
        Format::Json => to_json_bytes(&report)?,
    };
    w.write(cfg.output_path()?, &bytes)?;
    Ok(json!({ "law": report.law.name(), "times": report.times, "ks": report.ks }))
}

fn run_crossover(cfg: &RunConfig, w: &mut Writer, warnings: &mut Vec<String>) -> Result<Value> {
    let (init, warn) = cfg.init_state()?;
    warnings.extend(warn);
    let alphas = cfg.alphas.clone().unwrap_or_else(|| defaults::ALPHAS.to_vec());
    let t = cfg.final_time.unwrap_or(defaults::FINAL_TIME);
    let r = cfg.r.unwrap_or(defaults::R);
    let rows = crossover(t, r, &alphas, &init)?;
    let bytes = match cfg.format() {
        Format::Json => to_json_bytes(&rows)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Flat {
                alpha: f64,
                #[serde(rename = "T")]
                final_time: u64,
                r: f64,
                law: &'static str,
                metric: &'static str,
                scale: f64,
                value: f64,
                p0: f64,
            }
            let flat: Vec<Flat> = rows
                .iter()
                .map(|x| Flat {
                    alpha: x.alpha,
                    final_time: x.final_time,
                    r: x.r,
                    law: x.law.name(),
                    metric: x.metric,
                    scale: x.scale,
                    value: x.value,
                    p0: x.p0,
                })
                .collect();
            records_to_csv(&flat)?
        }
    };
    w.write(cfg.output_path()?, &bytes)?;
    let table: Vec<Value> = rows
        .iter()
        .map(|x| json!({ "alpha": x.alpha, "law": x.law.name(), "metric": x.metric, "value": x.value }))
        .collect();
    Ok(json!({ "rows": table }))
}

fn run_dirac(cfg: &RunConfig, w: &mut Writer, warnings: &mut Vec<String>) -> Result<Value> {
    let (init, warn) = cfg.init_state()?;
    warnings.extend(warn);
    let eps = cfg.eps.clone().unwrap_or_else(|| defaults::EPS.to_vec());
    let t = cfg.time.unwrap_or(1.0);
    let sigma = cfg.sigma.unwrap_or(defaults::SIGMA);
    let rep = continuum_compare(&eps, t, &init, sigma)?;
    let bytes = match cfg.format() {
        Format::Json => to_json_bytes(&rep)?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                eps: f64,
                l2_error: f64,
            }
            let rows: Vec<Row> = rep.eps.iter().zip(&rep.l2_error).map(|(&eps, &l2_error)| Row { eps, l2_error }).collect();
            records_to_csv(&rows)?
        }
    };
    w.write(cfg.output_path()?, &bytes)?;
    Ok(json!({ "l2_error": rep.l2_error, "fitted_order": rep.fitted_order }))
}

/// Executes a merged configuration.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let command = cfg.command()?;
    let mut warnings = Vec::new();
    let mut w = Writer { cfg, outputs: Vec::new() };
    let summary = match command {
        Command::Dtqw => run_dtqw(cfg, &mut w, &mut warnings)?,
        Command::Ctqw => run_ctqw(cfg, &mut w, &mut warnings)?,
        Command::Classical => run_classical(cfg, &mut w)?,
        Command::LimitCheck => run_limit_check(cfg, &mut w, &mut warnings)?,
        Command::Crossover => run_crossover(cfg, &mut w, &mut warnings)?,
        Command::DiracCompare => run_dirac(cfg, &mut w, &mut warnings)?,
    };
    Ok(Outcome { command: command.name(), outputs: w.outputs, warnings, summary })
}

fn module_of(cmd: Option<Command>) -> &'static str {
    match cmd {
        Some(Command::Dtqw) => "dtqw-engine",
        Some(Command::Ctqw) => "ctqw-engine",
        Some(Command::Classical) => "classical-walks",
        Some(Command::LimitCheck) | Some(Command::Crossover) => "stats",
        Some(Command::DiracCompare) => "dirac-continuum",
        None => "cli",
    }
}

/// The single-line JSON error report and exit status for `err`.
pub fn error_line(err: &Error, cfg: Option<&RunConfig>) -> (String, u8) {
    let config = err.is_config();
    let cmd = cfg.and_then(|c| c.command);
    let line = json!({
        "error": if config { "config" } else { "numeric" },
        "module": module_of(cmd),
        "command": cmd.map(Command::name),
        "message": err.to_string(),
        "parameters": cfg.map(|c| serde_json::to_value(c).unwrap_or(Value::Null)),
    });
    (line.to_string(), if config { EXIT_CONFIG } else { EXIT_NUMERIC })
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("QWALK_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Configuration(format!("QWALK_THREADS must be a non-negative integer, got `{raw}`")))?;
    if n > 0 {
        // A pool that already exists (for example in tests) is left alone.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{}", json!({ "error": "config", "module": "cli", "message": first.trim() }));
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = configure_threads() {
        let (line, code) = error_line(&e, None);
        eprintln!("{line}");
        return ExitCode::from(code);
    }
    let cfg = match parse_config(cli.command) {
        Ok(c) => c,
        Err(e) => {
            let (line, code) = error_line(&e, None);
            eprintln!("{line}");
            return ExitCode::from(code);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("{}", json!({ "warning": w }));
            }
            println!("{}", serde_json::to_string(&outcome).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (line, code) = error_line(&e, Some(&cfg));
            eprintln!("{line}");
            ExitCode::from(code)
        }
    }
}
