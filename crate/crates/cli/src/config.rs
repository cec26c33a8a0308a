//! Experiment configuration files.
//!
//! Flat TOML: run-wide keys at the top, one table per case study, and every
//! grid axis written out as an explicit list.
//!
//! ```toml
//! study = "logistic"
//! algorithms = ["rj", "mtrj-inv", "gmtrj-quad"]
//! iterations = 200000
//! burn_in = 20000
//! seed = 1
//!
//! [logistic]
//! sigma = [0.1, 0.2, 0.5, 1.0, 1.5, 2.0, 2.5]
//! trials = [10, 50, 100]
//! ```

use std::path::{Path, PathBuf};

use gmtrj_core::latent::{LcAlgorithm, LcConfig, LcData, LcModel};
use gmtrj_core::logistic::{Algorithm, BinomialTable, Coding, Embedding, ExperimentConfig, LogisticModel};
use gmtrj_core::oracle::{bundled, KernelConfig, Sampler, ToySpace};
use gmtrj_core::{DestinationPolicy, WeightScheme};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Study {
    Logistic,
    Latentclass,
    Toy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    study: Study,
    algorithms: Vec<String>,
    iterations: u64,
    burn_in: u64,
    #[serde(default = "one")]
    seed: u64,
    #[serde(default = "one_u32")]
    replicates: u32,
    #[serde(default = "yes")]
    trace: bool,
    #[serde(default)]
    retain_burn_in: bool,
    out: Option<PathBuf>,
    logistic: Option<LogisticSection>,
    latentclass: Option<LatentSection>,
    toy: Option<ToySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogisticSection {
    data: Option<PathBuf>,
    sigma: Vec<f64>,
    #[serde(default = "ten")]
    trials: Vec<usize>,
    #[serde(default = "perturb")]
    embedding: String,
    #[serde(default = "sum_to_zero")]
    coding: String,
    #[serde(default = "eight")]
    prior_variance: f64,
    #[serde(default = "ten_usize")]
    within_trials: usize,
    within_sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatentSection {
    data: Option<PathBuf>,
    #[serde(default = "ten")]
    trials: Vec<usize>,
    #[serde(default = "twenty")]
    c_max: usize,
    #[serde(default = "two")]
    alpha: f64,
    #[serde(default = "two")]
    beta: f64,
    #[serde(default = "ten_f64")]
    tau: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToySection {
    space: String,
    #[serde(default = "mtm_inv")]
    schemes: Vec<String>,
    #[serde(default = "two_trials")]
    trials: Vec<usize>,
    #[serde(default = "same")]
    policy: String,
}

fn one() -> u64 {
    1
}
fn one_u32() -> u32 {
    1
}
fn yes() -> bool {
    true
}
fn ten() -> Vec<usize> {
    vec![10]
}
fn ten_usize() -> usize {
    10
}
fn twenty() -> usize {
    20
}
fn two() -> f64 {
    2.0
}
fn ten_f64() -> f64 {
    10.0
}
fn eight() -> f64 {
    8.0
}
fn perturb() -> String {
    "perturb".into()
}
fn sum_to_zero() -> String {
    "sum-to-zero".into()
}
fn mtm_inv() -> Vec<String> {
    vec!["mtm-inv".into()]
}
fn two_trials() -> Vec<usize> {
    vec![2]
}
fn same() -> String {
    "same".into()
}

/// The loaded model of the configured case study.
pub enum StudyModel {
    Logistic(LogisticModel),
    Latent(LcModel),
    Toy(ToySpace),
}

/// One independent chain of the grid.
#[derive(Debug, Clone)]
pub enum CellSpec {
    Logistic(ExperimentConfig),
    Latent(LcConfig),
    Toy(KernelConfig),
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub index: usize,
    pub replicate: u32,
    pub seed: u64,
    pub spec: CellSpec,
}

impl Cell {
    /// Grid key shared by cells that differ only in algorithm and `k`; used to
    /// pair every cell with its RJ reference for time adjustment.
    pub fn reference_key(&self) -> String {
        match &self.spec {
            CellSpec::Logistic(c) => format!("{}/{}", self.replicate, c.sigma),
            _ => self.replicate.to_string(),
        }
    }

    pub fn is_reference(&self) -> bool {
        match &self.spec {
            CellSpec::Logistic(c) => c.algorithm == Algorithm::Rj,
            CellSpec::Latent(c) => c.algorithm == LcAlgorithm::Rj,
            CellSpec::Toy(k) => matches!(k.sampler, Sampler::Rj | Sampler::Mh),
        }
    }

    pub fn iterations(&self) -> u64 {
        match &self.spec {
            CellSpec::Logistic(c) => c.iterations,
            CellSpec::Latent(c) => c.sweeps,
            CellSpec::Toy(_) => 0,
        }
    }
}

pub struct Config {
    pub digest: String,
    pub study: StudyModel,
    pub cells: Vec<Cell>,
    pub seed: u64,
    pub iterations: u64,
    pub burn_in: u64,
    pub trace: bool,
    pub retain_burn_in: bool,
    pub out: Option<PathBuf>,
}

/// 1-based line of the first `key = ...` assignment, or 0.
fn line_of(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
                || t.trim_end() == format!("[{key}]")
        })
        .map_or(0, |i| i + 1)
}

struct Ctx<'a> {
    text: &'a str,
    path: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("{}:{}: {msg}", self.path.display(), line_of(self.text, key)))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }

    fn missing_data(&self, p: &Path, what: &str, header: &str) -> CliError {
        CliError::Data(format!(
            "{what} data file {} not found. Remove the `data` key to use the bundled table, \
             or point it at a CSV with header `{header}`",
            p.display()
        ))
    }
}

/// Reads, validates and expands a configuration file. `seed` overrides the
/// file's seed.
pub fn load(path: &Path, seed: Option<u64>) -> CliResult<Config> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Config(format!("{}: config is not UTF-8", path.display())))?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| {
        let line = e
            .span()
            .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        CliError::Config(format!("{}:{line}: {}", path.display(), e.message()))
    })?;
    let ctx = Ctx { text: &text, path };
    if raw.iterations <= raw.burn_in {
        return Err(ctx.err("iterations", "iterations must exceed burn_in"));
    }
    if raw.algorithms.is_empty() {
        return Err(ctx.err("algorithms", "algorithms must list at least one algorithm"));
    }
    if raw.replicates == 0 {
        return Err(ctx.err("replicates", "replicates must be at least 1"));
    }
    let base_seed = seed.unwrap_or(raw.seed);
    let check_trials = |key: &str, ks: &[usize]| -> CliResult<()> {
        if ks.is_empty() || ks.contains(&0) {
            return Err(ctx.err(key, "trials must be a nonempty list of positive integers"));
        }
        Ok(())
    };
    let mut cells = Vec::new();
    let mut push = |replicate: u32, spec: CellSpec| {
        let index = cells.len();
        cells.push(Cell {
            index,
            replicate,
            seed: base_seed.wrapping_add(u64::from(replicate)),
            spec,
        });
    };
    let study = match raw.study {
        Study::Logistic => {
            let sec = raw
                .logistic
                .as_ref()
                .ok_or_else(|| ctx.err("study", "study = \"logistic\" needs a [logistic] table"))?;
            let algs = raw
                .algorithms
                .iter()
                .map(|a| a.parse::<Algorithm>().map_err(|e| ctx.err("algorithms", e)))
                .collect::<CliResult<Vec<_>>>()?;
            if sec.sigma.is_empty() || sec.sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                return Err(ctx.err("sigma", "sigma must be a nonempty list of positive numbers"));
            }
            check_trials("trials", &sec.trials)?;
            let embedding: Embedding = sec.embedding.parse().map_err(|e| ctx.err("embedding", e))?;
            let coding: Coding = sec.coding.parse().map_err(|e| ctx.err("coding", e))?;
            if let Some(s) = sec.within_sigma {
                if !(s > 0.0) {
                    return Err(ctx.err("within_sigma", "within_sigma must be positive"));
                }
            }
            let data = match &sec.data {
                Some(p) => {
                    let p = ctx.resolve(p);
                    if !p.exists() {
                        return Err(ctx.missing_data(&p, "logistic", "condition,treatment,survivals,total"));
                    }
                    BinomialTable::load(&p).map_err(|e| CliError::Data(e.to_string()))?
                }
                None => BinomialTable::bundled(),
            };
            let model =
                LogisticModel::new(data, coding, sec.prior_variance).map_err(|e| ctx.err("prior_variance", e))?;
            for rep in 0..raw.replicates {
                for &alg in &algs {
                    for &sigma in &sec.sigma {
                        let ks: &[usize] = if alg == Algorithm::Rj { &[1] } else { &sec.trials };
                        for &k in ks {
                            let mut c = ExperimentConfig::new(alg, sigma, k);
                            c.iterations = raw.iterations;
                            c.burn_in = raw.burn_in;
                            c.seed = base_seed.wrapping_add(u64::from(rep));
                            c.embedding = embedding;
                            c.within_trials = sec.within_trials;
                            c.within_sigma = sec.within_sigma;
                            c.retain_burn_in = raw.retain_burn_in;
                            push(rep, CellSpec::Logistic(c));
                        }
                    }
                }
            }
            StudyModel::Logistic(model)
        }
        Study::Latentclass => {
            let sec = raw
                .latentclass
                .as_ref()
                .ok_or_else(|| ctx.err("study", "study = \"latentclass\" needs a [latentclass] table"))?;
            let algs = raw
                .algorithms
                .iter()
                .map(|a| a.parse::<LcAlgorithm>().map_err(|e| ctx.err("algorithms", e)))
                .collect::<CliResult<Vec<_>>>()?;
            check_trials("trials", &sec.trials)?;
            for (key, v) in [("alpha", sec.alpha), ("beta", sec.beta), ("tau", sec.tau)] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ctx.err(key, format!("{key} must be positive")));
                }
            }
            let data = match &sec.data {
                Some(p) => {
                    let p = ctx.resolve(p);
                    if !p.exists() {
                        return Err(ctx.missing_data(&p, "latent class", "y1,y2,y3,y4,frequency"));
                    }
                    LcData::load(&p).map_err(|e| CliError::Data(e.to_string()))?
                }
                None => LcData::bundled(),
            };
            let model = LcModel::new(data, sec.c_max).map_err(|e| ctx.err("c_max", e))?;
            for rep in 0..raw.replicates {
                for &alg in &algs {
                    let ks: &[usize] = if alg == LcAlgorithm::Rj { &[1] } else { &sec.trials };
                    for &k in ks {
                        let mut c = LcConfig::new(alg, k);
                        c.sweeps = raw.iterations;
                        c.burn_in = raw.burn_in;
                        c.seed = base_seed.wrapping_add(u64::from(rep));
                        c.alpha = sec.alpha;
                        c.beta = sec.beta;
                        c.tau = sec.tau;
                        c.retain_burn_in = raw.retain_burn_in;
                        push(rep, CellSpec::Latent(c));
                    }
                }
            }
            StudyModel::Latent(model)
        }
        Study::Toy => {
            let sec = raw
                .toy
                .as_ref()
                .ok_or_else(|| ctx.err("study", "study = \"toy\" needs a [toy] table"))?;
            let space = match bundled().into_iter().find(|s| s.name == sec.space) {
                Some(s) => s,
                None => {
                    let p = ctx.resolve(Path::new(&sec.space));
                    if !p.exists() {
                        return Err(CliError::Data(format!(
                            "toy space `{}` is neither a bundled space (nested, chain3, independent4) nor an existing file",
                            sec.space
                        )));
                    }
                    ToySpace::load(&p).map_err(|e| CliError::Data(e.to_string()))?
                }
            };
            let samplers = raw
                .algorithms
                .iter()
                .map(|a| match a.to_ascii_lowercase().as_str() {
                    "mh" => Ok(Sampler::Mh),
                    "gmtm" => Ok(Sampler::Gmtm),
                    "rj" => Ok(Sampler::Rj),
                    "gmtrj" => Ok(Sampler::Gmtrj),
                    _ => Err(ctx.err("algorithms", format!("unknown toy sampler `{a}`"))),
                })
                .collect::<CliResult<Vec<_>>>()?;
            let schemes = sec
                .schemes
                .iter()
                .map(|s| s.parse::<WeightScheme>().map_err(|e| ctx.err("schemes", e)))
                .collect::<CliResult<Vec<_>>>()?;
            check_trials("trials", &sec.trials)?;
            let policy: DestinationPolicy = sec.policy.parse().map_err(|e| ctx.err("policy", e))?;
            for rep in 0..raw.replicates {
                for &s in &samplers {
                    if matches!(s, Sampler::Mh | Sampler::Rj) {
                        push(rep, CellSpec::Toy(KernelConfig::single(s)));
                        continue;
                    }
                    for &w in &schemes {
                        for &k in &sec.trials {
                            push(rep, CellSpec::Toy(KernelConfig::multi(s, k, policy, w)));
                        }
                    }
                }
            }
            StudyModel::Toy(space)
        }
    };
    Ok(Config {
        digest: crate::output::digest(&bytes),
        study,
        cells,
        seed: base_seed,
        iterations: raw.iterations,
        burn_in: raw.burn_in,
        trace: raw.trace,
        retain_burn_in: raw.retain_burn_in,
        out: raw.out.map(|p| ctx.resolve(&p)),
    })
}
