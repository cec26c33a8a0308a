use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use super::model::LogisticModel;
use super::proposal::{Embedding, GaussianWalk, LogisticJump};
use crate::diagnostics::{RunSummary, Trace, TraceHeader, TraceRecord};
use crate::error::{Error, Result};
use crate::proposal::{DestinationPolicy, MoveSpec};
use crate::rng::RngStream;
use crate::samplers::{gmtm_step, gmtrj_step, rj_step, MtmI, MtmInv, QuadWeights, Step, WeightFunction};
use crate::state::{ChainState, ModelIndex};
use crate::target::{ModelSpace, TargetDensity};
use crate::timing::cpu_timed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Rj,
    MtrjI,
    MtrjInv,
    GmtrjQuad,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::Rj, Self::MtrjI, Self::MtrjInv, Self::GmtrjQuad];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rj => "rj",
            Self::MtrjI => "mtrj-i",
            Self::MtrjInv => "mtrj-inv",
            Self::GmtrjQuad => "gmtrj-quad",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rj" => Ok(Self::Rj),
            "mtrj-i" => Ok(Self::MtrjI),
            "mtrj-inv" => Ok(Self::MtrjInv),
            "gmtrj-quad" => Ok(Self::GmtrjQuad),
            _ => Err(Error::Invalid(format!("unknown logistic algorithm `{s}`"))),
        }
    }
}

/// One cell of the logistic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// Jump proposal scale σ_p.
    pub sigma: f64,
    /// Trials per jump; ignored by RJ.
    pub trials: usize,
    pub iterations: u64,
    pub burn_in: u64,
    pub seed: u64,
    /// Stream id so grid cells sharing a seed draw independently.
    pub stream: u64,
    pub embedding: Embedding,
    /// Trials of the within-model GMTM-quad refresh; 0 disables it.
    pub within_trials: usize,
    /// Random-walk scale of the within-model refresh; defaults to σ_p.
    pub within_sigma: Option<f64>,
    /// Keep burn-in records in the trace.
    pub retain_burn_in: bool,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, sigma: f64, trials: usize) -> Self {
        Self {
            algorithm,
            sigma,
            trials,
            iterations: 200_000,
            burn_in: 20_000,
            seed: 1,
            stream: 0,
            embedding: Embedding::default(),
            within_trials: 10,
            within_sigma: None,
            retain_burn_in: false,
        }
    }

    pub fn label(&self) -> String {
        match self.algorithm {
            Algorithm::Rj => format!("logistic/{}/sigma={}", self.algorithm, self.sigma),
            _ => format!("logistic/{}/sigma={}/k={}", self.algorithm, self.sigma, self.trials),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::Invalid("iterations must exceed burn-in".into()));
        }
        if self.algorithm != Algorithm::Rj && self.trials == 0 {
            return Err(Error::Invalid("multiple-try algorithms need k ≥ 1".into()));
        }
        if let Some(s) = self.within_sigma {
            if !(s > 0.0) {
                return Err(Error::Invalid("within-model scale must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub trace: Trace,
    pub cpu: Duration,
}

struct Chain<'a> {
    model: &'a LogisticModel,
    jump: LogisticJump<'a>,
    walk: GaussianWalk,
    quad: QuadWeights<'a, LogisticModel>,
    spec: MoveSpec,
    within_trials: usize,
}

impl Chain<'_> {
    fn jump_step<R: rand::Rng + ?Sized>(
        &self,
        alg: Algorithm,
        rng: &mut R,
        x: &ChainState,
        lp: f64,
    ) -> Step<ChainState> {
        match alg {
            Algorithm::Rj => rj_step(rng, x, lp, &self.jump, self.model),
            Algorithm::MtrjI => self.multi(rng, x, lp, &MtmI),
            Algorithm::MtrjInv => self.multi(rng, x, lp, &MtmInv),
            Algorithm::GmtrjQuad => self.multi(rng, x, lp, &self.quad),
        }
    }

    fn multi<R: rand::Rng + ?Sized, W: WeightFunction<ChainState>>(
        &self,
        rng: &mut R,
        x: &ChainState,
        lp: f64,
        w: &W,
    ) -> Step<ChainState> {
        gmtrj_step(rng, x, lp, &self.spec, &self.jump, w, self.model)
    }
}

/// Runs one chain from the full model at `β = 0`. Each sweep is a
/// within-model GMTM-quad refresh followed by one transdimensional move;
/// the trace records the latter.
pub fn run_experiment(model: &LogisticModel, cfg: &ExperimentConfig, provenance: &str) -> Result<RunOutput> {
    cfg.validate()?;
    let chain = Chain {
        model,
        jump: LogisticJump::new(model, cfg.sigma, cfg.embedding)?,
        walk: GaussianWalk {
            sigma: cfg.within_sigma.unwrap_or(cfg.sigma),
        },
        quad: QuadWeights::new(model),
        spec: MoveSpec::new(cfg.trials.max(1), DestinationPolicy::Same)?,
        within_trials: cfg.within_trials,
    };
    let full = ModelIndex(model.n_models() - 1);
    let mut x = ChainState::new(full, vec![0.0; model.dim(full)]);
    let mut lp = model.log_target(&x);
    let mut rng = RngStream::new(cfg.seed, cfg.stream).rng();
    let mut trace = Trace::new(TraceHeader {
        provenance: provenance.to_string(),
        label: cfg.label(),
        seed: cfg.seed,
        n_models: model.n_models() as u32,
        model_prefix: "M".into(),
        moves: vec!["jump".into()],
        burn_in: cfg.burn_in,
    });
    let keep_from = if cfg.retain_burn_in { 1 } else { cfg.burn_in + 1 };
    trace.records.reserve((cfg.iterations + 1 - keep_from) as usize);

    let ((), cpu) = cpu_timed(|| {
        for t in 1..=cfg.iterations {
            if chain.within_trials > 0 {
                let s = gmtm_step(&mut rng, &x, lp, chain.within_trials, &chain.walk, &chain.quad, model);
                x = s.state;
                lp = s.log_target;
            }
            let s = chain.jump_step(cfg.algorithm, &mut rng, &x, lp);
            if t >= keep_from {
                trace.records.push(TraceRecord {
                    iteration: t,
                    model: s.state.model.number() as u32,
                    move_label: s.label.to_string(),
                    outcome: s.outcome,
                });
            }
            x = s.state;
            lp = s.log_target;
        }
    });
    let mut summary = RunSummary::from_trace(&trace)?;
    summary.cpu_seconds = Some(cpu.as_secs_f64());
    Ok(RunOutput { summary, trace, cpu })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(alg: Algorithm) -> ExperimentConfig {
        ExperimentConfig {
            iterations: 3000,
            burn_in: 500,
            ..ExperimentConfig::new(alg, 0.5, 5)
        }
    }

    #[test]
    fn reruns_are_bit_identical() {
        let m = LogisticModel::bundled();
        let a = run_experiment(&m, &short(Algorithm::GmtrjQuad), "t").unwrap();
        let b = run_experiment(&m, &short(Algorithm::GmtrjQuad), "t").unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.summary.csv_row(), b.summary.csv_row());
    }

    #[test]
    fn every_algorithm_moves_between_models() {
        let m = LogisticModel::bundled();
        for alg in Algorithm::ALL {
            let out = run_experiment(&m, &short(alg), "t").unwrap();
            assert_eq!(out.trace.records.len(), 2500);
            assert!(out.summary.acceptance["jump"].accepted > 0, "{alg}");
            let total: f64 = out.summary.probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn burn_in_retention() {
        let m = LogisticModel::bundled();
        let cfg = ExperimentConfig {
            retain_burn_in: true,
            ..short(Algorithm::Rj)
        };
        let out = run_experiment(&m, &cfg, "t").unwrap();
        assert_eq!(out.trace.records.len(), 3000);
        assert_eq!(out.summary.iterations, 2500);
    }

    #[test]
    fn bad_config_is_rejected() {
        let m = LogisticModel::bundled();
        let mut cfg = short(Algorithm::Rj);
        cfg.burn_in = cfg.iterations;
        assert!(run_experiment(&m, &cfg, "t").is_err());
    }
}
