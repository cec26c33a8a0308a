use std::time::Duration;

use rand::Rng;

use super::toy::ToySpace;
use super::{toy_custom_weight, KernelConfig, Sampler};
use crate::diagnostics::{RunSummary, Trace, TraceHeader, TraceRecord};
use crate::error::{Error, Result};
use crate::proposal::{MoveSpec, WithinModel};
use crate::rng::RngStream;
use crate::samplers::{
    gmtrj_step, mh_step, rj_step, CustomWeights, ManifestWeights, MtmI, MtmInv, QuadWeights, Step, WeightScheme,
};
use crate::state::ChainState;
use crate::target::{ModelSpace, TargetDensity};
use crate::timing::cpu_timed;

/// One application of the configured kernel on a toy space.
pub fn toy_step<R: Rng + ?Sized>(
    rng: &mut R,
    space: &ToySpace,
    cfg: &KernelConfig,
    x: &ChainState,
    log_pi_x: f64,
) -> Result<Step<ChainState>> {
    let within = space.within();
    let adapter = WithinModel(&within);
    let spec = MoveSpec::new(cfg.trials.max(1), cfg.policy)?;
    macro_rules! multi {
        ($w:expr) => {
            match cfg.sampler {
                Sampler::Gmtm => gmtrj_step(rng, x, log_pi_x, &spec, &adapter, &$w, space),
                _ => gmtrj_step(rng, x, log_pi_x, &spec, space, &$w, space),
            }
        };
    }
    Ok(match cfg.sampler {
        Sampler::Mh => mh_step(rng, x, log_pi_x, &within, space),
        Sampler::Rj => rj_step(rng, x, log_pi_x, space, space),
        Sampler::Gmtm | Sampler::Gmtrj => match cfg.scheme {
            WeightScheme::MtmI => multi!(MtmI),
            WeightScheme::MtmInv => multi!(MtmInv),
            WeightScheme::Quad => multi!(QuadWeights::new(space)),
            WeightScheme::Manifest => multi!(ManifestWeights::new(space)),
            WeightScheme::Custom => multi!(CustomWeights::new(toy_custom_weight, true)),
        },
    })
}

/// Runs a chain on a toy space from its first state and summarises the
/// model indicator.
#[allow(clippy::too_many_arguments)]
pub fn run_toy(
    space: &ToySpace,
    cfg: &KernelConfig,
    iterations: u64,
    burn_in: u64,
    seed: u64,
    stream: u64,
    retain_burn_in: bool,
    provenance: &str,
) -> Result<(RunSummary, Trace, Duration)> {
    if iterations <= burn_in {
        return Err(Error::Invalid("iterations must exceed burn-in".into()));
    }
    let (sampler, label) = match cfg.sampler {
        Sampler::Mh | Sampler::Rj => (cfg.sampler.to_string(), String::new()),
        _ => (
            cfg.sampler.to_string(),
            format!("/{}/k={}/{}", cfg.scheme, cfg.trials, policy_name(cfg)),
        ),
    };
    let mut trace = Trace::new(TraceHeader {
        provenance: provenance.to_string(),
        label: format!("toy/{}/{}{label}", space.name, sampler.to_ascii_lowercase()),
        seed,
        n_models: space.n_models() as u32,
        model_prefix: "M".into(),
        moves: vec![move_label(cfg).into()],
        burn_in,
    });
    let mut rng = RngStream::new(seed, stream).rng();
    let mut x = space.chain_state(0);
    let mut lp = space.log_target(&x);
    let keep_from = if retain_burn_in { 1 } else { burn_in + 1 };
    let (res, cpu) = cpu_timed(|| -> Result<()> {
        for t in 1..=iterations {
            let s = toy_step(&mut rng, space, cfg, &x, lp)?;
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
        Ok(())
    });
    res?;
    let mut summary = RunSummary::from_trace(&trace)?;
    summary.cpu_seconds = Some(cpu.as_secs_f64());
    Ok((summary, trace, cpu))
}

fn policy_name(cfg: &KernelConfig) -> &'static str {
    match cfg.policy {
        crate::proposal::DestinationPolicy::Same => "same",
        crate::proposal::DestinationPolicy::Varied => "varied",
    }
}

fn move_label(cfg: &KernelConfig) -> &'static str {
    match cfg.sampler {
        Sampler::Mh | Sampler::Gmtm => "within",
        Sampler::Rj | Sampler::Gmtrj => "jump",
    }
}
