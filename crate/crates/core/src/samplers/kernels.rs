use rand::Rng;

use super::select::{log_sum_exp, select_trial};
use super::weights::{Candidate, WeightFunction};
use crate::proposal::{DestinationPolicy, JumpProposal, MoveSpec, ProposalKernel, Trial, WithinModel};
use crate::state::ChainState;
use crate::target::{sentinel, TargetDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accepted,
    Rejected,
    /// Every forward trial had zero weight; nothing could be selected.
    Degenerate,
}

/// Result of one kernel application.
#[derive(Debug, Clone)]
pub struct Step<S> {
    pub state: S,
    pub log_target: f64,
    pub outcome: Outcome,
    pub label: &'static str,
    /// Log acceptance probability, `−∞` when the move was never evaluated.
    pub log_alpha: f64,
}

impl<S> Step<S> {
    pub fn accepted(&self) -> bool {
        self.outcome == Outcome::Accepted
    }
}

fn stay<S: Clone>(x: &S, log_pi_x: f64, outcome: Outcome, label: &'static str, log_alpha: f64) -> Step<S> {
    Step {
        state: x.clone(),
        log_target: log_pi_x,
        outcome,
        label,
        log_alpha,
    }
}

/// `log α` for a move `x → y` with selection log probabilities `log_p_y`
/// (forward set) and `log_p_x` (reverse set), capped at 0.
///
/// With `log_p_y = log_p_x = 0` this is the plain MH / RJ ratio.
pub fn log_acceptance(
    log_pi_x: f64,
    log_pi_y: f64,
    log_fwd: f64,
    log_rev: f64,
    log_jacobian: f64,
    log_p_y: f64,
    log_p_x: f64,
) -> f64 {
    if log_pi_y == f64::NEG_INFINITY
        || !log_fwd.is_finite()
        || log_rev == f64::NEG_INFINITY
        || log_p_x == f64::NEG_INFINITY
    {
        return f64::NEG_INFINITY;
    }
    let r = (log_pi_y + log_rev + log_p_x) - (log_pi_x + log_fwd + log_p_y) + log_jacobian;
    sentinel(r).min(0.0)
}

fn accept<R: Rng + ?Sized>(rng: &mut R, log_alpha: f64) -> bool {
    let u: f64 = rng.random();
    log_alpha >= 0.0 || u.ln() < log_alpha
}

/// Metropolis–Hastings step with a fixed-dimension proposal.
pub fn mh_step<R, P, T>(rng: &mut R, x: &ChainState, log_pi_x: f64, proposal: &P, target: &T) -> Step<ChainState>
where
    R: Rng + ?Sized,
    P: ProposalKernel,
    T: TargetDensity<ChainState>,
{
    let (params, log_fwd) = proposal.sample(rng, x);
    let y = ChainState::new(x.model, params);
    let log_rev = proposal.log_density(&y, x);
    let log_pi_y = sentinel(target.log_target(&y));
    let log_alpha = log_acceptance(log_pi_x, log_pi_y, log_fwd, log_rev, 0.0, 0.0, 0.0);
    if accept(rng, log_alpha) {
        Step {
            state: y,
            log_target: log_pi_y,
            outcome: Outcome::Accepted,
            label: "within",
            log_alpha,
        }
    } else {
        stay(x, log_pi_x, Outcome::Rejected, "within", log_alpha)
    }
}

/// Reversible jump step: one route, one draw, accept with the RJ ratio.
pub fn rj_step<S, R, J, T>(rng: &mut R, x: &S, log_pi_x: f64, proposal: &J, target: &T) -> Step<S>
where
    S: Clone,
    R: Rng + ?Sized,
    J: JumpProposal<S>,
    T: TargetDensity<S>,
{
    let Some(mv) = proposal.choose_move(rng, x) else {
        return stay(x, log_pi_x, Outcome::Rejected, "none", f64::NEG_INFINITY);
    };
    let label = proposal.label(&mv);
    let Some(route) = proposal.choose_route(rng, x, &mv) else {
        return stay(x, log_pi_x, Outcome::Rejected, label, f64::NEG_INFINITY);
    };
    let trial = proposal.draw(rng, x, &mv, &route);
    let log_pi_y = if trial.is_feasible() {
        sentinel(target.log_target(&trial.state))
    } else {
        f64::NEG_INFINITY
    };
    let log_alpha = log_acceptance(
        log_pi_x,
        log_pi_y,
        trial.log_fwd,
        trial.log_rev,
        trial.log_jacobian,
        0.0,
        0.0,
    );
    // The uniform is always consumed so that stream positions do not depend
    // on feasibility.
    if accept(rng, log_alpha) {
        Step {
            state: trial.state,
            log_target: log_pi_y,
            outcome: Outcome::Accepted,
            label,
            log_alpha,
        }
    } else {
        stay(x, log_pi_x, Outcome::Rejected, label, log_alpha)
    }
}

/// Generalized multiple-try Metropolis step with a fixed-dimension proposal.
#[allow(clippy::too_many_arguments)]
pub fn gmtm_step<R, P, W, T>(
    rng: &mut R,
    x: &ChainState,
    log_pi_x: f64,
    k: usize,
    proposal: &P,
    weights: &W,
    target: &T,
) -> Step<ChainState>
where
    R: Rng + ?Sized,
    P: ProposalKernel,
    W: WeightFunction<ChainState>,
    T: TargetDensity<ChainState>,
{
    let spec = MoveSpec {
        trials: k.max(1),
        policy: DestinationPolicy::Same,
    };
    gmtrj_step(rng, x, log_pi_x, &spec, &WithinModel(proposal), weights, target)
}

/// Log weight of a trial drawn from `anchor`, filling in its target value
/// when the weight needs it. Infeasible trials and `+∞` weights get `−∞`.
pub fn trial_log_weight<S, W, T>(trial: &mut Trial<S>, anchor: &W::Anchor, weights: &W, target: &T) -> f64
where
    W: WeightFunction<S>,
    T: TargetDensity<S>,
{
    if !trial.is_feasible() {
        return f64::NEG_INFINITY;
    }
    if weights.needs_target() && trial.log_target.is_none() {
        trial.log_target = Some(sentinel(target.log_target(&trial.state)));
    }
    let c = Candidate {
        state: &trial.state,
        log_fwd: trial.log_fwd,
        log_rev: trial.log_rev,
        log_target: trial.log_target,
    };
    let w = weights.log_weight(anchor, &c);
    if w == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        w
    }
}

/// Log weight `w*(x, y)` of the current state `x` in the reverse set of the
/// selected trial `y`.
pub fn current_log_weight<S, W>(x: &S, log_pi_x: f64, y: &Trial<S>, wy: &W::Anchor, weights: &W) -> f64
where
    W: WeightFunction<S>,
{
    if !y.log_rev.is_finite() {
        return f64::NEG_INFINITY;
    }
    let c = Candidate {
        state: x,
        log_fwd: y.log_rev,
        log_rev: y.log_fwd,
        log_target: Some(log_pi_x),
    };
    let w = weights.log_weight(wy, &c);
    if w == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        w
    }
}

/// Draws `n` trials from `anchor`, returning each with its log weight.
#[allow(clippy::too_many_arguments)]
fn trial_set<S, R, J, W, T>(
    rng: &mut R,
    anchor: &S,
    mv: &J::Move,
    fixed: Option<&J::Route>,
    n: usize,
    proposal: &J,
    weights: &W,
    wanchor: &W::Anchor,
    target: &T,
    keep: bool,
) -> (Vec<(Option<(Trial<S>, J::Route)>, f64)>, Vec<f64>)
where
    R: Rng + ?Sized,
    J: JumpProposal<S>,
    W: WeightFunction<S>,
    T: TargetDensity<S>,
{
    let mut kept = Vec::with_capacity(if keep { n } else { 0 });
    let mut lws = Vec::with_capacity(n + 1);
    for _ in 0..n {
        let route = match fixed {
            Some(r) => Some(r.clone()),
            None => proposal.choose_route(rng, anchor, mv),
        };
        let (entry, lw) = match route {
            Some(route) => {
                let mut trial = proposal.draw(rng, anchor, mv, &route);
                let lw = trial_log_weight(&mut trial, wanchor, weights, target);
                (Some((trial, route)), lw)
            }
            None => (None, f64::NEG_INFINITY),
        };
        lws.push(lw);
        if keep {
            kept.push((entry, lw));
        }
    }
    (kept, lws)
}

/// Generalized multiple-try reversible jump step.
///
/// Draws `k` forward trials, selects one by weight, draws `k − 1` reverse
/// trials from the selected state and completes the reverse set with the
/// current state, then accepts with
/// `min{1, π(y)T(y,x)p_x / (π(x)T(x,y)p_y) · |J|}`.
pub fn gmtrj_step<S, R, J, W, T>(
    rng: &mut R,
    x: &S,
    log_pi_x: f64,
    spec: &MoveSpec,
    proposal: &J,
    weights: &W,
    target: &T,
) -> Step<S>
where
    S: Clone,
    R: Rng + ?Sized,
    J: JumpProposal<S>,
    W: WeightFunction<S>,
    T: TargetDensity<S>,
{
    let k = spec.trials.max(1);
    let Some(mv) = proposal.choose_move(rng, x) else {
        return stay(x, log_pi_x, Outcome::Rejected, "none", f64::NEG_INFINITY);
    };
    let label = proposal.label(&mv);

    let fixed = match spec.policy {
        DestinationPolicy::Same => match proposal.choose_route(rng, x, &mv) {
            Some(r) => Some(r),
            None => return stay(x, log_pi_x, Outcome::Rejected, label, f64::NEG_INFINITY),
        },
        DestinationPolicy::Varied => None,
    };

    let wx = weights.prepare(x);
    let (mut forward, lws) = trial_set(rng, x, &mv, fixed.as_ref(), k, proposal, weights, &wx, target, true);
    if forward.iter().all(|(e, _)| e.is_none()) {
        return stay(x, log_pi_x, Outcome::Rejected, label, f64::NEG_INFINITY);
    }
    let j = match select_trial(rng, &lws) {
        Ok(j) => j,
        Err(_) => return stay(x, log_pi_x, Outcome::Degenerate, label, f64::NEG_INFINITY),
    };
    let log_p_y = lws[j] - log_sum_exp(&lws);
    let (mut y, route) = forward.swap_remove(j).0.expect("selected trial exists");
    drop(forward);

    let log_pi_y = match y.log_target {
        Some(v) => v,
        None => {
            let v = sentinel(target.log_target(&y.state));
            y.log_target = Some(v);
            v
        }
    };

    let rmv = proposal.reverse_move(x, &mv);
    let rfixed = match spec.policy {
        DestinationPolicy::Same => Some(proposal.reverse_route(x, &y.state, &mv, &route)),
        DestinationPolicy::Varied => None,
    };
    let wy = weights.prepare(&y.state);
    let (_, mut rlws) = trial_set(
        rng,
        &y.state,
        &rmv,
        rfixed.as_ref(),
        k - 1,
        proposal,
        weights,
        &wy,
        target,
        false,
    );
    let lw_x = current_log_weight(x, log_pi_x, &y, &wy, weights);
    rlws.push(lw_x);
    let log_p_x = lw_x - log_sum_exp(&rlws);

    let log_alpha = log_acceptance(
        log_pi_x,
        log_pi_y,
        y.log_fwd,
        y.log_rev,
        y.log_jacobian,
        log_p_y,
        log_p_x,
    );
    if accept(rng, log_alpha) {
        Step {
            state: y.state,
            log_target: log_pi_y,
            outcome: Outcome::Accepted,
            label,
            log_alpha,
        }
    } else {
        stay(x, log_pi_x, Outcome::Rejected, label, log_alpha)
    }
}
