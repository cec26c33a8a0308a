//! Exact transition kernels by enumeration.
//!
//! For a multiple-try kernel with `k` trials the probability of moving from
//! `x` to a selected outcome `y` is, by exchangeability of the trials,
//! `k` times the probability that the `k`-th trial is `y` and is selected,
//! integrated over the other `k − 1` forward trials and the `k − 1`
//! reverse trials. The cost per row is `O(n^{2k−1})` for `n` outcomes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::proposal::{DestinationPolicy, EnumerableJump, Trial};
use crate::samplers::{current_log_weight, log_acceptance, log_sum_exp, trial_log_weight, WeightFunction};
use crate::target::{sentinel, TargetDensity};

/// Which acceptance rule to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Single proposal, MH / RJ ratio.
    Single,
    /// `k` trials with weights.
    MultiTry {
        trials: usize,
        policy: DestinationPolicy,
        /// Negative control: the reverse set is `k` fresh draws and omits
        /// the current state.
        omit_current: bool,
    },
}

struct Outcome<S> {
    trial: Trial<S>,
    col: usize,
    log_q: f64,
    log_w: f64,
}

/// All `(log prob, lse of weights)` pairs over `n`-tuples of `group`.
///
/// An empty group stands for trials that found no route: they exist with
/// probability one and carry zero weight.
fn tuples<S>(group: &[Outcome<S>], n: usize) -> Vec<(f64, f64)> {
    if group.is_empty() {
        return vec![(0.0, f64::NEG_INFINITY)];
    }
    let mut out = vec![(0.0, f64::NEG_INFINITY)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * group.len());
        for &(lp, lw) in &out {
            for o in group {
                next.push((lp + o.log_q, log_sum_exp(&[lw, o.log_w])));
            }
        }
        out = next;
    }
    out
}

/// Sums a vector of nonnegative terms in descending order of magnitude.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    terms.iter().sum()
}

/// Number of term evaluations the enumeration needs.
pub fn enumeration_cost(max_outcomes: usize, n_states: usize, rule: Rule) -> u128 {
    let n = max_outcomes as u128;
    match rule {
        Rule::Single => n_states as u128 * n,
        Rule::MultiTry {
            trials, omit_current, ..
        } => {
            let k = trials as u32;
            let rev = if omit_current { k } else { k - 1 };
            n_states as u128 * n.pow(k) * n.pow(rev)
        }
    }
}

/// Exact transition matrix over `states`.
///
/// `index` maps every reachable state to its row; unknown states are an
/// error. The matrix is computed with the same weight and acceptance
/// functions the samplers use.
pub fn enumerate<S, J, W, T>(
    states: &[S],
    index: &dyn Fn(&S) -> Option<usize>,
    proposal: &J,
    weights: &W,
    target: &T,
    rule: Rule,
    budget: u128,
) -> Result<DMatrix<f64>>
where
    J: EnumerableJump<S>,
    W: WeightFunction<S>,
    T: TargetDensity<S>,
{
    if let Rule::MultiTry { trials: 0, .. } = rule {
        return Err(Error::Invalid("trial count k must be at least 1".into()));
    }
    let n = states.len();
    let col = |s: &S| -> Result<usize> {
        index(s).ok_or_else(|| Error::Invalid("proposal leaves the enumerated state space".into()))
    };

    let max_outcomes = states
        .iter()
        .map(|x| {
            proposal
                .moves(x)
                .iter()
                .map(|(mv, _)| {
                    proposal
                        .routes(x, mv)
                        .iter()
                        .map(|(r, _)| proposal.outcomes(x, mv, r).len())
                        .sum::<usize>()
                })
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
        .max(1);
    let needed = enumeration_cost(max_outcomes, n, rule);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }

    // Outcome groups that share a route under the policy in force.
    type Group<S, R> = (f64, Option<R>, Vec<Outcome<S>>);
    let groups = |anchor: &S,
                  mv: &J::Move,
                  fixed: Option<&J::Route>,
                  policy: DestinationPolicy|
     -> Result<Vec<Group<S, J::Route>>> {
        let wa = weights.prepare(anchor);
        let make = |route: &J::Route, log_pr: f64| -> Result<Vec<Outcome<S>>> {
            proposal
                .outcomes(anchor, mv, route)
                .into_iter()
                .map(|(mut trial, q)| {
                    let c = col(&trial.state)?;
                    if trial.log_target.is_none() {
                        trial.log_target = Some(sentinel(target.log_target(&trial.state)));
                    }
                    let log_w = trial_log_weight(&mut trial, &wa, weights, target);
                    Ok(Outcome {
                        trial,
                        col: c,
                        log_q: log_pr + q.ln(),
                        log_w,
                    })
                })
                .collect()
        };
        match (policy, fixed) {
            (_, Some(route)) => Ok(vec![(0.0, Some(route.clone()), make(route, 0.0)?)]),
            (DestinationPolicy::Same, None) => proposal
                .routes(anchor, mv)
                .into_iter()
                .map(|(r, pr)| {
                    let g = make(&r, 0.0)?;
                    Ok((pr.ln(), Some(r), g))
                })
                .collect(),
            (DestinationPolicy::Varied, None) => {
                let mut all = Vec::new();
                for (r, pr) in proposal.routes(anchor, mv) {
                    all.extend(make(&r, pr.ln())?);
                }
                Ok(vec![(0.0, None, all)])
            }
        }
    };

    let mut p = DMatrix::zeros(n, n);
    for (i, x) in states.iter().enumerate() {
        if col(x)? != i {
            return Err(Error::Invalid("state index does not match its position".into()));
        }
        let log_pi_x = sentinel(target.log_target(x));
        let mut terms: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (mv, p_mv) in proposal.moves(x) {
            let log_mv = p_mv.ln();
            if proposal.routes(x, &mv).is_empty() {
                terms[i].push(p_mv);
                continue;
            }
            match rule {
                Rule::Single => {
                    for (route, pr) in proposal.routes(x, &mv) {
                        for (trial, q) in proposal.outcomes(x, &mv, &route) {
                            let c = col(&trial.state)?;
                            let mass = p_mv * pr * q;
                            let log_pi_y = if trial.is_feasible() {
                                sentinel(target.log_target(&trial.state))
                            } else {
                                f64::NEG_INFINITY
                            };
                            let a = log_acceptance(
                                log_pi_x,
                                log_pi_y,
                                trial.log_fwd,
                                trial.log_rev,
                                trial.log_jacobian,
                                0.0,
                                0.0,
                            )
                            .exp();
                            terms[c].push(mass * a);
                            terms[i].push(mass * (1.0 - a));
                        }
                    }
                }
                Rule::MultiTry {
                    trials: k,
                    policy,
                    omit_current,
                } => {
                    let rmv = proposal.reverse_move(x, &mv);
                    for (log_pg, groute, group) in groups(x, &mv, None, policy)? {
                        let base = log_mv + log_pg;
                        // Degenerate event: every one of the k trials has zero weight.
                        let dead: f64 = group
                            .iter()
                            .filter(|o| o.log_w == f64::NEG_INFINITY)
                            .map(|o| o.log_q.exp())
                            .sum();
                        if dead > 0.0 {
                            terms[i].push((base + k as f64 * dead.ln()).exp());
                        }
                        let fwd = tuples(&group, k - 1);
                        for y in &group {
                            if y.log_w == f64::NEG_INFINITY {
                                continue;
                            }
                            let log_pi_y = y.trial.log_target.unwrap_or(f64::NEG_INFINITY);
                            let rfixed = groute
                                .as_ref()
                                .map(|r| proposal.reverse_route(x, &y.trial.state, &mv, r));
                            let rgroups = groups(&y.trial.state, &rmv, rfixed.as_ref(), policy)?;
                            debug_assert_eq!(rgroups.len(), 1);
                            let rgroup = &rgroups[0].2;
                            let wy = weights.prepare(&y.trial.state);
                            let lw_x = current_log_weight(x, log_pi_x, &y.trial, &wy, weights);
                            let rev = tuples(rgroup, if omit_current { k } else { k - 1 });
                            let log_k = (k as f64).ln();
                            for &(lp_f, lse_f) in &fwd {
                                let log_p_y = y.log_w - log_sum_exp(&[y.log_w, lse_f]);
                                let lead = base + log_k + y.log_q + lp_f + log_p_y;
                                for &(lp_r, lse_r) in &rev {
                                    let log_p_x = if omit_current {
                                        lw_x - lse_r
                                    } else {
                                        lw_x - log_sum_exp(&[lw_x, lse_r])
                                    };
                                    let a = log_acceptance(
                                        log_pi_x,
                                        log_pi_y,
                                        y.trial.log_fwd,
                                        y.trial.log_rev,
                                        y.trial.log_jacobian,
                                        log_p_y,
                                        sentinel(log_p_x).min(0.0),
                                    )
                                    .exp();
                                    let mass = (lead + lp_r).exp();
                                    terms[y.col].push(mass * a);
                                    terms[i].push(mass * (1.0 - a));
                                }
                            }
                        }
                    }
                }
            }
        }
        for (j, t) in terms.into_iter().enumerate() {
            p[(i, j)] = ordered_sum(t);
        }
    }
    Ok(p)
}

/// `max |π(x)P(x,y) − π(y)P(y,x)|` with `π` normalised.
pub fn check_detailed_balance(pi: &[f64], p: &DMatrix<f64>) -> f64 {
    let n = pi.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((pi[i] * p[(i, j)] - pi[j] * p[(j, i)]).abs());
        }
    }
    worst
}

/// `max_x |Σ_y P(x,y) − 1|`.
pub fn row_sum_error(p: &DMatrix<f64>) -> f64 {
    p.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
}

/// Stationary distribution of an irreducible row-stochastic matrix, from
/// `(Pᵀ − I) v = 0` with one equation replaced by `Σ v = 1`.
pub fn stationary(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::zeros(n);
    b[n - 1] = 1.0;
    let v = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Invalid("transition matrix is not irreducible".into()))?;
    Ok(v.iter().copied().collect())
}
