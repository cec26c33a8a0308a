//! Proposal abstractions.
//!
//! A transdimensional proposal is split in three levels:
//!
//! 1. a *move* chosen once per step (e.g. split vs combine),
//! 2. a *route* inside that move (destination model, class to split, ...),
//! 3. the continuous draw that produces a [`Trial`].
//!
//! Under [`DestinationPolicy::Same`] the route is drawn once and all `k`
//! trials share it; under [`DestinationPolicy::Varied`] every trial draws its
//! own route. The move is always shared.

use std::fmt::Debug;

use rand::Rng;

use crate::error::{Error, Result};
use crate::state::{ChainState, ModelIndex};

/// One proposed candidate with its bookkeeping.
///
/// `log_fwd` is `log T(x, y)` including the move and route probabilities,
/// `log_rev` is `log T(y, x)` for the reverse move that maps `y` back to
/// `x`, and `log_jacobian` is `log|∂(y, u')/∂(x, u)|`.
///
/// Implementors guarantee `log_rev` is computed by the same formula that
/// [`JumpProposal::draw`] would use for `log_fwd` when drawing `x` from `y`.
#[derive(Debug, Clone)]
pub struct Trial<S> {
    pub state: S,
    pub log_fwd: f64,
    pub log_rev: f64,
    pub log_jacobian: f64,
    pub log_target: Option<f64>,
}

impl<S> Trial<S> {
    pub fn new(state: S, log_fwd: f64, log_rev: f64, log_jacobian: f64) -> Self {
        Self {
            state,
            log_fwd,
            log_rev,
            log_jacobian,
            log_target: None,
        }
    }

    /// A trial that can never be selected (e.g. a Beta draw outside (0,1)).
    pub fn infeasible(state: S) -> Self {
        Self::new(state, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0)
    }

    pub fn is_feasible(&self) -> bool {
        self.log_fwd.is_finite() && self.log_rev.is_finite() && self.log_jacobian.is_finite()
    }
}

/// A transdimensional (or fixed-dimension) proposal mechanism.
pub trait JumpProposal<S> {
    type Move: Clone + Debug;
    type Route: Clone + Debug;

    /// Step-level move; `None` when no move is possible from `x`.
    fn choose_move<R: Rng + ?Sized>(&self, rng: &mut R, x: &S) -> Option<Self::Move>;

    /// The move type of the reverse transition.
    fn reverse_move(&self, x: &S, mv: &Self::Move) -> Self::Move;

    /// Trial-level route; `None` when the move has no admissible route.
    fn choose_route<R: Rng + ?Sized>(&self, rng: &mut R, x: &S, mv: &Self::Move) -> Option<Self::Route>;

    /// The route that maps `y` back to `x`.
    fn reverse_route(&self, x: &S, y: &S, mv: &Self::Move, route: &Self::Route) -> Self::Route;

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: &S, mv: &Self::Move, route: &Self::Route) -> Trial<S>;

    /// Name of the move type for acceptance accounting.
    fn label(&self, mv: &Self::Move) -> &'static str;
}

/// A proposal whose move, route and draw distributions have finite support,
/// so the oracle can enumerate the transition kernel exactly.
pub trait EnumerableJump<S>: JumpProposal<S> {
    fn moves(&self, x: &S) -> Vec<(Self::Move, f64)>;
    fn routes(&self, x: &S, mv: &Self::Move) -> Vec<(Self::Route, f64)>;
    /// Outcomes with their probability conditional on `(mv, route)`.
    fn outcomes(&self, x: &S, mv: &Self::Move, route: &Self::Route) -> Vec<(Trial<S>, f64)>;
}

/// Fixed-dimension proposal `T(θ, ·)` within the current model.
pub trait ProposalKernel {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, from: &ChainState) -> (Vec<f64>, f64);
    fn log_density(&self, from: &ChainState, to: &ChainState) -> f64;
}

/// A fixed-dimension kernel with finite support.
pub trait EnumerableKernel: ProposalKernel {
    fn support(&self, from: &ChainState) -> Vec<(Vec<f64>, f64)>;
}

/// Adapts a [`ProposalKernel`] to the [`JumpProposal`] interface.
#[derive(Debug, Clone, Copy)]
pub struct WithinModel<'a, P>(pub &'a P);

impl<P: ProposalKernel> JumpProposal<ChainState> for WithinModel<'_, P> {
    type Move = ();
    type Route = ();

    fn choose_move<R: Rng + ?Sized>(&self, _: &mut R, _: &ChainState) -> Option<()> {
        Some(())
    }
    fn reverse_move(&self, _: &ChainState, _: &()) {}
    fn choose_route<R: Rng + ?Sized>(&self, _: &mut R, _: &ChainState, _: &()) -> Option<()> {
        Some(())
    }
    fn reverse_route(&self, _: &ChainState, _: &ChainState, _: &(), _: &()) {}

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: &ChainState, _: &(), _: &()) -> Trial<ChainState> {
        let (params, log_fwd) = self.0.sample(rng, x);
        let y = ChainState::new(x.model, params);
        let log_rev = self.0.log_density(&y, x);
        Trial::new(y, log_fwd, log_rev, 0.0)
    }

    fn label(&self, _: &()) -> &'static str {
        "within"
    }
}

impl<P: EnumerableKernel> EnumerableJump<ChainState> for WithinModel<'_, P> {
    fn moves(&self, _: &ChainState) -> Vec<((), f64)> {
        vec![((), 1.0)]
    }
    fn routes(&self, _: &ChainState, _: &()) -> Vec<((), f64)> {
        vec![((), 1.0)]
    }
    fn outcomes(&self, x: &ChainState, _: &(), _: &()) -> Vec<(Trial<ChainState>, f64)> {
        self.0
            .support(x)
            .into_iter()
            .map(|(params, p)| {
                let y = ChainState::new(x.model, params);
                let log_rev = self.0.log_density(&y, x);
                (Trial::new(y, p.ln(), log_rev, 0.0), p)
            })
            .collect()
    }
}

/// Deterministic dimension-matching map `g_{m,m'}`.
pub trait JumpMap {
    /// `(θ, u) ↦ (θ', u', log|J|)` for a jump into `to`.
    fn forward(&self, from: &ChainState, u: &[f64], to: ModelIndex) -> Result<(Vec<f64>, Vec<f64>, f64)>;

    /// The inverse of [`JumpMap::forward`]: `(θ', u') ↦ (θ, u, log|J⁻¹|)`.
    fn inverse(&self, to: &ChainState, u_prime: &[f64], from: ModelIndex) -> Result<(Vec<f64>, Vec<f64>, f64)>;

    /// Auxiliary dimensions `(d(u), d(u'))` for a jump `from → to`.
    fn aux_dims(&self, from: ModelIndex, to: ModelIndex) -> Result<(usize, usize)>;
}

/// How the `k` trials of a multiple-try step choose their route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DestinationPolicy {
    /// One route drawn once; `k` parameter draws along it.
    Same,
    /// Every trial draws its own route.
    Varied,
}

impl std::str::FromStr for DestinationPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "same" | "same-destination" => Ok(Self::Same),
            "varied" | "varied-destination" => Ok(Self::Varied),
            _ => Err(Error::Invalid(format!("unknown destination policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveSpec {
    pub trials: usize,
    pub policy: DestinationPolicy,
}

impl MoveSpec {
    pub fn new(trials: usize, policy: DestinationPolicy) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Invalid("trial count k must be at least 1".into()));
        }
        Ok(Self { trials, policy })
    }
}

/// Model-jump probabilities `j(m, m')`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpMatrix {
    rows: Vec<Vec<f64>>,
}

impl JumpMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for (m, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: row.len(),
                });
            }
            if row.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::Invalid(format!("row {} has a negative jump probability", m + 1)));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid(format!("row {} sums to {total}, not 1", m + 1)));
            }
        }
        Ok(Self { rows })
    }

    /// Uniform jumps over the listed neighbours of each model.
    pub fn uniform(neighbours: &[Vec<usize>]) -> Result<Self> {
        let n = neighbours.len();
        let rows = neighbours
            .iter()
            .enumerate()
            .map(|(m, nb)| {
                if nb.is_empty() {
                    return Err(Error::Invalid(format!("model {} has no neighbours", m + 1)));
                }
                let mut row = vec![0.0; n];
                for &j in nb {
                    if j >= n {
                        return Err(Error::Unreachable { from: m + 1, to: j + 1 });
                    }
                    row[j] = 1.0 / nb.len() as f64;
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn n_models(&self) -> usize {
        self.rows.len()
    }

    pub fn prob(&self, from: ModelIndex, to: ModelIndex) -> f64 {
        self.rows[from.0][to.0]
    }

    pub fn neighbours(&self, from: ModelIndex) -> impl Iterator<Item = (ModelIndex, f64)> + '_ {
        self.rows[from.0]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(j, &p)| (ModelIndex(j), p))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, from: ModelIndex) -> ModelIndex {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = from;
        for (m, p) in self.neighbours(from) {
            acc += p;
            last = m;
            if u < acc {
                return m;
            }
        }
        last
    }
}
