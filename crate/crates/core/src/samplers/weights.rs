//! Selection weights `w*(candidate, anchor)`.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::quad::LocalExpansion;
use crate::state::{ChainState, ModelIndex};
use crate::target::{sentinel, ManifestTarget, SmoothTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightScheme {
    /// `π(y) T(y, x)`.
    MtmI,
    /// `π(y) / T(x, y)`.
    MtmInv,
    /// `π*(y) / T(x, y)` with `π*` the quadratic expansion at `x`.
    Quad,
    /// A cheap surrogate of `π(y)`, e.g. the incomplete likelihood.
    Manifest,
    Custom,
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::MtmI => "mtm-i",
            WeightScheme::MtmInv => "mtm-inv",
            WeightScheme::Quad => "quad",
            WeightScheme::Manifest => "man",
            WeightScheme::Custom => "custom",
        })
    }
}

impl FromStr for WeightScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "mtm-i" | "mtmi" | "i" => Ok(Self::MtmI),
            "mtm-inv" | "inv" => Ok(Self::MtmInv),
            "quad" | "gmtm-quad" => Ok(Self::Quad),
            "man" | "manifest" | "gmtrj-man" => Ok(Self::Manifest),
            "custom" => Ok(Self::Custom),
            _ => Err(Error::Invalid(format!("unknown weight scheme `{s}`"))),
        }
    }
}

/// A candidate as seen by a weight function.
///
/// `log_fwd = log T(anchor, state)` and `log_rev = log T(state, anchor)`.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a, S> {
    pub state: &'a S,
    pub log_fwd: f64,
    pub log_rev: f64,
    pub log_target: Option<f64>,
}

/// A positive weighting function. `prepare` is called once per anchor so
/// per-step work (e.g. an expansion) is shared by all candidates.
pub trait WeightFunction<S> {
    type Anchor;

    fn scheme(&self) -> WeightScheme;

    /// Whether [`Candidate::log_target`] must be filled in.
    fn needs_target(&self) -> bool;

    fn prepare(&self, anchor: &S) -> Self::Anchor;

    fn log_weight(&self, anchor: &Self::Anchor, candidate: &Candidate<'_, S>) -> f64;
}

fn target_of<S>(c: &Candidate<'_, S>) -> f64 {
    c.log_target.expect("weight needs the candidate's log target")
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MtmI;

impl<S> WeightFunction<S> for MtmI {
    type Anchor = ();
    fn scheme(&self) -> WeightScheme {
        WeightScheme::MtmI
    }
    fn needs_target(&self) -> bool {
        true
    }
    fn prepare(&self, _: &S) {}
    fn log_weight(&self, _: &(), c: &Candidate<'_, S>) -> f64 {
        sentinel(target_of(c) + c.log_rev)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MtmInv;

impl<S> WeightFunction<S> for MtmInv {
    type Anchor = ();
    fn scheme(&self) -> WeightScheme {
        WeightScheme::MtmInv
    }
    fn needs_target(&self) -> bool {
        true
    }
    fn prepare(&self, _: &S) {}
    fn log_weight(&self, _: &(), c: &Candidate<'_, S>) -> f64 {
        sentinel(target_of(c) - c.log_fwd)
    }
}

/// GMTRJ-quad weights. The expansion is taken at the anchor embedded in the
/// candidate's model and cached per destination model.
#[derive(Debug)]
pub struct QuadWeights<'a, T> {
    pub target: &'a T,
}

impl<'a, T> QuadWeights<'a, T> {
    pub fn new(target: &'a T) -> Self {
        Self { target }
    }
}

#[derive(Debug)]
pub struct QuadAnchor {
    state: ChainState,
    cache: RefCell<Vec<(ModelIndex, LocalExpansion)>>,
}

impl<T: SmoothTarget> WeightFunction<ChainState> for QuadWeights<'_, T> {
    type Anchor = QuadAnchor;
    fn scheme(&self) -> WeightScheme {
        WeightScheme::Quad
    }
    fn needs_target(&self) -> bool {
        false
    }
    fn prepare(&self, anchor: &ChainState) -> QuadAnchor {
        QuadAnchor {
            state: anchor.clone(),
            cache: RefCell::new(Vec::new()),
        }
    }
    fn log_weight(&self, anchor: &QuadAnchor, c: &Candidate<'_, ChainState>) -> f64 {
        let model = c.state.model;
        let mut cache = anchor.cache.borrow_mut();
        let pos = match cache.iter().position(|(m, _)| *m == model) {
            Some(p) => p,
            None => {
                let embedded = if model == anchor.state.model {
                    anchor.state.clone()
                } else {
                    self.target.embed(&anchor.state, model)
                };
                cache.push((model, self.target.expansion(&embedded)));
                cache.len() - 1
            }
        };
        sentinel(cache[pos].1.log_a_unchecked(&c.state.params) - c.log_fwd)
    }
}

/// GMTRJ-man weights: the candidate's surrogate log density alone.
#[derive(Debug)]
pub struct ManifestWeights<'a, M> {
    pub manifest: &'a M,
}

impl<'a, M> ManifestWeights<'a, M> {
    pub fn new(manifest: &'a M) -> Self {
        Self { manifest }
    }
}

impl<S, M: ManifestTarget<S>> WeightFunction<S> for ManifestWeights<'_, M> {
    type Anchor = ();
    fn scheme(&self) -> WeightScheme {
        WeightScheme::Manifest
    }
    fn needs_target(&self) -> bool {
        false
    }
    fn prepare(&self, _: &S) {}
    fn log_weight(&self, _: &(), c: &Candidate<'_, S>) -> f64 {
        sentinel(self.manifest.log_manifest(c.state))
    }
}

/// Any deterministic positive function of `(candidate, anchor)`.
pub struct CustomWeights<F> {
    pub f: F,
    pub needs_target: bool,
}

impl<F> CustomWeights<F> {
    pub fn new(f: F, needs_target: bool) -> Self {
        Self { f, needs_target }
    }
}

impl<S: Clone, F: Fn(&Candidate<'_, S>, &S) -> f64> WeightFunction<S> for CustomWeights<F> {
    type Anchor = S;
    fn scheme(&self) -> WeightScheme {
        WeightScheme::Custom
    }
    fn needs_target(&self) -> bool {
        self.needs_target
    }
    fn prepare(&self, anchor: &S) -> S {
        anchor.clone()
    }
    fn log_weight(&self, anchor: &S, c: &Candidate<'_, S>) -> f64 {
        sentinel((self.f)(c, anchor))
    }
}
