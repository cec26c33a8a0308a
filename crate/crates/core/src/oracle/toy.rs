//! Discrete toy spaces for exact kernel enumeration.
//!
//! Text format, one directive per line (`#` starts a comment):
//!
//! ```text
//! toy <name>
//! state <model> <value> <mass> [aux <mass>]
//! jump <from-model> <to-model> <probability>
//! prop <model>:<value> <model>:<value> <probability>
//! ```
//!
//! Models are numbered from 1. Every state is a one-dimensional parameter
//! `value` inside its model. `prop` rows give the proposal mass from a state
//! to each state of a destination model; for every state and every model it
//! can jump to the row must sum to 1. Within-model rows (same model on both
//! sides) drive the MH and GMTM kernels. Jump maps are identities, so
//! `|J| = 1` throughout. `aux` sets the surrogate mass used by manifest
//! weights; it defaults to the square root of the mass.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::proposal::{EnumerableJump, EnumerableKernel, JumpMatrix, JumpProposal, ProposalKernel, Trial};
use crate::quad::LocalExpansion;
use crate::state::{ChainState, ModelIndex};
use crate::target::{ManifestTarget, ModelSpace, SmoothTarget, TargetDensity};

#[derive(Debug, Clone, PartialEq)]
pub struct ToyState {
    pub model: ModelIndex,
    pub value: f64,
    pub log_mass: f64,
    pub log_aux: f64,
}

#[derive(Debug, Clone)]
pub struct ToySpace {
    pub name: String,
    pub states: Vec<ToyState>,
    pub jumps: JumpMatrix,
    /// `prop[(from, to)]`, indices into `states`.
    prop: HashMap<(usize, usize), f64>,
}

pub const BUNDLED: &[(&str, &str)] = &[
    ("nested", include_str!("../../toys/nested.toy")),
    ("chain3", include_str!("../../toys/chain3.toy")),
    ("independent4", include_str!("../../toys/independent4.toy")),
];

/// All bundled toy spaces.
pub fn bundled() -> Vec<ToySpace> {
    BUNDLED
        .iter()
        .map(|(name, text)| ToySpace::parse(text, name).expect("bundled toy space is valid"))
        .collect()
}

fn parse_f64(path: &str, line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("`{s}` is not a number")))
}

fn parse_model(path: &str, line: usize, s: &str) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(m) if m >= 1 => Ok(m - 1),
        _ => Err(Error::parse(
            path,
            line,
            format!("`{s}` is not a model number (1-based)"),
        )),
    }
}

impl ToySpace {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Data {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut name = None;
        let mut states: Vec<ToyState> = Vec::new();
        let mut jumps: Vec<(usize, usize, f64, usize)> = Vec::new();
        let mut props: Vec<((usize, f64), (usize, f64), f64, usize)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok[0] {
                "toy" if tok.len() == 2 => name = Some(tok[1].to_string()),
                "state" if tok.len() == 4 || tok.len() == 6 => {
                    let model = parse_model(origin, ln, tok[1])?;
                    let value = parse_f64(origin, ln, tok[2])?;
                    let mass = parse_f64(origin, ln, tok[3])?;
                    if !(mass > 0.0) || !mass.is_finite() {
                        return Err(Error::parse(origin, ln, "state mass must be positive"));
                    }
                    let aux = if tok.len() == 6 {
                        if tok[4] != "aux" {
                            return Err(Error::parse(origin, ln, "expected `aux <mass>`"));
                        }
                        let a = parse_f64(origin, ln, tok[5])?;
                        if !(a > 0.0) || !a.is_finite() {
                            return Err(Error::parse(origin, ln, "aux mass must be positive"));
                        }
                        a
                    } else {
                        mass.sqrt()
                    };
                    if states.iter().any(|s| s.model.0 == model && s.value == value) {
                        return Err(Error::parse(origin, ln, "duplicate state"));
                    }
                    states.push(ToyState {
                        model: ModelIndex(model),
                        value,
                        log_mass: mass.ln(),
                        log_aux: aux.ln(),
                    });
                }
                "jump" if tok.len() == 4 => {
                    let a = parse_model(origin, ln, tok[1])?;
                    let b = parse_model(origin, ln, tok[2])?;
                    let p = parse_f64(origin, ln, tok[3])?;
                    jumps.push((a, b, p, ln));
                }
                "prop" if tok.len() == 4 => {
                    let endpoint = |s: &str| -> Result<(usize, f64)> {
                        let (m, v) = s
                            .split_once(':')
                            .ok_or_else(|| Error::parse(origin, ln, format!("`{s}` is not <model>:<value>")))?;
                        Ok((parse_model(origin, ln, m)?, parse_f64(origin, ln, v)?))
                    };
                    let p = parse_f64(origin, ln, tok[3])?;
                    props.push((endpoint(tok[1])?, endpoint(tok[2])?, p, ln));
                }
                _ => return Err(Error::parse(origin, ln, format!("unrecognised directive `{line}`"))),
            }
        }

        let name = name.ok_or_else(|| Error::parse(origin, 1, "missing `toy <name>` line"))?;
        if states.is_empty() {
            return Err(Error::parse(origin, 1, "no states declared"));
        }
        let n_models = states.iter().map(|s| s.model.0 + 1).max().unwrap_or(0);
        for m in 0..n_models {
            if !states.iter().any(|s| s.model.0 == m) {
                return Err(Error::parse(origin, 1, format!("model {} has no states", m + 1)));
            }
        }
        let mut rows = vec![vec![0.0; n_models]; n_models];
        for &(a, b, p, ln) in &jumps {
            if a >= n_models || b >= n_models {
                return Err(Error::parse(origin, ln, "jump refers to an undeclared model"));
            }
            rows[a][b] = p;
        }
        let jumps = JumpMatrix::new(rows).map_err(|e| Error::parse(origin, 1, e.to_string()))?;

        let find = |(m, v): (usize, f64)| states.iter().position(|s| s.model.0 == m && s.value == v);
        let mut prop = HashMap::new();
        for &(from, to, p, ln) in &props {
            let a = find(from).ok_or_else(|| Error::parse(origin, ln, "prop source is not a declared state"))?;
            let b = find(to).ok_or_else(|| Error::parse(origin, ln, "prop target is not a declared state"))?;
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::parse(origin, ln, "proposal mass must be positive"));
            }
            if prop.insert((a, b), p).is_some() {
                return Err(Error::parse(origin, ln, "duplicate prop entry"));
            }
        }

        let space = ToySpace {
            name,
            states,
            jumps,
            prop,
        };
        space.validate(origin)?;
        Ok(space)
    }

    fn validate(&self, origin: &str) -> Result<()> {
        for (a, s) in self.states.iter().enumerate() {
            for m in 0..self.n_models() {
                let to = ModelIndex(m);
                let total: f64 = self.row(a, to).map(|(_, p)| p).sum();
                let needed = self.jumps.prob(s.model, to) > 0.0;
                if needed && (total - 1.0).abs() > 1e-12 {
                    return Err(Error::parse(
                        origin,
                        1,
                        format!(
                            "proposal row from {}:{} into model {} sums to {total}",
                            s.model.number(),
                            s.value,
                            m + 1
                        ),
                    ));
                }
            }
        }
        for &(a, b) in self.prop.keys() {
            let (ma, mb) = (self.states[a].model, self.states[b].model);
            let fwd = self.jumps.prob(ma, mb) > 0.0;
            let rev = self.jumps.prob(mb, ma) > 0.0 && self.prop.contains_key(&(b, a));
            if fwd && !rev {
                return Err(Error::parse(
                    origin,
                    1,
                    format!(
                        "move {}:{} -> {}:{} has no reverse",
                        ma.number(),
                        self.states[a].value,
                        mb.number(),
                        self.states[b].value
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn chain_state(&self, i: usize) -> ChainState {
        ChainState::new(self.states[i].model, vec![self.states[i].value])
    }

    pub fn chain_states(&self) -> Vec<ChainState> {
        (0..self.len()).map(|i| self.chain_state(i)).collect()
    }

    pub fn index_of(&self, s: &ChainState) -> Option<usize> {
        if s.params.len() != 1 {
            return None;
        }
        self.states
            .iter()
            .position(|t| t.model == s.model && t.value == s.params[0])
    }

    /// Normalised target probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.states.iter().map(|s| s.log_mass.exp()).sum();
        self.states.iter().map(|s| s.log_mass.exp() / total).collect()
    }

    /// Whether every state has a within-model proposal row.
    pub fn has_within(&self) -> bool {
        (0..self.len()).all(|a| self.row(a, self.states[a].model).next().is_some())
    }

    /// Whether any jump changes the model.
    pub fn has_jumps(&self) -> bool {
        (0..self.n_models()).any(|m| self.jumps.neighbours(ModelIndex(m)).any(|(t, _)| t.0 != m))
    }

    fn row(&self, from: usize, to: ModelIndex) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len())
            .filter(move |&b| self.states[b].model == to)
            .filter_map(move |b| self.prop.get(&(from, b)).map(|&p| (b, p)))
    }

    fn mass(&self, a: usize, b: usize) -> f64 {
        self.prop.get(&(a, b)).copied().unwrap_or(0.0)
    }

    fn index(&self, s: &ChainState) -> usize {
        self.index_of(s)
            .unwrap_or_else(|| panic!("state {s:?} is not in toy space `{}`", self.name))
    }

    fn trial(&self, a: usize, b: usize) -> Trial<ChainState> {
        let (ma, mb) = (self.states[a].model, self.states[b].model);
        let log_fwd = (self.jumps.prob(ma, mb) * self.mass(a, b)).ln();
        let log_rev = (self.jumps.prob(mb, ma) * self.mass(b, a)).ln();
        Trial::new(self.chain_state(b), log_fwd, log_rev, 0.0)
    }

    /// The within-model proposal, for MH and GMTM.
    pub fn within(&self) -> ToyWithin<'_> {
        ToyWithin(self)
    }
}

impl ModelSpace for ToySpace {
    fn n_models(&self) -> usize {
        self.jumps.n_models()
    }
    fn dim(&self, _: ModelIndex) -> usize {
        1
    }
}

impl TargetDensity<ChainState> for ToySpace {
    fn log_target(&self, state: &ChainState) -> f64 {
        self.index_of(state)
            .map_or(f64::NEG_INFINITY, |i| self.states[i].log_mass)
    }
}

impl ManifestTarget<ChainState> for ToySpace {
    fn log_manifest(&self, state: &ChainState) -> f64 {
        self.index_of(state)
            .map_or(f64::NEG_INFINITY, |i| self.states[i].log_aux)
    }
}

impl SmoothTarget for ToySpace {
    /// Slope of the log mass between the two grid points nearest to the
    /// state, with unit negative curvature. Any positive weight is valid; this
    /// one only has to be a deterministic function of the anchor.
    fn expansion(&self, state: &ChainState) -> LocalExpansion {
        let v = state.params[0];
        let mut grid: Vec<(f64, f64)> = self
            .states
            .iter()
            .filter(|s| s.model == state.model)
            .map(|s| (s.value, s.log_mass))
            .collect();
        grid.sort_by(|a, b| (a.0 - v).abs().total_cmp(&(b.0 - v).abs()).then(a.0.total_cmp(&b.0)));
        let slope = if grid.len() >= 2 && grid[0].0 != grid[1].0 {
            (grid[1].1 - grid[0].1) / (grid[1].0 - grid[0].0)
        } else {
            0.0
        };
        LocalExpansion::new(
            vec![v],
            DVector::from_element(1, slope),
            DMatrix::from_element(1, 1, -1.0),
        )
        .expect("1-d expansion is well formed")
    }

    fn embed(&self, anchor: &ChainState, model: ModelIndex) -> ChainState {
        ChainState::new(model, anchor.params.clone())
    }
}

fn sample_row<R: Rng + ?Sized>(rng: &mut R, row: &[(usize, f64)]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(b, p) in row {
        acc += p;
        if u < acc {
            return b;
        }
    }
    row.last().expect("proposal row is nonempty").0
}

impl JumpProposal<ChainState> for ToySpace {
    type Move = ();
    type Route = ModelIndex;

    fn choose_move<R: Rng + ?Sized>(&self, _: &mut R, _: &ChainState) -> Option<()> {
        Some(())
    }
    fn reverse_move(&self, _: &ChainState, _: &()) {}

    fn choose_route<R: Rng + ?Sized>(&self, rng: &mut R, x: &ChainState, _: &()) -> Option<ModelIndex> {
        Some(self.jumps.sample(rng, x.model))
    }

    fn reverse_route(&self, x: &ChainState, _: &ChainState, _: &(), _: &ModelIndex) -> ModelIndex {
        x.model
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: &ChainState, _: &(), to: &ModelIndex) -> Trial<ChainState> {
        let a = self.index(x);
        let row: Vec<(usize, f64)> = self.row(a, *to).collect();
        let b = sample_row(rng, &row);
        self.trial(a, b)
    }

    fn label(&self, _: &()) -> &'static str {
        "jump"
    }
}

impl EnumerableJump<ChainState> for ToySpace {
    fn moves(&self, _: &ChainState) -> Vec<((), f64)> {
        vec![((), 1.0)]
    }
    fn routes(&self, x: &ChainState, _: &()) -> Vec<(ModelIndex, f64)> {
        self.jumps.neighbours(x.model).collect()
    }
    fn outcomes(&self, x: &ChainState, _: &(), to: &ModelIndex) -> Vec<(Trial<ChainState>, f64)> {
        let a = self.index(x);
        self.row(a, *to).map(|(b, p)| (self.trial(a, b), p)).collect()
    }
}

/// Within-model proposal of a toy space.
#[derive(Debug, Clone, Copy)]
pub struct ToyWithin<'a>(pub &'a ToySpace);

impl ProposalKernel for ToyWithin<'_> {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, from: &ChainState) -> (Vec<f64>, f64) {
        let a = self.0.index(from);
        let row: Vec<(usize, f64)> = self.0.row(a, from.model).collect();
        let b = sample_row(rng, &row);
        (vec![self.0.states[b].value], self.0.mass(a, b).ln())
    }

    fn log_density(&self, from: &ChainState, to: &ChainState) -> f64 {
        match (self.0.index_of(from), self.0.index_of(to)) {
            (Some(a), Some(b)) if from.model == to.model => self.0.mass(a, b).ln(),
            _ => f64::NEG_INFINITY,
        }
    }
}

impl EnumerableKernel for ToyWithin<'_> {
    fn support(&self, from: &ChainState) -> Vec<(Vec<f64>, f64)> {
        let a = self.0.index(from);
        self.0
            .row(a, from.model)
            .map(|(b, p)| (vec![self.0.states[b].value], p))
            .collect()
    }
}
