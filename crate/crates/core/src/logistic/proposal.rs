//! Proposals for the logistic model space.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::model::LogisticModel;
use crate::error::{Error, Result};
use crate::proposal::{JumpMap, JumpProposal, ProposalKernel, Trial};
use crate::state::{ChainState, ModelIndex};
use crate::target::ModelSpace;

fn log_normal(x: f64, mean: f64, sigma: f64) -> f64 {
    let z = (x - mean) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
}

/// How coefficients are mapped between nested models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Embedding {
    /// Every coefficient of the destination model is drawn around the
    /// embedded source point: `y ~ N(pad(x), σ² I)`. Reverse: `x ~
    /// N(pad(y), σ² I)`.
    #[default]
    Perturb,
    /// Shared coefficients are carried over unchanged; a new coefficient is
    /// `u ~ N(0, σ²)`; a dropped coefficient is discarded.
    Carry,
}

impl FromStr for Embedding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perturb" => Ok(Self::Perturb),
            "carry" => Ok(Self::Carry),
            _ => Err(Error::Invalid(format!("unknown embedding `{s}`"))),
        }
    }
}

/// The dimension-matching map for an [`Embedding`]; `|J| = 1` in both cases.
#[derive(Debug, Clone, Copy)]
pub struct NestedJumpMap<'a> {
    pub model: &'a LogisticModel,
    pub embedding: Embedding,
}

impl NestedJumpMap<'_> {
    fn check_adjacent(&self, from: ModelIndex, to: ModelIndex) -> Result<()> {
        if from.0 >= self.model.n_models() || to.0 >= self.model.n_models() || self.model.jumps().prob(from, to) == 0.0
        {
            return Err(Error::Unreachable {
                from: from.number(),
                to: to.number(),
            });
        }
        Ok(())
    }

    fn new_columns(&self, from: ModelIndex, to: ModelIndex) -> Vec<usize> {
        let src = self.model.columns(from);
        self.model
            .columns(to)
            .iter()
            .enumerate()
            .filter(|(_, c)| !src.contains(c))
            .map(|(i, _)| i)
            .collect()
    }

    fn apply(&self, from: &ChainState, u: &[f64], to: ModelIndex) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        self.model.check(from)?;
        self.check_adjacent(from.model, to)?;
        let (du, _) = self.aux_dims(from.model, to)?;
        if u.len() != du {
            return Err(Error::Dimension {
                expected: du,
                actual: u.len(),
            });
        }
        let padded = self.model.pad(&from.params, from.model, to);
        match self.embedding {
            Embedding::Perturb => {
                let y: Vec<f64> = padded.iter().zip(u).map(|(p, e)| p + e).collect();
                let back = self.model.pad(&y, to, from.model);
                let u_prime = from.params.iter().zip(&back).map(|(x, b)| x - b).collect();
                Ok((y, u_prime, 0.0))
            }
            Embedding::Carry => {
                let mut y = padded;
                for (slot, &v) in self.new_columns(from.model, to).iter().zip(u) {
                    y[*slot] = v;
                }
                let u_prime = self
                    .new_columns(to, from.model)
                    .iter()
                    .map(|&i| from.params[i])
                    .collect();
                Ok((y, u_prime, 0.0))
            }
        }
    }
}

impl JumpMap for NestedJumpMap<'_> {
    fn forward(&self, from: &ChainState, u: &[f64], to: ModelIndex) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        self.apply(from, u, to)
    }

    fn inverse(&self, to: &ChainState, u_prime: &[f64], from: ModelIndex) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let (x, u, lj) = self.apply(to, u_prime, from)?;
        Ok((x, u, -lj))
    }

    fn aux_dims(&self, from: ModelIndex, to: ModelIndex) -> Result<(usize, usize)> {
        self.check_adjacent(from, to)?;
        let (df, dt) = (self.model.dim(from), self.model.dim(to));
        Ok(match self.embedding {
            Embedding::Perturb => (dt, df),
            Embedding::Carry => (dt.saturating_sub(df), df.saturating_sub(dt)),
        })
    }
}

/// Between-model proposal: destination `m' ~ j(m, ·)` then the embedding.
#[derive(Debug, Clone, Copy)]
pub struct LogisticJump<'a> {
    pub model: &'a LogisticModel,
    pub sigma: f64,
    pub embedding: Embedding,
}

impl<'a> LogisticJump<'a> {
    pub fn new(model: &'a LogisticModel, sigma: f64, embedding: Embedding) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Invalid("proposal scale σ_p must be positive".into()));
        }
        Ok(Self {
            model,
            sigma,
            embedding,
        })
    }

    fn map(&self) -> NestedJumpMap<'a> {
        NestedJumpMap {
            model: self.model,
            embedding: self.embedding,
        }
    }

    /// `log g(u)` of the auxiliary draw for a jump `from → to`.
    fn log_aux(&self, u: &[f64]) -> f64 {
        u.iter().map(|&v| log_normal(v, 0.0, self.sigma)).sum()
    }
}

impl JumpProposal<ChainState> for LogisticJump<'_> {
    type Move = ();
    type Route = ModelIndex;

    fn choose_move<R: Rng + ?Sized>(&self, _: &mut R, _: &ChainState) -> Option<()> {
        Some(())
    }
    fn reverse_move(&self, _: &ChainState, _: &()) {}

    fn choose_route<R: Rng + ?Sized>(&self, rng: &mut R, x: &ChainState, _: &()) -> Option<ModelIndex> {
        Some(self.model.jumps().sample(rng, x.model))
    }

    fn reverse_route(&self, x: &ChainState, _: &ChainState, _: &(), _: &ModelIndex) -> ModelIndex {
        x.model
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: &ChainState, _: &(), to: &ModelIndex) -> Trial<ChainState> {
        let map = self.map();
        let (du, _) = map.aux_dims(x.model, *to).expect("route is adjacent");
        let u: Vec<f64> = (0..du)
            .map(|_| self.sigma * Distribution::<f64>::sample(&StandardNormal, rng))
            .collect();
        let (y, u_prime, log_jac) = map.forward(x, &u, *to).expect("route is adjacent");
        let j = self.model.jumps();
        let log_fwd = j.prob(x.model, *to).ln() + self.log_aux(&u);
        let log_rev = j.prob(*to, x.model).ln() + self.log_aux(&u_prime);
        Trial::new(ChainState::new(*to, y), log_fwd, log_rev, log_jac)
    }

    fn label(&self, _: &()) -> &'static str {
        "jump"
    }
}

/// Within-model random walk `β' ~ N(β, σ² I)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianWalk {
    pub sigma: f64,
}

impl ProposalKernel for GaussianWalk {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, from: &ChainState) -> (Vec<f64>, f64) {
        let mut lp = 0.0;
        let y = from
            .params
            .iter()
            .map(|&b| {
                let e: f64 = StandardNormal.sample(rng);
                lp += log_normal(e * self.sigma, 0.0, self.sigma);
                b + self.sigma * e
            })
            .collect();
        (y, lp)
    }

    fn log_density(&self, from: &ChainState, to: &ChainState) -> f64 {
        from.params
            .iter()
            .zip(&to.params)
            .map(|(a, b)| log_normal(*b, *a, self.sigma))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn maps_round_trip_with_unit_jacobian() {
        let model = LogisticModel::bundled();
        let mut rng = RngStream::new(8, 0).rng();
        for embedding in [Embedding::Perturb, Embedding::Carry] {
            let map = NestedJumpMap {
                model: &model,
                embedding,
            };
            for a in 0..5 {
                for (b, _) in model.jumps().neighbours(ModelIndex(a)) {
                    let from = ModelIndex(a);
                    let x = ChainState::new(from, (0..model.dim(from)).map(|_| rng.random::<f64>() - 0.5).collect());
                    let (du, dup) = map.aux_dims(from, b).unwrap();
                    assert_eq!(model.dim(from) + du, model.dim(b) + dup);
                    let u: Vec<f64> = (0..du).map(|_| rng.random::<f64>()).collect();
                    let (y, up, lj) = map.forward(&x, &u, b).unwrap();
                    let (x2, u2, lj2) = map.inverse(&ChainState::new(b, y), &up, from).unwrap();
                    for (p, q) in x.params.iter().zip(&x2).chain(u.iter().zip(&u2)) {
                        assert!((p - q).abs() < 1e-12);
                    }
                    assert!((lj + lj2).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_adjacent_jump_is_an_error() {
        let model = LogisticModel::bundled();
        let map = NestedJumpMap {
            model: &model,
            embedding: Embedding::Carry,
        };
        let x = ChainState::new(ModelIndex(0), vec![0.0]);
        assert!(matches!(
            map.forward(&x, &[], ModelIndex(4)),
            Err(Error::Unreachable { .. })
        ));
    }

    #[test]
    fn reverse_density_is_the_forward_formula_from_y() {
        let model = LogisticModel::bundled();
        let mut rng = RngStream::new(2, 0).rng();
        for embedding in [Embedding::Perturb, Embedding::Carry] {
            let jump = LogisticJump::new(&model, 0.5, embedding).unwrap();
            let map = jump.map();
            let x = ChainState::new(ModelIndex(3), vec![0.3, -0.2, 0.1]);
            for to in [ModelIndex(1), ModelIndex(4)] {
                let t = jump.draw(&mut rng, &x, &(), &to);
                // The auxiliary draw that takes y back to x.
                let u_back: Vec<f64> = match embedding {
                    Embedding::Perturb => x
                        .params
                        .iter()
                        .zip(model.pad(&t.state.params, to, x.model))
                        .map(|(a, b)| a - b)
                        .collect(),
                    Embedding::Carry => map.new_columns(to, x.model).iter().map(|&i| x.params[i]).collect(),
                };
                let (back, _, _) = map.forward(&t.state, &u_back, x.model).unwrap();
                for (a, b) in back.iter().zip(&x.params) {
                    assert!((a - b).abs() < 1e-12);
                }
                let expect = model.jumps().prob(to, x.model).ln() + jump.log_aux(&u_back);
                assert!((t.log_rev - expect).abs() < 1e-12);
            }
        }
    }
}
