//! Split/combine and birth/death moves.
//!
//! States are labelled. A split of class `c*` keeps the first child at `c*`'s
//! position and inserts the second at a uniform position `0..=C`; a combine
//! picks an ordered pair `(keep, remove)`. A birth inserts the new class at a
//! uniform position and a death removes a uniformly chosen empty class. With
//! these labelled routes the split ratio reduces to `P_c(C+1)/P_s(C)` and the
//! birth ratio carries `(C+1)/(C_0+1)`.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::data::{pattern_items, ITEMS};
use super::model::{log_beta_pdf, LcModel, LcState};
use crate::error::{Error, Result};
use crate::proposal::{JumpProposal, Trial};

/// Smallest and largest `λ` used when forming Beta proposal parameters.
pub const LAMBDA_CLAMP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LcMove {
    Split,
    Combine,
    Birth,
    Death,
}

impl LcMove {
    pub const ALL: [LcMove; 4] = [Self::Split, Self::Combine, Self::Birth, Self::Death];

    pub fn label(self) -> &'static str {
        match self {
            Self::Split => "split",
            Self::Combine => "combine",
            Self::Birth => "birth",
            Self::Death => "death",
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Self::Split => Self::Combine,
            Self::Combine => Self::Split,
            Self::Birth => Self::Death,
            Self::Death => Self::Birth,
        }
    }
}

/// Which classes a move acts on (0-based labels).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcRoute {
    Split { class: usize, insert: usize },
    Combine { keep: usize, remove: usize },
    Birth { insert: usize },
    Death { class: usize },
}

/// Proposal for the four dimension-changing moves.
#[derive(Debug, Clone, Copy)]
pub struct LcJump<'a> {
    pub model: &'a LcModel,
    /// `u ~ Be(α, β)` splits the weight.
    pub alpha: f64,
    pub beta: f64,
    /// Concentration of the `λ` proposals.
    pub tau: f64,
}

fn clamp(l: f64) -> f64 {
    l.clamp(LAMBDA_CLAMP, 1.0 - LAMBDA_CLAMP)
}

fn log_lambda_proposal(l: f64, centre: f64, tau: f64) -> f64 {
    let c = clamp(centre);
    log_beta_pdf(l, tau * c, tau * (1.0 - c))
}

fn draw_lambda<R: Rng + ?Sized>(rng: &mut R, centre: f64, tau: f64) -> f64 {
    let c = clamp(centre);
    Beta::new(tau * c, tau * (1.0 - c))
        .expect("positive parameters")
        .sample(rng)
}

fn in_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

fn pattern_lik(lambda: &[f64; ITEMS], pattern: u8) -> f64 {
    pattern_items(pattern as usize)
        .iter()
        .zip(lambda)
        .map(|(&y, &l)| if y { l } else { 1.0 - l })
        .product()
}

impl<'a> LcJump<'a> {
    pub fn new(model: &'a LcModel, alpha: f64, beta: f64, tau: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("tau", tau)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            model,
            alpha,
            beta,
            tau,
        })
    }

    /// Probability of proposing a split (vs combine) from `C` classes.
    pub fn p_split(&self, c: usize) -> f64 {
        if c <= 1 {
            1.0
        } else if c >= self.model.c_max {
            0.0
        } else {
            0.5
        }
    }

    /// Probability of proposing a birth (vs death) from `C` classes.
    pub fn p_birth(&self, c: usize) -> f64 {
        self.p_split(c)
    }

    /// `ln` probability of choosing `mv` from `C` classes, including the even
    /// choice between the two move pairs.
    pub fn log_move_prob(&self, c: usize, mv: LcMove) -> f64 {
        let p = match mv {
            LcMove::Split => self.p_split(c),
            LcMove::Combine => 1.0 - self.p_split(c),
            LcMove::Birth => self.p_birth(c),
            LcMove::Death => 1.0 - self.p_birth(c),
        };
        (0.5 * p).ln()
    }

    /// `ln g(u)` of the weight split.
    fn log_g_u(&self, u: f64) -> f64 {
        log_beta_pdf(u, self.alpha, self.beta)
    }

    /// `ln P_alloc`: probability that the subjects in `kids` were split
    /// between the two children exactly as in `s`, each subject choosing with
    /// odds `π_a f(y | λ_a) : π_b f(y | λ_b)`.
    fn log_p_alloc(&self, s: &LcState, a: usize, b: usize) -> f64 {
        let mut total = 0.0;
        for (&z, &p) in s.z.iter().zip(self.model.data.subjects()) {
            let z = z as usize;
            if z != a && z != b {
                continue;
            }
            let wa = s.pi[a] * pattern_lik(&s.lambda[a], p);
            let wb = s.pi[b] * pattern_lik(&s.lambda[b], p);
            let w = if z == a { wa } else { wb };
            total += (w / (wa + wb)).ln();
        }
        total
    }

    /// `ln` density of the split draws `(u, λ_a, λ_b)` around `λ*`.
    fn log_split_draws(&self, u: f64, la: &[f64; ITEMS], lb: &[f64; ITEMS], star: &[f64; ITEMS]) -> f64 {
        self.log_g_u(u)
            + (0..ITEMS)
                .map(|j| log_lambda_proposal(la[j], star[j], self.tau) + log_lambda_proposal(lb[j], star[j], self.tau))
                .sum::<f64>()
    }

    /// `ln` density of the combine draw `λ*` around the mean of the parts.
    fn log_combine_draw(&self, star: &[f64; ITEMS], la: &[f64; ITEMS], lb: &[f64; ITEMS]) -> f64 {
        (0..ITEMS)
            .map(|j| log_lambda_proposal(star[j], 0.5 * (la[j] + lb[j]), self.tau))
            .sum()
    }

    fn log_lambda_prior(&self, l: &[f64; ITEMS]) -> f64 {
        let (a, b) = self.model.lambda_prior;
        l.iter().map(|&v| log_beta_pdf(v, a, b)).sum()
    }

    fn split<R: Rng + ?Sized>(&self, rng: &mut R, x: &LcState, class: usize, insert: usize) -> Trial<LcState> {
        let c = x.classes();
        let star = x.lambda[class];
        let u = Beta::new(self.alpha, self.beta).expect("positive").sample(rng);
        let la: [f64; ITEMS] = std::array::from_fn(|j| draw_lambda(rng, star[j], self.tau));
        let lb: [f64; ITEMS] = std::array::from_fn(|j| draw_lambda(rng, star[j], self.tau));
        if !in_unit(u) || !la.iter().chain(&lb).all(|&l| in_unit(l)) {
            // Keep the stream position independent of the allocation below.
            return Trial::infeasible(x.clone());
        }
        let ps = x.pi[class];
        let mut pi = x.pi.clone();
        let mut lambda = x.lambda.clone();
        pi[class] = ps * u;
        lambda[class] = la;
        pi.insert(insert, ps * (1.0 - u));
        lambda.insert(insert, lb);
        let a = if insert > class { class } else { class + 1 };
        let b = insert;
        let mut z = Vec::with_capacity(x.z.len());
        let mut log_alloc = 0.0;
        for (&k, &p) in x.z.iter().zip(self.model.data.subjects()) {
            let k = k as usize;
            let v: f64 = rng.random();
            if k == class {
                let wa = pi[a] * pattern_lik(&la, p);
                let wb = pi[b] * pattern_lik(&lb, p);
                let qa = wa / (wa + wb);
                if v < qa {
                    z.push(a as u8);
                    log_alloc += qa.ln();
                } else {
                    z.push(b as u8);
                    log_alloc += (1.0 - qa).ln();
                }
            } else {
                z.push(if k >= insert { k + 1 } else { k } as u8);
            }
        }
        let cf = c as f64;
        let log_fwd = self.log_move_prob(c, LcMove::Split) - cf.ln() - (cf + 1.0).ln()
            + self.log_split_draws(u, &la, &lb, &star)
            + log_alloc;
        let log_rev = self.log_move_prob(c + 1, LcMove::Combine) - (cf + 1.0).ln() - cf.ln()
            + self.log_combine_draw(&star, &la, &lb);
        Trial::new(LcState { pi, lambda, z }, log_fwd, log_rev, ps.ln())
    }

    fn combine<R: Rng + ?Sized>(&self, rng: &mut R, x: &LcState, keep: usize, remove: usize) -> Trial<LcState> {
        let c = x.classes();
        let (la, lb) = (x.lambda[keep], x.lambda[remove]);
        let star: [f64; ITEMS] = std::array::from_fn(|j| draw_lambda(rng, 0.5 * (la[j] + lb[j]), self.tau));
        if !star.iter().all(|&l| in_unit(l)) {
            return Trial::infeasible(x.clone());
        }
        let ps = x.pi[keep] + x.pi[remove];
        let u = x.pi[keep] / ps;
        let merged = if remove > keep { keep } else { keep - 1 };
        let mut pi = x.pi.clone();
        let mut lambda = x.lambda.clone();
        pi.remove(remove);
        lambda.remove(remove);
        pi[merged] = ps;
        lambda[merged] = star;
        let z =
            x.z.iter()
                .map(|&k| {
                    let k = k as usize;
                    if k == keep || k == remove {
                        merged as u8
                    } else if k > remove {
                        (k - 1) as u8
                    } else {
                        k as u8
                    }
                })
                .collect();
        let cf = c as f64;
        let log_fwd =
            self.log_move_prob(c, LcMove::Combine) - cf.ln() - (cf - 1.0).ln() + self.log_combine_draw(&star, &la, &lb);
        let log_rev = self.log_move_prob(c - 1, LcMove::Split) - (cf - 1.0).ln() - cf.ln()
            + self.log_split_draws(u, &la, &lb, &star)
            + self.log_p_alloc(x, keep, remove);
        Trial::new(LcState { pi, lambda, z }, log_fwd, log_rev, -ps.ln())
    }

    fn birth<R: Rng + ?Sized>(&self, rng: &mut R, x: &LcState, insert: usize) -> Trial<LcState> {
        let c = x.classes();
        let cf = c as f64;
        let w = Beta::new(1.0, cf).expect("positive").sample(rng);
        let (a, b) = self.model.lambda_prior;
        let prior = Beta::new(a, b).expect("positive prior");
        let l: [f64; ITEMS] = std::array::from_fn(|_| prior.sample(rng));
        if !in_unit(w) || !l.iter().all(|&v| in_unit(v)) {
            return Trial::infeasible(x.clone());
        }
        let mut pi: Vec<f64> = x.pi.iter().map(|p| p * (1.0 - w)).collect();
        pi.insert(insert, w);
        let mut lambda = x.lambda.clone();
        lambda.insert(insert, l);
        let z =
            x.z.iter()
                .map(|&k| if k as usize >= insert { k + 1 } else { k })
                .collect();
        let c0 = x.empty_classes().len() as f64;
        let log_fwd = self.log_move_prob(c, LcMove::Birth) - (cf + 1.0).ln()
            + log_beta_pdf(w, 1.0, cf)
            + self.log_lambda_prior(&l);
        let log_rev = self.log_move_prob(c + 1, LcMove::Death) - (c0 + 1.0).ln();
        let log_jac = (cf - 1.0) * (-w).ln_1p();
        Trial::new(LcState { pi, lambda, z }, log_fwd, log_rev, log_jac)
    }

    fn death(&self, x: &LcState, class: usize) -> Trial<LcState> {
        let c = x.classes();
        let cf = c as f64;
        let w = x.pi[class];
        let mut pi = x.pi.clone();
        let mut lambda = x.lambda.clone();
        pi.remove(class);
        let l = lambda.remove(class);
        for p in &mut pi {
            *p /= 1.0 - w;
        }
        let z =
            x.z.iter()
                .map(|&k| if k as usize > class { k - 1 } else { k })
                .collect();
        let c0 = x.empty_classes().len() as f64;
        let log_fwd = self.log_move_prob(c, LcMove::Death) - c0.ln();
        let log_rev = self.log_move_prob(c - 1, LcMove::Birth) - cf.ln()
            + log_beta_pdf(w, 1.0, cf - 1.0)
            + self.log_lambda_prior(&l);
        let log_jac = -(cf - 2.0) * (-w).ln_1p();
        Trial::new(LcState { pi, lambda, z }, log_fwd, log_rev, log_jac)
    }
}

impl JumpProposal<LcState> for LcJump<'_> {
    type Move = LcMove;
    type Route = LcRoute;

    fn choose_move<R: Rng + ?Sized>(&self, rng: &mut R, x: &LcState) -> Option<LcMove> {
        let c = x.classes();
        let pair: f64 = rng.random();
        let dir: f64 = rng.random();
        Some(if pair < 0.5 {
            if dir < self.p_split(c) {
                LcMove::Split
            } else {
                LcMove::Combine
            }
        } else if dir < self.p_birth(c) {
            LcMove::Birth
        } else {
            LcMove::Death
        })
    }

    fn reverse_move(&self, _: &LcState, mv: &LcMove) -> LcMove {
        mv.reverse()
    }

    fn choose_route<R: Rng + ?Sized>(&self, rng: &mut R, x: &LcState, mv: &LcMove) -> Option<LcRoute> {
        let c = x.classes();
        match mv {
            LcMove::Split => Some(LcRoute::Split {
                class: rng.random_range(0..c),
                insert: rng.random_range(0..=c),
            }),
            LcMove::Combine => {
                if c < 2 {
                    return None;
                }
                let keep = rng.random_range(0..c);
                let mut remove = rng.random_range(0..c - 1);
                if remove >= keep {
                    remove += 1;
                }
                Some(LcRoute::Combine { keep, remove })
            }
            LcMove::Birth => Some(LcRoute::Birth {
                insert: rng.random_range(0..=c),
            }),
            LcMove::Death => {
                let empty = x.empty_classes();
                if empty.is_empty() || c < 2 {
                    return None;
                }
                Some(LcRoute::Death {
                    class: empty[rng.random_range(0..empty.len())],
                })
            }
        }
    }

    fn reverse_route(&self, _: &LcState, _: &LcState, _: &LcMove, route: &LcRoute) -> LcRoute {
        match *route {
            LcRoute::Split { class, insert } => LcRoute::Combine {
                keep: if insert > class { class } else { class + 1 },
                remove: insert,
            },
            LcRoute::Combine { keep, remove } => LcRoute::Split {
                class: if remove > keep { keep } else { keep - 1 },
                insert: remove,
            },
            LcRoute::Birth { insert } => LcRoute::Death { class: insert },
            LcRoute::Death { class } => LcRoute::Birth { insert: class },
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: &LcState, _: &LcMove, route: &LcRoute) -> Trial<LcState> {
        match *route {
            LcRoute::Split { class, insert } => self.split(rng, x, class, insert),
            LcRoute::Combine { keep, remove } => self.combine(rng, x, keep, remove),
            LcRoute::Birth { insert } => self.birth(rng, x, insert),
            LcRoute::Death { class } => self.death(x, class),
        }
    }

    fn label(&self, mv: &LcMove) -> &'static str {
        mv.label()
    }
}

/// The split acceptance ratio written out term by term:
///
/// ```text
/// ln A = ln[f*(y|θ_{C+1}) p(θ_{C+1})] − ln[f*(y|θ_C) p(θ_C)]
///      + ln P_c(C+1) − ln P_s(C) − ln P_alloc
///      + Σ_j ln g(λ*_j) − ln g(u) − Σ_j ln g(λ_{j|c1}) g(λ_{j|c2}) + ln π*
/// ```
///
/// `x` is the `C`-class state, `y` the split state with children at
/// `(a, b)` that came from class `class` of `x`.
pub fn split_log_a(jump: &LcJump<'_>, x: &LcState, y: &LcState, class: usize, a: usize, b: usize) -> f64 {
    use crate::target::TargetDensity;
    let m = jump.model;
    let c = x.classes();
    let star = x.lambda[class];
    let ps = x.pi[class];
    let u = y.pi[a] / ps;
    m.log_target(y) - m.log_target(x) + (1.0 - jump.p_split(c + 1)).ln()
        - jump.p_split(c).ln()
        - jump.log_p_alloc(y, a, b)
        + jump.log_combine_draw(&star, &y.lambda[a], &y.lambda[b])
        - jump.log_split_draws(u, &y.lambda[a], &y.lambda[b], &star)
        + ps.ln()
}

/// The birth acceptance ratio in closed form,
///
/// ```text
/// ln A = (δ−1) ln π* + (n + Cδ − C) ln(1−π*) − ln B(Cδ, δ)
///      + ln P_d(C+1) − ln P_b(C) + ln(C+1) − ln(C_0+1) − ln g(π*) + ln|J|
/// ```
///
/// with `λ*` drawn from its prior. `C_0` counts empty classes before the
/// birth.
pub fn birth_log_a(jump: &LcJump<'_>, x: &LcState, w: f64) -> f64 {
    use statrs::function::beta::ln_beta;
    let m = jump.model;
    let c = x.classes() as f64;
    let d = m.delta;
    let n = m.n() as f64;
    let c0 = x.empty_classes().len() as f64;
    (d - 1.0) * w.ln() + (n + c * d - c) * (-w).ln_1p() - ln_beta(c * d, d) + (1.0 - jump.p_birth(x.classes() + 1)).ln()
        - jump.p_birth(x.classes()).ln()
        + (c + 1.0).ln()
        - (c0 + 1.0).ln()
        - log_beta_pdf(w, 1.0, c)
        + (c - 1.0) * (-w).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::target::TargetDensity;

    fn state_with(model: &LcModel, c: usize, seed: u64) -> LcState {
        let mut rng = RngStream::new(seed, 0).rng();
        let mut s = LcState::single(model.n());
        s.pi = vec![1.0 / c as f64; c];
        s.lambda = (0..c)
            .map(|_| std::array::from_fn(|_| rng.random::<f64>() * 0.8 + 0.1))
            .collect();
        for _ in 0..3 {
            s = model.gibbs_sweep(&mut rng, &s);
        }
        s
    }

    fn log_ratio(m: &LcModel, x: &LcState, t: &Trial<LcState>) -> f64 {
        m.log_target(&t.state) - m.log_target(x) + t.log_rev - t.log_fwd + t.log_jacobian
    }

    /// Runs the reverse route from `y` and returns the matching trial whose
    /// state equals `x` (the draw is replaced by `x`'s own parameters).
    fn reverse_terms(jump: &LcJump<'_>, x: &LcState, y: &LcState, mv: LcMove, route: LcRoute) -> (f64, f64, f64) {
        let rr = jump.reverse_route(x, y, &mv, &route);
        // Recompute the reverse trial densities for the known x by evaluating
        // the same formulas the forward draw of the reverse move uses.
        match rr {
            LcRoute::Combine { keep, remove } => {
                let ps = y.pi[keep] + y.pi[remove];
                let c = y.classes() as f64;
                let star = x.lambda[if remove > keep { keep } else { keep - 1 }];
                let fwd = jump.log_move_prob(y.classes(), LcMove::Combine) - c.ln() - (c - 1.0).ln()
                    + jump.log_combine_draw(&star, &y.lambda[keep], &y.lambda[remove]);
                let rev = jump.log_move_prob(y.classes() - 1, LcMove::Split) - (c - 1.0).ln() - c.ln()
                    + jump.log_split_draws(y.pi[keep] / ps, &y.lambda[keep], &y.lambda[remove], &star)
                    + jump.log_p_alloc(y, keep, remove);
                (fwd, rev, -ps.ln())
            }
            LcRoute::Death { class } => {
                let t = jump.death(y, class);
                assert_eq!(t.state.classes(), x.classes());
                (t.log_fwd, t.log_rev, t.log_jacobian)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn split_and_combine_are_reciprocal() {
        let m = LcModel::bundled();
        let jump = LcJump::new(&m, 2.0, 2.0, 10.0).unwrap();
        let mut rng = RngStream::new(11, 0).rng();
        for c in 1..5 {
            let x = state_with(&m, c, 20 + c as u64);
            for _ in 0..20 {
                let route = jump.choose_route(&mut rng, &x, &LcMove::Split).unwrap();
                let t = jump.draw(&mut rng, &x, &LcMove::Split, &route);
                if !t.is_feasible() {
                    continue;
                }
                let y = &t.state;
                y.validate(m.n(), m.c_max).unwrap();
                assert!((y.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let (fwd, rev, jac) = reverse_terms(&jump, &x, y, LcMove::Split, route);
                assert!((fwd - t.log_rev).abs() < 1e-9, "{fwd} {}", t.log_rev);
                assert!((rev - t.log_fwd).abs() < 1e-9);
                assert!((jac + t.log_jacobian).abs() < 1e-12);
                // Combining the children with the parent's λ restores x.
                let LcRoute::Combine { keep, remove } = jump.reverse_route(&x, y, &LcMove::Split, &route) else {
                    unreachable!()
                };
                let back = jump.combine(&mut rng, y, keep, remove);
                if !back.is_feasible() {
                    continue;
                }
                assert_eq!(back.state.z, x.z);
                for (p, q) in back.state.pi.iter().zip(&x.pi) {
                    assert!((p - q).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn split_ratio_matches_closed_form() {
        let m = LcModel::bundled();
        let jump = LcJump::new(&m, 2.0, 2.0, 10.0).unwrap();
        let mut rng = RngStream::new(12, 0).rng();
        let x = state_with(&m, 3, 31);
        for _ in 0..20 {
            let route = jump.choose_route(&mut rng, &x, &LcMove::Split).unwrap();
            let LcRoute::Split { class, insert } = route else {
                unreachable!()
            };
            let t = jump.draw(&mut rng, &x, &LcMove::Split, &route);
            if !t.is_feasible() {
                continue;
            }
            let a = if insert > class { class } else { class + 1 };
            let closed = split_log_a(&jump, &x, &t.state, class, a, insert);
            assert!((closed - log_ratio(&m, &x, &t)).abs() < 1e-8);
        }
    }

    #[test]
    fn birth_ratio_matches_closed_form_and_death_undoes_birth() {
        let m = LcModel::bundled();
        let jump = LcJump::new(&m, 2.0, 2.0, 10.0).unwrap();
        let mut rng = RngStream::new(13, 0).rng();
        for c in 1..5 {
            let x = state_with(&m, c, 40 + c as u64);
            for _ in 0..10 {
                let route = jump.choose_route(&mut rng, &x, &LcMove::Birth).unwrap();
                let t = jump.draw(&mut rng, &x, &LcMove::Birth, &route);
                let LcRoute::Birth { insert } = route else {
                    unreachable!()
                };
                let w = t.state.pi[insert];
                assert!((t.state.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!((birth_log_a(&jump, &x, w) - log_ratio(&m, &x, &t)).abs() < 1e-8);
                let (fwd, rev, jac) = reverse_terms(&jump, &x, &t.state, LcMove::Birth, route);
                assert!((fwd - t.log_rev).abs() < 1e-12);
                assert!((rev - t.log_fwd).abs() < 1e-12);
                assert!((jac + t.log_jacobian).abs() < 1e-12);
                let back = jump.death(&t.state, insert);
                assert_eq!(back.state.z, x.z);
                for (p, q) in back.state.pi.iter().zip(&x.pi) {
                    assert!((p - q).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn delta_one_birth_prior_ratio_by_hand() {
        let m = LcModel::bundled();
        let jump = LcJump::new(&m, 2.0, 2.0, 10.0).unwrap();
        let x = state_with(&m, 3, 50);
        let w: f64 = 0.2;
        // δ = 1: π*^0 (1−π*)^n / B(C, 1) = C (1−π*)^n.
        let by_hand = 3f64.ln() + 216.0 * (0.8f64).ln();
        let general = birth_log_a(&jump, &x, w)
            - ((1.0 - jump.p_birth(4)).ln() - jump.p_birth(3).ln() + 4f64.ln()
                - (x.empty_classes().len() as f64 + 1.0).ln()
                - log_beta_pdf(w, 1.0, 3.0)
                + 2.0 * (0.8f64).ln());
        assert!((general - by_hand).abs() < 1e-9);
    }

    #[test]
    fn death_without_empty_class_is_aborted() {
        let m = LcModel::bundled();
        let jump = LcJump::new(&m, 2.0, 2.0, 10.0).unwrap();
        let mut rng = RngStream::new(14, 0).rng();
        let mut x = state_with(&m, 2, 60);
        x.z = (0..m.n()).map(|i| (i % 2) as u8).collect();
        assert!(jump.choose_route(&mut rng, &x, &LcMove::Death).is_none());
    }

    #[test]
    fn forced_directions_at_the_bounds() {
        let m = LcModel::bundled();
        let jump = LcJump::new(&m, 2.0, 2.0, 10.0).unwrap();
        assert_eq!(jump.p_split(1), 1.0);
        assert_eq!(jump.p_split(20), 0.0);
        assert_eq!(jump.p_split(7), 0.5);
        let mut rng = RngStream::new(15, 0).rng();
        let x = LcState::single(m.n());
        for _ in 0..50 {
            let mv = jump.choose_move(&mut rng, &x).unwrap();
            assert!(matches!(mv, LcMove::Split | LcMove::Birth));
        }
    }

    #[test]
    fn manifest_weight_ignores_allocations() {
        use crate::target::ManifestTarget;
        let m = LcModel::bundled();
        let mut x = state_with(&m, 3, 70);
        let a = m.log_manifest(&x);
        x.z.reverse();
        assert_eq!(a.to_bits(), m.log_manifest(&x).to_bits());
    }
}
