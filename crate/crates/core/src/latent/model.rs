use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use super::data::{pattern_items, LcData, ITEMS, PATTERNS};
use crate::error::{Error, Result};
use crate::target::{sentinel, ManifestTarget, TargetDensity};

/// `ln Be(x; a, b)`; `−∞` outside `(0, 1)`.
pub(crate) fn log_beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return f64::NEG_INFINITY;
    }
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)
}

/// Class weights, conditional success probabilities and allocations.
#[derive(Debug, Clone, PartialEq)]
pub struct LcState {
    pub pi: Vec<f64>,
    pub lambda: Vec<[f64; ITEMS]>,
    /// 0-based class of each subject, in [`LcData::subjects`] order.
    pub z: Vec<u8>,
}

impl LcState {
    /// One class with every `λ = 0.5` and every subject allocated to it.
    pub fn single(n: usize) -> Self {
        Self {
            pi: vec![1.0],
            lambda: vec![[0.5; ITEMS]],
            z: vec![0; n],
        }
    }

    pub fn classes(&self) -> usize {
        self.pi.len()
    }

    /// Subjects allocated to each class.
    pub fn occupancy(&self) -> Vec<u32> {
        let mut n = vec![0; self.classes()];
        for &c in &self.z {
            n[c as usize] += 1;
        }
        n
    }

    pub fn empty_classes(&self) -> Vec<usize> {
        self.occupancy()
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == 0)
            .map(|(c, _)| c)
            .collect()
    }

    pub fn validate(&self, n: usize, c_max: usize) -> Result<()> {
        let c = self.classes();
        if c == 0 || c > c_max || self.lambda.len() != c {
            return Err(Error::Invalid(format!("class count {c} outside 1..={c_max}")));
        }
        if self.z.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: self.z.len(),
            });
        }
        if (self.pi.iter().sum::<f64>() - 1.0).abs() > 1e-12 || self.pi.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Invalid("class weights must lie on the simplex".into()));
        }
        if self.lambda.iter().flatten().any(|&l| !(l > 0.0 && l < 1.0)) {
            return Err(Error::Invalid("success probabilities must lie in (0, 1)".into()));
        }
        if self.z.iter().any(|&z| z as usize >= c) {
            return Err(Error::Invalid("allocation outside 1..=C".into()));
        }
        Ok(())
    }
}

/// `ln Π_j λ_j^{y_j}(1 − λ_j)^{1−y_j}` for every pattern.
pub(crate) fn log_response_table(lambda: &[f64; ITEMS]) -> [f64; PATTERNS] {
    let lo: [f64; ITEMS] = std::array::from_fn(|j| lambda[j].ln());
    let l1: [f64; ITEMS] = std::array::from_fn(|j| (-lambda[j]).ln_1p());
    std::array::from_fn(|p| {
        pattern_items(p)
            .iter()
            .enumerate()
            .map(|(j, &y)| if y { lo[j] } else { l1[j] })
            .sum()
    })
}

/// `P(y) = Σ_c π_c Π_j λ_{j|c}^{y_j}(1 − λ_{j|c})^{1−y_j}`.
pub fn manifest_prob(pi: &[f64], lambda: &[[f64; ITEMS]], pattern: usize) -> f64 {
    let y = pattern_items(pattern);
    pi.iter()
        .zip(lambda)
        .map(|(p, l)| {
            p * l
                .iter()
                .zip(y)
                .map(|(&l, y)| if y { l } else { 1.0 - l })
                .product::<f64>()
        })
        .sum()
}

/// Latent class model with a Dirichlet(δ) prior on the weights, Beta priors
/// on every `λ` and a uniform prior on `C ∈ {1..C_max}`.
#[derive(Debug, Clone)]
pub struct LcModel {
    pub data: LcData,
    pub c_max: usize,
    pub delta: f64,
    /// Beta prior parameters of every `λ`.
    pub lambda_prior: (f64, f64),
}

impl LcModel {
    pub fn new(data: LcData, c_max: usize) -> Result<Self> {
        if !(2..=u8::MAX as usize).contains(&c_max) {
            return Err(Error::Invalid(format!("C_max must be in 2..=255, got {c_max}")));
        }
        Ok(Self {
            data,
            c_max,
            delta: 1.0,
            lambda_prior: (1.0, 1.0),
        })
    }

    pub fn bundled() -> Self {
        Self::new(LcData::bundled(), 20).expect("bundled settings are valid")
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    /// `Σ_i log[π_{z_i} Π_j λ^{y_j}(1 − λ)^{1−y_j}]`.
    pub fn complete_loglik(&self, s: &LcState) -> f64 {
        let c = s.classes();
        let mut counts = vec![[0u32; PATTERNS]; c];
        for (&z, &p) in s.z.iter().zip(self.data.subjects()) {
            counts[z as usize][p as usize] += 1;
        }
        let mut total = 0.0;
        for (k, row) in counts.iter().enumerate() {
            let nk: u32 = row.iter().sum();
            if nk == 0 {
                continue;
            }
            let table = log_response_table(&s.lambda[k]);
            total += f64::from(nk) * s.pi[k].ln();
            total += row
                .iter()
                .zip(&table)
                .filter(|(&m, _)| m > 0)
                .map(|(&m, &t)| f64::from(m) * t)
                .sum::<f64>();
        }
        sentinel(total)
    }

    /// `Σ_y freq(y) log P(y)`; does not depend on the allocations.
    pub fn incomplete_loglik(&self, pi: &[f64], lambda: &[[f64; ITEMS]]) -> f64 {
        let total = self
            .data
            .frequency
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0)
            .map(|(p, &f)| f64::from(f) * manifest_prob(pi, lambda, p).ln())
            .sum();
        sentinel(total)
    }

    /// `ln p(π | C) + Σ ln p(λ) + ln p(C)`.
    pub fn log_prior(&self, s: &LcState) -> f64 {
        let c = s.classes();
        if c == 0 || c > self.c_max {
            return f64::NEG_INFINITY;
        }
        let d = self.delta;
        let cf = c as f64;
        let mut lp = ln_gamma(cf * d) - cf * ln_gamma(d) - (self.c_max as f64).ln();
        if d != 1.0 {
            lp += (d - 1.0) * s.pi.iter().map(|p| p.ln()).sum::<f64>();
        }
        let (a, b) = self.lambda_prior;
        lp += s.lambda.iter().flatten().map(|&l| log_beta_pdf(l, a, b)).sum::<f64>();
        sentinel(lp)
    }

    /// Allocation probabilities of a subject with pattern `p`, proportional to
    /// `π_c Π_j λ^{y_j}(1 − λ)^{1−y_j}`.
    pub fn allocation_probs(&self, s: &LcState, pattern: usize) -> Vec<f64> {
        let y = pattern_items(pattern);
        let mut w: Vec<f64> =
            s.pi.iter()
                .zip(&s.lambda)
                .map(|(p, l)| {
                    p * l
                        .iter()
                        .zip(y)
                        .map(|(&l, y)| if y { l } else { 1.0 - l })
                        .product::<f64>()
                })
                .collect();
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total;
        }
        w
    }

    /// One Gibbs sweep: allocations, then weights, then success probabilities,
    /// each from its full conditional.
    pub fn gibbs_sweep<R: Rng + ?Sized>(&self, rng: &mut R, s: &LcState) -> LcState {
        let c = s.classes();
        let probs: Vec<Vec<f64>> = (0..PATTERNS).map(|p| self.allocation_probs(s, p)).collect();
        let mut z = Vec::with_capacity(s.z.len());
        let mut n = vec![0u32; c];
        let mut succ = vec![[0u32; ITEMS]; c];
        for &p in self.data.subjects() {
            let u: f64 = rng.random();
            let row = &probs[p as usize];
            let mut acc = 0.0;
            let mut k = c - 1;
            for (i, &w) in row.iter().enumerate() {
                acc += w;
                if u < acc {
                    k = i;
                    break;
                }
            }
            z.push(k as u8);
            n[k] += 1;
            for (j, y) in pattern_items(p as usize).into_iter().enumerate() {
                succ[k][j] += u32::from(y);
            }
        }
        let g: Vec<f64> = n
            .iter()
            .map(|&nk| {
                Gamma::new(self.delta + f64::from(nk), 1.0)
                    .expect("positive shape")
                    .sample(rng)
            })
            .collect();
        let total: f64 = g.iter().sum();
        let pi: Vec<f64> = g.iter().map(|v| v / total).collect();
        let (a, b) = self.lambda_prior;
        let lambda = (0..c)
            .map(|k| {
                std::array::from_fn(|j| {
                    let s = f64::from(succ[k][j]);
                    let f = f64::from(n[k]) - s;
                    let d = Beta::new(a + s, b + f).expect("positive parameters");
                    d.sample(rng).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
                })
            })
            .collect();
        LcState { pi, lambda, z }
    }
}

impl TargetDensity<LcState> for LcModel {
    fn log_target(&self, s: &LcState) -> f64 {
        let lp = self.log_prior(s);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        sentinel(self.complete_loglik(s) + lp)
    }
}

impl ManifestTarget<LcState> for LcModel {
    fn log_manifest(&self, s: &LcState) -> f64 {
        self.incomplete_loglik(&s.pi, &s.lambda)
    }
}

/// Sorts classes by descending weight, ties by `λ_{1|c}` then original
/// index, permuting `(π, λ, z)` jointly.
pub fn relabel(s: &LcState) -> LcState {
    let mut order: Vec<usize> = (0..s.classes()).collect();
    order.sort_by(|&a, &b| {
        s.pi[b]
            .total_cmp(&s.pi[a])
            .then(s.lambda[a][0].total_cmp(&s.lambda[b][0]))
            .then(a.cmp(&b))
    });
    let mut rank = vec![0u8; order.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new as u8;
    }
    LcState {
        pi: order.iter().map(|&k| s.pi[k]).collect(),
        lambda: order.iter().map(|&k| s.lambda[k]).collect(),
        z: s.z.iter().map(|&k| rank[k as usize]).collect(),
    }
}
