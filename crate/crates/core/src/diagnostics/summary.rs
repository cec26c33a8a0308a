use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::autocorr::{asymptotic_variance, autocorrelation, MIN_LENGTH};
use super::trace::Trace;
use crate::error::{Error, Result};
use crate::samplers::Outcome;

/// Autocorrelation lags reported per model.
pub const ACF_LAGS: usize = 20;

/// Acceptance accounting for one move type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveCounts {
    pub proposed: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub degenerate: u64,
}

impl MoveCounts {
    pub fn record(&mut self, o: Outcome) {
        self.proposed += 1;
        match o {
            Outcome::Accepted => self.accepted += 1,
            Outcome::Rejected => self.rejected += 1,
            Outcome::Degenerate => self.degenerate += 1,
        }
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Visit frequencies of models `1..=n_models` in a trace of 1-based model
/// numbers.
pub fn ergodic_probs(models: &[u32], n_models: u32) -> Result<Vec<f64>> {
    if models.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut counts = vec![0u64; n_models as usize];
    for &m in models {
        let i = (m as usize)
            .checked_sub(1)
            .filter(|&i| i < counts.len())
            .ok_or_else(|| Error::Invalid(format!("model {m} outside 1..={n_models}")))?;
        counts[i] += 1;
    }
    let n = models.len() as f64;
    Ok(counts.iter().map(|&c| c as f64 / n).collect())
}

/// Running fraction of time spent in `model`, sampled every `stride`
/// iterations. The last point is always the final estimate.
pub fn cumulative_fractions(models: &[u32], model: u32, stride: usize) -> Vec<(u64, f64)> {
    let stride = stride.max(1);
    let mut out = Vec::new();
    let mut hits = 0u64;
    for (i, &m) in models.iter().enumerate() {
        hits += u64::from(m == model);
        let t = i + 1;
        if t % stride == 0 || t == models.len() {
            out.push((t as u64, hits as f64 / t as f64));
        }
    }
    out
}

/// Per-model chain diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDiagnostics {
    pub probability: f64,
    pub tau: f64,
    pub sigma2_a: f64,
    pub sigma2: f64,
    /// `σ²_a/σ²`; `None` when the model was never or always visited.
    pub ratio: Option<f64>,
    pub acf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub label: String,
    pub seed: u64,
    pub burn_in: u64,
    pub iterations: u64,
    pub model_prefix: String,
    pub models: Vec<ModelDiagnostics>,
    pub acceptance: BTreeMap<String, MoveCounts>,
    pub move_order: Vec<String>,
    /// CPU seconds of the sampling loop; not derivable from a trace.
    pub cpu_seconds: Option<f64>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

impl RunSummary {
    /// Diagnostics recomputed from the post-burn-in part of a trace.
    pub fn from_trace(trace: &Trace) -> Result<Self> {
        let models = trace.models();
        let probs = ergodic_probs(&models, trace.header.n_models)?;
        let mut acceptance: BTreeMap<String, MoveCounts> = trace
            .header
            .moves
            .iter()
            .map(|m| (m.clone(), MoveCounts::default()))
            .collect();
        for r in trace.kept() {
            acceptance.entry(r.move_label.clone()).or_default().record(r.outcome);
        }
        let mut diags = Vec::with_capacity(probs.len());
        for (i, &p) in probs.iter().enumerate() {
            let m = i as u32 + 1;
            let ind: Vec<bool> = models.iter().map(|&x| x == m).collect();
            let x: Vec<f64> = ind.iter().map(|&b| f64::from(u8::from(b))).collect();
            let mut acf = autocorrelation(&x, ACF_LAGS);
            acf.remove(0);
            acf.resize(ACF_LAGS, 0.0);
            let (tau, sigma2_a, sigma2, ratio) = if ind.len() >= MIN_LENGTH {
                let v = asymptotic_variance(&ind)?;
                let ratio = (!v.degenerate).then(|| v.sigma2_a / v.sigma2);
                (v.tau, v.sigma2_a, v.sigma2, ratio)
            } else {
                (f64::NAN, f64::NAN, f64::NAN, None)
            };
            diags.push(ModelDiagnostics {
                probability: p,
                tau,
                sigma2_a,
                sigma2,
                ratio,
                acf,
            });
        }
        Ok(Self {
            label: trace.header.label.clone(),
            seed: trace.header.seed,
            burn_in: trace.header.burn_in,
            iterations: models.len() as u64,
            model_prefix: trace.header.model_prefix.clone(),
            models: diags,
            acceptance,
            move_order: trace.header.moves.clone(),
            cpu_seconds: None,
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.models.iter().map(|m| m.probability).collect()
    }

    pub fn acceptance_rate(&self, label: &str) -> Option<f64> {
        self.acceptance.get(label).map(MoveCounts::rate)
    }

    fn model_name(&self, i: usize) -> String {
        format!("{}{}", self.model_prefix, i + 1)
    }

    fn move_labels(&self) -> Vec<String> {
        let mut labels = self.move_order.clone();
        for k in self.acceptance.keys() {
            if !labels.contains(k) {
                labels.push(k.clone());
            }
        }
        labels
    }

    /// CSV column names matching [`RunSummary::csv_row`].
    pub fn csv_header(&self) -> String {
        let mut cols = vec![
            "label".to_string(),
            "seed".into(),
            "burn_in".into(),
            "iterations".into(),
        ];
        for i in 0..self.models.len() {
            cols.push(format!("p_{}", self.model_name(i)));
        }
        for m in self.move_labels() {
            cols.push(format!("{m}_proposed"));
            cols.push(format!("{m}_accepted"));
            cols.push(format!("{m}_degenerate"));
            cols.push(format!("{m}_rate"));
        }
        for i in 0..self.models.len() {
            cols.push(format!("tau_{}", self.model_name(i)));
            cols.push(format!("R_{}", self.model_name(i)));
        }
        cols.join(",")
    }

    /// One flat CSV row. Timing is excluded so reruns are byte-identical.
    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.label.clone(),
            self.seed.to_string(),
            self.burn_in.to_string(),
            self.iterations.to_string(),
        ];
        for m in &self.models {
            cols.push(num(m.probability));
        }
        for l in self.move_labels() {
            let c = self.acceptance.get(&l).copied().unwrap_or_default();
            cols.push(c.proposed.to_string());
            cols.push(c.accepted.to_string());
            cols.push(c.degenerate.to_string());
            cols.push(num(c.rate()));
        }
        for m in &self.models {
            cols.push(num(m.tau));
            cols.push(m.ratio.map_or_else(|| "NA".into(), num));
        }
        cols.join(",")
    }

    /// Key-value report.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label = {}", self.label);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "burn_in = {}", self.burn_in);
        let _ = writeln!(s, "iterations = {}", self.iterations);
        for (i, m) in self.models.iter().enumerate() {
            let _ = writeln!(s, "probability.{} = {}", self.model_name(i), num(m.probability));
        }
        for l in self.move_labels() {
            let c = self.acceptance.get(&l).copied().unwrap_or_default();
            let _ = writeln!(s, "moves.{l}.proposed = {}", c.proposed);
            let _ = writeln!(s, "moves.{l}.accepted = {}", c.accepted);
            let _ = writeln!(s, "moves.{l}.rejected = {}", c.rejected);
            let _ = writeln!(s, "moves.{l}.degenerate = {}", c.degenerate);
            let _ = writeln!(s, "moves.{l}.rate = {}", num(c.rate()));
        }
        for (i, m) in self.models.iter().enumerate() {
            let n = self.model_name(i);
            let _ = writeln!(s, "tau.{n} = {}", num(m.tau));
            let _ = writeln!(s, "sigma2_a.{n} = {}", num(m.sigma2_a));
            let _ = writeln!(s, "sigma2.{n} = {}", num(m.sigma2));
            let _ = writeln!(s, "R.{n} = {}", m.ratio.map_or_else(|| "NA".into(), num));
            let acf: Vec<String> = m.acf.iter().map(|&v| num(v)).collect();
            let _ = writeln!(s, "acf.{n} = {}", acf.join(" "));
        }
        if let Some(c) = self.cpu_seconds {
            let _ = writeln!(s, "cpu_seconds = {}", num(c));
        }
        s
    }
}
