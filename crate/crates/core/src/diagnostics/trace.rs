//! Persisted chain traces, format version 1.
//!
//! ```text
//! # <free-form provenance line>
//! # trace-version 1
//! # label <text>
//! # seed <u64>
//! # models <count> <prefix>
//! # moves <label> <label> ...
//! # burn-in <iterations>
//! iteration,model,move,outcome
//! 20001,2,jump,a
//! ```
//!
//! `model` is 1-based; `outcome` is `a` (accepted), `r` (rejected) or `d`
//! (degenerate). Records with `iteration <= burn-in` are burn-in.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::samplers::Outcome;

pub const TRACE_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    /// Provenance line written verbatim after `# `.
    pub provenance: String,
    pub label: String,
    pub seed: u64,
    pub n_models: u32,
    /// Prefix used when naming models in reports (`M` or `C`).
    pub model_prefix: String,
    /// Move labels in report order.
    pub moves: Vec<String>,
    pub burn_in: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub iteration: u64,
    /// 1-based model number.
    pub model: u32,
    pub move_label: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new(header: TraceHeader) -> Self {
        Self {
            header,
            records: Vec::new(),
        }
    }

    /// Records after burn-in.
    pub fn kept(&self) -> impl Iterator<Item = &TraceRecord> {
        let b = self.header.burn_in;
        self.records.iter().filter(move |r| r.iteration > b)
    }

    /// 1-based model numbers after burn-in.
    pub fn models(&self) -> Vec<u32> {
        self.kept().map(|r| r.model).collect()
    }
}

fn outcome_code(o: Outcome) -> char {
    match o {
        Outcome::Accepted => 'a',
        Outcome::Rejected => 'r',
        Outcome::Degenerate => 'd',
    }
}

pub fn write_trace<W: Write>(mut w: W, trace: &Trace) -> Result<()> {
    let h = &trace.header;
    writeln!(w, "# {}", h.provenance)?;
    writeln!(w, "# trace-version {TRACE_VERSION}")?;
    writeln!(w, "# label {}", h.label)?;
    writeln!(w, "# seed {}", h.seed)?;
    writeln!(w, "# models {} {}", h.n_models, h.model_prefix)?;
    writeln!(w, "# moves {}", h.moves.join(" "))?;
    writeln!(w, "# burn-in {}", h.burn_in)?;
    writeln!(w, "iteration,model,move,outcome")?;
    for r in &trace.records {
        writeln!(
            w,
            "{},{},{},{}",
            r.iteration,
            r.model,
            r.move_label,
            outcome_code(r.outcome)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(r: R, origin: &str) -> Result<Trace> {
    let mut provenance = None;
    let mut version = None;
    let mut label = None;
    let mut seed = None;
    let mut models = None;
    let mut moves = None;
    let mut burn_in = None;
    let mut records = Vec::new();
    let mut in_body = false;
    for (i, line) in r.lines().enumerate() {
        let ln = i + 1;
        let line = line?;
        if !in_body {
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                let bad = |what: &str| Error::parse(origin, ln, format!("invalid {what}"));
                match key {
                    "trace-version" => version = Some(value.to_string()),
                    "label" => label = Some(value.to_string()),
                    "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                    "models" => {
                        let (n, prefix) = value.split_once(' ').unwrap_or((value, "M"));
                        models = Some((n.parse::<u32>().map_err(|_| bad("model count"))?, prefix.to_string()));
                    }
                    "moves" => moves = Some(value.split_whitespace().map(str::to_string).collect::<Vec<_>>()),
                    "burn-in" => burn_in = Some(value.parse::<u64>().map_err(|_| bad("burn-in"))?),
                    _ if provenance.is_none() && ln == 1 => provenance = Some(rest.to_string()),
                    _ => {}
                }
                continue;
            }
            if line == "iteration,model,move,outcome" {
                let found = version.clone().unwrap_or_else(|| "none".into());
                if found != TRACE_VERSION {
                    return Err(Error::TraceVersion {
                        expected: TRACE_VERSION.into(),
                        found,
                    });
                }
                in_body = true;
                continue;
            }
            return Err(Error::parse(origin, ln, "expected trace header or column line"));
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::parse(origin, ln, "expected 4 fields"));
        }
        let outcome = match f[3] {
            "a" => Outcome::Accepted,
            "r" => Outcome::Rejected,
            "d" => Outcome::Degenerate,
            o => return Err(Error::parse(origin, ln, format!("unknown outcome `{o}`"))),
        };
        records.push(TraceRecord {
            iteration: f[0]
                .parse()
                .map_err(|_| Error::parse(origin, ln, "invalid iteration"))?,
            model: f[1].parse().map_err(|_| Error::parse(origin, ln, "invalid model"))?,
            move_label: f[2].to_string(),
            outcome,
        });
    }
    if !in_body {
        return Err(match version {
            Some(v) if v != TRACE_VERSION => Error::TraceVersion {
                expected: TRACE_VERSION.into(),
                found: v,
            },
            _ => Error::parse(origin, 1, "missing column line"),
        });
    }
    let missing = |k: &str| Error::parse(origin, 1, format!("missing `# {k}` header line"));
    let (n_models, model_prefix) = models.ok_or_else(|| missing("models"))?;
    Ok(Trace {
        header: TraceHeader {
            provenance: provenance.unwrap_or_default(),
            label: label.ok_or_else(|| missing("label"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            n_models,
            model_prefix,
            moves: moves.ok_or_else(|| missing("moves"))?,
            burn_in: burn_in.ok_or_else(|| missing("burn-in"))?,
        },
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trace {
        let mut t = Trace::new(TraceHeader {
            provenance: "gmtrj test".into(),
            label: "toy".into(),
            seed: 7,
            n_models: 3,
            model_prefix: "M".into(),
            moves: vec!["jump".into()],
            burn_in: 1,
        });
        for (i, (m, o)) in [(1, Outcome::Accepted), (2, Outcome::Rejected), (3, Outcome::Degenerate)]
            .into_iter()
            .enumerate()
        {
            t.records.push(TraceRecord {
                iteration: i as u64 + 1,
                model: m,
                move_label: "jump".into(),
                outcome: o,
            });
        }
        t
    }

    #[test]
    fn round_trip() {
        let t = sample();
        let mut buf = Vec::new();
        write_trace(&mut buf, &t).unwrap();
        let back = read_trace(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, t);
        assert_eq!(back.models(), vec![2, 3]);
    }

    #[test]
    fn version_mismatch_names_both() {
        let t = sample();
        let mut buf = Vec::new();
        write_trace(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf)
            .unwrap()
            .replace("trace-version 1", "trace-version 9");
        let err = read_trace(text.as_bytes(), "mem").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('9') && msg.contains('1'), "{msg}");
    }
}
