use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use gmtrj_core::diagnostics::{cumulative_fractions, read_trace, RunSummary, Trace, TraceHeader};

use crate::error::{CliError, CliResult};
use crate::output::{digest, provenance, write_text};
use crate::run::{report, summary_csv};

pub struct SummarizeOptions {
    pub pool: bool,
    /// Collapse models numbered `>= tail_from` into one row of the model table.
    pub tail_from: Option<u32>,
    /// Spacing of the occupancy series.
    pub stride: usize,
    /// Length of the model path series.
    pub path_length: usize,
}

pub fn load_traces(paths: &[PathBuf]) -> CliResult<(Vec<Trace>, String)> {
    let mut all_bytes = Vec::new();
    let mut traces = Vec::new();
    for p in paths {
        let bytes = std::fs::read(p).map_err(|e| CliError::Data(format!("cannot read trace {}: {e}", p.display())))?;
        let t = read_trace(BufReader::new(bytes.as_slice()), &p.display().to_string())
            .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        all_bytes.extend_from_slice(&bytes);
        traces.push(t);
    }
    Ok((traces, digest(&all_bytes)))
}

/// Concatenates the post-burn-in records of traces sharing a label.
pub fn pool(traces: &[Trace]) -> Vec<Trace> {
    let mut groups: BTreeMap<String, Vec<&Trace>> = BTreeMap::new();
    let mut order = Vec::new();
    for t in traces {
        if !groups.contains_key(&t.header.label) {
            order.push(t.header.label.clone());
        }
        groups.entry(t.header.label.clone()).or_default().push(t);
    }
    order
        .into_iter()
        .map(|label| {
            let parts = &groups[&label];
            let first = &parts[0].header;
            let mut pooled = Trace::new(TraceHeader {
                burn_in: 0,
                ..first.clone()
            });
            let mut it = 0;
            for t in parts {
                for r in t.kept() {
                    it += 1;
                    let mut r = r.clone();
                    r.iteration = it;
                    pooled.records.push(r);
                }
            }
            pooled
        })
        .collect()
}

fn run_names(summaries: &[RunSummary]) -> Vec<String> {
    summaries
        .iter()
        .map(|s| {
            let dup = summaries.iter().filter(|o| o.label == s.label).count() > 1;
            if dup {
                format!("{}@{}", s.label, s.seed)
            } else {
                s.label.clone()
            }
        })
        .collect()
}

/// Model-probability table: one row per model, one column per run.
pub fn models_table(summaries: &[RunSummary], tail_from: Option<u32>) -> String {
    let names = run_names(summaries);
    let n = summaries.iter().map(|s| s.models.len()).max().unwrap_or(0) as u32;
    let prefix = summaries.first().map_or("M", |s| s.model_prefix.as_str());
    let mut s = String::new();
    let _ = writeln!(s, "model,{}", names.join(","));
    let last = tail_from.map_or(n, |t| t.saturating_sub(1).min(n));
    for m in 1..=last {
        let cols: Vec<String> = summaries
            .iter()
            .map(|r| r.models.get(m as usize - 1).map_or(0.0, |d| d.probability).to_string())
            .collect();
        let _ = writeln!(s, "{prefix}{m},{}", cols.join(","));
    }
    if let Some(t) = tail_from {
        let cols: Vec<String> = summaries
            .iter()
            .map(|r| {
                r.models
                    .iter()
                    .skip(t.saturating_sub(1) as usize)
                    .map(|d| d.probability)
                    .sum::<f64>()
                    .to_string()
            })
            .collect();
        let _ = writeln!(s, "{prefix}>={t},{}", cols.join(","));
    }
    s
}

/// Acceptance table: one row per move type, one column per run, percent.
pub fn acceptance_table(summaries: &[RunSummary]) -> String {
    let names = run_names(summaries);
    let mut moves: Vec<String> = Vec::new();
    for r in summaries {
        for m in &r.move_order {
            if !moves.contains(m) {
                moves.push(m.clone());
            }
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "move,{}", names.join(","));
    for m in &moves {
        let cols: Vec<String> = summaries
            .iter()
            .map(|r| r.acceptance_rate(m).map_or("NA".into(), |v| (100.0 * v).to_string()))
            .collect();
        let _ = writeln!(s, "{m},{}", cols.join(","));
    }
    s
}

/// Parses `logistic/<alg>/sigma=<s>[/k=<k>]`.
fn logistic_key(label: &str) -> Option<(String, String, f64)> {
    let mut parts = label.split('/');
    if parts.next()? != "logistic" {
        return None;
    }
    let alg = parts.next()?.to_string();
    let sigma: f64 = parts.next()?.strip_prefix("sigma=")?.parse().ok()?;
    let column = match parts.next() {
        Some(k) => format!("{alg} {k}"),
        None => alg,
    };
    Some((column, label.to_string(), sigma))
}

/// Acceptance by proposal scale: one row per `σ_p`, one column per
/// algorithm and `k`. Empty when no logistic runs are present.
pub fn sigma_grid(summaries: &[RunSummary]) -> String {
    let mut columns: Vec<String> = Vec::new();
    let mut sigmas: Vec<f64> = Vec::new();
    let mut cells: BTreeMap<(String, u64), Vec<f64>> = BTreeMap::new();
    for r in summaries {
        let Some((col, _, sigma)) = logistic_key(&r.label) else {
            continue;
        };
        if !columns.contains(&col) {
            columns.push(col.clone());
        }
        if !sigmas.contains(&sigma) {
            sigmas.push(sigma);
        }
        if let Some(rate) = r.acceptance_rate("jump") {
            cells.entry((col, sigma.to_bits())).or_default().push(100.0 * rate);
        }
    }
    if columns.is_empty() {
        return String::new();
    }
    sigmas.sort_by(f64::total_cmp);
    let mut s = String::new();
    let _ = writeln!(s, "sigma,{}", columns.join(","));
    for sg in sigmas {
        let cols: Vec<String> = columns
            .iter()
            .map(|c| {
                cells
                    .get(&(c.clone(), sg.to_bits()))
                    .map_or("NA".into(), |v| (v.iter().sum::<f64>() / v.len() as f64).to_string())
            })
            .collect();
        let _ = writeln!(s, "{sg},{}", cols.join(","));
    }
    s
}

/// Running occupancy fraction of every model, long format. Uses every
/// record in the trace, including retained burn-in.
pub fn occupancy_series(traces: &[Trace], names: &[String], stride: usize) -> String {
    let mut s = String::from("run,model,iteration,fraction\n");
    for (t, name) in traces.iter().zip(names) {
        let models: Vec<u32> = t.records.iter().map(|r| r.model).collect();
        let first = t.records.first().map_or(1, |r| r.iteration);
        for m in 1..=t.header.n_models {
            if !models.contains(&m) {
                continue;
            }
            for (i, f) in cumulative_fractions(&models, m, stride) {
                let _ = writeln!(s, "{name},{}{m},{},{f}", t.header.model_prefix, first + i - 1);
            }
        }
    }
    s
}

/// The first `len` post-burn-in model values of every run, long format.
pub fn path_series(traces: &[Trace], names: &[String], len: usize) -> String {
    let mut s = String::from("run,iteration,model\n");
    for (t, name) in traces.iter().zip(names) {
        for r in t.kept().take(len) {
            let _ = writeln!(s, "{name},{},{}", r.iteration, r.model);
        }
    }
    s
}

pub fn summarize(paths: &[PathBuf], out: &Path, opts: &SummarizeOptions) -> CliResult<Vec<RunSummary>> {
    if paths.is_empty() {
        return Err(CliError::Config("summarize needs at least one trace file".into()));
    }
    let (traces, dg) = load_traces(paths)?;
    let traces = if opts.pool { pool(&traces) } else { traces };
    let summaries = traces
        .iter()
        .map(|t| RunSummary::from_trace(t).map_err(|e| CliError::Data(format!("{}: {e}", t.header.label))))
        .collect::<CliResult<Vec<_>>>()?;
    let seeds: Vec<String> = {
        let mut v: Vec<u64> = traces.iter().map(|t| t.header.seed).collect();
        v.dedup();
        v.iter().map(u64::to_string).collect()
    };
    let prov = provenance(&dg, &seeds.join("+"));
    let refs: Vec<&RunSummary> = summaries.iter().collect();
    let names = run_names(&summaries);
    write_text(&out.join("summary.csv"), &prov, &summary_csv(&refs))?;
    write_text(&out.join("report.txt"), &prov, &report(&refs))?;
    write_text(
        &out.join("models.csv"),
        &prov,
        &models_table(&summaries, opts.tail_from),
    )?;
    write_text(&out.join("acceptance.csv"), &prov, &acceptance_table(&summaries))?;
    let grid = sigma_grid(&summaries);
    if !grid.is_empty() {
        write_text(&out.join("sigma_grid.csv"), &prov, &grid)?;
    }
    write_text(
        &out.join("occupancy.csv"),
        &prov,
        &occupancy_series(&traces, &names, opts.stride),
    )?;
    write_text(
        &out.join("path.csv"),
        &prov,
        &path_series(&traces, &names, opts.path_length),
    )?;
    Ok(summaries)
}
