use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use gmtrj_core::diagnostics::{write_trace, RunSummary, Trace};
use gmtrj_core::latent::run_latent;
use gmtrj_core::logistic::run_experiment;
use gmtrj_core::oracle::run_toy;
use rayon::prelude::*;

use crate::config::{Cell, CellSpec, Config, StudyModel};
use crate::error::{CliError, CliResult};
use crate::output::{provenance, slug, write_atomic, write_text};

pub struct CellResult {
    pub cell: Cell,
    pub summary: RunSummary,
    pub trace: Trace,
    pub cpu_seconds: f64,
}

fn run_cell(cfg: &Config, cell: &Cell) -> CliResult<CellResult> {
    let prov = provenance(&cfg.digest, &cell.seed.to_string());
    let (summary, trace, cpu) = match (&cfg.study, &cell.spec) {
        (StudyModel::Logistic(m), CellSpec::Logistic(c)) => {
            let mut c = c.clone();
            c.stream = cell.index as u64;
            let o = run_experiment(m, &c, &prov)?;
            (o.summary, o.trace, o.cpu)
        }
        (StudyModel::Latent(m), CellSpec::Latent(c)) => {
            let mut c = c.clone();
            c.stream = cell.index as u64;
            let o = run_latent(m, &c, &prov)?;
            (o.summary, o.trace, o.cpu)
        }
        (StudyModel::Toy(s), CellSpec::Toy(k)) => run_toy(
            s,
            k,
            cfg.iterations,
            cfg.burn_in,
            cell.seed,
            cell.index as u64,
            cfg.retain_burn_in,
            &prov,
        )?,
        _ => unreachable!("cells are built for the configured study"),
    };
    Ok(CellResult {
        cell: cell.clone(),
        summary,
        trace,
        cpu_seconds: cpu.as_secs_f64(),
    })
}

/// Runs every grid cell on a pool of `workers` threads. Results come back in
/// grid order whatever the scheduling.
pub fn run_grid(cfg: &Config, workers: usize) -> CliResult<Vec<CellResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let total = cfg.cells.len();
    pool.install(|| {
        cfg.cells
            .par_iter()
            .map(|cell| {
                let r = run_cell(cfg, cell)?;
                eprintln!(
                    "[{}/{total}] {} seed={} done in {:.1}s cpu",
                    cell.index + 1,
                    r.summary.label,
                    cell.seed,
                    r.cpu_seconds
                );
                Ok(r)
            })
            .collect()
    })
}

/// `summary.csv` body: CSV header and one row per cell. No timing.
pub fn summary_csv(summaries: &[&RunSummary]) -> String {
    let mut s = String::new();
    if let Some(first) = summaries.first() {
        let _ = writeln!(s, "{}", first.csv_header());
    }
    for r in summaries {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// `report.txt` body: one key-value block per cell.
pub fn report(summaries: &[&RunSummary]) -> String {
    let mut s = String::new();
    for r in summaries {
        let mut r = (*r).clone();
        r.cpu_seconds = None;
        let _ = writeln!(s, "\n[{}]", r.label);
        s.push_str(&r.to_kv());
    }
    s
}

/// `timing.csv` body: CPU time and time-adjusted `R` per model, each cell
/// against the RJ cell that shares its grid key (itself when there is none).
pub fn timing_csv(results: &[CellResult]) -> String {
    let per_iter = |r: &CellResult| {
        let n = r.cell.iterations().max(r.trace.records.len() as u64).max(1);
        r.cpu_seconds / n as f64
    };
    let mut reference: HashMap<String, f64> = HashMap::new();
    for r in results.iter().filter(|r| r.cell.is_reference()) {
        reference.entry(r.cell.reference_key()).or_insert(per_iter(r));
    }
    let mut s = String::new();
    let Some(first) = results.first() else {
        return s;
    };
    let prefix = &first.summary.model_prefix;
    let n_models = first.summary.models.len();
    let mut header = vec![
        "label".to_string(),
        "seed".into(),
        "cpu_seconds".into(),
        "cpu_per_iteration".into(),
    ];
    header.extend((1..=n_models).map(|m| format!("R_adj_{prefix}{m}")));
    let _ = writeln!(s, "{}", header.join(","));
    for r in results {
        let own = per_iter(r);
        let base = reference.get(&r.cell.reference_key()).copied().unwrap_or(own);
        let mut row = vec![
            r.summary.label.clone(),
            r.cell.seed.to_string(),
            format!("{}", r.cpu_seconds),
            format!("{own}"),
        ];
        for m in &r.summary.models {
            row.push(match m.ratio {
                Some(ratio) if base > 0.0 => format!("{}", ratio * own / base),
                _ => "NA".into(),
            });
        }
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

pub fn write_outputs(cfg: &Config, out: &Path, results: &[CellResult]) -> CliResult<()> {
    let prov = provenance(&cfg.digest, &cfg.seed.to_string());
    let summaries: Vec<&RunSummary> = results.iter().map(|r| &r.summary).collect();
    write_text(&out.join("summary.csv"), &prov, &summary_csv(&summaries))?;
    write_text(&out.join("report.txt"), &prov, &report(&summaries))?;
    write_text(&out.join("timing.csv"), &prov, &timing_csv(results))?;
    if cfg.trace {
        for r in results {
            let name = format!(
                "{:03}-{}-seed{}.trace",
                r.cell.index,
                slug(&r.summary.label),
                r.cell.seed
            );
            write_atomic(&out.join("traces").join(name), |w| {
                write_trace(w, &r.trace).map_err(|e| std::io::Error::other(e.to_string()))
            })?;
        }
    }
    Ok(())
}
