use std::collections::BTreeMap;

use gmtrj_core::oracle::{bundled, run_suite, CheckKind};

use crate::error::{CliError, CliResult};

/// Runs the exact-enumeration suite over the bundled toy spaces, printing one
/// line per check and the largest value per check kind.
pub fn verify() -> CliResult<()> {
    let results = run_suite(&bundled()).map_err(|e| CliError::Verify(e.to_string()))?;
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    for r in &results {
        println!("{r}");
        if r.kind != CheckKind::NegativeControl {
            let e = worst.entry(format!("{:?}", r.kind)).or_insert(0.0);
            *e = e.max(r.value);
        }
    }
    for (kind, v) in &worst {
        println!("max {kind} = {v:e}");
    }
    let failures: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} {} k={}", r.space, r.config.sampler, r.config.trials))
        .collect();
    println!("{} checks, {} failed", results.len(), failures.len());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failures.join("; ")))
    }
}
