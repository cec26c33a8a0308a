//! Ergodic summaries, acceptance accounting, autocorrelation and the
//! efficiency ratio `R = σ²_a / σ²`.

mod autocorr;
mod summary;
mod trace;

pub use autocorr::{
    asymptotic_variance, autocorrelation, efficiency_ratio, integrated_autocorrelation_time, AsymptoticVariance,
    MIN_LENGTH,
};
pub use summary::{cumulative_fractions, ergodic_probs, ModelDiagnostics, MoveCounts, RunSummary, ACF_LAGS};
pub use trace::{read_trace, write_trace, Trace, TraceHeader, TraceRecord, TRACE_VERSION};
