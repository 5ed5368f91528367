//! Benchmark harness: targets and ECDF aggregation, behavioral diagnostics,
//! the CSV log formats, the experiment sweep and best-PCM tables.

pub mod diagnostics;
pub mod ecdf;
pub mod logio;
pub mod sweep;
pub mod table;

pub use diagnostics::{diagnostics, mean_successful_params, DiagnosticsRecorder, DiagnosticsRow};
pub use ecdf::{ecdf, log_grid, make_targets, EcdfCurve, TargetSet, GRID_POINTS, TARGET_COUNT};
pub use sweep::{sweep, SweepJob, SweepPlan, SweepSummary};
pub use table::{best_config_table, CurveKey, TableRow};
