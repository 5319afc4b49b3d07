//! Experiment orchestration: configs, the run pipeline, metrics, sweeps, dataset export and
//! reports.

pub mod dataset;
pub mod experiment;
pub mod metrics;
pub mod reference;
pub mod report;
pub mod sweep;

pub use dataset::{attach_depolarizing, export_dataset, generate_dataset, DatasetRow, DatasetSpec};
pub use experiment::{
    block_resource, build, calibrated_table, default_compilations, run_experiment, BuiltExperiment, CheckSpec,
    ExperimentConfig, ExperimentRecord, MappingPolicy, NoiseSpec, PlanSpec, ResourceChoice, TableSource, Variant,
    DEFAULT_SCHEDULE,
};
pub use metrics::{bias_significance, metrics, tvd, Metrics, OccupationCounts};
pub use report::{write_report_csv, RunDir};
pub use sweep::{run_all, run_sweep, SweepKind, SweepPoint, SweepSpec};
