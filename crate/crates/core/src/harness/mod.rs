//! Scenario ingestion, synthetic scenarios, end-to-end pipeline and ROC
//! evaluation.

mod pipeline;
mod roc;
mod scenario;
mod synth;

pub use pipeline::{
    run_pipeline, write_run_csv, Method, ObjectOutput, PipelineConfig, PipelineDiagnostics, PipelineRun,
    RUN_CSV_HEADER,
};
pub use roc::{
    compute_roc, sweep_parameters, write_roc_csv, RocCounts, RocPoint, SweepAxis, ROC_CSV_HEADER,
};
pub use scenario::{
    parse_scenario, read_scenario_file, write_scenario, BoundaryRecord, HostRecord, ObjectRecord,
    Scenario, ScenarioFrame,
};
pub use synth::{default_suite, generate_synthetic, noisy_yaw_suite, NoiseLevels, ScenarioKind, SynthSpec};
