//! Verification oracles and the experiment runner.

pub mod experiment;
pub mod report;
pub mod sequences;
pub mod verify;

pub use experiment::{run_experiment, run_scenario, ExperimentConfig, Scenario};
pub use report::{GridInfo, Report, ReportRow, Status, Violation};
pub use sequences::{check_conversion_chain, flow_sequence, instance, registry, CertifiedSequence, Instance};
pub use verify::{
    verify_almost_orbit_rate, verify_almost_orbit_tail, verify_cauchy_rate, verify_liminf_lemma,
    verify_metastability, verify_nr_liminf, verify_tail,
};
