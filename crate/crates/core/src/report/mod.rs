//! Scenario files, run artifacts and comparisons.
//!
//! A [`Scenario`] is the single description of a run. [`run`] builds its
//! coefficient source, evaluates the fraction, certifies construction
//! modes and returns a [`RunArtifact`] whose JSON is reproducible byte
//! for byte. Wall-clock time goes to a separate `timing.json`.

mod compare;
mod run;
mod scenario;

pub use compare::{compare, compare_values, Comparison, ComparisonRow, COMPARISON_COLUMNS};
pub use run::{
    run, run_batch, to_json, write_outputs, Certificate, Environment, RationalCertificate, RunArtifact, RunOutcome,
    CONTRACTION_AVOID, CONTRACTION_POINTS, DEFAULT_CERTIFY_STAGES, LAYOUT_TERMS, PREFIX_LEN,
};
pub use scenario::{AutoWord, EvalSpec, OutputSpec, RMaxSpec, RhoForm, Scenario, SourceSpec};
