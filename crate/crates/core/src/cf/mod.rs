//! The continued fraction `−a₁/(1 − a₂/(1 − a₃/(1 − …)))`.
//!
//! Its n-th convergent is `τ_n = T_{a₁}∘…∘T_{a_n}(0)` with
//! `T_b(z) = −b/(z + 1)`. Convergence is read off the boundary circle, so
//! `τ_n = ∞` is an ordinary value and ∞ is an admissible limit.

mod evaluate;
mod export;
mod gill;
mod source;
mod trace;

pub use evaluate::{
    detect_periodicity, evaluate, evaluate_trace, CauchyPoint, ConvergenceReport, EvalConfig, Periodicity, Verdict,
    WindowDiameter, DEFAULT_MAX_N, DEFAULT_MAX_PERIOD, DEFAULT_THRESHOLD, DEFAULT_WINDOWS,
};
pub use export::{write_trace_csv, TRACE_COLUMNS};
pub use gill::{gill_check, BlockSum, GillProfile, SUMMABLE_RATIO};
pub use source::{prefix, CoefficientSource, ConstantSource, ExplicitSource, GillSource, PerturbationRule};
pub use trace::{
    convergent_by_composition, convergent_by_recurrence, trace_by_composition, trace_by_recurrence, ConvergentTrace,
    Method,
};
