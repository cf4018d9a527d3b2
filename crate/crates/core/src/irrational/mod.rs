//! Convergent fractions whose limit has irrational rotation number.
//!
//! The convergents `p_n/q_n` of `ρ` give periodic parameters
//! `ã_n = ρ⁻¹(p_n/q_n) → a`. Stage `n` is a hyperbolic period
//! `ψ_n = T_{α_n}∘T_{β_n}∘T_{ã_n}^{q_n−2}` repeated `N_n` times, with its
//! repeller kept away from the set `M_n` where later stages send 0. The
//! powers are picked so that `θ_k = ψ_1^{N_1}∘…∘ψ_k^{N_k}` shrinks `M_k`
//! below `2^-k`, which makes `τ_n` Cauchy.

mod approx;
mod nested;
mod stage;

pub use approx::{rational_approximations, Approximation, RhoSpec};
pub use nested::{
    assemble, cauchy_tables, certify_irrational, construct, schedule_bound, verify_cauchy, CauchyCertificate,
    CauchyRow, DistsRow, IrrationalCertificate, IrrationalConstruction, IrrationalParams, NestedSequence, RMax,
    ScheduleRow, DEFAULT_MARGIN_IRRATIONAL, DEFAULT_N_CAP, DEFAULT_T,
};
pub use stage::{
    auto_r_max, build_m, build_stage, choose_n, chordal_derivative, partial_products, power_estimate, rate_r_max,
    StageData, StageSettings, StageSummary, TAIL_TOLERANCE,
};
