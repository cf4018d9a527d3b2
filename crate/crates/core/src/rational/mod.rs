//! Convergent fractions with rational limit rotation.
//!
//! For `a = ρ⁻¹(p/q)` the map `T_a` has order `q`. Perturbing two slots of
//! every period, `a_{qr+1} = a + c1·t_r` and `a_{qr+2} = a + c2·t_r`,
//! makes each block `ψ_r = T_{α_r}∘T_{β_r}∘T_a^{q−2}` hyperbolic with
//! common attractor 0 and repeller `R`. The multipliers behave like
//! `1 − t_r`, so a divergent `Σ t_r` forces `τ_n → 0` even though
//! `aᵢ → a > 1/4`.

mod certify;
mod lemma;
mod sequence;

pub use certify::{
    certify, contraction_profile, CertificateSummary, ConstructionCertificate, ContractionPoint, StageRecord,
    FIT_TOLERANCE, TAIL_DISTANCE, TAIL_START,
};
pub use lemma::{
    check_fields, choose_R, choose_r_avoiding, family_map, field_by_difference, multiplier_slope, orbit_of_zero,
    solve_lemma, vector_field_v1, vector_field_v2, Field, FieldCheck, FieldSample, LemmaSolution, SlopeEstimate,
};
pub use sequence::{
    build_sequence, check_layout, periodic_parameter, LayoutCheck, RChoice, RationalRotationParams, RationalSequence,
    TRule, DEFAULT_AMPLITUDE, DEFAULT_MARGIN,
};
