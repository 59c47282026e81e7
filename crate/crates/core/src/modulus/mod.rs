//! Transboundary modulus by constraint generation.
//!
//! Each iteration solves `min mass(ρ)` over the rows generated so far, then
//! asks the separation oracle for paths of ρ-length below one and adds their
//! rows. Masses count every circle weight (or orbit weight) once plus
//! `Σ d² · cell area` over material cells.

mod experiments;
mod qp;
mod solve;

pub use experiments::{
    candidate_pairs, continuous_share_trend, distinguished_pair_table, extremal_structure,
    lemma74_check, scaling_law_check, serial_law_check, strip_angle_density,
    synthesize_square_sides, ExtremalStructure, Lemma74Report, ModulusSummary, PairRow, PairTable,
    ScalingLawReport, SerialLawReport, SquareSides, EPS_REPORT, SCALING_BAND, TANGENT_GENERATION,
    TANGENT_LEVELS,
};
pub use solve::{
    check_admissibility, compute_group_modulus, compute_modulus, solve_on_grid, solve_rows,
    Admissibility, ConstraintRow, GroupMode, ModulusResult, SolverOptions, Status,
};
