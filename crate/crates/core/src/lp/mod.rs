//! Littlewood-Paley decomposition and the Besov-type norms built on it.

mod besov;
mod filter;
pub mod verify;

pub use besov::{
    besov_norm, besov_value, chemin_lerner_norm, levelwise_time_norms, series_profiles, sum_space_from_levels,
    sum_space_norm, time_besov_norm, BesovParams, BesovReport, LevelRow, SumSpaceReport,
};
pub use filter::{
    chi, dyadic_block, low_pass, lr_norm, phi, weight_levels, DyadicFilterBank, LevelProfile, DEFAULT_ALPHA,
};
pub use verify::{
    equivalence_constant, verify_bernstein, verify_embedding, verify_log_interpolation, verify_norm_equivalence,
    BernsteinReport, BernsteinRow, LOG_INTERPOLATION_CONSTANT,
};
