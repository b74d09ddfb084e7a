//! Linear evolution problems: the constant-coefficient Lamé system, transport
//! and mass equations, and the variable-coefficient parabolic system, each
//! with the checks of its a priori bounds.

mod lame_heat;
mod lawson;
mod transport;
mod varcoef;

pub use lame_heat::{
    phi1, phi2, solve_lame_heat, step_count, verify_lame_heat_estimate, LameHeatEstimate, LameSemigroup, LinearProblem,
};
pub(crate) use lawson::lawson_heun3;
pub(crate) use transport::check_cfl;
pub use transport::{
    cfl_number, compressive_shear_solution, compressive_shear_velocity, solve_mass_equation, solve_transport,
    verify_mass_estimates, verify_transport_estimate, MassEstimate, TransportEstimate, CFL_LIMIT,
};
pub use varcoef::{
    solve_varcoef_parabolic, truncated_infimum, truncation_error, verify_varcoef_endpoint, verify_varcoef_estimate,
    EndpointEstimate, TruncationConfig, VarcoefEstimate, VarcoefNorms, VarcoefProblem,
};
