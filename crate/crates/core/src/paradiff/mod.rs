//! Paradifferential calculus: Bony decomposition, commutators and the
//! ensemble checks of the product and commutator estimates.

mod bony;
mod commutator;
mod laws;

pub use bony::{bony_decomposition, paraproduct, remainder, BonyParts};
pub use commutator::{
    jacobian, lame_commutator, lame_commutators, transport_commutator, transport_commutators, verify_commutator,
    CommutatorEstimate,
};
pub use laws::{verify_product_laws, ProductLaw};
