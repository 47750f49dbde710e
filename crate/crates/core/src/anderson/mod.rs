//! Delone–Anderson models and the spectral estimates built on the UCP.

mod distribution;
mod lift;
mod model;
mod sme;
mod ssf;
mod wegner;

pub use distribution::CouplingDistribution;
pub use lift::{eigenvalue_lift, uncertainty_check, LiftPoint, LiftReport, UncertaintyReport, DEGENERACY_GAP, HF_STEP};
pub use model::{Couplings, DeloneAndersonModel, ModelSpec, Profile};
pub use sme::{sme_check, sme_rho_family, SmeRow};
pub use ssf::{ssf_dense, ssf_shape_bound, trace_residual, SsfRecord, SsfResult};
pub use wegner::{wegner_mc, Energy, WegnerRow, WegnerSpec, WegnerTable};
