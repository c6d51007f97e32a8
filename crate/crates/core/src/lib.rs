//! Nonclassicality of photon-added coherent states sent through a photon-loss
//! channel, measured by the total negative Wigner quasiprobability and by the
//! entanglement potential (log-negativity after a 50:50 beam splitter).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entanglement;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod loss;
pub mod negativity;
pub mod report;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{
    build_pacs, coherent_state, density_from_state, ladder_matrices, laguerre, DensityMatrix, PacsSpec, StateVector,
    C64,
};
pub use loss::{evolve, kraus_operators, mean_photon, ChannelParams};
pub use wigner::{PhaseSpaceGrid, WignerField, WignerSource};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
