//! Phase retrieval: ER/HIO on a single full-field modulus and the
//! ptychographic engine on per-position moduli.

mod baseline;
mod pii;
mod projection;
mod residual;
mod state;
mod support;

pub use baseline::{constrained_image, er_step, hio_step, run_er, run_hio, SingleModulus, DEFAULT_BETA};
pub use pii::{
    pii_reconstruct, pii_reconstruct_with, reciprocal_residual, reconstruction_masks, PiiEngine, PiiOptions,
    PiiOutcome,
};
pub use projection::modulus_project;
pub use residual::reciprocal_residual_masks;
pub use state::{init_state, InitMode, RetrievalState};
pub use support::{dilate_support, SupportMask};
