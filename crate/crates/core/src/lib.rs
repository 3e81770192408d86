//! Event-based motion deblurring and high-frame-rate video reconstruction.
//!
//! A blurred intensity frame plus the events recorded during its exposure
//! determine the sharp latent image up to the contrast threshold `c`.
//! [`edi`] recovers one latent frame per blurred frame, [`medi`] couples
//! several blurred frames, and [`optimize`] estimates `c` from the data.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod edi;
pub mod error;
pub mod events;
pub mod frames;
pub mod imaging;
pub mod integrals;
pub mod medi;
pub mod optimize;
pub mod simulator;

pub use edi::{edi_deblur, expand_sequence, expand_video, EdiProblem, LatentFrame, LatentSequence};
pub use error::{Error, Result};
pub use events::{parse_event_stream, Event, EventIndex, Polarity, Resolution};
pub use frames::{load_frame_manifest, manifest_exposure, FrameRecord, TimestampConvention};
pub use imaging::{Domain, ImageBuffer};
pub use medi::{medi_energy, medi_reconstruct, MediProblem};
