//! Sensorimotor projection toolkit.
//!
//! Learns a mapping from lexical word embeddings onto the eleven Lancaster
//! sensorimotor norm dimensions and runs the surrounding analysis pipeline:
//! nonce-word generation and screening, survey construction, selection-rate
//! analysis of survey responses, and sublexical n-gram correlation.

pub mod behavioral;
pub mod corpus;
pub mod fixtures;
pub mod kv;
pub mod modality;
pub mod models;
pub mod nonce;
pub mod stats;
pub mod sublexical;

pub use modality::{Modality, SensorimotorVector, MODALITY_COUNT};
