//! Corpus generation, verification, scoring and a game server built on `idge-core`.

pub mod curriculum;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod records;
pub mod service;
pub mod stats;
pub mod verify;

pub use error::{DataError, IoError};
