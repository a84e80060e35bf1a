//! Command implementations and the annotation HTTP service behind the
//! `scribtext` binary.

pub mod commands;
pub mod layout;
pub mod service;

pub use layout::{ImageEntry, ProjectLayout};
