//! Core of a location-aware museum guide robot.
//!
//! Everything here is deterministic and free of IO: the annotated museum map,
//! grid planning and motion simulation, intent classification and prompt
//! assembly, the per-tour session state machine running on a virtual clock,
//! and the log-coding statistics used to study recorded tours.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, network
//! backends and the service surface live in the `docent` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod dialogue;
pub mod gateway;
pub mod geometry;
pub mod navsim;
pub mod session;
pub mod time;
pub mod worldmap;

pub use geometry::Pose;
pub use time::SimTime;
pub use worldmap::{AnnotatedMap, ExhibitId};
