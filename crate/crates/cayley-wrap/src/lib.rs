//! Cayley-Dickson algebras up to the octonions, twisted structures on
//! their pure states, the non-associative bar construction, discrete
//! connections with holonomy and curvature, and finite
//! Alexander-Spanier cochain complexes.

pub mod algebra;
pub mod config;
pub mod connection;
pub mod error;
pub mod bar;
pub mod cli;
pub mod cochain;
pub mod exact;
pub mod forms;
pub mod twisted;

pub use algebra::{CdNumber, ImaginaryCd};
pub use config::Config;
pub use error::{Error, Result};
