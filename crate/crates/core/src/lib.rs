//! Scheduling and analysis of secure-bit-exchange periods (SBEPs) for
//! peer-to-peer hardware key-exchange networks.
//!
//! Hosts in a KLJN or QKD network exchange one secure bit per pair per
//! period, limited by how many key exchangers each host owns and by how the
//! cables are laid out. This crate models four network geometries (star,
//! linear chain, and fully connected with one or `N - 1` exchangers per
//! host), generates exchange schedules for each, checks them, and analyses
//! their cost, optimality and failure behaviour.
//!
//! ```
//! use keynet_core::protocols::{generate_star, sbep_formula};
//! use keynet_core::schedule::validate_schedule;
//!
//! let schedule = generate_star(7).unwrap();
//! assert_eq!(schedule.len(), sbep_formula(7).unwrap());
//! assert!(validate_schedule(&schedule).ok);
//! ```

pub mod analysis;
mod error;
pub mod format;
pub mod oracle;
pub mod protocols;
pub mod schedule;
pub mod simengine;
pub mod topology;

pub use error::{Error, Result};
pub use schedule::{PairExchange, SbepStep, Schedule, UnorderedPair};
pub use topology::{HostId, NetworkTopology, TopologyKind};
