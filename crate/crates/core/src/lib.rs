//! Zone-path construction for real-time ridesharing dispatch.
//!
//! The crate covers the algorithmic side of batch assignment of requests to
//! multi-capacity vehicles: the road network and its all-pairs tables, zone
//! clustering, offline enumeration and indexing of partial location paths,
//! online construction of the request–path–vehicle (RPV) graph, the 0/1
//! assignment program, and the two-stage stochastic extension solved by
//! Benders decomposition.
//!
//! Everything here works on `alloc` only. The default `std` feature adds
//! wall-clock deadlines and thread-backed parallel maps; without it deadlines
//! must be supplied by the caller and all work runs on the calling thread.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod assign;
pub mod budget;
pub mod fleet;
pub mod future;
pub mod network;
pub mod par;
pub mod pathstore;
pub mod rpv;
pub mod solver;
pub mod zoning;

pub use budget::{Deadline, NoDeadline};
pub use fleet::{AssignedRequest, Stop, StopKind, VehicleId, VehicleState};
pub use network::{DemandTrace, LocationId, Request, RequestId, RoadNetwork};

/// Simulation time and durations, in whole seconds.
pub type Seconds = i64;
