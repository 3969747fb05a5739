//! Vehicle state as seen by the dispatcher at a decision epoch.

use crate::network::{LocationId, Request, RequestId};
use crate::Seconds;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VehicleId(pub u32);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}", self.0)
    }
}

/// A request bound to a vehicle, either waiting for pickup or onboard.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssignedRequest {
    pub request: Request,
    pub picked_up: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StopKind {
    Pickup,
    Dropoff,
}

/// One planned stop of a vehicle route.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stop {
    pub location: LocationId,
    pub kind: StopKind,
    pub request: RequestId,
}

/// Snapshot of one vehicle.
///
/// `location`/`available_at` is where and when the vehicle can next change
/// course: its current node when idle, otherwise the next node on its way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VehicleState {
    pub id: VehicleId,
    pub location: LocationId,
    pub available_at: Seconds,
    pub assigned: Vec<AssignedRequest>,
    pub capacity: u32,
    /// Stops still to visit, in order.
    pub route: Vec<Stop>,
}

impl VehicleState {
    pub fn idle(id: VehicleId, location: LocationId, available_at: Seconds, capacity: u32) -> Self {
        VehicleState { id, location, available_at, assigned: Vec::new(), capacity, route: Vec::new() }
    }

    /// Passengers currently in the vehicle.
    pub fn onboard(&self) -> usize {
        self.assigned.iter().filter(|a| a.picked_up).count()
    }

    pub fn is_empty(&self) -> bool {
        self.assigned.is_empty()
    }
}
