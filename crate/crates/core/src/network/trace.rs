use super::LocationId;
use crate::Seconds;
use alloc::vec::Vec;
use core::fmt;

/// Stable identifier of a customer request (its row in the source trace).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RequestId(pub u32);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

/// A ride request: origin, destination and arrival time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Request {
    pub id: RequestId,
    pub origin: LocationId,
    pub destination: LocationId,
    pub arrival: Seconds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceError {
    SameOriginDestination { row: usize },
    NegativeArrival { row: usize },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::SameOriginDestination { row } => {
                write!(f, "row {row}: origin and destination coincide")
            }
            TraceError::NegativeArrival { row } => write!(f, "row {row}: negative arrival time"),
        }
    }
}

impl core::error::Error for TraceError {}

/// Requests ordered by non-decreasing arrival time (ties by id).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DemandTrace {
    requests: Vec<Request>,
}

impl DemandTrace {
    /// Validates and sorts. Row numbers in errors are positions in `requests`.
    pub fn new(mut requests: Vec<Request>) -> Result<Self, TraceError> {
        for (row, r) in requests.iter().enumerate() {
            if r.origin == r.destination {
                return Err(TraceError::SameOriginDestination { row });
            }
            if r.arrival < 0 {
                return Err(TraceError::NegativeArrival { row });
            }
        }
        requests.sort_by_key(|r| (r.arrival, r.id));
        Ok(DemandTrace { requests })
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Requests with `after < arrival <= until`.
    pub fn window(&self, after: Seconds, until: Seconds) -> &[Request] {
        let lo = self.requests.partition_point(|r| r.arrival <= after);
        let hi = self.requests.partition_point(|r| r.arrival <= until);
        &self.requests[lo..hi.max(lo)]
    }
}
