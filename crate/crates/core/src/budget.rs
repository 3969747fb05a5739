//! Time budgets for anytime solvers.

/// A cut-off the solvers poll between units of work.
pub trait Deadline {
    fn expired(&self) -> bool;

    /// Seconds left, when the deadline knows it.
    fn remaining_secs(&self) -> Option<f64> {
        None
    }
}

/// Never expires.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoDeadline;

impl Deadline for NoDeadline {
    fn expired(&self) -> bool {
        false
    }
}

impl<D: Deadline + ?Sized> Deadline for &D {
    fn expired(&self) -> bool {
        (**self).expired()
    }

    fn remaining_secs(&self) -> Option<f64> {
        (**self).remaining_secs()
    }
}

#[cfg(feature = "std")]
pub use wall::WallDeadline;

#[cfg(feature = "std")]
mod wall {
    use std::time::{Duration, Instant};

    /// Deadline measured on the monotonic wall clock.
    #[derive(Clone, Copy, Debug)]
    pub struct WallDeadline {
        end: Instant,
    }

    impl WallDeadline {
        pub fn after_secs(secs: f64) -> Self {
            let secs = if secs.is_finite() { secs.max(0.0) } else { 1.0e9 };
            WallDeadline { end: Instant::now() + Duration::from_secs_f64(secs) }
        }

        pub fn at(end: Instant) -> Self {
            WallDeadline { end }
        }

        /// The earlier of `self` and a fresh budget of `secs`.
        pub fn min_with_secs(&self, secs: f64) -> Self {
            let other = Self::after_secs(secs);
            if other.end < self.end {
                other
            } else {
                *self
            }
        }
    }

    impl super::Deadline for WallDeadline {
        fn expired(&self) -> bool {
            Instant::now() >= self.end
        }

        fn remaining_secs(&self) -> Option<f64> {
            Some(self.end.saturating_duration_since(Instant::now()).as_secs_f64())
        }
    }
}

/// Deadline that expires after a fixed number of polls. Useful for exercising
/// timeout paths deterministically.
#[derive(Debug)]
pub struct PollBudget {
    left: core::cell::Cell<u64>,
}

impl PollBudget {
    pub fn new(polls: u64) -> Self {
        PollBudget { left: core::cell::Cell::new(polls) }
    }
}

impl Deadline for PollBudget {
    fn expired(&self) -> bool {
        let left = self.left.get();
        if left == 0 {
            return true;
        }
        self.left.set(left - 1);
        false
    }
}

/// A fraction of whatever time `parent` had left when the share was taken.
/// Parents that cannot report remaining time are passed through unchanged.
#[derive(Debug)]
pub struct Share<'a, D: Deadline + ?Sized> {
    parent: &'a D,
    /// Expire once the parent has no more than this left.
    floor: Option<f64>,
}

impl<'a, D: Deadline + ?Sized> Share<'a, D> {
    pub fn new(parent: &'a D, fraction: f64) -> Self {
        let floor = parent.remaining_secs().map(|r| r * (1.0 - fraction.clamp(0.0, 1.0)));
        Share { parent, floor }
    }
}

impl<D: Deadline + ?Sized> Deadline for Share<'_, D> {
    fn expired(&self) -> bool {
        if self.parent.expired() {
            return true;
        }
        match (self.floor, self.parent.remaining_secs()) {
            (Some(f), Some(r)) => r <= f,
            _ => false,
        }
    }

    fn remaining_secs(&self) -> Option<f64> {
        let r = self.parent.remaining_secs()?;
        Some((r - self.floor.unwrap_or(0.0)).max(0.0))
    }
}
