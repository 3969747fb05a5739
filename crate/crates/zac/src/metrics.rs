//! Per-request, per-epoch and run-level results of a simulation.

use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use zac_core::{LocationId, RequestId, Seconds, VehicleId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestRecord {
    pub id: RequestId,
    pub origin: LocationId,
    pub destination: LocationId,
    pub arrival: Seconds,
    /// Shortest travel time origin to destination.
    pub direct: Seconds,
    pub epoch: i64,
    pub vehicle: Option<VehicleId>,
    pub pickup: Option<Seconds>,
    pub dropoff: Option<Seconds>,
}

impl RequestRecord {
    pub fn wait(&self) -> Option<Seconds> {
        self.pickup.map(|p| p - self.arrival)
    }

    /// Time beyond the direct trip, measured from arrival.
    pub fn delay(&self) -> Option<Seconds> {
        self.dropoff.map(|d| d - self.arrival - self.direct)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochRow {
    pub epoch: i64,
    pub t: Seconds,
    pub arrived: usize,
    pub served: usize,
    pub rejected: usize,
    pub status: String,
    pub anchors: usize,
    pub candidates: usize,
    pub completions: usize,
    pub truncated: usize,
    pub paths: usize,
    pub rebalanced: usize,
    pub future_value: f64,
    pub benders_iterations: usize,
    pub benders_converged: bool,
    pub timed_out: bool,
}

/// Wall-clock measurements; kept apart from the deterministic outputs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimingRow {
    pub epoch: i64,
    pub build_ms: f64,
    pub solve_ms: f64,
    pub total_ms: f64,
    pub timed_out: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BendersRow {
    pub epoch: i64,
    pub iterations: usize,
    pub cuts: usize,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub wall_ms: f64,
    /// Budget the solve was given, ms.
    pub budget_ms: f64,
    pub converged: bool,
    pub timed_out: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub method: String,
    pub fleet: usize,
    pub total_requests: usize,
    pub served: usize,
    pub rejected: usize,
    /// Percent of requests served; 0 when there were none.
    pub service_rate: f64,
    pub mean_wait: f64,
    pub max_wait: Seconds,
    pub mean_delay: f64,
    pub max_delay: Seconds,
    pub lambda: Seconds,
    pub over_lambda: usize,
    /// Percent of served requests whose delay exceeded lambda.
    pub over_lambda_percent: f64,
    pub max_excess: Seconds,
    pub wait_violations: usize,
    pub capacity_violations: usize,
    pub undelivered: usize,
    pub epochs: usize,
    pub timeouts: usize,
    pub truncated: usize,
    pub rejected_solutions: usize,
    pub end_time: Seconds,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsReport {
    pub summary: Summary,
    pub epochs: Vec<EpochRow>,
    pub requests: Vec<RequestRecord>,
    pub timing: Vec<TimingRow>,
    pub benders: Vec<BendersRow>,
}

fn opt(v: Option<impl ToString>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsReport {
    pub fn epochs_csv(&self) -> String {
        let mut s = String::from(
            "epoch,t,arrived,served,rejected,status,anchors,candidates,completions,truncated,paths,rebalanced,future_value,benders_iterations,benders_converged,timed_out\n",
        );
        for e in &self.epochs {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{},{},{}",
                e.epoch,
                e.t,
                e.arrived,
                e.served,
                e.rejected,
                e.status,
                e.anchors,
                e.candidates,
                e.completions,
                e.truncated,
                e.paths,
                e.rebalanced,
                e.future_value,
                e.benders_iterations,
                e.benders_converged,
                e.timed_out
            );
        }
        s
    }

    pub fn requests_csv(&self) -> String {
        let mut s = String::from("id,origin,destination,arrival,direct,epoch,vehicle,pickup,dropoff,wait,delay\n");
        for r in &self.requests {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.id.0,
                r.origin.0,
                r.destination.0,
                r.arrival,
                r.direct,
                r.epoch,
                opt(r.vehicle.map(|v| v.0)),
                opt(r.pickup),
                opt(r.dropoff),
                opt(r.wait()),
                opt(r.delay())
            );
        }
        s
    }

    pub fn timing_csv(&self) -> String {
        let mut s = String::from("epoch,build_ms,solve_ms,total_ms,timed_out\n");
        for t in &self.timing {
            let _ = writeln!(s, "{},{:.3},{:.3},{:.3},{}", t.epoch, t.build_ms, t.solve_ms, t.total_ms, t.timed_out);
        }
        s
    }

    pub fn benders_csv(&self) -> String {
        let mut s = String::from("epoch,iterations,cuts,lower,upper,gap,wall_ms,budget_ms,converged,timed_out\n");
        for b in &self.benders {
            let _ = writeln!(
                s,
                "{},{},{},{:.6},{:.6},{:.6},{:.3},{:.3},{},{}",
                b.epoch, b.iterations, b.cuts, b.lower, b.upper, b.gap, b.wall_ms, b.budget_ms, b.converged, b.timed_out
            );
        }
        s
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes") + "\n"
    }

    /// Writes `epochs.csv`, `requests.csv`, `summary.json` (deterministic
    /// under a fixed seed) and `timing.csv`, `benders.csv` (wall clock).
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("epochs.csv"), self.epochs_csv())?;
        fs::write(dir.join("requests.csv"), self.requests_csv())?;
        fs::write(dir.join("summary.json"), self.summary_json())?;
        fs::write(dir.join("timing.csv"), self.timing_csv())?;
        fs::write(dir.join("benders.csv"), self.benders_csv())?;
        Ok(())
    }

    /// The deterministic outputs, concatenated.
    pub fn deterministic_bytes(&self) -> Vec<u8> {
        let mut out = self.epochs_csv().into_bytes();
        out.extend(self.requests_csv().into_bytes());
        out.extend(self.summary_json().into_bytes());
        out
    }
}

/// Fills the request-derived fields of `summary`.
pub fn summarize(summary: &mut Summary, requests: &[RequestRecord]) {
    summary.total_requests = requests.len();
    summary.served = requests.iter().filter(|r| r.vehicle.is_some()).count();
    summary.rejected = summary.total_requests - summary.served;
    summary.service_rate =
        if summary.total_requests == 0 { 0.0 } else { 100.0 * summary.served as f64 / summary.total_requests as f64 };
    let waits: Vec<Seconds> = requests.iter().filter_map(|r| r.wait()).collect();
    let delays: Vec<Seconds> = requests.iter().filter_map(|r| r.delay()).collect();
    let mean = |v: &[Seconds]| if v.is_empty() { 0.0 } else { v.iter().sum::<Seconds>() as f64 / v.len() as f64 };
    summary.mean_wait = mean(&waits);
    summary.max_wait = waits.iter().copied().max().unwrap_or(0);
    summary.mean_delay = mean(&delays);
    summary.max_delay = delays.iter().copied().max().unwrap_or(0);
    let lambda = summary.lambda;
    summary.over_lambda = delays.iter().filter(|&&d| d > lambda).count();
    summary.over_lambda_percent =
        if summary.served == 0 { 0.0 } else { 100.0 * summary.over_lambda as f64 / summary.served as f64 };
    summary.max_excess = delays.iter().map(|&d| (d - lambda).max(0)).max().unwrap_or(0);
    summary.undelivered = requests.iter().filter(|r| r.vehicle.is_some() && r.dropoff.is_none()).count();
}
