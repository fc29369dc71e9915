//! Shared fixtures for the benchmarks.

use tgfield_core::sampling::sample_points;
use tgfield_core::scenario::builtin;
use tgfield_core::{ChartPoint, Scenario};

/// A builtin scenario with its first `count` sample points.
pub fn fixture(name: &str, count: usize) -> (Scenario, Vec<ChartPoint>) {
    let s = builtin(name).expect("builtin scenario");
    let pts = sample_points(&s.regions, count).expect("valid regions");
    (s, pts)
}
