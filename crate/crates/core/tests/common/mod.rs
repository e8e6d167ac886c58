//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use qcoexist::nonlinear::ChannelPlan;

pub const GRID_HZ: i64 = 50_000_000_000;
pub const QUANTUM_HZ: i64 = 193_700_000_000_000;

/// Every ordered `(a, b, c)` with `c ∉ {a, b}`, folded onto `i <= j` and
/// deduplicated. O(N³).
pub fn fwm_oracle(freqs_hz: &[i64]) -> BTreeSet<(usize, usize, usize, i64)> {
    let n = freqs_hz.len();
    let mut set = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if c == a || c == b {
                    continue;
                }
                let (i, j) = if a <= b { (a, b) } else { (b, a) };
                set.insert((i, j, c, freqs_hz[a] + freqs_hz[b] - freqs_hz[c]));
            }
        }
    }
    set
}

/// Channels `slot · 50 GHz` below the quantum channel at 193.70 THz, 0 dBm total.
pub fn plan_from_slots(slots: &[i64]) -> (ChannelPlan, Vec<i64>) {
    let hz: Vec<i64> = slots.iter().map(|s| QUANTUM_HZ - s * GRID_HZ).collect();
    let thz = hz.iter().map(|&h| h as f64 / 1e12).collect();
    (ChannelPlan::uniform(193.70, thz, 0.0).unwrap(), hz)
}
