//! Delay of information travelling along the cycle under randomized gossip.

use rand::Rng;

use crate::adversary::LowerBoundLayout;
use crate::error::{Error, Result};
use crate::rng::{sub_stream, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// Hops to traverse, `⌈m/2⌉` for `n = 2m + 2`.
    pub hops: usize,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Each hop waits for a successful transmission, which happens with
/// probability `ω` per round; returns the mean total over `trials`.
pub fn delay_probe(n: usize, omega: f64, trials: usize, seed: u64) -> Result<ProbeResult> {
    let layout = LowerBoundLayout::new(n, omega)?;
    if trials == 0 {
        return Err(Error::Config("delay probe needs at least one trial".into()));
    }
    let hops = layout.hops;
    let samples: Vec<f64> = (0..trials)
        .map(|trial| {
            let mut rng = sub_stream(seed, Purpose::Probe, trial as u64, 0);
            let mut rounds = 0u64;
            for _ in 0..hops {
                loop {
                    rounds += 1;
                    if rng.random::<f64>() < omega {
                        break;
                    }
                }
            }
            rounds as f64
        })
        .collect();
    let m = trials as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = if trials > 1 {
        samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(ProbeResult {
        hops,
        mean,
        stderr: (var / m).sqrt(),
        trials,
    })
}
