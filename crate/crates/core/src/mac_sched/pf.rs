//! Proportional-fair subband scheduler.

use serde::{Deserialize, Serialize};

/// Exponentially smoothed served rate per UE of one beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfState {
    pub avg_rate: Vec<f64>,
    pub alpha: f64,
}

/// Keeps the PF metric finite before a UE has been served.
const MIN_AVG_RATE: f64 = 1e-6;

impl PfState {
    pub fn new(n_ues: usize, alpha: f64) -> Self {
        debug_assert!(alpha > 0.0 && alpha < 1.0);
        Self { avg_rate: vec![0.0; n_ues], alpha }
    }

    /// One update per slot with the rate each UE was served (0 when idle).
    pub fn update(&mut self, served: &[f64]) {
        for (avg, r) in self.avg_rate.iter_mut().zip(served) {
            *avg = (1.0 - self.alpha) * *avg + self.alpha * r;
        }
    }
}

/// Assigns every subband to the UE with the largest marginal-rate / average-rate
/// metric. `marginal_rate(ue, subband, already_allocated)` is the rate gained
/// by giving `subband` to `ue`. Ties go to the lowest UE index. Returns the
/// UE index per subband; empty when there are no UEs.
pub fn pf_schedule(
    subbands: usize,
    pf: &PfState,
    mut marginal_rate: impl FnMut(usize, usize, usize) -> f64,
) -> Vec<usize> {
    let n = pf.avg_rate.len();
    if n == 0 {
        return Vec::new();
    }
    let mut allocated = vec![0usize; n];
    (0..subbands)
        .map(|sb| {
            let mut best = 0;
            let mut best_metric = f64::NEG_INFINITY;
            for (ue, (&given, &avg)) in allocated.iter().zip(&pf.avg_rate).enumerate() {
                let metric = marginal_rate(ue, sb, given) / avg.max(MIN_AVG_RATE);
                if metric > best_metric {
                    best = ue;
                    best_metric = metric;
                }
            }
            allocated[best] += 1;
            best
        })
        .collect()
}
