use serde::{Deserialize, Serialize};

use super::hill::hill_point;
use super::{hill_tail_index, require_stable, stationary_samples, EstimationError, HillEstimate, HorizonPolicy};
use crate::kernel::NetworkKernel;
use crate::rng::RngStream;

/// Largest `|gap|` accepted as agreement with `alpha - 1`.
pub const INDEX_TOLERANCE: f64 = 0.3;
/// Largest relative change of the Hill index across the `k` profile
/// before the tail is called light.
pub const DRIFT_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub service_index: f64,
    /// `alpha - 1`.
    pub expected_index: f64,
    pub estimate: HillEstimate,
    /// `estimate.index - expected_index`.
    pub gap: f64,
    /// Hill index at `k/4, k/2, k, 2k, 4k` (those that are admissible).
    pub profile: Vec<(usize, f64)>,
    /// `index(smallest k) / index(largest k) - 1`.
    pub drift: f64,
    pub heavy_tailed: bool,
    pub censored_fraction: f64,
    pub consistent: bool,
}

/// Hill index of `n` stationary `Z` draws against `alpha - 1`, where
/// `alpha` is the Pareto index of the services.
pub fn moment_order_check<K: NetworkKernel>(
    kernel: &K,
    service_index: f64,
    n: u64,
    k: usize,
    policy: &HorizonPolicy,
    seed: u64,
) -> Result<MomentCheck, EstimationError> {
    if !(service_index > 1.0) || !service_index.is_finite() {
        return Err(EstimationError::InvalidParameter(format!("service index {service_index} must exceed 1")));
    }
    require_stable(kernel)?;
    let samples = stationary_samples(kernel, n, policy, seed)?;
    let censored = samples.iter().filter(|s| s.censored).count();
    let z: Vec<f64> = samples.iter().map(|s| s.z).collect();
    let boot_seed = RngStream::derive(seed, 0x4b11);
    let estimate = hill_tail_index(&z, k, boot_seed)?;

    let mut profile = Vec::new();
    for kk in [k / 4, k / 2, k, 2 * k, 4 * k] {
        if kk >= 10 && 2 * kk < z.len() {
            let idx = if kk == k { estimate.index } else { hill_point(&mut z.clone(), kk)?.0 };
            profile.push((kk, idx));
        }
    }
    let drift = match (profile.first(), profile.last()) {
        (Some(a), Some(b)) => a.1 / b.1 - 1.0,
        _ => 0.0,
    };
    let heavy_tailed = drift.abs() <= DRIFT_TOLERANCE;
    let expected_index = service_index - 1.0;
    let gap = estimate.index - expected_index;
    Ok(MomentCheck {
        service_index,
        expected_index,
        gap,
        profile,
        drift,
        heavy_tailed,
        censored_fraction: censored as f64 / n as f64,
        consistent: heavy_tailed && gap.abs() <= INDEX_TOLERANCE,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{ArrivalSpec, HeavyTailDist};
    use crate::models::SingleServer;

    #[test]
    fn light_tails_are_flagged() {
        let k = SingleServer::new(HeavyTailDist::exponential(2.0).unwrap(), ArrivalSpec::exponential(1.0).unwrap())
            .unwrap();
        let r = moment_order_check(&k, 2.5, 40_000, 200, &HorizonPolicy { n0: 16, ..Default::default() }, 4).unwrap();
        assert!(!r.heavy_tailed, "{r:?}");
        assert!(!r.consistent);
        // Smaller k looks further out and sees a steeper tail.
        assert!(r.drift > DRIFT_TOLERANCE);
    }

    #[test]
    fn rejects_bad_index() {
        let k = SingleServer::new(HeavyTailDist::exponential(2.0).unwrap(), ArrivalSpec::exponential(1.0).unwrap())
            .unwrap();
        assert!(moment_order_check(&k, 0.9, 100, 10, &HorizonPolicy::default(), 0).is_err());
    }
}
