use serde::{Deserialize, Serialize};

use super::{estimate_tail, EstimationError, HorizonPolicy, RatioCi, TailEstimate};
use crate::dist::ArrivalSpec;
use crate::kernel::NetworkKernel;

/// Relative difference of the two arrival means above which the
/// comparison is flagged as misconfigured.
pub const MEAN_MISMATCH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsensitivityLevel {
    pub x: f64,
    pub p_left: f64,
    pub p_right: f64,
    /// `p_left / p_right`.
    pub ratio: Option<RatioCi>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsensitivityReport {
    pub left: ArrivalSpec,
    pub right: ArrivalSpec,
    pub mean_mismatch: bool,
    pub levels: Vec<InsensitivityLevel>,
    pub min_exceedances: u64,
    /// Deepest level where both sides reach `min_exceedances`.
    pub deepest: Option<f64>,
    /// The ratio interval at `deepest` contains 1.
    pub consistent: bool,
    pub left_tail: TailEstimate,
    pub right_tail: TailEstimate,
}

/// Tails of `kernel` under two arrival processes, with the same seed so
/// that both runs see the same service draws.
#[allow(clippy::too_many_arguments)]
pub fn compare_arrivals<K: NetworkKernel>(
    kernel: &K,
    left: ArrivalSpec,
    right: ArrivalSpec,
    grid: &[f64],
    replications: u64,
    policy: &HorizonPolicy,
    min_exceedances: u64,
    seed: u64,
) -> Result<InsensitivityReport, EstimationError> {
    left.validate().map_err(crate::kernel::ModelError::from)?;
    right.validate().map_err(crate::kernel::ModelError::from)?;
    let (ml, mr) = (left.mean(), right.mean());
    let mean_mismatch = (ml - mr).abs() > MEAN_MISMATCH * ml.max(mr);
    let kl = kernel.with_arrivals(left.clone());
    let kr = kernel.with_arrivals(right.clone());
    let lt = estimate_tail(&kl, grid, replications, policy, seed, None)?;
    let rt = estimate_tail(&kr, grid, replications, policy, seed, None)?;
    let levels: Vec<InsensitivityLevel> = lt
        .levels
        .iter()
        .zip(&rt.levels)
        .map(|(a, b)| InsensitivityLevel {
            x: a.x,
            p_left: a.p_hat,
            p_right: b.p_hat,
            ratio: RatioCi::from_counts(a.exceedances, replications, b.exceedances, replications),
        })
        .collect();
    let deepest = lt
        .levels
        .iter()
        .zip(&rt.levels)
        .rev()
        .find(|(a, b)| a.exceedances >= min_exceedances && b.exceedances >= min_exceedances)
        .map(|(a, _)| a.x);
    let consistent = !mean_mismatch
        && levels.iter().find(|l| Some(l.x) == deepest).and_then(|l| l.ratio).is_some_and(|r| r.contains(1.0));
    Ok(InsensitivityReport {
        left,
        right,
        mean_mismatch,
        levels,
        min_exceedances,
        deepest,
        consistent,
        left_tail: lt,
        right_tail: rt,
    })
}

/// Deterministic against exponential interarrivals, both with mean `a`.
pub fn interarrival_insensitivity_check<K: NetworkKernel>(
    kernel: &K,
    a: f64,
    grid: &[f64],
    replications: u64,
    policy: &HorizonPolicy,
    min_exceedances: u64,
    seed: u64,
) -> Result<InsensitivityReport, EstimationError> {
    let det = ArrivalSpec::deterministic(a).map_err(crate::kernel::ModelError::from)?;
    let exp = ArrivalSpec::exponential(a).map_err(crate::kernel::ModelError::from)?;
    compare_arrivals(kernel, det, exp, grid, replications, policy, min_exceedances, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::HeavyTailDist;
    use crate::models::SingleServer;

    fn kernel() -> SingleServer {
        SingleServer::new(HeavyTailDist::pareto(2.5, 0.3).unwrap(), ArrivalSpec::deterministic(1.0).unwrap()).unwrap()
    }

    #[test]
    fn self_comparison_is_exact() {
        let e = ArrivalSpec::exponential(1.0).unwrap();
        let r = compare_arrivals(&kernel(), e.clone(), e, &[0.5, 2.0], 20_000, &HorizonPolicy::default(), 50, 3)
            .unwrap();
        for l in &r.levels {
            assert_eq!(l.ratio.unwrap().value, 1.0);
        }
        assert!(r.consistent && !r.mean_mismatch);
    }

    #[test]
    fn mismatched_means_are_flagged() {
        let r = compare_arrivals(
            &kernel(),
            ArrivalSpec::deterministic(1.0).unwrap(),
            ArrivalSpec::exponential(0.6).unwrap(),
            &[0.5, 2.0],
            20_000,
            &HorizonPolicy::default(),
            50,
            3,
        )
        .unwrap();
        assert!(r.mean_mismatch && !r.consistent);
        let l = &r.levels[1];
        assert!(l.ratio.unwrap().hi < 0.8, "{l:?}");
    }
}
