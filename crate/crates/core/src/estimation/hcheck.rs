use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{validate_grid, EstimationError, RatioCi};
use crate::dist::HeavyTailDist;
use crate::kernel::NetworkKernel;
use crate::models::ModelSpec;
use crate::rng::RngStream;
use crate::with_kernel;

pub const H_BAND: (f64, f64) = (0.8, 1.25);
pub const DEFAULT_MIN_EXCEEDANCES: u64 = 50;
const CHUNK: u64 = 8192;

/// Law of the workload vector `(Y^(1), ..., Y^(r))` of one customer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkloadVector {
    Independent { components: Vec<HeavyTailDist> },
    /// `copies` identical coordinates.
    Comonotone { component: HeavyTailDist, copies: usize },
    /// Per-station workloads of one customer of a network with (AA).
    Network { model: ModelSpec },
}

impl WorkloadVector {
    pub fn validate(&self) -> Result<(), EstimationError> {
        match self {
            WorkloadVector::Independent { components } if components.is_empty() => {
                Err(EstimationError::InvalidParameter("no components".into()))
            }
            WorkloadVector::Comonotone { copies: 0, .. } => Err(EstimationError::InvalidParameter("no copies".into())),
            WorkloadVector::Network { model } => {
                let k = model.build()?;
                if !with_kernel!(&k, k => k.has_aa()) {
                    return Err(EstimationError::InvalidParameter("network lacks per-station workloads".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// One draw per call.
    pub fn sampler(&self) -> Result<Box<dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync + '_>, EstimationError> {
        self.validate()?;
        Ok(match self {
            WorkloadVector::Independent { components } => {
                Box::new(move |rng| components.iter().map(|d| d.sample(rng)).collect())
            }
            WorkloadVector::Comonotone { component, copies } => Box::new(move |rng| vec![component.sample(rng); *copies]),
            WorkloadVector::Network { model } => {
                let k = model.build()?;
                Box::new(move |rng| {
                    with_kernel!(&k, k => {
                        let d = k.sample_driving(rng).expect("validated network");
                        k.components(&d).expect("validated network")
                    })
                })
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HVerdict {
    Consistent,
    Inconsistent,
    /// No level had enough exceedances.
    Unresolvable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HLevel {
    pub x: f64,
    /// `#{sum Y > x}`.
    pub sum_count: u64,
    /// `#{max Y > x}`.
    pub max_count: u64,
    /// `sum_j #{Y^(j) > x}`.
    pub marginal_count: u64,
    pub p_sum: f64,
    pub p_max: f64,
    pub p_marginal: f64,
    pub sum_over_marginal: Option<RatioCi>,
    pub max_over_marginal: Option<RatioCi>,
    pub sum_over_max: Option<RatioCi>,
}

impl HLevel {
    fn resolved(&self, min: u64) -> bool {
        self.sum_count >= min && self.max_count >= min && self.marginal_count >= min
    }

    fn ratios(&self) -> [Option<RatioCi>; 3] {
        [self.sum_over_marginal, self.max_over_marginal, self.sum_over_max]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HReport {
    pub samples: u64,
    pub dimension: usize,
    pub min_exceedances: u64,
    pub levels: Vec<HLevel>,
    /// Grid points dropped for having too few exceedances.
    pub dropped: Vec<f64>,
    /// Level the verdict is read at.
    pub deepest: Option<f64>,
    pub verdict: HVerdict,
}

impl HReport {
    pub fn deepest_level(&self) -> Option<&HLevel> {
        self.deepest.and_then(|x| self.levels.iter().find(|l| l.x == x))
    }
}

/// Compares `P(sum Y > x)`, `P(max Y > x)` and `sum_j P(Y^(j) > x)` on a
/// grid from `n` draws of `sampler`.
///
/// The verdict is read at the deepest level where all three counts reach
/// `min_exceedances`; deeper levels are dropped. Each ratio interval must
/// meet `[0.8, 1.25]`.
pub fn check_assumption_h<F>(
    sampler: F,
    grid: &[f64],
    n: u64,
    min_exceedances: u64,
    seed: u64,
) -> Result<HReport, EstimationError>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    validate_grid(grid)?;
    if n < 100_000 {
        return Err(EstimationError::InvalidParameter(format!("need at least 1e5 samples, got {n}")));
    }
    let g = grid.len();
    let tallies = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c).driving();
            let mut t = vec![[0u64; 3]; g];
            let mut dim = 0;
            for _ in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let y = sampler(&mut rng);
                dim = y.len();
                let s: f64 = y.iter().sum();
                let m = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for (j, x) in grid.iter().enumerate() {
                    t[j][0] += u64::from(s > *x);
                    t[j][1] += u64::from(m > *x);
                    t[j][2] += y.iter().filter(|v| **v > *x).count() as u64;
                }
            }
            (dim, t)
        })
        .collect::<Vec<_>>();
    let dimension = tallies.first().map_or(0, |t| t.0);
    let mut total = vec![[0u64; 3]; g];
    for (_, t) in &tallies {
        for (a, b) in total.iter_mut().zip(t) {
            for i in 0..3 {
                a[i] += b[i];
            }
        }
    }

    let nf = n as f64;
    let levels: Vec<HLevel> = grid
        .iter()
        .zip(&total)
        .map(|(x, [s, m, marg])| HLevel {
            x: *x,
            sum_count: *s,
            max_count: *m,
            marginal_count: *marg,
            p_sum: *s as f64 / nf,
            p_max: *m as f64 / nf,
            p_marginal: *marg as f64 / nf,
            sum_over_marginal: RatioCi::from_counts(*s, n, *marg, n),
            max_over_marginal: RatioCi::from_counts(*m, n, *marg, n),
            sum_over_max: RatioCi::from_counts(*s, n, *m, n),
        })
        .collect();
    let deepest = levels.iter().rev().find(|l| l.resolved(min_exceedances)).map(|l| l.x);
    let dropped = levels.iter().filter(|l| deepest.map_or(true, |d| l.x > d)).map(|l| l.x).collect();
    let verdict = match levels.iter().find(|l| Some(l.x) == deepest) {
        None => HVerdict::Unresolvable,
        Some(l) => {
            let ok = l.ratios().iter().all(|r| r.is_some_and(|r| r.intersects(H_BAND.0, H_BAND.1)));
            if ok {
                HVerdict::Consistent
            } else {
                HVerdict::Inconsistent
            }
        }
    };
    Ok(HReport { samples: n, dimension, min_exceedances, levels, dropped, deepest, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comonotone_pair_halves_max_over_marginal() {
        let v = WorkloadVector::Comonotone { component: HeavyTailDist::pareto(2.5, 1.0).unwrap(), copies: 2 };
        let r = check_assumption_h(v.sampler().unwrap(), &[2.0, 5.0, 10.0], 100_000, 50, 1).unwrap();
        for l in &r.levels {
            assert_eq!(l.max_over_marginal.unwrap().value, 0.5);
        }
        assert_eq!(r.verdict, HVerdict::Inconsistent);
        assert_eq!(r.dimension, 2);
    }

    #[test]
    fn single_coordinate_is_trivially_consistent() {
        let v = WorkloadVector::Independent { components: vec![HeavyTailDist::exponential(1.0).unwrap()] };
        let r = check_assumption_h(v.sampler().unwrap(), &[1.0, 3.0, 30.0], 100_000, 50, 1).unwrap();
        assert_eq!(r.verdict, HVerdict::Consistent);
        assert_eq!(r.deepest, Some(3.0));
        assert_eq!(r.dropped, vec![30.0]);
        let l = r.deepest_level().unwrap();
        assert_eq!(l.sum_count, l.max_count);
        assert_eq!(l.max_count, l.marginal_count);
    }

    #[test]
    fn unresolvable_and_small_n() {
        let v = WorkloadVector::Independent { components: vec![HeavyTailDist::exponential(1.0).unwrap()] };
        let r = check_assumption_h(v.sampler().unwrap(), &[100.0], 100_000, 50, 1).unwrap();
        assert_eq!(r.verdict, HVerdict::Unresolvable);
        assert!(check_assumption_h(v.sampler().unwrap(), &[1.0], 10, 50, 1).is_err());
    }
}
