use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_stable, stabilize, EstimationError, HorizonPolicy};
use crate::kernel::{BackwardPath, ModelError, NetworkKernel};
use crate::rng::RngStream;

pub const DEFAULT_THETA: f64 = 0.25;
pub const DEFAULT_THETAS: [f64; 3] = [0.1, 0.25, 0.5];
const BATCH: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpCounts {
    pub theta: f64,
    /// `histogram[c]` conditioned paths had exactly `c` jumps above `theta x`.
    pub histogram: Vec<u64>,
    pub fraction_none: Option<f64>,
    pub fraction_one: Option<f64>,
    pub fraction_two_or_more: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigJumpReport {
    pub kernel: String,
    pub x: f64,
    pub target: u64,
    pub budget: u64,
    /// Paths with `Z > x` that were kept.
    pub conditioned: u64,
    pub replications_used: u64,
    /// The budget ran out before `target` paths were found.
    pub starved: bool,
    /// Mean length of the segment `[-k, 0]` that realizes `Z`.
    pub mean_segment: Option<f64>,
    /// Conditioned paths whose horizon hit the cap.
    pub censored: u64,
    pub thresholds: Vec<JumpCounts>,
}

impl BigJumpReport {
    pub fn at(&self, theta: f64) -> Option<&JumpCounts> {
        self.thresholds.iter().find(|t| t.theta == theta)
    }
}

struct Conditioned {
    segment: usize,
    censored: bool,
    counts: Vec<usize>,
}

/// Shortest `k` with `Z_[-k,0] == z`.
fn effective_segment<K: NetworkKernel>(
    kernel: &K,
    path: &mut BackwardPath<'_, K>,
    horizon: usize,
    z: f64,
) -> Result<usize, ModelError> {
    let (mut lo, mut hi) = (0usize, horizon);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if kernel.maximal_dater(&path.window(mid)?)?.to_bits() == z.to_bits() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

fn inspect<K: NetworkKernel>(
    kernel: &K,
    policy: &HorizonPolicy,
    x: f64,
    thetas: &[f64],
    stream: RngStream,
) -> Result<Option<Conditioned>, ModelError> {
    let mut path = BackwardPath::new(kernel, stream);
    let s = stabilize(&mut path, policy, |w| kernel.maximal_dater(w))?;
    if s.z <= x {
        return Ok(None);
    }
    let k = effective_segment(kernel, &mut path, s.horizon, s.z)?;
    let w = path.window(k)?;
    let jumps: Vec<f64> = w.driving().iter().flat_map(|d| kernel.jump_variables(d)).collect();
    let counts = thetas.iter().map(|t| jumps.iter().filter(|v| **v > t * x).count()).collect();
    Ok(Some(Conditioned { segment: k + 1, censored: s.censored, counts }))
}

/// Conditions stationary paths on `Z > x` and counts, on the segment of
/// customers that realizes `Z`, the driving variables above `theta x`.
///
/// Replications run in index order until `target` conditioned paths are
/// found or `budget` replications are spent.
pub fn big_jump_diagnostic<K: NetworkKernel>(
    kernel: &K,
    x: f64,
    thetas: &[f64],
    target: u64,
    budget: u64,
    policy: &HorizonPolicy,
    seed: u64,
) -> Result<BigJumpReport, EstimationError> {
    policy.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(EstimationError::InvalidParameter(format!("level x = {x} must be positive")));
    }
    if thetas.is_empty() || thetas.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return Err(EstimationError::InvalidParameter("thresholds must lie in (0, 1]".into()));
    }
    if target == 0 || budget == 0 {
        return Err(EstimationError::InvalidParameter("target and budget must be positive".into()));
    }
    require_stable(kernel)?;

    let mut kept: Vec<Conditioned> = Vec::new();
    let mut used = 0u64;
    while used < budget && (kept.len() as u64) < target {
        let end = (used + BATCH).min(budget);
        let found = (used..end)
            .into_par_iter()
            .map(|i| inspect(kernel, policy, x, thetas, RngStream::new(seed, i)).map(|c| c.map(|c| (i, c))))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, c) in found.into_iter().flatten() {
            if (kept.len() as u64) < target {
                kept.push(c);
                used = i + 1;
            }
        }
        if (kept.len() as u64) < target {
            used = end;
        }
    }

    let n = kept.len() as u64;
    let frac = |c: u64| (n > 0).then(|| c as f64 / n as f64);
    let thresholds = thetas
        .iter()
        .enumerate()
        .map(|(j, theta)| {
            let max = kept.iter().map(|c| c.counts[j]).max().unwrap_or(0);
            let mut histogram = vec![0u64; max + 1];
            for c in &kept {
                histogram[c.counts[j]] += 1;
            }
            let get = |c: usize| histogram.get(c).copied().unwrap_or(0);
            JumpCounts {
                theta: *theta,
                fraction_none: frac(get(0)),
                fraction_one: frac(get(1)),
                fraction_two_or_more: frac(n - get(0) - get(1)),
                histogram,
            }
        })
        .collect();
    Ok(BigJumpReport {
        kernel: kernel.name().to_string(),
        x,
        target,
        budget,
        conditioned: n,
        replications_used: used,
        starved: n < target,
        mean_segment: (n > 0).then(|| kept.iter().map(|c| c.segment as f64).sum::<f64>() / n as f64),
        censored: kept.iter().filter(|c| c.censored).count() as u64,
        thresholds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{ArrivalSpec, HeavyTailDist};
    use crate::models::SingleServer;

    #[test]
    fn segment_is_the_busy_period() {
        let k = SingleServer::new(HeavyTailDist::pareto(2.5, 0.3).unwrap(), ArrivalSpec::exponential(1.0).unwrap())
            .unwrap();
        let p = HorizonPolicy { n0: 8, ..Default::default() };
        for i in 0..300 {
            let mut path = BackwardPath::new(&k, RngStream::new(2, i));
            let s = stabilize(&mut path, &p, |w| k.maximal_dater(w)).unwrap();
            let seg = effective_segment(&k, &mut path, s.horizon, s.z).unwrap();
            let w = path.window(s.horizon).unwrap();
            // Lindley: Z = sigma_0 + W_0 and the busy period starts at the last
            // customer that found the system empty.
            let sigma: Vec<f64> = w.driving().to_vec();
            let waits = crate::models::single::lindley_path(&sigma[..sigma.len() - 1], w.gaps()).unwrap();
            let start = waits.iter().rposition(|v| *v == 0.0).unwrap();
            assert_eq!(seg, s.horizon - start, "rep {i}");
        }
    }

    #[test]
    fn starves_on_light_tails() {
        let k = SingleServer::new(HeavyTailDist::exponential(2.0).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
            .unwrap();
        let r = big_jump_diagnostic(&k, 40.0, &[0.25], 10, 2000, &HorizonPolicy::default(), 1).unwrap();
        assert!(r.starved);
        assert_eq!(r.conditioned, 0);
        assert_eq!(r.replications_used, 2000);
        assert!(r.at(0.25).unwrap().fraction_one.is_none());
    }

    #[test]
    fn stops_at_target() {
        let k = SingleServer::new(HeavyTailDist::pareto(2.5, 0.3).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
            .unwrap();
        let r = big_jump_diagnostic(&k, 2.0, &DEFAULT_THETAS, 50, 1 << 20, &HorizonPolicy::default(), 1).unwrap();
        assert_eq!(r.conditioned, 50);
        assert!(!r.starved);
        for t in &r.thresholds {
            assert_eq!(t.histogram.iter().sum::<u64>(), 50);
        }
        let again = big_jump_diagnostic(&k, 2.0, &DEFAULT_THETAS, 50, 1 << 20, &HorizonPolicy::default(), 1).unwrap();
        assert_eq!(r, again);
    }
}
