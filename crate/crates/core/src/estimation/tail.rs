use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_stable, stabilize, validate_grid, EstimationError, HorizonPolicy};
use crate::asymptotics::AsymptoteSpec;
use crate::kernel::{BackwardPath, ModelError, NetworkKernel};
use crate::rng::RngStream;
use crate::window::RealizedWindow;

/// Censored fraction above which an estimate is flagged.
pub const TAINT_THRESHOLD: f64 = 1e-3;
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailLevel {
    pub x: f64,
    pub exceedances: u64,
    pub p_hat: f64,
    /// Normal-approximation 95% binomial half-width.
    pub half_width: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Fraction of samples that were censored while at or below `x`, the
    /// only ones whose indicator could still flip.
    pub censor_frac: f64,
    pub formula: Option<f64>,
    pub ratio: Option<f64>,
}

impl TailLevel {
    /// Interval for `p_hat / formula`.
    pub fn ratio_ci(&self) -> Option<(f64, f64)> {
        self.formula.filter(|f| *f > 0.0).map(|f| (self.ci_lo / f, self.ci_hi / f))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub kernel: String,
    pub replications: u64,
    pub policy: HorizonPolicy,
    pub levels: Vec<TailLevel>,
    pub censored: u64,
    pub censored_fraction: f64,
    /// Censoring above [`TAINT_THRESHOLD`].
    pub tainted: bool,
    pub mean_horizon: f64,
    pub max_horizon: usize,
}

impl TailEstimate {
    /// Deepest level with at least `min_exceedances` hits.
    pub fn deepest_resolvable(&self, min_exceedances: u64) -> Option<&TailLevel> {
        self.levels.iter().rev().find(|l| l.exceedances >= min_exceedances)
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    exceed: Vec<u64>,
    censored_below: Vec<u64>,
    censored: u64,
    horizon_sum: u64,
    horizon_max: usize,
}

impl Tally {
    fn new(levels: usize) -> Self {
        Tally { exceed: vec![0; levels], censored_below: vec![0; levels], ..Default::default() }
    }

    fn add(&mut self, o: &Tally) {
        for (a, b) in self.exceed.iter_mut().zip(&o.exceed) {
            *a += b;
        }
        for (a, b) in self.censored_below.iter_mut().zip(&o.censored_below) {
            *a += b;
        }
        self.censored += o.censored;
        self.horizon_sum += o.horizon_sum;
        self.horizon_max = self.horizon_max.max(o.horizon_max);
    }
}

/// `P(Z > x)` on a grid from `replications` stationary draws.
pub fn estimate_tail<K: NetworkKernel>(
    kernel: &K,
    grid: &[f64],
    replications: u64,
    policy: &HorizonPolicy,
    seed: u64,
    asymptote: Option<&AsymptoteSpec>,
) -> Result<TailEstimate, EstimationError> {
    estimate_tail_of(kernel, |w| kernel.maximal_dater(w), grid, replications, policy, seed, asymptote)
}

/// Like [`estimate_tail`] for another monotone functional of `[-n, 0]`,
/// such as a waiting time at one station.
pub fn estimate_tail_of<K, F>(
    kernel: &K,
    functional: F,
    grid: &[f64],
    replications: u64,
    policy: &HorizonPolicy,
    seed: u64,
    asymptote: Option<&AsymptoteSpec>,
) -> Result<TailEstimate, EstimationError>
where
    K: NetworkKernel,
    F: Fn(&RealizedWindow<K::Driving>) -> Result<f64, ModelError> + Sync,
{
    validate_grid(grid)?;
    policy.validate()?;
    if replications == 0 {
        return Err(EstimationError::InvalidParameter("replications must be positive".into()));
    }
    require_stable(kernel)?;
    let chunks = replications.div_ceil(CHUNK);
    let tallies = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::new(grid.len());
            for i in c * CHUNK..((c + 1) * CHUNK).min(replications) {
                let mut path = BackwardPath::new(kernel, RngStream::new(seed, i));
                let s = stabilize(&mut path, policy, &functional)?;
                for (j, x) in grid.iter().enumerate() {
                    if s.z > *x {
                        t.exceed[j] += 1;
                    } else if s.censored {
                        t.censored_below[j] += 1;
                    }
                }
                t.censored += u64::from(s.censored);
                t.horizon_sum += s.horizon as u64;
                t.horizon_max = t.horizon_max.max(s.horizon);
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>, EstimationError>>()?;
    let mut total = Tally::new(grid.len());
    for t in &tallies {
        total.add(t);
    }

    let n = replications as f64;
    let mut levels = Vec::with_capacity(grid.len());
    for (j, x) in grid.iter().enumerate() {
        let p = total.exceed[j] as f64 / n;
        let hw = 1.96 * (p * (1.0 - p) / n).sqrt();
        let formula = asymptote.map(|a| a.evaluate(*x)).transpose()?.map(|v| v.value);
        levels.push(TailLevel {
            x: *x,
            exceedances: total.exceed[j],
            p_hat: p,
            half_width: hw,
            ci_lo: (p - hw).max(0.0),
            ci_hi: (p + hw).min(1.0),
            censor_frac: total.censored_below[j] as f64 / n,
            formula,
            ratio: formula.filter(|f| *f > 0.0).map(|f| p / f),
        });
    }
    let censored_fraction = total.censored as f64 / n;
    Ok(TailEstimate {
        kernel: kernel.name().to_string(),
        replications,
        policy: *policy,
        levels,
        censored: total.censored,
        censored_fraction,
        tainted: censored_fraction > TAINT_THRESHOLD,
        mean_horizon: total.horizon_sum as f64 / n,
        max_horizon: total.horizon_max,
    })
}
