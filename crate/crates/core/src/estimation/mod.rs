//! Monte Carlo estimation of the stationary maximal dater and diagnostics
//! of its tail.

pub mod bigjump;
pub mod hcheck;
pub mod hill;
pub mod insensitivity;
pub mod moments;
pub mod tail;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::AsymptoticsError;
use crate::kernel::{BackwardPath, ModelError, NetworkKernel};
use crate::rng::RngStream;
use crate::window::RealizedWindow;

pub use bigjump::{big_jump_diagnostic, BigJumpReport};
pub use hcheck::{check_assumption_h, HReport, HVerdict};
pub use hill::{hill_tail_index, HillEstimate};
pub use insensitivity::{compare_arrivals, interarrival_insensitivity_check, InsensitivityReport};
pub use moments::{moment_order_check, MomentCheck};
pub use tail::{estimate_tail, estimate_tail_of, TailEstimate, TailLevel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least 10 order statistics, got k = {0}")]
    TooFewOrderStatistics(usize),
    #[error("k = {k} must be below half the sample size {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("model is not stable: lambda gamma(0) = {0} >= 1")]
    Unstable(f64),
}

/// How far back `Z_[-n,0]` is evaluated before it is taken as the
/// stationary value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonPolicy {
    /// First horizon.
    pub n0: usize,
    /// Consecutive doublings that must leave `Z` unchanged.
    pub stable_doublings: usize,
    /// Largest horizon; reaching it censors the sample.
    pub n_max: usize,
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        HorizonPolicy { n0: 64, stable_doublings: 2, n_max: 1 << 16 }
    }
}

impl HorizonPolicy {
    pub fn validate(&self) -> Result<(), EstimationError> {
        if self.n0 == 0 || self.stable_doublings == 0 || self.n_max < self.n0 {
            return Err(EstimationError::InvalidParameter(format!("bad horizon policy {self:?}")));
        }
        Ok(())
    }
}

/// One draw of the stationary maximal dater.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarySample {
    pub z: f64,
    /// Final `n` of the window `[-n, 0]`.
    pub horizon: usize,
    /// Stopped by `n_max` rather than by stabilization.
    pub censored: bool,
}

/// Doubles the horizon of `path` until `f` of the window stabilizes.
pub fn stabilize<K, F>(
    path: &mut BackwardPath<'_, K>,
    policy: &HorizonPolicy,
    f: F,
) -> Result<StationarySample, ModelError>
where
    K: NetworkKernel,
    F: Fn(&RealizedWindow<K::Driving>) -> Result<f64, ModelError>,
{
    let mut n = policy.n0;
    let mut z = f(&path.window(n)?)?;
    let mut unchanged = 0;
    loop {
        if n * 2 > policy.n_max {
            return Ok(StationarySample { z, horizon: n, censored: true });
        }
        n *= 2;
        let next = f(&path.window(n)?)?;
        if next.to_bits() == z.to_bits() {
            unchanged += 1;
        } else {
            unchanged = 0;
        }
        z = next;
        if unchanged >= policy.stable_doublings {
            return Ok(StationarySample { z, horizon: n, censored: false });
        }
    }
}

/// Draw of the stationary `Z` for replication `stream`.
pub fn stationary_dater_sample<K: NetworkKernel>(
    kernel: &K,
    policy: &HorizonPolicy,
    stream: RngStream,
) -> Result<StationarySample, ModelError> {
    let mut path = BackwardPath::new(kernel, stream);
    stabilize(&mut path, policy, |w| kernel.maximal_dater(w))
}

/// Replications `0..n` of [`stationary_dater_sample`], in order.
pub fn stationary_samples<K: NetworkKernel>(
    kernel: &K,
    n: u64,
    policy: &HorizonPolicy,
    seed: u64,
) -> Result<Vec<StationarySample>, EstimationError> {
    use rayon::prelude::*;
    policy.validate()?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| stationary_dater_sample(kernel, policy, RngStream::new(seed, i)))
        .collect::<Result<Vec<_>, _>>()?)
}

/// `lambda gamma(0) < 1` from the closed-form saturation rate, when known.
pub fn require_stable<K: NetworkKernel>(kernel: &K) -> Result<(), EstimationError> {
    if let Some(g) = kernel.gamma0_reference() {
        let load = g / kernel.arrivals().mean();
        if load >= 1.0 {
            return Err(EstimationError::Unstable(load));
        }
    }
    Ok(())
}

/// Ratio `num / den` of two proportions with a 95% interval from the
/// delta method on the log scale, treating the counts as independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCi {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl RatioCi {
    pub fn from_counts(num: u64, num_n: u64, den: u64, den_n: u64) -> Option<RatioCi> {
        if num == 0 || den == 0 {
            return None;
        }
        let p1 = num as f64 / num_n as f64;
        let p2 = den as f64 / den_n as f64;
        let value = p1 / p2;
        let se = ((1.0 - p1) / num as f64 + (1.0 - p2) / den as f64).max(0.0).sqrt();
        Some(RatioCi { value, lo: value * (-1.96 * se).exp(), hi: value * (1.96 * se).exp() })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn intersects(&self, lo: f64, hi: f64) -> bool {
        self.lo <= hi && lo <= self.hi
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<(), EstimationError> {
    if grid.is_empty() {
        return Err(EstimationError::InvalidParameter("empty x grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(EstimationError::InvalidParameter("x grid must be finite and strictly increasing".into()));
    }
    Ok(())
}
