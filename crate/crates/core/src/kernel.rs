//! The network-kernel abstraction and window samplers.

use std::fmt::Debug;

use rand::Rng;
use thiserror::Error;

use crate::dist::{ArrivalSpec, DistError};
use crate::rng::RngStream;
use crate::window::RealizedWindow;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("window is empty")]
    EmptyWindow,
    #[error("window/driving shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid epochs: {0}")]
    InvalidEpochs(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("event cap of {0} exceeded")]
    EventCapExceeded(u64),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// A monotone-separable network: maps a realized window to the time of
/// its last activity.
///
/// Implementations compute the maximal dater `Z = X - T_n` from the gaps
/// alone, which makes homogeneity exact. A kernel may read absolute epochs
/// (the test fixture does) but then forfeits that guarantee.
pub trait NetworkKernel: Send + Sync {
    /// Per-customer driving variable `zeta_l`.
    type Driving: Clone + Debug + Send + Sync;

    fn name(&self) -> &'static str;

    fn arrivals(&self) -> &ArrivalSpec;

    /// Same network fed by a different arrival process.
    fn with_arrivals(&self, arrivals: ArrivalSpec) -> Self
    where
        Self: Sized;

    /// Whether the (AA) structure holds, so that `components` is defined.
    fn has_aa(&self) -> bool;

    fn stations(&self) -> usize;

    fn sample_driving<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self::Driving, ModelError>;

    /// `Z_[m,n] = X_[m,n] - T_n`.
    fn maximal_dater(&self, window: &RealizedWindow<Self::Driving>) -> Result<f64, ModelError>;

    /// `X_[m,n]`.
    fn last_activity(&self, window: &RealizedWindow<Self::Driving>) -> Result<f64, ModelError> {
        Ok(window.last_epoch() + self.maximal_dater(window)?)
    }

    /// `Z_[m,n](Q)` for the given driving variables.
    fn saturated_dater(&self, driving: &[Self::Driving]) -> Result<f64, ModelError> {
        let w = RealizedWindow::saturated(0, driving.to_vec())?;
        self.maximal_dater(&w)
    }

    /// Per-station workloads `Y^(j)` of one customer under (AA).
    fn components(&self, driving: &Self::Driving) -> Option<Vec<f64>>;

    /// The variables whose size the single-big-jump diagnostic inspects.
    fn jump_variables(&self, driving: &Self::Driving) -> Vec<f64>;

    /// Closed-form saturation rate `gamma(0)` when known.
    fn gamma0_reference(&self) -> Option<f64>;
}

/// Draws `N_[first, first+len-1]` with origin 0. Driving variables come
/// first (in customer order), then gaps, from separate generators.
pub fn sample_window<K: NetworkKernel>(
    kernel: &K,
    first: i64,
    len: usize,
    stream: RngStream,
) -> Result<RealizedWindow<K::Driving>, ModelError> {
    let mut drng = stream.driving();
    let mut arng = stream.arrivals();
    let driving = (0..len).map(|_| kernel.sample_driving(&mut drng)).collect::<Result<Vec<_>, _>>()?;
    let gaps = (1..len).map(|_| kernel.arrivals().sample_gap(&mut arng)).collect();
    RealizedWindow::new(first, 0.0, gaps, driving)
}

/// Driving variables `zeta_0, zeta_-1, ...` and gaps `tau_-1, tau_-2, ...`
/// drawn lazily going back in time, so that windows `[-n, 0]` are nested.
pub struct BackwardPath<'k, K: NetworkKernel> {
    kernel: &'k K,
    drng: rand_chacha::ChaCha8Rng,
    arng: rand_chacha::ChaCha8Rng,
    /// `driving[k]` belongs to customer `-k`.
    driving: Vec<K::Driving>,
    /// `gaps[k]` is `tau_{-k-1} = T_{-k} - T_{-k-1}`.
    gaps: Vec<f64>,
}

impl<'k, K: NetworkKernel> BackwardPath<'k, K> {
    pub fn new(kernel: &'k K, stream: RngStream) -> Self {
        BackwardPath {
            kernel,
            drng: stream.driving(),
            arng: stream.arrivals(),
            driving: Vec::new(),
            gaps: Vec::new(),
        }
    }

    /// Ensures customers `-n ..= 0` have been drawn.
    pub fn extend_to(&mut self, n: usize) -> Result<(), ModelError> {
        while self.driving.len() <= n {
            self.driving.push(self.kernel.sample_driving(&mut self.drng)?);
        }
        while self.gaps.len() < n {
            self.gaps.push(self.kernel.arrivals().sample_gap(&mut self.arng));
        }
        Ok(())
    }

    pub fn drawn(&self) -> usize {
        self.driving.len()
    }

    /// `N_[-n, 0]` with `T_0` approximately zero.
    pub fn window(&mut self, n: usize) -> Result<RealizedWindow<K::Driving>, ModelError> {
        self.extend_to(n)?;
        let driving: Vec<_> = self.driving[..=n].iter().rev().cloned().collect();
        let gaps: Vec<f64> = self.gaps[..n].iter().rev().copied().collect();
        let origin = -gaps.iter().sum::<f64>();
        RealizedWindow::new(-(n as i64), origin, gaps, driving)
    }
}
