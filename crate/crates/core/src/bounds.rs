//! Saturation rate, stability, and the pathwise sandwich between the
//! fork-join lower bound and the `L`-block upper bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::tolerance;
use crate::kernel::{sample_window, ModelError, NetworkKernel};
use crate::models::single::lindley_dater;
use crate::models::tandem::tandem_block_service;
use crate::rng::RngStream;
use crate::window::RealizedWindow;

pub const DEFAULT_L_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("kernel {0} does not have the (AA) structure")]
    NotAa(&'static str),
    #[error("window of {len} customers is not a whole number of blocks of {l}")]
    Misaligned { len: usize, l: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no block length L <= {cap} satisfies E Z_[-L,-1](Q) < (1 - delta) L a; load too close to critical")]
    LNotFound { cap: usize },
}

fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gamma0Estimate {
    pub n: usize,
    pub replications: usize,
    /// Monte Carlo mean of `Z_[-n,-1](Q) / n`.
    pub estimate: f64,
    /// Normal-approximation 95% half-width.
    pub half_width: f64,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

fn saturated_sample<K: NetworkKernel>(kernel: &K, n: usize, stream: RngStream) -> Result<f64, ModelError> {
    let mut rng = stream.driving();
    let driving = (0..n).map(|_| kernel.sample_driving(&mut rng)).collect::<Result<Vec<_>, _>>()?;
    kernel.saturated_dater(&driving)
}

fn saturated_samples<K: NetworkKernel>(
    kernel: &K,
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<Vec<f64>, ModelError> {
    (0..replications as u64)
        .into_par_iter()
        .map(|i| saturated_sample(kernel, n, RngStream::new(seed, i)))
        .collect()
}

/// Estimates `gamma(0) = lim Z_[-n,-1](Q) / n`.
pub fn estimate_gamma0<K: NetworkKernel>(
    kernel: &K,
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<Gamma0Estimate, BoundsError> {
    if n == 0 || replications == 0 {
        return Err(BoundsError::InvalidParameter("n and replications must be positive".into()));
    }
    let rates: Vec<f64> = saturated_samples(kernel, n, replications, seed)?.iter().map(|z| z / n as f64).collect();
    let (estimate, half_width) = mean_and_half_width(&rates);
    Ok(Gamma0Estimate { n, replications, estimate, half_width, reference: kernel.gamma0_reference() })
}

/// `Stable` when the whole interval for `lambda gamma(0)` lies below 1,
/// `Unstable` when it lies above.
pub fn stability_verdict(lambda: f64, est: &Gamma0Estimate) -> Verdict {
    let lo = lambda * (est.estimate - est.half_width);
    let hi = lambda * (est.estimate + est.half_width);
    if hi < 1.0 {
        Verdict::Stable
    } else if lo > 1.0 {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LSelection {
    pub l: usize,
    pub mean: f64,
    pub half_width: f64,
    pub target: f64,
}

/// Smallest `L` in the doubling scan `1, 2, 4, ...` with
/// `mean + 3 half-widths <= (1 - delta) L a` for `Z_[-L,-1](Q)`.
pub fn select_l<K: NetworkKernel>(
    kernel: &K,
    delta: f64,
    replications: usize,
    seed: u64,
    cap: usize,
) -> Result<LSelection, BoundsError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundsError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if replications < 2 {
        return Err(BoundsError::InvalidParameter("need at least two replications".into()));
    }
    let a = kernel.arrivals().mean();
    // E Z_[-L,-1](Q) / L decreases to gamma(0), so the scan cannot succeed
    // once gamma(0) itself is over the target rate.
    if let Some(g) = kernel.gamma0_reference() {
        if g > (1.0 - delta) * a {
            return Err(BoundsError::LNotFound { cap });
        }
    }
    let mut l = 1usize;
    while l <= cap {
        let z = saturated_samples(kernel, l, replications, RngStream::derive(seed, l as u64))?;
        let (mean, half_width) = mean_and_half_width(&z);
        let target = (1.0 - delta) * l as f64 * a;
        if mean + 3.0 * half_width <= target {
            return Ok(LSelection { l, mean, half_width, target });
        }
        l *= 2;
    }
    Err(BoundsError::LNotFound { cap })
}

/// The batched queue built from `L`-blocks of a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPath {
    pub l: usize,
    /// Saturated daters of the blocks, oldest first.
    pub s_hat: Vec<f64>,
    /// `T` at the end of block `k+1` minus `T` at the end of block `k`.
    pub tau_hat: Vec<f64>,
    /// Upper bound `R-hat` on `Z` of the whole window.
    pub r_hat: f64,
}

fn block_structure<D: Clone>(window: &RealizedWindow<D>, l: usize) -> Result<(usize, Vec<f64>), BoundsError> {
    let len = window.len();
    if l == 0 || len % l != 0 {
        return Err(BoundsError::Misaligned { len, l });
    }
    let k = len / l;
    let rel = window.relative_epochs();
    let tau_hat = (1..k).map(|b| rel[(b + 1) * l - 1] - rel[b * l - 1]).collect();
    Ok((k, tau_hat))
}

fn finish(l: usize, s_hat: Vec<f64>, tau_hat: Vec<f64>) -> BoundPath {
    let r_hat = lindley_dater(&s_hat, &tau_hat);
    BoundPath { l, s_hat, tau_hat, r_hat }
}

/// `R-hat` for a window whose length is a multiple of `l`; blocks are
/// aligned with the last customer.
pub fn upper_bound_path<K: NetworkKernel>(
    kernel: &K,
    window: &RealizedWindow<K::Driving>,
    l: usize,
) -> Result<BoundPath, BoundsError> {
    let (k, tau_hat) = block_structure(window, l)?;
    let d = window.driving();
    let s_hat = (0..k).map(|b| kernel.saturated_dater(&d[b * l..(b + 1) * l])).collect::<Result<Vec<_>, _>>()?;
    Ok(finish(l, s_hat, tau_hat))
}

/// Same as [`upper_bound_path`] with the closed-form tandem block service.
pub fn tandem_upper_bound_path(window: &RealizedWindow<[f64; 2]>, l: usize) -> Result<BoundPath, BoundsError> {
    let (k, tau_hat) = block_structure(window, l)?;
    let d = window.driving();
    let s_hat = (0..k).map(|b| tandem_block_service(&d[b * l..(b + 1) * l])).collect();
    Ok(finish(l, s_hat, tau_hat))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// `R^(j)` per station.
    pub per_station: Vec<f64>,
    /// `max_j R^(j)`.
    pub r_lower: f64,
}

/// Fork-join lower bound `max_j sup_k (sum_k^n Y^(j) - (T_n - T_k))`.
pub fn lower_bound_path<K: NetworkKernel>(
    kernel: &K,
    window: &RealizedWindow<K::Driving>,
) -> Result<LowerBound, BoundsError> {
    let comps = window
        .driving()
        .iter()
        .map(|d| kernel.components(d))
        .collect::<Option<Vec<_>>>()
        .ok_or(BoundsError::NotAa(kernel.name()))?;
    let r = kernel.stations();
    let per_station: Vec<f64> = (0..r)
        .map(|j| {
            let y: Vec<f64> = comps.iter().map(|c| c[j]).collect();
            lindley_dater(&y, window.gaps())
        })
        .collect();
    let r_lower = per_station.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(LowerBound { per_station, r_lower })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub z: f64,
    pub r_lower: Option<f64>,
    pub r_hat: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// Per-block `max_j sum Y^(j) <= s-hat <= sum_j sum Y^(j)`.
    pub block_bounds_ok: bool,
    /// Per-block `s-hat <= sum_i Z_i`.
    pub block_subadditive_ok: bool,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok && self.block_bounds_ok && self.block_subadditive_ok
    }
}

/// Checks `R-lower <= Z <= R-hat` on one window, plus the per-block
/// inequalities. The lower side needs (AA) and is skipped without it.
pub fn sandwich_check<K: NetworkKernel>(
    kernel: &K,
    window: &RealizedWindow<K::Driving>,
    l: usize,
) -> Result<SandwichReport, BoundsError> {
    let z = kernel.maximal_dater(window)?;
    let up = upper_bound_path(kernel, window, l)?;
    let upper_ok = z <= up.r_hat + tolerance(&[z, up.r_hat]);
    let (r_lower, lower_ok) = if kernel.has_aa() {
        let lb = lower_bound_path(kernel, window)?;
        (Some(lb.r_lower), lb.r_lower <= z + tolerance(&[z, lb.r_lower]))
    } else {
        (None, true)
    };

    let d = window.driving();
    let mut block_bounds_ok = true;
    let mut block_subadditive_ok = true;
    for (b, s) in up.s_hat.iter().enumerate() {
        let block = &d[b * l..(b + 1) * l];
        if kernel.has_aa() {
            let mut per = vec![0.0; kernel.stations()];
            for c in block {
                let y = kernel.components(c).ok_or(BoundsError::NotAa(kernel.name()))?;
                for (p, v) in per.iter_mut().zip(y) {
                    *p += v;
                }
            }
            let lo = per.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let hi: f64 = per.iter().sum();
            block_bounds_ok &= lo <= s + tolerance(&[lo, *s]) && *s <= hi + tolerance(&[hi, *s]);
        }
        let mut singles = 0.0;
        for c in block {
            singles += kernel.saturated_dater(std::slice::from_ref(c))?;
        }
        block_subadditive_ok &= *s <= singles + tolerance(&[singles, *s]);
    }
    Ok(SandwichReport { z, r_lower, r_hat: up.r_hat, lower_ok, upper_ok, block_bounds_ok, block_subadditive_ok })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichSuite {
    pub kernel: String,
    pub l: usize,
    pub realizations: u64,
    pub lower_violations: u64,
    pub upper_violations: u64,
    pub block_bound_violations: u64,
    pub block_subadditive_violations: u64,
    /// Mean of `R-hat - Z` and of `Z - R-lower`.
    pub mean_upper_gap: f64,
    pub mean_lower_gap: Option<f64>,
}

impl SandwichSuite {
    pub fn passed(&self) -> bool {
        self.lower_violations == 0
            && self.upper_violations == 0
            && self.block_bound_violations == 0
            && self.block_subadditive_violations == 0
    }
}

/// Sandwich checks on `realizations` random windows of `blocks * l`
/// customers ending at customer 0.
pub fn run_sandwich_suite<K: NetworkKernel>(
    kernel: &K,
    l: usize,
    blocks: usize,
    realizations: u64,
    seed: u64,
) -> Result<SandwichSuite, BoundsError> {
    if l == 0 || blocks == 0 {
        return Err(BoundsError::InvalidParameter("l and blocks must be positive".into()));
    }
    let len = l * blocks;
    let reports = (0..realizations)
        .into_par_iter()
        .map(|i| {
            let w = sample_window(kernel, -(len as i64) + 1, len, RngStream::new(seed, i))?;
            sandwich_check(kernel, &w, l)
        })
        .collect::<Result<Vec<_>, BoundsError>>()?;
    let count = |f: &dyn Fn(&SandwichReport) -> bool| reports.iter().filter(|r| !f(r)).count() as u64;
    let n = reports.len().max(1) as f64;
    let mean_upper_gap = reports.iter().map(|r| r.r_hat - r.z).sum::<f64>() / n;
    let mean_lower_gap = kernel
        .has_aa()
        .then(|| reports.iter().map(|r| r.z - r.r_lower.unwrap_or(r.z)).sum::<f64>() / n);
    Ok(SandwichSuite {
        kernel: kernel.name().to_string(),
        l,
        realizations,
        lower_violations: count(&|r| r.lower_ok),
        upper_violations: count(&|r| r.upper_ok),
        block_bound_violations: count(&|r| r.block_bounds_ok),
        block_subadditive_violations: count(&|r| r.block_subadditive_ok),
        mean_upper_gap,
        mean_lower_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{ArrivalSpec, HeavyTailDist};
    use crate::models::{Coupling, MultiServer, SingleServer, Tandem};

    fn tandem(arr: ArrivalSpec) -> Tandem {
        Tandem::new(
            HeavyTailDist::pareto(2.5, 0.3).unwrap(),
            HeavyTailDist::pareto(2.5, 0.15).unwrap(),
            Coupling::Independent,
            arr,
        )
        .unwrap()
    }

    #[test]
    fn sandwich_example_l1() {
        let k = tandem(ArrivalSpec::deterministic(1.0).unwrap());
        let w = RealizedWindow::new(-1, -1.0, vec![1.0], vec![[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let up = upper_bound_path(&k, &w, 1).unwrap();
        assert_eq!(up.s_hat, vec![3.0, 4.0]);
        assert_eq!(up.tau_hat, vec![1.0]);
        assert_eq!(up.r_hat, 6.0);
        let lo = lower_bound_path(&k, &w).unwrap();
        // R1 = max(1, 2 + 1 - 1) = 2, R2 = max(3, 1 + 3 - 1) = 3
        assert_eq!(lo.per_station, vec![2.0, 3.0]);
        let rep = sandwich_check(&k, &w, 1).unwrap();
        assert_eq!(rep.z, 5.0);
        assert!(rep.passed());
    }

    #[test]
    fn misaligned_window_is_rejected() {
        let k = tandem(ArrivalSpec::deterministic(1.0).unwrap());
        let w = RealizedWindow::new(0, 0.0, vec![1.0, 1.0], vec![[1.0, 1.0]; 3]).unwrap();
        assert!(matches!(upper_bound_path(&k, &w, 2), Err(BoundsError::Misaligned { .. })));
    }

    #[test]
    fn lower_bound_needs_aa() {
        let k = MultiServer::new(2, HeavyTailDist::exponential(1.0).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
            .unwrap();
        let w = RealizedWindow::new(0, 0.0, vec![1.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(lower_bound_path(&k, &w), Err(BoundsError::NotAa(_))));
        assert!(sandwich_check(&k, &w, 1).unwrap().passed());
    }

    #[test]
    fn tandem_fast_path_matches_generic() {
        let k = tandem(ArrivalSpec::exponential(1.0).unwrap());
        for i in 0..200 {
            let w = sample_window(&k, -31, 32, RngStream::new(4, i)).unwrap();
            for l in [1, 2, 4, 8] {
                let g = upper_bound_path(&k, &w, l).unwrap();
                let f = tandem_upper_bound_path(&w, l).unwrap();
                assert!((g.r_hat - f.r_hat).abs() <= 1e-9 * g.r_hat.max(1.0));
            }
        }
    }

    #[test]
    fn gamma0_single_server_deterministic() {
        let k = SingleServer::new(HeavyTailDist::deterministic(0.5).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
            .unwrap();
        let e = estimate_gamma0(&k, 100, 10, 1).unwrap();
        assert_eq!(e.estimate, 0.5);
        assert_eq!(stability_verdict(1.0, &e), Verdict::Stable);
        let t = tandem(ArrivalSpec::deterministic(1.0).unwrap());
        assert!((t.gamma0_reference().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn verdict_cases() {
        let e = |g, hw| Gamma0Estimate { n: 1, replications: 2, estimate: g, half_width: hw, reference: None };
        assert_eq!(stability_verdict(1.0, &e(1.0, 0.05)), Verdict::Inconclusive);
        assert_eq!(stability_verdict(1.0, &e(1.2, 0.05)), Verdict::Unstable);
        assert_eq!(stability_verdict(0.5, &e(1.2, 0.05)), Verdict::Stable);
    }

    #[test]
    fn select_l_cases() {
        let k = SingleServer::new(HeavyTailDist::deterministic(0.5).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
            .unwrap();
        assert_eq!(select_l(&k, 0.1, 10, 1, DEFAULT_L_CAP).unwrap().l, 1);
        let hot = SingleServer::new(HeavyTailDist::deterministic(0.99).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
            .unwrap();
        assert!(matches!(select_l(&hot, 0.5, 10, 1, DEFAULT_L_CAP), Err(BoundsError::LNotFound { .. })));
        assert!(select_l(&k, 1.5, 10, 1, DEFAULT_L_CAP).is_err());
    }

    #[test]
    fn sandwich_suite_small() {
        let k = tandem(ArrivalSpec::exponential(1.0).unwrap());
        let s = run_sandwich_suite(&k, 4, 8, 300, 2).unwrap();
        assert!(s.passed(), "{s:?}");
        assert!(s.mean_upper_gap >= 0.0 && s.mean_lower_gap.unwrap() >= 0.0);
    }
}
