use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EstimationError;
use crate::rng::RngStream;

pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    /// Tail index `alpha`, the reciprocal of the mean log-excess.
    pub index: f64,
    /// Bootstrap standard error of `index`.
    pub std_error: f64,
    pub k: usize,
    pub n: usize,
    /// The `(k+1)`-th largest sample, the threshold of the log-excesses.
    pub threshold: f64,
}

/// Hill index from the top `k` order statistics.
pub(crate) fn hill_point(buf: &mut [f64], k: usize) -> Result<(f64, f64), EstimationError> {
    let n = buf.len();
    let cut = n - k - 1;
    buf.select_nth_unstable_by(cut, f64::total_cmp);
    let threshold = buf[cut];
    if !(threshold > 0.0) {
        return Err(EstimationError::Degenerate(format!("threshold order statistic {threshold} is not positive")));
    }
    let mut top = buf[cut + 1..].to_vec();
    top.sort_by(f64::total_cmp);
    let h = top.iter().map(|v| (v / threshold).ln()).sum::<f64>() / k as f64;
    if !(h > 0.0) || !h.is_finite() {
        return Err(EstimationError::Degenerate("top order statistics are all equal".into()));
    }
    Ok((1.0 / h, threshold))
}

/// Hill estimator over the `k` largest of `samples`, with a 200-resample
/// bootstrap standard error seeded by `seed`.
pub fn hill_tail_index(samples: &[f64], k: usize, seed: u64) -> Result<HillEstimate, EstimationError> {
    let n = samples.len();
    if k < 10 {
        return Err(EstimationError::TooFewOrderStatistics(k));
    }
    if 2 * k >= n {
        return Err(EstimationError::KTooLarge { k, n });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(EstimationError::InvalidParameter("samples must be finite".into()));
    }
    let mut buf = samples.to_vec();
    let (index, threshold) = hill_point(&mut buf, k)?;

    let boots = (0..BOOTSTRAP_RESAMPLES as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = RngStream::new(seed, b).auxiliary();
            let mut rs: Vec<f64> = (0..n).map(|_| samples[rng.gen_range(0..n)]).collect();
            hill_point(&mut rs, k).map(|p| p.0).ok()
        })
        .collect::<Vec<_>>();
    let boots: Vec<f64> = boots.into_iter().flatten().collect();
    let std_error = if boots.len() < 2 {
        f64::NAN
    } else {
        let m = boots.iter().sum::<f64>() / boots.len() as f64;
        (boots.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (boots.len() - 1) as f64).sqrt()
    };
    Ok(HillEstimate { index, std_error, k, n, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::HeavyTailDist;

    fn pareto_samples(n: usize, seed: u64) -> Vec<f64> {
        let d = HeavyTailDist::pareto(2.5, 1.0).unwrap();
        let mut rng = RngStream::new(seed, 0).driving();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn consistent_on_exact_pareto() {
        let s = pareto_samples(100_000, 1);
        let h = hill_tail_index(&s, 1000, 2).unwrap();
        assert!((h.index - 2.5).abs() < 0.1, "{h:?}");
        // alpha / sqrt(k)
        assert!(h.std_error > 0.04 && h.std_error < 0.12, "{h:?}");
    }

    #[test]
    fn scale_invariant() {
        let s = pareto_samples(5000, 3);
        let a = hill_tail_index(&s, 100, 1).unwrap();
        let scaled: Vec<f64> = s.iter().map(|v| v * 8.0).collect();
        let b = hill_tail_index(&scaled, 100, 1).unwrap();
        assert_eq!(a.index, b.index);
        let odd: Vec<f64> = s.iter().map(|v| v * 3.7).collect();
        let c = hill_tail_index(&odd, 100, 1).unwrap();
        assert!((a.index - c.index).abs() < 1e-12 * a.index);
    }

    #[test]
    fn degenerate_and_bad_k() {
        assert!(matches!(hill_tail_index(&[2.0; 1000], 50, 0), Err(EstimationError::Degenerate(_))));
        let s = pareto_samples(100, 0);
        assert!(matches!(hill_tail_index(&s, 5, 0), Err(EstimationError::TooFewOrderStatistics(5))));
        assert!(matches!(hill_tail_index(&s, 50, 0), Err(EstimationError::KTooLarge { .. })));
    }
}
