use rand::Rng;

use crate::dist::{ArrivalSpec, HeavyTailDist};
use crate::kernel::{ModelError, NetworkKernel};
use crate::window::RealizedWindow;

/// `W_{k+1} = (W_k + sigma_k - tau_k)^+` from `W_0 = 0`; returns
/// `W_0 ..= W_len`.
pub fn lindley_path(sigma: &[f64], tau: &[f64]) -> Result<Vec<f64>, ModelError> {
    if sigma.len() != tau.len() {
        return Err(ModelError::ShapeMismatch(format!(
            "{} services and {} interarrival times",
            sigma.len(),
            tau.len()
        )));
    }
    let mut w = Vec::with_capacity(sigma.len() + 1);
    let mut cur = 0.0f64;
    w.push(cur);
    for (s, t) in sigma.iter().zip(tau) {
        cur = (cur + s - t).max(0.0);
        w.push(cur);
    }
    Ok(w)
}

/// `W_n + sigma_n` over a window with the given gaps.
pub(crate) fn lindley_dater(sigma: &[f64], gaps: &[f64]) -> f64 {
    let n = gaps.len();
    let mut w = 0.0f64;
    for k in 0..n {
        w = (w + sigma[k] - gaps[k]).max(0.0);
    }
    w + sigma[n]
}

/// FIFO single-server queue; `zeta_l = sigma_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleServer {
    service: HeavyTailDist,
    arrivals: ArrivalSpec,
}

impl SingleServer {
    pub fn new(service: HeavyTailDist, arrivals: ArrivalSpec) -> Result<Self, ModelError> {
        arrivals.validate()?;
        Ok(SingleServer { service, arrivals })
    }

    pub fn service(&self) -> &HeavyTailDist {
        &self.service
    }
}

impl NetworkKernel for SingleServer {
    type Driving = f64;

    fn name(&self) -> &'static str {
        "single_server"
    }

    fn arrivals(&self) -> &ArrivalSpec {
        &self.arrivals
    }

    fn with_arrivals(&self, arrivals: ArrivalSpec) -> Self {
        SingleServer { arrivals, ..self.clone() }
    }

    fn has_aa(&self) -> bool {
        true
    }

    fn stations(&self) -> usize {
        1
    }

    fn sample_driving<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, ModelError> {
        Ok(self.service.sample(rng))
    }

    fn maximal_dater(&self, window: &RealizedWindow<f64>) -> Result<f64, ModelError> {
        Ok(lindley_dater(window.driving(), window.gaps()))
    }

    fn saturated_dater(&self, driving: &[f64]) -> Result<f64, ModelError> {
        Ok(driving.iter().sum())
    }

    fn components(&self, driving: &f64) -> Option<Vec<f64>> {
        Some(vec![*driving])
    }

    fn jump_variables(&self, driving: &f64) -> Vec<f64> {
        vec![*driving]
    }

    fn gamma0_reference(&self) -> Option<f64> {
        Some(self.service.mean())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel() -> SingleServer {
        SingleServer::new(HeavyTailDist::exponential(1.0).unwrap(), ArrivalSpec::deterministic(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn lindley_examples() {
        assert_eq!(lindley_path(&[3.0, 1.0], &[1.0, 1.0]).unwrap(), vec![0.0, 2.0, 2.0]);
        assert!(lindley_path(&[0.0; 3], &[1.0; 3]).unwrap().iter().all(|w| *w == 0.0));
        assert!(lindley_path(&[0.7; 5], &[0.7; 5]).unwrap().iter().all(|w| *w == 0.0));
        assert!(lindley_path(&[1.0], &[]).is_err());
    }

    #[test]
    fn dater_two_customers() {
        // sigma = (3, 1), tau_-1 = 1: Z = max(1, 3 + 1 - 1) = 3
        let w = RealizedWindow::new(-1, -1.0, vec![1.0], vec![3.0, 1.0]).unwrap();
        assert_eq!(kernel().maximal_dater(&w).unwrap(), 3.0);
        assert_eq!(kernel().last_activity(&w).unwrap(), 3.0);
    }

    #[test]
    fn dater_matches_lindley_path() {
        let sigma = [0.5, 2.0, 0.1, 0.9];
        let tau = [1.0, 0.3, 0.4];
        let w = RealizedWindow::new(0, 0.0, tau.to_vec(), sigma.to_vec()).unwrap();
        let path = lindley_path(&sigma[..3], &tau).unwrap();
        assert_eq!(kernel().maximal_dater(&w).unwrap(), path[3] + sigma[3]);
    }
}
