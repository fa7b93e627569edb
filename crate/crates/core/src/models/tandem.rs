use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{ArrivalSpec, HeavyTailDist};
use crate::kernel::{ModelError, NetworkKernel};
use crate::window::RealizedWindow;

/// Dependence between the two service times of a customer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    #[default]
    Independent,
    /// Both services are quantiles of one shared uniform.
    Comonotone,
}

/// Two FIFO single-server stations in series; `zeta_l = (sigma1_l, sigma2_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tandem {
    service1: HeavyTailDist,
    service2: HeavyTailDist,
    coupling: Coupling,
    arrivals: ArrivalSpec,
}

/// Lindley-form description of a tandem window.
#[derive(Debug, Clone, PartialEq)]
pub struct TandemPath {
    /// `W^(1)_m ..= W^(1)_n`.
    pub w1: Vec<f64>,
    /// `W^(2)_m ..= W^(2)_n`.
    pub w2: Vec<f64>,
    /// `tau^(2)_m .. tau^(2)_{n-1}`: interdeparture times of station 1.
    pub tau2: Vec<f64>,
    /// `Z_[m,n]`.
    pub z: f64,
}

impl Tandem {
    pub fn new(
        service1: HeavyTailDist,
        service2: HeavyTailDist,
        coupling: Coupling,
        arrivals: ArrivalSpec,
    ) -> Result<Self, ModelError> {
        arrivals.validate()?;
        Ok(Tandem { service1, service2, coupling, arrivals })
    }

    pub fn service1(&self) -> &HeavyTailDist {
        &self.service1
    }

    pub fn service2(&self) -> &HeavyTailDist {
        &self.service2
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }
}

/// Waiting times of both stations through the window.
pub fn tandem_path(window: &RealizedWindow<[f64; 2]>) -> TandemPath {
    let d = window.driving();
    let g = window.gaps();
    let n = g.len();
    let mut w1 = Vec::with_capacity(n + 1);
    let mut w2 = Vec::with_capacity(n + 1);
    let mut tau2 = Vec::with_capacity(n);
    w1.push(0.0f64);
    w2.push(0.0f64);
    for k in 0..n {
        let xi1 = w1[k] + d[k][0] - g[k];
        let t2 = -xi1.min(0.0) + d[k + 1][0];
        w1.push(xi1.max(0.0));
        w2.push((w2[k] + d[k][1] - t2).max(0.0));
        tau2.push(t2);
    }
    let z = w1[n] + d[n][0] + w2[n] + d[n][1];
    TandemPath { w1, w2, tau2, z }
}

/// Saturated dater of an `L`-block:
/// `max_j (sum_{i<=j} sigma1_i + sum_{i>=j} sigma2_i)`.
pub fn tandem_block_service(block: &[[f64; 2]]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let total2: f64 = block.iter().map(|s| s[1]).sum();
    let mut head1 = 0.0;
    let mut tail2 = total2;
    for s in block {
        head1 += s[0];
        best = best.max(head1 + tail2);
        tail2 -= s[1];
    }
    best
}

impl NetworkKernel for Tandem {
    type Driving = [f64; 2];

    fn name(&self) -> &'static str {
        "tandem"
    }

    fn arrivals(&self) -> &ArrivalSpec {
        &self.arrivals
    }

    fn with_arrivals(&self, arrivals: ArrivalSpec) -> Self {
        Tandem { arrivals, ..self.clone() }
    }

    fn has_aa(&self) -> bool {
        true
    }

    fn stations(&self) -> usize {
        2
    }

    fn sample_driving<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<[f64; 2], ModelError> {
        Ok(match self.coupling {
            Coupling::Independent => [self.service1.sample(rng), self.service2.sample(rng)],
            Coupling::Comonotone => {
                let u: f64 = rng.gen();
                [self.service1.sample_from_uniform(u), self.service2.sample_from_uniform(u)]
            }
        })
    }

    /// Departure recursion in coordinates relative to `T_n`.
    fn maximal_dater(&self, window: &RealizedWindow<[f64; 2]>) -> Result<f64, ModelError> {
        let rel = window.relative_epochs();
        let mut d1 = f64::NEG_INFINITY;
        let mut d2 = f64::NEG_INFINITY;
        for (t, s) in rel.iter().zip(window.driving()) {
            d1 = t.max(d1) + s[0];
            d2 = d1.max(d2) + s[1];
        }
        Ok(d2)
    }

    fn components(&self, driving: &[f64; 2]) -> Option<Vec<f64>> {
        Some(driving.to_vec())
    }

    fn jump_variables(&self, driving: &[f64; 2]) -> Vec<f64> {
        driving.to_vec()
    }

    fn gamma0_reference(&self) -> Option<f64> {
        Some(self.service1.mean().max(self.service2.mean()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sample_window;
    use crate::rng::RngStream;

    fn kernel() -> Tandem {
        Tandem::new(
            HeavyTailDist::pareto(2.5, 0.3).unwrap(),
            HeavyTailDist::pareto(2.5, 0.15).unwrap(),
            Coupling::Independent,
            ArrivalSpec::exponential(1.0).unwrap(),
        )
        .unwrap()
    }

    /// `sup_{p<=q} (sum_p^q sigma1 + sum_q^n sigma2 - (T_n - T_p))`, by brute force.
    fn supform(w: &RealizedWindow<[f64; 2]>) -> f64 {
        let rel = w.relative_epochs();
        let d = w.driving();
        let n = d.len();
        let mut best = f64::NEG_INFINITY;
        for p in 0..n {
            for q in p..n {
                let s1: f64 = d[p..=q].iter().map(|s| s[0]).sum();
                let s2: f64 = d[q..].iter().map(|s| s[1]).sum();
                best = best.max(s1 + s2 + rel[p]);
            }
        }
        best
    }

    #[test]
    fn two_customer_example() {
        let w = RealizedWindow::new(-1, -1.0, vec![1.0], vec![[2.0, 1.0], [1.0, 3.0]]).unwrap();
        assert_eq!(kernel().maximal_dater(&w).unwrap(), 5.0);
        let p = tandem_path(&w);
        assert_eq!(p.w1, vec![0.0, 1.0]);
        assert_eq!(p.tau2, vec![1.0]);
        assert_eq!(p.w2, vec![0.0, 0.0]);
        assert_eq!(p.z, 5.0);
        assert_eq!(supform(&w), 5.0);
    }

    #[test]
    fn block_service_example() {
        assert_eq!(tandem_block_service(&[[2.0, 1.0], [1.0, 3.0]]), 6.0);
        assert_eq!(kernel().saturated_dater(&[[2.0, 1.0], [1.0, 3.0]]).unwrap(), 6.0);
    }

    #[test]
    fn three_forms_agree_on_random_windows() {
        let k = kernel();
        for i in 0..300 {
            let len = 1 + (i % 40) as usize;
            let w = sample_window(&k, -(len as i64) + 1, len, RngStream::new(11, i)).unwrap();
            let z = k.maximal_dater(&w).unwrap();
            let tol = 1e-9 * z.abs().max(1.0);
            assert!((tandem_path(&w).z - z).abs() <= tol, "lindley form, window {i}");
            assert!((supform(&w) - z).abs() <= tol, "sup form, window {i}");
            let sat = k.saturated_dater(w.driving()).unwrap();
            assert!((tandem_block_service(w.driving()) - sat).abs() <= 1e-9 * sat.max(1.0));
        }
    }

    #[test]
    fn comonotone_services_are_ordered_quantiles() {
        let k = Tandem::new(
            HeavyTailDist::pareto(2.5, 1.0).unwrap(),
            HeavyTailDist::pareto(2.5, 1.0).unwrap(),
            Coupling::Comonotone,
            ArrivalSpec::deterministic(1.0).unwrap(),
        )
        .unwrap();
        let mut rng = RngStream::new(1, 1).driving();
        for _ in 0..100 {
            let s = k.sample_driving(&mut rng).unwrap();
            assert_eq!(s[0], s[1]);
        }
    }
}
