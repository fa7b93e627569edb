use rand::Rng;

use crate::dist::{ArrivalSpec, HeavyTailDist};
use crate::kernel::{ModelError, NetworkKernel};
use crate::window::RealizedWindow;

/// FIFO `m`-server queue driven by the Kiefer-Wolfowitz workload vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiServer {
    servers: usize,
    service: HeavyTailDist,
    arrivals: ArrivalSpec,
}

/// `R (W + e_1 sigma - i tau)^+` for a workload vector sorted in
/// nondecreasing order; the result is sorted again.
pub fn kw_step(w: &mut [f64], sigma: f64, tau: f64) {
    if w.is_empty() {
        return;
    }
    let head = (w[0] + sigma - tau).max(0.0);
    for v in w.iter_mut().skip(1) {
        *v = (*v - tau).max(0.0);
    }
    // Rows 1.. stay sorted; slide the new head into place.
    let mut k = 0;
    while k + 1 < w.len() && w[k + 1] < head {
        w[k] = w[k + 1];
        k += 1;
    }
    w[k] = head;
}

/// Last-activity dater from the workload found by the last customer.
pub fn dater_from_workload(w: &[f64], sigma: f64) -> f64 {
    match (w.first(), w.last()) {
        (Some(lo), Some(hi)) => (lo + sigma).max(*hi),
        _ => sigma,
    }
}

impl MultiServer {
    pub fn new(servers: usize, service: HeavyTailDist, arrivals: ArrivalSpec) -> Result<Self, ModelError> {
        if servers == 0 {
            return Err(ModelError::InvalidModel("multiserver needs at least one server".into()));
        }
        arrivals.validate()?;
        Ok(MultiServer { servers, service, arrivals })
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn service(&self) -> &HeavyTailDist {
        &self.service
    }

    /// Workload vectors `W_m ..= W_n` through the window.
    pub fn workload_path(&self, window: &RealizedWindow<f64>) -> Vec<Vec<f64>> {
        let mut w = vec![0.0; self.servers];
        let mut out = vec![w.clone()];
        for (s, t) in window.driving().iter().zip(window.gaps()) {
            kw_step(&mut w, *s, *t);
            out.push(w.clone());
        }
        out
    }
}

impl NetworkKernel for MultiServer {
    type Driving = f64;

    fn name(&self) -> &'static str {
        "multiserver"
    }

    fn arrivals(&self) -> &ArrivalSpec {
        &self.arrivals
    }

    fn with_arrivals(&self, arrivals: ArrivalSpec) -> Self {
        MultiServer { arrivals, ..self.clone() }
    }

    fn has_aa(&self) -> bool {
        self.servers == 1
    }

    fn stations(&self) -> usize {
        1
    }

    fn sample_driving<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, ModelError> {
        Ok(self.service.sample(rng))
    }

    fn maximal_dater(&self, window: &RealizedWindow<f64>) -> Result<f64, ModelError> {
        let mut w = vec![0.0; self.servers];
        for (s, t) in window.driving().iter().zip(window.gaps()) {
            kw_step(&mut w, *s, *t);
        }
        let last = *window.driving().last().ok_or(ModelError::EmptyWindow)?;
        Ok(dater_from_workload(&w, last))
    }

    fn components(&self, driving: &f64) -> Option<Vec<f64>> {
        self.has_aa().then(|| vec![*driving])
    }

    fn jump_variables(&self, driving: &f64) -> Vec<f64> {
        vec![*driving]
    }

    fn gamma0_reference(&self) -> Option<f64> {
        Some(self.service.mean() / self.servers as f64)
    }
}
