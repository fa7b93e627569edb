use rand::Rng;

use crate::dist::{ArrivalSpec, HeavyTailDist};
use crate::kernel::{ModelError, NetworkKernel};
use crate::models::single::lindley_dater;
use crate::window::RealizedWindow;

/// Deliberately broken single-server kernel whose dater drifts with the
/// absolute time of the last arrival. It violates homogeneity and exists
/// to exercise the axiom harness.
#[derive(Debug, Clone, PartialEq)]
pub struct NonHomogeneousFixture {
    service: HeavyTailDist,
    arrivals: ArrivalSpec,
}

impl NonHomogeneousFixture {
    pub fn new(service: HeavyTailDist, arrivals: ArrivalSpec) -> Result<Self, ModelError> {
        arrivals.validate()?;
        Ok(NonHomogeneousFixture { service, arrivals })
    }
}

impl NetworkKernel for NonHomogeneousFixture {
    type Driving = f64;

    fn name(&self) -> &'static str {
        "fixture_non_homogeneous"
    }

    fn arrivals(&self) -> &ArrivalSpec {
        &self.arrivals
    }

    fn with_arrivals(&self, arrivals: ArrivalSpec) -> Self {
        NonHomogeneousFixture { arrivals, ..self.clone() }
    }

    fn has_aa(&self) -> bool {
        false
    }

    fn stations(&self) -> usize {
        1
    }

    fn sample_driving<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, ModelError> {
        Ok(self.service.sample(rng))
    }

    fn maximal_dater(&self, window: &RealizedWindow<f64>) -> Result<f64, ModelError> {
        let drift = 1e-3 * window.last_epoch().abs();
        Ok(lindley_dater(window.driving(), window.gaps()) + drift)
    }

    fn components(&self, _: &f64) -> Option<Vec<f64>> {
        None
    }

    fn jump_variables(&self, driving: &f64) -> Vec<f64> {
        vec![*driving]
    }

    fn gamma0_reference(&self) -> Option<f64> {
        None
    }
}
