//! Concrete network kernels and their JSON description.

pub mod fixture;
pub mod jackson;
pub mod multiserver;
pub mod single;
pub mod tandem;

use serde::{Deserialize, Serialize};

use crate::dist::{ArrivalSpec, HeavyTailDist};
use crate::kernel::ModelError;

pub use fixture::NonHomogeneousFixture;
pub use jackson::{Jackson, JacksonCustomer};
pub use multiserver::MultiServer;
pub use single::SingleServer;
pub use tandem::{Coupling, Tandem};

fn default_event_cap() -> u64 {
    jackson::DEFAULT_EVENT_CAP
}

/// Model section of an experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    SingleServer {
        service: HeavyTailDist,
        arrivals: ArrivalSpec,
    },
    Tandem {
        service1: HeavyTailDist,
        service2: HeavyTailDist,
        #[serde(default)]
        coupling: Coupling,
        arrivals: ArrivalSpec,
    },
    Multiserver {
        servers: usize,
        service: HeavyTailDist,
        arrivals: ArrivalSpec,
    },
    Jackson {
        services: Vec<HeavyTailDist>,
        routing: Vec<Vec<f64>>,
        entry: Vec<f64>,
        arrivals: ArrivalSpec,
        #[serde(default = "default_event_cap")]
        event_cap: u64,
    },
    /// Test fixture that violates homogeneity.
    FixtureNonHomogeneous {
        service: HeavyTailDist,
        arrivals: ArrivalSpec,
    },
}

/// A built kernel of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyKernel {
    Single(SingleServer),
    Tandem(Tandem),
    Multi(MultiServer),
    Jackson(Jackson),
    Fixture(NonHomogeneousFixture),
}

impl ModelSpec {
    pub fn build(&self) -> Result<AnyKernel, ModelError> {
        Ok(match self.clone() {
            ModelSpec::SingleServer { service, arrivals } => AnyKernel::Single(SingleServer::new(service, arrivals)?),
            ModelSpec::Tandem { service1, service2, coupling, arrivals } => {
                AnyKernel::Tandem(Tandem::new(service1, service2, coupling, arrivals)?)
            }
            ModelSpec::Multiserver { servers, service, arrivals } => {
                AnyKernel::Multi(MultiServer::new(servers, service, arrivals)?)
            }
            ModelSpec::Jackson { services, routing, entry, arrivals, event_cap } => {
                AnyKernel::Jackson(Jackson::new(services, routing, entry, arrivals, event_cap)?)
            }
            ModelSpec::FixtureNonHomogeneous { service, arrivals } => {
                AnyKernel::Fixture(NonHomogeneousFixture::new(service, arrivals)?)
            }
        })
    }

    pub fn arrivals(&self) -> &ArrivalSpec {
        match self {
            ModelSpec::SingleServer { arrivals, .. }
            | ModelSpec::Tandem { arrivals, .. }
            | ModelSpec::Multiserver { arrivals, .. }
            | ModelSpec::Jackson { arrivals, .. }
            | ModelSpec::FixtureNonHomogeneous { arrivals, .. } => arrivals,
        }
    }
}

/// Runs `$body` with `$k` bound to the concrete kernel inside `$any`.
#[macro_export]
macro_rules! with_kernel {
    ($any:expr, $k:ident => $body:expr) => {
        match $any {
            $crate::models::AnyKernel::Single($k) => $body,
            $crate::models::AnyKernel::Tandem($k) => $body,
            $crate::models::AnyKernel::Multi($k) => $body,
            $crate::models::AnyKernel::Jackson($k) => $body,
            $crate::models::AnyKernel::Fixture($k) => $body,
        }
    };
}
