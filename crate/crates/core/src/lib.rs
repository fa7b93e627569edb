pub mod asymptotics;
pub mod axioms;
pub mod bounds;
pub mod dist;
pub mod estimation;
pub mod kernel;
pub mod models;
pub mod quad;
pub mod rng;
pub mod window;
