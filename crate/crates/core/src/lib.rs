//! Opinion dynamics among interacting continuous-time Markov agents.
//!
//! Each agent holds one of `M` opinions and switches according to its own
//! rate matrix, plus an influence term proportional to the fraction of its
//! neighbours holding the target opinion. The crate offers the exact joint
//! chain over all `M^N` configurations (`master`), the count chain for
//! identical two-opinion agents on a complete graph (`lumped`), the marginal
//! and pair-joint moment equations (`marginal`), exact simulation for large
//! networks (`ssa`, `stats`), and a config-driven experiment runner
//! (`experiment`).

pub mod error;
pub mod experiment;
pub mod graph;
mod linalg;
pub mod lumped;
pub mod marginal;
pub mod master;
pub mod model;
pub mod ode;
mod reach;
pub mod rng;
pub mod ssa;
pub mod stats;
pub mod topology;
pub mod uniformization;

pub use error::{Error, Result};
pub use graph::Graph;
pub use lumped::{BirthDeathChain, CountDistribution, InitialCounts};
pub use master::{MasterGenerator, MasterSpace};
pub use model::{InfluenceIntensities, IntensitySchedule, NetworkModel, ProbabilityVector, RateMatrix};
pub use ssa::{Ensemble, InitialOpinions, SamplePath};
pub use topology::TopologySpec;
