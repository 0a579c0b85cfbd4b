//! Synthetic populations and typed social networks generated from discrete
//! Bayesian networks.
//!
//! The pipeline samples agents from an *agent network* ([`population`]),
//! links them type by type through *matching networks* ([`linker`]), closes
//! two-hop structures with probabilistic rules ([`transitive`]), and measures
//! the result ([`metrics`]). Scenarios bind all of it together ([`io`]).

pub mod bn;
pub mod export;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod linker;
pub mod metrics;
pub mod pipeline;
pub mod population;
pub mod rng;
pub mod transitive;

pub use bn::{Assignment, BayesianNetwork, BnError, Evidence, Variable};
pub use graph::{Provenance, SocialGraph, TypedLink};
pub use io::{load_scenario, parse_bn, parse_scenario, serialize_bn, Scenario, ScenarioConfig};
pub use pipeline::{generate, sweep, Generated, SweepConfig, SweepRow};
pub use population::{generate_population, Population};
