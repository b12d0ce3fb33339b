//! Bounded-memory stream analytics: weighted reservoirs, approximate OLAP
//! densities, dynamic community detection on edge streams, random graph
//! models with planted communities, and stream correlation.

pub mod error;
pub mod experiment;
pub mod exec;
pub mod genmodels;
pub mod graphstream;
pub mod ingest;
pub mod integrate;
pub mod olap;
pub mod reservoir;
pub mod rng;
pub mod timefmt;

pub use error::{Error, Result};
pub use exec::Executor;
pub use graphstream::{detect, CommunitySnapshot, Component, ComponentSet, DcConfig, Edge, EdgeStreamState, StreamOutput};
pub use reservoir::{Reservoir, WeightedItem, WindowConfig, WindowMode, WindowSampler};
pub use rng::RngSeed;
