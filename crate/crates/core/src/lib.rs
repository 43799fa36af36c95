//! Exact computation of digital topological complexity invariants.

pub mod bundle;
pub mod catalog;
pub mod csp;
pub mod docs;
pub mod error;
pub mod genus;
pub mod homotopy;
pub mod lattice;
pub mod maps;
pub mod path_space;
pub mod relations;
pub mod replay;
pub mod report;
pub mod search;

pub use error::{Error, Result};
pub use homotopy::{HomotopyBudget, HomotopyTrace, Outcome};
pub use lattice::{AdjacencySpec, DigitalImage, Point};
pub use maps::DigitalMap;
pub use path_space::{DigitalPath, EndpointFibration, PathAdjacency, PathOptions, PathSpace};
pub use genus::{GenusOptions, GenusResult, SweepOptions, Witness};
