//! Station cover and hitting set laboratory.
//!
//! * [`model`]: instances, components, degree statistics, text format.
//! * [`reduce`]: station and connection dominance rules and the core.
//! * [`solve`]: exact solvers (enumeration oracle, branch and bound).
//! * [`graphview`]: station graph, 2-core, constructions and the 3-SAT encoding.
//! * [`metrics`]: degree CCDF, power-law fit, bipartite clustering, table rows.
//! * [`gen`]: geometric random instance generator.
//! * [`gtfs`]: GTFS feed ingestion.
//! * [`harness`]: sweeps, result files and the command line.

pub mod gen;
pub mod graphview;
pub mod gtfs;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod reduce;
pub mod solve;

pub use model::{read_hsd, write_hsd, DegreeStats, Instance, ModelError, StationId};
pub use reduce::{reduce_to_core, ReductionReport};
