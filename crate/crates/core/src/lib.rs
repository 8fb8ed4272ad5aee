//! Simulation and statistical verification for the random graph d-process.
//!
//! The d-process on `n` vertices adds uniformly random edges between
//! vertices of degree below `d` until no such edge can be added. This crate
//! provides:
//!
//! * [`graph`]: a direct simulator of the process;
//! * [`bins`]: the equivalent balls-in-bins process, in a faithful and an
//!   accelerated mode;
//! * [`analytics`]: closed-form predictions for degree counts and tails;
//! * [`oracle`]: exact terminal and degree-count laws for tiny instances;
//! * [`stats`]: estimators and comparators used to check predictions;
//! * [`harness`]: reproducible multi-trial experiments with JSONL/CSV output;
//! * [`cli`]: the `dproc` command line.

pub mod analytics;
pub mod bins;
pub mod cli;
pub mod error;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod record;
pub mod rng;
pub mod stats;

pub use analytics::AnalyticModel;
pub use bins::{BallEvent, BinProcess};
pub use error::{Error, Result};
pub use graph::{CappedGraph, EdgeClassCounts, GraphProcess, SaturationOutcome, StepOutcome};
pub use record::{CheckpointKind, CheckpointRow, Checkpoints, Sampler, TrajectoryRecord};
