//! Discretized fractal geometry at a fixed dyadic scale.
//!
//! The crate works with finite δ-separated planar sets and families of
//! δ-tubes, and provides regularity checks, Katz-Tao decompositions,
//! dyadic measure uniformization, point-tube incidence counting, point-line
//! duality and radial-projection scans, together with the seeded generators
//! and experiment runner the command-line tool drives.

mod content;
pub mod delta_sets;
pub mod duality;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod geometry;
pub mod incidences;
pub mod io;
pub mod radial;
mod spatial;
pub mod uniformization;

pub use error::{Error, Result};
pub use geometry::{
    covering_number, dyadic_cells_meeting, line_metric, tube_contains, DyadicCell, Line, Point2,
    PointSet, Scale, Tube, TubeSet, Window,
};
