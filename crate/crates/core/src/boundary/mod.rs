//! Sharp harmonic functions from boundary arcs and their audits.

mod arcs;
mod audit;
mod sharp;

use thiserror::Error;

use crate::graph::GraphError;
use crate::harmonic::HarmonicError;
use crate::walk::WalkError;

pub use arcs::ArcSet;
pub use audit::{
    ade_check, faithfulness_audit, layered_criterion, level_set_drift, noalter_check,
    verify_sharpness, AdeReport, DriftSeries, FaithfulnessReport, Hypothesis, HypothesisStatus,
    LayeredOptions, LayeredReport, LevelSetDrift, NoalterReport, NoalterRow, SharpnessOptions,
    SharpnessReport,
};
pub use sharp::{
    combine_sharp, harmonic_defect, level_set, nested_levels, sharp_from_arc, LevelSet,
    NestedLevels, SharpFunction, SharpOp, SharpOptions,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("sharp functions and tiling do not belong to the same network")]
    Incompatible,
}
