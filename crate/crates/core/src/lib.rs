//! Square tilings of planar electrical networks.

pub mod boundary;
pub mod graph;
pub mod harmonic;
pub mod scalar;
pub mod tiling;
pub mod walk;

pub use graph::{GraphError, PlanarGraph};
pub use scalar::{Rational, Scalar};

pub type Graph = PlanarGraph<f64>;
pub type ExactGraph = PlanarGraph<Rational>;
pub type Tiling64 = tiling::Tiling<f64>;
pub type ExactTiling = tiling::Tiling<Rational>;
