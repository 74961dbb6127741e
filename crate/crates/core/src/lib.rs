//! Critical Ising model on finite isoradial graphs, its dimer and spanning
//! tree representations, and exact oracles to check every step.

pub mod correspondence;
pub mod error;
pub mod generators;
pub mod io;
pub mod isoradial;
pub mod kasteleyn;
pub mod oracles;
pub mod pipeline;
pub mod planar;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use planar::{DerivedMap, EdgeOrigin, GraphKind, PlanarMap, VertexClass};
pub use scalar::{Scalar, Tolerances};

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
pub type IsoradialData64 = isoradial::IsoradialData<f64>;
pub type IsoradialData32 = isoradial::IsoradialData<f32>;
pub type WeightedDigraph64 = oracles::WeightedDigraph<f64>;
pub type ComplexMatrix64 = oracles::ComplexMatrix<f64>;
