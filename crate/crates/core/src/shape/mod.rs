//! Model loading, synthetic shapes, and resampling.

mod generate;
mod io;
mod resample;

pub use generate::{generate_shape, NominalSymmetry, ShapeKind, ShapeSpec, DEFAULT_SAMPLES};
pub use io::{load_model, parse_model, ModelFormat, MERGE_DISTANCE};
pub use resample::resample_surface;
