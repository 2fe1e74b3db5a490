//! The neural coefficient field: a small sinusoidal MLP mapping positions to
//! unit 9-vectors, with hand-written exact reverse-mode gradients, Adam, and
//! a binary checkpoint format.

pub mod adam;
pub mod checkpoint;
pub mod mat;
pub mod mlp;

use nalgebra::Point3;
use thiserror::Error;

use crate::sh::ShVec;

pub use adam::Adam;
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use mat::Mat;
pub use mlp::{ForwardRecord, Gradients, Mlp};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("network output has norm {norm:.3e} at point {index}; cannot normalize")]
    DegenerateOutput { index: usize, norm: f64 },
    #[error("non-finite gradient in the {which} of layer {layer}")]
    NonFiniteGradient { layer: usize, which: &'static str },
    #[error("checkpoint is corrupt: {0}")]
    Corrupt(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Anything that yields frame coefficients at a point: trained networks and
/// closed-form reference fields alike.
pub trait FrameField {
    /// Coefficients at `p`. Implementations return a non-unit (even zero)
    /// vector where the field degenerates; projection reports that honestly.
    fn coefficients(&self, p: &Point3<f64>) -> ShVec;

    /// Batched evaluation; the network overrides this with one big pass.
    fn coefficients_batch(&self, points: &[Point3<f64>]) -> Vec<ShVec> {
        points.iter().map(|p| self.coefficients(p)).collect()
    }
}
