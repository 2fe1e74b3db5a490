//! The three self-supervision terms and their exact gradients with respect
//! to the normalized network outputs.

use nalgebra::SVector;

use crate::field::Mat;
use crate::sh::aligned_zonal_value;

/// Weighting of the three terms in the total objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub smooth: f64,
    pub boundary: f64,
    pub feature: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { smooth: 1.0, boundary: 20.0, feature: 1.0 }
    }
}

/// Unweighted values of the three terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    pub smooth: f64,
    pub boundary: f64,
    pub feature: f64,
}

impl LossTerms {
    pub fn total(&self, w: &LossWeights) -> f64 {
        w.smooth * self.smooth + w.boundary * self.boundary + w.feature * self.feature
    }
}

/// Smoothness term between two face-adjacent tets.
#[derive(Debug, Clone, Copy)]
pub struct EdgeTerm {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Alignment term at one point: weight times the squared residual between
/// the aligned zonal value and `row . q`.
#[derive(Debug, Clone)]
pub struct AlignTerm {
    pub point: usize,
    pub weight: f64,
    pub row: SVector<f64, 9>,
}

/// Accumulates the three terms over the batch and the gradient of the
/// weighted total with respect to `q`. Sums run in storage order so results
/// are reproducible bit for bit.
pub(crate) fn accumulate(
    q: &Mat,
    edges: &[EdgeTerm],
    boundary: &[AlignTerm],
    feature: &[AlignTerm],
    w: &LossWeights,
) -> (LossTerms, Mat) {
    let azv = aligned_zonal_value();
    let mut dq = Mat::zeros(q.rows(), q.cols());

    let mut smooth = 0.0;
    if !edges.is_empty() {
        let norm = 1.0 / edges.len() as f64;
        for e in edges {
            let mut diff = [0.0; 9];
            let mut sq = 0.0;
            for (k, d) in diff.iter_mut().enumerate() {
                *d = q.at(e.a, k) - q.at(e.b, k);
                sq += *d * *d;
            }
            smooth += e.weight * sq;
            let c = 2.0 * w.smooth * norm * e.weight;
            for (slot, d) in dq.row_mut(e.a).iter_mut().zip(&diff) {
                *slot += c * d;
            }
            for (slot, d) in dq.row_mut(e.b).iter_mut().zip(&diff) {
                *slot -= c * d;
            }
        }
        smooth *= norm;
    }

    let mut accumulate_align = |terms: &[AlignTerm], norm: f64, lambda: f64| -> f64 {
        let mut sum = 0.0;
        for t in terms {
            let dot: f64 = t.row.iter().zip(q.row(t.point)).map(|(r, v)| r * v).sum();
            let r = azv - dot;
            sum += t.weight * r * r;
            let c = -2.0 * lambda * norm * t.weight * r;
            for (slot, rr) in dq.row_mut(t.point).iter_mut().zip(t.row.iter()) {
                *slot += c * rr;
            }
        }
        sum * norm
    };

    let boundary_term = if boundary.is_empty() {
        0.0
    } else {
        accumulate_align(boundary, 1.0 / boundary.len() as f64, w.boundary)
    };
    // the feature term is averaged over every evaluation point
    let feature_term = if feature.is_empty() {
        0.0
    } else {
        accumulate_align(feature, 1.0 / q.rows() as f64, w.feature)
    };
    drop(accumulate_align);

    (LossTerms { smooth, boundary: boundary_term, feature: feature_term }, dq)
}
