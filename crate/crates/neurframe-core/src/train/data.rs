//! Assembles the per-point loss terms from a preprocessed mesh: one
//! evaluation point per tet centroid, smoothness terms from dual edges,
//! boundary alignment rows from outward normals, and feature alignment rows
//! weighted by distance to the nearest feature.

use nalgebra::Point3;
use rand::seq::SliceRandom;
use rand::Rng;

use super::loss::{AlignTerm, EdgeTerm};
use crate::mesh::PreprocessedMesh;
use crate::sh::rotation::align_row;

/// Everything one training iteration consumes.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub(crate) points: Vec<Point3<f64>>,
    pub(crate) edges: Vec<EdgeTerm>,
    pub(crate) boundary: Vec<AlignTerm>,
    pub(crate) feature: Vec<AlignTerm>,
}

impl TrainingData {
    /// Precomputes all alignment rows and feature weights. `sigma` is the
    /// decay rate of feature influence with distance.
    pub fn new(pre: &PreprocessedMesh, sigma: f64) -> Self {
        let points = pre.dual.centroids.clone();
        let edges = pre
            .dual
            .edges
            .iter()
            .map(|e| EdgeTerm { a: e.a, b: e.b, weight: e.weight })
            .collect();
        let boundary = pre
            .boundary
            .tets
            .iter()
            .zip(&pre.boundary.normals)
            .map(|(&tet, n)| AlignTerm { point: tet, weight: 1.0, row: align_row(n) })
            .collect();
        let feature = if pre.features.is_empty() {
            Vec::new()
        } else {
            points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let (d, dir) = pre
                        .features
                        .distance(p)
                        .expect("non-empty feature set always answers");
                    AlignTerm { point: i, weight: feature_weight(d, sigma), row: align_row(&dir) }
                })
                .collect()
        };
        TrainingData { points, edges, boundary, feature }
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn has_feature_terms(&self) -> bool {
        !self.feature.is_empty()
    }

    /// Uniform subsample of at most `batch` terms of each kind, re-indexed
    /// onto the union of points they touch.
    pub(crate) fn subsample(&self, rng: &mut impl Rng, batch: usize) -> TrainingData {
        let edges = sample(&self.edges, batch, rng);
        let boundary = sample(&self.boundary, batch, rng);
        let feature = sample(&self.feature, batch, rng);

        let mut used: Vec<usize> = edges
            .iter()
            .flat_map(|e| [e.a, e.b])
            .chain(boundary.iter().map(|t| t.point))
            .chain(feature.iter().map(|t| t.point))
            .collect();
        used.sort_unstable();
        used.dedup();
        let remap = |old: usize| used.binary_search(&old).expect("point was collected");

        TrainingData {
            points: used.iter().map(|&i| self.points[i]).collect(),
            edges: edges
                .into_iter()
                .map(|e| EdgeTerm { a: remap(e.a), b: remap(e.b), ..e })
                .collect(),
            boundary: boundary
                .into_iter()
                .map(|t| AlignTerm { point: remap(t.point), ..t })
                .collect(),
            feature: feature
                .into_iter()
                .map(|t| AlignTerm { point: remap(t.point), ..t })
                .collect(),
        }
    }
}

/// Influence of a feature at distance `d`: exp(-sigma d).
pub fn feature_weight(d: f64, sigma: f64) -> f64 {
    (-sigma * d).exp()
}

fn sample<T: Clone>(items: &[T], batch: usize, rng: &mut impl Rng) -> Vec<T> {
    if items.len() <= batch {
        return items.to_vec();
    }
    let mut indices: Vec<usize> = (0..items.len()).collect();
    let (chosen, _) = indices.partial_shuffle(rng, batch);
    chosen.sort_unstable();
    chosen.iter().map(|&i| items[i].clone()).collect()
}
