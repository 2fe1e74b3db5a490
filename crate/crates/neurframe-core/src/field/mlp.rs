//! Sinusoidal MLP over positions. Every layer but the last applies
//! sin(omega * (Wx + b)); the last is linear and its output is normalized to
//! the unit sphere in coefficient space.

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mat::Mat;
use super::{FieldError, FrameField};
use crate::sh::ShVec;

/// Frequency factor inside every sine layer.
pub const OMEGA: f64 = 30.0;

/// Hidden width and depth of the standard field network.
pub const STANDARD_DIMS: [usize; 7] = [3, 256, 256, 256, 256, 256, 9];

const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Mlp {
    dims: Vec<usize>,
    omega: f64,
    weights: Vec<Mat>, // weights[l] is dims[l+1] x dims[l]
    biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// Random network with the given layer sizes. The first layer draws
    /// weights from U(+-1/fan_in), later layers from
    /// U(+-sqrt(6/fan_in)/omega), biases from U(+-1/sqrt(fan_in)).
    pub fn new(dims: &[usize], omega: f64, seed: u64) -> Self {
        assert!(dims.len() >= 2, "need at least one layer");
        assert!(dims.iter().all(|&d| d > 0), "zero-width layer");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..dims.len() - 1 {
            let fan_in = dims[l] as f64;
            let w_bound = if l == 0 {
                1.0 / fan_in
            } else {
                (6.0 / fan_in).sqrt() / omega
            };
            let b_bound = 1.0 / fan_in.sqrt();
            let mut w = Mat::zeros(dims[l + 1], dims[l]);
            for v in w.data_mut() {
                *v = rng.gen_range(-w_bound..w_bound);
            }
            weights.push(w);
            biases.push((0..dims[l + 1]).map(|_| rng.gen_range(-b_bound..b_bound)).collect());
        }
        Mlp { dims: dims.to_vec(), omega, weights, biases }
    }

    /// The standard field network: 3 -> 256 x 5 -> 9.
    pub fn standard(seed: u64) -> Self {
        Mlp::new(&STANDARD_DIMS, OMEGA, seed)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.rows() * w.cols() + b.len())
            .sum()
    }

    /// All parameters in canonical order: per layer, weights row-major then
    /// biases. Checkpoints and finite-difference probes rely on this order.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<(), FieldError> {
        if params.len() != self.param_count() {
            return Err(FieldError::Shape(format!(
                "{} parameters supplied, network has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let n = w.rows() * w.cols();
            w.data_mut().copy_from_slice(&params[at..at + n]);
            at += n;
            let nb = b.len();
            b.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    // linear/sine stack without the final normalization
    fn forward_linear(&self, points: &[Point3<f64>]) -> (Mat, Vec<Mat>, Vec<Mat>) {
        let n = points.len();
        let mut input = Mat::zeros(n, self.dims[0]);
        for (i, p) in points.iter().enumerate() {
            input.row_mut(i).copy_from_slice(&[p.x, p.y, p.z]);
        }
        let last = self.n_layers() - 1;
        let mut pre = Vec::with_capacity(self.n_layers());
        let mut act = Vec::with_capacity(last);
        for l in 0..self.n_layers() {
            let a_prev = if l == 0 { &input } else { &act[l - 1] };
            let mut z = a_prev.mul_bt(&self.weights[l]);
            z.add_bias(&self.biases[l]);
            if l < last {
                let mut a = z.clone();
                for v in a.data_mut() {
                    *v = (self.omega * *v).sin();
                }
                act.push(a);
            }
            pre.push(z);
        }
        (input, pre, act)
    }

    /// Batched forward pass keeping everything the backward pass needs.
    /// Errors if any output cannot be normalized.
    pub fn forward(&self, points: &[Point3<f64>]) -> Result<ForwardRecord, FieldError> {
        let (input, pre, act) = self.forward_linear(points);
        let raw = pre.last().expect("at least one layer").clone();
        let mut q = raw.clone();
        let mut norms = Vec::with_capacity(points.len());
        for i in 0..q.rows() {
            let norm = q.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < NORM_FLOOR {
                return Err(FieldError::DegenerateOutput { index: i, norm });
            }
            for v in q.row_mut(i) {
                *v /= norm;
            }
            norms.push(norm);
        }
        Ok(ForwardRecord { input, pre, act, q, norms })
    }

    /// Exact reverse-mode gradients of a scalar loss, given its gradient
    /// with respect to the normalized outputs.
    pub fn backward(&self, rec: &ForwardRecord, dq: &Mat) -> Result<Gradients, FieldError> {
        assert_eq!(dq.rows(), rec.q.rows(), "gradient batch size differs");
        assert_eq!(dq.cols(), *self.dims.last().unwrap(), "gradient width differs");

        // through the normalization: (I - qq^T)/|r| row by row
        let mut delta = Mat::zeros(dq.rows(), dq.cols());
        for i in 0..dq.rows() {
            let q = rec.q.row(i);
            let g = dq.row(i);
            let dot: f64 = q.iter().zip(g).map(|(a, b)| a * b).sum();
            let out = delta.row_mut(i);
            for k in 0..q.len() {
                out[k] = (g[k] - q[k] * dot) / rec.norms[i];
            }
        }

        let mut d_weights = vec![Mat::zeros(0, 0); self.n_layers()];
        let mut d_biases = vec![Vec::new(); self.n_layers()];
        for l in (0..self.n_layers()).rev() {
            let a_prev = if l == 0 { &rec.input } else { &rec.act[l - 1] };
            let dw = delta.mul_at(a_prev);
            let db = delta.column_sums();
            if dw.data().iter().any(|v| !v.is_finite()) {
                return Err(FieldError::NonFiniteGradient { layer: l, which: "weights" });
            }
            if db.iter().any(|v| !v.is_finite()) {
                return Err(FieldError::NonFiniteGradient { layer: l, which: "biases" });
            }
            d_weights[l] = dw;
            d_biases[l] = db;
            if l > 0 {
                let mut back = delta.mul(&self.weights[l]);
                // chain through a = sin(omega u)
                let u = &rec.pre[l - 1];
                for (v, &uu) in back.data_mut().iter_mut().zip(u.data()) {
                    *v *= self.omega * (self.omega * uu).cos();
                }
                delta = back;
            }
        }
        Ok(Gradients { weights: d_weights, biases: d_biases })
    }

    /// Coefficients at one point; errors on a degenerate output.
    pub fn coefficients_at(&self, p: &Point3<f64>) -> Result<ShVec, FieldError> {
        let rec = self.forward(std::slice::from_ref(p))?;
        Ok(rec.q_vec(0))
    }

}

impl FrameField for Mlp {
    fn coefficients(&self, p: &Point3<f64>) -> ShVec {
        self.coefficients_batch(std::slice::from_ref(p)).pop().unwrap()
    }

    fn coefficients_batch(&self, points: &[Point3<f64>]) -> Vec<ShVec> {
        let (_, pre, _) = self.forward_linear(points);
        let raw = pre.last().expect("at least one layer");
        (0..raw.rows())
            .map(|i| {
                let r = ShVec::from_row_slice(raw.row(i));
                let norm = r.norm();
                // degenerate outputs pass through un-normalized so the
                // projection downstream fails loudly instead of silently
                if norm < NORM_FLOOR {
                    r
                } else {
                    r / norm
                }
            })
            .collect()
    }
}

/// Cached activations from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardRecord {
    input: Mat,
    pre: Vec<Mat>,
    act: Vec<Mat>,
    q: Mat,
    norms: Vec<f64>,
}

impl ForwardRecord {
    pub fn n_points(&self) -> usize {
        self.q.rows()
    }

    /// Normalized outputs, one row per point.
    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn q_vec(&self, i: usize) -> ShVec {
        ShVec::from_row_slice(self.q.row(i))
    }
}

/// Per-layer parameter gradients, in the network's own shapes.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Mat>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    /// Same canonical order as [`Mlp::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out
    }

    /// Elementwise sum; shapes must match.
    pub fn add(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for v in w.data_mut() {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v *= s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn test_points() -> Vec<Point3<f64>> {
        vec![
            Point3::new(0.1, -0.4, 0.7),
            Point3::new(-0.9, 0.2, 0.05),
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.33, 0.88, -0.61),
            Point3::new(-0.5, -0.5, 0.5),
        ]
    }

    #[test]
    fn standard_network_parameter_count() {
        let mlp = Mlp::standard(0);
        assert_eq!(mlp.param_count(), 266_505);
        assert_eq!(mlp.params_flat().len(), 266_505);
    }

    #[test]
    fn init_respects_the_layer_bounds() {
        let mlp = Mlp::standard(7);
        let w0_bound = 1.0 / 3.0;
        let hidden_bound = (6.0f64 / 256.0).sqrt() / OMEGA;
        assert!(mlp.weights()[0].data().iter().all(|v| v.abs() <= w0_bound));
        for l in 1..mlp.n_layers() {
            assert!(
                mlp.weights()[l].data().iter().all(|v| v.abs() <= hidden_bound),
                "layer {l}"
            );
        }
        assert!(mlp.biases()[0].iter().all(|v| v.abs() <= 1.0 / 3.0f64.sqrt()));
        assert!(mlp.biases()[2].iter().all(|v| v.abs() <= 1.0 / 16.0));
        // weights actually use the range rather than collapsing near zero
        let spread = mlp.weights()[1].data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(spread > 0.5 * hidden_bound);
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = Mlp::new(&[3, 16, 9], OMEGA, 42);
        let b = Mlp::new(&[3, 16, 9], OMEGA, 42);
        let c = Mlp::new(&[3, 16, 9], OMEGA, 43);
        assert_eq!(a.params_flat(), b.params_flat());
        assert_ne!(a.params_flat(), c.params_flat());
    }

    #[test]
    fn outputs_are_unit_vectors() {
        let mlp = Mlp::new(&[3, 32, 32, 9], OMEGA, 1);
        let rec = mlp.forward(&test_points()).unwrap();
        for i in 0..rec.n_points() {
            assert_relative_eq!(rec.q_vec(i).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn batched_forward_matches_single_points() {
        let mlp = Mlp::new(&[3, 24, 16, 9], OMEGA, 5);
        let pts = test_points();
        let rec = mlp.forward(&pts).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let single = mlp.coefficients_at(p).unwrap();
            assert!((rec.q_vec(i) - single).norm() < 1e-14);
        }
        let batch = mlp.coefficients_batch(&pts);
        for (i, q) in batch.iter().enumerate() {
            assert!((rec.q_vec(i) - q).norm() < 1e-14);
        }
    }

    #[test]
    fn round_trip_through_flat_parameters() {
        let mlp = Mlp::new(&[3, 10, 9], OMEGA, 9);
        let mut other = Mlp::new(&[3, 10, 9], OMEGA, 10);
        other.set_params_flat(&mlp.params_flat()).unwrap();
        let p = Point3::new(0.2, -0.3, 0.4);
        assert_eq!(
            mlp.coefficients_at(&p).unwrap(),
            other.coefficients_at(&p).unwrap()
        );
        assert!(other.set_params_flat(&[0.0; 3]).is_err());
    }

    #[test]
    fn zeroed_output_layer_is_a_degenerate_output() {
        let mut mlp = Mlp::new(&[3, 8, 9], OMEGA, 3);
        let mut params = mlp.params_flat();
        let tail = 8 * 9 + 9;
        let n = params.len();
        for v in &mut params[n - tail..] {
            *v = 0.0;
        }
        mlp.set_params_flat(&params).unwrap();
        match mlp.forward(&test_points()).unwrap_err() {
            FieldError::DegenerateOutput { index, .. } => assert_eq!(index, 0),
            other => panic!("unexpected error {other}"),
        }
        // the lenient path passes the raw vector through instead
        let q = mlp.coefficients(&Point3::new(0.1, 0.2, 0.3));
        assert!(q.norm() < 1e-12);
    }

    #[test]
    fn nan_loss_gradient_names_the_layer() {
        let mlp = Mlp::new(&[3, 8, 9], OMEGA, 3);
        let pts = test_points();
        let rec = mlp.forward(&pts).unwrap();
        let mut dq = Mat::zeros(pts.len(), 9);
        dq.set(2, 4, f64::NAN);
        match mlp.backward(&rec, &dq).unwrap_err() {
            FieldError::NonFiniteGradient { layer, which } => {
                assert_eq!(layer, 1);
                assert_eq!(which, "weights");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    // central finite differences over every parameter of a small network
    #[test]
    fn gradients_match_finite_differences() {
        let mut mlp = Mlp::new(&[3, 6, 5, 9], OMEGA, 11);
        let pts = test_points();
        // fixed quadratic loss: 0.5 sum |q - y|^2 with an arbitrary target
        let target: Vec<ShVec> = (0..pts.len())
            .map(|i| {
                let mut y = ShVec::zeros();
                for k in 0..9 {
                    y[k] = ((i * 9 + k) as f64 * 0.7).sin();
                }
                y
            })
            .collect();
        let loss = |mlp: &Mlp| -> f64 {
            let rec = mlp.forward(&pts).unwrap();
            (0..pts.len()).map(|i| 0.5 * (rec.q_vec(i) - target[i]).norm_squared()).sum()
        };

        let rec = mlp.forward(&pts).unwrap();
        let mut dq = Mat::zeros(pts.len(), 9);
        for i in 0..pts.len() {
            let diff = rec.q_vec(i) - target[i];
            dq.row_mut(i).copy_from_slice(diff.as_slice());
        }
        let analytic = mlp.backward(&rec, &dq).unwrap().flat();

        let params = mlp.params_flat();
        let h = 1e-6;
        for k in 0..params.len() {
            let mut plus = params.clone();
            plus[k] += h;
            mlp.set_params_flat(&plus).unwrap();
            let lp = loss(&mlp);
            let mut minus = params.clone();
            minus[k] -= h;
            mlp.set_params_flat(&minus).unwrap();
            let lm = loss(&mlp);
            let fd = (lp - lm) / (2.0 * h);
            let err = (analytic[k] - fd).abs() / fd.abs().max(1.0);
            assert!(err < 1e-6, "param {k}: analytic {} vs fd {fd}", analytic[k]);
        }
    }
}
