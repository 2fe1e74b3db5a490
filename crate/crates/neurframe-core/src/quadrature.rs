//! Product quadrature on the unit sphere: Gauss–Legendre nodes in the polar
//! cosine crossed with a uniform azimuth grid. Exact for polynomial
//! integrands up to degree `2*n_polar - 1` in the polar direction and
//! azimuthal Fourier modes below `n_azimuth`, which covers the degree-8
//! products that arise from pairs of band-4 harmonics.

use nalgebra::Vector3;

/// Quadrature nodes and weights on the unit sphere; weights sum to 4π.
pub struct SphereQuadrature {
    nodes: Vec<(Vector3<f64>, f64)>,
}

impl SphereQuadrature {
    /// Builds an `n_polar × n_azimuth` product grid.
    pub fn product_grid(n_polar: usize, n_azimuth: usize) -> Self {
        assert!(n_polar >= 1 && n_azimuth >= 1);
        let azimuth_weight = 2.0 * std::f64::consts::PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        for (u, wu) in gauss_legendre(n_polar) {
            let sin_theta = (1.0 - u * u).max(0.0).sqrt();
            for k in 0..n_azimuth {
                let phi = azimuth_weight * k as f64;
                let s = Vector3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), u);
                nodes.push((s, wu * azimuth_weight));
            }
        }
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over the sphere.
    pub fn integrate<F: Fn(&Vector3<f64>) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().map(|(s, w)| w * f(s)).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&Vector3<f64>, f64)> {
        self.nodes.iter().map(|(s, w)| (s, *w))
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_sphere_area() {
        let q = SphereQuadrature::product_grid(16, 33);
        let area = q.integrate(|_| 1.0);
        assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-12, "area {area}");
    }

    #[test]
    fn low_degree_moments_exact() {
        let q = SphereQuadrature::product_grid(8, 17);
        // mean of z^2 is 1/3, of z^4 is 1/5, of x^2 y^2 is 1/15
        let sphere = 4.0 * std::f64::consts::PI;
        let z2 = q.integrate(|s| s.z * s.z) / sphere;
        let z4 = q.integrate(|s| s.z.powi(4)) / sphere;
        let x2y2 = q.integrate(|s| s.x * s.x * s.y * s.y) / sphere;
        assert!((z2 - 1.0 / 3.0).abs() < 1e-14);
        assert!((z4 - 1.0 / 5.0).abs() < 1e-14);
        assert!((x2y2 - 1.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn odd_moments_vanish() {
        let q = SphereQuadrature::product_grid(8, 17);
        assert!(q.integrate(|s| s.x * s.y * s.z).abs() < 1e-14);
        assert!(q.integrate(|s| s.z.powi(3)).abs() < 1e-14);
    }
}
