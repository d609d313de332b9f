use nalgebra::Vector3;

/// Default orientation count for powder averages.
pub const DEFAULT_ORIENTATIONS: usize = 4096;
/// Minimum orientation count accepted by powder averages.
pub const MIN_ORIENTATIONS: usize = 100;

/// Golden-spiral (Fibonacci) point set: `n` nearly uniform unit vectors on the
/// sphere with equal weights `1/n`.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_and_balanced() {
        let pts = fibonacci_sphere(4096);
        assert_eq!(pts.len(), 4096);
        let mut centroid = Vector3::zeros();
        for p in &pts {
            assert!((p.norm() - 1.0).abs() < 1e-12);
            centroid += p;
        }
        assert!((centroid / 4096.0).norm() < 1e-3);
    }

    #[test]
    fn second_moments_isotropic() {
        // <n_i n_j> = δ_ij / 3 for a uniform distribution.
        let pts = fibonacci_sphere(4096);
        let mut m = nalgebra::Matrix3::zeros();
        for p in &pts {
            m += p * p.transpose();
        }
        m /= pts.len() as f64;
        let err = (m - nalgebra::Matrix3::identity() / 3.0).abs().max();
        assert!(err < 1e-3, "{err}");
    }
}
