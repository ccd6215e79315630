//! Toy distributions used by the flow and error-scaling experiments.

use rand::Rng;
use rand_distr::{Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::particles::ParticleSet;
use crate::rng::RngStream;

/// Uniform distribution on the union of equal-radius planar circles.
#[derive(Debug, Clone, PartialEq)]
pub struct Circles {
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
}

impl Default for Circles {
    /// Three unit circles centred at (0, 0), (2.5, 0) and (1.25, 2.2).
    fn default() -> Self {
        Self {
            centers: vec![[0.0, 0.0], [2.5, 0.0], [1.25, 2.2]],
            radius: 1.0,
        }
    }
}

impl Circles {
    /// Which circle a point lies on, if any, within `tol` of the radius.
    pub fn circle_of(&self, p: [f64; 2], tol: f64) -> Option<usize> {
        self.centers
            .iter()
            .position(|c| ((p[0] - c[0]).hypot(p[1] - c[1]) - self.radius).abs() <= tol)
    }

    /// At least one circle, a finite positive radius and pairwise disjoint circles.
    pub fn validate(&self) -> Result<()> {
        if self.centers.is_empty() || !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Domain("need at least one circle and a finite radius > 0".into()));
        }
        for (i, a) in self.centers.iter().enumerate() {
            if !(a[0].is_finite() && a[1].is_finite()) {
                return Err(Error::Domain(format!("non-finite center {a:?}")));
            }
            for b in &self.centers[i + 1..] {
                if (a[0] - b[0]).hypot(a[1] - b[1]) <= 2.0 * self.radius {
                    return Err(Error::Domain(format!("circles at {a:?} and {b:?} overlap")));
                }
            }
        }
        Ok(())
    }

    pub fn sample(&self, n: usize, stream: &RngStream) -> Result<ParticleSet> {
        if n == 0 {
            return Err(Error::Domain("need n >= 1".into()));
        }
        self.validate()?;
        let mut rng = stream.rng();
        let k = self.centers.len();
        let mut data = Vec::with_capacity(2 * n);
        for _ in 0..n {
            // equal radii, so equal arc length per circle
            let c = self.centers[rng.random_range(0..k)];
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            data.push(c[0] + self.radius * theta.cos());
            data.push(c[1] + self.radius * theta.sin());
        }
        ParticleSet::from_flat(data, 2)
    }
}

/// `n` points uniform on the default three circles.
pub fn three_circles_sampler(n: usize, stream: &RngStream) -> Result<ParticleSet> {
    Circles::default().sample(n, stream)
}

/// `n` iid points from `N(0, std² I_d)`.
pub fn gaussian_init(n: usize, d: usize, std: f64, stream: &RngStream) -> Result<ParticleSet> {
    if n == 0 || d == 0 || !(std > 0.0 && std.is_finite()) {
        return Err(Error::Domain(format!(
            "need n, d >= 1 and std > 0, got n = {n}, d = {d}, std = {std}"
        )));
    }
    let normal = Normal::new(0.0, std).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = stream.rng();
    ParticleSet::from_flat((0..n * d).map(|_| rng.sample(normal)).collect(), d)
}

/// Isotropic Gaussian mixture with equal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub means: Vec<Vec<f64>>,
    pub std: f64,
}

impl GaussianMixture {
    /// `components` means drawn uniformly from `[-1, 1]^d`.
    pub fn random_means(components: usize, d: usize, std: f64, stream: &RngStream) -> Result<Self> {
        if components == 0 || d == 0 || !(std > 0.0) {
            return Err(Error::Domain("need components, d >= 1 and std > 0".into()));
        }
        let mut rng = stream.rng();
        let means = (0..components)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        Ok(Self { means, std })
    }

    pub fn sample(&self, n: usize, stream: &RngStream) -> Result<ParticleSet> {
        let d = self.means.first().map_or(0, Vec::len);
        if n == 0 || d == 0 {
            return Err(Error::Domain("need n >= 1 and a non-empty mixture".into()));
        }
        let mut rng = stream.rng();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            let mean = &self.means[rng.random_range(0..self.means.len())];
            for &mu in mean {
                let z: f64 = rng.sample(StandardNormal);
                data.push(mu + self.std * z);
            }
        }
        ParticleSet::from_flat(data, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_samples_lie_on_circles() {
        let c = Circles::default();
        let pts = c.sample(30_000, &RngStream::new(4)).unwrap();
        let mut counts = [0usize; 3];
        for row in pts.points().rows() {
            let k = c.circle_of([row[0], row[1]], 1e-12).expect("off every circle");
            counts[k] += 1;
        }
        let n = 30_000f64;
        for k in counts {
            assert!((k as f64 - n / 3.0).abs() <= 3.0 * n.sqrt(), "{counts:?}");
        }
        assert_eq!(pts, c.sample(30_000, &RngStream::new(4)).unwrap());
    }

    #[test]
    fn default_circles_do_not_overlap() {
        let c = Circles::default();
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (c.centers[i], c.centers[j]);
                assert!((a[0] - b[0]).hypot(a[1] - b[1]) > 2.0 * c.radius);
            }
        }
        assert!(c.validate().is_ok());
        let touching = Circles { centers: vec![[0.0, 0.0], [2.0, 0.0]], radius: 1.0 };
        assert!(touching.validate().is_err());
        assert!(touching.sample(5, &RngStream::new(0)).is_err());
        assert!(Circles { centers: vec![], radius: 1.0 }.validate().is_err());
    }

    #[test]
    fn gaussian_init_variance() {
        let std = 0.3;
        let pts = gaussian_init(100_000, 2, std, &RngStream::new(8)).unwrap();
        for col in pts.points().columns() {
            let mean = col.mean().unwrap();
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (col.len() - 1) as f64;
            assert!((var / (std * std) - 1.0).abs() < 0.05, "{var}");
        }
        assert!(gaussian_init(10, 2, 0.0, &RngStream::new(0)).is_err());
        let tiny = gaussian_init(50, 2, 1e-12, &RngStream::new(1)).unwrap();
        assert!(tiny.as_flat().iter().all(|v| v.abs() < 1e-10));
        assert_eq!(tiny, gaussian_init(50, 2, 1e-12, &RngStream::new(1)).unwrap());
    }

    #[test]
    fn mixture_means_in_cube() {
        let g = GaussianMixture::random_means(10, 5, 0.01, &RngStream::new(2)).unwrap();
        assert!(g.means.iter().flatten().all(|v| (-1.0..=1.0).contains(v)));
        let pts = g.sample(200, &RngStream::new(3)).unwrap();
        assert_eq!((pts.n(), pts.d()), (200, 5));
        for row in pts.points().rows() {
            let near = g.means.iter().any(|m| m.iter().zip(row.iter()).all(|(a, b)| (a - b).abs() < 0.1));
            assert!(near);
        }
    }
}
