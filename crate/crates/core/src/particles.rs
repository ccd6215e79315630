use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// An ordered collection of `n` points in `R^d`, stored row-major.
///
/// Always non-empty with finite coordinates; the constructors enforce this.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    points: Array2<f64>,
}

impl ParticleSet {
    /// Wrap an `n x d` matrix, one particle per row.
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 || d == 0 {
            return Err(Error::EmptyParticleSet { n, d });
        }
        if let Some(((particle, dim), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { particle, dim });
        }
        // Standard layout so that `as_slice` is always available.
        let points = if points.is_standard_layout() {
            points
        } else {
            points.as_standard_layout().into_owned()
        };
        Ok(Self { points })
    }

    /// Build from a flat row-major buffer of length `n * d`.
    pub fn from_flat(data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 || data.is_empty() || data.len() % d != 0 {
            return Err(Error::EmptyParticleSet {
                n: if d == 0 { 0 } else { data.len() / d },
                d,
            });
        }
        let n = data.len() / d;
        let points = Array2::from_shape_vec((n, d), data).expect("length checked above");
        Self::new(points)
    }

    /// One-dimensional particles.
    pub fn from_1d(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(d, bad.len()));
        }
        Self::from_flat(rows.iter().flatten().copied().collect(), d)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn d(&self) -> usize {
        self.points.ncols()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    /// Contiguous row-major view of all coordinates.
    pub fn as_flat(&self) -> &[f64] {
        self.points.as_slice().expect("standard layout")
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.points
    }

    /// Apply `x -> scale * x + shift` to every coordinate.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(self.points.mapv(|v| scale * v + shift))
    }

    pub(crate) fn check_same_dim(&self, other: &ParticleSet) -> Result<()> {
        if self.d() != other.d() {
            return Err(Error::DimensionMismatch(self.d(), other.d()));
        }
        Ok(())
    }
}

/// Frobenius norm of a matrix.
pub fn frobenius_norm(m: ArrayView2<'_, f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}
