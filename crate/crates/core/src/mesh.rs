use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform knot grid `x_0 < x_1 < ... < x_N` with spacing `h`.
///
/// Knot indices run over the extended range `-2..=N+2`; the four ghost knots
/// outside the domain continue the same spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh {
    x0: f64,
    x_end: f64,
    n: usize,
    h: f64,
}

/// Largest admissible spacing (exclusive): all five sine factors of the
/// basis normalisation stay positive below it.
pub const MAX_SPACING: f64 = 2.0 * PI / 5.0;

/// Smallest admissible number of intervals.
pub const MIN_INTERVALS: usize = 8;

impl UniformMesh {
    pub fn new(x0: f64, x_end: f64, n: usize) -> Result<Self> {
        if !(x_end > x0) || !x0.is_finite() || !x_end.is_finite() {
            return Err(Error::DegenerateDomain { x0, x_end });
        }
        if n < MIN_INTERVALS {
            return Err(Error::TooFewIntervals(n));
        }
        let h = (x_end - x0) / n as f64;
        if h >= MAX_SPACING {
            return Err(Error::DomainTooCoarse { h });
        }
        Ok(Self { x0, x_end, n, h })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    /// Number of intervals `N`.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Position of knot `m`, valid for the extended range `-2..=N+2`.
    pub fn knot(&self, m: i64) -> f64 {
        if m == self.n as i64 {
            self.x_end
        } else {
            self.x0 + m as f64 * self.h
        }
    }

    /// Domain knots `x_0..=x_N`.
    pub fn knots(&self) -> Vec<f64> {
        (0..=self.n as i64).map(|m| self.knot(m)).collect()
    }

    /// Index of the domain knot closest to `x`, clamped to `0..=N`.
    pub fn nearest_knot(&self, x: f64) -> usize {
        let r = ((x - self.x0) / self.h).round();
        r.clamp(0.0, self.n as f64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_for_linear_domain() {
        let mesh = UniformMesh::new(0.0, PI / 2.0, 512).unwrap();
        assert!((mesh.spacing() - PI / 1024.0).abs() < 1e-15);
        assert_eq!(mesh.knots().len(), 513);
    }

    #[test]
    fn gray_scott_domain() {
        let mesh = UniformMesh::new(-50.0, 50.0, 400).unwrap();
        assert_eq!(mesh.spacing(), 0.25);
        assert_eq!(mesh.knot(-2), -50.5);
        assert_eq!(mesh.knot(402), 50.5);
        assert_eq!(mesh.knot(400), 50.0);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert_eq!(
            UniformMesh::new(0.0, 1.0, 4),
            Err(Error::TooFewIntervals(4))
        );
        assert!(matches!(
            UniformMesh::new(1.0, 1.0, 10),
            Err(Error::DegenerateDomain { .. })
        ));
        assert!(matches!(
            UniformMesh::new(0.0, 20.0, 10),
            Err(Error::DomainTooCoarse { .. })
        ));
    }

    #[test]
    fn nearest_knot_clamps() {
        let mesh = UniformMesh::new(0.0, 1.0, 10).unwrap();
        assert_eq!(mesh.nearest_knot(0.41), 4);
        assert_eq!(mesh.nearest_knot(-3.0), 0);
        assert_eq!(mesh.nearest_knot(7.0), 10);
    }
}
