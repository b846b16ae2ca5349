//! Energy grids and sampled wave functions shared by the resonance and
//! Hardy-class layers.

use num_complex::Complex64;
use thiserror::Error;

/// Relative spacing jitter tolerated before a grid stops counting as uniform.
pub const UNIFORM_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("energy grid needs at least 8 points, got {0}")]
    TooFewPoints(usize),
    #[error("energy grid points must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("grid span must be positive and finite")]
    BadSpan,
    #[error("wave-function values length {values} does not match grid length {grid}")]
    LengthMismatch { values: usize, grid: usize },
    #[error("wave-function values must all be finite")]
    NonFiniteValue,
}

/// A finite, strictly increasing list of real energies.
///
/// Spectral operations additionally require the `uniform` flag, which is set
/// when the spacing is constant to relative [`UNIFORM_REL_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid {
    points: Vec<f64>,
    uniform: bool,
}

impl EnergyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, GridError> {
        if points.len() < 8 {
            return Err(GridError::TooFewPoints(points.len()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(GridError::NotIncreasing(i + 1));
            }
        }
        let mean_step = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
        let uniform = points
            .windows(2)
            .all(|w| ((w[1] - w[0]) - mean_step).abs() <= UNIFORM_REL_TOL * mean_step);
        Ok(Self { points, uniform })
    }

    /// Uniform grid of `n` points covering `[start, stop]` inclusive.
    pub fn uniform(start: f64, stop: f64, n: usize) -> Result<Self, GridError> {
        if n < 8 {
            return Err(GridError::TooFewPoints(n));
        }
        if !(stop > start) || !start.is_finite() || !stop.is_finite() {
            return Err(GridError::BadSpan);
        }
        let step = (stop - start) / (n - 1) as f64;
        let points = (0..n).map(|i| start + i as f64 * step).collect();
        Ok(Self {
            points,
            uniform: true,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn stop(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Mean spacing; exact spacing when the grid is uniform.
    pub fn step(&self) -> f64 {
        (self.stop() - self.start()) / (self.len() - 1) as f64
    }
}

/// Complex samples of an energy wave function on an [`EnergyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveFunction {
    grid: EnergyGrid,
    values: Vec<Complex64>,
}

impl SampledWaveFunction {
    pub fn new(grid: EnergyGrid, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                values: values.len(),
                grid: grid.len(),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GridError::NonFiniteValue);
        }
        Ok(Self { grid, values })
    }

    /// Sample `f` on every grid point.
    pub fn from_fn(grid: EnergyGrid, f: impl Fn(f64) -> Complex64) -> Result<Self, GridError> {
        let values = grid.points().iter().map(|&e| f(e)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Trapezoid-rule L² norm squared, `∫ |f|² dE` over the grid span.
    pub fn norm_sq(&self) -> f64 {
        let p = self.grid.points();
        let v = &self.values;
        let mut acc = 0.0;
        for i in 0..p.len() - 1 {
            acc += 0.5 * (p[i + 1] - p[i]) * (v[i].norm_sqr() + v[i + 1].norm_sqr());
        }
        acc
    }

    /// Trapezoid-rule inner product `∫ conj(self)·other dE`; grids must match.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.grid, other.grid, "inner product needs matching grids");
        let p = self.grid.points();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..p.len() - 1 {
            let a = self.values[i].conj() * other.values[i];
            let b = self.values[i + 1].conj() * other.values[i + 1];
            acc += 0.5 * (p[i + 1] - p[i]) * (a + b);
        }
        acc
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn conjugated(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Pointwise sum; grids must match.
    pub fn added(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "sum needs matching grids");
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Largest sample magnitude.
    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_has_exact_flag() {
        let g = EnergyGrid::uniform(-1.0, 1.0, 16).unwrap();
        assert!(g.is_uniform());
        assert_eq!(g.len(), 16);
        assert_eq!(g.start(), -1.0);
        assert_eq!(g.stop(), 1.0);
    }

    #[test]
    fn too_few_points_rejected() {
        assert_eq!(
            EnergyGrid::uniform(0.0, 1.0, 7).unwrap_err(),
            GridError::TooFewPoints(7)
        );
    }

    #[test]
    fn non_increasing_rejected() {
        let pts = vec![0.0, 1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert!(matches!(
            EnergyGrid::new(pts),
            Err(GridError::NotIncreasing(2))
        ));
    }

    #[test]
    fn jittered_grid_not_uniform() {
        let mut pts: Vec<f64> = (0..16).map(|i| i as f64).collect();
        pts[7] += 1e-3;
        let g = EnergyGrid::new(pts).unwrap();
        assert!(!g.is_uniform());
    }

    #[test]
    fn norm_of_constant_function() {
        let g = EnergyGrid::uniform(0.0, 2.0, 64).unwrap();
        let f = SampledWaveFunction::from_fn(g, |_| Complex64::new(3.0, 0.0)).unwrap();
        assert!((f.norm_sq() - 18.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = EnergyGrid::uniform(0.0, 1.0, 8).unwrap();
        assert!(matches!(
            SampledWaveFunction::new(g, vec![Complex64::new(1.0, 0.0); 7]),
            Err(GridError::LengthMismatch { .. })
        ));
    }
}
