use crate::error::{Error, Result};

/// Minimum number of grid points accepted by the solver.
pub const MIN_POINTS: usize = 501;

/// Uniform grid on [x_min, x_max] including both hard-wall end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < 0.0 && 0.0 < x_max) {
            return Err(Error::InvalidGrid(format!(
                "need x_min < 0 < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        // Mirror-exact for symmetric grids: x(i) = -x(n-1-i) bit for bit.
        let n1 = (self.n_points - 1) as f64;
        let i = i as f64;
        (self.x_min * (n1 - i) + self.x_max * i) / n1
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-14 * self.x_max
    }

    /// Same interval with the spacing divided by `factor`; nodes of `self`
    /// remain nodes of the refined grid.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_points: (self.n_points - 1) * factor + 1,
            ..*self
        }
    }

    /// Trapezoid-rule integral of samples on this grid.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let n = self.n_points;
        let interior: f64 = (1..n - 1).map(&f).sum();
        (interior + 0.5 * (f(0) + f(n - 1))) * self.spacing()
    }
}
