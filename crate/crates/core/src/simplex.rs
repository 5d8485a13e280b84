//! Points of the probability simplex and the two-dimensional chart used for
//! Jacobians and winding angles when there are three colours.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UrnError};

/// Allowed deviation of the coordinate sum from one.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A vector of proportions on the simplex `{x : x_i >= 0, sum x_i = 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(UrnError::InvalidArgument(format!(
                "a simplex point needs at least two coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(UrnError::InvalidArgument(format!(
                "simplex coordinate {bad} is negative or not finite"
            )));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(UrnError::InvalidArgument(format!(
                "simplex coordinates sum to {sum}, not 1"
            )));
        }
        Ok(Self { coords })
    }

    /// Rescales a nonnegative vector onto the simplex.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        let sum: f64 = raw.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(UrnError::InvalidArgument(format!(
                "cannot normalise {raw:?} onto the simplex"
            )));
        }
        Self::new(raw.iter().map(|v| v / sum).collect())
    }

    /// The barycentre `(1/d, ..., 1/d)`.
    pub fn center(d: usize) -> Self {
        Self {
            coords: vec![1.0 / d as f64; d],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|c| *c > 0.0)
    }

    /// Euclidean distance in the ambient space.
    pub fn distance(&self, other: &SimplexPoint) -> f64 {
        euclidean(&self.coords, &other.coords)
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = UrnError;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.coords
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The chart `(x1, x2, x3) -> (x1, x2)` on the two-simplex, with
/// `x3 = 1 - x1 - x2` recovered on the way back.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReducedCoordinates;

impl ReducedCoordinates {
    pub fn chart(p: &SimplexPoint) -> Result<[f64; 2]> {
        if p.dim() != 3 {
            return Err(UrnError::InvalidArgument(format!(
                "reduced coordinates are defined for three colours, got {}",
                p.dim()
            )));
        }
        Ok([p[0], p[1]])
    }

    /// Inverse chart. Fails when the image leaves the closed simplex.
    pub fn unchart(q: [f64; 2]) -> Result<SimplexPoint> {
        let x3 = 1.0 - q[0] - q[1];
        SimplexPoint::new(vec![q[0], q[1], x3])
    }

    /// Inverse chart without validation, for evaluating smooth extensions of
    /// the flow slightly off the simplex.
    pub fn unchart_raw(q: [f64; 2]) -> [f64; 3] {
        [q[0], q[1], 1.0 - q[0] - q[1]]
    }

    /// Chart image of the barycentre.
    pub fn center() -> [f64; 2] {
        [1.0 / 3.0, 1.0 / 3.0]
    }
}
