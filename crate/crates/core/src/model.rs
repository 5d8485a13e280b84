//! The interaction model: colour count, interaction matrix and reinforcement
//! exponent.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UrnError};

/// Parameters of a reinforced urn with interacting colours.
///
/// Colour `i` is drawn with probability proportional to
/// `u_i = sum_j A[i][j] * x_j^beta`, where `x` are the current ball counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct ModelSpec {
    d: usize,
    /// Row-major `d x d`.
    matrix: Vec<f64>,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    d: usize,
    matrix: Vec<Vec<f64>>,
    beta: f64,
}

impl TryFrom<RawModel> for ModelSpec {
    type Error = UrnError;

    fn try_from(raw: RawModel) -> Result<Self> {
        let m = ModelSpec::new(raw.matrix, raw.beta)?;
        if m.d != raw.d {
            return Err(UrnError::InvalidModel(format!(
                "declared d = {} but the matrix has {} rows",
                raw.d, m.d
            )));
        }
        Ok(m)
    }
}

impl From<ModelSpec> for RawModel {
    fn from(m: ModelSpec) -> Self {
        RawModel {
            d: m.d,
            matrix: m.rows().map(<[f64]>::to_vec).collect(),
            beta: m.beta,
        }
    }
}

/// Structured families with closed-form analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Unit diagonal, every off-diagonal entry equal to `a`.
    Symmetric { a: f64 },
    /// Three colours, `A = I + a P` with `P` the cyclic shift `i -> i + 1`.
    Cyclic { a: f64 },
    General,
}

impl ModelSpec {
    /// Builds a model from the rows of the interaction matrix.
    pub fn new(rows: Vec<Vec<f64>>, beta: f64) -> Result<Self> {
        let d = rows.len();
        if d < 2 {
            return Err(UrnError::InvalidModel(format!(
                "need at least two colours, got {d}"
            )));
        }
        let mut matrix = Vec::with_capacity(d * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(UrnError::InvalidModel(format!(
                    "row {} has {} entries, expected {d}",
                    i + 1,
                    row.len()
                )));
            }
            matrix.extend(row);
        }
        Self::from_flat(d, matrix, beta)
    }

    fn from_flat(d: usize, matrix: Vec<f64>, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(UrnError::InvalidModel(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        for (k, v) in matrix.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(UrnError::InvalidModel(format!(
                    "entry ({}, {}) = {v} is negative or not finite",
                    k / d + 1,
                    k % d + 1
                )));
            }
        }
        for (i, row) in matrix.chunks(d).enumerate() {
            if row.iter().all(|v| *v == 0.0) {
                return Err(UrnError::InvalidModel(format!(
                    "row {} has no positive entry",
                    i + 1
                )));
            }
        }
        Ok(Self { d, matrix, beta })
    }

    /// `A = (1 - a) I + a J`: self-weight one, cross-weight `a`.
    pub fn symmetric(d: usize, a: f64, beta: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(UrnError::InvalidModel(format!(
                "interaction strength must be positive, got {a}"
            )));
        }
        let matrix = (0..d * d)
            .map(|k| if k / d == k % d { 1.0 } else { a })
            .collect();
        Self::from_flat(d, matrix, beta)
    }

    /// Three colours where colour `i` is also reinforced by colour `i + 1`
    /// (mod 3) with weight `a`.
    pub fn cyclic(a: f64, beta: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(UrnError::InvalidModel(format!(
                "interaction strength must be positive, got {a}"
            )));
        }
        let mut matrix = vec![0.0; 9];
        for i in 0..3 {
            matrix[i * 3 + i] = 1.0;
            matrix[i * 3 + (i + 1) % 3] = a;
        }
        Self::from_flat(3, matrix, beta)
    }

    /// No interaction; `beta = 1` is the classical Pólya urn.
    pub fn identity(d: usize, beta: f64) -> Result<Self> {
        let matrix = (0..d * d)
            .map(|k| if k / d == k % d { 1.0 } else { 0.0 })
            .collect();
        Self::from_flat(d, matrix, beta)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.d + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.matrix.chunks(self.d)
    }

    /// Recognises the structured families from the matrix entries.
    pub fn family(&self) -> Family {
        let d = self.d;
        let diag_unit = (0..d).all(|i| self.entry(i, i) == 1.0);
        if !diag_unit {
            return Family::General;
        }
        let off = self.entry(0, 1);
        if off > 0.0 && (0..d).all(|i| (0..d).all(|j| i == j || self.entry(i, j) == off)) {
            return Family::Symmetric { a: off };
        }
        if d == 3 {
            let a = self.entry(0, 1);
            let cyclic = a > 0.0
                && (0..3).all(|i| {
                    self.entry(i, (i + 1) % 3) == a && self.entry(i, (i + 2) % 3) == 0.0
                });
            if cyclic {
                return Family::Cyclic { a };
            }
        }
        Family::General
    }

    /// `u = A (x^beta)` for nonnegative `x`. The result is scaled by
    /// `max(x)^-beta` so large counts neither overflow nor lose the ratio.
    pub(crate) fn weights_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.d;
        let scale = x.iter().cloned().fold(0.0f64, f64::max);
        let mut powered = [0.0f64; 8];
        let mut heap;
        let pw: &mut [f64] = if d <= powered.len() {
            &mut powered[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap[..]
        };
        for (p, v) in pw.iter_mut().zip(x) {
            *p = if *v == 0.0 { 0.0 } else { (v / scale).powf(self.beta) };
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.matrix[i * d..(i + 1) * d]
                .iter()
                .zip(pw.iter())
                .map(|(a, p)| a * p)
                .sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_matrices() {
        assert!(ModelSpec::new(vec![vec![1.0]], 1.0).is_err());
        assert!(ModelSpec::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]], 1.0).is_err());
        assert!(ModelSpec::new(vec![vec![1.0, -0.1], vec![0.0, 1.0]], 1.0).is_err());
        assert!(ModelSpec::new(vec![vec![1.0, 0.0], vec![0.0]], 1.0).is_err());
        assert!(ModelSpec::identity(3, 0.0).is_err());
        assert!(ModelSpec::identity(3, f64::NAN).is_err());
    }

    #[test]
    fn recognises_families() {
        assert_eq!(
            ModelSpec::symmetric(3, 0.2, 2.0).unwrap().family(),
            Family::Symmetric { a: 0.2 }
        );
        assert_eq!(
            ModelSpec::cyclic(0.5, 2.0).unwrap().family(),
            Family::Cyclic { a: 0.5 }
        );
        assert_eq!(ModelSpec::identity(3, 2.0).unwrap().family(), Family::General);
        let m = ModelSpec::new(
            vec![vec![1.0, 0.3, 0.2], vec![0.2, 1.0, 0.3], vec![0.3, 0.2, 1.0]],
            2.0,
        )
        .unwrap();
        assert_eq!(m.family(), Family::General);
    }

    #[test]
    fn serde_round_trip() {
        let m = ModelSpec::cyclic(1.0, 6.0).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
        assert!(serde_json::from_str::<ModelSpec>(
            r#"{"d":3,"matrix":[[1,0],[0,1]],"beta":1}"#
        )
        .is_err());
    }
}
