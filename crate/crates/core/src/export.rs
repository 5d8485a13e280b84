//! Text formats: trajectory CSV/JSON, phase-grid CSV and interaction-matrix
//! files. Writing to disk is left to the caller.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelSpec;
use crate::phase::{Crossing, CurvePoint, PhaseGrid};
use crate::urn::TrajectoryRecord;

/// `v` with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header `step,x1,...,xd` and one row per stored sample.
pub fn trajectory_csv(traj: &TrajectoryRecord) -> String {
    let d = traj.final_point().dim();
    let mut out = String::from("step");
    for i in 1..=d {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for (t, p) in traj.times.iter().zip(&traj.points) {
        let _ = write!(out, "{t}");
        for v in p.coords() {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn trajectory_json(traj: &TrajectoryRecord) -> serde_json::Result<String> {
    serde_json::to_string_pretty(traj)
}

/// What is needed to regenerate one trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySidecar {
    pub seed: u64,
    pub model: ModelSpec,
    pub initial_counts: Vec<u64>,
    pub steps: u64,
    pub thinning: u64,
}

/// `a,beta,label[,empirical]`, one row per cell in grid order. The
/// empirical column is present when any cell carries an ensemble outcome.
pub fn phase_csv(grid: &PhaseGrid) -> String {
    let empirical = grid.cells.iter().any(|c| c.empirical.is_some());
    let mut out = String::from(if empirical {
        "a,beta,label,empirical\n"
    } else {
        "a,beta,label\n"
    });
    for c in &grid.cells {
        let mut label = c.label_text().to_string();
        if c.extra_stable == Some(true) {
            label.push_str("+extra");
        }
        let _ = write!(out, "{},{},{label}", fmt_f64(c.a), fmt_f64(c.beta));
        if empirical {
            let e = match &c.empirical {
                Some(e) if e.consistent => "consistent",
                Some(_) => "inconsistent",
                None => "",
            };
            let _ = write!(out, ",{e}");
        }
        out.push('\n');
    }
    out
}

/// `a,beta,curve_id`, one row per curve point.
pub fn boundaries_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("a,beta,curve_id\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", fmt_f64(p.a), fmt_f64(p.beta), p.curve.label());
    }
    out
}

/// Grid crossings in the boundary format, with `curve_id` naming the two
/// labels on either side.
pub fn crossings_csv(crossings: &[Crossing]) -> String {
    let mut out = String::from("a,beta,curve_id\n");
    for c in crossings {
        let _ = writeln!(
            out,
            "{},{},{}|{}",
            fmt_f64(c.a),
            fmt_f64(c.beta),
            c.from,
            c.to
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixParseError {
    #[error("matrix file has no rows")]
    Empty,
    #[error("row {row}, column {col} (line {line}): cannot parse {token:?} as a number")]
    BadEntry {
        line: usize,
        row: usize,
        col: usize,
        token: String,
    },
    #[error("row {row}, column {col} (line {line}): entry {value} is not a finite nonnegative number")]
    BadValue {
        line: usize,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("row {row} (line {line}) has {found} entries, expected {expected}")]
    Ragged {
        line: usize,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("matrix has {rows} rows of {cols} entries; it must be square")]
    NotSquare { rows: usize, cols: usize },
}

/// Parses a square matrix with whitespace-separated entries, one row per
/// line. Blank lines and lines starting with `#` are skipped.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, MatrixParseError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (line_no, row) = (idx + 1, rows.len() + 1);
        let mut entries = Vec::new();
        for (c, token) in line.split_whitespace().enumerate() {
            let value: f64 = token.parse().map_err(|_| MatrixParseError::BadEntry {
                line: line_no,
                row,
                col: c + 1,
                token: token.to_string(),
            })?;
            if !value.is_finite() || value < 0.0 {
                return Err(MatrixParseError::BadValue {
                    line: line_no,
                    row,
                    col: c + 1,
                    value,
                });
            }
            entries.push(value);
        }
        if let Some(first) = rows.first() {
            if entries.len() != first.len() {
                return Err(MatrixParseError::Ragged {
                    line: line_no,
                    row,
                    expected: first.len(),
                    found: entries.len(),
                });
            }
        }
        rows.push(entries);
    }
    match rows.first() {
        None => Err(MatrixParseError::Empty),
        Some(first) if first.len() != rows.len() => Err(MatrixParseError::NotSquare {
            rows: rows.len(),
            cols: first.len(),
        }),
        Some(_) => Ok(rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urn::{simulate, SimulationParams, UrnState};

    #[test]
    fn floats_round_trip() {
        for v in [1.0 / 3.0, 0.1, 1e-300, 0.630_601_937_481_890_6, 5e-324] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn trajectory_csv_shape() {
        let m = ModelSpec::symmetric(3, 0.2, 2.0).unwrap();
        let t = simulate(&m, &UrnState::uniform(3), &SimulationParams::new(1000, 1)).unwrap();
        let csv = trajectory_csv(&t);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,x1,x2,x3");
        assert_eq!(lines.len(), t.len() + 1);
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        assert_eq!(last[0], "1000");
        let back: Vec<f64> = last[1..].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(back, t.final_point().coords());
        let json = trajectory_json(&t).unwrap();
        let again: TrajectoryRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn matrix_parser() {
        let m = parse_matrix("# cyclic\n1 1 0\n0 1 1\n\n1 0 1\n").unwrap();
        assert_eq!(m, vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0]]);
        assert_eq!(parse_matrix("  \n# nothing\n"), Err(MatrixParseError::Empty));
        assert_eq!(
            parse_matrix("1 0\n0 x\n"),
            Err(MatrixParseError::BadEntry {
                line: 2,
                row: 2,
                col: 2,
                token: "x".into()
            })
        );
        assert!(matches!(
            parse_matrix("1 NaN\n0 1\n"),
            Err(MatrixParseError::BadValue { row: 1, col: 2, .. })
        ));
        assert!(matches!(
            parse_matrix("1 0\n-1 1\n"),
            Err(MatrixParseError::BadValue { row: 2, col: 1, .. })
        ));
        assert_eq!(
            parse_matrix("1 0\n0 1 0\n"),
            Err(MatrixParseError::Ragged {
                line: 2,
                row: 2,
                expected: 2,
                found: 3
            })
        );
        assert_eq!(
            parse_matrix("1 0 0\n0 1 0\n"),
            Err(MatrixParseError::NotSquare { rows: 2, cols: 3 })
        );
        let err = parse_matrix("1 0\n0 -2\n").unwrap_err().to_string();
        assert!(err.contains("row 2, column 2"), "{err}");
    }
}
