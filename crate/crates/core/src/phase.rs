//! Phase diagrams over `(a, beta)` grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrnError};
use crate::model::ModelSpec;
use crate::montecarlo::{run_ensemble, EnsembleConfig, EnsembleSummary};
use crate::stationary::{
    asymmetric_threshold, beta1, cyclic_center_stability, cyclic_stationary_search,
    phase_symmetric_with_margin, Stability, SymmetricPhase,
};

/// Cells this close to a phase boundary are flagged marginal.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Width of the bracket left by boundary refinement.
pub const BOUNDARY_TOL: f64 = 1e-4;

/// Grid resolution of the stationary-point search used by cyclic sweeps.
pub const SWEEP_SEARCH_RESOLUTION: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Symmetric,
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "value", rename_all = "snake_case")]
pub enum CellLabel {
    Symmetric(SymmetricPhase),
    /// Stability of the centre.
    Cyclic(Stability),
}

impl CellLabel {
    pub fn label(self) -> &'static str {
        match self {
            CellLabel::Symmetric(p) => p.label(),
            CellLabel::Cyclic(s) => s.label(),
        }
    }
}

/// Ensemble outcome for one cell, with its consistency against the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCell {
    pub trajectories: usize,
    pub center_hits: usize,
    pub noncenter_hits: usize,
    pub unstable_hits: usize,
    pub cycling: usize,
    pub undetermined: usize,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub a: f64,
    pub beta: f64,
    pub label: CellLabel,
    pub marginal: bool,
    /// Cyclic sweeps with search: whether a stable point other than the
    /// centre exists.
    pub extra_stable: Option<bool>,
    pub empirical: Option<EmpiricalCell>,
}

impl PhaseCell {
    /// Text written to the label column.
    pub fn label_text(&self) -> &'static str {
        if self.marginal {
            "marginal"
        } else {
            self.label.label()
        }
    }
}

/// Labelled grid; `cells[i * beta_grid.len() + j]` is `(a_grid[i], beta_grid[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub kind: GridKind,
    pub a_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub margin: f64,
    pub cells: Vec<PhaseCell>,
}

impl PhaseGrid {
    pub fn cell(&self, i: usize, j: usize) -> &PhaseCell {
        &self.cells[i * self.beta_grid.len() + j]
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut PhaseCell {
        let nb = self.beta_grid.len();
        &mut self.cells[i * nb + j]
    }

    /// Index of the cell at exactly `(a, beta)`, if both are grid values.
    pub fn position(&self, a: f64, beta: f64) -> Option<(usize, usize)> {
        let i = self.a_grid.iter().position(|v| *v == a)?;
        let j = self.beta_grid.iter().position(|v| *v == beta)?;
        Some((i, j))
    }
}

/// Evenly spaced grid from `start` to `stop` inclusive.
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(UrnError::InvalidArgument(format!(
            "bad grid range {start}..={stop} step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Rounded to 12 decimals so that 0.05 * k prints as 0.05 * k.
    Ok((0..=n)
        .map(|k| {
            let v = start + step * k as f64;
            (v * 1e12).round() / 1e12
        })
        .collect())
}

fn validate_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(UrnError::InvalidArgument(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(UrnError::InvalidArgument(format!(
            "{name} grid must hold positive finite values"
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(UrnError::InvalidArgument(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

fn symmetric_cell(a: f64, beta: f64) -> Result<PhaseCell> {
    let v = phase_symmetric_with_margin(a, beta, BOUNDARY_MARGIN)?;
    Ok(PhaseCell {
        a,
        beta,
        label: CellLabel::Symmetric(v.phase),
        marginal: v.marginal,
        extra_stable: None,
        empirical: None,
    })
}

fn cyclic_cell(a: f64, beta: f64, with_search: bool) -> Result<PhaseCell> {
    let stability = cyclic_center_stability(a, beta)?;
    let marginal = crate::stationary::cyclic_threshold(a)
        .is_some_and(|t| (beta - t).abs() <= BOUNDARY_MARGIN);
    let extra_stable = if with_search {
        Some(cyclic_stationary_search(a, beta, SWEEP_SEARCH_RESOLUTION)?.has_noncenter_stable())
    } else {
        None
    };
    Ok(PhaseCell {
        a,
        beta,
        label: CellLabel::Cyclic(stability),
        marginal: marginal || stability == Stability::Marginal,
        extra_stable,
        empirical: None,
    })
}

fn sweep<F>(kind: GridKind, a_grid: &[f64], beta_grid: &[f64], cell: F) -> Result<PhaseGrid>
where
    F: Fn(f64, f64) -> Result<PhaseCell> + Sync,
{
    validate_grid("a", a_grid)?;
    validate_grid("beta", beta_grid)?;
    let coords: Vec<(f64, f64)> = a_grid
        .iter()
        .flat_map(|a| beta_grid.iter().map(move |b| (*a, *b)))
        .collect();
    let cells = coords
        .into_par_iter()
        .map(|(a, b)| cell(a, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseGrid {
        kind,
        a_grid: a_grid.to_vec(),
        beta_grid: beta_grid.to_vec(),
        margin: BOUNDARY_MARGIN,
        cells,
    })
}

/// Labels every cell with the phase of the equal-interaction three-colour model.
pub fn sweep_symmetric(a_grid: &[f64], beta_grid: &[f64]) -> Result<PhaseGrid> {
    sweep(GridKind::Symmetric, a_grid, beta_grid, symmetric_cell)
}

/// Labels every cell with the stability of the cyclic centre, and when
/// `with_search` is set, whether other stable stationary points exist.
pub fn sweep_cyclic(a_grid: &[f64], beta_grid: &[f64], with_search: bool) -> Result<PhaseGrid> {
    sweep(GridKind::Cyclic, a_grid, beta_grid, |a, b| cyclic_cell(a, b, with_search))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveId {
    /// `beta1(a)`: asymmetric stable points appear.
    Beta1,
    /// `(1 + 2a)/(1 - a)`: the centre loses stability.
    CenterInstability,
}

impl CurveId {
    pub fn label(self) -> &'static str {
        match self {
            CurveId::Beta1 => "beta1",
            CurveId::CenterInstability => "center_instability",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub a: f64,
    pub beta: f64,
    pub curve: CurveId,
}

/// The two symmetric phase boundaries evaluated on `a_grid`, curve by curve.
pub fn boundary_curves(a_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    validate_grid("a", a_grid)?;
    if let Some(a) = a_grid.iter().find(|a| **a >= 1.0) {
        return Err(UrnError::InvalidArgument(format!(
            "boundary curves need a < 1, got {a}"
        )));
    }
    let lower = a_grid
        .par_iter()
        .map(|a| {
            Ok(CurvePoint {
                a: *a,
                beta: beta1(*a)?,
                curve: CurveId::Beta1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let upper = a_grid.iter().map(|a| CurvePoint {
        a: *a,
        beta: asymmetric_threshold(*a),
        curve: CurveId::CenterInstability,
    });
    Ok(lower.into_iter().chain(upper).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    A,
    Beta,
}

/// A label change between adjacent cells, located to [`BOUNDARY_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub axis: Axis,
    pub a: f64,
    pub beta: f64,
    pub from: String,
    pub to: String,
}

/// Cell key compared across neighbours.
fn cell_key(kind: GridKind, a: f64, beta: f64, with_search: bool) -> Result<String> {
    let cell = match kind {
        GridKind::Symmetric => symmetric_cell(a, beta)?,
        GridKind::Cyclic => cyclic_cell(a, beta, with_search)?,
    };
    Ok(key_of(&cell))
}

fn key_of(cell: &PhaseCell) -> String {
    match cell.extra_stable {
        Some(true) => format!("{}+extra", cell.label.label()),
        _ => cell.label.label().to_string(),
    }
}

/// Bisects between two parameter values with different keys; returns the
/// final bracket.
fn refine<F: Fn(f64) -> Result<String>>(key: &F, mut lo: f64, mut hi: f64, key_lo: &str) -> Result<(f64, f64)> {
    while hi - lo > BOUNDARY_TOL {
        let mid = 0.5 * (lo + hi);
        if key(mid)? == key_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Every label change on `[lo, hi]`, left to right. Several boundaries can
/// fall between two neighbouring cells.
fn crossings_between<F: Fn(f64) -> Result<String>>(
    key: F,
    mut lo: f64,
    hi: f64,
    mut key_lo: String,
    key_hi: &str,
) -> Result<Vec<(f64, String, String)>> {
    let mut out = Vec::new();
    while key_lo != key_hi && out.len() < 8 {
        let (l, h) = refine(&key, lo, hi, &key_lo)?;
        let next = key(h)?;
        out.push((0.5 * (l + h), key_lo, next.clone()));
        lo = h;
        key_lo = next;
    }
    Ok(out)
}

/// Boundaries detected by label changes between neighbouring cells, each
/// refined by bisection. Marginal cells compare by their underlying label.
pub fn grid_crossings(grid: &PhaseGrid) -> Result<Vec<Crossing>> {
    let with_search = grid.cells.iter().any(|c| c.extra_stable.is_some());
    let (na, nb) = (grid.a_grid.len(), grid.beta_grid.len());
    let mut jobs = Vec::new();
    for i in 0..na {
        for j in 0..nb {
            if j + 1 < nb {
                jobs.push((Axis::Beta, i, j, i, j + 1));
            }
            if i + 1 < na {
                jobs.push((Axis::A, i, j, i + 1, j));
            }
        }
    }
    let found: Vec<Vec<Crossing>> = jobs
        .into_par_iter()
        .map(|(axis, i0, j0, i1, j1)| {
            let (c0, c1) = (grid.cell(i0, j0), grid.cell(i1, j1));
            let (k0, k1) = (key_of(c0), key_of(c1));
            if k0 == k1 {
                return Ok(Vec::new());
            }
            let found = match axis {
                Axis::Beta => crossings_between(
                    |b| cell_key(grid.kind, c0.a, b, with_search),
                    c0.beta,
                    c1.beta,
                    k0,
                    &k1,
                )?,
                Axis::A => crossings_between(
                    |a| cell_key(grid.kind, a, c0.beta, with_search),
                    c0.a,
                    c1.a,
                    k0,
                    &k1,
                )?,
            };
            Ok(found
                .into_iter()
                .map(|(v, from, to)| {
                    let (a, beta) = match axis {
                        Axis::Beta => (c0.a, v),
                        Axis::A => (v, c0.beta),
                    };
                    Crossing {
                        axis,
                        a,
                        beta,
                        from,
                        to,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Whether an ensemble outcome is consistent with a cell label.
pub fn consistent_with(label: CellLabel, summary: &EnsembleSummary) -> bool {
    let center = summary.center_hits();
    let other = summary.noncenter_hits();
    match label {
        CellLabel::Symmetric(SymmetricPhase::AsymmetricOnly) => center == 0,
        CellLabel::Symmetric(SymmetricPhase::Coexistence) => center > 0 && other > 0,
        CellLabel::Symmetric(_) => center > 0 && other == 0,
        CellLabel::Cyclic(Stability::LinearlyUnstable) => center == 0,
        CellLabel::Cyclic(Stability::LinearlyStable) => summary.cycling == 0,
        CellLabel::Cyclic(Stability::Marginal) => true,
    }
}

/// Runs an ensemble at each listed cell and records the outcome.
pub fn overlay_empirical(
    grid: &mut PhaseGrid,
    cells: &[(usize, usize)],
    trajectories: usize,
    steps: u64,
    base_seed: u64,
) -> Result<()> {
    for &(i, j) in cells {
        if i >= grid.a_grid.len() || j >= grid.beta_grid.len() {
            return Err(UrnError::InvalidArgument(format!("no cell ({i}, {j}) in grid")));
        }
    }
    for &(i, j) in cells {
        let (a, beta, label) = {
            let c = grid.cell(i, j);
            (c.a, c.beta, c.label)
        };
        let model = match grid.kind {
            GridKind::Symmetric => ModelSpec::symmetric(3, a, beta)?,
            GridKind::Cyclic => ModelSpec::cyclic(a, beta)?,
        };
        let cfg = EnsembleConfig::new(3, trajectories, steps, base_seed);
        let summary = run_ensemble(&model, &cfg)?;
        grid.cell_mut(i, j).empirical = Some(EmpiricalCell {
            trajectories: summary.trajectories,
            center_hits: summary.center_hits(),
            noncenter_hits: summary.noncenter_hits(),
            unstable_hits: summary.hits_with(Stability::LinearlyUnstable),
            cycling: summary.cycling,
            undetermined: summary.undetermined,
            consistent: consistent_with(label, &summary),
        });
    }
    Ok(())
}
