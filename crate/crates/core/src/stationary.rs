//! Stationary points of the mean-field flow and their stability, for the
//! equal-interaction model (three and two colours) and the cyclic model.
//!
//! In the three-colour equal-interaction model every stationary point has two
//! equal coordinates and is `(1, 1, r) / (r + 2)` up to permutation, with `r`
//! a positive root of `P(z) = a z^(b+1) - z^b + (1 + a) z - 2a`. A point is
//! linearly stable when both the slope along its invariant diagonal,
//! `P'(r)`, and the transverse margin `(r^b + 2)/(r + 2) - b (1 - a)/(2a + 1)`
//! are positive.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrnError};
use crate::field::{
    eigenvalues_2x2, jacobian_reduced_unchecked, VectorField, DEFAULT_FD_STEP,
};
use crate::model::ModelSpec;
use crate::poly::{bisect, find_positive_roots, PolyParams};
use crate::simplex::{ReducedCoordinates, SimplexPoint};

/// Band around zero inside which a stability criterion counts as marginal.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Residual accepted by [`classify_stationary`] for its root argument.
pub const CLASSIFY_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    LinearlyStable,
    LinearlyUnstable,
    Marginal,
}

impl Stability {
    /// Verdict from the largest real part of the linearisation.
    pub fn from_max_real_part(re: f64, tol: f64) -> Self {
        if re < -tol {
            Stability::LinearlyStable
        } else if re > tol {
            Stability::LinearlyUnstable
        } else {
            Stability::Marginal
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Stability::LinearlyStable => "stable",
            Stability::LinearlyUnstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

/// A zero of the equal-interaction drift generated by a root `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub location: SimplexPoint,
    pub r: f64,
    /// Coordinate holding `r / (r + 2)`; `None` for the centre.
    pub axis: Option<usize>,
    pub stability: Stability,
    pub multiplicity: u8,
}

impl StationaryPoint {
    pub fn is_center(&self) -> bool {
        self.axis.is_none()
    }
}

/// Sign pattern of the two stability criteria at a root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityMargins {
    /// `P'(r)`: attraction along the invariant diagonal.
    pub along: f64,
    /// `(r^b + 2)/(r + 2) - b (1 - a)/(2a + 1)`: attraction across it.
    pub across: f64,
}

pub fn stability_margins(a: f64, beta: f64, r: f64) -> Result<StabilityMargins> {
    let params = PolyParams::three_type(a, beta)?;
    let (_, along) = params.eval(r);
    let across = (r.powf(beta) + 2.0) / (r + 2.0) - beta * (1.0 - a) / (2.0 * a + 1.0);
    Ok(StabilityMargins { along, across })
}

/// Linear stability of the stationary point generated by the root `r`.
pub fn classify_stationary(a: f64, beta: f64, r: f64) -> Result<Stability> {
    let params = PolyParams::three_type(a, beta)?;
    if !(r > 0.0) || params.scaled_residual(r) > CLASSIFY_RESIDUAL_TOL {
        return Err(UrnError::NotARoot {
            value: r,
            residual: params.value(r).abs(),
        });
    }
    let m = stability_margins(a, beta, r)?;
    Ok(if m.along < -MARGINAL_TOL || m.across < -MARGINAL_TOL {
        Stability::LinearlyUnstable
    } else if m.along > MARGINAL_TOL && m.across > MARGINAL_TOL {
        Stability::LinearlyStable
    } else {
        Stability::Marginal
    })
}

/// `(1, 1, r) / (r + 2)` with `r` placed at `axis`.
pub fn point_from_root(r: f64, axis: usize) -> SimplexPoint {
    let mut coords = vec![1.0 / (r + 2.0); 3];
    coords[axis] = r / (r + 2.0);
    SimplexPoint::normalized(&coords).expect("positive coordinates")
}

/// Every stationary point of the three-colour equal-interaction flow.
pub fn enumerate_stationary_points(a: f64, beta: f64) -> Result<Vec<StationaryPoint>> {
    let roots = find_positive_roots(&PolyParams::three_type(a, beta)?)?;
    let mut points = Vec::with_capacity(7);
    for root in roots {
        let stability = if root.multiplicity > 1 {
            Stability::Marginal
        } else {
            classify_stationary(a, beta, root.value)?
        };
        if root.value == 1.0 {
            points.push(StationaryPoint {
                location: SimplexPoint::center(3),
                r: 1.0,
                axis: None,
                stability,
                multiplicity: root.multiplicity,
            });
        } else {
            for axis in 0..3 {
                points.push(StationaryPoint {
                    location: point_from_root(root.value, axis),
                    r: root.value,
                    axis: Some(axis),
                    stability,
                    multiplicity: root.multiplicity,
                });
            }
        }
    }
    Ok(points)
}

/// Upper edge `(1 + 2a)/(1 - a)` of the coexistence phase, for `a < 1`.
pub fn asymmetric_threshold(a: f64) -> f64 {
    (1.0 + 2.0 * a) / (1.0 - a)
}

fn check_subcritical(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(UrnError::InvalidArgument(format!(
            "need 0 < a < 1, got {a}"
        )));
    }
    Ok(())
}

/// `(b - 1) ln((b - 1) / ((b + 1) a)) - ln(1 + a)`; zero at `beta0(a)`.
fn beta0_residual_log(a: f64, beta: f64) -> f64 {
    (beta - 1.0) * ((beta - 1.0) / ((beta + 1.0) * a)).ln() - (1.0 + a).ln()
}

/// `((1 - 2/(b + 1)) / a)^(b - 1) - (1 + a)`.
pub fn beta0_residual(a: f64, beta: f64) -> f64 {
    ((1.0 - 2.0 / (beta + 1.0)) / a).powf(beta - 1.0) - (1.0 + a)
}

/// The exponent below which `P` is increasing on all of `(0, inf)`.
pub fn beta0(a: f64) -> Result<f64> {
    check_subcritical(a)?;
    // At (1 + a)/(1 - a) the base equals one, so the residual is -ln(1 + a).
    let lo = (1.0 + a) / (1.0 - a);
    let mut hi = 2.0 * lo;
    while beta0_residual_log(a, hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(UrnError::RootCertification(format!(
                "no upper bracket for beta0({a})"
            )));
        }
    }
    bisect(|b| beta0_residual_log(a, b), lo, hi)
}

fn has_three_roots(a: f64, beta: f64) -> Result<bool> {
    let roots = find_positive_roots(&PolyParams::three_type(a, beta)?)?;
    Ok(roots.iter().map(|r| r.multiplicity).sum::<u8>() == 3)
}

/// Default bisection width for [`beta1`].
pub const BETA1_TOL: f64 = 1e-10;

/// The exponent above which two further positive roots appear.
pub fn beta1(a: f64) -> Result<f64> {
    beta1_with_tol(a, BETA1_TOL)
}

pub fn beta1_with_tol(a: f64, tol: f64) -> Result<f64> {
    check_subcritical(a)?;
    let mut lo = beta0(a)?;
    let mut hi = asymmetric_threshold(a);
    if has_three_roots(a, lo)? || !has_three_roots(a, hi)? {
        return Err(UrnError::NonMonotone { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if has_three_roots(a, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetricPhase {
    /// Only the centre is a limit.
    SymmetricOnly,
    /// The centre and three asymmetric points are all possible limits.
    Coexistence,
    /// Only the three asymmetric points are limits.
    AsymmetricOnly,
    /// `a >= 1`: the centre is the limit.
    SupercriticalA,
}

impl SymmetricPhase {
    pub fn label(self) -> &'static str {
        match self {
            SymmetricPhase::SymmetricOnly => "symmetric-only",
            SymmetricPhase::Coexistence => "coexistence",
            SymmetricPhase::AsymmetricOnly => "asymmetric-only",
            SymmetricPhase::SupercriticalA => "supercritical-a",
        }
    }

    pub fn center_is_limit(self) -> bool {
        !matches!(self, SymmetricPhase::AsymmetricOnly)
    }

    pub fn asymmetric_is_limit(self) -> bool {
        matches!(self, SymmetricPhase::Coexistence | SymmetricPhase::AsymmetricOnly)
    }
}

/// Phase label with the boundary values it was decided against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseVerdict {
    pub phase: SymmetricPhase,
    /// Within the margin of a phase boundary.
    pub marginal: bool,
    pub beta1: Option<f64>,
    pub upper: Option<f64>,
}

pub fn phase_symmetric(a: f64, beta: f64) -> Result<PhaseVerdict> {
    phase_symmetric_with_margin(a, beta, MARGINAL_TOL)
}

pub fn phase_symmetric_with_margin(a: f64, beta: f64, margin: f64) -> Result<PhaseVerdict> {
    if !(a > 0.0) || !(beta > 0.0) {
        return Err(UrnError::InvalidArgument(format!(
            "need a > 0 and beta > 0, got a = {a}, beta = {beta}"
        )));
    }
    if a >= 1.0 {
        return Ok(PhaseVerdict {
            phase: SymmetricPhase::SupercriticalA,
            marginal: (a - 1.0).abs() <= margin,
            beta1: None,
            upper: None,
        });
    }
    let b1 = beta1(a)?;
    let upper = asymmetric_threshold(a);
    let phase = if beta < b1 {
        SymmetricPhase::SymmetricOnly
    } else if beta < upper {
        SymmetricPhase::Coexistence
    } else {
        SymmetricPhase::AsymmetricOnly
    };
    Ok(PhaseVerdict {
        phase,
        marginal: (beta - b1).abs() <= margin || (beta - upper).abs() <= margin,
        beta1: Some(b1),
        upper: Some(upper),
    })
}

/// Root in `(0, 1)` of `a z^(b+1) - z^b + z - a`, present exactly when
/// `((1 - a)/(1 + a)) b > 1`. The two-colour limits are then
/// `(1, r)/(1 + r)` and its mirror image.
pub fn two_type_root(a: f64, beta: f64) -> Result<Option<f64>> {
    let params = PolyParams::two_type(a, beta)?;
    if (1.0 - a) / (1.0 + a) * beta <= 1.0 {
        return Ok(None);
    }
    // P'(1) < 0 here, so P rises on (0, c1) to a positive maximum before
    // falling back to P(1) = 0.
    let c1 = bisect(|z| params.derivative(z), 0.0, 1.0)?;
    let r = bisect(|z| params.value(z), 0.0, c1)?;
    Ok(Some(r))
}

/// Stationary points of the two-colour equal-interaction flow.
pub fn two_type_stationary_points(a: f64, beta: f64) -> Result<Vec<SimplexPoint>> {
    let mut pts = vec![SimplexPoint::center(2)];
    if let Some(r) = two_type_root(a, beta)? {
        pts.push(SimplexPoint::normalized(&[1.0, r])?);
        pts.push(SimplexPoint::normalized(&[r, 1.0])?);
    }
    Ok(pts)
}

/// Critical exponent `2(1 + a)/(2 - a)` of the cyclic centre, for `a < 2`.
pub fn cyclic_threshold(a: f64) -> Option<f64> {
    (a < 2.0).then(|| 2.0 * (1.0 + a) / (2.0 - a))
}

/// Stability of the centre of the cyclic flow. The centre eigenvalues are
/// `b (1 + a w)/(1 + a) - 1` with `w` a primitive cube root of unity.
pub fn cyclic_center_stability(a: f64, beta: f64) -> Result<Stability> {
    if !(a > 0.0) || !(beta > 0.0) {
        return Err(UrnError::InvalidArgument(format!(
            "need a > 0 and beta > 0, got a = {a}, beta = {beta}"
        )));
    }
    Ok(match cyclic_threshold(a) {
        None => Stability::LinearlyStable,
        Some(t) if beta < t - MARGINAL_TOL => Stability::LinearlyStable,
        Some(t) if beta > t + MARGINAL_TOL => Stability::LinearlyUnstable,
        Some(_) => Stability::Marginal,
    })
}

/// A zero of a general three-colour drift located numerically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowStationaryPoint {
    pub location: SimplexPoint,
    pub residual: f64,
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
}

impl FlowStationaryPoint {
    pub fn is_center(&self) -> bool {
        self.location.distance(&SimplexPoint::center(3)) < 1e-8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarySearch {
    pub points: Vec<FlowStationaryPoint>,
    /// Grid minima that came close to a zero but could not be certified.
    pub unrefined: Vec<SimplexPoint>,
}

impl StationarySearch {
    pub fn has_noncenter_stable(&self) -> bool {
        self.points
            .iter()
            .any(|p| !p.is_center() && p.stability == Stability::LinearlyStable)
    }
}

/// Residual `|F|` accepted for a located zero.
pub const SEARCH_RESIDUAL_TOL: f64 = 1e-10;

/// Default grid resolution of [`grid_stationary_search`].
pub const DEFAULT_SEARCH_RESOLUTION: usize = 400;

const EIGEN_TOL: f64 = 1e-6;

fn drift_norm<F: VectorField + ?Sized>(field: &F, x: &[f64; 3]) -> f64 {
    let mut out = [0.0; 3];
    field.eval(x, &mut out);
    out.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Damped Newton in the reduced chart. Returns the final chart point and
/// `|F|` there.
fn newton_refine<F: VectorField + ?Sized>(field: &F, start: [f64; 2]) -> ([f64; 2], f64) {
    let mut q = start;
    let mut x = ReducedCoordinates::unchart_raw(q);
    let mut norm = drift_norm(field, &x);
    let mut out = [0.0; 3];
    for _ in 0..100 {
        if norm < SEARCH_RESIDUAL_TOL * 1e-2 {
            break;
        }
        let min_coord = x.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min_coord > 0.0) {
            break;
        }
        let h = (0.1 * min_coord).min(DEFAULT_FD_STEP);
        let point = match SimplexPoint::normalized(&x) {
            Ok(p) => p,
            Err(_) => break,
        };
        let Ok(j) = jacobian_reduced_unchecked(field, &point, h) else {
            break;
        };
        field.eval(&x, &mut out);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dx = -(j[1][1] * out[0] - j[0][1] * out[1]) / det;
        let dy = -(-j[1][0] * out[0] + j[0][0] * out[1]) / det;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-6 {
            let cand = [q[0] + t * dx, q[1] + t * dy];
            let cx = ReducedCoordinates::unchart_raw(cand);
            if cx.iter().all(|c| *c > 0.0) {
                let cn = drift_norm(field, &cx);
                if cn < norm {
                    q = cand;
                    x = cx;
                    norm = cn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (q, norm)
}

/// Grid scan of `|F|` over the open two-simplex followed by Newton refinement
/// of every discrete local minimum. Works for any three-colour field.
pub fn grid_stationary_search<F: VectorField + Sync + ?Sized>(
    field: &F,
    resolution: usize,
) -> Result<StationarySearch> {
    if field.dim() != 3 {
        return Err(UrnError::InvalidArgument(
            "grid search needs three colours".into(),
        ));
    }
    if resolution < 4 {
        return Err(UrnError::InvalidArgument(format!(
            "grid resolution must be at least 4, got {resolution}"
        )));
    }
    let n = resolution;
    let h = 1.0 / n as f64;
    // norms[i][j] for i, j >= 1, i + j <= n - 1.
    let norms: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == 0 || j == 0 || i + j >= n {
                        f64::INFINITY
                    } else {
                        let x = ReducedCoordinates::unchart_raw([i as f64 * h, j as f64 * h]);
                        drift_norm(field, &x)
                    }
                })
                .collect()
        })
        .collect();

    let neighbours: [(isize, isize); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];
    let mut minima = Vec::new();
    for i in 1..n {
        for j in 1..n - i {
            let v = norms[i][j];
            let is_min = neighbours.iter().all(|(di, dj)| {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni as usize >= n || nj as usize >= n {
                    return true;
                }
                v <= norms[ni as usize][nj as usize]
            });
            if is_min {
                minima.push([i as f64 * h, j as f64 * h]);
            }
        }
    }

    let refined: Vec<([f64; 2], f64)> = minima
        .par_iter()
        .map(|q| newton_refine(field, *q))
        .collect();

    let mut points: Vec<FlowStationaryPoint> = Vec::new();
    let mut unrefined = Vec::new();
    for (q, norm) in refined {
        let x = ReducedCoordinates::unchart_raw(q);
        let Ok(location) = SimplexPoint::normalized(&x) else {
            continue;
        };
        if norm < SEARCH_RESIDUAL_TOL && location.is_interior() {
            if points.iter().any(|p| p.location.distance(&location) < 1e-7) {
                continue;
            }
            let step = (0.1 * x.iter().cloned().fold(f64::INFINITY, f64::min)).min(DEFAULT_FD_STEP);
            let jac = jacobian_reduced_unchecked(field, &location, step)?;
            let eigenvalues = eigenvalues_2x2(jac);
            let stability = Stability::from_max_real_part(eigenvalues[0].re, EIGEN_TOL);
            points.push(FlowStationaryPoint {
                location,
                residual: norm,
                eigenvalues,
                stability,
            });
        } else if norm < 1e-6
            && !unrefined
                .iter()
                .any(|p: &SimplexPoint| p.distance(&location) < 1e-4)
        {
            unrefined.push(location);
        }
    }
    points.sort_by(|p, q| {
        p.location.coords()
            .iter()
            .zip(q.location.coords())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(StationarySearch { points, unrefined })
}

/// Numerical stationary points of the cyclic flow `A = I + a P`.
pub fn cyclic_stationary_search(a: f64, beta: f64, resolution: usize) -> Result<StationarySearch> {
    let model = ModelSpec::cyclic(a, beta)?;
    grid_stationary_search(&model, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{drift, f_symmetric, jacobian_reduced};

    fn quadratic_roots(a: f64) -> (f64, f64) {
        let disc = (1.0 - 2.0 * a - 7.0 * a * a).sqrt();
        ((1.0 - a - disc) / (2.0 * a), (1.0 - a + disc) / (2.0 * a))
    }

    #[test]
    fn classification_examples() {
        let (_, hi) = quadratic_roots(0.2);
        assert_eq!(classify_stationary(0.2, 2.0, hi).unwrap(), Stability::LinearlyStable);
        assert_eq!(classify_stationary(0.2, 2.0, 1.0).unwrap(), Stability::LinearlyUnstable);
        assert_eq!(classify_stationary(0.25, 2.0, 1.0).unwrap(), Stability::Marginal);
        assert!(matches!(
            classify_stationary(0.2, 2.0, 2.0),
            Err(UrnError::NotARoot { .. })
        ));
    }

    #[test]
    fn enumeration_counts_and_verdicts() {
        let pts = enumerate_stationary_points(0.5, 2.0).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].is_center());
        assert_eq!(pts[0].stability, Stability::LinearlyStable);

        let pts = enumerate_stationary_points(0.2, 2.0).unwrap();
        assert_eq!(pts.len(), 7);
        let (lo, hi) = quadratic_roots(0.2);
        for p in &pts {
            let expected = if p.is_center() || (p.r - lo).abs() < 1e-9 {
                Stability::LinearlyUnstable
            } else {
                assert!((p.r - hi).abs() < 1e-9);
                Stability::LinearlyStable
            };
            assert_eq!(p.stability, expected, "{p:?}");
        }
        let stable: Vec<_> = pts.iter().filter(|p| p.stability == Stability::LinearlyStable).collect();
        assert_eq!(stable.len(), 3);
        assert!(stable.iter().any(|p| {
            p.location.distance(&SimplexPoint::new(vec![0.1847, 0.1847, 0.6306]).unwrap()) < 1e-4
        }));

        let pts = enumerate_stationary_points(0.26, 2.0).unwrap();
        assert_eq!(pts.len(), 7);
        let center = pts.iter().find(|p| p.is_center()).unwrap();
        assert_eq!(center.stability, Stability::LinearlyStable);
        let (r1, r2) = quadratic_roots(0.26);
        for p in pts.iter().filter(|p| !p.is_center()) {
            if (p.r - r1).abs() < 1e-9 {
                assert_eq!(p.stability, Stability::LinearlyUnstable);
            } else {
                assert!((p.r - r2).abs() < 1e-9);
                assert_eq!(p.stability, Stability::LinearlyStable);
            }
        }

        // Double roots collapse to marginal points: four in total.
        let pts = enumerate_stationary_points(0.25, 2.0).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].stability, Stability::Marginal);
    }

    #[test]
    fn enumerated_points_are_zeros_and_match_jacobians() {
        for &(a, beta) in &[(0.2, 2.0), (0.26, 2.0), (0.3, 3.0), (0.35, 3.0), (0.1, 5.0), (0.6, 2.5)] {
            for p in enumerate_stationary_points(a, beta).unwrap() {
                let f = f_symmetric(a, beta, p.location.coords());
                assert!(f.iter().all(|v| v.abs() < 1e-8), "{a} {beta} {p:?} {f:?}");
                if p.stability == Stability::Marginal {
                    continue;
                }
                let m = ModelSpec::symmetric(3, a, beta).unwrap();
                let j = jacobian_reduced(&m, &p.location, DEFAULT_FD_STEP).unwrap();
                let re = eigenvalues_2x2(j)[0].re;
                let expected = if re < 0.0 { Stability::LinearlyStable } else { Stability::LinearlyUnstable };
                assert_eq!(p.stability, expected, "a={a} beta={beta} r={} re={re}", p.r);
            }
        }
    }

    #[test]
    fn beta1_anchors() {
        let a = (8f64.sqrt() - 1.0) / 7.0;
        assert!((beta1(a).unwrap() - 2.0).abs() < 1e-4);
        assert!((beta1(0.4160306).unwrap() - 3.0).abs() < 1e-3);
        let b9 = beta1(0.9).unwrap();
        assert!(b9 > 1.0 && b9 < asymmetric_threshold(0.9));
        assert!(b9 > beta1(0.5).unwrap());
        assert!(beta1(1.0).is_err());
    }

    #[test]
    fn beta1_matches_root_count_scan() {
        // Oracle: the first grid exponent with three roots.
        let a = 0.9;
        let b1 = beta1(a).unwrap();
        let mut beta = 1.0;
        while !has_three_roots(a, beta).unwrap() {
            beta += 0.01;
        }
        assert!(beta >= b1 && beta - b1 < 0.01 + 1e-9, "scan {beta} vs {b1}");
    }

    #[test]
    fn beta0_properties() {
        let b = beta0(0.5).unwrap();
        assert!(b > 3.0 && b < 28.0);
        // Oracle: sign change of the defining equation on a 0.001 grid.
        let mut g = 3.0 + 1e-9;
        while beta0_residual(0.5, g) < 0.0 {
            g += 0.001;
        }
        assert!((g - b).abs() <= 0.001 + 1e-9);
        for a in [0.05, 0.3, 0.5, 0.9] {
            let b = beta0(a).unwrap();
            assert!(beta0_residual(a, b).abs() < 1e-9, "a={a}");
            assert!(b > 2.0 / (1.0 - a) - 1.0);
            assert!(b <= beta1(a).unwrap() + 1e-9);
        }
        assert!(beta0(0.9).unwrap() > 19.0);
    }

    #[test]
    fn phase_examples() {
        assert_eq!(phase_symmetric(0.2, 2.0).unwrap().phase, SymmetricPhase::AsymmetricOnly);
        assert_eq!(phase_symmetric(0.26, 2.0).unwrap().phase, SymmetricPhase::Coexistence);
        assert_eq!(phase_symmetric(2.0, 10.0).unwrap().phase, SymmetricPhase::SupercriticalA);
        assert_eq!(phase_symmetric(0.5, 2.0).unwrap().phase, SymmetricPhase::SymmetricOnly);
        assert!(phase_symmetric(0.25, 2.0).unwrap().marginal);
    }

    #[test]
    fn phase_order_in_beta() {
        let a = 0.3;
        let b1 = beta1(a).unwrap();
        let upper = 1.6 / 0.7;
        let mut seen = Vec::new();
        let mut beta = 1.0;
        while beta < 4.0 {
            let ph = phase_symmetric(a, beta).unwrap().phase;
            if seen.last() != Some(&ph) {
                seen.push(ph);
            }
            beta += 0.01;
        }
        assert_eq!(
            seen,
            vec![SymmetricPhase::SymmetricOnly, SymmetricPhase::Coexistence, SymmetricPhase::AsymmetricOnly]
        );
        assert!(b1 < upper);
    }

    #[test]
    fn two_type_examples() {
        // Oracle: 0.2 r^3 - r^2 + r - 0.2 = (r - 1)(0.2 r^2 - 0.8 r + 0.2).
        let r = two_type_root(0.2, 2.0).unwrap().unwrap();
        assert!((r - (2.0 - 3f64.sqrt())).abs() < 1e-11);
        assert!((0.2 * r.powi(3) - r * r + r - 0.2).abs() < 1e-10);
        assert_eq!(two_type_root(0.5, 2.0).unwrap(), None);
        assert_eq!(two_type_root(0.3, 1.0).unwrap(), None);
        assert_eq!(two_type_root(1.5, 40.0).unwrap(), None);

        let pts = two_type_stationary_points(0.2, 2.0).unwrap();
        assert_eq!(pts.len(), 3);
        let m = ModelSpec::symmetric(2, 0.2, 2.0).unwrap();
        for p in &pts {
            assert!(drift(&m, p).unwrap().iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn cyclic_center_examples() {
        assert_eq!(cyclic_center_stability(1.0, 3.9).unwrap(), Stability::LinearlyStable);
        assert_eq!(cyclic_center_stability(1.0, 4.1).unwrap(), Stability::LinearlyUnstable);
        assert_eq!(cyclic_center_stability(1.0, 4.0).unwrap(), Stability::Marginal);
        assert_eq!(cyclic_center_stability(2.0, 100.0).unwrap(), Stability::LinearlyStable);
        assert_eq!(cyclic_center_stability(0.5, 2.0).unwrap(), Stability::Marginal);
        // Oracle: finite-difference eigenvalues at the centre.
        let m = ModelSpec::cyclic(0.5, 2.0).unwrap();
        let j = jacobian_reduced(&m, &SimplexPoint::center(3), DEFAULT_FD_STEP).unwrap();
        assert!(eigenvalues_2x2(j)[0].re.abs() < 1e-6);
    }

    #[test]
    fn unit_cyclic_has_only_the_center() {
        let s = cyclic_stationary_search(1.0, 6.0, 200).unwrap();
        assert_eq!(s.points.len(), 1, "{s:?}");
        assert!(s.points[0].is_center());
        assert_eq!(s.points[0].stability, Stability::LinearlyUnstable);
        assert!(s.unrefined.is_empty());
    }

    #[test]
    fn weak_cyclic_has_extra_stable_points() {
        let s = cyclic_stationary_search(0.2, 2.0, 400).unwrap();
        assert!(s.points.iter().any(|p| p.is_center()));
        let extra: Vec<_> = s
            .points
            .iter()
            .filter(|p| !p.is_center() && p.stability == Stability::LinearlyStable)
            .collect();
        assert_eq!(extra.len(), 3, "{s:?}");
        for p in &s.points {
            assert!(p.residual < SEARCH_RESIDUAL_TOL);
        }

        let s = cyclic_stationary_search(0.3, 2.0, 400).unwrap();
        assert!(!s.has_noncenter_stable());
        let center = s.points.iter().find(|p| p.is_center()).unwrap();
        assert_eq!(center.stability, Stability::LinearlyUnstable);
    }
}
