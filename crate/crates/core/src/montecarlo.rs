//! Trajectory ensembles and per-trajectory limit classification.
//!
//! A trajectory is called a point limit when its tail stays within
//! `point_tol` of one stationary point, and cycling when it winds around the
//! centre at a distance. The winding window is measured in the natural time
//! of the mean-field flow, `t = ln(n0 + n)`, because the proportions advance
//! by `1 / (n0 + n)` per draw: a fixed fraction of draws covers a vanishing
//! stretch of flow time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrnError};
use crate::model::{Family, ModelSpec};
use crate::simplex::{ReducedCoordinates, SimplexPoint};
use crate::stationary::{
    cyclic_stationary_search, enumerate_stationary_points, grid_stationary_search,
    two_type_root, Stability,
};
use crate::urn::{simulate, trajectory_seed, SimulationParams, TrajectoryRecord, UrnState};

/// Thresholds of [`classify_limit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub point_tol: f64,
    pub winding_min: f64,
    pub radius_min: f64,
    /// Fraction of samples forming the point-limit tail.
    pub tail_fraction: f64,
    /// Fraction of the flow-time horizon forming the winding window.
    pub cycle_window: f64,
    pub min_tail_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            point_tol: 0.02,
            winding_min: 3.0,
            radius_min: 0.05,
            tail_fraction: 0.1,
            cycle_window: 0.5,
            min_tail_samples: 100,
        }
    }
}

/// A possible limit that trajectories are matched against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCandidate {
    pub location: SimplexPoint,
    pub stability: Stability,
    pub center: bool,
}

impl LimitCandidate {
    pub fn new(location: SimplexPoint, stability: Stability) -> Self {
        let center = location.distance(&SimplexPoint::center(location.dim())) < 1e-8;
        Self {
            location,
            stability,
            center,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    PointLimit {
        /// Index into the candidate list.
        candidate: usize,
        distance: f64,
    },
    Cycling {
        winding: f64,
        min_radius: f64,
        max_radius: f64,
    },
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitClassification {
    pub verdict: Verdict,
    /// Largest distance of a tail sample from the tail mean.
    pub tail_oscillation: f64,
    pub tail_mean: Vec<f64>,
    /// Signed turns about the centre over the winding window (three colours).
    pub winding: Option<f64>,
}

/// Turns about the centre and chart radius range over a sequence of points.
pub fn winding_about_center(points: &[SimplexPoint]) -> Result<(f64, f64, f64)> {
    let c = ReducedCoordinates::center();
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut min_r = f64::INFINITY;
    let mut max_r: f64 = 0.0;
    for p in points {
        let q = ReducedCoordinates::chart(p)?;
        let (dx, dy) = (q[0] - c[0], q[1] - c[1]);
        let r = dx.hypot(dy);
        min_r = min_r.min(r);
        max_r = max_r.max(r);
        if r == 0.0 {
            continue;
        }
        let angle = dy.atan2(dx);
        if let Some(p) = prev {
            let mut delta = angle - p;
            if delta > std::f64::consts::PI {
                delta -= std::f64::consts::TAU;
            } else if delta <= -std::f64::consts::PI {
                delta += std::f64::consts::TAU;
            }
            total += delta;
        }
        prev = Some(angle);
    }
    Ok((total / std::f64::consts::TAU, min_r, max_r))
}

/// Classifies the limit behaviour of one trajectory.
pub fn classify_limit(
    traj: &TrajectoryRecord,
    candidates: &[LimitCandidate],
    tol: &Tolerances,
) -> Result<LimitClassification> {
    let len = traj.points.len();
    let tail_len = ((len as f64) * tol.tail_fraction).ceil() as usize;
    if tail_len < tol.min_tail_samples {
        return Err(UrnError::InvalidArgument(format!(
            "trajectory tail has {tail_len} samples, need at least {}",
            tol.min_tail_samples
        )));
    }
    let tail = &traj.points[len - tail_len..];
    let d = traj.final_point().dim();
    let mut mean = vec![0.0; d];
    for p in tail {
        mean.iter_mut().zip(p.coords()).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= tail_len as f64);
    let tail_oscillation = tail
        .iter()
        .map(|p| crate::simplex::euclidean(p.coords(), &mean))
        .fold(0.0, f64::max);

    let final_point = traj.final_point();
    let nearest = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.location.distance(final_point)))
        .min_by(|a, b| a.1.total_cmp(&b.1));

    let mut verdict = Verdict::Undetermined;
    match nearest {
        Some((idx, dist)) => {
            let target = &candidates[idx].location;
            if tail.iter().all(|p| p.distance(target) < tol.point_tol) {
                verdict = Verdict::PointLimit {
                    candidate: idx,
                    distance: dist,
                };
            }
        }
        None => {
            if tail.iter().all(|p| p.distance(final_point) < tol.point_tol) {
                return Err(UrnError::NoStationaryPoints);
            }
        }
    }

    let mut winding = None;
    if d == 3 {
        let n0 = traj.final_state.n0() as f64;
        let flow_time: Vec<f64> = traj.times.iter().map(|t| (n0 + *t as f64).ln()).collect();
        let (t0, t1) = (flow_time[0], *flow_time.last().expect("nonempty"));
        let start = t1 - tol.cycle_window * (t1 - t0);
        let first = flow_time.partition_point(|t| *t < start);
        let window = &traj.points[first.min(len - 1)..];
        let (turns, min_r, max_r) = winding_about_center(window)?;
        winding = Some(turns);
        if matches!(verdict, Verdict::Undetermined)
            && turns.abs() >= tol.winding_min
            && min_r >= tol.radius_min
        {
            verdict = Verdict::Cycling {
                winding: turns.abs(),
                min_radius: min_r,
                max_radius: max_r,
            };
        }
    }

    Ok(LimitClassification {
        verdict,
        tail_oscillation,
        tail_mean: mean,
        winding,
    })
}

/// Grid resolution used when limit candidates come from a numerical search.
pub const CANDIDATE_SEARCH_RESOLUTION: usize = 200;

/// Stationary points trajectories of `model` are matched against.
pub fn limit_candidates(model: &ModelSpec) -> Result<Vec<LimitCandidate>> {
    let beta = model.beta();
    match (model.family(), model.d()) {
        (Family::Symmetric { a }, 3) => Ok(enumerate_stationary_points(a, beta)?
            .into_iter()
            .map(|p| LimitCandidate {
                location: p.location,
                stability: p.stability,
                center: p.axis.is_none(),
            })
            .collect()),
        (Family::Symmetric { a }, 2) => {
            let mut out = Vec::new();
            let r = two_type_root(a, beta)?;
            let center_stability = if r.is_some() {
                Stability::LinearlyUnstable
            } else {
                Stability::LinearlyStable
            };
            out.push(LimitCandidate::new(SimplexPoint::center(2), center_stability));
            if let Some(r) = r {
                out.push(LimitCandidate::new(SimplexPoint::normalized(&[1.0, r])?, Stability::LinearlyStable));
                out.push(LimitCandidate::new(SimplexPoint::normalized(&[r, 1.0])?, Stability::LinearlyStable));
            }
            Ok(out)
        }
        (Family::Cyclic { a }, _) => Ok(cyclic_stationary_search(a, beta, CANDIDATE_SEARCH_RESOLUTION)?
            .points
            .into_iter()
            .map(|p| LimitCandidate::new(p.location, p.stability))
            .collect()),
        (_, 3) => Ok(grid_stationary_search(model, CANDIDATE_SEARCH_RESOLUTION)?
            .points
            .into_iter()
            .map(|p| LimitCandidate::new(p.location, p.stability))
            .collect()),
        // The centre is fixed for any equal-interaction matrix; stability of
        // it is not analysed beyond three colours.
        (Family::Symmetric { .. }, d) => Ok(vec![LimitCandidate::new(
            SimplexPoint::center(d),
            Stability::Marginal,
        )]),
        _ => Ok(Vec::new()),
    }
}

/// Per-run settings shared by every trajectory of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub trajectories: usize,
    pub steps: u64,
    pub base_seed: u64,
    pub thinning: u64,
    pub initial: UrnState,
    pub tolerances: Tolerances,
}

impl EnsembleConfig {
    pub fn new(d: usize, trajectories: usize, steps: u64, base_seed: u64) -> Self {
        Self {
            trajectories,
            steps,
            base_seed,
            thinning: crate::urn::DEFAULT_THINNING,
            initial: UrnState::uniform(d),
            tolerances: Tolerances::default(),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.trajectories as u64)
            .map(|i| trajectory_seed(self.base_seed, i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointHits {
    pub location: SimplexPoint,
    pub stability: Stability,
    pub center: bool,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub model: ModelSpec,
    pub trajectories: usize,
    pub steps: u64,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
    pub tolerances: Tolerances,
    pub hits: Vec<PointHits>,
    pub cycling: usize,
    pub undetermined: usize,
    pub classifications: Vec<LimitClassification>,
}

impl EnsembleSummary {
    pub fn center_hits(&self) -> usize {
        self.hits.iter().filter(|h| h.center).map(|h| h.count).sum()
    }

    pub fn noncenter_hits(&self) -> usize {
        self.hits.iter().filter(|h| !h.center).map(|h| h.count).sum()
    }

    pub fn point_hits(&self) -> usize {
        self.hits.iter().map(|h| h.count).sum()
    }

    pub fn hits_with(&self, stability: Stability) -> usize {
        self.hits
            .iter()
            .filter(|h| h.stability == stability)
            .map(|h| h.count)
            .sum()
    }
}

/// Simulates every trajectory of the ensemble, in trajectory-index order.
pub fn simulate_ensemble(model: &ModelSpec, cfg: &EnsembleConfig) -> Result<Vec<TrajectoryRecord>> {
    if cfg.trajectories == 0 {
        return Err(UrnError::InvalidArgument("need at least one trajectory".into()));
    }
    cfg.seeds()
        .into_par_iter()
        .map(|seed| {
            let params = SimulationParams::new(cfg.steps, seed).with_thinning(cfg.thinning);
            simulate(model, &cfg.initial, &params)
        })
        .collect()
}

/// Classifies already simulated trajectories and aggregates the verdicts.
pub fn summarize(
    model: &ModelSpec,
    cfg: &EnsembleConfig,
    records: &[TrajectoryRecord],
    candidates: &[LimitCandidate],
) -> Result<EnsembleSummary> {
    let classifications: Vec<LimitClassification> = records
        .par_iter()
        .map(|r| classify_limit(r, candidates, &cfg.tolerances))
        .collect::<Result<_>>()?;
    let mut hits: Vec<PointHits> = candidates
        .iter()
        .map(|c| PointHits {
            location: c.location.clone(),
            stability: c.stability,
            center: c.center,
            count: 0,
        })
        .collect();
    let (mut cycling, mut undetermined) = (0, 0);
    for c in &classifications {
        match c.verdict {
            Verdict::PointLimit { candidate, .. } => hits[candidate].count += 1,
            Verdict::Cycling { .. } => cycling += 1,
            Verdict::Undetermined => undetermined += 1,
        }
    }
    Ok(EnsembleSummary {
        model: model.clone(),
        trajectories: records.len(),
        steps: cfg.steps,
        base_seed: cfg.base_seed,
        seeds: records.iter().map(|r| r.seed).collect(),
        tolerances: cfg.tolerances,
        hits,
        cycling,
        undetermined,
        classifications,
    })
}

/// Simulates and classifies `cfg.trajectories` runs with seeds
/// `base_seed ^ i`.
pub fn run_ensemble(model: &ModelSpec, cfg: &EnsembleConfig) -> Result<EnsembleSummary> {
    let candidates = limit_candidates(model)?;
    run_ensemble_with(model, cfg, &candidates)
}

pub fn run_ensemble_with(
    model: &ModelSpec,
    cfg: &EnsembleConfig,
    candidates: &[LimitCandidate],
) -> Result<EnsembleSummary> {
    let records = simulate_ensemble(model, cfg)?;
    summarize(model, cfg, &records, candidates)
}

/// Orthonormal basis of the tangent plane `sum x_i = 0` for three colours.
const TANGENT_BASIS: [[f64; 3]; 2] = [
    [
        std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
        0.0,
    ],
    [
        0.408_248_290_463_863,
        0.408_248_290_463_863,
        -0.816_496_580_927_726,
    ],
];

/// Unit vectors in the tangent plane of the simplex. Three colours use an
/// even angular grid; other dimensions use seeded random directions.
pub fn tangent_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        2 => vec![
            vec![std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
            vec![-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
        ],
        3 => (0..count)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / count as f64;
                let (s, c) = phi.sin_cos();
                (0..3)
                    .map(|i| c * TANGENT_BASIS[0][i] + s * TANGENT_BASIS[1][i])
                    .collect()
            })
            .collect(),
        _ => {
            use rand::Rng;
            let mut rng = crate::urn::rng_from_seed(0x5eed_d1ec);
            (0..count)
                .map(|_| {
                    let mut v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
                    let mean = v.iter().sum::<f64>() / d as f64;
                    v.iter_mut().for_each(|x| *x -= mean);
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|x| *x /= norm);
                    v
                })
                .collect()
        }
    }
}

/// `E[max(xi . theta, 0)]` for the one-step noise `xi = e_i - p` at draw
/// probabilities `p`.
pub fn noise_positive_part(p: &[f64], theta: &[f64]) -> f64 {
    let p_dot: f64 = p.iter().zip(theta).map(|(a, b)| a * b).sum();
    p.iter()
        .zip(theta)
        .map(|(pi, ti)| pi * (ti - p_dot).max(0.0))
        .sum()
}

/// The same expectation for three colours with each outcome written out.
pub fn noise_positive_part_enumerated(p: [f64; 3], theta: [f64; 3]) -> f64 {
    let [u1, u2, u3] = p;
    let [t1, t2, t3] = theta;
    u1 * (t1 * (1.0 - u1) - t2 * u2 - t3 * u3).max(0.0)
        + u2 * (-t1 * u1 + t2 * (1.0 - u2) - t3 * u3).max(0.0)
        + u3 * (-t1 * u1 - t2 * u2 + t3 * (1.0 - u3)).max(0.0)
}

/// Minimum over `directions` tangent unit vectors of the expected positive
/// part of the noise at proportions `x`. Exact; no sampling.
pub fn noise_positivity_check(model: &ModelSpec, x: &SimplexPoint, directions: usize) -> Result<f64> {
    if x.dim() != model.d() {
        return Err(UrnError::InvalidArgument(format!(
            "point has {} coordinates but the model has {} colours",
            x.dim(),
            model.d()
        )));
    }
    if !x.is_interior() {
        return Err(UrnError::NotInterior(x.coords().to_vec()));
    }
    if directions < 8 && model.d() != 2 {
        return Err(UrnError::InvalidArgument(format!(
            "need at least 8 directions, got {directions}"
        )));
    }
    let mut p = vec![0.0; model.d()];
    crate::urn::probabilities_into(model, x.coords(), &mut p)?;
    Ok(tangent_directions(model.d(), directions)
        .iter()
        .map(|theta| noise_positive_part(&p, theta))
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    fn synthetic(points: Vec<SimplexPoint>, n0: u64) -> TrajectoryRecord {
        let len = points.len() as u64;
        let mut counts = vec![1u64; 3];
        counts[0] = n0 - 2;
        let mut state = UrnState::new(counts).unwrap();
        let mut rng = crate::urn::rng_from_seed(0);
        let model = ModelSpec::cyclic(1.0, 2.0).unwrap();
        for _ in 0..(len - 1) * 100 {
            crate::urn::step(&model, &mut state, &mut rng).unwrap();
        }
        TrajectoryRecord {
            times: (0..len).map(|k| k * 100).collect(),
            points,
            seed: 0,
            model,
            final_state: state,
        }
    }

    fn center_candidates() -> Vec<LimitCandidate> {
        vec![LimitCandidate::new(SimplexPoint::center(3), Stability::LinearlyStable)]
    }

    #[test]
    fn constant_center_is_point_limit() {
        let traj = synthetic(vec![SimplexPoint::center(3); 1001], 3);
        let c = classify_limit(&traj, &center_candidates(), &Tolerances::default()).unwrap();
        match c.verdict {
            Verdict::PointLimit { candidate, distance } => {
                assert_eq!(candidate, 0);
                assert!(distance < 1e-15);
            }
            v => panic!("expected a point limit, got {v:?}"),
        }
        assert!(c.tail_oscillation < 1e-15);
    }

    #[test]
    fn circle_in_chart_is_cycling() {
        // Ten turns at radius 0.2 in the chart, uniform in sample index.
        let n = 2001usize;
        let points: Vec<SimplexPoint> = (0..n)
            .map(|k| {
                let theta = std::f64::consts::TAU * 10.0 * k as f64 / (n - 1) as f64;
                let c = ReducedCoordinates::center();
                ReducedCoordinates::unchart([c[0] + 0.2 * theta.cos(), c[1] + 0.2 * theta.sin()]).unwrap()
            })
            .collect();
        let traj = synthetic(points.clone(), 3);
        let c = classify_limit(&traj, &center_candidates(), &Tolerances::default()).unwrap();
        match c.verdict {
            Verdict::Cycling { winding, min_radius, .. } => {
                assert!(winding > 9.5 && winding <= 10.0, "{winding}");
                assert!((min_radius - 0.2).abs() < 1e-9);
            }
            v => panic!("expected cycling, got {v:?}"),
        }
        let (turns, _, _) = winding_about_center(&points).unwrap();
        assert!((turns - 10.0).abs() < 1e-6);
    }

    #[test]
    fn short_tail_is_rejected() {
        let traj = synthetic(vec![SimplexPoint::center(3); 50], 3);
        assert!(classify_limit(&traj, &center_candidates(), &Tolerances::default()).is_err());
    }

    #[test]
    fn converged_without_candidates_is_an_error() {
        let traj = synthetic(vec![SimplexPoint::center(3); 1001], 3);
        assert_eq!(
            classify_limit(&traj, &[], &Tolerances::default()),
            Err(UrnError::NoStationaryPoints)
        );
    }

    #[test]
    fn noise_implementations_agree() {
        let model = ModelSpec::symmetric(3, 0.2, 2.0).unwrap();
        for x in [
            SimplexPoint::center(3),
            SimplexPoint::normalized(&[0.2, 0.3, 0.5]).unwrap(),
            SimplexPoint::normalized(&[0.01, 0.9, 0.09]).unwrap(),
        ] {
            let mut p = vec![0.0; 3];
            crate::urn::probabilities_into(&model, x.coords(), &mut p).unwrap();
            for theta in tangent_directions(3, 360) {
                let a = noise_positive_part(&p, &theta);
                let b = noise_positive_part_enumerated(
                    p.clone().try_into().unwrap(),
                    theta.clone().try_into().unwrap(),
                );
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tangent_directions_are_unit_and_tangent() {
        for d in [2, 3, 5] {
            for t in tangent_directions(d, 16) {
                assert!(t.iter().sum::<f64>().abs() < 1e-14);
                assert!((t.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn noise_is_positive() {
        let polya = ModelSpec::identity(3, 1.0).unwrap();
        assert!(noise_positivity_check(&polya, &SimplexPoint::center(3), 360).unwrap() > 0.0);
        let m = ModelSpec::symmetric(3, 0.2, 2.0).unwrap();
        let v = noise_positivity_check(&m, &SimplexPoint::center(3), 360).unwrap();
        assert!(v > 0.01, "{v}");
        let corner = SimplexPoint::normalized(&[1.0, 1e-9, 1e-9]).unwrap();
        let v = noise_positivity_check(&m, &corner, 360).unwrap();
        assert!(v >= 0.0);
        assert!(noise_positivity_check(&m, &SimplexPoint::center(3), 4).is_err());
    }

    #[test]
    fn candidates_per_family() {
        let c = limit_candidates(&ModelSpec::symmetric(3, 0.2, 2.0).unwrap()).unwrap();
        assert_eq!(c.len(), 7);
        let c = limit_candidates(&ModelSpec::symmetric(2, 0.2, 2.0).unwrap()).unwrap();
        assert_eq!(c.len(), 3);
        let c = limit_candidates(&ModelSpec::cyclic(1.0, 3.0).unwrap()).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0].center);
        let c = limit_candidates(&ModelSpec::symmetric(4, 0.2, 2.0).unwrap()).unwrap();
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn ensemble_is_deterministic_and_consistent() {
        let model = ModelSpec::symmetric(3, 0.5, 2.0).unwrap();
        let mut cfg = EnsembleConfig::new(3, 6, 20_000, 11);
        cfg.thinning = 20;
        let a = run_ensemble(&model, &cfg).unwrap();
        let b = run_ensemble(&model, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.point_hits() + a.cycling + a.undetermined, 6);
        assert_eq!(a.seeds, (0..6).map(|i| 11 ^ i).collect::<Vec<u64>>());
    }
}
