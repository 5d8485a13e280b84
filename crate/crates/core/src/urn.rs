//! The urn Markov chain: draw probabilities, single steps and seeded
//! trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrnError};
use crate::model::ModelSpec;
use crate::simplex::SimplexPoint;

/// Largest total ball count for which every count is an exact `f64`.
pub const MAX_EXACT_COUNT: u64 = 1 << 53;

/// Default number of steps between recorded samples.
pub const DEFAULT_THINNING: u64 = 100;

/// Generator used for all trajectories.
pub type UrnRng = ChaCha8Rng;

/// Seed of trajectory `index` in an ensemble started from `base`.
pub fn trajectory_seed(base: u64, index: u64) -> u64 {
    base ^ index
}

pub fn rng_from_seed(seed: u64) -> UrnRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ball counts of an urn together with the number of draws so far.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnState {
    counts: Vec<u64>,
    n0: u64,
    n: u64,
}

impl UrnState {
    /// A fresh urn holding `counts`; every count must be at least one.
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(UrnError::InvalidState(format!(
                "need at least two colours, got {}",
                counts.len()
            )));
        }
        if let Some(i) = counts.iter().position(|c| *c == 0) {
            return Err(UrnError::InvalidState(format!(
                "colour {} has no balls; counts must be strictly positive",
                i + 1
            )));
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, c| acc.checked_add(*c))
            .filter(|t| *t <= MAX_EXACT_COUNT)
            .ok_or_else(|| {
                UrnError::InvalidState("total ball count exceeds 2^53".to_string())
            })?;
        Ok(Self {
            counts,
            n0: total,
            n: 0,
        })
    }

    /// One ball of each colour.
    pub fn uniform(d: usize) -> Self {
        Self {
            counts: vec![1; d],
            n0: d as u64,
            n: 0,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    pub fn steps(&self) -> u64 {
        self.n
    }

    pub fn total(&self) -> u64 {
        self.n0 + self.n
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn validate_for(&self, model: &ModelSpec) -> Result<()> {
        if self.counts.len() != model.d() {
            return Err(UrnError::InvalidState(format!(
                "state has {} colours but the model has {}",
                self.counts.len(),
                model.d()
            )));
        }
        if self.counts.contains(&0) {
            return Err(UrnError::InvalidState("zero ball count".to_string()));
        }
        let sum: u64 = self.counts.iter().sum();
        if sum != self.n0 + self.n {
            return Err(UrnError::InvalidState(format!(
                "counts sum to {sum} but n0 + n = {}",
                self.n0 + self.n
            )));
        }
        Ok(())
    }

    /// The step size `1 / (n0 + n + 1)` of the next draw.
    pub fn gain(&self) -> f64 {
        1.0 / (self.total() + 1) as f64
    }

    fn add_ball(&mut self, colour: usize) {
        self.counts[colour] += 1;
        self.n += 1;
    }
}

/// Proportions `counts / (n0 + n)`.
pub fn proportions(state: &UrnState) -> SimplexPoint {
    let total = state.total() as f64;
    let coords: Vec<f64> = state.counts.iter().map(|c| *c as f64 / total).collect();
    SimplexPoint::new(coords.clone()).unwrap_or_else(|_| {
        // Rounding can push the sum a few ulps past tolerance for large d.
        SimplexPoint::normalized(&coords).expect("positive counts")
    })
}

/// Probability that the next ball has colour `i`, for each `i`.
pub fn transition_probabilities(model: &ModelSpec, state: &UrnState) -> Result<Vec<f64>> {
    state.validate_for(model)?;
    let mut probs = vec![0.0; model.d()];
    let counts: Vec<f64> = state.counts.iter().map(|c| *c as f64).collect();
    probabilities_into(model, &counts, &mut probs)?;
    Ok(probs)
}

pub(crate) fn probabilities_into(model: &ModelSpec, x: &[f64], out: &mut [f64]) -> Result<()> {
    model.weights_into(x, out);
    let total: f64 = out.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(UrnError::ZeroWeight);
    }
    out.iter_mut().for_each(|u| *u /= total);
    Ok(())
}

/// Draws one ball and adds it to the urn. Returns the colour index.
pub fn step<R: Rng + ?Sized>(model: &ModelSpec, state: &mut UrnState, rng: &mut R) -> Result<usize> {
    state.validate_for(model)?;
    if state.total() >= MAX_EXACT_COUNT {
        return Err(UrnError::CountOverflow {
            initial: state.n0,
            steps: state.n + 1,
        });
    }
    let mut stepper = Stepper::new(model);
    stepper.step(state, rng)
}

/// Reusable scratch space for repeated draws from one model.
struct Stepper<'m> {
    model: &'m ModelSpec,
    x: Vec<f64>,
    weights: Vec<f64>,
}

impl<'m> Stepper<'m> {
    fn new(model: &'m ModelSpec) -> Self {
        Self {
            model,
            x: vec![0.0; model.d()],
            weights: vec![0.0; model.d()],
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, state: &mut UrnState, rng: &mut R) -> Result<usize> {
        for (x, c) in self.x.iter_mut().zip(&state.counts) {
            *x = *c as f64;
        }
        self.model.weights_into(&self.x, &mut self.weights);
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(UrnError::ZeroWeight);
        }
        let mut target = rng.random::<f64>() * total;
        let mut chosen = None;
        for (i, w) in self.weights.iter().enumerate() {
            if *w > 0.0 {
                chosen = Some(i);
                if target < *w {
                    break;
                }
                target -= w;
            }
        }
        let colour = chosen.ok_or(UrnError::ZeroWeight)?;
        state.add_ball(colour);
        Ok(colour)
    }
}

/// Run-length parameters of a single trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub steps: u64,
    pub seed: u64,
    pub thinning: u64,
}

impl SimulationParams {
    pub fn new(steps: u64, seed: u64) -> Self {
        Self {
            steps,
            seed,
            thinning: DEFAULT_THINNING,
        }
    }

    pub fn with_thinning(mut self, thinning: u64) -> Self {
        self.thinning = thinning;
        self
    }
}

/// A thinned realisation of the proportions process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// Draw counts at which samples were taken, strictly increasing.
    pub times: Vec<u64>,
    pub points: Vec<SimplexPoint>,
    pub seed: u64,
    pub model: ModelSpec,
    pub final_state: UrnState,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn final_point(&self) -> &SimplexPoint {
        self.points.last().expect("a trajectory holds at least its start")
    }
}

/// Runs `params.steps` draws from `initial`, recording the proportions every
/// `params.thinning` draws as well as at the start and the end.
pub fn simulate(
    model: &ModelSpec,
    initial: &UrnState,
    params: &SimulationParams,
) -> Result<TrajectoryRecord> {
    initial.validate_for(model)?;
    if params.steps == 0 {
        return Err(UrnError::InvalidArgument("steps must be at least 1".into()));
    }
    if params.thinning == 0 {
        return Err(UrnError::InvalidArgument("thinning must be at least 1".into()));
    }
    let fits = initial
        .total()
        .checked_add(params.steps)
        .is_some_and(|t| t <= MAX_EXACT_COUNT);
    if !fits {
        return Err(UrnError::CountOverflow {
            initial: initial.total(),
            steps: params.steps,
        });
    }

    let mut rng = rng_from_seed(params.seed);
    let mut state = initial.clone();
    let mut stepper = Stepper::new(model);
    let expected = params.steps.div_ceil(params.thinning) as usize + 1;
    let mut times = Vec::with_capacity(expected);
    let mut points = Vec::with_capacity(expected);
    times.push(state.n);
    points.push(proportions(&state));
    for k in 1..=params.steps {
        stepper.step(&mut state, &mut rng)?;
        if k % params.thinning == 0 || k == params.steps {
            times.push(state.n);
            points.push(proportions(&state));
        }
    }
    Ok(TrajectoryRecord {
        times,
        points,
        seed: params.seed,
        model: model.clone(),
        final_state: state,
    })
}
