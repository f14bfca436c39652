//! One-dimensional river invasion observed through presence-only probes.
//!
//! The invaded cells form an interval around the origin whose fronts each
//! advance one cell per step with probability theta. Every step, surveyors
//! extend the detected interval outwards one cell at a time, detecting an
//! invaded cell with probability phi and stopping at the first failure, at
//! the first uninvaded cell, or at the end of the river.
//!
//! The observation process depends on the state, so the engine simulates
//! knowledge as well as states and both enter the weights.
//!
//! Cells are numbered `1..=M` throughout this module; rows of a
//! [`TrajectoryMatrix`] are 0-based vectors of length `M`.

pub mod enumerate;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SisError};
use crate::matrix::{KnowledgeMatrix, ObservationMatrix, TrajectoryMatrix};
use crate::model::{Model, StepContext};
use crate::particle::Particle;
use crate::rng::StreamRng;

pub use enumerate::{exact_posterior, ExactPosterior, MAX_ENUMERATION_WORK};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvasionParams {
    cells: usize,
    origin: usize,
    theta: f64,
    phi: f64,
    max_time: Option<usize>,
}

impl InvasionParams {
    /// `cells` is `M`, `origin` is `μ` (1-based), `theta` the per-side
    /// expansion probability, `phi` the per-probe detection probability and
    /// `max_time` the simulation horizon (`None`: run until every cell is
    /// invaded).
    pub fn new(cells: usize, origin: usize, theta: f64, phi: f64, max_time: Option<usize>) -> Result<Self> {
        if cells == 0 {
            return Err(SisError::InvalidParams("the river needs at least one cell".into()));
        }
        if !(1..=cells).contains(&origin) {
            return Err(SisError::InvalidParams(format!("origin {origin} outside 1..={cells}")));
        }
        for (name, p) in [("theta", theta), ("phi", phi)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SisError::InvalidParams(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if max_time == Some(0) {
            return Err(SisError::InvalidParams("max_time must be at least 1".into()));
        }
        Ok(Self {
            cells,
            origin,
            theta,
            phi,
            max_time,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn max_time(&self) -> Option<usize> {
        self.max_time
    }
}

/// The invaded interval `[β, γ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InvasionState {
    pub left: usize,
    pub right: usize,
}

impl InvasionState {
    pub fn origin(params: &InvasionParams) -> Self {
        Self {
            left: params.origin,
            right: params.origin,
        }
    }

    /// The fronts of `row`, or `None` unless the invaded cells form one
    /// nonempty interval.
    pub fn from_row(row: &[bool]) -> Option<Self> {
        let (left, right) = ones_interval(row)?;
        Some(Self { left, right })
    }

    pub fn to_row(&self, cells: usize) -> Vec<bool> {
        (1..=cells).map(|m| self.contains(m)).collect()
    }

    pub fn contains(&self, m: usize) -> bool {
        (self.left..=self.right).contains(&m)
    }

    pub fn len(&self) -> usize {
        self.right - self.left + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_complete(&self, cells: usize) -> bool {
        self.left == 1 && self.right == cells
    }
}

/// The detected interval `[c, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectionFrontier {
    pub left: usize,
    pub right: usize,
}

impl DetectionFrontier {
    pub fn origin(params: &InvasionParams) -> Self {
        Self {
            left: params.origin,
            right: params.origin,
        }
    }

    pub fn from_row(row: &[bool]) -> Option<Self> {
        let (left, right) = ones_interval(row)?;
        Some(Self { left, right })
    }

    pub fn to_row(&self, cells: usize) -> Vec<bool> {
        (1..=cells).map(|m| (self.left..=self.right).contains(&m)).collect()
    }
}

fn ones_interval(row: &[bool]) -> Option<(usize, usize)> {
    let first = row.iter().position(|&b| b)?;
    let last = row.iter().rposition(|&b| b)?;
    row[first..=last].iter().all(|&b| b).then_some((first + 1, last + 1))
}

fn bernoulli_log(p: f64, success: bool) -> f64 {
    if success {
        p.ln()
    } else {
        (1.0 - p).ln()
    }
}

/// `k ln p`, with `0 ln 0 = 0`.
fn count_log(p: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * p.ln()
    }
}

/// Each front advances one cell with probability theta unless it already
/// sits at the end of the river. The right front is drawn first.
pub fn transition_sample<R: Rng + ?Sized>(params: &InvasionParams, state: InvasionState, rng: &mut R) -> InvasionState {
    let mut next = state;
    if state.right < params.cells && rng.random::<f64>() < params.theta {
        next.right += 1;
    }
    if state.left > 1 && rng.random::<f64>() < params.theta {
        next.left -= 1;
    }
    next
}

fn front_log_density(theta: f64, complete: bool, step: isize) -> f64 {
    match (complete, step) {
        (true, 0) => 0.0,
        (false, 0) => bernoulli_log(theta, false),
        (false, 1) => bernoulli_log(theta, true),
        _ => f64::NEG_INFINITY,
    }
}

/// `log θ^k (1-θ)^{1-k} θ^h (1-θ)^{1-h}`, dropping the factor of a side that
/// had already reached the end of the river.
pub fn transition_log_density(params: &InvasionParams, prev: InvasionState, cur: InvasionState) -> f64 {
    let right = front_log_density(
        params.theta,
        prev.right == params.cells,
        cur.right as isize - prev.right as isize,
    );
    let left = front_log_density(params.theta, prev.left == 1, prev.left as isize - cur.left as isize);
    right + left
}

/// Extends the detected interval outwards from `prev`, one probe at a time.
/// The right side is probed first.
pub fn probe_sample<R: Rng + ?Sized>(
    params: &InvasionParams,
    state: InvasionState,
    prev: DetectionFrontier,
    rng: &mut R,
) -> DetectionFrontier {
    let mut a = prev.right;
    while a < state.right && rng.random::<f64>() < params.phi {
        a += 1;
    }
    let mut c = prev.left;
    while c > state.left && rng.random::<f64>() < params.phi {
        c -= 1;
    }
    DetectionFrontier { left: c, right: a }
}

fn probe_side_log(phi: f64, detected: isize, stopped_early: bool) -> f64 {
    if detected < 0 {
        return f64::NEG_INFINITY;
    }
    let mut g = count_log(phi, detected as usize);
    if stopped_early {
        g += bernoulli_log(phi, false);
    }
    g
}

/// `log φ^{a_t - a_{t-1}} (1-φ)^{[a_t ≠ γ_t]} φ^{c_{t-1} - c_t} (1-φ)^{[c_t ≠ β_t]}`;
/// `-inf` when `cur` is not reachable from `prev` by probing `state`.
pub fn observation_log_density(
    params: &InvasionParams,
    state: InvasionState,
    prev: DetectionFrontier,
    cur: DetectionFrontier,
) -> f64 {
    if cur.right > state.right || cur.left < state.left {
        return f64::NEG_INFINITY;
    }
    let right = probe_side_log(
        params.phi,
        cur.right as isize - prev.right as isize,
        cur.right != state.right,
    );
    let left = probe_side_log(params.phi, prev.left as isize - cur.left as isize, cur.left != state.left);
    right + left
}

/// Prior mass and number of supported points among the fronts of one side
/// that correction maps onto the corrected front.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SideFiber {
    mass: f64,
    count: f64,
}

/// One side of the fiber, expressed as distances from the origin so that
/// both sides share the arithmetic: `prev` is the previous front, `done`
/// whether it had reached the end of the river, `det_prev` and `det` the
/// previous and current detected extents, `corrected` the corrected front.
fn side_fiber(theta: f64, phi: f64, prev: usize, done: bool, det_prev: usize, det: usize, corrected: usize) -> SideFiber {
    let options: &[(usize, f64)] = if done {
        &[(prev, 1.0)]
    } else {
        &[(prev, 1.0 - theta), (prev + 1, theta)]
    };
    let mut fiber = SideFiber { mass: 0.0, count: 0.0 };
    for &(front, f) in options {
        let maps_here = if corrected > det { front == corrected } else { front <= det };
        if f > 0.0 && maps_here {
            fiber.mass += f;
            // simulated detections in det_prev..=front with positive probability
            fiber.count += if phi > 0.0 && phi < 1.0 {
                (front - det_prev + 1) as f64
            } else {
                1.0
            };
        }
    }
    fiber
}

/// Both sides of the fiber of a corrected newest row.
struct Fiber {
    right: SideFiber,
    left: SideFiber,
}

fn fiber(
    params: &InvasionParams,
    prev: InvasionState,
    det_prev: DetectionFrontier,
    det: DetectionFrontier,
    corrected: InvasionState,
) -> Fiber {
    let mu = params.origin;
    let right = side_fiber(
        params.theta,
        params.phi,
        prev.right - mu,
        prev.right == params.cells,
        det_prev.right - mu,
        det.right - mu,
        corrected.right - mu,
    );
    let left = side_fiber(
        params.theta,
        params.phi,
        mu - prev.left,
        prev.left == 1,
        mu - det_prev.left,
        mu - det.left,
        mu - corrected.left,
    );
    Fiber { right, left }
}

/// The invasion model as seen by the engine.
///
/// Only the newest row is ever revealed, so correction touches the newest
/// state and knowledge row alone. The auxiliary densities account for the
/// fact that most of the fiber has zero prior mass: u1 is uniform over the
/// supported part of the fiber, and u2's normalizer is the exact prior mass
/// of the fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvasionModel {
    pub params: InvasionParams,
}

impl InvasionModel {
    pub fn new(params: InvasionParams) -> Self {
        Self { params }
    }

    fn step_fiber(&self, ctx: &StepContext<'_, bool>, corrected: &Particle<bool>) -> Option<Fiber> {
        let t = ctx.time;
        if t < 2 {
            return None;
        }
        let x = &corrected.trajectory;
        let prev = InvasionState::from_row(x.row(t - 2))?;
        let cur = InvasionState::from_row(x.row(t - 1))?;
        let det_prev = DetectionFrontier::from_row(ctx.prev_knowledge.last_row()?)?;
        let det = DetectionFrontier::from_row(corrected.knowledge.last_row()?)?;
        Some(fiber(&self.params, prev, det_prev, det, cur))
    }
}

impl Model for InvasionModel {
    type Coord = bool;

    fn dim(&self) -> usize {
        self.params.cells
    }

    fn missing_at_random(&self) -> bool {
        false
    }

    fn sample_initial(&self, _rng: &mut StreamRng) -> Vec<bool> {
        InvasionState::origin(&self.params).to_row(self.params.cells)
    }

    fn sample_transition(&self, prev: &[bool], rng: &mut StreamRng) -> Vec<bool> {
        match InvasionState::from_row(prev) {
            Some(s) => transition_sample(&self.params, s, rng).to_row(self.params.cells),
            // not a valid state; the zero density surfaces as a contract error
            None => prev.to_vec(),
        }
    }

    fn initial_log_density(&self, state: &[bool]) -> f64 {
        if InvasionState::from_row(state) == Some(InvasionState::origin(&self.params)) {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    fn transition_log_density(&self, prev: &[bool], cur: &[bool]) -> f64 {
        match (InvasionState::from_row(prev), InvasionState::from_row(cur)) {
            (Some(p), Some(c)) => transition_log_density(&self.params, p, c),
            _ => f64::NEG_INFINITY,
        }
    }

    fn sample_knowledge(&self, state: &[bool], prev: &KnowledgeMatrix, rng: &mut StreamRng) -> KnowledgeMatrix {
        let det = match (prev.last_row(), InvasionState::from_row(state)) {
            (None, _) => DetectionFrontier::origin(&self.params),
            (Some(row), Some(s)) => match DetectionFrontier::from_row(row) {
                Some(p) => probe_sample(&self.params, s, p, rng),
                None => return prev.with_row(&vec![false; self.params.cells]),
            },
            (Some(_), None) => return prev.with_row(&vec![false; self.params.cells]),
        };
        prev.with_row(&det.to_row(self.params.cells))
    }

    /// Earlier rows of `cur` are assumed to agree with `prev`; only the new
    /// row is scored.
    fn observation_log_density(&self, state: &[bool], prev: &KnowledgeMatrix, cur: &KnowledgeMatrix) -> f64 {
        if cur.rows() != prev.rows() + 1 {
            return f64::NEG_INFINITY;
        }
        let (Some(s), Some(det)) = (
            InvasionState::from_row(state),
            cur.last_row().and_then(DetectionFrontier::from_row),
        ) else {
            return f64::NEG_INFINITY;
        };
        match prev.last_row() {
            None => {
                if det == DetectionFrontier::origin(&self.params) && s.contains(self.params.origin) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Some(row) => match DetectionFrontier::from_row(row) {
                Some(p) => observation_log_density(&self.params, s, p, det),
                None => f64::NEG_INFINITY,
            },
        }
    }

    fn u1_log_density(&self, ctx: &StepContext<'_, bool>, _: &Particle<bool>, corrected: &Particle<bool>) -> f64 {
        match self.step_fiber(ctx, corrected) {
            Some(f) => -(f.right.count * f.left.count).ln(),
            None => 0.0,
        }
    }

    fn u2_log_normalizer(&self, ctx: &StepContext<'_, bool>, corrected: &Particle<bool>) -> f64 {
        match self.step_fiber(ctx, corrected) {
            Some(f) => (f.right.mass * f.left.mass).ln(),
            None => 0.0,
        }
    }
}

/// A simulated invasion and the observations it generates.
#[derive(Debug, Clone, PartialEq)]
pub struct InvasionTruth {
    pub trajectory: TrajectoryMatrix<bool>,
    pub fronts: Vec<InvasionState>,
    pub frontiers: Vec<DetectionFrontier>,
    pub feed: Vec<ObservationMatrix<bool>>,
    /// First time every cell is invaded, if that happened.
    pub completion_time: Option<usize>,
}

/// Builds `z^1, ..., z^T` from detected intervals.
pub fn feed_from_frontiers(cells: usize, frontiers: &[DetectionFrontier]) -> Vec<ObservationMatrix<bool>> {
    let mut cumulative: Vec<Option<bool>> = Vec::with_capacity(cells * frontiers.len());
    frontiers
        .iter()
        .map(|d| {
            cumulative.extend((1..=cells).map(|m| (d.left..=d.right).contains(&m).then_some(true)));
            ObservationMatrix::from_cells(cells, cumulative.clone()).expect("whole rows")
        })
        .collect()
}

/// Detected intervals of every row of `z`.
pub fn frontiers_from_observations(z: &ObservationMatrix<bool>) -> Result<Vec<DetectionFrontier>> {
    (0..z.rows())
        .map(|i| {
            let row: Vec<bool> = z.row(i).iter().map(|c| c.is_some()).collect();
            DetectionFrontier::from_row(&row).ok_or_else(|| {
                SisError::Shape(format!("row {} of the observations is not one nonempty interval", i + 1))
            })
        })
        .collect()
}

/// Checks that a feed is one this model can produce: presence-only,
/// monotone, revealing cells of the newest row only, and with detected
/// intervals that grow outwards from the origin.
pub fn check_feed(feed: &[ObservationMatrix<bool>], origin: Option<usize>) -> Result<()> {
    crate::feed::check_presence_only(feed)?;
    crate::matrix::check_feed(feed)?;
    let mut prev: Option<DetectionFrontier> = None;
    for (k, z) in feed.iter().enumerate() {
        let t = k + 1;
        if k > 0 {
            let before = &feed[k - 1];
            for i in 0..t - 1 {
                for m in 0..z.cols() {
                    if z.get(i, m) != before.get(i, m) {
                        return Err(SisError::Revelation {
                            t,
                            i: i + 1,
                            m: m + 1,
                            reason: "only the newest row can be revealed",
                        });
                    }
                }
            }
        }
        let row: Vec<bool> = z.row(t - 1).iter().map(|c| c.is_some()).collect();
        let det = DetectionFrontier::from_row(&row)
            .ok_or_else(|| SisError::Shape(format!("detections at t={t} are not one nonempty interval")))?;
        match prev {
            None => {
                if det.left != det.right || origin.is_some_and(|mu| mu != det.left) {
                    return Err(SisError::Shape("the first observation must be the origin alone".into()));
                }
            }
            Some(p) if det.left > p.left || det.right < p.right => {
                return Err(SisError::Shape(format!("detected interval shrinks at t={t}")));
            }
            Some(_) => {}
        }
        prev = Some(det);
    }
    Ok(())
}

/// Simulates for `max_time` steps, or until every cell is invaded when no
/// horizon is set.
pub fn simulate_truth(params: &InvasionParams, seed: u64) -> Result<InvasionTruth> {
    let cells = params.cells;
    if params.max_time.is_none() && params.theta == 0.0 && cells > 1 {
        return Err(SisError::InvalidParams(
            "with theta = 0 the invasion never completes; set max_time".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = InvasionState::origin(params);
    let mut det = DetectionFrontier::origin(params);
    let mut fronts = vec![state];
    let mut frontiers = vec![det];
    let mut completion_time = state.is_complete(cells).then_some(1);
    loop {
        let t = fronts.len();
        let done = match params.max_time {
            Some(horizon) => t >= horizon,
            None => completion_time.is_some(),
        };
        if done {
            break;
        }
        state = transition_sample(params, state, &mut rng);
        det = probe_sample(params, state, det, &mut rng);
        fronts.push(state);
        frontiers.push(det);
        if completion_time.is_none() && state.is_complete(cells) {
            completion_time = Some(t + 1);
        }
    }
    let mut trajectory = TrajectoryMatrix::new(cells);
    for s in &fronts {
        trajectory.push_row(&s.to_row(cells));
    }
    Ok(InvasionTruth {
        trajectory,
        feed: feed_from_frontiers(cells, &frontiers),
        fronts,
        frontiers,
        completion_time,
    })
}
