use std::sync::Arc;

use crate::matrix::{KnowledgeMatrix, ObservationMatrix, TrajectoryMatrix};

/// One weighted hypothesis about the history of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle<C> {
    pub trajectory: TrajectoryMatrix<C>,
    /// After correction every particle shares the same matrix, hence the `Arc`.
    pub knowledge: Arc<KnowledgeMatrix>,
    pub weight: f64,
    /// Log partial weights `(row, value)` computed at the latest step; rows
    /// not listed contribute exactly zero.
    pub partial_log: Vec<(usize, f64)>,
    /// Stream the particle drew its latest row from.
    pub rng_stream: u64,
}

impl<C: Copy + PartialEq> Particle<C> {
    pub fn new(trajectory: TrajectoryMatrix<C>, knowledge: KnowledgeMatrix) -> Self {
        Self {
            trajectory,
            knowledge: Arc::new(knowledge),
            weight: 1.0,
            partial_log: Vec::new(),
            rng_stream: 0,
        }
    }

    pub fn time(&self) -> usize {
        self.trajectory.rows()
    }

    /// Whether reading the trajectory through the knowledge mask reproduces `z`.
    pub fn is_consistent_with(&self, z: &ObservationMatrix<C>) -> bool {
        z.is_consistent(&self.trajectory, &self.knowledge)
    }
}

/// The correction map `ρ`: overwrite every known coordinate with its observed
/// value and replace the knowledge with the mask of `z`. Unknown coordinates
/// are left untouched.
pub fn correct<C: Copy + PartialEq>(
    particle: &Particle<C>,
    observations: &ObservationMatrix<C>,
    knowledge: &Arc<KnowledgeMatrix>,
) -> Particle<C> {
    debug_assert_eq!(particle.trajectory.rows(), observations.rows());
    let mut trajectory = particle.trajectory.clone();
    for i in 0..observations.rows() {
        for (m, cell) in observations.row(i).iter().enumerate() {
            if let Some(v) = cell {
                trajectory.set(i, m, *v);
            }
        }
    }
    Particle {
        trajectory,
        knowledge: Arc::clone(knowledge),
        weight: particle.weight,
        partial_log: Vec::new(),
        rng_stream: particle.rng_stream,
    }
}

/// `ρ` restricted to `coords`. Equivalent to [`correct`] whenever the
/// particle already agrees with `observations` outside `coords`, which holds
/// for every particle descended from a corrected one.
pub fn correct_at<C: Copy + PartialEq>(
    particle: &Particle<C>,
    observations: &ObservationMatrix<C>,
    coords: &[(usize, usize)],
    knowledge: &Arc<KnowledgeMatrix>,
) -> Particle<C> {
    let mut trajectory = particle.trajectory.clone();
    for &(i, m) in coords {
        if let Some(v) = observations.get(i, m) {
            trajectory.set(i, m, v);
        }
    }
    Particle {
        trajectory,
        knowledge: Arc::clone(knowledge),
        weight: particle.weight,
        partial_log: Vec::new(),
        rng_stream: particle.rng_stream,
    }
}
