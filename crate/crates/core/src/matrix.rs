//! Row-major matrices indexed by (time, coordinate).
//!
//! Rows are 0-based in code: row `i` holds time `i + 1`. A matrix with `t`
//! rows describes the history up to time `t`.

use crate::error::{Result, SisError};

/// System trajectory: one row of `cols` coordinates per elapsed time step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix<C> {
    cols: usize,
    cells: Vec<C>,
}

impl<C: Copy> TrajectoryMatrix<C> {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            cells: Vec::new(),
        }
    }

    pub fn from_rows(cols: usize, cells: Vec<C>) -> Result<Self> {
        if cols == 0 || cells.len() % cols != 0 {
            return Err(SisError::Shape(format!(
                "{} cells do not fill rows of width {cols}",
                cells.len()
            )));
        }
        Ok(Self { cols, cells })
    }

    pub fn rows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.cells.len() / self.cols
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[C] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }

    pub fn last_row(&self) -> Option<&[C]> {
        self.rows().checked_sub(1).map(|i| self.row(i))
    }

    pub fn get(&self, i: usize, m: usize) -> C {
        self.cells[i * self.cols + m]
    }

    pub fn set(&mut self, i: usize, m: usize, value: C) {
        self.cells[i * self.cols + m] = value;
    }

    pub fn push_row(&mut self, row: &[C]) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.cells.extend_from_slice(row);
    }

    pub fn cells(&self) -> &[C] {
        &self.cells
    }
}

/// Which coordinates of the history are known: `b^t` in matrix form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeMatrix {
    cols: usize,
    bits: Vec<bool>,
}

impl KnowledgeMatrix {
    /// The knowledge before time 1: no rows.
    pub fn empty(cols: usize) -> Self {
        Self {
            cols,
            bits: Vec::new(),
        }
    }

    pub fn from_bits(cols: usize, bits: Vec<bool>) -> Result<Self> {
        if cols == 0 || bits.len() % cols != 0 {
            return Err(SisError::Shape(format!(
                "{} bits do not fill rows of width {cols}",
                bits.len()
            )));
        }
        Ok(Self { cols, bits })
    }

    pub fn rows(&self) -> usize {
        self.bits.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, m: usize) -> bool {
        self.bits[i * self.cols + m]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.cols..(i + 1) * self.cols]
    }

    pub fn last_row(&self) -> Option<&[bool]> {
        self.rows().checked_sub(1).map(|i| self.row(i))
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Copy of `self` with one more row appended.
    pub fn with_row(&self, row: &[bool]) -> Self {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        let mut bits = Vec::with_capacity(self.bits.len() + self.cols);
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(row);
        Self {
            cols: self.cols,
            bits,
        }
    }

    pub fn count_known(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Observation matrix `z^t`: the known value of each coordinate, or `None`
/// where the coordinate is still missing.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix<C> {
    cols: usize,
    cells: Vec<Option<C>>,
}

impl<C: Copy + PartialEq> ObservationMatrix<C> {
    pub fn from_cells(cols: usize, cells: Vec<Option<C>>) -> Result<Self> {
        if cols == 0 || cells.len() % cols != 0 {
            return Err(SisError::Shape(format!(
                "{} cells do not fill rows of width {cols}",
                cells.len()
            )));
        }
        Ok(Self { cols, cells })
    }

    /// Reads a trajectory through a knowledge mask (the map `σ`).
    pub fn observe(trajectory: &TrajectoryMatrix<C>, knowledge: &KnowledgeMatrix) -> Result<Self> {
        if trajectory.cols() != knowledge.cols() || trajectory.rows() != knowledge.rows() {
            return Err(SisError::Shape(format!(
                "trajectory {}x{} vs knowledge {}x{}",
                trajectory.rows(),
                trajectory.cols(),
                knowledge.rows(),
                knowledge.cols()
            )));
        }
        let cells = trajectory
            .cells()
            .iter()
            .zip(knowledge.bits())
            .map(|(x, &b)| b.then_some(*x))
            .collect();
        Ok(Self {
            cols: trajectory.cols(),
            cells,
        })
    }

    pub fn rows(&self) -> usize {
        self.cells.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, m: usize) -> Option<C> {
        self.cells[i * self.cols + m]
    }

    pub fn row(&self, i: usize) -> &[Option<C>] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }

    pub fn cells(&self) -> &[Option<C>] {
        &self.cells
    }

    pub fn knowledge(&self) -> KnowledgeMatrix {
        KnowledgeMatrix {
            cols: self.cols,
            bits: self.cells.iter().map(Option::is_some).collect(),
        }
    }

    /// Checks that `self` (time `t`) extends `prev` (time `t - 1`) by one row
    /// and never hides or alters a previously known cell.
    pub fn check_refines(&self, prev: &Self) -> Result<()> {
        let t = self.rows();
        if self.cols != prev.cols || t != prev.rows() + 1 {
            return Err(SisError::Shape(format!(
                "observation at t={t} ({}x{}) does not extend a {}x{} matrix by one row",
                t,
                self.cols,
                prev.rows(),
                prev.cols
            )));
        }
        for i in 0..prev.rows() {
            for m in 0..self.cols {
                if let Some(old) = prev.get(i, m) {
                    match self.get(i, m) {
                        None => {
                            return Err(SisError::Revelation {
                                t,
                                i: i + 1,
                                m: m + 1,
                                reason: "known cell became unknown",
                            })
                        }
                        Some(new) if new != old => {
                            return Err(SisError::Revelation {
                                t,
                                i: i + 1,
                                m: m + 1,
                                reason: "known cell changed value",
                            })
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// Coordinates `(row, col)` known in `self` but not in `prev`. Every known
    /// cell of the newest row counts as newly observed.
    pub fn newly_observed(&self, prev: Option<&Self>) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.rows() {
            for m in 0..self.cols {
                let was_known = prev
                    .filter(|p| i < p.rows())
                    .is_some_and(|p| p.get(i, m).is_some());
                if self.get(i, m).is_some() && !was_known {
                    out.push((i, m));
                }
            }
        }
        out
    }

    /// True when reading `trajectory` through `knowledge` reproduces `self`.
    pub fn is_consistent(&self, trajectory: &TrajectoryMatrix<C>, knowledge: &KnowledgeMatrix) -> bool {
        Self::observe(trajectory, knowledge).is_ok_and(|z| z == *self)
    }
}

/// Checks monotone revelation across a whole feed `z^1, ..., z^T`.
pub fn check_feed<C: Copy + PartialEq>(feed: &[ObservationMatrix<C>]) -> Result<()> {
    if let Some(first) = feed.first() {
        if first.rows() != 1 {
            return Err(SisError::Shape(format!(
                "first observation has {} rows, expected 1",
                first.rows()
            )));
        }
    }
    for pair in feed.windows(2) {
        pair[1].check_refines(&pair[0])?;
    }
    Ok(())
}
