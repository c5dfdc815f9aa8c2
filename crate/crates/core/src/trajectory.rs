//! Time grid with stored spectral snapshots.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

/// A trajectory: strictly increasing times and one spectral snapshot
/// per time. All snapshots share a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    snapshots: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new() -> Trajectory {
        Trajectory {
            times: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    /// Uniform time grid `t_i = t0 + i·dt` holding `states[i]`.
    pub fn from_uniform(t0: f64, dt: f64, states: Vec<SpectralField>) -> Result<Trajectory> {
        let mut traj = Trajectory::new();
        for (i, s) in states.into_iter().enumerate() {
            traj.push(t0 + i as f64 * dt, s)?;
        }
        Ok(traj)
    }

    pub fn push(&mut self, t: f64, snapshot: SpectralField) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidArgument(format!(
                    "snapshot times must increase: {t} after {last}"
                )));
            }
            self.snapshots[0].grid().same_as(snapshot.grid())?;
        }
        self.times.push(t);
        self.snapshots.push(snapshot);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[SpectralField] {
        &self.snapshots
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.snapshots.first().map(|s| s.grid())
    }

    pub fn first_time(&self) -> Option<f64> {
        self.times.first().copied()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &SpectralField)> {
        self.times.iter().copied().zip(self.snapshots.iter())
    }

    /// Applies `f` to every snapshot, keeping the time grid.
    pub fn map(&self, mut f: impl FnMut(f64, &SpectralField) -> SpectralField) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            snapshots: self.iter().map(|(t, s)| f(t, s)).collect(),
        }
    }

    /// Largest L² distance between matching snapshots of two
    /// trajectories on the same time grid.
    pub fn sup_l2_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::GridMismatch(
                "trajectories use different time grids".into(),
            ));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.snapshots.iter().zip(&other.snapshots) {
            worst = worst.max(a.sub(b).l2_norm());
        }
        Ok(worst)
    }
}

impl Default for Trajectory {
    fn default() -> Self {
        Trajectory::new()
    }
}
