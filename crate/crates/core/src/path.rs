//! Uniform-grid sample paths.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathKind {
    /// A driving noise path; starts at zero.
    #[default]
    Driver,
    /// An asset price path; starts at a positive initial price.
    Price,
}

/// `paths` realizations on the grid `t_k = k T / steps`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    horizon: f64,
    steps: usize,
    paths: usize,
    values: Vec<f64>,
    seed: u64,
    kind: PathKind,
}

impl SamplePath {
    /// Builds a path set after checking the grid and start-value invariants.
    pub fn new(
        horizon: f64,
        steps: usize,
        values: Vec<f64>,
        seed: u64,
        kind: PathKind,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(invalid("a path needs at least one step"));
        }
        let width = steps + 1;
        if values.is_empty() || !values.len().is_multiple_of(width) {
            return Err(Error::GridMismatch {
                expected: width,
                found: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at flat index {bad}")));
        }
        let paths = values.len() / width;
        for p in 0..paths {
            let start = values[p * width];
            match kind {
                PathKind::Driver if start != 0.0 => {
                    return Err(invalid(format!("driver path {p} starts at {start}, not 0")))
                }
                PathKind::Price if !(start > 0.0) => {
                    return Err(invalid(format!("price path {p} starts at {start}")))
                }
                _ => {}
            }
        }
        Ok(Self {
            horizon,
            steps,
            paths,
            values,
            seed,
            kind,
        })
    }

    /// Skips the start-value checks; used for derived paths such as
    /// rescaled drivers or cumulative residuals.
    pub fn from_rows(horizon: f64, steps: usize, values: Vec<f64>, seed: u64, kind: PathKind) -> Self {
        debug_assert_eq!(values.len() % (steps + 1), 0);
        let paths = values.len() / (steps + 1);
        Self {
            horizon,
            steps,
            paths,
            values,
            seed,
            kind,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn num_paths(&self) -> usize {
        self.paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.horizon / self.steps as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| self.time(k))
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let w = self.steps + 1;
        &self.values[i * w..(i + 1) * w]
    }

    pub fn path_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.steps + 1;
        &mut self.values[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.steps + 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values of every path at grid index `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.column(self.steps)
    }

    /// Keeps every `factor`-th grid point; `factor` must divide `steps`.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.steps.is_multiple_of(factor) {
            return Err(invalid(format!(
                "subsampling factor {factor} does not divide {} steps",
                self.steps
            )));
        }
        let steps = self.steps / factor;
        let values = self
            .rows()
            .flat_map(|r| (0..=steps).map(move |k| r[k * factor]))
            .collect();
        Ok(Self::from_rows(self.horizon, steps, values, self.seed, self.kind))
    }

    /// Applies `f(t, value)` pointwise.
    pub fn map(&self, kind: PathKind, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let w = self.steps + 1;
        let dt = self.dt();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| f((idx % w) as f64 * dt, v))
            .collect();
        Self::from_rows(self.horizon, self.steps, values, self.seed, kind)
    }
}

/// Samples of a function on a path grid, `f(t_0), …, f(t_n)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridFunction(pub Vec<f64>);

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("grid function is not finite at index {bad}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(alloc::vec![0.0; len])
    }

    pub fn last(&self) -> f64 {
        self.0.last().copied().unwrap_or(0.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for GridFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for GridFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for GridFunction {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn grid_and_invariants() {
        let p = SamplePath::new(2.0, 4, vec![0.0, 1.0, 2.0, 3.0, 4.0], 9, PathKind::Driver).unwrap();
        assert_eq!(p.num_paths(), 1);
        assert_eq!(p.time(3), 1.5);
        assert_eq!(p.terminal(), vec![4.0]);
        assert!(SamplePath::new(1.0, 2, vec![1.0, 2.0, 3.0], 0, PathKind::Driver).is_err());
        assert!(SamplePath::new(1.0, 2, vec![0.0, 2.0, 3.0], 0, PathKind::Price).is_err());
        assert!(SamplePath::new(1.0, 2, vec![0.0, 2.0], 0, PathKind::Driver).is_err());
        assert!(SamplePath::new(1.0, 1, vec![0.0, f64::NAN], 0, PathKind::Driver).is_err());
    }

    #[test]
    fn subsample_keeps_endpoints() {
        let vals: Vec<f64> = (0..9).map(|k| k as f64).collect();
        let p = SamplePath::new(1.0, 8, vals, 0, PathKind::Driver).unwrap();
        let q = p.subsample(4).unwrap();
        assert_eq!(q.path(0), &[0.0, 4.0, 8.0]);
        assert!(p.subsample(3).is_err());
    }
}
