//! Parameters shared by the scenario runners.

use serde::{Deserialize, Serialize};

use crate::bumps::{build_lp_bump, BumpSpec, TestFunction};
use crate::error::Result;
use crate::grid::Grid;
use crate::maximal::ScaleSet;

/// Grid geometry as it appears in configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub length: f64,
    pub samples: usize,
}

impl GridSpec {
    pub const fn new(dim: usize, length: f64, samples: usize) -> Self {
        Self { dim, length, samples }
    }

    pub fn build(&self) -> Result<Grid<f64>> {
        Grid::new(self.dim, self.length, self.samples)
    }

    pub fn describe(&self) -> String {
        format!("dim={} L={} S={}", self.dim, self.length, self.samples)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(1, 32.0, 1024)
    }
}

/// Kernel, bump and scale choices for maximal-function based norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Smoothing {
    /// Sharpness of the Littlewood-Paley bump.
    pub sharpness: f64,
    /// Width of the Gaussian kernel of the smooth maximal function.
    pub kernel_sigma: f64,
    /// Scales per octave.
    pub per_octave: usize,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self {
            sharpness: 1.0,
            kernel_sigma: 1.0,
            per_octave: 4,
        }
    }
}

impl Smoothing {
    pub fn bump(&self) -> Result<BumpSpec<f64>> {
        build_lp_bump(self.sharpness)
    }

    pub fn kernel(&self, dim: usize) -> TestFunction<f64> {
        TestFunction::gaussian(dim, self.kernel_sigma)
    }

    pub fn scales(&self, grid: &Grid<f64>) -> Result<ScaleSet<f64>> {
        ScaleSet::new(grid, self.per_octave)
    }
}
