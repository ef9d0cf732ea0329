//! Convolution kernels that know how to dilate themselves.

use num_complex::Complex;

use crate::error::Result;
use crate::grid::{apply_transfer, dilate, kernel_transfer, Domain, FftPlan, Grid, GridFunction};
use crate::scalar::Real;

/// A kernel `Phi` whose dilates `Phi_t(x) = t^{-n} Phi(x / t)` can be
/// applied by spectral multiplication on a grid.
pub trait Kernel<T: Real>: Send + Sync {
    /// Transfer array (FFT order) of `Phi_t` on `grid`: multiplying the
    /// unnormalized spectrum of `f` by it and inverting gives `Phi_t * f`.
    fn transfer(&self, plan: &FftPlan<T>, grid: &Grid<T>, t: T) -> Result<Vec<Complex<T>>>;

    /// `int Phi`.
    fn integral(&self) -> T;
}

/// `Phi_t * f` for a physical `f`.
pub fn smooth_with<T: Real, K: Kernel<T> + ?Sized>(f: &GridFunction<T>, kernel: &K, t: T) -> Result<GridFunction<T>> {
    f.require(Domain::Physical)?;
    let plan = FftPlan::new(f.grid());
    let transfer = kernel.transfer(&plan, f.grid(), t)?;
    Ok(apply_transfer(&plan, f, &transfer))
}

/// A kernel given by physical samples on a particular grid.
///
/// Dilation goes through [`dilate`], so it carries that function's
/// resolution floor.
#[derive(Clone, Debug)]
pub struct SampledKernel<T> {
    samples: GridFunction<T>,
}

impl<T: Real> SampledKernel<T> {
    pub fn new(samples: GridFunction<T>) -> Result<Self> {
        samples.require(Domain::Physical)?;
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &GridFunction<T> {
        &self.samples
    }
}

impl<T: Real> Kernel<T> for SampledKernel<T> {
    fn transfer(&self, plan: &FftPlan<T>, grid: &Grid<T>, t: T) -> Result<Vec<Complex<T>>> {
        if grid != self.samples.grid() {
            return Err(crate::error::Error::GridMismatch);
        }
        let dilated = dilate(&self.samples, t)?;
        Ok(kernel_transfer(plan, &dilated))
    }

    fn integral(&self) -> T {
        self.samples.integral().re
    }
}
