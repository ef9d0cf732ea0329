//! Uniform periodic grids on `[-L/2, L/2)^n` and sampled functions on them.
//!
//! The torus stands in for `R^n`: test functions are chosen to decay well
//! inside the fundamental domain, and every convolution is the exact
//! periodic Riemann-sum convolution computed through the FFT.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Geometry of a uniform periodic grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    length: T,
    samples: usize,
}

impl<T: Real> Grid<T> {
    /// Builds a grid with `samples_per_axis` points per axis on a period of `length`.
    pub fn new(dim: usize, length: T, samples_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if samples_per_axis < 8 || !samples_per_axis.is_power_of_two() {
            return Err(Error::InvalidSampleCount(samples_per_axis));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidLength(crate::scalar::to_f64(length)));
        }
        Ok(Self {
            dim,
            length,
            samples: samples_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples
    }

    /// Grid spacing `h = L / S`.
    pub fn spacing(&self) -> T {
        self.length / from_usize(self.samples)
    }

    /// Total number of samples, `S^dim`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one cell, `h^dim`.
    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of the `i`-th sample along any axis: `-L/2 + i h`.
    pub fn coord(&self, i: usize) -> T {
        -self.length / lit(2.0) + from_usize::<T>(i) * self.spacing()
    }

    /// Per-axis indices of a flat index (axis 0 varies fastest).
    pub fn axis_indices(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat % self.samples, flat / self.samples]
        }
    }

    /// Flat index of per-axis indices; indices are reduced modulo `S`.
    pub fn flat_index(&self, idx: [isize; 2]) -> usize {
        let s = self.samples as isize;
        let i0 = idx[0].rem_euclid(s) as usize;
        if self.dim == 1 {
            i0
        } else {
            i0 + self.samples * idx[1].rem_euclid(s) as usize
        }
    }

    /// Physical coordinates of a flat index; unused trailing entries are zero.
    pub fn point(&self, flat: usize) -> [T; 2] {
        let [i0, i1] = self.axis_indices(flat);
        if self.dim == 1 {
            [self.coord(i0), T::zero()]
        } else {
            [self.coord(i0), self.coord(i1)]
        }
    }

    /// Signed wavenumber of FFT bin `k`, in `[-S/2, S/2)`.
    pub fn wavenumber(&self, k: usize) -> isize {
        if k < self.samples / 2 {
            k as isize
        } else {
            k as isize - self.samples as isize
        }
    }

    /// Frequency `|xi|` (cycles per unit length) of a flat FFT-ordered bin.
    pub fn frequency_magnitude(&self, flat: usize) -> T {
        let [k0, k1] = self.axis_indices(flat);
        let inv_l = T::one() / self.length;
        let x0 = from_isize::<T>(self.wavenumber(k0)) * inv_l;
        if self.dim == 1 {
            x0.abs()
        } else {
            let x1 = from_isize::<T>(self.wavenumber(k1)) * inv_l;
            (x0 * x0 + x1 * x1).sqrt()
        }
    }

    /// Frequency vector of a flat FFT-ordered bin.
    pub fn frequency(&self, flat: usize) -> [T; 2] {
        let [k0, k1] = self.axis_indices(flat);
        let inv_l = T::one() / self.length;
        let x0 = from_isize::<T>(self.wavenumber(k0)) * inv_l;
        if self.dim == 1 {
            [x0, T::zero()]
        } else {
            [x0, from_isize::<T>(self.wavenumber(k1)) * inv_l]
        }
    }

    /// Nyquist frequency per axis, `S / (2L)`.
    pub fn nyquist(&self) -> T {
        from_usize::<T>(self.samples) / (lit::<T>(2.0) * self.length)
    }

    /// Displacement of a flat index measured from the origin bin (index 0),
    /// wrapped into `[-L/2, L/2)`. Used to lay kernels out for convolution.
    pub fn displacement(&self, flat: usize) -> [T; 2] {
        let [i0, i1] = self.axis_indices(flat);
        let h = self.spacing();
        let d0 = from_isize::<T>(self.wavenumber(i0)) * h;
        if self.dim == 1 {
            [d0, T::zero()]
        } else {
            [d0, from_isize::<T>(self.wavenumber(i1)) * h]
        }
    }

    /// Periodic (minimum-image) Euclidean distance between two points.
    pub fn periodic_distance(&self, a: &[T; 2], b: &[T; 2]) -> T {
        let mut acc = T::zero();
        for axis in 0..self.dim {
            let d = self.wrap(a[axis] - b[axis]);
            acc = acc + d * d;
        }
        acc.sqrt()
    }

    /// Wraps a displacement into `[-L/2, L/2)`.
    pub fn wrap(&self, d: T) -> T {
        let l = self.length;
        let half = l / lit(2.0);
        let mut r = (d + half) % l;
        if r < T::zero() {
            r = r + l;
        }
        r - half
    }

    /// Index of the sample at the origin, `S/2`, along each axis.
    pub fn origin_index(&self) -> usize {
        self.flat_index([(self.samples / 2) as isize, (self.samples / 2) as isize])
    }

    pub(crate) fn same_as(&self, other: &Self) -> bool {
        self == other
    }
}

pub(crate) fn from_isize<T: Real>(n: isize) -> T {
    T::from_isize(n).expect("integer representable in target scalar")
}

/// Which representation a [`GridFunction`] currently holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Physical,
    Spectral,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Physical => "physical",
            Domain::Spectral => "spectral",
        }
    }
}

/// Cached forward and inverse FFT plans for one grid size.
#[derive(Clone)]
pub struct FftPlan<T: Real> {
    samples: usize,
    dim: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> FftPlan<T> {
    pub fn new(grid: &Grid<T>) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            samples: grid.samples,
            dim: grid.dim,
            forward: planner.plan_fft_forward(grid.samples),
            inverse: planner.plan_fft_inverse(grid.samples),
        }
    }

    /// Unnormalized forward DFT in place.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.forward);
    }

    /// Unnormalized inverse DFT in place.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        let s = self.samples;
        if self.dim == 1 {
            fft.process(data);
            return;
        }
        // rows are contiguous along axis 0
        fft.process(data);
        let mut column = vec![Complex::new(T::zero(), T::zero()); s];
        for c in 0..s {
            for r in 0..s {
                column[r] = data[c + r * s];
            }
            fft.process(&mut column);
            for r in 0..s {
                data[c + r * s] = column[r];
            }
        }
    }

    /// `S^dim`, the factor picked up by an unnormalized round trip.
    pub fn volume(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }
}

/// Complex samples on a [`Grid`], tagged with their representation.
///
/// Spectral values are stored in FFT order: along each axis bin `k` holds
/// wavenumber `k` for `k < S/2` and `k - S` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
    domain: Domain,
}

impl<T: Real> GridFunction<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); grid.len()],
            grid,
            domain: Domain::Physical,
        }
    }

    pub fn from_values(grid: Grid<T>, values: Vec<Complex<T>>, domain: Domain) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::CountMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            domain,
        })
    }

    /// Physical function from real samples.
    pub fn from_real(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        let values = values
            .into_iter()
            .map(|v| Complex::new(v, T::zero()))
            .collect();
        Self::from_values(grid, values, Domain::Physical)
    }

    /// Samples a real function at every grid point.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(&[T; 2]) -> T + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| Complex::new(f(&grid.point(i)), T::zero()))
            .collect();
        Self {
            grid,
            values,
            domain: Domain::Physical,
        }
    }

    /// Samples a complex function at every grid point.
    pub fn from_complex_fn(grid: Grid<T>, f: impl Fn(&[T; 2]) -> Complex<T> + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)))
            .collect();
        Self {
            grid,
            values,
            domain: Domain::Physical,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), T::max)
    }

    /// Riemann sum `h^n * sum f`.
    pub fn integral(&self) -> Complex<T> {
        let sum: Complex<T> = self
            .values
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |a, &b| a + b);
        sum * self.grid.cell_volume()
    }

    pub(crate) fn require(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainMismatch {
                expected: domain.name(),
                found: self.domain.name(),
            });
        }
        Ok(())
    }

    fn require_same_grid(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Unitary DFT: `F[k] = S^{-n/2} sum_i f[i] e^{-2 pi i k.i / S}`.
    pub fn forward_transform(&self) -> Result<Self> {
        self.require(Domain::Physical)?;
        let plan = FftPlan::new(&self.grid);
        let mut values = self.values.clone();
        plan.forward(&mut values);
        let norm = T::one() / from_usize::<T>(plan.volume()).sqrt();
        values.iter_mut().for_each(|v| *v = *v * norm);
        Ok(Self {
            grid: self.grid,
            values,
            domain: Domain::Spectral,
        })
    }

    /// Inverse of [`forward_transform`](Self::forward_transform).
    pub fn inverse_transform(&self) -> Result<Self> {
        self.require(Domain::Spectral)?;
        let plan = FftPlan::new(&self.grid);
        let mut values = self.values.clone();
        plan.inverse(&mut values);
        let norm = T::one() / from_usize::<T>(plan.volume()).sqrt();
        values.iter_mut().for_each(|v| *v = *v * norm);
        Ok(Self {
            grid: self.grid,
            values,
            domain: Domain::Physical,
        })
    }

    /// Periodic convolution `(f * k)(x) = h^n sum_y f(y) k(x - y)`.
    ///
    /// In terms of the unitary transform this is
    /// `h^n S^{n/2} F^{-1}(F f . F(shift k))`, where `shift k` relabels the
    /// kernel so that its origin sample sits at index 0.
    pub fn convolve(&self, kernel: &Self) -> Result<Self> {
        self.require(Domain::Physical)?;
        kernel.require(Domain::Physical)?;
        self.require_same_grid(kernel)?;
        let plan = FftPlan::new(&self.grid);
        let transfer = kernel_transfer(&plan, kernel);
        Ok(apply_transfer(&plan, self, &transfer))
    }

    /// Pointwise sum.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise difference.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        self.require_same_grid(other)?;
        if self.domain != other.domain {
            return Err(Error::DomainMismatch {
                expected: self.domain.name(),
                found: other.domain.name(),
            });
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            domain: self.domain,
        })
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * c).collect(),
            domain: self.domain,
        }
    }

    /// Cyclic shift by whole cells: `out(x) = f(x - shift h)`.
    pub fn rolled(&self, shift: [isize; 2]) -> Self {
        let mut values = vec![Complex::new(T::zero(), T::zero()); self.values.len()];
        for (flat, out) in values.iter_mut().enumerate() {
            let [i0, i1] = self.grid.axis_indices(flat);
            let src = self
                .grid
                .flat_index([i0 as isize - shift[0], i1 as isize - shift[1]]);
            *out = self.values[src];
        }
        Self {
            grid: self.grid,
            values,
            domain: self.domain,
        }
    }

    /// Riemann-sum `L^2` norm (physical) or spectral `l^2` norm.
    pub fn l2_norm(&self) -> T {
        let s: T = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.domain {
            Domain::Physical => (s * self.grid.cell_volume()).sqrt(),
            Domain::Spectral => s.sqrt(),
        }
    }
}

/// Multiplier values (FFT order) of a physical kernel: `h^n * DFT(shift k)`.
pub(crate) fn kernel_transfer<T: Real>(plan: &FftPlan<T>, kernel: &GridFunction<T>) -> Vec<Complex<T>> {
    let grid = &kernel.grid;
    let s = grid.samples as isize;
    let mut shifted = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for (flat, out) in shifted.iter_mut().enumerate() {
        let [d0, d1] = grid.axis_indices(flat);
        let src = grid.flat_index([d0 as isize + s / 2, d1 as isize + s / 2]);
        *out = kernel.values[src];
    }
    plan.forward(&mut shifted);
    let cell = grid.cell_volume();
    shifted.iter_mut().for_each(|v| *v = *v * cell);
    shifted
}

/// Multiplies the spectrum of a physical function by a transfer array.
pub(crate) fn apply_transfer<T: Real>(
    plan: &FftPlan<T>,
    f: &GridFunction<T>,
    transfer: &[Complex<T>],
) -> GridFunction<T> {
    let mut spectrum = f.values.clone();
    plan.forward(&mut spectrum);
    multiply_and_invert(plan, f.grid, spectrum, transfer)
}

/// Takes an unnormalized spectrum, multiplies and returns to physical space.
pub(crate) fn multiply_and_invert<T: Real>(
    plan: &FftPlan<T>,
    grid: Grid<T>,
    mut spectrum: Vec<Complex<T>>,
    transfer: &[Complex<T>],
) -> GridFunction<T> {
    let norm = T::one() / from_usize::<T>(plan.volume());
    spectrum
        .iter_mut()
        .zip(transfer)
        .for_each(|(v, &m)| *v = *v * m * norm);
    plan.inverse(&mut spectrum);
    GridFunction {
        grid,
        values: spectrum,
        domain: Domain::Physical,
    }
}

/// Unnormalized spectrum of a physical function.
pub(crate) fn raw_spectrum<T: Real>(plan: &FftPlan<T>, f: &GridFunction<T>) -> Vec<Complex<T>> {
    let mut spectrum = f.values.clone();
    plan.forward(&mut spectrum);
    spectrum
}

/// A finite list of functions on one grid: the discrete `l^2(L)`-valued function.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorGridFunction<T> {
    components: Vec<GridFunction<T>>,
}

impl<T: Real> VectorGridFunction<T> {
    pub fn new(components: Vec<GridFunction<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| invalid("vector function needs at least one component"))?;
        for c in &components {
            if !c.grid.same_as(&first.grid) {
                return Err(Error::GridMismatch);
            }
            c.require(Domain::Physical)?;
        }
        Ok(Self { components })
    }

    pub fn scalar(f: GridFunction<T>) -> Self {
        Self {
            components: vec![f],
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.components[0].grid
    }

    pub fn components(&self) -> &[GridFunction<T>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<GridFunction<T>> {
        self.components
    }

    pub fn count(&self) -> usize {
        self.components.len()
    }

    /// Pointwise `l^2` magnitude `sqrt(sum_k |f_k(x)|^2)`.
    pub fn magnitude(&self) -> Vec<T> {
        self.lq_magnitude(lit(2.0))
    }

    /// Pointwise `l^q` magnitude.
    pub fn lq_magnitude(&self, q: T) -> Vec<T> {
        let n = self.grid().len();
        let two = lit::<T>(2.0);
        (0..n)
            .map(|i| {
                if q == two {
                    self.components
                        .iter()
                        .map(|c| c.values[i].norm_sqr())
                        .sum::<T>()
                        .sqrt()
                } else {
                    self.components
                        .iter()
                        .map(|c| c.values[i].norm().powf(q))
                        .sum::<T>()
                        .powf(T::one() / q)
                }
            })
            .collect()
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.count() != other.count() {
            return Err(Error::CountMismatch {
                expected: self.count(),
                found: other.count(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.plus(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        if self.count() != other.count() {
            return Err(Error::CountMismatch {
                expected: self.count(),
                found: other.count(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.minus(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { components })
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            components: self.components.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    pub fn rolled(&self, shift: [isize; 2]) -> Self {
        Self {
            components: self.components.iter().map(|f| f.rolled(shift)).collect(),
        }
    }

    /// Appends a component; the grid must match.
    pub fn push(&mut self, f: GridFunction<T>) -> Result<()> {
        if !f.grid.same_as(self.grid()) {
            return Err(Error::GridMismatch);
        }
        f.require(Domain::Physical)?;
        self.components.push(f);
        Ok(())
    }
}

/// Root-mean-square width `sqrt(int |x|^2 |k| / int |k|)` of a physical kernel.
pub fn effective_width<T: Real>(kernel: &GridFunction<T>) -> T {
    let grid = kernel.grid;
    let (mut num, mut den) = (T::zero(), T::zero());
    for (i, v) in kernel.values.iter().enumerate() {
        let p = grid.point(i);
        let r2 = p[0] * p[0] + p[1] * p[1];
        let m = v.norm();
        num = num + r2 * m;
        den = den + m;
    }
    if den == T::zero() {
        T::zero()
    } else {
        (num / den).sqrt()
    }
}

/// Resamples `t^{-n} k(x / t)` on the same grid through the trigonometric
/// interpolant of `k`.
///
/// Scales for which `t * width(k) < 4h` are rejected instead of aliased.
pub fn dilate<T: Real>(kernel: &GridFunction<T>, t: T) -> Result<GridFunction<T>> {
    kernel.require(Domain::Physical)?;
    if !(t > T::zero()) || !t.is_finite() {
        return Err(invalid("dilation factor must be positive"));
    }
    let grid = kernel.grid;
    let floor = lit::<T>(4.0) * grid.spacing();
    let width = effective_width(kernel);
    if t * width < floor {
        return Err(Error::ScaleUnderflow {
            scale: crate::scalar::to_f64(t * width),
            floor: crate::scalar::to_f64(floor),
        });
    }
    if t == T::one() {
        return Ok(kernel.clone());
    }
    let s = grid.samples;
    let plan = FftPlan::new(&grid);
    // coefficients of the interpolant, origin at index 0
    let mut coeffs = kernel_transfer(&plan, kernel);
    let cell = grid.cell_volume();
    let norm = T::one() / (cell * from_usize::<T>(plan.volume()));
    coeffs.iter_mut().for_each(|c| *c = *c * norm);
    // evaluation matrix along one axis: E[i][k] = w_k e^{2 pi i kappa_k x_i / (t L)}
    let two_pi = T::PI() * lit(2.0);
    let nyq = s / 2;
    let half_length = grid.length / lit(2.0);
    let eval_axis = |data: &[Complex<T>]| -> Vec<Complex<T>> {
        // data indexed by wavenumber bin; returns values at x_i / t
        (0..s)
            .into_par_iter()
            .map(|i| {
                let y = grid.coord(i) / t;
                let mut acc = Complex::new(T::zero(), T::zero());
                // the kernel lives on one period; its dilate vanishes outside it
                if y < -half_length || y >= half_length {
                    return acc;
                }
                for (k, &c) in data.iter().enumerate() {
                    if k == nyq {
                        // Nyquist bin split symmetrically so real kernels stay real
                        let phase = two_pi * from_usize::<T>(nyq) * y / grid.length;
                        acc = acc + c * phase.cos();
                        continue;
                    }
                    let phase = two_pi * from_isize::<T>(grid.wavenumber(k)) * y / grid.length;
                    acc = acc + c * Complex::new(phase.cos(), phase.sin());
                }
                acc
            })
            .collect()
    };
    let scale = T::one() / t.powi(grid.dim as i32);
    let values = if grid.dim == 1 {
        eval_axis(&coeffs)
    } else {
        // separable: first along axis 0 for each axis-1 wavenumber row, then along axis 1
        let mut stage = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        for k1 in 0..s {
            let row = &coeffs[k1 * s..(k1 + 1) * s];
            let out = eval_axis(row);
            stage[k1 * s..(k1 + 1) * s].copy_from_slice(&out);
        }
        let mut result = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        let mut column = vec![Complex::new(T::zero(), T::zero()); s];
        for i0 in 0..s {
            for k1 in 0..s {
                column[k1] = stage[i0 + k1 * s];
            }
            let out = eval_axis(&column);
            for i1 in 0..s {
                result[i0 + i1 * s] = out[i1];
            }
        }
        result
    };
    let values = values.into_iter().map(|v| v * scale).collect();
    GridFunction::from_values(grid, values, Domain::Physical)
}

/// Trigonometric interpolation of `f` onto the grid with `factor` times as
/// many samples per axis. The Nyquist coefficient is split evenly between
/// the two signed bins so real data stays real.
pub fn upsample<T: Real>(f: &GridFunction<T>, factor: usize) -> Result<GridFunction<T>> {
    f.require(Domain::Physical)?;
    if factor == 0 || !factor.is_power_of_two() {
        return Err(invalid("upsampling factor must be a power of two"));
    }
    if factor == 1 {
        return Ok(f.clone());
    }
    let grid = f.grid;
    let fine = Grid::new(grid.dim, grid.length, grid.samples * factor)?;
    let plan = FftPlan::new(&grid);
    let spectrum = raw_spectrum(&plan, f);
    let s = grid.samples as isize;
    let half = lit::<T>(0.5);
    let gain = from_usize::<T>(factor).powi(grid.dim as i32);
    let mut out = vec![Complex::new(T::zero(), T::zero()); fine.len()];
    // each coarse wavenumber maps to one or (at Nyquist) two fine bins
    let targets = |k: usize| -> Vec<(isize, T)> {
        let w = grid.wavenumber(k);
        if w == -s / 2 {
            vec![(-s / 2, half), (s / 2, half)]
        } else {
            vec![(w, T::one())]
        }
    };
    for (flat, &c) in spectrum.iter().enumerate() {
        let [k0, k1] = grid.axis_indices(flat);
        let t1 = if grid.dim == 2 { targets(k1) } else { vec![(0, T::one())] };
        for (w0, a0) in targets(k0) {
            for &(w1, a1) in &t1 {
                let idx = fine.flat_index([w0, w1]);
                out[idx] = out[idx] + c * (a0 * a1 * gain);
            }
        }
    }
    let fine_plan = FftPlan::new(&fine);
    let ones = vec![Complex::new(T::one(), T::zero()); fine.len()];
    Ok(multiply_and_invert(&fine_plan, fine, out, &ones))
}

/// Single-cell spike of total mass `weight` at the cell nearest `location`.
pub fn embed_point_mass<T: Real>(grid: Grid<T>, location: &[T], weight: T) -> Result<GridFunction<T>> {
    if location.len() != grid.dim {
        return Err(invalid("location dimension does not match grid"));
    }
    let half = grid.length / lit(2.0);
    let mut idx = [0isize; 2];
    for (axis, &x) in location.iter().enumerate() {
        if !(x >= -half && x < half) {
            return Err(Error::OutsideDomain);
        }
        let i = ((x + half) / grid.spacing()).round();
        idx[axis] = i.to_isize().unwrap_or(0);
    }
    let mut f = GridFunction::zeros(grid);
    let flat = grid.flat_index(idx);
    f.values[flat] = Complex::new(weight / grid.cell_volume(), T::zero());
    Ok(f)
}

/// Samples `t^{-n} phi(d / t)` at every displacement from the origin bin and
/// returns the transfer array of the resulting kernel.
pub(crate) fn sampled_transfer<T: Real>(
    plan: &FftPlan<T>,
    grid: &Grid<T>,
    t: T,
    phi: impl Fn(&[T; 2]) -> T + Sync,
) -> Vec<Complex<T>> {
    let scale = T::one() / t.powi(grid.dim as i32);
    let mut data: Vec<Complex<T>> = (0..grid.len())
        .into_par_iter()
        .map(|flat| {
            let d = grid.displacement(flat);
            Complex::new(phi(&[d[0] / t, d[1] / t]) * scale, T::zero())
        })
        .collect();
    plan.forward(&mut data);
    let cell = grid.cell_volume();
    data.iter_mut().for_each(|v| *v = *v * cell);
    data
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_spacing_examples() {
        let g = Grid::new(1, 16.0f64, 1024).unwrap();
        assert_eq!(g.spacing(), 0.015625);
        let g2 = Grid::new(2, 8.0f64, 256).unwrap();
        assert_eq!(g2.spacing(), 0.03125);
        assert_eq!(g2.len(), 65536);
        assert!(matches!(
            Grid::new(3, 8.0f64, 256),
            Err(Error::UnsupportedDimension(3))
        ));
        assert!(matches!(
            Grid::new(1, 8.0f64, 100),
            Err(Error::InvalidSampleCount(100))
        ));
        assert!(Grid::new(1, 8.0f64, 4).is_err());
        assert!(Grid::new(1, -1.0f64, 64).is_err());
    }

    #[test]
    fn coordinates_cover_fundamental_domain() {
        let g = Grid::new(1, 4.0f64, 8).unwrap();
        assert_eq!(g.coord(0), -2.0);
        assert_eq!(g.coord(4), 0.0);
        assert_eq!(g.origin_index(), 4);
        assert!((g.spacing() * 8.0 - g.length()).abs() == 0.0);
    }

    #[test]
    fn constant_has_only_dc() {
        let g = Grid::new(1, 16.0f64, 64).unwrap();
        let f = GridFunction::from_fn(g, |_| 1.0);
        let fh = f.forward_transform().unwrap();
        assert!((fh.values()[0].re - 8.0).abs() < 1e-12);
        for v in &fh.values()[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn exponential_has_single_coefficient() {
        let g = Grid::new(1, 16.0f64, 64).unwrap();
        let k0 = 5isize;
        let f = GridFunction::from_complex_fn(g, |x| {
            let ph = 2.0 * std::f64::consts::PI * k0 as f64 * x[0] / 16.0;
            Complex::new(ph.cos(), ph.sin())
        });
        let fh = f.forward_transform().unwrap();
        for (k, v) in fh.values().iter().enumerate() {
            if g.wavenumber(k) == k0 {
                assert!((v.norm() - 8.0).abs() < 1e-10);
            } else {
                assert!(v.norm() < 1e-10, "bin {k}");
            }
        }
    }

    #[test]
    fn round_trip_and_parseval_2d() {
        let g = Grid::new(2, 8.0f64, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<Complex<f64>> = (0..g.len())
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f = GridFunction::from_values(g, vals, Domain::Physical).unwrap();
        let fh = f.forward_transform().unwrap();
        let back = fh.inverse_transform().unwrap();
        let max = f.sup_norm();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).norm() <= 1e-12 * max);
        }
        let phys = f.l2_norm();
        let spec = fh.l2_norm() * g.cell_volume().sqrt();
        assert!((phys - spec).abs() <= 1e-10 * phys);
    }

    #[test]
    fn tag_mismatch_is_rejected() {
        let g = Grid::new(1, 8.0f64, 16).unwrap();
        let f = GridFunction::zeros(g);
        assert!(matches!(
            f.inverse_transform(),
            Err(Error::DomainMismatch { .. })
        ));
        let fh = f.forward_transform().unwrap();
        assert!(fh.forward_transform().is_err());
        assert!(f.convolve(&fh).is_err());
    }

    #[test]
    fn convolution_with_unit_delta_is_identity() {
        let g = Grid::new(1, 8.0f64, 128).unwrap();
        let f = GridFunction::from_fn(g, |x| (-(x[0] - 0.3).powi(2)).exp() * x[0].sin());
        let delta = embed_point_mass(g, &[0.0], 1.0).unwrap();
        let c = f.convolve(&delta).unwrap();
        for (a, b) in f.values().iter().zip(c.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn indicator_self_convolution_is_a_triangle() {
        let g = Grid::new(1, 32.0f64, 4096).unwrap();
        let h = g.spacing();
        let chi = GridFunction::from_fn(g, |x| if x[0] >= 0.0 && x[0] < 1.0 { 1.0 } else { 0.0 });
        let tri = chi.convolve(&chi).unwrap();
        // direct-sum oracle on a few points
        let vals = chi.real_parts();
        for &m in &[2048usize, 2048 + 32, 2048 + 64, 2048 + 100, 2048 + 128] {
            let mut direct = 0.0;
            for i in 0..g.len() {
                let j = (m + g.len() + g.len() / 2 - i) % g.len();
                direct += vals[i] * vals[j] * h;
            }
            assert!((tri.values()[m].re - direct).abs() < 1e-10);
        }
        let (imax, vmax) = tri
            .real_parts()
            .into_iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        assert!((vmax - 1.0).abs() <= 2.0 * h);
        assert!((g.coord(imax) - 1.0).abs() <= 2.0 * h);
    }

    #[test]
    fn averaging_kernel_respects_bounds() {
        let g = Grid::new(1, 16.0f64, 512).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-2.0..3.0)).collect();
        let f = GridFunction::from_real(g, vals.clone()).unwrap();
        let k = GridFunction::from_fn(g, |x| (-std::f64::consts::PI * x[0] * x[0]).exp());
        let c = f.convolve(&k).unwrap();
        let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
        let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
        for v in c.values() {
            assert!(v.re >= lo - 1e-9 && v.re <= hi + 1e-9);
        }
    }

    #[test]
    fn convolution_commutes() {
        let g = Grid::new(2, 8.0f64, 32).unwrap();
        let f = GridFunction::from_fn(g, |x| (x[0] * 1.3).sin() + x[1]);
        let k = GridFunction::from_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp());
        let a = f.convolve(&k).unwrap();
        let b = k.convolve(&f).unwrap();
        let scale = a.sup_norm();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn gaussian_dilation_matches_closed_form() {
        let g = Grid::new(1, 16.0f64, 1024).unwrap();
        let pi = std::f64::consts::PI;
        let k = GridFunction::from_fn(g, |x| (-pi * x[0] * x[0]).exp());
        assert_eq!(dilate(&k, 1.0).unwrap(), k);
        let d = dilate(&k, 2.0).unwrap();
        for (i, v) in d.values().iter().enumerate() {
            let x = g.coord(i);
            let expected = 0.5 * (-pi * x * x / 4.0).exp();
            assert!((v.re - expected).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn dilation_preserves_integral() {
        let g = Grid::new(1, 32.0f64, 2048).unwrap();
        let pi = std::f64::consts::PI;
        let k = GridFunction::from_fn(g, |x| (-pi * x[0] * x[0]).exp() * (1.0 + 0.5 * x[0]));
        let base = k.integral().re;
        for &t in &[0.25, 0.5, 2.0, 4.0] {
            let d = dilate(&k, t).unwrap();
            assert!((d.integral().re - base).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn dilation_composes() {
        let g = Grid::new(1, 32.0f64, 1024).unwrap();
        let pi = std::f64::consts::PI;
        let k = GridFunction::from_fn(g, |x| (-pi * x[0] * x[0]).exp());
        let a = dilate(&dilate(&k, 1.5).unwrap(), 2.0).unwrap();
        let b = dilate(&k, 3.0).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-8);
        }
    }

    #[test]
    fn dilation_below_floor_is_rejected() {
        let g = Grid::new(1, 16.0f64, 256).unwrap();
        let pi = std::f64::consts::PI;
        let k = GridFunction::from_fn(g, |x| (-pi * x[0] * x[0]).exp());
        assert!(matches!(dilate(&k, 0.1), Err(Error::ScaleUnderflow { .. })));
        assert!(dilate(&k, -1.0).is_err());
    }

    #[test]
    fn dilation_2d_is_separable() {
        let g = Grid::new(2, 16.0f64, 128).unwrap();
        let pi = std::f64::consts::PI;
        let k = GridFunction::from_fn(g, |x| (-pi * (x[0] * x[0] + x[1] * x[1])).exp());
        let d = dilate(&k, 2.0).unwrap();
        for i in (0..g.len()).step_by(97) {
            let p = g.point(i);
            let expected = 0.25 * (-pi * (p[0] * p[0] + p[1] * p[1]) / 4.0).exp();
            assert!((d.values()[i].re - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn upsampling_interpolates_smooth_data() {
        let g = Grid::new(1, 16.0f64, 128).unwrap();
        let pi = std::f64::consts::PI;
        let f = GridFunction::from_fn(g, |x| (-pi * x[0] * x[0]).exp());
        let fine = upsample(&f, 4).unwrap();
        assert_eq!(fine.grid().samples_per_axis(), 512);
        for (i, v) in fine.values().iter().enumerate() {
            let x = fine.grid().coord(i);
            assert!((v - Complex::new((-pi * x * x).exp(), 0.0)).norm() < 1e-12);
        }
        let g2 = Grid::new(2, 8.0f64, 32).unwrap();
        let f2 = GridFunction::from_fn(g2, |x| (2.0 * pi * x[0] / 8.0).cos() * (2.0 * pi * 16.0 * x[1] / 8.0).cos());
        let fine2 = upsample(&f2, 2).unwrap();
        for (i, v) in fine2.values().iter().enumerate() {
            let p = fine2.grid().point(i);
            let e = (2.0 * pi * p[0] / 8.0).cos() * (2.0 * pi * 16.0 * p[1] / 8.0).cos();
            assert!((v.re - e).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
        assert!(upsample(&f, 3).is_err());
    }

    #[test]
    fn point_masses() {
        let g = Grid::new(1, 16.0f64, 256).unwrap();
        let h = g.spacing();
        let d = embed_point_mass(g, &[0.0], 1.0).unwrap();
        assert_eq!(d.values()[g.origin_index()].re, 1.0 / h);
        assert_eq!(d.values().iter().filter(|v| v.norm() > 0.0).count(), 1);
        let dipole = embed_point_mass(g, &[1.0], 1.0)
            .unwrap()
            .minus(&embed_point_mass(g, &[-1.0], 1.0).unwrap())
            .unwrap();
        assert_eq!(dipole.integral().re, 0.0);
        assert!(matches!(
            embed_point_mass(g, &[8.0], 1.0),
            Err(Error::OutsideDomain)
        ));
    }

    #[test]
    fn point_mass_shifts_kernel() {
        let g = Grid::new(1, 16.0f64, 256).unwrap();
        let pi = std::f64::consts::PI;
        let k = GridFunction::from_fn(g, |x| (-pi * x[0] * x[0]).exp());
        let d = embed_point_mass(g, &[1.0], 1.0).unwrap();
        let c = d.convolve(&k).unwrap();
        for (i, v) in c.values().iter().enumerate() {
            let x = g.coord(i);
            assert!((v.re - (-pi * (x - 1.0) * (x - 1.0)).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn f32_grid_round_trip() {
        let g = Grid::new(1, 8.0f32, 64).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0].cos());
        let back = f.forward_transform().unwrap().inverse_transform().unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-5);
        }
    }
}
