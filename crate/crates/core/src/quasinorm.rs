//! Distribution functions, `L^p` and weak `L^p` quasinorms, the equivalent
//! r-mean norm, and the weak Hardy quasinorm built on the smooth maximal
//! function.
//!
//! All weak norms are exact for grid data: `|f|` takes finitely many values,
//! so `sup_lambda lambda d_f(lambda)^{1/p}` is attained just below one of them
//! and reduces to `max_k a_k (k h^n)^{1/p}` over the decreasing rearrangement.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction, VectorGridFunction};
use crate::kernel::Kernel;
use crate::maximal::{smooth_maximal, ScaleSet};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// How a [`NormReport`] value was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DistributionSup,
    RMeanSets,
    Lp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::DistributionSup => "distribution_sup",
            Method::RMeanSets => "r_mean_sets",
            Method::Lp => "lp",
        }
    }
}

/// A quasinorm value together with what produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    pub r: Option<f64>,
    pub value: f64,
    pub method: Method,
    pub samples: usize,
    pub length: f64,
    pub dim: usize,
    /// Scales per octave of the maximal function, when one was involved.
    pub per_octave: Option<usize>,
}

impl NormReport {
    fn new<T: Real>(grid: &Grid<T>, p: T, value: T, method: Method) -> Self {
        Self {
            p: to_f64(p),
            r: None,
            value: to_f64(value),
            method,
            samples: grid.samples_per_axis(),
            length: to_f64(grid.length()),
            dim: grid.dim(),
            per_octave: None,
        }
    }

    pub const CSV_HEADER: &'static str = "scenario,p,r,method,value,S,L,m";

    /// `scenario,p,r,method,value,S,L,m`; absent fields are left empty.
    pub fn csv_row(&self, scenario: &str) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            scenario,
            self.p,
            self.r.map(|r| r.to_string()).unwrap_or_default(),
            self.method.name(),
            self.value,
            self.samples,
            self.length,
            self.per_octave.map(|m| m.to_string()).unwrap_or_default()
        )
    }
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if !(p > T::zero()) || !p.is_finite() {
        return Err(invalid("exponent p must be positive and finite"));
    }
    Ok(())
}

fn sorted_desc<T: Real>(mut values: Vec<T>) -> Vec<T> {
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite samples"));
    values
}

/// `|{ |f| > lambda }|` as `h^n` times a cell count.
pub fn distribution_function<T: Real>(f: &GridFunction<T>, lambda: T) -> Result<T> {
    if !(lambda >= T::zero()) {
        return Err(invalid("lambda must be nonnegative"));
    }
    let count = f.values().iter().filter(|v| v.norm() > lambda).count();
    Ok(from_usize::<T>(count) * f.grid().cell_volume())
}

/// Weak-`L^p` quasinorm of nonnegative samples with cell measure `cell`.
pub fn weak_lp_of<T: Real>(values: &[T], cell: T, p: T) -> T {
    let a = sorted_desc(values.to_vec());
    let inv_p = T::one() / p;
    a.iter()
        .enumerate()
        .map(|(k, &v)| v * (from_usize::<T>(k + 1) * cell).powf(inv_p))
        .fold(T::zero(), T::max)
}

/// `sup_lambda lambda |{|f| > lambda}|^{1/p}`.
pub fn weak_lp<T: Real>(f: &GridFunction<T>, p: T) -> Result<NormReport> {
    check_p(p)?;
    let value = weak_lp_of(&f.magnitudes(), f.grid().cell_volume(), p);
    Ok(NormReport::new(f.grid(), p, value, Method::DistributionSup))
}

/// r-mean quasinorm of nonnegative samples.
pub fn weak_lp_r_mean_of<T: Real>(values: &[T], cell: T, p: T, r: T) -> T {
    let a = sorted_desc(values.to_vec());
    let expo = T::one() / p - T::one() / r;
    let inv_r = T::one() / r;
    let mut acc = T::zero();
    let mut best = T::zero();
    for (k, &v) in a.iter().enumerate() {
        acc = acc + v.powf(r);
        let measure = from_usize::<T>(k + 1) * cell;
        best = best.max(measure.powf(expo) * (acc * cell).powf(inv_r));
    }
    best
}

/// `sup_{0 < |E| < inf} |E|^{1/p - 1/r} (int_E |f|^r)^{1/r}` for `0 < r < p`.
///
/// For a fixed measure the integral is largest on a superlevel set, so only
/// the sets of the `k` largest cells are examined.
pub fn weak_lp_r_mean<T: Real>(f: &GridFunction<T>, p: T, r: T) -> Result<NormReport> {
    check_p(p)?;
    if !(r > T::zero()) || r >= p {
        return Err(invalid("need 0 < r < p"));
    }
    let value = weak_lp_r_mean_of(&f.magnitudes(), f.grid().cell_volume(), p, r);
    let mut report = NormReport::new(f.grid(), p, value, Method::RMeanSets);
    report.r = Some(to_f64(r));
    Ok(report)
}

/// `(h^n sum |v|^p)^{1/p}` of nonnegative samples.
pub fn lp_of<T: Real>(values: &[T], cell: T, p: T) -> T {
    let s: T = values.iter().map(|v| v.powf(p)).sum();
    (s * cell).powf(T::one() / p)
}

/// Riemann-sum `L^p` quasinorm.
pub fn lp_norm<T: Real>(f: &GridFunction<T>, p: T) -> Result<NormReport> {
    check_p(p)?;
    let value = lp_of(&f.magnitudes(), f.grid().cell_volume(), p);
    Ok(NormReport::new(f.grid(), p, value, Method::Lp))
}

fn check_kernel<T: Real, K: Kernel<T> + ?Sized>(kernel: &K) -> Result<()> {
    if kernel.integral().abs() <= lit::<T>(1e-12) {
        return Err(Error::ZeroIntegral);
    }
    Ok(())
}

/// `||M(F; Phi)||_{L^{p,inf}}` with the sup over `t` taken over `scales`.
pub fn hp_weak<T: Real, K: Kernel<T> + ?Sized>(
    fs: &VectorGridFunction<T>,
    p: T,
    kernel: &K,
    scales: &ScaleSet<T>,
) -> Result<NormReport> {
    check_p(p)?;
    check_kernel(kernel)?;
    let m = smooth_maximal(fs, kernel, scales)?;
    let mut report = weak_lp(&m, p)?;
    report.per_octave = Some(scales.per_octave());
    Ok(report)
}

/// `||M(F; Phi)||_{L^p}`.
pub fn hp_strong<T: Real, K: Kernel<T> + ?Sized>(
    fs: &VectorGridFunction<T>,
    p: T,
    kernel: &K,
    scales: &ScaleSet<T>,
) -> Result<NormReport> {
    check_p(p)?;
    check_kernel(kernel)?;
    let m = smooth_maximal(fs, kernel, scales)?;
    let mut report = lp_norm(&m, p)?;
    report.per_octave = Some(scales.per_octave());
    Ok(report)
}
