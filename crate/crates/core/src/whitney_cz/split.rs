//! Splitting a function at a height, for interpolation arguments.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::grid::{Domain, GridFunction, VectorGridFunction};
use crate::quasinorm::{lp_of, weak_lp_of};
use crate::scalar::{to_f64, Real};

/// `alpha = gamma lambda` with `gamma = (A2^p2 A1^-p1)^(1/(p1 - p2))`.
pub fn split_height<T: Real>(lambda: T, a1: T, a2: T, p1: T, p2: T) -> Result<T> {
    if !(p1 > T::zero() && p1 < p2) {
        return Err(invalid("need 0 < p1 < p2"));
    }
    if !(a1 > T::zero() && a2 > T::zero() && lambda > T::zero()) {
        return Err(invalid("constants and lambda must be positive"));
    }
    let gamma = (a2.powf(p2) * a1.powf(-p1)).powf(T::one() / (p1 - p2));
    Ok(gamma * lambda)
}

/// `(F chi_{|F| > alpha}, F chi_{|F| <= alpha})` with the `l^2` magnitude.
pub fn split_at_height<T: Real>(
    fs: &VectorGridFunction<T>,
    alpha: T,
) -> Result<(VectorGridFunction<T>, VectorGridFunction<T>)> {
    if !(alpha >= T::zero()) {
        return Err(invalid("alpha must be nonnegative"));
    }
    let mag = fs.magnitude();
    let grid = *fs.grid();
    let zero = Complex::new(T::zero(), T::zero());
    let mut above = Vec::new();
    let mut below = Vec::new();
    for f in fs.components() {
        let (a, b): (Vec<_>, Vec<_>) = f
            .values()
            .iter()
            .zip(&mag)
            .map(|(&v, &m)| if m > alpha { (v, zero) } else { (zero, v) })
            .unzip();
        above.push(GridFunction::from_values(grid, a, Domain::Physical)?);
        below.push(GridFunction::from_values(grid, b, Domain::Physical)?);
    }
    Ok((VectorGridFunction::new(above)?, VectorGridFunction::new(below)?))
}

/// Both sides of the two layer-cake bounds for a split at `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerCake {
    /// `|| |F_alpha| ||_p1^p1`.
    pub above_lhs: f64,
    /// `p/(p - p1) alpha^(p1 - p) ||F||_{p,inf}^p`.
    pub above_rhs: f64,
    /// `|| |F^alpha| ||_p2^p2`.
    pub below_lhs: f64,
    /// `p2/(p2 - p) alpha^(p2 - p) ||F||_{p,inf}^p`.
    pub below_rhs: f64,
}

impl LayerCake {
    pub fn holds(&self, rel: f64) -> bool {
        self.above_lhs <= self.above_rhs * (1.0 + rel) && self.below_lhs <= self.below_rhs * (1.0 + rel)
    }
}

pub fn layer_cake<T: Real>(fs: &VectorGridFunction<T>, alpha: T, p: T, p1: T, p2: T) -> Result<LayerCake> {
    if !(T::zero() < p1 && p1 < p && p < p2) {
        return Err(invalid("need 0 < p1 < p < p2"));
    }
    let (above, below) = split_at_height(fs, alpha)?;
    let cell = fs.grid().cell_volume();
    let w = weak_lp_of(&fs.magnitude(), cell, p).powf(p);
    Ok(LayerCake {
        above_lhs: to_f64(lp_of(&above.magnitude(), cell, p1).powf(p1)),
        above_rhs: to_f64(p / (p - p1) * alpha.powf(p1 - p) * w),
        below_lhs: to_f64(lp_of(&below.magnitude(), cell, p2).powf(p2)),
        below_rhs: to_f64(p2 / (p2 - p) * alpha.powf(p2 - p) * w),
    })
}
