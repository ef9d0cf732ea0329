//! Weighted polynomial projection onto polynomials of bounded degree.
//!
//! The monomials are taken in local coordinates `u = (x - x_j) / l_j` and the
//! normal equations are solved in `f64` by Cholesky factorisation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::bumps::multi_indices;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::scalar::{to_f64, Real};

use super::partition::SparseField;

/// Smallest weighted support accepted by default.
pub const MIN_SUPPORT: usize = 32;
/// Largest accepted condition number of the moment matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Projection `P` with `int (f - P) u^beta phi = 0` for `|beta| <= N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub center: [f64; 2],
    pub scale: f64,
    pub degree: usize,
    pub exponents: Vec<[usize; 2]>,
    pub coeffs: Vec<Complex<f64>>,
    pub condition: f64,
    pub support: usize,
}

fn local<T: Real>(grid: &Grid<T>, x: &[T; 2], center: &[f64; 2], scale: f64) -> [f64; 2] {
    let mut u = [0.0; 2];
    for (axis, ua) in u.iter_mut().enumerate().take(grid.dim()) {
        let d = grid.wrap(x[axis] - T::from_f64(center[axis]).unwrap());
        *ua = to_f64(d) / scale;
    }
    u
}

fn monomial(u: &[f64; 2], e: &[usize; 2]) -> f64 {
    u[0].powi(e[0] as i32) * u[1].powi(e[1] as i32)
}

impl Projection {
    pub fn eval<T: Real>(&self, grid: &Grid<T>, x: &[T; 2]) -> Complex<f64> {
        let u = local(grid, x, &self.center, self.scale);
        self.exponents
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| c * monomial(&u, e))
            .sum()
    }
}

pub fn polynomial_projection<T: Real>(
    f: &GridFunction<T>,
    weight: &SparseField<T>,
    center: [T; 2],
    scale: T,
    degree: usize,
) -> Result<Projection> {
    polynomial_projection_with(f, weight, center, scale, degree, MIN_SUPPORT, MAX_CONDITION)
}

pub fn polynomial_projection_with<T: Real>(
    f: &GridFunction<T>,
    weight: &SparseField<T>,
    center: [T; 2],
    scale: T,
    degree: usize,
    min_support: usize,
    max_condition: f64,
) -> Result<Projection> {
    f.require(crate::grid::Domain::Physical)?;
    let grid = f.grid();
    let center = [to_f64(center[0]), to_f64(center[1])];
    let scale = to_f64(scale);
    let exponents = multi_indices(grid.dim(), degree);
    let m = exponents.len();
    let support = weight.values.iter().filter(|&&w| w > T::zero()).count();
    if support < min_support.max(m) {
        return Err(Error::SingularGram {
            support,
            condition: f64::INFINITY,
        });
    }
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs_re = DVector::<f64>::zeros(m);
    let mut rhs_im = DVector::<f64>::zeros(m);
    let mut row = vec![0.0; m];
    for (&i, &w) in weight.indices.iter().zip(&weight.values) {
        let w = to_f64(w);
        if w <= 0.0 {
            continue;
        }
        let u = local(grid, &grid.point(i), &center, scale);
        for (r, e) in row.iter_mut().zip(&exponents) {
            *r = monomial(&u, e);
        }
        let v = f.values()[i];
        for a in 0..m {
            rhs_re[a] += w * row[a] * to_f64(v.re);
            rhs_im[a] += w * row[a] * to_f64(v.im);
            for b in 0..=a {
                gram[(a, b)] += w * row[a] * row[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    let eig = gram.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > max_condition {
        return Err(Error::SingularGram { support, condition });
    }
    let chol = gram.cholesky().ok_or(Error::SingularGram { support, condition })?;
    let re = chol.solve(&rhs_re);
    let im = chol.solve(&rhs_im);
    let coeffs = re.iter().zip(im.iter()).map(|(&a, &b)| Complex::new(a, b)).collect();
    Ok(Projection {
        center,
        scale,
        degree,
        exponents,
        coeffs,
        condition,
        support,
    })
}

/// Largest `|int g u^beta|` over `|beta| <= degree`, in local coordinates,
/// for `g` given on a subset of the grid (cell volume included).
pub fn local_moments<T: Real>(
    grid: &Grid<T>,
    indices: &[usize],
    values: &[Complex<T>],
    center: [T; 2],
    scale: T,
    degree: usize,
) -> Vec<Complex<f64>> {
    let center = [to_f64(center[0]), to_f64(center[1])];
    let scale = to_f64(scale);
    let cell = to_f64(grid.cell_volume());
    multi_indices(grid.dim(), degree)
        .iter()
        .map(|e| {
            indices
                .iter()
                .zip(values)
                .map(|(&i, v)| {
                    let u = local(grid, &grid.point(i), &center, scale);
                    Complex::new(to_f64(v.re), to_f64(v.im)) * monomial(&u, e) * cell
                })
                .sum()
        })
        .collect()
}
