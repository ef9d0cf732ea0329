//! Dyadic cubes and the Whitney decomposition of an open set given by a
//! grid mask.
//!
//! Cubes at level `l` have side `L / 2^l` and are aligned so that grid
//! points sit at cell centres: the cube with integer coordinates `c` spans
//! `[-L/2 - h/2 + c s, -L/2 - h/2 + (c+1) s)` on each axis. Levels finer than
//! the grid are allowed; such a cube holds at most one grid point, at its
//! lower corner.
//!
//! The complement of the open set is represented by its grid points `E`, and
//! `dist(Q, E)` is the periodic Euclidean distance from the closed box to
//! the nearest point of `E`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{from_usize, lit, Real};

/// Top level of the recursion: cubes of side `L/4`.
pub const TOP_LEVEL: u32 = 2;

/// Axis-aligned dyadic cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub coords: [i64; 2],
    pub dim: usize,
}

impl DyadicCube {
    pub fn new(dim: usize, level: u32, coords: [i64; 2]) -> Self {
        Self { level, coords, dim }
    }

    pub fn side<T: Real>(&self, grid: &Grid<T>) -> T {
        grid.length() / lit::<T>(2.0).powi(self.level as i32)
    }

    pub fn diam<T: Real>(&self, grid: &Grid<T>) -> T {
        self.side(grid) * from_usize::<T>(self.dim).sqrt()
    }

    /// Lower corner of the box.
    pub fn lower<T: Real>(&self, grid: &Grid<T>) -> [T; 2] {
        let s = self.side(grid);
        let origin = -grid.length() / lit(2.0) - grid.spacing() / lit(2.0);
        let mut out = [T::zero(); 2];
        for (axis, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = origin + T::from_i64(self.coords[axis]).unwrap() * s;
        }
        out
    }

    pub fn center<T: Real>(&self, grid: &Grid<T>) -> [T; 2] {
        let half = self.side(grid) / lit(2.0);
        let lo = self.lower(grid);
        let mut out = [T::zero(); 2];
        for axis in 0..self.dim {
            out[axis] = lo[axis] + half;
        }
        out
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        let [c0, c1] = self.coords;
        let d1 = if self.dim == 2 { 2 } else { 1 };
        for b1 in 0..d1 {
            for b0 in 0..2 {
                let c1n = if self.dim == 2 { 2 * c1 + b1 } else { 0 };
                out.push(DyadicCube::new(self.dim, self.level + 1, [2 * c0 + b0, c1n]));
            }
        }
        out
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        if self.level == 0 {
            return None;
        }
        let c1 = if self.dim == 2 { self.coords[1].div_euclid(2) } else { 0 };
        Some(DyadicCube::new(self.dim, self.level - 1, [self.coords[0].div_euclid(2), c1]))
    }

    /// Periodic distance from the point to the box dilated by `factor` about
    /// its centre (0 inside).
    pub fn distance_to<T: Real>(&self, grid: &Grid<T>, p: &[T; 2], factor: T) -> T {
        let c = self.center(grid);
        let half = self.side(grid) * factor / lit(2.0);
        let mut acc = T::zero();
        for axis in 0..self.dim {
            let u = grid.wrap(p[axis] - c[axis]).abs();
            let d = (u - half).max(T::zero());
            acc = acc + d * d;
        }
        acc.sqrt()
    }

    /// Whether the point lies in the half-open box dilated by `factor`.
    pub fn contains<T: Real>(&self, grid: &Grid<T>, p: &[T; 2], factor: T) -> bool {
        let c = self.center(grid);
        let half = self.side(grid) * factor / lit(2.0);
        (0..self.dim).all(|axis| {
            let u = grid.wrap(p[axis] - c[axis]);
            u >= -half && u < half
        })
    }

    /// Flat indices of the grid points inside the box dilated by `factor`,
    /// each listed once even when the box wraps around the torus.
    pub fn grid_points<T: Real>(&self, grid: &Grid<T>, factor: T) -> Vec<usize> {
        self.window(grid, factor, T::zero())
            .into_iter()
            .filter(|&i| self.contains(grid, &grid.point(i), factor))
            .collect()
    }

    /// Grid points whose box distance (dilation `factor`) is at most `radius`,
    /// as a superset (candidates only).
    fn window<T: Real>(&self, grid: &Grid<T>, factor: T, radius: T) -> Vec<usize> {
        let h = grid.spacing();
        let s_cells = grid.samples_per_axis() as i64;
        let c = self.center(grid);
        let half = self.side(grid) * factor / lit(2.0) + radius;
        let mut ranges = [(0i64, 0i64); 2];
        for axis in 0..self.dim {
            let start = -grid.length() / lit(2.0);
            let lo = ((c[axis] - half - start) / h).floor().to_i64().unwrap();
            let hi = ((c[axis] + half - start) / h).ceil().to_i64().unwrap();
            ranges[axis] = if hi - lo + 1 >= s_cells { (0, s_cells - 1) } else { (lo, hi) };
        }
        let mut out = Vec::new();
        let (r1lo, r1hi) = if self.dim == 2 { ranges[1] } else { (0, 0) };
        for i1 in r1lo..=r1hi {
            for i0 in ranges[0].0..=ranges[0].1 {
                out.push(grid.flat_index([i0 as isize, i1 as isize]));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Distance from the box to the nearest exterior point within `radius`,
    /// or `None` if there is none that close.
    pub fn exterior_distance<T: Real>(&self, grid: &Grid<T>, exterior: &[bool], radius: T) -> Option<T> {
        self.window(grid, T::one(), radius)
            .into_iter()
            .filter(|&i| exterior[i])
            .map(|i| self.distance_to(grid, &grid.point(i), T::one()))
            .filter(|&d| d <= radius)
            .fold(None, |acc: Option<T>, d| Some(acc.map_or(d, |a| a.min(d))))
    }

    fn has_interior_point<T: Real>(&self, grid: &Grid<T>, mask: &[bool]) -> bool {
        self.grid_points(grid, T::one()).into_iter().any(|i| mask[i])
    }
}

/// Whitney cubes of the open set `{mask}`: disjoint dyadic cubes, each
/// holding at least one point of the set, together holding all of them, with
/// `diam(Q) < dist(Q, E) <= 4 diam(Q)`.
pub fn whitney_decompose<T: Real>(grid: &Grid<T>, mask: &[bool]) -> Result<Vec<DyadicCube>> {
    if mask.len() != grid.len() {
        return Err(Error::CountMismatch {
            expected: grid.len(),
            found: mask.len(),
        });
    }
    if !mask.iter().any(|&m| m) {
        return Ok(Vec::new());
    }
    if mask.iter().all(|&m| m) {
        return Err(Error::NoExterior);
    }
    let exterior: Vec<bool> = mask.iter().map(|m| !m).collect();
    let dim = grid.dim();
    let per_axis = 1i64 << TOP_LEVEL;
    let mut stack = Vec::new();
    for c1 in 0..(if dim == 2 { per_axis } else { 1 }) {
        for c0 in 0..per_axis {
            stack.push(DyadicCube::new(dim, TOP_LEVEL, [c0, c1]));
        }
    }
    let mut out = Vec::new();
    while let Some(q) = stack.pop() {
        let diam = q.diam(grid);
        let holds = q.has_interior_point(grid, mask);
        let near = q.exterior_distance(grid, &exterior, diam).is_some();
        if !near {
            if holds {
                out.push(q);
            }
        } else if holds {
            stack.extend(q.children());
        }
    }
    out.sort();
    Ok(out)
}

/// Exhaustive geometry audit of a Whitney family.
#[derive(Clone, Debug, PartialEq)]
pub struct WhitneyAudit {
    pub cubes: usize,
    /// Cubes failing `diam < dist <= 4 diam`.
    pub distance_violations: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Grid points of the open set not in exactly one cube.
    pub coverage_violations: usize,
    /// Largest number of dilated cubes containing one grid point.
    pub max_overlap: usize,
}

pub fn audit_whitney<T: Real>(grid: &Grid<T>, mask: &[bool], cubes: &[DyadicCube], dilation: T) -> WhitneyAudit {
    let exterior: Vec<bool> = mask.iter().map(|m| !m).collect();
    let ext_points: Vec<[T; 2]> = (0..grid.len()).filter(|&i| exterior[i]).map(|i| grid.point(i)).collect();
    let mut distance_violations = 0;
    let (mut min_ratio, mut max_ratio) = (f64::INFINITY, 0.0f64);
    let mut owners = vec![0usize; grid.len()];
    let mut overlap = vec![0usize; grid.len()];
    for q in cubes {
        let diam = q.diam(grid);
        let dist = ext_points
            .iter()
            .map(|p| q.distance_to(grid, p, T::one()))
            .fold(T::infinity(), T::min);
        if !(diam < dist && dist <= lit::<T>(4.0) * diam) {
            distance_violations += 1;
        }
        let ratio = crate::scalar::to_f64(dist / diam);
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        for i in q.grid_points(grid, T::one()) {
            owners[i] += 1;
        }
        for i in q.grid_points(grid, dilation) {
            overlap[i] += 1;
        }
    }
    let coverage_violations = (0..grid.len())
        .filter(|&i| if mask[i] { owners[i] != 1 } else { owners[i] != 0 })
        .count();
    WhitneyAudit {
        cubes: cubes.len(),
        distance_violations,
        min_ratio,
        max_ratio,
        coverage_violations,
        max_overlap: overlap.into_iter().max().unwrap_or(0),
    }
}
