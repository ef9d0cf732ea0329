//! Smooth partition of unity subordinate to a Whitney family.

use num_complex::Complex;

use crate::bumps::smooth_step;
use crate::error::Result;
use crate::grid::{Domain, Grid, GridFunction};
use crate::scalar::{lit, to_f64, Real};

use super::cubes::DyadicCube;

/// Values of a function on a subset of grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseField<T> {
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> SparseField<T> {
    /// Nonzero samples of a physical function's real part.
    pub fn from_function(f: &GridFunction<T>) -> Self {
        let (indices, values) = f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != T::zero())
            .map(|(i, v)| (i, v.re))
            .unzip();
        Self { indices, values }
    }

    pub fn to_function(&self, grid: Grid<T>) -> Result<GridFunction<T>> {
        let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            values[i] = Complex::new(v, T::zero());
        }
        GridFunction::from_values(grid, values, Domain::Physical)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Tensor glue: 1 on the cube, 0 outside its `b`-dilate.
pub fn glue<T: Real>(grid: &Grid<T>, cube: &DyadicCube, b: T, x: &[T; 2]) -> T {
    let c = cube.center(grid);
    let half = cube.side(grid) / lit(2.0);
    let mut out = T::one();
    for axis in 0..cube.dim {
        let t = grid.wrap(x[axis] - c[axis]).abs() / half;
        out = out * smooth_step((b - t) / (b - T::one()), T::one());
        if out == T::zero() {
            break;
        }
    }
    out
}

/// `phi_j = glue_j / sum_k glue_k`, stored on the grid points of `b Q_j`.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity<T> {
    pub grid: Grid<T>,
    pub cubes: Vec<DyadicCube>,
    pub dilation: T,
    pub phis: Vec<SparseField<T>>,
    neighbours: Vec<Vec<usize>>,
}

/// Default dilation of the glue support.
pub const GLUE_DILATION: f64 = 17.0 / 16.0;

pub fn partition_of_unity<T: Real>(grid: &Grid<T>, cubes: &[DyadicCube], dilation: T) -> Result<PartitionOfUnity<T>> {
    if !(dilation > T::one() && dilation < lit(1.25)) {
        return Err(crate::error::invalid("glue dilation must lie in (1, 5/4)"));
    }
    let mut total = vec![T::zero(); grid.len()];
    let mut raw = Vec::with_capacity(cubes.len());
    for q in cubes {
        let indices = q.grid_points(grid, dilation);
        let values: Vec<T> = indices.iter().map(|&i| glue(grid, q, dilation, &grid.point(i))).collect();
        for (&i, &v) in indices.iter().zip(&values) {
            total[i] = total[i] + v;
        }
        raw.push(SparseField { indices, values });
    }
    let phis = raw
        .into_iter()
        .map(|mut f| {
            for (v, &i) in f.values.iter_mut().zip(&f.indices) {
                *v = *v / total[i];
            }
            f
        })
        .collect();
    let neighbours = cubes
        .iter()
        .map(|q| {
            (0..cubes.len())
                .filter(|&k| dilated_boxes_meet(grid, q, &cubes[k], dilation))
                .collect()
        })
        .collect();
    Ok(PartitionOfUnity {
        grid: *grid,
        cubes: cubes.to_vec(),
        dilation,
        phis,
        neighbours,
    })
}

fn dilated_boxes_meet<T: Real>(grid: &Grid<T>, a: &DyadicCube, b: &DyadicCube, dilation: T) -> bool {
    let ca = a.center(grid);
    let cb = b.center(grid);
    let reach = (a.side(grid) + b.side(grid)) * dilation / lit(2.0);
    (0..a.dim).all(|axis| grid.wrap(ca[axis] - cb[axis]).abs() < reach)
}

impl<T: Real> PartitionOfUnity<T> {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    pub fn phi(&self, j: usize) -> Result<GridFunction<T>> {
        self.phis[j].to_function(self.grid)
    }

    /// `sum_j phi_j` at every grid point.
    pub fn total(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.grid.len()];
        for f in &self.phis {
            for (&i, &v) in f.indices.iter().zip(&f.values) {
                out[i] = out[i] + v;
            }
        }
        out
    }

    /// Off-grid evaluation of `phi_j`; `None` where no glue is active.
    pub fn eval(&self, j: usize, x: &[T; 2]) -> Option<T> {
        let own = glue(&self.grid, &self.cubes[j], self.dilation, x);
        let total: T = self.neighbours[j]
            .iter()
            .map(|&k| glue(&self.grid, &self.cubes[k], self.dilation, x))
            .sum();
        (total > T::zero()).then(|| own / total)
    }

    /// `sup |d^beta phi_j| l_j^{|beta|}` for `|beta| = 0, 1, 2`, sampled on
    /// a lattice over `b Q_j` restricted to the union of the cubes.
    pub fn derivative_bounds(&self, j: usize, lattice: usize) -> [f64; 3] {
        let grid = &self.grid;
        let q = &self.cubes[j];
        let l = q.side(grid);
        let c = q.center(grid);
        let step = l / lit(4096.0);
        let span = l * self.dilation;
        let dim = q.dim;
        let inside = |x: &[T; 2]| self.neighbours[j].iter().any(|&k| self.cubes[k].contains(grid, x, T::one()));
        let at = |x: [T; 2]| self.eval(j, &x).unwrap_or(T::zero());
        let mut best = [0.0f64; 3];
        let n1 = if dim == 2 { lattice } else { 1 };
        for a1 in 0..n1 {
            for a0 in 0..lattice {
                let mut x = [T::zero(); 2];
                let frac = [a0, a1];
                for axis in 0..dim {
                    let f = (lit::<T>(frac[axis] as f64) + lit(0.5)) / lit(lattice as f64) - lit(0.5);
                    x[axis] = c[axis] + f * span;
                }
                if !inside(&x) {
                    continue;
                }
                let v = at(x);
                best[0] = best[0].max(to_f64(v.abs()));
                for axis in 0..dim {
                    let mut xp = x;
                    let mut xm = x;
                    xp[axis] = xp[axis] + step;
                    xm[axis] = xm[axis] - step;
                    let (fp, fm) = (at(xp), at(xm));
                    let d1 = (fp - fm) / (lit::<T>(2.0) * step) * l;
                    let d2 = (fp - lit::<T>(2.0) * v + fm) / (step * step) * l * l;
                    best[1] = best[1].max(to_f64(d1.abs()));
                    best[2] = best[2].max(to_f64(d2.abs()));
                }
                if dim == 2 {
                    let mut pp = x;
                    let mut pm = x;
                    let mut mp = x;
                    let mut mm = x;
                    pp[0] = pp[0] + step;
                    pp[1] = pp[1] + step;
                    pm[0] = pm[0] + step;
                    pm[1] = pm[1] - step;
                    mp[0] = mp[0] - step;
                    mp[1] = mp[1] + step;
                    mm[0] = mm[0] - step;
                    mm[1] = mm[1] - step;
                    let mixed = (at(pp) - at(pm) - at(mp) + at(mm)) / (lit::<T>(4.0) * step * step) * l * l;
                    best[2] = best[2].max(to_f64(mixed.abs()));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whitney_cz::cubes::whitney_decompose;

    fn interval_setup() -> (Grid<f64>, Vec<bool>, PartitionOfUnity<f64>) {
        let g = Grid::new(1, 16.0f64, 1024).unwrap();
        let mask: Vec<bool> = (0..g.len()).map(|i| g.coord(i).abs() < 1.5).collect();
        let cubes = whitney_decompose(&g, &mask).unwrap();
        let pu = partition_of_unity(&g, &cubes, GLUE_DILATION).unwrap();
        (g, mask, pu)
    }

    #[test]
    fn sums_to_one_on_the_set_and_vanishes_off_it() {
        let (_, mask, pu) = interval_setup();
        let total = pu.total();
        for (i, &m) in mask.iter().enumerate() {
            if m {
                assert!((total[i] - 1.0).abs() < 1e-12, "{i}: {}", total[i]);
            } else {
                assert_eq!(total[i], 0.0);
            }
        }
        let g2 = Grid::new(2, 8.0f64, 64).unwrap();
        let mask2: Vec<bool> = (0..g2.len())
            .map(|i| {
                let p = g2.point(i);
                p[0].abs() + p[1].abs() < 1.7
            })
            .collect();
        let cubes = whitney_decompose(&g2, &mask2).unwrap();
        let pu2 = partition_of_unity(&g2, &cubes, GLUE_DILATION).unwrap();
        let total2 = pu2.total();
        for (i, &m) in mask2.iter().enumerate() {
            let want = if m { 1.0 } else { 0.0 };
            assert!((total2[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn glue_is_one_on_cube_and_zero_outside_dilate() {
        let g = Grid::new(1, 8.0f64, 64).unwrap();
        let q = DyadicCube::new(1, 3, [3, 0]);
        let c = q.center(&g)[0];
        assert_eq!(glue(&g, &q, 1.0625, &[c + 0.49, 0.0]), 1.0);
        assert_eq!(glue(&g, &q, 1.0625, &[c + 0.54, 0.0]), 0.0);
        let mid = glue(&g, &q, 1.0625, &[c + 0.515, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn derivative_bounds_scale_with_cube_side() {
        let (g, _, pu) = interval_setup();
        let mut firsts = Vec::new();
        for j in 0..pu.len() {
            if pu.cubes[j].side(&g) >= 4.0 * g.spacing() {
                let b = pu.derivative_bounds(j, 512);
                assert!(b[0] <= 1.0 + 1e-12);
                firsts.push(b[1]);
                assert!(b[1] < 1e3 && b[2] < 1e6, "{b:?}");
            }
        }
        assert!(!firsts.is_empty());
        let max = firsts.iter().cloned().fold(0.0, f64::max);
        let min = firsts.iter().cloned().fold(f64::INFINITY, f64::min);
        // comparable across scales, not growing with 1/l
        assert!(max / min < 10.0, "{min} {max}");
    }
}
