//! Calderon-Zygmund decomposition of a vector function at height `alpha`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::bumps::TestFunction;
use crate::error::{invalid, Error, Result};
use crate::grid::{Domain, Grid, GridFunction, VectorGridFunction};
use crate::io::write_binary;
use crate::maximal::{grand_maximal, ScaleSet};
use crate::scalar::{from_usize, lit, to_f64, Real};

use super::cubes::{whitney_decompose, DyadicCube};
use super::partition::{partition_of_unity, PartitionOfUnity, GLUE_DILATION};
use super::projection::{local_moments, polynomial_projection_with, Projection, MAX_CONDITION, MIN_SUPPORT};

/// Tunables of [`cz_decompose`].
#[derive(Clone, Debug, PartialEq)]
pub struct CzOptions {
    /// Support dilation of the partition of unity.
    pub dilation: f64,
    pub min_support: usize,
    pub max_condition: f64,
}

impl Default for CzOptions {
    fn default() -> Self {
        Self {
            dilation: GLUE_DILATION,
            min_support: MIN_SUPPORT,
            max_condition: MAX_CONDITION,
        }
    }
}

/// `b_j = (F - P_j) phi_j` on the support of `phi_j`.
///
/// Cubes whose moment system is rejected are left unresolved: their
/// `F phi_j` stays in the good part and the bad part is zero.
#[derive(Clone, Debug)]
pub struct BadPart<T> {
    pub cube: usize,
    pub support: Vec<usize>,
    /// One value list per component, aligned with `support`.
    pub components: Vec<Vec<Complex<T>>>,
    pub projections: Vec<Projection>,
    pub unresolved: Option<String>,
}

impl<T: Real> BadPart<T> {
    pub fn is_resolved(&self) -> bool {
        self.unresolved.is_none()
    }

    pub fn component(&self, grid: Grid<T>, k: usize) -> Result<GridFunction<T>> {
        let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        for (&i, &v) in self.support.iter().zip(&self.components[k]) {
            values[i] = v;
        }
        GridFunction::from_values(grid, values, Domain::Physical)
    }
}

#[derive(Clone, Debug)]
pub struct CzDecomposition<T> {
    pub alpha: T,
    pub p: T,
    pub degree: usize,
    pub mask: Vec<bool>,
    pub cubes: Vec<DyadicCube>,
    pub partition: PartitionOfUnity<T>,
    pub good: VectorGridFunction<T>,
    pub bad: Vec<BadPart<T>>,
}

pub fn cz_decompose<T: Real>(
    fs: &VectorGridFunction<T>,
    alpha: T,
    p: T,
    degree: usize,
    proxy: &GridFunction<T>,
    options: &CzOptions,
) -> Result<CzDecomposition<T>> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(invalid("alpha must be positive"));
    }
    if !(p > T::zero()) || !p.is_finite() {
        return Err(invalid("p must be positive"));
    }
    let grid = *fs.grid();
    if proxy.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let needed = (from_usize::<T>(grid.dim()) / p).ceil();
    if from_usize::<T>(degree) < needed {
        return Err(invalid(format!("degree {degree} below ceil(n/p) = {needed}")));
    }
    let mask: Vec<bool> = proxy.values().iter().map(|v| v.norm() > alpha).collect();
    let cubes = whitney_decompose(&grid, &mask)?;
    let partition = partition_of_unity(&grid, &cubes, lit(options.dilation))?;

    let bad: Vec<BadPart<T>> = (0..cubes.len())
        .into_par_iter()
        .map(|j| bad_part(fs, &partition, j, degree, options))
        .collect();

    let mut good: Vec<Vec<Complex<T>>> = fs.components().iter().map(|f| f.values().to_vec()).collect();
    for b in &bad {
        for (k, vals) in b.components.iter().enumerate() {
            for (&i, &v) in b.support.iter().zip(vals) {
                good[k][i] = good[k][i] - v;
            }
        }
    }
    let good = VectorGridFunction::new(
        good.into_iter()
            .map(|v| GridFunction::from_values(grid, v, Domain::Physical))
            .collect::<Result<Vec<_>>>()?,
    )?;
    Ok(CzDecomposition {
        alpha,
        p,
        degree,
        mask,
        cubes,
        partition,
        good,
        bad,
    })
}

fn bad_part<T: Real>(
    fs: &VectorGridFunction<T>,
    partition: &PartitionOfUnity<T>,
    j: usize,
    degree: usize,
    options: &CzOptions,
) -> BadPart<T> {
    let grid = partition.grid;
    let cube = &partition.cubes[j];
    let phi = &partition.phis[j];
    let center = cube.center(&grid);
    let scale = cube.side(&grid);
    let mut projections = Vec::new();
    for f in fs.components() {
        match polynomial_projection_with(f, phi, center, scale, degree, options.min_support, options.max_condition) {
            Ok(pr) => projections.push(pr),
            Err(e) => {
                return BadPart {
                    cube: j,
                    support: Vec::new(),
                    components: vec![Vec::new(); fs.count()],
                    projections: Vec::new(),
                    unresolved: Some(e.to_string()),
                }
            }
        }
    }
    let components = fs
        .components()
        .iter()
        .zip(&projections)
        .map(|(f, pr)| {
            phi.indices
                .iter()
                .zip(&phi.values)
                .map(|(&i, &w)| {
                    let pv = pr.eval(&grid, &grid.point(i));
                    let pv = Complex::new(T::from_f64(pv.re).unwrap(), T::from_f64(pv.im).unwrap());
                    (f.values()[i] - pv) * w
                })
                .collect()
        })
        .collect();
    BadPart {
        cube: j,
        support: phi.indices.clone(),
        components,
        projections,
        unresolved: None,
    }
}

/// [`cz_decompose`] with the dictionary grand maximal function as proxy.
pub fn cz_decompose_grand<T: Real>(
    fs: &VectorGridFunction<T>,
    alpha: T,
    p: T,
    degree: usize,
    dictionary: &[TestFunction<T>],
    scales: &ScaleSet<T>,
) -> Result<CzDecomposition<T>> {
    let proxy = grand_maximal(fs, dictionary, scales)?;
    cz_decompose(fs, alpha, p, degree, &proxy, &CzOptions::default())
}

#[derive(Serialize)]
struct Manifest {
    alpha: f64,
    degree: usize,
    p: f64,
    dim: usize,
    samples: usize,
    length: f64,
    components: usize,
    cubes: usize,
    resolved: usize,
}

impl<T: Real> CzDecomposition<T> {
    pub fn grid(&self) -> &Grid<T> {
        self.good.grid()
    }

    /// `sum_j b_j` as a vector function.
    pub fn bad_total(&self) -> Result<VectorGridFunction<T>> {
        let grid = *self.grid();
        let mut acc = vec![vec![Complex::new(T::zero(), T::zero()); grid.len()]; self.good.count()];
        for b in &self.bad {
            for (k, vals) in b.components.iter().enumerate() {
                for (&i, &v) in b.support.iter().zip(vals) {
                    acc[k][i] = acc[k][i] + v;
                }
            }
        }
        VectorGridFunction::new(
            acc.into_iter()
                .map(|v| GridFunction::from_values(grid, v, Domain::Physical))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `G + sum_j b_j`.
    pub fn reconstruct(&self) -> Result<VectorGridFunction<T>> {
        self.good.plus(&self.bad_total()?)
    }

    pub fn resolved(&self) -> usize {
        self.bad.iter().filter(|b| b.is_resolved()).count()
    }

    /// Largest moment of `b_j` up to the degree, relative to `int |b_j|`.
    pub fn moment_residual(&self, j: usize) -> f64 {
        let b = &self.bad[j];
        let grid = self.grid();
        let cube = &self.cubes[j];
        let cell = to_f64(grid.cell_volume());
        b.components
            .iter()
            .map(|vals| {
                let mass: f64 = vals.iter().map(|v| to_f64(v.norm())).sum::<f64>() * cell;
                if mass == 0.0 {
                    return 0.0;
                }
                local_moments(grid, &b.support, vals, cube.center(grid), cube.side(grid), self.degree)
                    .into_iter()
                    .map(|m| m.norm() / mass)
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `sup` of the `l^2` magnitude of `G` over the open set, divided by `alpha`.
    pub fn good_ratio_on_set(&self) -> f64 {
        let mag = self.good.magnitude();
        let sup = mag
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(v, _)| to_f64(*v))
            .fold(0.0, f64::max);
        sup / to_f64(self.alpha)
    }

    /// Writes `cubes.csv`, `good_<k>.bin`, `bad_<j>_<k>.bin` for resolved
    /// cubes and `manifest.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let grid = *self.grid();
        let mut csv = BufWriter::new(fs::File::create(dir.join("cubes.csv"))?);
        writeln!(csv, "index,level,c0,c1,side,resolved")?;
        for (j, q) in self.cubes.iter().enumerate() {
            writeln!(
                csv,
                "{j},{},{},{},{},{}",
                q.level,
                q.coords[0],
                q.coords[1],
                to_f64(q.side(&grid)),
                self.bad[j].is_resolved()
            )?;
        }
        csv.flush()?;
        for (k, g) in self.good.components().iter().enumerate() {
            write_binary(g, BufWriter::new(fs::File::create(dir.join(format!("good_{k}.bin")))?))?;
        }
        for b in self.bad.iter().filter(|b| b.is_resolved()) {
            for k in 0..b.components.len() {
                let f = b.component(grid, k)?;
                let name = format!("bad_{:05}_{k}.bin", b.cube);
                write_binary(&f, BufWriter::new(fs::File::create(dir.join(name))?))?;
            }
        }
        let manifest = Manifest {
            alpha: to_f64(self.alpha),
            degree: self.degree,
            p: to_f64(self.p),
            dim: grid.dim(),
            samples: grid.samples_per_axis(),
            length: to_f64(grid.length()),
            components: self.good.count(),
            cubes: self.cubes.len(),
            resolved: self.resolved(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}

/// Annular test bump supported in `1/2 < |u| < 1`.
pub fn annulus_bump(r: f64) -> f64 {
    let v = 4.0 * (r - 0.75);
    if v.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - v * v)).exp()
    }
}

/// Radial envelope of `sup_t |b * psi_t|` away from a cube.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub distances: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Least-squares slope of `log envelope` against `log distance`.
    pub slope: f64,
}

/// Samples `sup_t |b_j^{(k)} * psi_t(x)|` at points at the given distances
/// from the cube centre along each axis and fits a log-log slope.
pub fn bad_part_decay<T: Real>(decomp: &CzDecomposition<T>, j: usize, k: usize, distances: &[f64]) -> Result<DecayFit> {
    let b = &decomp.bad[j];
    if !b.is_resolved() {
        return Err(invalid("cube has no resolved bad part"));
    }
    if distances.len() < 2 {
        return Err(invalid("need at least two distances"));
    }
    let grid = decomp.grid();
    let dim = grid.dim();
    let cell = to_f64(grid.cell_volume());
    let center = decomp.cubes[j].center(grid);
    let pts: Vec<([f64; 2], Complex<f64>)> = b
        .support
        .iter()
        .zip(&b.components[k])
        .map(|(&i, v)| {
            let p = grid.point(i);
            ([to_f64(p[0]), to_f64(p[1])], Complex::new(to_f64(v.re), to_f64(v.im)))
        })
        .collect();
    let length = to_f64(grid.length());
    let wrap = |d: f64| d - length * (d / length).round();
    let c = [to_f64(center[0]), to_f64(center[1])];
    let dirs: Vec<[f64; 2]> = if dim == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
    };
    let envelope: Vec<f64> = distances
        .iter()
        .map(|&d| {
            let mut best = 0.0f64;
            for dir in &dirs {
                let x = [c[0] + d * dir[0], c[1] + d * dir[1]];
                for s in 0..48 {
                    let t = d * 0.9 * (2.5f64 / 0.9).powf(s as f64 / 47.0);
                    let acc: Complex<f64> = pts
                        .iter()
                        .map(|(y, v)| {
                            let dx = wrap(x[0] - y[0]);
                            let dy = if dim == 2 { wrap(x[1] - y[1]) } else { 0.0 };
                            v * annulus_bump((dx * dx + dy * dy).sqrt() / t)
                        })
                        .sum();
                    best = best.max(acc.norm() * cell / t.powi(dim as i32));
                }
            }
            best
        })
        .collect();
    let xs: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = envelope.iter().map(|e| e.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(DecayFit {
        distances: distances.to_vec(),
        envelope,
        slope: sxy / sxx,
    })
}
