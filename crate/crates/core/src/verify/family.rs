//! Seeded families of test inputs.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bumps::TestFunction;
use crate::error::{invalid, Result};
use crate::grid::{embed_point_mass, Domain, Grid, GridFunction, VectorGridFunction};
use crate::kernel::smooth_with;

/// What a [`TestFamily`] produces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyKind {
    /// Real trigonometric polynomials with wavenumbers `k_min..=k_max`
    /// (max-norm in 2D), mean zero, sup norm 1.
    BandLimited { k_min: usize, k_max: usize },
    /// Sums of `pieces` indicators of random boxes with heights in `[-1, 1]`.
    IndicatorSums { pieces: usize },
    /// `|x - c|^{-theta}` on `|x - c| < radius`, capped at half a cell.
    PowerSingularity { theta: f64, radius: f64 },
    /// `delta_a - delta_b` for random grid points.
    PointMassDifferences,
    /// Odd atoms on balls of radius `radius` smoothed by a Gaussian of a
    /// quarter of that width.
    MollifiedAtoms { radius: f64 },
}

/// Deterministic producer of `count` instances from `seed`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFamily {
    pub name: String,
    pub kind: FamilyKind,
    pub grid: Grid<f64>,
    pub count: usize,
    pub seed: u64,
}

impl TestFamily {
    pub fn new(name: &str, kind: FamilyKind, grid: Grid<f64>, count: usize, seed: u64) -> Result<Self> {
        match kind {
            FamilyKind::BandLimited { k_min, k_max } => {
                if k_min == 0 || k_min > k_max || 2 * k_max >= grid.samples_per_axis() {
                    return Err(invalid("band-limited family needs 1 <= k_min <= k_max < S/2"));
                }
            }
            FamilyKind::IndicatorSums { pieces: 0 } => {
                return Err(invalid("indicator sums need at least one piece"));
            }
            FamilyKind::PowerSingularity { theta, radius } if !(theta > 0.0 && radius > 0.0) => {
                return Err(invalid("power singularity needs theta, radius > 0"));
            }
            FamilyKind::MollifiedAtoms { radius } if !(radius > 0.0) => {
                return Err(invalid("atom radius must be positive"));
            }
            _ => {}
        }
        Ok(Self {
            name: name.to_string(),
            kind,
            grid,
            count,
            seed,
        })
    }

    /// Mean-zero band-limited fields with wavenumbers up to `S/8`.
    pub fn standard(grid: Grid<f64>, count: usize, seed: u64) -> Self {
        let k_max = (grid.samples_per_axis() / 8).max(1);
        Self::new(
            "band_limited",
            FamilyKind::BandLimited { k_min: 1, k_max },
            grid,
            count,
            seed,
        )
        .expect("standard band is valid")
    }

    /// Whether every instance has zero integral.
    pub fn mean_zero(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::BandLimited { .. } | FamilyKind::PointMassDifferences | FamilyKind::MollifiedAtoms { .. }
        )
    }

    fn rng(&self, instance: usize, component: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((instance as u64) << 16) | component as u64);
        rng
    }

    pub fn instance(&self, i: usize) -> Result<GridFunction<f64>> {
        self.component(i, 0)
    }

    /// Instance `i` with `components` independent entries.
    pub fn vector_instance(&self, i: usize, components: usize) -> Result<VectorGridFunction<f64>> {
        VectorGridFunction::new((0..components).map(|c| self.component(i, c)).collect::<Result<Vec<_>>>()?)
    }

    fn component(&self, i: usize, c: usize) -> Result<GridFunction<f64>> {
        let mut rng = self.rng(i, c);
        let g = self.grid;
        let half = g.length() / 2.0;
        let dim = g.dim();
        let random_point = |rng: &mut ChaCha8Rng, spread: f64| {
            let mut p = [0.0; 2];
            for a in p.iter_mut().take(dim) {
                *a = rng.gen_range(-spread..spread);
            }
            p
        };
        match self.kind {
            FamilyKind::BandLimited { k_min, k_max } => {
                let mut spec = vec![Complex::new(0.0, 0.0); g.len()];
                for (flat, v) in spec.iter_mut().enumerate() {
                    let [a, b] = g.axis_indices(flat);
                    let k0 = g.wavenumber(a).unsigned_abs();
                    let k1 = if dim == 2 { g.wavenumber(b).unsigned_abs() } else { 0 };
                    let k = k0.max(k1);
                    if k >= k_min && k <= k_max {
                        *v = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                }
                let f = GridFunction::from_values(g, spec, Domain::Spectral)?.inverse_transform()?;
                let re: Vec<f64> = f.real_parts();
                let mean = re.iter().sum::<f64>() / re.len() as f64;
                let re: Vec<f64> = re.iter().map(|v| v - mean).collect();
                let sup = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                GridFunction::from_real(g, re.iter().map(|v| v / sup.max(1e-300)).collect())
            }
            FamilyKind::IndicatorSums { pieces } => {
                let boxes: Vec<([f64; 2], [f64; 2], f64)> = (0..pieces)
                    .map(|_| {
                        let c = random_point(&mut rng, half / 2.0);
                        let mut w = [0.0; 2];
                        for a in w.iter_mut().take(dim) {
                            *a = rng.gen_range(g.length() / 64.0..g.length() / 8.0);
                        }
                        (c, w, rng.gen_range(-1.0..1.0))
                    })
                    .collect();
                Ok(GridFunction::from_fn(g, move |x| {
                    boxes
                        .iter()
                        .filter(|(c, w, _)| (0..dim).all(|a| (x[a] - c[a]).abs() < w[a]))
                        .map(|(_, _, h)| h)
                        .sum()
                }))
            }
            FamilyKind::PowerSingularity { theta, radius } => {
                let c = random_point(&mut rng, half / 4.0);
                let floor = g.spacing() / 2.0;
                Ok(GridFunction::from_fn(g, move |x| {
                    let r = g.periodic_distance(x, &c);
                    if r < radius {
                        r.max(floor).powf(-theta)
                    } else {
                        0.0
                    }
                }))
            }
            FamilyKind::PointMassDifferences => {
                let a = random_point(&mut rng, half / 2.0);
                let mut b = random_point(&mut rng, half / 2.0);
                if g.periodic_distance(&a, &b) < g.spacing() {
                    b[0] += 4.0 * g.spacing();
                }
                embed_point_mass(g, &a[..dim], 1.0)?.minus(&embed_point_mass(g, &b[..dim], 1.0)?)
            }
            FamilyKind::MollifiedAtoms { radius } => {
                let c = random_point(&mut rng, half / 2.0);
                let amp = rng.gen_range(0.5..1.5);
                let atom = GridFunction::from_fn(g, move |x| {
                    if g.periodic_distance(x, &c) < radius {
                        if g.wrap(x[0] - c[0]) < 0.0 {
                            amp
                        } else {
                            -amp
                        }
                    } else {
                        0.0
                    }
                });
                let atom = remove_mean(atom)?;
                smooth_with(&atom, &TestFunction::gaussian(dim, radius / 4.0), 1.0).map(|f| {
                    let re = f.real_parts();
                    GridFunction::from_real(g, re).expect("same grid")
                })
            }
        }
    }
}

fn remove_mean(f: GridFunction<f64>) -> Result<GridFunction<f64>> {
    let re = f.real_parts();
    let mean = re.iter().sum::<f64>() / re.len() as f64;
    GridFunction::from_real(*f.grid(), re.iter().map(|v| v - mean).collect())
}
