//! Littlewood-Paley projections `Delta_j`, square functions and the
//! `eta`-family operator `sum_j Delta_j^eta f_j`.
//!
//! `Delta_j^K f` multiplies the spectrum of `f` by `K_hat(2^{-j} xi)`. On a
//! grid only finitely many `j` can act on a nonzero frequency, so the sum
//! over `j in Z` is truncated to that window without loss.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::{BumpSpec, Profile, RadialKernel};
use crate::error::{invalid, Error, Result};
use crate::grid::{multiply_and_invert, raw_spectrum, Domain, FftPlan, Grid, GridFunction, VectorGridFunction};
use crate::scalar::{from_usize, lit, Real};

/// Band indices `j_min..=j_max` restricted to `j = residue (mod stride)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleRange {
    pub j_min: i32,
    pub j_max: i32,
    pub stride: u32,
    pub residue: u32,
}

impl ScaleRange {
    pub fn new(j_min: i32, j_max: i32, stride: u32, residue: u32) -> Result<Self> {
        if j_min > j_max {
            return Err(invalid(format!("empty band range {j_min}..={j_max}")));
        }
        if stride == 0 || residue >= stride {
            return Err(invalid(format!("need 0 <= residue < stride, got {residue}, {stride}")));
        }
        Ok(Self {
            j_min,
            j_max,
            stride,
            residue,
        })
    }

    /// Every `j` whose band `[inner 2^j, outer 2^j]` meets the grid's
    /// nonzero frequencies, for a kernel supported in that annulus.
    pub fn window_for<T: Real>(grid: &Grid<T>, kernel: &RadialKernel<T>) -> Self {
        let (inner, outer) = kernel.support();
        let r_min = T::one() / grid.length();
        let r_max = grid.nyquist() * from_usize::<T>(grid.dim()).sqrt();
        let j_min = (r_min / outer).log2().floor().to_i32().unwrap_or(0);
        let j_max = if inner > T::zero() {
            (r_max / inner).log2().ceil().to_i32().unwrap_or(0)
        } else {
            j_min
        };
        Self {
            j_min,
            j_max,
            stride: 1,
            residue: 0,
        }
    }

    /// The full window for the mother bump `Psi`.
    pub fn full_window<T: Real>(grid: &Grid<T>, bump: BumpSpec<T>) -> Self {
        Self::window_for(grid, &RadialKernel::new(bump, Profile::Psi))
    }

    /// Same window restricted to one residue class.
    pub fn lacunary(self, stride: u32, residue: u32) -> Result<Self> {
        Self::new(self.j_min, self.j_max, stride, residue)
    }

    pub fn indices(&self) -> Vec<i32> {
        (self.j_min..=self.j_max)
            .filter(|j| j.rem_euclid(self.stride as i32) == self.residue as i32)
            .collect()
    }
}

/// Output of a single band projection.
#[derive(Clone, Debug)]
pub struct Band<T> {
    pub j: i32,
    pub function: GridFunction<T>,
    /// Set when no grid frequency lies in the band, so the output is
    /// identically zero.
    pub out_of_band: bool,
}

fn band_transfer<T: Real>(grid: &Grid<T>, kernel: &RadialKernel<T>, j: i32) -> (Vec<Complex<T>>, bool) {
    let scale = lit::<T>(2.0).powi(-j);
    let mut any = false;
    let transfer = (0..grid.len())
        .map(|k| {
            let v = kernel.hat(scale * grid.frequency_magnitude(k));
            any |= v != T::zero();
            Complex::new(v, T::zero())
        })
        .collect();
    (transfer, !any)
}

/// `Delta_j^K f` for an arbitrary radial kernel.
pub fn delta_j_with<T: Real>(f: &GridFunction<T>, j: i32, kernel: &RadialKernel<T>) -> Result<Band<T>> {
    f.require(Domain::Physical)?;
    let grid = *f.grid();
    let plan = FftPlan::new(&grid);
    let (transfer, out_of_band) = band_transfer(&grid, kernel, j);
    if out_of_band {
        log::warn!("band j={j} carries no grid frequency");
        return Ok(Band {
            j,
            function: GridFunction::zeros(grid),
            out_of_band,
        });
    }
    let function = multiply_and_invert(&plan, grid, raw_spectrum(&plan, f), &transfer);
    Ok(Band {
        j,
        function,
        out_of_band,
    })
}

/// `Delta_j f = Psi_{2^{-j}} * f`.
pub fn delta_j<T: Real>(f: &GridFunction<T>, j: i32, bump: BumpSpec<T>) -> Result<Band<T>> {
    delta_j_with(f, j, &RadialKernel::new(bump, Profile::Psi))
}

/// All bands `Delta_j^K f` for `j` in `range`, sharing one forward transform.
pub fn bands_with<T: Real>(f: &GridFunction<T>, kernel: &RadialKernel<T>, range: &ScaleRange) -> Result<Vec<Band<T>>> {
    f.require(Domain::Physical)?;
    let grid = *f.grid();
    let plan = FftPlan::new(&grid);
    let spectrum = raw_spectrum(&plan, f);
    Ok(range
        .indices()
        .into_par_iter()
        .map(|j| {
            let (transfer, out_of_band) = band_transfer(&grid, kernel, j);
            let function = if out_of_band {
                GridFunction::zeros(grid)
            } else {
                multiply_and_invert(&plan, grid, spectrum.clone(), &transfer)
            };
            Band {
                j,
                function,
                out_of_band,
            }
        })
        .collect())
}

/// Bands of the mother bump.
pub fn bands<T: Real>(f: &GridFunction<T>, bump: BumpSpec<T>, range: &ScaleRange) -> Result<Vec<Band<T>>> {
    bands_with(f, &RadialKernel::new(bump, Profile::Psi), range)
}

/// `(sum_{j in range} |Delta_j^K f|^2)^{1/2}` as a real physical function.
pub fn square_function_with<T: Real>(
    f: &GridFunction<T>,
    kernel: &RadialKernel<T>,
    range: &ScaleRange,
) -> Result<GridFunction<T>> {
    let bands = bands_with(f, kernel, range)?;
    let grid = *f.grid();
    let mut acc = vec![T::zero(); grid.len()];
    for b in &bands {
        for (a, v) in acc.iter_mut().zip(b.function.values()) {
            *a = *a + v.norm_sqr();
        }
    }
    GridFunction::from_real(grid, acc.into_iter().map(|v| v.sqrt()).collect())
}

/// Square function of the mother bump over `range` (lacunary when the
/// range has stride `q > 1`).
pub fn square_function<T: Real>(f: &GridFunction<T>, bump: BumpSpec<T>, range: &ScaleRange) -> Result<GridFunction<T>> {
    square_function_with(f, &RadialKernel::new(bump, Profile::Psi), range)
}

/// `sum_j Delta_j^K f_j`, component `i` of `fs` paired with the `i`-th index
/// of `range`.
pub fn kernel_family_apply<T: Real>(
    fs: &VectorGridFunction<T>,
    kernel: &RadialKernel<T>,
    range: &ScaleRange,
) -> Result<GridFunction<T>> {
    let js = range.indices();
    if js.len() != fs.count() {
        return Err(Error::CountMismatch {
            expected: js.len(),
            found: fs.count(),
        });
    }
    let grid = *fs.grid();
    let plan = FftPlan::new(&grid);
    let mut total = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for (f, &j) in fs.components().iter().zip(&js) {
        let (transfer, out_of_band) = band_transfer(&grid, kernel, j);
        if out_of_band {
            continue;
        }
        let spectrum = raw_spectrum(&plan, f);
        for ((t, s), m) in total.iter_mut().zip(spectrum).zip(transfer) {
            *t = *t + s * m;
        }
    }
    let ones = vec![Complex::new(T::one(), T::zero()); grid.len()];
    Ok(multiply_and_invert(&plan, grid, total, &ones))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bumps::{build_lp_bump, derived_bumps};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bump() -> BumpSpec<f64> {
        build_lp_bump(1.0).unwrap()
    }

    fn random_band_limited(grid: Grid<f64>, seed: u64, kmax: usize) -> GridFunction<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<(f64, f64, f64)> = (1..=kmax)
            .map(|k| (k as f64, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let l = grid.length();
        GridFunction::from_fn(grid, move |x| {
            modes
                .iter()
                .map(|(k, a, ph)| a * (2.0 * std::f64::consts::PI * k * x[0] / l + ph).cos())
                .sum()
        })
    }

    #[test]
    fn constants_are_annihilated() {
        let g = Grid::new(1, 16.0, 256).unwrap();
        let f = GridFunction::from_fn(g, |_| 3.0);
        for j in -4..=4 {
            assert!(delta_j(&f, j, bump()).unwrap().function.sup_norm() < 1e-12);
        }
    }

    #[test]
    fn exponential_is_an_eigenfunction() {
        let g = Grid::new(1, 16.0, 256).unwrap();
        let k0 = 19.0;
        let f = GridFunction::from_complex_fn(g, |x| {
            let a = 2.0 * std::f64::consts::PI * k0 * x[0] / 16.0;
            Complex::new(a.cos(), a.sin())
        });
        for j in -1..=3 {
            let b = delta_j(&f, j, bump()).unwrap().function;
            let m = bump().psi_hat(2f64.powi(-j) * k0 / 16.0);
            let err = b
                .values()
                .iter()
                .zip(f.values())
                .map(|(u, v)| (u - v * m).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn out_of_band_is_flagged() {
        let g = Grid::new(1, 16.0, 64).unwrap();
        let f = random_band_limited(g, 1, 5);
        let b = delta_j(&f, 20, bump()).unwrap();
        assert!(b.out_of_band);
        assert_eq!(b.function.sup_norm(), 0.0);
    }

    #[test]
    fn reconstruction_1d_and_2d() {
        let g = Grid::new(1, 16.0, 512).unwrap();
        let f = random_band_limited(g, 3, 60);
        let range = ScaleRange::full_window(&g, bump());
        let sum = bands(&f, bump(), &range)
            .unwrap()
            .into_iter()
            .fold(GridFunction::zeros(g), |acc, b| acc.plus(&b.function).unwrap());
        assert!(sum.minus(&f).unwrap().sup_norm() < 1e-10);

        let g2 = Grid::new(2, 8.0, 64).unwrap();
        let f2 = GridFunction::from_fn(g2, |x| (x[0] * 3.0 * std::f64::consts::PI / 4.0).sin() * (x[1] * 2.0 * std::f64::consts::PI).cos());
        let range2 = ScaleRange::full_window(&g2, bump());
        let sum2 = bands(&f2, bump(), &range2)
            .unwrap()
            .into_iter()
            .fold(GridFunction::zeros(g2), |acc, b| acc.plus(&b.function).unwrap());
        assert!(sum2.minus(&f2).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn almost_orthogonality() {
        let g = Grid::new(1, 16.0, 512).unwrap();
        let f = random_band_limited(g, 5, 100);
        for i in -2..=4 {
            for j in (i + 2)..=6 {
                // exact in the spectral representation
                let (ti, _) = band_transfer(&g, &RadialKernel::new(bump(), Profile::Psi), i);
                let (tj, _) = band_transfer(&g, &RadialKernel::new(bump(), Profile::Psi), j);
                assert!(ti.iter().zip(&tj).all(|(a, b)| a * b == Complex::new(0.0, 0.0)));
                let a = delta_j(&f, i, bump()).unwrap().function;
                let ab = delta_j(&a, j, bump()).unwrap().function;
                assert!(ab.sup_norm() < 1e-14);
            }
        }
    }

    #[test]
    fn square_function_of_pure_cosine() {
        let g = Grid::new(1, 16.0, 1024).unwrap();
        let j0 = 2;
        let nu = 2f64.powi(j0);
        let f = GridFunction::from_fn(g, |x| (2.0 * std::f64::consts::PI * nu * x[0]).cos());
        let s = square_function(&f, bump(), &ScaleRange::full_window(&g, bump())).unwrap();
        for (i, v) in s.values().iter().enumerate() {
            let expect = (2.0 * std::f64::consts::PI * nu * g.coord(i)).cos().abs();
            assert!((v.re - expect).abs() < 1e-12);
        }
        let zero = square_function(&GridFunction::zeros(g), bump(), &ScaleRange::full_window(&g, bump())).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
    }

    #[test]
    fn lacunary_pieces_add_up() {
        let g = Grid::new(1, 16.0, 512).unwrap();
        let f = random_band_limited(g, 9, 120);
        let full = ScaleRange::full_window(&g, bump());
        let s = square_function(&f, bump(), &full).unwrap();
        for q in 1..=3u32 {
            let mut acc = vec![0.0; g.len()];
            for r in 0..q {
                let sq = square_function(&f, bump(), &full.lacunary(q, r).unwrap()).unwrap();
                for (a, v) in acc.iter_mut().zip(sq.values()) {
                    *a += v.re * v.re;
                }
            }
            for (a, v) in acc.iter().zip(s.values()) {
                assert!((a - v.re * v.re).abs() <= 1e-12 * (1.0 + v.re * v.re));
            }
        }
    }

    #[test]
    fn eta_reproduces_bands() {
        let g = Grid::new(1, 16.0, 512).unwrap();
        let f = random_band_limited(g, 11, 90);
        let range = ScaleRange::full_window(&g, bump());
        let parts = bands(&f, bump(), &range).unwrap();
        let fs = VectorGridFunction::new(parts.iter().map(|b| b.function.clone()).collect()).unwrap();
        let eta = derived_bumps(bump(), 0, 1).unwrap().eta;
        let out = kernel_family_apply(&fs, &eta, &range).unwrap();
        assert!(out.minus(&f).unwrap().sup_norm() < 1e-10);

        let short = VectorGridFunction::scalar(f.clone());
        assert!(matches!(
            kernel_family_apply(&short, &eta, &range),
            Err(Error::CountMismatch { .. })
        ));
        let single = ScaleRange::new(2, 2, 1, 0).unwrap();
        let one = kernel_family_apply(&short, &eta, &single).unwrap();
        let direct = delta_j_with(&f, 2, &eta).unwrap().function;
        assert!(one.minus(&direct).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn range_validation() {
        assert!(ScaleRange::new(3, 2, 1, 0).is_err());
        assert!(ScaleRange::new(0, 2, 2, 2).is_err());
        assert_eq!(ScaleRange::new(-3, 3, 2, 1).unwrap().indices(), vec![-3, -1, 1, 3]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn square_function_is_subadditive(seed_a in 0u64..1000, seed_b in 0u64..1000) {
            let g = Grid::new(1, 16.0, 256).unwrap();
            let f = random_band_limited(g, seed_a, 50);
            let h = random_band_limited(g, seed_b + 1000, 50);
            let range = ScaleRange::full_window(&g, bump());
            let sf = square_function(&f, bump(), &range).unwrap();
            let sh = square_function(&h, bump(), &range).unwrap();
            let sfh = square_function(&f.plus(&h).unwrap(), bump(), &range).unwrap();
            for i in 0..g.len() {
                prop_assert!(sfh.values()[i].re <= sf.values()[i].re + sh.values()[i].re + 1e-12);
            }
        }
    }
}
