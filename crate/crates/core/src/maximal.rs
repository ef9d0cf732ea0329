//! Hardy-Littlewood, smooth, nontangential, Peetre and grand maximal
//! functions for scalar and `l^2`-valued grid data.
//!
//! The smooth variants all read from one [`SmoothedStack`]: for every scale
//! `t` the pointwise `l^2` magnitude of `{Phi_t * f_k}`. Because they share
//! those layers, `M <= M*_a <= (1+a)^b M**_b` holds on the grid exactly.

use num_complex::Complex;
use rayon::prelude::*;

use crate::bumps::TestFunction;
use crate::error::{invalid, Error, Result};
use crate::grid::{raw_spectrum, Domain, FftPlan, Grid, GridFunction, VectorGridFunction};
use crate::kernel::Kernel;
use crate::scalar::{from_usize, lit, Real};

/// Finite stand-in for `t > 0`: the scales `2^{k/m}` inside `[4h, L/4]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSet<T> {
    scales: Vec<T>,
    per_octave: usize,
}

impl<T: Real> ScaleSet<T> {
    /// Every `2^{k/m}` (integer `k`) in `[4h, L/4]`.
    pub fn new(grid: &Grid<T>, per_octave: usize) -> Result<Self> {
        Self::with_range(grid, per_octave, T::zero(), T::infinity())
    }

    /// Like [`ScaleSet::new`] but additionally clipped to `[lo, hi]`.
    pub fn with_range(grid: &Grid<T>, per_octave: usize, lo: T, hi: T) -> Result<Self> {
        if per_octave == 0 {
            return Err(invalid("scales per octave must be positive"));
        }
        let floor = lit::<T>(4.0) * grid.spacing();
        let lo = lo.max(floor);
        let hi = hi.min(grid.length() / lit(4.0));
        let m = from_usize::<T>(per_octave);
        let k_lo = (lo.log2() * m - lit(1e-9)).ceil().to_i64().unwrap_or(0);
        let k_hi = (hi.log2() * m + lit(1e-9)).floor().to_i64().unwrap_or(-1);
        let scales: Vec<T> = (k_lo..=k_hi)
            .map(|k| lit::<T>(2.0).powf(T::from_i64(k).unwrap() / m))
            .filter(|&t| t >= lo * (T::one() - lit(1e-12)) && t <= hi * (T::one() + lit(1e-12)))
            .collect();
        if scales.is_empty() {
            return Err(Error::EmptyScaleSet);
        }
        Ok(Self { scales, per_octave })
    }

    /// An explicit list of scales; sorted and deduplicated.
    pub fn from_scales(mut scales: Vec<T>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::EmptyScaleSet);
        }
        if scales.iter().any(|t| !(*t > T::zero()) || !t.is_finite()) {
            return Err(invalid("scales must be positive and finite"));
        }
        scales.sort_by(|a, b| a.partial_cmp(b).unwrap());
        scales.dedup();
        Ok(Self {
            scales,
            per_octave: 0,
        })
    }

    /// The same range with twice as many scales per octave.
    pub fn refined(&self, grid: &Grid<T>) -> Result<Self> {
        Self::with_range(
            grid,
            (self.per_octave.max(1)) * 2,
            self.scales[0],
            *self.scales.last().unwrap(),
        )
    }

    pub fn scales(&self) -> &[T] {
        &self.scales
    }

    pub fn per_octave(&self) -> usize {
        self.per_octave
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

/// `l^2` magnitudes of `Phi_t * f_k` for every scale in a [`ScaleSet`].
#[derive(Clone, Debug)]
pub struct SmoothedStack<T> {
    grid: Grid<T>,
    scales: Vec<T>,
    layers: Vec<Vec<T>>,
}

/// Smooths every component of `fs` with `kernel` at every scale.
pub fn smoothed_stack<T: Real, K: Kernel<T> + ?Sized>(
    fs: &VectorGridFunction<T>,
    kernel: &K,
    scales: &ScaleSet<T>,
) -> Result<SmoothedStack<T>> {
    let grid = *fs.grid();
    let plan = FftPlan::new(&grid);
    let spectra: Vec<Vec<Complex<T>>> = fs.components().par_iter().map(|f| raw_spectrum(&plan, f)).collect();
    let norm = T::one() / from_usize::<T>(plan.volume());
    let layers = scales
        .scales()
        .par_iter()
        .map(|&t| {
            let transfer = kernel.transfer(&plan, &grid, t)?;
            let mut acc = vec![T::zero(); grid.len()];
            let mut work = vec![Complex::new(T::zero(), T::zero()); grid.len()];
            for spectrum in &spectra {
                for ((w, s), m) in work.iter_mut().zip(spectrum).zip(&transfer) {
                    *w = *s * *m * norm;
                }
                plan.inverse(&mut work);
                for (a, w) in acc.iter_mut().zip(&work) {
                    *a = *a + w.norm_sqr();
                }
            }
            Ok(acc.into_iter().map(|v| v.sqrt()).collect())
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    Ok(SmoothedStack {
        grid,
        scales: scales.scales().to_vec(),
        layers,
    })
}

fn to_function<T: Real>(grid: Grid<T>, values: Vec<T>) -> GridFunction<T> {
    GridFunction::from_real(grid, values).expect("length matches grid")
}

/// Periodic running maximum over `[i - w, i + w]` along one axis of length `s`.
fn sliding_max<T: Real>(row: &[T], w: usize, out: &mut [T]) {
    let s = row.len();
    if 2 * w + 1 >= s {
        let m = row.iter().cloned().fold(T::neg_infinity(), T::max);
        out.iter_mut().for_each(|o| *o = m);
        return;
    }
    let mut deque: std::collections::VecDeque<(usize, T)> = std::collections::VecDeque::new();
    // j runs over the extended index i + w for centres i = 0..s
    let total = s + 2 * w;
    for e in 0..total {
        let v = row[(e + s - w) % s];
        while let Some(&(_, back)) = deque.back() {
            if back <= v {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back((e, v));
        if e >= 2 * w {
            let centre = e - 2 * w;
            while deque.front().unwrap().0 < centre {
                deque.pop_front();
            }
            out[centre] = deque.front().unwrap().1;
        }
    }
}

impl<T: Real> SmoothedStack<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn scales(&self) -> &[T] {
        &self.scales
    }

    /// `l^2` magnitude of the smoothed components at scale index `k`.
    pub fn layer(&self, k: usize) -> &[T] {
        &self.layers[k]
    }

    /// `M(F; Phi)(x) = max_t |Phi_t * F|(x)`.
    pub fn smooth_maximal(&self) -> GridFunction<T> {
        let mut out = vec![T::zero(); self.grid.len()];
        for layer in &self.layers {
            for (o, v) in out.iter_mut().zip(layer) {
                *o = o.max(*v);
            }
        }
        to_function(self.grid, out)
    }

    /// Cone radius in cells, `|d| h <= a t`.
    fn cone_cells(&self, a: T, t: T) -> T {
        a * t / self.grid.spacing()
    }

    /// `M*_a(x) = max_t max_{|y - x| <= a t} |Phi_t * F|(y)` over grid points `y`.
    pub fn nontangential(&self, a: T) -> Result<GridFunction<T>> {
        if !(a > T::zero()) {
            return Err(invalid("aperture must be positive"));
        }
        let s = self.grid.samples_per_axis();
        let mut out = vec![T::zero(); self.grid.len()];
        for (layer, &t) in self.layers.iter().zip(&self.scales) {
            let r = self.cone_cells(a, t);
            let windowed = if self.grid.dim() == 1 {
                let w = r.floor().to_usize().unwrap_or(0);
                let mut o = vec![T::zero(); s];
                sliding_max(layer, w, &mut o);
                o
            } else {
                disc_max(layer, s, r)
            };
            for (o, v) in out.iter_mut().zip(windowed) {
                *o = o.max(v);
            }
        }
        Ok(to_function(self.grid, out))
    }

    /// `M**_b(x) = max_t max_y |Phi_t * F|(y) (1 + |x - y| / t)^{-b}`.
    pub fn peetre(&self, b: T) -> Result<GridFunction<T>> {
        if !(b > T::zero()) {
            return Err(invalid("Peetre exponent must be positive"));
        }
        let offsets = sorted_offsets(&self.grid);
        let mut out = vec![T::zero(); self.grid.len()];
        for (layer, &t) in self.layers.iter().zip(&self.scales) {
            let global = layer.iter().cloned().fold(T::zero(), T::max);
            let inv_t = T::one() / t;
            let grid = self.grid;
            let per_x: Vec<T> = (0..grid.len())
                .into_par_iter()
                .map(|x| {
                    let [x0, x1] = grid.axis_indices(x);
                    let mut best = T::zero();
                    for &(d0, d1, dist) in &offsets {
                        let w = (T::one() + dist * inv_t).powf(-b);
                        if global * w <= best {
                            break;
                        }
                        let y = grid.flat_index([x0 as isize + d0, x1 as isize + d1]);
                        best = best.max(layer[y] * w);
                    }
                    best
                })
                .collect();
            for (o, v) in out.iter_mut().zip(per_x) {
                *o = o.max(v);
            }
        }
        Ok(to_function(self.grid, out))
    }
}

/// Running max over the periodic disc `d0^2 + d1^2 <= r^2` (cell units).
fn disc_max<T: Real>(layer: &[T], s: usize, r: T) -> Vec<T> {
    let mut out = vec![T::zero(); s * s];
    let r_cells = r.floor().to_usize().unwrap_or(0).min(s / 2);
    let mut rows = vec![T::zero(); s * s];
    for d1 in 0..=r_cells {
        let d = from_usize::<T>(d1);
        let w = (r * r - d * d).max(T::zero()).sqrt().floor().to_usize().unwrap_or(0);
        rows.par_chunks_mut(s)
            .zip(layer.par_chunks(s))
            .for_each(|(o, row)| sliding_max(row, w, o));
        for i1 in 0..s {
            let up = (i1 + d1) % s;
            let down = (i1 + s - d1) % s;
            for i0 in 0..s {
                let v = rows[i0 + up * s].max(rows[i0 + down * s]);
                let o = &mut out[i0 + i1 * s];
                *o = o.max(v);
            }
        }
    }
    out
}

/// Offsets `(d0, d1, |d|)` covering the torus once, sorted by minimum-image
/// distance.
fn sorted_offsets<T: Real>(grid: &Grid<T>) -> Vec<(isize, isize, T)> {
    let s = grid.samples_per_axis() as isize;
    let h = grid.spacing();
    let half = s / 2;
    let range: Vec<isize> = (-half..half).collect();
    let mut out = Vec::with_capacity(grid.len());
    if grid.dim() == 1 {
        for &d0 in &range {
            out.push((d0, 0, from_usize::<T>(d0.unsigned_abs()) * h));
        }
    } else {
        for &d1 in &range {
            for &d0 in &range {
                let r2 = (d0 * d0 + d1 * d1) as usize;
                out.push((d0, d1, from_usize::<T>(r2).sqrt() * h));
            }
        }
    }
    out.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    out
}

/// `M(F; Phi)`.
pub fn smooth_maximal<T: Real, K: Kernel<T> + ?Sized>(
    fs: &VectorGridFunction<T>,
    kernel: &K,
    scales: &ScaleSet<T>,
) -> Result<GridFunction<T>> {
    Ok(smoothed_stack(fs, kernel, scales)?.smooth_maximal())
}

/// `M*_a(F; Phi)`.
pub fn nontangential_maximal<T: Real, K: Kernel<T> + ?Sized>(
    fs: &VectorGridFunction<T>,
    kernel: &K,
    a: T,
    scales: &ScaleSet<T>,
) -> Result<GridFunction<T>> {
    if !(a > T::zero()) {
        return Err(invalid("aperture must be positive"));
    }
    smoothed_stack(fs, kernel, scales)?.nontangential(a)
}

/// `M**_b(F; Phi)`.
pub fn peetre_maximal<T: Real, K: Kernel<T> + ?Sized>(
    fs: &VectorGridFunction<T>,
    kernel: &K,
    b: T,
    scales: &ScaleSet<T>,
) -> Result<GridFunction<T>> {
    if !(b > T::zero()) {
        return Err(invalid("Peetre exponent must be positive"));
    }
    smoothed_stack(fs, kernel, scales)?.peetre(b)
}

/// Pointwise max over the dictionary of `M*_1(F; phi)`.
///
/// The dictionary is finite, so this is a lower bound for the grand maximal
/// function over the whole class.
pub fn grand_maximal<T: Real>(
    fs: &VectorGridFunction<T>,
    dictionary: &[TestFunction<T>],
    scales: &ScaleSet<T>,
) -> Result<GridFunction<T>> {
    let grid = *fs.grid();
    let mut out = vec![T::zero(); grid.len()];
    for phi in dictionary {
        let m = nontangential_maximal(fs, phi, T::one(), scales)?;
        for (o, v) in out.iter_mut().zip(m.values()) {
            *o = o.max(v.re);
        }
    }
    Ok(to_function(grid, out))
}

/// The three maximal functions of the chain `M <= M*_a <= (1+a)^b M**_b`
/// from one stack, with the number of grid points where it fails.
#[derive(Clone, Debug)]
pub struct MaximalChain<T> {
    pub smooth: GridFunction<T>,
    pub nontangential: GridFunction<T>,
    pub peetre: GridFunction<T>,
    pub a: T,
    pub b: T,
    pub violations: usize,
}

/// Relative slack allowed in the chain comparison (roundoff in the weights).
pub const CHAIN_SLACK: f64 = 1e-12;

pub fn maximal_chain<T: Real, K: Kernel<T> + ?Sized>(
    fs: &VectorGridFunction<T>,
    kernel: &K,
    a: T,
    b: T,
    scales: &ScaleSet<T>,
) -> Result<MaximalChain<T>> {
    let stack = smoothed_stack(fs, kernel, scales)?;
    let smooth = stack.smooth_maximal();
    let nontangential = stack.nontangential(a)?;
    let peetre = stack.peetre(b)?;
    let factor = (T::one() + a).powf(b);
    let slack = T::one() + lit::<T>(CHAIN_SLACK).max(T::epsilon() * lit(16.0));
    let violations = (0..smooth.values().len())
        .filter(|&i| {
            let m = smooth.values()[i].re;
            let ms = nontangential.values()[i].re;
            let mss = peetre.values()[i].re;
            m > ms * slack || ms > factor * mss * slack
        })
        .count();
    Ok(MaximalChain {
        smooth,
        nontangential,
        peetre,
        a,
        b,
        violations,
    })
}

/// Centered Hardy-Littlewood maximal function of `|f|`.
///
/// In 1D every integer cell radius `0..=S/4` is used, computed with prefix
/// sums. In 2D the radii are the single cell plus the default [`ScaleSet`]
/// expressed in cells; a ball is the set of cells whose centres lie within
/// the radius.
pub fn hl_maximal<T: Real>(f: &GridFunction<T>) -> Result<GridFunction<T>> {
    f.require(Domain::Physical)?;
    let grid = *f.grid();
    let s = grid.samples_per_axis();
    let mags = f.magnitudes();
    let out = if grid.dim() == 1 {
        // prefix over three periods so every window is contiguous
        let mut prefix = vec![T::zero(); 3 * s + 1];
        for i in 0..3 * s {
            prefix[i + 1] = prefix[i] + mags[i % s];
        }
        let max_r = s / 4;
        (0..s)
            .into_par_iter()
            .map(|i| {
                let c = i + s;
                let mut best = T::zero();
                for r in 0..=max_r {
                    let sum = prefix[c + r + 1] - prefix[c - r];
                    best = best.max(sum / from_usize::<T>(2 * r + 1));
                }
                best
            })
            .collect()
    } else {
        let scales = ScaleSet::new(&grid, 4)?;
        let h = grid.spacing();
        let mut radii: Vec<usize> = vec![0];
        radii.extend(scales.scales().iter().map(|t| (*t / h).round().to_usize().unwrap_or(0)));
        radii.dedup();
        // row prefix sums over three periods
        let stride = 3 * s + 1;
        let mut prefix = vec![T::zero(); s * stride];
        for i1 in 0..s {
            let row = &mut prefix[i1 * stride..(i1 + 1) * stride];
            for i in 0..3 * s {
                row[i + 1] = row[i] + mags[(i % s) + i1 * s];
            }
        }
        let window = |i0: usize, i1: usize, w: usize| -> T {
            // cells i0 - w ..= i0 + w of row i1
            let row = &prefix[i1 * stride..(i1 + 1) * stride];
            if 2 * w + 1 >= s {
                return row[s];
            }
            let lo = i0 + s - w;
            row[lo + 2 * w + 1] - row[lo]
        };
        let mut best = vec![T::zero(); grid.len()];
        for &r in &radii {
            let r = r.min(s / 4);
            let widths: Vec<usize> = (0..=r).map(|d| ((r * r - d * d) as f64).sqrt().floor() as usize).collect();
            let count: usize = widths
                .iter()
                .enumerate()
                .map(|(d, &w)| (if d == 0 { 1 } else { 2 }) * (2 * w + 1).min(s))
                .sum();
            let inv = T::one() / from_usize::<T>(count);
            best.par_iter_mut().enumerate().for_each(|(flat, b)| {
                let i0 = flat % s;
                let i1 = flat / s;
                let mut sum = window(i0, i1, widths[0]);
                for (d, &w) in widths.iter().enumerate().skip(1) {
                    sum = sum + window(i0, (i1 + d) % s, w) + window(i0, (i1 + s - d) % s, w);
                }
                *b = b.max(sum * inv);
            });
        }
        best
    };
    GridFunction::from_real(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bumps::{build_lp_bump, build_dictionary, Profile, RadialKernel};
    use crate::grid::embed_point_mass;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn low() -> RadialKernel<f64> {
        RadialKernel::new(build_lp_bump(1.0).unwrap(), Profile::Low)
    }

    fn random_field(grid: Grid<f64>, seed: u64) -> GridFunction<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = grid.length();
        let modes: Vec<(f64, f64, f64, f64)> = (0..12)
            .map(|_| {
                (
                    rng.gen_range(-20.0..20.0f64).round(),
                    rng.gen_range(-20.0..20.0f64).round(),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let dim = grid.dim();
        GridFunction::from_fn(grid, move |x| {
            modes
                .iter()
                .map(|(k0, k1, a, ph)| {
                    let k1 = if dim == 2 { *k1 } else { 0.0 };
                    a * (2.0 * std::f64::consts::PI * (k0 * x[0] + k1 * x[1]) / l + ph).cos()
                })
                .sum()
        })
    }

    #[test]
    fn scale_set_bounds() {
        let g = Grid::new(1, 16.0f64, 1024).unwrap();
        let s = ScaleSet::new(&g, 4).unwrap();
        assert!(s.scales().windows(2).all(|w| w[0] < w[1]));
        assert!(s.scales()[0] >= 4.0 * g.spacing());
        assert!(*s.scales().last().unwrap() <= 4.0);
        assert!(s.scales().contains(&1.0));
        let r = s.refined(&g).unwrap();
        assert_eq!(r.len(), 2 * s.len() - 1);
        assert!(matches!(ScaleSet::<f64>::from_scales(vec![]), Err(Error::EmptyScaleSet)));
        assert!(matches!(
            ScaleSet::with_range(&g, 4, 100.0, 200.0),
            Err(Error::EmptyScaleSet)
        ));
    }

    #[test]
    fn sliding_max_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let row: Vec<f64> = (0..37).map(|_| rng.gen()).collect();
        for w in [0usize, 1, 3, 10, 18, 30] {
            let mut out = vec![0.0; row.len()];
            sliding_max(&row, w, &mut out);
            for i in 0..row.len() {
                let mut m = f64::MIN;
                for d in -(w as isize)..=(w as isize) {
                    m = m.max(row[(i as isize + d).rem_euclid(37) as usize]);
                }
                assert_eq!(out[i], m);
            }
        }
    }

    #[test]
    fn disc_max_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = 16;
        let layer: Vec<f64> = (0..s * s).map(|_| rng.gen()).collect();
        for r in [0.5f64, 1.0, 2.7, 5.0, 11.0] {
            let out = disc_max(&layer, s, r);
            for i1 in 0..s as isize {
                for i0 in 0..s as isize {
                    let mut m = f64::MIN;
                    for d1 in -8..8isize {
                        for d0 in -8..8isize {
                            if ((d0 * d0 + d1 * d1) as f64) <= r * r {
                                let y = ((i0 + d0).rem_euclid(16) + 16 * (i1 + d1).rem_euclid(16)) as usize;
                                m = m.max(layer[y]);
                            }
                        }
                    }
                    assert_eq!(out[(i0 + 16 * i1) as usize], m, "r={r}");
                }
            }
        }
    }

    #[test]
    fn hl_of_constant_and_indicator() {
        let g = Grid::new(1, 16.0f64, 1024).unwrap();
        let c = GridFunction::from_fn(g, |_| -2.5);
        let m = hl_maximal(&c).unwrap();
        assert!(m.values().iter().all(|v| (v.re - 2.5).abs() < 1e-12));
        let h = g.spacing();
        let chi = GridFunction::from_fn(g, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let m = hl_maximal(&chi).unwrap();
        for (i, v) in m.values().iter().enumerate() {
            let x = g.coord(i);
            assert!(v.re >= chi.values()[i].re);
            if x > 1.0 && x <= 4.0 {
                assert!((v.re - 1.0 / (2.0 * x)).abs() <= 3.0 * h / (x * x), "x={x}");
            }
        }
    }

    #[test]
    fn hl_2d_dominates_and_averages() {
        let g = Grid::new(2, 8.0f64, 64).unwrap();
        let f = random_field(g, 2);
        let m = hl_maximal(&f).unwrap();
        for (a, b) in m.values().iter().zip(f.values()) {
            assert!(a.re >= b.norm() - 1e-12);
        }
        let c = GridFunction::from_fn(g, |_| 3.0);
        assert!(hl_maximal(&c).unwrap().values().iter().all(|v| (v.re - 3.0).abs() < 1e-12));
    }

    #[test]
    fn smooth_maximal_basic_identities() {
        let g = Grid::new(1, 16.0f64, 512).unwrap();
        let scales = ScaleSet::new(&g, 4).unwrap();
        let f = GridFunction::from_fn(g, |x| (-x[0] * x[0]).exp());
        // nonnegative mollifier with unit mass: an average
        let rho = crate::bumps::TestFunction::gaussian(1, 1.0);
        let m = smooth_maximal(&VectorGridFunction::scalar(f.clone()), &rho, &scales).unwrap();
        assert!(m.sup_norm() <= f.sup_norm() + 1e-9);
        let single = smooth_maximal(&VectorGridFunction::scalar(f.clone()), &low(), &scales).unwrap();
        let pair = VectorGridFunction::new(vec![f.clone(), f.clone()]).unwrap();
        let double = smooth_maximal(&pair, &low(), &scales).unwrap();
        for (a, b) in single.values().iter().zip(double.values()) {
            assert!((b.re - 2f64.sqrt() * a.re).abs() < 1e-12);
        }
        let with_zero = VectorGridFunction::new(vec![f.clone(), GridFunction::zeros(g)]).unwrap();
        let z = smooth_maximal(&with_zero, &low(), &scales).unwrap();
        assert!(z.minus(&single).unwrap().sup_norm() < 1e-15);
    }

    #[test]
    fn tiny_aperture_degenerates_to_smooth() {
        let g = Grid::new(1, 16.0f64, 512).unwrap();
        let scales = ScaleSet::new(&g, 4).unwrap();
        let fs = VectorGridFunction::scalar(random_field(g, 8));
        let stack = smoothed_stack(&fs, &low(), &scales).unwrap();
        let a = 0.5 * g.spacing() / *scales.scales().last().unwrap();
        assert_eq!(stack.nontangential(a).unwrap(), stack.smooth_maximal());
        let half = stack.nontangential(0.5).unwrap();
        let one = stack.nontangential(1.0).unwrap();
        assert!(half.values().iter().zip(one.values()).all(|(x, y)| x.re <= y.re));
        assert!(stack.nontangential(0.0).is_err());
        assert!(stack.peetre(-1.0).is_err());
    }

    #[test]
    fn spike_spreads_over_the_cone() {
        let g = Grid::new(1, 16.0f64, 512).unwrap();
        let t = 0.5;
        let scales = ScaleSet::from_scales(vec![t]).unwrap();
        let fs = VectorGridFunction::scalar(embed_point_mass(g, &[0.0], 1.0).unwrap());
        let stack = smoothed_stack(&fs, &low(), &scales).unwrap();
        let peak = stack.layer(0).iter().cloned().fold(0.0, f64::max);
        let m = stack.nontangential(1.0).unwrap();
        let r = (t / g.spacing()).floor() as isize;
        for i in 0..g.len() {
            let d = i as isize - 256;
            // direct enumeration of the cone at this single scale
            let mut direct = 0.0f64;
            for e in -r..=r {
                direct = direct.max(stack.layer(0)[(i as isize + e).rem_euclid(512) as usize]);
            }
            assert_eq!(m.values()[i].re, direct);
            if d.abs() <= r {
                assert_eq!(m.values()[i].re, peak);
            }
        }
    }

    #[test]
    fn chain_holds_with_larger_b_smaller() {
        let g = Grid::new(2, 8.0f64, 32).unwrap();
        let scales = ScaleSet::new(&g, 4).unwrap();
        let fs = VectorGridFunction::new(vec![random_field(g, 1), random_field(g, 2)]).unwrap();
        for a in [0.5, 1.0, 2.0] {
            let c = maximal_chain(&fs, &low(), a, 3.0, &scales).unwrap();
            assert_eq!(c.violations, 0);
        }
        let stack = smoothed_stack(&fs, &low(), &scales).unwrap();
        let p2 = stack.peetre(2.0).unwrap();
        let p4 = stack.peetre(4.0).unwrap();
        assert!(p2.values().iter().zip(p4.values()).all(|(x, y)| y.re <= x.re));
    }

    #[test]
    fn peetre_matches_brute_force_and_commutes_with_shifts() {
        let g = Grid::new(1, 16.0f64, 128).unwrap();
        let scales = ScaleSet::new(&g, 2).unwrap();
        let fs = VectorGridFunction::scalar(random_field(g, 3));
        let stack = smoothed_stack(&fs, &low(), &scales).unwrap();
        let p = stack.peetre(2.0).unwrap();
        for x in 0..g.len() {
            let mut best = 0.0f64;
            for (k, &t) in scales.scales().iter().enumerate() {
                for y in 0..g.len() {
                    let d = g.periodic_distance(&g.point(x), &g.point(y));
                    best = best.max(stack.layer(k)[y] * (1.0 + d / t).powf(-2.0));
                }
            }
            assert!((p.values()[x].re - best).abs() <= 1e-14 * best);
        }
        let shifted = peetre_maximal(&fs.rolled([7, 0]), &low(), 2.0, &scales).unwrap();
        assert!(shifted.minus(&p.rolled([7, 0])).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn grand_maximal_dominates_members() {
        let g = Grid::new(1, 16.0f64, 256).unwrap();
        let scales = ScaleSet::new(&g, 2).unwrap();
        let dict = build_dictionary::<f64>(1, 1, 8, 3).unwrap();
        let fs = VectorGridFunction::scalar(random_field(g, 6));
        let gm = grand_maximal(&fs, &dict, &scales).unwrap();
        for phi in &dict {
            let m = nontangential_maximal(&fs, phi, 1.0, &scales).unwrap();
            assert!(gm.values().iter().zip(m.values()).all(|(a, b)| a.re >= b.re));
        }
        let bigger = build_dictionary::<f64>(1, 1, 10, 3).unwrap();
        let gm2 = grand_maximal(&fs, &bigger, &scales).unwrap();
        assert!(gm2.values().iter().zip(gm.values()).all(|(a, b)| a.re >= b.re));
        let zero = grand_maximal(&VectorGridFunction::scalar(GridFunction::zeros(g)), &dict, &scales).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn chain_has_no_violations(seed in 0u64..10_000, a in 0.05f64..3.0, b in 0.5f64..4.0) {
            let g = Grid::new(1, 16.0f64, 256).unwrap();
            let scales = ScaleSet::new(&g, 4).unwrap();
            let fs = VectorGridFunction::new(vec![random_field(g, seed), random_field(g, seed + 1)]).unwrap();
            let c = maximal_chain(&fs, &low(), a, b, &scales).unwrap();
            prop_assert_eq!(c.violations, 0);
        }

        #[test]
        fn appending_components_never_decreases(seed in 0u64..10_000) {
            let g = Grid::new(1, 16.0f64, 128).unwrap();
            let scales = ScaleSet::new(&g, 2).unwrap();
            let mut fs = VectorGridFunction::scalar(random_field(g, seed));
            let before = smoothed_stack(&fs, &low(), &scales).unwrap();
            fs.push(random_field(g, seed + 7)).unwrap();
            let after = smoothed_stack(&fs, &low(), &scales).unwrap();
            let pairs = [
                (before.smooth_maximal(), after.smooth_maximal()),
                (before.nontangential(1.0).unwrap(), after.nontangential(1.0).unwrap()),
                (before.peetre(2.0).unwrap(), after.peetre(2.0).unwrap()),
            ];
            for (x, y) in pairs.iter() {
                prop_assert!(x.values().iter().zip(y.values()).all(|(u, v)| v.re >= u.re - 1e-14));
            }
        }
    }
}
