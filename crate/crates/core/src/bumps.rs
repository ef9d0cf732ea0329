//! The Littlewood-Paley bump and its relatives, Schwartz seminorms, and the
//! finite test-function dictionary that stands in for the class `F_N`.
//!
//! The mother bump is defined on the Fourier side. A smooth radial cutoff
//! `theta` equals 1 on `|xi| <= 6/7` and 0 on `|xi| >= 1`; then
//! `psi_hat(xi) = theta(xi/2) - theta(xi)` is nonnegative (theta is
//! nonincreasing), vanishes outside `[6/7, 2]`, and its dyadic dilates
//! telescope to 1 away from the origin.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{sampled_transfer, FftPlan, Grid, GridFunction};
use crate::kernel::Kernel;
use crate::scalar::{from_usize, lit, Real};

/// Inner radius of the transition band of `theta`.
pub const PLATEAU: f64 = 6.0 / 7.0;

/// Smooth monotone step built from `e^{-s/u}`: 0 for `u <= 0`, 1 for `u >= 1`.
pub fn smooth_step<T: Real>(u: T, sharpness: T) -> T {
    if u <= T::zero() {
        return T::zero();
    }
    if u >= T::one() {
        return T::one();
    }
    let a = (-sharpness / u).exp();
    let b = (-sharpness / (T::one() - u)).exp();
    a / (a + b)
}

/// Parameters of the Littlewood-Paley mother bump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec<T> {
    pub sharpness: T,
}

impl<T: Real> BumpSpec<T> {
    /// `theta(r)`: 1 on `r <= 6/7`, 0 on `r >= 1`, smooth and nonincreasing.
    pub fn theta(&self, r: T) -> T {
        let inner = lit::<T>(PLATEAU);
        smooth_step((T::one() - r.abs()) / (T::one() - inner), self.sharpness)
    }

    /// `psi_hat(r) = theta(r/2) - theta(r)` for `r = |xi|`.
    pub fn psi_hat(&self, r: T) -> T {
        let r = r.abs();
        self.theta(r / lit(2.0)) - self.theta(r)
    }

    /// `Phi_low_hat(r) = sum_{j <= 0} psi_hat(2^{-j} r)` (and 1 at the origin),
    /// which telescopes to `theta(r/2)`.
    pub fn low_hat(&self, r: T) -> T {
        self.theta(r.abs() / lit(2.0))
    }

    /// `eta_hat(r) = psi_hat(r/2) + psi_hat(r) + psi_hat(2r)`.
    pub fn eta_hat(&self, r: T) -> T {
        let two = lit::<T>(2.0);
        self.psi_hat(r / two) + self.psi_hat(r) + self.psi_hat(r * two)
    }

    /// `Omega_hat(r) = sum_{j=b1}^{b2} psi_hat(2^{-j} r)`.
    pub fn omega_hat(&self, r: T, b1: i32, b2: i32) -> T {
        (b1..=b2)
            .map(|j| self.psi_hat(r * lit::<T>(2.0).powi(-j)))
            .fold(T::zero(), |a, b| a + b)
    }
}

/// Builds the mother bump; `sharpness` controls the steepness of the glue.
pub fn build_lp_bump<T: Real>(sharpness: T) -> Result<BumpSpec<T>> {
    if !(sharpness > T::zero()) || !sharpness.is_finite() {
        return Err(invalid("sharpness must be positive"));
    }
    Ok(BumpSpec { sharpness })
}

/// Which Fourier-side profile a [`RadialKernel`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// The mother bump `psi`.
    Psi,
    /// The low-pass mollifier `Phi_low` with `Phi_low_hat(0) = 1`.
    Low,
    /// `eta`, equal to 1 on the support of `psi_hat`.
    Eta,
    /// `Omega` summing the bands `b1..=b2`.
    Omega { b1: i32, b2: i32 },
}

/// A radial kernel defined by its Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialKernel<T> {
    pub bump: BumpSpec<T>,
    pub profile: Profile,
}

impl<T: Real> RadialKernel<T> {
    pub fn new(bump: BumpSpec<T>, profile: Profile) -> Self {
        Self { bump, profile }
    }

    /// Closed annulus `[inner, outer]` in `|xi|` outside which `hat` vanishes.
    pub fn support(&self) -> (T, T) {
        let two = lit::<T>(2.0);
        let inner = lit::<T>(PLATEAU);
        match self.profile {
            Profile::Psi => (inner, two),
            Profile::Low => (T::zero(), two),
            Profile::Eta => (inner / two, two * two),
            Profile::Omega { b1, b2 } => (inner * two.powi(b1), two * two.powi(b2)),
        }
    }

    /// Fourier transform at radius `r`.
    pub fn hat(&self, r: T) -> T {
        match self.profile {
            Profile::Psi => self.bump.psi_hat(r),
            Profile::Low => self.bump.low_hat(r),
            Profile::Eta => self.bump.eta_hat(r),
            Profile::Omega { b1, b2 } => self.bump.omega_hat(r, b1, b2),
        }
    }

    /// Physical samples of `Phi_t`, laid out on the grid coordinates.
    pub fn physical_samples(&self, grid: &Grid<T>, t: T) -> GridFunction<T> {
        let plan = FftPlan::new(grid);
        let mut data = self.transfer(&plan, grid, t).expect("radial transfer is infallible");
        plan.inverse(&mut data);
        let norm = T::one() / (grid.cell_volume() * from_usize::<T>(plan.volume()));
        // data is origin-at-index-0; move the origin back to the centre
        let s = grid.samples_per_axis() as isize;
        let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        for (flat, v) in values.iter_mut().enumerate() {
            let [i0, i1] = grid.axis_indices(flat);
            let src = grid.flat_index([i0 as isize - s / 2, i1 as isize - s / 2]);
            *v = data[src] * norm;
        }
        GridFunction::from_values(*grid, values, crate::grid::Domain::Physical)
            .expect("length matches grid")
    }
}

impl<T: Real> Kernel<T> for RadialKernel<T> {
    fn transfer(&self, _plan: &FftPlan<T>, grid: &Grid<T>, t: T) -> Result<Vec<Complex<T>>> {
        Ok((0..grid.len())
            .map(|k| Complex::new(self.hat(t * grid.frequency_magnitude(k)), T::zero()))
            .collect())
    }

    fn integral(&self) -> T {
        self.hat(T::zero())
    }
}

/// `Phi_low`, `eta` and `Omega` derived from one mother bump.
#[derive(Clone, Copy, Debug)]
pub struct DerivedBumps<T> {
    pub low: RadialKernel<T>,
    pub eta: RadialKernel<T>,
    pub omega: RadialKernel<T>,
}

pub fn derived_bumps<T: Real>(bump: BumpSpec<T>, b1: i32, b2: i32) -> Result<DerivedBumps<T>> {
    if b1 >= b2 {
        return Err(invalid(format!("need b1 < b2, got b1={b1}, b2={b2}")));
    }
    Ok(DerivedBumps {
        low: RadialKernel::new(bump, Profile::Low),
        eta: RadialKernel::new(bump, Profile::Eta),
        omega: RadialKernel::new(bump, Profile::Omega { b1, b2 }),
    })
}

// ---------------------------------------------------------------------------
// closed-form test functions

fn poly_eval<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

fn cpoly_eval<T: Real>(coeffs: &[Complex<T>], x: T) -> Complex<T> {
    coeffs
        .iter()
        .rev()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * x + c)
}

/// One-dimensional factor of a tensor-product test function.
#[derive(Clone, Debug, PartialEq)]
enum Factor<T> {
    /// `Re[e^{i beta x} P(x)] e^{-a x^2}`.
    Gauss {
        poly: Vec<Complex<T>>,
        a: T,
        beta: T,
    },
    /// `scale * Q(u) (1-u^2)^{-m} e^{-1/(1-u^2)}` with `u = x / width`, zero for `|u| >= 1`.
    Bump {
        poly: Vec<T>,
        m: i32,
        width: T,
        scale: T,
    },
}

impl<T: Real> Factor<T> {
    fn eval(&self, x: T) -> T {
        match self {
            Factor::Gauss { poly, a, beta } => {
                let phase = Complex::new((*beta * x).cos(), (*beta * x).sin());
                (phase * cpoly_eval(poly, x)).re * (-*a * x * x).exp()
            }
            Factor::Bump {
                poly,
                m,
                width,
                scale,
            } => {
                let u = x / *width;
                let s = T::one() - u * u;
                if s <= T::zero() {
                    return T::zero();
                }
                let env = (-T::one() / s - from_i32::<T>(*m) * s.ln()).exp();
                *scale * poly_eval(poly, u) * env
            }
        }
    }

    fn derivative(&self) -> Self {
        match self {
            Factor::Gauss { poly, a, beta } => {
                // (i beta P + P' - 2 a x P)
                let n = poly.len();
                let mut out = vec![Complex::new(T::zero(), T::zero()); n + 1];
                let ib = Complex::new(T::zero(), *beta);
                for (k, &c) in poly.iter().enumerate() {
                    out[k] = out[k] + ib * c;
                    if k > 0 {
                        out[k - 1] = out[k - 1] + c * from_usize::<T>(k);
                    }
                    out[k + 1] = out[k + 1] - c * (lit::<T>(2.0) * *a);
                }
                Factor::Gauss {
                    poly: out,
                    a: *a,
                    beta: *beta,
                }
            }
            Factor::Bump {
                poly,
                m,
                width,
                scale,
            } => {
                // d/du: [Q'(1-u^2)^2 + 2 m u Q (1-u^2) - 2 u Q] (1-u^2)^{-(m+2)}
                let n = poly.len();
                let mut out = vec![T::zero(); n + 4];
                let one_minus_u2 = [T::one(), T::zero(), -T::one()];
                let sq = [T::one(), T::zero(), lit::<T>(-2.0), T::zero(), T::one()];
                let dq: Vec<T> = (1..n).map(|k| poly[k] * from_usize::<T>(k)).collect();
                for (i, &c) in dq.iter().enumerate() {
                    for (j, &d) in sq.iter().enumerate() {
                        out[i + j] = out[i + j] + c * d;
                    }
                }
                let two_m = lit::<T>(2.0) * from_i32::<T>(*m);
                for (i, &c) in poly.iter().enumerate() {
                    for (j, &d) in one_minus_u2.iter().enumerate() {
                        out[i + 1 + j] = out[i + 1 + j] + two_m * c * d;
                    }
                    out[i + 1] = out[i + 1] - lit::<T>(2.0) * c;
                }
                while out.len() > 1 && *out.last().unwrap() == T::zero() {
                    out.pop();
                }
                Factor::Bump {
                    poly: out,
                    m: m + 2,
                    width: *width,
                    scale: *scale / *width,
                }
            }
        }
    }

    /// Half-width of an interval outside which the factor (and its low
    /// derivatives) is negligible.
    fn radius(&self) -> T {
        match self {
            Factor::Gauss { a, .. } => (lit::<T>(100.0) / *a).sqrt(),
            Factor::Bump { width, .. } => *width,
        }
    }
}

fn from_i32<T: Real>(n: i32) -> T {
    T::from_i32(n).expect("small integer")
}

/// Family a dictionary element was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Mollifier,
    Gaussian,
    Bump,
    GaussianDerivative,
    BumpDerivative,
    ModulatedGaussian,
}

/// A closed-form tensor-product test function with analytic derivatives,
/// optionally composed with `x -> sign (x - center) / dilation`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction<T> {
    kind: TestKind,
    factors: Vec<Factor<T>>,
    amplitude: T,
    center: [T; 2],
    dilation: T,
    reflect: bool,
}

impl<T: Real> TestFunction<T> {
    fn from_factor(dim: usize, kind: TestKind, factor: Factor<T>, first_axis_only: Option<Factor<T>>) -> Self {
        let mut factors = vec![first_axis_only.unwrap_or_else(|| factor.clone())];
        if dim == 2 {
            factors.push(factor);
        }
        Self {
            kind,
            factors,
            amplitude: T::one(),
            center: [T::zero(); 2],
            dilation: T::one(),
            reflect: false,
        }
    }

    /// Gaussian `e^{-pi |x|^2 / sigma^2}` normalised to unit integral.
    pub fn gaussian(dim: usize, sigma: T) -> Self {
        let a = T::PI() / (sigma * sigma);
        let f = Factor::Gauss {
            poly: vec![Complex::new(T::one() / sigma, T::zero())],
            a,
            beta: T::zero(),
        };
        Self::from_factor(dim, TestKind::Gaussian, f, None)
    }

    /// Compactly supported `e^{-1/(1-|u|^2)}` bump on `|u| < 1` (tensor
    /// product in 2D) with `u = x / width`, normalised to unit integral.
    pub fn mollifier(dim: usize, width: T) -> Self {
        let f = Factor::Bump {
            poly: vec![T::one()],
            m: 0,
            width,
            scale: T::one(),
        };
        let mut out = Self::from_factor(dim, TestKind::Mollifier, f, None);
        let integral = out.integral();
        out.amplitude = T::one() / integral;
        out
    }

    /// Cosine-modulated Gaussian `cos(2 pi nu x_1) e^{-pi |x|^2 / sigma^2}`.
    pub fn modulated_gaussian(dim: usize, sigma: T, nu: T) -> Self {
        let a = T::PI() / (sigma * sigma);
        let base = Factor::Gauss {
            poly: vec![Complex::new(T::one(), T::zero())],
            a,
            beta: T::zero(),
        };
        let first = Factor::Gauss {
            poly: vec![Complex::new(T::one(), T::zero())],
            a,
            beta: lit::<T>(2.0) * T::PI() * nu,
        };
        Self::from_factor(dim, TestKind::ModulatedGaussian, base, Some(first))
    }

    /// Derivative along the first axis.
    pub fn d_first_axis(&self) -> Self {
        let mut out = self.clone();
        out.factors[0] = out.factors[0].derivative();
        out.amplitude = out.amplitude / out.dilation * if out.reflect { -T::one() } else { T::one() };
        out.kind = match self.kind {
            TestKind::Gaussian => TestKind::GaussianDerivative,
            TestKind::Bump | TestKind::Mollifier => TestKind::BumpDerivative,
            k => k,
        };
        out
    }

    /// `x -> self(sign (x - center) / dilation)`.
    pub fn transformed(&self, center: [T; 2], dilation: T, reflect: bool) -> Self {
        let mut out = self.clone();
        out.center = center;
        out.dilation = dilation;
        out.reflect = reflect;
        out
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        out.amplitude = out.amplitude * c;
        out
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    fn local(&self, x: T, axis: usize) -> T {
        let u = (x - self.center[axis]) / self.dilation;
        if self.reflect {
            -u
        } else {
            u
        }
    }

    pub fn eval(&self, x: &[T; 2]) -> T {
        self.factors
            .iter()
            .enumerate()
            .fold(self.amplitude, |acc, (axis, f)| acc * f.eval(self.local(x[axis], axis)))
    }

    /// Per-axis tables of derivative factors up to `order`.
    fn derivative_tables(&self, order: usize) -> Vec<Vec<Factor<T>>> {
        self.factors
            .iter()
            .map(|f| {
                let mut table = vec![f.clone()];
                for _ in 0..order {
                    let next = table.last().unwrap().derivative();
                    table.push(next);
                }
                table
            })
            .collect()
    }

    /// `d^alpha phi(x)`.
    pub fn derivative(&self, alpha: &[usize], x: &[T; 2]) -> T {
        let chain = if self.reflect { -T::one() } else { T::one() } / self.dilation;
        let mut acc = self.amplitude;
        for (axis, f) in self.factors.iter().enumerate() {
            let mut g = f.clone();
            for _ in 0..alpha[axis] {
                g = g.derivative();
            }
            acc = acc * g.eval(self.local(x[axis], axis)) * chain.powi(alpha[axis] as i32);
        }
        acc
    }

    /// Box `[lo, hi]` per axis outside which the function is negligible.
    fn support_box(&self) -> Vec<(T, T)> {
        self.factors
            .iter()
            .enumerate()
            .map(|(axis, f)| {
                let r = f.radius() * self.dilation;
                (self.center[axis] - r, self.center[axis] + r)
            })
            .collect()
    }

    /// `int phi` by composite Simpson quadrature over the support box.
    pub fn integral(&self) -> T {
        let panels = 4096;
        let mut acc = self.amplitude;
        for (axis, f) in self.factors.iter().enumerate() {
            let r = f.radius();
            let one_d = simpson(-r, r, panels, |u| f.eval(u));
            let _ = axis;
            acc = acc * one_d * self.dilation;
        }
        acc
    }
}

fn simpson<T: Real>(a: T, b: T, panels: usize, f: impl Fn(T) -> T) -> T {
    let n = panels + panels % 2;
    let h = (b - a) / from_usize::<T>(n);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { lit::<T>(4.0) } else { lit::<T>(2.0) };
        acc = acc + w * f(a + from_usize::<T>(i) * h);
    }
    acc * h / lit(3.0)
}

fn simpson_weights<T: Real>(n: usize) -> Vec<T> {
    (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                T::one()
            } else if i % 2 == 1 {
                lit(4.0)
            } else {
                lit(2.0)
            }
        })
        .collect()
}

impl<T: Real> Kernel<T> for TestFunction<T> {
    fn transfer(&self, plan: &FftPlan<T>, grid: &Grid<T>, t: T) -> Result<Vec<Complex<T>>> {
        Ok(sampled_transfer(plan, grid, t, |x| self.eval(x)))
    }

    fn integral(&self) -> T {
        TestFunction::integral(self)
    }
}

/// All multi-indices of dimension `dim` with `|alpha| <= order`.
pub fn multi_indices(dim: usize, order: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    if dim == 1 {
        for a in 0..=order {
            out.push([a, 0]);
        }
    } else {
        for total in 0..=order {
            for a in 0..=total {
                out.push([a, total - a]);
            }
        }
    }
    out
}

/// A seminorm value, flagged when the input does not decay on the torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeminormValue<T> {
    pub value: T,
    pub lower_bound_only: bool,
}

/// Default number of Simpson panels per axis for closed-form seminorms.
pub const SEMINORM_PANELS_1D: usize = 1 << 16;
pub const SEMINORM_PANELS_2D: usize = 1 << 10;

/// `N_N(phi; x0, R) = int (1 + |x - x0|/R)^N sum_{|alpha| <= N+1} R^{|alpha|} |d^alpha phi|`.
pub fn schwartz_seminorm<T: Real>(phi: &TestFunction<T>, order: usize, x0: [T; 2], radius: T) -> Result<T> {
    let panels = if phi.dim() == 1 {
        SEMINORM_PANELS_1D
    } else {
        SEMINORM_PANELS_2D
    };
    schwartz_seminorm_with(phi, order, x0, radius, panels)
}

/// [`schwartz_seminorm`] with an explicit Simpson panel count per axis.
pub fn schwartz_seminorm_with<T: Real>(
    phi: &TestFunction<T>,
    order: usize,
    x0: [T; 2],
    radius: T,
    panels: usize,
) -> Result<T> {
    if !(radius > T::zero()) {
        return Err(invalid("seminorm radius must be positive"));
    }
    let n = panels + panels % 2;
    let dim = phi.dim();
    let tables = phi.derivative_tables(order + 1);
    let chain = if phi.reflect { -T::one() } else { T::one() } / phi.dilation;
    let boxes = phi.support_box();
    // per-axis nodes and derivative values d[axis][k][i]
    let mut nodes = Vec::new();
    let mut steps = Vec::new();
    let mut values = Vec::new();
    for axis in 0..dim {
        let (lo, hi) = boxes[axis];
        let h = (hi - lo) / from_usize::<T>(n);
        let xs: Vec<T> = (0..=n).map(|i| lo + from_usize::<T>(i) * h).collect();
        let per_order: Vec<Vec<T>> = tables[axis]
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let c = chain.powi(k as i32);
                xs.iter().map(|&x| f.eval(phi.local(x, axis)) * c).collect()
            })
            .collect();
        nodes.push(xs);
        steps.push(h);
        values.push(per_order);
    }
    let w = simpson_weights::<T>(n);
    let alphas = multi_indices(dim, order + 1);
    let powers: Vec<T> = (0..=order + 1).map(|k| radius.powi(k as i32)).collect();
    let amp = phi.amplitude.abs();
    let third = lit::<T>(1.0 / 3.0);
    let total = if dim == 1 {
        let mut acc = T::zero();
        for i in 0..=n {
            let dist = (nodes[0][i] - x0[0]).abs();
            let weight = (T::one() + dist / radius).powi(order as i32);
            let s: T = alphas
                .iter()
                .map(|a| powers[a[0]] * values[0][a[0]][i].abs())
                .sum();
            acc = acc + w[i] * weight * s;
        }
        acc * steps[0] * third
    } else {
        let mut acc = T::zero();
        for j in 0..=n {
            let dy = nodes[1][j] - x0[1];
            for i in 0..=n {
                let dx = nodes[0][i] - x0[0];
                let dist = (dx * dx + dy * dy).sqrt();
                let weight = (T::one() + dist / radius).powi(order as i32);
                let s: T = alphas
                    .iter()
                    .map(|a| powers[a[0] + a[1]] * (values[0][a[0]][i] * values[1][a[1]][j]).abs())
                    .sum();
                acc = acc + w[i] * w[j] * weight * s;
            }
        }
        acc * steps[0] * steps[1] * third * third
    };
    Ok(total * amp)
}

/// Seminorm of sampled data, with derivatives taken spectrally.
///
/// The samples are first interpolated onto a finer grid (4x in 1D, 2x in
/// 2D) so the Riemann sum resolves the kinks of `|d^alpha f|`.
///
/// When the samples do not decay towards the edge of the fundamental
/// domain the integral only sees one period, so the result is flagged as a
/// lower bound.
pub fn grid_seminorm<T: Real>(f: &GridFunction<T>, order: usize, x0: [T; 2], radius: T) -> Result<SeminormValue<T>> {
    f.require(crate::grid::Domain::Physical)?;
    if !(radius > T::zero()) {
        return Err(invalid("seminorm radius must be positive"));
    }
    let coarse = f;
    let f = &crate::grid::upsample(coarse, if coarse.grid().dim() == 1 { 4 } else { 2 })?;
    let grid = *f.grid();
    let dim = grid.dim();
    let plan = FftPlan::new(&grid);
    let spectrum = crate::grid::raw_spectrum(&plan, f);
    let two_pi = lit::<T>(2.0) * T::PI();
    let alphas = multi_indices(dim, order + 1);
    let mut integrand = vec![T::zero(); grid.len()];
    for a in &alphas {
        let transfer: Vec<Complex<T>> = (0..grid.len())
            .map(|k| {
                let xi = grid.frequency(k);
                let mut m = Complex::new(T::one(), T::zero());
                for axis in 0..dim {
                    let factor = Complex::new(T::zero(), two_pi * xi[axis]);
                    for _ in 0..a[axis] {
                        m = m * factor;
                    }
                }
                m
            })
            .collect();
        let d = crate::grid::multiply_and_invert(&plan, grid, spectrum.clone(), &transfer);
        let rp = radius.powi((a[0] + a[1]) as i32);
        for (acc, v) in integrand.iter_mut().zip(d.values()) {
            *acc = *acc + rp * v.norm();
        }
    }
    let mut total = T::zero();
    for (i, v) in integrand.iter().enumerate() {
        let p = grid.point(i);
        let dist = grid.periodic_distance(&p, &x0);
        total = total + (T::one() + dist / radius).powi(order as i32) * *v;
    }
    total = total * grid.cell_volume();
    // decay test on the outer sixteenth of the domain
    let edge = grid.length() * lit(7.0 / 16.0);
    let max = f.sup_norm();
    let boundary = f
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let p = grid.point(*i);
            (0..dim).any(|axis| p[axis].abs() >= edge)
        })
        .map(|(_, v)| v.norm())
        .fold(T::zero(), T::max);
    Ok(SeminormValue {
        value: total,
        lower_bound_only: boundary > lit::<T>(1e-6) * max,
    })
}

/// Deterministic dictionary of test functions normalised to `N_N = 1`.
///
/// Element 0 is the canonical mollifier (nonzero integral). The rest cycle
/// through Gaussians, compact bumps, their first-axis derivatives and
/// cosine-modulated Gaussians with parameters drawn from one seeded stream,
/// so a smaller dictionary is always a prefix of a larger one. Every element
/// is even or odd, hence the family is closed under `x -> -x` up to sign.
pub fn build_dictionary<T: Real>(dim: usize, order: usize, size: usize, seed: u64) -> Result<Vec<TestFunction<T>>> {
    if size < 8 {
        return Err(invalid("dictionary size must be at least 8"));
    }
    if dim != 1 && dim != 2 {
        return Err(crate::error::Error::UnsupportedDimension(dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(size);
    out.push(TestFunction::mollifier(dim, T::one()));
    for i in 1..size {
        let u: f64 = rng.gen_range(0.0..1.0);
        let v: f64 = rng.gen_range(0.0..1.0);
        let phi = match (i - 1) % 5 {
            0 => TestFunction::gaussian(dim, lit(0.5 + 1.5 * u)),
            1 => {
                let mut b = TestFunction::mollifier(dim, lit(0.75 + 1.75 * u));
                b.kind = TestKind::Bump;
                b
            }
            2 => TestFunction::gaussian(dim, lit(0.5 + 1.5 * u)).d_first_axis(),
            3 => TestFunction::mollifier(dim, lit(0.75 + 1.75 * u)).d_first_axis(),
            _ => TestFunction::modulated_gaussian(dim, lit(0.75 + 1.25 * u), lit(0.25 + 1.25 * v)),
        };
        out.push(phi);
    }
    for phi in out.iter_mut() {
        let norm = schwartz_seminorm(phi, order, [T::zero(); 2], T::one())?;
        *phi = phi.scaled(T::one() / norm);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> BumpSpec<f64> {
        build_lp_bump(1.0).unwrap()
    }

    #[test]
    fn profile_values() {
        let b = bump();
        assert_eq!(b.psi_hat(1.0), 1.0);
        assert_eq!(b.psi_hat(0.5), 0.0);
        assert_eq!(b.psi_hat(3.0), 0.0);
        assert_eq!(b.psi_hat(0.0), 0.0);
        assert_eq!(b.low_hat(0.0), 1.0);
        assert_eq!(b.eta_hat(1.0), 1.0);
        assert!(build_lp_bump(0.0f64).is_err());
    }

    #[test]
    fn support_and_sign() {
        let b = bump();
        for i in 0..=40_000 {
            let r = i as f64 * 1e-4;
            let v = b.psi_hat(r);
            assert!(v >= 0.0);
            if !(PLATEAU..=2.0).contains(&r) {
                assert_eq!(v, 0.0, "r={r}");
            }
        }
    }

    #[test]
    fn dyadic_partition_of_unity() {
        let b = bump();
        for i in 1..5000 {
            let r = 1e-3 * (1.0037f64).powi(i);
            let s: f64 = (-30..=30).map(|j| b.psi_hat(r * 2f64.powi(-j))).sum();
            assert!((s - 1.0).abs() <= 1e-10, "r={r}");
            let active = (-30..=30).filter(|&j| b.psi_hat(r * 2f64.powi(-j)) != 0.0).count();
            assert!(active <= 2);
        }
    }

    #[test]
    fn derived_profiles() {
        let b = bump();
        let d = derived_bumps(b, 0, 1).unwrap();
        assert!(derived_bumps(b, 1, 1).is_err());
        for i in 0..2000 {
            let r = i as f64 * 2e-3;
            // low = sum over j <= 0 of psi(2^{-j} r)
            let s: f64 = (0..60).map(|k| b.psi_hat(r * 2f64.powi(k))).sum();
            if r > 0.0 {
                assert!((d.low.hat(r) - s).abs() < 1e-12);
            }
            assert!((d.omega.hat(r) - (b.psi_hat(r) + b.psi_hat(r / 2.0))).abs() < 1e-15);
            if r <= PLATEAU {
                assert_eq!(d.low.hat(r), 1.0);
            }
            if (PLATEAU..=2.0).contains(&r) {
                assert!((d.eta.hat(r) - 1.0).abs() < 1e-15);
            }
        }
        assert_eq!(d.low.integral(), 1.0);
    }

    #[test]
    fn psi_decays_in_physical_space() {
        // the e^{-1/u} glue gives decay like exp(-c sqrt|x|): faster than any
        // power eventually, with a large constant in front of (1+|x|)^{-8}
        let g = Grid::new(1, 256.0f64, 1 << 14).unwrap();
        let k = RadialKernel::new(bump(), Profile::Psi);
        let samples = k.physical_samples(&g, 1.0);
        let vals = samples.magnitudes();
        let peak = vals.iter().cloned().fold(0.0, f64::max);
        let envelope = |a: f64, b: f64| {
            vals.iter()
                .enumerate()
                .filter(|(i, _)| (a..b).contains(&g.coord(*i).abs()))
                .map(|(_, v)| *v / peak)
                .fold(0.0, f64::max)
        };
        let c = (0..g.len())
            .filter(|&i| g.coord(i).abs() <= 100.0)
            .map(|i| vals[i] / peak * (1.0 + g.coord(i).abs()).powi(8))
            .fold(0.0, f64::max);
        assert!(c < 1e10, "decay constant {c}");
        let slope = |a: f64, b: f64| (envelope(b, 2.0 * b).ln() - envelope(a, 2.0 * a).ln()) / (b / a).ln();
        assert!(slope(32.0, 64.0) < slope(16.0, 32.0));
        assert!(slope(32.0, 64.0) < -5.0);
        assert!(samples.integral().norm() < 1e-10);
    }

    #[test]
    fn factor_derivatives_match_finite_differences() {
        let fs = [
            TestFunction::<f64>::gaussian(1, 0.8),
            TestFunction::mollifier(1, 1.3),
            TestFunction::modulated_gaussian(1, 1.0, 0.7),
        ];
        for f in &fs {
            for k in 0..3usize {
                for &x in &[-0.7, -0.2, 0.1, 0.45] {
                    let e = 1e-5;
                    let fd = (f.derivative(&[k, 0], &[x + e, 0.0]) - f.derivative(&[k, 0], &[x - e, 0.0])) / (2.0 * e);
                    let an = f.derivative(&[k + 1, 0], &[x, 0.0]);
                    assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "{:?} k={k} x={x}", f.kind());
                }
            }
        }
    }

    #[test]
    fn gaussian_seminorm_n0_is_three() {
        // int |phi| + int |phi'| = 1 + 2 phi(0) for e^{-pi x^2}
        let g = TestFunction::<f64>::gaussian(1, 1.0);
        let v = schwartz_seminorm(&g, 0, [0.0, 0.0], 1.0).unwrap();
        assert!((v - 3.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn seminorm_converges_under_refinement() {
        let phis = [
            TestFunction::<f64>::gaussian(1, 0.7),
            TestFunction::mollifier(1, 1.0).d_first_axis(),
            TestFunction::modulated_gaussian(1, 1.1, 0.9),
        ];
        for phi in &phis {
            let a = schwartz_seminorm_with(phi, 2, [0.3, 0.0], 1.0, 1 << 15).unwrap();
            let b = schwartz_seminorm_with(phi, 2, [0.3, 0.0], 1.0, 1 << 16).unwrap();
            assert!((a - b).abs() <= 1e-6 * b, "{:?}: {a} vs {b}", phi.kind());
        }
    }

    #[test]
    fn seminorm_scaling_law() {
        let phi = TestFunction::<f64>::gaussian(1, 0.9).d_first_axis();
        let base = schwartz_seminorm(&phi, 2, [0.0, 0.0], 1.0).unwrap();
        let x0 = 0.4;
        for &r in &[0.5, 2.0, 4.0] {
            // psi(x) = phi((x0 - x) / R)
            let psi = phi.transformed([x0, 0.0], r, true);
            let v = schwartz_seminorm(&psi, 2, [x0, 0.0], r).unwrap();
            assert!((v - r * base).abs() <= 1e-6 * r * base, "R={r}: {v} vs {}", r * base);
        }
    }

    #[test]
    fn seminorm_scaling_law_2d() {
        let phi = TestFunction::<f64>::gaussian(2, 0.9);
        let base = schwartz_seminorm(&phi, 1, [0.0, 0.0], 1.0).unwrap();
        let r = 2.0;
        let psi = phi.transformed([0.2, -0.1], r, true);
        let v = schwartz_seminorm(&psi, 1, [0.2, -0.1], r).unwrap();
        assert!((v - r * r * base).abs() <= 1e-5 * r * r * base);
    }

    #[test]
    fn grid_seminorm_matches_closed_form() {
        let g = Grid::new(1, 16.0f64, 2048).unwrap();
        let phi = TestFunction::<f64>::gaussian(1, 1.0);
        let f = GridFunction::from_fn(g, |x| phi.eval(x));
        let a = grid_seminorm(&f, 2, [0.0, 0.0], 1.0).unwrap();
        let b = schwartz_seminorm(&phi, 2, [0.0, 0.0], 1.0).unwrap();
        assert!(!a.lower_bound_only);
        assert!((a.value - b).abs() < 1e-6 * b);
        let flat = GridFunction::from_fn(g, |x| x[0].cos());
        assert!(grid_seminorm(&flat, 0, [0.0, 0.0], 1.0).unwrap().lower_bound_only);
    }

    #[test]
    fn dictionary_is_normalised_and_prefix_stable() {
        let small = build_dictionary::<f64>(1, 2, 8, 7).unwrap();
        let large = build_dictionary::<f64>(1, 2, 13, 7).unwrap();
        assert_eq!(small[..], large[..8]);
        assert_eq!(small[0].kind(), TestKind::Mollifier);
        assert!(small[0].integral().abs() > 0.0);
        for phi in &large {
            let v = schwartz_seminorm(phi, 2, [0.0, 0.0], 1.0).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "{:?}", phi.kind());
        }
        assert!(build_dictionary::<f64>(1, 2, 4, 7).is_err());
    }

    #[test]
    fn mollifier_and_gaussian_have_unit_mass() {
        for dim in [1, 2] {
            assert!((TestFunction::<f64>::mollifier(dim, 0.7).integral() - 1.0).abs() < 1e-9);
            assert!((TestFunction::<f64>::gaussian(dim, 1.3).integral() - 1.0).abs() < 1e-9);
        }
    }
}
