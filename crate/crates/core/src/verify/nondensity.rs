//! Distance from `delta_1 - delta_{-1}` to smooth probes in the weak Hardy
//! quasinorm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::TestFunction;
use crate::error::{invalid, Result};
use crate::grid::{embed_point_mass, Grid, GridFunction, VectorGridFunction};
use crate::kernel::smooth_with;
use crate::maximal::{smooth_maximal, ScaleSet};
use crate::quasinorm::weak_lp_of;

use super::params::{GridSpec, Smoothing};
use super::report::{Tier, VerifyReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonDensityParams {
    pub grid: GridSpec,
    pub smoothing: Smoothing,
    /// Mollification widths `2^{-k}` for these `k`, coarse to fine.
    pub mollifier_octaves: Vec<i32>,
    /// Widths of Gaussian dipoles at `+-1`.
    pub dipole_sigmas: Vec<f64>,
    /// Widths of centred Gaussians.
    pub gaussian_sigmas: Vec<f64>,
    pub bound: f64,
    /// Profile window on `x > 0`, split around `x = 1`.
    pub profile_inner: [f64; 2],
    pub profile_outer: [f64; 2],
    pub profile_band: f64,
    /// Repeat at twice the resolution and report the change.
    pub refine: bool,
}

impl Default for NonDensityParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(1, 64.0, 1 << 14),
            smoothing: Smoothing::default(),
            mollifier_octaves: (2..=7).collect(),
            dipole_sigmas: vec![0.05, 0.1, 0.3, 1.0],
            gaussian_sigmas: vec![0.5, 2.0],
            bound: 0.04,
            profile_inner: [0.1, 0.5],
            profile_outer: [2.0, 8.0],
            profile_band: 10.0,
            refine: true,
        }
    }
}

/// `delta_1 - delta_{-1}` on the first axis.
pub fn dipole(grid: Grid<f64>) -> Result<GridFunction<f64>> {
    let mut a = vec![0.0; grid.dim()];
    let mut b = vec![0.0; grid.dim()];
    a[0] = 1.0;
    b[0] = -1.0;
    embed_point_mass(grid, &a, 1.0)?.minus(&embed_point_mass(grid, &b, 1.0)?)
}

/// `x / ((x + 1)^2 |1 - x|)` for `x > 0`.
pub fn dipole_profile(x: f64) -> f64 {
    x / ((x + 1.0).powi(2) * (1.0 - x).abs())
}

/// A probe `phi` with its label.
struct Probe {
    label: String,
    /// Mollification width, when the probe is one.
    width: Option<f64>,
    function: GridFunction<f64>,
}

fn probes(grid: Grid<f64>, f: &GridFunction<f64>, params: &NonDensityParams) -> Result<Vec<Probe>> {
    let dim = grid.dim();
    let mut out = vec![Probe {
        label: "zero".into(),
        width: None,
        function: GridFunction::zeros(grid),
    }];
    for &k in &params.mollifier_octaves {
        let t = 2f64.powi(-k);
        out.push(Probe {
            label: format!("mollifier 2^-{k}"),
            width: Some(t),
            function: smooth_with(f, &TestFunction::mollifier(dim, t), 1.0)?,
        });
    }
    let gauss = |c: f64, s: f64, x: &[f64; 2]| {
        let r2: f64 = (x[0] - c).powi(2) + if dim == 2 { x[1] * x[1] } else { 0.0 };
        (-r2 / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt()).powi(dim as i32)
    };
    for &s in &params.dipole_sigmas {
        out.push(Probe {
            label: format!("gaussian dipole {s}"),
            width: None,
            function: GridFunction::from_fn(grid, move |x| gauss(1.0, s, x) - gauss(-1.0, s, x)),
        });
    }
    for &s in &params.gaussian_sigmas {
        out.push(Probe {
            label: format!("gaussian {s}"),
            width: None,
            function: GridFunction::from_fn(grid, move |x| gauss(0.0, s, x)),
        });
    }
    Ok(out)
}

/// `f^+` and the probe distances.
type Distances = (GridFunction<f64>, Vec<(Probe, f64)>);

/// Weak-`L^1` norm of the smooth maximal function of `f - phi` per probe.
fn distances(grid: Grid<f64>, params: &NonDensityParams) -> Result<Distances> {
    let f = dipole(grid)?;
    let kernel = params.smoothing.kernel(grid.dim());
    let scales = ScaleSet::new(&grid, params.smoothing.per_octave)?;
    let cell = grid.cell_volume();
    let ps = probes(grid, &f, params)?;
    let values: Vec<(Probe, f64)> = ps
        .into_par_iter()
        .map(|p| {
            let m = smooth_maximal(&VectorGridFunction::scalar(f.minus(&p.function)?), &kernel, &scales)?;
            let d = weak_lp_of(&m.magnitudes(), cell, 1.0);
            Ok((p, d))
        })
        .collect::<Result<_>>()?;
    let m0 = smooth_maximal(&VectorGridFunction::scalar(f), &kernel, &scales)?;
    Ok((m0, values))
}

pub fn nondensity_experiment(params: &NonDensityParams) -> Result<VerifyReport> {
    if params.mollifier_octaves.is_empty() {
        return Err(invalid("need at least one mollification width"));
    }
    let grid = params.grid.build()?;
    let (fplus, values) = distances(grid, params)?;
    let mut report = VerifyReport::new("nondensity", &["probe", "width", "distance"]);
    report
        .param("grid", params.grid.describe())
        .param("kernel_sigma", params.smoothing.kernel_sigma)
        .param("per_octave", params.smoothing.per_octave)
        .param("probes", values.iter().map(|(p, _)| p.label.as_str()).collect::<Vec<_>>().join("; "));
    for (i, (p, d)) in values.iter().enumerate() {
        report.row(vec![i as f64, p.width.unwrap_or(0.0), *d]);
    }
    let infimum = values.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
    report.constant("infimum", infimum);
    report.at_least("distance infimum over probes", Tier::Empirical, infimum, params.bound);

    // mollifier distances coarse to fine
    let trend: Vec<f64> = values.iter().filter(|(p, _)| p.width.is_some()).map(|(_, d)| *d).collect();
    let worst_drop = trend.windows(2).map(|w| (w[0] - w[1]) / w[0]).fold(0.0, f64::max);
    report.constant("largest relative drop as mollification refines", worst_drop);
    report.holds(
        "distance non-decreasing as mollification refines",
        Tier::Empirical,
        trend.windows(2).all(|w| w[1] >= w[0]),
    );

    // profile of f+ away from +-1
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..grid.len() {
        let x = grid.point(i);
        if grid.dim() == 2 && x[1] != 0.0 {
            continue;
        }
        let inside = |w: [f64; 2]| x[0] >= w[0] && x[0] <= w[1];
        if inside(params.profile_inner) || inside(params.profile_outer) {
            let r = fplus.values()[i].re / dipole_profile(x[0]);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    report.constant("profile ratio min", lo);
    report.constant("profile ratio max", hi);
    report.at_most("profile ratio band max/min", Tier::Empirical, hi / lo, params.profile_band);

    if params.refine {
        let fine = Grid::new(grid.dim(), grid.length(), 2 * grid.samples_per_axis())?;
        let (_, fine_values) = distances(fine, params)?;
        let fine_inf = fine_values.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
        report.constant("infimum at double resolution", fine_inf);
        report.at_most(
            "relative infimum change under resolution doubling",
            Tier::Info,
            (fine_inf - infimum).abs() / infimum,
            0.1,
        );
    }
    Ok(report)
}
