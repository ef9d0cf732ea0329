//! Scenarios built on the Littlewood-Paley operators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::{Profile, RadialKernel};
use crate::error::{invalid, Error, Result};
use crate::grid::{GridFunction, VectorGridFunction};
use crate::lp_ops::{bands, kernel_family_apply, square_function, square_function_with, ScaleRange};
use crate::maximal::{smooth_maximal, ScaleSet};
use crate::quasinorm::{lp_of, weak_lp_of};

use super::family::{FamilyKind, TestFamily};
use super::params::{GridSpec, Smoothing};
use super::report::{ratio, Tier, VerifyReport};

fn make_family(kind: Option<FamilyKind>, grid: crate::grid::Grid<f64>, count: usize, seed: u64) -> Result<TestFamily> {
    match kind {
        Some(kind) => TestFamily::new("custom", kind, grid, count, seed),
        None => Ok(TestFamily::standard(grid, count, seed)),
    }
}

/// Partition of unity of the dilated mother bump on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionParams {
    pub grid: GridSpec,
    pub sharpness: f64,
    pub tolerance: f64,
}

impl Default for PartitionParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(1, 64.0, 1 << 12),
            sharpness: 1.0,
            tolerance: 1e-10,
        }
    }
}

pub fn check_lp_partition(params: &PartitionParams) -> Result<VerifyReport> {
    let grid = params.grid.build()?;
    let bump = crate::bumps::build_lp_bump(params.sharpness)?;
    let range = ScaleRange::full_window(&grid, bump);
    let mut report = VerifyReport::new("lp_partition", &["r", "sum_minus_one"]);
    report.param("grid", params.grid.describe()).param("sharpness", params.sharpness);
    let mut radii: Vec<f64> = (0..grid.len()).map(|k| grid.frequency_magnitude(k)).filter(|&r| r > 0.0).collect();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();
    let mut worst = 0.0f64;
    for &r in &radii {
        let total: f64 = range.indices().iter().map(|&j| bump.psi_hat(2f64.powi(-j) * r)).sum();
        worst = worst.max((total - 1.0).abs());
    }
    for &r in radii.iter().step_by((radii.len() / 64).max(1)) {
        let total: f64 = range.indices().iter().map(|&j| bump.psi_hat(2f64.powi(-j) * r)).sum();
        report.row(vec![r, total - 1.0]);
    }
    report.at_most("max |sum psi_hat - 1| over grid frequencies", Tier::Exact, worst, params.tolerance);

    // sign and support on a fine sweep that includes the endpoints
    let mut negative = 0usize;
    let mut outside = 0usize;
    let mut inside_zero = 0usize;
    let lo = 6.0 / 7.0;
    let n = 200_000;
    for i in 0..=n {
        let r = 3.0 * i as f64 / n as f64;
        let v = bump.psi_hat(r);
        if v < 0.0 {
            negative += 1;
        }
        if (r < lo || r > 2.0) && v != 0.0 {
            outside += 1;
        }
        if r > lo + 1e-9 && r < 2.0 - 1e-9 && v <= 0.0 {
            inside_zero += 1;
        }
    }
    for r in [lo, 2.0] {
        if bump.psi_hat(r) != 0.0 {
            outside += 1;
        }
    }
    report.at_most("negative psi_hat samples", Tier::Exact, negative as f64, 0.0);
    report.at_most("psi_hat nonzero outside [6/7, 2]", Tier::Exact, outside as f64, 0.0);
    report.constant("psi_hat vanishing inside (6/7, 2)", inside_zero as f64);
    Ok(report)
}

/// Reconstruction `sum_j Delta_j f = f` for mean-zero band-limited data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionParams {
    pub grid: GridSpec,
    pub count: usize,
    pub seed: u64,
    pub sharpness: f64,
    pub tolerance: f64,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            count: 20,
            seed: 1,
            sharpness: 1.0,
            tolerance: 1e-8,
        }
    }
}

pub fn check_reconstruction(params: &ReconstructionParams) -> Result<VerifyReport> {
    let grid = params.grid.build()?;
    let bump = crate::bumps::build_lp_bump(params.sharpness)?;
    let range = ScaleRange::full_window(&grid, bump);
    let family = TestFamily::standard(grid, params.count, params.seed);
    let errors: Vec<f64> = (0..params.count)
        .into_par_iter()
        .map(|i| {
            let f = family.instance(i)?;
            let bs = bands(&f, bump, &range)?;
            let mut total = GridFunction::zeros(grid);
            for b in &bs {
                total = total.plus(&b.function)?;
            }
            Ok(total.minus(&f)?.sup_norm())
        })
        .collect::<Result<_>>()?;
    let mut report = VerifyReport::new("reconstruction", &["sup_error"]);
    report
        .param("grid", params.grid.describe())
        .param("count", params.count)
        .param("seed", params.seed)
        .param("bands", format!("{}..={}", range.j_min, range.j_max));
    for e in &errors {
        report.row(vec![*e]);
    }
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    report.at_most("max ||sum_j Delta_j f - f||_inf", Tier::Exact, worst, params.tolerance);
    Ok(report)
}

/// Two-sided comparison of the square function and the weak Hardy norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqParams {
    pub grid: GridSpec,
    pub count: usize,
    pub seed: u64,
    /// Defaults to the standard band-limited family.
    pub family: Option<FamilyKind>,
    pub exponents: Vec<f64>,
    pub smoothing: Smoothing,
    /// Scales per octave of the refined comparison run.
    pub refined_per_octave: usize,
    pub threshold: f64,
    pub refinement_tolerance: f64,
}

impl Default for SqParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            count: 50,
            seed: 2,
            family: None,
            exponents: vec![0.7, 1.0, 1.5],
            smoothing: Smoothing::default(),
            refined_per_octave: 8,
            threshold: 50.0,
            refinement_tolerance: 0.1,
        }
    }
}

/// Band `[min, max]` of a list of ratios.
fn band(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn check_sq_equivalence(params: &SqParams) -> Result<VerifyReport> {
    let grid = params.grid.build()?;
    if params.exponents.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(invalid("exponents must be positive"));
    }
    let bump = params.smoothing.bump()?;
    let kernel = params.smoothing.kernel(grid.dim());
    let coarse = params.smoothing.scales(&grid)?;
    let fine = ScaleSet::new(&grid, params.refined_per_octave)?;
    let range = ScaleRange::full_window(&grid, bump);
    let family = make_family(params.family, grid, params.count, params.seed)?;
    let cell = grid.cell_volume();

    // per instance: for every p, (weak S, hp coarse, hp fine)
    let rows: Vec<Option<Vec<[f64; 3]>>> = (0..params.count)
        .into_par_iter()
        .map(|i| {
            let f = family.instance(i)?;
            if f.sup_norm() == 0.0 {
                return Ok(None);
            }
            let s = square_function(&f, bump, &range)?.magnitudes();
            let fs = VectorGridFunction::scalar(f);
            let mc = smooth_maximal(&fs, &kernel, &coarse)?.magnitudes();
            let mf = smooth_maximal(&fs, &kernel, &fine)?.magnitudes();
            Ok(Some(
                params
                    .exponents
                    .iter()
                    .map(|&p| [weak_lp_of(&s, cell, p), weak_lp_of(&mc, cell, p), weak_lp_of(&mf, cell, p)])
                    .collect(),
            ))
        })
        .collect::<Result<_>>()?;

    let mut report = VerifyReport::new("sq_equivalence", &["p", "weak_sq", "hp_weak", "hp_weak_refined", "ratio"]);
    report
        .param("grid", params.grid.describe())
        .param("count", params.count)
        .param("seed", params.seed)
        .param("per_octave", params.smoothing.per_octave)
        .param("refined_per_octave", params.refined_per_octave)
        .param("threshold", params.threshold);
    let mut any = false;
    for (pi, &p) in params.exponents.iter().enumerate() {
        let mut coarse_ratios = Vec::new();
        let mut fine_ratios = Vec::new();
        for row in rows.iter().flatten() {
            let [ws, hc, hf] = row[pi];
            let (Some(rc), Some(rf)) = (ratio(ws, hc), ratio(ws, hf)) else { continue };
            if ratio(hc, ws).is_none() {
                continue;
            }
            report.row(vec![p, ws, hc, hf, rc]);
            coarse_ratios.push(rc);
            fine_ratios.push(rf);
        }
        if coarse_ratios.is_empty() {
            continue;
        }
        any = true;
        let (lo, hi) = band(&coarse_ratios);
        let (flo, fhi) = band(&fine_ratios);
        report.constant(&format!("C_high(p={p})"), hi);
        report.constant(&format!("C_low(p={p})"), lo);
        report.at_most(&format!("max(C_high, 1/C_low) at p={p}"), Tier::Empirical, hi.max(1.0 / lo), params.threshold);
        let shrinks = flo >= lo * (1.0 - 1e-12) && fhi <= hi * (1.0 + 1e-12);
        let change = ((flo / lo) - 1.0).abs().max(((fhi / hi) - 1.0).abs());
        report.constant(&format!("refinement change(p={p})"), change);
        report.holds(
            &format!("band shrinks or moves < {} under refinement at p={p}", params.refinement_tolerance),
            Tier::Empirical,
            shrinks || change < params.refinement_tolerance,
        );
    }
    if !any {
        return Err(Error::Degenerate("every ratio in the family is undefined".into()));
    }
    Ok(report)
}

/// Lacunary square functions: residue-class consistency and lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LacunaryParams {
    pub grid: GridSpec,
    pub count: usize,
    pub seed: u64,
    /// Defaults to the standard band-limited family.
    pub family: Option<FamilyKind>,
    pub p: f64,
    pub q: u32,
    pub sharpness: f64,
    pub threshold: f64,
    pub consistency_tolerance: f64,
}

impl Default for LacunaryParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            count: 50,
            seed: 3,
            family: None,
            p: 1.0,
            q: 2,
            sharpness: 1.0,
            threshold: 100.0,
            consistency_tolerance: 1e-12,
        }
    }
}

pub fn check_lacunary_lower(params: &LacunaryParams) -> Result<VerifyReport> {
    if params.q == 0 {
        return Err(invalid("q must be at least 1"));
    }
    let grid = params.grid.build()?;
    let bump = crate::bumps::build_lp_bump(params.sharpness)?;
    let psi = RadialKernel::new(bump, Profile::Psi);
    let omega = RadialKernel::new(
        bump,
        Profile::Omega {
            b1: 0,
            b2: params.q as i32 - 1,
        },
    );
    let full = ScaleRange::full_window(&grid, bump);
    let omega_window = ScaleRange::window_for(&grid, &omega);
    let family = make_family(params.family, grid, params.count, params.seed)?;
    let cell = grid.cell_volume();
    let q = params.q;
    let rows: Vec<(f64, Vec<f64>)> = (0..params.count)
        .into_par_iter()
        .map(|i| {
            let f = family.instance(i)?;
            let s2: Vec<f64> = square_function(&f, bump, &full)?.magnitudes().iter().map(|v| v * v).collect();
            let mut parts = vec![0.0; grid.len()];
            for r in 0..q {
                let sr = square_function_with(&f, &psi, &full.lacunary(q, r)?)?.magnitudes();
                for (a, v) in parts.iter_mut().zip(&sr) {
                    *a += v * v;
                }
            }
            let scale = s2.iter().cloned().fold(0.0, f64::max).max(1e-300);
            let consistency = parts.iter().zip(&s2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            let fw = weak_lp_of(&f.magnitudes(), cell, params.p);
            let ratios = (0..q)
                .map(|r| {
                    let s = square_function_with(&f, &omega, &omega_window.lacunary(q, r)?)?.magnitudes();
                    Ok(ratio(fw, weak_lp_of(&s, cell, params.p)).unwrap_or(f64::INFINITY))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((consistency, ratios))
        })
        .collect::<Result<_>>()?;
    let mut columns = vec!["consistency".to_string()];
    columns.extend((0..q).map(|r| format!("ratio_r{r}")));
    let mut report = VerifyReport::new("lacunary_lower", &columns.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    report
        .param("grid", params.grid.describe())
        .param("count", params.count)
        .param("seed", params.seed)
        .param("p", params.p)
        .param("q", params.q)
        .param("threshold", params.threshold);
    let mut worst_consistency = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (c, rs) in &rows {
        worst_consistency = worst_consistency.max(*c);
        for r in rs {
            worst_ratio = worst_ratio.max(*r);
        }
        let mut row = vec![*c];
        row.extend(rs);
        report.row(row);
    }
    report.at_most(
        "max |sum_r S_{q,r}^2 - S^2| / max S^2",
        Tier::Exact,
        worst_consistency,
        params.consistency_tolerance,
    );
    report.constant("max lower-bound ratio", worst_ratio);
    report.at_most("max ||f||_{p,inf} / ||S_q f||_{p,inf}", Tier::Empirical, worst_ratio, params.threshold);
    Ok(report)
}

/// Operator used in the interpolation scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterpolationOperator {
    SquareFunction,
    /// A single projection `Delta_{j0}`.
    BandProjection { j0: i32 },
    /// `sum_j Delta_j^eta f_j` over the `eta` window.
    EtaFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpolationParams {
    pub grid: GridSpec,
    pub count: usize,
    pub seed: u64,
    pub operator: InterpolationOperator,
    pub family: Option<FamilyKind>,
    pub p1: f64,
    pub p: f64,
    pub p2: f64,
    pub smoothing: Smoothing,
    pub threshold: f64,
}

impl Default for InterpolationParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            count: 20,
            seed: 4,
            operator: InterpolationOperator::SquareFunction,
            family: None,
            p1: 0.8,
            p: 1.0,
            p2: 2.0,
            smoothing: Smoothing::default(),
            threshold: 1e3,
        }
    }
}

/// `theta = (1/p1 - 1/p) / (1/p1 - 1/p2)`.
pub fn interpolation_theta(p1: f64, p: f64, p2: f64) -> f64 {
    (1.0 / p1 - 1.0 / p) / (1.0 / p1 - 1.0 / p2)
}

pub fn check_interpolation_bound(params: &InterpolationParams) -> Result<VerifyReport> {
    let (p1, p, p2) = (params.p1, params.p, params.p2);
    if !(0.0 < p1 && p1 < p && p < p2 && p1 <= 1.0) {
        return Err(invalid("need 0 < p1 < p < p2 and p1 <= 1"));
    }
    let grid = params.grid.build()?;
    let bump = params.smoothing.bump()?;
    let kernel = params.smoothing.kernel(grid.dim());
    let scales = params.smoothing.scales(&grid)?;
    let cell = grid.cell_volume();
    let family = make_family(params.family, grid, params.count, params.seed)?;
    let eta = RadialKernel::new(bump, Profile::Eta);
    let eta_range = ScaleRange::window_for(&grid, &eta);
    let components = match params.operator {
        InterpolationOperator::EtaFamily => eta_range.indices().len(),
        _ => 1,
    };
    let full = ScaleRange::full_window(&grid, bump);
    // per instance: ||T F||_{p1}, ||T F||_{p2}, ||T F||_{p,inf}, hp strong p1, p2, hp weak p
    let rows: Vec<[f64; 6]> = (0..params.count)
        .into_par_iter()
        .map(|i| {
            let fs = family.vector_instance(i, components)?;
            let tf = match params.operator {
                InterpolationOperator::SquareFunction => square_function(&fs.components()[0], bump, &full)?,
                InterpolationOperator::BandProjection { j0 } => {
                    crate::lp_ops::delta_j(&fs.components()[0], j0, bump)?.function
                }
                InterpolationOperator::EtaFamily => kernel_family_apply(&fs, &eta, &eta_range)?,
            }
            .magnitudes();
            let m = smooth_maximal(&fs, &kernel, &scales)?.magnitudes();
            Ok([
                lp_of(&tf, cell, p1),
                lp_of(&tf, cell, p2),
                weak_lp_of(&tf, cell, p),
                lp_of(&m, cell, p1),
                lp_of(&m, cell, p2),
                weak_lp_of(&m, cell, p),
            ])
        })
        .collect::<Result<_>>()?;
    let a1 = rows.iter().filter_map(|r| ratio(r[0], r[3])).fold(0.0, f64::max);
    let a2 = rows.iter().filter_map(|r| ratio(r[1], r[4])).fold(0.0, f64::max);
    if a1 <= 0.0 || a2 <= 0.0 {
        return Err(Error::Degenerate("family gives a zero strong bound".into()));
    }
    let theta = interpolation_theta(p1, p, p2);
    let predicted = a1.powf(1.0 - theta) * a2.powf(theta);
    let mut report = VerifyReport::new(
        "interpolation_bound",
        &["t_lp1", "t_lp2", "t_weak_p", "hp_p1", "hp_p2", "hp_weak_p", "c"],
    );
    report
        .param("grid", params.grid.describe())
        .param("operator", format!("{:?}", params.operator))
        .param("p1", p1)
        .param("p", p)
        .param("p2", p2)
        .param("count", params.count)
        .param("seed", params.seed)
        .param("threshold", params.threshold);
    let mut c_max = 0.0f64;
    for r in &rows {
        let c = ratio(r[2], predicted * r[5]).unwrap_or(0.0);
        c_max = c_max.max(c);
        let mut row = r.to_vec();
        row.push(c);
        report.row(row);
    }
    report.constant("A1", a1);
    report.constant("A2", a2);
    report.constant("theta", theta);
    report.constant("c", c_max);
    report.holds(
        "theta endpoints",
        Tier::Exact,
        interpolation_theta(p1, p1, p2) == 0.0 && (interpolation_theta(p1, p2, p2) - 1.0).abs() < 1e-15,
    );
    report.at_most("empirical c", Tier::Empirical, c_max, params.threshold);
    Ok(report)
}

/// Quasi-triangle inequality of the weak Hardy quasinorm over family pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuasiTriangleParams {
    pub grid: GridSpec,
    pub count: usize,
    pub seed: u64,
    pub p: f64,
    pub family: FamilyKind,
    pub smoothing: Smoothing,
}

impl Default for QuasiTriangleParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            count: 12,
            seed: 5,
            p: 1.0,
            family: FamilyKind::MollifiedAtoms { radius: 1.0 },
            smoothing: Smoothing::default(),
        }
    }
}

pub fn check_quasi_triangle(params: &QuasiTriangleParams) -> Result<VerifyReport> {
    let grid = params.grid.build()?;
    let kernel = params.smoothing.kernel(grid.dim());
    let scales = params.smoothing.scales(&grid)?;
    let cell = grid.cell_volume();
    let p = params.p;
    let family = TestFamily::new("quasi_triangle", params.family, grid, params.count, params.seed)?;
    let fs: Vec<GridFunction<f64>> = (0..params.count).map(|i| family.instance(i)).collect::<Result<_>>()?;
    let norm = |f: &GridFunction<f64>| -> Result<f64> {
        let m = smooth_maximal(&VectorGridFunction::scalar(f.clone()), &kernel, &scales)?;
        Ok(weak_lp_of(&m.magnitudes(), cell, p))
    };
    let single: Vec<f64> = fs.par_iter().map(&norm).collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..fs.len()).flat_map(|i| ((i + 1)..fs.len()).map(move |j| (i, j))).collect();
    let sums: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| norm(&fs[i].plus(&fs[j])?))
        .collect::<Result<_>>()?;
    let mut report = VerifyReport::new("quasi_triangle", &["i", "j", "lhs", "rhs"]);
    report
        .param("grid", params.grid.describe())
        .param("p", p)
        .param("count", params.count)
        .param("seed", params.seed);
    let mut worst = 0.0f64;
    for (&(i, j), &s) in pairs.iter().zip(&sums) {
        let lhs = s.powf(p);
        let rhs = 2f64.powf(p) * (single[i].powf(p) + single[j].powf(p));
        if let Some(r) = ratio(lhs, rhs) {
            worst = worst.max(r);
        }
        report.row(vec![i as f64, j as f64, lhs, rhs]);
    }
    report.at_most("max lhs / rhs", Tier::Exact, worst, 1.0 + 1e-12);
    Ok(report)
}
