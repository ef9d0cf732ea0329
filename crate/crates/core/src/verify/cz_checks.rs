//! Whitney and Calderon-Zygmund scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bumps::build_dictionary;
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction, VectorGridFunction};
use crate::maximal::{grand_maximal, smooth_maximal, ScaleSet};
use crate::quasinorm::{lp_of, weak_lp_of};
use crate::whitney_cz::{audit_whitney, bad_part_decay, cz_decompose, CzOptions};

use super::family::TestFamily;
use super::params::{GridSpec, Smoothing};
use super::report::{Tier, VerifyReport};

/// Dilation of the overlap count.
const OVERLAP_DILATION: f64 = 9.0 / 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WhitneyCzParams {
    pub grid: GridSpec,
    pub count: usize,
    pub components: usize,
    pub seed: u64,
    pub p: f64,
    pub degree: usize,
    pub partition_tolerance: f64,
    pub reconstruction_tolerance: f64,
    pub moment_tolerance: f64,
}

impl Default for WhitneyCzParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(1, 32.0, 1 << 10),
            count: 10,
            components: 2,
            seed: 9,
            p: 1.0,
            degree: 1,
            partition_tolerance: 1e-10,
            reconstruction_tolerance: 1e-10,
            moment_tolerance: 1e-8,
        }
    }
}

/// Union of one to four random boxes, each a sixteenth to a quarter of the
/// period wide, never the whole domain.
pub fn random_open_set(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let l = grid.length();
    let pieces = rng.gen_range(1..=4);
    let boxes: Vec<([f64; 2], [f64; 2])> = (0..pieces)
        .map(|_| {
            let mut c = [0.0; 2];
            let mut w = [0.0; 2];
            for a in 0..grid.dim() {
                c[a] = rng.gen_range(-l / 2.0..l / 2.0);
                w[a] = rng.gen_range(l / 32.0..l / 8.0);
            }
            (c, w)
        })
        .collect();
    (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            boxes
                .iter()
                .any(|(c, w)| (0..grid.dim()).all(|a| grid.wrap(x[a] - c[a]).abs() < w[a]))
        })
        .collect()
}

pub fn check_whitney_cz_tier1(params: &WhitneyCzParams) -> Result<VerifyReport> {
    let grid = params.grid.build()?;
    let family = TestFamily::standard(grid, params.count, params.seed);
    let overlap_bound = 12usize.pow(grid.dim() as u32);
    let options = CzOptions::default();
    let rows: Vec<Vec<f64>> = (0..params.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64);
            let mask = random_open_set(&grid, &mut rng);
            let proxy = GridFunction::from_real(grid, mask.iter().map(|&m| if m { 2.0 } else { 0.0 }).collect())?;
            let fs = family.vector_instance(i, params.components)?;
            let d = cz_decompose(&fs, 1.0, params.p, params.degree, &proxy, &options)?;
            let audit = audit_whitney(&grid, &mask, &d.cubes, OVERLAP_DILATION);
            let total = d.partition.total();
            let partition_err = total
                .iter()
                .zip(&mask)
                .map(|(t, &m)| (t - if m { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            let back = d.reconstruct()?;
            let recon_err = back
                .components()
                .iter()
                .zip(fs.components())
                .map(|(a, b)| Ok(a.minus(b)?.sup_norm()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let moments = (0..d.cubes.len()).map(|j| d.moment_residual(j)).fold(0.0, f64::max);
            Ok(vec![
                d.cubes.len() as f64,
                d.resolved() as f64,
                audit.distance_violations as f64,
                audit.coverage_violations as f64,
                audit.max_overlap as f64,
                partition_err,
                recon_err,
                moments,
            ])
        })
        .collect::<Result<_>>()?;
    let mut report = VerifyReport::new(
        "whitney_cz",
        &[
            "cubes",
            "resolved",
            "distance_violations",
            "coverage_violations",
            "max_overlap",
            "partition_error",
            "reconstruction_error",
            "moment_residual",
        ],
    );
    report
        .param("grid", params.grid.describe())
        .param("count", params.count)
        .param("seed", params.seed)
        .param("p", params.p)
        .param("degree", params.degree);
    let col = |k: usize| rows.iter().map(|r| r[k]).fold(0.0, f64::max);
    let sum = |k: usize| rows.iter().map(|r| r[k]).sum::<f64>();
    let (distance, coverage, overlap) = (sum(2), sum(3), col(4));
    let (partition, recon, moments) = (col(5), col(6), col(7));
    report.constant("cubes", sum(0));
    report.constant("resolved cubes", sum(1));
    for r in rows {
        report.row(r);
    }
    report.at_most("diam < dist <= 4 diam violations", Tier::Exact, distance, 0.0);
    report.at_most("coverage violations", Tier::Exact, coverage, 0.0);
    report.at_most("max overlap of 9/8-dilated cubes", Tier::Exact, overlap, overlap_bound as f64);
    report.at_most("max |sum phi_j - chi_Omega|", Tier::Exact, partition, params.partition_tolerance);
    report.at_most("max |F - G - sum b_j|", Tier::Exact, recon, params.reconstruction_tolerance);
    report.at_most("max relative moment residual", Tier::Exact, moments, params.moment_tolerance);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CzQuantParams {
    pub grid: GridSpec,
    /// Centre of the Gaussian spike `exp(-(x - c)^2 / w)`.
    pub center: f64,
    pub width: f64,
    pub p: f64,
    pub degree: usize,
    /// Thresholds as fractions of the proxy maximum.
    pub fractions: Vec<f64>,
    pub dictionary_order: usize,
    pub dictionary_size: usize,
    pub dictionary_seed: u64,
    pub per_octave: usize,
    /// Distances of the decay fit in units of the cube side.
    pub decay_from: f64,
    pub decay_to: f64,
    pub decay_points: usize,
    /// Number of leading fractions at which the decay is fitted.
    pub decay_alphas: usize,
    pub stability_factor: f64,
    pub slope_slack: f64,
    /// Exponents of the reported bad and good constants.
    pub p1: f64,
    pub p2: f64,
    pub smoothing: Smoothing,
}

impl Default for CzQuantParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(1, 512.0, 1 << 15),
            center: 0.1,
            width: 0.02,
            p: 1.0,
            degree: 1,
            fractions: vec![0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002],
            dictionary_order: 2,
            dictionary_size: 8,
            dictionary_seed: 7,
            per_octave: 2,
            decay_from: 16.0,
            decay_to: 64.0,
            decay_points: 12,
            decay_alphas: 2,
            stability_factor: 3.0,
            slope_slack: 0.5,
            p1: 0.5,
            p2: 2.0,
            smoothing: Smoothing::default(),
        }
    }
}

pub fn check_cz_quantitative(params: &CzQuantParams) -> Result<VerifyReport> {
    if params.fractions.len() < 2 || params.fractions.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
        return Err(invalid("need at least two fractions in (0, 1)"));
    }
    if !(params.decay_from > 1.0 && params.decay_to > params.decay_from && params.decay_points >= 2) {
        return Err(invalid("decay window must satisfy 1 < from < to with at least two points"));
    }
    let grid = params.grid.build()?;
    let dim = grid.dim();
    let (c, w) = (params.center, params.width);
    let f = GridFunction::from_fn(grid, move |x| {
        let r2: f64 = (0..dim).map(|a| (x[a] - c).powi(2)).sum();
        (-r2 / w).exp()
    });
    let fs = VectorGridFunction::scalar(f);
    let dictionary = build_dictionary(dim, params.dictionary_order, params.dictionary_size, params.dictionary_seed)?;
    let scales = ScaleSet::new(&grid, params.per_octave)?;
    let proxy = grand_maximal(&fs, &dictionary, &scales)?;
    let top = proxy.sup_norm();
    let cell = grid.cell_volume();
    let kernel = params.smoothing.kernel(dim);
    let hp_scales = params.smoothing.scales(&grid)?;
    let f_weak = weak_lp_of(&proxy.magnitudes(), cell, params.p).powf(params.p);
    let target = -((params.degree + dim + 1) as f64) + params.slope_slack;
    let options = CzOptions::default();
    let distances: Vec<f64> = (0..params.decay_points)
        .map(|i| {
            let t = i as f64 / (params.decay_points - 1) as f64;
            params.decay_from * (params.decay_to / params.decay_from).powf(t)
        })
        .collect();

    let mut report = VerifyReport::new(
        "cz_quantitative",
        &["alpha", "cubes", "resolved", "good_over_alpha", "c_bad", "c_good", "decay_slope"],
    );
    report
        .param("grid", params.grid.describe())
        .param("p", params.p)
        .param("degree", params.degree)
        .param("per_octave", params.per_octave)
        .param("dictionary", format!("order={} size={} seed={}", params.dictionary_order, params.dictionary_size, params.dictionary_seed))
        .param("decay_window", format!("[{}, {}] x side", params.decay_from, params.decay_to));
    report.constant("proxy max", top);

    let mut good_ratios = Vec::new();
    let mut worst_slope = f64::NEG_INFINITY;
    for (ai, &frac) in params.fractions.iter().enumerate() {
        let alpha = frac * top;
        let d = match cz_decompose(&fs, alpha, params.p, params.degree, &proxy, &options) {
            Ok(d) => d,
            Err(Error::NoExterior) => continue,
            Err(e) => return Err(e),
        };
        if d.cubes.is_empty() {
            continue;
        }
        let g_ratio = d.good_ratio_on_set();
        good_ratios.push(g_ratio);
        let bad = d.bad_total()?;
        let mb = smooth_maximal(&bad, &kernel, &hp_scales)?.magnitudes();
        let mg = smooth_maximal(&d.good, &kernel, &hp_scales)?.magnitudes();
        let c_bad = lp_of(&mb, cell, params.p1).powf(params.p1) / (alpha.powf(params.p1 - params.p) * f_weak);
        let c_good = lp_of(&mg, cell, params.p2).powf(params.p2) / (alpha.powf(params.p2 - params.p) * f_weak);
        let mut slope = f64::NAN;
        if ai < params.decay_alphas {
            // the resolved cube carrying the most bad-part mass
            let heaviest = d
                .bad
                .iter()
                .filter(|b| b.is_resolved())
                .max_by(|a, b| {
                    let m = |x: &crate::whitney_cz::BadPart<f64>| x.components[0].iter().map(|v| v.norm()).sum::<f64>();
                    m(a).partial_cmp(&m(b)).unwrap()
                })
                .map(|b| b.cube);
            if let Some(j) = heaviest {
                let side = d.cubes[j].side(&grid);
                let ds: Vec<f64> = distances.iter().map(|k| k * side).collect();
                slope = bad_part_decay(&d, j, 0, &ds)?.slope;
                worst_slope = worst_slope.max(slope);
            }
        }
        report.row(vec![alpha, d.cubes.len() as f64, d.resolved() as f64, g_ratio, c_bad, c_good, slope]);
    }
    if good_ratios.len() < 2 {
        return Err(Error::Degenerate("fewer than two thresholds produced cubes".into()));
    }
    let lo = good_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = good_ratios.iter().cloned().fold(0.0, f64::max);
    report.constant("min sup_Omega |G| / alpha", lo);
    report.constant("max sup_Omega |G| / alpha", hi);
    report.constant("alpha decades", (params.fractions[0] / params.fractions[params.fractions.len() - 1]).log10());
    report.at_most("spread of sup_Omega |G| / alpha", Tier::Empirical, hi / lo, params.stability_factor);
    if worst_slope.is_finite() {
        report.at_most("bad-part decay slope", Tier::Empirical, worst_slope, target);
    } else {
        report.holds("bad-part decay slope", Tier::Empirical, false);
    }
    Ok(report)
}
