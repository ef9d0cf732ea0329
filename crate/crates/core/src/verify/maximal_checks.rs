//! Maximal-function scenarios: the pointwise chain and the vector-valued
//! weak-type inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{embed_point_mass, VectorGridFunction};
use crate::maximal::{hl_maximal, maximal_chain};
use crate::quasinorm::{lp_of, weak_lp_of};
use crate::whitney_cz::{layer_cake, split_height};

use super::family::TestFamily;
use super::params::{GridSpec, Smoothing};
use super::report::{ratio, Tier, VerifyReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainParams {
    pub grid: GridSpec,
    pub count: usize,
    pub components: usize,
    pub seed: u64,
    pub apertures: Vec<f64>,
    /// Exponent `p` fixing `b = n/p + 1`.
    pub p: f64,
    pub smoothing: Smoothing,
    /// Also run a single point mass at the origin.
    pub point_mass: bool,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(1, 32.0, 512),
            count: 20,
            components: 3,
            seed: 6,
            apertures: vec![0.5, 1.0, 2.0],
            p: 1.0,
            smoothing: Smoothing::default(),
            point_mass: true,
        }
    }
}

pub fn check_maximal_chain(params: &ChainParams) -> Result<VerifyReport> {
    if params.apertures.iter().any(|&a| !(a > 0.0)) || !(params.p > 0.0) {
        return Err(invalid("apertures and p must be positive"));
    }
    let grid = params.grid.build()?;
    let kernel = params.smoothing.kernel(grid.dim());
    let scales = params.smoothing.scales(&grid)?;
    let b = grid.dim() as f64 / params.p + 1.0;
    let family = TestFamily::standard(grid, params.count, params.seed);
    let mut inputs: Vec<VectorGridFunction<f64>> = (0..params.count)
        .map(|i| family.vector_instance(i, params.components))
        .collect::<Result<_>>()?;
    if params.point_mass {
        let origin = vec![0.0; grid.dim()];
        inputs.push(VectorGridFunction::scalar(embed_point_mass(grid, &origin, 1.0)?));
    }
    let rows: Vec<Vec<f64>> = inputs
        .par_iter()
        .enumerate()
        .map(|(i, fs)| {
            params
                .apertures
                .iter()
                .map(|&a| Ok(vec![i as f64, a, maximal_chain(fs, &kernel, a, b, &scales)?.violations as f64]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut report = VerifyReport::new("maximal_chain", &["input", "a", "violations"]);
    report
        .param("grid", params.grid.describe())
        .param("count", params.count)
        .param("components", params.components)
        .param("seed", params.seed)
        .param("b", b)
        .param("point_mass", params.point_mass);
    let total: f64 = rows.iter().map(|r| r[2]).sum();
    for r in rows {
        report.row(r);
    }
    report.at_most("pointwise chain violations", Tier::Exact, total, 0.0);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FsParams {
    pub grid: GridSpec,
    pub count: usize,
    pub components: usize,
    pub seed: u64,
    pub p: f64,
    pub q: f64,
    /// Exponents of the strong bounds feeding the split height.
    pub p1: f64,
    pub p2: f64,
    pub threshold: f64,
    pub layer_tolerance: f64,
}

impl Default for FsParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(1, 32.0, 1024),
            count: 30,
            components: 8,
            seed: 7,
            p: 2.0,
            q: 2.0,
            p1: 1.5,
            p2: 3.0,
            threshold: 20.0,
            layer_tolerance: 1e-9,
        }
    }
}

/// Heights, as fractions of `sup |F|`, at which the split is re-enacted.
const SPLIT_LEVELS: [f64; 4] = [0.1, 0.25, 0.5, 0.75];

pub fn check_fs_inequality(params: &FsParams) -> Result<VerifyReport> {
    let (p, q) = (params.p, params.q);
    if !(p > 1.0 && q > 1.0 && p.is_finite() && q.is_finite()) {
        return Err(invalid("need 1 < p, q < infinity"));
    }
    if !(1.0 < params.p1 && params.p1 < p && p < params.p2) {
        return Err(invalid("need 1 < p1 < p < p2"));
    }
    let grid = params.grid.build()?;
    let cell = grid.cell_volume();
    let family = TestFamily::standard(grid, params.count, params.seed);
    // per instance: weak ratio, strong ratios at p1, p2, and the input
    let results: Vec<([f64; 3], VectorGridFunction<f64>)> = (0..params.count)
        .into_par_iter()
        .map(|i| {
            let fs = family.vector_instance(i, params.components)?;
            let maxes = VectorGridFunction::new(
                fs.components().iter().map(hl_maximal).collect::<Result<Vec<_>>>()?,
            )?;
            let lhs = maxes.lq_magnitude(q);
            let rhs = fs.lq_magnitude(q);
            let r = |e: f64, weak: bool| {
                let (a, b) = if weak {
                    (weak_lp_of(&lhs, cell, e), weak_lp_of(&rhs, cell, e))
                } else {
                    (lp_of(&lhs, cell, e), lp_of(&rhs, cell, e))
                };
                ratio(a, b).unwrap_or(0.0)
            };
            Ok(([r(p, true), r(params.p1, false), r(params.p2, false)], fs))
        })
        .collect::<Result<_>>()?;
    let a1 = results.iter().map(|r| r.0[1]).fold(0.0, f64::max);
    let a2 = results.iter().map(|r| r.0[2]).fold(0.0, f64::max);
    let mut report = VerifyReport::new("fs_inequality", &["weak_ratio", "strong_ratio_p1", "strong_ratio_p2", "layer_cake_ok"]);
    report
        .param("grid", params.grid.describe())
        .param("count", params.count)
        .param("components", params.components)
        .param("seed", params.seed)
        .param("p", p)
        .param("q", q)
        .param("p1", params.p1)
        .param("p2", params.p2)
        .param("threshold", params.threshold);
    let mut worst = 0.0f64;
    let mut layer_failures = 0usize;
    let split_at = |fs: &VectorGridFunction<f64>| -> Result<bool> {
        let sup = fs.magnitude().iter().cloned().fold(0.0, f64::max);
        let mut ok = true;
        for level in SPLIT_LEVELS {
            let alpha = split_height(level * sup, a1, a2, params.p1, params.p2)?;
            ok &= layer_cake(fs, alpha, p, params.p1, params.p2)?.holds(params.layer_tolerance);
        }
        Ok(ok)
    };
    // the layer-cake identities are stated for the l^2 magnitude
    let layered = (q - 2.0).abs() < 1e-15;
    for (r, fs) in &results {
        worst = worst.max(r[0]);
        let ok = if layered { split_at(fs)? } else { true };
        if !ok {
            layer_failures += 1;
        }
        report.row(vec![r[0], r[1], r[2], if ok { 1.0 } else { 0.0 }]);
    }
    report.constant("A1", a1);
    report.constant("A2", a2);
    report.constant("max weak ratio", worst);
    report.at_most("max vector maximal weak-type ratio", Tier::Empirical, worst, params.threshold);
    if layered {
        report.at_most("split-height layer-cake failures", Tier::Exact, layer_failures as f64, 0.0);
    }
    Ok(report)
}
