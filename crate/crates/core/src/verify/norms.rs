//! Exactness of the weak-type quasinorms on closed-form inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Grid, GridFunction};
use crate::quasinorm::{weak_lp_of, weak_lp_r_mean_of};

use super::family::{FamilyKind, TestFamily};
use super::params::GridSpec;
use super::report::{Tier, VerifyReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakNormParams {
    /// Grid of the indicator and r-mean checks.
    pub grid: GridSpec,
    /// Grid of the `1/x` tail.
    pub tail_grid: GridSpec,
    pub count: usize,
    pub seed: u64,
    pub exponents: Vec<f64>,
    pub r_mean_p: f64,
    pub r_values: Vec<f64>,
    pub tail_tolerance: f64,
}

impl Default for WeakNormParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(1, 16.0, 512),
            tail_grid: GridSpec::new(1, 64.0, 1 << 14),
            count: 50,
            seed: 8,
            exponents: vec![0.5, 1.0, 2.0, 3.5],
            r_mean_p: 2.0,
            r_values: vec![0.5, 1.0, 1.5],
            tail_tolerance: 0.02,
        }
    }
}

/// `1/x` on `x > 1`, with `x` measured from the left edge of the period so
/// the tail runs over `(1, L)`.
pub fn reciprocal_tail(grid: Grid<f64>) -> GridFunction<f64> {
    let half = grid.length() / 2.0;
    GridFunction::from_fn(grid, move |x| {
        let t = x[0] + half;
        if t > 1.0 {
            1.0 / t
        } else {
            0.0
        }
    })
}

/// Upper end of the r-mean band, `(p/(p - r))^{1/r}`.
pub fn r_mean_bound(p: f64, r: f64) -> f64 {
    (p / (p - r)).powf(1.0 / r)
}

pub fn check_weak_norms(params: &WeakNormParams) -> Result<VerifyReport> {
    let grid = params.grid.build()?;
    let cell = grid.cell_volume();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut report = VerifyReport::new("weak_norms", &["kind", "p", "r", "value", "expected"]);
    report
        .param("grid", params.grid.describe())
        .param("tail_grid", params.tail_grid.describe())
        .param("count", params.count)
        .param("seed", params.seed);

    // indicators: |E|^{1/p}
    let mut indicator_err = 0.0f64;
    for _ in 0..params.count {
        let density: f64 = rng.gen_range(0.01..0.9);
        let values: Vec<f64> = (0..grid.len()).map(|_| if rng.gen_bool(density) { 1.0 } else { 0.0 }).collect();
        let measure = values.iter().filter(|&&v| v > 0.0).count() as f64 * cell;
        for &p in &params.exponents {
            let got = weak_lp_of(&values, cell, p);
            let want = measure.powf(1.0 / p);
            indicator_err = indicator_err.max((got - want).abs() / want.max(f64::MIN_POSITIVE));
            report.row(vec![0.0, p, 0.0, got, want]);
        }
    }
    report.at_most("max relative error of ||chi_E||_{p,inf} vs |E|^{1/p}", Tier::Exact, indicator_err, 1e-14);

    // 1/x tail in weak L^1
    let tail_grid = params.tail_grid.build()?;
    let tail = weak_lp_of(&reciprocal_tail(tail_grid).magnitudes(), tail_grid.cell_volume(), 1.0);
    report.row(vec![1.0, 1.0, 0.0, tail, 1.0]);
    report.constant("||(1/x) chi_(1,inf)||_{1,inf}", tail);
    report.at_most("|tail norm - 1|", Tier::Exact, (tail - 1.0).abs(), params.tail_tolerance);

    // r-mean against distribution sup
    let family = TestFamily::new(
        "indicator_sums",
        FamilyKind::IndicatorSums { pieces: 4 },
        grid,
        params.count,
        params.seed,
    )?;
    let standard = TestFamily::standard(grid, params.count, params.seed);
    let p = params.r_mean_p;
    let mut lo = f64::INFINITY;
    let mut excess = 0.0f64;
    for i in 0..params.count {
        let f = if i % 2 == 0 { family.instance(i)? } else { standard.instance(i)? };
        let mags = f.magnitudes();
        let base = weak_lp_of(&mags, cell, p);
        if base == 0.0 {
            continue;
        }
        for &r in params.r_values.iter().filter(|&&r| r > 0.0 && r < p) {
            let v = weak_lp_r_mean_of(&mags, cell, p, r);
            let q = v / base;
            lo = lo.min(q);
            excess = excess.max(q / r_mean_bound(p, r));
            report.row(vec![2.0, p, r, v, base]);
        }
    }
    report.constant("min r-mean / distribution sup", lo);
    report.constant("max r-mean / (distribution sup * upper factor)", excess);
    report.at_least("r-mean lower factor", Tier::Exact, lo, 1.0 - 1e-12);
    report.at_most("r-mean upper factor", Tier::Exact, excess, 1.0 + 1e-12);
    Ok(report)
}
