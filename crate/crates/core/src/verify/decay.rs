//! Normalised exceptional sets `{|g| >= |x|^{-n/s}}` at large and small radii.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Grid, GridFunction};

use super::params::GridSpec;
use super::report::{Tier, VerifyReport};

/// The four ratio sequences of one function.
///
/// `large_*` use `M = L/8, L/4, L/2`; `small_*` use `delta = 32h, 16h, 8h`.
/// Each sequence is ordered toward its limit.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayRatios {
    pub radii_large: [f64; 3],
    pub radii_small: [f64; 3],
    /// Threshold exponent `p` at large radii.
    pub large_p: [f64; 3],
    /// Threshold exponent `p` at small radii.
    pub small_p: [f64; 3],
    /// Threshold exponent `p2` at large radii.
    pub large_p2: [f64; 3],
    /// Threshold exponent `p1` at small radii.
    pub small_p1: [f64; 3],
}

/// `|{0 < |x| <= r : |g(x)| >= |x|^{-n/s}}| / r^n`, with `|x|` the distance
/// to the origin inside the fundamental domain.
pub fn exceptional_ratio(g: &GridFunction<f64>, s: f64, r: f64) -> f64 {
    let grid = g.grid();
    let n = grid.dim() as f64;
    let count = g
        .values()
        .iter()
        .enumerate()
        .filter(|(i, v)| {
            let x = grid.point(*i);
            let d = (x[0] * x[0] + if grid.dim() == 2 { x[1] * x[1] } else { 0.0 }).sqrt();
            d > 0.0 && d <= r && v.norm() >= d.powf(-n / s)
        })
        .count();
    count as f64 * grid.cell_volume() / r.powf(n)
}

pub fn decay_ratios(g: &GridFunction<f64>, p: f64, p1: f64, p2: f64) -> Result<DecayRatios> {
    if !(0.0 < p1 && p1 < p && p < p2) {
        return Err(invalid("need 0 < p1 < p < p2"));
    }
    let grid = g.grid();
    let l = grid.length();
    let h = grid.spacing();
    let radii_large = [l / 8.0, l / 4.0, l / 2.0];
    let radii_small = [32.0 * h, 16.0 * h, 8.0 * h];
    let seq = |s: f64, radii: &[f64; 3]| radii.map(|r| exceptional_ratio(g, s, r));
    Ok(DecayRatios {
        radii_large,
        radii_small,
        large_p: seq(p, &radii_large),
        small_p: seq(p, &radii_small),
        large_p2: seq(p2, &radii_large),
        small_p1: seq(p1, &radii_small),
    })
}

fn strictly_decreasing(v: &[f64; 3]) -> bool {
    v[0] > v[1] && v[1] > v[2]
}

/// Report of all four sequences for one function.
pub fn decay_check(g: &GridFunction<f64>, p: f64, p1: f64, p2: f64) -> Result<VerifyReport> {
    let r = decay_ratios(g, p, p1, p2)?;
    let mut report = VerifyReport::new("decay", &["sequence", "radius", "ratio"]);
    report.param("p", p).param("p1", p1).param("p2", p2);
    let seqs = [
        (&r.radii_large, &r.large_p),
        (&r.radii_small, &r.small_p),
        (&r.radii_large, &r.large_p2),
        (&r.radii_small, &r.small_p1),
    ];
    for (k, (radii, values)) in seqs.iter().enumerate() {
        for (rad, v) in radii.iter().zip(values.iter()) {
            report.row(vec![k as f64, *rad, *v]);
        }
    }
    report.holds("large radii, exponent p, decreasing", Tier::Info, strictly_decreasing(&r.large_p));
    report.holds("small radii, exponent p, decreasing", Tier::Info, strictly_decreasing(&r.small_p));
    report.holds("large radii, exponent p2, decreasing", Tier::Info, strictly_decreasing(&r.large_p2));
    report.holds("small radii, exponent p1, decreasing", Tier::Info, strictly_decreasing(&r.small_p1));
    Ok(report)
}

/// Staircase witnesses, one per sequence, on a 1D grid.
pub struct DecayWitnesses {
    /// In `L^p`: `2|x|^{-1/p}` on a half-unit interval at the start of each
    /// shell `[2^k, 2^{k+1})`, `k >= 0`.
    pub large_p: GridFunction<f64>,
    /// In `L^p`: `2|x|^{-1/p}` on the outer `round(2^k (k-1)/(k+1))` cells of
    /// each shell `[2^k h, 2^{k+1} h)`, `k >= 2`.
    pub small_p: GridFunction<f64>,
    /// In weak `L^p`: the dyadic staircase `2^{-floor(log2 |x|)/p}`.
    pub large_p2: GridFunction<f64>,
    /// In weak `L^p`: `C|x|^{-1/p}` with the crossing of `|x|^{-1/p1}` at
    /// four and a half cells.
    pub small_p1: GridFunction<f64>,
}

pub fn decay_witnesses(grid: Grid<f64>, p: f64, p1: f64) -> Result<DecayWitnesses> {
    if grid.dim() != 1 {
        return Err(invalid("decay witnesses are one-dimensional"));
    }
    if !(0.0 < p1 && p1 < p) {
        return Err(invalid("need 0 < p1 < p"));
    }
    let h = grid.spacing();
    let large_p = GridFunction::from_fn(grid, move |x| {
        let d = x[0].abs();
        if d < 1.0 {
            return 0.0;
        }
        let base = 2f64.powi(d.log2().floor() as i32);
        if d < base + 0.5 {
            2.0 * d.powf(-1.0 / p)
        } else {
            0.0
        }
    });
    let small_p = GridFunction::from_fn(grid, move |x| {
        let cells = (x[0].abs() / h).round() as i64;
        if cells < 4 {
            return 0.0;
        }
        let k = 63 - cells.leading_zeros() as i64;
        let width = 1i64 << k;
        let kept = ((width as f64) * (k - 1) as f64 / (k + 1) as f64).round() as i64;
        if cells >= 2 * width - kept {
            2.0 * x[0].abs().powf(-1.0 / p)
        } else {
            0.0
        }
    });
    let large_p2 = GridFunction::from_fn(grid, move |x| {
        let d = x[0].abs();
        if d == 0.0 {
            return 0.0;
        }
        2f64.powf(-d.log2().floor() / p)
    });
    let x0 = 4.5 * h;
    let c = x0.powf(1.0 / p - 1.0 / p1);
    let small_p1 = GridFunction::from_fn(grid, move |x| {
        let d = x[0].abs();
        if d == 0.0 {
            0.0
        } else {
            c * d.powf(-1.0 / p)
        }
    });
    Ok(DecayWitnesses {
        large_p,
        small_p,
        large_p2,
        small_p1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayParams {
    pub grid: GridSpec,
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(1, 64.0, 1 << 14),
            p: 1.0,
            p1: 0.5,
            p2: 2.0,
        }
    }
}

pub fn check_decay_trend(params: &DecayParams) -> Result<VerifyReport> {
    let grid = params.grid.build()?;
    let (p, p1, p2) = (params.p, params.p1, params.p2);
    if !(0.0 < p1 && p1 < p && p < p2) {
        return Err(invalid("need 0 < p1 < p < p2"));
    }
    let w = decay_witnesses(grid, p, p1)?;
    let mut report = VerifyReport::new("decay_trend", &["witness", "radius_index", "radius", "ratio"]);
    report
        .param("grid", params.grid.describe())
        .param("p", p)
        .param("p1", p1)
        .param("p2", p2);
    let cases = [
        ("large radii at exponent p", &w.large_p, 0usize),
        ("small radii at exponent p", &w.small_p, 1),
        ("large radii at exponent p2", &w.large_p2, 2),
        ("small radii at exponent p1", &w.small_p1, 3),
    ];
    for (name, g, which) in cases {
        let r = decay_ratios(g, p, p1, p2)?;
        let (radii, values) = match which {
            0 => (r.radii_large, r.large_p),
            1 => (r.radii_small, r.small_p),
            2 => (r.radii_large, r.large_p2),
            _ => (r.radii_small, r.small_p1),
        };
        for (k, (rad, v)) in radii.iter().zip(values.iter()).enumerate() {
            report.row(vec![which as f64, k as f64, *rad, *v]);
        }
        report.holds(&format!("{name}: strictly decreasing"), Tier::Exact, strictly_decreasing(&values));
    }

    // empty exceptional sets
    let below = GridFunction::from_fn(grid, move |x| {
        let d = x[0];
        if d > 0.0 && d < 1.0 {
            d.powf(-1.0 / p)
        } else {
            0.0
        }
    });
    let above = GridFunction::from_fn(grid, move |x| {
        let d = x[0];
        if d > 1.0 {
            d.powf(-1.0 / p)
        } else {
            0.0
        }
    });
    let zero_small = decay_ratios(&below, p, p1, p2)?.small_p1;
    let zero_large = decay_ratios(&above, p, p1, p2)?.large_p2;
    report.at_most(
        "|x|^{-1/p} on (0,1) against exponent p1",
        Tier::Exact,
        zero_small.iter().cloned().fold(0.0, f64::max),
        0.0,
    );
    report.at_most(
        "|x|^{-1/p} on (1,inf) against exponent p2",
        Tier::Exact,
        zero_large.iter().cloned().fold(0.0, f64::max),
        0.0,
    );
    Ok(report)
}
