//! Scenario runners that turn the library into numerical checks.
//!
//! Every scenario takes a parameter struct with serde defaults and returns a
//! [`VerifyReport`]. Scenarios run in `f64`.

mod cz_checks;
mod decay;
mod family;
mod maximal_checks;
mod nondensity;
mod norms;
mod params;
mod report;
mod spectral;

use serde::{Deserialize, Serialize};

pub use cz_checks::{check_cz_quantitative, check_whitney_cz_tier1, random_open_set, CzQuantParams, WhitneyCzParams};
pub use decay::{
    check_decay_trend, decay_check, decay_ratios, decay_witnesses, exceptional_ratio, DecayParams, DecayRatios,
    DecayWitnesses,
};
pub use family::{FamilyKind, TestFamily};
pub use maximal_checks::{check_fs_inequality, check_maximal_chain, ChainParams, FsParams};
pub use nondensity::{dipole, dipole_profile, nondensity_experiment, NonDensityParams};
pub use norms::{check_weak_norms, r_mean_bound, reciprocal_tail, WeakNormParams};
pub use params::{GridSpec, Smoothing};
pub use report::{ratio, Check, Relation, Tier, VerifyReport, RATIO_FLOOR};
pub use spectral::{
    check_interpolation_bound, check_lacunary_lower, check_lp_partition, check_quasi_triangle, check_reconstruction,
    check_sq_equivalence, interpolation_theta, InterpolationOperator, InterpolationParams, LacunaryParams,
    PartitionParams, QuasiTriangleParams, ReconstructionParams, SqParams,
};

use crate::error::{invalid, Result};

/// Scenario names in run order.
pub const SCENARIOS: [&str; 13] = [
    "lp_partition",
    "reconstruction",
    "maximal_chain",
    "weak_norms",
    "whitney_cz",
    "cz_quantitative",
    "sq_equivalence",
    "fs_inequality",
    "nondensity",
    "lacunary_lower",
    "decay_trend",
    "interpolation_bound",
    "quasi_triangle",
];

/// Parameters of every scenario, one section each.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub lp_partition: PartitionParams,
    pub reconstruction: ReconstructionParams,
    pub maximal_chain: ChainParams,
    pub weak_norms: WeakNormParams,
    pub whitney_cz: WhitneyCzParams,
    pub cz_quantitative: CzQuantParams,
    pub sq_equivalence: SqParams,
    pub fs_inequality: FsParams,
    pub nondensity: NonDensityParams,
    pub lacunary_lower: LacunaryParams,
    pub decay_trend: DecayParams,
    pub interpolation_bound: InterpolationParams,
    pub quasi_triangle: QuasiTriangleParams,
}

impl ScenarioParams {
    /// Replaces every seed with `seed`.
    pub fn set_seed(&mut self, seed: u64) {
        self.reconstruction.seed = seed;
        self.maximal_chain.seed = seed;
        self.weak_norms.seed = seed;
        self.whitney_cz.seed = seed;
        self.sq_equivalence.seed = seed;
        self.fs_inequality.seed = seed;
        self.lacunary_lower.seed = seed;
        self.interpolation_bound.seed = seed;
        self.quasi_triangle.seed = seed;
    }

    /// Grid of every scenario, validated.
    pub fn validate(&self) -> Result<()> {
        let grids = [
            self.lp_partition.grid,
            self.reconstruction.grid,
            self.maximal_chain.grid,
            self.weak_norms.grid,
            self.weak_norms.tail_grid,
            self.whitney_cz.grid,
            self.cz_quantitative.grid,
            self.sq_equivalence.grid,
            self.fs_inequality.grid,
            self.nondensity.grid,
            self.lacunary_lower.grid,
            self.decay_trend.grid,
            self.interpolation_bound.grid,
            self.quasi_triangle.grid,
        ];
        for g in grids {
            g.build()?;
        }
        Ok(())
    }
}

/// Runs the named scenario.
pub fn run_scenario(name: &str, params: &ScenarioParams) -> Result<VerifyReport> {
    match name {
        "lp_partition" => check_lp_partition(&params.lp_partition),
        "reconstruction" => check_reconstruction(&params.reconstruction),
        "maximal_chain" => check_maximal_chain(&params.maximal_chain),
        "weak_norms" => check_weak_norms(&params.weak_norms),
        "whitney_cz" => check_whitney_cz_tier1(&params.whitney_cz),
        "cz_quantitative" => check_cz_quantitative(&params.cz_quantitative),
        "sq_equivalence" => check_sq_equivalence(&params.sq_equivalence),
        "fs_inequality" => check_fs_inequality(&params.fs_inequality),
        "nondensity" => nondensity_experiment(&params.nondensity),
        "lacunary_lower" => check_lacunary_lower(&params.lacunary_lower),
        "decay_trend" => check_decay_trend(&params.decay_trend),
        "interpolation_bound" => check_interpolation_bound(&params.interpolation_bound),
        "quasi_triangle" => check_quasi_triangle(&params.quasi_triangle),
        other => Err(invalid(format!("unknown scenario {other}"))),
    }
}
