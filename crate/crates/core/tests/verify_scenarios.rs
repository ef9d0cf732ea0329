use lpweak::bumps::{build_lp_bump, Profile, RadialKernel, TestFunction};
use lpweak::grid::embed_point_mass;
use lpweak::lp_ops::{square_function, square_function_with, ScaleRange};
use lpweak::maximal::{hl_maximal, maximal_chain, ScaleSet};
use lpweak::quasinorm::weak_lp_of;
use lpweak::verify::*;
use lpweak::{Grid, GridFunction, VectorGridFunction};

/// Wavenumbers `16..=27` on `L = 32` put every frequency where only the
/// band `j = -1` is active.
const SINGLE_BAND: FamilyKind = FamilyKind::BandLimited { k_min: 16, k_max: 27 };

fn grid() -> GridSpec {
    GridSpec::new(1, 32.0, 1024)
}

#[test]
fn single_band_square_function_ratio() {
    let params = SqParams {
        grid: grid(),
        count: 6,
        family: Some(SINGLE_BAND),
        exponents: vec![1.0],
        ..SqParams::default()
    };
    let r = check_sq_equivalence(&params).unwrap();
    let hi = r.constant_value("C_high(p=1)").unwrap();
    let lo = r.constant_value("C_low(p=1)").unwrap();
    assert!(hi <= 2.0 && lo >= 0.5, "band [{lo}, {hi}]");
    assert!(r.passed());
}

#[test]
fn single_band_is_its_own_square_function() {
    let g = grid().build().unwrap();
    let bump = build_lp_bump(1.0).unwrap();
    let family = TestFamily::new("single", SINGLE_BAND, g, 3, 4).unwrap();
    let full = ScaleRange::full_window(&g, bump);
    let psi = RadialKernel::new(bump, Profile::Psi);
    for i in 0..3 {
        let f = family.instance(i).unwrap();
        let s = square_function(&f, bump, &full).unwrap().magnitudes();
        for (a, b) in s.iter().zip(f.magnitudes()) {
            assert!((a - b).abs() < 1e-12);
        }
        // -1 is odd: the whole square function lives in residue 1
        let odd = square_function_with(&f, &psi, &full.lacunary(2, 1).unwrap()).unwrap().magnitudes();
        let even = square_function_with(&f, &psi, &full.lacunary(2, 0).unwrap()).unwrap().magnitudes();
        let cell = g.cell_volume();
        assert_eq!(weak_lp_of(&odd, cell, 1.0), weak_lp_of(&s, cell, 1.0));
        assert!(even.iter().all(|&v| v < 1e-14));
        let one = square_function_with(&f, &psi, &full.lacunary(1, 0).unwrap()).unwrap().magnitudes();
        assert_eq!(one, s);
    }
}

#[test]
fn lacunary_scenario_on_standard_family() {
    let params = LacunaryParams {
        grid: grid(),
        count: 8,
        ..LacunaryParams::default()
    };
    let r = check_lacunary_lower(&params).unwrap();
    assert!(r.passed(), "{}", r.describe());
    assert_eq!(r.rows.len(), 8);
}

#[test]
fn band_projection_is_identity_like() {
    let params = InterpolationParams {
        grid: grid(),
        count: 6,
        operator: InterpolationOperator::BandProjection { j0: -1 },
        family: Some(SINGLE_BAND),
        ..InterpolationParams::default()
    };
    let r = check_interpolation_bound(&params).unwrap();
    for key in ["A1", "A2", "c"] {
        let v = r.constant_value(key).unwrap();
        assert!(v <= 4.0 && v > 0.0, "{key} = {v}");
    }
}

#[test]
fn eta_family_operator_runs() {
    let params = InterpolationParams {
        grid: GridSpec::new(1, 16.0, 256),
        count: 3,
        operator: InterpolationOperator::EtaFamily,
        ..InterpolationParams::default()
    };
    let r = check_interpolation_bound(&params).unwrap();
    assert!(r.constant_value("c").unwrap().is_finite());
}

#[test]
fn theta_formula() {
    assert_eq!(interpolation_theta(0.8, 0.8, 2.0), 0.0);
    assert!((interpolation_theta(0.8, 2.0, 2.0) - 1.0).abs() < 1e-15);
    // 1/0.5 - 1/1 = 1 over 1/0.5 - 1/2 = 1.5
    assert!((interpolation_theta(0.5, 1.0, 2.0) - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn equal_components_reduce_to_the_scalar_ratio() {
    let g = grid().build().unwrap();
    let f = TestFamily::standard(g, 1, 3).instance(0).unwrap();
    let m = hl_maximal(&f).unwrap();
    let cell = g.cell_volume();
    let scalar = weak_lp_of(&m.magnitudes(), cell, 2.0) / weak_lp_of(&f.magnitudes(), cell, 2.0);
    let fs = VectorGridFunction::new(vec![f.clone(); 4]).unwrap();
    let ms = VectorGridFunction::new(vec![m; 4]).unwrap();
    let vector = weak_lp_of(&ms.lq_magnitude(2.0), cell, 2.0) / weak_lp_of(&fs.lq_magnitude(2.0), cell, 2.0);
    assert!((vector - scalar).abs() < 1e-12 * scalar);
}

#[test]
fn fs_scenario_small() {
    let params = FsParams {
        grid: GridSpec::new(1, 16.0, 256),
        count: 4,
        components: 3,
        ..FsParams::default()
    };
    let r = check_fs_inequality(&params).unwrap();
    assert!(r.passed(), "{}", r.describe());
    assert!(check_fs_inequality(&FsParams { p: 1.0, ..params.clone() }).is_err());
}

#[test]
fn sub_cell_aperture_changes_nothing() {
    let g = Grid::new(1, 16.0, 256).unwrap();
    let fs = VectorGridFunction::scalar(embed_point_mass(g, &[0.0], 1.0).unwrap());
    let scales = ScaleSet::new(&g, 4).unwrap();
    let c = maximal_chain(&fs, &TestFunction::gaussian(1, 1.0), 0.01, 2.0, &scales).unwrap();
    assert_eq!(c.violations, 0);
    assert_eq!(c.smooth.values(), c.nontangential.values());
}

#[test]
fn chain_scenario_small() {
    let params = ChainParams {
        grid: GridSpec::new(1, 16.0, 256),
        count: 3,
        ..ChainParams::default()
    };
    let r = check_maximal_chain(&params).unwrap();
    assert!(r.passed());
    // three apertures for three instances and the point mass
    assert_eq!(r.rows.len(), 12);
}

#[test]
fn reciprocal_tail_and_r_mean_bound() {
    let g = Grid::new(1, 64.0, 1 << 12).unwrap();
    let v = weak_lp_of(&reciprocal_tail(g).magnitudes(), g.cell_volume(), 1.0);
    // the supremum sits at the far end of the tail, x = 63
    assert!((v - 62.0 / 63.0).abs() < 1e-3, "{v}");
    assert_eq!(r_mean_bound(2.0, 1.0), 2.0);
}

#[test]
fn exceptional_sets() {
    let g = Grid::new(1, 64.0, 1 << 12).unwrap();
    let zero = GridFunction::zeros(g);
    assert_eq!(exceptional_ratio(&zero, 1.0, 8.0), 0.0);
    // 2/|x| everywhere: every point but the origin is exceptional
    let big = GridFunction::from_fn(g, |x| if x[0] == 0.0 { 0.0 } else { 2.0 / x[0].abs() });
    let r = exceptional_ratio(&big, 1.0, 8.0);
    assert!((r - 2.0).abs() < 1e-12, "{r}");
    let w = decay_witnesses(g, 1.0, 0.5).unwrap();
    let report = decay_check(&w.large_p2, 1.0, 0.5, 2.0).unwrap();
    assert!(report.check("large radii, exponent p2, decreasing").unwrap().passed);
    assert!(decay_witnesses(Grid::new(2, 8.0, 16).unwrap(), 1.0, 0.5).is_err());
    assert!(decay_ratios(&zero, 1.0, 2.0, 3.0).is_err());
}

#[test]
fn decay_scenario_at_coarse_resolution() {
    let r = check_decay_trend(&DecayParams {
        grid: GridSpec::new(1, 64.0, 1 << 12),
        ..DecayParams::default()
    })
    .unwrap();
    assert!(r.passed(), "{}", r.describe());
}

#[test]
fn dipole_profile_shape() {
    assert_eq!(dipole_profile(0.5), 0.5 / (2.25 * 0.5));
    assert!(dipole_profile(1.0).is_infinite());
    let g = Grid::new(1, 16.0, 256).unwrap();
    let d = dipole(g).unwrap();
    assert!(d.integral().norm() < 1e-12);
}

#[test]
fn quasi_triangle_on_band_limited_pairs() {
    let r = check_quasi_triangle(&QuasiTriangleParams {
        grid: GridSpec::new(1, 16.0, 256),
        count: 5,
        family: FamilyKind::BandLimited { k_min: 1, k_max: 20 },
        ..QuasiTriangleParams::default()
    })
    .unwrap();
    assert_eq!(r.rows.len(), 10);
    assert!(r.passed());
}

#[test]
fn scenarios_are_deterministic() {
    let mut params = ScenarioParams::default();
    params.sq_equivalence.count = 4;
    params.sq_equivalence.grid = GridSpec::new(1, 16.0, 256);
    let a = run_scenario("sq_equivalence", &params).unwrap().csv_string();
    let b = run_scenario("sq_equivalence", &params).unwrap().csv_string();
    assert_eq!(a, b);
    params.set_seed(99);
    let c = run_scenario("sq_equivalence", &params).unwrap().csv_string();
    assert_ne!(a, c);
}

#[test]
fn registry_and_validation() {
    let mut params = ScenarioParams::default();
    assert!(params.validate().is_ok());
    assert!(run_scenario("nope", &params).is_err());
    params.reconstruction.grid = GridSpec::new(1, 16.0, 100);
    assert!(params.validate().is_err());
    assert_eq!(SCENARIOS.len(), 13);
}

#[test]
fn whitney_cz_small_run() {
    let r = check_whitney_cz_tier1(&WhitneyCzParams {
        count: 3,
        ..WhitneyCzParams::default()
    })
    .unwrap();
    assert!(r.passed(), "{}", r.describe());
}
