//! Cross-module property tests.

use proptest::prelude::*;

use conelab::chronology::{chron_rel, past_boundary_value};
use conelab::conefield::{BetaProfile, ConeField, Point, Ternary};
use conelab::gridoracle::{GridOracle, LatticeBox};
use conelab::nullflow::{
    endpoint_law, endpoint_of, integrate_null, Endpoint, Family, NumericConfig,
};

fn cfg() -> NumericConfig<f64> {
    NumericConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_monotone(u1 in -1.0f64..2.5, u2 in -1.0f64..2.5) {
        let profile = BetaProfile::<f64>::default();
        let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        prop_assert!(profile.eval(lo).unwrap() <= profile.eval(hi).unwrap());
    }

    #[test]
    fn endpoint_matches_law(t in -3.0f64..1.0) {
        let cfg = cfg();
        let g = ConeField::<f64>::strain();
        let curve = integrate_null(&g, Family::Rightward, (-1.0, t), cfg.window(), &cfg).unwrap();
        let got = match endpoint_of(&curve, &cfg).unwrap() {
            Endpoint::Attached { t, .. } => t,
            Endpoint::Infinity => f64::NAN,
        };
        let want = endpoint_law(&g, t).unwrap();
        prop_assert!((got - want).abs() <= cfg.x_stop.abs() + 1e-8);
    }

    #[test]
    fn chronology_nested_across_cones(
        tp in -2.0f64..2.0, xp in -3.0f64..-0.1,
        tq in -2.0f64..2.0, xq in -3.0f64..-0.1,
    ) {
        let cfg = cfg();
        let p = Point::new(tp, xp).unwrap();
        let q = Point::new(tq, xq).unwrap();
        let cc = ConeField::<f64>::minkowski();
        let g = ConeField::<f64>::strain();
        let ca = ConeField::<f64>::narrow();
        if chron_rel(&cc, p, q, &cfg).unwrap() == Ternary::Inside {
            prop_assert_eq!(chron_rel(&g, p, q, &cfg).unwrap(), Ternary::Inside);
        }
        if chron_rel(&g, p, q, &cfg).unwrap() == Ternary::Inside {
            prop_assert_eq!(chron_rel(&ca, p, q, &cfg).unwrap(), Ternary::Inside);
        }
    }
}

/// Hypograph chronology against lattice reachability on a point grid:
/// disagreements only within `2h` of the cone boundary.
#[test]
fn hypograph_agrees_with_oracle_on_grid() {
    let cfg = cfg();
    let g = ConeField::<f64>::strain();
    let bbox = LatticeBox {
        t_min: -3.0,
        t_max: 3.0,
        x_min: -3.0,
        x_max: -0.05,
    };
    let h = 0.05;
    let oracle = GridOracle::build(&g, bbox, h).unwrap();
    let base = Point::new(-0.4, -1.3).unwrap();
    let mut disagreements_outside_band = 0usize;
    for i in 0..41 {
        for j in 0..41 {
            let t = -3.0 + 6.0 * i as f64 / 40.0;
            let x = -3.0 + 2.9 * j as f64 / 40.0;
            let q = Point::new(t, x).unwrap();
            let continuous = chron_rel(&g, base, q, &cfg).unwrap();
            if continuous == Ternary::Boundary {
                continue;
            }
            let reachable = oracle.chron(base, q).unwrap();
            let agree = (continuous == Ternary::Inside) == reachable;
            if !agree {
                let (b, _) = past_boundary_value(&g, q, base.x(), &cfg).unwrap();
                if (base.t() - b).abs() > 2.0 * h {
                    disagreements_outside_band += 1;
                }
            }
        }
    }
    assert_eq!(disagreements_outside_band, 0);
}

/// The generic core works on the f32 lane at loose tolerances.
#[test]
fn f32_lane_smoke() {
    let cfg = NumericConfig::<f32> {
        tol: 1e-5,
        x_stop: -1e-3,
        s_min: -10.0,
        margin: 1e-5,
        max_step_frac: 0.01,
    };
    let g = ConeField::<f32>::strain();
    assert_eq!(g.profile().eval(0.3).unwrap(), 0.25f32);
    assert_eq!(g.profile().eval(1.7).unwrap(), 1.0f32);
    let c1 = integrate_null(&g, Family::Rightward, (-1.0, -1.0), cfg.window(), &cfg).unwrap();
    let c2 = integrate_null(&g, Family::Rightward, (-1.0, -0.5), cfg.window(), &cfg).unwrap();
    for k in 1..40 {
        let s = -9.5f32 + 0.22 * k as f32;
        assert!((c1.value_at(s).unwrap() - s).abs() < 1e-5);
        assert!((c2.value_at(s).unwrap() - s / 2.0).abs() < 1e-5);
    }
    let wedge =
        integrate_null(&g, Family::Rightward, (-1.0, -0.75), cfg.window(), &cfg).unwrap();
    match endpoint_of(&wedge, &cfg).unwrap() {
        Endpoint::Attached { t, .. } => assert!(t.abs() < 2e-3),
        _ => panic!("wedge curve must attach"),
    }
    let p = Point::new(0.0f32, -1.0).unwrap();
    let q = Point::new(0.6f32, -2.0).unwrap();
    assert_eq!(chron_rel(&g, p, q, &cfg).unwrap(), Ternary::Inside);
}
