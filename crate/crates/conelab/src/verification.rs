//! The acceptance suite: every headline property of the construction as a
//! pass/fail criterion with its measured value.
//!
//! The criteria run on the `f64` lane with pinned tolerances. They are used
//! both by the `acceptance` integration tests and by the command-line
//! `verify` run.

use serde::Serialize;

use crate::cboundary::{
    atlas_iso_check, build_atlas, classify_pair, ext_chron, generate_tip, quotient_strain,
    ExtChron, LimitVerdict, PairClass, Tip, TipLabel, WitnessSearch,
};
use crate::chronology::{comparison_grid, pastset_leq};
use crate::confmap::{
    alpha_max, image_of_params, in_target, map_point, null_deviation, params_of, rescaled_angle,
    target_region_of, MapParams, RegionTag,
};
use crate::conefield::{ConeField, Point, Ternary};
use crate::error::Result;
use crate::gridoracle::{crosscheck, GridOracle, LatticeBox};
use crate::nullflow::{
    endpoint_law, endpoint_of, integrate_null, Endpoint, Family, NumericConfig,
};
use crate::pushforward::{
    composition_check, default_match_tol, map_profile, push_tip, pushed_limit,
    strain_target_atlas, unit_to_strain_seed_law,
};

/// Configuration of the acceptance run.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub numeric: NumericConfig<f64>,
    pub strain_count: usize,
    pub map_samples: usize,
    pub oracle_h: f64,
    pub oracle_samples: usize,
    pub oracle_seed: u64,
    pub cloud_samples: usize,
    pub cloud_seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            numeric: NumericConfig::default(),
            strain_count: 33,
            map_samples: 41,
            oracle_h: 0.05,
            oracle_samples: 10_000,
            oracle_seed: 20260810,
            cloud_samples: 10_000,
            cloud_seed: 17,
        }
    }
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub threshold: &'static str,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} ({}): {}: {} [{}]",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.measured,
            self.threshold
        )
    }
}

fn strain_seeds(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -1.0 + 0.5 * k as f64 / (n - 1) as f64)
        .collect()
}

/// Uniform endpoint samples over `[-2, 1]` with the entry nearest zero
/// snapped onto zero, so the boundary point where the map jumps is itself
/// sampled.
fn map_sample_endpoints(n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..n)
        .map(|k| -2.0 + 3.0 * k as f64 / (n - 1) as f64)
        .collect();
    let nearest = out
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    out[nearest] = 0.0;
    out
}

fn sup_gap_f64(a: &Tip<f64>, b: &Tip<f64>, grid: &[f64]) -> Result<f64> {
    let pa = a.bounded_past()?;
    let pb = b.bounded_past()?;
    let mut dev: f64 = 0.0;
    for &s in grid {
        if s < pa.window().0 || s < pb.window().0 {
            continue;
        }
        dev = dev.max((pa.boundary(s)? - pb.boundary(s)?).abs());
    }
    Ok(dev)
}

/// 1. The two exact generators integrate to their straight lines within
///    1e-8 over the whole window.
pub fn exact_null_solutions(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let mut cfg = vc.numeric;
    cfg.tol = 1e-10;
    let g = ConeField::<f64>::strain();
    let mut worst: f64 = 0.0;
    for (seed, slope) in [(-1.0, 1.0), (-0.5, 0.5)] {
        let curve = integrate_null(&g, Family::Rightward, (-1.0, seed), cfg.window(), &cfg)?;
        for (s, r) in curve.export_samples(cfg.max_step_frac) {
            worst = worst.max((r - slope * s).abs());
        }
        for k in 0..=400 {
            let s = -10.0 * (1e-6f64 / 10.0).powf(k as f64 / 400.0);
            worst = worst.max((curve.value_at(s)? - slope * s).abs());
        }
    }
    Ok(CriterionOutcome {
        id: 1,
        name: "exact null solutions",
        pass: worst <= 1e-8,
        measured: format!("max deviation {worst:.3e}"),
        threshold: "<= 1e-8",
    })
}

/// 2. Integrated endpoints match the piecewise closed-form law within
///    1e-5.
pub fn endpoint_law_agreement(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let cfg = vc.numeric;
    let g = ConeField::<f64>::strain();
    let seeds = [-3.0, -2.0, -1.2, -1.0, -0.9, -0.75, -0.6, -0.5, -0.25, 0.0, 1.0];
    let mut worst: f64 = 0.0;
    for &t in &seeds {
        let curve = integrate_null(&g, Family::Rightward, (-1.0, t), cfg.window(), &cfg)?;
        let got = match endpoint_of(&curve, &cfg)? {
            Endpoint::Attached { t, .. } => t,
            Endpoint::Infinity => f64::NAN,
        };
        worst = worst.max((got - endpoint_law(&g, t)?).abs());
    }
    Ok(CriterionOutcome {
        id: 2,
        name: "endpoint law",
        pass: worst <= 1e-5,
        measured: format!("max law deviation {worst:.3e} over {} seeds", seeds.len()),
        threshold: "<= 1e-5",
    })
}

/// 3. A 40-seed family never crosses on the shared grid, and wedge
///    members stay strictly inside the wedge at every sample.
pub fn non_crossing_and_trapping(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let cfg = vc.numeric;
    let g = ConeField::<f64>::strain();
    let seeds: Vec<f64> = (0..40).map(|k| -3.0 + 4.0 * k as f64 / 39.0).collect();
    let curves: Vec<_> = seeds
        .iter()
        .map(|&t| integrate_null(&g, Family::Rightward, (-1.0, t), cfg.window(), &cfg))
        .collect::<Result<_>>()?;
    let grid = comparison_grid(&cfg);
    let mut ordered = true;
    let mut min_gap = f64::INFINITY;
    for w in curves.windows(2) {
        for &s in &grid {
            let gap = w[1].value_at(s)? - w[0].value_at(s)?;
            min_gap = min_gap.min(gap);
            if gap <= 0.0 {
                ordered = false;
            }
        }
    }
    let mut trapped = true;
    for (&t, curve) in seeds.iter().zip(&curves) {
        if t > -1.0 && t < -0.5 {
            for (s, r) in curve.export_samples(cfg.max_step_frac) {
                if !(r > s && r < s / 2.0) {
                    trapped = false;
                }
            }
        }
    }
    Ok(CriterionOutcome {
        id: 3,
        name: "non-crossing and trapping",
        pass: ordered && trapped,
        measured: format!("min neighbor gap {min_gap:.3e}, trapping {trapped}"),
        threshold: "strict order and strict wedge trapping",
    })
}

/// 4. The strain: pairwise-distinct terminal sets at the common endpoint,
///    strictly inclusion-ordered and horismotically related with
///    certificates both ways.
pub fn strain_existence_and_horismos(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let cfg = vc.numeric;
    let g = ConeField::<f64>::strain();
    let search = WitnessSearch::new(&cfg);
    let grid = comparison_grid(&cfg);
    let tips: Vec<Tip<f64>> = strain_seeds(vc.strain_count)
        .iter()
        .map(|&t| generate_tip(&g, t, &cfg))
        .collect::<Result<_>>()?;
    let mut endpoint_ok = true;
    for tip in &tips {
        match tip.endpoint {
            Endpoint::Attached { t, .. } => {
                if t.abs() > 2.0 * cfg.x_stop.abs() {
                    endpoint_ok = false;
                }
            }
            Endpoint::Infinity => endpoint_ok = false,
        }
    }
    let mut inclusions = true;
    let mut horismos = true;
    let mut certified = true;
    for i in 0..tips.len() {
        for j in (i + 1)..tips.len() {
            let leq = pastset_leq(tips[i].bounded_past()?, tips[j].bounded_past()?, &grid)?;
            if leq.verdict != Ternary::Inside || !leq.strict {
                inclusions = false;
            }
            match ext_chron(&g, &tips[i], &tips[j], &search, &cfg)? {
                ExtChron::False { certificate } => {
                    if certificate.endpoint_argument.is_none() && !certificate.unbounded_source {
                        certified = false;
                    }
                }
                _ => certified = false,
            }
            if !ext_chron(&g, &tips[j], &tips[i], &search, &cfg)?.is_false() {
                certified = false;
            }
            if classify_pair(&g, &tips[i], &tips[j], &search, &cfg)? != PairClass::Horismos {
                horismos = false;
            }
        }
    }
    let pass = endpoint_ok && inclusions && horismos && certified;
    Ok(CriterionOutcome {
        id: 4,
        name: "strain existence and horismos",
        pass,
        measured: format!(
            "{} members: endpoints {}, strict inclusions {}, horismos {}, certificates {}",
            vc.strain_count, endpoint_ok, inclusions, horismos, certified
        ),
        threshold: "all pairs strictly nested, horismotic, certified",
    })
}

/// 5. The timelike boundary lines of the two constant cone fields:
///    sampled pairs are timelike-related with verified witnesses.
pub fn timelike_lines(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let cfg = vc.numeric;
    let search = WitnessSearch::new(&cfg);
    let mut pairs_checked = 0usize;
    let mut all_ok = true;
    for metric in [ConeField::<f64>::minkowski(), ConeField::<f64>::narrow()] {
        let slope = metric.profile().low.sqrt();
        let shift = if metric.kind() == crate::conefield::MetricKind::Minkowski {
            1.0
        } else {
            slope
        };
        let endpoints: Vec<f64> = (0..5).map(|k| -1.6 + 0.8 * k as f64).collect();
        let tips: Vec<Tip<f64>> = endpoints
            .iter()
            .map(|&t| generate_tip(&metric, t - shift, &cfg))
            .collect::<Result<_>>()?;
        for i in 0..tips.len() {
            for j in (i + 1)..tips.len() {
                pairs_checked += 1;
                let fwd = ext_chron(&metric, &tips[i], &tips[j], &search, &cfg)?;
                if !fwd.is_true() {
                    all_ok = false;
                }
                if classify_pair(&metric, &tips[i], &tips[j], &search, &cfg)?
                    != PairClass::TimelikeForward
                {
                    all_ok = false;
                }
            }
        }
    }
    Ok(CriterionOutcome {
        id: 5,
        name: "timelike boundary lines",
        pass: all_ok && pairs_checked >= 20,
        measured: format!("{pairs_checked} ordered pairs with verified witnesses: {all_ok}"),
        threshold: "TimelikeForward with witnesses on all sampled pairs",
    })
}

/// 6. The boundary map out of the unit cone field follows the closed-form
///    seed law, jumps exactly once at the sampled zero with the wedge
///    edges as one-sided limits, and misses the strain except its minimal
///    member.
pub fn unit_map_law_and_discontinuity(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let cfg = vc.numeric;
    let cc = ConeField::<f64>::minkowski();
    let g = ConeField::<f64>::strain();
    let grid = comparison_grid(&cfg);
    let endpoints = map_sample_endpoints(vc.map_samples);
    let seeds: Vec<f64> = endpoints.iter().map(|&t| t - 1.0).collect();
    let target = strain_target_atlas(&endpoints, vc.strain_count, &g, &cfg)?;

    let mut law_dev: f64 = 0.0;
    for &t_end in &endpoints {
        let src = generate_tip(&cc, t_end - 1.0, &cfg)?;
        let img = push_tip(&cc, &g, &src, &cfg)?;
        let law = generate_tip(&g, unit_to_strain_seed_law(t_end), &cfg)?;
        law_dev = law_dev.max(sup_gap_f64(&img, &law, &grid)?);
    }

    let diag = map_profile(&cc, &g, &seeds, &target, default_match_tol::<f64>(), &cfg)?;
    let one_break = diag.continuity_breaks.len() == 1
        && diag.continuity_breaks[0].between_seeds.0 < -1.0 + 1e-9
        && diag.continuity_breaks[0].between_seeds.1 > -1.0 - 1e-9;

    let left_seeds: Vec<f64> = (2..=9).map(|k| -1.0 - 0.5f64.powi(k)).collect();
    let right_seeds: Vec<f64> = (2..=9).map(|k| 0.5f64.powi(k) - 1.0).collect();
    let lo_edge = generate_tip(&g, -1.0, &cfg)?;
    let hi_edge = generate_tip(&g, -0.5, &cfg)?;
    let limits_ok = pushed_limit(&cc, &g, &left_seeds, &lo_edge, 0.01, &cfg)?
        == LimitVerdict::Converges
        && pushed_limit(&cc, &g, &right_seeds, &hi_edge, 0.01, &cfg)? == LimitVerdict::Converges;

    // Unreached: the whole strain except the inclusion-minimal member.
    let unreached_ok = diag.unreached_targets.len() == vc.strain_count - 1
        && diag.unreached_targets.iter().all(|l| match l {
            TipLabel::StrainMember(t) => *t > -1.0 && *t <= -0.5,
            _ => false,
        });

    let pass = law_dev <= 1e-4 && one_break && limits_ok && unreached_ok;
    Ok(CriterionOutcome {
        id: 6,
        name: "unit-cone map law and discontinuity",
        pass,
        measured: format!(
            "law deviation {law_dev:.3e}; breaks {}; edge limits {limits_ok}; unreached {}",
            diag.continuity_breaks.len(),
            diag.unreached_targets.len()
        ),
        threshold: "law <= 1e-4, one break at 0 with wedge-edge limits",
    })
}

/// 7. Every strain member collapses to one wide-cone terminal set, and
///    the whole composition across the chain is the identity on endpoints
///    with all relations preserved.
pub fn collapse_and_composition(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let cfg = vc.numeric;
    let cc = ConeField::<f64>::minkowski();
    let g = ConeField::<f64>::strain();
    let ca = ConeField::<f64>::narrow();
    let grid = comparison_grid(&cfg);

    let images: Vec<Tip<f64>> = strain_seeds(vc.strain_count)
        .iter()
        .map(|&t| push_tip(&g, &ca, &generate_tip(&g, t, &cfg)?, &cfg))
        .collect::<Result<_>>()?;
    let mut pairwise: f64 = 0.0;
    for i in 0..images.len() {
        for j in (i + 1)..images.len() {
            pairwise = pairwise.max(sup_gap_f64(&images[i], &images[j], &grid)?);
        }
    }

    let endpoints = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0];
    let seeds: Vec<f64> = endpoints.iter().map(|&t| t - 1.0).collect();
    let comp = composition_check(&cc, &g, &ca, &seeds, 1e-5, &cfg)?;

    let pass = pairwise <= 1e-6 && comp.pass;
    Ok(CriterionOutcome {
        id: 7,
        name: "strain collapse and composition",
        pass,
        measured: format!(
            "pairwise image gap {pairwise:.3e}; endpoint dev {:.3e}; relations {}",
            comp.max_endpoint_dev, comp.relations_preserved
        ),
        threshold: "collapse <= 1e-6, composition endpoint-preserving",
    })
}

/// 8. The quotient of the strained boundary embeds onto the unit-cone
///    boundary, while the unquotiented one does not.
pub fn quotient_embedding(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let cfg = vc.numeric;
    let cc = ConeField::<f64>::minkowski();
    let g = ConeField::<f64>::strain();
    let search = WitnessSearch::new(&cfg);
    let endpoints = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5];
    let cc_seeds: Vec<f64> = endpoints.iter().map(|&t| t - 1.0).collect();
    let mut g_seeds: Vec<f64> = endpoints
        .iter()
        .filter(|&&t| t != 0.0)
        .map(|&t| if t < 0.0 { t - 1.0 } else { t - 0.5 })
        .collect();
    g_seeds.extend(strain_seeds(vc.strain_count));
    g_seeds.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let a_cc = build_atlas(&cc, &cc_seeds, &[], &cfg)?;
    let a_g = build_atlas(&g, &g_seeds, &[], &cfg)?;
    let pairing: Vec<(f64, f64)> = endpoints.iter().map(|&t| (t, t)).collect();

    let direct = atlas_iso_check(&g, &a_g, &cc, &a_cc, &pairing, &search, &cfg)?;
    let quotiented = atlas_iso_check(&g, &quotient_strain(&a_g), &cc, &a_cc, &pairing, &search, &cfg)?;
    let pass = !direct.pass && quotiented.pass;
    Ok(CriterionOutcome {
        id: 8,
        name: "quotient embedding",
        pass,
        measured: format!(
            "direct pairing fails: {}; quotient passes: {} ({} pairs)",
            !direct.pass, quotiented.pass, quotiented.pairs_checked
        ),
        threshold: "fail without quotient, pass with quotient",
    })
}

/// 9. Lattice-oracle cross-validation of the chronology for all three
///    cone fields: no disagreement outside the cone-boundary band.
pub fn oracle_cross_validation(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    let cfg = vc.numeric;
    let bbox = LatticeBox {
        t_min: -3.0,
        t_max: 3.0,
        x_min: -3.0,
        x_max: -0.05,
    };
    let mut violations = 0usize;
    let mut compared = 0usize;
    let mut worst: f64 = 0.0;
    for metric in [
        ConeField::<f64>::minkowski(),
        ConeField::<f64>::strain(),
        ConeField::<f64>::narrow(),
    ] {
        let oracle = GridOracle::build(&metric, bbox, vc.oracle_h)?;
        let report = crosscheck(&metric, &oracle, vc.oracle_samples, vc.oracle_seed, &cfg)?;
        violations += report.violations.len();
        compared += report.compared;
        worst = worst.max(report.max_in_band_distance);
        for v in &report.violations {
            worst = worst.max(v.band_distance);
        }
    }
    Ok(CriterionOutcome {
        id: 9,
        name: "oracle cross-validation",
        pass: violations == 0,
        measured: format!(
            "{compared} compared pairs, {violations} violations, worst distance {worst:.4}"
        ),
        threshold: "zero disagreements outside the 2h band",
    })
}

/// 10. The chart: interfaces glue, images land in the target region and
///     the right sector, rightward images off the wedge are exactly null;
///     leftward deviation is reported without a verdict.
pub fn chart_verification(vc: &VerifyConfig) -> Result<CriterionOutcome> {
    use rand::{Rng, SeedableRng};
    let cfg = vc.numeric;
    let g = ConeField::<f64>::strain();
    let a = alpha_max::<f64>();

    // Parameter-matched interface gluing.
    let mut glue: f64 = 0.0;
    for k in 1..=12 {
        let r = 0.4 * k as f64;
        let w0 = image_of_params(&MapParams::Wedge { alpha: 0.0, radius: r });
        let b0 = image_of_params(&MapParams::Above { t_end: 0.0, radius: r });
        glue = glue.max((w0.t - b0.t).hypot(w0.x - b0.x));
        let wa = image_of_params(&MapParams::Wedge { alpha: a, radius: r });
        let c0 = image_of_params(&MapParams::Below { t_end: 0.0, radius: r });
        glue = glue.max((wa.t - c0.t).hypot(wa.x - c0.x));
    }
    // Pointwise continuity across the half-slope generator.
    for xk in [-0.2, -0.8, -1.7, -3.0, -4.5] {
        let p = Point::new(xk / 2.0, xk)?;
        let q = map_point(&g, p, rescaled_angle, &cfg)?;
        let direct = image_of_params(&MapParams::Above {
            t_end: 0.0,
            radius: p.t().hypot(p.x()),
        });
        glue = glue.max((q.t - direct.t).hypot(q.x - direct.x));
    }

    // Containment and sector assignment on a random cloud.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(vc.cloud_seed);
    let mut contained = true;
    for _ in 0..vc.cloud_samples {
        let p = Point::new(rng.gen_range(-4.0..2.0), rng.gen_range(-5.0..-0.02))?;
        let params = params_of(&g, p, rescaled_angle, &cfg)?;
        let q = image_of_params(&params);
        let sector = match params {
            MapParams::Above { .. } => RegionTag::Above,
            MapParams::Wedge { .. } => RegionTag::Wedge,
            MapParams::Below { .. } => RegionTag::Below,
        };
        if !in_target(q) || target_region_of(q) != sector {
            contained = false;
        }
    }

    // Exactly null rightward images off the wedge.
    let mut slope_dev: f64 = 0.0;
    for seed in [0.4, 0.0, -0.3] {
        let curve = integrate_null(&g, Family::Rightward, (-1.0, seed), cfg.window(), &cfg)?;
        slope_dev =
            slope_dev.max(null_deviation(&g, &curve, rescaled_angle, &cfg)?.max_slope_deviation);
    }
    for seed in [-1.0, -1.8, -2.6] {
        let curve = integrate_null(&g, Family::Rightward, (-1.0, seed), cfg.window(), &cfg)?;
        slope_dev =
            slope_dev.max(null_deviation(&g, &curve, rescaled_angle, &cfg)?.max_slope_deviation);
    }

    // Leftward deviation: measured, reported, not asserted.
    let y = integrate_null(&g, Family::Leftward, (-1.0, 0.0), cfg.window(), &cfg)?;
    let y_dev = null_deviation(&g, &y, rescaled_angle, &cfg)?.max_slope_deviation;

    let pass = glue <= 1e-6 && contained && slope_dev <= 1e-9;
    Ok(CriterionOutcome {
        id: 10,
        name: "chart interfaces, containment and null images",
        pass,
        measured: format!(
            "glue {glue:.3e}; containment {contained}; slope dev {slope_dev:.3e}; leftward dev {y_dev:.3e} (informational)"
        ),
        threshold: "glue <= 1e-6, containment, slope <= 1e-9",
    })
}

/// Run the full acceptance suite in order.
pub fn run_all(vc: &VerifyConfig) -> Result<Vec<CriterionOutcome>> {
    Ok(vec![
        exact_null_solutions(vc)?,
        endpoint_law_agreement(vc)?,
        non_crossing_and_trapping(vc)?,
        strain_existence_and_horismos(vc)?,
        timelike_lines(vc)?,
        unit_map_law_and_discontinuity(vc)?,
        collapse_and_composition(vc)?,
        quotient_embedding(vc)?,
        oracle_cross_validation(vc)?,
        chart_verification(vc)?,
    ])
}
