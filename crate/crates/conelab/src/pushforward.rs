//! Pushforward of terminal sets along cone inclusions, with continuity,
//! injectivity and surjectivity diagnostics.
//!
//! When every future cone of the source metric is contained in the
//! corresponding cone of the target metric, any generator of a source
//! terminal set is still causal for the target, so taking its target past
//! defines a map between the future boundaries. The map need not be
//! continuous, injective or surjective; the diagnostics here measure each
//! failure mode on sampled boundary points.

use serde::Serialize;

use crate::cboundary::{
    build_atlas, classify_pair, generate_tip, BoundaryAtlas, Tip, TipLabel, TipPast, WitnessSearch,
};
use crate::chronology::{comparison_grid, past_of_curve};
use crate::conefield::{cone_compare, grid_region, ConeField, ConeOrder, MetricKind};
use crate::error::{Error, Result};
use crate::nullflow::{Endpoint, NumericConfig};
use crate::scalar::{real, Real};

fn require_nested<T: Real>(
    m1: &ConeField<T>,
    m2: &ConeField<T>,
    cfg: &NumericConfig<T>,
) -> Result<()> {
    let region = grid_region(
        (real(-3.0), real(3.0)),
        (real(-3.0), real(-0.05)),
        25,
        25,
    )?;
    match cone_compare(m1, m2, &region, cfg.margin)?.order {
        ConeOrder::Included | ConeOrder::Equal => Ok(()),
        _ => Err(Error::ConesNotNested),
    }
}

/// Push a terminal set of the source metric to the target metric by taking
/// the target past of its generator. The endpoint is recomputed under the
/// target metric.
pub fn push_tip<T: Real>(
    m1: &ConeField<T>,
    m2: &ConeField<T>,
    tip: &Tip<T>,
    cfg: &NumericConfig<T>,
) -> Result<Tip<T>> {
    require_nested(m1, m2, cfg)?;
    if tip.is_full() {
        return Ok(Tip::future_infinity());
    }
    let generator = tip
        .generator
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("terminal set carries no generator".into()))?;
    let past = past_of_curve(m2, generator, cfg)?;
    let endpoint = match generator.endpoint {
        Endpoint::Attached { .. } => Endpoint::Attached {
            t: past.right_limit(),
            slope_limit: None,
        },
        Endpoint::Infinity => Endpoint::Infinity,
    };
    Ok(Tip {
        past: TipPast::Bounded(past),
        generator: Some(generator.clone()),
        endpoint,
        label: None,
        seed: tip.seed,
    })
}

/// Closed-form seed law for pushing the unit-cone boundary into the
/// interpolating cone field: the boundary point attached at `T` maps to the
/// strain-field generator seeded at
///
/// ```text
///     t = T - 1     for T <= 0   (the unit-slope line is already null there)
///     t = T - 1/2   for T > 0    (the image is the half-slope generator)
/// ```
pub fn unit_to_strain_seed_law<T: Real>(endpoint: T) -> T {
    if endpoint <= T::zero() {
        endpoint - T::one()
    } else {
        endpoint - real(0.5)
    }
}

/// One mapped row of the boundary-map profile.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow<T: Real> {
    pub source_seed: T,
    pub source_endpoint: T,
    pub image_endpoint: T,
    /// Matched label in the target atlas, when the image agrees with a
    /// member within the matching tolerance.
    pub matched: Option<TipLabel<T>>,
}

/// A jump of the sampled map between two consecutive source samples.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityBreak<T: Real> {
    pub between_seeds: (T, T),
    pub gap: T,
    /// Matched labels of the images bracketing the jump. The one-sided
    /// limits at the break itself are computed separately with
    /// [`pushed_limit`] over subsequences approaching the break.
    pub left_sample_matched: Option<TipLabel<T>>,
    pub right_sample_matched: Option<TipLabel<T>>,
}

/// Diagnostics of a sampled boundary map.
#[derive(Debug, Clone, Serialize)]
pub struct MapDiagnostics<T: Real> {
    pub source: &'static str,
    pub target: &'static str,
    pub rows: Vec<ProfileRow<T>>,
    pub continuity_breaks: Vec<ContinuityBreak<T>>,
    /// Groups of source rows whose images coincide within tolerance.
    pub collision_groups: Vec<Vec<usize>>,
    /// Timелike-line members of the target atlas never hit by the sampled
    /// map, tagged by their labels.
    pub unreached_targets: Vec<TipLabel<T>>,
}

/// Boundary-agreement tolerance for atlas matching.
///
/// Envelope reconstruction error dominates the raw integrator tolerance, so
/// the default sits at the envelope reproduction level rather than at a
/// multiple of the step tolerance.
pub fn default_match_tol<T: Real>() -> T {
    real(2e-6)
}

fn sup_gap<T: Real>(a: &Tip<T>, b: &Tip<T>, grid: &[T]) -> Result<T> {
    let pa = a.bounded_past()?;
    let pb = b.bounded_past()?;
    let mut dev = T::zero();
    for &s in grid {
        if s < pa.window().0 || s < pb.window().0 {
            continue;
        }
        let d = (pa.boundary(s)? - pb.boundary(s)?).abs();
        if d > dev {
            dev = d;
        }
    }
    Ok(dev)
}

fn match_against_atlas<T: Real>(
    image: &Tip<T>,
    atlas: &BoundaryAtlas<T>,
    grid: &[T],
    tol: T,
) -> Result<Option<TipLabel<T>>> {
    for &idx in &atlas.ordered_indices() {
        let member = &atlas.tips[idx];
        if sup_gap(image, member, grid)? <= tol {
            return Ok(member.label);
        }
    }
    Ok(None)
}

/// Map every sampled source boundary point, match the images against the
/// target atlas, and detect jumps, collisions and unreached targets.
///
/// `source_seeds` generate the source terminal sets (rightward generators
/// seeded at `r(-1) = t`); they must be ordered increasingly.
pub fn map_profile<T: Real>(
    m1: &ConeField<T>,
    m2: &ConeField<T>,
    source_seeds: &[T],
    target_atlas: &BoundaryAtlas<T>,
    match_tol: T,
    cfg: &NumericConfig<T>,
) -> Result<MapDiagnostics<T>> {
    require_nested(m1, m2, cfg)?;
    if source_seeds.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let grid = comparison_grid(cfg);

    let mut images: Vec<Tip<T>> = Vec::with_capacity(source_seeds.len());
    let mut rows: Vec<ProfileRow<T>> = Vec::with_capacity(source_seeds.len());
    for &seed in source_seeds {
        let src = generate_tip(m1, seed, cfg)?;
        let src_ep = match src.endpoint {
            Endpoint::Attached { t, .. } => t,
            Endpoint::Infinity => return Err(Error::WindowTooShort),
        };
        let img = push_tip(m1, m2, &src, cfg)?;
        let img_ep = img.right_limit()?;
        let matched = match_against_atlas(&img, target_atlas, &grid, match_tol)?;
        rows.push(ProfileRow {
            source_seed: seed,
            source_endpoint: src_ep,
            image_endpoint: img_ep,
            matched,
        });
        images.push(img);
    }

    // Jump detection: a gap between consecutive images far above the median
    // neighbor gap is a discontinuity of the sampled map.
    let mut gaps: Vec<T> = Vec::with_capacity(images.len().saturating_sub(1));
    for w in images.windows(2) {
        gaps.push(sup_gap(&w[0], &w[1], &grid)?);
    }
    let mut sorted = gaps.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted.get(sorted.len() / 2).copied().unwrap_or_else(T::zero);
    let threshold = (median * real(8.0)).max(match_tol * real(100.0));
    let mut continuity_breaks = Vec::new();
    for (k, &gap) in gaps.iter().enumerate() {
        if gap > threshold {
            continuity_breaks.push(ContinuityBreak {
                between_seeds: (source_seeds[k], source_seeds[k + 1]),
                gap,
                left_sample_matched: rows[k].matched,
                right_sample_matched: rows[k + 1].matched,
            });
        }
    }

    // Collision groups: consecutive runs of images that coincide.
    let mut collision_groups: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = vec![0];
    for k in 1..images.len() {
        if sup_gap(&images[*current.last().unwrap()], &images[k], &grid)? <= match_tol {
            current.push(k);
        } else {
            if current.len() > 1 {
                collision_groups.push(current.clone());
            }
            current = vec![k];
        }
    }
    if current.len() > 1 {
        collision_groups.push(current);
    }

    // Unreached timelike-line targets.
    let mut unreached_targets = Vec::new();
    for g in &target_atlas.t_line {
        for &idx in &g.members {
            let member = &target_atlas.tips[idx];
            let mut hit = false;
            for img in &images {
                if sup_gap(img, member, &grid)? <= match_tol {
                    hit = true;
                    break;
                }
            }
            if !hit {
                if let Some(label) = member.label {
                    unreached_targets.push(label);
                }
            }
        }
    }

    Ok(MapDiagnostics {
        source: m1.kind().tag(),
        target: m2.kind().tag(),
        rows,
        continuity_breaks,
        collision_groups,
        unreached_targets,
    })
}

/// Push a sequence of source generators and test pointwise convergence of
/// the image boundaries to a candidate terminal set of the target metric.
///
/// Used for the one-sided limits of the sampled boundary map at a detected
/// break: feed it source seeds approaching the break from one side.
pub fn pushed_limit<T: Real>(
    m1: &ConeField<T>,
    m2: &ConeField<T>,
    source_seeds: &[T],
    candidate: &Tip<T>,
    margin: T,
    cfg: &NumericConfig<T>,
) -> Result<crate::cboundary::LimitVerdict> {
    let mut images = Vec::with_capacity(source_seeds.len());
    for &seed in source_seeds {
        images.push(push_tip(m1, m2, &generate_tip(m1, seed, cfg)?, cfg)?);
    }
    let refs: Vec<&Tip<T>> = images.iter().collect();
    crate::cboundary::chron_limit(&refs, candidate, &comparison_grid(cfg), margin)
}

/// Report of the two-step composition across the nested chain.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport<T: Real> {
    pub rows: Vec<(T, T)>,
    /// Largest deviation of the image endpoint from the source endpoint.
    pub max_endpoint_dev: T,
    /// Largest boundary deviation of the two-step image from the direct
    /// pushforward (functoriality).
    pub max_functoriality_dev: T,
    pub relations_preserved: bool,
    pub pass: bool,
}

/// Push sampled boundary points through the chain `m1 -> m2 -> m3` and check
/// that the composition is the endpoint-preserving, relation-preserving
/// correspondence, agreeing with the direct pushforward.
pub fn composition_check<T: Real>(
    m1: &ConeField<T>,
    m2: &ConeField<T>,
    m3: &ConeField<T>,
    source_seeds: &[T],
    endpoint_tol: T,
    cfg: &NumericConfig<T>,
) -> Result<CompositionReport<T>> {
    require_nested(m1, m2, cfg)?;
    require_nested(m2, m3, cfg)?;
    if source_seeds.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let grid = comparison_grid(cfg);
    let search = WitnessSearch::new(cfg);

    let mut rows = Vec::with_capacity(source_seeds.len());
    let mut sources: Vec<Tip<T>> = Vec::new();
    let mut images: Vec<Tip<T>> = Vec::new();
    let mut max_ep = T::zero();
    let mut max_fun = T::zero();
    for &seed in source_seeds {
        let src = generate_tip(m1, seed, cfg)?;
        let src_ep = match src.endpoint {
            Endpoint::Attached { t, .. } => t,
            Endpoint::Infinity => return Err(Error::WindowTooShort),
        };
        let mid = push_tip(m1, m2, &src, cfg)?;
        let out = push_tip(m2, m3, &mid, cfg)?;
        let direct = push_tip(m1, m3, &src, cfg)?;
        let out_ep = out.right_limit()?;
        max_ep = max_ep.max((out_ep - src_ep).abs());
        max_fun = max_fun.max(sup_gap(&out, &direct, &grid)?);
        rows.push((src_ep, out_ep));
        sources.push(src);
        images.push(out);
    }

    let mut relations_preserved = true;
    for i in 0..sources.len() {
        for j in (i + 1)..sources.len() {
            let a = classify_pair(m1, &sources[i], &sources[j], &search, cfg)?;
            let b = classify_pair(m3, &images[i], &images[j], &search, cfg)?;
            if a != b {
                relations_preserved = false;
            }
        }
    }

    let pass = max_ep <= endpoint_tol && relations_preserved;
    Ok(CompositionReport {
        rows,
        max_endpoint_dev: max_ep,
        max_functoriality_dev: max_fun,
        relations_preserved,
        pass,
    })
}

/// Build a target atlas for profiling the unit-cone boundary map: one
/// generator per image seed of the sampled endpoints, plus the full strain.
pub fn strain_target_atlas<T: Real>(
    endpoints: &[T],
    n_strain: usize,
    metric: &ConeField<T>,
    cfg: &NumericConfig<T>,
) -> Result<BoundaryAtlas<T>> {
    if metric.kind() != MetricKind::Strain {
        return Err(Error::InvalidConfig(
            "the strain target atlas requires the interpolating metric".into(),
        ));
    }
    let mut seeds: Vec<T> = Vec::new();
    for &t in endpoints {
        let s = unit_to_strain_seed_law(t);
        if seeds.iter().all(|&x: &T| (x - s).abs() > real(1e-12)) {
            seeds.push(s);
        }
    }
    for k in 0..n_strain {
        let f = real::<T>(k as f64 / (n_strain - 1) as f64);
        let s = -T::one() + f * real(0.5);
        if seeds.iter().all(|&x: &T| (x - s).abs() > real(1e-12)) {
            seeds.push(s);
        }
    }
    seeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    build_atlas(metric, &seeds, &[], cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conefield::Point;

    fn cfg() -> NumericConfig<f64> {
        NumericConfig::default()
    }

    #[test]
    fn nesting_contract() {
        let cfg = cfg();
        let cc = ConeField::<f64>::minkowski();
        let g = ConeField::<f64>::strain();
        let tip = generate_tip(&g, -1.0, &cfg).unwrap();
        assert!(matches!(
            push_tip(&g, &cc, &tip, &cfg),
            Err(Error::ConesNotNested)
        ));
        // Identity pushforward reproduces the set.
        let same = push_tip(&g, &g, &tip, &cfg).unwrap();
        let grid = comparison_grid(&cfg);
        assert!(sup_gap(&tip, &same, &grid).unwrap() < 1e-6);
    }

    #[test]
    fn seed_law_values() {
        assert_eq!(unit_to_strain_seed_law(0.0f64), -1.0);
        assert!((unit_to_strain_seed_law(-0.3f64) + 1.3).abs() < 1e-15);
        assert!((unit_to_strain_seed_law(0.3f64) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn unit_line_pushes_to_law_seed() {
        let cfg = cfg();
        let cc = ConeField::<f64>::minkowski();
        let g = ConeField::<f64>::strain();
        let grid = comparison_grid(&cfg);
        for t_end in [-1.5f64, -0.6, 0.0, 0.4, 1.0] {
            let src = generate_tip(&cc, t_end - 1.0, &cfg).unwrap();
            let img = push_tip(&cc, &g, &src, &cfg).unwrap();
            let want = generate_tip(&g, unit_to_strain_seed_law(t_end), &cfg).unwrap();
            let gap = sup_gap(&img, &want, &grid).unwrap();
            assert!(gap < 1e-4, "endpoint {t_end}: law gap {gap}");
        }
    }

    #[test]
    fn strain_members_collapse_into_narrow_cones() {
        let cfg = cfg();
        let g = ConeField::<f64>::strain();
        let ca = ConeField::<f64>::narrow();
        let grid = comparison_grid(&cfg);
        let img1 = push_tip(&g, &ca, &generate_tip(&g, -0.8, &cfg).unwrap(), &cfg).unwrap();
        let img2 = push_tip(&g, &ca, &generate_tip(&g, -0.6, &cfg).unwrap(), &cfg).unwrap();
        assert!(sup_gap(&img1, &img2, &grid).unwrap() <= 1e-6);
        // The common image is the half-slope line through the origin.
        let past = img1.bounded_past().unwrap();
        for &s in &grid {
            assert!((past.boundary(s).unwrap() - s / 2.0).abs() < 2e-6);
        }
    }

    #[test]
    fn functoriality_along_the_chain() {
        let cfg = cfg();
        let cc = ConeField::<f64>::minkowski();
        let g = ConeField::<f64>::strain();
        let ca = ConeField::<f64>::narrow();
        let grid = comparison_grid(&cfg);
        for seed in [-2.0f64, -1.0, -0.4, 0.2] {
            let src = generate_tip(&cc, seed, &cfg).unwrap();
            let two_step =
                push_tip(&g, &ca, &push_tip(&cc, &g, &src, &cfg).unwrap(), &cfg).unwrap();
            let direct = push_tip(&cc, &ca, &src, &cfg).unwrap();
            assert!(sup_gap(&two_step, &direct, &grid).unwrap() < 1e-5);
        }
    }

    #[test]
    fn monotone_on_nested_sources() {
        let cfg = cfg();
        let cc = ConeField::<f64>::minkowski();
        let g = ConeField::<f64>::strain();
        let grid = comparison_grid(&cfg);
        let a = push_tip(&cc, &g, &generate_tip(&cc, -2.0, &cfg).unwrap(), &cfg).unwrap();
        let b = push_tip(&cc, &g, &generate_tip(&cc, -1.2, &cfg).unwrap(), &cfg).unwrap();
        let r = crate::chronology::pastset_leq(
            a.bounded_past().unwrap(),
            b.bounded_past().unwrap(),
            &grid,
        )
        .unwrap();
        assert_eq!(r.verdict, crate::conefield::Ternary::Inside);
        assert!(r.strict);
    }

    #[test]
    fn profile_detects_break_and_collapse() {
        let cfg = cfg();
        let cc = ConeField::<f64>::minkowski();
        let g = ConeField::<f64>::strain();
        let ca = ConeField::<f64>::narrow();

        // Unit -> strain over endpoints straddling zero (zero included, so
        // the lower strain edge is in the sampled range).
        let endpoints: Vec<f64> = (0..=16).map(|k| -1.2 + 0.15 * k as f64).collect();
        let seeds: Vec<f64> = endpoints.iter().map(|&t| t - 1.0).collect();
        let target = strain_target_atlas(&endpoints, 9, &g, &cfg).unwrap();
        let diag = map_profile(&cc, &g, &seeds, &target, default_match_tol(), &cfg).unwrap();
        assert_eq!(diag.continuity_breaks.len(), 1, "{:?}", diag.continuity_breaks);
        let brk = &diag.continuity_breaks[0];
        assert!(brk.between_seeds.0 < -1.0 + 1e-9 && brk.between_seeds.1 > -1.0 - 1e-9);
        assert!(diag.collision_groups.is_empty());
        // One-sided limits across the break: the wedge-edge generators.
        let left_seeds: Vec<f64> = (2..=9).map(|k| -1.0 - 0.5f64.powi(k)).collect();
        let right_seeds: Vec<f64> = (2..=9).map(|k| 0.5f64.powi(k) - 1.0).collect();
        let lo_edge = generate_tip(&g, -1.0, &cfg).unwrap();
        let hi_edge = generate_tip(&g, -0.5, &cfg).unwrap();
        use crate::cboundary::LimitVerdict;
        assert_eq!(
            pushed_limit(&cc, &g, &left_seeds, &lo_edge, 0.01, &cfg).unwrap(),
            LimitVerdict::Converges
        );
        assert_eq!(
            pushed_limit(&cc, &g, &right_seeds, &hi_edge, 0.01, &cfg).unwrap(),
            LimitVerdict::Converges
        );
        assert_ne!(
            pushed_limit(&cc, &g, &right_seeds, &lo_edge, 0.01, &cfg).unwrap(),
            LimitVerdict::Converges
        );
        // Unreached: the whole strain except its inclusion-minimal member
        // (the upper edge is only attained as a limit, never as an image).
        assert_eq!(diag.unreached_targets.len(), 8);
        for u in &diag.unreached_targets {
            match u {
                TipLabel::StrainMember(t) => assert!(*t > -1.0 && *t <= -0.5),
                other => panic!("unexpected unreached target {other:?}"),
            }
        }

        // Strain -> narrow over the strain members: one big collision group.
        let strain_seeds: Vec<f64> = (0..9).map(|k| -1.0 + 0.5 * k as f64 / 8.0).collect();
        let target = build_atlas(&ca, &[-1.0, -0.5, 0.0], &[], &cfg).unwrap();
        let diag =
            map_profile(&g, &ca, &strain_seeds, &target, default_match_tol(), &cfg).unwrap();
        assert!(diag.continuity_breaks.is_empty());
        assert_eq!(diag.collision_groups.len(), 1);
        assert_eq!(diag.collision_groups[0].len(), 9);

        // Identity map: clean report.
        let target = build_atlas(&cc, &seeds, &[], &cfg).unwrap();
        let diag = map_profile(&cc, &cc, &seeds, &target, default_match_tol(), &cfg).unwrap();
        assert!(diag.continuity_breaks.is_empty());
        assert!(diag.collision_groups.is_empty());
        assert!(diag.unreached_targets.is_empty());
        assert!(diag.rows.iter().all(|r| r.matched.is_some()));
    }

    #[test]
    fn composition_is_endpoint_preserving() {
        let cfg = cfg();
        let cc = ConeField::<f64>::minkowski();
        let g = ConeField::<f64>::strain();
        let ca = ConeField::<f64>::narrow();
        let endpoints = [-2.0f64, -1.0, -0.5, 0.0, 0.5, 1.0];
        let seeds: Vec<f64> = endpoints.iter().map(|&t| t - 1.0).collect();
        let report = composition_check(&cc, &g, &ca, &seeds, 1e-5, &cfg).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.max_endpoint_dev <= 1e-5);
        // The image boundary is the half-slope line through (T, 0).
        let src = generate_tip(&cc, -1.0, &cfg).unwrap();
        let out = push_tip(&g, &ca, &push_tip(&cc, &g, &src, &cfg).unwrap(), &cfg).unwrap();
        let past = out.bounded_past().unwrap();
        for &s in &comparison_grid(&cfg) {
            assert!((past.boundary(s).unwrap() - s / 2.0).abs() < 1e-5);
        }
        // Degenerate single-sample run trivially passes.
        let single = composition_check(&cc, &g, &ca, &[-1.0], 1e-5, &cfg).unwrap();
        assert!(single.pass);
        // Point coverage for the grid helper used by the CLI wiring.
        let _ = Point::new(0.0, -1.0).unwrap();
    }
}
