//! Piecewise chart from the interpolating spacetime onto a region of the
//! flat plane.
//!
//! The half-plane splits into the wedge between the two exact generators
//! through the origin, the region above it and the region below it. Each
//! piece is coordinatized by parameters read off the null characteristics
//! (arrival point or arrival angle of the rightward curve, plus a Euclidean
//! radius) and mapped onto the matching sector of the target region
//!
//! ```text
//!     V' = plane minus ({x >= a} united with {t + x >= 0, 0 <= x <= a}),
//!     a = pi/2 - arctan(1/2).
//! ```
//!
//! Rightward null curves above and below the wedge land on unit-slope lines
//! exactly by construction. The wedge sector uses an arrival-angle
//! parametrization that is pluggable: the literal Euclidean angle between
//! arrival velocities spans only about 0.32 radians (and degenerates on the
//! wedge interior, where all arrival slopes collapse onto one attractor), so
//! the default rescales it affinely to fill the sector width `a` with exact
//! values at the wedge edges.

use serde::Serialize;

use crate::conefield::{ConeField, Point};
use crate::error::{Error, Result};
use crate::nullflow::{
    endpoint_of, integrate_null, Endpoint, Family, NullCurve, NumericConfig,
};
use crate::scalar::{real, to_f64, Real};

/// Half the angular width of the excluded corner: `pi/2 - arctan(1/2)`.
pub fn alpha_max<T: Real>() -> T {
    let half = real::<T>(0.5);
    real::<T>(std::f64::consts::FRAC_PI_2) - half.atan()
}

/// Region of the source half-plane; the wedge owns its boundary rays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    /// Between the two exact generators through the origin.
    Wedge,
    /// Above the half-slope generator.
    Above,
    /// Below the unit-slope generator.
    Below,
}

impl RegionTag {
    pub fn code(&self) -> &'static str {
        match self {
            RegionTag::Wedge => "A",
            RegionTag::Above => "B",
            RegionTag::Below => "C",
        }
    }
}

/// Classify a point of the half-plane; boundaries go to the wedge.
pub fn region_of<T: Real>(p: Point<T>) -> RegionTag {
    let half = real::<T>(0.5);
    if p.t() > p.x() * half {
        RegionTag::Above
    } else if p.t() < p.x() {
        RegionTag::Below
    } else {
        RegionTag::Wedge
    }
}

/// Region classification with a rounding-tolerant band around the wedge
/// edges, so curve samples carrying a few ulps of noise are charted through
/// one consistent formula family.
fn region_for_chart<T: Real>(p: Point<T>) -> RegionTag {
    let half = real::<T>(0.5);
    let snap = real::<T>(1e-12) * (T::one() + p.x().abs());
    if (p.t() - p.x() * half).abs() <= snap || (p.t() - p.x()).abs() <= snap {
        RegionTag::Wedge
    } else {
        region_of(p)
    }
}

/// Chart parameters of a point, per region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MapParams<T: Real> {
    /// Arrival angle within `[0, alpha_max]` and the Euclidean distance of
    /// the leftward characteristic's crossing of the half-slope generator
    /// from the origin.
    Wedge { alpha: T, radius: T },
    /// Arrival time of the rightward characteristic and the Euclidean
    /// distance from the point to the arrival `(t_end, 0)`.
    Above { t_end: T, radius: T },
    Below { t_end: T, radius: T },
}

/// Arrival-angle parametrization for the wedge sector.
pub type AngleMap<T> = fn(T) -> T;

/// Default angle map: the Euclidean angle between the arrival velocities
/// `(m, 1)` and `(1/2, 1)`, rescaled affinely so that the wedge edges land
/// exactly on the sector interfaces (`1/2 -> 0`, `1 -> alpha_max`).
pub fn rescaled_angle<T: Real>(m: T) -> T {
    let two = real::<T>(2.0);
    let quarter_pi = real::<T>(std::f64::consts::FRAC_PI_4);
    let lit = two.atan() - m.recip().atan();
    let span = two.atan() - quarter_pi;
    let a = alpha_max::<T>();
    (a * lit / span).max(T::zero()).min(a)
}

/// A point of the flat target plane (no sign restriction).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetPoint<T: Real> {
    pub t: T,
    pub x: T,
}

/// Membership in the target region: the closed sets `{x >= a}` and
/// `{t + x >= 0, 0 <= x <= a}` are excluded.
pub fn in_target<T: Real>(q: TargetPoint<T>) -> bool {
    let a = alpha_max::<T>();
    if q.x >= a {
        return false;
    }
    !(q.t + q.x >= T::zero() && q.x >= T::zero() && q.x <= a)
}

/// Sector of the target region by the null coordinate `t - x`.
pub fn target_region_of<T: Real>(q: TargetPoint<T>) -> RegionTag {
    let a = alpha_max::<T>();
    let u = q.t - q.x;
    if u >= T::zero() {
        RegionTag::Above
    } else if u <= -real::<T>(2.0) * a {
        RegionTag::Below
    } else {
        RegionTag::Wedge
    }
}

fn rightward_through<T: Real>(
    metric: &ConeField<T>,
    p: Point<T>,
    cfg: &NumericConfig<T>,
) -> Result<NullCurve<T>> {
    let lo = cfg.s_min.min(p.x() * real(1.5));
    integrate_null(metric, Family::Rightward, (p.x(), p.t()), (lo, cfg.x_stop), cfg)
}

fn arrival_of<T: Real>(
    metric: &ConeField<T>,
    p: Point<T>,
    cfg: &NumericConfig<T>,
) -> Result<(T, Option<T>)> {
    let curve = rightward_through(metric, p, cfg)?;
    match endpoint_of(&curve, cfg)? {
        Endpoint::Attached { t, slope_limit } => Ok((t, slope_limit)),
        Endpoint::Infinity => Err(Error::IntersectionSearch(
            "rightward characteristics always reach the boundary",
        )),
    }
}

/// Crossing of the leftward characteristic through `p` with the half-slope
/// generator, as the abscissa `s*` with `sigma(s*) = s*/2`.
fn crossing_with_upper_edge<T: Real>(
    metric: &ConeField<T>,
    p: Point<T>,
    cfg: &NumericConfig<T>,
) -> Result<T> {
    let half = real::<T>(0.5);
    let gap = |s: T, v: T| v - s * half;
    if gap(p.x(), p.t()) == T::zero() {
        return Ok(p.x());
    }
    // Expand the window leftward until the (monotone) gap changes sign.
    let mut lo = p.x() * real(1.5) - real(0.5);
    let curve = loop {
        let c = integrate_null(
            metric,
            Family::Leftward,
            (p.x(), p.t()),
            (lo, cfg.x_stop),
            cfg,
        )?;
        if gap(lo, c.value_at(lo)?) >= T::zero() {
            break c;
        }
        lo = lo * real(2.0);
        if lo < real(-1e9) {
            return Err(Error::IntersectionSearch(
                "leftward characteristic failed to cross the half-slope generator",
            ));
        }
    };
    let mut a = lo;
    let mut b = p.x();
    for _ in 0..200 {
        let mid = (a + b) * half;
        if gap(mid, curve.value_at(mid)?) >= T::zero() {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a).abs() <= real::<T>(1e-15) * (T::one() + a.abs()) {
            break;
        }
    }
    Ok((a + b) * half)
}

/// Chart parameters of a point.
pub fn params_of<T: Real>(
    metric: &ConeField<T>,
    p: Point<T>,
    angle: AngleMap<T>,
    cfg: &NumericConfig<T>,
) -> Result<MapParams<T>> {
    match region_for_chart(p) {
        RegionTag::Above => {
            let (t_end, _) = arrival_of(metric, p, cfg)?;
            let radius = (p.t() - t_end).hypot(p.x());
            Ok(MapParams::Above { t_end, radius })
        }
        RegionTag::Below => {
            let (t_end, _) = arrival_of(metric, p, cfg)?;
            let radius = (p.t() - t_end).hypot(p.x());
            Ok(MapParams::Below { t_end, radius })
        }
        RegionTag::Wedge => {
            let (_, slope) = arrival_of(metric, p, cfg)?;
            let m = slope.ok_or(Error::IntersectionSearch(
                "wedge characteristics must arrive at the origin",
            ))?;
            let alpha = angle(m);
            let s_star = crossing_with_upper_edge(metric, p, cfg)?;
            let radius = (s_star * real::<T>(0.5)).hypot(s_star);
            Ok(MapParams::Wedge { alpha, radius })
        }
    }
}

/// Map a point into the target region.
///
/// Each sector lays its parameters along unit-slope lines: `t - x = t_end`
/// above, `t - x = -2 alpha` in the wedge sector, `t - x = t_end - 2a`
/// below; the radius runs backward along the line from the anchor at
/// `(t_end, 0)`, `(-alpha, alpha)` or `(t_end - a, a)` respectively.
pub fn map_point<T: Real>(
    metric: &ConeField<T>,
    p: Point<T>,
    angle: AngleMap<T>,
    cfg: &NumericConfig<T>,
) -> Result<TargetPoint<T>> {
    let params = params_of(metric, p, angle, cfg)?;
    Ok(image_of_params(&params))
}

/// The target point determined by chart parameters.
pub fn image_of_params<T: Real>(params: &MapParams<T>) -> TargetPoint<T> {
    let inv_sqrt2 = real::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let a = alpha_max::<T>();
    match *params {
        MapParams::Above { t_end, radius } => TargetPoint {
            t: t_end - radius * inv_sqrt2,
            x: -radius * inv_sqrt2,
        },
        MapParams::Wedge { alpha, radius } => TargetPoint {
            t: -alpha - radius * inv_sqrt2,
            x: alpha - radius * inv_sqrt2,
        },
        MapParams::Below { t_end, radius } => TargetPoint {
            t: t_end - a - radius * inv_sqrt2,
            x: a - radius * inv_sqrt2,
        },
    }
}

/// Expected target sector of source parameters.
pub fn expected_sector<T: Real>(params: &MapParams<T>) -> RegionTag {
    match params {
        MapParams::Above { .. } => RegionTag::Above,
        MapParams::Wedge { .. } => RegionTag::Wedge,
        MapParams::Below { .. } => RegionTag::Below,
    }
}

/// Per-curve image-slope measurement.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport<T: Real> {
    /// Largest deviation of `|dt/dx|` from 1 over the image polyline.
    pub max_slope_deviation: T,
    pub segments: usize,
    /// Image segments with a vanishing horizontal step, excluded from the
    /// slope measurement.
    pub degenerate_segments: usize,
    pub worst_at_s: T,
}

/// Map a curve's samples and measure how far the image polyline is from
/// unit slope. Rightward curves above and below the wedge must come out
/// exactly null; wedge and leftward images are measured, not asserted.
pub fn null_deviation<T: Real>(
    metric: &ConeField<T>,
    curve: &NullCurve<T>,
    angle: AngleMap<T>,
    cfg: &NumericConfig<T>,
) -> Result<DeviationReport<T>> {
    let points = curve.sample_points(120);
    if points.len() < 2 {
        return Err(Error::EmptyRegion);
    }
    let mut images = Vec::with_capacity(points.len());
    for &p in &points {
        images.push((map_point(metric, p, angle, cfg)?, p.x()));
    }
    let mut max_dev = T::zero();
    let mut worst_at = points[0].x();
    let mut degenerate = 0usize;
    let mut segments = 0usize;
    // Image coordinates carry absolute rounding near 1e-15 (anchor
    // arithmetic and the radius root-finder), so a segment must span a few
    // 1e-6 for its slope to be meaningful at the 1e-9 level; shorter ones
    // are flagged instead of measured.
    let tiny = real::<T>(3e-6);
    for w in images.windows(2) {
        let dt = w[1].0.t - w[0].0.t;
        let dx = w[1].0.x - w[0].0.x;
        segments += 1;
        if dx.abs() <= tiny {
            degenerate += 1;
            continue;
        }
        let dev = ((dt / dx).abs() - T::one()).abs();
        if dev > max_dev {
            max_dev = dev;
            worst_at = w[0].1;
        }
    }
    Ok(DeviationReport {
        max_slope_deviation: max_dev,
        segments,
        degenerate_segments: degenerate,
        worst_at_s: worst_at,
    })
}

/// CSV row stream `t,x,region,t_image,x_image` for a mapped point cloud.
pub fn cloud_csv<T: Real>(
    metric: &ConeField<T>,
    cloud: &[Point<T>],
    angle: AngleMap<T>,
    cfg: &NumericConfig<T>,
) -> Result<String> {
    let mut out = String::from("t,x,region,t_image,x_image\n");
    for &p in cloud {
        let region = region_of(p);
        let q = map_point(metric, p, angle, cfg)?;
        out.push_str(&format!(
            "{:.16e},{:.16e},{},{:.16e},{:.16e}\n",
            to_f64(p.t()),
            to_f64(p.x()),
            region.code(),
            to_f64(q.t),
            to_f64(q.x)
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NumericConfig<f64> {
        NumericConfig::default()
    }

    fn pt(t: f64, x: f64) -> Point<f64> {
        Point::new(t, x).unwrap()
    }

    fn g() -> ConeField<f64> {
        ConeField::strain()
    }

    const A: f64 = std::f64::consts::FRAC_PI_2 - 0.46364760900080615; // atan(1/2)

    #[test]
    fn corner_angle_value() {
        assert!((alpha_max::<f64>() - A).abs() < 1e-15);
        assert!((alpha_max::<f64>() - 1.1071487177940904).abs() < 1e-12);
    }

    #[test]
    fn region_examples() {
        assert_eq!(region_of(pt(-1.0, -1.0)), RegionTag::Wedge);
        assert_eq!(region_of(pt(0.0, -1.0)), RegionTag::Above);
        assert_eq!(region_of(pt(-2.0, -1.0)), RegionTag::Below);
        assert_eq!(region_of(pt(-0.5, -1.0)), RegionTag::Wedge);
        assert_eq!(region_of(pt(-0.7, -1.0)), RegionTag::Wedge);
    }

    #[test]
    fn angle_map_anchors() {
        assert!(rescaled_angle(0.5f64).abs() < 1e-15);
        assert!((rescaled_angle(1.0f64) - alpha_max::<f64>()).abs() < 1e-15);
        let mut prev = -1.0;
        for k in 0..=20 {
            let m = 0.5 + 0.5 * k as f64 / 20.0;
            let a = rescaled_angle(m);
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn params_examples() {
        let cfg = cfg();
        match params_of(&g(), pt(0.0, -1.0), rescaled_angle, &cfg).unwrap() {
            MapParams::Above { t_end, radius } => {
                assert!((t_end - 0.5).abs() < 2e-6);
                assert!((radius - 5.0f64.sqrt() / 2.0).abs() < 2e-6);
            }
            other => panic!("expected the upper sector, got {other:?}"),
        }
        match params_of(&g(), pt(-3.0, -1.0), rescaled_angle, &cfg).unwrap() {
            MapParams::Below { t_end, radius } => {
                assert!((t_end + 2.0).abs() < 2e-6);
                assert!((radius - 2.0f64.sqrt()).abs() < 2e-6);
            }
            other => panic!("expected the lower sector, got {other:?}"),
        }
        match params_of(&g(), pt(-0.5, -1.0), rescaled_angle, &cfg).unwrap() {
            MapParams::Wedge { alpha, radius } => {
                assert!(alpha.abs() < 1e-9);
                assert!((radius - 1.25f64.sqrt()).abs() < 1e-9);
            }
            other => panic!("expected the wedge, got {other:?}"),
        }
    }

    #[test]
    fn image_examples() {
        let cfg = cfg();
        let q = map_point(&g(), pt(0.0, -1.0), rescaled_angle, &cfg).unwrap();
        let want = (0.5 - 10.0f64.sqrt() / 4.0, -10.0f64.sqrt() / 4.0);
        assert!((q.t - want.0).abs() < 2e-6 && (q.x - want.1).abs() < 2e-6);
        assert_eq!(target_region_of(q), RegionTag::Above);

        let q = map_point(&g(), pt(-3.0, -1.0), rescaled_angle, &cfg).unwrap();
        let a = alpha_max::<f64>();
        assert!((q.t - (-2.0 - a - 1.0)).abs() < 3e-6);
        assert!((q.x - (a - 1.0)).abs() < 3e-6);
        assert!(((q.t - q.x) - (-2.0 - 2.0 * a)).abs() < 3e-6);
        assert_eq!(target_region_of(q), RegionTag::Below);

        // On the half-slope generator the wedge formula agrees with the
        // upper-sector formula at the same point.
        let p = pt(-0.5, -1.0);
        let q = map_point(&g(), p, rescaled_angle, &cfg).unwrap();
        let r = 1.25f64.sqrt() / 2.0f64.sqrt();
        assert!((q.t + r).abs() < 1e-9 && (q.x + r).abs() < 1e-9);
        let above = image_of_params(&MapParams::Above {
            t_end: 0.0,
            radius: 1.25f64.sqrt(),
        });
        assert!((q.t - above.t).abs() < 2e-6 && (q.x - above.x).abs() < 2e-6);
    }

    #[test]
    fn target_membership_examples() {
        let a = alpha_max::<f64>();
        assert!(!in_target(TargetPoint { t: 0.5, x: 0.2 }));
        assert!(in_target(TargetPoint { t: -1.0, x: -1.0 }));
        assert!(!in_target(TargetPoint { t: 0.0, x: a + 0.1 }));
        assert!(!in_target(TargetPoint { t: 5.0, x: a }));
        assert!(in_target(TargetPoint { t: -5.0, x: a - 0.01 }));
        assert!(in_target(TargetPoint { t: 0.5, x: -0.6 }));
    }

    #[test]
    fn parameter_matched_interface_gluing() {
        // The wedge sector at its extreme angles coincides with the
        // neighboring sector formulas at matched radius.
        for k in 1..=10 {
            let r = 0.3 * k as f64;
            let via_wedge = image_of_params(&MapParams::Wedge {
                alpha: 0.0,
                radius: r,
            });
            let via_above = image_of_params(&MapParams::Above {
                t_end: 0.0,
                radius: r,
            });
            assert!((via_wedge.t - via_above.t).abs() < 1e-12);
            assert!((via_wedge.x - via_above.x).abs() < 1e-12);
            let via_wedge = image_of_params(&MapParams::Wedge {
                alpha: alpha_max(),
                radius: r,
            });
            let via_below = image_of_params(&MapParams::Below {
                t_end: 0.0,
                radius: r,
            });
            assert!((via_wedge.t - via_below.t).abs() < 1e-12);
            assert!((via_wedge.x - via_below.x).abs() < 1e-12);
        }
    }

    #[test]
    fn pointwise_continuity_on_upper_edge() {
        // Points on the half-slope generator are charted through the wedge
        // formulas; the upper-sector formula gives the same image.
        let cfg = cfg();
        for xk in [-0.25, -1.0, -2.5, -4.0] {
            let p = pt(xk / 2.0, xk);
            let q = map_point(&g(), p, rescaled_angle, &cfg).unwrap();
            let radius = (p.t()).hypot(p.x());
            let direct = image_of_params(&MapParams::Above {
                t_end: 0.0,
                radius,
            });
            assert!(
                (q.t - direct.t).abs() < 1e-6 && (q.x - direct.x).abs() < 1e-6,
                "x={xk}"
            );
        }
    }

    #[test]
    fn image_containment_random_cloud() {
        use rand::{Rng, SeedableRng};
        let cfg = cfg();
        let metric = g();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let p = pt(rng.gen_range(-4.0..2.0), rng.gen_range(-5.0..-0.02));
            let params = params_of(&metric, p, rescaled_angle, &cfg).unwrap();
            let q = image_of_params(&params);
            assert!(in_target(q), "{p:?} mapped outside the target: {q:?}");
            assert_eq!(
                target_region_of(q),
                expected_sector(&params),
                "{p:?} landed in the wrong sector"
            );
        }
    }

    #[test]
    fn injectivity_on_sampled_cloud() {
        use rand::{Rng, SeedableRng};
        let cfg = cfg();
        let metric = g();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
        for _ in 0..2000 {
            let p = pt(rng.gen_range(-4.0..2.0), rng.gen_range(-5.0..-0.05));
            let q = map_point(&metric, p, rescaled_angle, &cfg).unwrap();
            rows.push((p.t(), p.x(), q.t, q.x));
        }
        // Sort by image coordinate and compare neighbors within a window.
        rows.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
        for i in 0..rows.len() {
            for j in (i + 1)..rows.len() {
                if rows[j].2 - rows[i].2 > 1e-6 {
                    break;
                }
                let img_d = (rows[i].2 - rows[j].2).hypot(rows[i].3 - rows[j].3);
                let src_d = (rows[i].0 - rows[j].0).hypot(rows[i].1 - rows[j].1);
                if src_d > 1e-3 {
                    assert!(
                        img_d > 1e-9,
                        "distinct points collided: {:?} {:?}",
                        rows[i],
                        rows[j]
                    );
                }
            }
        }
    }

    #[test]
    fn null_image_slopes() {
        let cfg = cfg();
        let metric = g();
        // An upper-region rightward curve maps onto a unit-slope line.
        let b_curve =
            integrate_null(&metric, Family::Rightward, (-1.0, 0.0), cfg.window(), &cfg).unwrap();
        let report = null_deviation(&metric, &b_curve, rescaled_angle, &cfg).unwrap();
        assert!(report.max_slope_deviation <= 1e-9, "{report:?}");
        // The unit-slope generator itself maps onto the lower interface.
        let edge =
            integrate_null(&metric, Family::Rightward, (-1.0, -1.0), cfg.window(), &cfg).unwrap();
        let report = null_deviation(&metric, &edge, rescaled_angle, &cfg).unwrap();
        assert!(report.max_slope_deviation <= 1e-9, "{report:?}");
        let q = map_point(&metric, pt(-2.0, -2.0), rescaled_angle, &cfg).unwrap();
        assert!(((q.t - q.x) + 2.0 * alpha_max::<f64>()).abs() < 1e-9);
        // A lower-region curve is also exact.
        let c_curve =
            integrate_null(&metric, Family::Rightward, (-1.0, -2.2), cfg.window(), &cfg).unwrap();
        let report = null_deviation(&metric, &c_curve, rescaled_angle, &cfg).unwrap();
        assert!(report.max_slope_deviation <= 1e-9, "{report:?}");
        // Leftward curves are measured, not asserted.
        let y_curve =
            integrate_null(&metric, Family::Leftward, (-1.0, 0.0), cfg.window(), &cfg).unwrap();
        let report = null_deviation(&metric, &y_curve, rescaled_angle, &cfg).unwrap();
        assert!(report.segments > 0);
        assert!(report.max_slope_deviation.is_finite());
    }

    #[test]
    fn cloud_csv_shape() {
        let cfg = cfg();
        let metric = g();
        let cloud = [pt(0.0, -1.0), pt(-3.0, -1.0), pt(-0.7, -1.0)];
        let csv = cloud_csv(&metric, &cloud, rescaled_angle, &cfg).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x,region,t_image,x_image"));
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.contains(",B,"));
        assert!(csv.contains(",C,"));
        assert!(csv.contains(",A,"));
    }
}
