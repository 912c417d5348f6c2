//! Point-level causal relations and past sets.
//!
//! Every chronological past handled here is the strict hypograph of a
//! 1-Lipschitz boundary function `b(s)` over the space coordinate: a point
//! `(t', s)` belongs to the set exactly when `t' < b(s)`. This is valid
//! because all cones of the family have `|dt/dx| <= 1`, and it reduces set
//! relations to function comparison on grids.
//!
//! The boundary of a point's past is assembled from two null branches: the
//! rightward characteristic through the point traversed into the past on the
//! left, and the leftward characteristic traversed toward `x = 0` (time
//! decreasing) on the right. The past of a future-inextendible causal curve
//! is the upper envelope of the pasts of its samples, tightened with the
//! attached-endpoint branch when the curve reaches `x = 0`.

use serde::Serialize;

use crate::conefield::{ConeField, Point, Ternary};
use crate::error::{Error, Result};
use crate::nullflow::{integrate_null, Endpoint, Family, NullCurve, NumericConfig, Segment};
use crate::scalar::{real, to_f64, Real};

/// How a past set was produced.
#[derive(Debug, Clone, Serialize)]
pub enum Provenance<T: Real> {
    /// Past light cone of a single point.
    PointPast { t: T, x: T },
    /// Past of a generating curve (seed of the generator when known).
    CurvePast { family: Family, seed: (T, T) },
    /// Closed-form half-plane below an exact null line.
    HalfPlane,
}

/// An open past set, represented as the strict hypograph of its boundary
/// function over `[s_min, x_stop]`.
#[derive(Debug, Clone, Serialize)]
pub struct PastSet<T: Real> {
    segments: Vec<Segment<T>>,
    window: (T, T),
    /// Estimated limit of the boundary as `s -> 0^-`, bracketed within
    /// `|x_stop|` on either side.
    right_limit: T,
    /// The leftmost stretch of the boundary is a rightward null branch of
    /// the owning metric (true for all constructions in this module), which
    /// lets containment checks extend beyond the window by the non-crossing
    /// property of the characteristic foliation.
    left_is_rightward_branch: bool,
    /// Comparison slack: analytic margin for exact boundaries, a multiple of
    /// the integration tolerance otherwise.
    tolerance: T,
    provenance: Provenance<T>,
}

impl<T: Real> PastSet<T> {
    pub fn window(&self) -> (T, T) {
        self.window
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn provenance(&self) -> &Provenance<T> {
        &self.provenance
    }

    pub fn right_limit(&self) -> T {
        self.right_limit
    }

    pub(crate) fn left_is_rightward_branch(&self) -> bool {
        self.left_is_rightward_branch
    }

    /// Boundary value `b(s)`.
    pub fn boundary(&self, s: T) -> Result<T> {
        let slack = T::epsilon() * real::<T>(64.0) * (T::one() + s.abs());
        if s < self.window.0 - slack || s > self.window.1 + slack {
            return Err(Error::OutsideCurveDomain(to_f64(s)));
        }
        let mut lo = 0usize;
        let mut hi = self.segments.len() - 1;
        while hi > lo {
            let mid = (lo + hi) / 2;
            if self.segments[mid].s_hi() < s {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(self.segments[lo].value(s))
    }

    /// Strict hypograph membership up to the given margin.
    pub fn contains(&self, p: Point<T>, margin: T) -> Result<Ternary> {
        let b = self.boundary(p.x())?;
        Ok(if p.t() < b - margin {
            Ternary::Inside
        } else if p.t() > b + margin {
            Ternary::Outside
        } else {
            Ternary::Boundary
        })
    }

    /// The exact line continuation at `s`, when the boundary is analytic
    /// there.
    pub fn line_at(&self, s: T) -> Option<(T, T)> {
        for seg in &self.segments {
            if s >= seg.s_lo() && s <= seg.s_hi() {
                if let Segment::Line { s_lo, r_lo, slope, .. } = seg {
                    return Some((*slope, *r_lo + *slope * (s - *s_lo)));
                }
                return None;
            }
        }
        None
    }

    pub(crate) fn from_parts(
        segments: Vec<Segment<T>>,
        window: (T, T),
        right_limit: T,
        tolerance: T,
        provenance: Provenance<T>,
    ) -> Self {
        PastSet {
            segments,
            window,
            right_limit,
            left_is_rightward_branch: true,
            tolerance,
            provenance,
        }
    }

    /// CSV export `s,b` on the given grid.
    pub fn to_csv(&self, grid: &[T]) -> Result<String> {
        let mut out = String::from("s,b\n");
        for &s in grid {
            out.push_str(&format!(
                "{:.16e},{:.16e}\n",
                to_f64(s),
                to_f64(self.boundary(s)?)
            ));
        }
        Ok(out)
    }
}

fn clip_segments<T: Real>(curve: &NullCurve<T>, lo: T, hi: T) -> Vec<Segment<T>> {
    let mut out = Vec::new();
    if hi <= lo {
        return out;
    }
    for seg in curve.segments() {
        let s_lo = seg.s_lo().max(lo);
        let s_hi = seg.s_hi().min(hi);
        if s_hi <= s_lo {
            continue;
        }
        match seg {
            Segment::Line { slope, .. } => out.push(Segment::Line {
                s_lo,
                s_hi,
                r_lo: seg.value(s_lo),
                slope: *slope,
            }),
            Segment::Sampled { s, r, dr } => {
                let mut sv = Vec::new();
                let mut rv = Vec::new();
                let mut dv = Vec::new();
                if s_lo > seg.s_lo() {
                    sv.push(s_lo);
                    rv.push(seg.value(s_lo));
                    dv.push(seg.derivative(s_lo));
                }
                for i in 0..s.len() {
                    if s[i] > *sv.last().unwrap_or(&T::neg_infinity()) && s[i] < s_hi {
                        sv.push(s[i]);
                        rv.push(r[i]);
                        dv.push(dr[i]);
                    }
                }
                if *sv.last().unwrap_or(&s_lo) < s_hi {
                    sv.push(s_hi);
                    rv.push(seg.value(s_hi));
                    dv.push(seg.derivative(s_hi));
                }
                if sv.len() >= 2 {
                    out.push(Segment::Sampled { s: sv, r: rv, dr: dv });
                } else {
                    out.push(Segment::Line {
                        s_lo,
                        s_hi,
                        r_lo: rv[0],
                        slope: dv[0],
                    });
                }
            }
        }
    }
    out
}

/// Past set whose boundary is the hypograph of an integrated null curve.
pub(crate) fn hypograph_of_curve<T: Real>(
    curve: &NullCurve<T>,
    right_limit: T,
    cfg: &NumericConfig<T>,
    provenance: Provenance<T>,
) -> PastSet<T> {
    let (lo, hi) = curve.window();
    let tolerance = if curve.is_analytic() {
        cfg.margin
    } else {
        cfg.integrated_margin()
    };
    PastSet::from_parts(
        clip_segments(curve, lo, hi),
        (lo, hi),
        right_limit,
        tolerance,
        provenance,
    )
}

/// Chronological past of a point: rightward branch through `p` on
/// `[s_min, x_p]`, leftward branch (time decreasing toward `x = 0`) on
/// `[x_p, x_stop]`.
pub fn past_of_point<T: Real>(
    metric: &ConeField<T>,
    p: Point<T>,
    cfg: &NumericConfig<T>,
) -> Result<PastSet<T>> {
    let xi = p.x();
    let window_lo = cfg.s_min.min(xi * real(1.5));
    let left = integrate_null(metric, Family::Rightward, (xi, p.t()), (window_lo, xi), cfg)?;
    let mut segments = clip_segments(&left, window_lo, xi);
    let mut right_limit = p.t();
    let mut analytic = left.is_analytic();
    if xi < cfg.x_stop {
        let right =
            integrate_null(metric, Family::Leftward, (xi, p.t()), (xi, cfg.x_stop), cfg)?;
        right_limit = right.value_at(cfg.x_stop)?;
        analytic = analytic && right.is_analytic();
        segments.extend(clip_segments(&right, xi, cfg.x_stop));
    }
    let tolerance = if analytic {
        cfg.margin
    } else {
        cfg.integrated_margin()
    };
    Ok(PastSet::from_parts(
        segments,
        (window_lo, cfg.x_stop.max(xi)),
        right_limit,
        tolerance,
        Provenance::PointPast { t: p.t(), x: p.x() },
    ))
}

/// Boundary value of `q`'s past at abscissa `s`, computed from the single
/// null branch that covers `s`.
pub fn past_boundary_value<T: Real>(
    metric: &ConeField<T>,
    q: Point<T>,
    s: T,
    cfg: &NumericConfig<T>,
) -> Result<(T, bool)> {
    let xi = q.x();
    if s >= T::zero() {
        return Err(Error::OutsideCurveDomain(to_f64(s)));
    }
    if s == xi {
        return Ok((q.t(), true));
    }
    let curve = if s < xi {
        integrate_null(metric, Family::Rightward, (xi, q.t()), (s, xi), cfg)?
    } else {
        integrate_null(metric, Family::Leftward, (xi, q.t()), (xi, s), cfg)?
    };
    Ok((curve.value_at(s)?, curve.is_analytic()))
}

/// Two-sided chronology test `p << q`, decided through the hypograph of
/// `q`'s past boundary with the configured margin.
pub fn chron_rel<T: Real>(
    metric: &ConeField<T>,
    p: Point<T>,
    q: Point<T>,
    cfg: &NumericConfig<T>,
) -> Result<Ternary> {
    let (b, analytic) = past_boundary_value(metric, q, p.x(), cfg)?;
    let margin = if analytic {
        cfg.margin
    } else {
        cfg.integrated_margin()
    };
    Ok(if p.t() < b - margin {
        Ternary::Inside
    } else if p.t() > b + margin {
        Ternary::Outside
    } else {
        Ternary::Boundary
    })
}

/// A future-directed causal curve given as ordered point samples plus its
/// future endpoint data.
#[derive(Debug, Clone, Serialize)]
pub struct SampledCausalCurve<T: Real> {
    pub points: Vec<Point<T>>,
    pub endpoint: Endpoint<T>,
}

impl<T: Real> SampledCausalCurve<T> {
    /// Extract a sampled causal curve from an integrated null curve.
    pub fn from_null_curve(curve: &NullCurve<T>, cfg: &NumericConfig<T>) -> Result<Self> {
        let endpoint = crate::nullflow::endpoint_of(curve, cfg)?;
        let mut points = curve.sample_points(160);
        if curve.family() == Family::Leftward {
            // Future direction runs toward x = -inf.
            points.reverse();
        }
        Ok(SampledCausalCurve { points, endpoint })
    }

    /// Spatially leftmost sample (curves are stored future-directed, so this
    /// is the last point for leftward generators and the first otherwise).
    fn leftmost_x(&self) -> T {
        self.points
            .iter()
            .map(|p| p.x())
            .fold(T::infinity(), |a, b| a.min(b))
    }
}

/// Chronological past of a future-inextendible causal curve: the upper
/// envelope of the point pasts along a sample ladder, together with the
/// rightward branch attached at the endpoint when the curve reaches `x = 0`.
///
/// For a rightward null generator the result coincides with the hypograph of
/// the generator itself.
pub fn past_of_curve<T: Real>(
    metric: &ConeField<T>,
    curve: &SampledCausalCurve<T>,
    cfg: &NumericConfig<T>,
) -> Result<PastSet<T>> {
    if curve.points.len() < 2 {
        return Err(Error::InvalidConfig(
            "curve needs at least two samples".into(),
        ));
    }
    // Verify causal ordering of consecutive samples under this metric. A
    // chord of a causal curve can leave the pointwise cone at one end by a
    // curvature term, so the step is accepted when either endpoint admits it.
    for (i, w) in curve.points.windows(2).enumerate() {
        let v = (w[1].t() - w[0].t(), w[1].x() - w[0].x());
        let m = cfg.integrated_margin();
        let c0 = metric.classify_vector(w[0], v, m)?;
        let c1 = metric.classify_vector(w[1], v, m)?;
        if c0 == Ternary::Outside && c1 == Ternary::Outside {
            return Err(Error::NotCausallyOrdered(i));
        }
    }

    // Candidate boundaries: pasts of ladder samples, thinned with a bias
    // toward the future end where the envelope is decided.
    let ladder: Vec<Point<T>> = thin_ladder(&curve.points, 48);
    let mut candidates: Vec<PastSet<T>> = Vec::with_capacity(ladder.len() + 1);
    for &q in &ladder {
        candidates.push(past_of_point(metric, q, cfg)?);
    }
    let first = curve.points[0];
    if let Endpoint::Attached { t: t_end, .. } = curve.endpoint {
        // The endpoint branch: the rightward characteristic of this metric
        // attached at (t_end, 0), entering the window at x_stop.
        let branch = integrate_null(
            metric,
            Family::Rightward,
            (cfg.x_stop, t_end),
            (cfg.s_min.min(curve.leftmost_x() * real(1.5)), cfg.x_stop),
            cfg,
        )?;
        let window = branch.window();
        let segs = clip_segments(&branch, window.0, window.1);
        candidates.push(PastSet::from_parts(
            segs,
            window,
            t_end,
            cfg.integrated_margin(),
            Provenance::HalfPlane,
        ));
    }

    // Upper envelope on a geometric grid.
    let w_lo = candidates
        .iter()
        .map(|c| c.window().0)
        .fold(T::infinity(), |a, b| a.min(b));
    let grid = envelope_grid(w_lo, cfg.x_stop, 640);
    let mut s_v = Vec::with_capacity(grid.len());
    let mut r_v = Vec::with_capacity(grid.len());
    let mut d_v = Vec::with_capacity(grid.len());
    for &s in &grid {
        let mut best = T::neg_infinity();
        let mut best_d = T::zero();
        for c in &candidates {
            if s < c.window().0 - real(1e-12) {
                continue;
            }
            let at = s.max(c.window().0);
            let v = c.boundary(at)?;
            if v > best {
                best = v;
                best_d = boundary_derivative(c, at);
            }
        }
        s_v.push(s);
        r_v.push(best);
        d_v.push(best_d);
    }
    let right_limit = candidates
        .iter()
        .map(|c| c.right_limit())
        .fold(T::neg_infinity(), |a, b| a.max(b));
    let provenance = Provenance::CurvePast {
        family: Family::Rightward,
        seed: (first.x(), first.t()),
    };
    Ok(PastSet::from_parts(
        vec![Segment::Sampled {
            s: s_v,
            r: r_v,
            dr: d_v,
        }],
        (w_lo, cfg.x_stop),
        right_limit,
        cfg.integrated_margin(),
        provenance,
    ))
}

fn boundary_derivative<T: Real>(c: &PastSet<T>, s: T) -> T {
    for seg in &c.segments {
        if s >= seg.s_lo() && s <= seg.s_hi() {
            return seg.derivative(s);
        }
    }
    T::zero()
}

fn thin_ladder<T: Real>(points: &[Point<T>], max_n: usize) -> Vec<Point<T>> {
    let n = points.len();
    if n <= max_n {
        return points.to_vec();
    }
    let mut out: Vec<Point<T>> = Vec::with_capacity(max_n);
    for k in 0..max_n {
        let f = k as f64 / (max_n - 1) as f64;
        // Quadratic bias toward the future end of the parameter range.
        let idx = ((n - 1) as f64 * (1.0 - (1.0 - f) * (1.0 - f))).round() as usize;
        let idx = idx.min(n - 1);
        if out.is_empty() || out.last().unwrap().x() != points[idx].x() {
            out.push(points[idx]);
        }
    }
    out
}

/// Geometric grid from `lo` up to `hi` (both negative), dense near zero.
pub fn envelope_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let n = n.max(2);
    let llo = lo.abs().ln();
    let lhi = hi.abs().ln();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let f = real::<T>(k as f64 / (n - 1) as f64);
        out.push(-(llo + (lhi - llo) * f).exp());
    }
    out[0] = lo;
    let last = out.len() - 1;
    out[last] = hi;
    out
}

/// Default comparison grid: logarithmic between `s_min` and `-1e-3`.
///
/// Comparisons stop short of the window end because inter-curve gaps near a
/// common endpoint shrink like a power of `|s|` below the integration
/// tolerance.
pub fn comparison_grid<T: Real>(cfg: &NumericConfig<T>) -> Vec<T> {
    envelope_grid(cfg.s_min, real(-1e-3), 181)
}

/// Set-inclusion verdict with strictness flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ContainmentResult {
    /// `Inside` when the first set is contained in the second on the grid.
    pub verdict: Ternary,
    /// Strict somewhere on the grid (only meaningful for `Inside`).
    pub strict: bool,
}

/// Compare two past sets on a grid: `Inside` iff `b1 <= b2 + margin`
/// everywhere, strict iff additionally `b1 < b2 - margin` somewhere.
pub fn pastset_leq<T: Real>(
    p1: &PastSet<T>,
    p2: &PastSet<T>,
    grid: &[T],
) -> Result<ContainmentResult> {
    if grid.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let margin = p1.tolerance().max(p2.tolerance());
    let mut subset = true;
    let mut strict = false;
    for &s in grid {
        if s < p1.window().0 || s < p2.window().0 {
            continue;
        }
        let b1 = p1.boundary(s)?;
        let b2 = p2.boundary(s)?;
        if b1 > b2 + margin {
            subset = false;
            break;
        }
        if b1 < b2 - margin {
            strict = true;
        }
    }
    Ok(ContainmentResult {
        verdict: if subset { Ternary::Inside } else { Ternary::Outside },
        strict: subset && strict,
    })
}
