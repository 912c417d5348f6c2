//! The half-plane manifold, the transition profile and the three cone fields.
//!
//! Every metric handled here has the form `-dt^2 + b(t/x) dx^2` on the
//! half-plane `V = R x (-inf, 0)`, so a cone field is fully described by the
//! coefficient evaluator `b`. Null directions have `|dt/dx| = sqrt(b)`; a
//! larger coefficient therefore means a narrower future cone. The three
//! members of interest are the unit cone field (`b = 1`), the half-slope cone
//! field (`b = 1/4`) and the strain cone field whose coefficient interpolates
//! between the two along the rays `t/x = const`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// A point of the half-plane `V = R x (-inf, 0)`.
///
/// Construction rejects `x >= 0`; the time coordinate is unrestricted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point<T: Real> {
    t: T,
    x: T,
}

impl<T: Real> Point<T> {
    pub fn new(t: T, x: T) -> Result<Self> {
        if !t.is_finite() || !x.is_finite() {
            return Err(Error::NonFinite("point coordinate"));
        }
        if x >= T::zero() {
            return Err(Error::OutsideDomain {
                t: to_f64(t),
                x: to_f64(x),
            });
        }
        Ok(Point { t, x })
    }

    #[inline]
    pub fn t(&self) -> T {
        self.t
    }

    #[inline]
    pub fn x(&self) -> T {
        self.x
    }

    /// The ray coordinate `u = t/x` at which the profile is evaluated.
    #[inline]
    pub fn ray(&self) -> T {
        self.t / self.x
    }
}

/// Three-valued answer for predicates decided up to a numerical margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ternary {
    Inside,
    /// The decision falls within the configured margin of the cone boundary.
    Boundary,
    Outside,
}

/// Smooth monotone transition profile for the cone coefficient.
///
/// `eval(u)` equals `low` for `u <= u_lo`, equals `high` for `u >= u_hi`, and
/// increases strictly in between. The default transition is the symmetric
/// exponential mollifier `low + (high-low) * e(v)/(e(v)+e(1-v))` with
/// `e(v) = exp(-1/v)` and `v` the normalized position in `[u_lo, u_hi]`: it is
/// infinitely smooth and exactly constant outside the transition interval, so
/// the constant plateaus carry no mollifier leakage.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaProfile<T: Real> {
    pub low: T,
    pub high: T,
    pub u_lo: T,
    pub u_hi: T,
}

impl<T: Real> Default for BetaProfile<T> {
    fn default() -> Self {
        BetaProfile {
            low: real(0.25),
            high: real(1.0),
            u_lo: real(0.5),
            u_hi: real(1.0),
        }
    }
}

fn bump<T: Real>(v: T) -> T {
    if v <= T::zero() {
        T::zero()
    } else {
        (-v.recip()).exp()
    }
}

impl<T: Real> BetaProfile<T> {
    /// Evaluate the profile. `u` must be finite.
    pub fn eval(&self, u: T) -> Result<T> {
        if !u.is_finite() {
            return Err(Error::NonFinite("profile argument"));
        }
        Ok(self.eval_raw(u))
    }

    /// Infallible evaluator used on the hot paths, where `u = t/x` is finite
    /// by construction of `Point`.
    #[inline]
    pub fn eval_raw(&self, u: T) -> T {
        if u <= self.u_lo {
            self.low
        } else if u >= self.u_hi {
            self.high
        } else {
            let v = (u - self.u_lo) / (self.u_hi - self.u_lo);
            let e = bump(v);
            let sigma = e / (e + bump(T::one() - v));
            self.low + (self.high - self.low) * sigma
        }
    }

    /// True when the plateau values are the squares of the transition
    /// abscissae (`sqrt(low) = u_lo`, `sqrt(high) = u_hi`).
    ///
    /// In that case the rays `t = u_lo x` and `t = u_hi x` are themselves
    /// null curves, which is what makes the exact straight-line shortcuts in
    /// the integrator valid.
    pub fn plateau_slopes_match(&self) -> bool {
        self.low.sqrt() == self.u_lo && self.high.sqrt() == self.u_hi
    }
}

/// Identifies which member of the family a cone field is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MetricKind {
    /// Constant unit coefficient: the narrowest cones of the family.
    Minkowski,
    /// Constant coefficient `low` (1/4 by default): the widest cones.
    Narrow,
    /// Ray-dependent coefficient interpolating between the two.
    Strain,
}

impl MetricKind {
    pub fn tag(&self) -> &'static str {
        match self {
            MetricKind::Minkowski => "unit",
            MetricKind::Narrow => "narrow",
            MetricKind::Strain => "strain",
        }
    }
}

/// A metric of the family `-dt^2 + b(t/x) dx^2`, identified by its
/// coefficient evaluator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeField<T: Real> {
    kind: MetricKind,
    profile: BetaProfile<T>,
}

impl<T: Real> ConeField<T> {
    /// The unit cone field (`b = 1` everywhere).
    pub fn minkowski() -> Self {
        ConeField {
            kind: MetricKind::Minkowski,
            profile: BetaProfile::default(),
        }
    }

    /// The wide cone field (`b = low` everywhere, 1/4 by default).
    pub fn narrow() -> Self {
        ConeField {
            kind: MetricKind::Narrow,
            profile: BetaProfile::default(),
        }
    }

    /// The interpolating cone field with the default profile.
    pub fn strain() -> Self {
        ConeField {
            kind: MetricKind::Strain,
            profile: BetaProfile::default(),
        }
    }

    /// The interpolating cone field with a custom profile.
    pub fn strain_with(profile: BetaProfile<T>) -> Self {
        ConeField {
            kind: MetricKind::Strain,
            profile,
        }
    }

    #[inline]
    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    #[inline]
    pub fn profile(&self) -> &BetaProfile<T> {
        &self.profile
    }

    /// Coefficient `b` at a point. Always within `[low, high]`.
    #[inline]
    pub fn beta_at(&self, p: Point<T>) -> T {
        match self.kind {
            MetricKind::Minkowski => self.profile.high,
            MetricKind::Narrow => self.profile.low,
            MetricKind::Strain => self.profile.eval_raw(p.ray()),
        }
    }

    /// Coefficient at raw coordinates `(t, x)` with `x < 0`.
    #[inline]
    pub(crate) fn beta_at_coords(&self, t: T, x: T) -> T {
        match self.kind {
            MetricKind::Minkowski => self.profile.high,
            MetricKind::Narrow => self.profile.low,
            MetricKind::Strain => self.profile.eval_raw(t / x),
        }
    }

    /// `|dt/dx|` along null directions at `p`, i.e. `sqrt(b)`.
    ///
    /// Lies in `[1/2, 1]` for the default profile.
    #[inline]
    pub fn null_slope(&self, p: Point<T>) -> T {
        self.beta_at(p).sqrt()
    }

    #[inline]
    pub(crate) fn null_slope_at_coords(&self, t: T, x: T) -> T {
        self.beta_at_coords(t, x).sqrt()
    }

    /// Classify a tangent vector `v = (vt, vx)` at `p` against the future
    /// cone `vt > 0, vt^2 >= b vx^2`.
    ///
    /// Returns `Boundary` whenever `vt^2 - b vx^2` falls within `margin` of
    /// zero (with `vt > 0`); past-directed and spacelike vectors are
    /// `Outside`.
    pub fn classify_vector(&self, p: Point<T>, v: (T, T), margin: T) -> Result<Ternary> {
        let (vt, vx) = v;
        if !vt.is_finite() || !vx.is_finite() {
            return Err(Error::NonFinite("vector component"));
        }
        if vt == T::zero() && vx == T::zero() {
            return Err(Error::ZeroVector);
        }
        if vt <= T::zero() {
            return Ok(Ternary::Outside);
        }
        let gap = vt * vt - self.beta_at(p) * vx * vx;
        Ok(if gap > margin {
            Ternary::Inside
        } else if gap < -margin {
            Ternary::Outside
        } else {
            Ternary::Boundary
        })
    }
}

/// Outcome of a pointwise cone comparison over a sample region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConeOrder {
    /// Cones of the first field are contained in those of the second.
    Included,
    ReverseIncluded,
    Equal,
    Incomparable,
}

/// Comparison result with the per-point extremes of `b1 - b2`.
#[derive(Debug, Clone, Serialize)]
pub struct ConeComparison<T: Real> {
    pub order: ConeOrder,
    /// Smallest coefficient gap `b1 - b2` over the region and where it occurs.
    pub min_gap: (T, Point<T>),
    /// Largest coefficient gap over the region and where it occurs.
    pub max_gap: (T, Point<T>),
}

/// Compare two cone fields pointwise over a sample region.
///
/// Containment of the first field's cones in the second's is equivalent to
/// `b1 >= b2` at every sample. `Equal` is reported when the coefficients
/// agree within `margin` everywhere.
pub fn cone_compare<T: Real>(
    m1: &ConeField<T>,
    m2: &ConeField<T>,
    region: &[Point<T>],
    margin: T,
) -> Result<ConeComparison<T>> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut min_gap = (T::infinity(), region[0]);
    let mut max_gap = (T::neg_infinity(), region[0]);
    for &p in region {
        let gap = m1.beta_at(p) - m2.beta_at(p);
        if gap < min_gap.0 {
            min_gap = (gap, p);
        }
        if gap > max_gap.0 {
            max_gap = (gap, p);
        }
    }
    let all_ge = min_gap.0 >= -margin;
    let all_le = max_gap.0 <= margin;
    let order = match (all_ge, all_le) {
        (true, true) => ConeOrder::Equal,
        (true, false) => ConeOrder::Included,
        (false, true) => ConeOrder::ReverseIncluded,
        (false, false) => ConeOrder::Incomparable,
    };
    Ok(ConeComparison {
        order,
        min_gap,
        max_gap,
    })
}

/// Rectangular sample region helper: `nt x nx` points spanning the given
/// coordinate ranges (the x range must stay strictly below zero).
pub fn grid_region<T: Real>(
    t_range: (T, T),
    x_range: (T, T),
    nt: usize,
    nx: usize,
) -> Result<Vec<Point<T>>> {
    let mut pts = Vec::with_capacity(nt * nx);
    let step = |lo: T, hi: T, n: usize, k: usize| -> T {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * real::<T>(k as f64) / real::<T>((n - 1) as f64)
        }
    };
    for i in 0..nt {
        for j in 0..nx {
            let t = step(t_range.0, t_range.1, nt, i);
            let x = step(x_range.0, x_range.1, nx, j);
            pts.push(Point::new(t, x)?);
        }
    }
    Ok(pts)
}
