//! Terminal past sets, their binary relations, and the future boundary atlas.
//!
//! A terminal set is the chronological past of a future-inextendible causal
//! curve. The rightward null generators that reach `x = 0` make up the
//! timelike line of the boundary, the leftward generators escaping to
//! `x = -inf` make up the null-infinity line, and the whole half-plane is the
//! terminal set of any curve unbounded in time. The extended chronology
//! between terminal sets `P << P'` holds when some point of `P'` contains all
//! of `P` in its past; pairs related by inclusion but not by extended
//! chronology in either direction are horismotically related.

use serde::Serialize;

use crate::chronology::{
    hypograph_of_curve, past_of_point, pastset_leq, PastSet, Provenance, SampledCausalCurve,
};
use crate::conefield::{ConeField, Point, Ternary};
use crate::error::{Error, Result};
use crate::nullflow::{endpoint_of, integrate_null, Endpoint, Family, NumericConfig};
use crate::scalar::{real, Real};

/// Role of a terminal set inside an atlas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TipLabel<T: Real> {
    /// Singleton boundary point of the timelike line, tagged by endpoint.
    TimePoint(T),
    /// Member of a strain group, tagged by generator seed.
    StrainMember(T),
    /// Member of the null-infinity line, tagged by its boundary limit.
    InfinityMember(T),
    /// The terminal set equal to the whole half-plane.
    FutureInfinity,
}

/// Past of a terminal set: the whole half-plane is a flag, not a function.
#[derive(Debug, Clone, Serialize)]
pub enum TipPast<T: Real> {
    Full,
    Bounded(PastSet<T>),
}

/// A terminal indecomposable past set with its generator metadata.
#[derive(Debug, Clone, Serialize)]
pub struct Tip<T: Real> {
    pub past: TipPast<T>,
    pub generator: Option<SampledCausalCurve<T>>,
    pub endpoint: Endpoint<T>,
    pub label: Option<TipLabel<T>>,
    /// Seed `(s0, r0)` of the generator when it is a null curve.
    pub seed: Option<(T, T)>,
}

impl<T: Real> Tip<T> {
    /// The terminal set equal to the whole half-plane.
    pub fn future_infinity() -> Self {
        Tip {
            past: TipPast::Full,
            generator: None,
            endpoint: Endpoint::Infinity,
            label: Some(TipLabel::FutureInfinity),
            seed: None,
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self.past, TipPast::Full)
    }

    pub fn bounded_past(&self) -> Result<&PastSet<T>> {
        match &self.past {
            TipPast::Bounded(p) => Ok(p),
            TipPast::Full => Err(Error::InvalidConfig(
                "the full terminal set has no boundary function".into(),
            )),
        }
    }

    /// Estimated boundary limit at `s -> 0^-` (finite for every bounded set).
    pub fn right_limit(&self) -> Result<T> {
        Ok(self.bounded_past()?.right_limit())
    }
}

/// Terminal set of the rightward null generator seeded at `r(-1) = t_seed`.
pub fn generate_tip<T: Real>(
    metric: &ConeField<T>,
    t_seed: T,
    cfg: &NumericConfig<T>,
) -> Result<Tip<T>> {
    let seed_s = -T::one();
    if seed_s < cfg.s_min || seed_s > cfg.x_stop {
        return Err(Error::SeedOutsideWindow(-1.0));
    }
    let curve = integrate_null(metric, Family::Rightward, (seed_s, t_seed), cfg.window(), cfg)?;
    let endpoint = endpoint_of(&curve, cfg)?;
    let right_limit = curve.value_at(cfg.x_stop)?;
    let past = hypograph_of_curve(
        &curve,
        right_limit,
        cfg,
        Provenance::CurvePast {
            family: Family::Rightward,
            seed: (seed_s, t_seed),
        },
    );
    let generator = SampledCausalCurve::from_null_curve(&curve, cfg)?;
    Ok(Tip {
        past: TipPast::Bounded(past),
        generator: Some(generator),
        endpoint,
        label: None,
        seed: Some((seed_s, t_seed)),
    })
}

/// Terminal set of the leftward null generator through a seed point; the
/// generator escapes to `x = -inf` and its past is the hypograph of the
/// full leftward curve.
pub fn generate_infinity_tip<T: Real>(
    metric: &ConeField<T>,
    seed: Point<T>,
    cfg: &NumericConfig<T>,
) -> Result<Tip<T>> {
    let curve = integrate_null(
        metric,
        Family::Leftward,
        (seed.x(), seed.t()),
        cfg.window(),
        cfg,
    )?;
    let endpoint = endpoint_of(&curve, cfg)?;
    let right_limit = curve.value_at(cfg.x_stop)?;
    let past = hypograph_of_curve(
        &curve,
        right_limit,
        cfg,
        Provenance::CurvePast {
            family: Family::Leftward,
            seed: (seed.x(), seed.t()),
        },
    );
    let generator = SampledCausalCurve::from_null_curve(&curve, cfg)?;
    Ok(Tip {
        past: TipPast::Bounded(past),
        generator: Some(generator),
        endpoint,
        label: Some(TipLabel::InfinityMember(right_limit)),
        seed: Some((seed.x(), seed.t())),
    })
}

/// Witness-search policy for the extended chronology decision.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessSearch<T: Real> {
    /// Depths below the target boundary at which candidates are placed.
    pub offsets: Vec<T>,
    /// Candidate abscissae, scanned from the right end of the window.
    pub positions: Vec<T>,
    /// Containment comparison grid.
    pub grid: Vec<T>,
}

impl<T: Real> WitnessSearch<T> {
    pub fn new(cfg: &NumericConfig<T>) -> Self {
        let mut positions: Vec<T> = vec![
            cfg.x_stop * real(4.0),
            real(-1e-4),
            real(-3e-4),
            real(-1e-3),
            real(-3e-3),
            real(-0.01),
            real(-0.03),
            real(-0.1),
            real(-0.3),
            real(-0.6),
            real(-1.0),
            real(-1.5),
            real(-2.0),
            real(-3.0),
            real(-5.0),
            real(-7.5),
        ];
        positions.retain(|&s| s >= cfg.s_min && s <= cfg.x_stop * real(2.0));
        positions.push(cfg.s_min * real(0.999));
        WitnessSearch {
            offsets: vec![real(0.1), real(0.01), real(0.001)],
            positions,
            grid: crate::chronology::comparison_grid(cfg),
        }
    }
}

/// Universal no-witness argument from the boundary limits at `s -> 0^-`:
/// any witness's past has a boundary limit strictly below the target's,
/// so no witness exists unless the target limit exceeds the source limit.
#[derive(Debug, Clone, Serialize)]
pub struct EndpointArgument<T: Real> {
    pub source_limit: T,
    pub target_limit: T,
}

/// Certificate that no witness exists.
#[derive(Debug, Clone, Serialize)]
pub struct NoWitnessCertificate<T: Real> {
    /// The source set is unbounded above toward `s -> -inf` (null-infinity
    /// type), so no point past can contain it.
    pub unbounded_source: bool,
    pub endpoint_argument: Option<EndpointArgument<T>>,
}

/// Failed candidate with the abscissa where containment breaks.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateFailure<T: Real> {
    pub candidate: (T, T),
    pub violation_s: T,
}

/// Outcome of the extended chronology decision `P1 << P2`.
#[derive(Debug, Clone, Serialize)]
pub enum ExtChron<T: Real> {
    True {
        witness: (T, T),
    },
    False {
        certificate: NoWitnessCertificate<T>,
    },
    Indeterminate {
        failures: Vec<CandidateFailure<T>>,
    },
}

impl<T: Real> ExtChron<T> {
    pub fn is_true(&self) -> bool {
        matches!(self, ExtChron::True { .. })
    }
    pub fn is_false(&self) -> bool {
        matches!(self, ExtChron::False { .. })
    }
}

/// Verify `P1` is contained in the past of the candidate point.
///
/// Grid comparison inside the window; beyond the left end both boundaries
/// continue as rightward null branches of the same metric, so their ordering
/// at the leftmost grid point persists by non-crossing of the foliation;
/// beyond the right end the candidate's boundary is non-increasing while a
/// bounded terminal boundary is non-decreasing, so the limit comparison
/// decides.
fn verify_containment<T: Real>(
    metric: &ConeField<T>,
    p1: &PastSet<T>,
    source_endpoint_attached: bool,
    candidate: Point<T>,
    search: &WitnessSearch<T>,
    cfg: &NumericConfig<T>,
) -> Result<Option<T>> {
    if !source_endpoint_attached || !p1.left_is_rightward_branch() {
        return Ok(Some(cfg.s_min));
    }
    let tent = past_of_point(metric, candidate, cfg)?;
    let margin = p1.tolerance().max(tent.tolerance());
    // Right-end rule with both limit brackets.
    let bracket = cfg.x_stop.abs();
    if tent.right_limit() - bracket < p1.right_limit() + bracket {
        return Ok(Some(cfg.x_stop));
    }
    for &s in &search.grid {
        if s < p1.window().0 || s < tent.window().0 {
            continue;
        }
        if p1.boundary(s)? > tent.boundary(s)? + margin {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Decide the extended chronology `P1 << P2`: search for a witness point of
/// `P2` whose past contains `P1`, or certify that none exists.
pub fn ext_chron<T: Real>(
    metric: &ConeField<T>,
    p1: &Tip<T>,
    p2: &Tip<T>,
    search: &WitnessSearch<T>,
    cfg: &NumericConfig<T>,
) -> Result<ExtChron<T>> {
    if p1.is_full() || p2.is_full() {
        return Err(Error::InvalidConfig(
            "extended chronology with the full set is decided by definition".into(),
        ));
    }
    let b1 = p1.bounded_past()?;
    let b2 = p2.bounded_past()?;

    // Null-infinity sources are unbounded toward s -> -inf.
    if p1.endpoint == Endpoint::Infinity {
        return Ok(ExtChron::False {
            certificate: NoWitnessCertificate {
                unbounded_source: true,
                endpoint_argument: None,
            },
        });
    }

    // Universal limit argument: a witness inside P2 has its own boundary
    // limit strictly below P2's, so P2's limit must exceed P1's.
    let slack = real::<T>(4.0) * cfg.x_stop.abs() + b1.tolerance() + b2.tolerance();
    if b2.right_limit() <= b1.right_limit() + slack {
        return Ok(ExtChron::False {
            certificate: NoWitnessCertificate {
                unbounded_source: false,
                endpoint_argument: Some(EndpointArgument {
                    source_limit: b1.right_limit(),
                    target_limit: b2.right_limit(),
                }),
            },
        });
    }

    let mut failures: Vec<CandidateFailure<T>> = Vec::new();
    let attached = matches!(p1.endpoint, Endpoint::Attached { .. });
    for &xi in &search.positions {
        if xi < b2.window().0 || xi > b2.window().1 {
            continue;
        }
        let ceiling = b2.boundary(xi)?;
        for &delta in &search.offsets {
            if delta <= b2.tolerance() {
                continue;
            }
            let tau = ceiling - delta;
            let candidate = Point::new(tau, xi)?;
            // Cheap necessary conditions before building the full tent.
            if xi >= b1.window().0
                && tau <= b1.boundary(xi)? {
                    continue;
                }
            if tau - xi.abs() < b1.right_limit() {
                continue;
            }
            match verify_containment(metric, b1, attached, candidate, search, cfg)? {
                None => {
                    return Ok(ExtChron::True {
                        witness: (tau, xi),
                    })
                }
                Some(violation_s) => {
                    if failures.len() < 16 {
                        failures.push(CandidateFailure {
                            candidate: (tau, xi),
                            violation_s,
                        });
                    }
                }
            }
        }
    }
    Ok(ExtChron::Indeterminate { failures })
}

/// Binary relation taxonomy for pairs of terminal sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairClass {
    TimelikeForward,
    TimelikeBackward,
    Horismos,
    Unrelated,
    Equal,
    Indeterminate,
}

impl PairClass {
    pub fn code(&self) -> &'static str {
        match self {
            PairClass::TimelikeForward => "TF",
            PairClass::TimelikeBackward => "TB",
            PairClass::Horismos => "H",
            PairClass::Unrelated => "U",
            PairClass::Equal => "E",
            PairClass::Indeterminate => "I",
        }
    }
}

/// Classify an ordered pair of terminal sets by combining inclusion and the
/// extended chronology both ways.
pub fn classify_pair<T: Real>(
    metric: &ConeField<T>,
    p1: &Tip<T>,
    p2: &Tip<T>,
    search: &WitnessSearch<T>,
    cfg: &NumericConfig<T>,
) -> Result<PairClass> {
    // The full set relates to every bounded set by definition: every bounded
    // terminal set is a strict subset and admits witnesses arbitrarily far in
    // the future.
    match (p1.is_full(), p2.is_full()) {
        (true, true) => return Ok(PairClass::Equal),
        (false, true) => return Ok(PairClass::TimelikeForward),
        (true, false) => return Ok(PairClass::TimelikeBackward),
        _ => {}
    }
    let b1 = p1.bounded_past()?;
    let b2 = p2.bounded_past()?;
    let leq12 = pastset_leq(b1, b2, &search.grid)?;
    let leq21 = pastset_leq(b2, b1, &search.grid)?;
    if leq12.verdict == Ternary::Inside
        && leq21.verdict == Ternary::Inside
        && !leq12.strict
        && !leq21.strict
    {
        return Ok(PairClass::Equal);
    }
    let fwd = ext_chron(metric, p1, p2, search, cfg)?;
    if fwd.is_true() {
        return Ok(PairClass::TimelikeForward);
    }
    let bwd = ext_chron(metric, p2, p1, search, cfg)?;
    if bwd.is_true() {
        return Ok(PairClass::TimelikeBackward);
    }
    if !fwd.is_false() || !bwd.is_false() {
        return Ok(PairClass::Indeterminate);
    }
    if leq12.verdict == Ternary::Inside || leq21.verdict == Ternary::Inside {
        return Ok(PairClass::Horismos);
    }
    Ok(PairClass::Unrelated)
}

/// One endpoint of the timelike boundary line with its owner terminal sets
/// (several members = a strain).
#[derive(Debug, Clone, Serialize)]
pub struct TimeLineGroup<T: Real> {
    pub endpoint: T,
    /// Indices into the atlas tips, ordered by strict inclusion.
    pub members: Vec<usize>,
}

/// The assembled future boundary of one metric: the timelike line (with
/// strain groups), the null-infinity line, and the full-set point.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryAtlas<T: Real> {
    pub metric_tag: &'static str,
    pub tips: Vec<Tip<T>>,
    pub t_line: Vec<TimeLineGroup<T>>,
    /// Indices of null-infinity members, ordered by inclusion.
    pub jplus: Vec<usize>,
    pub i_plus: Tip<T>,
}

impl<T: Real> BoundaryAtlas<T> {
    /// Groups owning at least two distinct terminal sets.
    pub fn strain_groups(&self) -> Vec<&TimeLineGroup<T>> {
        self.t_line.iter().filter(|g| g.members.len() > 1).collect()
    }

    /// Deterministic enumeration of all bounded tips: timelike line groups
    /// in endpoint order, then null infinity in inclusion order.
    pub fn ordered_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for g in &self.t_line {
            out.extend(&g.members);
        }
        out.extend(&self.jplus);
        out
    }

    pub fn seed_of(&self, idx: usize) -> Option<T> {
        self.tips[idx].seed.map(|(_, r)| r)
    }
}

/// Threshold under which two computed endpoints are considered the same
/// boundary point (covers the endpoint bracket on both sides).
fn endpoint_group_tol<T: Real>(cfg: &NumericConfig<T>) -> T {
    (real::<T>(4.0) * cfg.x_stop.abs()).max(real(1e-9))
}

/// Generate terminal sets over the seed grids and assemble the atlas:
/// group timelike-line members by endpoint, order strain groups by strict
/// inclusion, order null infinity by inclusion, attach the full set.
pub fn build_atlas<T: Real>(
    metric: &ConeField<T>,
    t_seeds: &[T],
    j_seeds: &[Point<T>],
    cfg: &NumericConfig<T>,
) -> Result<BoundaryAtlas<T>> {
    if t_seeds.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut tips: Vec<Tip<T>> = Vec::new();
    let mut line: Vec<(T, usize)> = Vec::new();
    for &t in t_seeds {
        let tip = generate_tip(metric, t, cfg)?;
        let ep = match tip.endpoint {
            Endpoint::Attached { t, .. } => t,
            Endpoint::Infinity => return Err(Error::WindowTooShort),
        };
        line.push((ep, tips.len()));
        tips.push(tip);
    }
    line.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let grid = crate::chronology::comparison_grid(cfg);
    let tol = endpoint_group_tol(cfg);
    let mut t_line: Vec<TimeLineGroup<T>> = Vec::new();
    let mut k = 0usize;
    while k < line.len() {
        let mut members = vec![line[k].1];
        let mut hi = line[k].0;
        let lo = line[k].0;
        let mut j = k + 1;
        while j < line.len() && line[j].0 - hi <= tol {
            hi = line[j].0;
            members.push(line[j].1);
            j += 1;
        }
        // Order by inclusion (ascending seed) and verify strict distinctness
        // of neighbors; indistinct members collapse to one representative.
        members.sort_by(|&a, &b| {
            let sa = tips[a].seed.map(|(_, r)| r).unwrap_or_else(T::zero);
            let sb = tips[b].seed.map(|(_, r)| r).unwrap_or_else(T::zero);
            sa.partial_cmp(&sb).unwrap()
        });
        let mut distinct: Vec<usize> = vec![members[0]];
        for &m in &members[1..] {
            let prev = *distinct.last().unwrap();
            let rel = pastset_leq(
                tips[prev].bounded_past()?,
                tips[m].bounded_past()?,
                &grid,
            )?;
            if rel.verdict == Ternary::Inside && rel.strict {
                distinct.push(m);
            }
        }
        let endpoint = (lo + hi) / real(2.0);
        for (rank, &m) in distinct.iter().enumerate() {
            let seed = tips[m].seed.map(|(_, r)| r).unwrap_or_else(T::zero);
            tips[m].label = Some(if distinct.len() > 1 {
                TipLabel::StrainMember(seed)
            } else {
                TipLabel::TimePoint(endpoint)
            });
            let _ = rank;
        }
        t_line.push(TimeLineGroup {
            endpoint,
            members: distinct,
        });
        k = j;
    }

    let mut jplus: Vec<(T, usize)> = Vec::new();
    for &p in j_seeds {
        let tip = generate_infinity_tip(metric, p, cfg)?;
        let c = tip.right_limit()?;
        // Two seeds on the same leftward generator produce the same set;
        // deduplicate by boundary agreement.
        let duplicate = jplus.iter().any(|&(c0, idx)| {
            (c0 - c).abs() <= endpoint_group_tol(cfg)
                && pastset_leq(
                    tips[idx].bounded_past().unwrap(),
                    tip.bounded_past().unwrap(),
                    &grid,
                )
                .map(|r| r.verdict == Ternary::Inside && !r.strict)
                .unwrap_or(false)
        });
        if !duplicate {
            jplus.push((c, tips.len()));
            tips.push(tip);
        }
    }
    jplus.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    Ok(BoundaryAtlas {
        metric_tag: metric.kind().tag(),
        tips,
        t_line,
        jplus: jplus.into_iter().map(|(_, i)| i).collect(),
        i_plus: Tip::future_infinity(),
    })
}

/// Verdict of the pointwise limit test for a sequence of terminal sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitVerdict {
    Converges,
    Diverges,
    Indeterminate,
}

/// Pointwise boundary-function convergence of a terminal-set sequence to a
/// candidate, on a grid with a margin. Valid for (eventually) monotone
/// boundary sequences.
pub fn chron_limit<T: Real>(
    sequence: &[&Tip<T>],
    candidate: &Tip<T>,
    grid: &[T],
    margin: T,
) -> Result<LimitVerdict> {
    if sequence.is_empty() || grid.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let cand = candidate.bounded_past()?;
    let mut deviations: Vec<T> = Vec::with_capacity(sequence.len());
    for tip in sequence {
        let past = tip.bounded_past()?;
        let mut dev = T::zero();
        for &s in grid {
            if s < past.window().0 || s < cand.window().0 {
                continue;
            }
            let d = (past.boundary(s)? - cand.boundary(s)?).abs();
            if d > dev {
                dev = d;
            }
        }
        deviations.push(dev);
    }
    let tail = &deviations[deviations.len().saturating_sub(5)..];
    let non_increasing = tail.windows(2).all(|w| w[1] <= w[0] + margin);
    let non_decreasing = tail.windows(2).all(|w| w[1] + margin >= w[0]);
    let last = *deviations.last().unwrap();
    if last <= margin && non_increasing {
        Ok(LimitVerdict::Converges)
    } else if last > margin * real(10.0) && non_decreasing && tail.len() > 1 {
        Ok(LimitVerdict::Diverges)
    } else {
        Ok(LimitVerdict::Indeterminate)
    }
}

/// Collapse every strain group to its inclusion-maximal member, relabelled
/// as an ordinary boundary point. Idempotent.
pub fn quotient_strain<T: Real>(atlas: &BoundaryAtlas<T>) -> BoundaryAtlas<T> {
    let mut out = atlas.clone();
    for g in &mut out.t_line {
        if g.members.len() > 1 {
            let keep = *g.members.last().unwrap();
            g.members = vec![keep];
        }
        let keep = g.members[0];
        out.tips[keep].label = Some(TipLabel::TimePoint(g.endpoint));
    }
    out
}

/// Mismatch row of an atlas isomorphism check.
#[derive(Debug, Clone, Serialize)]
pub struct IsoMismatch<T: Real> {
    pub left_endpoint: T,
    pub right_endpoint: T,
    pub detail: String,
}

/// Report of an order/relation-preserving correspondence check between the
/// timelike lines of two atlases.
#[derive(Debug, Clone, Serialize)]
pub struct IsoReport<T: Real> {
    pub pass: bool,
    pub pairs_checked: usize,
    pub mismatches: Vec<IsoMismatch<T>>,
}

/// Check that the endpoint pairing is an order bijection between the
/// timelike lines which preserves pair classification.
pub fn atlas_iso_check<T: Real>(
    m1: &ConeField<T>,
    a1: &BoundaryAtlas<T>,
    m2: &ConeField<T>,
    a2: &BoundaryAtlas<T>,
    pairing: &[(T, T)],
    search: &WitnessSearch<T>,
    cfg: &NumericConfig<T>,
) -> Result<IsoReport<T>> {
    let tol = endpoint_group_tol(cfg).max(real(1e-5));
    let mut mismatches: Vec<IsoMismatch<T>> = Vec::new();

    let find = |atlas: &BoundaryAtlas<T>, ep: T| -> Option<usize> {
        atlas
            .t_line
            .iter()
            .position(|g| (g.endpoint - ep).abs() <= tol)
    };

    // Coverage: every timelike-line endpoint of the first atlas must appear.
    for g in &a1.t_line {
        if !pairing.iter().any(|&(l, _)| (l - g.endpoint).abs() <= tol) {
            mismatches.push(IsoMismatch {
                left_endpoint: g.endpoint,
                right_endpoint: T::nan(),
                detail: "endpoint not covered by the pairing".into(),
            });
        }
    }

    // Order preservation of the pairing itself.
    let mut sorted = pairing.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in sorted.windows(2) {
        if w[1].1 <= w[0].1 {
            mismatches.push(IsoMismatch {
                left_endpoint: w[1].0,
                right_endpoint: w[1].1,
                detail: "pairing does not preserve the endpoint order".into(),
            });
        }
    }

    // Cardinality and membership at each paired endpoint.
    let mut matched: Vec<(usize, usize)> = Vec::new();
    for &(l, r) in &sorted {
        match (find(a1, l), find(a2, r)) {
            (Some(i), Some(j)) => {
                let (n1, n2) = (a1.t_line[i].members.len(), a2.t_line[j].members.len());
                if n1 != n2 {
                    mismatches.push(IsoMismatch {
                        left_endpoint: l,
                        right_endpoint: r,
                        detail: format!("group sizes differ: {n1} vs {n2}"),
                    });
                } else {
                    matched.push((a1.t_line[i].members[0], a2.t_line[j].members[0]));
                }
            }
            _ => mismatches.push(IsoMismatch {
                left_endpoint: l,
                right_endpoint: r,
                detail: "endpoint missing from one of the atlases".into(),
            }),
        }
    }

    // Relation preservation on all matched representative pairs.
    let mut pairs_checked = 0usize;
    for i in 0..matched.len() {
        for j in (i + 1)..matched.len() {
            let c1 = classify_pair(m1, &a1.tips[matched[i].0], &a1.tips[matched[j].0], search, cfg)?;
            let c2 = classify_pair(m2, &a2.tips[matched[i].1], &a2.tips[matched[j].1], search, cfg)?;
            pairs_checked += 1;
            if c1 != c2 {
                mismatches.push(IsoMismatch {
                    left_endpoint: sorted[i].0,
                    right_endpoint: sorted[j].0,
                    detail: format!("relation mismatch: {:?} vs {:?}", c1, c2),
                });
            }
        }
    }

    Ok(IsoReport {
        pass: mismatches.is_empty(),
        pairs_checked,
        mismatches,
    })
}

/// JSON-exportable atlas summary with the relation matrix.
#[derive(Debug, Clone, Serialize)]
pub struct AtlasExport<T: Real> {
    pub metric: &'static str,
    pub t_line: Vec<AtlasEntry<T>>,
    pub strain: Vec<StrainEntry<T>>,
    pub jplus: Vec<T>,
    pub i_plus: bool,
    /// Pair classification codes over `ordered_indices` plus the full set
    /// in the last row/column.
    pub relations: Vec<Vec<&'static str>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtlasEntry<T: Real> {
    pub endpoint: T,
    pub members: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrainEntry<T: Real> {
    pub endpoint: T,
    pub seeds: Vec<T>,
}

/// Compute the relation matrix and assemble the exportable summary.
pub fn export_atlas<T: Real>(
    metric: &ConeField<T>,
    atlas: &BoundaryAtlas<T>,
    search: &WitnessSearch<T>,
    cfg: &NumericConfig<T>,
) -> Result<AtlasExport<T>> {
    let order = atlas.ordered_indices();
    let n = order.len() + 1;
    let mut relations = vec![vec![""; n]; n];
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            relations[a][b] = if a == b {
                PairClass::Equal.code()
            } else {
                classify_pair(metric, &atlas.tips[i], &atlas.tips[j], search, cfg)?.code()
            };
        }
    }
    for row in relations.iter_mut().take(n - 1) {
        row[n - 1] = PairClass::TimelikeForward.code();
    }
    for cell in relations[n - 1].iter_mut().take(n - 1) {
        *cell = PairClass::TimelikeBackward.code();
    }
    relations[n - 1][n - 1] = PairClass::Equal.code();

    Ok(AtlasExport {
        metric: atlas.metric_tag,
        t_line: atlas
            .t_line
            .iter()
            .map(|g| AtlasEntry {
                endpoint: g.endpoint,
                members: g.members.len(),
            })
            .collect(),
        strain: atlas
            .t_line
            .iter()
            .filter(|g| g.members.len() > 1)
            .map(|g| StrainEntry {
                endpoint: g.endpoint,
                seeds: g
                    .members
                    .iter()
                    .filter_map(|&m| atlas.tips[m].seed.map(|(_, r)| r))
                    .collect(),
            })
            .collect(),
        jplus: atlas
            .jplus
            .iter()
            .map(|&i| atlas.tips[i].right_limit().unwrap_or_else(|_| T::nan()))
            .collect(),
        i_plus: true,
        relations,
    })
}

/// Relation matrix as CSV (codes over the deterministic tip order, the full
/// set last).
pub fn relations_csv(export: &AtlasExport<impl Real>) -> String {
    let mut out = String::new();
    for row in &export.relations {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
