//! Brute-force chronology oracle via lattice reachability.
//!
//! Nodes of a uniform lattice over a box are connected by straight steps that
//! are strictly inside the future cone at both endpoints. Along any straight
//! segment the ray coordinate `t/x` is monotone, and the cone coefficient is
//! monotone in it, so endpoint admission bounds the coefficient on the whole
//! segment: every admitted step is a strictly timelike segment and lattice
//! reachability is a sound inner approximation of the chronology.
//!
//! Steps reach across up to the full width of the box. Single-column steps
//! alone cannot approximate cones wider than unit slope (a lattice step with
//! `|dx| = h` must climb at least `h`), so completeness within the target
//! band requires the long strides.

use serde::Serialize;

use crate::conefield::{ConeField, Point, Ternary};
use crate::chronology::{chron_rel, past_boundary_value};
use crate::error::{Error, Result};
use crate::nullflow::NumericConfig;
use crate::scalar::{real, to_f64, Real};

/// Closed coordinate box `[t_min, t_max] x [x_min, x_max]` with `x_max < 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LatticeBox<T: Real> {
    pub t_min: T,
    pub t_max: T,
    pub x_min: T,
    pub x_max: T,
}

/// Row subdivision of the lattice: rows are spaced `h / ROW_REFINE` while
/// columns stay at `h`, which cuts the climb quantization of long strides
/// without touching the nominal spacing.
const ROW_REFINE: usize = 2;

/// Lattice reachability structure for one cone field.
#[derive(Debug, Clone)]
pub struct GridOracle<T: Real> {
    metric: ConeField<T>,
    bbox: LatticeBox<T>,
    h: T,
    nt: usize,
    nx: usize,
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl<T: Real> GridOracle<T> {
    /// Build the lattice and its admissible-step adjacency. Deterministic.
    pub fn build(metric: &ConeField<T>, bbox: LatticeBox<T>, h: T) -> Result<Self> {
        if !(bbox.t_min < bbox.t_max && bbox.x_min < bbox.x_max) || bbox.x_max >= T::zero() {
            return Err(Error::BadLatticeBox);
        }
        if h <= T::zero()
            || h > (bbox.t_max - bbox.t_min)
            || h > (bbox.x_max - bbox.x_min)
        {
            return Err(Error::SpacingTooLarge(to_f64(h)));
        }
        let nt = ((bbox.t_max - bbox.t_min) / h)
            .round()
            .to_usize()
            .unwrap_or(0)
            * ROW_REFINE
            + 1;
        let nx = ((bbox.x_max - bbox.x_min) / h)
            .round()
            .to_usize()
            .unwrap_or(0)
            + 1;
        let node_count = nt * nx;

        let h_row = h / real::<T>(ROW_REFINE as f64);
        let t_of = |i: usize| bbox.t_min + h_row * real::<T>(i as f64);
        let x_of = |j: usize| bbox.x_min + h * real::<T>(j as f64);

        let mut offsets: Vec<u32> = Vec::with_capacity(node_count + 1);
        let mut targets: Vec<u32> = Vec::new();
        offsets.push(0);

        let max_span = nx as i64 - 1;
        for i in 0..nt {
            for j in 0..nx {
                let t0 = t_of(i);
                let x0 = x_of(j);
                let b0 = metric.beta_at_coords(t0, x0);
                // Vertical step.
                if i + 1 < nt {
                    targets.push(((i + 1) * nx + j) as u32);
                }
                for dj in -max_span..=max_span {
                    if dj == 0 {
                        continue;
                    }
                    let j1 = j as i64 + dj;
                    if j1 < 0 || j1 >= nx as i64 {
                        continue;
                    }
                    let x1 = x_of(j1 as usize);
                    let refine = real::<T>(ROW_REFINE as f64);
                    let djf = real::<T>(dj.unsigned_abs() as f64);
                    // Smallest admissible climb in fine rows; the arrival
                    // coefficient shrinks as di grows, so the scan is short.
                    let mut di = (b0.sqrt() * djf * refine)
                        .floor()
                        .to_i64()
                        .unwrap_or(0)
                        .max(1);
                    let admitted = loop {
                        if i as i64 + di >= nt as i64 {
                            break None;
                        }
                        let dif = real::<T>(di as f64) / refine;
                        let lhs = dif * dif;
                        let rhs0 = b0 * djf * djf;
                        let t1 = t_of((i as i64 + di) as usize);
                        let b1 = metric.beta_at_coords(t1, x1);
                        let rhs1 = b1 * djf * djf;
                        if lhs >= rhs0 && lhs >= rhs1 {
                            break Some(di);
                        }
                        di += 1;
                        if di > (dj.unsigned_abs() as i64 + 1) * ROW_REFINE as i64 {
                            break None;
                        }
                    };
                    if let Some(di) = admitted {
                        targets.push((((i as i64 + di) as usize) * nx + j1 as usize) as u32);
                    }
                }
                offsets.push(targets.len() as u32);
            }
        }

        Ok(GridOracle {
            metric: *metric,
            bbox,
            h,
            nt,
            nx,
            offsets,
            targets,
        })
    }

    pub fn metric(&self) -> &ConeField<T> {
        &self.metric
    }

    pub fn bbox(&self) -> LatticeBox<T> {
        self.bbox
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.nt * self.nx
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Snap to the nearest node; exact midpoints resolve toward the lower
    /// index in both coordinates.
    fn snap(&self, p: Point<T>) -> Result<usize> {
        let h_row = self.h / real::<T>(ROW_REFINE as f64);
        let slack = self.h * real::<T>(0.5 + 1e-9);
        if p.t() < self.bbox.t_min - slack
            || p.t() > self.bbox.t_max + slack
            || p.x() < self.bbox.x_min - slack
            || p.x() > self.bbox.x_max + slack
        {
            return Err(Error::OutsideBox {
                t: to_f64(p.t()),
                x: to_f64(p.x()),
            });
        }
        let half = real::<T>(0.5);
        let idx = |v: T, lo: T, step: T, n: usize| -> usize {
            let f = (v - lo) / step;
            let i = (f - half).ceil();
            i.max(T::zero())
                .min(real::<T>((n - 1) as f64))
                .to_usize()
                .unwrap()
        };
        let i = idx(p.t(), self.bbox.t_min, h_row, self.nt);
        let j = idx(p.x(), self.bbox.x_min, self.h, self.nx);
        Ok(i * self.nx + j)
    }

    /// Breadth-first reachability between the snapped nodes.
    pub fn chron(&self, p: Point<T>, q: Point<T>) -> Result<bool> {
        let src = self.snap(p)?;
        let dst = self.snap(q)?;
        // Strictly causal steps only climb, so a target at or below the
        // source row can be rejected immediately.
        if dst / self.nx <= src / self.nx && dst != src
            && dst / self.nx < src / self.nx {
                return Ok(false);
            }
        let mut visited = vec![false; self.node_count()];
        let mut queue = std::collections::VecDeque::with_capacity(256);
        visited[src] = true;
        queue.push_back(src as u32);
        while let Some(node) = queue.pop_front() {
            let n = node as usize;
            let lo = self.offsets[n] as usize;
            let hi = self.offsets[n + 1] as usize;
            for &tgt in &self.targets[lo..hi] {
                let t = tgt as usize;
                if !visited[t] {
                    if t == dst {
                        return Ok(true);
                    }
                    visited[t] = true;
                    queue.push_back(tgt);
                }
            }
        }
        Ok(false)
    }
}

/// One oracle-vs-continuum disagreement.
#[derive(Debug, Clone, Serialize)]
pub struct Disagreement<T: Real> {
    pub p: (T, T),
    pub q: (T, T),
    pub oracle_reachable: bool,
    pub continuous: Ternary,
    /// Vertical distance of `q`'s time from the null boundary of `p`'s
    /// future through the pair, `|t_p - b_q(x_p)|`.
    pub band_distance: T,
}

/// Cross-validation report for one metric.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport<T: Real> {
    pub metric: &'static str,
    pub samples: usize,
    pub compared: usize,
    pub disagreements: usize,
    /// Disagreements farther than `2h` from the cone boundary. Target: zero.
    pub violations: Vec<Disagreement<T>>,
    pub max_in_band_distance: T,
}

impl<T: Real> CrosscheckReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample point pairs in the oracle box and compare lattice reachability
/// with the continuous chronology. Every disagreement must lie within `2h`
/// of the continuous cone boundary, measured through the boundary function.
pub fn crosscheck<T: Real>(
    metric: &ConeField<T>,
    oracle: &GridOracle<T>,
    n_samples: usize,
    seed: u64,
    cfg: &NumericConfig<T>,
) -> Result<CrosscheckReport<T>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bb = oracle.bbox();
    let (t_lo, t_hi) = (to_f64(bb.t_min), to_f64(bb.t_max));
    let (x_lo, x_hi) = (to_f64(bb.x_min), to_f64(bb.x_max));
    let band = real::<T>(2.0) * oracle.spacing();

    let mut compared = 0usize;
    let mut disagreements = 0usize;
    let mut violations = Vec::new();
    let mut max_in_band = T::zero();

    for _ in 0..n_samples {
        let p = Point::new(
            real::<T>(rng.gen_range(t_lo..t_hi)),
            real::<T>(rng.gen_range(x_lo..x_hi)),
        )?;
        let q = Point::new(
            real::<T>(rng.gen_range(t_lo..t_hi)),
            real::<T>(rng.gen_range(x_lo..x_hi)),
        )?;
        let continuous = chron_rel(metric, p, q, cfg)?;
        if continuous == Ternary::Boundary {
            continue;
        }
        compared += 1;
        let reachable = oracle.chron(p, q)?;
        let agree = match continuous {
            Ternary::Inside => reachable,
            Ternary::Outside => !reachable,
            Ternary::Boundary => true,
        };
        if !agree {
            disagreements += 1;
            let (b, _) = past_boundary_value(metric, q, p.x(), cfg)?;
            let dist = (p.t() - b).abs();
            let d = Disagreement {
                p: (p.t(), p.x()),
                q: (q.t(), q.x()),
                oracle_reachable: reachable,
                continuous,
                band_distance: dist,
            };
            if dist > band {
                violations.push(d);
            } else if dist > max_in_band {
                max_in_band = dist;
            }
        }
    }

    Ok(CrosscheckReport {
        metric: metric.kind().tag(),
        samples: n_samples,
        compared,
        disagreements,
        violations,
        max_in_band_distance: max_in_band,
    })
}
