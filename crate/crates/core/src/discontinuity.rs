//! Billiard dynamics near a curvature jump of the boundary.
//!
//! Near a point `p` where the one-sided curvatures differ (`κ₀` on the left,
//! `κ₁ < κ₀` on the right) a chord crossing `p` at small angle `t₀` leaves
//! at `t₁ ≈ √(κ₁/κ₀) t₀`. Orbits on an invariant circle through the strip
//! would then have to cross each other, which the monotone twist property
//! forbids. This module measures every ingredient of that argument.

use crate::billiard::{bounce, small_angle_residual, two_sided, Orbit, PhasePoint};
use crate::error::{Error, Result};
use crate::geom::osculating_angle;
use crate::numerics::brent;
use crate::table::{Table, JUMP_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;

/// Samples of `2/κ` per one-sided neighbourhood.
const NEIGHBOURHOOD_SAMPLES: usize = 256;

/// Maximal number of neighbourhood halvings.
const MAX_HALVINGS: usize = 40;

/// Angles of the ratio sweep used to measure `μ`.
pub const RATIO_SWEEP: [f64; 5] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

/// A curvature discontinuity, oriented so that `κ₁ < κ₀`.
///
/// `s_p` refers to the oriented table: the table itself, or its mirror image
/// when `mirrored` is set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpPoint {
    pub s_p: f64,
    /// Left curvature limit.
    pub kappa0: f64,
    /// Right curvature limit.
    pub kappa1: f64,
    pub mirrored: bool,
}

impl JumpPoint {
    /// The limit `√(κ₁/κ₀)` of the angle ratio.
    pub fn predicted_ratio(&self) -> f64 {
        (self.kappa1 / self.kappa0).sqrt()
    }

    /// The table in which this jump has `κ₁ < κ₀`.
    pub fn oriented<'a>(&self, table: &'a Table) -> Cow<'a, Table> {
        if self.mirrored {
            Cow::Owned(table.mirrored())
        } else {
            Cow::Borrowed(table)
        }
    }
}

/// All curvature jumps with positive one-sided limits.
pub fn jump_points(table: &Table) -> Vec<JumpPoint> {
    let l = table.length();
    let mut mirror: Option<Table> = None;
    let mut out = Vec::new();
    for &j in table.jumps() {
        let (left, right) = table.curvature_limits(j);
        if (left - right).abs() <= JUMP_TOL || left <= 0.0 || right <= 0.0 {
            continue;
        }
        if left > right {
            out.push(JumpPoint {
                s_p: j,
                kappa0: left,
                kappa1: right,
                mirrored: false,
            });
        } else {
            let m = mirror.get_or_insert_with(|| table.mirrored());
            let target = (l - j).rem_euclid(l);
            let circ = |x: f64| {
                let d = (x - target).rem_euclid(l);
                d.min(l - d)
            };
            let s_p = m
                .jumps()
                .iter()
                .copied()
                .min_by(|a, b| circ(*a).total_cmp(&circ(*b)))
                .unwrap_or(target);
            let (k0, k1) = m.curvature_limits(s_p);
            out.push(JumpPoint {
                s_p,
                kappa0: k0,
                kappa1: k1,
                mirrored: true,
            });
        }
    }
    out
}

/// Arclength from `s` forward to `s_p`, in `[0, l)`.
fn gap_to(table: &Table, s: f64, s_p: f64) -> f64 {
    (s_p - s).rem_euclid(table.length())
}

/// `τ(s)` on an oriented table: the angle at which the chord from `s` meets
/// the normal line at `s_p` orthogonally. `None` outside the domain.
pub fn tau(table: &Table, s_p: f64, s: f64) -> Option<f64> {
    let g = table.geometry();
    let d = gap_to(table, s, s_p);
    if !(d > 0.0 && d < 0.5 * table.length()) {
        return None;
    }
    let tp = table.frame(s_p).tangent;
    let f = table.frame(s);
    // the chord normal N cos τ − T sin τ must be orthogonal to the normal
    // line at p, whose own normal is the tangent at p
    let (a, b) = (g.dot(&f.normal, &tp), g.dot(&f.tangent, &tp));
    let t = a.atan2(b);
    (t > 0.0 && t < std::f64::consts::PI).then_some(t)
}

/// `τ(s)` for each `s` (in the oriented table's parameter, left of `s_p`).
pub fn tau_curve(table: &Table, jp: &JumpPoint, s_values: &[f64]) -> Vec<Option<f64>> {
    let t = jp.oriented(table);
    s_values.iter().map(|&s| tau(&t, jp.s_p, s)).collect()
}

/// Solves `τ(s₀) = t₀` for `s₀ < s_p`; returns the offset `s₀ − s_p < 0`.
fn tau_inverse(table: &Table, jp: &JumpPoint, t0: f64) -> Result<f64> {
    let f = |x: f64| -> Result<f64> {
        tau(table, jp.s_p, jp.s_p + x)
            .map(|v| v - t0)
            .ok_or_else(|| Error::Setup(format!("τ undefined at offset {x}")))
    };
    let mut lo = -t0 / jp.kappa0;
    let limit = 0.25 * table.length();
    while f(lo)? < 0.0 {
        lo *= 1.5;
        if -lo > limit {
            return Err(Error::Setup(format!("no chord with τ = {t0}")));
        }
    }
    let mut hi = 0.5 * lo;
    while f(hi)? > 0.0 {
        hi *= 0.5;
        if -hi < 1e-300 {
            return Err(Error::Setup(format!("no chord with τ = {t0}")));
        }
    }
    brent(f, lo, hi, 1e-15)
}

/// One chord across the jump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub t0: f64,
    pub t1: f64,
    pub ratio: f64,
    /// `s₀ − s_p` and `s₁ − s_p`.
    pub s0: f64,
    pub s1: f64,
    /// Distance from `p` to the chord.
    pub depth: f64,
    /// Osculating-curve predictions `f_κ₀(h)`, `f_κ₁(h)`.
    pub alpha0: f64,
    pub alpha1: f64,
}

/// Starts at `(s₀, τ(s₀))` with `τ(s₀) = t₀` and records `t₁/t₀`.
/// `table` must already be oriented by [`JumpPoint::oriented`].
pub fn jump_ratio_sample(table: &Table, jp: &JumpPoint, t0: f64) -> Result<RatioSample> {
    let g = table.geometry();
    let x0 = tau_inverse(table, jp, t0)?;
    let b = bounce(table, PhasePoint::new(jp.s_p + x0, t0))?;
    let x1 = x0 + b.advance;
    if !(x0 < 0.0 && x1 > 0.0) {
        return Err(Error::Setup(format!("chord from offset {x0} misses the jump")));
    }
    let f0 = table.frame(jp.s_p + x0);
    let v = f0.tangent * t0.cos() + f0.normal * t0.sin();
    let m = g.rotate(&f0.point, &v);
    let form = g.dot(&table.point(jp.s_p), &m);
    let depth = match g {
        crate::geom::Geometry::Hyperbolic => form.asinh(),
        crate::geom::Geometry::Spherical => form.clamp(-1.0, 1.0).asin(),
    }
    .abs();
    Ok(RatioSample {
        t0,
        t1: b.next.t,
        ratio: b.next.t / t0,
        s0: x0,
        s1: x1,
        depth,
        alpha0: osculating_angle(g, depth, jp.kappa0)?,
        alpha1: osculating_angle(g, depth, jp.kappa1)?,
    })
}

/// `t₁/t₀` for each `t₀`; approaches `√(κ₁/κ₀)` as `t₀ → 0`.
pub fn jump_ratio_experiment(table: &Table, jp: &JumpPoint, t0_list: &[f64]) -> Result<Vec<RatioSample>> {
    let t = jp.oriented(table);
    t0_list.par_iter().map(|&t0| jump_ratio_sample(&t, jp, t0)).collect()
}

/// Smallest `|k|` with `s′_k ∉ (s_k, s_{k+1})`, comparing lifted coordinates.
///
/// The lifts of `other` are shifted by whole turns so that `s′₀ ∈ (s₀, s₁)`;
/// failing that, the pair does not interleave.
pub fn detect_crossing(orbit: &Orbit, other: &Orbit, length: f64) -> Result<Option<i64>> {
    let (s0, s1, p0) = match (orbit.lift_at(0), orbit.lift_at(1), other.lift_at(0)) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::Precondition("orbits need indices 0 and 1".into())),
    };
    let turns = ((s0 - p0) / length).ceil();
    let shift = if p0 + turns * length > s0 { turns } else { turns + 1.0 } * length;
    if !(p0 + shift > s0 && p0 + shift < s1) {
        return Err(Error::Precondition(format!(
            "s′₀ = {p0} does not lie between s₀ = {s0} and s₁ = {s1}"
        )));
    }
    let outside = |k: i64| -> Option<bool> {
        let a = orbit.lift_at(k)?;
        let b = orbit.lift_at(k + 1)?;
        let x = other.lift_at(k)? + shift;
        Some(!(x > a && x < b))
    };
    let reach = orbit
        .last_index()
        .max(other.last_index())
        .max(-orbit.first_index)
        .max(-other.first_index);
    for m in 1..=reach {
        for k in [m, -m] {
            if outside(k) == Some(true) {
                return Ok(Some(k));
            }
        }
    }
    Ok(None)
}

/// Bounds of `2/κ` over one side of the neighbourhood.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideBounds {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

impl SideBounds {
    pub fn ratio(&self) -> f64 {
        self.m / self.big_m
    }
}

fn side_bounds(table: &Table, s_p: f64, width: f64, left: bool) -> SideBounds {
    let (kl, kr) = table.curvature_limits(s_p);
    let mut vals = vec![2.0 / if left { kl } else { kr }];
    for k in 1..=NEIGHBOURHOOD_SAMPLES {
        let x = width * k as f64 / NEIGHBOURHOOD_SAMPLES as f64;
        let s = if left { s_p - x } else { s_p + x };
        vals.push(2.0 / table.curvature(s));
    }
    SideBounds {
        m: vals.iter().copied().fold(f64::INFINITY, f64::min),
        big_m: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Small-angle check of `φ(s, t) ≈ (s + 2t/κ, t)` on one side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCheck {
    pub left: bool,
    pub t: f64,
    pub residual_over_t: f64,
}

/// One orbit pair of the crossing test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTrial {
    /// 1 when `t′₀ < (1−δ)t₀`, 2 when `t′₀ > (1+δ)t₁`.
    pub case: u8,
    pub t0: f64,
    pub t1: f64,
    pub t0_prime: f64,
    /// `s₀ − s_p`.
    pub s0: f64,
    pub crossing: Option<i64>,
    pub within_n: bool,
    /// Both orbits stayed in the neighbourhood on the side that matters.
    pub contained: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StripStatus {
    /// Every measured ingredient agrees with the absence of invariant circles
    /// in the strip. This is numerical evidence, not a proof.
    Evidence,
    Inconclusive,
}

/// Report of the strip experiment at one jump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub jump: JumpPoint,
    pub predicted_ratio: f64,
    pub ratio_sweep: Vec<RatioSample>,
    pub mu: f64,
    pub delta: f64,
    /// Half-width of the one-sided neighbourhoods.
    pub width: f64,
    pub halvings: usize,
    pub minus: SideBounds,
    pub plus: SideBounds,
    pub n: u64,
    /// `(n−1)m₋ − n(1−δ)M₋`, non-negative when case 1 applies.
    pub case1_margin: f64,
    /// `(n−1)m₊(1+δ) − nM₊`, non-negative when case 2 applies.
    pub case2_margin: f64,
    pub taylor: Vec<TaylorCheck>,
    pub trials: Vec<PairTrial>,
    /// Candidate strip `[s_min, s_max] × [0, t_max)` in offsets from `s_p`.
    pub strip: Option<[f64; 3]>,
    pub status: StripStatus,
    pub reason: String,
}

/// The two orbits of a crossing test: from `(s₀, τ(s₀))` with `τ(s₀) = t₀`
/// and from `(s_p, t′₀)`, `steps` iterates each way, lifts relative to `s_p`.
/// `table` must already be oriented by [`JumpPoint::oriented`].
pub fn orbit_pair(table: &Table, jp: &JumpPoint, t0: f64, t0_prime: f64, steps: usize) -> Result<(Orbit, Orbit)> {
    let x0 = tau_inverse(table, jp, t0)?;
    let mut a = two_sided(table, PhasePoint::new(jp.s_p + x0, t0), steps, steps + 1);
    let mut b = two_sided(table, PhasePoint::new(jp.s_p, t0_prime), steps, steps + 1);
    let da = a.lift_at(0).expect("index 0 exists") - x0;
    let db = b.lift_at(0).expect("index 0 exists");
    a.lift.iter_mut().for_each(|x| *x -= da);
    b.lift.iter_mut().for_each(|x| *x -= db);
    Ok((a, b))
}

fn inconclusive(mut r: StripReport, reason: &str) -> StripReport {
    r.status = StripStatus::Inconclusive;
    r.reason = reason.into();
    r
}

/// Runs the strip experiment at `jp`.
pub fn hubacher_strip(table: &Table, jp: &JumpPoint) -> Result<StripReport> {
    let t = jp.oriented(table);
    let table = t.as_ref();
    let l = table.length();
    if !(jp.kappa0 > jp.kappa1 && jp.kappa1 > 0.0) {
        return Err(Error::Precondition("jump needs κ₀ > κ₁ > 0".into()));
    }

    let sweep = RATIO_SWEEP
        .par_iter()
        .map(|&t0| jump_ratio_sample(table, jp, t0))
        .collect::<Result<Vec<_>>>()?;
    let mu = sweep
        .iter()
        .map(|r| r.ratio)
        .fold(jp.predicted_ratio(), f64::max);
    let delta = 0.5 * (1.0 - mu);

    // the neighbourhood stays clear of the other jumps
    let clearance = table
        .jumps()
        .iter()
        .map(|&j| {
            let d = (j - jp.s_p).rem_euclid(l);
            d.min(l - d)
        })
        .filter(|&d| d > 1e-9)
        .fold(0.5 * l, f64::min);
    let mut width = 0.45 * clearance;
    let mut halvings = 0;
    let ok = |b: &SideBounds| b.ratio() > 1.0 / (1.0 + delta);
    let (mut minus, mut plus) = (side_bounds(table, jp.s_p, width, true), side_bounds(table, jp.s_p, width, false));
    while !(ok(&minus) && ok(&plus)) && halvings < MAX_HALVINGS {
        width *= 0.5;
        halvings += 1;
        minus = side_bounds(table, jp.s_p, width, true);
        plus = side_bounds(table, jp.s_p, width, false);
    }

    let mut report = StripReport {
        jump: *jp,
        predicted_ratio: jp.predicted_ratio(),
        ratio_sweep: sweep,
        mu,
        delta,
        width,
        halvings,
        minus,
        plus,
        n: 0,
        case1_margin: f64::NAN,
        case2_margin: f64::NAN,
        taylor: Vec::new(),
        trials: Vec::new(),
        strip: None,
        status: StripStatus::Evidence,
        reason: String::new(),
    };
    if !(delta > 0.0) {
        return Ok(inconclusive(report, "measured ratio does not stay below 1"));
    }
    if !(ok(&minus) && ok(&plus)) {
        return Ok(inconclusive(report, "curvature ratio conditions fail at every scale"));
    }

    let (m_m, big_m_m) = (minus.m, minus.big_m);
    let (m_p, big_m_p) = (plus.m, plus.big_m);
    let n1 = (m_m / (m_m - (1.0 - delta) * big_m_m)).ceil();
    let n2 = ((1.0 + delta) * m_p / (m_p * (1.0 + delta) - big_m_p)).ceil();
    let n = n1.max(n2).max(1.0);
    report.n = n as u64;
    report.case1_margin = (n - 1.0) * m_m - n * (1.0 - delta) * big_m_m;
    report.case2_margin = (n - 1.0) * m_p * (1.0 + delta) - n * big_m_p;

    for left in [true, false] {
        for tt in [1e-2, 1e-3, 1e-4] {
            // start far enough from the jump that one step stays on this side
            let s = if left {
                jp.s_p - 0.5 * width - 4.0 * tt / jp.kappa1
            } else {
                jp.s_p + 0.5 * width
            };
            if let Ok((rs, _)) = small_angle_residual(table, PhasePoint::new(s, tt)) {
                report.taylor.push(TaylorCheck {
                    left,
                    t: tt,
                    residual_over_t: rs / tt,
                });
            }
        }
    }

    // angles small enough for n + 1 steps to stay within the neighbourhood
    let steps = report.n as usize + 1;
    let t_top = 0.5 * width / ((n + 3.0) * big_m_m.max(big_m_p));
    let scales = [1.0, 0.5, 0.25];
    let trials: Vec<PairTrial> = scales
        .par_iter()
        .flat_map_iter(|&scale| {
            let t0 = t_top * scale;
            let mut out = Vec::new();
            let probe = match jump_ratio_sample(table, jp, t0) {
                Ok(p) => p,
                Err(_) => return out.into_iter(),
            };
            let cases = [
                (1u8, 0.5 * (1.0 - delta) * t0),
                (1u8, 0.95 * (1.0 - delta) * t0),
                (2u8, 1.05 * (1.0 + delta) * probe.t1),
                (2u8, 1.5 * (1.0 + delta) * probe.t1),
            ];
            for (case, tp) in cases {
                let Ok((a, b)) = orbit_pair(table, jp, t0, tp, steps) else {
                    continue;
                };
                let crossing = detect_crossing(&a, &b, l).ok().flatten();
                let contained = if case == 1 {
                    (-(steps as i64)..=0).all(|k| {
                        a.lift_at(k).is_some_and(|x| x > -width && x < 0.0)
                            && b.lift_at(k).is_some_and(|x| x > -width && x <= 0.0)
                    })
                } else {
                    (1..=steps as i64).all(|k| {
                        a.lift_at(k).is_some_and(|x| x > 0.0 && x < width)
                            && b.lift_at(k).is_some_and(|x| x > 0.0 && x < width)
                    })
                };
                out.push(PairTrial {
                    case,
                    t0,
                    t1: probe.t1,
                    t0_prime: tp,
                    s0: probe.s0,
                    crossing,
                    within_n: crossing.is_some_and(|k| k.unsigned_abs() <= report.n),
                    contained,
                });
            }
            out.into_iter()
        })
        .collect();
    report.trials = trials;

    let smallest = report
        .trials
        .iter()
        .map(|p| (p.s0, p.t0))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let largest = report
        .trials
        .iter()
        .map(|p| p.s0)
        .min_by(|a, b| a.total_cmp(b));
    if let (Some((b, tb)), Some(a)) = (smallest, largest) {
        report.strip = Some([a, b, tb]);
    }

    if report.case1_margin < 0.0 || report.case2_margin < 0.0 {
        return Ok(inconclusive(report, "case inequalities fail"));
    }
    if !report.trials.iter().any(|p| p.within_n && p.contained) {
        return Ok(inconclusive(report, "no orbit pair crossed within n steps"));
    }
    report.reason = "ratio jump, case inequalities and orbit crossings all measured; \
                     evidence consistent with a caustic-free strip, not a proof"
        .into();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Geometry;
    use crate::string::{string_table, ConvexCaustic};
    use crate::table::disk_table;

    fn triangle(g: Geometry) -> Table {
        string_table(&ConvexCaustic::regular_polygon(g, 3, 0.3).unwrap(), 0.2).unwrap()
    }

    #[test]
    fn osculating_angle_on_a_disk() {
        // on a circle the chord orthogonal to the normal at p has angle
        // exactly f_κ(h), h its distance from p
        for g in [Geometry::Hyperbolic, Geometry::Spherical] {
            let t = disk_table(g, 0.8).unwrap();
            let jp = JumpPoint {
                s_p: 1.0,
                kappa0: t.curvature(1.0),
                kappa1: t.curvature(1.0),
                mirrored: false,
            };
            for t0 in [0.3, 0.05, 0.004] {
                let r = jump_ratio_sample(&t, &jp, t0).unwrap();
                assert!((r.alpha0 - t0).abs() < 1e-9 * t0.max(1e-2), "{g:?} {t0} {}", r.alpha0);
                assert!((r.ratio - 1.0).abs() < 1e-9);
                assert!((r.s0 + r.s1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tau_decreases_to_zero() {
        let t = triangle(Geometry::Hyperbolic);
        let jp = jump_points(&t)[0];
        let ot = jp.oriented(&t);
        let mut prev = f64::INFINITY;
        for k in (1..=20).rev() {
            let s = jp.s_p - 0.005 * k as f64;
            let v = tau(&ot, jp.s_p, s).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.005 * jp.kappa0 * 1.01);
        // Gauss-Bonnet: τ(s₁) − τ(s₂) ≈ ∫κ
        let (s1, s2) = (jp.s_p - 0.02, jp.s_p - 0.019);
        let d = tau(&ot, jp.s_p, s1).unwrap() - tau(&ot, jp.s_p, s2).unwrap();
        let integral = 0.001 * ot.curvature(0.5 * (s1 + s2));
        assert!((d - integral).abs() < 0.05 * integral, "{d} {integral}");
    }

    #[test]
    fn triangle_jumps_are_oriented() {
        let t = triangle(Geometry::Hyperbolic);
        let jps = jump_points(&t);
        assert_eq!(jps.len(), 6);
        for jp in &jps {
            assert!(jp.kappa0 > jp.kappa1 && jp.kappa1 > 0.0);
            let ot = jp.oriented(&t);
            let (l, r) = ot.curvature_limits(jp.s_p);
            assert!((l - jp.kappa0).abs() < 1e-9 && (r - jp.kappa1).abs() < 1e-9, "{jp:?} {l} {r}");
        }
        assert!(jumps_none(&disk_table(Geometry::Hyperbolic, 1.0).unwrap()));
    }

    fn jumps_none(t: &Table) -> bool {
        jump_points(t).is_empty()
    }

    #[test]
    fn synthetic_crossing() {
        let mk = |lift: Vec<f64>| Orbit {
            first_index: 0,
            states: lift.iter().map(|&s| PhasePoint::new(s, 0.1)).collect(),
            lift,
            truncated: None,
        };
        let a = mk(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = mk(vec![0.5, 1.5, 2.5, 4.2, 4.5]);
        assert_eq!(detect_crossing(&a, &b, 100.0).unwrap(), Some(3));
        let c = mk(vec![1.5, 2.0]);
        assert!(matches!(detect_crossing(&a, &c, 100.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn rotations_on_a_disk_never_cross() {
        let t = disk_table(Geometry::Hyperbolic, 1.0).unwrap();
        let a = two_sided(&t, PhasePoint::new(0.0, 0.4), 30, 30);
        let b = two_sided(&t, PhasePoint::new(0.3, 0.4), 30, 30);
        assert_eq!(detect_crossing(&a, &b, t.length()).unwrap(), None);
    }
}
