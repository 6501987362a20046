//! The billiard map on the phase cylinder.
//!
//! Conventions: `s` increases counterclockwise, `t ∈ (0, π)` is measured from
//! the positive tangent towards the inward normal. The map preserves the
//! measure `sin t ds dt`.

use crate::error::{Error, Result};
use crate::numerics::brent_with_values;
use crate::table::Table;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Grazing guard: angles closer than this to `0` or `π` are rejected.
pub const T_MIN: f64 = 1e-7;

/// Step of the twist derivative.
pub const FD_STEP: f64 = 1e-6;

/// Base step of the Jacobian. Long chords make the map ill-conditioned, so
/// the Jacobian uses a larger step with Richardson extrapolation.
pub const JACOBIAN_STEP: f64 = 2e-5;

const BRACKET_GRID: usize = 64;

/// A point `(s, t)` of the phase cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub t: f64,
}

impl PhasePoint {
    pub fn new(s: f64, t: f64) -> Self {
        Self { s, t }
    }

    /// The time-reversal involution `(s, t) ↦ (s, π − t)`.
    pub fn reversed(self) -> Self {
        Self {
            s: self.s,
            t: PI - self.t,
        }
    }
}

/// One application of the map, with the data needed to lift it.
#[derive(Clone, Copy, Debug)]
pub struct Bounce {
    pub next: PhasePoint,
    /// Counterclockwise arclength from the start to the next impact, in `(0, l)`.
    pub advance: f64,
    /// Length of the chord.
    pub chord: f64,
}

fn check_angle(t: f64) -> Result<()> {
    if !t.is_finite() || t < T_MIN || t > PI - T_MIN {
        return Err(Error::Grazing { t, guard: T_MIN });
    }
    Ok(())
}

/// The billiard map, returning the next impact together with the arclength
/// advance and the chord length.
pub fn bounce(table: &Table, p: PhasePoint) -> Result<Bounce> {
    check_angle(p.t)?;
    let g = table.geometry();
    let l = table.length();
    let s0 = table.wrap(p.s);
    let f0 = table.frame(s0);
    let v = f0.tangent * p.t.cos() + f0.normal * p.t.sin();
    let left = g.rotate(&f0.point, &v);
    // Side of the boundary point at s0 + u relative to the chord line; the
    // unique sign change on (0, l) is the next impact.
    let mut side = |u: f64| -> Result<f64> { Ok(g.dot(&(table.point(s0 + u) - f0.point), &left)) };

    let h = l / BRACKET_GRID as f64;
    let mut lo = (0.0, f64::NAN);
    let mut hi = (0.0, f64::NAN);
    let mut prev: Option<(f64, f64)> = None;
    for k in 1..BRACKET_GRID {
        let u = k as f64 * h;
        let val = side(u)?;
        if val >= 0.0 {
            match prev {
                Some(pr) => lo = pr,
                None => {
                    // the root lies in (0, h): shrink towards 0
                    let mut a = u;
                    let mut fa = val;
                    loop {
                        let b = 0.5 * a;
                        let fb = side(b)?;
                        if fb < 0.0 {
                            lo = (b, fb);
                            hi = (a, fa);
                            break;
                        }
                        if b < 1e-14 * l {
                            return Err(Error::Solver(format!("no chord bracket near s = {s0}")));
                        }
                        a = b;
                        fa = fb;
                    }
                }
            }
            if hi.1.is_nan() {
                hi = (u, val);
            }
            break;
        }
        prev = Some((u, val));
    }
    if hi.1.is_nan() {
        // the root lies in (l − h, l): shrink towards l
        let (mut a, mut fa) = prev.expect("grid has interior points");
        let mut gap = h;
        loop {
            gap *= 0.5;
            let b = l - gap;
            let fb = side(b)?;
            if fb >= 0.0 {
                lo = (a, fa);
                hi = (b, fb);
                break;
            }
            if gap < 1e-14 * l {
                return Err(Error::Solver(format!("no chord bracket near s = {s0}")));
            }
            a = b;
            fa = fb;
        }
    }
    let u = brent_with_values(&mut side, lo.0, lo.1, hi.0, hi.1, 1e-15)?;
    let s1 = table.wrap(s0 + u);
    let f1 = table.frame(s1);
    let arrive = -g
        .direction(&f1.point, &f0.point)
        .ok_or(Error::UndefinedDirection)?;
    let t1 = (-g.dot(&arrive, &f1.normal)).atan2(g.dot(&arrive, &f1.tangent));
    Ok(Bounce {
        next: PhasePoint { s: s1, t: t1 },
        advance: u,
        chord: g.dist(&f0.point, &f1.point),
    })
}

/// The billiard map `φ`.
pub fn step(table: &Table, p: PhasePoint) -> Result<PhasePoint> {
    bounce(table, p).map(|b| b.next)
}

/// The inverse map `σ ∘ φ ∘ σ`, with the (positive) arclength retreat.
pub fn bounce_back(table: &Table, p: PhasePoint) -> Result<(PhasePoint, f64)> {
    let b = bounce(table, p.reversed())?;
    Ok((b.next.reversed(), table.length() - b.advance))
}

/// `∂s₁/∂t₀` by central differences on the lifted `s₁`.
pub fn twist_derivative(table: &Table, p: PhasePoint) -> Result<f64> {
    let h = FD_STEP;
    let a = bounce(table, PhasePoint::new(p.s, p.t + h))?.advance;
    let b = bounce(table, PhasePoint::new(p.s, p.t - h))?.advance;
    Ok((a - b) / (2.0 * h))
}

/// Central-difference Jacobian `∂(s₁, t₁)/∂(s₀, t₀)` with step `h`, rows
/// `(s₁, t₁)`, columns `(s₀, t₀)`.
pub fn jacobian_with_step(table: &Table, p: PhasePoint, h: f64) -> Result<[[f64; 2]; 2]> {
    let eval = |s: f64, t: f64| -> Result<(f64, f64)> {
        let b = bounce(table, PhasePoint::new(s, t))?;
        Ok((s + b.advance, b.next.t))
    };
    let (sp, tp) = eval(p.s + h, p.t)?;
    let (sm, tm) = eval(p.s - h, p.t)?;
    let (sq, tq) = eval(p.s, p.t + h)?;
    let (sr, tr) = eval(p.s, p.t - h)?;
    let k = 0.5 / h;
    Ok([[(sp - sm) * k, (sq - sr) * k], [(tp - tm) * k, (tq - tr) * k]])
}

/// Central differences at steps `h` and `h/2`, Richardson-extrapolated.
pub fn jacobian(table: &Table, p: PhasePoint) -> Result<[[f64; 2]; 2]> {
    let a = jacobian_with_step(table, p, JACOBIAN_STEP)?;
    let b = jacobian_with_step(table, p, 0.5 * JACOBIAN_STEP)?;
    let r = |i: usize, j: usize| (4.0 * b[i][j] - a[i][j]) / 3.0;
    Ok([[r(0, 0), r(0, 1)], [r(1, 0), r(1, 1)]])
}

/// `|det J| · sin t₁ / sin t₀`, equal to 1 for a map preserving `sin t ds dt`.
pub fn measure_defect(table: &Table, p: PhasePoint) -> Result<f64> {
    let j = jacobian(table, p)?;
    let t1 = step(table, p)?.t;
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    Ok(det.abs() * t1.sin() / p.t.sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Why an orbit stopped early.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    /// Index of the state from which the failed step was attempted.
    pub at: i64,
    pub error: Error,
}

/// A finite piece of an orbit with lifted arclength coordinates.
///
/// `states[i]` is the iterate of index `first_index + i`; negative indices
/// are backward iterates.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub first_index: i64,
    pub states: Vec<PhasePoint>,
    pub lift: Vec<f64>,
    pub truncated: Option<Truncation>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.states.len() as i64 - 1
    }

    /// Lifted coordinate of the iterate with index `k`.
    pub fn lift_at(&self, k: i64) -> Option<f64> {
        let i = k - self.first_index;
        (i >= 0).then(|| self.lift.get(i as usize).copied()).flatten()
    }

    pub fn state_at(&self, k: i64) -> Option<PhasePoint> {
        let i = k - self.first_index;
        (i >= 0).then(|| self.states.get(i as usize).copied()).flatten()
    }

    /// Shifts every lifted coordinate by a multiple of the perimeter.
    pub fn shift_lift(&mut self, turns: i64, length: f64) {
        let d = turns as f64 * length;
        self.lift.iter_mut().for_each(|x| *x += d);
    }
}

/// `n` iterates forward or backward from `p`. The start state has lift `p.s`
/// reduced to `[0, l)`.
pub fn orbit(table: &Table, p: PhasePoint, n: usize, direction: Direction) -> Orbit {
    match direction {
        Direction::Forward => two_sided(table, p, 0, n),
        Direction::Backward => two_sided(table, p, n, 0),
    }
}

/// Iterates `back` steps backward and `fwd` steps forward from `p`, which gets
/// index 0.
pub fn two_sided(table: &Table, p: PhasePoint, back: usize, fwd: usize) -> Orbit {
    let start = PhasePoint::new(table.wrap(p.s), p.t);
    let mut truncated = None;

    let mut before = Vec::with_capacity(back);
    let (mut cur, mut lift) = (start, start.s);
    for k in 0..back {
        match bounce_back(table, cur) {
            Ok((prev, retreat)) => {
                cur = prev;
                lift -= retreat;
                before.push((cur, lift));
            }
            Err(error) => {
                truncated = Some(Truncation {
                    at: -(k as i64),
                    error,
                });
                break;
            }
        }
    }
    let first_index = -(before.len() as i64);
    let mut states: Vec<PhasePoint> = before.iter().rev().map(|x| x.0).collect();
    let mut lifts: Vec<f64> = before.iter().rev().map(|x| x.1).collect();
    states.push(start);
    lifts.push(start.s);

    let (mut cur, mut lift) = (start, start.s);
    for k in 0..fwd {
        match bounce(table, cur) {
            Ok(b) => {
                cur = b.next;
                lift += b.advance;
                states.push(cur);
                lifts.push(lift);
            }
            Err(error) => {
                truncated = Some(Truncation { at: k as i64, error });
                break;
            }
        }
    }
    Orbit {
        first_index,
        states,
        lift: lifts,
        truncated,
    }
}

/// Deviation of `φ(s, t)` from `(s + (2/κ(s)) t, t)`: returns
/// `(|s₁ − s − 2t/κ(s)|, |t₁ − t|)`.
pub fn small_angle_residual(table: &Table, p: PhasePoint) -> Result<(f64, f64)> {
    let b = bounce(table, p)?;
    let s0 = table.wrap(p.s);
    let l = table.length();
    for &j in table.jumps() {
        let d = (j - s0).rem_euclid(l);
        if d > 0.0 && d < b.advance {
            return Err(Error::Straddle(j));
        }
    }
    let kappa = table.curvature(s0);
    Ok(((b.advance - 2.0 * p.t / kappa).abs(), (b.next.t - p.t).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Geometry;
    use crate::table::disk_table;

    #[test]
    fn diametral_chord_on_disk() {
        let t = disk_table(Geometry::Hyperbolic, 1.0).unwrap();
        let b = bounce(&t, PhasePoint::new(0.3, PI / 2.0)).unwrap();
        assert!((b.advance - PI * 1f64.sinh()).abs() < 1e-12);
        assert!((b.next.t - PI / 2.0).abs() < 1e-12);
        assert!((b.chord - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disk_preserves_angle_near_grazing() {
        for g in [Geometry::Hyperbolic, Geometry::Spherical] {
            let t = disk_table(g, 0.3).unwrap();
            // relative accuracy degrades like 1e-16 / t² as the chord sag
            // approaches rounding level
            for &(a, tol) in &[(1e-6, 1e-4), (1e-4, 1e-7), (1e-3, 1e-10), (0.5, 1e-12), (2.0, 1e-12)] {
                let n = step(&t, PhasePoint::new(1.0, a)).unwrap();
                assert!((n.t - a).abs() < tol * a, "{g:?} {a} {}", n.t);
            }
        }
    }

    #[test]
    fn grazing_is_rejected() {
        let t = disk_table(Geometry::Hyperbolic, 1.0).unwrap();
        assert!(matches!(step(&t, PhasePoint::new(0.0, 1e-9)), Err(Error::Grazing { .. })));
        assert!(matches!(step(&t, PhasePoint::new(0.0, PI)), Err(Error::Grazing { .. })));
    }

    #[test]
    fn two_sided_orbit_indices() {
        let t = disk_table(Geometry::Hyperbolic, 1.0).unwrap();
        let o = two_sided(&t, PhasePoint::new(0.5, 1.0), 3, 4);
        assert_eq!(o.first_index, -3);
        assert_eq!(o.last_index(), 4);
        assert_eq!(o.state_at(0).unwrap().s, 0.5);
        for w in o.lift.windows(2) {
            assert!(w[1] > w[0] && w[1] - w[0] < t.length());
        }
    }
}
