//! Certificates that a convex curve is a caustic of a table.

use crate::billiard::{step, PhasePoint};
use crate::error::{Error, Result};
use crate::geom::{Geometry, Vec3};
use crate::numerics::{golden_min, periodic_max};
use crate::string::{CausticShape, ConvexCaustic};
use crate::table::Table;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default verdict threshold for tangency and mirror residuals.
pub const VERIFY_TOL: f64 = 1e-6;

/// Default number of boundary samples used by [`verify_caustic`].
pub const VERIFY_SAMPLES: usize = 64;

const GRID: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausticReport {
    pub caustic: String,
    pub samples: usize,
    pub max_tangency_residual: f64,
    pub lazutkin_mean: f64,
    /// Standard deviation of the sampled Lazutkin parameters.
    pub lazutkin_spread: f64,
    /// `max − min` of the sampled Lazutkin parameters.
    pub lazutkin_range: f64,
    pub mirror_residual_max: f64,
    pub delta_gamma: f64,
    pub bar_delta_gamma: f64,
    pub tolerance: f64,
    pub verified: bool,
}

fn signed_line_distance(g: Geometry, b: f64) -> f64 {
    match g {
        Geometry::Hyperbolic => b.asinh(),
        Geometry::Spherical => b.clamp(-1.0, 1.0).asin(),
    }
}

/// Minimum over the caustic of `⟨x, n⟩` for a unit normal `n`; the signed
/// distance from the caustic to the geodesic `{⟨x, n⟩ = 0}` is its
/// `asinh`/`asin`.
fn min_form(caustic: &ConvexCaustic, n: &Vec3) -> f64 {
    let g = caustic.geometry();
    match caustic.shape() {
        CausticShape::Polygon(v) => {
            let k = v.len();
            let mut best = f64::INFINITY;
            for i in 0..k {
                let (a, b) = (&v[i], &v[(i + 1) % k]);
                best = best.min(g.dot(a, n));
                if g == Geometry::Hyperbolic {
                    // ⟨γ(τ), n⟩ = α cosh τ + β sinh τ may dip inside the edge
                    let e = g.dist(a, b);
                    let dir = g.direction(a, b).expect("distinct vertices");
                    let (al, be) = (g.dot(a, n), g.dot(&dir, n));
                    if al > be.abs() {
                        let tau = (-be / al).atanh();
                        if tau > 0.0 && tau < e {
                            best = best.min(al * tau.cosh() + be * tau.sinh());
                        }
                    }
                }
            }
            best
        }
        CausticShape::Curve(c) => {
            let l = c.length();
            let m = 512;
            let h = l / m as f64;
            let k = (0..m)
                .map(|k| (k, g.dot(&c.point(k as f64 * h), n)))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
                .0;
            let s0 = k as f64 * h;
            golden_min(|s| Ok(g.dot(&c.point(s), n)), s0 - h, s0 + h, 1e-12)
                .expect("infallible objective")
                .1
        }
    }
}

/// Signed distance from the caustic to the reflected chord after the chord
/// from `s` tangent to the caustic, forward (`P₁`) or backward (`P₂`).
/// Positive means the caustic is detached, negative that the chord cuts it.
pub fn signed_tangency_residual(table: &Table, caustic: &ConvexCaustic, s: f64, forward: bool) -> Result<f64> {
    let g = table.geometry();
    if caustic.geometry() != g {
        return Err(Error::MixedGeometry);
    }
    let f = table.frame(s);
    let tan = caustic.tangency(&f.point, None)?;
    let target = if forward { tan.p1 } else { tan.p2 };
    let v = g.direction(&f.point, &target).ok_or(Error::UndefinedDirection)?;
    let t0 = g.dot(&v, &f.normal).atan2(g.dot(&v, &f.tangent));
    if !(t0 > 0.0) {
        return Err(Error::Containment("caustic is not strictly inside the table".into()));
    }
    let p1 = step(table, PhasePoint::new(s, t0))?;
    let f1 = table.frame(p1.s);
    let w = f1.tangent * p1.t.cos() + f1.normal * p1.t.sin();
    // forward motion keeps the caustic on the left, backward on the right
    let mut n = g.rotate(&f1.point, &w);
    if !forward {
        n = -n;
    }
    Ok(signed_line_distance(g, min_form(caustic, &n)))
}

/// `|signed distance|` between the caustic and the forward reflected chord.
pub fn tangency_residual(table: &Table, caustic: &ConvexCaustic, s: f64) -> Result<f64> {
    Ok(signed_tangency_residual(table, caustic, s, true)?.abs())
}

/// `|1/tan(a) + 1/tan(b) − 2κ/sin θ|` (with `tanh` on H²) at `point(s)`,
/// `θ` the angle of the forward tangent chord.
///
/// At a curvature jump the equation holds separately for each one-sided
/// limit, and the tangent point switches vertex; it is evaluated just to the
/// right of the jump there.
pub fn mirror_residual(table: &Table, caustic: &ConvexCaustic, s: f64) -> Result<f64> {
    let g = table.geometry();
    let l = table.length();
    let near_jump = table.jumps().iter().any(|&j| {
        let d = (s - j).rem_euclid(l);
        d.min(l - d) < 1e-9
    });
    let s = if near_jump { s + 1e-9 } else { s };
    let f = table.frame(s);
    let tan = caustic.tangency(&f.point, None)?;
    let v = g.direction(&f.point, &tan.p1).ok_or(Error::UndefinedDirection)?;
    let theta = g.dot(&v, &f.normal).atan2(g.dot(&v, &f.tangent));
    let lhs = 1.0 / g.tan_l(tan.a1) + 1.0 / g.tan_l(tan.a2);
    let rhs = 2.0 * f.curvature / theta.sin();
    Ok((lhs - rhs).abs())
}

/// `(δ_γ, δ̄_γ)`: the largest distance from the caustic to the boundary and
/// from the boundary to the caustic.
pub fn distances(table: &Table, caustic: &ConvexCaustic) -> Result<(f64, f64)> {
    let per = caustic.perimeter();
    let dmin = (0..GRID)
        .into_par_iter()
        .map(|k| table.signed_distance(&caustic.point_at(per * k as f64 / GRID as f64)))
        .reduce(|| f64::INFINITY, f64::min);
    if dmin <= 0.0 {
        return Err(Error::Containment("caustic is not strictly inside the table".into()));
    }
    let (_, delta) = periodic_max(|u| Ok(table.signed_distance(&caustic.point_at(u))), per, GRID, 1e-10)?;
    let (_, bar) = periodic_max(|s| Ok(caustic.distance_to(&table.point(s))), table.length(), GRID, 1e-10)?;
    Ok((delta, bar))
}

/// Full certificate on `samples` equally spaced boundary points.
pub fn verify_caustic(table: &Table, caustic: &ConvexCaustic, samples: usize, tolerance: f64) -> Result<CausticReport> {
    if caustic.geometry() != table.geometry() {
        return Err(Error::MixedGeometry);
    }
    let (delta_gamma, bar_delta_gamma) = distances(table, caustic)?;
    let l = table.length();
    let rows: Vec<(f64, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let s = l * k as f64 / samples as f64;
            let fwd = signed_tangency_residual(table, caustic, s, true)?.abs();
            let bwd = signed_tangency_residual(table, caustic, s, false)?.abs();
            let lz = caustic.tangency(&table.point(s), None)?.lazutkin();
            let mr = mirror_residual(table, caustic, s)?;
            Ok((fwd.max(bwd), lz, mr))
        })
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    let tangency = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let mirror = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let mean = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / n;
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |a, r| (a.0.min(r.1), a.1.max(r.1)));
    Ok(CausticReport {
        caustic: caustic.label().to_string(),
        samples,
        max_tangency_residual: tangency,
        lazutkin_mean: mean,
        lazutkin_spread: var.sqrt(),
        lazutkin_range: hi - lo,
        mirror_residual_max: mirror,
        delta_gamma,
        bar_delta_gamma,
        tolerance,
        verified: tangency < tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::disk_table;

    #[test]
    fn concentric_disk_caustic() {
        let g = Geometry::Hyperbolic;
        let t = disk_table(g, 1.0).unwrap();
        let c = ConvexCaustic::circle(g, 0.6).unwrap();
        let r = verify_caustic(&t, &c, 16, VERIFY_TOL).unwrap();
        assert!(r.max_tangency_residual < 1e-9, "{}", r.max_tangency_residual);
        assert!(r.mirror_residual_max < 1e-8, "{}", r.mirror_residual_max);
        assert!((r.delta_gamma - 0.4).abs() < 1e-9);
        assert!((r.bar_delta_gamma - 0.4).abs() < 1e-9);
    }

    #[test]
    fn wrong_radius_is_detected() {
        let g = Geometry::Spherical;
        let t = crate::string::string_table_with_nodes(&ConvexCaustic::segment(g, 0.3).unwrap(), 0.1, 1024).unwrap();
        let c = ConvexCaustic::circle(g, 0.1).unwrap();
        assert!(tangency_residual(&t, &c, 0.3).unwrap() > 1e-4);
    }
}
