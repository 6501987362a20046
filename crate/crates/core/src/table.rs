//! Convex billiard tables and their geometric summaries.

use crate::curve::{build_sampled, Circle, Curve, Frame, PieceParam, SampledCurve, Side};
use crate::error::{Error, Result};
use crate::geom::{Geometry, NormalChart, SurfacePoint, UnitTangent, Vec3};
use crate::numerics::{golden_max, golden_min, lagrange6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

/// Default number of boundary nodes for sampled tables.
pub const DEFAULT_NODES: usize = 4096;

/// Tolerance on one-sided curvature limits for declaring a jump.
pub const JUMP_TOL: f64 = 1e-8;

/// Nodes of a sampled stadium boundary.
const STADIUM_NODES: usize = 2 * DEFAULT_NODES;

const NEAREST_SAMPLES: usize = 1024;
const DIAMETER_GRID: usize = 512;

/// How a table was built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TableSource {
    Disk {
        radius: f64,
    },
    Stadium {
        radius: f64,
        half_separation: f64,
        smoothing: f64,
    },
    String {
        caustic: String,
        lazutkin: f64,
    },
    Samples {
        count: usize,
    },
}

/// Perimeter, diameter, inradius and minimal curvature of a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub perimeter: f64,
    pub diameter: f64,
    pub inradius: f64,
    pub kappa_min: f64,
    /// Center of a maximal inscribed disk (embedding coordinates).
    pub incenter: [f64; 3],
    /// Boundary parameters realizing the diameter.
    pub diameter_pair: [f64; 2],
}

/// Closest boundary point to a query point.
#[derive(Clone, Copy, Debug)]
pub struct Nearest {
    pub s: f64,
    pub distance: f64,
    /// Whether the query point lies inside the table.
    pub inside: bool,
}

impl Nearest {
    /// Distance to the boundary, negative outside the table.
    pub fn signed(&self) -> f64 {
        if self.inside {
            self.distance
        } else {
            -self.distance
        }
    }
}

/// A convex billiard table with an arclength-parametrized, counterclockwise
/// boundary.
#[derive(Debug)]
pub struct Table {
    curve: Curve,
    jumps: Vec<f64>,
    source: TableSource,
    samples: OnceLock<Vec<(f64, Vec3)>>,
    summary: OnceLock<GeometrySummary>,
}

impl Clone for Table {
    fn clone(&self) -> Self {
        Self::from_curve(self.curve.clone(), self.source.clone())
    }
}

impl Table {
    pub(crate) fn from_curve(curve: Curve, source: TableSource) -> Self {
        let jumps = curve
            .breaks()
            .into_iter()
            .filter(|&s| {
                let (l, r) = curve.curvature_limits(s);
                (l - r).abs() > JUMP_TOL
            })
            .collect();
        Self {
            curve,
            jumps,
            source,
            samples: OnceLock::new(),
            summary: OnceLock::new(),
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.curve.geometry()
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    /// Perimeter `l`.
    pub fn length(&self) -> f64 {
        self.curve.length()
    }

    pub fn source(&self) -> &TableSource {
        &self.source
    }

    /// Parameters where the curvature is discontinuous.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Parameters where smooth boundary pieces meet, whether or not the
    /// curvature jumps there.
    pub fn breaks(&self) -> Vec<f64> {
        self.curve.breaks()
    }

    #[inline]
    pub fn wrap(&self, s: f64) -> f64 {
        self.curve.wrap(s)
    }

    /// Point, tangent, inward normal and curvature at `s` (right limit at a
    /// jump).
    #[inline]
    pub fn frame(&self, s: f64) -> Frame {
        self.curve.frame(s)
    }

    #[inline]
    pub fn frame_side(&self, s: f64, side: Side) -> Frame {
        self.curve.frame_side(s, side)
    }

    #[inline]
    pub fn point(&self, s: f64) -> Vec3 {
        self.curve.point(s)
    }

    pub fn surface_point(&self, s: f64) -> SurfacePoint {
        SurfacePoint::raw(self.geometry(), self.point(s))
    }

    pub fn unit_tangent(&self, s: f64) -> UnitTangent {
        let f = self.frame(s);
        UnitTangent::raw(SurfacePoint::raw(self.geometry(), f.point), f.tangent)
    }

    #[inline]
    pub fn curvature(&self, s: f64) -> f64 {
        self.frame(s).curvature
    }

    /// `(left, right)` curvature limits.
    pub fn curvature_limits(&self, s: f64) -> (f64, f64) {
        self.curve.curvature_limits(s)
    }

    /// Dense curvature samples, including both one-sided limits at breaks.
    pub fn curvature_samples(&self) -> Vec<f64> {
        self.curve.curvature_samples()
    }

    /// Index of the smooth piece containing `s`.
    pub fn piece_of(&self, s: f64) -> usize {
        self.curve.piece_of(s)
    }

    /// The mirror table under `x₁ ↦ −x₁`; parameter `s` corresponds to
    /// `length − s`.
    pub fn mirrored(&self) -> Table {
        Table::from_curve(self.curve.mirrored(), self.source.clone())
    }

    /// `n` uniformly spaced boundary samples `(s, point)`.
    pub fn boundary_samples(&self, n: usize) -> Vec<(f64, Vec3)> {
        let h = self.length() / n as f64;
        (0..n)
            .map(|k| {
                let s = k as f64 * h;
                (s, self.point(s))
            })
            .collect()
    }

    fn coarse(&self) -> &[(f64, Vec3)] {
        self.samples
            .get_or_init(|| self.boundary_samples(NEAREST_SAMPLES))
    }

    /// Ambient mean of boundary samples pulled back to the surface; an interior
    /// point usable as a chart center.
    pub fn center(&self) -> Vec3 {
        let sum: Vec3 = self.coarse().iter().map(|(_, p)| *p).sum();
        self.geometry().project(&sum)
    }

    /// Index of the coarse sample closest to `x` and its distance.
    fn coarse_nearest(&self, x: &Vec3) -> (usize, f64) {
        let g = self.geometry();
        // distance is decreasing in the bilinear form in both models
        let (k, _) = self
            .coarse()
            .iter()
            .enumerate()
            .map(|(k, (_, b))| (k, g.dot(x, b)))
            .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        (k, g.dist(x, &self.coarse()[k].1))
    }

    /// Closest boundary point to `x`.
    pub fn nearest(&self, x: &Vec3) -> Nearest {
        let g = self.geometry();
        let (k, _) = self.coarse_nearest(x);
        let h = self.length() / NEAREST_SAMPLES as f64;
        let s0 = self.coarse()[k].0;
        let (s, distance) = golden_min(|s| Ok(g.dist(x, &self.point(s))), s0 - h, s0 + h, 1e-11)
            .expect("infallible objective");
        let s = self.wrap(s);
        let f = self.frame(s);
        Nearest {
            s,
            distance,
            inside: g.dot(x, &f.normal) >= 0.0,
        }
    }

    /// Signed distance `δ(x)` to the boundary, positive inside.
    pub fn signed_distance(&self, x: &Vec3) -> f64 {
        self.nearest(x).signed()
    }

    /// Whether `δ(x) > eps`, skipping the refinement when the coarse samples
    /// already decide it.
    pub fn depth_exceeds(&self, x: &Vec3, eps: f64) -> bool {
        let (k, dc) = self.coarse_nearest(x);
        let g = self.geometry();
        let f = self.frame(self.coarse()[k].0);
        if g.dot(x, &f.normal) < 0.0 {
            return false;
        }
        // every boundary point lies within half a sample spacing of a sample
        let slack = 0.5 * self.length() / NEAREST_SAMPLES as f64;
        if dc <= eps {
            return false;
        }
        if dc - slack > eps {
            return true;
        }
        self.signed_distance(x) > eps
    }

    /// Perimeter, diameter, inradius and minimal curvature (cached).
    pub fn summary(&self) -> &GeometrySummary {
        self.summary.get_or_init(|| self.compute_summary())
    }

    fn compute_summary(&self) -> GeometrySummary {
        let (diameter, pair) = self.diameter();
        let (inradius, incenter) = self.inradius();
        let kappa_min = self
            .curvature_samples()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        GeometrySummary {
            perimeter: self.length(),
            diameter,
            inradius,
            kappa_min,
            incenter: [incenter[0], incenter[1], incenter[2]],
            diameter_pair: pair,
        }
    }

    fn diameter(&self) -> (f64, [f64; 2]) {
        let g = self.geometry();
        let pts = self.boundary_samples(DIAMETER_GRID);
        let (i, j, _) = (0..DIAMETER_GRID)
            .into_par_iter()
            .map(|i| {
                let mut best = (i, i, f64::INFINITY);
                for j in i + 1..DIAMETER_GRID {
                    let b = g.dot(&pts[i].1, &pts[j].1);
                    if b < best.2 {
                        best = (i, j, b);
                    }
                }
                best
            })
            .reduce(|| (0, 0, f64::INFINITY), |a, b| if b.2 < a.2 { b } else { a });
        let h = self.length() / DIAMETER_GRID as f64;
        let (mut s1, mut s2) = (pts[i].0, pts[j].0);
        let mut d = g.dist(&pts[i].1, &pts[j].1);
        for _ in 0..60 {
            let p2 = self.point(s2);
            let (a, _) = golden_max(|s| Ok(g.dist(&self.point(s), &p2)), s1 - h, s1 + h, 1e-12)
                .expect("infallible objective");
            s1 = a;
            let p1 = self.point(s1);
            let (b, v) = golden_max(|s| Ok(g.dist(&p1, &self.point(s))), s2 - h, s2 + h, 1e-12)
                .expect("infallible objective");
            s2 = b;
            let done = v - d < 1e-15;
            d = d.max(v);
            if done {
                break;
            }
        }
        (d, [self.wrap(s1), self.wrap(s2)])
    }

    fn inradius(&self) -> (f64, Vec3) {
        let g = self.geometry();
        let center = self.center();
        let chart = NormalChart::centered(g, center, &g.origin_frame().0);
        let coords: Vec<(f64, f64)> = self.coarse().iter().map(|(_, p)| chart.coords(p)).collect();
        let (x0, x1, y0, y1) = bbox(&coords);
        let n = 16;
        let mut seeds: Vec<(f64, f64, f64)> = (0..n * n)
            .into_par_iter()
            .filter_map(|k| {
                let x = x0 + (x1 - x0) * ((k % n) as f64 + 0.5) / n as f64;
                let y = y0 + (y1 - y0) * ((k / n) as f64 + 0.5) / n as f64;
                let d = self.signed_distance(&chart.point(x, y));
                (d > 0.0).then_some((x, y, d))
            })
            .collect();
        seeds.push((0.0, 0.0, self.signed_distance(&center)));
        seeds.sort_by(|a, b| b.2.total_cmp(&a.2));
        seeds.truncate(4);
        let step0 = (x1 - x0).max(y1 - y0) / n as f64;
        let best = seeds
            .into_par_iter()
            .map(|(x, y, d)| {
                compass_max(|x, y| self.signed_distance(&chart.point(x, y)), (x, y, d), step0)
            })
            .reduce(|| (0.0, 0.0, f64::NEG_INFINITY), |a, b| if b.2 > a.2 { b } else { a });
        (best.2, chart.point(best.0, best.1))
    }

    /// A normal chart centered at the incenter.
    pub fn chart(&self) -> NormalChart {
        let c = self.summary().incenter;
        let g = self.geometry();
        NormalChart::centered(g, Vec3::new(c[0], c[1], c[2]), &g.origin_frame().0)
    }

    /// Bounding box `(x_min, x_max, y_min, y_max)` of the boundary in `chart`.
    pub fn chart_bbox(&self, chart: &NormalChart) -> (f64, f64, f64, f64) {
        let coords: Vec<(f64, f64)> = self.coarse().iter().map(|(_, p)| chart.coords(p)).collect();
        bbox(&coords)
    }
}

fn bbox(coords: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    coords.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |b, &(x, y)| (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y)),
    )
}

/// Derivative-free maximization on the plane: poll eight directions, move on
/// improvement, halve the step otherwise.
fn compass_max<F: Fn(f64, f64) -> f64>(f: F, start: (f64, f64, f64), step: f64) -> (f64, f64, f64) {
    let (mut x, mut y, mut v) = start;
    let mut h = step;
    let dirs: [(f64, f64); 8] = std::array::from_fn(|k| {
        let a = k as f64 * PI / 4.0;
        (a.cos(), a.sin())
    });
    while h > 1e-11 {
        let mut moved = false;
        for (dx, dy) in dirs {
            let (nx, ny) = (x + h * dx, y + h * dy);
            let nv = f(nx, ny);
            if nv > v {
                (x, y, v) = (nx, ny, nv);
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (x, y, v)
}

/// Geodesic disk of radius `radius` centered at the chart origin.
pub fn disk_table(geometry: Geometry, radius: f64) -> Result<Table> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("disk radius must be positive, got {radius}")));
    }
    if geometry == Geometry::Spherical && radius >= FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "spherical disk of radius {radius} leaves the open hemisphere"
        )));
    }
    let (e1, _) = geometry.origin_frame();
    let circle = Circle::new(geometry, geometry.origin(), e1, radius);
    Ok(Table::from_curve(Curve::Circle(circle), TableSource::Disk { radius }))
}

/// Table through the given points (normal coordinates at the chart origin),
/// interpolated periodically and resampled by arclength.
pub fn samples_table(geometry: Geometry, points: &[(f64, f64)]) -> Result<Table> {
    let n = points.len();
    if n < 8 {
        return Err(Error::InvalidParameter(format!("need at least 8 boundary samples, got {n}")));
    }
    let mut pts: Vec<Vec3> = points
        .iter()
        .map(|&(x, y)| {
            if geometry == Geometry::Spherical && x.hypot(y) >= FRAC_PI_2 {
                return Err(Error::Domain(format!("sample ({x}, {y}) leaves the hemisphere")));
            }
            Ok(geometry.from_normal_coords(x, y))
        })
        .collect::<Result<_>>()?;
    // orient counterclockwise
    let area2: f64 = (0..n)
        .map(|k| {
            let (a, b) = (points[k], points[(k + 1) % n]);
            a.0 * b.1 - a.1 * b.0
        })
        .sum();
    if area2 < 0.0 {
        pts.reverse();
    }
    let param = PieceParam {
        u0: 0.0,
        u1: n as f64,
        eval: Box::new(move |u: f64| {
            let i0 = u.floor() as isize - 2;
            let (w, _, _) = lagrange6(u - i0 as f64);
            let mut p = Vec3::zeros();
            for (j, wj) in w.iter().enumerate() {
                p += pts[(i0 + j as isize).rem_euclid(n as isize) as usize] * *wj;
            }
            Ok(geometry.project(&p))
        }),
    };
    let curve = build_sampled(geometry, vec![param], true, DEFAULT_NODES)?;
    let table = Table::from_curve(Curve::Sampled(curve), TableSource::Samples { count: n });
    check_convex(&table)?;
    Ok(table)
}

/// Verifies nonnegative curvature and, on the sphere, hemisphere containment.
pub(crate) fn check_convex(table: &Table) -> Result<()> {
    let kmin = table.curvature_samples().into_iter().fold(f64::INFINITY, f64::min);
    if kmin < -1e-8 {
        return Err(Error::Domain(format!("boundary is not convex (curvature {kmin:e})")));
    }
    if table.geometry() == Geometry::Spherical
        && table.boundary_samples(NEAREST_SAMPLES).iter().any(|(_, p)| p[2] <= 0.0)
    {
        return Err(Error::Domain("boundary leaves the open hemisphere".into()));
    }
    Ok(())
}

/// Smoothed convex hull of two hyperbolic disks of radius `radius` centered
/// at `(±half_separation, 0)`.
///
/// The boundary is defined through its curvature profile: cap arcs of
/// curvature `coth R`, side arcs of the small curvature `smoothing`, joined by
/// C² blends; the arc lengths are fitted so that the curve closes with the
/// symmetries of the hull. With `half_separation = 0` the disk is returned.
pub fn stadium_table(geometry: Geometry, radius: f64, half_separation: f64, smoothing: f64) -> Result<Table> {
    if geometry != Geometry::Hyperbolic {
        return Err(Error::InvalidParameter("stadium tables are hyperbolic only".into()));
    }
    let source = TableSource::Stadium {
        radius,
        half_separation,
        smoothing,
    };
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("stadium radius must be positive, got {radius}")));
    }
    if !(half_separation >= 0.0) || !half_separation.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "stadium half-separation must be nonnegative, got {half_separation}"
        )));
    }
    let k_cap = 1.0 / radius.tanh();
    if !(smoothing > 0.0 && smoothing < k_cap) {
        return Err(Error::InvalidParameter(format!(
            "stadium side curvature must lie in (0, coth R) = (0, {k_cap}), got {smoothing}"
        )));
    }
    if half_separation == 0.0 {
        let disk = disk_table(geometry, radius)?;
        return Ok(Table::from_curve(disk.curve, source));
    }
    let profile = StadiumProfile::fit(radius, half_separation, smoothing)?;
    // The blends carry large curvature derivatives; sample them finely.
    let m = STADIUM_NODES / 4;
    let quarter = profile.integrate(m)?;
    let length = 4.0 * profile.quarter_length();
    let mut nodes = Vec::with_capacity(4 * m);
    let flip = |p: &Vec3, a: f64, b: f64| Vec3::new(p[0], a * p[1], b * p[2]);
    nodes.extend(quarter[..m].iter().copied());
    nodes.extend((m..2 * m).map(|j| flip(&quarter[2 * m - j], -1.0, 1.0)));
    nodes.extend((2 * m..3 * m).map(|j| flip(&quarter[j - 2 * m], -1.0, -1.0)));
    nodes.extend((3 * m..4 * m).map(|j| flip(&quarter[4 * m - j], 1.0, -1.0)));
    let curve = SampledCurve::periodic_from_nodes(geometry, nodes, length)?;
    Ok(Table::from_curve(Curve::Sampled(curve), source))
}

/// Curvature profile of one quarter of the stadium, starting on the positive
/// x-axis and ending on the positive y-axis.
#[derive(Clone, Copy)]
struct StadiumProfile {
    start: f64,
    k_cap: f64,
    k_side: f64,
    blend: f64,
    cap: f64,
    side: f64,
}

const PROFILE_SUBSTEPS: usize = 16;

impl StadiumProfile {
    fn quarter_length(&self) -> f64 {
        self.cap + self.blend + self.side
    }

    fn kappa(&self, s: f64) -> f64 {
        if s <= self.cap {
            return self.k_cap;
        }
        let x = (s - self.cap) / self.blend;
        if x >= 1.0 {
            return self.k_side;
        }
        let w = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
        self.k_cap + (self.k_side - self.k_cap) * w
    }

    /// Integrates the Frenet system over the quarter, recording `m + 1`
    /// equally spaced nodes when `record` is set; returns the final state.
    fn shoot(&self, m: usize, mut record: Option<&mut Vec<Vec3>>) -> (Vec3, Vec3) {
        let g = Geometry::Hyperbolic;
        let q = self.quarter_length();
        let n = m * PROFILE_SUBSTEPS;
        let h = q / n as f64;
        let mut p = Vec3::new(self.start.cosh(), self.start.sinh(), 0.0);
        let mut t = Vec3::new(0.0, 0.0, 1.0);
        // γ'' = γ + κ N on the hyperboloid
        let rhs = |s: f64, p: &Vec3, t: &Vec3| -> (Vec3, Vec3) {
            let nrm = g.rotate(p, t);
            (*t, p + nrm * self.kappa(s))
        };
        if let Some(r) = record.as_deref_mut() {
            r.push(p);
        }
        for k in 0..n {
            let s = k as f64 * h;
            let (a1, b1) = rhs(s, &p, &t);
            let (a2, b2) = rhs(s + 0.5 * h, &(p + a1 * (0.5 * h)), &(t + b1 * (0.5 * h)));
            let (a3, b3) = rhs(s + 0.5 * h, &(p + a2 * (0.5 * h)), &(t + b2 * (0.5 * h)));
            let (a4, b4) = rhs(s + h, &(p + a3 * h), &(t + b3 * h));
            p += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
            t += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6.0);
            if (k + 1) % PROFILE_SUBSTEPS == 0 {
                p = g.project(&p);
                t = g.unit_tangent(&p, &t);
                if let Some(r) = record.as_deref_mut() {
                    r.push(p);
                }
            }
        }
        (p, t)
    }

    fn residual(&self, m: usize) -> [f64; 2] {
        let (p, t) = self.shoot(m, None);
        [p[1], t[2]]
    }

    fn fit(radius: f64, half_separation: f64, smoothing: f64) -> Result<Self> {
        let g = Geometry::Hyperbolic;
        let (c, r) = (half_separation, radius);
        let k_cap = 1.0 / r.tanh();
        // exact hull: tangency point F on the cap and midpoint M of the side
        let h = (r.sinh() / c.cosh()).asinh();
        let theta = PI - (c.sinh() * h.sinh()).clamp(-1.0, 1.0).acos();
        let center = Vec3::new(c.cosh(), c.sinh(), 0.0);
        let e1 = Vec3::new(c.sinh(), c.cosh(), 0.0);
        let e2 = Vec3::new(0.0, 0.0, 1.0);
        let f = g.exp(&center, &(e1 * theta.cos() + e2 * theta.sin()), r);
        let mid = Vec3::new(h.cosh(), 0.0, h.sinh());
        let blend = 0.5 * r;
        let mut prof = StadiumProfile {
            start: c + r,
            k_cap,
            k_side: smoothing,
            blend,
            cap: (r.sinh() * theta - 0.5 * blend).max(0.0),
            side: (g.dist(&f, &mid) - 0.5 * blend).max(0.0),
        };
        let m = 64;
        for _ in 0..60 {
            let f0 = prof.residual(m);
            if f0[0].abs().max(f0[1].abs()) < 1e-14 {
                break;
            }
            let eps = 1e-7;
            let mut jac = [[0.0; 2]; 2];
            for col in 0..2 {
                let mut pp = prof;
                if col == 0 {
                    pp.cap += eps;
                } else {
                    pp.side += eps;
                }
                let f1 = pp.residual(m);
                jac[0][col] = (f1[0] - f0[0]) / eps;
                jac[1][col] = (f1[1] - f0[1]) / eps;
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det.abs() < 1e-300 {
                return Err(Error::Solver("stadium closure Jacobian is singular".into()));
            }
            let da = (f0[0] * jac[1][1] - f0[1] * jac[0][1]) / det;
            let db = (jac[0][0] * f0[1] - jac[1][0] * f0[0]) / det;
            // damp steps that would make an arc length negative
            let mut lam = 1.0;
            while prof.cap - lam * da < 0.0 || prof.side - lam * db < 0.0 {
                lam *= 0.5;
                if lam < 1e-6 {
                    return Err(Error::InvalidParameter(format!(
                        "no stadium with R = {r}, c = {c} and side curvature {smoothing}"
                    )));
                }
            }
            prof.cap -= lam * da;
            prof.side -= lam * db;
        }
        // polish with the production step size
        for _ in 0..8 {
            let f0 = prof.residual(DEFAULT_NODES / 4);
            if f0[0].abs().max(f0[1].abs()) < 1e-14 {
                break;
            }
            let eps = 1e-7;
            let mut jac = [[0.0; 2]; 2];
            for col in 0..2 {
                let mut pp = prof;
                if col == 0 {
                    pp.cap += eps;
                } else {
                    pp.side += eps;
                }
                let f1 = pp.residual(DEFAULT_NODES / 4);
                jac[0][col] = (f1[0] - f0[0]) / eps;
                jac[1][col] = (f1[1] - f0[1]) / eps;
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            prof.cap -= (f0[0] * jac[1][1] - f0[1] * jac[0][1]) / det;
            prof.side -= (jac[0][0] * f0[1] - jac[1][0] * f0[0]) / det;
        }
        let res = prof.residual(DEFAULT_NODES / 4);
        if res[0].abs().max(res[1].abs()) > 1e-9 || prof.cap < 0.0 || prof.side < 0.0 {
            return Err(Error::Solver(format!(
                "stadium closure did not converge (residual {:e}, {:e})",
                res[0], res[1]
            )));
        }
        Ok(prof)
    }

    fn integrate(&self, m: usize) -> Result<Vec<Vec3>> {
        let mut nodes = Vec::with_capacity(m + 1);
        let (p, _) = self.shoot(m, Some(&mut nodes));
        // pin the symmetric endpoint exactly onto the y-axis
        let last = nodes.len() - 1;
        nodes[last] = Geometry::Hyperbolic.project(&Vec3::new(p[0], 0.0, p[2]));
        Ok(nodes)
    }
}
