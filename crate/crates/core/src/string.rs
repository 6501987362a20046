//! Convex caustics, Lazutkin parameters and the string construction.
//!
//! For `q` outside a convex set `C`, the two supporting geodesics from `q`
//! touch `C` at `P₁` (on the right as seen from `q`) and `P₂` (on the left).
//! The arc of `∂C` facing `q` runs counterclockwise from `P₂` to `P₁`. The
//! Lazutkin parameter is `L(q) = |qP₁| + |qP₂| − |near arc|`, and the table
//! `K_L` is the level set `{L(q) = L}`.

use crate::curve::{build_sampled, Circle, Curve, PieceParam};
use crate::error::{Error, Result};
use crate::geom::{Geometry, NormalChart, SurfacePoint, Vec3};
use crate::numerics::{brent_with_values, golden_min};
use crate::table::{check_convex, Table, TableSource, DEFAULT_NODES};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

#[derive(Clone, Debug)]
pub enum CausticShape {
    /// A closed convex curve, counterclockwise and arclength-parametrized.
    Curve(Curve),
    /// Vertices of a convex geodesic polygon in counterclockwise order; two
    /// vertices give a segment.
    Polygon(Vec<Vec3>),
}

/// A convex caustic candidate, optionally tagged with its Lazutkin parameter.
#[derive(Clone, Debug)]
pub struct ConvexCaustic {
    geometry: Geometry,
    shape: CausticShape,
    lazutkin: Option<f64>,
    label: String,
}

/// Supporting geodesics from an exterior point.
#[derive(Clone, Copy, Debug)]
pub struct Tangency {
    /// Right tangent point (forward tangent chord).
    pub p1: Vec3,
    /// Left tangent point.
    pub p2: Vec3,
    /// `|qP₁|`.
    pub a1: f64,
    /// `|qP₂|`.
    pub a2: f64,
    /// Length of the near arc from `P₂` to `P₁`.
    pub near: f64,
    /// Curve parameters of `P₁`, `P₂` (curve caustics only).
    pub sigma: Option<(f64, f64)>,
}

impl Tangency {
    pub fn lazutkin(&self) -> f64 {
        self.a1 + self.a2 - self.near
    }
}

fn check_hemisphere(g: Geometry, p: &Vec3, what: &str) -> Result<()> {
    if g == Geometry::Spherical && p[2] <= 0.0 {
        return Err(Error::Domain(format!("{what} leaves the open hemisphere")));
    }
    Ok(())
}

impl ConvexCaustic {
    /// Geodesic circle of radius `d` about the chart origin.
    pub fn circle(geometry: Geometry, d: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter(format!("caustic radius must be positive, got {d}")));
        }
        if geometry == Geometry::Spherical && d >= FRAC_PI_2 {
            return Err(Error::Domain(format!("caustic circle of radius {d} leaves the hemisphere")));
        }
        let c = Circle::new(geometry, geometry.origin(), geometry.origin_frame().0, d);
        Ok(Self {
            geometry,
            shape: CausticShape::Curve(Curve::Circle(c)),
            lazutkin: None,
            label: format!("circle(d={d})"),
        })
    }

    /// Geodesic segment of length `len` centered at the chart origin along
    /// the first axis.
    pub fn segment(geometry: Geometry, len: f64) -> Result<Self> {
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidParameter(format!("segment length must be positive, got {len}")));
        }
        if geometry == Geometry::Spherical && len >= PI {
            return Err(Error::Domain(format!("segment of length {len} leaves the hemisphere")));
        }
        let a = geometry.from_normal_coords(-0.5 * len, 0.0);
        let b = geometry.from_normal_coords(0.5 * len, 0.0);
        Ok(Self {
            geometry,
            shape: CausticShape::Polygon(vec![a, b]),
            lazutkin: None,
            label: format!("segment(len={len})"),
        })
    }

    /// Convex polygon from vertices in normal coordinates at the chart origin.
    /// Clockwise input is reoriented.
    pub fn polygon(geometry: Geometry, vertices: &[(f64, f64)]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidParameter(format!("polygon needs at least 3 vertices, got {n}")));
        }
        let mut v: Vec<Vec3> = vertices
            .iter()
            .map(|&(x, y)| {
                if geometry == Geometry::Spherical && x.hypot(y) >= FRAC_PI_2 {
                    return Err(Error::Domain(format!("vertex ({x}, {y}) leaves the hemisphere")));
                }
                Ok(geometry.from_normal_coords(x, y))
            })
            .collect::<Result<_>>()?;
        let turn = |v: &[Vec3], i: usize| geometry.side(&v[i], &v[(i + 1) % n], &v[(i + 2) % n]);
        if (0..n).all(|i| turn(&v, i) < 0.0) {
            v.reverse();
        }
        if !(0..n).all(|i| turn(&v, i) > 0.0) {
            return Err(Error::InvalidParameter("polygon vertices are not in strictly convex position".into()));
        }
        Ok(Self {
            geometry,
            shape: CausticShape::Polygon(v),
            lazutkin: None,
            label: format!("polygon(n={n})"),
        })
    }

    /// Regular `n`-gon with circumradius `rho` about the chart origin.
    pub fn regular_polygon(geometry: Geometry, n: usize, rho: f64) -> Result<Self> {
        let v: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let a = FRAC_PI_2 + TAU * k as f64 / n as f64;
                (rho * a.cos(), rho * a.sin())
            })
            .collect();
        let mut c = Self::polygon(geometry, &v)?;
        c.label = format!("regular-polygon(n={n}, rho={rho})");
        Ok(c)
    }

    /// A closed convex curve, e.g. the boundary of another table.
    pub fn from_curve(curve: Curve, label: impl Into<String>) -> Self {
        Self {
            geometry: curve.geometry(),
            shape: CausticShape::Curve(curve),
            lazutkin: None,
            label: label.into(),
        }
    }

    pub fn with_lazutkin(mut self, l: f64) -> Self {
        self.lazutkin = Some(l);
        self
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn shape(&self) -> &CausticShape {
        &self.shape
    }

    pub fn lazutkin(&self) -> Option<f64> {
        self.lazutkin
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Perimeter; a segment counts twice its length.
    pub fn perimeter(&self) -> f64 {
        match &self.shape {
            CausticShape::Curve(c) => c.length(),
            CausticShape::Polygon(v) => crate::geom::polygon_perimeter(self.geometry, v),
        }
    }

    /// A point of the caustic parametrized by its arclength `u ∈ [0, perimeter)`.
    pub fn point_at(&self, u: f64) -> Vec3 {
        let g = self.geometry;
        match &self.shape {
            CausticShape::Curve(c) => c.point(u),
            CausticShape::Polygon(v) => {
                let n = v.len();
                let mut u = u.rem_euclid(self.perimeter());
                for i in 0..n {
                    let (a, b) = (&v[i], &v[(i + 1) % n]);
                    let e = g.dist(a, b);
                    if u <= e || i == n - 1 {
                        let dir = g.direction(a, b).expect("distinct vertices");
                        return g.project(&g.exp(a, &dir, u.min(e)));
                    }
                    u -= e;
                }
                unreachable!()
            }
        }
    }

    /// An interior point (ambient mean of vertices or samples).
    pub fn center(&self) -> Vec3 {
        let sum: Vec3 = match &self.shape {
            CausticShape::Curve(c) => (0..64).map(|k| c.point(c.length() * k as f64 / 64.0)).sum(),
            CausticShape::Polygon(v) => v.iter().sum(),
        };
        self.geometry.project(&sum)
    }

    /// Distance from an exterior point to the caustic (0 inside).
    pub fn distance_to(&self, x: &Vec3) -> f64 {
        let g = self.geometry;
        match &self.shape {
            CausticShape::Polygon(v) => {
                let n = v.len();
                if n >= 3 && (0..n).all(|i| g.side(&v[i], &v[(i + 1) % n], x) >= 0.0) {
                    return 0.0;
                }
                (0..n)
                    .map(|i| segment_distance(g, &v[i], &v[(i + 1) % n], x))
                    .fold(f64::INFINITY, f64::min)
            }
            CausticShape::Curve(c) => {
                let l = c.length();
                let m = 256;
                let h = l / m as f64;
                let k = (0..m)
                    .map(|k| (k, g.dot(x, &c.point(k as f64 * h))))
                    .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
                    .0;
                let s0 = k as f64 * h;
                let (s, d) = golden_min(|s| Ok(g.dist(x, &c.point(s))), s0 - h, s0 + h, 1e-11)
                    .expect("infallible objective");
                if g.dot(x, &c.frame(s).normal) > 0.0 {
                    0.0
                } else {
                    d
                }
            }
        }
    }

    /// Supporting geodesics from `q`; `hint` is a curve parameter visible
    /// from `q`, if known.
    pub fn tangency(&self, q: &Vec3, hint: Option<f64>) -> Result<Tangency> {
        match &self.shape {
            CausticShape::Polygon(v) => polygon_tangency(self.geometry, v, q),
            CausticShape::Curve(c) => curve_tangency(c, q, hint),
        }
    }

    /// The two tangent points `(P₁, P₂)` from `q`.
    pub fn tangent_points(&self, q: &SurfacePoint) -> Result<(SurfacePoint, SurfacePoint)> {
        self.check_geometry(q)?;
        let t = self.tangency(q.coords(), None)?;
        Ok((
            SurfacePoint::raw(self.geometry, t.p1),
            SurfacePoint::raw(self.geometry, t.p2),
        ))
    }

    /// `L(q) = |qP₁| + |qP₂| − |near arc|`.
    pub fn lazutkin_parameter(&self, q: &SurfacePoint) -> Result<f64> {
        self.check_geometry(q)?;
        Ok(self.tangency(q.coords(), None)?.lazutkin())
    }

    /// Perimeter of the convex hull of `q` and the caustic.
    pub fn hull_perimeter(&self, q: &SurfacePoint) -> Result<f64> {
        self.check_geometry(q)?;
        let t = self.tangency(q.coords(), None)?;
        Ok(t.a1 + t.a2 + (self.perimeter() - t.near))
    }

    fn check_geometry(&self, q: &SurfacePoint) -> Result<()> {
        if q.geometry() != self.geometry {
            return Err(Error::MixedGeometry);
        }
        Ok(())
    }
}

/// Distance from `x` to the geodesic segment `[a, b]`.
pub(crate) fn segment_distance(g: Geometry, a: &Vec3, b: &Vec3, x: &Vec3) -> f64 {
    let c = a.cross(b);
    let n = match g {
        Geometry::Hyperbolic => Vec3::new(-c[0], c[1], c[2]),
        Geometry::Spherical => c,
    };
    let n = n / g.dot(&n, &n).sqrt();
    let h = g.dot(x, &n);
    let foot = x - n * h;
    // the foot lies on the segment iff it is a nonnegative combination of a, b
    let cc = c.norm_squared();
    let alpha = foot.cross(b).dot(&c) / cc;
    let beta = a.cross(&foot).dot(&c) / cc;
    if alpha >= 0.0 && beta >= 0.0 {
        match g {
            Geometry::Hyperbolic => h.asinh().abs(),
            Geometry::Spherical => h.clamp(-1.0, 1.0).asin().abs(),
        }
    } else {
        g.dist(x, a).min(g.dist(x, b))
    }
}

fn polygon_tangency(g: Geometry, v: &[Vec3], q: &Vec3) -> Result<Tangency> {
    let n = v.len();
    let sides: Vec<f64> = (0..n).map(|i| g.side(&v[i], &v[(i + 1) % n], q)).collect();
    let mut visible: Vec<bool> = sides.iter().map(|&s| s < 0.0).collect();
    if !visible.iter().any(|&b| b) {
        // q on the extension of an edge (or inside): the Lazutkin parameter
        // is continuous across, so count the collinear edges as visible
        if n >= 3 && sides.iter().all(|&s| s > 0.0) {
            return Err(Error::Containment("point lies inside the caustic".into()));
        }
        visible = sides.iter().map(|&s| s <= 0.0).collect();
        if n == 2 {
            // only one of the two coincident edges may be counted
            visible[1] = false;
            let inside = g.dist(&v[0], q) < g.dist(&v[0], &v[1]) && g.dist(&v[1], q) < g.dist(&v[0], &v[1]);
            if inside {
                return Err(Error::Containment("point lies on the segment".into()));
            }
        }
    }
    if visible.iter().all(|&b| b) {
        return Err(Error::Containment("degenerate caustic".into()));
    }
    let start = (0..n)
        .find(|&i| visible[i] && !visible[(i + n - 1) % n])
        .ok_or_else(|| Error::Containment("no visible edge chain".into()))?;
    let mut near = 0.0;
    let mut end = start;
    while visible[end % n] {
        near += g.dist(&v[end % n], &v[(end + 1) % n]);
        end += 1;
    }
    let (p2, p1) = (v[start], v[end % n]);
    Ok(Tangency {
        p1,
        p2,
        a1: g.dist(q, &p1),
        a2: g.dist(q, &p2),
        near,
        sigma: None,
    })
}

fn curve_tangency(c: &Curve, q: &Vec3, hint: Option<f64>) -> Result<Tangency> {
    let g = c.geometry();
    let l = c.length();
    let mut vis = |s: f64| -> Result<f64> { Ok(g.dot(q, &c.frame(s).normal)) };
    let s_mid = match hint {
        Some(h) if vis(h)? < 0.0 => h,
        _ => {
            let m = 256;
            let h = l / m as f64;
            let mut best = (0.0, f64::INFINITY);
            for k in 0..m {
                let s = k as f64 * h;
                let v = vis(s)?;
                if v < best.1 {
                    best = (s, v);
                }
            }
            let (s, v) = golden_min(&mut vis, best.0 - h, best.0 + h, 1e-13)?;
            if v >= 0.0 {
                return Err(Error::Containment("point lies inside or on the caustic".into()));
            }
            s
        }
    };
    let f_mid = vis(s_mid)?;
    let mut edge = |dir: f64| -> Result<f64> {
        let mut step = l / 4096.0;
        let (mut a, mut fa) = (s_mid, f_mid);
        loop {
            let b = s_mid + dir * step;
            let fb = vis(b)?;
            if fb >= 0.0 {
                return brent_with_values(&mut vis, a, fa, b, fb, 1e-14);
            }
            if step > 0.5 * l {
                return Err(Error::Containment("point lies inside the caustic".into()));
            }
            a = b;
            fa = fb;
            step *= 2.0;
        }
    };
    let s1 = edge(1.0)?;
    let s2 = edge(-1.0)?;
    let p1 = c.point(s1);
    let p2 = c.point(s2);
    Ok(Tangency {
        p1,
        p2,
        a1: g.dist(q, &p1),
        a2: g.dist(q, &p2),
        near: s1 - s2,
        sigma: Some((c.wrap(s1), c.wrap(s2))),
    })
}

/// Finds `ρ > 0` with `f(ρ) = 0`, where `f(0) < 0` and `f` increases.
fn solve_ray<F: FnMut(f64) -> Result<f64>>(mut f: F, guess: f64) -> Result<f64> {
    let (mut a, mut fa) = (0.0, f(0.0)?);
    let mut b = guess;
    for _ in 0..200 {
        let fb = f(b)?;
        if fb >= 0.0 {
            return brent_with_values(&mut f, a, fa, b, fb, 1e-15);
        }
        a = b;
        fa = fb;
        b *= 1.5;
    }
    Err(Error::Solver("string level set not bracketed along ray".into()))
}

/// Lazutkin parameter, with points inside the caustic mapped to 0.
fn lazutkin_or_zero(c: &ConvexCaustic, q: &Vec3, hint: Option<f64>) -> Result<f64> {
    match c.tangency(q, hint) {
        Ok(t) => Ok(t.lazutkin()),
        Err(Error::Containment(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// The table `K_L` obtained by the string construction around `caustic`.
pub fn string_table(caustic: &ConvexCaustic, l: f64) -> Result<Table> {
    string_table_with_nodes(caustic, l, DEFAULT_NODES)
}

pub fn string_table_with_nodes(caustic: &ConvexCaustic, l: f64, nodes: usize) -> Result<Table> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidParameter(format!("Lazutkin parameter must be positive, got {l}")));
    }
    let g = caustic.geometry;
    let guess = l.min(1.0);
    let result = (|| -> Result<Table> {
        let curve = match &caustic.shape {
            CausticShape::Curve(c) => {
                let c = c.clone();
                let per = c.length();
                let param = PieceParam {
                    u0: 0.0,
                    u1: per,
                    eval: Box::new(move |u: f64| {
                        let f = c.frame(u);
                        let out = -f.normal;
                        let ray = |rho: f64| g.project(&g.exp(&f.point, &out, rho));
                        let rho = solve_ray(
                            |rho| {
                                if rho == 0.0 {
                                    return Ok(-l);
                                }
                                let q = ray(rho);
                                check_hemisphere(g, &q, "string table")?;
                                Ok(caustic.tangency(&q, Some(u))?.lazutkin() - l)
                            },
                            guess,
                        )?;
                        Ok(ray(rho))
                    }),
                };
                build_sampled(g, vec![param], true, nodes)?
            }
            CausticShape::Polygon(v) if v.len() == 2 => {
                let center = caustic.center();
                let chart = NormalChart::centered(g, center, &g.direction(&center, &v[1]).unwrap());
                let param = PieceParam {
                    u0: 0.0,
                    u1: TAU,
                    eval: Box::new(move |u: f64| ray_point(caustic, &chart, u, l, guess)),
                };
                build_sampled(g, vec![param], true, nodes)?
            }
            CausticShape::Polygon(v) => {
                let center = caustic.center();
                let chart = NormalChart::centered(g, center, &g.origin_frame().0);
                let glue = gluing_angles(caustic, v, &chart, l, guess)?;
                let params = (0..glue.len())
                    .map(|k| {
                        let a = glue[k];
                        let b = if k + 1 < glue.len() { glue[k + 1] } else { glue[0] + TAU };
                        PieceParam {
                            u0: a,
                            u1: b,
                            eval: Box::new(move |u: f64| ray_point(caustic, &chart, u, l, guess)),
                        }
                    })
                    .collect();
                build_sampled(g, params, false, nodes)?
            }
        };
        let table = Table::from_curve(
            Curve::Sampled(curve),
            TableSource::String {
                caustic: caustic.label.clone(),
                lazutkin: l,
            },
        );
        check_convex(&table)?;
        Ok(table)
    })();
    match result {
        Err(Error::Domain(msg)) if g == Geometry::Spherical => Err(Error::StringTooLong(format!(
            "L = {l} around {}: {msg}",
            caustic.label
        ))),
        other => other,
    }
}

/// Point at polar angle `u` (in `chart`) where the Lazutkin parameter equals `l`.
fn ray_point(caustic: &ConvexCaustic, chart: &NormalChart, u: f64, l: f64, guess: f64) -> Result<Vec3> {
    let g = caustic.geometry;
    let (c, s) = (u.cos(), u.sin());
    let rho = solve_ray(
        |rho| {
            let q = chart.point(rho * c, rho * s);
            check_hemisphere(g, &q, "string table")?;
            if g == Geometry::Spherical && rho >= FRAC_PI_2 {
                return Err(Error::Domain("string ray reaches the equator".into()));
            }
            Ok(lazutkin_or_zero(caustic, &q, None)? - l)
        },
        guess,
    )?;
    Ok(chart.point(rho * c, rho * s))
}

/// Polar angles of the `2n` points of `K_L` on the extensions of the polygon
/// edges, sorted increasingly in `[θ₀, θ₀ + 2π)`.
fn gluing_angles(caustic: &ConvexCaustic, v: &[Vec3], chart: &NormalChart, l: f64, guess: f64) -> Result<Vec<f64>> {
    let g = caustic.geometry;
    let n = v.len();
    let mut angles = Vec::with_capacity(2 * n);
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for (from, to) in [(a, b), (b, a)] {
            let dir = g.direction(&from, &to).ok_or(Error::UndefinedDirection)?;
            let e = g.dist(&from, &to);
            // continue the edge beyond `to`
            let ray = |rho: f64| g.project(&g.exp(&from, &dir, e + rho));
            let rho = solve_ray(
                |rho| {
                    if rho == 0.0 {
                        return Ok(-l);
                    }
                    let q = ray(rho);
                    check_hemisphere(g, &q, "string table")?;
                    Ok(lazutkin_or_zero(caustic, &q, None)? - l)
                },
                guess,
            )?;
            let (x, y) = chart.coords(&ray(rho));
            angles.push(y.atan2(x));
        }
    }
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// Reference root-finder for `L` along the ray from `center` at angle `u`;
/// exposed for tests that need boundary points independent of resampling.
pub fn level_point(caustic: &ConvexCaustic, l: f64, u: f64) -> Result<SurfacePoint> {
    let g = caustic.geometry;
    let center = caustic.center();
    let chart = NormalChart::centered(g, center, &g.origin_frame().0);
    let p = ray_point(caustic, &chart, u, l, l.min(1.0))?;
    Ok(SurfacePoint::raw(g, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_tangent_length_matches_pythagoras() {
        let g = Geometry::Hyperbolic;
        let c = ConvexCaustic::circle(g, 0.5).unwrap();
        let q = SurfacePoint::from_normal_coords(g, 0.0, 1.0).unwrap();
        let t = c.tangency(q.coords(), None).unwrap();
        let a = (1f64.cosh() / 0.5f64.cosh()).acosh();
        assert!((t.a1 - a).abs() < 1e-12 && (t.a2 - a).abs() < 1e-12);
        // near arc: central angle with cos β = tanh d / tanh R
        let beta = (0.5f64.tanh() / 1f64.tanh()).acos();
        let l = 2.0 * a - 2.0 * beta * 0.5f64.sinh();
        assert!((t.lazutkin() - l).abs() < 1e-12);
        // facing the caustic from q = (0, 1), the right-hand side is x < 0
        let (x1, _) = g.to_normal_coords(&t.p1);
        assert!(x1 < 0.0);
    }

    #[test]
    fn segment_tangent_points_are_endpoints() {
        let g = Geometry::Hyperbolic;
        let c = ConvexCaustic::segment(g, 1.0).unwrap();
        let q = SurfacePoint::from_normal_coords(g, 0.2, 0.7).unwrap();
        let (p1, p2) = c.tangent_points(&q).unwrap();
        let (x1, _) = g.to_normal_coords(p1.coords());
        let (x2, _) = g.to_normal_coords(p2.coords());
        assert!((x1 + 0.5).abs() < 1e-12 && (x2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inside_is_rejected() {
        let g = Geometry::Spherical;
        let c = ConvexCaustic::circle(g, 0.3).unwrap();
        let q = SurfacePoint::from_normal_coords(g, 0.1, 0.0).unwrap();
        assert!(matches!(c.lazutkin_parameter(&q), Err(Error::Containment(_))));
    }

    #[test]
    fn circle_string_table_is_a_circle() {
        let g = Geometry::Hyperbolic;
        let c = ConvexCaustic::circle(g, 0.5).unwrap();
        let t = string_table_with_nodes(&c, 0.3, 1024).unwrap();
        let r0 = g.dist(&t.point(0.0), &g.origin());
        for k in 0..50 {
            let p = t.point(t.length() * k as f64 / 50.0);
            assert!((g.dist(&p, &g.origin()) - r0).abs() < 1e-11);
        }
        assert!((t.length() - TAU * r0.sinh()).abs() < 1e-10);
    }

    #[test]
    fn triangle_table_has_six_jumps() {
        let g = Geometry::Hyperbolic;
        let c = ConvexCaustic::regular_polygon(g, 3, 0.5).unwrap();
        let t = string_table_with_nodes(&c, 0.4, 1536).unwrap();
        assert_eq!(t.jumps().len(), 6);
    }
}
