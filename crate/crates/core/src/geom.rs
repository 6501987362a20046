//! Geometry kernel for the hyperbolic plane and the open upper hemisphere.
//!
//! Both surfaces are embedded in R³ and share one code path that branches only
//! on the curvature sign:
//!
//! * hyperbolic: the upper sheet of the hyperboloid `x₁² + x₂² − x₀² = −1`,
//!   `x₀ > 0`, with the Minkowski form `⟨a,b⟩ = a₁b₁ + a₂b₂ − a₀b₀`;
//! * spherical: the unit sphere with the Euclidean form, restricted to the
//!   hemisphere `x₂ > 0`.
//!
//! In either model a geodesic is the intersection of the surface with a plane
//! through the origin, so side-of-line tests reduce to a determinant and the
//! distance from a point to a line to one bilinear-form evaluation.
//!
//! The typed wrappers [`SurfacePoint`] and [`UnitTangent`] validate the model
//! constraints; the raw `Vec3` methods on [`Geometry`] are what the solvers call
//! in their inner loops.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

pub type Vec3 = nalgebra::Vector3<f64>;

/// Tolerance for the model constraints checked by the typed wrappers.
pub const MODEL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Hyperbolic,
    Spherical,
}

impl Geometry {
    /// Curvature sign: −1 for the hyperbolic plane, +1 for the sphere.
    /// Also the value of `⟨p,p⟩` for every point of the model.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Geometry::Hyperbolic => -1.0,
            Geometry::Spherical => 1.0,
        }
    }

    /// The ambient bilinear form.
    #[inline]
    pub fn dot(self, a: &Vec3, b: &Vec3) -> f64 {
        match self {
            Geometry::Hyperbolic => a[1] * b[1] + a[2] * b[2] - a[0] * b[0],
            Geometry::Spherical => a.dot(b),
        }
    }

    /// Base point of the default chart: `(1,0,0)` on the hyperboloid, the
    /// pole `(0,0,1)` on the sphere.
    pub fn origin(self) -> Vec3 {
        match self {
            Geometry::Hyperbolic => Vec3::new(1.0, 0.0, 0.0),
            Geometry::Spherical => Vec3::new(0.0, 0.0, 1.0),
        }
    }

    /// Orthonormal tangent frame at [`Geometry::origin`], positively oriented.
    pub fn origin_frame(self) -> (Vec3, Vec3) {
        match self {
            Geometry::Hyperbolic => (Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)),
            Geometry::Spherical => (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)),
        }
    }

    /// `cosh` or `cos`.
    #[inline]
    pub fn cos_l(self, x: f64) -> f64 {
        match self {
            Geometry::Hyperbolic => x.cosh(),
            Geometry::Spherical => x.cos(),
        }
    }

    /// `sinh` or `sin`.
    #[inline]
    pub fn sin_l(self, x: f64) -> f64 {
        match self {
            Geometry::Hyperbolic => x.sinh(),
            Geometry::Spherical => x.sin(),
        }
    }

    /// `tanh` or `tan`.
    #[inline]
    pub fn tan_l(self, x: f64) -> f64 {
        match self {
            Geometry::Hyperbolic => x.tanh(),
            Geometry::Spherical => x.tan(),
        }
    }

    /// Pulls an ambient vector back onto the model surface.
    #[inline]
    pub fn project(self, x: &Vec3) -> Vec3 {
        match self {
            Geometry::Hyperbolic => {
                let n = (-self.dot(x, x)).sqrt();
                if x[0] < 0.0 {
                    -x / n
                } else {
                    x / n
                }
            }
            Geometry::Spherical => x.normalize(),
        }
    }

    /// Component of `v` tangent to the surface at `p`.
    #[inline]
    pub fn tangent_part(self, p: &Vec3, v: &Vec3) -> Vec3 {
        v - p * (self.sign() * self.dot(v, p))
    }

    /// Unit tangent at `p` in the direction of (the tangent part of) `v`.
    #[inline]
    pub fn unit_tangent(self, p: &Vec3, v: &Vec3) -> Vec3 {
        let w = self.tangent_part(p, v);
        w / self.dot(&w, &w).sqrt()
    }

    /// Rotation by +90° in the tangent plane at `p`.
    #[inline]
    pub fn rotate(self, p: &Vec3, v: &Vec3) -> Vec3 {
        let c = p.cross(v);
        match self {
            Geometry::Hyperbolic => Vec3::new(-c[0], c[1], c[2]),
            Geometry::Spherical => c,
        }
    }

    /// Geodesic distance. Uses the chord length, which stays accurate for
    /// nearby points.
    #[inline]
    pub fn dist(self, a: &Vec3, b: &Vec3) -> f64 {
        let d = b - a;
        let c = self.dot(&d, &d).max(0.0).sqrt();
        match self {
            Geometry::Hyperbolic => 2.0 * (0.5 * c).asinh(),
            Geometry::Spherical => 2.0 * (0.5 * c).min(1.0).asin(),
        }
    }

    /// Unit tangent at `p` pointing along the geodesic towards `q`, or `None`
    /// when the points coincide.
    #[inline]
    pub fn direction(self, p: &Vec3, q: &Vec3) -> Option<Vec3> {
        let d = q - p;
        let dd = self.dot(&d, &d);
        // q − p with the normal component removed; written in terms of the
        // difference so that short chords keep full relative precision.
        let w = d + p * (0.5 * dd * self.sign());
        let w = self.tangent_part(p, &w);
        let n = self.dot(&w, &w);
        if !(n > 0.0) || dd <= 0.0 {
            return None;
        }
        Some(w / n.sqrt())
    }

    /// Geodesic flow: the point at arclength `len` from `p` along unit `v`.
    #[inline]
    pub fn exp(self, p: &Vec3, v: &Vec3, len: f64) -> Vec3 {
        p * self.cos_l(len) + v * self.sin_l(len)
    }

    /// Velocity at `exp(p, v, len)`.
    #[inline]
    pub fn exp_velocity(self, p: &Vec3, v: &Vec3, len: f64) -> Vec3 {
        p * (-self.sign() * self.sin_l(len)) + v * self.cos_l(len)
    }

    /// Whether `x` lies on the model surface (and, on the sphere, strictly in
    /// the open upper hemisphere).
    pub fn on_model(self, x: &Vec3, tol: f64) -> bool {
        match self {
            Geometry::Hyperbolic => (self.dot(x, x) + 1.0).abs() <= tol && x[0] > 0.0,
            Geometry::Spherical => (x.norm_squared() - 1.0).abs() <= tol && x[2] > 0.0,
        }
    }

    /// Side of `x` relative to the directed geodesic through `a` and `b`:
    /// positive on the left.
    #[inline]
    pub fn side(self, a: &Vec3, b: &Vec3, x: &Vec3) -> f64 {
        a.cross(b).dot(x)
    }

    /// Chart given by geodesic polar coordinates at [`Geometry::origin`].
    pub fn from_normal_coords(self, x: f64, y: f64) -> Vec3 {
        NormalChart::at_origin(self).point(x, y)
    }

    pub fn to_normal_coords(self, p: &Vec3) -> (f64, f64) {
        NormalChart::at_origin(self).coords(p)
    }
}

/// Geodesic normal coordinates centered at an arbitrary point.
#[derive(Clone, Copy, Debug)]
pub struct NormalChart {
    pub geometry: Geometry,
    pub center: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
}

impl NormalChart {
    pub fn at_origin(geometry: Geometry) -> Self {
        let (e1, e2) = geometry.origin_frame();
        Self {
            geometry,
            center: geometry.origin(),
            e1,
            e2,
        }
    }

    /// Chart centered at `center` with first axis along the tangent part of `hint`.
    pub fn centered(geometry: Geometry, center: Vec3, hint: &Vec3) -> Self {
        let e1 = geometry.unit_tangent(&center, hint);
        let e2 = geometry.rotate(&center, &e1);
        Self {
            geometry,
            center,
            e1,
            e2,
        }
    }

    pub fn point(&self, x: f64, y: f64) -> Vec3 {
        let r = x.hypot(y);
        if r == 0.0 {
            return self.center;
        }
        let v = (self.e1 * x + self.e2 * y) / r;
        self.geometry.project(&self.geometry.exp(&self.center, &v, r))
    }

    pub fn coords(&self, p: &Vec3) -> (f64, f64) {
        let g = self.geometry;
        match g.direction(&self.center, p) {
            None => (0.0, 0.0),
            Some(v) => {
                let r = g.dist(&self.center, p);
                (r * g.dot(&v, &self.e1), r * g.dot(&v, &self.e2))
            }
        }
    }
}

/// A point of H² or S²₊.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    x: Vec3,
    geometry: Geometry,
}

impl SurfacePoint {
    /// Validates the model constraint to a loose tolerance and renormalizes.
    pub fn new(geometry: Geometry, x: Vec3) -> Result<Self> {
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinates".into()));
        }
        if !geometry.on_model(&x, 1e-8) {
            return Err(Error::Domain(format!(
                "{x:?} is not a point of the {geometry:?} model"
            )));
        }
        Ok(Self {
            x: geometry.project(&x),
            geometry,
        })
    }

    pub(crate) fn raw(geometry: Geometry, x: Vec3) -> Self {
        Self { x, geometry }
    }

    pub fn origin(geometry: Geometry) -> Self {
        Self::raw(geometry, geometry.origin())
    }

    /// Point with geodesic normal coordinates `(x, y)` about the origin.
    pub fn from_normal_coords(geometry: Geometry, x: f64, y: f64) -> Result<Self> {
        Self::new(geometry, geometry.from_normal_coords(x, y))
    }

    pub fn coords(&self) -> &Vec3 {
        &self.x
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
}

/// A unit tangent vector at a [`SurfacePoint`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitTangent {
    base: SurfacePoint,
    v: Vec3,
}

impl UnitTangent {
    /// Projects `v` onto the tangent plane at `base` and normalizes it.
    pub fn new(base: SurfacePoint, v: Vec3) -> Result<Self> {
        let g = base.geometry;
        let w = g.tangent_part(&base.x, &v);
        let n = g.dot(&w, &w);
        if !(n > 1e-24) {
            return Err(Error::InvalidParameter("zero tangent vector".into()));
        }
        Ok(Self {
            base,
            v: w / n.sqrt(),
        })
    }

    pub(crate) fn raw(base: SurfacePoint, v: Vec3) -> Self {
        Self { base, v }
    }

    pub fn base(&self) -> &SurfacePoint {
        &self.base
    }

    pub fn vector(&self) -> &Vec3 {
        &self.v
    }

    /// The tangent rotated by +90°.
    pub fn rotated(&self) -> Self {
        let g = self.base.geometry;
        Self::raw(self.base, g.rotate(&self.base.x, &self.v))
    }

    /// Oriented angle from `self` to `other`, in (−π, π].
    pub fn angle_to(&self, other: &UnitTangent) -> f64 {
        let g = self.base.geometry;
        let j = g.rotate(&self.base.x, &self.v);
        g.dot(&other.v, &j).atan2(g.dot(&other.v, &self.v))
    }
}

fn same_geometry(p: &SurfacePoint, q: &SurfacePoint) -> Result<Geometry> {
    if p.geometry != q.geometry {
        return Err(Error::MixedGeometry);
    }
    Ok(p.geometry)
}

/// Geodesic distance `d(p, q)`.
pub fn distance(p: &SurfacePoint, q: &SurfacePoint) -> Result<f64> {
    let g = same_geometry(p, q)?;
    Ok(g.dist(&p.x, &q.x))
}

/// Follows the geodesic from `p` with unit velocity `v` for length `len`.
pub fn exp_map(p: &SurfacePoint, v: &UnitTangent, len: f64) -> Result<SurfacePoint> {
    let g = same_geometry(p, &v.base)?;
    if !(len >= 0.0) || !len.is_finite() {
        return Err(Error::InvalidParameter(format!("geodesic length {len}")));
    }
    let x = g.project(&g.exp(&p.x, &v.v, len));
    if g == Geometry::Spherical && !(x[2] > 0.0) {
        return Err(Error::Domain(format!(
            "geodesic of length {len} leaves the open hemisphere"
        )));
    }
    Ok(SurfacePoint::raw(g, x))
}

/// Unit tangent at `p` of the geodesic segment from `p` to `q`.
pub fn initial_direction(p: &SurfacePoint, q: &SurfacePoint) -> Result<UnitTangent> {
    let g = same_geometry(p, q)?;
    let v = g.direction(&p.x, &q.x).ok_or(Error::UndefinedDirection)?;
    Ok(UnitTangent::raw(*p, v))
}

/// Elastic reflection of `incoming` in the line spanned by `boundary_tangent`:
/// the tangential component is kept and the normal component negated.
pub fn reflect_direction(incoming: &UnitTangent, boundary_tangent: &UnitTangent) -> UnitTangent {
    let g = incoming.base.geometry;
    debug_assert!(g.dist(&incoming.base.x, &boundary_tangent.base.x) < 1e-9);
    let t = &boundary_tangent.v;
    let out = t * (2.0 * g.dot(&incoming.v, t)) - incoming.v;
    let out = g.unit_tangent(&incoming.base.x, &out);
    UnitTangent::raw(incoming.base, out)
}

/// Angle between a chord at depth `h` and an osculating curve of constant
/// geodesic curvature `kappa` in H²: `arccos(cosh h − κ sinh h)`.
pub fn f_kappa(h: f64, kappa: f64) -> Result<f64> {
    osculating_angle(Geometry::Hyperbolic, h, kappa)
}

/// Spherical counterpart of [`f_kappa`]: `arccos(cos h − κ sin h)`.
pub fn f_kappa_spherical(h: f64, kappa: f64) -> Result<f64> {
    osculating_angle(Geometry::Spherical, h, kappa)
}

pub(crate) fn osculating_angle(geometry: Geometry, h: f64, kappa: f64) -> Result<f64> {
    if !(h >= 0.0) || !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::InvalidParameter(format!("h = {h}, kappa = {kappa}")));
    }
    // 1 − (C(h) − κ S(h)), kept free of cancellation for small h.
    let half = geometry.sin_l(0.5 * h);
    let x = kappa * geometry.sin_l(h) + geometry.sign() * 2.0 * half * half;
    if !(0.0..=2.0).contains(&x) {
        return Err(Error::Domain(format!(
            "depth {h} is outside the domain of f for curvature {kappa}"
        )));
    }
    // arccos(1 − x) = 2 arcsin(√(x/2))
    Ok(2.0 * (0.5 * x).sqrt().min(1.0).asin())
}

/// Legs of a right triangle from its hypotenuse and one acute angle:
/// returns `(opposite, adjacent)` relative to the angle.
///
/// Hyperbolic: `sinh a = sinh h sin θ`, `tanh b = tanh h cos θ`.
/// Spherical: `sin a = sin h sin θ`, `tan b = tan h cos θ`.
pub fn right_triangle_relations(geometry: Geometry, hyp: f64, theta: f64) -> Result<(f64, f64)> {
    if !(hyp >= 0.0) || !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "hypotenuse {hyp}, angle {theta}"
        )));
    }
    if geometry == Geometry::Spherical && hyp >= FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "spherical hypotenuse {hyp} must be below π/2"
        )));
    }
    Ok(match geometry {
        Geometry::Hyperbolic => (
            (hyp.sinh() * theta.sin()).asinh(),
            (hyp.tanh() * theta.cos()).atanh(),
        ),
        Geometry::Spherical => (
            (hyp.sin() * theta.sin()).asin(),
            (hyp.tan() * theta.cos()).atan(),
        ),
    })
}

/// Perimeter of a closed geodesic polygon.
pub fn polygon_perimeter(geometry: Geometry, vertices: &[Vec3]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| geometry.dist(&vertices[i], &vertices[(i + 1) % n]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: Geometry = Geometry::Hyperbolic;
    const S: Geometry = Geometry::Spherical;

    fn pt(g: Geometry, x: f64, y: f64) -> SurfacePoint {
        SurfacePoint::from_normal_coords(g, x, y).unwrap()
    }

    #[test]
    fn distance_examples() {
        let p = SurfacePoint::new(H, Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let q = SurfacePoint::new(H, Vec3::new(1f64.cosh(), 1f64.sinh(), 0.0)).unwrap();
        assert_eq!(distance(&p, &p).unwrap(), 0.0);
        assert!((distance(&p, &q).unwrap() - 1.0).abs() < 1e-15);

        let pole = SurfacePoint::origin(S);
        let r = SurfacePoint::new(S, Vec3::new(0.3f64.sin(), 0.0, 0.3f64.cos())).unwrap();
        assert!((distance(&pole, &r).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn mixed_geometry_is_rejected() {
        let p = SurfacePoint::origin(H);
        let q = SurfacePoint::origin(S);
        assert_eq!(distance(&p, &q), Err(Error::MixedGeometry));
    }

    #[test]
    fn model_violations_are_rejected() {
        assert!(SurfacePoint::new(H, Vec3::new(2.0, 0.0, 0.0)).is_err());
        assert!(SurfacePoint::new(H, Vec3::new(-1.0, 0.0, 0.0)).is_err());
        assert!(SurfacePoint::new(S, Vec3::new(0.0, 0.0, -1.0)).is_err());
        assert!(SurfacePoint::new(S, Vec3::new(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn exp_map_closed_form() {
        let p = SurfacePoint::origin(H);
        let v = UnitTangent::new(p, Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let q = exp_map(&p, &v, 1.0).unwrap();
        let expect = Vec3::new(1f64.cosh(), 1f64.sinh(), 0.0);
        assert!((q.coords() - expect).norm() < 1e-14);
        assert_eq!(exp_map(&p, &v, 0.0).unwrap(), p);
    }

    #[test]
    fn exp_map_leaving_hemisphere_is_domain_error() {
        let p = pt(S, 1.2, 0.0);
        let v = UnitTangent::new(p, Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!(matches!(exp_map(&p, &v, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn initial_direction_examples() {
        let p = SurfacePoint::origin(H);
        let q = SurfacePoint::new(H, Vec3::new(1f64.cosh(), 1f64.sinh(), 0.0)).unwrap();
        let v = initial_direction(&p, &q).unwrap();
        assert!((v.vector() - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-14);
        assert_eq!(initial_direction(&p, &p), Err(Error::UndefinedDirection));

        let pole = SurfacePoint::origin(S);
        let r = pt(S, 0.0, 1.4);
        let m = initial_direction(&pole, &r).unwrap();
        assert!((m.vector() - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn reflection_special_cases() {
        for g in [H, S] {
            let p = pt(g, 0.2, -0.1);
            let t = UnitTangent::new(p, g.unit_tangent(p.coords(), &Vec3::new(0.3, 1.0, 0.2)))
                .unwrap();
            let n = t.rotated();
            let out = reflect_direction(&n, &t);
            assert!((out.vector() + n.vector()).norm() < 1e-14);
            let same = reflect_direction(&t, &t);
            assert!((same.vector() - t.vector()).norm() < 1e-14);
        }
    }

    #[test]
    fn f_kappa_examples() {
        assert_eq!(f_kappa(0.0, 2.0).unwrap(), 0.0);
        // arccos(cosh 0.1 − 2 sinh 0.1), evaluated directly
        let direct = (0.1f64.cosh() - 2.0 * 0.1f64.sinh()).acos();
        assert!((f_kappa(0.1, 2.0).unwrap() - direct).abs() < 1e-14);
        assert!((direct - 0.6357).abs() < 1e-4);
        let mut prev = f64::INFINITY;
        for h in [1e-3, 1e-4, 1e-5] {
            let dev = (f_kappa(h, 2.0).unwrap() / (4.0 * h).sqrt() - 1.0).abs();
            assert!(dev < prev);
            prev = dev;
        }
        assert!(matches!(f_kappa(3.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn f_kappa_is_monotone() {
        let mut prev = 0.0;
        for k in 1..50 {
            let h = 0.01 * k as f64;
            let v = f_kappa(h, 3.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
        let mut prev = 0.0;
        for k in 1..50 {
            let v = f_kappa(0.05, 0.2 * k as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn right_triangle_examples() {
        let (a, b) = right_triangle_relations(H, 1.0, std::f64::consts::FRAC_PI_4).unwrap();
        assert!((1f64.cosh() - a.cosh() * b.cosh()).abs() < 1e-10);
        let (a, b) = right_triangle_relations(S, 0.5, std::f64::consts::FRAC_PI_6).unwrap();
        assert!((0.5f64.cos() - a.cos() * b.cos()).abs() < 1e-10);
        let (a, b) = right_triangle_relations(H, 0.7, 0.0).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 0.7).abs() < 1e-14);
        assert!(right_triangle_relations(S, 1.6, 0.3).is_err());
    }

    fn arb_point(g: Geometry) -> impl Strategy<Value = Vec3> {
        let r = match g {
            Geometry::Hyperbolic => 2.5,
            Geometry::Spherical => 0.7,
        };
        (0.0..r, 0.0..std::f64::consts::TAU)
            .prop_map(move |(rho, phi)| g.from_normal_coords(rho * phi.cos(), rho * phi.sin()))
    }

    fn arb_geometry() -> impl Strategy<Value = Geometry> {
        prop_oneof![Just(H), Just(S)]
    }

    proptest! {
        #[test]
        fn outputs_stay_on_model(g in arb_geometry(), phi in 0.0..6.28f64, len in 0.0..0.6f64,
                                 seed in (0.0..0.5f64, 0.0..6.28f64)) {
            let p = SurfacePoint::new(g, g.from_normal_coords(seed.0 * seed.1.cos(), seed.0 * seed.1.sin())).unwrap();
            let (e1, e2) = g.origin_frame();
            let v = UnitTangent::new(p, e1 * phi.cos() + e2 * phi.sin()).unwrap();
            prop_assert!((g.dot(v.vector(), v.vector()) - 1.0).abs() < MODEL_TOL);
            prop_assert!(g.dot(v.vector(), p.coords()).abs() < MODEL_TOL);
            let q = exp_map(&p, &v, len).unwrap();
            prop_assert!(g.on_model(q.coords(), MODEL_TOL));
            let j = v.rotated();
            prop_assert!((g.dot(j.vector(), j.vector()) - 1.0).abs() < MODEL_TOL);
            prop_assert!(g.dot(j.vector(), v.vector()).abs() < MODEL_TOL);
            if len > 1e-6 {
                let back = initial_direction(&p, &q).unwrap();
                prop_assert!((back.vector() - v.vector()).norm() < 1e-10);
                prop_assert!((distance(&p, &q).unwrap() - len).abs() < 1e-10);
            }
        }

        #[test]
        fn triangle_inequality(g in arb_geometry(), a in arb_point(H), b in arb_point(H), c in arb_point(H),
                               sa in arb_point(S), sb in arb_point(S), sc in arb_point(S)) {
            let (a, b, c) = match g { Geometry::Hyperbolic => (a, b, c), Geometry::Spherical => (sa, sb, sc) };
            let ab = g.dist(&a, &b);
            prop_assert!((ab - g.dist(&b, &a)).abs() < 1e-12);
            prop_assert!(ab <= g.dist(&a, &c) + g.dist(&c, &b) + 1e-12);
            prop_assert!(ab >= 0.0);
        }

        #[test]
        fn reflection_preserves_angle(g in arb_geometry(), a in 0.0..6.28f64, b in 0.0..6.28f64) {
            let p = SurfacePoint::new(g, g.from_normal_coords(0.1, 0.3)).unwrap();
            let (e1, e2) = g.origin_frame();
            let t = UnitTangent::new(p, e1 * a.cos() + e2 * a.sin()).unwrap();
            let i = UnitTangent::new(p, e1 * b.cos() + e2 * b.sin()).unwrap();
            let o = reflect_direction(&i, &t);
            let ci = g.dot(i.vector(), t.vector());
            let co = g.dot(o.vector(), t.vector());
            prop_assert!((ci - co).abs() < 1e-12);
            prop_assert!((t.angle_to(&i) + t.angle_to(&o)).abs() < 1e-12
                || ((t.angle_to(&i) + t.angle_to(&o)).abs() - std::f64::consts::TAU).abs() < 1e-12);
        }

        #[test]
        fn law_of_cosines(g in arb_geometry(), a in arb_point(H), b in arb_point(H), c in arb_point(H),
                          sa in arb_point(S), sb in arb_point(S), sc in arb_point(S)) {
            let (p, q, r) = match g { Geometry::Hyperbolic => (a, b, c), Geometry::Spherical => (sa, sb, sc) };
            let (x, y) = (g.dist(&p, &q), g.dist(&p, &r));
            prop_assume!(x > 1e-3 && y > 1e-3);
            let u = g.direction(&p, &q).unwrap();
            let v = g.direction(&p, &r).unwrap();
            let alpha = g.dot(&u, &v).clamp(-1.0, 1.0).acos();
            let z = g.dist(&q, &r);
            let lhs = g.cos_l(z);
            let rhs = match g {
                Geometry::Hyperbolic => x.cosh() * y.cosh() - x.sinh() * y.sinh() * alpha.cos(),
                Geometry::Spherical => x.cos() * y.cos() + x.sin() * y.sin() * alpha.cos(),
            };
            prop_assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }

        #[test]
        fn right_triangle_laws(g in arb_geometry(), hyp in 0.01..1.5f64, theta in 0.0..1.5707f64) {
            let (a, b) = right_triangle_relations(g, hyp, theta).unwrap();
            match g {
                Geometry::Hyperbolic => {
                    prop_assert!((hyp.cosh() - a.cosh() * b.cosh()).abs() < 1e-10 * hyp.cosh());
                    prop_assert!((theta.sin() - a.sinh() / hyp.sinh()).abs() < 1e-10);
                    prop_assert!((theta.cos() - b.tanh() / hyp.tanh()).abs() < 1e-10);
                }
                Geometry::Spherical => {
                    prop_assert!((hyp.cos() - a.cos() * b.cos()).abs() < 1e-10);
                }
            }
        }
    }
}
