//! Arclength-parametrized closed curves on the model surfaces.
//!
//! Two representations share one interface: exact geodesic circles, and
//! piecewise sampled curves stored as uniform arclength nodes with local
//! quintic (six-point Lagrange) interpolation. Pieces meet C¹ at their ends;
//! curvature may jump there, and the interpolation stencils never cross a
//! piece boundary.

use crate::error::{Error, Result};
use crate::geom::{Geometry, Vec3};
use crate::numerics::{brent, interp_uniform, lagrange6};
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Position, unit tangent and inward unit normal at a boundary parameter.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub point: Vec3,
    pub tangent: Vec3,
    pub normal: Vec3,
    pub curvature: f64,
}

/// Which one-sided limit to take at a piece boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub struct Circle {
    geometry: Geometry,
    center: Vec3,
    e1: Vec3,
    e2: Vec3,
    radius: f64,
}

impl Circle {
    pub fn new(geometry: Geometry, center: Vec3, e1: Vec3, radius: f64) -> Self {
        let e1 = geometry.unit_tangent(&center, &e1);
        let e2 = geometry.rotate(&center, &e1);
        Self {
            geometry,
            center,
            e1,
            e2,
            radius,
        }
    }

    pub fn center(&self) -> &Vec3 {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn frame(&self, s: f64) -> Frame {
        let g = self.geometry;
        let (c, sn) = (g.cos_l(self.radius), g.sin_l(self.radius));
        let phi = s / sn;
        let radial = self.e1 * phi.cos() + self.e2 * phi.sin();
        let point = self.center * c + radial * sn;
        let tangent = self.e2 * phi.cos() - self.e1 * phi.sin();
        let normal = g.rotate(&point, &tangent);
        Frame {
            point,
            tangent,
            normal,
            curvature: c / sn,
        }
    }
}

#[derive(Clone, Debug)]
struct Piece {
    start: f64,
    h: f64,
    nodes: Vec<Vec3>,
}

#[derive(Clone, Debug)]
pub struct SampledCurve {
    geometry: Geometry,
    pieces: Vec<Piece>,
    length: f64,
    periodic: bool,
}

impl SampledCurve {
    /// A single closed piece from nodes already spaced uniformly in arclength.
    pub fn periodic_from_nodes(geometry: Geometry, nodes: Vec<Vec3>, length: f64) -> Result<Self> {
        if nodes.len() < 8 {
            return Err(Error::InvalidParameter("too few boundary nodes".into()));
        }
        let h = length / nodes.len() as f64;
        Ok(Self {
            geometry,
            pieces: vec![Piece {
                start: 0.0,
                h,
                nodes,
            }],
            length,
            periodic: true,
        })
    }

    fn locate(&self, s: f64, side: Side) -> (usize, f64) {
        if self.periodic {
            return (0, s);
        }
        let mut i = self.pieces.partition_point(|p| p.start <= s).saturating_sub(1);
        if side == Side::Left && i > 0 && (s - self.pieces[i].start).abs() < 1e-13 {
            i -= 1;
        } else if side == Side::Left && i == 0 && s.abs() < 1e-13 {
            let last = self.pieces.len() - 1;
            return (last, s + self.length);
        }
        (i, s)
    }

    fn frame(&self, s: f64, side: Side) -> Frame {
        let g = self.geometry;
        let (i, s) = self.locate(s, side);
        let piece = &self.pieces[i];
        let u = (s - piece.start) / piece.h;
        let n = piece.nodes.len();
        let i0 = if self.periodic {
            u.floor() as isize - 2
        } else {
            (u.floor() as isize - 2).clamp(0, n as isize - 6)
        };
        let x = u - i0 as f64;
        let (w0, w1, w2) = lagrange6(x);
        // Offsets from a stencil node: the derivative weights sum to zero, so
        // this removes the roundoff of the absolute coordinates.
        let node = |j: usize| &piece.nodes[(i0 + j as isize).rem_euclid(n as isize) as usize];
        let base = *node(2);
        let mut p = base;
        let mut d1 = Vec3::zeros();
        let mut d2 = Vec3::zeros();
        for j in 0..6 {
            let off = node(j) - base;
            p += off * w0[j];
            d1 += off * w1[j];
            d2 += off * w2[j];
        }
        d1 /= piece.h;
        d2 /= piece.h * piece.h;
        let point = g.project(&p);
        let vel = g.tangent_part(&point, &d1);
        let speed2 = g.dot(&vel, &vel);
        let tangent = vel / speed2.sqrt();
        let normal = g.rotate(&point, &tangent);
        let curvature = g.dot(&d2, &normal) / speed2;
        Frame {
            point,
            tangent,
            normal,
            curvature,
        }
    }

    fn breaks(&self) -> Vec<f64> {
        if self.periodic {
            Vec::new()
        } else {
            self.pieces.iter().map(|p| p.start).collect()
        }
    }

    fn mirrored(&self) -> Self {
        let flip = |x: &Vec3| Vec3::new(x[0], -x[1], x[2]);
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut start = 0.0;
        for piece in self.pieces.iter().rev() {
            let mut nodes: Vec<Vec3> = piece.nodes.iter().rev().map(flip).collect();
            if self.periodic {
                // keep node 0 at s = 0
                nodes.rotate_right(1);
            }
            let len = piece.h * if self.periodic {
                nodes.len() as f64
            } else {
                (nodes.len() - 1) as f64
            };
            pieces.push(Piece {
                start,
                h: piece.h,
                nodes,
            });
            start += len;
        }
        Self {
            geometry: self.geometry,
            pieces,
            length: self.length,
            periodic: self.periodic,
        }
    }

    /// Curvature samples at every node and half-node, one-sided at piece ends.
    fn curvature_samples(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for piece in &self.pieces {
            let m = if self.periodic {
                piece.nodes.len()
            } else {
                piece.nodes.len() - 1
            };
            for k in 0..2 * m {
                let s = piece.start + 0.5 * k as f64 * piece.h;
                out.push(self.frame(s, Side::Right).curvature);
            }
            if !self.periodic {
                let end = (piece.start + m as f64 * piece.h) % self.length;
                out.push(self.frame(end, Side::Left).curvature);
            }
        }
        out
    }
}

/// A closed, counterclockwise, arclength-parametrized curve.
#[derive(Clone, Debug)]
pub enum Curve {
    Circle(Circle),
    Sampled(SampledCurve),
}

impl Curve {
    pub fn geometry(&self) -> Geometry {
        match self {
            Curve::Circle(c) => c.geometry,
            Curve::Sampled(c) => c.geometry,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Curve::Circle(c) => TAU * c.geometry.sin_l(c.radius),
            Curve::Sampled(c) => c.length,
        }
    }

    /// Reduces `s` to `[0, length)`.
    #[inline]
    pub fn wrap(&self, s: f64) -> f64 {
        let l = self.length();
        let r = s.rem_euclid(l);
        if r >= l {
            0.0
        } else {
            r
        }
    }

    /// Frame at `s`; at a piece boundary this is the right-sided limit.
    #[inline]
    pub fn frame(&self, s: f64) -> Frame {
        self.frame_side(s, Side::Right)
    }

    pub fn frame_side(&self, s: f64, side: Side) -> Frame {
        let s = self.wrap(s);
        match self {
            Curve::Circle(c) => c.frame(s),
            Curve::Sampled(c) => c.frame(s, side),
        }
    }

    #[inline]
    pub fn point(&self, s: f64) -> Vec3 {
        self.frame(s).point
    }

    /// Parameters where adjacent smooth pieces meet (empty for a single piece).
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            Curve::Circle(_) => Vec::new(),
            Curve::Sampled(c) => c.breaks(),
        }
    }

    /// `(left, right)` curvature limits at `s`.
    pub fn curvature_limits(&self, s: f64) -> (f64, f64) {
        let l = self.frame_side(s, Side::Left).curvature;
        let r = self.frame_side(s, Side::Right).curvature;
        (l, r)
    }

    pub fn curvature_samples(&self) -> Vec<f64> {
        match self {
            Curve::Circle(c) => vec![c.frame(0.0).curvature],
            Curve::Sampled(c) => c.curvature_samples(),
        }
    }

    /// Mirror image under the reflection `x₁ ↦ −x₁`, re-oriented
    /// counterclockwise; parameter `s` maps to `length − s`.
    pub fn mirrored(&self) -> Curve {
        match self {
            Curve::Circle(c) => {
                let flip = |x: &Vec3| Vec3::new(x[0], -x[1], x[2]);
                Curve::Circle(Circle::new(c.geometry, flip(&c.center), flip(&c.e1), c.radius))
            }
            Curve::Sampled(c) => Curve::Sampled(c.mirrored()),
        }
    }

    /// Index of the smooth piece containing `s` (right-continuous).
    pub fn piece_of(&self, s: f64) -> usize {
        match self {
            Curve::Circle(_) => 0,
            Curve::Sampled(c) => c.locate(self.wrap(s), Side::Right).0,
        }
    }
}

/// A smooth parametrization `u ↦ point` on `[u0, u1]`, evaluated exactly
/// (to solver precision) at arbitrary `u`.
pub struct PieceParam<'a> {
    pub u0: f64,
    pub u1: f64,
    pub eval: Box<dyn Fn(f64) -> Result<Vec3> + Send + Sync + 'a>,
}

/// Resamples smooth parametrized pieces at uniform arclength.
///
/// Arclength is accumulated from exact geodesic chords on a fine grid with
/// one Richardson step, then inverted by interpolation plus Brent; each
/// node is finally evaluated exactly at its parameter.
pub fn build_sampled(
    geometry: Geometry,
    params: Vec<PieceParam<'_>>,
    periodic: bool,
    total_nodes: usize,
) -> Result<SampledCurve> {
    struct Prepared {
        u0: f64,
        du: f64,
        cum: Vec<f64>,
        len: f64,
    }
    let mut prepared = Vec::with_capacity(params.len());
    for p in &params {
        let fine = (total_nodes * 8 / params.len()).max(1024) & !1;
        let du = (p.u1 - p.u0) / fine as f64;
        let pts: Vec<Vec3> = (0..=fine)
            .into_par_iter()
            .map(|k| (p.eval)(p.u0 + k as f64 * du))
            .collect::<Result<_>>()?;
        let chords: Vec<f64> = pts.windows(2).map(|w| geometry.dist(&w[0], &w[1])).collect();
        let mut cum = Vec::with_capacity(fine / 2 + 1);
        cum.push(0.0);
        let (mut sf, mut sc) = (0.0, 0.0);
        for j in 0..fine / 2 {
            sf += chords[2 * j] + chords[2 * j + 1];
            sc += geometry.dist(&pts[2 * j], &pts[2 * j + 2]);
            cum.push(sf + (sf - sc) / 3.0);
        }
        let len = *cum.last().unwrap();
        if !(len > 0.0) {
            return Err(Error::Domain("degenerate boundary piece".into()));
        }
        prepared.push(Prepared {
            u0: p.u0,
            du: 2.0 * du,
            cum,
            len,
        });
    }
    let total: f64 = prepared.iter().map(|p| p.len).sum();
    let mut pieces = Vec::with_capacity(params.len());
    let mut start = 0.0;
    for (p, prep) in params.iter().zip(&prepared) {
        let m = ((total_nodes as f64 * prep.len / total).round() as usize).max(16);
        let h = prep.len / m as f64;
        let count = if periodic { m } else { m + 1 };
        let u_end = prep.u0 + prep.du * (prep.cum.len() - 1) as f64;
        let nodes: Vec<Vec3> = (0..count)
            .into_par_iter()
            .map(|j| {
                let target = j as f64 * h;
                let u = if j == 0 {
                    prep.u0
                } else if j == m {
                    u_end
                } else {
                    let k = prep.cum.partition_point(|&c| c < target).clamp(1, prep.cum.len() - 1);
                    let a = (prep.u0 + prep.du * (k as f64 - 2.0)).max(prep.u0);
                    let b = (a + 3.0 * prep.du).min(u_end);
                    brent(
                        |u| Ok(interp_uniform(&prep.cum, prep.u0, prep.du, u) - target),
                        a,
                        b,
                        1e-15,
                    )?
                };
                Ok(geometry.project(&(p.eval)(u)?))
            })
            .collect::<Result<_>>()?;
        pieces.push(Piece { start, h, nodes });
        start += prep.len;
    }
    Ok(SampledCurve {
        geometry,
        pieces,
        length: total,
        periodic: periodic && params.len() == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::NormalChart;

    fn circle_param(g: Geometry, r: f64) -> PieceParam<'static> {
        let chart = NormalChart::at_origin(g);
        PieceParam {
            u0: 0.0,
            u1: TAU,
            eval: Box::new(move |u| Ok(chart.point(r * u.cos(), r * u.sin()))),
        }
    }

    #[test]
    fn sampled_circle_matches_closed_form() {
        for (g, r) in [(Geometry::Hyperbolic, 1.0), (Geometry::Spherical, 0.3)] {
            let c = build_sampled(g, vec![circle_param(g, r)], true, 1024).unwrap();
            let curve = Curve::Sampled(c);
            assert!((curve.length() - TAU * g.sin_l(r)).abs() < 1e-12);
            let kappa = g.cos_l(r) / g.sin_l(r);
            for k in 0..37 {
                let s = curve.length() * k as f64 / 37.0;
                let f = curve.frame(s);
                assert!((f.curvature - kappa).abs() < 1e-8, "{}", f.curvature - kappa);
                assert!((g.dist(&f.point, &g.origin()) - r).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn open_pieces_are_glued() {
        let g = Geometry::Hyperbolic;
        let chart = NormalChart::at_origin(g);
        let half = |a: f64, b: f64| PieceParam {
            u0: a,
            u1: b,
            eval: Box::new(move |u: f64| Ok(chart.point(0.8 * u.cos(), 0.8 * u.sin()))),
        };
        let c = build_sampled(g, vec![half(0.0, 2.0), half(2.0, TAU)], false, 512).unwrap();
        let curve = Curve::Sampled(c);
        let b = curve.breaks();
        assert_eq!(b.len(), 2);
        let l = curve.frame_side(b[1], Side::Left);
        let r = curve.frame_side(b[1], Side::Right);
        assert!((l.point - r.point).norm() < 1e-12);
        assert!((l.tangent - r.tangent).norm() < 1e-8);
        let (kl, kr) = curve.curvature_limits(b[1]);
        assert!((kl - kr).abs() < 1e-7);
    }

    #[test]
    fn mirrored_curve_reverses_parameter() {
        let g = Geometry::Hyperbolic;
        let c = Curve::Sampled(build_sampled(g, vec![circle_param(g, 0.7)], true, 512).unwrap());
        let m = c.mirrored();
        let s = 1.234;
        let p = c.point(s);
        let q = m.point(c.length() - s);
        assert!((Vec3::new(p[0], -p[1], p[2]) - q).norm() < 1e-12);
    }
}
