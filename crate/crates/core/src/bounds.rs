//! Caustic-free neighbourhoods of the boundary.
//!
//! Every convex caustic of a table with diameter `D` and minimal curvature
//! `κ_min` stays within distance `ε` of the boundary, where
//!
//! * on H²: `ε = arctanh(√2 κ_min tanh^{3/2}(D) sinh^{1/2}(D))`, and no bound
//!   (`+∞`) when the argument reaches 1;
//! * on S²₊ with `D < π/2`: `ε = 2 arctan((√π/2) κ_min tan²(D))`.
//!
//! The interior points deeper than `ε` form the caustic-free region.

use crate::error::{Error, Result};
use crate::geom::{Geometry, Vec3};
use crate::string::ConvexCaustic;
use crate::table::{stadium_table, GeometrySummary, Table};
use crate::verify::{verify_caustic, CausticReport, VERIFY_SAMPLES, VERIFY_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Default raster resolution per axis.
pub const DEFAULT_RESOLUTION: usize = 512;

/// The width `ε` of the boundary neighbourhood containing every convex caustic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Epsilon {
    /// `ε`, or `None` for the `+∞` sentinel.
    pub value: Option<f64>,
    /// The argument of `arctanh` (H²) or `arctan` (S²).
    pub argument: f64,
}

impl Epsilon {
    pub fn is_infinite(&self) -> bool {
        self.value.is_none()
    }

    /// `ε` as a float, `+∞` for the sentinel.
    pub fn as_f64(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }
}

/// `ε` from `κ_min` and `D` directly.
pub fn epsilon_from(geometry: Geometry, kappa_min: f64, diameter: f64) -> Result<Epsilon> {
    if !(kappa_min >= 0.0) || !(diameter > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need κ_min ≥ 0 and D > 0, got κ_min = {kappa_min}, D = {diameter}"
        )));
    }
    match geometry {
        Geometry::Hyperbolic => {
            let arg = 2f64.sqrt() * kappa_min * diameter.tanh().powf(1.5) * diameter.sinh().sqrt();
            Ok(Epsilon {
                value: (arg < 1.0).then(|| arg.atanh()),
                argument: arg,
            })
        }
        Geometry::Spherical => {
            if diameter >= FRAC_PI_2 {
                return Err(Error::HypothesisViolated(format!(
                    "spherical bound needs D < π/2, got D = {diameter}"
                )));
            }
            let arg = 0.5 * PI.sqrt() * kappa_min * diameter.tan().powi(2);
            Ok(Epsilon {
                value: Some(2.0 * arg.atan()),
                argument: arg,
            })
        }
    }
}

/// `ε` for a table, from its cached summary.
pub fn epsilon_bound(table: &Table) -> Result<Epsilon> {
    let s = table.summary();
    epsilon_from(table.geometry(), s.kappa_min.max(0.0), s.diameter)
}

/// Smallest `κ_min` giving a prescribed `ε` for diameter `D` on H².
pub fn kappa_for_epsilon(diameter: f64, eps: f64) -> f64 {
    eps.tanh() / (2f64.sqrt() * diameter.tanh().powf(1.5) * diameter.sinh().sqrt())
}

/// Lower and upper bounds for the Lazutkin parameter of a caustic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub lazutkin: f64,
    pub upper: f64,
    /// `lower < lazutkin < upper`.
    pub holds: bool,
}

/// The bounds in terms of `δ_γ`, `D`, `κ_min` for a measured `L`.
pub fn sandwich_from(geometry: Geometry, delta: f64, diameter: f64, kappa_min: f64, lazutkin: f64) -> Sandwich {
    let (lower, upper) = match geometry {
        Geometry::Hyperbolic => (
            delta.tanh().powi(2) / diameter.tanh(),
            2.0 * kappa_min.powi(2) * diameter.tanh().powi(2) * diameter.sinh(),
        ),
        Geometry::Spherical => (
            4.0 * (0.5 * delta).tan().powi(2) / diameter.tan(),
            PI * kappa_min.powi(2) * diameter.tan().powi(3),
        ),
    };
    Sandwich {
        lower,
        lazutkin,
        upper,
        holds: lower < lazutkin && lazutkin < upper,
    }
}

/// Sandwich for a caustic whose certificate is already computed.
pub fn sandwich_from_report(table: &Table, report: &CausticReport) -> Result<Sandwich> {
    if !report.verified {
        return Err(Error::VerificationRequired {
            residual: report.max_tangency_residual,
            tolerance: report.tolerance,
        });
    }
    let s = table.summary();
    if table.geometry() == Geometry::Spherical && s.diameter >= FRAC_PI_2 {
        return Err(Error::HypothesisViolated(format!(
            "spherical bound needs D < π/2, got D = {}",
            s.diameter
        )));
    }
    Ok(sandwich_from(
        table.geometry(),
        report.delta_gamma,
        s.diameter,
        s.kappa_min,
        report.lazutkin_mean,
    ))
}

/// Verifies `caustic` and evaluates the sandwich.
pub fn lazutkin_sandwich(table: &Table, caustic: &ConvexCaustic) -> Result<Sandwich> {
    let report = verify_caustic(table, caustic, VERIFY_SAMPLES, VERIFY_TOL)?;
    sandwich_from_report(table, &report)
}

/// Raster of the points deeper than `ε`, in normal coordinates at the
/// incenter.
#[derive(Clone, Debug)]
pub struct Region {
    pub epsilon: f64,
    pub resolution: usize,
    /// Chart window `(x_min, x_max, y_min, y_max)`.
    pub window: (f64, f64, f64, f64),
    /// Row-major, row 0 at `y_min`.
    pub mask: Vec<bool>,
    pub component_count: usize,
    /// Region pixels over table pixels.
    pub area_fraction: f64,
    /// Set when `ε` is 0 or `+∞` and the region is trivial.
    pub degenerate: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub component_count: usize,
    pub area_fraction: f64,
    pub resolution: usize,
    pub degenerate: Option<String>,
}

impl Region {
    pub fn summary(&self) -> RegionSummary {
        RegionSummary {
            component_count: self.component_count,
            area_fraction: self.area_fraction,
            resolution: self.resolution,
            degenerate: self.degenerate.clone(),
        }
    }

    /// Chart coordinates of the center of pixel `(i, j)` (column, row).
    pub fn pixel_center(&self, i: usize, j: usize) -> (f64, f64) {
        pixel_center(self.window, self.resolution, i, j)
    }
}

fn pixel_center(w: (f64, f64, f64, f64), n: usize, i: usize, j: usize) -> (f64, f64) {
    (
        w.0 + (w.1 - w.0) * (i as f64 + 0.5) / n as f64,
        w.2 + (w.3 - w.2) * (j as f64 + 0.5) / n as f64,
    )
}

/// The caustic-free region `K ∖ (∂K)_ε` for the table's own `ε`.
pub fn caustic_free_region(table: &Table, resolution: usize) -> Result<Region> {
    let eps = epsilon_bound(table)?;
    match eps.value {
        None => {
            let mut r = region_for_epsilon(table, f64::INFINITY, resolution);
            r.degenerate = Some("epsilon-infinite".into());
            Ok(r)
        }
        Some(e) if e == 0.0 => {
            let mut r = region_for_epsilon(table, 0.0, resolution);
            r.degenerate = Some("epsilon-zero".into());
            Ok(r)
        }
        Some(e) => Ok(region_for_epsilon(table, e, resolution)),
    }
}

/// Rasterizes `{x : δ(x) > eps}` and counts its 4-connected components.
pub fn region_for_epsilon(table: &Table, eps: f64, resolution: usize) -> Region {
    let n = resolution.max(1);
    let chart = table.chart();
    let (x0, x1, y0, y1) = table.chart_bbox(&chart);
    // pad by half a pixel so boundary pixels are never clipped
    let (px, py) = (0.5 * (x1 - x0) / n as f64, 0.5 * (y1 - y0) / n as f64);
    let window = (x0 - px, x1 + px, y0 - py, y1 + py);
    let cells: Vec<(bool, bool)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (x, y) = pixel_center(window, n, k % n, k / n);
            let p = chart.point(x, y);
            let inside = table.depth_exceeds(&p, 0.0);
            let deep = inside && eps.is_finite() && table.depth_exceeds(&p, eps);
            (inside, deep)
        })
        .collect();
    let mask: Vec<bool> = cells.iter().map(|c| c.1).collect();
    let inside = cells.iter().filter(|c| c.0).count();
    let deep = mask.iter().filter(|&&b| b).count();
    Region {
        epsilon: eps,
        resolution: n,
        window,
        component_count: count_components(&mask, n),
        area_fraction: if inside > 0 { deep as f64 / inside as f64 } else { 0.0 },
        mask,
        degenerate: None,
    }
}

/// Number of 4-connected components of `true` cells in an `n × n` grid.
pub fn count_components(mask: &[bool], n: usize) -> usize {
    let mut seen = vec![false; mask.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (i, j) = (k % n, k / n);
            let mut visit = |m: usize| {
                if mask[m] && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < n {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - n);
            }
            if j + 1 < n {
                visit(k + n);
            }
        }
    }
    count
}

/// Everything `bounds` reports for one table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub geometry: Geometry,
    pub summary: GeometrySummary,
    pub epsilon: Epsilon,
    pub epsilon_infinite: bool,
    pub sandwich: Option<Sandwich>,
    pub caustic: Option<CausticReport>,
    pub region: Option<RegionSummary>,
}

/// `ε`, optionally the sandwich for a caustic and the region raster.
pub fn bound_report(
    table: &Table,
    caustic: Option<&ConvexCaustic>,
    resolution: Option<usize>,
) -> Result<(BoundReport, Option<Region>)> {
    let epsilon = epsilon_bound(table)?;
    let (sandwich, caustic_report) = match caustic {
        Some(c) => {
            let report = verify_caustic(table, c, VERIFY_SAMPLES, VERIFY_TOL)?;
            (Some(sandwich_from_report(table, &report)?), Some(report))
        }
        None => (None, None),
    };
    let region = match resolution {
        Some(n) => Some(caustic_free_region(table, n)?),
        None => None,
    };
    Ok((
        BoundReport {
            geometry: table.geometry(),
            summary: table.summary().clone(),
            epsilon,
            epsilon_infinite: epsilon.is_infinite(),
            sandwich,
            caustic: caustic_report,
            region: region.as_ref().map(Region::summary),
        },
        region,
    ))
}

/// A stadium whose caustic-free region splits into two components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StadiumHit {
    pub radius: f64,
    pub half_separation: f64,
    pub smoothing: f64,
    pub epsilon: f64,
    pub inradius: f64,
    /// Distance from the center of the neck to the boundary.
    pub neck_depth: f64,
    pub component_count: usize,
}

/// Builds the stadium `(R, c)` whose side curvature puts `ε` halfway between
/// the neck depth and the inradius, and counts the region components.
pub fn tuned_stadium(radius: f64, half_separation: f64, resolution: usize) -> Result<(Table, StadiumHit)> {
    let g = Geometry::Hyperbolic;
    let neck = (radius.sinh() / half_separation.cosh()).asinh();
    let mut smoothing = kappa_for_epsilon(2.0 * (half_separation + radius), 0.5 * (neck + radius));
    let mut table = stadium_table(g, radius, half_separation, smoothing)?;
    for _ in 0..4 {
        let neck_depth = table.signed_distance(&g.origin());
        let target = 0.5 * (neck_depth + table.summary().inradius);
        let next = kappa_for_epsilon(table.summary().diameter, target);
        if ((next - smoothing) / smoothing).abs() < 1e-3 {
            break;
        }
        smoothing = next;
        table = stadium_table(g, radius, half_separation, smoothing)?;
    }
    let region = caustic_free_region(&table, resolution)?;
    let hit = StadiumHit {
        radius,
        half_separation,
        smoothing,
        epsilon: region.epsilon,
        inradius: table.summary().inradius,
        neck_depth: table.signed_distance(&g.origin()),
        component_count: region.component_count,
    };
    Ok((table, hit))
}

/// Scans `R ∈ [0.2, 0.5]`, `c ∈ [1, 4]` for a stadium with a disconnected
/// caustic-free region; returns the first hit.
pub fn search_disconnected_stadium(resolution: usize) -> Result<Option<StadiumHit>> {
    for &c in &[3.0, 4.0, 2.0, 1.0] {
        for &r in &[0.5, 0.4, 0.3, 0.2] {
            let (_, hit) = tuned_stadium(r, c, resolution)?;
            if hit.component_count == 2 {
                return Ok(Some(hit));
            }
        }
    }
    Ok(None)
}

/// Area of a chart pixel is irrelevant to the component count; this helper
/// maps a mask pixel back to the surface for exporters.
pub fn region_pixel_point(table: &Table, region: &Region, i: usize, j: usize) -> Vec3 {
    let (x, y) = region.pixel_center(i, j);
    table.chart().point(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::disk_table;

    #[test]
    fn unit_disk_has_no_region() {
        let t = disk_table(Geometry::Hyperbolic, 1.0).unwrap();
        let e = epsilon_bound(&t).unwrap();
        assert!(e.is_infinite());
        assert!((e.argument - 3.347).abs() < 1e-3, "{}", e.argument);
    }

    #[test]
    fn flat_boundary_gives_zero() {
        let e = epsilon_from(Geometry::Hyperbolic, 0.0, 3.0).unwrap();
        assert_eq!(e.value, Some(0.0));
        let e = epsilon_from(Geometry::Spherical, 0.0, 1.0).unwrap();
        assert_eq!(e.value, Some(0.0));
    }

    #[test]
    fn spherical_diameter_hypothesis() {
        assert!(matches!(
            epsilon_from(Geometry::Spherical, 1.0, 1.6),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn components_of_synthetic_mask() {
        let n = 5;
        let mut m = vec![false; n * n];
        for k in [0, 1, 5, 3, 4, 24, 18] {
            m[k] = true;
        }
        // {0,1,5}, {3,4}, {24}, {18}
        assert_eq!(count_components(&m, n), 4);
    }

    #[test]
    fn small_epsilon_disk_region_is_one_disk() {
        let t = disk_table(Geometry::Spherical, 0.3).unwrap();
        let r = region_for_epsilon(&t, 0.1, 128);
        assert_eq!(r.component_count, 1);
        // concentric disk of radius 0.2 in a disk of radius 0.3
        let expect = (1.0 - 0.2f64.cos()) / (1.0 - 0.3f64.cos());
        assert!((r.area_fraction - expect).abs() < 0.03, "{}", r.area_fraction);
    }
}
