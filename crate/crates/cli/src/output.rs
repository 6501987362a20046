//! Artifact writers. Every file is written to a temporary sibling and renamed
//! into place.

use crate::scene::Format;
use curvbill_core::bounds::Region;
use curvbill_core::{ConvexCaustic, Geometry, Table, Vec3};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub const GENERATOR: &str = concat!("curvbill ", env!("CARGO_PKG_VERSION"));

pub struct Output {
    pub dir: PathBuf,
    pub formats: BTreeSet<Format>,
}

impl Output {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> std::io::Result<()> {
        if self.wants(Format::Json) {
            let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
            text.push('\n');
            self.write(name, text.as_bytes())?;
        }
        Ok(())
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> std::io::Result<()> {
        if self.wants(Format::Csv) {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
            self.write(name, &bytes)?;
        }
        Ok(())
    }

    pub fn svg(&self, name: &str, text: &str) -> std::io::Result<()> {
        if self.wants(Format::Svg) {
            self.write(name, text.as_bytes())?;
        }
        Ok(())
    }

    pub fn pgm(&self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        if self.wants(Format::Pgm) {
            self.write(name, bytes)?;
        }
        Ok(())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Planar image of a model point: Poincaré disk for H², orthographic view
/// from the pole for S²₊.
pub fn project(g: Geometry, x: &Vec3) -> (f64, f64) {
    match g {
        Geometry::Hyperbolic => (x[1] / (1.0 + x[0]), x[2] / (1.0 + x[0])),
        Geometry::Spherical => (x[0], x[1]),
    }
}

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;

struct Frame2 {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame2 {
    fn fit(points: &[(f64, f64)]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        Self {
            x0,
            y1,
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        (MARGIN + (p.0 - self.x0) * self.scale, MARGIN + (self.y1 - p.1) * self.scale)
    }
}

fn polyline(out: &mut String, frame: &Frame2, pts: &[(f64, f64)], stroke: &str, closed: bool) {
    let tag = if closed { "polygon" } else { "polyline" };
    let _ = write!(out, r#"<{tag} fill="none" stroke="{stroke}" stroke-width="1.5" points=""#);
    for (i, &p) in pts.iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = write!(out, "{}{:.3},{:.3}", if i > 0 { " " } else { "" }, x, y);
    }
    out.push_str("\"/>\n");
}

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, "<!-- generator: {GENERATOR} -->");
    let _ = writeln!(out, "<title>{title}</title>");
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Boundary of `table`, its curvature jumps and optionally a caustic.
pub fn table_svg(table: &Table, samples: usize, caustic: Option<&ConvexCaustic>) -> String {
    let g = table.geometry();
    let boundary: Vec<(f64, f64)> = table
        .boundary_samples(samples)
        .iter()
        .map(|(_, p)| project(g, p))
        .collect();
    let frame = Frame2::fit(&boundary);
    let mut out = String::new();
    let projection = match g {
        Geometry::Hyperbolic => "Poincare disk",
        Geometry::Spherical => "orthographic",
    };
    svg_open(&mut out, &format!("billiard table ({projection} projection)"));
    polyline(&mut out, &frame, &boundary, "black", true);
    if let Some(c) = caustic {
        let per = c.perimeter();
        let pts: Vec<(f64, f64)> = (0..samples)
            .map(|k| project(g, &c.point_at(per * k as f64 / samples as f64)))
            .collect();
        polyline(&mut out, &frame, &pts, "steelblue", true);
    }
    for &s in table.jumps() {
        let (x, y) = frame.map(project(g, &table.point(s)));
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="crimson"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot of phase points `(s, t)` on `[0, l) × [0, π]`.
pub fn portrait_svg(length: f64, points: &[(usize, f64, f64)]) -> String {
    let mut out = String::new();
    svg_open(&mut out, "phase portrait (s horizontal, t vertical)");
    let w = SIZE - 2.0 * MARGIN;
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{w}" fill="none" stroke="gray"/>"#
    );
    let palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
    for &(orbit, s, t) in points {
        let x = MARGIN + w * s / length;
        let y = MARGIN + w * (1.0 - t / std::f64::consts::PI);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="0.8" fill="{}"/>"#,
            palette[orbit % palette.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Binary PGM of a region mask, top row at the largest chart `y`.
pub fn region_pgm(region: &Region) -> Vec<u8> {
    let n = region.resolution;
    let mut out = format!("P5\n# {GENERATOR}\n{n} {n}\n255\n").into_bytes();
    for j in (0..n).rev() {
        for i in 0..n {
            out.push(if region.mask[j * n + i] { 255 } else { 0 });
        }
    }
    out
}
