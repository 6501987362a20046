//! Benchmark fixtures shared by the criterion targets.

use curvbill_core::string::{string_table_with_nodes, ConvexCaustic};
use curvbill_core::table::disk_table;
use curvbill_core::{Geometry, Table};

/// Hyperbolic disk of radius 1.
pub fn disk() -> Table {
    disk_table(Geometry::Hyperbolic, 1.0).expect("valid radius")
}

/// String table around a segment of length 0.4 with `L = 0.2`.
pub fn ellipse(nodes: usize) -> Table {
    let c = ConvexCaustic::segment(Geometry::Hyperbolic, 0.4).expect("valid length");
    string_table_with_nodes(&c, 0.2, nodes).expect("string table builds")
}

/// String table around an equilateral triangle.
pub fn triangle(nodes: usize) -> Table {
    let c = ConvexCaustic::regular_polygon(Geometry::Hyperbolic, 3, 0.3).expect("valid triangle");
    string_table_with_nodes(&c, 0.2, nodes).expect("string table builds")
}
