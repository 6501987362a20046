//! Billiards in convex domains of the hyperbolic plane and the hemisphere.

mod error;
mod numerics;

pub mod curve;
pub mod geom;
pub mod table;
pub mod billiard;
pub mod string;
pub mod verify;
pub mod bounds;
pub mod discontinuity;

pub use error::{Error, Result};
pub use billiard::{Orbit, PhasePoint};
pub use bounds::{BoundReport, Epsilon, Region, Sandwich};
pub use curve::{Curve, Frame};
pub use discontinuity::{JumpPoint, StripReport, StripStatus};
pub use geom::{Geometry, NormalChart, SurfacePoint, UnitTangent, Vec3};
pub use string::{CausticShape, ConvexCaustic};
pub use table::{GeometrySummary, Table, TableSource};
pub use verify::CausticReport;
