//! Scene files: one table, the experiments to run on it and where to write.

use curvbill_core::string::{string_table_with_nodes, ConvexCaustic};
use curvbill_core::table::{disk_table, samples_table, stadium_table, DEFAULT_NODES};
use curvbill_core::{Geometry, Table};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const SCENE_SCHEMA: &str = include_str!("../schemas/scene.schema.json");

/// One schema violation, located by a JSON pointer into the scene.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    pub pointer: String,
    pub message: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub geometry: Geometry,
    pub table: TableSpec,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TableSpec {
    Disk {
        #[serde(rename = "R")]
        radius: f64,
    },
    Stadium {
        #[serde(rename = "R")]
        radius: f64,
        c: f64,
        smoothing: f64,
    },
    String {
        caustic: CausticSpec,
        #[serde(rename = "L")]
        lazutkin: f64,
        nodes: Option<usize>,
    },
    Samples {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CausticSpec {
    Circle { d: f64 },
    Segment { len: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    RegularPolygon { sides: usize, rho: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Simulate {
        n: Option<usize>,
        #[serde(default)]
        initial: Vec<[f64; 2]>,
        random: Option<usize>,
    },
    Bounds {
        caustic: Option<CausticSpec>,
        region: Option<bool>,
    },
    VerifyCaustic {
        caustic: CausticSpec,
        samples: Option<usize>,
    },
    StringBuild {
        samples: Option<usize>,
    },
    Hubacher {
        jump: Option<usize>,
    },
    Portrait {
        orbits: Option<usize>,
        n: Option<usize>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Simulate { .. } => "simulate",
            Experiment::Bounds { .. } => "bounds",
            Experiment::VerifyCaustic { .. } => "verify-caustic",
            Experiment::StringBuild { .. } => "string-build",
            Experiment::Hubacher { .. } => "hubacher",
            Experiment::Portrait { .. } => "portrait",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
    Pgm,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "all_formats")]
    pub formats: BTreeSet<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: all_formats(),
        }
    }
}

fn default_dir() -> String {
    "out".into()
}

fn all_formats() -> BTreeSet<Format> {
    [Format::Csv, Format::Json, Format::Svg, Format::Pgm].into_iter().collect()
}

/// Parses and validates a scene; every problem is reported with its pointer.
pub fn parse_scene(text: &str) -> Result<SceneSpec, Vec<Issue>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        vec![Issue {
            pointer: String::new(),
            message: format!("invalid JSON: {e}"),
        }]
    })?;
    let schema: serde_json::Value = serde_json::from_str(SCENE_SCHEMA).expect("bundled schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("bundled schema compiles");
    let issues: Vec<Issue> = validator
        .iter_errors(&value)
        .map(|e| Issue {
            pointer: e.instance_path().to_string(),
            message: e.to_string(),
        })
        .collect();
    if !issues.is_empty() {
        return Err(issues);
    }
    serde_json::from_value(value).map_err(|e| {
        vec![Issue {
            pointer: String::new(),
            message: e.to_string(),
        }]
    })
}

impl CausticSpec {
    pub fn build(&self, g: Geometry) -> curvbill_core::Result<ConvexCaustic> {
        match self {
            CausticSpec::Circle { d } => ConvexCaustic::circle(g, *d),
            CausticSpec::Segment { len } => ConvexCaustic::segment(g, *len),
            CausticSpec::Polygon { vertices } => {
                let v: Vec<(f64, f64)> = vertices.iter().map(|p| (p[0], p[1])).collect();
                ConvexCaustic::polygon(g, &v)
            }
            CausticSpec::RegularPolygon { sides, rho } => ConvexCaustic::regular_polygon(g, *sides, *rho),
        }
    }
}

impl SceneSpec {
    pub fn build_table(&self) -> curvbill_core::Result<Table> {
        let g = self.geometry;
        match &self.table {
            TableSpec::Disk { radius } => disk_table(g, *radius),
            TableSpec::Stadium { radius, c, smoothing } => stadium_table(g, *radius, *c, *smoothing),
            TableSpec::String { caustic, lazutkin, nodes } => {
                string_table_with_nodes(&caustic.build(g)?, *lazutkin, nodes.unwrap_or(DEFAULT_NODES))
            }
            TableSpec::Samples { points } => {
                let p: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
                samples_table(g, &p)
            }
        }
    }

    /// The caustic of a string table, carrying its Lazutkin parameter.
    pub fn string_caustic(&self) -> Option<curvbill_core::Result<ConvexCaustic>> {
        match &self.table {
            TableSpec::String { caustic, lazutkin, .. } => {
                Some(caustic.build(self.geometry).map(|c| c.with_lazutkin(*lazutkin)))
            }
            _ => None,
        }
    }

    /// The first experiment of the given kind.
    pub fn experiment(&self, kind: &str) -> Option<&Experiment> {
        self.experiments.iter().find(|e| e.kind() == kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_disk() {
        let s = parse_scene(r#"{"geometry": "hyperbolic", "table": {"kind": "disk", "R": 1.0}}"#).unwrap();
        assert!(matches!(s.table, TableSpec::Disk { radius } if radius == 1.0));
        assert_eq!(s.output.dir, "out");
    }

    #[test]
    fn unknown_kind_names_pointer() {
        let e = parse_scene(r#"{"geometry": "hyperbolic", "table": {"kind": "ellipse", "a": 1}}"#).unwrap_err();
        assert!(e.iter().any(|i| i.pointer == "/table/kind"), "{e:?}");
    }

    #[test]
    fn nested_errors_have_paths() {
        let e = parse_scene(
            r#"{"geometry": "spherical", "table": {"kind": "string", "L": -1,
                "caustic": {"kind": "circle", "d": 0.1}},
                "experiments": [{"kind": "simulate", "n": -3}]}"#,
        )
        .unwrap_err();
        let ptrs: Vec<&str> = e.iter().map(|i| i.pointer.as_str()).collect();
        assert!(ptrs.contains(&"/table/L"), "{ptrs:?}");
        assert!(ptrs.contains(&"/experiments/0/n"), "{ptrs:?}");
    }
}
