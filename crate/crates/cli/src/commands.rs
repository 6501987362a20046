//! The subcommands. Each writes its artifacts and reports how the run ended.

use crate::output::{portrait_svg, region_pgm, table_svg, Output};
use crate::scene::{Experiment, Issue, SceneSpec};
use curvbill_core::billiard::{orbit, Direction, PhasePoint};
use curvbill_core::bounds::bound_report;
use curvbill_core::discontinuity::{hubacher_strip, jump_points, orbit_pair, JumpPoint, StripReport, StripStatus};
use curvbill_core::verify::verify_caustic;
use curvbill_core::{Error, Table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Run-time options shared by all subcommands.
pub struct Options {
    pub seed: u64,
    pub resolution: usize,
    pub tolerance: f64,
}

/// How a run failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Spec { message: String, details: Vec<Issue> },
    Core(Error),
    Inconclusive { kind: &'static str, message: String },
    Io(std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Spec { .. } => 2,
            Failure::Core(Error::InvalidParameter(_)) => 2,
            Failure::Core(_) | Failure::Io(_) => 3,
            Failure::Inconclusive { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Spec { .. } => "spec",
            Failure::Core(e) => e.kind(),
            Failure::Inconclusive { kind, .. } => kind,
            Failure::Io(_) => "io",
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Spec { message, .. } => message.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::Inconclusive { message, .. } => message.clone(),
            Failure::Io(e) => e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

fn f(x: f64) -> String {
    x.to_string()
}

#[derive(Serialize)]
struct TruncationRow {
    orbit: usize,
    at: i64,
    error: &'static str,
    message: String,
}

#[derive(Serialize)]
struct SimulateSummary {
    orbits: usize,
    steps: usize,
    seed: u64,
    truncated: Vec<TruncationRow>,
}

/// Uniform random phase points away from the grazing edges.
fn random_states(table: &Table, count: usize, seed: u64, t_max: f64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = rng.random::<f64>() * table.length();
            let t = 0.02 + rng.random::<f64>() * (t_max - 0.04);
            PhasePoint::new(s, t)
        })
        .collect()
}

pub fn simulate(spec: &SceneSpec, table: &Table, out: &Output, opts: &Options) -> Outcome {
    let (n, initial, random) = match spec.experiment("simulate") {
        Some(Experiment::Simulate { n, initial, random }) => (n.unwrap_or(100), initial.clone(), *random),
        _ => (100, Vec::new(), None),
    };
    let mut states: Vec<PhasePoint> = initial.iter().map(|p| PhasePoint::new(p[0], p[1])).collect();
    let extra = random.unwrap_or(if states.is_empty() { 16 } else { 0 });
    states.extend(random_states(table, extra, opts.seed, PI));
    let orbits: Vec<_> = states
        .par_iter()
        .map(|&p| orbit(table, p, n, Direction::Forward))
        .collect();
    let rows = orbits.iter().enumerate().flat_map(|(i, o)| {
        (0..o.len()).map(move |k| {
            let st = o.states[k];
            vec![i.to_string(), k.to_string(), f(st.s), f(st.t), f(o.lift[k])]
        })
    });
    out.csv("orbits.csv", &["orbit", "k", "s", "t", "lift_s"], rows)?;
    let truncated = orbits
        .iter()
        .enumerate()
        .filter_map(|(i, o)| {
            o.truncated.as_ref().map(|t| TruncationRow {
                orbit: i,
                at: t.at,
                error: t.error.kind(),
                message: t.error.to_string(),
            })
        })
        .collect();
    out.json(
        "simulate.json",
        &SimulateSummary {
            orbits: orbits.len(),
            steps: n,
            seed: opts.seed,
            truncated,
        },
    )?;
    Ok(())
}

pub fn bounds(spec: &SceneSpec, table: &Table, out: &Output, opts: &Options) -> Outcome {
    let (caustic, region) = match spec.experiment("bounds") {
        Some(Experiment::Bounds { caustic, region }) => (caustic.clone(), region.unwrap_or(true)),
        _ => (None, true),
    };
    let caustic = match caustic {
        Some(c) => Some(c.build(spec.geometry)?),
        None => spec.string_caustic().transpose()?,
    };
    let (report, raster) = bound_report(table, caustic.as_ref(), region.then_some(opts.resolution))?;
    out.json("bounds.json", &report)?;
    if let Some(r) = raster {
        out.pgm("region.pgm", &region_pgm(&r))?;
    }
    Ok(())
}

pub fn verify(spec: &SceneSpec, table: &Table, out: &Output, opts: &Options) -> Outcome {
    let (caustic, samples) = match spec.experiment("verify-caustic") {
        Some(Experiment::VerifyCaustic { caustic, samples }) => {
            (caustic.build(spec.geometry)?, samples.unwrap_or(curvbill_core::verify::VERIFY_SAMPLES))
        }
        _ => match spec.string_caustic() {
            Some(c) => (c?, curvbill_core::verify::VERIFY_SAMPLES),
            None => {
                return Err(Failure::Spec {
                    message: "verify-caustic needs a caustic in the scene".into(),
                    details: vec![Issue {
                        pointer: "/experiments".into(),
                        message: "add {\"kind\": \"verify-caustic\", \"caustic\": ...}".into(),
                    }],
                })
            }
        },
    };
    let report = verify_caustic(table, &caustic, samples, opts.tolerance)?;
    out.json("verify-caustic.json", &report)?;
    if !report.verified {
        return Err(Failure::Inconclusive {
            kind: "not-verified",
            message: format!(
                "tangency residual {:e} exceeds tolerance {:e}",
                report.max_tangency_residual, report.tolerance
            ),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct JumpRow {
    s: f64,
    kappa_left: f64,
    kappa_right: f64,
}

#[derive(Serialize)]
struct StringBuildSummary<'a> {
    geometry: curvbill_core::Geometry,
    source: &'a curvbill_core::TableSource,
    summary: &'a curvbill_core::GeometrySummary,
    jumps: Vec<JumpRow>,
    samples: usize,
}

pub fn string_build(spec: &SceneSpec, table: &Table, out: &Output, _opts: &Options) -> Outcome {
    let samples = match spec.experiment("string-build") {
        Some(Experiment::StringBuild { samples }) => samples.unwrap_or(512),
        _ => 512,
    };
    let pts = table.boundary_samples(samples);
    out.csv(
        "boundary.csv",
        &["s", "x0", "x1", "x2", "kappa"],
        pts.iter()
            .map(|(s, p)| vec![f(*s), f(p[0]), f(p[1]), f(p[2]), f(table.curvature(*s))]),
    )?;
    let caustic = spec.string_caustic().transpose()?;
    out.svg("table.svg", &table_svg(table, samples.max(256), caustic.as_ref()))?;
    let jumps = table
        .jumps()
        .iter()
        .map(|&s| {
            let (l, r) = table.curvature_limits(s);
            JumpRow {
                s,
                kappa_left: l,
                kappa_right: r,
            }
        })
        .collect();
    out.json(
        "string-build.json",
        &StringBuildSummary {
            geometry: table.geometry(),
            source: table.source(),
            summary: table.summary(),
            jumps,
            samples,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct HubacherOutput {
    status: &'static str,
    jumps: Vec<JumpPoint>,
    reports: Vec<StripReport>,
}

pub fn hubacher(spec: &SceneSpec, table: &Table, out: &Output, _opts: &Options) -> Outcome {
    let pick = match spec.experiment("hubacher") {
        Some(Experiment::Hubacher { jump }) => *jump,
        _ => None,
    };
    let jumps = jump_points(table);
    if jumps.is_empty() {
        out.json(
            "hubacher.json",
            &HubacherOutput {
                status: "not-applicable",
                jumps,
                reports: Vec::new(),
            },
        )?;
        return Err(Failure::Inconclusive {
            kind: "not-applicable",
            message: "the boundary has no curvature jump".into(),
        });
    }
    let chosen: Vec<JumpPoint> = match pick {
        Some(i) => vec![*jumps.get(i).ok_or_else(|| Failure::Spec {
            message: format!("jump index {i} out of range ({} jumps)", jumps.len()),
            details: vec![Issue {
                pointer: "/experiments".into(),
                message: "jump index out of range".into(),
            }],
        })?],
        None => jumps.clone(),
    };
    let reports = chosen
        .iter()
        .map(|jp| hubacher_strip(table, jp))
        .collect::<curvbill_core::Result<Vec<_>>>()?;

    // one orbit pair per case and jump, for plotting
    let mut rows = Vec::new();
    for (j, r) in reports.iter().enumerate() {
        let oriented = r.jump.oriented(table);
        for case in [1u8, 2] {
            let Some(trial) = r.trials.iter().find(|p| p.case == case && p.contained) else {
                continue;
            };
            let (a, b) = orbit_pair(&oriented, &r.jump, trial.t0, trial.t0_prime, r.n as usize + 1)?;
            for (which, o) in [(0, &a), (1, &b)] {
                for (i, st) in o.states.iter().enumerate() {
                    rows.push(vec![
                        j.to_string(),
                        case.to_string(),
                        which.to_string(),
                        (o.first_index + i as i64).to_string(),
                        f(st.s),
                        f(st.t),
                        f(o.lift[i]),
                    ]);
                }
            }
        }
    }
    out.csv("hubacher_pairs.csv", &["jump", "case", "orbit", "k", "s", "t", "offset"], rows)?;

    let all = reports.iter().all(|r| r.status == StripStatus::Evidence);
    out.json(
        "hubacher.json",
        &HubacherOutput {
            status: if all { "evidence" } else { "inconclusive" },
            jumps: chosen,
            reports: reports.clone(),
        },
    )?;
    if !all {
        let why = reports
            .iter()
            .find(|r| r.status != StripStatus::Evidence)
            .map(|r| r.reason.clone())
            .unwrap_or_default();
        return Err(Failure::Inconclusive {
            kind: "inconclusive",
            message: why,
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct PortraitSummary {
    orbits: usize,
    steps: usize,
    seed: u64,
    points: usize,
}

pub fn portrait(spec: &SceneSpec, table: &Table, out: &Output, opts: &Options) -> Outcome {
    let (count, n) = match spec.experiment("portrait") {
        Some(Experiment::Portrait { orbits, n }) => (orbits.unwrap_or(40), n.unwrap_or(300)),
        _ => (40, 300),
    };
    // time reversal makes the upper half redundant
    let seeds = random_states(table, count, opts.seed, 0.5 * PI);
    let orbits: Vec<_> = seeds
        .par_iter()
        .map(|&p| orbit(table, p, n, Direction::Forward))
        .collect();
    let points: Vec<(usize, f64, f64)> = orbits
        .iter()
        .enumerate()
        .flat_map(|(i, o)| o.states.iter().map(move |st| (i, st.s, st.t)))
        .collect();
    out.csv(
        "portrait.csv",
        &["orbit", "s", "t"],
        points.iter().map(|&(i, s, t)| vec![i.to_string(), f(s), f(t)]),
    )?;
    out.svg("portrait.svg", &portrait_svg(table.length(), &points))?;
    out.json(
        "portrait.json",
        &PortraitSummary {
            orbits: count,
            steps: n,
            seed: opts.seed,
            points: points.len(),
        },
    )?;
    Ok(())
}
