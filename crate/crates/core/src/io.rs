//! CSV ingestion, synthetic datasets and the output bundle.
//!
//! Reals are written with exactly six decimals, so every file is a pure
//! function of the input and the configuration.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::model::{
    euclidean_distance, AssignmentPlan, CostExponent, DepotSet, Phase, Point2, WaypointSet,
};
use crate::pipeline::{RunConfig, RunResult};

pub const WAYPOINT_HEADER: [&str; 3] = ["id", "lon", "lat"];
pub const DEPOT_HEADER: [&str; 3] = ["depot_id", "lon", "lat"];

/// Read an `id,lon,lat` file. Duplicate coordinates are kept; duplicate ids
/// are rejected.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<WaypointSet> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_waypoints(file, path)
}

/// [`ingest_csv`] over any reader; `origin` labels error messages.
pub fn read_waypoints<R: Read>(reader: R, origin: &Path) -> Result<WaypointSet> {
    let rows = read_rows(reader, origin, &WAYPOINT_HEADER)?;
    let mut seen = std::collections::HashMap::with_capacity(rows.len());
    let mut points = Vec::with_capacity(rows.len());
    let mut ids = Vec::with_capacity(rows.len());
    for (line, id, p) in rows {
        if seen.insert(id.clone(), line).is_some() {
            return Err(Error::DuplicateId {
                path: origin.to_path_buf(),
                line,
                id,
            });
        }
        points.push(p);
        ids.push(id);
    }
    let phases = vec![Phase::One; points.len()];
    WaypointSet::new(points, ids, phases)
}

/// Read a `depot_id,lon,lat` file (the `depots.csv` this crate writes).
pub fn read_depots(path: impl AsRef<Path>) -> Result<DepotSet> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = read_rows(file, path, &DEPOT_HEADER)?;
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "depot file lists no depots".into(),
        });
    }
    DepotSet::new(rows.into_iter().map(|(_, _, p)| p).collect())
}

fn read_rows<R: Read>(
    reader: R,
    origin: &Path,
    header: &[&str; 3],
) -> Result<Vec<(u64, String, Point2)>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_err(
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(parse_err(line, "empty id".into()));
        }
        let coord = |idx: usize, name: &str| -> Result<f64> {
            let v: f64 = record[idx].parse().map_err(|_| {
                parse_err(line, format!("{name} `{}` is not a number", &record[idx]))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!("{name} `{}` is not finite", &record[idx]),
                ));
            }
            Ok(v)
        };
        let p = Point2::new(coord(1, header[1])?, coord(2, header[2])?);
        out.push((line, id, p));
    }
    Ok(out)
}

/// Gaussian blobs around `clusters` centers drawn uniformly from
/// [-180, 180] x [-85, 85]; each point picks a blob uniformly at random.
pub fn generate_synthetic(
    n: usize,
    clusters: usize,
    spread: f64,
    seed: u64,
) -> Result<WaypointSet> {
    if clusters == 0 || n < clusters {
        return Err(Error::Config(format!(
            "synthetic data needs n >= clusters >= 1 (n = {n}, clusters = {clusters})"
        )));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::Config(format!(
            "spread must be positive, got {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Point2> = (0..clusters)
        .map(|_| {
            Point2::new(
                rng.random_range(-180.0..=180.0),
                rng.random_range(-85.0..=85.0),
            )
        })
        .collect();
    let noise = Normal::new(0.0, spread).map_err(|e| Error::Config(e.to_string()))?;
    let width = n.to_string().len();
    let mut points = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    for i in 0..n {
        let c = centers[rng.random_range(0..clusters)];
        points.push(Point2::new(
            c.x + noise.sample(&mut rng),
            c.y + noise.sample(&mut rng),
        ));
        ids.push(format!("w{i:0width$}"));
    }
    let phases = vec![Phase::One; n];
    WaypointSet::new(points, ids, phases)
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: std::io::BufWriter<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write an `id,lon,lat` file.
pub fn write_waypoints(waypoints: &WaypointSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "id,lon,lat").map_err(io)?;
    for (id, p) in waypoints.ids().iter().zip(waypoints.points()) {
        writeln!(w, "{id},{:.6},{:.6}", p.x, p.y).map_err(io)?;
    }
    finish(w, path)
}

pub fn write_depots(depots: &DepotSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "depot_id,lon,lat").map_err(io)?;
    for (j, p) in depots.points().iter().enumerate() {
        writeln!(w, "{j},{:.6},{:.6}", p.x, p.y).map_err(io)?;
    }
    finish(w, path)
}

/// `waypoint_id,depot_id,phase,distance,cost`, one row per waypoint.
pub fn write_assignment(
    waypoints: &WaypointSet,
    plan: &AssignmentPlan,
    depots: &DepotSet,
    exponent: CostExponent,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    if plan.n() != waypoints.len() {
        return Err(Error::Contract(
            "assignment plan does not cover the waypoint set".into(),
        ));
    }
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "waypoint_id,depot_id,phase,distance,cost").map_err(io)?;
    let rows = waypoints
        .ids()
        .iter()
        .zip(waypoints.points())
        .zip(waypoints.phases())
        .zip(plan.assigned());
    for (((id, &p), phase), &j) in rows {
        let dist = euclidean_distance(p, depots.points()[j]);
        writeln!(w, "{id},{j},{phase},{dist:.6},{:.6}", exponent.apply(dist)).map_err(io)?;
    }
    finish(w, path)
}

/// `lon,lat,depot_id` for plotting the final assignment.
pub fn write_plot(
    waypoints: &WaypointSet,
    plan: &AssignmentPlan,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "lon,lat,depot_id").map_err(io)?;
    for (p, &j) in waypoints.points().iter().zip(plan.assigned()) {
        writeln!(w, "{:.6},{:.6},{j}", p.x, p.y).map_err(io)?;
    }
    finish(w, path)
}

/// A real that serializes with exactly six decimals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fixed6(pub f64);

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!(
                "cannot serialize non-finite {}",
                self.0
            )));
        }
        let raw = RawValue::from_string(format!("{:.6}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

/// Contents of `summary.json`. Runtimes are `null` unless timing was
/// requested, which keeps the default bundle reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub k: usize,
    pub gamma: Fixed6,
    pub seed: u64,
    pub n_phase1: usize,
    pub n_phase2: usize,
    pub objective_phase1: Fixed6,
    pub objective_phase2: Fixed6,
    pub mse_phase1: Fixed6,
    pub mse_phase2: Fixed6,
    pub pct_change: Fixed6,
    pub iterations_phase1: usize,
    pub runtime_ms_phase1: Option<Fixed6>,
    pub runtime_ms_phase2: Option<Fixed6>,
}

impl Summary {
    pub fn from_run(result: &RunResult, config: &RunConfig, record_timing: bool) -> Self {
        let m = &result.metrics;
        let ms = |d: std::time::Duration| Fixed6(d.as_secs_f64() * 1e3);
        Summary {
            k: m.k,
            gamma: Fixed6(config.gamma),
            seed: config.seed,
            n_phase1: m.n_phase1,
            n_phase2: m.n_phase2,
            objective_phase1: Fixed6(m.objective_phase1),
            objective_phase2: Fixed6(m.objective_phase2),
            mse_phase1: Fixed6(m.mse_phase1),
            mse_phase2: Fixed6(m.mse_phase2),
            pct_change: Fixed6(m.pct_change),
            iterations_phase1: result.phase1.iterations,
            runtime_ms_phase1: record_timing.then(|| ms(result.runtime_phase1)),
            runtime_ms_phase2: record_timing.then(|| ms(result.runtime_phase2)),
        }
    }
}

/// Paths of everything [`write_outputs`] produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputBundle {
    pub depots: PathBuf,
    pub assignment: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

impl OutputBundle {
    pub fn files(&self) -> [&Path; 4] {
        [&self.depots, &self.assignment, &self.summary, &self.plot]
    }
}

/// Write `depots.csv`, `assignment.csv` (final Phase II plan, input order),
/// `summary.json` and `plot.csv` into `dir`, creating it if needed.
pub fn write_outputs(
    result: &RunResult,
    config: &RunConfig,
    dir: impl AsRef<Path>,
    record_timing: bool,
) -> Result<OutputBundle> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bundle = OutputBundle {
        depots: dir.join("depots.csv"),
        assignment: dir.join("assignment.csv"),
        summary: dir.join("summary.json"),
        plot: dir.join("plot.csv"),
    };
    write_depots(&result.depots, &bundle.depots)?;
    write_assignment(
        &result.waypoints,
        &result.plan_phase2,
        &result.depots,
        config.cost_exponent,
        &bundle.assignment,
    )?;
    write_summary(
        &Summary::from_run(result, config, record_timing),
        &bundle.summary,
    )?;
    write_plot(&result.waypoints, &result.plan_phase2, &bundle.plot)?;
    Ok(bundle)
}

pub fn write_summary(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::Data(format!("summary serialization: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
