//! Generic checkpointed 2-D parameter sweeps and iso-contour extraction.
//!
//! A sweep evaluates a pure `(x, y) -> scalar` function over a rectangular
//! grid. Cells may come back `Done`, `Masked` (legitimately undefined, e.g.
//! a resonant wavelength), or `Failed` (evaluator error); failures never
//! abort the sweep. Progress is checkpointed atomically every K cells so an
//! interrupted sweep resumes without re-evaluating finished cells, and the
//! assembled grid is identical no matter how many workers ran it.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("sweep configuration: {0}")]
    Config(String),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupted checkpoint ({0}); refusing to resume -- restart explicitly to discard it")]
    CorruptCheckpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One sweep axis: `n` values from `min` to `max`, linear or log spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl AxisSpec {
    pub fn linear(min: f64, max: f64, n: usize) -> Self {
        AxisSpec { min, max, n, spacing: Spacing::Linear }
    }

    pub fn log(min: f64, max: f64, n: usize) -> Self {
        AxisSpec { min, max, n, spacing: Spacing::Log }
    }

    pub fn values(&self) -> Result<Vec<f64>, SweepError> {
        if self.n == 0 {
            return Err(SweepError::Config("axis needs at least one value".into()));
        }
        if self.n == 1 {
            if self.min != self.max {
                return Err(SweepError::Config(
                    "a single-value axis needs min = max".into(),
                ));
            }
            return Ok(vec![self.min]);
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(SweepError::Config(format!(
                "degenerate axis range [{}, {}] with n = {}",
                self.min, self.max, self.n
            )));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(SweepError::Config("log axis needs min > 0".into()));
        }
        let n = self.n;
        let vals: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
            Spacing::Log => {
                let (a, b) = (self.min.ln(), self.max.ln());
                (0..n)
                    .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        };
        Ok(vals)
    }
}

/// The rectangular grid: named axes with strictly monotone values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub x_name: String,
    pub y_name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ParamGrid {
    pub fn new(
        x_name: impl Into<String>,
        y_name: impl Into<String>,
        x: Vec<f64>,
        y: Vec<f64>,
    ) -> Result<Self, SweepError> {
        for (name, axis) in [("x", &x), ("y", &y)] {
            if axis.is_empty() {
                return Err(SweepError::Config(format!("{name} axis is empty")));
            }
            let monotone = |w: &[f64]| w[0].is_finite() && w[1].is_finite() && w[0] < w[1];
            if axis.windows(2).any(|w| !monotone(w)) {
                return Err(SweepError::Config(format!(
                    "{name} axis must be strictly monotone"
                )));
            }
        }
        Ok(ParamGrid {
            x_name: x_name.into(),
            y_name: y_name.into(),
            x,
            y,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.x.len() * self.y.len()
    }

    /// Row-major cell index: x outer, y inner.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.y.len() + iy
    }
}

/// Evaluator verdict for one cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done(f64),
    Masked,
    Failed(String),
}

/// Stored cell state (checkpointable).
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Pending,
    Done(f64),
    Masked,
    Failed(String),
}

impl Cell {
    pub fn status(&self) -> &'static str {
        match self {
            Cell::Pending => "pending",
            Cell::Done(_) => "done",
            Cell::Masked => "masked",
            Cell::Failed(_) => "failed",
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Done(v) => Some(*v),
            _ => None,
        }
    }
}

/// An extracted iso-line: connected vertices at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub level: f64,
    pub points: Vec<(f64, f64)>,
}

/// Sweep output: the grid, one cell state per grid point, and any extracted
/// contour polylines.
#[derive(Debug, Clone)]
pub struct ContourResult {
    pub grid: ParamGrid,
    pub cells: Vec<Cell>,
    pub value_name: String,
    pub contours: Vec<Polyline>,
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Checkpoint file; `None` disables checkpointing.
    pub checkpoint: Option<PathBuf>,
    /// Cells evaluated between checkpoint writes.
    pub checkpoint_every: usize,
    /// Worker threads (0 = library default). Only effective with the
    /// `parallel` feature.
    pub workers: usize,
    /// Resume from an existing checkpoint instead of starting fresh.
    pub resume: bool,
    /// Stop (with a final checkpoint) after evaluating this many cells in
    /// this call; used for cooperative interruption.
    pub stop_after: Option<usize>,
    /// Name of the value column in CSV output.
    pub value_name: String,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            checkpoint: None,
            checkpoint_every: 16,
            workers: 0,
            resume: false,
            stop_after: None,
            value_name: "value".to_owned(),
        }
    }
}

/// Runs the sweep. All cells are evaluated (or restored from the checkpoint)
/// unless `stop_after` cuts the run short, in which case the returned result
/// still contains `Pending` cells and the checkpoint holds the progress.
pub fn run_sweep<F>(grid: ParamGrid, evaluator: F, opts: &SweepOptions) -> Result<ContourResult, SweepError>
where
    F: Fn(f64, f64) -> CellOutcome + Sync,
{
    let n = grid.n_cells();
    let mut cells = vec![Cell::Pending; n];

    if opts.resume {
        if let Some(path) = &opts.checkpoint {
            if path.exists() {
                cells = read_checkpoint(path, &grid, &opts.value_name)?;
            }
        }
    }

    let pending: Vec<usize> = (0..n).filter(|&i| cells[i] == Cell::Pending).collect();
    let budget = opts.stop_after.unwrap_or(usize::MAX);
    let mut evaluated = 0usize;

    for chunk in pending.chunks(opts.checkpoint_every.max(1)) {
        if evaluated >= budget {
            break;
        }
        let take = chunk.len().min(budget - evaluated);
        let work = &chunk[..take];
        let outcomes = evaluate_cells(&grid, work, &evaluator, opts.workers);
        for (&i, outcome) in work.iter().zip(outcomes) {
            cells[i] = match outcome {
                CellOutcome::Done(v) => Cell::Done(v),
                CellOutcome::Masked => Cell::Masked,
                CellOutcome::Failed(msg) => Cell::Failed(msg),
            };
        }
        evaluated += take;
        if let Some(path) = &opts.checkpoint {
            write_checkpoint(path, &grid, &cells, &opts.value_name)?;
        }
    }

    Ok(ContourResult {
        grid,
        cells,
        value_name: opts.value_name.clone(),
        contours: Vec::new(),
    })
}

fn evaluate_cells<F>(grid: &ParamGrid, indices: &[usize], evaluator: &F, workers: usize) -> Vec<CellOutcome>
where
    F: Fn(f64, f64) -> CellOutcome + Sync,
{
    let eval_one = |&i: &usize| {
        let ix = i / grid.y.len();
        let iy = i % grid.y.len();
        evaluator(grid.x[ix], grid.y[iy])
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if workers == 1 {
            return indices.iter().map(eval_one).collect();
        }
        let run = || indices.par_iter().map(eval_one).collect();
        if workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool");
            return pool.install(run);
        }
        run()
    }

    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        indices.iter().map(eval_one).collect()
    }
}

impl ContourResult {
    pub fn is_complete(&self) -> bool {
        !self.cells.iter().any(|c| matches!(c, Cell::Pending))
    }

    pub fn cell(&self, ix: usize, iy: usize) -> &Cell {
        &self.cells[self.grid.index(ix, iy)]
    }

    /// Highest finished value with its (x, y) location.
    pub fn max_cell(&self) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for ix in 0..self.grid.x.len() {
            for iy in 0..self.grid.y.len() {
                if let Cell::Done(v) = self.cell(ix, iy) {
                    if best.is_none_or(|(_, _, b)| *v > b) {
                        best = Some((self.grid.x[ix], self.grid.y[iy], *v));
                    }
                }
            }
        }
        best
    }

    pub fn min_cell(&self) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for ix in 0..self.grid.x.len() {
            for iy in 0..self.grid.y.len() {
                if let Cell::Done(v) = self.cell(ix, iy) {
                    if best.is_none_or(|(_, _, b)| *v < b) {
                        best = Some((self.grid.x[ix], self.grid.y[iy], *v));
                    }
                }
            }
        }
        best
    }

    /// Marching-squares iso-lines for the given levels, linearly interpolated
    /// on the grid coordinates. Cells with masked/failed/pending corners are
    /// skipped; out-of-range levels yield no polylines.
    pub fn extract_contours(&mut self, levels: &[f64]) {
        self.contours = levels
            .iter()
            .flat_map(|&level| extract_level(&self.grid, &self.cells, level))
            .collect();
    }

    /// Value CSV: `x,y,value`, row-major (x outer); masked/failed/pending
    /// cells leave the value field empty.
    pub fn to_value_csv(&self) -> String {
        let mut out = format!("{},{},{}\n", self.grid.x_name, self.grid.y_name, self.value_name);
        for ix in 0..self.grid.x.len() {
            for iy in 0..self.grid.y.len() {
                let cell = self.cell(ix, iy);
                match cell.value() {
                    Some(v) => {
                        let _ = writeln!(out, "{},{},{}", self.grid.x[ix], self.grid.y[iy], v);
                    }
                    None => {
                        let _ = writeln!(out, "{},{},", self.grid.x[ix], self.grid.y[iy]);
                    }
                }
            }
        }
        out
    }

    /// Contour CSV: `level,segment_id,x,y`.
    pub fn to_contour_csv(&self) -> String {
        let mut out = String::from("level,segment_id,x,y\n");
        for (id, line) in self.contours.iter().enumerate() {
            for &(x, y) in &line.points {
                let _ = writeln!(out, "{},{},{},{}", line.level, id, x, y);
            }
        }
        out
    }

    /// Failure sidecar: `ix,iy,message` per failed cell.
    pub fn failure_log(&self) -> String {
        let mut out = String::new();
        for ix in 0..self.grid.x.len() {
            for iy in 0..self.grid.y.len() {
                if let Cell::Failed(msg) = self.cell(ix, iy) {
                    let _ = writeln!(out, "{},{},{}", ix, iy, msg.replace('\n', " "));
                }
            }
        }
        out
    }
}

fn checkpoint_header(grid: &ParamGrid, value_name: &str) -> String {
    format!("{},{},{},status", grid.x_name, grid.y_name, value_name)
}

fn write_checkpoint(
    path: &Path,
    grid: &ParamGrid,
    cells: &[Cell],
    value_name: &str,
) -> Result<(), SweepError> {
    let mut out = checkpoint_header(grid, value_name);
    out.push('\n');
    let mut failures = String::new();
    for ix in 0..grid.x.len() {
        for iy in 0..grid.y.len() {
            let cell = &cells[grid.index(ix, iy)];
            match cell.value() {
                Some(v) => {
                    let _ = writeln!(out, "{},{},{},{}", grid.x[ix], grid.y[iy], v, cell.status());
                }
                None => {
                    let _ = writeln!(out, "{},{},,{}", grid.x[ix], grid.y[iy], cell.status());
                }
            }
            if let Cell::Failed(msg) = cell {
                let _ = writeln!(failures, "{},{},{}", ix, iy, msg.replace('\n', " "));
            }
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, out)?;
    fs::rename(&tmp, path)?;
    let sidecar = failure_sidecar_path(path);
    if failures.is_empty() {
        let _ = fs::remove_file(&sidecar);
    } else {
        let tmp = sidecar.with_extension("tmp");
        fs::write(&tmp, failures)?;
        fs::rename(&tmp, &sidecar)?;
    }
    Ok(())
}

fn failure_sidecar_path(checkpoint: &Path) -> PathBuf {
    let mut name = checkpoint.file_name().unwrap_or_default().to_os_string();
    name.push(".failures.log");
    checkpoint.with_file_name(name)
}

fn read_checkpoint(path: &Path, grid: &ParamGrid, value_name: &str) -> Result<Vec<Cell>, SweepError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SweepError::CorruptCheckpoint("empty file".into()))?;
    if header != checkpoint_header(grid, value_name) {
        return Err(SweepError::CorruptCheckpoint(format!(
            "header `{header}` does not match this sweep"
        )));
    }
    let failures = read_failure_sidecar(path);

    let mut cells = vec![Cell::Pending; grid.n_cells()];
    let mut row = 0usize;
    for (line_no, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(SweepError::CorruptCheckpoint(format!(
                "row {} has {} fields",
                line_no + 2,
                parts.len()
            )));
        }
        if row >= grid.n_cells() {
            return Err(SweepError::CorruptCheckpoint("too many rows".into()));
        }
        let ix = row / grid.y.len();
        let iy = row % grid.y.len();
        let x: f64 = parts[0]
            .parse()
            .map_err(|_| SweepError::CorruptCheckpoint(format!("bad x in row {}", line_no + 2)))?;
        let y: f64 = parts[1]
            .parse()
            .map_err(|_| SweepError::CorruptCheckpoint(format!("bad y in row {}", line_no + 2)))?;
        if x.to_bits() != grid.x[ix].to_bits() || y.to_bits() != grid.y[iy].to_bits() {
            return Err(SweepError::CorruptCheckpoint(format!(
                "row {} coordinates do not match the requested grid",
                line_no + 2
            )));
        }
        cells[row] = match parts[3] {
            "pending" => Cell::Pending,
            "masked" => Cell::Masked,
            "failed" => Cell::Failed(
                failures
                    .get(&(ix, iy))
                    .cloned()
                    .unwrap_or_else(|| "unknown failure (resumed)".to_owned()),
            ),
            "done" => {
                let v: f64 = parts[2].parse().map_err(|_| {
                    SweepError::CorruptCheckpoint(format!("bad value in row {}", line_no + 2))
                })?;
                Cell::Done(v)
            }
            other => {
                return Err(SweepError::CorruptCheckpoint(format!(
                    "unknown status `{other}` in row {}",
                    line_no + 2
                )))
            }
        };
        row += 1;
    }
    if row != grid.n_cells() {
        return Err(SweepError::CorruptCheckpoint(format!(
            "expected {} rows, found {row}",
            grid.n_cells()
        )));
    }
    Ok(cells)
}

fn read_failure_sidecar(checkpoint: &Path) -> HashMap<(usize, usize), String> {
    let mut map = HashMap::new();
    if let Ok(text) = fs::read_to_string(failure_sidecar_path(checkpoint)) {
        for line in text.lines() {
            let mut parts = line.splitn(3, ',');
            if let (Some(i), Some(j), Some(msg)) = (parts.next(), parts.next(), parts.next()) {
                if let (Ok(i), Ok(j)) = (i.parse(), j.parse()) {
                    map.insert((i, j), msg.to_owned());
                }
            }
        }
    }
    map
}

// ---- marching squares ----

fn extract_level(grid: &ParamGrid, cells: &[Cell], level: f64) -> Vec<Polyline> {
    type Pt = (f64, f64);
    let nx = grid.x.len();
    let ny = grid.y.len();
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let value = |ix: usize, iy: usize| cells[ix * ny + iy].value();

    // crossing on the edge from (xa, va) to (xb, vb), in fixed grid order
    let cross = |pa: Pt, va: f64, pb: Pt, vb: f64| -> Pt {
        let t = (level - va) / (vb - va);
        (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1))
    };

    let mut segments: Vec<(Pt, Pt)> = Vec::new();
    for ix in 0..nx - 1 {
        for iy in 0..ny - 1 {
            let (Some(v00), Some(v10), Some(v01), Some(v11)) = (
                value(ix, iy),
                value(ix + 1, iy),
                value(ix, iy + 1),
                value(ix + 1, iy + 1),
            ) else {
                continue;
            };
            let p00 = (grid.x[ix], grid.y[iy]);
            let p10 = (grid.x[ix + 1], grid.y[iy]);
            let p01 = (grid.x[ix], grid.y[iy + 1]);
            let p11 = (grid.x[ix + 1], grid.y[iy + 1]);

            let mut case = 0u8;
            if v00 > level {
                case |= 1;
            }
            if v10 > level {
                case |= 2;
            }
            if v11 > level {
                case |= 4;
            }
            if v01 > level {
                case |= 8;
            }
            if case == 0 || case == 15 {
                continue;
            }

            // edges: bottom (p00-p10), right (p10-p11), top (p01-p11), left (p00-p01)
            let bottom = || cross(p00, v00, p10, v10);
            let right = || cross(p10, v10, p11, v11);
            let top = || cross(p01, v01, p11, v11);
            let left = || cross(p00, v00, p01, v01);

            match case {
                1 | 14 => segments.push((left(), bottom())),
                2 | 13 => segments.push((bottom(), right())),
                3 | 12 => segments.push((left(), right())),
                4 | 11 => segments.push((right(), top())),
                6 | 9 => segments.push((bottom(), top())),
                7 | 8 => segments.push((left(), top())),
                5 => {
                    segments.push((left(), top()));
                    segments.push((bottom(), right()));
                }
                10 => {
                    segments.push((left(), bottom()));
                    segments.push((right(), top()));
                }
                _ => unreachable!(),
            }
        }
    }

    chain_segments(level, segments)
}

// joins segments sharing bit-identical endpoints into polylines; traversal
// order is deterministic (seed segments in generation order, lowest-index
// neighbor first)
fn chain_segments(level: f64, segments: Vec<((f64, f64), (f64, f64))>) -> Vec<Polyline> {
    let key = |p: (f64, f64)| (p.0.to_bits(), p.1.to_bits());
    let mut by_endpoint: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in segments.iter().enumerate() {
        by_endpoint.entry(key(a)).or_default().push(i);
        by_endpoint.entry(key(b)).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    for seed in 0..segments.len() {
        if used[seed] {
            continue;
        }
        used[seed] = true;
        let (a, b) = segments[seed];
        let mut points = std::collections::VecDeque::from([a, b]);

        for forward in [true, false] {
            loop {
                let tip = if forward {
                    *points.back().expect("non-empty")
                } else {
                    *points.front().expect("non-empty")
                };
                let next = by_endpoint
                    .get(&key(tip))
                    .into_iter()
                    .flatten()
                    .copied()
                    .filter(|&i| !used[i])
                    .min();
                let Some(i) = next else { break };
                used[i] = true;
                let (sa, sb) = segments[i];
                let other = if key(sa) == key(tip) { sb } else { sa };
                if forward {
                    points.push_back(other);
                } else {
                    points.push_front(other);
                }
            }
        }
        out.push(Polyline {
            level,
            points: points.into_iter().collect(),
        });
    }
    out
}
