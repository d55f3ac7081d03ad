//! Grid sweeps of the maximum post-pulse orientation.
//!
//! A scan is a rectangular grid over two physical axes: (B, T) for a fictive
//! molecule of fixed dipole, or (E0, T) for a fixed molecule. Each cell is an
//! independent ensemble run. Completed cells are appended to an NDJSON
//! checkpoint so an interrupted scan can be resumed; the first line of the
//! checkpoint echoes the grid and propagation settings and must match on
//! resume.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orientation::{run_ensemble, MaxOrientation, RunDiagnostics, RunOptions};
use crate::propagator::PropagationConfig;
use crate::thermal::DEFAULT_CUTOFF;
use crate::units::{to_reduced, PhysicalField, PhysicalMolecule, ReducedParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition(format!("axis {name} has no values")));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!(
                "axis {name} must be strictly monotone"
            )));
        }
        Ok(Axis {
            name: name.to_string(),
            unit: unit.to_string(),
            values,
        })
    }

    pub fn linear(name: &str, unit: &str, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let values = if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        };
        Axis::new(name, unit, values)
    }

    pub fn logarithmic(name: &str, unit: &str, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::Precondition(format!(
                "logarithmic axis {name} needs positive bounds"
            )));
        }
        let values = if n == 1 {
            vec![lo]
        } else {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
        };
        Axis::new(name, unit, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// What is held fixed while the two axes vary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanKind {
    /// axis 1: B (cm^-1), axis 2: T (K)
    BT { field: PhysicalField, mu0: f64 },
    /// axis 1: E0 (MV/cm), axis 2: T (K)
    E0T {
        molecule: PhysicalMolecule,
        delta: f64,
        f: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub kind: ScanKind,
    pub axis1: Axis,
    pub axis2: Axis,
}

impl ScanGrid {
    pub fn b_t(b: Axis, t: Axis, field: PhysicalField, mu0: f64) -> Result<Self> {
        field.validate()?;
        PhysicalMolecule::new("fictive", 1.0, mu0)?;
        Ok(ScanGrid {
            kind: ScanKind::BT { field, mu0 },
            axis1: b,
            axis2: t,
        })
    }

    pub fn e0_t(e0: Axis, t: Axis, molecule: PhysicalMolecule, delta: f64, f: f64) -> Result<Self> {
        molecule.validate()?;
        PhysicalField { e_peak: 0.0, delta, f }.validate()?;
        Ok(ScanGrid {
            kind: ScanKind::E0T { molecule, delta, f },
            axis1: e0,
            axis2: t,
        })
    }

    /// Default (B, T) map: B logarithmic over [0.1, 21] cm^-1, T linear over
    /// [0, 300] K, reference field, 1 D dipole.
    pub fn default_b_t(n_b: usize, n_t: usize) -> Result<Self> {
        ScanGrid::b_t(
            Axis::logarithmic("B", "cm^-1", 0.1, 21.0, n_b)?,
            Axis::linear("T", "K", 0.0, 300.0, n_t)?,
            PhysicalField::reference(),
            1.0,
        )
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.len())
    }

    pub fn cell_count(&self) -> usize {
        self.axis1.len() * self.axis2.len()
    }

    /// Row-major index of `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.axis2.len() + j
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.axis2.len(), index % self.axis2.len())
    }

    pub fn cell_params(&self, index: usize) -> Result<ReducedParams> {
        let (i, j) = self.coords(index);
        let (x, t) = (self.axis1.values[i], self.axis2.values[j]);
        match &self.kind {
            ScanKind::BT { field, mu0 } => {
                let mol = PhysicalMolecule::new("fictive", x, *mu0)?;
                to_reduced(&mol, field, t)
            }
            ScanKind::E0T { molecule, delta, f } => {
                let field = PhysicalField {
                    e_peak: x,
                    delta: *delta,
                    f: *f,
                };
                to_reduced(molecule, &field, t)
            }
        }
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellStatus {
    Done {
        max: MaxOrientation,
        diagnostics: RunDiagnostics,
    },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub index: usize,
    pub i: usize,
    pub j: usize,
    pub params: Option<ReducedParams>,
    #[serde(flatten)]
    pub status: CellStatus,
    /// Wall-clock seconds; metadata only.
    pub runtime: f64,
}

impl CellRecord {
    pub fn max(&self) -> Option<&MaxOrientation> {
        match &self.status {
            CellStatus::Done { max, .. } => Some(max),
            CellStatus::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Total,
    ZeroT,
    Thermal,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Total, Component::ZeroT, Component::Thermal];

    pub fn name(&self) -> &'static str {
        match self {
            Component::Total => "total",
            Component::ZeroT => "zero_T",
            Component::Thermal => "thermal",
        }
    }

    fn pick(&self, m: &MaxOrientation) -> crate::orientation::Extremum {
        match self {
            Component::Total => m.total,
            Component::ZeroT => m.zero_t,
            Component::Thermal => m.thermal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub grid: ScanGrid,
    /// Row-major over `(axis1, axis2)`; `None` for cells not yet computed.
    pub cells: Vec<Option<CellRecord>>,
}

impl ScanResult {
    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    pub fn failed_cells(&self) -> usize {
        self.cells
            .iter()
            .flatten()
            .filter(|c| matches!(c.status, CellStatus::Failed { .. }))
            .count()
    }

    /// Maximum-orientation magnitudes, `[i][j]`; failed or missing cells are `None`.
    pub fn matrix(&self, component: Component) -> Vec<Vec<Option<f64>>> {
        self.map_cells(|m| component.pick(m).magnitude)
    }

    /// Signed value at the extremum.
    pub fn signed_matrix(&self, component: Component) -> Vec<Vec<Option<f64>>> {
        self.map_cells(|m| component.pick(m).value)
    }

    fn map_cells(&self, f: impl Fn(&MaxOrientation) -> f64) -> Vec<Vec<Option<f64>>> {
        let (n1, n2) = self.grid.shape();
        (0..n1)
            .map(|i| {
                (0..n2)
                    .map(|j| {
                        self.cells[self.grid.index(i, j)]
                            .as_ref()
                            .and_then(|c| c.max())
                            .map(&f)
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CheckpointHeader {
    kind: String,
    grid: ScanGrid,
    propagation: PropagationConfig,
    cutoff: f64,
}

/// Runs the cells of a grid, in parallel, with optional checkpointing.
#[derive(Debug, Clone)]
pub struct ScanRunner {
    pub grid: ScanGrid,
    pub propagation: PropagationConfig,
    pub cutoff: f64,
    pub checkpoint: Option<PathBuf>,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Stop after this many newly computed cells (the rest stay pending).
    pub cell_budget: Option<usize>,
    /// Print one line per finished cell to stderr.
    pub progress: bool,
}

impl ScanRunner {
    pub fn new(grid: ScanGrid) -> Self {
        ScanRunner {
            grid,
            propagation: PropagationConfig::default(),
            cutoff: DEFAULT_CUTOFF,
            checkpoint: None,
            workers: None,
            cell_budget: None,
            progress: false,
        }
    }

    fn header(&self) -> CheckpointHeader {
        CheckpointHeader {
            kind: "header".into(),
            grid: self.grid.clone(),
            propagation: self.propagation,
            cutoff: self.cutoff,
        }
    }

    /// Run one cell; failures are captured in the record, not propagated.
    pub fn run_cell(&self, index: usize) -> CellRecord {
        let start = Instant::now();
        let (i, j) = self.grid.coords(index);
        let params = self.grid.cell_params(index);
        let status = params
            .clone()
            .and_then(|p| {
                let opts = RunOptions {
                    cutoff: self.cutoff,
                    in_pulse: false,
                };
                run_ensemble(&p, &self.propagation, &opts)
            })
            .map(|run| CellStatus::Done {
                max: run.max_orientation(),
                diagnostics: run.diagnostics(),
            })
            .unwrap_or_else(|e| CellStatus::Failed {
                error: e.to_string(),
            });
        CellRecord {
            index,
            i,
            j,
            params: params.ok(),
            status,
            runtime: start.elapsed().as_secs_f64(),
        }
    }

    /// Read the cells already recorded in the checkpoint, truncating any
    /// partially written trailing line.
    fn load_checkpoint(&self, path: &Path) -> Result<Vec<CellRecord>> {
        let file = File::open(path).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let mut reader = BufReader::new(file);
        let mut line = String::new();
        let mut good_len = 0u64;
        let mut records = Vec::new();
        let mut first = true;
        loop {
            line.clear();
            let n = reader
                .read_line(&mut line)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            if n == 0 || !line.ends_with('\n') {
                break;
            }
            if first {
                let header: CheckpointHeader = serde_json::from_str(&line)
                    .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
                if header != self.header() {
                    return Err(Error::Checkpoint(format!(
                        "{} belongs to a different scan configuration",
                        path.display()
                    )));
                }
                first = false;
            } else {
                match serde_json::from_str::<CellRecord>(&line) {
                    Ok(r) if r.index < self.grid.cell_count() => records.push(r),
                    _ => break,
                }
            }
            good_len += n as u64;
        }
        if first {
            // empty or torn header: start over
            good_len = 0;
        }
        let file = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        file.set_len(good_len)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(records)
    }

    pub fn run(&self) -> Result<ScanResult> {
        let n = self.grid.cell_count();
        let mut cells: Vec<Option<CellRecord>> = vec![None; n];

        let mut sink: Option<File> = None;
        if let Some(path) = &self.checkpoint {
            let fresh = !path.exists() || std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
            if !fresh {
                for r in self.load_checkpoint(path)? {
                    let idx = r.index;
                    cells[idx] = Some(r);
                }
            }
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            if file.metadata().map(|m| m.len() == 0).unwrap_or(true) {
                let header = serde_json::to_string(&self.header())
                    .map_err(|e| Error::Checkpoint(e.to_string()))?;
                writeln!(file, "{header}").map_err(|e| Error::Checkpoint(e.to_string()))?;
                file.flush().map_err(|e| Error::Checkpoint(e.to_string()))?;
            }
            sink = Some(file);
        }

        let mut pending: Vec<usize> = (0..n).filter(|&k| cells[k].is_none()).collect();
        if let Some(budget) = self.cell_budget {
            pending.truncate(budget);
        }

        let (tx, rx) = mpsc::channel::<CellRecord>();
        let progress = self.progress;
        let total = pending.len();
        let writer = std::thread::spawn(move || -> Result<Vec<CellRecord>> {
            let mut done = Vec::new();
            for record in rx {
                if let Some(file) = sink.as_mut() {
                    let line = serde_json::to_string(&record)
                        .map_err(|e| Error::Checkpoint(e.to_string()))?;
                    writeln!(file, "{line}").map_err(|e| Error::Checkpoint(e.to_string()))?;
                    file.flush().map_err(|e| Error::Checkpoint(e.to_string()))?;
                }
                if progress {
                    eprintln!(
                        "[{}/{}] cell ({}, {}) {} in {:.1}s",
                        done.len() + 1,
                        total,
                        record.i,
                        record.j,
                        match &record.status {
                            CellStatus::Done { max, .. } => format!("max {:.4}", max.total.magnitude),
                            CellStatus::Failed { error } => format!("FAILED: {error}"),
                        },
                        record.runtime
                    );
                }
                done.push(record);
            }
            Ok(done)
        });

        let work = |tx: mpsc::Sender<CellRecord>| {
            pending.par_iter().for_each_with(tx, |tx, &k| {
                let _ = tx.send(self.run_cell(k));
            });
        };
        match self.workers {
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .map_err(|e| Error::Precondition(e.to_string()))?;
                pool.install(|| work(tx));
            }
            None => work(tx),
        }
        let done = writer
            .join()
            .map_err(|_| Error::Checkpoint("checkpoint writer panicked".into()))??;
        for r in done {
            let idx = r.index;
            cells[idx] = Some(r);
        }
        Ok(ScanResult {
            grid: self.grid.clone(),
            cells,
        })
    }
}

/// (B, T) map of the maximum orientation.
pub fn scan_b_t(
    b_values: Vec<f64>,
    t_values: Vec<f64>,
    field: PhysicalField,
    mu0: f64,
    cfg: &PropagationConfig,
) -> Result<ScanResult> {
    let grid = ScanGrid::b_t(
        Axis::new("B", "cm^-1", b_values)?,
        Axis::new("T", "K", t_values)?,
        field,
        mu0,
    )?;
    ScanRunner {
        propagation: *cfg,
        ..ScanRunner::new(grid)
    }
    .run()
}

/// (E0, T) map for one molecule with fixed pulse timing.
pub fn scan_e0_t(
    e0_values: Vec<f64>,
    t_values: Vec<f64>,
    molecule: PhysicalMolecule,
    delta: f64,
    f: f64,
    cfg: &PropagationConfig,
) -> Result<ScanResult> {
    let grid = ScanGrid::e0_t(
        Axis::new("E0", "MV/cm", e0_values)?,
        Axis::new("T", "K", t_values)?,
        molecule,
        delta,
        f,
    )?;
    ScanRunner {
        propagation: *cfg,
        ..ScanRunner::new(grid)
    }
    .run()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub temperature: f64,
    pub total: Option<f64>,
    pub zero_t: Option<f64>,
    pub thermal: Option<f64>,
}

/// Maximum orientation versus temperature for one molecule.
pub fn temperature_curve(
    molecule: &PhysicalMolecule,
    t_values: Vec<f64>,
    field: PhysicalField,
    cfg: &PropagationConfig,
) -> Result<Vec<CurvePoint>> {
    let result = scan_b_t(vec![molecule.b], t_values, field, molecule.mu0, cfg)?;
    Ok(curve_from_scan(&result, 0))
}

/// Temperature curve along row `i` of a (B, T) or (E0, T) scan.
pub fn curve_from_scan(result: &ScanResult, i: usize) -> Vec<CurvePoint> {
    let total = result.matrix(Component::Total);
    let zero = result.matrix(Component::ZeroT);
    let thermal = result.matrix(Component::Thermal);
    result
        .grid
        .axis2
        .values
        .iter()
        .enumerate()
        .map(|(j, &t)| CurvePoint {
            temperature: t,
            total: total[i][j],
            zero_t: zero[i][j],
            thermal: thermal[i][j],
        })
        .collect()
}

/// A connected set of grid cells at or above a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub cells: Vec<(usize, usize)>,
    pub peak: f64,
    /// Mean `(i, j)` index.
    pub centroid: (f64, f64),
}

/// 4-connected components of `{cell >= fraction * global max}`.
pub fn superlevel_regions(matrix: &[Vec<Option<f64>>], fraction: f64) -> Vec<Region> {
    let peak = matrix
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b));
    if peak <= 0.0 {
        return Vec::new();
    }
    let level = fraction * peak;
    let n1 = matrix.len();
    let n2 = matrix.first().map_or(0, Vec::len);
    let above = |i: usize, j: usize| matrix[i][j].is_some_and(|v| v >= level);
    let mut seen = vec![vec![false; n2]; n1];
    let mut regions = Vec::new();
    for i0 in 0..n1 {
        for j0 in 0..n2 {
            if seen[i0][j0] || !above(i0, j0) {
                continue;
            }
            let mut stack = vec![(i0, j0)];
            seen[i0][j0] = true;
            let mut cells = Vec::new();
            while let Some((i, j)) = stack.pop() {
                cells.push((i, j));
                let mut visit = |a: usize, b: usize| {
                    if !seen[a][b] && above(a, b) {
                        seen[a][b] = true;
                        stack.push((a, b));
                    }
                };
                if i > 0 {
                    visit(i - 1, j);
                }
                if i + 1 < n1 {
                    visit(i + 1, j);
                }
                if j > 0 {
                    visit(i, j - 1);
                }
                if j + 1 < n2 {
                    visit(i, j + 1);
                }
            }
            cells.sort_unstable();
            let k = cells.len() as f64;
            let centroid = (
                cells.iter().map(|c| c.0 as f64).sum::<f64>() / k,
                cells.iter().map(|c| c.1 as f64).sum::<f64>() / k,
            );
            let peak = cells
                .iter()
                .filter_map(|&(i, j)| matrix[i][j])
                .fold(0.0f64, f64::max);
            regions.push(Region {
                cells,
                peak,
                centroid,
            });
        }
    }
    regions.sort_by(|a, b| b.peak.total_cmp(&a.peak));
    regions
}

/// The two orientation zones of a (B, T) map, if both are present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zones {
    /// High B, low T.
    pub ladder: Region,
    /// Low B, elevated T.
    pub thermal: Region,
}

/// Look for two disjoint regions at half the global maximum, one lying at
/// larger B and lower T than the other. Axis 1 must be B ascending, axis 2 T
/// ascending.
pub fn detect_zones(matrix: &[Vec<Option<f64>>]) -> Option<Zones> {
    detect_zones_at(matrix, 0.5)
}

/// [`detect_zones`] with the superlevel set taken at `fraction` of the
/// global maximum.
pub fn detect_zones_at(matrix: &[Vec<Option<f64>>], fraction: f64) -> Option<Zones> {
    let regions = superlevel_regions(matrix, fraction);
    let mut best: Option<(f64, Zones)> = None;
    for a in &regions {
        for b in &regions {
            let (ab, at) = a.centroid;
            let (bb, bt) = b.centroid;
            if ab > bb && at < bt && bt > 0.0 {
                let score = a.peak + b.peak;
                if best.as_ref().is_none_or(|(s, _)| score > *s) {
                    best = Some((
                        score,
                        Zones {
                            ladder: a.clone(),
                            thermal: b.clone(),
                        },
                    ));
                }
            }
        }
    }
    best.map(|(_, z)| z)
}

/// Least-squares fit of `y = a x^p` in log-log space; returns `(a, p)`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let p = sxy / sxx;
    Some(((my - p * mx).exp(), p))
}

/// Index of the sharpest bend of a sampled curve: the largest absolute second
/// difference, normalized by the local grid spacing.
pub fn slope_change_index(x: &[f64], y: &[f64]) -> Option<usize> {
    if x.len() < 3 || x.len() != y.len() {
        return None;
    }
    (1..x.len() - 1)
        .map(|k| {
            let s1 = (y[k] - y[k - 1]) / (x[k] - x[k - 1]);
            let s2 = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
            (k, (s2 - s1).abs())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

/// First index where the thermal part exceeds the ground-state part.
pub fn crossover_index(curve: &[CurvePoint]) -> Option<usize> {
    curve.iter().position(|p| match (p.thermal, p.zero_t) {
        (Some(th), Some(z)) => th > z,
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Vec<Vec<Option<f64>>> {
        rows.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect()
    }

    #[test]
    fn axes_validate() {
        assert!(Axis::new("T", "K", vec![]).is_err());
        assert!(Axis::new("T", "K", vec![1.0, 1.0]).is_err());
        assert!(Axis::new("T", "K", vec![3.0, 2.0, 1.0]).is_ok());
        let b = Axis::logarithmic("B", "cm^-1", 0.1, 21.0, 16).unwrap();
        assert_eq!(b.len(), 16);
        assert!((b.values[15] - 21.0).abs() < 1e-12);
        assert!(Axis::logarithmic("B", "cm^-1", 0.0, 21.0, 4).is_err());
    }

    #[test]
    fn grid_indexing() {
        let g = ScanGrid::default_b_t(3, 4).unwrap();
        assert_eq!(g.cell_count(), 12);
        for k in 0..12 {
            let (i, j) = g.coords(k);
            assert_eq!(g.index(i, j), k);
        }
        let p = g.cell_params(g.index(0, 0)).unwrap();
        assert_eq!(p.t_tilde, 0.0);
    }

    #[test]
    fn regions_and_zones() {
        // B rows ascending, T columns ascending
        let mat = m(&[
            &[0.0, 0.1, 0.6, 0.7],
            &[0.0, 0.1, 0.5, 0.6],
            &[0.1, 0.1, 0.1, 0.1],
            &[0.9, 0.5, 0.1, 0.0],
        ]);
        let regions = superlevel_regions(&mat, 0.5);
        assert_eq!(regions.len(), 2);
        let z = detect_zones(&mat).unwrap();
        assert_eq!(z.ladder.peak, 0.9);
        assert_eq!(z.thermal.cells.len(), 4);

        let single = m(&[&[0.9, 0.8], &[0.7, 0.1]]);
        assert!(detect_zones(&single).is_none());
    }

    #[test]
    fn a_ridge_merges_zones_until_the_level_rises() {
        // rows: B ascending, columns: T ascending
        let mat = m(&[&[0.0, 0.8, 0.1], &[0.1, 0.6, 0.1], &[1.0, 0.6, 0.0]]);
        assert!(detect_zones(&mat).is_none());
        let z = detect_zones_at(&mat, 0.7).unwrap();
        assert_eq!(z.ladder.cells, vec![(2, 0)]);
        assert_eq!(z.thermal.cells, vec![(0, 1)]);
    }

    #[test]
    fn failed_cells_are_not_above_threshold() {
        let mut mat = m(&[&[1.0, 0.9], &[0.0, 0.0]]);
        mat[0][1] = None;
        assert_eq!(superlevel_regions(&mat, 0.5)[0].cells, vec![(0, 0)]);
    }

    #[test]
    fn power_law() {
        let x: Vec<f64> = (1..10).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v * v).collect();
        let (a, p) = fit_power_law(&x, &y).unwrap();
        assert!((a - 0.3).abs() < 1e-12 && (p - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kink() {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| if v < 6.0 { 1.0 - 0.1 * v } else { 0.4 + 0.02 * (v - 6.0) }).collect();
        assert_eq!(slope_change_index(&x, &y), Some(6));
    }
}
