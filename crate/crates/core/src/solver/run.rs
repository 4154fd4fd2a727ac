use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{SolverError, State, Stepper};
use crate::config::SimulationConfig;
use crate::diagnostics::{self, DiagnosticsRow, EnergyBudget, CSV_HEADER};
use crate::grid::{self, Field};
use crate::params::ModelParams;

/// Receives per-step diagnostics and snapshots.
pub trait Sink {
    fn row(&mut self, row: &DiagnosticsRow) -> io::Result<()>;

    fn snapshot(&mut self, _step: usize, _state: &State) -> io::Result<()> {
        Ok(())
    }

    fn finish(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Keeps rows in memory.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub rows: Vec<DiagnosticsRow>,
}

impl Sink for MemorySink {
    fn row(&mut self, row: &DiagnosticsRow) -> io::Result<()> {
        self.rows.push(*row);
        Ok(())
    }
}

/// Writes `diagnostics.csv` rows to any writer.
#[derive(Debug)]
pub struct CsvSink<W: Write> {
    out: W,
    header: bool,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Self {
        Self { out, header: false }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> Sink for CsvSink<W> {
    fn row(&mut self, row: &DiagnosticsRow) -> io::Result<()> {
        if !self.header {
            writeln!(self.out, "{CSV_HEADER}")?;
            self.header = true;
        }
        writeln!(self.out, "{}", row.to_csv())
    }

    fn finish(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

/// `<dir>/diagnostics.csv` plus `<dir>/snap_<step>.nfld` every `every` steps.
///
/// Snapshot fields hold the director components followed by the velocity
/// components.
#[derive(Debug)]
pub struct FileSink {
    csv: CsvSink<BufWriter<File>>,
    dir: PathBuf,
    every: usize,
}

impl FileSink {
    pub fn create(dir: &Path, every: usize) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let f = File::create(dir.join("diagnostics.csv"))?;
        Ok(Self { csv: CsvSink::new(BufWriter::new(f)), dir: dir.to_path_buf(), every })
    }
}

pub fn stacked_state(state: &State) -> Field {
    let g = state.u.grid();
    let d = state.v.ncomp();
    let mut f = Field::zeros(g, 3 + d);
    for c in 0..3 {
        f.comp_mut(c).copy_from_slice(state.u.comp(c));
    }
    for c in 0..d {
        f.comp_mut(3 + c).copy_from_slice(state.v.comp(c));
    }
    f
}

impl Sink for FileSink {
    fn row(&mut self, row: &DiagnosticsRow) -> io::Result<()> {
        self.csv.row(row)
    }

    fn snapshot(&mut self, step: usize, state: &State) -> io::Result<()> {
        if self.every == 0 || !step.is_multiple_of(self.every) {
            return Ok(());
        }
        let path = self.dir.join(format!("snap_{step}.nfld"));
        let w = BufWriter::new(File::create(path)?);
        grid::write_snapshot(w, &stacked_state(state), state.t)
    }

    fn finish(&mut self) -> io::Result<()> {
        self.csv.finish()
    }
}

/// Windowed L3 mass above the configured threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationEvent {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub center: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub events: Vec<ConcentrationEvent>,
    pub final_budget: EnergyBudget,
    pub final_state: State,
    pub max_residual: f64,
    /// Largest `max|div v| / (1 + max|v|)` over all recorded states.
    pub max_divergence_ratio: f64,
    pub umin: f64,
    pub umax: f64,
}

struct Monitor<'a> {
    model: &'a ModelParams,
    config: &'a SimulationConfig,
    radius: f64,
    summary: RunSummary,
}

impl Monitor<'_> {
    fn record(
        &mut self,
        step: usize,
        state: &State,
        prev: Option<(&EnergyBudget, f64)>,
        sink: &mut dyn Sink,
    ) -> Result<EnergyBudget, SolverError> {
        let budget = diagnostics::energy_budget(state, self.model);
        let residual = prev.map_or(0.0, |(b0, dt)| diagnostics::energy_identity_residual(b0, &budget, dt));
        let (umin, umax) = diagnostics::director_range(state);
        let (l3max, center) = diagnostics::concentration_scan(state, self.radius, self.config.l3_stride)?;
        let s = &mut self.summary;
        s.max_residual = s.max_residual.max(residual);
        s.umin = s.umin.min(umin);
        s.umax = s.umax.max(umax);
        let div = grid::divergence(&state.v).max_abs() / (1.0 + state.v.max_norm());
        s.max_divergence_ratio = s.max_divergence_ratio.max(div);
        if self.config.l3_threshold.is_some_and(|th| l3max >= th) {
            let g = state.u.grid();
            let c = g.position(g.index(center[0], center[1], center[2]));
            s.events.push(ConcentrationEvent { step, t: state.t, mass: l3max, center: c });
        }
        sink.row(&DiagnosticsRow { budget, residual, umin, umax, l3max })?;
        sink.snapshot(step, state)?;
        Ok(budget)
    }
}

/// Advances `initial` to `config.t_end`, emitting one diagnostics row per
/// state (including the initial one). On failure the sink is flushed before
/// the error is returned.
pub fn run(
    initial: State,
    model: &ModelParams,
    config: &SimulationConfig,
    sink: &mut dyn Sink,
) -> Result<RunSummary, SolverError> {
    let result = run_inner(initial, model, config, sink);
    let flushed = sink.finish();
    let summary = result?;
    flushed?;
    Ok(summary)
}

fn run_inner(
    initial: State,
    model: &ModelParams,
    config: &SimulationConfig,
    sink: &mut dyn Sink,
) -> Result<RunSummary, SolverError> {
    let stepper = Stepper::new(model, config);
    stepper.check(&initial)?;
    let t0 = initial.t;
    let mut mon = Monitor {
        model,
        config,
        radius: config.l3_radius_or_default(),
        summary: RunSummary {
            steps: 0,
            events: Vec::new(),
            final_budget: EnergyBudget::default(),
            final_state: initial.clone(),
            max_residual: 0.0,
            max_divergence_ratio: 0.0,
            umin: f64::INFINITY,
            umax: f64::NEG_INFINITY,
        },
    };
    let mut budget = mon.record(0, &initial, None, sink)?;
    let mut state = initial;
    let dt = config.dt;
    let mut n = 0usize;
    while config.t_end - (state.t - t0) > 1e-9 * dt {
        let t_next = (t0 + (n + 1) as f64 * dt).min(t0 + config.t_end);
        let h = t_next - state.t;
        let mut next = stepper.advance(&state, h)?;
        next.t = t_next;
        n += 1;
        budget = mon.record(n, &next, Some((&budget, h)), sink)?;
        state = next;
    }
    let mut summary = mon.summary;
    summary.steps = n;
    summary.final_budget = budget;
    summary.final_state = state;
    Ok(summary)
}
