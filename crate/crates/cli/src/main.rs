//! `thz-orient`: command-line front end.
//!
//! Exit codes: 0 success, 1 failed or pending scan cells and runtime
//! failures, 2 usage and configuration errors.

mod config;
mod output;
mod svg;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thz_orient::field::{FrequencyGrid, PulseShape};
use thz_orient::orientation::{post_pulse_grid, run_ensemble, RunOptions};
use thz_orient::scans::{CellStatus, Component, ScanKind, ScanResult, ScanRunner};
use thz_orient::thermal::ThermalEnsemble;
use thz_orient::units::{
    from_reduced_amplitude, from_reduced_duration, from_reduced_frequency, from_reduced_temperature,
    MOLECULES,
};

use config::{
    AxisSpec, FieldSection, MoleculeSection, OutputSection, ReducedSection, RunConfig, ScanKindName,
    ScanSection, SpectrumSection, TraceSection,
};
use output::{num, opt_num, Header, OutputSet};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    /// Outputs were written but some cells failed or are still pending.
    #[error("{0}")]
    Partial(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) | CliError::Partial(_) => 1,
        }
    }
}

impl From<thz_orient::Error> for CliError {
    fn from(e: thz_orient::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "thz-orient", version, about = "Field-free orientation of polar molecules by zero-area THz pulses")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [default: ./out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads [fallback: THZ_ORIENT_WORKERS].
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Skip SVG plots.
    #[arg(long, global = true)]
    no_svg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in molecules.
    Molecules,
    /// Print the reduced parameters of a molecule and field, or the
    /// laboratory equivalents of reduced ones.
    Convert(PointArgs),
    /// Pulse spectrum and its overlap with the rotational lines.
    Spectrum {
        #[command(flatten)]
        point: PointArgs,
        /// Highest J whose line is reported.
        #[arg(long)]
        lines: Option<u32>,
    },
    /// Thermally averaged orientation during and after the pulse.
    Trace {
        #[command(flatten)]
        point: PointArgs,
        /// Post-pulse window in rotational periods.
        #[arg(long)]
        periods: Option<f64>,
        /// Post-pulse samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Maximum orientation over a (B, T) or (E0, T) grid.
    Scan {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum)]
        kind: Option<ScanKindName>,
        /// First axis as lo:hi:n[:log] (B in cm^-1 or E0 in MV/cm).
        #[arg(long, value_parser = AxisSpec::parse, allow_hyphen_values = true)]
        axis1: Option<AxisSpec>,
        /// Temperature axis as lo:hi:n[:log] in K.
        #[arg(long, value_parser = AxisSpec::parse, allow_hyphen_values = true)]
        axis2: Option<AxisSpec>,
        /// Stop after computing this many new cells; rerun to resume.
        #[arg(long, hide = true)]
        max_cells: Option<usize>,
    },
}

#[derive(Args, Debug, Default)]
struct PointArgs {
    /// Built-in molecule name.
    #[arg(long, id = "molecule")]
    molecule: Option<String>,
    /// Rotational constant, cm^-1.
    #[arg(long = "B", id = "B")]
    b: Option<f64>,
    /// Dipole moment, debye.
    #[arg(long, id = "mu0")]
    mu0: Option<f64>,
    /// Peak field, MV/cm.
    #[arg(long = "E0", id = "E0")]
    e0: Option<f64>,
    /// Pulse duration, ps.
    #[arg(long, id = "delta")]
    delta: Option<f64>,
    /// Carrier frequency, THz.
    #[arg(long = "f", id = "f")]
    f: Option<f64>,
    /// Reduced amplitude.
    #[arg(long = "A", id = "A")]
    a: Option<f64>,
    /// Reduced carrier frequency.
    #[arg(long = "F", id = "F")]
    f_reduced: Option<f64>,
    /// Reduced duration.
    #[arg(long = "D", id = "D")]
    d: Option<f64>,
    /// Temperature, K.
    #[arg(long = "T", id = "T")]
    temperature: Option<f64>,
    /// Reduced temperature.
    #[arg(long = "Ttilde", id = "Ttilde")]
    t_tilde: Option<f64>,
    /// Boltzmann tail mass left out of the ensemble.
    #[arg(long)]
    cutoff: Option<f64>,
}

fn some_if<T>(present: bool, v: T) -> Option<T> {
    present.then_some(v)
}

impl PointArgs {
    fn to_config(&self) -> RunConfig {
        let molecule = MoleculeSection {
            name: self.molecule.clone(),
            b: self.b,
            mu0: self.mu0,
        };
        let field = FieldSection {
            e_peak: self.e0,
            delta: self.delta,
            f: self.f,
        };
        let reduced = ReducedSection {
            a: self.a,
            f: self.f_reduced,
            d: self.d,
        };
        RunConfig {
            molecule: some_if(molecule != MoleculeSection::default(), molecule),
            field: some_if(field != FieldSection::default(), field),
            reduced: some_if(reduced != ReducedSection::default(), reduced),
            temperature: self.temperature,
            t_tilde: self.t_tilde,
            cutoff: self.cutoff,
            ..RunConfig::default()
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    let mut flags = match &cli.command {
        Command::Molecules => RunConfig::default(),
        Command::Convert(p) => p.to_config(),
        Command::Spectrum { point, lines } => RunConfig {
            spectrum: lines.map(|l| SpectrumSection { lines: Some(l) }),
            ..point.to_config()
        },
        Command::Trace { point, periods, samples } => RunConfig {
            trace: some_if(periods.is_some() || samples.is_some(), TraceSection {
                periods: *periods,
                samples: *samples,
            }),
            ..point.to_config()
        },
        Command::Scan { point, kind, axis1, axis2, .. } => {
            let scan = ScanSection {
                kind: *kind,
                axis1: axis1.clone(),
                axis2: axis2.clone(),
            };
            RunConfig {
                scan: some_if(scan != ScanSection::default(), scan),
                ..point.to_config()
            }
        }
    };
    flags.workers = cli.workers;
    if cli.out.is_some() || cli.no_svg {
        flags.output = Some(OutputSection {
            dir: cli.out.clone(),
            svg: cli.no_svg.then_some(false),
        });
    }
    file.overlay(&flags)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e {
                CliError::Usage(_) => "error",
                _ => "failed",
            };
            eprintln!("thz-orient: {kind}: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if let Some(n) = cfg.workers()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    cfg.propagation()
        .validate()
        .map_err(|e| CliError::Usage(format!("propagation: {e}")))?;
    if !(cfg.cutoff() > 0.0 && cfg.cutoff() < 1.0) {
        return Err(CliError::Usage(format!("cutoff must lie in (0, 1), got {}", cfg.cutoff())));
    }
    match &cli.command {
        Command::Molecules => {
            molecules();
            Ok(())
        }
        Command::Convert(_) => convert(&cfg),
        Command::Spectrum { .. } => spectrum(&cfg),
        Command::Trace { .. } => trace(&cfg),
        Command::Scan { max_cells, .. } => scan(&cfg, *max_cells),
    }
}

fn molecules() {
    println!("{:<6} {:>10} {:>8} {:>10} {:>9} {:>9}", "name", "B[cm^-1]", "mu0[D]", "A", "F", "D");
    for m in MOLECULES {
        println!(
            "{:<6} {:>10.4} {:>8.3} {:>10.4} {:>9.4} {:>9.4}",
            m.name, m.b, m.mu0, m.a, m.f, m.d
        );
    }
    println!("reduced values at E0 = 2 MV/cm, delta = 5 ps, f = 0.5 THz");
}

fn convert(cfg: &RunConfig) -> Result<(), CliError> {
    let point = cfg.resolve_point()?;
    let p = point.params;
    if let Some(m) = &point.molecule {
        println!("molecule {} B {:.4} cm^-1 mu0 {:.4} D", m.name, m.b, m.mu0);
    }
    match (&point.field, &point.molecule) {
        (Some(field), _) => {
            println!(
                "field E0 {:.4} MV/cm delta {:.4} ps f {:.4} THz",
                field.e_peak, field.delta, field.f
            );
            println!("T {:.4} K", point.temperature.unwrap_or(0.0));
        }
        (None, Some(m)) => {
            // reduced input: report the laboratory equivalents
            println!("E0 {:.4} MV/cm", from_reduced_amplitude(m, p.a)?);
            println!("delta {:.4} ps", from_reduced_duration(m.b, p.d)?);
            println!("f {:.4} THz", from_reduced_frequency(m.b, p.f)?);
            println!("T {:.4} K", from_reduced_temperature(m.b, p.t_tilde)?);
        }
        (None, None) => {}
    }
    println!("A {:.4}", p.a);
    println!("F {:.4}", p.f);
    println!("D {:.4}", p.d);
    println!("Ttilde {:.4}", p.t_tilde);
    Ok(())
}

fn point_header(h: &mut Header, point: &config::Point) {
    let p = point.params;
    h.line(format!(
        "reduced: A={} F={} D={} Ttilde={}",
        num(p.a),
        num(p.f),
        num(p.d),
        num(p.t_tilde)
    ));
    if let Some(m) = &point.molecule {
        if let Ok(ps) = from_reduced_duration(m.b, 1.0) {
            h.line(format!("time_unit_ps: {}", num(ps)));
        }
    }
}

/// Writes the effective configuration, reusable with `--config`, and lists the outputs.
fn finish(set: &mut OutputSet, cfg: &RunConfig) -> Result<(), CliError> {
    set.write(".toml", &cfg.effective().to_toml())?;
    for p in &set.written {
        println!("{}", p.display());
    }
    Ok(())
}

fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let point = cfg.resolve_point()?;
    let p = point.params;
    let pulse = PulseShape::from(&p);
    let ensemble = ThermalEnsemble::with_cutoff(p.t_tilde, cfg.cutoff())?;
    let spec = pulse.spectrum(&FrequencyGrid::for_pulse(&pulse))?;
    let default_lines = ((PI * (p.f + 4.0 / p.d)).ceil() as u32).max(ensemble.j0max);
    let report = pulse.overlap_report(&ensemble, cfg.spectrum.as_ref().and_then(|s| s.lines).unwrap_or(default_lines));
    let (peak_nu, peak_mag) = spec.peak();

    let mut h = Header::new("spectrum", cfg);
    point_header(&mut h, &point);
    h.line(format!("frequency_unit: cycles per reduced time unit; line J->J+1 at (J+1)/pi"))
        .line(format!("peak: nu={} magnitude={}", num(peak_nu), num(peak_mag)))
        .line(format!("fwhm: {}", num(spec.fwhm())))
        .line(format!("overlap_score: {}", num(report.score)));
    let header = h.render();

    let mut body = format!("{header}nu,magnitude,normalized\n");
    for ((nu, m), n) in spec.frequencies.iter().zip(&spec.magnitudes).zip(spec.normalized()) {
        let _ = writeln!(body, "{},{},{}", num(*nu), num(*m), num(n));
    }
    let mut lines = format!("{header}J,nu,omega,population,magnitude\n");
    for l in &report.lines {
        let _ = writeln!(
            lines,
            "{},{},{},{},{}",
            l.j,
            num(l.omega / (2.0 * PI)),
            num(l.omega),
            num(l.population),
            num(l.magnitude)
        );
    }
    let mut set = OutputSet::new(&cfg.out_dir(), "spectrum", cfg);
    set.write(".csv", &body)?;
    set.write("_lines.csv", &lines)?;
    if cfg.svg() {
        let pmax = report.lines.iter().map(|l| l.population).fold(0.0, f64::max);
        let sticks: Vec<(f64, f64)> = report
            .lines
            .iter()
            .filter(|l| l.omega / (2.0 * PI) <= *spec.frequencies.last().unwrap_or(&0.0))
            .map(|l| (l.omega / (2.0 * PI), if pmax > 0.0 { l.population / pmax } else { 0.0 }))
            .collect();
        let norm = spec.normalized();
        let plot = svg::line_plot(
            &format!("Pulse spectrum, A={} F={} D={} T~={}", p.a, p.f, p.d, p.t_tilde),
            "frequency (cycles per reduced time)",
            "normalized magnitude / line population",
            &[svg::Series { name: "|E(nu)|", color: "black", dashed: false, x: &spec.frequencies, y: &norm }],
            &sticks,
        );
        set.write(".svg", &plot)?;
    }
    finish(&mut set, cfg)?;
    Ok(())
}

fn trace(cfg: &RunConfig) -> Result<(), CliError> {
    let point = cfg.resolve_point()?;
    let p = point.params;
    let prop = cfg.propagation();
    let t = cfg.trace.clone().unwrap_or_default();
    let periods = t.periods.unwrap_or(1.0);
    let samples = t.samples.unwrap_or(2000);
    if !(periods > 0.0) || samples == 0 {
        return Err(CliError::Usage("trace.periods and trace.samples must be > 0".into()));
    }
    let opts = RunOptions {
        cutoff: cfg.cutoff(),
        in_pulse: false,
    };
    // post-pulse states on the same step grid as a scan cell
    let free = run_ensemble(&p, &prop, &opts)?;
    let driven = run_ensemble(&p, &prop, &RunOptions { in_pulse: true, ..opts })?;
    let inside = driven.trace(&[]);
    let after = free.trace(&post_pulse_grid(samples, periods));
    let max = free.max_orientation();
    let diag = free.diagnostics();

    let mut h = Header::new("trace", cfg);
    point_header(&mut h, &point);
    h.line(format!(
        "ensemble: j0max={} members={} tail_mass={}",
        diag.ensemble.j0max,
        diag.ensemble.members,
        num(diag.ensemble.tail_mass)
    ))
    .line(format!(
        "diagnostics: max_norm_drift={} max_jmax={} max_steps={}",
        num(diag.max_norm_drift.max(driven.diagnostics().max_norm_drift)),
        diag.max_jmax,
        diag.max_steps
    ))
    .line(format!(
        "tolerances: norm={} truncation={} cutoff={}",
        num(prop.norm_tolerance),
        num(prop.truncation_tolerance),
        num(cfg.cutoff())
    ))
    .line(format!("max_total: {} at tau={}", num(max.total.magnitude), num(max.total.time)))
    .line(format!("max_zero_T: {} at tau={}", num(max.zero_t.magnitude), num(max.zero_t.time)))
    .line(format!("max_thermal: {} at tau={}", num(max.thermal.magnitude), num(max.thermal.time)))
    .line("pulse occupies tau in [-D, 0); the signal is pi-periodic afterwards");

    let mut body = format!("{}tau,total,zero_T,thermal\n", h.render());
    let (mut tau, mut total, mut zero, mut thermal) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for tr in [&inside, &after] {
        for k in 0..tr.times.len() {
            let _ = writeln!(
                body,
                "{},{},{},{}",
                num(tr.times[k]),
                num(tr.total[k]),
                num(tr.zero_t[k]),
                num(tr.thermal[k])
            );
            tau.push(tr.times[k]);
            total.push(tr.total[k]);
            zero.push(tr.zero_t[k]);
            thermal.push(tr.thermal[k]);
        }
    }
    let mut set = OutputSet::new(&cfg.out_dir(), "trace", cfg);
    set.write(".csv", &body)?;
    if cfg.svg() {
        let plot = svg::line_plot(
            &format!("<cos theta>, A={} F={} D={} T~={}", p.a, p.f, p.d, p.t_tilde),
            "reduced time",
            "<cos theta>",
            &[
                svg::Series { name: "total", color: "black", dashed: false, x: &tau, y: &total },
                svg::Series { name: "zero T", color: "#1f77b4", dashed: true, x: &tau, y: &zero },
                svg::Series { name: "thermal", color: "#d62728", dashed: true, x: &tau, y: &thermal },
            ],
            &[],
        );
        set.write(".svg", &plot)?;
    }
    finish(&mut set, cfg)?;
    Ok(())
}

fn matrix_csv(header: &str, result: &ScanResult, component: Component) -> String {
    let g = &result.grid;
    let mut out = format!(
        "{header}{}[{}]\\{}[{}]",
        g.axis1.name, g.axis1.unit, g.axis2.name, g.axis2.unit
    );
    for t in &g.axis2.values {
        let _ = write!(out, ",{}", num(*t));
    }
    out.push('\n');
    for (i, row) in result.matrix(component).iter().enumerate() {
        out.push_str(&num(g.axis1.values[i]));
        for v in row {
            let _ = write!(out, ",{}", opt_num(*v));
        }
        out.push('\n');
    }
    out
}

fn cells_csv(header: &str, result: &ScanResult) -> String {
    let g = &result.grid;
    let mut out = format!(
        "{header}i,j,{},{},status,total,total_tau,zero_T,zero_T_tau,thermal,thermal_tau,jmax,j0max,members,norm_drift\n",
        g.axis1.name, g.axis2.name
    );
    for (k, cell) in result.cells.iter().enumerate() {
        let (i, j) = g.coords(k);
        let _ = write!(out, "{i},{j},{},{},", num(g.axis1.values[i]), num(g.axis2.values[j]));
        match cell.as_ref().map(|c| &c.status) {
            Some(CellStatus::Done { max, diagnostics: d }) => {
                let _ = writeln!(
                    out,
                    "ok,{},{},{},{},{},{},{},{},{},{}",
                    num(max.total.value),
                    num(max.total.time),
                    num(max.zero_t.value),
                    num(max.zero_t.time),
                    num(max.thermal.value),
                    num(max.thermal.time),
                    d.max_jmax,
                    d.ensemble.j0max,
                    d.ensemble.members,
                    num(d.max_norm_drift)
                );
            }
            Some(CellStatus::Failed { .. }) => out.push_str("failed,,,,,,,,,,\n"),
            None => out.push_str("pending,,,,,,,,,,\n"),
        }
    }
    out
}

fn scan(cfg: &RunConfig, max_cells: Option<usize>) -> Result<(), CliError> {
    let grid = cfg.resolve_scan()?;
    let prop = cfg.propagation();
    let mut set = OutputSet::new(&cfg.out_dir(), "scan", cfg);
    let checkpoint = set.path(".ndjson");
    std::fs::create_dir_all(cfg.out_dir()).map_err(|e| CliError::Runtime(e.to_string()))?;
    let runner = ScanRunner {
        propagation: prop,
        cutoff: cfg.cutoff(),
        checkpoint: Some(checkpoint.clone()),
        workers: None,
        cell_budget: max_cells,
        progress: true,
        ..ScanRunner::new(grid.clone())
    };
    let result = runner.run()?;
    let pending = result.cells.iter().filter(|c| c.is_none()).count();
    let failed = result.failed_cells();

    let fixed = match &grid.kind {
        ScanKind::BT { field, mu0 } => format!(
            "fixed: mu0={} D, E0={} MV/cm, delta={} ps, f={} THz",
            mu0, field.e_peak, field.delta, field.f
        ),
        ScanKind::E0T { molecule, delta, f } => format!(
            "fixed: molecule={} B={} cm^-1 mu0={} D, delta={} ps, f={} THz",
            molecule.name, molecule.b, molecule.mu0, delta, f
        ),
    };
    let mut h = Header::new("scan", cfg);
    h.line(fixed)
        .line(format!(
            "tolerances: norm={} truncation={} cutoff={}",
            num(prop.norm_tolerance),
            num(prop.truncation_tolerance),
            num(cfg.cutoff())
        ))
        .line(format!("cells: {} failed={} pending={}", grid.cell_count(), failed, pending))
        .line("failed and pending cells are left empty");
    let header = h.render();

    for c in Component::ALL {
        set.write(&format!("_{}.csv", c.name()), &matrix_csv(&header, &result, c))?;
    }
    set.write("_cells.csv", &cells_csv(&header, &result))?;
    if cfg.svg() {
        for c in Component::ALL {
            let plot = svg::heatmap(
                &format!("Maximum orientation ({})", c.name()),
                &format!("{} [{}]", grid.axis1.name, grid.axis1.unit),
                &format!("{} [{}]", grid.axis2.name, grid.axis2.unit),
                &grid.axis1.values,
                &grid.axis2.values,
                &result.matrix(c),
            );
            set.write(&format!("_{}.svg", c.name()), &plot)?;
        }
    }
    finish(&mut set, cfg)?;
    println!("{}", checkpoint.display());
    if failed > 0 || pending > 0 {
        return Err(CliError::Partial(format!(
            "{failed} failed and {pending} pending cells; rerun to resume pending ones"
        )));
    }
    Ok(())
}
