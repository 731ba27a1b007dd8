//! The `eigen`, `evolve`, `scan` and `classical` drivers.

use std::time::Instant;

use rayon::prelude::*;

use dwell_core::dynamics::{classical_trajectory, evolve, EvolutionSettings};
use dwell_core::observables::{max_tunneling_at, observe, wavefunction_on_grid};
use dwell_core::system::DoubleWellSystem;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Manifest, OutputDir, PointFailure, Table};

/// Eigenvalues reported per asymmetry by `eigen`.
pub const REPORTED_LEVELS: usize = 11;

pub const SERIES_COLUMNS: [&str; 13] = [
    "t",
    "x_mean",
    "p_mean",
    "x_var",
    "p_var",
    "xp_sym",
    "autocorr_re",
    "autocorr_im",
    "autocorr_abs2",
    "uncertainty",
    "p_right",
    "norm",
    "energy",
];

fn system_for(config: &RunConfig, d: f64) -> Result<DoubleWellSystem, CliError> {
    Ok(DoubleWellSystem::new(config.params()?, config.well_with(d)?, config.basis.n_max)?)
}

/// Spectrum and stationary-point table, one row per `scan.d_values` entry.
pub fn eigen(config: &RunConfig, out: &mut OutputDir, _manifest: &mut Manifest) -> Result<(), CliError> {
    let levels = REPORTED_LEVELS.min(config.basis.n_max + 1);
    let energy_names: Vec<String> = (0..levels).map(|nu| format!("E_{nu}")).collect();
    let mut columns = vec!["d"];
    columns.extend(energy_names.iter().map(String::as_str));
    columns.extend(["delta", "delta_prime", "u_minus", "u_barrier", "u_plus", "delta_u"]);
    let mut table = Table::new(&columns);
    for &d in &config.scan.d_values {
        let sys = system_for(config, d).map_err(|e| CliError::Config(format!("scan.d_values entry {d}: {e}")))?;
        let sp = sys.stationary_points()?;
        let gaps = sys.gaps();
        let mut row = vec![d];
        row.extend(&sys.eigen.values[..levels]);
        row.extend([gaps.delta, gaps.delta_prime, sp.u_minus, sp.u_barrier, sp.u_plus, sp.delta_u]);
        table.push(row);
    }
    out.write_table("eigen", &table, config)
}

/// Time series of every observable for the configured well and packet.
pub fn evolve_series(config: &RunConfig, out: &mut OutputDir, manifest: &mut Manifest) -> Result<(), CliError> {
    let sys = system_for(config, config.well.d)?;
    let settings = config.evolution()?;
    let packet = sys.project_packet(&config.packet()?)?;
    manifest.captured_norm = Some(packet.captured_norm);
    manifest.warnings.extend(packet.warning());

    let states = evolve(&packet.state, &sys.matrix, &sys.eigen, &sys.params, &settings)?;
    let samples = observe(&states, &packet.state, &sys.params, &sys.matrix, &sys.eigen, &sys.overlaps())?;
    let mut table = Table::new(&SERIES_COLUMNS);
    for s in &samples {
        table.push(vec![
            s.t,
            s.x_mean,
            s.p_mean,
            s.x_var(),
            s.p_var(),
            s.xp_sym,
            s.autocorr.re,
            s.autocorr.im,
            s.autocorr.norm_sqr(),
            s.uncertainty,
            s.p_right,
            s.norm,
            s.energy,
        ]);
    }
    manifest.p_right_horizon = Some(settings.t_max);
    manifest.p_right_step = Some(settings.dt_out);
    out.write_table("series", &table, config)?;

    if config.output.wavefunction {
        let xs = config.grid_points();
        let mut wf = Table::new(&["t", "x", "re", "im", "abs2"]);
        for state in states.iter().step_by(config.output.wavefunction_stride) {
            for (x, psi) in xs.iter().zip(wavefunction_on_grid(state, &sys.params, &xs)) {
                wf.push(vec![state.t, *x, psi.re, psi.im, psi.norm_sqr()]);
            }
        }
        out.write("wavefunction.csv", &wf.to_csv())?;
    }
    Ok(())
}

struct ScanPoint {
    d: f64,
    delta_u: f64,
    p_right_max: f64,
    t_at_max: f64,
    captured_norm: f64,
    warning: Option<String>,
}

fn scan_point(config: &RunConfig, settings: &EvolutionSettings, d: f64) -> Result<ScanPoint, CliError> {
    let sys = system_for(config, d)?;
    let packet = sys.project_packet(&config.packet()?)?;
    let samples = sys.run(&packet, settings)?;
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let p: Vec<f64> = samples.iter().map(|s| s.p_right).collect();
    let (t_at_max, p_right_max) = max_tunneling_at(&times, &p)?;
    Ok(ScanPoint {
        d,
        delta_u: sys.stationary_points()?.delta_u,
        p_right_max,
        t_at_max,
        captured_norm: packet.captured_norm,
        warning: packet.warning(),
    })
}

/// Worker count for `scan`: `DWELL_THREADS` if set and positive, else all cores.
pub fn scan_threads() -> Result<usize, CliError> {
    match std::env::var("DWELL_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("DWELL_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// `P_r^max` against `Delta U` over `scan.d_values`. Points run concurrently
/// and are reported in input order; a failing point is recorded in the
/// manifest and skipped.
pub fn scan(config: &RunConfig, out: &mut OutputDir, manifest: &mut Manifest) -> Result<(), CliError> {
    let settings = config.evolution()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(scan_threads()?)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<ScanPoint, CliError>> =
        pool.install(|| config.scan.d_values.par_iter().map(|&d| scan_point(config, &settings, d)).collect());

    let mut table = Table::new(&["d", "delta_u", "p_r_max", "t_at_max", "captured_norm"]);
    for (d, result) in config.scan.d_values.iter().zip(results) {
        match result {
            Ok(p) => {
                table.push(vec![p.d, p.delta_u, p.p_right_max, p.t_at_max, p.captured_norm]);
                manifest.warnings.extend(p.warning.map(|w| format!("d = {}: {w}", p.d)));
            }
            Err(e) => manifest.failures.push(PointFailure { d: *d, error: e.to_string() }),
        }
    }
    manifest.p_right_horizon = Some(settings.t_max);
    manifest.p_right_step = Some(settings.dt_out);
    if table.rows.is_empty() {
        return Err(CliError::Numerical(format!("every scan point failed: {}", manifest.failures[0].error)));
    }
    out.write_table("scan", &table, config)
}

/// Classical `(x, p)` and quantum `(<x>, <p>)` from the same initial condition.
pub fn classical(config: &RunConfig, out: &mut OutputDir, manifest: &mut Manifest) -> Result<(), CliError> {
    let sys = system_for(config, config.well.d)?;
    let settings = config.evolution()?;
    let spec = config.packet()?;

    let path = classical_trajectory(spec.x0, spec.p0, &sys.coeffs, &sys.params, &settings)?;
    let mut c = Table::new(&["t", "x", "p", "energy"]);
    for s in &path {
        c.push(vec![s.t, s.x, s.p, s.energy(&sys.coeffs, &sys.params)]);
    }
    out.write_table("classical", &c, config)?;

    let packet = sys.project_packet(&spec)?;
    manifest.captured_norm = Some(packet.captured_norm);
    manifest.warnings.extend(packet.warning());
    let states = evolve(&packet.state, &sys.matrix, &sys.eigen, &sys.params, &settings)?;
    let mut q = Table::new(&["t", "x_mean", "p_mean"]);
    for state in &states {
        let s = dwell_core::observables::expectations(state, &sys.params, &sys.matrix)?;
        q.push(vec![s.t, s.x_mean, s.p_mean]);
    }
    out.write_table("quantum", &q, config)
}

/// Runs one scenario command end to end, including the manifest.
pub fn run_command(
    name: &str,
    config: &RunConfig,
    body: fn(&RunConfig, &mut OutputDir, &mut Manifest) -> Result<(), CliError>,
) -> Result<Vec<String>, CliError> {
    let start = Instant::now();
    let mut out = OutputDir::create(&config.output.directory)?;
    let mut manifest = Manifest::new(name, config);
    body(config, &mut out, &mut manifest)?;
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    out.finish(&manifest)
}
