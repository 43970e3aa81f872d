//! Dispatch of a [`RunConfig`] to the simulation modules and CSV emission.

use std::path::PathBuf;

use kerr_dimer::analytic::{correlators, validity_metric, PSeriesParams, VALIDITY_THRESHOLD};
use kerr_dimer::fockspace::{FockBasis, Site};
use kerr_dimer::master::{solve_with_tail_cutoff, steady_state_krylov, suggested_cutoff, KrylovOptions, MasterRunResult};
use kerr_dimer::semiclassical::{count_states, find_all_steady_states, SearchGrid, SweepAxis};
use kerr_dimer::trajectory::{
    dn_autocorrelation_time, dn_spread_statistic, jump_histograms, mirror_symmetry_test, run_ensemble, Binning,
    EnsembleAverage, Histogram, TrajectoryConfig,
};
use kerr_dimer::SystemParams;
use rayon::prelude::*;

use crate::config::{Command, RunConfig, DEFAULT_MAX_CUTOFF};
use crate::error::{CliError, CliResult};
use crate::output::{CsvSink, Field};

/// Significance level of the Δn mirror test.
pub const MIRROR_ALPHA: f64 = 0.01;

/// What a run produced. Non-empty `failures` map to exit code 2.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

pub fn run(config: &RunConfig) -> CliResult<Report> {
    std::fs::create_dir_all(&config.output).map_err(|e| CliError::io(&config.output, e))?;
    let mut report = Report::default();
    match config.command {
        Command::SemiclassicalSweep => semiclassical_sweep(config, &mut report)?,
        Command::PhaseDiagram => phase_diagram(config, &mut report)?,
        Command::MasterSweep => master_sweep(config, &mut report)?,
        Command::Trajectories => trajectories(config, &mut report)?,
        Command::AnalyticSweep => analytic_sweep(config, &mut report)?,
        Command::Compare => compare(config, &mut report)?,
    }
    Ok(report)
}

fn manifest(config: &RunConfig, what: &str) -> Vec<String> {
    vec![
        format!("kerr-dimer {} {}: {what}", env!("CARGO_PKG_VERSION"), config.command.name()),
        format!("reproduce: {}", config.command_line()),
    ]
}

fn sink(config: &RunConfig, file: &str, what: &str, header: &[&str]) -> CliResult<CsvSink> {
    CsvSink::create(&config.output.join(file), &manifest(config, what), header)
}

fn axis_column(axis: SweepAxis) -> &'static str {
    axis.name()
}

/// Evaluates `f` over `points` in parallel, handing results to `emit` in
/// order, one thread-pool-sized batch at a time.
fn sweep<T, R, F, E>(points: &[T], f: F, mut emit: E) -> CliResult<()>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
    E: FnMut(&T, R) -> CliResult<()>,
{
    let batch = rayon::current_num_threads().max(1);
    for chunk in points.chunks(batch) {
        let results: Vec<R> = chunk.par_iter().map(&f).collect();
        for (p, r) in chunk.iter().zip(results) {
            emit(p, r)?;
        }
    }
    Ok(())
}

fn single_axis(config: &RunConfig) -> (SweepAxis, Vec<(f64, SystemParams)>) {
    let spec = config.axes[0];
    let points = spec
        .values()
        .into_iter()
        .map(|v| (v, spec.axis.apply(&config.params, v).expect("validated when parsing")))
        .collect();
    (spec.axis, points)
}

fn semiclassical_sweep(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let (axis, points) = single_axis(config);
    let name = axis_column(axis);
    let mut counts_out = sink(
        config,
        "semiclassical_counts.csv",
        "stable/symmetry-breaking/total mean-field state counts",
        &[name, "n_stable", "n_breaking", "n_total"],
    )?;
    let mut roots_out = sink(
        config,
        "semiclassical_roots.csv",
        "mean-field fixed points with stability eigenvalues",
        &[
            name, "n1", "n2", "theta1", "theta2", "delta_n", "delta_theta", "stability", "symmetry", "re_l1", "im_l1",
            "re_l2", "im_l2", "re_l3", "im_l3", "re_l4", "im_l4",
        ],
    )?;
    let grid = SearchGrid::default();
    sweep(
        &points,
        |(_, p)| (count_states(p, &grid), find_all_steady_states(p, &grid)),
        |(v, _), (counts, roots)| {
            match counts {
                Ok(c) => counts_out.row(&[(*v).into(), c.n_stable.into(), c.n_breaking.into(), c.n_total.into()])?,
                Err(e) => {
                    report.failures.push(format!("{name}={v}: {e}"));
                    counts_out.row(&[(*v).into(), Field::Missing, Field::Missing, Field::Missing])?;
                }
            }
            if let Ok(roots) = roots {
                for r in roots {
                    let s = &r.state;
                    let mut row = vec![
                        (*v).into(),
                        s.n1().into(),
                        s.n2().into(),
                        s.theta1().into(),
                        s.theta2().into(),
                        s.delta_n().into(),
                        s.delta_theta().into(),
                        r.stability.as_str().into(),
                        r.symmetry.as_str().into(),
                    ];
                    for l in r.eigenvalues {
                        row.push(l.re.into());
                        row.push(l.im.into());
                    }
                    roots_out.row(&row)?;
                }
            }
            counts_out.flush()?;
            roots_out.flush()
        },
    )?;
    report.files.push(counts_out.finish()?);
    report.files.push(roots_out.finish()?);
    Ok(())
}

fn phase_diagram(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let (a1, a2) = (config.axes[0], config.axes[1]);
    let mut out = sink(
        config,
        "phase_diagram.csv",
        "stable-state counts on the parameter grid",
        &[axis_column(a1.axis), axis_column(a2.axis), "n_stable", "n_breaking", "n_total"],
    )?;
    let points: Vec<(f64, f64)> = a1
        .values()
        .into_iter()
        .flat_map(|x| a2.values().into_iter().map(move |y| (x, y)))
        .collect();
    let grid = SearchGrid::default();
    sweep(
        &points,
        |&(x, y)| {
            a1.axis
                .apply(&config.params, x)
                .and_then(|p| a2.axis.apply(&p, y))
                .and_then(|p| count_states(&p, &grid))
        },
        |&(x, y), counts| {
            match counts {
                Ok(c) => out.row(&[x.into(), y.into(), c.n_stable.into(), c.n_breaking.into(), c.n_total.into()])?,
                Err(e) => {
                    report.failures.push(format!("({x}, {y}): {e}"));
                    out.row(&[x.into(), y.into(), Field::Missing, Field::Missing, Field::Missing])?;
                }
            }
            Ok(())
        },
    )?;
    report.files.push(out.finish()?);
    Ok(())
}

fn krylov_options(config: &RunConfig) -> KrylovOptions {
    KrylovOptions { tol: config.numerics.tol, ..KrylovOptions::default() }
}

fn master_point(config: &RunConfig, params: &SystemParams) -> kerr_dimer::Result<(usize, MasterRunResult)> {
    let opts = krylov_options(config);
    match config.numerics.n_max {
        Some(m) => {
            let basis = FockBasis::new(m)?;
            Ok((m, steady_state_krylov(params, &basis, None, &opts)?))
        }
        None => {
            let (basis, r) = solve_with_tail_cutoff(params, config.numerics.tail, DEFAULT_MAX_CUTOFF, &opts)?;
            Ok((basis.n_max(), r))
        }
    }
}

fn master_sweep(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let (axis, points) = single_axis(config);
    let name = axis_column(axis);
    let mut out = sink(
        config,
        "master_sweep.csv",
        "master-equation steady state, site-averaged observables",
        &[name, "n", "g2", "residual", "converged", "G2", "n1", "n2", "n_max", "cutoff_population"],
    )?;
    sweep(
        &points,
        |(_, p)| master_point(config, p),
        |(v, _), r| {
            match r {
                Ok((n_max, m)) => {
                    if !m.converged {
                        report.failures.push(format!("{name}={v}: steady state not converged (residual {:e})", m.residual));
                    }
                    if !m.cutoff_adequate() {
                        report.warnings.push(format!("{name}={v}: cutoff tail {:e}", m.cutoff_population));
                    }
                    out.row(&[
                        (*v).into(),
                        m.n().into(),
                        m.g2().into(),
                        m.residual.into(),
                        m.converged.into(),
                        m.big_g2().into(),
                        m.n1.into(),
                        m.n2.into(),
                        n_max.into(),
                        m.cutoff_population.into(),
                    ])?;
                }
                Err(e) => {
                    let e = CliError::from(e);
                    if e.exit_code() != 2 {
                        return Err(e);
                    }
                    report.failures.push(format!("{name}={v}: {e}"));
                    let mut row = vec![(*v).into()];
                    row.extend(std::iter::repeat(Field::Missing).take(9));
                    out.row(&row)?;
                }
            }
            out.flush()
        },
    )?;
    report.files.push(out.finish()?);
    Ok(())
}

fn write_histogram(config: &RunConfig, file: &str, what: &str, column: &str, h: &Histogram) -> CliResult<PathBuf> {
    let mut out = sink(config, file, what, &[column, "count"])?;
    for (c, &w) in h.centers().zip(&h.counts) {
        out.row(&[c.into(), w.into()])?;
    }
    out.finish()
}

fn trajectories(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let n = &config.numerics;
    let params = &config.params;
    let basis = FockBasis::new(n.n_max.unwrap_or_else(|| suggested_cutoff(params)))?;
    let tc = TrajectoryConfig {
        n_traj: n.n_traj,
        t_final: n.t_final,
        dt: n.dt,
        seed: n.seed,
        ..TrajectoryConfig::default()
    };
    let records = run_ensemble(params, &basis, &tc)?;

    let mut events = sink(
        config,
        "trajectory_events.csv",
        "quantum jumps: time, decaying site, occupations right after",
        &["stream", "t", "channel", "n1_post", "n2_post"],
    )?;
    let mut samples = sink(
        config,
        "trajectory_samples.csv",
        "sampled occupations",
        &["stream", "t", "n1", "n2"],
    )?;
    for r in &records {
        for e in &r.jumps {
            let channel = match e.channel {
                Site::One => 1usize,
                Site::Two => 2,
            };
            events.row(&[r.stream.into(), e.time.into(), channel.into(), e.n1_post.into(), e.n2_post.into()])?;
        }
        for s in &r.samples {
            samples.row(&[r.stream.into(), s.time.into(), s.n1.into(), s.n2.into()])?;
        }
    }
    report.files.push(events.finish()?);
    report.files.push(samples.finish()?);

    let binning = Binning { bin_width: n.bin_width, weighting: n.weighting };
    let mut spread = None;
    match jump_histograms(&records, &binning) {
        Ok((h_n1, h_dn)) => {
            report.files.push(write_histogram(config, "histogram_n1.csv", "post-jump n1 histogram", "n1", &h_n1)?);
            report.files.push(write_histogram(config, "histogram_dn.csv", "post-jump n1-n2 histogram", "dn", &h_dn)?);
            spread = dn_spread_statistic(&h_dn).ok();
        }
        Err(e) => report.warnings.push(format!("no histograms: {e}")),
    }
    let tau = dn_autocorrelation_time(&records).ok();
    let mirror = tau.and_then(|t| mirror_symmetry_test(&records, MIRROR_ALPHA, 2.0 * t).ok());
    if mirror.is_none() {
        report.warnings.push("mirror-symmetry test unavailable (too few post-transient jumps)".into());
    }
    let avg = EnsembleAverage::from_records(&records).ok();

    let mut summary = sink(
        config,
        "trajectory_summary.csv",
        "ensemble averages with standard errors and jump statistics",
        &[
            "n_traj", "n_max", "n", "n_err", "g2", "g2_err", "G2", "G2_err", "n1", "n2", "dn_spread", "tau_int",
            "mirror_statistic", "mirror_critical", "mirror_passed",
        ],
    )?;
    summary.row(&[
        records.len().into(),
        basis.n_max().into(),
        avg.map(|a| a.n).into(),
        avg.map(|a| a.n_err).into(),
        avg.map(|a| a.g2).into(),
        avg.map(|a| a.g2_err).into(),
        avg.map(|a| a.big_g2).into(),
        avg.map(|a| a.big_g2_err).into(),
        avg.map(|a| a.n1).into(),
        avg.map(|a| a.n2).into(),
        spread.into(),
        tau.into(),
        mirror.map(|m| m.statistic).into(),
        mirror.map(|m| m.critical).into(),
        mirror.map(|m| m.passed).into(),
    ])?;
    report.files.push(summary.finish()?);
    Ok(())
}

/// Series observables at one point; `F = 0` is the vacuum.
#[derive(Debug, Clone, Copy)]
struct SeriesPoint {
    n: f64,
    big_g2: f64,
    g2: f64,
    converged: bool,
    validity: f64,
}

fn series_point(config: &RunConfig, params: &SystemParams) -> kerr_dimer::Result<SeriesPoint> {
    let validity = validity_metric(params)?;
    if params.f().norm() == 0.0 {
        return Ok(SeriesPoint { n: 0.0, big_g2: 0.0, g2: f64::NAN, converged: true, validity });
    }
    let cap = config.numerics.index_cap;
    let r = correlators(&PSeriesParams::from_system(params, cap)?, cap)?;
    Ok(SeriesPoint { n: r.n, big_g2: r.big_g2, g2: r.g2_norm, converged: r.converged, validity })
}

fn note_validity(report: &mut Report, name: &str, v: f64, s: &SeriesPoint) {
    if !s.converged {
        report.failures.push(format!("{name}={v}: series not converged at the index cap"));
    }
    if s.validity > VALIDITY_THRESHOLD {
        report.warnings.push(format!(
            "{name}={v}: J/|U| = {:.3} exceeds {VALIDITY_THRESHOLD}; the series is outside its validity regime",
            s.validity
        ));
    }
}

fn analytic_sweep(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let (axis, points) = single_axis(config);
    let name = axis_column(axis);
    let mut out = sink(
        config,
        "analytic_sweep.csv",
        "complex-P series on-site correlators",
        &[name, "n_analytic", "G2_analytic", "g2_analytic", "converged", "validity_metric"],
    )?;
    sweep(
        &points,
        |(_, p)| series_point(config, p),
        |(v, _), s| {
            let s = s?;
            note_validity(report, name, *v, &s);
            out.row(&[(*v).into(), s.n.into(), s.big_g2.into(), s.g2.into(), s.converged.into(), s.validity.into()])?;
            out.flush()
        },
    )?;
    report.files.push(out.finish()?);
    Ok(())
}

fn relative(a: f64, reference: f64) -> f64 {
    (a - reference) / reference
}

fn compare(config: &RunConfig, report: &mut Report) -> CliResult<()> {
    let (axis, points) = single_axis(config);
    let name = axis_column(axis);
    let mut header = vec![
        name, "n_master", "n_analytic", "n_rel_diff", "G2_master", "G2_analytic", "G2_rel_diff", "g2_master",
        "g2_analytic", "g2_rel_diff", "master_converged", "analytic_converged", "validity_metric",
    ];
    if config.semiclassical {
        header.extend(["n_stable", "n_semiclassical_min", "n_semiclassical_max"]);
    }
    let mut out = sink(config, "compare.csv", "master equation vs complex-P series", &header)?;
    let grid = SearchGrid::default();
    sweep(
        &points,
        |(_, p)| {
            let sc = config.semiclassical.then(|| find_all_steady_states(p, &grid));
            (master_point(config, p), series_point(config, p), sc)
        },
        |(v, _), (m, s, sc)| {
            let (_, m) = m.map_err(CliError::from)?;
            let s = s?;
            if !m.converged {
                report.failures.push(format!("{name}={v}: steady state not converged"));
            }
            note_validity(report, name, *v, &s);
            let mut row = vec![
                (*v).into(),
                m.n().into(),
                s.n.into(),
                relative(s.n, m.n()).into(),
                m.big_g2().into(),
                s.big_g2.into(),
                relative(s.big_g2, m.big_g2()).into(),
                m.g2().into(),
                s.g2.into(),
                relative(s.g2, m.g2()).into(),
                m.converged.into(),
                s.converged.into(),
                s.validity.into(),
            ];
            if let Some(sc) = sc {
                match sc {
                    Ok(roots) => {
                        let stable: Vec<f64> = roots
                            .iter()
                            .filter(|r| r.is_stable())
                            .map(|r| 0.5 * (r.state.n1() + r.state.n2()))
                            .collect();
                        let min = stable.iter().copied().fold(f64::INFINITY, f64::min);
                        let max = stable.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        row.push(stable.len().into());
                        row.push((!stable.is_empty()).then_some(min).into());
                        row.push((!stable.is_empty()).then_some(max).into());
                    }
                    Err(e) => {
                        report.failures.push(format!("{name}={v}: {e}"));
                        row.extend([Field::Missing, Field::Missing, Field::Missing]);
                    }
                }
            }
            out.row(&row)?;
            out.flush()
        },
    )?;
    report.files.push(out.finish()?);
    Ok(())
}
