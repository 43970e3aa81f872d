//! Command-line and config-file parsing into a validated [`RunConfig`].

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kerr_dimer::semiclassical::SweepAxis;
use kerr_dimer::trajectory::Weighting;
use kerr_dimer::SystemParams;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "KERR_DIMER_OUTPUT_DIR";

pub const DEFAULT_J: f64 = 0.1;
pub const DEFAULT_U: f64 = 0.6;
pub const DEFAULT_F: f64 = 2.6;
pub const DEFAULT_DW: f64 = -3.0;
pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_TRAJECTORY_DT: f64 = 0.02;
pub const DEFAULT_TAIL: f64 = 1e-6;
pub const DEFAULT_MAX_CUTOFF: usize = 60;

#[derive(Debug, Parser)]
#[command(
    name = "kerr-dimer",
    version,
    about = "Steady states, trajectories and phase diagrams of two coupled driven Kerr cavities",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Debug, Subcommand)]
enum CommandArgs {
    /// Mean-field roots, stability and state counts along one axis
    SemiclassicalSweep(Options),
    /// Stable-state counts on a two-axis grid
    PhaseDiagram(Options),
    /// Master-equation steady states (n, g2) along one axis
    MasterSweep(Options),
    /// Quantum-trajectory ensemble at one parameter point: events, histograms, averages
    Trajectories(Options),
    /// Complex-P series correlators along one axis
    AnalyticSweep(Options),
    /// Master equation vs complex-P series (optionally mean field) on one axis
    Compare(Options),
}

/// Parameters accept a value or a sweep range `min:max:steps`; rates are in
/// the same units as gamma.
#[derive(Debug, Args, Default, Clone)]
struct Options {
    /// TOML file supplying defaults for any flag below (same key names,
    /// underscores for dashes); flags take precedence, unknown keys are errors
    #[arg(long)]
    config: Option<PathBuf>,
    /// Tunnelling J [default: 0.1]
    #[arg(long, allow_hyphen_values = true)]
    j: Option<String>,
    /// Kerr nonlinearity U [default: 0.6]
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// Drive amplitude F, real [default: 2.6]
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// Detuning Δω [default: -3]
    #[arg(long, allow_hyphen_values = true)]
    dw: Option<String>,
    /// Loss rate gamma, fixed [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Output directory [default: $KERR_DIMER_OUTPUT_DIR]
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    threads: Option<usize>,
    /// Trajectory time step [default: 0.02]
    #[arg(long)]
    dt: Option<f64>,
    /// Master-equation solver tolerance [default: 1e-11]
    #[arg(long)]
    tol: Option<f64>,
    /// Fock cutoff per site [default: from the occupation tail; mean-field estimate for trajectories]
    #[arg(long)]
    n_max: Option<usize>,
    /// Cutoff tail population limit when n_max is automatic [default: 1e-6]
    #[arg(long)]
    tail: Option<f64>,
    /// Per-index truncation of the series [default: 30]
    #[arg(long)]
    index_cap: Option<usize>,
    /// Number of trajectories [default: 200]
    #[arg(long)]
    n_traj: Option<usize>,
    /// Master seed for the trajectory ensemble [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory length [default: 2000]
    #[arg(long)]
    t_final: Option<f64>,
    /// Histogram bin width [default: 0.25]
    #[arg(long)]
    bin_width: Option<f64>,
    /// Histogram weighting, per-jump or dwell-time [default: per-jump]
    #[arg(long)]
    weighting: Option<String>,
    /// Add mean-field columns to `compare`
    #[arg(long)]
    semiclassical: bool,
}

/// Scalar that may be written as a TOML number or string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Float(v) => write!(f, "{v}"),
            Scalar::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    j: Option<Scalar>,
    u: Option<Scalar>,
    f: Option<Scalar>,
    dw: Option<Scalar>,
    gamma: Option<Scalar>,
    output: Option<PathBuf>,
    threads: Option<usize>,
    dt: Option<f64>,
    tol: Option<f64>,
    n_max: Option<usize>,
    tail: Option<f64>,
    index_cap: Option<usize>,
    n_traj: Option<usize>,
    seed: Option<u64>,
    t_final: Option<f64>,
    bin_width: Option<f64>,
    weighting: Option<String>,
    semiclassical: Option<bool>,
}

fn load_file(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SemiclassicalSweep,
    PhaseDiagram,
    MasterSweep,
    Trajectories,
    AnalyticSweep,
    Compare,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SemiclassicalSweep => "semiclassical-sweep",
            Command::PhaseDiagram => "phase-diagram",
            Command::MasterSweep => "master-sweep",
            Command::Trajectories => "trajectories",
            Command::AnalyticSweep => "analytic-sweep",
            Command::Compare => "compare",
        }
    }

    fn axis_count(&self) -> usize {
        match self {
            Command::PhaseDiagram => 2,
            Command::Trajectories => 0,
            _ => 1,
        }
    }
}

/// Evenly spaced values `min..=max` (`steps` points).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn parse(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts[..] else {
            return Err(CliError::Usage(format!("range `{s}` is not of the form min:max:steps")));
        };
        let min = parse_f64(min, "range minimum")?;
        let max = parse_f64(max, "range maximum")?;
        let steps: usize = steps
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("range steps `{steps}` is not a positive integer")))?;
        if steps == 0 {
            return Err(CliError::Usage("range steps must be ≥ 1".into()));
        }
        if steps == 1 && min != max {
            return Err(CliError::Usage(format!("range `{s}` has one step but min ≠ max")));
        }
        Ok(Self { min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.max } else { self.min + h * k as f64 })
            .collect()
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.steps)
    }
}

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{what} `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("{what} must be finite")));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub range: Range,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        self.range.values()
    }
}

/// Numerical controls shared by the commands (each uses the subset it needs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub dt: f64,
    pub tol: f64,
    pub n_max: Option<usize>,
    pub tail: f64,
    pub index_cap: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub t_final: f64,
    pub bin_width: f64,
    pub weighting: Weighting,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            dt: DEFAULT_TRAJECTORY_DT,
            tol: DEFAULT_TOL,
            n_max: None,
            tail: DEFAULT_TAIL,
            index_cap: kerr_dimer::analytic::DEFAULT_INDEX_CAP,
            n_traj: 200,
            seed: 0,
            t_final: 2000.0,
            bin_width: 0.25,
            weighting: Weighting::PerJump,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Fixed parameters; swept ones hold the first value of their range.
    pub params: SystemParams,
    pub axes: Vec<SweepSpec>,
    pub numerics: Numerics,
    pub output: PathBuf,
    pub threads: Option<usize>,
    pub semiclassical: bool,
}

enum ParamValue {
    Fixed(f64),
    Sweep(Range),
}

fn parse_param(s: &str, name: &str) -> CliResult<ParamValue> {
    if s.contains(':') {
        Ok(ParamValue::Sweep(Range::parse(s)?))
    } else {
        Ok(ParamValue::Fixed(parse_f64(s, name)?))
    }
}

fn weighting_from(s: &str) -> CliResult<Weighting> {
    match s {
        "per-jump" | "per_jump" => Ok(Weighting::PerJump),
        "dwell-time" | "dwell_time" => Ok(Weighting::DwellTime),
        _ => Err(CliError::Usage(format!("unknown weighting `{s}` (per-jump, dwell-time)"))),
    }
}

fn weighting_name(w: Weighting) -> &'static str {
    match w {
        Weighting::PerJump => "per-jump",
        Weighting::DwellTime => "dwell-time",
    }
}

/// Parses `argv` (including the program name) into a validated configuration.
///
/// Precedence: flags, then the `--config` file, then built-in defaults; the
/// output directory additionally falls back to `$KERR_DIMER_OUTPUT_DIR`.
pub fn parse_config<I, T>(argv: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, opts) = match cli.command {
        CommandArgs::SemiclassicalSweep(o) => (Command::SemiclassicalSweep, o),
        CommandArgs::PhaseDiagram(o) => (Command::PhaseDiagram, o),
        CommandArgs::MasterSweep(o) => (Command::MasterSweep, o),
        CommandArgs::Trajectories(o) => (Command::Trajectories, o),
        CommandArgs::AnalyticSweep(o) => (Command::AnalyticSweep, o),
        CommandArgs::Compare(o) => (Command::Compare, o),
    };
    let file = match &opts.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    build(command, opts, file)
}

fn build(command: Command, opts: Options, file: FileConfig) -> CliResult<RunConfig> {
    let text = |flag: Option<String>, from_file: Option<Scalar>| flag.or(from_file.map(|s| s.to_string()));

    let mut fixed = [DEFAULT_J, DEFAULT_U, DEFAULT_F, DEFAULT_DW];
    let mut axes = Vec::new();
    let entries = [
        (SweepAxis::J, text(opts.j, file.j)),
        (SweepAxis::U, text(opts.u, file.u)),
        (SweepAxis::F, text(opts.f, file.f)),
        (SweepAxis::DeltaOmega, text(opts.dw, file.dw)),
    ];
    for (slot, (axis, value)) in entries.into_iter().enumerate() {
        let Some(value) = value else { continue };
        match parse_param(&value, axis.name())? {
            ParamValue::Fixed(v) => fixed[slot] = v,
            ParamValue::Sweep(range) => {
                fixed[slot] = range.min;
                axes.push(SweepSpec { axis, range });
            }
        }
    }
    let gamma = match text(opts.gamma, file.gamma) {
        None => DEFAULT_GAMMA,
        Some(v) => match parse_param(&v, "gamma")? {
            ParamValue::Fixed(g) => g,
            ParamValue::Sweep(_) => return Err(CliError::Usage("gamma cannot be swept".into())),
        },
    };
    let [j, u, f, dw] = fixed;
    let params = SystemParams::new(j, u, f, dw, gamma)?;

    if axes.len() != command.axis_count() {
        return Err(CliError::Usage(format!(
            "conflicting axes: {} takes {} sweep axis/axes (min:max:steps), got {}",
            command.name(),
            command.axis_count(),
            axes.len()
        )));
    }
    // every grid point must be a valid parameter set
    for spec in &axes {
        for v in spec.values() {
            spec.axis.apply(&params, v)?;
        }
    }
    if matches!(command, Command::AnalyticSweep | Command::Compare) {
        let f_values = match axes.iter().find(|a| a.axis == SweepAxis::F) {
            Some(a) => a.values(),
            None => vec![f],
        };
        if f_values.iter().any(|&v| v < 0.0) {
            return Err(CliError::Usage("the series needs F ≥ 0".into()));
        }
        let u_values = match axes.iter().find(|a| a.axis == SweepAxis::U) {
            Some(a) => a.values(),
            None => vec![u],
        };
        if u_values.iter().any(|&v| v <= 0.0) {
            return Err(CliError::Usage("the series needs U > 0".into()));
        }
    }

    let d = Numerics::default();
    let numerics = Numerics {
        dt: opts.dt.or(file.dt).unwrap_or(d.dt),
        tol: opts.tol.or(file.tol).unwrap_or(d.tol),
        n_max: opts.n_max.or(file.n_max),
        tail: opts.tail.or(file.tail).unwrap_or(d.tail),
        index_cap: opts.index_cap.or(file.index_cap).unwrap_or(d.index_cap),
        n_traj: opts.n_traj.or(file.n_traj).unwrap_or(d.n_traj),
        seed: opts.seed.or(file.seed).unwrap_or(d.seed),
        t_final: opts.t_final.or(file.t_final).unwrap_or(d.t_final),
        bin_width: opts.bin_width.or(file.bin_width).unwrap_or(d.bin_width),
        weighting: match opts.weighting.or(file.weighting) {
            Some(w) => weighting_from(&w)?,
            None => d.weighting,
        },
    };
    for (name, v) in [
        ("dt", numerics.dt),
        ("tol", numerics.tol),
        ("tail", numerics.tail),
        ("t_final", numerics.t_final),
        ("bin_width", numerics.bin_width),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
        }
    }
    if numerics.index_cap == 0 || numerics.n_traj == 0 || numerics.n_max == Some(0) {
        return Err(CliError::Usage("index_cap, n_traj and n_max must be ≥ 1".into()));
    }
    let threads = opts.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Usage("threads must be ≥ 1".into()));
    }

    let output = opts
        .output
        .or(file.output)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .ok_or_else(|| CliError::Usage(format!("missing output path: pass --output or set {OUTPUT_DIR_ENV}")))?;

    Ok(RunConfig {
        command,
        params,
        axes,
        numerics,
        output,
        threads,
        semiclassical: opts.semiclassical || file.semiclassical.unwrap_or(false),
    })
}

impl RunConfig {
    /// A command line that reproduces this run (output directory excluded).
    pub fn command_line(&self) -> String {
        let p = &self.params;
        let value = |axis: SweepAxis, fixed: f64| match self.axes.iter().find(|a| a.axis == axis) {
            Some(a) => a.range.to_string(),
            None => fixed.to_string(),
        };
        let n = &self.numerics;
        let mut s = format!(
            "kerr-dimer {} --j {} --u {} --f {} --dw {} --gamma {}",
            self.command.name(),
            value(SweepAxis::J, p.j()),
            value(SweepAxis::U, p.u()),
            value(SweepAxis::F, p.f().re),
            value(SweepAxis::DeltaOmega, p.delta_omega()),
            p.gamma(),
        );
        let extra = match self.command {
            Command::SemiclassicalSweep | Command::PhaseDiagram => String::new(),
            Command::MasterSweep => format!(" --tol {:e}{}", n.tol, self.cutoff_flags()),
            Command::AnalyticSweep => format!(" --index-cap {}", n.index_cap),
            Command::Compare => format!(
                " --tol {:e}{} --index-cap {}{}",
                n.tol,
                self.cutoff_flags(),
                n.index_cap,
                if self.semiclassical { " --semiclassical" } else { "" }
            ),
            Command::Trajectories => format!(
                " --n-traj {} --t-final {} --dt {} --seed {} --bin-width {} --weighting {}{}",
                n.n_traj,
                n.t_final,
                n.dt,
                n.seed,
                n.bin_width,
                weighting_name(n.weighting),
                match n.n_max {
                    Some(m) => format!(" --n-max {m}"),
                    None => String::new(),
                }
            ),
        };
        s.push_str(&extra);
        s
    }

    fn cutoff_flags(&self) -> String {
        match self.numerics.n_max {
            Some(m) => format!(" --n-max {m}"),
            None => format!(" --tail {:e}", self.numerics.tail),
        }
    }
}
