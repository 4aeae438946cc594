//! Command-line front end of the `cattaneo-sim` binary.
//!
//! Option values resolve in the order flag, `--config` file entry, built-in default.
//! Exit codes: 0 success, 2 usage or domain error, 3 numerical failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::closed_forms::{
    omega0_eval, omega0_solve_c1, omega_half_eval, omega_half_profile, Omega0Family, OmegaHalfFamily,
};
use crate::error::{Error, Result};
use crate::exponents::{derive_exponents, singular_geometry};
use crate::fields::{linspace, omega_half_field_grid, reconstruct_fields};
use crate::io;
use crate::materials::{list_material_presets, lookup_preset};
use crate::phase_plane::{integrate_trajectory, FlowDirection, PhasePoint, Termination, TrajectoryControls};
use crate::profile::{build_profile, Profile};
use crate::scan::{bracket_critical, sweep, ClassificationKind, LaunchPolicy, ScanControls};
use crate::verification::pde_residual;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numerical(_) | Error::AllExcluded => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "cattaneo-sim", version, about = "Self-similar solutions of nonlinear Cattaneo heat conduction")]
pub struct Cli {
    /// key = value file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved settings to stderr before running.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ToleranceArgs {
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub front_tol: Option<f64>,
    #[arg(long, global = true)]
    pub critical_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Inward,
    Outward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClosedFormCase {
    Omega0,
    OmegaHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Launch {
    Auto,
    Center,
    Critical,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Similarity exponents and singular-point geometry as JSON.
    Exponents {
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(long)]
        preset: Option<String>,
    },
    /// Material presets as JSON.
    Presets,
    /// Shape profile `eta,f,g`.
    Profile {
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        f_center: Option<f64>,
        /// Use the explicit ω = −1/2 profile.
        #[arg(long)]
        closed_form: bool,
        /// `min:max:count` grid for the closed-form profile.
        #[arg(long)]
        eta: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Phase-plane trajectory `x,y`.
    Trajectory {
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(long)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, value_enum, default_value = "inward")]
        direction: Direction,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Temperature and flux on an (r, t) grid, `r,t,T,q`.
    Fields {
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        f_center: Option<f64>,
        #[arg(long)]
        closed_form: bool,
        /// `min:max:count`
        #[arg(long)]
        r: Option<String>,
        /// `min:max:count`
        #[arg(long)]
        t: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write `<output>.gp`, a gnuplot script of the T surface.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Finite-difference residuals of a fields CSV, as JSON.
    Residual {
        #[arg(short, long)]
        input: PathBuf,
        /// Required when the input has no sidecar.
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify ω over `steps + 1` equally spaced values.
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        f_center: Option<f64>,
        #[arg(long, value_enum)]
        launch: Option<Launch>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bisection for the exponent separating shock and continuous families, as JSON.
    Bracket {
        #[arg(long, allow_hyphen_values = true)]
        lower: f64,
        #[arg(long, allow_hyphen_values = true)]
        upper: f64,
        #[arg(long, default_value_t = 20)]
        iterations: usize,
        #[arg(long, value_enum)]
        launch: Option<Launch>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the analytic solution families.
    ClosedForm {
        #[arg(long, value_enum)]
        case: ClosedFormCase,
        /// `x,y` point selecting the ω = 0 member.
        #[arg(long, allow_hyphen_values = true)]
        through: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        /// Single abscissa.
        #[arg(long)]
        eval: Option<f64>,
        /// `min:max:count` abscissae (`x,y` table).
        #[arg(long)]
        x: Option<String>,
        /// `min:max:count` radii for the ω = −1/2 profile (`eta,f` table).
        #[arg(long)]
        eta: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Entries of a `key = value` file. `#` starts a comment; keys use `_` or `-`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

const CONFIG_KEYS: &[&str] = &[
    "omega",
    "f_center",
    "rel_tol",
    "abs_tol",
    "front_tol",
    "critical_tol",
    "max_steps",
    "r",
    "t",
    "eta",
    "launch",
    "default_f_center",
    "critical_offset",
    "format",
];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", n + 1)))?;
            let key = k.trim().replace('-', "_");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse(format!("config line {}: unknown key {key:?}", n + 1)));
            }
            let value = v.trim().trim_matches('"').to_string();
            entries.insert(key, value);
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get_str(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Parse(format!("config value {key} = {v:?} is invalid"))))
            .transpose()
    }
}

/// `min:max:count`, inclusive of both ends.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(Error::Parse(format!("range {text:?} is not min:max:count")));
    };
    let lo = io::parse_f64(lo)?;
    let hi = io::parse_f64(hi)?;
    let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("range count in {text:?} is invalid")))?;
    if n == 0 || !(hi >= lo) || (n > 1 && hi == lo) {
        return Err(Error::Parse(format!("range {text:?} needs min < max and count ≥ 1")));
    }
    Ok(linspace(lo, hi, n))
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("{text:?} is not x,y")))?;
    Ok((io::parse_f64(a)?, io::parse_f64(b)?))
}

struct Context {
    config: ConfigFile,
    tolerances: ToleranceArgs,
    verbose: bool,
}

impl Context {
    fn value<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.config.get(key),
        }
    }

    fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.config.get_str(key).map(str::to_string))
    }

    fn omega(&self, flag: Option<f64>, preset: Option<&str>) -> Result<f64> {
        if let Some(name) = preset {
            let p = lookup_preset(name).ok_or_else(|| Error::Parse(format!("unknown preset {name:?}")))?;
            if flag.is_some() {
                return Err(Error::Parse("give either --omega or --preset".into()));
            }
            return Ok(p.omega.representative());
        }
        self.value(flag, "omega")?
            .ok_or_else(|| Error::Parse("--omega is required".into()))
    }

    fn trajectory_controls(&self) -> Result<TrajectoryControls> {
        let d = TrajectoryControls::default();
        let t = &self.tolerances;
        let c = TrajectoryControls {
            rel_tol: self.value(t.rel_tol, "rel_tol")?.unwrap_or(d.rel_tol),
            abs_tol: self.value(t.abs_tol, "abs_tol")?.unwrap_or(d.abs_tol),
            front_tol: self.value(t.front_tol, "front_tol")?,
            critical_tol: self.value(t.critical_tol, "critical_tol")?,
            max_steps: self.value(t.max_steps, "max_steps")?.unwrap_or(d.max_steps),
            ..d
        };
        c.validate()?;
        Ok(c)
    }

    fn scan_controls(&self, launch: Option<Launch>) -> Result<ScanControls> {
        let d = ScanControls::default();
        let launch = match launch {
            Some(Launch::Auto) => Some(LaunchPolicy::Auto),
            Some(Launch::Center) => Some(LaunchPolicy::Center),
            Some(Launch::Critical) => Some(LaunchPolicy::Critical),
            None => self.config.get("launch")?,
        };
        let c = ScanControls {
            trajectory: self.trajectory_controls()?,
            default_f_center: self.config.get("default_f_center")?.unwrap_or(d.default_f_center),
            critical_offset: self.config.get("critical_offset")?.unwrap_or(d.critical_offset),
            launch: launch.unwrap_or(d.launch),
        };
        c.validate()?;
        Ok(c)
    }

    fn header(&self, lines: &[(&str, String)]) {
        if !self.verbose {
            return;
        }
        let mut err = std::io::stderr().lock();
        for (k, v) in lines {
            let _ = writeln!(err, "# {k} = {v}");
        }
    }

    fn header_controls(&self, c: &TrajectoryControls, omega: Option<f64>) {
        let mut lines = vec![
            ("rel_tol", c.rel_tol.to_string()),
            ("abs_tol", c.abs_tol.to_string()),
            ("max_steps", c.max_steps.to_string()),
            ("x_min", c.x_min.to_string()),
            ("y_max", c.y_max.to_string()),
        ];
        if let Some(w) = omega {
            if let Ok(g) = singular_geometry(w) {
                lines.push(("front_tol", c.front_tolerance(&g).to_string()));
                lines.push(("critical_tol", c.critical_tolerance(&g).to_string()));
            }
        }
        self.header(&lines);
    }
}

fn emit(output: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = std::io::stdout().lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let text = io::to_json_string(value)?;
    emit(output, |w| Ok(w.write_all(text.as_bytes())?))
}

fn cmd_exponents(ctx: &Context, omega: Option<f64>, preset: Option<String>) -> Result<i32> {
    let omega = ctx.omega(omega, preset.as_deref())?;
    let e = derive_exponents(omega)?;
    let g = singular_geometry(omega)?;
    let value = serde_json::json!({
        "alpha": e.alpha,
        "beta": e.beta,
        "delta": e.delta,
        "epsilon": e.epsilon,
        "x_star": g.x_star,
        "y_c": g.y_c,
    });
    println!("{}", io::integral_floats_as_integers(value));
    Ok(EXIT_OK)
}

fn profile_from_args(ctx: &Context, omega: f64, f_center: Option<f64>, closed_form: bool, eta: Option<String>) -> Result<Profile> {
    if closed_form {
        if omega != -0.5 {
            return Err(Error::Domain(format!("a closed-form profile exists only for omega = -0.5, got {omega}")));
        }
        let grid = parse_range(&ctx.string(eta, "eta").unwrap_or_else(|| "0:10:201".into()))?;
        ctx.header(&[("omega", omega.to_string()), ("profile", "9/(eta^(3/2)+1)^2".into())]);
        return Profile::omega_half_closed_form(&grid);
    }
    let f_center = ctx
        .value(f_center, "f_center")?
        .ok_or_else(|| Error::Parse("--f-center is required without --closed-form".into()))?;
    let controls = ctx.trajectory_controls()?;
    ctx.header(&[("omega", omega.to_string()), ("f_center", f_center.to_string())]);
    ctx.header_controls(&controls, Some(omega));
    build_profile(omega, f_center, &controls)
}

fn cmd_profile(
    ctx: &Context,
    omega: Option<f64>,
    preset: Option<String>,
    f_center: Option<f64>,
    closed_form: bool,
    eta: Option<String>,
    output: Option<PathBuf>,
) -> Result<i32> {
    let omega = ctx.omega(omega, preset.as_deref())?;
    let profile = profile_from_args(ctx, omega, f_center, closed_form, eta)?;
    match output {
        Some(path) => io::save_profile(&path, &profile)?,
        None => emit(None, |w| io::write_profile_csv(w, &profile))?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TrajectoryMeta {
    omega: f64,
    direction: FlowDirection,
    termination: Termination,
    end: PhasePoint,
    locus_contact: Option<PhasePoint>,
    turning_point: Option<PhasePoint>,
    steps: usize,
    clamped: bool,
}

fn cmd_trajectory(
    ctx: &Context,
    omega: Option<f64>,
    x0: f64,
    y0: f64,
    direction: Direction,
    output: Option<PathBuf>,
) -> Result<i32> {
    let omega = ctx.omega(omega, None)?;
    let direction = match direction {
        Direction::Inward => FlowDirection::Inward,
        Direction::Outward => FlowDirection::Outward,
    };
    let controls = TrajectoryControls { direction, ..ctx.trajectory_controls()? };
    ctx.header_controls(&controls, Some(omega));
    let traj = integrate_trajectory(omega, PhasePoint::new(x0, y0), &controls)?;
    let rows = traj.points.iter().map(|p| vec![p.x, p.y]);
    emit(output.as_deref(), |w| io::write_table(w, &["x", "y"], rows))?;
    if let Some(path) = &output {
        io::write_json(
            &io::sidecar_path(path),
            &TrajectoryMeta {
                omega,
                direction,
                termination: traj.termination,
                end: traj.end(),
                locus_contact: traj.locus_contact,
                turning_point: traj.turning_point.map(|(p, _)| p),
                steps: traj.steps,
                clamped: traj.clamped,
            },
        )?;
    }
    Ok(if traj.termination == Termination::StepLimit { EXIT_NUMERICAL } else { EXIT_OK })
}

#[allow(clippy::too_many_arguments)]
fn cmd_fields(
    ctx: &Context,
    omega: Option<f64>,
    preset: Option<String>,
    f_center: Option<f64>,
    closed_form: bool,
    r: Option<String>,
    t: Option<String>,
    output: Option<PathBuf>,
    gnuplot: bool,
) -> Result<i32> {
    let omega = ctx.omega(omega, preset.as_deref())?;
    let r = parse_range(&ctx.string(r, "r").ok_or_else(|| Error::Parse("--r is required".into()))?)?;
    let t = parse_range(&ctx.string(t, "t").ok_or_else(|| Error::Parse("--t is required".into()))?)?;
    let grid = if closed_form {
        if omega != -0.5 {
            return Err(Error::Domain(format!("closed-form fields exist only for omega = -0.5, got {omega}")));
        }
        ctx.header(&[("omega", omega.to_string()), ("fields", "9t/(r^(3/2)+t^(3/2))^2".into())]);
        omega_half_field_grid(&r, &t)?
    } else {
        let profile = profile_from_args(ctx, omega, f_center, false, None)?;
        reconstruct_fields(&profile, &r, &t)?
    };
    match &output {
        Some(path) => {
            io::save_fields(path, &grid)?;
            if gnuplot {
                let mut script = path.as_os_str().to_owned();
                script.push(".gp");
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let title = format!("T(r, t), omega = {omega}");
                std::fs::write(&script, io::gnuplot_surface_script(&name, r.len(), &title))?;
            }
        }
        None => {
            if gnuplot {
                return Err(Error::Parse("--gnuplot needs -o".into()));
            }
            emit(None, |w| io::write_fields_csv(w, &grid))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_residual(ctx: &Context, input: PathBuf, omega: Option<f64>, output: Option<PathBuf>) -> Result<i32> {
    let grid = io::load_fields(&input, ctx.value(omega, "omega")?)?;
    ctx.header(&[("input", input.display().to_string()), ("omega", grid.omega().to_string())]);
    let report = pde_residual(&grid, &grid.exponents)?;
    emit_json(output.as_deref(), &report)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    ctx: &Context,
    from: f64,
    to: f64,
    steps: usize,
    f_center: Option<f64>,
    launch: Option<Launch>,
    format: Option<Format>,
    output: Option<PathBuf>,
) -> Result<i32> {
    if !(to > from) || steps == 0 {
        return Err(Error::Parse("scan needs --from < --to and --steps ≥ 1".into()));
    }
    let controls = ctx.scan_controls(launch)?;
    let f_center = ctx.value(f_center, "f_center")?;
    let format = match format {
        Some(f) => f,
        None => match ctx.config.get_str("format") {
            Some("json") => Format::Json,
            Some("csv") | None => Format::Csv,
            Some(other) => return Err(Error::Parse(format!("unknown format {other:?}"))),
        },
    };
    ctx.header(&[
        ("launch", format!("{:?}", controls.launch)),
        ("default_f_center", controls.default_f_center.to_string()),
        ("f_center", f_center.map_or("max(2 x_star, default_f_center)".into(), |f| f.to_string())),
        ("critical_offset", controls.critical_offset.to_string()),
    ]);
    ctx.header_controls(&controls.trajectory, None);
    let omegas = linspace(from, to, steps + 1);
    let entries = sweep(&omegas, f_center, &controls);
    match format {
        Format::Csv => emit(output.as_deref(), |w| io::write_sweep_csv(w, &entries))?,
        Format::Json => emit_json(output.as_deref(), &entries)?,
    }
    let failed = entries
        .iter()
        .any(|e| e.result.is_none() || e.kind() == Some(ClassificationKind::Indeterminate));
    Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
}

fn cmd_bracket(
    ctx: &Context,
    lower: f64,
    upper: f64,
    iterations: usize,
    launch: Option<Launch>,
    output: Option<PathBuf>,
) -> Result<i32> {
    let controls = ctx.scan_controls(launch)?;
    ctx.header(&[
        ("launch", format!("{:?}", controls.launch)),
        ("default_f_center", controls.default_f_center.to_string()),
        ("critical_offset", controls.critical_offset.to_string()),
    ]);
    ctx.header_controls(&controls.trajectory, None);
    let bracket = bracket_critical(lower, upper, iterations, &controls)?;
    emit_json(output.as_deref(), &bracket)?;
    Ok(if bracket.stalled { EXIT_NUMERICAL } else { EXIT_OK })
}

#[allow(clippy::too_many_arguments)]
fn cmd_closed_form(
    ctx: &Context,
    case: ClosedFormCase,
    through: Option<String>,
    c1: Option<f64>,
    c2: Option<f64>,
    eval: Option<f64>,
    x: Option<String>,
    eta: Option<String>,
    output: Option<PathBuf>,
) -> Result<i32> {
    let xs = match (eval, x) {
        (Some(v), None) => Some(vec![v]),
        (None, Some(text)) => Some(parse_range(&text)?),
        (None, None) => None,
        (Some(_), Some(_)) => return Err(Error::Parse("give either --eval or --x".into())),
    };
    match case {
        ClosedFormCase::Omega0 => {
            let family = match (through, c1) {
                (Some(p), None) => {
                    let (x0, y0) = parse_pair(&p)?;
                    omega0_solve_c1(x0, y0)?
                }
                (None, Some(c1)) => Omega0Family { c1 },
                _ => return Err(Error::Parse("omega0 needs exactly one of --through or --c1".into())),
            };
            ctx.header(&[("case", "omega0".into()), ("c1", io::format_f64(family.c1))]);
            let xs = xs.ok_or_else(|| Error::Parse("give --eval or --x".into()))?;
            let rows = xs.iter().map(|&x| Ok(vec![x, omega0_eval(family, x)?])).collect::<Result<Vec<_>>>()?;
            emit(output.as_deref(), |w| io::write_table(w, &["x", "y"], rows))?;
        }
        ClosedFormCase::OmegaHalf => {
            if let Some(text) = eta {
                if xs.is_some() {
                    return Err(Error::Parse("give either --eta or --eval/--x".into()));
                }
                let grid = parse_range(&text)?;
                if grid.iter().any(|e| *e < 0.0) {
                    return Err(Error::Domain("eta must be nonnegative".into()));
                }
                let rows = grid.iter().map(|&e| vec![e, omega_half_profile(e)]);
                emit(output.as_deref(), |w| io::write_table(w, &["eta", "f"], rows))?;
            } else {
                let family = OmegaHalfFamily::new(c2.unwrap_or(1.0))?;
                ctx.header(&[("case", "omega-half".into()), ("c2", io::format_f64(family.c2))]);
                let xs = xs.ok_or_else(|| Error::Parse("give --eval, --x or --eta".into()))?;
                let rows = xs.iter().map(|&x| Ok(vec![x, omega_half_eval(family, x)?])).collect::<Result<Vec<_>>>()?;
                emit(output.as_deref(), |w| io::write_table(w, &["x", "y"], rows))?;
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn run(cli: Cli) -> Result<i32> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let ctx = Context { config, tolerances: cli.tolerances, verbose: cli.verbose };
    match cli.command {
        Command::Exponents { omega, preset } => cmd_exponents(&ctx, omega, preset),
        Command::Presets => {
            emit_json(None, &list_material_presets())?;
            Ok(EXIT_OK)
        }
        Command::Profile { omega, preset, f_center, closed_form, eta, output } => {
            cmd_profile(&ctx, omega, preset, f_center, closed_form, eta, output)
        }
        Command::Trajectory { omega, x0, y0, direction, output } => cmd_trajectory(&ctx, omega, x0, y0, direction, output),
        Command::Fields { omega, preset, f_center, closed_form, r, t, output, gnuplot } => {
            cmd_fields(&ctx, omega, preset, f_center, closed_form, r, t, output, gnuplot)
        }
        Command::Residual { input, omega, output } => cmd_residual(&ctx, input, omega, output),
        Command::Scan { from, to, steps, f_center, launch, format, output } => {
            cmd_scan(&ctx, from, to, steps, f_center, launch, format, output)
        }
        Command::Bracket { lower, upper, iterations, launch, output } => {
            cmd_bracket(&ctx, lower, upper, iterations, launch, output)
        }
        Command::ClosedForm { case, through, c1, c2, eval, x, eta, output } => {
            cmd_closed_form(&ctx, case, through, c1, c2, eval, x, eta, output)
        }
    }
}

/// Parses the process arguments, runs, and maps the outcome to an exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
