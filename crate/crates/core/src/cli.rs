//! Command-line front end.
//!
//! Exit status: 0 on success, 2 when a connection search reports no
//! geodesic, 1 on usage or domain errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::geodesic::{integrate, GeodesicOptions, GeodesicState};
use crate::isometry::{classify, AffineMap, GridSpec, IsometryOptions};
use crate::ode::OdeOptions;
use crate::riccati::{solve_prescribed, verify_hfield, CurvatureProfile, RiccatiOptions};
use crate::two_point::{self, ConnectResult, Metric, SweepRow, CONNECT_TOL};
use crate::warp::{make_warp, Point, WarpSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_GEODESIC: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Integrator settings of a config file.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

/// Settings shared by every subcommand, read from a TOML file:
///
/// ```toml
/// seed = 3
/// [warp]
/// kind = "flat"
/// a0 = 1.0
/// a1 = 4.0
/// [integrator]
/// abs_tol = 1e-12
/// rel_tol = 1e-12
/// [output]
/// format = "csv"
/// path = "out.csv"
/// ```
///
/// Command-line flags take precedence.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub warp: Option<WarpSpec>,
    pub integrator: IntegratorConfig,
    pub output: OutputConfig,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| GeoError::InvalidParameter(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| GeoError::InvalidParameter(format!("bad config {}: {e}", path.display())))?;
        cfg.ode_options(None)?;
        Ok(cfg)
    }

    fn ode_options(&self, tol: Option<f64>) -> Result<OdeOptions> {
        let mut o = OdeOptions::default();
        if let Some(t) = self.integrator.abs_tol {
            o.abs_tol = t;
        }
        if let Some(t) = self.integrator.rel_tol {
            o.rel_tol = t;
        }
        if let Some(m) = self.integrator.max_step {
            o.max_step = m;
        }
        if let Some(t) = tol {
            o.abs_tol = t;
            o.rel_tol = t;
        }
        o.validate()?;
        Ok(o)
    }
}

/// `r,t` on the command line.
#[derive(Debug, Clone, Copy)]
pub struct PointArg(Point);

impl FromStr for PointArg {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        let (r, t) = s
            .split_once(',')
            .ok_or_else(|| GeoError::InvalidParameter(format!("expected `r,t`, got `{s}`")))?;
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| GeoError::InvalidParameter(format!("`{x}`: {e}")))
        };
        Ok(PointArg(Point::new(num(r)?, num(t)?)?))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "warpgeo",
    version,
    about = "Curvature, geodesics and isometries of dr² + dt²/h(r)² on the half plane r > 0",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// Warp function: one_over_r, r, exp, flat:A0,A1 or neg2:C0,C1,C2 [default: one_over_r]
    #[arg(long, global = true)]
    pub warp: Option<WarpSpec>,
    /// Tolerance; its role depends on the subcommand (see each subcommand's help)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized sampling [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format [default: json, or csv for tables]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML run configuration
    #[arg(long, global = true, env = "WARPGEO_CONFIG")]
    pub config: Option<PathBuf>,
    /// Also write a gnuplot script that plots the output file (needs --out)
    #[arg(long, global = true)]
    pub plot_script: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate K = H' - H² next to a finite-difference estimate
    #[command(allow_negative_numbers = true)]
    Curvature {
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long, default_value_t = 11)]
        n: usize,
        /// Finite-difference spacing, shrunk near domain edges
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Integrate a unit-speed geodesic (--tol sets the integrator tolerance, default 1e-10)
    #[command(allow_negative_numbers = true)]
    Geodesic {
        #[arg(long)]
        r0: f64,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        /// Initial direction in radians from ∂r towards h∂t
        #[arg(long)]
        angle: f64,
        #[arg(long)]
        s_max: f64,
        /// Project the velocity back to unit length after every step
        #[arg(long)]
        renormalize: bool,
    },
    /// Join two points by a geodesic; warp must be one_over_r or r (--tol: endpoint tolerance, default 1e-9)
    #[command(allow_negative_numbers = true)]
    Connect {
        #[arg(long, value_name = "R,T")]
        p0: PointArg,
        #[arg(long, value_name = "R,T")]
        p1: PointArg,
    },
    /// Connectivity atlas from a fixed start over a grid of end points
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long, value_name = "R,T", default_value = "1,0")]
        p0: PointArg,
        #[arg(long, default_value_t = 1.0)]
        r1_min: f64,
        #[arg(long)]
        r1_max: Option<f64>,
        #[arg(long, default_value_t = 1)]
        nr: usize,
        #[arg(long)]
        t1_min: f64,
        #[arg(long)]
        t1_max: f64,
        #[arg(long, default_value_t = 71)]
        nt: usize,
        /// Same-radius candidate test for h = r; end points are (r0, t0 + dt)
        #[arg(long)]
        same_r: bool,
    },
    /// Solve H' - H² = f and report the verification residual (--tol, default 1e-6)
    #[command(allow_negative_numbers = true)]
    Riccati {
        /// zero, neg2, const:C or inv_sq:C
        #[arg(long)]
        profile: CurvatureProfile,
        #[arg(long)]
        r0: f64,
        #[arg(long)]
        h0: f64,
        #[arg(long)]
        r_min: f64,
        #[arg(long)]
        r_max: f64,
        /// Where to write the JSON report when the field goes out as CSV
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify (r, t) ↦ (kr, kt + l) (--tol: verdict tolerance, default 1e-9)
    #[command(allow_negative_numbers = true)]
    Isometry {
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 0.0)]
        l: f64,
        /// Grid points per axis
        #[arg(long, default_value_t = 20)]
        grid_n: usize,
    },
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_ERROR
                }
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

struct Env {
    warp: WarpSpec,
    format: Option<Format>,
    out: Option<PathBuf>,
    seed: u64,
    config: RunConfig,
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(GeoError::InvalidParameter(format!("--tol must be positive, got {t}")));
        }
    }
    let env = Env {
        warp: cli.warp.or(config.warp).unwrap_or(WarpSpec::OneOverR),
        format: cli.format.or(config.output.format),
        out: cli.out.clone().or_else(|| config.output.path.clone()),
        seed: cli.seed.unwrap_or(config.seed),
        config,
    };
    if cli.plot_script.is_some() && env.out.is_none() {
        return Err(GeoError::InvalidParameter("--plot-script needs --out".into()));
    }
    let (body, code, plot) = match &cli.command {
        Command::Curvature { r_min, r_max, n, step } => {
            let (b, p) = cmd_curvature(&env, *r_min, *r_max, *n, *step)?;
            (b, EXIT_OK, p)
        }
        Command::Geodesic {
            r0,
            t0,
            angle,
            s_max,
            renormalize,
        } => {
            let (b, summary, p) = cmd_geodesic(&env, cli.tol, *r0, *t0, *angle, *s_max, *renormalize)?;
            let _ = writeln!(stderr, "{summary}");
            (b, EXIT_OK, p)
        }
        Command::Connect { p0, p1 } => {
            let res = two_point::connect(Metric::try_from(&env.warp)?, p0.0, p1.0, cli.tol.unwrap_or(CONNECT_TOL))?;
            let code = if res.exists() { EXIT_OK } else { EXIT_NO_GEODESIC };
            let body = match env.format.unwrap_or(Format::Json) {
                Format::Json => json(&res)?,
                Format::Csv => atlas_csv(&[row_of(p0.0, p1.0, &res)]),
            };
            (body, code, None)
        }
        Command::Sweep {
            p0,
            r1_min,
            r1_max,
            nr,
            t1_min,
            t1_max,
            nt,
            same_r,
        } => {
            let rows = cmd_sweep(
                &env,
                cli.tol,
                p0.0,
                (*r1_min, r1_max.unwrap_or(*r1_min), *nr),
                (*t1_min, *t1_max, *nt),
                *same_r,
            )?;
            let body = match env.format.unwrap_or(Format::Csv) {
                Format::Csv => atlas_csv(&rows),
                Format::Json => json(&rows)?,
            };
            let plot = Some("set datafile separator ','\nset xlabel 't1'\nset ylabel 'length'\nplot '{data}' using 4:6 skip 1 with linespoints title 'geodesic length'\n".to_string());
            (body, EXIT_OK, plot)
        }
        Command::Riccati {
            profile,
            r0,
            h0,
            r_min,
            r_max,
            report,
        } => {
            let (b, p) = cmd_riccati(
                &env,
                cli.tol,
                profile,
                *r0,
                *h0,
                (*r_min, *r_max),
                report.as_deref(),
                stderr,
            )?;
            (b, EXIT_OK, p)
        }
        Command::Isometry { k, l, grid_n } => {
            let m = AffineMap::new(*k, *l)?;
            let opts = IsometryOptions {
                tol: cli.tol.unwrap_or(crate::isometry::ISOMETRY_TOL),
                grid: GridSpec {
                    nr: *grid_n,
                    nt: *grid_n,
                    ..GridSpec::default()
                },
                seed: env.seed,
            };
            let report = classify(&make_warp(&env.warp)?, &m, &opts)?;
            (json(&report)?, EXIT_OK, None)
        }
    };
    emit(&env, &body, stdout)?;
    if let (Some(script), Some(data), Some(plot)) = (&cli.plot_script, &env.out, plot) {
        let text = plot.replace("{data}", &data.display().to_string());
        fs::write(script, text).map_err(io_err)?;
    }
    Ok(code)
}

fn io_err(e: std::io::Error) -> GeoError {
    GeoError::InvalidParameter(format!("I/O error: {e}"))
}

fn emit(env: &Env, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match &env.out {
        Some(path) => fs::write(path, body).map_err(io_err),
        None => stdout.write_all(body.as_bytes()).map_err(io_err),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| GeoError::InvalidParameter(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Serialize)]
struct CurvatureRow {
    r: f64,
    curvature: f64,
    oracle: f64,
    abs_diff: f64,
}

fn cmd_curvature(env: &Env, r_min: f64, r_max: f64, n: usize, step: f64) -> Result<(String, Option<String>)> {
    if !(r_min > 0.0 && r_min < r_max) || n < 2 || !(step > 0.0) {
        return Err(GeoError::InvalidParameter(format!(
            "need 0 < r_min < r_max, n >= 2 and step > 0 (got {r_min}, {r_max}, {n}, {step})"
        )));
    }
    let warp = make_warp(&env.warp)?;
    let dom = warp.domain();
    dom.check(r_min)?;
    dom.check(r_max)?;
    let rows = linspace(r_min, r_max, n)
        .into_iter()
        .map(|r| {
            let k = warp.sectional_curvature(r)?;
            let room = ((r - dom.lo).min(dom.hi - r) / 4.0).min(step);
            let oracle = warp.curvature_oracle(r, room)?;
            Ok(CurvatureRow {
                r,
                curvature: k,
                oracle,
                abs_diff: (k - oracle).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let body = match env.format.unwrap_or(Format::Csv) {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = String::from("r,K,K_oracle,abs_diff\n");
            for row in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    num(row.r),
                    num(row.curvature),
                    num(row.oracle),
                    num(row.abs_diff)
                );
            }
            s
        }
    };
    let plot = "set datafile separator ','\nset xlabel 'r'\nset ylabel 'K'\nplot '{data}' using 1:2 skip 1 with lines title 'K', '' using 1:3 skip 1 with points title 'finite differences'\n";
    Ok((body, Some(plot.into())))
}

fn cmd_geodesic(
    env: &Env,
    tol: Option<f64>,
    r0: f64,
    t0: f64,
    angle: f64,
    s_max: f64,
    renormalize: bool,
) -> Result<(String, String, Option<String>)> {
    let warp = make_warp(&env.warp)?;
    let opts = GeodesicOptions {
        ode: env.config.ode_options(tol)?,
        renormalize,
        ..GeodesicOptions::default()
    };
    let init = GeodesicState::from_angle(Point::new(r0, t0)?, angle);
    let path = integrate(&warp, init, s_max, &opts)?;
    let end = path.end();
    let summary = format!(
        "escaped={} length={} end=({}, {})",
        path.escaped,
        num(path.total_length),
        num(end.r),
        num(end.t)
    );
    let body = match env.format.unwrap_or(Format::Csv) {
        Format::Csv => path.to_csv(),
        Format::Json => json(&path)?,
    };
    let plot = "set datafile separator ','\nset size ratio -1\nset xlabel 'r'\nset ylabel 't'\nplot '{data}' using 2:3 skip 1 with lines title 'geodesic'\n";
    Ok((body, summary, Some(plot.into())))
}

fn row_of(p0: Point, p1: Point, res: &ConnectResult) -> SweepRow {
    SweepRow {
        r0: p0.r(),
        t0: p0.t(),
        r1: p1.r(),
        t1: p1.t(),
        exists: res.exists(),
        length: res.length(),
        iterations: res.iterations(),
    }
}

fn cmd_sweep(
    env: &Env,
    tol: Option<f64>,
    p0: Point,
    radii: (f64, f64, usize),
    times: (f64, f64, usize),
    same_r: bool,
) -> Result<Vec<SweepRow>> {
    let tol = tol.unwrap_or(CONNECT_TOL);
    let metric = Metric::try_from(&env.warp)?;
    if same_r {
        if metric != Metric::Ds2 {
            return Err(GeoError::InvalidParameter("--same-r needs --warp r".into()));
        }
        if p0.t() != 0.0 {
            return Err(GeoError::InvalidParameter("--same-r starts at t0 = 0".into()));
        }
        return two_point::sweep_same_r(p0.r(), &linspace(times.0, times.1, times.2), tol);
    }
    let mut pairs = Vec::new();
    for r1 in linspace(radii.0, radii.1, radii.2) {
        for t1 in linspace(times.0, times.1, times.2) {
            pairs.push((p0, Point::new(r1, t1)?));
        }
    }
    two_point::sweep(metric, &pairs, tol)
}

fn atlas_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("r0,t0,r1,t1,exists,length,iterations\n");
    for row in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(row.r0),
            num(row.t0),
            num(row.r1),
            num(row.t1),
            row.exists,
            row.length.map(num).unwrap_or_default(),
            row.iterations
        );
    }
    s
}

#[derive(Debug, Serialize)]
struct RiccatiOutput<'a> {
    profile: &'a str,
    field: &'a crate::riccati::HField,
    report: &'a crate::riccati::RiccatiReport,
}

#[allow(clippy::too_many_arguments)]
fn cmd_riccati(
    env: &Env,
    tol: Option<f64>,
    profile: &CurvatureProfile,
    r0: f64,
    h0: f64,
    range: (f64, f64),
    report_path: Option<&Path>,
    stderr: &mut dyn Write,
) -> Result<(String, Option<String>)> {
    let opts = RiccatiOptions {
        ode: env.config.ode_options(None)?,
        ..RiccatiOptions::default()
    };
    let field = solve_prescribed(profile, r0, h0, range, &opts)?;
    let report = verify_hfield(&field, profile, tol.unwrap_or(1e-6));
    let body = match env.format.unwrap_or(Format::Csv) {
        Format::Json => json(&RiccatiOutput {
            profile: profile.name(),
            field: &field,
            report: &report,
        })?,
        Format::Csv => {
            let rep = json(&report)?;
            match report_path {
                Some(p) => fs::write(p, rep).map_err(io_err)?,
                None => {
                    let _ = stderr.write_all(rep.as_bytes());
                }
            }
            let mut s = String::from("r,H,h\n");
            for ((r, hh), h) in field.grid.iter().zip(&field.log_d).zip(&field.h) {
                let _ = writeln!(s, "{},{},{}", num(*r), num(*hh), num(*h));
            }
            s
        }
    };
    let plot = "set datafile separator ','\nset xlabel 'r'\nplot '{data}' using 1:2 skip 1 with lines title 'H', '' using 1:3 skip 1 with lines title 'h'\n";
    Ok((body, Some(plot.into())))
}
