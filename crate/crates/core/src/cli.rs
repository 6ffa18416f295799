//! The `tqb` command-line front end.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 configuration error,
//! 3 numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::diagnostics::{
    convergence_study, count_interior_maxima, estimate_period, linear_errors, relative_error,
    ConvergenceTable,
};
use crate::error::Error;
use crate::expr;
use crate::mesh::UniformMesh;
use crate::problem::{
    preset, BoundaryCondition, BoundaryPlan, InitialCondition, Model, Params, ProblemSetup, Profile,
    RdCoefficients, Side, Species,
};
use crate::selftest::{all_passed, run_selftest, SelftestOptions, DEFAULT_GRID};
use crate::stepper::{run, SolverConfig, Trajectory};

pub const EXIT_OK: u8 = 0;
pub const EXIT_SELFTEST: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "tqb", version, about = "Trigonometric quintic B-spline reaction-diffusion solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a preset or custom model and write CSV, report and plot files.
    Run(RunArgs),
    /// Error table of the linear model against its exact solution.
    Converge(ConvergeArgs),
    /// Check basis continuity, stencil weights and the band solver.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// linear, brusselator, schnakenberg, gray-scott or custom.
    #[arg(long)]
    pub model: Option<String>,
    /// TOML file with run settings; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of mesh intervals.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Comma-separated probe positions.
    #[arg(long, value_delimiter = ',')]
    pub probes: Option<Vec<f64>>,
    /// Model constant or custom coefficient, `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_key_value)]
    pub params: Vec<(String, f64)>,
    /// Initial U as an expression in x (custom model).
    #[arg(long = "ic-u")]
    pub ic_u: Option<String>,
    /// Initial V as an expression in x (custom model).
    #[arg(long = "ic-v")]
    pub ic_v: Option<String>,
    /// Boundary condition `species,side,order,target`; repeatable (custom model).
    #[arg(long = "bc")]
    pub bcs: Vec<String>,
    /// Domain `x0,x_end` (custom model).
    #[arg(long, value_delimiter = ',')]
    pub domain: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// Only `linear` has an exact solution.
    #[arg(long, default_value = "linear")]
    pub model: String,
    #[arg(long, default_value_t = 0.1)]
    pub a: f64,
    #[arg(long, default_value_t = 0.01)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.005,0.01,0.02,0.04")]
    pub dts: Vec<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Comma-separated spacings.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Random banded systems to compare against dense elimination.
    #[arg(long, default_value_t = 200)]
    pub systems: usize,
    #[arg(long, hide = true, value_parser = parse_perturbation)]
    pub perturb_alpha: Option<(usize, f64)>,
}

fn parse_key_value(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_perturbation(s: &str) -> Result<(usize, f64), String> {
    let (i, e) = s.split_once(':').ok_or("expected index:epsilon")?;
    Ok((
        i.parse().map_err(|e| format!("{e}"))?,
        e.parse().map_err(|e| format!("{e}"))?,
    ))
}

/// One boundary condition in a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcSpec {
    pub species: String,
    pub side: String,
    pub order: u8,
    #[serde(default)]
    pub target: f64,
}

/// Contents of a `--config` TOML file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    #[serde(alias = "N")]
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub x0: Option<f64>,
    pub x_end: Option<f64>,
    /// Model constants for presets, coefficients `a1..n2` for custom runs.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub ic_u: Option<String>,
    pub ic_v: Option<String>,
    #[serde(default)]
    pub bcs: Vec<BcSpec>,
    pub output: Option<PathBuf>,
    pub snapshots: Option<Vec<f64>>,
    pub probes: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Applies command-line flags on top of file values.
    pub fn merge_flags(&mut self, a: &RunArgs) -> Result<(), Error> {
        if a.model.is_some() {
            self.model = a.model.clone();
        }
        self.n = a.n.or(self.n);
        self.dt = a.dt.or(self.dt);
        self.t_end = a.t_end.or(self.t_end);
        if a.out.is_some() {
            self.output = a.out.clone();
        }
        if a.snapshots.is_some() {
            self.snapshots = a.snapshots.clone();
        }
        if a.probes.is_some() {
            self.probes = a.probes.clone();
        }
        for (k, v) in &a.params {
            self.params.insert(k.clone(), *v);
        }
        if a.ic_u.is_some() {
            self.ic_u = a.ic_u.clone();
        }
        if a.ic_v.is_some() {
            self.ic_v = a.ic_v.clone();
        }
        if !a.bcs.is_empty() {
            self.bcs = a.bcs.iter().map(|s| parse_bc_flag(s)).collect::<Result<_, _>>()?;
        }
        if let Some(d) = &a.domain {
            if d.len() != 2 {
                return Err(Error::InvalidConfig("--domain takes x0,x_end".into()));
            }
            self.x0 = Some(d[0]);
            self.x_end = Some(d[1]);
        }
        Ok(())
    }
}

fn parse_bc_flag(s: &str) -> Result<BcSpec, Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::InvalidConfig(format!("boundary condition `{s}` is not species,side,order,target"));
    if parts.len() != 4 {
        return Err(bad());
    }
    Ok(BcSpec {
        species: parts[0].to_string(),
        side: parts[1].to_string(),
        order: parts[2].parse().map_err(|_| bad())?,
        target: parts[3].parse().map_err(|_| bad())?,
    })
}

fn bc_from_spec(b: &BcSpec) -> Result<BoundaryCondition, Error> {
    let species = match b.species.to_ascii_uppercase().as_str() {
        "U" => Species::U,
        "V" => Species::V,
        other => return Err(Error::InvalidBoundaryPlan(format!("unknown species `{other}`"))),
    };
    let side = match b.side.to_ascii_lowercase().as_str() {
        "left" => Side::Left,
        "right" => Side::Right,
        other => return Err(Error::InvalidBoundaryPlan(format!("unknown side `{other}`"))),
    };
    Ok(BoundaryCondition::new(species, side, b.order, b.target))
}

/// A fully checked run request.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub model: Option<Model>,
    pub params: Params,
    pub setup: ProblemSetup,
    pub solver: SolverConfig,
    pub output: PathBuf,
}

fn custom_coefficients(params: &BTreeMap<String, f64>) -> Result<RdCoefficients, Error> {
    let mut c = RdCoefficients::default();
    for (k, &v) in params {
        let slot = match k.as_str() {
            "a1" => &mut c.a1,
            "a2" => &mut c.a2,
            "b1" => &mut c.b1,
            "b2" => &mut c.b2,
            "c1" => &mut c.c1,
            "c2" => &mut c.c2,
            "d1" => &mut c.d1,
            "d2" => &mut c.d2,
            "e1" => &mut c.e1,
            "e2" => &mut c.e2,
            "m1" => &mut c.m1,
            "m2" => &mut c.m2,
            "n1" => &mut c.n1,
            "n2" => &mut c.n2,
            _ => {
                return Err(Error::UnknownParameter {
                    model: "custom".into(),
                    name: k.clone(),
                })
            }
        };
        *slot = v;
    }
    c.validate()?;
    Ok(c)
}

fn parse_profile(src: &str, species: &'static str) -> Result<Profile, Error> {
    let e = expr::parse(src).map_err(|e| {
        Error::InvalidConfig(format!("initial condition for {species}: {e}"))
    })?;
    Ok(Profile::Expr(e))
}

pub fn resolve(cfg: &RunConfig) -> Result<ResolvedRun, Error> {
    let name = cfg
        .model
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("no model given (use --model)".into()))?;
    let output = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    if name.eq_ignore_ascii_case("custom") {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::InvalidConfig(format!("custom model requires `{key}`")))
        };
        let (x0, x_end) = (need(cfg.x0, "x0")?, need(cfg.x_end, "x_end")?);
        let n = cfg
            .n
            .ok_or_else(|| Error::InvalidConfig("custom model requires `n`".into()))?;
        let (dt, t_end) = (need(cfg.dt, "dt")?, need(cfg.t_end, "t_end")?);
        let ic_u = cfg
            .ic_u
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("custom model requires `ic_u`".into()))?;
        let ic_v = cfg
            .ic_v
            .as_deref()
            .ok_or_else(|| Error::InvalidConfig("custom model requires `ic_v`".into()))?;
        let setup = ProblemSetup {
            coefficients: custom_coefficients(&cfg.params)?,
            mesh: UniformMesh::new(x0, x_end, n)?,
            boundary: BoundaryPlan::new(cfg.bcs.iter().map(bc_from_spec).collect::<Result<_, _>>()?)?,
            initial: InitialCondition::new(parse_profile(ic_u, "U")?, parse_profile(ic_v, "V")?),
            label: "custom".into(),
        };
        setup.validate()?;
        let solver = SolverConfig::new(
            dt,
            t_end,
            cfg.snapshots.clone().unwrap_or_else(|| vec![t_end]),
            cfg.probes.clone().unwrap_or_default(),
        )?;
        return Ok(ResolvedRun {
            model: None,
            params: cfg.params.clone(),
            setup,
            solver,
            output,
        });
    }
    let model: Model = name.parse()?;
    if cfg.ic_u.is_some() || cfg.ic_v.is_some() || !cfg.bcs.is_empty() || cfg.x0.is_some() || cfg.x_end.is_some() {
        return Err(Error::InvalidConfig(
            "initial conditions, boundary conditions and domain can only be set for the custom model".into(),
        ));
    }
    let mut over = cfg.params.clone();
    if let Some(n) = cfg.n {
        over.insert("n".into(), n as f64);
    }
    if let Some(dt) = cfg.dt {
        over.insert("dt".into(), dt);
    }
    if let Some(t) = cfg.t_end {
        over.insert("t_end".into(), t);
    }
    let p = preset(model, &over)?;
    let mut solver = p.solver.clone();
    if cfg.snapshots.is_some() || cfg.probes.is_some() {
        solver = SolverConfig::new(
            solver.dt,
            solver.t_end,
            cfg.snapshots.clone().unwrap_or(solver.snapshot_times),
            cfg.probes.clone().unwrap_or(solver.probe_points),
        )?;
    }
    Ok(ResolvedRun {
        model: Some(model),
        params: p.params,
        setup: p.setup,
        solver,
        output,
    })
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Singular { .. } | Error::Step { .. } | Error::ZeroDenominator | Error::InsufficientPeaks { .. } => {
            EXIT_NUMERIC
        }
        _ => EXIT_CONFIG,
    }
}

/// `{:.16e}`: 17 significant digits, round-trip exact.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn snapshots_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,x,u,v\n");
    for snap in &traj.snapshots {
        for (m, &x) in traj.knots.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                fmt_num(snap.t),
                fmt_num(x),
                fmt_num(snap.u[m]),
                fmt_num(snap.v[m])
            );
        }
    }
    s
}

pub fn probes_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,x,u,v\n");
    let mut order: Vec<usize> = (0..traj.probes.len()).collect();
    order.sort_by(|&a, &b| traj.probes[a].x.total_cmp(&traj.probes[b].x));
    let len = traj.probes.first().map_or(0, |p| p.samples.len());
    for k in 0..len {
        for &i in &order {
            let p = &traj.probes[i];
            let (t, u, v) = p.samples[k];
            let _ = writeln!(s, "{},{},{},{}", fmt_num(t), fmt_num(p.x), fmt_num(u), fmt_num(v));
        }
    }
    s
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut s = String::from("dt,l2_u,linf_u,l2_v,linf_v,order_u,order_v\n");
    let opt = |o: Option<f64>| o.map(fmt_num).unwrap_or_default();
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_num(r.dt),
            fmt_num(r.l2_u),
            fmt_num(r.linf_u),
            fmt_num(r.l2_v),
            fmt_num(r.linf_v),
            opt(r.order_u),
            opt(r.order_v)
        );
    }
    s
}

pub fn plot_script(traj: &Trajectory, label: &str) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot 5; run from this directory: gnuplot plot.gp\n");
    s.push_str("set datafile separator ','\nset terminal pngcairo size 1000,600\nset key outside\n");
    for (col, name) in [(3, "u"), (4, "v")] {
        let _ = writeln!(s, "\nset output 'snapshots_{name}.png'");
        let _ = writeln!(s, "set title '{label}: {} profiles'\nset xlabel 'x'\nset ylabel '{}'", name.to_uppercase(), name.to_uppercase());
        let parts: Vec<String> = traj
            .snapshots
            .iter()
            .map(|sn| {
                format!(
                    "'snapshots.csv' skip 1 using 2:($1 == {t} ? ${col} : 1/0) with lines title 't = {t}'",
                    t = fmt_num(sn.t)
                )
            })
            .collect();
        if !parts.is_empty() {
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
    }
    if !traj.probes.is_empty() {
        for (col, name) in [(3, "u"), (4, "v")] {
            let _ = writeln!(s, "\nset output 'probes_{name}.png'");
            let _ = writeln!(s, "set title '{label}: {} at probe points'\nset xlabel 't'\nset ylabel '{}'", name.to_uppercase(), name.to_uppercase());
            let parts: Vec<String> = traj
                .probes
                .iter()
                .map(|p| {
                    format!(
                        "'probes.csv' skip 1 using 1:($2 == {x} ? ${col} : 1/0) with lines title 'x = {x}'",
                        x = fmt_num(p.x)
                    )
                })
                .collect();
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
    }
    s.push_str("\nunset output\n");
    s
}

/// Interior maxima counted with a prominence of 10% of the profile range;
/// profiles flatter than `1e-8` have none.
pub fn pulse_count(profile: &[f64]) -> usize {
    let (lo, hi) = profile
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if !(hi - lo > 1e-8) {
        return 0;
    }
    count_interior_maxima(profile, 0.1 * (hi - lo))
}

pub fn report(r: &ResolvedRun, traj: &Trajectory) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model: {}", r.setup.label);
    for (k, v) in &r.params {
        let _ = writeln!(s, "param {k} = {v}");
    }
    let _ = writeln!(s, "domain: [{}, {}]", r.setup.mesh.x0(), r.setup.mesh.x_end());
    let _ = writeln!(s, "intervals: {}", r.setup.mesh.intervals());
    let _ = writeln!(s, "dt: {}", r.solver.dt);
    let _ = writeln!(s, "t_end: {}", r.solver.t_end);
    let _ = writeln!(s, "steps: {}", traj.steps);
    let _ = writeln!(s, "max boundary residual: {:.3e}", traj.max_boundary_residual);
    for (name, prev, next) in [
        ("U", &traj.previous.u, &traj.last.u),
        ("V", &traj.previous.v, &traj.last.v),
    ] {
        match relative_error(prev, next) {
            Ok(e) => {
                let _ = writeln!(s, "relative error of last step ({name}): {e:.4e}");
            }
            Err(e) => {
                let _ = writeln!(s, "relative error of last step ({name}): {e}");
            }
        }
    }
    if r.model == Some(Model::Linear) {
        if let Ok(e) = linear_errors(r.params["a"], r.params["b"], r.params["d"], r.solver.dt, traj) {
            let _ = writeln!(
                s,
                "errors at t = {}: L2(U) {:.6e} Linf(U) {:.6e} L2(V) {:.6e} Linf(V) {:.6e}",
                e.t, e.l2_u, e.linf_u, e.l2_v, e.linf_v
            );
        }
    }
    for sn in &traj.snapshots {
        let range = |x: &[f64]| {
            x.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)))
        };
        let (ul, uh) = range(&sn.u);
        let (vl, vh) = range(&sn.v);
        let _ = writeln!(
            s,
            "snapshot t = {}: U in [{ul:.6}, {uh:.6}] maxima {}; V in [{vl:.6}, {vh:.6}] maxima {}",
            sn.t,
            pulse_count(&sn.u),
            pulse_count(&sn.v)
        );
    }
    for p in &traj.probes {
        let series: Vec<(f64, f64)> = p.samples.iter().map(|s| (s.0, s.1)).collect();
        match estimate_period(&series) {
            Ok(period) => {
                let _ = writeln!(s, "probe x = {}: period of U {period:.4}", p.x);
            }
            Err(e) => {
                let _ = writeln!(s, "probe x = {}: period of U unavailable ({e})", p.x);
            }
        }
    }
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    fs::write(dir.join(name), contents)
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", dir.join(name).display())))
}

pub fn cmd_run(args: &RunArgs) -> u8 {
    let result = (|| -> Result<ResolvedRun, Error> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))
                })?;
                RunConfig::from_toml(&text)?
            }
            None => RunConfig::default(),
        };
        cfg.merge_flags(args)?;
        resolve(&cfg)
    })();
    let resolved = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let traj = match run(&resolved.setup, &resolved.solver) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let out = &resolved.output;
    let written = fs::create_dir_all(out)
        .map_err(|e| Error::InvalidConfig(format!("cannot create {}: {e}", out.display())))
        .and_then(|_| write_file(out, "snapshots.csv", &snapshots_csv(&traj)))
        .and_then(|_| write_file(out, "probes.csv", &probes_csv(&traj)))
        .and_then(|_| write_file(out, "report.txt", &report(&resolved, &traj)))
        .and_then(|_| write_file(out, "plot.gp", &plot_script(&traj, &resolved.setup.label)));
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    eprintln!("wrote {}", out.display());
    EXIT_OK
}

pub fn cmd_converge(args: &ConvergeArgs) -> u8 {
    match args.model.parse::<Model>() {
        Ok(Model::Linear) => {}
        Ok(m) => {
            eprintln!("error: {}", Error::NoAnalyticSolution(m.name().into()));
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    }
    let table = match convergence_study(args.a, args.b, args.d, args.n, &args.dts) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let csv = convergence_csv(&table);
    let written = fs::create_dir_all(&args.out)
        .map_err(|e| Error::InvalidConfig(format!("cannot create {}: {e}", args.out.display())))
        .and_then(|_| write_file(&args.out, "convergence.csv", &csv));
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    print!("{csv}");
    EXIT_OK
}

pub fn cmd_selftest(args: &SelftestArgs) -> u8 {
    let opts = SelftestOptions {
        grid: args.grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec()),
        systems: args.systems,
        alpha_perturbation: args.perturb_alpha,
        ..Default::default()
    };
    let results = run_selftest(&opts);
    for r in &results {
        println!("{r}");
    }
    if all_passed(&results) {
        EXIT_OK
    } else {
        EXIT_SELFTEST
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Selftest(a) => cmd_selftest(a),
    }
}
