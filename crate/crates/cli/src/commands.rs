//! Subcommands. Each returns an exit code and writes its artifacts into the
//! output directory.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use slidenodal_core::sweep::{
    assemble_scan, bisect, evaluate, label_str, scan_points, search, validate_config,
    verify_certificate, Certificate, Evaluation, Outcome, Record, SweepError, SweepResult,
};

use crate::config::{ConfigError, RunConfig};
use crate::io::{self, IoError};
use crate::render::{render, Scene};
use crate::validate::{disk_study, fault_note, rectangle_study, report};

pub const EXIT_OK: i32 = 0;
/// The run finished but decided nothing: a narrowed bracket, an
/// uncertified candidate or a label sequence that fails the scan checks.
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INVALID_CONFIG: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug, Clone)]
#[command(name = "slidenodal", version, about = "Nodal lines of second Dirichlet eigenfunctions on domains with a sliding handle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file with dotted keys such as `geometry.h` or `[sweep] t_minus`.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one key; repeatable and applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads for the scan.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed of the eigensolver's start vectors (`solver.seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Rectangle and disk convergence studies against closed-form eigenvalues.
    Validate,
    /// Solve at `solve.t` and dump mesh, eigenvectors and the record.
    Solve,
    /// Scan the handle position and check the anchors and the single flip.
    Scan,
    /// Bisect the contact flip in `bisect.ta`..`bisect.tb`, or in the scan bracket.
    Bisect,
    /// Scan, bisect, write and re-check the certificate.
    Certify,
    /// SVG of the domain and nodal line at `solve.t`.
    Render,
    /// Re-check certificate.json against mesh.txt and u2.txt in the output directory.
    Verify,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

type Res<T> = Result<T, Failure>;

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure { code: EXIT_INVALID_CONFIG, msg: e.to_string() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure { code: EXIT_NUMERICAL, msg: e.to_string() }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        let code = match e {
            SweepError::Config(_) | SweepError::Geometry { .. } => EXIT_INVALID_CONFIG,
            SweepError::MultiFlip { .. }
            | SweepError::AnchorMismatch { .. }
            | SweepError::BadBracket { .. }
            | SweepError::LabelInversion { .. } => EXIT_INCONCLUSIVE,
            SweepError::Mesh { .. } | SweepError::Fem { .. } | SweepError::Eig { .. } | SweepError::Nodal { .. } => {
                EXIT_NUMERICAL
            }
        };
        Failure { code, msg: e.to_string() }
    }
}

/// Defaults, then the file, then `--set` in order, then `--seed`.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut c = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for s in &cli.set {
        c.set(s)?;
    }
    if let Some(seed) = cli.seed {
        c.sweep.solver.seed = seed;
    }
    Ok(c)
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> Res<i32> {
    let cfg = resolve_config(cli)?;
    let out = cli.out.as_path();
    std::fs::create_dir_all(out).map_err(|source| IoError::Fs { path: out.display().to_string(), source })?;
    if cli.command != Command::Verify {
        io::write_file(&out.join("resolved.toml"), &cfg.to_toml())?;
    }
    match cli.command {
        Command::Validate => cmd_validate(&cfg, out),
        Command::Solve => cmd_solve(&cfg, out),
        Command::Scan => cmd_scan(&cfg, cli.jobs, out).map(|_| EXIT_OK),
        Command::Bisect => cmd_bisect(&cfg, cli.jobs, out),
        Command::Certify => cmd_certify(&cfg, cli.jobs, out),
        Command::Render => cmd_render(&cfg, out),
        Command::Verify => cmd_verify(out),
    }
}

fn cmd_validate(cfg: &RunConfig, out: &Path) -> Res<i32> {
    if let Some(n) = fault_note(cfg.validate.fault) {
        println!("{n}");
    }
    let num = |e: crate::validate::ValidateError| Failure { code: EXIT_NUMERICAL, msg: e.to_string() };
    let studies = [rectangle_study(&cfg.validate).map_err(num)?, disk_study(&cfg.validate).map_err(num)?];
    let text: String = studies.iter().map(report).collect();
    print!("{text}");
    io::write_file(&out.join("validate.txt"), &text)?;
    Ok(if studies.iter().all(|s| s.passed()) { EXIT_OK } else { EXIT_NUMERICAL })
}

fn write_fields(ev: &Evaluation, dir: &Path) -> Res<()> {
    io::write_file(&dir.join("mesh.txt"), &io::mesh_text(&ev.mesh))?;
    io::write_file(&dir.join("u1.txt"), &io::vector_text(&ev.u1))?;
    io::write_file(&dir.join("u2.txt"), &io::vector_text(&ev.u2))?;
    Ok(())
}

fn write_figure(cfg: &RunConfig, ev: &Evaluation, path: &Path) -> Res<()> {
    if cfg.render.enabled {
        let title = format!("t = {}", ev.params.t);
        let scene = Scene { title: Some(&title), ..Scene::of(ev, cfg.render.mesh) };
        io::write_file(path, &render(&scene))?;
    }
    Ok(())
}

fn print_record(r: &Record) {
    let d = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3e}"));
    println!(
        "t = {:.6}  lambda2 = {:.6}  gap2 = {:.3e}  label = {:<12}  dist L/R = {} / {}",
        r.t,
        r.lambda[1],
        r.gap2,
        label_str(r.label),
        d(r.dist_left),
        d(r.dist_right)
    );
}

fn cmd_solve(cfg: &RunConfig, out: &Path) -> Res<i32> {
    let ev = evaluate(&cfg.sweep, cfg.solve_t)?;
    print_record(&ev.record);
    write_fields(&ev, out)?;
    io::write_file(&out.join("solve.csv"), &io::csv_text(std::slice::from_ref(&ev.record)))?;
    io::write_file(&out.join("record.json"), &io::json_text(&ev.record))?;
    if cfg.matrices {
        let (k, m, _) = slidenodal_core::fem::assemble(&ev.mesh)
            .map_err(|e| Failure { code: EXIT_NUMERICAL, msg: e.to_string() })?;
        io::write_file(&out.join("K.txt"), &io::triplet_text(&k))?;
        io::write_file(&out.join("M.txt"), &io::triplet_text(&m))?;
    }
    write_figure(cfg, &ev, &out.join("figure.svg"))?;
    Ok(EXIT_OK)
}

fn cmd_render(cfg: &RunConfig, out: &Path) -> Res<i32> {
    let ev = evaluate(&cfg.sweep, cfg.solve_t)?;
    let title = format!("t = {}", ev.params.t);
    let scene = Scene { title: Some(&title), ..Scene::of(&ev, cfg.render.mesh) };
    io::write_file(&out.join("figure.svg"), &render(&scene))?;
    Ok(EXIT_OK)
}

fn evaluate_point(cfg: &RunConfig, t: f64, out: &Path) -> Result<Record, Failure> {
    let ev = evaluate(&cfg.sweep, t)?;
    if cfg.dumps {
        let dir = out.join("dumps").join(format!("t_{t:.6}"));
        std::fs::create_dir_all(&dir).map_err(|source| IoError::Fs { path: dir.display().to_string(), source })?;
        write_fields(&ev, &dir)?;
    }
    Ok(ev.record)
}

/// Records of every scan point, in order. With `jobs > 1` the points run on
/// a pool of that size; the first failure in scan order is reported, so the
/// outcome does not depend on scheduling.
pub fn scan_records(cfg: &RunConfig, jobs: usize, out: &Path) -> Res<Vec<Record>> {
    let points = scan_points(&cfg.sweep);
    let results: Vec<Res<Record>> = if jobs <= 1 {
        points.iter().map(|&t| evaluate_point(cfg, t, out)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Failure { code: EXIT_NUMERICAL, msg: e.to_string() })?;
        pool.install(|| points.par_iter().map(|&t| evaluate_point(cfg, t, out)).collect())
    };
    results.into_iter().collect()
}

fn cmd_scan(cfg: &RunConfig, jobs: usize, out: &Path) -> Res<SweepResult> {
    validate_config(&cfg.sweep)?;
    let records = scan_records(cfg, jobs, out)?;
    let n = cfg.sweep.n_steps;
    for r in &records {
        print_record(r);
    }
    io::write_file(&out.join("results.csv"), &io::csv_text(&records[..n]))?;
    io::write_file(&out.join("anchors.csv"), &io::csv_text(&records[n..]))?;
    let sweep = assemble_scan(&cfg.sweep, records)?;
    io::write_file(&out.join("scan.json"), &io::json_text(&sweep))?;
    match sweep.bracket {
        Some((a, b)) => println!("flip bracket ({a}, {b})"),
        None => println!("single-loop mode: no flip"),
    }
    Ok(sweep)
}

/// Write the outcome and its artifacts, re-check the certificate from the
/// files just written, and pick the exit code.
fn finish(cfg: &RunConfig, outcome: &Outcome, ev: &Evaluation, out: &Path) -> Res<i32> {
    let steps = match outcome {
        Outcome::Certified { steps, .. } => steps,
        Outcome::Narrowed(n) => &n.steps,
    };
    io::write_file(&out.join("bisect.csv"), &io::csv_text(steps))?;
    io::write_file(&out.join("outcome.json"), &io::json_text(outcome))?;
    let cert = outcome.certificate();
    io::write_file(&out.join("certificate.json"), &io::json_text(cert))?;
    write_fields(ev, out)?;
    write_figure(cfg, ev, &out.join("figure_t0.svg"))?;
    for c in &cert.conditions {
        println!("  {:<28} {}", c.name, if c.pass { "ok" } else { "FAILED" });
    }
    let verified = verify_from_files(out)?;
    match outcome {
        Outcome::Certified { .. } => println!("certified closed nodal line at t0 = {}", cert.t0),
        Outcome::Narrowed(n) => println!(
            "no certificate: bracket narrowed to ({}, {}), {} inconclusive midpoints; candidate at t = {} (refine the mesh)",
            n.ta,
            n.tb,
            n.inconclusive.len(),
            cert.t0
        ),
    }
    if !verified {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(if matches!(outcome, Outcome::Certified { .. }) { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn cmd_bisect(cfg: &RunConfig, jobs: usize, out: &Path) -> Res<i32> {
    let (ta, tb) = match (cfg.bisect_ta, cfg.bisect_tb) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => match cmd_scan(cfg, jobs, out)?.bracket {
            Some(b) => b,
            None => return single_loop_exit(),
        },
        _ => return Err(ConfigError::Parse("bisect.ta and bisect.tb must be set together".into()).into()),
    };
    let (outcome, ev) = bisect(&cfg.sweep, ta, tb)?;
    finish(cfg, &outcome, &ev, out)
}

fn single_loop_exit() -> Res<i32> {
    println!("single-loop mode: the domain has no hole and nothing to certify");
    Ok(EXIT_INCONCLUSIVE)
}

fn cmd_certify(cfg: &RunConfig, jobs: usize, out: &Path) -> Res<i32> {
    let sweep = cmd_scan(cfg, jobs, out)?;
    let Some((outcome, ev)) = search(&cfg.sweep, &sweep)? else {
        return single_loop_exit();
    };
    if cfg.render.enabled {
        for (name, t) in [("figure_t_minus.svg", cfg.sweep.t_minus), ("figure_t_plus.svg", cfg.sweep.t_plus)] {
            write_figure(cfg, &evaluate(&cfg.sweep, t)?, &out.join(name))?;
        }
    }
    finish(cfg, &outcome, &ev, out)
}

/// Recompute a certificate from `certificate.json`, `mesh.txt` and `u2.txt`.
pub fn verify_dir(out: &Path) -> Res<(Certificate, slidenodal_core::sweep::VerifyReport)> {
    let cert: Certificate = io::read_json(&out.join("certificate.json"))?;
    let mesh = io::read_mesh(&out.join("mesh.txt"))?;
    let u2 = io::read_vector(&out.join("u2.txt"))?;
    let report = verify_certificate(&cert, &mesh, &u2);
    Ok((cert, report))
}

fn verify_from_files(out: &Path) -> Res<bool> {
    let (_, report) = verify_dir(out)?;
    io::write_file(&out.join("verify.json"), &io::json_text(&report))?;
    if report.passed() {
        println!("verify: certificate matches the dumped mesh and eigenvector");
    }
    for m in &report.mismatches {
        println!("verify: mismatch {m}");
    }
    Ok(report.passed())
}

fn cmd_verify(out: &Path) -> Res<i32> {
    let (cert, report) = verify_dir(out)?;
    for m in &report.mismatches {
        println!("mismatch {m}");
    }
    if !report.passed() {
        return Ok(EXIT_NUMERICAL);
    }
    if cert.certified {
        println!("certificate verified: closed nodal line at t0 = {}", cert.t0);
        Ok(EXIT_OK)
    } else {
        let failed: Vec<&str> = cert.conditions.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        println!("record consistent with the artifacts, but conditions fail: {}", failed.join(", "));
        Ok(EXIT_INCONCLUSIVE)
    }
}
