//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.
//!
//! The end-to-end criteria drive the `slidenodal` command layer and then
//! re-check what it wrote, so the files themselves are under test.
//! Artifacts are kept under `target/tmp/acceptance/` for inspection.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use slidenodal::commands::{run, Cli, Command, EXIT_INCONCLUSIVE, EXIT_OK};
use slidenodal::config::ValidateOptions;
use slidenodal::io::{read_json, read_mesh, read_vector};
use slidenodal::validate::rectangle_study;
use slidenodal_core::eig::{solve_symmetric, SolverOptions};
use slidenodal_core::fem::{assemble, Fault};
use slidenodal_core::geometry::{DomainBoundary, Point};
use slidenodal_core::mesh::{generate, Mesh, SizingSpec};
use slidenodal_core::nodal::{check_simple, extract, mirror_asymmetry, ChainKind, TouchLabel};
use slidenodal_core::sweep::{evaluate_t, Certificate, Outcome, SweepConfig, SweepResult};

// Tolerances, pinned.
const RECT_REL_TOL: f64 = 0.005;
const RECT_BASE_EDGE: f64 = 0.02;
const ORDER_LO: f64 = 1.7;
const ORDER_HI: f64 = 2.3;
const RECT_STUDY_BASE: f64 = 0.16;
const RECT_REFINEMENTS: usize = 3;
const RECT_BUDGET: Duration = Duration::from_secs(60);
const DISK_REL_TOL: f64 = 0.01;
const DISK_GAP_MAX: f64 = 0.05;
const DISK_BASE_EDGE: f64 = 0.04;
const J01_SQ: f64 = 5.78319;
const J11_SQ: f64 = 14.68197;
const ANCHOR_BUDGET: Duration = Duration::from_secs(60);
const GAP_MIN: f64 = 1e-3;
const RESIDUAL_MAX: f64 = 1e-8;
const CERTIFY_BUDGET: Duration = Duration::from_secs(600);
const CERTIFY_BUDGET_FINE: Duration = Duration::from_secs(1800);
const MIRROR_DEFECT_MAX: f64 = 1e-6;
const CHAIN_ASYMMETRY_MAX: f64 = 1e-9;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(v: &Verdict) {
    println!("criterion {} {} [{}]: {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
}

// ---------------------------------------------------------------------------
// independent oracles

/// `J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ`. The integrand is even and
/// 2π-periodic, so the trapezoidal rule converges geometrically.
fn bessel_integral(n: u32, x: f64) -> f64 {
    let m = 400;
    let h = PI / m as f64;
    let f = |tau: f64| (n as f64 * tau - x * tau.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for k in 1..m {
        s += f(k as f64 * h);
    }
    s * h / PI
}

fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a).signum();
    assert_ne!(fa, f(b).signum(), "no sign change in [{a}, {b}]");
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if f(m).signum() == fa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Smallest eigenvalues of `(-1, 1) x (-l, l)` by enumerating `(m, n)`.
fn rectangle_oracle(l: f64) -> [f64; 3] {
    let mut v: Vec<f64> = (1..6)
        .flat_map(|m| (1..6).map(move |n| (m as f64, n as f64)))
        .map(|(m, n)| PI * PI * (m * m / 4.0 + n * n / (4.0 * l * l)))
        .collect();
    v.sort_by(f64::total_cmp);
    [v[0], v[1], v[2]]
}

fn smallest_three(mesh: &Mesh) -> ([f64; 3], f64) {
    let (k, m, d) = assemble(mesh).unwrap();
    let r = solve_symmetric(&k, &m, &d.mirror(mesh), 3, &SolverOptions::default()).unwrap();
    ([r.lambda(0), r.lambda(1), r.lambda(2)], r.gap2)
}

// ---------------------------------------------------------------------------
// criteria 1-3

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let exact = rectangle_oracle(0.5);
    let frozen = [1.25, 2.0, 3.25].map(|c| c * PI * PI);
    let oracle_ok = exact.iter().zip(frozen).all(|(a, b)| (a - b).abs() < 1e-12);
    let mesh = generate(&DomainBoundary::rectangle(1.0, 0.5), &SizingSpec { base_edge: RECT_BASE_EDGE, ..SizingSpec::default() }).unwrap();
    let (lambda, _) = smallest_three(&mesh);
    let err = [0, 1, 2].map(|i| (lambda[i] - exact[i]).abs() / exact[i]);
    let study = rectangle_study(&ValidateOptions { base_edge: RECT_STUDY_BASE, levels: RECT_REFINEMENTS + 1, fault: Fault::None }).unwrap();
    let orders: Vec<f64> = study.orders.iter().flatten().copied().collect();
    let orders_ok = orders.len() == 3 * RECT_REFINEMENTS && orders.iter().all(|&o| (ORDER_LO..=ORDER_HI).contains(&o));
    let study_matches_oracle = study.exact.iter().zip(exact).all(|(a, b)| (a - b).abs() < 1e-12);
    let elapsed = start.elapsed();
    Verdict {
        id: 1,
        name: "rectangle oracle eigenvalues",
        pass: oracle_ok && err.iter().all(|&e| e < RECT_REL_TOL) && orders_ok && study_matches_oracle && elapsed < RECT_BUDGET,
        detail: format!(
            "rel errors at base_edge {RECT_BASE_EDGE}: {:.2e} {:.2e} {:.2e} (tol {RECT_REL_TOL}); orders over {RECT_REFINEMENTS} refinements {:.3}..{:.3} (range [{ORDER_LO}, {ORDER_HI}]); {:.1} s",
            err[0],
            err[1],
            err[2],
            orders.iter().copied().fold(f64::MAX, f64::min),
            orders.iter().copied().fold(f64::MIN, f64::max),
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_2() -> Verdict {
    let j01 = bisect_root(|x| bessel_integral(0, x), 2.0, 3.0);
    let j11 = bisect_root(|x| bessel_integral(1, x), 3.5, 4.2);
    let oracle_ok = (j01 * j01 - J01_SQ).abs() < 1e-5 && (j11 * j11 - J11_SQ).abs() < 1e-5;
    let mesh = generate(&DomainBoundary::disk(0.0, 1.0), &SizingSpec { base_edge: DISK_BASE_EDGE, ..SizingSpec::default() }).unwrap();
    let (lambda, gap2) = smallest_three(&mesh);
    let e1 = (lambda[0] - J01_SQ).abs() / J01_SQ;
    let e2 = (lambda[1] - J11_SQ).abs() / J11_SQ;
    Verdict {
        id: 2,
        name: "disk oracle eigenvalues",
        pass: oracle_ok && e1 < DISK_REL_TOL && e2 < DISK_REL_TOL && gap2 < DISK_GAP_MAX,
        detail: format!(
            "oracle j01^2 = {:.6}, j11^2 = {:.6}; rel errors {e1:.2e} {e2:.2e} (tol {DISK_REL_TOL}); gap2 {gap2:.2e} < {DISK_GAP_MAX} flags the double eigenvalue",
            j01 * j01,
            j11 * j11
        ),
    }
}

fn criterion_3() -> Verdict {
    let c = SweepConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (t, want) in [(1.6, TouchLabel::RightOnly), (2.3, TouchLabel::LeftOnly)] {
        let start = Instant::now();
        let r = evaluate_t(&c, t);
        let el = start.elapsed();
        let label = r.as_ref().ok().and_then(|r| r.label);
        ok &= label == Some(want) && el < ANCHOR_BUDGET;
        parts.push(format!("t = {t}: {label:?} in {:.1} s", el.as_secs_f64()));
    }
    Verdict { id: 3, name: "anchor labels", pass: ok, detail: parts.join("; ") }
}

// ---------------------------------------------------------------------------
// end-to-end runs

struct RunOut {
    dir: PathBuf,
    code: i32,
    elapsed: Duration,
}

impl RunOut {
    fn sweep(&self) -> Option<SweepResult> {
        read_json(&self.dir.join("scan.json")).ok()
    }

    fn outcome(&self) -> Option<Outcome> {
        read_json(&self.dir.join("outcome.json")).ok()
    }

    fn certificate(&self) -> Option<Certificate> {
        read_json(&self.dir.join("certificate.json")).ok()
    }
}

fn certify(root: &Path, name: &str, set: &[&str], jobs: usize) -> RunOut {
    let dir = root.join(name);
    let _ = fs::remove_dir_all(&dir);
    let cli = Cli {
        command: Command::Certify,
        config: None,
        set: set.iter().map(|s| s.to_string()).collect(),
        jobs,
        out: dir.clone(),
        seed: None,
    };
    println!("-- certify {name} ({})", set.join(" "));
    let start = Instant::now();
    let code = run(&cli);
    RunOut { dir, code, elapsed: start.elapsed() }
}

/// Certificate conditions re-checked from the certificate fields, without
/// trusting its `certified` flag.
fn certificate_failures(c: &Certificate) -> Vec<String> {
    let mut f = Vec::new();
    let mut need = |ok: bool, what: String| {
        if !ok {
            f.push(what);
        }
    };
    need(c.label == TouchLabel::Closed, format!("label {:?}", c.label));
    need(c.chain_count == 1 && c.chain_kind == Some(ChainKind::ClosedLoop), format!("{} chains, kind {:?}", c.chain_count, c.chain_kind));
    need(c.dist_left > c.delta_left, format!("dist_left {:.2e} <= delta {:.2e}", c.dist_left, c.delta_left));
    need(c.dist_right > c.delta_right, format!("dist_right {:.2e} <= delta {:.2e}", c.dist_right, c.delta_right));
    need(matches!(c.winding, Some(1) | Some(-1)), format!("winding {:?}", c.winding));
    need(c.nodal_domains == 2, format!("{} nodal domains", c.nodal_domains));
    need(c.sign_changes % 2 == 1, format!("{} sign changes", c.sign_changes));
    need(c.gap2 >= GAP_MIN, format!("gap2 {:.2e}", c.gap2));
    need(c.max_residual <= RESIDUAL_MAX, format!("residual {:.2e}", c.max_residual));
    f
}

/// Largest `|u₂|` on the far half of the handle relative to `‖u₂‖∞`.
fn far_handle_ratio(dir: &Path, cert: &Certificate) -> Option<f64> {
    let mesh = read_mesh(&dir.join("mesh.txt")).ok()?;
    let u2 = read_vector(&dir.join("u2.txt")).ok()?;
    let p = cert.params;
    let c = Point::new(p.t, 0.0);
    let top = u2.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let far = mesh
        .vertices
        .iter()
        .zip(&u2)
        .filter(|(q, _)| {
            let r = q.dist(c);
            r > p.r && r < p.r + p.h && q.x > p.t + 0.5 * p.r
        })
        .fold(0.0f64, |a, (_, v)| a.max(v.abs()));
    Some(far / top)
}

fn certify_verdict(runs: &[(&str, &RunOut, Duration)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (h, r, budget) in runs {
        let Some(cert) = r.certificate() else {
            pass = false;
            parts.push(format!("h = {h}: no certificate file (exit {})", r.code));
            continue;
        };
        let fails = certificate_failures(&cert);
        let certified = matches!(r.outcome(), Some(Outcome::Certified { .. }));
        let ok = r.code == EXIT_OK && certified && fails.is_empty() && r.elapsed < *budget;
        pass &= ok;
        let bracket = match r.outcome() {
            Some(Outcome::Narrowed(n)) => format!("narrowed to ({:.5}, {:.5})", n.ta, n.tb),
            _ => "certified".to_string(),
        };
        let far = far_handle_ratio(&r.dir, &cert).map_or("?".into(), |x| format!("{x:.1e}"));
        parts.push(format!(
            "h = {h}: exit {}, {bracket}, candidate t = {:.5}, failing [{}], far-handle |u2|/max {far}, {:.0} s",
            r.code,
            cert.t0,
            fails.join("; "),
            r.elapsed.as_secs_f64()
        ));
    }
    Verdict { id: 4, name: "closed nodal line certificate", pass, detail: parts.join(" | ") }
}

fn is_decisive(l: Option<TouchLabel>) -> bool {
    matches!(l, Some(TouchLabel::RightOnly) | Some(TouchLabel::LeftOnly))
}

/// The decisive labels in scan order are a RightOnly block then a LeftOnly
/// block, with the anchors on their sides.
fn single_flip(s: &SweepResult) -> Result<(), String> {
    let labels: Vec<TouchLabel> = s.records.iter().filter_map(|r| r.label).filter(|l| is_decisive(Some(*l))).collect();
    let flips = labels.windows(2).filter(|w| w[0] != w[1]).count();
    if flips != 1 || labels.first() != Some(&TouchLabel::RightOnly) || labels.last() != Some(&TouchLabel::LeftOnly) {
        return Err(format!("{flips} flips in {labels:?}"));
    }
    if s.right_only.iter().any(|i| s.left_only.contains(i)) {
        return Err("I1 and I2 intersect".into());
    }
    if s.anchors[0].label != Some(TouchLabel::RightOnly) || s.anchors[1].label != Some(TouchLabel::LeftOnly) {
        return Err("anchor labels".into());
    }
    let last_right = s.right_only.iter().map(|&i| s.records[i].t).fold(f64::MIN, f64::max);
    let first_left = s.left_only.iter().map(|&i| s.records[i].t).fold(f64::MAX, f64::min);
    if !(last_right < first_left) {
        return Err("blocks overlap".into());
    }
    Ok(())
}

fn criterion_5(runs: &[(&str, &RunOut)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, r) in runs {
        match r.sweep() {
            Some(s) => match single_flip(&s) {
                Ok(()) => parts.push(format!("{name}: one flip in {:?}", s.bracket.unwrap_or_default())),
                Err(e) => {
                    pass = false;
                    parts.push(format!("{name}: {e}"));
                }
            },
            None => {
                pass = false;
                parts.push(format!("{name}: scan failed (exit {})", r.code));
            }
        }
    }
    Verdict { id: 5, name: "single flip partition", pass, detail: parts.join("; ") }
}

/// Mirror checks on every dumped scan mesh and field.
fn criterion_6(r: &RunOut) -> Verdict {
    let mut worst_u: f64 = 0.0;
    let mut worst_chain: f64 = 0.0;
    let mut mesh_ok = true;
    let mut n = 0;
    let Ok(entries) = fs::read_dir(r.dir.join("dumps")) else {
        return Verdict { id: 6, name: "mirror symmetry", pass: false, detail: "no dumps".into() };
    };
    let mut dirs: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    dirs.sort();
    for d in &dirs {
        let (Ok(mesh), Ok(u1), Ok(u2)) = (read_mesh(&d.join("mesh.txt")), read_vector(&d.join("u1.txt")), read_vector(&d.join("u2.txt"))) else {
            mesh_ok = false;
            continue;
        };
        n += 1;
        let mm = &mesh.mirror_map;
        mesh_ok &= mm.iter().enumerate().all(|(i, &j)| {
            mm[j] == i && mesh.vertices[j].x == mesh.vertices[i].x && mesh.vertices[j].y == -mesh.vertices[i].y
        });
        let mut tris: Vec<[usize; 3]> = mesh.triangles.iter().map(|t| sorted(*t)).collect();
        tris.sort();
        mesh_ok &= mesh.triangles.iter().all(|t| tris.binary_search(&sorted(t.map(|v| mm[v]))).is_ok());
        for u in [&u1, &u2] {
            let top = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let even = (0..u.len()).map(|i| (u[i] - u[mm[i]]).abs()).fold(0.0, f64::max) / top;
            let odd = (0..u.len()).map(|i| (u[i] + u[mm[i]]).abs()).fold(0.0, f64::max) / top;
            worst_u = worst_u.max(even.min(odd));
        }
        worst_chain = worst_chain.max(mirror_asymmetry(&extract(&mesh, &u2, SweepConfig::default().eps_zero)));
    }
    let expected = SweepConfig::default().n_steps + 2;
    Verdict {
        id: 6,
        name: "mirror symmetry",
        pass: n == expected && mesh_ok && worst_u <= MIRROR_DEFECT_MAX && worst_chain <= CHAIN_ASYMMETRY_MAX,
        detail: format!(
            "{n}/{expected} scanned meshes; mirror map exact: {mesh_ok}; worst field defect {worst_u:.1e} (max {MIRROR_DEFECT_MAX}); worst chain asymmetry {worst_chain:.1e} (max {CHAIN_ASYMMETRY_MAX})"
        ),
    }
}

fn sorted(mut t: [usize; 3]) -> [usize; 3] {
    t.sort();
    t
}

/// Simple curves and single-loop impacts at every scanned parameter, from
/// the records of all runs and re-extracted from the dumped fields.
fn criterion_7(dumped: &RunOut, runs: &[(&str, &RunOut)]) -> Verdict {
    let mut bad = Vec::new();
    let mut n = 0;
    for (name, r) in runs {
        let Some(s) = r.sweep() else {
            bad.push(format!("{name}: no scan"));
            continue;
        };
        for rec in s.records.iter().chain(&s.anchors) {
            n += 1;
            if !(rec.curves_simple && rec.impacts_single_loop) {
                bad.push(format!("{name} t = {}", rec.t));
            }
        }
    }
    let mut re = 0;
    if let Ok(entries) = fs::read_dir(dumped.dir.join("dumps")) {
        for e in entries.flatten() {
            let (Ok(mesh), Ok(u2)) = (read_mesh(&e.path().join("mesh.txt")), read_vector(&e.path().join("u2.txt"))) else {
                continue;
            };
            let set = extract(&mesh, &u2, SweepConfig::default().eps_zero);
            re += 1;
            let impacts = set.chains.iter().filter(|c| c.kind == ChainKind::BoundaryArc).all(|c| {
                matches!(c.end_tags, Some([a, b]) if a == b)
            });
            if !(check_simple(&set).simple && impacts) {
                bad.push(format!("dump {}", e.path().display()));
            }
        }
    }
    Verdict {
        id: 7,
        name: "simple nodal curves",
        pass: bad.is_empty() && n > 0 && re > 0,
        detail: format!("{n} scan records and {re} re-extracted fields; violations: [{}]", bad.join(", ")),
    }
}

fn criterion_8(coarse: &RunOut, fine: &RunOut) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    match (coarse.sweep(), fine.sweep()) {
        (Some(a), Some(b)) => {
            let mut disagree = Vec::new();
            for (x, y) in a.records.iter().zip(&b.records).chain(a.anchors.iter().zip(&b.anchors)) {
                let ok = x.label == y.label || !is_decisive(x.label) || !is_decisive(y.label);
                if !ok {
                    disagree.push(format!("t = {:.4}: {:?} vs {:?}", x.t, x.label, y.label));
                }
            }
            pass &= disagree.is_empty() && a.records.len() == b.records.len();
            parts.push(format!("labels across levels: {} contradictions [{}]", disagree.len(), disagree.join(", ")));
            let certs = (coarse.outcome(), fine.outcome());
            match certs {
                (Some(Outcome::Certified { certificate: ca, .. }), Some(Outcome::Certified { certificate: cb, .. })) => {
                    let (lo, hi) = a.bracket.unwrap_or((f64::NAN, f64::NAN));
                    let within = (cb.t0 - ca.t0).abs() <= hi - lo;
                    pass &= within;
                    parts.push(format!("t0 {:.5} vs {:.5} within coarse bracket width {:.4}: {within}", ca.t0, cb.t0, hi - lo));
                }
                (oa, ob) => {
                    pass = false;
                    let show = |o: Option<Outcome>| match o {
                        Some(Outcome::Narrowed(n)) => format!("narrowed ({:.5}, {:.5})", n.ta, n.tb),
                        Some(Outcome::Certified { certificate, .. }) => format!("t0 {:.5}", certificate.t0),
                        None => "no outcome".into(),
                    };
                    parts.push(format!("no certificate pair: coarse {}, fine {}", show(oa), show(ob)));
                }
            }
        }
        _ => {
            pass = false;
            parts.push(format!("scan failed (exit {} / {})", coarse.code, fine.code));
        }
    }
    Verdict { id: 8, name: "mesh independence", pass, detail: parts.join("; ") }
}

fn criterion_9(serial: &RunOut, parallel: &RunOut, all: &[(&str, &RunOut)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for f in ["results.csv", "certificate.json"] {
        let a = fs::read(serial.dir.join(f));
        let b = fs::read(parallel.dir.join(f));
        let same = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
        pass &= same;
        parts.push(format!("{f} serial vs --jobs 4 identical: {same}"));
    }
    for (name, r) in all {
        match slidenodal::commands::verify_dir(&r.dir) {
            Ok((_, rep)) => {
                pass &= rep.passed();
                parts.push(format!("verify {name}: {}", if rep.passed() { "ok".to_string() } else { rep.mismatches.join(", ") }));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("verify {name}: {}", e.msg));
            }
        }
    }
    Verdict { id: 9, name: "reproducibility", pass, detail: parts.join("; ") }
}

fn main() {
    let root = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&root).unwrap();
    let mut verdicts = Vec::new();
    for f in [criterion_1, criterion_2, criterion_3] {
        let v = f();
        report(&v);
        verdicts.push(v);
    }

    let dumps = "output.dumps=true";
    let base = certify(&root, "h0.05", &[dumps], 1);
    let parallel = certify(&root, "h0.05_jobs4", &[dumps], 4);
    let wide = certify(&root, "h0.1", &["geometry.h=0.1"], 1);
    let thin = certify(&root, "h0.02_fine", &["geometry.h=0.02", "mesh.base_edge=0.03"], 1);
    let fine = certify(&root, "h0.05_fine", &["mesh.base_edge=0.03", "mesh.ring_layers=5"], 1);
    for r in [&base, &parallel, &wide, &thin, &fine] {
        if r.code != EXIT_OK && r.code != EXIT_INCONCLUSIVE {
            println!("-- {} exited with {}", r.dir.display(), r.code);
        }
    }

    let scans = [("h0.05", &base), ("h0.1", &wide), ("h0.02_fine", &thin), ("h0.05_fine", &fine)];
    let all = [("h0.05", &base), ("h0.05_jobs4", &parallel), ("h0.1", &wide), ("h0.02_fine", &thin), ("h0.05_fine", &fine)];
    let late = [
        certify_verdict(&[("0.05", &base, CERTIFY_BUDGET), ("0.1", &wide, CERTIFY_BUDGET), ("0.02", &thin, CERTIFY_BUDGET_FINE)]),
        criterion_5(&scans),
        criterion_6(&base),
        criterion_7(&base, &scans),
        criterion_8(&base, &fine),
        criterion_9(&base, &parallel, &all),
    ];
    for v in late {
        report(&v);
        verdicts.push(v);
    }

    println!("\nsummary");
    for v in &verdicts {
        println!("  criterion {} {} {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.name);
    }
    if verdicts.iter().any(|v| !v.pass) {
        std::process::exit(1);
    }
}
