use std::fs;
use std::path::Path;
use std::process::{Command as Proc, Output};

use clap::Parser;
use slidenodal::commands::{resolve_config, run, Cli, EXIT_INCONCLUSIVE, EXIT_INVALID_CONFIG, EXIT_NUMERICAL, EXIT_OK};
use slidenodal::config::{ConfigError, RunConfig};

/// A cheap scan: coarse mesh, few points, no refinement check.
const QUICK: [&str; 8] = [
    "--set",
    "mesh.base_edge=0.08",
    "--set",
    "mesh.ring_layers=3",
    "--set",
    "sweep.n_steps=6",
    "--set",
    "sweep.refinement_check=false",
];

fn cli(args: &[&str], out: &Path) -> Cli {
    let mut v = vec!["slidenodal"];
    v.extend_from_slice(args);
    v.extend_from_slice(&["--out", out.to_str().unwrap()]);
    Cli::try_parse_from(v).unwrap()
}

fn bin(args: &[&str], out: &Path) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_slidenodal"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn file_then_overrides_then_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "\"mesh.base_edge\" = 0.05\n\n[geometry]\nh = 0.1\n\n[sweep]\nn_steps = 12\n").unwrap();
    let mut c = cli(&["scan", "--config", path.to_str().unwrap(), "--set", "sweep.n_steps=30", "--seed", "7"], dir.path());
    let r = resolve_config(&c).unwrap();
    assert_eq!(r.sweep.params.h, 0.1);
    assert_eq!(r.sweep.sizing.base_edge, 0.05);
    assert_eq!(r.sweep.n_steps, 30);
    assert_eq!(r.sweep.solver.seed, 7);
    c.set.push("geometry.hh=1".into());
    assert_eq!(resolve_config(&c).unwrap_err(), ConfigError::UnknownKey("geometry.hh".into()));
}

#[test]
fn unknown_keys_and_bad_values_are_rejected() {
    let mut c = RunConfig::default();
    assert!(matches!(c.merge_toml("[sweep]\nt_mins = 1.6\n"), Err(ConfigError::UnknownKey(k)) if k == "sweep.t_mins"));
    assert!(matches!(c.set("sweep.n_steps=2.5"), Err(ConfigError::BadValue { .. })));
    assert!(matches!(c.set("sweep.n_steps"), Err(ConfigError::BadOverride(_))));
    assert!(matches!(c.set("solver.pcg_max_iters=10"), Err(ConfigError::BadValue { .. })));
    c.set("solver.inner=\"pcg\"").unwrap();
    c.set("solver.pcg_max_iters=10").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["scan", "--set", "mesh.colour=3"], dir.path());
    assert_eq!(o.status.code(), Some(EXIT_INVALID_CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mesh.colour"));
    let o = bin(&["scan", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(EXIT_INVALID_CONFIG));
}

#[test]
fn anchor_outside_the_outer_circle_condition_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["certify", "--set", "sweep.t_plus=1.95"], dir.path());
    assert_eq!(o.status.code(), Some(EXIT_INVALID_CONFIG));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("t_plus") && err.contains("t_crit_out") && err.contains("outer circle"), "{err}");
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn resolved_config_round_trips() {
    let mut c = RunConfig::default();
    for s in ["geometry.h=0.1", "solver.tol=1e-11", "bisect.ta=1.9", "bisect.tb=2.0", "geometry.junction=\"filleted\"", "geometry.junction_radius=0.01", "validate.fault=\"mass_diagonal_only\""] {
        c.set(s).unwrap();
    }
    let mut back = RunConfig::default();
    back.merge_toml(&c.to_toml()).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.to_toml(), c.to_toml());
}

#[test]
fn scans_are_byte_identical_serial_parallel_and_from_resolved_config() {
    let root = tempfile::tempdir().unwrap();
    let (a, b, c) = (root.path().join("serial"), root.path().join("jobs"), root.path().join("again"));
    let code_a = run(&cli(&[&["scan"][..], &QUICK[..]].concat(), &a));
    let code_b = run(&cli(&[&["scan", "--jobs", "3"][..], &QUICK[..]].concat(), &b));
    assert_eq!(code_a, code_b);
    let resolved = a.join("resolved.toml");
    let code_c = run(&cli(&["scan", "--config", resolved.to_str().unwrap()], &c));
    assert_eq!(code_a, code_c);
    let csv = fs::read(a.join("results.csv")).unwrap();
    assert_eq!(csv, fs::read(b.join("results.csv")).unwrap());
    assert_eq!(csv, fs::read(c.join("results.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(slidenodal::io::CSV_HEADER));
    assert_eq!(lines.count(), 6);
    assert_eq!(fs::read(a.join("resolved.toml")).unwrap(), fs::read(c.join("resolved.toml")).unwrap());
}

#[test]
fn render_is_deterministic() {
    let root = tempfile::tempdir().unwrap();
    let args = ["render", "--set", "mesh.base_edge=0.08", "--set", "mesh.ring_layers=3", "--set", "render.mesh=true"];
    assert_eq!(run(&cli(&args, &root.path().join("a"))), EXIT_OK);
    assert_eq!(run(&cli(&args, &root.path().join("b"))), EXIT_OK);
    let svg = fs::read(root.path().join("a/figure.svg")).unwrap();
    assert_eq!(svg, fs::read(root.path().join("b/figure.svg")).unwrap());
    let svg = String::from_utf8(svg).unwrap();
    for id in ["id=\"mesh\"", "class=\"left\"", "class=\"right\"", "id=\"nodal\"", "id=\"sigma\"", "id=\"p_hole\""] {
        assert!(svg.contains(id), "missing {id}");
    }
}

/// All coordinate pairs of the `d` attribute of the first path in a group.
fn group_points(svg: &str, group: &str) -> Vec<(f64, f64)> {
    let start = svg.find(&format!("<g id=\"{group}\"")).unwrap();
    let d0 = start + svg[start..].find(" d=\"").unwrap() + 4;
    let d = &svg[d0..d0 + svg[d0..].find('"').unwrap()];
    let nums: Vec<f64> = d
        .split(|c: char| c == 'M' || c == 'L' || c == 'Z' || c == ' ')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    nums.chunks(2).map(|p| (p[0], -p[1])).collect()
}

#[test]
fn rectangle_mode_render_has_a_vertical_nodal_arc() {
    let dir = tempfile::tempdir().unwrap();
    let base = 0.06;
    let args = ["render", "--set", "geometry.h=0", "--set", "mesh.base_edge=0.06"];
    assert_eq!(run(&cli(&args, dir.path())), EXIT_OK);
    let svg = fs::read_to_string(dir.path().join("figure.svg")).unwrap();
    assert!(svg.contains("class=\"single\"") && !svg.contains("class=\"left\""));
    assert!(svg.contains("id=\"sigma\"") && !svg.contains("id=\"p_hole\""));
    let pts = group_points(&svg, "nodal");
    assert!(pts.len() > 5);
    assert!(pts.iter().all(|p| p.0.abs() <= 2.0 * base), "{pts:?}");
    let (lo, hi) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    assert!(lo < -0.45 && hi > 0.45, "arc spans [{lo}, {hi}]");
}

#[test]
fn validate_passes_and_the_fault_hook_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["validate"], dir.path());
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&o.stdout));
    let report = fs::read_to_string(dir.path().join("validate.txt")).unwrap();
    assert!(report.contains("rectangle study") && report.contains("disk study"));
    let o = bin(&["validate", "--set", "validate.fault=\"mass_diagonal_only\""], dir.path());
    assert_eq!(o.status.code(), Some(EXIT_NUMERICAL));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn narrowed_bisection_verifies_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let args = [
        "bisect",
        "--set",
        "mesh.base_edge=0.15",
        "--set",
        "mesh.ring_layers=3",
        "--set",
        "bisect.ta=1.9261",
        "--set",
        "bisect.tb=1.9739",
    ];
    let o = bin(&args, out);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(EXIT_INCONCLUSIVE), "{stdout}\n{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout.contains("bracket narrowed"), "{stdout}");
    for f in ["certificate.json", "mesh.txt", "u2.txt", "bisect.csv", "figure_t0.svg", "verify.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    // consistent with its artifacts, but not a certificate
    assert_eq!(bin(&["verify"], out).status.code(), Some(EXIT_INCONCLUSIVE));

    let cert = fs::read_to_string(out.join("certificate.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&cert).unwrap();
    let d = v["delta_left"].as_f64().unwrap();
    v["delta_left"] = serde_json::json!(2.0 * d);
    fs::write(out.join("certificate.json"), serde_json::to_string(&v).unwrap()).unwrap();
    let o = bin(&["verify"], out);
    assert_eq!(o.status.code(), Some(EXIT_NUMERICAL));
    assert!(String::from_utf8_lossy(&o.stdout).contains("delta_left"));

    fs::write(out.join("certificate.json"), &cert).unwrap();
    let u2 = fs::read_to_string(out.join("u2.txt")).unwrap();
    let scale = u2.lines().skip(1).map(|l| l.parse::<f64>().unwrap().abs()).fold(0.0, f64::max);
    let mut noisy = String::new();
    for (i, l) in u2.lines().enumerate() {
        match l.parse::<f64>() {
            Ok(x) if x != 0.0 => {
                let y = x + 1e-3 * scale * (((i * 7919) % 2001) as f64 / 1000.0 - 1.0);
                noisy.push_str(&format!("{y:?}\n"));
            }
            _ => {
                noisy.push_str(l);
                noisy.push('\n');
            }
        }
    }
    fs::write(out.join("u2.txt"), noisy).unwrap();
    let o = bin(&["verify"], out);
    assert_eq!(o.status.code(), Some(EXIT_NUMERICAL));
    assert!(String::from_utf8_lossy(&o.stdout).contains("residual"));
}
