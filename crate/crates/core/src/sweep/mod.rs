//! The sliding procedure: evaluate the nodal contact at one handle
//! position, scan the admissible window, bisect the contact flip and
//! assemble the closed-nodal-line certificate.
//!
//! Each handle position is solved from scratch on its own mesh. The scan
//! is split into [`scan_points`] and [`assemble_scan`] so that callers can
//! evaluate the points in parallel; [`scan`] is the serial composition.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::eig::{eigen_symmetry_class, residual, solve_symmetric, EigError, SolverOptions, SpectrumReport, SIMPLE_GAP};
use crate::fem::{assemble, DofMap, FemError};
use crate::geometry::{build_boundary, validate_params, DomainBoundary, DomainParams, GeometryError, ProbeSet, Window};
use crate::mesh::{generate, refine, Mesh, MeshError, SizingSpec};
use crate::nodal::{
    check_simple, classify_touch, count_nodal_domains, extract, mirror_asymmetry, sign_changes_on_sigma,
    winding_number, ChainKind, NodalError, NodalSet, TouchLabel, TouchReport, TouchThreshold, EPS_ZERO,
    MIN_SIGMA_SAMPLES, TOUCH_FACTOR, WINDING_RESIDUAL,
};

/// Largest eigen-residual a certificate accepts.
pub const CERTIFICATE_RESIDUAL: f64 = 1e-8;

/// Relative agreement required when a certificate is re-checked.
pub const VERIFY_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("geometry at t = {t}: {source}")]
    Geometry { t: f64, source: GeometryError },
    #[error("mesh at t = {t}: {source}")]
    Mesh { t: f64, source: MeshError },
    #[error("assembly at t = {t}: {source}")]
    Fem { t: f64, source: FemError },
    #[error("eigensolver at t = {t}: {source}")]
    Eig { t: f64, source: EigError },
    #[error("nodal analysis at t = {t}: {source}")]
    Nodal { t: f64, source: NodalError },
    #[error("label sequence flips {flips} times; refine the mesh")]
    MultiFlip { flips: usize },
    #[error("label at t = {t} is {found}, expected {expected}")]
    AnchorMismatch { t: f64, expected: &'static str, found: &'static str },
    #[error("bracket ({ta}, {tb}) is labelled {left} / {right}, expected RightOnly / LeftOnly")]
    BadBracket { ta: f64, tb: f64, left: &'static str, right: &'static str },
    #[error("bracket ({ta}, {tb}) has swapped labels")]
    LabelInversion { ta: f64, tb: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Domain template; `t` is overwritten per evaluation.
    pub params: DomainParams,
    /// Scan interval.
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub n_steps: usize,
    pub tol_t: f64,
    pub sizing: SizingSpec,
    pub solver: SolverOptions,
    pub eps_zero: f64,
    /// Touch threshold as a multiple of the nearest boundary edge.
    pub touch_factor: f64,
    pub sigma_samples: usize,
    /// Re-label every point on a uniformly refined mesh and demote
    /// disagreements to Inconclusive.
    pub refinement_check: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            params: DomainParams::default(),
            t_lo: 1.4,
            t_hi: 2.5,
            t_minus: 1.6,
            t_plus: 2.3,
            n_steps: 24,
            tol_t: 1e-3,
            sizing: SizingSpec { ring_layers: 4, ..SizingSpec::default() },
            solver: SolverOptions::default(),
            eps_zero: EPS_ZERO,
            touch_factor: TOUCH_FACTOR,
            sigma_samples: 1024,
            refinement_check: true,
        }
    }
}

impl SweepConfig {
    pub fn single_loop(&self) -> bool {
        self.params.h == 0.0
    }

    pub fn touch(&self) -> TouchThreshold {
        TouchThreshold::LocalEdges(self.touch_factor)
    }
}

/// Check the configuration and return the admissible window.
pub fn validate_config(c: &SweepConfig) -> Result<Window, SweepError> {
    let bad = |s: String| Err(SweepError::Config(s));
    let w = validate_params(&c.params.with_t(c.t_minus)).map_err(|e| SweepError::Config(e.to_string()))?;
    if !(c.t_lo < c.t_hi) {
        return bad(format!("scan interval [{}, {}] is empty", c.t_lo, c.t_hi));
    }
    if c.n_steps < 2 {
        return bad(format!("n_steps = {} must be at least 2", c.n_steps));
    }
    if !(c.tol_t > 0.0) {
        return bad(format!("tol_t = {} must be positive", c.tol_t));
    }
    if !(c.eps_zero > 0.0 && c.eps_zero < 1.0) {
        return bad(format!("eps_zero = {} must lie in (0, 1)", c.eps_zero));
    }
    if !(c.touch_factor > 0.0) {
        return bad(format!("touch_factor = {} must be positive", c.touch_factor));
    }
    if c.sigma_samples < MIN_SIGMA_SAMPLES {
        return bad(format!("sigma_samples = {} is below {MIN_SIGMA_SAMPLES}", c.sigma_samples));
    }
    if c.sizing.ring_layers < 3 || !(c.sizing.base_edge > 0.0) || !(c.sizing.grading >= 1.0) {
        return bad("sizing needs base_edge > 0, ring_layers >= 3 and grading >= 1".to_string());
    }
    if !(c.solver.tol > 0.0) || c.solver.max_iters == 0 {
        return bad("solver needs tol > 0 and max_iters > 0".to_string());
    }
    if c.single_loop() {
        return Ok(w);
    }
    if !(w.t_lo < c.t_lo && c.t_hi < w.t_hi) {
        return bad(format!(
            "scan interval [{}, {}] leaves the admissible window ({}, {}) where both handle circles cross the flat edges, W lies outside the outer circle and E inside the inner circle",
            c.t_lo, c.t_hi, w.t_lo, w.t_hi
        ));
    }
    if !(c.t_minus < w.t_crit_in) {
        return bad(format!(
            "t_minus = {} must be below t_crit_in = {} so that N lies inside the inner circle",
            c.t_minus, w.t_crit_in
        ));
    }
    if !(c.t_plus > w.t_crit_out) {
        return bad(format!(
            "t_plus = {} must exceed t_crit_out = {} so that N lies outside the outer circle",
            c.t_plus, w.t_crit_out
        ));
    }
    for (name, t) in [("t_minus", c.t_minus), ("t_plus", c.t_plus)] {
        if !(c.t_lo <= t && t <= c.t_hi) {
            return bad(format!("{name} = {t} is outside the scan interval [{}, {}]", c.t_lo, c.t_hi));
        }
    }
    Ok(w)
}

/// Diagnostics of one handle position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub lambda: [f64; 3],
    pub gap2: f64,
    /// `None` in single-loop mode.
    pub label: Option<TouchLabel>,
    pub dist_left: Option<f64>,
    pub dist_right: Option<f64>,
    pub sign_changes: usize,
    pub nodal_domains: usize,
    /// Largest x-axis mirror defect of `u₁` and `u₂`.
    pub symmetry_defect: f64,
    pub max_residual: f64,
    pub curves_simple: bool,
    /// Every boundary arc has both impact points on one loop.
    pub impacts_single_loop: bool,
    pub nodal_asymmetry: f64,
    /// Label on the uniformly refined mesh, when checked.
    pub refined_label: Option<TouchLabel>,
    pub n_vertices: usize,
}

/// Everything computed at one handle position.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub params: DomainParams,
    pub boundary: DomainBoundary,
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub spectrum: SpectrumReport,
    /// Vertex fields, zero on the boundary.
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub nodal: NodalSet,
    pub touch: Option<TouchReport>,
    pub record: Record,
}

/// Solve and analyse the family member at `t` on a mesh built from the
/// configured sizing.
pub fn evaluate(c: &SweepConfig, t: f64) -> Result<Evaluation, SweepError> {
    let params = c.params.with_t(t);
    let boundary = build_boundary(&params).map_err(|source| SweepError::Geometry { t, source })?;
    let mesh = generate(&boundary, &c.sizing).map_err(|source| SweepError::Mesh { t, source })?;
    let mut ev = evaluate_on(c, params, boundary, mesh)?;
    if c.refinement_check && !c.single_loop() {
        let all: Vec<usize> = (0..ev.mesh.n_triangles()).collect();
        let fine = refine(&ev.mesh, &all).map_err(|source| SweepError::Mesh { t, source })?.mesh;
        let fine = evaluate_on(c, params, ev.boundary.clone(), fine)?;
        let refined = fine.record.label;
        ev.record.refined_label = refined;
        if refined != ev.record.label {
            ev.record.label = Some(TouchLabel::Inconclusive);
        }
    }
    Ok(ev)
}

pub fn evaluate_t(c: &SweepConfig, t: f64) -> Result<Record, SweepError> {
    evaluate(c, t).map(|e| e.record)
}

/// The analysis of [`evaluate`] on a given mesh, without the refinement
/// check.
pub fn evaluate_on(c: &SweepConfig, params: DomainParams, boundary: DomainBoundary, mesh: Mesh) -> Result<Evaluation, SweepError> {
    let t = params.t;
    let (k, m, dofs) = assemble(&mesh).map_err(|source| SweepError::Fem { t, source })?;
    let spectrum = solve_symmetric(&k, &m, &dofs.mirror(&mesh), 3, &c.solver).map_err(|source| SweepError::Eig { t, source })?;
    let u1 = dofs.scatter(&spectrum.pairs[0].coeffs);
    let u2 = dofs.scatter(&spectrum.pairs[1].coeffs);
    let single = params.h == 0.0;
    let defect = eigen_symmetry_class(&mesh, &u1, false).defect_x.max(eigen_symmetry_class(&mesh, &u2, false).defect_x);
    let nodal = extract(&mesh, &u2, c.eps_zero);
    let touch = if single {
        None
    } else {
        Some(classify_touch(&nodal, &mesh, c.touch()).map_err(|source| SweepError::Nodal { t, source })?)
    };
    let probes = ProbeSet::new(&params);
    let sign_changes = sign_changes_on_sigma(&mesh, &u2, probes.w, probes.e, c.sigma_samples, c.eps_zero)
        .map_err(|source| SweepError::Nodal { t, source })?;
    let impacts_single_loop = nodal.chains.iter().filter(|ch| ch.kind == ChainKind::BoundaryArc).all(|ch| {
        matches!(ch.end_tags, Some([a, b]) if a == b) && ch.impact_points.len() == 2
    });
    let record = Record {
        t,
        lambda: [spectrum.lambda(0), spectrum.lambda(1), spectrum.lambda(2)],
        gap2: spectrum.gap2,
        label: touch.map(|r| r.label),
        dist_left: touch.map(|r| r.dist_left),
        dist_right: touch.map(|r| r.dist_right),
        sign_changes,
        nodal_domains: count_nodal_domains(&mesh, &u2, c.eps_zero),
        symmetry_defect: defect,
        max_residual: spectrum.max_residual(),
        curves_simple: check_simple(&nodal).simple,
        impacts_single_loop,
        nodal_asymmetry: mirror_asymmetry(&nodal),
        refined_label: None,
        n_vertices: mesh.n_vertices(),
    };
    Ok(Evaluation { params, boundary, mesh, dofs, spectrum, u1, u2, nodal, touch, record })
}

/// Uniform scan grid over `[t_lo, t_hi]`, endpoints included.
pub fn scan_grid(c: &SweepConfig) -> Vec<f64> {
    let n = c.n_steps;
    (0..n).map(|i| c.t_lo + (c.t_hi - c.t_lo) * i as f64 / (n - 1) as f64).collect()
}

/// Grid points followed by the two anchors.
pub fn scan_points(c: &SweepConfig) -> Vec<f64> {
    let mut p = scan_grid(c);
    p.push(c.t_minus);
    p.push(c.t_plus);
    p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<Record>,
    /// Records at `t_minus` and `t_plus`.
    pub anchors: [Record; 2],
    /// Last RightOnly and first LeftOnly parameter of the scan.
    pub bracket: Option<(f64, f64)>,
    /// Indices labelled RightOnly (the handle position touches the right
    /// loop) and LeftOnly.
    pub right_only: Vec<usize>,
    pub left_only: Vec<usize>,
    /// Indices labelled Closed.
    pub closed: Vec<usize>,
    pub single_loop: bool,
}

/// Check the anchors and the single-flip property of a finished scan.
/// `records` holds the results for [`scan_points`], in order.
pub fn assemble_scan(c: &SweepConfig, mut records: Vec<Record>) -> Result<SweepResult, SweepError> {
    assert_eq!(records.len(), c.n_steps + 2, "one record per scan point");
    let plus = records.pop().unwrap();
    let minus = records.pop().unwrap();
    if c.single_loop() {
        return Ok(SweepResult {
            records,
            anchors: [minus, plus],
            bracket: None,
            right_only: Vec::new(),
            left_only: Vec::new(),
            closed: Vec::new(),
            single_loop: true,
        });
    }
    for (r, want) in [(&minus, TouchLabel::RightOnly), (&plus, TouchLabel::LeftOnly)] {
        if r.label != Some(want) {
            return Err(SweepError::AnchorMismatch { t: r.t, expected: want.as_str(), found: label_str(r.label) });
        }
    }
    let p = partition(&records)?;
    Ok(SweepResult {
        records,
        anchors: [minus, plus],
        bracket: p.bracket,
        right_only: p.right_only,
        left_only: p.left_only,
        closed: p.closed,
        single_loop: false,
    })
}

pub fn label_str(l: Option<TouchLabel>) -> &'static str {
    l.map_or("single_loop", |l| l.as_str())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub bracket: Option<(f64, f64)>,
    pub right_only: Vec<usize>,
    pub left_only: Vec<usize>,
    pub closed: Vec<usize>,
}

/// Split a label sequence into its RightOnly and LeftOnly parts. With
/// Closed and Inconclusive entries removed the sequence must be one
/// RightOnly block followed by one LeftOnly block.
pub fn partition(records: &[Record]) -> Result<Partition, SweepError> {
    let decisive: Vec<(usize, TouchLabel)> = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| match r.label {
            Some(l @ (TouchLabel::RightOnly | TouchLabel::LeftOnly)) => Some((i, l)),
            _ => None,
        })
        .collect();
    let flips = decisive.windows(2).filter(|w| w[0].1 != w[1].1).count();
    if flips > 1 {
        return Err(SweepError::MultiFlip { flips });
    }
    let first = decisive.first().map(|&(i, l)| (records[i].t, l));
    let last = decisive.last().map(|&(i, l)| (records[i].t, l));
    match first {
        Some((_, TouchLabel::RightOnly)) => {}
        _ => {
            let t = first.map_or(records.first().map_or(f64::NAN, |r| r.t), |f| f.0);
            return Err(SweepError::AnchorMismatch { t, expected: "RightOnly", found: label_str(first.map(|f| f.1)) });
        }
    }
    match last {
        Some((_, TouchLabel::LeftOnly)) => {}
        _ => {
            let t = last.map_or(f64::NAN, |f| f.0);
            return Err(SweepError::AnchorMismatch { t, expected: "LeftOnly", found: label_str(last.map(|f| f.1)) });
        }
    }
    let right_only: Vec<usize> = decisive.iter().filter(|d| d.1 == TouchLabel::RightOnly).map(|d| d.0).collect();
    let left_only: Vec<usize> = decisive.iter().filter(|d| d.1 == TouchLabel::LeftOnly).map(|d| d.0).collect();
    let bracket = Some((records[*right_only.last().unwrap()].t, records[left_only[0]].t));
    let closed = (0..records.len()).filter(|&i| records[i].label == Some(TouchLabel::Closed)).collect();
    Ok(Partition { bracket, right_only, left_only, closed })
}

/// Serial scan.
pub fn scan(c: &SweepConfig) -> Result<SweepResult, SweepError> {
    validate_config(c)?;
    let records = scan_points(c).into_iter().map(|t| evaluate_t(c, t)).collect::<Result<Vec<_>, _>>()?;
    assemble_scan(c, records)
}

/// One named condition of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
}

/// Evidence that the nodal line at `t0` is a closed curve around the hole.
/// `certified` is true only when every condition holds; otherwise the
/// record documents which conditions failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub t0: f64,
    pub h: f64,
    pub params: DomainParams,
    pub mesh_fingerprint: String,
    pub n_vertices: usize,
    pub lambda2: f64,
    pub gap2: f64,
    /// Residual of `u₂` against the assembled pencil.
    pub residual2: f64,
    pub max_residual: f64,
    pub label: TouchLabel,
    pub touch: TouchThreshold,
    pub dist_left: f64,
    pub dist_right: f64,
    pub delta_left: f64,
    pub delta_right: f64,
    pub chain_count: usize,
    pub chain_kind: Option<ChainKind>,
    pub winding: Option<i32>,
    pub winding_residual: Option<f64>,
    pub nodal_domains: usize,
    pub sign_changes: usize,
    pub eps_zero: f64,
    pub sigma_samples: usize,
    pub refinement_stable: bool,
    pub conditions: Vec<Condition>,
    pub certified: bool,
}

/// Assemble the certificate for an evaluation.
pub fn certificate(c: &SweepConfig, ev: &Evaluation) -> Certificate {
    let r = &ev.record;
    let touch = ev.touch.expect("certificates need two boundary loops");
    let p_hole = ProbeSet::new(&ev.params).p_hole;
    let only_chain = if ev.nodal.chains.len() == 1 { Some(&ev.nodal.chains[0]) } else { None };
    let chain_kind = only_chain.map(|ch| ch.kind);
    let wind = only_chain.filter(|ch| ch.kind == ChainKind::ClosedLoop).and_then(|ch| winding_number(&ch.points, p_hole).ok());
    let residual2 = ev.spectrum.pairs[1].residual;
    let refinement_stable = r.refined_label.is_some_and(|l| Some(l) == r.label);
    let checks = [
        ("label_closed", touch.label == TouchLabel::Closed),
        ("single_closed_chain", chain_kind == Some(ChainKind::ClosedLoop)),
        ("clear_of_left_loop", touch.dist_left > touch.delta_left),
        ("clear_of_right_loop", touch.dist_right > touch.delta_right),
        ("encloses_hole", wind.is_some_and(|(w, res)| w.abs() == 1 && res < WINDING_RESIDUAL)),
        ("two_nodal_domains", r.nodal_domains == 2),
        ("odd_sign_changes_on_sigma", r.sign_changes % 2 == 1),
        ("simple_second_eigenvalue", r.gap2 >= SIMPLE_GAP),
        ("residuals", r.max_residual <= CERTIFICATE_RESIDUAL),
        ("refinement_stable", refinement_stable),
        ("curves_simple", r.curves_simple),
    ];
    let conditions: Vec<Condition> = checks.iter().map(|&(n, p)| Condition { name: n.to_string(), pass: p }).collect();
    let certified = conditions.iter().all(|c| c.pass);
    Certificate {
        t0: ev.params.t,
        h: ev.params.h,
        params: ev.params,
        mesh_fingerprint: ev.mesh.fingerprint(),
        n_vertices: ev.mesh.n_vertices(),
        lambda2: ev.spectrum.lambda(1),
        gap2: r.gap2,
        residual2,
        max_residual: r.max_residual,
        label: touch.label,
        touch: c.touch(),
        dist_left: touch.dist_left,
        dist_right: touch.dist_right,
        delta_left: touch.delta_left,
        delta_right: touch.delta_right,
        chain_count: ev.nodal.chains.len(),
        chain_kind,
        winding: wind.map(|w| w.0),
        winding_residual: wind.map(|w| w.1),
        nodal_domains: r.nodal_domains,
        sign_changes: r.sign_changes,
        eps_zero: c.eps_zero,
        sigma_samples: c.sigma_samples,
        refinement_stable,
        conditions,
        certified,
    }
}

/// Where the bisection stopped without a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Narrowed {
    pub ta: f64,
    pub tb: f64,
    /// Records of every bisection evaluation, in order.
    pub steps: Vec<Record>,
    /// Midpoints whose label decided nothing.
    pub inconclusive: Vec<f64>,
    /// Evidence at the midpoint of the final bracket.
    pub candidate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Certified { certificate: Certificate, steps: Vec<Record> },
    Narrowed(Narrowed),
}

impl Outcome {
    pub fn certificate(&self) -> &Certificate {
        match self {
            Outcome::Certified { certificate, .. } => certificate,
            Outcome::Narrowed(n) => &n.candidate,
        }
    }
}

/// Bisect the contact flip inside `(ta, tb)` on the labels.
pub fn bisect(c: &SweepConfig, ta: f64, tb: f64) -> Result<(Outcome, Evaluation), SweepError> {
    validate_config(c)?;
    let la = evaluate_t(c, ta)?.label;
    let lb = evaluate_t(c, tb)?.label;
    match (la, lb) {
        (Some(TouchLabel::RightOnly), Some(TouchLabel::LeftOnly)) => {}
        (Some(TouchLabel::LeftOnly), Some(TouchLabel::RightOnly)) => return Err(SweepError::LabelInversion { ta, tb }),
        _ => return Err(SweepError::BadBracket { ta, tb, left: label_str(la), right: label_str(lb) }),
    }
    let (mut ta, mut tb) = (ta, tb);
    // a known run of Inconclusive labels inside (ta, tb)
    let mut band: Option<(f64, f64)> = None;
    let mut steps = Vec::new();
    let mut inconclusive = Vec::new();
    loop {
        let (mid, left_gap) = match band {
            None if tb - ta > c.tol_t => (0.5 * (ta + tb), true),
            None => break,
            Some((lo, hi)) => {
                // narrow the wider gap between a decisive end and the band
                if (lo - ta).max(tb - hi) <= c.tol_t {
                    break;
                }
                if lo - ta >= tb - hi {
                    (0.5 * (ta + lo), true)
                } else {
                    (0.5 * (hi + tb), false)
                }
            }
        };
        let ev = evaluate(c, mid)?;
        steps.push(ev.record.clone());
        let label = ev.record.label;
        if label == Some(TouchLabel::Closed) {
            let cert = certificate(c, &ev);
            if cert.certified {
                return Ok((Outcome::Certified { certificate: cert, steps }, ev));
            }
        }
        match label {
            Some(TouchLabel::RightOnly) => {
                ta = mid;
                if band.is_some_and(|(lo, _)| lo < mid) {
                    band = None;
                }
            }
            Some(TouchLabel::LeftOnly) => {
                tb = mid;
                if band.is_some_and(|(_, hi)| hi > mid) {
                    band = None;
                }
            }
            _ => {
                inconclusive.push(mid);
                band = Some(match band {
                    None => (mid, mid),
                    Some((_, hi)) if left_gap => (mid, hi),
                    Some((lo, _)) => (lo, mid),
                });
            }
        }
    }
    let ev = evaluate(c, 0.5 * (ta + tb))?;
    let candidate = certificate(c, &ev);
    if candidate.certified {
        return Ok((Outcome::Certified { certificate: candidate, steps }, ev));
    }
    Ok((Outcome::Narrowed(Narrowed { ta, tb, steps, inconclusive, candidate }), ev))
}

/// Certificate attempts for scan points labelled Closed, then bisection of
/// the scan bracket. `None` in single-loop mode.
pub fn search(c: &SweepConfig, sweep: &SweepResult) -> Result<Option<(Outcome, Evaluation)>, SweepError> {
    if sweep.single_loop {
        return Ok(None);
    }
    for &i in &sweep.closed {
        let ev = evaluate(c, sweep.records[i].t)?;
        let cert = certificate(c, &ev);
        if cert.certified {
            return Ok(Some((Outcome::Certified { certificate: cert, steps: Vec::new() }, ev)));
        }
    }
    let (ta, tb) = sweep.bracket.expect("a successful two-loop scan has a bracket");
    bisect(c, ta, tb).map(Some)
}

/// Result of re-checking a certificate against dumped artifacts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub mismatches: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= VERIFY_RTOL * a.abs().max(b.abs())
}

/// Recompute the certificate quantities from the mesh and the vertex
/// field of `u₂` without solving the eigenproblem again. The eigenvalue
/// gap is taken from the certificate.
pub fn verify_certificate(cert: &Certificate, mesh: &Mesh, u2: &[f64]) -> VerifyReport {
    let mut bad = Vec::new();
    let mut check = |name: &str, ok: bool, detail: String| {
        if !ok {
            bad.push(format!("{name}: {detail}"));
        }
    };
    let fp = mesh.fingerprint();
    check("mesh_fingerprint", fp == cert.mesh_fingerprint, format!("{fp} != {}", cert.mesh_fingerprint));
    if u2.len() != mesh.n_vertices() {
        check("eigenvector", false, format!("{} values for {} vertices", u2.len(), mesh.n_vertices()));
        return VerifyReport { mismatches: bad };
    }
    match assemble(mesh) {
        Ok((k, m, dofs)) => {
            let res = residual(&k, &m, cert.lambda2, &dofs.gather(u2));
            check("residual2", close(res, cert.residual2), format!("recomputed {res:e}, certificate {:e}", cert.residual2));
            check("residual_bound", res <= CERTIFICATE_RESIDUAL, format!("{res:e} > {CERTIFICATE_RESIDUAL:e}"));
        }
        Err(e) => check("assembly", false, e.to_string()),
    }
    let nodal = extract(mesh, u2, cert.eps_zero);
    match classify_touch(&nodal, mesh, cert.touch) {
        Ok(t) => {
            check("label", t.label == cert.label, format!("{:?} != {:?}", t.label, cert.label));
            for (n, a, b) in [
                ("dist_left", t.dist_left, cert.dist_left),
                ("dist_right", t.dist_right, cert.dist_right),
                ("delta_left", t.delta_left, cert.delta_left),
                ("delta_right", t.delta_right, cert.delta_right),
            ] {
                check(n, close(a, b), format!("recomputed {a}, certificate {b}"));
            }
        }
        Err(e) => check("touch", false, e.to_string()),
    }
    check("chain_count", nodal.chains.len() == cert.chain_count, format!("{} != {}", nodal.chains.len(), cert.chain_count));
    let p_hole = ProbeSet::new(&cert.params).p_hole;
    let wind = if nodal.chains.len() == 1 && nodal.chains[0].kind == ChainKind::ClosedLoop {
        winding_number(&nodal.chains[0].points, p_hole).ok().map(|w| w.0)
    } else {
        None
    };
    check("winding", wind == cert.winding, format!("{wind:?} != {:?}", cert.winding));
    let nd = count_nodal_domains(mesh, u2, cert.eps_zero);
    check("nodal_domains", nd == cert.nodal_domains, format!("{nd} != {}", cert.nodal_domains));
    let probes = ProbeSet::new(&cert.params);
    match sign_changes_on_sigma(mesh, u2, probes.w, probes.e, cert.sigma_samples, cert.eps_zero) {
        Ok(s) => check("sign_changes", s == cert.sign_changes, format!("{s} != {}", cert.sign_changes)),
        Err(e) => check("sign_changes", false, e.to_string()),
    }
    VerifyReport { mismatches: bad }
}

/// Evaluations needed by [`bisect`] for a bracket of width `w`, at most.
pub fn bisection_budget(c: &SweepConfig, w: f64) -> usize {
    let mut n = 0;
    let mut w = w;
    while w > c.tol_t {
        w *= 0.5;
        n += 1;
    }
    2 + 3 * n + 1
}
