//! Run configuration: flat dotted keys, read from a TOML file and from
//! `--set key=value` overrides.
//!
//! Every key has a default, unknown keys are errors, and
//! [`RunConfig::to_toml`] writes back every resolved value so that a run can
//! be repeated from its own output directory.

use std::fmt::Write as _;
use std::path::Path;

use slidenodal_core::eig::InnerSolver;
use slidenodal_core::fem::Fault;
use slidenodal_core::geometry::JunctionMode;
use slidenodal_core::sweep::SweepConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {msg}")]
    BadValue { key: String, msg: String },
    #[error("malformed override `{0}`, expected key=value")]
    BadOverride(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    /// Write SVG figures from the commands that produce eigenfunctions.
    pub enabled: bool,
    /// Draw the mesh wireframe under the curves.
    pub mesh: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidateOptions {
    /// Coarsest edge length of the oracle studies.
    pub base_edge: f64,
    /// Number of uniformly refined levels, the coarsest included.
    pub levels: usize,
    pub fault: Fault,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub sweep: SweepConfig,
    /// Parameter for `solve` and `render`.
    pub solve_t: f64,
    /// Explicit bracket for `bisect`; a scan is run when unset.
    pub bisect_ta: Option<f64>,
    pub bisect_tb: Option<f64>,
    /// Dump mesh and eigenvectors of every scanned parameter.
    pub dumps: bool,
    /// Write K and M as triplets next to the `solve` dumps.
    pub matrices: bool,
    pub render: RenderOptions,
    pub validate: ValidateOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sweep: SweepConfig::default(),
            solve_t: 1.9,
            bisect_ta: None,
            bisect_tb: None,
            dumps: false,
            matrices: false,
            render: RenderOptions { enabled: true, mesh: false },
            validate: ValidateOptions { base_edge: 0.08, levels: 3, fault: Fault::None },
        }
    }
}

/// A value as written in the file, before it is typed by its key.
#[derive(Clone, Debug, PartialEq)]
enum Raw {
    Num(String),
    Bool(bool),
    Str(String),
}

impl Raw {
    fn from_cli(s: &str) -> Raw {
        let s = s.trim();
        match s {
            "true" => Raw::Bool(true),
            "false" => Raw::Bool(false),
            _ => match s.strip_prefix('"').and_then(|x| x.strip_suffix('"')) {
                Some(q) => Raw::Str(q.to_string()),
                None => Raw::Num(s.to_string()),
            },
        }
    }
}

fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::BadValue { key: key.to_string(), msg: msg.into() }
}

fn float(key: &str, v: &Raw) -> Result<f64, ConfigError> {
    match v {
        Raw::Num(s) => s.parse::<f64>().map_err(|_| bad(key, format!("`{s}` is not a number"))),
        _ => Err(bad(key, "expected a number")),
    }
}

fn count(key: &str, v: &Raw) -> Result<usize, ConfigError> {
    match v {
        Raw::Num(s) => s.parse::<usize>().map_err(|_| bad(key, format!("`{s}` is not a non-negative integer"))),
        _ => Err(bad(key, "expected an integer")),
    }
}

fn flag(key: &str, v: &Raw) -> Result<bool, ConfigError> {
    match v {
        Raw::Bool(b) => Ok(*b),
        _ => Err(bad(key, "expected true or false")),
    }
}

fn text<'a>(key: &str, v: &'a Raw) -> Result<&'a str, ConfigError> {
    match v {
        Raw::Str(s) => Ok(s),
        _ => Err(bad(key, "expected a quoted string")),
    }
}

impl RunConfig {
    fn set_raw(&mut self, key: &str, v: &Raw) -> Result<(), ConfigError> {
        let s = &mut self.sweep;
        let p = &mut s.params;
        match key {
            "geometry.l" => p.l = float(key, v)?,
            "geometry.rho" => p.rho = float(key, v)?,
            "geometry.r" => p.r = float(key, v)?,
            "geometry.h" => p.h = float(key, v)?,
            "geometry.margin" => p.margin = float(key, v)?,
            "geometry.junction" => {
                p.junction_mode = match text(key, v)? {
                    "sharp" => JunctionMode::Sharp,
                    "filleted" => JunctionMode::Filleted(match p.junction_mode {
                        JunctionMode::Filleted(r) => r,
                        JunctionMode::Sharp => 0.0,
                    }),
                    o => return Err(bad(key, format!("`{o}` is neither \"sharp\" nor \"filleted\""))),
                }
            }
            "geometry.junction_radius" => {
                let r = float(key, v)?;
                if let JunctionMode::Filleted(x) = &mut p.junction_mode {
                    *x = r;
                } else if r != 0.0 {
                    p.junction_mode = JunctionMode::Filleted(r);
                }
            }
            "sweep.t_lo" => s.t_lo = float(key, v)?,
            "sweep.t_hi" => s.t_hi = float(key, v)?,
            "sweep.t_minus" => s.t_minus = float(key, v)?,
            "sweep.t_plus" => s.t_plus = float(key, v)?,
            "sweep.n_steps" => s.n_steps = count(key, v)?,
            "sweep.tol_t" => s.tol_t = float(key, v)?,
            "sweep.refinement_check" => s.refinement_check = flag(key, v)?,
            "mesh.base_edge" => s.sizing.base_edge = float(key, v)?,
            "mesh.ring_layers" => s.sizing.ring_layers = count(key, v)?,
            "mesh.grading" => s.sizing.grading = float(key, v)?,
            "mesh.max_vertices" => s.sizing.max_vertices = count(key, v)?,
            "solver.tol" => s.solver.tol = float(key, v)?,
            "solver.seed" => s.solver.seed = count(key, v)? as u64,
            "solver.max_iters" => s.solver.max_iters = count(key, v)?,
            "solver.extra_vectors" => s.solver.extra_vectors = count(key, v)?,
            "solver.inner" => {
                s.solver.inner = match text(key, v)? {
                    "cholesky" => InnerSolver::Cholesky,
                    "pcg" => InnerSolver::Pcg {
                        max_iters: match s.solver.inner {
                            InnerSolver::Pcg { max_iters } => max_iters,
                            InnerSolver::Cholesky => 2000,
                        },
                    },
                    o => return Err(bad(key, format!("`{o}` is neither \"cholesky\" nor \"pcg\""))),
                }
            }
            "solver.pcg_max_iters" => {
                let n = count(key, v)?;
                match &mut s.solver.inner {
                    InnerSolver::Pcg { max_iters } => *max_iters = n,
                    InnerSolver::Cholesky => return Err(bad(key, "needs solver.inner = \"pcg\" first")),
                }
            }
            "nodal.eps_zero" => s.eps_zero = float(key, v)?,
            "nodal.touch_factor" => s.touch_factor = float(key, v)?,
            "nodal.sigma_samples" => s.sigma_samples = count(key, v)?,
            "solve.t" => self.solve_t = float(key, v)?,
            "bisect.ta" => self.bisect_ta = Some(float(key, v)?),
            "bisect.tb" => self.bisect_tb = Some(float(key, v)?),
            "output.dumps" => self.dumps = flag(key, v)?,
            "output.matrices" => self.matrices = flag(key, v)?,
            "render.enabled" => self.render.enabled = flag(key, v)?,
            "render.mesh" => self.render.mesh = flag(key, v)?,
            "validate.base_edge" => self.validate.base_edge = float(key, v)?,
            "validate.levels" => self.validate.levels = count(key, v)?,
            "validate.fault" => {
                self.validate.fault = match text(key, v)? {
                    "none" => Fault::None,
                    "mass_diagonal_only" => Fault::MassDiagonalOnly,
                    o => return Err(bad(key, format!("`{o}` is not a known fault"))),
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| ConfigError::BadOverride(assignment.to_string()))?;
        self.set_raw(k.trim(), &Raw::from_cli(v))
    }

    /// Apply every key of a TOML document. Tables nest the dotted keys, so
    /// `[geometry]\nh = 0.1` and `"geometry.h" = 0.1` are the same key.
    pub fn merge_toml(&mut self, doc: &str) -> Result<(), ConfigError> {
        let table: toml::Table = doc.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let mut flat = Vec::new();
        flatten("", &table, &mut flat)?;
        for (k, v) in flat {
            self.set_raw(&k, &v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<RunConfig, ConfigError> {
        let doc = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        let mut c = RunConfig::default();
        c.merge_toml(&doc)?;
        Ok(c)
    }

    /// Every resolved key in a fixed order. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let s = &self.sweep;
        let p = &s.params;
        let q = |x: &str| format!("\"{x}\"");
        let mut e = vec![
            ("geometry.l", fl(p.l)),
            ("geometry.rho", fl(p.rho)),
            ("geometry.r", fl(p.r)),
            ("geometry.h", fl(p.h)),
            ("geometry.margin", fl(p.margin)),
        ];
        match p.junction_mode {
            JunctionMode::Sharp => e.push(("geometry.junction", q("sharp"))),
            JunctionMode::Filleted(r) => {
                e.push(("geometry.junction", q("filleted")));
                e.push(("geometry.junction_radius", fl(r)));
            }
        }
        e.extend([
            ("sweep.t_lo", fl(s.t_lo)),
            ("sweep.t_hi", fl(s.t_hi)),
            ("sweep.t_minus", fl(s.t_minus)),
            ("sweep.t_plus", fl(s.t_plus)),
            ("sweep.n_steps", s.n_steps.to_string()),
            ("sweep.tol_t", fl(s.tol_t)),
            ("sweep.refinement_check", s.refinement_check.to_string()),
            ("mesh.base_edge", fl(s.sizing.base_edge)),
            ("mesh.ring_layers", s.sizing.ring_layers.to_string()),
            ("mesh.grading", fl(s.sizing.grading)),
            ("mesh.max_vertices", s.sizing.max_vertices.to_string()),
            ("solver.tol", fl(s.solver.tol)),
            ("solver.seed", s.solver.seed.to_string()),
            ("solver.max_iters", s.solver.max_iters.to_string()),
            ("solver.extra_vectors", s.solver.extra_vectors.to_string()),
        ]);
        match s.solver.inner {
            InnerSolver::Cholesky => e.push(("solver.inner", q("cholesky"))),
            InnerSolver::Pcg { max_iters } => {
                e.push(("solver.inner", q("pcg")));
                e.push(("solver.pcg_max_iters", max_iters.to_string()));
            }
        }
        e.extend([
            ("nodal.eps_zero", fl(s.eps_zero)),
            ("nodal.touch_factor", fl(s.touch_factor)),
            ("nodal.sigma_samples", s.sigma_samples.to_string()),
            ("solve.t", fl(self.solve_t)),
        ]);
        if let Some(t) = self.bisect_ta {
            e.push(("bisect.ta", fl(t)));
        }
        if let Some(t) = self.bisect_tb {
            e.push(("bisect.tb", fl(t)));
        }
        e.extend([
            ("output.dumps", self.dumps.to_string()),
            ("output.matrices", self.matrices.to_string()),
            ("render.enabled", self.render.enabled.to_string()),
            ("render.mesh", self.render.mesh.to_string()),
            ("validate.base_edge", fl(self.validate.base_edge)),
            ("validate.levels", self.validate.levels.to_string()),
            (
                "validate.fault",
                q(match self.validate.fault {
                    Fault::None => "none",
                    Fault::MassDiagonalOnly => "mass_diagonal_only",
                }),
            ),
        ]);
        e
    }

    /// The resolved configuration as TOML with one table per key prefix.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (key, value) in self.entries() {
            let (sec, name) = key.split_once('.').expect("keys are dotted");
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{sec}]");
                section = sec;
            }
            let _ = writeln!(out, "{name} = {value}");
        }
        out
    }
}

/// Debug formatting keeps a decimal point or exponent, so TOML reads it
/// back as a float.
fn fl(x: f64) -> String {
    format!("{x:?}")
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, Raw)>) -> Result<(), ConfigError> {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        let raw = match v {
            toml::Value::Table(t) => {
                flatten(&key, t, out)?;
                continue;
            }
            toml::Value::Integer(i) => Raw::Num(i.to_string()),
            // `{:?}` keeps the exponent form and round-trips exactly
            toml::Value::Float(f) => Raw::Num(format!("{f:?}")),
            toml::Value::Boolean(b) => Raw::Bool(*b),
            toml::Value::String(s) => Raw::Str(s.clone()),
            _ => return Err(bad(&key, "arrays and dates are not configuration values")),
        };
        out.push((key, raw));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_key_is_settable() {
        let c = RunConfig::default();
        for (k, v) in c.entries() {
            let mut d = RunConfig::default();
            d.set(&format!("{k}={v}")).unwrap();
            assert_eq!(d, c, "{k}");
        }
    }

    #[test]
    fn nested_and_dotted_keys_agree() {
        let mut a = RunConfig::default();
        a.merge_toml("[geometry]\nh = 0.1\n").unwrap();
        let mut b = RunConfig::default();
        b.merge_toml("\"geometry.h\" = 0.1\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sweep.params.h, 0.1);
    }
}
