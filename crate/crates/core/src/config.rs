//! `key = value` scenario files with dotted keys.
//!
//! Blank lines and `#` comments are ignored. Unknown keys, duplicate keys and
//! malformed values are errors carrying the 1-based line number.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::GridSpec;
use crate::state::{DensityFamily, Family, InitialData};
use crate::transport::MAX_COURANT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionMode {
    /// forward Euler on the viscous term
    Explicit,
    /// Crank–Nicolson on the viscous term (one Helmholtz solve per component)
    Implicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    /// Bound on the per-cell Courant number of the transport scheme.
    pub cfl: f64,
    pub t_end: f64,
    pub dt_max: f64,
    pub sample_every: usize,
    /// Bound on `dt ‖∇u‖² / ‖√ρ u‖²`; 0 disables the limit.
    pub dissipation_cfl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidConfig {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub diffusion_mode: DiffusionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagConfig {
    /// Cartesian points per side for the 3-D Fourier diagnostics; 0 disables
    /// `low_freq_energy` in runs.
    pub cart_n: usize,
    /// Fourier-splitting constant; `None` means `2β(p) + 1`.
    pub alpha: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutConfig {
    pub dir: Option<String>,
    /// 0 disables periodic checkpoints.
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub time: TimeConfig,
    pub fluid: FluidConfig,
    pub init: InitialData,
    pub p_target: f64,
    pub solver: SolverConfig,
    pub diag: DiagConfig,
    pub out: OutConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec {
                nr: 128,
                nz: 256,
                r_max: 6.0,
                z_min: -6.0,
                z_max: 6.0,
            },
            time: TimeConfig {
                cfl: 0.5,
                t_end: 1.0,
                dt_max: 0.05,
                sample_every: 10,
                dissipation_cfl: 0.0,
            },
            fluid: FluidConfig { m: 0.5, big_m: 2.0 },
            init: InitialData::default(),
            p_target: 1.0,
            solver: SolverConfig {
                tol: 1e-10,
                max_iter: 500,
                diffusion_mode: DiffusionMode::Implicit,
            },
            diag: DiagConfig {
                cart_n: 0,
                alpha: None,
                fit_window: None,
            },
            out: OutConfig {
                dir: None,
                checkpoint_every: 0,
            },
        }
    }
}

/// `β(p) = ¾ (2/p − 1)`.
pub fn beta(p: f64) -> f64 {
    0.75 * (2.0 / p - 1.0)
}

pub const KEYS: &[&str] = &[
    "grid.nr",
    "grid.nz",
    "grid.r_max",
    "grid.z_min",
    "grid.z_max",
    "time.cfl",
    "time.t_end",
    "time.dt_max",
    "time.sample_every",
    "time.dissipation_cfl",
    "fluid.m",
    "fluid.M",
    "init.family",
    "init.A",
    "init.r0",
    "init.sigma",
    "init.density_family",
    "init.epsilon",
    "init.blob_center",
    "init.blob_width",
    "init.p_target",
    "init.file",
    "solver.tol",
    "solver.max_iter",
    "solver.diffusion_mode",
    "diag.cart_n",
    "diag.alpha",
    "diag.fit_window",
    "out.dir",
    "out.checkpoint_every",
];

fn parse_pair(v: &str) -> Option<(f64, f64)> {
    let (a, b) = v.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

impl SimConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = SimConfig::default();
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(err(format!("unknown key `{key}`")));
            };
            if let Some(prev) = seen.insert(known, line_no) {
                return Err(err(format!("duplicate key `{key}` (first set on line {prev})")));
            }
            let float = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("`{key}` needs a finite number, got {value:?}")))
            };
            let int = || {
                value
                    .parse::<usize>()
                    .map_err(|_| err(format!("`{key}` needs a non-negative integer, got {value:?}")))
            };
            let pair = || {
                parse_pair(value).ok_or_else(|| err(format!("`{key}` needs `a, b`, got {value:?}")))
            };
            match key {
                "grid.nr" => c.grid.nr = int()?,
                "grid.nz" => c.grid.nz = int()?,
                "grid.r_max" => c.grid.r_max = float()?,
                "grid.z_min" => c.grid.z_min = float()?,
                "grid.z_max" => c.grid.z_max = float()?,
                "time.cfl" => c.time.cfl = float()?,
                "time.t_end" => c.time.t_end = float()?,
                "time.dt_max" => c.time.dt_max = float()?,
                "time.sample_every" => c.time.sample_every = int()?,
                "time.dissipation_cfl" => c.time.dissipation_cfl = float()?,
                "fluid.m" => c.fluid.m = float()?,
                "fluid.M" => c.fluid.big_m = float()?,
                "init.family" => {
                    c.init.family = Family::parse(value).ok_or_else(|| {
                        err(format!(
                            "unknown family {value:?} (vortex_ring | shear_puff | custom)"
                        ))
                    })?
                }
                "init.A" => c.init.amplitude = float()?,
                "init.r0" => c.init.r0 = float()?,
                "init.sigma" => c.init.sigma = float()?,
                "init.density_family" => {
                    c.init.density_family = DensityFamily::parse(value).ok_or_else(|| {
                        err(format!(
                            "unknown density family {value:?} (uniform | off_axis_blob)"
                        ))
                    })?
                }
                "init.epsilon" => c.init.epsilon = float()?,
                "init.blob_center" => c.init.blob_center = pair()?,
                "init.blob_width" => c.init.blob_width = float()?,
                "init.p_target" => c.p_target = float()?,
                "init.file" => c.init.file = Some(value.to_string()),
                "solver.tol" => c.solver.tol = float()?,
                "solver.max_iter" => c.solver.max_iter = int()?,
                "solver.diffusion_mode" => {
                    c.solver.diffusion_mode = match value {
                        "explicit" => DiffusionMode::Explicit,
                        "implicit" => DiffusionMode::Implicit,
                        _ => {
                            return Err(err(format!(
                                "diffusion_mode must be explicit or implicit, got {value:?}"
                            )))
                        }
                    }
                }
                "diag.cart_n" => c.diag.cart_n = int()?,
                "diag.alpha" => c.diag.alpha = Some(float()?),
                "diag.fit_window" => c.diag.fit_window = Some(pair()?),
                "out.dir" => c.out.dir = Some(value.to_string()),
                "out.checkpoint_every" => c.out.checkpoint_every = int()?,
                _ => unreachable!("key list and match arms agree"),
            }
        }
        c.validate().map_err(|e| match e {
            Error::Config { .. } => e,
            other => Error::Config {
                line: 0,
                message: other.to_string(),
            },
        })?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config { line: 0, message: m });
        self.grid.validate()?;
        let t = &self.time;
        if !(t.cfl > 0.0 && t.cfl <= MAX_COURANT) {
            return bad(format!("time.cfl = {} must lie in (0, {MAX_COURANT:.4}]", t.cfl));
        }
        if !(t.t_end >= 0.0) {
            return bad(format!("time.t_end = {} must be >= 0", t.t_end));
        }
        if !(t.dt_max > 0.0) {
            return bad(format!("time.dt_max = {} must be > 0", t.dt_max));
        }
        if t.sample_every == 0 {
            return bad("time.sample_every must be >= 1".into());
        }
        if !(t.dissipation_cfl >= 0.0) {
            return bad("time.dissipation_cfl must be >= 0".into());
        }
        let f = &self.fluid;
        if !(f.m > 0.0 && f.m <= 1.0 && 1.0 <= f.big_m) {
            return bad(format!("need 0 < m <= 1 <= M, got m = {}, M = {}", f.m, f.big_m));
        }
        if !(self.p_target >= 1.0 && self.p_target < 2.0) {
            return bad(format!("init.p_target = {} must lie in [1, 2)", self.p_target));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return bad("solver.tol must be > 0 and solver.max_iter >= 1".into());
        }
        if let Some(a) = self.diag.alpha {
            if !(a > 0.0) {
                return bad("diag.alpha must be > 0".into());
            }
        }
        if let Some((a, b)) = self.diag.fit_window {
            if !(0.0 <= a && a < b) {
                return bad(format!("diag.fit_window = {a},{b} must satisfy 0 <= a < b"));
            }
        }
        if self.init.family == Family::Custom && self.init.file.is_none() {
            return bad("init.family = custom needs init.file".into());
        }
        self.init.validate()?;
        if self.init.density_family == DensityFamily::OffAxisBlob {
            // ρ₀ = 1/(1 + a₀) with a₀ between 0 and ε
            let extreme = 1.0 / (1.0 + self.init.epsilon);
            let (lo, hi) = (extreme.min(1.0), extreme.max(1.0));
            if lo < f.m || hi > f.big_m {
                return bad(format!(
                    "initial density range [{lo}, {hi}] leaves [m, M] = [{}, {}]",
                    f.m, f.big_m
                ));
            }
        }
        Ok(())
    }

    /// Fourier-splitting constant α (default `2β(p) + 1`).
    pub fn alpha(&self) -> f64 {
        self.diag.alpha.unwrap_or(2.0 * beta(self.p_target) + 1.0)
    }

    /// Canonical `key = value` rendering; parsing it yields `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = vec![
            ("grid.nr", self.grid.nr.to_string()),
            ("grid.nz", self.grid.nz.to_string()),
            ("grid.r_max", format!("{:?}", self.grid.r_max)),
            ("grid.z_min", format!("{:?}", self.grid.z_min)),
            ("grid.z_max", format!("{:?}", self.grid.z_max)),
            ("time.cfl", format!("{:?}", self.time.cfl)),
            ("time.t_end", format!("{:?}", self.time.t_end)),
            ("time.dt_max", format!("{:?}", self.time.dt_max)),
            ("time.sample_every", self.time.sample_every.to_string()),
            ("time.dissipation_cfl", format!("{:?}", self.time.dissipation_cfl)),
            ("fluid.m", format!("{:?}", self.fluid.m)),
            ("fluid.M", format!("{:?}", self.fluid.big_m)),
            (
                "init.family",
                match self.init.family {
                    Family::VortexRing => "vortex_ring",
                    Family::ShearPuff => "shear_puff",
                    Family::Custom => "custom",
                }
                .into(),
            ),
            ("init.A", format!("{:?}", self.init.amplitude)),
            ("init.r0", format!("{:?}", self.init.r0)),
            ("init.sigma", format!("{:?}", self.init.sigma)),
            (
                "init.density_family",
                match self.init.density_family {
                    DensityFamily::Uniform => "uniform",
                    DensityFamily::OffAxisBlob => "off_axis_blob",
                }
                .into(),
            ),
            ("init.epsilon", format!("{:?}", self.init.epsilon)),
            (
                "init.blob_center",
                format!("{:?}, {:?}", self.init.blob_center.0, self.init.blob_center.1),
            ),
            ("init.blob_width", format!("{:?}", self.init.blob_width)),
            ("init.p_target", format!("{:?}", self.p_target)),
            ("solver.tol", format!("{:?}", self.solver.tol)),
            ("solver.max_iter", self.solver.max_iter.to_string()),
            (
                "solver.diffusion_mode",
                match self.solver.diffusion_mode {
                    DiffusionMode::Explicit => "explicit",
                    DiffusionMode::Implicit => "implicit",
                }
                .into(),
            ),
            ("diag.cart_n", self.diag.cart_n.to_string()),
        ];
        if let Some(f) = &self.init.file {
            e.push(("init.file", f.clone()));
        }
        if let Some(a) = self.diag.alpha {
            e.push(("diag.alpha", format!("{a:?}")));
        }
        if let Some((a, b)) = self.diag.fit_window {
            e.push(("diag.fit_window", format!("{a:?}, {b:?}")));
        }
        if let Some(d) = &self.out.dir {
            e.push(("out.dir", d.clone()));
        }
        e.push(("out.checkpoint_every", self.out.checkpoint_every.to_string()));
        e
    }

    /// SHA-256 of the canonical text without `time.t_end` and `out.*`, so a
    /// checkpoint can be resumed with a later end time or another output path.
    pub fn resume_hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.entries() {
            if k == "time.t_end" || k.starts_with("out.") {
                continue;
            }
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file_and_round_trips() {
        let text = "\
# standard ring
grid.nr = 32
grid.nz = 64
grid.r_max = 3
grid.z_min = -3
grid.z_max = 3
time.t_end = 0.5   # short
time.cfl = 0.4
fluid.m = 0.5
fluid.M = 2
init.family = vortex_ring
init.density_family = off_axis_blob
init.epsilon = 0.2
init.blob_center = 1.0, 0.5
diag.fit_window = 1, 5
solver.diffusion_mode = explicit
";
        let c = SimConfig::parse(text).unwrap();
        assert_eq!(c.grid.nr, 32);
        assert_eq!(c.time.cfl, 0.4);
        assert_eq!(c.init.blob_center, (1.0, 0.5));
        assert_eq!(c.diag.fit_window, Some((1.0, 5.0)));
        assert_eq!(c.solver.diffusion_mode, DiffusionMode::Explicit);
        assert_eq!(SimConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = SimConfig::parse("grid.nr = 8\n\ngrid.nrr = 8\n").unwrap_err();
        match err {
            Error::Config { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("grid.nrr"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SimConfig::parse("grid.nr = -1").is_err());
        assert!(SimConfig::parse("time.cfl = 0.9").is_err());
        assert!(SimConfig::parse("fluid.m = 1.5").is_err());
        assert!(SimConfig::parse("init.p_target = 2").is_err());
        assert!(SimConfig::parse("grid.nr = 8\ngrid.nr = 9").is_err());
        assert!(SimConfig::parse("solver.diffusion_mode = magic").is_err());
        assert!(SimConfig::parse("just words").is_err());
    }

    #[test]
    fn hash_ignores_end_time_and_output() {
        let a = SimConfig::default();
        let mut b = a.clone();
        b.time.t_end = 99.0;
        b.out.dir = Some("x".into());
        assert_eq!(a.resume_hash(), b.resume_hash());
        b.grid.nr = 64;
        assert_ne!(a.resume_hash(), b.resume_hash());
    }

    #[test]
    fn beta_endpoints() {
        assert_eq!(beta(1.0), 0.75);
        assert_eq!(beta(2.0), 0.0);
    }
}
