//! Simulation state, initial-data families and the textual grid dump format.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elliptic::{velocity_from_stream, EllipticSolvers, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::field::{ScalarFieldRZ, Staggering, VelocityFieldRZ};
use crate::mesh::{vorticity, weighted_inner, weighted_l2_norm, GradientSamples, GridSpec};

/// Gaussian envelopes are cut to exactly zero below this value, so initial
/// data has compact support.
pub const GAUSSIAN_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub rho: ScalarFieldRZ,
    pub u: VelocityFieldRZ,
    pub pi: ScalarFieldRZ,
}

impl FlowState {
    pub fn grid(&self) -> &GridSpec {
        self.rho.grid()
    }

    pub fn validate(&self) -> Result<()> {
        self.rho.expect_staggering(Staggering::Center)?;
        self.pi.expect_staggering(Staggering::Center)?;
        self.u.validate()?;
        self.rho.same_grid(&self.u.ur)?;
        self.rho.same_grid(&self.pi)?;
        self.rho.check_finite("rho")?;
        self.pi.check_finite("pi")?;
        self.u.check_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Γ₀ = A [g(r − r₀, z) + g(r + r₀, z)] with g = exp(−(x² + z²)/σ²);
    /// the mirrored image makes Γ₀ even in r.
    VortexRing,
    /// Γ₀ = A (z/σ) exp(−(r² + z²)/σ²), odd in z and centered on the axis.
    ShearPuff,
    /// Γ₀ read from a cell-centered grid dump.
    Custom,
}

impl Family {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "vortex_ring" => Some(Family::VortexRing),
            "shear_puff" => Some(Family::ShearPuff),
            "custom" | "custom-from-file" => Some(Family::Custom),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityFamily {
    Uniform,
    /// a₀ = 1/ρ₀ − 1 = ε exp(−((r − r_b)² + (z − z_b)²)/w²), cut at [`GAUSSIAN_CUTOFF`].
    OffAxisBlob,
}

impl DensityFamily {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(DensityFamily::Uniform),
            "off_axis_blob" | "off-axis-blob" => Some(DensityFamily::OffAxisBlob),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub family: Family,
    pub amplitude: f64,
    pub r0: f64,
    pub sigma: f64,
    pub density_family: DensityFamily,
    pub epsilon: f64,
    pub blob_center: (f64, f64),
    pub blob_width: f64,
    /// Γ₀ dump for [`Family::Custom`].
    pub file: Option<String>,
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            family: Family::VortexRing,
            amplitude: 1.0,
            r0: 1.0,
            sigma: 0.25,
            density_family: DensityFamily::Uniform,
            epsilon: 0.0,
            blob_center: (1.0, 0.0),
            blob_width: 0.15,
            file: None,
        }
    }
}

fn cut(v: f64) -> f64 {
    if v < GAUSSIAN_CUTOFF {
        0.0
    } else {
        v
    }
}

impl InitialData {
    /// Closed-form Γ₀ for the analytic families.
    pub fn gamma0(&self, r: f64, z: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        match self.family {
            Family::VortexRing => {
                let a = cut((-((r - self.r0).powi(2) + z * z) / s2).exp());
                let b = cut((-((r + self.r0).powi(2) + z * z) / s2).exp());
                self.amplitude * (a + b)
            }
            Family::ShearPuff => {
                self.amplitude * (z / self.sigma) * cut((-(r * r + z * z) / s2).exp())
            }
            Family::Custom => f64::NAN,
        }
    }

    /// Closed-form a₀ = 1/ρ₀ − 1.
    pub fn a0(&self, r: f64, z: f64) -> f64 {
        match self.density_family {
            DensityFamily::Uniform => 0.0,
            DensityFamily::OffAxisBlob => {
                let (rb, zb) = self.blob_center;
                let w2 = self.blob_width * self.blob_width;
                self.epsilon * cut((-((r - rb).powi(2) + (z - zb).powi(2)) / w2).exp())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::Invalid("init amplitude must be finite".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Invalid(format!("init sigma = {} must be > 0", self.sigma)));
        }
        if self.density_family == DensityFamily::OffAxisBlob {
            if !(self.blob_width > 0.0) {
                return Err(Error::Invalid("blob width must be > 0".into()));
            }
            if !(self.epsilon > -1.0) {
                return Err(Error::Invalid(format!(
                    "epsilon = {} makes the density non-positive",
                    self.epsilon
                )));
            }
            if self.epsilon != 0.0 && self.a0(0.0, self.blob_center.1) != 0.0 {
                return Err(Error::Invalid(
                    "a0/r unbounded: density blob does not vanish on the axis".into(),
                ));
            }
        }
        Ok(())
    }
}

fn boundary_max(f: &ScalarFieldRZ) -> f64 {
    let (ni, nj) = f.shape();
    let mut m: f64 = 0.0;
    for i in 0..ni {
        m = m.max(f.get(i, 0).abs()).max(f.get(i, nj - 1).abs());
    }
    for j in 0..nj {
        m = m.max(f.get(ni - 1, j).abs());
    }
    m
}

/// Builds the t = 0 state: u₀ is the discrete curl of the stream function of
/// ω₀ = r Γ₀ (sampled at nodes), so it is divergence-free to roundoff.
pub fn make_initial_data(spec: &InitialData, grid: &GridSpec) -> Result<FlowState> {
    grid.validate()?;
    spec.validate()?;
    let omega_nodes = match spec.family {
        Family::Custom => {
            let path = spec
                .file
                .as_ref()
                .ok_or_else(|| Error::Invalid("custom initial data needs init.file".into()))?;
            let gamma = read_grid_file(Path::new(path))?;
            if gamma.grid() != grid {
                return Err(Error::GridMismatch(format!(
                    "{path} holds {:?}, run uses {:?}",
                    gamma.grid(),
                    grid
                )));
            }
            let g = match gamma.staggering() {
                Staggering::Node => gamma,
                Staggering::Center => crate::elliptic::centers_to_interior_nodes(&gamma)?,
                found => {
                    return Err(Error::Staggering {
                        expected: Staggering::Center,
                        found,
                    })
                }
            };
            ScalarFieldRZ::from_fn(grid, Staggering::Node, |r, _| r)
                .values()
                .iter()
                .zip(g.values())
                .map(|(r, gm)| r * gm)
                .collect::<Vec<_>>()
        }
        _ => ScalarFieldRZ::from_fn(grid, Staggering::Node, |r, z| r * spec.gamma0(r, z))
            .into_values(),
    };
    let omega_nodes = ScalarFieldRZ::from_values(grid, Staggering::Node, omega_nodes)?;
    if boundary_max(&omega_nodes) != 0.0 {
        return Err(Error::Invalid(
            "initial vorticity reaches the domain boundary; enlarge the domain".into(),
        ));
    }
    let (psi, _) = EllipticSolvers::new(grid).solve_stream_function(&omega_nodes, DEFAULT_TOL)?;
    let u = velocity_from_stream(&psi)?;

    let a0 = ScalarFieldRZ::from_fn(grid, Staggering::Center, |r, z| spec.a0(r, z));
    if spec.epsilon != 0.0 && boundary_max(&a0) != 0.0 {
        return Err(Error::Invalid(
            "density blob reaches the domain boundary; enlarge the domain".into(),
        ));
    }
    let rho = a0.map(|a| 1.0 / (1.0 + a));
    Ok(FlowState {
        t: 0.0,
        rho,
        u,
        pi: ScalarFieldRZ::zeros(grid, Staggering::Center),
    })
}

/// `(1/ρ − 1)/r` per cell.
pub fn compute_a_over_r(rho: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    rho.expect_staggering(Staggering::Center)?;
    rho.check_finite("rho")?;
    let g = rho.grid();
    let mut out = ScalarFieldRZ::zeros(g, Staggering::Center);
    for i in 0..g.nr {
        let r = g.r_center(i);
        for j in 0..g.nz {
            let p = rho.get(i, j);
            if p <= 0.0 {
                return Err(Error::Density { i, j, value: p });
            }
            out.set(i, j, (1.0 / p - 1.0) / r);
        }
    }
    Ok(out)
}

/// Γ = ω/r per cell.
pub fn compute_gamma(omega: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    omega.expect_staggering(Staggering::Center)?;
    let g = omega.grid();
    let mut out = ScalarFieldRZ::zeros(g, Staggering::Center);
    for i in 0..g.nr {
        let r = g.r_center(i);
        for j in 0..g.nz {
            out.set(i, j, omega.get(i, j) / r);
        }
    }
    out.check_finite("gamma")?;
    Ok(out)
}

/// Norms of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialNorms {
    pub u_l2: f64,
    pub grad_u_l2: f64,
    pub ur_over_r_l2: f64,
    pub gamma_l2: f64,
    pub a_over_r_linf: f64,
}

impl InitialNorms {
    pub fn of(state: &FlowState) -> Result<Self> {
        let u_l2 = (weighted_l2_norm(&state.u.ur)?.powi(2) + weighted_l2_norm(&state.u.uz)?.powi(2))
            .sqrt();
        let gs = GradientSamples::new(&state.u)?;
        let gamma = compute_gamma(&vorticity(&state.u)?)?;
        Ok(Self {
            u_l2,
            grad_u_l2: gs.l2_squared().sqrt(),
            ur_over_r_l2: weighted_l2_norm(&gs.ur_over_r)?,
            gamma_l2: weighted_l2_norm(&gamma)?,
            a_over_r_linf: compute_a_over_r(&state.rho)?.max_abs(),
        })
    }
}

/// `‖Γ₀‖_{L²}` of the closed-form data, by the midpoint rule on the cell
/// centers of `grid` (spectrally accurate for the Gaussian families). The
/// norm in [`InitialNorms`] instead uses Γ of the discrete curl of u₀, which
/// differs by the O(h²) error of the vorticity stencil. `None` for custom data.
pub fn closed_form_gamma_l2(spec: &InitialData, grid: &GridSpec) -> Option<f64> {
    if spec.family == Family::Custom {
        return None;
    }
    let g = ScalarFieldRZ::from_fn(grid, Staggering::Center, |r, z| spec.gamma0(r, z));
    Some(weighted_inner(&g, &g).sqrt())
}

/// Writes a field as a one-line header `nr nz r_max z_min z_max staggering`
/// followed by one value per line in row-major order. Floats use the
/// shortest representation that parses back to the same bits.
pub fn write_grid_file(path: &Path, f: &ScalarFieldRZ) -> Result<()> {
    std::fs::write(path, grid_file_string(f))?;
    Ok(())
}

pub fn grid_file_string(f: &ScalarFieldRZ) -> String {
    let g = f.grid();
    let mut s = String::with_capacity(f.values().len() * 24 + 64);
    let _ = writeln!(
        s,
        "{} {} {:?} {:?} {:?} {}",
        g.nr,
        g.nz,
        g.r_max,
        g.z_min,
        g.z_max,
        f.staggering().name()
    );
    for v in f.values() {
        let _ = writeln!(s, "{v:?}");
    }
    s
}

pub fn read_grid_file(path: &Path) -> Result<ScalarFieldRZ> {
    let text = std::fs::read_to_string(path)?;
    parse_grid_file(&text)
}

pub fn parse_grid_file(text: &str) -> Result<ScalarFieldRZ> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse {
        row: 1,
        message: "empty grid file".into(),
    })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let bad = |m: String| Error::Parse { row: 1, message: m };
    if h.len() != 6 {
        return Err(bad(format!("header needs 6 fields, got {}", h.len())));
    }
    let nr = h[0].parse().map_err(|e| bad(format!("nr: {e}")))?;
    let nz = h[1].parse().map_err(|e| bad(format!("nz: {e}")))?;
    let r_max = h[2].parse().map_err(|e| bad(format!("r_max: {e}")))?;
    let z_min = h[3].parse().map_err(|e| bad(format!("z_min: {e}")))?;
    let z_max = h[4].parse().map_err(|e| bad(format!("z_max: {e}")))?;
    let stag = Staggering::parse(h[5]).ok_or_else(|| bad(format!("unknown staggering {}", h[5])))?;
    let grid = GridSpec::new(nr, nz, r_max, z_min, z_max)?;
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(line.parse::<f64>().map_err(|e| Error::Parse {
            row: k + 2,
            message: format!("{e}: {line:?}"),
        })?);
    }
    ScalarFieldRZ::from_values(&grid, stag, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::divergence;

    fn small_grid() -> GridSpec {
        GridSpec::new(32, 64, 3.0, -3.0, 3.0).unwrap()
    }

    #[test]
    fn zero_amplitude_gives_rest_state() {
        let spec = InitialData {
            amplitude: 0.0,
            ..Default::default()
        };
        let s = make_initial_data(&spec, &small_grid()).unwrap();
        assert_eq!(s.u.max_abs(), 0.0);
        let n = InitialNorms::of(&s).unwrap();
        assert_eq!(n.u_l2, 0.0);
        assert_eq!(n.gamma_l2, 0.0);
        assert_eq!(n.a_over_r_linf, 0.0);
    }

    #[test]
    fn ring_is_divergence_free_with_expected_symmetry() {
        let g = small_grid();
        let s = make_initial_data(&InitialData::default(), &g).unwrap();
        assert!(divergence(&s.u).unwrap().max_abs() < 1e-12);
        // u^r odd, u^z even in z
        for i in 0..=g.nr {
            for j in 0..g.nz {
                let (a, b) = (s.u.ur.get(i, j), s.u.ur.get(i, g.nz - 1 - j));
                assert!((a + b).abs() < 1e-12 * (1.0 + a.abs()));
            }
        }
        for i in 0..g.nr {
            for j in 0..=g.nz {
                let (a, b) = (s.u.uz.get(i, j), s.u.uz.get(i, g.nz - j));
                assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn a_over_r_formulas() {
        let g = small_grid();
        let one = ScalarFieldRZ::constant(&g, Staggering::Center, 1.0);
        assert_eq!(compute_a_over_r(&one).unwrap().max_abs(), 0.0);
        let two = ScalarFieldRZ::constant(&g, Staggering::Center, 2.0);
        let q = compute_a_over_r(&two).unwrap();
        for i in 0..g.nr {
            assert_eq!(q.get(i, 3), -0.5 / g.r_center(i));
        }
        let mut bad = one.clone();
        bad.set(2, 2, 0.0);
        assert!(matches!(compute_a_over_r(&bad), Err(Error::Density { i: 2, j: 2, .. })));
    }

    #[test]
    fn gamma_divides_by_radius() {
        let g = small_grid();
        let w = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, z| r * (-r * r - z * z).exp());
        let gm = compute_gamma(&w).unwrap();
        for i in 0..g.nr {
            for j in 0..g.nz {
                let (r, z) = Staggering::Center.coords(&g, i, j);
                assert!((gm.get(i, j) - (-r * r - z * z).exp()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn blob_touching_axis_is_rejected() {
        let spec = InitialData {
            density_family: DensityFamily::OffAxisBlob,
            epsilon: 0.1,
            blob_center: (0.2, 0.0),
            blob_width: 0.5,
            ..Default::default()
        };
        let err = make_initial_data(&spec, &small_grid()).unwrap_err();
        assert!(err.to_string().contains("a0/r unbounded"), "{err}");
    }

    #[test]
    fn grid_file_round_trip_is_bit_exact() {
        let g = GridSpec::new(5, 7, 1.0 / 3.0, -0.1, 2.0 / 7.0).unwrap();
        let f = ScalarFieldRZ::from_fn(&g, Staggering::ZFace, |r, z| (r * 17.0).sin() / (z + 3.0));
        let text = grid_file_string(&f);
        let back = parse_grid_file(&text).unwrap();
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.staggering(), f.staggering());
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn grid_file_errors_name_the_row() {
        let err = parse_grid_file("4 4 1 0 1 center\n1\nx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err}");
        assert!(parse_grid_file("").is_err());
    }
}
