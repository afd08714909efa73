//! Axisymmetric MAC grid and the discrete cylindrical operators.
//!
//! Scalars sit at cell centers `r_i = (i + 1/2) dr`, so no scalar sample lies
//! on the axis. u^r lives on r-faces `r = i dr` (the `i = 0` face is the axis,
//! pinned to zero) and u^z on z-faces. All quadratures use the midpoint rule
//! with the measure `r dr dz` (volume per radian).
//!
//! Velocity components that are not stored on a wall obey homogeneous
//! Dirichlet conditions through odd ghost reflection; stored wall samples are
//! used directly as Dirichlet data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarFieldRZ, Staggering, VelocityFieldRZ};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nr: usize,
    pub nz: usize,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl GridSpec {
    pub fn new(nr: usize, nz: usize, r_max: f64, z_min: f64, z_max: f64) -> Result<Self> {
        let g = Self {
            nr,
            nz,
            r_max,
            z_min,
            z_max,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nr < 4 || self.nz < 4 {
            return Err(Error::InvalidGrid(format!(
                "need nr >= 4 and nz >= 4, got {}x{}",
                self.nr, self.nz
            )));
        }
        if !(self.r_max > 0.0) || !self.r_max.is_finite() {
            return Err(Error::InvalidGrid(format!("r_max = {} must be > 0", self.r_max)));
        }
        if !(self.z_min < self.z_max) || !self.z_min.is_finite() || !self.z_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need z_min < z_max, got [{}, {}]",
                self.z_min, self.z_max
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn dr(&self) -> f64 {
        self.r_max / self.nr as f64
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / self.nz as f64
    }

    #[inline]
    pub fn r_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }

    #[inline]
    pub fn r_face(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }

    #[inline]
    pub fn z_center(&self, j: usize) -> f64 {
        self.z_min + (j as f64 + 0.5) * self.dz()
    }

    #[inline]
    pub fn z_face(&self, j: usize) -> f64 {
        self.z_min + j as f64 * self.dz()
    }

    /// Same physical domain with every cell split in two along each axis.
    pub fn refined(&self) -> Self {
        Self {
            nr: 2 * self.nr,
            nz: 2 * self.nz,
            ..self.clone()
        }
    }
}

/// Cell weights `r_i dr dz` of the cell-centered quadrature.
#[derive(Debug, Clone)]
pub struct WeightedMeasure {
    weights: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(grid: &GridSpec) -> Self {
        let mut weights = Vec::with_capacity(grid.nr * grid.nz);
        for i in 0..grid.nr {
            let w = grid.r_center(i) * grid.dr() * grid.dz();
            weights.extend(std::iter::repeat(w).take(grid.nz));
        }
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Equals `r_max^2 (z_max - z_min) / 2` up to roundoff.
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `(Σ f² w)^{1/2}` with the quadrature weights of the field's staggering.
pub fn weighted_l2_norm(f: &ScalarFieldRZ) -> Result<f64> {
    f.check_finite("field")?;
    Ok(weighted_inner(f, f).sqrt())
}

pub fn weighted_inner(f: &ScalarFieldRZ, g: &ScalarFieldRZ) -> f64 {
    debug_assert_eq!(f.staggering(), g.staggering());
    let grid = f.grid();
    let stag = f.staggering();
    let (ni, nj) = f.shape();
    let (fv, gv) = (f.values(), g.values());
    let mut s = 0.0;
    for i in 0..ni {
        for j in 0..nj {
            let k = i * nj + j;
            s += fv[k] * gv[k] * stag.weight(grid, i, j);
        }
    }
    s
}

/// Weighted L^p norm for finite p.
pub fn weighted_lp_norm(f: &ScalarFieldRZ, p: f64) -> f64 {
    let grid = f.grid();
    let stag = f.staggering();
    let (ni, nj) = f.shape();
    let mut s = 0.0;
    for i in 0..ni {
        for j in 0..nj {
            s += f.get(i, j).abs().powf(p) * stag.weight(grid, i, j);
        }
    }
    s.powf(1.0 / p)
}

/// Cell-centered `(1/r) ∂_r(r u^r) + ∂_z u^z`.
pub fn divergence(u: &VelocityFieldRZ) -> Result<ScalarFieldRZ> {
    u.validate()?;
    let g = u.grid();
    let (dr, dz) = (g.dr(), g.dz());
    let mut out = ScalarFieldRZ::zeros(g, Staggering::Center);
    let (ur, uz) = (u.ur.values(), u.uz.values());
    let nz = g.nz;
    let ov = out.values_mut();
    for i in 0..g.nr {
        let (rm, rp, rc) = (g.r_face(i), g.r_face(i + 1), g.r_center(i));
        for j in 0..nz {
            let flux_r = rp * ur[(i + 1) * nz + j] - rm * ur[i * nz + j];
            let flux_z = uz[i * (nz + 1) + j + 1] - uz[i * (nz + 1) + j];
            ov[i * nz + j] = flux_r / (rc * dr) + flux_z / dz;
        }
    }
    Ok(out)
}

/// Face gradient of a cell-centered scalar; wall and axis faces are zero
/// (homogeneous Neumann for scalars).
pub fn gradient(p: &ScalarFieldRZ) -> Result<VelocityFieldRZ> {
    p.expect_staggering(Staggering::Center)?;
    let g = p.grid();
    let (dr, dz) = (g.dr(), g.dz());
    let mut u = VelocityFieldRZ::zeros(g);
    for i in 1..g.nr {
        for j in 0..g.nz {
            u.ur.set(i, j, (p.get(i, j) - p.get(i - 1, j)) / dr);
        }
    }
    for i in 0..g.nr {
        for j in 1..g.nz {
            u.uz.set(i, j, (p.get(i, j) - p.get(i, j - 1)) / dz);
        }
    }
    Ok(u)
}

#[inline]
fn ur_z_neighbors(u: &VelocityFieldRZ, i: usize, j: usize) -> (f64, f64) {
    let nz = u.grid().nz;
    let above = if j < nz {
        u.ur.get(i, j)
    } else {
        -u.ur.get(i, nz - 1)
    };
    let below = if j > 0 { u.ur.get(i, j - 1) } else { -u.ur.get(i, 0) };
    (below, above)
}

#[inline]
fn uz_r_neighbors(u: &VelocityFieldRZ, i: usize, j: usize) -> (f64, f64) {
    let nr = u.grid().nr;
    let right = if i < nr {
        u.uz.get(i, j)
    } else {
        -u.uz.get(nr - 1, j)
    };
    (u.uz.get(i - 1, j), right)
}

/// ω = ∂_z u^r − ∂_r u^z at cell corners. Axis nodes are zero; wall nodes use
/// the no-slip ghost values.
pub fn vorticity_nodes(u: &VelocityFieldRZ) -> Result<ScalarFieldRZ> {
    u.validate()?;
    let g = u.grid();
    let (dr, dz) = (g.dr(), g.dz());
    let mut w = ScalarFieldRZ::zeros(g, Staggering::Node);
    for i in 1..=g.nr {
        for j in 0..=g.nz {
            let (below, above) = ur_z_neighbors(u, i, j);
            let (left, right) = uz_r_neighbors(u, i, j);
            w.set(i, j, (above - below) / dz - (right - left) / dr);
        }
    }
    Ok(w)
}

/// Averages corner samples to cell centers.
pub fn nodes_to_centers(w: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    w.expect_staggering(Staggering::Node)?;
    let g = w.grid();
    let mut c = ScalarFieldRZ::zeros(g, Staggering::Center);
    for i in 0..g.nr {
        for j in 0..g.nz {
            let s = w.get(i, j) + w.get(i + 1, j) + w.get(i, j + 1) + w.get(i + 1, j + 1);
            c.set(i, j, 0.25 * s);
        }
    }
    Ok(c)
}

/// Cell-centered vorticity (corner values averaged to the center).
pub fn vorticity(u: &VelocityFieldRZ) -> Result<ScalarFieldRZ> {
    nodes_to_centers(&vorticity_nodes(u)?)
}

/// `(1/r)∂_r(r ∂_r f) + ∂²_z f − f/r²` on interior r-faces.
pub fn axis_laplacian_r(f: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    f.expect_staggering(Staggering::RFace)?;
    let g = f.grid();
    if let Some(j) = (0..g.nz).find(|&j| f.get(0, j) != 0.0) {
        return Err(Error::Invalid(format!(
            "u^r-type field has nonzero axis value {} at j={j}",
            f.get(0, j)
        )));
    }
    let mut out = ScalarFieldRZ::zeros(g, Staggering::RFace);
    apply_laplacian_r(f.values(), out.values_mut(), g, 0.0, 1.0);
    Ok(out)
}

/// `(1/r)∂_r(r ∂_r f) + ∂²_z f` on interior z-faces.
pub fn axis_laplacian_z(f: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    f.expect_staggering(Staggering::ZFace)?;
    let g = f.grid();
    let mut out = ScalarFieldRZ::zeros(g, Staggering::ZFace);
    apply_laplacian_z(f.values(), out.values_mut(), g, 0.0, 1.0);
    Ok(out)
}

/// out = diag * f + coef * L_r f on interior r-faces (others untouched).
pub(crate) fn apply_laplacian_r_diag(
    f: &[f64],
    out: &mut [f64],
    g: &GridSpec,
    diag: &[f64],
    coef: f64,
) {
    let nz = g.nz;
    let (dr2, dz2) = (g.dr() * g.dr(), g.dz() * g.dz());
    for i in 1..g.nr {
        let ri = g.r_face(i);
        let (cp, cm) = (g.r_center(i) / (ri * dr2), g.r_center(i - 1) / (ri * dr2));
        let c0 = 1.0 / (ri * ri);
        for j in 0..nz {
            let k = i * nz + j;
            let fc = f[k];
            let radial = cp * (f[k + nz] - fc) - cm * (fc - f[k - nz]) - c0 * fc;
            let up = if j + 1 < nz { f[k + 1] } else { -fc };
            let dn = if j > 0 { f[k - 1] } else { -fc };
            let axial = (up - 2.0 * fc + dn) / dz2;
            out[k] = diag[k] * fc + coef * (radial + axial);
        }
    }
}

pub(crate) fn apply_laplacian_r(f: &[f64], out: &mut [f64], g: &GridSpec, diag: f64, coef: f64) {
    let d = vec![diag; f.len()];
    apply_laplacian_r_diag(f, out, g, &d, coef);
}

/// out = diag * f + coef * L_z f on interior z-faces (others untouched).
pub(crate) fn apply_laplacian_z_diag(
    f: &[f64],
    out: &mut [f64],
    g: &GridSpec,
    diag: &[f64],
    coef: f64,
) {
    let nzf = g.nz + 1;
    let (dr2, dz2) = (g.dr() * g.dr(), g.dz() * g.dz());
    for i in 0..g.nr {
        let rc = g.r_center(i);
        let (cp, cm) = (g.r_face(i + 1) / (rc * dr2), g.r_face(i) / (rc * dr2));
        for j in 1..g.nz {
            let k = i * nzf + j;
            let fc = f[k];
            let right = if i + 1 < g.nr { f[k + nzf] } else { -fc };
            let left = if i > 0 { f[k - nzf] } else { fc };
            let radial = cp * (right - fc) - cm * (fc - left);
            let axial = (f[k + 1] - 2.0 * fc + f[k - 1]) / dz2;
            out[k] = diag[k] * fc + coef * (radial + axial);
        }
    }
}

pub(crate) fn apply_laplacian_z(f: &[f64], out: &mut [f64], g: &GridSpec, diag: f64, coef: f64) {
    let d = vec![diag; f.len()];
    apply_laplacian_z_diag(f, out, g, &d, coef);
}

/// Every first derivative of a velocity field at its natural sampling point,
/// consistent with the viscous stencils: `‖∇u‖²` assembled here equals
/// `−⟨u, L u⟩` exactly for fields vanishing on the walls.
#[derive(Debug, Clone)]
pub struct GradientSamples {
    /// ∂_r u^r at cell centers
    pub dr_ur: ScalarFieldRZ,
    /// ∂_z u^z at cell centers
    pub dz_uz: ScalarFieldRZ,
    /// u^r / r on r-faces (zero on the axis)
    pub ur_over_r: ScalarFieldRZ,
    /// ∂_z u^r at corners
    pub dz_ur: ScalarFieldRZ,
    /// ∂_r u^z at corners
    pub dr_uz: ScalarFieldRZ,
}

impl GradientSamples {
    pub fn new(u: &VelocityFieldRZ) -> Result<Self> {
        u.validate()?;
        let g = u.grid();
        let (dr, dz) = (g.dr(), g.dz());
        let mut dr_ur = ScalarFieldRZ::zeros(g, Staggering::Center);
        let mut dz_uz = ScalarFieldRZ::zeros(g, Staggering::Center);
        for i in 0..g.nr {
            for j in 0..g.nz {
                dr_ur.set(i, j, (u.ur.get(i + 1, j) - u.ur.get(i, j)) / dr);
                dz_uz.set(i, j, (u.uz.get(i, j + 1) - u.uz.get(i, j)) / dz);
            }
        }
        let mut ur_over_r = ScalarFieldRZ::zeros(g, Staggering::RFace);
        for i in 1..=g.nr {
            let r = g.r_face(i);
            for j in 0..g.nz {
                ur_over_r.set(i, j, u.ur.get(i, j) / r);
            }
        }
        let mut dz_ur = ScalarFieldRZ::zeros(g, Staggering::Node);
        let mut dr_uz = ScalarFieldRZ::zeros(g, Staggering::Node);
        for i in 1..=g.nr {
            for j in 0..=g.nz {
                let (below, above) = ur_z_neighbors(u, i, j);
                dz_ur.set(i, j, (above - below) / dz);
                let (left, right) = uz_r_neighbors(u, i, j);
                dr_uz.set(i, j, (right - left) / dr);
            }
        }
        Ok(Self {
            dr_ur,
            dz_uz,
            ur_over_r,
            dz_ur,
            dr_uz,
        })
    }

    /// `‖∇u‖²_{L²}` of the full 3-D velocity gradient (per radian).
    pub fn l2_squared(&self) -> f64 {
        weighted_inner(&self.dr_ur, &self.dr_ur)
            + weighted_inner(&self.dz_uz, &self.dz_uz)
            + weighted_inner(&self.ur_over_r, &self.ur_over_r)
            + weighted_inner(&self.dz_ur, &self.dz_ur)
            + weighted_inner(&self.dr_uz, &self.dr_uz)
    }

    /// Largest entry of the velocity gradient over all sampling points.
    pub fn linf(&self) -> f64 {
        [
            &self.dr_ur,
            &self.dz_uz,
            &self.ur_over_r,
            &self.dz_ur,
            &self.dr_uz,
        ]
        .iter()
        .fold(0.0, |m, f| m.max(f.max_abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(n: usize) -> GridSpec {
        GridSpec::new(n, n, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::new(3, 8, 1.0, 0.0, 1.0).is_err());
        assert!(GridSpec::new(8, 8, 0.0, 0.0, 1.0).is_err());
        assert!(GridSpec::new(8, 8, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn measure_total_is_exact() {
        let g = GridSpec::new(37, 23, 2.5, -1.0, 3.0).unwrap();
        let m = WeightedMeasure::new(&g);
        let exact = 2.5 * 2.5 * 4.0 / 2.0;
        assert!((m.total() - exact).abs() < 1e-12 * exact);
        assert!(m.weights().iter().all(|&w| w > 0.0));
        for stag in [Staggering::RFace, Staggering::ZFace, Staggering::Node] {
            let one = ScalarFieldRZ::constant(&g, stag, 1.0);
            assert!((one.weighted_sum() - exact).abs() < 1e-12 * exact, "{stag:?}");
        }
    }

    #[test]
    fn norm_of_zero_and_one() {
        let g = unit_grid(16);
        let z = ScalarFieldRZ::zeros(&g, Staggering::Center);
        assert_eq!(weighted_l2_norm(&z).unwrap(), 0.0);
        let one = ScalarFieldRZ::constant(&g, Staggering::Center, 1.0);
        assert!((weighted_l2_norm(&one).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn norm_of_r_converges_to_one_half() {
        // ∫∫ r² r dr dz = 1/4 on the unit box.
        let mut prev = f64::NAN;
        for n in [16, 32, 64] {
            let g = unit_grid(n);
            let f = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, _| r);
            let err = (weighted_l2_norm(&f).unwrap() - 0.5).abs();
            if prev.is_finite() {
                let ratio = prev / err;
                assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
            }
            prev = err;
        }
    }

    #[test]
    fn norm_rejects_nan_with_location() {
        let g = unit_grid(8);
        let mut f = ScalarFieldRZ::zeros(&g, Staggering::Center);
        f.set(3, 5, f64::NAN);
        match weighted_l2_norm(&f) {
            Err(Error::NonFinite { i, j, .. }) => assert_eq!((i, j), (3, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn divergence_of_polynomial_stagnation_flow_vanishes() {
        let g = GridSpec::new(8, 8, 1.0, -1.0, 1.0).unwrap();
        let u = VelocityFieldRZ::from_fn(&g, |r, _| r, |_, z| -2.0 * z);
        let d = divergence(&u).unwrap();
        assert!(d.max_abs() < 1e-13, "{}", d.max_abs());
        let d0 = divergence(&VelocityFieldRZ::zeros(&g)).unwrap();
        assert_eq!(d0.max_abs(), 0.0);
    }

    #[test]
    fn divergence_rejects_mismatched_components() {
        let g = unit_grid(8);
        let g2 = unit_grid(16);
        let u = VelocityFieldRZ {
            ur: ScalarFieldRZ::zeros(&g, Staggering::RFace),
            uz: ScalarFieldRZ::zeros(&g2, Staggering::ZFace),
        };
        assert!(matches!(divergence(&u), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn vorticity_of_irrotational_and_sheared_fields() {
        let g = GridSpec::new(8, 8, 1.0, -1.0, 1.0).unwrap();
        let u = VelocityFieldRZ::from_fn(&g, |r, _| -r, |_, z| 2.0 * z);
        let w = vorticity_nodes(&u).unwrap();
        // interior corners only: wall nodes apply the no-slip ghosts
        for i in 1..g.nr {
            for j in 1..g.nz {
                assert!(w.get(i, j).abs() < 1e-12);
            }
        }
        assert_eq!(vorticity(&VelocityFieldRZ::zeros(&g)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn vorticity_of_rz_shear_converges_to_r() {
        // u^r = z r, u^z = −z² gives ω = r.
        let mut prev = f64::NAN;
        for n in [16, 32, 64] {
            let g = GridSpec::new(n, n, 1.0, -1.0, 1.0).unwrap();
            let u = VelocityFieldRZ::from_fn(&g, |r, z| z * r, |_, z| -z * z);
            let w = vorticity(&u).unwrap();
            let mut err: f64 = 0.0;
            for i in 0..n - 1 {
                for j in 1..n - 1 {
                    err = err.max((w.get(i, j) - g.r_center(i)).abs());
                }
            }
            assert!(err < 1e-12, "cell average of a linear node field is exact: {err}");
            prev = err;
        }
        assert!(prev.is_finite());
    }

    #[test]
    fn laplacians_annihilate_and_reproduce_polynomials() {
        let mut prev = f64::NAN;
        for n in [16, 32, 64] {
            let g = GridSpec::new(n, n, 1.0, -1.0, 1.0).unwrap();
            let f = ScalarFieldRZ::from_fn(&g, Staggering::RFace, |r, _| r);
            let l = axis_laplacian_r(&f).unwrap();
            let mut err: f64 = 0.0;
            for i in 1..n {
                for j in 1..n - 1 {
                    err = err.max(l.get(i, j).abs());
                }
            }
            assert!(err < 1e-9, "L_r r = 0 holds discretely: {err}");
            prev = err;

            let f = ScalarFieldRZ::from_fn(&g, Staggering::ZFace, |_, z| z * z);
            let l = axis_laplacian_z(&f).unwrap();
            for i in 0..n - 1 {
                for j in 1..n {
                    assert!((l.get(i, j) - 2.0).abs() < 1e-8);
                }
            }
        }
        assert!(prev.is_finite());
        let g = unit_grid(8);
        assert_eq!(
            axis_laplacian_r(&ScalarFieldRZ::zeros(&g, Staggering::RFace))
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn laplacian_r_rejects_nonzero_axis() {
        let g = unit_grid(8);
        let f = ScalarFieldRZ::constant(&g, Staggering::RFace, 1.0);
        assert!(axis_laplacian_r(&f).is_err());
    }

    #[test]
    fn laplacian_r_second_order_on_smooth_field() {
        // f = r (1 - r) sin(pi z): L_r f = (1 - 4r)/r... computed in closed form below.
        let exact = |r: f64, z: f64| {
            let s = (std::f64::consts::PI * z).sin();
            let p2 = std::f64::consts::PI.powi(2);
            // f = (r - r²) s; f_rr = −2 s; f_r / r = (1 − 2r) s / r; f / r² = (1 − r) s / r
            (-2.0 + (1.0 - 2.0 * r) / r - (1.0 - r) / r - p2 * (r - r * r)) * s
        };
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let g = GridSpec::new(n, n, 1.0, 0.0, 1.0).unwrap();
            let f = ScalarFieldRZ::from_fn(&g, Staggering::RFace, |r, z| {
                (r - r * r) * (std::f64::consts::PI * z).sin()
            });
            let l = axis_laplacian_r(&f).unwrap();
            let mut e = ScalarFieldRZ::zeros(&g, Staggering::RFace);
            for i in 1..n {
                for j in 0..n {
                    let (r, z) = Staggering::RFace.coords(&g, i, j);
                    e.set(i, j, l.get(i, j) - exact(r, z));
                }
            }
            errs.push(weighted_l2_norm(&e).unwrap());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}, errs {errs:?}");
        }
    }

    #[test]
    fn summation_by_parts_holds() {
        let g = GridSpec::new(12, 10, 1.5, -1.0, 1.0).unwrap();
        let f = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, z| (r * 3.0).sin() + z * z);
        let mut u = VelocityFieldRZ::from_fn(&g, |r, z| r * (z + 0.3).cos(), |r, z| (r + z).exp());
        u.pin_boundaries();
        let lhs = weighted_inner(&f, &divergence(&u).unwrap());
        let gf = gradient(&f).unwrap();
        let rhs = weighted_inner(&gf.ur, &u.ur) + weighted_inner(&gf.uz, &u.uz);
        assert!((lhs + rhs).abs() < 1e-12 * (lhs.abs() + 1.0), "{lhs} {rhs}");
    }

    #[test]
    fn dissipation_matches_viscous_operator() {
        let g = GridSpec::new(10, 14, 1.0, -1.0, 1.0).unwrap();
        let mut u = VelocityFieldRZ::from_fn(&g, |r, z| r * (1.0 - z * z), |r, z| (r * z).sin());
        u.pin_boundaries();
        let lr = axis_laplacian_r(&u.ur).unwrap();
        let lz = axis_laplacian_z(&u.uz).unwrap();
        let energy = -(weighted_inner(&u.ur, &lr) + weighted_inner(&u.uz, &lz));
        let grad = GradientSamples::new(&u).unwrap().l2_squared();
        assert!((energy - grad).abs() < 1e-12 * grad, "{energy} vs {grad}");
    }
}
