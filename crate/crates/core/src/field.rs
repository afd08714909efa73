//! Field containers on the staggered (r, z) grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::GridSpec;

/// Where the samples of a field live.
///
/// `Center` holds scalars (density, pressure, Γ, a/r), `RFace` holds u^r,
/// `ZFace` holds u^z and `Node` holds cell corners (stream function, ω).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Staggering {
    Center,
    RFace,
    ZFace,
    Node,
}

impl Staggering {
    pub fn shape(self, grid: &GridSpec) -> (usize, usize) {
        match self {
            Staggering::Center => (grid.nr, grid.nz),
            Staggering::RFace => (grid.nr + 1, grid.nz),
            Staggering::ZFace => (grid.nr, grid.nz + 1),
            Staggering::Node => (grid.nr + 1, grid.nz + 1),
        }
    }

    /// Physical coordinates of sample (i, j).
    pub fn coords(self, grid: &GridSpec, i: usize, j: usize) -> (f64, f64) {
        match self {
            Staggering::Center => (grid.r_center(i), grid.z_center(j)),
            Staggering::RFace => (grid.r_face(i), grid.z_center(j)),
            Staggering::ZFace => (grid.r_center(i), grid.z_face(j)),
            Staggering::Node => (grid.r_face(i), grid.z_face(j)),
        }
    }

    /// Quadrature weight (volume per radian) attached to sample (i, j).
    ///
    /// Samples on a boundary carry half a control volume; the axis carries none.
    pub fn weight(self, grid: &GridSpec, i: usize, j: usize) -> f64 {
        let (ni, nj) = self.shape(grid);
        let (r, _) = self.coords(grid, i, j);
        let mut w = r * grid.dr() * grid.dz();
        let r_staggered = matches!(self, Staggering::RFace | Staggering::Node);
        let z_staggered = matches!(self, Staggering::ZFace | Staggering::Node);
        if r_staggered && i + 1 == ni {
            w *= 0.5;
        }
        if z_staggered && (j == 0 || j + 1 == nj) {
            w *= 0.5;
        }
        w
    }

    pub fn name(self) -> &'static str {
        match self {
            Staggering::Center => "center",
            Staggering::RFace => "r-face",
            Staggering::ZFace => "z-face",
            Staggering::Node => "node",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "center" => Some(Staggering::Center),
            "r-face" => Some(Staggering::RFace),
            "z-face" => Some(Staggering::ZFace),
            "node" => Some(Staggering::Node),
            _ => None,
        }
    }
}

/// Real samples of one quantity at a declared staggering, stored row-major
/// with the z index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldRZ {
    grid: GridSpec,
    stag: Staggering,
    values: Vec<f64>,
}

impl ScalarFieldRZ {
    pub fn zeros(grid: &GridSpec, stag: Staggering) -> Self {
        let (ni, nj) = stag.shape(grid);
        Self {
            grid: grid.clone(),
            stag,
            values: vec![0.0; ni * nj],
        }
    }

    pub fn constant(grid: &GridSpec, stag: Staggering, value: f64) -> Self {
        let mut f = Self::zeros(grid, stag);
        f.values.fill(value);
        f
    }

    /// Samples `f(r, z)` at every location of the staggering.
    pub fn from_fn(grid: &GridSpec, stag: Staggering, f: impl Fn(f64, f64) -> f64) -> Self {
        let (ni, nj) = stag.shape(grid);
        let mut values = Vec::with_capacity(ni * nj);
        for i in 0..ni {
            for j in 0..nj {
                let (r, z) = stag.coords(grid, i, j);
                values.push(f(r, z));
            }
        }
        Self {
            grid: grid.clone(),
            stag,
            values,
        }
    }

    pub fn from_values(grid: &GridSpec, stag: Staggering, values: Vec<f64>) -> Result<Self> {
        let (ni, nj) = stag.shape(grid);
        if values.len() != ni * nj {
            return Err(Error::GridMismatch(format!(
                "{} field needs {} values, got {}",
                stag.name(),
                ni * nj,
                values.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            stag,
            values,
        })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn staggering(&self) -> Staggering {
        self.stag
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.stag.shape(&self.grid)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.shape().1 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.shape().1 + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let nj = self.shape().1;
        self.values[i * nj + j] = v;
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Returns the first non-finite sample as an error.
    pub fn check_finite(&self, name: &str) -> Result<()> {
        let nj = self.shape().1;
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite {
                field: name.to_string(),
                i: k / nj,
                j: k % nj,
            }),
        }
    }

    pub fn expect_staggering(&self, stag: Staggering) -> Result<()> {
        if self.stag == stag {
            Ok(())
        } else {
            Err(Error::Staggering {
                expected: stag,
                found: self.stag,
            })
        }
    }

    pub fn same_grid(&self, other: &ScalarFieldRZ) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            stag: self.stag,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &ScalarFieldRZ) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    /// Weighted sum `Σ f w` with the staggering's quadrature weights.
    pub fn weighted_sum(&self) -> f64 {
        let (ni, nj) = self.shape();
        let mut s = 0.0;
        for i in 0..ni {
            for j in 0..nj {
                s += self.values[i * nj + j] * self.stag.weight(&self.grid, i, j);
            }
        }
        s
    }
}

/// Face-staggered velocity (u^r on r-faces, u^z on z-faces).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFieldRZ {
    pub ur: ScalarFieldRZ,
    pub uz: ScalarFieldRZ,
}

impl VelocityFieldRZ {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            ur: ScalarFieldRZ::zeros(grid, Staggering::RFace),
            uz: ScalarFieldRZ::zeros(grid, Staggering::ZFace),
        }
    }

    pub fn new(ur: ScalarFieldRZ, uz: ScalarFieldRZ) -> Result<Self> {
        ur.expect_staggering(Staggering::RFace)?;
        uz.expect_staggering(Staggering::ZFace)?;
        ur.same_grid(&uz)?;
        Ok(Self { ur, uz })
    }

    pub fn from_fn(
        grid: &GridSpec,
        ur: impl Fn(f64, f64) -> f64,
        uz: impl Fn(f64, f64) -> f64,
    ) -> Self {
        Self {
            ur: ScalarFieldRZ::from_fn(grid, Staggering::RFace, ur),
            uz: ScalarFieldRZ::from_fn(grid, Staggering::ZFace, uz),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.ur.grid()
    }

    /// Verifies staggering and that both components share one grid.
    pub fn validate(&self) -> Result<()> {
        self.ur.expect_staggering(Staggering::RFace)?;
        self.uz.expect_staggering(Staggering::ZFace)?;
        self.ur.same_grid(&self.uz)
    }

    pub fn check_finite(&self) -> Result<()> {
        self.ur.check_finite("u^r")?;
        self.uz.check_finite("u^z")
    }

    /// Zeroes the wall-normal components on the axis and all outer walls.
    pub fn pin_boundaries(&mut self) {
        let g = self.grid().clone();
        for j in 0..g.nz {
            self.ur.set(0, j, 0.0);
            self.ur.set(g.nr, j, 0.0);
        }
        for i in 0..g.nr {
            self.uz.set(i, 0, 0.0);
            self.uz.set(i, g.nz, 0.0);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.ur.max_abs().max(self.uz.max_abs())
    }

    pub fn axpy(&mut self, a: f64, other: &VelocityFieldRZ) {
        self.ur.axpy(a, &other.ur);
        self.uz.axpy(a, &other.uz);
    }

    pub fn scale(&mut self, s: f64) {
        self.ur.scale(s);
        self.uz.scale(s);
    }
}
