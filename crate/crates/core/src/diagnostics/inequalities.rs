//! Empirical constants of three functional inequalities on the family
//! `f = exp(−a r² − b z²)`.
//!
//! Norms are per radian (`r dr dz`) unless noted. The probed ratios are
//!
//! - weighted Gagliardo–Nirenberg: `∫ f⁴ φ r³ dr dz / (‖f‖²(‖f‖ + ‖∂_r f‖)‖∂_z f‖)`,
//!   with `φ` a smooth cut-off equal to 1 on `[0, ½]` and 0 beyond 1;
//! - the planar interpolation bound: `‖f‖_{L⁴} / (‖f‖^{½} ‖∇f‖^{½})` in
//!   `L^p(ℝ², dx dz)` with `f` extended evenly in `x`;
//! - Sobolev–Hardy with `N = 3, k = 2, q = 2, s = 3/2`:
//!   `(∫ |f|³ r^{−3/2} r dr dz)^{1/3} / ‖∇f‖`.
//!
//! Quadrature is the midpoint rule on a grid adapted to `(a, b)`; derivatives
//! are central differences of the samples (even across the axis), and the
//! `r^{−1/2}` singularity is integrated exactly per cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeFamily {
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    /// Cells per length scale `min(a^{−½}, 1)` (and likewise in z).
    pub cells_per_scale: usize,
    /// Amplitude of `f`; zero gives the degenerate all-skipped probe.
    pub amplitude: f64,
}

impl Default for ProbeFamily {
    fn default() -> Self {
        let decades = vec![1e-2, 1e-1, 1.0, 1e1, 1e2];
        Self {
            a_values: decades.clone(),
            b_values: decades,
            cells_per_scale: 16,
            amplitude: 1.0,
        }
    }
}

impl ProbeFamily {
    pub fn refined(&self) -> Self {
        Self {
            cells_per_scale: 2 * self.cells_per_scale,
            ..self.clone()
        }
    }
}

/// Ratios for one member of the family; `None` marks a 0/0 case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeCase {
    pub a: f64,
    pub b: f64,
    pub weighted_gn: Option<f64>,
    pub planar_l4: Option<f64>,
    pub sobolev_hardy: Option<f64>,
}

/// Largest ratio of each inequality over the family (`None` if all skipped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub weighted_gn: Option<f64>,
    pub planar_l4: Option<f64>,
    pub sobolev_hardy: Option<f64>,
    pub cases: Vec<ProbeCase>,
}

/// Smooth cut-off: 1 on `[0, ½]`, 0 on `[1, ∞)`.
pub fn cutoff(r: f64) -> f64 {
    let s = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let x = (1.0 - r) / 0.5;
    if x >= 1.0 {
        1.0
    } else if x <= 0.0 {
        0.0
    } else {
        s(x) / (s(x) + s(1.0 - x))
    }
}

fn ratio(num: f64, den: f64) -> Result<Option<f64>> {
    if !num.is_finite() || !den.is_finite() {
        return Err(Error::NonFinite {
            field: "inequality quadrature".into(),
            i: 0,
            j: 0,
        });
    }
    if den == 0.0 {
        if num == 0.0 {
            return Ok(None);
        }
        return Err(Error::Invalid("inequality ratio with zero denominator".into()));
    }
    Ok(Some(num / den))
}

/// Evaluates the three ratios for `f = A exp(−a r² − b z²)`.
pub fn probe_case(a: f64, b: f64, amplitude: f64, cells_per_scale: usize) -> Result<ProbeCase> {
    if !(a > 0.0 && b > 0.0) || cells_per_scale == 0 {
        return Err(Error::Invalid(format!("probe needs a, b > 0, got ({a}, {b})")));
    }
    let lr = a.sqrt().recip();
    let lz = b.sqrt().recip();
    let dr = lr.min(1.0) / cells_per_scale as f64;
    let dz = lz.min(1.0) / cells_per_scale as f64;
    let nr = ((8.0 * lr).max(1.0) / dr).ceil() as usize;
    let nz = ((8.0 * lz) / dz).ceil() as usize;
    // z cells cover [−nz dz, nz dz]
    let f = |i: isize, j: isize| {
        let i = if i < 0 { -i - 1 } else { i };
        let r = (i as f64 + 0.5) * dr;
        let z = (j as f64 + 0.5) * dz;
        amplitude * (-a * r * r - b * z * z).exp()
    };
    let (mut f2, mut fr2, mut fz2) = (0.0, 0.0, 0.0);
    let mut gn_lhs = 0.0;
    let (mut p2, mut p4, mut pg2) = (0.0, 0.0, 0.0);
    let mut hardy = 0.0;
    for i in 0..nr as isize {
        let r = (i as f64 + 0.5) * dr;
        let phi = cutoff(r);
        let sing = 2.0 * (((i + 1) as f64 * dr).sqrt() - (i as f64 * dr).sqrt());
        for j in -(nz as isize)..nz as isize {
            let v = f(i, j);
            let vr = (f(i + 1, j) - f(i - 1, j)) / (2.0 * dr);
            let vz = (f(i, j + 1) - f(i, j - 1)) / (2.0 * dz);
            let cell = dr * dz;
            f2 += v * v * r * cell;
            fr2 += vr * vr * r * cell;
            fz2 += vz * vz * r * cell;
            gn_lhs += v.powi(4) * phi * r.powi(3) * cell;
            // planar integrals over x ∈ ℝ: twice the half line
            p2 += 2.0 * v * v * cell;
            p4 += 2.0 * v.powi(4) * cell;
            pg2 += 2.0 * (vr * vr + vz * vz) * cell;
            hardy += v.abs().powi(3) * sing * dz;
        }
    }
    let (fl, frl, fzl) = (f2.sqrt(), fr2.sqrt(), fz2.sqrt());
    let grad = (fr2 + fz2).sqrt();
    Ok(ProbeCase {
        a,
        b,
        weighted_gn: ratio(gn_lhs, f2 * (fl + frl) * fzl)?,
        planar_l4: ratio(p4.powf(0.25), p2.powf(0.25) * pg2.powf(0.25))?,
        sobolev_hardy: ratio(hardy.cbrt(), grad)?,
    })
}

/// Sweeps the family and keeps the largest ratio of each inequality.
pub fn probe_inequalities(family: &ProbeFamily) -> Result<InequalityReport> {
    let mut cases = Vec::new();
    for &a in &family.a_values {
        for &b in &family.b_values {
            cases.push(probe_case(a, b, family.amplitude, family.cells_per_scale)?);
        }
    }
    let max_of = |sel: fn(&ProbeCase) -> Option<f64>| {
        cases
            .iter()
            .filter_map(sel)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    };
    Ok(InequalityReport {
        weighted_gn: max_of(|c| c.weighted_gn),
        planar_l4: max_of(|c| c.planar_l4),
        sobolev_hardy: max_of(|c| c.sobolev_hardy),
        cases,
    })
}
