//! Monitored quantities, the CSV series format, and the post-processing of a
//! series (energy residual, 𝒢₀, Lipschitz integral, decay fits).
//!
//! All norms are per radian: integrals over `r dr dz`, i.e. the ℝ³ norms
//! divided by 2π.

pub mod fourier;
pub mod inequalities;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::beta;
use crate::elliptic::face_density;
use crate::error::{Error, Result};
use crate::field::{ScalarFieldRZ, Staggering, VelocityFieldRZ};
use crate::mesh::{
    apply_laplacian_r, apply_laplacian_z, divergence, gradient, vorticity, vorticity_nodes,
    weighted_inner, weighted_lp_norm, GradientSamples,
};
use crate::state::{compute_a_over_r, compute_gamma, FlowState};

pub use fourier::{
    biot_savart_oracle, biot_savart_oracle_in, low_freq_energy, riesz_identity_residual,
    BiotSavartReport, CartesianBox, VelocitySpectrum,
};
pub use inequalities::{probe_inequalities, InequalityReport, ProbeFamily};

pub const CSV_HEADER: &str = "t,kinetic_energy,grad_u_l2,ur_over_r_l2,gamma_l2,gamma_linf,\
a_over_r_linf,div_linf,energy_residual,grad_u_linf,lipschitz_integral,low_freq_energy,\
rho_min,rho_max";

/// `⟨t⟩ = (1 + t²)^{1/2}`.
pub fn bracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// Quantities kept in memory alongside a record but not written to the CSV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordExtras {
    pub step: u64,
    pub u_l2: f64,
    pub ur_over_r_linf: f64,
    /// `∫₀ᵗ ‖u^r/r‖_{L∞}` by per-step trapezoid.
    pub ur_over_r_integral: f64,
    /// `∫₀ᵗ ‖∇u‖²_{L²}` by per-step trapezoid.
    pub dissipation_integral: f64,
    /// `t⟨t⟩(‖u_t‖² + ‖u‖²_{Ḣ²} + ‖∇Π‖²)`, when a time derivative was available.
    pub higher_order: Option<f64>,
}

/// One sample of the monitored series. The first fourteen fields are the CSV
/// columns; `low_freq_energy` is NaN when the spectral diagnostic is off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub kinetic_energy: f64,
    pub grad_u_l2: f64,
    pub ur_over_r_l2: f64,
    pub gamma_l2: f64,
    pub gamma_linf: f64,
    pub a_over_r_linf: f64,
    pub div_linf: f64,
    pub energy_residual: f64,
    pub grad_u_linf: f64,
    pub lipschitz_integral: f64,
    pub low_freq_energy: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    #[serde(default)]
    pub extras: RecordExtras,
}

/// `½‖√ρ u‖²` with ρ averaged to the faces.
pub fn kinetic_energy(rho: &ScalarFieldRZ, u: &VelocityFieldRZ) -> Result<f64> {
    let rf = face_density(rho)?;
    let e = weighted_triple(&rf.ur, &u.ur) + weighted_triple(&rf.uz, &u.uz);
    Ok(0.5 * e)
}

fn weighted_triple(w: &ScalarFieldRZ, f: &ScalarFieldRZ) -> f64 {
    let g = f.grid();
    let stag = f.staggering();
    let (ni, nj) = f.shape();
    let mut s = 0.0;
    for i in 0..ni {
        for j in 0..nj {
            s += w.get(i, j) * f.get(i, j).powi(2) * stag.weight(g, i, j);
        }
    }
    s
}

pub fn velocity_l2(u: &VelocityFieldRZ) -> f64 {
    (weighted_inner(&u.ur, &u.ur) + weighted_inner(&u.uz, &u.uz)).sqrt()
}

impl DiagnosticsRecord {
    /// Every quantity that depends on the state alone. Time integrals,
    /// the energy residual and the spectral diagnostic are left at zero / NaN
    /// for the caller to fill in.
    pub fn from_state(state: &FlowState) -> Result<Self> {
        state.validate()?;
        let gs = GradientSamples::new(&state.u)?;
        let gamma = compute_gamma(&vorticity(&state.u)?)?;
        let a_over_r = compute_a_over_r(&state.rho)?;
        let div = divergence(&state.u)?;
        Ok(Self {
            t: state.t,
            kinetic_energy: kinetic_energy(&state.rho, &state.u)?,
            grad_u_l2: gs.l2_squared().sqrt(),
            ur_over_r_l2: weighted_inner(&gs.ur_over_r, &gs.ur_over_r).sqrt(),
            gamma_l2: weighted_inner(&gamma, &gamma).sqrt(),
            gamma_linf: gamma.max_abs(),
            a_over_r_linf: a_over_r.max_abs(),
            div_linf: div.max_abs(),
            energy_residual: 0.0,
            grad_u_linf: gs.linf(),
            lipschitz_integral: 0.0,
            low_freq_energy: f64::NAN,
            rho_min: state.rho.min(),
            rho_max: state.rho.max(),
            extras: RecordExtras {
                u_l2: velocity_l2(&state.u),
                ur_over_r_linf: gs.ur_over_r.max_abs(),
                ..RecordExtras::default()
            },
        })
    }

    fn columns(&self) -> [f64; 14] {
        [
            self.t,
            self.kinetic_energy,
            self.grad_u_l2,
            self.ur_over_r_l2,
            self.gamma_l2,
            self.gamma_linf,
            self.a_over_r_linf,
            self.div_linf,
            self.energy_residual,
            self.grad_u_linf,
            self.lipschitz_integral,
            self.low_freq_energy,
            self.rho_min,
            self.rho_max,
        ]
    }

    fn from_columns(c: &[f64; 14]) -> Self {
        Self {
            t: c[0],
            kinetic_energy: c[1],
            grad_u_l2: c[2],
            ur_over_r_l2: c[3],
            gamma_l2: c[4],
            gamma_linf: c[5],
            a_over_r_linf: c[6],
            div_linf: c[7],
            energy_residual: c[8],
            grad_u_linf: c[9],
            lipschitz_integral: c[10],
            low_freq_energy: c[11],
            rho_min: c[12],
            rho_max: c[13],
            extras: RecordExtras::default(),
        }
    }
}

/// `‖u_t‖² + ‖L u‖² + ‖∇Π‖²`, with `u_t` the difference quotient against the
/// previous velocity and `L` the vector Laplacian (which for divergence-free
/// fields has the norm of the Hessian).
pub fn higher_order_norms(state: &FlowState, previous: &VelocityFieldRZ, dt: f64) -> Result<f64> {
    let g = state.grid();
    let mut ut = state.u.clone();
    ut.axpy(-1.0, previous);
    ut.scale(1.0 / dt);
    let mut lur = ScalarFieldRZ::zeros(g, Staggering::RFace);
    apply_laplacian_r(state.u.ur.values(), lur.values_mut(), g, 0.0, 1.0);
    let mut luz = ScalarFieldRZ::zeros(g, Staggering::ZFace);
    apply_laplacian_z(state.u.uz.values(), luz.values_mut(), g, 0.0, 1.0);
    let lu = VelocityFieldRZ::new(lur, luz)?;
    let gp = gradient(&state.pi)?;
    Ok(velocity_l2(&ut).powi(2) + velocity_l2(&lu).powi(2) + velocity_l2(&gp).powi(2))
}

fn trapezoid(t: &[f64], f: &[f64]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(t.len());
    let mut s = 0.0;
    for k in 0..t.len() {
        if k > 0 {
            s += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
        }
        acc.push(s);
    }
    acc
}

/// `(½‖√ρu(t)‖² + ∫₀ᵗ‖∇u‖² − ½‖√ρ₀u₀‖²) / ½‖√ρ₀u₀‖²` with the dissipation
/// integrated by trapezoid over the samples. Zero initial energy gives the
/// absolute residual.
pub fn energy_residual(series: &[DiagnosticsRecord]) -> Result<Vec<f64>> {
    let first = series
        .first()
        .ok_or_else(|| Error::Invalid("energy residual of an empty series".into()))?;
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let d: Vec<f64> = series.iter().map(|r| r.grad_u_l2.powi(2)).collect();
    let diss = trapezoid(&t, &d);
    let e0 = first.kinetic_energy;
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    Ok(series
        .iter()
        .zip(diss)
        .map(|(r, dv)| (r.kinetic_energy + dv - e0) / scale)
        .collect())
}

/// Running `∫₀ᵗ ‖∇u‖_{L∞}` by trapezoid over the samples.
pub fn lipschitz_running(series: &[DiagnosticsRecord]) -> Vec<f64> {
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let f: Vec<f64> = series.iter().map(|r| r.grad_u_linf).collect();
    trapezoid(&t, &f)
}

/// Total `∫ ‖∇u‖_{L∞} dt` over the series (0 for fewer than two samples).
pub fn lipschitz_integral(series: &[DiagnosticsRecord]) -> f64 {
    lipschitz_running(series).last().copied().unwrap_or(0.0)
}

/// Running `∫₀ᵗ max|u^r/r|` by trapezoid over the samples.
pub fn ur_over_r_running(series: &[DiagnosticsRecord]) -> Vec<f64> {
    let t: Vec<f64> = series.iter().map(|r| r.t).collect();
    let f: Vec<f64> = series.iter().map(|r| r.extras.ur_over_r_linf).collect();
    trapezoid(&t, &f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G0Report {
    /// `exp(‖u₀‖²(1 + ‖u₀‖⁶))(‖u₀‖²_{H¹} + ‖u₀^r/r‖² + 2‖Γ₀‖²)` with C = 1.
    pub g0: f64,
    pub u0_h1: f64,
    pub u0_ur_over_r_l2: f64,
    pub gamma0_l2: f64,
    /// `(ln(‖Γ₀‖² / (2‖a₀/r‖²_{L∞} 𝒢₀)) / (2‖Γ₀‖))^{4/3}` with C = 1; informational,
    /// `None` when the logarithm is not positive or an ingredient vanishes.
    pub t1: Option<f64>,
}

pub fn compute_g0(initial: &DiagnosticsRecord) -> G0Report {
    let u2 = initial.extras.u_l2.powi(2);
    let h1_sq = u2 + initial.grad_u_l2.powi(2);
    let g0 = (u2 * (1.0 + u2.powi(3))).exp()
        * (h1_sq + initial.ur_over_r_l2.powi(2) + 2.0 * initial.gamma_l2.powi(2));
    let gam = initial.gamma_l2;
    let a = initial.a_over_r_linf;
    let t1 = if gam > 0.0 && a > 0.0 && g0 > 0.0 {
        let l = (gam * gam / (2.0 * a * a * g0)).ln();
        (l > 0.0).then(|| (l / (2.0 * gam)).powf(4.0 / 3.0))
    } else {
        None
    };
    G0Report {
        g0,
        u0_h1: h1_sq.sqrt(),
        u0_ur_over_r_l2: initial.ur_over_r_l2,
        gamma0_l2: gam,
        t1,
    }
}

/// `‖ω‖_{L^q} / ‖∇u‖_{L^q}`; `None` marks the 0/0 case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    pub q2: Option<f64>,
    pub q4: Option<f64>,
}

/// Compares the vorticity with the full 3-D velocity gradient (including the
/// `u^r/r` angular entry). At `q = 2` both sides use the sampling points of
/// the viscous stencils; at `q = 4` every entry is averaged to cell centers.
pub fn norm_equivalence_check(u: &VelocityFieldRZ) -> Result<NormEquivalence> {
    let gs = GradientSamples::new(u)?;
    let wn = vorticity_nodes(u)?;
    let grad2 = gs.l2_squared();
    let omega2 = weighted_inner(&wn, &wn);
    let q2 = safe_ratio(omega2.sqrt(), grad2.sqrt());

    let g = u.grid();
    let omega_c = vorticity(u)?;
    let mut grad_c = ScalarFieldRZ::zeros(g, Staggering::Center);
    for i in 0..g.nr {
        for j in 0..g.nz {
            let node_avg = |f: &ScalarFieldRZ| {
                0.25 * (f.get(i, j) + f.get(i + 1, j) + f.get(i, j + 1) + f.get(i + 1, j + 1))
            };
            let ang = 0.5 * (gs.ur_over_r.get(i, j) + gs.ur_over_r.get(i + 1, j));
            let s = gs.dr_ur.get(i, j).powi(2)
                + gs.dz_uz.get(i, j).powi(2)
                + ang * ang
                + node_avg(&gs.dz_ur).powi(2)
                + node_avg(&gs.dr_uz).powi(2);
            grad_c.set(i, j, s.sqrt());
        }
    }
    let q4 = safe_ratio(weighted_lp_norm(&omega_c, 4.0), weighted_lp_norm(&grad_c, 4.0));
    Ok(NormEquivalence { q2, q4 })
}

fn safe_ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// One point of a decay series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub t: f64,
    pub u_sq: f64,
    pub grad_sq: f64,
    pub higher: Option<f64>,
}

impl DecaySample {
    pub fn from_record(r: &DiagnosticsRecord) -> Self {
        Self {
            t: r.t,
            u_sq: r.extras.u_l2.powi(2),
            grad_sq: r.grad_u_l2.powi(2),
            higher: r.extras.higher_order,
        }
    }

    /// From a CSV row, where only `½‖√ρu‖²` is available: `2·kinetic_energy`
    /// stands in for `‖u‖²` (equal for ρ ≡ 1, equivalent within [m, M]).
    pub fn from_csv_row(r: &DiagnosticsRecord) -> Self {
        Self {
            t: r.t,
            u_sq: 2.0 * r.kinetic_energy,
            grad_sq: r.grad_u_l2.powi(2),
            higher: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub p: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub slope_u: f64,
    pub slope_grad: f64,
    pub slope_higher: Option<f64>,
    /// `−2β(p)`
    pub reference_u: f64,
    /// `−1 − 2β(p)`
    pub reference_grad: f64,
    /// `−2β(p)` for `t⟨t⟩(‖u_t‖² + ‖u‖²_{Ḣ²} + ‖∇Π‖²)`
    pub reference_higher: f64,
    /// Set when the window spans less than a decade of ⟨t⟩.
    pub warning: Option<String>,
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares slopes of the logarithms against `log⟨t⟩` over samples with
/// `t ∈ [window.0, window.1]`.
pub fn decay_fit(series: &[DecaySample], window: (f64, f64), p: f64) -> Result<DecayFit> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Invalid(format!("p = {p} must lie in [1, 2]")));
    }
    let pts: Vec<&DecaySample> = series
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1 && s.u_sq > 0.0 && s.grad_sq > 0.0)
        .collect();
    if pts.len() < 2 {
        return Err(Error::Invalid(format!(
            "decay fit needs at least two positive samples in [{}, {}], found {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    let x: Vec<f64> = pts.iter().map(|s| bracket(s.t).ln()).collect();
    let yu: Vec<f64> = pts.iter().map(|s| s.u_sq.ln()).collect();
    let yg: Vec<f64> = pts.iter().map(|s| s.grad_sq.ln()).collect();
    let slope_higher = if pts.iter().all(|s| s.higher.is_some_and(|h| h > 0.0)) {
        let yh: Vec<f64> = pts.iter().map(|s| s.higher.unwrap().ln()).collect();
        Some(ls_slope(&x, &yh))
    } else {
        None
    };
    let span = x.last().unwrap() - x.first().unwrap();
    let warning = (span < std::f64::consts::LN_10).then(|| {
        format!(
            "window covers a factor {:.2} in <t>, less than a decade; slopes are indicative only",
            span.exp()
        )
    });
    let b = beta(p);
    Ok(DecayFit {
        p,
        window,
        points: pts.len(),
        slope_u: ls_slope(&x, &yu),
        slope_grad: ls_slope(&x, &yg),
        slope_higher,
        reference_u: -2.0 * b,
        reference_grad: -1.0 - 2.0 * b,
        reference_higher: -2.0 * b,
        warning,
    })
}

/// The CSV text of a series, one row per record, values in `{:.16e}`.
pub fn csv_string(series: &[DiagnosticsRecord]) -> String {
    let mut s = String::with_capacity(64 + series.len() * 14 * 24);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in series {
        append_csv_row(&mut s, r);
    }
    s
}

pub fn append_csv_row(s: &mut String, r: &DiagnosticsRecord) {
    for (k, v) in r.columns().iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s.push('\n');
}

pub fn write_csv(path: &Path, series: &[DiagnosticsRecord]) -> Result<()> {
    std::fs::write(path, csv_string(series))?;
    Ok(())
}

/// Parses a series written by [`csv_string`]. Rows are numbered from 1 for
/// the header; an input without data rows is rejected.
pub fn parse_csv(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        row: 0,
        message: "empty CSV".into(),
    })?;
    if header.trim() != CSV_HEADER {
        return Err(Error::Parse {
            row: 1,
            message: format!("unexpected header `{}`", header.trim()),
        });
    }
    let mut out = Vec::new();
    for (k, line) in lines {
        let row = k + 1;
        let vals: Vec<&str> = line.trim().split(',').collect();
        if vals.len() != 14 {
            return Err(Error::Parse {
                row,
                message: format!("expected 14 fields, found {}", vals.len()),
            });
        }
        let mut c = [0.0; 14];
        for (slot, v) in c.iter_mut().zip(&vals) {
            *slot = v.trim().parse::<f64>().map_err(|e| Error::Parse {
                row,
                message: format!("`{v}`: {e}"),
            })?;
        }
        out.push(DiagnosticsRecord::from_columns(&c));
    }
    if out.is_empty() {
        return Err(Error::Parse {
            row: 1,
            message: "no data rows".into(),
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    parse_csv(&std::fs::read_to_string(path)?)
}
