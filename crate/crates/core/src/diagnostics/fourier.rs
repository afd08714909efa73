//! Three-dimensional spectral oracles on a periodic Cartesian box.
//!
//! Axisymmetric fields are embedded into an `n³` box by bilinear interpolation
//! in (r, z), transformed with `rustfft`, and operated on with exact Fourier
//! multipliers. `Δ^{−1}` uses the zero-mean convention (the ξ = 0 mode is
//! dropped); first derivatives drop the Nyquist mode.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::elliptic::{stream_function_velocity, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::field::{ScalarFieldRZ, Staggering, VelocityFieldRZ};

/// A periodic cube of `n³` samples with spacing `h`, centered on the axis at
/// height `z_center`. Sample `k` of every axis sits at `(k − n/2) h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianBox {
    pub n: usize,
    pub h: f64,
    pub z_center: f64,
}

impl CartesianBox {
    pub fn new(n: usize, h: f64, z_center: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::Invalid(format!("cart_n = {n} must be even and >= 8")));
        }
        if !(h > 0.0) || !h.is_finite() || !z_center.is_finite() {
            return Err(Error::Invalid(format!("box spacing {h} must be positive")));
        }
        Ok(Self { n, h, z_center })
    }

    /// Box of side `2·extent` (zero padding to twice the support).
    pub fn padded(n: usize, extent: f64, z_center: f64) -> Result<Self> {
        Self::new(n, 2.0 * extent / n as f64, z_center)
    }

    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.h
    }

    #[inline]
    pub fn z(&self, k: usize) -> f64 {
        self.z_center + self.x(k)
    }

    /// Angular wavenumber of FFT bin `k`.
    #[inline]
    pub fn xi(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let k = k as i64;
        let m = if k <= n / 2 { k } else { k - n };
        2.0 * PI * m as f64 / self.length()
    }

    /// Wavenumber used for first derivatives: the Nyquist bin is zeroed.
    #[inline]
    fn xi_odd(&self, k: usize) -> f64 {
        if k == self.n / 2 {
            0.0
        } else {
            self.xi(k)
        }
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.n + b) * self.n + c
    }
}

/// In-place 3-D FFT; the inverse is normalized by `1/n³`.
fn fft3(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    // contiguous axis
    for line in data.chunks_mut(n) {
        fft.process(line);
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for stride in [n, n * n] {
        for base in 0..n * n {
            // base enumerates the n² lines orthogonal to this axis
            let (hi, lo) = (base / stride, base % stride);
            let start = hi * stride * n + lo;
            for (k, b) in buf.iter_mut().enumerate() {
                *b = data[start + k * stride];
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                data[start + k * stride] = *b;
            }
        }
    }
    if inverse {
        let s = 1.0 / (n * n * n) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Bilinear interpolation of a staggered field at (r, z). Zero outside the
/// cylinder; clamped to the nearest samples near the axis and walls, which is
/// the even extension across the axis for cell-centered data.
pub fn sample_field(f: &ScalarFieldRZ, r: f64, z: f64) -> f64 {
    let g = f.grid();
    if r > g.r_max || z < g.z_min || z > g.z_max {
        return 0.0;
    }
    let (ni, nj) = f.shape();
    let stag = f.staggering();
    let s = match stag {
        Staggering::Center | Staggering::ZFace => r / g.dr() - 0.5,
        Staggering::RFace | Staggering::Node => r / g.dr(),
    };
    let t = match stag {
        Staggering::Center | Staggering::RFace => (z - g.z_min) / g.dz() - 0.5,
        Staggering::ZFace | Staggering::Node => (z - g.z_min) / g.dz(),
    };
    let s = s.clamp(0.0, (ni - 1) as f64);
    let t = t.clamp(0.0, (nj - 1) as f64);
    let i0 = (s.floor() as usize).min(ni - 2);
    let j0 = (t.floor() as usize).min(nj - 2);
    let (fs, ft) = (s - i0 as f64, t - j0 as f64);
    (1.0 - fs) * ((1.0 - ft) * f.get(i0, j0) + ft * f.get(i0, j0 + 1))
        + fs * ((1.0 - ft) * f.get(i0 + 1, j0) + ft * f.get(i0 + 1, j0 + 1))
}

fn embed(bx: &CartesianBox, f: impl Fn(f64, f64) -> f64) -> Vec<Complex64> {
    let n = bx.n;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n * n];
    for a in 0..n {
        let x1 = bx.x(a);
        for b in 0..n {
            let x2 = bx.x(b);
            let r = x1.hypot(x2);
            for c in 0..n {
                out[bx.idx(a, b, c)] = Complex64::new(f(r, bx.z(c)), 0.0);
            }
        }
    }
    out
}

/// True if the embedded samples vanish on every face of the box.
fn clear_of_faces(bx: &CartesianBox, data: &[Complex64]) -> bool {
    let n = bx.n;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let on_face = [a, b, c].iter().any(|&k| k == 0 || k == n - 1);
                if on_face && data[bx.idx(a, b, c)].re != 0.0 {
                    return false;
                }
            }
        }
    }
    true
}

/// Applies a Fourier multiplier `m(ξ₁, ξ₂, ξ₃)` to a spectrum.
fn multiply(
    bx: &CartesianBox,
    spec: &[Complex64],
    m: impl Fn(usize, usize, usize) -> Complex64,
) -> Vec<Complex64> {
    let n = bx.n;
    let mut out = spec.to_vec();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out[bx.idx(a, b, c)] *= m(a, b, c);
            }
        }
    }
    out
}

fn inverse_laplacian(bx: &CartesianBox, a: usize, b: usize, c: usize) -> f64 {
    let k2 = bx.xi(a).powi(2) + bx.xi(b).powi(2) + bx.xi(c).powi(2);
    if k2 == 0.0 {
        0.0
    } else {
        -1.0 / k2
    }
}

fn to_physical(bx: &CartesianBox, mut spec: Vec<Complex64>) -> Vec<f64> {
    fft3(&mut spec, bx.n, true);
    spec.into_iter().map(|v| v.re).collect()
}

/// Support of a cell-centered field: largest r and the z range of the
/// nonzero cells. `None` for an identically zero field.
fn support(f: &ScalarFieldRZ) -> Option<(f64, f64, f64)> {
    let g = f.grid();
    let (mut r_hi, mut z_lo, mut z_hi) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    let mut any = false;
    for i in 0..g.nr {
        for j in 0..g.nz {
            if f.get(i, j) != 0.0 {
                any = true;
                r_hi = r_hi.max(g.r_face(i + 1));
                z_lo = z_lo.min(g.z_face(j));
                z_hi = z_hi.max(g.z_face(j + 1));
            }
        }
    }
    any.then_some((r_hi, z_lo, z_hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiotSavartReport {
    pub cart_n: usize,
    pub box_length: f64,
    /// Relative r-weighted L² mismatch between the spectral right-hand side of
    /// `u^r/r = ∂_zΔ^{−1}Γ − 2(∂_r/r)Δ^{−1}∂_zΔ^{−1}Γ` and the finite-difference
    /// `u^r/r`, over the meridional half-plane within the support of Γ.
    pub identity_residual: f64,
    /// Riesz-transform identity for `W = ∂_zΔ^{−1}Γ`; see [`riesz_identity_residual`].
    pub riesz_residual: f64,
}

/// Samples per support extent in the default oracle box.
pub const SAMPLES_PER_EXTENT: usize = 32;

/// Biot–Savart oracle on the default box: spacing `extent/32`, where `extent`
/// is the larger of the support's diameter and height, so `cart_n` sets the
/// zero-padding factor `cart_n/32` (at least 2, hence `cart_n ≥ 64`).
pub fn biot_savart_oracle(gamma: &ScalarFieldRZ, cart_n: usize) -> Result<BiotSavartReport> {
    gamma.expect_staggering(Staggering::Center)?;
    if cart_n < 2 * SAMPLES_PER_EXTENT {
        return Err(Error::Invalid(format!(
            "cart_n = {cart_n} pads the support less than twofold; use at least {}",
            2 * SAMPLES_PER_EXTENT
        )));
    }
    match support(gamma) {
        None => biot_savart_oracle_in(gamma, &CartesianBox::new(cart_n, 1.0, 0.0)?),
        Some((r_hi, z_lo, z_hi)) => {
            let extent = (2.0 * r_hi).max(z_hi - z_lo);
            let h = extent / SAMPLES_PER_EXTENT as f64;
            biot_savart_oracle_in(gamma, &CartesianBox::new(cart_n, h, 0.5 * (z_lo + z_hi))?)
        }
    }
}

/// Biot–Savart oracle on an explicit box.
pub fn biot_savart_oracle_in(gamma: &ScalarFieldRZ, bx: &CartesianBox) -> Result<BiotSavartReport> {
    gamma.expect_staggering(Staggering::Center)?;
    gamma.check_finite("gamma")?;
    let g = gamma.grid();
    let Some((r_hi, z_lo, z_hi)) = support(gamma) else {
        return Ok(BiotSavartReport {
            cart_n: bx.n,
            box_length: bx.length(),
            identity_residual: 0.0,
            riesz_residual: 0.0,
        });
    };
    for j in 0..g.nz {
        if gamma.get(g.nr - 1, j) != 0.0 {
            return Err(Error::Invalid("Γ reaches the outer wall".into()));
        }
    }
    for i in 0..g.nr {
        if gamma.get(i, 0) != 0.0 || gamma.get(i, g.nz - 1) != 0.0 {
            return Err(Error::Invalid("Γ reaches a z wall".into()));
        }
    }

    let mut spec = embed(bx, |r, z| sample_field(gamma, r, z));
    if !clear_of_faces(bx, &spec) {
        return Err(Error::Invalid(
            "Γ support touches the Cartesian box; periodic images would overlap".into(),
        ));
    }
    fft3(&mut spec, bx.n, false);

    // W = ∂_zΔ^{−1}Γ and B = Δ^{−1}W
    let w_hat = multiply(bx, &spec, |a, b, c| {
        Complex64::new(0.0, bx.xi_odd(c)) * inverse_laplacian(bx, a, b, c)
    });
    drop(spec);
    let w = to_physical(bx, w_hat.clone());
    let d1b = to_physical(
        bx,
        multiply(bx, &w_hat, |a, b, c| {
            Complex64::new(0.0, bx.xi_odd(a)) * inverse_laplacian(bx, a, b, c)
        }),
    );

    // u^r/r from the finite-difference stream function of ω = rΓ
    let omega = ScalarFieldRZ::from_fn(g, Staggering::Center, |r, _| r)
        .values()
        .iter()
        .zip(gamma.values())
        .map(|(r, v)| r * v)
        .collect();
    let omega = ScalarFieldRZ::from_values(g, Staggering::Center, omega)?;
    let u = stream_function_velocity(&omega, DEFAULT_TOL)?;
    let mut ur_over_r = ScalarFieldRZ::zeros(g, Staggering::RFace);
    for i in 1..=g.nr {
        for j in 0..g.nz {
            ur_over_r.set(i, j, u.ur.get(i, j) / g.r_face(i));
        }
    }

    // meridional half-plane x₂ = 0, x₁ > 0, over the support of Γ
    let b0 = bx.n / 2;
    let (mut num, mut den) = (0.0, 0.0);
    for a in b0 + 1..bx.n {
        let x1 = bx.x(a);
        if x1 > r_hi {
            break;
        }
        for c in 0..bx.n {
            let z = bx.z(c);
            if z < z_lo || z > z_hi {
                continue;
            }
            let k = bx.idx(a, b0, c);
            let spectral = w[k] - 2.0 * d1b[k] / x1;
            let fd = sample_field(&ur_over_r, x1, z);
            num += x1 * (spectral - fd).powi(2);
            den += x1 * fd * fd;
        }
    }
    let identity_residual = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    let riesz_residual = riesz_from_spectrum(bx, &w_hat);
    Ok(BiotSavartReport {
        cart_n: bx.n,
        box_length: bx.length(),
        identity_residual,
        riesz_residual,
    })
}

/// Checks `(1/r)∂_rΔ^{−1}W = (x₂²R₁₁W + x₁²R₂₂W − 2x₁x₂R₁₂W)/r²` for an
/// axisymmetric `W(r, z)` embedded in `bx`, with `R_ij = ∂_i∂_jΔ^{−1}`.
///
/// Both sides are evaluated spectrally; the left one as
/// `(x₁∂₁F + x₂∂₂F)/r²` with `F = Δ^{−1}W`. Returns the largest pointwise
/// difference relative to the largest left-hand value, over the points with
/// `r ≥ 4h` inside the central half of the box. Periodic images make `F`
/// slightly non-axisymmetric, which this residual measures; for `W` with
/// rapidly decaying `Δ^{−1}W` it is at roundoff level.
pub fn riesz_identity_residual(bx: &CartesianBox, w: impl Fn(f64, f64) -> f64) -> f64 {
    let mut spec = embed(bx, w);
    fft3(&mut spec, bx.n, false);
    riesz_from_spectrum(bx, &spec)
}

fn riesz_from_spectrum(bx: &CartesianBox, w_hat: &[Complex64]) -> f64 {
    let ik = |k: usize| Complex64::new(0.0, bx.xi_odd(k));
    let d1 = to_physical(bx, multiply(bx, w_hat, |a, b, c| ik(a) * inverse_laplacian(bx, a, b, c)));
    let d2 = to_physical(bx, multiply(bx, w_hat, |a, b, c| ik(b) * inverse_laplacian(bx, a, b, c)));
    let second = |p: usize, q: usize| {
        to_physical(
            bx,
            multiply(bx, w_hat, |a, b, c| {
                let k = [bx.xi(a), bx.xi(b)];
                Complex64::new(-k[p] * k[q] * inverse_laplacian(bx, a, b, c), 0.0)
            }),
        )
    };
    let (r11, r22, r12) = (second(0, 0), second(1, 1), second(0, 1));
    let n = bx.n;
    let quarter = bx.length() / 4.0;
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for a in 0..n {
        let x1 = bx.x(a);
        for b in 0..n {
            let x2 = bx.x(b);
            let r2 = x1 * x1 + x2 * x2;
            if r2.sqrt() < 4.0 * bx.h {
                continue;
            }
            for c in 0..n {
                let z = bx.x(c);
                if r2.sqrt() > quarter || z.abs() > quarter {
                    continue;
                }
                let k = bx.idx(a, b, c);
                let lhs = (x1 * d1[k] + x2 * d2[k]) / r2;
                let rhs = (x2 * x2 * r11[k] + x1 * x1 * r22[k] - 2.0 * x1 * x2 * r12[k]) / r2;
                err = err.max((lhs - rhs).abs());
                scale = scale.max(lhs.abs());
            }
        }
    }
    if scale > 0.0 {
        err / scale
    } else {
        0.0
    }
}

/// Spectral energy of an axisymmetric velocity embedded in a periodic box,
/// binned by `|ξ|`. Energies are per radian (divided by 2π) and normalized so
/// that the sum over all modes is `∫|u|² r dr dz` of the embedded samples.
#[derive(Debug, Clone)]
pub struct VelocitySpectrum {
    /// `(|ξ|, energy)` sorted by `|ξ|`.
    modes: Vec<(f64, f64)>,
}

impl VelocitySpectrum {
    /// Embeds `u` in a box padded to twice the larger of the cylinder's
    /// diameter and height.
    pub fn new(u: &VelocityFieldRZ, cart_n: usize) -> Result<Self> {
        u.validate()?;
        u.check_finite()?;
        let g = u.grid();
        let extent = (2.0 * g.r_max).max(g.z_max - g.z_min);
        let bx = CartesianBox::padded(cart_n, extent, 0.5 * (g.z_min + g.z_max))?;
        let n = bx.n;
        let mut total = vec![0.0; n * n * n];
        for comp in 0..3 {
            let mut spec = embed(&bx, |_, _| 0.0);
            for a in 0..n {
                let x1 = bx.x(a);
                for b in 0..n {
                    let x2 = bx.x(b);
                    let r = x1.hypot(x2);
                    for c in 0..n {
                        let z = bx.z(c);
                        let v = match comp {
                            0 | 1 if r > 0.0 => {
                                let e = if comp == 0 { x1 / r } else { x2 / r };
                                sample_field(&u.ur, r, z) * e
                            }
                            2 => sample_field(&u.uz, r, z),
                            _ => 0.0,
                        };
                        spec[bx.idx(a, b, c)].re = v;
                    }
                }
            }
            fft3(&mut spec, n, false);
            for (t, s) in total.iter_mut().zip(&spec) {
                *t += s.norm_sqr();
            }
        }
        // Σ_k |FFT_k|² h³/n³ = Σ_x |u|² h³ (discrete Parseval)
        let norm = bx.h.powi(3) / (n * n * n) as f64 / (2.0 * PI);
        let mut modes = Vec::with_capacity(total.len());
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let k = (bx.xi(a).powi(2) + bx.xi(b).powi(2) + bx.xi(c).powi(2)).sqrt();
                    modes.push((k, total[bx.idx(a, b, c)] * norm));
                }
            }
        }
        modes.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(Self { modes })
    }

    /// Energy of the modes with `|ξ| ≤ radius`.
    pub fn energy_within(&self, radius: f64) -> f64 {
        self.modes
            .iter()
            .take_while(|(k, _)| *k <= radius)
            .map(|(_, e)| e)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.modes.iter().map(|(_, e)| e).sum()
    }
}

/// Radius `√(M/2)·g(t)` of the Fourier-splitting ball, `g² = α/⟨t⟩`.
pub fn splitting_radius(t: f64, alpha: f64, big_m: f64) -> f64 {
    (0.5 * big_m).sqrt() * (alpha / (1.0 + t * t).sqrt()).sqrt()
}

/// `∫_{S(t)} |û|² dξ / (2π)³` per radian, with `S(t)` the splitting ball.
pub fn low_freq_energy(
    u: &VelocityFieldRZ,
    t: f64,
    alpha: f64,
    big_m: f64,
    cart_n: usize,
) -> Result<f64> {
    Ok(VelocitySpectrum::new(u, cart_n)?.energy_within(splitting_radius(t, alpha, big_m)))
}
