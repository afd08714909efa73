//! Γ = ω/r: the constant-density evolution and the variable-density
//! consistency residual.
//!
//! The constant-density operator `∂_rr + (3/r)∂_r + ∂_zz` is split as the
//! r-weighted Laplacian `(1/r)∂_r(r ∂_r) + ∂_zz` plus `(2/r)∂_r`, the latter
//! taken by central differences with the even reflection `Γ_{−1} = Γ_0` at the
//! axis. All off-diagonal coefficients of the resulting stencil are
//! non-negative (the inner radial coupling is `(r_{i−½} − dr)/(r_i dr²) ≥ 0`),
//! and advection by `u` is first-order upwind, so an explicit step with
//! `dt Σ a_ik ≤ 1` is a convex combination. Because `(2/r) e_r` is
//! divergence-free in the `r dr dz` measure, the weighted column sums of the
//! stencil never exceed its row sums away from the outer wall, which gives
//! contraction in every weighted L^p norm as well as in L^∞.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarFieldRZ, Staggering, VelocityFieldRZ};
use crate::mesh::{vorticity, GridSpec};
use crate::state::{compute_gamma, FlowState};

/// Coefficients of `Γ_i ← Γ_i + dt Σ_k a_k (Γ_k − Γ_i)` for the diffusive part,
/// ordered r−, r+, z−, z+ (zero where the neighbor is a wall).
#[inline]
fn diffusion_coefficients(g: &GridSpec, i: usize, j: usize) -> [f64; 4] {
    let (dr, dz) = (g.dr(), g.dz());
    let ri = g.r_center(i);
    let rm = g.r_face(i);
    let rp = g.r_face(i + 1);
    let adv = 1.0 / (ri * dr);
    let mut a = [0.0; 4];
    // even reflection at the axis folds the r− coupling onto Γ_0 itself
    if i > 0 {
        a[0] = rm / (ri * dr * dr) - adv;
    }
    if i + 1 < g.nr {
        a[1] = rp / (ri * dr * dr) + adv;
    }
    if j > 0 {
        a[2] = 1.0 / (dz * dz);
    }
    if j + 1 < g.nz {
        a[3] = 1.0 / (dz * dz);
    }
    a
}

/// Upwind inflow coefficients `|F_in| / V` per face (r−, r+, z−, z+).
#[inline]
fn advection_coefficients(u: &VelocityFieldRZ, i: usize, j: usize) -> [f64; 4] {
    let g = u.grid();
    let vol = g.r_center(i) * g.dr() * g.dz();
    let ar = g.dz() / vol;
    let az = g.r_center(i) * g.dr() / vol;
    let mut a = [0.0; 4];
    if i > 0 {
        a[0] = (g.r_face(i) * u.ur.get(i, j)).max(0.0) * ar;
    }
    if i + 1 < g.nr {
        a[1] = (-g.r_face(i + 1) * u.ur.get(i + 1, j)).max(0.0) * ar;
    }
    if j > 0 {
        a[2] = u.uz.get(i, j).max(0.0) * az;
    }
    if j + 1 < g.nz {
        a[3] = (-u.uz.get(i, j + 1)).max(0.0) * az;
    }
    a
}

fn total_rate(u: &VelocityFieldRZ, i: usize, j: usize) -> f64 {
    let d = diffusion_coefficients(u.grid(), i, j);
    let a = advection_coefficients(u, i, j);
    d.iter().sum::<f64>() + a.iter().sum::<f64>()
}

/// Largest explicit step keeping every diagonal coefficient non-negative.
pub fn max_stable_dt_gamma(u: &VelocityFieldRZ) -> f64 {
    let g = u.grid();
    let mut m: f64 = 0.0;
    for i in 0..g.nr {
        for j in 0..g.nz {
            m = m.max(total_rate(u, i, j));
        }
    }
    1.0 / m
}

/// One explicit step of `∂_tΓ + u·∇Γ = ∂_rrΓ + (3/r)∂_rΓ + ∂_zzΓ` with
/// no-flux walls (Neumann for Γ) and frozen `u`.
pub fn evolve_gamma_const_density(
    gamma: &ScalarFieldRZ,
    u: &VelocityFieldRZ,
    dt: f64,
) -> Result<ScalarFieldRZ> {
    gamma.expect_staggering(Staggering::Center)?;
    u.validate()?;
    gamma.same_grid(&u.ur)?;
    if !(dt >= 0.0) {
        return Err(Error::Invalid(format!("dt = {dt} must be non-negative")));
    }
    let limit = max_stable_dt_gamma(u);
    if dt > limit {
        return Err(Error::Cfl {
            courant: dt / limit,
            limit: 1.0,
            required_dt: limit,
        });
    }
    let g = gamma.grid();
    let nz = g.nz;
    let f = gamma.values();
    let mut out = vec![0.0; f.len()];
    out.par_chunks_mut(nz).enumerate().for_each(|(i, row)| {
        for j in 0..nz {
            let k = i * nz + j;
            let d = diffusion_coefficients(g, i, j);
            let a = advection_coefficients(u, i, j);
            let nb = [
                if i > 0 { f[k - nz] } else { f[k] },
                if i + 1 < g.nr { f[k + nz] } else { f[k] },
                if j > 0 { f[k - 1] } else { f[k] },
                if j + 1 < nz { f[k + 1] } else { f[k] },
            ];
            let mut acc = 0.0;
            for s in 0..4 {
                acc += (d[s] + a[s]) * (nb[s] - f[k]);
            }
            row[j] = f[k] + dt * acc;
        }
    });
    let out = ScalarFieldRZ::from_values(g, Staggering::Center, out)?;
    out.check_finite("gamma")?;
    Ok(out)
}

/// Central ∂_r at cell centers of a field even in r (axis ghost `f_{−1} = f_0`),
/// one-sided at the wall.
fn d_r(f: &ScalarFieldRZ) -> ScalarFieldRZ {
    let g = f.grid();
    let dr = g.dr();
    let mut out = ScalarFieldRZ::zeros(g, Staggering::Center);
    for i in 0..g.nr {
        for j in 0..g.nz {
            let v = if i == 0 {
                (f.get(1, j) - f.get(0, j)) / (2.0 * dr)
            } else if i + 1 == g.nr {
                (f.get(i, j) - f.get(i - 1, j)) / dr
            } else {
                (f.get(i + 1, j) - f.get(i - 1, j)) / (2.0 * dr)
            };
            out.set(i, j, v);
        }
    }
    out
}

/// Central ∂_z at cell centers; one-sided at the walls.
fn d_z(f: &ScalarFieldRZ) -> ScalarFieldRZ {
    let g = f.grid();
    let dz = g.dz();
    let mut out = ScalarFieldRZ::zeros(g, Staggering::Center);
    for i in 0..g.nr {
        for j in 0..g.nz {
            let v = if j == 0 {
                (f.get(i, 1) - f.get(i, 0)) / dz
            } else if j + 1 == g.nz {
                (f.get(i, j) - f.get(i, j - 1)) / dz
            } else {
                (f.get(i, j + 1) - f.get(i, j - 1)) / (2.0 * dz)
            };
            out.set(i, j, v);
        }
    }
    out
}

fn zip_map(a: &ScalarFieldRZ, b: &ScalarFieldRZ, f: impl Fn(f64, f64) -> f64) -> ScalarFieldRZ {
    let v = a.values().iter().zip(b.values()).map(|(x, y)| f(*x, *y)).collect();
    ScalarFieldRZ::from_values(a.grid(), a.staggering(), v).expect("same shape")
}

fn times_r(f: &ScalarFieldRZ, power: i32) -> ScalarFieldRZ {
    let g = f.grid();
    let mut out = f.clone();
    for i in 0..g.nr {
        let s = g.r_center(i).powi(power);
        for j in 0..g.nz {
            out.set(i, j, f.get(i, j) * s);
        }
    }
    out
}

/// Every spatial term of the variable-density Γ equation except `∂_tΓ`,
/// evaluated at one snapshot by central differences.
fn spatial_terms(state: &FlowState) -> Result<ScalarFieldRZ> {
    let g = state.grid();
    let gamma = compute_gamma(&vorticity(&state.u)?)?;
    let rho = &state.rho;
    // velocity at cell centers
    let mut ur_c = ScalarFieldRZ::zeros(g, Staggering::Center);
    let mut uz_c = ScalarFieldRZ::zeros(g, Staggering::Center);
    for i in 0..g.nr {
        for j in 0..g.nz {
            ur_c.set(i, j, 0.5 * (state.u.ur.get(i, j) + state.u.ur.get(i + 1, j)));
            uz_c.set(i, j, 0.5 * (state.u.uz.get(i, j) + state.u.uz.get(i, j + 1)));
        }
    }
    let gr = d_r(&gamma);
    let gz = d_z(&gamma);
    let advection = zip_map(
        &zip_map(&ur_c, &gr, |a, b| a * b),
        &zip_map(&uz_c, &gz, |a, b| a * b),
        |a, b| a + b,
    );

    let pr_over_rho = zip_map(&d_r(&state.pi), rho, |a, b| a / b);
    let pz_over_rho = zip_map(&d_z(&state.pi), rho, |a, b| a / b);
    let pressure = times_r(
        &zip_map(
            &d_z(&pr_over_rho),
            &d_r(&pz_over_rho),
            |a, b| a - b,
        ),
        -1,
    );

    let gz_over_rho = zip_map(&gz, rho, |a, b| a / b);
    let radial_flux = zip_map(
        &zip_map(&times_r(&gr, 1), &gamma, |a, b| a + 2.0 * b),
        rho,
        |a, b| a / b,
    );
    let viscous = zip_map(
        &d_z(&gz_over_rho),
        &times_r(&d_r(&radial_flux), -1),
        |a, b| a + b,
    );
    Ok(zip_map(
        &zip_map(&advection, &pressure, |a, b| a + b),
        &viscous,
        |a, b| a - b,
    ))
}

/// r-weighted L² norm over cells at least two cells away from the outer
/// walls (where the one-sided closures are not consistent).
fn interior_l2(f: &ScalarFieldRZ) -> f64 {
    let g = f.grid();
    let mut s = 0.0;
    for i in 0..g.nr.saturating_sub(2) {
        for j in 2..g.nz.saturating_sub(2) {
            s += f.get(i, j).powi(2) * Staggering::Center.weight(g, i, j);
        }
    }
    s.sqrt()
}

/// Residual of the variable-density Γ equation along a run, one value per
/// interior snapshot, with `∂_tΓ` by central differences in time.
pub fn gamma_consistency_residual(series: &[FlowState]) -> Result<Vec<f64>> {
    if series.len() < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 snapshots, got {}",
            series.len()
        )));
    }
    let dt = series[1].t - series[0].t;
    if !(dt > 0.0) {
        return Err(Error::Invalid("snapshot times must increase".into()));
    }
    for w in series.windows(2) {
        let d = w[1].t - w[0].t;
        if (d - dt).abs() > 1e-9 * dt {
            return Err(Error::Invalid(format!(
                "snapshots must be uniformly spaced (found {d} vs {dt})"
            )));
        }
    }
    let gammas = series
        .iter()
        .map(|s| compute_gamma(&vorticity(&s.u)?))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(series.len() - 2);
    for n in 1..series.len() - 1 {
        let dgdt = zip_map(&gammas[n + 1], &gammas[n - 1], |a, b| (a - b) / (2.0 * dt));
        let res = zip_map(&dgdt, &spatial_terms(&series[n])?, |a, b| a + b);
        out.push(interior_l2(&res));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::stream_function_velocity;
    use crate::mesh::weighted_l2_norm;

    fn grid() -> GridSpec {
        GridSpec::new(24, 48, 3.0, -3.0, 3.0).unwrap()
    }

    fn bump(g: &GridSpec) -> ScalarFieldRZ {
        ScalarFieldRZ::from_fn(g, Staggering::Center, |r, z| {
            (-((r - 0.7).powi(2) + z * z) / 0.2).exp() + (-(r * r + z * z)).exp()
        })
    }

    #[test]
    fn constants_are_steady() {
        let g = grid();
        let c = ScalarFieldRZ::constant(&g, Staggering::Center, -2.5);
        let u = VelocityFieldRZ::zeros(&g);
        let dt = max_stable_dt_gamma(&u);
        assert_eq!(evolve_gamma_const_density(&c, &u, dt).unwrap(), c);
    }

    #[test]
    fn pure_diffusion_strictly_dissipates() {
        let g = grid();
        let u = VelocityFieldRZ::zeros(&g);
        let dt = 0.9 * max_stable_dt_gamma(&u);
        let mut f = bump(&g);
        let mut prev = weighted_l2_norm(&f).unwrap();
        for _ in 0..50 {
            f = evolve_gamma_const_density(&f, &u, dt).unwrap();
            let n = weighted_l2_norm(&f).unwrap();
            assert!(n < prev);
            prev = n;
        }
    }

    #[test]
    fn operator_is_consistent_with_five_dimensional_laplacian() {
        // Γ = exp(−r² − z²): Γ_rr + 3Γ_r/r + Γ_zz = (4r² + 4z² − 10) Γ
        let mut errs = Vec::new();
        for n in [32, 64] {
            let g = GridSpec::new(n, n, 3.0, -1.5, 1.5).unwrap();
            let f = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, z| (-r * r - z * z).exp());
            let u = VelocityFieldRZ::zeros(&g);
            let dt = 0.5 * max_stable_dt_gamma(&u);
            let f1 = evolve_gamma_const_density(&f, &u, dt).unwrap();
            let mut e = 0.0f64;
            for i in 0..n / 2 {
                for j in n / 4..3 * n / 4 {
                    let (r, z) = Staggering::Center.coords(&g, i, j);
                    let exact = (4.0 * r * r + 4.0 * z * z - 10.0) * (-r * r - z * z).exp();
                    e = e.max(((f1.get(i, j) - f.get(i, j)) / dt - exact).abs());
                }
            }
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn frozen_ring_flow_is_monotone() {
        let g = grid();
        let w = ScalarFieldRZ::from_fn(&g, Staggering::Node, |r, z| {
            r * 3.0 * (-((r - 1.0).powi(2) + z * z) / 0.1).exp()
        });
        let u = stream_function_velocity(&w, 1e-10).unwrap();
        let dt = max_stable_dt_gamma(&u);
        let mut f = bump(&g);
        let (mut l2, mut linf) = (weighted_l2_norm(&f).unwrap(), f.max_abs());
        for _ in 0..200 {
            f = evolve_gamma_const_density(&f, &u, dt).unwrap();
            let (a, b) = (weighted_l2_norm(&f).unwrap(), f.max_abs());
            assert!(a <= l2 + 1e-12 && b <= linf + 1e-12);
            l2 = a;
            linf = b;
        }
    }

    #[test]
    fn residual_needs_three_snapshots() {
        let g = grid();
        let s = FlowState {
            t: 0.0,
            rho: ScalarFieldRZ::constant(&g, Staggering::Center, 1.0),
            u: VelocityFieldRZ::zeros(&g),
            pi: ScalarFieldRZ::zeros(&g, Staggering::Center),
        };
        assert!(gamma_consistency_residual(&[s.clone(), s.clone()]).is_err());
        let mut series = vec![s.clone(), s.clone(), s];
        series[1].t = 0.1;
        series[2].t = 0.2;
        let r = gamma_consistency_residual(&series).unwrap();
        assert_eq!(r, vec![0.0]);
    }
}
