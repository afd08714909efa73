//! Time stepping of the coupled density/velocity/pressure system with unit
//! viscosity.
//!
//! One step, all with the beginning-of-step velocity `uⁿ`:
//!
//! 1. `ρⁿ⁺¹` by the limited transport scheme;
//! 2. predictor `ρ(u* − uⁿ)/dt = −ρ N(uⁿ) − ∇Πⁿ + L u` with `ρ = ρⁿ⁺¹` on the
//!    faces, `N` the non-conservative limited-upwind advection and `L` the
//!    axisymmetric vector Laplacian taken explicitly (`L uⁿ`) or by
//!    Crank–Nicolson (`½L(u* + uⁿ)`);
//! 3. incremental projection `div(β∇φ) = div(u*)/dt`, `uⁿ⁺¹ = u* − dt β∇φ`,
//!    `Πⁿ⁺¹ = Πⁿ + φ` with `β = 1/ρⁿ⁺¹` on the faces.

mod run;

pub use run::{
    read_checkpoint, run, run_resumed, write_checkpoint, Accumulators, Checkpoint,
    CheckpointManifest, NoCallbacks, RunCallbacks, RunOutput,
};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{DiffusionMode, SolverConfig};
use crate::elliptic::{face_density, inverse_face_density, Component, EllipticSolvers, LinearSolveReport};
use crate::error::{Error, Result};
use crate::field::{ScalarFieldRZ, VelocityFieldRZ};
use crate::mesh::{apply_laplacian_r, apply_laplacian_z, divergence, gradient, GridSpec};
use crate::state::FlowState;
use crate::transport::{advect_scalar, courant_number, minmod};

/// Bound on `max|div u|` after every projection.
pub const DIVERGENCE_TOL: f64 = 1e-8;

/// Largest explicit viscous step as a multiple of `min(dr, dz)² m`.
pub const EXPLICIT_DIFFUSION_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    /// Per-cell Courant number of the step (see the transport module).
    pub courant: f64,
    pub pressure: LinearSolveReport,
    pub div_linf: f64,
    pub wall_time: f64,
}

/// Owns the solver workspaces for one grid.
pub struct Stepper {
    solvers: EllipticSolvers,
    mode: DiffusionMode,
    tol: f64,
    /// Density bounds enforced after transport, widened by 1e-12.
    density_bounds: Option<(f64, f64)>,
}

/// A field with two ghost layers on every side.
struct Padded {
    nj: usize,
    data: Vec<f64>,
}

impl Padded {
    const PAD: usize = 2;

    /// `ghost(i, j)` supplies the values outside `0..ni × 0..nj`.
    fn new(f: &ScalarFieldRZ, ghost: impl Fn(isize, isize) -> f64) -> Self {
        let (ni, nj) = f.shape();
        let (pi, pj) = (ni + 2 * Self::PAD, nj + 2 * Self::PAD);
        let mut data = vec![0.0; pi * pj];
        for a in 0..pi {
            for b in 0..pj {
                let (i, j) = (a as isize - 2, b as isize - 2);
                let inside = i >= 0 && j >= 0 && (i as usize) < ni && (j as usize) < nj;
                data[a * pj + b] = if inside {
                    f.get(i as usize, j as usize)
                } else {
                    ghost(i, j)
                };
            }
        }
        Self { nj: pj, data }
    }

    #[inline]
    fn at(&self, i: isize, j: isize) -> f64 {
        self.data[(i + 2) as usize * self.nj + (j + 2) as usize]
    }
}

/// MUSCL-minmod approximation of `a ∂f` from five consecutive samples
/// `f[k−2..=k+2]` with spacing `h`.
#[inline]
fn limited_derivative(f: [f64; 5], a: f64, h: f64) -> f64 {
    let d = [f[1] - f[0], f[2] - f[1], f[3] - f[2], f[4] - f[3]];
    let (minus, plus) = if a >= 0.0 {
        (f[1] + 0.5 * minmod(d[0], d[1]), f[2] + 0.5 * minmod(d[1], d[2]))
    } else {
        (f[2] - 0.5 * minmod(d[1], d[2]), f[3] - 0.5 * minmod(d[2], d[3]))
    };
    a * (plus - minus) / h
}

/// Advection `(u·∇)u` of both components at their faces; zero on walls and the axis.
pub fn advection(u: &VelocityFieldRZ) -> Result<VelocityFieldRZ> {
    u.validate()?;
    let g = u.grid();
    let (nr, nz) = (g.nr as isize, g.nz as isize);
    let (dr, dz) = (g.dr(), g.dz());
    // u^r: odd across the axis and the outer wall (both carry u^r = 0 samples),
    // odd about the z walls which sit half a cell beyond the samples
    let pr = Padded::new(&u.ur, |i, j| {
        let (si, i) = if i < 0 {
            (-1.0, -i)
        } else if i > nr {
            (-1.0, 2 * nr - i)
        } else {
            (1.0, i)
        };
        let (sj, j) = if j < 0 {
            (-1.0, -j - 1)
        } else if j >= nz {
            (-1.0, 2 * nz - 1 - j)
        } else {
            (1.0, j)
        };
        si * sj * u.ur.get(i as usize, j as usize)
    });
    // u^z: even across the axis, odd about the outer wall (half a cell out),
    // odd about the z-wall samples (which are zero)
    let pz = Padded::new(&u.uz, |i, j| {
        let (si, i) = if i < 0 {
            (1.0, -i - 1)
        } else if i >= nr {
            (-1.0, 2 * nr - 1 - i)
        } else {
            (1.0, i)
        };
        let (sj, j) = if j < 0 {
            (-1.0, -j)
        } else if j > nz {
            (-1.0, 2 * nz - j)
        } else {
            (1.0, j)
        };
        si * sj * u.uz.get(i as usize, j as usize)
    });

    let mut out = VelocityFieldRZ::zeros(g);
    for i in 1..nr {
        for j in 0..nz {
            let ar = pr.at(i, j);
            let az = 0.25 * (pz.at(i - 1, j) + pz.at(i, j) + pz.at(i - 1, j + 1) + pz.at(i, j + 1));
            let fr = [-2, -1, 0, 1, 2].map(|d| pr.at(i + d, j));
            let fz = [-2, -1, 0, 1, 2].map(|d| pr.at(i, j + d));
            let v = limited_derivative(fr, ar, dr) + limited_derivative(fz, az, dz);
            out.ur.set(i as usize, j as usize, v);
        }
    }
    for i in 0..nr {
        for j in 1..nz {
            let az = pz.at(i, j);
            let ar = 0.25 * (pr.at(i, j - 1) + pr.at(i + 1, j - 1) + pr.at(i, j) + pr.at(i + 1, j));
            let fr = [-2, -1, 0, 1, 2].map(|d| pz.at(i + d, j));
            let fz = [-2, -1, 0, 1, 2].map(|d| pz.at(i, j + d));
            let v = limited_derivative(fr, ar, dr) + limited_derivative(fz, az, dz);
            out.uz.set(i as usize, j as usize, v);
        }
    }
    Ok(out)
}

/// The axisymmetric vector Laplacian on interior faces.
pub fn vector_laplacian(u: &VelocityFieldRZ) -> VelocityFieldRZ {
    let g = u.grid();
    let mut out = VelocityFieldRZ::zeros(g);
    apply_laplacian_r(u.ur.values(), out.ur.values_mut(), g, 0.0, 1.0);
    apply_laplacian_z(u.uz.values(), out.uz.values_mut(), g, 0.0, 1.0);
    out
}

fn multiply(a: &ScalarFieldRZ, b: &ScalarFieldRZ) -> ScalarFieldRZ {
    let mut out = a.clone();
    for (x, y) in out.values_mut().iter_mut().zip(b.values()) {
        *x *= y;
    }
    out
}

impl Stepper {
    pub fn new(grid: &GridSpec, solver: &SolverConfig) -> Self {
        let mut solvers = EllipticSolvers::new(grid);
        solvers.max_iter = solver.max_iter;
        Self {
            solvers,
            mode: solver.diffusion_mode,
            tol: solver.tol,
            density_bounds: None,
        }
    }

    /// Enforces `m − 1e−12 ≤ ρ ≤ M + 1e−12` after every transport step.
    pub fn with_density_bounds(mut self, m: f64, big_m: f64) -> Self {
        self.density_bounds = Some((m, big_m));
        self
    }

    pub fn grid(&self) -> &GridSpec {
        self.solvers.grid()
    }

    /// Largest explicit viscous step for the given minimum density.
    pub fn explicit_limit(&self, rho_min: f64) -> f64 {
        let g = self.grid();
        let h = g.dr().min(g.dz());
        EXPLICIT_DIFFUSION_LIMIT * h * h * rho_min
    }

    pub fn diffusion_mode(&self) -> DiffusionMode {
        self.mode
    }

    /// Advances `state` by `dt`.
    pub fn step(&self, state: &FlowState, dt: f64) -> Result<(FlowState, StepReport)> {
        let clock = Instant::now();
        state.validate()?;
        if state.grid() != self.grid() {
            return Err(Error::GridMismatch("state and stepper grids differ".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Invalid(format!("dt = {dt} must be positive")));
        }
        let courant = courant_number(&state.u, dt);
        if self.mode == DiffusionMode::Explicit {
            let limit = self.explicit_limit(state.rho.min());
            if dt > limit {
                return Err(Error::Cfl {
                    courant: dt / limit * EXPLICIT_DIFFUSION_LIMIT,
                    limit: EXPLICIT_DIFFUSION_LIMIT,
                    required_dt: limit,
                });
            }
        }

        let rho = advect_scalar(&state.rho, &state.u, dt)?;
        if let Some((m, big_m)) = self.density_bounds {
            let (ni, nj) = rho.shape();
            for k in 0..ni * nj {
                let v = rho.values()[k];
                if v < m - 1e-12 || v > big_m + 1e-12 {
                    return Err(Error::Density {
                        i: k / nj,
                        j: k % nj,
                        value: v,
                    });
                }
            }
        }

        let rho_f = face_density(&rho)?;
        let beta = inverse_face_density(&rho)?;
        let n = advection(&state.u)?;
        let gp = gradient(&state.pi)?;
        let lu = vector_laplacian(&state.u);

        // force = −ρN − ∇Πⁿ (+ L uⁿ explicitly or ½ L uⁿ for Crank–Nicolson)
        let visc = match self.mode {
            DiffusionMode::Explicit => 1.0,
            DiffusionMode::Implicit => 0.5,
        };
        let force = |comp: Component| {
            let (rf, nn, gg, ll) = match comp {
                Component::R => (&rho_f.ur, &n.ur, &gp.ur, &lu.ur),
                Component::Z => (&rho_f.uz, &n.uz, &gp.uz, &lu.uz),
            };
            let mut f = multiply(rf, nn);
            f.scale(-1.0);
            f.axpy(-1.0, gg);
            f.axpy(visc, ll);
            f
        };
        let mut ustar = state.u.clone();
        for comp in [Component::R, Component::Z] {
            let (rf, un, target) = match comp {
                Component::R => (&rho_f.ur, &state.u.ur, &mut ustar.ur),
                Component::Z => (&rho_f.uz, &state.u.uz, &mut ustar.uz),
            };
            let f = force(comp);
            match self.mode {
                DiffusionMode::Explicit => {
                    for ((t, fv), r) in target.values_mut().iter_mut().zip(f.values()).zip(rf.values()) {
                        *t += dt * fv / r;
                    }
                }
                DiffusionMode::Implicit => {
                    // (2ρ/dt) u* − L u* = 2 ((ρ/dt) uⁿ + f)
                    let mut rhs = multiply(rf, un);
                    rhs.scale(2.0 / dt);
                    rhs.axpy(2.0, &f);
                    let (sol, _) = self.solvers.solve_helmholtz_faces(rf, 0.5 * dt, &rhs, comp, self.tol)?;
                    *target = sol;
                }
            }
        }
        ustar.pin_boundaries();

        let (u, phi, pressure, div_linf) = self.project(&ustar, &beta, dt)?;
        let mut pi = state.pi.clone();
        pi.axpy(1.0, &phi);

        let next = FlowState {
            t: state.t + dt,
            rho,
            u,
            pi,
        };
        next.rho.check_finite("rho")?;
        next.u.check_finite()?;
        next.pi.check_finite("pi")?;
        Ok((
            next,
            StepReport {
                dt,
                courant,
                pressure,
                div_linf,
                wall_time: clock.elapsed().as_secs_f64(),
            },
        ))
    }

    /// Projection with tolerance tightening until `max|div u| ≤ DIVERGENCE_TOL`.
    fn project(
        &self,
        ustar: &VelocityFieldRZ,
        beta: &VelocityFieldRZ,
        dt: f64,
    ) -> Result<(VelocityFieldRZ, ScalarFieldRZ, LinearSolveReport, f64)> {
        let mut rhs = divergence(ustar)?;
        rhs.scale(1.0 / dt);
        let mut tol = self.tol;
        loop {
            let (phi, report) = self.solvers.solve_pressure_beta(beta, &rhs, tol)?;
            let mut gphi = gradient(&phi)?;
            for (v, b) in gphi.ur.values_mut().iter_mut().zip(beta.ur.values()) {
                *v *= b;
            }
            for (v, b) in gphi.uz.values_mut().iter_mut().zip(beta.uz.values()) {
                *v *= b;
            }
            let mut u = ustar.clone();
            u.axpy(-dt, &gphi);
            let div_linf = divergence(&u)?.max_abs();
            if div_linf <= DIVERGENCE_TOL {
                return Ok((u, phi, report, div_linf));
            }
            if tol <= 1e-15 {
                return Err(Error::NotConverged {
                    solver: "projection",
                    iterations: report.iterations,
                    residual: div_linf,
                    tol: DIVERGENCE_TOL,
                });
            }
            tol = (tol * 1e-2).max(1e-15);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::stream_function_velocity;
    use crate::field::Staggering;

    fn grid() -> GridSpec {
        GridSpec::new(24, 48, 2.0, -2.0, 2.0).unwrap()
    }

    #[test]
    fn limited_derivative_is_exact_on_lines() {
        let f = [1.0, 3.0, 5.0, 7.0, 9.0];
        assert!((limited_derivative(f, 1.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((limited_derivative(f, -1.0, 2.0) + 1.0).abs() < 1e-15);
        assert_eq!(limited_derivative([4.0; 5], 3.0, 0.1), 0.0);
    }

    #[test]
    fn advection_of_zero_velocity_vanishes() {
        let n = advection(&VelocityFieldRZ::zeros(&grid())).unwrap();
        assert_eq!(n.max_abs(), 0.0);
    }

    #[test]
    fn advection_is_second_order_on_smooth_fields() {
        // u = curl of a smooth stream function, N compared against the exact (u·∇)u
        let err = |nr: usize| {
            let g = GridSpec::new(nr, 2 * nr, 3.0, -3.0, 3.0).unwrap();
            // curl of Ψ = r² exp(−r² − z²)
            let ur = |r: f64, z: f64| 2.0 * r * z * (-(r * r + z * z)).exp();
            let uz = |r: f64, z: f64| (2.0 - 2.0 * r * r) * (-(r * r + z * z)).exp();
            let u = VelocityFieldRZ::from_fn(&g, ur, uz);
            let n = advection(&u).unwrap();
            let h = 1e-6;
            // mean error: the limiter clips at extrema, so the max norm is only first order
            let (mut e, mut count) = (0.0, 0.0);
            for i in 1..g.nr {
                for j in 0..g.nz {
                    let (r, z) = (g.r_face(i), g.z_center(j));
                    let (a, b) = (ur(r, z), uz(r, z));
                    let dr = (ur(r + h, z) - ur(r - h, z)) / (2.0 * h);
                    let dz = (ur(r, z + h) - ur(r, z - h)) / (2.0 * h);
                    if r > 0.3 && r < 2.0 && z.abs() < 2.0 {
                        e += (n.ur.get(i, j) - (a * dr + b * dz)).abs();
                        count += 1.0;
                    }
                }
            }
            e / count
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 / e2 > 3.0, "{e1} {e2}");
    }

    #[test]
    fn zero_velocity_is_steady() {
        let g = grid();
        let rho = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, z| 1.0 + 0.5 * (r * z).sin().powi(2));
        let s = FlowState {
            t: 0.0,
            rho: rho.clone(),
            u: VelocityFieldRZ::zeros(&g),
            pi: ScalarFieldRZ::zeros(&g, Staggering::Center),
        };
        for mode in [DiffusionMode::Explicit, DiffusionMode::Implicit] {
            let cfg = SolverConfig {
                tol: 1e-10,
                max_iter: 200,
                diffusion_mode: mode,
            };
            let (next, rep) = Stepper::new(&g, &cfg).step(&s, 1e-3).unwrap();
            assert_eq!(next.rho, rho);
            assert_eq!(next.u.max_abs(), 0.0);
            assert_eq!(next.pi.max_abs(), 0.0);
            assert_eq!(rep.div_linf, 0.0);
            assert!((next.t - 1e-3).abs() < 1e-18);
        }
    }

    #[test]
    fn one_step_dissipates_energy_and_stays_solenoidal() {
        let g = grid();
        let w = ScalarFieldRZ::from_fn(&g, Staggering::Node, |r, z| {
            r * (-((r - 0.8).powi(2) + z * z) / 0.09).exp()
        });
        let u = stream_function_velocity(&w, 1e-10).unwrap();
        let s = FlowState {
            t: 0.0,
            rho: ScalarFieldRZ::constant(&g, Staggering::Center, 1.0),
            u,
            pi: ScalarFieldRZ::zeros(&g, Staggering::Center),
        };
        let cfg = SolverConfig {
            tol: 1e-10,
            max_iter: 200,
            diffusion_mode: DiffusionMode::Implicit,
        };
        let e = |s: &FlowState| crate::diagnostics::kinetic_energy(&s.rho, &s.u).unwrap();
        let (next, rep) = Stepper::new(&g, &cfg).step(&s, 2e-3).unwrap();
        assert!(e(&next) < e(&s));
        assert!(rep.div_linf <= DIVERGENCE_TOL);
    }
}
