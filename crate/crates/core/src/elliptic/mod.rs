//! Pressure, viscous (Helmholtz) and stream-function solves.
//!
//! Constant-coefficient problems are solved directly by [`fast`]; variable
//! density enters through preconditioned conjugate gradients in the
//! r-weighted inner product, with the fast solver at a reference density as
//! preconditioner. Every report carries the residual recomputed from the
//! returned solution.

mod fast;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarFieldRZ, Staggering, VelocityFieldRZ};
use crate::mesh::{
    apply_laplacian_r_diag, apply_laplacian_z_diag, divergence, gradient, GridSpec,
};

pub(crate) use fast::SeparableSolver;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolveReport {
    pub iterations: usize,
    /// Relative residual `‖A x − b‖ / ‖b‖` in the weighted norm, recomputed
    /// from the returned solution (0 when `b = 0`).
    pub residual_norm: f64,
    pub converged: bool,
}

impl LinearSolveReport {
    fn into_result(self, solver: &'static str, tol: f64) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                solver,
                iterations: self.iterations,
                residual: self.residual_norm,
                tol,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    R,
    Z,
}

impl Component {
    pub fn staggering(self) -> Staggering {
        match self {
            Component::R => Staggering::RFace,
            Component::Z => Staggering::ZFace,
        }
    }
}

/// Density averaged to the velocity faces. Wall faces take the adjacent cell.
pub fn face_density(rho: &ScalarFieldRZ) -> Result<VelocityFieldRZ> {
    rho.expect_staggering(Staggering::Center)?;
    let g = rho.grid();
    let mut f = VelocityFieldRZ::zeros(g);
    for i in 0..=g.nr {
        for j in 0..g.nz {
            let v = match i {
                0 => rho.get(0, j),
                i if i == g.nr => rho.get(g.nr - 1, j),
                _ => 0.5 * (rho.get(i - 1, j) + rho.get(i, j)),
            };
            f.ur.set(i, j, v);
        }
    }
    for i in 0..g.nr {
        for j in 0..=g.nz {
            let v = match j {
                0 => rho.get(i, 0),
                j if j == g.nz => rho.get(i, g.nz - 1),
                _ => 0.5 * (rho.get(i, j - 1) + rho.get(i, j)),
            };
            f.uz.set(i, j, v);
        }
    }
    Ok(f)
}

fn check_density(rho: &ScalarFieldRZ) -> Result<()> {
    rho.check_finite("rho")?;
    let (_, nj) = rho.shape();
    match rho.values().iter().position(|&v| v <= 0.0) {
        None => Ok(()),
        Some(k) => Err(Error::Density {
            i: k / nj,
            j: k % nj,
            value: rho.values()[k],
        }),
    }
}

/// `div(β ∇p)` with `β = 1/ρ` on faces.
pub(crate) fn apply_pressure_operator(beta: &VelocityFieldRZ, p: &ScalarFieldRZ) -> ScalarFieldRZ {
    let mut gp = gradient(p).expect("cell-centered pressure");
    for (v, b) in gp.ur.values_mut().iter_mut().zip(beta.ur.values()) {
        *v *= b;
    }
    for (v, b) in gp.uz.values_mut().iter_mut().zip(beta.uz.values()) {
        *v *= b;
    }
    divergence(&gp).expect("consistent faces")
}

/// `div((1/ρ)∇p)` on cell centers.
pub fn pressure_operator(rho: &ScalarFieldRZ, p: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    check_density(rho)?;
    p.expect_staggering(Staggering::Center)?;
    rho.same_grid(p)?;
    Ok(apply_pressure_operator(&inverse_face_density(rho)?, p))
}

pub(crate) fn inverse_face_density(rho: &ScalarFieldRZ) -> Result<VelocityFieldRZ> {
    let mut beta = face_density(rho)?;
    beta.ur.values_mut().iter_mut().for_each(|v| *v = 1.0 / *v);
    beta.uz.values_mut().iter_mut().for_each(|v| *v = 1.0 / *v);
    Ok(beta)
}

fn dot_w(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// Preconditioned CG for an operator self-adjoint and positive (semi)definite
/// in the inner product weighted by `w`. `project` removes a null space from
/// search directions when the operator is singular.
#[allow(clippy::too_many_arguments)]
fn pcg(
    apply: &dyn Fn(&[f64], &mut [f64]),
    precond: &dyn Fn(&[f64], &mut [f64]),
    project: &dyn Fn(&mut [f64]),
    w: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> LinearSolveReport {
    let n = b.len();
    let bnorm = dot_w(w, b, b).sqrt();
    if bnorm == 0.0 {
        x.fill(0.0);
        return LinearSolveReport {
            iterations: 0,
            residual_norm: 0.0,
            converged: true,
        };
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot_w(w, &r, &z);
    let mut iterations = 0;
    let mut rel = dot_w(w, &r, &r).sqrt() / bnorm;
    while rel > tol && iterations < max_iter {
        iterations += 1;
        apply(&p, &mut ax);
        let pap = dot_w(w, &p, &ax);
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ax[k];
        }
        rel = dot_w(w, &r, &r).sqrt() / bnorm;
        if rel <= tol {
            break;
        }
        precond(&r, &mut z);
        project(&mut z);
        let rz_new = dot_w(w, &r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    apply(x, &mut ax);
    let true_res = b
        .iter()
        .zip(&ax)
        .zip(w)
        .map(|((b, a), w)| w * (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    LinearSolveReport {
        iterations,
        residual_norm: true_res,
        converged: true_res <= tol,
    }
}

/// Reusable fast solvers for one grid.
pub struct EllipticSolvers {
    grid: GridSpec,
    pressure: SeparableSolver,
    velocity_r: SeparableSolver,
    velocity_z: SeparableSolver,
    stream: SeparableSolver,
    center_w: Vec<f64>,
    rface_w: Vec<f64>,
    zface_w: Vec<f64>,
    pub max_iter: usize,
}

impl EllipticSolvers {
    pub fn new(grid: &GridSpec) -> Self {
        let g = grid;
        let center_w = weights(g, Staggering::Center, |_, _| true);
        let rface_w = weights(g, Staggering::RFace, |i, _| i >= 1 && i < g.nr);
        let zface_w = weights(g, Staggering::ZFace, |_, j| j >= 1 && j < g.nz);
        Self {
            grid: g.clone(),
            pressure: SeparableSolver::pressure(g),
            velocity_r: SeparableSolver::velocity_r(g),
            velocity_z: SeparableSolver::velocity_z(g),
            stream: SeparableSolver::stream(g),
            center_w,
            rface_w,
            zface_w,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Solves `div((1/ρ)∇Π) = rhs`, gauge-fixed to zero weighted mean.
    pub fn solve_pressure(
        &self,
        rho: &ScalarFieldRZ,
        rhs: &ScalarFieldRZ,
        tol: f64,
    ) -> Result<(ScalarFieldRZ, LinearSolveReport)> {
        check_density(rho)?;
        rhs.expect_staggering(Staggering::Center)?;
        rhs.check_finite("pressure rhs")?;
        rho.same_grid(rhs)?;
        if rho.grid() != &self.grid {
            return Err(Error::GridMismatch("solver built for another grid".into()));
        }
        let beta = inverse_face_density(rho)?;
        self.solve_pressure_beta(&beta, rhs, tol)
    }

    pub(crate) fn solve_pressure_beta(
        &self,
        beta: &VelocityFieldRZ,
        rhs: &ScalarFieldRZ,
        tol: f64,
    ) -> Result<(ScalarFieldRZ, LinearSolveReport)> {
        let g = &self.grid;
        let w = &self.center_w;
        let total: f64 = w.iter().sum();
        let mass: f64 = dot_w(w, rhs.values(), &vec![1.0; w.len()]);
        let scale: f64 = w.iter().zip(rhs.values()).map(|(w, b)| w * b.abs()).sum();
        if mass.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Incompatible { mean: mass / total });
        }
        let mean = mass / total;
        let b: Vec<f64> = rhs.values().iter().map(|v| -(v - mean)).collect();

        let (bmin, bmax) = beta
            .ur
            .values()
            .iter()
            .chain(beta.uz.values())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let bref = (bmin * bmax).sqrt();
        let remove_mean = |v: &mut [f64]| {
            let m = dot_w(w, v, &vec![1.0; v.len()]) / total;
            v.iter_mut().for_each(|x| *x -= m);
        };
        let apply = |x: &[f64], out: &mut [f64]| {
            let p = ScalarFieldRZ::from_values(g, Staggering::Center, x.to_vec()).unwrap();
            let ap = apply_pressure_operator(beta, &p);
            for (o, a) in out.iter_mut().zip(ap.values()) {
                *o = -a;
            }
        };
        let precond = |r: &[f64], z: &mut [f64]| self.pressure.solve(0.0, bref, r, z);
        let mut x = vec![0.0; b.len()];
        let report = pcg(&apply, &precond, &remove_mean, w, &b, &mut x, tol, self.max_iter);
        remove_mean(&mut x);
        let report = report.into_result("pressure", tol)?;
        Ok((ScalarFieldRZ::from_values(g, Staggering::Center, x)?, report))
    }

    /// Solves `(ρ/dt) f − L f = rhs` for one velocity component with
    /// homogeneous Dirichlet data on the walls (and the axis for u^r).
    pub fn solve_helmholtz(
        &self,
        rho: &ScalarFieldRZ,
        dt: f64,
        rhs: &ScalarFieldRZ,
        component: Component,
        tol: f64,
    ) -> Result<(ScalarFieldRZ, LinearSolveReport)> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Invalid(format!("dt = {dt} must be positive")));
        }
        check_density(rho)?;
        rhs.expect_staggering(component.staggering())?;
        rhs.check_finite("helmholtz rhs")?;
        rho.same_grid(rhs)?;
        let rf = face_density(rho)?;
        let rho_face = match component {
            Component::R => rf.ur,
            Component::Z => rf.uz,
        };
        self.solve_helmholtz_faces(&rho_face, dt, rhs, component, tol)
    }

    pub(crate) fn solve_helmholtz_faces(
        &self,
        rho_face: &ScalarFieldRZ,
        dt: f64,
        rhs: &ScalarFieldRZ,
        component: Component,
        tol: f64,
    ) -> Result<(ScalarFieldRZ, LinearSolveReport)> {
        let g = &self.grid;
        let stag = component.staggering();
        let (fast, w) = match component {
            Component::R => (&self.velocity_r, &self.rface_w),
            Component::Z => (&self.velocity_z, &self.zface_w),
        };
        let diag: Vec<f64> = rho_face.values().iter().map(|r| r / dt).collect();
        let (lo, hi) = interior(g, stag)
            .map(|k| rho_face.values()[k])
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let rho_ref = (lo * hi).sqrt();

        let full_len = rhs.values().len();
        let idx: Vec<usize> = interior(g, stag).collect();
        let gather = |full: &[f64]| idx.iter().map(|&k| full[k]).collect::<Vec<f64>>();
        let scatter = |compact: &[f64], full: &mut [f64]| {
            for (&k, v) in idx.iter().zip(compact) {
                full[k] = *v;
            }
        };
        let wc = gather(w);
        let b = gather(rhs.values());
        let apply = |x: &[f64], out: &mut [f64]| {
            let mut full = vec![0.0; full_len];
            scatter(x, &mut full);
            let mut af = vec![0.0; full_len];
            match component {
                Component::R => apply_laplacian_r_diag(&full, &mut af, g, &diag, -1.0),
                Component::Z => apply_laplacian_z_diag(&full, &mut af, g, &diag, -1.0),
            }
            for (o, &k) in out.iter_mut().zip(&idx) {
                *o = af[k];
            }
        };
        let precond = |r: &[f64], z: &mut [f64]| fast.solve(rho_ref / dt, 1.0, r, z);
        let mut x = vec![0.0; b.len()];
        precond(&b, &mut x);
        let report = pcg(&apply, &precond, &|_| {}, &wc, &b, &mut x, tol, self.max_iter)
            .into_result("helmholtz", tol)?;
        let mut out = ScalarFieldRZ::zeros(g, stag);
        scatter(&x, out.values_mut());
        Ok((out, report))
    }

    /// Stokes stream function on nodes from nodal vorticity:
    /// `r ∂_r((1/r)∂_rΨ) + ∂_zzΨ = −r ω`, Ψ = 0 on the axis and walls.
    pub fn solve_stream_function(
        &self,
        omega_nodes: &ScalarFieldRZ,
        tol: f64,
    ) -> Result<(ScalarFieldRZ, LinearSolveReport)> {
        omega_nodes.expect_staggering(Staggering::Node)?;
        omega_nodes.check_finite("omega")?;
        let g = &self.grid;
        let idx: Vec<usize> = interior(g, Staggering::Node).collect();
        let b: Vec<f64> = idx
            .iter()
            .map(|&k| g.r_face(k / (g.nz + 1)) * omega_nodes.values()[k])
            .collect();
        let mut x = vec![0.0; b.len()];
        self.stream.solve(0.0, 1.0, &b, &mut x);
        let mut psi = ScalarFieldRZ::zeros(g, Staggering::Node);
        for (&k, v) in idx.iter().zip(&x) {
            psi.values_mut()[k] = *v;
        }
        let lp = stream_operator(&psi);
        let w: Vec<f64> = idx
            .iter()
            .map(|&k| {
                let (i, j) = (k / (g.nz + 1), k % (g.nz + 1));
                Staggering::Node.weight(g, i, j)
            })
            .collect();
        let res: Vec<f64> = idx.iter().zip(&b).map(|(&k, b)| -lp.values()[k] - b).collect();
        let bn = dot_w(&w, &b, &b).sqrt();
        let rel = if bn == 0.0 {
            dot_w(&w, &res, &res).sqrt()
        } else {
            dot_w(&w, &res, &res).sqrt() / bn
        };
        let report = LinearSolveReport {
            iterations: 1,
            residual_norm: rel,
            converged: rel <= tol,
        }
        .into_result("stream function", tol)?;
        Ok((psi, report))
    }
}

fn weights(g: &GridSpec, stag: Staggering, keep: impl Fn(usize, usize) -> bool) -> Vec<f64> {
    let (ni, nj) = stag.shape(g);
    let mut w = Vec::with_capacity(ni * nj);
    for i in 0..ni {
        for j in 0..nj {
            w.push(if keep(i, j) { stag.weight(g, i, j) } else { 0.0 });
        }
    }
    w
}

/// Flat indices of the unknowns of a Dirichlet problem at this staggering.
fn interior(g: &GridSpec, stag: Staggering) -> impl Iterator<Item = usize> {
    let (ni, nj) = stag.shape(g);
    let (r_lo, r_hi, z_lo, z_hi) = match stag {
        Staggering::Center => (0, ni, 0, nj),
        Staggering::RFace => (1, ni - 1, 0, nj),
        Staggering::ZFace => (0, ni, 1, nj - 1),
        Staggering::Node => (1, ni - 1, 1, nj - 1),
    };
    (r_lo..r_hi).flat_map(move |i| (z_lo..z_hi).map(move |j| i * nj + j))
}

/// `r ∂_r((1/r)∂_rΨ) + ∂_zzΨ` at interior nodes; boundary nodes are zero.
pub fn stream_operator(psi: &ScalarFieldRZ) -> ScalarFieldRZ {
    let g = psi.grid();
    let (dr2, dz2) = (g.dr() * g.dr(), g.dz() * g.dz());
    let mut out = ScalarFieldRZ::zeros(g, Staggering::Node);
    for i in 1..g.nr {
        let ri = g.r_face(i);
        let cp = ri / (g.r_center(i) * dr2);
        let cm = ri / (g.r_center(i - 1) * dr2);
        for j in 1..g.nz {
            let c = psi.get(i, j);
            let radial = cp * (psi.get(i + 1, j) - c) - cm * (c - psi.get(i - 1, j));
            let axial = (psi.get(i, j + 1) - 2.0 * c + psi.get(i, j - 1)) / dz2;
            out.set(i, j, radial + axial);
        }
    }
    out
}

/// Discrete curl of the stream function: `u^r = −(1/r)∂_zΨ`, `u^z = (1/r)∂_rΨ`.
/// The result is divergence-free to roundoff by construction.
pub fn velocity_from_stream(psi: &ScalarFieldRZ) -> Result<VelocityFieldRZ> {
    psi.expect_staggering(Staggering::Node)?;
    let g = psi.grid();
    let (dr, dz) = (g.dr(), g.dz());
    let mut u = VelocityFieldRZ::zeros(g);
    for i in 1..=g.nr {
        let r = g.r_face(i);
        for j in 0..g.nz {
            u.ur.set(i, j, -(psi.get(i, j + 1) - psi.get(i, j)) / (r * dz));
        }
    }
    for i in 0..g.nr {
        let r = g.r_center(i);
        for j in 0..=g.nz {
            u.uz.set(i, j, (psi.get(i + 1, j) - psi.get(i, j)) / (r * dr));
        }
    }
    Ok(u)
}

/// Averages cell vorticity to interior nodes; boundary nodes are left zero.
pub fn centers_to_interior_nodes(omega: &ScalarFieldRZ) -> Result<ScalarFieldRZ> {
    omega.expect_staggering(Staggering::Center)?;
    let g = omega.grid();
    let mut w = ScalarFieldRZ::zeros(g, Staggering::Node);
    for i in 1..g.nr {
        for j in 1..g.nz {
            let s = omega.get(i - 1, j - 1)
                + omega.get(i, j - 1)
                + omega.get(i - 1, j)
                + omega.get(i, j);
            w.set(i, j, 0.25 * s);
        }
    }
    Ok(w)
}

/// One-shot pressure solve; see [`EllipticSolvers::solve_pressure`].
pub fn solve_pressure(
    rho: &ScalarFieldRZ,
    rhs: &ScalarFieldRZ,
    tol: f64,
) -> Result<(ScalarFieldRZ, LinearSolveReport)> {
    EllipticSolvers::new(rho.grid()).solve_pressure(rho, rhs, tol)
}

/// One-shot viscous solve; see [`EllipticSolvers::solve_helmholtz`].
pub fn solve_helmholtz(
    rho: &ScalarFieldRZ,
    dt: f64,
    rhs: &ScalarFieldRZ,
    component: Component,
    tol: f64,
) -> Result<(ScalarFieldRZ, LinearSolveReport)> {
    EllipticSolvers::new(rho.grid()).solve_helmholtz(rho, dt, rhs, component, tol)
}

/// Divergence-free velocity whose vorticity matches `omega` (cell-centered or
/// nodal) in the interior.
pub fn stream_function_velocity(omega: &ScalarFieldRZ, tol: f64) -> Result<VelocityFieldRZ> {
    let nodes = match omega.staggering() {
        Staggering::Node => omega.clone(),
        Staggering::Center => centers_to_interior_nodes(omega)?,
        found => {
            return Err(Error::Staggering {
                expected: Staggering::Center,
                found,
            })
        }
    };
    let (psi, _) = EllipticSolvers::new(omega.grid()).solve_stream_function(&nodes, tol)?;
    velocity_from_stream(&psi)
}
