//! Direct solvers for the constant-coefficient operators `σ I − κ (L_r + L_z)`.
//!
//! The z-direction stencil has constant coefficients and is diagonalized by a
//! real trigonometric transform matching its boundary condition; each z-mode
//! then leaves a tridiagonal system in r that is solved by the Thomas
//! algorithm. The radial stencils are the same ones used by the explicit
//! operators in `mesh`, so a fast solve is an exact discrete inverse.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, Dst1, TransformType2And3};

use crate::mesh::GridSpec;

/// Boundary condition of the z-stencil, which fixes the diagonalizing transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ZBasis {
    /// cell-centered samples, zero normal derivative at both walls (DCT-II)
    Neumann,
    /// cell-centered samples, odd ghost reflection at both walls (DST-II)
    DirichletCell,
    /// interior wall-aligned samples, zero stored wall values (DST-I)
    DirichletNode,
}

enum Plan {
    T23(Arc<dyn TransformType2And3<f64>>),
    T1(Arc<dyn Dst1<f64>>),
}

pub(crate) struct SeparableSolver {
    basis: ZBasis,
    rows: usize,
    cols: usize,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    lambda: Vec<f64>,
    plan: Plan,
}

impl SeparableSolver {
    fn build(
        g: &GridSpec,
        basis: ZBasis,
        rows: usize,
        radial: impl Fn(usize) -> (f64, f64, f64),
    ) -> Self {
        let cols = match basis {
            ZBasis::DirichletNode => g.nz - 1,
            _ => g.nz,
        };
        let mut lower = Vec::with_capacity(rows);
        let mut diag = Vec::with_capacity(rows);
        let mut upper = Vec::with_capacity(rows);
        for m in 0..rows {
            let (l, d, u) = radial(m);
            lower.push(l);
            diag.push(d);
            upper.push(u);
        }
        let dz2 = g.dz() * g.dz();
        let n = cols as f64;
        let lambda = (0..cols)
            .map(|k| {
                let theta = match basis {
                    ZBasis::Neumann => PI * k as f64 / (2.0 * n),
                    ZBasis::DirichletCell => PI * (k + 1) as f64 / (2.0 * n),
                    ZBasis::DirichletNode => PI * (k + 1) as f64 / (2.0 * (n + 1.0)),
                };
                -4.0 * theta.sin().powi(2) / dz2
            })
            .collect();
        let mut planner = DctPlanner::new();
        let plan = match basis {
            ZBasis::Neumann => Plan::T23(planner.plan_dct2(cols)),
            ZBasis::DirichletCell => Plan::T23(planner.plan_dst2(cols)),
            ZBasis::DirichletNode => Plan::T1(planner.plan_dst1(cols)),
        };
        Self {
            basis,
            rows,
            cols,
            lower,
            diag,
            upper,
            lambda,
            plan,
        }
    }

    /// Pressure-type operator on cell centers: `(1/r)∂_r(r ∂_r) + ∂_zz`,
    /// homogeneous Neumann on every boundary and no flux through the axis.
    pub fn pressure(g: &GridSpec) -> Self {
        let dr2 = g.dr() * g.dr();
        Self::build(g, ZBasis::Neumann, g.nr, |i| {
            let rc = g.r_center(i);
            let cm = g.r_face(i) / (rc * dr2);
            let cp = if i + 1 < g.nr {
                g.r_face(i + 1) / (rc * dr2)
            } else {
                0.0
            };
            (cm, -(cm + cp), cp)
        })
    }

    /// u^r viscous operator on interior r-faces (rows are faces 1..nr-1).
    pub fn velocity_r(g: &GridSpec) -> Self {
        let dr2 = g.dr() * g.dr();
        Self::build(g, ZBasis::DirichletCell, g.nr - 1, |m| {
            let i = m + 1;
            let ri = g.r_face(i);
            let cp = g.r_center(i) / (ri * dr2);
            let cm = g.r_center(i - 1) / (ri * dr2);
            let d = -(cp + cm) - 1.0 / (ri * ri);
            let l = if i > 1 { cm } else { 0.0 };
            let u = if i + 1 < g.nr { cp } else { 0.0 };
            (l, d, u)
        })
    }

    /// u^z viscous operator on z-faces 1..nz-1 (rows are the nr columns of cells).
    pub fn velocity_z(g: &GridSpec) -> Self {
        let dr2 = g.dr() * g.dr();
        Self::build(g, ZBasis::DirichletNode, g.nr, |i| {
            let rc = g.r_center(i);
            let cp = g.r_face(i + 1) / (rc * dr2);
            let cm = g.r_face(i) / (rc * dr2);
            if i + 1 < g.nr {
                (cm, -(cp + cm), cp)
            } else {
                (cm, -(2.0 * cp + cm), 0.0)
            }
        })
    }

    /// Stream-function operator `r ∂_r((1/r) ∂_r) + ∂_zz` on interior nodes.
    pub fn stream(g: &GridSpec) -> Self {
        let dr2 = g.dr() * g.dr();
        Self::build(g, ZBasis::DirichletNode, g.nr - 1, |m| {
            let i = m + 1;
            let ri = g.r_face(i);
            let cp = ri / (g.r_center(i) * dr2);
            let cm = ri / (g.r_center(i - 1) * dr2);
            let l = if i > 1 { cm } else { 0.0 };
            let u = if i + 1 < g.nr { cp } else { 0.0 };
            (l, -(cp + cm), u)
        })
    }

    fn forward(&self, line: &mut [f64]) {
        match (&self.plan, self.basis) {
            (Plan::T23(p), ZBasis::Neumann) => p.process_dct2(line),
            (Plan::T23(p), _) => p.process_dst2(line),
            (Plan::T1(p), _) => p.process_dst1(line),
        }
    }

    fn inverse(&self, line: &mut [f64]) {
        let n = self.cols as f64;
        let scale = match (&self.plan, self.basis) {
            (Plan::T23(p), ZBasis::Neumann) => {
                p.process_dct3(line);
                2.0 / n
            }
            (Plan::T23(p), _) => {
                p.process_dst3(line);
                2.0 / n
            }
            (Plan::T1(p), _) => {
                p.process_dst1(line);
                2.0 / (n + 1.0)
            }
        };
        line.iter_mut().for_each(|v| *v *= scale);
    }

    /// Solves `(σ I − κ (L_r + L_z)) x = b` for `b` laid out row-major
    /// (`rows × cols`, z fastest). With `σ = 0` on the Neumann basis the
    /// constant mode is singular; it is integrated from the axis with `x = 0`
    /// in the first cell, leaving the gauge to the caller.
    pub fn solve(&self, sigma: f64, kappa: f64, b: &[f64], x: &mut [f64]) {
        let (rows, cols) = (self.rows, self.cols);
        debug_assert_eq!(b.len(), rows * cols);
        debug_assert_eq!(x.len(), rows * cols);
        x.copy_from_slice(b);
        x.par_chunks_mut(cols).for_each(|line| self.forward(line));

        let mut modes = vec![0.0; rows * cols];
        for m in 0..rows {
            for k in 0..cols {
                modes[k * rows + m] = x[m * cols + k];
            }
        }
        let singular = self.basis == ZBasis::Neumann && sigma == 0.0;
        modes
            .par_chunks_mut(rows)
            .enumerate()
            .for_each(|(k, rhs)| {
                if singular && k == 0 {
                    self.integrate_constant_mode(kappa, rhs);
                } else {
                    self.thomas(sigma, kappa, self.lambda[k], rhs);
                }
            });
        for m in 0..rows {
            for k in 0..cols {
                x[m * cols + k] = modes[k * rows + m];
            }
        }
        x.par_chunks_mut(cols).for_each(|line| self.inverse(line));
    }

    fn thomas(&self, sigma: f64, kappa: f64, lambda: f64, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut cprime = vec![0.0; n];
        let b0 = sigma - kappa * (self.diag[0] + lambda);
        let mut denom = b0;
        cprime[0] = -kappa * self.upper[0] / denom;
        rhs[0] /= denom;
        for m in 1..n {
            let a = -kappa * self.lower[m];
            let b = sigma - kappa * (self.diag[m] + lambda);
            denom = b - a * cprime[m - 1];
            cprime[m] = -kappa * self.upper[m] / denom;
            rhs[m] = (rhs[m] - a * rhs[m - 1]) / denom;
        }
        for m in (0..n - 1).rev() {
            rhs[m] -= cprime[m] * rhs[m + 1];
        }
    }

    // Row i reads lower_i (x_{i-1} - x_i) + upper_i (x_{i+1} - x_i) = -b_i / κ,
    // which is marched outward from x_0 = 0.
    fn integrate_constant_mode(&self, kappa: f64, rhs: &mut [f64]) {
        let n = rhs.len();
        let b = rhs.to_vec();
        rhs[0] = 0.0;
        for i in 0..n - 1 {
            let back = if i > 0 {
                self.lower[i] * (rhs[i] - rhs[i - 1])
            } else {
                0.0
            };
            rhs[i + 1] = rhs[i] + (-b[i] / kappa + back) / self.upper[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ScalarFieldRZ, Staggering};
    use crate::mesh::{apply_laplacian_r, apply_laplacian_z};

    fn grid() -> GridSpec {
        GridSpec::new(12, 10, 1.7, -1.0, 1.3).unwrap()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn transform_pairs_invert() {
        for (basis, n) in [
            (ZBasis::Neumann, 10),
            (ZBasis::DirichletCell, 10),
            (ZBasis::DirichletNode, 9),
        ] {
            let g = grid();
            let s = SeparableSolver::build(&g, basis, 1, |_| (0.0, -1.0, 0.0));
            assert_eq!(s.cols, n);
            let x = pseudo_random(n, 7);
            let mut y = x.clone();
            s.forward(&mut y);
            s.inverse(&mut y);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-14, "{basis:?}");
            }
        }
    }

    #[test]
    fn velocity_r_solver_inverts_explicit_stencil() {
        let g = grid();
        let s = SeparableSolver::velocity_r(&g);
        let (sigma, kappa) = (3.0, 0.7);
        let mut f = ScalarFieldRZ::zeros(&g, Staggering::RFace);
        let noise = pseudo_random((g.nr - 1) * g.nz, 3);
        f.values_mut()[g.nz..g.nr * g.nz].copy_from_slice(&noise);
        let mut af = vec![0.0; f.values().len()];
        apply_laplacian_r(f.values(), &mut af, &g, sigma, -kappa);
        let mut x = vec![0.0; noise.len()];
        s.solve(sigma, kappa, &af[g.nz..g.nr * g.nz], &mut x);
        for (a, b) in x.iter().zip(&noise) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_z_solver_inverts_explicit_stencil() {
        let g = grid();
        let s = SeparableSolver::velocity_z(&g);
        let (sigma, kappa) = (0.5, 2.0);
        let nzf = g.nz + 1;
        let mut f = ScalarFieldRZ::zeros(&g, Staggering::ZFace);
        let noise = pseudo_random(g.nr * (g.nz - 1), 5);
        for i in 0..g.nr {
            for j in 1..g.nz {
                f.set(i, j, noise[i * (g.nz - 1) + j - 1]);
            }
        }
        let mut af = vec![0.0; f.values().len()];
        apply_laplacian_z(f.values(), &mut af, &g, sigma, -kappa);
        let mut b = Vec::new();
        for i in 0..g.nr {
            b.extend_from_slice(&af[i * nzf + 1..i * nzf + g.nz]);
        }
        let mut x = vec![0.0; b.len()];
        s.solve(sigma, kappa, &b, &mut x);
        for (a, b) in x.iter().zip(&noise) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
