//! The run loop: adaptive steps, sampled diagnostics and checkpoints.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Stepper, StepReport};
use crate::config::{DiffusionMode, SimConfig};
use crate::diagnostics::{
    bracket, higher_order_norms, kinetic_energy, low_freq_energy, DiagnosticsRecord,
};
use crate::error::{Error, Result};
use crate::field::{Staggering, VelocityFieldRZ};
use crate::mesh::GradientSamples;
use crate::state::{make_initial_data, read_grid_file, write_grid_file, FlowState};
use crate::transport::max_stable_dt;

/// Time integrals accumulated over every step. The dissipation uses
/// `dt ‖∇u^{n+½}‖²` with `u^{n+½} = ½(uⁿ + uⁿ⁺¹)`, the rate Crank–Nicolson
/// actually dissipates; trapezoid sums would count undamped grid-scale
/// oscillations as dissipated. The other two are trapezoid sums.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulators {
    /// `∫ ‖∇u‖²_{L²}`
    pub dissipation: f64,
    /// `∫ ‖∇u‖_{L∞}`
    pub lipschitz: f64,
    /// `∫ max|u^r/r|`
    pub ur_over_r: f64,
}

#[derive(Debug, Clone, Copy)]
struct StepNorms {
    grad_sq: f64,
    grad_linf: f64,
    ur_over_r_linf: f64,
}

impl StepNorms {
    fn of(u: &VelocityFieldRZ) -> Result<Self> {
        let gs = GradientSamples::new(u)?;
        Ok(Self {
            grad_sq: gs.l2_squared(),
            grad_linf: gs.linf(),
            ur_over_r_linf: gs.ur_over_r.max_abs(),
        })
    }
}

impl Accumulators {
    fn advance(&mut self, dt: f64, a: &StepNorms, b: &StepNorms, mid_grad_sq: f64) {
        self.dissipation += dt * mid_grad_sq;
        self.lipschitz += 0.5 * dt * (a.grad_linf + b.grad_linf);
        self.ur_over_r += 0.5 * dt * (a.ur_over_r_linf + b.ur_over_r_linf);
    }
}

/// Hooks invoked by [`run`] as the simulation progresses. Errors abort the run.
pub trait RunCallbacks {
    fn on_record(&mut self, _record: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }

    fn on_step(&mut self, _step: u64, _state: &FlowState, _report: &StepReport) -> Result<()> {
        Ok(())
    }
}

pub struct NoCallbacks;

impl RunCallbacks for NoCallbacks {}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: FlowState,
    pub records: Vec<DiagnosticsRecord>,
    pub steps: u64,
    pub accumulators: Accumulators,
    /// Initial kinetic energy `½‖√ρ₀u₀‖²`.
    pub initial_energy: f64,
    pub max_div: f64,
    pub max_courant: f64,
    pub wall_time: f64,
}

/// Runs `config` from its initial data to `time.t_end`.
pub fn run(config: &SimConfig, callbacks: &mut dyn RunCallbacks) -> Result<RunOutput> {
    config.validate()?;
    let state = make_initial_data(&config.init, &config.grid)?;
    let e0 = kinetic_energy(&state.rho, &state.u)?;
    drive(config, state, 0, Accumulators::default(), e0, true, callbacks)
}

/// Continues a run from a checkpoint written with the same physics and
/// numerics (`time.t_end` and `out.*` may differ).
pub fn run_resumed(
    config: &SimConfig,
    checkpoint: Checkpoint,
    callbacks: &mut dyn RunCallbacks,
) -> Result<RunOutput> {
    config.validate()?;
    if checkpoint.manifest.resume_hash != config.resume_hash() {
        return Err(Error::Invalid(
            "checkpoint was written with a different configuration".into(),
        ));
    }
    if checkpoint.state.grid() != &config.grid {
        return Err(Error::GridMismatch("checkpoint grid differs from config".into()));
    }
    let m = &checkpoint.manifest;
    let (step, acc, e0) = (m.step, m.accumulators(), f64::from_bits(m.initial_energy_bits));
    drive(config, checkpoint.state, step, acc, e0, false, callbacks)
}

fn select_dt(
    config: &SimConfig,
    stepper: &Stepper,
    state: &FlowState,
    norms: &StepNorms,
) -> Result<f64> {
    let tc = &config.time;
    let mut dt = tc.dt_max.min(max_stable_dt(&state.u, tc.cfl));
    if stepper.diffusion_mode() == DiffusionMode::Explicit {
        dt = dt.min(0.8 * stepper.explicit_limit(state.rho.min()));
    }
    if tc.dissipation_cfl > 0.0 && norms.grad_sq > 0.0 {
        let energy2 = 2.0 * kinetic_energy(&state.rho, &state.u)?;
        dt = dt.min(tc.dissipation_cfl * energy2 / norms.grad_sq);
    }
    Ok(dt.min(tc.t_end - state.t))
}

fn record(
    config: &SimConfig,
    state: &FlowState,
    step: u64,
    acc: &Accumulators,
    e0: f64,
    previous: Option<(&VelocityFieldRZ, f64)>,
) -> Result<DiagnosticsRecord> {
    let mut r = DiagnosticsRecord::from_state(state)?;
    r.extras.step = step;
    r.lipschitz_integral = acc.lipschitz;
    r.extras.dissipation_integral = acc.dissipation;
    r.extras.ur_over_r_integral = acc.ur_over_r;
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    r.energy_residual = (r.kinetic_energy + acc.dissipation - e0) / scale;
    if let Some((u_prev, dt)) = previous {
        let t = state.t;
        r.extras.higher_order = Some(t * bracket(t) * higher_order_norms(state, u_prev, dt)?);
    }
    if config.diag.cart_n > 0 {
        r.low_freq_energy = low_freq_energy(
            &state.u,
            state.t,
            config.alpha(),
            config.fluid.big_m,
            config.diag.cart_n,
        )?;
    }
    Ok(r)
}

fn drive(
    config: &SimConfig,
    mut state: FlowState,
    mut step: u64,
    mut acc: Accumulators,
    e0: f64,
    emit_initial: bool,
    callbacks: &mut dyn RunCallbacks,
) -> Result<RunOutput> {
    let clock = Instant::now();
    let stepper = Stepper::new(&config.grid, &config.solver)
        .with_density_bounds(config.fluid.m, config.fluid.big_m);
    let sample_every = config.time.sample_every.max(1) as u64;
    let out_dir = config.out.dir.as_ref().map(PathBuf::from);
    let mut records = Vec::new();
    if emit_initial {
        let r = record(config, &state, step, &acc, e0, None)?;
        callbacks.on_record(&r)?;
        records.push(r);
    }
    let mut norms = StepNorms::of(&state.u)?;
    let (mut max_div, mut max_courant) = (0.0f64, 0.0f64);
    let t_end = config.time.t_end;
    while t_end - state.t > 1e-12 * t_end {
        let dt = select_dt(config, &stepper, &state, &norms)?;
        let (next, report) = match stepper.step(&state, dt) {
            Ok(v) => v,
            Err(e) => {
                if let Some(dir) = &out_dir {
                    dump_failure(dir, &state, step, &e)?;
                }
                return Err(e);
            }
        };
        let next_norms = StepNorms::of(&next.u)?;
        let mut mid = state.u.clone();
        mid.axpy(1.0, &next.u);
        mid.scale(0.5);
        acc.advance(dt, &norms, &next_norms, GradientSamples::new(&mid)?.l2_squared());
        max_div = max_div.max(report.div_linf);
        max_courant = max_courant.max(report.courant);
        step += 1;
        callbacks.on_step(step, &next, &report)?;
        if step % sample_every == 0 {
            let r = record(config, &next, step, &acc, e0, Some((&state.u, dt)))?;
            callbacks.on_record(&r)?;
            records.push(r);
        }
        state = next;
        norms = next_norms;
        if let Some(dir) = &out_dir {
            let every = config.out.checkpoint_every as u64;
            if every > 0 && step % every == 0 {
                let path = dir.join("checkpoints").join(format!("step-{step:08}"));
                write_checkpoint(&path, config, &state, step, &acc, e0)?;
            }
        }
    }
    if let Some(dir) = &out_dir {
        write_checkpoint(&dir.join("checkpoints").join("final"), config, &state, step, &acc, e0)?;
    }
    Ok(RunOutput {
        state,
        records,
        steps: step,
        accumulators: acc,
        initial_energy: e0,
        max_div,
        max_courant,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

fn dump_failure(dir: &Path, state: &FlowState, step: u64, err: &Error) -> Result<()> {
    let path = dir.join("failure");
    write_state(&path, state)?;
    std::fs::write(
        path.join("error.txt"),
        format!("step {} from t = {:?} failed: {err}\n", step + 1, state.t),
    )?;
    Ok(())
}

/// Checkpoint metadata. Floats that must survive bit-exactly are stored as
/// IEEE-754 bit patterns next to their readable values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub resume_hash: String,
    pub step: u64,
    pub t: f64,
    pub t_bits: u64,
    pub initial_energy_bits: u64,
    pub dissipation_bits: u64,
    pub lipschitz_bits: u64,
    pub ur_over_r_bits: u64,
}

impl CheckpointManifest {
    pub fn accumulators(&self) -> Accumulators {
        Accumulators {
            dissipation: f64::from_bits(self.dissipation_bits),
            lipschitz: f64::from_bits(self.lipschitz_bits),
            ur_over_r: f64::from_bits(self.ur_over_r_bits),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub state: FlowState,
    pub manifest: CheckpointManifest,
}

const FIELDS: [&str; 4] = ["rho", "ur", "uz", "pi"];

fn write_state(dir: &Path, state: &FlowState) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, f) in FIELDS.iter().zip([&state.rho, &state.u.ur, &state.u.uz, &state.pi]) {
        write_grid_file(&dir.join(format!("{name}.grid")), f)?;
    }
    Ok(())
}

/// Writes the full state as grid files plus `manifest.json` into `dir`.
pub fn write_checkpoint(
    dir: &Path,
    config: &SimConfig,
    state: &FlowState,
    step: u64,
    acc: &Accumulators,
    initial_energy: f64,
) -> Result<()> {
    write_state(dir, state)?;
    let manifest = CheckpointManifest {
        resume_hash: config.resume_hash(),
        step,
        t: state.t,
        t_bits: state.t.to_bits(),
        initial_energy_bits: initial_energy.to_bits(),
        dissipation_bits: acc.dissipation.to_bits(),
        lipschitz_bits: acc.lipschitz.to_bits(),
        ur_over_r_bits: acc.ur_over_r.to_bits(),
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn read_checkpoint(dir: &Path) -> Result<Checkpoint> {
    let manifest: CheckpointManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let read = |name: &str| read_grid_file(&dir.join(format!("{name}.grid")));
    let (rho, ur, uz, pi) = (read("rho")?, read("ur")?, read("uz")?, read("pi")?);
    rho.expect_staggering(Staggering::Center)?;
    pi.expect_staggering(Staggering::Center)?;
    let state = FlowState {
        t: f64::from_bits(manifest.t_bits),
        rho,
        u: VelocityFieldRZ::new(ur, uz)?,
        pi,
    };
    state.validate()?;
    Ok(Checkpoint { state, manifest })
}
