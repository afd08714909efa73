use axiflow::config::SimConfig;
use axiflow::momentum::{read_checkpoint, run, run_resumed, write_checkpoint, NoCallbacks};

const BASE: &str = "grid.nr = 24\ngrid.nz = 48\ngrid.r_max = 3\ngrid.z_min = -3\n\
    grid.z_max = 3\ntime.cfl = 0.4\ntime.t_end = 0.3\ntime.dt_max = 0.02\n\
    time.sample_every = 5\ninit.family = vortex_ring\ninit.A = 1\ninit.r0 = 1\n\
    init.sigma = 0.25\n";

/// The base scenario with the keys set in `extra` replaced.
fn config(extra: &str) -> SimConfig {
    let key = |l: &str| l.split('=').next().unwrap().trim().to_string();
    let over: Vec<String> = extra.lines().map(key).collect();
    let mut text: String = BASE
        .lines()
        .filter(|l| !over.contains(&key(l)))
        .map(|l| format!("{}\n", l.trim()))
        .collect();
    text.push_str(extra);
    SimConfig::parse(&text).unwrap()
}

#[test]
fn zero_horizon_gives_one_record() {
    let out = run(&config("time.t_end = 0\n"), &mut NoCallbacks).unwrap();
    assert_eq!(out.steps, 0);
    assert_eq!(out.records.len(), 1);
    assert_eq!(out.records[0].t, 0.0);
}

#[test]
fn fluid_at_rest_stays_at_rest() {
    let out = run(&config("init.A = 0\n"), &mut NoCallbacks).unwrap();
    assert!(out.steps > 0);
    assert_eq!(out.state.u.max_abs(), 0.0);
    assert!(out.records.iter().all(|r| r.kinetic_energy == 0.0));
}

#[test]
fn records_follow_the_sampling_stride() {
    let out = run(&config(""), &mut NoCallbacks).unwrap();
    assert_eq!(out.records.len() as u64, 1 + out.steps / 5);
    assert!((out.state.t - 0.3).abs() < 1e-12);
    assert!(out.max_div <= 1e-8);
    assert!(out.records.windows(2).all(|w| w[1].kinetic_energy <= w[0].kinetic_energy));
}

#[test]
fn runs_are_deterministic() {
    let c = config("fluid.m = 0.5\nfluid.M = 2\ninit.density_family = off_axis_blob\n\
                    init.epsilon = 0.5\ninit.blob_center = 1.2, 0\ninit.blob_width = 0.2\n");
    let a = run(&c, &mut NoCallbacks).unwrap();
    let b = run(&c, &mut NoCallbacks).unwrap();
    assert_eq!(a.state.u.ur.values(), b.state.u.ur.values());
    assert_eq!(a.state.rho.values(), b.state.rho.values());
    assert_eq!(a.accumulators, b.accumulators);
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let c = config("");
    let out = run(&c, &mut NoCallbacks).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_checkpoint(dir.path(), &c, &out.state, out.steps, &out.accumulators, out.initial_energy)
        .unwrap();
    let back = read_checkpoint(dir.path()).unwrap();
    assert_eq!(back.state.t.to_bits(), out.state.t.to_bits());
    assert_eq!(back.state.u.uz.values(), out.state.u.uz.values());
    assert_eq!(back.state.pi.values(), out.state.pi.values());
    assert_eq!(back.manifest.accumulators(), out.accumulators);
    assert_eq!(back.manifest.step, out.steps);
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_string_lossy();
    let c = config(&format!("out.dir = {out_dir}\nout.checkpoint_every = 4\n"));
    let full = run(&c, &mut NoCallbacks).unwrap();
    let ck = read_checkpoint(&dir.path().join("checkpoints/step-00000008")).unwrap();
    assert_eq!(ck.manifest.step, 8);
    let resumed = run_resumed(&c, ck, &mut NoCallbacks).unwrap();
    assert_eq!(resumed.steps, full.steps);
    assert_eq!(resumed.state.t.to_bits(), full.state.t.to_bits());
    assert_eq!(resumed.state.u.ur.values(), full.state.u.ur.values());
    assert_eq!(resumed.state.u.uz.values(), full.state.u.uz.values());
    assert_eq!(resumed.accumulators, full.accumulators);
    // Debug text, since the disabled spectral column is NaN
    let last = |o: &axiflow::momentum::RunOutput| format!("{:?}", o.records.last().unwrap());
    assert_eq!(last(&resumed), last(&full));
}

#[test]
fn resume_rejects_a_different_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("");
    let out = run(&c, &mut NoCallbacks).unwrap();
    write_checkpoint(dir.path(), &c, &out.state, out.steps, &out.accumulators, out.initial_energy)
        .unwrap();
    let other = config("time.cfl = 0.3\n");
    let ck = read_checkpoint(dir.path()).unwrap();
    assert!(run_resumed(&other, ck, &mut NoCallbacks).is_err());
}
