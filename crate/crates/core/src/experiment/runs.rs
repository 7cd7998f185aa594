//! The named experiments.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::group_action::{haar_sample, orbit_tangent_frame, ActionKind, GroupAction, GroupElement};
use crate::identities::{default_suite_actions, run_identity_suite};
use crate::sde::{
    integrate, make_auxiliary_system, make_coupled_system, make_fully_projected_system,
    make_isotropic_curvature_system, make_orbit_bm_system, make_projected_system, make_uncorrected_isotropic_system,
    radial_oracle_system, reference_point, sample_invariant_initial, simulate_batch, splitmix, BatchConfig,
    CoupledBase, InitialLaw, LogVolumeProfile, PotentialSpec, RadialProfile, Recording, SdeSystem, TrajectoryBatch,
};
use crate::stats::{
    invariance_test, ks_one_sample, ks_report, ks_two_sample, permutation_test, stationary_check,
    stationary_reference, wrapped_normal_cdf, TestRole,
};

use super::config::ExperimentConfig;
use super::report::{CheckDetail, CheckEntry, RunReport};

const INIT_A: u64 = 1;
const INIT_B: u64 = 2;
const INIT_C: u64 = 3;
const INIT_ORACLE: u64 = 4;
const PATH_A: u64 = 11;
const PATH_B: u64 = 12;
const PATH_C: u64 = 13;
const PATH_ORACLE: u64 = 14;
const PATH_SECOND: u64 = 15;
const TEST_BASE: u64 = 1000;

fn stream(cfg: &ExperimentConfig, id: u64) -> u64 {
    splitmix(cfg.seed, id)
}

fn initial_points(action: &GroupAction, law: InitialLaw, n: usize, seed: u64) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, i as u64));
            sample_invariant_initial(action, law, &mut rng)
        })
        .collect()
}

fn recording(cfg: &ExperimentConfig, times: &[f64]) -> Recording {
    if cfg.dump_trajectories {
        Recording::Full
    } else {
        Recording::Checkpoints(times.to_vec())
    }
}

fn dump(cfg: &ExperimentConfig, batch: &TrajectoryBatch, name: &str) -> Result<()> {
    if cfg.dump_trajectories {
        batch.write_csv(&cfg.out_dir.join("trajectories").join(name), cfg.long_format)?;
    }
    Ok(())
}

fn at_time(batch: &TrajectoryBatch, t: f64) -> Vec<DVector<f64>> {
    let j = batch.time_index(t).expect("time was recorded");
    batch.states_at(j)
}

fn radii(xs: &[DVector<f64>]) -> Vec<f64> {
    xs.iter().map(|x| x.norm()).collect()
}

fn time_label(t: f64) -> String {
    format!("t{t}")
}

fn beta_dip_spec(cfg: &ExperimentConfig, action: &GroupAction) -> Result<PotentialSpec> {
    PotentialSpec::beta_dip(action, cfg.potential, cfg.alpha, cfg.beta_depth, cfg.bump_lo, cfg.bump_hi)
}

/// Batches of the projected and curvature-corrected systems, plus the
/// uncorrected control, at one step size.
struct EquivalenceBatches {
    projected: TrajectoryBatch,
    corrected: TrajectoryBatch,
    control: TrajectoryBatch,
}

fn equivalence_batches(
    cfg: &ExperimentConfig,
    action: &GroupAction,
    spec: &PotentialSpec,
    dt: f64,
    substeps: u32,
    rec: Recording,
) -> Result<EquivalenceBatches> {
    let n = cfg.n_trajectories;
    let projected = make_projected_system(action, spec);
    let corrected = make_isotropic_curvature_system(action, spec, cfg.curvature_source);
    let control = make_uncorrected_isotropic_system(action, spec);
    let run = |system: &dyn SdeSystem, init: u64, path: u64| {
        let x0 = initial_points(action, cfg.initial, n, stream(cfg, init));
        let bc = BatchConfig::new(dt, cfg.horizon, stream(cfg, path)).with_recording(rec.clone()).with_substeps(substeps);
        simulate_batch(system, &x0, &bc)
    };
    Ok(EquivalenceBatches {
        projected: run(&projected, INIT_A, PATH_A)?,
        corrected: run(&corrected, INIT_B, PATH_B)?,
        control: run(&control, INIT_C, PATH_C)?,
    })
}

/// Projected and curvature-corrected systems agree in law at every
/// checkpoint; the uncorrected control does not.
pub fn run_equivalence(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::new(cfg);
    let action = GroupAction::new(cfg.action, cfg.dim)?;
    let spec = beta_dip_spec(cfg, &action)?;
    let trivial = cfg.beta_depth == 0.0;
    if trivial {
        report.note("beta equals alpha: the control coincides with both systems and is informational");
    }
    let substeps = if cfg.dt_halving { 2 } else { 1 };
    let coarse = equivalence_batches(cfg, &action, &spec, cfg.dt, substeps, recording(cfg, &cfg.checkpoints))?;
    for (b, name) in [(&coarse.projected, "projected"), (&coarse.corrected, "curvature_corrected"), (&coarse.control, "uncorrected_control")] {
        report.diagnostics.absorb(b);
        dump(cfg, b, name)?;
    }

    let mut test_id = TEST_BASE;
    let mut next_seed = || {
        test_id += 1;
        stream(cfg, test_id)
    };
    let mut coarse_stats = Vec::new();
    for &t in &cfg.checkpoints {
        let a = at_time(&coarse.projected, t);
        let b = at_time(&coarse.corrected, t);
        let c = at_time(&coarse.control, t);
        let eq = permutation_test(&a, &b, cfg.n_permutations, next_seed(), cfg.level, TestRole::Equivalence)?;
        let ctl = permutation_test(&a, &c, cfg.n_permutations, next_seed(), cfg.level, TestRole::NegativeControl)?;
        coarse_stats.push([(eq.statistic_value, eq.null_std.unwrap_or(0.0)), (ctl.statistic_value, ctl.null_std.unwrap_or(0.0))]);
        report.push(CheckEntry::equivalence(format!("equivalence_{}", time_label(t)), Some(t), true, eq));
        report.push(CheckEntry::equivalence(format!("negative_control_{}", time_label(t)), Some(t), !trivial, ctl));
    }

    let terminal_a = coarse.projected.terminal();
    let terminal_b = coarse.corrected.terminal();
    if let (ActionKind::Rotation, Some(profile)) = (action.kind(), spec.radial.as_ref()) {
        let oracle = radial_oracle_system(profile, cfg.dim)?;
        let n_oracle = cfg.n_trajectories * cfg.oracle_factor.max(1);
        let r0: Vec<DVector<f64>> = initial_points(&action, cfg.initial, n_oracle, stream(cfg, INIT_ORACLE))
            .iter()
            .map(|x| DVector::from_element(1, x.norm()))
            .collect();
        let bc = BatchConfig::new(cfg.dt, cfg.horizon, stream(cfg, PATH_ORACLE));
        let ob = simulate_batch(&oracle, &r0, &bc)?;
        let oracle_r: Vec<f64> = ob.terminal().iter().map(|r| r[0]).collect();
        for (samples, name) in [(&terminal_a, "radial_oracle_projected"), (&terminal_b, "radial_oracle_curvature_corrected")] {
            let (d, p) = ks_two_sample(&radii(samples), &oracle_r);
            let rep = ks_report(d, p, samples.len(), oracle_r.len(), cfg.level, TestRole::Equivalence);
            report.push(CheckEntry::equivalence(name, Some(cfg.horizon), true, rep));
        }
    } else {
        report.note("no one-dimensional radial reduction for this action; oracle check skipped");
    }

    let first = cfg.checkpoints.iter().copied().fold(f64::INFINITY, f64::min);
    let mut invariance_times = vec![first];
    if cfg.horizon > first && cfg.checkpoints.iter().any(|&t| t == cfg.horizon) {
        invariance_times.push(cfg.horizon);
    }
    for &t in &invariance_times {
        for (batch, name) in [(&coarse.projected, "projected"), (&coarse.corrected, "curvature_corrected")] {
            let samples = at_time(batch, t);
            let m = cfg.invariance_samples.min(samples.len());
            let rep = invariance_test(&samples[..m], &action, cfg.group_draws, cfg.n_permutations, next_seed(), cfg.level)?;
            report.push(CheckEntry::equivalence(format!("invariance_{name}_{}", time_label(t)), Some(t), true, rep));
        }
    }

    if cfg.dt_halving {
        let fine = equivalence_batches(cfg, &action, &spec, cfg.dt / 2.0, 1, Recording::Checkpoints(cfg.checkpoints.clone()))?;
        for b in [&fine.projected, &fine.corrected, &fine.control] {
            report.diagnostics.absorb(b);
        }
        for (k, &t) in cfg.checkpoints.iter().enumerate() {
            let a = at_time(&fine.projected, t);
            let b = at_time(&fine.corrected, t);
            let c = at_time(&fine.control, t);
            let eq = permutation_test(&a, &b, cfg.n_permutations, next_seed(), cfg.level, TestRole::Equivalence)?;
            let ctl = permutation_test(&a, &c, cfg.n_permutations, next_seed(), cfg.level, TestRole::NegativeControl)?;
            // shift of each statistic in units of its coarse permutation-null spread
            for ((coarse_value, null_std), fine, label) in
                [(coarse_stats[k][0], &eq, "equivalence"), (coarse_stats[k][1], &ctl, "negative_control")]
            {
                let shift = if null_std > 0.0 { (fine.statistic_value - coarse_value).abs() / null_std } else { 0.0 };
                report.push(CheckEntry::bound(format!("half_dt_{label}_shift_{}", time_label(t)), shift, 1.0));
            }
            report.push(CheckEntry::equivalence(format!("half_dt_equivalence_{}", time_label(t)), Some(t), true, eq));
            report.push(CheckEntry::equivalence(format!("half_dt_negative_control_{}", time_label(t)), Some(t), !trivial, ctl));
        }
    }
    Ok(report)
}

/// `g·X` of the coupled system agrees in law with the auxiliary system, for
/// both base systems.
pub fn run_coupling(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::new(cfg);
    let action = GroupAction::new(cfg.action, cfg.dim)?;
    let spec = beta_dip_spec(cfg, &action)?;
    let n = cfg.n_trajectories;
    let rec = recording(cfg, &cfg.checkpoints);

    let auxiliary = make_auxiliary_system(&action, &spec);
    let z0 = initial_points(&action, cfg.initial, n, stream(cfg, INIT_A));
    let zb = simulate_batch(&auxiliary, &z0, &BatchConfig::new(cfg.dt, cfg.horizon, stream(cfg, PATH_A)).with_recording(rec.clone()))?;
    report.diagnostics.absorb(&zb);
    dump(cfg, &zb, "auxiliary")?;

    for (k, base) in [CoupledBase::Projected, CoupledBase::Isotropic].into_iter().enumerate() {
        let tag = match base {
            CoupledBase::Projected => "projected",
            CoupledBase::Isotropic => "isotropic",
        };
        let system = make_coupled_system(&action, &spec, base);
        let x0: Vec<DVector<f64>> = initial_points(&action, cfg.initial, n, stream(cfg, INIT_B + k as u64))
            .iter()
            .map(|x| system.initial_state(x))
            .collect();
        let bc = BatchConfig::new(cfg.dt, cfg.horizon, stream(cfg, PATH_B + k as u64)).with_recording(rec.clone());
        let batch = simulate_batch(&system, &x0, &bc)?;
        report.diagnostics.absorb(&batch);
        let images = image_batch(&system, &batch);
        dump(cfg, &images, &format!("coupled_{tag}_image"))?;
        for &t in &cfg.checkpoints {
            let a = at_time(&images, t);
            let z = at_time(&zb, t);
            let seed = stream(cfg, TEST_BASE + 10 * k as u64 + 1 + (t * 1e6) as u64);
            let rep = permutation_test(&a, &z, cfg.n_permutations, seed, cfg.level, TestRole::Equivalence)?;
            report.push(CheckEntry::equivalence(format!("coupled_{tag}_vs_auxiliary_{}", time_label(t)), Some(t), true, rep));
        }
        report.push(CheckEntry::bound(format!("coupled_{tag}_orthogonality_defect"), batch.max_post_retraction_defect(), 1e-6));
    }
    Ok(report)
}

fn image_batch(system: &dyn SdeSystem, batch: &TrajectoryBatch) -> TrajectoryBatch {
    let mut out = batch.clone();
    for traj in &mut out.states {
        for s in traj.iter_mut() {
            *s = system.image(s);
        }
    }
    out
}

fn checkpoint_grid(start: f64, step: f64, end: f64, dt: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut k = 0usize;
    loop {
        let t = start + k as f64 * step;
        if t > end + 1e-9 {
            break;
        }
        // snap onto the integrator grid
        times.push((t / dt).round() * dt);
        k += 1;
    }
    times
}

/// The projected system with `β = φ(log vol)` settles to the plateau law
/// `r^{(d−1)ε²}e^{−f}` above the transition region.
pub fn run_stationary(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::new(cfg);
    let action = GroupAction::new(cfg.action, cfg.dim)?;
    let profile = LogVolumeProfile::new(cfg.tau0, cfg.tau1, cfg.epsilon)?;
    let spec = PotentialSpec::log_volume_profile(&action, cfg.potential, profile);
    let system = make_projected_system(&action, &spec);
    let times = checkpoint_grid(cfg.burn_in.max(cfg.dt), cfg.thin, cfg.horizon, cfg.dt);
    let x0 = initial_points(&action, cfg.initial, cfg.n_trajectories, stream(cfg, INIT_A));
    let bc = BatchConfig::new(cfg.dt, cfg.horizon, stream(cfg, PATH_A)).with_recording(recording(cfg, &times));
    let batch = simulate_batch(&system, &x0, &bc)?;
    report.diagnostics.absorb(&batch);
    dump(cfg, &batch, "projected")?;

    let lower = (cfg.tau1 / (cfg.dim as f64 - 1.0)).exp();
    let samples: Vec<f64> = times.iter().flat_map(|&t| radii(&at_time(&batch, t))).collect();
    report.note(format!("{} thinned samples from {} checkpoints; plateau starts at r = {lower:.4}", samples.len(), times.len()));

    let reference = stationary_reference(&action, cfg.potential, profile, lower)?;
    let check = stationary_check(&samples, &reference, cfg.bins, cfg.level)?;
    report.push(CheckEntry {
        name: "stationary_plateau".into(),
        required: true,
        time: None,
        passed: check.verdict.passed(),
        detail: CheckDetail::Stationary(check),
    });

    let eps_control = if cfg.epsilon + 0.5 <= 1.0 { cfg.epsilon + 0.5 } else { cfg.epsilon - 0.5 };
    let wrong = LogVolumeProfile::new(cfg.tau0, cfg.tau1, eps_control)?;
    let control_ref = stationary_reference(&action, cfg.potential, wrong, lower)?;
    let control = stationary_check(&samples, &control_ref, cfg.bins, cfg.level)?;
    report.push(CheckEntry {
        name: "epsilon_mismatch_control".into(),
        required: true,
        time: None,
        passed: !control.verdict.passed(),
        detail: CheckDetail::Stationary(control),
    });

    let late: Vec<f64> = times.iter().filter(|&&t| t >= 2.0 * cfg.burn_in - 1e-9).flat_map(|&t| radii(&at_time(&batch, t))).collect();
    if !late.is_empty() && cfg.burn_in > 0.0 {
        let late_check = stationary_check(&late, &reference, cfg.bins, cfg.level)?;
        report.push(CheckEntry {
            name: "stationary_doubled_burn_in".into(),
            required: false,
            time: None,
            passed: late_check.verdict.passed(),
            detail: CheckDetail::Stationary(late_check),
        });
    }
    Ok(report)
}

/// Haar draw from the stabilizer of the reference anchor, when it is
/// nontrivial.
fn stabilizer_sample<R: Rng + ?Sized>(action: &GroupAction, rng: &mut R) -> Result<Option<GroupElement>> {
    let d = action.matrix_dim();
    match action.kind() {
        ActionKind::Rotation if d >= 3 => {
            let sub = GroupAction::new(ActionKind::Rotation, d - 1)?;
            let q = haar_sample(&sub, rng);
            let mut m = DMatrix::identity(d, d);
            m.view_mut((1, 1), (d - 1, d - 1)).copy_from(q.matrix());
            Ok(Some(GroupElement::new(m)?))
        }
        ActionKind::ConjugationSymmetric if d >= 3 => {
            let mut signs: Vec<f64> = (0..d - 1).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            signs.push(signs.iter().product());
            Ok(Some(GroupElement::new(DMatrix::from_diagonal(&DVector::from_vec(signs)))?))
        }
        _ => Ok(None),
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// The group process maps the anchor to Brownian motion on its orbit.
pub fn run_orbit_bm(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::new(cfg);
    let action = GroupAction::new(cfg.action, cfg.dim)?;
    let anchor = reference_point(&action) * cfg.orbit_radius;
    let system = make_orbit_bm_system(&action, &anchor, cfg.orbit_diffusion)?;
    let orbit_dim = orbit_tangent_frame(&action, &anchor, None)?.orbit_dim;
    let times = [cfg.short_time, cfg.horizon];
    let x0 = vec![system.initial_state(); cfg.n_trajectories];
    let bc = BatchConfig::new(cfg.group_dt, cfg.horizon, stream(cfg, PATH_A)).with_recording(recording(cfg, &times));
    let batch = simulate_batch(&system, &x0, &bc)?;
    report.diagnostics.absorb(&batch);
    let images = image_batch(&system, &batch);
    dump(cfg, &images, "orbit_image")?;
    let terminal = at_time(&images, cfg.horizon);

    let so2 = action.kind() == ActionKind::Rotation && cfg.dim == 2;
    if so2 {
        let base = anchor[1].atan2(anchor[0]);
        let angles: Vec<f64> = terminal.iter().map(|y| wrap_angle(y[1].atan2(y[0]) - base)).collect();
        let sigma = (2.0 * cfg.orbit_diffusion * cfg.horizon).sqrt() / cfg.orbit_radius;
        let (d, p) = ks_one_sample(&angles, |a| wrapped_normal_cdf(a, sigma));
        let rep = ks_report(d, p, angles.len(), 0, cfg.level, TestRole::Equivalence);
        report.push(CheckEntry::equivalence("wrapped_gaussian_angle", Some(cfg.horizon), true, rep));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(stream(cfg, INIT_A));
        match stabilizer_sample(&action, &mut rng)? {
            Some(h) => {
                let moved = terminal.iter().map(|y| action.apply(&h, y)).collect::<Result<Vec<_>>>()?;
                let rep = permutation_test(&terminal, &moved, cfg.n_permutations, stream(cfg, TEST_BASE), cfg.level, TestRole::Equivalence)?;
                report.push(CheckEntry::equivalence("stabilizer_invariance", Some(cfg.horizon), true, rep));
            }
            None => report.note("the anchor has a trivial stabilizer; invariance check skipped"),
        }
    }

    let conservation_tol = if so2 { 1e-6 } else { 1e-8 };
    report.push(CheckEntry::bound("conservation_defect", batch.max_conservation_defect(), conservation_tol));
    report.push(CheckEntry::bound("orthogonality_defect", batch.max_post_retraction_defect(), 1e-6));

    if cfg.orbit_diffusion > 0.0 {
        let early = at_time(&images, cfg.short_time);
        let msd = early.iter().map(|y| (y - &anchor).norm_squared()).sum::<f64>() / early.len() as f64;
        let ratio = msd / (2.0 * cfg.orbit_diffusion * orbit_dim as f64 * cfg.short_time);
        report.push(CheckEntry::scalar("short_time_variance_ratio", Some(cfg.short_time), ratio, 1.0, 0.1, true));
    }
    Ok(report)
}

/// Quadratic-variation rate and drift coefficient of an image path.
struct PathRates {
    qv_rate: f64,
    drift: f64,
}

fn path_rates(path: &[DVector<f64>], dt: f64) -> PathRates {
    let mut qv = 0.0;
    let mut drift = 0.0;
    for w in path.windows(2) {
        let dy = &w[1] - &w[0];
        qv += dy.norm_squared();
        drift += dy.dot(&w[0]) / (w[0].norm_squared() * dt);
    }
    let steps = (path.len() - 1) as f64;
    PathRates { qv_rate: qv / (steps * dt), drift: drift / steps }
}

fn mean_rates(rates: &[PathRates]) -> PathRates {
    let n = rates.len() as f64;
    PathRates {
        qv_rate: rates.iter().map(|r| r.qv_rate).sum::<f64>() / n,
        drift: rates.iter().map(|r| r.drift).sum::<f64>() / n,
    }
}

/// Rotating the anchor by `θ = √2 W` does not give orbit Brownian motion
/// unless the orbit has unit radius.
pub fn run_counterexample(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::new(cfg);
    let action = GroupAction::new(cfg.action, cfg.dim)?;
    let dt = cfg.group_dt;
    let n_steps = BatchConfig::new(dt, cfg.horizon, 0).n_steps()?;
    let n = cfg.n_trajectories;
    for (k, &r) in cfg.anchors.iter().enumerate() {
        let anchor = DVector::from_vec(vec![r, 0.0]);
        let seed = stream(cfg, PATH_A + 100 * k as u64);
        let naive: Vec<PathRates> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, i as u64));
                let mut theta = 0.0f64;
                let mut path = Vec::with_capacity(n_steps + 1);
                path.push(anchor.clone());
                for _ in 0..n_steps {
                    theta += (2.0 * dt).sqrt() * rng.sample::<f64, _>(StandardNormal);
                    path.push(DVector::from_vec(vec![r * theta.cos(), r * theta.sin()]));
                }
                path_rates(&path, dt)
            })
            .collect();
        let naive = mean_rates(&naive);

        let system = make_orbit_bm_system(&action, &anchor, 1.0)?;
        let g0 = system.initial_state();
        let intrinsic_seed = stream(cfg, PATH_SECOND + 100 * k as u64);
        let intrinsic = (0..n)
            .into_par_iter()
            .map(|i| {
                let traj = integrate(&system, &g0, dt, cfg.horizon, splitmix(intrinsic_seed, i as u64))?;
                let images: Vec<DVector<f64>> = traj.states.iter().map(|s| system.image(s)).collect();
                Ok(path_rates(&images, dt))
            })
            .collect::<Result<Vec<_>>>()?;
        let intrinsic = mean_rates(&intrinsic);

        report.push(
            CheckEntry::scalar(format!("intrinsic_qv_rate_r{r}"), None, intrinsic.qv_rate, 2.0, 0.1, true).optional(),
        );
        report.push(CheckEntry::scalar(
            format!("qv_ratio_r{r}"),
            None,
            naive.qv_rate / intrinsic.qv_rate,
            r * r,
            0.1,
            true,
        ));
        report.push(CheckEntry::scalar(format!("drift_coefficient_r{r}"), None, naive.drift, -1.0, 0.1, true));
    }
    Ok(report)
}

/// The geometric identity suite over the default actions.
pub fn run_geometry_check(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::new(cfg);
    let suite = run_identity_suite(&default_suite_actions(), cfg.geometry_draws, cfg.seed)?;
    for r in suite.residuals {
        report.push(CheckEntry {
            name: format!("{}[{} d={}]", r.identity, r.action, r.matrix_dim),
            required: true,
            time: None,
            passed: r.passed,
            detail: CheckDetail::Identity(r),
        });
    }
    Ok(report)
}

/// The fully projected system against its radial reduction `β = 0`.
pub fn run_fully_projected(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut report = RunReport::new(cfg);
    let action = GroupAction::new(cfg.action, cfg.dim)?;
    let spec = PotentialSpec::isotropic(cfg.potential, 1.0);
    let system = make_fully_projected_system(&action, &spec);
    let x0 = initial_points(&action, cfg.initial, cfg.n_trajectories, stream(cfg, INIT_A));
    let bc = BatchConfig::new(cfg.dt, cfg.horizon, stream(cfg, PATH_A)).with_recording(recording(cfg, &[cfg.horizon]));
    let batch = simulate_batch(&system, &x0, &bc)?;
    report.diagnostics.absorb(&batch);
    dump(cfg, &batch, "fully_projected")?;
    let terminal = radii(&batch.terminal());

    let potential = cfg.potential;
    let profile = RadialProfile {
        f_prime: std::sync::Arc::new(move |r| potential.radial_derivative(r)),
        alpha: std::sync::Arc::new(|_| 1.0),
        beta: std::sync::Arc::new(|_| 0.0),
    };
    let oracle = radial_oracle_system(&profile, cfg.dim)?;
    let n_oracle = cfg.n_trajectories * cfg.oracle_factor.max(1);
    let r0: Vec<DVector<f64>> = initial_points(&action, cfg.initial, n_oracle, stream(cfg, INIT_ORACLE))
        .iter()
        .map(|x| DVector::from_element(1, x.norm()))
        .collect();
    let ob = simulate_batch(&oracle, &r0, &BatchConfig::new(cfg.dt, cfg.horizon, stream(cfg, PATH_ORACLE)))?;
    let oracle_r: Vec<f64> = ob.terminal().iter().map(|r| r[0]).collect();
    let (d, p) = ks_two_sample(&terminal, &oracle_r);
    let rep = ks_report(d, p, terminal.len(), oracle_r.len(), cfg.level, TestRole::Equivalence);
    report.push(CheckEntry::equivalence("radial_oracle", Some(cfg.horizon), true, rep));

    if cfg.horizon >= cfg.burn_in {
        // no tangential noise means no volume entropy: the radial law tends to e^{−f}
        let flat = LogVolumeProfile::new(-60.0, -50.0, 0.0)?;
        let lower = 0.05;
        let reference = stationary_reference(&action, cfg.potential, flat, lower)?;
        let check = stationary_check(&terminal, &reference, cfg.bins, cfg.level)?;
        report.push(CheckEntry {
            name: "stationary_without_volume_entropy".into(),
            required: false,
            time: Some(cfg.horizon),
            passed: check.verdict.passed(),
            detail: CheckDetail::Stationary(check),
        });
    } else {
        report.note("horizon shorter than the burn-in; stationary comparison skipped");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_wrapping() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn thinning_grid() {
        let g = checkpoint_grid(10.0, 2.0, 20.0, 1e-3);
        assert_eq!(g.len(), 6);
        assert!((g[5] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn path_rates_of_a_uniform_rotation() {
        // deterministic rotation: QV per step r²(Δθ)² + O(Δθ⁴)
        let dt = 1e-3;
        let path: Vec<DVector<f64>> =
            (0..=1000).map(|k| DVector::from_vec(vec![2.0 * (k as f64 * dt).cos(), 2.0 * (k as f64 * dt).sin()])).collect();
        let r = path_rates(&path, dt);
        assert!((r.qv_rate - 4.0 * dt).abs() < 1e-6);
        assert!((r.drift + 0.5 * dt).abs() < 1e-6);
    }

    #[test]
    fn stabilizer_fixes_the_anchor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (kind, d) in [(ActionKind::Rotation, 3), (ActionKind::Rotation, 4), (ActionKind::ConjugationSymmetric, 3)] {
            let action = GroupAction::new(kind, d).unwrap();
            let x = reference_point(&action) * 2.0;
            let h = stabilizer_sample(&action, &mut rng).unwrap().unwrap();
            assert!((action.apply(&h, &x).unwrap() - &x).norm() < 1e-12);
        }
        let so2 = GroupAction::new(ActionKind::Rotation, 2).unwrap();
        assert!(stabilizer_sample(&so2, &mut rng).unwrap().is_none());
    }
}
