//! Euler–Maruyama integration with per-trajectory deterministic streams.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_action::SINGULAR_GUARD;
use crate::linalg::is_finite;

/// What a post-step map reports about one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    /// Orthogonality defect before retraction.
    pub pre_defect: f64,
    /// Orthogonality defect after retraction.
    pub post_defect: f64,
}

/// A stochastic system `dZ = A(Z)dt + √2 B(Z)dW`.
///
/// `diffusion_apply` returns `√2·B(Z)ξ`; the integrator multiplies by `√dt`.
pub trait SdeSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn noise_dim(&self) -> usize;

    /// Sizes of independently seeded noise blocks; they sum to `noise_dim`.
    fn noise_blocks(&self) -> Vec<usize> {
        vec![self.noise_dim()]
    }

    fn drift(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>>;

    fn diffusion_apply(&self, x: &DVector<f64>, t: f64, xi: &DVector<f64>) -> Result<DVector<f64>>;

    /// The Euler update `x + drift·dt + √dt·diffusion_apply(ξ)`. Systems that
    /// share work between drift and diffusion override this.
    fn euler_step(&self, x: &DVector<f64>, t: f64, dt: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let mut next = self.drift(x, t)? * dt;
        next += self.diffusion_apply(x, t, xi)? * dt.sqrt();
        next += x;
        Ok(next)
    }

    /// Maps the Euler update back onto the state manifold.
    fn post_step(&self, _prev: &DVector<f64>, next: DVector<f64>) -> Result<(DVector<f64>, StepReport)> {
        Ok((next, StepReport::default()))
    }

    /// Invariant statistic tracked for the singular guard, when meaningful.
    fn regularity(&self, _x: &DVector<f64>) -> Option<f64> {
        None
    }

    /// Deviation of a conserved quantity from its initial value, when the
    /// system has one.
    fn conservation_defect(&self, _x: &DVector<f64>) -> Option<f64> {
        None
    }

    /// The observable process (for example `g·x` for group-valued states).
    fn image(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }

    fn tag(&self) -> String;
}

/// SplitMix64 finalizer applied to `seed + index`.
pub fn splitmix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which states are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recording {
    /// The initial and final state.
    Terminal,
    /// The initial state and the states at the given times.
    Checkpoints(Vec<f64>),
    /// Every step.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub recording: Recording,
    /// Each step sums this many unit Gaussian draws and rescales, so a run at
    /// `dt` with two substeps shares its Brownian path with a run at `dt/2`.
    pub substeps: u32,
}

impl BatchConfig {
    pub fn new(dt: f64, horizon: f64, seed: u64) -> Self {
        BatchConfig { dt, horizon, seed, recording: Recording::Terminal, substeps: 1 }
    }

    pub fn with_recording(mut self, recording: Recording) -> Self {
        self.recording = recording;
        self
    }

    pub fn with_substeps(mut self, substeps: u32) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn n_steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("dt must be positive"));
        }
        if !(self.horizon >= self.dt) {
            return Err(Error::config("horizon must be at least dt"));
        }
        if self.substeps == 0 {
            return Err(Error::config("substeps must be at least 1"));
        }
        Ok((self.horizon / self.dt).round() as usize)
    }

    fn record_steps(&self, n_steps: usize) -> Result<Vec<usize>> {
        let mut steps = match &self.recording {
            Recording::Terminal => vec![0, n_steps],
            Recording::Full => (0..=n_steps).collect(),
            Recording::Checkpoints(ts) => {
                let mut v = vec![0];
                for &t in ts {
                    let k = (t / self.dt).round();
                    if !(k >= 0.0) || k as usize > n_steps || ((k * self.dt) - t).abs() > 1e-9 * t.abs().max(1.0) {
                        return Err(Error::config(format!("checkpoint {t} is not on the time grid")));
                    }
                    v.push(k as usize);
                }
                v
            }
        };
        steps.sort_unstable();
        steps.dedup();
        Ok(steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDiagnostics {
    pub max_pre_retraction_defect: f64,
    pub max_post_retraction_defect: f64,
    /// Running minimum of the regularity statistic, if the system has one.
    pub min_regularity: Option<f64>,
    /// Steps spent inside the singular guard zone.
    pub guard_zone_steps: usize,
    pub max_conservation_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub dt: f64,
    pub horizon: f64,
    pub n_steps: usize,
    pub system: String,
    pub substeps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBatch {
    pub times: Vec<f64>,
    /// `states[i][j]` is trajectory `i` at `times[j]`.
    pub states: Vec<Vec<DVector<f64>>>,
    pub seeds: Vec<u64>,
    pub meta: BatchMeta,
    pub diagnostics: Vec<TrajectoryDiagnostics>,
}

impl TrajectoryBatch {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of the recorded time closest to `t`.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    /// All trajectories at recorded time index `j`.
    pub fn states_at(&self, j: usize) -> Vec<DVector<f64>> {
        self.states.iter().map(|s| s[j].clone()).collect()
    }

    pub fn terminal(&self) -> Vec<DVector<f64>> {
        self.states_at(self.times.len() - 1)
    }

    pub fn max_pre_retraction_defect(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.max_pre_retraction_defect).fold(0.0, f64::max)
    }

    pub fn max_post_retraction_defect(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.max_post_retraction_defect).fold(0.0, f64::max)
    }

    pub fn max_conservation_defect(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.max_conservation_defect).fold(0.0, f64::max)
    }

    pub fn guard_zone_steps(&self) -> usize {
        self.diagnostics.iter().map(|d| d.guard_zone_steps).sum()
    }

    pub fn min_regularity(&self) -> Option<f64> {
        self.diagnostics.iter().filter_map(|d| d.min_regularity).reduce(f64::min)
    }

    /// Writes one CSV per trajectory (`trajectory_<i>.csv`) or a single
    /// long-format `trajectories.csv` with a leading `trajectory` column.
    pub fn write_csv(&self, dir: &Path, long_format: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        let dim = self.states.first().and_then(|s| s.first()).map_or(0, |x| x.len());
        let mut header: Vec<String> = vec!["t".into()];
        header.extend((0..dim).map(|i| format!("x_{i}")));
        let row = |t: f64, x: &DVector<f64>| {
            let mut r = vec![format!("{t}")];
            r.extend(x.iter().map(|v| format!("{v}")));
            r
        };
        let csv_err = |e: csv::Error| Error::Io(e.into());
        if long_format {
            let mut w = csv::Writer::from_path(dir.join("trajectories.csv")).map_err(csv_err)?;
            let mut h = vec!["trajectory".to_string()];
            h.extend(header.iter().cloned());
            w.write_record(&h).map_err(csv_err)?;
            for (i, traj) in self.states.iter().enumerate() {
                for (t, x) in self.times.iter().zip(traj) {
                    let mut r = vec![i.to_string()];
                    r.extend(row(*t, x));
                    w.write_record(&r).map_err(csv_err)?;
                }
            }
            w.flush()?;
        } else {
            for (i, traj) in self.states.iter().enumerate() {
                let mut w = csv::Writer::from_path(dir.join(format!("trajectory_{i}.csv"))).map_err(csv_err)?;
                w.write_record(&header).map_err(csv_err)?;
                for (t, x) in self.times.iter().zip(traj) {
                    w.write_record(row(*t, x)).map_err(csv_err)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

/// One trajectory recording every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub diagnostics: TrajectoryDiagnostics,
}

struct NoiseSource {
    rngs: Vec<ChaCha8Rng>,
    blocks: Vec<usize>,
    substeps: u32,
    buf: DVector<f64>,
}

impl NoiseSource {
    fn new(seed: u64, blocks: Vec<usize>, substeps: u32) -> Self {
        let rngs = (0..blocks.len()).map(|b| ChaCha8Rng::seed_from_u64(splitmix(seed, b as u64))).collect();
        let n = blocks.iter().sum();
        NoiseSource { rngs, blocks, substeps, buf: DVector::zeros(n) }
    }

    fn draw(&mut self) -> &DVector<f64> {
        self.buf.fill(0.0);
        let mut offset = 0;
        for (rng, &len) in self.rngs.iter_mut().zip(&self.blocks) {
            for _ in 0..self.substeps {
                for i in 0..len {
                    self.buf[offset + i] += rng.sample::<f64, _>(StandardNormal);
                }
            }
            offset += len;
        }
        if self.substeps > 1 {
            self.buf /= (self.substeps as f64).sqrt();
        }
        &self.buf
    }
}

fn run(
    system: &dyn SdeSystem,
    x0: &DVector<f64>,
    dt: f64,
    n_steps: usize,
    seed: u64,
    substeps: u32,
    record: &[usize],
) -> Result<(Vec<DVector<f64>>, TrajectoryDiagnostics)> {
    if x0.len() != system.dim() {
        return Err(Error::ShapeMismatch { expected: system.dim(), got: x0.len() });
    }
    if !is_finite(x0) {
        return Err(Error::NonFiniteInput);
    }
    let blocks = system.noise_blocks();
    debug_assert_eq!(blocks.iter().sum::<usize>(), system.noise_dim());
    let mut noise = NoiseSource::new(seed, blocks, substeps);
    let mut diag = TrajectoryDiagnostics {
        max_pre_retraction_defect: 0.0,
        max_post_retraction_defect: 0.0,
        min_regularity: None,
        guard_zone_steps: 0,
        max_conservation_defect: 0.0,
    };
    let track = |x: &DVector<f64>, diag: &mut TrajectoryDiagnostics| {
        if let Some(s) = system.regularity(x) {
            diag.min_regularity = Some(diag.min_regularity.map_or(s, |m| m.min(s)));
            if s < SINGULAR_GUARD {
                diag.guard_zone_steps += 1;
            }
        }
        if let Some(c) = system.conservation_defect(x) {
            diag.max_conservation_defect = diag.max_conservation_defect.max(c);
        }
    };
    track(x0, &mut diag);
    let mut out = Vec::with_capacity(record.len());
    let mut next_record = 0;
    if record.first() == Some(&0) {
        out.push(x0.clone());
        next_record = 1;
    }
    let mut x = x0.clone();
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let xi = noise.draw();
        let proposal = system.euler_step(&x, t, dt, xi).map_err(|e| match e {
            Error::NonFinite { .. } => Error::NonFinite { step },
            other => other,
        })?;
        if !is_finite(&proposal) {
            return Err(Error::NonFinite { step });
        }
        let (new_x, report) = system.post_step(&x, proposal).map_err(|e| match e {
            Error::NonRetractable { .. } | Error::NotTangent { .. } => {
                Error::StepRejected { step, reason: e.to_string() }
            }
            other => other,
        })?;
        if !is_finite(&new_x) {
            return Err(Error::NonFinite { step });
        }
        diag.max_pre_retraction_defect = diag.max_pre_retraction_defect.max(report.pre_defect);
        diag.max_post_retraction_defect = diag.max_post_retraction_defect.max(report.post_defect);
        x = new_x;
        track(&x, &mut diag);
        if next_record < record.len() && record[next_record] == step + 1 {
            out.push(x.clone());
            next_record += 1;
        }
    }
    Ok((out, diag))
}

/// Integrates one trajectory and records every step.
pub fn integrate(system: &dyn SdeSystem, x0: &DVector<f64>, dt: f64, horizon: f64, seed: u64) -> Result<Trajectory> {
    let cfg = BatchConfig::new(dt, horizon, seed);
    let n_steps = cfg.n_steps()?;
    let record: Vec<usize> = (0..=n_steps).collect();
    let (states, diagnostics) = run(system, x0, dt, n_steps, seed, 1, &record)?;
    Ok(Trajectory { times: record.iter().map(|&k| k as f64 * dt).collect(), states, diagnostics })
}

/// Integrates one trajectory per initial state, in parallel. Trajectory `i`
/// uses the seed `splitmix(config.seed, i)`.
pub fn simulate_batch(system: &dyn SdeSystem, initial: &[DVector<f64>], config: &BatchConfig) -> Result<TrajectoryBatch> {
    if initial.is_empty() {
        return Err(Error::config("a batch needs at least one trajectory"));
    }
    let n_steps = config.n_steps()?;
    let record = config.record_steps(n_steps)?;
    let seeds: Vec<u64> = (0..initial.len()).map(|i| splitmix(config.seed, i as u64)).collect();
    let results: Vec<Result<(Vec<DVector<f64>>, TrajectoryDiagnostics)>> = initial
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(x0, &seed)| run(system, x0, config.dt, n_steps, seed, config.substeps, &record))
        .collect();
    let mut states = Vec::with_capacity(initial.len());
    let mut diagnostics = Vec::with_capacity(initial.len());
    for (index, r) in results.into_iter().enumerate() {
        let (s, d) = r.map_err(|e| Error::Trajectory { index, source: Box::new(e) })?;
        states.push(s);
        diagnostics.push(d);
    }
    Ok(TrajectoryBatch {
        times: record.iter().map(|&k| k as f64 * config.dt).collect(),
        states,
        seeds,
        meta: BatchMeta {
            dt: config.dt,
            horizon: config.horizon,
            n_steps,
            system: system.tag(),
            substeps: config.substeps,
        },
        diagnostics,
    })
}

/// A system assembled from closures, handy for scalar test problems.
pub struct FnSystem<D, S>
where
    D: Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync,
    S: Fn(&DVector<f64>, f64, &DVector<f64>) -> DVector<f64> + Send + Sync,
{
    pub dim: usize,
    pub noise_dim: usize,
    pub drift: D,
    pub diffusion: S,
    pub tag: String,
}

impl<D, S> SdeSystem for FnSystem<D, S>
where
    D: Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync,
    S: Fn(&DVector<f64>, f64, &DVector<f64>) -> DVector<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    fn drift(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        Ok((self.drift)(x, t))
    }

    fn diffusion_apply(&self, x: &DVector<f64>, t: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        Ok((self.diffusion)(x, t, xi))
    }

    fn tag(&self) -> String {
        self.tag.clone()
    }
}
