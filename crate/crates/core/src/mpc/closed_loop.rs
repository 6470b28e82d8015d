use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::{
    shift_warm_start, solve_ocp, ControlBounds, ControlPlan, HorizonConfig, Ocp, OcpResult,
    SolverOptions,
};
use crate::cost::Controller;
use crate::error::{Error, Result};
use crate::growth::{
    daily_feed_mass, integrate_period, step, ControlInput, FishState, GrowthParams, SimConfig,
};
use crate::reference::{whole_periods, ReferenceTrajectory};

/// Gaussian actuator noise on the feeding and temperature channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub snr_db: f64,
    pub seed: u64,
    pub enabled: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            snr_db: 50.0,
            seed: 0,
            enabled: false,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.enabled && !(self.snr_db > 0.0 && self.snr_db.is_finite()) {
            return Err(Error::Validation(format!(
                "snr_db must be positive, got {}",
                self.snr_db
            )));
        }
        Ok(())
    }

    /// Noise amplitude relative to the signal RMS.
    pub fn amplitude_ratio(&self) -> f64 {
        10f64.powf(-self.snr_db / 20.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelNoiseStats {
    pub samples: usize,
    /// Σ of squared injected noise values (before clamping).
    pub sum_sq_noise: f64,
    /// Σ of squared target standard deviations.
    pub sum_sq_sigma: f64,
}

impl ChannelNoiseStats {
    fn record(&mut self, noise: f64, sigma: f64) {
        self.samples += 1;
        self.sum_sq_noise += noise * noise;
        self.sum_sq_sigma += sigma * sigma;
    }

    pub fn empirical_std(&self) -> f64 {
        (self.sum_sq_noise / self.samples.max(1) as f64).sqrt()
    }

    /// Root-mean-square of the standard deviation the SNR prescribed.
    pub fn expected_std(&self) -> f64 {
        (self.sum_sq_sigma / self.samples.max(1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseStats {
    pub feed_rate: ChannelNoiseStats,
    pub temperature: ChannelNoiseStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub cost: f64,
    pub warm_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopResult {
    pub states: Vec<FishState>,
    /// Inputs that reached the plant, averaged over each period's substeps.
    pub applied_controls: Vec<ControlInput>,
    /// First action of each optimized plan.
    pub commanded_controls: Vec<ControlInput>,
    /// Feed delivered per fish in each period, grams.
    pub per_step_feed: Vec<f64>,
    pub solver_stats: Vec<SolveSummary>,
    /// Total solver wall time, seconds.
    pub wall_time: f64,
    pub noise: Option<NoiseStats>,
}

impl ClosedLoopResult {
    pub fn total_feed(&self) -> f64 {
        self.per_step_feed.iter().sum()
    }

    pub fn final_weight(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.w)
    }

    pub fn initial_weight(&self) -> f64 {
        self.states.first().map_or(0.0, |s| s.w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedLoopConfig {
    pub horizon: HorizonConfig,
    pub bounds: ControlBounds,
    pub noise: NoiseConfig,
    pub sim: SimConfig,
    pub solver: SolverOptions,
    /// Also solve each step from mid-bounds and keep the better plan. The
    /// shifted warm start can land on the flat corner at the lower bounds
    /// where the finite-difference gradient vanishes.
    pub cold_restart: bool,
}

impl Default for ClosedLoopConfig {
    fn default() -> Self {
        Self {
            horizon: HorizonConfig::default(),
            bounds: ControlBounds::default(),
            noise: NoiseConfig::default(),
            sim: SimConfig::default(),
            solver: SolverOptions::default(),
            cold_restart: true,
        }
    }
}

impl ClosedLoopConfig {
    pub fn validate(&self) -> Result<()> {
        self.horizon.validate()?;
        self.bounds.validate()?;
        self.noise.validate()?;
        self.sim.validate()?;
        self.solver.validate()?;
        if self.horizon.epsilon != self.sim.epsilon {
            return Err(Error::Config(format!(
                "horizon sampling period {} differs from simulation period {}",
                self.horizon.epsilon, self.sim.epsilon
            )));
        }
        Ok(())
    }
}

/// Running RMS of a commanded channel.
#[derive(Default)]
struct Rms {
    n: usize,
    sum_sq: f64,
}

impl Rms {
    fn push(&mut self, v: f64) -> f64 {
        self.n += 1;
        self.sum_sq += v * v;
        (self.sum_sq / self.n as f64).sqrt()
    }
}

/// Receding-horizon loop: solve from the measured weight, apply the first
/// action for one period (with actuator noise if enabled), shift, repeat.
pub fn run_closed_loop(
    w0: f64,
    duration: f64,
    controller: &Controller,
    reference: &ReferenceTrajectory,
    growth: &GrowthParams,
    cfg: &ClosedLoopConfig,
) -> Result<ClosedLoopResult> {
    cfg.validate()?;
    if !(w0 > 0.0 && w0.is_finite()) {
        return Err(Error::Argument(format!(
            "initial weight must be positive, got {w0}"
        )));
    }
    let periods = whole_periods(duration, cfg.sim.epsilon)?;
    let ocp = Ocp {
        reference,
        stage: controller.stage.as_ref(),
        terminal: controller.terminal,
        bounds: cfg.bounds,
        sim: cfg.sim,
        growth: *growth,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise.seed);
    let ratio = cfg.noise.amplitude_ratio();
    let (mut rms_f, mut rms_t) = (Rms::default(), Rms::default());
    let mut noise_stats = NoiseStats::default();

    let mut state = FishState::new(0.0, w0);
    let cold = ControlPlan::constant(cfg.bounds.mid(), cfg.horizon.n);
    let mut warm = cold.clone();
    let mut out = ClosedLoopResult {
        states: vec![state],
        applied_controls: Vec::with_capacity(periods),
        commanded_controls: Vec::with_capacity(periods),
        per_step_feed: Vec::with_capacity(periods),
        solver_stats: Vec::with_capacity(periods),
        wall_time: 0.0,
        noise: None,
    };

    for k in 0..periods {
        let abort = |e: Error| Error::ClosedLoop {
            step: k,
            source: Box::new(e),
        };
        let started = Instant::now();
        let mut res = solve_ocp(&ocp, state, &warm, &cfg.solver).map_err(abort)?;
        if cfg.cold_restart && warm != cold {
            let alt = solve_ocp(&ocp, state, &cold, &cfg.solver).map_err(abort)?;
            let iterations = res.iterations + alt.iterations;
            if alt.cost < res.cost {
                res = OcpResult {
                    warm_cost: res.warm_cost,
                    converged: alt.converged,
                    ..alt
                };
            }
            res.iterations = iterations;
        }
        let seconds = started.elapsed().as_secs_f64();
        out.wall_time += seconds;
        out.solver_stats.push(SolveSummary {
            cost: res.cost,
            warm_cost: res.warm_cost,
            iterations: res.iterations,
            converged: res.converged,
            seconds,
        });

        let commanded = res.plan.first();
        let (next, applied) = if cfg.noise.enabled {
            let sigma_f = rms_f.push(commanded.feed_rate) * ratio;
            let sigma_t = rms_t.push(commanded.temperature) * ratio;
            let inputs: Vec<ControlInput> = (0..cfg.sim.substeps)
                .map(|_| {
                    let zf: f64 = StandardNormal.sample(&mut rng);
                    let zt: f64 = StandardNormal.sample(&mut rng);
                    let (nf, nt) = (sigma_f * zf, sigma_t * zt);
                    noise_stats.feed_rate.record(nf, sigma_f);
                    noise_stats.temperature.record(nt, sigma_t);
                    cfg.bounds.clamp(&ControlInput {
                        feed_rate: commanded.feed_rate + nf,
                        temperature: commanded.temperature + nt,
                        ..commanded
                    })
                })
                .collect();
            let next = integrate_period(state, &cfg.sim, growth, |i| inputs[i]).map_err(abort)?;
            let m = inputs.len() as f64;
            let mean = ControlInput::new(
                inputs.iter().map(|u| u.feed_rate).sum::<f64>() / m,
                inputs.iter().map(|u| u.temperature).sum::<f64>() / m,
                commanded.dissolved_oxygen,
            );
            (next, mean)
        } else {
            (
                step(state, &commanded, &cfg.sim, growth).map_err(abort)?,
                commanded,
            )
        };
        if !next.w.is_finite() {
            return Err(abort(Error::Integration("non-finite state".into())));
        }

        out.per_step_feed
            .push(daily_feed_mass(applied.feed_rate, state.w, growth) * cfg.sim.epsilon);
        out.commanded_controls.push(commanded);
        out.applied_controls.push(applied);
        out.states.push(next);
        state = next;
        warm = shift_warm_start(&res.plan);
    }

    if cfg.noise.enabled {
        out.noise = Some(noise_stats);
    }
    Ok(out)
}
