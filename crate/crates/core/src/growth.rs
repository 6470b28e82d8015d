//! Bioenergetic growth model for Nile tilapia.
//!
//! Live weight evolves as anabolism minus fasting catabolism,
//!
//! ```text
//! dw/dt = Ψ(f, T, DO) · v(UIA) · w^m − k(T) · w^n
//! Ψ     = h · ρ · f · b · (1 − a) · τ(T) · σ(DO)
//! k(T)  = k_min · exp(j · (T − T_min))
//! ```
//!
//! where τ, v and σ are the temperature, un-ionized ammonia and dissolved
//! oxygen limiting factors. Controls are held constant over each integration
//! substep and the ODE is advanced with classical fixed-step RK4.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Biological and environmental constants of the growth model.
///
/// JSON keys match the field names used throughout the documentation
/// (`m_exp`, `T_opt`, `DO_crit`, ...). Missing keys fall back to the defaults,
/// unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthParams {
    /// Weight exponent of net anabolism.
    pub m_exp: f64,
    /// Weight exponent of fasting catabolism.
    pub n_exp: f64,
    /// Efficiency of food assimilation.
    pub b_assim: f64,
    /// Fraction of the food assimilated.
    pub a_frac: f64,
    /// Coefficient of food consumption, g^(1-m)/day.
    pub h_coef: f64,
    /// Coefficient of fasting catabolism, g^(1-n)/day.
    pub k_min: f64,
    /// Temperature coefficient of catabolism, 1/°C.
    pub j_coef: f64,
    /// Shape constant of the temperature response.
    pub kappa: f64,
    /// Photoperiod factor, held constant.
    pub rho: f64,
    #[serde(rename = "T_opt")]
    pub t_opt: f64,
    #[serde(rename = "T_min")]
    pub t_min: f64,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    #[serde(rename = "UIA_crit")]
    pub uia_crit: f64,
    #[serde(rename = "UIA_max")]
    pub uia_max: f64,
    #[serde(rename = "DO_min")]
    pub do_min: f64,
    #[serde(rename = "DO_crit")]
    pub do_crit: f64,
    /// Maximal daily ration as a fraction of body weight per day.
    #[serde(rename = "R_frac")]
    pub r_frac: f64,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            m_exp: 0.67,
            n_exp: 0.81,
            b_assim: 0.62,
            a_frac: 0.53,
            h_coef: 0.8,
            k_min: 0.00133,
            j_coef: 0.0132,
            kappa: 4.6,
            rho: 1.0,
            t_opt: 33.0,
            t_min: 24.0,
            t_max: 40.0,
            uia_crit: 0.06,
            uia_max: 1.4,
            // The oxygen thresholds are ordered so that the linear ramp of σ
            // runs upward from DO_min to DO_crit.
            do_min: 0.3,
            do_crit: 1.0,
            r_frac: 0.1,
        }
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.m_exp,
            self.n_exp,
            self.b_assim,
            self.a_frac,
            self.h_coef,
            self.k_min,
            self.j_coef,
            self.kappa,
            self.rho,
            self.t_opt,
            self.t_min,
            self.t_max,
            self.uia_crit,
            self.uia_max,
            self.do_min,
            self.do_crit,
            self.r_frac,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("growth parameters must be finite".into()));
        }
        open_unit("m_exp", self.m_exp)?;
        open_unit("n_exp", self.n_exp)?;
        open_unit("b_assim", self.b_assim)?;
        open_unit("a_frac", self.a_frac)?;
        positive("h_coef", self.h_coef)?;
        positive("k_min", self.k_min)?;
        positive("j_coef", self.j_coef)?;
        positive("kappa", self.kappa)?;
        if !(self.rho > 0.0 && self.rho < 2.0) {
            return Err(Error::Validation(format!(
                "rho must lie in (0, 2), got {}",
                self.rho
            )));
        }
        if !(self.r_frac > 0.0 && self.r_frac <= 1.0) {
            return Err(Error::Validation(format!(
                "R_frac must lie in (0, 1], got {}",
                self.r_frac
            )));
        }
        if !(self.t_min < self.t_opt && self.t_opt < self.t_max) {
            return Err(Error::Validation(format!(
                "temperatures must satisfy T_min < T_opt < T_max, got {} / {} / {}",
                self.t_min, self.t_opt, self.t_max
            )));
        }
        if !(self.uia_crit < self.uia_max) {
            return Err(Error::Validation(format!(
                "UIA_crit ({}) must be below UIA_max ({})",
                self.uia_crit, self.uia_max
            )));
        }
        if !(self.do_min < self.do_crit) {
            return Err(Error::Validation(format!(
                "DO_min ({}) must be below DO_crit ({})",
                self.do_min, self.do_crit
            )));
        }
        Ok(())
    }

    /// Parses and validates a JSON parameter document.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Manipulated inputs: relative feeding rate, water temperature (°C) and
/// dissolved oxygen (mg/l).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlInput {
    #[serde(rename = "f")]
    pub feed_rate: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    #[serde(rename = "DO")]
    pub dissolved_oxygen: f64,
}

impl ControlInput {
    pub const fn new(feed_rate: f64, temperature: f64, dissolved_oxygen: f64) -> Self {
        Self {
            feed_rate,
            temperature,
            dissolved_oxygen,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.feed_rate, self.temperature, self.dissolved_oxygen]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FishState {
    /// Days since the start of the simulation.
    pub t: f64,
    /// Live weight in grams.
    pub w: f64,
}

impl FishState {
    pub const fn new(t: f64, w: f64) -> Self {
        Self { t, w }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Sampling period in days.
    pub epsilon: f64,
    /// RK4 substeps per sampling period.
    pub substeps: usize,
    /// Ambient un-ionized ammonia, mg/l.
    pub uia: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            substeps: 24,
            uia: 0.05,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Validation(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.substeps == 0 {
            return Err(Error::Validation("substeps must be at least 1".into()));
        }
        if !(self.uia >= 0.0 && self.uia.is_finite()) {
            return Err(Error::Validation(format!(
                "uia must be non-negative, got {}",
                self.uia
            )));
        }
        Ok(())
    }
}

/// Temperature factor τ(T) in (0, 1], equal to 1 at `T_opt`.
pub fn temperature_factor(temperature: f64, p: &GrowthParams) -> Result<f64> {
    if !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be finite, got {temperature}"
        )));
    }
    let ratio = if temperature > p.t_opt {
        (temperature - p.t_opt) / (p.t_max - p.t_opt)
    } else if temperature < p.t_opt {
        (p.t_opt - temperature) / (p.t_opt - p.t_min)
    } else {
        return Ok(1.0);
    };
    Ok((-p.kappa * ratio.powi(4)).exp())
}

/// Un-ionized ammonia factor v(UIA).
pub fn ammonia_factor(uia: f64, p: &GrowthParams) -> Result<f64> {
    if !(uia >= 0.0) || !uia.is_finite() {
        return Err(Error::Domain(format!(
            "UIA must be a non-negative number, got {uia}"
        )));
    }
    Ok(if uia < p.uia_crit {
        1.0
    } else if uia < p.uia_max {
        (p.uia_max - uia) / (p.uia_max - p.uia_crit)
    } else {
        0.0
    })
}

/// Dissolved oxygen factor σ(DO).
pub fn oxygen_factor(dissolved_oxygen: f64, p: &GrowthParams) -> Result<f64> {
    if !(dissolved_oxygen >= 0.0) || !dissolved_oxygen.is_finite() {
        return Err(Error::Domain(format!(
            "DO must be a non-negative number, got {dissolved_oxygen}"
        )));
    }
    Ok(if dissolved_oxygen > p.do_crit {
        1.0
    } else if dissolved_oxygen > p.do_min {
        (dissolved_oxygen - p.do_min) / (p.do_crit - p.do_min)
    } else {
        0.0
    })
}

/// Coefficient of anabolism Ψ(f, T, DO).
pub fn anabolism_coefficient(u: &ControlInput, p: &GrowthParams) -> Result<f64> {
    if !u.feed_rate.is_finite() {
        return Err(Error::Domain(format!(
            "feed rate must be finite, got {}",
            u.feed_rate
        )));
    }
    let tau = temperature_factor(u.temperature, p)?;
    let sigma = oxygen_factor(u.dissolved_oxygen, p)?;
    Ok(p.h_coef * p.rho * u.feed_rate * p.b_assim * (1.0 - p.a_frac) * tau * sigma)
}

/// Coefficient of fasting catabolism k(T).
pub fn catabolism_coefficient(temperature: f64, p: &GrowthParams) -> Result<f64> {
    if !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be finite, got {temperature}"
        )));
    }
    Ok(p.k_min * (p.j_coef * (temperature - p.t_min)).exp())
}

/// Weight-independent part of the right-hand side for one control setting.
#[derive(Debug, Clone, Copy)]
struct RateCoefficients {
    anabolic: f64,
    catabolic: f64,
    m: f64,
    n: f64,
}

impl RateCoefficients {
    fn new(u: &ControlInput, uia: f64, p: &GrowthParams) -> Result<Self> {
        Ok(Self {
            anabolic: anabolism_coefficient(u, p)? * ammonia_factor(uia, p)?,
            catabolic: catabolism_coefficient(u.temperature, p)?,
            m: p.m_exp,
            n: p.n_exp,
        })
    }

    #[inline]
    fn rate(&self, w: f64) -> f64 {
        // Fractional powers need a non-negative base; zero weight is an equilibrium.
        let w = w.max(0.0);
        self.anabolic * w.powf(self.m) - self.catabolic * w.powf(self.n)
    }
}

/// Right-hand side of the growth ODE, g/day.
pub fn growth_rate(s: &FishState, u: &ControlInput, uia: f64, p: &GrowthParams) -> Result<f64> {
    if !(s.w >= 0.0) {
        return Err(Error::Domain(format!(
            "weight must be non-negative, got {}",
            s.w
        )));
    }
    Ok(RateCoefficients::new(u, uia, p)?.rate(s.w))
}

/// Advances one sampling period, asking `control_at` for the input applied
/// during each RK4 substep.
///
/// `step` and the noisy closed-loop plant both go through here, so a
/// noise-free realization is bit-identical to the model prediction.
pub(crate) fn integrate_period<F>(
    s: FishState,
    cfg: &SimConfig,
    p: &GrowthParams,
    mut control_at: F,
) -> Result<FishState>
where
    F: FnMut(usize) -> ControlInput,
{
    let h = cfg.epsilon / cfg.substeps as f64;
    let mut w = s.w;
    for i in 0..cfg.substeps {
        let c = RateCoefficients::new(&control_at(i), cfg.uia, p)?;
        let k1 = c.rate(w);
        let k2 = c.rate(w + 0.5 * h * k1);
        let k3 = c.rate(w + 0.5 * h * k2);
        let k4 = c.rate(w + h * k3);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !w.is_finite() {
            return Err(Error::Integration(format!(
                "non-finite weight at t = {} (substep {i})",
                s.t + i as f64 * h
            )));
        }
        w = w.max(0.0);
    }
    Ok(FishState::new(s.t + cfg.epsilon, w))
}

/// Advances the state by one sampling period under a constant input.
pub fn step(
    s: FishState,
    u: &ControlInput,
    cfg: &SimConfig,
    p: &GrowthParams,
) -> Result<FishState> {
    if !(s.w >= 0.0) {
        return Err(Error::Domain(format!(
            "weight must be non-negative, got {}",
            s.w
        )));
    }
    integrate_period(s, cfg, p, |_| *u)
}

/// Rolls the model forward from `w0` at t = 0 through a piecewise-constant
/// schedule, one entry per sampling period.
pub fn simulate(
    w0: f64,
    schedule: &[ControlInput],
    cfg: &SimConfig,
    p: &GrowthParams,
) -> Result<Vec<FishState>> {
    if schedule.is_empty() {
        return Err(Error::Argument(
            "schedule must contain at least one input".into(),
        ));
    }
    if !(w0 > 0.0) || !w0.is_finite() {
        return Err(Error::Argument(format!(
            "initial weight must be positive, got {w0}"
        )));
    }
    rollout(FishState::new(0.0, w0), schedule, cfg, p)
}

pub(crate) fn rollout(
    start: FishState,
    schedule: &[ControlInput],
    cfg: &SimConfig,
    p: &GrowthParams,
) -> Result<Vec<FishState>> {
    let mut states = Vec::with_capacity(schedule.len() + 1);
    states.push(start);
    let mut s = start;
    for u in schedule {
        s = step(s, u, cfg, p)?;
        states.push(s);
    }
    Ok(states)
}

/// Daily ration r = f · R in g/day, with R = `R_frac` · w.
pub fn daily_feed_mass(feed_rate: f64, w: f64, p: &GrowthParams) -> f64 {
    feed_rate * p.r_frac * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> GrowthParams {
        GrowthParams::default()
    }

    /// Forward Euler with a fine constant step; independent of the RK4 path.
    fn euler(w0: f64, u: &ControlInput, uia: f64, days: usize, per_day: usize) -> Vec<f64> {
        let p = p();
        let psi = p.h_coef * p.rho * u.feed_rate * p.b_assim * (1.0 - p.a_frac);
        let tau = if u.temperature < p.t_opt {
            (-p.kappa * ((p.t_opt - u.temperature) / (p.t_opt - p.t_min)).powi(4)).exp()
        } else {
            (-p.kappa * ((u.temperature - p.t_opt) / (p.t_max - p.t_opt)).powi(4)).exp()
        };
        let sigma = if u.dissolved_oxygen > p.do_crit {
            1.0
        } else {
            0.0
        };
        let v = if uia < p.uia_crit { 1.0 } else { 0.0 };
        let k = p.k_min * (p.j_coef * (u.temperature - p.t_min)).exp();
        let h = 1.0 / per_day as f64;
        let mut w = w0;
        let mut out = vec![w];
        for _ in 0..days {
            for _ in 0..per_day {
                w += h * (psi * tau * sigma * v * w.powf(p.m_exp) - k * w.powf(p.n_exp));
            }
            out.push(w);
        }
        out
    }

    #[test]
    fn temperature_factor_values() {
        assert_eq!(temperature_factor(33.0, &p()).unwrap(), 1.0);
        assert_relative_eq!(
            temperature_factor(40.0, &p()).unwrap(),
            (-4.6f64).exp(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            temperature_factor(40.0, &p()).unwrap(),
            0.010052,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            temperature_factor(28.5, &p()).unwrap(),
            (-4.6f64 * 0.0625).exp(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            temperature_factor(28.5, &p()).unwrap(),
            0.75014,
            max_relative = 1e-5
        );
        assert!(matches!(
            temperature_factor(f64::NAN, &p()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ammonia_factor_branches() {
        assert_eq!(ammonia_factor(0.05, &p()).unwrap(), 1.0);
        assert_relative_eq!(ammonia_factor(0.73, &p()).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(ammonia_factor(1.5, &p()).unwrap(), 0.0);
        assert!(matches!(ammonia_factor(-0.1, &p()), Err(Error::Domain(_))));
    }

    #[test]
    fn oxygen_factor_branches() {
        assert_eq!(oxygen_factor(2.0, &p()).unwrap(), 1.0);
        assert_relative_eq!(oxygen_factor(0.65, &p()).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(oxygen_factor(0.2, &p()).unwrap(), 0.0);
        assert_eq!(oxygen_factor(0.3, &p()).unwrap(), 0.0);
        assert!(matches!(oxygen_factor(-1.0, &p()), Err(Error::Domain(_))));
    }

    #[test]
    fn coefficients() {
        let p = p();
        assert_eq!(
            anabolism_coefficient(&ControlInput::new(0.0, 30.0, 2.0), &p).unwrap(),
            0.0
        );
        assert_relative_eq!(
            anabolism_coefficient(&ControlInput::new(1.0, 33.0, 2.0), &p).unwrap(),
            0.23312,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            anabolism_coefficient(&ControlInput::new(0.5, 40.0, 2.0), &p).unwrap(),
            0.0011717,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            catabolism_coefficient(24.0, &p).unwrap(),
            0.00133,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            catabolism_coefficient(33.0, &p).unwrap(),
            0.0014977,
            max_relative = 1e-4
        );
        assert_relative_eq!(
            catabolism_coefficient(40.0, &p).unwrap(),
            0.0016428,
            max_relative = 1e-4
        );
    }

    #[test]
    fn growth_rate_values() {
        let p = p();
        let ideal = ControlInput::new(1.0, 33.0, 2.0);
        assert_eq!(
            growth_rate(&FishState::new(0.0, 0.0), &ideal, 0.05, &p).unwrap(),
            0.0
        );
        let g = growth_rate(&FishState::new(0.0, 100.0), &ideal, 0.05, &p).unwrap();
        assert_relative_eq!(g, 5.039, max_relative = 1e-3);
        let fasting = ControlInput::new(0.0, 33.0, 2.0);
        let g = growth_rate(&FishState::new(0.0, 100.0), &fasting, 0.05, &p).unwrap();
        assert_relative_eq!(g, -0.06244, max_relative = 1e-3);
    }

    #[test]
    fn step_matches_fine_euler() {
        let cfg = SimConfig::default();
        let fasting = ControlInput::new(0.0, 24.0, 2.0);
        let s = step(FishState::new(0.0, 100.0), &fasting, &cfg, &p()).unwrap();
        // The fasting trajectory is nearly linear, so plain fine Euler resolves it.
        let oracle = euler(100.0, &fasting, 0.05, 1, 100_000)[1];
        assert_relative_eq!(s.w, oracle, max_relative = 1e-6);
        assert_relative_eq!(s.w, 99.9446, max_relative = 1e-6);
        assert_eq!(s.t, 1.0);

        let ideal = ControlInput::new(1.0, 33.0, 2.0);
        let s = step(FishState::new(0.0, 20.0), &ideal, &cfg, &p()).unwrap();
        let coarse = euler(20.0, &ideal, 0.05, 1, 50_000)[1];
        let fine = euler(20.0, &ideal, 0.05, 1, 100_000)[1];
        let oracle = 2.0 * fine - coarse;
        assert_relative_eq!(s.w, oracle, max_relative = 1e-6);
        assert_relative_eq!(s.w, 21.77, max_relative = 1e-3);
    }

    #[test]
    fn zero_weight_is_an_equilibrium() {
        let s = step(
            FishState::new(0.0, 0.0),
            &ControlInput::new(1.0, 33.0, 2.0),
            &SimConfig::default(),
            &p(),
        )
        .unwrap();
        assert_eq!(s.w, 0.0);
    }

    #[test]
    fn simulate_contract() {
        let cfg = SimConfig::default();
        let ideal = ControlInput::new(1.0, 33.0, 2.0);
        assert_eq!(simulate(20.0, &[ideal], &cfg, &p()).unwrap().len(), 2);
        assert!(matches!(
            simulate(20.0, &[], &cfg, &p()),
            Err(Error::Argument(_))
        ));

        let states = simulate(20.0, &vec![ideal; 30], &cfg, &p()).unwrap();
        assert!(states.windows(2).all(|w| w[1].w > w[0].w));
        let oracle = euler(20.0, &ideal, 0.05, 30, 3600);
        for (s, o) in states.iter().zip(&oracle) {
            assert_relative_eq!(s.w, *o, max_relative = 2e-5);
        }

        let fasting = ControlInput::new(0.0, 33.0, 2.0);
        let states = simulate(20.0, &vec![fasting; 30], &cfg, &p()).unwrap();
        assert!(states.windows(2).all(|w| w[1].w < w[0].w));
    }

    #[test]
    fn starvation_never_goes_negative() {
        let cfg = SimConfig {
            epsilon: 1.0,
            substeps: 1,
            uia: 0.05,
        };
        let fasting = ControlInput::new(0.0, 40.0, 2.0);
        let states = simulate(0.01, &vec![fasting; 2000], &cfg, &p()).unwrap();
        assert!(states.iter().all(|s| s.w >= 0.0));
    }

    #[test]
    fn daily_ration() {
        let p = p();
        assert_eq!(daily_feed_mass(0.0, 300.0, &p), 0.0);
        assert_relative_eq!(daily_feed_mass(1.0, 300.0, &p), 30.0, epsilon = 1e-12);
        assert_relative_eq!(daily_feed_mass(0.5, 386.18, &p), 19.309, epsilon = 1e-9);
    }

    #[test]
    fn params_validation() {
        assert!(GrowthParams::default().validate().is_ok());
        let swapped = GrowthParams {
            do_min: 1.0,
            do_crit: 0.3,
            ..Default::default()
        };
        assert!(matches!(swapped.validate(), Err(Error::Validation(_))));
        let bad_t = GrowthParams {
            t_opt: 45.0,
            ..Default::default()
        };
        assert!(bad_t.validate().is_err());
        let bad_rho = GrowthParams {
            rho: 2.0,
            ..Default::default()
        };
        assert!(bad_rho.validate().is_err());
    }

    #[test]
    fn params_json() {
        let p = GrowthParams::from_json_str(r#"{"rho": 1.2, "T_opt": 32.0}"#).unwrap();
        assert_eq!(p.rho, 1.2);
        assert_eq!(p.t_opt, 32.0);
        assert!(matches!(
            GrowthParams::from_json_str(r#"{"bogus": 1}"#),
            Err(Error::Json(_))
        ));
        assert!(matches!(
            GrowthParams::from_json_str(r#"{"DO_min": 1.0, "DO_crit": 0.3}"#),
            Err(Error::Validation(_))
        ));
        let round: GrowthParams =
            serde_json::from_str(&serde_json::to_string(&GrowthParams::default()).unwrap())
                .unwrap();
        assert_eq!(round, GrowthParams::default());
    }
}
