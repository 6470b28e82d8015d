//! Stage and terminal costs for the three controllers.
//!
//! * `mpc1` tracks the reference in relative terms and penalizes the
//!   bounds-normalized inputs.
//! * `mpc2` minimizes a per-period feed conversion ratio; tracking enters
//!   through the terminal cost only.
//! * `mpc3` prices tracking error, feed, heating and aeration.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::growth::{ControlInput, GrowthParams};
use crate::mpc::ControlBounds;

/// Everything a stage cost may look at for one sampling period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageInput {
    /// Predicted weight at the start of the period.
    pub w: f64,
    /// Reference weight at the start of the period.
    pub w_ref: f64,
    pub u: ControlInput,
    /// Predicted weight at the end of the period.
    pub w_next: f64,
}

/// Stage cost ℓ(w, w^d, u) per unit time.
pub trait StageCost: fmt::Debug + Send + Sync {
    fn evaluate(&self, s: &StageInput) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingCostParams {
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcrCostParams {
    /// Floor on the weight gain in the denominator, grams.
    pub delta_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomicCostParams {
    pub alpha: f64,
    /// Fish selling price, USD/kg.
    #[serde(rename = "P_s")]
    pub price_fish: f64,
    /// Feed price, USD/kg.
    #[serde(rename = "P_f")]
    pub price_feed: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Electricity price, USD/kWh.
    #[serde(rename = "P_e")]
    pub price_energy: f64,
    /// Specific heat of water, kJ/(kg·°C).
    pub c_p: f64,
    /// Tank volume, liters.
    #[serde(rename = "L")]
    pub volume_l: f64,
    /// Water mass per liter, kg.
    pub m_w: f64,
    /// Air pump power rating, kW.
    #[serde(rename = "P_max")]
    pub pump_power_kw: f64,
    /// Ambient water temperature the heater lifts from, °C.
    #[serde(rename = "T_amb")]
    pub t_ambient: f64,
    /// DO level that corresponds to a fully running air pump, mg/l.
    #[serde(rename = "DO_ref")]
    pub do_ref: f64,
}

impl Default for EconomicCostParams {
    fn default() -> Self {
        Self {
            alpha: 100.0,
            price_fish: 1.2,
            price_feed: 0.4,
            beta1: 0.1,
            beta2: 0.1,
            price_energy: 0.14,
            c_p: 4.2,
            volume_l: 454.0,
            m_w: 1.0,
            pump_power_kw: 0.102,
            t_ambient: 24.0,
            do_ref: 8.0,
        }
    }
}

impl EconomicCostParams {
    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("alpha", self.alpha),
            ("P_s", self.price_fish),
            ("P_f", self.price_feed),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("P_e", self.price_energy),
            ("c_p", self.c_p),
            ("L", self.volume_l),
            ("m_w", self.m_w),
            ("P_max", self.pump_power_kw),
            ("DO_ref", self.do_ref),
        ];
        for (name, v) in strictly_positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.t_ambient >= 0.0 && self.t_ambient.is_finite()) {
            return Err(Error::Validation(format!(
                "T_amb must be non-negative, got {}",
                self.t_ambient
            )));
        }
        Ok(())
    }

    /// Electricity cost of holding the tank at `temperature` for one day, USD.
    pub fn daily_heating_cost(&self, temperature: f64) -> f64 {
        let lift = (temperature - self.t_ambient).max(0.0);
        self.price_energy * self.c_p * self.volume_l * self.m_w * lift / 3600.0
    }

    /// Electricity cost of aerating to `dissolved_oxygen` for one day, USD.
    pub fn daily_aeration_cost(&self, dissolved_oxygen: f64) -> f64 {
        let duty = (dissolved_oxygen / self.do_ref).clamp(0.0, 1.0);
        24.0 * self.price_energy * self.pump_power_kw * duty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Off,
    Tracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalCostParams {
    pub n_o: usize,
    pub weight_mode: WeightMode,
}

/// Which weight gain the FCR stage cost divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FcrGain {
    /// Gain over the current sampling period.
    #[default]
    PerStep,
    /// Gain accumulated since the start of the run.
    SinceStart,
}

/// ((w − w^d)/w^d)² + λ‖û‖², with û the inputs normalized to [0, 1] by `bounds`.
pub fn stage_cost_tracking(
    w_pred: f64,
    w_ref: f64,
    u: &ControlInput,
    params: &TrackingCostParams,
    bounds: &ControlBounds,
) -> Result<f64> {
    if !(w_ref > 0.0) {
        return Err(Error::Domain(format!(
            "reference weight must be positive, got {w_ref}"
        )));
    }
    let rel = (w_pred - w_ref) / w_ref;
    let scaled = bounds.scale(u);
    let norm_sq: f64 = scaled.iter().map(|x| x * x).sum();
    Ok(rel * rel + params.lambda * norm_sq)
}

/// u1 / max(Δw, floor).
pub fn stage_cost_fcr(feed_rate: f64, delta_w_step: f64, params: &FcrCostParams) -> f64 {
    feed_rate / delta_w_step.max(params.delta_w)
}

/// Priced tracking, feeding, heating and aeration terms.
pub fn stage_cost_economic(
    w_pred: f64,
    w_ref: f64,
    u: &ControlInput,
    params: &EconomicCostParams,
    p: &GrowthParams,
) -> f64 {
    let w_kg = w_pred / 1000.0;
    let w_ref_kg = w_ref / 1000.0;
    let tracking = params.price_fish * (w_kg - w_ref_kg);
    let feeding = params.price_feed * p.r_frac * w_kg * u.feed_rate;
    let heating = params.daily_heating_cost(u.temperature);
    let aeration = params.daily_aeration_cost(u.dissolved_oxygen);
    params.alpha * tracking * tracking
        + feeding * feeding
        + params.beta1 * heating * heating
        + params.beta2 * aeration * aeration
}

/// N_o-weighted relative squared terminal error, or zero when disabled.
pub fn terminal_cost(w_term: f64, w_ref_term: f64, params: &TerminalCostParams) -> Result<f64> {
    match params.weight_mode {
        WeightMode::Off => Ok(0.0),
        WeightMode::Tracking => {
            if !(w_ref_term > 0.0) {
                return Err(Error::Domain(format!(
                    "terminal reference weight must be positive, got {w_ref_term}"
                )));
            }
            let rel = (w_term - w_ref_term) / w_ref_term;
            Ok(params.n_o as f64 * rel * rel)
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrackingCost {
    pub params: TrackingCostParams,
    pub bounds: ControlBounds,
}

impl StageCost for TrackingCost {
    fn evaluate(&self, s: &StageInput) -> Result<f64> {
        stage_cost_tracking(s.w, s.w_ref, &s.u, &self.params, &self.bounds)
    }
}

#[derive(Debug, Clone)]
pub struct FcrCost {
    pub params: FcrCostParams,
    pub gain: FcrGain,
    /// Initial weight of the run, used by [`FcrGain::SinceStart`].
    pub w_origin: f64,
}

impl StageCost for FcrCost {
    fn evaluate(&self, s: &StageInput) -> Result<f64> {
        let gain = match self.gain {
            FcrGain::PerStep => s.w_next - s.w,
            FcrGain::SinceStart => s.w_next - self.w_origin,
        };
        Ok(stage_cost_fcr(s.u.feed_rate, gain, &self.params))
    }
}

#[derive(Debug, Clone)]
pub struct EconomicCost {
    pub params: EconomicCostParams,
    pub growth: GrowthParams,
}

impl StageCost for EconomicCost {
    fn evaluate(&self, s: &StageInput) -> Result<f64> {
        Ok(stage_cost_economic(
            s.w,
            s.w_ref,
            &s.u,
            &self.params,
            &self.growth,
        ))
    }
}

/// A stage cost multiplied by a positive constant.
#[derive(Debug)]
pub struct Scaled<C> {
    pub inner: C,
    pub factor: f64,
}

impl<C: StageCost> StageCost for Scaled<C> {
    fn evaluate(&self, s: &StageInput) -> Result<f64> {
        Ok(self.factor * self.inner.evaluate(s)?)
    }
}

/// Flat cost section of the experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub lambda: f64,
    pub alpha: f64,
    #[serde(rename = "P_s")]
    pub price_fish: f64,
    #[serde(rename = "P_f")]
    pub price_feed: f64,
    pub beta1: f64,
    pub beta2: f64,
    #[serde(rename = "P_e")]
    pub price_energy: f64,
    pub c_p: f64,
    #[serde(rename = "L")]
    pub volume_l: f64,
    pub m_w: f64,
    #[serde(rename = "P_max")]
    pub pump_power_kw: f64,
    #[serde(rename = "T_amb")]
    pub t_ambient: f64,
    #[serde(rename = "DO_ref")]
    pub do_ref: f64,
    pub delta_w: f64,
    pub fcr_gain: FcrGain,
    /// Terminal horizon; `null` follows the prediction horizon.
    #[serde(rename = "N_o")]
    pub n_o: Option<usize>,
    pub weight_mode: WeightMode,
}

impl Default for CostConfig {
    fn default() -> Self {
        let e = EconomicCostParams::default();
        Self {
            lambda: 0.1,
            alpha: e.alpha,
            price_fish: e.price_fish,
            price_feed: e.price_feed,
            beta1: e.beta1,
            beta2: e.beta2,
            price_energy: e.price_energy,
            c_p: e.c_p,
            volume_l: e.volume_l,
            m_w: e.m_w,
            pump_power_kw: e.pump_power_kw,
            t_ambient: e.t_ambient,
            do_ref: e.do_ref,
            delta_w: 1e-3,
            fcr_gain: FcrGain::PerStep,
            n_o: None,
            weight_mode: WeightMode::Tracking,
        }
    }
}

impl CostConfig {
    pub fn tracking(&self) -> TrackingCostParams {
        TrackingCostParams {
            lambda: self.lambda,
        }
    }

    pub fn fcr(&self) -> FcrCostParams {
        FcrCostParams {
            delta_w: self.delta_w,
        }
    }

    pub fn economic(&self) -> EconomicCostParams {
        EconomicCostParams {
            alpha: self.alpha,
            price_fish: self.price_fish,
            price_feed: self.price_feed,
            beta1: self.beta1,
            beta2: self.beta2,
            price_energy: self.price_energy,
            c_p: self.c_p,
            volume_l: self.volume_l,
            m_w: self.m_w,
            pump_power_kw: self.pump_power_kw,
            t_ambient: self.t_ambient,
            do_ref: self.do_ref,
        }
    }

    pub fn terminal(&self, horizon: usize) -> TerminalCostParams {
        TerminalCostParams {
            n_o: self.n_o.unwrap_or(horizon),
            weight_mode: self.weight_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Validation(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.delta_w > 0.0 && self.delta_w.is_finite()) {
            return Err(Error::Validation(format!(
                "delta_w must be positive, got {}",
                self.delta_w
            )));
        }
        self.economic().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Mpc1,
    Mpc2,
    Mpc3,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [
        ControllerKind::Mpc1,
        ControllerKind::Mpc2,
        ControllerKind::Mpc3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Mpc1 => "mpc1",
            ControllerKind::Mpc2 => "mpc2",
            ControllerKind::Mpc3 => "mpc3",
        }
    }

    /// Assembles the stage and terminal cost of this controller for a run
    /// starting at `w0` with prediction horizon `horizon`.
    pub fn build(
        self,
        costs: &CostConfig,
        horizon: usize,
        bounds: &ControlBounds,
        growth: &GrowthParams,
        w0: f64,
    ) -> Controller {
        let stage: Box<dyn StageCost> = match self {
            ControllerKind::Mpc1 => Box::new(TrackingCost {
                params: costs.tracking(),
                bounds: *bounds,
            }),
            ControllerKind::Mpc2 => Box::new(FcrCost {
                params: costs.fcr(),
                gain: costs.fcr_gain,
                w_origin: w0,
            }),
            ControllerKind::Mpc3 => Box::new(EconomicCost {
                params: costs.economic(),
                growth: *growth,
            }),
        };
        Controller {
            kind: self,
            stage,
            terminal: costs.terminal(horizon),
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mpc1" => Ok(ControllerKind::Mpc1),
            "mpc2" => Ok(ControllerKind::Mpc2),
            "mpc3" => Ok(ControllerKind::Mpc3),
            other => Err(Error::Config(format!("unknown controller `{other}`"))),
        }
    }
}

/// A stage cost paired with its terminal cost.
#[derive(Debug)]
pub struct Controller {
    pub kind: ControllerKind,
    pub stage: Box<dyn StageCost>,
    pub terminal: TerminalCostParams,
}
