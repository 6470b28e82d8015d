//! Post-run evaluation: feed conversion ratio, cost ledger, profit and
//! tracking error.

use serde::{Deserialize, Serialize};

use crate::cost::EconomicCostParams;
use crate::error::{Error, Result};
use crate::growth::FishState;
use crate::mpc::ClosedLoopResult;
use crate::reference::ReferenceTrajectory;

/// Population scaling of the single simulated fish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FarmConfig {
    pub n_fish: u32,
    /// Initial weight per fish, grams.
    pub w0: f64,
}

impl Default for FarmConfig {
    fn default() -> Self {
        Self {
            n_fish: 1000,
            w0: 20.0,
        }
    }
}

impl FarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_fish == 0 {
            return Err(Error::Validation("n_fish must be at least 1".into()));
        }
        if !(self.w0 > 0.0 && self.w0.is_finite()) {
            return Err(Error::Validation(format!(
                "w0 must be positive, got {}",
                self.w0
            )));
        }
        Ok(())
    }
}

/// Monetary outcome of a run, USD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub revenue: f64,
    pub feed_cost: f64,
    pub heating_cost: f64,
    pub oxygenation_cost: f64,
    pub total_costs: f64,
    pub profit: f64,
    /// Profit as a percentage of total costs; undefined when nothing was spent.
    pub profit_percentage: Option<f64>,
}

impl CostLedger {
    pub fn from_parts(
        revenue: f64,
        feed_cost: f64,
        heating_cost: f64,
        oxygenation_cost: f64,
    ) -> Self {
        let total_costs = feed_cost + heating_cost + oxygenation_cost;
        let (profit, profit_percentage) = match profit_and_percentage(revenue, total_costs) {
            Ok((p, pct)) => (p, Some(pct)),
            Err(_) => (revenue - total_costs, None),
        };
        Self {
            revenue,
            feed_cost,
            heating_cost,
            oxygenation_cost,
            total_costs,
            profit,
            profit_percentage,
        }
    }

    /// Ledger from per-fish weight and feed totals plus tank-level energy costs.
    pub fn from_totals(
        n_fish: u32,
        final_weight_g: f64,
        feed_g_per_fish: f64,
        heating_cost: f64,
        oxygenation_cost: f64,
        econ: &EconomicCostParams,
    ) -> Self {
        let revenue = compute_revenue(n_fish, final_weight_g / 1000.0, econ.price_fish);
        let feed_cost = econ.price_feed * feed_g_per_fish / 1000.0 * f64::from(n_fish);
        Self::from_parts(revenue, feed_cost, heating_cost, oxygenation_cost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MseMode {
    /// Mean of 100 · ((w − w^d)/w^d)².
    #[default]
    Relative,
    /// Mean of (w − w^d)², g².
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub tracking_mse: f64,
    /// Undefined when the fish did not gain weight.
    pub fcr: Option<f64>,
    pub final_weight: f64,
    /// Feed per fish over the run, grams.
    pub total_feed: f64,
    pub ledger: CostLedger,
    pub elapsed: f64,
}

/// Total feed over net weight gain (any consistent mass unit).
pub fn compute_fcr(total_feed_kg: f64, final_kg: f64, initial_kg: f64) -> Result<f64> {
    let gain = final_kg - initial_kg;
    if !(gain > 0.0) {
        return Err(Error::Metric(format!(
            "FCR needs a positive weight gain, got {gain}"
        )));
    }
    Ok(total_feed_kg / gain)
}

pub fn compute_revenue(n_fish: u32, final_w_kg: f64, price_fish: f64) -> f64 {
    f64::from(n_fish) * final_w_kg * price_fish
}

/// Returns `(revenue − costs, 100 · (revenue − costs) / costs)`.
pub fn profit_and_percentage(revenue: f64, total_costs: f64) -> Result<(f64, f64)> {
    if !(total_costs > 0.0) {
        return Err(Error::Metric(format!(
            "profit percentage needs positive costs, got {total_costs}"
        )));
    }
    let profit = revenue - total_costs;
    Ok((profit, 100.0 * profit / total_costs))
}

/// Prices a finished run. Heating and aeration are tank-level costs; feed and
/// revenue scale with the number of fish.
pub fn compute_cost_ledger(
    run: &ClosedLoopResult,
    farm: &FarmConfig,
    econ: &EconomicCostParams,
) -> CostLedger {
    let periods = run.applied_controls.len();
    // Period length recovered from the state clock.
    let epsilon = if periods > 0 {
        (run.states[periods].t - run.states[0].t) / periods as f64
    } else {
        0.0
    };
    let heating: f64 = run
        .applied_controls
        .iter()
        .map(|u| econ.daily_heating_cost(u.temperature) * epsilon)
        .sum();
    let oxygenation: f64 = run
        .applied_controls
        .iter()
        .map(|u| econ.daily_aeration_cost(u.dissolved_oxygen) * epsilon)
        .sum();
    let final_weight = if run.states.is_empty() {
        farm.w0
    } else {
        run.final_weight()
    };
    CostLedger::from_totals(
        farm.n_fish,
        final_weight,
        run.total_feed(),
        heating,
        oxygenation,
        econ,
    )
}

/// Mean squared tracking error over the sampling instants.
pub fn tracking_mse(
    states: &[FishState],
    reference: &ReferenceTrajectory,
    mode: MseMode,
) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::Argument(
            "tracking MSE needs at least one state".into(),
        ));
    }
    let mut sum = 0.0;
    for s in states {
        let wd = reference.sample(s.t);
        let e = match mode {
            MseMode::Relative => {
                if !(wd > 0.0) {
                    return Err(Error::Domain(format!(
                        "reference weight must be positive, got {wd}"
                    )));
                }
                100.0 * ((s.w - wd) / wd).powi(2)
            }
            MseMode::Absolute => (s.w - wd).powi(2),
        };
        sum += e;
    }
    Ok(sum / states.len() as f64)
}

pub fn evaluate_run(
    run: &ClosedLoopResult,
    reference: &ReferenceTrajectory,
    farm: &FarmConfig,
    econ: &EconomicCostParams,
    mode: MseMode,
) -> Result<PerformanceReport> {
    let total_feed = run.total_feed();
    Ok(PerformanceReport {
        tracking_mse: tracking_mse(&run.states, reference, mode)?,
        fcr: compute_fcr(
            total_feed / 1000.0,
            run.final_weight() / 1000.0,
            run.initial_weight() / 1000.0,
        )
        .ok(),
        final_weight: run.final_weight(),
        total_feed,
        ledger: compute_cost_ledger(run, farm, econ),
        elapsed: run.wall_time,
    })
}
