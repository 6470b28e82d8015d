//! Receding-horizon optimal control by direct single shooting.
//!
//! The decision variables are one [`ControlInput`] per sampling period over a
//! horizon of `N` periods. A plan is rolled out through the growth model,
//! scored by a stage cost (left-endpoint rectangle rule) plus a terminal
//! cost, and improved by [`solver::minimize_unit_box`] in bounds-normalized
//! coordinates.

mod closed_loop;
pub mod solver;

pub use closed_loop::{
    run_closed_loop, ChannelNoiseStats, ClosedLoopConfig, ClosedLoopResult, NoiseConfig,
    NoiseStats, SolveSummary,
};
pub use solver::{minimize_unit_box, BoxMinimum, SolverOptions};

use serde::{Deserialize, Serialize};

use crate::cost::{terminal_cost, StageCost, StageInput, TerminalCostParams};
use crate::error::{Error, Result};
use crate::growth::{rollout, ControlInput, FishState, GrowthParams, SimConfig};
use crate::reference::ReferenceTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonConfig {
    /// Prediction horizon in sampling periods.
    #[serde(rename = "N")]
    pub n: usize,
    /// Terminal-cost horizon length.
    #[serde(rename = "N_o")]
    pub n_o: usize,
    /// Sampling period in days.
    pub epsilon: f64,
}

impl Default for HorizonConfig {
    fn default() -> Self {
        Self {
            n: 3,
            n_o: 3,
            epsilon: 1.0,
        }
    }
}

impl HorizonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation(
                "prediction horizon N must be at least 1".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Validation(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Box constraints on each input channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlBounds {
    pub lower: ControlInput,
    pub upper: ControlInput,
}

impl Default for ControlBounds {
    fn default() -> Self {
        Self {
            lower: ControlInput::new(0.0, 24.0, 0.3),
            upper: ControlInput::new(1.0, 40.0, 8.0),
        }
    }
}

impl ControlBounds {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::Validation("control bounds must be finite".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::Validation(
                "lower control bound exceeds upper bound".into(),
            ));
        }
        if self.lower.feed_rate < 0.0 || self.upper.feed_rate > 1.0 {
            return Err(Error::Validation(
                "feed-rate bounds must lie within [0, 1]".into(),
            ));
        }
        if self.lower.dissolved_oxygen < 0.0 {
            return Err(Error::Validation(
                "DO lower bound must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Maps `u` to [0, 1] per channel; a degenerate channel maps to 0.
    pub fn scale(&self, u: &ControlInput) -> [f64; 3] {
        let (lo, hi, x) = (self.lower.to_array(), self.upper.to_array(), u.to_array());
        std::array::from_fn(|i| {
            let span = hi[i] - lo[i];
            if span > 0.0 {
                (x[i] - lo[i]) / span
            } else {
                0.0
            }
        })
    }

    pub fn unscale(&self, x: [f64; 3]) -> ControlInput {
        let (lo, hi) = (self.lower.to_array(), self.upper.to_array());
        ControlInput::from_array(std::array::from_fn(|i| lo[i] + x[i] * (hi[i] - lo[i])))
    }

    pub fn clamp(&self, u: &ControlInput) -> ControlInput {
        let (lo, hi, x) = (self.lower.to_array(), self.upper.to_array(), u.to_array());
        ControlInput::from_array(std::array::from_fn(|i| x[i].clamp(lo[i], hi[i])))
    }

    pub fn contains(&self, u: &ControlInput) -> bool {
        let (lo, hi, x) = (self.lower.to_array(), self.upper.to_array(), u.to_array());
        (0..3).all(|i| x[i] >= lo[i] && x[i] <= hi[i])
    }

    pub fn mid(&self) -> ControlInput {
        self.unscale([0.5; 3])
    }
}

/// Piecewise-constant input sequence, one entry per sampling period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPlan {
    pub actions: Vec<ControlInput>,
}

impl ControlPlan {
    pub fn new(actions: Vec<ControlInput>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Argument(
                "a control plan needs at least one action".into(),
            ));
        }
        Ok(Self { actions })
    }

    pub fn constant(u: ControlInput, n: usize) -> Self {
        Self {
            actions: vec![u; n.max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn first(&self) -> ControlInput {
        self.actions[0]
    }

    pub fn within(&self, bounds: &ControlBounds) -> bool {
        self.actions.iter().all(|u| bounds.contains(u))
    }

    /// Flattens to `[f0, T0, DO0, f1, ...]` in bounds-normalized units.
    pub fn to_scaled(&self, bounds: &ControlBounds) -> Vec<f64> {
        self.actions.iter().flat_map(|u| bounds.scale(u)).collect()
    }

    pub fn from_scaled(x: &[f64], bounds: &ControlBounds) -> Self {
        Self {
            actions: x
                .chunks_exact(3)
                .map(|c| bounds.unscale([c[0], c[1], c[2]]))
                .collect(),
        }
    }
}

/// Open-loop prediction from the measured state; returns `plan.len() + 1` states.
pub fn predict(
    start: FishState,
    plan: &ControlPlan,
    cfg: &SimConfig,
    p: &GrowthParams,
) -> Result<Vec<FishState>> {
    rollout(start, &plan.actions, cfg, p)
}

/// Σ ℓ(w_k, w^d(t_k), u_k)·ε over the horizon plus ℓ_T at its end.
pub fn horizon_cost(
    predicted: &[FishState],
    reference: &ReferenceTrajectory,
    plan: &ControlPlan,
    stage: &dyn StageCost,
    terminal: &TerminalCostParams,
    epsilon: f64,
) -> Result<f64> {
    if predicted.len() != plan.len() + 1 {
        return Err(Error::Argument(format!(
            "expected {} predicted states for a {}-step plan, got {}",
            plan.len() + 1,
            plan.len(),
            predicted.len()
        )));
    }
    let mut total = 0.0;
    for (k, u) in plan.actions.iter().enumerate() {
        let s = StageInput {
            w: predicted[k].w,
            w_ref: reference.sample(predicted[k].t),
            u: *u,
            w_next: predicted[k + 1].w,
        };
        let l = stage.evaluate(&s)?;
        if !l.is_finite() {
            return Err(Error::Cost(format!(
                "stage cost is not finite at horizon step {k}"
            )));
        }
        total += l * epsilon;
    }
    let end = predicted[plan.len()];
    let lt = terminal_cost(end.w, reference.sample(end.t), terminal)?;
    if !lt.is_finite() {
        return Err(Error::Cost("terminal cost is not finite".into()));
    }
    Ok(total + lt)
}

/// Drops the first action and repeats the last one.
pub fn shift_warm_start(prev: &ControlPlan) -> ControlPlan {
    let mut actions: Vec<ControlInput> = prev.actions.iter().skip(1).copied().collect();
    actions.push(*prev.actions.last().expect("control plans are never empty"));
    ControlPlan { actions }
}

/// One finite-horizon optimal control problem, minus the initial state.
#[derive(Debug, Clone, Copy)]
pub struct Ocp<'a> {
    pub reference: &'a ReferenceTrajectory,
    pub stage: &'a dyn StageCost,
    pub terminal: TerminalCostParams,
    pub bounds: ControlBounds,
    pub sim: SimConfig,
    pub growth: GrowthParams,
}

impl Ocp<'_> {
    pub fn cost(&self, start: FishState, plan: &ControlPlan) -> Result<f64> {
        let predicted = predict(start, plan, &self.sim, &self.growth)?;
        horizon_cost(
            &predicted,
            self.reference,
            plan,
            self.stage,
            &self.terminal,
            self.sim.epsilon,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcpResult {
    pub plan: ControlPlan,
    /// Objective value J of `plan`.
    pub cost: f64,
    /// Objective value of the warm start.
    pub warm_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Locally minimizes the horizon cost from `start`, starting at `warm`.
///
/// The returned plan is feasible and never costs more than `warm`.
pub fn solve_ocp(
    ocp: &Ocp<'_>,
    start: FishState,
    warm: &ControlPlan,
    opts: &SolverOptions,
) -> Result<OcpResult> {
    if warm.is_empty() {
        return Err(Error::Argument("warm start is empty".into()));
    }
    if !warm.within(&ocp.bounds) {
        return Err(Error::Argument(
            "warm start violates the control bounds".into(),
        ));
    }
    let warm_cost = ocp
        .cost(start, warm)
        .map_err(|e| Error::Solver(format!("warm start cannot be evaluated: {e}")))?;
    let x0 = warm.to_scaled(&ocp.bounds);
    let objective = |x: &[f64]| {
        let plan = ControlPlan::from_scaled(x, &ocp.bounds);
        match ocp.cost(start, &plan) {
            Ok(c) if c.is_finite() => c,
            _ => f64::INFINITY,
        }
    };
    let min = minimize_unit_box(objective, &x0, opts)?;
    // Scaling round-trips can move a bound by an ulp; keep the warm plan if
    // nothing improved so the descent guarantee is exact.
    let (plan, cost) = if min.value < warm_cost {
        let plan = ControlPlan::from_scaled(&min.x, &ocp.bounds);
        let plan = ControlPlan {
            actions: plan.actions.iter().map(|u| ocp.bounds.clamp(u)).collect(),
        };
        let cost = ocp.cost(start, &plan)?;
        if cost <= warm_cost {
            (plan, cost)
        } else {
            (warm.clone(), warm_cost)
        }
    } else {
        (warm.clone(), warm_cost)
    };
    Ok(OcpResult {
        plan,
        cost,
        warm_cost,
        iterations: min.iterations,
        converged: min.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{Scaled, TrackingCost, TrackingCostParams, WeightMode};
    use crate::growth::simulate;
    use approx::assert_relative_eq;

    #[derive(Debug)]
    struct Fixed(Vec<f64>);

    impl StageCost for Fixed {
        fn evaluate(&self, s: &StageInput) -> Result<f64> {
            // Identify the step by its feed rate, which the tests set to k.
            Ok(self.0[s.u.feed_rate as usize])
        }
    }

    fn off() -> TerminalCostParams {
        TerminalCostParams {
            n_o: 0,
            weight_mode: WeightMode::Off,
        }
    }

    fn flat_reference() -> ReferenceTrajectory {
        ReferenceTrajectory::new(vec![(0.0, 10.0), (100.0, 10.0)]).unwrap()
    }

    fn states(n: usize) -> Vec<FishState> {
        (0..=n).map(|k| FishState::new(k as f64, 10.0)).collect()
    }

    #[test]
    fn horizon_cost_quadrature() {
        let r = flat_reference();
        let plan = |n: usize| {
            ControlPlan::new(
                (0..n)
                    .map(|k| ControlInput::new(k as f64, 30.0, 2.0))
                    .collect(),
            )
            .unwrap()
        };
        assert_eq!(
            horizon_cost(
                &states(2),
                &r,
                &plan(2),
                &Fixed(vec![0.0, 0.0]),
                &off(),
                1.0
            )
            .unwrap(),
            0.0
        );
        assert_eq!(
            horizon_cost(&states(1), &r, &plan(1), &Fixed(vec![2.5]), &off(), 1.0).unwrap(),
            2.5
        );
        assert_eq!(
            horizon_cost(
                &states(3),
                &r,
                &plan(3),
                &Fixed(vec![1.0, 2.0, 3.0]),
                &off(),
                1.0
            )
            .unwrap(),
            6.0
        );
        let term = TerminalCostParams {
            n_o: 3,
            weight_mode: WeightMode::Tracking,
        };
        let mut s = states(3);
        s[3].w = 11.0;
        let c = horizon_cost(&s, &r, &plan(3), &Fixed(vec![1.0, 2.0, 3.0]), &term, 1.0).unwrap();
        assert_relative_eq!(c, 6.0 + 0.03, epsilon = 1e-12);
        assert!(horizon_cost(&states(2), &r, &plan(3), &Fixed(vec![0.0; 3]), &off(), 1.0).is_err());
    }

    #[test]
    fn non_finite_stage_cost_is_reported() {
        let r = flat_reference();
        let plan = ControlPlan::constant(ControlInput::new(0.0, 30.0, 2.0), 1);
        let res = horizon_cost(&states(1), &r, &plan, &Fixed(vec![f64::NAN]), &off(), 1.0);
        assert!(matches!(res, Err(Error::Cost(_))));
    }

    #[test]
    fn shift_rule() {
        let a = ControlInput::new(0.1, 25.0, 1.0);
        let b = ControlInput::new(0.2, 26.0, 2.0);
        let c = ControlInput::new(0.3, 27.0, 3.0);
        let shifted = shift_warm_start(&ControlPlan::new(vec![a, b, c]).unwrap());
        assert_eq!(shifted.actions, vec![b, c, c]);
        let flat = ControlPlan::constant(b, 4);
        assert_eq!(shift_warm_start(&flat), flat);
        assert_eq!(
            shift_warm_start(&ControlPlan::constant(a, 1)).actions,
            vec![a]
        );
    }

    #[test]
    fn bounds_scaling_round_trip() {
        let b = ControlBounds::default();
        let u = ControlInput::new(0.25, 28.0, 4.15);
        let x = b.scale(&u);
        assert_relative_eq!(x[0], 0.25);
        assert_relative_eq!(x[1], 0.25);
        assert_relative_eq!(x[2], 0.5);
        let back = b.unscale(x);
        assert_relative_eq!(back.temperature, 28.0, epsilon = 1e-12);
        assert_eq!(
            b.clamp(&ControlInput::new(2.0, 10.0, 9.0)),
            ControlInput::new(1.0, 24.0, 8.0)
        );
        let bad = ControlBounds {
            lower: b.upper,
            upper: b.lower,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn prediction_contract() {
        let p = GrowthParams::default();
        let cfg = SimConfig::default();
        let plan = ControlPlan::constant(ControlInput::new(0.7, 31.0, 3.0), 1);
        let start = FishState::new(0.0, 50.0);
        assert_eq!(predict(start, &plan, &cfg, &p).unwrap().len(), 2);

        let plan = ControlPlan::new(vec![
            ControlInput::new(0.7, 31.0, 3.0),
            ControlInput::new(0.2, 35.0, 1.0),
            ControlInput::new(1.0, 29.0, 6.0),
        ])
        .unwrap();
        let a = predict(start, &plan, &cfg, &p).unwrap();
        let b = predict(start, &plan, &cfg, &p).unwrap();
        assert_eq!(a, b);
        let sim = simulate(50.0, &plan.actions, &cfg, &p).unwrap();
        assert_eq!(a, sim);
    }

    fn generated_problem(plan_u: ControlInput) -> (ReferenceTrajectory, GrowthParams, SimConfig) {
        let p = GrowthParams::default();
        let cfg = SimConfig::default();
        let states = simulate(40.0, &vec![plan_u; 10], &cfg, &p).unwrap();
        let r = ReferenceTrajectory::new(states.iter().map(|s| (s.t, s.w)).collect()).unwrap();
        (r, p, cfg)
    }

    #[test]
    fn generating_plan_is_a_fixed_point() {
        let u = ControlInput::new(0.6, 30.0, 2.0);
        let (r, p, cfg) = generated_problem(u);
        let bounds = ControlBounds::default();
        let stage = TrackingCost {
            params: TrackingCostParams { lambda: 0.0 },
            bounds,
        };
        let ocp = Ocp {
            reference: &r,
            stage: &stage,
            terminal: TerminalCostParams {
                n_o: 3,
                weight_mode: WeightMode::Tracking,
            },
            bounds,
            sim: cfg,
            growth: p,
        };
        let warm = ControlPlan::constant(u, 3);
        let res = solve_ocp(
            &ocp,
            FishState::new(0.0, 40.0),
            &warm,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(res.cost < 1e-20, "cost {}", res.cost);
        assert_eq!(res.plan, warm);
    }

    #[test]
    fn recovers_reachable_reference_from_random_start() {
        let u = ControlInput::new(0.6, 30.0, 2.0);
        let (r, p, cfg) = generated_problem(u);
        let bounds = ControlBounds::default();
        let stage = TrackingCost {
            params: TrackingCostParams { lambda: 0.0 },
            bounds,
        };
        let ocp = Ocp {
            reference: &r,
            stage: &stage,
            terminal: TerminalCostParams {
                n_o: 3,
                weight_mode: WeightMode::Tracking,
            },
            bounds,
            sim: cfg,
            growth: p,
        };
        let warm = ControlPlan::new(vec![
            ControlInput::new(0.15, 37.0, 6.0),
            ControlInput::new(0.9, 25.0, 0.5),
            ControlInput::new(0.4, 39.0, 7.5),
        ])
        .unwrap();
        let start = FishState::new(0.0, 40.0);
        let res = solve_ocp(&ocp, start, &warm, &SolverOptions::default()).unwrap();
        assert!(res.cost <= res.warm_cost);
        assert!(res.plan.within(&bounds));
        let end = *predict(start, &res.plan, &cfg, &p).unwrap().last().unwrap();
        let rel = (end.w - r.sample(end.t)).abs() / r.sample(end.t);
        assert!(rel < 1e-3, "terminal relative error {rel}");
    }

    #[test]
    fn positive_scaling_keeps_the_argmin() {
        let (r, p, cfg) = generated_problem(ControlInput::new(0.8, 33.0, 2.0));
        let bounds = ControlBounds::default();
        let base = TrackingCost {
            params: TrackingCostParams { lambda: 0.1 },
            bounds,
        };
        let scaled = Scaled {
            inner: base.clone(),
            factor: 25.0,
        };
        let terminal = TerminalCostParams {
            n_o: 0,
            weight_mode: WeightMode::Off,
        };
        let warm = ControlPlan::constant(bounds.mid(), 3);
        let start = FishState::new(0.0, 40.0);
        let solve = |stage: &dyn StageCost| {
            let ocp = Ocp {
                reference: &r,
                stage,
                terminal,
                bounds,
                sim: cfg,
                growth: p,
            };
            solve_ocp(&ocp, start, &warm, &SolverOptions::default()).unwrap()
        };
        let a = solve(&base);
        let b = solve(&scaled);
        for (x, y) in a
            .plan
            .to_scaled(&bounds)
            .iter()
            .zip(b.plan.to_scaled(&bounds))
        {
            assert!((x - y).abs() < 1e-3, "{x} vs {y}");
        }
    }

    #[test]
    fn warm_start_must_be_feasible() {
        let (r, p, cfg) = generated_problem(ControlInput::new(0.8, 33.0, 2.0));
        let bounds = ControlBounds::default();
        let stage = TrackingCost {
            params: TrackingCostParams { lambda: 0.1 },
            bounds,
        };
        let ocp = Ocp {
            reference: &r,
            stage: &stage,
            terminal: off(),
            bounds,
            sim: cfg,
            growth: p,
        };
        let bad = ControlPlan::constant(ControlInput::new(1.5, 33.0, 2.0), 3);
        assert!(solve_ocp(
            &ocp,
            FishState::new(0.0, 40.0),
            &bad,
            &SolverOptions::default()
        )
        .is_err());
    }
}
