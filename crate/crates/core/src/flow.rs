//! The Bakry-Émery Ricci flow `∂ₜm = −Ric_{n,m}` and its volume-preserving
//! normalization, integrated with an embedded Runge-Kutta 5(4) pair.

use serde::{Deserialize, Serialize};

use crate::curvature::{ricci_all, Dimension};
use crate::error::{Error, Result};
use crate::graph::{VertexMeasure, WeightedGraph};

/// Dormand-Prince tableau.
mod tableau {
    pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    pub const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    /// Fifth-order weights minus the embedded fourth-order weights.
    pub const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;
const MAX_SHRINK: f64 = 0.2;
const MAX_GROWTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub dimension: Dimension,
    pub normalized: bool,
    pub t_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    /// Step-size ceiling; `None` means `t_max / 100`.
    pub dt_max: Option<f64>,
    /// Blow-up is declared once `min m < blowup_fraction · min m₀`.
    pub blowup_fraction: f64,
    pub conv_rhs_tol: f64,
    pub conv_spread_tol: f64,
    /// Consecutive accepted steps the convergence test must hold for. Also
    /// the number of trailing samples used by the blow-up extrapolation.
    pub conv_window: usize,
    pub sample_stride: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dimension: Dimension::Infinite,
            normalized: false,
            t_max: 100.0,
            rtol: 1e-8,
            atol: 1e-10,
            dt_init: 1e-3,
            dt_min: 1e-12,
            dt_max: None,
            blowup_fraction: 1e-6,
            conv_rhs_tol: 1e-9,
            conv_spread_tol: 1e-8,
            conv_window: 10,
            sample_stride: 1,
        }
    }
}

impl FlowConfig {
    pub fn with_t_max(t_max: f64) -> Self {
        FlowConfig {
            t_max,
            ..Self::default()
        }
    }

    pub fn normalized(mut self, yes: bool) -> Self {
        self.normalized = yes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_max", self.t_max),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("blowup_fraction", self.blowup_fraction),
            ("conv_rhs_tol", self.conv_rhs_tol),
            ("conv_spread_tol", self.conv_spread_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Some(v) = self.dt_max {
            if !(v.is_finite() && v >= self.dt_min) {
                return Err(Error::InvalidParameter(format!(
                    "dt_max must be at least dt_min, got {v}"
                )));
            }
        }
        if self.conv_window == 0 || self.sample_stride == 0 {
            return Err(Error::InvalidParameter(
                "conv_window and sample_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn step_ceiling(&self) -> f64 {
        self.dt_max.unwrap_or(self.t_max / 100.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowOutcome {
    /// Some vertex weight collapsed. `t_hat` is the extrapolated blow-up
    /// time, `t_stop` the last integrated time. `dt_underflow` marks runs
    /// stopped by the step-size floor rather than by the weight threshold.
    BlownUp {
        t_hat: f64,
        t_stop: f64,
        dt_underflow: bool,
    },
    Converged {
        t: f64,
    },
    ReachedTMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub measures: Vec<VertexMeasure>,
    pub curvatures: Vec<Vec<f64>>,
    pub outcome: FlowOutcome,
    pub config: FlowConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_measure(&self) -> &VertexMeasure {
        self.measures.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn max_series(&self) -> Vec<f64> {
        self.measures.iter().map(|m| m.max()).collect()
    }

    pub fn min_series(&self) -> Vec<f64> {
        self.measures.iter().map(|m| m.min()).collect()
    }

    pub fn spread_series(&self) -> Vec<f64> {
        self.measures.iter().map(|m| m.max() - m.min()).collect()
    }

    pub fn volume_series(&self) -> Vec<f64> {
        self.measures.iter().map(|m| m.volume()).collect()
    }

    /// Snapshot index of the last sample with time `≤ t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }
}

/// Curvature at every vertex and the flow velocity.
fn evaluate(
    graph: &WeightedGraph,
    m: &VertexMeasure,
    cfg: &FlowConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ric = ricci_all(graph, m, cfg.dimension)?;
    let shift = if cfg.normalized {
        ric.iter().sum::<f64>() / ric.len() as f64
    } else {
        0.0
    };
    let velocity = ric.iter().map(|r| shift - r).collect();
    Ok((velocity, ric))
}

/// Right-hand side of the (normalized) flow at `m`.
pub fn rhs(graph: &WeightedGraph, m: &VertexMeasure, cfg: &FlowConfig) -> Result<Vec<f64>> {
    Ok(evaluate(graph, m, cfg)?.0)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

enum Trial {
    Accepted {
        state: VertexMeasure,
        velocity: Vec<f64>,
        ric: Vec<f64>,
        err: f64,
    },
    Rejected,
}

/// One Dormand-Prince step from `y` with first stage `k1 = f(y)`.
fn try_step(
    graph: &WeightedGraph,
    y: &VertexMeasure,
    k1: &[f64],
    h: f64,
    cfg: &FlowConfig,
) -> Result<Trial> {
    let n = y.len();
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(7);
    stages.push(k1.to_vec());
    let mut last = None;
    for s in 1..7 {
        let trial: Vec<f64> = (0..n)
            .map(|i| y[i] + h * (0..s).map(|j| tableau::A[s][j] * stages[j][i]).sum::<f64>())
            .collect();
        if trial.iter().any(|&v| !(v > 0.0)) {
            return Ok(Trial::Rejected);
        }
        let state = VertexMeasure::new(trial)?;
        let (velocity, ric) = evaluate(graph, &state, cfg)?;
        stages.push(velocity);
        if s == 6 {
            last = Some((state, ric));
        }
    }
    let (state, ric) = last.expect("seven stages evaluated");
    debug_assert_eq!(tableau::C[6], 1.0);

    let mut err = 0.0_f64;
    for i in 0..n {
        let delta = h * (0..7).map(|j| tableau::E[j] * stages[j][i]).sum::<f64>();
        let scale = cfg.atol + cfg.rtol * y[i].abs().max(state[i].abs());
        err = err.max((delta / scale).abs());
    }
    if !err.is_finite() || err > 1.0 {
        return Ok(Trial::Rejected);
    }
    let velocity = stages.pop().expect("seven stages");
    Ok(Trial::Accepted {
        state,
        velocity,
        ric,
        err,
    })
}

/// Integrate the flow from `m0` until blow-up, convergence or `t_max`.
pub fn integrate(
    graph: &WeightedGraph,
    m0: &VertexMeasure,
    cfg: &FlowConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let m0 = VertexMeasure::for_graph(graph, m0.to_vec())?;
    let floor = cfg.blowup_fraction * m0.min();

    let (mut velocity, ric0) = evaluate(graph, &m0, cfg)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        measures: vec![m0.clone()],
        curvatures: vec![ric0.clone()],
        outcome: FlowOutcome::ReachedTMax,
        config: cfg.clone(),
    };

    let mut t = 0.0;
    let mut state = m0;
    let mut ric = ric0;
    let dt_max = cfg.step_ceiling();
    let mut h = cfg.dt_init.min(dt_max);
    let mut err_prev = 1e-4_f64;
    let mut accepted = 0usize;
    let mut calm_steps = 0usize;
    let mut recorded_last = true;

    let outcome = loop {
        if t >= cfg.t_max {
            break FlowOutcome::ReachedTMax;
        }
        let remaining = cfg.t_max - t;
        if remaining < cfg.dt_min {
            t = cfg.t_max;
            break FlowOutcome::ReachedTMax;
        }
        let step = h.min(remaining);
        if step < cfg.dt_min {
            break FlowOutcome::BlownUp {
                t_hat: t,
                t_stop: t,
                dt_underflow: true,
            };
        }

        match try_step(graph, &state, &velocity, step, cfg)? {
            Trial::Rejected => {
                h = step * 0.5;
                continue;
            }
            Trial::Accepted {
                state: next,
                velocity: next_velocity,
                ric: next_ric,
                err,
            } => {
                t = if step == remaining {
                    cfg.t_max
                } else {
                    t + step
                };
                state = next;
                velocity = next_velocity;
                ric = next_ric;
                accepted += 1;
                recorded_last = false;

                let err_c = err.max(1e-10);
                let factor = SAFETY * err_c.powf(-(0.2 - 0.75 * PI_BETA)) * err_prev.powf(PI_BETA);
                h = (step * factor.clamp(MAX_SHRINK, MAX_GROWTH)).min(dt_max);
                err_prev = err.max(1e-4);

                if accepted.is_multiple_of(cfg.sample_stride) {
                    traj.times.push(t);
                    traj.measures.push(state.clone());
                    traj.curvatures.push(ric.clone());
                    recorded_last = true;
                }

                if state.min() < floor {
                    break FlowOutcome::BlownUp {
                        t_hat: t,
                        t_stop: t,
                        dt_underflow: false,
                    };
                }

                let calm = sup_norm(&velocity) < cfg.conv_rhs_tol
                    && (cfg.normalized || state.max() - state.min() < cfg.conv_spread_tol);
                calm_steps = if calm { calm_steps + 1 } else { 0 };
                if calm_steps >= cfg.conv_window {
                    break FlowOutcome::Converged { t };
                }
            }
        }
    };

    if !recorded_last {
        traj.times.push(t);
        traj.measures.push(state);
        traj.curvatures.push(ric);
    }
    traj.outcome = match outcome {
        FlowOutcome::BlownUp {
            t_stop,
            dt_underflow,
            ..
        } => FlowOutcome::BlownUp {
            t_hat: extrapolate_blowup(&traj).min(cfg.t_max).max(t_stop),
            t_stop,
            dt_underflow,
        },
        other => other,
    };
    Ok(traj)
}

/// Least-squares fit of `min m(t)²` against `t` over the trailing window,
/// extrapolated to zero. Falls back to the last sample time when the fit
/// does not decrease.
fn extrapolate_blowup(traj: &Trajectory) -> f64 {
    let n = traj.len();
    let last_t = traj.final_time();
    let window = traj.config.conv_window.max(2).min(n);
    if window < 2 {
        return last_t;
    }
    let start = n - window;
    let ts = &traj.times[start..];
    let ss: Vec<f64> = traj.measures[start..]
        .iter()
        .map(|m| m.min().powi(2))
        .collect();
    let w = window as f64;
    let t_mean = ts.iter().sum::<f64>() / w;
    let s_mean = ss.iter().sum::<f64>() / w;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, s) in ts.iter().zip(&ss) {
        sxx += (t - t_mean) * (t - t_mean);
        sxy += (t - t_mean) * (s - s_mean);
    }
    if sxx <= 0.0 {
        return last_t;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return last_t;
    }
    (t_mean - s_mean / slope).max(last_t)
}

/// Extrapolated blow-up time of a trajectory that ended in blow-up.
pub fn estimate_blowup_time(traj: &Trajectory) -> Result<f64> {
    match traj.outcome {
        FlowOutcome::BlownUp { .. } if !traj.is_empty() => Ok(extrapolate_blowup(traj)),
        FlowOutcome::BlownUp { .. } => Err(Error::Contract("trajectory is empty".into())),
        other => Err(Error::Contract(format!(
            "blow-up estimate requested for a run that ended with {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    #[test]
    fn rhs_vanishes_on_constant_long_cycle() {
        let g = generate(Family::Cycle(7)).unwrap();
        let m = VertexMeasure::uniform(7, 2.3).unwrap();
        let v = rhs(&g, &m, &FlowConfig::default()).unwrap();
        assert!(sup_norm(&v) < 1e-14);
    }

    #[test]
    fn normalized_rhs_sums_to_zero() {
        let g = generate(Family::TreeT3).unwrap();
        let m = VertexMeasure::new((1..=10).map(|i| 0.5 + i as f64 / 3.0).collect()).unwrap();
        let v = rhs(&g, &m, &FlowConfig::default().normalized(true)).unwrap();
        assert!(v.iter().sum::<f64>().abs() <= 1e-13 * sup_norm(&v));
    }

    #[test]
    fn normalized_rhs_at_fixed_ray() {
        let g = generate(Family::Cycle(3)).unwrap();
        let m = VertexMeasure::new(vec![5.0, 5.0, 2.0])
            .unwrap()
            .scaled(0.7)
            .unwrap();
        let v = rhs(&g, &m, &FlowConfig::default().normalized(true)).unwrap();
        assert!(sup_norm(&v) < 1e-12);
    }

    #[test]
    fn constant_c6_is_stationary() {
        let g = generate(Family::Cycle(6)).unwrap();
        let m0 = VertexMeasure::uniform(6, 1.5).unwrap();
        let cfg = FlowConfig::with_t_max(10.0);
        let traj = integrate(&g, &m0, &cfg).unwrap();
        assert!(matches!(traj.outcome, FlowOutcome::Converged { .. }));
        assert_eq!(traj.len(), cfg.conv_window + 1);
        for m in &traj.measures {
            for (a, b) in m.iter().zip(m0.iter()) {
                assert!((a - b).abs() <= cfg.atol * cfg.t_max);
            }
        }
    }

    #[test]
    fn c3_blows_up_before_bound() {
        let g = generate(Family::Cycle(3)).unwrap();
        let m0 = VertexMeasure::new(vec![2.0, 3.0, 4.0]).unwrap();
        let traj = integrate(&g, &m0, &FlowConfig::with_t_max(100.0)).unwrap();
        assert!(matches!(traj.outcome, FlowOutcome::BlownUp { .. }));
        let t_hat = estimate_blowup_time(&traj).unwrap();
        assert!(t_hat <= 16.0 && t_hat >= traj.final_time());
        assert!(traj.measures.iter().all(|m| m.iter().all(|&v| v > 0.0)));
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn estimate_on_synthetic_quadratic_vanishing() {
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.02).collect();
        let measures = times
            .iter()
            .map(|t| VertexMeasure::new(vec![(1.0 - 2.0 * t).sqrt(), 5.0]).unwrap())
            .collect();
        let traj = Trajectory {
            curvatures: vec![vec![0.0, 0.0]; 20],
            times,
            measures,
            outcome: FlowOutcome::BlownUp {
                t_hat: 0.38,
                t_stop: 0.38,
                dt_underflow: false,
            },
            config: FlowConfig::default(),
        };
        assert!((estimate_blowup_time(&traj).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn estimate_requires_blow_up() {
        let g = generate(Family::Cycle(5)).unwrap();
        let m0 = VertexMeasure::uniform(5, 1.0).unwrap();
        let traj = integrate(&g, &m0, &FlowConfig::with_t_max(1.0)).unwrap();
        assert!(matches!(
            estimate_blowup_time(&traj),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn rejects_bad_input() {
        let g = generate(Family::Cycle(5)).unwrap();
        let m0 = VertexMeasure::uniform(4, 1.0).unwrap();
        assert!(integrate(&g, &m0, &FlowConfig::default()).is_err());
        let m0 = VertexMeasure::uniform(5, 1.0).unwrap();
        let cfg = FlowConfig {
            rtol: 0.0,
            ..FlowConfig::default()
        };
        assert!(matches!(
            integrate(&g, &m0, &cfg),
            Err(Error::InvalidParameter(_))
        ));
    }
}
