//! Checks on flow trajectories: blow-up bounds, monotone extrema, order
//! preservation, volume conservation, and the normalized-flow fixed points
//! and phase field on the triangle.

use serde::{Deserialize, Serialize};

use crate::closed_forms::ric_c3;
use crate::error::{Error, Result};
use crate::flow::{estimate_blowup_time, integrate, rhs, FlowConfig, FlowOutcome, Trajectory};
use crate::graph::{generate, Family, VertexMeasure};

/// Allowed drift of the total mass under the normalized flow.
pub const VOLUME_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub quantity: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    #[serde(rename = "violations")]
    pub details: Vec<Violation>,
}

impl CheckReport {
    pub fn from_violations(name: impl Into<String>, details: Vec<Violation>) -> Self {
        CheckReport {
            name: name.into(),
            passed: details.is_empty(),
            details,
        }
    }

    /// Single-valued check: passes iff `quantity ≤ threshold`.
    pub fn at_most(name: impl Into<String>, t: f64, quantity: f64, threshold: f64) -> Self {
        let details = if quantity <= threshold {
            Vec::new()
        } else {
            vec![Violation {
                t,
                quantity,
                threshold,
            }]
        };
        Self::from_violations(name, details)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupFamily {
    T3,
    C3,
    C4,
}

impl BlowupFamily {
    pub fn graph_family(self) -> Family {
        match self {
            BlowupFamily::T3 => Family::TreeT3,
            BlowupFamily::C3 => Family::Cycle(3),
            BlowupFamily::C4 => Family::Cycle(4),
        }
    }

    fn vertex_count(self) -> usize {
        match self {
            BlowupFamily::T3 => 10,
            BlowupFamily::C3 => 3,
            BlowupFamily::C4 => 4,
        }
    }
}

/// Upper bound on the maximal existence time:
/// `(min_{leaves} m₀)²/2` on the tree, `max m₀²` on `C₃`, `max m₀²/4` on `C₄`.
pub fn blowup_bound(family: BlowupFamily, m0: &[f64]) -> Result<f64> {
    if m0.len() != family.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "{family:?} has {} vertices, measure has {}",
            family.vertex_count(),
            m0.len()
        )));
    }
    let m0 = VertexMeasure::new(m0.to_vec())?;
    Ok(match family {
        BlowupFamily::T3 => {
            let tree = generate(Family::TreeT3)?;
            let leaf_min = tree
                .boundary()
                .iter()
                .map(|&x| m0[x])
                .fold(f64::INFINITY, f64::min);
            leaf_min * leaf_min / 2.0
        }
        BlowupFamily::C3 => m0.max().powi(2),
        BlowupFamily::C4 => m0.max().powi(2) / 4.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    MaxNonIncreasing,
    MinNonDecreasing,
    MaxStrictlyDecreasing,
}

fn require_nonempty(traj: &Trajectory) -> Result<()> {
    if traj.is_empty() {
        Err(Error::Contract("trajectory is empty".into()))
    } else {
        Ok(())
    }
}

/// Scan consecutive snapshots of `max m` or `min m`.
///
/// A non-strict check flags steps that move the wrong way by more than
/// `drift_tol`; the strict check flags any step that fails to decrease by
/// at least `-drift_tol`.
pub fn check_extrema_monotone(
    traj: &Trajectory,
    expect: Monotone,
    drift_tol: f64,
) -> Result<CheckReport> {
    require_nonempty(traj)?;
    let series = match expect {
        Monotone::MinNonDecreasing => traj.min_series(),
        _ => traj.max_series(),
    };
    let mut details = Vec::new();
    for (k, pair) in series.windows(2).enumerate() {
        let delta = pair[1] - pair[0];
        let bad = match expect {
            Monotone::MaxNonIncreasing => delta > drift_tol,
            Monotone::MinNonDecreasing => -delta > drift_tol,
            Monotone::MaxStrictlyDecreasing => delta >= drift_tol,
        };
        if bad {
            details.push(Violation {
                t: traj.times[k + 1],
                quantity: delta,
                threshold: drift_tol,
            });
        }
    }
    Ok(CheckReport::from_violations(
        format!("{expect:?}").to_lowercase(),
        details,
    ))
}

/// Every snapshot lies in `[lo − drift, hi + drift]` componentwise.
pub fn check_within(traj: &Trajectory, lo: f64, hi: f64, drift: f64) -> Result<CheckReport> {
    require_nonempty(traj)?;
    let mut details = Vec::new();
    for (t, m) in traj.times.iter().zip(&traj.measures) {
        if m.min() < lo - drift {
            details.push(Violation {
                t: *t,
                quantity: m.min(),
                threshold: lo - drift,
            });
        }
        if m.max() > hi + drift {
            details.push(Violation {
                t: *t,
                quantity: m.max(),
                threshold: hi + drift,
            });
        }
    }
    Ok(CheckReport::from_violations(
        "within_initial_range",
        details,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extreme {
    StrictMax,
    StrictMin,
}

/// The given vertex keeps its strict extremal position at every snapshot.
pub fn check_order_preserved(
    traj: &Trajectory,
    vertex: usize,
    mode: Extreme,
) -> Result<CheckReport> {
    require_nonempty(traj)?;
    let m0 = &traj.measures[0];
    if m0.len() != 3 || vertex >= 3 {
        return Err(Error::Contract(
            "order preservation is checked on the triangle only".into(),
        ));
    }
    // Gap by which `vertex` beats the best competitor; positive means strict.
    let gap = |m: &VertexMeasure| {
        let others = (0..3).filter(|&y| y != vertex).map(|y| m[y]);
        match mode {
            Extreme::StrictMax => m[vertex] - others.fold(f64::NEG_INFINITY, f64::max),
            Extreme::StrictMin => others.fold(f64::INFINITY, f64::min) - m[vertex],
        }
    };
    if !(gap(m0) > 0.0) {
        return Err(Error::Contract(format!(
            "vertex {vertex} is not initially a {mode:?}"
        )));
    }
    let details = traj
        .times
        .iter()
        .zip(&traj.measures)
        .filter(|(_, m)| !(gap(m) > 0.0))
        .map(|(t, m)| Violation {
            t: *t,
            quantity: gap(m),
            threshold: 0.0,
        })
        .collect();
    Ok(CheckReport::from_violations(
        format!("{mode:?}_{vertex}").to_lowercase(),
        details,
    ))
}

/// `|m(t,i) − m(t,j)| ≤ tol` at every snapshot.
pub fn check_pair_equal(traj: &Trajectory, i: usize, j: usize, tol: f64) -> Result<CheckReport> {
    require_nonempty(traj)?;
    let details = traj
        .times
        .iter()
        .zip(&traj.measures)
        .filter_map(|(t, m)| {
            let d = (m[i] - m[j]).abs();
            (d > tol).then_some(Violation {
                t: *t,
                quantity: d,
                threshold: tol,
            })
        })
        .collect();
    Ok(CheckReport::from_violations(
        format!("equal_pair_{i}_{j}"),
        details,
    ))
}

/// Total mass stays within [`VOLUME_TOL`] of its initial value.
pub fn check_volume(traj: &Trajectory) -> Result<CheckReport> {
    require_nonempty(traj)?;
    if !traj.config.normalized {
        return Err(Error::Contract(
            "volume conservation only holds for the normalized flow".into(),
        ));
    }
    let v0 = traj.measures[0].volume();
    let details = traj
        .times
        .iter()
        .zip(traj.volume_series())
        .filter_map(|(t, v)| {
            let d = (v - v0).abs();
            (d > VOLUME_TOL).then_some(Violation {
                t: *t,
                quantity: d,
                threshold: VOLUME_TOL,
            })
        })
        .collect();
    Ok(CheckReport::from_violations("volume", details))
}

/// Rays of equal curvature on the triangle: `5:5:2`, `3:3:4` and constant.
pub fn c3_normalized_fixed_points() -> Vec<[f64; 3]> {
    vec![[5.0, 5.0, 2.0], [3.0, 3.0, 4.0], [1.0, 1.0, 1.0]]
}

/// `max_{i,j} |Ric(i) − Ric(j)|` on the triangle.
pub fn c3_residual(m: &[f64]) -> Result<f64> {
    let r = [ric_c3(m, 0)?, ric_c3(m, 1)?, ric_c3(m, 2)?];
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi - lo)
}

/// Rescale a triangle measure onto the surface `Σ 1/m(i) = 1`.
pub fn scale_to_constraint(ray: [f64; 3]) -> [f64; 3] {
    let s: f64 = ray.iter().map(|v| 1.0 / v).sum();
    ray.map(|v| v * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseSample {
    Field {
        a: f64,
        b: f64,
        c: f64,
        da: f64,
        db: f64,
    },
    /// `1/a + 1/b ≥ 1` leaves no positive third weight.
    Infeasible { a: f64, b: f64 },
}

impl PhaseSample {
    pub fn norm(&self) -> Option<f64> {
        match *self {
            PhaseSample::Field { da, db, .. } => Some(da.hypot(db)),
            PhaseSample::Infeasible { .. } => None,
        }
    }
}

/// `steps × steps` grid over `[min, max]²`.
pub fn square_grid(min: f64, max: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    if steps < 2 || !(min < max) {
        return Err(Error::InvalidParameter(format!(
            "grid needs min < max and at least 2 steps, got [{min}, {max}] x {steps}"
        )));
    }
    let h = (max - min) / (steps - 1) as f64;
    let axis: Vec<f64> = (0..steps).map(|i| min + i as f64 * h).collect();
    Ok(axis
        .iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .collect())
}

/// Normalized-flow velocity of `m(0), m(1)` on the triangle, with `m(2)`
/// solved from `Σ 1/m(i) = 1`. The raw field is reported without
/// projection onto the constraint surface.
pub fn phase_field_c3(grid: &[(f64, f64)]) -> Result<Vec<PhaseSample>> {
    let graph = generate(Family::Cycle(3))?;
    let cfg = FlowConfig::default().normalized(true);
    grid.iter()
        .map(|&(a, b)| {
            let rest = 1.0 - 1.0 / a - 1.0 / b;
            if !(a > 0.0 && b > 0.0 && rest > 0.0) {
                return Ok(PhaseSample::Infeasible { a, b });
            }
            let c = 1.0 / rest;
            let m = VertexMeasure::new(vec![a, b, c])?;
            let v = rhs(&graph, &m, &cfg)?;
            Ok(PhaseSample::Field {
                a,
                b,
                c,
                da: v[0],
                db: v[1],
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    T3,
    C3,
    C4,
    Ck,
    Normalized,
    All,
}

fn run(family: Family, m0: &[f64], cfg: &FlowConfig) -> Result<Trajectory> {
    let graph = generate(family)?;
    integrate(&graph, &VertexMeasure::for_graph(&graph, m0.to_vec())?, cfg)
}

fn blowup_report(family: BlowupFamily, m0: &[f64]) -> Result<CheckReport> {
    let traj = run(family.graph_family(), m0, &FlowConfig::with_t_max(1000.0))?;
    let bound = blowup_bound(family, m0)?;
    let name = format!("{family:?}_blowup_within_bound{m0:?}").to_lowercase();
    Ok(match traj.outcome {
        FlowOutcome::BlownUp { .. } => {
            let t_hat = estimate_blowup_time(&traj)?;
            CheckReport::at_most(name, t_hat, t_hat, bound * 1.01)
        }
        _ => CheckReport::at_most(name, traj.final_time(), f64::INFINITY, bound * 1.01),
    })
}

fn drift(cfg: &FlowConfig, m0: &[f64]) -> f64 {
    10.0 * cfg.rtol * m0.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn renamed(mut r: CheckReport, name: &str) -> CheckReport {
    r.name = name.to_string();
    r
}

/// Run one verification suite.
pub fn run_suite(suite: Suite) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;

    if all || suite == Suite::T3 {
        out.push(blowup_report(BlowupFamily::T3, &[4.0; 10])?);
    }

    if all || suite == Suite::C3 {
        let cfg = FlowConfig::with_t_max(1000.0);
        out.push(blowup_report(BlowupFamily::C3, &[2.0, 3.0, 4.0])?);
        let traj = run(Family::Cycle(3), &[2.0, 3.0, 4.0], &cfg)?;
        out.push(renamed(
            check_extrema_monotone(&traj, Monotone::MaxStrictlyDecreasing, 0.0)?,
            "c3_max_strictly_decreasing",
        ));
        out.push(renamed(
            check_order_preserved(&traj, 0, Extreme::StrictMin)?,
            "c3_strict_min_preserved",
        ));
        let traj = run(Family::Cycle(3), &[4.0, 3.0, 2.0], &cfg)?;
        out.push(renamed(
            check_order_preserved(&traj, 0, Extreme::StrictMax)?,
            "c3_strict_max_preserved",
        ));
        let m0 = [3.0, 3.0, 1.0];
        let traj = run(Family::Cycle(3), &m0, &cfg)?;
        out.push(renamed(
            check_pair_equal(&traj, 0, 1, drift(&cfg, &m0))?,
            "c3_equal_pair_preserved",
        ));
    }

    if all || suite == Suite::C4 {
        out.push(blowup_report(BlowupFamily::C4, &[2.0, 3.0, 4.0, 6.0])?);
        let traj = run(
            Family::Cycle(4),
            &[2.0, 3.0, 4.0, 6.0],
            &FlowConfig::with_t_max(1000.0),
        )?;
        let migrated = traj.measures.iter().any(|m| m[0] > m.min());
        out.push(CheckReport::from_violations(
            "c4_initial_argmin_migrates",
            if migrated {
                Vec::new()
            } else {
                vec![Violation {
                    t: traj.final_time(),
                    quantity: 0.0,
                    threshold: 0.0,
                }]
            },
        ));
    }

    if all || suite == Suite::Ck {
        let m0 = [2.0, 1.0 / 3.0, 3.0, 1.0, 2.5];
        let cfg = FlowConfig::with_t_max(100.0);
        let traj = run(Family::Cycle(5), &m0, &cfg)?;
        let tol = drift(&cfg, &m0);
        out.push(renamed(
            check_extrema_monotone(&traj, Monotone::MaxNonIncreasing, tol)?,
            "c5_max_non_increasing",
        ));
        out.push(renamed(
            check_extrema_monotone(&traj, Monotone::MinNonDecreasing, tol)?,
            "c5_min_non_decreasing",
        ));
        let lo = m0.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = m0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(renamed(
            check_within(&traj, lo, hi, tol)?,
            "c5_within_initial_range",
        ));
        let converged = matches!(traj.outcome, FlowOutcome::Converged { .. });
        let last = traj.last_measure();
        out.push(CheckReport::at_most(
            "c5_converges_to_constant",
            traj.final_time(),
            if converged {
                last.max() - last.min()
            } else {
                f64::INFINITY
            },
            1e-4,
        ));
    }

    if all || suite == Suite::Normalized {
        let cfg = FlowConfig::with_t_max(50.0).normalized(true);
        let traj = run(Family::Cycle(3), &[1.9, 2.0, 2.1], &cfg)?;
        out.push(renamed(check_volume(&traj)?, "c3_normalized_volume"));
        let traj = run(Family::Cycle(4), &[2.0, 3.0, 4.0, 5.0], &cfg)?;
        out.push(renamed(check_volume(&traj)?, "c4_normalized_volume"));

        let graph = generate(Family::Cycle(3))?;
        for ray in c3_normalized_fixed_points() {
            let m = VertexMeasure::new(scale_to_constraint(ray).to_vec())?;
            let v = rhs(&graph, &m, &cfg)?;
            let norm = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            out.push(CheckReport::at_most(
                format!("c3_fixed_point_{}_{}_{}", ray[0], ray[1], ray[2]),
                0.0,
                norm,
                1e-10,
            ));
        }
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_traj(n: usize, len: usize, normalized: bool) -> Trajectory {
        Trajectory {
            times: (0..len).map(|i| i as f64).collect(),
            measures: vec![VertexMeasure::uniform(n, 2.0).unwrap(); len],
            curvatures: vec![vec![0.0; n]; len],
            outcome: FlowOutcome::ReachedTMax,
            config: FlowConfig::default().normalized(normalized),
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(blowup_bound(BlowupFamily::T3, &[4.0; 10]).unwrap(), 8.0);
        assert_eq!(
            blowup_bound(BlowupFamily::C3, &[2.0, 3.0, 4.0]).unwrap(),
            16.0
        );
        assert_eq!(
            blowup_bound(BlowupFamily::C4, &[2.0, 3.0, 4.0, 6.0]).unwrap(),
            9.0
        );
        assert!(blowup_bound(BlowupFamily::C4, &[2.0, 3.0, 4.0]).is_err());
        let mut m = [9.0; 10];
        m[7] = 3.0;
        m[0] = 1.0;
        assert_eq!(blowup_bound(BlowupFamily::T3, &m).unwrap(), 4.5);
    }

    #[test]
    fn constant_trajectory_passes_everything() {
        let t = constant_traj(3, 5, false);
        for e in [Monotone::MaxNonIncreasing, Monotone::MinNonDecreasing] {
            let r = check_extrema_monotone(&t, e, 0.0).unwrap();
            assert!(r.passed && r.details.is_empty());
        }
        // A constant maximum is not strictly decreasing.
        assert!(
            !check_extrema_monotone(&t, Monotone::MaxStrictlyDecreasing, 0.0)
                .unwrap()
                .passed
        );
        assert!(check_pair_equal(&t, 0, 2, 0.0).unwrap().passed);
    }

    #[test]
    fn volume_check_needs_normalized_run() {
        assert!(matches!(
            check_volume(&constant_traj(3, 3, false)),
            Err(Error::Contract(_))
        ));
        assert!(check_volume(&constant_traj(3, 3, true)).unwrap().passed);
    }

    #[test]
    fn order_check_requires_initial_extremum() {
        let t = constant_traj(3, 2, false);
        assert!(check_order_preserved(&t, 0, Extreme::StrictMax).is_err());
    }

    #[test]
    fn fixed_point_residuals() {
        assert!(c3_residual(&[5.0, 5.0, 2.0]).unwrap() < 1e-12);
        assert!(c3_residual(&[3.0, 3.0, 4.0]).unwrap() < 1e-12);
        assert_eq!(c3_residual(&[1.7, 1.7, 1.7]).unwrap(), 0.0);
        assert!((c3_residual(&[2.0, 3.0, 4.0]).unwrap() - 0.09576824505348236).abs() < 1e-14);
    }

    #[test]
    fn constraint_scaling() {
        let s = scale_to_constraint([5.0, 5.0, 2.0]);
        for (a, b) in s.iter().zip([4.5, 4.5, 1.8]) {
            assert!((a - b).abs() < 1e-14);
        }
        let s = scale_to_constraint([3.0, 3.0, 4.0]);
        for (a, b) in s.iter().zip([2.75, 2.75, 11.0 / 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn phase_field_points() {
        let samples =
            phase_field_c3(&[(3.0, 3.0), (4.5, 4.5), (2.75, 2.75), (1.5, 2.0), (2.7, 2.7)])
                .unwrap();
        assert!(samples[0].norm().unwrap() < 1e-12);
        match samples[0] {
            PhaseSample::Field { c, .. } => assert!((c - 3.0).abs() < 1e-14),
            _ => unreachable!(),
        }
        assert!(samples[1].norm().unwrap() < 1e-10);
        assert!(samples[2].norm().unwrap() < 1e-10);
        assert_eq!(samples[3], PhaseSample::Infeasible { a: 1.5, b: 2.0 });
        // 0.9·(3,3,4) is not on the constraint surface's fixed ray.
        assert!(samples[4].norm().unwrap() > 1e-3);
    }

    #[test]
    fn grid_shape() {
        let g = square_grid(1.0, 2.0, 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[4], (1.5, 1.5));
        assert!(square_grid(1.0, 1.0, 3).is_err());
    }
}
