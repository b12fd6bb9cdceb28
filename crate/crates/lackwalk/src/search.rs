//! Evolution loop, success-probability traces and first-peak detection.

use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::lattice::{CoinSpec, LatticeGeometry, WalkState};
use crate::operators::{step, MarkedSet};

/// Success probability `p(t)` for `t = 0..=max_steps`, with the run
/// configuration echoed alongside.
#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityTrace {
    pub geometry: LatticeGeometry,
    pub spec: CoinSpec,
    pub marked: MarkedSet,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    PeakFound,
    HorizonReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakResult {
    pub t_peak: usize,
    pub p_peak: f64,
    pub terminated_by: Termination,
}

/// Total probability of finding the walker on a marked vertex, loop
/// component included.
pub fn success_probability(state: &WalkState, marked: &MarkedSet) -> f64 {
    marked
        .vertices()
        .iter()
        .map(|&v| state.vertex_probability(v))
        .sum()
}

/// Evolves the uniform start state for `max_steps` walk steps, recording
/// the success probability at every step including `t = 0`.
pub fn evolve_trace(
    geometry: LatticeGeometry,
    spec: &CoinSpec,
    marked: &MarkedSet,
    max_steps: usize,
) -> Result<ProbabilityTrace> {
    if marked.is_empty() {
        return Err(WalkError::EmptyMarkedSet);
    }
    let mut state = WalkState::uniform(geometry, spec);
    let mut values = Vec::with_capacity(max_steps + 1);
    values.push(success_probability(&state, marked));
    for _ in 0..max_steps {
        step(&mut state, spec, marked)?;
        values.push(success_probability(&state, marked));
    }
    Ok(ProbabilityTrace { geometry, spec: *spec, marked: marked.clone(), values })
}

/// First local maximum whose rise above `p(0)` is at least
/// `min_prominence`: the smallest `t` with `p(t) >= p(t-1)`,
/// `p(t) > p(t+1)` and `p(t) - p(0) >= min_prominence`.  Falls back to
/// the argmax of the trace when no such peak exists.
pub fn find_first_peak(trace: &ProbabilityTrace, min_prominence: f64) -> Result<PeakResult> {
    if !(0.0..1.0).contains(&min_prominence) {
        return Err(WalkError::InvalidProminence(min_prominence));
    }
    let p = &trace.values;
    if p.len() < 3 {
        return Err(WalkError::TraceTooShort(p.len()));
    }
    for t in 1..p.len() - 1 {
        if p[t] >= p[t - 1] && p[t] > p[t + 1] && p[t] - p[0] >= min_prominence {
            return Ok(PeakResult { t_peak: t, p_peak: p[t], terminated_by: Termination::PeakFound });
        }
    }
    let (t, &best) = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    Ok(PeakResult { t_peak: t, p_peak: best, terminated_by: Termination::HorizonReached })
}
