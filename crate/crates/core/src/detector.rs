//! Recurrence times `T_0 < ... < T_k` from the persistence diagram of a surrogate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{
    check_thresholds, significant_points, sublevel_persistence, PersistenceDiagram,
};
use crate::series::{ScalarSeries, TimeSeries};
use crate::surrogates::{
    method1_surrogate, method2_surrogate, method3_surrogate, DelayParams, RecurrenceMatrixMode,
};

/// Surrogate construction together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum MethodParams {
    /// Method 1: distance to the start point.
    Distance,
    /// Method 2: distance of the delay embedding to its start point.
    DelayEmbedding(DelayParams),
    /// Method 3: lag averages of the recurrence function.
    RecurrenceAverage(RecurrenceMatrixMode),
}

impl MethodParams {
    pub fn number(&self) -> u8 {
        match self {
            MethodParams::Distance => 1,
            MethodParams::DelayEmbedding(_) => 2,
            MethodParams::RecurrenceAverage(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub epsilon: f64,
    pub delta: f64,
    pub method: MethodParams,
}

impl DetectionParams {
    pub fn new(method: MethodParams, epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            method,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceResult {
    pub recurrence_times: Vec<f64>,
    pub cycle_lengths: Vec<f64>,
    pub epsilon: f64,
    pub delta: f64,
    /// `None` when the surrogate was supplied directly.
    pub method: Option<MethodParams>,
    pub diagram: PersistenceDiagram,
    /// Every significant lag (method 3 only); the smallest one is the period.
    pub candidate_lags: Vec<f64>,
    pub warnings: Vec<String>,
}

impl RecurrenceResult {
    fn from_times(
        times: Vec<f64>,
        epsilon: f64,
        delta: f64,
        diagram: PersistenceDiagram,
        warnings: Vec<String>,
    ) -> Self {
        let cycle_lengths = times.windows(2).map(|w| w[1] - w[0]).collect();
        Self {
            recurrence_times: times,
            cycle_lengths,
            epsilon,
            delta,
            method: None,
            diagram,
            candidate_lags: Vec::new(),
            warnings,
        }
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_lengths.len()
    }
}

/// Recurrence times from a start-distance surrogate (methods 1 and 2).
///
/// Significant minima are mapped to their timestamps, framed by the start of
/// the surrogate and `full_span_end`, and merged when closer than one mean
/// sample spacing (the frame wins). A last minimum followed by no excursion
/// of more than `delta` is merged into the frame end as well.
pub fn detect_from_surrogate(
    v: &ScalarSeries,
    epsilon: f64,
    delta: f64,
    full_span_end: f64,
) -> Result<RecurrenceResult> {
    check_thresholds(epsilon, delta)?;
    if !(full_span_end >= v.end()) {
        return Err(Error::param(format!(
            "span end {full_span_end} precedes the end of the surrogate {}",
            v.end()
        )));
    }
    let diagram = sublevel_persistence(v.values())?;
    if diagram.finite().next().is_none() {
        return Err(Error::NoRecurrence(
            "the surrogate has a single minimum".into(),
        ));
    }

    let spacing = v.mean_spacing();
    let start = v.start();
    let mut times = vec![start];
    let mut last_backed = false;
    for p in significant_points(&diagram, epsilon, delta)? {
        let t = v.timestamps()[p.min_index];
        if full_span_end - t < spacing {
            last_backed = true;
            continue;
        }
        if t - times[times.len() - 1] >= spacing {
            times.push(t);
        }
    }
    if full_span_end - start < spacing {
        return Err(Error::NoRecurrence(
            "the domain is shorter than one sample".into(),
        ));
    }
    // a trailing minimum whose remaining stretch never climbs delta above it
    // cannot open another cycle; the frame end stands in for it
    while times.len() > 1 {
        let t_last = times[times.len() - 1];
        let j = v.timestamps().partition_point(|&s| s < t_last);
        let base = v.values()[j];
        let peak = v.values()[j..].iter().fold(base, |a, &b| a.max(b));
        if peak > delta + base {
            break;
        }
        times.pop();
        last_backed = true;
    }
    times.push(full_span_end);

    let mut warnings = Vec::new();
    if !last_backed {
        warnings.push(format!(
            "no significant minimum near the end of the series; the last cycle [{}, {full_span_end}] may be incomplete",
            times[times.len() - 2]
        ));
    }
    Ok(RecurrenceResult::from_times(
        times, epsilon, delta, diagram, warnings,
    ))
}

/// Lags with fewer averaged pairs than this are ignored as minima.
pub fn min_lag_pairs(n: usize) -> usize {
    (n / 100).max(8)
}

/// Recurrence times from a lag-indexed surrogate (method 3).
///
/// The smallest significant lag `p` is taken as the period and the times are
/// `start + i p`; the final multiple is snapped to `end` unless the remainder
/// exceeds `p / 2`, in which case `end` is appended.
pub fn detect_method3(
    v_lag: &ScalarSeries,
    epsilon: f64,
    delta: f64,
    start: f64,
    end: f64,
) -> Result<RecurrenceResult> {
    check_thresholds(epsilon, delta)?;
    if !(end > start) {
        return Err(Error::param(format!("empty domain [{start}, {end}]")));
    }
    let n = v_lag.len();
    let min_pairs = min_lag_pairs(n);
    let diagram = sublevel_persistence(v_lag.values())?;
    let lags: Vec<f64> = significant_points(&diagram, epsilon, delta)?
        .into_iter()
        .filter(|p| p.min_index > 0 && n - p.min_index >= min_pairs)
        .map(|p| v_lag.timestamps()[p.min_index])
        .collect();
    let Some(&period) = lags.first() else {
        return Err(Error::NoRecurrence("no significant lag".into()));
    };

    let span = end - start;
    let whole = (span / period).floor() as usize;
    let mut times: Vec<f64> = (0..=whole).map(|i| start + i as f64 * period).collect();
    let mut warnings = Vec::new();
    let remainder = span - whole as f64 * period;
    if whole == 0 || remainder > period / 2.0 {
        times.push(end);
        if whole > 0 {
            warnings.push(format!(
                "span is not a whole multiple of the period {period}; last cycle is partial"
            ));
        }
    } else {
        *times.last_mut().expect("at least one multiple") = end;
    }
    if lags.len() > 1 {
        warnings.push(format!(
            "{} further significant lags reported as candidates only",
            lags.len() - 1
        ));
    }

    let mut result = RecurrenceResult::from_times(times, epsilon, delta, diagram, warnings);
    result.candidate_lags = lags;
    Ok(result)
}

/// The surrogate a method builds for `x`.
pub fn surrogate(x: &TimeSeries, method: &MethodParams) -> Result<ScalarSeries> {
    match method {
        MethodParams::Distance => Ok(method1_surrogate(x)),
        MethodParams::DelayEmbedding(p) => method2_surrogate(x, p),
        MethodParams::RecurrenceAverage(mode) => method3_surrogate(x, mode),
    }
}

/// Full pipeline: surrogate, sublevel persistence, significant minima, times.
pub fn detect(x: &TimeSeries, params: &DetectionParams) -> Result<RecurrenceResult> {
    check_thresholds(params.epsilon, params.delta)?;
    let v = surrogate(x, &params.method)?;
    let mut result = match params.method {
        MethodParams::Distance | MethodParams::DelayEmbedding(_) => {
            detect_from_surrogate(&v, params.epsilon, params.delta, x.end())?
        }
        MethodParams::RecurrenceAverage(mode) => {
            let mut r = detect_method3(&v, params.epsilon, params.delta, x.start(), x.end())?;
            if mode.resample_n.is_some() || !x.is_uniform() {
                r.warnings
                    .push(format!("input resampled to {} uniform samples", v.len()));
            }
            r
        }
    };
    result.method = Some(params.method);
    Ok(result)
}
