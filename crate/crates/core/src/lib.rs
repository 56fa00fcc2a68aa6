//! Recurrence-time and cycle-length estimation for multi-variate time series.
//!
//! A series `x: I -> R^m` is reduced to a scalar surrogate `v: I -> [0, inf)`
//! whose significant local minima, measured by zero-dimensional sublevel-set
//! persistence, mark the times at which the trajectory returns to its start.
//!
//! ```
//! use topocycle::{detect, DetectionParams, MethodParams, TimeSeries};
//! use std::f64::consts::PI;
//!
//! let x = TimeSeries::sample_uniform(0.0, 2.0, 201, |t| {
//!     vec![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]
//! })
//! .unwrap();
//! let result = detect(&x, &DetectionParams::new(MethodParams::Distance, 0.1, 0.5)).unwrap();
//! assert_eq!(result.recurrence_times, vec![0.0, 1.0, 2.0]);
//! ```

pub mod detector;
pub mod error;
pub mod eval;
pub mod io;
pub mod persistence;
pub mod series;
pub mod surrogates;
pub mod synthgen;

pub use detector::{
    detect, detect_from_surrogate, detect_method3, surrogate, DetectionParams, MethodParams,
    RecurrenceResult,
};
pub use error::{Error, Result};
pub use persistence::{
    bottleneck_distance, significant_points, sublevel_persistence, MatchingCost,
    PersistenceDiagram, PersistencePoint,
};
pub use series::{euclidean_norm, p_norm, ScalarSeries, TimeSeries};
pub use surrogates::{
    delay_embed, method1_surrogate, method2_surrogate, method3_surrogate, DelayParams,
    DistanceKind, RecurrenceMatrixMode,
};
