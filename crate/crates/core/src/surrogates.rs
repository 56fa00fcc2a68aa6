//! Scalar surrogates `v: I -> [0, inf)` built from a multi-variate series.
//!
//! * distance to the start point,
//! * distance of the delay-embedded series to its start point,
//! * diagonal averages of the recurrence function `w(t1, t2) = |x(t1) - x(t2)|`,
//!   indexed by lag.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{check_p, distance, p_norm_unchecked, ScalarSeries, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayParams {
    pub embed_dim: usize,
    /// Delay in seconds.
    pub delay: f64,
    /// Norm exponent for the embedded distance; `f64::INFINITY` is allowed.
    #[serde(default = "default_norm_p", with = "norm_p_serde")]
    pub norm_p: f64,
}

fn default_norm_p() -> f64 {
    2.0
}

impl DelayParams {
    pub fn new(embed_dim: usize, delay: f64) -> Self {
        Self {
            embed_dim,
            delay,
            norm_p: 2.0,
        }
    }

    /// `f64::INFINITY` selects the max norm. The `2 sqrt(d) eta` stability
    /// bound holds for `norm_p >= 2`.
    pub fn with_norm(mut self, norm_p: f64) -> Self {
        self.norm_p = norm_p;
        self
    }

    /// Checks the parameters against a series spanning `span` seconds.
    pub fn validate(&self, span: f64) -> Result<()> {
        if self.embed_dim == 0 {
            return Err(Error::param("embedding dimension must be at least 1"));
        }
        if !(self.delay > 0.0 && self.delay.is_finite()) {
            return Err(Error::param(format!(
                "delay must be positive, got {}",
                self.delay
            )));
        }
        check_p(self.norm_p)?;
        let reach = (self.embed_dim - 1) as f64 * self.delay;
        if !(reach < span) {
            return Err(Error::param(format!(
                "(embed_dim - 1) * delay = {reach} must be smaller than the series span {span}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    /// Average of `|x(t) - x(t + lag)|`, O(n^2).
    #[default]
    ExactDistance,
    /// Average of `|x(t) - x(t + lag)|^2` via prefix sums and an FFT autocorrelation.
    SquaredFast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct RecurrenceMatrixMode {
    pub kind: DistanceKind,
    /// Resample to this many uniform points before averaging.
    pub resample_n: Option<usize>,
}

impl RecurrenceMatrixMode {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn squared_fast() -> Self {
        Self {
            kind: DistanceKind::SquaredFast,
            resample_n: None,
        }
    }

    pub fn with_resample(mut self, n: usize) -> Self {
        self.resample_n = Some(n);
        self
    }
}

/// `v(t_j) = |x(t_j) - x(t_1)|_2`.
pub fn method1_surrogate(x: &TimeSeries) -> ScalarSeries {
    let origin = x.row(0);
    let values = x.rows().map(|row| distance(row, origin)).collect();
    ScalarSeries::new(x.timestamps().to_vec(), values)
        .expect("distances of a valid series form a valid surrogate")
}

/// Delay embedding `U(t) = (x(t), x(t + delay), ..., x(t + (d-1) delay))`.
///
/// The domain is truncated on the right to the samples with
/// `t_j + (d-1) delay <= t_n`; off-grid values are linearly interpolated.
pub fn delay_embed(x: &TimeSeries, params: &DelayParams) -> Result<TimeSeries> {
    params.validate(x.span())?;
    let d = params.embed_dim;
    if d == 1 {
        return Ok(x.clone());
    }
    let m = x.dim();
    let reach = (d - 1) as f64 * params.delay;
    // absorb rounding in t_j + reach for grid-aligned delays
    let slack = 1e-9 * x.mean_spacing();
    let count = x
        .timestamps()
        .partition_point(|&t| t + reach <= x.end() + slack);
    if count == 0 {
        return Err(Error::param("delay embedding leaves an empty domain"));
    }

    let mut values = vec![0.0; count * m * d];
    for (j, out) in values.chunks_exact_mut(m * d).enumerate() {
        let t = x.timestamps()[j];
        out[..m].copy_from_slice(x.row(j));
        for i in 1..d {
            let target = (t + i as f64 * params.delay).min(x.end());
            x.interpolate_into(target, &mut out[i * m..(i + 1) * m])?;
        }
    }
    TimeSeries::new(x.timestamps()[..count].to_vec(), values, m * d)
}

/// `v(t) = |U(t) - U(t_1)|_p` over the truncated embedding domain.
pub fn method2_surrogate(x: &TimeSeries, params: &DelayParams) -> Result<ScalarSeries> {
    let embedded = delay_embed(x, params)?;
    let origin = embedded.row(0);
    let values = embedded
        .rows()
        .map(|row| p_norm_unchecked(row.iter().zip(origin).map(|(a, b)| a - b), params.norm_p))
        .collect();
    ScalarSeries::new(embedded.timestamps().to_vec(), values)
}

/// Diagonal averages of the recurrence function, indexed by lag `k * h`.
///
/// The value at lag `k` averages over the `n - k` pairs `(t_j, t_{j+k})` of a
/// uniform grid with spacing `h`. Non-uniform input is resampled first; for
/// [`DistanceKind::SquaredFast`] this must be requested explicitly through
/// `resample_n`.
pub fn method3_surrogate(x: &TimeSeries, mode: &RecurrenceMatrixMode) -> Result<ScalarSeries> {
    let resampled;
    let grid = match (mode.resample_n, mode.kind) {
        (Some(n), _) => {
            resampled = x.resample_uniform(n)?;
            &resampled
        }
        (None, _) if x.is_uniform() => x,
        (None, DistanceKind::ExactDistance) => {
            resampled = x.resample_uniform(x.len())?;
            &resampled
        }
        (None, DistanceKind::SquaredFast) => {
            return Err(Error::param(
                "squared_fast needs uniform sampling; set resample_n for non-uniform input",
            ))
        }
    };

    let values = match mode.kind {
        DistanceKind::ExactDistance => lag_average_exact(grid),
        DistanceKind::SquaredFast => lag_average_squared_fast(grid),
    };
    let h = grid.mean_spacing();
    let lags = (0..grid.len()).map(|k| k as f64 * h).collect();
    ScalarSeries::new(lags, values)
}

fn lag_average_exact(x: &TimeSeries) -> Vec<f64> {
    let n = x.len();
    let lag_mean = |k: usize| -> f64 {
        if k == 0 {
            return 0.0;
        }
        let sum: f64 = (0..n - k).map(|j| distance(x.row(j), x.row(j + k))).sum();
        sum / (n - k) as f64
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(lag_mean).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(lag_mean).collect()
    }
}

/// `sum_j |y_j - y_{j+k}|^2 = sum_{j<n-k} |y_j|^2 + sum_{j>=k} |y_j|^2 - 2 r(k)`
/// with `r` the autocorrelation; `y` is the series minus its mean.
fn lag_average_squared_fast(x: &TimeSeries) -> Vec<f64> {
    let n = x.len();
    let m = x.dim();
    let mean: Vec<f64> = (0..m)
        .map(|c| x.rows().map(|row| row[c]).sum::<f64>() / n as f64)
        .collect();

    let mut prefix = vec![0.0; n + 1];
    for (j, row) in x.rows().enumerate() {
        let sq: f64 = row
            .iter()
            .zip(&mean)
            .map(|(v, mu)| (v - mu) * (v - mu))
            .sum();
        prefix[j + 1] = prefix[j] + sq;
    }

    let corr = autocorrelation(x, &mean);
    let total = prefix[n];
    (0..n)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let s = prefix[n - k] + (total - prefix[k]) - 2.0 * corr[k];
            (s / (n - k) as f64).max(0.0)
        })
        .collect()
}

/// `r(k) = sum_c sum_j y_c(j) y_c(j + k)` for `k < n`, via zero-padded FFTs.
fn autocorrelation(x: &TimeSeries, mean: &[f64]) -> Vec<f64> {
    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let mut acc = vec![0.0; n];
    let mut buf = vec![Complex::new(0.0, 0.0); size];
    for c in 0..x.dim() {
        buf.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
        for (j, row) in x.rows().enumerate() {
            buf[j].re = row[c] - mean[c];
        }
        forward.process(&mut buf);
        buf.iter_mut()
            .for_each(|z| *z = Complex::new(z.norm_sqr(), 0.0));
        inverse.process(&mut buf);
        for (a, z) in acc.iter_mut().zip(&buf) {
            *a += z.re / size as f64;
        }
    }
    acc
}

mod norm_p_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(p) => Ok(p),
            Repr::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "invalid norm exponent {t:?}"
            ))),
        }
    }
}
