//! Sampled time-series containers and the small amount of numerics shared by
//! every surrogate: norms, piecewise-linear interpolation and resampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance, relative to the span, for deciding whether a grid is uniform.
pub const UNIFORM_TOLERANCE: f64 = 1e-9;

/// A multi-variate series `x(t_1), ..., x(t_n)` with `n >= 2` samples in `R^m`.
///
/// Values are stored row-major: row `j` occupies `values[j*m .. (j+1)*m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
}

impl TimeSeries {
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("series dimension must be at least 1"));
        }
        check_timestamps(&timestamps)?;
        if values.len() != timestamps.len() * dim {
            return Err(Error::input(format!(
                "expected {} values for {} rows of dimension {dim}, got {}",
                timestamps.len() * dim,
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite value in row {}",
                pos / dim
            )));
        }
        Ok(Self {
            timestamps,
            values,
            dim,
        })
    }

    /// Builds a series from one `Vec` per row; every row must have the same length.
    pub fn from_rows(timestamps: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(j) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::input(format!(
                "row {j} has {} coordinates, expected {dim}",
                rows[j].len()
            )));
        }
        Self::new(timestamps, rows.concat(), dim)
    }

    /// Samples `f` at `n` equally spaced times on `[start, end]`.
    pub fn sample_uniform(
        start: f64,
        end: f64,
        n: usize,
        f: impl Fn(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let timestamps = uniform_grid(start, end, n)?;
        let rows: Vec<Vec<f64>> = timestamps.iter().map(|&t| f(t)).collect();
        Self::from_rows(timestamps, &rows)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn start(&self) -> f64 {
        self.timestamps[0]
    }

    pub fn end(&self) -> f64 {
        self.timestamps[self.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn mean_spacing(&self) -> f64 {
        self.span() / (self.len() - 1) as f64
    }

    pub fn is_uniform(&self) -> bool {
        is_uniform_grid(&self.timestamps)
    }

    /// Adds `offset` to every row.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::input("offset dimension does not match the series"));
        }
        let values = self
            .rows()
            .flat_map(|row| row.iter().zip(offset).map(|(a, b)| a + b))
            .collect();
        Self::new(self.timestamps.clone(), values, self.dim)
    }

    /// Piecewise-linear interpolation of every coordinate at time `t`.
    pub fn interpolate_at(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.interpolate_into(t, &mut out)?;
        Ok(out)
    }

    pub(crate) fn interpolate_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(Error::OutOfDomain {
                t,
                start: self.start(),
                end: self.end(),
            });
        }
        // first index with timestamp > t
        let upper = self.timestamps.partition_point(|&s| s <= t);
        let lo = upper - 1;
        if self.timestamps[lo] == t || upper == self.len() {
            out.copy_from_slice(self.row(lo));
            return Ok(());
        }
        let (t0, t1) = (self.timestamps[lo], self.timestamps[upper]);
        let w = (t - t0) / (t1 - t0);
        for ((o, a), b) in out.iter_mut().zip(self.row(lo)).zip(self.row(upper)) {
            *o = a + w * (b - a);
        }
        Ok(())
    }

    /// Resamples onto `n_out` equally spaced timestamps spanning the same domain.
    pub fn resample_uniform(&self, n_out: usize) -> Result<Self> {
        let timestamps = uniform_grid(self.start(), self.end(), n_out)?;
        let mut values = vec![0.0; n_out * self.dim];
        for (t, out) in timestamps.iter().zip(values.chunks_exact_mut(self.dim)) {
            self.interpolate_into(*t, out)?;
        }
        Self::new(timestamps, values, self.dim)
    }
}

/// A scalar surrogate `v: I -> [0, inf)` at sample resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
}

impl ScalarSeries {
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_timestamps(&timestamps)?;
        if values.len() != timestamps.len() {
            return Err(Error::input(format!(
                "{} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::input(format!(
                "surrogate value at sample {j} is negative or non-finite"
            )));
        }
        Ok(Self { timestamps, values })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.timestamps[0]
    }

    pub fn end(&self) -> f64 {
        self.timestamps[self.len() - 1]
    }

    pub fn mean_spacing(&self) -> f64 {
        (self.end() - self.start()) / (self.len() - 1) as f64
    }
}

fn check_timestamps(timestamps: &[f64]) -> Result<()> {
    if timestamps.len() < 2 {
        return Err(Error::input(format!(
            "a series needs at least 2 samples, got {}",
            timestamps.len()
        )));
    }
    if let Some(j) = timestamps.iter().position(|t| !t.is_finite()) {
        return Err(Error::input(format!("non-finite timestamp at sample {j}")));
    }
    if let Some(j) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::input(format!(
            "timestamps must be strictly increasing (samples {j} and {})",
            j + 1
        )));
    }
    Ok(())
}

pub(crate) fn uniform_grid(start: f64, end: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::param(format!(
            "need at least 2 output samples, got {n}"
        )));
    }
    let step = (end - start) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|j| start + j as f64 * step).collect();
    grid[n - 1] = end;
    Ok(grid)
}

pub(crate) fn is_uniform_grid(timestamps: &[f64]) -> bool {
    let n = timestamps.len();
    if n < 3 {
        return true;
    }
    let span = timestamps[n - 1] - timestamps[0];
    let h = span / (n - 1) as f64;
    timestamps
        .iter()
        .enumerate()
        .all(|(j, &t)| (t - (timestamps[0] + j as f64 * h)).abs() <= UNIFORM_TOLERANCE * span)
}

pub fn euclidean_norm(row: &[f64]) -> Result<f64> {
    p_norm(row, 2.0)
}

/// The p-norm of `row` for `p >= 1`; `p = f64::INFINITY` gives the max norm.
pub fn p_norm(row: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if row.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("norm of a vector with non-finite entries"));
    }
    Ok(p_norm_unchecked(row.iter().copied(), p))
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("norm exponent must be >= 1, got {p}")))
    }
}

pub(crate) fn p_norm_unchecked(entries: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 2.0 {
        entries.map(|v| v * v).sum::<f64>().sqrt()
    } else if p == 1.0 {
        entries.map(f64::abs).sum()
    } else if p.is_infinite() {
        entries.fold(0.0, |acc, v| acc.max(v.abs()))
    } else {
        // scale by the max magnitude so large p cannot overflow
        let entries: Vec<f64> = entries.collect();
        let scale = entries.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        scale
            * entries
                .iter()
                .map(|v| (v.abs() / scale).powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
    }
}

/// Euclidean distance between two rows of equal length.
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean_norm(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean_norm(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((euclidean_norm(&[1.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            euclidean_norm(&[f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn p_norm_examples() {
        assert_eq!(p_norm(&[1.0, -1.0], 1.0).unwrap(), 2.0);
        assert_eq!(p_norm(&[1.0, -1.0], f64::INFINITY).unwrap(), 1.0);
        assert_eq!(p_norm(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert!((p_norm(&[3.0, 4.0], 3.0).unwrap() - 91f64.cbrt()).abs() < 1e-12);
        assert!(matches!(
            p_norm(&[1.0], 0.5),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            p_norm(&[1.0], f64::NAN),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(TimeSeries::new(vec![0.0], vec![1.0], 1).is_err());
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![1.0, 2.0], 1).is_err());
        assert!(TimeSeries::new(vec![1.0, 0.0], vec![1.0, 2.0], 1).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, f64::INFINITY], 1).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(TimeSeries::from_rows(vec![0.0, 1.0], &[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(ScalarSeries::new(vec![0.0, 1.0], vec![0.0, -1.0]).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let x = TimeSeries::new(vec![0.0, 1.0], vec![0.0, 2.0], 1).unwrap();
        assert_eq!(x.interpolate_at(0.5).unwrap(), vec![1.0]);
        let y = TimeSeries::new(vec![0.0, 2.0], vec![0.0, 0.0, 4.0, -2.0], 2).unwrap();
        assert_eq!(y.interpolate_at(0.5).unwrap(), vec![1.0, -0.5]);
        assert!(matches!(
            y.interpolate_at(2.5),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(y.interpolate_at(-1e-12).is_err());
    }

    #[test]
    fn resample_arithmetic_grid() {
        let x = TimeSeries::new(vec![0.0, 1.0, 4.0], vec![0.0, 1.0, 4.0], 1).unwrap();
        let r = x.resample_uniform(5).unwrap();
        assert_eq!(r.timestamps(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.values(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(r.is_uniform());
        assert!(!x.is_uniform());
        assert!(x.resample_uniform(1).is_err());
    }

    fn series_strategy() -> impl Strategy<Value = TimeSeries> {
        (2usize..40, 1usize..4).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(0.01f64..1.0, n),
                prop::collection::vec(-10.0f64..10.0, n * m),
            )
                .prop_map(move |(gaps, values)| {
                    let mut t = 0.0;
                    let timestamps = gaps
                        .iter()
                        .map(|g| {
                            t += g;
                            t
                        })
                        .collect();
                    TimeSeries::new(timestamps, values, m).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn interpolation_exact_at_knots(x in series_strategy()) {
            for (j, &t) in x.timestamps().iter().enumerate() {
                prop_assert_eq!(x.interpolate_at(t).unwrap(), x.row(j).to_vec());
            }
        }

        #[test]
        fn jittered_resample_is_equispaced(x in series_strategy(), n_out in 2usize..100) {
            let r = x.resample_uniform(n_out).unwrap();
            let h = x.span() / (n_out - 1) as f64;
            for (j, t) in r.timestamps().iter().enumerate() {
                prop_assert!((t - (x.start() + j as f64 * h)).abs() <= 1e-12 * x.span().max(1.0));
            }
            prop_assert_eq!(r.start(), x.start());
            prop_assert_eq!(r.end(), x.end());
        }

        #[test]
        fn resample_idempotent_on_uniform(n in 2usize..200, m in 1usize..4, seed in any::<u64>()) {
            let x = TimeSeries::sample_uniform(0.0, 3.0, n, |t| {
                (0..m).map(|i| (t * (i as f64 + 1.0) + seed as f64 * 1e-9).sin()).collect()
            }).unwrap();
            let r = x.resample_uniform(n).unwrap();
            for (a, b) in r.values().iter().zip(x.values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn p_norm_non_increasing_in_p(v in prop::collection::vec(-100.0f64..100.0, 1..10)) {
            let ps = [1.0, 1.5, 2.0, 3.0, 7.5, 20.0, f64::INFINITY];
            let norms: Vec<f64> = ps.iter().map(|&p| p_norm(&v, p).unwrap()).collect();
            for w in norms.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
            }
        }

        #[test]
        fn euclidean_triangle_inequality(
            a in prop::collection::vec(-100.0f64..100.0, 3),
            b in prop::collection::vec(-100.0f64..100.0, 3),
            c in prop::collection::vec(-100.0f64..100.0, 3),
        ) {
            let d = |x: &[f64], y: &[f64]| {
                let diff: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
                euclidean_norm(&diff).unwrap()
            };
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        }
    }
}
