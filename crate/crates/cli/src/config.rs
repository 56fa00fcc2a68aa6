use std::str::FromStr;

use clap::{Args, ValueEnum};
use topocycle::{DelayParams, DetectionParams, MethodParams, RecurrenceMatrixMode, TimeSeries};

use crate::Failure;

/// Embedding delay either in seconds (`0.5s`) or in samples (`500samples`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delay {
    Seconds(f64),
    Samples(f64),
}

impl FromStr for Delay {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (number, unit): (&str, fn(f64) -> Delay) = if let Some(n) = s.strip_suffix("samples") {
            (n, Delay::Samples)
        } else if let Some(n) = s.strip_suffix('s') {
            (n, Delay::Seconds)
        } else {
            return Err(format!("`{s}` needs a unit: e.g. `500samples` or `0.5s`"));
        };
        match number.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(unit(v)),
            _ => Err(format!("`{s}` is not a positive delay")),
        }
    }
}

impl Delay {
    pub fn seconds(self, x: &TimeSeries) -> f64 {
        match self {
            Delay::Seconds(s) => s,
            Delay::Samples(k) => k * x.mean_spacing(),
        }
    }
}

fn parse_norm(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    match s.parse::<f64>() {
        Ok(p) if p >= 1.0 => Ok(p),
        _ => Err(format!("`{s}` is not a norm exponent >= 1 or `inf`")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Averages of Euclidean distances, O(n^2).
    Exact,
    /// Averages of squared distances through cumulative sums and an FFT.
    Fast,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    /// 1: distance to the start; 2: delay embedding; 3: lag-averaged recurrence.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub method: u8,
    /// Return tolerance: minima must lie strictly below it.
    #[arg(long)]
    pub epsilon: f64,
    /// Significance: minima must persist strictly longer than it.
    #[arg(long)]
    pub delta: f64,
    /// Embedding dimension (method 2).
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// Embedding delay, e.g. `500samples` or `0.5s` (method 2).
    #[arg(long)]
    pub delay: Option<Delay>,
    /// Norm exponent of the embedding distance, or `inf` (method 2).
    #[arg(long, value_parser = parse_norm)]
    pub norm_p: Option<f64>,
    /// Lag-average flavour (method 3).
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Resample to this many uniform points first (method 3).
    #[arg(long)]
    pub resample_n: Option<usize>,
}

impl MethodArgs {
    /// Rejects flag combinations that do not fit the chosen method.
    pub fn check(&self) -> Result<(), Failure> {
        let embedding = [
            ("--embed-dim", self.embed_dim.is_some()),
            ("--delay", self.delay.is_some()),
            ("--norm-p", self.norm_p.is_some()),
        ];
        let recurrence = [
            ("--mode", self.mode.is_some()),
            ("--resample-n", self.resample_n.is_some()),
        ];
        fn stray(flags: &[(&'static str, bool)]) -> Vec<&'static str> {
            flags.iter().filter(|f| f.1).map(|f| f.0).collect()
        }
        if self.method != 2 {
            let s = stray(&embedding);
            if !s.is_empty() {
                return Err(Failure::usage(format!(
                    "{} only apply to --method 2",
                    s.join(", ")
                )));
            }
        }
        if self.method != 3 {
            let s = stray(&recurrence);
            if !s.is_empty() {
                return Err(Failure::usage(format!(
                    "{} only apply to --method 3",
                    s.join(", ")
                )));
            }
        }
        if self.method == 2 && (self.embed_dim.is_none() || self.delay.is_none()) {
            return Err(Failure::usage(
                "--method 2 requires --embed-dim <d> and --delay <N>samples|<T>s",
            ));
        }
        if self.embed_dim == Some(0) {
            return Err(Failure::usage("--embed-dim must be at least 1"));
        }
        if matches!(self.resample_n, Some(n) if n < 2) {
            return Err(Failure::usage("--resample-n must be at least 2"));
        }
        Ok(())
    }

    pub fn params(&self, x: &TimeSeries) -> Result<DetectionParams, Failure> {
        self.check()?;
        let method = match self.method {
            1 => MethodParams::Distance,
            2 => {
                let d = self.embed_dim.expect("checked");
                let delay = self.delay.expect("checked").seconds(x);
                MethodParams::DelayEmbedding(
                    DelayParams::new(d, delay).with_norm(self.norm_p.unwrap_or(2.0)),
                )
            }
            _ => {
                let mut mode = match self.mode.unwrap_or(Mode::Exact) {
                    Mode::Exact => RecurrenceMatrixMode::exact(),
                    Mode::Fast => RecurrenceMatrixMode::squared_fast(),
                };
                if let Some(n) = self.resample_n {
                    mode = mode.with_resample(n);
                }
                MethodParams::RecurrenceAverage(mode)
            }
        };
        Ok(DetectionParams::new(method, self.epsilon, self.delta))
    }
}
