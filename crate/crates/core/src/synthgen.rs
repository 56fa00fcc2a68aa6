//! Synthetic benchmark series with exact ground-truth recurrence times.
//!
//! A scenario traces a closed base curve once per cycle. Periodic scenarios
//! repeat it verbatim; repetitive ones re-time individual cycles through
//! monotone piecewise-linear warps; recurring ones deform the middle of
//! individual cycles while leaving the neighbourhood of the start point
//! untouched. Measurement noise is added after the ground truth is fixed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{distance, TimeSeries};
use crate::surrogates::method1_surrogate;

/// Slopes allowed for warp segments.
pub const WARP_SLOPE_RANGE: (f64, f64) = (0.5, 2.0);

/// Perturbations vanish for phases outside this window.
const PERTURBATION_WINDOW: (f64, f64) = (0.15, 0.85);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    Periodic,
    Repetitive,
    Recurring,
}

/// A closed curve parametrized by phase in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseCurve {
    Circle {
        radius: f64,
    },
    /// Coordinate `c` is `amplitudes[c] * sin(2 pi freqs[c] phase + phases[c])`.
    Lissajous {
        freqs: Vec<u32>,
        phases: Vec<f64>,
        amplitudes: Vec<f64>,
    },
    /// `(sin 2 pi p, sin 4 pi p)`; crosses itself at the start point.
    FigureEight,
    /// Sum of `harmonics` sines with amplitude `1/h` and seeded phases per coordinate.
    Multisine {
        dim: usize,
        harmonics: usize,
        seed: u64,
    },
}

impl BaseCurve {
    pub fn dim(&self) -> usize {
        match self {
            BaseCurve::Circle { .. } | BaseCurve::FigureEight => 2,
            BaseCurve::Lissajous { freqs, .. } => freqs.len(),
            BaseCurve::Multisine { dim, .. } => *dim,
        }
    }

    /// Nominal size of the curve; noise defaults scale with it.
    pub fn radius(&self) -> f64 {
        match self {
            BaseCurve::Circle { radius } => *radius,
            BaseCurve::Lissajous { amplitudes, .. } => {
                amplitudes.iter().fold(0.0f64, |a, b| a.max(b.abs()))
            }
            BaseCurve::FigureEight | BaseCurve::Multisine { .. } => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BaseCurve::Circle { radius } if !(*radius > 0.0) => {
                Err(Error::spec("base_curve.radius", "must be positive"))
            }
            BaseCurve::Lissajous {
                freqs,
                phases,
                amplitudes,
            } => {
                if freqs.is_empty() {
                    return Err(Error::spec("base_curve.freqs", "needs at least one entry"));
                }
                if phases.len() != freqs.len() || amplitudes.len() != freqs.len() {
                    return Err(Error::spec(
                        "base_curve.phases",
                        "freqs, phases and amplitudes must have equal length",
                    ));
                }
                if phases.iter().chain(amplitudes).any(|v| !v.is_finite()) {
                    return Err(Error::spec("base_curve.amplitudes", "must be finite"));
                }
                Ok(())
            }
            BaseCurve::Multisine { dim, harmonics, .. } if *dim == 0 || *harmonics == 0 => {
                Err(Error::spec(
                    "base_curve.harmonics",
                    "dim and harmonics must be at least 1",
                ))
            }
            _ => Ok(()),
        }
    }

    fn evaluator(&self) -> Box<dyn Fn(f64) -> Vec<f64> + Send + Sync> {
        match self.clone() {
            BaseCurve::Circle { radius } => Box::new(move |p| {
                vec![radius * (2.0 * PI * p).cos(), radius * (2.0 * PI * p).sin()]
            }),
            BaseCurve::Lissajous {
                freqs,
                phases,
                amplitudes,
            } => Box::new(move |p| {
                freqs
                    .iter()
                    .zip(&phases)
                    .zip(&amplitudes)
                    .map(|((&f, &ph), &a)| a * (2.0 * PI * f as f64 * p + ph).sin())
                    .collect()
            }),
            BaseCurve::FigureEight => {
                Box::new(|p| vec![(2.0 * PI * p).sin(), (4.0 * PI * p).sin()])
            }
            BaseCurve::Multisine {
                dim,
                harmonics,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let offsets: Vec<Vec<f64>> = (0..dim)
                    .map(|_| {
                        (0..harmonics)
                            .map(|_| rng.gen_range(0.0..2.0 * PI))
                            .collect()
                    })
                    .collect();
                Box::new(move |p| {
                    offsets
                        .iter()
                        .map(|row| {
                            row.iter()
                                .enumerate()
                                .map(|(h, ph)| {
                                    let h = (h + 1) as f64;
                                    (2.0 * PI * h * p + ph).sin() / h
                                })
                                .sum()
                        })
                        .collect()
                })
            }
        }
    }
}

/// Re-timing of one cycle: knots `(local time, phase)` with local time in
/// base periods and phase in `[0, 1]`, from `(0, 0)` to `(L, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleWarp {
    /// 1-based cycle index.
    pub cycle: usize,
    pub knots: Vec<[f64; 2]>,
}

impl CycleWarp {
    /// Uniform stretch of the whole cycle by `factor`.
    pub fn stretch(cycle: usize, factor: f64) -> Self {
        Self {
            cycle,
            knots: vec![[0.0, 0.0], [factor, 1.0]],
        }
    }

    /// Slows the phase window `[from, to]` down by `factor` and leaves the
    /// rest of the cycle at base speed.
    pub fn slow_phase(cycle: usize, from: f64, to: f64, factor: f64) -> Self {
        let stretched_to = from + (to - from) * factor;
        Self {
            cycle,
            knots: vec![
                [0.0, 0.0],
                [from, from],
                [stretched_to, to],
                [stretched_to + (1.0 - to), 1.0],
            ],
        }
    }

    /// Length of the warped cycle in base periods.
    pub fn length(&self) -> f64 {
        self.knots.last().map_or(1.0, |k| k[0])
    }

    fn validate(&self, cycles: usize) -> Result<()> {
        let field = || format!("warps[cycle={}]", self.cycle);
        if self.cycle == 0 || self.cycle > cycles {
            return Err(Error::spec(
                field(),
                format!("cycle must be in 1..={cycles}"),
            ));
        }
        if self.knots.len() < 2 || self.knots[0] != [0.0, 0.0] {
            return Err(Error::spec(field(), "needs >= 2 knots starting at [0, 0]"));
        }
        if self.knots.last().map(|k| k[1]) != Some(1.0) {
            return Err(Error::spec(field(), "last knot must reach phase 1"));
        }
        for w in self.knots.windows(2) {
            let (dt, dp) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
            if !(dt > 0.0) {
                return Err(Error::spec(field(), "knot times must strictly increase"));
            }
            let slope = dp / dt;
            // small tolerance for slopes written as decimal fractions
            let (lo, hi) = WARP_SLOPE_RANGE;
            if slope < lo * (1.0 - 1e-9) || slope > hi * (1.0 + 1e-9) {
                return Err(Error::spec(
                    field(),
                    format!("segment slope {slope} outside [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }

    /// Phase at local time `u` (in base periods).
    fn phase(&self, u: f64) -> f64 {
        let k = &self.knots;
        let upper = k.partition_point(|knot| knot[0] <= u).clamp(1, k.len() - 1);
        let (a, b) = (k[upper - 1], k[upper]);
        let w = ((u - a[0]) / (b[0] - a[0])).clamp(0.0, 1.0);
        a[1] + w * (b[1] - a[1])
    }
}

/// Mid-cycle displacement of one cycle, reached at the centre of the
/// perturbation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclePerturbation {
    /// 1-based cycle index.
    pub cycle: usize,
    pub offset: Vec<f64>,
}

fn perturbation_weight(phase: f64) -> f64 {
    let (lo, hi) = PERTURBATION_WINDOW;
    if phase <= lo || phase >= hi {
        0.0
    } else {
        (PI * (phase - lo) / (hi - lo)).sin().powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Uniform,
    /// Interior samples moved by up to `fraction` of the spacing.
    Jittered { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub behavior: Behavior,
    pub base_curve: BaseCurve,
    pub cycles: usize,
    /// Base period in seconds.
    pub period: f64,
    pub samples_per_cycle: usize,
    /// Uniform per-coordinate noise in `[-a, a]`.
    pub noise_amplitude: f64,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warps: Vec<CycleWarp>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbations: Vec<CyclePerturbation>,
    /// Return tolerance the series is built to satisfy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_gen: Option<f64>,
    /// Cycle significance the series is built to satisfy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_gen: Option<f64>,
}

impl ScenarioSpec {
    pub fn new(behavior: Behavior, base_curve: BaseCurve, cycles: usize, period: f64) -> Self {
        Self {
            behavior,
            base_curve,
            cycles,
            period,
            samples_per_cycle: 200,
            noise_amplitude: 0.0,
            sampling: Sampling::Uniform,
            warps: Vec::new(),
            perturbations: Vec::new(),
            epsilon_gen: None,
            delta_gen: None,
        }
    }

    /// Project default for noisy scenarios: 2% of the curve radius.
    pub fn default_noise_amplitude(&self) -> f64 {
        0.02 * self.base_curve.radius()
    }

    pub fn validate(&self) -> Result<()> {
        self.base_curve.validate()?;
        if self.cycles == 0 {
            return Err(Error::spec("cycles", "must be at least 1"));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::spec("period", "must be positive"));
        }
        if self.samples_per_cycle < 2 {
            return Err(Error::spec("samples_per_cycle", "must be at least 2"));
        }
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return Err(Error::spec(
                "noise_amplitude",
                "must be a finite value >= 0",
            ));
        }
        if let Sampling::Jittered { fraction } = self.sampling {
            if !(0.0..0.5).contains(&fraction) {
                return Err(Error::spec("sampling.fraction", "must lie in [0, 0.5)"));
            }
        }
        if !self.warps.is_empty() && self.behavior != Behavior::Repetitive {
            return Err(Error::spec(
                "warps",
                "only repetitive scenarios may warp cycles",
            ));
        }
        if !self.perturbations.is_empty() && self.behavior != Behavior::Recurring {
            return Err(Error::spec(
                "perturbations",
                "only recurring scenarios may perturb cycles",
            ));
        }
        let mut seen = vec![false; self.cycles + 1];
        for w in &self.warps {
            w.validate(self.cycles)?;
            if std::mem::replace(&mut seen[w.cycle], true) {
                return Err(Error::spec(
                    "warps",
                    format!("cycle {} warped twice", w.cycle),
                ));
            }
        }
        let mut seen = vec![false; self.cycles + 1];
        for p in &self.perturbations {
            if p.cycle == 0 || p.cycle > self.cycles {
                return Err(Error::spec(
                    "perturbations",
                    format!("no cycle {}", p.cycle),
                ));
            }
            if p.offset.len() != self.base_curve.dim() {
                return Err(Error::spec(
                    "perturbations.offset",
                    format!("expected {} coordinates", self.base_curve.dim()),
                ));
            }
            if std::mem::replace(&mut seen[p.cycle], true) {
                return Err(Error::spec(
                    "perturbations",
                    format!("cycle {} perturbed twice", p.cycle),
                ));
            }
        }
        for (name, v) in [
            ("epsilon_gen", self.epsilon_gen),
            ("delta_gen", self.delta_gen),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::spec(name, "must be positive"));
                }
            }
        }
        Ok(())
    }

    fn warp_of(&self, cycle: usize) -> Option<&CycleWarp> {
        self.warps.iter().find(|w| w.cycle == cycle)
    }

    fn offset_of(&self, cycle: usize) -> Option<&[f64]> {
        self.perturbations
            .iter()
            .find(|p| p.cycle == cycle)
            .map(|p| p.offset.as_slice())
    }

    /// Ground-truth recurrence times `T_0 = 0 < ... < T_k`.
    pub fn true_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        let mut t = 0.0;
        for cycle in 1..=self.cycles {
            t += self.period * self.warp_of(cycle).map_or(1.0, CycleWarp::length);
            times.push(t);
        }
        times
    }
}

/// A generated series with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub series: TimeSeries,
    pub true_times: Vec<f64>,
    pub true_lengths: Vec<f64>,
    pub spec: ScenarioSpec,
    pub seed: u64,
}

struct CleanCurve<'a> {
    spec: &'a ScenarioSpec,
    times: Vec<f64>,
    curve: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

impl<'a> CleanCurve<'a> {
    fn new(spec: &'a ScenarioSpec) -> Self {
        Self {
            spec,
            times: spec.true_times(),
            curve: spec.base_curve.evaluator(),
        }
    }

    fn at(&self, t: f64) -> Vec<f64> {
        // cycle containing t (1-based); T_k belongs to the last cycle
        let cycle = self
            .times
            .partition_point(|&s| s <= t)
            .clamp(1, self.spec.cycles);
        let u = (t - self.times[cycle - 1]) / self.spec.period;
        let phase = match self.spec.warp_of(cycle) {
            Some(w) => w.phase(u),
            None => u.clamp(0.0, 1.0),
        };
        let mut x = (self.curve)(phase);
        if let Some(offset) = self.spec.offset_of(cycle) {
            let w = perturbation_weight(phase);
            x.iter_mut().zip(offset).for_each(|(xi, oi)| *xi += w * oi);
        }
        x
    }
}

/// Generates the scenario; deterministic in `(spec, seed)`.
pub fn generate(spec: &ScenarioSpec, seed: u64) -> Result<LabeledSeries> {
    spec.validate()?;
    let clean = CleanCurve::new(spec);
    let true_times = clean.times.clone();
    let total = *true_times.last().expect("at least one cycle");
    check_recurring_targets(spec, &clean)?;

    let n = ((total / spec.period) * spec.samples_per_cycle as f64).round() as usize + 1;
    let h = total / (n - 1) as f64;
    let mut timestamps: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    timestamps[n - 1] = total;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if let Sampling::Jittered { fraction } = spec.sampling {
        if fraction > 0.0 {
            for t in &mut timestamps[1..n - 1] {
                *t += rng.gen_range(-fraction..fraction) * h;
            }
        }
    }

    let dim = spec.base_curve.dim();
    let mut values = Vec::with_capacity(n * dim);
    for &t in &timestamps {
        values.extend(clean.at(t));
    }
    let a = spec.noise_amplitude;
    if a > 0.0 {
        for v in &mut values {
            *v += rng.gen_range(-a..=a);
        }
    }

    let series = TimeSeries::new(timestamps, values, dim)?;
    let true_lengths = true_times.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(LabeledSeries {
        series,
        true_times,
        true_lengths,
        spec: spec.clone(),
        seed,
    })
}

/// Checks on a dense clean trace that every cycle's farthest point from the
/// start exceeds `delta_gen`, and that perturbations keep returns within
/// `epsilon_gen`.
fn check_recurring_targets(spec: &ScenarioSpec, clean: &CleanCurve<'_>) -> Result<()> {
    let origin = clean.at(0.0);
    if let Some(eps) = spec.epsilon_gen {
        for &t in &clean.times[1..] {
            if distance(&clean.at(t), &origin) > eps {
                return Err(Error::spec(
                    "epsilon_gen",
                    "a cycle does not return within epsilon_gen",
                ));
            }
        }
    }
    if let Some(delta) = spec.delta_gen {
        for w in clean.times.windows(2) {
            let far = (0..=512)
                .map(|j| w[0] + (w[1] - w[0]) * j as f64 / 512.0)
                .map(|t| distance(&clean.at(t), &origin))
                .fold(0.0f64, f64::max);
            if !(far > delta) {
                return Err(Error::spec(
                    "delta_gen",
                    format!(
                        "cycle starting at {} reaches only {far} from the start",
                        w[0]
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Whether `x(t + tau)` stays within `2 eps` of `x(t)` for every sample `t <= T - tau`.
pub fn validate_periodic(x: &TimeSeries, tau: f64, eps: f64) -> Result<bool> {
    if !(tau > 0.0 && tau < x.span()) {
        return Err(Error::param(format!(
            "period {tau} must lie in (0, {})",
            x.span()
        )));
    }
    let slack = 1e-9 * x.mean_spacing();
    let mut shifted = vec![0.0; x.dim()];
    for (j, &t) in x.timestamps().iter().enumerate() {
        let target = t + tau;
        if target > x.end() + slack {
            break;
        }
        x.interpolate_into(target.min(x.end()), &mut shifted)?;
        if distance(x.row(j), &shifted) > 2.0 * eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `times` witness `x` as epsilon-delta approximately recurring:
/// every interior time sits (within one sample) on a local minimum of the
/// sampled start distance no larger than `eps`, and both neighbouring cycles
/// reach farther than `delta` beyond that minimum.
pub fn validate_recurring(x: &TimeSeries, times: &[f64], eps: f64, delta: f64) -> Result<bool> {
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("recurrence times must be strictly increasing"));
    }
    let h = x.mean_spacing();
    if times[0] < x.start() - h || times[times.len() - 1] > x.end() + h {
        return Err(Error::param("recurrence times leave the sampled domain"));
    }
    let v = method1_surrogate(x);
    let (t, v) = (v.timestamps(), v.values());
    let n = t.len();

    let window = |a: f64, b: f64| {
        let lo = t.partition_point(|&s| s < a);
        let hi = t.partition_point(|&s| s <= b);
        lo..hi
    };
    for i in 1..times.len() - 1 {
        let near = window(times[i] - h, times[i] + h);
        let Some(j) = near.min_by(|&a, &b| v[a].total_cmp(&v[b])) else {
            return Ok(false);
        };
        let local_min = (j == 0 || v[j] <= v[j - 1]) && (j + 1 == n || v[j] <= v[j + 1]);
        if !local_min || v[j] > eps {
            return Ok(false);
        }
        for (a, b) in [(times[i - 1], times[i]), (times[i], times[i + 1])] {
            let far = window(a, b).map(|k| v[k]).fold(0.0f64, f64::max);
            if !(far > delta + v[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One named row of a benchmark suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedScenario {
    pub name: String,
    #[serde(flatten)]
    pub spec: ScenarioSpec,
}

/// Curve used by the built-in suite: a unit circle lifted by a double-frequency
/// third coordinate.
pub fn suite_curve() -> BaseCurve {
    BaseCurve::Lissajous {
        freqs: vec![1, 1, 2],
        phases: vec![PI / 2.0, 0.0, 0.0],
        amplitudes: vec![1.0, 1.0, 0.5],
    }
}

/// Eighteen benchmark scenarios in six sections: periodic `I`, repetitive `II`
/// and recurring `III`, each noiseless (`.1`) and with uniform noise of 2% of
/// the curve radius (`.2`).
pub fn benchmark_suite(samples_per_cycle: usize) -> Vec<NamedScenario> {
    let curve = suite_curve();
    let base = |behavior, cycles| {
        let mut s = ScenarioSpec::new(behavior, curve.clone(), cycles, 1.0);
        s.samples_per_cycle = samples_per_cycle;
        s
    };

    // (phase window, per-cycle slow-down factors) for each repetitive variant
    let timing: [((f64, f64), [f64; 5]); 5] = [
        ((0.75, 0.85), [1.0, 2.0, 1.5, 2.0, 1.25]),
        ((0.2, 0.4), [1.0, 1.5, 1.25, 1.75, 1.5]),
        ((0.45, 0.65), [1.5, 1.0, 1.75, 1.25, 2.0]),
        ((0.15, 0.3), [1.0, 2.0, 1.0, 2.0, 1.5]),
        ((0.7, 0.85), [1.0, 1.75, 2.0, 1.0, 1.5]),
    ];
    // per-cycle displacement magnitudes and directions for the recurring variants
    let magnitudes = [0.0, 0.3, 0.45, 0.35, 0.5];
    let directions: [[f64; 3]; 3] = [[0.0, 0.0, 1.0], [0.6, 0.8, 0.0], [0.48, 0.64, 0.6]];

    let mut out = Vec::new();
    for (noisy, tag) in [(false, 1), (true, 2)] {
        let mut s = base(Behavior::Periodic, 20);
        if noisy {
            s.noise_amplitude = s.default_noise_amplitude();
        }
        out.push(NamedScenario {
            name: format!("I.{tag}"),
            spec: s,
        });
    }
    for (noisy, tag) in [(false, 1), (true, 2)] {
        for (v, ((from, to), factors)) in timing.iter().enumerate() {
            let mut s = base(Behavior::Repetitive, 5);
            s.warps = factors
                .iter()
                .enumerate()
                .filter(|(_, &f)| f != 1.0)
                .map(|(c, &f)| CycleWarp::slow_phase(c + 1, *from, *to, f))
                .collect();
            if noisy {
                s.noise_amplitude = s.default_noise_amplitude();
            }
            out.push(NamedScenario {
                name: format!("II.{tag}.{}", v + 1),
                spec: s,
            });
        }
    }
    for (noisy, tag) in [(false, 1), (true, 2)] {
        for (v, dir) in directions.iter().enumerate() {
            let mut s = base(Behavior::Recurring, 5);
            s.perturbations = magnitudes
                .iter()
                .enumerate()
                .filter(|(_, &m)| m > 0.0)
                .map(|(c, &m)| CyclePerturbation {
                    cycle: c + 1,
                    offset: dir.iter().map(|d| d * m).collect(),
                })
                .collect();
            s.epsilon_gen = Some(0.3);
            s.delta_gen = Some(0.6);
            if noisy {
                s.noise_amplitude = s.default_noise_amplitude();
            }
            out.push(NamedScenario {
                name: format!("III.{tag}.{}", v + 1),
                spec: s,
            });
        }
    }
    out
}
