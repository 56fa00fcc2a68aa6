//! WebAssembly entry points for the browser demo. Every export returns a JSON
//! string; the page in `www/` draws it on canvases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use topocycle::synthgen::{
    generate, suite_curve, BaseCurve, Behavior, CyclePerturbation, CycleWarp, ScenarioSpec,
};
use topocycle::{
    bottleneck_distance, detect, method1_surrogate, significant_points, sublevel_persistence,
    surrogate, DelayParams, DetectionParams, MethodParams, PersistencePoint, RecurrenceMatrixMode,
    TimeSeries,
};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Point {
    birth: f64,
    /// `None` for the essential class.
    death: Option<f64>,
    time: f64,
    significant: bool,
}

fn points(
    diagram: &[PersistencePoint],
    times: &[f64],
    significant: &[PersistencePoint],
) -> Vec<Point> {
    diagram
        .iter()
        .map(|p| Point {
            birth: p.birth,
            death: p.death.is_finite().then_some(p.death),
            time: times[p.min_index],
            significant: significant.iter().any(|s| s.min_index == p.min_index),
        })
        .collect()
}

#[derive(Serialize)]
struct DetectView {
    t: Vec<f64>,
    /// First two coordinates of every sample, for the phase portrait.
    xy: Vec<[f64; 2]>,
    true_times: Vec<f64>,
    surrogate_t: Vec<f64>,
    surrogate_v: Vec<f64>,
    points: Vec<Point>,
    recurrence_times: Vec<f64>,
    error: Option<String>,
}

fn scenario(curve: &str) -> Result<ScenarioSpec, String> {
    let spec = match curve {
        "circle" => ScenarioSpec::new(
            Behavior::Periodic,
            BaseCurve::Circle { radius: 1.0 },
            3,
            1.0,
        ),
        "figure_eight" => ScenarioSpec::new(Behavior::Periodic, BaseCurve::FigureEight, 2, 1.0),
        "repetitive" => {
            let mut s = ScenarioSpec::new(Behavior::Repetitive, suite_curve(), 4, 1.0);
            s.warps = vec![
                CycleWarp::slow_phase(2, 0.3, 0.6, 1.8),
                CycleWarp::slow_phase(4, 0.2, 0.5, 1.5),
            ];
            s
        }
        "recurring" => {
            let mut s = ScenarioSpec::new(Behavior::Recurring, suite_curve(), 4, 1.0);
            s.perturbations = vec![
                CyclePerturbation {
                    cycle: 2,
                    offset: vec![0.0, 0.0, 0.5],
                },
                CyclePerturbation {
                    cycle: 3,
                    offset: vec![0.3, 0.4, 0.0],
                },
            ];
            s
        }
        other => return Err(format!("unknown curve `{other}`")),
    };
    Ok(ScenarioSpec {
        samples_per_cycle: 400,
        ..spec
    })
}

fn method(number: u8) -> Result<MethodParams, String> {
    match number {
        1 => Ok(MethodParams::Distance),
        2 => Ok(MethodParams::DelayEmbedding(DelayParams::new(3, 0.04))),
        3 => Ok(MethodParams::RecurrenceAverage(
            RecurrenceMatrixMode::squared_fast(),
        )),
        n => Err(format!("no method {n}")),
    }
}

/// Generates a demo curve, runs one method and returns series, surrogate,
/// diagram and detected times.
pub fn detect_view(
    curve: &str,
    method_number: u8,
    epsilon: f64,
    delta: f64,
    noise: f64,
    seed: u64,
) -> Result<String, String> {
    let mut spec = scenario(curve)?;
    spec.noise_amplitude = noise.max(0.0);
    let g = generate(&spec, seed).map_err(|e| e.to_string())?;
    let x = &g.series;
    let method = method(method_number)?;
    let v = surrogate(x, &method).map_err(|e| e.to_string())?;
    let diagram = sublevel_persistence(v.values()).map_err(|e| e.to_string())?;
    let significant = significant_points(&diagram, epsilon, delta).unwrap_or_default();
    let (recurrence_times, error) = match detect(x, &DetectionParams::new(method, epsilon, delta)) {
        Ok(r) => (r.recurrence_times, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let view = DetectView {
        t: x.timestamps().to_vec(),
        xy: x.rows().map(|r| [r[0], r[1]]).collect(),
        true_times: g.true_times.clone(),
        surrogate_t: v.timestamps().to_vec(),
        surrogate_v: v.values().to_vec(),
        points: points(diagram.points(), v.timestamps(), &significant),
        recurrence_times,
        error,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct PersistenceView {
    points: Vec<Point>,
}

/// Diagram of a hand-drawn sequence.
pub fn persistence_view(values: &[f64], epsilon: f64, delta: f64) -> Result<String, String> {
    let diagram = sublevel_persistence(values).map_err(|e| e.to_string())?;
    let significant = significant_points(&diagram, epsilon, delta).unwrap_or_default();
    let index: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    let view = PersistenceView {
        points: points(diagram.points(), &index, &significant),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct StabilityView {
    t: Vec<f64>,
    clean: Vec<f64>,
    noisy: Vec<f64>,
    clean_points: Vec<Point>,
    noisy_points: Vec<Point>,
    eta: f64,
    bottleneck: f64,
    bound: f64,
}

/// Distance surrogates of a curve and of a copy perturbed by at most `eta`
/// in every coordinate, their diagrams and bottleneck distance.
pub fn stability_view(eta: f64, seed: u64) -> Result<String, String> {
    let spec = ScenarioSpec {
        samples_per_cycle: 200,
        noise_amplitude: 0.0,
        ..ScenarioSpec::new(Behavior::Periodic, suite_curve(), 3, 1.0)
    };
    let g = generate(&spec, seed).map_err(|e| e.to_string())?;
    let x = &g.series;
    let eta = eta.abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy: Vec<f64> = x
        .values()
        .iter()
        .map(|v| {
            if eta > 0.0 {
                v + rng.gen_range(-eta..=eta)
            } else {
                *v
            }
        })
        .collect();
    let y = TimeSeries::new(x.timestamps().to_vec(), noisy, x.dim()).map_err(|e| e.to_string())?;
    // pointwise Euclidean displacement
    let moved = x
        .rows()
        .zip(y.rows())
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);

    let (vx, vy) = (method1_surrogate(x), method1_surrogate(&y));
    let (dx, dy) = (
        sublevel_persistence(vx.values()).map_err(|e| e.to_string())?,
        sublevel_persistence(vy.values()).map_err(|e| e.to_string())?,
    );
    let bottleneck = bottleneck_distance(&dx, &dy)
        .map_err(|e| e.to_string())?
        .value();
    let view = StabilityView {
        t: vx.timestamps().to_vec(),
        clean: vx.values().to_vec(),
        noisy: vy.values().to_vec(),
        clean_points: points(dx.points(), vx.timestamps(), &[]),
        noisy_points: points(dy.points(), vy.timestamps(), &[]),
        eta: moved,
        bottleneck,
        bound: 2.0 * moved,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn detect_demo(
    curve: &str,
    method: u8,
    epsilon: f64,
    delta: f64,
    noise: f64,
    seed: u32,
) -> Result<String, JsError> {
    detect_view(curve, method, epsilon, delta, noise, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn persistence_demo(values: Vec<f64>, epsilon: f64, delta: f64) -> Result<String, JsError> {
    persistence_view(&values, epsilon, delta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn stability_demo(eta: f64, seed: u32) -> Result<String, JsError> {
    stability_view(eta, seed.into()).map_err(|e| JsError::new(&e))
}
