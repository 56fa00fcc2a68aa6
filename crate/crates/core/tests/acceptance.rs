//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topocycle::eval::{
    default_sectioning, evaluate_run, format_mae, mae, mare, render_table, RunEntry,
};
use topocycle::io::{from_json, read_csv_path, TruthSidecar};
use topocycle::synthgen::{benchmark_suite, generate, Behavior, WARP_SLOPE_RANGE};
use topocycle::*;

const SLACK: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Option<Outcome> {
    Some(Outcome {
        pass: true,
        detail: detail.into(),
    })
}

fn fail(detail: impl Into<String>) -> Option<Outcome> {
    Some(Outcome {
        pass: false,
        detail: detail.into(),
    })
}

fn bottleneck(a: &[f64], b: &[f64]) -> f64 {
    bottleneck_distance(
        &sublevel_persistence(a).unwrap(),
        &sublevel_persistence(b).unwrap(),
    )
    .unwrap()
    .value()
}

fn persistence_oracle() -> Option<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    for trial in 0..500 {
        let len = rng.gen_range(1..=200);
        let f = values_with_ties(&mut rng, len);
        let d = sublevel_persistence(&f).unwrap();
        if as_triples(d.points()) != persistence_by_sweep(&f) {
            return fail(format!(
                "sequence {trial} differs from the threshold sweep: {f:?}"
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        return fail(format!("500 sequences took {elapsed:.2?} (limit 10 s)"));
    }
    pass(format!(
        "500 sequences identical to the sweep oracle in {elapsed:.2?}"
    ))
}

fn function_stability() -> Option<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let len = rng.gen_range(1..=200);
        let f = values_with_ties(&mut rng, len);
        let eta = rng.gen_range(0.0..2.0);
        let g: Vec<f64> = f.iter().map(|v| v + rng.gen_range(-eta..=eta)).collect();
        let d = bottleneck(&f, &g);
        let bound = sup_diff(&f, &g);
        if d > bound + SLACK {
            return fail(format!("trial {trial}: d_B {d} > sup-norm {bound}"));
        }
        if bound > 0.0 {
            worst = worst.max(d / bound);
        }
    }
    pass(format!(
        "200 pairs, largest d_B / sup-norm ratio {worst:.3}"
    ))
}

fn surrogate_stability() -> Option<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ratios = [0.0f64; 3];
    for trial in 0..100 {
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(16..=512);
        let eta = rng.gen_range(1e-3..=0.1);
        let x = random_series(&mut rng, n, m);
        let y = perturb(&mut rng, &x, eta / (m as f64).sqrt());
        let eta = sup_row_distance(&x, &y);

        // method 1
        let (v, w) = (method1_surrogate(&x), method1_surrogate(&y));
        if sup_diff(v.values(), w.values()) > 2.0 * eta + SLACK {
            return fail(format!(
                "trial {trial}: method 1 surrogates differ by more than 2 eta"
            ));
        }
        let d = bottleneck(v.values(), w.values());
        if d > 2.0 * eta + SLACK {
            return fail(format!(
                "trial {trial}: method 1 d_B {d} > 2 eta {}",
                2.0 * eta
            ));
        }
        ratios[0] = ratios[0].max(d / eta);

        // method 2 on a grid-aligned delay
        let dim = rng.gen_range(2..=4);
        let step = rng.gen_range(1..=((n - 1) / (2 * (dim - 1))).clamp(1, 6));
        let params = DelayParams::new(dim, step as f64 * x.mean_spacing());
        let (ux, uy) = (
            delay_embed(&x, &params).unwrap(),
            delay_embed(&y, &params).unwrap(),
        );
        if sup_row_distance(&ux, &uy) > (dim as f64).sqrt() * eta + SLACK {
            return fail(format!(
                "trial {trial}: embeddings differ by more than sqrt(d) eta"
            ));
        }
        let bound = 2.0 * (dim as f64).sqrt() * eta;
        let (v, w) = (
            method2_surrogate(&x, &params).unwrap(),
            method2_surrogate(&y, &params).unwrap(),
        );
        if sup_diff(v.values(), w.values()) > bound + SLACK {
            return fail(format!(
                "trial {trial}: method 2 surrogates differ by more than 2 sqrt(d) eta"
            ));
        }
        let d = bottleneck(v.values(), w.values());
        if d > bound + SLACK {
            return fail(format!("trial {trial}: method 2 d_B {d} > {bound}"));
        }
        ratios[1] = ratios[1].max(d / eta);

        // method 3: pairwise distances, then lag averages
        for j in 0..n {
            for k in j..n {
                let wx: f64 = x
                    .row(j)
                    .iter()
                    .zip(x.row(k))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let wy: f64 = y
                    .row(j)
                    .iter()
                    .zip(y.row(k))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if (wx - wy).abs() > 2.0 * eta + SLACK {
                    return fail(format!(
                        "trial {trial}: pair ({j}, {k}) distance moved by more than 2 eta"
                    ));
                }
            }
        }
        let mode = RecurrenceMatrixMode::exact();
        let (v, w) = (
            method3_surrogate(&x, &mode).unwrap(),
            method3_surrogate(&y, &mode).unwrap(),
        );
        if sup_diff(v.values(), w.values()) > 2.0 * eta + SLACK {
            return fail(format!(
                "trial {trial}: method 3 surrogates differ by more than 2 eta"
            ));
        }
        let d = bottleneck(v.values(), w.values());
        if d > 2.0 * eta + SLACK {
            return fail(format!("trial {trial}: method 3 d_B {d} > 2 eta"));
        }
        ratios[2] = ratios[2].max(d / eta);
    }
    pass(format!(
        "100 series; largest d_B / eta: method 1 {:.3} (<= 2), method 2 {:.3} (<= 2 sqrt d), method 3 {:.3} (<= 2)",
        ratios[0], ratios[1], ratios[2]
    ))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn fast_path() -> Option<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = rng.gen_range(2..=512);
        let m = rng.gen_range(1..=4);
        let x = random_series(&mut rng, n, m);
        let fast = method3_surrogate(&x, &RecurrenceMatrixMode::squared_fast()).unwrap();
        let naive = lag_average_naive(&x, true);
        for (k, (a, b)) in fast.values().iter().zip(&naive).enumerate() {
            let rel = if *b == 0.0 {
                a.abs()
            } else {
                (a - b).abs() / b.abs()
            };
            if rel > 1e-8 {
                return fail(format!("trial {trial}, lag {k}: fast {a} vs naive {b}"));
            }
            worst = worst.max(rel);
        }
    }

    let time = |n: usize| {
        let x = random_series(&mut ChaCha8Rng::seed_from_u64(n as u64), n, 3);
        median(
            (0..5)
                .map(|_| {
                    let start = Instant::now();
                    let v = method3_surrogate(&x, &RecurrenceMatrixMode::squared_fast()).unwrap();
                    std::hint::black_box(v);
                    start.elapsed().as_secs_f64()
                })
                .collect(),
        )
    };
    let (small, large) = (time(1 << 16), time(1 << 17));
    let ratio = large / small;
    let detail = format!(
        "50 series, worst relative error {worst:.1e}; median time 2^16 {:.1} ms, 2^17 {:.1} ms, ratio {ratio:.2}",
        small * 1e3,
        large * 1e3
    );
    if ratio >= 3.0 {
        return fail(detail);
    }
    pass(detail)
}

fn analytic_recovery() -> Option<Outcome> {
    let circle = TimeSeries::sample_uniform(0.0, 2.0, 201, |t| {
        vec![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]
    })
    .unwrap();
    let h = circle.mean_spacing();
    for method in [
        MethodParams::Distance,
        MethodParams::RecurrenceAverage(RecurrenceMatrixMode::exact()),
    ] {
        let r = match detect(&circle, &DetectionParams::new(method, 0.1, 0.5)) {
            Ok(r) => r,
            Err(e) => return fail(format!("circle, method {}: {e}", method.number())),
        };
        if r.cycle_lengths.len() != 2 || r.cycle_lengths.iter().any(|l| (l - 1.0).abs() > h) {
            return fail(format!(
                "circle, method {}: lengths {:?}",
                method.number(),
                r.cycle_lengths
            ));
        }
    }

    let eight = TimeSeries::sample_uniform(0.0, 1.0, 201, |t| {
        vec![(2.0 * PI * t).sin(), (4.0 * PI * t).sin()]
    })
    .unwrap();
    let m1 = detect(
        &eight,
        &DetectionParams::new(MethodParams::Distance, 0.1, 0.4),
    )
    .unwrap();
    let split = m1.recurrence_times.len() == 3 && (m1.recurrence_times[1] - 0.5).abs() <= h;
    let m2 = detect(
        &eight,
        &DetectionParams::new(
            MethodParams::DelayEmbedding(DelayParams::new(2, 0.05)),
            0.1,
            0.4,
        ),
    )
    .unwrap();
    if !split || m2.recurrence_times != vec![0.0, 1.0] {
        return fail(format!(
            "figure-eight: method 1 {:?}, method 2 {:?}",
            m1.recurrence_times, m2.recurrence_times
        ));
    }
    pass("circle: methods 1 and 3 give (1, 1); figure-eight: method 1 splits at 0.5, method 2 gives one cycle")
}

fn suite_params() -> [(&'static str, DetectionParams); 3] {
    [
        (
            "1 (recurring)",
            DetectionParams::new(MethodParams::Distance, 0.3, 0.6),
        ),
        (
            "2 (repetitive)",
            DetectionParams::new(
                MethodParams::DelayEmbedding(DelayParams::new(4, 0.04)),
                0.4,
                0.5,
            ),
        ),
        (
            "3 (periodic)",
            DetectionParams::new(
                MethodParams::RecurrenceAverage(RecurrenceMatrixMode::squared_fast()),
                0.05,
                1.0,
            ),
        ),
    ]
}

fn slopes_leave_band(spec: &synthgen::ScenarioSpec) -> bool {
    spec.warps.iter().any(|w| {
        w.knots.windows(2).any(|k| {
            let s = (k[1][1] - k[0][1]) / (k[1][0] - k[0][0]);
            !(0.9..=1.1).contains(&s)
        })
    })
}

fn synthetic_suite() -> Option<Outcome> {
    let params = suite_params();
    let mut table = String::new();
    let mut slowest = Duration::ZERO;
    for seed in 1..=3u64 {
        let start = Instant::now();
        let suite = benchmark_suite(2000);
        let mut entries: [Vec<RunEntry>; 3] = Default::default();
        for s in &suite {
            let g = generate(&s.spec, seed).unwrap();
            for (i, (_, p)) in params.iter().enumerate() {
                let r = detect(&g.series, p).ok();
                entries[i].push(RunEntry::new(&s.name, &g, r.as_ref()));
            }

            let (label, matched) = match s.spec.behavior {
                Behavior::Recurring => params[0],
                Behavior::Repetitive => params[1],
                Behavior::Periodic => params[2],
            };
            let r = match detect(&g.series, &matched) {
                Ok(r) => r,
                Err(e) => return fail(format!("{} seed {seed}, method {label}: {e}", s.name)),
            };
            if r.cycle_lengths.len() != g.true_lengths.len() {
                return fail(format!(
                    "{} seed {seed}: method {label} found {} cycles, expected {}",
                    s.name,
                    r.cycle_lengths.len(),
                    g.true_lengths.len()
                ));
            }
            let score = mare(&g.true_lengths, &r.cycle_lengths).unwrap();
            let limit = if s.spec.noise_amplitude > 0.0 {
                0.02
            } else {
                0.005
            };
            if score >= limit {
                return fail(format!("{} seed {seed}: MARE {score} >= {limit}", s.name));
            }

            if s.spec.behavior == Behavior::Repetitive {
                if !slopes_leave_band(&s.spec) {
                    return fail(format!("{}: warp slopes stay within [0.9, 1.1]", s.name));
                }
                let (lo, hi) = WARP_SLOPE_RANGE;
                assert!(lo <= 0.9 && hi >= 1.1);
                if let Ok(r3) = detect(&g.series, &params[2].1) {
                    if r3.cycle_lengths.len() == g.true_lengths.len() {
                        return fail(format!(
                            "{} seed {seed}: method 3 matched the cycle count",
                            s.name
                        ));
                    }
                }
            }
        }
        slowest = slowest.max(start.elapsed());
        if seed == 1 {
            let reports: Vec<_> = entries
                .iter()
                .map(|e| evaluate_run(e, &default_sectioning(e)))
                .collect();
            let rows: Vec<(&str, &eval::EvalReport)> = params
                .iter()
                .zip(&reports)
                .map(|((label, _), r)| (*label, r))
                .collect();
            table = render_table(&rows);
        }
    }
    if slowest > Duration::from_secs(60) {
        return fail(format!("suite took {slowest:.2?} (limit 60 s)"));
    }
    let indented: String = table.lines().map(|l| format!("    {l}\n")).collect();
    pass(format!(
        "18 sections x 3 seeds, matched counts exact, method 3 fails on all repetitive sections; slowest run {slowest:.2?}\n{}",
        indented.trim_end()
    ))
}

fn metric_formulas() -> Option<Outcome> {
    let checks = [
        (
            mae(&[10.0, 10.0, 10.0], &[9.0, 11.0, 10.0]).unwrap(),
            2.0 / 3.0,
        ),
        (
            mare(&[10.0, 10.0, 10.0], &[9.0, 11.0, 10.0]).unwrap(),
            (0.1 + 0.1 + 0.0) / 3.0,
        ),
        (mare(&[10.0, 20.0], &[11.0, 18.0]).unwrap(), 0.1),
        (mae(&[10.0, 20.0], &[10.0, 20.0]).unwrap(), 0.0),
        (mare(&[10.0, 20.0], &[10.0, 20.0]).unwrap(), 0.0),
    ];
    for (i, (got, want)) in checks.iter().enumerate() {
        if got != want {
            return fail(format!("example {i}: {got} != {want}"));
        }
    }
    if format_mae(23.35) != "23.35" {
        return fail("23.35 does not survive report formatting");
    }
    pass("5 hand-computed examples equal bit for bit; 23.35 formats unchanged")
}

/// Expects `data/published/I.1.csv` with a `TruthSidecar` JSON next to it.
fn published_dataset() -> Option<Outcome> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/published");
    let (csv, truth) = (root.join("I.1.csv"), root.join("I.1.truth.json"));
    if !csv.exists() || !truth.exists() {
        return None;
    }
    let x = read_csv_path(&csv).unwrap();
    let truth: TruthSidecar = from_json(&std::fs::read_to_string(&truth).unwrap()).unwrap();
    let r = match detect(&x, &DetectionParams::new(MethodParams::Distance, 0.3, 0.6)) {
        Ok(r) => r,
        Err(e) => return fail(format!("published I.1: {e}")),
    };
    let Ok(err) = mae(&truth.true_lengths, &r.cycle_lengths) else {
        return fail(format!(
            "published I.1: {} cycles, expected {}",
            r.cycle_lengths.len(),
            truth.true_lengths.len()
        ));
    };
    let samples = err / x.mean_spacing();
    let detail = format!("published I.1 MAE {samples:.2} samples (target 23.35 +/- 20%)");
    if (samples - 23.35).abs() > 0.2 * 23.35 {
        return fail(detail);
    }
    pass(detail)
}

fn main() {
    let criteria: [(&str, fn() -> Option<Outcome>); 8] = [
        (
            "persistence matches the brute-force oracle",
            persistence_oracle,
        ),
        (
            "bottleneck stability of sublevel persistence",
            function_stability,
        ),
        ("surrogate stability bounds", surrogate_stability),
        ("fast lag averages match the naive sum and scale", fast_path),
        ("analytic recovery", analytic_recovery),
        ("synthetic benchmark round trip", synthetic_suite),
        ("metric formulas", metric_formulas),
        (
            "published dataset reproduction (optional)",
            published_dataset,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Some(o) => {
                let status = if o.pass { "PASS" } else { "FAIL" };
                println!("criterion {} [{name}]: {status} - {}", i + 1, o.detail);
                if !o.pass {
                    failed += 1;
                }
            }
            None => println!(
                "criterion {} [{name}]: SKIP - dataset not present under data/published",
                i + 1
            ),
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
