//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use topocycle::{PersistencePoint, TimeSeries};

/// Sublevel persistence by sweeping the threshold over every sample value and
/// tracking the connected runs of `{i : f_i <= level}` between levels.
pub fn persistence_by_sweep(f: &[f64]) -> Vec<(f64, f64, usize)> {
    let mut levels: Vec<f64> = f.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    // (first, last, birth, rep) of each run at the previous level
    let mut runs: Vec<(usize, usize, f64, usize)> = Vec::new();
    let mut out = Vec::new();
    for &level in &levels {
        let mut next = Vec::new();
        let mut i = 0;
        while i < f.len() {
            if f[i] > level {
                i += 1;
                continue;
            }
            let first = i;
            while i < f.len() && f[i] <= level {
                i += 1;
            }
            let last = i - 1;
            let mut old: Vec<(f64, usize)> = runs
                .iter()
                .filter(|r| r.0 >= first && r.1 <= last)
                .map(|r| (r.2, r.3))
                .collect();
            if old.is_empty() {
                next.push((first, last, level, first));
                continue;
            }
            old.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(birth, rep) in &old[1..] {
                if level > birth {
                    out.push((birth, level, rep));
                }
            }
            next.push((first, last, old[0].0, old[0].1));
        }
        runs = next;
    }
    for r in runs {
        out.push((r.2, f64::INFINITY, r.3));
    }
    out.sort_by_key(|a| a.2);
    out
}

pub fn as_triples(points: &[PersistencePoint]) -> Vec<(f64, f64, usize)> {
    let mut v: Vec<_> = points
        .iter()
        .map(|p| (p.birth, p.death, p.min_index))
        .collect();
    v.sort_by_key(|a| a.2);
    v
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Bottleneck distance by trying every bijection between the diagrams
/// augmented with diagonal copies. Only for a handful of points.
pub fn bottleneck_by_enumeration(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let ess = |d: &[(f64, f64)]| -> Vec<f64> {
        d.iter()
            .filter(|p| p.1.is_infinite())
            .map(|p| p.0)
            .collect()
    };
    let fin = |d: &[(f64, f64)]| -> Vec<(f64, f64)> {
        d.iter().copied().filter(|p| p.1.is_finite()).collect()
    };
    let (ea, eb) = (ess(a), ess(b));
    assert_eq!(ea.len(), eb.len());
    let mut best_ess = f64::INFINITY;
    for p in permutations(ea.len()) {
        let c = p
            .iter()
            .enumerate()
            .map(|(i, &j)| (ea[i] - eb[j]).abs())
            .fold(0.0, f64::max);
        best_ess = best_ess.min(c);
    }

    let (fa, fb) = (fin(a), fin(b));
    let size = fa.len() + fb.len();
    let half = |p: (f64, f64)| (p.1 - p.0) / 2.0;
    let cost = |i: usize, j: usize| -> f64 {
        match (i < fa.len(), j < fb.len()) {
            (true, true) => (fa[i].0 - fb[j].0).abs().max((fa[i].1 - fb[j].1).abs()),
            (true, false) => half(fa[i]),
            (false, true) => half(fb[j]),
            (false, false) => 0.0,
        }
    };
    let mut best_fin = f64::INFINITY;
    for p in permutations(size) {
        let c = p
            .iter()
            .enumerate()
            .map(|(i, &j)| cost(i, j))
            .fold(0.0, f64::max);
        best_fin = best_fin.min(c);
    }
    best_ess.max(best_fin)
}

/// Lag averages of `‖x_j - x_{j+k}‖^2` (or of the plain distance) by direct summation.
pub fn lag_average_naive(x: &TimeSeries, squared: bool) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let mut sum = 0.0;
            for j in 0..n - k {
                let d2: f64 = x
                    .row(j)
                    .iter()
                    .zip(x.row(j + k))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                sum += if squared { d2 } else { d2.sqrt() };
            }
            sum / (n - k) as f64
        })
        .collect()
}

/// Random values with deliberate ties from a small pool.
pub fn values_with_ties(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let pool: Vec<f64> = (0..rng.gen_range(1..=8))
        .map(|_| rng.gen_range(-5.0..5.0))
        .collect();
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.5) {
                pool[rng.gen_range(0..pool.len())]
            } else {
                rng.gen_range(-5.0..5.0)
            }
        })
        .collect()
}

/// Uniformly sampled random walk in `R^m` on `[0, 1]`.
pub fn random_series(rng: &mut ChaCha8Rng, n: usize, m: usize) -> TimeSeries {
    let mut values = Vec::with_capacity(n * m);
    let mut current = vec![0.0; m];
    for _ in 0..n {
        for c in current.iter_mut() {
            *c += rng.gen_range(-0.3..0.3);
        }
        values.extend_from_slice(&current);
    }
    let t = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
    TimeSeries::new(t, values, m).unwrap()
}

/// Adds a perturbation whose largest coordinate change is exactly `eta`.
pub fn perturb(rng: &mut ChaCha8Rng, x: &TimeSeries, eta: f64) -> TimeSeries {
    let mut values: Vec<f64> = x
        .values()
        .iter()
        .map(|v| v + rng.gen_range(-eta..=eta))
        .collect();
    let k = rng.gen_range(0..values.len());
    values[k] = x.values()[k] + if rng.gen_bool(0.5) { eta } else { -eta };
    TimeSeries::new(x.timestamps().to_vec(), values, x.dim()).unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `sup_t ‖x(t) - y(t)‖_2` over the shared samples.
pub fn sup_row_distance(x: &TimeSeries, y: &TimeSeries) -> f64 {
    x.rows()
        .zip(y.rows())
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}
