//! Zero-dimensional sublevel-set persistence of a sampled scalar function.
//!
//! Samples are activated in order of increasing value (ties broken by index)
//! and merged with already active neighbours through a union-find. Every
//! component remembers the local minimum that created it; when two components
//! meet, the elder one (smaller birth, then smaller index) survives and the
//! other is recorded as a point `(birth, death)` of the diagram. The component
//! of the global minimum never dies and is stored with `death = +inf`.
//!
//! Each diagram point carries the sample index of its minimum, so significant
//! points can be mapped back to the time domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePoint {
    pub birth: f64,
    /// `f64::INFINITY` for the essential class; serialized as `null`.
    #[serde(with = "infinite_as_null")]
    pub death: f64,
    pub min_index: usize,
}

impl PersistencePoint {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }
}

/// A persistence diagram with diagonal points left implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    points: Vec<PersistencePoint>,
    domain_length: usize,
}

impl PersistenceDiagram {
    /// Assembles a diagram from raw points; used for tests and deserialization.
    pub fn from_points(mut points: Vec<PersistencePoint>, domain_length: usize) -> Result<Self> {
        for p in &points {
            if p.birth.is_nan() || p.death.is_nan() || p.death < p.birth {
                return Err(Error::input(format!(
                    "invalid diagram point ({}, {})",
                    p.birth, p.death
                )));
            }
        }
        points.retain(|p| p.death > p.birth);
        points.sort_by_key(|p| p.min_index);
        Ok(Self {
            points,
            domain_length,
        })
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    pub fn domain_length(&self) -> usize {
        self.domain_length
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn essential(&self) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(|p| p.is_essential())
    }

    pub fn finite(&self) -> impl Iterator<Item = &PersistencePoint> {
        self.points.iter().filter(|p| !p.is_essential())
    }
}

struct Components {
    parent: Vec<usize>,
    // meaningful at roots only
    birth: Vec<f64>,
    rep: Vec<usize>,
}

impl Components {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            birth: vec![0.0; n],
            rep: (0..n).collect(),
        }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    fn is_elder(&self, a: usize, b: usize) -> bool {
        (self.birth[a], self.rep[a]) < (self.birth[b], self.rep[b])
    }
}

/// Sublevel-set persistence diagram of `values` (sample order is the domain order).
pub fn sublevel_persistence(values: &[f64]) -> Result<PersistenceDiagram> {
    if values.is_empty() {
        return Err(Error::input("persistence of an empty sequence"));
    }
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("non-finite value at sample {j}")));
    }

    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let mut active = vec![false; n];
    let mut comps = Components::new(n);
    let mut points = Vec::new();

    for &i in &order {
        active[i] = true;
        comps.birth[i] = values[i];
        comps.rep[i] = i;
        let mut root = i;
        let mut fresh = true;
        for nb in [i.wrapping_sub(1), i + 1] {
            if nb >= n || !active[nb] {
                continue;
            }
            let other = comps.find(nb);
            if fresh {
                // joining an existing component: i was not a minimum
                comps.parent[root] = other;
                root = other;
                fresh = false;
                continue;
            }
            if other == root {
                continue;
            }
            let (elder, younger) = if comps.is_elder(root, other) {
                (root, other)
            } else {
                (other, root)
            };
            if values[i] > comps.birth[younger] {
                points.push(PersistencePoint {
                    birth: comps.birth[younger],
                    death: values[i],
                    min_index: comps.rep[younger],
                });
            }
            comps.parent[younger] = elder;
            root = elder;
        }
    }

    let root = comps.find(0);
    points.push(PersistencePoint {
        birth: comps.birth[root],
        death: f64::INFINITY,
        min_index: comps.rep[root],
    });
    points.sort_by_key(|p| p.min_index);
    Ok(PersistenceDiagram {
        points,
        domain_length: n,
    })
}

/// Points with `birth < epsilon` and `death - birth > delta`, ordered by `min_index`.
pub fn significant_points(
    diagram: &PersistenceDiagram,
    epsilon: f64,
    delta: f64,
) -> Result<Vec<PersistencePoint>> {
    check_thresholds(epsilon, delta)?;
    Ok(diagram
        .points
        .iter()
        .filter(|p| p.birth < epsilon && p.persistence() > delta)
        .copied()
        .collect())
}

pub(crate) fn check_thresholds(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0) || !(delta > 0.0) {
        return Err(Error::param(format!(
            "epsilon and delta must be positive, got epsilon={epsilon}, delta={delta}"
        )));
    }
    Ok(())
}

/// Bottleneck distance between two diagrams.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MatchingCost(f64);

impl MatchingCost {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Exact bottleneck distance.
///
/// Essential points are matched among themselves in sorted order of birth.
/// For the finite parts the smallest feasible cost is found by binary search
/// over all candidate costs; a cost `c` is feasible iff some matching between
/// the two point sets, using only pairs at L-inf distance `<= c`, covers every
/// point whose distance to the diagonal exceeds `c`.
pub fn bottleneck_distance(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<MatchingCost> {
    let mut ess_a: Vec<f64> = a.essential().map(|p| p.birth).collect();
    let mut ess_b: Vec<f64> = b.essential().map(|p| p.birth).collect();
    if ess_a.len() != ess_b.len() {
        return Err(Error::input(format!(
            "diagrams have {} and {} essential points",
            ess_a.len(),
            ess_b.len()
        )));
    }
    ess_a.sort_by(f64::total_cmp);
    ess_b.sort_by(f64::total_cmp);
    let essential_cost = ess_a
        .iter()
        .zip(&ess_b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));

    let fa: Vec<(f64, f64)> = a.finite().map(|p| (p.birth, p.death)).collect();
    let fb: Vec<(f64, f64)> = b.finite().map(|p| (p.birth, p.death)).collect();
    Ok(MatchingCost(
        essential_cost.max(finite_bottleneck(&fa, &fb)),
    ))
}

fn diagonal_cost(p: (f64, f64)) -> f64 {
    (p.1 - p.0) / 2.0
}

fn linf(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).abs().max((p.1 - q.1).abs())
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|&p| b.iter().map(|&q| linf(p, q)).collect())
        .collect();
    let diag_a: Vec<f64> = a.iter().map(|&p| diagonal_cost(p)).collect();
    let diag_b: Vec<f64> = b.iter().map(|&q| diagonal_cost(q)).collect();

    let mut candidates: Vec<f64> = cost
        .iter()
        .flatten()
        .chain(&diag_a)
        .chain(&diag_b)
        .copied()
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let feasible = |c: f64| -> bool {
        let forced_a: Vec<usize> = (0..a.len()).filter(|&i| diag_a[i] > c).collect();
        let forced_b: Vec<usize> = (0..b.len()).filter(|&j| diag_b[j] > c).collect();
        let adj_a: Vec<Vec<usize>> = forced_a
            .iter()
            .map(|&i| (0..b.len()).filter(|&j| cost[i][j] <= c).collect())
            .collect();
        if !covers_all(&adj_a, b.len()) {
            return false;
        }
        let adj_b: Vec<Vec<usize>> = forced_b
            .iter()
            .map(|&j| (0..a.len()).filter(|&i| cost[i][j] <= c).collect())
            .collect();
        covers_all(&adj_b, a.len())
    };

    // the largest candidate is always feasible
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Whether every left vertex can be matched (Kuhn's augmenting paths).
fn covers_all(adj: &[Vec<usize>], n_right: usize) -> bool {
    if adj.len() > n_right {
        return false;
    }
    let mut owner: Vec<Option<usize>> = vec![None; n_right];
    let mut seen = vec![usize::MAX; n_right];

    fn augment(
        u: usize,
        stamp: usize,
        adj: &[Vec<usize>],
        owner: &mut [Option<usize>],
        seen: &mut [usize],
    ) -> bool {
        for &v in &adj[u] {
            if seen[v] == stamp {
                continue;
            }
            seen[v] = stamp;
            if owner[v].is_none_or(|w| augment(w, stamp, adj, owner, seen)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }

    (0..adj.len()).all(|u| augment(u, u, adj, &mut owner, &mut seen))
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() {
            s.serialize_none()
        } else {
            s.serialize_some(value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(birth: f64, death: f64, min_index: usize) -> PersistencePoint {
        PersistencePoint {
            birth,
            death,
            min_index,
        }
    }

    fn finite(points: &[(f64, f64)]) -> PersistenceDiagram {
        let mut all: Vec<PersistencePoint> = points
            .iter()
            .enumerate()
            .map(|(i, &(b, d))| pt(b, d, i + 1))
            .collect();
        all.push(pt(0.0, f64::INFINITY, 0));
        PersistenceDiagram::from_points(all, 0).unwrap()
    }

    #[test]
    fn two_minima_example() {
        let d = sublevel_persistence(&[1.0, 0.0, 2.0, 0.0, 3.0]).unwrap();
        assert_eq!(d.points(), &[pt(0.0, f64::INFINITY, 1), pt(0.0, 2.0, 3)]);
        assert_eq!(d.domain_length(), 5);
    }

    #[test]
    fn increasing_and_constant() {
        let d = sublevel_persistence(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(d.points(), &[pt(0.0, f64::INFINITY, 0)]);
        let d = sublevel_persistence(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(d.points(), &[pt(5.0, f64::INFINITY, 0)]);
        let d = sublevel_persistence(&[7.0]).unwrap();
        assert_eq!(d.points(), &[pt(7.0, f64::INFINITY, 0)]);
    }

    #[test]
    fn plateau_minimum_uses_leftmost_index() {
        let d = sublevel_persistence(&[0.0, 3.0, 1.0, 1.0, 1.0, 4.0]).unwrap();
        assert_eq!(d.points(), &[pt(0.0, f64::INFINITY, 0), pt(1.0, 3.0, 2)]);
        // a shelf with a lower neighbour is not a minimum
        let d = sublevel_persistence(&[3.0, 2.0, 2.0, 0.0]).unwrap();
        assert_eq!(d.points(), &[pt(0.0, f64::INFINITY, 3)]);
    }

    #[test]
    fn equal_birth_tie_keeps_smaller_index() {
        let d = sublevel_persistence(&[0.0, 2.0, 0.0, 2.0, 0.0]).unwrap();
        assert_eq!(
            d.points(),
            &[pt(0.0, f64::INFINITY, 0), pt(0.0, 2.0, 2), pt(0.0, 2.0, 4)]
        );
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(matches!(
            sublevel_persistence(&[]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            sublevel_persistence(&[1.0, f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn significant_points_examples() {
        let d = PersistenceDiagram::from_points(
            vec![pt(0.0, f64::INFINITY, 1), pt(0.0, 2.0, 3), pt(1.5, 1.6, 7)],
            10,
        )
        .unwrap();
        assert_eq!(
            significant_points(&d, 0.3, 0.6).unwrap(),
            vec![pt(0.0, f64::INFINITY, 1), pt(0.0, 2.0, 3)]
        );
        assert!(significant_points(&d, 1e-9 / 2.0, 0.1).unwrap().len() == 2);
        let shifted =
            PersistenceDiagram::from_points(vec![pt(0.5, f64::INFINITY, 0), pt(0.7, 2.0, 3)], 10)
                .unwrap();
        assert!(significant_points(&shifted, 0.4, 0.1).unwrap().is_empty());

        let boundary = PersistenceDiagram::from_points(vec![pt(0.1, 0.6, 2)], 5).unwrap();
        assert!(significant_points(&boundary, 0.2, 0.5).unwrap().is_empty());

        assert!(significant_points(&d, 0.0, 0.1).is_err());
        assert!(significant_points(&d, 0.1, -1.0).is_err());
    }

    #[test]
    fn bottleneck_examples() {
        let a = finite(&[(0.0, 2.0)]);
        assert_eq!(bottleneck_distance(&a, &a).unwrap().value(), 0.0);
        assert_eq!(bottleneck_distance(&a, &finite(&[])).unwrap().value(), 1.0);
        let b = finite(&[(0.0, 3.0), (1.0, 2.0)]);
        let c = finite(&[(0.0, 3.0)]);
        assert_eq!(bottleneck_distance(&b, &c).unwrap().value(), 0.5);
        assert_eq!(bottleneck_distance(&c, &b).unwrap().value(), 0.5);
    }

    #[test]
    fn bottleneck_essential_handling() {
        let a = PersistenceDiagram::from_points(vec![pt(1.0, f64::INFINITY, 0)], 1).unwrap();
        let b = PersistenceDiagram::from_points(vec![pt(1.25, f64::INFINITY, 0)], 1).unwrap();
        assert_eq!(bottleneck_distance(&a, &b).unwrap().value(), 0.25);
        let none = PersistenceDiagram::from_points(vec![], 1).unwrap();
        assert!(matches!(
            bottleneck_distance(&a, &none),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn diagram_json_uses_null_for_infinity() {
        let d = sublevel_persistence(&[1.0, 0.0, 2.0, 0.0, 3.0]).unwrap();
        let json = serde_json::to_value(d.points()).unwrap();
        assert_eq!(
            json,
            serde_json::json!([
                {"birth": 0.0, "death": null, "min_index": 1},
                {"birth": 0.0, "death": 2.0, "min_index": 3}
            ])
        );
        let back: Vec<PersistencePoint> = serde_json::from_value(json).unwrap();
        assert_eq!(back, d.points());
    }
}
