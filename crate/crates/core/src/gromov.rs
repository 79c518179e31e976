//! Gromov products, δ-hyperbolicity estimators, rough starlikeness and
//! rough-isometry defects.

use std::collections::HashMap;
use std::io::Read;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{dijkstra, shortest_path, EdgeMetric, MetricGraph};
use crate::metric::graph_geodesic;

/// Labelled points with a symmetric distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    /// Row-major `n × n` matrix.
    dist: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Checks shape, finiteness, nonnegativity, zero diagonal and exact symmetry.
    pub fn new(labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMetricSpace(format!(
                "distance matrix must be {n} x {n}"
            )));
        }
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidMetricSpace(format!("duplicate label `{l}`")));
            }
        }
        for i in 0..n {
            if matrix[i][i] != 0.0 {
                return Err(Error::InvalidMetricSpace(format!(
                    "nonzero diagonal at `{}`",
                    labels[i]
                )));
            }
            for j in 0..n {
                let v = matrix[i][j];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidMetricSpace(format!(
                        "distance ({}, {}) = {v}",
                        labels[i], labels[j]
                    )));
                }
                if v != matrix[j][i] {
                    return Err(Error::InvalidMetricSpace(format!(
                        "asymmetric distance between `{}` and `{}`",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            dist: matrix.into_iter().flatten().collect(),
        })
    }

    /// Like [`FiniteMetricSpace::new`] and also rejects triangle-inequality
    /// violations larger than `tau`.
    pub fn validated(labels: Vec<String>, matrix: Vec<Vec<f64>>, tau: f64) -> Result<Self> {
        let s = Self::new(labels, matrix)?;
        if let Some(&(i, j, k, excess)) = s.triangle_violations(tau).first() {
            return Err(Error::InvalidMetricSpace(format!(
                "d({a},{c}) exceeds d({a},{b}) + d({b},{c}) by {excess}",
                a = s.labels[i],
                b = s.labels[j],
                c = s.labels[k]
            )));
        }
        Ok(s)
    }

    /// Space spanned by `points` under a distance function; labels are `p0, p1, …`.
    pub fn from_points(points: &[Point], d: impl Fn(&Point, &Point) -> f64 + Sync) -> Result<Self> {
        let n = points.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { d(&points[i], &points[j]) }).collect())
            .collect();
        let mut m = rows;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = m[i][j].min(m[j][i]);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        Self::new((0..n).map(|i| format!("p{i}")).collect(), m)
    }

    /// Euclidean distances between points.
    pub fn euclidean(points: &[Point]) -> Result<Self> {
        Self::from_points(points, |a, b| a.dist(b))
    }

    /// Reads `label,label,distance` rows. Every unordered pair of distinct
    /// labels must appear; a header row is optional.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut triples = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Format(format!("row {}: expected 3 fields", row + 1)));
            }
            let v: f64 = match rec[2].parse() {
                Ok(v) => v,
                Err(_) if row == 0 => continue,
                Err(_) => {
                    return Err(Error::Format(format!(
                        "row {}: `{}` is not a number",
                        row + 1,
                        &rec[2]
                    )))
                }
            };
            let mut id = |l: &str| {
                *index.entry(l.to_string()).or_insert_with(|| {
                    labels.push(l.to_string());
                    labels.len() - 1
                })
            };
            let (a, b) = (id(&rec[0]), id(&rec[1]));
            triples.push((a, b, v));
        }
        let n = labels.len();
        let mut m = vec![vec![f64::NAN; n]; n];
        for i in 0..n {
            m[i][i] = 0.0;
        }
        for (a, b, v) in triples {
            if a == b {
                if v != 0.0 {
                    return Err(Error::InvalidMetricSpace(format!(
                        "nonzero self-distance for `{}`",
                        labels[a]
                    )));
                }
                continue;
            }
            for (i, j) in [(a, b), (b, a)] {
                if !m[i][j].is_nan() && m[i][j] != v {
                    return Err(Error::InvalidMetricSpace(format!(
                        "conflicting distances for `{}`,`{}`",
                        labels[a], labels[b]
                    )));
                }
                m[i][j] = v;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if m[i][j].is_nan() {
                    return Err(Error::InvalidMetricSpace(format!(
                        "missing distance for `{}`,`{}`",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Self::new(labels, m)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.labels.len() + j]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Triples `(i, j, k, excess)` with `d(i,k) > d(i,j) + d(j,k) + tau`.
    pub fn triangle_violations(&self, tau: f64) -> Vec<(usize, usize, usize, f64)> {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut out = Vec::new();
                for j in 0..n {
                    for k in (i + 1)..n {
                        let excess = self.d(i, k) - self.d(i, j) - self.d(j, k);
                        if excess > tau {
                            out.push((i, j, k, excess));
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Subspace on the given indices, in order.
    pub fn subspace(&self, idx: &[usize]) -> Result<Self> {
        let m = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.d(i, j)).collect())
            .collect();
        Self::new(idx.iter().map(|&i| self.labels[i].clone()).collect(), m)
    }

    /// `(x|y)_w` by index.
    #[inline]
    pub fn product(&self, w: usize, x: usize, y: usize) -> f64 {
        0.5 * (self.d(x, w) + self.d(y, w) - self.d(x, y))
    }
}

/// `(x|y)_w = ½(d(x,w) + d(y,w) − d(x,y))` by label.
pub fn gromov_product(space: &FiniteMetricSpace, w: &str, x: &str, y: &str) -> Result<f64> {
    Ok(space.product(space.index_of(w)?, space.index_of(x)?, space.index_of(y)?))
}

/// Gromov product computed from a distance function.
pub fn gromov_product_with(d: impl Fn(&Point, &Point) -> f64, w: &Point, x: &Point, y: &Point) -> f64 {
    0.5 * (d(x, w) + d(y, w) - d(x, y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMethod {
    FourPoint,
    ThinTriangle,
}

/// A sampled lower bound `δ ≥ delta` with the configuration that attains it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub method: DeltaMethod,
    /// Four-point: the ordering `(x, y, z, t)` with
    /// `delta = min{(x|y)_t, (y|z)_t} − (x|z)_t`. Thin triangle: node indices
    /// of the triangle's corners.
    pub witness: Vec<usize>,
    pub sample_size: usize,
    /// True when every quadruple was visited.
    pub exhaustive: bool,
}

/// `min{(x|y)_t, (y|z)_t} − (x|z)_t` for one ordered quadruple.
pub fn four_point_defect(space: &FiniteMetricSpace, x: usize, y: usize, z: usize, t: usize) -> f64 {
    space.product(t, x, y).min(space.product(t, y, z)) - space.product(t, x, z)
}

/// Best ordering of a 4-set: the defect is `(L − M)/2` for the largest two of
/// the three pair sums, attained when `(x, z)`/`(y, t)` is the largest pairing.
fn best_ordering(space: &FiniteMetricSpace, q: [usize; 4]) -> ([usize; 4], f64) {
    let [a, b, c, d] = q;
    // orderings (x, y, z, t) putting each pairing in the (x,z)/(y,t) slot
    let candidates = [[a, b, c, d], [a, c, b, d], [a, b, d, c]];
    let mut best = (candidates[0], f64::NEG_INFINITY);
    for o in candidates {
        let v = four_point_defect(space, o[0], o[1], o[2], o[3]);
        if v > best.1 {
            best = (o, v);
        }
    }
    best
}

fn better(a: ([usize; 4], f64), b: ([usize; 4], f64)) -> ([usize; 4], f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

fn binomial4(n: usize) -> u128 {
    if n < 4 {
        return 0;
    }
    let n = n as u128;
    n * (n - 1) * (n - 2) * (n - 3) / 24
}

/// Four-point δ: exhaustive when `C(n, 4) ≤ budget`, otherwise `budget` seeded
/// uniform 4-subsets. The result is a lower bound of the space's δ.
pub fn delta_four_point(space: &FiniteMetricSpace, budget: usize, seed: u64) -> Result<DeltaEstimate> {
    let n = space.len();
    if n < 4 {
        return Err(Error::TooFewPoints { need: 4, got: n });
    }
    let total = binomial4(n);
    let exhaustive = total <= budget as u128;
    let init = ([0, 1, 2, 3], f64::NEG_INFINITY);
    let (w, delta) = if exhaustive {
        (0..n)
            .into_par_iter()
            .map(|a| {
                let mut best = init;
                for b in (a + 1)..n {
                    for c in (b + 1)..n {
                        for d in (c + 1)..n {
                            best = better(best, best_ordering(space, [a, b, c, d]));
                        }
                    }
                }
                best
            })
            .reduce(|| init, better)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let quads: Vec<[usize; 4]> = (0..budget)
            .map(|_| {
                let mut q = [0usize; 4];
                for (slot, v) in q.iter_mut().zip(sample(&mut rng, n, 4).into_iter()) {
                    *slot = v;
                }
                q.sort_unstable();
                q
            })
            .collect();
        quads
            .par_iter()
            .map(|q| best_ordering(space, *q))
            .reduce(|| init, better)
    };
    Ok(DeltaEstimate {
        delta: delta.max(0.0),
        method: DeltaMethod::FourPoint,
        witness: w.to_vec(),
        sample_size: if exhaustive { total as usize } else { budget },
        exhaustive,
    })
}

/// Largest distance from a point of one side of the geodesic triangle on nodes
/// `(a, b, c)` to the union of the other two sides, in the graph's `k` metric.
pub fn thin_triangle_defect(g: &MetricGraph, a: u32, b: u32, c: u32) -> Result<f64> {
    let w = g.edge_weights(EdgeMetric::Quasihyperbolic);
    let side = |u: u32, v: u32| -> Result<Vec<u32>> {
        if u == v {
            return Ok(vec![u]);
        }
        shortest_path(g, w, &[(u, 0.0)], &[(v, 0.0)], None)
            .map(|(_, p)| p)
            .ok_or(Error::Unreachable)
    };
    let sides = [side(a, b)?, side(b, c)?, side(c, a)?];
    let mut delta: f64 = 0.0;
    for i in 0..3 {
        let others: Vec<(u32, f64)> = sides
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, s)| s.iter().map(|&n| (n, 0.0)))
            .collect();
        let tree = dijkstra(g, w, &others, None);
        for &n in &sides[i] {
            delta = delta.max(tree.dist[n as usize]);
        }
    }
    Ok(delta)
}

/// Thin-triangle δ over `triangle_budget` seeded node triples.
pub fn delta_thin_triangle(g: &MetricGraph, triangle_budget: usize, seed: u64) -> Result<DeltaEstimate> {
    let n = g.node_count();
    if n < 3 {
        return Err(Error::TooFewPoints { need: 3, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<[u32; 3]> = (0..triangle_budget)
        .map(|_| {
            let v = sample(&mut rng, n, 3).into_vec();
            [v[0] as u32, v[1] as u32, v[2] as u32]
        })
        .collect();
    let vals: Vec<f64> = triples
        .par_iter()
        .map(|t| thin_triangle_defect(g, t[0], t[1], t[2]))
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    Ok(DeltaEstimate {
        delta: vals.get(best).copied().unwrap_or(0.0),
        method: DeltaMethod::ThinTriangle,
        witness: triples
            .get(best)
            .map(|t| t.iter().map(|&v| v as usize).collect())
            .unwrap_or_default(),
        sample_size: triangle_budget,
        exhaustive: false,
    })
}

/// Rough starlikeness estimate with the rays used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarlikeEstimate {
    pub kappa: f64,
    /// Index into the sample of the point attaining `kappa`.
    pub worst: Option<usize>,
    pub rays: usize,
    /// Smallest boundary distance among the ray targets.
    pub shell_depth: f64,
}

/// Approximates rays `[w, ξ)` by discrete geodesics from `w` to near-boundary
/// targets, and returns the largest `k`-distance from a sample point to the
/// union of these rays.
pub fn starlike_constant(
    g: &MetricGraph,
    w: &Point,
    sample_points: &[Point],
    ray_targets: &[Point],
) -> Result<StarlikeEstimate> {
    if ray_targets.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut ray_nodes: Vec<(u32, f64)> = Vec::new();
    let sw = g.snap(w)?;
    for t in ray_targets {
        let geo = graph_geodesic(g, w, t, EdgeMetric::Quasihyperbolic)?;
        ray_nodes.extend(geo.nodes.iter().map(|&n| (n, 0.0)));
    }
    ray_nodes.extend(sw.weights(EdgeMetric::Quasihyperbolic));
    ray_nodes.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    ray_nodes.dedup_by_key(|e| e.0);
    let weights = g.edge_weights(EdgeMetric::Quasihyperbolic);
    // one search from the union of rays gives every sample distance at once
    let tree = dijkstra(g, weights, &ray_nodes, None);
    let vals: Vec<f64> = sample_points
        .iter()
        .map(|x| {
            if x == w {
                return Ok(0.0);
            }
            let s = g.snap(x)?;
            Ok(tree
                .best_exit(&s.weights(EdgeMetric::Quasihyperbolic))
                .map_or(f64::INFINITY, |b| b.0))
        })
        .collect::<Result<_>>()?;
    let mut worst = None;
    let mut kappa: f64 = 0.0;
    for (i, v) in vals.iter().enumerate() {
        if *v > kappa {
            kappa = *v;
            worst = Some(i);
        }
    }
    if !kappa.is_finite() {
        return Err(Error::Unreachable);
    }
    Ok(StarlikeEstimate {
        kappa,
        worst,
        rays: ray_targets.len(),
        shell_depth: ray_targets
            .iter()
            .map(|t| g.domain().signed_distance(t))
            .fold(f64::INFINITY, f64::min),
    })
}

/// Affine distortion fit of a map in a metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughIsometryFit {
    pub l_fit: f64,
    pub m_fit: f64,
    /// `max |d(f(x), f(y)) − d(x, y)|` over the pairs.
    pub additive_defect: f64,
    /// `(L, M(L))`: smallest `M` with `d/L − M ≤ d' ≤ L·d + M` at each grid `L`.
    pub curve: Vec<(f64, f64)>,
    /// `(d(x, y), d(f(x), f(y)))` per pair.
    pub per_pair: Vec<(f64, f64)>,
}

/// Fits `(L, M)` to measured distance pairs. The grid is `L ∈ {1, 1.1, …, 3}`;
/// the chosen point minimises `M(L) + (L − 1)·median d`, i.e. the total
/// distortion at a typical scale of the sample.
pub fn fit_rough_isometry(per_pair: Vec<(f64, f64)>) -> RoughIsometryFit {
    let curve: Vec<(f64, f64)> = (0..=20)
        .map(|i| {
            let l = 1.0 + 0.1 * i as f64;
            let m = per_pair
                .iter()
                .map(|&(d, e)| (e - l * d).max(d / l - e))
                .fold(0.0, f64::max);
            (l, m)
        })
        .collect();
    let mut ds: Vec<f64> = per_pair.iter().map(|p| p.0).collect();
    ds.sort_by(f64::total_cmp);
    let median = ds.get(ds.len() / 2).copied().unwrap_or(0.0);
    let (l_fit, m_fit) = curve
        .iter()
        .copied()
        .min_by(|a, b| (a.1 + (a.0 - 1.0) * median).total_cmp(&(b.1 + (b.0 - 1.0) * median)))
        .unwrap_or((1.0, 0.0));
    RoughIsometryFit {
        l_fit,
        m_fit,
        additive_defect: per_pair.iter().map(|&(d, e)| (e - d).abs()).fold(0.0, f64::max),
        curve,
        per_pair,
    }
}

/// Measures `k(f(x), f(y))` against `k(x, y)` on the graph for each pair.
pub fn rough_isometry_defect(
    g: &MetricGraph,
    map: impl Fn(&Point) -> Point + Sync,
    pairs: &[(Point, Point)],
) -> Result<RoughIsometryFit> {
    let dom = g.domain();
    for (x, y) in pairs {
        for p in [map(x), map(y)] {
            if !dom.contains(&p) {
                return Err(Error::MapLeavesDomain(p.into_coords()));
            }
        }
    }
    let per_pair: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(x, y)| {
            let a = graph_geodesic(g, x, y, EdgeMetric::Quasihyperbolic)?.value;
            let b = graph_geodesic(g, &map(x), &map(y), EdgeMetric::Quasihyperbolic)?.value;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    Ok(fit_rough_isometry(per_pair))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        let pts: Vec<Point> = xs.iter().map(|&x| Point::xy(x, 0.0)).collect();
        FiniteMetricSpace::euclidean(&pts).unwrap()
    }

    #[test]
    fn product_identities() {
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(gromov_product(&s, "p0", "p2", "p2").unwrap(), s.d(2, 0));
        assert_eq!(gromov_product(&s, "p0", "p2", "p0").unwrap(), 0.0);
        assert!(matches!(
            gromov_product(&s, "p0", "zz", "p1"),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn line_is_zero_hyperbolic() {
        let e = delta_four_point(&line(&[0.0, 0.3, 1.7, 4.0, 5.5]), 1000, 0).unwrap();
        assert!(e.exhaustive);
        assert!(e.delta.abs() < 1e-12);
    }

    #[test]
    fn four_equally_spaced_circle_points() {
        let pts: Vec<Point> = (0..4)
            .map(|i| {
                let t = std::f64::consts::FRAC_PI_2 * i as f64;
                Point::xy(t.cos(), t.sin())
            })
            .collect();
        let s = FiniteMetricSpace::euclidean(&pts).unwrap();
        let e = delta_four_point(&s, 10, 0).unwrap();
        // pair sums: two opposite-side pairings 2√2, diagonals 4; δ = (4 − 2√2)/2
        assert!((e.delta - (2.0 - 2f64.sqrt())).abs() < 1e-12, "{}", e.delta);
        let w = &e.witness;
        assert!((four_point_defect(&s, w[0], w[1], w[2], w[3]) - e.delta).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            delta_four_point(&line(&[0.0, 1.0, 2.0]), 10, 0),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let csv = "a,b,1\na,c,2\nb,c,1\n";
        let s = FiniteMetricSpace::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(s.labels(), &["a", "b", "c"]);
        assert_eq!(s.d(0, 2), 2.0);
        assert_eq!(s.d(2, 0), 2.0);
        assert!(FiniteMetricSpace::from_csv("a,b,1\na,c,2\n".as_bytes()).is_err());
    }

    #[test]
    fn triangle_violations_are_reported() {
        let m = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let labels = vec!["a".into(), "b".into(), "c".into()];
        assert!(FiniteMetricSpace::validated(labels.clone(), m.clone(), 1e-9).is_err());
        let s = FiniteMetricSpace::new(labels, m).unwrap();
        assert_eq!(s.triangle_violations(1e-9).len(), 1);
    }

    #[test]
    fn identity_fit_is_exact() {
        let fit = fit_rough_isometry(vec![(1.0, 1.0), (2.0, 2.0), (0.5, 0.5)]);
        assert_eq!(fit.additive_defect, 0.0);
        assert_eq!((fit.l_fit, fit.m_fit), (1.0, 0.0));
    }
}
