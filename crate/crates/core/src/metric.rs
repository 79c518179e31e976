//! The distance ratio metric `j_D`, the quasihyperbolic metric `k_D`, the inner
//! metric `d_I`, and the uniformity diagnostics built on their geodesics.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, Polyline};
use crate::graph::{dijkstra, shortest_path, EdgeMetric, MetricGraph, ResolutionSpec, Snap};

fn inside_depth(dom: &Domain, x: &Point) -> Result<f64> {
    x.check_dim(dom.dim())?;
    let d = dom.signed_distance(x);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::PointOnBoundary(d))
    }
}

/// `r_D(x, y) = |x − y| / min{d(x), d(y)}`.
pub fn distance_ratio(dom: &Domain, x: &Point, y: &Point) -> Result<f64> {
    let dx = inside_depth(dom, x)?;
    let dy = inside_depth(dom, y)?;
    Ok(x.dist(y) / dx.min(dy))
}

/// `j_D(x, y) = log(1 + r_D(x, y))`.
pub fn distance_ratio_metric(dom: &Domain, x: &Point, y: &Point) -> Result<f64> {
    distance_ratio(dom, x, y).map(f64::ln_1p)
}

/// When to stop refining a graph-backed distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergencePolicy {
    /// Relative change between successive levels accepted as converged.
    pub tau_metric: f64,
    /// Number of resolutions in the ladder (`h, h/2, …`).
    pub max_levels: usize,
}

impl Default for ConvergencePolicy {
    fn default() -> Self {
        Self {
            tau_metric: 0.01,
            max_levels: 3,
        }
    }
}

/// A metric value with its discrete geodesic and refinement history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicResult {
    pub value: f64,
    /// Vertices of the discrete geodesic, from `x` to `y`.
    pub path: Vec<Point>,
    /// Graph nodes visited, in order (empty for a direct segment).
    pub nodes: Vec<u32>,
    pub converged: bool,
    /// `(h, value)` at each computed resolution, by decreasing `h`.
    pub estimates_at_resolutions: Vec<(f64, f64)>,
    /// Some node of the path lies in the truncation shell of an unbounded domain.
    pub truncation_suspect: bool,
}

impl GeodesicResult {
    pub(crate) fn trivial(x: &Point, h: f64) -> Self {
        Self {
            value: 0.0,
            path: vec![x.clone()],
            nodes: Vec::new(),
            converged: true,
            estimates_at_resolutions: vec![(h, 0.0)],
            truncation_suspect: false,
        }
    }

    /// The path as a polyline; `None` for the degenerate `x = y` case.
    pub fn polyline(&self) -> Option<Polyline> {
        Polyline::from_path(self.path.clone())
    }

    /// Turns a truncation flag into an error.
    pub fn require_untruncated(self) -> Result<Self> {
        if self.truncation_suspect {
            Err(Error::TruncationSuspect)
        } else {
            Ok(self)
        }
    }
}

fn pick(metric: EdgeMetric, (qh, len): (f64, f64)) -> f64 {
    match metric {
        EdgeMetric::Quasihyperbolic => qh,
        EdgeMetric::Euclidean => len,
    }
}

/// Shortest path between two snapped points under arbitrary edge weights and
/// connector weights.
pub(crate) fn search_between(
    g: &MetricGraph,
    weights: &[f64],
    sx: (&Point, &[(u32, f64)]),
    sy: (&Point, &[(u32, f64)]),
    direct: Option<f64>,
) -> Result<GeodesicResult> {
    let (value, nodes) =
        shortest_path(g, weights, sx.1, sy.1, direct).ok_or(Error::Unreachable)?;
    let mut path = Vec::with_capacity(nodes.len() + 2);
    path.push(sx.0.clone());
    path.extend(nodes.iter().map(|&n| g.node(n as usize).clone()));
    path.push(sy.0.clone());
    let truncation_suspect = nodes.iter().any(|&n| g.in_truncation_shell(n as usize));
    Ok(GeodesicResult {
        value,
        path,
        nodes,
        converged: true,
        estimates_at_resolutions: vec![(g.resolution().h, value)],
        truncation_suspect,
    })
}

/// Discrete geodesic on a single graph under one of its stored weight families.
pub fn graph_geodesic(
    g: &MetricGraph,
    x: &Point,
    y: &Point,
    metric: EdgeMetric,
) -> Result<GeodesicResult> {
    if x == y {
        inside_depth(g.domain(), x)?;
        return Ok(GeodesicResult::trivial(x, g.resolution().h));
    }
    let sx = g.snap(x)?;
    let sy = g.snap(y)?;
    let direct = g.direct_segment(&sx, &sy).map(|w| pick(metric, w));
    search_between(
        g,
        g.edge_weights(metric),
        (x, &sx.weights(metric)),
        (y, &sy.weights(metric)),
        direct,
    )
}

/// Pairwise graph distances between sample points (one search per row, rows
/// in parallel). The matrix is symmetrised by taking the smaller direction.
pub fn pairwise_distances(
    g: &MetricGraph,
    points: &[Point],
    metric: EdgeMetric,
) -> Result<Vec<Vec<f64>>> {
    let snaps: Vec<Snap> = points.iter().map(|p| g.snap(p)).collect::<Result<_>>()?;
    let conn: Vec<Vec<(u32, f64)>> = snaps.iter().map(|s| s.weights(metric)).collect();
    pairwise_search(g, g.edge_weights(metric), points, &conn, |i, j| {
        g.direct_segment(&snaps[i], &snaps[j]).map(|w| pick(metric, w))
    })
}

/// Row-parallel all-pairs search with caller-supplied edge, connector and
/// direct-segment weights.
pub(crate) fn pairwise_search(
    g: &MetricGraph,
    weights: &[f64],
    points: &[Point],
    conn: &[Vec<(u32, f64)>],
    direct: impl Fn(usize, usize) -> Option<f64> + Sync,
) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let tree = dijkstra(g, weights, &conn[i], None);
            (0..n)
                .map(|j| {
                    if i == j || points[i] == points[j] {
                        return 0.0;
                    }
                    let via = tree.best_exit(&conn[j]).map_or(f64::INFINITY, |b| b.0);
                    via.min(direct(i, j).unwrap_or(f64::INFINITY))
                })
                .collect()
        })
        .collect();
    let mut m = rows;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m[i][j].min(m[j][i]);
            if !v.is_finite() {
                return Err(Error::Unreachable);
            }
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    Ok(m)
}

/// The refinement ladder `h, h/2, h/4, …` of graphs over one domain, built lazily.
#[derive(Debug)]
pub struct MetricLadder {
    domain: Arc<Domain>,
    base: ResolutionSpec,
    seed: u64,
    policy: ConvergencePolicy,
    levels: Vec<OnceLock<Result<Arc<MetricGraph>>>>,
}

impl MetricLadder {
    pub fn new(
        domain: Arc<Domain>,
        base: ResolutionSpec,
        seed: u64,
        policy: ConvergencePolicy,
    ) -> Result<Self> {
        base.validate()?;
        if policy.max_levels == 0 || !(policy.tau_metric > 0.0) {
            return Err(Error::InvalidParameter(
                "convergence policy needs max_levels >= 1 and tau_metric > 0".into(),
            ));
        }
        Ok(Self {
            domain,
            base,
            seed,
            policy,
            levels: (0..policy.max_levels).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn policy(&self) -> &ConvergencePolicy {
        &self.policy
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// Graph at ladder index `level` (`h / 2^level`).
    pub fn graph(&self, level: usize) -> Result<Arc<MetricGraph>> {
        let cell = self.levels.get(level).ok_or_else(|| {
            Error::InvalidParameter(format!("ladder has {} levels", self.levels.len()))
        })?;
        cell.get_or_init(|| {
            MetricGraph::build(
                self.domain.clone(),
                self.base.refined(level as u32),
                self.seed,
            )
            .map(Arc::new)
        })
        .clone()
    }

    /// Geodesic refined along the ladder until successive values agree within
    /// `tau_metric`, or the ladder is exhausted (`converged = false`).
    pub fn geodesic(&self, x: &Point, y: &Point, metric: EdgeMetric) -> Result<GeodesicResult> {
        let mut estimates = Vec::new();
        let mut last: Option<GeodesicResult> = None;
        for level in 0..self.levels.len() {
            let g = self.graph(level)?;
            let r = graph_geodesic(&g, x, y, metric)?;
            estimates.push((g.resolution().h, r.value));
            let converged = last
                .as_ref()
                .is_some_and(|p| (p.value - r.value).abs() <= self.policy.tau_metric * r.value);
            let trivial = r.value == 0.0;
            last = Some(r);
            if converged || trivial {
                let mut out = last.unwrap();
                out.converged = true;
                out.estimates_at_resolutions = estimates;
                return Ok(out);
            }
        }
        let mut out = last.expect("ladder has at least one level");
        out.converged = self.levels.len() == 1;
        out.estimates_at_resolutions = estimates;
        Ok(out)
    }
}

/// `k_D(x, y)` with refinement along the ladder.
pub fn quasihyperbolic_distance(ladder: &MetricLadder, x: &Point, y: &Point) -> Result<GeodesicResult> {
    ladder.geodesic(x, y, EdgeMetric::Quasihyperbolic)
}

/// `d_I(x, y)`, the infimum of Euclidean lengths of curves in `D`.
pub fn inner_distance(ladder: &MetricLadder, x: &Point, y: &Point) -> Result<GeodesicResult> {
    ladder.geodesic(x, y, EdgeMetric::Euclidean)
}

/// Empirical `ψ` with `k_D ≤ ψ(r_D)` on the sample: the least nondecreasing
/// staircase above every `(r, k)` record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiEnvelope {
    /// `(r, ψ(r))`, strictly increasing in `r` and nondecreasing in `ψ`.
    pub knots: Vec<(f64, f64)>,
    /// Per-pair `(r_D, k_D)` records in sample order.
    pub records: Vec<(f64, f64)>,
    /// Pairs whose solve failed.
    pub dropped: usize,
    /// Ratio of `max k / log(1 + r)` over the upper half of the `r` range to
    /// the same ratio over the lower half.
    pub growth_ratio: f64,
    /// `growth_ratio > 2`: the sample grows faster than any single `c·log(1 + r)`.
    pub super_logarithmic: bool,
}

impl PsiEnvelope {
    pub fn from_records(records: Vec<(f64, f64)>, dropped: usize) -> Self {
        let mut sorted = records.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut knots: Vec<(f64, f64)> = Vec::new();
        let mut running = f64::NEG_INFINITY;
        for (r, k) in &sorted {
            running = running.max(*k);
            match knots.last_mut() {
                Some(last) if last.0 == *r => last.1 = running,
                _ => knots.push((*r, running)),
            }
        }
        let ratio = |part: &[(f64, f64)]| {
            part.iter()
                .filter(|(r, _)| *r > 0.0)
                .map(|(r, k)| k / r.ln_1p())
                .fold(0.0, f64::max)
        };
        let half = sorted.len() / 2;
        let lower = ratio(&sorted[..half]);
        let upper = ratio(&sorted[half..]);
        let growth_ratio = if lower > 0.0 { upper / lower } else { 1.0 };
        Self {
            knots,
            records,
            dropped,
            growth_ratio,
            super_logarithmic: growth_ratio > 2.0,
        }
    }

    /// Envelope value at `t`: the first knot at or beyond `t`. `None` past the
    /// sampled range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let i = self.knots.partition_point(|k| k.0 < t);
        self.knots.get(i).map(|k| k.1)
    }

    /// Largest `ψ(t) / log(1 + t)` over the knots.
    pub fn log_ratio_max(&self) -> f64 {
        self.knots
            .iter()
            .filter(|(r, _)| *r > 0.0)
            .map(|(r, k)| k / r.ln_1p())
            .fold(0.0, f64::max)
    }
}

/// Records `(r_D, k_D)` per pair on one graph and returns the staircase envelope.
pub fn psi_envelope(g: &MetricGraph, pairs: &[(Point, Point)]) -> Result<PsiEnvelope> {
    if pairs.len() < 10 {
        return Err(Error::TooFewPoints {
            need: 10,
            got: pairs.len(),
        });
    }
    let out: Vec<Option<(f64, f64)>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let r = distance_ratio(g.domain(), x, y).ok()?;
            let k = graph_geodesic(g, x, y, EdgeMetric::Quasihyperbolic).ok()?;
            Some((r, k.value))
        })
        .collect();
    let dropped = out.iter().filter(|o| o.is_none()).count();
    Ok(PsiEnvelope::from_records(out.into_iter().flatten().collect(), dropped))
}

/// Which distance the length condition compares against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformityMode {
    /// `ℓ(γ) ≤ A|x − y|`.
    Euclidean,
    /// `ℓ(γ) ≤ A·d_I(x, y)`, the inner-uniform variant.
    Inner,
}

/// Sample maxima of the length and cigar ratios along quasihyperbolic geodesics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityEstimate {
    pub a_length: f64,
    pub a_cigar: f64,
    pub pairs_used: usize,
    pub dropped: usize,
    /// Per-pair `(length ratio, cigar ratio)`.
    pub per_pair: Vec<(f64, f64)>,
}

impl UniformityEstimate {
    /// `max(A_length, A_cigar)`, the single constant used in `k ≤ 4A²j`.
    pub fn a_hat(&self) -> f64 {
        self.a_length.max(self.a_cigar)
    }
}

/// Length and cigar ratios of one path with a reference distance for the
/// length condition.
pub fn path_uniformity(dom: &Domain, path: &[Point], reference: f64) -> (f64, f64) {
    let mut cum = vec![0.0];
    for w in path.windows(2) {
        cum.push(cum.last().unwrap() + w[0].dist(&w[1]));
    }
    let total = *cum.last().unwrap();
    let length = if reference > 0.0 { total / reference } else { 1.0 };
    let cigar = path
        .iter()
        .zip(&cum)
        .map(|(z, &s)| s.min(total - s) / dom.signed_distance(z).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    (length, cigar)
}

/// `(A_length, A_cigar)` using discrete quasihyperbolic geodesics as candidate
/// uniform arcs. The result bounds the best constant from below on the sample.
pub fn uniformity_constant_estimate(
    g: &MetricGraph,
    pairs: &[(Point, Point)],
    mode: UniformityMode,
) -> Result<UniformityEstimate> {
    let out: Vec<Option<(f64, f64)>> = pairs
        .par_iter()
        .map(|(x, y)| {
            if x == y {
                return None;
            }
            let geo = graph_geodesic(g, x, y, EdgeMetric::Quasihyperbolic).ok()?;
            let reference = match mode {
                UniformityMode::Euclidean => x.dist(y),
                UniformityMode::Inner => graph_geodesic(g, x, y, EdgeMetric::Euclidean).ok()?.value,
            };
            Some(path_uniformity(g.domain(), &geo.path, reference))
        })
        .collect();
    let dropped = out.iter().filter(|o| o.is_none()).count();
    let per_pair: Vec<(f64, f64)> = out.into_iter().flatten().collect();
    if per_pair.is_empty() {
        return Err(Error::TooFewPoints { need: 1, got: 0 });
    }
    Ok(UniformityEstimate {
        a_length: per_pair.iter().map(|p| p.0).fold(0.0, f64::max),
        a_cigar: per_pair.iter().map(|p| p.1).fold(0.0, f64::max),
        pairs_used: per_pair.len(),
        dropped,
        per_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::line_integral;
    use crate::geometry::Density;
    use std::f64::consts::{E, PI};

    #[test]
    fn closed_form_j_values() {
        let z = Domain::z_axis_complement();
        let v = distance_ratio_metric(&z, &Point::xyz(1.0, 0.0, 0.0), &Point::xyz(-1.0, 0.0, 0.0))
            .unwrap();
        assert!((v - 3f64.ln()).abs() < 1e-15);
        let r = distance_ratio(&z, &Point::xyz(1.0, 0.0, 0.0), &Point::xyz(-1.0, 0.0, 0.0)).unwrap();
        assert!((r - 2.0).abs() < 1e-15);

        let p = Domain::punctured_unit_disk();
        let (x, y) = (Point::xy(1.0 / 3.0, 0.0), Point::xy(1.0 / 9.0, 0.0));
        assert!((distance_ratio(&p, &x, &y).unwrap() - 2.0).abs() < 1e-14);
        assert!((distance_ratio_metric(&p, &x, &y).unwrap() - 3f64.ln()).abs() < 1e-14);
        assert_eq!(distance_ratio_metric(&p, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn j_rejects_boundary_points() {
        let p = Domain::punctured_unit_disk();
        assert!(matches!(
            distance_ratio_metric(&p, &Point::xy(0.0, 0.0), &Point::xy(0.5, 0.0)),
            Err(Error::PointOnBoundary(_))
        ));
    }

    #[test]
    fn half_plane_vertical_k() {
        let g = MetricGraph::build(
            Arc::new(Domain::upper_half_plane()),
            ResolutionSpec::new(0.5).with_min_spacing(0.05),
            0,
        )
        .unwrap();
        let r = graph_geodesic(&g, &Point::xy(0.0, 1.0), &Point::xy(0.0, E * E), EdgeMetric::Quasihyperbolic)
            .unwrap();
        assert!(r.value >= 2.0 - 1e-6 && r.value <= 2.0 * 1.06, "{}", r.value);
        let poly = r.polyline().unwrap();
        let li = line_integral(g.domain(), &poly, Density::ReciprocalBoundaryDistance, g.resolution().tau_quad)
            .unwrap();
        assert!((li - r.value).abs() < 1e-9 * r.value.max(1.0));
    }

    #[test]
    fn inner_distance_in_annulus_goes_around() {
        let dom = Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap();
        let g = MetricGraph::build(Arc::new(dom), ResolutionSpec::new(0.05), 0).unwrap();
        let r = graph_geodesic(&g, &Point::xy(0.75, 0.0), &Point::xy(-0.75, 0.0), EdgeMetric::Euclidean)
            .unwrap();
        assert!(r.value > 1.5 * 1.2 && r.value <= 0.75 * PI + 0.5, "{}", r.value);
    }

    #[test]
    fn pairwise_matches_pointwise() {
        let g = MetricGraph::build(Arc::new(Domain::unit_disk()), ResolutionSpec::new(0.1), 0).unwrap();
        let pts = vec![Point::xy(0.1, 0.2), Point::xy(-0.5, 0.3), Point::xy(0.4, -0.6)];
        let m = pairwise_distances(&g, &pts, EdgeMetric::Quasihyperbolic).unwrap();
        for i in 0..3 {
            assert_eq!(m[i][i], 0.0);
            for j in 0..3 {
                assert_eq!(m[i][j], m[j][i]);
                if i != j {
                    let v = graph_geodesic(&g, &pts[i], &pts[j], EdgeMetric::Quasihyperbolic)
                        .unwrap()
                        .value;
                    assert!((v - m[i][j]).abs() < 1e-12 * v, "{v} {}", m[i][j]);
                }
            }
        }
    }

    #[test]
    fn staircase_envelope() {
        let env = PsiEnvelope::from_records(vec![(1.0, 2.0), (0.5, 3.0), (2.0, 1.0), (3.0, 4.0)], 0);
        assert_eq!(env.knots, vec![(0.5, 3.0), (1.0, 3.0), (2.0, 3.0), (3.0, 4.0)]);
        assert_eq!(env.eval(0.7), Some(3.0));
        assert_eq!(env.eval(2.5), Some(4.0));
        assert_eq!(env.eval(5.0), None);
    }

    #[test]
    fn ladder_records_decreasing_h() {
        let ladder = MetricLadder::new(
            Arc::new(Domain::unit_disk()),
            ResolutionSpec::new(0.2),
            0,
            ConvergencePolicy::default(),
        )
        .unwrap();
        let r = quasihyperbolic_distance(&ladder, &Point::xy(0.0, 0.0), &Point::xy(0.5, 0.0)).unwrap();
        assert!(!r.estimates_at_resolutions.is_empty());
        assert!(r.estimates_at_resolutions.windows(2).all(|w| w[0].0 > w[1].0));
        assert!(r.value >= 2f64.ln() - 1e-9);
        let zero = quasihyperbolic_distance(&ladder, &Point::xy(0.1, 0.0), &Point::xy(0.1, 0.0)).unwrap();
        assert_eq!(zero.value, 0.0);
    }
}
