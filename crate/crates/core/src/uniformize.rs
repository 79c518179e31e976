//! Conformal deformation of `(D, k)` by the density `e^{−ε k(·, w)}`: the
//! metric `d_ε`, a discrete boundary shell, visual metrics on it, and the
//! comparison diagnostics.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{dijkstra, EdgeMetric, MetricGraph, Snap};
use crate::metric::{graph_geodesic, pairwise_search, search_between, GeodesicResult};

/// `∫ e^{−ε k} ds_k` over an edge of quasihyperbolic length `len` whose
/// endpoints sit at `k = ka` and `k = kb`, by Simpson's rule in `k`-arclength.
fn bhk_weight(len: f64, ka: f64, kb: f64, eps: f64) -> f64 {
    len * ((-eps * ka).exp() + 4.0 * (-eps * 0.5 * (ka + kb)).exp() + (-eps * kb).exp()) / 6.0
}

/// A `k`-weighted graph re-weighted by `ρ_ε = e^{−ε k(·, w)}`.
#[derive(Clone, Debug)]
pub struct UniformizedSpace {
    graph: Arc<MetricGraph>,
    base: Point,
    base_snap: Snap,
    epsilon: f64,
    k_to_w: Vec<f64>,
    eps_edges: Vec<f64>,
}

impl UniformizedSpace {
    pub fn new(graph: Arc<MetricGraph>, base: Point, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon {
                epsilon,
                bound: f64::INFINITY,
            });
        }
        let base_snap = graph.snap(&base)?;
        let qh = graph.edge_weights(EdgeMetric::Quasihyperbolic);
        let tree = dijkstra(
            &graph,
            qh,
            &base_snap.weights(EdgeMetric::Quasihyperbolic),
            None,
        );
        if tree.dist.iter().any(|d| !d.is_finite()) {
            return Err(Error::Unreachable);
        }
        let k_to_w = tree.dist;
        let eps_edges = graph
            .edges()
            .iter()
            .zip(qh)
            .map(|(&(u, v), &l)| bhk_weight(l, k_to_w[u as usize], k_to_w[v as usize], epsilon))
            .collect();
        Ok(Self {
            graph,
            base,
            base_snap,
            epsilon,
            k_to_w,
            eps_edges,
        })
    }

    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `k(node, w)` for every graph node.
    pub fn k_to_base(&self) -> &[f64] {
        &self.k_to_w
    }

    /// `d_ε` weight of every graph edge.
    pub fn eps_edge_weights(&self) -> &[f64] {
        &self.eps_edges
    }

    fn locate(&self, x: &Point) -> Result<(f64, Snap)> {
        let s = self.graph.snap(x)?;
        if *x == self.base {
            return Ok((0.0, s));
        }
        let via = s
            .connectors
            .iter()
            .map(|&(n, q, _)| q + self.k_to_w[n as usize])
            .fold(f64::INFINITY, f64::min);
        let direct = self
            .graph
            .direct_segment(&s, &self.base_snap)
            .map_or(f64::INFINITY, |w| w.0);
        let k = via.min(direct);
        if !k.is_finite() {
            return Err(Error::Unreachable);
        }
        Ok((k, s))
    }

    /// `k(x, w)` through the graph.
    pub fn k_to(&self, x: &Point) -> Result<f64> {
        self.locate(x).map(|p| p.0)
    }

    /// `ρ_ε(x) = e^{−ε k(x, w)}`.
    pub fn bhk_density(&self, x: &Point) -> Result<f64> {
        Ok((-self.epsilon * self.k_to(x)?).exp())
    }

    fn eps_connectors(&self, k: f64, s: &Snap) -> Vec<(u32, f64)> {
        s.connectors
            .iter()
            .map(|&(n, q, _)| (n, bhk_weight(q, k, self.k_to_w[n as usize], self.epsilon)))
            .collect()
    }

    /// `d_ε(x, y)` with its discrete geodesic.
    pub fn uniformized_distance(&self, x: &Point, y: &Point) -> Result<GeodesicResult> {
        if x == y {
            self.locate(x)?;
            return Ok(GeodesicResult::trivial(x, self.graph.resolution().h));
        }
        let (kx, sx) = self.locate(x)?;
        let (ky, sy) = self.locate(y)?;
        let direct = self
            .graph
            .direct_segment(&sx, &sy)
            .map(|w| bhk_weight(w.0, kx, ky, self.epsilon));
        search_between(
            &self.graph,
            &self.eps_edges,
            (x, &self.eps_connectors(kx, &sx)),
            (y, &self.eps_connectors(ky, &sy)),
            direct,
        )
    }

    /// All-pairs `d_ε` over sample points.
    pub fn pairwise(&self, points: &[Point]) -> Result<Vec<Vec<f64>>> {
        let located: Vec<(f64, Snap)> = points.iter().map(|p| self.locate(p)).collect::<Result<_>>()?;
        let conn: Vec<Vec<(u32, f64)>> = located
            .iter()
            .map(|(k, s)| self.eps_connectors(*k, s))
            .collect();
        pairwise_search(&self.graph, &self.eps_edges, points, &conn, |i, j| {
            let (ki, si) = &located[i];
            let (kj, sj) = &located[j];
            self.graph
                .direct_segment(si, sj)
                .map(|w| bhk_weight(w.0, *ki, *kj, self.epsilon))
        })
    }

    /// `d_ε` from each listed node to every node.
    fn node_rows(&self, nodes: &[u32], weights: &[f64]) -> Vec<Vec<f64>> {
        nodes
            .par_iter()
            .map(|&n| dijkstra(&self.graph, weights, &[(n, 0.0)], None).dist)
            .collect()
    }
}

/// Largest sampled `d_ε` against the bound `2/ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub max: f64,
    pub pair: (usize, usize),
    pub bound: f64,
    pub points: usize,
}

pub fn diameter_estimate(us: &UniformizedSpace, points: &[Point]) -> Result<DiameterEstimate> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            need: 2,
            got: points.len(),
        });
    }
    let m = us.pairwise(points)?;
    let mut max = 0.0;
    let mut pair = (0, 0);
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate().skip(i + 1) {
            if v > max {
                max = v;
                pair = (i, j);
            }
        }
    }
    Ok(DiameterEstimate {
        max,
        pair,
        bound: 2.0 / us.epsilon,
        points: points.len(),
    })
}

/// Per-pair terms of the comparison ratio
/// `ε^{-1} e^{−ε(x|y)_w} min{1, ε k(x, y)} / d_ε(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub k_xy: f64,
    pub product: f64,
    pub d_eps: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEstimate {
    pub c_low: f64,
    pub c_high: f64,
    /// `c_high / c_low`.
    pub spread: f64,
    /// One entry per input pair; `None` for coincident pairs.
    pub per_pair: Vec<Option<ComparisonRecord>>,
}

pub fn comparison_constant(
    us: &UniformizedSpace,
    pairs: &[(Point, Point)],
) -> Result<ComparisonEstimate> {
    if pairs.len() < 10 {
        return Err(Error::TooFewPoints {
            need: 10,
            got: pairs.len(),
        });
    }
    let eps = us.epsilon;
    let per_pair: Vec<Option<ComparisonRecord>> = pairs
        .par_iter()
        .map(|(x, y)| {
            if x == y {
                return Ok(None);
            }
            let k_xy = graph_geodesic(&us.graph, x, y, EdgeMetric::Quasihyperbolic)?.value;
            let product = 0.5 * (us.k_to(x)? + us.k_to(y)? - k_xy);
            let d_eps = us.uniformized_distance(x, y)?.value;
            let ratio = (-eps * product).exp() * (eps * k_xy).min(1.0) / (eps * d_eps);
            Ok(Some(ComparisonRecord {
                k_xy,
                product,
                d_eps,
                ratio,
            }))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = per_pair.iter().flatten().map(|r| r.ratio).collect();
    if ratios.is_empty() {
        return Err(Error::TooFewPoints { need: 1, got: 0 });
    }
    let c_low = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let c_high = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ComparisonEstimate {
        c_low,
        c_high,
        spread: c_high / c_low,
        per_pair,
    })
}

/// Comparison ratios for basepoints `w` and `w′` on the same pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasepointSensitivity {
    pub k_between_bases: f64,
    /// Largest per-pair factor between the two ratios.
    pub max_factor: f64,
    /// `e^{2ε k(w, w′)}`.
    pub bound: f64,
    pub spread_w: f64,
    pub spread_w2: f64,
}

pub fn basepoint_sensitivity(
    a: &UniformizedSpace,
    b: &UniformizedSpace,
    pairs: &[(Point, Point)],
) -> Result<BasepointSensitivity> {
    if a.epsilon != b.epsilon || !Arc::ptr_eq(&a.graph, &b.graph) {
        return Err(Error::InvalidParameter(
            "basepoint comparison needs one graph and one epsilon".into(),
        ));
    }
    let ca = comparison_constant(a, pairs)?;
    let cb = comparison_constant(b, pairs)?;
    let max_factor = ca
        .per_pair
        .iter()
        .zip(&cb.per_pair)
        .filter_map(|(p, q)| Some((p.as_ref()?.ratio, q.as_ref()?.ratio)))
        .map(|(p, q)| (p / q).max(q / p))
        .fold(1.0, f64::max);
    let k = a.k_to(&b.base)?;
    Ok(BasepointSensitivity {
        k_between_bases: k,
        max_factor,
        bound: (2.0 * a.epsilon * k).exp(),
        spread_w: ca.spread,
        spread_w2: cb.spread,
    })
}

/// How shell nodes are picked and grouped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShellOptions {
    /// Lower end `t` of the depth band `[t, 3t]`; defaults to half the finest
    /// cell size of the graph.
    pub depth: Option<f64>,
    /// At most this many shell nodes, chosen by farthest-point sampling.
    pub cap: usize,
    /// Shell points `i`, `j` are linked when `d_ε(i, j) ≤ factor × g`, with `g`
    /// the larger of their nearest-shell-neighbour `d_ε` gaps.
    pub cluster_factor: f64,
}

impl Default for ShellOptions {
    fn default() -> Self {
        Self {
            depth: None,
            cap: 4096,
            cluster_factor: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellPoint {
    pub node: u32,
    pub point: Point,
    pub shell_depth: f64,
    pub limit_tag: usize,
    /// `d_ε` to the nearest other shell point.
    pub gap: f64,
}

/// Near-boundary nodes grouped into approximate points of `∂_ε D`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryShell {
    pub points: Vec<ShellPoint>,
    pub band: (f64, f64),
    /// `factor × median gap`, the typical link length.
    pub cluster_radius: f64,
    /// Longest link actually allowed.
    pub max_link: f64,
    pub clusters: usize,
}

impl BoundaryShell {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of the shell points carrying `tag`.
    pub fn members(&self, tag: usize) -> Vec<usize> {
        (0..self.points.len())
            .filter(|&i| self.points[i].limit_tag == tag)
            .collect()
    }

    /// Shell graph nodes, in shell order.
    pub fn nodes(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.node).collect()
    }
}

/// Deterministic farthest-point subsample in Euclidean distance, started from
/// the first entry. Returned indices are ascending.
fn farthest_points(points: &[&Point], cap: usize) -> Vec<usize> {
    if points.len() <= cap {
        return (0..points.len()).collect();
    }
    let mut chosen = vec![0usize];
    let mut gap: Vec<f64> = points.iter().map(|p| p.dist(points[0])).collect();
    while chosen.len() < cap {
        let mut best = 0;
        for i in 1..points.len() {
            if gap[i] > gap[best] {
                best = i;
            }
        }
        chosen.push(best);
        for i in 0..points.len() {
            gap[i] = gap[i].min(points[i].dist(points[best]));
        }
    }
    chosen.sort_unstable();
    chosen
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Selects near-boundary nodes and groups them by `d_ε` linkage.
pub fn boundary_shell(us: &UniformizedSpace, opts: &ShellOptions) -> Result<BoundaryShell> {
    let g = &us.graph;
    let finest = (0..g.node_count())
        .map(|i| g.spacing(i))
        .fold(f64::INFINITY, f64::min);
    let t = opts.depth.unwrap_or(0.5 * finest).max(g.domain().min_clip());
    let band = (t, 3.0 * t);
    let band_nodes: Vec<u32> = (0..g.node_count())
        .filter(|&i| {
            let d = g.depths()[i];
            d >= band.0 && d <= band.1 && !g.in_truncation_shell(i)
        })
        .map(|i| i as u32)
        .collect();
    if band_nodes.len() < 2 {
        return Err(Error::EmptyShell);
    }
    let pts: Vec<&Point> = band_nodes.iter().map(|&n| g.node(n as usize)).collect();
    let pick: Vec<u32> = farthest_points(&pts, opts.cap.max(2))
        .into_iter()
        .map(|i| band_nodes[i])
        .collect();
    let n = pick.len();
    let w = &us.eps_edges;
    // shell points within `bound` of node `v`, by increasing d_ε
    let reach = |v: u32, bound: f64| -> Vec<(usize, f64)> {
        let tree = dijkstra(g, w, &[(v, 0.0)], Some(bound));
        let mut out: Vec<(usize, f64)> = pick
            .iter()
            .enumerate()
            .filter(|&(_, &u)| u != v && tree.dist[u as usize] <= bound)
            .map(|(j, &u)| (j, tree.dist[u as usize]))
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    };
    let gaps: Vec<f64> = pick
        .par_iter()
        .map(|&v| {
            let mut bound = g
                .neighbors(v as usize)
                .iter()
                .map(|nb| w[nb.1 as usize])
                .fold(0.0, f64::max)
                * 4.0;
            loop {
                if let Some(&(_, d)) = reach(v, bound).first() {
                    return Ok(d);
                }
                if !bound.is_finite() {
                    return Err(Error::Unreachable);
                }
                bound *= 4.0;
            }
        })
        .collect::<Result<_>>()?;
    let links: Vec<Vec<usize>> = pick
        .par_iter()
        .zip(&gaps)
        .map(|(&v, &gap)| {
            reach(v, opts.cluster_factor * gap)
                .into_iter()
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for (i, js) in links.iter().enumerate() {
        for &j in js {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut tag_of_root = std::collections::HashMap::new();
    let mut points = Vec::with_capacity(n);
    for (i, &node) in pick.iter().enumerate() {
        let r = find(&mut parent, i);
        let next = tag_of_root.len();
        let tag = *tag_of_root.entry(r).or_insert(next);
        points.push(ShellPoint {
            node,
            point: g.node(node as usize).clone(),
            shell_depth: g.depths()[node as usize],
            limit_tag: tag,
            gap: gaps[i],
        });
    }
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(BoundaryShell {
        points,
        band,
        cluster_radius: opts.cluster_factor * sorted[n / 2],
        max_link: opts.cluster_factor * sorted[n - 1],
        clusters: tag_of_root.len(),
    })
}

/// Visual metric `ρ = e^{−ε_v (ξ|ζ)_w}` and its chain metric on shell
/// representatives and on whole clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisualMetric {
    pub eps_v: f64,
    /// `min{1, 1/(5δ_w)}`; `eps_v` must lie strictly below it.
    pub eps_bound: f64,
    /// `max min{(x|y)_w, (y|z)_w} − (x|z)_w` over representative triples.
    pub delta_w: f64,
    /// Shell indices of the representatives, grouped by cluster.
    pub reps: Vec<usize>,
    pub rep_tags: Vec<usize>,
    /// Row-major `(x|y)_w` between representatives (diagonal: `k(x, w)`).
    pub products: Vec<f64>,
    pub rho: Vec<f64>,
    pub chain: Vec<f64>,
    pub clusters: usize,
    pub cluster_rho: Vec<f64>,
    pub cluster_chain: Vec<f64>,
}

fn chain_closure(n: usize, rho: &[f64]) -> Vec<f64> {
    let mut c = rho.to_vec();
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = c[i * n + m] + c[m * n + j];
                if v < c[i * n + j] {
                    c[i * n + j] = v;
                }
            }
        }
    }
    c
}

impl VisualMetric {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.reps.len() + j]
    }

    pub fn chain(&self, i: usize, j: usize) -> f64 {
        self.chain[i * self.reps.len() + j]
    }

    /// `(ρ, chain)` between two clusters.
    pub fn cluster_pair(&self, a: usize, b: usize) -> Result<(f64, f64)> {
        if a >= self.clusters || b >= self.clusters {
            return Err(Error::EmptyCluster);
        }
        let k = a * self.clusters + b;
        Ok((self.cluster_rho[k], self.cluster_chain[k]))
    }

    /// Pairs breaking `ρ/2 − tol ≤ chain ≤ ρ + tol`, at representative level
    /// then at cluster level: `(level, i, j, ρ, chain)` with level 0 or 1.
    pub fn sandwich_violations(&self, tol: f64) -> Vec<(u8, usize, usize, f64, f64)> {
        let mut out = Vec::new();
        let mut scan = |level: u8, n: usize, rho: &[f64], chain: &[f64]| {
            for i in 0..n {
                for j in (i + 1)..n {
                    let (r, c) = (rho[i * n + j], chain[i * n + j]);
                    if c < 0.5 * r - tol || c > r + tol {
                        out.push((level, i, j, r, c));
                    }
                }
            }
        };
        scan(0, self.reps.len(), &self.rho, &self.chain);
        scan(1, self.clusters, &self.cluster_rho, &self.cluster_chain);
        out
    }

    /// Number of pairs checked by [`Self::sandwich_violations`].
    pub fn pair_count(&self) -> usize {
        let n = self.reps.len();
        let c = self.clusters;
        n * n.saturating_sub(1) / 2 + c * c.saturating_sub(1) / 2
    }
}

/// Builds the visual metric on up to `reps_per_cluster` representatives of
/// each shell cluster. Extended products between clusters are the minimum
/// over representative pairs. `eps_v = None` picks `0.9 × eps_bound`.
pub fn visual_metric(
    us: &UniformizedSpace,
    shell: &BoundaryShell,
    eps_v: Option<f64>,
    reps_per_cluster: usize,
) -> Result<VisualMetric> {
    if shell.is_empty() {
        return Err(Error::EmptyShell);
    }
    let mut reps = Vec::new();
    let mut rep_tags = Vec::new();
    for tag in 0..shell.clusters {
        let members = shell.members(tag);
        if members.is_empty() {
            return Err(Error::EmptyCluster);
        }
        let pts: Vec<&Point> = members.iter().map(|&i| &shell.points[i].point).collect();
        for k in farthest_points(&pts, reps_per_cluster.max(1)) {
            reps.push(members[k]);
            rep_tags.push(tag);
        }
    }
    let n = reps.len();
    let nodes: Vec<u32> = reps.iter().map(|&i| shell.points[i].node).collect();
    let qh = us.graph.edge_weights(EdgeMetric::Quasihyperbolic);
    let rows = us.node_rows(&nodes, qh);
    let kw: Vec<f64> = nodes.iter().map(|&v| us.k_to_w[v as usize]).collect();
    let mut products = vec![0.0; n * n];
    for i in 0..n {
        products[i * n + i] = kw[i];
        for j in (i + 1)..n {
            // paths may also pass through w, which sits off the node set
            let k = rows[i][nodes[j] as usize]
                .min(rows[j][nodes[i] as usize])
                .min(kw[i] + kw[j]);
            let p = 0.5 * (kw[i] + kw[j] - k);
            products[i * n + j] = p;
            products[j * n + i] = p;
        }
    }
    let p = |i: usize, j: usize| products[i * n + j];
    let mut delta_w: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for l in 0..n {
                if l == i || l == j {
                    continue;
                }
                delta_w = delta_w.max(p(i, j).min(p(j, l)) - p(i, l));
            }
        }
    }
    let eps_bound = if delta_w > 0.0 {
        (1.0 / (5.0 * delta_w)).min(1.0)
    } else {
        1.0
    };
    let eps_v = eps_v.unwrap_or(0.9 * eps_bound);
    if !(eps_v > 0.0 && eps_v < eps_bound) {
        return Err(Error::InvalidEpsilon {
            epsilon: eps_v,
            bound: eps_bound,
        });
    }
    let mut rho = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                rho[i * n + j] = (-eps_v * p(i, j)).exp();
            }
        }
    }
    let chain = chain_closure(n, &rho);
    let c = shell.clusters;
    let mut cluster_rho = vec![0.0f64; c * c];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (rep_tags[i], rep_tags[j]);
            if a != b {
                let k = a * c + b;
                cluster_rho[k] = cluster_rho[k].max(rho[i * n + j]);
            }
        }
    }
    let cluster_chain = chain_closure(c, &cluster_rho);
    Ok(VisualMetric {
        eps_v,
        eps_bound,
        delta_w,
        reps,
        rep_tags,
        products,
        rho,
        chain,
        clusters: c,
        cluster_rho,
        cluster_chain,
    })
}

/// Cigar ratios of `d_ε` geodesics against `d_ε`-distance to the shell band,
/// the discrete stand-in for `d_ε(z, ∂_ε D)`. The length ratio of a geodesic
/// is 1 by construction and is not reported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsUniformity {
    pub a_cigar: f64,
    pub pairs_used: usize,
    pub per_pair: Vec<f64>,
}

pub fn eps_uniformity(
    us: &UniformizedSpace,
    shell: &BoundaryShell,
    pairs: &[(Point, Point)],
) -> Result<EpsUniformity> {
    // each shell node starts at its own height above the boundary: with
    // density ∝ d^ε near ∂D, the integral of the density down to ∂D is ρ·d/(1+ε)
    let eps = us.epsilon;
    let sources: Vec<(u32, f64)> = shell
        .points
        .iter()
        .map(|p| (p.node, (-eps * us.k_to_w[p.node as usize]).exp() * p.shell_depth / (1.0 + eps)))
        .collect();
    let to_shell = dijkstra(&us.graph, &us.eps_edges, &sources, None).dist;
    let g = &us.graph;
    let per_pair: Vec<f64> = pairs
        .par_iter()
        .filter(|(x, y)| x != y)
        .map(|(x, y)| {
            let geo = us.uniformized_distance(x, y)?;
            let nodes = &geo.nodes;
            if nodes.is_empty() {
                return Ok(0.0);
            }
            // d_ε arclength at each path node, measured from x
            let mut cum = Vec::with_capacity(nodes.len());
            let (kx, sx) = us.locate(x)?;
            let first = us
                .eps_connectors(kx, &sx)
                .into_iter()
                .find(|c| c.0 == nodes[0])
                .map_or(0.0, |c| c.1);
            cum.push(first);
            for w in nodes.windows(2) {
                let (a, b) = (w[0] as usize, w[1] as usize);
                let e = g
                    .neighbors(a)
                    .iter()
                    .find(|nb| nb.0 as usize == b)
                    .map(|nb| us.eps_edges[nb.1 as usize])
                    .ok_or(Error::Unreachable)?;
                cum.push(cum.last().unwrap() + e);
            }
            let total = geo.value;
            Ok(nodes
                .iter()
                .zip(&cum)
                .map(|(&v, &s)| s.min(total - s).max(0.0) / to_shell[v as usize].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    Ok(EpsUniformity {
        a_cigar: per_pair.iter().copied().fold(0.0, f64::max),
        pairs_used: per_pair.len(),
        per_pair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::graph::ResolutionSpec;

    fn disk(h: f64, eps: f64) -> UniformizedSpace {
        let g = MetricGraph::build(Arc::new(Domain::unit_disk()), ResolutionSpec::new(h), 0).unwrap();
        UniformizedSpace::new(Arc::new(g), Point::xy(0.0, 0.0), eps).unwrap()
    }

    #[test]
    fn density_at_base_and_decay() {
        let us = disk(0.2, 0.2);
        assert_eq!(us.bhk_density(&Point::xy(0.0, 0.0)).unwrap(), 1.0);
        let mut last = 1.0;
        for r in [0.1, 0.3, 0.6, 0.9, 0.99] {
            let v = us.bhk_density(&Point::xy(r, 0.0)).unwrap();
            assert!(v > 0.0 && v <= last);
            last = v;
        }
        assert!(matches!(
            UniformizedSpace::new(us.graph().clone(), Point::xy(0.0, 0.0), 0.0),
            Err(Error::InvalidEpsilon { .. })
        ));
    }

    #[test]
    fn simpson_weight_on_tight_edge() {
        // along a ray k grows by the edge length: exact value (e^{-εa} − e^{-εb})/ε
        let (eps, a, l): (f64, f64, f64) = (0.5, 2.0, 0.3);
        let exact = ((-eps * a).exp() - (-eps * (a + l)).exp()) / eps;
        assert!((bhk_weight(l, a, a + l, eps) - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn edge_weights_respect_density_bound() {
        let us = disk(0.2, 0.5);
        let qh = us.graph().edge_weights(EdgeMetric::Quasihyperbolic);
        for (e, &(u, v)) in us.graph().edges().iter().enumerate() {
            let m = us.k_to_base()[u as usize].min(us.k_to_base()[v as usize]);
            let bound = (-0.5 * m + 0.5 * qh[e]).exp() * qh[e];
            assert!(us.eps_edge_weights()[e] <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn d_eps_is_dominated_by_k() {
        let us = disk(0.2, 0.5);
        let x = Point::xy(0.7, 0.1);
        let y = Point::xy(-0.5, -0.6);
        let de = us.uniformized_distance(&x, &y).unwrap().value;
        let k = graph_geodesic(us.graph(), &x, &y, EdgeMetric::Quasihyperbolic).unwrap().value;
        assert!(de > 0.0 && de <= k);
        assert_eq!(us.uniformized_distance(&x, &x).unwrap().value, 0.0);
    }

    #[test]
    fn disk_shell_is_one_cluster_within_diameter_bound() {
        let us = disk(0.2, 0.5);
        let shell = boundary_shell(&us, &ShellOptions::default()).unwrap();
        assert_eq!(shell.clusters, 1);
        let pts: Vec<Point> = shell.points.iter().step_by(8).map(|p| p.point.clone()).collect();
        let est = diameter_estimate(&us, &pts).unwrap();
        assert!(est.max <= est.bound * 1.05, "{}", est.max);
    }

    #[test]
    fn chain_closure_is_shortest_path() {
        let rho = vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        let c = chain_closure(3, &rho);
        assert_eq!(c[2], 2.0);
        assert_eq!(c[1], 1.0);
    }
}
