//! Adaptive sampling of a domain into a weighted graph.
//!
//! The bounding box is covered by a base grid of spacing `h`. A cell is split
//! while its size exceeds `spacing_ratio · d(center)` and the refinement floor
//! `min_spacing` allows, which gives a Whitney-type decomposition: cell size is
//! comparable to the distance to `∂D`. Leaf centers become nodes. Two nodes are
//! joined when they lie within `stencil_radius` times their mean spacing and the
//! segment between them stays in `D`; every edge carries its Euclidean length and
//! its quasihyperbolic length `∫ ds/d`.

mod search;

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segment_weights, Domain, Point, DEFAULT_TAU_QUAD};

pub(crate) use search::{dijkstra, shortest_path};

const MAX_GRAPH_DIM: usize = 4;
/// Levels searched on either side of a node's own level when looking for neighbours.
const LEVEL_REACH: u8 = 4;

type CellKey = (u8, [i64; MAX_GRAPH_DIM]);

/// Resolution parameters of a [`MetricGraph`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolutionSpec {
    /// Base grid spacing.
    pub h: f64,
    /// Cells are refined until `size <= spacing_ratio · d(center)`.
    pub spacing_ratio: f64,
    /// Refinement floor; cells are never split below this size.
    pub min_spacing: f64,
    /// Edge reach in units of the mean local spacing of the two endpoints.
    /// `None` picks 3.2 in the plane and 2.3 in higher dimensions.
    pub stencil_radius: Option<f64>,
    /// Query points are wired to nodes within this many local spacings.
    pub snap_radius: f64,
    /// Relative tolerance of the edge quadrature.
    pub tau_quad: f64,
    /// Optional node jitter as a fraction of the local spacing (seeded).
    pub jitter: f64,
}

impl Default for ResolutionSpec {
    fn default() -> Self {
        Self::new(0.1)
    }
}

impl ResolutionSpec {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            spacing_ratio: 0.4,
            min_spacing: h / 16.0,
            stencil_radius: None,
            snap_radius: 2.0,
            tau_quad: DEFAULT_TAU_QUAD,
            jitter: 0.0,
        }
    }

    pub fn with_min_spacing(mut self, s: f64) -> Self {
        self.min_spacing = s;
        self
    }

    /// The spec at refinement level `level`: `h`, the spacing ratio and the floor
    /// all divided by `2^level`. Halving `h` alone would leave the Whitney cap
    /// `spacing_ratio · d` in charge wherever it is the tighter bound.
    pub fn refined(&self, level: u32) -> Self {
        let f = 2f64.powi(level as i32);
        Self {
            h: self.h / f,
            spacing_ratio: self.spacing_ratio / f,
            min_spacing: self.min_spacing / f,
            ..self.clone()
        }
    }

    pub fn stencil_for(&self, dim: usize) -> f64 {
        self.stencil_radius
            .unwrap_or(if dim <= 2 { 3.2 } else { 2.3 })
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive")))
            }
        };
        pos(self.h, "h")?;
        pos(self.spacing_ratio, "spacing_ratio")?;
        pos(self.min_spacing, "min_spacing")?;
        pos(self.snap_radius, "snap_radius")?;
        pos(self.tau_quad, "tau_quad")?;
        if let Some(r) = self.stencil_radius {
            if !(r >= 1.0) {
                return Err(Error::InvalidParameter("stencil_radius must be >= 1".into()));
            }
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return Err(Error::InvalidParameter("jitter must lie in [0, 0.5)".into()));
        }
        Ok(())
    }

    /// Local spacing the refinement rule assigns at boundary distance `d`,
    /// returned as `(level, spacing)`.
    pub(crate) fn level_for_depth(&self, d: f64) -> (u8, f64) {
        let mut level = 0u8;
        let mut s = self.h;
        while s > self.spacing_ratio * d && s / 2.0 >= self.min_spacing && level < 60 {
            s /= 2.0;
            level += 1;
        }
        (level, s)
    }
}

/// Edge weight families stored on every edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMetric {
    /// `∫ ds/d`, the quasihyperbolic length.
    Quasihyperbolic,
    /// Euclidean length, for the inner metric.
    Euclidean,
}

/// A query point wired into the graph.
#[derive(Clone, Debug)]
pub struct Snap {
    pub point: Point,
    pub depth: f64,
    pub spacing: f64,
    /// `(node, quasihyperbolic weight, euclidean length)` of each connector edge.
    pub connectors: Vec<(u32, f64, f64)>,
}

impl Snap {
    pub(crate) fn weights(&self, metric: EdgeMetric) -> Vec<(u32, f64)> {
        self.connectors
            .iter()
            .map(|&(n, qh, len)| {
                (
                    n,
                    match metric {
                        EdgeMetric::Quasihyperbolic => qh,
                        EdgeMetric::Euclidean => len,
                    },
                )
            })
            .collect()
    }
}

/// The discretisation on which `k_D`, `d_I` and `d_ε` shortest paths run.
#[derive(Clone, Debug)]
pub struct MetricGraph {
    domain: Arc<Domain>,
    res: ResolutionSpec,
    seed: u64,
    nodes: Vec<Point>,
    depth: Vec<f64>,
    level: Vec<u8>,
    index: HashMap<CellKey, u32>,
    max_level: u8,
    /// Undirected edges `(u, v)` with `u < v`.
    edges: Vec<(u32, u32)>,
    edge_qh: Vec<f64>,
    edge_len: Vec<f64>,
    /// CSR adjacency: neighbours of `i` are `adj[offsets[i]..offsets[i + 1]]`
    /// as `(neighbour, undirected edge id)`.
    offsets: Vec<usize>,
    adj: Vec<(u32, u32)>,
}

struct Leaf {
    key: CellKey,
    center: Point,
    depth: f64,
}

impl MetricGraph {
    /// Samples `domain` at resolution `res`. Deterministic in `(domain, res, seed)`.
    pub fn build(domain: Arc<Domain>, res: ResolutionSpec, seed: u64) -> Result<Self> {
        res.validate()?;
        let dim = domain.dim();
        if dim > MAX_GRAPH_DIM {
            return Err(Error::InvalidParameter(format!(
                "graphs are supported up to dimension {MAX_GRAPH_DIM}"
            )));
        }
        let bbox = domain.bbox().clone();
        let counts: Vec<i64> = bbox
            .min
            .iter()
            .zip(&bbox.max)
            .map(|(lo, hi)| (((hi - lo) / res.h) - 1e-9).ceil().max(1.0) as i64)
            .collect();
        let total: i64 = counts.iter().product();
        let base: Vec<[i64; MAX_GRAPH_DIM]> = (0..total)
            .map(|mut lin| {
                let mut k = [0i64; MAX_GRAPH_DIM];
                for (a, c) in counts.iter().enumerate() {
                    k[a] = lin % c;
                    lin /= c;
                }
                k
            })
            .collect();

        let leaves: Vec<Leaf> = base
            .par_iter()
            .map(|k| refine_cell(&domain, &res, (0, *k)))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();

        let clip = domain.min_clip();
        let mut nodes = Vec::new();
        let mut depth = Vec::new();
        let mut level = Vec::new();
        let mut index = HashMap::new();
        let mut max_level = 0u8;
        for leaf in leaves {
            if leaf.depth > clip && bbox.contains(&leaf.center) {
                let p = if res.jitter > 0.0 {
                    jittered(&domain, &res, seed, &leaf)
                } else {
                    leaf.center
                };
                let d = domain.signed_distance(&p);
                if d <= clip {
                    continue;
                }
                index.insert(leaf.key, nodes.len() as u32);
                max_level = max_level.max(leaf.key.0);
                nodes.push(p);
                depth.push(d);
                level.push(leaf.key.0);
            }
        }
        if nodes.is_empty() {
            return Err(Error::EmptyDomainSample);
        }

        let mut g = Self {
            domain,
            res,
            seed,
            nodes,
            depth,
            level,
            index,
            max_level,
            edges: Vec::new(),
            edge_qh: Vec::new(),
            edge_len: Vec::new(),
            offsets: Vec::new(),
            adj: Vec::new(),
        };
        g.build_edges();
        g.check_connected()?;
        Ok(g)
    }

    fn build_edges(&mut self) {
        let stencil = self.res.stencil_for(self.domain.dim());
        let per_node: Vec<Vec<(u32, f64, f64)>> = (0..self.nodes.len())
            .into_par_iter()
            .map(|i| {
                let li = self.level[i];
                let si = self.spacing_of_level(li);
                let lo = li.saturating_sub(LEVEL_REACH);
                let mut found = Vec::new();
                for lj in lo..=li {
                    let sj = self.spacing_of_level(lj);
                    let r = stencil * 0.5 * (si + sj);
                    self.for_each_in_box(&self.nodes[i], r, lj, |j| {
                        if lj == li && j as usize <= i {
                            return;
                        }
                        if self.nodes[i].dist(&self.nodes[j as usize]) <= r {
                            found.push(j);
                        }
                    });
                }
                found.sort_unstable();
                found
                    .into_iter()
                    .filter_map(|j| {
                        segment_weights(
                            &self.domain,
                            &self.nodes[i],
                            &self.nodes[j as usize],
                            self.res.tau_quad,
                        )
                        .ok()
                        .map(|(qh, len)| (j, qh, len))
                    })
                    .collect()
            })
            .collect();

        let mut edges = Vec::new();
        let mut qh = Vec::new();
        let mut len = Vec::new();
        for (i, list) in per_node.into_iter().enumerate() {
            for (j, q, l) in list {
                let (u, v) = if (i as u32) < j { (i as u32, j) } else { (j, i as u32) };
                edges.push((u, v));
                qh.push(q);
                len.push(l);
            }
        }
        // canonical edge order, independent of discovery order
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_unstable_by_key(|&e| edges[e]);
        self.edges = order.iter().map(|&e| edges[e]).collect();
        self.edge_qh = order.iter().map(|&e| qh[e]).collect();
        self.edge_len = order.iter().map(|&e| len[e]).collect();

        let n = self.nodes.len();
        let mut deg = vec![0usize; n];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0u32, 0u32); offsets[n]];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            adj[fill[u as usize]] = (v, e as u32);
            fill[u as usize] += 1;
            adj[fill[v as usize]] = (u, e as u32);
            fill[v as usize] += 1;
        }
        for i in 0..n {
            adj[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        self.offsets = offsets;
        self.adj = adj;
    }

    fn check_connected(&self) -> Result<()> {
        let sizes = self.component_sizes();
        if sizes.len() > 1 {
            Err(Error::DisconnectedSample(sizes))
        } else {
            Ok(())
        }
    }

    /// Sizes of the connected components, largest first.
    pub fn component_sizes(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(p: &mut [u32], mut x: u32) -> u32 {
            while p[x as usize] != x {
                p[x as usize] = p[p[x as usize] as usize];
                x = p[x as usize];
            }
            x
        }
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b) as usize] = a.min(b);
            }
        }
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for i in 0..n as u32 {
            *counts.entry(find(&mut parent, i)).or_default() += 1;
        }
        let mut sizes: Vec<usize> = counts.into_values().collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    fn for_each_in_box(&self, x: &Point, r: f64, level: u8, mut f: impl FnMut(u32)) {
        let s = self.spacing_of_level(level);
        let dim = self.domain.dim();
        let bmin = &self.domain.bbox().min;
        let mut lo = [0i64; MAX_GRAPH_DIM];
        let mut hi = [0i64; MAX_GRAPH_DIM];
        for a in 0..dim {
            lo[a] = ((x.coords()[a] - r - bmin[a]) / s).floor() as i64;
            hi[a] = ((x.coords()[a] + r - bmin[a]) / s).floor() as i64;
        }
        let mut key = lo;
        loop {
            if let Some(&j) = self.index.get(&(level, key)) {
                f(j);
            }
            let mut a = 0;
            loop {
                if a == dim {
                    return;
                }
                key[a] += 1;
                if key[a] <= hi[a] {
                    break;
                }
                key[a] = lo[a];
                a += 1;
            }
        }
    }

    #[inline]
    pub(crate) fn spacing_of_level(&self, level: u8) -> f64 {
        self.res.h / 2f64.powi(level as i32)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn resolution(&self) -> &ResolutionSpec {
        &self.res
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Provenance identifier: domain, resolution and seed.
    pub fn id(&self) -> String {
        format!(
            "{}@h={},floor={},seed={}",
            self.domain.id(),
            self.res.h,
            self.res.min_spacing,
            self.seed
        )
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Point {
        &self.nodes[i]
    }

    /// Cached `d(node)` values.
    pub fn depths(&self) -> &[f64] {
        &self.depth
    }

    pub fn spacing(&self, i: usize) -> f64 {
        self.spacing_of_level(self.level[i])
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_weights(&self, metric: EdgeMetric) -> &[f64] {
        match metric {
            EdgeMetric::Quasihyperbolic => &self.edge_qh,
            EdgeMetric::Euclidean => &self.edge_len,
        }
    }

    /// `(neighbour, edge id)` pairs of node `i`.
    pub fn neighbors(&self, i: usize) -> &[(u32, u32)] {
        &self.adj[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Weight of the edge between two adjacent nodes.
    pub fn edge_between(&self, u: u32, v: u32, metric: EdgeMetric) -> Option<f64> {
        self.neighbors(u as usize)
            .binary_search_by_key(&v, |&(n, _)| n)
            .ok()
            .map(|k| self.edge_weights(metric)[self.neighbors(u as usize)[k].1 as usize])
    }

    /// True when node `i` lies in the truncation shell of an unbounded domain.
    pub fn in_truncation_shell(&self, i: usize) -> bool {
        self.domain
            .in_truncation_shell(&self.nodes[i], 2.0 * self.spacing(i))
    }

    /// Wires a query point into the graph.
    pub fn snap(&self, x: &Point) -> Result<Snap> {
        x.check_dim(self.domain.dim())?;
        let d = self.domain.signed_distance(x);
        if d <= self.domain.min_clip() {
            return Err(Error::PointOnBoundary(d));
        }
        let (lx, sx) = self.res.level_for_depth(d);
        let mut radius = self.res.snap_radius * sx;
        for _ in 0..6 {
            let mut cands = Vec::new();
            let lo = lx.saturating_sub(LEVEL_REACH);
            let hi = (lx + 2).min(self.max_level);
            for l in lo..=hi {
                self.for_each_in_box(x, radius, l, |j| {
                    if self.nodes[j as usize].dist(x) <= radius {
                        cands.push(j);
                    }
                });
            }
            cands.sort_unstable();
            let connectors: Vec<(u32, f64, f64)> = cands
                .into_iter()
                .filter_map(|j| {
                    segment_weights(&self.domain, x, &self.nodes[j as usize], self.res.tau_quad)
                        .ok()
                        .map(|(q, l)| (j, q, l))
                })
                .collect();
            if !connectors.is_empty() {
                return Ok(Snap {
                    point: x.clone(),
                    depth: d,
                    spacing: sx,
                    connectors,
                });
            }
            radius *= 2.0;
        }
        Err(Error::Unreachable)
    }

    /// Weights of the straight segment between two snapped points when they are
    /// within snapping reach of each other, or within the smaller of their
    /// boundary distances. Below that scale the cloud resolves a pair by one
    /// or two edges, while the segment stays in a Whitney ball.
    pub(crate) fn direct_segment(&self, a: &Snap, b: &Snap) -> Option<(f64, f64)> {
        let depth = self
            .domain
            .signed_distance(&a.point)
            .min(self.domain.signed_distance(&b.point));
        let reach = (self.res.snap_radius * a.spacing.max(b.spacing)).max(depth);
        if a.point.dist(&b.point) > reach {
            return None;
        }
        segment_weights(&self.domain, &a.point, &b.point, self.res.tau_quad).ok()
    }

    /// Versioned JSON serialisation: node coordinates and depths, edge endpoints
    /// and both weight families.
    pub fn to_json(&self) -> Result<String> {
        let file = GraphFile {
            version: GRAPH_FORMAT_VERSION,
            domain: self.domain.id(),
            resolution: self.res.clone(),
            seed: self.seed,
            nodes: self
                .nodes
                .iter()
                .zip(&self.depth)
                .zip(&self.level)
                .map(|((p, d), l)| NodeRecord {
                    coords: p.coords().to_vec(),
                    depth: *d,
                    level: *l,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(e, &(u, v))| EdgeRecord {
                    u,
                    v,
                    quasihyperbolic: self.edge_qh[e],
                    euclidean: self.edge_len[e],
                })
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }
}

pub const GRAPH_FORMAT_VERSION: u32 = 1;

/// On-disk form of a [`MetricGraph`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphFile {
    pub version: u32,
    pub domain: String,
    pub resolution: ResolutionSpec,
    pub seed: u64,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NodeRecord {
    pub coords: Vec<f64>,
    pub depth: f64,
    pub level: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeRecord {
    pub u: u32,
    pub v: u32,
    pub quasihyperbolic: f64,
    pub euclidean: f64,
}

impl GraphFile {
    pub fn from_json(s: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(s)?;
        if f.version != GRAPH_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported graph format version {}",
                f.version
            )));
        }
        Ok(f)
    }
}

/// Convenience wrapper matching the free-function form of graph construction.
pub fn build_metric_graph(dom: &Domain, res: &ResolutionSpec, seed: u64) -> Result<MetricGraph> {
    MetricGraph::build(Arc::new(dom.clone()), res.clone(), seed)
}

fn cell_center(domain: &Domain, res: &ResolutionSpec, key: &CellKey) -> (Point, f64) {
    let s = res.h / 2f64.powi(key.0 as i32);
    let bmin = &domain.bbox().min;
    let c = (0..domain.dim())
        .map(|a| bmin[a] + (key.1[a] as f64 + 0.5) * s)
        .collect();
    (Point::from_vec(c), s)
}

fn refine_cell(domain: &Domain, res: &ResolutionSpec, root: CellKey) -> Vec<Leaf> {
    let dim = domain.dim();
    let half_diag_factor = (dim as f64).sqrt() / 2.0;
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(key) = stack.pop() {
        let (center, s) = cell_center(domain, res, &key);
        let sd = domain.signed_distance(&center);
        if sd <= -s * half_diag_factor {
            continue;
        }
        let fine_enough = sd > 0.0 && s <= res.spacing_ratio * sd;
        if fine_enough || s / 2.0 < res.min_spacing {
            if sd > 0.0 {
                out.push(Leaf {
                    key,
                    center,
                    depth: sd,
                });
            }
            continue;
        }
        // children pushed in reverse so they pop in lexicographic order
        for bits in (0..(1u32 << dim)).rev() {
            let mut k = [0i64; MAX_GRAPH_DIM];
            for a in 0..dim {
                k[a] = 2 * key.1[a] + ((bits >> a) & 1) as i64;
            }
            stack.push((key.0 + 1, k));
        }
    }
    out
}

fn jittered(domain: &Domain, res: &ResolutionSpec, seed: u64, leaf: &Leaf) -> Point {
    use rand::{Rng, SeedableRng};
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(leaf.key.0 as u64 + 1);
    for c in leaf.key.1 {
        h = (h ^ c as u64).wrapping_mul(0x100_0000_01B3);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(h);
    let s = res.h / 2f64.powi(leaf.key.0 as i32);
    let _ = domain;
    Point::from_vec(
        leaf.center
            .coords()
            .iter()
            .map(|c| c + res.jitter * s * rng.gen_range(-1.0..1.0))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(dom: Domain, h: f64) -> MetricGraph {
        MetricGraph::build(Arc::new(dom), ResolutionSpec::new(h), 0).unwrap()
    }

    #[test]
    fn nodes_respect_the_clip() {
        let g = graph(Domain::unit_disk(), 0.1);
        let clip = g.domain().min_clip();
        assert!(g.depths().iter().all(|&d| d > clip));
        assert!(g.nodes().iter().all(|p| g.domain().contains(p)));
    }

    #[test]
    fn puncture_adds_refinement() {
        let ball = graph(Domain::unit_disk(), 0.1);
        let punctured = graph(Domain::punctured_unit_disk(), 0.1);
        assert!(punctured.node_count() > ball.node_count());
    }

    #[test]
    fn annulus_graph_is_connected() {
        let g = graph(Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap(), 0.05);
        assert_eq!(g.component_sizes().len(), 1);
    }

    #[test]
    fn weights_are_positive_and_symmetric() {
        let g = graph(Domain::punctured_unit_disk(), 0.2);
        for m in [EdgeMetric::Quasihyperbolic, EdgeMetric::Euclidean] {
            assert!(g.edge_weights(m).iter().all(|w| *w > 0.0 && w.is_finite()));
        }
        for (e, &(u, v)) in g.edges().iter().enumerate().take(500) {
            let w = g.edge_weights(EdgeMetric::Quasihyperbolic)[e];
            assert_eq!(g.edge_between(u, v, EdgeMetric::Quasihyperbolic), Some(w));
            assert_eq!(g.edge_between(v, u, EdgeMetric::Quasihyperbolic), Some(w));
        }
    }

    #[test]
    fn serialisation_is_deterministic() {
        let a = graph(Domain::punctured_unit_disk(), 0.2).to_json().unwrap();
        let b = graph(Domain::punctured_unit_disk(), 0.2).to_json().unwrap();
        assert_eq!(a, b);
        let f = GraphFile::from_json(&a).unwrap();
        assert_eq!(f.version, GRAPH_FORMAT_VERSION);
    }

    #[test]
    fn jittered_graphs_depend_on_seed_only() {
        let mut res = ResolutionSpec::new(0.2);
        res.jitter = 0.2;
        let dom = Arc::new(Domain::unit_disk());
        let a = MetricGraph::build(dom.clone(), res.clone(), 5).unwrap();
        let b = MetricGraph::build(dom.clone(), res.clone(), 5).unwrap();
        let c = MetricGraph::build(dom, res, 6).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_ne!(a.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn halving_h_never_loses_nodes() {
        for dom in [
            Domain::unit_disk(),
            Domain::punctured_unit_disk(),
            Domain::annulus(Point::xy(0.0, 0.0), 0.5, 1.0).unwrap(),
        ] {
            let dom = Arc::new(dom);
            let res = ResolutionSpec::new(0.2);
            let a = MetricGraph::build(dom.clone(), res.clone(), 0).unwrap();
            let b = MetricGraph::build(dom, res.refined(1), 0).unwrap();
            assert!(b.node_count() >= a.node_count());
        }
    }

    #[test]
    fn snapping_outside_fails() {
        let g = graph(Domain::unit_disk(), 0.2);
        assert!(matches!(
            g.snap(&Point::xy(2.0, 0.0)),
            Err(Error::PointOnBoundary(_))
        ));
        let s = g.snap(&Point::xy(0.3, 0.1)).unwrap();
        assert!(!s.connectors.is_empty());
    }
}
