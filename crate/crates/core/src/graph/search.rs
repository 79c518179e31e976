//! Deterministic Dijkstra over a [`MetricGraph`] with arbitrary per-edge weights.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::MetricGraph;

pub(crate) const NO_NODE: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path tree from a set of weighted sources.
#[derive(Clone, Debug)]
pub(crate) struct SearchTree {
    pub dist: Vec<f64>,
    pub pred: Vec<u32>,
}

impl SearchTree {
    /// Node sequence from a source to `target`.
    pub fn path_to(&self, target: u32) -> Vec<u32> {
        let mut path = vec![target];
        let mut cur = target;
        while self.pred[cur as usize] != NO_NODE {
            cur = self.pred[cur as usize];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Best exit through weighted target connectors: `(value, exit node)`.
    pub fn best_exit(&self, targets: &[(u32, f64)]) -> Option<(f64, u32)> {
        let mut best: Option<(f64, u32)> = None;
        for &(n, w) in targets {
            let v = self.dist[n as usize] + w;
            if v.is_finite() && best.map_or(true, |(b, bn)| v < b || (v == b && n < bn)) {
                best = Some((v, n));
            }
        }
        best
    }
}

/// Full single- or multi-source search. `bound` stops the search once every
/// remaining label exceeds it.
pub(crate) fn dijkstra(
    g: &MetricGraph,
    weights: &[f64],
    sources: &[(u32, f64)],
    bound: Option<f64>,
) -> SearchTree {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_NODE; n];
    let mut heap = BinaryHeap::new();
    for &(s, w) in sources {
        if w < dist[s as usize] {
            dist[s as usize] = w;
            heap.push(Entry { dist: w, node: s });
        }
    }
    let limit = bound.unwrap_or(f64::INFINITY);
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        if d > limit {
            break;
        }
        relax(g, weights, u, d, &mut dist, &mut pred, &mut heap);
    }
    SearchTree { dist, pred }
}

#[inline]
fn relax(
    g: &MetricGraph,
    weights: &[f64],
    u: u32,
    d: f64,
    dist: &mut [f64],
    pred: &mut [u32],
    heap: &mut BinaryHeap<Entry>,
) {
    for &(v, e) in g.neighbors(u as usize) {
        let nd = d + weights[e as usize];
        let dv = dist[v as usize];
        if nd < dv {
            dist[v as usize] = nd;
            pred[v as usize] = u;
            heap.push(Entry { dist: nd, node: v });
        } else if nd == dv && u < pred[v as usize] && pred[v as usize] != NO_NODE {
            pred[v as usize] = u;
        }
    }
}

/// Point-to-point search between weighted connector sets, optionally competing
/// with a direct connection of weight `direct`. Returns the value and the node
/// path (empty when the direct connection wins).
pub(crate) fn shortest_path(
    g: &MetricGraph,
    weights: &[f64],
    sources: &[(u32, f64)],
    targets: &[(u32, f64)],
    direct: Option<f64>,
) -> Option<(f64, Vec<u32>)> {
    let n = g.node_count();
    let mut exit: HashMap<u32, f64> = HashMap::with_capacity(targets.len());
    for &(t, w) in targets {
        let e = exit.entry(t).or_insert(f64::INFINITY);
        if w < *e {
            *e = w;
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_NODE; n];
    let mut heap = BinaryHeap::new();
    for &(s, w) in sources {
        if w < dist[s as usize] {
            dist[s as usize] = w;
            heap.push(Entry { dist: w, node: s });
        }
    }
    let mut best = direct.unwrap_or(f64::INFINITY);
    let mut best_node = NO_NODE;
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        if d >= best {
            break;
        }
        if let Some(&w) = exit.get(&u) {
            if d + w < best {
                best = d + w;
                best_node = u;
            }
        }
        relax(g, weights, u, d, &mut dist, &mut pred, &mut heap);
    }
    if !best.is_finite() {
        return None;
    }
    if best_node == NO_NODE {
        return Some((best, Vec::new()));
    }
    let tree = SearchTree { dist, pred };
    Some((best, tree.path_to(best_node)))
}
