use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use rustworkx_core::petgraph::graph::UnGraph;
use rustworkx_core::max_weight_matching::max_weight_matching;

use crate::frame_sim::SampleBatch;

use super::graph::MatchingGraph;
use super::DecodeError;

/// Above this many defects the blossom matcher replaces the subset DP.
pub const EXACT_DP_MAX_DEFECTS: usize = 14;

/// Fixed-point scale for integer blossom weights.
const SCALE: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded {
    pub observables: u64,
    pub weight: f64,
}

/// All-pairs shortest paths over the matching graph, with the observable
/// parity of each path.
pub struct Decoder {
    n: usize,
    dist: Vec<f64>,
    parity: Vec<u64>,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Decoder {
    pub fn new(graph: &MatchingGraph) -> Self {
        let n = graph.num_detectors + 1;
        // Parallel edges: keep the lightest, lowest id on ties.
        let mut adj: Vec<Vec<(usize, f64, u64)>> = vec![Vec::new(); n];
        let mut best: std::collections::BTreeMap<(usize, usize), (f64, u64)> = Default::default();
        for e in &graph.edges {
            let key = (e.a.min(e.b), e.a.max(e.b));
            let cur = best.entry(key).or_insert((f64::INFINITY, 0));
            if e.weight < cur.0 {
                *cur = (e.weight, e.observables);
            }
        }
        for (&(a, b), &(w, o)) in &best {
            adj[a].push((b, w, o));
            adj[b].push((a, w, o));
        }
        let rows: Vec<(Vec<f64>, Vec<u64>)> = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut d = vec![f64::INFINITY; n];
                let mut p = vec![0u64; n];
                let mut heap = BinaryHeap::new();
                d[s] = 0.0;
                heap.push(Item(0.0, s));
                while let Some(Item(du, u)) = heap.pop() {
                    if du > d[u] {
                        continue;
                    }
                    for &(v, w, o) in &adj[u] {
                        let dv = du + w;
                        if dv < d[v] {
                            d[v] = dv;
                            p[v] = p[u] ^ o;
                            heap.push(Item(dv, v));
                        }
                    }
                }
                (d, p)
            })
            .collect();
        let mut dist = Vec::with_capacity(n * n);
        let mut parity = Vec::with_capacity(n * n);
        for (d, p) in rows {
            dist.extend(d);
            parity.extend(p);
        }
        Self { n, dist, parity }
    }

    fn boundary(&self) -> usize {
        self.n - 1
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    fn path_parity(&self, a: usize, b: usize) -> u64 {
        self.parity[a * self.n + b]
    }

    /// Minimum-weight matching of `defects` among themselves and the
    /// boundary.
    pub fn decode(&self, defects: &[usize]) -> Result<Decoded, DecodeError> {
        if let Some(&d) = defects.iter().find(|&&d| d >= self.boundary()) {
            return Err(DecodeError::Mismatch(format!("detector {d} out of range")));
        }
        let pairs = if defects.len() <= EXACT_DP_MAX_DEFECTS {
            self.match_dp(defects)?
        } else {
            self.match_blossom(defects)?
        };
        let mut out = Decoded {
            observables: 0,
            weight: 0.0,
        };
        for (a, b) in pairs {
            out.observables ^= self.path_parity(a, b);
            out.weight += self.distance(a, b);
        }
        Ok(out)
    }

    /// Exact subset DP; matched pairs use the boundary node for singles.
    fn match_dp(&self, defects: &[usize]) -> Result<Vec<(usize, usize)>, DecodeError> {
        let k = defects.len();
        let bnd = self.boundary();
        let full = (1usize << k) - 1;
        let mut cost = vec![f64::INFINITY; 1 << k];
        let mut choice = vec![usize::MAX; 1 << k];
        cost[0] = 0.0;
        for mask in 1..=full {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let c = cost[rest] + self.distance(defects[i], bnd);
            if c < cost[mask] {
                cost[mask] = c;
                choice[mask] = i;
            }
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                r &= r - 1;
                let c = cost[rest & !(1 << j)] + self.distance(defects[i], defects[j]);
                if c < cost[mask] {
                    cost[mask] = c;
                    choice[mask] = j;
                }
            }
        }
        if !cost[full].is_finite() {
            let bad = defects
                .iter()
                .copied()
                .find(|&d| self.distance(d, bnd).is_infinite())
                .unwrap_or(defects[0]);
            return Err(DecodeError::Unmatchable(bad));
        }
        let mut pairs = Vec::with_capacity(k);
        let mut mask = full;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            let j = choice[mask];
            if j == i {
                pairs.push((defects[i], bnd));
                mask &= !(1 << i);
            } else {
                pairs.push((defects[i], defects[j]));
                mask &= !(1 << i) & !(1 << j);
            }
        }
        Ok(pairs)
    }

    /// Blossom on defects plus one boundary copy per defect. Copies are
    /// joined to each other at zero cost.
    fn match_blossom(&self, defects: &[usize]) -> Result<Vec<(usize, usize)>, DecodeError> {
        let k = defects.len();
        let bnd = self.boundary();
        let mut g: UnGraph<(), f64> = UnGraph::with_capacity(2 * k, k * k * 2);
        let nodes: Vec<_> = (0..2 * k).map(|_| g.add_node(())).collect();
        for i in 0..k {
            for j in i + 1..k {
                let d = self.distance(defects[i], defects[j]);
                if d.is_finite() {
                    g.add_edge(nodes[i], nodes[j], d);
                }
                g.add_edge(nodes[k + i], nodes[k + j], 0.0);
            }
            let d = self.distance(defects[i], bnd);
            if d.is_finite() {
                g.add_edge(nodes[i], nodes[k + i], d);
            }
        }
        // Every perfect matching has k edges, so an offset keeps weights
        // positive without changing the optimum.
        let max = g.edge_weights().fold(0.0f64, |m, &w| m.max(w));
        let offset = ((max + 1.0) * SCALE).round() as i128;
        let matching = max_weight_matching(
            &g,
            true,
            |e| Ok::<i128, std::convert::Infallible>(offset - (e.weight() * SCALE).round() as i128),
            false,
        )
        .unwrap_or_else(|e| match e {});
        if matching.len() != k {
            return Err(DecodeError::Unmatchable(defects[0]));
        }
        let mut pairs = Vec::with_capacity(k);
        for (u, v) in matching {
            let (u, v) = (u.min(v), u.max(v));
            match (u < k, v < k) {
                (true, true) => pairs.push((defects[u], defects[v])),
                (true, false) => pairs.push((defects[u], bnd)),
                _ => {}
            }
        }
        pairs.sort_unstable();
        Ok(pairs)
    }
}

/// Predicted observable flips for every shot of `batch`.
pub fn decode_batch(graph: &MatchingGraph, batch: &SampleBatch) -> Result<Vec<u64>, DecodeError> {
    if batch.num_detectors != graph.num_detectors {
        return Err(DecodeError::Mismatch(format!(
            "batch has {} detectors, graph {}",
            batch.num_detectors, graph.num_detectors
        )));
    }
    let decoder = Decoder::new(graph);
    (0..batch.shots)
        .into_par_iter()
        .map(|s| decoder.decode(&batch.defects(s)).map(|d| d.observables))
        .collect()
}

/// Shots whose prediction differs from the sampled observable flips.
pub fn count_failures(batch: &SampleBatch, predictions: &[u64]) -> usize {
    predictions
        .iter()
        .enumerate()
        .filter(|&(s, &p)| p != batch.observables(s))
        .count()
}
