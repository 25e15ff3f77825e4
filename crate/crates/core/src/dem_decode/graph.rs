use std::collections::HashMap;
use std::fmt::Write as _;

use super::dem::DetectorErrorModel;
use super::{edge_weight, xor_merge, DecodeError};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    /// Second detector, or the boundary node `num_detectors`.
    pub b: usize,
    pub probability: f64,
    pub weight: f64,
    pub observables: u64,
    /// Indices of the DEM mechanisms folded into this edge.
    pub sources: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    pub mechanism: usize,
    /// Edge ids the mechanism was split into, or `None` if no partition
    /// into existing edges reproduces its observable mask.
    pub parts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingGraph {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub edges: Vec<Edge>,
    pub residual: Vec<Hyperedge>,
}

impl MatchingGraph {
    pub fn boundary(&self) -> usize {
        self.num_detectors
    }

    pub fn undecomposable(&self) -> impl Iterator<Item = &Hyperedge> {
        self.residual.iter().filter(|h| h.parts.is_none())
    }

    /// Debug dump, one edge per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.edges {
            let b = if e.b == self.boundary() {
                "B".to_string()
            } else {
                format!("D{}", e.b)
            };
            writeln!(
                s,
                "D{} {b} p={:.6e} w={:.4} L={:#x} from={:?}",
                e.a, e.probability, e.weight, e.observables, e.sources
            )
            .unwrap();
        }
        for h in &self.residual {
            writeln!(s, "hyper m{} -> {:?}", h.mechanism, h.parts).unwrap();
        }
        s
    }
}

type Part = (usize, usize);

fn part_of(dets: &[usize], boundary: usize) -> Part {
    match dets {
        [a] => (*a, boundary),
        [a, b] => (*a, *b),
        _ => unreachable!(),
    }
}

/// All ways to split `set` into at most `max_parts` parts of one or two
/// detectors, each present in `index`, with observable masks XORing to
/// `target`. Choices are `(edge ids, product of part probabilities)`.
#[allow(clippy::too_many_arguments)]
fn partitions(
    set: &[usize],
    max_parts: usize,
    target: u64,
    boundary: usize,
    index: &HashMap<Part, Vec<usize>>,
    edges: &[Edge],
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if set.is_empty() {
        let mask = chosen.iter().fold(0, |m, &e| m ^ edges[e].observables);
        if mask == target {
            out.push(chosen.clone());
        }
        return;
    }
    if chosen.len() == max_parts || set.len() > 2 * (max_parts - chosen.len()) {
        return;
    }
    // The first remaining detector is either alone or paired.
    let first = set[0];
    let mut candidates: Vec<(Part, Vec<usize>)> = vec![(part_of(&[first], boundary), set[1..].to_vec())];
    for j in 1..set.len() {
        let mut rest = set[1..].to_vec();
        rest.remove(j - 1);
        candidates.push((part_of(&[first, set[j]], boundary), rest));
    }
    for (part, rest) in candidates {
        for &e in index.get(&part).into_iter().flatten() {
            chosen.push(e);
            partitions(rest.as_slice(), max_parts, target, boundary, index, edges, chosen, out);
            chosen.pop();
        }
    }
}

/// Builds the matching graph. Mechanisms touching one or two detectors are
/// edges; larger ones are split into existing edges, two parts preferred
/// over three, heaviest mechanisms first.
pub fn decompose_graphlike(dem: &DetectorErrorModel) -> Result<MatchingGraph, DecodeError> {
    let boundary = dem.num_detectors;
    let mut edges: Vec<Edge> = Vec::new();
    let mut index: HashMap<Part, Vec<usize>> = HashMap::new();
    let mut hyper: Vec<usize> = Vec::new();
    for (i, m) in dem.mechanisms.iter().enumerate() {
        match m.detectors.len() {
            0 => log::warn!("mechanism {i} flips observables without detectors; not matchable"),
            1 | 2 => {
                let (a, b) = part_of(&m.detectors, boundary);
                index.entry((a, b)).or_default().push(edges.len());
                edges.push(Edge {
                    a,
                    b,
                    probability: m.probability,
                    weight: 0.0,
                    observables: m.observables,
                    sources: vec![i],
                });
            }
            _ => hyper.push(i),
        }
    }
    hyper.sort_by(|&x, &y| {
        dem.mechanisms[y]
            .probability
            .total_cmp(&dem.mechanisms[x].probability)
            .then(x.cmp(&y))
    });
    let mut residual = Vec::new();
    for i in hyper {
        let m = &dem.mechanisms[i];
        let mut best = None;
        for max_parts in [2, 3] {
            let mut found = Vec::new();
            partitions(&m.detectors, max_parts, m.observables, boundary, &index, &edges, &mut Vec::new(), &mut found);
            let score = |c: &Vec<usize>| c.iter().map(|&e| edges[e].probability.ln()).sum::<f64>();
            best = found.into_iter().max_by(|x, y| score(x).total_cmp(&score(y)).then(y.cmp(x)));
            if best.is_some() {
                break;
            }
        }
        if let Some(parts) = &best {
            for &e in parts {
                edges[e].probability = xor_merge(edges[e].probability, m.probability);
                edges[e].sources.push(i);
            }
        } else {
            log::debug!("mechanism {i} over {:?} is undecomposable", m.detectors);
        }
        residual.push(Hyperedge {
            mechanism: i,
            parts: best,
        });
    }
    let lost = residual.iter().filter(|h| h.parts.is_none()).count();
    if lost > 0 {
        log::info!("{lost} of {} hyperedges undecomposable", residual.len());
    }
    for e in &mut edges {
        e.weight = edge_weight(e.probability)?;
    }
    Ok(MatchingGraph {
        num_detectors: dem.num_detectors,
        num_observables: dem.num_observables,
        edges,
        residual,
    })
}
