//! Stable graphs of genus `g` with `n` legs, their automorphisms and
//! weightings mod `r`.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Vertices `0..genera.len()`, leg `i` (1-based) at `legs[i-1]`, edges as
/// unordered vertex pairs (self-loops allowed), stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableGraph {
    pub genera: Vec<u32>,
    pub legs: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl StableGraph {
    pub fn new(genera: Vec<u32>, legs: Vec<usize>, edges: Vec<(usize, usize)>) -> Self {
        let mut edges: Vec<_> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        StableGraph { genera, legs, edges }
    }

    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    pub fn h1(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices()
    }

    pub fn genus(&self) -> u32 {
        self.genera.iter().sum::<u32>() + self.h1() as u32
    }

    /// Number of half-edges at `v`, legs included.
    pub fn valence(&self, v: usize) -> usize {
        let legs = self.legs.iter().filter(|&&w| w == v).count();
        let halves: usize = self
            .edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum();
        legs + halves
    }

    pub fn is_stable(&self) -> bool {
        (0..self.num_vertices()).all(|v| 2 * self.genera[v] as i64 - 2 + self.valence(v) as i64 > 0)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Half-edges: legs first (in leg order), then two per edge. Returns the
    /// vertex of each half-edge and the involution.
    pub fn half_edges(&self) -> (Vec<usize>, Vec<usize>) {
        let mut vertex = self.legs.clone();
        let mut iota: Vec<usize> = (0..self.legs.len()).collect();
        for &(a, b) in &self.edges {
            let h = vertex.len();
            vertex.push(a);
            vertex.push(b);
            iota.push(h + 1);
            iota.push(h);
        }
        (vertex, iota)
    }

    fn relabel(&self, perm: &[usize]) -> StableGraph {
        let mut genera = vec![0; self.genera.len()];
        for (v, &p) in perm.iter().enumerate() {
            genera[p] = self.genera[v];
        }
        StableGraph::new(
            genera,
            self.legs.iter().map(|&v| perm[v]).collect(),
            self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
        )
    }

    /// Least relabelling over all vertex orderings.
    pub fn canonical(&self) -> StableGraph {
        (0..self.num_vertices())
            .permutations(self.num_vertices())
            .map(|p| self.relabel(&p))
            .min()
            .expect("at least one vertex")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "genera": self.genera,
            "legs": self.legs,
            "edges": self.edges.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
            "h1": self.h1(),
            "aut": aut_order(self),
        })
    }
}

fn genus_distributions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in genus_distributions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All stable graphs of genus `g` with `n` legs, one per isomorphism class,
/// in canonical form and sorted.
pub fn enumerate(g: u32, n: usize) -> Result<Vec<StableGraph>> {
    if 2 * g as i64 - 2 + n as i64 <= 0 {
        return Err(Error::OutOfRange(format!("unstable range g={g}, n={n}")));
    }
    let mut found = BTreeSet::new();
    let max_v = (2 * g as usize + n).saturating_sub(2).max(1);
    for nv in 1..=max_v {
        let pairs: Vec<(usize, usize)> = (0..nv)
            .flat_map(|a| (a..nv).map(move |b| (a, b)))
            .collect();
        for h1 in 0..=g as usize {
            let ne = nv - 1 + h1;
            let vertex_genus = g - h1 as u32;
            let edge_sets: Vec<Vec<(usize, usize)>> = if ne == 0 {
                vec![vec![]]
            } else {
                pairs.iter().copied().combinations_with_replacement(ne).collect()
            };
            for genera in genus_distributions(vertex_genus, nv) {
                for edges in &edge_sets {
                    for legs in (0..n).map(|_| 0..nv).multi_cartesian_product_or_empty() {
                        let gr = StableGraph::new(genera.clone(), legs, edges.clone());
                        if gr.is_connected() && gr.is_stable() {
                            found.insert(gr.canonical());
                        }
                    }
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

trait CartesianOrEmpty: Iterator<Item = std::ops::Range<usize>> + Sized {
    fn multi_cartesian_product_or_empty(self) -> Box<dyn Iterator<Item = Vec<usize>>>;
}

impl<I: Iterator<Item = std::ops::Range<usize>>> CartesianOrEmpty for I {
    fn multi_cartesian_product_or_empty(self) -> Box<dyn Iterator<Item = Vec<usize>>> {
        let ranges: Vec<_> = self.collect();
        if ranges.is_empty() {
            Box::new(std::iter::once(Vec::new()))
        } else {
            Box::new(ranges.into_iter().multi_cartesian_product())
        }
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Order of the automorphism group acting on half-edges, legs fixed.
pub fn aut_order(gr: &StableGraph) -> u64 {
    let nv = gr.num_vertices();
    let mut total = 0;
    for perm in (0..nv).permutations(nv) {
        if (0..nv).any(|v| gr.genera[perm[v]] != gr.genera[v]) {
            continue;
        }
        if gr.legs.iter().any(|&v| perm[v] != v) {
            continue;
        }
        let mapped = StableGraph::new(
            gr.genera.clone(),
            gr.legs.clone(),
            gr.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect(),
        );
        if mapped.edges != gr.edges {
            continue;
        }
        // edges between a fixed pair can be matched in any order; loops flip
        let mut ways = 1;
        for ((a, b), group) in &gr.edges.iter().chunk_by(|e| **e) {
            let m = group.count();
            ways *= factorial(m);
            if a == b {
                ways *= 1 << m;
            }
        }
        total += ways;
    }
    total
}

/// Brute-force count of weightings mod `r` with leg values `a_i mod r`.
pub fn weighting_count(gr: &StableGraph, a: &[i64], r: u32) -> Result<u64> {
    if r == 0 {
        return Err(Error::OutOfRange("r must be positive".into()));
    }
    if a.len() != gr.legs.len() {
        return Err(Error::ArityMismatch {
            expected: gr.legs.len(),
            found: a.len(),
        });
    }
    if a.iter().sum::<i64>() != 0 {
        return Err(Error::OutOfRange("leg weights must sum to zero".into()));
    }
    let r = r as i64;
    let (vertex, _) = gr.half_edges();
    let nl = gr.legs.len();
    let ne = gr.edges.len();
    let mut count = 0;
    let mut w = vec![0i64; vertex.len()];
    for (i, ai) in a.iter().enumerate() {
        w[i] = ai.rem_euclid(r);
    }
    for idx in 0..(r as u64).pow(ne as u32) {
        let mut rest = idx;
        for e in 0..ne {
            let x = (rest % r as u64) as i64;
            rest /= r as u64;
            w[nl + 2 * e] = x;
            w[nl + 2 * e + 1] = (r - x) % r;
        }
        let mut sums = vec![0i64; gr.num_vertices()];
        for (h, &v) in vertex.iter().enumerate() {
            sums[v] += w[h];
        }
        if sums.iter().all(|s| s % r == 0) {
            count += 1;
        }
    }
    Ok(count)
}
