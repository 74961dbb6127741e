//! Exhaustive enumeration of spins, perfect matchings and oriented
//! spanning trees.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::planar::PlanarMap;
use crate::scalar::{real, Scalar};

use super::digraph::WeightedDigraph;

/// Environment variable overriding the partial-state cap.
pub const STATE_CAP_ENV: &str = "CRITICAL_ISING_ENUM_CAP";
/// Environment variable overriding the spin cap (as a power of two).
pub const SPIN_CAP_ENV: &str = "CRITICAL_ISING_SPIN_CAP_LOG2";

/// Limits on exhaustive searches. Exceeding one is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumCaps {
    /// At most `2^spins_log2` spin configurations.
    pub spins_log2: u32,
    /// At most this many search nodes in backtracking enumerations.
    pub states: u64,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            spins_log2: 24,
            states: 10_000_000,
        }
    }
}

impl EnumCaps {
    /// Defaults, overridden by the environment where set.
    pub fn from_env() -> Self {
        let mut caps = Self::default();
        if let Some(v) = std::env::var(STATE_CAP_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            caps.states = v;
        }
        if let Some(v) = std::env::var(SPIN_CAP_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            caps.spins_log2 = v;
        }
        caps
    }

    pub fn with_states(mut self, states: u64) -> Self {
        self.states = states;
        self
    }
}

struct Budget {
    left: u64,
    cap: u64,
    what: &'static str,
}

impl Budget {
    fn new(cap: u64, what: &'static str) -> Self {
        Budget { left: cap, cap, what }
    }

    fn tick(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::TooLarge {
                what: self.what.to_string(),
                cap: self.cap,
            });
        }
        self.left -= 1;
        Ok(())
    }
}

/// Graph for spin sums; parallel edges allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinGraph<T: Scalar> {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub coupling: Vec<T>,
}

impl<T: Scalar> SpinGraph<T> {
    pub fn from_map(m: &PlanarMap, coupling: &[T]) -> Self {
        SpinGraph {
            num_vertices: m.num_vertices(),
            edges: (0..m.num_edges()).map(|e| m.edge_endpoints(e)).collect(),
            coupling: coupling.to_vec(),
        }
    }

    /// Sum over spin configurations with the spins in `fixed` forced to +1.
    fn sum(&self, fixed: &[bool], caps: &EnumCaps) -> Result<T> {
        let free: Vec<usize> = (0..self.num_vertices).filter(|&v| !fixed[v]).collect();
        if free.len() as u32 > caps.spins_log2 {
            return Err(Error::TooLarge {
                what: format!("2^{} spin configurations", free.len()),
                cap: 1u64 << caps.spins_log2.min(63),
            });
        }
        let mut spin = vec![1i8; self.num_vertices];
        let mut z = T::zero();
        for mask in 0u64..(1u64 << free.len()) {
            for (k, &v) in free.iter().enumerate() {
                spin[v] = if mask >> k & 1 == 1 { -1 } else { 1 };
            }
            let energy: T = self
                .edges
                .iter()
                .zip(&self.coupling)
                .map(|(&(u, v), &j)| if spin[u] == spin[v] { j } else { -j })
                .sum();
            z += energy.exp();
        }
        Ok(z)
    }

    /// Ising partition function with free boundary conditions.
    pub fn ising_z(&self, caps: &EnumCaps) -> Result<T> {
        self.sum(&vec![false; self.num_vertices], caps)
    }

    /// Partition function with the listed vertices fixed to +1.
    pub fn ising_z_fixed_plus(&self, plus: &[usize], caps: &EnumCaps) -> Result<T> {
        let mut fixed = vec![false; self.num_vertices];
        for &v in plus {
            fixed[v] = true;
        }
        self.sum(&fixed, caps)
    }
}

pub fn ising_z<T: Scalar>(m: &PlanarMap, coupling: &[T], caps: &EnumCaps) -> Result<T> {
    SpinGraph::from_map(m, coupling).ising_z(caps)
}

/// Merges all boundary vertices of `m` into a single vertex `u0` (id 0).
/// Edges between two boundary vertices disappear into the constant
/// `c = 1/2 prod e^{J}` so that the plus-boundary partition function of `m`
/// equals `c` times the free partition function of the result.
pub fn plus_boundary_reduce<T: Scalar>(m: &PlanarMap, coupling: &[T]) -> (SpinGraph<T>, T) {
    let boundary = m.boundary_vertices();
    let mut id = vec![0; m.num_vertices()];
    let mut next = 1;
    for (v, slot) in id.iter_mut().enumerate() {
        if boundary.binary_search(&v).is_err() {
            *slot = next;
            next += 1;
        }
    }
    let mut g = SpinGraph {
        num_vertices: next,
        edges: Vec::new(),
        coupling: Vec::new(),
    };
    let mut c = T::lit(0.5);
    for (e, &j) in coupling.iter().enumerate().take(m.num_edges()) {
        let (u, v) = m.edge_endpoints(e);
        let (a, b) = (id[u], id[v]);
        if a == 0 && b == 0 {
            c *= j.exp();
        } else {
            g.edges.push((a, b));
            g.coupling.push(j);
        }
    }
    (g, c)
}

/// Calls `visit` with the edge ids of every perfect matching of the graph.
pub fn for_each_matching(
    num_vertices: usize,
    edges: &[(usize, usize)],
    caps: &EnumCaps,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    if num_vertices % 2 == 1 {
        return Ok(());
    }
    let mut incident = vec![Vec::new(); num_vertices];
    for (k, &(u, v)) in edges.iter().enumerate() {
        if u != v {
            incident[u].push(k);
            incident[v].push(k);
        }
    }
    let mut covered = vec![false; num_vertices];
    let mut chosen = Vec::with_capacity(num_vertices / 2);
    let mut budget = Budget::new(caps.states, "perfect matching search states");
    matching_rec(edges, &incident, &mut covered, &mut chosen, &mut budget, &mut visit)
}

fn matching_rec(
    edges: &[(usize, usize)],
    incident: &[Vec<usize>],
    covered: &mut [bool],
    chosen: &mut Vec<usize>,
    budget: &mut Budget,
    visit: &mut impl FnMut(&[usize]),
) -> Result<()> {
    budget.tick()?;
    // branch on the uncovered vertex with the fewest available edges
    let mut best: Option<(usize, usize)> = None;
    for v in 0..covered.len() {
        if covered[v] {
            continue;
        }
        let avail = incident[v]
            .iter()
            .filter(|&&k| {
                let (a, b) = edges[k];
                !covered[if a == v { b } else { a }]
            })
            .count();
        if avail == 0 {
            return Ok(());
        }
        if best.is_none_or(|(_, n)| avail < n) {
            best = Some((v, avail));
            if avail == 1 {
                break;
            }
        }
    }
    let Some((v, _)) = best else {
        visit(chosen);
        return Ok(());
    };
    covered[v] = true;
    for &k in &incident[v] {
        let (a, b) = edges[k];
        let w = if a == v { b } else { a };
        if covered[w] {
            continue;
        }
        covered[w] = true;
        chosen.push(k);
        matching_rec(edges, incident, covered, chosen, budget, visit)?;
        chosen.pop();
        covered[w] = false;
    }
    covered[v] = false;
    Ok(())
}

/// Weighted sum over perfect matchings.
pub fn dimer_z<T: Scalar>(
    num_vertices: usize,
    edges: &[(usize, usize)],
    weights: &[Complex<T>],
    caps: &EnumCaps,
) -> Result<Complex<T>> {
    let mut z = real(T::zero());
    for_each_matching(num_vertices, edges, caps, |m| {
        z += m.iter().fold(real(T::one()), |acc, &k| acc * weights[k]);
    })?;
    Ok(z)
}

/// Calls `visit` with the arc ids of every oriented spanning tree rooted at
/// `root`: one outgoing arc at every other vertex and no cycle. The arcs
/// are listed by source vertex order of the search.
pub fn for_each_ost<T: Scalar>(
    g: &WeightedDigraph<T>,
    root: usize,
    caps: &EnumCaps,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    let n = g.num_vertices;
    let out = g.out_arcs();
    // search vertices closest to the root first so chains close early
    let mut dist = vec![usize::MAX; n];
    dist[root] = 0;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut incoming = vec![Vec::new(); n];
    for (a, arc) in g.arcs.iter().enumerate() {
        incoming[arc.to].push(a);
    }
    while let Some(v) = queue.pop_front() {
        for &a in &incoming[v] {
            let u = g.arcs[a].from;
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    if dist.contains(&usize::MAX) {
        return Ok(());
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    order.sort_by_key(|&v| (dist[v], v));
    let mut succ = vec![usize::MAX; n];
    let mut chosen = Vec::with_capacity(n);
    let mut budget = Budget::new(caps.states, "oriented spanning tree search states");
    ost_rec(
        g,
        &out,
        &order,
        0,
        root,
        &mut succ,
        &mut chosen,
        &mut budget,
        &mut visit,
    )
}

#[allow(clippy::too_many_arguments)]
fn ost_rec<T: Scalar>(
    g: &WeightedDigraph<T>,
    out: &[Vec<usize>],
    order: &[usize],
    k: usize,
    root: usize,
    succ: &mut [usize],
    chosen: &mut Vec<usize>,
    budget: &mut Budget,
    visit: &mut impl FnMut(&[usize]),
) -> Result<()> {
    budget.tick()?;
    if k == order.len() {
        visit(chosen);
        return Ok(());
    }
    let v = order[k];
    for &a in &out[v] {
        let w = g.arcs[a].to;
        if w == v {
            continue;
        }
        // following successors from w must not come back to v
        let mut x = w;
        while x != root && x != v && succ[x] != usize::MAX {
            x = succ[x];
        }
        if x == v {
            continue;
        }
        succ[v] = w;
        chosen.push(a);
        ost_rec(g, out, order, k + 1, root, succ, chosen, budget, visit)?;
        chosen.pop();
        succ[v] = usize::MAX;
    }
    Ok(())
}

/// Weighted sum over oriented spanning trees rooted at `root`.
pub fn ost_z<T: Scalar>(g: &WeightedDigraph<T>, root: usize, caps: &EnumCaps) -> Result<Complex<T>> {
    let mut z = real(T::zero());
    for_each_ost(g, root, caps, |t| z += g.weight_of(t))?;
    Ok(z)
}

/// Number of oriented spanning trees rooted at `root`.
pub fn count_osts<T: Scalar>(g: &WeightedDigraph<T>, root: usize, caps: &EnumCaps) -> Result<u64> {
    let mut n = 0;
    for_each_ost(g, root, caps, |_| n += 1)?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::oracles::digraph::ArcOrigin;

    fn bidirected_cycle(n: usize) -> WeightedDigraph<f64> {
        let mut g = WeightedDigraph::new(n);
        for k in 0..n {
            g.add_arc(k, (k + 1) % n, real(1.0), ArcOrigin::Plain);
            g.add_arc((k + 1) % n, k, real(1.0), ArcOrigin::Plain);
        }
        g
    }

    #[test]
    fn spin_sums() {
        let c3 = generators::cycle(3).unwrap().map;
        assert_eq!(ising_z(&c3, &[0.0; 3], &EnumCaps::default()).unwrap(), 8.0);
        let c4 = generators::cycle(4).unwrap().map;
        let j = crate::isoradial::coupling(std::f64::consts::FRAC_PI_4);
        let z = ising_z(&c4, &[j; 4], &EnumCaps::default()).unwrap();
        let closed = (2.0 * j.cosh()).powi(4) + (2.0 * j.sinh()).powi(4);
        assert!((z - closed).abs() / closed < 1e-13);
    }

    #[test]
    fn spin_cap_is_enforced() {
        let grid = generators::grid(3, 3).unwrap().map;
        let caps = EnumCaps {
            spins_log2: 8,
            ..EnumCaps::default()
        };
        assert!(matches!(ising_z(&grid, &[0.3; 12], &caps), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn plus_boundary_reduction() {
        for g in [generators::cycle(4).unwrap(), generators::grid(3, 3).unwrap()] {
            let m = &g.map;
            let j: Vec<f64> = (0..m.num_edges()).map(|e| 0.2 + 0.05 * e as f64).collect();
            let plus = SpinGraph::from_map(m, &j)
                .ising_z_fixed_plus(&m.boundary_vertices(), &EnumCaps::default())
                .unwrap();
            let (reduced, c) = plus_boundary_reduce(m, &j);
            let z = reduced.ising_z(&EnumCaps::default()).unwrap();
            assert!((plus - c * z).abs() / plus < 1e-12);
        }
        let c4 = generators::cycle(4).unwrap().map;
        let (reduced, _) = plus_boundary_reduce(&c4, &[0.5; 4]);
        assert_eq!(reduced.ising_z(&EnumCaps::default()).unwrap(), 2.0);
    }

    #[test]
    fn matching_counts() {
        let c4: Vec<(usize, usize)> = (0..4).map(|k| (k, (k + 1) % 4)).collect();
        let z = dimer_z(4, &c4, &[real(1.0); 4], &EnumCaps::default()).unwrap();
        assert_eq!(z, real(2.0));
        let c3: Vec<(usize, usize)> = (0..3).map(|k| (k, (k + 1) % 3)).collect();
        let z = dimer_z(3, &c3, &[real(1.0); 3], &EnumCaps::default()).unwrap();
        assert_eq!(z, real(0.0));
    }

    #[test]
    fn ost_counts_on_cycles() {
        for n in [3, 4, 5] {
            let g = bidirected_cycle(n);
            assert_eq!(count_osts(&g, 0, &EnumCaps::default()).unwrap(), n as u64);
        }
    }

    #[test]
    fn state_cap_is_enforced() {
        let g = bidirected_cycle(8);
        let caps = EnumCaps::default().with_states(5);
        assert!(matches!(count_osts(&g, 0, &caps), Err(Error::TooLarge { .. })));
    }
}
