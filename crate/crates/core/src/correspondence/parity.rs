//! Alternating cycles in superpositions of two matchings of the extended
//! double, and the vertex-type counts inside them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::planar::{ExtendedDouble, VertexClass};

use super::double::rule_groups;

/// Closed alternating cycles of the symmetric difference of two matchings,
/// each as a vertex sequence (first vertex not repeated).
pub fn superposition_cycles(dd: &ExtendedDouble, m1: &[usize], m2: &[usize]) -> Vec<Vec<usize>> {
    let m = &dd.double.map;
    let mut partner = vec![[usize::MAX; 2]; m.num_vertices()];
    for (side, mt) in [m1, m2].into_iter().enumerate() {
        for &e in mt {
            let (u, v) = m.edge_endpoints(e);
            partner[u][side] = v;
            partner[v][side] = u;
        }
    }
    let mut seen = vec![false; m.num_vertices()];
    let mut cycles = Vec::new();
    for start in 0..m.num_vertices() {
        let [a, b] = partner[start];
        if seen[start] || a == usize::MAX || a == b {
            continue;
        }
        let mut cyc = vec![start];
        seen[start] = true;
        let mut side = 0;
        let mut v = partner[start][0];
        while v != start {
            seen[v] = true;
            cyc.push(v);
            side ^= 1;
            v = partner[v][side];
        }
        cycles.push(cyc);
    }
    cycles
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub length: usize,
    /// Counts of Types 1 to 5.
    pub n: [usize; 5],
    pub interior_vertices: usize,
    pub interior_faces: usize,
    pub closure_edges: usize,
    /// Edges of the closure at each white vertex of the cycle, in cycle order.
    pub white_degrees: Vec<usize>,
    pub root_s_inside: bool,
    /// Whether the cycle's edges could all belong to one configuration
    /// obeying the local rules.
    pub rule_compliant: bool,
}

impl ParityReport {
    pub fn interior_odd(&self) -> bool {
        self.interior_vertices % 2 == 1
    }

    pub fn n2_eq_n3(&self) -> bool {
        self.n[1] == self.n[2]
    }

    /// `n5 - n4 = 1`, the count forced on a rule-compliant cycle.
    pub fn type_count_identity(&self) -> bool {
        self.n[4] as i64 - self.n[3] as i64 == 1
    }

    /// Euler's formula on the closed interior, written with the actual
    /// degree of each white vertex on the cycle:
    /// `n5 - n4 = 1 + sum_w (k_w - 3) / 2`.
    pub fn euler_identity(&self) -> bool {
        let excess: i64 = self.white_degrees.iter().map(|&k| k as i64 - 3).sum();
        2 * (self.n[4] as i64 - self.n[3] as i64) == 2 + excess
    }
}

/// Dart `k` runs from `cycle[k]` to `cycle[k + 1]`.
fn cycle_darts(dd: &ExtendedDouble, cycle: &[usize]) -> Result<Vec<usize>> {
    let m = &dd.double.map;
    let len = cycle.len();
    (0..len)
        .map(|k| {
            let (a, b) = (cycle[k], cycle[(k + 1) % len]);
            m.darts_at(a)
                .iter()
                .copied()
                .find(|&d| m.head(d) == b)
                .ok_or_else(|| Error::NotACycle(format!("{a} and {b} are not adjacent")))
        })
        .collect()
}

/// Classifies the vertices of an alternating cycle (given as a vertex
/// sequence) and its interior.
pub fn parity_check(dd: &ExtendedDouble, cycle: &[usize], root_s: usize) -> Result<ParityReport> {
    let m = &dd.double.map;
    let len = cycle.len();
    if len < 4 || len % 2 == 1 {
        return Err(Error::NotACycle(format!("length {len}")));
    }
    let mut on_cycle = vec![false; m.num_vertices()];
    for &v in cycle {
        if std::mem::replace(&mut on_cycle[v], true) {
            return Err(Error::NotACycle(format!("vertex {v} repeats")));
        }
    }
    let darts = cycle_darts(dd, cycle)?;
    let mut cycle_edge = vec![false; m.num_edges()];
    for &d in &darts {
        cycle_edge[m.edge(d)] = true;
    }

    // faces reachable from the outer face without crossing the cycle
    let mut outside = vec![false; m.num_faces()];
    let outer = m.outer_face();
    outside[outer] = true;
    let mut stack = vec![outer];
    while let Some(f) = stack.pop() {
        for &d in m.face_darts(f) {
            if cycle_edge[m.edge(d)] {
                continue;
            }
            let g = m.face(m.alpha(d));
            if !outside[g] {
                outside[g] = true;
                stack.push(g);
            }
        }
    }
    let inside_face = |d: usize| !outside[m.face(d)];
    let interior_faces = outside.iter().filter(|&&o| !o).count();

    // walk the cycle clockwise, i.e. with the interior on the right
    let (seq, darts) = if inside_face(darts[0]) {
        let mut rev: Vec<usize> = cycle.to_vec();
        rev.reverse();
        let rd = cycle_darts(dd, &rev)?;
        (rev, rd)
    } else {
        (cycle.to_vec(), darts)
    };

    let interior: Vec<usize> = (0..m.num_vertices())
        .filter(|&v| !on_cycle[v] && m.darts_at(v).first().is_some_and(|&d| inside_face(d)))
        .collect();
    let mut n = [0usize; 5];
    for &v in &interior {
        if dd.double.is_white(v) {
            n[3] += 1;
        } else {
            n[4] += 1;
        }
    }
    let lozenge = |v: usize| {
        matches!(
            dd.double.vertex_class[v],
            VertexClass::Dual { .. } | VertexClass::SplitDual { .. }
        )
    };
    let in_closure = |e: usize| {
        let (a, b) = m.edge_darts(e);
        cycle_edge[e] || inside_face(a) || inside_face(b)
    };
    let closure_edges = (0..m.num_edges()).filter(|&e| in_closure(e)).count();

    let mut white_degrees = Vec::new();
    let mut rule_compliant = true;
    for k in 0..len {
        let w = seq[k];
        if !dd.double.is_white(w) {
            continue;
        }
        let prev = seq[(k + len - 1) % len];
        let next = seq[(k + 1) % len];
        n[match (lozenge(prev), lozenge(next)) {
            (a, b) if a == b => 0,
            (true, false) => 1,
            _ => 2,
        }] += 1;
        white_degrees.push(m.darts_at(w).iter().filter(|&&d| in_closure(m.edge(d))).count());
        // the two cycle edges at w must come from different rule groups
        let e_in = m.edge(darts[(k + len - 1) % len]);
        let e_out = m.edge(darts[k]);
        let groups = rule_groups(dd, w);
        if groups.iter().any(|g| g.contains(&e_in) && g.contains(&e_out)) {
            rule_compliant = false;
        }
    }

    Ok(ParityReport {
        length: len,
        n,
        interior_vertices: interior.len(),
        interior_faces,
        closure_edges,
        white_degrees,
        root_s_inside: interior.contains(&root_s),
        rule_compliant,
    })
}
