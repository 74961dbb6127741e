//! Spanning trees of the extended double: dual trees of oriented spanning
//! trees of `G`, the local rules at white vertices, and compatibility
//! classes indexed by perfect matchings.

use std::collections::VecDeque;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::isoradial::IsoradialData;
use crate::oracles::ArcOrigin;
use crate::planar::{ExtendedDouble, VertexClass};
use crate::scalar::{cis, im_unit, real, Scalar};

use super::directed::{ost_successors, DirectedModel, Stage};

/// Edge set of the extended double, sorted, with its root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DoubleTree {
    pub edges: Vec<usize>,
    pub root_s: usize,
}

/// The two rule groups at a white vertex: a valid configuration uses
/// exactly one edge from each. Inside, the groups are the two half-edges
/// leaving each endpoint's corner; on the boundary, the split edge alone
/// and the pair {boundary primal, open dual}.
pub fn rule_groups(dd: &ExtendedDouble, w: usize) -> [Vec<usize>; 2] {
    match dd.double.vertex_class[w] {
        VertexClass::EdgeWhite { edge } => {
            let (d, a) = dd_edge_darts(dd, edge);
            [
                vec![dd.half_primal[d], dd.half_dual[d]],
                vec![dd.half_primal[a], dd.half_dual[a]],
            ]
        }
        VertexClass::CornerWhite { dart } => [
            vec![dd.split_edge[dart].unwrap()],
            vec![dd.boundary_primal[dart].unwrap(), dd.boundary_dual_open[dart].unwrap()],
        ],
        _ => panic!("vertex {w} is not white"),
    }
}

fn dd_edge_darts(dd: &ExtendedDouble, edge: usize) -> (usize, usize) {
    // the two half-primal edges at W_e come from the edge's two darts
    let w = dd.edge_white[edge];
    let m = &dd.double.map;
    let mut darts = m
        .darts_at(w)
        .iter()
        .filter_map(|&x| match dd.double.edge_origin[m.edge(x)] {
            crate::planar::EdgeOrigin::HalfPrimal { dart } => Some(dart),
            _ => None,
        });
    (darts.next().unwrap(), darts.next().unwrap())
}

pub fn white_vertices(dd: &ExtendedDouble) -> std::ops::Range<usize> {
    dd.num_black()..dd.double.map.num_vertices()
}

/// Lookup tables of the double: rule group of every edge at a white
/// vertex, and incident edges per vertex.
#[derive(Debug, Clone)]
pub struct DoubleTables {
    first_white: usize,
    /// White vertex and group (0 or 1) of each edge; group 2 marks an
    /// edge at a white outside both groups.
    group: Vec<Option<(usize, usize)>>,
    incident: Vec<Vec<(usize, usize)>>,
    ends: Vec<(usize, usize)>,
}

impl DoubleTables {
    pub fn new(dd: &ExtendedDouble) -> Self {
        let m = &dd.double.map;
        let first_white = dd.num_black();
        let mut group = vec![None; m.num_edges()];
        for w in white_vertices(dd) {
            for &x in m.darts_at(w) {
                group[m.edge(x)] = Some((w - first_white, 2));
            }
            for (k, g) in rule_groups(dd, w).iter().enumerate() {
                for &e in g {
                    group[e] = Some((w - first_white, k));
                }
            }
        }
        let mut incident = vec![Vec::new(); m.num_vertices()];
        let ends: Vec<(usize, usize)> = (0..m.num_edges()).map(|e| m.edge_endpoints(e)).collect();
        for (e, &(u, v)) in ends.iter().enumerate() {
            incident[u].push((v, e));
            incident[v].push((u, e));
        }
        DoubleTables {
            first_white,
            group,
            incident,
            ends,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.group.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.incident.len()
    }

    pub fn num_whites(&self) -> usize {
        self.incident.len() - self.first_white
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    /// White vertex (counted from the first white) and rule group of an edge.
    pub fn group(&self, e: usize) -> Option<(usize, usize)> {
        self.group[e]
    }

    /// White vertices where the edges marked present break the local rules.
    pub fn rule_violations(&self, edges: &[usize], hits: &mut Vec<[u8; 3]>, bad: &mut Vec<usize>) {
        hits.clear();
        hits.resize(self.incident.len() - self.first_white, [0; 3]);
        for &e in edges {
            if let Some((w, k)) = self.group[e] {
                hits[w][k] = hits[w][k].saturating_add(1);
            }
        }
        bad.clear();
        bad.extend(
            hits.iter()
                .enumerate()
                .filter(|(_, h)| **h != [1, 1, 0])
                .map(|(w, _)| w + self.first_white),
        );
    }

    pub fn rule_violations_of(&self, edges: &[usize]) -> Vec<usize> {
        let mut bad = Vec::new();
        self.rule_violations(edges, &mut Vec::new(), &mut bad);
        bad
    }

    /// Parent edge of every vertex with the present edges oriented towards
    /// `root`; fails unless they form a spanning tree.
    pub fn orient(
        &self,
        present: &[bool],
        num_edges: usize,
        root: usize,
        parent: &mut Vec<Option<usize>>,
        queue: &mut VecDeque<usize>,
    ) -> Result<()> {
        let n = self.incident.len();
        parent.clear();
        parent.resize(n, None);
        queue.clear();
        queue.push_back(root);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &self.incident[v] {
                if present[e] && parent[w].is_none() && w != root {
                    parent[w] = Some(e);
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        if count != n || num_edges + 1 != n {
            return Err(Error::NotATree(format!(
                "{num_edges} edges reach {count} of {n} vertices"
            )));
        }
        Ok(())
    }
}

/// White vertices where the configuration breaks the local rules.
pub fn check_local_rules(dd: &ExtendedDouble, edges: &[usize]) -> Vec<usize> {
    DoubleTables::new(dd).rule_violations_of(edges)
}

/// The edge of the double crossed by an arc of `G`.
pub fn arc_dual_edge(dd: &ExtendedDouble, origin: ArcOrigin) -> usize {
    match origin {
        ArcOrigin::PrimalCrossing { dart } => dd.half_primal[dart],
        ArcOrigin::DualCrossing { dart } => dd.half_dual[dart],
        ArcOrigin::CopyToWhite { dart } => dd.boundary_primal[dart].unwrap(),
        ArcOrigin::CopyToRoot { dart } => dd.boundary_dual_open[dart].unwrap(),
        other => panic!("arc {other:?} does not belong to G"),
    }
}

/// Tables for the maps between trees of `G` and configurations of the
/// double.
#[derive(Debug, Clone)]
pub struct DoubleIndex {
    pub tables: DoubleTables,
    /// Out-arcs of each vertex of `G` with the edge of the double each crosses.
    out: Vec<Vec<(usize, usize)>>,
    split: Vec<usize>,
    root_r: usize,
}

impl DoubleIndex {
    pub fn new<T: Scalar>(dd: &ExtendedDouble, g: &DirectedModel<T>) -> Result<Self> {
        if g.stage != Stage::G {
            return Err(Error::WrongStage {
                expected: Stage::G.to_string(),
                got: g.stage.to_string(),
            });
        }
        let out: Vec<Vec<(usize, usize)>> = g
            .graph
            .out_arcs()
            .into_iter()
            .map(|arcs| {
                arcs.into_iter()
                    .map(|a| (a, arc_dual_edge(dd, g.graph.arcs[a].origin)))
                    .collect()
            })
            .collect();
        let mut crossed = vec![false; dd.double.map.num_edges()];
        for &(_, e) in out.iter().flatten() {
            if std::mem::replace(&mut crossed[e], true) {
                return Err(Error::InvalidRotation(format!(
                    "edge {e} of the double crosses two arcs of G"
                )));
            }
        }
        Ok(DoubleIndex {
            tables: DoubleTables::new(dd),
            out,
            split: dd.outer_darts.iter().map(|&d| dd.split_edge[d].unwrap()).collect(),
            root_r: g.root_r,
        })
    }

    /// Out-arcs of a vertex of `G` with the edge each one crosses.
    pub fn out(&self, v: usize) -> &[(usize, usize)] {
        &self.out[v]
    }

    pub fn split_edges(&self) -> &[usize] {
        &self.split
    }

    pub fn root_r(&self) -> usize {
        self.root_r
    }

    /// Edges crossing the unused out-arcs, given the arc used at each
    /// vertex (`usize::MAX` at the root), followed by the split edges.
    pub fn dual_edges(&self, succ: &[usize], edges: &mut Vec<usize>) {
        edges.clear();
        for (v, arcs) in self.out.iter().enumerate() {
            if v == self.root_r {
                continue;
            }
            edges.extend(arcs.iter().filter(|&&(a, _)| a != succ[v]).map(|&(_, e)| e));
        }
        edges.extend_from_slice(&self.split);
    }

    /// Arc used at each vertex: the one out-arc whose crossing edge is absent.
    pub fn pull_back(&self, present: &[bool], succ: &mut Vec<usize>) -> Result<()> {
        succ.clear();
        for (v, arcs) in self.out.iter().enumerate() {
            if v == self.root_r {
                succ.push(usize::MAX);
                continue;
            }
            let mut unused = arcs.iter().filter(|&&(_, e)| !present[e]).map(|&(a, _)| a);
            match (unused.next(), unused.next()) {
                (Some(a), None) => succ.push(a),
                _ => {
                    return Err(Error::NotAnOst(format!(
                        "vertex {v} has {} free arcs",
                        arcs.iter().filter(|&&(_, e)| !present[e]).count()
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Dual configuration of an oriented spanning tree of `G`: at every
/// non-root vertex the edge crossing its unused out-arc, plus every split
/// edge.
pub fn dual_in_double<T: Scalar>(
    dd: &ExtendedDouble,
    g: &DirectedModel<T>,
    tree: &[usize],
    root_s: usize,
) -> Result<DoubleTree> {
    let edges = DoubleIndex::new(dd, g)?.dual_of_tree(g, tree)?;
    Ok(DoubleTree { edges, root_s })
}

/// Converse of [`dual_in_double`]: reads off the arc of `G` used at each
/// vertex and checks the result is an oriented spanning tree.
pub fn double_to_ost<T: Scalar>(dd: &ExtendedDouble, g: &DirectedModel<T>, edges: &[usize]) -> Result<Vec<usize>> {
    DoubleIndex::new(dd, g)?.tree_of_dual(g, edges)
}

impl DoubleIndex {
    /// Sorted edges of [`dual_in_double`].
    pub fn dual_of_tree<T: Scalar>(&self, g: &DirectedModel<T>, tree: &[usize]) -> Result<Vec<usize>> {
        let succ: Vec<usize> = ost_successors(&g.graph, g.root_r, tree)?
            .into_iter()
            .map(|a| a.unwrap_or(usize::MAX))
            .collect();
        let mut edges = Vec::new();
        self.dual_edges(&succ, &mut edges);
        edges.sort_unstable();
        Ok(edges)
    }

    /// Sorted arcs of [`double_to_ost`].
    pub fn tree_of_dual<T: Scalar>(&self, g: &DirectedModel<T>, edges: &[usize]) -> Result<Vec<usize>> {
        let bad = self.tables.rule_violations_of(edges);
        if !bad.is_empty() {
            return Err(Error::NotInClass(bad));
        }
        let mut present = vec![false; self.tables.num_edges()];
        for &e in edges {
            present[e] = true;
        }
        let mut succ = Vec::new();
        self.pull_back(&present, &mut succ)?;
        let mut tree: Vec<usize> = succ.into_iter().filter(|&a| a != usize::MAX).collect();
        ost_successors(&g.graph, g.root_r, &tree)?;
        tree.sort_unstable();
        Ok(tree)
    }
}

/// Parent edge of every vertex when the spanning tree is oriented towards
/// `root`.
pub fn orient_towards(dd: &ExtendedDouble, edges: &[usize], root: usize) -> Result<Vec<Option<usize>>> {
    let tables = DoubleTables::new(dd);
    let mut present = vec![false; tables.num_edges()];
    for &e in edges {
        present[e] = true;
    }
    let mut parent = Vec::new();
    tables.orient(&present, edges.len(), root, &mut parent, &mut VecDeque::new())?;
    Ok(parent)
}

/// Edges leaving black vertices once the tree is oriented towards its root.
pub fn tree_to_matching(dd: &ExtendedDouble, dt: &DoubleTree) -> Result<Vec<usize>> {
    let bad = check_local_rules(dd, &dt.edges);
    if !bad.is_empty() {
        return Err(Error::NotInClass(bad));
    }
    let parent = orient_towards(dd, &dt.edges, dt.root_s)?;
    let mut m: Vec<usize> = (0..dd.num_black())
        .filter(|&b| b != dt.root_s)
        .map(|b| parent[b].expect("spanning"))
        .collect();
    m.sort_unstable();
    Ok(m)
}

/// Checks that `edges` is a perfect matching of the double with `s`
/// removed.
pub fn check_matching(dd: &ExtendedDouble, edges: &[usize], root_s: usize) -> Result<()> {
    let m = &dd.double.map;
    let mut hit = vec![0u32; m.num_vertices()];
    for &e in edges {
        let (u, v) = m.edge_endpoints(e);
        hit[u] += 1;
        hit[v] += 1;
    }
    for (v, &h) in hit.iter().enumerate() {
        let expected = u32::from(v != root_s);
        if h != expected {
            return Err(Error::NotAMatching(format!("vertex {v} covered {h} times")));
        }
    }
    Ok(())
}

/// Union-find with undo, for incremental cycle detection.
struct RollbackDsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<(usize, usize)>,
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        RollbackDsu {
            parent: (0..n).collect(),
            size: vec![1; n],
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] > self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[a] = b;
        self.size[b] += self.size[a];
        self.log.push((a, b));
        true
    }

    fn undo(&mut self) {
        let (a, b) = self.log.pop().expect("undo without union");
        self.parent[a] = a;
        self.size[b] -= self.size[a];
    }
}

/// Outcome of enumerating the configurations compatible with a matching.
#[derive(Debug, Clone)]
pub struct CompatClass<T: Scalar> {
    pub matching: Vec<usize>,
    /// Members visited (all of them unless `truncated`).
    pub members: u64,
    /// Configurations that closed a cycle. The theory says none do.
    pub cycle_rejections: u64,
    pub weight: Complex<T>,
    pub truncated: bool,
    /// Number of white vertices with two admissible completions.
    pub free_whites: u32,
}

/// Admissible extra edges at each white vertex given the matching.
fn completions(dd: &ExtendedDouble, present: &[bool]) -> Result<Vec<Vec<usize>>> {
    white_vertices(dd)
        .map(|w| {
            let groups = rule_groups(dd, w);
            let hits: Vec<usize> = groups
                .iter()
                .map(|g| g.iter().filter(|&&e| present[e]).count())
                .collect();
            match (hits[0], hits[1]) {
                (1, 0) => Ok(groups[1].clone()),
                (0, 1) => Ok(groups[0].clone()),
                _ => Err(Error::NotAMatching(format!(
                    "white {w} is matched outside its rule groups"
                ))),
            }
        })
        .collect()
}

/// Enumerates every configuration that contains the matching and satisfies
/// the local rules, by independent choices at white vertices. Each one is
/// checked for cycles as it is built. `visit` receives the completed edge
/// set (matching first). Stops after `limit` members if given.
pub fn matching_to_trees<T: Scalar>(
    dd: &ExtendedDouble,
    matching: &[usize],
    root_s: usize,
    rho: &[Complex<T>],
    limit: Option<u64>,
    mut visit: impl FnMut(&[usize]),
) -> Result<CompatClass<T>> {
    check_matching(dd, matching, root_s)?;
    let m = &dd.double.map;
    let mut present = vec![false; m.num_edges()];
    for &e in matching {
        present[e] = true;
    }
    let options = completions(dd, &present)?;
    let mut dsu = RollbackDsu::new(m.num_vertices());
    let mut base = real(T::one());
    for &e in matching {
        let (u, v) = m.edge_endpoints(e);
        dsu.union(u, v);
        base *= rho[e];
    }
    let mut class = CompatClass {
        matching: matching.to_vec(),
        members: 0,
        cycle_rejections: 0,
        weight: real(T::zero()),
        truncated: false,
        free_whites: options.iter().filter(|o| o.len() == 2).count() as u32,
    };
    let mut edges = matching.to_vec();
    class_rec(
        dd, &options, 0, &mut dsu, base, rho, &mut edges, &mut class, limit, &mut visit,
    );
    Ok(class)
}

#[allow(clippy::too_many_arguments)]
fn class_rec<T: Scalar>(
    dd: &ExtendedDouble,
    options: &[Vec<usize>],
    k: usize,
    dsu: &mut RollbackDsu,
    weight: Complex<T>,
    rho: &[Complex<T>],
    edges: &mut Vec<usize>,
    class: &mut CompatClass<T>,
    limit: Option<u64>,
    visit: &mut impl FnMut(&[usize]),
) {
    if limit.is_some_and(|l| class.members >= l) {
        class.truncated = true;
        return;
    }
    if k == options.len() {
        class.members += 1;
        class.weight += weight;
        visit(edges);
        return;
    }
    for &e in &options[k] {
        let (u, v) = dd.double.map.edge_endpoints(e);
        if !dsu.union(u, v) {
            class.cycle_rejections += 1;
            continue;
        }
        edges.push(e);
        class_rec(
            dd,
            options,
            k + 1,
            dsu,
            weight * rho[e],
            rho,
            edges,
            class,
            limit,
            visit,
        );
        edges.pop();
        dsu.undo();
    }
}

/// Class weight from independent local sums, without enumerating members.
pub fn class_weight_factored<T: Scalar>(
    dd: &ExtendedDouble,
    matching: &[usize],
    rho: &[Complex<T>],
) -> Result<Complex<T>> {
    let mut present = vec![false; dd.double.map.num_edges()];
    for &e in matching {
        present[e] = true;
    }
    let options = completions(dd, &present)?;
    let mut w = matching.iter().fold(real(T::one()), |a, &e| a * rho[e]);
    for opts in options {
        w *= opts.iter().fold(real(T::zero()), |a, &e| a + rho[e]);
    }
    Ok(w)
}

/// Unit-modulus constant relating class weights to matching weights:
/// `prod_e i e^{-i theta_e}` over edges times `prod -i e^{-i theta_bd / 2}`
/// over boundary corners.
pub fn class_prefactor<T: Scalar>(iso: &IsoradialData<T>) -> Complex<T> {
    let i = im_unit::<T>();
    let two = T::lit(2.0);
    let mut c = real(T::one());
    for &t in &iso.theta {
        c = c * i * cis(-t);
    }
    for d in iso.map.outer_darts() {
        c = c * (-i) * cis(-iso.theta_boundary[d].unwrap() / two);
    }
    c
}

/// Closed form of the class weight of a matching.
pub fn class_closed_form<T: Scalar>(prefactor: Complex<T>, matching: &[usize], tau2: &[Complex<T>]) -> Complex<T> {
    matching.iter().fold(prefactor, |a, &e| a * tau2[e])
}

/// Calls `visit` with every perfect matching of the double with `s`
/// removed, as sorted edge ids of the double.
pub fn for_each_matching_minus_s(
    dd: &ExtendedDouble,
    root_s: usize,
    caps: &crate::oracles::EnumCaps,
    mut visit: impl FnMut(&[usize]),
) -> Result<()> {
    let m = &dd.double.map;
    let n = m.num_vertices();
    let relabel = |v: usize| if v > root_s { v - 1 } else { v };
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    for e in 0..m.num_edges() {
        let (u, v) = m.edge_endpoints(e);
        if u != root_s && v != root_s {
            ids.push(e);
            edges.push((relabel(u), relabel(v)));
        }
    }
    let mut buf = Vec::with_capacity(n / 2);
    crate::oracles::for_each_matching(n - 1, &edges, caps, |mt| {
        buf.clear();
        buf.extend(mt.iter().map(|&k| ids[k]));
        buf.sort_unstable();
        visit(&buf);
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::isoradial::validate_isoradial;
    use crate::oracles::{for_each_ost, EnumCaps};
    use crate::pipeline::Stages;
    use crate::scalar::Tolerances;
    use std::collections::HashSet;

    fn stages(n: usize) -> (IsoradialData<f64>, Stages<f64>) {
        let g = generators::cycle(n).unwrap();
        let iso = validate_isoradial(&g.map, &g.coords, &Tolerances::default()).unwrap();
        let st = Stages::build(&iso, None).unwrap();
        (iso, st)
    }

    #[test]
    fn every_white_has_two_nonempty_groups() {
        let (_, st) = stages(4);
        for w in white_vertices(&st.dd) {
            let [a, b] = rule_groups(&st.dd, w);
            assert!(!a.is_empty() && !b.is_empty());
            assert!(a.iter().all(|e| !b.contains(e)));
        }
    }

    #[test]
    fn trees_of_g_round_trip_through_the_double() {
        let (_, st) = stages(3);
        let mut n = 0;
        let mut matchings = HashSet::new();
        for_each_ost(&st.g.graph, st.g.root_r, &EnumCaps::default(), |t| {
            n += 1;
            let dt = dual_in_double(&st.dd, &st.g, t, st.root_s).unwrap();
            assert!(check_local_rules(&st.dd, &dt.edges).is_empty());
            let w = dt.edges.iter().fold(real(1.0), |a, &e| a * st.rho[e]);
            assert!((w - st.g.graph.weight_of(t)).norm() < 1e-12);
            let mut sorted = t.to_vec();
            sorted.sort_unstable();
            assert_eq!(double_to_ost(&st.dd, &st.g, &dt.edges).unwrap(), sorted);
            matchings.insert(tree_to_matching(&st.dd, &dt).unwrap());
        })
        .unwrap();
        assert_eq!(n, 248);
        assert_eq!(matchings.len(), 16);
    }

    #[test]
    fn classes_match_closed_form_without_cycles() {
        let (iso, st) = stages(4);
        let pre = class_prefactor(&iso);
        let (mut classes, mut members) = (0, 0);
        for_each_matching_minus_s(&st.dd, st.root_s, &EnumCaps::default(), |m| {
            classes += 1;
            let c = matching_to_trees(&st.dd, m, st.root_s, &st.rho, None, |_| {}).unwrap();
            assert_eq!(c.cycle_rejections, 0);
            members += c.members;
            let cf = class_closed_form(pre, m, &st.tau2);
            assert!((c.weight - cf).norm() < 1e-12 * cf.norm().max(1.0));
            assert!((class_weight_factored(&st.dd, m, &st.rho).unwrap() - cf).norm() < 1e-12 * cf.norm().max(1.0));
        })
        .unwrap();
        assert_eq!((classes, members), (45, 1904));
    }

    #[test]
    fn a_tree_from_the_wrong_stage_is_refused() {
        let (_, st) = stages(3);
        assert!(matches!(
            dual_in_double(&st.dd, &st.g0, &[], st.root_s),
            Err(Error::WrongStage { .. })
        ));
    }

    #[test]
    fn a_non_matching_is_refused() {
        let (_, st) = stages(3);
        assert!(check_matching(&st.dd, &[0], st.root_s).is_err());
    }
}
