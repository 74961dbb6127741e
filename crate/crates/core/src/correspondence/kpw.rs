//! Perfect matchings of the extended double minus `s` against pairs of dual
//! spanning trees: a tree of the extended graph oriented towards `r` and the
//! complementary tree of the extended dual oriented towards `s`.

use std::collections::VecDeque;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::isoradial::IsoradialData;
use crate::oracles::{dual_tree, for_each_ost, EnumCaps, WeightedDigraph};
use crate::planar::{EdgeOrigin, ExtendedDouble, ExtendedPair};
use crate::scalar::{im_unit, real, Scalar};

/// Arc ids in the bidirected extended graph and extended dual (arc `2e` runs
/// from the first endpoint of edge `e`, i.e. it is dart `2e`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreePair {
    pub primal: Vec<usize>,
    pub dual: Vec<usize>,
}

/// Dictionary between the extended double and the extended pair.
#[derive(Debug, Clone)]
pub struct KpwMap {
    /// Vertex of the extended dual for each lozenge vertex of the double.
    pub lozenge_to_dual: Vec<Option<usize>>,
    /// Inverse of `lozenge_to_dual`.
    pub dual_to_lozenge: Vec<usize>,
    /// Extended-graph dart of each input dart.
    pub dart_map: Vec<usize>,
    /// Input dart of each extended-graph dart below `2E`.
    pub dart_unmap: Vec<usize>,
    /// Corner position of each outer dart.
    pub corner: Vec<Option<usize>>,
    pub num_edges: usize,
    pub root_s: usize,
    /// Dual vertex standing for `s`.
    pub root_s_dual: usize,
}

impl KpwMap {
    pub fn new(dd: &ExtendedDouble, ext: &ExtendedPair, root_s: usize) -> Result<Self> {
        let nd = ext.dart_map.len();
        let ne = nd / 2;
        let mut lozenge_to_dual = vec![None; dd.num_black()];
        let mut dual_to_lozenge = vec![usize::MAX; ext.dual.map.num_vertices()];
        for x in 0..nd {
            let f = ext.graph.map.face(ext.dart_map[x]);
            lozenge_to_dual[dd.face_vertex[x]] = Some(f);
            dual_to_lozenge[f] = dd.face_vertex[x];
        }
        let root_s_dual = lozenge_to_dual
            .get(root_s)
            .copied()
            .flatten()
            .ok_or_else(|| Error::BadParams(format!("root s = {root_s} is not a lozenge vertex")))?;
        let mut dart_unmap = vec![usize::MAX; 2 * ne];
        for (x, &y) in ext.dart_map.iter().enumerate() {
            dart_unmap[y] = x;
        }
        let mut corner = vec![None; nd];
        for (k, &d) in ext.outer_darts.iter().enumerate() {
            corner[d] = Some(k);
        }
        Ok(KpwMap {
            lozenge_to_dual,
            dual_to_lozenge,
            dart_map: ext.dart_map.clone(),
            dart_unmap,
            corner,
            num_edges: ne,
            root_s,
            root_s_dual,
        })
    }
}

/// Splits a matching: every black vertex sends an arc across the edge of
/// the extended graph (or its dual) that its white partner sits on.
pub fn kpw_split(dd: &ExtendedDouble, ext: &ExtendedPair, km: &KpwMap, matching: &[usize]) -> Result<TreePair> {
    super::double::check_matching(dd, matching, km.root_s)?;
    let mut pair = TreePair {
        primal: Vec::new(),
        dual: Vec::new(),
    };
    let corner_edge = |d: usize| km.num_edges + km.corner[d].expect("outer dart");
    for &e in matching {
        match dd.double.edge_origin[e] {
            EdgeOrigin::HalfPrimal { dart } => pair.primal.push(km.dart_map[dart]),
            EdgeOrigin::HalfDual { dart } => pair.dual.push(km.dart_map[dart]),
            EdgeOrigin::BoundaryPrimal { dart } => pair.primal.push(2 * corner_edge(dart)),
            EdgeOrigin::SplitEdge { dart } | EdgeOrigin::BoundaryDualOpen { dart } => {
                let black = dd.double.map.edge_endpoints(e).1;
                let from = km.lozenge_to_dual[black].expect("lozenge");
                let k = corner_edge(dart);
                let arc = if ext.dual.map.vertex(2 * k) == from {
                    2 * k
                } else {
                    2 * k + 1
                };
                debug_assert_eq!(ext.dual.map.vertex(arc), from);
                pair.dual.push(arc);
            }
            other => return Err(Error::NotAMatching(format!("edge {e} has origin {other:?}"))),
        }
    }
    pair.primal.sort_unstable();
    pair.dual.sort_unstable();
    Ok(pair)
}

/// Converse of [`kpw_split`].
pub fn kpw_merge(dd: &ExtendedDouble, ext: &ExtendedPair, km: &KpwMap, pair: &TreePair) -> Result<Vec<usize>> {
    let mut m = Vec::with_capacity(pair.primal.len() + pair.dual.len());
    for &a in &pair.primal {
        let e = a / 2;
        if e < km.num_edges {
            m.push(dd.half_primal[km.dart_unmap[a]]);
        } else if a % 2 == 0 {
            let d = ext.outer_darts[e - km.num_edges];
            m.push(dd.boundary_primal[d].unwrap());
        } else {
            return Err(Error::NotAnOst(format!("arc {a} leaves r")));
        }
    }
    for &a in &pair.dual {
        let e = a / 2;
        if e < km.num_edges {
            m.push(dd.half_dual[km.dart_unmap[a]]);
        } else {
            let d = ext.outer_darts[e - km.num_edges];
            let from = ext.dual.map.vertex(a);
            if km.dual_to_lozenge[from] == dd.split_vertex[d].unwrap() {
                m.push(dd.split_edge[d].unwrap());
            } else {
                m.push(dd.boundary_dual_open[d].unwrap());
            }
        }
    }
    m.sort_unstable();
    super::double::check_matching(dd, &m, km.root_s)?;
    Ok(m)
}

/// Orients the complement of a spanning tree of the extended graph towards
/// `s` in the extended dual.
pub fn dual_orientation(ext: &ExtendedPair, km: &KpwMap, primal_edges: &[usize]) -> Result<Vec<usize>> {
    let dual_edges = dual_tree(&ext.graph.map, primal_edges)?;
    let dm = &ext.dual.map;
    let mut adj = vec![Vec::new(); dm.num_vertices()];
    for &e in &dual_edges {
        let (a, b) = dm.edge_darts(e);
        adj[dm.vertex(a)].push(b);
        adj[dm.vertex(b)].push(a);
    }
    // a dart leaving the root side points back at the child's arc
    let mut arcs = Vec::with_capacity(dual_edges.len());
    let mut seen = vec![false; dm.num_vertices()];
    seen[km.root_s_dual] = true;
    let mut queue = VecDeque::from([km.root_s_dual]);
    while let Some(v) = queue.pop_front() {
        for &back in &adj[v] {
            let child = dm.vertex(back);
            if !seen[child] {
                seen[child] = true;
                arcs.push(back);
                queue.push_back(child);
            }
        }
    }
    arcs.sort_unstable();
    Ok(arcs)
}

/// Visits every pair of dual spanning trees, primal rooted at `r` and dual
/// rooted at `s`.
pub fn for_each_tree_pair<T: Scalar>(
    ext: &ExtendedPair,
    km: &KpwMap,
    tau_primal: &WeightedDigraph<T>,
    caps: &EnumCaps,
    mut visit: impl FnMut(&TreePair),
) -> Result<()> {
    let mut err = None;
    for_each_ost(tau_primal, ext.root_r, caps, |t| {
        if err.is_some() {
            return;
        }
        let edges: Vec<usize> = t.iter().map(|a| a / 2).collect();
        match dual_orientation(ext, km, &edges) {
            Ok(dual) => {
                let mut primal = t.to_vec();
                primal.sort_unstable();
                visit(&TreePair { primal, dual });
            }
            Err(e) => err = Some(e),
        }
    })?;
    err.map_or(Ok(()), Err)
}

pub fn pair_weight<T: Scalar>(
    pair: &TreePair,
    tau_primal: &WeightedDigraph<T>,
    tau_dual: &WeightedDigraph<T>,
) -> Complex<T> {
    tau_primal.weight_of(&pair.primal) * tau_dual.weight_of(&pair.dual)
}

/// Constant `c` with `tau2(M) = c * tau(split(M))`: a factor `cos theta_e`
/// per input edge and `i` per dual arc.
pub fn matching_to_pair_factor<T: Scalar>(iso: &IsoradialData<T>, dual_arcs: usize) -> Complex<T> {
    let cos = iso.theta.iter().fold(T::one(), |a, &t| a * t.cos());
    let mut c = real(cos);
    for _ in 0..dual_arcs {
        c *= im_unit::<T>();
    }
    c
}

/// Sum over pairs of dual spanning trees, by enumeration.
pub fn ost_pair_z<T: Scalar>(
    ext: &ExtendedPair,
    km: &KpwMap,
    tau_primal: &WeightedDigraph<T>,
    tau_dual: &WeightedDigraph<T>,
    caps: &EnumCaps,
) -> Result<(Complex<T>, u64)> {
    let mut z = real(T::zero());
    let mut n = 0;
    for_each_tree_pair(ext, km, tau_primal, caps, |p| {
        z += pair_weight(p, tau_primal, tau_dual);
        n += 1;
    })?;
    Ok((z, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::double::for_each_matching_minus_s;
    use crate::generators;
    use crate::isoradial::validate_isoradial;
    use crate::pipeline::Stages;
    use crate::scalar::Tolerances;
    use std::collections::HashSet;

    #[test]
    fn split_and_merge_are_inverse_and_weighted() {
        for g in [generators::cycle(3).unwrap(), generators::cycle(4).unwrap()] {
            let iso = validate_isoradial(&g.map, &g.coords, &Tolerances::default()).unwrap();
            let st = Stages::build(&iso, None).unwrap();
            let caps = EnumCaps::default();
            let mut seen = HashSet::new();
            for_each_matching_minus_s(&st.dd, st.root_s, &caps, |m| {
                let p = kpw_split(&st.dd, &st.ext, &st.km, m).unwrap();
                assert_eq!(kpw_merge(&st.dd, &st.ext, &st.km, &p).unwrap(), m);
                let w2 = m.iter().fold(real(1.0), |a, &e| a * st.tau2[e]);
                let c = matching_to_pair_factor(&iso, p.dual.len());
                assert!((w2 - c * pair_weight(&p, &st.tau_primal, &st.tau_dual)).norm() < 1e-12);
                assert!(seen.insert(p));
            })
            .unwrap();
            let (_, n) = ost_pair_z(&st.ext, &st.km, &st.tau_primal, &st.tau_dual, &caps).unwrap();
            assert_eq!(n as usize, seen.len());
            for_each_tree_pair(&st.ext, &st.km, &st.tau_primal, &caps, |p| assert!(seen.contains(p))).unwrap();
        }
    }
}
