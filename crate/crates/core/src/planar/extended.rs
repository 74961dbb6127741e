use super::{DerivedMap, EdgeOrigin, GraphKind, PlanarMap, VertexClass};

/// The extended graph (input graph plus a root `r` joined once into every
/// boundary corner) and its dual, in which the outer dual vertex is split
/// into one vertex per boundary edge, joined in a cycle.
#[derive(Debug, Clone)]
pub struct ExtendedPair {
    pub graph: DerivedMap,
    pub dual: DerivedMap,
    pub root_r: usize,
    /// Outer darts of the input in face order; corner `k` owns edge
    /// `E + k` of the extended graph.
    pub outer_darts: Vec<usize>,
    /// For each dart of the input, its dart in the extended graph.
    pub dart_map: Vec<usize>,
    /// Dual vertex of each outer dart `d`, i.e. the split vertex `u_d`.
    pub split_vertex: Vec<Option<usize>>,
}

pub fn extended_pair(m: &PlanarMap) -> ExtendedPair {
    let nv = m.num_vertices();
    let ne = m.num_edges();
    let outer = m.outer_darts();
    let n = outer.len();
    let r = nv;

    let dart_map: Vec<usize> = (0..m.num_darts())
        .map(|d| {
            let e = m.edge(d);
            2 * e + usize::from(m.edge_darts(e).0 != d)
        })
        .collect();
    let mut corner_index = vec![None; m.num_darts()];
    for (k, &d) in outer.iter().enumerate() {
        corner_index[d] = Some(k);
    }

    let mut edges: Vec<(usize, usize)> = (0..ne).map(|e| m.edge_endpoints(e)).collect();
    let mut edge_origin: Vec<EdgeOrigin> = (0..ne).map(|edge| EdgeOrigin::PrimalEdge { edge }).collect();
    for &d in &outer {
        edges.push((m.vertex(d), r));
        edge_origin.push(EdgeOrigin::CornerEdge { dart: d });
    }
    let mut rotations = vec![Vec::new(); nv + 1];
    for (v, rot) in rotations.iter_mut().enumerate().take(nv) {
        for &d in m.darts_at(v) {
            rot.push(dart_map[d]);
            if let Some(k) = corner_index[d] {
                rot.push(2 * (ne + k));
            }
        }
    }
    // The outer face runs clockwise, so counterclockwise around r the
    // corners come in reverse face order. Fall back to the other order if
    // the Euler check disagrees (degenerate boundaries).
    let outer_dart = if n > 0 { Some(2 * ne + 1) } else { None };
    let mut build = |reverse: bool| {
        let mut rot_r: Vec<usize> = (0..n).map(|k| 2 * (ne + k) + 1).collect();
        if reverse {
            rot_r.reverse();
        }
        rotations[r] = rot_r;
        PlanarMap::from_rotations(nv + 1, &edges, &rotations, outer_dart)
            .expect("extended graph rotation is consistent")
    };
    let mut gmap = build(true);
    if gmap.euler_characteristic() != 2 {
        gmap = build(false);
    }

    let mut g_class: Vec<VertexClass> = (0..nv).map(|vertex| VertexClass::Primal { vertex }).collect();
    g_class.push(VertexClass::Root);

    let dmap = gmap.dual();
    let mut d_class = vec![VertexClass::Root; dmap.num_vertices()];
    let mut split_vertex = vec![None; m.num_darts()];
    for d in 0..m.num_darts() {
        let f = gmap.face(dart_map[d]);
        if m.is_outer(d) {
            d_class[f] = VertexClass::SplitDual { dart: d };
            split_vertex[d] = Some(f);
        } else {
            d_class[f] = VertexClass::Dual { face: m.face(d) };
        }
    }
    let d_origin = edge_origin
        .iter()
        .map(|o| match *o {
            EdgeOrigin::PrimalEdge { edge } => EdgeOrigin::DualEdge { edge },
            EdgeOrigin::CornerEdge { dart } => EdgeOrigin::DualCycle { dart },
            other => other,
        })
        .collect();

    ExtendedPair {
        graph: DerivedMap {
            kind: GraphKind::ExtendedGraph,
            map: gmap,
            vertex_class: g_class,
            edge_origin,
        },
        dual: DerivedMap {
            kind: GraphKind::ExtendedDual,
            map: dmap,
            vertex_class: d_class,
            edge_origin: d_origin,
        },
        root_r: r,
        outer_darts: outer,
        dart_map,
        split_vertex,
    }
}

/// Superposition of the extended graph (without `r`) and the extended dual,
/// with a white vertex at every crossing.
///
/// Vertex layout: primal vertices first, then inner faces, then split dual
/// vertices (outer face order), then one white per edge, then one white per
/// boundary corner. Every edge runs white to black; its dart `2k` sits at the
/// white end.
#[derive(Debug, Clone)]
pub struct ExtendedDouble {
    pub double: DerivedMap,
    /// Lozenge vertex standing for the face left of each dart.
    pub face_vertex: Vec<usize>,
    pub edge_white: Vec<usize>,
    pub corner_white: Vec<Option<usize>>,
    pub split_vertex: Vec<Option<usize>>,
    pub outer_darts: Vec<usize>,
    pub half_primal: Vec<usize>,
    pub half_dual: Vec<usize>,
    pub boundary_primal: Vec<Option<usize>>,
    pub boundary_dual_open: Vec<Option<usize>>,
    pub split_edge: Vec<Option<usize>>,
    /// Default root `s`: the split vertex of the designated outer dart.
    pub default_root_s: usize,
}

impl ExtendedDouble {
    pub fn num_black(&self) -> usize {
        // whites are numbered after all blacks
        self.edge_white
            .first()
            .copied()
            .unwrap_or(self.double.map.num_vertices())
    }

    pub fn is_boundary_white(&self, w: usize) -> bool {
        matches!(self.double.vertex_class[w], VertexClass::CornerWhite { .. })
    }

    /// Lozenge vertices on the outer boundary, candidates for the root `s`.
    pub fn root_candidates(&self) -> Vec<usize> {
        self.outer_darts
            .iter()
            .map(|&d| self.split_vertex[d].unwrap())
            .collect()
    }
}

pub fn extended_double(m: &PlanarMap) -> ExtendedDouble {
    let nv = m.num_vertices();
    let ne = m.num_edges();
    let nd = m.num_darts();
    let outer = m.outer_darts();
    let inner = m.inner_faces();

    let mut class: Vec<VertexClass> = (0..nv).map(|vertex| VertexClass::Primal { vertex }).collect();
    let mut inner_vertex = vec![usize::MAX; m.num_faces()];
    for &f in &inner {
        inner_vertex[f] = class.len();
        class.push(VertexClass::Dual { face: f });
    }
    let mut split_vertex = vec![None; nd];
    for &d in &outer {
        split_vertex[d] = Some(class.len());
        class.push(VertexClass::SplitDual { dart: d });
    }
    let edge_white: Vec<usize> = (0..ne)
        .map(|edge| {
            class.push(VertexClass::EdgeWhite { edge });
            class.len() - 1
        })
        .collect();
    let mut corner_white = vec![None; nd];
    for &d in &outer {
        corner_white[d] = Some(class.len());
        class.push(VertexClass::CornerWhite { dart: d });
    }
    let face_vertex: Vec<usize> = (0..nd)
        .map(|d| split_vertex[d].unwrap_or_else(|| inner_vertex[m.face(d)]))
        .collect();

    let mut edges = Vec::new();
    let mut origin = Vec::new();
    let mut push = |edges: &mut Vec<(usize, usize)>, w: usize, b: usize, o: EdgeOrigin| {
        edges.push((w, b));
        origin.push(o);
        edges.len() - 1
    };
    let mut half_primal = vec![usize::MAX; nd];
    let mut half_dual = vec![usize::MAX; nd];
    for (e, &w) in edge_white.iter().enumerate().take(ne) {
        let (d, a) = m.edge_darts(e);
        for x in [d, a] {
            half_primal[x] = push(&mut edges, w, m.vertex(x), EdgeOrigin::HalfPrimal { dart: x });
            half_dual[x] = push(&mut edges, w, face_vertex[x], EdgeOrigin::HalfDual { dart: x });
        }
    }
    let mut boundary_primal = vec![None; nd];
    let mut boundary_dual_open = vec![None; nd];
    let mut split_edge = vec![None; nd];
    for &d in &outer {
        let w = corner_white[d].unwrap();
        let x = m.vertex(d);
        let far = split_vertex[m.alpha(m.sigma(d))].expect("boundary corner neighbour is outer");
        boundary_primal[d] = Some(push(&mut edges, w, x, EdgeOrigin::BoundaryPrimal { dart: d }));
        split_edge[d] = Some(push(
            &mut edges,
            w,
            split_vertex[d].unwrap(),
            EdgeOrigin::SplitEdge { dart: d },
        ));
        boundary_dual_open[d] = Some(push(&mut edges, w, far, EdgeOrigin::BoundaryDualOpen { dart: d }));
    }

    let at_white = |k: usize| 2 * k;
    let at_black = |k: usize| 2 * k + 1;
    let mut rotations = vec![Vec::new(); class.len()];
    for (x, rot) in rotations.iter_mut().enumerate().take(nv) {
        for &d in m.darts_at(x) {
            rot.push(at_black(half_primal[d]));
            if let Some(k) = boundary_primal[d] {
                rot.push(at_black(k));
            }
        }
    }
    for &f in &inner {
        for &d in m.face_darts(f) {
            rotations[inner_vertex[f]].push(at_black(half_dual[d]));
        }
    }
    for &d in &outer {
        let u = split_vertex[d].unwrap();
        let next = m.next_in_face(d);
        rotations[u] = vec![
            at_black(half_dual[d]),
            at_black(boundary_dual_open[next].unwrap()),
            at_black(split_edge[d].unwrap()),
        ];
    }
    for e in 0..ne {
        let (d, a) = m.edge_darts(e);
        rotations[edge_white[e]] = vec![
            at_white(half_primal[d]),
            at_white(half_dual[a]),
            at_white(half_primal[a]),
            at_white(half_dual[d]),
        ];
    }
    for &d in &outer {
        rotations[corner_white[d].unwrap()] = vec![
            at_white(boundary_primal[d].unwrap()),
            at_white(split_edge[d].unwrap()),
            at_white(boundary_dual_open[d].unwrap()),
        ];
    }
    let outer_dart = m.outer_dart().map(|d0| at_white(split_edge[d0].unwrap()));
    let map = PlanarMap::from_rotations(class.len(), &edges, &rotations, outer_dart)
        .expect("extended double rotation is consistent");
    let default_root_s = m.outer_dart().and_then(|d0| split_vertex[d0]).unwrap_or(nv);

    ExtendedDouble {
        double: DerivedMap {
            kind: GraphKind::ExtendedDouble,
            map,
            vertex_class: class,
            edge_origin: origin,
        },
        face_vertex,
        edge_white,
        corner_white,
        split_vertex,
        outer_darts: outer,
        half_primal,
        half_dual,
        boundary_primal,
        boundary_dual_open,
        split_edge,
        default_root_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn extended_pair_of_square() {
        let c4 = generators::cycle(4).unwrap().map;
        let ext = extended_pair(&c4);
        assert_eq!(ext.graph.map.num_vertices(), 5);
        assert_eq!(ext.graph.map.degree(ext.root_r), 4);
        assert_eq!(ext.dual.map.num_vertices(), 5);
        assert_eq!(ext.graph.map.euler_characteristic(), 2);
        assert_eq!(ext.dual.map.euler_characteristic(), 2);
        let splits: Vec<usize> = ext.split_vertex.iter().flatten().copied().collect();
        assert_eq!(splits.len(), 4);
        for &u in &splits {
            // each split vertex: one dual edge inward, two cycle edges
            assert_eq!(ext.dual.map.degree(u), 3);
        }
    }

    #[test]
    fn extended_pair_boundary_cycle_lengths() {
        let c3 = generators::cycle(3).unwrap().map;
        let ext = extended_pair(&c3);
        let cycle_edges = ext
            .dual
            .edge_origin
            .iter()
            .filter(|o| matches!(o, EdgeOrigin::DualCycle { .. }))
            .count();
        assert_eq!(cycle_edges, 3);
        let grid = generators::grid(3, 3).unwrap().map;
        let ext = extended_pair(&grid);
        assert_eq!(ext.graph.map.degree(ext.root_r), 8);
        assert_eq!(ext.graph.map.num_faces(), 4 + 8);
    }

    #[test]
    fn extended_double_counts() {
        let c4 = generators::cycle(4).unwrap().map;
        let dd = extended_double(&c4);
        let g = &dd.double;
        let count = |t: &str| (0..g.map.num_vertices()).filter(|&v| g.tag(v) == t).count();
        assert_eq!(count("bullet-black"), 4);
        assert_eq!(count("lozenge-black"), 5);
        assert_eq!(count("white"), 8);
        assert_eq!(g.map.euler_characteristic(), 2);
        for v in 0..g.map.num_vertices() {
            if g.is_white(v) {
                let expected = if dd.is_boundary_white(v) { 3 } else { 4 };
                assert_eq!(g.map.degree(v), expected);
            }
        }
        for e in 0..g.map.num_edges() {
            let (w, b) = g.map.edge_endpoints(e);
            assert!(g.is_white(w) && !g.is_white(b));
        }
    }

    #[test]
    fn extended_double_faces_are_quadrangles() {
        for m in [generators::cycle(3).unwrap().map, generators::grid(3, 3).unwrap().map] {
            let dd = extended_double(&m);
            let g = &dd.double.map;
            assert_eq!(g.euler_characteristic(), 2);
            assert_eq!(g.face_darts(g.outer_face()).len(), 2 * dd.outer_darts.len());
            for f in g.inner_faces() {
                assert_eq!(g.face_darts(f).len(), 4);
            }
        }
    }
}
