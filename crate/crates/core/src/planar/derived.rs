use super::{DerivedMap, EdgeOrigin, GraphKind, PlanarMap, VertexClass};

/// Dual graph on the inner faces only; edges on the outer boundary are
/// dropped.
pub fn restricted_dual(m: &PlanarMap) -> DerivedMap {
    let dual = m.dual();
    let keep: Vec<bool> = (0..m.num_darts())
        .map(|d| !m.is_outer(d) && !m.is_outer(m.alpha(d)))
        .collect();
    let keep_vertex: Vec<bool> = (0..m.num_faces())
        .map(|f| m.outer_dart().is_none() || f != m.outer_face())
        .collect();
    let boundary = m.boundary_vertices();
    let (map, _dmap, vmap) = dual.submap(&keep, &keep_vertex, |new_to_old| {
        new_to_old
            .iter()
            .position(|&d| boundary.binary_search(&m.head(d)).is_ok())
            .or(if new_to_old.is_empty() { None } else { Some(0) })
    });
    let mut vertex_class = vec![VertexClass::Dual { face: 0 }; map.num_vertices()];
    for (f, v) in vmap.iter().enumerate() {
        if let Some(v) = v {
            vertex_class[*v] = VertexClass::Dual { face: f };
        }
    }
    // submap keeps darts in edge order, so new edge k came from the k-th
    // surviving old edge
    let edge_origin = (0..m.num_edges())
        .filter(|&e| {
            let (d, a) = m.edge_darts(e);
            keep[d] && keep[a]
        })
        .map(|edge| EdgeOrigin::DualEdge { edge })
        .collect();
    DerivedMap {
        kind: GraphKind::RestrictedDual,
        map,
        vertex_class,
        edge_origin,
    }
}

/// Vertex-face incidence graph: one edge per corner, joining the origin of
/// dart `d` to the face on its left. With `restricted`, corners in the outer
/// face are left out together with the outer face vertex.
pub fn quad_graph(m: &PlanarMap, restricted: bool) -> DerivedMap {
    let nv = m.num_vertices();
    let faces: Vec<usize> = if restricted {
        m.inner_faces()
    } else {
        (0..m.num_faces()).collect()
    };
    let mut face_vertex = vec![usize::MAX; m.num_faces()];
    for (i, &f) in faces.iter().enumerate() {
        face_vertex[f] = nv + i;
    }
    let kept = |d: usize| !(restricted && m.is_outer(d));
    let mut corner_edge = vec![usize::MAX; m.num_darts()];
    let mut edges = Vec::new();
    let mut edge_origin = Vec::new();
    for d in 0..m.num_darts() {
        if kept(d) {
            corner_edge[d] = edges.len();
            edges.push((m.vertex(d), face_vertex[m.face(d)]));
            edge_origin.push(EdgeOrigin::QuadCorner { dart: d });
        }
    }
    let mut rotations = vec![Vec::new(); nv + faces.len()];
    for (v, rot) in rotations.iter_mut().enumerate().take(nv) {
        for &d in m.darts_at(v) {
            if kept(d) {
                rot.push(2 * corner_edge[d]);
            }
        }
    }
    for &f in &faces {
        for &d in m.face_darts(f) {
            rotations[face_vertex[f]].push(2 * corner_edge[d] + 1);
        }
    }
    let outer = m.outer_dart().and_then(|d0| {
        if !restricted {
            return Some(2 * corner_edge[d0]);
        }
        // the removed corner at d0 sat in the wedge after the last kept
        // corner preceding it around the same vertex
        let mut d = m.sigma_inv(d0);
        while d != d0 {
            if kept(d) {
                return Some(2 * corner_edge[d]);
            }
            d = m.sigma_inv(d);
        }
        (0..m.num_darts()).find(|&d| kept(d)).map(|d| 2 * corner_edge[d])
    });
    let map = PlanarMap::from_rotations(nv + faces.len(), &edges, &rotations, outer)
        .expect("quad graph rotation is consistent");
    let mut vertex_class: Vec<VertexClass> = (0..nv).map(|vertex| VertexClass::Primal { vertex }).collect();
    vertex_class.extend(faces.iter().map(|&face| VertexClass::Dual { face }));
    DerivedMap {
        kind: GraphKind::Quad,
        map,
        vertex_class,
        edge_origin,
    }
}

/// The decorated graph `G^Q`: every dart `d` of `m` carries a white vertex
/// `W(d)` (id `d`) and a black vertex `B(d)` (id `D + d`). Each dart
/// contributes three edges, in this order:
/// `W(d)-B(d)` crossing the primal edge, `W(d)-B(alpha d)` crossing the dual
/// edge, and the external edge `W(d)-B(sigma d)` lying in the corner of `d`.
/// Edge `3d + j` owns darts `2(3d + j)` at the white end and `+1` at the
/// black end.
pub fn double_graph_q(m: &PlanarMap) -> DerivedMap {
    let n = m.num_darts();
    let mut edges = Vec::with_capacity(3 * n);
    let mut edge_origin = Vec::with_capacity(3 * n);
    for d in 0..n {
        edges.push((d, n + d));
        edge_origin.push(EdgeOrigin::CrossesPrimal { dart: d });
        edges.push((d, n + m.alpha(d)));
        edge_origin.push(EdgeOrigin::CrossesDual { dart: d });
        edges.push((d, n + m.sigma(d)));
        edge_origin.push(EdgeOrigin::External {
            dart: d,
            boundary: m.is_outer(d),
        });
    }
    let white = |d: usize, j: usize| 2 * (3 * d + j);
    let black = |d: usize, j: usize| 2 * (3 * d + j) + 1;
    let mut rotations = vec![Vec::new(); 2 * n];
    for d in 0..n {
        rotations[d] = vec![white(d, 1), white(d, 2), white(d, 0)];
        rotations[n + d] = vec![black(m.alpha(d), 1), black(d, 0), black(m.sigma_inv(d), 2)];
    }
    let outer = m.outer_dart().map(|d0| black(d0, 2));
    let map = PlanarMap::from_rotations(2 * n, &edges, &rotations, outer).expect("G^Q rotation is consistent");
    let vertex_class = (0..n)
        .map(|dart| VertexClass::QuadWhite { dart })
        .chain((0..n).map(|dart| VertexClass::QuadBlack { dart }))
        .collect();
    DerivedMap {
        kind: GraphKind::QuadriTiling,
        map,
        vertex_class,
        edge_origin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn dual_of_triangle_is_a_theta_graph() {
        let c3 = generators::cycle(3).unwrap().map;
        let d = c3.dual();
        assert_eq!(d.num_vertices(), 2);
        assert_eq!(d.num_edges(), 3);
        assert_eq!(d.num_faces(), 3);
        for v in 0..2 {
            assert_eq!(d.degree(v), 3);
        }
    }

    #[test]
    fn double_dual_is_isomorphic() {
        for m in [generators::cycle(4).unwrap().map, generators::grid(3, 3).unwrap().map] {
            assert!(m.dual().dual().is_isomorphic(&m));
        }
    }

    #[test]
    fn restricted_dual_shapes() {
        let c4 = generators::cycle(4).unwrap().map;
        let rd = restricted_dual(&c4);
        assert_eq!(
            (rd.map.num_vertices(), rd.map.num_edges(), rd.map.num_faces()),
            (1, 0, 1)
        );
        let grid = generators::grid(3, 3).unwrap().map;
        let rd = restricted_dual(&grid);
        assert_eq!(
            (rd.map.num_vertices(), rd.map.num_edges(), rd.map.num_faces()),
            (4, 4, 2)
        );
        assert_eq!(rd.map.euler_characteristic(), 2);
    }

    #[test]
    fn quad_graph_faces_are_rhombi() {
        let grid = generators::grid(3, 3).unwrap().map;
        let q = quad_graph(&grid, false);
        assert_eq!(q.map.num_vertices(), 9 + 5);
        assert_eq!(q.map.num_edges(), 24);
        assert_eq!(q.map.num_faces(), 12);
        assert_eq!(q.map.euler_characteristic(), 2);
        for f in 0..q.map.num_faces() {
            assert_eq!(q.map.face_darts(f).len(), 4);
        }
        let r = quad_graph(&grid, true);
        assert_eq!(r.map.euler_characteristic(), 2);
        assert_eq!(r.map.num_edges(), 16);
        for f in r.map.inner_faces() {
            assert_eq!(r.map.face_darts(f).len(), 4);
        }
    }

    #[test]
    fn double_graph_q_face_structure() {
        for m in [generators::cycle(3).unwrap().map, generators::grid(3, 3).unwrap().map] {
            let gq = double_graph_q(&m);
            assert_eq!(gq.map.euler_characteristic(), 2);
            assert_eq!(gq.map.num_faces(), m.num_edges() + m.num_vertices() + m.num_faces());
            let rect = (0..gq.map.num_faces())
                .filter(|&f| gq.map.face_darts(f).len() == 4)
                .count();
            assert!(rect >= m.num_edges());
        }
    }
}
