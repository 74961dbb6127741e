//! Rotation-system combinatorial maps.
//!
//! A map is a set of darts with two permutations: `alpha` pairs each dart
//! with its twin and `sigma` gives the next dart counterclockwise around the
//! dart's origin. The face to the left of a dart `d` is traced by
//! `d -> sigma^{-1}(alpha(d))`; inner faces are then traversed
//! counterclockwise and the outer face clockwise.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarMap {
    num_vertices: usize,
    dart_vertex: Vec<usize>,
    alpha: Vec<usize>,
    sigma: Vec<usize>,
    sigma_inv: Vec<usize>,
    vertex_darts: Vec<Vec<usize>>,
    dart_face: Vec<usize>,
    faces: Vec<Vec<usize>>,
    outer_dart: Option<usize>,
    outer_face: usize,
    dart_edge: Vec<usize>,
    edge_dart: Vec<usize>,
    vertex_labels: Option<Vec<String>>,
}

impl PlanarMap {
    /// Builds a map from raw permutations and checks that they form a valid
    /// rotation system. Faces are computed; planarity is not enforced here.
    pub fn from_parts(
        num_vertices: usize,
        dart_vertex: Vec<usize>,
        alpha: Vec<usize>,
        sigma: Vec<usize>,
        outer_dart: Option<usize>,
    ) -> Result<Self> {
        let n = dart_vertex.len();
        if alpha.len() != n || sigma.len() != n {
            return Err(Error::InvalidRotation("permutation length mismatch".into()));
        }
        for d in 0..n {
            if dart_vertex[d] >= num_vertices {
                return Err(Error::InvalidRotation(format!("dart {d} has unknown vertex")));
            }
            let a = alpha[d];
            if a >= n || a == d || alpha[a] != d {
                return Err(Error::InvalidRotation(format!(
                    "alpha is not a fixed-point-free involution at dart {d}"
                )));
            }
            if sigma[d] >= n {
                return Err(Error::InvalidRotation(format!("sigma out of range at dart {d}")));
            }
            if dart_vertex[sigma[d]] != dart_vertex[d] {
                return Err(Error::InvalidRotation(format!(
                    "sigma moves dart {d} to another vertex"
                )));
            }
        }
        let mut sigma_inv = vec![usize::MAX; n];
        for d in 0..n {
            if sigma_inv[sigma[d]] != usize::MAX {
                return Err(Error::InvalidRotation("sigma is not a permutation".into()));
            }
            sigma_inv[sigma[d]] = d;
        }
        let mut vertex_darts = vec![Vec::new(); num_vertices];
        let mut seen = vec![false; n];
        for d in 0..n {
            let v = dart_vertex[d];
            if seen[d] {
                continue;
            }
            if !vertex_darts[v].is_empty() {
                return Err(Error::InvalidRotation(format!(
                    "darts of vertex {v} form more than one sigma cycle"
                )));
            }
            let mut x = d;
            loop {
                seen[x] = true;
                vertex_darts[v].push(x);
                x = sigma[x];
                if x == d {
                    break;
                }
            }
        }
        if let Some(o) = outer_dart {
            if o >= n {
                return Err(Error::InvalidRotation("outer dart out of range".into()));
            }
        }

        let mut dart_face = vec![usize::MAX; n];
        let mut faces = Vec::new();
        for d in 0..n {
            if dart_face[d] != usize::MAX {
                continue;
            }
            let f = faces.len();
            let mut orbit = Vec::new();
            let mut x = d;
            loop {
                dart_face[x] = f;
                orbit.push(x);
                x = sigma_inv[alpha[x]];
                if x == d {
                    break;
                }
            }
            faces.push(orbit);
        }
        if faces.is_empty() {
            faces.push(Vec::new());
        }
        let outer_face = outer_dart.map(|o| dart_face[o]).unwrap_or(0);

        let mut dart_edge = vec![usize::MAX; n];
        let mut edge_dart = Vec::new();
        for d in 0..n {
            if d < alpha[d] {
                dart_edge[d] = edge_dart.len();
                dart_edge[alpha[d]] = edge_dart.len();
                edge_dart.push(d);
            }
        }

        Ok(PlanarMap {
            num_vertices,
            dart_vertex,
            alpha,
            sigma,
            sigma_inv,
            vertex_darts,
            dart_face,
            faces,
            outer_dart,
            outer_face,
            dart_edge,
            edge_dart,
            vertex_labels: None,
        })
    }

    /// Builds a map from an edge list. Edge `k` owns darts `2k` (leaving
    /// `edges[k].0`) and `2k + 1` (leaving `edges[k].1`); `rotations[v]`
    /// lists the darts leaving `v` in counterclockwise order.
    pub fn from_rotations(
        num_vertices: usize,
        edges: &[(usize, usize)],
        rotations: &[Vec<usize>],
        outer_dart: Option<usize>,
    ) -> Result<Self> {
        let n = 2 * edges.len();
        let mut dart_vertex = vec![0; n];
        let mut alpha = vec![0; n];
        for (k, &(u, v)) in edges.iter().enumerate() {
            dart_vertex[2 * k] = u;
            dart_vertex[2 * k + 1] = v;
            alpha[2 * k] = 2 * k + 1;
            alpha[2 * k + 1] = 2 * k;
        }
        if rotations.len() != num_vertices {
            return Err(Error::InvalidRotation("one rotation per vertex required".into()));
        }
        let mut sigma = vec![usize::MAX; n];
        for (v, rot) in rotations.iter().enumerate() {
            for (i, &d) in rot.iter().enumerate() {
                if d >= n || dart_vertex[d] != v {
                    return Err(Error::InvalidRotation(format!(
                        "dart {d} listed at vertex {v} does not leave it"
                    )));
                }
                if sigma[d] != usize::MAX {
                    return Err(Error::InvalidRotation(format!("dart {d} listed twice")));
                }
                sigma[d] = rot[(i + 1) % rot.len()];
            }
        }
        if let Some(d) = sigma.iter().position(|&s| s == usize::MAX) {
            return Err(Error::InvalidRotation(format!("dart {d} missing from rotations")));
        }
        Self::from_parts(num_vertices, dart_vertex, alpha, sigma, outer_dart)
    }

    /// Validated construction of an input graph: rotations are given as the
    /// counterclockwise order of neighbour vertices, and the outer face is the
    /// face to the left of the directed edge `outer`. The result must be
    /// connected, simple, planar and have minimum degree 2.
    pub fn build(
        num_vertices: usize,
        edges: &[(usize, usize)],
        neighbour_rotations: &[Vec<usize>],
        outer: (usize, usize),
    ) -> Result<Self> {
        if neighbour_rotations.len() != num_vertices {
            return Err(Error::InvalidRotation("one rotation per vertex required".into()));
        }
        let mut lookup = std::collections::HashMap::new();
        for (k, &(u, v)) in edges.iter().enumerate() {
            if u == v {
                return Err(Error::NotSimple(format!("loop at vertex {u}")));
            }
            if lookup.insert((u, v), 2 * k).is_some() || lookup.insert((v, u), 2 * k + 1).is_some() {
                return Err(Error::NotSimple(format!("parallel edges between {u} and {v}")));
            }
        }
        let mut rotations = Vec::with_capacity(num_vertices);
        for (v, nbrs) in neighbour_rotations.iter().enumerate() {
            let mut rot = Vec::with_capacity(nbrs.len());
            for &w in nbrs {
                let d = *lookup
                    .get(&(v, w))
                    .ok_or_else(|| Error::InvalidRotation(format!("rotation at {v} names non-neighbour {w}")))?;
                rot.push(d);
            }
            rotations.push(rot);
        }
        let outer_dart = *lookup
            .get(&outer)
            .ok_or_else(|| Error::InvalidRotation(format!("outer edge {outer:?} not found")))?;
        let map = Self::from_rotations(num_vertices, edges, &rotations, Some(outer_dart))?;
        map.validate_input_graph()?;
        Ok(map)
    }

    /// Standing assumptions on input graphs: connected, simple, planar,
    /// minimum degree two.
    pub fn validate_input_graph(&self) -> Result<()> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        for v in 0..self.num_vertices {
            if self.degree(v) < 2 {
                return Err(Error::DegreeTooLow {
                    vertex: v,
                    degree: self.degree(v),
                });
            }
            let mut nbrs: Vec<usize> = self.vertex_darts[v].iter().map(|&d| self.head(d)).collect();
            if nbrs.contains(&v) {
                return Err(Error::NotSimple(format!("loop at vertex {v}")));
            }
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::NotSimple(format!("parallel edges at vertex {v}")));
            }
        }
        let euler = self.euler_characteristic();
        if euler != 2 {
            return Err(Error::NonPlanar { euler });
        }
        if self.outer_dart.is_none() {
            return Err(Error::InvalidRotation("no outer face designated".into()));
        }
        Ok(())
    }

    pub fn with_vertex_labels(mut self, labels: Vec<String>) -> Self {
        self.vertex_labels = Some(labels);
        self
    }

    pub fn vertex_labels(&self) -> Option<&[String]> {
        self.vertex_labels.as_deref()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_darts(&self) -> usize {
        self.alpha.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_dart.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn alpha(&self, d: usize) -> usize {
        self.alpha[d]
    }

    pub fn sigma(&self, d: usize) -> usize {
        self.sigma[d]
    }

    pub fn sigma_inv(&self, d: usize) -> usize {
        self.sigma_inv[d]
    }

    /// Next dart along the face to the left of `d`.
    pub fn next_in_face(&self, d: usize) -> usize {
        self.sigma_inv[self.alpha[d]]
    }

    /// Origin vertex of a dart.
    pub fn vertex(&self, d: usize) -> usize {
        self.dart_vertex[d]
    }

    pub fn head(&self, d: usize) -> usize {
        self.dart_vertex[self.alpha[d]]
    }

    pub fn edge(&self, d: usize) -> usize {
        self.dart_edge[d]
    }

    /// The two darts of an edge, the smaller id first.
    pub fn edge_darts(&self, e: usize) -> (usize, usize) {
        let d = self.edge_dart[e];
        (d, self.alpha[d])
    }

    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let (d, a) = self.edge_darts(e);
        (self.dart_vertex[d], self.dart_vertex[a])
    }

    /// Face to the left of `d`.
    pub fn face(&self, d: usize) -> usize {
        self.dart_face[d]
    }

    pub fn face_darts(&self, f: usize) -> &[usize] {
        &self.faces[f]
    }

    pub fn outer_face(&self) -> usize {
        self.outer_face
    }

    pub fn outer_dart(&self) -> Option<usize> {
        self.outer_dart
    }

    pub fn is_outer(&self, d: usize) -> bool {
        self.outer_dart.is_some() && self.dart_face[d] == self.outer_face
    }

    /// Darts leaving `v`, counterclockwise.
    pub fn darts_at(&self, v: usize) -> &[usize] {
        &self.vertex_darts[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertex_darts[v].len()
    }

    /// Darts of the outer face in traversal order, starting at the
    /// designated outer dart. Each one marks a boundary corner: the angle
    /// at its origin between it and `sigma` of it.
    pub fn outer_darts(&self) -> Vec<usize> {
        let Some(start) = self.outer_dart else {
            return Vec::new();
        };
        let mut out = vec![start];
        let mut d = self.next_in_face(start);
        while d != start {
            out.push(d);
            d = self.next_in_face(d);
        }
        out
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.outer_darts().iter().map(|&d| self.vertex(d)).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn inner_faces(&self) -> Vec<usize> {
        (0..self.num_faces())
            .filter(|&f| self.outer_dart.is_none() || f != self.outer_face)
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return true;
        }
        let mut seen = vec![false; self.num_vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &d in &self.vertex_darts[v] {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.num_vertices
    }

    /// Planar dual. Darts are shared with `self`: dart `d` of the dual leaves
    /// the face to the left of `d` and crosses edge `edge(d)`, so edge ids
    /// agree. Dual vertex `f` is face `f` of `self`. The dual's outer face is
    /// the one around the origin of the outer dart.
    pub fn dual(&self) -> PlanarMap {
        let n = self.num_darts();
        let sigma: Vec<usize> = (0..n).map(|d| self.next_in_face(d)).collect();
        let outer = self.outer_dart.map(|d| self.alpha[d]);
        PlanarMap::from_parts(
            self.num_faces(),
            self.dart_face.clone(),
            self.alpha.clone(),
            sigma,
            outer,
        )
        .expect("dual of a valid map is valid")
    }

    /// Keeps only the darts flagged in `keep` (closed under `alpha`) and the
    /// vertices flagged in `keep_vertex`, renumbering both. Rotations are
    /// restricted in place. Returns the submap with old-to-new dart and
    /// vertex maps.
    pub fn submap(
        &self,
        keep: &[bool],
        keep_vertex: &[bool],
        outer_pick: impl Fn(&[usize]) -> Option<usize>,
    ) -> (PlanarMap, Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut vmap = vec![None; self.num_vertices];
        let mut nv = 0;
        for v in 0..self.num_vertices {
            if keep_vertex[v] {
                vmap[v] = Some(nv);
                nv += 1;
            }
        }
        let mut dmap = vec![None; self.num_darts()];
        let mut kept = Vec::new();
        for e in 0..self.num_edges() {
            let (d, a) = self.edge_darts(e);
            if keep[d] && keep[a] {
                dmap[d] = Some(kept.len());
                kept.push(d);
                dmap[a] = Some(kept.len());
                kept.push(a);
            }
        }
        let m = kept.len();
        let mut dart_vertex = vec![0; m];
        let mut alpha = vec![0; m];
        let mut sigma = vec![0; m];
        for (new, &old) in kept.iter().enumerate() {
            dart_vertex[new] = vmap[self.vertex(old)].expect("kept dart on dropped vertex");
            alpha[new] = dmap[self.alpha[old]].unwrap();
            let mut s = self.sigma[old];
            while dmap[s].is_none() {
                s = self.sigma[s];
            }
            sigma[new] = dmap[s].unwrap();
        }
        let new_to_old: Vec<usize> = kept.clone();
        let outer = outer_pick(&new_to_old);
        let sub = PlanarMap::from_parts(nv, dart_vertex, alpha, sigma, outer).expect("submap of a valid map is valid");
        (sub, dmap, vmap)
    }

    /// Canonical code from a starting dart: darts are relabelled in BFS
    /// order over `sigma` and `alpha`, and the code lists the relabelled
    /// permutations. Only the component of `anchor` is covered.
    pub fn canonical_code(&self, anchor: usize) -> Vec<usize> {
        let n = self.num_darts();
        let mut label = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([anchor]);
        label[anchor] = 0;
        order.push(anchor);
        while let Some(d) = queue.pop_front() {
            for next in [self.sigma[d], self.alpha[d]] {
                if label[next] == usize::MAX {
                    label[next] = order.len();
                    order.push(next);
                    queue.push_back(next);
                }
            }
        }
        let mut code = Vec::with_capacity(2 * order.len() + 1);
        code.push(order.len());
        for &d in &order {
            code.push(label[self.sigma[d]]);
            code.push(label[self.alpha[d]]);
        }
        code
    }

    /// Isomorphism of connected maps as rotation systems (orientation
    /// preserving, outer face ignored).
    pub fn is_isomorphic(&self, other: &PlanarMap) -> bool {
        if self.num_darts() != other.num_darts() || self.num_vertices != other.num_vertices {
            return false;
        }
        if self.num_darts() == 0 {
            return true;
        }
        let code = self.canonical_code(0);
        (0..other.num_darts()).any(|a| other.canonical_code(a) == code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn cycles_and_grid_satisfy_euler() {
        let c3 = generators::cycle(3).unwrap().map;
        assert_eq!((c3.num_vertices(), c3.num_edges(), c3.num_faces()), (3, 3, 2));
        let c4 = generators::cycle(4).unwrap().map;
        assert_eq!((c4.num_vertices(), c4.num_edges(), c4.num_faces()), (4, 4, 2));
        let grid = generators::grid(3, 3).unwrap().map;
        assert_eq!((grid.num_vertices(), grid.num_edges(), grid.num_faces()), (9, 12, 5));
        for m in [&c3, &c4, &grid] {
            assert_eq!(m.euler_characteristic(), 2);
        }
    }

    #[test]
    fn outer_face_is_the_boundary_cycle() {
        let grid = generators::grid(3, 3).unwrap().map;
        assert_eq!(grid.outer_darts().len(), 8);
        assert_eq!(grid.boundary_vertices().len(), 8);
        for f in grid.inner_faces() {
            assert_eq!(grid.face_darts(f).len(), 4);
        }
    }

    #[test]
    fn build_rejects_bad_inputs() {
        // two disjoint triangles
        let edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)];
        let rot = vec![vec![1, 2], vec![2, 0], vec![0, 1], vec![4, 5], vec![5, 3], vec![3, 4]];
        assert!(matches!(
            PlanarMap::build(6, &edges, &rot, (0, 1)),
            Err(Error::Disconnected)
        ));
        // path: degree one endpoints
        let edges = [(0, 1), (1, 2)];
        let rot = vec![vec![1], vec![0, 2], vec![1]];
        assert!(matches!(
            PlanarMap::build(3, &edges, &rot, (0, 1)),
            Err(Error::DegreeTooLow { .. })
        ));
        // K4 with a twisted rotation at one vertex is not planar
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 1)];
        let rot = vec![vec![1, 2, 3], vec![0, 3, 2], vec![0, 1, 3], vec![0, 1, 2]];
        assert!(matches!(
            PlanarMap::build(4, &edges, &rot, (0, 1)),
            Err(Error::NonPlanar { .. })
        ));
    }

    #[test]
    fn rotation_must_cover_each_dart_once() {
        let edges = [(0, 1), (1, 2), (2, 0)];
        let rot = vec![vec![0, 5, 0], vec![1, 2], vec![3, 4]];
        assert!(PlanarMap::from_rotations(3, &edges, &rot, Some(0)).is_err());
    }

    #[test]
    fn canonical_code_detects_relabelling() {
        let c4 = generators::cycle(4).unwrap().map;
        let c3 = generators::cycle(3).unwrap().map;
        assert!(c4.is_isomorphic(&c4.clone()));
        assert!(!c4.is_isomorphic(&c3));
    }
}
