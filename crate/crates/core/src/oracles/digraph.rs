use num_complex::Complex;
use serde::Serialize;

use crate::planar::{DerivedMap, EdgeOrigin};
use crate::scalar::Scalar;

/// Provenance of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcOrigin {
    Plain,
    /// One orientation of an undirected edge; `forward` runs from the
    /// edge's first endpoint to its second.
    Edge {
        origin: EdgeOrigin,
        forward: bool,
    },
    /// Arc leaving the vertex of dart `d` across the primal edge.
    PrimalCrossing {
        dart: usize,
    },
    /// Arc leaving the vertex of dart `d` across the dual edge.
    DualCrossing {
        dart: usize,
    },
    /// Arc from a boundary corner vertex straight to the root.
    Boundary {
        dart: usize,
    },
    /// From the split copy of a boundary corner to the original.
    CopyToWhite {
        dart: usize,
    },
    /// From the split copy of a boundary corner to the root.
    CopyToRoot {
        dart: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc<T: Scalar> {
    pub from: usize,
    pub to: usize,
    pub weight: Complex<T>,
    pub origin: ArcOrigin,
}

/// Directed multigraph with complex arc weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph<T: Scalar> {
    pub num_vertices: usize,
    pub arcs: Vec<Arc<T>>,
    pub labels: Option<Vec<String>>,
}

impl<T: Scalar> WeightedDigraph<T> {
    pub fn new(num_vertices: usize) -> Self {
        WeightedDigraph {
            num_vertices,
            arcs: Vec::new(),
            labels: None,
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, weight: Complex<T>, origin: ArcOrigin) -> usize {
        debug_assert!(from < self.num_vertices && to < self.num_vertices);
        self.arcs.push(Arc {
            from,
            to,
            weight,
            origin,
        });
        self.arcs.len() - 1
    }

    /// Both orientations of every edge of a derived map. `weight(e, forward)`
    /// gives the weight of each orientation. Arc `2e` is forward, `2e + 1`
    /// backward.
    pub fn bidirected(g: &DerivedMap, mut weight: impl FnMut(usize, bool) -> Complex<T>) -> Self {
        let mut out = Self::new(g.map.num_vertices());
        for e in 0..g.map.num_edges() {
            let (u, v) = g.map.edge_endpoints(e);
            let origin = g.edge_origin[e];
            out.add_arc(u, v, weight(e, true), ArcOrigin::Edge { origin, forward: true });
            out.add_arc(v, u, weight(e, false), ArcOrigin::Edge { origin, forward: false });
        }
        out
    }

    /// Arc ids leaving each vertex.
    pub fn out_arcs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_vertices];
        for (a, arc) in self.arcs.iter().enumerate() {
            out[arc.from].push(a);
        }
        out
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.arcs.iter().filter(|a| a.from == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.arcs.iter().filter(|a| a.to == v).count()
    }

    pub fn find_arc(&self, origin: ArcOrigin) -> Option<usize> {
        self.arcs.iter().position(|a| a.origin == origin)
    }

    /// Product of arc weights over a set of arc ids.
    pub fn weight_of(&self, arcs: &[usize]) -> Complex<T> {
        arcs.iter()
            .fold(Complex::new(T::one(), T::zero()), |acc, &a| acc * self.arcs[a].weight)
    }
}
