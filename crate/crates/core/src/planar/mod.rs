//! Planar maps and the graphs derived from them.

mod derived;
mod extended;
mod map;

pub use derived::{double_graph_q, quad_graph, restricted_dual};
pub use extended::{extended_double, extended_pair, ExtendedDouble, ExtendedPair};
pub use map::PlanarMap;

use serde::{Deserialize, Serialize};

/// What a vertex of a derived graph stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexClass {
    Primal {
        vertex: usize,
    },
    Dual {
        face: usize,
    },
    /// Copy of the outer dual vertex attached to one boundary edge.
    SplitDual {
        dart: usize,
    },
    /// White vertex sitting on an edge of the primal graph.
    EdgeWhite {
        edge: usize,
    },
    /// White vertex sitting in a boundary corner.
    CornerWhite {
        dart: usize,
    },
    QuadWhite {
        dart: usize,
    },
    QuadBlack {
        dart: usize,
    },
    /// Second copy of a boundary corner vertex receiving its in-arcs.
    CornerCopy {
        dart: usize,
    },
    Root,
}

/// Which construction step produced an edge of a derived graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeOrigin {
    PrimalEdge { edge: usize },
    DualEdge { edge: usize },
    QuadCorner { dart: usize },
    CrossesPrimal { dart: usize },
    CrossesDual { dart: usize },
    External { dart: usize, boundary: bool },
    CornerEdge { dart: usize },
    DualCycle { dart: usize },
    HalfPrimal { dart: usize },
    HalfDual { dart: usize },
    BoundaryPrimal { dart: usize },
    BoundaryDualOpen { dart: usize },
    SplitEdge { dart: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Primal,
    Dual,
    RestrictedDual,
    Quad,
    QuadriTiling,
    ExtendedGraph,
    ExtendedDual,
    ExtendedDouble,
}

/// A map together with provenance for each vertex and edge.
#[derive(Debug, Clone)]
pub struct DerivedMap {
    pub kind: GraphKind,
    pub map: PlanarMap,
    pub vertex_class: Vec<VertexClass>,
    pub edge_origin: Vec<EdgeOrigin>,
}

impl DerivedMap {
    /// Short tag used in exports: one of `primal`, `dual`, `white`,
    /// `black`, `bullet-black`, `lozenge-black`, `root-r`.
    pub fn tag(&self, v: usize) -> &'static str {
        let double = self.kind == GraphKind::ExtendedDouble;
        match self.vertex_class[v] {
            VertexClass::Primal { .. } | VertexClass::CornerCopy { .. } if double => "bullet-black",
            VertexClass::Primal { .. } | VertexClass::CornerCopy { .. } => "primal",
            VertexClass::Dual { .. } | VertexClass::SplitDual { .. } if double => "lozenge-black",
            VertexClass::Dual { .. } | VertexClass::SplitDual { .. } => "dual",
            VertexClass::EdgeWhite { .. } | VertexClass::CornerWhite { .. } | VertexClass::QuadWhite { .. } => "white",
            VertexClass::QuadBlack { .. } => "black",
            VertexClass::Root => "root-r",
        }
    }

    pub fn is_white(&self, v: usize) -> bool {
        self.tag(v) == "white"
    }

    pub fn find_vertex(&self, class: VertexClass) -> Option<usize> {
        self.vertex_class.iter().position(|&c| c == class)
    }

    pub fn find_edge(&self, origin: EdgeOrigin) -> Option<usize> {
        self.edge_origin.iter().position(|&o| o == origin)
    }
}
