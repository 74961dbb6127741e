//! Graph JSON: vertices with coordinates and tags, darts with twin, next
//! dart in the same face and origin vertex, and the outer face.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::EmbeddedGraph;
use crate::oracles::{ArcOrigin, WeightedDigraph};
use crate::planar::{DerivedMap, EdgeOrigin, PlanarMap, VertexClass};
use crate::report::Value;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub y: Option<f64>,
    #[serde(default = "primal_tag")]
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<VertexClass>,
}

fn primal_tag() -> String {
    "primal".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DartRecord {
    pub id: usize,
    pub twin: usize,
    /// Next dart along the face to the left.
    pub next: usize,
    pub vertex: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<EdgeOrigin>,
}

/// Rhombus half-angle of an edge in radians, with the exact multiple of pi
/// when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleRecord {
    pub edge: usize,
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_ratio: Option<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub vertices: Vec<VertexRecord>,
    pub darts: Vec<DartRecord>,
    pub outer_face: usize,
    /// Designated dart on the outer face; defaults to its first dart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_dart: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub angles: Vec<AngleRecord>,
}

fn darts_of(m: &PlanarMap, origin: impl Fn(usize) -> Option<EdgeOrigin>) -> Vec<DartRecord> {
    (0..m.num_darts())
        .map(|d| DartRecord {
            id: d,
            twin: m.alpha(d),
            next: m.next_in_face(d),
            vertex: m.vertex(d),
            origin: origin(m.edge(d)),
        })
        .collect()
}

impl GraphFile {
    pub fn from_embedded(g: &EmbeddedGraph) -> Self {
        let m = &g.map;
        let vertices = g
            .coords
            .iter()
            .enumerate()
            .map(|(id, p)| VertexRecord {
                id,
                x: Some(p[0]),
                y: Some(p[1]),
                tag: primal_tag(),
                class: None,
            })
            .collect();
        let angles = g
            .theta_pi
            .as_ref()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .map(|(edge, &[p, q])| AngleRecord {
                        edge,
                        theta: p as f64 / q as f64 * std::f64::consts::PI,
                        pi_ratio: Some([p, q]),
                    })
                    .collect()
            })
            .unwrap_or_default();
        GraphFile {
            name: Some(g.name.clone()),
            kind: None,
            vertices,
            darts: darts_of(m, |_| None),
            outer_face: m.outer_face(),
            outer_dart: m.outer_dart(),
            angles,
        }
    }

    /// Derived graph with best-effort positions and class tags.
    pub fn from_derived(name: &str, dm: &DerivedMap, positions: &[[f64; 2]], root_s: Option<usize>) -> Self {
        let vertices = (0..dm.map.num_vertices())
            .map(|id| VertexRecord {
                id,
                x: positions.get(id).map(|p| p[0]),
                y: positions.get(id).map(|p| p[1]),
                tag: if Some(id) == root_s { "root-s" } else { dm.tag(id) }.to_string(),
                class: Some(dm.vertex_class[id]),
            })
            .collect();
        GraphFile {
            name: Some(name.to_string()),
            kind: Some(format!("{:?}", dm.kind)),
            vertices,
            darts: darts_of(&dm.map, |e| Some(dm.edge_origin[e])),
            outer_face: dm.map.outer_face(),
            outer_dart: dm.map.outer_dart(),
            angles: Vec::new(),
        }
    }

    /// Rebuilds the map; `sigma` follows from `next` and `twin`.
    pub fn to_map(&self) -> Result<PlanarMap> {
        let nv = self.vertices.len();
        let nd = self.darts.len();
        let mut seen = vec![false; nv];
        for v in &self.vertices {
            if v.id >= nv || std::mem::replace(&mut seen[v.id], true) {
                return Err(Error::BadParams(format!("vertex ids must be 0..{nv} without repeats")));
            }
        }
        let mut vertex = vec![usize::MAX; nd];
        let mut alpha = vec![usize::MAX; nd];
        let mut next = vec![usize::MAX; nd];
        for r in &self.darts {
            if r.id >= nd || vertex[r.id] != usize::MAX {
                return Err(Error::BadParams(format!("dart ids must be 0..{nd} without repeats")));
            }
            if r.twin >= nd || r.next >= nd {
                return Err(Error::InvalidRotation(format!(
                    "dart {} points outside the dart set",
                    r.id
                )));
            }
            vertex[r.id] = r.vertex;
            alpha[r.id] = r.twin;
            next[r.id] = r.next;
        }
        // next = sigma^{-1} . alpha, so sigma(next(d)) = alpha(d)
        let mut sigma = vec![usize::MAX; nd];
        for d in 0..nd {
            if sigma[next[d]] != usize::MAX {
                return Err(Error::InvalidRotation("next is not a permutation".into()));
            }
            sigma[next[d]] = alpha[d];
        }
        let probe = PlanarMap::from_parts(nv, vertex.clone(), alpha.clone(), sigma.clone(), None)?;
        if self.outer_face >= probe.num_faces() {
            return Err(Error::BadParams(format!(
                "outer face {} out of range ({} faces)",
                self.outer_face,
                probe.num_faces()
            )));
        }
        let outer_dart = match self.outer_dart {
            Some(d) if d < nd && probe.face(d) == self.outer_face => d,
            Some(d) => {
                return Err(Error::BadParams(format!(
                    "outer dart {d} does not lie on outer face {}",
                    self.outer_face
                )))
            }
            None => *probe
                .face_darts(self.outer_face)
                .first()
                .ok_or_else(|| Error::BadParams("empty outer face".into()))?,
        };
        PlanarMap::from_parts(nv, vertex, alpha, sigma, Some(outer_dart))
    }

    /// Reads an input graph: the map is validated and every vertex needs
    /// coordinates. Exact angles are kept when all edges carry one.
    pub fn to_embedded(&self) -> Result<EmbeddedGraph> {
        let map = self.to_map()?;
        map.validate_input_graph()?;
        let mut coords = vec![[0.0; 2]; map.num_vertices()];
        for v in &self.vertices {
            match (v.x, v.y) {
                (Some(x), Some(y)) => coords[v.id] = [x, y],
                _ => return Err(Error::BadParams(format!("vertex {} has no coordinates", v.id))),
            }
        }
        let mut exact = vec![None; map.num_edges()];
        for a in &self.angles {
            if a.edge >= map.num_edges() {
                return Err(Error::BadParams(format!("angle for unknown edge {}", a.edge)));
            }
            exact[a.edge] = a.pi_ratio;
        }
        let theta_pi = exact.iter().copied().collect::<Option<Vec<_>>>();
        Ok(EmbeddedGraph {
            name: self.name.clone().unwrap_or_else(|| "input".to_string()),
            map,
            coords,
            theta_pi,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcRecord {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub weight: Value,
    pub origin: ArcOrigin,
}

/// Weighted digraph export.
#[derive(Debug, Clone, Serialize)]
pub struct DigraphFile {
    pub name: String,
    pub kind: String,
    pub root: usize,
    pub vertices: Vec<VertexRecord>,
    pub arcs: Vec<ArcRecord>,
}

impl DigraphFile {
    pub fn new<T: Scalar>(
        name: &str,
        kind: &str,
        g: &WeightedDigraph<T>,
        root: usize,
        tags: &[&str],
        positions: &[[f64; 2]],
    ) -> Self {
        DigraphFile {
            name: name.to_string(),
            kind: kind.to_string(),
            root,
            vertices: (0..g.num_vertices)
                .map(|id| VertexRecord {
                    id,
                    x: positions.get(id).map(|p| p[0]),
                    y: positions.get(id).map(|p| p[1]),
                    tag: tags[id].to_string(),
                    class: None,
                })
                .collect(),
            arcs: g
                .arcs
                .iter()
                .enumerate()
                .map(|(id, a)| ArcRecord {
                    id,
                    from: a.from,
                    to: a.to,
                    weight: a.weight.into(),
                    origin: a.origin,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn round_trip_keeps_the_map() {
        for g in generators::corpus() {
            let f = GraphFile::from_embedded(&g);
            let text = serde_json::to_string(&f).unwrap();
            let back: GraphFile = serde_json::from_str(&text).unwrap();
            let e = back.to_embedded().unwrap();
            assert_eq!(e.map, g.map);
            assert_eq!(e.coords, g.coords);
            assert_eq!(e.theta_pi, g.theta_pi);
        }
    }

    #[test]
    fn minimal_schema_is_accepted() {
        let text = r#"{"vertices":[{"id":0,"x":1,"y":0,"tag":"primal"},{"id":1,"x":-0.5,"y":0.8660254037844386,"tag":"primal"},{"id":2,"x":-0.5,"y":-0.8660254037844386,"tag":"primal"}],
            "darts":[{"id":0,"twin":1,"next":2,"vertex":0},{"id":1,"twin":0,"next":5,"vertex":1},
                     {"id":2,"twin":3,"next":4,"vertex":1},{"id":3,"twin":2,"next":1,"vertex":2},
                     {"id":4,"twin":5,"next":0,"vertex":2},{"id":5,"twin":4,"next":3,"vertex":0}],
            "outer_face":1}"#;
        let f: GraphFile = serde_json::from_str(text).unwrap();
        let g = f.to_embedded().unwrap();
        assert_eq!(g.map.num_faces(), 2);
        assert_eq!(g.map.face_darts(g.map.outer_face()).len(), 3);
        assert!(g.theta_pi.is_none());
    }

    #[test]
    fn bad_next_is_rejected() {
        let g = generators::cycle(3).unwrap();
        let mut f = GraphFile::from_embedded(&g);
        f.darts[0].next = f.darts[1].next;
        assert!(matches!(f.to_map(), Err(Error::InvalidRotation(_))));
    }
}
