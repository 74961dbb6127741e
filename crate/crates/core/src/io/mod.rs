//! Reading and writing graphs: JSON, Graphviz, and exports of every derived
//! graph.

pub mod dot;
pub mod json;

use std::str::FromStr;

use crate::correspondence::{build_g, build_g0, DirectedModel, Stage};
use crate::error::{Error, Result};
use crate::generators::EmbeddedGraph;
use crate::isoradial::{validate_isoradial, IsoradialData};
use crate::kasteleyn::critical_kasteleyn;
use crate::planar::{extended_double, quad_graph, DerivedMap, EdgeOrigin, GraphKind, PlanarMap, VertexClass};
use crate::scalar::Tolerances;

pub use json::{DigraphFile, GraphFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportTarget {
    Primal,
    Dual,
    Quad,
    QuadriTiling,
    ExtendedDouble,
    G0,
    G,
}

impl FromStr for ExportTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "primal" => ExportTarget::Primal,
            "dual" => ExportTarget::Dual,
            "quad" => ExportTarget::Quad,
            "quadri_tiling" => ExportTarget::QuadriTiling,
            "extended_double" => ExportTarget::ExtendedDouble,
            "G0" | "g0" => ExportTarget::G0,
            "G" | "g" => ExportTarget::G,
            other => return Err(Error::UnknownTarget(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Dot,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(Format::Dot),
            "json" => Ok(Format::Json),
            other => Err(Error::BadParams(format!("unknown format {other:?}; use dot or json"))),
        }
    }
}

/// Validates the embedding; exact angles replace the measured ones when
/// the graph carries them.
pub fn isoradial_of(g: &EmbeddedGraph, tol: &Tolerances) -> Result<IsoradialData<f64>> {
    let iso = validate_isoradial(&g.map, &g.coords, tol)?;
    match &g.theta_pi {
        Some(t) => {
            let exact = t
                .iter()
                .map(|&[p, q]| p as f64 / q as f64 * std::f64::consts::PI)
                .collect();
            iso.with_exact_theta(exact, tol)
        }
        None => Ok(iso),
    }
}

pub fn read_graph(text: &str) -> Result<EmbeddedGraph> {
    let f: GraphFile = serde_json::from_str(text)?;
    f.to_embedded()
}

pub fn graph_json(g: &EmbeddedGraph) -> Result<String> {
    Ok(serde_json::to_string_pretty(&GraphFile::from_embedded(g))?)
}

fn primal_map(m: &PlanarMap) -> DerivedMap {
    DerivedMap {
        kind: GraphKind::Primal,
        map: m.clone(),
        vertex_class: (0..m.num_vertices())
            .map(|vertex| VertexClass::Primal { vertex })
            .collect(),
        edge_origin: (0..m.num_edges()).map(|edge| EdgeOrigin::PrimalEdge { edge }).collect(),
    }
}

fn dual_map(m: &PlanarMap) -> DerivedMap {
    let map = m.dual();
    DerivedMap {
        kind: GraphKind::Dual,
        vertex_class: (0..map.num_vertices()).map(|face| VertexClass::Dual { face }).collect(),
        edge_origin: (0..map.num_edges()).map(|edge| EdgeOrigin::DualEdge { edge }).collect(),
        map,
    }
}

/// Drawing positions for derived vertices, placed near the primal feature
/// they stand for.
struct Layout<'a> {
    g: &'a EmbeddedGraph,
    root: [f64; 2],
}

impl<'a> Layout<'a> {
    fn new(g: &'a EmbeddedGraph) -> Self {
        let n = g.coords.len().max(1) as f64;
        let cx = g.coords.iter().map(|p| p[0]).sum::<f64>() / n;
        let min_y = g.coords.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        Layout {
            g,
            root: [cx, min_y - 1.5],
        }
    }

    fn along(&self, d: usize, t: f64, side: f64) -> [f64; 2] {
        let m = &self.g.map;
        let p = self.g.coords[m.vertex(d)];
        let q = self.g.coords[m.head(d)];
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        // left of the dart is (-dy, dx)
        [p[0] + t * dx - side * dy, p[1] + t * dy + side * dx]
    }

    fn face_point(&self, f: usize) -> [f64; 2] {
        let m = &self.g.map;
        if f == m.outer_face() {
            return self.root;
        }
        let ds = m.face_darts(f);
        let k = ds.len().max(1) as f64;
        let sx = ds.iter().map(|&d| self.g.coords[m.vertex(d)][0]).sum::<f64>();
        let sy = ds.iter().map(|&d| self.g.coords[m.vertex(d)][1]).sum::<f64>();
        [sx / k, sy / k]
    }

    fn class(&self, c: VertexClass) -> [f64; 2] {
        match c {
            VertexClass::Primal { vertex } => self.g.coords[vertex],
            VertexClass::Dual { face } => self.face_point(face),
            VertexClass::SplitDual { dart } => self.along(dart, 0.5, 0.5),
            VertexClass::EdgeWhite { edge } => self.along(self.g.map.edge_darts(edge).0, 0.5, 0.0),
            VertexClass::CornerWhite { dart } => self.along(dart, 0.15, 0.3),
            VertexClass::CornerCopy { dart } => self.along(dart, 0.1, 0.45),
            VertexClass::QuadWhite { dart } => self.along(dart, 0.25, 0.12),
            VertexClass::QuadBlack { dart } => self.along(dart, 0.5, 0.3),
            VertexClass::Root => self.root,
        }
    }
}

fn class_label(c: VertexClass) -> String {
    match c {
        VertexClass::Primal { vertex } => format!("v{vertex}"),
        VertexClass::Dual { face } => format!("f{face}"),
        VertexClass::SplitDual { dart } => format!("u{dart}"),
        VertexClass::EdgeWhite { edge } => format!("w{edge}"),
        VertexClass::CornerWhite { dart } => format!("c{dart}"),
        VertexClass::CornerCopy { dart } => format!("b{dart}"),
        VertexClass::QuadWhite { dart } => format!("W{dart}"),
        VertexClass::QuadBlack { dart } => format!("B{dart}"),
        VertexClass::Root => "r".to_string(),
    }
}

fn derived_dot(name: &str, dm: &DerivedMap, layout: &Layout, root_s: Option<usize>) -> String {
    let vertices: Vec<dot::DotVertex> = (0..dm.map.num_vertices())
        .map(|id| dot::DotVertex {
            id,
            tag: if Some(id) == root_s { "root-s" } else { dm.tag(id) }.to_string(),
            label: class_label(dm.vertex_class[id]),
            pos: Some(layout.class(dm.vertex_class[id])),
        })
        .collect();
    let edges: Vec<dot::DotEdge> = (0..dm.map.num_edges())
        .map(|e| {
            let (from, to) = dm.map.edge_endpoints(e);
            dot::DotEdge {
                from,
                to,
                label: format!("e{e}"),
            }
        })
        .collect();
    dot::render(name, false, &vertices, &edges)
}

fn model_positions(model: &DirectedModel<f64>, layout: &Layout) -> (Vec<[f64; 2]>, Vec<&'static str>) {
    let n = model.graph.num_vertices;
    let mut pos = vec![layout.root; n];
    let mut tags = vec!["root-r"; n];
    for (d, p) in pos.iter_mut().enumerate().take(model.root_r) {
        *p = layout.class(VertexClass::QuadWhite { dart: d });
        tags[d] = "white";
    }
    for (d, copy) in model.corner_copy.iter().enumerate() {
        if let Some(b) = copy {
            pos[*b] = layout.class(VertexClass::CornerCopy { dart: d });
            tags[*b] = "primal";
        }
    }
    (pos, tags)
}

fn model_dot(name: &str, model: &DirectedModel<f64>, layout: &Layout) -> String {
    let (pos, tags) = model_positions(model, layout);
    let vertices: Vec<dot::DotVertex> = (0..model.graph.num_vertices)
        .map(|id| dot::DotVertex {
            id,
            tag: tags[id].to_string(),
            label: if id == model.root_r {
                "r".to_string()
            } else if id < model.root_r {
                format!("x{id}")
            } else {
                format!("b{id}")
            },
            pos: Some(pos[id]),
        })
        .collect();
    let edges: Vec<dot::DotEdge> = model
        .graph
        .arcs
        .iter()
        .map(|a| dot::DotEdge {
            from: a.from,
            to: a.to,
            label: format!("{:.4}{:+.4}i", a.weight.re, a.weight.im),
        })
        .collect();
    dot::render(name, true, &vertices, &edges)
}

/// Serializes one graph of the construction. Output depends only on the
/// input, so repeated exports are byte-identical.
pub fn export(
    g: &EmbeddedGraph,
    target: ExportTarget,
    format: Format,
    root_s: Option<usize>,
    tol: &Tolerances,
) -> Result<String> {
    let layout = Layout::new(g);
    let name = format!("{}:{}", g.name, target_name(target));
    let derived = match target {
        ExportTarget::Primal => Some((primal_map(&g.map), None)),
        ExportTarget::Dual => Some((dual_map(&g.map), None)),
        ExportTarget::Quad => Some((quad_graph(&g.map, true), None)),
        ExportTarget::QuadriTiling => Some((crate::planar::double_graph_q(&g.map), None)),
        ExportTarget::ExtendedDouble => {
            let dd = extended_double(&g.map);
            let s = match root_s {
                None => dd.default_root_s,
                Some(s) if dd.root_candidates().contains(&s) => s,
                Some(s) => {
                    return Err(Error::BadParams(format!(
                        "root s = {s} is not a boundary lozenge vertex"
                    )))
                }
            };
            Some((dd.double, Some(s)))
        }
        ExportTarget::G0 | ExportTarget::G => None,
    };
    if let Some((dm, s)) = derived {
        let positions: Vec<[f64; 2]> = dm.vertex_class.iter().map(|&c| layout.class(c)).collect();
        return Ok(match format {
            Format::Dot => derived_dot(&name, &dm, &layout, s),
            Format::Json => serde_json::to_string_pretty(&GraphFile::from_derived(&name, &dm, &positions, s))?,
        });
    }
    let iso = isoradial_of(g, tol)?;
    let kd = critical_kasteleyn(&iso)?;
    let g0 = build_g0(&kd.gq, &iso)?;
    let model = if target == ExportTarget::G {
        build_g(&g0, &iso)?
    } else {
        g0
    };
    Ok(match format {
        Format::Dot => model_dot(&name, &model, &layout),
        Format::Json => {
            let (pos, tags) = model_positions(&model, &layout);
            let kind = if model.stage == Stage::G { "G" } else { "G0" };
            serde_json::to_string_pretty(&DigraphFile::new(&name, kind, &model.graph, model.root_r, &tags, &pos))?
        }
    })
}

pub fn target_name(t: ExportTarget) -> &'static str {
    match t {
        ExportTarget::Primal => "primal",
        ExportTarget::Dual => "dual",
        ExportTarget::Quad => "quad",
        ExportTarget::QuadriTiling => "quadri_tiling",
        ExportTarget::ExtendedDouble => "extended_double",
        ExportTarget::G0 => "G0",
        ExportTarget::G => "G",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn quadri_tiling_of_c4_has_sixteen_nodes() {
        let g = generators::cycle(4).unwrap();
        let s = export(
            &g,
            ExportTarget::QuadriTiling,
            Format::Dot,
            None,
            &Tolerances::default(),
        )
        .unwrap();
        let nodes = s
            .lines()
            .filter(|l| l.contains("[label=") && l.contains("tag="))
            .count();
        assert_eq!(nodes, 16);
    }

    #[test]
    fn exports_are_deterministic() {
        let g = generators::grid(3, 3).unwrap();
        for t in ["primal", "dual", "quad", "quadri_tiling", "extended_double", "G0", "G"] {
            let t: ExportTarget = t.parse().unwrap();
            for f in [Format::Dot, Format::Json] {
                let a = export(&g, t, f, None, &Tolerances::default()).unwrap();
                let b = export(&g, t, f, None, &Tolerances::default()).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn extended_double_json_carries_tags() {
        let g = generators::cycle(4).unwrap();
        let s = export(
            &g,
            ExportTarget::ExtendedDouble,
            Format::Json,
            None,
            &Tolerances::default(),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let tags: Vec<&str> = v["vertices"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x["tag"].as_str().unwrap())
            .collect();
        assert_eq!(tags.iter().filter(|&&t| t == "bullet-black").count(), 4);
        assert_eq!(tags.iter().filter(|&&t| t == "lozenge-black").count(), 4);
        assert_eq!(tags.iter().filter(|&&t| t == "root-s").count(), 1);
        assert_eq!(tags.iter().filter(|&&t| t == "white").count(), 8);
    }

    #[test]
    fn unknown_target_is_an_error() {
        assert!(matches!("tree".parse::<ExportTarget>(), Err(Error::UnknownTarget(_))));
    }
}
