//! Graphviz output. Vertex tags pick shapes and colours; positions are
//! pinned so `neato -n` reproduces the embedding.

use std::fmt::Write;

pub struct DotVertex {
    pub id: usize,
    pub tag: String,
    pub label: String,
    pub pos: Option<[f64; 2]>,
}

pub struct DotEdge {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

fn style(tag: &str) -> &'static str {
    match tag {
        "primal" => "shape=circle, style=filled, fillcolor=black, fontcolor=white",
        "dual" => "shape=diamond, style=filled, fillcolor=lightgray",
        "white" => "shape=circle, style=filled, fillcolor=white",
        "black" => "shape=box, style=filled, fillcolor=gray30, fontcolor=white",
        "bullet-black" => "shape=circle, style=filled, fillcolor=black, fontcolor=white",
        "lozenge-black" => "shape=diamond, style=filled, fillcolor=black, fontcolor=white",
        "root-r" => "shape=doublecircle, style=filled, fillcolor=firebrick, fontcolor=white",
        "root-s" => "shape=Mdiamond, style=filled, fillcolor=royalblue, fontcolor=white",
        _ => "shape=ellipse",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders vertices and edges in the order given.
pub fn render(name: &str, directed: bool, vertices: &[DotVertex], edges: &[DotEdge]) -> String {
    let (kw, op) = if directed { ("digraph", "->") } else { ("graph", "--") };
    let mut out = String::new();
    let _ = writeln!(out, "{kw} {} {{", quote(name));
    let _ = writeln!(out, "  node [fontsize=10, width=0.3, height=0.3, fixedsize=false];");
    for v in vertices {
        let _ = write!(
            out,
            "  {} [label={}, tag={}, {}",
            v.id,
            quote(&v.label),
            quote(&v.tag),
            style(&v.tag)
        );
        if let Some([x, y]) = v.pos {
            // points, so `neato -n` can use them directly
            let _ = write!(out, ", pos=\"{:.3},{:.3}!\"", 72.0 * x, 72.0 * y);
        }
        out.push_str("];\n");
    }
    for e in edges {
        let _ = write!(out, "  {} {op} {}", e.from, e.to);
        if !e.label.is_empty() {
            let _ = write!(out, " [label={}]", quote(&e.label));
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}
