use crate::error::{Error, Result};
use crate::planar::PlanarMap;

/// Union-find over `n` elements.
#[derive(Debug, Clone)]
pub struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a] = b;
        true
    }
}

/// Whether the listed edges (by endpoints) form a spanning tree on `n`
/// vertices.
pub fn is_spanning_tree(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> bool {
    let mut dsu = Dsu::new(n);
    let mut count = 0;
    for (u, v) in edges {
        if !dsu.union(u, v) {
            return false;
        }
        count += 1;
    }
    count + 1 == n.max(1)
}

/// Edges of the dual not crossed by the spanning tree `tree` (edge ids of
/// `m`, which are also edge ids of its dual).
pub fn dual_tree(m: &PlanarMap, tree: &[usize]) -> Result<Vec<usize>> {
    if !is_spanning_tree(m.num_vertices(), tree.iter().map(|&e| m.edge_endpoints(e))) {
        return Err(Error::NotATree(format!(
            "{} edges do not span {} vertices acyclically",
            tree.len(),
            m.num_vertices()
        )));
    }
    let mut in_tree = vec![false; m.num_edges()];
    for &e in tree {
        in_tree[e] = true;
    }
    let out: Vec<usize> = (0..m.num_edges()).filter(|&e| !in_tree[e]).collect();
    debug_assert!({
        let d = m.dual();
        is_spanning_tree(d.num_vertices(), out.iter().map(|&e| d.edge_endpoints(e)))
    });
    Ok(out)
}
