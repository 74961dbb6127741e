//! The directed graphs `G0` (Kasteleyn matrix read as a Laplacian) and `G`
//! (boundary vertices split), and the tree map between them.

use std::collections::HashSet;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isoradial::IsoradialData;
use crate::oracles::{ArcOrigin, WeightedDigraph};
use crate::planar::{DerivedMap, EdgeOrigin, VertexClass};
use crate::scalar::{cis, im_unit, real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    G0,
    G,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::G0 => "G0",
            Stage::G => "G",
        })
    }
}

/// Vertex `d` (for each dart `d`) is the white `W(d)` with its external
/// edge contracted; the root `r` is vertex `D`. In `G`, the split copy of a
/// boundary vertex `x_d` receives id `D + 1 + k` for the `k`-th outer dart.
#[derive(Debug, Clone)]
pub struct DirectedModel<T: Scalar> {
    pub graph: WeightedDigraph<T>,
    pub root_r: usize,
    pub stage: Stage,
    pub outer_darts: Vec<usize>,
    /// Split copy `b3` per dart, `G` only.
    pub corner_copy: Vec<Option<usize>>,
}

/// Contracts every external edge of `G^Q` and orients the quadrangle
/// edges from white to black.
pub fn build_g0<T: Scalar>(gq: &DerivedMap, iso: &IsoradialData<T>) -> Result<DirectedModel<T>> {
    let map = &iso.map;
    let n = map.num_darts();
    let r = n;
    let i = im_unit::<T>();
    let mut g = WeightedDigraph::new(n + 1);
    for (k, o) in gq.edge_origin.iter().enumerate() {
        let (w, b) = gq.map.edge_endpoints(k);
        let VertexClass::QuadBlack { dart: bd } = gq.vertex_class[b] else {
            return Err(Error::MissingProvenance(k));
        };
        // B(bd) is merged with the white whose external edge reaches it
        let target = map.sigma_inv(bd);
        match *o {
            EdgeOrigin::CrossesPrimal { dart } => {
                let t = iso.theta[map.edge(dart)];
                g.add_arc(w, target, i * t.cos(), ArcOrigin::PrimalCrossing { dart });
            }
            EdgeOrigin::CrossesDual { dart } => {
                let t = iso.theta[map.edge(dart)];
                g.add_arc(w, target, real(t.sin()), ArcOrigin::DualCrossing { dart });
            }
            EdgeOrigin::External { dart, boundary } => {
                if boundary {
                    let t = iso.theta[map.edge(dart)];
                    let tb = iso.theta_boundary[dart].ok_or(Error::MissingProvenance(k))?;
                    let wgt = i * cis(-t) * (cis(-tb) - real(T::one()));
                    g.add_arc(w, r, wgt, ArcOrigin::Boundary { dart });
                }
            }
            _ => return Err(Error::MissingProvenance(k)),
        }
    }
    g.labels = Some((0..n).map(|d| format!("x{d}")).chain(["r".to_string()]).collect());
    Ok(DirectedModel {
        graph: g,
        root_r: r,
        stage: Stage::G0,
        outer_darts: map.outer_darts(),
        corner_copy: vec![None; n],
    })
}

/// Undoes the merge at every boundary vertex: `x` keeps its out-arcs, a
/// new vertex `b3` takes its in-arcs, with arcs `b3 -> x` (weight 1) and
/// `b3 -> r` (weight `e^{-i theta_bd} - 1`).
pub fn build_g<T: Scalar>(g0: &DirectedModel<T>, iso: &IsoradialData<T>) -> Result<DirectedModel<T>> {
    if g0.stage != Stage::G0 {
        return Err(Error::WrongStage {
            expected: Stage::G0.to_string(),
            got: g0.stage.to_string(),
        });
    }
    let n = g0.root_r;
    let r = n;
    let mut corner_copy = vec![None; n];
    for (k, &d) in g0.outer_darts.iter().enumerate() {
        corner_copy[d] = Some(n + 1 + k);
    }
    let mut g = WeightedDigraph::new(n + 1 + g0.outer_darts.len());
    for a in &g0.graph.arcs {
        if matches!(a.origin, ArcOrigin::Boundary { .. }) {
            continue;
        }
        let to = if a.to < n {
            corner_copy[a.to].unwrap_or(a.to)
        } else {
            a.to
        };
        g.add_arc(a.from, to, a.weight, a.origin);
    }
    for &d in &g0.outer_darts {
        let b3 = corner_copy[d].unwrap();
        let tb = iso.theta_boundary[d].ok_or_else(|| Error::NotAnOst(format!("no boundary angle at dart {d}")))?;
        g.add_arc(b3, d, real(T::one()), ArcOrigin::CopyToWhite { dart: d });
        g.add_arc(b3, r, cis(-tb) - real(T::one()), ArcOrigin::CopyToRoot { dart: d });
    }
    let mut labels = g0.graph.labels.clone().unwrap_or_default();
    labels.extend(g0.outer_darts.iter().map(|d| format!("b{d}")));
    g.labels = Some(labels);
    Ok(DirectedModel {
        graph: g,
        root_r: r,
        stage: Stage::G,
        outer_darts: g0.outer_darts.clone(),
        corner_copy,
    })
}

/// Checks that `arcs` is an oriented spanning tree of `g` rooted at `root`
/// and returns the chosen arc per vertex.
pub fn ost_successors<T: Scalar>(g: &WeightedDigraph<T>, root: usize, arcs: &[usize]) -> Result<Vec<Option<usize>>> {
    let mut out = vec![None; g.num_vertices];
    for &a in arcs {
        let arc = g
            .arcs
            .get(a)
            .ok_or_else(|| Error::NotAnOst(format!("unknown arc {a}")))?;
        if arc.from == root {
            return Err(Error::NotAnOst("the root has an outgoing arc".into()));
        }
        if out[arc.from].replace(a).is_some() {
            return Err(Error::NotAnOst(format!("vertex {} has two outgoing arcs", arc.from)));
        }
    }
    for v in 0..g.num_vertices {
        if v == root {
            continue;
        }
        let mut x = v;
        let mut steps = 0;
        while x != root {
            let a = out[x].ok_or_else(|| Error::NotAnOst(format!("vertex {x} has no outgoing arc")))?;
            x = g.arcs[a].to;
            steps += 1;
            if steps > g.num_vertices {
                return Err(Error::NotAnOst(format!("cycle through vertex {v}")));
            }
        }
    }
    Ok(out)
}

/// Maps an oriented spanning tree of `G0` to its images in `G`. At a
/// boundary vertex using its arc to `r`, the copy `b3` goes to `r` and `x`
/// may use either of its two other arcs; otherwise `x` keeps its arc and
/// `b3` points to `x`. Returned trees list arc ids of `G`, sorted.
pub fn map_ost_a_to_d<T: Scalar>(
    g0: &DirectedModel<T>,
    g: &DirectedModel<T>,
    tree: &[usize],
) -> Result<Vec<Vec<usize>>> {
    ost_successors(&g0.graph, g0.root_r, tree)?;
    let pf = PushForward::new(g0, g);
    let (mut base, mut branching) = (Vec::new(), Vec::new());
    pf.split(g0, tree, &mut base, &mut branching);
    let mut images = Vec::with_capacity(1 << branching.len());
    for mask in 0..(1usize << branching.len()) {
        let mut t = base.clone();
        for (k, pair) in branching.iter().enumerate() {
            t.push(pair[mask >> k & 1]);
        }
        t.sort_unstable();
        images.push(t);
    }
    Ok(images)
}

/// Lookup tables for the forward tree map.
struct PushForward {
    /// Arc of `G` with the same origin as each arc of `G0`.
    same_origin: Vec<Option<usize>>,
    /// Per dart: `b3 -> r`, `b3 -> x`, and the two crossing arcs of `x`.
    to_root: Vec<usize>,
    to_white: Vec<usize>,
    crossing: Vec<[usize; 2]>,
    corner_copy: Vec<Option<usize>>,
}

impl PushForward {
    fn new<T: Scalar>(g0: &DirectedModel<T>, g: &DirectedModel<T>) -> Self {
        let index: std::collections::HashMap<ArcOrigin, usize> = g
            .graph
            .arcs
            .iter()
            .enumerate()
            .map(|(a, arc)| (arc.origin, a))
            .collect();
        let n = g0.root_r;
        let mut pf = PushForward {
            same_origin: g0.graph.arcs.iter().map(|a| index.get(&a.origin).copied()).collect(),
            to_root: vec![usize::MAX; n],
            to_white: vec![usize::MAX; n],
            crossing: vec![[usize::MAX; 2]; n],
            corner_copy: g.corner_copy.clone(),
        };
        for (a, arc) in g.graph.arcs.iter().enumerate() {
            match arc.origin {
                ArcOrigin::CopyToRoot { dart } => pf.to_root[dart] = a,
                ArcOrigin::CopyToWhite { dart } => pf.to_white[dart] = a,
                ArcOrigin::PrimalCrossing { dart } => pf.crossing[dart][0] = a,
                ArcOrigin::DualCrossing { dart } => pf.crossing[dart][1] = a,
                _ => {}
            }
        }
        pf
    }

    /// Arcs common to every image, and the binary choices between them.
    fn split<T: Scalar>(
        &self,
        g0: &DirectedModel<T>,
        tree: &[usize],
        base: &mut Vec<usize>,
        branching: &mut Vec<[usize; 2]>,
    ) {
        base.clear();
        branching.clear();
        for &a in tree {
            match g0.graph.arcs[a].origin {
                ArcOrigin::Boundary { dart } => {
                    base.push(self.to_root[dart]);
                    branching.push(self.crossing[dart]);
                }
                _ => {
                    let x = g0.graph.arcs[a].from;
                    base.push(self.same_origin[a].expect("G keeps every non-boundary arc of G0"));
                    if self.corner_copy[x].is_some() {
                        base.push(self.to_white[x]);
                    }
                }
            }
        }
    }
}

/// Inverse of [`map_ost_a_to_d`] on a single image.
pub fn map_ost_d_to_a<T: Scalar>(g0: &DirectedModel<T>, g: &DirectedModel<T>, tree: &[usize]) -> Result<Vec<usize>> {
    let succ = ost_successors(&g.graph, g.root_r, tree)?;
    let pb = PullBack::new(g0, g);
    let mut out: Vec<usize> = (0..g0.root_r)
        .map(|x| pb.arc(x, |v| succ[v].expect("validated")))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Lookup tables for the inverse tree map.
struct PullBack {
    /// Arc of `G0` with the same origin as each arc of `G`.
    same_origin: Vec<usize>,
    /// Arc of `G0` from `x` to `r`, if any.
    boundary: Vec<Option<usize>>,
    to_root: Vec<bool>,
    corner_copy: Vec<Option<usize>>,
}

impl PullBack {
    fn new<T: Scalar>(g0: &DirectedModel<T>, g: &DirectedModel<T>) -> Self {
        let index: std::collections::HashMap<ArcOrigin, usize> = g0
            .graph
            .arcs
            .iter()
            .enumerate()
            .map(|(a, arc)| (arc.origin, a))
            .collect();
        let mut boundary = vec![None; g0.root_r];
        for (a, arc) in g0.graph.arcs.iter().enumerate() {
            if let ArcOrigin::Boundary { dart } = arc.origin {
                boundary[dart] = Some(a);
            }
        }
        PullBack {
            same_origin: g
                .graph
                .arcs
                .iter()
                .map(|a| index.get(&a.origin).copied().unwrap_or(usize::MAX))
                .collect(),
            boundary,
            to_root: g
                .graph
                .arcs
                .iter()
                .map(|a| matches!(a.origin, ArcOrigin::CopyToRoot { .. }))
                .collect(),
            corner_copy: g.corner_copy.clone(),
        }
    }

    /// Arc of `G0` leaving `x`, given the successor arc of each vertex of `G`.
    fn arc(&self, x: usize, succ: impl Fn(usize) -> usize) -> usize {
        match self.corner_copy[x] {
            Some(b3) if self.to_root[succ(b3)] => self.boundary[x].expect("boundary arc of G0"),
            _ => self.same_origin[succ(x)],
        }
    }
}

/// Result of the exhaustive check that the tree map is a weight-preserving
/// bijection.
#[derive(Debug, Clone)]
pub struct BijectionCheck<T: Scalar> {
    pub trees_g0: u64,
    pub trees_g: u64,
    pub images: u64,
    pub duplicates: u64,
    pub missing: u64,
    pub round_trip_failures: u64,
    pub worst_weight_err: f64,
    pub z_g0: Complex<T>,
    pub z_g: Complex<T>,
}

impl<T: Scalar> BijectionCheck<T> {
    pub fn is_bijection(&self) -> bool {
        self.duplicates == 0 && self.missing == 0 && self.round_trip_failures == 0 && self.images == self.trees_g
    }
}

/// Enumerates every oriented spanning tree on both sides.
pub fn check_a_to_d_bijection<T: Scalar>(
    g0: &DirectedModel<T>,
    g: &DirectedModel<T>,
    caps: &crate::oracles::EnumCaps,
) -> Result<BijectionCheck<T>> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut res = BijectionCheck {
        trees_g0: 0,
        trees_g: 0,
        images: 0,
        duplicates: 0,
        missing: 0,
        round_trip_failures: 0,
        worst_weight_err: 0.0,
        z_g0: real(T::zero()),
        z_g: real(T::zero()),
    };
    let mut err = None;
    crate::oracles::for_each_ost(&g0.graph, g0.root_r, caps, |t| {
        if err.is_some() {
            return;
        }
        res.trees_g0 += 1;
        let w = g0.graph.weight_of(t);
        res.z_g0 += w;
        let images = match map_ost_a_to_d(g0, g, t) {
            Ok(i) => i,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let mut image_weight = real(T::zero());
        let mut sorted = t.to_vec();
        sorted.sort_unstable();
        for im in images {
            res.images += 1;
            image_weight += g.graph.weight_of(&im);
            match map_ost_d_to_a(g0, g, &im) {
                Ok(back) if back == sorted => {}
                _ => res.round_trip_failures += 1,
            }
            if !seen.insert(im) {
                res.duplicates += 1;
            }
        }
        res.worst_weight_err = res.worst_weight_err.max(crate::scalar::rel_err(w, image_weight));
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    crate::oracles::for_each_ost(&g.graph, g.root_r, caps, |t| {
        res.trees_g += 1;
        res.z_g += g.graph.weight_of(t);
        let mut sorted = t.to_vec();
        sorted.sort_unstable();
        if !seen.contains(&sorted) {
            res.missing += 1;
        }
    })?;
    Ok(res)
}

/// The images in `G` of one tree of `G0`. Image `mask` uses the shared
/// arcs and, at branch vertex `k`, arc `branches[k].1[mask >> k & 1]`.
#[derive(Debug)]
pub struct ImageFamily<'a> {
    /// Arc used at each vertex, `usize::MAX` at the root and at branch vertices.
    pub shared: &'a [usize],
    pub branches: &'a [(usize, [usize; 2])],
    /// Whether each image passed the checks on `G`.
    pub valid: &'a [bool],
}

impl ImageFamily<'_> {
    /// Arc used at each vertex by one image.
    pub fn image(&self, mask: usize) -> Vec<usize> {
        let mut succ = self.shared.to_vec();
        for (k, &(v, pair)) in self.branches.iter().enumerate() {
            succ[v] = pair[mask >> k & 1];
        }
        succ
    }
}

/// Outcome of [`stream_a_to_d_images`].
#[derive(Debug, Clone)]
pub struct ImageStream<T: Scalar> {
    pub trees_g0: u64,
    pub images: u64,
    /// Images that are not oriented spanning trees of `G`, or whose
    /// preimage is not the tree they came from.
    pub failures: u64,
    pub worst_weight_err: f64,
    pub z_g0: Complex<T>,
    pub z_g: Complex<T>,
}

/// Walks every tree of `G0` and checks each image in place, holding no
/// sets: the image must be an oriented spanning tree of `G` pulling back to
/// its source, and the image weights must sum to the source weight. Images
/// of distinct trees are then distinct, so the map is a bijection exactly
/// when `images` equals the number of trees of `G`. The images of each
/// tree are then passed to `visit` together.
pub fn stream_a_to_d_images<T: Scalar>(
    g0: &DirectedModel<T>,
    g: &DirectedModel<T>,
    caps: &crate::oracles::EnumCaps,
    mut visit: impl FnMut(&ImageFamily),
) -> Result<ImageStream<T>> {
    let pf = PushForward::new(g0, g);
    let pb = PullBack::new(g0, g);
    let nv = g.graph.num_vertices;
    let root = g.root_r;
    let mut res = ImageStream {
        trees_g0: 0,
        images: 0,
        failures: 0,
        worst_weight_err: 0.0,
        z_g0: real(T::zero()),
        z_g: real(T::zero()),
    };
    let (mut base, mut branching) = (Vec::new(), Vec::new());
    let mut succ0 = vec![usize::MAX; g0.graph.num_vertices];
    let mut succ = vec![usize::MAX; nv];
    let mut valid = Vec::new();
    let mut branches = Vec::new();
    // a vertex reaches the root in the current image when its mark equals
    // `epoch`; walks in progress use larger stamps
    let mut mark = vec![0u64; nv];
    let mut epoch = 0u64;
    crate::oracles::for_each_ost(&g0.graph, g0.root_r, caps, |t| {
        res.trees_g0 += 1;
        for &a in t {
            succ0[g0.graph.arcs[a].from] = a;
        }
        let w0 = g0.graph.weight_of(t);
        res.z_g0 += w0;
        pf.split(g0, t, &mut base, &mut branching);
        // arcs shared by all images, then the branch vertices
        succ.fill(usize::MAX);
        let mut clash = false;
        let mut w_base = real(T::one());
        for &a in &base {
            let arc = &g.graph.arcs[a];
            clash |= arc.from == root || std::mem::replace(&mut succ[arc.from], a) != usize::MAX;
            w_base *= arc.weight;
        }
        for pair in &branching {
            let from = g.graph.arcs[pair[0]].from;
            clash |= from != g.graph.arcs[pair[1]].from || from == root || succ[from] != usize::MAX;
        }
        // vertices whose path avoids the branch vertices reach the root in
        // every image or in none
        epoch += 1;
        let settled = epoch;
        for v in (0..nv).filter(|&v| v != root) {
            if clash {
                break;
            }
            epoch += 1;
            let mut x = v;
            while x != root && mark[x] != settled && succ[x] != usize::MAX {
                if mark[x] == epoch {
                    clash = true;
                    break;
                }
                mark[x] = epoch;
                x = g.graph.arcs[succ[x]].to;
            }
            if !clash && (x == root || mark[x] == settled) {
                let mut y = v;
                while y != x {
                    mark[y] = settled;
                    y = g.graph.arcs[succ[y]].to;
                }
            }
        }
        let branch_vertices: Vec<usize> = branching.iter().map(|p| g.graph.arcs[p[0]].from).collect();
        let unset = (0..nv).filter(|&v| v != root && succ[v] == usize::MAX).count();
        clash |= unset != branch_vertices.len();
        // pull-backs reading only shared arcs are the same in every image
        let mut is_branch = vec![false; g0.root_r];
        for &v in &branch_vertices {
            is_branch[v] = true;
        }
        clash = clash || !(0..g0.root_r).all(|x| is_branch[x] || pb.arc(x, |v| succ[v]) == succ0[x]);
        let mut total = real(T::zero());
        valid.clear();
        for mask in 0..(1usize << branching.len()) {
            res.images += 1;
            let mut w = w_base;
            for (k, pair) in branching.iter().enumerate() {
                let a = pair[mask >> k & 1];
                succ[g.graph.arcs[a].from] = a;
                w *= g.graph.arcs[a].weight;
            }
            total += w;
            // every other unsettled vertex leads to a branch vertex
            epoch += 1;
            let done = epoch;
            let mut ok = !clash;
            for &v in &branch_vertices {
                if !ok {
                    break;
                }
                epoch += 1;
                let mut x = v;
                while x != root && mark[x] != settled && mark[x] != done {
                    if mark[x] == epoch {
                        ok = false;
                        break;
                    }
                    mark[x] = epoch;
                    x = g.graph.arcs[succ[x]].to;
                }
                if ok {
                    let mut y = v;
                    while y != x {
                        mark[y] = done;
                        y = g.graph.arcs[succ[y]].to;
                    }
                }
            }
            ok = ok && branch_vertices.iter().all(|&x| pb.arc(x, |v| succ[v]) == succ0[x]);
            res.failures += u64::from(!ok);
            valid.push(ok);
        }
        res.z_g += total;
        res.worst_weight_err = res.worst_weight_err.max(crate::scalar::rel_err(w0, total));
        for &v in &branch_vertices {
            succ[v] = usize::MAX;
        }
        branches.clear();
        branches.extend(branch_vertices.iter().copied().zip(branching.iter().copied()));
        visit(&ImageFamily {
            shared: &succ,
            branches: &branches,
            valid: &valid,
        });
    })?;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::isoradial::validate_isoradial;
    use crate::kasteleyn::critical_kasteleyn;
    use crate::oracles::EnumCaps;
    use crate::scalar::Tolerances;

    fn models(n: usize) -> (DirectedModel<f64>, DirectedModel<f64>) {
        let g = generators::cycle(n).unwrap();
        let iso = validate_isoradial(&g.map, &g.coords, &Tolerances::default()).unwrap();
        let kd = critical_kasteleyn(&iso).unwrap();
        let g0 = build_g0(&kd.gq, &iso).unwrap();
        let g = build_g(&g0, &iso).unwrap();
        (g0, g)
    }

    #[test]
    fn streaming_agrees_with_the_set_check() {
        let (g0, g) = models(4);
        let caps = EnumCaps::default();
        let set = check_a_to_d_bijection(&g0, &g, &caps).unwrap();
        let stream = stream_a_to_d_images(&g0, &g, &caps, |_| {}).unwrap();
        assert!(set.is_bijection());
        assert_eq!(
            (stream.trees_g0, stream.images, stream.failures),
            (set.trees_g0, set.trees_g, 0)
        );
        assert!((stream.z_g - set.z_g).norm() < 1e-12 * set.z_g.norm());
        assert!(stream.worst_weight_err < 1e-12);
    }

    #[test]
    fn streaming_catches_a_broken_image() {
        let (g0, mut g) = models(3);
        // a crossing arc turned into a loop closes a cycle in half the images
        let a = g
            .graph
            .find_arc(ArcOrigin::PrimalCrossing { dart: g.outer_darts[0] })
            .unwrap();
        g.graph.arcs[a].to = g.graph.arcs[a].from;
        let stream = stream_a_to_d_images(&g0, &g, &EnumCaps::default(), |_| {}).unwrap();
        assert!(stream.failures > 0);
    }

    #[test]
    fn g_needs_g0() {
        let c = generators::cycle(3).unwrap();
        let iso = validate_isoradial(&c.map, &c.coords, &Tolerances::default()).unwrap();
        let (_, g) = models(3);
        assert!(matches!(build_g(&g, &iso), Err(Error::WrongStage { .. })));
    }
}
