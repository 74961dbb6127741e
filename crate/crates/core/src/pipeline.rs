//! End-to-end verification: every identity of the chain from the squared
//! Ising partition function to pairs of dual spanning trees, on one graph.

use std::collections::HashSet;

use num_complex::Complex;

use crate::correspondence::double::{
    class_closed_form, class_prefactor, class_weight_factored, for_each_matching_minus_s, matching_to_trees,
    tree_to_matching, DoubleIndex, DoubleTree,
};
use crate::correspondence::kpw::{
    for_each_tree_pair, kpw_merge, kpw_split, matching_to_pair_factor, pair_weight, KpwMap,
};
use crate::correspondence::{build_g, build_g0, directed, DirectedModel};
use crate::error::{Error, Result};
use crate::isoradial::{critical_couplings, double_weights, tree_weights_tau, IsoradialData};
use crate::kasteleyn::{check_flat, critical_kasteleyn, dimer_z_det, dimer_z_gq, white_sums, KasteleynData};
use crate::oracles::{for_each_ost, laplacian, matrix_tree_z, EnumCaps, SpinGraph, WeightedDigraph};
use crate::planar::{extended_double, extended_pair, ExtendedDouble, ExtendedPair};
use crate::report::{Check, Report};
use crate::scalar::{im_unit, real, rel_err, Scalar, Tolerances};

/// Class members traced back through every map when the full enumeration
/// is beyond the caps.
const SAMPLE_MEMBERS: u64 = 250_000;
/// Classes enumerated member by member when not all of them can be.
const FULL_CLASSES: u64 = 64;
/// Largest tree count for which the set-level checks hold every tree in memory.
const SET_LEVEL_TREES: u64 = 2_000_000;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub tolerances: Tolerances,
    /// Lozenge boundary vertex of the double used as root; default is the
    /// split vertex of the outer dart.
    pub root_s: Option<usize>,
    pub caps: EnumCaps,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tolerances: Tolerances::default(),
            root_s: None,
            caps: EnumCaps::from_env(),
        }
    }
}

/// Everything built from one isoradial graph.
pub struct Stages<T: Scalar> {
    pub kd: KasteleynData<T>,
    pub g0: DirectedModel<T>,
    pub g: DirectedModel<T>,
    pub dd: ExtendedDouble,
    pub ext: ExtendedPair,
    pub root_s: usize,
    pub km: KpwMap,
    pub index: DoubleIndex,
    pub rho: Vec<Complex<T>>,
    pub tau2: Vec<Complex<T>>,
    pub tau_primal: WeightedDigraph<T>,
    pub tau_dual: WeightedDigraph<T>,
}

impl<T: Scalar> Stages<T> {
    pub fn build(iso: &IsoradialData<T>, root_s: Option<usize>) -> Result<Self> {
        let kd = critical_kasteleyn(iso)?;
        let g0 = build_g0(&kd.gq, iso)?;
        let g = build_g(&g0, iso)?;
        let dd = extended_double(&iso.map);
        let ext = extended_pair(&iso.map);
        let root_s = match root_s {
            None => dd.default_root_s,
            Some(s) if dd.root_candidates().contains(&s) => s,
            Some(s) => {
                return Err(Error::BadParams(format!(
                    "root s = {s} is not a boundary lozenge vertex; choose one of {:?}",
                    dd.root_candidates()
                )))
            }
        };
        let km = KpwMap::new(&dd, &ext, root_s)?;
        let index = DoubleIndex::new(&dd, &g)?;
        let (rho, tau2) = double_weights(iso, &dd);
        let (tau_primal, tau_dual) = tree_weights_tau(iso, &ext);
        Ok(Stages {
            kd,
            g0,
            g,
            dd,
            ext,
            root_s,
            km,
            index,
            rho,
            tau2,
            tau_primal,
            tau_dual,
        })
    }

    /// `prod_e i e^{-i theta_e} * prod -i e^{-i theta_bd/2} * i^(#dual arcs)`,
    /// the unit-modulus constant with
    /// `Z_OST(G) = phase * prod cos theta_e * Z_pairs`.
    pub fn phase_constant(&self, iso: &IsoradialData<T>) -> Complex<T> {
        let dual_arcs = self.ext.dual.map.num_vertices() - 1;
        let mut c = class_prefactor(iso);
        for _ in 0..dual_arcs {
            c *= im_unit::<T>();
        }
        c
    }
}

/// Runs an enumeration, falling back to `fallback` when it exceeds the caps.
fn enumerated_or<T: Scalar>(
    run: impl FnOnce() -> Result<Complex<T>>,
    fallback: impl FnOnce() -> Complex<T>,
    enum_route: &str,
    fallback_route: &str,
) -> Result<(Complex<T>, String)> {
    match run() {
        Ok(z) => Ok((z, enum_route.to_string())),
        Err(Error::TooLarge { .. }) => Ok((fallback(), fallback_route.to_string())),
        Err(e) => Err(e),
    }
}

/// Checks every identity of the chain at critical weights.
pub fn verify_main_theorem<T: Scalar>(name: &str, iso: &IsoradialData<T>, opts: &VerifyOptions) -> Result<Report> {
    let tol = opts.tolerances.num;
    let pivot = opts.tolerances.pivot;
    let caps = &opts.caps;
    let st = Stages::build(iso, opts.root_s)?;
    let map = &iso.map;
    let nv = map.num_vertices();
    let two = T::lit(2.0);
    let mut checks = Vec::new();

    // squared Ising against the dimer model of G^Q
    let j = critical_couplings(iso)?;
    let z_ising = SpinGraph::from_map(map, &j).ising_z(caps)?;
    let z_ising_sq = z_ising * z_ising;
    let cosh: T = j.iter().fold(T::one(), |a, &x| a * (two * x).cosh());
    let pow2 = two.powi(nv as i32);
    let z_dimer = dimer_z_gq(map, &st.kd.gq, &j, caps)?;
    checks.push(
        Check::relative(
            "ising_squared_vs_dimer",
            real(z_ising_sq),
            real(pow2 * cosh * z_dimer),
            tol,
        )
        .with_route("spin enumeration vs matching enumeration"),
    );

    let flat = check_flat(&st.kd.gq, &st.kd.phasing, opts.tolerances.geom);
    let worst = flat.worst();
    checks.push(Check {
        rel_err: worst,
        pass: flat.pass,
        ..Check::flag("flatness_worst_face", flat.pass)
    });

    let det = dimer_z_det(&st.kd.k, &opts.tolerances)?;
    checks.push(Check::relative("det_vs_dimer", real(det.modulus), real(z_dimer), tol));
    checks.push(Check::absolute(
        "det_imaginary_ratio",
        real(T::lit(det.imag_ratio)),
        real(T::zero()),
        tol,
    ));

    let sums = white_sums(&st.kd.k, iso);
    let (worst_sum, worst_exp) = sums
        .iter()
        .max_by(|a, b| {
            (a.1 - a.2)
                .norm()
                .to_f64_lossy()
                .total_cmp(&(b.1 - b.2).norm().to_f64_lossy())
        })
        .map(|&(_, s, e)| (s, e))
        .unwrap_or((real(T::zero()), real(T::zero())));
    checks.push(Check::absolute("white_vertex_sums_worst", worst_sum, worst_exp, tol));

    // Laplacian of G0 reduced at r is K
    let lap = laplacian(&st.g0.graph).minor(st.g0.root_r, st.g0.root_r);
    let mut lap_gap = 0.0f64;
    for a in 0..lap.rows() {
        for b in 0..lap.cols() {
            let d = lap[(a, b)] - st.kd.k.matrix[(a, b)];
            lap_gap = lap_gap.max(Complex::new(d.re.to_f64_lossy(), d.im.to_f64_lossy()).norm());
        }
    }
    checks.push(Check {
        rel_err: lap_gap,
        pass: lap_gap <= tol,
        ..Check::flag("laplacian_minor_equals_k", lap_gap <= tol)
    });

    let mt_g0 = matrix_tree_z(&st.g0.graph, st.g0.root_r, pivot);
    let mt_g = matrix_tree_z(&st.g.graph, st.g.root_r, pivot);
    let (z_g0, route_g0) = enumerated_or(
        || crate::oracles::ost_z(&st.g0.graph, st.g0.root_r, caps),
        || mt_g0,
        "tree enumeration",
        "matrix-tree (enumeration exceeds caps)",
    )?;
    checks.push(Check::relative("ost_g0_vs_det", z_g0, det.det, tol).with_route(route_g0));
    let (z_g, route_g) = enumerated_or(
        || crate::oracles::ost_z(&st.g.graph, st.g.root_r, caps),
        || mt_g,
        "tree enumeration",
        "matrix-tree (enumeration exceeds caps)",
    )?;
    checks.push(Check::relative("ost_g_vs_ost_g0", z_g, z_g0, tol).with_route(route_g));

    // the double: class sums, closed forms and matchings
    let prefactor = class_prefactor(iso);
    let mut z_classes = real(T::zero());
    let mut z_double_dimer = real(T::zero());
    let mut worst_class = 0.0f64;
    let mut matchings = 0u64;
    let mut split_failures = 0u64;
    let mut worst_split = 0.0f64;
    let mut pairs_seen = HashSet::new();
    let mut err = None;
    for_each_matching_minus_s(&st.dd, st.root_s, caps, |m| {
        if err.is_some() {
            return;
        }
        matchings += 1;
        let res = (|| -> Result<()> {
            let w = class_weight_factored(&st.dd, m, &st.rho)?;
            let cf = class_closed_form(prefactor, m, &st.tau2);
            worst_class = worst_class.max(rel_err(w, cf));
            z_classes += w;
            let t2 = m.iter().fold(real(T::one()), |a, &e| a * st.tau2[e]);
            z_double_dimer += t2;
            let pair = kpw_split(&st.dd, &st.ext, &st.km, m)?;
            if kpw_merge(&st.dd, &st.ext, &st.km, &pair)? != m {
                split_failures += 1;
            }
            let c = matching_to_pair_factor(iso, pair.dual.len());
            worst_split = worst_split.max(rel_err(t2, c * pair_weight(&pair, &st.tau_primal, &st.tau_dual)));
            if !pairs_seen.insert(pair) {
                split_failures += 1;
            }
            Ok(())
        })();
        if let Err(e) = res {
            err = Some(e);
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    checks.push(
        Check::relative("double_tree_sum_vs_ost_g", z_classes, z_g, tol)
            .with_route("sum of class weights over matchings of the double minus s"),
    );
    checks.push(Check {
        rel_err: worst_class,
        pass: worst_class <= tol,
        ..Check::flag("class_weight_closed_form_worst", worst_class <= tol)
    });
    checks.push(Check::relative(
        "double_dimer_with_prefactor_vs_tree_sum",
        prefactor * z_double_dimer,
        z_classes,
        tol,
    ));

    // pairs of dual spanning trees of the extended graph
    let mut z_pairs = real(T::zero());
    let mut n_pairs = 0u64;
    let mut unmatched_pairs = 0u64;
    for_each_tree_pair(&st.ext, &st.km, &st.tau_primal, caps, |p| {
        n_pairs += 1;
        z_pairs += pair_weight(p, &st.tau_primal, &st.tau_dual);
        if !pairs_seen.contains(p) {
            unmatched_pairs += 1;
        }
    })?;
    let split_ok = split_failures == 0 && unmatched_pairs == 0 && n_pairs == matchings;
    checks.push(Check {
        rel_err: worst_split,
        pass: split_ok && worst_split <= tol,
        ..Check::flag("matching_split_is_weighted_bijection", split_ok && worst_split <= tol)
    });

    let phase = st.phase_constant(iso);
    let cos: T = iso.theta.iter().fold(T::one(), |a, &t| a * t.cos());
    checks.push(Check::relative(
        "ost_g_vs_phase_times_pair_sum",
        z_g,
        phase * real(cos) * z_pairs,
        tol,
    ));
    checks.push(
        Check::relative(
            "ising_squared_vs_pair_sum",
            real(z_ising_sq),
            real(pow2 * z_pairs.norm()),
            tol,
        )
        .with_route("tree-pair enumeration"),
    );
    checks.push(
        Check::relative(
            "ising_squared_vs_det_chain",
            real(z_ising_sq),
            real(pow2 * det.modulus / cos),
            tol,
        )
        .with_route("|det K| chain"),
    );

    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        graph: name.to_string(),
        tolerance: tol,
        root_s: st.root_s,
        phase_constant: phase.into(),
        checks,
        pass,
    })
}

/// How much of the tree-level checks fits the caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    /// Every tree held in memory and compared as sets.
    SetLevel,
    /// Every tree visited once and checked in place.
    Streaming,
    /// Counts from the matrix-tree theorem plus sampled trees.
    Sampled,
}

/// Tree-level checks of the maps between `G0`, `G` and the double. Small
/// graphs are compared as sets. Larger ones are streamed: each tree of `G`
/// is produced once from its preimage in `G0` and checked in place, and
/// every class is enumerated in full, so disjointness and cover follow
/// from injectivity and the count. Beyond the caps the checks fall back to
/// matrix-tree counts and sampled trees.
pub fn verify_tree_maps<T: Scalar>(iso: &IsoradialData<T>, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let tol = opts.tolerances.num;
    let pivot = opts.tolerances.pivot;
    let caps = &opts.caps;
    let st = Stages::build(iso, opts.root_s)?;
    let mut checks = Vec::new();

    let count_g0 = unit_count(&st.g0.graph, st.g0.root_r, pivot, |_| 1.0);
    let count_g = unit_count(&st.g.graph, st.g.root_r, pivot, |_| 1.0);
    let scope = if count_g <= caps.states.min(SET_LEVEL_TREES) as f64 {
        Scope::SetLevel
    } else if count_g <= caps.states as f64 {
        Scope::Streaming
    } else {
        Scope::Sampled
    };

    // G0 to G, and G to the double for the streamed route
    let mut rt = RoundTrip::default();
    match scope {
        Scope::SetLevel => {
            let b = directed::check_a_to_d_bijection(&st.g0, &st.g, caps)?;
            let ok = b.is_bijection() && b.worst_weight_err <= tol;
            checks.push(
                Check {
                    rel_err: b.worst_weight_err,
                    pass: ok,
                    ..Check::flag("g0_to_g_bijection", ok)
                }
                .with_route(format!("exhaustive: {} trees of G0, {} of G", b.trees_g0, b.trees_g)),
            );
        }
        Scope::Streaming => {
            let mut walker = FamilyWalker::new(&st);
            let b = directed::stream_a_to_d_images(&st.g0, &st.g, caps, |fam| walker.check(&st, fam, &mut rt))?;
            // injective by the pull-back, onto by the count
            let ok = b.failures == 0 && b.images as f64 == count_g && b.worst_weight_err <= tol;
            checks.push(
                Check {
                    rel_err: b.worst_weight_err,
                    pass: ok,
                    ..Check::flag("g0_to_g_bijection", ok)
                }
                .with_route(format!(
                    "exhaustive streaming: {} trees of G0, {} images checked in place against {count_g} trees of G by the matrix-tree count",
                    b.trees_g0, b.images
                )),
            );
        }
        Scope::Sampled => {
            // each G0 tree using k boundary arcs has 2^k images
            let doubled = unit_count(&st.g0.graph, st.g0.root_r, pivot, |o| match o {
                crate::oracles::ArcOrigin::Boundary { .. } => 2.0,
                _ => 1.0,
            });
            checks.push(
                Check::relative("g0_to_g_image_count", real(T::lit(doubled)), real(T::lit(count_g)), tol).with_route(
                    format!("matrix-tree counts ({count_g0} trees of G0 and {count_g} of G exceed caps)"),
                ),
            );
        }
    }

    // G to the double and back, set level
    let mut images: HashSet<Vec<usize>> = HashSet::new();
    if scope == Scope::SetLevel {
        for_each_ost(&st.g.graph, st.g.root_r, caps, |t| match round_trip_from_ost(&st, t) {
            Ok((edges, ok, err)) => {
                rt.record(ok, err);
                images.insert(edges);
            }
            Err(_) => rt.record(false, 0.0),
        })?;
    }

    // compatibility classes: all of them in full unless sampling, then
    // every class sampled and a stride of classes enumerated in full
    let prefactor = class_prefactor(iso);
    let mut n_matchings = 0u64;
    for_each_matching_minus_s(&st.dd, st.root_s, caps, |_| n_matchings += 1)?;
    let sampled = scope == Scope::Sampled;
    let stride = if sampled {
        (n_matchings / FULL_CLASSES).max(1)
    } else {
        1
    };
    let sample = (SAMPLE_MEMBERS / n_matchings.max(1)).max(1);
    let mut index = 0u64;
    let mut full_classes = 0u64;
    let mut class_total = 0f64;
    let mut enumerated = 0u64;
    let mut rejections = 0u64;
    let mut foreign = 0u64;
    let mut uncovered = 0u64;
    let mut worst_class = 0.0f64;
    let mut members: HashSet<Vec<usize>> = HashSet::new();
    let mut err = None;
    for_each_matching_minus_s(&st.dd, st.root_s, caps, |m| {
        if err.is_some() {
            return;
        }
        let full = index.is_multiple_of(stride);
        index += 1;
        let res = (|| -> Result<()> {
            let mut seen_here = 0u64;
            let limit = if full { None } else { Some(sample) };
            let class = matching_to_trees(&st.dd, m, st.root_s, &st.rho, limit, |edges| {
                seen_here += 1;
                if scope == Scope::Streaming || (sampled && seen_here > sample) {
                    return;
                }
                let mut sorted = edges.to_vec();
                sorted.sort_unstable();
                let dt = DoubleTree {
                    edges: sorted,
                    root_s: st.root_s,
                };
                if tree_to_matching(&st.dd, &dt).ok().as_deref() != Some(m) {
                    foreign += 1;
                }
                if scope == Scope::SetLevel {
                    if !images.contains(&dt.edges) {
                        uncovered += 1;
                    }
                    members.insert(dt.edges);
                } else {
                    match round_trip_from_double(&st, &dt.edges) {
                        Ok((ok, e)) => rt.record(ok, e),
                        Err(_) => rt.record(false, 0.0),
                    }
                }
            })?;
            class_total += 2f64.powi(class.free_whites as i32);
            enumerated += class.members;
            rejections += class.cycle_rejections;
            if !class.truncated {
                full_classes += 1;
                let cf = class_closed_form(prefactor, m, &st.tau2);
                worst_class = worst_class.max(rel_err(class.weight, cf));
            }
            Ok(())
        })();
        if let Err(e) = res {
            err = Some(e);
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }

    let route = match scope {
        Scope::SetLevel => format!("exhaustive: {} trees of G", rt.visited),
        Scope::Streaming => format!(
            "exhaustive streaming: {} trees of G mapped to the double, checked against the rules and for cycles, and pulled back",
            rt.visited
        ),
        Scope::Sampled => format!(
            "{} trees of G reached from class members ({count_g} trees exceed caps)",
            rt.visited
        ),
    };
    let visited_all = scope == Scope::Sampled || rt.visited as f64 == count_g;
    let ok = rt.visited > 0 && visited_all && rt.failures == 0 && rt.worst <= tol;
    checks.push(
        Check {
            rel_err: rt.worst,
            pass: ok,
            ..Check::flag("g_to_double_round_trip", ok)
        }
        .with_route(route),
    );

    let all_full = full_classes == n_matchings;
    let cover_ok = class_total == count_g
        && foreign == 0
        && match scope {
            Scope::SetLevel => uncovered == 0 && members.len() == images.len(),
            // every tree lands injectively in the class of its own matching,
            // and the classes hold exactly as many members as there are trees
            Scope::Streaming => {
                all_full && rejections == 0 && enumerated as f64 == count_g && rt.failures == 0 && visited_all
            }
            Scope::Sampled => true,
        };
    let route = match scope {
        Scope::SetLevel => format!("set level: {n_matchings} classes, {enumerated} members"),
        Scope::Streaming => format!(
            "counting: {n_matchings} classes enumerated in full ({enumerated} members) against {} trees of G each landing in the class of its matching",
            rt.visited
        ),
        Scope::Sampled => format!(
            "counts: {n_matchings} class sizes against the matrix-tree count; {} members traced back to their matching",
            rt.visited
        ),
    };
    let mut cover = Check::relative(
        "classes_cover_disjointly",
        real(T::lit(class_total)),
        real(T::lit(count_g)),
        tol,
    )
    .with_route(route);
    cover.pass &= cover_ok;
    checks.push(cover);
    checks.push(
        Check::absolute(
            "class_cycle_rejections",
            real(T::lit(rejections as f64)),
            real(T::zero()),
            0.0,
        )
        .with_route(if all_full {
            format!("every member of every class ({enumerated})")
        } else {
            format!("{enumerated} members: {full_classes} classes in full, the rest sampled")
        }),
    );
    let ok = full_classes > 0 && worst_class <= tol;
    checks.push(
        Check {
            rel_err: worst_class,
            pass: ok,
            ..Check::flag("class_weight_enumerated_vs_closed_form", ok)
        }
        .with_route(format!(
            "{full_classes} of {n_matchings} classes summed member by member"
        )),
    );
    Ok(checks)
}

#[derive(Debug, Default)]
struct RoundTrip {
    visited: u64,
    failures: u64,
    worst: f64,
}

impl RoundTrip {
    fn record(&mut self, ok: bool, err: f64) {
        self.visited += 1;
        self.failures += u64::from(!ok);
        self.worst = self.worst.max(err);
    }
}

/// Checks the images in the double of a family of trees of `G` sharing all
/// arcs but the branch choices. The shared edges are checked once: their
/// rule counts, a forest for acyclicity, and the pull-back at vertices
/// whose arcs they decide. Each image then adds one edge per branch vertex,
/// which must join distinct components of the forest, complete the rules
/// at the whites it touches and pull back to the chosen arc. A compliant
/// spanning tree has degree two at every white, so its edges leaving blacks
/// towards `s` always form a perfect matching of the double minus `s`.
struct FamilyWalker {
    edges: Vec<usize>,
    present: Vec<bool>,
    hits: Vec<[u8; 3]>,
    branch_of: Vec<Option<usize>>,
    /// Edge added by each branch choice.
    added: Vec<[usize; 2]>,
    touched: Vec<usize>,
    local: Vec<[u8; 3]>,
    tiny: Vec<usize>,
}

impl FamilyWalker {
    fn new<T: Scalar>(st: &Stages<T>) -> Self {
        let t = &st.index.tables;
        FamilyWalker {
            edges: Vec::new(),
            present: vec![false; t.num_edges()],
            hits: vec![[0; 3]; t.num_whites()],
            branch_of: vec![None; st.g.graph.num_vertices],
            added: Vec::new(),
            touched: Vec::new(),
            local: Vec::new(),
            tiny: vec![0; t.num_vertices()],
        }
    }

    fn check<T: Scalar>(&mut self, st: &Stages<T>, fam: &directed::ImageFamily, rt: &mut RoundTrip) {
        let idx = &st.index;
        let tables = &idx.tables;
        let arcs = &st.g.graph.arcs;
        let root = idx.root_r();
        let k = fam.branches.len();
        for &(v, _) in fam.branches {
            self.branch_of[v] = Some(0);
        }

        // shared edges, their weight, rule counts and forest
        self.edges.clear();
        let mut w_g = real(T::one());
        let mut shared_ok = true;
        for v in (0..st.g.graph.num_vertices).filter(|&v| v != root && self.branch_of[v].is_none()) {
            let a = fam.shared[v];
            shared_ok &= a != usize::MAX;
            if a != usize::MAX {
                w_g *= arcs[a].weight;
            }
            self.edges
                .extend(idx.out(v).iter().filter(|&&(b, _)| b != a).map(|&(_, e)| e));
        }
        self.edges.extend_from_slice(idx.split_edges());
        let mut w_d = real(T::one());
        self.hits.iter_mut().for_each(|h| *h = [0; 3]);
        let mut forest = crate::oracles::Dsu::new(tables.num_vertices());
        for &e in &self.edges {
            self.present[e] = true;
            w_d *= st.rho[e];
            if let Some((w, g)) = tables.group(e) {
                self.hits[w][g] = self.hits[w][g].saturating_add(1);
            }
            let (u, v) = tables.endpoints(e);
            shared_ok &= forest.union(u, v);
        }
        shared_ok &= self.edges.len() + k + 1 == tables.num_vertices();

        // the edge each branch choice adds: the one crossing the other arc
        self.added.clear();
        for &(v, pair) in fam.branches {
            let out = idx.out(v);
            let arcs_match = out.len() == 2 && out.iter().all(|&(a, _)| pair.contains(&a)) && pair[0] != pair[1];
            shared_ok &= arcs_match;
            let crossing = |a: usize| out.iter().find(|&&(b, _)| b == a).map_or(usize::MAX, |&(_, e)| e);
            self.added.push([crossing(pair[1]), crossing(pair[0])]);
        }
        shared_ok &= self
            .added
            .iter()
            .flatten()
            .all(|&e| e != usize::MAX && !self.present[e]);

        // whites no choice touches must already obey the rules
        self.touched.clear();
        if shared_ok {
            for &e in self.added.iter().flatten() {
                if let Some((w, _)) = tables.group(e) {
                    if !self.touched.contains(&w) {
                        self.touched.push(w);
                    }
                }
            }
            shared_ok = self
                .hits
                .iter()
                .enumerate()
                .all(|(w, h)| *h == [1, 1, 0] || self.touched.contains(&w));
        }

        // pull-back where the shared edges decide it
        if shared_ok {
            shared_ok = (0..st.g.graph.num_vertices)
                .filter(|&v| v != root && self.branch_of[v].is_none())
                .all(|v| {
                    let mut unused = idx.out(v).iter().filter(|&&(_, e)| !self.present[e]);
                    matches!((unused.next(), unused.next()), (Some(&(a, _)), None) if a == fam.shared[v])
                });
        }

        // both endpoints of each candidate, as forest roots
        let mut ends: Vec<[[usize; 2]; 2]> = Vec::with_capacity(k);
        for pair in &self.added {
            let mut two = [[0; 2]; 2];
            for (c, &e) in pair.iter().enumerate() {
                let (u, v) = tables.endpoints(e);
                two[c] = [forest.find(u), forest.find(v)];
            }
            ends.push(two);
        }

        for mask in 0..(1usize << k) {
            if !fam.valid[mask] || !shared_ok {
                rt.record(false, 0.0);
                continue;
            }
            let mut ok = true;
            let mut wd = w_d;
            let mut wg = w_g;
            // components joined by the added edges
            for two in &ends {
                for end in two {
                    self.tiny[end[0]] = end[0];
                    self.tiny[end[1]] = end[1];
                }
            }
            self.local.clear();
            self.local.extend(self.touched.iter().map(|&w| self.hits[w]));
            for (b, &(v, pair)) in fam.branches.iter().enumerate() {
                let c = mask >> b & 1;
                let e = self.added[b][c];
                wd *= st.rho[e];
                wg *= arcs[pair[c]].weight;
                let [x, y] = ends[b][c];
                let (rx, ry) = (tiny_find(&mut self.tiny, x), tiny_find(&mut self.tiny, y));
                ok &= rx != ry;
                self.tiny[rx] = ry;
                if let Some((w, g)) = tables.group(e) {
                    let i = self.touched.iter().position(|&t| t == w).expect("touched");
                    self.local[i][g] = self.local[i][g].saturating_add(1);
                }
                // the arc left free at v is the chosen one
                let mut unused = idx.out(v).iter().filter(|&&(_, f)| !self.present[f] && f != e);
                ok &= matches!((unused.next(), unused.next()), (Some(&(a, _)), None) if a == pair[c]);
            }
            ok &= self.local.iter().all(|h| *h == [1, 1, 0]);
            rt.record(ok, rel_err(wd, wg));
        }

        for &e in &self.edges {
            self.present[e] = false;
        }
        for &(v, _) in fam.branches {
            self.branch_of[v] = None;
        }
    }
}

fn tiny_find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

/// Buffers for checking trees of `G` against the double one at a time.
#[cfg(test)]
struct DualWalker {
    edges: Vec<usize>,
    present: Vec<bool>,
    hits: Vec<[u8; 3]>,
    bad: Vec<usize>,
    back: Vec<usize>,
    parent: Vec<Option<usize>>,
    queue: std::collections::VecDeque<usize>,
    matched: Vec<u8>,
}

#[cfg(test)]
impl DualWalker {
    fn new<T: Scalar>(st: &Stages<T>) -> Self {
        DualWalker {
            edges: Vec::new(),
            present: vec![false; st.index.tables.num_edges()],
            hits: Vec::new(),
            bad: Vec::new(),
            back: Vec::new(),
            parent: Vec::new(),
            queue: Default::default(),
            matched: vec![0; st.dd.double.map.num_vertices()],
        }
    }

    /// Image in the double of the tree using arc `succ[v]` at each vertex:
    /// it must obey the local rules, carry the tree's weight, span the
    /// double with the edges leaving blacks towards `s` forming a perfect
    /// matching, and pull back to the same tree.
    fn check<T: Scalar>(&mut self, st: &Stages<T>, succ: &[usize], weight: Complex<T>) -> (bool, f64) {
        st.index.dual_edges(succ, &mut self.edges);
        st.index
            .tables
            .rule_violations(&self.edges, &mut self.hits, &mut self.bad);
        let mut ok = self.bad.is_empty();
        let mut w = real(T::one());
        for &e in &self.edges {
            self.present[e] = true;
            w *= st.rho[e];
        }
        let err = rel_err(w, weight);
        ok = ok
            && st
                .index
                .tables
                .orient(
                    &self.present,
                    self.edges.len(),
                    st.root_s,
                    &mut self.parent,
                    &mut self.queue,
                )
                .is_ok();
        if ok {
            let m = &st.dd.double.map;
            self.matched.fill(0);
            for b in (0..st.dd.num_black()).filter(|&b| b != st.root_s) {
                let (u, v) = m.edge_endpoints(self.parent[b].expect("spanning"));
                self.matched[u] += 1;
                self.matched[v] += 1;
            }
            ok = self
                .matched
                .iter()
                .enumerate()
                .all(|(v, &k)| k == u8::from(v != st.root_s));
        }
        ok = ok && st.index.pull_back(&self.present, &mut self.back).is_ok() && self.back == succ;
        for &e in &self.edges {
            self.present[e] = false;
        }
        (ok, err)
    }
}

/// G to the double and back for one tree of `G`.
fn round_trip_from_ost<T: Scalar>(st: &Stages<T>, tree: &[usize]) -> Result<(Vec<usize>, bool, f64)> {
    let edges = st.index.dual_of_tree(&st.g, tree)?;
    let w = edges.iter().fold(real(T::one()), |a, &e| a * st.rho[e]);
    let err = rel_err(w, st.g.graph.weight_of(tree));
    let mut sorted = tree.to_vec();
    sorted.sort_unstable();
    let back = st.index.tree_of_dual(&st.g, &edges)?;
    let ok = back == sorted && st.index.tables.rule_violations_of(&edges).is_empty();
    Ok((edges, ok, err))
}

/// Same round trip entered from the double side.
fn round_trip_from_double<T: Scalar>(st: &Stages<T>, edges: &[usize]) -> Result<(bool, f64)> {
    let tree = st.index.tree_of_dual(&st.g, edges)?;
    let (again, ok, err) = round_trip_from_ost(st, &tree)?;
    Ok((ok && again == edges, err))
}

/// Number of oriented spanning trees (with per-arc multiplicities) from the
/// matrix-tree theorem.
fn unit_count<T: Scalar>(
    g: &WeightedDigraph<T>,
    root: usize,
    pivot: f64,
    mult: impl Fn(crate::oracles::ArcOrigin) -> f64,
) -> f64 {
    let mut unit: WeightedDigraph<f64> = WeightedDigraph::new(g.num_vertices);
    for a in &g.arcs {
        unit.add_arc(a.from, a.to, Complex::new(mult(a.origin), 0.0), a.origin);
    }
    matrix_tree_z(&unit, root, pivot).re.round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::isoradial::validate_isoradial;

    fn iso(n: usize) -> IsoradialData<f64> {
        let g = generators::cycle(n).unwrap();
        validate_isoradial(&g.map, &g.coords, &Tolerances::default()).unwrap()
    }

    #[test]
    fn triangle_passes_every_check() {
        let opts = VerifyOptions::default();
        let r = verify_main_theorem("c3", &iso(3), &opts).unwrap();
        assert!(r.pass, "{:?}", r.failures());
        let tm = verify_tree_maps(&iso(3), &opts).unwrap();
        assert!(tm.iter().all(|c| c.pass), "{tm:?}");
    }

    #[test]
    fn every_boundary_root_works() {
        let i = iso(4);
        let dd = extended_double(&i.map);
        for s in dd.root_candidates() {
            let opts = VerifyOptions {
                root_s: Some(s),
                ..VerifyOptions::default()
            };
            assert!(verify_main_theorem("c4", &i, &opts).unwrap().pass, "s = {s}");
        }
    }

    /// Failures per family from the incremental walker and from checking
    /// every image directly, with `tweak` applied to each family first.
    fn both_walkers(
        iso: &IsoradialData<f64>,
        tweak: impl Fn(&Stages<f64>, &mut Vec<usize>, &mut Vec<(usize, [usize; 2])>),
    ) -> (u64, u64, u64) {
        let st = Stages::build(iso, None).unwrap();
        let mut fast = FamilyWalker::new(&st);
        let mut slow = DualWalker::new(&st);
        let (mut fails_fast, mut fails_slow, mut images) = (0, 0, 0);
        directed::stream_a_to_d_images(&st.g0, &st.g, &EnumCaps::default(), |fam| {
            let mut shared = fam.shared.to_vec();
            let mut branches = fam.branches.to_vec();
            tweak(&st, &mut shared, &mut branches);
            let valid = vec![true; fam.valid.len()];
            let fam = directed::ImageFamily {
                shared: &shared,
                branches: &branches,
                valid: &valid,
            };
            let mut rt = RoundTrip::default();
            fast.check(&st, &fam, &mut rt);
            fails_fast += rt.failures;
            images += rt.visited;
            for mask in 0..valid.len() {
                let succ = fam.image(mask);
                let w = (0..succ.len())
                    .filter(|&v| v != st.g.root_r)
                    .fold(real(1.0), |a, v| a * st.g.graph.arcs[succ[v]].weight);
                let (ok, err) = slow.check(&st, &succ, w);
                fails_slow += u64::from(!ok);
                assert!(!ok || err < 1e-12);
            }
        })
        .unwrap();
        (fails_fast, fails_slow, images)
    }

    #[test]
    fn incremental_walker_agrees_with_the_direct_check() {
        let rhombic = generators::rhombic(2, 2, 1, 3).unwrap();
        let rhombic = validate_isoradial(&rhombic.map, &rhombic.coords, &Tolerances::default()).unwrap();
        for iso in [iso(4), rhombic] {
            let (fast, slow, images) = both_walkers(&iso, |_, _, _| {});
            assert_eq!((fast, slow), (0, 0));
            assert!(images > 0);
            // the other arc at the first shared vertex with two
            let (fast, slow, images) = both_walkers(&iso, |st, shared, _| {
                let v = (0..shared.len())
                    .find(|&v| shared[v] != usize::MAX && st.index.out(v).len() == 2)
                    .unwrap();
                let other = st.index.out(v).iter().find(|&&(a, _)| a != shared[v]).unwrap().0;
                shared[v] = other;
            });
            assert_eq!(fast, slow);
            assert!(fast > 0 && fast <= images);
            // branch choices swapped
            let (fast, slow, _) = both_walkers(&iso, |_, _, branches| {
                for b in branches.iter_mut() {
                    b.1.swap(0, 1);
                }
            });
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn interior_root_is_refused() {
        assert!(matches!(Stages::build(&iso(4), Some(0)), Err(Error::BadParams(_))));
    }
}
