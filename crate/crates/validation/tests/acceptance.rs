use std::process::ExitCode;
use std::time::{Duration, Instant};

use critical_ising::correspondence::double::for_each_matching_minus_s;
use critical_ising::correspondence::parity::{parity_check, superposition_cycles};
use critical_ising::isoradial::critical_couplings;
use critical_ising::kasteleyn::verify_squared_ising;
use critical_ising::oracles::{matrix_tree_z, ost_z, EnumCaps};
use critical_ising::pipeline::{verify_main_theorem, verify_tree_maps, VerifyOptions};
use critical_ising::planar::extended_double;
use critical_ising::report::{Check, Report};
use critical_ising::scalar::rel_err;
use critical_ising::{generators, io, Tolerances};
use critical_ising_validation::{random_couplings, random_digraph, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

/// States allowed to the tree-level enumerations, enough for the grid's
/// billion trees of `G` to be visited one by one.
const TREE_STATES: u64 = 4_000_000_000;

fn find<'a>(checks: &'a [Check], name: &str) -> &'a Check {
    checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check named {name}"))
}

/// Worst error over the named checks on every graph, and whether all passed.
fn gather<'a>(runs: impl IntoIterator<Item = (&'a str, &'a [Check])>, names: &[&str]) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (graph, checks) in runs {
        let mut worst = 0.0f64;
        for name in names {
            let c = find(checks, name);
            pass &= c.pass;
            worst = worst.max(c.rel_err);
        }
        parts.push(format!("{graph} {worst:.1e}"));
    }
    (pass, parts.join(", "))
}

/// Whether a tree-level check visited everything rather than counting or sampling.
fn exhaustive(c: &Check) -> bool {
    let route = c.route.as_deref().unwrap_or("");
    !(route.contains("sampled") || route.contains("exceed caps") || route.starts_with("counts:"))
}

fn main() -> ExitCode {
    let graphs = generators::corpus();
    let isos: Vec<_> = graphs
        .iter()
        .map(|g| io::isoradial_of(g, &Tolerances::default()).expect("corpus graphs are isoradial"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x15186);
    let mut outcomes = Vec::new();

    // 1: squared Ising against dimers at critical and random couplings
    let start = Instant::now();
    let mut pass = true;
    let mut worst = 0.0f64;
    for iso in &isos {
        let mut couplings = vec![(
            "critical".to_string(),
            critical_couplings(iso).expect("critical couplings"),
        )];
        for k in 0..3 {
            couplings.push((format!("random {k}"), random_couplings(&mut rng, iso.map.num_edges())));
        }
        let checks = verify_squared_ising(&iso.map, &couplings, &EnumCaps::default(), TOL).expect("enumeration fits");
        pass &= checks.len() == 4 && checks.iter().all(|c| c.pass);
        worst = checks.iter().fold(worst, |w, c| w.max(c.rel_err));
    }
    let elapsed = start.elapsed();
    outcomes.push(Outcome {
        number: 1,
        pass: pass && elapsed < Duration::from_secs(30),
        detail: format!("12 coupling vectors, worst rel err {worst:.1e}, {elapsed:.2?}"),
    });

    // main chain at default caps, timed per graph
    let opts = VerifyOptions::default();
    let mut reports: Vec<(Report, Duration)> = Vec::new();
    for (g, iso) in graphs.iter().zip(&isos) {
        let start = Instant::now();
        let r = verify_main_theorem(&g.name, iso, &opts).expect("chain runs");
        reports.push((r, start.elapsed()));
    }
    let runs = || reports.iter().map(|(r, _)| (r.graph.as_str(), r.checks.as_slice()));

    let (pass, detail) = gather(runs(), &["flatness_worst_face"]);
    outcomes.push(Outcome {
        number: 2,
        pass,
        detail: format!("worst |C(F) - 1|: {detail}"),
    });

    let (pass, detail) = gather(runs(), &["det_vs_dimer", "det_imaginary_ratio"]);
    outcomes.push(Outcome {
        number: 3,
        pass,
        detail: format!("|det K| vs dimers and Im/|det|: {detail}"),
    });

    let (pass, detail) = gather(runs(), &["white_vertex_sums_worst"]);
    outcomes.push(Outcome {
        number: 4,
        pass,
        detail: format!("worst white vertex sum: {detail}"),
    });

    // 5: matrix-tree theorem on random complex digraphs
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut trees = 0u64;
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let g = random_digraph(&mut rng, n);
        let root = rng.gen_range(0..n);
        let enumerated = ost_z(&g, root, &EnumCaps::default()).expect("small digraph");
        trees += critical_ising::oracles::count_osts(&g, root, &EnumCaps::default()).expect("small digraph");
        let err = rel_err(matrix_tree_z(&g, root, Tolerances::default().pivot), enumerated);
        pass &= err <= TOL;
        worst = worst.max(err);
    }
    outcomes.push(Outcome {
        number: 5,
        pass,
        detail: format!("50 digraphs, {trees} trees enumerated, worst rel err {worst:.1e}"),
    });

    // tree-level maps, exhaustive on every graph
    let tree_opts = VerifyOptions {
        caps: EnumCaps::default().with_states(TREE_STATES),
        ..VerifyOptions::default()
    };
    let maps: Vec<(String, Vec<Check>)> = graphs
        .iter()
        .zip(&isos)
        .map(|(g, iso)| {
            (
                g.name.clone(),
                verify_tree_maps(iso, &tree_opts).expect("tree maps run"),
            )
        })
        .collect();
    let map_runs = || maps.iter().map(|(n, c)| (n.as_str(), c.as_slice()));
    let all_exhaustive = |names: &[&str]| maps.iter().all(|(_, c)| names.iter().all(|n| exhaustive(find(c, n))));

    let (p1, d1) = gather(runs(), &["ost_g_vs_ost_g0"]);
    let (p2, d2) = gather(map_runs(), &["g0_to_g_bijection"]);
    outcomes.push(Outcome {
        number: 6,
        pass: p1 && p2 && all_exhaustive(&["g0_to_g_bijection"]),
        detail: format!("Z(G0) vs Z(G): {d1}; bijection: {d2}"),
    });

    let names7 = [
        "g_to_double_round_trip",
        "classes_cover_disjointly",
        "class_cycle_rejections",
    ];
    let (pass, detail) = gather(map_runs(), &names7);
    outcomes.push(Outcome {
        number: 7,
        pass: pass && all_exhaustive(&names7),
        detail: format!("round trip, cover, cycles: {detail}"),
    });

    let (pass, detail) = gather(runs(), &["class_weight_closed_form_worst"]);
    let (p2, d2) = gather(map_runs(), &["class_weight_enumerated_vs_closed_form"]);
    let every_class = maps.iter().all(|(_, c)| {
        let route = find(c, "class_weight_enumerated_vs_closed_form")
            .route
            .clone()
            .unwrap_or_default();
        let words: Vec<&str> = route.split_whitespace().collect();
        words.len() > 2 && words[1] == "of" && words[0] == words[2]
    });
    outcomes.push(Outcome {
        number: 8,
        pass: pass && p2 && every_class,
        detail: format!("factored: {detail}; member by member: {d2}"),
    });

    let (pass, detail) = gather(runs(), &["ising_squared_vs_pair_sum", "ising_squared_vs_det_chain"]);
    let slowest = reports.iter().map(|(_, t)| *t).max().unwrap_or_default();
    outcomes.push(Outcome {
        number: 9,
        pass: pass && slowest < Duration::from_secs(60),
        detail: format!("pair sum and det chain: {detail}; slowest graph {slowest:.2?}"),
    });

    // 10: alternating cycles of matching superpositions on C3 and C4
    let mut cycles = 0usize;
    let mut odd = 0usize;
    let mut balanced = 0usize;
    for n in [3, 4] {
        let g = generators::cycle(n).expect("cycle");
        let dd = extended_double(&g.map);
        let s = dd.default_root_s;
        let mut ms = Vec::new();
        for_each_matching_minus_s(&dd, s, &EnumCaps::default(), |m| ms.push(m.to_vec())).expect("matchings");
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                for c in superposition_cycles(&dd, &ms[i], &ms[j]) {
                    let r = parity_check(&dd, &c, s).expect("cycle of the double");
                    cycles += 1;
                    odd += usize::from(r.interior_odd());
                    balanced += usize::from(r.n2_eq_n3());
                }
            }
        }
    }
    outcomes.push(Outcome {
        number: 10,
        pass: cycles > 0 && odd == cycles && balanced == cycles,
        detail: format!("{cycles} cycles: {odd} with odd interior, {balanced} with n2 = n3"),
    });

    for o in &outcomes {
        println!("{o}");
    }
    if outcomes.iter().all(|o| o.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
