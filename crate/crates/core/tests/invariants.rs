use critical_ising::correspondence::double::{for_each_matching_minus_s, matching_to_trees};
use critical_ising::correspondence::{double_to_ost, dual_in_double, tree_to_matching};
use critical_ising::kasteleyn::verify_squared_ising;
use critical_ising::oracles::{
    count_osts, for_each_ost, matrix_tree_z, ost_z, ArcOrigin, ComplexMatrix, EnumCaps, WeightedDigraph,
};
use critical_ising::pipeline::{verify_main_theorem, Stages, VerifyOptions};
use critical_ising::{generators, io, isoradial, Complex64, Tolerances};
use proptest::prelude::*;

fn weight() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn digraph() -> impl Strategy<Value = WeightedDigraph<f64>> {
    (2usize..=6).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, weight()), 0..=3 * n).prop_map(move |arcs| {
            let mut g = WeightedDigraph::new(n);
            for (u, v, w) in arcs {
                if u != v {
                    g.add_arc(u, v, w, ArcOrigin::Plain);
                }
            }
            g
        })
    })
}

fn matrix() -> impl Strategy<Value = Vec<Vec<Complex64>>> {
    (1usize..=6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(weight(), n), n))
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-9 * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_minor_counts_weighted_trees(g in digraph(), root in 0usize..6) {
        let root = root % g.num_vertices;
        let enumerated = ost_z(&g, root, &EnumCaps::default()).unwrap();
        prop_assert!(close(matrix_tree_z(&g, root, 1e-13), enumerated));
    }

    #[test]
    fn elimination_agrees_with_cofactor_expansion(rows in matrix()) {
        let m = ComplexMatrix::from_rows(rows);
        let cofactor = m.det_cofactor().unwrap();
        match m.det(1e-300) {
            Ok(d) => prop_assert!(close(d, cofactor)),
            Err(_) => prop_assert!(cofactor.norm() < 1e-9),
        }
    }

    #[test]
    fn squared_ising_matches_dimers_at_any_coupling(
        n in 3usize..=4,
        j in prop::collection::vec(0.01f64..2.0, 4),
    ) {
        let g = generators::cycle(n).unwrap();
        let j = j[..g.map.num_edges()].to_vec();
        let checks = verify_squared_ising(&g.map, &[("random".into(), j)], &EnumCaps::default(), 1e-9).unwrap();
        prop_assert!(checks.iter().all(|c| c.pass), "{:?}", checks);
    }

    #[test]
    fn graph_json_round_trips(w in 2usize..=4, h in 2usize..=4, p in 1i64..6) {
        let g = generators::rhombic(w, h, p, 12).unwrap();
        let back = io::read_graph(&io::graph_json(&g).unwrap()).unwrap();
        prop_assert_eq!(&back.map, &g.map);
        prop_assert_eq!(&back.coords, &g.coords);
        prop_assert_eq!(&back.theta_pi, &g.theta_pi);
    }

    #[test]
    fn rhombic_patches_satisfy_the_chain(p in 1i64..6) {
        let g = generators::rhombic(2, 2, p, 12).unwrap();
        let iso = io::isoradial_of(&g, &Tolerances::default()).unwrap();
        let r = verify_main_theorem(&g.name, &iso, &VerifyOptions::default()).unwrap();
        prop_assert!(r.pass, "{:?}", r.failures());
    }

    #[test]
    fn every_tree_of_g_lands_in_its_class(pick in 0usize..1904) {
        let g = generators::cycle(4).unwrap();
        let iso = io::isoradial_of(&g, &Tolerances::default()).unwrap();
        let st = Stages::build(&iso, None).unwrap();
        let mut tree = None;
        let mut k = 0;
        for_each_ost(&st.g.graph, st.g.root_r, &EnumCaps::default(), |t| {
            if k == pick {
                tree = Some(t.to_vec());
            }
            k += 1;
        })
        .unwrap();
        let mut tree = tree.unwrap();
        tree.sort_unstable();
        let dt = dual_in_double(&st.dd, &st.g, &tree, st.root_s).unwrap();
        prop_assert_eq!(double_to_ost(&st.dd, &st.g, &dt.edges).unwrap(), tree);
        let m = tree_to_matching(&st.dd, &dt).unwrap();
        let mut found = false;
        matching_to_trees(&st.dd, &m, st.root_s, &st.rho, None, |edges| {
            let mut e = edges.to_vec();
            e.sort_unstable();
            found |= e == dt.edges;
        })
        .unwrap();
        prop_assert!(found);
    }
}

#[test]
fn single_precision_core_runs_the_chain() {
    let g = generators::cycle(4).unwrap();
    let coords: Vec<[f32; 2]> = g.coords.iter().map(|p| [p[0] as f32, p[1] as f32]).collect();
    let tol = Tolerances::single_precision();
    let iso = isoradial::validate_isoradial::<f32>(&g.map, &coords, &tol).unwrap();
    let opts = VerifyOptions {
        tolerances: tol,
        ..VerifyOptions::default()
    };
    let r = verify_main_theorem("c4-f32", &iso, &opts).unwrap();
    assert!(r.pass, "{:?}", r.failures());
}

#[test]
fn class_count_matches_matchings() {
    let g = generators::cycle(3).unwrap();
    let iso = io::isoradial_of(&g, &Tolerances::default()).unwrap();
    let st = Stages::build(&iso, None).unwrap();
    let mut total = 0;
    for_each_matching_minus_s(&st.dd, st.root_s, &EnumCaps::default(), |m| {
        total += matching_to_trees(&st.dd, m, st.root_s, &st.rho, None, |_| {})
            .unwrap()
            .members;
    })
    .unwrap();
    assert_eq!(
        total,
        count_osts(&st.g.graph, st.g.root_r, &EnumCaps::default()).unwrap()
    );
}
