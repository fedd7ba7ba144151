mod common;

use fairdiv::fis::{build_threshold_graph, solve_fis, FisStatus};
use fairdiv::geometry::sorted_pairwise;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_enumeration_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut yes = 0;
    for trial in 0..600 {
        let (ds, graph, fc) = common::random_graph(&mut rng);
        let expected = common::fis_by_enumeration(&graph, &ds, &fc);
        let outcome = solve_fis(&graph, &ds, &fc, None).unwrap();
        match &outcome.status {
            FisStatus::Feasible(ids) => {
                assert!(expected, "trial {trial}: solver found a set enumeration did not");
                assert_eq!(ids.len(), fc.k);
                let positions: Vec<usize> = ids
                    .iter()
                    .map(|id| graph.vertices().binary_search(id).expect("witness inside scope"))
                    .collect();
                assert!(graph.is_independent(&positions), "trial {trial}");
                assert!(fc.admits(&ds.count_groups(ids)), "trial {trial}");
                yes += 1;
            }
            FisStatus::Infeasible => assert!(!expected, "trial {trial}: solver missed a set"),
            FisStatus::BudgetExhausted => panic!("unlimited budget exhausted"),
        }
    }
    // Both answers are well represented.
    assert!((100..500).contains(&yes), "{yes} feasible of 600");
}

#[test]
fn feasibility_is_monotone_in_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..60 {
        let (ds, fc) = common::small_instance(&mut rng);
        let scope: Vec<usize> = (0..ds.len()).collect();
        let pairs = sorted_pairwise(&ds, 100).unwrap();
        let mut seen_no = false;
        let mut thresholds: Vec<f64> = pairs.values().to_vec();
        thresholds.dedup();
        for &delta in &thresholds {
            let graph = build_threshold_graph(&ds, &scope, delta).unwrap();
            let feasible = solve_fis(&graph, &ds, &fc, None).unwrap().witness().is_some();
            assert!(
                !(seen_no && feasible),
                "Yes at {delta} after a No at a smaller threshold"
            );
            seen_no |= !feasible;
        }
    }
}

#[test]
fn budget_is_never_reported_as_no() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let (ds, graph, fc) = common::random_graph(&mut rng);
        let expected = common::fis_by_enumeration(&graph, &ds, &fc);
        for budget in [1, 2, 5] {
            match solve_fis(&graph, &ds, &fc, Some(budget)).unwrap().status {
                FisStatus::Infeasible => assert!(!expected),
                FisStatus::Feasible(_) => assert!(expected),
                FisStatus::BudgetExhausted => {}
            }
        }
    }
}
