mod common;

use chunksched::priority::chunk_priority;
use chunksched::schedule::{assched, baseline_schedule, nassched, schedule, BaselineKind};
use chunksched::solvers::{brute_force_gap, WeightMatrix};
use chunksched::{PriorityParams, Strategy};
use common::{random_round, worked_example};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn worked_example_full_cover_needs_the_right_row_order() {
    let params = PriorityParams::single_layer();
    // rows 2, 3, 4: neighbor 2 takes {1,2}, 3 takes {4,5}, 4 has nothing left
    let (missing, neighbors) = worked_example([1.0, 0.9, 0.8]);
    assert_eq!(
        assched(&missing, &neighbors, 10, &params)
            .unwrap()
            .requested(),
        4
    );
    // rows 4, 2, 3: neighbor 4 takes 1 and the rest fit
    let (missing, neighbors) = worked_example([0.9, 0.8, 1.0]);
    let d = assched(&missing, &neighbors, 10, &params).unwrap();
    assert_eq!(d.requested(), 5);
    assert_eq!(d.objective, 5.0);
}

#[test]
fn worked_example_round_robin_leaves_one_chunk() {
    let (missing, neighbors) = worked_example([1.0; 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let params = PriorityParams::single_layer();
    let d = baseline_schedule(
        BaselineKind::Rr,
        &missing,
        &neighbors,
        10,
        &params,
        &mut rng,
    )
    .unwrap();
    assert_eq!(d.requested(), 4);
    assert_eq!(d.unassigned.iter().copied().collect::<Vec<_>>(), vec![3]);
}

#[test]
fn nassched_never_loses_to_assched_on_unit_chunks() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let params = PriorityParams::single_layer();
    for _ in 0..500 {
        let (missing, neighbors) = random_round(&mut rng, 0, 10, 1, 1, 4, 3);
        let opt = nassched(&missing, &neighbors, 0, &params).unwrap();
        let heur = assched(&missing, &neighbors, 0, &params).unwrap();
        assert!(opt.objective >= heur.objective);
    }
}

#[test]
fn assched_is_bounded_by_the_gap_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let params = PriorityParams::new(3);
    for _ in 0..300 {
        let (missing, neighbors) = random_round(&mut rng, 0, 6, 3, 3, 3, 4);
        if missing.is_empty() || neighbors.is_empty() {
            continue;
        }
        let d = assched(&missing, &neighbors, 0, &params).unwrap();
        let cells: Vec<Vec<Option<f64>>> = neighbors
            .iter()
            .map(|n| {
                missing
                    .iter()
                    .map(|c| {
                        n.buffer_map
                            .holds(c.seq)
                            .then(|| chunk_priority(c, 0, &params).unwrap())
                    })
                    .collect()
            })
            .collect();
        let m = WeightMatrix::from_options(&cells).unwrap();
        let caps: Vec<u64> = neighbors
            .iter()
            .map(|n| u64::from(n.est_download))
            .collect();
        let sizes: Vec<u32> = missing.iter().map(|c| c.size).collect();
        let best = brute_force_gap(&m, &caps, &sizes).unwrap().objective;
        assert!(
            d.objective <= best * (1.0 + 1e-12),
            "{} > {best}",
            d.objective
        );
    }
}

#[test]
fn every_strategy_is_deterministic_for_a_fixed_rng() {
    let params = PriorityParams::new(2);
    let mut gen = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let (missing, neighbors) = random_round(&mut gen, 5, 12, 2, 1, 5, 4);
        for strategy in Strategy::ALL {
            let run = |seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                schedule(strategy, &missing, &neighbors, 5, &params, &mut rng).unwrap()
            };
            assert_eq!(run(9), run(9), "{strategy}");
        }
    }
}
