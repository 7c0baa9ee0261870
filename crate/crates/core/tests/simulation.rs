use chunksched::sim::{simulate, World};
use chunksched::{run_simulation, SimConfig, Strategy};

fn small(strategy: Strategy) -> SimConfig {
    let mut cfg = SimConfig::desk_scale(strategy, 1, 300);
    cfg.node_count = 20;
    cfg.degree = 5;
    cfg.duration = 8;
    cfg.window_seconds = 4;
    cfg
}

#[test]
fn transfers_respect_capacities_and_never_repeat() {
    for strategy in Strategy::ALL {
        let cfg = small(strategy);
        let mut world = World::new(&cfg).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..World::run_length(&cfg) {
            let out = world.step().unwrap();
            let mut sent = vec![0u32; 20];
            let mut got = vec![0u32; 20];
            for d in &out.delivered {
                assert!(seen.insert((d.to, d.seq)), "{strategy}: duplicate delivery");
                assert_ne!(d.to, 0, "the source never receives");
                sent[d.from as usize] += 1;
                got[d.to as usize] += 1;
                assert!(out.requests.contains(&(d.to, d.from, d.seq)));
            }
            // 300 Kbps at 10 Kbit chunks: source sends at most 4 x 30
            assert!(sent[0] <= 120);
            for n in 1..20 {
                assert!(sent[n] <= 100 && got[n] <= 200);
            }
        }
    }
}

#[test]
fn reports_are_reproducible_and_in_range() {
    for strategy in Strategy::ALL {
        let a = run_simulation(&small(strategy)).unwrap();
        let b = run_simulation(&small(strategy)).unwrap();
        assert_eq!(a, b);
        let r = a.aggregate_delivery.unwrap();
        assert!((0.0..=1.0).contains(&r));
        assert_eq!(a.duplicate_request_count, 0);
        assert!(a.requested_count > 0);
    }
}

#[test]
fn different_seeds_give_different_overlays() {
    let cfg = small(Strategy::Rnd);
    let mut other = cfg.clone();
    other.seed += 1;
    let a = simulate(&cfg).unwrap();
    let b = simulate(&other).unwrap();
    assert_ne!(a.stats(), b.stats());
}
