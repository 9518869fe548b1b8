use ftnm_core::concat::{
    build_concatenation, is_sparse, lemma8_property_check, propagate_errors, BlockState, CircuitLayout,
    CodeModel, FaultSet, Phase, Schedule,
};
use ftnm_core::random::seeded;
use proptest::prelude::*;
use rand::Rng;

fn layout(n: usize, r: usize, a_c: usize) -> CircuitLayout {
    build_concatenation(n, r, CodeModel::new(5, a_c).unwrap()).unwrap()
}

/// Sparseness by repeated grouping of consecutive leaf verdicts.
fn brute_force_sparse(faulty: &[bool], a_c: usize, level: usize) -> bool {
    let mut dirty = faulty.to_vec();
    for _ in 0..level {
        dirty = dirty
            .chunks(a_c)
            .map(|c| c.iter().filter(|&&d| d).count() > 1)
            .collect();
    }
    !dirty.iter().any(|&d| d)
}

#[test]
fn matches_brute_force_on_all_subsets() {
    let shapes = [(1, 1, 2), (1, 1, 12), (1, 2, 2), (1, 2, 3), (1, 3, 2), (3, 1, 4), (2, 2, 2), (4, 1, 3)];
    for (n, r, a_c) in shapes {
        let l = layout(n, r, a_c);
        let leaves = l.leaf_count();
        assert!(leaves <= 12);
        for mask in 0u32..(1 << leaves) {
            let faulty: Vec<bool> = (0..leaves).map(|i| mask & (1 << i) != 0).collect();
            let set = FaultSet::new((0..leaves).filter(|&i| faulty[i]), &l).unwrap();
            for level in 0..=r {
                assert_eq!(
                    is_sparse(&set, &l, level).unwrap(),
                    brute_force_sparse(&faulty, a_c, level),
                    "N={n} r={r} A={a_c} mask={mask:b} level={level}"
                );
            }
        }
    }
}

#[test]
fn leaf_counts_and_paths() {
    assert_eq!(layout(1, 0, 5).leaf_count(), 1);
    assert_eq!(layout(1, 1, 5).leaf_count(), 5);
    let l = layout(3, 2, 4);
    assert_eq!(l.leaf_count(), 48);
    let paths: std::collections::BTreeSet<_> = (0..48).map(|i| l.leaf_path(i).unwrap()).collect();
    assert_eq!(paths.len(), 48);
    assert!(build_concatenation(0, 1, CodeModel::new(5, 5).unwrap()).is_err());
}

#[test]
fn empty_set_is_sparse_everywhere() {
    for r in 0..=3 {
        let l = layout(2, r, 3);
        for level in 0..=r {
            assert!(is_sparse(&FaultSet::empty(), &l, level).unwrap());
        }
    }
}

#[test]
fn injected_non_sparse_set_is_rejected() {
    let l = layout(1, 2, 5);
    // child rectangles 0 and 3 each hold two faults
    let bad = FaultSet::new([0, 1, 15, 16], &l).unwrap();
    assert!(!is_sparse(&bad, &l, 2).unwrap());
    assert!(is_sparse(&bad.without(15), &l, 2).unwrap());
}

#[test]
fn json_round_trip() {
    let l = layout(2, 2, 3).with_register_blocks(2).unwrap();
    let text = serde_json::to_string(&l).unwrap();
    let back: CircuitLayout = serde_json::from_str(&text).unwrap();
    assert_eq!(back, l);
    back.validate().unwrap();

    let f = FaultSet::new([1, 4, 17], &l).unwrap();
    let text = serde_json::to_string(&f).unwrap();
    assert_eq!(text, "[1,4,17]");
    assert_eq!(serde_json::from_str::<FaultSet>(&text).unwrap(), f);

    let s = Schedule::uniform(vec![Phase::PreEc, Phase::DuringEc, Phase::PreEc], 2);
    let text = serde_json::to_string(&s).unwrap();
    assert!(text.contains("pre-ec") && text.contains("during-ec"));
    assert_eq!(serde_json::from_str::<Schedule>(&text).unwrap(), s);
}

#[test]
fn block_sparseness_examples() {
    let fresh = BlockState::fresh(2, 5);
    assert!(fresh.is_sparse());
    assert_eq!(fresh.qubit_count(), 25);
    let garbage = BlockState::garbage(2, 5);
    assert!(!garbage.is_sparse());
    assert_eq!(garbage.error_count(), 25);

    let BlockState::Block { sub_blocks, .. } = &fresh else { unreachable!() };
    let mut subs = sub_blocks.clone();
    subs[1] = BlockState::garbage(1, 5);
    let one_bad = BlockState::Block {
        failed: false,
        sub_blocks: subs.clone(),
    };
    assert!(one_bad.is_sparse());
    subs[3] = BlockState::garbage(1, 5);
    let two_bad = BlockState::Block {
        failed: false,
        sub_blocks: subs,
    };
    assert!(!two_bad.is_sparse());
}

#[test]
fn sparse_in_sparse_out_at_desk_scale() {
    for r in 1..=3 {
        let l = layout(2, r, 5);
        let rep = lemma8_property_check(&l, 100, 100 + r as u64).unwrap();
        assert_eq!(rep.violations, 0, "r={r}");
    }
    // two register blocks: rectangles alternate between them
    let l = layout(4, 2, 5).with_register_blocks(2).unwrap();
    assert_eq!(lemma8_property_check(&l, 200, 5).unwrap().violations, 0);
    assert!(lemma8_property_check(&layout(1, 4, 3), 1, 0).is_err());
}

#[test]
fn property_check_is_reproducible() {
    let l = layout(2, 2, 5);
    assert_eq!(
        lemma8_property_check(&l, 50, 77).unwrap(),
        lemma8_property_check(&l, 50, 77).unwrap()
    );
}

fn random_faults<R: Rng>(rng: &mut R, l: &CircuitLayout, p: f64) -> FaultSet {
    FaultSet::new((0..l.leaf_count()).filter(|_| rng.random_bool(p)), l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn removing_a_fault_keeps_sparseness(seed in any::<u64>(), r in 1usize..=3, p in 0.0f64..0.3) {
        let mut rng = seeded(seed);
        let l = layout(2, r, 4);
        let f = random_faults(&mut rng, &l, p);
        for level in 0..=r {
            if is_sparse(&f, &l, level).unwrap() {
                for leaf in f.leaves() {
                    prop_assert!(is_sparse(&f.without(leaf), &l, level).unwrap());
                }
            }
        }
    }

    #[test]
    fn errors_stay_within_block_size(seed in any::<u64>(), r in 0usize..=2, p in 0.0f64..0.5) {
        let mut rng = seeded(seed);
        let l = layout(3, r, 5);
        let f = random_faults(&mut rng, &l, p);
        let sched = Schedule::random(&mut rng, &l);
        let state = propagate_errors(&l, &f, &sched).unwrap();
        for b in &state.blocks {
            prop_assert!(b.error_count() <= b.qubit_count());
            prop_assert_eq!(b.qubit_count(), 5usize.pow(r as u32));
        }
    }

    #[test]
    fn each_fault_spreads_to_one_qubit(seed in any::<u64>(), p in 0.0f64..0.6) {
        // a single 1-rectangle on a clean block: whatever survives correction
        // comes from during-EC faults, one error each
        let mut rng = seeded(seed);
        let l = layout(1, 1, 5);
        let f = random_faults(&mut rng, &l, p);
        let sched = Schedule::random(&mut rng, &l);
        let state = propagate_errors(&l, &f, &sched).unwrap();
        if !state.blocks[0].is_failed() {
            let during = f.leaves().filter(|&leaf| sched.phase(1, leaf) == Some(Phase::DuringEc)).count();
            prop_assert!(state.blocks[0].error_count() <= l.code().spread() * during);
        }
    }
}
