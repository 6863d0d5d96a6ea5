mod common;

use common::{invertible_system_strategy, matrix_strategy, system_strategy, words};
use proptest::prelude::*;
use swreach::reach::{kalman_space, transition_matrix, GE_DEFAULT_BUDGET};
use swreach::{
    concat_identity_check, ge_characterization, reachable_set, reachable_space_of_sequence, v_chain, ModeSequence,
    Subspace, SwitchedSystem,
};

fn word(m: usize, max_len: usize) -> impl Strategy<Value = ModeSequence> {
    prop::collection::vec(1..=m, 0..=max_len).prop_map(ModeSequence)
}

fn system_and_words() -> impl Strategy<Value = (SwitchedSystem, ModeSequence, ModeSequence)> {
    system_strategy(4, 3).prop_flat_map(|sys| {
        let m = sys.m();
        (Just(sys), word(m, 4), word(m, 4))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn concatenation_identity((sys, p1, p2) in system_and_words()) {
        prop_assert!(concat_identity_check(&sys, &p1, &p2).unwrap());
        let whole = reachable_space_of_sequence(&sys, &p1.concat(&p2)).unwrap();
        let moved = reachable_space_of_sequence(&sys, &p1).unwrap().image(&transition_matrix(&sys, &p2).unwrap()).unwrap();
        let tail = reachable_space_of_sequence(&sys, &p2).unwrap();
        prop_assert_eq!(whole, moved.sum(&tail).unwrap());
    }

    #[test]
    fn chain_grows_then_stops(sys in system_strategy(4, 3)) {
        let chain = v_chain(&sys);
        let n = sys.n();
        prop_assert!(chain.ell <= n);
        if !chain.spaces[0].is_zero() {
            for (k, d) in chain.dims().iter().enumerate() {
                prop_assert!(*d > k);
            }
        }
        prop_assert_eq!(chain.space(chain.ell + 1), chain.fixed_point().clone());
        prop_assert_eq!(chain.space(chain.ell + 3), chain.fixed_point().clone());
    }

    #[test]
    fn chain_is_union_of_reachable_spaces(sys in system_strategy(3, 2)) {
        let chain = v_chain(&sys);
        let mut union = Subspace::zero(sys.n());
        for p in 1..=3 {
            for w in words(sys.m(), p) {
                union = union.sum(&reachable_space_of_sequence(&sys, &ModeSequence(w)).unwrap()).unwrap();
            }
            prop_assert_eq!(&union, &chain.space(p));
        }
    }

    #[test]
    fn every_sequence_stays_in_reachable_set((sys, p, _) in invertible_system_strategy(4, 3).prop_flat_map(|sys| {
        let m = sys.m();
        (Just(sys), word(m, 6), Just(()))
    })) {
        let reach = reachable_set(&sys).unwrap();
        prop_assert!(reach.contains(&reachable_space_of_sequence(&sys, &p).unwrap()).unwrap());
    }

    #[test]
    fn ge_matches_fixed_point(sys in invertible_system_strategy(3, 2)) {
        prop_assert_eq!(ge_characterization(&sys, GE_DEFAULT_BUDGET).unwrap(), reachable_set(&sys).unwrap());
    }

    #[test]
    fn single_mode_is_kalman((a, b) in (1..=4usize).prop_flat_map(|n| (matrix_strategy(n, n), matrix_strategy(n, 2)))) {
        let sys = SwitchedSystem::from_pairs(vec![(a.clone(), b.clone())]).unwrap();
        prop_assert_eq!(v_chain(&sys).fixed_point().clone(), kalman_space(&a, &b).unwrap());
    }
}
