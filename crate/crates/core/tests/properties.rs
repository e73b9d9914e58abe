use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sharpnfa::*;

type Q = Rational;

prop_compose! {
    fn arb_nfa(max_m: usize, max_sigma: usize)(m in 1..=max_m, sigma in 2..=max_sigma)
        (m in Just(m), sigma in Just(sigma),
         initial in 0..m,
         accept in proptest::collection::btree_set(0..m, 1..=m),
         trans in proptest::collection::btree_set((0..m, 0..sigma, 0..m), 0..=(m * sigma * m).min(24)))
        -> Nfa
    {
        Nfa::new(m, sigma, initial, accept, trans).unwrap()
    }
}

fn arb_word(sigma: usize, max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0..sigma as u8, 0..=max_len)
}

// end states of every run of `w`, one run at a time, scanning the raw relation
fn run_ends(a: &Nfa, w: &[u8]) -> BTreeSet<StateId> {
    fn go(a: &Nfa, q: StateId, rest: &[u8], out: &mut BTreeSet<StateId>) {
        match rest.split_first() {
            None => {
                out.insert(q);
            }
            Some((&b, tail)) => {
                for &(p, c, r) in a.transitions() {
                    if p == q && c == b {
                        go(a, r, tail, out);
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(a, a.initial(), w, &mut out);
    out
}

fn all_words(sigma: usize, len: usize) -> Vec<Vec<u8>> {
    let mut words = vec![vec![]];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                (0..sigma as u8).map(move |b| {
                    let mut v = w.clone();
                    v.push(b);
                    v
                })
            })
            .collect();
    }
    words
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn text_and_json_round_trip(a in arb_nfa(6, 4)) {
        prop_assert_eq!(&Nfa::parse(&a.to_text()).unwrap(), &a);
        prop_assert_eq!(&Nfa::parse(&a.to_json()).unwrap(), &a);
    }

    #[test]
    fn predecessors_match_relation_scan(a in arb_nfa(6, 3)) {
        for q in 0..a.num_states() as StateId {
            for b in a.symbols() {
                let scan: Vec<StateId> = a
                    .transitions()
                    .iter()
                    .filter(|&&(_, c, r)| c == b && r == q)
                    .map(|&(p, _, _)| p)
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                prop_assert_eq!(a.predecessors(q, b), &scan[..]);
            }
        }
    }

    #[test]
    fn reach_matches_run_enumeration(a in arb_nfa(5, 3), w in arb_word(3, 8)) {
        let w: Vec<u8> = w.into_iter().filter(|&b| (b as usize) < a.sigma()).collect();
        let cache = ReachCache::new();
        let word = Word::new(w.clone());
        let got: BTreeSet<StateId> = reach_states(&a, &word, &cache).iter().collect();
        prop_assert_eq!(&got, &run_ends(&a, &w));
        // second lookup is served from the cache
        let again: BTreeSet<StateId> = reach_states(&a, &word, &cache).iter().collect();
        prop_assert_eq!(got, again);
        prop_assert!(cache.get(&word).is_some());
    }

    #[test]
    fn member_slices_and_witnesses(a in arb_nfa(4, 2)) {
        let n = 6;
        let cache = ReachCache::new();
        let table = SliceTable::new(&a, n);
        for l in 0..=n {
            let words = all_words(a.sigma(), l);
            for q in 0..a.num_states() as StateId {
                let members: Vec<&Vec<u8>> =
                    words.iter().filter(|w| run_ends(&a, w).contains(&q)).collect();
                for w in &words {
                    let want = run_ends(&a, w).contains(&q);
                    prop_assert_eq!(member(&a, q, l, &Word::new(w.to_vec()), &cache), want);
                }
                prop_assert_eq!(table.is_nonempty(q, l), !members.is_empty());
                match smallest_word(&a, q, l) {
                    Some(s) => {
                        prop_assert!(!members.is_empty());
                        // words are generated in lexicographic order
                        prop_assert_eq!(s.symbols(), &members[0][..]);
                    }
                    None => prop_assert!(members.is_empty()),
                }
                if l > 0 {
                    prop_assert!(!member(&a, q, l, &Word::new(vec![0; l - 1]), &cache));
                }
            }
        }
    }

    #[test]
    fn oracles_agree(a in arb_nfa(6, 2), n in 0usize..=8) {
        let budget = Budget::default();
        let brute = brute_force_count(&a, n, &budget).unwrap();
        let det = determinized_count(&a, n, &budget).unwrap();
        prop_assert_eq!(&brute, &det.total);
        for l in 0..=n.min(5) {
            for q in 0..a.num_states() as StateId {
                let listed = enumerate_slice(&a, q, l, &budget).unwrap();
                prop_assert_eq!(BigUint::from(listed.len()), det.slice(q, l).clone());
            }
        }
    }

    #[test]
    fn union_output_bounded_and_reproducible(
        sizes in proptest::collection::vec(0u32..6, 1..5),
        seed in any::<u64>(),
    ) {
        // set i = {0, .., sizes[i]-1}; samples cycle through it
        let samples: Vec<Vec<u32>> = sizes
            .iter()
            .map(|&s| (0..600).map(|j| if s == 0 { 0 } else { j % s }).collect())
            .collect();
        let handles: Vec<_> = sizes
            .iter()
            .zip(&samples)
            .map(|(&s, xs)| {
                let xs: &[u32] = if s == 0 { &[] } else { xs };
                SetHandle::new(move |x: &u32| *x < s, xs, Q::from_integer(s.into()))
            })
            .collect();
        let params = UnionParams::new(0.5, 0.2, 0.0);
        let total: u32 = sizes.iter().sum();
        let x = app_union(&params, &handles, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let y = app_union(&params, &handles, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(x.estimate >= Q::from_integer(0.into()));
        prop_assert!(x.estimate <= Q::from_integer(total.into()));
        prop_assert_eq!(x, y);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stores_hold_members_and_runs_reproduce(a in arb_nfa(4, 2), n in 1usize..=5, seed in any::<u64>()) {
        let params = FprasParams::practical(a.num_states(), n, 0.5, 0.2).unwrap();
        let t1 = build_tables::<Q>(&a, &params, seed, &RunOptions::default()).unwrap();
        let t2 = build_tables::<Q>(&a, &params, seed, &RunOptions::default()).unwrap();
        let cache = ReachCache::new();
        for l in 0..=n {
            prop_assert_eq!(t1.estimates.row(l), t2.estimates.row(l));
            for q in 0..a.num_states() as StateId {
                let store = t1.stores.get(q, l);
                prop_assert_eq!(store, t2.stores.get(q, l));
                if t1.slices.is_nonempty(q, l) {
                    prop_assert_eq!(store.len() as u64, params.ns);
                } else {
                    prop_assert!(store.is_empty());
                }
                for s in store {
                    prop_assert!(member(&a, q, l, &s.word, &cache));
                }
            }
        }
    }
}

#[test]
fn float_and_exact_scalars_run_the_same_algorithm() {
    let a = Nfa::new(2, 2, 0, [1], [(0, 0, 0), (0, 1, 0), (0, 1, 1)]).unwrap();
    let cfg = CountConfig::practical(0.5, 0.2);
    let exact = count::<Q>(&a, 5, &cfg, 4).unwrap().estimate.to_real();
    let float = count::<f64>(&a, 5, &cfg, 4).unwrap().estimate;
    assert!(exact > 16.0 / 1.5 && exact < 16.0 * 1.5, "{exact}");
    assert!(float > 16.0 / 1.5 && float < 16.0 * 1.5, "{float}");
}
