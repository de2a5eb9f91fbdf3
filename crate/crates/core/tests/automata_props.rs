use std::collections::BTreeSet;

use metafib::automata::{Dfao, Direction};
use metafib::dfaoguess::{guess_dfao, outputs_infinitely_often, verify_ratio_dfao, GuessConfig};
use metafib::polyrat::{InternTable, RatFn};
use metafib::seqcore::{symbolic_ratio_ids, symbolic_tilde_ratio_ids, BinarySeq};
use metafib::transduce::{build_transducer, certify_gaps, transduce_via_windows, WindowInput};
use proptest::prelude::*;

/// Random well-defined automata: msd-first with a 0-loop on the initial state,
/// or the lsd-first reversal of one.
fn dfao() -> impl Strategy<Value = Dfao<u8>> {
    (1usize..7, 2u32..4, any::<bool>()).prop_flat_map(|(n, k, lsd)| {
        (
            prop::collection::vec(0..n, n * k as usize),
            prop::collection::vec(0u8..3, n),
        )
            .prop_map(move |(mut delta, out)| {
                delta[0] = 0;
                let a = Dfao::new(k, 1, Direction::Msd, 0, delta, out).unwrap();
                if lsd {
                    a.reverse_direction().unwrap()
                } else {
                    a
                }
            })
    })
}

fn probes() -> impl Iterator<Item = u64> {
    (0..1u64 << 10).chain((0..64).map(|i| 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i + 1) >> 20))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn minimize_preserves_values(a in dfao()) {
        let m = a.minimize();
        prop_assert!(m.num_states() <= a.num_states());
        let mm = m.minimize();
        prop_assert_eq!(mm.num_states(), m.num_states());
        for n in probes() {
            prop_assert_eq!(m.evaluate(n), a.evaluate(n), "n = {}", n);
        }
    }

    #[test]
    fn reversal_preserves_values(a in dfao()) {
        let r = a.reverse_direction().unwrap();
        prop_assert_eq!(r.direction(), a.direction().flip());
        for n in probes() {
            prop_assert_eq!(r.evaluate(n), a.evaluate(n), "n = {}", n);
        }
    }

    #[test]
    fn realized_outputs_match_a_scan(a in dfao()) {
        let a = a.to_lsd().unwrap();
        let bound = (a.base() as u64).checked_pow(a.num_states() as u32 + 2).unwrap_or(u64::MAX);
        prop_assume!(bound <= 1 << 20);
        let scanned: BTreeSet<u8> = (0..bound).map(|n| *a.evaluate(n)).collect();
        prop_assert_eq!(scanned, a.realized_outputs());
    }

    #[test]
    fn gap_values_match_a_scan(per in prop::collection::vec(0u8..2, 1..10), pre in prop::collection::vec(0u8..2, 0..4)) {
        let u = BinarySeq::periodic(pre, per).unwrap();
        let block = u.to_dfao().unwrap().block_dfa(&[0, 1, 0]).unwrap();
        let n = 1 << 12;
        let w = u.prefix(n + 2);
        let hits: Vec<usize> = (0..n).filter(|&i| w[i..i + 3] == [0, 1, 0]).collect();
        let scanned: BTreeSet<usize> = hits.windows(2).map(|p| p[1] - p[0]).collect();
        let report = block.gap_values(32).unwrap();
        prop_assert_eq!(report.gaps.keys().copied().collect::<BTreeSet<_>>(), scanned);
        prop_assert_eq!(block.is_infinite().unwrap(), hits.len() > 2);
    }

    #[test]
    fn windows_match_direct_ratios(blocks in prop::collection::vec(prop::collection::vec(0u8..2, 0..5), 1..4)) {
        let mut per = Vec::new();
        for b in &blocks {
            per.extend([0, 1, 0]);
            per.extend(b);
        }
        let c = blocks.iter().map(|b| b.len() + 3).max().unwrap();
        let u = BinarySeq::periodic(vec![], per).unwrap();
        let ud = u.to_dfao().unwrap();
        prop_assert!(certify_gaps(&ud, c).unwrap());
        let mut table = InternTable::default();
        let h = transduce_via_windows(WindowInput::Single(&ud), c.max(3), &mut table).unwrap();
        let n = 1 << 11;
        let direct = symbolic_ratio_ids(&u.prefix(n + 3), n, &mut table);
        for (i, id) in direct.iter().enumerate() {
            prop_assert_eq!(h.evaluate(i as u64), id, "n = {}", i);
        }
        prop_assert!(h.realized_outputs().len() <= 1 << (c - 1));
    }
}

#[test]
fn guessing_is_deterministic() {
    let mut table = InternTable::default();
    let ids = symbolic_ratio_ids(&BinarySeq::ThueMorse.prefix(1 << 14), (1 << 14) - 3, &mut table);
    let cfg = GuessConfig {
        horizon: 1 << 13,
        ..GuessConfig::default()
    };
    let x = guess_dfao(&ids, &cfg).unwrap();
    let y = guess_dfao(&ids, &cfg).unwrap();
    assert_eq!(x.to_walnut(), y.to_walnut());
}

#[test]
fn proved_automaton_matches_direct_ratios() {
    for seq in [BinarySeq::ThueMorse, BinarySeq::RudinShapiro] {
        let n = 1 << 14;
        let mut table = InternTable::default();
        let ids = symbolic_ratio_ids(&seq.prefix(1 << 16), (1 << 16) - 3, &mut table);
        let k = guess_dfao(&ids, &GuessConfig::default()).unwrap();
        let labels: Vec<RatFn> = table.values().to_vec();
        let cert = verify_ratio_dfao(&k, &seq.to_dfao().unwrap(), &labels).unwrap();
        assert!(cert.proved);
        let mut fresh = InternTable::with_seed(99);
        let direct = symbolic_ratio_ids(&seq.prefix(n + 3), n, &mut fresh);
        for (i, &id) in direct.iter().enumerate() {
            assert_eq!(&labels[*k.evaluate(i as u64)], fresh.get(id), "n = {i}");
        }
        assert!(outputs_infinitely_often(&k).unwrap().values().all(|&x| x));
    }
}

#[test]
fn wrong_label_gives_a_counterexample() {
    let mut table = InternTable::default();
    let ids = symbolic_ratio_ids(&BinarySeq::ThueMorse.prefix(1 << 16), (1 << 16) - 3, &mut table);
    let k = guess_dfao(&ids, &GuessConfig::default()).unwrap();
    let mut labels: Vec<RatFn> = table.values().to_vec();
    labels[3] = "a - b".parse().unwrap();
    let cert = verify_ratio_dfao(&k, &BinarySeq::ThueMorse.to_dfao().unwrap(), &labels).unwrap();
    assert!(!cert.proved);
    assert!(cert.counterexample().is_some());
}

#[test]
fn pair_windows_match_direct_ratios() {
    let u = BinarySeq::periodic(vec![], vec![0, 1, 1, 0, 1, 0]).unwrap();
    let v = BinarySeq::periodic(vec![], vec![0, 1, 0, 0, 1, 1]).unwrap();
    let (ud, vd) = (u.to_dfao().unwrap(), v.to_dfao().unwrap());
    let mut table = InternTable::default();
    let h = transduce_via_windows(WindowInput::Pair(&ud, &vd), 6, &mut table).unwrap();
    let n = 1 << 11;
    let direct = symbolic_tilde_ratio_ids(&u.prefix(n + 3), &v.prefix(n + 3), n, &mut table);
    for (i, id) in direct.iter().enumerate() {
        assert_eq!(h.evaluate(i as u64), id, "n = {i}");
    }
    assert!(h.realized_outputs().len() <= 4usize.pow(5) + 1);
}

#[test]
fn transducer_truncations_nest() {
    let mut table = InternTable::default();
    let mut prev = 0;
    for c in 3..=10 {
        let t = build_transducer(c, &mut table).unwrap();
        assert!(t.states.len() >= prev);
        prev = t.states.len();
        let next = build_transducer(c + 1, &mut table).unwrap();
        let labels = next.labels(&table);
        let shallow: BTreeSet<(usize, String, String)> = t
            .labels(&table)
            .states
            .into_iter()
            .filter(|s| s.depth + 1 < c)
            .map(|s| (s.depth, s.x_label, s.y_label))
            .collect();
        let deeper: BTreeSet<(usize, String, String)> =
            labels.states.into_iter().map(|s| (s.depth, s.x_label, s.y_label)).collect();
        assert!(shallow.is_subset(&deeper), "c = {c}");
    }
}
