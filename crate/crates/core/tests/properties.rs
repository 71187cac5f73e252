//! Invariants checked on random rules.

mod common;

use conelab_core::definition::{parse_definition, tabulate};
use conelab_core::rule::{check_surjective, DEFAULT_TABLE_CAP};
use conelab_core::shift::{decode, encode};
use conelab_core::spacetime::rect_complexity;
use conelab_core::{Budget, Coder, LocalRule, Region, ShiftSpec, Symbol, System};
use proptest::prelude::*;

/// A binary rule given by its window offset, span and table bits.
fn binary_rule(lo: i64, span: usize, bits: u64) -> System {
    let spec = ShiftSpec::full(2).unwrap();
    let rule = LocalRule::from_fn(&spec, lo, lo + span as i64 - 1, |w| {
        let code = w.iter().fold(0usize, |acc, &a| 2 * acc + a as usize);
        ((bits >> code) & 1) as Symbol
    })
    .unwrap();
    System::new(spec, rule).unwrap()
}

fn surjective(s: &System) -> bool {
    check_surjective(s.rule(), s.spec(), 1 << 16).map(|r| r.surjective).unwrap_or(false)
}

fn rule_strategy() -> impl Strategy<Value = System> {
    (-2i64..=1, 1usize..=3, any::<u64>()).prop_map(|(lo, span, bits)| binary_rule(lo, span, bits))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encode_round_trips(word in prop::collection::vec(0u8..5, 0..12)) {
        prop_assert_eq!(decode(encode(&word, 5), word.len(), 5), word);
    }

    #[test]
    fn edges_are_ordered_and_subadditive(s in rule_strategy()) {
        prop_assume!(surjective(&s));
        let mut c = Coder::new(&s, Budget::default());
        let plus: Vec<i64> = (1..=4).map(|n| c.w_plus(n).unwrap()).collect();
        let minus: Vec<i64> = (1..=4).map(|n| c.w_minus(n).unwrap()).collect();
        for n in 1..=4 {
            prop_assert!(minus[n - 1] <= plus[n - 1]);
            for m in 1..n {
                prop_assert!(plus[n - 1] <= plus[m - 1] + plus[n - m - 1]);
                prop_assert!(minus[n - 1] >= minus[m - 1] + minus[n - m - 1]);
            }
        }
    }

    #[test]
    fn composing_with_the_shift_translates_edges(s in rule_strategy(), k in -2i64..=2) {
        prop_assume!(surjective(&s));
        let shifted = s.shifted(k).unwrap();
        let mut a = Coder::new(&s, Budget::default());
        let mut b = Coder::new(&shifted, Budget::default());
        for n in 1..=3 {
            prop_assert_eq!(b.w_plus(n).unwrap(), a.w_plus(n).unwrap() + k * n as i64);
            prop_assert_eq!(b.w_minus(n).unwrap(), a.w_minus(n).unwrap() + k * n as i64);
        }
    }

    #[test]
    fn powers_sample_the_profile(s in rule_strategy()) {
        prop_assume!(surjective(&s));
        let sq = s.power(2, DEFAULT_TABLE_CAP).unwrap();
        let mut a = Coder::new(&s, Budget::default());
        let mut b = Coder::new(&sq, Budget::default());
        for n in 1..=2 {
            prop_assert_eq!(b.w_plus(n).unwrap(), a.w_plus(2 * n).unwrap());
            prop_assert_eq!(b.w_minus(n).unwrap(), a.w_minus(2 * n).unwrap());
        }
    }

    #[test]
    fn coding_is_monotone_in_the_source(s in rule_strategy(), lo in -3i64..=0, grow in 0i64..=3, t in -2i64..=2) {
        let mut c = Coder::new(&s, Budget::default());
        let small = c.codes(2, Region::Interval { lo, hi: lo + 2 }, t).unwrap();
        let big = c.codes(2, Region::Interval { lo: lo - grow, hi: lo + 2 + grow }, t).unwrap();
        prop_assert!(!small.codes || big.codes);
        let ray = c.codes(2, Region::RayRight { from: lo }, t).unwrap();
        prop_assert!(!small.codes || ray.codes);
    }

    #[test]
    fn witnesses_replay(s in rule_strategy(), from in -3i64..=3, t in -3i64..=3) {
        let mut c = Coder::new(&s, Budget::default());
        let v = c.codes(2, Region::RayRight { from }, t).unwrap();
        if let Some(w) = v.witness {
            let pad = 2 * s.rule().range() as usize + 4;
            let ext = |x: &[Symbol]| {
                let mut out = vec![0; pad];
                out.extend_from_slice(x);
                out.resize(x.len() + 2 * pad, 0);
                out
            };
            let start = w.start - pad as i64;
            let (x, y) = (ext(&w.x), ext(&w.y));
            for i in 0..x.len() {
                if from <= start + i as i64 {
                    prop_assert_eq!(x[i], y[i]);
                }
            }
            let a = common::iterate_cell(s.rule(), &x, start, 2, t);
            let b = common::iterate_cell(s.rule(), &y, start, 2, t);
            prop_assert!(a.is_some() && a != b);
        }
    }

    #[test]
    fn rectangle_counts_grow_with_the_rectangle(s in rule_strategy(), m in 1usize..=3, n in 1usize..=3) {
        let mut c = Coder::new(&s, Budget::default());
        let base = rect_complexity(&mut c, m, n).unwrap();
        prop_assert!(base <= rect_complexity(&mut c, m + 1, n).unwrap());
        prop_assert!(base <= rect_complexity(&mut c, m, n + 1).unwrap());
        let (lo, hi) = s.rule().window();
        let span = (m as i64 + (n as i64 - 1) * (hi.max(0) - lo.min(0))) as u32;
        prop_assert!(base <= 1u128 << span);
    }

    #[test]
    fn table_definitions_round_trip(s in rule_strategy()) {
        let def = tabulate(&s);
        let text = def.print();
        let parsed = parse_definition(&text).unwrap();
        prop_assert_eq!(&parsed, &def);
        prop_assert_eq!(parsed.print(), text);
        prop_assert!(parsed.build().unwrap().rule().same_map(s.rule(), s.spec()));
    }
}
