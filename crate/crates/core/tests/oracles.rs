//! Library results against the brute-force oracles in `common`.

mod common;

use common::*;
use conelab_core::builders;
use conelab_core::rule::DEFAULT_TABLE_CAP;
use conelab_core::spacetime::rect_complexity;
use conelab_core::{Budget, Coder, LocalRule, ShiftSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn compare(seed: u64, count: usize, max_alphabet: usize, max_span: usize, sft: bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..count {
        let inst = random_instance(&mut rng, max_alphabet, max_span, sft);
        let spec = inst.system.spec();
        let lang = Language::new(spec.alphabet(), &inst.forbidden);
        let mut coder = Coder::new(&inst.system, Budget::default());
        for _ in 0..3 {
            let n = rand::Rng::gen_range(&mut rng, 1..=3);
            let region = random_region(&mut rng);
            let target = rand::Rng::gen_range(&mut rng, -3..=3);
            let got = coder.codes(n, region, target).unwrap();
            let want = oracle_codes(inst.system.rule(), &lang, region, target, n);
            assert_eq!(
                got.codes, want,
                "case {case}: alphabet {} forbidden {:?} window {:?} n {n} {region:?} -> {target}",
                spec.alphabet(),
                inst.forbidden,
                inst.system.rule().window()
            );
        }
    }
}

#[test]
fn decider_matches_enumeration_on_full_shifts() {
    compare(7, 60, 3, 3, false);
}

#[test]
fn decider_matches_enumeration_on_sfts() {
    compare(11, 40, 2, 3, true);
}

#[test]
fn rule_90_edges_match_oracle() {
    let s = builders::elementary(90).unwrap();
    let lang = Language::new(2, &[]);
    let mut c = Coder::new(&s, Budget::default());
    for n in 1..=3 {
        assert_eq!(c.w_plus(n).unwrap(), oracle_w_plus(s.rule(), &lang, n));
        assert_eq!(c.w_minus(n).unwrap(), oracle_w_minus(s.rule(), &lang, n));
    }
}

#[test]
fn language_counts_match_library() {
    for forbidden in [vec![], vec![vec![1, 1]], vec![vec![0, 0, 0]], vec![vec![1, 1, 1], vec![0, 1, 0]]] {
        let spec = ShiftSpec::new(2, forbidden.clone()).unwrap();
        let lang = Language::new(2, &forbidden);
        for len in lang.k()..8 {
            assert_eq!(spec.complexity(len), lang.words(len).len() as u128, "{forbidden:?} at {len}");
        }
    }
}

#[test]
fn additive_rectangles_match_gf2_rank() {
    let spec = ShiftSpec::full(2).unwrap();
    let rules = [
        LocalRule::elementary(&spec, 90).unwrap(),
        LocalRule::elementary(&spec, 60).unwrap(),
        LocalRule::elementary(&spec, 150).unwrap(),
        LocalRule::elementary(&spec, 204).unwrap(),
        LocalRule::ledrappier(&spec).unwrap(),
        LocalRule::shift_power(&spec, 1),
    ];
    for rule in rules {
        let system = conelab_core::System::new(spec.clone(), rule).unwrap();
        let mut c = Coder::new(&system, Budget::default());
        for m in 1..=4 {
            for n in 1..=4 {
                assert_eq!(
                    rect_complexity(&mut c, m, n).unwrap(),
                    additive_rect_count(system.rule(), m, n),
                    "window {:?} m {m} n {n}",
                    system.rule().window()
                );
            }
        }
    }
}

#[test]
fn two_block_recoding_moves_edges_by_a_bounded_constant() {
    for w in [90, 30, 150] {
        let base = builders::elementary(w).unwrap();
        let recoded = two_block(base.rule());
        let mut a = Coder::new(&base, Budget::default());
        let mut b = Coder::new(&recoded, Budget::default());
        for n in 1..=5 {
            let d = (a.w_plus(n).unwrap() - b.w_plus(n).unwrap()).abs();
            assert!(d <= 2, "rule {w} n {n}: difference {d}");
            let d = (a.w_minus(n).unwrap() - b.w_minus(n).unwrap()).abs();
            assert!(d <= 2, "rule {w} n {n}: difference {d}");
        }
    }
}

#[test]
fn two_block_presentation_is_conjugate() {
    let base = builders::elementary(90).unwrap();
    let recoded = two_block(base.rule());
    assert_eq!(recoded.spec().complexity(6), 1 << 7);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let x: Vec<u8> = (0..12).map(|_| rand::Rng::gen_range(&mut rng, 0..2)).collect();
        let blocks: Vec<u8> = x.windows(2).map(|p| 2 * p[0] + p[1]).collect();
        let image = base.rule().apply_unchecked(&x);
        let want: Vec<u8> = image.windows(2).map(|p| 2 * p[0] + p[1]).collect();
        // The block image drops one more cell on the right than the symbol image.
        let got = recoded.rule().apply_unchecked(&blocks);
        assert_eq!(got, want[..got.len()]);
    }
    let sq = recoded.power(2, DEFAULT_TABLE_CAP).unwrap();
    assert_eq!(sq.rule().window(), (-2, 2));
}
