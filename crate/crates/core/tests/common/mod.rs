//! Brute-force oracles shared by the integration tests. Nothing here uses the
//! transition graph, composed powers or the pair search of the library.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use conelab_core::{LocalRule, Region, ShiftSpec, Symbol, System};
use rand::Rng;

pub fn avoids(forbidden: &[Vec<Symbol>], w: &[Symbol]) -> bool {
    forbidden.iter().all(|f| f.len() > w.len() || !w.windows(f.len()).any(|s| s == f.as_slice()))
}

fn all_words(alphabet: usize, len: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..alphabet as Symbol).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

/// Language membership by a fixpoint on k-words that extend forever in both directions.
pub struct Language {
    alphabet: usize,
    forbidden: Vec<Vec<Symbol>>,
    k: usize,
    core: HashSet<Vec<Symbol>>,
}

impl Language {
    pub fn new(alphabet: usize, forbidden: &[Vec<Symbol>]) -> Language {
        let k = forbidden.iter().map(|f| f.len()).max().unwrap_or(2).saturating_sub(1).max(1);
        let mut core: HashSet<Vec<Symbol>> = all_words(alphabet, k).into_iter().filter(|w| avoids(forbidden, w)).collect();
        loop {
            let keep: HashSet<Vec<Symbol>> = core
                .iter()
                .filter(|u| {
                    let fwd = (0..alphabet as Symbol).any(|a| {
                        let mut e = u.to_vec();
                        e.push(a);
                        avoids(forbidden, &e) && core.contains(&e[1..])
                    });
                    let back = (0..alphabet as Symbol).any(|a| {
                        let mut e = vec![a];
                        e.extend_from_slice(u);
                        avoids(forbidden, &e) && core.contains(&e[..k])
                    });
                    fwd && back
                })
                .cloned()
                .collect();
            if keep.len() == core.len() {
                break;
            }
            core = keep;
        }
        Language { alphabet, forbidden: forbidden.to_vec(), k, core }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Words of length at least k that occur in some point.
    pub fn contains(&self, w: &[Symbol]) -> bool {
        w.len() >= self.k
            && w.iter().all(|&a| (a as usize) < self.alphabet)
            && avoids(&self.forbidden, w)
            && self.core.contains(&w[..self.k])
            && self.core.contains(&w[w.len() - self.k..])
    }

    pub fn words(&self, len: usize) -> Vec<Vec<Symbol>> {
        let mut out = Vec::new();
        self.for_each_word(len, |w| out.push(w.to_vec()));
        out
    }

    /// Visits the language words of length `len` with an odometer over all words.
    pub fn for_each_word<F: FnMut(&[Symbol])>(&self, len: usize, mut f: F) {
        let mut w = vec![0 as Symbol; len];
        loop {
            if self.contains(&w) {
                f(&w);
            }
            let mut i = len;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                w[i] += 1;
                if (w[i] as usize) < self.alphabet {
                    break;
                }
                w[i] = 0;
            }
        }
    }
}

/// Cell `target` of the n-th image, computed by iterating the one-step rule over
/// a word whose first symbol sits at `start`.
pub fn iterate_cell(rule: &LocalRule, word: &[Symbol], start: i64, n: usize, target: i64) -> Option<Symbol> {
    let (lo, hi) = rule.window();
    // Only the dependency of the target matters.
    let from = usize::try_from(target + lo * n as i64 - start).ok()?;
    let to = usize::try_from(target + hi * n as i64 - start).ok()?;
    let mut row = word.get(from..=to)?.to_vec();
    let mut first = start + from as i64;
    for _ in 0..n {
        if row.len() < rule.span() {
            return None;
        }
        row = (0..=row.len() - rule.span()).map(|i| rule.lookup(&row[i..i + rule.span()]).unwrap_or(0)).collect();
        first -= lo;
    }
    usize::try_from(target - first).ok().and_then(|i| row.get(i).copied())
}

/// The n-th image dependency window of cell 0, by iterating window bounds.
pub fn dependency(rule: &LocalRule, n: usize) -> (i64, i64) {
    let (lo, hi) = rule.window();
    (lo * n as i64, hi * n as i64)
}

/// Decides whether `source` determines cell `target` of the n-th image by
/// enumerating every language word on a window large enough to be exact.
pub fn oracle_codes(rule: &LocalRule, lang: &Language, source: Region, target: i64, n: usize) -> bool {
    let (a, b) = dependency(rule, n);
    let (mut lo, mut hi) = (target + a, target + b);
    let k = lang.k() as i64;
    match source {
        Region::Interval { lo: c, hi: d } => {
            lo = lo.min(c);
            hi = hi.max(d);
        }
        Region::RayRight { from } => {
            lo = lo.min(from);
            hi = hi.max(from + k - 1);
        }
        Region::RayLeft { to } => {
            lo = lo.min(to - k + 1);
            hi = hi.max(to);
        }
    }
    // Free margins so that the window words are genuinely extendable on the unconstrained sides.
    if hi - lo + 1 < k {
        hi = lo + k - 1;
    }
    let len = (hi - lo + 1) as usize;
    let inside: Vec<usize> = (0..len).filter(|&i| source.contains(lo + i as i64)).collect();
    let mut seen: HashMap<u64, Symbol> = HashMap::new();
    let mut coded = true;
    lang.for_each_word(len, |w| {
        if !coded {
            return;
        }
        let key = inside.iter().fold(0u64, |acc, &i| acc * lang.alphabet as u64 + w[i] as u64);
        let out = iterate_cell(rule, w, lo, n, target).expect("window covers the dependency");
        if *seen.entry(key).or_insert(out) != out {
            coded = false;
        }
    });
    coded
}

/// Smallest W such that `[0, inf)` codes every cell of `[W, inf)`, scanning down from
/// the cells whose whole dependency lies in the ray. Meant for full shifts.
pub fn oracle_w_plus(rule: &LocalRule, lang: &Language, n: usize) -> i64 {
    let (a, b) = dependency(rule, n);
    let mut w = -a;
    while w > -b - 1 && oracle_codes(rule, lang, Region::RayRight { from: 0 }, w - 1, n) {
        w -= 1;
    }
    w
}

/// Largest W such that `(-inf, 0]` codes every cell of `(-inf, W]`.
pub fn oracle_w_minus(rule: &LocalRule, lang: &Language, n: usize) -> i64 {
    let (a, b) = dependency(rule, n);
    let mut w = -b;
    while w < -a + 1 && oracle_codes(rule, lang, Region::RayLeft { to: 0 }, w + 1, n) {
        w += 1;
    }
    w
}

/// A random system on a small alphabet, with a forbidden set when `sft` is set.
pub struct Instance {
    pub system: System,
    pub forbidden: Vec<Vec<Symbol>>,
}

pub fn random_instance<R: Rng>(rng: &mut R, max_alphabet: usize, max_span: usize, sft: bool) -> Instance {
    loop {
        let s = rng.gen_range(2..=max_alphabet);
        let forbidden: Vec<Vec<Symbol>> = if sft {
            (0..rng.gen_range(1..=2))
                .map(|_| (0..rng.gen_range(2..=3)).map(|_| rng.gen_range(0..s) as Symbol).collect())
                .collect()
        } else {
            Vec::new()
        };
        let Ok(spec) = ShiftSpec::new(s, forbidden.clone()) else { continue };
        let span = rng.gen_range(1..=max_span) as i64;
        let lo = rng.gen_range(-span..=1);
        let hi = lo + span - 1;
        let table: Vec<Symbol> = (0..s.pow(span as u32)).map(|_| rng.gen_range(0..s) as Symbol).collect();
        let rule = LocalRule::from_fn(&spec, lo, hi, |w| {
            let code = w.iter().fold(0usize, |acc, &a| acc * s + a as usize);
            table[code]
        })
        .unwrap();
        if let Ok(system) = System::new(spec, rule) {
            return Instance { system, forbidden };
        }
    }
}

/// Random region near the origin.
pub fn random_region<R: Rng>(rng: &mut R) -> Region {
    match rng.gen_range(0..3) {
        0 => {
            let lo = rng.gen_range(-3..=2);
            Region::Interval { lo, hi: lo + rng.gen_range(0..=3) }
        }
        1 => Region::RayRight { from: rng.gen_range(-3..=3) },
        _ => Region::RayLeft { to: rng.gen_range(-3..=3) },
    }
}

/// Rank over GF(2) of rows stored as bit masks.
pub fn gf2_rank(mut rows: Vec<u128>) -> usize {
    let mut rank = 0;
    for bit in 0..128 {
        let mask = 1u128 << bit;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & mask != 0) else { continue };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i] & mask != 0 {
                rows[i] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

/// Pattern count on `[0, m) x [0, n)` of an additive binary rule via linear algebra:
/// every cell is a GF(2) combination of base cells, found from unit impulses.
pub fn additive_rect_count(rule: &LocalRule, m: usize, n: usize) -> u128 {
    let (lo, hi) = rule.window();
    let steps = n.saturating_sub(1) as i64;
    let base_lo = lo.min(0) * steps;
    let base_hi = hi.max(0) * steps + m as i64 - 1;
    let len = (base_hi - base_lo + 1) as usize;
    assert!(len <= 128);
    let mut rows = Vec::new();
    for j in 0..n {
        for i in 0..m as i64 {
            let mut mask = 0u128;
            for b in 0..len {
                let mut w = vec![0; len];
                w[b] = 1;
                if iterate_cell(rule, &w, base_lo, j, i) == Some(1) {
                    mask |= 1 << b;
                }
            }
            rows.push(mask);
        }
    }
    1u128 << gf2_rank(rows)
}

/// The 2-block presentation of the full 2-shift and the conjugate of a rule with window `[-1, 1]`.
pub fn two_block(rule: &LocalRule) -> System {
    assert_eq!(rule.window(), (-1, 1));
    let forbidden: Vec<Vec<Symbol>> = (0..4u8)
        .flat_map(|p| (0..4u8).map(move |q| (p, q)))
        .filter(|&(p, q)| (p & 1) != (q >> 1))
        .map(|(p, q)| vec![p, q])
        .collect();
    let spec = ShiftSpec::new(4, forbidden).unwrap();
    // Block i holds (x[i], x[i+1]) as 2 x[i] + x[i+1].
    let conj = LocalRule::from_fn(&spec, -1, 1, |w| {
        let x = |b: Symbol, second: bool| if second { b & 1 } else { b >> 1 };
        let left = rule.lookup(&[x(w[0], false), x(w[1], false), x(w[1], true)]).unwrap();
        let right = rule.lookup(&[x(w[1], false), x(w[1], true), x(w[2], true)]).unwrap();
        2 * left + right
    })
    .unwrap();
    System::new(spec, conj).unwrap()
}
