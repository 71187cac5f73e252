//! Subshifts of finite type, their k-step transition graphs and languages.

use std::collections::{HashMap, HashSet};

use petgraph::graph::DiGraph;

use crate::error::{Error, Result};

pub type Symbol = u8;

/// Largest supported alphabet.
pub const MAX_ALPHABET: usize = 255;

const NONE: u32 = u32::MAX;
const VERTEX_CAP: u128 = 1 << 24;

/// Base-`alphabet` code of a word, most significant symbol first.
pub fn encode(word: &[Symbol], alphabet: usize) -> u64 {
    word.iter().fold(0u64, |acc, &a| acc * alphabet as u64 + a as u64)
}

/// Inverse of [`encode`] for a word of known length.
pub fn decode(mut code: u64, len: usize, alphabet: usize) -> Vec<Symbol> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % alphabet as u64) as Symbol;
        code /= alphabet as u64;
    }
    out
}

/// `alphabet^len` as u128, saturating.
pub fn word_space(alphabet: usize, len: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..len {
        acc = acc.saturating_mul(alphabet as u128);
    }
    acc
}

/// Essential k-step transition graph: vertices are allowed k-words, edges allowed (k+1)-words.
#[derive(Clone, Debug)]
pub struct TransitionGraph {
    step: usize,
    alphabet: usize,
    vertices: Vec<Vec<Symbol>>,
    lookup: HashMap<Vec<Symbol>, u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
}

impl TransitionGraph {
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, v: usize) -> &[Symbol] {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, word: &[Symbol]) -> Option<usize> {
        self.lookup.get(word).map(|&v| v as usize)
    }

    /// Vertex reached from `v` by appending `a`.
    #[inline]
    pub fn next(&self, v: usize, a: Symbol) -> Option<usize> {
        let t = self.next[v * self.alphabet + a as usize];
        (t != NONE).then_some(t as usize)
    }

    /// Vertex reached from `v` by prepending `a`.
    #[inline]
    pub fn prev(&self, v: usize, a: Symbol) -> Option<usize> {
        let t = self.prev[v * self.alphabet + a as usize];
        (t != NONE).then_some(t as usize)
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = (Symbol, usize)> + '_ {
        (0..self.alphabet).filter_map(move |a| self.next(v, a as Symbol).map(|t| (a as Symbol, t)))
    }

    pub fn predecessors(&self, v: usize) -> impl Iterator<Item = (Symbol, usize)> + '_ {
        (0..self.alphabet).filter_map(move |a| self.prev(v, a as Symbol).map(|t| (a as Symbol, t)))
    }

    pub fn edge_count(&self) -> usize {
        self.next.iter().filter(|&&t| t != NONE).count()
    }

    /// Calls `f(word, start, end)` for every path spelling a word of length `len >= step`.
    pub fn for_each_path<F: FnMut(&[Symbol], usize, usize)>(&self, len: usize, mut f: F) {
        assert!(len >= self.step);
        let mut buf = vec![0; len];
        for v in 0..self.vertices.len() {
            buf[..self.step].copy_from_slice(&self.vertices[v]);
            self.extend(&mut buf, self.step, v, v, &mut f);
        }
    }

    fn extend<F: FnMut(&[Symbol], usize, usize)>(
        &self,
        buf: &mut [Symbol],
        filled: usize,
        start: usize,
        at: usize,
        f: &mut F,
    ) {
        if filled == buf.len() {
            f(buf, start, at);
            return;
        }
        for a in 0..self.alphabet {
            if let Some(t) = self.next(at, a as Symbol) {
                buf[filled] = a as Symbol;
                self.extend(buf, filled + 1, start, t, f);
            }
        }
    }

    /// Final vertex of the path spelling `word`, if `word` is a path.
    pub fn walk(&self, word: &[Symbol]) -> Option<usize> {
        if word.len() < self.step {
            return None;
        }
        let mut v = self.vertex_index(&word[..self.step])?;
        for &a in &word[self.step..] {
            v = self.next(v, a)?;
        }
        Some(v)
    }
}

/// A subshift of finite type given by an alphabet and finitely many forbidden words.
#[derive(Clone, Debug)]
pub struct ShiftSpec {
    alphabet: usize,
    forbidden: Vec<Vec<Symbol>>,
    graph: TransitionGraph,
    short: Vec<HashSet<Vec<Symbol>>>,
}

impl PartialEq for ShiftSpec {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.forbidden == other.forbidden
    }
}

impl ShiftSpec {
    pub fn full(alphabet: usize) -> Result<ShiftSpec> {
        ShiftSpec::new(alphabet, Vec::new())
    }

    /// The binary shift with no two consecutive 1s.
    pub fn golden_mean() -> ShiftSpec {
        ShiftSpec::new(2, vec![vec![1, 1]]).expect("golden mean shift is valid")
    }

    pub fn new(alphabet: usize, forbidden: Vec<Vec<Symbol>>) -> Result<ShiftSpec> {
        if !(2..=MAX_ALPHABET).contains(&alphabet) {
            return Err(Error::BadAlphabet(alphabet));
        }
        let mut forbidden = forbidden;
        for w in &forbidden {
            if w.is_empty() {
                return Err(Error::EmptyShift);
            }
            if let Some(&a) = w.iter().find(|&&a| a as usize >= alphabet) {
                return Err(Error::BadSymbol { symbol: a as usize, alphabet });
            }
        }
        forbidden.sort();
        forbidden.dedup();
        let step = forbidden.iter().map(|w| w.len()).max().unwrap_or(1).saturating_sub(1).max(1);
        let graph = build_graph(alphabet, step, &forbidden)?;
        if graph.vertex_count() == 0 {
            return Err(Error::EmptyShift);
        }
        let mut short = vec![HashSet::new(); step];
        for v in &graph.vertices {
            for len in 1..step {
                short[len].insert(v[..len].to_vec());
            }
        }
        let spec = ShiftSpec { alphabet, forbidden, graph, short };
        spec.reject_finite()?;
        Ok(spec)
    }

    fn reject_finite(&self) -> Result<()> {
        let v = self.graph.vertex_count();
        let a = self.complexity(v.max(self.step()));
        let b = self.complexity(2 * v.max(self.step()));
        if a == b && b != u128::MAX {
            return Err(Error::FiniteShift);
        }
        Ok(())
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn forbidden(&self) -> &[Vec<Symbol>] {
        &self.forbidden
    }

    /// The recoding step k: vertices of the transition graph are k-words.
    pub fn step(&self) -> usize {
        self.graph.step
    }

    pub fn graph(&self) -> &TransitionGraph {
        &self.graph
    }

    pub fn is_full(&self) -> bool {
        self.forbidden.is_empty()
    }

    pub fn is_allowed(&self, word: &[Symbol]) -> bool {
        if word.iter().any(|&a| a as usize >= self.alphabet) {
            return false;
        }
        match word.len() {
            0 => true,
            n if n < self.step() => self.short[n].contains(word),
            _ => self.graph.walk(word).is_some(),
        }
    }

    /// All allowed words of length `n` in lexicographic order.
    pub fn words(&self, n: usize) -> Vec<Vec<Symbol>> {
        let mut out = Vec::new();
        self.for_each_word(n, |w| out.push(w.to_vec()));
        out
    }

    /// Visits the allowed words of length `n` in lexicographic order.
    pub fn for_each_word<F: FnMut(&[Symbol])>(&self, n: usize, mut f: F) {
        if n == 0 {
            f(&[]);
        } else if n < self.step() {
            let mut seen: Vec<&Vec<Symbol>> = self.short[n].iter().collect();
            seen.sort();
            for w in seen {
                f(w);
            }
        } else {
            self.graph.for_each_path(n, |w, _, _| f(w));
        }
    }

    /// Number of allowed words of length `n`, saturating at `u128::MAX`.
    pub fn complexity(&self, n: usize) -> u128 {
        let k = self.step();
        if n < k {
            return if n == 0 { 1 } else { self.short[n].len() as u128 };
        }
        let mut counts = vec![1u128; self.graph.vertex_count()];
        for _ in k..n {
            let mut nextc = vec![0u128; counts.len()];
            for (v, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (_, t) in self.graph.successors(v) {
                    nextc[t] = nextc[t].saturating_add(c);
                }
            }
            counts = nextc;
        }
        counts.iter().fold(0u128, |acc, &c| acc.saturating_add(c))
    }

    pub fn language_table(&self, max_len: usize) -> LanguageTable {
        LanguageTable { by_length: (0..=max_len).map(|n| self.words(n)).collect() }
    }

    /// Smallest gluing length n0 such that uw, wv allowed with |w| >= n0 implies uwv allowed.
    pub fn bowen_constant(&self) -> usize {
        let k = self.step();
        let table = self.language_table(k);
        (0..k)
            .find(|&n0| (n0..k).all(|m| self.glues_at(&table, m)))
            .unwrap_or(k)
    }

    fn glues_at(&self, table: &LanguageTable, m: usize) -> bool {
        let k = self.step();
        for w in table.words(m) {
            let mut lefts = Vec::new();
            let mut rights = Vec::new();
            for len in 1..=k {
                for u in table.words(len) {
                    let uw: Vec<Symbol> = u.iter().chain(w).copied().collect();
                    if self.is_allowed(&uw) {
                        lefts.push(u.clone());
                    }
                    let wu: Vec<Symbol> = w.iter().chain(u).copied().collect();
                    if self.is_allowed(&wu) {
                        rights.push(u.clone());
                    }
                }
            }
            for u in &lefts {
                for v in &rights {
                    let uwv: Vec<Symbol> = u.iter().chain(w).chain(v).copied().collect();
                    if !self.is_allowed(&uwv) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Topological entropy as the log of the spectral radius of the transition graph.
    pub fn entropy(&self) -> Result<EntropyReport> {
        let g = &self.graph;
        let mut dg = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..g.vertex_count()).map(|_| dg.add_node(())).collect();
        for v in 0..g.vertex_count() {
            for (_, t) in g.successors(v) {
                dg.add_edge(nodes[v], nodes[t], ());
            }
        }
        let mut rho = 0.0f64;
        let sccs = petgraph::algo::tarjan_scc(&dg);
        let irreducible = sccs.len() == 1;
        for comp in &sccs {
            let members: Vec<usize> = comp.iter().map(|n| n.index()).collect();
            rho = rho.max(component_radius(g, &members)?);
        }
        let h = if rho > 0.0 { rho.ln() } else { f64::NEG_INFINITY };
        let check_len = (2 * g.vertex_count() + 16).max(24);
        let cross_check = irreducible.then(|| {
            let p = self.complexity(check_len);
            let estimate = (p as f64).ln() / check_len as f64;
            let tolerance = 2.0 * (g.vertex_count().max(2) as f64).ln() / check_len as f64;
            CrossCheck { length: check_len, estimate, tolerance, agrees: (estimate - h).abs() <= tolerance }
        });
        Ok(EntropyReport { entropy: h, spectral_radius: rho, irreducible, cross_check })
    }
}

/// Spectral radius of the adjacency matrix restricted to one strongly connected component.
fn component_radius(g: &TransitionGraph, members: &[usize]) -> Result<f64> {
    let local: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = members
        .iter()
        .map(|&v| g.successors(v).filter_map(|(_, t)| local.get(&t).copied()).collect())
        .collect();
    if adj.iter().all(|row| row.is_empty()) {
        return Ok(0.0);
    }
    // A + I is primitive on an irreducible component, so power iteration converges.
    let n = members.len();
    let mut x = vec![1.0f64; n];
    for _ in 0..200_000 {
        let mut y = x.clone();
        for (i, row) in adj.iter().enumerate() {
            for &j in row {
                y[j] += x[i];
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        for v in y.iter_mut() {
            *v /= norm;
        }
        x = y;
        if hi - lo <= 1e-10 * hi {
            return Ok(0.5 * (hi + lo) - 1.0);
        }
    }
    Err(Error::NonConvergence)
}

fn build_graph(alphabet: usize, step: usize, forbidden: &[Vec<Symbol>]) -> Result<TransitionGraph> {
    let space = word_space(alphabet, step);
    if space > VERTEX_CAP {
        return Err(Error::TableBlowup { needed: space, cap: VERTEX_CAP });
    }
    let banned: HashSet<&[Symbol]> = forbidden.iter().map(|w| w.as_slice()).collect();
    let has_banned_suffix = |w: &[Symbol]| (1..=w.len()).any(|l| banned.contains(&w[w.len() - l..]));
    let mut alive: Vec<Vec<Symbol>> = Vec::new();
    for code in 0..space as u64 {
        let w = decode(code, step, alphabet);
        if (1..=step).all(|end| !has_banned_suffix(&w[..end])) {
            alive.push(w);
        }
    }
    // Repeatedly drop vertices without a successor or predecessor.
    loop {
        let set: HashSet<&[Symbol]> = alive.iter().map(|w| w.as_slice()).collect();
        let ok = |w: &Vec<Symbol>| {
            let has_out = (0..alphabet).any(|a| {
                let mut e = w.clone();
                e.push(a as Symbol);
                !has_banned_suffix(&e) && set.contains(&e[1..])
            });
            let has_in = (0..alphabet).any(|a| {
                let mut e = vec![a as Symbol];
                e.extend_from_slice(w);
                !has_banned_suffix(&e) && set.contains(&e[..step])
            });
            has_out && has_in
        };
        let kept: Vec<Vec<Symbol>> = alive.iter().filter(|w| ok(w)).cloned().collect();
        if kept.len() == alive.len() {
            break;
        }
        alive = kept;
    }
    let lookup: HashMap<Vec<Symbol>, u32> =
        alive.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
    let n = alive.len();
    let mut next = vec![NONE; n * alphabet];
    let mut prev = vec![NONE; n * alphabet];
    for (v, w) in alive.iter().enumerate() {
        for a in 0..alphabet {
            let mut e = w.clone();
            e.push(a as Symbol);
            if has_banned_suffix(&e) {
                continue;
            }
            if let Some(&t) = lookup.get(&e[1..]) {
                next[v * alphabet + a] = t;
                prev[t as usize * alphabet + w[0] as usize] = v as u32;
            }
        }
    }
    Ok(TransitionGraph { step, alphabet, vertices: alive, lookup, next, prev })
}

/// Allowed words grouped by length.
#[derive(Clone, Debug)]
pub struct LanguageTable {
    by_length: Vec<Vec<Vec<Symbol>>>,
}

impl LanguageTable {
    pub fn max_len(&self) -> usize {
        self.by_length.len() - 1
    }

    pub fn words(&self, n: usize) -> &[Vec<Symbol>] {
        &self.by_length[n]
    }

    pub fn count(&self, n: usize) -> usize {
        self.by_length[n].len()
    }
}

/// Comparison of the spectral entropy with `log P(n) / n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossCheck {
    pub length: usize,
    pub estimate: f64,
    pub tolerance: f64,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    pub entropy: f64,
    pub spectral_radius: f64,
    pub irreducible: bool,
    /// Only computed for irreducible graphs.
    pub cross_check: Option<CrossCheck>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib(n: usize) -> u128 {
        let (mut a, mut b) = (0u128, 1u128);
        for _ in 0..n {
            let c = a + b;
            a = b;
            b = c;
        }
        a
    }

    #[test]
    fn golden_mean_counts_are_fibonacci() {
        let gm = ShiftSpec::golden_mean();
        for n in 1..=12 {
            assert_eq!(gm.complexity(n), fib(n + 2));
            assert_eq!(gm.words(n).len() as u128, fib(n + 2));
        }
    }

    #[test]
    fn words_are_lexicographic() {
        let gm = ShiftSpec::golden_mean();
        let w = gm.words(3);
        let mut sorted = w.clone();
        sorted.sort();
        assert_eq!(w, sorted);
        assert!(w.iter().all(|x| gm.is_allowed(x)));
    }

    #[test]
    fn bowen_constants() {
        assert_eq!(ShiftSpec::full(2).unwrap().bowen_constant(), 0);
        assert_eq!(ShiftSpec::golden_mean().bowen_constant(), 1);
        let s = ShiftSpec::new(2, vec![vec![0, 0, 0, 0]]).unwrap();
        assert_eq!(s.step(), 3);
        assert_eq!(s.bowen_constant(), 3);
    }

    #[test]
    fn entropies() {
        let e = ShiftSpec::full(2).unwrap().entropy().unwrap();
        assert!((e.entropy - 2f64.ln()).abs() < 1e-9);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let e = ShiftSpec::golden_mean().entropy().unwrap();
        assert!((e.entropy - phi.ln()).abs() < 1e-9);
        assert!(e.cross_check.unwrap().agrees);
        let e = ShiftSpec::full(4).unwrap().entropy().unwrap();
        assert!((e.entropy - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn reducible_entropy_uses_largest_component() {
        // 0s then 1s then 2s: each component a single loop.
        let s = ShiftSpec::new(3, vec![vec![1, 0], vec![2, 0], vec![2, 1]]).unwrap();
        let e = s.entropy().unwrap();
        assert!(!e.irreducible);
        assert!(e.entropy.abs() < 1e-9);
        assert!(e.cross_check.is_none());
    }

    #[test]
    fn degenerate_shifts_are_rejected() {
        assert!(matches!(ShiftSpec::new(2, vec![vec![0], vec![1]]), Err(Error::EmptyShift)));
        assert!(matches!(ShiftSpec::new(2, vec![vec![1]]), Err(Error::FiniteShift)));
        assert!(matches!(ShiftSpec::new(2, vec![vec![0, 0], vec![1, 1]]), Err(Error::FiniteShift)));
        assert!(matches!(ShiftSpec::new(1, vec![]), Err(Error::BadAlphabet(1))));
        assert!(matches!(ShiftSpec::new(2, vec![vec![2]]), Err(Error::BadSymbol { .. })));
    }

    #[test]
    fn trimming_removes_dead_ends() {
        // Symbol 2 can never be followed, so it occurs in no bi-infinite point.
        let s = ShiftSpec::new(3, vec![vec![2, 0], vec![2, 1], vec![2, 2]]).unwrap();
        assert!(!s.is_allowed(&[2]));
        assert!(s.is_allowed(&[0, 1, 1, 0]));
        assert_eq!(s.graph().vertex_count(), 2);
    }

    #[test]
    fn encode_roundtrip() {
        let w = vec![2, 0, 1, 2];
        assert_eq!(decode(encode(&w, 3), 4, 3), w);
    }
}
