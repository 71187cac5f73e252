//! Sliding block codes given by local rules on a fixed window.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::shift::{decode, encode, word_space, ShiftSpec, Symbol};

const UNSET: Symbol = Symbol::MAX;

/// Default cap on dense table sizes.
pub const DEFAULT_TABLE_CAP: u128 = 1 << 26;

/// A local rule `f` on the window `[lo, hi]`: `(phi x)[i] = f(x[i+lo..=i+hi])`.
#[derive(Clone, Debug)]
pub struct LocalRule {
    alphabet: usize,
    lo: i64,
    hi: i64,
    table: Vec<Symbol>,
}

impl PartialEq for LocalRule {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.lo == other.lo && self.hi == other.hi && self.table == other.table
    }
}

fn check_table_size(alphabet: usize, span: usize, cap: u128) -> Result<usize> {
    let needed = word_space(alphabet, span);
    if needed > cap {
        return Err(Error::TableBlowup { needed, cap });
    }
    Ok(needed as usize)
}

impl LocalRule {
    /// Builds a rule by evaluating `f` on every allowed window word.
    pub fn from_fn<F: FnMut(&[Symbol]) -> Symbol>(spec: &ShiftSpec, lo: i64, hi: i64, mut f: F) -> Result<LocalRule> {
        if hi < lo {
            return Err(Error::BadWindow { lo, hi });
        }
        let span = (hi - lo + 1) as usize;
        let alphabet = spec.alphabet();
        let size = check_table_size(alphabet, span, DEFAULT_TABLE_CAP)?;
        let mut table = vec![UNSET; size];
        let mut bad = None;
        spec.for_each_word(span, |w| {
            let out = f(w);
            if out as usize >= alphabet {
                bad = Some(out);
            }
            table[encode(w, alphabet) as usize] = out;
        });
        if let Some(out) = bad {
            return Err(Error::BadSymbol { symbol: out as usize, alphabet });
        }
        Ok(LocalRule { alphabet, lo, hi, table })
    }

    /// Builds a rule from explicit rows; every allowed window word needs exactly one row.
    pub fn from_rows<I>(spec: &ShiftSpec, lo: i64, hi: i64, rows: I) -> Result<LocalRule>
    where
        I: IntoIterator<Item = (Vec<Symbol>, Symbol)>,
    {
        if hi < lo {
            return Err(Error::BadWindow { lo, hi });
        }
        let span = (hi - lo + 1) as usize;
        let alphabet = spec.alphabet();
        let size = check_table_size(alphabet, span, DEFAULT_TABLE_CAP)?;
        let mut table = vec![UNSET; size];
        for (w, out) in rows {
            if w.len() != span || !spec.is_allowed(&w) {
                return Err(Error::IllegalWord { word: w });
            }
            if out as usize >= alphabet {
                return Err(Error::BadSymbol { symbol: out as usize, alphabet });
            }
            table[encode(&w, alphabet) as usize] = out;
        }
        let mut missing = None;
        spec.for_each_word(span, |w| {
            if missing.is_none() && table[encode(w, alphabet) as usize] == UNSET {
                missing = Some(w.to_vec());
            }
        });
        if let Some(word) = missing {
            return Err(Error::MissingEntry { word });
        }
        Ok(LocalRule { alphabet, lo, hi, table })
    }

    pub fn identity(spec: &ShiftSpec) -> LocalRule {
        LocalRule::from_fn(spec, 0, 0, |w| w[0]).expect("identity table fits")
    }

    /// The k-th power of the shift: output cell i reads input cell i - k.
    pub fn shift_power(spec: &ShiftSpec, k: i64) -> LocalRule {
        LocalRule::from_fn(spec, -k, -k, |w| w[0]).expect("shift table fits")
    }

    /// Applies a symbol map cellwise.
    pub fn symbol_map(spec: &ShiftSpec, map: &[Symbol]) -> Result<LocalRule> {
        if map.len() != spec.alphabet() {
            return Err(Error::BadParams(format!("symbol map needs {} entries", spec.alphabet())));
        }
        LocalRule::from_fn(spec, 0, 0, |w| map[w[0] as usize])
    }

    /// Elementary cellular automaton with the given Wolfram number on the full 2-shift.
    pub fn elementary(spec: &ShiftSpec, number: u32) -> Result<LocalRule> {
        if number > 255 || spec.alphabet() != 2 {
            return Err(Error::BadParams(format!("elementary rule {number} needs a binary alphabet and number <= 255")));
        }
        LocalRule::from_fn(spec, -1, 1, |w| ((number >> (4 * w[0] + 2 * w[1] + w[2])) & 1) as Symbol)
    }

    /// `x[i] + x[i+1] mod 2` on the full 2-shift.
    pub fn ledrappier(spec: &ShiftSpec) -> Result<LocalRule> {
        if spec.alphabet() != 2 {
            return Err(Error::BadParams("ledrappier rule needs a binary alphabet".into()));
        }
        LocalRule::from_fn(spec, 0, 1, |w| w[0] ^ w[1])
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn span(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    /// Largest absolute window offset.
    pub fn range(&self) -> i64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Output for a window word, `None` when the word has no entry.
    #[inline]
    pub fn lookup(&self, word: &[Symbol]) -> Option<Symbol> {
        debug_assert_eq!(word.len(), self.span());
        self.lookup_code(encode(word, self.alphabet))
    }

    #[inline]
    pub fn lookup_code(&self, code: u64) -> Option<Symbol> {
        let out = *self.table.get(code as usize)?;
        (out != UNSET).then_some(out)
    }

    /// Allowed window words with their outputs, in table order.
    pub fn rows(&self) -> impl Iterator<Item = (Vec<Symbol>, Symbol)> + '_ {
        let span = self.span();
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &o)| o != UNSET)
            .map(move |(c, &o)| (decode(c as u64, span, self.alphabet), o))
    }

    /// Image of a finite allowed word; the result is `span - 1` symbols shorter.
    pub fn apply(&self, spec: &ShiftSpec, word: &[Symbol]) -> Result<Vec<Symbol>> {
        if word.len() < self.span() {
            return Err(Error::WordTooShort { got: word.len(), need: self.span() });
        }
        if !spec.is_allowed(word) {
            return Err(Error::IllegalWord { word: word.to_vec() });
        }
        Ok(self.apply_unchecked(word))
    }

    /// [`apply`](Self::apply) without the language check; windows without an entry map to 0.
    pub fn apply_unchecked(&self, word: &[Symbol]) -> Vec<Symbol> {
        let span = self.span();
        if word.len() < span {
            return Vec::new();
        }
        let s = self.alphabet as u64;
        let top = s.pow(span as u32 - 1);
        let mut code = encode(&word[..span], self.alphabet);
        let mut out = Vec::with_capacity(word.len() + 1 - span);
        out.push(self.lookup_code(code).unwrap_or(0));
        for i in span..word.len() {
            code = (code % top) * s + word[i] as u64;
            out.push(self.lookup_code(code).unwrap_or(0));
        }
        out
    }

    /// Applies the rule to a bi-infinite periodic point given by one period.
    pub fn apply_periodic(&self, period: &[Symbol]) -> Vec<Symbol> {
        let p = period.len() as i64;
        (0..p)
            .map(|i| {
                let w: Vec<Symbol> = (self.lo..=self.hi).map(|d| period[(i + d).rem_euclid(p) as usize]).collect();
                self.lookup(&w).unwrap_or(0)
            })
            .collect()
    }

    /// `outer` after `inner`; windows add and the result is not trimmed.
    pub fn compose(outer: &LocalRule, inner: &LocalRule, spec: &ShiftSpec, cap: u128) -> Result<LocalRule> {
        let lo = outer.lo + inner.lo;
        let hi = outer.hi + inner.hi;
        let span = (hi - lo + 1) as usize;
        let alphabet = spec.alphabet();
        let size = check_table_size(alphabet, span, cap)?;
        let mut table = vec![UNSET; size];
        let mut failure = None;
        spec.for_each_word(span, |w| {
            if failure.is_some() {
                return;
            }
            let mid = inner.apply_unchecked(w);
            match outer.lookup(&mid) {
                Some(o) => table[encode(w, alphabet) as usize] = o,
                None => failure = Some(Error::NotIntoX { word: w.to_vec(), image: mid }),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(LocalRule { alphabet, lo, hi, table })
    }

    /// Drops window cells the output does not depend on over the language.
    pub fn trimmed(&self, _spec: &ShiftSpec) -> LocalRule {
        let mut rule = self.clone();
        while rule.span() > 1 {
            if let Some(r) = rule.drop_end(true) {
                rule = r;
            } else if let Some(r) = rule.drop_end(false) {
                rule = r;
            } else {
                break;
            }
        }
        rule
    }

    fn drop_end(&self, left: bool) -> Option<LocalRule> {
        let span = self.span();
        let s = self.alphabet as u64;
        let size = s.pow(span as u32 - 1) as usize;
        let mut table = vec![UNSET; size];
        for (code, &o) in self.table.iter().enumerate() {
            if o == UNSET {
                continue;
            }
            let code = code as u64;
            let rest = if left { code % size as u64 } else { code / s } as usize;
            if table[rest] == UNSET {
                table[rest] = o;
            } else if table[rest] != o {
                return None;
            }
        }
        let (lo, hi) = if left { (self.lo + 1, self.hi) } else { (self.lo, self.hi - 1) };
        Some(LocalRule { alphabet: self.alphabet, lo, hi, table })
    }

    /// The n-th power by repeated squaring, trimmed after every product.
    pub fn power(&self, spec: &ShiftSpec, n: usize, cap: u128) -> Result<LocalRule> {
        let mut result = LocalRule::identity(spec);
        let mut base = self.trimmed(spec);
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = LocalRule::compose(&result, &base, spec, cap)?.trimmed(spec);
            }
            e >>= 1;
            if e > 0 {
                base = LocalRule::compose(&base, &base, spec, cap)?.trimmed(spec);
            }
        }
        Ok(result)
    }

    /// Whether both rules define the same map on the shift.
    pub fn same_map(&self, other: &LocalRule, spec: &ShiftSpec) -> bool {
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        let span = (hi - lo + 1) as usize;
        let mut same = true;
        spec.for_each_word(span, |w| {
            if !same {
                return;
            }
            let a = &w[(self.lo - lo) as usize..][..self.span()];
            let b = &w[(other.lo - lo) as usize..][..other.span()];
            same = self.lookup(a) == other.lookup(b);
        });
        same
    }

    /// `Some(k)` when the rule is the k-th shift power on the shift.
    pub fn as_shift_power(&self, spec: &ShiftSpec) -> Option<i64> {
        let t = self.trimmed(spec);
        if t.span() != 1 {
            return None;
        }
        (0..self.alphabet as Symbol)
            .all(|a| !spec.is_allowed(&[a]) || t.lookup(&[a]) == Some(a))
            .then_some(-t.lo)
    }

    /// Checks that every allowed word maps to an allowed word.
    pub fn check_into(&self, spec: &ShiftSpec) -> Result<()> {
        let len = self.span() + spec.step();
        let mut failure = None;
        spec.for_each_word(len, |w| {
            if failure.is_none() {
                let img = self.apply_unchecked(w);
                if !spec.is_allowed(&img) {
                    failure = Some(Error::NotIntoX { word: w.to_vec(), image: img });
                }
            }
        });
        failure.map_or(Ok(()), Err)
    }
}

/// Edge-labelled presentation of the image: states are allowed words of length `len - 1`.
struct ImagePresentation {
    states: Vec<Vec<Symbol>>,
    edges: Vec<Vec<(Symbol, Symbol, usize)>>,
}

impl ImagePresentation {
    fn new(rule: &LocalRule, spec: &ShiftSpec) -> ImagePresentation {
        let len = rule.span().max(spec.step() + 1).max(2);
        let states = spec.words(len - 1);
        let index: HashMap<&[Symbol], usize> = states.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
        let mut edges = vec![Vec::new(); states.len()];
        spec.for_each_word(len, |w| {
            let from = index[&w[..len - 1]];
            let to = index[&w[1..]];
            let label = rule.lookup(&w[len - rule.span()..]).unwrap_or(0);
            edges[from].push((w[len - 1], label, to));
        });
        ImagePresentation { states, edges }
    }
}

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn bits_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bits_iter(b: &Bits) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(k, &w)| (0..64).filter(move |i| w >> i & 1 == 1).map(move |i| 64 * k + i))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurjectivityMethod {
    /// Full shift: no diamonds in the pair graph, cross-checked by preimage counts.
    Balance,
    /// Subset construction comparing the image presentation with the shift.
    Determinization,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurjectivityReport {
    pub surjective: bool,
    pub method: SurjectivityMethod,
    /// Shortest allowed word outside the image, when not surjective.
    pub witness: Option<Vec<Symbol>>,
}

/// Decides surjectivity onto the shift.
pub fn check_surjective(rule: &LocalRule, spec: &ShiftSpec, state_cap: usize) -> Result<SurjectivityReport> {
    if spec.is_full() {
        let surjective = !has_diamond(rule, spec);
        let witness = if surjective {
            None
        } else {
            shortest_missing_word(rule, spec, state_cap)?
        };
        return Ok(SurjectivityReport { surjective, method: SurjectivityMethod::Balance, witness });
    }
    let witness = shortest_missing_word(rule, spec, state_cap)?;
    Ok(SurjectivityReport { surjective: witness.is_none(), method: SurjectivityMethod::Determinization, witness })
}

/// Surjectivity by subset construction alone, valid for any shift.
pub fn check_surjective_by_determinization(
    rule: &LocalRule,
    spec: &ShiftSpec,
    state_cap: usize,
) -> Result<SurjectivityReport> {
    let witness = shortest_missing_word(rule, spec, state_cap)?;
    Ok(SurjectivityReport { surjective: witness.is_none(), method: SurjectivityMethod::Determinization, witness })
}

/// A diamond is a pair of distinct paths with equal labels that start and end together.
fn has_diamond(rule: &LocalRule, spec: &ShiftSpec) -> bool {
    let pres = ImagePresentation::new(rule, spec);
    let n = pres.states.len();
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::new();
    for u in 0..n {
        for &(a, la, ua) in &pres.edges[u] {
            for &(b, lb, ub) in &pres.edges[u] {
                if a != b && la == lb && !seen[ua * n + ub] {
                    seen[ua * n + ub] = true;
                    queue.push_back((ua, ub));
                }
            }
        }
    }
    while let Some((u, v)) = queue.pop_front() {
        if u == v {
            return true;
        }
        for &(_, la, ua) in &pres.edges[u] {
            for &(_, lb, vb) in &pres.edges[v] {
                if la == lb && !seen[ua * n + vb] {
                    seen[ua * n + vb] = true;
                    queue.push_back((ua, vb));
                }
            }
        }
    }
    false
}

/// Breadth-first search over pairs (shift subset, image subset) for a word outside the image.
fn shortest_missing_word(rule: &LocalRule, spec: &ShiftSpec, state_cap: usize) -> Result<Option<Vec<Symbol>>> {
    let pres = ImagePresentation::new(rule, spec);
    let g = spec.graph();
    let nx = g.vertex_count();
    let ni = pres.states.len();
    let mut by_label: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); spec.alphabet()]; ni];
    for (u, es) in pres.edges.iter().enumerate() {
        for &(_, l, t) in es {
            by_label[u][l as usize].push(t);
        }
    }
    let mut all_x = bits_new(nx);
    (0..nx).for_each(|v| bits_set(&mut all_x, v));
    let mut all_i = bits_new(ni);
    (0..ni).for_each(|v| bits_set(&mut all_i, v));
    let mut seen: HashMap<(Bits, Bits), (usize, Symbol)> = HashMap::new();
    let mut order: Vec<(Bits, Bits)> = Vec::new();
    seen.insert((all_x.clone(), all_i.clone()), (usize::MAX, 0));
    order.push((all_x, all_i));
    let mut head = 0;
    while head < order.len() {
        let (sx, si) = order[head].clone();
        for a in 0..spec.alphabet() as Symbol {
            let mut tx = bits_new(nx);
            let mut any = false;
            for v in bits_iter(&sx) {
                if let Some(t) = g.next(v, a) {
                    bits_set(&mut tx, t);
                    any = true;
                }
            }
            if !any {
                continue;
            }
            let mut ti = bits_new(ni);
            let mut hit = false;
            for u in bits_iter(&si) {
                for &t in &by_label[u][a as usize] {
                    bits_set(&mut ti, t);
                    hit = true;
                }
            }
            if !hit {
                let mut word = vec![a];
                let mut at = head;
                while let Some(&(parent, sym)) = seen.get(&order[at]) {
                    if parent == usize::MAX {
                        break;
                    }
                    word.push(sym);
                    at = parent;
                }
                word.reverse();
                return Ok(Some(word));
            }
            let key = (tx, ti);
            if !seen.contains_key(&key) {
                if order.len() >= state_cap {
                    return Err(Error::BudgetExceeded(crate::error::Resource::AutomatonStates));
                }
                seen.insert(key.clone(), (head, a));
                order.push(key);
            }
        }
        head += 1;
    }
    Ok(None)
}

/// Two distinct points with the same image.
#[derive(Clone, Debug, PartialEq)]
pub enum InjectivityWitness {
    /// Two periodic points given by one common-length period each.
    Periodic { x: Vec<Symbol>, y: Vec<Symbol> },
    /// Words over the same cells that differ inside and agree on an outer margin on both sides.
    Asymptotic { x: Vec<Symbol>, y: Vec<Symbol> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InjectivityReport {
    pub injective: bool,
    pub witness: Option<InjectivityWitness>,
}

/// Decides injectivity on the shift via the synchronised pair graph.
pub fn check_injective(rule: &LocalRule, spec: &ShiftSpec) -> InjectivityReport {
    let pres = ImagePresentation::new(rule, spec);
    let n = pres.states.len();
    let mut succ: Vec<Vec<(Symbol, Symbol, usize)>> = vec![Vec::new(); n * n];
    for u in 0..n {
        for v in 0..n {
            for &(a, la, ua) in &pres.edges[u] {
                for &(b, lb, vb) in &pres.edges[v] {
                    if la == lb {
                        succ[u * n + v].push((a, b, ua * n + vb));
                    }
                }
            }
        }
    }
    let alive = bi_infinite_states(&succ);
    let off: Vec<usize> = (0..n * n).filter(|&p| alive[p] && p / n != p % n).collect();
    if off.is_empty() {
        return InjectivityReport { injective: true, witness: None };
    }
    if let Some((x, y)) = shortest_cycle_through(&succ, &alive, &off) {
        return InjectivityReport { injective: false, witness: Some(InjectivityWitness::Periodic { x, y }) };
    }
    let witness = asymptotic_pair(&succ, &alive, off[0], n, &pres.states);
    InjectivityReport { injective: false, witness: Some(witness) }
}

fn bi_infinite_states(succ: &[Vec<(Symbol, Symbol, usize)>]) -> Vec<bool> {
    let m = succ.len();
    let mut alive = vec![true; m];
    loop {
        let mut has_in = vec![false; m];
        let mut has_out = vec![false; m];
        for p in 0..m {
            if !alive[p] {
                continue;
            }
            for &(_, _, q) in &succ[p] {
                if alive[q] {
                    has_out[p] = true;
                    has_in[q] = true;
                }
            }
        }
        let mut changed = false;
        for p in 0..m {
            if alive[p] && !(has_in[p] && has_out[p]) {
                alive[p] = false;
                changed = true;
            }
        }
        if !changed {
            return alive;
        }
    }
}

fn shortest_cycle_through(
    succ: &[Vec<(Symbol, Symbol, usize)>],
    alive: &[bool],
    starts: &[usize],
) -> Option<(Vec<Symbol>, Vec<Symbol>)> {
    let mut best: Option<(Vec<Symbol>, Vec<Symbol>)> = None;
    for &s in starts {
        let mut parent: HashMap<usize, (usize, Symbol, Symbol)> = HashMap::new();
        let mut queue = VecDeque::from([s]);
        let mut found = false;
        while let Some(p) = queue.pop_front() {
            for &(a, b, q) in &succ[p] {
                if !alive[q] || parent.contains_key(&q) {
                    continue;
                }
                parent.insert(q, (p, a, b));
                if q == s {
                    found = true;
                    break;
                }
                queue.push_back(q);
            }
            if found {
                break;
            }
        }
        if !found {
            continue;
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        let mut at = s;
        loop {
            let (p, a, b) = parent[&at];
            x.push(a);
            y.push(b);
            at = p;
            if at == s {
                break;
            }
        }
        x.reverse();
        y.reverse();
        if best.as_ref().map_or(true, |(bx, _)| x.len() < bx.len()) {
            best = Some((x, y));
        }
    }
    best
}

fn asymptotic_pair(
    succ: &[Vec<(Symbol, Symbol, usize)>],
    alive: &[bool],
    start: usize,
    n: usize,
    states: &[Vec<Symbol>],
) -> InjectivityWitness {
    // Walk forward and backward from an off-diagonal state until reaching the diagonal.
    let mut pred: Vec<Vec<(Symbol, Symbol, usize)>> = vec![Vec::new(); succ.len()];
    for (p, es) in succ.iter().enumerate() {
        for &(a, b, q) in es {
            pred[q].push((a, b, p));
        }
    }
    let forward = path_to_diagonal(succ, alive, start, n);
    let backward = path_to_diagonal(&pred, alive, start, n);
    let (origin, back) = backward;
    let mut x = states[origin / n].clone();
    let mut y = states[origin % n].clone();
    for &(a, b) in back.iter().rev() {
        x.push(a);
        y.push(b);
    }
    for &(a, b) in &forward.1 {
        x.push(a);
        y.push(b);
    }
    InjectivityWitness::Asymptotic { x, y }
}

fn path_to_diagonal(
    adj: &[Vec<(Symbol, Symbol, usize)>],
    alive: &[bool],
    start: usize,
    n: usize,
) -> (usize, Vec<(Symbol, Symbol)>) {
    let mut parent: HashMap<usize, (usize, Symbol, Symbol)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut visited = HashSet::from([start]);
    while let Some(p) = queue.pop_front() {
        if p / n == p % n {
            let mut steps = Vec::new();
            let mut at = p;
            while at != start {
                let (q, a, b) = parent[&at];
                steps.push((a, b));
                at = q;
            }
            steps.reverse();
            return (p, steps);
        }
        for &(a, b, q) in &adj[p] {
            if alive[q] && visited.insert(q) {
                parent.insert(q, (p, a, b));
                queue.push_back(q);
            }
        }
    }
    (start, Vec::new())
}

/// Searches for an inverse local rule with window inside `[-max_range, max_range]`.
pub fn find_inverse(rule: &LocalRule, spec: &ShiftSpec, max_range: i64, cap: u128) -> Result<Option<LocalRule>> {
    if !check_injective(rule, spec).injective {
        return Ok(None);
    }
    let mut windows: Vec<(i64, i64)> = Vec::new();
    for lo in -max_range..=max_range {
        for hi in lo..=max_range {
            windows.push((lo, hi));
        }
    }
    windows.sort_by_key(|&(lo, hi)| (hi - lo, lo.abs() + hi.abs(), lo));
    let (rlo, rhi) = rule.window();
    let alphabet = spec.alphabet();
    for (lo, hi) in windows {
        let span = (hi - lo + 1) as usize;
        if word_space(alphabet, span) > cap {
            break;
        }
        let start = (lo + rlo).min(0);
        let end = (hi + rhi).max(0);
        let len = (end - start + 1) as usize;
        if word_space(alphabet, len) > cap {
            continue;
        }
        let mut table = vec![UNSET; word_space(alphabet, span) as usize];
        let mut consistent = true;
        spec.for_each_word(len, |w| {
            if !consistent {
                return;
            }
            let from = (lo + rlo - start) as usize;
            let image = rule.apply_unchecked(&w[from..from + span + rule.span() - 1]);
            let target = w[(-start) as usize];
            let slot = &mut table[encode(&image, alphabet) as usize];
            if *slot == UNSET {
                *slot = target;
            } else if *slot != target {
                consistent = false;
            }
        });
        if !consistent {
            continue;
        }
        let mut missing = false;
        spec.for_each_word(span, |w| missing |= table[encode(w, alphabet) as usize] == UNSET);
        if missing {
            continue;
        }
        return Ok(Some(LocalRule { alphabet, lo, hi, table }));
    }
    Ok(None)
}

/// Everything learned while validating a rule as an endomorphism.
#[derive(Clone, Debug)]
pub struct EndomorphismCertificate {
    pub surjectivity: SurjectivityReport,
    pub injectivity: InjectivityReport,
    pub inverse: Option<LocalRule>,
}

/// Checks that the rule maps the shift onto itself and records injectivity and an inverse if one is found.
pub fn validate_endomorphism(
    rule: &LocalRule,
    spec: &ShiftSpec,
    state_cap: usize,
    inverse_range: i64,
) -> Result<EndomorphismCertificate> {
    rule.check_into(spec)?;
    let surjectivity = check_surjective(rule, spec, state_cap)?;
    if !surjectivity.surjective {
        return Err(Error::NotSurjective { witness: surjectivity.witness });
    }
    let injectivity = check_injective(rule, spec);
    let inverse = if injectivity.injective {
        find_inverse(rule, spec, inverse_range, DEFAULT_TABLE_CAP)?
    } else {
        None
    };
    Ok(EndomorphismCertificate { surjectivity, injectivity, inverse })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full2() -> ShiftSpec {
        ShiftSpec::full(2).unwrap()
    }

    #[test]
    fn shift_reads_left_neighbour() {
        let s = full2();
        let sigma = LocalRule::shift_power(&s, 1);
        assert_eq!(sigma.window(), (-1, -1));
        assert_eq!(sigma.apply(&s, &[0, 1, 1, 0]).unwrap(), vec![0, 1, 1, 0]);
    }

    #[test]
    fn composition_adds_windows() {
        let s = full2();
        let r90 = LocalRule::elementary(&s, 90).unwrap();
        let sq = LocalRule::compose(&r90, &r90, &s, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(sq.window(), (-2, 2));
        // Rule 90 squared is x[i-2] + x[i+2].
        for (w, o) in sq.rows() {
            assert_eq!(o, w[0] ^ w[4]);
        }
    }

    #[test]
    fn powers_trim_to_effective_window() {
        let s = full2();
        let sigma = LocalRule::shift_power(&s, 1);
        assert_eq!(sigma.power(&s, 3, DEFAULT_TABLE_CAP).unwrap().window(), (-3, -3));
        let r90 = LocalRule::elementary(&s, 90).unwrap();
        let p4 = r90.power(&s, 4, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(p4.window(), (-4, 4));
        let swap = LocalRule::symbol_map(&s, &[1, 0]).unwrap();
        assert_eq!(swap.power(&s, 2, DEFAULT_TABLE_CAP).unwrap().as_shift_power(&s), Some(0));
        let padded = LocalRule::from_fn(&s, -2, 1, |w| w[1]).unwrap();
        assert_eq!(padded.trimmed(&s).window(), (-1, -1));
    }

    #[test]
    fn elementary_rules_surjectivity_methods_agree() {
        let s = full2();
        for n in 0..256 {
            let r = LocalRule::elementary(&s, n).unwrap();
            let a = check_surjective(&r, &s, 1 << 16).unwrap();
            let b = check_surjective_by_determinization(&r, &s, 1 << 16).unwrap();
            assert_eq!(a.surjective, b.surjective, "rule {n}");
            if let Some(w) = &a.witness {
                // The witness has no preimage of the right length.
                let pre_len = w.len() + 2;
                assert!(s.words(pre_len).iter().all(|p| &r.apply(&s, p).unwrap() != w), "rule {n}");
            }
        }
    }

    #[test]
    fn non_surjective_witnesses() {
        let s = full2();
        let zero = LocalRule::from_fn(&s, 0, 0, |_| 0).unwrap();
        assert_eq!(check_surjective(&zero, &s, 1 << 10).unwrap().witness, Some(vec![1]));
        let s3 = ShiftSpec::full(3).unwrap();
        let merge = LocalRule::symbol_map(&s3, &[0, 1, 1]).unwrap();
        assert_eq!(check_surjective(&merge, &s3, 1 << 10).unwrap().witness, Some(vec![2]));
        assert!(matches!(validate_endomorphism(&merge, &s3, 1 << 10, 2), Err(Error::NotSurjective { .. })));
    }

    #[test]
    fn sft_surjectivity_by_determinization() {
        let gm = ShiftSpec::golden_mean();
        let sigma = LocalRule::shift_power(&gm, 1);
        let rep = check_surjective(&sigma, &gm, 1 << 10).unwrap();
        assert!(rep.surjective);
        assert_eq!(rep.method, SurjectivityMethod::Determinization);
    }

    #[test]
    fn rule_90_collapses_constants() {
        let s = full2();
        let r90 = LocalRule::elementary(&s, 90).unwrap();
        let rep = check_injective(&r90, &s);
        assert!(!rep.injective);
        match rep.witness.unwrap() {
            InjectivityWitness::Periodic { x, y } => {
                assert_eq!(x.len(), 1);
                assert_ne!(x, y);
                assert_eq!(r90.apply_periodic(&x), r90.apply_periodic(&y));
            }
            w => panic!("expected periodic witness, got {w:?}"),
        }
    }

    #[test]
    fn into_check_rejects_escaping_rules() {
        let gm = ShiftSpec::golden_mean();
        let flip = LocalRule::from_fn(&gm, 0, 0, |w| 1 - w[0]).unwrap();
        assert!(matches!(flip.check_into(&gm), Err(Error::NotIntoX { .. })));
    }

    #[test]
    fn inverses_of_automorphisms() {
        let s = full2();
        let sigma = LocalRule::shift_power(&s, 2);
        let inv = find_inverse(&sigma, &s, 3, DEFAULT_TABLE_CAP).unwrap().unwrap();
        assert_eq!(inv.as_shift_power(&s), Some(-2));
        let r90 = LocalRule::elementary(&s, 90).unwrap();
        assert!(find_inverse(&r90, &s, 3, DEFAULT_TABLE_CAP).unwrap().is_none());
        let swap = LocalRule::symbol_map(&s, &[1, 0]).unwrap();
        let comp = LocalRule::compose(&swap, &sigma, &s, DEFAULT_TABLE_CAP).unwrap();
        let inv = find_inverse(&comp, &s, 3, DEFAULT_TABLE_CAP).unwrap().unwrap();
        let id = LocalRule::compose(&inv, &comp, &s, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(id.as_shift_power(&s), Some(0));
    }

    #[test]
    fn from_rows_rejects_bad_tables() {
        let gm = ShiftSpec::golden_mean();
        let rows = vec![(vec![0, 0], 0), (vec![0, 1], 1), (vec![1, 0], 0), (vec![1, 1], 0)];
        assert!(matches!(LocalRule::from_rows(&gm, 0, 1, rows), Err(Error::IllegalWord { .. })));
        let rows = vec![(vec![0, 0], 0), (vec![0, 1], 1)];
        assert!(matches!(LocalRule::from_rows(&gm, 0, 1, rows), Err(Error::MissingEntry { .. })));
    }
}
