//! Deciding which cells of an iterate are determined by a region of the input,
//! and the light-cone widths built on top of that.

use serde::Serialize;

use crate::error::{Error, Resource, Result};
use crate::rule::LocalRule;
use crate::shift::{ShiftSpec, Symbol};
use crate::system::{Budget, System};

/// A set of coordinates of the form `[c, d]`, `[c, inf)` or `(-inf, d]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Interval { lo: i64, hi: i64 },
    RayRight { from: i64 },
    RayLeft { to: i64 },
}

impl Region {
    pub fn interval(lo: i64, hi: i64) -> Region {
        Region::Interval { lo, hi }
    }

    pub fn lower(&self) -> Option<i64> {
        match *self {
            Region::Interval { lo, .. } => Some(lo),
            Region::RayRight { from } => Some(from),
            Region::RayLeft { .. } => None,
        }
    }

    pub fn upper(&self) -> Option<i64> {
        match *self {
            Region::Interval { hi, .. } => Some(hi),
            Region::RayRight { .. } => None,
            Region::RayLeft { to } => Some(to),
        }
    }

    #[inline]
    pub fn contains(&self, p: i64) -> bool {
        self.lower().map_or(true, |c| p >= c) && self.upper().map_or(true, |d| p <= d)
    }
}

/// Two points over cells `start..start + x.len()` that agree on the source
/// region and whose images differ at the target cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodingWitness {
    pub start: i64,
    pub x: Vec<Symbol>,
    pub y: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodingVerdict {
    pub level: usize,
    pub source: Region,
    pub target: i64,
    pub codes: bool,
    pub witness: Option<CodingWitness>,
}

/// Checks a witness against the definition by direct replay.
pub fn replay_witness(rule: &LocalRule, spec: &ShiftSpec, source: Region, target: i64, w: &CodingWitness) -> bool {
    if w.x.len() != w.y.len() || !spec.is_allowed(&w.x) || !spec.is_allowed(&w.y) {
        return false;
    }
    let agree = (0..w.x.len()).all(|i| !source.contains(w.start + i as i64) || w.x[i] == w.y[i]);
    let (lo, hi) = rule.window();
    let from = target + lo - w.start;
    let to = target + hi - w.start;
    if from < 0 || to >= w.x.len() as i64 {
        return false;
    }
    let (from, to) = (from as usize, to as usize);
    agree && rule.lookup(&w.x[from..=to]) != rule.lookup(&w.y[from..=to])
}

/// Pair-state feasibility layers for extending a pair of paths away from the enumerated block.
struct Extension {
    /// `layers[0]` is at the far end, the last layer touches the block.
    layers: Vec<Vec<bool>>,
    /// Whether position steps between consecutive layers are synchronised.
    synced: Vec<bool>,
}

impl Extension {
    fn feasible(&self, v1: usize, v2: usize, n: usize) -> bool {
        self.layers.last().map_or(true, |l| l[v1 * n + v2])
    }
}

/// Decision procedure for one trimmed table on one shift.
fn decide(table: &LocalRule, spec: &ShiftSpec, source: Region, target: i64) -> Result<Option<CodingWitness>> {
    let g = spec.graph();
    let s = spec.alphabet();
    let k = spec.step();
    let nv = g.vertex_count();
    let (a, _) = table.window();
    let span = table.span();
    let len = span.max(k);
    let p0 = target + a;
    let p1 = p0 + len as i64 - 1;
    if (len as f64) * (s as f64).log2() > 127.0 {
        return Err(Error::TableBlowup { needed: u128::MAX, cap: u128::MAX });
    }
    let in_source: Vec<bool> = (0..len).map(|i| source.contains(p0 + i as i64)).collect();

    let left = left_extension(spec, source, p0);
    let right = right_extension(spec, source, p1);

    let mut entries: Vec<(u128, u32, u32, Symbol, u128)> = Vec::new();
    g.for_each_path(len, |w, sv, ev| {
        let out = table.lookup(&w[..span]).unwrap_or(0);
        let mut key = 0u128;
        let mut code = 0u128;
        for (i, &sym) in w.iter().enumerate() {
            code = code * s as u128 + sym as u128;
            if in_source[i] {
                key = key * s as u128 + sym as u128;
            }
        }
        entries.push((key, sv as u32, ev as u32, out, code));
    });
    entries.sort_unstable_by_key(|e| (e.0, e.1, e.2, e.3));
    entries.dedup_by_key(|e| (e.0, e.1, e.2, e.3));

    let mut start = 0;
    while start < entries.len() {
        let mut end = start + 1;
        while end < entries.len() && entries[end].0 == entries[start].0 {
            end += 1;
        }
        let group = &entries[start..end];
        if group.iter().any(|e| e.3 != group[0].3) {
            for (i, e1) in group.iter().enumerate() {
                for e2 in &group[i + 1..] {
                    if e1.3 == e2.3 {
                        continue;
                    }
                    let (s1, s2) = (e1.1 as usize, e2.1 as usize);
                    let (t1, t2) = (e1.2 as usize, e2.2 as usize);
                    if left.feasible(s1, s2, nv) && right.feasible(t1, t2, nv) {
                        let w1 = decode128(e1.4, len, s);
                        let w2 = decode128(e2.4, len, s);
                        return Ok(Some(assemble(spec, &left, &right, p0, (s1, s2), (t1, t2), w1, w2)));
                    }
                }
            }
        }
        start = end;
    }
    Ok(None)
}

fn decode128(mut code: u128, len: usize, s: usize) -> Vec<Symbol> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % s as u128) as Symbol;
        code /= s as u128;
    }
    out
}

/// Feasible pairs of start vertices at `p0` given the source positions left of `p0`.
fn left_extension(spec: &ShiftSpec, source: Region, p0: i64) -> Extension {
    let g = spec.graph();
    let n = g.vertex_count();
    let k = spec.step() as i64;
    let (first, init_diag) = match (source.lower(), source.upper()) {
        (Some(c), _) if c < p0 && source.upper().map_or(true, |d| d >= c) => (c, false),
        (None, Some(d)) => ((d - k + 1).min(p0), true),
        _ => return Extension { layers: Vec::new(), synced: Vec::new() },
    };
    let mut layer = vec![!init_diag; n * n];
    if init_diag {
        (0..n).for_each(|v| layer[v * n + v] = true);
    }
    let mut layers = vec![layer];
    let mut synced = Vec::new();
    for q in first + 1..=p0 {
        let sync = source.contains(q - 1);
        let prev = layers.last().unwrap();
        let mut cur = vec![false; n * n];
        for v1 in 0..n {
            for v2 in 0..n {
                cur[v1 * n + v2] = g.predecessors(v1).any(|(a1, u1)| {
                    g.predecessors(v2).any(|(a2, u2)| (!sync || a1 == a2) && prev[u1 * n + u2])
                });
            }
        }
        layers.push(cur);
        synced.push(sync);
    }
    Extension { layers, synced }
}

/// Feasible pairs of end vertices at `p1` given the source positions right of `p1`.
fn right_extension(spec: &ShiftSpec, source: Region, p1: i64) -> Extension {
    let g = spec.graph();
    let n = g.vertex_count();
    let k = spec.step() as i64;
    let (last, init_diag) = match (source.lower(), source.upper()) {
        (_, Some(d)) if d > p1 && source.lower().map_or(true, |c| c <= d) => (d, false),
        (Some(c), None) => ((c + k - 1).max(p1), true),
        _ => return Extension { layers: Vec::new(), synced: Vec::new() },
    };
    let mut layer = vec![!init_diag; n * n];
    if init_diag {
        (0..n).for_each(|v| layer[v * n + v] = true);
    }
    let mut layers = vec![layer];
    let mut synced = Vec::new();
    for q in (p1..last).rev() {
        let sync = source.contains(q + 1);
        let next = layers.last().unwrap();
        let mut cur = vec![false; n * n];
        for v1 in 0..n {
            for v2 in 0..n {
                cur[v1 * n + v2] = g
                    .successors(v1)
                    .any(|(a1, u1)| g.successors(v2).any(|(a2, u2)| (!sync || a1 == a2) && next[u1 * n + u2]));
            }
        }
        layers.push(cur);
        synced.push(sync);
    }
    Extension { layers, synced }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    spec: &ShiftSpec,
    left: &Extension,
    right: &Extension,
    p0: i64,
    starts: (usize, usize),
    ends: (usize, usize),
    w1: Vec<Symbol>,
    w2: Vec<Symbol>,
) -> CodingWitness {
    let g = spec.graph();
    let n = g.vertex_count();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let (mut v1, mut v2) = starts;
    for i in (0..left.synced.len()).rev() {
        let below = &left.layers[i];
        let sync = left.synced[i];
        let (a1, u1, a2, u2) = g
            .predecessors(v1)
            .flat_map(|(a1, u1)| g.predecessors(v2).map(move |(a2, u2)| (a1, u1, a2, u2)))
            .find(|&(a1, u1, a2, u2)| (!sync || a1 == a2) && below[u1 * n + u2])
            .expect("feasible layer has a predecessor");
        x.push(a1);
        y.push(a2);
        v1 = u1;
        v2 = u2;
    }
    x.reverse();
    y.reverse();
    let start = p0 - x.len() as i64;
    x.extend(w1);
    y.extend(w2);
    let (mut v1, mut v2) = ends;
    for i in (0..right.synced.len()).rev() {
        let beyond = &right.layers[i];
        let sync = right.synced[i];
        let (a1, u1, a2, u2) = g
            .successors(v1)
            .flat_map(|(a1, u1)| g.successors(v2).map(move |(a2, u2)| (a1, u1, a2, u2)))
            .find(|&(a1, u1, a2, u2)| (!sync || a1 == a2) && beyond[u1 * n + u2])
            .expect("feasible layer has a successor");
        x.push(a1);
        y.push(a2);
        v1 = u1;
        v2 = u2;
    }
    CodingWitness { start, x, y }
}

/// One row of a cone profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub n: usize,
    pub w_plus: i64,
    pub w_minus: i64,
    /// Cardinality of the cone interval `[-W+(n), -W-(n)]`.
    pub width: i64,
    pub r: Option<i64>,
    pub ell: Option<i64>,
    pub sym_len: Option<i64>,
}

/// Which optional quantities a profile computes.
#[derive(Clone, Copy, Debug, Default)]
pub struct ProfileOptions {
    pub with_r: bool,
    pub with_ell: bool,
    pub with_sym: bool,
}

impl ProfileOptions {
    pub fn all() -> ProfileOptions {
        ProfileOptions { with_r: true, with_ell: true, with_sym: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeProfile {
    pub levels: Vec<Level>,
    /// Largest n requested.
    pub requested: usize,
    /// Set when the budget ran out before `requested` was reached.
    pub exhausted: Option<String>,
}

impl ConeProfile {
    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Option<&Level> {
        self.levels.get(n.checked_sub(1)?)
    }

    pub fn w_plus(&self) -> Vec<i64> {
        self.levels.iter().map(|l| l.w_plus).collect()
    }

    pub fn w_minus(&self) -> Vec<i64> {
        self.levels.iter().map(|l| l.w_minus).collect()
    }

    /// The first `n` levels.
    pub fn truncated(&self, n: usize) -> ConeProfile {
        ConeProfile { levels: self.levels[..n.min(self.levels.len())].to_vec(), requested: n, exhausted: None }
    }
}

/// Coding queries with cached trimmed powers; products are answered factorwise.
pub struct Coder<'a> {
    system: &'a System,
    budget: Budget,
    powers: Vec<LocalRule>,
    parts: Vec<Coder<'a>>,
}

impl<'a> Coder<'a> {
    pub fn new(system: &'a System, budget: Budget) -> Coder<'a> {
        let parts = system.factors().iter().map(|f| Coder::new(f, budget)).collect();
        let powers = vec![LocalRule::identity(system.spec())];
        Coder { system, budget, powers, parts }
    }

    pub fn system(&self) -> &'a System {
        self.system
    }

    /// Coders of the factors; empty for plain systems.
    pub fn parts_mut(&mut self) -> &mut [Coder<'a>] {
        &mut self.parts
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    /// Trimmed local rule of the n-th iterate.
    pub fn power(&mut self, n: usize) -> Result<&LocalRule> {
        let spec = self.system.spec();
        while self.powers.len() <= n {
            self.budget.check_clock()?;
            let last = self.powers.last().unwrap();
            let next = LocalRule::compose(last, self.system.rule(), spec, self.budget.table_cap)?.trimmed(spec);
            self.powers.push(next);
        }
        Ok(&self.powers[n])
    }

    /// Window of the trimmed n-th iterate, computed factorwise for products.
    pub fn power_window(&mut self, n: usize) -> Result<(i64, i64)> {
        if self.parts.is_empty() {
            return Ok(self.power(n)?.window());
        }
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for p in &mut self.parts {
            let (a, b) = p.power_window(n)?;
            lo = lo.min(a);
            hi = hi.max(b);
        }
        Ok((lo, hi))
    }

    /// `Some(k)` when the m-th iterate equals the k-th shift power.
    pub fn shift_power_relation(&mut self, m: usize) -> Result<Option<i64>> {
        if self.parts.is_empty() {
            let spec = self.system.spec();
            return Ok(self.power(m)?.as_shift_power(spec));
        }
        let mut common = None;
        for p in &mut self.parts {
            match (p.shift_power_relation(m)?, common) {
                (None, _) => return Ok(None),
                (Some(k), None) => common = Some(k),
                (Some(k), Some(c)) if k != c => return Ok(None),
                _ => {}
            }
        }
        Ok(common)
    }

    /// Whether `source` determines cell `target` of the n-th image.
    pub fn codes(&mut self, n: usize, source: Region, target: i64) -> Result<CodingVerdict> {
        self.budget.check_clock()?;
        let witness = self.witness(n, source, target)?;
        Ok(CodingVerdict { level: n, source, target, codes: witness.is_none(), witness })
    }

    fn witness(&mut self, n: usize, source: Region, target: i64) -> Result<Option<CodingWitness>> {
        if self.parts.is_empty() {
            let spec = self.system.spec();
            let table = self.power(n)?.clone();
            return decide(&table, spec, source, target);
        }
        let system = self.system;
        for i in 0..self.parts.len() {
            if let Some(w) = self.parts[i].witness(n, source, target)? {
                let len = w.x.len();
                let mut xs: Vec<Vec<Symbol>> = system.factors().iter().map(|f| f.some_word(len)).collect();
                let mut ys = xs.clone();
                xs[i] = w.x;
                ys[i] = w.y;
                return Ok(Some(CodingWitness { start: w.start, x: system.join_words(&xs), y: system.join_words(&ys) }));
            }
        }
        Ok(None)
    }

    fn scan_limit(&mut self, n: usize) -> Result<i64> {
        let (a, b) = self.power_window(n)?;
        let v = self.system.spec().graph().vertex_count() as i64;
        Ok((b - a + 1) + 4 * v * v + 16)
    }

    /// Smallest W such that every cell of `[W, inf)` of the n-th image is determined by `[0, inf)`.
    pub fn w_plus(&mut self, n: usize) -> Result<i64> {
        if !self.parts.is_empty() {
            let mut best = i64::MIN;
            for p in &mut self.parts {
                best = best.max(p.w_plus(n)?);
            }
            return Ok(best);
        }
        let (a, _) = self.power(n)?.window();
        let limit = self.scan_limit(n)?;
        let mut t = -a - 1;
        for _ in 0..limit {
            if self.witness(n, Region::RayRight { from: 0 }, t)?.is_some() {
                return Ok(t + 1);
            }
            t -= 1;
        }
        Err(Error::BudgetExceeded(Resource::CodingScan))
    }

    /// Largest W such that every cell of `(-inf, W]` of the n-th image is determined by `(-inf, 0]`.
    pub fn w_minus(&mut self, n: usize) -> Result<i64> {
        if !self.parts.is_empty() {
            let mut best = i64::MAX;
            for p in &mut self.parts {
                best = best.min(p.w_minus(n)?);
            }
            return Ok(best);
        }
        let (_, b) = self.power(n)?.window();
        let limit = self.scan_limit(n)?;
        let mut t = -b + 1;
        for _ in 0..limit {
            if self.witness(n, Region::RayLeft { to: 0 }, t)?.is_some() {
                return Ok(t - 1);
            }
            t += 1;
        }
        Err(Error::BudgetExceeded(Resource::CodingScan))
    }

    /// The cone interval `[-W+(n), -W-(n)]` of cells feeding cell 0 after n steps.
    pub fn cone_interval(&mut self, n: usize) -> Result<(i64, i64)> {
        Ok((-self.w_plus(n)?, -self.w_minus(n)?))
    }

    fn smallest_coding_interval(&mut self, n: usize, must: (i64, i64)) -> Result<(i64, i64)> {
        let (a, b) = self.power_window(n)?;
        let widest = b.max(must.1) - a.min(must.0) + 1;
        let base = must.1 - must.0 + 1;
        for width in base..=widest {
            let slack = width - base;
            for c in must.0 - slack..=must.0 {
                if self.witness(n, Region::interval(c, c + width - 1), 0)?.is_none() {
                    return Ok((c, c + width - 1));
                }
            }
        }
        Err(Error::InvariantViolated(format!("no interval codes cell 0 at level {n}")))
    }

    /// Leftmost smallest interval containing the cone interval that codes cell 0.
    pub fn min_coding_interval(&mut self, n: usize) -> Result<(i64, i64)> {
        let cone = self.cone_interval(n)?;
        self.smallest_coding_interval(n, cone)
    }

    /// Size of the smallest interval containing 0 and the cone interval that codes cell 0.
    pub fn ell(&mut self, n: usize) -> Result<i64> {
        let (lo, hi) = self.cone_interval(n)?;
        let (c, d) = self.smallest_coding_interval(n, (lo.min(0), hi.max(0)))?;
        Ok(d - c + 1)
    }

    /// Size of the smallest symmetric interval `[-h, h]` that codes cell 0.
    pub fn sym_len(&mut self, n: usize) -> Result<i64> {
        let (a, b) = self.power_window(n)?;
        let bound = a.abs().max(b.abs());
        for h in 0..=bound {
            if self.witness(n, Region::interval(-h, h), 0)?.is_none() {
                return Ok(2 * h + 1);
            }
        }
        Err(Error::InvariantViolated(format!("no symmetric interval codes cell 0 at level {n}")))
    }

    /// Whether the cone interval itself codes cell 0.
    pub fn verify_level_coding(&mut self, n: usize) -> Result<bool> {
        let (lo, hi) = self.cone_interval(n)?;
        Ok(self.witness(n, Region::interval(lo, hi), 0)?.is_none())
    }

    /// W+, W- and the requested extras for n = 1..=n_max. Stops early when the budget runs out.
    pub fn profile(&mut self, n_max: usize, opts: ProfileOptions) -> Result<ConeProfile> {
        let mut levels: Vec<Level> = Vec::new();
        let mut exhausted = None;
        for n in 1..=n_max {
            match self.level(n, opts) {
                Ok(level) => {
                    check_subadditive(&levels, &level)?;
                    levels.push(level);
                }
                Err(Error::BudgetExceeded(r)) => {
                    exhausted = Some(r.to_string());
                    break;
                }
                Err(Error::TableBlowup { .. }) => {
                    exhausted = Some(Resource::TableEntries.to_string());
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(ConeProfile { levels, requested: n_max, exhausted })
    }

    fn level(&mut self, n: usize, opts: ProfileOptions) -> Result<Level> {
        let w_plus = self.w_plus(n)?;
        let w_minus = self.w_minus(n)?;
        let r = if opts.with_r {
            let (c, d) = self.min_coding_interval(n)?;
            Some(d - c + 1)
        } else {
            None
        };
        let ell = if opts.with_ell { Some(self.ell(n)?) } else { None };
        let sym_len = if opts.with_sym { Some(self.sym_len(n)?) } else { None };
        Ok(Level { n, w_plus, w_minus, width: w_plus - w_minus + 1, r, ell, sym_len })
    }
}

fn check_subadditive(levels: &[Level], level: &Level) -> Result<()> {
    let n = level.n;
    if level.w_minus > level.w_plus {
        return Err(Error::InvariantViolated(format!("W-({n}) > W+({n})")));
    }
    for a in 1..n {
        let (la, lb) = (&levels[a - 1], &levels[n - a - 1]);
        if level.w_plus > la.w_plus + lb.w_plus || level.w_minus < la.w_minus + lb.w_minus {
            return Err(Error::InvariantViolated(format!("subadditivity fails at {a} + {}", n - a)));
        }
    }
    Ok(())
}

/// Convenience wrapper computing `W+(n)` with the default budget.
pub fn w_plus(system: &System, n: usize) -> Result<i64> {
    Coder::new(system, Budget::default()).w_plus(n)
}

/// Convenience wrapper computing `W-(n)` with the default budget.
pub fn w_minus(system: &System, n: usize) -> Result<i64> {
    Coder::new(system, Budget::default()).w_minus(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::LocalRule;

    fn sys(spec: ShiftSpec, f: impl Fn(&ShiftSpec) -> LocalRule) -> System {
        let r = f(&spec);
        System::new(spec, r).unwrap()
    }

    #[test]
    fn shift_powers_have_linear_cones() {
        for k in [-2i64, -1, 1, 2, 3] {
            let s = sys(ShiftSpec::full(2).unwrap(), |sp| LocalRule::shift_power(sp, k));
            let mut c = Coder::new(&s, Budget::default());
            for n in 1..=5 {
                assert_eq!(c.w_plus(n).unwrap(), k * n as i64, "k={k} n={n}");
                assert_eq!(c.w_minus(n).unwrap(), k * n as i64, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn rule_90_cone() {
        let s = sys(ShiftSpec::full(2).unwrap(), |sp| LocalRule::elementary(sp, 90).unwrap());
        let mut c = Coder::new(&s, Budget::default());
        for n in 1..=4 {
            assert_eq!(c.w_plus(n).unwrap(), n as i64);
            assert_eq!(c.w_minus(n).unwrap(), -(n as i64));
        }
    }

    #[test]
    fn witnesses_replay() {
        let s = sys(ShiftSpec::full(2).unwrap(), |sp| LocalRule::elementary(sp, 30).unwrap());
        let mut c = Coder::new(&s, Budget::default());
        let src = Region::RayRight { from: 0 };
        for t in -4..3 {
            let v = c.codes(2, src, t).unwrap();
            if let Some(w) = &v.witness {
                let table = c.power(2).unwrap().clone();
                assert!(replay_witness(&table, s.spec(), src, t, w));
            }
        }
    }

    #[test]
    fn golden_mean_shift_cone() {
        let s = sys(ShiftSpec::golden_mean(), |sp| LocalRule::shift_power(sp, 1));
        let mut c = Coder::new(&s, Budget::default());
        for n in 1..=4 {
            assert_eq!(c.w_plus(n).unwrap(), n as i64);
            assert_eq!(c.w_minus(n).unwrap(), n as i64);
            assert!(c.verify_level_coding(n).unwrap());
        }
    }

    #[test]
    fn identity_intervals() {
        let s = sys(ShiftSpec::full(3).unwrap(), LocalRule::identity);
        let mut c = Coder::new(&s, Budget::default());
        let p = c.profile(3, ProfileOptions::all()).unwrap();
        for l in &p.levels {
            assert_eq!((l.w_plus, l.w_minus, l.r, l.ell, l.sym_len), (0, 0, Some(1), Some(1), Some(1)));
        }
    }
}
