//! Spacetime rectangles, their pattern counts and the entropy bound.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{to_f64, Rational};
use crate::coding::{Coder, CodingWitness, Region};
use crate::error::{Error, Resource, Result};
use crate::shift::{word_space, ShiftSpec, Symbol};
use crate::system::System;

/// Rows `base_row, base_row + 1, ...` of a spacetime diagram grown from one finite word.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpacetimeRect {
    pub base_row: i64,
    /// First column of each row.
    pub starts: Vec<i64>,
    pub rows: Vec<Vec<Symbol>>,
}

impl SpacetimeRect {
    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn cell(&self, i: i64, j: i64) -> Option<Symbol> {
        let t = usize::try_from(j - self.base_row).ok()?;
        let row = self.rows.get(t)?;
        let k = usize::try_from(i - self.starts[t]).ok()?;
        row.get(k).copied()
    }

    /// Columns present in every row.
    pub fn common_columns(&self) -> Option<(i64, i64)> {
        let lo = *self.starts.iter().max()?;
        let hi = self.starts.iter().zip(&self.rows).map(|(s, r)| s + r.len() as i64 - 1).min()?;
        (lo <= hi).then_some((lo, hi))
    }
}

/// Grows `n` rows from `base`, whose first symbol sits at column `start`.
pub fn generate_rect(system: &System, base: &[Symbol], start: i64, base_row: i64, n: usize) -> Result<SpacetimeRect> {
    let rule = system.rule();
    let need = (n.max(1) - 1) * (rule.span() - 1) + 1;
    if base.len() < need {
        return Err(Error::BaseTooShort { got: base.len(), rows: n, need });
    }
    if !system.spec().is_allowed(base) {
        return Err(Error::IllegalWord { word: base.to_vec() });
    }
    Ok(grow(system, base, start, base_row, n))
}

/// [`generate_rect`] without the length and language checks.
pub(crate) fn grow(system: &System, base: &[Symbol], start: i64, base_row: i64, n: usize) -> SpacetimeRect {
    let rule = system.rule();
    let (lo, _) = rule.window();
    let mut rows = vec![base.to_vec()];
    let mut starts = vec![start];
    while rows.len() < n {
        let next = rule.apply_unchecked(rows.last().unwrap());
        if next.is_empty() {
            break;
        }
        starts.push(starts.last().unwrap() - lo);
        rows.push(next);
    }
    SpacetimeRect { base_row, starts, rows }
}

/// Number of distinct patterns on the m by n rectangle `[0, m) x [0, n)`.
pub fn rect_complexity(coder: &mut Coder, m: usize, n: usize) -> Result<u128> {
    if coder.system().is_product() {
        let mut total: u128 = 1;
        for part in coder.parts_mut() {
            total = total.saturating_mul(rect_complexity(part, m, n)?);
        }
        return Ok(total);
    }
    let tables: Vec<_> = (0..n).map(|j| coder.power(j).cloned()).collect::<Result<_>>()?;
    let lo = tables.iter().map(|t| t.window().0).min().unwrap();
    let hi = tables.iter().map(|t| t.window().1).max().unwrap() + m as i64 - 1;
    let span = (hi - lo + 1) as usize;
    let spec = coder.system().spec();
    let s = spec.alphabet();
    if word_space(s, span) > coder.budget().table_cap {
        return Err(Error::BudgetExceeded(Resource::TableEntries));
    }
    coder.budget().check_clock()?;
    let mut words: Vec<Symbol> = Vec::new();
    spec.for_each_word(span, |w| words.extend_from_slice(w));
    let patterns: HashSet<Vec<Symbol>> = words
        .par_chunks(span)
        .map(|w| {
            let mut key = Vec::with_capacity(m * n);
            for t in &tables {
                let (a, _) = t.window();
                let off = (a - lo) as usize;
                for i in 0..m {
                    key.push(t.lookup(&w[off + i..off + i + t.span()]).unwrap_or(0));
                }
            }
            key
        })
        .collect();
    Ok(patterns.len() as u128)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyCell {
    pub m: usize,
    pub n: usize,
    pub log_count: f64,
    /// `log P(R_{m,n}) / n`.
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyGrid {
    pub cells: Vec<EntropyCell>,
    /// Largest computed cell, used as the working estimate.
    pub working: Option<(usize, usize)>,
    /// Estimates are nondecreasing in m for every fixed n.
    pub monotone_in_m: bool,
    pub exhausted: Option<String>,
}

impl EntropyGrid {
    pub fn cell(&self, m: usize, n: usize) -> Option<&EntropyCell> {
        self.cells.iter().find(|c| c.m == m && c.n == n)
    }
}

fn log_count(coder: &mut Coder, m: usize, n: usize) -> Result<f64> {
    if coder.system().is_product() {
        let mut total = 0.0;
        for part in coder.parts_mut() {
            total += log_count(part, m, n)?;
        }
        return Ok(total);
    }
    Ok((rect_complexity(coder, m, n)? as f64).ln())
}

/// Rectangle entropy estimates over a grid of widths and heights.
pub fn phi_entropy(coder: &mut Coder, ms: &[usize], ns: &[usize]) -> Result<EntropyGrid> {
    let mut cells = Vec::new();
    let mut exhausted = None;
    'outer: for &n in ns {
        for &m in ms {
            match log_count(coder, m, n) {
                Ok(log) => cells.push(EntropyCell { m, n, log_count: log, estimate: log / n as f64 }),
                Err(Error::BudgetExceeded(r)) => {
                    exhausted = Some(r.to_string());
                    break 'outer;
                }
                Err(e) => return Err(e),
            }
        }
    }
    let working = cells.iter().max_by_key(|c| (c.m * c.n, c.n)).map(|c| (c.m, c.n));
    let monotone_in_m = ns.iter().all(|&n| {
        let row: Vec<f64> = cells.iter().filter(|c| c.n == n).map(|c| c.estimate).collect();
        row.windows(2).all(|w| w[0] <= w[1] + 1e-12)
    });
    Ok(EntropyGrid { cells, working, monotone_in_m, exhausted })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityRow {
    pub m: usize,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyInequality {
    pub spread_upper: f64,
    pub shift_entropy: f64,
    pub rows: Vec<InequalityRow>,
}

impl EntropyInequality {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Checks `log P(R_{m,n}) / n <= (A + m/n) h + slack` cell by cell.
pub fn check_entropy_inequality(grid: &EntropyGrid, spread_upper: Rational, shift_entropy: f64, slack: f64) -> EntropyInequality {
    let a = to_f64(&spread_upper);
    let rows = grid
        .cells
        .iter()
        .map(|c| {
            let rhs = (a + c.m as f64 / c.n as f64) * shift_entropy;
            InequalityRow { m: c.m, n: c.n, lhs: c.estimate, rhs, holds: c.estimate <= rhs + slack }
        })
        .collect();
    EntropyInequality { spread_upper: a, shift_entropy, rows }
}

/// A pair of base rows agreeing on a ray whose n-th images differ just outside the cone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeWitness {
    pub n: usize,
    pub side: &'static str,
    /// Differing cell `(i, n)` of the spacetime diagram.
    pub cell: (i64, i64),
    pub witness: CodingWitness,
    pub replayed: bool,
}

/// Witnesses at both cone edges for n = 1..=n_max, each replayed against the definition.
pub fn edge_witnesses(coder: &mut Coder, n_max: usize) -> Result<Vec<EdgeWitness>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        let wp = coder.w_plus(n)?;
        let wm = coder.w_minus(n)?;
        for (side, source, target) in
            [("right", Region::RayRight { from: 0 }, wp - 1), ("left", Region::RayLeft { to: 0 }, wm + 1)]
        {
            let verdict = coder.codes(n, source, target)?;
            let witness = verdict.witness.ok_or_else(|| {
                Error::InvariantViolated(format!("cell {target} is coded at level {n} on the {side} edge"))
            })?;
            let replayed = replay_edge(coder.system(), n, source, target, &witness);
            out.push(EdgeWitness { n, side, cell: (target, n as i64), witness, replayed });
        }
    }
    Ok(out)
}

/// Extends an allowed word of length at least the step by `left` and `right` symbols along the first edges of the transition graph.
pub(crate) fn extend_word(spec: &ShiftSpec, word: &[Symbol], left: usize, right: usize) -> Vec<Symbol> {
    let g = spec.graph();
    let k = g.step();
    let mut out = word.to_vec();
    let mut at = g.vertex_index(&out[out.len() - k..]).expect("allowed word");
    for _ in 0..right {
        let (a, t) = g.successors(at).next().expect("essential graph");
        out.push(a);
        at = t;
    }
    let mut pre = Vec::with_capacity(left + out.len());
    let mut at = g.vertex_index(&out[..k]).expect("allowed word");
    for _ in 0..left {
        let (a, t) = g.predecessors(at).next().expect("essential graph");
        pre.push(a);
        at = t;
    }
    pre.reverse();
    pre.extend_from_slice(&out);
    pre
}

/// Replays a witness by growing rows with the one-step rule after extending both
/// words identically far enough for the target to be computed.
fn replay_edge(system: &System, n: usize, source: Region, target: i64, w: &CodingWitness) -> bool {
    let spec = system.spec();
    if !spec.is_allowed(&w.x) || !spec.is_allowed(&w.y) || w.x.len() != w.y.len() || w.x.len() < spec.step() {
        return false;
    }
    let agree = (0..w.x.len()).all(|i| !source.contains(w.start + i as i64) || w.x[i] == w.y[i]);
    let end = w.start + w.x.len() as i64 - 1;
    let reach = n as i64 * system.rule().range().max(0);
    let left = (reach + (w.start - target).max(0)) as usize;
    let right = (reach + (target - end).max(0)) as usize;
    let (x, y) = (extend_word(spec, &w.x, left, right), extend_word(spec, &w.y, left, right));
    let start = w.start - left as i64;
    let a = grow(system, &x, start, 0, n + 1);
    let b = grow(system, &y, start, 0, n + 1);
    let (ca, cb) = (a.cell(target, n as i64), b.cell(target, n as i64));
    agree && ca.is_some() && cb.is_some() && ca != cb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::LocalRule;
    use crate::shift::ShiftSpec;
    use crate::system::Budget;

    fn full2(f: impl Fn(&ShiftSpec) -> LocalRule) -> System {
        let s = ShiftSpec::full(2).unwrap();
        let r = f(&s);
        System::new(s, r).unwrap()
    }

    #[test]
    fn shift_rectangles_count_their_base() {
        let s = full2(|sp| LocalRule::shift_power(sp, 1));
        let mut c = Coder::new(&s, Budget::default());
        for m in 1..=4 {
            for n in 1..=4 {
                assert_eq!(rect_complexity(&mut c, m, n).unwrap(), 1 << (m + n - 1));
            }
        }
    }

    #[test]
    fn identity_rectangles() {
        let s = full2(LocalRule::identity);
        let mut c = Coder::new(&s, Budget::default());
        assert_eq!(rect_complexity(&mut c, 3, 5).unwrap(), 8);
    }

    #[test]
    fn generated_rows_follow_the_rule() {
        let s = full2(|sp| LocalRule::elementary(sp, 90).unwrap());
        let base = vec![0, 1, 1, 0, 1, 0, 0, 1, 1];
        let rect = generate_rect(&s, &base, -4, 0, 4).unwrap();
        assert_eq!(rect.height(), 4);
        for j in 0..3 {
            for i in -2..=2 {
                if let (Some(a), Some(b), Some(c)) = (rect.cell(i - 1, j), rect.cell(i + 1, j), rect.cell(i, j + 1)) {
                    assert_eq!(c, a ^ b);
                }
            }
        }
        assert!(matches!(generate_rect(&s, &base[..3], 0, 0, 4), Err(Error::BaseTooShort { .. })));
    }

    #[test]
    fn edge_witnesses_replay() {
        let s = full2(|sp| LocalRule::elementary(sp, 30).unwrap());
        let mut c = Coder::new(&s, Budget::default());
        let ws = edge_witnesses(&mut c, 3).unwrap();
        assert_eq!(ws.len(), 6);
        assert!(ws.iter().all(|w| w.replayed));
    }
}
