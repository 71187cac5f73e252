//! Directional expansiveness probes on the spacetime of an endomorphism.
//!
//! A direction `v = (dx, dy)` orients the line through it; the depth of a cell
//! `(i, j)` is `dx * j - dy * i`, positive on the positive side of the line.

use std::collections::HashMap;

use serde::Serialize;

use crate::coding::{Coder, Region};
use crate::error::{Error, Result};
use crate::rule::{check_injective, InjectivityWitness};
use crate::shift::{word_space, Symbol};
use crate::spacetime::{extend_word, grow};
use crate::system::System;

/// Oriented primitive direction vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Direction {
    pub dx: i64,
    pub dy: i64,
}

impl Direction {
    /// The line `i = (p/q) j` with orientation `sign * (p, q)`.
    pub fn from_slope(p: i64, q: i64, sign: i64) -> Result<Direction> {
        if q < 0 || (p == 0 && q == 0) || sign.abs() != 1 {
            return Err(Error::BadParams(format!("bad slope {p}/{q} with orientation {sign}")));
        }
        let g = gcd(p.abs(), q);
        Ok(Direction { dx: sign * p / g, dy: sign * q / g })
    }

    /// The time axis `j = 0`, oriented towards `sign * (1, 0)`.
    pub fn horizontal(sign: i64) -> Direction {
        Direction { dx: sign.signum(), dy: 0 }
    }

    #[inline]
    pub fn depth(&self, i: i64, j: i64) -> i64 {
        self.dx * j - self.dy * i
    }

    /// Largest integer depth inside the strip of radius r.
    pub fn strip_depth(&self, r: i64) -> i64 {
        let bound = r * r * (self.dx * self.dx + self.dy * self.dy);
        let mut d = (bound as f64).sqrt() as i64 + 1;
        while d * d > bound {
            d -= 1;
        }
        d
    }

    pub fn label(&self) -> String {
        format!("({}, {})", self.dx, self.dy)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A finite set `F` whose cells other than `e = (0, 0)` all have smaller depth and determine `e`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub cells: Vec<(i64, i64)>,
    pub base_span: usize,
    pub patterns_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    /// Base rows agreeing on a ray, grown over rows `base_row..=base_row + 2n`.
    Coding,
    /// Distinct periodic points with equal images placed just below the strip.
    Injectivity,
}

/// Two spacetime patches agreeing on every computed cell of depth at most the strip depth
/// and differing at `e`, which lies beyond the strip.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub kind: EvidenceKind,
    pub base_row: i64,
    pub start: i64,
    pub rows: usize,
    pub x: Vec<Symbol>,
    pub y: Vec<Symbol>,
    pub e: (i64, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusVerdict {
    Certified,
    Evidence,
    Undecided,
    /// Both a certificate and evidence; indicates an engine defect.
    Conflict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusResult {
    pub r: i64,
    pub verdict: RadiusVerdict,
    pub certificate: Option<Certificate>,
    pub evidence: Option<Evidence>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    /// Some certificate proves positive expansiveness.
    PositivelyExpansive,
    /// Replayable evidence at every probed radius.
    NotPositivelyExpansive,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionProbe {
    pub direction: Direction,
    pub radii: Vec<RadiusResult>,
    pub verdict: ProbeVerdict,
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeOptions {
    pub r_max: i64,
    /// Rows replayed on each side of the row containing `e`.
    pub depth: usize,
    /// How far beyond the strip `e` may sit.
    pub slack: i64,
    /// Largest number of base words enumerated per certificate candidate.
    pub cert_cap: u128,
}

impl Default for ProbeOptions {
    fn default() -> ProbeOptions {
        ProbeOptions { r_max: 4, depth: 4, slack: 2, cert_cap: 1 << 20 }
    }
}

/// Certificate and evidence search at radii `1..=r_max`.
pub fn probe_direction(coder: &mut Coder, direction: Direction, opts: ProbeOptions) -> Result<DirectionProbe> {
    let mut radii = Vec::new();
    for r in 1..=opts.r_max {
        coder.budget().check_clock()?;
        let certificate = find_certificate(coder, direction, r, opts)?;
        let evidence = find_evidence(coder, direction, r, opts)?;
        let verdict = match (&certificate, &evidence) {
            (Some(_), Some(_)) => RadiusVerdict::Conflict,
            (Some(_), None) => RadiusVerdict::Certified,
            (None, Some(_)) => RadiusVerdict::Evidence,
            (None, None) => RadiusVerdict::Undecided,
        };
        radii.push(RadiusResult { r, verdict, certificate, evidence });
    }
    let verdict = if radii.iter().any(|r| r.verdict == RadiusVerdict::Certified) {
        ProbeVerdict::PositivelyExpansive
    } else if !radii.is_empty() && radii.iter().all(|r| r.verdict == RadiusVerdict::Evidence) {
        ProbeVerdict::NotPositivelyExpansive
    } else {
        ProbeVerdict::Undecided
    };
    Ok(DirectionProbe { direction, radii, verdict })
}

/// Exhaustive search over boxes of height at most `2 max(|dy|, 1) r` around `e = (0, 0)`.
pub fn find_certificate(coder: &mut Coder, v: Direction, r: i64, opts: ProbeOptions) -> Result<Option<Certificate>> {
    let range = coder.system().rule().range().max(1);
    let max_height = 2 * v.dy.abs().max(1) * r;
    for height in 1..=max_height {
        for down in 0..=height {
            let up = height - down;
            for w in 0..=range * (height + 1) {
                match check_box(coder, v, down, up, w, opts.cert_cap)? {
                    BoxOutcome::Determined(c) => return Ok(Some(c)),
                    BoxOutcome::TooLarge => break,
                    BoxOutcome::Ambiguous => {}
                }
            }
        }
    }
    Ok(None)
}

enum BoxOutcome {
    Determined(Certificate),
    Ambiguous,
    TooLarge,
}

fn check_box(coder: &mut Coder, v: Direction, down: i64, up: i64, w: i64, cap: u128) -> Result<BoxOutcome> {
    let cells: Vec<(i64, i64)> = (-down..=up)
        .flat_map(|j| (-w..=w).map(move |i| (i, j)))
        .filter(|&(i, j)| v.depth(i, j) < 0)
        .collect();
    if cells.is_empty() {
        return Ok(BoxOutcome::Ambiguous);
    }
    let rows = (down + up + 1) as usize;
    let mut tables = Vec::with_capacity(rows);
    for t in 0..rows {
        match coder.power(t) {
            Ok(p) => tables.push(p.clone()),
            Err(Error::TableBlowup { .. }) => return Ok(BoxOutcome::TooLarge),
            Err(e) => return Err(e),
        }
    }
    let needed: Vec<(i64, usize)> = cells.iter().chain([&(0, 0)]).map(|&(i, j)| (i, (j + down) as usize)).collect();
    let lo = needed.iter().map(|&(i, t)| i + tables[t].window().0).min().unwrap();
    let hi = needed.iter().map(|&(i, t)| i + tables[t].window().1).max().unwrap();
    let span = (hi - lo + 1) as usize;
    let spec = coder.system().spec();
    if word_space(spec.alphabet(), span) > cap {
        return Ok(BoxOutcome::TooLarge);
    }
    let mut seen: HashMap<Vec<Symbol>, Symbol> = HashMap::new();
    let mut ambiguous = false;
    let mut count = 0usize;
    let value = |w: &[Symbol], i: i64, t: usize| {
        let tab = &tables[t];
        let off = (i + tab.window().0 - lo) as usize;
        tab.lookup(&w[off..off + tab.span()]).unwrap_or(0)
    };
    spec.for_each_word(span, |w| {
        if ambiguous {
            return;
        }
        count += 1;
        let key: Vec<Symbol> = needed[..needed.len() - 1].iter().map(|&(i, t)| value(w, i, t)).collect();
        let (ei, et) = needed[needed.len() - 1];
        let e = value(w, ei, et);
        if *seen.entry(key).or_insert(e) != e {
            ambiguous = true;
        }
    });
    if ambiguous {
        return Ok(BoxOutcome::Ambiguous);
    }
    let mut all = cells;
    all.push((0, 0));
    Ok(BoxOutcome::Determined(Certificate { cells: all, base_span: span, patterns_checked: count }))
}

/// Searches for a pair agreeing on every computed cell of depth at most the strip depth.
pub fn find_evidence(coder: &mut Coder, v: Direction, r: i64, opts: ProbeOptions) -> Result<Option<Evidence>> {
    if v.dy == 0 {
        return if v.dx < 0 { Ok(injectivity_evidence(coder.system(), v, r)) } else { Ok(None) };
    }
    let n = opts.depth;
    let d = v.strip_depth(r);
    // Left boundary of the agreement region on row j for dy > 0, right boundary for dy < 0.
    let boundary = |j: i64| -> i64 {
        if v.dy > 0 {
            (v.dx * j - d).div_euclid(v.dy) + i64::from((v.dx * j - d).rem_euclid(v.dy) != 0)
        } else {
            (d - v.dx * j).div_euclid(-v.dy)
        }
    };
    let cone = if v.dy > 0 { coder.w_plus(n)? } else { coder.w_minus(n)? };
    for s in 0..=opts.slack {
        let (source, target) = if v.dy > 0 {
            let ex = boundary(0) - 1 - s;
            (Region::RayRight { from: ex + 1 - cone }, ex)
        } else {
            let ex = boundary(0) + 1 + s;
            (Region::RayLeft { to: ex - 1 - cone }, ex)
        };
        let verdict = coder.codes(n, source, target)?;
        let Some(w) = verdict.witness else { continue };
        let ev = extend_and_replay(coder.system(), v, d, n, source, &w.x, &w.y, w.start, (target, 0));
        if ev.is_some() {
            return Ok(ev);
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn extend_and_replay(
    system: &System,
    v: Direction,
    d: i64,
    n: usize,
    source: Region,
    x: &[Symbol],
    y: &[Symbol],
    start: i64,
    e: (i64, i64),
) -> Option<Evidence> {
    let margin = 2 * n * system.rule().range().max(1) as usize + 2;
    if x.len() < system.spec().step() {
        return None;
    }
    let (xe, ye) = (extend_word(system.spec(), x, margin, margin), extend_word(system.spec(), y, margin, margin));
    let start = start - margin as i64;
    let base_row = -(n as i64);
    if !(0..xe.len()).all(|i| !source.contains(start + i as i64) || xe[i] == ye[i]) {
        return None;
    }
    let evidence = Evidence { kind: EvidenceKind::Coding, base_row, start, rows: 2 * n + 1, x: xe, y: ye, e };
    replay_evidence(system, v, d, &evidence).then_some(evidence)
}

/// Regrows both patches and checks agreement up to depth `d` and the difference at `e`.
pub fn replay_evidence(system: &System, v: Direction, d: i64, ev: &Evidence) -> bool {
    let spec = system.spec();
    if v.depth(ev.e.0, ev.e.1) <= d {
        return false;
    }
    match ev.kind {
        EvidenceKind::Coding => {
            if !spec.is_allowed(&ev.x) || !spec.is_allowed(&ev.y) {
                return false;
            }
            let a = grow(system, &ev.x, ev.start, ev.base_row, ev.rows);
            let b = grow(system, &ev.y, ev.start, ev.base_row, ev.rows);
            for t in 0..a.height() {
                let j = ev.base_row + t as i64;
                let (s, len) = (a.starts[t], a.rows[t].len() as i64);
                for i in s..s + len {
                    if v.depth(i, j) <= d && a.cell(i, j) != b.cell(i, j) {
                        return false;
                    }
                }
            }
            let (ca, cb) = (a.cell(ev.e.0, ev.e.1), b.cell(ev.e.0, ev.e.1));
            ca.is_some() && cb.is_some() && ca != cb
        }
        EvidenceKind::Injectivity => {
            let rule = system.rule();
            ev.x.len() == ev.y.len()
                && ev.x != ev.y
                && rule.apply_periodic(&ev.x) == rule.apply_periodic(&ev.y)
                && ev.x[ev.e.0.rem_euclid(ev.x.len() as i64) as usize]
                    != ev.y[ev.e.0.rem_euclid(ev.y.len() as i64) as usize]
        }
    }
}

/// For the backward time axis: two points with equal images, placed on the row just past the strip.
fn injectivity_evidence(system: &System, v: Direction, r: i64) -> Option<Evidence> {
    let rep = check_injective(system.rule(), system.spec());
    let Some(InjectivityWitness::Periodic { x, y }) = rep.witness else { return None };
    let d = v.strip_depth(r);
    // depth = -j for v = (-1, 0); the pair sits on row -(d + 1), its image row and all later rows agree.
    let row = -(d + 1);
    let col = (0..x.len()).find(|&i| x[i] != y[i])? as i64;
    let ev = Evidence { kind: EvidenceKind::Injectivity, base_row: row, start: 0, rows: 1, x, y, e: (col, row) };
    replay_evidence(system, v, d, &ev).then_some(ev)
}

/// Checks the three-dot relation on a grown patch of the `x[i] + x[i+1]` rule.
pub fn three_dot_relation_holds(system: &System, base: &[Symbol], rows: usize) -> bool {
    let rect = grow(system, base, 0, 0, rows);
    for t in 0..rect.height().saturating_sub(1) {
        let j = t as i64;
        let s = rect.starts[t];
        for i in s..s + rect.rows[t].len() as i64 {
            if let (Some(a), Some(b), Some(c)) = (rect.cell(i, j), rect.cell(i + 1, j), rect.cell(i, j + 1)) {
                if (a + b + c) % 2 != 0 {
                    return false;
                }
            }
        }
    }
    true
}

/// Probes both orientations of a list of directions given as `(p, q)` slopes.
pub fn probe_slopes(coder: &mut Coder, slopes: &[(i64, i64)], opts: ProbeOptions) -> Result<Vec<DirectionProbe>> {
    let mut out = Vec::new();
    for &(p, q) in slopes {
        for sign in [1, -1] {
            let v = if q == 0 { Direction::horizontal(sign) } else { Direction::from_slope(p, q, sign)? };
            out.push(probe_direction(coder, v, opts)?);
        }
    }
    Ok(out)
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
    fn depth_and_strip() {
        let v = Direction::from_slope(2, 1, 1).unwrap();
        assert_eq!((v.dx, v.dy), (2, 1));
        assert_eq!(v.depth(-1, -1), -1);
        assert_eq!(v.strip_depth(1), 2);
        assert_eq!(v.strip_depth(2), 4);
        assert_eq!(Direction::from_slope(-4, 2, -1).unwrap(), Direction { dx: 2, dy: -1 });
    }

    #[test]
    fn shift_edge_is_not_expansive() {
        let s = full2(|sp| LocalRule::shift_power(sp, 1));
        let mut c = Coder::new(&s, Budget::default());
        let opts = ProbeOptions { r_max: 2, ..ProbeOptions::default() };
        let p = probe_direction(&mut c, Direction::from_slope(1, 1, 1).unwrap(), opts).unwrap();
        assert_eq!(p.verdict, ProbeVerdict::NotPositivelyExpansive);
        let p = probe_direction(&mut c, Direction::from_slope(2, 1, 1).unwrap(), opts).unwrap();
        assert_eq!(p.verdict, ProbeVerdict::PositivelyExpansive);
    }

    #[test]
    fn forward_time_axis_is_certified() {
        let s = full2(|sp| LocalRule::elementary(sp, 30).unwrap());
        let mut c = Coder::new(&s, Budget::default());
        let opts = ProbeOptions { r_max: 1, ..ProbeOptions::default() };
        let p = probe_direction(&mut c, Direction::horizontal(1), opts).unwrap();
        assert_eq!(p.verdict, ProbeVerdict::PositivelyExpansive);
    }

    #[test]
    fn three_dot_relation() {
        let s = full2(|sp| LocalRule::ledrappier(sp).unwrap());
        assert!(three_dot_relation_holds(&s, &[0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 1], 8));
    }
}
