//! An endomorphism together with its shift, optionally split into independent factors.

use std::time::{Duration, Instant};

use crate::error::{Error, Resource, Result};
use crate::rule::{LocalRule, DEFAULT_TABLE_CAP};
use crate::shift::{ShiftSpec, Symbol};

/// Resource limits shared by the bounded computations.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub table_cap: u128,
    pub state_cap: usize,
    pub deadline: Option<Instant>,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { table_cap: DEFAULT_TABLE_CAP, state_cap: 1 << 18, deadline: None }
    }
}

impl Budget {
    pub fn with_wall_clock(mut self, limit: Duration) -> Budget {
        self.deadline = Some(Instant::now() + limit);
        self
    }

    pub fn check_clock(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(Error::BudgetExceeded(Resource::WallClock)),
            _ => Ok(()),
        }
    }
}

/// A rule on a shift. Product systems also keep their factors, which act on
/// independent digits of the symbol (factor 0 is the least significant digit).
#[derive(Clone, Debug)]
pub struct System {
    spec: ShiftSpec,
    rule: LocalRule,
    factors: Vec<System>,
}

impl System {
    /// Pairs a rule with its shift after checking that it maps into the shift.
    pub fn new(spec: ShiftSpec, rule: LocalRule) -> Result<System> {
        if rule.alphabet() != spec.alphabet() {
            return Err(Error::BadParams("rule and shift alphabets differ".into()));
        }
        rule.check_into(&spec)?;
        Ok(System { spec, rule, factors: Vec::new() })
    }

    /// Direct product of systems on full shifts.
    pub fn product(factors: Vec<System>) -> Result<System> {
        if factors.len() < 2 {
            return Err(Error::BadParams("a product needs at least two factors".into()));
        }
        if factors.iter().any(|f| !f.spec.is_full() || f.is_product()) {
            return Err(Error::BadParams("product factors must be plain systems on full shifts".into()));
        }
        let radices: Vec<usize> = factors.iter().map(|f| f.spec.alphabet()).collect();
        let spec = ShiftSpec::full(radices.iter().product())?;
        let lo = factors.iter().map(|f| f.rule.window().0).min().unwrap();
        let hi = factors.iter().map(|f| f.rule.window().1).max().unwrap();
        let rule = LocalRule::from_fn(&spec, lo, hi, |w| {
            let parts: Vec<Symbol> = factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let (flo, fhi) = f.rule.window();
                    let sub: Vec<Symbol> =
                        w[(flo - lo) as usize..=(fhi - lo) as usize].iter().map(|&a| digit(&radices, a, i)).collect();
                    f.rule.lookup(&sub).expect("full shift table is total")
                })
                .collect();
            join(&radices, &parts)
        })?;
        Ok(System { spec, rule, factors })
    }

    fn radices(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.spec.alphabet()).collect()
    }

    pub fn spec(&self) -> &ShiftSpec {
        &self.spec
    }

    pub fn rule(&self) -> &LocalRule {
        &self.rule
    }

    pub fn factors(&self) -> &[System] {
        &self.factors
    }

    pub fn is_product(&self) -> bool {
        !self.factors.is_empty()
    }

    /// Digit of `symbol` belonging to factor `i`.
    pub fn digit(&self, symbol: Symbol, i: usize) -> Symbol {
        digit(&self.radices(), symbol, i)
    }

    /// Combines one digit per factor into a symbol.
    pub fn join(&self, digits: &[Symbol]) -> Symbol {
        join(&self.radices(), digits)
    }

    /// Combines per-factor words of equal length.
    pub fn join_words(&self, words: &[Vec<Symbol>]) -> Vec<Symbol> {
        let len = words[0].len();
        (0..len).map(|i| self.join(&words.iter().map(|w| w[i]).collect::<Vec<_>>())).collect()
    }

    /// Splits a word into one word per factor.
    pub fn split_word(&self, word: &[Symbol]) -> Vec<Vec<Symbol>> {
        (0..self.factors.len()).map(|i| word.iter().map(|&a| self.digit(a, i)).collect()).collect()
    }

    fn map_factors<F: Fn(&System) -> Result<System>>(&self, f: F) -> Result<System> {
        System::product(self.factors.iter().map(f).collect::<Result<Vec<_>>>()?)
    }

    /// The system `sigma^k` after `self`.
    pub fn shifted(&self, k: i64) -> Result<System> {
        if self.is_product() {
            return self.map_factors(|f| f.shifted(k));
        }
        let shift = LocalRule::shift_power(&self.spec, k);
        let rule = LocalRule::compose(&shift, &self.rule, &self.spec, DEFAULT_TABLE_CAP)?.trimmed(&self.spec);
        System::new(self.spec.clone(), rule)
    }

    /// The m-th power as a system.
    pub fn power(&self, m: usize, cap: u128) -> Result<System> {
        if self.is_product() {
            return self.map_factors(|f| f.power(m, cap));
        }
        System::new(self.spec.clone(), self.rule.power(&self.spec, m, cap)?)
    }

    /// `self` after `other`, both on the same shift.
    pub fn after(&self, other: &System, cap: u128) -> Result<System> {
        if self.spec != other.spec {
            return Err(Error::BadParams("systems live on different shifts".into()));
        }
        if self.is_product() && other.is_product() && self.factors.len() == other.factors.len() {
            let parts = self
                .factors
                .iter()
                .zip(&other.factors)
                .map(|(a, b)| a.after(b, cap))
                .collect::<Result<Vec<_>>>()?;
            return System::product(parts);
        }
        let rule = LocalRule::compose(&self.rule, &other.rule, &self.spec, cap)?.trimmed(&self.spec);
        System::new(self.spec.clone(), rule)
    }

    /// Whether the two systems commute as maps.
    pub fn commutes_with(&self, other: &System, cap: u128) -> Result<bool> {
        let ab = LocalRule::compose(&self.rule, &other.rule, &self.spec, cap)?;
        let ba = LocalRule::compose(&other.rule, &self.rule, &self.spec, cap)?;
        Ok(ab.same_map(&ba, &self.spec))
    }

    /// Some allowed word of the given length.
    pub fn some_word(&self, len: usize) -> Vec<Symbol> {
        some_word(&self.spec, len)
    }
}

fn digit(radices: &[usize], symbol: Symbol, i: usize) -> Symbol {
    let below: usize = radices[..i].iter().product();
    ((symbol as usize / below) % radices[i]) as Symbol
}

fn join(radices: &[usize], digits: &[Symbol]) -> Symbol {
    radices.iter().zip(digits).rev().fold(0usize, |acc, (&r, &d)| acc * r + d as usize) as Symbol
}

/// First allowed word of the given length in a greedy walk.
pub fn some_word(spec: &ShiftSpec, len: usize) -> Vec<Symbol> {
    let g = spec.graph();
    let mut w = g.vertex(0).to_vec();
    let mut v = 0;
    while w.len() < len {
        let (a, t) = g.successors(v).next().expect("essential graph");
        w.push(a);
        v = t;
    }
    w.truncate(len);
    w
}
