//! Named example systems.

use crate::error::{Error, Result};
use crate::rule::{LocalRule, DEFAULT_TABLE_CAP};
use crate::shift::{ShiftSpec, Symbol};
use crate::system::System;

/// Identity on the full shift over `alphabet` symbols.
pub fn full_shift(alphabet: usize) -> Result<System> {
    let spec = ShiftSpec::full(alphabet)?;
    let rule = LocalRule::identity(&spec);
    System::new(spec, rule)
}

/// `sigma^k` on the golden mean shift.
pub fn golden_mean(k: i64) -> Result<System> {
    let spec = ShiftSpec::golden_mean();
    let rule = LocalRule::shift_power(&spec, k);
    System::new(spec, rule)
}

/// `sigma^k` on the full 2-shift.
pub fn shift_power(k: i64) -> Result<System> {
    let spec = ShiftSpec::full(2)?;
    let rule = LocalRule::shift_power(&spec, k);
    System::new(spec, rule)
}

/// Cellwise permutation of the full shift; `perm[a]` is the image of `a`.
pub fn symbol_perm(perm: &[Symbol]) -> Result<System> {
    let mut seen = vec![false; perm.len()];
    for &a in perm {
        match seen.get_mut(a as usize) {
            Some(s) if !*s => *s = true,
            _ => return Err(Error::BadParams(format!("{perm:?} is not a permutation"))),
        }
    }
    let spec = ShiftSpec::full(perm.len())?;
    let rule = LocalRule::symbol_map(&spec, perm)?;
    System::new(spec, rule)
}

/// Elementary cellular automaton `w` on the full 2-shift.
pub fn elementary(w: u32) -> Result<System> {
    let spec = ShiftSpec::full(2)?;
    let rule = LocalRule::elementary(&spec, w)?;
    System::new(spec, rule)
}

/// `x[i] + x[i+1] mod 2` on the full 2-shift.
pub fn ledrappier() -> Result<System> {
    let spec = ShiftSpec::full(2)?;
    let rule = LocalRule::ledrappier(&spec)?;
    System::new(spec, rule)
}

/// `q` binary tracks rotated one step per iteration, with the wrap-around track
/// shifted one cell, iterated `|p|` times. Its q-th root power is `sigma^(sign p)`,
/// so both cone slopes equal `p/q`.
pub fn rotation_root(p: i64, q: u32) -> Result<System> {
    if q == 0 || q > 7 {
        return Err(Error::BadParams(format!("track count {q} must lie in 1..=7")));
    }
    let spec = ShiftSpec::full(1 << q)?;
    let top = q - 1;
    let step = if p >= 0 {
        LocalRule::from_fn(&spec, -1, 0, |w| ((w[1] << 1) & ((1 << q) - 1) as Symbol) | ((w[0] >> top) & 1))?
    } else {
        LocalRule::from_fn(&spec, 0, 1, |w| ((w[0] << 1) & ((1 << q) - 1) as Symbol) | ((w[1] >> top) & 1))?
    };
    let rule = if p == 0 {
        LocalRule::identity(&spec)
    } else {
        step.power(&spec, p.unsigned_abs() as usize, DEFAULT_TABLE_CAP)?
    };
    System::new(spec, rule)
}

/// Product of the rotation roots for `p1/q1 <= p2/q2`, over `2^(q1 + q2)` symbols.
/// Its cone has left slope `p1/q1` and right slope `p2/q2`.
pub fn perm_product(p1: i64, q1: i64, p2: i64, q2: i64) -> Result<System> {
    if q1 <= 0 || q2 <= 0 {
        return Err(Error::BadParams("denominators must be positive".into()));
    }
    if q1 + q2 > 7 {
        return Err(Error::BadParams(format!("alphabet 2^{} exceeds the symbol range", q1 + q2)));
    }
    if p1 * q2 > p2 * q1 {
        return Err(Error::BadParams(format!("{p1}/{q1} exceeds {p2}/{q2}")));
    }
    System::product(vec![rotation_root(p1, q1 as u32)?, rotation_root(p2, q2 as u32)?])
}

/// A named entry of the builtin corpus.
pub struct Example {
    pub name: &'static str,
    pub builder: &'static str,
    pub params: Vec<i64>,
}

impl Example {
    pub fn build(&self) -> Result<System> {
        build(self.builder, &self.params)
    }
}

/// Builds a system from a builder name and integer parameters.
pub fn build(builder: &str, params: &[i64]) -> Result<System> {
    let arity = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::BadParams(format!("{builder} takes {n} parameters, got {}", params.len())))
        }
    };
    match builder {
        "full_shift" => {
            arity(1)?;
            full_shift(small(params[0])?)
        }
        "golden_mean" => {
            arity(1)?;
            golden_mean(params[0])
        }
        "shift_power" => {
            arity(1)?;
            shift_power(params[0])
        }
        "symbol_perm" => {
            let perm = params.iter().map(|&a| small(a).map(|a| a as Symbol)).collect::<Result<Vec<_>>>()?;
            symbol_perm(&perm)
        }
        "elementary" => {
            arity(1)?;
            elementary(u32::try_from(params[0]).map_err(|_| Error::BadParams("negative rule number".into()))?)
        }
        "ledrappier" => {
            arity(0)?;
            ledrappier()
        }
        "perm_product" => {
            arity(4)?;
            perm_product(params[0], params[1], params[2], params[3])
        }
        other => Err(Error::BadParams(format!("unknown builder {other}"))),
    }
}

fn small(a: i64) -> Result<usize> {
    usize::try_from(a).ok().filter(|&a| a <= 255).ok_or_else(|| Error::BadParams(format!("{a} is out of range")))
}

pub const BUILDERS: [&str; 7] =
    ["full_shift", "golden_mean", "shift_power", "symbol_perm", "elementary", "ledrappier", "perm_product"];

/// The builtin corpus used by `verify` and the examples listing.
pub fn corpus() -> Vec<Example> {
    let e = |name, builder, params: &[i64]| Example { name, builder, params: params.to_vec() };
    vec![
        e("identity", "full_shift", &[2]),
        e("shift", "shift_power", &[1]),
        e("shift-squared", "shift_power", &[2]),
        e("shift-inverse", "shift_power", &[-1]),
        e("shift-cubed", "shift_power", &[3]),
        e("swap", "symbol_perm", &[1, 0]),
        e("rule-90", "elementary", &[90]),
        e("rule-30", "elementary", &[30]),
        e("ledrappier", "ledrappier", &[]),
        e("cone-product", "perm_product", &[-1, 2, 1, 3]),
        e("half-product", "perm_product", &[1, 2, 1, 2]),
        e("golden-shift", "golden_mean", &[1]),
        e("golden-identity", "golden_mean", &[0]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::Coder;
    use crate::system::Budget;

    #[test]
    fn rule_90_matches_hand_table() {
        let s = elementary(90).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    assert_eq!(s.rule().lookup(&[a, b, c]), Some(a ^ c));
                }
            }
        }
    }

    #[test]
    fn rotation_root_powers_to_the_shift() {
        for (p, q) in [(1, 1), (1, 2), (-1, 3), (2, 3)] {
            let s = rotation_root(p, q).unwrap();
            let m = s.power(q as usize, DEFAULT_TABLE_CAP).unwrap();
            assert_eq!(m.rule().as_shift_power(m.spec()), Some(p), "{p}/{q}");
        }
    }

    #[test]
    fn cone_product_slopes() {
        let s = perm_product(-1, 2, 1, 3).unwrap();
        assert_eq!(s.spec().alphabet(), 32);
        let mut c = Coder::new(&s, Budget::default());
        assert_eq!(c.w_plus(6).unwrap(), 2);
        assert_eq!(c.w_minus(6).unwrap(), -3);
    }

    #[test]
    fn bad_params() {
        assert!(matches!(perm_product(1, 2, -1, 2), Err(Error::BadParams(_))));
        assert!(matches!(symbol_perm(&[0, 0]), Err(Error::BadParams(_))));
        assert!(matches!(build("elementary", &[1, 2]), Err(Error::BadParams(_))));
        assert!(matches!(build("nope", &[]), Err(Error::BadParams(_))));
    }

    #[test]
    fn corpus_builds() {
        for e in corpus() {
            e.build().unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }
}
