//! Slopes of the light cone, spread estimates and finite-order detection.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::coding::{Coder, ConeProfile, ProfileOptions};
use crate::error::{Error, Result};
use crate::system::{Budget, System};

pub type Rational = Ratio<i64>;

/// Serializes a rational as `"p/q"`.
pub fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn serialize_opt_rational<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// How a reported number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "Fekete-bound")]
    FeketeBound,
    #[serde(rename = "estimate")]
    Estimate,
}

/// Bound on one cone slope from a finite profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    /// `min W+(n)/n` for the right slope, `max W-(n)/n` for the left slope.
    #[serde(serialize_with = "serialize_rational")]
    pub bound: Rational,
    pub bound_at: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub last_ratio: Rational,
    /// Set when the tail of the profile is certified to follow this slope exactly.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub exact: Option<Rational>,
    pub n_max: usize,
}

impl SlopeEstimate {
    pub fn value(&self) -> Rational {
        self.exact.unwrap_or(self.bound)
    }

    pub fn method(&self) -> Method {
        if self.exact.is_some() {
            Method::Exact
        } else {
            Method::FeketeBound
        }
    }
}

fn ceil_mul(r: Rational, n: i64) -> i64 {
    (r * n).ceil().to_integer()
}

fn floor_mul(r: Rational, n: i64) -> i64 {
    (r * n).floor().to_integer()
}

/// Shortest tail accepted as evidence of periodicity.
const MIN_TAIL: usize = 4;

/// Whether `values[n-1] - round(slope * n)` is periodic with period `q` over the last
/// `max(2q, MIN_TAIL)` terms.
fn certify(values: &[i64], slope: Rational, upper: bool) -> bool {
    let q = *slope.denom() as usize;
    let big_n = values.len();
    let tail = (2 * q).max(MIN_TAIL);
    if big_n < tail {
        return false;
    }
    let dev = |n: usize| {
        let v = values[n - 1];
        if upper {
            v - ceil_mul(slope, n as i64)
        } else {
            v - floor_mul(slope, n as i64)
        }
    };
    (big_n - tail + q + 1..=big_n).all(|n| dev(n) == dev(n - q))
}

fn estimate(values: &[i64], upper: bool) -> SlopeEstimate {
    let big_n = values.len();
    let ratios: Vec<Rational> = values.iter().enumerate().map(|(i, &v)| Rational::new(v, i as i64 + 1)).collect();
    let (bound_at, bound) = ratios
        .iter()
        .enumerate()
        .fold(None::<(usize, Rational)>, |best, (i, &r)| match best {
            Some((_, b)) if (upper && b <= r) || (!upper && b >= r) => best,
            _ => Some((i + 1, r)),
        })
        .expect("non-empty profile");
    let mut candidates = vec![bound];
    let mut diffs: Vec<Rational> =
        (1..=big_n / 2).map(|d| Rational::new(values[big_n - 1] - values[big_n - 1 - d], d as i64)).collect();
    diffs.sort_by_key(|r| *r.denom());
    candidates.extend(diffs);
    let exact = candidates
        .into_iter()
        .filter(|&c| if upper { c <= bound } else { c >= bound })
        .find(|&c| certify(values, c, upper));
    SlopeEstimate { bound, bound_at, last_ratio: ratios[big_n - 1], exact, n_max: big_n }
}

/// Fekete bounds on both cone slopes, with exactness certificates where the tail allows.
pub fn alpha_bounds(profile: &ConeProfile) -> Result<(SlopeEstimate, SlopeEstimate)> {
    if profile.n_max() < 2 {
        return Err(Error::ProfileTooShort { need: 2, got: profile.n_max() });
    }
    Ok((estimate(&profile.w_plus(), true), estimate(&profile.w_minus(), false)))
}

/// `W+(n) - n a+` and `W-(n) - n a-` along the profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationSeries {
    #[serde(serialize_with = "serialize_rational")]
    pub alpha_plus: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub alpha_minus: Rational,
    pub method: Method,
    #[serde(serialize_with = "serialize_rationals")]
    pub plus: Vec<Rational>,
    #[serde(serialize_with = "serialize_rationals")]
    pub minus: Vec<Rational>,
}

fn serialize_rationals<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

impl DeviationSeries {
    /// Whether the right deviations are nonnegative and the left ones nonpositive.
    pub fn signs_hold(&self) -> bool {
        self.plus.iter().all(|d| *d >= Rational::from(0)) && self.minus.iter().all(|d| *d <= Rational::from(0))
    }
}

pub fn deviations(profile: &ConeProfile, plus: &SlopeEstimate, minus: &SlopeEstimate) -> DeviationSeries {
    let (ap, am) = (plus.value(), minus.value());
    let method = if plus.exact.is_some() && minus.exact.is_some() { Method::Exact } else { Method::FeketeBound };
    DeviationSeries {
        alpha_plus: ap,
        alpha_minus: am,
        method,
        plus: profile.levels.iter().map(|l| Rational::from(l.w_plus) - ap * l.n as i64).collect(),
        minus: profile.levels.iter().map(|l| Rational::from(l.w_minus) - am * l.n as i64).collect(),
    }
}

/// Two estimates of the spread: from coding lengths and from the cone slopes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadEstimate {
    /// `min ell(n)/n`, an upper bound.
    #[serde(serialize_with = "serialize_rational")]
    pub fekete_upper: Rational,
    /// Length of the smallest interval containing 0 and both slopes.
    #[serde(serialize_with = "serialize_rational")]
    pub formula: Rational,
    pub formula_method: Method,
    pub agree: bool,
    pub range_distorted: bool,
}

/// Threshold below which a spread upper bound counts as zero.
pub const DISTORTION_EPSILON: f64 = 1e-6;

pub fn spread(profile: &ConeProfile) -> Result<SpreadEstimate> {
    let (plus, minus) = alpha_bounds(profile)?;
    let ells: Vec<i64> =
        profile.levels.iter().map(|l| l.ell.ok_or(Error::BadParams("profile lacks ell".into()))).collect::<Result<_>>()?;
    let fekete_upper = ells
        .iter()
        .enumerate()
        .map(|(i, &l)| Rational::new(l, i as i64 + 1))
        .min()
        .expect("non-empty profile");
    let zero = Rational::from(0);
    let formula = plus.value().max(zero) - minus.value().min(zero);
    let formula_method = if plus.exact.is_some() && minus.exact.is_some() { Method::Exact } else { Method::Estimate };
    let tolerance = Rational::new(2, profile.n_max() as i64);
    let diff = fekete_upper - formula;
    let agree = diff <= tolerance && -diff <= tolerance;
    let range_distorted =
        (formula_method == Method::Exact && formula == zero) || to_f64(&fekete_upper) < DISTORTION_EPSILON;
    Ok(SpreadEstimate { fekete_upper, formula, formula_method, agree, range_distorted })
}

/// Symmetric-window growth rate and its comparison with the spread.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoEstimate {
    /// `min L(n)/n` over the profile.
    #[serde(serialize_with = "serialize_rational")]
    pub upper: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub spread_upper: Rational,
    /// `rho <= A` on the bounds.
    pub lower_sandwich: bool,
    /// `A <= 2 rho` on the bounds.
    pub upper_sandwich: bool,
    /// `L(n) <= ell(n) <= 2 L(n) + 1` for every n.
    pub pointwise: bool,
}

pub fn rho(profile: &ConeProfile) -> Result<RhoEstimate> {
    let sp = spread(profile)?;
    let mut upper: Option<Rational> = None;
    let mut pointwise = true;
    for l in &profile.levels {
        let sym = l.sym_len.ok_or(Error::BadParams("profile lacks symmetric lengths".into()))?;
        let ell = l.ell.expect("checked by spread");
        pointwise &= sym <= ell && ell <= 2 * sym + 1;
        let r = Rational::new(sym, l.n as i64);
        upper = Some(upper.map_or(r, |u| u.min(r)));
    }
    let upper = upper.expect("non-empty profile");
    Ok(RhoEstimate {
        upper,
        spread_upper: sp.fekete_upper,
        lower_sandwich: upper <= sp.fekete_upper,
        upper_sandwich: sp.fekete_upper <= upper * 2,
        pointwise,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OrderReport {
    /// `phi^m = sigma^k` with the smallest such m.
    Finite { m: usize, k: i64 },
    /// No relation up to the search bound and window widths grow.
    InfiniteEvidence { widths: Vec<i64> },
    Undecided { widths: Vec<i64> },
}

/// Searches for `phi^m = sigma^k` with m up to `n_max`.
pub fn detect_finite_order(coder: &mut Coder, n_max: usize) -> Result<OrderReport> {
    let mut widths = Vec::new();
    for m in 1..=n_max {
        if let Some(k) = coder.shift_power_relation(m)? {
            return Ok(OrderReport::Finite { m, k });
        }
        let (a, b) = coder.power_window(m)?;
        widths.push(b - a + 1);
    }
    let grows = widths.windows(2).all(|w| w[0] <= w[1]) && widths.last() > widths.first();
    Ok(if grows { OrderReport::InfiniteEvidence { widths } } else { OrderReport::Undecided { widths } })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteItem {
    pub name: String,
    pub status: ItemStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub items: Vec<SuiteItem>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.status != ItemStatus::Fail)
    }
}

/// Inputs for [`property_suite`].
pub struct SuiteInputs<'a> {
    pub n_max: usize,
    pub shifts: &'a [i64],
    pub powers: &'a [usize],
    pub partners: &'a [System],
    pub inverse: Option<&'a System>,
}

fn item(name: &str, ok: bool, detail: String) -> SuiteItem {
    SuiteItem { name: name.into(), status: if ok { ItemStatus::Pass } else { ItemStatus::Fail }, detail }
}

/// Checks the cone identities for shift compositions, powers, commuting pairs and inverses.
pub fn property_suite(system: &System, budget: Budget, inputs: &SuiteInputs) -> Result<SuiteReport> {
    let n_max = inputs.n_max;
    let mut items = Vec::new();
    let mut base = Coder::new(system, budget);
    let top = n_max * inputs.powers.iter().copied().max().unwrap_or(1);
    let plus: Vec<i64> = (1..=top).map(|n| base.w_plus(n)).collect::<Result<_>>()?;
    let minus: Vec<i64> = (1..=top).map(|n| base.w_minus(n)).collect::<Result<_>>()?;

    for &k in inputs.shifts {
        let shifted = system.shifted(k)?;
        let mut c = Coder::new(&shifted, budget);
        let mut bad = None;
        for n in 1..=n_max {
            let (p, m) = (c.w_plus(n)?, c.w_minus(n)?);
            if p != plus[n - 1] + k * n as i64 || m != minus[n - 1] + k * n as i64 {
                bad = Some(n);
                break;
            }
        }
        items.push(item("shift_composition", bad.is_none(), format!("k={k}, first failure {bad:?}")));
    }

    for &m in inputs.powers {
        let pw = system.power(m, budget.table_cap)?;
        let mut c = Coder::new(&pw, budget);
        let mut bad = None;
        for n in (1..=n_max).filter(|n| n * m <= top) {
            if c.w_plus(n)? != plus[n * m - 1] || c.w_minus(n)? != minus[n * m - 1] {
                bad = Some(n);
                break;
            }
        }
        items.push(item("power", bad.is_none(), format!("m={m}, first failure {bad:?}")));
    }

    let ordered = (0..n_max).all(|i| minus[i] <= plus[i]);
    items.push(item("ordered", ordered, format!("n <= {n_max}")));

    for (j, partner) in inputs.partners.iter().enumerate() {
        if !system.commutes_with(partner, budget.table_cap)? {
            items.push(SuiteItem {
                name: "commuting_pair".into(),
                status: ItemStatus::Skipped,
                detail: format!("partner {j} does not commute"),
            });
            continue;
        }
        let comp = system.after(partner, budget.table_cap)?;
        let mut cc = Coder::new(&comp, budget);
        let mut cp = Coder::new(partner, budget);
        let mut bad = None;
        for n in 1..=n_max {
            let up = cc.w_plus(n)? <= plus[n - 1] + cp.w_plus(n)?;
            let down = cc.w_minus(n)? >= minus[n - 1] + cp.w_minus(n)?;
            if !(up && down) {
                bad = Some(n);
                break;
            }
        }
        items.push(item("commuting_pair", bad.is_none(), format!("partner {j}, first failure {bad:?}")));
    }

    match inputs.inverse {
        Some(inv) if n_max >= 2 => {
            let mut ci = Coder::new(inv, budget);
            let own = base.profile(n_max, ProfileOptions::default())?;
            let other = ci.profile(n_max, ProfileOptions::default())?;
            let (p1, m1) = alpha_bounds(&own)?;
            let (p2, m2) = alpha_bounds(&other)?;
            let zero = Rational::from(0);
            if let (Some(a), Some(b), Some(c), Some(d)) = (p1.exact, p2.exact, m1.exact, m2.exact) {
                let ok = a + b >= zero && c + d <= zero;
                items.push(item("inverse", ok, format!("a+ sum {}, a- sum {}", a + b, c + d)));
            } else {
                items.push(SuiteItem {
                    name: "inverse".into(),
                    status: ItemStatus::Skipped,
                    detail: "slopes not certified exact".into(),
                });
            }
        }
        _ => items.push(SuiteItem {
            name: "inverse".into(),
            status: ItemStatus::Skipped,
            detail: "no inverse found".into(),
        }),
    }
    Ok(SuiteReport { items })
}
