//! Text definitions of systems and their analysis settings.
//!
//! ```toml
//! [shift]
//! alphabet = 2
//! forbidden = ["11"]
//!
//! [rule]
//! window = [0, 0]
//! table = ["0:0", "1:1"]
//!
//! [analysis]
//! n_max = 6
//! slopes = ["1/1", "-2/1"]
//! ```
//!
//! A rule is either a table over `window` or a `builder` with integer `params`.
//! Words are digit strings when the alphabet has at most ten symbols and
//! dot-separated numbers otherwise.

use std::fmt::Write as _;
use std::ops::Range;
use std::time::Duration;

use serde::Deserialize;
use toml::Spanned;

use crate::builders;
use crate::error::Error;
use crate::rule::LocalRule;
use crate::shift::{ShiftSpec, Symbol};
use crate::system::{Budget, System};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DefinitionError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("semantic error at {line}:{col}: {message}")]
    Semantic { line: usize, col: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftBlock {
    pub alphabet: usize,
    pub forbidden: Vec<Vec<Symbol>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleBlock {
    Builder { name: String, params: Vec<i64> },
    Table { window: (i64, i64), rows: Vec<(Vec<Symbol>, Symbol)> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisBlock {
    pub n_max: usize,
    pub radius: i64,
    pub slopes: Vec<(i64, i64)>,
    pub rect_m: Vec<usize>,
    pub rect_n: Vec<usize>,
    pub table_cap: Option<u64>,
    pub state_cap: Option<usize>,
    pub wall_clock_secs: Option<u64>,
}

impl Default for AnalysisBlock {
    fn default() -> AnalysisBlock {
        AnalysisBlock {
            n_max: 6,
            radius: 4,
            slopes: Vec::new(),
            rect_m: vec![1, 2, 4, 6],
            rect_n: vec![1, 2, 4, 8],
            table_cap: None,
            state_cap: None,
            wall_clock_secs: None,
        }
    }
}

impl AnalysisBlock {
    pub fn budget(&self) -> Budget {
        let mut b = Budget::default();
        if let Some(t) = self.table_cap {
            b.table_cap = t as u128;
        }
        if let Some(s) = self.state_cap {
            b.state_cap = s;
        }
        if let Some(w) = self.wall_clock_secs {
            b = b.with_wall_clock(Duration::from_secs(w));
        }
        b
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemDefinition {
    pub shift: Option<ShiftBlock>,
    pub rule: RuleBlock,
    pub analysis: AnalysisBlock,
}

impl SystemDefinition {
    /// Definition of a named builder with default analysis settings.
    pub fn from_builder(name: &str, params: &[i64]) -> SystemDefinition {
        SystemDefinition {
            shift: None,
            rule: RuleBlock::Builder { name: name.to_string(), params: params.to_vec() },
            analysis: AnalysisBlock::default(),
        }
    }

    pub fn build(&self) -> crate::Result<System> {
        match &self.rule {
            RuleBlock::Builder { name, params } => {
                let system = builders::build(name, params)?;
                if let Some(shift) = &self.shift {
                    let spec = ShiftSpec::new(shift.alphabet, shift.forbidden.clone())?;
                    if &spec != system.spec() {
                        return Err(Error::BadParams(format!("builder {name} lives on a different shift")));
                    }
                }
                Ok(system)
            }
            RuleBlock::Table { window, rows } => {
                let shift = self.shift.as_ref().ok_or_else(|| Error::BadParams("a table rule needs a [shift] block".into()))?;
                let spec = ShiftSpec::new(shift.alphabet, shift.forbidden.clone())?;
                let rule = LocalRule::from_rows(&spec, window.0, window.1, rows.iter().cloned())?;
                System::new(spec, rule)
            }
        }
    }

    /// Canonical text form; parsing it gives back the same definition.
    pub fn print(&self) -> String {
        let mut out = String::new();
        let alphabet = self.shift.as_ref().map(|s| s.alphabet).unwrap_or(2);
        if let Some(shift) = &self.shift {
            let words: Vec<String> = shift.forbidden.iter().map(|w| quote(&format_word(w, alphabet))).collect();
            let _ = writeln!(out, "[shift]\nalphabet = {}\nforbidden = [{}]\n", shift.alphabet, words.join(", "));
        }
        out.push_str("[rule]\n");
        match &self.rule {
            RuleBlock::Builder { name, params } => {
                let _ = writeln!(out, "builder = {}\nparams = {}", quote(name), list(params));
            }
            RuleBlock::Table { window, rows } => {
                let rows: Vec<String> = rows
                    .iter()
                    .map(|(w, a)| format!("    {},", quote(&format!("{}:{}", format_word(w, alphabet), format_word(&[*a], alphabet)))))
                    .collect();
                let _ = writeln!(out, "window = [{}, {}]\ntable = [\n{}\n]", window.0, window.1, rows.join("\n"));
            }
        }
        let a = &self.analysis;
        let slopes: Vec<String> = a.slopes.iter().map(|(p, q)| quote(&format!("{p}/{q}"))).collect();
        let _ = writeln!(
            out,
            "\n[analysis]\nn_max = {}\nradius = {}\nslopes = [{}]\nrect_m = {}\nrect_n = {}",
            a.n_max,
            a.radius,
            slopes.join(", "),
            list(&a.rect_m),
            list(&a.rect_n)
        );
        if let Some(t) = a.table_cap {
            let _ = writeln!(out, "table_cap = {t}");
        }
        if let Some(s) = a.state_cap {
            let _ = writeln!(out, "state_cap = {s}");
        }
        if let Some(w) = a.wall_clock_secs {
            let _ = writeln!(out, "wall_clock_secs = {w}");
        }
        out
    }
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

fn list<T: std::fmt::Display>(xs: &[T]) -> String {
    format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

pub fn format_word(word: &[Symbol], alphabet: usize) -> String {
    if alphabet <= 10 {
        word.iter().map(|a| char::from(b'0' + a)).collect()
    } else {
        word.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(".")
    }
}

pub fn parse_word(text: &str, alphabet: usize) -> Option<Vec<Symbol>> {
    let word: Vec<Symbol> = if alphabet <= 10 {
        text.chars().map(|c| c.to_digit(10).map(|d| d as Symbol)).collect::<Option<_>>()?
    } else {
        text.split('.').map(|t| t.parse::<Symbol>().ok()).collect::<Option<_>>()?
    };
    (!word.is_empty() && word.iter().all(|&a| (a as usize) < alphabet)).then_some(word)
}

fn parse_slope(text: &str) -> Option<(i64, i64)> {
    let (p, q) = text.split_once('/')?;
    let (p, q) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
    (q >= 0 && (p, q) != (0, 0)).then_some((p, q))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefinition {
    shift: Option<Spanned<RawShift>>,
    rule: Spanned<RawRule>,
    analysis: Option<RawAnalysis>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShift {
    alphabet: Spanned<i64>,
    #[serde(default)]
    forbidden: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    builder: Option<Spanned<String>>,
    params: Option<Vec<i64>>,
    window: Option<Spanned<(i64, i64)>>,
    table: Option<Vec<Spanned<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    n_max: Option<usize>,
    radius: Option<Spanned<i64>>,
    slopes: Option<Vec<Spanned<String>>>,
    rect_m: Option<Vec<usize>>,
    rect_n: Option<Vec<usize>>,
    table_cap: Option<u64>,
    state_cap: Option<usize>,
    wall_clock_secs: Option<u64>,
}

/// Line and column (both from 1) of a byte offset.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
    (line, col)
}

struct Diagnostics<'a> {
    text: &'a str,
}

impl Diagnostics<'_> {
    fn syntax(&self, span: Range<usize>, message: impl Into<String>) -> DefinitionError {
        let (line, col) = position(self.text, span.start);
        DefinitionError::Syntax { line, col, message: message.into() }
    }

    fn semantic(&self, span: Range<usize>, message: impl Into<String>) -> DefinitionError {
        let (line, col) = position(self.text, span.start);
        DefinitionError::Semantic { line, col, message: message.into() }
    }
}

/// Parses and validates a definition, building the system once to check it.
pub fn parse_definition(text: &str) -> Result<SystemDefinition, DefinitionError> {
    let diag = Diagnostics { text };
    let raw: RawDefinition = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        diag.syntax(span, e.message().trim().to_string())
    })?;

    let shift = match &raw.shift {
        None => None,
        Some(s) => {
            let span = s.span();
            let s = s.get_ref();
            let alphabet = usize::try_from(*s.alphabet.get_ref())
                .ok()
                .filter(|a| (1..=255).contains(a))
                .ok_or_else(|| diag.semantic(s.alphabet.span(), "alphabet must lie in 1..=255"))?;
            let forbidden = s
                .forbidden
                .iter()
                .map(|w| {
                    parse_word(w.get_ref(), alphabet)
                        .ok_or_else(|| diag.syntax(w.span(), format!("bad word {:?}", w.get_ref())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            ShiftSpec::new(alphabet, forbidden.clone()).map_err(|e| diag.semantic(span, e.to_string()))?;
            Some(ShiftBlock { alphabet, forbidden })
        }
    };

    let rule_span = raw.rule.span();
    let r = raw.rule.get_ref();
    let mut row_spans = Vec::new();
    let rule = match (&r.builder, &r.window, &r.table) {
        (Some(name), None, None) => RuleBlock::Builder { name: name.get_ref().clone(), params: r.params.clone().unwrap_or_default() },
        (None, Some(window), Some(table)) if r.params.is_none() => {
            let alphabet = shift.as_ref().map(|s| s.alphabet).ok_or_else(|| diag.semantic(rule_span.clone(), "a table rule needs a [shift] block"))?;
            let rows = table
                .iter()
                .map(|row| {
                    row_spans.push(row.span());
                    row.get_ref()
                        .split_once(':')
                        .and_then(|(w, a)| Some((parse_word(w.trim(), alphabet)?, parse_word(a.trim(), alphabet)?)))
                        .filter(|(_, a)| a.len() == 1)
                        .map(|(w, a)| (w, a[0]))
                        .ok_or_else(|| diag.syntax(row.span(), format!("bad table row {:?}", row.get_ref())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            RuleBlock::Table { window: *window.get_ref(), rows }
        }
        (None, None, None) if r.params.is_none() => return Err(diag.syntax(rule_span, "empty [rule] block")),
        _ => return Err(diag.syntax(rule_span, "a rule needs either `builder` and `params` or `window` and `table`")),
    };

    let mut analysis = AnalysisBlock::default();
    if let Some(a) = raw.analysis {
        if let Some(n) = a.n_max {
            analysis.n_max = n;
        }
        if let Some(r) = a.radius {
            if *r.get_ref() < 1 {
                return Err(diag.semantic(r.span(), "radius must be positive"));
            }
            analysis.radius = *r.get_ref();
        }
        if let Some(slopes) = a.slopes {
            analysis.slopes = slopes
                .iter()
                .map(|s| parse_slope(s.get_ref()).ok_or_else(|| diag.syntax(s.span(), format!("bad slope {:?}, expected p/q", s.get_ref()))))
                .collect::<Result<_, _>>()?;
        }
        if let Some(m) = a.rect_m {
            analysis.rect_m = m;
        }
        if let Some(n) = a.rect_n {
            analysis.rect_n = n;
        }
        analysis.table_cap = a.table_cap;
        analysis.state_cap = a.state_cap;
        analysis.wall_clock_secs = a.wall_clock_secs;
    }

    let def = SystemDefinition { shift, rule, analysis };
    if let Err(e) = def.build() {
        let span = match &e {
            Error::IllegalWord { word } | Error::MissingEntry { word } => match &def.rule {
                RuleBlock::Table { rows, .. } => rows
                    .iter()
                    .position(|(w, _)| w == word)
                    .map(|i| row_spans[i].clone())
                    .unwrap_or(rule_span),
                RuleBlock::Builder { .. } => rule_span,
            },
            _ => rule_span,
        };
        return Err(diag.semantic(span, e.to_string()));
    }
    Ok(def)
}

/// Canonical form of a definition text.
pub fn canonical(text: &str) -> Result<String, DefinitionError> {
    parse_definition(text).map(|d| d.print())
}

/// Hand-written table definition of a built system, for fixtures and round trips.
pub fn tabulate(system: &System) -> SystemDefinition {
    let spec = system.spec();
    let rule = system.rule();
    SystemDefinition {
        shift: Some(ShiftBlock { alphabet: spec.alphabet(), forbidden: spec.forbidden().to_vec() }),
        rule: RuleBlock::Table { window: rule.window(), rows: rule.rows().collect() },
        analysis: AnalysisBlock::default(),
    }
}

/// Applies `key=value` overrides separated by commas, as read from the environment.
pub fn apply_budget_overrides(analysis: &mut AnalysisBlock, spec: &str) -> Result<(), String> {
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| format!("expected key=value, got {item:?}"))?;
        let value: u64 = value.trim().parse().map_err(|_| format!("bad number in {item:?}"))?;
        match key.trim() {
            "n_max" => analysis.n_max = value as usize,
            "table_cap" => analysis.table_cap = Some(value),
            "state_cap" => analysis.state_cap = Some(value as usize),
            "wall_clock_secs" => analysis.wall_clock_secs = Some(value),
            other => return Err(format!("unknown budget key {other:?}")),
        }
    }
    Ok(())
}
