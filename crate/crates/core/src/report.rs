//! Analysis runs and their line-delimited record streams.
//!
//! Every record carries `version`, `kind` and the budget it ran under. Numbers
//! that are claims about the system carry a `method` of `exact`, `Fekete-bound`
//! or `estimate`; rationals are printed as `p/q`.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::asymptotics::{
    alpha_bounds, detect_finite_order, deviations, format_rational, property_suite, rho, spread, ItemStatus, Method,
    SuiteInputs,
};
use crate::builders;
use crate::coding::{Coder, ProfileOptions};
use crate::definition::{format_word, SystemDefinition};
use crate::error::{Error, Result};
use crate::probe::{probe_slopes, ProbeOptions, ProbeVerdict, RadiusVerdict};
use crate::render::{pgm, svg, ConeEdge};
use crate::rule::{check_injective, check_surjective, find_inverse};
use crate::spacetime::{check_entropy_inequality, edge_witnesses, generate_rect, phi_entropy};
use crate::system::{Budget, System};

pub const REPORT_VERSION: u32 = 1;

/// Extra slack allowed in the entropy inequality.
pub const ENTROPY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Ok,
    BudgetExhausted,
    InvariantViolated,
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVARIANT_VIOLATED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const DEFINITION_SYNTAX: i32 = 3;
    pub const DEFINITION_SEMANTIC: i32 = 4;
    pub const BUDGET_EXHAUSTED: i32 = 5;
    pub const NOT_AN_ENDOMORPHISM: i32 = 6;
    pub const DEGENERATE_SHIFT: i32 = 7;
    pub const BAD_PARAMS: i32 = 8;
    pub const IO: i32 = 9;
    pub const INTERNAL: i32 = 10;
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvariantViolated(_) => exit::INVARIANT_VIOLATED,
        Error::BudgetExceeded(_) | Error::TableBlowup { .. } => exit::BUDGET_EXHAUSTED,
        Error::NotSurjective { .. } | Error::NotIntoX { .. } | Error::NotCommuting => exit::NOT_AN_ENDOMORPHISM,
        Error::EmptyShift | Error::FiniteShift => exit::DEGENERATE_SHIFT,
        Error::BadParams(_)
        | Error::BadAlphabet(_)
        | Error::BadSymbol { .. }
        | Error::BadWindow { .. }
        | Error::IllegalWord { .. }
        | Error::MissingEntry { .. } => exit::BAD_PARAMS,
        _ => exit::INTERNAL,
    }
}

/// A record stream plus the diagram files it refers to.
#[derive(Debug)]
pub struct Report {
    budget: Value,
    pub records: Vec<Value>,
    pub files: Vec<(String, String)>,
    pub outcome: Outcome,
    pub summary: Vec<String>,
}

impl Report {
    pub fn new(budget: &Budget, n_max: usize, wall_clock_secs: Option<u64>) -> Report {
        let budget = json!({
            "n_max": n_max,
            "table_cap": budget.table_cap.to_string(),
            "state_cap": budget.state_cap,
            "wall_clock_secs": wall_clock_secs,
        });
        Report { budget, records: Vec::new(), files: Vec::new(), outcome: Outcome::Ok, summary: Vec::new() }
    }

    pub fn push(&mut self, kind: &str, mut body: Value) {
        let mut rec = json!({ "version": REPORT_VERSION, "kind": kind });
        if let (Some(r), Some(b)) = (rec.as_object_mut(), body.as_object_mut()) {
            r.append(b);
            r.insert("budget".into(), self.budget.clone());
        }
        self.records.push(rec);
    }

    fn note(&mut self, line: String) {
        self.summary.push(line);
    }

    fn escalate(&mut self, outcome: Outcome) {
        self.outcome = self.outcome.max(outcome);
    }

    /// Records a violated invariant.
    fn violation(&mut self, stage: &str, detail: String) {
        self.push("violation", json!({ "stage": stage, "detail": detail }));
        self.note(format!("VIOLATION in {stage}: {detail}"));
        self.escalate(Outcome::InvariantViolated);
    }

    /// Turns budget errors into a record and passes other errors on.
    fn absorb<T>(&mut self, stage: &str, r: Result<T>) -> Result<Option<T>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::BudgetExceeded(res)) => {
                self.exhausted(stage, &res.to_string());
                Ok(None)
            }
            Err(Error::TableBlowup { needed, cap }) => {
                self.exhausted(stage, &format!("table entries ({needed} > {cap})"));
                Ok(None)
            }
            Err(Error::InvariantViolated(d)) => {
                self.violation(stage, d);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn exhausted(&mut self, stage: &str, resource: &str) {
        self.push("budget_exhausted", json!({ "stage": stage, "resource": resource }));
        self.note(format!("budget exhausted in {stage}: {resource}"));
        self.escalate(Outcome::BudgetExhausted);
    }

    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            Outcome::Ok => exit::OK,
            Outcome::BudgetExhausted => exit::BUDGET_EXHAUSTED,
            Outcome::InvariantViolated => exit::INVARIANT_VIOLATED,
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    pub fn human(&self) -> String {
        let mut out = self.summary.join("\n");
        out.push('\n');
        out
    }
}

/// Settings shared by the analysis entry points.
#[derive(Clone, Debug)]
pub struct Run {
    pub definition: SystemDefinition,
    pub budget: Budget,
}

impl Run {
    pub fn new(definition: SystemDefinition) -> Run {
        let budget = definition.analysis.budget();
        Run { definition, budget }
    }

    fn report(&self) -> Report {
        let a = &self.definition.analysis;
        Report::new(&self.budget, a.n_max, a.wall_clock_secs)
    }

    fn system(&self) -> Result<System> {
        self.definition.build()
    }
}

fn rational_claim(value: &crate::asymptotics::Rational, method: Method) -> Value {
    json!({ "value": format_rational(value), "method": method })
}

fn system_record(report: &mut Report, system: &System, budget: &Budget) -> Result<()> {
    let spec = system.spec();
    let rule = system.rule();
    let entropy = spec.entropy()?;
    let inj = check_injective(rule, spec);
    let (surj_value, missing) = match check_surjective(rule, spec, budget.state_cap) {
        Ok(s) => (json!({ "value": s.surjective, "method": "exact" }), (!s.surjective).then_some(s.witness)),
        Err(Error::BudgetExceeded(r)) => (json!({ "value": null, "method": "exact", "exhausted": r.to_string() }), None),
        Err(e) => return Err(e),
    };
    let forbidden: Vec<String> = spec.forbidden().iter().map(|w| format_word(w, spec.alphabet())).collect();
    report.push(
        "system",
        json!({
            "alphabet": spec.alphabet(),
            "forbidden": forbidden,
            "window": [rule.window().0, rule.window().1],
            "factors": system.factors().len(),
            "bowen_constant": { "value": spec.bowen_constant(), "method": "exact" },
            "shift_entropy": { "value": entropy.entropy, "method": "estimate" },
            "surjective": surj_value,
            "injective": { "value": inj.injective, "method": "exact" },
        }),
    );
    report.note(format!(
        "alphabet {}, window [{}, {}], shift entropy {:.6}",
        spec.alphabet(),
        rule.window().0,
        rule.window().1,
        entropy.entropy
    ));
    if let Some(witness) = missing {
        return Err(Error::NotSurjective { witness });
    }
    Ok(())
}

/// Cone profile, slopes, deviations, spread and order.
pub fn analyze(run: &Run) -> Result<Report> {
    let mut report = run.report();
    let system = run.system()?;
    system_record(&mut report, &system, &run.budget)?;
    let n_max = run.definition.analysis.n_max;
    let mut coder = Coder::new(&system, run.budget);
    analyze_into(&mut report, &mut coder, n_max)?;
    Ok(report)
}

fn analyze_into(report: &mut Report, coder: &mut Coder, n_max: usize) -> Result<()> {
    let Some(profile) = report.absorb("profile", coder.profile(n_max, ProfileOptions::all()))? else { return Ok(()) };
    report.push("cone_profile", json!({ "method": "exact", "requested": profile.requested, "levels": profile.levels }));
    if let Some(r) = &profile.exhausted {
        report.exhausted("profile", r);
    }
    let w: Vec<String> = profile.levels.iter().map(|l| format!("[{}, {}]", l.w_minus, l.w_plus)).collect();
    report.note(format!("cone levels W-/W+ for n = 1..{}: {}", profile.n_max(), w.join(" ")));

    let Some((plus, minus)) = report.absorb("slopes", alpha_bounds(&profile))? else { return Ok(()) };
    report.push(
        "slopes",
        json!({
            "alpha_plus": rational_claim(&plus.value(), plus.method()),
            "alpha_minus": rational_claim(&minus.value(), minus.method()),
            "fekete_plus": rational_claim(&plus.bound, Method::FeketeBound),
            "fekete_minus": rational_claim(&minus.bound, Method::FeketeBound),
            "n_max": plus.n_max,
        }),
    );
    report.note(format!(
        "alpha+ = {} ({:?}), alpha- = {} ({:?})",
        format_rational(&plus.value()),
        plus.method(),
        format_rational(&minus.value()),
        minus.method()
    ));

    let dev = deviations(&profile, &plus, &minus);
    report.push("deviations", serde_json::to_value(&dev).expect("serializable"));
    if dev.method == Method::Exact && !dev.signs_hold() {
        report.violation("deviations", "deviation signs fail against exact slopes".into());
    }

    let sp = spread(&profile)?;
    report.push(
        "spread",
        json!({
            "fekete_upper": rational_claim(&sp.fekete_upper, Method::FeketeBound),
            "formula": rational_claim(&sp.formula, sp.formula_method),
            "agree": sp.agree,
            "range_distorted": sp.range_distorted,
        }),
    );
    report.note(format!(
        "spread A <= {} (formula {}), range distorted: {}",
        format_rational(&sp.fekete_upper),
        format_rational(&sp.formula),
        sp.range_distorted
    ));
    let rh = rho(&profile)?;
    report.push(
        "rho",
        json!({
            "upper": rational_claim(&rh.upper, Method::FeketeBound),
            "lower_sandwich": rh.lower_sandwich,
            "upper_sandwich": rh.upper_sandwich,
            "pointwise": rh.pointwise,
        }),
    );

    if let Some(order) = report.absorb("order", detect_finite_order(coder, n_max))? {
        report.note(format!("order: {}", serde_json::to_string(&order).expect("serializable")));
        report.push("order", json!({ "method": "exact", "report": order }));
    }
    Ok(())
}

/// Pattern counts on rectangles and the entropy inequality.
pub fn entropy(run: &Run) -> Result<Report> {
    let mut report = run.report();
    let system = run.system()?;
    let a = &run.definition.analysis;
    let mut coder = Coder::new(&system, run.budget);
    let Some(profile) = report.absorb("profile", coder.profile(a.n_max, ProfileOptions { with_ell: true, ..Default::default() }))? else {
        return Ok(report);
    };
    let sp = spread(&profile)?;
    let grid = phi_entropy(&mut coder, &a.rect_m, &a.rect_n)?;
    if let Some(r) = &grid.exhausted {
        report.exhausted("entropy_grid", r);
    }
    report.push("entropy_grid", json!({ "method": "estimate", "grid": grid }));
    let h = system.spec().entropy()?.entropy;
    let ineq = check_entropy_inequality(&grid, sp.fekete_upper, h, ENTROPY_SLACK);
    report.push(
        "entropy_inequality",
        json!({ "spread_upper": rational_claim(&sp.fekete_upper, Method::FeketeBound), "slack": ENTROPY_SLACK, "check": ineq }),
    );
    if let Some((m, n)) = grid.working {
        let c = grid.cell(m, n).expect("working cell exists");
        report.note(format!("entropy estimate {:.6} at m = {m}, n = {n}", c.estimate));
    }
    if !ineq.holds() {
        report.violation("entropy_inequality", "some rectangle exceeds the entropy bound".into());
    } else {
        report.note(format!("entropy inequality holds on {} cells", ineq.rows.len()));
    }
    Ok(report)
}

/// Directional probes for the configured slopes.
pub fn probe(run: &Run) -> Result<Report> {
    let mut report = run.report();
    let system = run.system()?;
    let a = &run.definition.analysis;
    let mut coder = Coder::new(&system, run.budget);
    let opts = ProbeOptions { r_max: a.radius, ..ProbeOptions::default() };
    let Some(probes) = report.absorb("probe", probe_slopes(&mut coder, &a.slopes, opts))? else { return Ok(report) };
    for p in probes {
        let radii: Vec<Value> = p
            .radii
            .iter()
            .map(|r| {
                let method = match r.verdict {
                    RadiusVerdict::Certified => "exact",
                    RadiusVerdict::Evidence => "estimate",
                    _ => "estimate",
                };
                json!({
                    "r": r.r,
                    "verdict": r.verdict,
                    "method": method,
                    "certificate_cells": r.certificate.as_ref().map(|c| c.cells.len()),
                    "evidence": r.evidence,
                })
            })
            .collect();
        report.note(format!("direction {}: {:?}", p.direction.label(), p.verdict));
        if p.radii.iter().any(|r| r.verdict == RadiusVerdict::Conflict) {
            report.violation("probe", format!("certificate and evidence coexist for {}", p.direction.label()));
        }
        let method = if p.verdict == ProbeVerdict::PositivelyExpansive { "exact" } else { "estimate" };
        report.push("probe", json!({ "direction": p.direction, "verdict": p.verdict, "method": method, "radii": radii }));
    }
    Ok(report)
}

/// A spacetime diagram from an impulse with the measured cone drawn on top.
pub fn spacetime(run: &Run) -> Result<Report> {
    let mut report = run.report();
    let system = run.system()?;
    let n_max = run.definition.analysis.n_max;
    let mut coder = Coder::new(&system, run.budget);
    let rows = 2 * n_max + 1;
    let range = system.rule().range().max(1) as usize;
    let margin = rows * range + 2;
    let len = 2 * margin + (rows - 1) * (system.rule().span() - 1) + 1;
    let mut base = system.some_word(len);
    let centre = len / 2;
    if system.spec().is_full() {
        base.iter_mut().for_each(|a| *a = 0);
        base[centre] = 1.min(system.spec().alphabet() as u8 - 1);
    }
    let rect = generate_rect(&system, &base, -(centre as i64), 0, rows)?;
    let mut cone = vec![ConeEdge { row: 0, left: 0, right: 0 }];
    for n in 1..=n_max.min(rows - 1) {
        match report.absorb("spacetime_cone", coder.w_plus(n).and_then(|p| Ok((p, coder.w_minus(n)?))))? {
            Some((p, m)) => cone.push(ConeEdge { row: n as i64, left: m, right: p }),
            None => break,
        }
    }
    let alphabet = system.spec().alphabet();
    report.files.push(("spacetime.pgm".into(), pgm(&rect, alphabet)));
    report.files.push(("spacetime.svg".into(), svg(&rect, alphabet, &cone, 6)));
    let edges: Vec<Value> = cone.iter().map(|e| json!({ "n": e.row, "w_minus": e.left, "w_plus": e.right })).collect();
    report.push(
        "diagram",
        json!({ "files": ["spacetime.pgm", "spacetime.svg"], "rows": rows, "cone": edges, "method": "exact" }),
    );
    if let Some(ws) = report.absorb("edge_witnesses", edge_witnesses(&mut coder, n_max.min(4)))? {
        let bad = ws.iter().filter(|w| !w.replayed).count();
        report.push("edge_witnesses", json!({ "method": "exact", "witnesses": ws }));
        if bad > 0 {
            report.violation("edge_witnesses", format!("{bad} witnesses failed to replay"));
        } else {
            report.note(format!("{} edge witnesses replayed", ws.len()));
        }
    }
    Ok(report)
}

/// Full property suite for one system.
pub fn verify(run: &Run) -> Result<Report> {
    let mut report = run.report();
    let system = run.system()?;
    verify_into(&mut report, &system, run.budget, run.definition.analysis.n_max, "definition")?;
    Ok(report)
}

fn verify_into(report: &mut Report, system: &System, budget: Budget, n_max: usize, name: &str) -> Result<()> {
    system_record(report, system, &budget)?;
    let mut coder = Coder::new(system, budget);
    analyze_into(report, &mut coder, n_max)?;

    if system.spec().is_full() {
        let mut failures = Vec::new();
        for n in 1..=n_max {
            match report.absorb("level_coding", coder.verify_level_coding(n))? {
                Some(true) => {}
                Some(false) => failures.push(n),
                None => break,
            }
        }
        report.push("level_coding", json!({ "system": name, "method": "exact", "failures": failures }));
        if !failures.is_empty() {
            report.violation("level_coding", format!("{name}: levels {failures:?} do not code the origin"));
        }
    }

    if let Some(ws) = report.absorb("edge_witnesses", edge_witnesses(&mut coder, n_max.min(4)))? {
        if ws.iter().any(|w| !w.replayed) {
            report.violation("edge_witnesses", format!("{name}: witness failed to replay"));
        }
    }

    let inverse = if system.is_product() {
        None
    } else {
        find_inverse(system.rule(), system.spec(), 3, budget.table_cap)?
            .map(|r| System::new(system.spec().clone(), r))
            .transpose()?
    };
    let partners = if system.is_product() { Vec::new() } else { vec![system.shifted(1)?] };
    let inputs = SuiteInputs { n_max: n_max.min(4), shifts: &[-1, 1, 2], powers: &[2], partners: &partners, inverse: inverse.as_ref() };
    if let Some(suite) = report.absorb("suite", property_suite(system, budget, &inputs))? {
        for item in suite.items.iter().filter(|i| i.status == ItemStatus::Fail) {
            report.violation("suite", format!("{name}: {} ({})", item.name, item.detail));
        }
        report.push("suite", json!({ "system": name, "method": "exact", "items": suite.items }));
        report.note(format!("{name}: property suite {}", if suite.all_pass() { "passed" } else { "FAILED" }));
    }
    Ok(())
}

/// Property suite over the builtin corpus.
pub fn verify_corpus(budget: Budget, n_max: usize) -> Result<Report> {
    let mut report = Report::new(&budget, n_max, None);
    for e in builders::corpus() {
        let system = e.build()?;
        report.push("corpus_entry", json!({ "name": e.name, "builder": e.builder, "params": e.params }));
        verify_into(&mut report, &system, budget, n_max, e.name)?;
    }
    Ok(report)
}

/// The builtin corpus as canonical definitions.
pub fn examples() -> Vec<(String, String)> {
    builders::corpus()
        .into_iter()
        .map(|e| (e.name.to_string(), SystemDefinition::from_builder(e.builder, &e.params).print()))
        .collect()
}
