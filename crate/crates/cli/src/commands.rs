use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use luka::analysis::{self, ConsequenceResult, DegreeResult};
use luka::duality::{self, AlgebraClass, Generator, MvGenerated, Presentation, Substitution, ZeroSet};
use luka::formula::{evaluate, parse, Formula, Value as EvalValue};
use luka::geometry::{format_point, parse_point, RationalPolyhedron};
use luka::limits::{self, FormulaSequence, LimitMode, LimitReport};
use luka::pwl::{self, coefficient_class, Compiled, PwlFunction};
use luka::scalar::{format_rational, parse_rational, Rational};
use luka::selftest::{self, SuiteReport, SUITES};
use luka::{Error, Result};

use crate::output::{Report, Table};

/// Where the main input of a verb comes from.
#[derive(Debug, Clone, Default)]
pub struct Input {
    pub expr: Option<String>,
    pub file: Option<PathBuf>,
}

impl Input {
    fn text(&self) -> Result<Option<String>> {
        match (&self.expr, &self.file) {
            (Some(_), Some(_)) => Err(Error::Invalid("give either -e or -f, not both".into())),
            (Some(e), None) => Ok(Some(e.clone())),
            (None, Some(p)) => read(p).map(Some),
            (None, None) => Ok(None),
        }
    }

    fn require(&self, what: &str) -> Result<String> {
        self.text()?.ok_or_else(|| Error::Invalid(format!("missing {what}: use -e or -f")))
    }

    fn formula(&self) -> Result<Formula> {
        parse(self.require("formula")?.trim())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n")).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn parse_json(text: &str) -> Value {
    serde_json::from_str(text).expect("core emits valid JSON")
}

fn pwl_json(f: &PwlFunction) -> Value {
    parse_json(&f.to_json())
}

fn polyhedron_json(p: &RationalPolyhedron) -> Value {
    parse_json(&p.to_json())
}

fn compiled_json(c: &Compiled) -> Value {
    match c {
        Compiled::Exact(f) => pwl_json(f),
        Compiled::Interval(iv) => {
            json!({ "precision": iv.precision, "lower": pwl_json(&iv.lower), "upper": pwl_json(&iv.upper) })
        }
    }
}

/// Writes the compiled function of `phi` when `--dump-pwl` is given.
fn dump_compiled(phi: &Formula, k: u32, dump: Option<&Path>) -> Result<()> {
    match dump {
        Some(path) => write(path, &compiled_json(&pwl::compile(phi, k)?).to_string()),
        None => Ok(()),
    }
}

pub fn eval(input: &Input, point: Option<&str>, k: u32) -> Result<Report> {
    let phi = input.formula()?;
    let coords: Vec<&str> = match point {
        Some(p) if !p.trim().is_empty() => p.split(',').map(str::trim).collect(),
        _ => Vec::new(),
    };
    let x = parse_point(&coords)?;
    let body = match evaluate(&phi, &x, k)? {
        EvalValue::Exact(v) => json!({ "kind": "exact", "value": format_rational(&v) }),
        EvalValue::Interval { interval, precision } => json!({
            "kind": "interval",
            "lo": format_rational(&interval.lo),
            "hi": format_rational(&interval.hi),
            "precision": precision,
        }),
    };
    Ok(Report::new(&body))
}

#[derive(Debug, Clone, Copy)]
pub enum Degree {
    Truth,
    Provability,
    UnitNorm,
    Integral,
}

pub fn degree(which: Degree, input: &Input, k: u32, dump: Option<&Path>) -> Result<Report> {
    let phi = input.formula()?;
    let d: DegreeResult = match which {
        Degree::Truth => analysis::truth_degree(&phi, k)?,
        Degree::Provability => analysis::provability_degree(&phi, k)?,
        Degree::UnitNorm => analysis::unit_norm(&phi, k)?,
        Degree::Integral => analysis::integral_state(&phi, k)?,
    };
    dump_compiled(&phi, k, dump)?;
    Ok(Report::new(&d.to_json_value()))
}

fn formulas(sources: &[String]) -> Result<Vec<Formula>> {
    sources.iter().map(|s| parse(s.trim())).collect()
}

pub fn consequence(premises: &[String], input: &Input, k: u32) -> Result<Report> {
    let phi = input.formula()?;
    let ConsequenceResult { verdict, witness, value, precision } = analysis::consequence(&formulas(premises)?, &phi, k)?;
    let mut body = json!({ "verdict": verdict, "holds": verdict == analysis::Verdict::Yes });
    if let Some(w) = witness {
        body["witness"] = json!(format_point(&w));
    }
    if let Some(v) = value {
        body["value"] = json!(format_rational(&v));
    }
    if let Some(p) = precision {
        body["precision"] = json!(p);
    }
    Ok(Report::new(&body))
}

/// Premises come from `--premise` and from the lines of `-f` / the `-e` text.
pub fn consistent(premises: &[String], input: &Input) -> Result<Report> {
    let mut all = premises.to_vec();
    if let Some(text) = input.text()? {
        all.extend(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_owned));
    }
    let body = match analysis::consistent(&formulas(&all)?)? {
        Some(model) => json!({ "consistent": true, "model": format_point(&model) }),
        None => json!({ "consistent": false }),
    };
    Ok(Report::new(&body))
}

pub struct LimitArgs<'a> {
    pub sequence: &'a Path,
    pub target: &'a Input,
    pub rate: bool,
    pub threshold: Option<&'a str>,
    pub upto: usize,
}

pub fn limit_check(args: LimitArgs<'_>) -> Result<Report> {
    let seq = FormulaSequence::from_json(&read(args.sequence)?)?;
    let target = args.target.formula()?;
    let mode = match (args.rate, args.threshold) {
        (true, None) => LimitMode::Rate,
        (false, Some(r)) => LimitMode::Threshold(parse_rational(r)?),
        (true, Some(_)) => return Err(Error::Invalid("--rate and --threshold are exclusive".into())),
        (false, None) => return Err(Error::Invalid("limit-check needs --rate or --threshold r".into())),
    };
    if args.upto == 0 {
        return Err(Error::Invalid("--upto must be at least 1".into()));
    }
    let report: LimitReport = limits::check_limit(&seq, &target, args.upto, &mode)?;
    let mut body = serde_json::to_value(&report).expect("serializable");
    body["upto"] = json!(args.upto);
    match &mode {
        LimitMode::Rate => body["mode"] = json!("rate"),
        LimitMode::Threshold(r) => {
            body["mode"] = json!("threshold");
            body["threshold"] = json!(format_rational(r));
        }
    }
    let rows = report
        .entries
        .iter()
        .map(|e| vec![e.n.to_string(), format_rational(&e.delta), format_rational(&e.bound), e.holds.to_string()])
        .collect();
    Ok(Report::with_table(&body, Table { header: vec!["n", "delta", "bound", "holds"], rows }))
}

pub fn sandwich(input: &Input, k: u32, dump: Option<&Path>) -> Result<Report> {
    let phi = input.formula()?;
    let (lower, upper) = limits::sandwich(&phi, k)?;
    if let Some(path) = dump {
        write(path, &json!({ "precision": k, "lower": pwl_json(&lower), "upper": pwl_json(&upper) }).to_string())?;
    }
    let body = json!({
        "precision": k,
        "width": format_rational(&pwl::sup_difference(&lower, &upper)),
        "scalars": phi.scalar_count(),
        "lower": { "cells": lower.len(), "min": format_rational(&lower.min().0), "max": format_rational(&lower.max().0) },
        "upper": { "cells": upper.len(), "min": format_rational(&upper.min().0), "max": format_rational(&upper.max().0) },
    });
    Ok(Report::new(&body))
}

/// Samples file: `{"n": .., "m": .., "lipschitz": "p/q", "samples": ["p/q", ..]}`.
pub fn approx(input: &Input, dump: Option<&Path>) -> Result<Report> {
    #[derive(serde::Deserialize)]
    struct Samples {
        n: usize,
        m: usize,
        lipschitz: String,
        samples: Vec<String>,
    }
    let file: Samples =
        serde_json::from_str(&input.require("samples file")?).map_err(|e| Error::Invalid(e.to_string()))?;
    let samples: Vec<Rational> = file.samples.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
    let (f, bound) = limits::approximate_continuous(&samples, file.n, file.m, &parse_rational(&file.lipschitz)?)?;
    if let Some(path) = dump {
        write(path, &f.to_json())?;
    }
    Ok(Report::new(&json!({ "bound": format_rational(&bound), "cells": f.len(), "function": pwl_json(&f) })))
}

/// The smallest class whose coefficients admit `phi`.
fn natural_class(p: &Formula, k: u32) -> Result<AlgebraClass> {
    Ok(match pwl::compile(p, k)? {
        Compiled::Interval(_) => AlgebraClass::RMV,
        Compiled::Exact(f) if coefficient_class(&f) == pwl::CoefficientClass::Integer => AlgebraClass::MV,
        Compiled::Exact(_) => AlgebraClass::DMV,
    })
}

/// A presentation from `-f file.json`, or from `-e formula` with an
/// optional class.
fn presentation(input: &Input, class: Option<&str>, k: u32) -> Result<Presentation> {
    if let (None, Some(path)) = (&input.expr, &input.file) {
        let text = read(path)?;
        if text.trim_start().starts_with('{') {
            if class.is_some() {
                return Err(Error::Invalid("--class conflicts with the class in the presentation file".into()));
            }
            return Presentation::from_json(&text, k);
        }
    }
    let phi = input.formula()?;
    let class = match class {
        Some(c) => c.parse()?,
        None => natural_class(&phi, k)?,
    };
    Presentation::from_formula(class, phi.arity(), &phi, k)
}

pub fn zeroset(input: &Input, class: Option<&str>, k: u32) -> Result<Report> {
    let p = presentation(input, class, k)?;
    let body = match duality::zero_set(&p) {
        ZeroSet::Exact(z) => json!({ "kind": "exact", "polyhedron": polyhedron_json(&z) }),
        ZeroSet::Enclosure { outer, inner, precision } => json!({
            "kind": "enclosure",
            "precision": precision,
            "outer": polyhedron_json(&outer),
            "inner": polyhedron_json(&inner),
        }),
    };
    Ok(Report::new(&body))
}

pub fn present(input: &Input, class: Option<&str>, dump: Option<&Path>) -> Result<Report> {
    let poly = RationalPolyhedron::from_json(&input.require("polyhedron file")?)?;
    let class = class.map(str::parse).transpose()?.unwrap_or(AlgebraClass::DMV);
    let p = duality::presentation_of(&poly, class)?;
    if let (Some(path), Generator::Exact(f)) = (dump, p.generator()) {
        write(path, &f.to_json())?;
    }
    Ok(Report::new(&p.to_json_value()))
}

pub fn mvgen(input: &Input, class: Option<&str>, k: u32, dump: Option<&Path>) -> Result<Report> {
    let p = presentation(input, class, k)?;
    let body = match duality::is_mv_generated(&p)? {
        MvGenerated::Yes(_) => {
            let Generator::Exact(f) = p.generator() else {
                return Err(Error::Internal("exact verdict for an interval generator".into()));
            };
            let cert = duality::certify(f)?;
            if !cert.is_valid() {
                return Err(Error::Internal("MV generator certificate failed".into()));
            }
            if let Some(path) = dump {
                write(path, &cert.generator.to_json())?;
            }
            json!({
                "verdict": "yes",
                "k": cert.k.to_string(),
                "generator": pwl_json(&cert.generator),
                "certificate": { "below": cert.below, "dominated": cert.dominated, "integer": cert.integer },
            })
        }
        MvGenerated::Unknown { outer, inner, precision } => json!({
            "verdict": "unknown",
            "precision": precision,
            "outer": polyhedron_json(&outer),
            "inner": polyhedron_json(&inner),
        }),
    };
    Ok(Report::new(&body))
}

pub fn extend(input: &Input, class: Option<&str>, to: &str, k: u32) -> Result<Report> {
    let p = presentation(input, class, k)?;
    let q = duality::extend_scalars(&p, to.parse()?)?;
    if duality::zero_set(&p) != duality::zero_set(&q) {
        return Err(Error::Internal("scalar extension changed the zero set".into()));
    }
    Ok(Report::new(&q.to_json_value()))
}

/// Substitution from `-f file.json`, or `-e` holding the same JSON text.
pub fn subst_check(input: &Input) -> Result<Report> {
    let sigma = Substitution::from_json(&input.require("substitution")?)?;
    let offender = duality::is_mv_preserving(&sigma)?;
    if offender != duality::is_mv_preserving_by_composition(&sigma)? {
        return Err(Error::Internal("image test and composition test disagree".into()));
    }
    let body = match offender {
        None => json!({ "mv_preserving": true }),
        Some(i) => json!({ "mv_preserving": false, "offender": format!("v{i}") }),
    };
    Ok(Report::new(&body))
}

pub fn selftest(suite: Option<&str>, seed: u64) -> Result<(Report, bool)> {
    let names: Vec<&str> = match suite {
        None | Some("all") => SUITES.to_vec(),
        Some(s) => vec![s],
    };
    let reports: Vec<SuiteReport> = names.iter().map(|s| selftest::run(s, seed)).collect::<Result<_>>()?;
    let passed = reports.iter().all(|r| r.passed);
    let rows = reports
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| {
                vec![
                    r.suite.clone(),
                    r.seed.to_string(),
                    c.name.clone(),
                    c.instances.to_string(),
                    c.passed.to_string(),
                    c.detail.clone().unwrap_or_default(),
                ]
            })
        })
        .collect();
    let table = Table { header: vec!["suite", "seed", "check", "instances", "passed", "detail"], rows };
    let body = match reports.as_slice() {
        [one] => serde_json::to_value(one).expect("serializable"),
        many => json!({ "seed": seed, "passed": passed, "suites": many }),
    };
    Ok((Report::with_table(&body, table), passed))
}
