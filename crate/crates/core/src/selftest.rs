//! Seeded self-check suites over random corpora.
//!
//! Each suite returns a report of named checks with instance counts. The
//! acceptance target and the `selftest` command both run these.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::analysis::{consequence, integral_state, provability_degree, truth_degree, unit_norm, Verdict};
use crate::corpus::{self, FormulaSampler, ScalarPool};
use crate::duality::{certify, presentation_of, zero_set, zero_set_of, AlgebraClass, ZeroSet};
use crate::error::{Error, Result};
use crate::formula::{eval, parse, Formula};
use crate::geometry::{polyhedron_equal, RationalPolyhedron, Simplex};
use crate::limits::{check_limit, sandwich, FormulaSequence, LimitMode, Schedule, Terms};
use crate::par;
use crate::pwl::{compile_exact, pwl_le, sup_difference, CoefficientClass, PwlFunction};
use crate::scalar::{format_rational, pow2_neg, rat, truncated_diff, CReal, Rational, Scalar};

pub const SUITES: [&str; 10] = [
    "axioms",
    "pavelka",
    "oracle",
    "bookkeeping",
    "integral",
    "sandwich",
    "limits",
    "duality",
    "mvgen",
    "consequence",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub instances: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        SuiteReport { suite: suite.to_owned(), seed, passed: checks.iter().all(|c| c.passed), checks }
    }
}

fn check(name: &str, instances: usize, failure: Option<String>) -> Check {
    Check { name: name.to_owned(), instances, passed: failure.is_none(), detail: failure }
}

/// Runs `test` on each item, keeping the first failure message.
fn all_of<T: Sync>(items: &[T], test: impl Fn(&T) -> Result<Option<String>> + Sync + Send) -> Option<String> {
    par::map_coarse(items, |t| test(t).unwrap_or_else(|e| Some(format!("error: {e}"))))
        .into_iter()
        .flatten()
        .next()
}

pub fn run(suite: &str, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        "axioms" => axioms(seed),
        "pavelka" => pavelka(seed),
        "oracle" => oracle(seed),
        "bookkeeping" => bookkeeping(seed),
        "integral" => integral(seed),
        "sandwich" => sandwich_convergence(),
        "limits" => limits(),
        "duality" => duality(seed),
        "mvgen" => mvgen(seed),
        "consequence" => consequences(seed),
        other => {
            return Err(Error::invalid(format!("unknown suite {other:?} (expected one of {})", SUITES.join(", "))))
        }
    };
    Ok(SuiteReport::new(suite, seed, checks))
}

fn scalar(r: Rational) -> Scalar {
    Scalar::rational(r).expect("unit rational")
}

fn eta(r: &Rational) -> Formula {
    Formula::eta(scalar(r.clone()))
}

fn is_tautology(phi: &Formula) -> Result<Option<String>> {
    let d = truth_degree(phi, 0)?;
    Ok((d.exact_value() != Some(&Rational::one())).then(|| format!("{phi}: truth degree {}", d.to_json())))
}

/// 50 instances of each axiom scheme of Ł and of the scalar axioms.
pub fn axioms(seed: u64) -> Vec<Check> {
    const PER_AXIOM: usize = 50;
    let mut rng = corpus::rng(seed);
    let mut instances: Vec<(&str, Formula)> = Vec::new();
    for _ in 0..PER_AXIOM {
        let arity = rng.gen_range(1..=3);
        let s = FormulaSampler::new(arity, 5, ScalarPool::Rational(6));
        let (a, b, c) = (s.sample(&mut rng), s.sample(&mut rng), s.sample(&mut rng));
        let r = corpus::unit_rational(&mut rng, 8);
        let q = corpus::unit_rational(&mut rng, 8);
        use Formula as F;
        let nab = |r: &Rational, x: Formula| F::nabla(scalar(r.clone()), x);
        instances.push(("L1", F::imp(a.clone(), F::imp(b.clone(), a.clone()))));
        instances.push((
            "L2",
            F::imp(F::imp(a.clone(), b.clone()), F::imp(F::imp(b.clone(), c.clone()), F::imp(a.clone(), c.clone()))),
        ));
        instances.push(("L3", F::imp(F::vee(a.clone(), b.clone()), F::vee(b.clone(), a.clone()))));
        instances.push(("L4", F::imp(F::imp(F::neg(b.clone()), F::neg(a.clone())), F::imp(a.clone(), b.clone()))));
        instances.push((
            "R1",
            F::equiv(nab(&r, F::imp(a.clone(), b.clone())), F::imp(nab(&r, a.clone()), nab(&r, b.clone()))),
        ));
        let r_odot_not_q = truncated_diff(&r, &q);
        instances.push(("R2", F::equiv(nab(&r_odot_not_q, a.clone()), F::imp(nab(&q, a.clone()), nab(&r, a.clone())))));
        instances.push(("R3", F::equiv(nab(&r, nab(&q, a.clone())), nab(&(&r * &q), a.clone()))));
        instances.push(("R4", F::equiv(nab(&Rational::one(), a.clone()), a)));
    }
    let results = par::map_coarse(&instances, |(_, phi)| is_tautology(phi).unwrap_or_else(|e| Some(e.to_string())));
    ["L1", "L2", "L3", "L4", "R1", "R2", "R3", "R4"]
        .iter()
        .map(|name| {
            let failure = instances
                .iter()
                .zip(&results)
                .filter(|((n, _), _)| n == name)
                .find_map(|(_, r)| r.clone());
            check(name, PER_AXIOM, failure)
        })
        .collect()
}

/// Per-axis coordinate sets of every vertex, as a grid.
fn vertex_grid(f: &PwlFunction) -> Vec<Vec<Rational>> {
    let mut axes: Vec<BTreeSet<Rational>> = vec![BTreeSet::new(); f.dim()];
    for c in f.cells() {
        for v in c.vertices() {
            for (axis, x) in axes.iter_mut().zip(v) {
                axis.insert(x.clone());
            }
        }
    }
    axes.into_iter().map(|a| a.into_iter().collect()).collect()
}

fn grid_min(phi: &Formula, axes: &[Vec<Rational>]) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    let mut idx = vec![0usize; axes.len()];
    loop {
        let p: Vec<Rational> = idx.iter().zip(axes).map(|(&i, a)| a[i].clone()).collect();
        let v = eval(phi, &p)?;
        if best.as_ref().is_none_or(|b| &v < b) {
            best = Some(v);
        }
        let Some(pos) = (0..axes.len()).find(|&j| idx[j] + 1 < axes[j].len()) else { break };
        idx[pos] += 1;
        idx[..pos].iter_mut().for_each(|i| *i = 0);
    }
    Ok(best.expect("nonempty grid"))
}

/// Provability degree equals truth degree, and both equal a brute-force
/// grid minimum.
pub fn pavelka(seed: u64) -> Vec<Check> {
    const COUNT: usize = 200;
    let mut rng = corpus::rng(seed);
    let formulas: Vec<Formula> = (0..COUNT)
        .map(|_| {
            let arity = rng.gen_range(1..=3);
            FormulaSampler::new(arity, 4, ScalarPool::Rational(6)).sample(&mut rng)
        })
        .collect();
    let failure = all_of(&formulas, |phi| {
        let t = truth_degree(phi, 0)?;
        let p = provability_degree(phi, 0)?;
        if t != p {
            return Ok(Some(format!("{phi}: truth {} vs provability {}", t.to_json(), p.to_json())));
        }
        let f = compile_exact(phi, phi.arity())?;
        let g = grid_min(phi, &vertex_grid(&f))?;
        Ok((t.exact_value() != Some(&g)).then(|| format!("{phi}: grid minimum {}", format_rational(&g))))
    });
    vec![check("provability = truth = grid minimum", COUNT, failure)]
}

/// Compiled functions agree with recursive evaluation.
pub fn oracle(seed: u64) -> Vec<Check> {
    const COUNT: usize = 1000;
    let mut rng = corpus::rng(seed);
    let pairs: Vec<(Formula, Vec<Rational>)> = (0..COUNT)
        .map(|_| {
            let arity = rng.gen_range(1..=3);
            let phi = FormulaSampler::new(arity, 5, ScalarPool::Rational(6)).sample(&mut rng);
            let x = corpus::point(&mut rng, phi.arity(), 12);
            (phi, x)
        })
        .collect();
    let failure = all_of(&pairs, |(phi, x)| {
        let f = compile_exact(phi, phi.arity())?;
        let (a, b) = (f.eval(x)?, eval(phi, x)?);
        Ok((a != b).then(|| format!("{phi} at {x:?}: compiled {a}, recursive {b}")))
    });
    vec![check("compile = eval", COUNT, failure)]
}

/// The laws of the constants `η_r`.
pub fn bookkeeping(seed: u64) -> Vec<Check> {
    const COUNT: usize = 100;
    let mut rng = corpus::rng(seed);
    let pairs: Vec<(Rational, Rational)> = (0..COUNT)
        .map(|i| {
            let r = corpus::unit_rational(&mut rng, 16);
            let q = if i % 10 == 0 { r.clone() } else { corpus::unit_rational(&mut rng, 16) };
            (r, q)
        })
        .collect();
    let law = |name: &str, build: &(dyn Fn(&Rational, &Rational) -> Formula + Sync)| {
        check(name, COUNT, all_of(&pairs, |(r, q)| is_tautology(&build(r, q))))
    };
    let one = Rational::one();
    vec![
        law("(c) ¬η_r ↔ η_{r*}", &|r, _| Formula::equiv(Formula::neg(eta(r)), eta(&(&one - r)))),
        law("(d) (η_r → η_q) ↔ η_{r→q}", &|r, q| {
            let imp = (&one - r + q).min(one.clone());
            Formula::equiv(Formula::imp(eta(r), eta(q)), eta(&imp))
        }),
        law("(e) Δ_r η_q ↔ η_{rq}", &|r, q| Formula::equiv(Formula::delta(scalar(r.clone()), eta(q)), eta(&(r * q)))),
        check(
            "(g) e(η_r) = r",
            COUNT,
            all_of(&pairs, |(r, _)| {
                let lo = truth_degree(&eta(r), 0)?;
                let hi = unit_norm(&eta(r), 0)?;
                Ok((lo.exact_value() != Some(r) || hi.exact_value() != Some(r)).then(|| format!("η_{r}")))
            }),
        ),
        check(
            "(h) r ≤ q iff ⊢ η_r → η_q",
            COUNT,
            all_of(&pairs, |(r, q)| {
                let taut = truth_degree(&Formula::imp(eta(r), eta(q)), 0)?.exact_value() == Some(&one);
                Ok((taut != (r <= q)).then(|| format!("r = {r}, q = {q}")))
            }),
        ),
    ]
}

/// `I(v1) = 1/2`, `I(v1 ⊕ v1) = 3/4` and `⊢ ¬φ iff I(φ) = 0`.
pub fn integral(seed: u64) -> Vec<Check> {
    let exact = |src: &str, want: Rational| -> Option<String> {
        match integral_state(&parse(src).expect("valid"), 0) {
            Ok(d) if d.exact_value() == Some(&want) => None,
            Ok(d) => Some(format!("I({src}) = {}", d.to_json())),
            Err(e) => Some(e.to_string()),
        }
    };
    let mut rng = corpus::rng(seed);
    let mut corpus_ = Vec::new();
    for i in 0..50 {
        let s = FormulaSampler::new(rng.gen_range(1..=2), 3, ScalarPool::Rational(4));
        let a = s.sample(&mut rng);
        corpus_.push(match i % 3 {
            // identically zero
            0 => Formula::odot(a.clone(), Formula::neg(a)),
            // nonnegative, zero on a proper part of the cube
            1 => Formula::odot(a.clone(), a),
            _ => a,
        });
    }
    let zero_count = std::sync::atomic::AtomicUsize::new(0);
    let failure = all_of(&corpus_, |phi| {
        let zero = integral_state(phi, 0)?.exact_value() == Some(&Rational::zero());
        let refuted = truth_degree(&Formula::neg(phi.clone()), 0)?.exact_value() == Some(&Rational::one());
        if zero {
            zero_count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
        Ok((zero != refuted).then(|| format!("{phi}: I = 0 is {zero}, ⊢ ¬φ is {refuted}")))
    });
    let zeros = zero_count.into_inner();
    let both = (zeros > 0 && zeros < corpus_.len()).then_some(()).map_or_else(
        || Some(format!("corpus exercises one direction only ({zeros} zero integrals)")),
        |_| None,
    );
    vec![
        check("I(v1) = 1/2", 1, exact("v1", rat(1, 2))),
        check("I(v1 ⊕ v1) = 3/4", 1, exact("v1 + v1", rat(3, 4))),
        check("⊢ ¬φ iff I(φ) = 0", corpus_.len(), failure.or(both)),
    ]
}

/// `1 − √2·x` truncated, written with the scalar `√2/2`.
pub fn sqrt_example() -> Formula {
    let r = Scalar::Real(CReal::sqrt2_over_2());
    let dr = Formula::delta(r, Formula::var(1));
    Formula::neg(Formula::oplus(dr.clone(), dr))
}

fn sandwich_convergence() -> Vec<Check> {
    const K: u32 = 30;
    let phi = sqrt_example();
    let ks: Vec<u32> = (0..=K).collect();
    let envs: Vec<Result<(PwlFunction, PwlFunction)>> = par::map_coarse(&ks, |&k| sandwich(&phi, k));
    let envs: Vec<(PwlFunction, PwlFunction)> = match envs.into_iter().collect() {
        Ok(v) => v,
        Err(e) => return vec![check("envelopes", 0, Some(e.to_string()))],
    };
    let width = ks
        .iter()
        .zip(&envs)
        .find(|(k, (lo, hi))| sup_difference(lo, hi) > pow2_neg(**k))
        .map(|(k, _)| format!("width at k = {k} exceeds 2^-{k}"));
    let monotone = envs
        .windows(2)
        .enumerate()
        .find(|(_, w)| !(pwl_le(&w[0].0, &w[1].0) && pwl_le(&w[1].1, &w[0].1)))
        .map(|(k, _)| format!("envelopes not monotone between k = {k} and {}", k + 1));
    let sqrt = CReal::sqrt2_over_2();
    let enclosure = ks.iter().zip(&envs).find_map(|(&k, (lo, hi))| {
        let (a, b) = (zero_set_of(lo), zero_set_of(hi));
        let (Some(a), Some(b)) = (a.least_vertex(), b.least_vertex()) else {
            return Some(format!("empty enclosure at k = {k}"));
        };
        let (a, b) = (&a[0], &b[0]);
        let (r_lo, r_hi) = sqrt.approx(k);
        let half = rat(1, 2);
        let brackets = a * a <= half && b * b >= half;
        let close = (a - &r_lo).abs() <= pow2_neg(k) && (b - &r_hi).abs() <= pow2_neg(k);
        (!(brackets && close)).then(|| format!("k = {k}: enclosure [{a}, {b}] vs [{r_lo}, {r_hi}]"))
    });
    vec![
        check("‖upper_k − lower_k‖_u ≤ 2^-k", ks.len(), width),
        check("monotone envelopes", ks.len() - 1, monotone),
        check("zero-set enclosure brackets √2/2", ks.len(), enclosure),
    ]
}

fn limits() -> Vec<Check> {
    const N: usize = 30;
    let v1 = parse("v1").expect("valid");
    let ramp = FormulaSequence::new(
        Terms::Ramp { template: "delta[{q}] v1".into(), schedule: Schedule::OneMinusPow2 },
        Some(Schedule::OneMinusPow2),
    );
    let good = match check_limit(&ramp, &v1, N, &LimitMode::Rate) {
        Ok(r) if r.holds => None,
        Ok(r) => Some(format!("fails at n = {}", r.entries.iter().find(|e| !e.holds).map_or(0, |e| e.n))),
        Err(e) => Some(e.to_string()),
    };
    let constant = FormulaSequence::new(Terms::Formulas(vec![v1; N]), Some(Schedule::OneMinusPow2));
    let bad = match check_limit(&constant, &parse("~v1").expect("valid"), N, &LimitMode::Rate) {
        Ok(r) if r.entries.iter().all(|e| !e.holds && e.delta == Rational::one()) => None,
        Ok(_) => Some("wrong target accepted at some index".into()),
        Err(e) => Some(e.to_string()),
    };
    vec![check("Δ_{1−2^-n} v1 → v1 at rate 1 − 2^-n", N, good), check("v1 ↛ ¬v1 at every index", N, bad)]
}

fn duality(seed: u64) -> Vec<Check> {
    let mut rng = corpus::rng(seed);
    let mut polys: Vec<RationalPolyhedron> = (0..50).map(|_| corpus::polyhedron(&mut rng, 2, 3, 6)).collect();
    let point = |x: Rational, y: Rational| Simplex::new(vec![vec![x, y]]).expect("point");
    polys.push(RationalPolyhedron::empty(2));
    polys.push(RationalPolyhedron::new(2, vec![point(rat(1, 3), rat(2, 5))]).expect("valid"));
    polys.push(RationalPolyhedron::new(2, vec![point(rat(0, 1), rat(0, 1)), point(rat(1, 1), rat(1, 1))]).expect("valid"));
    polys.push(RationalPolyhedron::cube(2).expect("valid"));
    let failure = all_of(&polys, |p| {
        let pres = presentation_of(p, AlgebraClass::DMV)?;
        let ZeroSet::Exact(z) = zero_set(&pres) else { return Ok(Some("enclosure for exact data".into())) };
        Ok((!polyhedron_equal(&z, p)).then(|| format!("roundtrip changed {}", p.to_json())))
    });
    vec![check("zero_set ∘ presentation_of = id", polys.len(), failure)]
}

fn mvgen(seed: u64) -> Vec<Check> {
    const COUNT: usize = 100;
    let mut rng = corpus::rng(seed);
    let gens: Vec<Formula> = (0..COUNT)
        .map(|i| {
            let s = FormulaSampler::new(rng.gen_range(1..=2), 3, ScalarPool::Rational(6));
            let a = s.sample(&mut rng);
            if i % 2 == 0 {
                Formula::neg(a)
            } else {
                a
            }
        })
        .collect();
    let failure = all_of(&gens, |phi| {
        let f = compile_exact(phi, phi.arity())?;
        let c = certify(&f)?;
        if !c.is_valid() {
            return Ok(Some(format!("{phi}: invalid certificate (k = {})", c.k)));
        }
        debug_assert_eq!(crate::pwl::coefficient_class(&c.generator), CoefficientClass::Integer);
        Ok((!polyhedron_equal(&zero_set_of(&f), &zero_set_of(&c.generator))).then(|| format!("{phi}: zero sets differ")))
    });
    vec![check("integer witness, same zero set, mutual domination", COUNT, failure)]
}

fn consequences(seed: u64) -> Vec<Check> {
    let f = |s: &str| parse(s).expect("valid");
    let yes = match consequence(&[f("v1")], &f("v1 + v1"), 0) {
        Ok(c) if c.holds() => None,
        other => Some(format!("{other:?}")),
    };
    let no = match consequence(&[f("v1 + v1")], &f("v1"), 0) {
        Ok(c) if c.verdict == Verdict::No && c.witness == Some(vec![rat(1, 2)]) => None,
        other => Some(format!("{other:?}")),
    };
    let mut rng = corpus::rng(seed);
    let mut cases = Vec::new();
    for i in 0..100 {
        let s = FormulaSampler::new(2, 3, ScalarPool::Rational(4));
        let premises: Vec<Formula> = (0..rng.gen_range(1..=2)).map(|_| s.sample(&mut rng)).collect();
        let extra = s.sample(&mut rng);
        // half the conclusions are consequences by construction
        let phi = if i % 2 == 0 { Formula::vee(premises[0].clone(), s.sample(&mut rng)) } else { s.sample(&mut rng) };
        cases.push((premises, extra, phi));
    }
    let held = std::sync::atomic::AtomicUsize::new(0);
    let failure = all_of(&cases, |(premises, extra, phi)| {
        if !consequence(premises, phi, 0)?.holds() {
            return Ok(None);
        }
        held.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let mut grown = premises.clone();
        grown.push(extra.clone());
        Ok((!consequence(&grown, phi, 0)?.holds()).then(|| format!("adding {extra} broke {phi}")))
    });
    let held = held.into_inner();
    vec![
        check("[v1] ⊨ v1 ⊕ v1", 1, yes),
        check("[v1 ⊕ v1] ⊭ v1, witness 1/2", 1, no),
        check(&format!("monotonicity ({held} consequences grown)"), cases.len(), failure),
    ]
}
