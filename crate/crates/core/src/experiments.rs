//! Seeded drivers that check predictability identities on concrete data
//! and return [`Report`]s.
//!
//! Bernoulli sequences come from `ChaCha8Rng::seed_from_u64(seed)`: digit
//! `i` is 1 iff the `i`-th `next_u64()` output is below `floor(p * 2^64)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bitseq::{extract_p, sum_s, BitSeq};
use crate::combinators::{self, reference, LiftKind};
use crate::error::{Error, Result};
use crate::estimator::{best_predictor, empirical_i};
use crate::machine::{phi0, phi1, MooreMachine, PredictorClass, StateId};
use crate::report::Report;
use crate::{ratio, to_f64, Rational};

/// Default tolerance for `2 * 10^5`-digit Bernoulli experiments.
pub const DEFAULT_TOL: f64 = 0.015;

pub fn bernoulli_generate(p: f64, n: usize, seed: u64) -> Result<BitSeq> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability must lie in [0, 1], got {p}")));
    }
    // p * 2^64 is exact in f64; the threshold 2^64 makes every digit 1.
    let threshold = (p * 18446744073709551616.0).floor() as u128;
    let threshold = if p == 1.0 { 1u128 << 64 } else { threshold };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| (rng.next_u64() as u128) < threshold).collect())
}

fn constants() -> PredictorClass {
    PredictorClass::new("constants", [phi0(), phi1()])
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::invalid(format!("tolerance must be a nonnegative number, got {tol}")));
    }
    Ok(())
}

/// Empirical predictability of a Bernoulli(p) sample against `cls`
/// compared with `min(p, 1 - p)`.
pub fn verify_bernoulli_theorem(p: f64, n: usize, seed: u64, cls: &PredictorClass, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    if !cls.contains(&phi0()) || !cls.contains(&phi1()) {
        return Err(Error::invalid(format!("class {} must contain both constant predictors", cls.label())));
    }
    let a = bernoulli_generate(p, n, seed)?;
    let i_cls = empirical_i(&a, cls, n)?;
    let i_const = empirical_i(&a, &constants(), n)?;
    let target = p.min(1.0 - p);
    let dev = (to_f64(&i_cls) - target).abs();
    let gain = to_f64(&i_const) - to_f64(&i_cls);

    let mut r = Report::new("bernoulli");
    r.input("p", p).input("n", n).input("seed", seed).input("class", cls.label()).input("tol", tol);
    r.quantity("target_min_p_q", target)
        .quantity("I_class", i_cls)
        .quantity("I_constants", i_const)
        .quantity("ones_fraction", Rational::new(a.count_ones() as i64, n as i64))
        .quantity("improvement_over_constants", gain);
    r.verdict("estimate_matches_min_p_q", dev <= tol, Some(tol - dev), &["I_class", "target_min_p_q"], "");
    r.verdict(
        "no_member_beats_min_p_q",
        to_f64(&i_cls) >= target - tol,
        Some(to_f64(&i_cls) - target + tol),
        &["I_class", "target_min_p_q"],
        "",
    );
    Ok(r)
}

/// Predictability of both sums of a Bernoulli(p) sample against the
/// constants, compared with `2p(1 - p)`.
pub fn verify_xor_relation(p: f64, n: usize, seed: u64, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probability must lie in (0, 1), got {p}")));
    }
    let a = bernoulli_generate(p, n, seed)?;
    let i_a = empirical_i(&a, &constants(), n)?;
    let target = 2.0 * p * (1.0 - p);
    let ia = to_f64(&i_a);

    let mut r = Report::new("xor-relation");
    r.input("p", p).input("n", n).input("seed", seed).input("tol", tol);
    r.quantity("I_a", i_a)
        .quantity("target_2p_1mp", target)
        .quantity("from_I_a", 2.0 * ia - 2.0 * ia * ia);
    for nu in 1..=2 {
        let b = sum_s(&a, nu)?;
        let key = format!("I_S{nu}");
        let v = empirical_i(&b, &constants(), b.len())?;
        let dev = (to_f64(&v) - target).abs();
        r.quantity(key.clone(), v);
        r.verdict(format!("S{nu}_matches"), dev <= tol, Some(tol - dev), &[&key, "target_2p_1mp"], "");
    }
    Ok(r)
}

/// `max_nu I(S^nu a) >= I(a) (1 + (1 - 2 I(a)) / 5)` on a Bernoulli(p)
/// sample, every estimate against the constants. The bound is only asserted
/// while `I(a) < 1/2 - tol`.
pub fn verify_independence_bound(p: f64, n: usize, seed: u64, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::invalid(format!("probability must lie in (0, 1/2), got {p}")));
    }
    let a = bernoulli_generate(p, n, seed)?;
    let i_a = empirical_i(&a, &constants(), n)?;
    let x = to_f64(&i_a);
    let bound = x * (1.0 + (1.0 - 2.0 * x) / 5.0);
    let mut r = Report::new("independence-bound");
    r.input("p", p).input("n", n).input("seed", seed).input("tol", tol);
    r.quantity("I_a", i_a).quantity("bound", bound);
    let mut best = 0.0f64;
    for nu in 1..=2 {
        let b = sum_s(&a, nu)?;
        let v = empirical_i(&b, &constants(), b.len())?;
        best = best.max(to_f64(&v));
        r.quantity(format!("I_S{nu}"), v);
    }
    r.quantity("max_I_S", best);
    if x >= 0.5 - tol {
        r.verdict("bound_holds", true, None, &["I_a"], "vacuous: I(a) within tol of 1/2");
    } else {
        r.verdict(
            "bound_holds",
            best >= bound - tol,
            Some(best - bound + tol),
            &["max_I_S", "bound", "I_a"],
            "",
        );
    }
    Ok(r)
}

/// Checks that either some extracted or summed subsequence is more
/// predictable-resistant than `a` by `gamma`, or the witness built from the
/// best sum predictors selects a dense, nearly unpredictable subsequence.
///
/// Every subsequence is evaluated on its first `n / 3` digits.
pub fn verify_main_disjunction(a: &BitSeq, gamma: Rational, cls: &PredictorClass, n: usize, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    if gamma <= ratio(0, 1) {
        return Err(Error::invalid("gamma must be positive"));
    }
    let i_a = empirical_i(a, cls, n)?;
    if i_a == ratio(0, 1) {
        return Err(Error::Precondition("the sequence must have positive predictability on the prefix".into()));
    }
    let n3 = n / 3;
    if n3 == 0 {
        return Err(Error::invalid("prefix must hold at least one complete triple"));
    }
    let mut r = Report::new("main-disjunction");
    r.input("n", n).input("gamma", gamma).input("class", cls.label()).input("tol", tol);
    r.quantity("I_a", i_a).quantity("gamma", gamma).quantity("n_sub", n3);

    let lift = to_f64(&(i_a + gamma)) - tol;
    let mut witness = None;
    let mut uses = vec!["I_a".to_string(), "gamma".to_string()];
    let mut best_gap = f64::NEG_INFINITY;
    let subs: [(String, BitSeq); 5] = [
        ("P0".into(), extract_p(a, 0)?),
        ("P1".into(), extract_p(a, 1)?),
        ("P2".into(), extract_p(a, 2)?),
        ("S1".into(), sum_s(a, 1)?),
        ("S2".into(), sum_s(a, 2)?),
    ];
    let mut s_values = Vec::new();
    for (name, sub) in &subs {
        let v = empirical_i(sub, cls, n3)?;
        let key = format!("I_{name}");
        r.quantity(key.clone(), v);
        uses.push(key);
        let gap = to_f64(&v) - lift;
        if gap >= 0.0 && witness.is_none() {
            witness = Some(name.clone());
        }
        best_gap = best_gap.max(gap);
        if name.starts_with('S') {
            s_values.push(sub.clone());
        }
    }
    r.quantity("branch1", witness.as_ref().map_or("fails".to_string(), |w| format!("holds via {w}")))
        .quantity("branch1_margin", best_gap);

    // Second branch, always evaluated.
    let ia = to_f64(&i_a);
    let sel_target = 0.5 - 4.0 * to_f64(&gamma) / ia;
    let prefix = a.prefix(n);
    let (tilde, how) = if gamma >= i_a / 8 {
        (phi1(), "constant-1")
    } else {
        let (eta1, _) = best_predictor(&s_values[0], cls, n3)?;
        let (eta2, _) = best_predictor(&s_values[1], cls, n3)?;
        (combinators::construct_tilde_f(&eta1, &eta2), "combinators")
    };
    let density = Rational::new(tilde.predict(&prefix).count_ones() as i64, n as i64);
    let selected = tilde.run_select(&prefix);
    r.quantity("witness", how)
        .quantity("witness_states", tilde.state_count())
        .quantity("E_witness", density)
        .quantity("density_target", ia / 4.0)
        .quantity("selected_len", selected.len())
        .quantity("selection_target", sel_target);
    let density_gap = to_f64(&density) - ia / 4.0 + tol;
    let sel_gap = if selected.is_empty() {
        r.quantity("I_selected", "undefined");
        tol - sel_target
    } else {
        let v = empirical_i(&selected, cls, selected.len())?;
        r.quantity("I_selected", v);
        to_f64(&v) - sel_target + tol
    };
    let branch2_gap = density_gap.min(sel_gap);
    let branch2 = branch2_gap >= 0.0;
    r.quantity("branch2", if branch2 { "holds" } else { "fails" })
        .quantity("branch2_margin", branch2_gap);
    for k in [
        "witness",
        "E_witness",
        "density_target",
        "I_selected",
        "selection_target",
        "branch1",
        "branch2",
    ] {
        uses.push(k.to_string());
    }
    let uses_ref: Vec<&str> = uses.iter().map(String::as_str).collect();
    let note = match (witness.is_some(), branch2) {
        (true, true) => "both branches hold",
        (true, false) => "branch 1 holds",
        (false, true) => "branch 2 holds",
        (false, false) => "neither branch holds",
    };
    r.verdict(
        "disjunction_holds",
        witness.is_some() || branch2,
        Some(best_gap.max(branch2_gap)),
        &uses_ref,
        note,
    );
    Ok(r)
}

/// Overall outcome of [`verify_main_disjunction`].
pub fn disjunction_holds(r: &Report) -> bool {
    r.find_verdict("disjunction_holds").is_some_and(|v| v.holds)
}

/// The closure constructions under test. The default implementation
/// delegates to [`combinators`]; test fixtures substitute faulty ones.
pub trait ClosureOps: Sync {
    fn xor(&self, f0: &MooreMachine, f1: &MooreMachine) -> MooreMachine {
        combinators::xor_combine(f0, f1)
    }
    fn interleave(&self, f0: &MooreMachine, f1: &MooreMachine, f2: &MooreMachine) -> MooreMachine {
        combinators::interleave_combine(f0, f1, f2)
    }
    fn lift(&self, f: &MooreMachine, kind: LiftKind) -> MooreMachine {
        combinators::lift_subseq(f, kind)
    }
    fn switch(&self, f0: &MooreMachine, f1: &MooreMachine, f2: &MooreMachine) -> MooreMachine {
        combinators::switch_combine(f0, f1, f2)
    }
    fn tilde_f(&self, eta1: &MooreMachine, eta2: &MooreMachine) -> MooreMachine {
        combinators::construct_tilde_f(eta1, eta2)
    }
}

pub struct StandardOps;

impl ClosureOps for StandardOps {}

/// Largest state count and horizon of the exhaustive closure check.
pub const CLOSURE_MAX_STATES: usize = 3;
pub const CLOSURE_MAX_HORIZON: usize = 12;

pub fn random_machine(rng: &mut impl Rng, max_states: usize) -> MooreMachine {
    let k = rng.random_range(1..=max_states) as StateId;
    let outputs = (0..k).map(|_| rng.random_bool(0.5)).collect();
    let next = (0..k).map(|_| [rng.random_range(0..k), rng.random_range(0..k)]).collect();
    MooreMachine::new(rng.random_range(0..k), outputs, next).expect("valid random machine")
}

pub fn verify_axiom_closure(trials: usize, max_states: usize, horizon: usize, seed: u64) -> Result<Report> {
    verify_axiom_closure_with(&StandardOps, trials, max_states, horizon, seed)
}

struct Violation {
    trial: usize,
    check: String,
    machines: Vec<MooreMachine>,
    input: BitSeq,
}

/// Checks every construction's defining equation on all inputs of length
/// `1..=horizon` for `trials` random machine tuples.
pub fn verify_axiom_closure_with(
    ops: &dyn ClosureOps,
    trials: usize,
    max_states: usize,
    horizon: usize,
    seed: u64,
) -> Result<Report> {
    if trials == 0 || max_states == 0 || horizon == 0 {
        return Err(Error::invalid("trials, states and horizon must be positive"));
    }
    if max_states > CLOSURE_MAX_STATES || horizon > CLOSURE_MAX_HORIZON {
        return Err(Error::capacity(
            format!(
                "exhaustive closure check supports at most {CLOSURE_MAX_STATES} states and horizon {CLOSURE_MAX_HORIZON}"
            ),
            None,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples: Vec<[MooreMachine; 3]> = (0..trials)
        .map(|_| std::array::from_fn(|_| random_machine(&mut rng, max_states)))
        .collect();
    let inputs: Vec<BitSeq> = (1..=horizon)
        .flat_map(|len| (0u32..1 << len).map(move |code| (0..len).map(|i| (code >> i) & 1 == 1).collect()))
        .collect();

    let outcomes: Vec<(u64, Option<Violation>)> = tuples
        .par_iter()
        .enumerate()
        .map(|(t, f)| check_tuple(ops, t, f, &inputs))
        .collect();
    let checks: u64 = outcomes.iter().map(|(c, _)| c).sum();
    let first = outcomes.into_iter().find_map(|(_, v)| v);

    let mut r = Report::new("axiom-closure");
    r.input("trials", trials)
        .input("max_states", max_states)
        .input("horizon", horizon)
        .input("seed", seed);
    r.quantity("inputs_per_tuple", inputs.len()).quantity("equation_checks", checks as i64);
    match &first {
        None => {
            r.quantity("violations", 0usize);
        }
        Some(v) => {
            r.quantity("violations", 1usize);
            let machines: Vec<String> = v.machines.iter().map(|m| m.to_text().replace('\n', "|")).collect();
            r.quantity(
                "counterexample",
                format!("trial={} check={} input={} machines={}", v.trial, v.check, v.input, machines.join(" / ")),
            );
        }
    }
    let uses: &[&str] = if first.is_some() {
        &["violations", "counterexample"]
    } else {
        &["violations"]
    };
    r.verdict("closure_equations_hold", first.is_none(), None, uses, "");
    Ok(r)
}

fn check_tuple(ops: &dyn ClosureOps, trial: usize, f: &[MooreMachine; 3], inputs: &[BitSeq]) -> (u64, Option<Violation>) {
    let [f0, f1, f2] = f;
    let xor = ops.xor(f0, f1);
    let inter = ops.interleave(f0, f1, f2);
    let lifts: Vec<(LiftKind, MooreMachine)> = LiftKind::ALL.iter().map(|&k| (k, ops.lift(f0, k))).collect();
    let switch = ops.switch(f0, f1, f2);
    let tilde = ops.tilde_f(f1, f2);
    let mut checks = 0u64;
    let fail = |check: &str, machines: Vec<MooreMachine>, a: &BitSeq| Violation {
        trial,
        check: check.to_string(),
        machines,
        input: a.clone(),
    };
    for a in inputs {
        checks += 1;
        if xor.predict(a) != reference::xor(f0, f1, a) {
            return (checks, Some(fail("xor", vec![f0.clone(), f1.clone()], a)));
        }
        checks += 1;
        if inter.predict(a) != reference::interleave([f0, f1, f2], a) {
            return (checks, Some(fail("interleave", f.to_vec(), a)));
        }
        for (kind, h) in &lifts {
            checks += 1;
            if !lift_holds(h, f0, *kind, a) {
                return (checks, Some(fail(&format!("lift-{kind}"), vec![f0.clone()], a)));
            }
        }
        checks += 1;
        if switch.predict(a) != reference::switch([f0, f1, f2], a) {
            return (checks, Some(fail("switch", f.to_vec(), a)));
        }
        checks += 1;
        if !tilde_holds(&tilde, f1, f2, a) {
            return (checks, Some(fail("tilde-f", vec![f1.clone(), f2.clone()], a)));
        }
    }
    (checks, None)
}

/// The constrained positions follow `f` on the transformed input and every
/// other position predicts 0.
pub fn lift_holds(h: &MooreMachine, f: &MooreMachine, kind: LiftKind, a: &BitSeq) -> bool {
    let pred = h.predict(a);
    let got = extract_p(&pred, kind.target()).expect("valid target");
    let want = reference::lift(f, kind, a);
    let n = got.len().min(want.len());
    if got.prefix(n) != want.prefix(n) {
        return false;
    }
    (0..3).filter(|&nu| nu != kind.target()).all(|nu| extract_p(&pred, nu).unwrap().count_ones() == 0)
}

pub fn tilde_holds(m: &MooreMachine, eta1: &MooreMachine, eta2: &MooreMachine, a: &BitSeq) -> bool {
    let pred = m.predict(a);
    let got = extract_p(&pred, 1).expect("valid");
    let want = reference::tilde_f(eta1, eta2, a);
    let n = got.len().min(want.len());
    got.prefix(n) == want.prefix(n)
        && extract_p(&pred, 0).unwrap().count_ones() == 0
        && extract_p(&pred, 2).unwrap().count_ones() == 0
}
