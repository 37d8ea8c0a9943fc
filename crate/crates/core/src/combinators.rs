//! Closure constructions over Moore machines.
//!
//! Each combinator builds a product machine over the reachable part of the
//! component state space and returns it without minimization, so state
//! counts can be compared against the construction bounds. The
//! [`reference`] module evaluates the same defining equations directly on
//! sequences and serves as the oracle for the automaton constructions.
//!
//! Timing convention: the prediction at index `n` is the output of the state
//! reached after consuming `a[0..n]`.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use crate::bitseq::BitSeq;
use crate::error::{Error, Result};
use crate::machine::{canonicalize, phi0, psi1, psi2, MooreMachine, StateId};

/// Explores the states reachable from `start` breadth-first (0-edge first)
/// and numbers them in discovery order.
fn build<K, O, S>(start: K, output: O, step: S) -> MooreMachine
where
    K: Clone + Eq + Hash,
    O: Fn(&K) -> bool,
    S: Fn(&K, bool) -> K,
{
    let mut ids: HashMap<K, StateId> = HashMap::new();
    let mut keys = vec![start.clone()];
    ids.insert(start, 0);
    let mut next = Vec::new();
    let mut head = 0;
    while head < keys.len() {
        let key = keys[head].clone();
        head += 1;
        let mut row = [0; 2];
        for (slot, bit) in row.iter_mut().zip([false, true]) {
            let target = step(&key, bit);
            *slot = match ids.get(&target) {
                Some(&id) => id,
                None => {
                    let id = keys.len() as StateId;
                    ids.insert(target.clone(), id);
                    keys.push(target);
                    id
                }
            };
        }
        next.push(row);
    }
    let outputs = keys.iter().map(output).collect();
    MooreMachine::from_parts_unchecked(0, outputs, next)
}

/// Pointwise XOR of two prediction streams. At most `Q0 * Q1` states.
pub fn xor_combine(f0: &MooreMachine, f1: &MooreMachine) -> MooreMachine {
    build(
        (f0.start(), f1.start()),
        |&(s0, s1)| f0.output(s0) ^ f1.output(s1),
        |&(s0, s1), b| (f0.step(s0, b), f1.step(s1, b)),
    )
}

/// Phase-interleaved predictor: index `3i` follows `f0`, index `3i+2`
/// follows `f1` and index `3i+1` follows `f2`. All three components read
/// every digit. At most `3 * Q0 * Q1 * Q2` states.
pub fn interleave_combine(f0: &MooreMachine, f1: &MooreMachine, f2: &MooreMachine) -> MooreMachine {
    build(
        (0u8, f0.start(), f1.start(), f2.start()),
        |&(phase, s0, s1, s2)| match phase {
            0 => f0.output(s0),
            1 => f2.output(s2),
            _ => f1.output(s1),
        },
        |&(phase, s0, s1, s2), b| ((phase + 1) % 3, f0.step(s0, b), f1.step(s1, b), f2.step(s2, b)),
    )
}

/// The seven subsequence lifts. `H*` run the predictor on an extracted
/// subsequence, `F*` and `G*` on a summed subsequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LiftKind {
    /// `P0 h a = f P0 a`
    H0,
    /// `P1 h a = f P1 a`
    H1,
    /// `P2 h a = f P2 a`
    H2,
    /// `P1 h a = f S1 a`
    F1,
    /// `P1 h a = f S2 a`
    F2,
    /// `P2 h a = f S1 a`
    G1,
    /// `P2 h a = f S2 a`
    G2,
}

/// Per-triple sequence a lifted predictor reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TripleSource {
    Extract(usize),
    Sum(usize),
}

impl TripleSource {
    pub fn apply(self, a: &BitSeq) -> BitSeq {
        match self {
            TripleSource::Extract(nu) => crate::bitseq::extract_p(a, nu).expect("valid nu"),
            TripleSource::Sum(nu) => crate::bitseq::sum_s(a, nu).expect("valid nu"),
        }
    }

    /// Offsets within a triple whose XOR forms the value, ascending.
    fn offsets(self) -> &'static [u8] {
        match self {
            TripleSource::Extract(0) => &[0],
            TripleSource::Extract(1) => &[2],
            TripleSource::Extract(_) => &[1],
            TripleSource::Sum(1) => &[0, 2],
            TripleSource::Sum(_) => &[1, 2],
        }
    }
}

impl LiftKind {
    pub const ALL: [LiftKind; 7] = [
        LiftKind::H0,
        LiftKind::H1,
        LiftKind::H2,
        LiftKind::F1,
        LiftKind::F2,
        LiftKind::G1,
        LiftKind::G2,
    ];

    pub fn source(self) -> TripleSource {
        match self {
            LiftKind::H0 => TripleSource::Extract(0),
            LiftKind::H1 => TripleSource::Extract(1),
            LiftKind::H2 => TripleSource::Extract(2),
            LiftKind::F1 | LiftKind::G1 => TripleSource::Sum(1),
            LiftKind::F2 | LiftKind::G2 => TripleSource::Sum(2),
        }
    }

    /// Extraction index `nu` of the constrained output positions.
    pub fn target(self) -> usize {
        match self {
            LiftKind::H0 => 0,
            LiftKind::H1 | LiftKind::F1 | LiftKind::F2 => 1,
            LiftKind::H2 | LiftKind::G1 | LiftKind::G2 => 2,
        }
    }
}

impl fmt::Display for LiftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for LiftKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LiftKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown lift kind '{s}'")))
    }
}

/// Machine whose predictions at the `kind.target()` positions equal `f`'s
/// predictions on the transformed sequence; every other position predicts 0.
///
/// The inner state advances once per triple, when the last digit entering
/// the triple's value is read; a carried bit holds the partial XOR for sums.
/// At most `5 * Q` states.
pub fn lift_subseq(f: &MooreMachine, kind: LiftKind) -> MooreMachine {
    let reads = kind.source().offsets();
    let first = reads[0];
    let last = *reads.last().unwrap();
    let emit = crate::bitseq::p_offset(kind.target()).expect("valid target") as u8;
    build(
        (0u8, f.start(), false),
        |&(phase, s, _)| phase == emit && f.output(s),
        |&(phase, s, carry), b| {
            let np = (phase + 1) % 3;
            if phase == last {
                let value = if first == last { b } else { carry ^ b };
                (np, f.step(s, value), false)
            } else if phase == first {
                (np, s, b)
            } else {
                (np, s, carry)
            }
        },
    )
}

/// Switching predictor: where `f0` predicts 0 follow `f1` on the full input;
/// where `f0` predicts 1 follow `f2` run on the subsequence `f0` selects.
/// At most `Q0 * Q1 * Q2` states; the branch bit is a function of the `f0`
/// state.
pub fn switch_combine(f0: &MooreMachine, f1: &MooreMachine, f2: &MooreMachine) -> MooreMachine {
    build(
        (f0.start(), f1.start(), f2.start()),
        |&(s0, s1, s2)| {
            if f0.output(s0) {
                f2.output(s2)
            } else {
                f1.output(s1)
            }
        },
        |&(s0, s1, s2), b| {
            let s2n = if f0.output(s0) { f2.step(s2, b) } else { s2 };
            (f0.step(s0, b), f1.step(s1, b), s2n)
        },
    )
}

/// Input-ignoring machine cycling through `pattern`.
pub fn make_periodic(pattern: &BitSeq) -> Result<MooreMachine> {
    if pattern.is_empty() {
        return Err(Error::invalid("periodic pattern must be nonempty"));
    }
    let k = pattern.len() as StateId;
    let next = (0..k).map(|i| [(i + 1) % k; 2]).collect();
    MooreMachine::new(0, pattern.iter().collect(), next)
}

/// Witness predictor built from two summed-subsequence predictors.
///
/// With `c1 = I(phi0, psi1, phi0)`, `c2 = I(phi0, psi2, phi0)`,
/// `g_nu = c_nu ^ I(phi0, lift(eta_nu, F_nu), phi0)` and the result
/// `g1 ^ g2`, the predictions at indices `3i+2` are
/// `eta1(S1 a) ^ a[3i] ^ eta2(S2 a) ^ a[3i+1]` and all other predictions
/// are 0. Intermediate machines are minimized to keep products small.
pub fn construct_tilde_f(eta1: &MooreMachine, eta2: &MooreMachine) -> MooreMachine {
    let zero = phi0();
    let c1 = canonicalize(&interleave_combine(&zero, &psi1(), &zero));
    let c2 = canonicalize(&interleave_combine(&zero, &psi2(), &zero));
    let g = |eta: &MooreMachine, kind: LiftKind, c: &MooreMachine| {
        let g1 = canonicalize(&lift_subseq(eta, kind));
        let g2 = canonicalize(&interleave_combine(&zero, &g1, &zero));
        canonicalize(&xor_combine(c, &g2))
    };
    let g1 = g(eta1, LiftKind::F1, &c1);
    let g2 = g(eta2, LiftKind::F2, &c2);
    xor_combine(&g1, &g2)
}

/// Sequence-level evaluation of the defining equations, independent of the
/// product constructions.
pub mod reference {
    use super::LiftKind;
    use crate::bitseq::{extract_p, sum_s, xor_seq, BitSeq};
    use crate::machine::MooreMachine;

    pub fn xor(f0: &MooreMachine, f1: &MooreMachine, a: &BitSeq) -> BitSeq {
        xor_seq(&f0.predict(a), &f1.predict(a)).expect("equal lengths")
    }

    pub fn interleave(f: [&MooreMachine; 3], a: &BitSeq) -> BitSeq {
        let preds: Vec<BitSeq> = f.iter().map(|m| m.predict(a)).collect();
        // Phase offset j reads component 0, 2, 1 for j = 0, 1, 2.
        (0..a.len())
            .map(|i| match i % 3 {
                0 => preds[0].get(i),
                1 => preds[2].get(i),
                _ => preds[1].get(i),
            })
            .collect()
    }

    /// Expected predictions at the constrained positions of a lift.
    pub fn lift(f: &MooreMachine, kind: LiftKind, a: &BitSeq) -> BitSeq {
        f.predict(&kind.source().apply(a))
    }

    pub fn switch(f: [&MooreMachine; 3], a: &BitSeq) -> BitSeq {
        let sel = f[0].predict(a);
        let other = f[1].predict(a);
        let b = f[0].run_select(a);
        let on_b = f[2].predict(&b);
        let mut l = 0;
        (0..a.len())
            .map(|i| {
                if sel.get(i) {
                    let v = on_b.get(l);
                    l += 1;
                    v
                } else {
                    other.get(i)
                }
            })
            .collect()
    }

    /// Expected predictions of the witness at indices `3i+2`, one per
    /// complete triple.
    pub fn tilde_f(eta1: &MooreMachine, eta2: &MooreMachine, a: &BitSeq) -> BitSeq {
        let n = a.len() / 3;
        let t1 = eta1.predict(&sum_s(a, 1).unwrap());
        let t2 = eta2.predict(&sum_s(a, 2).unwrap());
        let p0 = extract_p(a, 0).unwrap();
        let p2 = extract_p(a, 2).unwrap();
        (0..n)
            .map(|i| t1.get(i) ^ p0.get(i) ^ t2.get(i) ^ p2.get(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitseq::extract_p;
    use crate::machine::{phi1, predictor_equal};

    fn bits(s: &str) -> BitSeq {
        s.parse().unwrap()
    }

    fn all_inputs(len: usize) -> impl Iterator<Item = BitSeq> {
        (0u32..1 << len).map(move |code| (0..len).map(|i| (code >> i) & 1 == 1).collect())
    }

    #[test]
    fn xor_examples() {
        assert!(predictor_equal(&xor_combine(&phi0(), &phi1()), &phi1(), 12).unwrap());
        for m in [psi1(), psi2(), phi1()] {
            assert!(predictor_equal(&xor_combine(&m, &m), &phi0(), 12).unwrap());
        }
    }

    #[test]
    fn interleave_examples() {
        let z = BitSeq::zeros(9);
        assert_eq!(interleave_combine(&phi1(), &phi0(), &phi0()).predict(&z), bits("100100100"));
        assert_eq!(interleave_combine(&phi0(), &phi1(), &phi0()).predict(&z), bits("001001001"));
        assert_eq!(interleave_combine(&phi0(), &phi0(), &phi1()).predict(&z), bits("010010010"));
    }

    #[test]
    fn lift_examples() {
        let a = bits("110100111010");
        let h0 = lift_subseq(&phi1(), LiftKind::H0).predict(&a);
        assert_eq!(h0, bits("100100100100"));
        let g1 = lift_subseq(&phi0(), LiftKind::G1).predict(&a);
        assert!(extract_p(&g1, 2).unwrap().iter().all(|b| !b));
    }

    #[test]
    fn lift_state_bounds() {
        for kind in LiftKind::ALL {
            let m = lift_subseq(&psi1(), kind);
            assert!(m.state_count() <= 5 * 4, "{kind}: {}", m.state_count());
        }
    }

    #[test]
    fn lift_matches_reference_exhaustively() {
        for kind in LiftKind::ALL {
            let m = lift_subseq(&psi1(), kind);
            for len in 0..=9 {
                for a in all_inputs(len) {
                    let got = extract_p(&m.predict(&a), kind.target()).unwrap();
                    let want = reference::lift(&psi1(), kind, &a);
                    let n = got.len().min(want.len());
                    assert_eq!(got.prefix(n), want.prefix(n), "{kind} on {a}");
                }
            }
        }
    }

    #[test]
    fn switch_examples() {
        let f1 = psi1();
        let f2 = psi2();
        assert!(predictor_equal(&switch_combine(&phi0(), &f1, &f2), &f1, 12).unwrap());
        assert!(predictor_equal(&switch_combine(&phi1(), &f1, &f2), &f2, 12).unwrap());
    }

    #[test]
    fn periodic_machines() {
        assert_eq!(make_periodic(&bits("0")).unwrap(), phi0());
        let m = make_periodic(&bits("0011")).unwrap();
        assert_eq!(m.predict(&BitSeq::ones(8)), bits("00110011"));
        let a: BitSeq = (0..12).map(|i| [2, 3, 6, 7, 10, 11].contains(&i)).collect();
        // Only indices 2, 3, 6, 7, 10, 11 are selected.
        assert_eq!(m.run_select(&a), BitSeq::ones(6));
        assert_eq!(m.run_select(&a.complement()), BitSeq::zeros(6));
        assert!(make_periodic(&BitSeq::new()).is_err());
        let thm = make_periodic(&bits("001")).unwrap();
        assert!(predictor_equal(&thm, &interleave_combine(&phi0(), &phi1(), &phi0()), 12).unwrap());
    }

    #[test]
    fn tilde_f_collapses_for_constants() {
        let a = bits("110011101000101");
        let m = construct_tilde_f(&phi0(), &phi0());
        let p = m.predict(&a);
        let offset2 = extract_p(&p, 1).unwrap();
        let want: BitSeq = (0..5).map(|i| a.get(3 * i) ^ a.get(3 * i + 1)).collect();
        assert_eq!(offset2, want);
        assert!(extract_p(&p, 0).unwrap().iter().all(|b| !b));
        assert!(extract_p(&p, 2).unwrap().iter().all(|b| !b));
        let m = construct_tilde_f(&phi1(), &phi0());
        let offset2 = extract_p(&m.predict(&a), 1).unwrap();
        assert_eq!(offset2, want.complement());
    }

    #[test]
    fn lift_kind_parse() {
        assert_eq!("g2".parse::<LiftKind>().unwrap(), LiftKind::G2);
        assert!("x".parse::<LiftKind>().is_err());
    }
}
