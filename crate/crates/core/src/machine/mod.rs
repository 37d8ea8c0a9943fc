//! Moore machines as causal binary predictors.
//!
//! The prediction for index `n` is the output of the state reached after
//! consuming `a[0..n]`, so the first prediction is the start state's output
//! and every prediction depends only on earlier digits.

mod canon;
mod class;
mod enumerate;
mod format;

pub use canon::canonicalize;
pub use class::{Hierarchy, PredictorClass};
pub use enumerate::{enumerate_machines, predictor_equal, MAX_ENUM_STATES, MAX_EQUAL_HORIZON};

use std::cmp::Ordering;
use std::fmt;

use crate::bitseq::BitSeq;
use crate::error::{Error, Result};
use crate::Rational;

pub type StateId = u32;

/// A deterministic Moore machine over input and output alphabet `{0, 1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MooreMachine {
    start: StateId,
    outputs: Vec<bool>,
    next: Vec<[StateId; 2]>,
}

impl MooreMachine {
    /// Builds a machine from its start state, per-state outputs and
    /// per-state `[next_on_0, next_on_1]` targets.
    pub fn new(start: StateId, outputs: Vec<bool>, next: Vec<[StateId; 2]>) -> Result<Self> {
        let k = outputs.len();
        if k == 0 {
            return Err(Error::invalid("machine needs at least one state"));
        }
        if next.len() != k {
            return Err(Error::invalid(format!(
                "{} output entries but {} transition rows",
                k,
                next.len()
            )));
        }
        if start as usize >= k {
            return Err(Error::invalid(format!("start state {start} out of range 0..{k}")));
        }
        if let Some((s, row)) = next
            .iter()
            .enumerate()
            .find(|(_, row)| row.iter().any(|&t| t as usize >= k))
        {
            return Err(Error::invalid(format!(
                "state {s} has transition {row:?} outside 0..{k}"
            )));
        }
        Ok(MooreMachine { start, outputs, next })
    }

    pub(crate) fn from_parts_unchecked(start: StateId, outputs: Vec<bool>, next: Vec<[StateId; 2]>) -> Self {
        debug_assert!(MooreMachine::new(start, outputs.clone(), next.clone()).is_ok());
        MooreMachine { start, outputs, next }
    }

    pub fn state_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn outputs(&self) -> &[bool] {
        &self.outputs
    }

    pub fn transitions(&self) -> &[[StateId; 2]] {
        &self.next
    }

    #[inline]
    pub fn output(&self, state: StateId) -> bool {
        self.outputs[state as usize]
    }

    #[inline]
    pub fn step(&self, state: StateId, bit: bool) -> StateId {
        self.next[state as usize][bit as usize]
    }

    /// Same machine with a different start state.
    pub fn with_start(&self, start: StateId) -> Result<Self> {
        MooreMachine::new(start, self.outputs.clone(), self.next.clone())
    }

    /// State reached from the start after consuming `a`.
    pub fn run(&self, a: &BitSeq) -> StateId {
        a.iter().fold(self.start, |s, bit| self.step(s, bit))
    }

    /// Prediction stream, one bit per input digit.
    pub fn predict(&self, a: &BitSeq) -> BitSeq {
        let mut out = BitSeq::with_capacity(a.len());
        let mut s = self.start;
        for bit in a.iter() {
            out.push(self.output(s));
            s = self.step(s, bit);
        }
        out
    }

    /// Number of mispredictions among the first `n` digits.
    pub fn error_count(&self, a: &BitSeq, n: usize) -> usize {
        let mut s = self.start;
        let mut errors = 0;
        for bit in a.iter().take(n) {
            errors += (self.output(s) != bit) as usize;
            s = self.step(s, bit);
        }
        errors
    }

    /// Mispredictions among the first `n` digits for each `n` in
    /// `checkpoints` (ascending) in a single pass.
    pub fn error_counts_at(&self, a: &BitSeq, checkpoints: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut cps = checkpoints.iter().peekable();
        let mut s = self.start;
        let mut errors = 0;
        while cps.next_if(|&&n| n == 0).is_some() {
            out.push(0);
        }
        for (i, bit) in a.iter().enumerate() {
            if cps.peek().is_none() {
                break;
            }
            errors += (self.output(s) != bit) as usize;
            s = self.step(s, bit);
            while cps.next_if(|&&n| n == i + 1).is_some() {
                out.push(errors);
            }
        }
        out
    }

    /// Exact error rate on the first `n` digits.
    pub fn error_rate(&self, a: &BitSeq, n: usize) -> Result<Rational> {
        check_prefix(a, n)?;
        Ok(Rational::new(self.error_count(a, n) as i64, n as i64))
    }

    /// Digits of `a` at the indices where this machine predicts 1.
    pub fn run_select(&self, a: &BitSeq) -> BitSeq {
        let mut out = BitSeq::new();
        let mut s = self.start;
        for bit in a.iter() {
            if self.output(s) {
                out.push(bit);
            }
            s = self.step(s, bit);
        }
        out
    }

    /// States reachable from the start, in breadth-first order with the
    /// 0-edge explored before the 1-edge.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.state_count()];
        let mut order = vec![self.start];
        seen[self.start as usize] = true;
        let mut head = 0;
        while head < order.len() {
            let s = order[head];
            head += 1;
            for t in self.next[s as usize] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    order.push(t);
                }
            }
        }
        order
    }
}

impl Ord for MooreMachine {
    fn cmp(&self, other: &Self) -> Ordering {
        self.state_count()
            .cmp(&other.state_count())
            .then_with(|| self.start.cmp(&other.start))
            .then_with(|| self.outputs.cmp(&other.outputs))
            .then_with(|| self.next.cmp(&other.next))
    }
}

impl PartialOrd for MooreMachine {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MooreMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Moore(start={}", self.start)?;
        for (s, (o, [n0, n1])) in self.outputs.iter().zip(&self.next).enumerate() {
            write!(f, "; {s}:{}->{n0},{n1}", *o as u8)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MooreMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn check_prefix(a: &BitSeq, n: usize) -> Result<()> {
    if n == 0 || n > a.len() {
        return Err(Error::invalid(format!(
            "prefix length must be in 1..={}, got {n}",
            a.len()
        )));
    }
    Ok(())
}

/// Constant predictor emitting `bit` forever.
pub fn constant(bit: bool) -> MooreMachine {
    MooreMachine::from_parts_unchecked(0, vec![bit], vec![[0, 0]])
}

/// Constant 0 predictor.
pub fn phi0() -> MooreMachine {
    constant(false)
}

/// Constant 1 predictor.
pub fn phi1() -> MooreMachine {
    constant(true)
}

/// Lag-2 repeater: predicts `a[j-2]`, and 0 for the first two indices.
///
/// State `2p + q` remembers the last two digits `(p, q)` and outputs `p`.
pub fn psi1() -> MooreMachine {
    let next = (0..4u32).map(|s| {
        let q = s & 1;
        [2 * q, 2 * q + 1]
    });
    MooreMachine::from_parts_unchecked(0, vec![false, false, true, true], next.collect())
}

/// Lag-1 repeater: predicts `a[j-1]`, and 0 for the first index.
pub fn psi2() -> MooreMachine {
    MooreMachine::from_parts_unchecked(0, vec![false, true], vec![[0, 1], [0, 1]])
}

/// Two-state input-ignoring machine predicting `0101...`.
pub fn alternator() -> MooreMachine {
    MooreMachine::from_parts_unchecked(0, vec![false, true], vec![[1, 1], [0, 0]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitSeq {
        s.parse().unwrap()
    }

    #[test]
    fn constructor_validates() {
        assert!(MooreMachine::new(0, vec![], vec![]).is_err());
        assert!(MooreMachine::new(1, vec![false], vec![[0, 0]]).is_err());
        assert!(MooreMachine::new(0, vec![false], vec![[0, 1]]).is_err());
        assert!(MooreMachine::new(0, vec![false, true], vec![[0, 1]]).is_err());
        assert!(MooreMachine::new(1, vec![false, true], vec![[0, 1], [1, 0]]).is_ok());
    }

    #[test]
    fn prediction_examples() {
        assert_eq!(phi0().predict(&bits("10110")), BitSeq::zeros(5));
        assert_eq!(psi2().predict(&bits("0011")), bits("0001"));
        assert_eq!(psi2().error_count(&bits("0011"), 4), 1);
        assert_eq!(psi1().predict(&bits("110100")), bits("001101"));
        assert_eq!(alternator().predict(&bits("0000")), bits("0101"));
    }

    #[test]
    fn error_rates() {
        assert_eq!(phi0().error_rate(&bits("0101"), 4).unwrap(), Rational::new(1, 2));
        assert_eq!(phi1().error_rate(&BitSeq::ones(16), 16).unwrap(), Rational::new(0, 1));
        assert_eq!(psi2().error_rate(&bits("0011"), 4).unwrap(), Rational::new(1, 4));
        assert!(phi0().error_rate(&bits("01"), 0).is_err());
        assert!(phi0().error_rate(&bits("01"), 3).is_err());
    }

    #[test]
    fn error_counts_at_checkpoints() {
        let a = bits("0110100111");
        let counts = psi2().error_counts_at(&a, &[0, 1, 4, 4, 10]);
        let direct: Vec<usize> = [0, 1, 4, 4, 10].iter().map(|&n| psi2().error_count(&a, n)).collect();
        assert_eq!(counts, direct);
    }

    #[test]
    fn selection() {
        assert_eq!(phi1().run_select(&bits("0110")), bits("0110"));
        assert!(phi0().run_select(&bits("0110")).is_empty());
    }

    #[test]
    fn reachable_order() {
        let m = MooreMachine::new(2, vec![false, true, false, true], vec![[2, 2], [1, 1], [3, 0], [3, 3]]).unwrap();
        assert_eq!(m.reachable(), vec![2, 3, 0]);
    }
}
