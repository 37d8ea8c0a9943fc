//! Blocks on which every member of a finite class errs at rate close to 1/2.
//!
//! The emitted bit always disagrees with the weighted majority of the
//! class, each member's weight being `BETA^errors`. With `P` members and
//! `eta = ln(1/BETA) / 2` every member errs at rate at least
//! `1/2 - ln(P)/(2 eta N) - ln(cosh eta)/(2 eta)` on an `N`-bit block. Short
//! blocks fall back to an exact branch-and-bound search. Every result is
//! certified by direct evaluation before it is returned.

use rayon::prelude::*;

use crate::bitseq::BitSeq;
use crate::error::{Error, Result};
use crate::machine::{MooreMachine, PredictorClass, StateId};
use crate::{ratio, Rational};

/// Weight multiplier applied to a member each time it errs on the block.
pub const BETA: f64 = 0.95;

/// Blocks up to this length are searched exhaustively when the
/// multiplicative-weights block fails certification.
pub const EXHAUSTIVE_MAX_LEN: usize = 20;

fn eta() -> f64 {
    -BETA.ln() / 2.0
}

/// Additive loss of the weighting scheme that does not shrink with `N`.
pub fn asymptotic_loss() -> f64 {
    let e = eta();
    e.cosh().ln() / (2.0 * e)
}

/// Guaranteed value of `1/2 - min error rate` for `members` machines on a
/// block of length `n`.
pub fn guarantee_loss(members: usize, n: usize) -> f64 {
    (members.max(1) as f64).ln() / (2.0 * eta() * n as f64) + asymptotic_loss()
}

/// Smallest block length whose guaranteed loss is at most `eps`, or `None`
/// when `eps` does not exceed the asymptotic loss.
pub fn min_block_len(members: usize, eps: f64) -> Option<u64> {
    let c = asymptotic_loss();
    if eps <= c {
        return None;
    }
    let ln_p = (members.max(1) as f64).ln();
    let mut n = (ln_p / (2.0 * eta() * (eps - c))).ceil().max(1.0) as u64;
    // Guard against rounding right at the boundary.
    while guarantee_loss(members, n as usize) > eps {
        n += 1;
    }
    Some(n)
}

/// Errors needed on `n` digits for a rate of at least `1/2 - eps`.
pub fn required_errors(n: usize, eps: Rational) -> usize {
    let need = (ratio(1, 2) - eps) * Rational::from_integer(n as i64);
    need.ceil().to_integer().max(0) as usize
}

/// A block with its certificate: the smallest error rate over the class
/// and the index of a member attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedBlock {
    pub bits: BitSeq,
    pub margin: Rational,
    pub worst: usize,
}

/// Block of length `n` on which every member of `cls`, run after `prefix`,
/// errs at rate at least `1/2 - eps`.
pub fn adversarial_block(cls: &PredictorClass, prefix: &BitSeq, n: usize, eps: Rational) -> Result<CertifiedBlock> {
    let states: Vec<StateId> = cls.machines().par_iter().map(|m| m.run(prefix)).collect();
    adversarial_from_states(cls, &states, n, eps)
}

/// As [`adversarial_block`], with each member starting from the given state.
pub(crate) fn adversarial_from_states(
    cls: &PredictorClass,
    states: &[StateId],
    n: usize,
    eps: Rational,
) -> Result<CertifiedBlock> {
    if n == 0 {
        return Err(Error::invalid("block length must be at least 1"));
    }
    if cls.is_empty() {
        return Err(Error::invalid("predictor class is empty"));
    }
    if eps <= ratio(0, 1) {
        return Err(Error::invalid("eps must be positive"));
    }
    let machines = cls.machines();
    let required = required_errors(n, eps);
    let eps_f = crate::to_f64(&eps);
    if n > EXHAUSTIVE_MAX_LEN && guarantee_loss(cls.len(), n) > eps_f {
        return Err(Error::capacity(
            format!(
                "{} members cannot be certified at eps {eps} on {n} digits",
                cls.len()
            ),
            min_block_len(cls.len(), eps_f),
        ));
    }

    let bits = weighted_block(machines, states, n);
    let cert = certify(machines, states, bits);
    if cert.errors >= required {
        return Ok(cert.into_block(n));
    }
    if n <= EXHAUSTIVE_MAX_LEN {
        if let Some(bits) = exhaustive_block(machines, states, n, required) {
            let cert = certify(machines, states, bits);
            debug_assert!(cert.errors >= required);
            return Ok(cert.into_block(n));
        }
    }
    Err(Error::Certification {
        machine: cert.worst,
        margin: Rational::new(cert.errors as i64, n as i64),
        required: ratio(1, 2) - eps,
    })
}

fn weighted_block(machines: &[MooreMachine], states: &[StateId], n: usize) -> BitSeq {
    let mut states = states.to_vec();
    let mut weight = vec![1.0f64; machines.len()];
    let mut bits = BitSeq::with_capacity(n);
    for _ in 0..n {
        let (mut w0, mut w1) = (0.0, 0.0);
        for (m, (&s, &w)) in machines.iter().zip(states.iter().zip(&weight)) {
            if m.output(s) {
                w1 += w;
            } else {
                w0 += w;
            }
        }
        // Ties emit 1.
        let bit = w1 <= w0;
        let mut total = 0.0;
        for (m, (s, w)) in machines.iter().zip(states.iter_mut().zip(weight.iter_mut())) {
            if m.output(*s) != bit {
                *w *= BETA;
            }
            total += *w;
            *s = m.step(*s, bit);
        }
        if total < 1e-150 {
            weight.iter_mut().for_each(|w| *w *= 1e150);
        }
        bits.push(bit);
    }
    bits
}

struct Certificate {
    bits: BitSeq,
    errors: usize,
    worst: usize,
}

impl Certificate {
    fn into_block(self, n: usize) -> CertifiedBlock {
        CertifiedBlock {
            margin: Rational::new(self.errors as i64, n as i64),
            worst: self.worst,
            bits: self.bits,
        }
    }
}

fn certify(machines: &[MooreMachine], states: &[StateId], bits: BitSeq) -> Certificate {
    let (errors, worst) = machines
        .par_iter()
        .zip(states.par_iter())
        .enumerate()
        .map(|(i, (m, &s0))| {
            let mut s = s0;
            let mut e = 0;
            for bit in bits.iter() {
                e += (m.output(s) != bit) as usize;
                s = m.step(s, bit);
            }
            (e, i)
        })
        .min()
        .expect("nonempty class");
    Certificate { bits, errors, worst }
}

/// Depth-first search for a block giving every member at least `required`
/// errors, trying the minority prediction first.
fn exhaustive_block(machines: &[MooreMachine], states: &[StateId], n: usize, required: usize) -> Option<BitSeq> {
    struct Search<'a> {
        machines: &'a [MooreMachine],
        n: usize,
        required: usize,
        path: Vec<bool>,
    }
    impl Search<'_> {
        fn go(&mut self, states: &[StateId], errors: &[usize]) -> bool {
            let depth = self.path.len();
            let low = *errors.iter().min().unwrap();
            if low >= self.required {
                // Any continuation keeps the bound.
                self.path.resize(self.n, false);
                return true;
            }
            if low + (self.n - depth) < self.required {
                return false;
            }
            let ones = self.machines.iter().zip(states).filter(|(m, &s)| m.output(s)).count();
            let first = 2 * ones <= self.machines.len();
            for bit in [first, !first] {
                let mut next_states = Vec::with_capacity(states.len());
                let mut next_errors = Vec::with_capacity(errors.len());
                for (m, (&s, &e)) in self.machines.iter().zip(states.iter().zip(errors)) {
                    next_errors.push(e + (m.output(s) != bit) as usize);
                    next_states.push(m.step(s, bit));
                }
                self.path.push(bit);
                if self.go(&next_states, &next_errors) {
                    return true;
                }
                self.path.pop();
            }
            false
        }
    }
    let mut search = Search {
        machines,
        n,
        required,
        path: Vec::with_capacity(n),
    };
    search
        .go(states, &vec![0; machines.len()])
        .then(|| search.path.into_iter().collect())
}

/// Every member restarted from the state it reaches on `prefix`,
/// re-minimized and deduplicated; never larger than `cls`.
pub fn advance_class(cls: &PredictorClass, prefix: &BitSeq) -> PredictorClass {
    let advanced: Vec<MooreMachine> = cls
        .machines()
        .par_iter()
        .map(|m| m.with_start(m.run(prefix)).expect("reachable state"))
        .collect();
    PredictorClass::new(cls.label().to_string(), advanced)
}
