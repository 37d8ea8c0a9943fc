use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{canonicalize, MooreMachine, PredictorClass, StateId};
use crate::error::{Error, Result};

/// Largest state bound accepted by [`enumerate_machines`].
pub const MAX_ENUM_STATES: usize = 4;

/// Largest horizon accepted by [`predictor_equal`].
pub const MAX_EQUAL_HORIZON: usize = 16;

/// All Moore machines with at most `k` states, one canonical representative
/// per prediction-equivalence class, ordered by (state count, outputs,
/// transitions). `enumerate_machines(k - 1)` is a prefix of
/// `enumerate_machines(k)`.
///
/// Raw tables are generated with start state 0 only: a machine started in
/// state `s` is isomorphic to one started in 0 after swapping the labels of
/// `0` and `s`.
pub fn enumerate_machines(k: usize) -> Result<PredictorClass> {
    if k == 0 {
        return Err(Error::invalid("state bound must be at least 1"));
    }
    if k > MAX_ENUM_STATES {
        return Err(Error::capacity(
            format!("exhaustive enumeration supports at most {MAX_ENUM_STATES} states, got {k}"),
            None,
        ));
    }
    let mut all = BTreeSet::new();
    for size in 1..=k {
        all.extend(canonical_of_size(size));
    }
    Ok(PredictorClass::from_canonical_sorted(format!("fsm:{k}"), all.into_iter().collect()))
}

fn canonical_of_size(size: usize) -> BTreeSet<MooreMachine> {
    let tables = (size as u64).pow(2 * size as u32);
    (0..tables)
        .into_par_iter()
        .fold(BTreeSet::new, |mut acc, code| {
            let next = decode_table(code, size);
            for out_bits in 0..(1u32 << size) {
                let outputs = (0..size).map(|s| (out_bits >> s) & 1 == 1).collect();
                let m = MooreMachine::from_parts_unchecked(0, outputs, next.clone());
                acc.insert(canonicalize(&m));
            }
            acc
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        })
}

fn decode_table(mut code: u64, size: usize) -> Vec<[StateId; 2]> {
    let k = size as u64;
    (0..size)
        .map(|_| {
            let a = (code % k) as StateId;
            code /= k;
            let b = (code % k) as StateId;
            code /= k;
            [a, b]
        })
        .collect()
}

/// Whether the two machines predict identically on every input of length
/// `horizon`, checked by walking the full input tree.
pub fn predictor_equal(m1: &MooreMachine, m2: &MooreMachine, horizon: usize) -> Result<bool> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if horizon > MAX_EQUAL_HORIZON {
        return Err(Error::capacity(
            format!("exhaustive comparison supports horizons up to {MAX_EQUAL_HORIZON}, got {horizon}"),
            None,
        ));
    }
    Ok(agree(m1, m1.start(), m2, m2.start(), horizon))
}

// Predictions for an input of length h are the outputs at depths 0..h.
fn agree(m1: &MooreMachine, s1: StateId, m2: &MooreMachine, s2: StateId, left: usize) -> bool {
    if m1.output(s1) != m2.output(s2) {
        return false;
    }
    if left == 1 {
        return true;
    }
    [false, true]
        .into_iter()
        .all(|b| agree(m1, m1.step(s1, b), m2, m2.step(s2, b), left - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{alternator, phi0, phi1, psi2};

    #[test]
    fn one_state_class() {
        let c = enumerate_machines(1).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.machines(), &[phi0(), phi1()]);
        assert_eq!(c.label(), "fsm:1");
    }

    #[test]
    fn bounds() {
        assert!(matches!(enumerate_machines(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(enumerate_machines(5), Err(Error::Capacity { .. })));
        assert!(matches!(predictor_equal(&phi0(), &phi0(), 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(predictor_equal(&phi0(), &phi0(), 17), Err(Error::Capacity { .. })));
    }

    #[test]
    fn two_state_class_contents() {
        let c = enumerate_machines(2).unwrap();
        assert!(c.contains(&psi2()));
        assert!(c.contains(&alternator()));
        assert!(c.machines().iter().all(|m| m.state_count() <= 2));
        let one = enumerate_machines(1).unwrap();
        assert_eq!(&c.machines()[..2], one.machines());
    }

    #[test]
    fn equality_examples() {
        let dead = MooreMachine::new(0, vec![false, true], vec![[0, 0], [1, 0]]).unwrap();
        assert!(predictor_equal(&phi0(), &dead, 12).unwrap());
        assert!(!predictor_equal(&phi0(), &phi1(), 1).unwrap());
        // psi2 and phi0 agree on every input of length 1 but not length 2.
        assert!(predictor_equal(&phi0(), &psi2(), 1).unwrap());
        assert!(!predictor_equal(&phi0(), &psi2(), 2).unwrap());
    }
}
