//! Brute-force enumeration over every transition table, output labelling
//! and start state, deduplicated by prediction signatures up to depth 12.

use std::collections::{HashMap, HashSet};

use predictability::machine::{enumerate_machines, StateId};
use predictability::MooreMachine;

const HORIZON: usize = 12;

// Class sizes produced by this brute force (and by a separate script).
const C1: usize = 2;
const C2: usize = 26;
const C3: usize = 1054;

/// Outputs of every node of the depth-`HORIZON` input tree, level by level.
fn signature(out: &[bool], next: &[[StateId; 2]], start: StateId) -> Vec<bool> {
    let mut sig = Vec::new();
    let mut layer = vec![start];
    for _ in 0..HORIZON {
        sig.extend(layer.iter().map(|&s| out[s as usize]));
        layer = layer
            .iter()
            .flat_map(|&s| next[s as usize])
            .collect();
    }
    sig
}

fn brute_force(k: usize) -> HashMap<Vec<bool>, MooreMachine> {
    let mut found = HashMap::new();
    for size in 1..=k {
        let tables = size.pow(2 * size as u32);
        for code in 0..tables {
            let mut c = code;
            let next: Vec<[StateId; 2]> = (0..size)
                .map(|_| {
                    let a = (c % size) as StateId;
                    c /= size;
                    let b = (c % size) as StateId;
                    c /= size;
                    [a, b]
                })
                .collect();
            for labels in 0..1u32 << size {
                let out: Vec<bool> = (0..size).map(|s| labels >> s & 1 == 1).collect();
                for start in 0..size as StateId {
                    found
                        .entry(signature(&out, &next, start))
                        .or_insert_with(|| MooreMachine::new(start, out.clone(), next.clone()).unwrap());
                }
            }
        }
    }
    found
}

fn check(k: usize, expected: usize) {
    let oracle = brute_force(k);
    assert_eq!(oracle.len(), expected, "brute force size for k={k}");
    let cls = enumerate_machines(k).unwrap();
    assert_eq!(cls.len(), expected, "enumerated size for k={k}");
    let sigs: HashSet<Vec<bool>> = cls
        .machines()
        .iter()
        .map(|m| signature(m.outputs(), m.transitions(), m.start()))
        .collect();
    assert_eq!(sigs.len(), expected, "enumerated members are pairwise distinct");
    for (sig, m) in &oracle {
        assert!(sigs.contains(sig), "missing class of {m:?}");
        assert!(cls.contains(m));
    }
}

#[test]
fn one_state_class_has_the_two_constants() {
    check(1, C1);
}

#[test]
fn two_state_class_matches_brute_force() {
    check(2, C2);
}

#[test]
fn three_state_class_matches_brute_force() {
    check(3, C3);
}

#[test]
fn members_are_canonical_and_ordered() {
    let cls = enumerate_machines(3).unwrap();
    for m in cls.machines() {
        assert_eq!(&predictability::machine::canonicalize(m), m);
    }
    assert!(cls.machines().windows(2).all(|w| w[0] < w[1]));
    let two = enumerate_machines(2).unwrap();
    assert_eq!(two.machines(), &cls.machines()[..two.len()]);
}
