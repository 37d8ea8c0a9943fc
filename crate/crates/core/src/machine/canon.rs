//! Reachability pruning, Moore minimization and canonical renumbering.
//!
//! Two machines are prediction-equivalent iff their canonical forms are
//! identical: the minimal Moore machine is unique up to isomorphism and the
//! breadth-first numbering fixes the isomorphism.

use std::collections::HashMap;

use super::{MooreMachine, StateId};

/// Minimal, canonically numbered machine with the same prediction function.
pub fn canonicalize(m: &MooreMachine) -> MooreMachine {
    let reach = m.reachable();

    // Dense local ids for reachable states.
    let mut local = vec![u32::MAX; m.state_count()];
    for (i, &s) in reach.iter().enumerate() {
        local[s as usize] = i as u32;
    }
    let out: Vec<bool> = reach.iter().map(|&s| m.output(s)).collect();
    let next: Vec<[u32; 2]> = reach
        .iter()
        .map(|&s| {
            let [a, b] = m.transitions()[s as usize];
            [local[a as usize], local[b as usize]]
        })
        .collect();

    let block = refine(&out, &next);

    // Breadth-first renumbering of blocks starting from the start block.
    let blocks = block.iter().copied().max().map_or(0, |b| b as usize + 1);
    let mut rep = vec![u32::MAX; blocks];
    for (s, &b) in block.iter().enumerate() {
        if rep[b as usize] == u32::MAX {
            rep[b as usize] = s as u32;
        }
    }
    let mut number = vec![u32::MAX; blocks];
    let mut order: Vec<u32> = vec![block[0]];
    number[block[0] as usize] = 0;
    let mut head = 0;
    while head < order.len() {
        let b = order[head];
        head += 1;
        for t in next[rep[b as usize] as usize] {
            let tb = block[t as usize];
            if number[tb as usize] == u32::MAX {
                number[tb as usize] = order.len() as u32;
                order.push(tb);
            }
        }
    }
    debug_assert_eq!(order.len(), blocks);

    let outputs = order.iter().map(|&b| out[rep[b as usize] as usize]).collect();
    let transitions = order
        .iter()
        .map(|&b| {
            let [x, y] = next[rep[b as usize] as usize];
            [number[block[x as usize] as usize], number[block[y as usize] as usize]]
        })
        .collect();
    MooreMachine::from_parts_unchecked(0, outputs, transitions)
}

/// Moore's partition refinement. Returns a block id per state.
fn refine(out: &[bool], next: &[[StateId; 2]]) -> Vec<u32> {
    let mut block: Vec<u32> = out.iter().map(|&o| o as u32).collect();
    let mut count = distinct(&block);
    loop {
        let mut ids: HashMap<(u32, u32, u32), u32> = HashMap::with_capacity(block.len());
        let refined: Vec<u32> = (0..block.len())
            .map(|s| {
                let key = (
                    block[s],
                    block[next[s][0] as usize],
                    block[next[s][1] as usize],
                );
                let fresh = ids.len() as u32;
                *ids.entry(key).or_insert(fresh)
            })
            .collect();
        let refined_count = ids.len();
        block = refined;
        if refined_count == count {
            return block;
        }
        count = refined_count;
    }
}

fn distinct(block: &[u32]) -> usize {
    let mut seen = [false; 2];
    for &b in block {
        seen[b as usize] = true;
    }
    seen.iter().filter(|&&x| x).count()
}
