//! A sequence that is unpredictable for a finite-state class yet easy for
//! the repeat detector: stages of repeated adversarial blocks.
//!
//! Stage `j` repeats one block adversarial for `fsm:<k>` at
//! `eps_j = EPS1 / j`, `10^j` times. The block length is the shortest the
//! weighting guarantee certifies. Counts are capped to fit the requested
//! length; the last stage takes every whole copy that still fits.
//! `fsm:<k>` is closed under restarting members from any state, so every
//! copy is adversarial whatever state a member is in when it starts.

use std::fmt::Write as _;

use crate::bitseq::BitSeq;
use crate::error::{Error, Result};
use crate::machine::enumerate_machines;
use crate::{to_f64, Rational};

use super::adversary::{adversarial_block, min_block_len};

/// Tolerance of the first stage.
pub const EPS1: Rational = Rational::new_raw(1, 10);

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationStage {
    pub eps: Rational,
    pub block: BitSeq,
    pub reps: usize,
    pub margin: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationPlan {
    pub max_state: usize,
    pub total_len: usize,
    pub stages: Vec<SeparationStage>,
}

impl SeparationPlan {
    pub fn sequence(&self) -> BitSeq {
        let mut out = BitSeq::with_capacity(self.len());
        for s in &self.stages {
            for _ in 0..s.reps {
                out.extend_from(&s.block);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.stages.iter().map(|s| s.block.len() * s.reps).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cumulative stage ends.
    pub fn checkpoints(&self) -> Vec<usize> {
        self.stages
            .iter()
            .scan(0, |end, s| {
                *end += s.block.len() * s.reps;
                Some(*end)
            })
            .collect()
    }

    /// One line per stage: index, eps, block length, repetitions, certified
    /// margin and the block itself.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "separation max_state={} total_len={} schedule=10^j,capped,last-takes-rest stages={}\n",
            self.max_state,
            self.total_len,
            self.stages.len()
        );
        for (j, st) in self.stages.iter().enumerate() {
            let _ = writeln!(
                s,
                "stage {} eps={} len={} reps={} margin={} block={}",
                j + 1,
                st.eps,
                st.block.len(),
                st.reps,
                st.margin,
                st.block
            );
        }
        s
    }
}

fn stage_len(members: usize, j: usize) -> Result<usize> {
    let eps = EPS1 / Rational::from_integer(j as i64);
    min_block_len(members, to_f64(&eps))
        .map(|n| n as usize)
        .ok_or_else(|| Error::capacity(format!("stage {j} tolerance {eps} is below the asymptotic loss"), None))
}

/// Builds the staged sequence against `fsm:<max_state>`. Its length is at
/// most `total_len`; only whole copies are emitted.
pub fn separation_sequence(max_state: usize, total_len: usize) -> Result<(BitSeq, SeparationPlan)> {
    let cls = enumerate_machines(max_state)?;
    let p = cls.len();
    let n1 = stage_len(p, 1)?;
    let n2 = stage_len(p, 2)?;
    let needed = 10 * n1 + 2 * n2;
    if total_len < needed {
        return Err(Error::capacity(
            format!("two stages against fsm:{max_state} need at least {needed} digits"),
            Some(needed as u64),
        ));
    }

    let mut stages = Vec::new();
    let mut remaining = total_len;
    let mut j = 1;
    loop {
        let n = stage_len(p, j)?;
        if remaining < 2 * n {
            break;
        }
        let schedule = 10usize.checked_pow(j as u32).unwrap_or(usize::MAX);
        let after = remaining - schedule.min(remaining / n) * n;
        let last = after < 2 * stage_len(p, j + 1)?;
        let reps = if last { remaining / n } else { schedule };
        let eps = EPS1 / Rational::from_integer(j as i64);
        let c = adversarial_block(&cls, &BitSeq::new(), n, eps)?;
        stages.push(SeparationStage {
            eps,
            block: c.bits,
            reps,
            margin: c.margin,
        });
        remaining -= reps * n;
        if last {
            break;
        }
        j += 1;
    }
    debug_assert!(stages.len() >= 2);
    let plan = SeparationPlan {
        max_state,
        total_len,
        stages,
    };
    Ok((plan.sequence(), plan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::empirical_i;
    use crate::ratio;

    #[test]
    fn structure_and_capacity() {
        let (a, plan) = separation_sequence(1, 5000).unwrap();
        assert!(plan.stages.len() >= 2);
        assert_eq!(a, plan.sequence());
        assert!(a.len() <= 5000);
        let mut at = 0;
        for s in &plan.stages {
            for _ in 0..s.reps {
                assert_eq!(a.slice(at, at + s.block.len()), s.block);
                at += s.block.len();
            }
        }
        assert_eq!(at, a.len());
        assert!(matches!(separation_sequence(1, 10), Err(Error::Capacity { needed: Some(_), .. })));
        let cls = enumerate_machines(1).unwrap();
        assert!(empirical_i(&a, &cls, a.len()).unwrap() >= ratio(2, 5));
    }
}
