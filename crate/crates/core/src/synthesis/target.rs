//! Sequences whose empirical predictability over a hierarchy tracks a
//! prescribed value.
//!
//! The sequence opens with a zero block and an adversarial ramp sized so the
//! running value lands near the target. After that, each block is
//! adversarial while the running top-level value is below the target and
//! zero otherwise. Block lengths grow with the prefix so that one block
//! moves the running value by less than `step = delta / m`, where `m` is the
//! number of levels and `delta = I0 / 8` (`1/16` when `I0 = 0`).

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::bitseq::BitSeq;
use crate::error::{Error, Result};
use crate::estimator::Tracker;
use crate::machine::Hierarchy;
use crate::{ratio, Rational};

use super::adversary::{adversarial_from_states, min_block_len};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Zeros,
    Adversarial,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Zeros => "zeros",
            BlockKind::Adversarial => "adversarial",
        })
    }
}

impl FromStr for BlockKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeros" => Ok(BlockKind::Zeros),
            "adversarial" => Ok(BlockKind::Adversarial),
            _ => Err(Error::invalid(format!("unknown block kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanBlock {
    pub kind: BlockKind,
    pub len: usize,
    /// Hierarchy level the block is built against, counted from 1.
    pub level: usize,
    /// Certified minimum error rate over that level; adversarial blocks only.
    pub margin: Option<Rational>,
}

/// Every block decision of a synthesis run. Replaying the plan against the
/// same hierarchy regenerates the sequence exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisPlan {
    pub target: Rational,
    pub eps: Rational,
    pub step: Rational,
    pub levels: Vec<String>,
    pub blocks: Vec<PlanBlock>,
}

impl SynthesisPlan {
    /// Cumulative block ends.
    pub fn checkpoints(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |end, b| {
                *end += b.len;
                Some(*end)
            })
            .collect()
    }

    pub fn total_len(&self) -> usize {
        self.blocks.iter().map(|b| b.len).sum()
    }

    /// Header line followed by one `kind len level margin` line per block;
    /// the margin is `-` for zero blocks.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "plan target={} eps={} step={} levels={} blocks={}\n",
            self.target,
            self.eps,
            self.step,
            self.levels.join(";"),
            self.blocks.len()
        );
        for b in &self.blocks {
            let margin = b.margin.map_or_else(|| "-".to_string(), |m| m.to_string());
            let _ = writeln!(s, "{} {} {} {margin}", b.kind, b.len, b.level);
        }
        s
    }

    /// Parses [`SynthesisPlan::to_text`] output. Lines starting with `#`
    /// are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let (no, header) = lines.next().ok_or_else(|| perr(1, "empty plan"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("plan") {
            return Err(perr(no, "expected plan header"));
        }
        let mut get = |key: &str| -> Result<String> {
            fields
                .next()
                .and_then(|f| f.strip_prefix(key))
                .and_then(|f| f.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| perr(no, &format!("expected {key}=")))
        };
        let rat = |s: String| -> Result<Rational> { s.parse().map_err(|_| perr(no, &format!("bad rational '{s}'"))) };
        let target = rat(get("target")?)?;
        let eps = rat(get("eps")?)?;
        let step = rat(get("step")?)?;
        let levels: Vec<String> = get("levels")?.split(';').map(str::to_string).collect();
        let count: usize = get("blocks")?.parse().map_err(|_| perr(no, "bad block count"))?;
        let mut blocks = Vec::with_capacity(count);
        for (no, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let [kind, len, level, margin] = f.as_slice() else {
                return Err(perr(no, "expected '<kind> <len> <level> <margin>'"));
            };
            let kind: BlockKind = kind.parse().map_err(|_| perr(no, "bad block kind"))?;
            let len: usize = len.parse().map_err(|_| perr(no, "bad block length"))?;
            let level: usize = level.parse().map_err(|_| perr(no, "bad level"))?;
            let margin = match (*margin, kind) {
                ("-", BlockKind::Zeros) => None,
                (m, BlockKind::Adversarial) => {
                    Some(m.parse().map_err(|_| perr(no, &format!("bad margin '{m}'")))?)
                }
                _ => return Err(perr(no, "zero blocks carry no margin")),
            };
            if len == 0 || level == 0 || level > levels.len() {
                return Err(perr(no, "block length and level must be positive and in range"));
            }
            blocks.push(PlanBlock { kind, len, level, margin });
        }
        if blocks.len() != count {
            return Err(perr(no, &format!("header announces {count} blocks, found {}", blocks.len())));
        }
        Ok(SynthesisPlan {
            target,
            eps,
            step,
            levels,
            blocks,
        })
    }

    /// Regenerates the sequence block by block, checking every recorded
    /// margin.
    pub fn replay(&self, h: &Hierarchy) -> Result<BitSeq> {
        let labels: Vec<String> = h.levels().iter().map(|c| c.label().to_string()).collect();
        if labels != self.levels {
            return Err(Error::invalid(format!(
                "plan was built for levels {} but replay got {}",
                self.levels.join(";"),
                labels.join(";")
            )));
        }
        let mut trackers: Vec<Option<Tracker>> = vec![None; h.depth()];
        let mut out = BitSeq::with_capacity(self.total_len());
        for (j, b) in self.blocks.iter().enumerate() {
            let block = match b.kind {
                BlockKind::Zeros => BitSeq::zeros(b.len),
                BlockKind::Adversarial => {
                    let t = trackers[b.level - 1].get_or_insert_with(|| {
                        let mut t = Tracker::new(h.level(b.level));
                        t.push_block(&out);
                        t
                    });
                    let c = adversarial_from_states(h.level(b.level), t.states(), b.len, self.eps)?;
                    if Some(c.margin) != b.margin {
                        return Err(Error::invalid(format!(
                            "replay diverged at block {}: margin {} instead of {}",
                            j + 1,
                            c.margin,
                            b.margin.map_or("-".to_string(), |m| m.to_string())
                        )));
                    }
                    c.bits
                }
            };
            for t in trackers.iter_mut().flatten() {
                t.push_block(&block);
            }
            out.extend_from(&block);
        }
        Ok(out)
    }
}

fn perr(line: usize, message: &str) -> Error {
    Error::Parse {
        location: format!("line {line}"),
        message: message.to_string(),
    }
}

/// Longest block that moves the running value by less than `step` after a
/// prefix of length `n`: the largest `L` with `L / (n + L) < step`.
pub fn max_block_len(n: usize, step: Rational) -> usize {
    let q = step * Rational::from_integer(n as i64) / (ratio(1, 1) - step);
    let l = if q.is_integer() { q.to_integer() - 1 } else { q.floor().to_integer() };
    l.max(0) as usize
}

/// Shortest prefix after which blocks of length `len` are allowed.
fn prefix_for_block(len: usize, step: Rational) -> usize {
    let q = Rational::from_integer(len as i64) * (ratio(1, 1) - step) / step;
    q.floor().to_integer() as usize + 1
}

/// Builds a sequence of length `total_len` whose running predictability over
/// the top level of `h` stays within one step of `i0` once the opening
/// blocks are through. Adversarial blocks are certified against the top
/// level at rate `1/2 - eps` with `eps = max((1/2 - i0) / 2, 1/20)`.
pub fn synthesize_target(h: &Hierarchy, i0: Rational, total_len: usize) -> Result<(BitSeq, SynthesisPlan)> {
    let half = ratio(1, 2);
    if i0 < ratio(0, 1) || i0 > half {
        return Err(Error::invalid(format!("target must lie in [0, 1/2], got {i0}")));
    }
    let m = h.depth();
    let top = h.top();
    let delta = if i0 == ratio(0, 1) { ratio(1, 16) } else { i0 / 8 };
    let step = delta / Rational::from_integer(m as i64);
    let eps = ((half - i0) / 2).max(ratio(1, 20));

    let n_min = if i0 > ratio(0, 1) {
        min_block_len(top.len(), crate::to_f64(&eps))
            .ok_or_else(|| Error::capacity(format!("eps {eps} is below the weighting scheme's asymptotic loss"), None))?
            as usize
    } else {
        1
    };
    let head_len = prefix_for_block(n_min, step);

    let mut opening = Vec::new();
    if i0 == half {
        opening.push((BlockKind::Adversarial, head_len));
    } else if i0 == ratio(0, 1) {
        opening.push((BlockKind::Zeros, head_len));
    } else {
        let k = (Rational::from_integer(head_len as i64) * (ratio(1, 1) - i0 * 2)).ceil().to_integer() as usize;
        let ramp = (Rational::from_integer(k as i64) * i0 / (half - i0)).ceil().to_integer() as usize;
        opening.push((BlockKind::Zeros, k.max(1)));
        opening.push((BlockKind::Adversarial, ramp.max(n_min)));
    }

    // Smallest total length holding three full blocks.
    let mut lens: Vec<usize> = opening.iter().map(|&(_, l)| l).collect();
    while lens.len() < 3 {
        let n: usize = lens.iter().sum();
        lens.push(max_block_len(n, step).max(1));
    }
    let needed: usize = lens.iter().sum();
    if total_len < needed {
        return Err(Error::capacity(
            format!("target {i0} over {} levels needs at least {needed} digits", m),
            Some(needed as u64),
        ));
    }

    let mut tracker = Tracker::new(top);
    let mut out = BitSeq::with_capacity(total_len);
    let mut blocks = Vec::new();
    let mut emit = |kind: BlockKind, len: usize, tracker: &mut Tracker, out: &mut BitSeq| -> Result<()> {
        let (bits, margin) = match kind {
            BlockKind::Zeros => (BitSeq::zeros(len), None),
            BlockKind::Adversarial => {
                let c = adversarial_from_states(top, tracker.states(), len, eps)?;
                (c.bits, Some(c.margin))
            }
        };
        tracker.push_block(&bits);
        out.extend_from(&bits);
        blocks.push(PlanBlock {
            kind,
            len,
            level: m,
            margin,
        });
        Ok(())
    };
    for &(kind, len) in &opening {
        emit(kind, len, &mut tracker, &mut out)?;
    }
    while out.len() < total_len {
        let remaining = total_len - out.len();
        let mut len = max_block_len(out.len(), step).max(1).min(remaining);
        // Leave the final block long enough to certify.
        if remaining - len > 0 && remaining - len < n_min {
            len = if remaining - n_min >= n_min { remaining - n_min } else { remaining };
        }
        let running = tracker.value().expect("nonempty prefix");
        let mut kind = if i0 == half || running < i0 {
            BlockKind::Adversarial
        } else {
            BlockKind::Zeros
        };
        // A truncated final block too short to certify is filled with zeros.
        if kind == BlockKind::Adversarial && len < n_min {
            kind = BlockKind::Zeros;
        }
        emit(kind, len, &mut tracker, &mut out)?;
    }
    let plan = SynthesisPlan {
        target: i0,
        eps,
        step,
        levels: h.levels().iter().map(|c| c.label().to_string()).collect(),
        blocks,
    };
    Ok((out, plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_length_rule() {
        let step = ratio(1, 64);
        for n in [0, 1, 63, 64, 1000, 12345] {
            let l = max_block_len(n, step);
            assert!(Rational::from_integer(l as i64) < step * Rational::from_integer((n + l) as i64) || l == 0);
            let l1 = (l + 1) as i64;
            assert!(Rational::from_integer(l1) >= step * Rational::from_integer(n as i64 + l1));
        }
        for len in [1, 7, 200] {
            let n = prefix_for_block(len, step);
            assert!(max_block_len(n, step) >= len);
            assert!(max_block_len(n - 1, step) < len);
        }
    }

    #[test]
    fn zero_target_gives_zeros() {
        let h = Hierarchy::fsm(2).unwrap();
        let (a, plan) = synthesize_target(&h, ratio(0, 1), 1000).unwrap();
        assert_eq!(a, BitSeq::zeros(1000));
        assert_eq!(plan.total_len(), 1000);
        assert!(plan.blocks.iter().all(|b| b.kind == BlockKind::Zeros));
    }

    #[test]
    fn range_and_capacity() {
        let h = Hierarchy::fsm(2).unwrap();
        assert!(matches!(synthesize_target(&h, ratio(3, 4), 1000), Err(Error::InvalidArgument(_))));
        match synthesize_target(&h, ratio(1, 4), 100) {
            Err(Error::Capacity { needed: Some(n), .. }) => {
                assert!(synthesize_target(&h, ratio(1, 4), n as usize).is_ok());
                assert!(synthesize_target(&h, ratio(1, 4), n as usize - 1).is_err());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn plan_round_trip_and_replay() {
        let h = Hierarchy::fsm(1).unwrap();
        let (a, plan) = synthesize_target(&h, ratio(1, 4), 20000).unwrap();
        let text = plan.to_text();
        let parsed = SynthesisPlan::parse_text(&text).unwrap();
        assert_eq!(parsed, plan);
        assert_eq!(parsed.replay(&h).unwrap(), a);
        assert!(parsed.replay(&Hierarchy::fsm(2).unwrap()).is_err());
        let ends = plan.checkpoints();
        assert_eq!(*ends.last().unwrap(), 20000);
        assert!(ends.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn plan_parse_errors() {
        assert!(SynthesisPlan::parse_text("").is_err());
        let bad = "plan target=1/4 eps=1/8 step=1/32 levels=fsm:1 blocks=2\nzeros 5 1 -\n";
        match SynthesisPlan::parse_text(bad) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 1"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = "plan target=1/4 eps=1/8 step=1/32 levels=fsm:1 blocks=1\nzeros 5 1 1/2\n";
        match SynthesisPlan::parse_text(bad) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "line 2"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
