//! Plain-text machine files.
//!
//! ```text
//! moore v1 states=<k> start=<id>
//! <id> <output-bit> <next-on-0> <next-on-1>
//! ```
//!
//! with one state line per state in ascending id order.

use super::{MooreMachine, StateId};
use crate::error::{Error, Result};

impl MooreMachine {
    pub fn to_text(&self) -> String {
        let mut s = format!("moore v1 states={} start={}\n", self.state_count(), self.start());
        for (id, (out, [n0, n1])) in self.outputs().iter().zip(self.transitions()).enumerate() {
            s.push_str(&format!("{id} {} {n0} {n1}\n", *out as u8));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<MooreMachine> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty machine file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (k, start) = match fields.as_slice() {
            ["moore", "v1", states, start] => (
                keyed(states, "states=").ok_or_else(|| err(1, "expected states=<k>"))?,
                keyed(start, "start=").ok_or_else(|| err(1, "expected start=<id>"))?,
            ),
            _ => return Err(err(1, "expected header 'moore v1 states=<k> start=<id>'")),
        };
        if k == 0 {
            return Err(err(1, "machine needs at least one state"));
        }
        if start >= k {
            return Err(err(1, &format!("start state {start} out of range 0..{k}")));
        }
        let mut outputs = Vec::with_capacity(k as usize);
        let mut next = Vec::with_capacity(k as usize);
        for expected in 0..k {
            let (no, line) = lines
                .next()
                .ok_or_else(|| err(expected as usize + 2, &format!("missing line for state {expected}")))?;
            let nums: Vec<&str> = line.split_whitespace().collect();
            let [id, out, n0, n1] = nums.as_slice() else {
                return Err(err(no, "expected '<id> <output-bit> <next-on-0> <next-on-1>'"));
            };
            let id: StateId = num(id).ok_or_else(|| err(no, "bad state id"))?;
            if id != expected {
                return Err(err(no, &format!("expected state {expected}, found {id}")));
            }
            let out = match *out {
                "0" => false,
                "1" => true,
                _ => return Err(err(no, "output must be 0 or 1")),
            };
            let mut row = [0; 2];
            for (slot, t) in row.iter_mut().zip([n0, n1]) {
                let t: StateId = num(t).ok_or_else(|| err(no, "bad transition target"))?;
                if t >= k {
                    return Err(err(no, &format!("transition target {t} out of range 0..{k}")));
                }
                *slot = t;
            }
            outputs.push(out);
            next.push(row);
        }
        if let Some((no, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(err(no, &format!("unexpected trailing content '{line}'")));
        }
        MooreMachine::new(start, outputs, next)
    }
}

fn keyed(field: &str, key: &str) -> Option<StateId> {
    field.strip_prefix(key).and_then(num)
}

fn num(s: &str) -> Option<StateId> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn err(line: usize, message: &str) -> Error {
    Error::Parse {
        location: format!("line {line}"),
        message: message.to_string(),
    }
}
