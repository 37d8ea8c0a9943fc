use std::collections::HashMap;
use std::sync::Arc;

use super::{canonicalize, enumerate_machines, phi0, phi1, psi1, psi2, MooreMachine};
use crate::error::{Error, Result};

/// A finite set of predictors, stored as canonical forms without duplicates.
///
/// Member order is significant: it is the ordinal used to break ties when
/// several members attain the same error.
#[derive(Clone, Debug)]
pub struct PredictorClass {
    label: String,
    machines: Arc<Vec<MooreMachine>>,
    index: Arc<HashMap<MooreMachine, usize>>,
}

impl PredictorClass {
    /// Canonicalizes every machine and keeps the first occurrence of each
    /// equivalence class.
    pub fn new(label: impl Into<String>, machines: impl IntoIterator<Item = MooreMachine>) -> Self {
        let mut list = Vec::new();
        let mut index = HashMap::new();
        for m in machines {
            let c = canonicalize(&m);
            if !index.contains_key(&c) {
                index.insert(c.clone(), list.len());
                list.push(c);
            }
        }
        PredictorClass {
            label: label.into(),
            machines: Arc::new(list),
            index: Arc::new(index),
        }
    }

    pub(crate) fn from_canonical_sorted(label: String, machines: Vec<MooreMachine>) -> Self {
        let index = machines.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        PredictorClass {
            label,
            machines: Arc::new(machines),
            index: Arc::new(index),
        }
    }

    /// The four predictors every lowest level is assumed to hold: the two
    /// constants and the lag-2 and lag-1 repeaters.
    pub fn curated_f1() -> Self {
        PredictorClass::new("curated-F1", [phi0(), phi1(), psi1(), psi2()])
    }

    /// Parses a class spec: `curated-F1`, `fsm:<k>`, or a `+`-joined union
    /// of those such as `fsm:3+curated-F1`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split('+').map(str::trim).collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::invalid(format!("empty term in class spec '{spec}'")));
        }
        let mut classes = Vec::with_capacity(parts.len());
        for part in &parts {
            classes.push(match *part {
                "curated-F1" => PredictorClass::curated_f1(),
                p => match p.strip_prefix("fsm:") {
                    Some(k) => {
                        let k: usize = k
                            .parse()
                            .map_err(|_| Error::invalid(format!("bad state bound in '{p}'")))?;
                        enumerate_machines(k)?
                    }
                    None => return Err(Error::invalid(format!("unknown class '{p}'"))),
                },
            });
        }
        if classes.len() == 1 {
            return Ok(classes.pop().unwrap());
        }
        let mut iter = classes.into_iter();
        let first = iter.next().unwrap();
        Ok(iter.fold(first, |acc, c| acc.union(&c)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn machines(&self) -> &[MooreMachine] {
        &self.machines
    }

    pub fn len(&self) -> usize {
        self.machines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machines.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&MooreMachine> {
        self.machines.get(id)
    }

    /// Index of the member prediction-equivalent to `m`.
    pub fn position(&self, m: &MooreMachine) -> Option<usize> {
        self.index.get(&canonicalize(m)).copied()
    }

    pub fn contains(&self, m: &MooreMachine) -> bool {
        self.position(m).is_some()
    }

    /// Whether every member of `self` is a member of `other`.
    pub fn is_subset_of(&self, other: &PredictorClass) -> bool {
        self.machines.iter().all(|m| other.index.contains_key(m))
    }

    pub fn same_members(&self, other: &PredictorClass) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }

    /// Members of `self` followed by the members of `other` not already present.
    pub fn union(&self, other: &PredictorClass) -> PredictorClass {
        PredictorClass::new(
            format!("{}+{}", self.label, other.label),
            self.machines.iter().chain(other.machines.iter()).cloned(),
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Every member restarted from each of its states, deduplicated.
    pub fn restart_closure(&self) -> PredictorClass {
        let restarted = self.machines.iter().flat_map(|m| {
            (0..m.state_count() as u32).map(move |s| m.with_start(s).expect("state in range"))
        });
        PredictorClass::new(format!("restarts({})", self.label), restarted)
    }
}

/// Nested predictor classes `F_1 ⊂ F_2 ⊂ ...`.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    levels: Vec<PredictorClass>,
}

impl Hierarchy {
    /// Validates nesting by prediction equivalence.
    pub fn new(levels: Vec<PredictorClass>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("hierarchy needs at least one level"));
        }
        if let Some(i) = levels.iter().position(|c| c.is_empty()) {
            return Err(Error::invalid(format!("hierarchy level {} is empty", i + 1)));
        }
        for (i, pair) in levels.windows(2).enumerate() {
            if !pair[0].is_subset_of(&pair[1]) {
                return Err(Error::invalid(format!(
                    "hierarchy level {} ({}) is not contained in level {} ({})",
                    i + 1,
                    pair[0].label(),
                    i + 2,
                    pair[1].label()
                )));
            }
        }
        Ok(Hierarchy { levels })
    }

    /// Level `m` is the union of the first `m` classes, so nesting holds by
    /// construction and member ids of lower levels are preserved.
    pub fn cumulative(classes: Vec<PredictorClass>) -> Result<Self> {
        let mut levels: Vec<PredictorClass> = Vec::with_capacity(classes.len());
        for c in classes {
            let level = match levels.last() {
                Some(prev) if c.is_subset_of(prev) => {
                    return Err(Error::invalid(format!(
                        "class {} adds nothing to the previous level",
                        c.label()
                    )))
                }
                Some(prev) => prev.union(&c).with_label(format!("{}|{}", prev.label(), c.label())),
                None => c,
            };
            levels.push(level);
        }
        Hierarchy::new(levels)
    }

    /// Levels `fsm:1, ..., fsm:k`.
    pub fn fsm(k: usize) -> Result<Self> {
        let top = enumerate_machines(k)?;
        let levels = (1..=k)
            .map(|j| {
                let members: Vec<MooreMachine> = top
                    .machines()
                    .iter()
                    .filter(|m| m.state_count() <= j)
                    .cloned()
                    .collect();
                PredictorClass::from_canonical_sorted(format!("fsm:{j}"), members)
            })
            .collect();
        Hierarchy::new(levels)
    }

    /// Parses a comma-separated list of class specs into a cumulative
    /// hierarchy; a single `fsm:<k>` expands to `fsm:1, ..., fsm:k`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        if let [single] = parts.as_slice() {
            if let Some(k) = single.strip_prefix("fsm:") {
                if let Ok(k) = k.parse::<usize>() {
                    return Hierarchy::fsm(k);
                }
            }
        }
        let classes = parts
            .iter()
            .map(|p| PredictorClass::from_spec(p))
            .collect::<Result<Vec<_>>>()?;
        Hierarchy::cumulative(classes)
    }

    pub fn levels(&self) -> &[PredictorClass] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level `m`, counted from 1.
    pub fn level(&self, m: usize) -> &PredictorClass {
        &self.levels[m - 1]
    }

    pub fn top(&self) -> &PredictorClass {
        self.levels.last().expect("nonempty hierarchy")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::alternator;

    #[test]
    fn class_dedups_and_keeps_order() {
        let padded = MooreMachine::new(0, vec![true, false], vec![[0, 0], [1, 1]]).unwrap();
        let c = PredictorClass::new("x", [psi2(), padded, phi1(), psi2()]);
        assert_eq!(c.len(), 2);
        assert_eq!(c.machines()[0], psi2());
        assert_eq!(c.position(&phi1()), Some(1));
    }

    #[test]
    fn curated_class() {
        let f1 = PredictorClass::curated_f1();
        assert_eq!(f1.len(), 4);
        assert!(f1.contains(&psi1()));
        assert!(!f1.is_subset_of(&enumerate_machines(3).unwrap()));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(PredictorClass::from_spec("fsm:2").unwrap().label(), "fsm:2");
        let u = PredictorClass::from_spec("fsm:1+curated-F1").unwrap();
        assert_eq!(u.len(), 4);
        assert!(PredictorClass::from_spec("fsm:9").is_err());
        assert!(PredictorClass::from_spec("bogus").is_err());
        assert!(PredictorClass::from_spec("fsm:1+").is_err());
    }

    #[test]
    fn hierarchy_nesting() {
        let h = Hierarchy::fsm(3).unwrap();
        assert_eq!(h.depth(), 3);
        assert_eq!(h.level(1).len(), 2);
        for m in 1..3 {
            assert!(h.level(m).is_subset_of(h.level(m + 1)));
            assert_eq!(h.level(m).machines(), &h.level(m + 1).machines()[..h.level(m).len()]);
        }
        let bad = Hierarchy::new(vec![enumerate_machines(2).unwrap(), enumerate_machines(1).unwrap()]);
        assert!(bad.is_err());
    }

    #[test]
    fn cumulative_hierarchy() {
        let h = Hierarchy::from_spec("curated-F1,fsm:2").unwrap();
        assert_eq!(h.depth(), 2);
        assert!(h.top().contains(&psi1()));
        assert!(h.top().contains(&alternator()));
        assert_eq!(&h.top().machines()[..4], h.level(1).machines());
    }

    #[test]
    fn fsm_is_closed_under_restarts() {
        let c = enumerate_machines(2).unwrap();
        assert!(c.restart_closure().same_members(&c));
    }
}
