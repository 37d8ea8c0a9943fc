//! Empirical predictability: the smallest error rate any class member
//! achieves on a prefix, evaluated over a hierarchy and a set of prefix
//! lengths.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bitseq::BitSeq;
use crate::error::{Error, Result};
use crate::machine::{check_prefix, Hierarchy, MooreMachine, PredictorClass, StateId};
use crate::report::Report;
use crate::{to_f64, Rational};

/// Index and error count of the best member; ties go to the smaller index.
fn argmin_errors(a: &BitSeq, cls: &PredictorClass, n: usize) -> Result<(usize, usize)> {
    if cls.is_empty() {
        return Err(Error::invalid("predictor class is empty"));
    }
    check_prefix(a, n)?;
    Ok(cls
        .machines()
        .par_iter()
        .enumerate()
        .map(|(i, m)| (m.error_count(a, n), i))
        .min()
        .map(|(e, i)| (i, e))
        .expect("nonempty class"))
}

/// `I(a; cls, n)`: the minimum over `cls` of the error rate on `a[0..n]`.
pub fn empirical_i(a: &BitSeq, cls: &PredictorClass, n: usize) -> Result<Rational> {
    let (_, e) = argmin_errors(a, cls, n)?;
    Ok(Rational::new(e as i64, n as i64))
}

/// The member attaining [`empirical_i`] and its error rate.
pub fn best_predictor(a: &BitSeq, cls: &PredictorClass, n: usize) -> Result<(MooreMachine, Rational)> {
    let (i, e) = argmin_errors(a, cls, n)?;
    Ok((cls.machines()[i].clone(), Rational::new(e as i64, n as i64)))
}

/// Like [`best_predictor`] but returns the member index.
pub fn best_index(a: &BitSeq, cls: &PredictorClass, n: usize) -> Result<(usize, Rational)> {
    let (i, e) = argmin_errors(a, cls, n)?;
    Ok((i, Rational::new(e as i64, n as i64)))
}

/// Member positions of every level inside the top level.
pub(crate) fn level_members(h: &Hierarchy) -> Vec<Vec<usize>> {
    let top = h.top();
    h.levels()
        .iter()
        .map(|level| {
            level
                .machines()
                .iter()
                .map(|m| top.position(m).expect("levels are nested in the top level"))
                .collect()
        })
        .collect()
}

/// `I(a; m, n)` over a grid of levels and prefix lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    labels: Vec<String>,
    checkpoints: Vec<usize>,
    values: Vec<Vec<Rational>>,
    best: Vec<Vec<usize>>,
    limsup: Vec<Rational>,
}

impl Estimate {
    pub fn depth(&self) -> usize {
        self.values.len()
    }

    pub fn checkpoints(&self) -> &[usize] {
        &self.checkpoints
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn column(&self, n: usize) -> Option<usize> {
        self.checkpoints.iter().position(|&c| c == n)
    }

    /// Value at level `m` (from 1) and checkpoint `n`.
    pub fn value(&self, m: usize, n: usize) -> Option<Rational> {
        Some(self.values.get(m.checked_sub(1)?)?[self.column(n)?])
    }

    /// Index within level `m` of the member attaining the value.
    pub fn best(&self, m: usize, n: usize) -> Option<usize> {
        Some(self.best.get(m.checked_sub(1)?)?[self.column(n)?])
    }

    /// Values for level `m` in checkpoint order.
    pub fn row(&self, m: usize) -> &[Rational] {
        &self.values[m - 1]
    }

    /// Largest value at checkpoints in the upper half of the evaluated
    /// range, the finite stand-in for the limsup over `n`.
    pub fn limsup_proxy(&self, m: usize) -> Rational {
        self.limsup[m - 1]
    }

    /// Columns `level,n,value_num,value_den,best_machine_id`; the value is
    /// an exact reduced fraction.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,n,value_num,value_den,best_machine_id\n");
        for (m, (row, best)) in self.values.iter().zip(&self.best).enumerate() {
            for ((v, b), n) in row.iter().zip(best).zip(&self.checkpoints) {
                let _ = writeln!(s, "{},{n},{},{},{b}", m + 1, v.numer(), v.denom());
            }
        }
        s
    }
}

/// Evaluates every level of `h` at every checkpoint in a single pass over
/// `a` per top-level machine.
pub fn predictability_curve(a: &BitSeq, h: &Hierarchy, checkpoints: &[usize]) -> Result<Estimate> {
    if checkpoints.is_empty() {
        return Err(Error::invalid("at least one checkpoint is required"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be strictly ascending"));
    }
    check_prefix(a, checkpoints[0])?;
    check_prefix(a, *checkpoints.last().unwrap())?;

    let counts: Vec<Vec<usize>> = h
        .top()
        .machines()
        .par_iter()
        .map(|m| m.error_counts_at(a, checkpoints))
        .collect();

    let members = level_members(h);
    let largest = *checkpoints.last().unwrap();
    let mut values = Vec::with_capacity(members.len());
    let mut best = Vec::with_capacity(members.len());
    let mut limsup = Vec::with_capacity(members.len());
    for ids in &members {
        let mut row = Vec::with_capacity(checkpoints.len());
        let mut who = Vec::with_capacity(checkpoints.len());
        for (j, &n) in checkpoints.iter().enumerate() {
            let (e, k) = ids
                .iter()
                .enumerate()
                .map(|(k, &top)| (counts[top][j], k))
                .min()
                .expect("levels are nonempty");
            row.push(Rational::new(e as i64, n as i64));
            who.push(k);
        }
        let tail = checkpoints
            .iter()
            .zip(&row)
            .filter(|(&n, _)| 2 * n >= largest)
            .map(|(_, v)| *v)
            .max()
            .expect("the largest checkpoint is in the tail");
        values.push(row);
        best.push(who);
        limsup.push(tail);
    }
    Ok(Estimate {
        labels: h.levels().iter().map(|c| c.label().to_string()).collect(),
        checkpoints: checkpoints.to_vec(),
        values,
        best,
        limsup,
    })
}

/// Compares two hierarchies over the same total class on `a[0..n]`.
///
/// The top-level values must agree exactly. Each level of either hierarchy
/// is matched with the smallest level of the other containing it, whose
/// value can only be lower.
pub fn hierarchy_invariance_check(a: &BitSeq, h1: &Hierarchy, h2: &Hierarchy, n: usize) -> Result<Report> {
    if !h1.top().same_members(h2.top()) {
        return Err(Error::invalid(format!(
            "top levels differ: {} has {} members, {} has {}",
            h1.top().label(),
            h1.top().len(),
            h2.top().label(),
            h2.top().len()
        )));
    }
    check_prefix(a, n)?;
    let values = |h: &Hierarchy| -> Result<Vec<Rational>> {
        h.levels().iter().map(|c| empirical_i(a, c, n)).collect()
    };
    let v1 = values(h1)?;
    let v2 = values(h2)?;

    let mut r = Report::new("hierarchy-invariance");
    r.input("n", n).input("h1", labels(h1)).input("h2", labels(h2));
    for (tag, v) in [("h1", &v1), ("h2", &v2)] {
        for (i, x) in v.iter().enumerate() {
            r.quantity(format!("I_{tag}_{}", i + 1), *x);
        }
    }
    let t1 = format!("I_h1_{}", v1.len());
    let t2 = format!("I_h2_{}", v2.len());
    let top1 = *v1.last().unwrap();
    let top2 = *v2.last().unwrap();
    r.verdict(
        "top_levels_equal",
        top1 == top2,
        Some(-(to_f64(&top1) - to_f64(&top2)).abs()),
        &[&t1, &t2],
        "",
    );
    for (from, to, vf, vt, ff, ft) in [(h1, h2, &v1, &v2, "h1", "h2"), (h2, h1, &v2, &v1, "h2", "h1")] {
        let mut holds = true;
        let mut worst = f64::INFINITY;
        let mut pairs = Vec::new();
        let mut uses = Vec::new();
        for (i, level) in from.levels().iter().enumerate() {
            let j = to
                .levels()
                .iter()
                .position(|c| level.is_subset_of(c))
                .expect("the top level contains every level");
            holds &= vf[i] >= vt[j];
            worst = worst.min(to_f64(&vf[i]) - to_f64(&vt[j]));
            pairs.push(format!("{}->{}", i + 1, j + 1));
            uses.push(format!("I_{ff}_{}", i + 1));
            uses.push(format!("I_{ft}_{}", j + 1));
        }
        uses.sort();
        uses.dedup();
        let uses: Vec<&str> = uses.iter().map(String::as_str).collect();
        r.verdict(format!("{ff}_dominated_by_{ft}"), holds, Some(worst), &uses, pairs.join(" "));
    }
    Ok(r)
}

fn labels(h: &Hierarchy) -> String {
    h.levels().iter().map(|c| c.label()).collect::<Vec<_>>().join(";")
}

/// Running states and error counts of every member of a class while a
/// sequence is appended block by block.
#[derive(Clone, Debug)]
pub struct Tracker {
    cls: PredictorClass,
    states: Vec<StateId>,
    errors: Vec<u64>,
    len: usize,
}

impl Tracker {
    pub fn new(cls: &PredictorClass) -> Self {
        Tracker {
            cls: cls.clone(),
            states: cls.machines().iter().map(|m| m.start()).collect(),
            errors: vec![0; cls.len()],
            len: 0,
        }
    }

    pub fn class(&self) -> &PredictorClass {
        &self.cls
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn errors(&self) -> &[u64] {
        &self.errors
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push_block(&mut self, block: &BitSeq) {
        let machines = self.cls.machines();
        self.states
            .par_iter_mut()
            .zip(self.errors.par_iter_mut())
            .zip(machines.par_iter())
            .for_each(|((s, e), m)| {
                for bit in block.iter() {
                    *e += (m.output(*s) != bit) as u64;
                    *s = m.step(*s, bit);
                }
            });
        self.len += block.len();
    }

    /// Minimum error rate so far over the members listed in `ids`.
    pub fn value_over(&self, ids: &[usize]) -> Option<Rational> {
        if self.len == 0 {
            return None;
        }
        let e = ids.iter().map(|&i| self.errors[i]).min()?;
        Some(Rational::new(e as i64, self.len as i64))
    }

    /// Minimum error rate so far over the whole class.
    pub fn value(&self) -> Option<Rational> {
        if self.len == 0 {
            return None;
        }
        let e = *self.errors.iter().min()?;
        Some(Rational::new(e as i64, self.len as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{alternator, enumerate_machines, phi0, phi1};
    use crate::ratio;

    fn constants() -> PredictorClass {
        PredictorClass::new("const", [phi0(), phi1()])
    }

    #[test]
    fn examples() {
        let a: BitSeq = "0101".parse().unwrap();
        assert_eq!(empirical_i(&a, &constants(), 4).unwrap(), ratio(1, 2));
        let z = BitSeq::zeros(64);
        assert_eq!(empirical_i(&z, &constants(), 64).unwrap(), ratio(0, 1));
        let ones = BitSeq::ones(10);
        assert_eq!(best_predictor(&ones, &constants(), 10).unwrap(), (phi1(), ratio(0, 1)));
        let alt: BitSeq = (0..100).map(|i| i % 2 == 1).collect();
        let (m, v) = best_predictor(&alt, &enumerate_machines(2).unwrap(), 100).unwrap();
        assert_eq!(v, ratio(0, 1));
        assert_eq!(m.predict(&alt), alternator().predict(&alt));
        assert_eq!(alternator().error_count(&alt, 100), 0);
    }

    #[test]
    fn errors() {
        let a = BitSeq::zeros(4);
        let empty = PredictorClass::new("none", []);
        assert!(matches!(empirical_i(&a, &empty, 4), Err(Error::InvalidArgument(_))));
        assert!(matches!(empirical_i(&a, &constants(), 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(empirical_i(&a, &constants(), 5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ties_go_to_first_member() {
        let a: BitSeq = "01".parse().unwrap();
        assert_eq!(best_index(&a, &constants(), 2).unwrap().0, 0);
    }

    #[test]
    fn curve_and_csv() {
        let h = Hierarchy::fsm(2).unwrap();
        let a: BitSeq = "0110100110010110".parse().unwrap();
        let e = predictability_curve(&a, &h, &[4, 8, 16]).unwrap();
        for m in 1..=2 {
            for &n in e.checkpoints() {
                assert_eq!(e.value(m, n).unwrap(), empirical_i(&a, h.level(m), n).unwrap());
            }
        }
        assert_eq!(e.limsup_proxy(1), e.value(1, 8).unwrap().max(e.value(1, 16).unwrap()));
        let csv = e.to_csv();
        assert!(csv.starts_with("level,n,value_num,value_den,best_machine_id\n1,4,"));
        assert_eq!(csv.lines().count(), 7);
        assert!(predictability_curve(&a, &h, &[8, 4]).is_err());
        assert!(predictability_curve(&a, &h, &[17]).is_err());
    }

    #[test]
    fn tracker_matches_direct_evaluation() {
        let cls = enumerate_machines(2).unwrap();
        let a: BitSeq = "1101000111010110".parse().unwrap();
        let mut t = Tracker::new(&cls);
        t.push_block(&a.prefix(5));
        t.push_block(&a.slice(5, 16));
        assert_eq!(t.value().unwrap(), empirical_i(&a, &cls, 16).unwrap());
        for (i, m) in cls.machines().iter().enumerate() {
            assert_eq!(t.errors()[i] as usize, m.error_count(&a, 16));
            assert_eq!(t.states()[i], m.run(&a));
        }
    }

    #[test]
    fn invariance_requires_same_top() {
        let a = BitSeq::zeros(8);
        let h1 = Hierarchy::fsm(1).unwrap();
        let h2 = Hierarchy::fsm(2).unwrap();
        assert!(hierarchy_invariance_check(&a, &h1, &h2, 8).is_err());
        let r = hierarchy_invariance_check(&a, &h2, &h2, 8).unwrap();
        assert!(r.all_hold());
        assert!(r.validate().is_ok());
    }
}
