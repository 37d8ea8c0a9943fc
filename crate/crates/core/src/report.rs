//! Structured experiment outcomes with deterministic text and CSV forms.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::{to_f64, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Rational(Rational),
    Float(f64),
    Int(i64),
    Text(String),
}

impl Quantity {
    /// Rationals print as `num/den (decimal)`, floats with six decimals.
    pub fn render(&self) -> String {
        match self {
            Quantity::Rational(r) => format!("{r} ({:.6})", to_f64(r)),
            Quantity::Float(x) => format!("{x:.6}"),
            Quantity::Int(i) => i.to_string(),
            Quantity::Text(s) => s.clone(),
        }
    }
}

impl From<Rational> for Quantity {
    fn from(r: Rational) -> Self {
        Quantity::Rational(r)
    }
}

impl From<f64> for Quantity {
    fn from(x: f64) -> Self {
        Quantity::Float(x)
    }
}

impl From<i64> for Quantity {
    fn from(i: i64) -> Self {
        Quantity::Int(i)
    }
}

impl From<usize> for Quantity {
    fn from(i: usize) -> Self {
        Quantity::Int(i as i64)
    }
}

impl From<&str> for Quantity {
    fn from(s: &str) -> Self {
        Quantity::Text(s.to_string())
    }
}

impl From<String> for Quantity {
    fn from(s: String) -> Self {
        Quantity::Text(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    /// Signed slack of the checked inequality; positive means it holds
    /// with room to spare.
    pub margin: Option<f64>,
    /// Names of the quantities the verdict was computed from.
    pub uses: Vec<String>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub name: String,
    pub inputs: Vec<(String, String)>,
    pub quantities: Vec<(String, Quantity)>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Report {
            name: name.into(),
            inputs: Vec::new(),
            quantities: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn input(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.inputs.push((key.into(), value.to_string()));
        self
    }

    pub fn quantity(&mut self, key: impl Into<String>, value: impl Into<Quantity>) -> &mut Self {
        self.quantities.push((key.into(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|(k, _)| k == key).map(|(_, q)| q)
    }

    pub fn rational(&self, key: &str) -> Option<Rational> {
        match self.get(key) {
            Some(Quantity::Rational(r)) => Some(*r),
            _ => None,
        }
    }

    pub fn verdict(
        &mut self,
        name: impl Into<String>,
        holds: bool,
        margin: Option<f64>,
        uses: &[&str],
        note: impl Into<String>,
    ) -> &mut Self {
        self.verdicts.push(Verdict {
            name: name.into(),
            holds,
            margin,
            uses: uses.iter().map(|s| s.to_string()).collect(),
            note: note.into(),
        });
        self
    }

    pub fn find_verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// True when every verdict holds. A report without verdicts is vacuous
    /// and counts as false.
    pub fn all_hold(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.holds)
    }

    /// Checks that every verdict references recorded quantities only.
    pub fn validate(&self) -> Result<()> {
        for v in &self.verdicts {
            for u in &v.uses {
                if self.get(u).is_none() {
                    return Err(Error::invalid(format!(
                        "verdict {} references unknown quantity {u}",
                        v.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("report {}\n", self.name);
        for (k, v) in &self.inputs {
            let _ = writeln!(s, "input {k} = {v}");
        }
        for (k, q) in &self.quantities {
            let _ = writeln!(s, "quantity {k} = {}", q.render());
        }
        for v in &self.verdicts {
            let _ = write!(s, "verdict {} = {}", v.name, v.holds);
            if let Some(m) = v.margin {
                let _ = write!(s, " margin={m:.6}");
            }
            if !v.uses.is_empty() {
                let _ = write!(s, " uses={}", v.uses.join(";"));
            }
            if !v.note.is_empty() {
                let _ = write!(s, " note={}", v.note);
            }
            s.push('\n');
        }
        let _ = writeln!(s, "overall = {}", self.all_hold());
        s
    }

    /// Columns `section,key,value,holds,margin,uses,note`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("section,key,value,holds,margin,uses,note\n");
        let mut row = |fields: [&str; 7]| {
            let cells: Vec<String> = fields.iter().map(|f| csv_cell(f)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        };
        for (k, v) in &self.inputs {
            row(["input", k, v, "", "", "", ""]);
        }
        for (k, q) in &self.quantities {
            row(["quantity", k, &q.render(), "", "", "", ""]);
        }
        for v in &self.verdicts {
            let margin = v.margin.map(|m| format!("{m:.6}")).unwrap_or_default();
            let holds = v.holds.to_string();
            row(["verdict", &v.name, "", &holds, &margin, &v.uses.join(";"), &v.note]);
        }
        s
    }
}

fn csv_cell(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    fn sample() -> Report {
        let mut r = Report::new("demo");
        r.input("seed", 7).input("class", "fsm:2");
        r.quantity("I", ratio(3, 10)).quantity("note", "a, b");
        r.verdict("close", true, Some(0.0041), &["I"], "");
        r
    }

    #[test]
    fn text_and_csv() {
        let r = sample();
        assert!(r.validate().is_ok());
        let text = r.to_text();
        assert!(text.contains("quantity I = 3/10 (0.300000)\n"));
        assert!(text.contains("verdict close = true margin=0.004100 uses=I\n"));
        assert!(text.ends_with("overall = true\n"));
        let csv = r.to_csv();
        assert!(csv.contains("quantity,note,\"a, b\",,,,\n"));
        assert!(csv.contains("verdict,close,,true,0.004100,I,\n"));
    }

    #[test]
    fn dangling_reference_rejected() {
        let mut r = sample();
        r.verdict("bad", false, None, &["missing"], "");
        assert!(r.validate().is_err());
        assert!(!r.all_hold());
        assert!(!Report::new("empty").all_hold());
    }
}
