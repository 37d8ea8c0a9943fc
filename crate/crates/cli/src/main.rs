//! Batch front end: every verb reads files, runs one library operation and
//! writes its outputs, mapping failures onto a fixed exit-code table.

use std::fs;
use std::io::Write;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use predictability::bitseq::{extract_p, sum_s};
use predictability::estimator::{empirical_i, hierarchy_invariance_check, predictability_curve};
use predictability::experiments::{
    bernoulli_generate, disjunction_holds, verify_axiom_closure, verify_bernoulli_theorem, verify_independence_bound,
    verify_main_disjunction, verify_xor_relation, DEFAULT_TOL,
};
use predictability::report::Report;
use predictability::synthesis::{repeat_detector_errors, separation_sequence, synthesize_target};
use predictability::{ratio, BitSeq, Error, Hierarchy, MooreMachine, PredictorClass, Rational, VERSION};

const EXIT_VERDICT: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "predictability", version, about = "Finite-state predictability of binary sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical predictability curve of a bit file over a class hierarchy.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Single class spec, e.g. `fsm:2` or `curated-F1`.
        #[arg(long, conflicts_with = "hierarchy")]
        class: Option<String>,
        /// Comma-separated hierarchy spec; `fsm:k` expands to levels 1..=k.
        #[arg(long)]
        hierarchy: Option<String>,
        /// Single checkpoint; defaults to the input length.
        #[arg(long, conflicts_with = "checkpoints")]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<usize>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Triple operators and machine-driven selection.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        op: Op,
        /// Machine file, required by `select`.
        #[arg(long)]
        machine: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sequence whose predictability over a hierarchy is held at a target.
    #[command(alias = "synth")]
    Synthesize {
        #[arg(long, default_value = "fsm:2")]
        hierarchy: String,
        #[arg(long, value_parser = parse_rational)]
        target: Rational,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Block-repeated sequence separating fsm:k from the repeat detector.
    Separation {
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Smallest acceptable predictability over fsm:k.
        #[arg(long, default_value = "3/10", value_parser = parse_rational)]
        min_i: Rational,
        /// Largest acceptable repeat-detector error rate on the second half.
        #[arg(long, default_value_t = 0.05)]
        max_tail: f64,
        #[command(flatten)]
        report: ReportOut,
    },
    /// Closure equations of the combinators on random small machines.
    VerifyAxioms {
        #[arg(long, default_value_t = 3)]
        states: usize,
        /// Longest input length checked exhaustively.
        #[arg(long, default_value_t = 12)]
        len: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportOut,
    },
    /// Predictability of a Bernoulli sequence equals min(p, 1-p).
    VerifyBernoulli {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value = "fsm:2")]
        class: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        report: ReportOut,
    },
    /// Sums of Bernoulli digit pairs have predictability 2I(1-I).
    VerifyXor {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        report: ReportOut,
    },
    /// Lower bound on the best extracted or summed subsequence.
    VerifyIndependence {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        report: ReportOut,
    },
    /// Either a subsequence gains gamma or a dense selected one is hard.
    VerifyMain {
        /// Bit file; without it a Bernoulli sequence is generated.
        #[arg(long, conflicts_with = "p")]
        input: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Prefix length; defaults to the input length.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "fsm:2")]
        class: String,
        /// Defaults to I(1-2I)/5 with I the predictability of the input.
        #[arg(long, value_parser = parse_rational)]
        gamma: Option<Rational>,
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        #[command(flatten)]
        report: ReportOut,
    },
    /// Two hierarchies sharing their top level agree there exactly.
    HierarchyCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        h1: String,
        #[arg(long)]
        h2: String,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        report: ReportOut,
    },
    /// Seeded Bernoulli(p) bit file.
    BernoulliGen {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    P0,
    P1,
    P2,
    S1,
    S2,
    Select,
}

#[derive(clap::Args)]
struct Source {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct ReportOut {
    /// Report text destination; stdout when absent.
    #[arg(long = "report")]
    text: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failure classes, each with its exit code and diagnostic tag.
#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
    Verdict(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code_and_tag(&self) -> (u8, &'static str) {
        match self {
            Failure::Lib(Error::InvalidArgument(_)) => (EXIT_INPUT, "input"),
            Failure::Lib(Error::Parse { .. }) => (EXIT_INPUT, "parse"),
            Failure::Lib(Error::Precondition(_)) => (EXIT_INPUT, "precondition"),
            Failure::Lib(Error::Capacity { .. }) => (EXIT_CAPACITY, "capacity"),
            Failure::Lib(Error::Certification { .. }) => (EXIT_VERDICT, "certification"),
            Failure::Io(_) => (EXIT_INPUT, "io"),
            Failure::Usage(_) => (EXIT_INPUT, "usage"),
            Failure::Verdict(_) => (EXIT_VERDICT, "verdict"),
            Failure::Internal(_) => (EXIT_INTERNAL, "internal"),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(m) | Failure::Usage(m) | Failure::Verdict(m) | Failure::Internal(m) => m.clone(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return diagnose(EXIT_INPUT, "usage", first);
        }
    };
    panic::set_hook(Box::new(|_| {}));
    match panic::catch_unwind(|| run(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            let (code, tag) = f.code_and_tag();
            diagnose(code, tag, &f.message())
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            diagnose(EXIT_INTERNAL, "internal", &msg)
        }
    }
}

fn diagnose(code: u8, tag: &str, msg: &str) -> ExitCode {
    let flat: String = msg.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error[{tag}]: {flat}");
    ExitCode::from(code)
}

fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Estimate {
            input,
            class,
            hierarchy,
            n,
            checkpoints,
            output,
        } => {
            let a = read_bits(&input)?;
            let (spec, h) = match (class, hierarchy) {
                (Some(c), None) => {
                    let cls = PredictorClass::from_spec(&c)?;
                    (format!("class={c}"), Hierarchy::new(vec![cls])?)
                }
                (None, Some(s)) => (format!("hierarchy={s}"), Hierarchy::from_spec(&s)?),
                _ => return Err(Failure::Usage("exactly one of --class or --hierarchy is required".into())),
            };
            let cps = match (n, checkpoints) {
                (Some(n), None) => vec![n],
                (None, Some(c)) => c,
                _ => vec![a.len()],
            };
            let est = predictability_curve(&a, &h, &cps)?;
            let head = header("estimate", &[&path_param("input", &input), &spec, &format!("checkpoints={}", join(&cps))]);
            write_out(output.as_deref(), &(head + &est.to_csv()))
        }
        Command::Transform {
            input,
            op,
            machine,
            output,
        } => {
            let a = read_bits(&input)?;
            let b = match op {
                Op::P0 | Op::P1 | Op::P2 => extract_p(&a, op as usize)?,
                Op::S1 => sum_s(&a, 1)?,
                Op::S2 => sum_s(&a, 2)?,
                Op::Select => {
                    let path = machine.ok_or_else(|| Failure::Usage("--op select requires --machine".into()))?;
                    read_machine(&path)?.run_select(&a)
                }
            };
            write_out(output.as_deref(), &b.to_file_string())
        }
        Command::Synthesize {
            hierarchy,
            target,
            len,
            output,
            plan,
        } => {
            let h = Hierarchy::from_spec(&hierarchy)?;
            let (bits, p) = synthesize_target(&h, target, len)?;
            if let Some(path) = plan {
                let head = header("synthesize", &[&format!("hierarchy={hierarchy}"), &format!("target={target}"), &format!("len={len}")]);
                write_out(Some(&path), &(head + &p.to_text()))?;
            }
            write_out(output.as_deref(), &bits.to_file_string())
        }
        Command::Separation {
            states,
            len,
            output,
            plan,
            min_i,
            max_tail,
            report,
        } => {
            if !(0.0..=1.0).contains(&max_tail) {
                return Err(Error::InvalidArgument(format!("--max-tail must lie in [0, 1], got {max_tail}")).into());
            }
            let (a, p) = separation_sequence(states, len)?;
            let params = [format!("states={states}"), format!("len={len}"), format!("min-i={min_i}"), format!("max-tail={max_tail}")];
            let params: Vec<&str> = params.iter().map(String::as_str).collect();
            if let Some(path) = plan {
                write_out(Some(&path), &(header("separation", &params) + &p.to_text()))?;
            }
            write_out(Some(&output), &a.to_file_string())?;
            let r = separation_report(&a, states, min_i, max_tail)?;
            emit_report("separation", &params, &r, &report)
        }
        Command::VerifyAxioms {
            states,
            len,
            trials,
            seed,
            report,
        } => {
            let r = verify_axiom_closure(trials, states, len, seed)?;
            let params = [format!("states={states}"), format!("len={len}"), format!("trials={trials}"), format!("seed={seed}")];
            emit_report("verify-axioms", &refs(&params), &r, &report)
        }
        Command::VerifyBernoulli { src, class, tol, report } => {
            let cls = PredictorClass::from_spec(&class)?;
            let r = verify_bernoulli_theorem(src.p, src.n, src.seed, &cls, tol)?;
            let params = [src.params(), vec![format!("class={class}"), format!("tol={tol}")]].concat();
            emit_report("verify-bernoulli", &refs(&params), &r, &report)
        }
        Command::VerifyXor { src, tol, report } => {
            let r = verify_xor_relation(src.p, src.n, src.seed, tol)?;
            let params = [src.params(), vec![format!("tol={tol}")]].concat();
            emit_report("verify-xor", &refs(&params), &r, &report)
        }
        Command::VerifyIndependence { src, tol, report } => {
            let r = verify_independence_bound(src.p, src.n, src.seed, tol)?;
            let params = [src.params(), vec![format!("tol={tol}")]].concat();
            emit_report("verify-independence", &refs(&params), &r, &report)
        }
        Command::VerifyMain {
            input,
            p,
            seed,
            n,
            class,
            gamma,
            tol,
            report,
        } => {
            let (a, source) = match (input, p) {
                (Some(path), None) => (read_bits(&path)?, path_param("input", &path)),
                (None, Some(p)) => {
                    let n = n.ok_or_else(|| Failure::Usage("--n is required with --p".into()))?;
                    (bernoulli_generate(p, n, seed)?, format!("p={p} seed={seed}"))
                }
                _ => return Err(Failure::Usage("exactly one of --input or --p is required".into())),
            };
            let n = n.unwrap_or(a.len());
            let cls = PredictorClass::from_spec(&class)?;
            let gamma = match gamma {
                Some(g) => g,
                None => {
                    let i = empirical_i(&a, &cls, n)?;
                    i * (ratio(1, 1) - i * 2) / 5
                }
            };
            let r = verify_main_disjunction(&a, gamma, &cls, n, tol)?;
            debug_assert_eq!(r.all_hold(), disjunction_holds(&r));
            let params = [source, format!("n={n}"), format!("class={class}"), format!("gamma={gamma}"), format!("tol={tol}")];
            emit_report("verify-main", &refs(&params), &r, &report)
        }
        Command::HierarchyCheck { input, h1, h2, n, report } => {
            let a = read_bits(&input)?;
            let n = n.unwrap_or(a.len());
            let r = hierarchy_invariance_check(&a, &Hierarchy::from_spec(&h1)?, &Hierarchy::from_spec(&h2)?, n)?;
            let params = [path_param("input", &input), format!("h1={h1}"), format!("h2={h2}"), format!("n={n}")];
            emit_report("hierarchy-check", &refs(&params), &r, &report)
        }
        Command::BernoulliGen { src, output } => {
            let a = bernoulli_generate(src.p, src.n, src.seed)?;
            write_out(output.as_deref(), &a.to_file_string())
        }
    }
}

impl Source {
    fn params(&self) -> Vec<String> {
        vec![format!("p={}", self.p), format!("n={}", self.n), format!("seed={}", self.seed)]
    }
}

/// Class predictability at the end of the sequence and the repeat
/// detector's error rate on its second half.
fn separation_report(a: &BitSeq, states: usize, min_i: Rational, max_tail: f64) -> Result<Report, Failure> {
    let cls = PredictorClass::from_spec(&format!("fsm:{states}"))?;
    let n = a.len();
    let i = empirical_i(a, &cls, n)?;
    let half = n / 2;
    let tail_errors = repeat_detector_errors(a, half, n);
    let tail = Rational::new(tail_errors as i64, (n - half) as i64);
    let tail_f = predictability::to_f64(&tail);
    let mut r = Report::new("separation");
    r.input("states", states).input("len", n).input("min_i", min_i).input("max_tail", max_tail);
    r.quantity("I_class", i).quantity("tail_error", tail).quantity("tail_from", half);
    r.verdict(
        "class_resists",
        i >= min_i,
        Some(predictability::to_f64(&(i - min_i))),
        &["I_class"],
        "",
    );
    r.verdict("detector_learns", tail_f <= max_tail, Some(max_tail - tail_f), &["tail_error"], "");
    Ok(r)
}

fn emit_report(verb: &str, params: &[&str], r: &Report, out: &ReportOut) -> CmdResult {
    r.validate().map_err(|e| Failure::Internal(format!("malformed report: {e}")))?;
    let head = header(verb, params);
    write_out(out.text.as_deref(), &(head.clone() + &r.to_text()))?;
    if let Some(path) = &out.csv {
        write_out(Some(path), &(head + &r.to_csv()))?;
    }
    if r.all_hold() {
        Ok(())
    } else {
        let failed: Vec<&str> = r.verdicts.iter().filter(|v| !v.holds).map(|v| v.name.as_str()).collect();
        let what = if failed.is_empty() { "no verdicts".to_string() } else { failed.join(",") };
        Err(Failure::Verdict(format!("report {} failed: {what}", r.name)))
    }
}

fn header(verb: &str, params: &[&str]) -> String {
    format!("# predictability {VERSION} {verb} {}\n", params.join(" "))
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn join(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn path_param(key: &str, p: &Path) -> String {
    format!("{key}={}", p.display())
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_bits(path: &Path) -> Result<BitSeq, Failure> {
    BitSeq::parse_bytes(&read_file(path)?).map_err(|e| with_path(e, path))
}

fn read_machine(path: &Path) -> Result<MooreMachine, Failure> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Failure::Io(format!("{}: not UTF-8", path.display())))?;
    MooreMachine::parse_text(&text).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Failure {
    match e {
        Error::Parse { location, message } => Failure::Lib(Error::Parse {
            location: format!("{} {location}", path.display()),
            message,
        }),
        other => Failure::Lib(other),
    }
}

fn write_out(path: Option<&Path>, content: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

/// Accepts `a/b`, an integer, or a finite decimal such as `0.25`, exactly.
fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| format!("bad numerator in '{s}'"))?;
        let d: i64 = d.trim().parse().map_err(|_| format!("bad denominator in '{s}'"))?;
        if d == 0 {
            return Err(format!("zero denominator in '{s}'"));
        }
        return Ok(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits_ok = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if (int.is_empty() && frac.is_empty()) || !digits_ok(int) || !digits_ok(frac) || frac.len() > 15 {
        return Err(format!("expected a fraction or decimal, got '{s}'"));
    }
    let den = 10i64.pow(frac.len() as u32);
    let whole: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| format!("'{s}' is out of range"))? };
    let part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| format!("'{s}' is out of range"))? };
    let num = whole
        .checked_mul(den)
        .and_then(|w| w.checked_add(part))
        .ok_or_else(|| format!("'{s}' is out of range"))?;
    Ok(Rational::new(if neg { -num } else { num }, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("1/4").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0").unwrap(), ratio(0, 1));
        assert_eq!(parse_rational("-0.1").unwrap(), ratio(-1, 10));
        for bad in ["", "1/0", "a", "0.2.3", "1e3", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
