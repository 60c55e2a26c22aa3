//! Command-line front end. [`run`] takes the argument vector and output
//! streams and returns the process exit code:
//! 0 verified, 1 violation found, 2 usage or input error, 3 budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};
use serde_json::{json, Value};

use crate::affgroup::{classify, ClassificationReport};
use crate::ff::{FieldElement, FieldSpec};
use crate::harness::{
    extremal_search, parse_sizes, persist_counterexamples, run_campaign, Campaign, HarnessError,
    Mode, Target, DEFAULT_BUDGET,
};
use crate::io::{parse_aff_set, parse_point_set};
use crate::plane::{
    complement_and_remainder, direction_bounds, direction_set, maindir_check, normalize_infinity,
    redei_polynomial, slope_decomposition, spans_all_check, PlaneError, PlanePointSet, Slope,
    UpperBound,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Environment variable overriding the exhaustive enumeration budget.
pub const BUDGET_VAR: &str = "REDEI_BUDGET";
/// Default directory for counterexample files.
pub const DEFAULT_CEX_DIR: &str = "redei-counterexamples";

#[derive(Parser, Debug)]
#[command(
    name = "redei",
    version,
    about = "Directions in finite planes and growth in Aff(F_q)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the canonical description of F_{p^e}.
    Field {
        p: u64,
        e: u32,
        #[arg(long)]
        json: bool,
    },
    /// Directions spanned by a point set.
    Directions {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Rédei polynomial data at one finite slope.
    Redei {
        file: PathBuf,
        #[arg(long)]
        slope: u64,
        #[arg(long)]
        json: bool,
    },
    /// Direction bounds and the direction threshold verdict.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Structural classification of a symmetric affine set.
    Classify {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a verification campaign.
    #[command(group(ArgGroup::new("mode").required(true).args(["exhaustive", "samples"])))]
    Verify {
        #[arg(long)]
        target: Target,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0, requires = "samples")]
        seed: u64,
        /// Inclusive range `a..b`.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        json: bool,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where violation records go.
        #[arg(long)]
        cex_dir: Option<PathBuf>,
        /// Include wall-clock seconds in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Minimum number of directions over non-collinear sets of one size.
    Search {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        size: usize,
        /// Random sets tried when exhaustive search exceeds the budget.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        json: bool,
    },
}

/// An error that ends the run with a given exit code.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type Outcome = Result<i32, Failure>;

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes())
        .map_err(|e| usage(format!("cannot write output: {e}")))?;
    Ok(EXIT_OK)
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Outcome {
    emit(
        out,
        &format!("{}\n", serde_json::to_string_pretty(v).expect("json")),
    )
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_points(path: &Path) -> Result<PlanePointSet, Failure> {
    parse_point_set(&read(path)?).map_err(|e| {
        usage(format!(
            "{}:{}:{}: {}",
            path.display(),
            e.line,
            e.column,
            e.message
        ))
    })
}

fn field_from_q(q: u64) -> Result<FieldSpec, Failure> {
    FieldSpec::from_order(q).map_err(|e| usage(e.to_string()))
}

fn budget() -> Result<u128, Failure> {
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| {
            usage(format!(
                "{BUDGET_VAR} must be a non-negative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    let code = match e {
        HarnessError::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn plane_err(e: PlaneError) -> Failure {
    usage(e.to_string())
}

fn slope_list(d: &std::collections::BTreeSet<Slope>) -> String {
    let parts: Vec<String> = d.iter().map(|s| s.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Field { p, e, json } => {
            let spec = FieldSpec::new(p, e).map_err(|x| usage(x.to_string()))?;
            if json {
                emit_json(
                    out,
                    &json!({
                        "p": spec.p(), "e": spec.e(), "q": spec.q(),
                        "modulus": spec.modulus_string(),
                        "modulus_code": spec.modulus_code(),
                    }),
                )
            } else {
                emit(
                    out,
                    &format!(
                        "p={} e={} q={} modulus={}\n",
                        spec.p(),
                        spec.e(),
                        spec.q(),
                        spec.modulus_string()
                    ),
                )
            }
        }
        Command::Directions { file, json } => {
            let a = load_points(&file)?;
            let summary = plane_summary(&a)?;
            if json {
                return emit_json(out, &summary.json);
            }
            let r = direction_set(&a).map_err(plane_err)?;
            emit(
                out,
                &format!(
                    "q={} size={}\nD = {}\n|D| = {}\nn = {}\ncollinear = {}\n",
                    a.q(),
                    a.len(),
                    slope_list(&r.directions),
                    r.directions.len(),
                    r.n,
                    r.collinear
                ),
            )
        }
        Command::Bounds { file, json } => {
            let a = load_points(&file)?;
            let summary = plane_summary(&a)?;
            if json {
                emit_json(out, &summary.json)?;
            } else {
                emit(out, &summary.text)?;
            }
            Ok(if summary.holds {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Redei { file, slope, json } => {
            let a = load_points(&file)?;
            redei_command(&a, slope, json, out)
        }
        Command::Classify { file, json } => {
            let text = read(&file)?;
            let a = parse_aff_set(&text).map_err(|e| {
                usage(format!(
                    "{}:{}:{}: {}",
                    file.display(),
                    e.line,
                    e.column,
                    e.message
                ))
            })?;
            let r = classify(&a).map_err(|e| usage(e.to_string()))?;
            if json {
                emit_json(out, &classification_json(&r))?;
            } else {
                emit(out, &classification_text(&r))?;
            }
            Ok(if r.disjunction_holds {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Verify {
            target,
            q,
            exhaustive,
            samples,
            seed,
            sizes,
            jobs,
            json,
            out: out_path,
            cex_dir,
            timing,
        } => {
            let spec = field_from_q(q)?;
            let mode = match (exhaustive, samples) {
                (true, _) => Mode::Exhaustive,
                (false, Some(samples)) => Mode::Random { samples, seed },
                (false, None) => unreachable!("clap requires a mode"),
            };
            let mut c = Campaign::new(target, &spec, mode)
                .jobs(jobs)
                .budget(budget()?);
            c.timing = timing;
            if let Some(s) = sizes {
                let (lo, hi) = parse_sizes(&s).map_err(usage)?;
                c = c.sizes(lo, hi);
            }
            let report = run_campaign(&c).map_err(harness_failure)?;
            let text = report.to_json();
            if let Some(path) = out_path {
                fs::write(&path, format!("{text}\n"))
                    .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
            }
            if json {
                emit(out, &format!("{text}\n"))?;
            } else {
                emit(
                    out,
                    &format!(
                        "target={} q={} mode={} sizes={}..{}\nchecked={} exempt={} violations={}\n{}\n",
                        report.target,
                        report.q,
                        report.mode,
                        report.sizes[0],
                        report.sizes[1],
                        report.checked,
                        report.exempt,
                        report.violation_count,
                        if report.verified() { "verified" } else { "VIOLATION" }
                    ),
                )?;
            }
            if report.verified() {
                return Ok(EXIT_OK);
            }
            let dir = cex_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_CEX_DIR));
            persist_counterexamples(&report, &dir).map_err(harness_failure)?;
            Ok(EXIT_VIOLATION)
        }
        Command::Search {
            q,
            size,
            samples,
            seed,
            jobs,
            json,
        } => {
            let spec = field_from_q(q)?;
            let r = extremal_search(&spec, size, budget()?, samples, seed, jobs)
                .map_err(harness_failure)?;
            if json {
                return emit_json(out, &serde_json::to_value(&r).expect("json"));
            }
            let mut text = format!(
                "q={} size={} mode={} checked={}",
                r.q, r.size, r.mode, r.checked
            );
            match r.min_d {
                Some(d) => text.push_str(&format!(" min|D|={d}\n")),
                None => text.push_str(" min|D|=exempt\n"),
            }
            for w in &r.witnesses {
                let pts: Vec<String> = w.iter().map(|[a, b]| format!("({a},{b})")).collect();
                text.push_str(&format!("witness: {}\n", pts.join(" ")));
            }
            emit(out, &text)
        }
    }
}

struct PlaneSummary {
    json: Value,
    text: String,
    holds: bool,
}

/// Directions, bounds and the threshold verdict of a point set.
fn plane_summary(a: &PlanePointSet) -> Result<PlaneSummary, Failure> {
    let r = direction_set(a).map_err(plane_err)?;
    let q = a.q() as usize;
    let count = r.directions.len();
    let d_json: Vec<Value> = r
        .directions
        .iter()
        .map(|s| serde_json::to_value(s).expect("json"))
        .collect();
    let mut text = format!(
        "q={} size={}\nD = {}\n|D| = {}\nn = {}\ncollinear = {}\n",
        q,
        a.len(),
        slope_list(&r.directions),
        count,
        r.n,
        r.collinear
    );
    let (mut l1, mut l2, mut lower, mut upper) =
        (Value::Null, Value::Null, Value::Null, Value::Null);
    let holds;
    if a.len() > q {
        holds = spans_all_check(a).map_err(plane_err)?;
        text.push_str(&format!("all {} directions spanned: {holds}\n", q + 1));
    } else {
        let mut ok = true;
        match direction_bounds(a) {
            Ok(b) => {
                l1 = json!(b.l1);
                l2 = json!(b.l2);
                lower = json!(b.lower);
                upper = serde_json::to_value(b.upper).expect("json");
                let up = match b.upper {
                    UpperBound::Trivial => "trivial".to_string(),
                    UpperBound::Finite(u) => u.to_string(),
                };
                text.push_str(&format!(
                    "l1 = {}, l2 = {} (slope {}, normalized by {})\nlower = {}, upper = {}\nsandwich: {}\n",
                    b.l1,
                    b.l2,
                    b.slope,
                    b.normalized_by,
                    b.lower,
                    up,
                    b.sandwich_holds()
                ));
                ok &= b.sandwich_holds();
            }
            Err(PlaneError::DegenerateDirectionCount { .. }) => {
                text.push_str("bounds: not applicable (|D| is 1 or q + 1)\n");
            }
            Err(e) => return Err(plane_err(e)),
        }
        let m = maindir_check(a).map_err(plane_err)?;
        if m.exempt {
            text.push_str("threshold: exempt (collinear)\n");
        } else {
            text.push_str(&format!(
                "threshold: |D| > {}/{}: {}\n",
                m.threshold.numer(),
                m.threshold.denom(),
                m.holds
            ));
            ok &= m.holds;
        }
        holds = ok;
    }
    let json = json!({
        "q": q,
        "size": a.len(),
        "D": d_json,
        "n": r.n,
        "collinear": r.collinear,
        "l1": l1,
        "l2": l2,
        "lower": lower,
        "upper": upper,
        "holds": holds,
    });
    Ok(PlaneSummary { json, text, holds })
}

fn redei_command(a: &PlanePointSet, slope: u64, json: bool, out: &mut dyn Write) -> Outcome {
    let spec = a.spec().clone();
    let y: FieldElement = spec.element(slope).map_err(|e| usage(e.to_string()))?;
    let (set, normalized_by) = if a.directions().contains(&Slope::Inf) || a.len() < 2 {
        (a.clone(), None)
    } else {
        let (norm, d) = normalize_infinity(a).map_err(plane_err)?;
        (norm, Some(d))
    };
    let h = redei_polynomial(&set, y).map_err(plane_err)?;
    let (f, g) = complement_and_remainder(&set, y).map_err(plane_err)?;
    let (l1, l2) = match slope_decomposition(&set, y) {
        Ok(dec) => (dec.l1, Some(dec.l2)),
        Err(PlaneError::SlopeNotDetermined(_)) | Err(PlaneError::InfinityNotSpanned) => {
            (None, None)
        }
        Err(e) => return Err(plane_err(e)),
    };
    if json {
        return emit_json(
            out,
            &json!({
                "y": y.code(),
                "normalized_by": normalized_by.map(|s| s.to_string()),
                "H": h.to_string(),
                "f": f.to_string(),
                "g": g.to_string(),
                "l1": l1,
                "l2": l2,
            }),
        );
    }
    let mut text = String::new();
    if let Some(d) = normalized_by {
        text.push_str(&format!("normalized by shear along direction {d}\n"));
    }
    let show = |v: Option<u32>| v.map_or("-".to_string(), |x| x.to_string());
    text.push_str(&format!(
        "y = {y}\nH = {h}\nf = {f}\ng = {g}\nl1 = {}\nl2 = {}\n",
        show(l1),
        show(l2)
    ));
    emit(out, &text)
}

fn classification_json(r: &ClassificationReport) -> Value {
    json!({
        "q": r.q,
        "size": r.size,
        "C": format!("{}/{}", r.tripling.numer(), r.tripling.denom()),
        "regime": r.regime,
        "case_a": r.case_a.as_ref().map(|c| json!({ "x": c.x })),
        "case_b": r.case_b.as_ref().map(|c| json!({ "pi": c.pi, "bound": c.bound, "holds": c.holds })),
        "case_c": r.case_c.as_ref().map(|c| json!({
            "pi": c.pi, "bound": c.bound, "holds": c.holds, "u_covered": c.u_covered,
        })),
        "holds": r.disjunction_holds,
    })
}

fn classification_text(r: &ClassificationReport) -> String {
    let regime = serde_json::to_value(r.regime).expect("json");
    let mut t = format!(
        "q={} size={} C={}/{} regime={}\n",
        r.q,
        r.size,
        r.tripling.numer(),
        r.tripling.denom(),
        regime.as_str().unwrap_or_default()
    );
    match &r.case_a {
        Some(c) => t.push_str(&format!("case a: A inside Stab({})\n", c.x)),
        None => t.push_str("case a: no\n"),
    }
    if let Some(c) = &r.case_b {
        t.push_str(&format!(
            "case b: |pi(A)| = {} < {}: {}\n",
            c.pi, c.bound, c.holds
        ));
    }
    if let Some(c) = &r.case_c {
        t.push_str(&format!(
            "case c: |pi(A)| = {} < {}: {}, U inside A^8: {}\n",
            c.pi, c.bound, c.holds, c.u_covered
        ));
    }
    t.push_str(&format!("holds: {}\n", r.disjunction_holds));
    t
}
