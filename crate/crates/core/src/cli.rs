//! Command-line front end.
//!
//! Exit codes: 0 when every check passes or the scenario is feasible, 1 when
//! a checked property is violated or the scenario is infeasible, 2 on input
//! or configuration errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::Signed;
use serde_json::{json, Map, Value};

use crate::batch::{exercise_batch, theorem2_batch, Theorem2Trial};
use crate::error::Error;
use crate::feasibility::{
    bch_forms, bch_holds, chsh_value, classical_chsh_bound, hv_feasibility, scenario_settings, ChshSettings,
    FeasibilityOptions, FeasibilityResult, FeasibilityStatus, Scenario,
};
use crate::format::{load_model, load_scenario, load_state};
use crate::hvmodel::check_all;
use crate::nogo::{StepKind, Verdict};
use crate::opcore::Tolerances;
use crate::report::{theorem_json, CheckEntry, CheckVerdict, Report, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nogo-lab", version, about = "Verification lab for hidden-variable no-go results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Human,
    Structured,
}

#[derive(Debug, Args)]
struct Common {
    /// Absolute tolerance for operator identities
    #[arg(long, default_value_t = Tolerances::DEFAULT_TOL)]
    tol: f64,
    /// Eigenvalue clustering gap
    #[arg(long = "cluster-gap", default_value_t = Tolerances::DEFAULT_CLUSTER_GAP)]
    cluster_gap: f64,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Hilbert-space dimension (2 to 32)
    #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
    dim: i64,
    #[arg(long, default_value_t = 100, allow_negative_numbers = true)]
    trials: i64,
    #[arg(long, env = "NOGO_LAB_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check both commutativity proofs on random commuting and noncommuting projector pairs
    VerifyTheorem2 {
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run every h.v. axiom checker on a model file
    CheckModel {
        model: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decide h.v. model existence for a scenario file
    Feasibility {
        scenario: PathBuf,
        /// Named state (singlet, phi-plus, ghz, maximally-mixed) or a state file
        #[arg(long)]
        state: Option<String>,
        /// Planar CHSH settings a,a',b,b' in degrees
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        angles: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Check existence and uniqueness of the conditional density on random instances
    Exercise {
        #[command(flatten)]
        batch: BatchArgs,
        /// Candidate densities per instance for the uniqueness step
        #[arg(long, default_value_t = 20)]
        candidates: usize,
        #[command(flatten)]
        common: Common,
    },
}

struct ConfigError(String);

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn tolerances(c: &Common) -> Result<Tolerances, ConfigError> {
    for (name, v) in [("--tol", c.tol), ("--cluster-gap", c.cluster_gap)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ConfigError(format!("{name} must be a positive number, got {v}")));
        }
    }
    Ok(Tolerances::new(c.tol, c.cluster_gap))
}

fn batch_config(b: &BatchArgs, min_dim: i64) -> Result<(usize, u64), ConfigError> {
    if !(2..=32).contains(&b.dim) {
        return Err(ConfigError(format!("--dim must be between 2 and 32, got {}", b.dim)));
    }
    if b.dim < min_dim {
        return Err(ConfigError(format!(
            "--dim {} is too small: uniqueness of the conditional density requires dim >= {min_dim} (Gleason)",
            b.dim
        )));
    }
    if b.trials < 1 {
        return Err(ConfigError(format!("--trials must be at least 1, got {}", b.trials)));
    }
    Ok((b.dim as usize, b.trials as u64))
}

fn config_echo(command: &str, tols: Tolerances, extra: Value) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("tol".into(), json!(tols.tol));
    m.insert("clusterGap".into(), json!(tols.cluster_gap));
    if let Value::Object(e) = extra {
        m.extend(e);
    }
    Value::Object(m)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_CONFIG
                }
            };
        }
    };
    let (common, outcome) = match &cli.command {
        Command::VerifyTheorem2 { batch, common } => (common, cmd_verify_theorem2(batch, common)),
        Command::CheckModel { model, common } => (common, cmd_check_model(model, common)),
        Command::Feasibility { scenario, state, angles, common } => {
            (common, cmd_feasibility(scenario, state.as_deref(), angles.as_deref(), common))
        }
        Command::Exercise { batch, candidates, common } => (common, cmd_exercise(batch, *candidates, common)),
    };
    match outcome {
        Ok(report) => emit(&report, common, stdout, stderr),
        Err(ConfigError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_CONFIG
        }
    }
}

fn emit(report: &Report, common: &Common, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let text = match common.format {
        OutputFormat::Human => report.to_human(),
        OutputFormat::Structured => report.to_json(),
    };
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        }
        None => {
            let _ = write!(stdout, "{text}");
        }
    }
    report.exit_code
}

fn worst(verdicts: impl Iterator<Item = Verdict>) -> CheckVerdict {
    let mut out = CheckVerdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return CheckVerdict::Fail,
            Verdict::HypothesisViolated => out = CheckVerdict::HypothesisViolated,
            Verdict::Pass => {}
        }
    }
    out
}

fn route_entries(name: &str, anchor: &str, trials: &[&Theorem2Trial], pick: impl Fn(&Theorem2Trial) -> &crate::nogo::TheoremReport, tols: Tolerances) -> Vec<CheckEntry> {
    let (comm, noncomm): (Vec<&Theorem2Trial>, Vec<&Theorem2Trial>) = trials.iter().partition(|t| t.commuting);
    let mut out = Vec::new();
    if !comm.is_empty() {
        let residual = comm
            .iter()
            .flat_map(|t| pick(t).steps.iter().filter(|s| s.kind == StepKind::Derived).map(|s| s.residual))
            .fold(0.0, f64::max);
        let threshold = comm
            .iter()
            .flat_map(|t| pick(t).steps.iter().filter(|s| s.kind == StepKind::Derived).map(|s| s.threshold))
            .fold(0.0, f64::max);
        let verdict = match worst(comm.iter().map(|t| pick(t).verdict)) {
            CheckVerdict::HypothesisViolated => CheckVerdict::Fail,
            v => v,
        };
        out.push(CheckEntry::new(format!("{name}: commuting pairs"), anchor, residual, threshold.max(tols.tol), verdict));
    }
    if !noncomm.is_empty() {
        // every noncommuting pair must be caught at the hypothesis
        let residual = noncomm
            .iter()
            .map(|t| if pick(t).verdict == Verdict::HypothesisViolated { 0.0 } else { 1.0 })
            .sum::<f64>();
        let verdict = if noncomm.iter().any(|t| pick(t).verdict != Verdict::HypothesisViolated) {
            CheckVerdict::Fail
        } else {
            CheckVerdict::HypothesisViolated
        };
        out.push(CheckEntry::new(format!("{name}: noncommuting pairs"), anchor, residual, 0.0, verdict));
    }
    out
}

fn cmd_verify_theorem2(b: &BatchArgs, common: &Common) -> Result<Report, ConfigError> {
    let tols = tolerances(common)?;
    let (dim, trials) = batch_config(b, 2)?;
    let runs = theorem2_batch(dim, trials, b.seed, tols)?;
    let refs: Vec<&Theorem2Trial> = runs.iter().collect();
    let mut checks = route_entries("commutativity-chain", "commutativity-chain", &refs, |t| &t.chain, tols);
    checks.extend(route_entries("complement-chain", "complement-chain", &refs, |t| &t.alt, tols));

    let witnessed: Vec<&Theorem2Trial> = runs.iter().filter(|t| t.achieved.is_some()).collect();
    if !witnessed.is_empty() {
        let shortfall = witnessed
            .iter()
            .map(|t| 1.0 - t.achieved.unwrap_or(0.0) / t.gap)
            .fold(0.0, f64::max);
        let verdict = if shortfall <= 0.1 { CheckVerdict::Pass } else { CheckVerdict::Fail };
        checks.push(CheckEntry::new("witness attains the trace-symmetry gap", "trace-symmetry-witness", shortfall, 0.1, verdict));
    }
    let disagreements = runs.iter().filter(|t| t.chain.verdict != t.alt.verdict).count();
    checks.push(CheckEntry::new(
        "proof routes agree",
        "abab-equivalence",
        disagreements as f64,
        0.0,
        if disagreements == 0 { CheckVerdict::Pass } else { CheckVerdict::Fail },
    ));

    let count = |v: Verdict| runs.iter().filter(|t| t.chain.verdict == v).count();
    let failed = checks.iter().any(|c| c.verdict == CheckVerdict::Fail);
    let per_trial: Vec<Value> = runs
        .iter()
        .map(|t| {
            json!({
                "trial": t.trial,
                "commuting": t.commuting,
                "commutator": t.commutator,
                "symmetryGap": t.gap,
                "chain": t.chain.verdict,
                "alt": t.alt.verdict,
            })
        })
        .collect();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "verify-theorem2".into(),
        config: config_echo("verify-theorem2", tols, json!({"dim": dim, "trials": trials, "seed": b.seed})),
        checks,
        exit_code: if failed { EXIT_VIOLATION } else { EXIT_OK },
        details: json!({
            "summary": {
                "trials": trials,
                "pass": count(Verdict::Pass),
                "hypothesisViolated": count(Verdict::HypothesisViolated),
                "fail": count(Verdict::Fail),
                "routeDisagreements": disagreements,
            },
            "trials": per_trial,
        }),
    })
}

fn cmd_check_model(path: &Path, common: &Common) -> Result<Report, ConfigError> {
    let tols = tolerances(common)?;
    let model = load_model(path, tols)?;
    let results = check_all(&model, tols);
    let checks: Vec<CheckEntry> = results.iter().map(CheckEntry::from_check).collect();
    let flagged: Vec<Value> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| {
            json!({
                "rule": r.rule,
                "subject": r.subject,
                "phaseValue": r.phase_value,
                "quantumValue": r.quantum_value,
                "messages": r.flagged,
            })
        })
        .collect();
    let mut rules: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.rule.anchor()).collect();
    rules.dedup();
    let failed = !flagged.is_empty();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "check-model".into(),
        config: config_echo("check-model", tols, json!({"model": path.display().to_string()})),
        checks,
        exit_code: if failed { EXIT_VIOLATION } else { EXIT_OK },
        details: json!({
            "summary": {
                "points": model.space().len(),
                "observables": model.values().labels().len(),
                "checks": results.len(),
                "failed": flagged.len(),
                "flaggedRules": rules.join(", "),
            },
            "flagged": flagged,
        }),
    })
}

fn apply_overrides(mut s: Scenario, state: Option<&str>, angles: Option<&[f64]>) -> Result<Scenario, ConfigError> {
    if let Some(arg) = state {
        let d = load_state(arg, s.dim(), s.tolerances())?;
        s = s.with_state(d)?;
    }
    if let Some(a) = angles {
        let [a0, a1, b0, b1] = a else {
            return Err(ConfigError(format!("--angles needs four values a,a',b,b', got {}", a.len())));
        };
        if a.iter().any(|x| !x.is_finite()) {
            return Err(ConfigError("--angles must be finite".into()));
        }
        let roles = s
            .chsh()
            .cloned()
            .ok_or_else(|| ConfigError("--angles needs a scenario with CHSH roles".into()))?;
        if s.dim() != 4 {
            return Err(ConfigError("--angles needs a two-qubit scenario".into()));
        }
        let set = ChshSettings::from_angles([*a0, *a1, *b0, *b1]);
        s = s.with_matrices(&[
            (roles.alice[0].as_str(), set.a),
            (roles.alice[1].as_str(), set.a_prime),
            (roles.bob[0].as_str(), set.b),
            (roles.bob[1].as_str(), set.b_prime),
        ])?;
    }
    Ok(s)
}

fn certificate_json(s: &Scenario, r: &FeasibilityResult) -> Value {
    let Some(w) = &r.certificate else { return Value::Null };
    let entries: Vec<Value> = r
        .assignments
        .iter()
        .zip(w)
        .filter(|(_, x)| x.is_positive())
        .map(|(a, x)| {
            let mut values = Map::new();
            for (it, v) in s.items().iter().zip(a.values()) {
                values.insert(it.label().to_string(), json!(v));
            }
            json!({"assignment": values, "weight": x.to_string()})
        })
        .collect();
    Value::Array(entries)
}

fn cmd_feasibility(path: &Path, state: Option<&str>, angles: Option<&[f64]>, common: &Common) -> Result<Report, ConfigError> {
    let tols = tolerances(common)?;
    let scenario = apply_overrides(load_scenario(path, tols)?, state, angles)?;
    let mut checks = Vec::new();
    let mut details = Map::new();
    let mut summary = Map::new();

    if let (Some(_), Some(d)) = (scenario.chsh(), scenario.state()) {
        let settings = scenario_settings(&scenario)?;
        let v = chsh_value(d, &settings, tols)?;
        let bound = classical_chsh_bound(&scenario)?;
        let forms = bch_forms(v.correlators);
        let worst = forms.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
        let holds = bch_holds(v.correlators);
        checks.push(CheckEntry::new(
            "eight BCH inequalities",
            "bch-inequalities",
            worst,
            2.0,
            if holds { CheckVerdict::Pass } else { CheckVerdict::Fail },
        ));
        summary.insert("S".into(), json!(format!("{:.6}", v.s)));
        summary.insert("classicalBound".into(), json!(bound.to_string()));
        details.insert(
            "chsh".into(),
            json!({
                "S": v.s,
                "absS": v.s.abs(),
                "correlators": v.correlators,
                "bchForms": forms,
                "classicalBound": bound.to_string(),
            }),
        );
    }

    let result = match hv_feasibility(&scenario, FeasibilityOptions::default()) {
        Ok(r) => r,
        Err(Error::MissingState) => {
            return Err(ConfigError("scenario has admissible assignments but no state; pass --state".into()))
        }
        Err(e) => return Err(e.into()),
    };
    let status = serde_json::to_value(result.status).expect("status serializes");
    summary.insert("status".into(), status.clone());
    summary.insert("assignments".into(), json!(result.assignments.len()));
    details.insert("status".into(), status);
    details.insert("admissibleAssignments".into(), json!(result.assignments.len()));
    let (residual, verdict) = match result.status {
        FeasibilityStatus::Feasible => (0.0, CheckVerdict::Pass),
        FeasibilityStatus::Infeasible => (result.violated.as_ref().map_or(0.0, |v| v.margin), CheckVerdict::Fail),
        FeasibilityStatus::NoAdmissibleAssignments => (1.0, CheckVerdict::Fail),
    };
    checks.push(CheckEntry::new("h.v. model existence", "hv-feasibility", residual, 0.0, verdict));

    if result.status == FeasibilityStatus::Feasible {
        details.insert("certificateExact".into(), json!(result.certificate_is_exact()));
        details.insert("targetsAdjusted".into(), json!(result.adjusted));
    }
    details.insert("certificate".into(), certificate_json(&scenario, &result));
    if let Some(v) = &result.violated {
        summary.insert("violated".into(), json!(v.expression()));
        details.insert(
            "violated".into(),
            json!({
                "expression": v.expression(),
                "quantumSide": v.quantum,
                "classicalBound": v.bound.to_string(),
                "margin": v.margin,
            }),
        );
    }
    let constraints: Vec<Value> = result
        .constraints
        .iter()
        .map(|c| json!({"name": c.name, "quantum": c.quantum, "target": c.target.to_string()}))
        .collect();
    details.insert("constraints".into(), Value::Array(constraints));
    details.insert("summary".into(), Value::Object(summary));

    let echo = json!({
        "scenario": path.display().to_string(),
        "state": state,
        "angles": angles,
    });
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "feasibility".into(),
        config: config_echo("feasibility", tols, echo),
        checks,
        exit_code: if result.status == FeasibilityStatus::Feasible { EXIT_OK } else { EXIT_VIOLATION },
        details: Value::Object(details),
    })
}

fn cmd_exercise(b: &BatchArgs, candidates: usize, common: &Common) -> Result<Report, ConfigError> {
    let tols = tolerances(common)?;
    let (dim, trials) = batch_config(b, 3)?;
    let runs = exercise_batch(dim, trials, b.seed, candidates, tols)?;
    let mut checks = Vec::new();
    for prefix in ["existence", "support", "uniqueness"] {
        let steps: Vec<_> = runs
            .iter()
            .flat_map(|r| r.report.steps.iter().filter(|s| s.description.starts_with(prefix)))
            .collect();
        let residual = steps.iter().map(|s| s.residual).fold(0.0, f64::max);
        let threshold = steps.iter().map(|s| s.threshold).fold(0.0, f64::max);
        let ok = steps.iter().all(|s| s.passed);
        checks.push(CheckEntry::new(
            prefix,
            "conditional-density-uniqueness",
            residual,
            threshold,
            if ok { CheckVerdict::Pass } else { CheckVerdict::Fail },
        ));
    }
    let failed = runs.iter().filter(|r| r.report.verdict != Verdict::Pass).count();
    let per_trial: Vec<Value> = runs
        .iter()
        .map(|r| {
            let mut v = theorem_json(&r.report);
            v["trial"] = json!(r.trial);
            v["rank"] = json!(r.rank);
            v
        })
        .collect();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "exercise".into(),
        config: config_echo(
            "exercise",
            tols,
            json!({"dim": dim, "trials": trials, "seed": b.seed, "candidates": candidates}),
        ),
        checks,
        exit_code: if failed == 0 { EXIT_OK } else { EXIT_VIOLATION },
        details: json!({
            "summary": {"trials": trials, "failed": failed},
            "trials": per_trial,
        }),
    })
}
