//! Acceptance criteria, one pass/fail line each.
//!
//! Runs without the libtest harness so the lines are always printed.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use nogo_lab::batch::{exercise_trial, family_batch, theorem2_pairs};
use nogo_lab::feasibility::{
    bch_holds, bch_margin, chsh_scenario, chsh_value, classical_chsh_bound, enumerate_assignments, hv_feasibility,
    pauli, singlet, ChshSettings, FeasibilityOptions, FeasibilityStatus, ItemKind,
};
use nogo_lab::format::load_scenario;
use nogo_lab::nogo::{trace_symmetry_gap, uniqueness_discriminator, Verdict};
use nogo_lab::opcore::random::{random_density, random_density_within, random_projector, random_unitary};
use nogo_lab::opcore::{c, C64};
use nogo_lab::quantum::{luders_density, Density, Projector};
use nogo_lab::rng::TrialRng;
use nogo_lab::{CMat, Error, Tolerances};

const SEED: u64 = 20_240_611;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn ac1_forward() -> Outcome {
    let t = Tolerances::default();
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for dim in 3..=6 {
        let runs = theorem2_pairs(dim, 1000, SEED + dim as u64, true, t).map_err(|e| e.to_string())?;
        for r in &runs {
            check(r.chain.verdict == Verdict::Pass, || format!("dim {dim} trial {}: {:?}", r.trial, r.chain.verdict))?;
            worst = worst.max(r.commutator);
        }
    }
    check(worst <= 1e-8, || format!("max ||AB - BA|| = {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("4000 commuting pairs pass, max ||AB - BA|| = {worst:.2e}, {:.2?}", start.elapsed()))
}

fn ac2_obstruction() -> Outcome {
    let t = Tolerances::default();
    let mut worst_ratio = f64::INFINITY;
    let mut n = 0;
    for dim in 3..=6 {
        for r in theorem2_pairs(dim, 250, SEED + 100 + dim as u64, false, t).map_err(|e| e.to_string())? {
            check(r.commutator > 0.05, || format!("pair with commutator {}", r.commutator))?;
            check(r.chain.verdict == Verdict::HypothesisViolated, || format!("trial {}: {:?}", r.trial, r.chain.verdict))?;
            let achieved = r.achieved.ok_or("no witness")?;
            worst_ratio = worst_ratio.min(achieved / r.gap);
            n += 1;
        }
    }
    check(worst_ratio >= 0.9, || format!("witness ratio {worst_ratio}"))?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = Projector::ray(&[c(s, 0.0), c(s, 0.0), c(0.0, 0.0)]).map_err(|e| e.to_string())?;
    let gap = trace_symmetry_gap(&Projector::basis(3, 0), &plus, t).map_err(|e| e.to_string())?.gap;
    let want = 1.0 / (2.0 * 2f64.sqrt());
    check((gap - want).abs() <= 1e-9, || format!("spot value {gap} vs {want}"))?;
    Ok(format!("{n} noncommuting pairs caught, min witness ratio {worst_ratio:.6}, spot gap {gap:.12}"))
}

fn ac3_routes_agree() -> Outcome {
    let t = Tolerances::default();
    let mut n = 0;
    for dim in 3..=6 {
        for commuting in [true, false] {
            for r in theorem2_pairs(dim, 250, SEED + 200 + dim as u64, commuting, t).map_err(|e| e.to_string())? {
                check(r.chain.verdict == r.alt.verdict, || {
                    format!("dim {dim} trial {}: chain {:?} vs alt {:?}", r.trial, r.chain.verdict, r.alt.verdict)
                })?;
                let expected = if commuting { Verdict::Pass } else { Verdict::HypothesisViolated };
                check(r.alt.verdict == expected, || format!("alt verdict {:?}", r.alt.verdict))?;
                n += 1;
            }
        }
    }
    Ok(format!("both routes agree on {n} pairs"))
}

fn ac4_round_trip() -> Outcome {
    let t = Tolerances::default();
    let start = Instant::now();
    let runs = family_batch((3, 6), 200, SEED + 300, t).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    let mut checks = 0;
    for r in &runs {
        for c in &r.checks {
            check(c.passed && c.residual <= 1e-9, || {
                format!("trial {} {:?} {}: residual {:e}", r.trial, c.rule, c.subject, c.residual)
            })?;
        }
        worst = worst.max(r.max_residual());
        checks += r.checks.len();
    }
    for rule in ["HV(a)", "HV(b)", "HV(c)", "HV(d)", "product-rule", "order-lemma", "conditional-rule"] {
        let seen = runs.iter().any(|r| r.checks.iter().any(|c| c.rule.anchor() == rule));
        check(seen, || format!("{rule} never exercised"))?;
    }
    within(start.elapsed(), Duration::from_secs(20))?;
    Ok(format!("200 families, {checks} checks, max residual {worst:.2e}, {:.2?}", start.elapsed()))
}

fn exercise_exe_exit(dim: &str) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nogo-lab"))
        .args(["exercise", "--dim", dim])
        .output()
        .map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| "killed by signal".to_string())
}

fn ac5_exercise() -> Outcome {
    let t = Tolerances::default();
    let mut existence = 0.0_f64;
    let mut perturbations = 0;
    for k in 0..200u64 {
        let dim = 3 + (k % 3) as usize;
        let run = exercise_trial(dim, SEED + 400, k, 10, t).map_err(|e| e.to_string())?;
        check(run.report.verdict == Verdict::Pass, || format!("trial {k}: {:#?}", run.report.steps))?;
        existence = existence.max(run.report.step_named("existence").ok_or("no existence step")?.residual);

        // explicit perturbations at and above the 1e-6 scale
        let mut rng = TrialRng::new(SEED + 401, k);
        let d = random_density(dim, &mut rng);
        let b = random_projector(dim, rng.int_in(2, dim), &mut rng);
        let d_b = luders_density(&d, &b, t).map_err(|e| e.to_string())?;
        for eps in [1e-6, 1e-4, 1e-2, 0.5] {
            let rho = random_density_within(&b, &mut rng);
            let mixed = d_b.mat().scale(1.0 - eps) + rho.mat().scale(eps);
            let d_prime = Density::new(mixed, t).map_err(|e| e.to_string())?;
            let dist = d_prime.mat().distance(d_b.mat());
            if dist < 1e-6 {
                continue;
            }
            let disc = uniqueness_discriminator(&d_b, &d_prime, &b, t).map_err(|e| e.to_string())?;
            check(disc.gap >= 0.5 * dist && disc.order_residual <= 1e-9, || {
                format!("trial {k} eps {eps}: gap {} for distance {dist}, order residual {}", disc.gap, disc.order_residual)
            })?;
            perturbations += 1;
        }
    }
    check(existence <= 1e-9, || format!("existence residual {existence:e}"))?;
    let code = exercise_exe_exit("2")?;
    check(code == 2, || format!("dim 2 exit code {code}"))?;
    Ok(format!(
        "200 pairs pass, max existence residual {existence:.2e}, {perturbations} perturbations separated, dim 2 exits 2"
    ))
}

/// Singlet correlator computed from scratch: `⟨ψ|X⊗Y|ψ⟩` with
/// `ψ = (|01⟩ − |10⟩)/√2` and planar `X = cos a·Z + sin a·X`.
fn singlet_oracle(a: f64, b: f64) -> f64 {
    let local = |t: f64| {
        let (s, co) = t.to_radians().sin_cos();
        [[co, s], [s, -co]]
    };
    let (x, y) = (local(a), local(b));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [0.0, s, -s, 0.0];
    let mut e = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            e += psi[i] * x[i / 2][j / 2] * y[i % 2][j % 2] * psi[j];
        }
    }
    e
}

fn ac6_chsh_constants() -> Outcome {
    let t = Tolerances::default();
    let opts = FeasibilityOptions::default();
    let settings = ChshSettings::from_angles([0.0, 90.0, 45.0, 135.0]);
    let scenario = chsh_scenario(&settings, Some(singlet()), t).map_err(|e| e.to_string())?;
    let bound = classical_chsh_bound(&scenario).map_err(|e| e.to_string())?;
    check(bound == num::BigRational::from_integer(2.into()), || format!("classical bound {bound}"))?;

    let s = chsh_value(&singlet(), &settings, t).map_err(|e| e.to_string())?.s;
    let target = 2.0 * 2f64.sqrt();
    check((s.abs() - target).abs() <= 1e-6, || format!("S = {s}"))?;
    // grid-search oracle over B = θ, B' = θ + 90 at 1e-3 degree steps
    let mut best = 0.0_f64;
    for k in 0..180_000 {
        let th = k as f64 * 1e-3;
        let e = |a: f64, b: f64| singlet_oracle(a, b);
        let v = e(0.0, th) - e(0.0, th + 90.0) + e(90.0, th) + e(90.0, th + 90.0);
        best = best.max(v.abs());
    }
    check((best - s.abs()).abs() <= 1e-6, || format!("grid maximum {best} vs S {s}"))?;

    let r = hv_feasibility(&scenario, opts).map_err(|e| e.to_string())?;
    check(r.status == FeasibilityStatus::Infeasible, || format!("singlet status {:?}", r.status))?;

    let mut rng = TrialRng::new(SEED + 600, 0);
    for k in 0..20 {
        let rho = random_density(2, &mut rng).mat().kron(random_density(2, &mut rng).mat());
        let d = Density::new(rho, t).map_err(|e| e.to_string())?;
        let angles = [0, 1, 2, 3].map(|_| 360.0 * rng.uniform());
        let sc = chsh_scenario(&ChshSettings::from_angles(angles), Some(d), t).map_err(|e| e.to_string())?;
        let r = hv_feasibility(&sc, opts).map_err(|e| e.to_string())?;
        check(r.status == FeasibilityStatus::Feasible && r.certificate_is_exact(), || {
            format!("product state {k}: {:?}", r.status)
        })?;
    }
    Ok(format!("bound = {bound}, S = {s:.9}, grid max {best:.9}, singlet infeasible, 20 product states feasible"))
}

/// Unit Bloch vector dotted into the Pauli matrices, on one tensor factor.
fn bloch_setting(rng: &mut TrialRng, first: bool) -> CMat {
    let v: Vec<f64> = (0..3).map(|_| rng.gaussian()).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let m = ['X', 'Y', 'Z']
        .iter()
        .zip(&v)
        .fold(CMat::zeros(2), |acc, (p, x)| acc + pauli(*p).expect("pauli").scale(x / n));
    let id = CMat::identity(2);
    if first {
        m.kron(&id)
    } else {
        id.kron(&m)
    }
}

/// Correlators from explicit traces, independent of the library's CHSH code.
fn correlators(d: &Density, s: &ChshSettings) -> [f64; 4] {
    let e = |x: &CMat, y: &CMat| (d.mat() * x * y).trace().re;
    [e(&s.a, &s.b), e(&s.a, &s.b_prime), e(&s.a_prime, &s.b), e(&s.a_prime, &s.b_prime)]
}

fn random_two_qubit_state(rng: &mut TrialRng, kind: u64) -> Density {
    match kind % 3 {
        0 => random_density(4, rng),
        1 => {
            let v: Vec<C64> = (0..4).map(|_| rng.complex_gaussian()).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            Density::pure(&v.iter().map(|z| z / n).collect::<Vec<_>>()).expect("unit vector")
        }
        _ => {
            // singlet rotated by a random local unitary on the second qubit
            let u = CMat::identity(2).kron(&random_unitary(2, rng));
            Density::new(&u * singlet().mat() * u.adjoint(), Tolerances::default()).expect("density")
        }
    }
}

fn ac7_fine_equivalence() -> Outcome {
    let t = Tolerances::default();
    let opts = FeasibilityOptions::default();
    let (mut decided, mut excluded, mut feasible, mut infeasible) = (0, 0, 0, 0);
    let mut k = 0u64;
    while decided < 200 {
        let mut rng = TrialRng::new(SEED + 700, k);
        k += 1;
        let d = random_two_qubit_state(&mut rng, k);
        let settings = if k.is_multiple_of(4) {
            let jitter = [0, 1, 2, 3].map(|_| 20.0 * (rng.uniform() - 0.5));
            ChshSettings::from_angles([0.0 + jitter[0], 90.0 + jitter[1], 45.0 + jitter[2], 135.0 + jitter[3]])
        } else {
            ChshSettings {
                a: bloch_setting(&mut rng, true),
                a_prime: bloch_setting(&mut rng, true),
                b: bloch_setting(&mut rng, false),
                b_prime: bloch_setting(&mut rng, false),
            }
        };
        let e = correlators(&d, &settings);
        if bch_margin(e) <= 1e-6 {
            excluded += 1;
            continue;
        }
        let lib = chsh_value(&d, &settings, t).map_err(|e| e.to_string())?;
        check(lib.correlators.iter().zip(&e).all(|(x, y)| (x - y).abs() < 1e-12), || "correlator mismatch".into())?;
        let sc = chsh_scenario(&settings, Some(d), t).map_err(|e| e.to_string())?;
        let status = match hv_feasibility(&sc, opts) {
            Ok(r) => r.status,
            Err(Error::NumericalAmbiguity { margin, .. }) => {
                return Err(format!("instance {k} with BCH margin {:e} flagged ambiguous ({margin:e})", bch_margin(e)))
            }
            Err(e) => return Err(e.to_string()),
        };
        let lp_feasible = status == FeasibilityStatus::Feasible;
        check(lp_feasible == bch_holds(e), || {
            format!("instance {k}: LP {status:?}, BCH holds {}, correlators {e:?}", bch_holds(e))
        })?;
        if lp_feasible {
            feasible += 1;
        } else {
            infeasible += 1;
        }
        decided += 1;
    }
    check(feasible >= 20 && infeasible >= 20, || format!("unbalanced sample: {feasible} feasible, {infeasible} infeasible"))?;
    Ok(format!("0 disagreements over 200 instances ({feasible} feasible, {infeasible} infeasible, {excluded} excluded)"))
}

fn ac8_magic_square() -> Outcome {
    let t = Tolerances::default();
    let start = Instant::now();
    let s = load_scenario(&scenarios().join("magic-square.scenario"), t).map_err(|e| e.to_string())?;
    check(s.items().len() == 9 && s.items().iter().all(|i| i.kind() == ItemKind::Dichotomic), || "shape".into())?;
    // brute force over the 512 sign patterns against the declared products
    let products = s.products();
    let survivors = (0u32..512)
        .filter(|bits| {
            products.iter().all(|p| {
                let prod: i8 = p.items.iter().map(|&i| if bits >> i & 1 == 1 { 1 } else { -1 }).product();
                prod == p.sign
            })
        })
        .count();
    check(survivors == 0, || format!("{survivors} sign patterns survive"))?;
    check(enumerate_assignments(&s).map_err(|e| e.to_string())?.is_empty(), || "enumerator found assignments".into())?;
    for k in 0..20 {
        let mut rng = TrialRng::new(SEED + 800, k);
        let sc = s.with_state(random_density(4, &mut rng)).map_err(|e| e.to_string())?;
        let r = hv_feasibility(&sc, FeasibilityOptions::default()).map_err(|e| e.to_string())?;
        check(r.status == FeasibilityStatus::NoAdmissibleAssignments, || format!("state {k}: {:?}", r.status))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("0 of 512 patterns admissible, 20 states with no admissible assignment, {:.2?}", start.elapsed()))
}

fn run_structured(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nogo-lab"))
        .args(args)
        .args(["--format", "structured"])
        .env_remove("NOGO_LAB_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn ac9_determinism() -> Outcome {
    let chsh = scenarios().join("chsh.scenario");
    let chsh = chsh.to_string_lossy();
    let runs: [Vec<&str>; 3] = [
        vec!["verify-theorem2", "--dim", "4", "--trials", "200", "--seed", "7"],
        vec!["exercise", "--dim", "4", "--trials", "50", "--seed", "3"],
        vec!["feasibility", &chsh, "--angles", "10,80,40,130"],
    ];
    let mut bytes = 0;
    for args in &runs {
        let first = run_structured(args)?;
        let second = run_structured(args)?;
        check(first == second, || format!("{args:?} differs between runs"))?;
        check(!first.1.is_empty(), || format!("{args:?} produced no output"))?;
        bytes += first.1.len();
    }
    Ok(format!("3 commands byte-identical across repeated runs ({bytes} bytes)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AC1 forced commutativity, commuting pairs", ac1_forward),
        ("AC2 obstruction witnesses", ac2_obstruction),
        ("AC3 ABA = BAB iff AB = BA, both routes", ac3_routes_agree),
        ("AC4 commuting-model round trip", ac4_round_trip),
        ("AC5 conditional density uniqueness", ac5_exercise),
        ("AC6 CHSH constants", ac6_chsh_constants),
        ("AC7 Fine equivalence", ac7_fine_equivalence),
        ("AC8 magic square", ac8_magic_square),
        ("AC9 determinism", ac9_determinism),
    ];
    let mut failures = 0;
    for (name, f) in criteria {
        match f() {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failures += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
