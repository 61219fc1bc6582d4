//! Step-by-step verification of the forced-commutativity results and the
//! uniqueness of the Lüders conditional density.
//!
//! Each verifier evaluates the concrete operator identities a proof reduces
//! to and records one [`Step`] per identity. Steps come in three kinds:
//! unconditional identities (must always hold), hypotheses (may fail for a
//! given input, e.g. a noncommuting pair), and steps derived from the
//! hypotheses. A failing hypothesis yields [`Verdict::HypothesisViolated`];
//! a failing unconditional or derived step yields [`Verdict::Fail`], which
//! always indicates a numerical or implementation defect.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hvmodel::{build_commuting_model, HVModel};
use crate::opcore::random::{random_density_within, random_subprojector};
use crate::opcore::{annihilation_witness, CMat, Tolerances};
use crate::quantum::{leq, luders_density, orthocomplement, Density, Observable, Projector};
use crate::rng::TrialRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    HypothesisViolated,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Unconditional,
    Hypothesis,
    Derived,
}

#[derive(Debug, Clone, Serialize)]
pub struct Step {
    pub description: String,
    pub kind: StepKind,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub name: &'static str,
    pub steps: Vec<Step>,
    pub verdict: Verdict,
    /// Density exhibiting a violated hypothesis, when one was found.
    pub witness: Option<Density>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    fn new(name: &'static str) -> Self {
        Self { name, steps: Vec::new(), verdict: Verdict::Pass, witness: None, notes: Vec::new() }
    }

    fn step(&mut self, kind: StepKind, description: impl Into<String>, residual: f64, threshold: f64) -> bool {
        let passed = residual <= threshold;
        self.steps.push(Step { description: description.into(), kind, residual, threshold, passed });
        passed
    }

    fn finish(mut self) -> Self {
        let failed = |k: StepKind| self.steps.iter().any(|s| s.kind == k && !s.passed);
        self.verdict = if failed(StepKind::Unconditional) || failed(StepKind::Derived) {
            Verdict::Fail
        } else if failed(StepKind::Hypothesis) {
            Verdict::HypothesisViolated
        } else {
            Verdict::Pass
        };
        self
    }

    pub fn max_residual(&self) -> f64 {
        self.steps.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn step_named(&self, prefix: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.description.starts_with(prefix))
    }
}

/// Largest possible `|tr[DBAB] − tr[DABA]|` over densities, with a density attaining it.
#[derive(Debug, Clone)]
pub struct SymmetryGap {
    /// `‖BAB − ABA‖∞`
    pub gap: f64,
    pub witness: Density,
    /// `|tr[W·(BAB − ABA)]|` for the witness `W`.
    pub achieved: f64,
}

pub fn trace_symmetry_gap(a: &Projector, b: &Projector, tols: Tolerances) -> Result<SymmetryGap> {
    a.mat().check_same_dim(b.mat())?;
    let diff = b.mat() * a.mat() * b.mat() - a.mat() * b.mat() * a.mat();
    let gap = diff.op_norm();
    let witness = match annihilation_witness(&diff, tols) {
        Ok(w) => w,
        Err(Error::ZeroOperator { .. }) => Density::maximally_mixed(a.dim()),
        Err(e) => return Err(e),
    };
    let achieved = witness.expect(&diff)?.abs();
    Ok(SymmetryGap { gap, witness, achieved })
}

fn check_projector(p: &Projector, tols: Tolerances) -> Result<()> {
    Projector::new(p.mat().clone(), tols).map(|_| ())
}

/// Commutativity from `tr[DBAB] = tr[DABA]` for all `D`.
///
/// With `C = AB − BA`, idempotence gives `C² = ABAB − ABA − BAB + BABA`. When
/// `BAB = ABA` both quartic terms collapse and `C² = 0`; in floating point
/// `C² = (A − B)(BAB − ABA)` exactly, so `‖C²‖ ≤ ‖BAB − ABA‖`. `C` is
/// skew-Hermitian, hence normal, and `‖C‖² = ‖C²‖`.
pub fn check_theorem2_chain(a: &Projector, b: &Projector, tols: Tolerances) -> Result<TheoremReport> {
    a.mat().check_same_dim(b.mat())?;
    check_projector(a, tols)?;
    check_projector(b, tols)?;
    let (am, bm) = (a.mat(), b.mat());
    let ab = am * bm;
    let ba = bm * am;
    let aba = &ab * am;
    let bab = &ba * bm;
    let comm = &ab - &ba;
    let comm_sq = &comm * &comm;

    let mut r = TheoremReport::new("commutativity-chain");
    let expansion = &ab * &ab - &aba - &bab + &ba * &ba;
    r.step(
        StepKind::Unconditional,
        "(AB - BA)^2 = ABAB - ABA - BAB + BABA using A^2 = A, B^2 = B",
        comm_sq.distance(&expansion),
        tols.tol,
    );
    r.step(
        StepKind::Unconditional,
        "C = AB - BA is skew-Hermitian",
        (&comm + comm.adjoint()).op_norm(),
        tols.tol,
    );

    let sym = trace_symmetry_gap(a, b, tols)?;
    let holds = r.step(
        StepKind::Hypothesis,
        "tr[DBAB] = tr[DABA] for all densities D, i.e. BAB = ABA",
        sym.gap,
        tols.tol,
    );
    if !holds {
        r.notes.push(format!(
            "witness density gives |tr[DBAB] - tr[DABA]| = {:.12} (maximum {:.12})",
            sym.achieved, sym.gap
        ));
        r.witness = Some(sym.witness);
        return Ok(r.finish());
    }

    let sq = comm_sq.op_norm();
    r.step(StepKind::Derived, "(AB - BA)^2 = 0", sq, tols.tol);
    if sym.gap > 0.0 {
        r.notes.push(format!("nilpotency ratio ||C^2|| / ||BAB - ABA|| = {:.3e}", sq / sym.gap));
    }
    r.step(
        StepKind::Derived,
        "skew-Hermitian C with C^2 = 0 vanishes: AB = BA",
        comm.op_norm(),
        tols.tol.sqrt(),
    );
    Ok(r.finish())
}

/// The complement-based route to commutativity.
///
/// With `Ã = I − A`, `B̃ = I − B`: `A = ABA + AB̃A` always. If `XYX = YXY` for
/// every pair in `{A, B, Ã, B̃}` then `A = BAB + B̃AB̃`, and multiplying by `B`
/// on either side gives `AB = BAB = BA`.
pub fn check_alt_proof(a: &Projector, b: &Projector, tols: Tolerances) -> Result<TheoremReport> {
    a.mat().check_same_dim(b.mat())?;
    check_projector(a, tols)?;
    check_projector(b, tols)?;
    let at = orthocomplement(a);
    let bt = orthocomplement(b);
    let (am, bm, atm, btm) = (a.mat(), b.mat(), at.mat(), bt.mat());

    let mut r = TheoremReport::new("complement-chain");
    let aba = am * bm * am;
    let abta = am * btm * am;
    r.step(StepKind::Unconditional, "A = ABA + A(I-B)A", am.distance(&(&aba + &abta)), tols.tol);

    let named: [(&str, &CMat); 4] = [("A", am), ("B", bm), ("I-A", atm), ("I-B", btm)];
    let mut violated = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (xn, x) = named[i];
            let (yn, y) = named[j];
            let residual = (x * y * x).distance(&(y * x * y));
            let wrap = |n: &str| if n.len() > 1 { format!("({n})") } else { n.to_string() };
            let (xw, yw) = (wrap(xn), wrap(yn));
            let desc = format!("{xw}{yw}{xw} = {yw}{xw}{yw}");
            if !r.step(StepKind::Hypothesis, desc, residual, tols.tol) {
                violated.push(format!("({xn}, {yn})"));
            }
        }
    }
    if !violated.is_empty() {
        r.notes.push(format!("hypothesis fails for pairs {}", violated.join(", ")));
        return Ok(r.finish());
    }

    let bab = bm * am * bm;
    let btabt = btm * am * btm;
    r.step(StepKind::Derived, "A = BAB + (I-B)A(I-B)", am.distance(&(&bab + &btabt)), 3.0 * tols.tol);
    r.step(StepKind::Derived, "AB = BAB", (am * bm).distance(&bab), 3.0 * tols.tol);
    r.step(StepKind::Derived, "BA = BAB", (bm * am).distance(&bab), 3.0 * tols.tol);
    r.step(StepKind::Derived, "AB = BA", am.commutator(bm).op_norm(), 6.0 * tols.tol);
    Ok(r.finish())
}

/// Rank-one projector `R₁ ≤ B` separating two candidate conditional densities.
#[derive(Debug, Clone)]
pub struct Discrimination {
    pub r1: Projector,
    /// `|tr[D′R₁] − tr[D_B R₁]|`
    pub gap: f64,
    /// `‖D′ − D_B‖∞`
    pub distance: f64,
    /// `‖R₁B − R₁‖∞ + ‖BR₁ − R₁‖∞`
    pub order_residual: f64,
}

/// Builds `R₁` from an eigenvector of `B(D′ − D_B)B` of maximal modulus.
///
/// Both densities live on `range(B)`, so that eigenvector does too and
/// `R₁ ≤ B`; the separation equals `‖D′ − D_B‖∞`.
pub fn uniqueness_discriminator(
    d_b: &Density,
    d_prime: &Density,
    b: &Projector,
    tols: Tolerances,
) -> Result<Discrimination> {
    let diff = d_prime.mat() - d_b.mat();
    let distance = diff.op_norm();
    // compress to range(B) so roundoff outside it cannot tilt the eigenvector
    let inside = b.mat() * &diff * b.mat();
    let w = annihilation_witness(&inside, tols)?;
    let snapped = b.mat() * w.mat() * b.mat();
    let norm = snapped.trace().re;
    let r1 = Projector::new(snapped.scale(1.0 / norm), tols)?;
    let gap = (d_prime.expect(r1.mat())? - d_b.expect(r1.mat())?).abs();
    let order_residual =
        (r1.mat() * b.mat()).distance(r1.mat()) + (b.mat() * r1.mat()).distance(r1.mat());
    Ok(Discrimination { r1, gap, distance, order_residual })
}

/// Existence, support and uniqueness of the conditional density `D_B`.
///
/// 1. `tr[D_B C] = tr[DC]/tr[DB]` for random `C ≤ B`;
/// 2. `tr[D_B B] = 1`, `tr[D_B B⊥] = 0` and `D_B ψ = 0` on `range(B⊥)`;
/// 3. every other density on `range(B)` is separated from `D_B` by a
///    rank-one projector below `B`.
///
/// Candidate densities alternate between independent random densities on
/// `range(B)` and convex perturbations `(1 − ε)D_B + ερ` with
/// `ε = 10^−u`, `u` uniform in `[1, 6]`. Candidates within `10·tol` of `D_B`
/// are not counted.
pub fn check_exercise_uniqueness(
    d: &Density,
    b: &Projector,
    trials: usize,
    rng: &mut TrialRng,
    tols: Tolerances,
) -> Result<TheoremReport> {
    let n = d.dim();
    if n < 3 {
        return Err(Error::DimensionTooSmall { dim: n });
    }
    d.mat().check_same_dim(b.mat())?;
    let mass = d.expect(b.mat())?;
    if mass <= tols.tol {
        return Err(Error::ConditioningOnNull { mass });
    }
    let d_b = luders_density(d, b, tols)?;
    let mut r = TheoremReport::new("conditional-density-uniqueness");

    let mut existence = 0.0_f64;
    for _ in 0..trials {
        let c = random_subprojector(b, rng);
        let lhs = d_b.expect(c.mat())?;
        let rhs = d.expect(c.mat())? / mass;
        existence = existence.max((lhs - rhs).abs());
    }
    r.step(StepKind::Unconditional, "existence: tr[D_B C] = tr[DC]/tr[DB] for C <= B", existence, tols.tol);

    let bperp = orthocomplement(b);
    r.step(StepKind::Unconditional, "support: tr[D_B B] = 1", (d_b.expect(b.mat())? - 1.0).abs(), tols.tol);
    r.step(StepKind::Unconditional, "support: tr[D_B B_perp] = 0", d_b.expect(bperp.mat())?.abs(), tols.tol);
    let kernel = bperp.range_basis();
    let annihilated = kernel
        .column_iter()
        .map(|psi| (d_b.mat().as_matrix() * psi).norm())
        .fold(0.0, f64::max);
    r.step(StepKind::Unconditional, "support: D_B psi = 0 on range(B_perp)", annihilated, tols.tol);

    let mut worst = 0.0_f64;
    let mut min_sep = f64::INFINITY;
    let mut separated = 0usize;
    let mut skipped = 0usize;
    for t in 0..trials {
        let rho = random_density_within(b, rng);
        let candidate = if t % 2 == 0 {
            rho
        } else {
            let eps = 10f64.powf(-(1.0 + 5.0 * rng.uniform()));
            let mixed = d_b.mat().scale(1.0 - eps) + rho.mat().scale(eps);
            Density::new(mixed, tols)?
        };
        if candidate.mat().distance(d_b.mat()) <= 10.0 * tols.tol {
            skipped += 1;
            continue;
        }
        let disc = uniqueness_discriminator(&d_b, &candidate, b, tols)?;
        worst = worst.max((disc.distance - disc.gap).max(0.0) + disc.order_residual);
        min_sep = min_sep.min(disc.gap);
        separated += 1;
    }
    r.step(
        StepKind::Unconditional,
        "uniqueness: a rank-one R1 <= B separates every D' != D_B",
        worst,
        tols.tol,
    );
    r.notes.push(format!("{separated} candidates separated, {skipped} within 10*tol of D_B"));
    if separated > 0 {
        r.notes.push(format!("smallest separation {min_sep:.3e}"));
    }
    if b.rank() == 1 {
        r.notes.push("range(B) is one-dimensional, so D_B is the only density on it".into());
    }
    Ok(r.finish())
}

#[derive(Debug, Clone)]
pub struct Obstruction {
    pub a: String,
    pub b: String,
    pub commutator: f64,
    pub symmetry: SymmetryGap,
}

#[derive(Debug, Clone)]
pub struct CommutativityAudit {
    pub report: TheoremReport,
    /// Joint-eigenbasis model, present when every pair commutes.
    pub model: Option<HVModel>,
    pub obstructions: Vec<Obstruction>,
}

/// Pairwise commutativity audit of a projector family.
///
/// A commuting family gets an explicit h.v. model. Each noncommuting pair is
/// reported with a density violating `tr[DBAB] = tr[DABA]`; any h.v. model
/// would force that identity, so such a pair obstructs every model. Whether a
/// restricted measurement scenario still admits one is decided by
/// [`crate::feasibility::hv_feasibility`].
pub fn hv_implies_commuting(
    projectors: &[(String, Projector)],
    d: &Density,
    tols: Tolerances,
) -> Result<CommutativityAudit> {
    let n = d.dim();
    if n < 3 {
        return Err(Error::DimensionTooSmall { dim: n });
    }
    let mut report = TheoremReport::new("hv-model-forces-commutativity");
    let mut obstructions = Vec::new();
    for i in 0..projectors.len() {
        for j in (i + 1)..projectors.len() {
            let (la, pa) = &projectors[i];
            let (lb, pb) = &projectors[j];
            let norm = pa.mat().commutator(pb.mat()).op_norm();
            if !report.step(StepKind::Hypothesis, format!("[{la}, {lb}] = 0"), norm, tols.tol) {
                let symmetry = trace_symmetry_gap(pa, pb, tols)?;
                report
                    .notes
                    .push(format!("({la}, {lb}) obstructs any h.v. model: trace-symmetry gap {:.12}", symmetry.gap));
                obstructions.push(Obstruction { a: la.clone(), b: lb.clone(), commutator: norm, symmetry });
            }
        }
    }
    let model = if obstructions.is_empty() {
        let family = projectors
            .iter()
            .map(|(l, p)| (l.clone(), Observable::from_projector(p, tols)))
            .collect();
        Some(build_commuting_model(family, d, tols)?)
    } else {
        report.witness = Some(obstructions[0].symmetry.witness.clone());
        None
    };
    Ok(CommutativityAudit { report: report.finish(), model, obstructions })
}

/// `true` iff `A ≤ B`, as a thin re-export for report code.
pub fn order_holds(a: &Projector, b: &Projector, tols: Tolerances) -> bool {
    leq(a, b, tols).unwrap_or(false)
}
