//! Existence of deterministic h.v. models for finite measurement scenarios.
//!
//! A scenario lists projectors and ±1-valued observables together with
//! contexts of mutually commuting items. [`enumerate_assignments`] finds the
//! value assignments that respect every context, and [`hv_feasibility`]
//! searches for a probability distribution over them reproducing the quantum
//! marginals and in-context joints, solved exactly over the rationals.
//!
//! A pattern of values on a context is admissible iff the joint spectral
//! projector it selects is nonzero. This covers the spectrum rule for single
//! items, "exactly one" for identity resolutions and the declared product
//! constraints, since a product equal to `±I` annihilates every joint
//! eigenspace of the wrong sign.

mod chsh;
mod scenario;
pub mod simplex;

use std::collections::HashSet;

use num::integer::Integer;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opcore::CMat;

pub use chsh::{
    bch_forms, bch_holds, bch_margin, chsh_scenario, chsh_value, classical_chsh_bound, ghz_state, named_state,
    pauli, pauli_string, phi_plus, planar_observable, scenario_settings, singlet, ChshSettings, ChshValue,
};
pub use scenario::{
    ChshRoles, Context, ContextSpec, Item, ItemKind, ItemSpec, ProductConstraint, ProductSpec, Scenario,
};
use simplex::{phase_one, LpOutcome};

/// Largest assignment space searched, `2²⁴`.
pub const MAX_ASSIGNMENT_SPACE: u128 = 1 << 24;

/// One value per item, in item (label) order: 0/1 for projectors, ±1 for
/// dichotomic observables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AssignmentTable {
    values: Vec<i8>,
}

impl AssignmentTable {
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Whether item `i` takes its upper value (1 or +1).
    pub fn is_up(&self, i: usize) -> bool {
        self.values[i] > 0
    }
}

fn group_prefixes(s: &Scenario, group: &[usize]) -> Vec<HashSet<u64>> {
    let items = s.items();
    let mut sets = vec![HashSet::new(); group.len()];
    let mut stack = vec![(0usize, 0u64, CMat::identity(s.dim()))];
    while let Some((depth, bits, acc)) = stack.pop() {
        if depth == group.len() {
            continue;
        }
        for bit in [false, true] {
            let next = &acc * items[group[depth]].factor(bit);
            // products of commuting projectors are projectors: norm 0 or 1
            if next.op_norm() > 0.5 {
                let b = bits | ((bit as u64) << depth);
                sets[depth].insert(b);
                stack.push((depth + 1, b, next));
            }
        }
    }
    sets
}

/// All value assignments respecting every context, in lexicographic order of
/// item labels with values ascending (0 before 1, −1 before +1).
pub fn enumerate_assignments(s: &Scenario) -> Result<Vec<AssignmentTable>> {
    let n = s.items().len();
    let size: u128 = 1u128 << n.min(127);
    if size > MAX_ASSIGNMENT_SPACE {
        return Err(Error::SearchSpaceTooLarge { size, limit: MAX_ASSIGNMENT_SPACE });
    }
    let groups = s.constraint_groups();
    let prefixes: Vec<Vec<HashSet<u64>>> = groups.iter().map(|g| group_prefixes(s, g)).collect();
    // for each item: (group, position of the item inside the group)
    let mut touching: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (g, members) in groups.iter().enumerate() {
        for (pos, &i) in members.iter().enumerate() {
            touching[i].push((g, pos));
        }
    }

    let mut out = Vec::new();
    let mut bits = vec![false; n];
    fn admissible(
        k: usize,
        bits: &[bool],
        groups: &[Vec<usize>],
        prefixes: &[Vec<HashSet<u64>>],
        touching: &[Vec<(usize, usize)>],
    ) -> bool {
        touching[k].iter().all(|&(g, pos)| {
            let key = groups[g][..=pos]
                .iter()
                .enumerate()
                .fold(0u64, |acc, (t, &i)| acc | ((bits[i] as u64) << t));
            prefixes[g][pos].contains(&key)
        })
    }
    fn dfs(
        k: usize,
        s: &Scenario,
        bits: &mut Vec<bool>,
        groups: &[Vec<usize>],
        prefixes: &[Vec<HashSet<u64>>],
        touching: &[Vec<(usize, usize)>],
        out: &mut Vec<AssignmentTable>,
    ) {
        if k == bits.len() {
            let values = s.items().iter().zip(bits.iter()).map(|(it, &b)| it.value(b)).collect();
            out.push(AssignmentTable { values });
            return;
        }
        for bit in [false, true] {
            bits[k] = bit;
            if admissible(k, bits, groups, prefixes, touching) {
                dfs(k + 1, s, bits, groups, prefixes, touching, out);
            }
        }
    }
    dfs(0, s, &mut bits, &groups, &prefixes, &touching, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    NoAdmissibleAssignments,
}

/// A linear constraint on the distribution over assignments: the probability
/// that every listed item takes its upper value. The empty list is the
/// normalization row.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub name: String,
    pub items: Vec<usize>,
    /// Quantum value before rounding.
    pub quantum: f64,
    /// Rounded value the solver matched exactly.
    pub target: BigRational,
}

impl ConstraintRow {
    fn covers(&self, a: &AssignmentTable) -> bool {
        self.items.iter().all(|&i| a.is_up(i))
    }
}

/// `Σ coefficient·probability ≤ bound` holding for every deterministic
/// assignment but violated by the quantum data.
#[derive(Debug, Clone)]
pub struct ViolatedConstraint {
    pub terms: Vec<(BigInt, String)>,
    pub bound: BigInt,
    /// Left-hand side evaluated on the quantum probabilities.
    pub quantum: f64,
    /// Certified distance of the quantum data from the feasible set.
    pub margin: f64,
}

impl ViolatedConstraint {
    pub fn expression(&self) -> String {
        let mut s = String::new();
        for (k, (c, name)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if k == 0 {
                if c.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(&format!(" {sign} "));
            }
            if !mag.is_one() {
                s.push_str(&format!("{mag}*"));
            }
            s.push_str(name);
        }
        format!("{s} <= {}", self.bound)
    }
}

#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    pub assignments: Vec<AssignmentTable>,
    pub constraints: Vec<ConstraintRow>,
    /// Weights aligned with `assignments`.
    pub certificate: Option<Vec<BigRational>>,
    pub violated: Option<ViolatedConstraint>,
    /// Targets were moved by at most `1/denominator` from the rounded data,
    /// which exact linear relations between probabilities can require.
    pub adjusted: bool,
}

impl FeasibilityResult {
    /// Exact check that the certificate is a distribution reproducing every
    /// rounded constraint.
    pub fn certificate_is_exact(&self) -> bool {
        let Some(w) = &self.certificate else { return false };
        if w.len() != self.assignments.len() || w.iter().any(|x| x.is_negative()) {
            return false;
        }
        let total = w.iter().fold(BigRational::zero(), |acc, x| acc + x);
        total.is_one()
            && self.constraints.iter().all(|row| {
                let pushed = self
                    .assignments
                    .iter()
                    .zip(w)
                    .filter(|(a, _)| row.covers(a))
                    .fold(BigRational::zero(), |acc, (_, x)| acc + x);
                pushed == row.target
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityOptions {
    /// Quantum probabilities are rounded to multiples of `1/denominator`.
    pub denominator: u64,
    /// Infeasibility margins at or below this are reported as ambiguous.
    pub ambiguity: f64,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        Self { denominator: 1_000_000_000, ambiguity: 1e-8 }
    }
}

fn rationalize(p: f64, denominator: u64) -> BigRational {
    let clamped = p.clamp(0.0, 1.0);
    let num = (clamped * denominator as f64).round() as i64;
    BigRational::new(BigInt::from(num), BigInt::from(denominator))
}

/// The marginal and in-context joint constraints of a scenario at its state.
pub fn scenario_constraints(s: &Scenario, opts: FeasibilityOptions) -> Result<Vec<ConstraintRow>> {
    let d = s.state().ok_or(Error::MissingState)?;
    let items = s.items();
    let mut rows = vec![ConstraintRow {
        name: "1".into(),
        items: Vec::new(),
        quantum: 1.0,
        target: BigRational::one(),
    }];
    for (i, it) in items.iter().enumerate() {
        let q = d.expect(it.up())?;
        rows.push(ConstraintRow {
            name: format!("Pr[{}]", it.event_name(true)),
            items: vec![i],
            quantum: q,
            target: rationalize(q, opts.denominator),
        });
    }
    for (i, j) in s.context_pairs() {
        let q = d.expect(&(items[i].up() * items[j].up()))?;
        rows.push(ConstraintRow {
            name: format!("Pr[{}, {}]", items[i].event_name(true), items[j].event_name(true)),
            items: vec![i, j],
            quantum: q,
            target: rationalize(q, opts.denominator),
        });
    }
    Ok(rows)
}

/// Decides whether a distribution over admissible assignments reproduces the
/// scenario's quantum marginals and in-context joints.
///
/// An infeasible result names the aggregate inequality obtained from the
/// Farkas certificate, with its quantum and classical sides. Infeasibility
/// closer than `opts.ambiguity` to the feasible set is an error, since
/// rounding could then decide the outcome.
pub fn hv_feasibility(s: &Scenario, opts: FeasibilityOptions) -> Result<FeasibilityResult> {
    let assignments = enumerate_assignments(s)?;
    if assignments.is_empty() {
        return Ok(FeasibilityResult {
            status: FeasibilityStatus::NoAdmissibleAssignments,
            assignments,
            constraints: Vec::new(),
            certificate: None,
            violated: None,
            adjusted: false,
        });
    }
    let constraints = scenario_constraints(s, opts)?;
    let a: Vec<Vec<BigRational>> = constraints
        .iter()
        .map(|row| {
            assignments
                .iter()
                .map(|t| if row.covers(t) { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    let b: Vec<BigRational> = constraints.iter().map(|r| r.target.clone()).collect();

    match phase_one(&a, &b) {
        LpOutcome::Feasible(w) => Ok(FeasibilityResult {
            status: FeasibilityStatus::Feasible,
            assignments,
            constraints,
            certificate: Some(w),
            violated: None,
            adjusted: false,
        }),
        LpOutcome::Infeasible(y) => {
            let coeffs = integer_direction(&y);
            let bound = (0..assignments.len())
                .map(|j| {
                    (1..constraints.len())
                        .filter(|&i| a[i][j].is_one())
                        .fold(BigInt::zero(), |acc, i| acc + &coeffs[i])
                })
                .max()
                .unwrap_or_default();
            let quantum: f64 = (1..constraints.len())
                .map(|i| coeffs[i].to_f64().unwrap_or(0.0) * constraints[i].quantum)
                .sum();
            let l1: f64 = coeffs[1..].iter().map(|c| c.abs().to_f64().unwrap_or(0.0)).sum();
            let margin = (quantum - bound.to_f64().unwrap_or(0.0)) / l1.max(1.0);
            if margin <= opts.ambiguity {
                let slack = BigRational::new(BigInt::one(), BigInt::from(opts.denominator));
                let Some(w) = relaxed_phase_one(&a, &b, &slack) else {
                    return Err(Error::NumericalAmbiguity { margin, threshold: opts.ambiguity });
                };
                let mut constraints = constraints;
                for (row, coeffs) in constraints.iter_mut().zip(&a) {
                    row.target = coeffs.iter().zip(&w).fold(BigRational::zero(), |acc, (x, y)| acc + x * y);
                }
                return Ok(FeasibilityResult {
                    status: FeasibilityStatus::Feasible,
                    assignments,
                    constraints,
                    certificate: Some(w),
                    violated: None,
                    adjusted: true,
                });
            }
            let terms = (1..constraints.len())
                .filter(|&i| !coeffs[i].is_zero())
                .map(|i| (coeffs[i].clone(), constraints[i].name.clone()))
                .collect();
            Ok(FeasibilityResult {
                status: FeasibilityStatus::Infeasible,
                assignments,
                constraints,
                certificate: None,
                violated: Some(ViolatedConstraint { terms, bound, quantum, margin }),
                adjusted: false,
            })
        }
    }
}

/// Nonnegative `w` with `Σw = 1` and every other row of `Aw` within `slack`
/// of its target, as `Aw − s⁺ + s⁻ = b`, `s± + t± = slack`.
fn relaxed_phase_one(a: &[Vec<BigRational>], b: &[BigRational], slack: &BigRational) -> Option<Vec<BigRational>> {
    let n = a.first().map_or(0, Vec::len);
    let k = a.len() - 1;
    let width = n + 4 * k;
    let unit = |j: usize| (0..width).map(move |c| if c == j { BigRational::one() } else { BigRational::zero() });
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(1 + 3 * k);
    let mut rhs = Vec::with_capacity(1 + 3 * k);
    for (i, row) in a.iter().enumerate() {
        let mut r = row.clone();
        r.resize(width, BigRational::zero());
        if i > 0 {
            r[n + i - 1] = -BigRational::one();
            r[n + k + i - 1] = BigRational::one();
        }
        rows.push(r);
        rhs.push(b[i].clone());
    }
    for i in 0..2 * k {
        let r: Vec<BigRational> = unit(n + i).zip(unit(n + 2 * k + i)).map(|(x, y)| x + y).collect();
        rows.push(r);
        rhs.push(slack.clone());
    }
    match phase_one(&rows, &rhs) {
        LpOutcome::Feasible(x) => Some(x[..n].to_vec()),
        LpOutcome::Infeasible(_) => None,
    }
}

/// Smallest integer vector parallel to a rational one.
fn integer_direction(y: &[BigRational]) -> Vec<BigInt> {
    let lcm = y.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = y.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|v| v / &g).collect()
}
