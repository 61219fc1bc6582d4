//! Finite phase spaces with deterministic value assignments, and checkers for
//! the hidden-variable axioms.
//!
//! | rule | statement checked |
//! |------|-------------------|
//! | HV(a) | every `f(ω, A)` is an eigenvalue of `A` |
//! | HV(b) | `f(ω, A+B) = f(ω, A) + f(ω, B)` for commuting `A, B` |
//! | HV(c) | `μ{ω : f(ω, A) ∈ S} = tr[D P_A(S)]` |
//! | HV(d) | `μ{f(ω, A) ∈ S, f(ω, B) ∈ T} = tr[D P_A(S) P_B(T)]` for commuting `A, B` |
//! | product rule | `f(ω, AB) = f(ω, A)·f(ω, B)` for commuting `A, B` |
//! | order lemma | `A ≤ B` implies `a ∩ b = a` for `x = X⁻¹(1)` |
//! | conditional rule | `μ(a ∩ b)/μ(b) = tr[DBAB]/tr[DB]` |
//!
//! A model only stores `f` for registered observables; the sum and product
//! checkers look up the compound `A+B` or `AB` among the registered items by
//! matrix equality instead of synthesizing it.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opcore::{CMat, Tolerances, C64};
use crate::quantum::{leq, spectral_projector, Density, EigenvalueSet, Observable, Projector};

/// Finite `Ω` with a weight per point; the σ-algebra is the power set.
#[derive(Debug, Clone)]
pub struct PhaseSpace {
    points: Vec<String>,
    weights: Vec<f64>,
}

impl PhaseSpace {
    pub fn new(points: Vec<String>, weights: Vec<f64>, tols: Tolerances) -> Result<Self> {
        let space = Self::unchecked(points, weights)?;
        if let Some((i, w)) = space.weights.iter().enumerate().find(|(_, w)| **w < 0.0) {
            return Err(Error::InvalidModel(format!("negative weight {w} at point {}", space.points[i])));
        }
        let total: f64 = space.weights.iter().sum();
        if (total - 1.0).abs() > tols.tol {
            return Err(Error::InvalidModel(format!("weights sum to {total}, not 1")));
        }
        Ok(space)
    }

    /// No normalization check; the HV(c) checker reports a bad total mass.
    pub fn unchecked(points: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidModel(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidModel("phase space has no points".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite weight {w}")));
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn measure(&self, e: &Event) -> f64 {
        e.members().map(|i| self.weights[i]).sum()
    }

    pub fn full(&self) -> Event {
        Event((0..self.len()).collect())
    }
}

/// Subset of phase-space points, by index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Event(BTreeSet<usize>);

impl Event {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        Self(members.into_iter().collect())
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn intersect(&self, other: &Event) -> Event {
        Event(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &Event) -> Event {
        Event(self.0.difference(&other.0).copied().collect())
    }
}

/// The value map `f(ω, A)` for registered, labeled observables.
#[derive(Debug, Clone)]
pub struct ValueMap {
    labels: Vec<String>,
    observables: Vec<Observable>,
    /// `table[point][item]`
    table: Vec<Vec<f64>>,
}

impl ValueMap {
    pub fn new(registered: Vec<(String, Observable)>, table: Vec<Vec<f64>>) -> Result<Self> {
        let (labels, observables): (Vec<_>, Vec<_>) = registered.into_iter().unzip();
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidModel(format!("duplicate label `{l}`")));
            }
        }
        if let Some((i, row)) = table.iter().enumerate().find(|(_, r)| r.len() != labels.len()) {
            return Err(Error::InvalidModel(format!(
                "value row {i} has {} entries for {} observables",
                row.len(),
                labels.len()
            )));
        }
        Ok(Self { labels, observables, table })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnregisteredObservable(label.to_string()))
    }

    pub fn observable(&self, label: &str) -> Result<&Observable> {
        Ok(&self.observables[self.index_of(label)?])
    }

    pub fn value(&self, point: usize, item: usize) -> f64 {
        self.table[point][item]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Copy with a single cell replaced.
    pub fn with_value(&self, point: usize, item: usize, v: f64) -> Self {
        let mut out = self.clone();
        out.table[point][item] = v;
        out
    }

    /// Registered label whose matrix equals `m` within `tol`.
    pub fn find_matrix(&self, m: &CMat, tol: f64) -> Option<usize> {
        self.observables.iter().position(|o| o.dim() == m.dim() && o.mat().distance(m) <= tol)
    }
}

#[derive(Debug, Clone)]
pub struct HVModel {
    space: PhaseSpace,
    values: ValueMap,
    state: Density,
}

impl HVModel {
    pub fn new(space: PhaseSpace, values: ValueMap, state: Density) -> Result<Self> {
        if values.table.len() != space.len() {
            return Err(Error::InvalidModel(format!(
                "value table has {} rows for {} points",
                values.table.len(),
                space.len()
            )));
        }
        for (l, o) in values.labels.iter().zip(&values.observables) {
            if o.dim() != state.dim() {
                return Err(Error::InvalidModel(format!(
                    "`{l}` has dimension {} but the state has dimension {}",
                    o.dim(),
                    state.dim()
                )));
            }
        }
        Ok(Self { space, values, state })
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn values(&self) -> &ValueMap {
        &self.values
    }

    pub fn state(&self) -> &Density {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    pub fn with_values(&self, values: ValueMap) -> Self {
        Self { values, ..self.clone() }
    }

    pub fn with_space(&self, space: PhaseSpace) -> Self {
        Self { space, ..self.clone() }
    }

    fn event_in(&self, item: usize, s: &EigenvalueSet, gap: f64) -> Event {
        Event::new((0..self.space.len()).filter(|&w| s.contains(self.values.value(w, item), gap)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Rule {
    #[serde(rename = "HV(a)")]
    Spectrum,
    #[serde(rename = "HV(b)")]
    Sum,
    #[serde(rename = "HV(c)")]
    Marginal,
    #[serde(rename = "HV(d)")]
    Joint,
    #[serde(rename = "product-rule")]
    Product,
    #[serde(rename = "order-lemma")]
    Order,
    #[serde(rename = "conditional-rule")]
    Conditional,
}

impl Rule {
    pub fn anchor(self) -> &'static str {
        match self {
            Rule::Spectrum => "HV(a)",
            Rule::Sum => "HV(b)",
            Rule::Marginal => "HV(c)",
            Rule::Joint => "HV(d)",
            Rule::Product => "product-rule",
            Rule::Order => "order-lemma",
            Rule::Conditional => "conditional-rule",
        }
    }
}

/// Outcome of one checker run.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub rule: Rule,
    pub subject: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Phase-space side of a comparison, when there is one.
    pub phase_value: Option<f64>,
    /// Quantum side of a comparison, when there is one.
    pub quantum_value: Option<f64>,
    pub flagged: Vec<String>,
}

impl CheckReport {
    fn comparison(rule: Rule, subject: String, phase: f64, quantum: f64, tol: f64) -> Self {
        let residual = (phase - quantum).abs();
        let passed = residual <= tol;
        let flagged = if passed {
            Vec::new()
        } else {
            vec![format!("phase space gives {phase}, quantum rule gives {quantum}")]
        };
        Self {
            rule,
            subject,
            residual,
            threshold: tol,
            passed,
            phase_value: Some(phase),
            quantum_value: Some(quantum),
            flagged,
        }
    }
}

fn fmt_set(s: &EigenvalueSet) -> String {
    let inner: Vec<String> = s.values().iter().map(|v| format!("{v}")).collect();
    format!("{{{}}}", inner.join(", "))
}

/// `X⁻¹(v) = {ω : f(ω, X) = v}` up to the clustering gap.
pub fn preimage(m: &HVModel, label: &str, v: f64, tols: Tolerances) -> Result<Event> {
    let item = m.values.index_of(label)?;
    Ok(m.event_in(item, &EigenvalueSet::single(v), tols.cluster_gap))
}

pub fn check_spectrum_rule(m: &HVModel, tols: Tolerances) -> CheckReport {
    let mut residual = 0.0_f64;
    let mut flagged = Vec::new();
    for (item, (label, obs)) in m.values.labels.iter().zip(&m.values.observables).enumerate() {
        let spectrum = obs.eigenvalues();
        for w in 0..m.space.len() {
            let v = m.values.value(w, item);
            let dist = spectrum.iter().map(|l| (l - v).abs()).fold(f64::INFINITY, f64::min);
            residual = residual.max(dist);
            if !(dist <= tols.cluster_gap) {
                flagged.push(format!("f({}, {label}) = {v} is not an eigenvalue", m.space.points[w]));
            }
        }
    }
    CheckReport {
        rule: Rule::Spectrum,
        subject: "all registered observables".into(),
        residual,
        threshold: tols.cluster_gap,
        passed: flagged.is_empty(),
        phase_value: None,
        quantum_value: None,
        flagged,
    }
}

fn require_commuting(m: &HVModel, a: &str, b: &str, tols: Tolerances) -> Result<(usize, usize)> {
    let (ia, ib) = (m.values.index_of(a)?, m.values.index_of(b)?);
    let norm = m.values.observables[ia].mat().commutator(m.values.observables[ib].mat()).op_norm();
    if norm > tols.tol {
        return Err(Error::NotCommuting { a: a.into(), b: b.into(), norm });
    }
    Ok((ia, ib))
}

fn pointwise_rule(
    m: &HVModel,
    rule: Rule,
    subject: String,
    compound: usize,
    expected: impl Fn(usize) -> f64,
    tols: Tolerances,
) -> CheckReport {
    let mut residual = 0.0_f64;
    let mut flagged = Vec::new();
    for w in 0..m.space.len() {
        let got = m.values.value(w, compound);
        let want = expected(w);
        let gap = (got - want).abs();
        residual = residual.max(gap);
        if !(gap <= tols.tol) {
            flagged.push(format!("at {}: {got} != {want}", m.space.points[w]));
        }
    }
    CheckReport {
        rule,
        subject,
        residual,
        threshold: tols.tol,
        passed: flagged.is_empty(),
        phase_value: None,
        quantum_value: None,
        flagged,
    }
}

/// HV(b). The compound `A+B` must be registered.
pub fn check_sum_rule(m: &HVModel, a: &str, b: &str, tols: Tolerances) -> Result<CheckReport> {
    let (ia, ib) = require_commuting(m, a, b, tols)?;
    let sum = m.values.observables[ia].mat() + m.values.observables[ib].mat();
    let is = m
        .values
        .find_matrix(&sum, tols.tol)
        .ok_or_else(|| Error::UnregisteredObservable(format!("{a}+{b}")))?;
    let subject = format!("f({}) = f({a}) + f({b})", m.values.labels[is]);
    Ok(pointwise_rule(m, Rule::Sum, subject, is, |w| m.values.value(w, ia) + m.values.value(w, ib), tols))
}

/// Product rule. The compound `AB` must be registered.
pub fn check_product_rule(m: &HVModel, a: &str, b: &str, tols: Tolerances) -> Result<CheckReport> {
    let (ia, ib) = require_commuting(m, a, b, tols)?;
    let prod = m.values.observables[ia].mat() * m.values.observables[ib].mat();
    let ip = m
        .values
        .find_matrix(&prod, tols.tol)
        .ok_or_else(|| Error::UnregisteredObservable(format!("{a}{b}")))?;
    let subject = format!("f({}) = f({a})·f({b})", m.values.labels[ip]);
    Ok(pointwise_rule(m, Rule::Product, subject, ip, |w| m.values.value(w, ia) * m.values.value(w, ib), tols))
}

/// HV(c) for one eigenvalue set.
pub fn check_marginal_rule(m: &HVModel, a: &str, s: &EigenvalueSet, tols: Tolerances) -> Result<CheckReport> {
    let ia = m.values.index_of(a)?;
    let obs = &m.values.observables[ia];
    let p = spectral_projector(obs, s, tols)?;
    let quantum = m.state.expect(p.mat())?;
    let phase = m.space.measure(&m.event_in(ia, s, tols.cluster_gap));
    Ok(CheckReport::comparison(Rule::Marginal, format!("Pr[{a} in {}]", fmt_set(s)), phase, quantum, tols.tol))
}

/// HV(d) for one pair of eigenvalue sets.
pub fn check_joint_rule(
    m: &HVModel,
    a: &str,
    s: &EigenvalueSet,
    b: &str,
    t: &EigenvalueSet,
    tols: Tolerances,
) -> Result<CheckReport> {
    let (ia, ib) = require_commuting(m, a, b, tols)?;
    let pa = spectral_projector(&m.values.observables[ia], s, tols)?;
    let pb = spectral_projector(&m.values.observables[ib], t, tols)?;
    let quantum = m.state.expect(&(pa.mat() * pb.mat()))?;
    let event = m.event_in(ia, s, tols.cluster_gap).intersect(&m.event_in(ib, t, tols.cluster_gap));
    let phase = m.space.measure(&event);
    let subject = format!("Pr[{a} in {}, {b} in {}]", fmt_set(s), fmt_set(t));
    Ok(CheckReport::comparison(Rule::Joint, subject, phase, quantum, tols.tol))
}

fn registered_projector(m: &HVModel, label: &str, tols: Tolerances) -> Result<(usize, Projector)> {
    let i = m.values.index_of(label)?;
    let p = Projector::new(m.values.observables[i].mat().clone(), tols)?;
    Ok((i, p))
}

/// For projectors `A ≤ B`: `a ∩ b = a` with `a = A⁻¹(1)`, `b = B⁻¹(1)`.
///
/// Since `AB = A`, the product rule on `(A, B)` reads `f(ω, A) = f(ω, A)·f(ω, B)`;
/// that is checked pointwise alongside the event identity.
pub fn check_lemma1(m: &HVModel, a: &str, b: &str, tols: Tolerances) -> Result<CheckReport> {
    let (ia, pa) = registered_projector(m, a, tols)?;
    let (ib, pb) = registered_projector(m, b, tols)?;
    if !leq(&pa, &pb, tols)? {
        return Err(Error::OrderViolation { a: a.into(), b: b.into() });
    }
    let ea = m.event_in(ia, &EigenvalueSet::single(1.0), tols.cluster_gap);
    let eb = m.event_in(ib, &EigenvalueSet::single(1.0), tols.cluster_gap);
    let mut flagged = Vec::new();
    for w in 0..m.space.len() {
        let (fa, fb) = (m.values.value(w, ia), m.values.value(w, ib));
        if (fa - fa * fb).abs() > tols.tol {
            flagged.push(format!("product rule fails at {}: f({a}) = {fa}, f({b}) = {fb}", m.space.points[w]));
        }
    }
    let excess = ea.difference(&ea.intersect(&eb));
    for w in excess.members() {
        flagged.push(format!("{} lies in a but not in b", m.space.points[w]));
    }
    Ok(CheckReport {
        rule: Rule::Order,
        subject: format!("{a} <= {b} implies a ∩ b = a"),
        residual: m.space.measure(&excess),
        threshold: tols.tol,
        passed: flagged.is_empty(),
        phase_value: Some(m.space.measure(&ea.intersect(&eb))),
        quantum_value: Some(m.space.measure(&ea)),
        flagged,
    })
}

/// `μ(a ∩ b)/μ(b)` against `tr[DBAB]/tr[DB]`.
pub fn check_conditional_rule(m: &HVModel, a: &str, b: &str, tols: Tolerances) -> Result<CheckReport> {
    let (ia, pa) = registered_projector(m, a, tols)?;
    let (ib, pb) = registered_projector(m, b, tols)?;
    let ea = m.event_in(ia, &EigenvalueSet::single(1.0), tols.cluster_gap);
    let eb = m.event_in(ib, &EigenvalueSet::single(1.0), tols.cluster_gap);
    let mb = m.space.measure(&eb);
    if mb <= tols.tol {
        return Err(Error::ConditioningOnNull { mass: mb });
    }
    let qb = m.state.expect(pb.mat())?;
    if qb <= tols.tol {
        return Err(Error::ConditioningOnNull { mass: qb });
    }
    let phase = m.space.measure(&ea.intersect(&eb)) / mb;
    let quantum = m.state.expect(&(pb.mat() * pa.mat() * pb.mat()))? / qb;
    Ok(CheckReport::comparison(Rule::Conditional, format!("Pr[{a}|{b}]"), phase, quantum, tols.tol))
}

/// Every applicable checker over every registered item and pair.
///
/// Marginals are checked for each single eigenvalue and the full spectrum;
/// joints for each commuting pair and pair of single eigenvalues. Sum and
/// product rules run wherever the compound is registered; the order lemma
/// and conditional rule run on every projector pair where they apply.
pub fn check_all(m: &HVModel, tols: Tolerances) -> Vec<CheckReport> {
    let mut out = vec![check_spectrum_rule(m, tols)];
    let labels = m.values.labels.clone();
    let obs = &m.values.observables;

    for (i, l) in labels.iter().enumerate() {
        out.push(check_marginal_rule(m, l, &obs[i].full_spectrum(), tols).expect("registered"));
        for v in obs[i].eigenvalues() {
            out.push(check_marginal_rule(m, l, &EigenvalueSet::single(v), tols).expect("registered"));
        }
    }

    let commuting = |i: usize, j: usize| obs[i].mat().commutator(obs[j].mat()).op_norm() <= tols.tol;
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            if !commuting(i, j) {
                continue;
            }
            for s in obs[i].eigenvalues() {
                for t in obs[j].eigenvalues() {
                    out.push(
                        check_joint_rule(m, &labels[i], &EigenvalueSet::single(s), &labels[j], &EigenvalueSet::single(t), tols)
                            .expect("commuting registered pair"),
                    );
                }
            }
        }
    }

    for i in 0..labels.len() {
        for j in i..labels.len() {
            if !commuting(i, j) {
                continue;
            }
            if i != j {
                if let Ok(r) = check_sum_rule(m, &labels[i], &labels[j], tols) {
                    out.push(r);
                }
            }
            if let Ok(r) = check_product_rule(m, &labels[i], &labels[j], tols) {
                out.push(r);
            }
        }
    }

    let projectors: Vec<usize> = (0..labels.len())
        .filter(|&i| Projector::new(obs[i].mat().clone(), tols).is_ok())
        .collect();
    for &i in &projectors {
        for &j in &projectors {
            if let Ok(r) = check_lemma1(m, &labels[i], &labels[j], tols) {
                out.push(r);
            }
            if let Ok(r) = check_conditional_rule(m, &labels[i], &labels[j], tols) {
                out.push(r);
            }
        }
    }
    out
}

/// Joint-eigenbasis model for a pairwise commuting family.
///
/// The basis is found by successive refinement: each observable is
/// diagonalized on every joint eigenspace of its predecessors. Points are the
/// basis vectors `ω`, `μ(ω) = ⟨ω|D|ω⟩`, and `f(ω, A)` is the eigenvalue of `A`
/// on `ω`.
pub fn build_commuting_model(obs: Vec<(String, Observable)>, d: &Density, tols: Tolerances) -> Result<HVModel> {
    let n = d.dim();
    for (i, (_, a)) in obs.iter().enumerate() {
        d.mat().check_same_dim(a.mat())?;
        for (j, (_, b)) in obs.iter().enumerate().skip(i + 1) {
            let norm = a.mat().commutator(b.mat()).op_norm();
            if norm > tols.tol {
                return Err(Error::NotCommutingFamily { i, j, norm });
            }
        }
    }

    let mut blocks: Vec<DMatrix<C64>> = vec![DMatrix::identity(n, n)];
    for (_, a) in &obs {
        let mut next = Vec::with_capacity(blocks.len());
        for v in blocks {
            let k = v.ncols();
            if k == 1 {
                next.push(v);
                continue;
            }
            let restricted = v.adjoint() * a.mat().as_matrix() * &v;
            let eig = restricted.hermitian_part().symmetric_eigen();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
            let mut group: Vec<usize> = Vec::new();
            let flush = |group: &mut Vec<usize>, next: &mut Vec<DMatrix<C64>>| {
                if group.is_empty() {
                    return;
                }
                let cols: Vec<_> = group.iter().map(|&c| eig.eigenvectors.column(c).into_owned()).collect();
                next.push(&v * DMatrix::from_columns(&cols));
                group.clear();
            };
            for &i in &order {
                if let Some(&last) = group.last() {
                    if eig.eigenvalues[last] - eig.eigenvalues[i] >= tols.cluster_gap {
                        flush(&mut group, &mut next);
                    }
                }
                group.push(i);
            }
            flush(&mut group, &mut next);
        }
        blocks = next;
    }

    let vectors: Vec<_> = blocks.iter().flat_map(|b| b.column_iter().map(|c| c.into_owned())).collect();
    let mut table = vec![vec![0.0; obs.len()]; n];
    for (w, v) in vectors.iter().enumerate() {
        for (i, (label, a)) in obs.iter().enumerate() {
            let av = a.mat().as_matrix() * v;
            let raw = (v.adjoint() * &av)[(0, 0)].re;
            let value = a
                .eigenvalues()
                .into_iter()
                .min_by(|x, y| (x - raw).abs().total_cmp(&(y - raw).abs()))
                .expect("nonempty spectrum");
            let residual = (av - v * nalgebra::Complex::new(value, 0.0)).norm();
            if residual > tols.tol.sqrt() {
                return Err(Error::InvalidModel(format!(
                    "joint eigenbasis vector {w} is not an eigenvector of `{label}` (residual {residual:e})"
                )));
            }
            table[w][i] = value;
        }
    }
    let weights: Vec<f64> = vectors
        .iter()
        .map(|v| (v.adjoint() * d.mat().as_matrix() * v)[(0, 0)].re.max(0.0))
        .collect();
    let points = (0..n).map(|w| format!("w{w}")).collect();
    let space = PhaseSpace::new(points, weights, tols)?;
    HVModel::new(space, ValueMap::new(obs, table)?, d.clone())
}
