//! Seeded batch runs over random instances.
//!
//! Trial `t` of a run with seed `s` draws from `TrialRng::new(s, t)`, so
//! every trial is reproducible on its own and results do not depend on how
//! trials are scheduled across threads.

use rayon::prelude::*;

use crate::error::Result;
use crate::hvmodel::{build_commuting_model, check_all, CheckReport};
use crate::nogo::{check_alt_proof, check_exercise_uniqueness, check_theorem2_chain, TheoremReport};
use crate::opcore::random::{random_commuting_pair, random_density, random_noncommuting_pair, random_projector, random_unitary};
use crate::opcore::{CMat, Tolerances};
use crate::quantum::{Density, Observable, Projector};
use crate::rng::TrialRng;

/// Smallest commutator norm of the noncommuting pairs drawn by
/// [`theorem2_batch`].
pub const MIN_NONCOMMUTING: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct Theorem2Trial {
    pub trial: u64,
    pub commuting: bool,
    pub chain: TheoremReport,
    pub alt: TheoremReport,
    /// `‖AB − BA‖∞`
    pub commutator: f64,
    /// `‖BAB − ABA‖∞`
    pub gap: f64,
    /// `|tr[W(BAB − ABA)]|` for the reported witness `W`, if any.
    pub achieved: Option<f64>,
}

/// Even trials draw a commuting pair, odd trials a noncommuting one.
pub fn theorem2_trial(dim: usize, seed: u64, trial: u64, tols: Tolerances) -> Result<Theorem2Trial> {
    let mut rng = TrialRng::new(seed, trial);
    let commuting = trial.is_multiple_of(2);
    let (a, b) = if commuting {
        random_commuting_pair(dim, &mut rng)
    } else {
        random_noncommuting_pair(dim, MIN_NONCOMMUTING, &mut rng)
    };
    let chain = check_theorem2_chain(&a, &b, tols)?;
    let alt = check_alt_proof(&a, &b, tols)?;
    let commutator = a.mat().commutator(b.mat()).op_norm();
    let diff = b.mat() * a.mat() * b.mat() - a.mat() * b.mat() * a.mat();
    let achieved = match &chain.witness {
        Some(w) => Some(w.expect(&diff)?.abs()),
        None => None,
    };
    Ok(Theorem2Trial { trial, commuting, chain, alt, commutator, gap: diff.op_norm(), achieved })
}

pub fn theorem2_batch(dim: usize, trials: u64, seed: u64, tols: Tolerances) -> Result<Vec<Theorem2Trial>> {
    (0..trials).into_par_iter().map(|t| theorem2_trial(dim, seed, t, tols)).collect()
}

/// Commuting and noncommuting pairs only, `count` of each kind.
pub fn theorem2_pairs(dim: usize, count: u64, seed: u64, commuting: bool, tols: Tolerances) -> Result<Vec<Theorem2Trial>> {
    let offset = if commuting { 0 } else { 1 };
    (0..count).into_par_iter().map(|k| theorem2_trial(dim, seed, 2 * k + offset, tols)).collect()
}

#[derive(Debug, Clone)]
pub struct ExerciseTrial {
    pub trial: u64,
    pub rank: usize,
    pub report: TheoremReport,
}

/// Random full-rank `D` and random `B` of rank in `[1, dim]`, then
/// `candidates` candidate densities for the uniqueness step.
pub fn exercise_trial(dim: usize, seed: u64, trial: u64, candidates: usize, tols: Tolerances) -> Result<ExerciseTrial> {
    let mut rng = TrialRng::new(seed, trial);
    let d = random_density(dim, &mut rng);
    let rank = rng.int_in(1, dim);
    let b = random_projector(dim, rank, &mut rng);
    let report = check_exercise_uniqueness(&d, &b, candidates, &mut rng, tols)?;
    Ok(ExerciseTrial { trial, rank, report })
}

pub fn exercise_batch(dim: usize, trials: u64, seed: u64, candidates: usize, tols: Tolerances) -> Result<Vec<ExerciseTrial>> {
    (0..trials).into_par_iter().map(|t| exercise_trial(dim, seed, t, candidates, tols)).collect()
}

/// A commuting family sharing one random eigenbasis, with degenerate
/// spectra, the registered compounds `A+B` and `AB`, and projectors `P ≤ Q`.
pub fn random_commuting_family(dim: usize, rng: &mut TrialRng) -> Vec<(String, CMat)> {
    let u = random_unitary(dim, rng);
    let levels = [-1.0, 0.0, 1.0, 2.0];
    let draw = |rng: &mut TrialRng| -> Vec<f64> { (0..dim).map(|_| levels[rng.int_in(0, 3)]).collect() };
    let la = draw(rng);
    let lb = draw(rng);
    let p: Vec<f64> = (0..dim).map(|_| rng.int_in(0, 1) as f64).collect();
    let q: Vec<f64> = p.iter().map(|&x| if x > 0.5 { 1.0 } else { rng.int_in(0, 1) as f64 }).collect();
    let sum: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x + y).collect();
    let prod: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();
    let conj = |d: &[f64]| &u * CMat::diag(d) * u.adjoint();
    vec![
        ("A".into(), conj(&la)),
        ("B".into(), conj(&lb)),
        ("A+B".into(), conj(&sum)),
        ("AB".into(), conj(&prod)),
        ("P".into(), conj(&p)),
        ("Q".into(), conj(&q)),
    ]
}

#[derive(Debug, Clone)]
pub struct FamilyTrial {
    pub trial: u64,
    pub dim: usize,
    pub checks: Vec<CheckReport>,
}

impl FamilyTrial {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Builds the joint-eigenbasis model of a random family and runs every checker.
pub fn family_trial(dims: (usize, usize), seed: u64, trial: u64, tols: Tolerances) -> Result<FamilyTrial> {
    let mut rng = TrialRng::new(seed, trial);
    let dim = rng.int_in(dims.0, dims.1);
    let family = random_commuting_family(dim, &mut rng)
        .into_iter()
        .map(|(l, m)| Ok((l, Observable::new(m, tols)?)))
        .collect::<Result<Vec<_>>>()?;
    let d = random_density(dim, &mut rng);
    let model = build_commuting_model(family, &d, tols)?;
    Ok(FamilyTrial { trial, dim, checks: check_all(&model, tols) })
}

pub fn family_batch(dims: (usize, usize), trials: u64, seed: u64, tols: Tolerances) -> Result<Vec<FamilyTrial>> {
    (0..trials).into_par_iter().map(|t| family_trial(dims, seed, t, tols)).collect()
}

/// A random projector and density pair, used by examples.
pub fn random_instance(dim: usize, seed: u64) -> (Density, Projector) {
    let mut rng = TrialRng::new(seed, 0);
    let d = random_density(dim, &mut rng);
    let rank = rng.int_in(1, dim);
    (d, random_projector(dim, rank, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nogo::Verdict;

    #[test]
    fn batches_are_reproducible_and_pass() {
        let t = Tolerances::default();
        let a = theorem2_batch(4, 20, 7, t).unwrap();
        let b = theorem2_batch(4, 20, 7, t).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.commutator.to_bits(), y.commutator.to_bits());
            assert_eq!(x.chain.verdict, y.chain.verdict);
        }
        for x in &a {
            let want = if x.commuting { Verdict::Pass } else { Verdict::HypothesisViolated };
            assert_eq!(x.chain.verdict, want);
            assert_eq!(x.alt.verdict, want);
        }
        assert!(exercise_batch(3, 10, 1, 10, t).unwrap().iter().all(|e| e.report.verdict == Verdict::Pass));
        let fam = family_batch((3, 6), 10, 1, t).unwrap();
        assert!(fam.iter().all(FamilyTrial::all_passed), "{:#?}", fam.iter().flat_map(|f| f.checks.iter().filter(|c| !c.passed)).collect::<Vec<_>>());
    }
}
