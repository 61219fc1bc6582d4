use std::collections::BTreeSet;

use num::{BigInt, BigRational, ToPrimitive, Zero};
use proptest::prelude::*;

use nogo_lab::batch::random_commuting_family;
use nogo_lab::feasibility::{
    chsh_scenario, enumerate_assignments, hv_feasibility, singlet, ChshSettings, ContextSpec, FeasibilityOptions,
    FeasibilityStatus, ItemKind, ItemSpec, Scenario,
};
use nogo_lab::hvmodel::{build_commuting_model, check_all, PhaseSpace};
use nogo_lab::nogo::{check_alt_proof, check_theorem2_chain, trace_symmetry_gap, Verdict};
use nogo_lab::opcore::random::{
    random_commuting_pair, random_density, random_hermitian, random_noncommuting_pair, random_projector, random_unitary,
};
use nogo_lab::opcore::{annihilation_witness, spectral_decompose};
use nogo_lab::quantum::{davies_joint, Density, Observable};
use nogo_lab::rng::TrialRng;
use nogo_lab::{CMat, Tolerances};

fn t() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_resolution_reconstructs(seed in any::<u64>(), dim in 2usize..=8) {
        let m = random_hermitian(dim, &mut TrialRng::new(seed, 0));
        let r = spectral_decompose(&m, t()).unwrap();
        prop_assert!(r.reconstruct().distance(&m) <= 1e-9);
        prop_assert!(r.orthogonality_residual() <= 1e-9);
        prop_assert!(r.completeness_residual() <= 1e-9);
    }

    #[test]
    fn witness_attains_operator_norm(seed in any::<u64>(), dim in 2usize..=8) {
        let m = random_hermitian(dim, &mut TrialRng::new(seed, 1));
        let w = annihilation_witness(&m, t()).unwrap();
        prop_assert!((w.expect(&m).unwrap().abs() - m.op_norm()).abs() <= 1e-9);
    }

    #[test]
    fn squared_commutator_bounded_by_gap(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = TrialRng::new(seed, 2);
        let a = random_projector(dim, rng.int_in(1, dim - 1), &mut rng);
        let b = random_projector(dim, rng.int_in(1, dim - 1), &mut rng);
        let c = a.mat().commutator(b.mat());
        let gap = trace_symmetry_gap(&a, &b, t()).unwrap().gap;
        prop_assert!((&c * &c).op_norm() <= gap + 1e-12);
    }

    #[test]
    fn both_routes_classify_pairs(seed in any::<u64>(), dim in 3usize..=6, commuting in any::<bool>()) {
        let mut rng = TrialRng::new(seed, 3);
        let (a, b) = if commuting {
            random_commuting_pair(dim, &mut rng)
        } else {
            random_noncommuting_pair(dim, 0.05, &mut rng)
        };
        let chain = check_theorem2_chain(&a, &b, t()).unwrap();
        let alt = check_alt_proof(&a, &b, t()).unwrap();
        let expected = if commuting { Verdict::Pass } else { Verdict::HypothesisViolated };
        prop_assert_eq!(chain.verdict, expected);
        prop_assert_eq!(alt.verdict, expected);
    }

    #[test]
    fn davies_joint_symmetric_for_commuting(seed in any::<u64>(), dim in 2usize..=6) {
        let mut rng = TrialRng::new(seed, 4);
        let (a, b) = random_commuting_pair(dim, &mut rng);
        let d = random_density(dim, &mut rng);
        let ab = davies_joint(&d, &a, &b, t()).unwrap();
        let ba = davies_joint(&d, &b, &a, t()).unwrap();
        let direct = (d.mat() * a.mat() * b.mat()).trace().re;
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!((ab - direct).abs() <= 1e-9);
    }

    #[test]
    fn commuting_family_round_trip(seed in any::<u64>(), dim in 3usize..=6) {
        let mut rng = TrialRng::new(seed, 5);
        let d = random_density(dim, &mut rng);
        let obs = registered(random_commuting_family(dim, &mut rng));
        let m = build_commuting_model(obs, &d, t()).unwrap();
        for r in check_all(&m, t()) {
            prop_assert!(r.passed, "{:?} {} residual {}", r.rule, r.subject, r.residual);
        }
    }

    #[test]
    fn corrupted_cell_is_flagged(seed in any::<u64>(), dim in 3usize..=5, item in 0usize..6) {
        let mut rng = TrialRng::new(seed, 6);
        let d = random_density(dim, &mut rng);
        let m = build_commuting_model(registered(random_commuting_family(dim, &mut rng)), &d, t()).unwrap();
        let point = rng.int_in(0, m.space().len() - 1);
        let bad = m.with_values(m.values().with_value(point, item, 17.0));
        prop_assert!(check_all(&bad, t()).iter().any(|r| !r.passed));
    }

    #[test]
    fn shifted_weight_is_flagged(seed in any::<u64>(), dim in 3usize..=5) {
        let mut rng = TrialRng::new(seed, 7);
        let d = random_density(dim, &mut rng);
        let m = build_commuting_model(registered(random_commuting_family(dim, &mut rng)), &d, t()).unwrap();
        prop_assume!(m.space().len() >= 2);
        let mut w = m.space().weights().to_vec();
        let from = (0..w.len()).max_by(|&i, &j| w[i].total_cmp(&w[j])).unwrap();
        let to = (from + 1) % w.len();
        // moving mass only goes unnoticed if the two points agree everywhere
        prop_assume!((0..m.values().labels().len()).any(|i| (m.values().value(from, i) - m.values().value(to, i)).abs() > 0.5));
        w[from] -= 0.05;
        w[to] += 0.05;
        let space = PhaseSpace::unchecked(m.space().points().to_vec(), w).unwrap();
        prop_assert!(check_all(&m.with_space(space), t()).iter().any(|r| !r.passed));
    }

    #[test]
    fn enumeration_matches_brute_force(seed in any::<u64>(), dim in 2usize..=5, n in 1usize..=6) {
        let mut rng = TrialRng::new(seed, 8);
        let s = random_projector_scenario(dim, n, &mut rng);
        let got: BTreeSet<Vec<i8>> = enumerate_assignments(&s).unwrap().iter().map(|a| a.values().to_vec()).collect();
        prop_assert_eq!(got, brute_force(&s));
    }

    #[test]
    fn feasibility_certificates_are_exact(seed in any::<u64>(), dim in 2usize..=4, n in 1usize..=5) {
        let mut rng = TrialRng::new(seed, 9);
        let s = random_projector_scenario(dim, n, &mut rng);
        let s = s.with_state(random_density(dim, &mut rng)).unwrap();
        let r = hv_feasibility(&s, FeasibilityOptions::default()).unwrap();
        match r.status {
            FeasibilityStatus::Feasible => {
                prop_assert!(r.certificate_is_exact());
                for row in &r.constraints {
                    let target = row.target.to_f64().unwrap();
                    prop_assert!((target - row.quantum).abs() <= 1.5e-9, "{} {} vs {}", row.name, target, row.quantum);
                }
            }
            FeasibilityStatus::NoAdmissibleAssignments => prop_assert!(r.assignments.is_empty()),
            FeasibilityStatus::Infeasible => prop_assert!(false, "commuting scenario reported infeasible"),
        }
    }

    #[test]
    fn farkas_inequality_separates(seed in any::<u64>()) {
        // a local unitary on the second qubit, applied to state and settings alike
        let mut rng = TrialRng::new(seed, 10);
        let u = CMat::identity(2).kron(&random_unitary(2, &mut rng));
        let conj = |m: &CMat| &u * m * u.adjoint();
        let d = Density::new(conj(singlet().mat()), t()).unwrap();
        let opt = ChshSettings::from_angles([0.0, 90.0, 45.0, 135.0]);
        let settings = ChshSettings { a: opt.a, a_prime: opt.a_prime, b: conj(&opt.b), b_prime: conj(&opt.b_prime) };
        let s = chsh_scenario(&settings, Some(d), t()).unwrap();
        let r = hv_feasibility(&s, FeasibilityOptions::default()).unwrap();
        prop_assert_eq!(r.status, FeasibilityStatus::Infeasible);
        let v = r.violated.unwrap();
        let coeff = |name: &str| v.terms.iter().find(|(_, n)| n == name).map(|(c, _)| c.clone()).unwrap_or_default();
        for a in &r.assignments {
            let lhs = r
                .constraints
                .iter()
                .filter(|row| row.items.iter().all(|&i| a.is_up(i)))
                .fold(BigInt::zero(), |acc, row| acc + coeff(&row.name));
            prop_assert!(lhs <= v.bound);
        }
        let quantum = r
            .constraints
            .iter()
            .fold(BigRational::zero(), |acc, row| acc + BigRational::from_integer(coeff(&row.name)) * &row.target);
        prop_assert!(quantum > BigRational::from_integer(v.bound.clone()));
        prop_assert!(v.margin > 1e-3);
    }
}

fn registered(family: Vec<(String, CMat)>) -> Vec<(String, Observable)> {
    family.into_iter().map(|(l, m)| (l, Observable::new(m, t()).unwrap())).collect()
}

/// Projectors diagonal in one random basis, grouped into random contexts.
fn random_projector_scenario(dim: usize, n: usize, rng: &mut TrialRng) -> Scenario {
    let u = random_unitary(dim, rng);
    let items: Vec<ItemSpec> = (0..n)
        .map(|k| {
            let diag: Vec<f64> = (0..dim).map(|_| rng.int_in(0, 1) as f64).collect();
            ItemSpec { label: format!("P{k}"), kind: ItemKind::Projector, mat: &u * CMat::diag(&diag) * u.adjoint() }
        })
        .collect();
    let contexts = (0..rng.int_in(0, 3))
        .map(|_| {
            let labels: Vec<String> = (0..n).filter(|_| rng.uniform() < 0.5).map(|k| format!("P{k}")).collect();
            ContextSpec { labels, resolves_identity: false }
        })
        .filter(|c| !c.labels.is_empty())
        .collect();
    Scenario::new(dim, items, contexts, vec![], None, None, t()).unwrap()
}

/// Every 0/1 pattern whose selected factors multiply to a nonzero operator on
/// each context and on each single item, computed by direct matrix products.
fn brute_force(s: &Scenario) -> BTreeSet<Vec<i8>> {
    let n = s.items().len();
    let id = CMat::identity(s.dim());
    (0u32..1 << n)
        .map(|bits| (0..n).map(|i| (bits >> i & 1) as i8).collect::<Vec<i8>>())
        .filter(|vals| {
            let singles = (0..n).map(|i| vec![i]);
            s.contexts().iter().map(|c| c.items.clone()).chain(singles).all(|group| {
                let prod = group.iter().fold(id.clone(), |acc, &i| {
                    let p = s.items()[i].mat();
                    let f = if vals[i] == 1 { p.clone() } else { &id - p };
                    &acc * &f
                });
                prod.op_norm() > 0.5
            })
        })
        .collect()
}
