//! CHSH quantities, standard states and the deterministic bound.
//!
//! Correlators are `E(X, Y) = tr[D·XY]` and the CHSH value is
//! `S = E(A,B) − E(A,B′) + E(A′,B) + E(A′,B′)`. The singlet with planar
//! settings at (0°, 90°; 45°, 135°) reaches `S = −2√2`.

use num::{BigInt, BigRational};
use serde::Serialize;

use super::scenario::{ChshRoles, ContextSpec, ItemKind, ItemSpec, Scenario};
use super::enumerate_assignments;
use crate::error::{Error, Result};
use crate::opcore::{c, CMat, Tolerances};
use crate::quantum::{Density, Observable};

pub fn pauli(p: char) -> Option<CMat> {
    let z = c(0.0, 0.0);
    let rows = match p {
        'I' => [[c(1.0, 0.0), z], [z, c(1.0, 0.0)]],
        'X' => [[z, c(1.0, 0.0)], [c(1.0, 0.0), z]],
        'Y' => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        'Z' => [[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]],
        _ => return None,
    };
    Some(CMat::from_fn(2, |i, j| rows[i][j]))
}

/// Tensor product of Pauli factors, e.g. `"XIZ"`.
pub fn pauli_string(s: &str) -> Option<CMat> {
    let mut chars = s.chars();
    let first = pauli(chars.next()?)?;
    chars.try_fold(first, |acc, ch| Some(acc.kron(&pauli(ch)?)))
}

fn ket(amplitudes: &[(usize, f64)], dim: usize) -> Density {
    let mut v = vec![c(0.0, 0.0); dim];
    for &(i, a) in amplitudes {
        v[i] = c(a, 0.0);
    }
    Density::pure(&v).expect("normalized basis combination")
}

/// `(|01⟩ − |10⟩)/√2`
pub fn singlet() -> Density {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ket(&[(1, s), (2, -s)], 4)
}

/// `(|00⟩ + |11⟩)/√2`
pub fn phi_plus() -> Density {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ket(&[(0, s), (3, s)], 4)
}

/// `(|000⟩ + |111⟩)/√2`
pub fn ghz_state() -> Density {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ket(&[(0, s), (7, s)], 8)
}

/// `singlet`, `phi-plus`, `ghz` or `maximally-mixed` (of dimension `dim`).
pub fn named_state(name: &str, dim: usize) -> Option<Density> {
    match name {
        "singlet" => Some(singlet()),
        "phi-plus" => Some(phi_plus()),
        "ghz" => Some(ghz_state()),
        "maximally-mixed" if dim > 0 => Some(Density::maximally_mixed(dim)),
        _ => None,
    }
}

/// `cos θ·Z + sin θ·X` for `θ` in degrees.
pub fn planar_observable(degrees: f64) -> CMat {
    let t = degrees.to_radians();
    let z = pauli('Z').expect("pauli");
    let x = pauli('X').expect("pauli");
    z.scale(t.cos()) + x.scale(t.sin())
}

/// Two-qubit settings: `A, A′` act on the first factor, `B, B′` on the second.
#[derive(Debug, Clone)]
pub struct ChshSettings {
    pub a: CMat,
    pub a_prime: CMat,
    pub b: CMat,
    pub b_prime: CMat,
}

impl ChshSettings {
    pub const LABELS: [&'static str; 4] = ["A", "A'", "B", "B'"];

    /// Planar settings from angles `[a, a′, b, b′]` in degrees.
    pub fn from_angles(angles: [f64; 4]) -> Self {
        let id = CMat::identity(2);
        Self {
            a: planar_observable(angles[0]).kron(&id),
            a_prime: planar_observable(angles[1]).kron(&id),
            b: id.kron(&planar_observable(angles[2])),
            b_prime: id.kron(&planar_observable(angles[3])),
        }
    }

    fn named(&self) -> [(&'static str, &CMat); 4] {
        [("A", &self.a), ("A'", &self.a_prime), ("B", &self.b), ("B'", &self.b_prime)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshValue {
    pub s: f64,
    /// `[E(A,B), E(A,B′), E(A′,B), E(A′,B′)]`
    pub correlators: [f64; 4],
}

pub fn chsh_value(state: &Density, settings: &ChshSettings, tols: Tolerances) -> Result<ChshValue> {
    let slack = tols.cluster_gap.max(tols.tol);
    for (label, m) in settings.named() {
        state.mat().check_same_dim(m)?;
        for v in Observable::new(m.clone(), tols)?.eigenvalues() {
            if (v.abs() - 1.0).abs() > slack {
                return Err(Error::NotDichotomic { label: label.into(), eigenvalue: v });
            }
        }
    }
    let pairs = [
        ("A", &settings.a, "B", &settings.b),
        ("A", &settings.a, "B'", &settings.b_prime),
        ("A'", &settings.a_prime, "B", &settings.b),
        ("A'", &settings.a_prime, "B'", &settings.b_prime),
    ];
    let mut e = [0.0; 4];
    for (k, (la, x, lb, y)) in pairs.iter().enumerate() {
        let norm = x.commutator(y).op_norm();
        if norm > tols.tol {
            return Err(Error::CrossTalk { a: la.to_string(), b: lb.to_string(), norm });
        }
        e[k] = state.expect(&(*x * *y))?;
    }
    Ok(ChshValue { s: e[0] - e[1] + e[2] + e[3], correlators: e })
}

/// The four CHSH combinations with one minus sign, at position `k` for
/// entry `k`. The eight BCH inequalities are `|form| ≤ 2` for each.
pub fn bch_forms(e: [f64; 4]) -> [f64; 4] {
    let total: f64 = e.iter().sum();
    [total - 2.0 * e[0], total - 2.0 * e[1], total - 2.0 * e[2], total - 2.0 * e[3]]
}

pub fn bch_holds(e: [f64; 4]) -> bool {
    bch_forms(e).iter().all(|f| f.abs() <= 2.0)
}

/// Distance of the largest `|form|` from the classical bound 2.
pub fn bch_margin(e: [f64; 4]) -> f64 {
    let worst = bch_forms(e).iter().fold(0.0_f64, |m, f| m.max(f.abs()));
    (worst - 2.0).abs()
}

/// The 2×2 dichotomic scenario with the four cross contexts.
pub fn chsh_scenario(settings: &ChshSettings, state: Option<Density>, tols: Tolerances) -> Result<Scenario> {
    let items = settings
        .named()
        .into_iter()
        .map(|(l, m)| ItemSpec { label: l.into(), kind: ItemKind::Dichotomic, mat: m.clone() })
        .collect();
    let contexts = [("A", "B"), ("A", "B'"), ("A'", "B"), ("A'", "B'")]
        .into_iter()
        .map(|(x, y)| ContextSpec { labels: vec![x.into(), y.into()], resolves_identity: false })
        .collect();
    let roles = ChshRoles { alice: ["A".into(), "A'".into()], bob: ["B".into(), "B'".into()] };
    Scenario::new(4, items, contexts, Vec::new(), state, Some(roles), tols)
}

/// CHSH settings read from a scenario's declared roles.
pub fn scenario_settings(s: &Scenario) -> Result<ChshSettings> {
    let roles = s
        .chsh()
        .ok_or_else(|| Error::WrongScenarioShape("scenario declares no CHSH roles".into()))?;
    let m = |l: &str| -> Result<CMat> { Ok(s.items()[s.index_of(l)?].mat().clone()) };
    Ok(ChshSettings {
        a: m(&roles.alice[0])?,
        a_prime: m(&roles.alice[1])?,
        b: m(&roles.bob[0])?,
        b_prime: m(&roles.bob[1])?,
    })
}

/// Maximum of `|S|` over the scenario's deterministic assignments, exactly.
pub fn classical_chsh_bound(s: &Scenario) -> Result<BigRational> {
    let roles = s
        .chsh()
        .ok_or_else(|| Error::WrongScenarioShape("scenario declares no CHSH roles".into()))?;
    let idx = [
        s.index_of(&roles.alice[0])?,
        s.index_of(&roles.alice[1])?,
        s.index_of(&roles.bob[0])?,
        s.index_of(&roles.bob[1])?,
    ];
    let mut distinct = idx.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != 4 {
        return Err(Error::WrongScenarioShape("CHSH needs four distinct settings".into()));
    }
    let best = enumerate_assignments(s)?
        .iter()
        .map(|t| {
            let v = |k: usize| i64::from(t.values()[idx[k]]);
            (v(0) * v(2) - v(0) * v(3) + v(1) * v(2) + v(1) * v(3)).abs()
        })
        .max()
        .ok_or_else(|| Error::WrongScenarioShape("no admissible assignments".into()))?;
    Ok(BigRational::from_integer(BigInt::from(best)))
}
