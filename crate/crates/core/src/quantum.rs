//! Validated projectors, densities and observables, with Lüders conditioning,
//! the projector order, measure-axiom checks and the Davies product probability.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::opcore::{c, spectral_decompose, trace_inner, CMat, SpectralResolution, Tolerances, C64};

/// Hermitian idempotent.
#[derive(Debug, Clone)]
pub struct Projector {
    mat: CMat,
    rank: usize,
}

impl Projector {
    pub fn new(mat: CMat, tols: Tolerances) -> Result<Self> {
        let herm = mat.hermitian_residual();
        if herm > tols.tol {
            return Err(Error::NotProjector { reason: format!("not Hermitian (residual {herm:e})") });
        }
        let idem = (&mat * &mat).distance(&mat);
        if idem > tols.tol {
            return Err(Error::NotProjector { reason: format!("not idempotent (residual {idem:e})") });
        }
        let tr = mat.trace().re;
        let rank = tr.round().max(0.0) as usize;
        if (tr - rank as f64).abs() > tols.tol {
            return Err(Error::NotProjector { reason: format!("trace {tr} is not an integer") });
        }
        Ok(Self { mat, rank })
    }

    pub fn zero(dim: usize) -> Self {
        Self { mat: CMat::zeros(dim), rank: 0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMat::identity(dim), rank: dim }
    }

    pub fn ray(v: &[C64]) -> Result<Self> {
        let mat = CMat::ray_projector(v)?;
        Ok(Self { mat, rank: 1 })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        Self { mat: CMat::basis_projector(dim, k), rank: 1 }
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Orthonormal columns spanning the range.
    pub fn range_basis(&self) -> DMatrix<C64> {
        let n = self.dim();
        let eig = self.mat.hermitian_part().as_matrix().clone().symmetric_eigen();
        let cols: Vec<_> = (0..n)
            .filter(|&i| eig.eigenvalues[i] > 0.5)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        if cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }
}

/// Hermitian, positive, unit trace.
#[derive(Debug, Clone)]
pub struct Density {
    mat: CMat,
}

impl Density {
    pub fn new(mat: CMat, tols: Tolerances) -> Result<Self> {
        let herm = mat.hermitian_residual();
        if herm > tols.tol {
            return Err(Error::NotDensity { reason: format!("not Hermitian (residual {herm:e})") });
        }
        let min = mat
            .hermitian_part()
            .as_matrix()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |acc, &x| acc.min(x));
        if min < -tols.tol {
            return Err(Error::NotDensity { reason: format!("negative eigenvalue {min:e}") });
        }
        let tr = mat.trace();
        if (tr - c(1.0, 0.0)).norm() > tols.tol {
            return Err(Error::NotDensity { reason: format!("trace {} + {}i is not 1", tr.re, tr.im) });
        }
        Ok(Self { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: CMat::identity(dim).scale(1.0 / dim as f64) }
    }

    /// Pure state `|v⟩⟨v|` (normalized).
    pub fn pure(v: &[C64]) -> Result<Self> {
        Ok(Self { mat: CMat::ray_projector(v)? })
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// `tr[D X]` as a real number.
    pub fn expect(&self, x: &CMat) -> Result<f64> {
        Ok(trace_inner(&self.mat, x)?.re)
    }
}

/// Hermitian operator with its spectral resolution.
#[derive(Debug, Clone)]
pub struct Observable {
    mat: CMat,
    resolution: SpectralResolution,
}

impl Observable {
    pub fn new(mat: CMat, tols: Tolerances) -> Result<Self> {
        let residual = mat.hermitian_residual();
        if residual > tols.tol {
            return Err(Error::NotHermitian { residual });
        }
        let resolution = spectral_decompose(&mat, tols)?;
        Ok(Self { mat, resolution })
    }

    pub fn from_projector(p: &Projector, tols: Tolerances) -> Self {
        Self::new(p.mat().clone(), tols).expect("projectors are Hermitian")
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn resolution(&self) -> &SpectralResolution {
        &self.resolution
    }

    /// Distinct eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.resolution.eigenvalues().map(|l| l.re).collect()
    }

    /// The eigenvalue within `gap` of `value`, if any.
    pub fn match_eigenvalue(&self, value: f64, gap: f64) -> Option<f64> {
        self.eigenvalues().into_iter().find(|l| (l - value).abs() <= gap)
    }

    pub fn full_spectrum(&self) -> EigenvalueSet {
        EigenvalueSet::new(self.eigenvalues())
    }
}

/// Finite set of selected eigenvalues; stands in for a Borel set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueSet {
    values: Vec<f64>,
}

impl EigenvalueSet {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        Self { values: values.into_iter().collect() }
    }

    pub fn empty() -> Self {
        Self { values: Vec::new() }
    }

    pub fn single(v: f64) -> Self {
        Self { values: vec![v] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, v: f64, gap: f64) -> bool {
        self.values.iter().any(|x| (x - v).abs() <= gap)
    }
}

/// `P_A(S)`: sum of the eigenprojectors of `A` for eigenvalues in `S`.
pub fn spectral_projector(a: &Observable, s: &EigenvalueSet, tols: Tolerances) -> Result<Projector> {
    let n = a.dim();
    let mut sum = CMat::zeros(n);
    let mut used: Vec<usize> = Vec::new();
    for &v in s.values() {
        let idx = a
            .resolution()
            .terms()
            .iter()
            .position(|(l, _)| (l.re - v).abs() <= tols.cluster_gap)
            .ok_or(Error::UnknownEigenvalue { value: v })?;
        if !used.contains(&idx) {
            used.push(idx);
            sum = sum + &a.resolution().terms()[idx].1;
        }
    }
    Projector::new(sum, tols)
}

/// `Pr[A|B] = tr[DBAB]/tr[DB]`, clamped to `[0, 1]`.
pub fn conditional_probability(d: &Density, a: &Projector, b: &Projector, tols: Tolerances) -> Result<f64> {
    let mass = d.expect(b.mat())?;
    if mass <= tols.tol {
        return Err(Error::ConditioningOnNull { mass });
    }
    let bab = b.mat() * a.mat() * b.mat();
    let p = d.expect(&bab)? / mass;
    debug_assert!(p >= -tols.tol && p <= 1.0 + tols.tol, "conditional probability {p} out of range");
    Ok(p.clamp(0.0, 1.0))
}

/// Lüders conditional state `D_B = BDB / tr[DB]`.
pub fn luders_density(d: &Density, b: &Projector, tols: Tolerances) -> Result<Density> {
    let mass = d.expect(b.mat())?;
    if mass <= tols.tol {
        return Err(Error::ConditioningOnNull { mass });
    }
    let bdb = b.mat() * d.mat() * b.mat();
    Density::new(bdb.scale(1.0 / mass), tols)
}

/// Projector order: `AB = BA = A`.
pub fn leq(a: &Projector, b: &Projector, tols: Tolerances) -> Result<bool> {
    a.mat().check_same_dim(b.mat())?;
    let ab = (a.mat() * b.mat()).distance(a.mat());
    let ba = (b.mat() * a.mat()).distance(a.mat());
    Ok(ab <= tols.tol && ba <= tols.tol)
}

/// `A⊥ = I − A`.
pub fn orthocomplement(a: &Projector) -> Projector {
    let n = a.dim();
    Projector { mat: CMat::identity(n) - a.mat(), rank: n - a.rank() }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureAxiomReport {
    /// `tr[DA_i]` for each family member.
    pub values: Vec<f64>,
    /// Largest excursion of any `tr[DA_i]` outside `[0, 1]`.
    pub range_residual: f64,
    /// `|tr[D·0]|`
    pub null_residual: f64,
    /// `|tr[D·I] − 1|`
    pub unit_residual: f64,
    /// `|tr[D ΣA_i] − Σ tr[DA_i]|`
    pub additivity_residual: f64,
    pub total: f64,
    pub passed: bool,
}

/// Finite instance of the probability-measure axioms on an orthogonal family.
pub fn check_measure_axioms(d: &Density, family: &[Projector], tols: Tolerances) -> Result<MeasureAxiomReport> {
    let n = d.dim();
    for p in family {
        d.mat().check_same_dim(p.mat())?;
    }
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let residual = (family[i].mat() * family[j].mat()).op_norm();
            if residual > tols.tol {
                return Err(Error::NotOrthogonalFamily { i, j, residual });
            }
        }
    }
    let values: Vec<f64> = family.iter().map(|p| d.expect(p.mat())).collect::<Result<_>>()?;
    let range_residual = values
        .iter()
        .map(|&v| (-v).max(v - 1.0).max(0.0))
        .fold(0.0, f64::max);
    let null_residual = d.expect(&CMat::zeros(n))?.abs();
    let unit_residual = (d.expect(&CMat::identity(n))? - 1.0).abs();
    let join = family.iter().fold(CMat::zeros(n), |acc, p| acc + p.mat());
    let total = d.expect(&join)?;
    let additivity_residual = (total - values.iter().sum::<f64>()).abs();
    let passed = [range_residual, null_residual, unit_residual, additivity_residual]
        .iter()
        .all(|&r| r <= tols.tol);
    Ok(MeasureAxiomReport { values, range_residual, null_residual, unit_residual, additivity_residual, total, passed })
}

/// Davies product probability `Pr{A;B} = tr[DB]·tr[D_B A] = tr[BDBA]`; zero when `tr[DB] ≤ tol`.
pub fn davies_joint(d: &Density, a: &Projector, b: &Projector, tols: Tolerances) -> Result<f64> {
    let mass = d.expect(b.mat())?;
    if mass <= tols.tol {
        return Ok(0.0);
    }
    let bdba = b.mat() * d.mat() * b.mat() * a.mat();
    Ok(bdba.trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::random::{random_density, random_projector, random_unitary};
    use crate::rng::TrialRng;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    fn plus3() -> Projector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Projector::ray(&[c(s, 0.0), c(s, 0.0), c(0.0, 0.0)]).unwrap()
    }

    fn span12() -> Projector {
        Projector::new(CMat::diag(&[1.0, 1.0, 0.0]), t()).unwrap()
    }

    #[test]
    fn projector_validation() {
        assert_eq!(span12().rank(), 2);
        assert!(Projector::new(CMat::diag(&[1.0, 0.5]), t()).is_err());
        let nonherm = CMat::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(Projector::new(nonherm, t()), Err(Error::NotProjector { .. })));
    }

    #[test]
    fn density_validation() {
        assert!(Density::new(CMat::diag(&[0.5, 0.5]), t()).is_ok());
        assert!(Density::new(CMat::diag(&[1.5, -0.5]), t()).is_err());
        assert!(Density::new(CMat::diag(&[0.5, 0.4]), t()).is_err());
    }

    #[test]
    fn spectral_projector_examples() {
        let a = Observable::new(CMat::diag(&[1.0, 0.0, 0.0]), t()).unwrap();
        let p = spectral_projector(&a, &EigenvalueSet::single(1.0), t()).unwrap();
        assert!(p.mat().distance(&CMat::basis_projector(3, 0)) < 1e-12);
        let full = spectral_projector(&a, &a.full_spectrum(), t()).unwrap();
        assert!(full.mat().distance(&CMat::identity(3)) < 1e-12);
        let empty = spectral_projector(&a, &EigenvalueSet::empty(), t()).unwrap();
        assert_eq!(empty.rank(), 0);

        let a = Observable::new(CMat::diag(&[2.0, 2.0, 5.0]), t()).unwrap();
        let p = spectral_projector(&a, &EigenvalueSet::single(2.0), t()).unwrap();
        assert_eq!(p.rank(), 2);
        assert!(p.mat().distance(&CMat::diag(&[1.0, 1.0, 0.0])) < 1e-12);

        assert!(matches!(
            spectral_projector(&a, &EigenvalueSet::single(3.0), t()),
            Err(Error::UnknownEigenvalue { .. })
        ));
    }

    #[test]
    fn conditional_probability_examples() {
        let d = Density::maximally_mixed(3);
        let b = span12();
        assert!((conditional_probability(&d, &b, &b, t()).unwrap() - 1.0).abs() < 1e-12);
        let e3 = Projector::basis(3, 2);
        assert!(conditional_probability(&d, &e3, &b, t()).unwrap().abs() < 1e-12);
        let e1 = Projector::basis(3, 0);
        assert!((conditional_probability(&d, &e1, &b, t()).unwrap() - 0.5).abs() < 1e-12);

        let pure = Density::pure(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            conditional_probability(&pure, &e1, &e3, t()),
            Err(Error::ConditioningOnNull { .. })
        ));
    }

    #[test]
    fn luders_examples() {
        let d = Density::maximally_mixed(3);
        let db = luders_density(&d, &span12(), t()).unwrap();
        assert!(db.mat().distance(&span12().mat().scale(0.5)) < 1e-12);
        assert!((db.expect(span12().mat()).unwrap() - 1.0).abs() < 1e-12);

        let mut rng = TrialRng::new(2, 0);
        let d = random_density(3, &mut rng);
        let same = luders_density(&d, &Projector::identity(3), t()).unwrap();
        assert!(same.mat().distance(d.mat()) < 1e-12);

        let e1 = Projector::basis(3, 0);
        let pure = Density::pure(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let out = luders_density(&pure, &e1, t()).unwrap();
        assert!(out.mat().distance(e1.mat()) < 1e-12);
    }

    #[test]
    fn order_examples() {
        let e1 = Projector::basis(3, 0);
        assert!(leq(&e1, &span12(), t()).unwrap());
        assert!(leq(&span12(), &span12(), t()).unwrap());
        assert!(!leq(&e1, &plus3(), t()).unwrap());
        assert!(!leq(&span12(), &e1, t()).unwrap());
        assert!(leq(&Projector::identity(2), &Projector::identity(3), t()).is_err());
    }

    #[test]
    fn orthocomplement_examples() {
        assert_eq!(orthocomplement(&Projector::identity(3)).rank(), 0);
        assert!(orthocomplement(&Projector::zero(3)).mat().distance(&CMat::identity(3)) < 1e-15);
        let a = Projector::basis(3, 0);
        let ac = orthocomplement(&a);
        assert!(ac.mat().distance(&CMat::diag(&[0.0, 1.0, 1.0])) < 1e-15);
        assert!((a.mat() * ac.mat()).op_norm() < 1e-15);
    }

    #[test]
    fn measure_axiom_examples() {
        let d = Density::maximally_mixed(3);
        let fam: Vec<Projector> = (0..3).map(|k| Projector::basis(3, k)).collect();
        let r = check_measure_axioms(&d, &fam, t()).unwrap();
        assert!(r.passed);
        assert!(r.additivity_residual < 1e-15 && (r.total - 1.0).abs() < 1e-15);

        let r = check_measure_axioms(&d, &[Projector::identity(3)], t()).unwrap();
        assert!((r.total - 1.0).abs() < 1e-15);

        // random orthogonal split of I in dim 4: the columns of a unitary
        let mut rng = TrialRng::new(6, 0);
        let d = random_density(4, &mut rng);
        let u = random_unitary(4, &mut rng);
        let cols = u.as_matrix();
        let fam = vec![
            Projector::new(CMat::column_projector(&cols.columns(0, 1).into_owned()), t()).unwrap(),
            Projector::new(CMat::column_projector(&cols.columns(1, 2).into_owned()), t()).unwrap(),
            Projector::new(CMat::column_projector(&cols.columns(3, 1).into_owned()), t()).unwrap(),
        ];
        let r = check_measure_axioms(&d, &fam, t()).unwrap();
        // brute-force sum of diagonal entries in the rotated basis
        let rotated = u.adjoint() * d.mat() * &u;
        let brute: f64 = (0..4).map(|i| rotated.entry(i, i).re).sum();
        assert!((r.total - brute).abs() <= 1e-10);
        assert!(r.range_residual <= 1e-10 && r.additivity_residual <= 1e-10 && r.unit_residual <= 1e-10);

        let overlapping = vec![Projector::basis(3, 0), span12()];
        assert!(matches!(
            check_measure_axioms(&Density::maximally_mixed(3), &overlapping, t()),
            Err(Error::NotOrthogonalFamily { .. })
        ));
    }

    #[test]
    fn davies_examples() {
        let a = Projector::new(CMat::diag(&[1.0, 1.0, 0.0]), t()).unwrap();
        let b = Projector::new(CMat::diag(&[0.0, 1.0, 1.0]), t()).unwrap();
        let d = Density::new(CMat::diag(&[0.5, 0.3, 0.2]), t()).unwrap();
        let ab = davies_joint(&d, &a, &b, t()).unwrap();
        let ba = davies_joint(&d, &b, &a, t()).unwrap();
        let direct = d.expect(&(a.mat() * b.mat())).unwrap();
        assert!((ab - direct).abs() < 1e-15 && (ba - direct).abs() < 1e-15);

        let e1 = Projector::basis(3, 0);
        let pure = Density::pure(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((davies_joint(&pure, &e1, &plus3(), t()).unwrap() - 0.25).abs() < 1e-12);
        assert!((davies_joint(&pure, &plus3(), &e1, t()).unwrap() - 0.5).abs() < 1e-12);

        let e2 = Projector::basis(3, 1);
        let mm = Density::maximally_mixed(3);
        assert_eq!(davies_joint(&mm, &e1, &e2, t()).unwrap(), 0.0);
        assert_eq!(davies_joint(&mm, &e2, &e1, t()).unwrap(), 0.0);
    }

    #[test]
    fn random_projectors_have_requested_rank() {
        let mut rng = TrialRng::new(1, 1);
        let p = random_projector(6, 4, &mut rng);
        assert_eq!(p.range_basis().ncols(), 4);
    }
}
