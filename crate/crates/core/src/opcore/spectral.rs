use nalgebra::{DMatrix, DVector};

use super::{c, CMat, Tolerances, C64};
use crate::error::{Error, Result};
use crate::quantum::Density;

/// Eigenvalues of a normal matrix with their (clustered) eigenprojectors.
///
/// Terms are ordered by real part, then imaginary part, both descending.
#[derive(Debug, Clone)]
pub struct SpectralResolution {
    terms: Vec<(C64, CMat)>,
    source_dim: usize,
}

impl SpectralResolution {
    pub fn terms(&self) -> &[(C64, CMat)] {
        &self.terms
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = C64> + '_ {
        self.terms.iter().map(|(l, _)| *l)
    }

    /// `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> CMat {
        self.terms
            .iter()
            .fold(CMat::zeros(self.source_dim), |acc, (l, p)| acc + p.scale_c(*l))
    }

    /// Largest `‖P_i P_j‖∞` over distinct terms.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, (_, p)) in self.terms.iter().enumerate() {
            for (_, q) in &self.terms[i + 1..] {
                worst = worst.max((p * q).op_norm());
            }
        }
        worst
    }

    /// `‖Σ P_i − I‖∞`.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self
            .terms
            .iter()
            .fold(CMat::zeros(self.source_dim), |acc, (_, p)| acc + p);
        sum.distance(&CMat::identity(self.source_dim))
    }
}

/// Spectral decomposition of a normal matrix.
///
/// The Hermitian part is diagonalized first; each of its eigenspaces is then
/// split by the anti-Hermitian part (the two parts commute exactly when the
/// input is normal). Eigenvalues closer than `cluster_gap` are merged, with
/// single linkage, into one term.
pub fn spectral_decompose(m: &CMat, tols: Tolerances) -> Result<SpectralResolution> {
    let n = m.dim();
    let scale = m.max_abs_entry().max(1.0);
    let residual = m.normality_residual();
    if residual > tols.tol * scale * scale {
        return Err(Error::NotNormal { residual });
    }

    let re_part = m.hermitian_part();
    let im_part = m.antihermitian_part();
    let eig = re_part.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(n);
    for group in chain_groups(&order, |i| eig.eigenvalues[i], tols.cluster_gap) {
        let basis = DMatrix::from_columns(
            &group.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>(),
        );
        if group.len() == 1 {
            vectors.push(basis.column(0).into_owned());
            continue;
        }
        let restricted = basis.adjoint() * im_part.as_matrix() * &basis;
        let inner = restricted.symmetric_eigen();
        let rotated = &basis * &inner.eigenvectors;
        vectors.extend(rotated.column_iter().map(|col| col.into_owned()));
    }

    let lambdas: Vec<C64> = vectors
        .iter()
        .map(|v| (v.adjoint() * m.as_matrix() * v)[(0, 0)])
        .collect();

    // single-linkage clustering of the complex eigenvalues
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (lambdas[i] - lambdas[j]).norm() < tols.cluster_gap {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(slot) => clusters[slot].push(i),
            None => {
                root_slot[r] = Some(clusters.len());
                clusters.push(vec![i]);
            }
        }
    }

    let mut terms: Vec<(C64, CMat)> = clusters
        .into_iter()
        .map(|members| {
            let k = members.len() as f64;
            let lambda = members.iter().map(|&i| lambdas[i]).sum::<C64>() / c(k, 0.0);
            let proj = members.iter().fold(CMat::zeros(n), |acc, &i| {
                acc + CMat(&vectors[i] * vectors[i].adjoint())
            });
            (lambda, proj)
        })
        .collect();
    terms.sort_by(|(a, _), (b, _)| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(SpectralResolution { terms, source_dim: n })
}

/// Groups sorted indices whose consecutive keys differ by less than `gap`.
fn chain_groups(sorted: &[usize], key: impl Fn(usize) -> f64, gap: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in sorted {
        match groups.last_mut() {
            Some(g) if key(i) - key(*g.last().unwrap()) < gap => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

/// True iff every eigenvalue of the Hermitian matrix is `≥ −tol`.
pub fn is_positive(m: &CMat, tols: Tolerances) -> Result<bool> {
    let residual = m.hermitian_residual();
    if residual > tols.tol {
        return Err(Error::NotHermitian { residual });
    }
    let h = m.hermitian_part();
    let min = h
        .as_matrix()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &x| acc.min(x));
    Ok(min >= -tols.tol)
}

/// Rank-one density `D` with `|tr[DB]| = ‖B‖∞` for a normal `B ≠ 0`.
///
/// `D` projects onto an eigenvector of a maximal-modulus eigenvalue, so
/// `tr[DB] ≠ 0` for every nonzero normal `B`.
pub fn annihilation_witness(b: &CMat, tols: Tolerances) -> Result<Density> {
    let norm = b.op_norm();
    if norm <= tols.tol {
        return Err(Error::ZeroOperator { norm });
    }
    let res = spectral_decompose(b, tols)?;
    // first maximal-modulus term; ties go to the larger real part
    let (_, proj) = res
        .terms()
        .iter()
        .fold(None::<&(C64, CMat)>, |best, t| match best {
            Some(b) if b.0.norm() >= t.0.norm() => Some(b),
            _ => Some(t),
        })
        .expect("nonzero operator has a spectrum");
    // the column of largest norm is a well-conditioned vector in the range
    let pm = proj.as_matrix();
    let col = (0..pm.ncols())
        .max_by(|&i, &j| pm.column(i).norm().total_cmp(&pm.column(j).norm()))
        .unwrap();
    let v: Vec<C64> = pm.column(col).iter().copied().collect();
    Density::new(CMat::ray_projector(&v)?, tols)
}
