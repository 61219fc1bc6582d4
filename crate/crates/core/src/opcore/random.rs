//! Random operators for property tests and batch trials.
//!
//! Densities are `G G† / tr[G G†]` with `G` i.i.d. complex standard Gaussian;
//! rank-`k` projectors come from orthonormalizing `k` Gaussian columns.

use nalgebra::DMatrix;

use super::{c, CMat, C64};
use crate::quantum::{Density, Projector};
use crate::rng::TrialRng;
use crate::Tolerances;

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut TrialRng) -> DMatrix<C64> {
    // column-major fill keeps the draw order explicit
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.complex_gaussian();
        }
    }
    m
}

/// Orthonormal basis for the column span of a full-rank `rows × k` matrix.
pub fn orthonormalize(m: DMatrix<C64>) -> DMatrix<C64> {
    let k = m.ncols();
    let q = m.qr().q();
    q.columns(0, k).into_owned()
}

pub fn random_hermitian(dim: usize, rng: &mut TrialRng) -> CMat {
    let g = CMat::new(gaussian_matrix(dim, dim, rng)).expect("finite");
    g.hermitian_part()
}

pub fn random_unitary(dim: usize, rng: &mut TrialRng) -> CMat {
    CMat::new(orthonormalize(gaussian_matrix(dim, dim, rng))).expect("finite")
}

/// Full-support random density (rank `dim` with probability one).
pub fn random_density(dim: usize, rng: &mut TrialRng) -> Density {
    random_density_of_rank(dim, dim, rng)
}

/// `G G† / tr[G G†]` with `G` of shape `dim × rank`.
pub fn random_density_of_rank(dim: usize, rank: usize, rng: &mut TrialRng) -> Density {
    let g = gaussian_matrix(dim, rank, rng);
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    let m = CMat::new(gg / c(tr, 0.0)).expect("finite");
    Density::new(m, Tolerances::default()).expect("Gram matrices are densities")
}

pub fn random_projector(dim: usize, rank: usize, rng: &mut TrialRng) -> Projector {
    if rank == 0 {
        return Projector::zero(dim);
    }
    let q = orthonormalize(gaussian_matrix(dim, rank, rng));
    Projector::new(CMat::column_projector(&q), Tolerances::default()).expect("orthonormal columns")
}

/// Two projectors diagonal in one shared random eigenbasis.
pub fn random_commuting_pair(dim: usize, rng: &mut TrialRng) -> (Projector, Projector) {
    let u = random_unitary(dim, rng);
    let pick = |rng: &mut TrialRng| -> Projector {
        let rank = rng.int_in(1, dim.saturating_sub(1).max(1));
        let mut idx: Vec<usize> = (0..dim).collect();
        // partial Fisher–Yates
        for i in 0..rank {
            let j = rng.int_in(i, dim - 1);
            idx.swap(i, j);
        }
        let mut diag = vec![0.0; dim];
        for &i in &idx[..rank] {
            diag[i] = 1.0;
        }
        let m = &u * CMat::diag(&diag) * u.adjoint();
        Projector::new(m, Tolerances::default()).expect("unitary conjugate of a 0/1 diagonal")
    };
    let a = pick(rng);
    let b = pick(rng);
    (a, b)
}

/// Random projector pair with `‖AB − BA‖∞ > min_commutator`, ranks in `[1, dim − 1]`.
pub fn random_noncommuting_pair(dim: usize, min_commutator: f64, rng: &mut TrialRng) -> (Projector, Projector) {
    assert!(dim >= 2, "noncommuting projectors need dim >= 2");
    loop {
        let ra = rng.int_in(1, dim - 1);
        let rb = rng.int_in(1, dim - 1);
        let a = random_projector(dim, ra, rng);
        let b = random_projector(dim, rb, rng);
        if a.mat().commutator(b.mat()).op_norm() > min_commutator {
            return (a, b);
        }
    }
}

/// Random projector `C ≤ B` of rank uniform in `[1, rank(B)]`, drawn inside `range(B)`.
pub fn random_subprojector(b: &Projector, rng: &mut TrialRng) -> Projector {
    let basis = b.range_basis();
    let r = basis.ncols();
    if r == 0 {
        return Projector::zero(b.dim());
    }
    let k = rng.int_in(1, r);
    let coeffs = orthonormalize(gaussian_matrix(r, k, rng));
    let cols = &basis * coeffs;
    Projector::new(CMat::column_projector(&cols), Tolerances::default()).expect("orthonormal columns")
}

/// Random density supported on `range(B)`.
pub fn random_density_within(b: &Projector, rng: &mut TrialRng) -> Density {
    let basis = b.range_basis();
    let r = basis.ncols();
    assert!(r > 0, "range of a zero projector supports no density");
    let inner = random_density(r, rng);
    let m = &basis * inner.mat().as_matrix() * basis.adjoint();
    Density::new(CMat::new(m).expect("finite"), Tolerances::default()).expect("congruence preserves densities")
}
