//! Phase-1 simplex over exact rationals.
//!
//! Decides whether `Ax = b, x ≥ 0` has a solution. The tableau keeps the
//! artificial columns so that, at a positive optimum, the Farkas vector can
//! be read off their reduced costs: `yᵢ = 1 − d(artificialᵢ)` satisfies
//! `yᵀA ≤ 0` and `yᵀb > 0`. Bland's rule prevents cycling.

use num::{BigRational, One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// A nonnegative solution of `Ax = b`.
    Feasible(Vec<BigRational>),
    /// `y` with `yᵀA ≤ 0` componentwise and `yᵀb > 0`.
    Infeasible(Vec<BigRational>),
}

pub fn phase_one(a: &[Vec<BigRational>], b: &[BigRational]) -> LpOutcome {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    assert_eq!(b.len(), m, "right-hand side length");
    let width = n + m;

    let mut negated = vec![false; m];
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
    for i in 0..m {
        assert_eq!(a[i].len(), n, "ragged constraint matrix");
        let flip = b[i].is_negative();
        negated[i] = flip;
        let mut row: Vec<BigRational> = a[i].iter().map(|v| if flip { -v } else { v.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { BigRational::one() } else { BigRational::zero() }));
        rows.push(row);
        rhs.push(if flip { -&b[i] } else { b[i].clone() });
    }
    let mut basis: Vec<usize> = (n..width).collect();

    // reduced costs for min Σ artificials with the artificial basis
    let mut cost: Vec<BigRational> = (0..width)
        .map(|j| {
            let c = if j >= n { BigRational::one() } else { BigRational::zero() };
            rows.iter().fold(c, |acc, r| acc - &r[j])
        })
        .collect();

    while let Some(enter) = cost.iter().position(|d| d.is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if !rows[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &rows[i][enter];
            leave = match leave {
                None => Some((i, ratio)),
                Some((k, best)) => {
                    if ratio < best || (ratio == best && basis[i] < basis[k]) {
                        Some((i, ratio))
                    } else {
                        Some((k, best))
                    }
                }
            };
        }
        // phase 1 is bounded below by zero, so a pivot row always exists
        let (p, _) = leave.expect("phase-1 objective is bounded");
        pivot(&mut rows, &mut rhs, &mut cost, p, enter);
        basis[p] = enter;
    }

    let mut x = vec![BigRational::zero(); n];
    let mut objective = BigRational::zero();
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = rhs[i].clone();
        } else {
            objective += &rhs[i];
        }
    }
    if objective.is_zero() {
        return LpOutcome::Feasible(x);
    }
    let y = (0..m)
        .map(|i| {
            let yi = BigRational::one() - &cost[n + i];
            if negated[i] { -yi } else { yi }
        })
        .collect();
    LpOutcome::Infeasible(y)
}

fn pivot(
    rows: &mut [Vec<BigRational>],
    rhs: &mut [BigRational],
    cost: &mut [BigRational],
    p: usize,
    q: usize,
) {
    let inv = rows[p][q].recip();
    for v in rows[p].iter_mut() {
        *v *= &inv;
    }
    rhs[p] *= &inv;
    let prow = rows[p].clone();
    let prhs = rhs[p].clone();
    for (i, row) in rows.iter_mut().enumerate() {
        if i == p || row[q].is_zero() {
            continue;
        }
        let f = row[q].clone();
        for (v, pv) in row.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
        rhs[i] -= &f * &prhs;
    }
    if !cost[q].is_zero() {
        let f = cost[q].clone();
        for (v, pv) in cost.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect()
    }

    fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
        a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
    }

    #[test]
    fn simplex_feasible_system() {
        let a = mat(&[&[1, 1, 1], &[1, 0, 0]]);
        let b = vec![q(1, 1), q(1, 3)];
        match phase_one(&a, &b) {
            LpOutcome::Feasible(x) => {
                assert!(x.iter().all(|v| !v.is_negative()));
                for (row, bi) in a.iter().zip(&b) {
                    assert_eq!(&dot(row, &x), bi);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn simplex_infeasible_system_has_farkas_vector() {
        // x1 + x2 = 1 and x1 + x2 = 2
        let a = mat(&[&[1, 1], &[1, 1]]);
        let b = vec![q(1, 1), q(2, 1)];
        let LpOutcome::Infeasible(y) = phase_one(&a, &b) else { panic!("expected infeasible") };
        assert!(dot(&y, &b).is_positive());
        for j in 0..2 {
            let col: Vec<_> = a.iter().map(|r| r[j].clone()).collect();
            assert!(!dot(&y, &col).is_positive());
        }
    }

    #[test]
    fn simplex_negative_rhs() {
        // -x = -1/2 has x = 1/2; x = -1 has none
        let a = mat(&[&[-1]]);
        assert_eq!(phase_one(&a, &[q(-1, 2)]), LpOutcome::Feasible(vec![q(1, 2)]));
        let a = mat(&[&[1]]);
        let LpOutcome::Infeasible(y) = phase_one(&a, &[q(-1, 1)]) else { panic!() };
        assert!(y[0].is_negative());
    }

    #[test]
    fn simplex_degenerate_redundant_rows() {
        let a = mat(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 1]]);
        let b = vec![q(1, 2), q(1, 2), q(0, 1)];
        assert!(matches!(phase_one(&a, &b), LpOutcome::Feasible(_)));
    }
}
