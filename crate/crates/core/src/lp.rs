//! Exact feasibility for `A z = b, z >= 0` over the rationals.
//!
//! Phase one of the simplex method on a dense tableau with Bland's rule, so it
//! always terminates. On infeasibility the Farkas multipliers are read off the
//! final tableau and checked before being returned.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// A nonnegative solution of `A z = b`.
    Feasible(Vec<Rational>),
    /// Multipliers `y` with `yᵀA >= 0` componentwise and `yᵀb < 0`.
    Infeasible(Vec<Rational>),
}

/// Decides whether `{z >= 0 : A z = b}` is nonempty.
///
/// `a` is row-major with `b.len()` rows, every row of equal length.
pub fn feasible_point(a: &[Vec<Rational>], b: &[Rational]) -> Feasibility {
    let rows = b.len();
    assert_eq!(a.len(), rows, "row count mismatch");
    let cols = a.first().map_or(0, Vec::len);

    // Flip rows so that the right-hand side is nonnegative.
    let sign: Vec<bool> = b.iter().map(Signed::is_negative).collect();
    let width = cols + rows + 1;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(rows);
    for i in 0..rows {
        assert_eq!(a[i].len(), cols, "ragged constraint matrix");
        let mut row = vec![Rational::zero(); width];
        for j in 0..cols {
            row[j] = if sign[i] { -a[i][j].clone() } else { a[i][j].clone() };
        }
        row[cols + i] = Rational::one();
        row[width - 1] = if sign[i] { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Reduced costs for minimising the sum of artificials.
    let mut cost = vec![Rational::zero(); width];
    for row in &t {
        for j in 0..cols {
            cost[j] -= &row[j];
        }
        cost[width - 1] -= &row[width - 1];
    }

    loop {
        // Bland: smallest index with negative reduced cost.
        let Some(enter) = (0..cols + rows).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else {
            // Unbounded below cannot happen for a sum of nonnegative artificials.
            unreachable!("phase-one objective is bounded below by zero");
        };
        pivot(&mut t, &mut cost, pr, enter);
        basis[pr] = enter;
    }

    let objective = -cost[width - 1].clone();
    if objective.is_zero() {
        let mut z = vec![Rational::zero(); cols];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < cols {
                z[bv] = t[i][width - 1].clone();
            }
        }
        debug_assert!(check_feasible(a, b, &z));
        return Feasibility::Feasible(z);
    }

    // Dual of the phase-one optimum: y' = c_Bᵀ B⁻¹, where B⁻¹ sits in the
    // artificial columns of the tableau. The Farkas vector is -y', unflipped.
    let mut y = vec![Rational::zero(); rows];
    for (i, &bv) in basis.iter().enumerate() {
        if bv >= cols {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr += &t[i][cols + r];
            }
        }
    }
    for (r, yr) in y.iter_mut().enumerate() {
        *yr = if sign[r] { yr.clone() } else { -yr.clone() };
    }
    assert!(check_farkas(a, b, &y), "Farkas certificate failed verification");
    Feasibility::Infeasible(y)
}

fn pivot(t: &mut [Vec<Rational>], cost: &mut [Rational], pr: usize, pc: usize) {
    let width = t[pr].len();
    let p = t[pr][pc].clone();
    for v in t[pr].iter_mut() {
        *v /= &p;
    }
    let prow = t[pr].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == pr || row[pc].is_zero() {
            continue;
        }
        let factor = row[pc].clone();
        for j in 0..width {
            if !prow[j].is_zero() {
                row[j] -= &factor * &prow[j];
            }
        }
    }
    if !cost[pc].is_zero() {
        let factor = cost[pc].clone();
        for j in 0..width {
            if !prow[j].is_zero() {
                cost[j] -= &factor * &prow[j];
            }
        }
    }
}

pub fn check_feasible(a: &[Vec<Rational>], b: &[Rational], z: &[Rational]) -> bool {
    if z.iter().any(Signed::is_negative) {
        return false;
    }
    a.iter().zip(b).all(|(row, bi)| {
        let lhs: Rational = row.iter().zip(z).map(|(x, y)| x * y).sum();
        &lhs == bi
    })
}

pub fn check_farkas(a: &[Vec<Rational>], b: &[Rational], y: &[Rational]) -> bool {
    let cols = a.first().map_or(0, Vec::len);
    let yb: Rational = y.iter().zip(b).map(|(u, v)| u * v).sum();
    if !yb.is_negative() {
        return false;
    }
    (0..cols).all(|j| {
        let s: Rational = a.iter().zip(y).map(|(row, yi)| &row[j] * yi).sum();
        !s.is_negative()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn simple_feasible() {
        // z0 + z1 = 1, z0 - z1 = 0  ->  (1/2, 1/2)
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        let b = vec![int(1), int(0)];
        match feasible_point(&a, &b) {
            Feasibility::Feasible(z) => assert_eq!(z, vec![rat(1, 2), rat(1, 2)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn simple_infeasible() {
        // z0 + z1 = -1 with z >= 0 is impossible.
        let a = vec![vec![int(1), int(1)]];
        let b = vec![int(-1)];
        match feasible_point(&a, &b) {
            Feasibility::Infeasible(y) => assert!(check_farkas(&a, &b, &y)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows() {
        let a = vec![
            vec![int(1), int(2), int(0)],
            vec![int(2), int(4), int(0)],
            vec![int(0), int(0), int(1)],
        ];
        let b = vec![int(2), int(4), int(3)];
        assert!(matches!(feasible_point(&a, &b), Feasibility::Feasible(_)));
        let b = vec![int(2), int(5), int(3)];
        assert!(matches!(feasible_point(&a, &b), Feasibility::Infeasible(_)));
    }
}
