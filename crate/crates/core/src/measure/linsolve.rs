//! Dense Gauss-Jordan elimination over the rationals.

use crate::rational::Rational;

/// Solves `a·x = b`; `None` when `a` is singular.
pub(crate) fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in col..n {
                let delta = &factor * &a[col][j];
                a[r][j] = &a[r][j] - &delta;
            }
            let delta = &factor * &b[col];
            b[r] = &b[r] - &delta;
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn two_by_two() {
        // x - y/2 = 1/2, -x/2 + y = 0  =>  x = 2/3, y = 1/3
        let a = vec![vec![r(1, 1), r(-1, 2)], vec![r(-1, 2), r(1, 1)]];
        let x = solve(a, vec![r(1, 2), r(0, 1)]).unwrap();
        assert_eq!(x, vec![r(2, 3), r(1, 3)]);
    }

    #[test]
    fn singular() {
        let a = vec![vec![r(1, 1), r(2, 1)], vec![r(2, 1), r(4, 1)]];
        assert!(solve(a, vec![r(1, 1), r(2, 1)]).is_none());
    }

    #[test]
    fn needs_pivoting() {
        let a = vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]];
        assert_eq!(solve(a, vec![r(3, 1), r(5, 1)]).unwrap(), vec![r(5, 1), r(3, 1)]);
    }
}
