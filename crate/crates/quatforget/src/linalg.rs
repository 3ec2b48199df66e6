//! Small exact linear algebra helpers: integer Hermite normal form,
//! rational determinants/inverses and integer kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Row-style Hermite normal form of an integer matrix (rows are generators).
///
/// Returns the unique echelon basis of the row space: pivots positive,
/// entries above each pivot reduced into [0, pivot). Zero rows are dropped.
pub fn hnf(rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let mut m = rows;
    if m.is_empty() {
        return m;
    }
    let ncols = m[0].len();
    let mut pivot_row = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..ncols {
        // Reduce the column below pivot_row to a single nonzero entry (the gcd).
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..m.len() {
                if !m[r][col].is_zero() {
                    best = match best {
                        None => Some(r),
                        Some(b) => {
                            if m[r][col].abs() < m[b][col].abs() {
                                Some(r)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot_row, b);
            let mut done = true;
            for r in (pivot_row + 1)..m.len() {
                if m[r][col].is_zero() {
                    continue;
                }
                let q = m[r][col].div_floor(&m[pivot_row][col]);
                if !q.is_zero() {
                    for c in 0..ncols {
                        let sub = &q * &m[pivot_row][c];
                        m[r][c] -= sub;
                    }
                }
                if !m[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if pivot_row < m.len() && !m[pivot_row][col].is_zero() {
            pivots.push((pivot_row, col));
            pivot_row += 1;
            if pivot_row == m.len() {
                break;
            }
        }
    }
    m.truncate(pivot_row);
    // Normalize: positive pivots, entries above pivots reduced mod pivot.
    for &(r, c) in &pivots {
        if m[r][c].is_negative() {
            for x in m[r].iter_mut() {
                *x = -std::mem::take(x);
            }
        }
    }
    // Ascending pivot order: each pivot row has zeros in all earlier pivot
    // columns, so later reductions cannot disturb columns already reduced.
    for idx in 0..pivots.len() {
        let (r, c) = pivots[idx];
        for up in 0..r {
            let q = m[up][c].div_floor(&m[r][c]);
            if !q.is_zero() {
                for cc in 0..m[0].len() {
                    let sub = &q * &m[r][cc];
                    m[up][cc] -= sub;
                }
            }
        }
    }
    m
}

/// Basis of the left kernel {x : x * A = 0} of an integer matrix, as the
/// saturated integer lattice. Uses HNF with a unimodular row transform.
pub fn left_kernel(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let nrows = a.len();
    if nrows == 0 {
        return Vec::new();
    }
    let ncols = a[0].len();
    // Augment [A | I] and run the same elimination; rows of the identity
    // block whose A block is zero form the kernel.
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(nrows);
    for (i, row) in a.iter().enumerate() {
        let mut r = row.clone();
        for k in 0..nrows {
            r.push(if k == i { BigInt::one() } else { BigInt::zero() });
        }
        m.push(r);
    }
    let mut pivot_row = 0usize;
    for col in 0..ncols {
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..m.len() {
                if !m[r][col].is_zero() {
                    best = match best {
                        None => Some(r),
                        Some(b) => {
                            if m[r][col].abs() < m[b][col].abs() {
                                Some(r)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot_row, b);
            let mut done = true;
            for r in (pivot_row + 1)..m.len() {
                if m[r][col].is_zero() {
                    continue;
                }
                let q = m[r][col].div_floor(&m[pivot_row][col]);
                if !q.is_zero() {
                    for c in 0..(ncols + nrows) {
                        let sub = &q * &m[pivot_row][c];
                        m[r][c] -= sub;
                    }
                }
                if !m[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if pivot_row < m.len() && !m[pivot_row][col].is_zero() {
            pivot_row += 1;
            if pivot_row == m.len() {
                break;
            }
        }
    }
    let mut kernel = Vec::new();
    for r in pivot_row..m.len() {
        if m[r][..ncols].iter().all(|x| x.is_zero()) {
            kernel.push(m[r][ncols..].to_vec());
        }
    }
    hnf(kernel)
}

/// Kernel {c : A c = 0} of an integer matrix acting on column vectors.
pub fn right_kernel(a: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if a.is_empty() {
        return Vec::new();
    }
    let nrows = a.len();
    let ncols = a[0].len();
    let mut at = vec![vec![BigInt::zero(); nrows]; ncols];
    for i in 0..nrows {
        for j in 0..ncols {
            at[j][i] = a[i][j].clone();
        }
    }
    left_kernel(&at)
}

/// Determinant of a square rational matrix by fraction-free elimination.
pub fn det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut d = BigRational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        d *= a[col][col].clone();
        let inv = BigRational::one() / a[col][col].clone();
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() * &inv;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    d
}

/// Inverse of a square rational matrix; None if singular.
pub fn inverse(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        inv.swap(p, col);
        let piv = a[col][col].clone();
        for c in 0..n {
            a[col][c] /= &piv;
            inv[col][c] /= &piv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let s1 = &f * &a[col][c];
                a[r][c] -= s1;
                let s2 = &f * &inv[col][c];
                inv[r][c] -= s2;
            }
        }
    }
    Some(inv)
}

/// Solve x * A = v for a row vector over Q; None if inconsistent.
pub fn solve_left(a: &[Vec<BigRational>], v: &[BigRational]) -> Option<Vec<BigRational>> {
    // Gaussian elimination on the transpose system A^T x^T = v^T.
    let nrows = a.len();
    let ncols = a[0].len();
    let mut m: Vec<Vec<BigRational>> = (0..ncols)
        .map(|j| {
            let mut row: Vec<BigRational> = (0..nrows).map(|i| a[i][j].clone()).collect();
            row.push(v[j].clone());
            row
        })
        .collect();
    let mut pivot = 0usize;
    let mut pivot_cols = Vec::new();
    for col in 0..nrows {
        let Some(p) = (pivot..ncols).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(p, pivot);
        let piv = m[pivot][col].clone();
        for c in 0..=nrows {
            m[pivot][c] /= &piv;
        }
        for r in 0..ncols {
            if r == pivot || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..=nrows {
                let sub = &f * &m[pivot][c];
                m[r][c] -= sub;
            }
        }
        pivot_cols.push(col);
        pivot += 1;
        if pivot == ncols {
            break;
        }
    }
    // Consistency: rows beyond the pivots must have zero rhs.
    for r in pivot..ncols {
        if !m[r][nrows].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRational::zero(); nrows];
    for (idx, &col) in pivot_cols.iter().enumerate() {
        x[col] = m[idx][nrows].clone();
    }
    Some(x)
}
