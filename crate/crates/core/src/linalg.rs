//! Small dense linear algebra over [`Field`]s: kernels, projectors and
//! canonical orthonormal bases.

use nalgebra::DMatrix;

use crate::scalar::{Field, Rational};

/// Relative singular-value cutoff for the floating-point kernel.
pub const NULLSPACE_RTOL: f64 = 1e-9;

/// Residual cutoff used when extracting orthonormal bases in floating point.
pub const BASIS_TOL: f64 = 1e-9;

/// Kernel of a matrix given by rows; returns some basis (not orthonormal).
///
/// `scale` is a magnitude reference for the floating-point path: singular
/// values below `NULLSPACE_RTOL * max(sigma_max, scale)` count as zero.
pub fn nullspace<C: Field>(rows: &[Vec<C>], ncols: usize, scale: f64) -> Vec<Vec<C>> {
    if C::EXACT {
        rref_nullspace(rows, ncols)
    } else {
        let f: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(Field::to_f64).collect()).collect();
        svd_nullspace(&f, ncols, scale).into_iter().map(|v| v.iter().map(|x| C::from_rational(&float_to_rational(*x))).collect()).collect()
    }
}

// Only used to move float vectors through the generic interface; for `C = f64`
// `from_rational` of this value is the identity on the original float.
fn float_to_rational(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_default()
}

fn rref_nullspace<C: Field>(rows: &[Vec<C>], ncols: usize) -> Vec<Vec<C>> {
    let mut m: Vec<Vec<C>> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = C::one() / m[row][col].clone();
        for x in m[row].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..ncols {
                    let delta = factor.clone() * m[row][c].clone();
                    m[r][c] = m[r][c].clone() - delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![C::zero(); ncols];
            v[fc] = C::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][fc].clone();
            }
            v
        })
        .collect()
}

fn svd_nullspace(rows: &[Vec<f64>], ncols: usize, scale: f64) -> Vec<Vec<f64>> {
    if ncols == 0 {
        return Vec::new();
    }
    let nrows = rows.len().max(ncols);
    let mut a = DMatrix::<f64>::zeros(nrows, ncols);
    for (i, r) in rows.iter().enumerate() {
        for (j, x) in r.iter().enumerate() {
            a[(i, j)] = *x;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = NULLSPACE_RTOL * sigma_max.max(scale);
    svd.singular_values.iter().enumerate().filter(|(_, s)| **s <= cutoff).map(|(i, _)| v_t.row(i).iter().cloned().collect()).collect()
}

/// Solve `a x = b` for square `a` by Gaussian elimination with pivoting.
pub fn solve<C: Field>(a: &[Vec<C>], b: &[Vec<C>]) -> Option<Vec<Vec<C>>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<C>> = a.iter().zip(b).map(|(ar, br)| ar.iter().chain(br.iter()).cloned().collect()).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| {
            aug[i][col].abs_f64().partial_cmp(&aug[j][col].abs_f64()).unwrap_or(std::cmp::Ordering::Equal).then(j.cmp(&i))
        })?;
        if aug[p][col].is_zero() {
            return None;
        }
        aug.swap(col, p);
        let inv = C::one() / aug[col][col].clone();
        for x in aug[col].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in 0..n + m {
                    let delta = factor.clone() * aug[col][c].clone();
                    aug[r][c] = aug[r][c].clone() - delta;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn dot<C: Field>(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).fold(C::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Orthogonal projector (n x n) onto the span of linearly independent `vectors`.
pub fn projector<C: Field>(vectors: &[Vec<C>], n: usize) -> Vec<Vec<C>> {
    let r = vectors.len();
    if r == 0 {
        return vec![vec![C::zero(); n]; n];
    }
    let gram: Vec<Vec<C>> = (0..r).map(|i| (0..r).map(|j| dot(&vectors[i], &vectors[j])).collect()).collect();
    // G^{-1} N^T, shape r x n
    let nt: Vec<Vec<C>> = vectors.to_vec();
    let coeffs = solve(&gram, &nt).expect("independent spanning vectors");
    (0..n).map(|a| (0..n).map(|b| (0..r).fold(C::zero(), |acc, i| acc + vectors[i][a].clone() * coeffs[i][b].clone())).collect()).collect()
}

/// Deterministic orthonormal basis of the range of the projector `proj`.
///
/// Columns of `proj` (projections of the coordinate vectors) are run through
/// pivoted Gram-Schmidt, largest residual first, ties to the lowest index.
/// Each vector's first significant entry is made positive. Returns `None` when
/// a normalization is not representable in `C` (irrational norm over the
/// rationals).
pub fn canonical_basis<C: Field>(proj: &[Vec<C>], rank: usize) -> Option<Vec<Vec<C>>> {
    let n = proj.len();
    let mut candidates: Vec<Vec<C>> = (0..n).map(|i| (0..n).map(|a| proj[a][i].clone()).collect()).collect();
    let mut basis: Vec<Vec<C>> = Vec::with_capacity(rank);
    let mut used = vec![false; n];
    while basis.len() < rank {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in candidates.iter().enumerate() {
            if used[i] {
                continue;
            }
            let norm2 = dot(c, c).to_f64();
            if best.is_none_or(|(_, b)| norm2 > b * (1.0 + 1e-12)) {
                best = Some((i, norm2));
            }
        }
        let (i, _) = best?;
        used[i] = true;
        let v = candidates[i].clone();
        let norm2 = dot(&v, &v);
        if norm2.is_negligible(BASIS_TOL * BASIS_TOL) {
            return None;
        }
        let norm = norm2.sqrt_checked()?;
        let mut u: Vec<C> = v.into_iter().map(|x| x / norm.clone()).collect();
        if let Some(first) = u.iter().find(|x| !x.is_negligible(BASIS_TOL)) {
            if first.to_f64() < 0.0 {
                u = u.into_iter().map(|x| -x).collect();
            }
        }
        for (j, c) in candidates.iter_mut().enumerate() {
            if used[j] {
                continue;
            }
            let coef = dot(&u, c);
            for (cj, uj) in c.iter_mut().zip(&u) {
                *cj = cj.clone() - coef.clone() * uj.clone();
            }
        }
        basis.push(u);
    }
    Some(basis)
}

/// Identity minus `proj`.
pub fn complement_projector<C: Field>(proj: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = proj.len();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let id = if a == b { C::one() } else { C::zero() };
                    id - proj[a][b].clone()
                })
                .collect()
        })
        .collect()
}

/// Largest deviation of `b^T b` from the identity (as `f64`) and whether it is
/// exactly the identity.
pub fn orthogonality_defect<C: Field>(b: &[Vec<C>]) -> (f64, bool) {
    let n = b.len();
    let mut worst = 0.0f64;
    let mut exact = true;
    for i in 0..n {
        for j in 0..n {
            let s = (0..n).fold(C::zero(), |acc, a| acc + b[a][i].clone() * b[a][j].clone());
            let e = if i == j { s - C::one() } else { s };
            if !e.is_zero() {
                exact = false;
            }
            worst = worst.max(e.abs_f64());
        }
    }
    (worst, exact)
}

/// Eigenvalues of a symmetric matrix (ascending).
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    if n == 0 {
        return Vec::new();
    }
    let a = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn exact_kernel_of_rank_one_matrix() {
        let rows = vec![vec![int(2), int(2)], vec![int(2), int(2)]];
        let ker = nullspace(&rows, 2, 0.0);
        assert_eq!(ker, vec![vec![int(-1), int(1)]]);
        let p = projector(&ker, 2);
        assert_eq!(p[0][0], rat(1, 2));
        assert_eq!(p[0][1], rat(-1, 2));
        // norm of the projected axis is 1/sqrt(2): not exact
        assert!(canonical_basis(&p, 1).is_none());
    }

    #[test]
    fn float_kernel_matches_exact() {
        let rows = vec![vec![2.0, 2.0], vec![2.0, 2.0]];
        let ker = nullspace::<f64>(&rows, 2, 0.0);
        assert_eq!(ker.len(), 1);
        let p = projector(&ker, 2);
        let b = canonical_basis(&p, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b[0][0] - s).abs() < 1e-14 && (b[0][1] + s).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_has_full_kernel() {
        let ker = nullspace::<f64>(&[vec![0.0, 0.0, 0.0]], 3, 0.0);
        assert_eq!(ker.len(), 3);
        let ker = nullspace::<Rational>(&[], 2, 0.0);
        assert_eq!(ker.len(), 2);
    }

    #[test]
    fn axis_projector_gives_axis_basis() {
        let ker = vec![vec![int(0), int(3), int(0)], vec![int(0), int(0), int(-2)]];
        let p = projector(&ker, 3);
        let b = canonical_basis(&p, 2).unwrap();
        assert_eq!(b, vec![vec![int(0), int(1), int(0)], vec![int(0), int(0), int(1)]]);
        let q = complement_projector(&p);
        assert_eq!(canonical_basis(&q, 1).unwrap(), vec![vec![int(1), int(0), int(0)]]);
    }

    #[test]
    fn solve_small_system() {
        let a = vec![vec![int(0), int(1)], vec![int(2), int(1)]];
        let b = vec![vec![int(1)], vec![int(3)]];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x, vec![vec![int(1)], vec![int(1)]]);
        assert!(solve(&[vec![int(1), int(1)], vec![int(1), int(1)]], &b).is_none());
    }
}
