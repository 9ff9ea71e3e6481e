//! Integer lattice kernels: integral null spaces, Hermite normal form and
//! saturated affine frames.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Z-basis of `{x ∈ Z^ncols : A x = 0}`, returned as rows.
///
/// Works by unimodular column operations on `A`, mirrored on an identity
/// matrix; the columns past the last pivot then span the kernel.
pub fn integer_kernel(a: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut w: Vec<Vec<BigInt>> = a.to_vec();
    // u is stored column-major: u[c] is column c
    let mut u: Vec<Vec<BigInt>> = (0..ncols)
        .map(|c| (0..ncols).map(|r| if r == c { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut pc = 0;
    for r in 0..w.len() {
        if pc == ncols {
            break;
        }
        let Some(first) = (pc..ncols).find(|&c| !w[r][c].is_zero()) else {
            continue;
        };
        swap_cols(&mut w, &mut u, pc, first);
        for c in pc + 1..ncols {
            if w[r][c].is_zero() {
                continue;
            }
            let x = w[r][pc].clone();
            let y = w[r][c].clone();
            let e = x.extended_gcd(&y);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let xg = &x / &g;
            let yg = &y / &g;
            combine_cols(&mut w, pc, c, &s, &t, &yg, &xg);
            combine_cols_t(&mut u, pc, c, &s, &t, &yg, &xg);
        }
        pc += 1;
    }
    u.drain(pc..).collect()
}

fn swap_cols(w: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a == b {
        return;
    }
    for row in w.iter_mut() {
        row.swap(a, b);
    }
    u.swap(a, b);
}

// col_a ← s·col_a + t·col_c, col_c ← −y'·col_a + x'·col_c (row-major storage)
fn combine_cols(w: &mut [Vec<BigInt>], a: usize, c: usize, s: &BigInt, t: &BigInt, yg: &BigInt, xg: &BigInt) {
    for row in w.iter_mut() {
        let va = row[a].clone();
        let vc = row[c].clone();
        row[a] = s * &va + t * &vc;
        row[c] = xg * &vc - yg * &va;
    }
}

// same operation with columns stored as vectors
fn combine_cols_t(u: &mut [Vec<BigInt>], a: usize, c: usize, s: &BigInt, t: &BigInt, yg: &BigInt, xg: &BigInt) {
    let ca = u[a].clone();
    let cc = u[c].clone();
    u[a] = ca.iter().zip(&cc).map(|(p, q)| s * p + t * q).collect();
    u[c] = ca.iter().zip(&cc).map(|(p, q)| xg * q - yg * p).collect();
}

/// Row Hermite normal form of the lattice spanned by `rows`.
///
/// Zero rows are dropped; pivots are positive and entries above a pivot
/// are reduced into `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pr = 0;
    for c in 0..ncols {
        if pr == m.len() {
            break;
        }
        // gcd-combine all rows at or below pr into row pr
        for r in pr + 1..m.len() {
            if m[r][c].is_zero() {
                continue;
            }
            if m[pr][c].is_zero() {
                m.swap(pr, r);
                continue;
            }
            let x = m[pr][c].clone();
            let y = m[r][c].clone();
            let e = x.extended_gcd(&y);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let xg = &x / &g;
            let yg = &y / &g;
            let top = m[pr].clone();
            let bot = m[r].clone();
            m[pr] = top.iter().zip(&bot).map(|(p, q)| &s * p + &t * q).collect();
            m[r] = top.iter().zip(&bot).map(|(p, q)| &xg * q - &yg * p).collect();
        }
        if m[pr][c].is_zero() {
            continue;
        }
        if m[pr][c].is_negative() {
            for v in m[pr].iter_mut() {
                *v = -v.clone();
            }
        }
        let piv = m[pr][c].clone();
        for r in 0..pr {
            let q = m[r][c].div_floor(&piv);
            if !q.is_zero() {
                let sub = m[pr].clone();
                for (v, s) in m[r].iter_mut().zip(&sub) {
                    *v -= &q * s;
                }
            }
        }
        pr += 1;
    }
    m.truncate(pr);
    m
}

/// An integral base point with a Z-basis of the lattice
/// `(aff(P) − base) ∩ Z^D`, in Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineFrame {
    pub base: Vec<BigInt>,
    pub basis: Vec<Vec<BigInt>>,
}

impl AffineFrame {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// Frame coordinates of an integral point of the affine span.
    pub fn coords(&self, p: &[BigInt]) -> Result<Vec<BigInt>> {
        if p.len() != self.base.len() {
            return Err(Error::DimensionMismatch { expected: self.base.len(), got: p.len() });
        }
        let diff: Vec<BigInt> = p.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let mut rest = diff.clone();
        let mut out = Vec::with_capacity(self.basis.len());
        for b in &self.basis {
            let piv = b.iter().position(|v| !v.is_zero()).expect("HNF rows are nonzero");
            let (q, r) = rest[piv].div_rem(&b[piv]);
            if !r.is_zero() {
                return Err(Error::NonIntegral("point is not in the frame lattice".into()));
            }
            for (v, bv) in rest.iter_mut().zip(b) {
                *v -= &q * bv;
            }
            out.push(q);
        }
        if rest.iter().any(|v| !v.is_zero()) {
            return Err(Error::invalid("point is not in the affine span of the frame"));
        }
        Ok(out)
    }

    pub fn coords_i64(&self, p: &[BigInt]) -> Result<Vec<i64>> {
        self.coords(p)?.iter().map(|v| v.to_i64().ok_or(Error::Overflow)).collect()
    }

    /// The ambient point with the given frame coordinates.
    pub fn point(&self, c: &[BigInt]) -> Vec<BigInt> {
        let mut out = self.base.clone();
        for (ci, b) in c.iter().zip(&self.basis) {
            for (o, bv) in out.iter_mut().zip(b) {
                *o += ci * bv;
            }
        }
        out
    }
}

/// The saturated frame of a set of integral points.
pub fn saturated_frame(pts: &[Vec<BigInt>]) -> Result<AffineFrame> {
    let Some(first) = pts.first() else {
        return Err(Error::invalid("no points"));
    };
    let dim = first.len();
    if let Some(p) = pts.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    let diffs: Vec<Vec<BigInt>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    // normals to the affine span, then the integer points orthogonal to them
    let normals = integer_kernel(&diffs, dim);
    let lattice = integer_kernel(&normals, dim);
    Ok(AffineFrame { base: first.clone(), basis: hermite_normal_form(&lattice) })
}

/// Absolute value of a determinant, exact.
pub fn det_abs(m: &[Vec<BigInt>]) -> BigInt {
    det(m).abs()
}

/// Exact determinant by Bareiss elimination.
pub fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn kernel_of_row() {
        let k = integer_kernel(&bi(&[&[2, 4, 6]]), 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let dot: BigInt = v.iter().zip([2, 4, 6]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
        // the kernel lattice has index 1 in its saturation
        let h = hermite_normal_form(&k);
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn frames() {
        let f = saturated_frame(&bi(&[&[0, 0, 0], &[2, 0, 0]])).unwrap();
        assert_eq!(f.basis, bi(&[&[1, 0, 0]]));
        assert_eq!(f.coords(&bi(&[&[2, 0, 0]])[0]).unwrap(), vec![BigInt::from(2)]);
        let f = saturated_frame(&bi(&[&[0, 0], &[1, 1]])).unwrap();
        assert_eq!(f.basis, bi(&[&[1, 1]]));
        let f = saturated_frame(&bi(&[&[3, 3]])).unwrap();
        assert_eq!(f.dim(), 0);
    }

    #[test]
    fn saturation_beats_difference_lattice() {
        // differences span an index-2 sublattice of the plane x + y + z = 0
        let f = saturated_frame(&bi(&[&[0, 0, 0], &[2, -2, 0], &[0, 2, -2]])).unwrap();
        assert_eq!(f.dim(), 2);
        let c = f.coords(&bi(&[&[1, -1, 0]])[0]).unwrap();
        assert_eq!(f.point(&c), bi(&[&[1, -1, 0]])[0]);
    }

    #[test]
    fn determinants() {
        assert_eq!(det(&bi(&[&[1, 2], &[3, 4]])), BigInt::from(-2));
        assert_eq!(det(&bi(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]])), BigInt::from(-1));
        assert_eq!(det(&bi(&[&[2, 4], &[1, 2]])), BigInt::zero());
    }
}
