//! Weight matrices and the matching fields they induce.

use serde::{Deserialize, Serialize};

use crate::combinat::{self, all_perms, enumerate_subsets, KSubset, MatchingField, Perm};
use crate::error::{Error, Result};

/// A `k × n` integer matrix. Entry `(i, j)` weighs the variable `x_{i,j}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightMatrix {
    k: usize,
    n: usize,
    entries: Vec<Vec<i64>>,
}

impl WeightMatrix {
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let k = entries.len();
        let n = entries.first().map_or(0, |r| r.len());
        if k == 0 || n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("weight matrix must be a non-empty rectangle"));
        }
        Ok(WeightMatrix { k, n, entries })
    }

    pub fn zeros(k: usize, n: usize) -> Self {
        WeightMatrix { k, n, entries: vec![vec![0; n]; k] }
    }

    pub fn rows(&self) -> usize {
        self.k
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    /// Entry `m_{i,j}` with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i - 1][j - 1]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.entries[i - 1]
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    /// Weight of the term `x_{σ(1) i_1} ⋯ x_{σ(k) i_k}`.
    pub fn term_weight(&self, subset: &KSubset, sigma: &Perm) -> i64 {
        subset
            .elements()
            .iter()
            .enumerate()
            .map(|(r, &i)| self.get(sigma.apply(r + 1), i))
            .sum()
    }
}

/// Plücker weights indexed by [`enumerate_subsets`] order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlueckerWeightVector(pub Vec<i64>);

fn check_k(k: usize, n: usize, ell: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("need 2 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    if ell > n {
        return Err(Error::invalid(format!("ℓ = {ell} outside 0..={n}")));
    }
    Ok(())
}

/// The matrix `M_ℓ` inducing the block diagonal field `B_ℓ`.
pub fn m_ell(k: usize, n: usize, ell: usize) -> Result<WeightMatrix> {
    check_k(k, n, ell)?;
    let n64 = n as i64;
    let l = ell as i64;
    let mut entries = vec![vec![0i64; n]; k];
    for j in 1..=n64 {
        entries[1][j as usize - 1] = if j <= l { l + 1 - j } else { n64 + l + 1 - j };
        for i in 3..=k {
            entries[i - 1][j as usize - 1] = (i as i64 - 1) * (n64 - j + 1);
        }
    }
    WeightMatrix::new(entries)
}

/// The matrix `M_ℓ^λ` inducing the intermediate field `B_ℓ^λ`.
pub fn m_ell_lambda(k: usize, n: usize, ell: usize, lambda: usize) -> Result<WeightMatrix> {
    combinat::check_intermediate_params(k, n, ell, lambda)?;
    let n64 = n as i64;
    let l = ell as i64;
    let lam = lambda as i64;
    let big_n = n64 + 1;
    let mut entries = vec![vec![0i64; n]; k];
    for j in 1..=n64 {
        let second = if lambda < n {
            if j <= l {
                l + 1 - j
            } else if j == l + 1 {
                n64 - lam + l + 1
            } else if j <= lam {
                n64 + l + 2 - j
            } else {
                n64 + l + 1 - j
            }
        } else {
            let lp = lam - n64;
            if j <= lp {
                l + 2 - j
            } else if j <= l {
                l + 1 - j
            } else if j == l + 1 {
                l - lp + 1
            } else {
                n64 + l + 2 - j
            }
        };
        entries[1][j as usize - 1] = second;
        let mut scale = 1i64;
        for i in 3..=k {
            scale = scale.checked_mul(big_n).ok_or(Error::Overflow)?;
            entries[i - 1][j as usize - 1] = scale * (n64 - j + 1);
        }
    }
    WeightMatrix::new(entries)
}

fn check_fits(m: &WeightMatrix, subset: &KSubset) -> Result<()> {
    if m.rows() < subset.k() || m.cols() < *subset.elements().last().unwrap() {
        return Err(Error::invalid(format!(
            "{}×{} matrix is too small for subset {:?}",
            m.rows(),
            m.cols(),
            subset.elements()
        )));
    }
    Ok(())
}

/// All permutations attaining the minimum term weight of `P_I`.
pub fn min_weight_terms(m: &WeightMatrix, subset: &KSubset) -> Result<Vec<Perm>> {
    check_fits(m, subset)?;
    let perms = all_perms(subset.k());
    let weights: Vec<i64> = perms.iter().map(|p| m.term_weight(subset, p)).collect();
    let best = *weights.iter().min().unwrap();
    Ok(perms.into_iter().zip(weights).filter(|(_, w)| *w == best).map(|(p, _)| p).collect())
}

fn min_weight(m: &WeightMatrix, subset: &KSubset, perms: &[Perm]) -> i64 {
    perms.iter().map(|p| m.term_weight(subset, p)).min().unwrap()
}

/// True iff every Plücker form has a unique lowest-weight term.
pub fn is_coherent(m: &WeightMatrix, k: usize, n: usize) -> Result<bool> {
    for s in enumerate_subsets(k, n)? {
        if min_weight_terms(m, &s)?.len() != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The matching field selected by the unique minimisers.
pub fn induced_matching_field(m: &WeightMatrix, k: usize, n: usize) -> Result<MatchingField> {
    let subsets = enumerate_subsets(k, n)?;
    let mut entries = Vec::with_capacity(subsets.len());
    for s in subsets {
        let mut mins = min_weight_terms(m, &s)?;
        if mins.len() != 1 {
            return Err(Error::NotCoherent(s.label()));
        }
        entries.push((s, mins.pop().unwrap()));
    }
    MatchingField::from_entries(k, n, entries)
}

/// `w_M`: the minimum term weight of every `P_I`.
pub fn induced_weight_vector(m: &WeightMatrix, k: usize, n: usize) -> Result<PlueckerWeightVector> {
    let perms = all_perms(k);
    let subsets = enumerate_subsets(k, n)?;
    if let Some(s) = subsets.last() {
        check_fits(m, s)?;
    }
    Ok(PlueckerWeightVector(subsets.iter().map(|s| min_weight(m, s, &perms)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices() {
        let m = m_ell(3, 5, 1).unwrap();
        assert_eq!(m.entries(), &[vec![0, 0, 0, 0, 0], vec![1, 5, 4, 3, 2], vec![10, 8, 6, 4, 2]]);
        assert_eq!(m_ell(3, 5, 0).unwrap().row(2), &[5, 4, 3, 2, 1]);
        assert_eq!(m_ell(4, 6, 2).unwrap().row(4), &[18, 15, 12, 9, 6, 3]);
        let m = m_ell_lambda(3, 5, 0, 3).unwrap();
        assert_eq!(m.row(2), &[3, 5, 4, 2, 1]);
        assert_eq!(m.row(3), &[30, 24, 18, 12, 6]);
        assert_eq!(m_ell_lambda(3, 6, 2, 8).unwrap().row(2), &[3, 2, 1, 6, 5, 4]);
        assert!(m_ell(3, 5, 6).is_err());
        assert!(m_ell_lambda(3, 5, 0, 5).is_err());
    }

    #[test]
    fn ties() {
        let z = WeightMatrix::zeros(3, 5);
        let s = KSubset::new(vec![1, 2, 3], 5).unwrap();
        assert_eq!(min_weight_terms(&z, &s).unwrap().len(), 6);
        assert!(!is_coherent(&z, 3, 5).unwrap());
        assert!(matches!(induced_matching_field(&z, 3, 5), Err(Error::NotCoherent(_))));
        assert_eq!(induced_weight_vector(&z, 3, 5).unwrap().0, vec![0; 10]);
    }
}
