//! Subsets, permutations and matching fields.
//!
//! Indices are 1-based throughout, matching the usual notation for
//! Plücker coordinates `P_I` with `I ⊂ [n]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing `k`-subset of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KSubset(Vec<usize>);

impl KSubset {
    pub fn new(elements: Vec<usize>, n: usize) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("a subset needs at least one element"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("{elements:?} is not strictly increasing")));
        }
        if elements[0] < 1 || *elements.last().unwrap() > n {
            return Err(Error::invalid(format!("{elements:?} is not contained in [1, {n}]")));
        }
        Ok(KSubset(elements))
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Concatenated index label, e.g. `"125"`. Indices above 9 are
    /// separated by commas so the label stays unambiguous.
    pub fn label(&self) -> String {
        if self.0.iter().all(|&i| i < 10) {
            self.0.iter().map(|i| i.to_string()).collect()
        } else {
            self.0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

/// A permutation of `{1, …, k}` in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<usize>,
    sign: i8,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k + 1];
        for &x in &images {
            if x < 1 || x > k || seen[x] {
                return Err(Error::invalid(format!("{images:?} is not a permutation")));
            }
            seen[x] = true;
        }
        let sign = parity(&images);
        Ok(Perm { images, sign })
    }

    pub fn identity(k: usize) -> Self {
        Perm { images: (1..=k).collect(), sign: 1 }
    }

    /// The transposition (1 2) in `S_k`, `k ≥ 2`.
    pub fn swap12(k: usize) -> Self {
        let mut images: Vec<usize> = (1..=k).collect();
        images.swap(0, 1);
        Perm { images, sign: -1 }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `σ(r)` for 1-based `r`.
    pub fn apply(&self, r: usize) -> usize {
        self.images[r - 1]
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn k(&self) -> usize {
        self.images.len()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| x == i + 1)
    }
}

fn parity(images: &[usize]) -> i8 {
    let mut visited = vec![false; images.len()];
    let mut sign = 1i8;
    for start in 0..images.len() {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !visited[j] {
            visited[j] = true;
            j = images[j] - 1;
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// All permutations of `{1, …, k}` in lexicographic order.
pub fn all_perms(k: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(Perm { sign: parity(&cur), images: cur.clone() });
        // next lexicographic permutation
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// All `k`-subsets of `[n]` in lexicographic order.
pub fn enumerate_subsets(k: usize, n: usize) -> Result<Vec<KSubset>> {
    if k < 1 || k > n {
        return Err(Error::invalid(format!("need 1 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(KSubset(cur.clone()));
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - (k - 1 - i)) else {
            break;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Binomial coefficient.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The column of a `k × 1` tableau: entry `r` (0-based) is the element in row `r + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tableau(pub Vec<usize>);

impl Tableau {
    pub fn rows(&self) -> &[usize] {
        &self.0
    }
}

/// An assignment of a permutation to every `k`-subset of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingField {
    k: usize,
    n: usize,
    subsets: Vec<KSubset>,
    perms: Vec<Perm>,
}

impl MatchingField {
    /// Builds a field from a rule evaluated on every subset.
    pub fn from_fn(k: usize, n: usize, mut rule: impl FnMut(&KSubset) -> Perm) -> Result<Self> {
        let subsets = enumerate_subsets(k, n)?;
        let perms = subsets.iter().map(&mut rule).collect::<Vec<_>>();
        if perms.iter().any(|p| p.k() != k) {
            return Err(Error::invalid("rule returned a permutation of the wrong size"));
        }
        Ok(MatchingField { k, n, subsets, perms })
    }

    /// Builds a field from explicit entries; every subset must appear exactly once.
    pub fn from_entries(k: usize, n: usize, entries: Vec<(KSubset, Perm)>) -> Result<Self> {
        let mut map: BTreeMap<KSubset, Perm> = BTreeMap::new();
        for (s, p) in entries {
            if s.k() != k || p.k() != k || *s.elements().last().unwrap() > n {
                return Err(Error::invalid(format!("entry {s:?} does not fit Gr({k},{n})")));
            }
            if map.insert(s.clone(), p).is_some() {
                return Err(Error::invalid(format!("subset {s:?} assigned twice")));
            }
        }
        let subsets = enumerate_subsets(k, n)?;
        if map.len() != subsets.len() {
            return Err(Error::invalid("matching field must assign every subset"));
        }
        let perms = subsets.iter().map(|s| map[s].clone()).collect();
        Ok(MatchingField { k, n, subsets, perms })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Subsets in lexicographic order.
    pub fn subsets(&self) -> &[KSubset] {
        &self.subsets
    }

    /// `Λ(I)` for the subset at position `idx` of [`subsets`](Self::subsets).
    pub fn perm_at(&self, idx: usize) -> &Perm {
        &self.perms[idx]
    }

    pub fn perm(&self, subset: &KSubset) -> Option<&Perm> {
        self.subsets.binary_search(subset).ok().map(|i| &self.perms[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&KSubset, &Perm)> {
        self.subsets.iter().zip(&self.perms)
    }

    pub fn tableaux(&self) -> Vec<Tableau> {
        self.iter().map(|(s, p)| tableau(s, p)).collect()
    }
}

fn tableau(subset: &KSubset, sigma: &Perm) -> Tableau {
    let mut col = vec![0; subset.k()];
    for (r, &i) in subset.elements().iter().enumerate() {
        col[sigma.apply(r + 1) - 1] = i;
    }
    Tableau(col)
}

/// The tableau of `I` under `Λ`: the entry in row `σ(r)` is `i_r`.
pub fn tableau_of(field: &MatchingField, subset: &KSubset) -> Result<Tableau> {
    let sigma = field
        .perm(subset)
        .ok_or_else(|| Error::invalid(format!("{subset:?} is not a subset for this field")))?;
    Ok(tableau(subset, sigma))
}

/// The block diagonal field `B_ℓ`: swap the first two rows exactly when
/// `|I ∩ [ℓ]| = 1` and `|I| > 1`.
pub fn block_diagonal(k: usize, n: usize, ell: usize) -> Result<MatchingField> {
    if ell > n {
        return Err(Error::invalid(format!("ℓ = {ell} outside 0..={n}")));
    }
    MatchingField::from_fn(k, n, |s| {
        let hits = s.elements().iter().filter(|&&i| i <= ell).count();
        if s.k() > 1 && hits == 1 {
            Perm::swap12(k)
        } else {
            Perm::identity(k)
        }
    })
}

/// Checks the parameters of an intermediate field.
///
/// Accepts `ℓ ∈ {0, …, n−k+1}` and `λ ∈ {ℓ+2, …, n+ℓ} \ {n}`.
pub fn check_intermediate_params(k: usize, n: usize, ell: usize, lambda: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("need 2 ≤ k ≤ n, got k = {k}, n = {n}")));
    }
    if ell + k > n + 1 {
        return Err(Error::invalid(format!("ℓ = {ell} outside 0..={}", n + 1 - k)));
    }
    if lambda < ell + 2 || lambda > n + ell || lambda == n {
        return Err(Error::invalid(format!(
            "λ = {lambda} outside {{{}, …, {}}} \\ {{{n}}}",
            ell + 2,
            n + ell
        )));
    }
    Ok(())
}

/// Whether the intermediate field `B_ℓ^λ` assigns the identity to a subset
/// with smallest elements `p < q`.
pub(crate) fn intermediate_is_identity(n: usize, ell: usize, lambda: usize, p: usize, q: usize) -> bool {
    if q <= ell || ell + 1 < p {
        return true;
    }
    if lambda < n {
        p == ell + 1 && ell + 1 < lambda && lambda < q
    } else {
        let lp = lambda - n;
        p <= lp && lp < q && q == ell + 1
    }
}

/// The intermediate field `B_ℓ^λ` interpolating between `B_ℓ` and `B_{ℓ+1}`.
pub fn intermediate(k: usize, n: usize, ell: usize, lambda: usize) -> Result<MatchingField> {
    check_intermediate_params(k, n, ell, lambda)?;
    MatchingField::from_fn(k, n, |s| {
        let e = s.elements();
        if intermediate_is_identity(n, ell, lambda, e[0], e[1]) {
            Perm::identity(k)
        } else {
            Perm::swap12(k)
        }
    })
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    k: usize,
    n: usize,
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    subset: Vec<usize>,
    perm: Vec<usize>,
}

impl Serialize for MatchingField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldJson {
            k: self.k,
            n: self.n,
            entries: self
                .iter()
                .map(|(sub, p)| EntryJson { subset: sub.0.clone(), perm: p.images.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatchingField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = FieldJson::deserialize(d)?;
        let entries = raw
            .entries
            .into_iter()
            .map(|e| Ok((KSubset::new(e.subset, raw.n)?, Perm::new(e.perm)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        MatchingField::from_entries(raw.k, raw.n, entries).map_err(D::Error::custom)
    }
}
