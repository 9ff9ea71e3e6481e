//! The signed monomial map of a matching field, degree-2 generators of its
//! toric ideal and of the Plücker ideal, initial forms, and the degree-2
//! shadow of a toric degeneration.
//!
//! Plücker variables `P_I` are indexed by position in
//! [`enumerate_subsets`]; the variable `x_{i,j}` has index `(i−1)·n + (j−1)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{all_perms, enumerate_subsets, KSubset, MatchingField};
use crate::error::{Error, Result};
use crate::polytope::{matching_field_polytope, rat_from_str, rat_to_string, Rat};
use crate::combinat::block_diagonal;
use crate::weightmat::{induced_matching_field, induced_weight_vector, PlueckerWeightVector, WeightMatrix};

/// Columns of the signed monomial map `P_I ↦ sgn(Λ(I))·x_{Λ(I)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentMatrix {
    pub k: usize,
    pub n: usize,
    /// The `k` variable indices of each column, sorted.
    pub columns: Vec<Vec<usize>>,
    pub signs: Vec<i8>,
}

impl ExponentMatrix {
    /// The 0/1 matrix with `k·n` rows.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.columns.len()]; self.k * self.n];
        for (c, col) in self.columns.iter().enumerate() {
            for &x in col {
                m[x][c] = 1;
            }
        }
        m
    }

    // A-image of a monomial, as a sorted multiset of variables
    fn image(&self, vars: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = vars.iter().flat_map(|&v| self.columns[v].iter().copied()).collect();
        out.sort_unstable();
        out
    }

    fn sign(&self, vars: &[usize]) -> i8 {
        vars.iter().map(|&v| self.signs[v]).product()
    }
}

pub fn exponent_matrix(field: &MatchingField) -> ExponentMatrix {
    let n = field.n();
    let (columns, signs) = field
        .iter()
        .map(|(s, p)| {
            let mut col: Vec<usize> =
                s.elements().iter().enumerate().map(|(r, &i)| (p.apply(r + 1) - 1) * n + (i - 1)).collect();
            col.sort_unstable();
            (col, p.sign())
        })
        .unzip();
    ExponentMatrix { k: field.k(), n, columns, signs }
}

/// A term `c·P^α` with `α` dense over the Plücker variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rat,
    pub exps: Vec<u32>,
}

impl Term {
    /// The variables of the monomial with multiplicity, ascending.
    pub fn vars(&self) -> Vec<usize> {
        self.exps.iter().enumerate().flat_map(|(i, &e)| std::iter::repeat(i).take(e as usize)).collect()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn weight(&self, w: &PlueckerWeightVector) -> i64 {
        self.exps.iter().zip(&w.0).map(|(&e, &x)| e as i64 * x).sum()
    }
}

/// A polynomial in the Plücker variables of `Gr(k, n)`. Terms are kept
/// merged, nonzero and in descending exponent order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PPolynomial {
    k: usize,
    n: usize,
    subsets: Vec<KSubset>,
    terms: Vec<Term>,
}

impl PPolynomial {
    pub fn new(k: usize, n: usize, terms: Vec<(Rat, Vec<u32>)>) -> Result<Self> {
        let subsets = enumerate_subsets(k, n)?;
        let mut merged: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        for (c, e) in terms {
            if e.len() != subsets.len() {
                return Err(Error::DimensionMismatch { expected: subsets.len(), got: e.len() });
            }
            *merged.entry(e).or_insert_with(Rat::zero) += c;
        }
        let terms = merged
            .into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exps, coeff)| Term { coeff, exps })
            .collect();
        Ok(PPolynomial { k, n, subsets, terms })
    }

    /// Builds from integer coefficients and lists of variable indices.
    pub fn from_monomials(k: usize, n: usize, terms: &[(i64, Vec<usize>)]) -> Result<Self> {
        let nv = crate::combinat::binomial(n, k);
        let mut out = Vec::with_capacity(terms.len());
        for (c, vars) in terms {
            let mut e = vec![0u32; nv];
            for &v in vars {
                *e.get_mut(v).ok_or_else(|| Error::invalid(format!("no Plücker variable {v}")))? += 1;
            }
            out.push((Rat::from_integer((*c).into()), e));
        }
        Self::new(k, n, out)
    }

    /// Parses text such as `"P145 P235 - P135*P245 + 2 P125 P345"`.
    /// Labels with indices above 9 are written with commas in braces,
    /// e.g. `P{1,2,10}`.
    pub fn parse(k: usize, n: usize, s: &str) -> Result<Self> {
        let subsets = enumerate_subsets(k, n)?;
        let index: HashMap<String, usize> = subsets.iter().enumerate().map(|(i, s)| (s.label(), i)).collect();
        let bad = |m: &str| Error::invalid(format!("cannot parse {s:?}: {m}"));
        let mut terms = Vec::new();
        let mut sign = 1i64;
        let mut coeff: Option<i64> = None;
        let mut vars: Vec<usize> = Vec::new();
        let mut open = false;
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        let mut flush = |sign: i64, coeff: &mut Option<i64>, vars: &mut Vec<usize>, open: &mut bool| {
            if *open {
                terms.push((sign * coeff.unwrap_or(1), std::mem::take(vars)));
                *coeff = None;
                *open = false;
            }
        };
        while i < chars.len() {
            let c = chars[i];
            match c {
                ' ' | '*' | '·' => i += 1,
                '+' | '-' | '−' => {
                    flush(sign, &mut coeff, &mut vars, &mut open);
                    sign = if c == '+' { 1 } else { -1 };
                    i += 1;
                }
                '0'..='9' => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let v: String = chars[start..i].iter().collect();
                    coeff = Some(v.parse().map_err(|_| bad("coefficient"))?);
                    open = true;
                }
                'P' => {
                    i += 1;
                    let label: String = if chars.get(i) == Some(&'{') {
                        let end = chars[i..].iter().position(|&c| c == '}').ok_or_else(|| bad("unclosed brace"))?;
                        let l = chars[i + 1..i + end].iter().collect();
                        i += end + 1;
                        l
                    } else {
                        let start = i;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                        chars[start..i].iter().collect()
                    };
                    vars.push(*index.get(&label).ok_or_else(|| bad(&format!("unknown variable P{label}")))?);
                    open = true;
                }
                _ => return Err(bad(&format!("unexpected {c:?}"))),
            }
        }
        flush(sign, &mut coeff, &mut vars, &mut open);
        Self::from_monomials(k, n, &terms)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_binomial(&self) -> bool {
        self.terms.len() == 2
    }

    pub fn scale(&self, c: &Rat) -> PPolynomial {
        let mut out = self.clone();
        out.terms.retain(|_| !c.is_zero());
        for t in out.terms.iter_mut() {
            t.coeff *= c;
        }
        out
    }

    pub fn neg(&self) -> PPolynomial {
        self.scale(&-Rat::one())
    }

    /// Coefficient vector over the given monomials, or `None` if some term
    /// is not among them.
    fn coords(&self, basis: &[Vec<u32>]) -> Option<Vec<Rat>> {
        let mut v = vec![Rat::zero(); basis.len()];
        for t in &self.terms {
            let i = basis.iter().position(|b| *b == t.exps)?;
            v[i] = t.coeff.clone();
        }
        Some(v)
    }

    fn var_label(&self, v: usize) -> String {
        let l = self.subsets[v].label();
        if l.contains(',') {
            format!("{{{l}}}")
        } else {
            l
        }
    }
}

impl fmt::Display for PPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = t.coeff.abs();
            let mono: Vec<String> = t.vars().iter().map(|&v| format!("P{}", self.var_label(v))).collect();
            if !a.is_one() || mono.is_empty() {
                write!(f, "{}", if a.is_integer() { a.to_integer().to_string() } else { a.to_string() })?;
                if !mono.is_empty() {
                    write!(f, " ")?;
                }
            }
            write!(f, "{}", mono.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    exps: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    k: usize,
    n: usize,
    terms: Vec<TermJson>,
}

impl Serialize for PPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|t| TermJson {
                coeff: rat_to_string(&t.coeff),
                exps: t
                    .exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (self.subsets[i].label(), e))
                    .collect(),
            })
            .collect();
        PolyJson { k: self.k, n: self.n, terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        let subsets = enumerate_subsets(raw.k, raw.n).map_err(D::Error::custom)?;
        let index: HashMap<String, usize> = subsets.iter().enumerate().map(|(i, s)| (s.label(), i)).collect();
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let mut e = vec![0u32; subsets.len()];
            for (label, p) in t.exps {
                let i = index.get(&label).ok_or_else(|| D::Error::custom(format!("unknown variable {label}")))?;
                e[*i] = p;
            }
            terms.push((rat_from_str(&t.coeff).map_err(D::Error::custom)?, e));
        }
        PPolynomial::new(raw.k, raw.n, terms).map_err(D::Error::custom)
    }
}

/// The lowest-weight part of `f`.
pub fn initial_form(f: &PPolynomial, w: &PlueckerWeightVector) -> PPolynomial {
    let Some(min) = f.terms.iter().map(|t| t.weight(w)).min() else {
        return f.clone();
    };
    let mut out = f.clone();
    out.terms.retain(|t| t.weight(w) == min);
    out
}

// ----- exact linear algebra over the rationals -----

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
fn rref(mut m: Vec<Vec<Rat>>, ncols: usize) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rat::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

/// A basis of the right kernel, one vector per free column.
fn kernel(a: Vec<Vec<Rat>>, ncols: usize) -> Vec<Vec<Rat>> {
    let (r, pivots) = rref(a, ncols);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut v = vec![Rat::zero(); ncols];
            v[f] = Rat::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Clears denominators and common factors; the first nonzero entry ends
/// up positive.
fn primitive(v: &[Rat]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let flip = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    ints.into_iter()
        .map(|x| {
            let y = if g.is_zero() { x } else { x / &g };
            if flip {
                -y
            } else {
                y
            }
        })
        .collect()
}

// ----- the Plücker ideal in degree 2 -----

pub const PLUECKER_MAX_K: usize = 4;
pub const PLUECKER_MAX_N: usize = 8;

/// One homogeneous block of degree-2 Plücker monomials with a common
/// column content, together with a basis of the relations among them.
struct Block {
    monomials: Vec<(usize, usize)>,
    relations: Vec<Vec<Rat>>,
}

fn expansions(k: usize, n: usize, subsets: &[KSubset]) -> Vec<Vec<(i64, Vec<u16>)>> {
    let perms = all_perms(k);
    subsets
        .iter()
        .map(|s| {
            perms
                .iter()
                .map(|p| {
                    let mut m: Vec<u16> =
                        s.elements().iter().enumerate().map(|(r, &i)| ((p.apply(r + 1) - 1) * n + i - 1) as u16).collect();
                    m.sort_unstable();
                    (p.sign() as i64, m)
                })
                .collect()
        })
        .collect()
}

fn pluecker_blocks(k: usize, n: usize) -> Result<Vec<Block>> {
    if k > PLUECKER_MAX_K || n > PLUECKER_MAX_N {
        return Err(Error::ScaleLimit(format!(
            "degree-2 Plücker relations need k ≤ {PLUECKER_MAX_K}, n ≤ {PLUECKER_MAX_N}; got k = {k}, n = {n}"
        )));
    }
    let subsets = enumerate_subsets(k, n)?;
    let dets = expansions(k, n, &subsets);
    let mut groups: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
    for a in 0..subsets.len() {
        for b in a..subsets.len() {
            let mut content: Vec<usize> = subsets[a].elements().iter().chain(subsets[b].elements()).copied().collect();
            content.sort_unstable();
            groups.entry(content).or_default().push((a, b));
        }
    }
    let blocks: Vec<Block> = groups
        .into_values()
        .filter(|m| m.len() > 1)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|monomials| {
            let mut rows: HashMap<Vec<u16>, Vec<i64>> = HashMap::new();
            for (c, &(a, b)) in monomials.iter().enumerate() {
                for (sa, ma) in &dets[a] {
                    for (sb, mb) in &dets[b] {
                        let mut m: Vec<u16> = ma.iter().chain(mb).copied().collect();
                        m.sort_unstable();
                        rows.entry(m).or_insert_with(|| vec![0; monomials.len()])[c] += sa * sb;
                    }
                }
            }
            let mut keys: Vec<_> = rows.keys().cloned().collect();
            keys.sort();
            let a: Vec<Vec<Rat>> = keys
                .iter()
                .map(|key| rows[key].iter().map(|&x| Rat::from_integer(x.into())).collect())
                .collect();
            let relations = kernel(a, monomials.len());
            Block { monomials, relations }
        })
        .collect();
    Ok(blocks)
}

fn block_poly(k: usize, n: usize, nv: usize, monomials: &[(usize, usize)], coeffs: &[BigInt]) -> Result<PPolynomial> {
    let terms = monomials
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| !c.is_zero())
        .map(|(&(a, b), c)| {
            let mut e = vec![0u32; nv];
            e[a] += 1;
            e[b] += 1;
            (Rat::from_integer(c.clone()), e)
        })
        .collect();
    PPolynomial::new(k, n, terms)
}

/// A basis of the degree-2 part of the Plücker ideal, block by block in
/// order of column content, each relation primitive with its first
/// coefficient positive.
pub fn pluecker_deg2(k: usize, n: usize) -> Result<Vec<PPolynomial>> {
    let nv = crate::combinat::binomial(n, k);
    let mut out = Vec::new();
    for b in pluecker_blocks(k, n)? {
        for r in &b.relations {
            out.push(block_poly(k, n, nv, &b.monomials, &primitive(r))?);
        }
    }
    Ok(out)
}

/// Degree-2 relations in a basis adapted to `w`: within each block the
/// basis is row reduced with monomials sorted by weight, so the initial
/// forms of the basis span the initial forms of every relation.
pub fn pluecker_deg2_adapted(k: usize, n: usize, w: &PlueckerWeightVector) -> Result<Vec<PPolynomial>> {
    let nv = crate::combinat::binomial(n, k);
    if w.0.len() != nv {
        return Err(Error::DimensionMismatch { expected: nv, got: w.0.len() });
    }
    let mut out = Vec::new();
    for b in pluecker_blocks(k, n)? {
        if b.relations.is_empty() {
            continue;
        }
        let mut order: Vec<usize> = (0..b.monomials.len()).collect();
        order.sort_by_key(|&i| (w.0[b.monomials[i].0] + w.0[b.monomials[i].1], i));
        let permuted: Vec<Vec<Rat>> = b.relations.iter().map(|r| order.iter().map(|&i| r[i].clone()).collect()).collect();
        let (reduced, _) = rref(permuted, order.len());
        let monos: Vec<(usize, usize)> = order.iter().map(|&i| b.monomials[i]).collect();
        for r in &reduced {
            out.push(block_poly(k, n, nv, &monos, &primitive(r))?);
        }
    }
    Ok(out)
}

/// Whether the polynomials in `a` lie in the span of those in `b`.
pub fn span_contains(b: &[PPolynomial], a: &[PPolynomial]) -> bool {
    let mut basis: Vec<Vec<u32>> = Vec::new();
    for p in a.iter().chain(b) {
        for t in &p.terms {
            if !basis.contains(&t.exps) {
                basis.push(t.exps.clone());
            }
        }
    }
    let rows = |ps: &[PPolynomial]| -> Vec<Vec<Rat>> { ps.iter().map(|p| p.coords(&basis).unwrap()).collect() };
    let rb = rref(rows(b), basis.len()).1.len();
    let mut both = rows(b);
    both.extend(rows(a));
    rref(both, basis.len()).1.len() == rb
}

// ----- the toric ideal in degree 2 -----

/// All binomials `P^a − σ·P^b` of degree 2 in `J_Λ`, one per unordered
/// pair of monomials with a common image, the larger monomial first.
pub fn toric_generators_deg2(field: &MatchingField) -> Result<Vec<PPolynomial>> {
    let a = exponent_matrix(field);
    let (k, n) = (field.k(), field.n());
    let nv = a.columns.len();
    let mut fibers: BTreeMap<Vec<usize>, Vec<[usize; 2]>> = BTreeMap::new();
    for i in 0..nv {
        for j in i..nv {
            fibers.entry(a.image(&[i, j])).or_default().push([i, j]);
        }
    }
    let mut out = Vec::new();
    for monos in fibers.values() {
        for (x, lo) in monos.iter().enumerate() {
            for hi in &monos[x + 1..] {
                let sigma = a.sign(hi) as i64 * a.sign(lo) as i64;
                out.push(PPolynomial::from_monomials(k, n, &[(1, hi.to_vec()), (-sigma, lo.to_vec())])?);
            }
        }
    }
    out.sort_by(|p, q| p.terms.iter().map(|t| &t.exps).cmp(q.terms.iter().map(|t| &t.exps)).reverse());
    Ok(out)
}

fn check_same_grassmannian(p: &PPolynomial, field: &MatchingField) -> Result<()> {
    if p.k != field.k() || p.n != field.n() {
        return Err(Error::invalid(format!(
            "polynomial on Gr({},{}) but field on Gr({},{})",
            p.k,
            p.n,
            field.k(),
            field.n()
        )));
    }
    Ok(())
}

/// Whether a binomial lies in `J_Λ`. The zero polynomial does.
pub fn binomial_in_toric(b: &PPolynomial, field: &MatchingField) -> Result<bool> {
    check_same_grassmannian(b, field)?;
    match b.terms.len() {
        0 => Ok(true),
        1 => Ok(false),
        2 => {
            let a = exponent_matrix(field);
            let (s, t) = (&b.terms[0], &b.terms[1]);
            let (vs, vt) = (s.vars(), t.vars());
            if a.image(&vs) != a.image(&vt) {
                return Ok(false);
            }
            let lhs = &s.coeff * Rat::from_integer(a.sign(&vs).into()) + &t.coeff * Rat::from_integer(a.sign(&vt).into());
            Ok(lhs.is_zero())
        }
        m => Err(Error::NotBinomial(m)),
    }
}

/// Whether a homogeneous polynomial maps to zero under the signed
/// monomial map, which for degree 2 is membership in `J_Λ`.
pub fn in_toric_kernel(p: &PPolynomial, field: &MatchingField) -> Result<bool> {
    check_same_grassmannian(p, field)?;
    let a = exponent_matrix(field);
    let mut sums: HashMap<Vec<usize>, Rat> = HashMap::new();
    for t in &p.terms {
        let v = t.vars();
        *sums.entry(a.image(&v)).or_insert_with(Rat::zero) += &t.coeff * Rat::from_integer(a.sign(&v).into());
    }
    Ok(sums.values().all(|s| s.is_zero()))
}

/// Dimension of the degree-2 part of `J_Λ`.
pub fn toric_deg2_dimension(field: &MatchingField) -> usize {
    let a = exponent_matrix(field);
    let nv = a.columns.len();
    let mut fibers: HashMap<Vec<usize>, usize> = HashMap::new();
    for i in 0..nv {
        for j in i..nv {
            *fibers.entry(a.image(&[i, j])).or_default() += 1;
        }
    }
    fibers.values().map(|c| c - 1).sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialFormCheck {
    pub relation: PPolynomial,
    pub initial: PPolynomial,
    pub binomial: bool,
    pub in_toric_ideal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub weights: PlueckerWeightVector,
    pub checks: Vec<InitialFormCheck>,
    pub all_binomial: bool,
    pub all_in_toric_ideal: bool,
    /// Dimensions of the degree-2 parts of `in_w(G)` and `J_Λ`.
    pub initial_dimension: usize,
    pub toric_dimension: usize,
    pub failures: Vec<String>,
}

fn check_induces(field: &MatchingField, m: &WeightMatrix) -> Result<()> {
    let induced = induced_matching_field(m, field.k(), field.n())
        .map_err(|e| Error::Precondition(format!("weight matrix does not induce a field: {e}")))?;
    if &induced != field {
        return Err(Error::Precondition("weight matrix induces a different matching field".into()));
    }
    Ok(())
}

/// Checks `in_{w_M}(G_{k,n}) ⊆ J_Λ` in degree 2.
pub fn inclusion_check(field: &MatchingField, m: &WeightMatrix) -> Result<InclusionReport> {
    check_induces(field, m)?;
    let (k, n) = (field.k(), field.n());
    let w = induced_weight_vector(m, k, n)?;
    let relations = pluecker_deg2_adapted(k, n, &w)?;
    let checks: Vec<InitialFormCheck> = relations
        .into_par_iter()
        .map(|g| {
            let initial = initial_form(&g, &w);
            let in_j = in_toric_kernel(&initial, field)?;
            Ok(InitialFormCheck { binomial: initial.is_binomial(), in_toric_ideal: in_j, relation: g, initial })
        })
        .collect::<Result<_>>()?;
    let mut failures = Vec::new();
    for c in &checks {
        if !c.binomial {
            failures.push(format!("initial form {} is not a binomial", c.initial));
        }
        if !c.in_toric_ideal {
            failures.push(format!("initial form {} is not in the toric ideal", c.initial));
        }
    }
    let toric_dimension = toric_deg2_dimension(field);
    Ok(InclusionReport {
        all_binomial: checks.iter().all(|c| c.binomial),
        all_in_toric_ideal: checks.iter().all(|c| c.in_toric_ideal),
        initial_dimension: checks.len(),
        toric_dimension,
        weights: w,
        checks,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenCertificate {
    pub field: String,
    pub volume: u128,
    pub reference_volume: u128,
    pub volume_matches_reference: bool,
    pub all_deg2_initials_binomial: bool,
    #[serde(rename = "all_deg2_initials_in_J")]
    pub all_deg2_initials_in_j: bool,
    pub deg2_dimensions_agree: bool,
    pub verdict: String,
}

impl DegenCertificate {
    pub fn certified(&self) -> bool {
        self.volume_matches_reference && self.all_deg2_initials_binomial && self.all_deg2_initials_in_j
    }
}

/// Short identifier listing the subsets whose permutation is not the
/// identity.
pub fn field_id(field: &MatchingField) -> String {
    let twisted: Vec<String> = field
        .iter()
        .filter(|(_, p)| !p.is_identity())
        .map(|(s, p)| format!("{}:{}", s.label(), p.images().iter().map(|i| i.to_string()).collect::<String>()))
        .collect();
    format!("Gr({},{})[{}]", field.k(), field.n(), twisted.join(" "))
}

/// Volume comparison with the diagonal field plus the degree-2 inclusion.
pub fn degeneration_certificate(field: &MatchingField, m: &WeightMatrix) -> Result<DegenCertificate> {
    let report = inclusion_check(field, m)?;
    let (k, n) = (field.k(), field.n());
    let volume = matching_field_polytope(field).normalized_volume()?;
    let reference = block_diagonal(k, n, 0)?;
    let reference_volume =
        if &reference == field { volume } else { matching_field_polytope(&reference).normalized_volume()? };
    let mut cert = DegenCertificate {
        field: field_id(field),
        volume,
        reference_volume,
        volume_matches_reference: volume == reference_volume,
        all_deg2_initials_binomial: report.all_binomial,
        all_deg2_initials_in_j: report.all_in_toric_ideal,
        deg2_dimensions_agree: report.initial_dimension == report.toric_dimension,
        verdict: String::new(),
    };
    cert.verdict = if cert.certified() {
        "certified (desk scale)".into()
    } else {
        let mut why = Vec::new();
        if !cert.volume_matches_reference {
            why.push(format!("volume {volume} differs from {reference_volume}"));
        }
        why.extend(report.failures);
        format!("not certified: {}", why.join("; "))
    };
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weightmat::m_ell;

    #[test]
    fn exponent_columns() {
        let a = exponent_matrix(&block_diagonal(3, 5, 1).unwrap());
        // P_125 is the third column
        assert_eq!(a.columns[2], vec![1, 5, 14]);
        assert_eq!(a.signs[2], -1);
        assert!(exponent_matrix(&block_diagonal(3, 5, 0).unwrap()).signs.iter().all(|&s| s == 1));
        let d = a.dense();
        assert!((0..10).all(|c| d.iter().map(|r| r[c] as usize).sum::<usize>() == 3));
    }

    #[test]
    fn parse_and_display() {
        let p = PPolynomial::parse(3, 5, "P145 P235 - P135*P245 + P125 P345").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.to_string(), "P125*P345 - P135*P245 + P145*P235");
        let z = PPolynomial::parse(3, 5, "P123 P145 - P145 P123").unwrap();
        assert!(z.is_empty());
        assert!(PPolynomial::parse(3, 5, "P126").is_err());
        let big = PPolynomial::parse(3, 10, "2 P{1,2,10}").unwrap();
        assert_eq!(big.to_string(), "2 P{1,2,10}");
    }

    #[test]
    fn small_relations() {
        assert!(pluecker_deg2(2, 3).unwrap().is_empty());
        let r = pluecker_deg2(2, 4).unwrap();
        assert_eq!(r.len(), 1);
        let want = PPolynomial::parse(2, 4, "P13 P24 - P12 P34 - P14 P23").unwrap();
        assert!(r[0] == want || r[0] == want.neg());
        assert_eq!(pluecker_deg2(3, 5).unwrap().len(), 5);
        assert!(matches!(pluecker_deg2(5, 9), Err(Error::ScaleLimit(_))));
    }

    #[test]
    fn initial_forms() {
        let g = PPolynomial::parse(3, 5, "P145 P235 - P135 P245 + P125 P345").unwrap();
        let w = induced_weight_vector(&m_ell(3, 5, 1).unwrap(), 3, 5).unwrap();
        let want = PPolynomial::parse(3, 5, "- P135 P245 + P125 P345").unwrap();
        assert_eq!(initial_form(&g, &w), want);
        assert_eq!(initial_form(&g, &PlueckerWeightVector(vec![4; 10])), g);
    }

    #[test]
    fn toric_membership() {
        let b1 = block_diagonal(3, 5, 1).unwrap();
        let yes = PPolynomial::parse(3, 5, "P125 P134 - P124 P135").unwrap();
        let no = PPolynomial::parse(3, 5, "P123 P145 - P124 P135").unwrap();
        assert!(binomial_in_toric(&yes, &b1).unwrap());
        assert!(!binomial_in_toric(&no, &b1).unwrap());
        let three = PPolynomial::parse(3, 5, "P123 P145 - P124 P135 + P125 P134").unwrap();
        assert_eq!(binomial_in_toric(&three, &b1), Err(Error::NotBinomial(3)));
        assert_eq!(toric_generators_deg2(&b1).unwrap().len(), 5);
        assert_eq!(toric_deg2_dimension(&b1), 5);
    }

    #[test]
    fn json_keys() {
        let p = PPolynomial::parse(3, 5, "P125 P345 - P135 P245").unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"k":3,"n":5,"terms":[{"coeff":"1/1","exps":{"125":1,"345":1}},{"coeff":"-1/1","exps":{"135":1,"245":1}}]}"#
        );
        assert_eq!(serde_json::from_str::<PPolynomial>(&s).unwrap(), p);
    }

    #[test]
    fn certificate_b1() {
        let c = degeneration_certificate(&block_diagonal(3, 5, 1).unwrap(), &m_ell(3, 5, 1).unwrap()).unwrap();
        assert!(c.certified(), "{c:?}");
        assert_eq!((c.volume, c.reference_volume), (5, 5));
        assert!(c.deg2_dimensions_agree);
        let wrong = degeneration_certificate(&block_diagonal(3, 5, 0).unwrap(), &m_ell(3, 5, 1).unwrap());
        assert!(matches!(wrong, Err(Error::Precondition(_))));
    }
}
