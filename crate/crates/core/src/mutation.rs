//! Projections, shears and tropical maps linking block diagonal matching
//! field polytopes, assembled into plans that can be executed and checked.
//!
//! Everything is set up for `Gr(3, n')` and lifted to `Gr(k, n)` with
//! `n' = n − k + 3`: the first three rows reuse the `k = 3` data and every
//! further row `i` is carried along by the shift `(R_i)_j = f_{i, j−i+1}`.
//! The target space `V = R^{k × (n−k)}` is flattened row-major.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{block_diagonal, intermediate, MatchingField, Tableau};
use crate::error::{Error, Result};
use crate::polytope::{self, is_edge, lattice, matching_field_vertices, Point, Rat};

/// The projections `R^{k×n} → V`, named by the `k = 3` display they lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProjKind {
    /// `Π₀`, for the diagonal field.
    Pi0,
    /// `Π₀²`, shared by every `B₀^λ`.
    Pi0Sq,
    /// `Π₁` as it ends the chain from `B₀`.
    Pi1End,
    /// `Π₁` as it starts the chain to `B₂`.
    Pi1Start,
    /// `Π₁³`, shared by every `B₁^λ`.
    Pi1Cube,
    /// `Π_m` for `B_m`, `m ≥ 2`.
    Block(usize),
    /// `Π_{ℓ−1}^{ℓ+1}`, shared by every `B_{ℓ−1}^λ`, `ℓ ≥ 3`.
    Mid(usize),
}

impl fmt::Display for ProjKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjKind::Pi0 => write!(f, "Pi_0"),
            ProjKind::Pi0Sq => write!(f, "Pi_0^2"),
            ProjKind::Pi1End => write!(f, "Pi_1[end]"),
            ProjKind::Pi1Start => write!(f, "Pi_1[start]"),
            ProjKind::Pi1Cube => write!(f, "Pi_1^3"),
            ProjKind::Block(m) => write!(f, "Pi_{m}"),
            ProjKind::Mid(l) => write!(f, "Pi_{}^{}", l - 1, l + 1),
        }
    }
}

// Where entry (row, col) of a Gr(3, n') matrix lands in V, as (row, j).
fn target3(kind: ProjKind, np: usize, row: usize, col: usize) -> Option<(usize, usize)> {
    let inr = |lo: usize, hi: usize| lo <= col && col <= hi;
    if row == 3 {
        return inr(3, np - 1).then(|| (3, col - 2));
    }
    let (r1, r2): (Option<usize>, Option<usize>) = match kind {
        ProjKind::Pi0 | ProjKind::Pi0Sq | ProjKind::Pi1End => {
            let r1 = match kind {
                ProjKind::Pi0 => inr(2, np - 2).then(|| col - 1),
                ProjKind::Pi0Sq if col == 1 => Some(1),
                ProjKind::Pi0Sq => inr(3, np - 2).then(|| col - 1),
                _ if col == np - 1 => Some(1),
                _ => inr(3, np - 2).then(|| col - 1),
            };
            (r1, inr(3, np - 1).then(|| col - 2))
        }
        ProjKind::Pi1Start | ProjKind::Pi1Cube => {
            let r1 = inr(3, np - 1).then(|| col - 2);
            let r2 = match kind {
                ProjKind::Pi1Start => inr(3, np - 1).then(|| col - 2),
                _ if col == 2 => Some(1),
                _ => inr(4, np - 1).then(|| col - 2),
            };
            (r1, r2)
        }
        ProjKind::Block(m) => {
            let l = m + 1;
            let r1 = if inr(2, l - 2) {
                Some(col - 1)
            } else {
                inr(l, np - 1).then(|| col - 2)
            };
            let r2 = if col == 1 {
                Some(1)
            } else if inr(3, l - 1) {
                Some(col - 1)
            } else {
                inr(l + 1, np - 1).then(|| col - 2)
            };
            (r1, r2)
        }
        ProjKind::Mid(l) => {
            let r1 = if inr(2, l - 2) {
                Some(col - 1)
            } else {
                inr(l, np - 1).then(|| col - 2)
            };
            let r2 = if col == 1 {
                Some(1)
            } else if inr(3, l - 1) {
                Some(col - 1)
            } else if col == l {
                Some(l - 1)
            } else {
                inr(l + 2, np - 1).then(|| col - 2)
            };
            (r1, r2)
        }
    };
    match row {
        1 => r1.map(|j| (1, j)),
        _ => r2.map(|j| (2, j)),
    }
}

/// An integer matrix acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearMap {
    pub kind: String,
    pub matrix: Vec<Vec<i64>>,
}

impl LinearMap {
    pub fn identity(kind: impl Into<String>, d: usize) -> Self {
        let matrix = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
        LinearMap { kind: kind.into(), matrix }
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix.first().map_or(0, |r| r.len())
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        self.matrix.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn determinant(&self) -> Option<BigInt> {
        if self.rows() != self.cols() {
            return None;
        }
        let m: Vec<Vec<BigInt>> = self.matrix.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect();
        Some(lattice::det(&m))
    }

    /// Identity plus nonzero off-diagonal entries confined to one column.
    pub fn is_single_column_unipotent(&self) -> bool {
        let d = self.rows();
        if d != self.cols() {
            return false;
        }
        let mut cols = HashSet::new();
        for i in 0..d {
            for j in 0..d {
                let want = i64::from(i == j);
                if i == j && self.matrix[i][j] != 1 {
                    return false;
                }
                if i != j && self.matrix[i][j] != want {
                    cols.insert(j);
                }
            }
        }
        cols.len() <= 1
    }

    /// Identity with at most one further nonzero entry.
    pub fn is_transvection(&self) -> bool {
        self.is_single_column_unipotent()
            && self
                .matrix
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().filter(move |(j, &x)| *j != i && x != 0))
                .count()
                <= 1
    }

    /// Exact inverse; fails unless the map is unimodular.
    pub fn inverse(&self) -> Result<LinearMap> {
        let d = self.rows();
        if d != self.cols() {
            return Err(Error::invalid("only square maps can be inverted"));
        }
        let mut a: Vec<Vec<Rat>> = self
            .matrix
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row: Vec<Rat> = r.iter().map(|&x| Rat::from_integer(x.into())).collect();
                row.extend((0..d).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
                row
            })
            .collect();
        for c in 0..d {
            let p = (c..d).find(|&r| !a[r][c].is_zero()).ok_or_else(|| Error::invalid("singular map"))?;
            a.swap(c, p);
            let inv = Rat::one() / &a[c][c];
            for v in a[c].iter_mut() {
                *v *= &inv;
            }
            let prow = a[c].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != c && !row[c].is_zero() {
                    let f = row[c].clone();
                    for (v, pv) in row.iter_mut().zip(&prow) {
                        *v -= &f * pv;
                    }
                }
            }
        }
        let mut matrix = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in 0..d {
                let v = &a[i][d + j];
                if !v.is_integer() {
                    return Err(Error::invalid("inverse is not integral"));
                }
                matrix[i][j] = v.to_integer().to_i64().ok_or(Error::Overflow)?;
            }
        }
        Ok(LinearMap { kind: format!("{}^-1", self.kind), matrix })
    }
}

fn check_kn(k: usize, n: usize) -> Result<usize> {
    if k < 3 {
        return Err(Error::invalid(format!("mutation chains need k ≥ 3, got {k}")));
    }
    if n < k + 1 {
        return Err(Error::invalid(format!("mutation chains need n ≥ k + 1, got k = {k}, n = {n}")));
    }
    Ok(n - k + 3)
}

fn check_kind(kind: ProjKind, np: usize) -> Result<()> {
    let ok = match kind {
        ProjKind::Block(m) => (2..=np - 2).contains(&m),
        ProjKind::Mid(l) => (3..=np - 2).contains(&l),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("projection {kind} is not defined for n' = {np}")))
    }
}

/// Dimension of `V = R^{k × (n−k)}`.
pub fn target_dim(k: usize, n: usize) -> usize {
    k * (n - k)
}

// flat index of f_{i,j} in V
fn fidx(n: usize, k: usize, i: usize, j: usize) -> usize {
    (i - 1) * (n - k) + (j - 1)
}

/// The projection matrix of `kind` for `Gr(k, n)`.
pub fn projection(kind: ProjKind, k: usize, n: usize) -> Result<LinearMap> {
    let np = check_kn(k, n)?;
    check_kind(kind, np)?;
    let d = target_dim(k, n);
    let mut matrix = vec![vec![0i64; k * n]; d];
    for row in 1..=k {
        for col in 1..=n {
            let t = if row <= 3 {
                if col > np {
                    None
                } else {
                    target3(kind, np, row, col)
                }
            } else {
                let j = col as i64 - row as i64 + 1;
                (1..=(n - k) as i64).contains(&j).then(|| (row, j as usize))
            };
            if let Some((i, j)) = t {
                matrix[fidx(n, k, i, j)][(row - 1) * n + col - 1] = 1;
            }
        }
    }
    Ok(LinearMap { kind: kind.to_string(), matrix })
}

/// A tropical map `u ↦ u − min(0, ⟨f̃, u⟩)·w` with `F = conv{0, f̃}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TropicalData {
    pub w: Vec<i64>,
    pub f_tilde: Vec<i64>,
}

impl TropicalData {
    pub fn pairing(&self, u: &[i64]) -> i64 {
        self.f_tilde.iter().zip(u).map(|(a, b)| a * b).sum()
    }

    pub fn is_orthogonal(&self) -> bool {
        self.pairing(&self.w) == 0
    }

    pub fn is_primitive(&self) -> bool {
        self.w.iter().fold(0i64, |g, &x| num_integer::gcd(g, x)) == 1
    }

    /// The inverse tropical map.
    pub fn inverse(&self) -> TropicalData {
        TropicalData { w: self.w.iter().map(|x| -x).collect(), f_tilde: self.f_tilde.clone() }
    }
}

pub fn apply_tropical(td: &TropicalData, u: &[i64]) -> Result<Vec<i64>> {
    if u.len() != td.w.len() {
        return Err(Error::DimensionMismatch { expected: td.w.len(), got: u.len() });
    }
    let umin = td.pairing(u).min(0);
    Ok(u.iter().zip(&td.w).map(|(x, w)| x - umin * w).collect())
}

/// The second tropical index: below `n'` it is `λ` itself, above it is
/// `λ' = λ − n'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lambda {
    Low(usize),
    High(usize),
}

impl Lambda {
    fn value(self) -> usize {
        match self {
            Lambda::Low(x) | Lambda::High(x) => x,
        }
    }
}

// 3×n' matrix with listed entries
fn sparse3(np: usize, entries: &[(usize, usize, i64)]) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; np]; 3];
    for &(r, c, v) in entries {
        m[r - 1][c - 1] += v;
    }
    m
}

fn push3(kind: ProjKind, k: usize, n: usize, m: &[Vec<i64>]) -> Vec<i64> {
    let np = n - k + 3;
    let mut out = vec![0i64; target_dim(k, n)];
    for (r, row) in m.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v != 0 {
                if let Some((i, j)) = target3(kind, np, r + 1, c + 1) {
                    out[fidx(n, k, i, j)] += v;
                }
            }
        }
    }
    out
}

/// The governing projection of the tropical maps of the step `ℓ − 1 → ℓ`.
pub fn governing_projection(ell: usize) -> ProjKind {
    match ell {
        1 => ProjKind::Pi0Sq,
        2 => ProjKind::Pi1Cube,
        l => ProjKind::Mid(l),
    }
}

/// `(w, f̃)` of the tropical map `φ_{(ℓ,λ)}` on `Gr(k, n)`, pushed through
/// its governing projection and zero on rows past the third.
pub fn tropical_data(ell: usize, lambda: Lambda, k: usize, n: usize) -> Result<TropicalData> {
    let np = check_kn(k, n)?;
    let bad = || Error::invalid(format!("no tropical map ({ell}, {lambda:?}) for n' = {np}"));
    let (w, f) = match (ell, lambda) {
        (1, Lambda::Low(lam)) if (3..=np - 2).contains(&lam) => {
            let w = sparse3(np, &[(1, 1, -1), (1, lam, 1), (2, 1, 1), (2, lam, -1)]);
            let mut e = vec![(1, 1, -1)];
            e.extend((lam..=np).map(|c| (1, c, -1)));
            e.extend((lam + 1..=np).map(|c| (2, c, 1)));
            (w, sparse3(np, &e))
        }
        (l, Lambda::Low(lam)) if l >= 2 && l <= np - 2 && lam >= l + 2 && lam < np => {
            let w = sparse3(np, &[(1, l, -1), (1, lam, 1), (2, l, 1), (2, lam, -1)]);
            let mut e: Vec<(usize, usize, i64)> = (l + 1..lam).map(|c| (1, c, 1)).collect();
            e.extend((l..=lam).map(|c| (2, c, -1)));
            (w, sparse3(np, &e))
        }
        (l, Lambda::High(lp)) if l >= 3 && l <= np - 2 && lp >= 1 && lp + 2 <= l => {
            let w = sparse3(np, &[(1, lp, 1), (1, l, -1), (2, lp, -1), (2, l, 1)]);
            let e: Vec<(usize, usize, i64)> = if lp == 1 {
                let mut e = vec![(2, 1, -1)];
                e.extend((l..=np).map(|c| (2, c, -1)));
                e.extend((l + 1..=np).map(|c| (1, c, 1)));
                e
            } else {
                let mut e: Vec<(usize, usize, i64)> = (lp..=l).map(|c| (1, c, -1)).collect();
                e.extend((lp + 1..l).map(|c| (2, c, 1)));
                e
            };
            (w, sparse3(np, &e))
        }
        _ => return Err(bad()),
    };
    let kind = governing_projection(ell);
    Ok(TropicalData { w: push3(kind, k, n, &w), f_tilde: push3(kind, k, n, &f) })
}

/// The shear `φ_{(a,b)}` on `V`, identity outside the first three rows.
pub fn shear(a: usize, b: usize, k: usize, n: usize) -> Result<LinearMap> {
    let np = check_kn(k, n)?;
    let d = target_dim(k, n);
    let f = |i, j| fidx(n, k, i, j);
    // (column, image vector entries besides the diagonal)
    let (col, extra): (usize, Vec<(usize, i64)>) = match (a, b) {
        (1, b) if b == np - 1 => (f(1, 1), vec![(f(2, np - 3), -1)]),
        (2, 3) => (f(2, 1), vec![(f(1, 1), 1)]),
        (l, b) if l >= 3 && b == l + 1 && l <= np - 2 => {
            (f(2, l - 1), vec![(f(1, l - 1), 1), (f(1, l - 2), -1)])
        }
        // at ℓ = 3 the source vertex carries no f_{2,1}
        (3, 2) if np >= 5 => (f(1, 1), vec![(f(2, 2), 1)]),
        (l, b) if l >= 4 && b + 1 == l && l <= np - 2 => {
            (f(1, l - 2), vec![(f(2, l - 2), -1), (f(2, l - 1), 1)])
        }
        _ => return Err(Error::invalid(format!("no shear φ({a},{b}) for n' = {np}"))),
    };
    let mut m = LinearMap::identity(format!("phi_({a},{b})"), d);
    for (row, v) in extra {
        m.matrix[row][col] += v;
    }
    Ok(m)
}

/// A matching field named by its `Gr(3, n')` parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldSpec {
    Block(usize),
    Intermediate(usize, usize),
}

impl FieldSpec {
    /// The field on `Gr(k, n)` whose first three rows restrict to this one.
    pub fn materialize(self, k: usize, n: usize) -> Result<MatchingField> {
        let np = n - k + 3;
        match self {
            FieldSpec::Block(l) => block_diagonal(k, n, l),
            FieldSpec::Intermediate(l, lam) => intermediate(k, n, l, if lam < np { lam } else { lam + k - 3 }),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Block(l) => write!(f, "B_{l}"),
            FieldSpec::Intermediate(l, lam) => write!(f, "B_{l}^{lam}"),
        }
    }
}

/// A matching field together with the projection it is viewed through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub field: FieldSpec,
    pub projection: ProjKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepVariant {
    Relabel(LinearMap),
    Shear(LinearMap),
    Tropical {
        data: TropicalData,
        ell: usize,
        lambda: Lambda,
        reversed: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationStep {
    pub label: String,
    pub variant: StepVariant,
    pub source: Stage,
    pub target: Stage,
}

impl MutationStep {
    pub fn kind(&self) -> &'static str {
        match self.variant {
            StepVariant::Relabel(_) => "relabel",
            StepVariant::Shear(_) => "shear",
            StepVariant::Tropical { .. } => "tropical",
        }
    }

    pub fn apply(&self, u: &[i64]) -> Vec<i64> {
        match &self.variant {
            StepVariant::Relabel(m) | StepVariant::Shear(m) => m.apply(u),
            StepVariant::Tropical { data, .. } => apply_tropical(data, u).expect("dimensions agree"),
        }
    }

    /// The matching field the image must match, on `Gr(k, n)`.
    pub fn expected_target(&self, k: usize, n: usize) -> Result<MatchingField> {
        self.target.field.materialize(k, n)
    }

    fn inverse(&self) -> Result<MutationStep> {
        let variant = match &self.variant {
            StepVariant::Relabel(m) => StepVariant::Relabel(m.inverse()?),
            StepVariant::Shear(m) => StepVariant::Shear(m.inverse()?),
            StepVariant::Tropical { data, ell, lambda, reversed } => StepVariant::Tropical {
                data: data.inverse(),
                ell: *ell,
                lambda: *lambda,
                reversed: !reversed,
            },
        };
        Ok(MutationStep { label: format!("{}^-1", self.label), variant, source: self.target, target: self.source })
    }
}

/// A sequence of steps on `Gr(k, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub k: usize,
    pub n: usize,
    pub steps: Vec<MutationStep>,
}

impl Plan {
    pub fn source(&self) -> Option<Stage> {
        self.steps.first().map(|s| s.source)
    }

    pub fn target(&self) -> Option<Stage> {
        self.steps.last().map(|s| s.target)
    }
}

fn stage(field: FieldSpec, projection: ProjKind) -> Stage {
    Stage { field, projection }
}

fn identity_relabel(label: String, src: Stage, tgt: Stage, d: usize) -> MutationStep {
    let map = LinearMap::identity(label.clone(), d);
    MutationStep { label, variant: StepVariant::Relabel(map), source: src, target: tgt }
}

fn tropical_step(ell: usize, lambda: Lambda, src: Stage, tgt: Stage, k: usize, n: usize) -> Result<MutationStep> {
    let data = tropical_data(ell, lambda, k, n)?;
    let label = match lambda {
        Lambda::Low(l) => format!("phi_({ell},{l})"),
        Lambda::High(l) => format!("phi_({ell},{l}')"),
    };
    Ok(MutationStep { label, variant: StepVariant::Tropical { data, ell, lambda, reversed: false }, source: src, target: tgt })
}

fn shear_step(a: usize, b: usize, src: Stage, tgt: Stage, k: usize, n: usize) -> Result<MutationStep> {
    let map = shear(a, b, k, n)?;
    Ok(MutationStep { label: map.kind.clone(), variant: StepVariant::Shear(map), source: src, target: tgt })
}

/// The steps from `B_{ℓ−1}` to `B_ℓ`.
fn single_plan(k: usize, n: usize, ell: usize) -> Result<Vec<MutationStep>> {
    let np = n - k + 3;
    let d = target_dim(k, n);
    use FieldSpec::{Block, Intermediate as Int};
    let mut steps = Vec::new();
    match ell {
        1 => {
            let p = ProjKind::Pi0Sq;
            steps.push(identity_relabel(
                "phi_(1,2)".into(),
                stage(Block(0), ProjKind::Pi0),
                stage(Int(0, 2), p),
                d,
            ));
            for lam in 3..=np - 2 {
                steps.push(tropical_step(1, Lambda::Low(lam), stage(Int(0, lam - 1), p), stage(Int(0, lam), p), k, n)?);
            }
            steps.push(shear_step(1, np - 1, stage(Int(0, np - 2), p), stage(Block(1), ProjKind::Pi1End), k, n)?);
        }
        2 => {
            let p = ProjKind::Pi1Cube;
            steps.push(shear_step(2, 3, stage(Block(1), ProjKind::Pi1Start), stage(Int(1, 3), p), k, n)?);
            for lam in 4..np {
                steps.push(tropical_step(2, Lambda::Low(lam), stage(Int(1, lam - 1), p), stage(Int(1, lam), p), k, n)?);
            }
            steps.push(identity_relabel(
                format!("phi_(2,{np})"),
                stage(Int(1, np - 1), p),
                stage(Block(2), ProjKind::Block(2)),
                d,
            ));
        }
        l => {
            let p = ProjKind::Mid(l);
            let m = l - 1;
            steps.push(shear_step(l, l + 1, stage(Block(m), ProjKind::Block(m)), stage(Int(m, l + 1), p), k, n)?);
            let mut prev = l + 1;
            for lam in l + 2..np {
                steps.push(tropical_step(l, Lambda::Low(lam), stage(Int(m, prev), p), stage(Int(m, lam), p), k, n)?);
                prev = lam;
            }
            for lp in 1..=l - 2 {
                let lam = np + lp;
                steps.push(tropical_step(l, Lambda::High(lp), stage(Int(m, prev), p), stage(Int(m, lam), p), k, n)?);
                prev = lam;
            }
            steps.push(shear_step(l, l - 1, stage(Int(m, prev), p), stage(Block(l), ProjKind::Block(l)), k, n)?);
        }
    }
    Ok(steps)
}

// The basis relabelling taking one projection of a field to another.
fn joining_relabel(k: usize, n: usize, field: FieldSpec, from: ProjKind, to: ProjKind) -> Result<MutationStep> {
    let a = projection(from, k, n)?;
    let b = projection(to, k, n)?;
    let d = a.rows();
    let mut matrix = vec![vec![0i64; d]; d];
    let mut assigned: HashMap<usize, usize> = HashMap::new();
    for col in 0..a.cols() {
        let src = (0..d).find(|&r| a.matrix[r][col] != 0);
        let dst = (0..d).find(|&r| b.matrix[r][col] != 0);
        if let (Some(s), Some(t)) = (src, dst) {
            if *assigned.entry(s).or_insert(t) != t {
                return Err(Error::invalid(format!("{from} and {to} are not related by a relabelling")));
            }
            matrix[t][s] = 1;
        }
    }
    let map = LinearMap { kind: format!("{from} -> {to}"), matrix };
    if map.determinant().map_or(true, |x| x.abs() != BigInt::one()) {
        return Err(Error::invalid(format!("{from} and {to} are not related by a relabelling")));
    }
    Ok(MutationStep {
        label: map.kind.clone(),
        variant: StepVariant::Relabel(map),
        source: stage(field, from),
        target: stage(field, to),
    })
}

/// The mutation plan from `B_{from}` to `B_{to}` on `Gr(k, n)`.
pub fn plan(k: usize, n: usize, from: usize, to: usize) -> Result<Plan> {
    check_kn(k, n)?;
    let top = n + 1 - k;
    if from > top || to > top {
        return Err(Error::invalid(format!("block indices must lie in 0..={top}, got {from} → {to}")));
    }
    if from > to {
        let fwd = plan(k, n, to, from)?;
        let steps = fwd.steps.iter().rev().map(MutationStep::inverse).collect::<Result<_>>()?;
        return Ok(Plan { k, n, steps });
    }
    let mut steps: Vec<MutationStep> = Vec::new();
    for ell in from + 1..=to {
        let next = single_plan(k, n, ell)?;
        if let (Some(last), Some(first)) = (steps.last(), next.first()) {
            if last.target.projection != first.source.projection {
                steps.push(joining_relabel(k, n, last.target.field, last.target.projection, first.source.projection)?);
            }
        }
        steps.extend(next);
    }
    Ok(Plan { k, n, steps })
}

/// Tally of the pairings `⟨u, f̃⟩` over the vertices of a tropical step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTally {
    pub minus: usize,
    pub zero: usize,
    pub plus: usize,
    pub other: usize,
}

/// Whether the tableau prefix `(i, j)` lies in the set `A_{(ℓ,λ)}`.
pub fn in_a_set(ell: usize, lambda: usize, i: usize, j: usize) -> bool {
    let (l, m) = (ell, lambda);
    (l < i && i < m && m < j) || (j < l && l < i && i < m) || (i < m && m < j && j < l) || (m < j && j < l && l < i)
}

/// The pairing predicted for a vertex with tableau prefix `(i, j)`.
pub fn predicted_class(ell: usize, lambda: usize, reversed: bool, i: usize, j: usize) -> i64 {
    let minus = if reversed { (lambda, ell) } else { (ell, lambda) };
    if (i, j) == minus {
        -1
    } else if in_a_set(ell, lambda, i, j) {
        1
    } else {
        0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub label: String,
    pub kind: String,
    pub source: String,
    pub target: String,
    pub vertex_set_match: bool,
    pub vertices_before: usize,
    pub vertices_after: usize,
    pub volume_before: u128,
    pub volume_after: u128,
    /// Volumes of the images of the two halves `⟨·, f̃⟩ ≥ 0` and `≤ 0`.
    pub volume_plus: Option<u128>,
    pub volume_minus: Option<u128>,
    pub convexity_certified: bool,
    pub inner_product_classes: ClassTally,
    pub classes_match: bool,
    pub class_crossing_pairs: usize,
    pub crossing_edges: usize,
    pub determinant: Option<i64>,
    /// Lattice points of the image at dilations 1 and 2, when cheap enough.
    pub lattice_points: Option<(usize, usize)>,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Record lattice-point counts when the box search stays below this size.
    pub lattice_point_limit: u128,
    pub check_edges: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { lattice_point_limit: 2_000_000, check_edges: true }
    }
}

fn projected_vertices(field: &MatchingField, proj: &LinearMap) -> Vec<Vec<i64>> {
    matching_field_vertices(field).iter().map(|v| proj.apply(v)).collect()
}

fn as_points(pts: &[Vec<i64>]) -> Vec<Point> {
    pts.iter().map(|p| Point::from_ints(p)).collect()
}

fn lattice_counts(pts: &[Vec<i64>], limit: u128) -> Option<(usize, usize)> {
    let p = as_points(pts);
    let one = polytope::lattice_points_bounded(&p, 1, limit).ok()?.len();
    let two = polytope::lattice_points_bounded(&p, 2, limit).ok()?.len();
    Some((one, two))
}

/// Runs a plan from `start`, checking every step. Failed checks are
/// recorded in the reports; structural problems are errors.
pub fn execute(plan: &Plan, start: &MatchingField, opts: &VerifyOptions) -> Result<Vec<StepReport>> {
    let (k, n) = (plan.k, plan.n);
    if start.k() != k || start.n() != n {
        return Err(Error::Precondition(format!("start field is not on Gr({k},{n})")));
    }
    let Some(first) = plan.steps.first() else {
        return Ok(vec![]);
    };
    let d = target_dim(k, n);
    let proj0 = projection(first.source.projection, k, n)?;
    let mut current = projected_vertices(start, &proj0);
    let expected0 = projected_vertices(&first.source.field.materialize(k, n)?, &proj0);
    if set_of(&current) != set_of(&expected0) {
        return Err(Error::Precondition(format!(
            "start field does not match the plan's source {}",
            first.source.field
        )));
    }
    let ambient = polytope::matching_field_polytope(start).normalized_volume()?;
    let mut volume = polytope::full_dim_volume(&current, d)?;
    if ambient != volume {
        return Err(Error::Precondition(format!(
            "projection {} changes the volume: {ambient} vs {volume}",
            first.source.projection
        )));
    }

    let mut reports = Vec::with_capacity(plan.steps.len());
    for (index, step) in plan.steps.iter().enumerate() {
        let mut r = StepReport {
            index,
            label: step.label.clone(),
            kind: step.kind().into(),
            source: format!("{} under {}", step.source.field, step.source.projection),
            target: format!("{} under {}", step.target.field, step.target.projection),
            vertices_before: current.len(),
            volume_before: volume,
            ..StepReport::default()
        };
        let src_field = step.source.field.materialize(k, n)?;
        let src_proj = projection(step.source.projection, k, n)?;
        let tgt_field = step.expected_target(k, n)?;
        let tgt_proj = projection(step.target.projection, k, n)?;

        let image: Vec<Vec<i64>> = current.iter().map(|u| step.apply(u)).collect();
        let expected = projected_vertices(&tgt_field, &tgt_proj);
        r.vertex_set_match = set_of(&image) == set_of(&expected) && set_of(&image).len() == expected.len();
        if !r.vertex_set_match {
            r.failures.push(format!("image differs from {}", r.target));
        }
        let image_pts = as_points(&image);
        r.vertices_after = polytope::vertex_filter(&image_pts)?.len();
        if r.vertices_after != r.vertices_before {
            r.failures.push(format!("vertex count {} → {}", r.vertices_before, r.vertices_after));
        }
        r.volume_after = polytope::full_dim_volume(&image, d)?;
        if r.volume_after != r.volume_before {
            r.failures.push(format!("volume {} → {}", r.volume_before, r.volume_after));
        }

        match &step.variant {
            StepVariant::Relabel(m) | StepVariant::Shear(m) => {
                let det = m.determinant().and_then(|x| x.to_i64());
                r.determinant = det;
                if det.map_or(true, |x| x.abs() != 1) {
                    r.failures.push("map is not unimodular".into());
                }
            }
            StepVariant::Tropical { data, ell, lambda, reversed } => {
                let lam = lambda.value();
                // each current point is the image of one subset of the source field
                let labels: HashMap<Vec<i64>, Tableau> = projected_vertices(&src_field, &src_proj)
                    .into_iter()
                    .zip(src_field.tableaux())
                    .collect();
                let mut minus = Vec::new();
                let mut plus = Vec::new();
                let mut matched = true;
                for (idx, u) in current.iter().enumerate() {
                    let s = data.pairing(u);
                    match s {
                        -1 => r.inner_product_classes.minus += 1,
                        0 => r.inner_product_classes.zero += 1,
                        1 => r.inner_product_classes.plus += 1,
                        _ => r.inner_product_classes.other += 1,
                    }
                    let Some(t) = labels.get(u) else {
                        return Err(Error::StepVerification { step: index, reason: format!("unlabelled vertex {u:?}") });
                    };
                    let predicted = predicted_class(*ell, lam, *reversed, t.rows()[0], t.rows()[1]);
                    if predicted != s {
                        matched = false;
                        r.failures.push(format!("tableau {:?} pairs to {s}, expected {predicted}", t.rows()));
                    }
                    if s < 0 {
                        minus.push(idx);
                    } else if s > 0 {
                        plus.push(idx);
                    }
                }
                r.classes_match = matched && r.inner_product_classes.other == 0;
                if r.inner_product_classes.other > 0 {
                    r.failures.push("pairings outside {-1, 0, 1}".into());
                }
                if opts.check_edges {
                    let verts = as_points(&current);
                    let pairs: Vec<(usize, usize)> =
                        minus.iter().flat_map(|&a| plus.iter().map(move |&b| (a, b))).collect();
                    r.class_crossing_pairs = pairs.len();
                    let edges: Vec<(usize, usize)> = pairs
                        .par_iter()
                        .map(|&(a, b)| is_edge(a, b, &verts).map(|e| e.then_some((a, b))))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .flatten()
                        .collect();
                    r.crossing_edges = edges.len();
                    for (a, b) in edges {
                        r.failures.push(format!("edge {:?} – {:?} crosses f̃⊥", current[a], current[b]));
                    }
                }
                let upper: Vec<Vec<i64>> =
                    current.iter().filter(|u| data.pairing(u) >= 0).map(|u| step.apply(u)).collect();
                let lower: Vec<Vec<i64>> =
                    current.iter().filter(|u| data.pairing(u) <= 0).map(|u| step.apply(u)).collect();
                let vp = polytope::full_dim_volume(&upper, d)?;
                let vm = polytope::full_dim_volume(&lower, d)?;
                r.volume_plus = Some(vp);
                r.volume_minus = Some(vm);
                r.convexity_certified = vp + vm == r.volume_after && r.volume_after == r.volume_before;
                if !r.convexity_certified {
                    r.failures.push(format!("volume split {vp} + {vm} vs {}", r.volume_after));
                }
            }
        }
        if opts.lattice_point_limit > 0 {
            r.lattice_points = lattice_counts(&image, opts.lattice_point_limit);
        }
        r.passed = r.failures.is_empty();
        volume = r.volume_after;
        current = image;
        reports.push(r);
    }
    Ok(reports)
}

/// Runs a plan and fails on the first step that does not verify.
pub fn execute_and_verify(plan: &Plan, start: &MatchingField) -> Result<Vec<StepReport>> {
    let reports = execute(plan, start, &VerifyOptions::default())?;
    if let Some(bad) = reports.iter().find(|r| !r.passed) {
        return Err(Error::StepVerification { step: bad.index, reason: bad.failures.join("; ") });
    }
    Ok(reports)
}

fn set_of(pts: &[Vec<i64>]) -> HashSet<&Vec<i64>> {
    pts.iter().collect()
}

/// One entry of the machine-readable step log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepLog {
    pub kind: String,
    pub label: String,
    pub w: Option<Vec<i64>>,
    pub f_tilde: Option<Vec<i64>>,
    pub matrix: Option<Vec<Vec<i64>>>,
    pub expected_field: String,
    pub projection: String,
    pub report: StepReport,
}

pub fn step_log(plan: &Plan, reports: &[StepReport]) -> Vec<StepLog> {
    plan.steps
        .iter()
        .zip(reports)
        .map(|(s, r)| {
            let (w, f_tilde, matrix) = match &s.variant {
                StepVariant::Tropical { data, .. } => (Some(data.w.clone()), Some(data.f_tilde.clone()), None),
                StepVariant::Relabel(m) | StepVariant::Shear(m) => (None, None, Some(m.matrix.clone())),
            };
            StepLog {
                kind: s.kind().into(),
                label: s.label.clone(),
                w,
                f_tilde,
                matrix,
                expected_field: s.target.field.to_string(),
                projection: s.target.projection.to_string(),
                report: r.clone(),
            }
        })
        .collect()
}
