//! Exact two-phase simplex over the rationals with Bland's rule.

use num_traits::{One, Signed, Zero};

use super::Rat;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Rat, x: Vec<Rat> },
}

struct Tableau {
    // rows of [A | b]; the objective row is kept separately
    rows: Vec<Vec<Rat>>,
    obj: Vec<Rat>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rat {
        &self.rows[r][self.ncols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = Rat::one() / &self.rows[pr][pc];
        for v in self.rows[pr].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let prow = self.rows[pr].clone();
        let nz: Vec<usize> = (0..=self.ncols).filter(|&j| !prow[j].is_zero()).collect();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr || row[pc].is_zero() {
                continue;
            }
            let f = row[pc].clone();
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        }
        if !self.obj[pc].is_zero() {
            let f = self.obj[pc].clone();
            for &j in &nz {
                self.obj[j] -= &f * &prow[j];
            }
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland's rule on columns `< limit`. Returns false if unbounded.
    fn optimize(&mut self, limit: usize) -> bool {
        loop {
            let Some(enter) = (0..limit).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((leave, _)) = best else {
                return false;
            };
            self.pivot(leave, enter);
        }
    }
}

/// Minimises `c·x` subject to `A x = b`, `x ≥ 0`.
pub fn solve(a: &[Vec<Rat>], b: &[Rat], c: &[Rat]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    debug_assert!(a.iter().all(|r| r.len() == n) && b.len() == m);
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (ar, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut row: Vec<Rat> = ar.iter().map(|v| if flip { -v } else { v.clone() }).collect();
        row.extend((0..m).map(|j| if j == i { Rat::one() } else { Rat::zero() }));
        row.push(if flip { -bi } else { bi.clone() });
        rows.push(row);
    }
    // phase one objective: sum of artificials, expressed in non-basic terms
    let mut obj = vec![Rat::zero(); ncols + 1];
    for row in &rows {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[ncols] -= &row[ncols];
    }
    let mut t = Tableau { rows, obj, basis: (n..n + m).collect(), ncols };
    t.optimize(n);
    if !t.obj[ncols].is_zero() {
        return LpOutcome::Infeasible;
    }
    // drive remaining artificials out of the basis; drop redundant rows
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
            } else {
                t.rows.remove(r);
                t.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }
    let mut obj = vec![Rat::zero(); ncols + 1];
    obj[..n].clone_from_slice(c);
    for (r, &bv) in t.basis.iter().enumerate() {
        if !obj[bv].is_zero() {
            let f = obj[bv].clone();
            for j in 0..=ncols {
                if !t.rows[r][j].is_zero() {
                    obj[j] -= &f * &t.rows[r][j];
                }
            }
        }
    }
    t.obj = obj;
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rat::zero(); n];
    for (r, &bv) in t.basis.iter().enumerate() {
        x[bv] = t.rhs(r).clone();
    }
    LpOutcome::Optimal { value: -t.obj[ncols].clone(), x }
}

/// Whether `A x = b`, `x ≥ 0` has a solution.
pub fn feasible(a: &[Vec<Rat>], b: &[Rat]) -> bool {
    let n = a.first().map_or(0, |r| r.len());
    !matches!(solve(a, b, &vec![Rat::zero(); n]), LpOutcome::Infeasible)
}
