//! Beneath-beyond placing triangulation of full-dimensional lattice point sets.

use std::collections::HashMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A facet inequality `normal · x ≤ offset` with primitive integer normal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl Facet {
    pub fn slack(&self, p: &[i64]) -> i128 {
        self.offset as i128 - dot64(&self.normal, p)
    }
}

/// Facets and a triangulation of `conv(points)`, all in the same coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hull {
    pub dim: usize,
    /// Distinct input points, sorted lexicographically.
    pub points: Vec<Vec<i64>>,
    pub facets: Vec<Facet>,
    /// Each simplex lists `dim + 1` indices into `points`.
    pub simplices: Vec<Vec<usize>>,
    /// Sum of `|det|` over the simplices.
    pub volume: u128,
}

fn dot64(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

fn dot(a: &[i128], b: &[i64]) -> Result<i128> {
    let mut s: i128 = 0;
    for (&x, &y) in a.iter().zip(b) {
        s = s.checked_add(x.checked_mul(y as i128).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
    }
    Ok(s)
}

fn gcd_all(v: &[i128]) -> i128 {
    v.iter().fold(0i128, |g, &x| g.gcd(&x))
}

/// Rank of a set of integer vectors.
pub fn rank(vectors: &[Vec<i64>]) -> Result<usize> {
    let mut m: Vec<Vec<i128>> = vectors.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect();
    Ok(echelon(&mut m)?.len())
}

// Fraction-free forward elimination; returns pivot columns.
fn echelon(m: &mut [Vec<i128>]) -> Result<Vec<usize>> {
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut pr = 0;
    for c in 0..ncols {
        let Some(p) = (pr..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(pr, p);
        for r in pr + 1..m.len() {
            if m[r][c] == 0 {
                continue;
            }
            let (a, b) = (m[pr][c], m[r][c]);
            let g = a.gcd(&b);
            let (fa, fb) = (a / g, b / g);
            for j in c..ncols {
                m[r][j] = fa
                    .checked_mul(m[r][j])
                    .and_then(|x| x.checked_sub(fb.checked_mul(m[pr][j])?))
                    .ok_or(Error::Overflow)?;
            }
            let g = gcd_all(&m[r]);
            if g > 1 {
                m[r].iter_mut().for_each(|x| *x /= g);
            }
        }
        pivots.push(c);
        pr += 1;
        if pr == m.len() {
            break;
        }
    }
    Ok(pivots)
}

/// Integer normal to the hyperplane through `d` affinely independent points
/// of `Z^d`: the cofactor vector of their difference matrix. Also returns
/// the gcd of the cofactors.
fn cofactor_normal(pts: &[&[i64]]) -> Result<(Vec<i128>, i128)> {
    let d = pts[0].len();
    let q0 = pts[0];
    let mut m: Vec<Vec<i128>> = pts[1..]
        .iter()
        .map(|q| q.iter().zip(q0).map(|(&a, &b)| (a - b) as i128).collect())
        .collect();
    // fraction-free Gauss-Jordan: every pivot ends equal to the same minor
    let rows = m.len();
    let mut piv_cols = Vec::with_capacity(rows);
    let mut prev: i128 = 1;
    let mut c = 0;
    for r in 0..rows {
        let (pr, pc) = loop {
            if c >= d {
                return Err(Error::LowerDimensional { expected: d, got: r });
            }
            if let Some(p) = (r..rows).find(|&i| m[i][c] != 0) {
                break (p, c);
            }
            c += 1;
        };
        m.swap(r, pr);
        let p = m[r][pc];
        for i in 0..rows {
            if i == r {
                continue;
            }
            let a = m[i][pc];
            for j in 0..d {
                if j == pc {
                    continue;
                }
                let v = p
                    .checked_mul(m[i][j])
                    .and_then(|x| x.checked_sub(a.checked_mul(m[r][j])?))
                    .ok_or(Error::Overflow)?;
                m[i][j] = v / prev;
            }
            m[i][pc] = 0;
        }
        prev = p;
        piv_cols.push(pc);
        c += 1;
    }
    let free = (0..d).find(|j| !piv_cols.contains(j)).unwrap();
    let mut normal = vec![0i128; d];
    normal[free] = prev;
    for (r, &pc) in piv_cols.iter().enumerate() {
        normal[pc] = -m[r][free];
    }
    let g = gcd_all(&normal);
    Ok((normal, g))
}

struct BFacet {
    verts: Vec<usize>,
    normal: Vec<i128>,
    offset: i128,
    // |det(F, p)| = scale · (normal·p − offset)
    scale: i128,
    alive: bool,
}

struct Builder<'a> {
    pts: &'a [Vec<i64>],
    dim: usize,
    // (dim + 1) times an interior point
    center: Vec<i64>,
    facets: Vec<BFacet>,
    alive: Vec<usize>,
    ridges: HashMap<Vec<usize>, Vec<usize>>,
}

impl Builder<'_> {
    fn add_facet(&mut self, verts: Vec<usize>) -> Result<()> {
        let refs: Vec<&[i64]> = verts.iter().map(|&v| self.pts[v].as_slice()).collect();
        let (raw, g) = cofactor_normal(&refs)?;
        let mut normal: Vec<i128> = raw.iter().map(|x| x / g).collect();
        let mut offset = dot(&normal, &self.pts[verts[0]])?;
        let d1 = self.dim as i128 + 1;
        if dot(&normal, &self.center)? > offset.checked_mul(d1).ok_or(Error::Overflow)? {
            normal.iter_mut().for_each(|x| *x = -*x);
            offset = -offset;
        }
        let id = self.facets.len();
        for skip in 0..verts.len() {
            let mut ridge = verts.clone();
            ridge.remove(skip);
            self.ridges.entry(ridge).or_default().push(id);
        }
        self.facets.push(BFacet { verts, normal, offset, scale: g, alive: true });
        self.alive.push(id);
        Ok(())
    }

    fn kill(&mut self, id: usize) {
        self.facets[id].alive = false;
        let verts = self.facets[id].verts.clone();
        for skip in 0..verts.len() {
            let mut ridge = verts.clone();
            ridge.remove(skip);
            if let Some(v) = self.ridges.get_mut(&ridge) {
                v.retain(|&f| f != id);
                if v.is_empty() {
                    self.ridges.remove(&ridge);
                }
            }
        }
    }
}

/// Triangulates `conv(points)`; the points must affinely span `Z^dim`.
pub fn hull(points: &[Vec<i64>], dim: usize) -> Result<Hull> {
    let mut pts: Vec<Vec<i64>> = points.to_vec();
    if let Some(p) = pts.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    pts.sort();
    pts.dedup();
    if pts.is_empty() {
        return Err(Error::invalid("no points"));
    }
    match dim {
        0 => return Ok(Hull { dim, points: pts, facets: vec![], simplices: vec![vec![0]], volume: 0 }),
        1 => return Ok(segment_hull(pts)),
        _ => {}
    }

    // initial simplex: greedy in lexicographic order
    let mut simplex = vec![0usize];
    let mut diffs: Vec<Vec<i64>> = Vec::new();
    for (i, p) in pts.iter().enumerate().skip(1) {
        if simplex.len() == dim + 1 {
            break;
        }
        let diff: Vec<i64> = p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect();
        diffs.push(diff);
        if rank(&diffs)? == diffs.len() {
            simplex.push(i);
        } else {
            diffs.pop();
        }
    }
    if simplex.len() < dim + 1 {
        return Err(Error::LowerDimensional { expected: dim, got: simplex.len() - 1 });
    }

    let mut center = vec![0i64; dim];
    for &v in &simplex {
        for (c, x) in center.iter_mut().zip(&pts[v]) {
            *c += x;
        }
    }
    let mut b = Builder { pts: &pts, dim, center, facets: vec![], alive: vec![], ridges: HashMap::new() };
    for skip in 0..=dim {
        let mut verts = simplex.clone();
        verts.remove(skip);
        b.add_facet(verts)?;
    }
    let first_face = &b.facets[0];
    let apex = simplex[0];
    let vol0 = (dot(&first_face.normal, &pts[apex])? - first_face.offset).abs() * first_face.scale;
    let mut volume: u128 = vol0 as u128;
    let mut simplices = vec![simplex.clone()];

    let in_simplex: Vec<bool> = (0..pts.len()).map(|i| simplex.contains(&i)).collect();
    for pi in 0..pts.len() {
        if in_simplex[pi] {
            continue;
        }
        let p = &pts[pi];
        let mut visible = Vec::new();
        let mut heights = Vec::new();
        for &f in &b.alive {
            let face = &b.facets[f];
            let h = dot(&face.normal, p)? - face.offset;
            if h > 0 {
                visible.push(f);
                heights.push(h);
            }
        }
        if visible.is_empty() {
            continue;
        }
        let is_visible = |f: usize, vis: &[usize]| vis.binary_search(&f).is_ok();
        let mut vis_sorted = visible.clone();
        vis_sorted.sort_unstable();
        let mut horizon = Vec::new();
        for (&f, &h) in visible.iter().zip(&heights) {
            let face = &b.facets[f];
            let vol = h.checked_mul(face.scale).ok_or(Error::Overflow)?;
            volume = volume.checked_add(vol as u128).ok_or(Error::Overflow)?;
            let mut s = face.verts.clone();
            s.push(pi);
            simplices.push(s);
            for skip in 0..face.verts.len() {
                let mut ridge = face.verts.clone();
                ridge.remove(skip);
                let across = b.ridges[&ridge].iter().copied().find(|&g| g != f);
                match across {
                    Some(g) if !is_visible(g, &vis_sorted) => horizon.push(ridge),
                    Some(_) => {}
                    None => return Err(Error::invalid("boundary complex is not closed")),
                }
            }
        }
        for &f in &visible {
            b.kill(f);
        }
        b.alive.retain(|&f| b.facets[f].alive);
        for mut ridge in horizon {
            ridge.push(pi);
            ridge.sort_unstable();
            b.add_facet(ridge)?;
        }
    }

    let mut facets: Vec<Facet> = Vec::new();
    for &f in &b.alive {
        let face = &b.facets[f];
        let normal = face.normal.iter().map(|&x| i64::try_from(x).map_err(|_| Error::Overflow)).collect::<Result<_>>()?;
        let offset = i64::try_from(face.offset).map_err(|_| Error::Overflow)?;
        facets.push(Facet { normal, offset });
    }
    facets.sort();
    facets.dedup();
    Ok(Hull { dim, points: pts, facets, simplices, volume })
}

fn segment_hull(pts: Vec<Vec<i64>>) -> Hull {
    let lo = pts[0][0];
    let hi = pts[pts.len() - 1][0];
    let facets = if hi > lo {
        vec![Facet { normal: vec![-1], offset: -lo }, Facet { normal: vec![1], offset: hi }]
    } else {
        vec![]
    };
    let simplices = vec![vec![0, pts.len() - 1]];
    Hull { dim: 1, points: pts, facets, simplices, volume: (hi - lo) as u128 }
}
