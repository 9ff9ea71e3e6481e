//! Exact V-polytopes: membership, vertices, hulls, adjacency, lattice
//! volume and lattice points, and the polytope of a matching field.

pub mod hull;
pub mod lattice;
pub mod lp;

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::combinat::MatchingField;
use crate::error::{Error, Result};
pub use hull::{Facet, Hull};
pub use lattice::AffineFrame;
use lp::LpOutcome;

pub type Rat = BigRational;

/// Formats a rational as `"p/q"`, always with a denominator.
pub fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat_from_str(s: &str) -> Result<Rat> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
    let q: BigInt = q.trim().parse().map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
    if q.is_zero() {
        return Err(Error::invalid(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(p, q))
}

/// Serde adapter for `Rat` as a `"p/q"` string.
pub mod rat_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rat_to_string(r))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        rat_from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// A point with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub Vec<Rat>);

impl Point {
    pub fn from_ints(v: &[i64]) -> Self {
        Point(v.iter().map(|&x| Rat::from_integer(x.into())).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    pub fn to_bigints(&self) -> Result<Vec<BigInt>> {
        if !self.is_integral() {
            return Err(Error::NonIntegral(format!("{self:?}")));
        }
        Ok(self.0.iter().map(|x| x.to_integer()).collect())
    }

    pub fn to_ints(&self) -> Result<Vec<i64>> {
        self.to_bigints()?.iter().map(|x| x.to_i64().ok_or(Error::Overflow)).collect()
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(rat_to_string))
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| rat_from_str(s))
            .collect::<Result<Vec<_>>>()
            .map(Point)
            .map_err(serde::de::Error::custom)
    }
}

fn check_dims(pts: &[Point], dim: usize) -> Result<()> {
    match pts.iter().find(|p| p.dim() != dim) {
        Some(p) => Err(Error::DimensionMismatch { expected: dim, got: p.dim() }),
        None => Ok(()),
    }
}

// Columns are the points, with a final row of ones.
fn convex_system(pts: &[&Point], dim: usize) -> Vec<Vec<Rat>> {
    let mut a: Vec<Vec<Rat>> = (0..dim).map(|i| pts.iter().map(|p| p.0[i].clone()).collect()).collect();
    a.push(vec![Rat::one(); pts.len()]);
    a
}

/// Whether `p ∈ conv(pts)`, decided by an exact feasibility LP.
pub fn conv_contains(p: &Point, pts: &[Point]) -> Result<bool> {
    check_dims(pts, p.dim())?;
    if pts.is_empty() {
        return Ok(false);
    }
    let refs: Vec<&Point> = pts.iter().collect();
    let a = convex_system(&refs, p.dim());
    let mut b = p.0.clone();
    b.push(Rat::one());
    Ok(lp::feasible(&a, &b))
}

/// The points that are not in the hull of the others, in input order.
/// Repeated points are kept once.
pub fn vertex_filter(pts: &[Point]) -> Result<Vec<Point>> {
    Ok(vertex_indices(pts)?.into_iter().map(|i| pts[i].clone()).collect())
}

fn vertex_indices(pts: &[Point]) -> Result<Vec<usize>> {
    let Some(first) = pts.first() else {
        return Ok(vec![]);
    };
    check_dims(pts, first.dim())?;
    let mut out = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        if pts[..i].contains(p) {
            continue;
        }
        let others: Vec<Point> = pts.iter().filter(|q| *q != p).cloned().collect();
        if !conv_contains(p, &others)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// The saturated frame of integral points.
pub fn saturated_frame(pts: &[Point]) -> Result<AffineFrame> {
    let ints = pts.iter().map(Point::to_bigints).collect::<Result<Vec<_>>>()?;
    lattice::saturated_frame(&ints)
}

/// Frame coordinates of every point, which come out integral by saturation.
pub fn frame_coordinates(frame: &AffineFrame, pts: &[Point]) -> Result<Vec<Vec<i64>>> {
    pts.iter().map(|p| frame.coords_i64(&p.to_bigints()?)).collect()
}

/// Hull of integral points, computed in their saturated frame.
pub fn hull(pts: &[Point]) -> Result<(AffineFrame, Hull)> {
    let frame = saturated_frame(pts)?;
    let coords = frame_coordinates(&frame, pts)?;
    let h = hull::hull(&coords, frame.dim())?;
    Ok((frame, h))
}

/// Normalized lattice volume in the saturated frame. The empty set and a
/// point have volume 0 and a segment has its lattice length.
pub fn normalized_volume_of(pts: &[Point]) -> Result<u128> {
    if pts.is_empty() {
        return Ok(0);
    }
    Ok(hull(pts)?.1.volume)
}

/// Normalized volume in `Z^dim`, or 0 when the points do not affinely span it.
pub fn full_dim_volume(pts: &[Vec<i64>], dim: usize) -> Result<u128> {
    if pts.is_empty() {
        return Ok(0);
    }
    let base = &pts[0];
    let diffs: Vec<Vec<i64>> = pts[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    if hull::rank(&diffs)? < dim {
        return Ok(0);
    }
    Ok(hull::hull(pts, dim)?.volume)
}

/// Integer points of a polytope with integral vertices, sorted. Fails with
/// a scale error if the bounding box in frame coordinates has more than
/// `limit` points.
pub fn lattice_points_bounded(pts: &[Point], dilation: i64, limit: u128) -> Result<Vec<Point>> {
    if pts.is_empty() {
        return Ok(vec![]);
    }
    let (frame, h) = hull(pts)?;
    let d = h.dim;
    let scaled: Vec<Vec<i64>> = h.points.iter().map(|p| p.iter().map(|x| x * dilation).collect()).collect();
    let lo: Vec<i64> = (0..d).map(|i| scaled.iter().map(|p| p[i]).min().unwrap()).collect();
    let hi: Vec<i64> = (0..d).map(|i| scaled.iter().map(|p| p[i]).max().unwrap()).collect();
    let boxsize = lo.iter().zip(&hi).try_fold(1u128, |acc, (l, h)| acc.checked_mul((h - l + 1) as u128));
    match boxsize {
        Some(b) if b <= limit => {}
        _ => return Err(Error::ScaleLimit(format!("bounding box exceeds {limit} points"))),
    }
    let facets: Vec<Facet> =
        h.facets.iter().map(|f| Facet { normal: f.normal.clone(), offset: f.offset * dilation }).collect();
    let inside = |c: &[i64]| match d {
        0 => true,
        _ => facets.iter().all(|f| f.slack(c) >= 0),
    };
    let mut out = Vec::new();
    let mut cur = lo.clone();
    loop {
        if inside(&cur) {
            let mut base: Vec<BigInt> = frame.base.iter().map(|b| b * dilation).collect();
            for (ci, b) in cur.iter().zip(&frame.basis) {
                for (o, bv) in base.iter_mut().zip(b) {
                    *o += bv * *ci;
                }
            }
            out.push(Point(base.into_iter().map(Rat::from_integer).collect()));
        }
        let Some(i) = (0..d).rev().find(|&i| cur[i] < hi[i]) else {
            break;
        };
        cur[i] += 1;
        cur[i + 1..].clone_from_slice(&lo[i + 1..]);
    }
    out.sort();
    Ok(out)
}

pub const LATTICE_POINT_LIMIT: u128 = 20_000_000;

/// All integer points of `conv(pts)`.
pub fn lattice_points_of(pts: &[Point]) -> Result<Vec<Point>> {
    lattice_points_bounded(pts, 1, LATTICE_POINT_LIMIT)
}

/// Whether `[u, v]` is an edge of `conv(vertices)`: the midpoint must not
/// be expressible with less than full weight on `u` and `v`.
pub fn is_edge(u: usize, v: usize, vertices: &[Point]) -> Result<bool> {
    if u == v {
        return Err(Error::invalid("an edge needs two distinct vertices"));
    }
    let dim = vertices[u].dim();
    let refs: Vec<&Point> = vertices.iter().collect();
    let a = convex_system(&refs, dim);
    let two = Rat::from_integer(2.into());
    let mut b: Vec<Rat> = vertices[u].0.iter().zip(&vertices[v].0).map(|(x, y)| (x + y) / &two).collect();
    b.push(Rat::one());
    let mut c = vec![Rat::zero(); vertices.len()];
    c[u] = Rat::one();
    c[v] = Rat::one();
    match lp::solve(&a, &b, &c) {
        LpOutcome::Optimal { value, .. } => Ok(value.is_one()),
        _ => Err(Error::invalid("adjacency LP did not reach an optimum")),
    }
}

#[derive(Default)]
struct Cache {
    vertices: OnceLock<Vec<usize>>,
    geometry: OnceLock<(AffineFrame, Hull)>,
}

impl Clone for Cache {
    fn clone(&self) -> Self {
        Cache::default()
    }
}

impl std::fmt::Debug for Cache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Cache")
    }
}

/// A polytope given by a finite generating set, with lazily cached
/// vertices, frame and hull.
#[derive(Clone, Debug)]
pub struct VPolytope {
    ambient_dim: usize,
    points: Vec<Point>,
    cache: Cache,
}

impl PartialEq for VPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.points == other.points
    }
}

impl VPolytope {
    pub fn new(ambient_dim: usize, points: Vec<Point>) -> Result<Self> {
        check_dims(&points, ambient_dim)?;
        Ok(VPolytope { ambient_dim, points, cache: Cache::default() })
    }

    pub fn from_ints(ambient_dim: usize, points: &[Vec<i64>]) -> Result<Self> {
        Self::new(ambient_dim, points.iter().map(|p| Point::from_ints(p)).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn vertex_idx(&self) -> Result<&[usize]> {
        if let Some(v) = self.cache.vertices.get() {
            return Ok(v);
        }
        let v = vertex_indices(&self.points)?;
        Ok(self.cache.vertices.get_or_init(|| v))
    }

    /// The minimal generating set, in input order.
    pub fn vertices(&self) -> Result<Vec<Point>> {
        Ok(self.vertex_idx()?.iter().map(|&i| self.points[i].clone()).collect())
    }

    fn geometry(&self) -> Result<&(AffineFrame, Hull)> {
        if let Some(g) = self.cache.geometry.get() {
            return Ok(g);
        }
        if self.points.is_empty() {
            return Err(Error::invalid("empty polytope"));
        }
        let g = hull(&self.points)?;
        Ok(self.cache.geometry.get_or_init(|| g))
    }

    pub fn frame(&self) -> Result<&AffineFrame> {
        Ok(&self.geometry()?.0)
    }

    /// Facets and triangulation in frame coordinates.
    pub fn hull(&self) -> Result<&Hull> {
        Ok(&self.geometry()?.1)
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(self.frame()?.dim())
    }

    pub fn normalized_volume(&self) -> Result<u128> {
        if self.points.is_empty() {
            return Ok(0);
        }
        Ok(self.hull()?.volume)
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        conv_contains(p, &self.points)
    }

    /// Whether `[u, v]` is a 1-face. Both must be vertices.
    pub fn adjacent(&self, u: &Point, v: &Point) -> Result<bool> {
        let verts = self.vertices()?;
        let iu = verts.iter().position(|p| p == u).ok_or_else(|| Error::NotAVertex(format!("{u:?}")))?;
        let iv = verts.iter().position(|p| p == v).ok_or_else(|| Error::NotAVertex(format!("{v:?}")))?;
        is_edge(iu, iv, &verts)
    }

    pub fn lattice_points(&self) -> Result<Vec<Point>> {
        lattice_points_of(&self.points)
    }
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    ambient_dim: usize,
    points: Vec<Point>,
}

impl Serialize for VPolytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeJson { ambient_dim: self.ambient_dim, points: self.points.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for VPolytope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolytopeJson::deserialize(d)?;
        VPolytope::new(raw.ambient_dim, raw.points).map_err(serde::de::Error::custom)
    }
}

/// The 0/1 vertex `v_{I,Λ}` of every subset, flattened row-major from `R^{k×n}`.
pub fn matching_field_vertices(field: &MatchingField) -> Vec<Vec<i64>> {
    let (k, n) = (field.k(), field.n());
    field
        .tableaux()
        .iter()
        .map(|t| {
            let mut v = vec![0i64; k * n];
            for (row, &col) in t.rows().iter().enumerate() {
                v[row * n + col - 1] = 1;
            }
            v
        })
        .collect()
}

/// The matching field polytope `P_Λ`, one point per subset in subset order.
pub fn matching_field_polytope(field: &MatchingField) -> VPolytope {
    let pts = matching_field_vertices(field);
    VPolytope::from_ints(field.k() * field.n(), &pts).expect("vertices have the ambient dimension")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<Point> {
        v.iter().map(|p| Point::from_ints(p)).collect()
    }

    #[test]
    fn containment() {
        let tri = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        assert!(conv_contains(&Point::from_ints(&[0, 0]), &tri).unwrap());
        assert!(!conv_contains(&Point::from_ints(&[2, 0]), &tri).unwrap());
        let half = Rat::new(1.into(), 2.into());
        assert!(conv_contains(&Point(vec![half.clone(), half]), &tri).unwrap());
        assert!(conv_contains(&Point::from_ints(&[0]), &tri).is_err());
    }

    #[test]
    fn vertices_in_order() {
        let q = Rat::new(1.into(), 4.into());
        let mut p = pts(&[&[0, 0], &[1, 0], &[0, 1]]);
        p.push(Point(vec![q.clone(), q]));
        assert_eq!(vertex_filter(&p).unwrap(), p[..3].to_vec());
        assert_eq!(vertex_filter(&p[..1]).unwrap(), p[..1].to_vec());
    }

    #[test]
    fn square_queries() {
        let sq = VPolytope::new(2, pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap();
        assert_eq!(sq.normalized_volume().unwrap(), 2);
        assert_eq!(sq.lattice_points().unwrap().len(), 4);
        let v = sq.points().to_vec();
        assert!(!sq.adjacent(&v[0], &v[3]).unwrap());
        assert!(sq.adjacent(&v[0], &v[1]).unwrap());
        assert!(sq.adjacent(&Point::from_ints(&[2, 2]), &v[0]).is_err());
    }

    #[test]
    fn degenerate_inputs() {
        let seg = pts(&[&[0, 0], &[2, 0]]);
        assert_eq!(lattice_points_of(&seg).unwrap().len(), 3);
        assert_eq!(normalized_volume_of(&seg).unwrap(), 2);
        let dot = pts(&[&[5, 5]]);
        assert_eq!(normalized_volume_of(&dot).unwrap(), 0);
        assert_eq!(lattice_points_of(&dot).unwrap(), dot);
        assert_eq!(normalized_volume_of(&[]).unwrap(), 0);
        let empty = VPolytope::new(2, vec![]).unwrap();
        assert_eq!(empty.normalized_volume().unwrap(), 0);
        assert!(empty.lattice_points().unwrap().is_empty());
        let tri2 = pts(&[&[0, 0], &[2, 0], &[0, 2]]);
        assert_eq!(lattice_points_of(&tri2).unwrap().len(), 6);
    }

    #[test]
    fn json_rationals() {
        let p = VPolytope::new(1, vec![Point(vec![Rat::new(3.into(), 1.into())])]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"ambient_dim":1,"points":[["3/1"]]}"#);
        let back: VPolytope = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
