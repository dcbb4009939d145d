//! Convex polytopes in dimension <= 3: hull construction (interval sweep,
//! monotone chain, incremental hull), V-rep/H-rep bookkeeping, Hausdorff
//! distance, products and half-space clipping.
//!
//! All geometry is floating point with explicit tolerances; degenerate affine
//! spans are detected and returned as lower-dimensional hulls flagged through
//! `affine_dim`.

use crate::error::{Error, Result};
use crate::numerics::{euclid_dist, lex_cmp};

/// Absolute vertex deduplication tolerance.
pub const DEDUP_TOL: f64 = 1e-12;

/// V-rep/H-rep mutual-consistency tolerance.
pub const VH_TOL: f64 = 1e-9;

/// A closed half-space `{ p : normal . p <= offset }` with unit normal.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        HalfSpace { normal, offset }
    }

    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        dot(&self.normal, p) - self.offset
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.signed_distance(p) <= tol
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Combinatorial face data of a polytope, dispatched by affine dimension.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum FaceKind {
    Point,
    Segment,
    /// Counterclockwise ring of vertex indices (in the polygon plane).
    Polygon {
        ring: Vec<usize>,
    },
    /// Outward-oriented triangles of the boundary.
    Solid {
        tris: Vec<[usize; 3]>,
    },
}

/// A convex polytope with both representations.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Polytope {
    pub ambient_dim: usize,
    /// Dimension of the affine span; `< ambient_dim` flags a degenerate hull.
    pub affine_dim: usize,
    /// Extreme points, lexicographically sorted.
    pub vertices: Vec<Vec<f64>>,
    /// Outward unit-normal supporting half-spaces (coplanar facets merged);
    /// for degenerate hulls this includes the span equalities as pairs.
    pub facets: Vec<HalfSpace>,
    pub faces: FaceKind,
}

impl Polytope {
    /// Bounding-box diagonal, used to scale tolerances.
    pub fn extent(&self) -> f64 {
        let d = self.ambient_dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &self.vertices {
            for i in 0..d {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        euclid_dist(&lo, &hi)
    }

    /// Distance from a point to the polytope (0 when inside).
    pub fn distance(&self, p: &[f64]) -> f64 {
        match &self.faces {
            FaceKind::Point => euclid_dist(p, &self.vertices[0]),
            FaceKind::Segment => dist_point_segment(p, &self.vertices[0], &self.vertices[1]),
            FaceKind::Polygon { ring } => {
                if self.ambient_dim == 2 {
                    if self.facets.iter().all(|h| h.contains(p, 0.0)) {
                        return 0.0;
                    }
                    ring_edges(ring)
                        .map(|(a, b)| dist_point_segment(p, &self.vertices[a], &self.vertices[b]))
                        .fold(f64::INFINITY, f64::min)
                } else {
                    // planar polygon embedded in R^3
                    let (n, base) = self.polygon_plane();
                    let h = dot(&n, p) - dot(&n, &base);
                    let q: Vec<f64> = (0..3).map(|i| p[i] - h * n[i]).collect();
                    let inside = ring_edges(ring).all(|(a, b)| {
                        let va = &self.vertices[a];
                        let vb = &self.vertices[b];
                        let e = sub3(vb, va);
                        let out = cross3(e, [n[0], n[1], n[2]]);
                        dot(&out, &q) - dot(&out, va) <= 0.0
                    });
                    if inside {
                        h.abs()
                    } else {
                        ring_edges(ring)
                            .map(|(a, b)| {
                                dist_point_segment(p, &self.vertices[a], &self.vertices[b])
                            })
                            .fold(f64::INFINITY, f64::min)
                    }
                }
            }
            FaceKind::Solid { tris } => {
                if self.facets.iter().all(|h| h.contains(p, 0.0)) {
                    return 0.0;
                }
                tris.iter()
                    .map(|t| {
                        dist_point_triangle(
                            p,
                            &self.vertices[t[0]],
                            &self.vertices[t[1]],
                            &self.vertices[t[2]],
                        )
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Plane of a polygon embedded in R^3: (unit normal, base point).
    fn polygon_plane(&self) -> (Vec<f64>, Vec<f64>) {
        let ring = match &self.faces {
            FaceKind::Polygon { ring } => ring,
            _ => unreachable!(),
        };
        let a = &self.vertices[ring[0]];
        let b = &self.vertices[ring[1]];
        let c = &self.vertices[ring[2]];
        let n = cross3(sub3(b, a), sub3(c, a));
        let ln = norm(&n);
        (vec![n[0] / ln, n[1] / ln, n[2] / ln], a.clone())
    }

    /// Undirected edges as index pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match &self.faces {
            FaceKind::Point => vec![],
            FaceKind::Segment => vec![(0, 1)],
            FaceKind::Polygon { ring } => ring_edges(ring).collect(),
            FaceKind::Solid { tris } => {
                let mut set = std::collections::BTreeSet::new();
                for t in tris {
                    for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                        set.insert((u.min(v), u.max(v)));
                    }
                }
                set.into_iter().collect()
            }
        }
    }

    /// Mutual V-rep/H-rep containment check; `None` when consistent.
    pub fn consistency_defect(&self) -> Option<String> {
        let scale = self.extent().max(1.0);
        for v in &self.vertices {
            for h in &self.facets {
                if h.signed_distance(v) > VH_TOL * scale {
                    return Some(format!("vertex {v:?} violates facet {h:?}"));
                }
            }
        }
        for h in &self.facets {
            let support = self
                .vertices
                .iter()
                .map(|v| dot(&h.normal, v))
                .fold(f64::NEG_INFINITY, f64::max);
            if (support - h.offset).abs() > VH_TOL * scale {
                return Some(format!(
                    "facet {h:?} is not supported by any vertex (support {support})"
                ));
            }
        }
        None
    }
}

fn ring_edges(ring: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..ring.len()).map(move |i| (ring[i], ring[(i + 1) % ring.len()]))
}

fn dist_point_segment(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d = a.len();
    let ab: Vec<f64> = (0..d).map(|i| b[i] - a[i]).collect();
    let ap: Vec<f64> = (0..d).map(|i| p[i] - a[i]).collect();
    let denom = dot(&ab, &ab);
    let t = if denom == 0.0 {
        0.0
    } else {
        (dot(&ap, &ab) / denom).clamp(0.0, 1.0)
    };
    let proj: Vec<f64> = (0..d).map(|i| a[i] + t * ab[i]).collect();
    euclid_dist(p, &proj)
}

/// Closest distance from `p` to triangle `abc` in R^3 (Ericson's method).
fn dist_point_triangle(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = sub3(b, a);
    let ac = sub3(c, a);
    let ap = sub3(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return euclid_dist(p, a);
    }
    let bp = sub3(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return euclid_dist(p, b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        let q: Vec<f64> = (0..3).map(|i| a[i] + t * ab[i]).collect();
        return euclid_dist(p, &q);
    }
    let cp = sub3(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return euclid_dist(p, c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        let q: Vec<f64> = (0..3).map(|i| a[i] + t * ac[i]).collect();
        return euclid_dist(p, &q);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        let q: Vec<f64> = (0..3).map(|i| b[i] + t * (c[i] - b[i])).collect();
        return euclid_dist(p, &q);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let q: Vec<f64> = (0..3).map(|i| a[i] + ab[i] * v + ac[i] * w).collect();
    euclid_dist(p, &q)
}

fn dedup_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| lex_cmp(a, b));
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    'outer: for p in pts {
        for q in out.iter().rev() {
            if euclid_dist(&p, q) <= DEDUP_TOL {
                continue 'outer;
            }
            // sorted input: once the first coordinate separates, stop scanning
            if (p[0] - q[0]).abs() > DEDUP_TOL {
                break;
            }
        }
        out.push(p);
    }
    out
}

/// Convex hull of a point cloud in dimension 1, 2 or 3.
///
/// Degenerate affine spans come back as lower-dimensional hulls with
/// `affine_dim < ambient_dim`.
pub fn convex_hull(points: &[Vec<f64>]) -> Result<Polytope> {
    if points.is_empty() {
        return Err(Error::HullInput("empty point set".into()));
    }
    let dim = points[0].len();
    if !(1..=3).contains(&dim) {
        return Err(Error::HullInput(format!("unsupported dimension {dim}")));
    }
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::HullInput("inconsistent point dimensions".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::HullInput("non-finite coordinate".into()));
    }
    let pts = dedup_points(points);
    match dim {
        1 => Ok(hull_1d(&pts)),
        2 => Ok(hull_2d(&pts)),
        _ => Ok(hull_3d(&pts)),
    }
}

fn point_polytope(v: Vec<f64>) -> Polytope {
    let dim = v.len();
    let mut facets = Vec::new();
    for i in 0..dim {
        let mut n = vec![0.0; dim];
        n[i] = 1.0;
        facets.push(HalfSpace::new(n.clone(), v[i]));
        n[i] = -1.0;
        facets.push(HalfSpace::new(n, -v[i]));
    }
    Polytope {
        ambient_dim: dim,
        affine_dim: 0,
        vertices: vec![v],
        facets,
        faces: FaceKind::Point,
    }
}

fn segment_polytope(a: Vec<f64>, b: Vec<f64>) -> Polytope {
    let dim = a.len();
    let mut dir: Vec<f64> = (0..dim).map(|i| b[i] - a[i]).collect();
    let ln = norm(&dir);
    dir.iter_mut().for_each(|v| *v /= ln);
    let mut facets = vec![
        HalfSpace::new(dir.clone(), dot(&dir, &b)),
        HalfSpace::new(dir.iter().map(|v| -v).collect(), -dot(&dir, &a)),
    ];
    // span equalities for the degenerate directions
    for n in orthonormal_complement(&[dir.clone()], dim) {
        let off = dot(&n, &a);
        facets.push(HalfSpace::new(n.clone(), off));
        facets.push(HalfSpace::new(n.iter().map(|v| -v).collect(), -off));
    }
    let mut vertices = vec![a, b];
    vertices.sort_by(|x, y| lex_cmp(x, y));
    Polytope {
        ambient_dim: dim,
        affine_dim: 1,
        vertices,
        facets,
        faces: FaceKind::Segment,
    }
}

/// Orthonormal basis of the complement of `span` (given orthonormal) in R^dim.
fn orthonormal_complement(span: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = span.to_vec();
    let mut out = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            for (ei, bi) in e.iter_mut().zip(b) {
                *ei -= c * bi;
            }
        }
        let ln = norm(&e);
        if ln > 1e-9 {
            e.iter_mut().for_each(|v| *v /= ln);
            basis.push(e.clone());
            out.push(e);
        }
    }
    out
}

fn hull_1d(pts: &[Vec<f64>]) -> Polytope {
    let lo = pts.first().unwrap().clone();
    let hi = pts.last().unwrap().clone();
    if euclid_dist(&lo, &hi) <= DEDUP_TOL {
        point_polytope(lo)
    } else {
        segment_polytope(lo, hi)
    }
}

fn hull_2d(pts: &[Vec<f64>]) -> Polytope {
    if pts.len() == 1 {
        return point_polytope(pts[0].clone());
    }
    let extent = {
        let a = &pts[0];
        pts.iter().map(|p| euclid_dist(a, p)).fold(0.0f64, f64::max)
    };
    let turn_tol = 1e-12 * extent.max(1.0) * extent.max(1.0);
    let cross = |o: &[f64], a: &[f64], b: &[f64]| -> f64 {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    // monotone chain on lex-sorted points
    let mut lower: Vec<&Vec<f64>> = Vec::new();
    for p in pts {
        while lower.len() >= 2
            && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= turn_tol
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<&Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= turn_tol
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let ring_pts: Vec<Vec<f64>> = lower.into_iter().chain(upper).cloned().collect();
    if ring_pts.len() < 3 {
        // collinear cloud: degenerate one-dimensional hull (segment)
        let lo = pts.first().unwrap().clone();
        let hi = pts.last().unwrap().clone();
        return segment_polytope(lo, hi);
    }
    // lex-sorted vertex storage with ccw ring indices
    let mut vertices = ring_pts.clone();
    vertices.sort_by(|a, b| lex_cmp(a, b));
    let index_of = |p: &Vec<f64>| vertices.iter().position(|v| v == p).unwrap();
    let ring: Vec<usize> = ring_pts.iter().map(index_of).collect();
    let mut facets = Vec::new();
    for (ia, ib) in ring_edges(&ring) {
        let a = &vertices[ia];
        let b = &vertices[ib];
        let e = [b[0] - a[0], b[1] - a[1]];
        let ln = (e[0] * e[0] + e[1] * e[1]).sqrt();
        let n = vec![e[1] / ln, -e[0] / ln];
        let off = dot(&n, a);
        facets.push(HalfSpace::new(n, off));
    }
    merge_facets(&mut facets, extent.max(1.0));
    Polytope {
        ambient_dim: 2,
        affine_dim: 2,
        vertices,
        facets,
        faces: FaceKind::Polygon { ring },
    }
}

fn merge_facets(facets: &mut Vec<HalfSpace>, scale: f64) {
    let mut out: Vec<HalfSpace> = Vec::new();
    'outer: for h in facets.drain(..) {
        for g in &out {
            let c = dot(&h.normal, &g.normal);
            if (c - 1.0).abs() < 1e-9 && (h.offset - g.offset).abs() < 1e-9 * scale {
                continue 'outer;
            }
        }
        out.push(h);
    }
    out.sort_by(|a, b| {
        lex_cmp(&a.normal, &b.normal).then(a.offset.partial_cmp(&b.offset).unwrap())
    });
    *facets = out;
}

struct Tri {
    v: [usize; 3],
    normal: [f64; 3],
    offset: f64,
}

fn tri_plane(pts: &[Vec<f64>], v: [usize; 3]) -> ([f64; 3], f64) {
    let a = &pts[v[0]];
    let n = cross3(sub3(&pts[v[1]], a), sub3(&pts[v[2]], a));
    let ln = norm(&n);
    let n = [n[0] / ln, n[1] / ln, n[2] / ln];
    (n, dot(&n, a))
}

fn hull_3d(pts: &[Vec<f64>]) -> Polytope {
    if pts.len() == 1 {
        return point_polytope(pts[0].clone());
    }
    let extent = {
        let a = &pts[0];
        pts.iter().map(|p| euclid_dist(a, p)).fold(0.0f64, f64::max)
    };
    let tol = 1e-10 * extent.max(1.0);

    // affinely independent seed points
    let i0 = 0;
    let i1 = (0..pts.len())
        .max_by(|&a, &b| {
            euclid_dist(&pts[a], &pts[i0])
                .partial_cmp(&euclid_dist(&pts[b], &pts[i0]))
                .unwrap()
        })
        .unwrap();
    if euclid_dist(&pts[i1], &pts[i0]) <= tol {
        return point_polytope(pts[i0].clone());
    }
    let area =
        |k: usize| -> f64 { norm(&cross3(sub3(&pts[i1], &pts[i0]), sub3(&pts[k], &pts[i0]))) };
    let i2 = (0..pts.len())
        .max_by(|&a, &b| area(a).partial_cmp(&area(b)).unwrap())
        .unwrap();
    if area(i2) <= tol * extent {
        // collinear: project to the line through i0 with direction i1 - i0
        let mut dir = sub3(&pts[i1], &pts[i0]).to_vec();
        let ln = norm(&dir);
        dir.iter_mut().for_each(|v| *v /= ln);
        let param = |p: &Vec<f64>| -> f64 { (0..3).map(|i| (p[i] - pts[i0][i]) * dir[i]).sum() };
        let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut pmin, mut pmax) = (pts[i0].clone(), pts[i0].clone());
        for p in pts {
            let t = param(p);
            if t < tmin {
                tmin = t;
                pmin = p.clone();
            }
            if t > tmax {
                tmax = t;
                pmax = p.clone();
            }
        }
        return segment_polytope(pmin, pmax);
    }
    let vol = |k: usize| -> f64 {
        let n = cross3(sub3(&pts[i1], &pts[i0]), sub3(&pts[i2], &pts[i0]));
        dot(&n, &sub3(&pts[k], &pts[i0])).abs()
    };
    let i3 = (0..pts.len())
        .max_by(|&a, &b| vol(a).partial_cmp(&vol(b)).unwrap())
        .unwrap();
    if vol(i3) <= tol * extent * extent {
        return hull_3d_planar(pts, i0, i1, i2);
    }

    // initial tetrahedron with outward orientation
    let centroid: Vec<f64> = (0..3)
        .map(|c| (pts[i0][c] + pts[i1][c] + pts[i2][c] + pts[i3][c]) / 4.0)
        .collect();
    let mut tris: Vec<Tri> = Vec::new();
    for v in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let (mut n, mut off) = tri_plane(pts, v);
        let mut v = v;
        if dot(&n, &centroid) - off > 0.0 {
            v.swap(1, 2);
            let r = tri_plane(pts, v);
            n = r.0;
            off = r.1;
        }
        tris.push(Tri {
            v,
            normal: n,
            offset: off,
        });
    }

    let vis_tol = tol;
    for (idx, p) in pts.iter().enumerate() {
        if idx == i0 || idx == i1 || idx == i2 || idx == i3 {
            continue;
        }
        let visible: Vec<usize> = (0..tris.len())
            .filter(|&t| dot(&tris[t].normal, p) - tris[t].offset > vis_tol)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let vis_set: std::collections::BTreeSet<usize> = visible.iter().copied().collect();
        let mut directed: std::collections::BTreeSet<(usize, usize)> =
            std::collections::BTreeSet::new();
        for &t in &visible {
            let v = tris[t].v;
            for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                directed.insert(e);
            }
        }
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &(u, v) in &directed {
            if !directed.contains(&(v, u)) {
                horizon.push((u, v));
            }
        }
        let mut keep: Vec<Tri> = Vec::new();
        for (t, tri) in tris.into_iter().enumerate() {
            if !vis_set.contains(&t) {
                keep.push(tri);
            }
        }
        for (u, v) in horizon {
            let vtx = [u, v, idx];
            let (n, off) = tri_plane(pts, vtx);
            keep.push(Tri {
                v: vtx,
                normal: n,
                offset: off,
            });
        }
        tris = keep;
    }

    // collect used vertices, remap to lex-sorted order
    let mut used: Vec<usize> = tris.iter().flat_map(|t| t.v).collect();
    used.sort_unstable();
    used.dedup();

    // drop vertices that sit on facet interiors or edges: per coplanar facet
    // group, only the corners of the facet polygon are extreme
    let extreme = extreme_vertices(pts, &tris, &used, extent.max(1.0));
    if extreme.len() < used.len() {
        let survivors: Vec<Vec<f64>> = extreme.iter().map(|&i| pts[i].clone()).collect();
        return hull_3d(&survivors);
    }

    let mut vertices: Vec<Vec<f64>> = used.iter().map(|&i| pts[i].clone()).collect();
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..vertices.len()).collect();
        idx.sort_by(|&a, &b| lex_cmp(&vertices[a], &vertices[b]));
        idx
    };
    let mut rank = vec![0usize; vertices.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let mut sorted: Vec<Vec<f64>> = vec![Vec::new(); vertices.len()];
    for (old, v) in vertices.drain(..).enumerate() {
        sorted[rank[old]] = v;
    }
    let remap: std::collections::BTreeMap<usize, usize> = used
        .iter()
        .enumerate()
        .map(|(compact, &orig)| (orig, rank[compact]))
        .collect();
    let tri_idx: Vec<[usize; 3]> = tris
        .iter()
        .map(|t| [remap[&t.v[0]], remap[&t.v[1]], remap[&t.v[2]]])
        .collect();
    let mut facets: Vec<HalfSpace> = tris
        .iter()
        .map(|t| HalfSpace::new(t.normal.to_vec(), t.offset))
        .collect();
    merge_facets(&mut facets, extent.max(1.0));
    Polytope {
        ambient_dim: 3,
        affine_dim: 3,
        vertices: sorted,
        facets,
        faces: FaceKind::Solid { tris: tri_idx },
    }
}

/// Filters hull-triangle vertices down to the true extreme points: groups
/// triangles into coplanar facets and keeps, per facet, only the corners of
/// the facet's polygon.
fn extreme_vertices(pts: &[Vec<f64>], tris: &[Tri], used: &[usize], scale: f64) -> Vec<usize> {
    struct Cluster {
        normal: [f64; 3],
        offset: f64,
        members: std::collections::BTreeSet<usize>,
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    for t in tris {
        let mut found = false;
        for c in clusters.iter_mut() {
            let d =
                t.normal[0] * c.normal[0] + t.normal[1] * c.normal[1] + t.normal[2] * c.normal[2];
            if (d - 1.0).abs() < 1e-9 && (t.offset - c.offset).abs() < 1e-9 * scale {
                c.members.extend(t.v);
                found = true;
                break;
            }
        }
        if !found {
            clusters.push(Cluster {
                normal: t.normal,
                offset: t.offset,
                members: t.v.iter().copied().collect(),
            });
        }
    }
    let mut keep: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
    for c in &clusters {
        let n = c.normal;
        // in-plane orthonormal frame
        let mut e1 = if n[0].abs() < 0.9 {
            cross3([1.0, 0.0, 0.0], n)
        } else {
            cross3([0.0, 1.0, 0.0], n)
        };
        let l1 = norm(&e1);
        e1.iter_mut().for_each(|v| *v /= l1);
        let e2 = cross3(n, e1);
        let members: Vec<usize> = c.members.iter().copied().collect();
        let planar: Vec<Vec<f64>> = members
            .iter()
            .map(|&i| {
                let p = &pts[i];
                vec![
                    p[0] * e1[0] + p[1] * e1[1] + p[2] * e1[2],
                    p[0] * e2[0] + p[1] * e2[1] + p[2] * e2[2],
                ]
            })
            .collect();
        let flat = hull_2d(&planar);
        for (local, q) in planar.iter().enumerate() {
            if flat
                .vertices
                .iter()
                .any(|v| euclid_dist(v, q) <= DEDUP_TOL.max(1e-12 * scale))
            {
                keep.insert(members[local]);
            }
        }
    }
    // every used vertex should belong to some cluster; keep the intersection
    used.iter().copied().filter(|i| keep.contains(i)).collect()
}

/// Coplanar 3D cloud: hull in the common plane, flagged `affine_dim = 2`.
fn hull_3d_planar(pts: &[Vec<f64>], i0: usize, i1: usize, i2: usize) -> Polytope {
    let e1 = {
        let mut e = sub3(&pts[i1], &pts[i0]).to_vec();
        let ln = norm(&e);
        e.iter_mut().for_each(|v| *v /= ln);
        e
    };
    let e2 = {
        let raw = sub3(&pts[i2], &pts[i0]).to_vec();
        let c = dot(&raw, &e1);
        let mut e: Vec<f64> = raw.iter().zip(&e1).map(|(r, b)| r - c * b).collect();
        let ln = norm(&e);
        e.iter_mut().for_each(|v| *v /= ln);
        e
    };
    let base = pts[i0].clone();
    let project = |p: &Vec<f64>| -> Vec<f64> {
        let rel: Vec<f64> = (0..3).map(|i| p[i] - base[i]).collect();
        vec![dot(&rel, &e1), dot(&rel, &e2)]
    };
    let planar: Vec<Vec<f64>> = pts.iter().map(project).collect();
    let flat = hull_2d(&planar);
    let lift = |q: &Vec<f64>| -> Vec<f64> {
        (0..3)
            .map(|i| base[i] + q[0] * e1[i] + q[1] * e2[i])
            .collect()
    };
    let lifted: Vec<Vec<f64>> = flat.vertices.iter().map(lift).collect();
    let mut vertices = lifted.clone();
    vertices.sort_by(|a, b| lex_cmp(a, b));
    let ring: Vec<usize> = match &flat.faces {
        FaceKind::Polygon { ring } => ring
            .iter()
            .map(|&i| {
                let p = lift(&flat.vertices[i]);
                vertices
                    .iter()
                    .position(|v| euclid_dist(v, &p) <= DEDUP_TOL)
                    .unwrap()
            })
            .collect(),
        FaceKind::Segment => {
            return segment_polytope(lifted[0].clone(), lifted[1].clone());
        }
        FaceKind::Point => return point_polytope(lifted[0].clone()),
        _ => unreachable!(),
    };
    // facets: plane equalities plus in-plane edge half-spaces
    let pn = {
        let n = cross3([e1[0], e1[1], e1[2]], [e2[0], e2[1], e2[2]]);
        vec![n[0], n[1], n[2]]
    };
    let poff = dot(&pn, &base);
    let mut facets = vec![
        HalfSpace::new(pn.clone(), poff),
        HalfSpace::new(pn.iter().map(|v| -v).collect(), -poff),
    ];
    for (ia, ib) in ring_edges(&ring) {
        let a = &vertices[ia];
        let b = &vertices[ib];
        let e = sub3(b, a);
        let out = cross3(e, [pn[0], pn[1], pn[2]]);
        let ln = norm(&out);
        let n: Vec<f64> = out.iter().map(|v| v / ln).collect();
        let off = dot(&n, a);
        facets.push(HalfSpace::new(n, off));
    }
    let extent = euclid_dist(&vertices[0], vertices.last().unwrap()).max(1.0);
    merge_facets(&mut facets, extent);
    Polytope {
        ambient_dim: 3,
        affine_dim: 2,
        vertices,
        facets,
        faces: FaceKind::Polygon { ring },
    }
}

/// Symmetric Hausdorff distance between convex polytopes, exact from the
/// vertex-to-polytope distances in both directions.
pub fn hausdorff_distance(a: &Polytope, b: &Polytope) -> Result<f64> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim,
            got: b.ambient_dim,
        });
    }
    let d_ab = a
        .vertices
        .iter()
        .map(|v| b.distance(v))
        .fold(0.0f64, f64::max);
    let d_ba = b
        .vertices
        .iter()
        .map(|v| a.distance(v))
        .fold(0.0f64, f64::max);
    Ok(d_ab.max(d_ba))
}

/// Inserts `value` at position `xi_index` of `point`.
pub fn insert_coord(point: &[f64], xi_index: usize, value: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(point.len() + 1);
    out.extend_from_slice(&point[..xi_index.min(point.len())]);
    out.push(value);
    if xi_index < point.len() {
        out.extend_from_slice(&point[xi_index..]);
    }
    out
}

/// Product polytope `leaf x [lo, hi]` with the interval coordinate placed at
/// `xi_index`; built as the hull of the embedded vertex set.
pub fn product_polytope(
    leaf_vertices: &[Vec<f64>],
    lo: f64,
    hi: f64,
    xi_index: usize,
) -> Result<Polytope> {
    let mut pts = Vec::with_capacity(leaf_vertices.len().max(1) * 2);
    let leaf: &[Vec<f64>] = if leaf_vertices.is_empty() {
        &[vec![]]
    } else {
        leaf_vertices
    };
    for v in leaf {
        pts.push(insert_coord(v, xi_index, lo));
        pts.push(insert_coord(v, xi_index, hi));
    }
    convex_hull(&pts)
}

/// Clips a polytope by a half-space: hull of the surviving vertices plus the
/// edge crossings.
pub fn clip_polytope(poly: &Polytope, hs: &HalfSpace) -> Result<Polytope> {
    let tol = 1e-12 * poly.extent().max(1.0);
    let mut pts: Vec<Vec<f64>> = poly
        .vertices
        .iter()
        .filter(|v| hs.contains(v, tol))
        .cloned()
        .collect();
    for (ia, ib) in poly.edges() {
        let a = &poly.vertices[ia];
        let b = &poly.vertices[ib];
        let da = hs.signed_distance(a);
        let db = hs.signed_distance(b);
        if (da > tol && db < -tol) || (da < -tol && db > tol) {
            let t = da / (da - db);
            let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            pts.push(q);
        }
    }
    if pts.is_empty() {
        return Err(Error::HullInput("clip produced an empty polytope".into()));
    }
    convex_hull(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p2(x: f64, y: f64) -> Vec<f64> {
        vec![x, y]
    }

    #[test]
    fn square_with_interior_points() {
        let mut pts = vec![p2(0., 0.), p2(1., 0.), p2(1., 1.), p2(0., 1.)];
        pts.push(p2(0.5, 0.5));
        pts.push(p2(0.25, 0.75));
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(h.affine_dim, 2);
        assert_eq!(h.facets.len(), 4);
        assert!(h.consistency_defect().is_none());
    }

    #[test]
    fn collinear_cloud_is_flagged_segment() {
        let pts: Vec<Vec<f64>> = (0..7).map(|i| p2(i as f64 * 0.3, i as f64 * 0.6)).collect();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.affine_dim, 1);
        assert!(matches!(h.faces, FaceKind::Segment));
        assert_eq!(h.vertices.len(), 2);
    }

    #[test]
    fn interval_hull() {
        let pts: Vec<Vec<f64>> = [0.4, -1.0, 0.2, 3.5, 3.5]
            .iter()
            .map(|&x| vec![x])
            .collect();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices, vec![vec![-1.0], vec![3.5]]);
        assert_eq!(h.affine_dim, 1);
    }

    #[test]
    fn tetrahedron_hull() {
        let pts = vec![
            vec![0., 0., 0.],
            vec![1., 0., 0.],
            vec![0., 1., 0.],
            vec![0., 0., 1.],
            vec![0.2, 0.2, 0.2],
        ];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 4);
        assert_eq!(h.affine_dim, 3);
        assert_eq!(h.facets.len(), 4);
        assert!(h.consistency_defect().is_none());
        assert!(h.contains(&[0.2, 0.2, 0.2], 1e-12));
        assert!(!h.contains(&[1.0, 1.0, 1.0], 1e-6));
    }

    #[test]
    fn cube_merges_coplanar_facets() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(vec![x, y, z]);
                }
            }
        }
        // add face-interior and edge points that must not become vertices
        pts.push(vec![0.5, 0.5, 0.0]);
        pts.push(vec![0.5, 0.0, 0.0]);
        pts.push(vec![0.5, 0.5, 0.5]);
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.facets.len(), 6);
    }

    #[test]
    fn coplanar_3d_cloud_is_flagged_polygon() {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                pts.push(vec![i as f64, j as f64, 2.0 + i as f64 - j as f64]);
            }
        }
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.affine_dim, 2);
        assert_eq!(h.vertices.len(), 4);
    }

    #[test]
    fn hausdorff_translation() {
        let sq = convex_hull(&[p2(0., 0.), p2(1., 0.), p2(1., 1.), p2(0., 1.)]).unwrap();
        let sh = convex_hull(&[p2(0.3, 0.), p2(1.3, 0.), p2(1.3, 1.), p2(0.3, 1.)]).unwrap();
        assert_eq!(hausdorff_distance(&sq, &sq).unwrap(), 0.0);
        assert_relative_eq!(hausdorff_distance(&sq, &sh).unwrap(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn hausdorff_matches_boundary_sampling_oracle() {
        let a = convex_hull(&[p2(0., 0.), p2(2., 0.), p2(1.5, 1.7), p2(0.2, 1.1)]).unwrap();
        let b = convex_hull(&[p2(0.4, -0.3), p2(2.2, 0.5), p2(1.0, 2.0)]).unwrap();
        let exact = hausdorff_distance(&a, &b).unwrap();
        // dense boundary sampling oracle
        let sample = |poly: &Polytope| -> Vec<Vec<f64>> {
            let ring = match &poly.faces {
                FaceKind::Polygon { ring } => ring.clone(),
                _ => panic!(),
            };
            let mut out = Vec::new();
            for (ia, ib) in super::ring_edges(&ring) {
                let u = &poly.vertices[ia];
                let v = &poly.vertices[ib];
                for k in 0..2000 {
                    let t = k as f64 / 2000.0;
                    out.push(vec![u[0] + t * (v[0] - u[0]), u[1] + t * (v[1] - u[1])]);
                }
            }
            out
        };
        let d_ab = sample(&a)
            .iter()
            .map(|p| b.distance(p))
            .fold(0.0f64, f64::max);
        let d_ba = sample(&b)
            .iter()
            .map(|p| a.distance(p))
            .fold(0.0f64, f64::max);
        let oracle = d_ab.max(d_ba);
        assert!(
            (exact - oracle).abs() < 1e-6,
            "exact {exact} oracle {oracle}"
        );
    }

    #[test]
    fn product_of_segment_and_interval_is_rectangle() {
        let leaf = vec![vec![0.0], vec![1.0]];
        let prod = product_polytope(&leaf, -2.0, 2.0, 0).unwrap();
        assert_eq!(prod.vertices.len(), 4);
        assert!(prod.contains(&[0.0, 0.5], 1e-12));
        assert!(!prod.contains(&[2.5, 0.5], 1e-9));
    }

    #[test]
    fn product_with_point_leaf_is_interval() {
        let prod = product_polytope(&[vec![]], -1.0, 1.0, 0).unwrap();
        assert_eq!(prod.ambient_dim, 1);
        assert_eq!(prod.vertices, vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn clip_square() {
        let sq = convex_hull(&[p2(0., 0.), p2(2., 0.), p2(2., 2.), p2(0., 2.)]).unwrap();
        let clipped = clip_polytope(&sq, &HalfSpace::new(vec![1.0, 0.0], 1.0)).unwrap();
        assert_eq!(clipped.vertices.len(), 4);
        assert!(clipped.contains(&[1.0, 2.0], 1e-9));
        assert!(!clipped.contains(&[1.5, 1.0], 1e-9));
    }

    #[test]
    fn clip_tetrahedron() {
        let tet = convex_hull(&[
            vec![0., 0., 0.],
            vec![2., 0., 0.],
            vec![0., 2., 0.],
            vec![0., 0., 2.],
        ])
        .unwrap();
        let clipped = clip_polytope(&tet, &HalfSpace::new(vec![0.0, 0.0, 1.0], 1.0)).unwrap();
        assert!(clipped.contains(&[0.1, 0.1, 0.9], 1e-9));
        assert!(!clipped.contains(&[0.1, 0.1, 1.4], 1e-9));
        assert!(clipped.consistency_defect().is_none());
    }

    #[test]
    fn idempotence_on_vertices() {
        let pts = vec![
            p2(0., 0.),
            p2(3., 0.2),
            p2(2.5, 2.9),
            p2(-0.4, 1.8),
            p2(1.0, 1.0),
            p2(2.0, 0.4),
        ];
        let h1 = convex_hull(&pts).unwrap();
        let h2 = convex_hull(&h1.vertices).unwrap();
        assert_eq!(h1.vertices, h2.vertices);
    }

    #[test]
    fn empty_input_errors() {
        assert!(convex_hull(&[]).is_err());
    }
}
