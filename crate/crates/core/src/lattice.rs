//! Toric data of the orbifolded conifold `X_{p,q}` and its crepant resolution.
//!
//! Everything here is exact integer arithmetic. The fan lives at height one,
//! so all the interesting structure is a lattice polygon in the plane.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LensSpace {
    p: u32,
    q: u32,
}

impl LensSpace {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if q < 1 || q >= p {
            return invalid(format!("L({p},{q}): need 1 <= q < p"));
        }
        if gcd(p as i64, q as i64) != 1 {
            return invalid(format!("L({p},{q}): p and q must be coprime"));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Every admissible `q` for a given `p`.
    pub fn all_with_p(p: u32) -> Vec<LensSpace> {
        (1..p).filter_map(|q| LensSpace::new(p, q).ok()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint2 {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint2 {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

/// Twice the signed area of the triangle `(a, b, c)`.
pub fn orient(a: LatticePoint2, b: LatticePoint2, c: LatticePoint2) -> i64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeFan {
    pub ls: LensSpace,
    pub points: Vec<LatticePoint2>,
    pub rays: Vec<[i64; 3]>,
    /// Counter-clockwise.
    pub hull_vertices: Vec<LatticePoint2>,
}

pub fn build_fan(ls: LensSpace) -> LatticeFan {
    let (p, q) = (ls.p as i64, ls.q as i64);
    let mut points = vec![LatticePoint2::new(q + 1, 0), LatticePoint2::new(q, 0)];
    for j in 1..=p {
        points.push(LatticePoint2::new(q - (j * q).div_euclid(p), j));
    }
    points.push(LatticePoint2::new(1, p));
    let rays = points.iter().map(|v| [v.x, v.y, 1]).collect();
    let hull_vertices = vec![
        LatticePoint2::new(q, 0),
        LatticePoint2::new(q + 1, 0),
        LatticePoint2::new(1, p),
        LatticePoint2::new(0, p),
    ];
    LatticeFan { ls, points, rays, hull_vertices }
}

/// Convex hull in counter-clockwise order, collinear boundary points dropped.
pub fn convex_hull(points: &[LatticePoint2]) -> Vec<LatticePoint2> {
    let mut pts: Vec<LatticePoint2> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<LatticePoint2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<LatticePoint2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Twice the area of a convex polygon given counter-clockwise.
pub fn twice_area(hull: &[LatticePoint2]) -> i64 {
    let n = hull.len();
    (0..n)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            a.x * b.y - a.y * b.x
        })
        .sum()
}

/// Number of lattice points on the boundary of a convex lattice polygon.
pub fn boundary_lattice_count(hull: &[LatticePoint2]) -> i64 {
    match hull.len() {
        0 => 0,
        1 => 1,
        2 => gcd(hull[1].x - hull[0].x, hull[1].y - hull[0].y) + 1,
        n => (0..n)
            .map(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                gcd(b.x - a.x, b.y - a.y)
            })
            .sum(),
    }
}

/// Lattice points strictly inside the convex hull of `points`, scanned over
/// the bounding box.
pub fn interior_lattice_points(points: &[LatticePoint2]) -> Vec<LatticePoint2> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Vec::new();
    }
    let (xmin, xmax) = (hull.iter().map(|v| v.x).min().unwrap(), hull.iter().map(|v| v.x).max().unwrap());
    let (ymin, ymax) = (hull.iter().map(|v| v.y).min().unwrap(), hull.iter().map(|v| v.y).max().unwrap());
    let n = hull.len();
    let mut out = Vec::new();
    for x in xmin..=xmax {
        for y in ymin..=ymax {
            let c = LatticePoint2::new(x, y);
            if (0..n).all(|i| orient(hull[i], hull[(i + 1) % n], c) > 0) {
                out.push(c);
            }
        }
    }
    out
}

pub fn interior_points(fan: &LatticeFan) -> Vec<LatticePoint2> {
    interior_lattice_points(&fan.points)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adjacency {
    pub simplices: [usize; 2],
    pub edge: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangulation {
    /// Counter-clockwise index triples into the fan's `points`.
    pub simplices: Vec<[usize; 3]>,
    pub adjacency: Vec<Adjacency>,
}

impl Triangulation {
    /// Edge -> incident simplices, edges keyed by sorted index pairs.
    pub fn edge_map(&self) -> BTreeMap<[usize; 2], Vec<usize>> {
        let mut map: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (s, tri) in self.simplices.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                map.entry([a.min(b), a.max(b)]).or_default().push(s);
            }
        }
        map
    }

    pub fn edge_count(&self) -> usize {
        self.edge_map().len()
    }

    /// Edges that belong to a single simplex.
    pub fn boundary_edges(&self) -> Vec<([usize; 2], usize)> {
        self.edge_map()
            .into_iter()
            .filter(|(_, s)| s.len() == 1)
            .map(|(e, s)| (e, s[0]))
            .collect()
    }
}

/// Placing triangulation: points are inserted in lexicographic order and each
/// new point is coned to the boundary edges it sees. This is the regular
/// triangulation induced by a lexicographic lifting.
pub fn triangulate(fan: &LatticeFan) -> Result<Triangulation> {
    let simplices = placing_triangulation(&fan.points)?;
    for t in &simplices {
        let a = orient(fan.points[t[0]], fan.points[t[1]], fan.points[t[2]]);
        if a != 1 {
            return Err(Error::Numeric(format!("simplex {t:?} has lattice area {a}/2, expected 1/2")));
        }
    }
    let tri = Triangulation { simplices, adjacency: Vec::new() };
    let adjacency = tri
        .edge_map()
        .into_iter()
        .filter(|(_, s)| s.len() == 2)
        .map(|(edge, s)| Adjacency { simplices: [s[0], s[1]], edge })
        .collect();
    Ok(Triangulation { adjacency, ..tri })
}

pub fn placing_triangulation(points: &[LatticePoint2]) -> Result<Vec<[usize; 3]>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i]);
    order.dedup_by_key(|i| points[*i]);
    let k = (2..order.len())
        .find(|&k| orient(points[order[0]], points[order[1]], points[order[k]]) != 0)
        .ok_or_else(|| Error::InvalidInput("points are collinear".into()))?;

    let apex = order[k];
    let mut simplices = Vec::new();
    for w in order[..k].windows(2) {
        simplices.push(ccw([w[0], w[1], apex], points));
    }
    // Boundary cycle, counter-clockwise, collinear points kept.
    let mut boundary: Vec<usize> = if orient(points[order[0]], points[order[k - 1]], points[apex]) > 0 {
        let mut b = order[..k].to_vec();
        b.push(apex);
        b
    } else {
        let mut b: Vec<usize> = order[..k].iter().rev().copied().collect();
        b.push(apex);
        b
    };

    for &v in &order[k + 1..] {
        let n = boundary.len();
        let visible: Vec<bool> = (0..n)
            .map(|i| orient(points[boundary[i]], points[boundary[(i + 1) % n]], points[v]) < 0)
            .collect();
        let Some(first) = (0..n).find(|&i| visible[i] && !visible[(i + n - 1) % n]) else {
            return Err(Error::Numeric("placing step found no visible edge".into()));
        };
        let mut i = first;
        let mut chain = vec![boundary[i]];
        while visible[i] {
            simplices.push(ccw([boundary[i], boundary[(i + 1) % n], v], points));
            i = (i + 1) % n;
            chain.push(boundary[i]);
        }
        // Replace the visible chain (exclusive of its endpoints) by `v`.
        let start = boundary[first];
        let end = *chain.last().unwrap();
        let mut next = Vec::with_capacity(n + 1);
        let mut j = (0..n).position(|j| boundary[j] == end).unwrap();
        loop {
            next.push(boundary[j]);
            if boundary[j] == start {
                break;
            }
            j = (j + 1) % n;
        }
        next.push(v);
        boundary = next;
    }
    Ok(simplices)
}

fn ccw(t: [usize; 3], points: &[LatticePoint2]) -> [usize; 3] {
    if orient(points[t[0]], points[t[1]], points[t[2]]) < 0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToricTopology {
    pub euler: i64,
    pub b0: i64,
    pub b2: i64,
    pub b4: i64,
}

pub fn topology(fan: &LatticeFan, tri: &Triangulation) -> ToricTopology {
    let euler = tri.simplices.len() as i64;
    let b4 = interior_points(fan).len() as i64;
    ToricTopology { euler, b0: 1, b2: euler - 1 - b4, b4 }
}

/// Minimal extent of `points` along a primitive integer direction. Directions
/// are searched up to max-norm equal to the point set's diameter.
pub fn lattice_width(points: &[LatticePoint2]) -> u64 {
    if points.is_empty() {
        return 0;
    }
    let span = |f: &dyn Fn(&LatticePoint2) -> i64| {
        let (lo, hi) = points.iter().fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(f(v)), hi.max(f(v))));
        hi - lo
    };
    let diam = span(&|v| v.x).max(span(&|v| v.y));
    if diam == 0 {
        return 0;
    }
    let mut best = i64::MAX;
    for a in 0..=diam {
        for b in -diam..=diam {
            if (a == 0 && b <= 0) || gcd(a, b) != 1 {
                continue;
            }
            best = best.min(span(&|v| a * v.x + b * v.y));
        }
    }
    best as u64
}

/// `v -> matrix * v + shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineMap {
    pub matrix: [[i64; 2]; 2],
    pub shift: [i64; 2],
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { matrix: [[1, 0], [0, 1]], shift: [0, 0] };

    pub fn apply(&self, v: LatticePoint2) -> LatticePoint2 {
        let m = &self.matrix;
        LatticePoint2::new(
            m[0][0] * v.x + m[0][1] * v.y + self.shift[0],
            m[1][0] * v.x + m[1][1] * v.y + self.shift[1],
        )
    }

    pub fn det(&self) -> i64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }
}

/// Affine-unimodular map carrying the point set `src` onto `dst`, if any.
///
/// Lattice automorphisms of a polygon permute its vertices, so it suffices to
/// send one vertex and its two hull neighbours to a vertex of `dst` and its
/// neighbours, in either orientation.
pub fn affine_unimodular_map(src: &[LatticePoint2], dst: &[LatticePoint2]) -> Option<AffineMap> {
    let target: BTreeSet<LatticePoint2> = dst.iter().copied().collect();
    let source: BTreeSet<LatticePoint2> = src.iter().copied().collect();
    if source.len() != target.len() {
        return None;
    }
    let (hs, hd) = (convex_hull(src), convex_hull(dst));
    if hs.len() != hd.len() || hs.len() < 3 {
        return None;
    }
    let n = hs.len();
    let (v0, e1, e2) = (hs[0], sub(hs[1], hs[0]), sub(hs[n - 1], hs[0]));
    let det_e = e1.x * e2.y - e2.x * e1.y;
    for j in 0..n {
        for flip in [false, true] {
            let w0 = hd[j];
            let (a, b) = (hd[(j + 1) % n], hd[(j + n - 1) % n]);
            let (f1, f2) = if flip { (sub(b, w0), sub(a, w0)) } else { (sub(a, w0), sub(b, w0)) };
            // M = F E^{-1} = F adj(E) / det(E)
            let num = [
                [f1.x * e2.y - f2.x * e1.y, -f1.x * e2.x + f2.x * e1.x],
                [f1.y * e2.y - f2.y * e1.y, -f1.y * e2.x + f2.y * e1.x],
            ];
            if num.iter().flatten().any(|c| c % det_e != 0) {
                continue;
            }
            let matrix = [[num[0][0] / det_e, num[0][1] / det_e], [num[1][0] / det_e, num[1][1] / det_e]];
            let mut map = AffineMap { matrix, shift: [0, 0] };
            if map.det().abs() != 1 {
                continue;
            }
            let image = map.apply(v0);
            map.shift = [w0.x - image.x, w0.y - image.y];
            if source.iter().all(|&v| target.contains(&map.apply(v))) {
                return Some(map);
            }
        }
    }
    None
}

fn sub(a: LatticePoint2, b: LatticePoint2) -> LatticePoint2 {
    LatticePoint2::new(a.x - b.x, a.y - b.y)
}

pub fn fan_automorphism(f1: &LatticeFan, f2: &LatticeFan) -> Option<AffineMap> {
    affine_unimodular_map(&f1.points, &f2.points)
}

/// Point with rational coordinates `(x / den, y / den)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalPoint {
    pub x: i64,
    pub y: i64,
    pub den: i64,
}

impl RationalPoint {
    pub fn to_f64(self) -> [f64; 2] {
        [self.x as f64 / self.den as f64, self.y as f64 / self.den as f64]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WebEdge {
    pub nodes: [usize; 2],
    /// Primitive `(p,q)` charge, perpendicular to the dual triangulation edge.
    pub charge: [i64; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WebLeg {
    pub node: usize,
    /// Outward normal of the hull edge the leg crosses.
    pub charge: [i64; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PQWeb {
    /// Node `i` is dual to simplex `i`.
    pub internal_nodes: Vec<usize>,
    pub internal_edges: Vec<WebEdge>,
    pub external_legs: Vec<WebLeg>,
    /// Barycentres of the simplices.
    pub positions: Vec<RationalPoint>,
}

impl PQWeb {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.internal_nodes.len()];
        for e in &self.internal_edges {
            deg[e.nodes[0]] += 1;
            deg[e.nodes[1]] += 1;
        }
        for l in &self.external_legs {
            deg[l.node] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let n = self.internal_nodes.len();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for e in &self.internal_edges {
            adj[e.nodes[0]].push(e.nodes[1]);
            adj[e.nodes[1]].push(e.nodes[0]);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

fn primitive(v: [i64; 2]) -> [i64; 2] {
    let g = gcd(v[0], v[1]).max(1);
    [v[0] / g, v[1] / g]
}

pub fn pq_web(fan: &LatticeFan, tri: &Triangulation) -> PQWeb {
    let pts = &fan.points;
    let positions = tri
        .simplices
        .iter()
        .map(|t| RationalPoint {
            x: t.iter().map(|&i| pts[i].x).sum(),
            y: t.iter().map(|&i| pts[i].y).sum(),
            den: 3,
        })
        .collect();
    let internal_edges = tri
        .adjacency
        .iter()
        .map(|adj| {
            let d = sub(pts[adj.edge[1]], pts[adj.edge[0]]);
            WebEdge { nodes: adj.simplices, charge: primitive([d.y, -d.x]) }
        })
        .collect();
    let external_legs = tri
        .boundary_edges()
        .into_iter()
        .map(|(edge, s)| {
            let t = tri.simplices[s];
            // Orient the edge as it appears in the counter-clockwise simplex;
            // its right-hand normal then points out of the hull.
            let k = (0..3).find(|&k| {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                [a.min(b), a.max(b)] == edge
            });
            let k = k.expect("boundary edge belongs to its simplex");
            let d = sub(pts[t[(k + 1) % 3]], pts[t[k]]);
            WebLeg { node: s, charge: primitive([d.y, -d.x]) }
        })
        .collect();
    PQWeb {
        internal_nodes: (0..tri.simplices.len()).collect(),
        internal_edges,
        external_legs,
        positions,
    }
}
