//! Polygonal domains and their triangulations.
//!
//! Domains are simple polygons; a triangulation starts from an ear clipping of
//! the polygon and is refined by conforming longest-edge bisection, followed by
//! a Delaunay edge-flip pass and a few sweeps of Laplacian smoothing of the
//! interior vertices. Boundary vertices never move, so the polygon is the
//! geometry at every refinement level.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{parse_args, shoelace};

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates a vertex loop. Clockwise input is reversed to counter-clockwise.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry(format!("polygon needs 3 vertices, got {}", vertices.len())));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::DegenerateGeometry("non-finite vertex coordinate".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::DegenerateGeometry(format!("repeated vertex at index {i}")));
            }
        }
        if !is_simple(&vertices) {
            return Err(Error::DegenerateGeometry("polygon is not simple".into()));
        }
        let area = shoelace(&vertices);
        if area == 0.0 {
            return Err(Error::DegenerateGeometry("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    /// Regular `k`-gon inscribed in the circle of the given radius about the origin.
    pub fn regular(k: usize, radius: f64) -> Result<Self> {
        Self::ellipse(radius, radius, k)
    }

    pub fn unit_disk(k: usize) -> Result<Self> {
        Self::regular(k, 1.0)
    }

    /// `k`-gon inscribed in the ellipse `x²/a² + y²/b² = 1`.
    pub fn ellipse(a: f64, b: f64, k: usize) -> Result<Self> {
        if k < 3 || !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!("bad ellipse polygon a={a}, b={b}, k={k}")));
        }
        Self::new(
            (0..k)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / k as f64;
                    [a * t.cos(), b * t.sin()]
                })
                .collect(),
        )
    }

    /// Square of the given side centred at the origin.
    pub fn square(side: f64) -> Result<Self> {
        let h = 0.5 * side;
        Self::rectangle(-h, -h, h, h)
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::InvalidParameter(format!("empty rectangle [{x0},{x1}]x[{y0},{y1}]")));
        }
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    /// `(-1,1)² \ [0,1)²`, with the re-entrant corner at the origin.
    pub fn l_shape() -> Self {
        Self::new(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [-1.0, 1.0]])
            .expect("fixed L-shape is valid")
    }

    /// Builds one of the named domains: `unit_disk_<k>`, `disk_<k>(R)`,
    /// `ellipse_<k>(a,b)`, `square(side)`, `rect(x0,y0,x1,y1)` or `Lshape`.
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        let bad = || Error::InvalidParameter(format!("unknown domain {name:?}"));
        let (head, args) = match name.find('(') {
            Some(i) if name.ends_with(')') => (&name[..i], parse_args(&name[i + 1..name.len() - 1])?),
            Some(_) => return Err(bad()),
            None => (name, Vec::new()),
        };
        let count = |prefix: &str| -> Option<usize> { head.strip_prefix(prefix).and_then(|k| k.parse().ok()) };
        match (head, args.as_slice()) {
            ("Lshape" | "lshape", []) => Ok(Self::l_shape()),
            ("square", [side]) => Self::square(*side),
            ("rect", [x0, y0, x1, y1]) => Self::rectangle(*x0, *y0, *x1, *y1),
            (_, []) if count("unit_disk_").is_some() => Self::unit_disk(count("unit_disk_").unwrap()),
            (_, [r]) if count("disk_").is_some() => Self::regular(count("disk_").unwrap(), *r),
            (_, [a, b]) if count("ellipse_").is_some() => Self::ellipse(*a, *b, count("ellipse_").unwrap()),
            _ => Err(bad()),
        }
    }

    pub fn translated(&self, by: Point) -> Self {
        Self { vertices: self.vertices.iter().map(|v| [v[0] + by[0], v[1] + by[1]]).collect() }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.vertices.iter().map(|v| [v[0] * factor, v[1] * factor]).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(dist(*a, *b));
            }
        }
        d
    }

    /// Edges as `(start, end, outward unit normal, length)`.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point, Point, f64)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let (normal, len) = outward_normal(a, b);
            (a, b, normal, len)
        })
    }

    /// Minimum over edges of `⟨x_mid, ν⟩`; non-negative values certify
    /// star-shapedness with respect to the origin for convex polygons.
    pub fn star_shape_margin(&self) -> f64 {
        self.edges()
            .map(|(a, b, nu, _)| {
                let mid = midpoint(a, b);
                mid[0] * nu[0] + mid[1] * nu[1]
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryEdge {
    /// Endpoints in counter-clockwise order of the domain boundary.
    pub vertices: [usize; 2],
    pub normal: Point,
    pub length: f64,
    pub midpoint: Point,
    /// The single triangle containing this edge.
    pub triangle: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub h_max: f64,
    pub area: f64,
    pub min_angle_deg: f64,
}

/// Conforming triangulation with per-triangle P1 geometry precomputed.
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    on_boundary: Vec<bool>,
    neighbors: Vec<[Option<usize>; 3]>,
    areas: Vec<f64>,
    basis_grads: Vec<[Point; 3]>,
    h_max: f64,
}

impl TriMesh {
    /// Builds a mesh from raw parts. Triangles must be counter-clockwise with
    /// positive area and form a conforming (edge-to-edge) triangulation.
    pub fn from_parts(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        let mut areas = Vec::with_capacity(triangles.len());
        let mut basis_grads = Vec::with_capacity(triangles.len());
        let mut h_max = 0.0f64;
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(Error::DegenerateGeometry(format!("triangle {t} references a missing vertex")));
            }
            let [p0, p1, p2] = tri.map(|i| vertices[i]);
            let twice = orient(p0, p1, p2);
            if twice <= 0.0 {
                return Err(Error::DegenerateGeometry(format!("triangle {t} has non-positive area")));
            }
            areas.push(0.5 * twice);
            basis_grads.push([
                [(p1[1] - p2[1]) / twice, (p2[0] - p1[0]) / twice],
                [(p2[1] - p0[1]) / twice, (p0[0] - p2[0]) / twice],
                [(p0[1] - p1[1]) / twice, (p1[0] - p0[0]) / twice],
            ]);
            h_max = h_max.max(dist(p0, p1)).max(dist(p1, p2)).max(dist(p2, p0));
        }

        let mut edge_map: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(triangles.len() * 2);
        let mut neighbors = vec![[None; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                match edge_map.remove(&key) {
                    Some((u, m)) => {
                        neighbors[t][k] = Some(u);
                        neighbors[u][m] = Some(t);
                    }
                    None => {
                        edge_map.insert(key, (t, k));
                    }
                }
            }
        }
        let mut on_boundary = vec![false; nv];
        let mut boundary_edges = Vec::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                if neighbors[t][k].is_none() {
                    let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                    let (normal, length) = outward_normal(vertices[a], vertices[b]);
                    boundary_edges.push(BoundaryEdge {
                        vertices: [a, b],
                        normal,
                        length,
                        midpoint: midpoint(vertices[a], vertices[b]),
                        triangle: t,
                    });
                }
            }
        }
        Ok(Self { vertices, triangles, boundary_edges, on_boundary, neighbors, areas, basis_grads, h_max })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    /// Neighbour across the edge opposite local vertex `k`.
    pub fn neighbor(&self, t: usize, k: usize) -> Option<usize> {
        self.neighbors[t][k]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Gradients of the three barycentric basis functions on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> &[Point; 3] {
        &self.basis_grads[t]
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn total_area(&self) -> f64 {
        // pairwise-free summation is fine at these sizes; keep it ordered for reproducibility
        self.areas.iter().sum()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            vertices: self.n_vertices(),
            triangles: self.n_triangles(),
            boundary_edges: self.boundary_edges.len(),
            h_max: self.h_max,
            area: self.total_area(),
            min_angle_deg: self.min_angle().to_degrees(),
        }
    }

    pub fn min_angle(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| min_angle(t.map(|i| self.vertices[i])))
            .fold(f64::INFINITY, f64::min)
    }

    /// Red refinement: every triangle is split into four through its edge
    /// midpoints, so `h_max` halves exactly.
    pub fn refine_uniform(&self) -> TriMesh {
        let mut verts = self.vertices.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
            *mids.entry(edge_key(a, b)).or_insert_with(|| {
                verts.push(midpoint(verts[a], verts[b]));
                verts.len() - 1
            })
        };
        let mut tris = Vec::with_capacity(self.triangles.len() * 4);
        for &[i, j, k] in &self.triangles {
            let (ij, jk, ki) = (mid(i, j, &mut verts), mid(j, k, &mut verts), mid(k, i, &mut verts));
            tris.extend([[i, ij, ki], [ij, j, jk], [ki, jk, k], [ij, jk, ki]]);
        }
        TriMesh::from_parts(verts, tris).expect("red refinement preserves validity")
    }

    /// Midpoint-rule boundary integral `Σ density(edge) · length`.
    pub fn boundary_integral(&self, mut density: impl FnMut(&BoundaryEdge) -> f64) -> f64 {
        self.boundary_edges.iter().map(|e| density(e) * e.length).sum()
    }
}

/// Triangulates `poly` so that every edge is at most `target_h` long.
pub fn triangulate(poly: &Polygon, target_h: f64) -> Result<TriMesh> {
    if !(target_h > 0.0 && target_h < poly.diameter()) {
        return Err(Error::InvalidParameter(format!(
            "target_h must lie in (0, diameter = {}), got {target_h}",
            poly.diameter()
        )));
    }
    let mut verts: Vec<Point> = poly.vertices().to_vec();
    let mut tris = ear_clip(&verts)?;
    let boundary: Vec<bool> = vec![true; verts.len()];
    let mut fixed = boundary;
    let mut levels = vec![target_h];
    while levels[levels.len() - 1] < 0.25 * poly.diameter() {
        let coarser = 2.0 * levels[levels.len() - 1];
        levels.push(coarser);
    }
    for &h in levels.iter().rev().skip(1) {
        bisect_longest_edges(&mut verts, &mut tris, &mut fixed, h);
        for _ in 0..3 {
            delaunay_flips(&verts, &mut tris);
            smooth_interior(&mut verts, &tris, &fixed, 2);
        }
    }
    for _ in 0..4 {
        bisect_longest_edges(&mut verts, &mut tris, &mut fixed, target_h);
        for _ in 0..6 {
            delaunay_flips(&verts, &mut tris);
            smooth_interior(&mut verts, &tris, &fixed, 2);
        }
        delaunay_flips(&verts, &mut tris);
        if longest_edge(&verts, &tris) <= target_h {
            break;
        }
    }
    bisect_longest_edges(&mut verts, &mut tris, &mut fixed, target_h);
    TriMesh::from_parts(verts, tris)
}

fn ear_clip(poly: &[Point]) -> Result<Vec<[usize; 3]>> {
    let mut ring: Vec<usize> = (0..poly.len()).collect();
    let mut tris = Vec::with_capacity(poly.len() - 2);
    while ring.len() > 3 {
        let m = ring.len();
        let mut best: Option<(f64, usize)> = None;
        for i in 0..m {
            let (a, b, c) = (ring[(i + m - 1) % m], ring[i], ring[(i + 1) % m]);
            let (pa, pb, pc) = (poly[a], poly[b], poly[c]);
            if orient(pa, pb, pc) <= 0.0 {
                continue;
            }
            let blocked = ring
                .iter()
                .filter(|&&v| v != a && v != b && v != c)
                .any(|&v| point_in_closed_triangle(poly[v], pa, pb, pc));
            if blocked {
                continue;
            }
            let quality = min_angle([pa, pb, pc]);
            if best.map_or(true, |(q, _)| quality > q) {
                best = Some((quality, i));
            }
        }
        let (_, i) = best.ok_or_else(|| Error::DegenerateGeometry("ear clipping found no ear".into()))?;
        let m = ring.len();
        tris.push([ring[(i + m - 1) % m], ring[i], ring[(i + 1) % m]]);
        ring.remove(i);
    }
    if orient(poly[ring[0]], poly[ring[1]], poly[ring[2]]) <= 0.0 {
        return Err(Error::DegenerateGeometry("ear clipping left a degenerate triangle".into()));
    }
    tris.push([ring[0], ring[1], ring[2]]);
    Ok(tris)
}

/// Local index `k` of the vertex opposite the longest edge.
fn longest_local(verts: &[Point], t: &[usize; 3]) -> (usize, f64) {
    let mut best = (0, -1.0);
    for k in 0..3 {
        let len = dist(verts[t[(k + 1) % 3]], verts[t[(k + 2) % 3]]);
        if len > best.1 {
            best = (k, len);
        }
    }
    best
}

fn longest_edge(verts: &[Point], tris: &[[usize; 3]]) -> f64 {
    tris.iter().map(|t| longest_local(verts, t).1).fold(0.0, f64::max)
}

/// Conforming longest-edge bisection until every edge is at most `target`.
/// New vertices inherit `fixed = true` when they split a boundary edge.
fn bisect_longest_edges(verts: &mut Vec<Point>, tris: &mut Vec<[usize; 3]>, fixed: &mut Vec<bool>, target: f64) {
    loop {
        let longest: Vec<(usize, f64)> = tris.iter().map(|t| longest_local(verts, t)).collect();
        let edge_of = |t: &[usize; 3], k: usize| edge_key(t[(k + 1) % 3], t[(k + 2) % 3]);
        let mut marked: HashSet<(usize, usize)> = tris
            .iter()
            .zip(&longest)
            .filter(|(_, (_, len))| *len > target)
            .map(|(t, (k, _))| edge_of(t, *k))
            .collect();
        if marked.is_empty() {
            return;
        }
        loop {
            let mut changed = false;
            for (t, (k, _)) in tris.iter().zip(&longest) {
                let le = edge_of(t, *k);
                if !marked.contains(&le) && (0..3).any(|m| marked.contains(&edge_of(t, m))) {
                    marked.insert(le);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let boundary_edges = boundary_edge_set(tris);
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Point>, fixed: &mut Vec<bool>| -> usize {
            let key = edge_key(a, b);
            *mids.entry(key).or_insert_with(|| {
                verts.push(midpoint(verts[a], verts[b]));
                fixed.push(boundary_edges.contains(&key));
                verts.len() - 1
            })
        };
        let mut out = Vec::with_capacity(tris.len() * 2);
        for (t, (k, _)) in tris.iter().zip(&longest) {
            if !(0..3).any(|m| marked.contains(&edge_of(t, m))) {
                out.push(*t);
                continue;
            }
            // rotate so the longest edge is (j, l) opposite i
            let (i, j, l) = (t[*k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let m0 = mid(j, l, verts, fixed);
            if marked.contains(&edge_key(i, j)) {
                let q = mid(i, j, verts, fixed);
                out.push([i, q, m0]);
                out.push([q, j, m0]);
            } else {
                out.push([i, j, m0]);
            }
            if marked.contains(&edge_key(l, i)) {
                let r = mid(l, i, verts, fixed);
                out.push([i, m0, r]);
                out.push([r, m0, l]);
            } else {
                out.push([i, m0, l]);
            }
        }
        *tris = out;
    }
}

fn boundary_edge_set(tris: &[[usize; 3]]) -> HashSet<(usize, usize)> {
    let mut count: HashMap<(usize, usize), u8> = HashMap::with_capacity(tris.len() * 2);
    for t in tris {
        for k in 0..3 {
            *count.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    count.into_iter().filter(|(_, c)| *c == 1).map(|(e, _)| e).collect()
}

/// Lawson flips of interior edges until the triangulation is Delaunay.
fn delaunay_flips(verts: &[Point], tris: &mut [[usize; 3]]) {
    for _ in 0..200 {
        let mut edge_map: HashMap<(usize, usize), (usize, usize)> = HashMap::with_capacity(tris.len() * 2);
        let mut pairs = Vec::new();
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                let key = edge_key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                if let Some((u, m)) = edge_map.remove(&key) {
                    pairs.push((u, m, t, k));
                } else {
                    edge_map.insert(key, (t, k));
                }
            }
        }
        let mut touched = vec![false; tris.len()];
        let mut flipped = false;
        for (t, k, u, m) in pairs {
            if touched[t] || touched[u] {
                continue;
            }
            let (c, a, b) = (tris[t][k], tris[t][(k + 1) % 3], tris[t][(k + 2) % 3]);
            let d = tris[u][m];
            let (pa, pb, pc, pd) = (verts[a], verts[b], verts[c], verts[d]);
            if orient(pc, pa, pd) <= 0.0 || orient(pc, pd, pb) <= 0.0 {
                continue;
            }
            let scale = dist(pa, pb).powi(4);
            if incircle(pc, pa, pb, pd) > 1e-10 * scale {
                tris[t] = [c, a, d];
                tris[u] = [c, d, b];
                touched[t] = true;
                touched[u] = true;
                flipped = true;
            }
        }
        if !flipped {
            return;
        }
    }
}

fn smooth_interior(verts: &mut [Point], tris: &[[usize; 3]], fixed: &[bool], sweeps: usize) {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for (t, tri) in tris.iter().enumerate() {
        for &v in tri {
            incident[v].push(t);
        }
    }
    for _ in 0..sweeps {
        for v in 0..verts.len() {
            if fixed[v] || incident[v].is_empty() {
                continue;
            }
            let mut sum = [0.0, 0.0];
            let mut count = 0.0;
            for &t in &incident[v] {
                for &w in &tris[t] {
                    if w != v {
                        sum[0] += verts[w][0];
                        sum[1] += verts[w][1];
                        count += 1.0;
                    }
                }
            }
            let old = verts[v];
            let target = [sum[0] / count, sum[1] / count];
            let worst = |verts: &[Point]| {
                incident[v]
                    .iter()
                    .map(|&t| {
                        let p = tris[t].map(|i| verts[i]);
                        if orient(p[0], p[1], p[2]) > 0.0 { min_angle(p) } else { -1.0 }
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            let before = worst(verts);
            for step in [1.0, 0.5, 0.25] {
                verts[v] = [old[0] + step * (target[0] - old[0]), old[1] + step * (target[1] - old[1])];
                if worst(verts) > before {
                    break;
                }
                verts[v] = old;
            }
        }
    }
}

fn is_simple(v: &[Point]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_touch(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    // adjacent edges folding back onto each other
    (0..n).all(|i| {
        let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
        !(orient(a, b, c) == 0.0 && (a[0] - b[0]) * (c[0] - b[0]) + (a[1] - b[1]) * (c[1] - b[1]) > 0.0)
    })
}

fn segments_touch(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, c: Point| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    (d1 == 0.0 && on(q1, q2, p1))
        || (d2 == 0.0 && on(q1, q2, p2))
        || (d3 == 0.0 && on(p1, p2, q1))
        || (d4 == 0.0 && on(p1, p2, q2))
}

fn point_in_closed_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
}

/// Twice the signed area of `(a, b, c)`.
pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Positive when `d` lies inside the circumcircle of the counter-clockwise triangle `(a, b, c)`.
fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let (ad, bd, cd) = (adx * adx + ady * ady, bdx * bdx + bdy * bdy, cdx * cdx + cdy * cdy);
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

fn min_angle(p: [Point; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1])
        })
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b { (a, b) } else { (b, a) }
}

/// Outward normal of a counter-clockwise boundary edge `a → b`, and its length.
fn outward_normal(a: Point, b: Point) -> (Point, f64) {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len = dx.hypot(dy);
    ([dy / len, -dx / len], len)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn check_boundary_loops(m: &TriMesh) {
        let mut degree = vec![0usize; m.n_vertices()];
        for e in m.boundary_edges() {
            degree[e.vertices[0]] += 1;
            degree[e.vertices[1]] += 1;
            assert!((e.normal[0].hypot(e.normal[1]) - 1.0).abs() < 1e-14);
            // normal points away from the owning triangle
            let c = m.centroid(e.triangle);
            let out = (e.midpoint[0] - c[0]) * e.normal[0] + (e.midpoint[1] - c[1]) * e.normal[1];
            assert!(out > 0.0);
        }
        assert!(degree.iter().all(|&d| d == 0 || d == 2));
    }

    #[test]
    fn unit_square_area_and_h() {
        let poly = Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let m = triangulate(&poly, 0.5).unwrap();
        assert!(rel(m.total_area(), 1.0) < 1e-12);
        assert!(m.h_max() <= 0.5 * 1.5);
        check_boundary_loops(&m);
    }

    #[test]
    fn regular_64gon_area() {
        let poly = Polygon::unit_disk(64).unwrap();
        let want = 32.0 * (2.0 * PI / 64.0).sin();
        assert!((want - 3.136548).abs() < 1e-6);
        for h in [0.3, 0.1, 0.05, 0.02] {
            let m = triangulate(&poly, h).unwrap();
            assert!(rel(m.total_area(), want) < 1e-12);
            assert!(m.h_max() <= 1.5 * h);
            assert!(m.min_angle().to_degrees() > 14.0, "min angle {}", m.min_angle().to_degrees());
            check_boundary_loops(&m);
        }
    }

    #[test]
    fn uniform_refinement_halves_h() {
        let m0 = triangulate(&Polygon::l_shape(), 0.4).unwrap();
        let m1 = m0.refine_uniform();
        let m2 = m1.refine_uniform();
        for (a, b) in [(&m0, &m1), (&m1, &m2)] {
            let ratio = b.h_max() / a.h_max();
            assert!((ratio - 0.5).abs() <= 0.05, "{ratio}");
            assert!(rel(b.total_area(), a.total_area()) < 1e-12);
        }
        assert!(rel(m2.total_area(), 3.0) < 1e-12);
        check_boundary_loops(&m2);
    }

    #[test]
    fn star_shape_margins() {
        assert_eq!(Polygon::square(2.0).unwrap().star_shape_margin(), 1.0);
        assert_eq!(Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap().star_shape_margin(), 0.0);
        // notch corner at the origin: the re-entrant edges pass through it
        assert_eq!(Polygon::l_shape().star_shape_margin(), 0.0);
        // origin moved into the lower-right arm: the upper arm's inner edge faces away
        let shifted = Polygon::l_shape().translated([-0.5, 0.5]);
        assert_eq!(shifted.star_shape_margin(), -0.5);
    }

    #[test]
    fn boundary_integrals() {
        let unit = triangulate(&Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap(), 0.3).unwrap();
        assert!((unit.boundary_integral(|_| 1.0) - 4.0).abs() < 1e-12);
        let x_dot_nu = |e: &BoundaryEdge| e.midpoint[0] * e.normal[0] + e.midpoint[1] * e.normal[1];
        let sq = triangulate(&Polygon::square(2.0).unwrap(), 0.3).unwrap();
        assert!((sq.boundary_integral(x_dot_nu) - 8.0).abs() < 1e-12);
        let disk = triangulate(&Polygon::unit_disk(64).unwrap(), 0.2).unwrap();
        let want = 2.0 * 32.0 * (2.0 * PI / 64.0).sin();
        assert!((disk.boundary_integral(x_dot_nu) - want).abs() < 1e-12);
        assert!((want - 6.273097).abs() < 1e-6);
    }

    #[test]
    fn divergence_identity_on_any_polygon() {
        for poly in [Polygon::l_shape(), Polygon::ellipse(2.0, 1.0, 37).unwrap(), Polygon::l_shape().translated([0.3, -2.0])] {
            let m = triangulate(&poly, 0.25).unwrap();
            let lhs = m.boundary_integral(|e| e.midpoint[0] * e.normal[0] + e.midpoint[1] * e.normal[1]);
            assert!((lhs - 2.0 * poly.area()).abs() < 1e-12 * lhs.abs());
        }
    }

    #[test]
    fn rejects_bad_polygons() {
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(Polygon::new(bowtie), Err(Error::DegenerateGeometry(_))));
        assert!(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        let cw = Polygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(cw.area() > 0.0);
        assert!(triangulate(&Polygon::square(1.0).unwrap(), 5.0).is_err());
    }

    #[test]
    fn named_domains() {
        assert_eq!(Polygon::from_name("unit_disk_64").unwrap().vertices().len(), 64);
        assert_eq!(Polygon::from_name("square(2)").unwrap(), Polygon::square(2.0).unwrap());
        assert_eq!(Polygon::from_name("Lshape").unwrap(), Polygon::l_shape());
        assert!((Polygon::from_name("ellipse_64(2,1)").unwrap().area() - 2.0 * 3.136548).abs() < 1e-5);
        assert!((Polygon::from_name("rect(0,0,3.14159,3.14159)").unwrap().area() - 9.8696).abs() < 1e-3);
        assert!(Polygon::from_name("hexagon").is_err());
    }
}
