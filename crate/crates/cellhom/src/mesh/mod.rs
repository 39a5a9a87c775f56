//! Structured cut-cell meshing of the periodicity cell.
//!
//! The cell is covered by an `nx x ny` grid of square cells of size
//! `h = l2/n`. Cells fully inside the material become Q4 quadrilaterals,
//! cells fully inside a hole are dropped, and cells crossed by a hole
//! boundary are clipped against a polygonal approximation of the boundary
//! (4n segments per hole) and triangulated. Grid nodes within `0.3 h` of a
//! hole boundary are first projected onto it, which keeps cut triangles
//! away from degenerate shapes. Outer-boundary nodes are never moved, so
//! periodic pairing stays exact.

mod poly;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon_strict, CellGeometry, Point};
use poly::SubtractOutcome;

/// Slave/master node pair on the outer boundary; the slave coordinates are
/// `master + offset` exactly, with `offset` one of `(l1,0)`, `(0,l2)`,
/// `(l1,l2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicPair {
    pub slave: usize,
    pub master: usize,
    pub offset: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    Quad { nodes: [usize; 4], region: u16 },
    Tri { nodes: [usize; 3], region: u16 },
}

impl Element {
    pub fn nodes(&self) -> &[usize] {
        match self {
            Element::Quad { nodes, .. } => nodes,
            Element::Tri { nodes, .. } => nodes,
        }
    }

    pub fn region(&self) -> u16 {
        match self {
            Element::Quad { region, .. } | Element::Tri { region, .. } => *region,
        }
    }

    pub fn is_quad(&self) -> bool {
        matches!(self, Element::Quad { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub l1: f64,
    pub l2: f64,
    /// Nominal element size `l2 / n`.
    pub h: f64,
    pub n: usize,
    pub nodes: Vec<Point>,
    pub elements: Vec<Element>,
    pub periodic_pairs: Vec<PeriodicPair>,
    /// Nodes lying on a hole boundary (snapped grid nodes and cut points).
    pub hole_boundary_nodes: Vec<usize>,
    /// Region tag names; index 0 is the default material.
    pub region_names: Vec<String>,
    /// Number of grid nodes that were projected onto a hole boundary.
    pub snapped_node_count: usize,
}

/// Mesh quality summary.
#[derive(Debug, Clone)]
pub struct QualityReport {
    pub num_quads: usize,
    pub num_tris: usize,
    pub num_nodes: usize,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub max_aspect_ratio: f64,
    pub min_jacobian: f64,
    pub min_tri_area_over_h2: f64,
    pub total_area: f64,
    pub snapped_nodes: usize,
}

struct PointInterner {
    quantum: f64,
    map: HashMap<(i64, i64), usize>,
}

impl PointInterner {
    fn new(quantum: f64) -> Self {
        Self {
            quantum,
            map: HashMap::new(),
        }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        (
            (p[0] / self.quantum).round() as i64,
            (p[1] / self.quantum).round() as i64,
        )
    }

    fn find(&self, p: Point) -> Option<usize> {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(&id) = self.map.get(&(kx + dx, ky + dy)) {
                    return Some(id);
                }
            }
        }
        None
    }

    fn insert(&mut self, p: Point, id: usize) {
        self.map.insert(self.key(p), id);
    }

    fn get_or_insert(&mut self, p: Point, nodes: &mut Vec<Point>) -> usize {
        if let Some(id) = self.find(p) {
            return id;
        }
        let id = nodes.len();
        nodes.push(p);
        self.insert(p, id);
        id
    }
}

impl Mesh {
    /// Generates the mesh with `n` cells across the short side `l2`.
    ///
    /// `l1/l2` must be (nearly) a ratio of integers with denominator `n`;
    /// geometry validation runs first and aborts on any violation.
    pub fn generate(geometry: &CellGeometry, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::Mesh(format!("resolution n must be at least 8, got {n}")));
        }
        geometry.validate(128).into_result()?;
        let (l1, l2) = (geometry.l1, geometry.l2);
        let nx_f = n as f64 * l1 / l2;
        let nx = nx_f.round() as usize;
        if (nx_f - nx as f64).abs() > 1e-9 * n as f64 {
            return Err(Error::Mesh(format!(
                "n * l1/l2 = {nx_f} is not an integer; rescale the cell so l1/l2 is rational with a small denominator"
            )));
        }
        let ny = n;
        let h = l2 / ny as f64;

        // Grid nodes; boundary coordinates are exact multiples of the cell
        // sides so periodic pairs differ by exactly (l1, 0) etc.
        let node_id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes: Vec<Point> = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([i as f64 * l1 / nx as f64, j as f64 * l2 / ny as f64]);
            }
        }
        let grid_count = nodes.len();
        let is_outer = |i: usize, j: usize| i == 0 || j == 0 || i == nx || j == ny;

        let hole_polys: Vec<Vec<Point>> = geometry
            .holes
            .iter()
            .map(|hole| hole.boundary_polygon(4 * n))
            .collect();

        // Snap interior grid nodes within 0.3 h of a hole boundary onto it.
        let snap_tol = 0.3 * h;
        let mut snapped = vec![false; grid_count];
        let mut snap_best: Vec<(f64, Point)> = vec![(f64::INFINITY, [0.0, 0.0]); grid_count];
        for poly in &hole_polys {
            let (lo, hi) = poly_bbox(poly);
            let i_lo = (((lo[0] - h) / l1 * nx as f64).floor().max(0.0)) as usize;
            let i_hi = (((hi[0] + h) / l1 * nx as f64).ceil().min(nx as f64)) as usize;
            let j_lo = (((lo[1] - h) / l2 * ny as f64).floor().max(0.0)) as usize;
            let j_hi = (((hi[1] + h) / l2 * ny as f64).ceil().min(ny as f64)) as usize;
            for j in j_lo..=j_hi {
                for i in i_lo..=i_hi {
                    if is_outer(i, j) {
                        continue;
                    }
                    let id = node_id(i, j);
                    let p = nodes[id];
                    if let Some((d, proj)) = project_on_polygon(p, poly, snap_tol) {
                        if d < snap_best[id].0 {
                            snap_best[id] = (d, proj);
                        }
                    }
                }
            }
        }
        let mut snapped_node_count = 0usize;
        for id in 0..grid_count {
            if snap_best[id].0 <= snap_tol {
                nodes[id] = snap_best[id].1;
                snapped[id] = true;
                snapped_node_count += 1;
            }
        }

        // Node material state against the polygonalized holes (consistent
        // with the cutting below). Snapped nodes sit on the boundary and
        // count as material.
        let mut in_hole = vec![false; grid_count];
        for poly in &hole_polys {
            let (lo, hi) = poly_bbox(poly);
            for j in 0..=ny {
                for i in 0..=nx {
                    let id = node_id(i, j);
                    if snapped[id] || in_hole[id] {
                        continue;
                    }
                    let p = nodes[id];
                    if p[0] < lo[0] || p[0] > hi[0] || p[1] < lo[1] || p[1] > hi[1] {
                        continue;
                    }
                    if point_in_polygon_strict(p, poly, 1e-12 * h) {
                        in_hole[id] = true;
                    }
                }
            }
        }

        // Bin hole segments into the grid cells their (inflated) bounding
        // boxes touch, to know which cells need cutting and by which holes.
        let mut cell_holes: Vec<Vec<u16>> = vec![Vec::new(); nx * ny];
        for (hi_idx, poly) in hole_polys.iter().enumerate() {
            let np = poly.len();
            for s in 0..np {
                let (a, b) = (poly[s], poly[(s + 1) % np]);
                let pad = 0.1 * h;
                let x_lo = (a[0].min(b[0]) - pad).max(0.0);
                let x_hi = (a[0].max(b[0]) + pad).min(l1);
                let y_lo = (a[1].min(b[1]) - pad).max(0.0);
                let y_hi = (a[1].max(b[1]) + pad).min(l2);
                let ci_lo = ((x_lo / l1 * nx as f64).floor() as usize).min(nx - 1);
                let ci_hi = ((x_hi / l1 * nx as f64).floor() as usize).min(nx - 1);
                let cj_lo = ((y_lo / l2 * ny as f64).floor() as usize).min(ny - 1);
                let cj_hi = ((y_hi / l2 * ny as f64).floor() as usize).min(ny - 1);
                for cj in cj_lo..=cj_hi {
                    for ci in ci_lo..=ci_hi {
                        let cell = cj * nx + ci;
                        if cell_holes[cell].last() != Some(&(hi_idx as u16)) {
                            cell_holes[cell].push(hi_idx as u16);
                        }
                    }
                }
            }
        }

        let mut interner = PointInterner::new(1e-6 * h);
        for (id, p) in nodes.iter().enumerate() {
            interner.insert(*p, id);
        }

        let mut region_names = vec!["default".to_string()];
        for r in &geometry.regions {
            region_names.push(r.tag.clone());
        }
        let region_of = |centroid: Point| geometry.region_index(centroid) as u16;

        let mut elements: Vec<Element> = Vec::with_capacity(nx * ny);
        let mut hole_boundary: Vec<usize> = Vec::new();
        for cj in 0..ny {
            for ci in 0..nx {
                let ids = [
                    node_id(ci, cj),
                    node_id(ci + 1, cj),
                    node_id(ci + 1, cj + 1),
                    node_id(ci, cj + 1),
                ];
                let corners: Vec<Point> = ids.iter().map(|&id| nodes[id]).collect();
                let holes_here = &cell_holes[cj * nx + ci];
                if holes_here.is_empty() {
                    let any_in = ids.iter().any(|&id| in_hole[id]);
                    let all_in = ids.iter().all(|&id| in_hole[id]);
                    if all_in {
                        continue;
                    }
                    if any_in {
                        return Err(Error::Mesh(format!(
                            "cell ({ci},{cj}) mixes hole and material corners with no boundary segment nearby"
                        )));
                    }
                    let centroid = quad_centroid(&corners);
                    elements.push(Element::Quad {
                        nodes: ids,
                        region: region_of(centroid),
                    });
                    continue;
                }

                // Cut the cell against each hole in turn.
                let mut loops: Vec<Vec<Point>> = vec![corners.clone()];
                let mut untouched = true;
                for &hidx in holes_here {
                    let hole_poly = &hole_polys[hidx as usize];
                    let mut next: Vec<Vec<Point>> = Vec::new();
                    for lp in &loops {
                        match poly::subtract(lp, hole_poly, h).map_err(|e| {
                            Error::Mesh(format!("cell ({ci},{cj}): {e}"))
                        })? {
                            SubtractOutcome::Unchanged => next.push(lp.clone()),
                            SubtractOutcome::Empty => {
                                untouched = false;
                            }
                            SubtractOutcome::Clipped(ls) => {
                                untouched = false;
                                next.extend(ls);
                            }
                        }
                    }
                    loops = next;
                    if loops.is_empty() {
                        break;
                    }
                }
                if untouched {
                    if !loops.is_empty() {
                        let centroid = quad_centroid(&corners);
                        elements.push(Element::Quad {
                            nodes: ids,
                            region: region_of(centroid),
                        });
                    }
                    continue;
                }
                for lp in &loops {
                    let tris = poly::triangulate(lp, h)
                        .map_err(|e| Error::Mesh(format!("cell ({ci},{cj}): {e}")))?;
                    let loop_ids: Vec<usize> = lp
                        .iter()
                        .map(|&p| {
                            let id = interner.get_or_insert(p, &mut nodes);
                            if id >= grid_count {
                                hole_boundary.push(id);
                            }
                            id
                        })
                        .collect();
                    for t in tris {
                        let tri_nodes = [loop_ids[t[0]], loop_ids[t[1]], loop_ids[t[2]]];
                        if tri_nodes[0] == tri_nodes[1]
                            || tri_nodes[1] == tri_nodes[2]
                            || tri_nodes[0] == tri_nodes[2]
                        {
                            continue;
                        }
                        let pa = nodes[tri_nodes[0]];
                        let pb = nodes[tri_nodes[1]];
                        let pc = nodes[tri_nodes[2]];
                        let area = 0.5
                            * ((pb[0] - pa[0]) * (pc[1] - pa[1])
                                - (pb[1] - pa[1]) * (pc[0] - pa[0]));
                        if area <= 1e-12 * h * h {
                            continue;
                        }
                        if area < 1e-6 * h * h {
                            return Err(Error::Mesh(format!(
                                "cell ({ci},{cj}) produced a degenerate triangle (area {:.3e} h^2)",
                                area / (h * h)
                            )));
                        }
                        let centroid = [
                            (pa[0] + pb[0] + pc[0]) / 3.0,
                            (pa[1] + pb[1] + pc[1]) / 3.0,
                        ];
                        elements.push(Element::Tri {
                            nodes: tri_nodes,
                            region: region_of(centroid),
                        });
                    }
                }
            }
        }

        // Snapped grid nodes are hole-boundary nodes too.
        for id in 0..grid_count {
            if snapped[id] {
                hole_boundary.push(id);
            }
        }

        // Prune nodes not referenced by any element.
        let mut used = vec![false; nodes.len()];
        for e in &elements {
            for &nid in e.nodes() {
                used[nid] = true;
            }
        }
        let mut remap = vec![usize::MAX; nodes.len()];
        let mut kept_nodes = Vec::with_capacity(nodes.len());
        for (old, &u) in used.iter().enumerate() {
            if u {
                remap[old] = kept_nodes.len();
                kept_nodes.push(nodes[old]);
            }
        }
        for e in &mut elements {
            match e {
                Element::Quad { nodes: ns, .. } => {
                    for nid in ns.iter_mut() {
                        *nid = remap[*nid];
                    }
                }
                Element::Tri { nodes: ns, .. } => {
                    for nid in ns.iter_mut() {
                        *nid = remap[*nid];
                    }
                }
            }
        }
        let mut hole_boundary: Vec<usize> = hole_boundary
            .into_iter()
            .filter(|&id| used[id])
            .map(|id| remap[id])
            .collect();
        hole_boundary.sort_unstable();
        hole_boundary.dedup();

        // Periodic pairs: right edge (without the top-right corner) pairs
        // to the left edge, top edge (without the top-right corner) to the
        // bottom edge, and the top-right corner to the origin. All corner
        // slaves resolve to the single master at (0, 0).
        let mut periodic_pairs = Vec::with_capacity(nx + ny + 1);
        for j in 0..ny {
            let (s, m) = (node_id(nx, j), node_id(0, j));
            if used[s] != used[m] {
                return Err(Error::Mesh(
                    "periodic pairing hit a pruned boundary node".to_string(),
                ));
            }
            if used[s] {
                periodic_pairs.push(PeriodicPair {
                    slave: remap[s],
                    master: remap[m],
                    offset: [l1, 0.0],
                });
            }
        }
        for i in 0..nx {
            let (s, m) = (node_id(i, ny), node_id(i, 0));
            if used[s] != used[m] {
                return Err(Error::Mesh(
                    "periodic pairing hit a pruned boundary node".to_string(),
                ));
            }
            if used[s] {
                periodic_pairs.push(PeriodicPair {
                    slave: remap[s],
                    master: remap[m],
                    offset: [0.0, l2],
                });
            }
        }
        {
            let (s, m) = (node_id(nx, ny), node_id(0, 0));
            if used[s] {
                periodic_pairs.push(PeriodicPair {
                    slave: remap[s],
                    master: remap[m],
                    offset: [l1, l2],
                });
            }
        }

        let mesh = Mesh {
            l1,
            l2,
            h,
            n,
            nodes: kept_nodes,
            elements,
            periodic_pairs,
            hole_boundary_nodes: hole_boundary,
            region_names,
            snapped_node_count,
        };
        mesh.check_jacobians()?;
        Ok(mesh)
    }

    fn check_jacobians(&self) -> Result<()> {
        for (idx, e) in self.elements.iter().enumerate() {
            match e {
                Element::Quad { nodes, .. } => {
                    let c: Vec<Point> = nodes.iter().map(|&i| self.nodes[i]).collect();
                    let g = 1.0 / 3.0_f64.sqrt();
                    for &(xi, eta) in &[(-g, -g), (g, -g), (g, g), (-g, g)] {
                        if quad_jacobian(&c, xi, eta) <= 0.0 {
                            return Err(Error::Mesh(format!(
                                "element {idx}: non-positive quad Jacobian"
                            )));
                        }
                    }
                }
                Element::Tri { nodes, .. } => {
                    let a = self.nodes[nodes[0]];
                    let b = self.nodes[nodes[1]];
                    let c = self.nodes[nodes[2]];
                    let area =
                        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
                    if area <= 0.0 {
                        return Err(Error::Mesh(format!(
                            "element {idx}: non-positive triangle area"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn element_coords(&self, e: &Element) -> Vec<Point> {
        e.nodes().iter().map(|&i| self.nodes[i]).collect()
    }

    pub fn element_area(&self, e: &Element) -> f64 {
        let c = self.element_coords(e);
        let n = c.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = c[i];
            let b = c[(i + 1) % n];
            acc += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * acc
    }

    /// Total mesh area (sum of element areas).
    pub fn area(&self) -> f64 {
        self.elements.iter().map(|e| self.element_area(e)).sum()
    }

    pub fn num_quads(&self) -> usize {
        self.elements.iter().filter(|e| e.is_quad()).count()
    }

    pub fn num_tris(&self) -> usize {
        self.elements.len() - self.num_quads()
    }

    /// Nodes on the outer rectangle boundary.
    pub fn outer_boundary_nodes(&self) -> Vec<usize> {
        let tol = 1e-9 * self.h;
        (0..self.nodes.len())
            .filter(|&i| {
                let p = self.nodes[i];
                p[0].abs() < tol
                    || (p[0] - self.l1).abs() < tol
                    || p[1].abs() < tol
                    || (p[1] - self.l2).abs() < tol
            })
            .collect()
    }

    pub fn quality_report(&self) -> QualityReport {
        let mut min_angle = f64::INFINITY;
        let mut max_angle: f64 = 0.0;
        let mut max_aspect: f64 = 0.0;
        let mut min_jac = f64::INFINITY;
        let mut min_tri_area = f64::INFINITY;
        for e in &self.elements {
            let c = self.element_coords(e);
            let k = c.len();
            let mut edges = Vec::with_capacity(k);
            for i in 0..k {
                let a = c[i];
                let b = c[(i + 1) % k];
                edges.push(((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt());
            }
            let lmax = edges.iter().cloned().fold(0.0, f64::max);
            let lmin = edges.iter().cloned().fold(f64::INFINITY, f64::min);
            max_aspect = max_aspect.max(lmax / lmin);
            for i in 0..k {
                let prev = c[(i + k - 1) % k];
                let cur = c[i];
                let next = c[(i + 1) % k];
                let u = [prev[0] - cur[0], prev[1] - cur[1]];
                let v = [next[0] - cur[0], next[1] - cur[1]];
                let dot = u[0] * v[0] + u[1] * v[1];
                let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
                let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
                let ang = (dot / (nu * nv)).clamp(-1.0, 1.0).acos().to_degrees();
                min_angle = min_angle.min(ang);
                max_angle = max_angle.max(ang);
            }
            match e {
                Element::Quad { .. } => {
                    let g = 1.0 / 3.0_f64.sqrt();
                    for &(xi, eta) in &[(-g, -g), (g, -g), (g, g), (-g, g)] {
                        min_jac = min_jac.min(quad_jacobian(&c, xi, eta));
                    }
                }
                Element::Tri { .. } => {
                    let area = self.element_area(e);
                    min_tri_area = min_tri_area.min(area);
                    min_jac = min_jac.min(2.0 * area);
                }
            }
        }
        if self.num_tris() == 0 {
            min_tri_area = f64::NAN;
        }
        QualityReport {
            num_quads: self.num_quads(),
            num_tris: self.num_tris(),
            num_nodes: self.nodes.len(),
            min_angle_deg: min_angle,
            max_angle_deg: max_angle,
            max_aspect_ratio: max_aspect,
            min_jacobian: min_jac,
            min_tri_area_over_h2: min_tri_area / (self.h * self.h),
            total_area: self.area(),
            snapped_nodes: self.snapped_node_count,
        }
    }

    /// Scans conformity: every element edge is shared by at most two
    /// elements and always with identical endpoints.
    pub fn check_conformity(&self) -> Result<()> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.elements {
            let ns = e.nodes();
            let k = ns.len();
            for i in 0..k {
                let (a, b) = (ns[i], ns[(i + 1) % k]);
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        for (&(a, b), &cnt) in &edge_count {
            if cnt > 2 {
                return Err(Error::Mesh(format!(
                    "edge ({a},{b}) shared by {cnt} elements"
                )));
            }
        }
        Ok(())
    }
}

fn poly_bbox(poly: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in poly {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

fn quad_centroid(c: &[Point]) -> Point {
    [
        (c[0][0] + c[1][0] + c[2][0] + c[3][0]) / 4.0,
        (c[0][1] + c[1][1] + c[2][1] + c[3][1]) / 4.0,
    ]
}

/// Jacobian determinant of the bilinear map at reference point (xi, eta).
pub(crate) fn quad_jacobian(c: &[Point], xi: f64, eta: f64) -> f64 {
    let dn_dxi = [
        -0.25 * (1.0 - eta),
        0.25 * (1.0 - eta),
        0.25 * (1.0 + eta),
        -0.25 * (1.0 + eta),
    ];
    let dn_deta = [
        -0.25 * (1.0 - xi),
        -0.25 * (1.0 + xi),
        0.25 * (1.0 + xi),
        0.25 * (1.0 - xi),
    ];
    let mut j = [[0.0; 2]; 2];
    for k in 0..4 {
        j[0][0] += dn_dxi[k] * c[k][0];
        j[0][1] += dn_dxi[k] * c[k][1];
        j[1][0] += dn_deta[k] * c[k][0];
        j[1][1] += dn_deta[k] * c[k][1];
    }
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

fn project_on_polygon(p: Point, poly: &[Point], max_dist: f64) -> Option<(f64, Point)> {
    let n = poly.len();
    let mut best: Option<(f64, Point)> = None;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        // Cheap reject by segment bbox.
        if p[0] < a[0].min(b[0]) - max_dist
            || p[0] > a[0].max(b[0]) + max_dist
            || p[1] < a[1].min(b[1]) - max_dist
            || p[1] > a[1].max(b[1]) + max_dist
        {
            continue;
        }
        let ab = [b[0] - a[0], b[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
        };
        let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
        let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        if d <= max_dist && best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, q));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellGeometry;

    #[test]
    fn homogeneous_unit_cell_counts() {
        let g = CellGeometry::new(1.0, 1.0, vec![]).unwrap();
        let mesh = Mesh::generate(&g, 8).unwrap();
        assert_eq!(mesh.nodes.len(), 81);
        assert_eq!(mesh.elements.len(), 64);
        assert_eq!(mesh.num_quads(), 64);
        // 8 + 8 + 1 periodic pairs; slaves include the three non-master
        // corners, all resolving to the origin master.
        assert_eq!(mesh.periodic_pairs.len(), 17);
        assert!((mesh.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_pair_offsets_are_exact() {
        let g = CellGeometry::reference_cell();
        let mesh = Mesh::generate(&g, 8).unwrap();
        for p in &mesh.periodic_pairs {
            let s = mesh.nodes[p.slave];
            let m = mesh.nodes[p.master];
            assert_eq!(s[0], m[0] + p.offset[0]);
            assert_eq!(s[1], m[1] + p.offset[1]);
            assert!(
                (p.offset == [2.0, 0.0]) || (p.offset == [0.0, 1.0]) || (p.offset == [2.0, 1.0])
            );
        }
        // Every outer boundary node is a master or a slave of exactly one
        // pair.
        let outer = mesh.outer_boundary_nodes();
        let mut seen: Vec<usize> = mesh.periodic_pairs.iter().map(|p| p.slave).collect();
        seen.extend(mesh.periodic_pairs.iter().map(|p| p.master));
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen, outer);
        let mut slaves: Vec<usize> = mesh.periodic_pairs.iter().map(|p| p.slave).collect();
        slaves.sort_unstable();
        let before = slaves.len();
        slaves.dedup();
        assert_eq!(before, slaves.len(), "a slave appears in two pairs");
    }

    #[test]
    fn reference_cell_area_convergence() {
        let g = CellGeometry::reference_cell();
        let exact = g.material_area().unwrap();
        let mesh64 = Mesh::generate(&g, 64).unwrap();
        assert!(
            (mesh64.area() - exact).abs() < 1e-3,
            "area error {:.2e}",
            (mesh64.area() - exact).abs()
        );
        let e8 = (Mesh::generate(&g, 8).unwrap().area() - exact).abs();
        let e16 = (Mesh::generate(&g, 16).unwrap().area() - exact).abs();
        let ratio = e8 / e16;
        assert!(
            ratio > 2.5,
            "area convergence ratio {ratio:.2} below second order (e8 = {e8:.3e}, e16 = {e16:.3e})"
        );
    }

    #[test]
    fn reference_cell_mesh_is_conforming() {
        let g = CellGeometry::reference_cell();
        for n in [8, 16] {
            let mesh = Mesh::generate(&g, n).unwrap();
            mesh.check_conformity().unwrap();
            let q = mesh.quality_report();
            assert!(q.min_jacobian > 0.0);
            assert!(q.num_tris > 0);
            assert!(
                q.min_tri_area_over_h2 > 1e-4,
                "min tri area {:.3e} h^2",
                q.min_tri_area_over_h2
            );
            assert!(q.min_angle_deg > 10.0, "min angle {:.2}", q.min_angle_deg);
        }
    }

    #[test]
    fn homogeneous_quality_all_right_angles() {
        let g = CellGeometry::new(1.0, 1.0, vec![]).unwrap();
        let q = Mesh::generate(&g, 8).unwrap().quality_report();
        assert!((q.min_angle_deg - 90.0).abs() < 1e-9);
        assert!((q.max_angle_deg - 90.0).abs() < 1e-9);
        assert!(q.num_tris == 0);
    }

    #[test]
    fn rejects_irrational_aspect() {
        let g = CellGeometry::new(1.37, 1.0, vec![]).unwrap();
        assert!(Mesh::generate(&g, 8).is_err());
        // 1.25 works at n = 8 (nx = 10).
        let g = CellGeometry::new(1.25, 1.0, vec![]).unwrap();
        assert!(Mesh::generate(&g, 8).is_ok());
    }

    #[test]
    fn rejects_low_resolution() {
        let g = CellGeometry::reference_cell();
        assert!(Mesh::generate(&g, 4).is_err());
    }

    #[test]
    fn region_tags_assigned_by_centroid() {
        use crate::geometry::{Region, RegionShape};
        let g = CellGeometry::reference_cell().with_regions(vec![Region {
            shape: RegionShape::Annulus {
                center: [1.0, 0.5],
                inner_radius: 0.25,
                outer_radius: 0.4,
            },
            tag: "ring".to_string(),
        }]);
        let mesh = Mesh::generate(&g, 16).unwrap();
        assert_eq!(mesh.region_names, vec!["default", "ring"]);
        let ring_area: f64 = mesh
            .elements
            .iter()
            .filter(|e| e.region() == 1)
            .map(|e| mesh.element_area(e))
            .sum();
        let exact = std::f64::consts::PI * (0.4 * 0.4 - 0.25 * 0.25);
        // Centroid classification is O(h) accurate on the ring band.
        assert!(
            (ring_area - exact).abs() < 0.15 * exact,
            "ring area {ring_area} vs {exact}"
        );
    }

    #[test]
    fn hole_boundary_nodes_lie_on_circle() {
        let g = CellGeometry::reference_cell();
        let mesh = Mesh::generate(&g, 16).unwrap();
        assert!(!mesh.hole_boundary_nodes.is_empty());
        for &id in &mesh.hole_boundary_nodes {
            let p = mesh.nodes[id];
            let r = ((p[0] - 1.0).powi(2) + (p[1] - 0.5).powi(2)).sqrt();
            // Nodes sit on the polygonal approximation of the circle.
            assert!(
                (r - 0.25).abs() < 1e-3,
                "hole boundary node at radius {r}"
            );
        }
    }
}
