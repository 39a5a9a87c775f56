//! Periodicity-cell geometry: a rectangle with holes and optional material
//! regions, plus the validation queries the mesher depends on.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Distance from `p` to the segment `a-b`.
pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Strict point-in-polygon test by crossing number; points on the boundary
/// (within `eps`) count as outside.
pub(crate) fn point_in_polygon_strict(p: Point, poly: &[Point], eps: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        if point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= eps {
            return false;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi[1] > p[1]) != (pj[1] > p[1]) {
            let x = pi[0] + (p[1] - pi[1]) / (pj[1] - pi[1]) * (pj[0] - pi[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Signed polygon area (positive for counterclockwise orientation).
pub(crate) fn polygon_signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

/// A perforation of the cell. The material is everything outside the holes;
/// hole boundaries themselves count as material.
#[derive(Debug, Clone, PartialEq)]
pub enum Hole {
    Circle {
        center: Point,
        radius: f64,
    },
    Ellipse {
        center: Point,
        semi_axes: [f64; 2],
        /// Rotation of the first semi-axis against the x1 axis, radians.
        rotation: f64,
    },
    /// Simple polygon, counterclockwise vertex order.
    Polygon { vertices: Vec<Point> },
}

impl Hole {
    /// Strictly inside the hole (boundary excluded).
    pub fn contains_strict(&self, p: Point) -> bool {
        match self {
            Hole::Circle { center, radius } => dist(p, *center) < *radius,
            Hole::Ellipse {
                center,
                semi_axes,
                rotation,
            } => {
                let (c, s) = (rotation.cos(), rotation.sin());
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let u = (c * dx + s * dy) / semi_axes[0];
                let v = (-s * dx + c * dy) / semi_axes[1];
                u * u + v * v < 1.0
            }
            Hole::Polygon { vertices } => {
                let scale = self.bbox_diameter().max(1e-300);
                point_in_polygon_strict(p, vertices, 1e-14 * scale)
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Hole::Circle { radius, .. } => std::f64::consts::PI * radius * radius,
            Hole::Ellipse { semi_axes, .. } => {
                std::f64::consts::PI * semi_axes[0] * semi_axes[1]
            }
            Hole::Polygon { vertices } => polygon_signed_area(vertices).abs(),
        }
    }

    pub fn bbox(&self) -> [Point; 2] {
        match self {
            Hole::Circle { center, radius } => [
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ],
            Hole::Ellipse {
                center,
                semi_axes,
                rotation,
            } => {
                let (c, s) = (rotation.cos(), rotation.sin());
                let ex = ((semi_axes[0] * c).powi(2) + (semi_axes[1] * s).powi(2)).sqrt();
                let ey = ((semi_axes[0] * s).powi(2) + (semi_axes[1] * c).powi(2)).sqrt();
                [[center[0] - ex, center[1] - ey], [center[0] + ex, center[1] + ey]]
            }
            Hole::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for d in 0..2 {
                        lo[d] = lo[d].min(v[d]);
                        hi[d] = hi[d].max(v[d]);
                    }
                }
                [lo, hi]
            }
        }
    }

    fn bbox_diameter(&self) -> f64 {
        let [lo, hi] = self.bbox();
        dist(lo, hi)
    }

    /// Counterclockwise polygonal approximation of the boundary with at
    /// least `segments` pieces (polygon holes return their own vertices).
    pub fn boundary_polygon(&self, segments: usize) -> Vec<Point> {
        let segments = segments.max(8);
        match self {
            Hole::Circle { center, radius } => (0..segments)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
                    [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect(),
            Hole::Ellipse {
                center,
                semi_axes,
                rotation,
            } => {
                let (c, s) = (rotation.cos(), rotation.sin());
                (0..segments)
                    .map(|i| {
                        let t = 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
                        let u = semi_axes[0] * t.cos();
                        let v = semi_axes[1] * t.sin();
                        [center[0] + c * u - s * v, center[1] + s * u + c * v]
                    })
                    .collect()
            }
            Hole::Polygon { vertices } => {
                let mut v = vertices.clone();
                if polygon_signed_area(&v) < 0.0 {
                    v.reverse();
                }
                v
            }
        }
    }

    /// Distance from a point to the hole boundary (polygonalized for
    /// ellipses and polygons; exact for circles).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self {
            Hole::Circle { center, radius } => (dist(p, *center) - radius).abs(),
            _ => {
                let poly = self.boundary_polygon(256);
                let n = poly.len();
                (0..n)
                    .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    fn structural_violations(&self, idx: usize, out: &mut Vec<String>) {
        match self {
            Hole::Circle { radius, .. } => {
                if !(*radius > 0.0) {
                    out.push(format!("hole {idx}: circle radius must be positive, got {radius}"));
                }
            }
            Hole::Ellipse { semi_axes, .. } => {
                if !(semi_axes[0] > 0.0 && semi_axes[1] > 0.0) {
                    out.push(format!(
                        "hole {idx}: ellipse semi-axes must be positive, got {semi_axes:?}"
                    ));
                }
            }
            Hole::Polygon { vertices } => {
                if vertices.len() < 3 {
                    out.push(format!("hole {idx}: polygon needs at least 3 vertices"));
                    return;
                }
                let area = polygon_signed_area(vertices);
                if area.abs() < 1e-300 {
                    out.push(format!("hole {idx}: polygon is degenerate (zero area)"));
                }
                if area < 0.0 {
                    out.push(format!(
                        "hole {idx}: polygon vertices must be counterclockwise"
                    ));
                }
                if !polygon_is_simple(vertices) {
                    out.push(format!("hole {idx}: polygon is self-intersecting"));
                }
            }
        }
    }
}

fn segments_properly_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn polygon_is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            // Adjacent edges share an endpoint; skip them.
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_properly_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Shape of a material region with its own moduli.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionShape {
    Circle {
        center: Point,
        radius: f64,
    },
    Ellipse {
        center: Point,
        semi_axes: [f64; 2],
        rotation: f64,
    },
    Polygon {
        vertices: Vec<Point>,
    },
    Annulus {
        center: Point,
        inner_radius: f64,
        outer_radius: f64,
    },
}

impl RegionShape {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            RegionShape::Circle { center, radius } => dist(p, *center) <= *radius,
            RegionShape::Ellipse {
                center,
                semi_axes,
                rotation,
            } => Hole::Ellipse {
                center: *center,
                semi_axes: *semi_axes,
                rotation: *rotation,
            }
            .contains_strict(p),
            RegionShape::Polygon { vertices } => {
                point_in_polygon_strict(p, vertices, 0.0)
            }
            RegionShape::Annulus {
                center,
                inner_radius,
                outer_radius,
            } => {
                let r = dist(p, *center);
                r >= *inner_radius && r <= *outer_radius
            }
        }
    }
}

/// Material region: first matching region (in list order) decides the
/// moduli tag of a point; points matching none carry the default tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub shape: RegionShape,
    pub tag: String,
}

/// Rectangular periodicity cell `(0, l1) x (0, l2)` with holes.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub l1: f64,
    pub l2: f64,
    pub holes: Vec<Hole>,
    pub regions: Vec<Region>,
    /// Minimum admissible distance between a hole and the cell boundary or
    /// another hole. Defaults to `l2 / 64`.
    pub min_clearance: f64,
}

/// Outcome of [`CellGeometry::validate`]; an empty violation list means the
/// geometry is usable.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Geometry(self.violations.join("; ")))
        }
    }
}

impl CellGeometry {
    pub fn new(l1: f64, l2: f64, holes: Vec<Hole>) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::Geometry(format!(
                "cell sides must be positive, got l1 = {l1}, l2 = {l2}"
            )));
        }
        Ok(Self {
            l1,
            l2,
            holes,
            regions: Vec::new(),
            min_clearance: l2 / 64.0,
        })
    }

    pub fn with_regions(mut self, regions: Vec<Region>) -> Self {
        self.regions = regions;
        self
    }

    /// The reference cell used in the numerical example: a `2 x 1`
    /// rectangle with a circular hole of radius `1/4` in the center.
    pub fn reference_cell() -> Self {
        Self::new(
            2.0,
            1.0,
            vec![Hole::Circle {
                center: [1.0, 0.5],
                radius: 0.25,
            }],
        )
        .expect("reference cell is valid")
    }

    pub fn cell_area(&self) -> f64 {
        self.l1 * self.l2
    }

    /// True iff `p` lies outside every hole; hole boundaries count as
    /// material.
    pub fn contains_material(&self, p: Point) -> bool {
        self.holes.iter().all(|h| !h.contains_strict(p))
    }

    /// Region tag index of a point: `0` for the default material, `i + 1`
    /// for the first matching entry of `regions`.
    pub fn region_index(&self, p: Point) -> usize {
        for (i, r) in self.regions.iter().enumerate() {
            if r.shape.contains(p) {
                return i + 1;
            }
        }
        0
    }

    /// Analytic material area `l1*l2 - sum of hole areas`.
    ///
    /// Errors if any two holes overlap (their areas would double-count).
    pub fn material_area(&self) -> Result<f64> {
        for i in 0..self.holes.len() {
            for j in (i + 1)..self.holes.len() {
                if self.holes_too_close(i, j, 0.0) {
                    return Err(Error::Geometry(format!(
                        "holes {i} and {j} overlap; material area is undefined"
                    )));
                }
            }
        }
        Ok(self.cell_area() - self.holes.iter().map(Hole::area).sum::<f64>())
    }

    fn holes_too_close(&self, i: usize, j: usize, clearance: f64) -> bool {
        let (a, b) = (&self.holes[i], &self.holes[j]);
        if let (Hole::Circle { center: ca, radius: ra }, Hole::Circle { center: cb, radius: rb }) =
            (a, b)
        {
            return dist(*ca, *cb) < ra + rb + clearance;
        }
        // Polygonalized test: boundary-to-boundary distance plus an
        // inside-ness check for full containment.
        let pa = a.boundary_polygon(128);
        let pb = b.boundary_polygon(128);
        let mut min_d = f64::INFINITY;
        for &p in &pa {
            let n = pb.len();
            for k in 0..n {
                min_d = min_d.min(point_segment_distance(p, pb[k], pb[(k + 1) % n]));
            }
        }
        if min_d < clearance {
            return true;
        }
        a.contains_strict(pb[0]) || b.contains_strict(pa[0])
    }

    fn hole_boundary_clearance(&self, hole: &Hole) -> f64 {
        let [lo, hi] = hole.bbox();
        let d_left = lo[0];
        let d_right = self.l1 - hi[0];
        let d_bottom = lo[1];
        let d_top = self.l2 - hi[1];
        d_left.min(d_right).min(d_bottom).min(d_top)
    }

    /// Runs all geometric checks and a pixel-grid connectivity test.
    ///
    /// The flood fill uses a `round(pixel_n*l1/l2) x pixel_n` grid; the
    /// periodic-extension connectivity wraps across opposite sides. The
    /// pixel test is approximate, but the clearance rule excludes material
    /// necks thinner than a pixel.
    pub fn validate(&self, pixel_n: usize) -> ValidationReport {
        let mut violations = Vec::new();
        if !(self.l1 > 0.0 && self.l2 > 0.0) {
            violations.push(format!(
                "cell sides must be positive, got l1 = {}, l2 = {}",
                self.l1, self.l2
            ));
            return ValidationReport { violations };
        }
        for (i, h) in self.holes.iter().enumerate() {
            h.structural_violations(i, &mut violations);
        }
        if !violations.is_empty() {
            return ValidationReport { violations };
        }
        for (i, h) in self.holes.iter().enumerate() {
            let c = self.hole_boundary_clearance(h);
            if c < self.min_clearance {
                violations.push(format!(
                    "hole {i}: clearance to the cell boundary is {c:.4e}, required {:.4e}",
                    self.min_clearance
                ));
            }
        }
        for i in 0..self.holes.len() {
            for j in (i + 1)..self.holes.len() {
                if self.holes_too_close(i, j, self.min_clearance) {
                    violations.push(format!(
                        "holes {i} and {j} are closer than the clearance {:.4e}",
                        self.min_clearance
                    ));
                }
            }
        }
        self.check_connectivity(pixel_n, &mut violations);
        ValidationReport { violations }
    }

    fn check_connectivity(&self, pixel_n: usize, violations: &mut Vec<String>) {
        let ny = pixel_n.max(16);
        let nx = ((ny as f64 * self.l1 / self.l2).round() as usize).max(16);
        let (hx, hy) = (self.l1 / nx as f64, self.l2 / ny as f64);
        let mut material = vec![false; nx * ny];
        let mut count = 0usize;
        for j in 0..ny {
            for i in 0..nx {
                let p = [(i as f64 + 0.5) * hx, (j as f64 + 0.5) * hy];
                if self.contains_material(p) {
                    material[j * nx + i] = true;
                    count += 1;
                }
            }
        }
        if count == 0 {
            violations.push("material region is empty".to_string());
            return;
        }
        let reached_plain = flood_fill_plain(&material, nx, ny);
        if reached_plain < count {
            violations.push(format!(
                "material region is disconnected within the cell ({reached_plain} of {count} pixels reachable)"
            ));
        }
        // The periodic extension is connected iff the material is connected
        // on the torus and the achievable winding vectors generate all of
        // Z^2 (otherwise copies of the cell stay in separate components).
        let (reached_torus, windings_full) = flood_fill_torus(&material, nx, ny);
        if reached_torus < count {
            violations.push(format!(
                "periodic extension of the material region is disconnected ({reached_torus} of {count} pixels reachable on the torus)"
            ));
        } else if !windings_full {
            violations.push(
                "periodic extension of the material region is disconnected (material does not wrap around in both directions)"
                    .to_string(),
            );
        }
    }

    /// Finds a coordinate `c` such that the straight periodic line
    /// `x2 = c` (direction 1) or `x1 = c` (direction 2) stays at least
    /// `min_clearance` away from every hole, accounting for periodic
    /// images. Returns the maximum-clearance coordinate.
    pub fn clear_line(&self, direction: u8) -> Result<f64> {
        assert!(direction == 1 || direction == 2, "direction must be 1 or 2");
        let span = if direction == 1 { self.l2 } else { self.l1 };
        let candidates = 4096;
        let mut best = (0.0f64, f64::NEG_INFINITY);
        for k in 0..candidates {
            let c = (k as f64 + 0.5) * span / candidates as f64;
            let clearance = self.line_clearance(direction, c);
            if clearance > best.1 + 1e-15 {
                best = (c, clearance);
            }
        }
        if best.1 < self.min_clearance {
            return Err(Error::NoClearLine {
                direction,
                best_clearance: best.1,
                required: self.min_clearance,
            });
        }
        Ok(best.0)
    }

    /// Distance from the full periodic line to the closest hole.
    pub fn line_clearance(&self, direction: u8, c: f64) -> f64 {
        let wrap_span = if direction == 1 { self.l2 } else { self.l1 };
        let mut min_d = f64::INFINITY;
        for h in &self.holes {
            match h {
                Hole::Circle { center, radius } => {
                    let coord = if direction == 1 { center[1] } else { center[0] };
                    for w in [-wrap_span, 0.0, wrap_span] {
                        min_d = min_d.min((coord + w - c).abs() - radius);
                    }
                }
                _ => {
                    let poly = h.boundary_polygon(256);
                    let n = poly.len();
                    for w in [-wrap_span, 0.0, wrap_span] {
                        for i in 0..n {
                            let a = poly[i];
                            let b = poly[(i + 1) % n];
                            let (ya, yb) = if direction == 1 {
                                (a[1] + w, b[1] + w)
                            } else {
                                (a[0] + w, b[0] + w)
                            };
                            let d = if (ya - c) * (yb - c) <= 0.0 {
                                0.0
                            } else {
                                (ya - c).abs().min((yb - c).abs())
                            };
                            min_d = min_d.min(d);
                        }
                    }
                }
            }
        }
        min_d
    }
}

fn flood_fill_plain(material: &[bool], nx: usize, ny: usize) -> usize {
    let start = match material.iter().position(|&m| m) {
        Some(s) => s,
        None => return 0,
    };
    let mut visited = vec![false; material.len()];
    let mut stack = vec![start];
    visited[start] = true;
    let mut reached = 0usize;
    while let Some(idx) = stack.pop() {
        reached += 1;
        let (i, j) = (idx % nx, idx / nx);
        for (di, dj) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
            let (ni, nj) = (i as isize + di, j as isize + dj);
            if ni < 0 || nj < 0 || ni >= nx as isize || nj >= ny as isize {
                continue;
            }
            let n_idx = nj as usize * nx + ni as usize;
            if material[n_idx] && !visited[n_idx] {
                visited[n_idx] = true;
                stack.push(n_idx);
            }
        }
    }
    reached
}

/// Flood fill on the torus, tracking the unwrapped lattice offset of each
/// pixel. Returns the number of reached pixels and whether the winding
/// vectors (offset mismatches discovered when a pixel is reached twice
/// through topologically different paths) generate all of `Z^2`.
fn flood_fill_torus(material: &[bool], nx: usize, ny: usize) -> (usize, bool) {
    let start = match material.iter().position(|&m| m) {
        Some(s) => s,
        None => return (0, false),
    };
    let mut offset: Vec<Option<[i64; 2]>> = vec![None; material.len()];
    let mut stack = vec![start];
    offset[start] = Some([0, 0]);
    let mut reached = 0usize;
    let mut lattice = WindingLattice::default();
    while let Some(idx) = stack.pop() {
        reached += 1;
        let (i, j) = (idx % nx, idx / nx);
        let here = offset[idx].unwrap();
        for (di, dj) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
            let (mut ni, mut nj) = (i as isize + di, j as isize + dj);
            let mut step = [0i64, 0i64];
            if ni < 0 {
                ni += nx as isize;
                step[0] = -1;
            } else if ni >= nx as isize {
                ni -= nx as isize;
                step[0] = 1;
            }
            if nj < 0 {
                nj += ny as isize;
                step[1] = -1;
            } else if nj >= ny as isize {
                nj -= ny as isize;
                step[1] = 1;
            }
            let n_idx = nj as usize * nx + ni as usize;
            if !material[n_idx] {
                continue;
            }
            let cand = [here[0] + step[0], here[1] + step[1]];
            match offset[n_idx] {
                None => {
                    offset[n_idx] = Some(cand);
                    stack.push(n_idx);
                }
                Some(prev) => {
                    let w = [cand[0] - prev[0], cand[1] - prev[1]];
                    if w != [0, 0] {
                        lattice.insert(w);
                    }
                }
            }
        }
    }
    (reached, lattice.is_full())
}

/// Sublattice of Z^2 maintained as a (partial) triangular basis.
#[derive(Default)]
struct WindingLattice {
    basis: Vec<[i64; 2]>,
}

impl WindingLattice {
    fn insert(&mut self, mut v: [i64; 2]) {
        for b in &mut self.basis {
            if b[0] != 0 && v[0] != 0 {
                // Reduce the x components with a gcd loop.
                while v[0] != 0 {
                    let q = b[0] / v[0];
                    let nb = [b[0] - q * v[0], b[1] - q * v[1]];
                    *b = v;
                    v = nb;
                }
            } else if b[0] == 0 && v[0] != 0 {
                std::mem::swap(b, &mut v);
            }
            if v == [0, 0] {
                return;
            }
        }
        if self.basis.len() < 2 && v != [0, 0] {
            self.basis.push(v);
            // Keep a vector with nonzero x first.
            if self.basis.len() == 2 && self.basis[0][0] == 0 && self.basis[1][0] != 0 {
                self.basis.swap(0, 1);
            }
        } else if v != [0, 0] && self.basis.len() == 2 {
            // Reduce the y components among x == 0 vectors.
            let g = gcd(self.basis[1][1], v[1]);
            self.basis[1][1] = g;
        }
    }

    fn is_full(&self) -> bool {
        if self.basis.len() < 2 {
            return false;
        }
        let det = self.basis[0][0] * self.basis[1][1] - self.basis[0][1] * self.basis[1][0];
        det.abs() == 1
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
