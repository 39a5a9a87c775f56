//! Polygon clipping and triangulation for the cut-cell mesher.
//!
//! `subtract` removes a hole polygon from a small convex-ish subject
//! polygon (a grid cell, or the result of a previous subtraction). Hole
//! boundary pieces that run through the subject are replaced by their
//! chords; the chord endpoints are the crossing points with the subject
//! perimeter, so neighbouring cells reproduce exactly the same points and
//! the mesh stays conforming. Crossing pairs whose piece is tiny in both
//! chord length and sag are cancelled outright — the decision depends only
//! on the pair itself, so both cells sharing the edge make the same call.

use crate::geometry::{point_in_polygon_strict, polygon_signed_area};

pub(crate) type P = [f64; 2];

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: P, b: P) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: P, b: P) -> f64 {
    let d = sub(a, b);
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

fn lerp(a: P, b: P, t: f64) -> P {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn point_line_distance(p: P, a: P, b: P) -> f64 {
    let ab = sub(b, a);
    let len = (ab[0] * ab[0] + ab[1] * ab[1]).sqrt();
    if len == 0.0 {
        return dist(p, a);
    }
    (cross(ab, sub(p, a)) / len).abs()
}

#[derive(Debug, Clone)]
struct Crossing {
    /// Perimeter parameter: edge index plus fraction, in `[0, ns)`.
    s: f64,
    /// Hole chain parameter: segment index plus fraction, in `[0, nh)`.
    h: f64,
    point: P,
    alive: bool,
}

#[derive(Debug)]
pub(crate) enum SubtractOutcome {
    /// Hole does not touch the subject.
    Unchanged,
    /// Subject lies entirely inside the hole.
    Empty,
    /// Material loops (counterclockwise) left after the cut.
    Clipped(Vec<Vec<P>>),
}

/// Removes `hole` (counterclockwise polygon) from `subject`
/// (counterclockwise polygon). `scale` is the nominal cell size `h`; all
/// snapping thresholds derive from it.
pub(crate) fn subtract(
    subject: &[P],
    hole: &[P],
    scale: f64,
) -> Result<SubtractOutcome, String> {
    let ns = subject.len();
    let nh = hole.len();
    let eps_clamp = 1e-7;
    let eps_pt = 1e-9 * scale;

    // Crossings of every subject edge with every hole segment, clamped to
    // vertices when nearly coincident so shared points reproduce exactly.
    let mut crossings: Vec<Crossing> = Vec::new();
    for i in 0..ns {
        let (a, b) = (subject[i], subject[(i + 1) % ns]);
        let ab = sub(b, a);
        for j in 0..nh {
            let (c, d) = (hole[j], hole[(j + 1) % nh]);
            let cd = sub(d, c);
            let denom = cross(ab, cd);
            if denom.abs() < 1e-14 * scale * scale {
                continue; // parallel (graze handled by midpoint tests)
            }
            let ac = sub(c, a);
            let t = cross(ac, cd) / denom;
            let u = cross(ac, ab) / denom;
            if !(-1e-9..=1.0 + 1e-9).contains(&t) || !(-1e-9..=1.0 + 1e-9).contains(&u) {
                continue;
            }
            let (s, point);
            if t < eps_clamp {
                s = i as f64;
                point = a;
            } else if t > 1.0 - eps_clamp {
                s = ((i + 1) % ns) as f64;
                point = b;
            } else {
                s = i as f64 + t;
                point = lerp(a, b, t);
            }
            let hpar = if u < eps_clamp {
                j as f64
            } else if u > 1.0 - eps_clamp {
                ((j + 1) % nh) as f64
            } else {
                j as f64 + u
            };
            // When the crossing clamps to a hole vertex but not a subject
            // vertex, use the hole vertex coordinates (exact across cells).
            let point = if t >= eps_clamp && t <= 1.0 - eps_clamp {
                if u < eps_clamp {
                    c
                } else if u > 1.0 - eps_clamp {
                    d
                } else {
                    point
                }
            } else {
                point
            };
            if !crossings.iter().any(|x| dist(x.point, point) < eps_pt) {
                crossings.push(Crossing {
                    s,
                    h: hpar,
                    point,
                    alive: true,
                });
            }
        }
    }

    // Cancel tiny dips: consecutive crossings along the chain whose piece
    // has both a short chord and a small sag.
    let cancel_tol = 0.05 * scale;
    for _round in 0..8 {
        let mut live: Vec<usize> = (0..crossings.len()).filter(|&i| crossings[i].alive).collect();
        if live.len() < 2 {
            break;
        }
        live.sort_by(|&a, &b| crossings[a].h.total_cmp(&crossings[b].h));
        let mut cancelled = false;
        for k in 0..live.len() {
            let (ia, ib) = (live[k], live[(k + 1) % live.len()]);
            if !crossings[ia].alive || !crossings[ib].alive {
                continue;
            }
            let (pa, pb) = (crossings[ia].point, crossings[ib].point);
            let chord = dist(pa, pb);
            if chord >= cancel_tol {
                continue;
            }
            let sag = chain_sag(hole, crossings[ia].h, crossings[ib].h, pa, pb);
            if sag < cancel_tol {
                crossings[ia].alive = false;
                crossings[ib].alive = false;
                cancelled = true;
            }
        }
        if !cancelled {
            break;
        }
    }
    let live: Vec<Crossing> = crossings.into_iter().filter(|c| c.alive).collect();

    if live.is_empty() {
        let c = polygon_centroid(subject);
        return if point_in_polygon_strict(c, hole, 0.0) {
            Ok(SubtractOutcome::Empty)
        } else {
            Ok(SubtractOutcome::Unchanged)
        };
    }
    if live.len() == 1 {
        // Single touch point; the hole only grazes the perimeter.
        let c = polygon_centroid(subject);
        return if point_in_polygon_strict(c, hole, 0.0) {
            Ok(SubtractOutcome::Empty)
        } else {
            Ok(SubtractOutcome::Unchanged)
        };
    }

    // Perimeter arcs between crossings, in s-order.
    let mut s_order: Vec<usize> = (0..live.len()).collect();
    s_order.sort_by(|&a, &b| live[a].s.total_cmp(&live[b].s));
    let eps_hole = 1e-12 * scale;
    struct Arc {
        start: usize,
        end: usize,
        points: Vec<P>,
        kept: bool,
    }
    let mut arcs: Vec<Arc> = Vec::with_capacity(live.len());
    for k in 0..s_order.len() {
        let ia = s_order[k];
        let ib = s_order[(k + 1) % s_order.len()];
        let mut pts = vec![live[ia].point];
        // Subject vertices strictly between the two s-parameters, walking
        // forward (cyclically) from sa to sb.
        let (sa, sb) = (live[ia].s, live[ib].s);
        let end = if sb > sa { sb } else { sb + ns as f64 };
        let mut v = sa.floor() as usize + 1;
        while (v as f64) < end {
            pts.push(subject[v % ns]);
            v += 1;
        }
        pts.push(live[ib].point);
        let mid = polyline_midpoint(&pts);
        let kept = !point_in_polygon_strict(mid, hole, eps_hole);
        arcs.push(Arc {
            start: ia,
            end: ib,
            points: pts,
            kept,
        });
    }

    if arcs.iter().all(|a| !a.kept) {
        return Ok(SubtractOutcome::Empty);
    }

    // Chain pieces between crossings, in h-order; kept pieces (inside the
    // subject) turn into chords.
    let mut h_order: Vec<usize> = (0..live.len()).collect();
    h_order.sort_by(|&a, &b| live[a].h.total_cmp(&live[b].h));
    let mut chord_at: Vec<Option<usize>> = vec![None; live.len()];
    for k in 0..h_order.len() {
        let ia = h_order[k];
        let ib = h_order[(k + 1) % h_order.len()];
        let mid = chain_piece_midpoint(hole, live[ia].h, live[ib].h, live[ia].point, live[ib].point);
        if point_in_polygon_strict(mid, subject, eps_hole) {
            if chord_at[ia].is_some() || chord_at[ib].is_some() {
                return Err("pinch point: two hole chords meet at one crossing".to_string());
            }
            chord_at[ia] = Some(ib);
            chord_at[ib] = Some(ia);
        }
    }

    // Stitch material loops: perimeter arcs joined by chords.
    let mut arc_by_start: Vec<Option<usize>> = vec![None; live.len()];
    for (idx, arc) in arcs.iter().enumerate() {
        arc_by_start[arc.start] = Some(idx);
    }
    let mut visited = vec![false; arcs.len()];
    let mut loops: Vec<Vec<P>> = Vec::new();
    for start_arc in 0..arcs.len() {
        if visited[start_arc] || !arcs[start_arc].kept {
            continue;
        }
        let start_cr = arcs[start_arc].start;
        let mut pts: Vec<P> = Vec::new();
        let mut cur = start_arc;
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 4 * arcs.len() + 8 {
                return Err("loop stitching did not close".to_string());
            }
            if visited[cur] {
                return Err("loop stitching revisited an arc".to_string());
            }
            visited[cur] = true;
            for &p in &arcs[cur].points {
                if pts.last().map_or(true, |&q| dist(q, p) > eps_pt) {
                    pts.push(p);
                }
            }
            let mut at = arcs[cur].end;
            if at == start_cr {
                break;
            }
            if let Some(partner) = chord_at[at] {
                // Cross the hole along the chord.
                let p = live[partner].point;
                if pts.last().map_or(true, |&q| dist(q, p) > eps_pt) {
                    pts.push(p);
                }
                at = partner;
                if at == start_cr {
                    break;
                }
            }
            let next = arc_by_start[at]
                .ok_or_else(|| "no arc continues the material boundary".to_string())?;
            if !arcs[next].kept {
                return Err("material boundary ran into a discarded arc".to_string());
            }
            cur = next;
        }
        if let Some(&first) = pts.first() {
            if pts.len() > 1 && dist(first, *pts.last().unwrap()) <= eps_pt {
                pts.pop();
            }
        }
        if pts.len() >= 3 {
            let area = polygon_signed_area(&pts);
            if area < 0.0 {
                return Err("stitched loop has negative orientation".to_string());
            }
            if area > 1e-12 * scale * scale {
                loops.push(pts);
            }
        }
    }
    if loops.is_empty() {
        return Ok(SubtractOutcome::Empty);
    }
    Ok(SubtractOutcome::Clipped(loops))
}

fn polygon_centroid(poly: &[P]) -> P {
    let n = poly.len() as f64;
    let mut c = [0.0, 0.0];
    for p in poly {
        c[0] += p[0];
        c[1] += p[1];
    }
    [c[0] / n, c[1] / n]
}

/// Walks the chain from parameter `ha` to `hb` (forward, cyclic) and
/// returns the maximum deviation of intermediate chain vertices from the
/// chord `pa-pb`.
fn chain_sag(hole: &[P], ha: f64, hb: f64, pa: P, pb: P) -> f64 {
    let nh = hole.len();
    let mut sag: f64 = 0.0;
    let mut v = ha.floor() as usize + 1;
    let end = if hb > ha { hb } else { hb + nh as f64 };
    while (v as f64) < end {
        let idx = v % nh;
        let sv = if (v as f64) <= ha { v as f64 + nh as f64 } else { v as f64 };
        if sv > ha && sv < end {
            sag = sag.max(point_line_distance(hole[idx], pa, pb));
        }
        v += 1;
    }
    sag
}

/// Midpoint (by arc length) of the chain piece from `ha` to `hb`.
fn chain_piece_midpoint(hole: &[P], ha: f64, hb: f64, pa: P, pb: P) -> P {
    let nh = hole.len();
    let mut pts = vec![pa];
    let mut v = ha.floor() as usize + 1;
    let end = if hb > ha { hb } else { hb + nh as f64 };
    while (v as f64) < end {
        let idx = v % nh;
        let sv = if (v as f64) <= ha { v as f64 + nh as f64 } else { v as f64 };
        if sv > ha && sv < end {
            pts.push(hole[idx]);
        }
        v += 1;
    }
    pts.push(pb);
    polyline_midpoint(&pts)
}

fn polyline_midpoint(pts: &[P]) -> P {
    let total: f64 = pts.windows(2).map(|w| dist(w[0], w[1])).sum();
    if total == 0.0 {
        return pts[0];
    }
    let mut acc = 0.0;
    let half = 0.5 * total;
    for w in pts.windows(2) {
        let d = dist(w[0], w[1]);
        if acc + d >= half {
            let t = (half - acc) / d;
            return lerp(w[0], w[1], t);
        }
        acc += d;
    }
    *pts.last().unwrap()
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
/// Returns vertex-index triples. Greedy on triangle quality (max-min
/// angle) to avoid slivers.
pub(crate) fn triangulate(poly: &[P], scale: f64) -> Result<Vec<[usize; 3]>, String> {
    let n = poly.len();
    if n < 3 {
        return Err("polygon with fewer than 3 vertices".to_string());
    }
    let area_floor = 1e-12 * scale * scale;
    let mut active: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    while active.len() > 3 {
        let m = active.len();
        let mut best: Option<(usize, f64)> = None;
        for k in 0..m {
            let ip = active[(k + m - 1) % m];
            let ic = active[k];
            let inx = active[(k + 1) % m];
            let (a, b, c) = (poly[ip], poly[ic], poly[inx]);
            let area2 = cross(sub(b, a), sub(c, a));
            if area2 <= 2.0 * area_floor {
                continue; // reflex or degenerate corner
            }
            // No other active vertex inside the candidate ear; vertices on
            // the ear's boundary block as well (they would end up hanging
            // on a triangle edge).
            let mut blocked = false;
            for &iv in &active {
                if iv == ip || iv == ic || iv == inx {
                    continue;
                }
                if point_in_triangle(poly[iv], a, b, c, area_floor) {
                    blocked = true;
                    break;
                }
            }
            if blocked {
                continue;
            }
            let q = min_angle(a, b, c);
            if best.map_or(true, |(_, bq)| q > bq) {
                best = Some((k, q));
            }
        }
        let (k, _) = best.ok_or_else(|| "no valid ear found".to_string())?;
        let m = active.len();
        let ip = active[(k + m - 1) % m];
        let ic = active[k];
        let inx = active[(k + 1) % m];
        tris.push([ip, ic, inx]);
        active.remove(k);
    }
    let (a, b, c) = (poly[active[0]], poly[active[1]], poly[active[2]]);
    if cross(sub(b, a), sub(c, a)) > 2.0 * area_floor {
        tris.push([active[0], active[1], active[2]]);
    }
    Ok(tris)
}

fn point_in_triangle(p: P, a: P, b: P, c: P, eps: f64) -> bool {
    let d1 = cross(sub(b, a), sub(p, a));
    let d2 = cross(sub(c, b), sub(p, b));
    let d3 = cross(sub(a, c), sub(p, c));
    d1 > -eps && d2 > -eps && d3 > -eps
}

fn min_angle(a: P, b: P, c: P) -> f64 {
    let la = dist(b, c);
    let lb = dist(a, c);
    let lc = dist(a, b);
    let angle = |opp: f64, s1: f64, s2: f64| {
        let cosv = ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)).clamp(-1.0, 1.0);
        cosv.acos()
    };
    angle(la, lb, lc).min(angle(lb, la, lc)).min(angle(lc, la, lb))
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: [P; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

    fn circle(center: P, r: f64, n: usize) -> Vec<P> {
        (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [center[0] + r * t.cos(), center[1] + r * t.sin()]
            })
            .collect()
    }

    fn total_area(outcome: &SubtractOutcome, full: f64) -> f64 {
        match outcome {
            SubtractOutcome::Unchanged => full,
            SubtractOutcome::Empty => 0.0,
            SubtractOutcome::Clipped(loops) => {
                loops.iter().map(|l| polygon_signed_area(l)).sum()
            }
        }
    }

    #[test]
    fn disjoint_hole_leaves_subject() {
        let hole = circle([3.0, 3.0], 0.5, 32);
        let out = subtract(&UNIT, &hole, 1.0).unwrap();
        assert!(matches!(out, SubtractOutcome::Unchanged));
    }

    #[test]
    fn enclosing_hole_empties_subject() {
        let hole = circle([0.5, 0.5], 3.0, 64);
        let out = subtract(&UNIT, &hole, 1.0).unwrap();
        assert!(matches!(out, SubtractOutcome::Empty));
    }

    #[test]
    fn corner_cut_area() {
        // Hole centered at the origin corner, radius 0.5. The subject is as
        // large as the hole here, so the single chord spans the whole
        // quarter arc: the cut region is the right triangle with legs 0.5,
        // area 0.125. (In the mesher the subject is one grid cell and the
        // chord error is O(h^2).)
        let hole = circle([0.0, 0.0], 0.5, 256);
        let out = subtract(&UNIT, &hole, 1.0).unwrap();
        let area = total_area(&out, 1.0);
        assert!((area - 0.875).abs() < 1e-4, "area {area}");
        // With cells of size h the chord error is O(h^2): cover the same
        // corner with k x k patches of cells and check the area converges
        // at second order to the true quarter-disk complement.
        let expected = 1.0 - 0.25 * std::f64::consts::PI * 0.25;
        let patch_error = |k: usize| -> f64 {
            let hcell = 1.0 / k as f64;
            let mut patch_area = 0.0;
            for cj in 0..k {
                for ci in 0..k {
                    let (x0, y0) = (ci as f64 * hcell, cj as f64 * hcell);
                    let cell = [
                        [x0, y0],
                        [x0 + hcell, y0],
                        [x0 + hcell, y0 + hcell],
                        [x0, y0 + hcell],
                    ];
                    patch_area +=
                        total_area(&subtract(&cell, &hole, hcell).unwrap(), hcell * hcell);
                }
            }
            (patch_area - expected).abs()
        };
        let (e4, e8, e16) = (patch_error(4), patch_error(8), patch_error(16));
        assert!(e4 < 2.5e-2, "error at k=4: {e4}");
        assert!(e4 / e8 > 2.5, "ratio 4->8: {}", e4 / e8);
        assert!(e8 / e16 > 2.5, "ratio 8->16: {}", e8 / e16);
    }

    #[test]
    fn half_plane_cut() {
        // Big polygon covering x > 0.5 side.
        let hole = vec![[0.5, -5.0], [5.0, -5.0], [5.0, 5.0], [0.5, 5.0]];
        let out = subtract(&UNIT, &hole, 1.0).unwrap();
        let area = total_area(&out, 1.0);
        assert!((area - 0.5).abs() < 1e-9, "area {area}");
        if let SubtractOutcome::Clipped(loops) = out {
            assert_eq!(loops.len(), 1);
        } else {
            panic!("expected clipped outcome");
        }
    }

    #[test]
    fn hole_through_middle_splits_subject() {
        // Horizontal slab across the middle splits the square into two
        // loops.
        let hole = vec![[-5.0, 0.4], [5.0, 0.4], [5.0, 0.6], [-5.0, 0.6]];
        let out = subtract(&UNIT, &hole, 1.0).unwrap();
        match out {
            SubtractOutcome::Clipped(loops) => {
                assert_eq!(loops.len(), 2);
                let area: f64 = loops.iter().map(|l| polygon_signed_area(l)).sum();
                assert!((area - 0.8).abs() < 1e-9);
            }
            other => panic!("expected two loops, got {other:?}"),
        }
    }

    #[test]
    fn tiny_dip_is_cancelled() {
        // A sliver dipping 0.01 into the square across the bottom edge has
        // both tiny chord and tiny sag: the cut is ignored.
        let hole = vec![
            [0.49, -1.0],
            [0.51, -1.0],
            [0.51, 0.01],
            [0.50, 0.012],
            [0.49, 0.01],
        ];
        let out = subtract(&UNIT, &hole, 1.0).unwrap();
        assert!(matches!(out, SubtractOutcome::Unchanged));
    }

    #[test]
    fn triangulation_covers_polygon() {
        // Non-convex material loop: square minus a notch.
        let poly = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.6, 1.0],
            [0.5, 0.5],
            [0.4, 1.0],
            [0.0, 1.0],
        ];
        let tris = triangulate(&poly, 1.0).unwrap();
        let area: f64 = tris
            .iter()
            .map(|t| {
                0.5 * cross(
                    sub(poly[t[1]], poly[t[0]]),
                    sub(poly[t[2]], poly[t[0]]),
                )
            })
            .sum();
        assert!((area - polygon_signed_area(&poly)).abs() < 1e-12);
        // All triangles positively oriented.
        for t in &tris {
            assert!(cross(sub(poly[t[1]], poly[t[0]]), sub(poly[t[2]], poly[t[0]])) > 0.0);
        }
    }

    #[test]
    fn circular_cut_multiple_cells_consistent() {
        // Two adjacent cells cut by the same circle: the crossing points on
        // the shared edge must agree to machine precision.
        let r = 0.6;
        let hole = circle([1.0, 0.0], r, 128);
        let cell_a: [P; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let cell_b: [P; 4] = [[1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0]];
        let shared_x = 1.0;
        let mut pts_a = Vec::new();
        let mut pts_b = Vec::new();
        for (cell, out_pts) in [(&cell_a, &mut pts_a), (&cell_b, &mut pts_b)] {
            if let SubtractOutcome::Clipped(loops) = subtract(&cell[..], &hole, 1.0).unwrap() {
                for l in loops {
                    for p in l {
                        if (p[0] - shared_x).abs() < 1e-9 && p[1] > 1e-9 && p[1] < 1.0 - 1e-9 {
                            out_pts.push(p);
                        }
                    }
                }
            } else {
                panic!("expected clipped outcome");
            }
        }
        assert_eq!(pts_a.len(), 1);
        assert_eq!(pts_b.len(), 1);
        assert!(dist(pts_a[0], pts_b[0]) < 1e-9);
    }
}
