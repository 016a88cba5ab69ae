//! Incremental 3D convex hull over exact integer-scaled coordinates.
//!
//! Points are rational; a common denominator scales them to integers once,
//! after which every predicate is a BigInt determinant. Input sizes are desk
//! scale, so the O(n^2) incremental scheme is fine.

use super::GeometryError;
use crate::rat::Frequency;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

type P3 = [BigInt; 3];

fn sub(a: &P3, b: &P3) -> P3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn cross(a: &P3, b: &P3) -> P3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn dot(a: &P3, b: &P3) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

/// Sign of det[b-a, c-a, d-a]: positive when d is on the side the outward
/// normal of the oriented triangle (a, b, c) points to.
fn orient(pts: &[P3], a: usize, b: usize, c: usize, d: usize) -> i8 {
    let n = cross(&sub(&pts[b], &pts[a]), &sub(&pts[c], &pts[a]));
    let v = dot(&n, &sub(&pts[d], &pts[a]));
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

fn scale_to_integers(points: &[Frequency]) -> Vec<P3> {
    let lcm = points
        .iter()
        .flat_map(|p| p.0.iter())
        .map(|c| c.denom().clone())
        .fold(BigInt::one(), num_integer::lcm);
    points
        .iter()
        .map(|p| {
            [
                (&p.0[0] * &lcm).numer().clone(),
                (&p.0[1] * &lcm).numer().clone(),
                (&p.0[2] * &lcm).numer().clone(),
            ]
        })
        .collect()
}

/// Convex polyhedron: faces are ordered vertex cycles (outward, seen from
/// outside counterclockwise), coplanar triangles merged.
#[derive(Debug, Clone)]
pub struct SpatialHull {
    /// Deduplicated input points; face/edge indices refer to this list.
    pub points: Vec<Frequency>,
    /// Indices of points that are hull vertices, ascending.
    pub vertices: Vec<usize>,
    pub faces: Vec<Vec<usize>>,
    /// Undirected edges (i, j) with i < j, ascending.
    pub edges: Vec<(usize, usize)>,
}

pub fn convex_hull_3d(points: &[Frequency]) -> Result<SpatialHull, GeometryError> {
    let unique: Vec<Frequency> = points
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if unique.len() < 4 {
        return Err(GeometryError::DegenerateInput(
            "need at least four distinct points".into(),
        ));
    }
    let pts = scale_to_integers(&unique);

    // Initial simplex: first point, first distinct (index 1 after dedup),
    // first non-collinear, first non-coplanar.
    let p0 = 0;
    let p1 = 1;
    let p2 = (2..pts.len())
        .find(|&i| !cross(&sub(&pts[p1], &pts[p0]), &sub(&pts[i], &pts[p0])).iter().all(Zero::is_zero))
        .ok_or_else(|| GeometryError::DegenerateInput("points are collinear".into()))?;
    let p3 = (2..pts.len())
        .find(|&i| orient(&pts, p0, p1, p2, i) != 0)
        .ok_or_else(|| GeometryError::DegenerateInput("points are coplanar".into()))?;

    // Faces oriented so the remaining simplex point lies on the negative side.
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    let push_face = |faces: &mut Vec<[usize; 3]>, alive: &mut Vec<bool>, a, b, c, inner| {
        if orient(&pts, a, b, c, inner) > 0 {
            faces.push([a, c, b]);
        } else {
            faces.push([a, b, c]);
        }
        alive.push(true);
    };
    push_face(&mut faces, &mut alive, p0, p1, p2, p3);
    push_face(&mut faces, &mut alive, p0, p1, p3, p2);
    push_face(&mut faces, &mut alive, p0, p2, p3, p1);
    push_face(&mut faces, &mut alive, p1, p2, p3, p0);

    for p in 0..pts.len() {
        if p == p0 || p == p1 || p == p2 || p == p3 {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&f| alive[f] && orient(&pts, faces[f][0], faces[f][1], faces[f][2], p) > 0)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // Horizon: directed edges of the visible region whose reverse is not
        // also in the region. A horizon edge cannot be collinear with p, or
        // its strictly visible face would be coplanar with p.
        let mut dir_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &f in &visible {
            let [a, b, c] = faces[f];
            dir_edges.insert((a, b));
            dir_edges.insert((b, c));
            dir_edges.insert((c, a));
        }
        for &f in &visible {
            alive[f] = false;
        }
        for &(u, v) in &dir_edges {
            if !dir_edges.contains(&(v, u)) {
                faces.push([u, v, p]);
                alive.push(true);
            }
        }
    }

    // Merge coplanar triangles: group by the primitive oriented plane
    // (normal reduced by its gcd, plus offset), then walk each group's
    // boundary edges (the directed edges whose reverse stays outside the
    // group) into a single cycle and drop collinear stops.
    let mut groups: BTreeMap<(P3, BigInt), Vec<usize>> = BTreeMap::new();
    for (f, tri) in faces.iter().enumerate() {
        if !alive[f] {
            continue;
        }
        let n = cross(&sub(&pts[tri[1]], &pts[tri[0]]), &sub(&pts[tri[2]], &pts[tri[0]]));
        let g = n
            .iter()
            .fold(BigInt::zero(), |acc, v| num_integer::gcd(acc, v.abs()));
        let n: P3 = [&n[0] / &g, &n[1] / &g, &n[2] / &g];
        let d = dot(&n, &pts[tri[0]]);
        groups.entry((n, d)).or_default().push(f);
    }

    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for ((_, _), members) in &groups {
        let mut dir_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &f in members {
            let [a, b, c] = faces[f];
            dir_edges.insert((a, b));
            dir_edges.insert((b, c));
            dir_edges.insert((c, a));
        }
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        for &(u, v) in &dir_edges {
            if !dir_edges.contains(&(v, u)) {
                let prev = next.insert(u, v);
                debug_assert!(prev.is_none(), "merged face boundary must be a simple cycle");
            }
        }
        let start = *next.keys().next().expect("face has a boundary");
        let mut cycle = vec![start];
        let mut cur = next[&start];
        while cur != start {
            cycle.push(cur);
            cur = next[&cur];
        }
        debug_assert_eq!(cycle.len(), next.len(), "single boundary cycle per plane");
        // Remove collinear vertices (artifacts of the triangulation).
        let keep: Vec<usize> = (0..cycle.len())
            .filter(|&i| {
                let a = cycle[(i + cycle.len() - 1) % cycle.len()];
                let b = cycle[i];
                let c = cycle[(i + 1) % cycle.len()];
                !cross(&sub(&pts[b], &pts[a]), &sub(&pts[c], &pts[b]))
                    .iter()
                    .all(Zero::is_zero)
            })
            .map(|i| cycle[i])
            .collect();
        cycles.push(keep);
    }

    let mut vertex_set: BTreeSet<usize> = BTreeSet::new();
    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for cycle in &cycles {
        for (k, &v) in cycle.iter().enumerate() {
            vertex_set.insert(v);
            let w = cycle[(k + 1) % cycle.len()];
            edge_set.insert((v.min(w), v.max(w)));
        }
    }
    Ok(SpatialHull {
        points: unique,
        vertices: vertex_set.into_iter().collect(),
        faces: cycles,
        edges: edge_set.into_iter().collect(),
    })
}

impl SpatialHull {
    /// V - E + F; 2 for every genuine convex polyhedron.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    fn face_halfspace(&self, face: &[usize]) -> (Frequency, Frequency) {
        let a = &self.points[face[0]];
        let b = &self.points[face[1]];
        let c = &self.points[face[2]];
        let normal = b.sub(a).cross(&c.sub(a));
        (normal, a.clone())
    }

    /// Exact membership, boundary included.
    pub fn contains(&self, p: &Frequency) -> bool {
        self.faces.iter().all(|face| {
            let (normal, base) = self.face_halfspace(face);
            !p.sub(&base).dot(&normal).is_positive()
        })
    }

    pub fn is_vertex(&self, p: &Frequency) -> bool {
        self.vertices.iter().any(|&i| &self.points[i] == p)
    }

    /// Face vertices as frequencies, in the stored outward cyclic order.
    pub fn face_points(&self, face_index: usize) -> Vec<Frequency> {
        self.faces[face_index]
            .iter()
            .map(|&i| self.points[i].clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_field::int_mode;

    fn octahedron() -> Vec<Frequency> {
        vec![
            int_mode(1, 0, 0),
            int_mode(-1, 0, 0),
            int_mode(0, 1, 0),
            int_mode(0, -1, 0),
            int_mode(0, 0, 1),
            int_mode(0, 0, -1),
        ]
    }

    #[test]
    fn octahedron_counts_and_euler() {
        let hull = convex_hull_3d(&octahedron()).unwrap();
        assert_eq!(hull.vertices.len(), 6);
        assert_eq!(hull.edges.len(), 12);
        assert_eq!(hull.faces.len(), 8);
        assert_eq!(hull.euler_characteristic(), 2);
        for face in &hull.faces {
            assert_eq!(face.len(), 3);
        }
    }

    #[test]
    fn cube_merges_coplanar_triangles() {
        let mut pts = Vec::new();
        for x in [-1, 1] {
            for y in [-1, 1] {
                for z in [-1, 1] {
                    pts.push(int_mode(x, y, z));
                }
            }
        }
        // An interior and a face-centered point must not become vertices.
        pts.push(int_mode(0, 0, 0));
        pts.push(int_mode(1, 0, 0));
        let hull = convex_hull_3d(&pts).unwrap();
        assert_eq!(hull.vertices.len(), 8);
        assert_eq!(hull.edges.len(), 12);
        assert_eq!(hull.faces.len(), 6);
        assert_eq!(hull.euler_characteristic(), 2);
        for face in &hull.faces {
            assert_eq!(face.len(), 4);
        }
        assert!(hull.contains(&int_mode(0, 0, 0)));
        assert!(hull.contains(&int_mode(1, 0, 0)));
        assert!(!hull.is_vertex(&int_mode(1, 0, 0)));
        assert!(!hull.contains(&int_mode(2, 0, 0)));
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let line: Vec<_> = (0..5).map(|k| int_mode(k, 0, 0)).collect();
        assert!(matches!(
            convex_hull_3d(&line),
            Err(GeometryError::DegenerateInput(_))
        ));
        let plane = vec![
            int_mode(0, 0, 0),
            int_mode(1, 0, 0),
            int_mode(0, 1, 0),
            int_mode(1, 1, 0),
            int_mode(2, 3, 0),
        ];
        assert!(matches!(
            convex_hull_3d(&plane),
            Err(GeometryError::DegenerateInput(_))
        ));
    }

    #[test]
    fn sphere_points_are_all_vertices() {
        use rand::{Rng, SeedableRng};
        // Rational points on the unit sphere via the double stereographic map
        // (two Pythagorean fractions).
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut pts: Vec<Frequency> = Vec::new();
        while pts.len() < 50 {
            let a: i64 = rng.gen_range(-6..=6);
            let b: i64 = rng.gen_range(1..=6);
            let c: i64 = rng.gen_range(-6..=6);
            let d: i64 = rng.gen_range(1..=6);
            // (x, y) on the unit circle from t=a/b, then tilt by s=c/d.
            let (p, q) = (a * a - b * b, 2 * a * b);
            let h = a * a + b * b;
            let (r, s) = (c * c - d * d, 2 * c * d);
            let g = c * c + d * d;
            use crate::rat::rat;
            let point = Frequency::new(
                rat(p * r, h * g),
                rat(q * r, h * g),
                rat(s, g),
            );
            debug_assert_eq!(point.norm_sq(), rat(1, 1));
            if !pts.contains(&point) {
                pts.push(point);
            }
        }
        let hull = convex_hull_3d(&pts).unwrap();
        assert_eq!(hull.vertices.len(), 50, "strictly convex position");
        assert_eq!(hull.euler_characteristic(), 2);
        // Brute-force halfspace check: every point on or inside.
        for p in &pts {
            assert!(hull.contains(p));
        }
    }

    #[test]
    fn random_integer_clouds_satisfy_hull_invariants() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let pts: Vec<Frequency> = (0..rng.gen_range(6..25))
                .map(|_| {
                    int_mode(
                        rng.gen_range(-4..=4),
                        rng.gen_range(-4..=4),
                        rng.gen_range(-4..=4),
                    )
                })
                .collect();
            let hull = match convex_hull_3d(&pts) {
                Ok(h) => h,
                Err(_) => continue,
            };
            assert_eq!(hull.euler_characteristic(), 2);
            for p in &pts {
                assert!(hull.contains(p));
            }
            // Re-inserting hull vertices changes nothing.
            let mut doubled = pts.clone();
            doubled.extend(hull.vertices.iter().map(|&i| hull.points[i].clone()));
            let hull2 = convex_hull_3d(&doubled).unwrap();
            assert_eq!(hull2.vertices.len(), hull.vertices.len());
            assert_eq!(hull2.faces.len(), hull.faces.len());
        }
    }
}
