//! Exact 2D convex hulls in a rational in-plane coordinate system, and the
//! Minkowski functional (gauge) of a hull containing the origin.

use super::GeometryError;
use crate::linalg::Vec3;
use crate::rat::{Frequency, Rat};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

/// Exact rational point in plane coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Planar2 {
    pub x: Rat,
    pub y: Rat,
}

impl Planar2 {
    pub fn new(x: Rat, y: Rat) -> Self {
        Planar2 { x, y }
    }

    pub fn origin() -> Self {
        Planar2 {
            x: Rat::zero(),
            y: Rat::zero(),
        }
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn sub(&self, other: &Planar2) -> Planar2 {
        Planar2 {
            x: &self.x - &other.x,
            y: &self.y - &other.y,
        }
    }

    pub fn neg(&self) -> Planar2 {
        Planar2 {
            x: -&self.x,
            y: -&self.y,
        }
    }

    pub fn cross(&self, other: &Planar2) -> Rat {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn to_f64(&self) -> [f64; 2] {
        use num_traits::ToPrimitive;
        [self.x.to_f64().unwrap(), self.y.to_f64().unwrap()]
    }
}

/// Rational coordinate system for a plane through the origin, fixed by the
/// support it is built from: `b1` is the lexicographically smallest primitive
/// support direction, `b2` the next independent one orthogonalized against
/// `b1` (scaled to stay rational). `oriented_normal` points along `b1 x b2`
/// and `e_perp` is its unit version.
#[derive(Debug, Clone)]
pub struct PlanarBasis {
    pub b1: Frequency,
    pub b2: Frequency,
    pub oriented_normal: Frequency,
    pub e_perp: Vec3,
    b1_norm_sq: Rat,
    b2_norm_sq: Rat,
}

impl PlanarBasis {
    pub fn from_directions(d1: &Frequency, d2: &Frequency) -> Result<PlanarBasis, GeometryError> {
        if d1.is_zero() || d2.is_zero() || d1.is_parallel_to(d2) {
            return Err(GeometryError::DegenerateInput(
                "plane basis needs two independent directions".into(),
            ));
        }
        let b1 = d1.clone();
        // Scaled Gram-Schmidt keeps coordinates rational: |b1|^2 d2 - (d2.b1) b1.
        let b2 = d2.scale(&b1.norm_sq()).sub(&b1.scale(&d2.dot(&b1)));
        let oriented_normal = b1.cross(&b2).primitive_oriented();
        let e_perp = Vec3(oriented_normal.to_f64()).normalized();
        let b1_norm_sq = b1.norm_sq();
        let b2_norm_sq = b2.norm_sq();
        Ok(PlanarBasis {
            b1,
            b2,
            oriented_normal,
            e_perp,
            b1_norm_sq,
            b2_norm_sq,
        })
    }

    /// Basis from the two lexicographically smallest primitive directions of
    /// the given frequencies. Fails if they span less than a plane; does not
    /// check that the remaining frequencies stay inside it (see `contains`).
    pub fn for_support<'a, I>(freqs: I) -> Result<PlanarBasis, GeometryError>
    where
        I: IntoIterator<Item = &'a Frequency>,
    {
        let dirs: BTreeSet<Frequency> = freqs
            .into_iter()
            .filter(|n| !n.is_zero())
            .map(|n| n.primitive_direction())
            .collect();
        let mut iter = dirs.iter();
        let b1 = iter
            .next()
            .ok_or_else(|| GeometryError::DegenerateInput("empty support".into()))?;
        let b2 = iter
            .find(|d| !d.is_parallel_to(b1))
            .ok_or_else(|| GeometryError::DegenerateInput("support spans only a line".into()))?;
        PlanarBasis::from_directions(b1, b2)
    }

    pub fn contains(&self, n: &Frequency) -> bool {
        n.dot(&self.oriented_normal).is_zero()
    }

    /// Exact in-plane coordinates; `None` if `n` is off the plane.
    pub fn project(&self, n: &Frequency) -> Option<Planar2> {
        if !self.contains(n) {
            return None;
        }
        Some(Planar2 {
            x: n.dot(&self.b1) / &self.b1_norm_sq,
            y: n.dot(&self.b2) / &self.b2_norm_sq,
        })
    }

    pub fn unproject(&self, p: &Planar2) -> Frequency {
        self.b1.scale(&p.x).add(&self.b2.scale(&p.y))
    }
}

/// Strictly convex polygon, vertices in counterclockwise cyclic order (with
/// respect to the basis orientation the points were projected in).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarHull {
    pub vertices: Vec<Planar2>,
}

/// Andrew's monotone chain over exact rationals; collinear boundary points
/// are dropped, so the vertex cycle is strictly convex.
pub fn convex_hull_planar(points: &[Planar2]) -> Result<PlanarHull, GeometryError> {
    let unique: BTreeSet<&Planar2> = points.iter().collect();
    let sorted: Vec<&Planar2> = unique.into_iter().collect();
    if sorted.len() < 3 {
        return Err(GeometryError::DegenerateInput(
            "need at least three distinct points".into(),
        ));
    }
    let chain = |iter: &mut dyn Iterator<Item = &&Planar2>| -> Vec<Planar2> {
        let mut out: Vec<Planar2> = Vec::new();
        for &p in iter {
            while out.len() >= 2 {
                let a = &out[out.len() - 2];
                let b = &out[out.len() - 1];
                if b.sub(a).cross(&p.sub(b)).is_positive() {
                    break;
                }
                out.pop();
            }
            out.push(p.clone());
        }
        out
    };
    let mut lower = chain(&mut sorted.iter());
    let mut upper = chain(&mut sorted.iter().rev());
    lower.pop();
    upper.pop();
    lower.append(&mut upper);
    if lower.len() < 3 {
        return Err(GeometryError::DegenerateInput("points are collinear".into()));
    }
    Ok(PlanarHull { vertices: lower })
}

impl PlanarHull {
    fn edges(&self) -> impl Iterator<Item = (&Planar2, &Planar2)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    /// Exact membership, boundary included.
    pub fn contains(&self, p: &Planar2) -> bool {
        self.edges()
            .all(|(a, b)| !b.sub(a).cross(&p.sub(a)).is_negative())
    }

    pub fn is_vertex(&self, p: &Planar2) -> bool {
        self.vertices.contains(p)
    }

    pub fn origin_strictly_inside(&self) -> bool {
        self.edges()
            .all(|(a, b)| b.sub(a).cross(&a.neg()).is_positive())
    }

    /// Gauge of the hull: the exact smallest `r >= 0` with `p` in `r` times
    /// the hull. Requires the origin strictly inside. Computed as the maximum
    /// over edges of the linear functional that is 1 on the edge's line and 0
    /// at the origin.
    pub fn minkowski_functional(&self, p: &Planar2) -> Result<Rat, GeometryError> {
        if !self.origin_strictly_inside() {
            return Err(GeometryError::OriginNotInterior);
        }
        let mut best: Option<Rat> = None;
        for (a, b) in self.edges() {
            let value = b.sub(a).cross(p) / b.cross(a);
            if best.as_ref().map_or(true, |m| &value > m) {
                best = Some(value);
            }
        }
        let n = best.expect("hull has edges");
        debug_assert!(!n.is_negative());
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn p(x: i64, y: i64) -> Planar2 {
        Planar2::new(Rat::from_integer(x.into()), Rat::from_integer(y.into()))
    }

    fn pr(xn: i64, xd: i64, yn: i64, yd: i64) -> Planar2 {
        Planar2::new(rat(xn, xd), rat(yn, yd))
    }

    fn square() -> PlanarHull {
        convex_hull_planar(&[p(1, 0), p(0, 1), p(-1, 0), p(0, -1)]).unwrap()
    }

    #[test]
    fn square_hull_has_four_vertices_in_cycle() {
        let hull = square();
        assert_eq!(hull.vertices.len(), 4);
        // Strict convexity and ccw orientation.
        let n = hull.vertices.len();
        for i in 0..n {
            let a = &hull.vertices[i];
            let b = &hull.vertices[(i + 1) % n];
            let c = &hull.vertices[(i + 2) % n];
            assert!(b.sub(a).cross(&c.sub(b)).is_positive());
        }
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let hull = convex_hull_planar(&[
            p(1, 0),
            p(0, 1),
            p(-1, 0),
            p(0, -1),
            Planar2::origin(),
            pr(1, 2, 1, 2), // midpoint of an edge
        ])
        .unwrap();
        assert_eq!(hull.vertices.len(), 4);
        assert!(hull.contains(&pr(1, 2, 1, 2)));
        assert!(!hull.is_vertex(&pr(1, 2, 1, 2)));
    }

    #[test]
    fn reinserting_hull_vertices_is_stable() {
        let pts = [p(2, 1), p(1, 2), p(-2, 1), p(-1, -2), p(0, -2), p(2, -1)];
        let hull = convex_hull_planar(&pts).unwrap();
        let mut doubled: Vec<Planar2> = pts.to_vec();
        doubled.extend(hull.vertices.iter().cloned());
        assert_eq!(convex_hull_planar(&doubled).unwrap(), hull);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            convex_hull_planar(&[p(0, 0), p(1, 1)]),
            Err(GeometryError::DegenerateInput(_))
        ));
        assert!(matches!(
            convex_hull_planar(&[p(0, 0), p(1, 1), p(2, 2), p(-3, -3)]),
            Err(GeometryError::DegenerateInput(_))
        ));
    }

    #[test]
    fn minkowski_functional_on_the_square() {
        let hull = square();
        assert_eq!(hull.minkowski_functional(&pr(1, 2, 0, 1)).unwrap(), rat(1, 2));
        assert_eq!(hull.minkowski_functional(&pr(1, 2, 1, 2)).unwrap(), rat_int(1));
        assert_eq!(
            hull.minkowski_functional(&Planar2::origin()).unwrap(),
            rat_int(0)
        );
        assert_eq!(hull.minkowski_functional(&p(3, 2)).unwrap(), rat_int(5));
        // Positive homogeneity and the membership characterization.
        assert_eq!(hull.minkowski_functional(&p(3, 0)).unwrap(), rat_int(3));
        assert!(hull.contains(&pr(1, 2, 1, 2)));
        assert!(!hull.contains(&p(3, 2)));
    }

    #[test]
    fn minkowski_functional_requires_interior_origin() {
        let hull = convex_hull_planar(&[p(1, 1), p(2, 1), p(1, 2)]).unwrap();
        assert!(matches!(
            hull.minkowski_functional(&p(1, 1)),
            Err(GeometryError::OriginNotInterior)
        ));
    }

    #[test]
    fn gauge_is_a_norm_on_symmetric_hulls() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let mut pts = Vec::new();
            for _ in 0..rng.gen_range(3..8) {
                let q = p(rng.gen_range(-5..=5), rng.gen_range(-5..=5));
                if q.is_origin() {
                    continue;
                }
                pts.push(q.neg());
                pts.push(q);
            }
            let Ok(hull) = convex_hull_planar(&pts) else {
                continue;
            };
            if !hull.origin_strictly_inside() {
                continue;
            }
            let a = p(rng.gen_range(-9..=9), rng.gen_range(-9..=9));
            let b = p(rng.gen_range(-9..=9), rng.gen_range(-9..=9));
            let sum = Planar2::new(&a.x + &b.x, &a.y + &b.y);
            let na = hull.minkowski_functional(&a).unwrap();
            let nb = hull.minkowski_functional(&b).unwrap();
            let ns = hull.minkowski_functional(&sum).unwrap();
            assert!(ns <= &na + &nb);
            // Symmetry and homogeneity.
            assert_eq!(hull.minkowski_functional(&a.neg()).unwrap(), na);
            let scaled = Planar2::new(&a.x * rat_int(3), &a.y * rat_int(3));
            assert_eq!(hull.minkowski_functional(&scaled).unwrap(), na * rat_int(3));
        }
    }

    #[test]
    fn basis_projects_and_unprojects_plane_members() {
        use crate::spectral_field::int_mode;
        let freqs = [int_mode(1, 2, 2), int_mode(2, 1, -2), int_mode(3, 3, 0)];
        let basis = PlanarBasis::for_support(freqs.iter()).unwrap();
        // b2 is orthogonal to b1 and the normal is orthogonal to both.
        assert!(basis.b1.dot(&basis.b2).is_zero());
        assert!(basis.oriented_normal.dot(&basis.b1).is_zero());
        assert!(basis.oriented_normal.dot(&basis.b2).is_zero());
        for n in &freqs {
            let q = basis.project(n).expect("in plane");
            assert_eq!(&basis.unproject(&q), n);
        }
        assert!(basis.project(&int_mode(0, 0, 1)).is_none());
    }

    #[test]
    fn basis_orientation_matches_projected_cross_sign() {
        use crate::spectral_field::int_mode;
        let a = int_mode(1, 0, 0);
        let b = int_mode(0, 2, 0);
        let basis = PlanarBasis::for_support([&a, &b]).unwrap();
        let pa = basis.project(&a).unwrap();
        let pb = basis.project(&b).unwrap();
        let cross3 = a.cross(&b);
        let along = cross3.dot(&basis.oriented_normal);
        assert_eq!(pa.cross(&pb).is_positive(), along.is_positive());
    }
}
