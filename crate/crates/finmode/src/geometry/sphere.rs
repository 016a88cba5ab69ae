//! Spherical polygons cut from the unit sphere by a non-central plane, their
//! Gauss-Bonnet area, and the holonomy of the geodesic rotation loop around
//! their vertices: composing the vertex-to-vertex great-circle rotations all
//! the way around returns a rotation about the first vertex whose angle is,
//! up to sign, the polygon's area.

use super::GeometryError;
use crate::interaction::{rotation_geodesic, Rotation};
use crate::linalg::Vec3;
use std::f64::consts::PI;

const PLANE_TOL: f64 = 1e-9;

/// Convex polygon on the unit sphere whose vertices share a circle that is
/// not a great circle, stored in cyclic order.
#[derive(Debug, Clone)]
pub struct SphericalPolygon {
    pub vertices: Vec<Vec3>,
    /// Unit normal of the common plane, oriented toward the polygon's side.
    pub plane_normal: Vec3,
    /// Distance of the plane from the origin, in (0, 1).
    pub plane_offset: f64,
}

impl SphericalPolygon {
    /// Validates and normalizes the vertex list: at least three unit vectors,
    /// consecutive ones distinct and non-antipodal, all on one plane missing
    /// the origin, visiting their common circle in cyclic order.
    pub fn new(vertices: Vec<Vec3>) -> Result<SphericalPolygon, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::DegenerateInput(
                "a spherical polygon needs at least three vertices".into(),
            ));
        }
        let vertices: Vec<Vec3> = vertices
            .iter()
            .map(|v| {
                if v.norm() < 1e-12 {
                    Err(GeometryError::DegenerateInput("zero vertex".into()))
                } else {
                    Ok(v.normalized())
                }
            })
            .collect::<Result<_, _>>()?;
        let p = vertices.len();
        for i in 0..p {
            let a = vertices[i];
            let b = vertices[(i + 1) % p];
            if a.cross(b).norm() < 1e-12 {
                return Err(GeometryError::DegenerateInput(
                    "consecutive vertices equal or antipodal".into(),
                ));
            }
        }
        // Newell normal of the cycle; robust for convex input.
        let mut normal = Vec3::ZERO;
        for i in 0..p {
            normal = normal + vertices[i].cross(vertices[(i + 1) % p]);
        }
        if normal.norm() < 1e-12 {
            return Err(GeometryError::DegenerateInput(
                "vertex cycle has no consistent plane".into(),
            ));
        }
        let normal = normal.normalized();
        let offset: f64 = vertices.iter().map(|v| v.dot(normal)).sum::<f64>() / p as f64;
        for v in &vertices {
            if (v.dot(normal) - offset).abs() > PLANE_TOL {
                return Err(GeometryError::DegenerateInput(
                    "vertices do not share a plane".into(),
                ));
            }
        }
        if offset.abs() <= PLANE_TOL {
            return Err(GeometryError::GreatCircle);
        }
        // Simple-cycle check: on the circle the traversal must visit the
        // vertices in angular order (either orientation). The walk of the
        // in-plane angle then winds exactly once forward (gap sum 2 pi) or
        // once backward (gap sum 2 pi (p - 1)); crossing cycles land between.
        let center = normal.scale(offset);
        let t1 = (vertices[0] - center).normalized();
        let t2 = normal.cross(t1);
        let phi: Vec<f64> = vertices
            .iter()
            .map(|v| {
                let d = *v - center;
                d.dot(t2).atan2(d.dot(t1))
            })
            .collect();
        let mut gap_sum = 0.0;
        for i in 0..p {
            let g = (phi[(i + 1) % p] - phi[i]).rem_euclid(2.0 * PI);
            if g < 1e-9 || g > 2.0 * PI - 1e-9 {
                return Err(GeometryError::DegenerateInput(
                    "repeated vertex on the circle".into(),
                ));
            }
            gap_sum += g;
        }
        let winding = (gap_sum / (2.0 * PI)).round() as usize;
        if winding != 1 && winding != p - 1 {
            return Err(GeometryError::DegenerateInput(
                "vertices are not in cyclic order on the circle".into(),
            ));
        }
        // Store the normal oriented toward the polygon's side of the sphere.
        let (normal, offset) = if offset > 0.0 {
            (normal, offset)
        } else {
            (-normal, -offset)
        };
        Ok(SphericalPolygon {
            vertices,
            plane_normal: normal,
            plane_offset: offset,
        })
    }

    /// Sum of interior angles, each measured between the great-circle arcs
    /// meeting at the vertex; in (0, p*pi) for these convex polygons.
    pub fn interior_angle_sum(&self) -> f64 {
        let p = self.vertices.len();
        let mut theta = 0.0;
        for i in 0..p {
            let v = self.vertices[i];
            let prev = self.vertices[(i + p - 1) % p];
            let next = self.vertices[(i + 1) % p];
            theta += arc_angle(prev, v, next);
        }
        theta
    }

    /// Gauss-Bonnet area: angle sum minus (p - 2) pi; lies in (0, 2 pi).
    pub fn area(&self) -> f64 {
        self.interior_angle_sum() - (self.vertices.len() as f64 - 2.0) * PI
    }

    /// Independent oracle: fan triangulation with Girard's excess per
    /// triangle.
    pub fn area_by_triangulation(&self) -> f64 {
        let v0 = self.vertices[0];
        let mut total = 0.0;
        for w in self.vertices[1..].windows(2) {
            let (a, b) = (w[0], w[1]);
            total += arc_angle(a, v0, b) + arc_angle(b, a, v0) + arc_angle(v0, b, a) - PI;
        }
        total
    }
}

/// Angle at `at` between the great-circle arcs toward `a` and `b`, via
/// atan2 of the tangent vectors; well conditioned near 0 and pi, where the
/// acos form loses eight digits.
fn arc_angle(a: Vec3, at: Vec3, b: Vec3) -> f64 {
    let ta = (a - at.scale(a.dot(at))).normalized();
    let tb = (b - at.scale(b.dot(at))).normalized();
    ta.cross(tb).norm().atan2(ta.dot(tb))
}

/// Composes the geodesic rotations around the polygon:
/// vertex 1 -> 2, then 2 -> 3, ..., closing with p -> 1. The result fixes the
/// first vertex and rotates about it by plus or minus the polygon area;
/// reversing the vertex order negates the angle. Returns the composed
/// rotation and its signed angle about the first vertex.
pub fn rotation_loop(polygon: &SphericalPolygon) -> Result<(Rotation, f64), GeometryError> {
    let p = polygon.vertices.len();
    let mut acc = Rotation::IDENTITY;
    for i in 0..p {
        let step = rotation_geodesic(polygon.vertices[i], polygon.vertices[(i + 1) % p])
            .map_err(|_| GeometryError::DegenerateInput("antipodal consecutive vertices".into()))?;
        acc = step.compose(&acc);
    }
    let axis = polygon.vertices[0];
    // Signed angle of acc about the axis it fixes.
    let mut seed = Vec3::ZERO;
    seed.0[axis.least_aligned_axis()] = 1.0;
    let t = (seed - axis.scale(seed.dot(axis))).normalized();
    let s = acc.apply(t);
    let angle = t.cross(s).dot(axis).atan2(t.dot(s));
    Ok((acc, angle))
}
