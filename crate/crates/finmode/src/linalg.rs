//! Small fixed-size real and complex vector/matrix helpers.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C = Complex64;

/// Real 3-vector.
#[derive(Clone, Copy, PartialEq)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        self.scale(1.0 / n)
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Index of the standard basis vector least aligned with `self`
    /// (smallest |component|, ties to the smaller index).
    pub fn least_aligned_axis(self) -> usize {
        let mut best = 0;
        for k in 1..3 {
            if self.0[k].abs() < self.0[best].abs() {
                best = k;
            }
        }
        best
    }

    pub fn to_complex(self) -> CVec3 {
        CVec3([C::new(self.0[0], 0.0), C::new(self.0[1], 0.0), C::new(self.0[2], 0.0)])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

impl std::fmt::Debug for Vec3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}, {}]", self.0[0], self.0[1], self.0[2])
    }
}

/// Complex 3-vector.
#[derive(Clone, Copy, PartialEq)]
pub struct CVec3(pub [C; 3]);

impl CVec3 {
    pub const ZERO: CVec3 = CVec3([C::new(0.0, 0.0); 3]);

    pub fn new(x: C, y: C, z: C) -> Self {
        CVec3([x, y, z])
    }

    pub fn from_re_im(re: [f64; 3], im: [f64; 3]) -> Self {
        CVec3([
            C::new(re[0], im[0]),
            C::new(re[1], im[1]),
            C::new(re[2], im[2]),
        ])
    }

    pub fn re(self) -> Vec3 {
        Vec3([self.0[0].re, self.0[1].re, self.0[2].re])
    }

    pub fn im(self) -> Vec3 {
        Vec3([self.0[0].im, self.0[1].im, self.0[2].im])
    }

    pub fn conj(self) -> CVec3 {
        CVec3([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }

    /// Bilinear dot product (no conjugation); the product pairing real
    /// frequencies with complex coefficients.
    pub fn dot(self, other: CVec3) -> C {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn dot_real(self, other: Vec3) -> C {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    /// Hermitian inner product, conjugating `self`.
    pub fn dot_herm(self, other: CVec3) -> C {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1] + self.0[2].conj() * other.0[2]
    }

    pub fn norm_sq(self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: C) -> CVec3 {
        CVec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn scale_re(self, s: f64) -> CVec3 {
        CVec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Cross product with a real vector on the left: `n x self`.
    pub fn cross_from_real(self, n: Vec3) -> CVec3 {
        let [a1, a2, a3] = n.0;
        let [b1, b2, b3] = self.0;
        CVec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, o: CVec3) -> CVec3 {
        CVec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for CVec3 {
    type Output = CVec3;
    fn sub(self, o: CVec3) -> CVec3 {
        CVec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for CVec3 {
    type Output = CVec3;
    fn neg(self) -> CVec3 {
        self.scale_re(-1.0)
    }
}

impl std::fmt::Debug for CVec3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}, {}]", self.0[0], self.0[1], self.0[2])
    }
}

/// Real 3x3 matrix, row-major.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Mat3 {
        Mat3([r0.0, r1.0, r2.0])
    }

    pub fn transpose(self) -> Mat3 {
        let m = self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(self) -> f64 {
        let m = self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn apply(self, v: Vec3) -> Vec3 {
        Vec3([
            Vec3(self.0[0]).dot(v),
            Vec3(self.0[1]).dot(v),
            Vec3(self.0[2]).dot(v),
        ])
    }

    /// Applies the real matrix to a complex vector componentwise (acting on
    /// real and imaginary parts separately).
    pub fn apply_complex(self, v: CVec3) -> CVec3 {
        let re = self.apply(v.re());
        let im = self.apply(v.im());
        CVec3::from_re_im(re.0, im.0)
    }

    /// Skew-symmetric cross-product matrix: `skew(n) v = n x v`.
    pub fn skew(n: Vec3) -> Mat3 {
        let [x, y, z] = n.0;
        Mat3([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    }

    /// Outer product `a b^T`.
    pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = a.0[i] * b.0[j];
            }
        }
        Mat3(m)
    }

    pub fn add(self, o: Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.0[i][j] + o.0[i][j];
            }
        }
        Mat3(m)
    }

    pub fn scale(self, s: f64) -> Mat3 {
        let mut m = self.0;
        for row in &mut m {
            for v in row {
                *v *= s;
            }
        }
        Mat3(m)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(m)
    }
}
