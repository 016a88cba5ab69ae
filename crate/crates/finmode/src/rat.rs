//! Exact rational scalars and 3-vectors used for frequencies.
//!
//! All structural decisions (parallelism, coplanarity, equal radii, hull
//! membership) are made on exact rationals; floating point only enters when a
//! quantity is genuinely metric (square roots, angles, coefficients).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Returns `Some(k)` when `r` is an integer that fits in `i64`.
pub fn rat_to_integer(r: &Rat) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

/// Exact rational 3-vector. Doubles as a lattice frequency; a support
/// frequency is additionally required to be nonzero, which is enforced at the
/// field boundary rather than here.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frequency(pub [Rat; 3]);

impl Frequency {
    pub fn new(x: Rat, y: Rat, z: Rat) -> Self {
        Frequency([x, y, z])
    }

    pub fn from_ints(x: i64, y: i64, z: i64) -> Self {
        Frequency([rat_int(x), rat_int(y), rat_int(z)])
    }

    pub fn zero() -> Self {
        Frequency([Rat::zero(), Rat::zero(), Rat::zero()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Frequency) -> Frequency {
        Frequency([
            &self.0[0] + &other.0[0],
            &self.0[1] + &other.0[1],
            &self.0[2] + &other.0[2],
        ])
    }

    pub fn sub(&self, other: &Frequency) -> Frequency {
        Frequency([
            &self.0[0] - &other.0[0],
            &self.0[1] - &other.0[1],
            &self.0[2] - &other.0[2],
        ])
    }

    pub fn neg(&self) -> Frequency {
        Frequency([-&self.0[0], -&self.0[1], -&self.0[2]])
    }

    pub fn scale(&self, s: &Rat) -> Frequency {
        Frequency([&self.0[0] * s, &self.0[1] * s, &self.0[2] * s])
    }

    pub fn scale_int(&self, s: i64) -> Frequency {
        self.scale(&rat_int(s))
    }

    pub fn dot(&self, other: &Frequency) -> Rat {
        &self.0[0] * &other.0[0] + &self.0[1] * &other.0[1] + &self.0[2] * &other.0[2]
    }

    pub fn cross(&self, other: &Frequency) -> Frequency {
        let [a1, a2, a3] = &self.0;
        let [b1, b2, b3] = &other.0;
        Frequency([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm_sq(&self) -> Rat {
        self.dot(self)
    }

    pub fn norm_f64(&self) -> f64 {
        self.norm_sq().to_f64().unwrap_or(f64::NAN).sqrt()
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [
            self.0[0].to_f64().unwrap_or(f64::NAN),
            self.0[1].to_f64().unwrap_or(f64::NAN),
            self.0[2].to_f64().unwrap_or(f64::NAN),
        ]
    }

    pub fn is_parallel_to(&self, other: &Frequency) -> bool {
        self.cross(other).is_zero()
    }

    /// Scalar triple product; zero exactly when the three vectors are coplanar
    /// with the origin.
    pub fn triple(&self, b: &Frequency, c: &Frequency) -> Rat {
        self.dot(&b.cross(c))
    }

    /// The first nonzero component is positive. Of `{n, -n}` exactly one is
    /// lexicographically positive; used wherever a sign convention is needed.
    pub fn is_lex_positive(&self) -> bool {
        for c in &self.0 {
            if c.is_positive() {
                return true;
            }
            if c.is_negative() {
                return false;
            }
        }
        false
    }

    pub fn lex_positive(&self) -> Frequency {
        if self.is_lex_positive() || self.is_zero() {
            self.clone()
        } else {
            self.neg()
        }
    }

    /// Smallest integer-coordinate multiple with the same direction and a
    /// lexicographically positive leading component. Zero maps to zero.
    pub fn primitive_direction(&self) -> Frequency {
        self.primitive_oriented().lex_positive()
    }

    /// Like `primitive_direction` but keeps the original sign (never flips
    /// to the antipode); used where orientation is meaningful.
    pub fn primitive_oriented(&self) -> Frequency {
        if self.is_zero() {
            return self.clone();
        }
        let lcm_den = self
            .0
            .iter()
            .map(|c| c.denom().clone())
            .fold(BigInt::one(), num_integer::lcm);
        let ints: Vec<BigInt> = self.0.iter().map(|c| (c * &lcm_den).numer().clone()).collect();
        let g = ints
            .iter()
            .fold(BigInt::zero(), |acc, v| num_integer::gcd(acc, v.abs()));
        Frequency([
            Rat::from_integer(&ints[0] / &g),
            Rat::from_integer(&ints[1] / &g),
            Rat::from_integer(&ints[2] / &g),
        ])
    }
}

impl fmt::Debug for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}
