//! The lattice of integer combinations of a frequency set, with exact
//! enumeration of its points inside a ball. Supplies the default truncation
//! set for simulations: every pairwise sum of support frequencies lands in
//! the ball of twice the largest norm, so the truncation always covers the
//! quadratic interactions of the field it was built from.

use crate::rat::{Frequency, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// Free abelian group generated by a finite set of rational frequencies,
/// held as a row-echelon basis over the integers (scaled by the common
/// denominator of the generators).
#[derive(Debug, Clone)]
pub struct FrequencyLattice {
    basis: Vec<Frequency>,
    /// First nonzero coordinate of each basis row; strictly increasing.
    pivots: Vec<usize>,
}

impl FrequencyLattice {
    /// Reduces the generators to a basis. All-zero input yields the rank-0
    /// lattice containing only the origin.
    pub fn from_generators<'a, I>(generators: I) -> FrequencyLattice
    where
        I: IntoIterator<Item = &'a Frequency>,
    {
        // Clear denominators once; integer row reduction is then exact.
        let gens: Vec<Frequency> = generators.into_iter().cloned().collect();
        let denom = gens
            .iter()
            .flat_map(|f| f.0.iter())
            .map(|c| c.denom().clone())
            .fold(BigInt::one(), num_integer::lcm);
        let mut rows: Vec<[BigInt; 3]> = gens
            .iter()
            .map(|f| {
                [
                    (&f.0[0] * &denom).numer().clone(),
                    (&f.0[1] * &denom).numer().clone(),
                    (&f.0[2] * &denom).numer().clone(),
                ]
            })
            .collect();

        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..3 {
            loop {
                // Smallest nonzero entry in this column at or below `rank`.
                let mut best: Option<usize> = None;
                for i in rank..rows.len() {
                    if !rows[i][col].is_zero()
                        && best.map_or(true, |b: usize| {
                            rows[i][col].abs() < rows[b][col].abs()
                        })
                    {
                        best = Some(i);
                    }
                }
                let Some(b) = best else { break };
                rows.swap(rank, b);
                let mut clean = true;
                for i in (rank + 1)..rows.len() {
                    if rows[i][col].is_zero() {
                        continue;
                    }
                    let q = rows[i][col].div_floor(&rows[rank][col]);
                    for c in 0..3 {
                        let d = &q * &rows[rank][c];
                        rows[i][c] -= d;
                    }
                    if !rows[i][col].is_zero() {
                        clean = false;
                    }
                }
                if clean {
                    if rows[rank][col].is_negative() {
                        for c in 0..3 {
                            rows[rank][c] = -rows[rank][c].clone();
                        }
                    }
                    pivots.push(col);
                    rank += 1;
                    break;
                }
            }
        }

        let basis = rows[..rank]
            .iter()
            .map(|row| {
                Frequency::new(
                    Rat::new(row[0].clone(), denom.clone()),
                    Rat::new(row[1].clone(), denom.clone()),
                    Rat::new(row[2].clone(), denom.clone()),
                )
            })
            .collect();
        FrequencyLattice { basis, pivots }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Frequency] {
        &self.basis
    }

    /// Exact membership test: peels off one integer coordinate per basis row
    /// using the echelon structure, then requires a zero remainder.
    pub fn contains(&self, f: &Frequency) -> bool {
        let mut rem = f.clone();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let c = &rem.0[p] / &row.0[p];
            if !c.is_integer() {
                return false;
            }
            rem = rem.sub(&row.scale(&c));
        }
        rem.is_zero()
    }

    /// All lattice points x with |x|^2 <= radius_sq, origin included.
    ///
    /// Coefficient bounds come from the Gram ellipsoid: writing x = c B with
    /// Gram matrix G = B B^T, the constraint c G c^T <= R^2 confines each
    /// coefficient to |c_i| <= sqrt(R^2 (G^{-1})_{ii}). The resulting box is
    /// filtered by the exact rational norm.
    pub fn points_in_ball(&self, radius_sq: &Rat) -> Vec<Frequency> {
        if radius_sq.is_negative() {
            return Vec::new();
        }
        let r = self.rank();
        if r == 0 {
            return vec![Frequency::zero()];
        }
        let gram: Vec<Vec<Rat>> = (0..r)
            .map(|i| (0..r).map(|j| self.basis[i].dot(&self.basis[j])).collect())
            .collect();
        let inv = invert_spd(gram);
        let limits: Vec<i64> = (0..r)
            .map(|i| {
                let bound = radius_sq * &inv[i][i];
                floor_sqrt(&bound)
                    .to_i64()
                    .expect("coefficient range exceeds i64")
            })
            .collect();

        let mut out = Vec::new();
        let mut stack = vec![(0usize, Frequency::zero())];
        while let Some((depth, partial)) = stack.pop() {
            if depth == r {
                if partial.norm_sq() <= *radius_sq {
                    out.push(partial);
                }
                continue;
            }
            for c in -limits[depth]..=limits[depth] {
                stack.push((depth + 1, partial.add(&self.basis[depth].scale_int(c))));
            }
        }
        out.sort();
        out
    }
}

/// Default simulation truncation: the lattice generated by the support,
/// cut to the ball of radius twice the largest support norm, origin removed.
/// Contains the support and every pairwise sum of support frequencies.
pub fn default_truncation(support: &BTreeSet<Frequency>) -> BTreeSet<Frequency> {
    if support.is_empty() {
        return BTreeSet::new();
    }
    let lattice = FrequencyLattice::from_generators(support.iter());
    let max_norm_sq = support.iter().map(Frequency::norm_sq).max().unwrap();
    let radius_sq = max_norm_sq * Rat::from_integer(BigInt::from(4));
    lattice
        .points_in_ball(&radius_sq)
        .into_iter()
        .filter(|f| !f.is_zero())
        .collect()
}

/// floor(sqrt(x)) for x >= 0, exact: floor(sqrt(p/q)) = isqrt(floor(p/q)).
fn floor_sqrt(x: &Rat) -> BigInt {
    x.floor().to_integer().sqrt()
}

/// Gauss-Jordan inverse of a symmetric positive definite rational matrix.
fn invert_spd(mut a: Vec<Vec<Rat>>) -> Vec<Vec<Rat>> {
    let n = a.len();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    for k in 0..n {
        // Positive definiteness keeps every natural pivot nonzero.
        assert!(!a[k][k].is_zero(), "matrix is not positive definite");
        let p = a[k][k].clone();
        for j in 0..n {
            a[k][j] /= &p;
            inv[k][j] /= &p;
        }
        for i in 0..n {
            if i == k || a[i][k].is_zero() {
                continue;
            }
            let f = a[i][k].clone();
            for j in 0..n {
                let da = &f * &a[k][j];
                a[i][j] -= da;
                let di = &f * &inv[k][j];
                inv[i][j] -= di;
            }
        }
    }
    inv
}
