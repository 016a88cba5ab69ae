//! Pairwise mode interaction: the projected convective bracket of two modes,
//! its decomposition in the frame of the pair's plane, and the exact
//! classification of non-interacting pairs.
//!
//! The bracket here carries no leading `i/2`; the dynamics applies that factor
//! when assembling the right-hand side.

use crate::linalg::{CVec3, Mat3, Vec3, C};
use crate::rat::Frequency;
use crate::spectral_field::{ModeCoefficient, DEFAULT_TOL};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InteractionError {
    #[error("pair frequencies sum to zero; the bracket output frequency is undefined")]
    AntipodalPair,
    #[error("frequencies are parallel; the pair frame is undefined")]
    ParallelPair,
    #[error("coefficient at {n} violates divergence-free beyond tolerance (relative error {error:.3e})")]
    DivergenceViolation { n: Frequency, error: f64 },
    #[error("rotation is undefined for equal or antipodal directions")]
    UndefinedRotation,
    #[error("zero vector where a direction is required")]
    ZeroVector,
    #[error("a Beltrami coefficient needs an explicit sign")]
    UnsignedBeltrami,
}

/// Projects `v` onto the plane orthogonal to `n`.
pub fn helmholtz_project(n: &Frequency, v: CVec3) -> Result<CVec3, InteractionError> {
    if n.is_zero() {
        return Err(InteractionError::ZeroVector);
    }
    let nf = Vec3(n.to_f64());
    let n_hat = nf.normalized();
    let along = v.dot_real(n_hat);
    Ok(v - n_hat.to_complex().scale(along))
}

/// `P_{n1+n2}[(u1 . n2) u2 + (u2 . n1) u1]`, the convective contribution of
/// the ordered-symmetric pair to the output mode `n1 + n2`.
pub fn pair_bracket(
    n1: &Frequency,
    u1: ModeCoefficient,
    n2: &Frequency,
    u2: ModeCoefficient,
) -> Result<CVec3, InteractionError> {
    let sum = n1.add(n2);
    if sum.is_zero() {
        return Err(InteractionError::AntipodalPair);
    }
    let raw = raw_bracket(Vec3(n1.to_f64()), u1, Vec3(n2.to_f64()), u2);
    helmholtz_project(&sum, raw)
}

/// Unprojected bracket on f64 frequencies; shared with the dynamics hot path.
pub(crate) fn raw_bracket(n1: Vec3, u1: CVec3, n2: Vec3, u2: CVec3) -> CVec3 {
    u2.scale(u1.dot_real(n2)) + u1.scale(u2.dot_real(n1))
}

/// Orthonormal frame of a nonparallel pair: the plane normal
/// `e_perp = (n1 x n2)/|n1 x n2|` and the in-plane tangents
/// `e_par(n) = e_perp x n/|n|` for `n1`, `n2` and `n1 + n2`.
#[derive(Debug, Clone, Copy)]
pub struct PlanarFrame {
    pub e_perp: Vec3,
    pub e_par_1: Vec3,
    pub e_par_2: Vec3,
    pub e_par_sum: Vec3,
    pub norm_1: f64,
    pub norm_2: f64,
    pub norm_sum: f64,
    /// `(n1 x n2) . e_perp`; positive with this orientation convention.
    pub cross_dot: f64,
}

impl PlanarFrame {
    pub fn for_pair(n1: &Frequency, n2: &Frequency) -> Result<PlanarFrame, InteractionError> {
        if n1.is_parallel_to(n2) {
            return Err(InteractionError::ParallelPair);
        }
        let a = Vec3(n1.to_f64());
        let b = Vec3(n2.to_f64());
        let cross = a.cross(b);
        let e_perp = cross.normalized();
        let sum = a + b;
        Ok(PlanarFrame {
            e_perp,
            e_par_1: e_perp.cross(a.normalized()),
            e_par_2: e_perp.cross(b.normalized()),
            e_par_sum: e_perp.cross(sum.normalized()),
            norm_1: a.norm(),
            norm_2: b.norm(),
            norm_sum: sum.norm(),
            cross_dot: cross.dot(e_perp),
        })
    }
}

/// The bracket written in the pair frame:
/// `prefactor * (parallel_part * e_par_sum + perp_part * e_perp)` with
/// `prefactor = ((n1 x n2) . e_perp)/(|n1||n2|)`,
/// `parallel_part = u1_par u2_par (|n2|^2 - |n1|^2)/|n1+n2|` and
/// `perp_part = u1_par u2_perp |n2| - u2_par u1_perp |n1|`.
#[derive(Debug, Clone, Copy)]
pub struct BracketDecomposition {
    pub frame: PlanarFrame,
    pub prefactor: f64,
    pub parallel_part: C,
    pub perp_part: C,
    pub u1_par: C,
    pub u1_perp: C,
    pub u2_par: C,
    pub u2_perp: C,
}

impl BracketDecomposition {
    pub fn recombine(&self) -> CVec3 {
        let par = self.frame.e_par_sum.to_complex().scale(self.parallel_part);
        let perp = self.frame.e_perp.to_complex().scale(self.perp_part);
        (par + perp).scale_re(self.prefactor)
    }
}

pub fn pair_bracket_decomposed(
    n1: &Frequency,
    u1: ModeCoefficient,
    n2: &Frequency,
    u2: ModeCoefficient,
) -> Result<BracketDecomposition, InteractionError> {
    let frame = PlanarFrame::for_pair(n1, n2)?;
    let u1_par = u1.dot_real(frame.e_par_1);
    let u1_perp = u1.dot_real(frame.e_perp);
    let u2_par = u2.dot_real(frame.e_par_2);
    let u2_perp = u2.dot_real(frame.e_perp);
    let prefactor = frame.cross_dot / (frame.norm_1 * frame.norm_2);
    let parallel_part =
        u1_par * u2_par * ((frame.norm_2.powi(2) - frame.norm_1.powi(2)) / frame.norm_sum);
    let perp_part = u1_par * u2_perp * frame.norm_2 - u2_par * u1_perp * frame.norm_1;
    Ok(BracketDecomposition {
        frame,
        prefactor,
        parallel_part,
        perp_part,
        u1_par,
        u1_perp,
        u2_par,
        u2_perp,
    })
}

/// Why a pair fails to interact, if it does.
#[derive(Debug, Clone, PartialEq)]
pub enum InteractionCase {
    Interacting,
    /// Frequencies linearly dependent (exact).
    CaseParallel,
    /// Both coefficients orthogonal to the pair plane.
    CasePerpendicular,
    /// Equal radii (exact) with `u2 = gamma R_{n1->n2} u1`.
    CaseEqualRadius { gamma: C },
}

/// Decides non-interaction numerically (bracket norm against
/// `tol * |u1||u2| max(|n1|,|n2|)`), then identifies which structural case
/// holds. Exact rational arithmetic answers the parallel and equal-radius
/// questions; coefficient conditions use the tolerance. In the measure-zero
/// corner where the bracket is below tolerance but no case re-verifies, the
/// pair is reported `Interacting`.
pub fn classify_pair(
    n1: &Frequency,
    u1: ModeCoefficient,
    n2: &Frequency,
    u2: ModeCoefficient,
    tol: f64,
) -> Result<InteractionCase, InteractionError> {
    let tol = if tol > 0.0 { tol } else { DEFAULT_TOL };
    for (n, u) in [(n1, u1), (n2, u2)] {
        let nf = Vec3(n.to_f64());
        let div = u.dot_real(nf).norm();
        let scale = nf.norm() * u.norm();
        if div > tol * scale {
            return Err(InteractionError::DivergenceViolation {
                n: n.clone(),
                error: div / scale,
            });
        }
    }
    if n1.add(n2).is_zero() {
        // Antipodal pair: no output mode exists; degenerate parallel case.
        return Ok(InteractionCase::CaseParallel);
    }
    let bracket = pair_bracket(n1, u1, n2, u2)?;
    let scale = u1.norm() * u2.norm() * Vec3(n1.to_f64()).norm().max(Vec3(n2.to_f64()).norm());
    if bracket.norm() > tol * scale {
        return Ok(InteractionCase::Interacting);
    }
    if n1.is_parallel_to(n2) {
        return Ok(InteractionCase::CaseParallel);
    }
    let frame = PlanarFrame::for_pair(n1, n2)?;
    let u1_par = u1.dot_real(frame.e_par_1);
    let u2_par = u2.dot_real(frame.e_par_2);
    if u1_par.norm() <= tol * u1.norm() && u2_par.norm() <= tol * u2.norm() {
        return Ok(InteractionCase::CasePerpendicular);
    }
    if n1.norm_sq() == n2.norm_sq() && u1_par.norm() > tol * u1.norm() {
        let gamma = u2_par / u1_par;
        let n1_hat = Vec3(n1.to_f64()).normalized();
        let n2_hat = Vec3(n2.to_f64()).normalized();
        let rot = rotation_geodesic(n1_hat, n2_hat)?;
        let predicted = rot.apply_complex(u1).scale(gamma);
        let err = (u2 - predicted).norm();
        if err <= tol * u2.norm().max(predicted.norm()) {
            return Ok(InteractionCase::CaseEqualRadius { gamma });
        }
    }
    Ok(InteractionCase::Interacting)
}

/// Proper rotation (orthogonal, det +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation(Mat3::IDENTITY);

    /// Caller asserts the matrix is a proper rotation; checked in debug.
    pub fn from_matrix_unchecked(m: Mat3) -> Rotation {
        debug_assert!((m.det() - 1.0).abs() < 1e-9);
        Rotation(m)
    }

    pub fn matrix(&self) -> Mat3 {
        self.0
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.0.apply(v)
    }

    /// Componentwise action on a complex vector (rotates real and imaginary
    /// parts separately).
    pub fn apply_complex(&self, v: CVec3) -> CVec3 {
        self.0.apply_complex(v)
    }

    /// `self . other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    pub fn inverse(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    /// Rotation about `axis` (unit) by `angle`, right-hand rule.
    pub fn about_axis(axis: Vec3, angle: f64) -> Rotation {
        let (s, c) = angle.sin_cos();
        let m = Mat3::IDENTITY
            .scale(c)
            .add(Mat3::skew(axis).scale(s))
            .add(Mat3::outer(axis, axis).scale(1.0 - c));
        Rotation(m)
    }
}

/// The rotation taking unit `omega1` to unit `omega2` along their common
/// great circle: axis `omega1 x omega2`, angle in `(0, pi)`. Undefined for
/// `omega2 = +-omega1`.
pub fn rotation_geodesic(omega1: Vec3, omega2: Vec3) -> Result<Rotation, InteractionError> {
    if omega1.norm() == 0.0 || omega2.norm() == 0.0 {
        return Err(InteractionError::ZeroVector);
    }
    let a = omega1.normalized();
    let b = omega2.normalized();
    let cross = a.cross(b);
    let s = cross.norm();
    if s < 1e-14 {
        return Err(InteractionError::UndefinedRotation);
    }
    let k = cross.scale(1.0 / s);
    let c = a.dot(b);
    let m = Mat3::IDENTITY
        .scale(c)
        .add(Mat3::skew(k).scale(s))
        .add(Mat3::outer(k, k).scale(1.0 - c));
    Ok(Rotation(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeltramiSign {
    Plus,
    Minus,
    Neither,
}

/// Tests whether `u` is an eigenvector of `i n x` with eigenvalue `+|n|`
/// (Plus) or `-|n|` (Minus), within a relative tolerance.
pub fn beltrami_sign(n: &Frequency, u: ModeCoefficient, tol: f64) -> BeltramiSign {
    let tol = if tol > 0.0 { tol } else { DEFAULT_TOL };
    let nf = Vec3(n.to_f64());
    let norm_n = nf.norm();
    if norm_n == 0.0 || u.norm() == 0.0 {
        return BeltramiSign::Neither;
    }
    let curl = u.cross_from_real(nf).scale(C::i());
    let scale = norm_n * u.norm();
    let err_plus = (curl - u.scale_re(norm_n)).norm();
    let err_minus = (curl + u.scale_re(norm_n)).norm();
    if err_plus <= tol * scale {
        BeltramiSign::Plus
    } else if err_minus <= tol * scale {
        BeltramiSign::Minus
    } else {
        BeltramiSign::Neither
    }
}

/// Builds a coefficient of the requested Beltrami sign at `n`:
/// `amplitude * (t1 +- i t2)` over a deterministic tangent basis, where `t1`
/// is the normalized projection of the standard basis vector least aligned
/// with `n` and `t2 = n_hat x t1`. The result has norm `sqrt(2) |amplitude|`.
pub fn make_beltrami_coeff(
    n: &Frequency,
    sign: BeltramiSign,
    amplitude: C,
) -> Result<ModeCoefficient, InteractionError> {
    if n.is_zero() {
        return Err(InteractionError::ZeroVector);
    }
    let n_hat = Vec3(n.to_f64()).normalized();
    let axis = n_hat.least_aligned_axis();
    let mut e = Vec3::ZERO;
    e.0[axis] = 1.0;
    let t1 = (e - n_hat.scale(e.dot(n_hat))).normalized();
    let t2 = n_hat.cross(t1);
    let i_t2 = t2.to_complex().scale(C::i());
    let base = match sign {
        BeltramiSign::Plus => t1.to_complex() + i_t2,
        BeltramiSign::Minus => t1.to_complex() - i_t2,
        BeltramiSign::Neither => return Err(InteractionError::UnsignedBeltrami),
    };
    Ok(base.scale(amplitude))
}
