//! Structure certificates for stationary finite-mode flows: the convective
//! residual assembled over the support and its pairwise sums, the family
//! decision (line, curl eigenfield, planar), vertical polynomial extraction
//! for planar fields, and the viscous / rotating variant with its
//! admissibility table.
//!
//! A structural match is never trusted alone: every certificate other than
//! `NonSolution` is cross-checked against the assembled residual, and a
//! disagreement is an internal error rather than a silent downgrade.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_integer::binomial;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::geometry::{convex_hull_planar, Planar2, PlanarBasis, PlanarHull};
use crate::interaction::{beltrami_sign, helmholtz_project, raw_bracket, BeltramiSign};
use crate::linalg::{CVec3, Vec3, C};
use crate::rat::{Frequency, Rat};
use crate::spectral_field::{
    frequency_doc_parts, FieldError, ModeCoefficient, SpectralField, DEFAULT_TOL,
};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("field is not marked real-valued; classification covers real fields only")]
    ComplexField,
    #[error("field carries a nonzero mean component; split the drift off first")]
    NonZeroMean,
    #[error("field is not classifiable: {0}")]
    InvalidField(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

/// Convective residual of the truncation-free stationarity equations. `map`
/// covers the full interaction support: every support frequency plus every
/// nonzero pairwise sum, so a zero entry is a statement, not an omission.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Largest coefficient norm in `map`.
    pub max_norm: f64,
    /// `max_norm` divided by `scale`; the dimensionless verdict.
    pub relative: f64,
    /// Natural bracket magnitude `max |u_n|^2 * max |n|`.
    pub scale: f64,
    /// First frequency attaining `max_norm`.
    pub worst: Option<Frequency>,
    pub map: BTreeMap<Frequency, CVec3>,
}

/// Assembles `i P_n [sum of convective brackets]` for every output frequency
/// reachable from the support. Unordered distinct pairs contribute once,
/// self-pairs with weight one half; antipodal pairs feed the mean drift and
/// are excluded here. Works for complex-valued fields as well.
pub fn stationarity_residual(field: &SpectralField) -> ResidualReport {
    let modes: Vec<(Frequency, Vec3, CVec3)> = field
        .modes()
        .map(|(n, u)| (n.clone(), Vec3(n.to_f64()), *u))
        .collect();
    let mut map: BTreeMap<Frequency, CVec3> = modes
        .iter()
        .map(|(n, _, _)| (n.clone(), CVec3::ZERO))
        .collect();
    for i in 0..modes.len() {
        for j in i..modes.len() {
            let sum = modes[i].0.add(&modes[j].0);
            if sum.is_zero() {
                continue;
            }
            let raw = raw_bracket(modes[i].1, modes[i].2, modes[j].1, modes[j].2);
            let weighted = if i == j { raw.scale_re(0.5) } else { raw };
            let entry = map.entry(sum).or_insert(CVec3::ZERO);
            *entry = *entry + weighted;
        }
    }
    for (n, v) in map.iter_mut() {
        let projected = helmholtz_project(n, *v).expect("interaction frequencies are nonzero");
        *v = projected.scale(C::i());
    }
    let max_coeff = field.max_coefficient_norm();
    let max_freq = modes.iter().map(|(_, f, _)| f.norm()).fold(0.0, f64::max);
    let scale = max_coeff * max_coeff * max_freq;
    let mut worst = None;
    let mut max_norm = 0.0;
    for (n, v) in &map {
        let norm = v.norm();
        if worst.is_none() || norm > max_norm {
            worst = Some(n.clone());
            max_norm = norm;
        }
    }
    let relative = if scale > 0.0 { max_norm / scale } else { 0.0 };
    ResidualReport {
        max_norm,
        relative,
        scale,
        worst,
        map,
    }
}

/// A coplanar field split against its carrying plane: the horizontal part as
/// circle frequencies with tangential amplitudes, the vertical part as scalar
/// coefficients along the plane normal.
///
/// `normal` is the lexicographically positive primitive normal of the plane,
/// so two decompositions of the same field agree on orientation; `e_perp` is
/// its unit vector. `circle[j]` runs counterclockwise about `e_perp` and
/// `alphas[j]` is the amplitude against the tangential direction
/// `e_perp x n_hat_j`. The polynomial variable for the vertical part is the
/// horizontal profile `w = sum_j i alpha_j e^(i n_j . x)`, which is the
/// scalar vorticity divided by the circle radius.
#[derive(Debug, Clone)]
pub struct PlanarDecomposition {
    pub normal: Frequency,
    pub e_perp: Vec3,
    pub circle: Vec<Frequency>,
    pub alphas: Vec<C>,
    pub radius_sq: Rat,
    pub radius: f64,
    pub u_perp: BTreeMap<Frequency, C>,
    basis: PlanarBasis,
    hull: PlanarHull,
}

impl PlanarDecomposition {
    /// Tangential unit vector at circle vertex `j`.
    pub fn e_par(&self, j: usize) -> Vec3 {
        let n_hat = Vec3(self.circle[j].to_f64()).normalized();
        self.e_perp.cross(n_hat)
    }

    /// Coefficients of the profile `w`.
    pub fn profile_coefficients(&self) -> BTreeMap<Frequency, C> {
        self.circle
            .iter()
            .zip(&self.alphas)
            .map(|(n, a)| (n.clone(), C::i() * a))
            .collect()
    }

    /// Horizontal vector coefficients rebuilt from the circle data.
    pub fn horizontal_coefficients(&self) -> BTreeMap<Frequency, ModeCoefficient> {
        (0..self.circle.len())
            .map(|j| {
                (
                    self.circle[j].clone(),
                    self.e_par(j).to_complex().scale(self.alphas[j]),
                )
            })
            .collect()
    }

    /// Convex-position level of an in-plane frequency: 1 on the circle hull
    /// boundary, q on the boundary of its q-fold sum. `None` off the plane.
    pub fn level(&self, n: &Frequency) -> Option<Rat> {
        let p = self.basis.project(n)?;
        self.hull.minkowski_functional(&p).ok()
    }

    /// Vertical coefficients of `sum_m betas[m-1] (w^m - mean(w^m))`.
    pub fn vertical_from_polynomial(&self, betas: &[f64]) -> BTreeMap<Frequency, C> {
        let w = self.profile_coefficients();
        let mut acc: BTreeMap<Frequency, C> = BTreeMap::new();
        let mut pow = w.clone();
        for (m, beta) in betas.iter().enumerate() {
            if m > 0 {
                pow = convolve(&pow, &w);
            }
            if *beta == 0.0 {
                continue;
            }
            for (f, value) in &pow {
                if f.is_zero() {
                    continue;
                }
                *acc.entry(f.clone()).or_insert_with(|| C::new(0.0, 0.0)) += value * *beta;
            }
        }
        acc
    }
}

enum PlanarShape {
    /// Every coefficient points along the plane normal.
    Perpendicular { normal: Frequency },
    /// Single-radius horizontal circle, possibly with a vertical part.
    Circle(PlanarDecomposition),
    /// Coplanar but outside both shapes; the note explains why.
    Defect(String),
}

/// Angle class in the projected plane: 0 for [0, pi), 1 for [pi, 2 pi).
fn angular_half(p: &Planar2) -> u8 {
    if p.y.is_positive() || (p.y.is_zero() && p.x.is_positive()) {
        0
    } else {
        1
    }
}

fn angular_order(a: &Planar2, b: &Planar2) -> Ordering {
    angular_half(a).cmp(&angular_half(b)).then_with(|| {
        let cross = a.cross(b);
        if cross.is_positive() {
            Ordering::Less
        } else if cross.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    })
}

fn decompose_planar(
    field: &SpectralField,
    basis: &PlanarBasis,
    tol: f64,
) -> Result<PlanarShape, ClassifierError> {
    let normal = basis.oriented_normal.lex_positive();
    // The basis orientation follows the support ordering, not the canonical
    // normal; when they disagree the projected y axis is mirrored for the
    // angular sort so the circle still runs counterclockwise about e_perp.
    let flip = !basis.oriented_normal.is_lex_positive();
    let e_perp = Vec3(normal.to_f64()).normalized();
    let scale = field.max_coefficient_norm();
    let thresh = tol * scale;

    let mut parallel: Vec<(Frequency, C)> = Vec::new();
    let mut u_perp: BTreeMap<Frequency, C> = BTreeMap::new();
    for (n, u) in field.modes() {
        let vertical = u.dot_real(e_perp);
        let n_hat = Vec3(n.to_f64()).normalized();
        let alpha = u.dot_real(e_perp.cross(n_hat));
        if alpha.norm() > thresh {
            parallel.push((n.clone(), alpha));
        }
        if vertical.norm() > thresh {
            u_perp.insert(n.clone(), vertical);
        }
        // The radial component is bounded by the divergence check already.
    }
    if parallel.is_empty() {
        return Ok(PlanarShape::Perpendicular { normal });
    }
    let radius_sq = parallel[0].0.norm_sq();
    if parallel.iter().any(|(n, _)| n.norm_sq() != radius_sq) {
        return Ok(PlanarShape::Defect(
            "horizontal coefficients sit on more than one radius; a stationary horizontal part \
             is a single circle or a line"
                .into(),
        ));
    }
    if parallel.len() < 4 {
        return Ok(PlanarShape::Defect(format!(
            "horizontal support has only {} circle points; a vertical part cannot ride on fewer \
             than four",
            parallel.len()
        )));
    }

    let mut keyed: Vec<(Planar2, Frequency, C)> = Vec::with_capacity(parallel.len());
    for (n, alpha) in parallel {
        let p = basis.project(&n).expect("horizontal frequencies are in-plane");
        let p = if flip {
            Planar2::new(p.x.clone(), -p.y.clone())
        } else {
            p
        };
        keyed.push((p, n, alpha));
    }
    keyed.sort_by(|a, b| angular_order(&a.0, &b.0));
    let circle: Vec<Frequency> = keyed.iter().map(|(_, n, _)| n.clone()).collect();
    let alphas: Vec<C> = keyed.iter().map(|(_, _, a)| *a).collect();

    let count = circle.len();
    if count % 2 != 0 {
        return Err(ClassifierError::InternalInconsistency(
            "odd number of circle points despite conjugate-symmetric support".into(),
        ));
    }
    for j in 0..count / 2 {
        if circle[j + count / 2] != circle[j].neg() {
            return Err(ClassifierError::InternalInconsistency(format!(
                "circle point {} is not antipodal to point {}",
                j + count / 2,
                j
            )));
        }
        let lhs = C::i() * alphas[j + count / 2];
        let rhs = (C::i() * alphas[j]).conj();
        if (lhs - rhs).norm() > tol * scale {
            return Err(ClassifierError::InternalInconsistency(
                "tangential amplitudes are not conjugate-paired across antipodes".into(),
            ));
        }
    }

    let projected: Vec<Planar2> = circle
        .iter()
        .map(|n| basis.project(n).expect("circle frequencies are in-plane"))
        .collect();
    let hull = convex_hull_planar(&projected).map_err(|e| {
        ClassifierError::InternalInconsistency(format!("circle hull failed: {e}"))
    })?;
    if hull.vertices.len() != count {
        return Err(ClassifierError::InternalInconsistency(
            "equal-radius circle points are not in strictly convex position".into(),
        ));
    }
    if !hull.origin_strictly_inside() {
        return Err(ClassifierError::InternalInconsistency(
            "circle hull does not surround the origin".into(),
        ));
    }
    let radius = rat_f64(&radius_sq).sqrt();
    Ok(PlanarShape::Circle(PlanarDecomposition {
        normal,
        e_perp,
        circle,
        alphas,
        radius_sq,
        radius,
        u_perp,
        basis: basis.clone(),
        hull,
    }))
}

/// One peeled level of the vertical part: the side-ladder frequencies at
/// convex-position level `degree` and the real coefficient of
/// `w^degree - mean(w^degree)` carried there.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderLevel {
    pub degree: usize,
    pub beta: f64,
    pub frequencies: Vec<Frequency>,
}

/// Vertical part written as `sum_m betas[m-1] (w^m - mean(w^m))` over the
/// horizontal profile `w`. `betas` runs from degree 1 to the top degree with
/// zeros at absent levels; empty means no vertical part at all.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QPolynomial {
    pub betas: Vec<f64>,
    pub ladder: Vec<LadderLevel>,
}

/// Why a vertical part fails to be polynomial in the horizontal profile.
#[derive(Debug, Error)]
#[error("vertical part is not polynomial in the horizontal profile (level {level}): {reason}")]
pub struct NotRepresentable {
    pub level: Rat,
    pub frequency: Option<Frequency>,
    pub reason: String,
}

fn convolve(a: &BTreeMap<Frequency, C>, b: &BTreeMap<Frequency, C>) -> BTreeMap<Frequency, C> {
    let mut out = BTreeMap::new();
    for (na, ca) in a {
        for (nb, cb) in b {
            *out.entry(na.add(nb)).or_insert_with(|| C::new(0.0, 0.0)) += ca * cb;
        }
    }
    out
}

fn monomial_power(w: &BTreeMap<Frequency, C>, q: usize) -> BTreeMap<Frequency, C> {
    let mut pow = w.clone();
    for _ in 1..q {
        pow = convolve(&pow, w);
    }
    pow
}

fn cpow(base: C, exp: usize) -> C {
    let mut out = C::new(1.0, 0.0);
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Peels the vertical coefficients level by level. At the top occupied level
/// q the data must reproduce the binomial side ladder of `beta * w^q` exactly
/// (within tolerance); the monomial is then subtracted and the level must
/// strictly drop. What remains at the end is the polynomial, top degree
/// first in `ladder`, degree-indexed in `betas`.
pub fn extract_vertical_polynomial(
    dec: &PlanarDecomposition,
    tol: f64,
) -> Result<QPolynomial, NotRepresentable> {
    if dec.u_perp.is_empty() {
        return Ok(QPolynomial::default());
    }
    let count = dec.circle.len();
    let i_alpha: Vec<C> = dec.alphas.iter().map(|a| C::i() * a).collect();
    let w = dec.profile_coefficients();
    let scale: f64 = dec.u_perp.values().map(|v| v.norm()).fold(0.0, f64::max);
    let mut remaining = dec.u_perp.clone();
    let mut peeled: Vec<LadderLevel> = Vec::new();
    let mut top_degree = 0usize;
    let mut previous_level: Option<Rat> = None;

    while !remaining.is_empty() {
        // Highest occupied level; ties resolved by frequency order.
        let mut top: Option<(Frequency, Rat)> = None;
        for n in remaining.keys() {
            let level = dec.level(n).ok_or_else(|| NotRepresentable {
                level: Rat::zero(),
                frequency: Some(n.clone()),
                reason: "vertical coefficient off the carrying plane".into(),
            })?;
            match &top {
                Some((_, best)) if level <= *best => {}
                _ => top = Some((n.clone(), level)),
            }
        }
        let (top_freq, level) = top.expect("nonempty remainder");
        if let Some(prev) = &previous_level {
            if level >= *prev {
                return Err(NotRepresentable {
                    level,
                    frequency: Some(top_freq),
                    reason: "peeling failed to lower the occupied level".into(),
                });
            }
        }
        if !level.is_integer() {
            return Err(NotRepresentable {
                level,
                frequency: Some(top_freq),
                reason: "highest occupied level is not an integer".into(),
            });
        }
        let q = level
            .to_integer()
            .to_usize()
            .filter(|q| (1..=64).contains(q))
            .ok_or_else(|| NotRepresentable {
                level: level.clone(),
                frequency: Some(top_freq.clone()),
                reason: "occupied level outside the supported degree range".into(),
            })?;
        previous_level = Some(level.clone());
        if top_degree == 0 {
            top_degree = q;
        }

        // Leading coefficient read off the corner q * circle[0]; it must be
        // real because antipodal corners carry conjugate values.
        let root = dec.circle[0].scale_int(q as i64);
        let beta_c = remaining
            .get(&root)
            .copied()
            .unwrap_or_else(|| C::new(0.0, 0.0))
            / cpow(i_alpha[0], q);
        if beta_c.norm() > 0.0 && beta_c.im.abs() > tol.max(1e-15) * beta_c.norm() {
            return Err(NotRepresentable {
                level,
                frequency: Some(root),
                reason: "leading coefficient is not real".into(),
            });
        }
        let beta = beta_c.re;

        // Level-q coefficients of w^q live exactly on the side ladders of the
        // scaled hull with binomial values; anything else at this level is a
        // mismatch, as is a ladder point carrying the wrong value.
        let mut ladder_freqs = Vec::with_capacity(count * q);
        for j in 0..count {
            let next = (j + 1) % count;
            for k in 0..q {
                let f = dec.circle[j]
                    .scale_int((q - k) as i64)
                    .add(&dec.circle[next].scale_int(k as i64));
                let predicted = cpow(i_alpha[j], q - k)
                    * cpow(i_alpha[next], k)
                    * (binomial(q as u64, k as u64) as f64 * beta);
                let actual = remaining
                    .get(&f)
                    .copied()
                    .unwrap_or_else(|| C::new(0.0, 0.0));
                if (actual - predicted).norm() > tol * scale {
                    return Err(NotRepresentable {
                        level,
                        frequency: Some(f),
                        reason: "coefficient breaks the binomial ladder pattern".into(),
                    });
                }
                ladder_freqs.push(f);
            }
        }
        for n in remaining.keys() {
            let l = dec.level(n).expect("checked above");
            if l == level && !ladder_freqs.contains(n) {
                return Err(NotRepresentable {
                    level: l,
                    frequency: Some(n.clone()),
                    reason: "top-level coefficient off the side ladder".into(),
                });
            }
        }

        if beta != 0.0 {
            // Subtract beta * (w^q - mean(w^q)); the mean is not vertical data.
            for (f, value) in monomial_power(&w, q) {
                if f.is_zero() {
                    continue;
                }
                *remaining.entry(f).or_insert_with(|| C::new(0.0, 0.0)) -= value * beta;
            }
        }
        remaining.retain(|_, v| v.norm() > tol * scale);
        peeled.push(LadderLevel {
            degree: q,
            beta,
            frequencies: ladder_freqs,
        });
    }

    let mut betas = vec![0.0; top_degree];
    for lv in &peeled {
        betas[lv.degree - 1] = lv.beta;
    }
    Ok(QPolynomial {
        betas,
        ladder: peeled,
    })
}

/// Structural certificate for a stationary ideal flow.
#[derive(Debug, Clone)]
pub enum FlowCertificate {
    /// All support frequencies on one line through the origin.
    Line { direction: Frequency },
    /// Coplanar support with every coefficient along the plane normal.
    PlanarPerp { normal: Frequency },
    /// Coplanar field: single-radius horizontal circle plus a vertical part
    /// polynomial in the horizontal profile.
    PlanarQ {
        decomposition: PlanarDecomposition,
        polynomial: QPolynomial,
    },
    /// Curl eigenfield: `curl u = lambda u` with `lambda^2 = radius_sq`.
    /// Coplanar eigenfields also carry their planar reading.
    Beltrami {
        lambda: f64,
        sign: BeltramiSign,
        radius_sq: Rat,
        planar_form: Option<Box<(PlanarDecomposition, QPolynomial)>>,
    },
    /// No structural family applies; the residual is the witness.
    NonSolution {
        residual: f64,
        worst: Frequency,
        note: String,
    },
}

impl FlowCertificate {
    pub fn family_name(&self) -> &'static str {
        match self {
            FlowCertificate::Line { .. } => "line",
            FlowCertificate::PlanarPerp { .. } => "planar_perpendicular",
            FlowCertificate::PlanarQ { .. } => "planar_polynomial",
            FlowCertificate::Beltrami { .. } => "beltrami",
            FlowCertificate::NonSolution { .. } => "non_solution",
        }
    }

    pub fn is_solution(&self) -> bool {
        !matches!(self, FlowCertificate::NonSolution { .. })
    }
}

fn effective_tol(tol: f64) -> f64 {
    if tol > 0.0 {
        tol
    } else {
        DEFAULT_TOL
    }
}

fn rat_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn preflight(field: &SpectralField, tol: f64) -> Result<(), ClassifierError> {
    if !field.real_valued {
        return Err(ClassifierError::ComplexField);
    }
    let scale = field.max_coefficient_norm();
    if let Some(mean) = field.zero_mode {
        let norm = Vec3(mean).norm();
        if norm > 0.0 && norm > tol * scale {
            return Err(ClassifierError::NonZeroMean);
        }
    }
    if field.is_empty() {
        return Err(ClassifierError::InvalidField("empty support".into()));
    }
    let report = field.validate(tol);
    if !report.is_ok() {
        return Err(ClassifierError::InvalidField(format!(
            "{} validation violation(s), first: {}",
            report.violations.len(),
            report.violations[0]
        )));
    }
    Ok(())
}

fn cross_checked(
    field: &SpectralField,
    certificate: FlowCertificate,
    tol: f64,
) -> Result<FlowCertificate, ClassifierError> {
    let report = stationarity_residual(field);
    if report.relative >= tol {
        return Err(ClassifierError::InternalInconsistency(format!(
            "structural {} match with relative residual {:.3e} at {}",
            certificate.family_name(),
            report.relative,
            report
                .worst
                .map(|n| n.to_string())
                .unwrap_or_else(|| "-".into()),
        )));
    }
    Ok(certificate)
}

fn non_solution(field: &SpectralField, note: String) -> FlowCertificate {
    let report = stationarity_residual(field);
    let worst = report
        .worst
        .or_else(|| field.support().next().cloned())
        .expect("nonempty support");
    FlowCertificate::NonSolution {
        residual: report.relative,
        worst,
        note,
    }
}

/// Decides the structural family of a real, mean-free, divergence-free field.
/// Families are checked from most to least rigid: line, curl eigenfield,
/// planar; a field matching none is a `NonSolution` with the residual as
/// witness. Structural matches are cross-checked against the residual.
pub fn classify_euler(
    field: &SpectralField,
    tol: f64,
) -> Result<FlowCertificate, ClassifierError> {
    let tol = effective_tol(tol);
    preflight(field, tol)?;
    let support: Vec<Frequency> = field.support().cloned().collect();

    let anchor = &support[0];
    if support.iter().all(|n| n.is_parallel_to(anchor)) {
        let direction = anchor.primitive_direction();
        return cross_checked(field, FlowCertificate::Line { direction }, tol);
    }

    let radius_sq = anchor.norm_sq();
    let single_radius = support.iter().all(|n| n.norm_sq() == radius_sq);
    let basis = PlanarBasis::for_support(support.iter()).map_err(|e| {
        ClassifierError::InternalInconsistency(format!("plane basis on non-line support: {e}"))
    })?;
    let coplanar = support.iter().all(|n| basis.contains(n));

    if single_radius {
        let mut signs = field.modes().map(|(n, u)| beltrami_sign(n, *u, tol));
        let first = signs.next().expect("support is nonempty");
        if first != BeltramiSign::Neither && signs.all(|s| s == first) {
            let radius = rat_f64(&radius_sq).sqrt();
            let lambda = match first {
                BeltramiSign::Plus => radius,
                BeltramiSign::Minus => -radius,
                BeltramiSign::Neither => unreachable!(),
            };
            let planar_form = if coplanar {
                let dec = match decompose_planar(field, &basis, tol)? {
                    PlanarShape::Circle(dec) => dec,
                    _ => {
                        return Err(ClassifierError::InternalInconsistency(
                            "coplanar eigenfield did not decompose as a circle".into(),
                        ))
                    }
                };
                let poly = extract_vertical_polynomial(&dec, tol).map_err(|e| {
                    ClassifierError::InternalInconsistency(format!(
                        "coplanar eigenfield vertical part: {e}"
                    ))
                })?;
                let expected_beta = if lambda > 0.0 { 1.0 } else { -1.0 };
                if poly.betas.len() != 1 || (poly.betas[0] - expected_beta).abs() > 1e-9 {
                    return Err(ClassifierError::InternalInconsistency(
                        "coplanar eigenfield vertical part is not plus or minus the profile".into(),
                    ));
                }
                Some(Box::new((dec, poly)))
            } else {
                None
            };
            return cross_checked(
                field,
                FlowCertificate::Beltrami {
                    lambda,
                    sign: first,
                    radius_sq,
                    planar_form,
                },
                tol,
            );
        }
    }

    if coplanar {
        match decompose_planar(field, &basis, tol)? {
            PlanarShape::Perpendicular { normal } => {
                cross_checked(field, FlowCertificate::PlanarPerp { normal }, tol)
            }
            PlanarShape::Circle(dec) => match extract_vertical_polynomial(&dec, tol) {
                Ok(poly) => cross_checked(
                    field,
                    FlowCertificate::PlanarQ {
                        decomposition: dec,
                        polynomial: poly,
                    },
                    tol,
                ),
                Err(err) => Ok(non_solution(
                    field,
                    format!("coplanar but not a circle-plus-polynomial field: {err}"),
                )),
            },
            PlanarShape::Defect(note) => Ok(non_solution(field, note)),
        }
    } else {
        let note = if single_radius {
            "single-radius support without a uniform curl-eigenfield sign".to_string()
        } else {
            "support spans three dimensions across several radii; no structural family applies"
                .to_string()
        };
        Ok(non_solution(field, note))
    }
}

/// Admissible vertical polynomials for a planar circle flow that must stay on
/// its explicit linear viscous / rotating evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QConstraint {
    /// Inviscid and either non-rotating or horizontal plane: any polynomial.
    AnyPolynomial,
    /// Viscous: decay rates agree only for a linear vertical part.
    Linear,
    /// Rotating over a tilted plane: only the curl-eigenfield forms survive.
    PlusMinus,
}

/// The admissibility cell for a planar circle flow under viscosity `nu` and
/// rotation `omega`, given whether the carrying plane is horizontal.
pub fn nsc_q_constraint(nu: f64, omega: f64, horizontal_plane: bool) -> QConstraint {
    if omega == 0.0 || horizontal_plane {
        if nu == 0.0 {
            QConstraint::AnyPolynomial
        } else {
            QConstraint::Linear
        }
    } else {
        QConstraint::PlusMinus
    }
}

/// Ideal structure plus the admissibility verdict under viscosity and
/// rotation: the certified fields evolve by the explicit linear flow with
/// the convective term staying a pressure gradient for all time.
#[derive(Debug, Clone)]
pub struct NscCertificate {
    pub nu: f64,
    pub omega: f64,
    /// Set when the ideal structure was a planar circle flow.
    pub constraint: Option<QConstraint>,
    pub certificate: FlowCertificate,
}

fn vertical_axis() -> Frequency {
    Frequency::from_ints(0, 0, 1)
}

fn first_tilted_frequency(field: &SpectralField) -> Option<Frequency> {
    field.support().find(|n| !n.0[2].is_zero()).cloned()
}

/// Classifies against the viscous / rotating equations. Lines and curl
/// eigenfields pass unconditionally; perpendicular planar fields need a
/// horizontal plane or no rotation; planar circle flows must satisfy the
/// `(nu, omega)` admissibility cell for their vertical polynomial.
pub fn classify_nsc(
    field: &SpectralField,
    nu: f64,
    omega: f64,
    tol: f64,
) -> Result<NscCertificate, ClassifierError> {
    let tol = effective_tol(tol);
    let ideal = classify_euler(field, tol)?;
    let axis = vertical_axis();
    let (constraint, certificate) = match ideal {
        FlowCertificate::PlanarPerp { ref normal }
            if omega != 0.0 && !normal.is_parallel_to(&axis) =>
        {
            let worst = first_tilted_frequency(field).unwrap_or_else(|| normal.clone());
            let report = stationarity_residual(field);
            (
                None,
                FlowCertificate::NonSolution {
                    residual: report.relative,
                    worst,
                    note: "rotation tilts vertical coefficients off a non-horizontal plane; \
                           admissible only with zero rotation or a horizontal plane"
                        .into(),
                },
            )
        }
        FlowCertificate::PlanarQ {
            decomposition,
            polynomial,
        } => {
            let horizontal = decomposition.normal.is_parallel_to(&axis);
            let cell = nsc_q_constraint(nu, omega, horizontal);
            let degree = polynomial.betas.len();
            let admissible = match cell {
                QConstraint::AnyPolynomial => true,
                QConstraint::Linear => degree <= 1,
                QConstraint::PlusMinus => false,
            };
            if admissible {
                (
                    Some(cell),
                    FlowCertificate::PlanarQ {
                        decomposition,
                        polynomial,
                    },
                )
            } else {
                let report = stationarity_residual(field);
                let (worst, note) = match cell {
                    QConstraint::Linear => (
                        polynomial
                            .ladder
                            .first()
                            .and_then(|lv| lv.frequencies.first().cloned())
                            .unwrap_or_else(|| decomposition.circle[0].clone()),
                        format!(
                            "viscous decay closes only for a linear vertical part; found degree \
                             {degree}"
                        ),
                    ),
                    _ => (
                        first_tilted_frequency(field)
                            .unwrap_or_else(|| decomposition.circle[0].clone()),
                        "rotation over a tilted plane admits only the curl-eigenfield planar \
                         forms"
                            .to_string(),
                    ),
                };
                (
                    Some(cell),
                    FlowCertificate::NonSolution {
                        residual: report.relative,
                        worst,
                        note,
                    },
                )
            }
        }
        other => (None, other),
    };
    Ok(NscCertificate {
        nu,
        omega,
        constraint,
        certificate,
    })
}

/// Independent replay of a certificate: every invariant it claims is
/// recomputed from the field. Empty `defects` means faithful.
#[derive(Debug, Clone)]
pub struct VerificationOutcome {
    pub defects: Vec<String>,
}

impl VerificationOutcome {
    pub fn is_ok(&self) -> bool {
        self.defects.is_empty()
    }
}

fn check_residual_small(field: &SpectralField, tol: f64, defects: &mut Vec<String>) {
    let report = stationarity_residual(field);
    if report.relative >= tol {
        defects.push(format!(
            "relative residual {:.3e} contradicts a structural certificate",
            report.relative
        ));
    }
}

fn verify_planar(
    field: &SpectralField,
    dec: &PlanarDecomposition,
    poly: &QPolynomial,
    tol: f64,
    defects: &mut Vec<String>,
) {
    let scale = field.max_coefficient_norm();
    if dec.normal != dec.normal.primitive_direction() {
        defects.push("plane normal is not in canonical primitive form".into());
    }
    for n in field.support() {
        if !n.dot(&dec.normal).is_zero() {
            defects.push(format!("support frequency {n} off the carrying plane"));
            break;
        }
    }
    let count = dec.circle.len();
    if count < 4 || count % 2 != 0 || dec.alphas.len() != count {
        defects.push("circle must list at least four points in antipodal pairs".into());
    } else {
        for j in 0..count / 2 {
            if dec.circle[j + count / 2] != dec.circle[j].neg() {
                defects.push("circle points are not antipodally paired".into());
                break;
            }
        }
        if dec.circle.iter().any(|n| n.norm_sq() != dec.radius_sq) {
            defects.push("circle frequency off the stated radius".into());
        }
    }

    // The decomposition must rebuild the field coefficient by coefficient.
    let mut expected: BTreeMap<Frequency, CVec3> = dec.horizontal_coefficients();
    for (n, value) in &dec.u_perp {
        let add = dec.e_perp.to_complex().scale(*value);
        let entry = expected.entry(n.clone()).or_insert(CVec3::ZERO);
        *entry = *entry + add;
    }
    let keys: BTreeSet<&Frequency> = expected.keys().chain(field.support()).collect();
    for n in keys {
        let got = field.coefficient(n).unwrap_or(CVec3::ZERO);
        let want = expected.get(n).copied().unwrap_or(CVec3::ZERO);
        if (got - want).norm() > tol * scale {
            defects.push(format!("decomposition does not rebuild the field at {n}"));
            break;
        }
    }

    // The polynomial must reproduce the vertical data.
    let rebuilt = dec.vertical_from_polynomial(&poly.betas);
    let vkeys: BTreeSet<&Frequency> = rebuilt.keys().chain(dec.u_perp.keys()).collect();
    for n in vkeys {
        let got = dec.u_perp.get(n).copied().unwrap_or_else(|| C::new(0.0, 0.0));
        let want = rebuilt.get(n).copied().unwrap_or_else(|| C::new(0.0, 0.0));
        if (got - want).norm() > tol * scale {
            defects.push(format!(
                "vertical part differs from its polynomial reconstruction at {n}"
            ));
            break;
        }
    }
}

fn verify_beltrami(
    field: &SpectralField,
    lambda: f64,
    sign: BeltramiSign,
    radius_sq: &Rat,
    planar_form: Option<&(PlanarDecomposition, QPolynomial)>,
    tol: f64,
    defects: &mut Vec<String>,
) {
    let r = rat_f64(radius_sq);
    if (lambda * lambda - r).abs() > tol * r.max(1.0) {
        defects.push("lambda squared does not match the stated radius".into());
    }
    match sign {
        BeltramiSign::Plus if lambda <= 0.0 => defects.push("sign and lambda disagree".into()),
        BeltramiSign::Minus if lambda >= 0.0 => defects.push("sign and lambda disagree".into()),
        BeltramiSign::Neither => defects.push("certificate must carry a definite sign".into()),
        _ => {}
    }
    if field.support().any(|n| n.norm_sq() != *radius_sq) {
        defects.push("support frequency off the eigenvalue sphere".into());
    }
    let curl = field.curl();
    let scale = field.max_coefficient_norm() * lambda.abs().max(1.0);
    for (n, u) in field.modes() {
        let got = curl.coefficient(n).unwrap_or(CVec3::ZERO);
        if (got - u.scale_re(lambda)).norm() > tol * scale {
            defects.push(format!("curl is not lambda times the field at {n}"));
            break;
        }
    }
    if let Some((dec, poly)) = planar_form {
        verify_planar(field, dec, poly, tol, defects);
        let expected_beta = if lambda > 0.0 { 1.0 } else { -1.0 };
        if poly.betas.len() != 1 || (poly.betas[0] - expected_beta).abs() > tol.max(1e-9) {
            defects.push("planar form of an eigenfield must be plus or minus the profile".into());
        }
    }
}

/// Replays a certificate against a field, recomputing every claimed
/// invariant. For `NonSolution` the claim checked is that the residual
/// really is above tolerance and the witness is a reachable frequency.
pub fn verify_certificate(
    field: &SpectralField,
    certificate: &FlowCertificate,
    tol: f64,
) -> VerificationOutcome {
    let tol = effective_tol(tol);
    let mut defects = Vec::new();
    let scale = field.max_coefficient_norm();
    match certificate {
        FlowCertificate::Line { direction } => {
            if direction.is_zero() {
                defects.push("line direction is zero".into());
            } else if let Some(n) = field.support().find(|n| !n.is_parallel_to(direction)) {
                defects.push(format!("support frequency {n} off the line"));
            }
            check_residual_small(field, tol, &mut defects);
        }
        FlowCertificate::PlanarPerp { normal } => {
            if normal.is_zero() {
                defects.push("plane normal is zero".into());
            } else {
                let e_perp = Vec3(normal.to_f64()).normalized();
                for (n, u) in field.modes() {
                    if !n.dot(normal).is_zero() {
                        defects.push(format!("support frequency {n} off the plane"));
                        break;
                    }
                    let off = *u - e_perp.to_complex().scale(u.dot_real(e_perp));
                    if off.norm() > tol * scale {
                        defects.push(format!("coefficient at {n} not along the normal"));
                        break;
                    }
                }
            }
            check_residual_small(field, tol, &mut defects);
        }
        FlowCertificate::Beltrami {
            lambda,
            sign,
            radius_sq,
            planar_form,
        } => {
            verify_beltrami(
                field,
                *lambda,
                *sign,
                radius_sq,
                planar_form.as_deref(),
                tol,
                &mut defects,
            );
            check_residual_small(field, tol, &mut defects);
        }
        FlowCertificate::PlanarQ {
            decomposition,
            polynomial,
        } => {
            verify_planar(field, decomposition, polynomial, tol, &mut defects);
            check_residual_small(field, tol, &mut defects);
        }
        FlowCertificate::NonSolution { worst, .. } => {
            let report = stationarity_residual(field);
            if report.relative < tol {
                defects.push(format!(
                    "claimed non-solution but the relative residual is {:.3e}",
                    report.relative
                ));
            }
            if !report.map.contains_key(worst) {
                defects.push("witness frequency outside the interaction support".into());
            }
        }
    }
    VerificationOutcome { defects }
}

/// Replays a viscous / rotating certificate: structural parts via
/// `verify_certificate` plus the admissibility cell; non-solutions must rest
/// either on a genuine residual or on a genuine cell violation.
pub fn verify_nsc_certificate(
    field: &SpectralField,
    certificate: &NscCertificate,
    tol: f64,
) -> VerificationOutcome {
    let tol = effective_tol(tol);
    let axis = vertical_axis();
    match &certificate.certificate {
        FlowCertificate::NonSolution { .. } => {
            let mut defects = Vec::new();
            let report = stationarity_residual(field);
            if report.relative >= tol {
                // Genuinely non-stationary; nothing further to replay.
                return VerificationOutcome { defects };
            }
            match classify_euler(field, tol) {
                Ok(FlowCertificate::PlanarPerp { normal }) => {
                    if certificate.omega == 0.0 || normal.is_parallel_to(&axis) {
                        defects.push(
                            "claimed non-solution but the perpendicular family is admissible \
                             here"
                                .into(),
                        );
                    }
                }
                Ok(FlowCertificate::PlanarQ {
                    decomposition,
                    polynomial,
                }) => {
                    let cell = nsc_q_constraint(
                        certificate.nu,
                        certificate.omega,
                        decomposition.normal.is_parallel_to(&axis),
                    );
                    let admissible = match cell {
                        QConstraint::AnyPolynomial => true,
                        QConstraint::Linear => polynomial.betas.len() <= 1,
                        QConstraint::PlusMinus => false,
                    };
                    if admissible {
                        defects.push(
                            "claimed non-solution but the planar polynomial passes its \
                             admissibility cell"
                                .into(),
                        );
                    }
                }
                Ok(other) => {
                    defects.push(format!(
                        "claimed non-solution but the ideal structure is {}",
                        other.family_name()
                    ));
                }
                Err(_) => {}
            }
            VerificationOutcome { defects }
        }
        structural => {
            let mut outcome = verify_certificate(field, structural, tol);
            match structural {
                FlowCertificate::PlanarPerp { normal } => {
                    if certificate.omega != 0.0 && !normal.is_parallel_to(&axis) {
                        outcome.defects.push(
                            "perpendicular family on a tilted plane is not admissible under \
                             rotation"
                                .into(),
                        );
                    }
                }
                FlowCertificate::PlanarQ {
                    decomposition,
                    polynomial,
                } => {
                    let cell = nsc_q_constraint(
                        certificate.nu,
                        certificate.omega,
                        decomposition.normal.is_parallel_to(&axis),
                    );
                    if certificate.constraint != Some(cell) {
                        outcome.defects.push(
                            "stored admissibility cell disagrees with nu, omega and the plane \
                             orientation"
                                .into(),
                        );
                    }
                    let admissible = match cell {
                        QConstraint::AnyPolynomial => true,
                        QConstraint::Linear => polynomial.betas.len() <= 1,
                        QConstraint::PlusMinus => false,
                    };
                    if !admissible {
                        outcome
                            .defects
                            .push("planar polynomial fails its admissibility cell".into());
                    }
                }
                _ => {}
            }
            outcome
        }
    }
}

fn freq_doc(n: &Frequency) -> Result<Value, FieldError> {
    let parts = frequency_doc_parts(n)?;
    Ok(json!(parts))
}

fn rat_doc(r: &Rat) -> Result<Value, FieldError> {
    let num = r.numer().to_i64().ok_or(FieldError::SerializedRange)?;
    let den = r.denom().to_i64().ok_or(FieldError::SerializedRange)?;
    Ok(json!([num, den]))
}

fn decomposition_doc(dec: &PlanarDecomposition) -> Result<Value, FieldError> {
    let circle: Result<Vec<Value>, FieldError> = dec.circle.iter().map(freq_doc).collect();
    let alphas: Vec<Value> = dec.alphas.iter().map(|a| json!([a.re, a.im])).collect();
    let vertical: Result<Vec<Value>, FieldError> = dec
        .u_perp
        .iter()
        .map(|(n, v)| Ok(json!({ "n": freq_doc(n)?, "value": [v.re, v.im] })))
        .collect();
    Ok(json!({
        "normal": freq_doc(&dec.normal)?,
        "radius_sq": rat_doc(&dec.radius_sq)?,
        "circle": circle?,
        "alphas": alphas,
        "vertical": vertical?,
    }))
}

fn polynomial_doc(poly: &QPolynomial) -> Value {
    json!({ "betas": poly.betas })
}

/// Serializes a certificate; frequencies as exact integer-pair triples,
/// complex numbers as `[re, im]`, rationals as `[numerator, denominator]`.
pub fn certificate_to_json(certificate: &FlowCertificate) -> Result<Value, FieldError> {
    let mut doc = match certificate {
        FlowCertificate::Line { direction } => json!({
            "family": "line",
            "direction": freq_doc(direction)?,
        }),
        FlowCertificate::PlanarPerp { normal } => json!({
            "family": "planar_perpendicular",
            "normal": freq_doc(normal)?,
        }),
        FlowCertificate::PlanarQ {
            decomposition,
            polynomial,
        } => json!({
            "family": "planar_polynomial",
            "decomposition": decomposition_doc(decomposition)?,
            "polynomial": polynomial_doc(polynomial),
        }),
        FlowCertificate::Beltrami {
            lambda,
            sign,
            radius_sq,
            planar_form,
        } => {
            let planar = match planar_form {
                Some(form) => json!({
                    "decomposition": decomposition_doc(&form.0)?,
                    "polynomial": polynomial_doc(&form.1),
                }),
                None => Value::Null,
            };
            json!({
                "family": "beltrami",
                "lambda": lambda,
                "sign": match sign {
                    BeltramiSign::Plus => "plus",
                    BeltramiSign::Minus => "minus",
                    BeltramiSign::Neither => "neither",
                },
                "radius_sq": rat_doc(radius_sq)?,
                "planar_form": planar,
            })
        }
        FlowCertificate::NonSolution {
            residual,
            worst,
            note,
        } => json!({
            "family": "non_solution",
            "residual": residual,
            "worst": freq_doc(worst)?,
            "note": note,
        }),
    };
    doc["schema_version"] = json!(1);
    Ok(doc)
}

pub fn nsc_certificate_to_json(certificate: &NscCertificate) -> Result<Value, FieldError> {
    Ok(json!({
        "schema_version": 1,
        "nu": certificate.nu,
        "omega": certificate.omega,
        "constraint": match certificate.constraint {
            None => Value::Null,
            Some(QConstraint::AnyPolynomial) => json!("any_polynomial"),
            Some(QConstraint::Linear) => json!("linear"),
            Some(QConstraint::PlusMinus) => json!("plus_minus"),
        },
        "certificate": certificate_to_json(&certificate.certificate)?,
    }))
}
