//! Constructions for each stationary family plus generic counterexample
//! material: curl eigenfields, the complex tetrahedron flow, shear profiles
//! on a line, perpendicular and polynomial planar flows on tilted rational
//! planes, and random divergence-free fields carrying none of the
//! structures. Tilted planes are reached through exact rational rotations,
//! so every generated frequency stays rational and the classifier can use
//! exact plane arithmetic on the output.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rand::Rng;
use thiserror::Error;

use crate::interaction::{helmholtz_project, make_beltrami_coeff, BeltramiSign};
use crate::lattice::FrequencyLattice;
use crate::linalg::{CVec3, Vec3, C};
use crate::rat::{Frequency, Rat};
use crate::spectral_field::{int_mode, SpectralField};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("|normal|^2 = {0} is not a perfect square; the tilted frame would be irrational")]
    IrrationalTilt(BigInt),
    #[error("no {0}-point circle template; supported sizes are 4, 6, 8 and 12")]
    UnsupportedCircle(usize),
    #[error("the vertical polynomial needs at least one nonzero coefficient")]
    EmptyPolynomial,
    #[error("at least {0} conjugate pairs are required for this construction")]
    TooFewPairs(usize),
    #[error("requested {requested} conjugate pairs but the pool holds only {available}")]
    TooManyPairs { requested: usize, available: usize },
}

/// The classical three-mode curl eigenfield with eigenvalue one. Zero
/// amplitudes drop their pair, so e.g. (0, B, C) lives on a single plane
/// while staying an eigenfield.
pub fn abc(a: f64, b: f64, c: f64) -> SpectralField {
    let mut field = SpectralField::new();
    let entries = [
        (
            int_mode(0, 0, 1),
            CVec3::from_re_im([0.0, a / 2.0, 0.0], [-a / 2.0, 0.0, 0.0]),
        ),
        (
            int_mode(1, 0, 0),
            CVec3::from_re_im([0.0, 0.0, b / 2.0], [0.0, -b / 2.0, 0.0]),
        ),
        (
            int_mode(0, 1, 0),
            CVec3::from_re_im([c / 2.0, 0.0, 0.0], [0.0, 0.0, -c / 2.0]),
        ),
    ];
    for (n, u) in entries {
        if u.norm() == 0.0 {
            continue;
        }
        field.insert_mode(n.neg(), u.conj()).unwrap();
        field.insert_mode(n, u).unwrap();
    }
    field
}

/// Complex stationary flow supported on four frequencies forming a regular
/// tetrahedron. The support contains no antipodal pair, so the field cannot
/// be real-valued, and no coefficient is a curl eigenvector; its pressure is
/// cos(2 x1) + cos(2 x2).
pub fn tetrahedron() -> SpectralField {
    let mut field = SpectralField::new();
    field.real_valued = false;
    let entries = [
        ((1, 1, 1), [-0.5, 0.5, 0.0]),
        ((-1, -1, 1), [0.5, -0.5, 0.0]),
        ((1, -1, -1), [-0.5, -0.5, 0.0]),
        ((-1, 1, -1), [0.5, 0.5, 0.0]),
    ];
    for ((x, y, z), im) in entries {
        let u = CVec3::from_re_im([0.0; 3], im);
        field.insert_mode(int_mode(x, y, z), u).unwrap();
    }
    field
}

fn random_complex(rng: &mut impl Rng) -> C {
    loop {
        let c = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if c.norm() >= 0.3 {
            return c;
        }
    }
}

/// Shear field on one line of frequencies: every coefficient lies in the
/// plane perpendicular to the direction, so transport vanishes pairwise and
/// any profile is stationary.
pub fn line(
    direction: &Frequency,
    pairs: usize,
    rng: &mut impl Rng,
) -> Result<SpectralField, GenerateError> {
    if direction.is_zero() {
        return Err(GenerateError::ZeroDirection);
    }
    if pairs == 0 {
        return Err(GenerateError::TooFewPairs(1));
    }
    let d = direction.primitive_direction();
    let d_hat = Vec3(d.to_f64()).normalized();
    let axis = d_hat.least_aligned_axis();
    let mut e = Vec3::ZERO;
    e.0[axis] = 1.0;
    let t1 = (e - d_hat.scale(e.dot(d_hat))).normalized();
    let t2 = d_hat.cross(t1);
    let mut field = SpectralField::new();
    for k in 1..=pairs {
        let u = t1.to_complex().scale(random_complex(rng))
            + t2.to_complex().scale(random_complex(rng));
        let n = d.scale_int(k as i64);
        field.insert_mode(n.neg(), u.conj()).unwrap();
        field.insert_mode(n, u).unwrap();
    }
    Ok(field)
}

/// One representative per antipodal pair of lattice points on a planar
/// circle; the 12-point template is the full radius-5 circle.
fn circle_template(p: usize) -> Result<&'static [(i64, i64)], GenerateError> {
    match p {
        4 => Ok(&[(1, 0), (0, 1)]),
        6 => Ok(&[(5, 0), (4, 3), (-3, 4)]),
        8 => Ok(&[(5, 0), (4, 3), (3, 4), (-3, 4)]),
        12 => Ok(&[(5, 0), (4, 3), (3, 4), (0, 5), (-3, 4), (-4, 3)]),
        other => Err(GenerateError::UnsupportedCircle(other)),
    }
}

/// Circle frequencies in the plane with the given normal: the canonical
/// (primitive, sign-normalized) normal plus one rotated representative per
/// antipodal pair.
fn circle_frequencies(
    normal: &Frequency,
    p: usize,
) -> Result<(Frequency, Vec<Frequency>), GenerateError> {
    let template = circle_template(p)?;
    if normal.is_zero() {
        return Err(GenerateError::ZeroDirection);
    }
    let canon = normal.primitive_direction();
    let rotation = tilt_rotation(&canon)?;
    let reps = template
        .iter()
        .map(|&(x, y)| apply_rotation(&rotation, x, y))
        .collect();
    Ok((canon, reps))
}

fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Proper rational rotation with R e3 = normal/|normal|, exact when
/// |normal|^2 is a perfect square: the Householder reflection exchanging e3
/// with the unit normal, composed with the reflection negating y to restore
/// orientation.
fn tilt_rotation(canon: &Frequency) -> Result<[[Rat; 3]; 3], GenerateError> {
    let norm_sq = canon.norm_sq();
    let int = norm_sq.to_integer();
    let root = int.sqrt();
    if &root * &root != int {
        return Err(GenerateError::IrrationalTilt(int));
    }
    let s = Rat::from_integer(root);
    let hat: Vec<Rat> = (0..3).map(|k| &canon.0[k] / &s).collect();
    let e3 = [rat_int(0), rat_int(0), rat_int(1)];
    let mut rotation = [
        [rat_int(1), rat_int(0), rat_int(0)],
        [rat_int(0), rat_int(1), rat_int(0)],
        [rat_int(0), rat_int(0), rat_int(1)],
    ];
    if hat[0] == e3[0] && hat[1] == e3[1] && hat[2] == e3[2] {
        return Ok(rotation);
    }
    let v: Vec<Rat> = (0..3).map(|k| &hat[k] - &e3[k]).collect();
    let vv: Rat = v.iter().map(|c| c * c).sum();
    for (i, row) in rotation.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let delta = if i == j { rat_int(1) } else { rat_int(0) };
            let householder = delta - rat_int(2) * &v[i] * &v[j] / &vv;
            // Compose with diag(1, -1, 1) on the right.
            *entry = if j == 1 { -householder } else { householder };
        }
    }
    Ok(rotation)
}

fn apply_rotation(rotation: &[[Rat; 3]; 3], x: i64, y: i64) -> Frequency {
    let xr = rat_int(x);
    let yr = rat_int(y);
    Frequency([
        &rotation[0][0] * &xr + &rotation[0][1] * &yr,
        &rotation[1][0] * &xr + &rotation[1][1] * &yr,
        &rotation[2][0] * &xr + &rotation[2][1] * &yr,
    ])
}

/// Field pointing along the plane normal everywhere, supported on a circle
/// in that plane. Transport vanishes term by term (the velocity is
/// perpendicular to every wave vector), so any coefficients work.
pub fn planar_perp(
    normal: &Frequency,
    p: usize,
    rng: &mut impl Rng,
) -> Result<SpectralField, GenerateError> {
    let (canon, reps) = circle_frequencies(normal, p)?;
    let e_perp = Vec3(canon.to_f64()).normalized().to_complex();
    let mut field = SpectralField::new();
    for n in reps {
        let u = e_perp.scale(random_complex(rng));
        field.insert_mode(n.neg(), u.conj()).unwrap();
        field.insert_mode(n, u).unwrap();
    }
    Ok(field)
}

fn convolve(a: &BTreeMap<Frequency, C>, b: &BTreeMap<Frequency, C>) -> BTreeMap<Frequency, C> {
    let mut out = BTreeMap::new();
    for (na, ca) in a {
        for (nb, cb) in b {
            let entry = out.entry(na.add(nb)).or_insert(C::new(0.0, 0.0));
            *entry += ca * cb;
        }
    }
    out
}

/// Planar flow whose out-of-plane component is a prescribed polynomial of
/// the scalar vorticity. The horizontal part is the uniform circle profile
/// (every in-plane coefficient is -i times the in-plane tangent, so the
/// vorticity coefficients are exactly 1) and the vertical part is built by
/// convolving that profile, dropping its mean. Coefficients are indexed
/// from degree one; trailing zeros are trimmed.
pub fn planar_q(
    normal: &Frequency,
    p: usize,
    betas: &[f64],
) -> Result<SpectralField, GenerateError> {
    let degree = betas.iter().rposition(|b| *b != 0.0);
    let betas = match degree {
        Some(last) => &betas[..=last],
        None => return Err(GenerateError::EmptyPolynomial),
    };
    let (canon, reps) = circle_frequencies(normal, p)?;
    let e_perp = Vec3(canon.to_f64()).normalized();

    let mut circle: BTreeSet<Frequency> = BTreeSet::new();
    for n in &reps {
        circle.insert(n.neg());
        circle.insert(n.clone());
    }
    let profile: BTreeMap<Frequency, C> = circle
        .iter()
        .map(|n| (n.clone(), C::new(1.0, 0.0)))
        .collect();

    let mut vertical: BTreeMap<Frequency, C> = BTreeMap::new();
    let mut power = profile.clone();
    for (k, beta) in betas.iter().enumerate() {
        if k > 0 {
            power = convolve(&power, &profile);
        }
        if *beta == 0.0 {
            continue;
        }
        for (n, c) in &power {
            if n.is_zero() {
                continue;
            }
            let entry = vertical.entry(n.clone()).or_insert(C::new(0.0, 0.0));
            *entry += beta * c;
        }
    }

    let mut field = SpectralField::new();
    let keys: BTreeSet<Frequency> = circle.iter().cloned().chain(vertical.keys().cloned()).collect();
    for n in keys {
        let mut u = CVec3::ZERO;
        if circle.contains(&n) {
            let n_hat = Vec3(n.to_f64()).normalized();
            let e_par = e_perp.cross(n_hat);
            u = u + e_par.to_complex().scale(C::new(0.0, -1.0));
        }
        if let Some(v) = vertical.get(&n) {
            u = u + e_perp.to_complex().scale(*v);
        }
        if u.norm() > 0.0 {
            field.insert_mode(n, u).unwrap();
        }
    }
    Ok(field)
}

/// Integer radii whose spheres hold at least twelve antipodal pairs each.
const EIGENFIELD_SHELLS: [i64; 4] = [5, 6, 9, 14];

fn shell_representatives(radius_sq: i64) -> Vec<Frequency> {
    let bound = (radius_sq as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            for z in -bound..=bound {
                if x * x + y * y + z * z != radius_sq {
                    continue;
                }
                let n = int_mode(x, y, z);
                if n.is_lex_positive() {
                    out.push(n);
                }
            }
        }
    }
    out
}

/// Random curl eigenfield: conjugate pairs drawn from one integer sphere
/// with a single eigenvalue sign. Two pairs minimum; a lone pair would be
/// reported as a line flow by the classifier's degeneracy rule.
pub fn beltrami_random(pairs: usize, rng: &mut impl Rng) -> Result<SpectralField, GenerateError> {
    if pairs < 2 {
        return Err(GenerateError::TooFewPairs(2));
    }
    let candidates: Vec<i64> = EIGENFIELD_SHELLS
        .iter()
        .copied()
        .filter(|r| shell_representatives(*r).len() >= pairs)
        .collect();
    if candidates.is_empty() {
        let available = EIGENFIELD_SHELLS
            .iter()
            .map(|r| shell_representatives(*r).len())
            .max()
            .unwrap_or(0);
        return Err(GenerateError::TooManyPairs {
            requested: pairs,
            available,
        });
    }
    let radius_sq = candidates[rng.gen_range(0..candidates.len())];
    let mut pool = shell_representatives(radius_sq);
    let sign = if rng.gen_bool(0.5) {
        BeltramiSign::Plus
    } else {
        BeltramiSign::Minus
    };
    let mut field = SpectralField::new();
    for _ in 0..pairs {
        let pick = rng.gen_range(0..pool.len());
        let n = pool.swap_remove(pick);
        let u = make_beltrami_coeff(&n, sign, random_complex(rng))
            .expect("shell frequencies are nonzero");
        field.insert_mode(n.neg(), u.conj()).unwrap();
        field.insert_mode(n, u).unwrap();
    }
    Ok(field)
}

/// Generic random divergence-free field: the support is resampled until it
/// spans all three dimensions and at least two radii, so none of the
/// stationary structures can hold and the self-interaction is generically
/// nonzero. Pool: integer frequencies with |n|^2 <= 5.
pub fn random_divergence_free(
    pairs: usize,
    rng: &mut impl Rng,
) -> Result<SpectralField, GenerateError> {
    if pairs < 3 {
        return Err(GenerateError::TooFewPairs(3));
    }
    let mut pool = Vec::new();
    for x in -2i64..=2 {
        for y in -2i64..=2 {
            for z in -2i64..=2 {
                if x * x + y * y + z * z > 5 {
                    continue;
                }
                let n = int_mode(x, y, z);
                if n.is_lex_positive() {
                    pool.push(n);
                }
            }
        }
    }
    if pairs > pool.len() {
        return Err(GenerateError::TooManyPairs {
            requested: pairs,
            available: pool.len(),
        });
    }
    loop {
        let mut remaining = pool.clone();
        let mut chosen: Vec<Frequency> = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            let pick = rng.gen_range(0..remaining.len());
            chosen.push(remaining.swap_remove(pick));
        }
        if FrequencyLattice::from_generators(chosen.iter()).rank() < 3 {
            continue;
        }
        let radii: BTreeSet<Rat> = chosen.iter().map(Frequency::norm_sq).collect();
        if radii.len() < 2 {
            continue;
        }
        let mut field = SpectralField::new();
        for n in chosen {
            let u = loop {
                let raw = CVec3::new(
                    random_complex(rng),
                    random_complex(rng),
                    random_complex(rng),
                );
                let projected = helmholtz_project(&n, raw).expect("pool omits zero");
                if projected.norm() >= 0.2 {
                    break projected;
                }
            };
            field.insert_mode(n.neg(), u.conj()).unwrap();
            field.insert_mode(n, u).unwrap();
        }
        return Ok(field);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{classify_euler, stationarity_residual, FlowCertificate};
    use crate::interaction::beltrami_sign;
    use crate::spectral_field::DEFAULT_TOL;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn abc_constructions_are_unit_eigenfields() {
        for (a, b, c) in [(1.0, 1.0, 1.0), (1.0, 2.0, 3.0), (0.0, 1.0, 1.0)] {
            let field = abc(a, b, c);
            assert!(field.validate(DEFAULT_TOL).is_ok());
            let curl = field.curl();
            for (n, u) in field.modes() {
                let cu = curl.coefficient(n).unwrap();
                assert!((cu - *u).norm() < 1e-14);
            }
            match classify_euler(&field, 0.0).unwrap() {
                FlowCertificate::Beltrami { lambda, .. } => {
                    assert!((lambda - 1.0).abs() < 1e-12)
                }
                other => panic!("unexpected family {}", other.family_name()),
            }
        }
    }

    #[test]
    fn tetrahedron_is_a_stationary_complex_non_eigenfield() {
        let field = tetrahedron();
        assert!(!field.real_valued);
        assert_eq!(field.support_set().len(), 4);
        let residual = stationarity_residual(&field);
        assert!(residual.max_norm < 1e-13);
        for (n, u) in field.modes() {
            assert_eq!(beltrami_sign(n, *u, 1e-9), BeltramiSign::Neither);
        }
        // Forcing the real-valuedness invariant must expose the missing
        // conjugate partners.
        let mut forced = field.clone();
        forced.real_valued = true;
        assert!(!forced.validate(DEFAULT_TOL).is_ok());
    }

    #[test]
    fn line_profiles_classify_by_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let field = line(&int_mode(2, -2, 4), 4, &mut rng).unwrap();
        assert!(field.validate(DEFAULT_TOL).is_ok());
        match classify_euler(&field, 0.0).unwrap() {
            FlowCertificate::Line { direction } => {
                assert_eq!(direction, int_mode(1, -1, 2));
            }
            other => panic!("unexpected family {}", other.family_name()),
        }
    }

    #[test]
    fn perpendicular_fields_classify_on_flat_and_tilted_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for normal in [int_mode(0, 0, 1), int_mode(1, 2, 2)] {
            let field = planar_perp(&normal, 6, &mut rng).unwrap();
            assert!(field.validate(DEFAULT_TOL).is_ok());
            let residual = stationarity_residual(&field);
            assert!(residual.relative < 1e-13);
            match classify_euler(&field, 0.0).unwrap() {
                FlowCertificate::PlanarPerp { normal: got } => assert_eq!(got, normal),
                other => panic!("unexpected family {}", other.family_name()),
            }
        }
    }

    #[test]
    fn polynomial_fields_round_trip_their_coefficients() {
        let cases: [(Frequency, usize, &[f64]); 3] = [
            (int_mode(0, 0, 1), 4, &[0.0, 1.0]),
            (int_mode(1, 2, 2), 6, &[-2.0, 0.0, 1.0]),
            (int_mode(2, 3, 6), 4, &[0.5, 0.0, 0.0, 1.5]),
        ];
        for (normal, p, betas) in cases {
            let field = planar_q(&normal, p, betas).unwrap();
            assert!(field.validate(DEFAULT_TOL).is_ok());
            let residual = stationarity_residual(&field);
            assert!(residual.relative < 1e-11, "residual {}", residual.relative);
            match classify_euler(&field, 0.0).unwrap() {
                FlowCertificate::PlanarQ {
                    decomposition,
                    polynomial,
                } => {
                    assert_eq!(decomposition.normal, normal.primitive_direction());
                    assert_eq!(polynomial.betas.len(), betas.len());
                    for (got, want) in polynomial.betas.iter().zip(betas) {
                        assert!((got - want).abs() < 1e-10);
                    }
                }
                other => panic!("unexpected family {}", other.family_name()),
            }
        }
    }

    #[test]
    fn unit_polynomial_is_the_coplanar_eigenfield() {
        let field = planar_q(&int_mode(0, 0, 1), 4, &[1.0]).unwrap();
        match classify_euler(&field, 0.0).unwrap() {
            FlowCertificate::Beltrami {
                lambda,
                planar_form,
                ..
            } => {
                assert!((lambda - 1.0).abs() < 1e-12);
                let (_, poly) = *planar_form.expect("coplanar eigenfield carries its planar form");
                assert_eq!(poly.betas, vec![1.0]);
            }
            other => panic!("unexpected family {}", other.family_name()),
        }
    }

    #[test]
    fn generator_parameter_errors() {
        assert!(matches!(
            planar_q(&int_mode(0, 0, 1), 5, &[1.0]),
            Err(GenerateError::UnsupportedCircle(5))
        ));
        assert!(matches!(
            planar_q(&int_mode(0, 0, 1), 4, &[0.0, 0.0]),
            Err(GenerateError::EmptyPolynomial)
        ));
        assert!(matches!(
            planar_q(&int_mode(1, 1, 0), 4, &[1.0]),
            Err(GenerateError::IrrationalTilt(_))
        ));
        assert!(matches!(
            planar_q(&int_mode(0, 0, 0), 4, &[1.0]),
            Err(GenerateError::ZeroDirection)
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            line(&int_mode(0, 0, 0), 3, &mut rng),
            Err(GenerateError::ZeroDirection)
        ));
        assert!(matches!(
            beltrami_random(1, &mut rng),
            Err(GenerateError::TooFewPairs(2))
        ));
        assert!(matches!(
            beltrami_random(100, &mut rng),
            Err(GenerateError::TooManyPairs { .. })
        ));
    }

    #[test]
    fn random_eigenfields_classify_for_every_seed() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs = rng.gen_range(2..=8);
            let field = beltrami_random(pairs, &mut rng).unwrap();
            assert!(field.validate(DEFAULT_TOL).is_ok());
            assert_eq!(field.support_set().len(), 2 * pairs);
            match classify_euler(&field, 0.0).unwrap() {
                FlowCertificate::Beltrami { .. } => {}
                other => panic!("seed {seed}: unexpected family {}", other.family_name()),
            }
        }
    }

    #[test]
    fn generic_fields_are_not_solutions() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs = rng.gen_range(3..=6);
            let field = random_divergence_free(pairs, &mut rng).unwrap();
            assert!(field.validate(DEFAULT_TOL).is_ok());
            assert_eq!(field.support_set().len(), 2 * pairs);
            let residual = stationarity_residual(&field);
            assert!(residual.relative > 1e-6, "seed {seed} nearly stationary");
            match classify_euler(&field, 0.0).unwrap() {
                FlowCertificate::NonSolution { .. } => {}
                other => panic!("seed {seed}: unexpected family {}", other.family_name()),
            }
        }
    }

    #[test]
    fn tilted_circles_preserve_radius_and_plane_membership() {
        let (canon, reps) = circle_frequencies(&int_mode(2, 3, 6), 12).unwrap();
        assert_eq!(canon, int_mode(2, 3, 6));
        for n in &reps {
            assert_eq!(n.norm_sq(), Rat::from_integer(BigInt::from(25)));
            assert!(n.dot(&canon).is_zero());
        }
        // Rotation fixed points: the identity case keeps the template.
        let (_, flat) = circle_frequencies(&int_mode(0, 0, 3), 4).unwrap();
        assert_eq!(flat, vec![int_mode(1, 0, 0), int_mode(0, 1, 0)]);
    }
}
