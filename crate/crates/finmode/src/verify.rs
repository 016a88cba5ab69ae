//! Randomized verification campaigns. Each campaign hammers one exact
//! statement with freshly drawn inputs and reports the trial count, the
//! worst numerical deviation seen, and the first counterexample if the
//! statement ever failed. Every trial owns an independent seeded stream, so
//! campaigns parallelize without changing their output.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{is_sip, rotation_loop, SphericalPolygon};
use crate::interaction::{
    classify_pair, helmholtz_project, make_beltrami_coeff, pair_bracket, rotation_geodesic,
    BeltramiSign, InteractionCase,
};
use crate::linalg::{CVec3, Vec3, C};
use crate::rat::Frequency;
use crate::spectral_field::int_mode;

const PAIR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Campaign {
    /// Non-interaction verdicts agree with the bracket norm, and the
    /// equal-radius ratio reconstructs the second coefficient.
    TwoMode,
    /// Composing the geodesic rotations around a small-circle polygon fixes
    /// the first vertex and turns by the enclosed spherical area.
    RotationLoop,
    /// The simply-interacting-pair test agrees with brute-force pair
    /// enumeration.
    Sip,
    /// Same-sign curl eigenvectors on a common sphere never interact.
    BeltramiNoninteraction,
    /// Spherical excess equals the triangulated area.
    GaussBonnet,
}

impl Campaign {
    pub const ALL: [Campaign; 5] = [
        Campaign::TwoMode,
        Campaign::RotationLoop,
        Campaign::Sip,
        Campaign::BeltramiNoninteraction,
        Campaign::GaussBonnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::TwoMode => "two-mode",
            Campaign::RotationLoop => "rotation-loop",
            Campaign::Sip => "sip",
            Campaign::BeltramiNoninteraction => "beltrami-noninteraction",
            Campaign::GaussBonnet => "gauss-bonnet",
        }
    }

    pub fn parse(name: &str) -> Option<Campaign> {
        Campaign::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub campaign: Campaign,
    pub trials: usize,
    pub failures: usize,
    pub max_deviation: f64,
    pub first_counterexample: Option<String>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Trial {
    deviation: f64,
    failure: Option<String>,
}

impl Trial {
    fn ok(deviation: f64) -> Trial {
        Trial {
            deviation,
            failure: None,
        }
    }

    fn fail(deviation: f64, message: String) -> Trial {
        Trial {
            deviation,
            failure: Some(message),
        }
    }
}

pub fn run_campaign(campaign: Campaign, trials: usize, seed: u64) -> CampaignReport {
    let outcomes: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            match campaign {
                Campaign::TwoMode => two_mode_trial(&mut rng, index),
                Campaign::RotationLoop => rotation_loop_trial(&mut rng),
                Campaign::Sip => sip_trial(&mut rng, index),
                Campaign::BeltramiNoninteraction => beltrami_trial(&mut rng),
                Campaign::GaussBonnet => gauss_bonnet_trial(&mut rng),
            }
        })
        .collect();
    let mut report = CampaignReport {
        campaign,
        trials,
        failures: 0,
        max_deviation: 0.0,
        first_counterexample: None,
    };
    for (index, trial) in outcomes.into_iter().enumerate() {
        report.max_deviation = report.max_deviation.max(trial.deviation);
        if let Some(message) = trial.failure {
            report.failures += 1;
            if report.first_counterexample.is_none() {
                report.first_counterexample = Some(format!("trial {index}: {message}"));
            }
        }
    }
    report
}

fn random_frequency(rng: &mut impl Rng, reach: i64) -> Frequency {
    loop {
        let n = int_mode(
            rng.gen_range(-reach..=reach),
            rng.gen_range(-reach..=reach),
            rng.gen_range(-reach..=reach),
        );
        if !n.is_zero() {
            return n;
        }
    }
}

fn random_complex(rng: &mut impl Rng) -> C {
    loop {
        let c = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if c.norm() >= 0.2 {
            return c;
        }
    }
}

fn random_tangent(rng: &mut impl Rng, n: &Frequency) -> CVec3 {
    loop {
        let raw = CVec3::new(
            random_complex(rng),
            random_complex(rng),
            random_complex(rng),
        );
        let u = helmholtz_project(n, raw).expect("nonzero frequency");
        if u.norm() >= 0.2 {
            return u;
        }
    }
}

fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm() >= 0.2 {
            return v.normalized();
        }
    }
}

const SPHERE_SHELLS: [i64; 4] = [5, 6, 9, 14];

fn shell_points(radius_sq: i64) -> Vec<Frequency> {
    let bound = (radius_sq as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            for z in -bound..=bound {
                if x * x + y * y + z * z == radius_sq {
                    out.push(int_mode(x, y, z));
                }
            }
        }
    }
    out
}

/// One pair draw mixing the three non-interaction constructions with
/// generic and perturbed pairs, cycling deterministically by trial index.
fn two_mode_trial(rng: &mut impl Rng, index: usize) -> Trial {
    let kind = index % 5;
    let (n1, u1, n2, mut u2) = match kind {
        // Generic pair: interaction expected.
        0 => {
            let n1 = random_frequency(rng, 3);
            let n2 = random_frequency(rng, 3);
            let u1 = random_tangent(rng, &n1);
            let u2 = random_tangent(rng, &n2);
            (n1, u1, n2, u2)
        }
        // Shared line: tangent planes coincide, transport cancels.
        1 => {
            let n1 = random_frequency(rng, 2);
            let k = *[-3, -2, -1, 2, 3].get(rng.gen_range(0..5)).unwrap();
            let n2 = n1.scale_int(k);
            let u1 = random_tangent(rng, &n1);
            let u2 = random_tangent(rng, &n2);
            (n1, u1, n2, u2)
        }
        // Both coefficients along the pair-plane normal.
        2 => {
            let n1 = random_frequency(rng, 3);
            let n2 = loop {
                let n = random_frequency(rng, 3);
                if !n.is_parallel_to(&n1) {
                    break n;
                }
            };
            let axis = Vec3(n1.to_f64()).cross(Vec3(n2.to_f64())).normalized();
            let u1 = axis.to_complex().scale(random_complex(rng));
            let u2 = axis.to_complex().scale(random_complex(rng));
            (n1, u1, n2, u2)
        }
        // Equal radii with the rotated-ratio coefficient relation.
        _ => {
            let shell = SPHERE_SHELLS[rng.gen_range(0..SPHERE_SHELLS.len())];
            let points = shell_points(shell);
            let n1 = points[rng.gen_range(0..points.len())].clone();
            let n2 = loop {
                let n = points[rng.gen_range(0..points.len())].clone();
                if n != n1 && !n.add(&n1).is_zero() {
                    break n;
                }
            };
            let u1 = random_tangent(rng, &n1);
            let rot = rotation_geodesic(
                Vec3(n1.to_f64()).normalized(),
                Vec3(n2.to_f64()).normalized(),
            )
            .expect("distinct non-antipodal directions");
            let u2 = rot.apply_complex(u1).scale(random_complex(rng));
            (n1, u1, n2, u2)
        }
    };
    // Every other structured draw gets a tangent perturbation that breaks
    // the construction; the verdict must flip with the bracket norm.
    if kind > 0 && index % 2 == 0 {
        let eps = rng.gen_range(0.01..0.5);
        u2 = u2 + random_tangent(rng, &n2).scale_re(eps);
    }

    if n1.add(&n2).is_zero() {
        // No output mode exists; the verdict must be the degenerate
        // parallel case and there is no bracket to compare against.
        return match classify_pair(&n1, u1, &n2, u2, PAIR_TOL) {
            Ok(InteractionCase::CaseParallel) => Trial::ok(0.0),
            Ok(other) => Trial::fail(1.0, format!("antipodal pair got {other:?}")),
            Err(e) => Trial::fail(1.0, format!("antipodal pair errored: {e}")),
        };
    }

    let bracket = match pair_bracket(&n1, u1, &n2, u2) {
        Ok(b) => b,
        Err(e) => return Trial::fail(1.0, format!("bracket failed: {e}")),
    };
    let scale = u1.norm()
        * u2.norm()
        * Vec3(n1.to_f64())
            .norm()
            .max(Vec3(n2.to_f64()).norm());
    let oracle_small = bracket.norm() <= PAIR_TOL * scale;
    let verdict = match classify_pair(&n1, u1, &n2, u2, PAIR_TOL) {
        Ok(v) => v,
        Err(e) => return Trial::fail(1.0, format!("classify failed: {e}")),
    };
    let non_interacting = !matches!(verdict, InteractionCase::Interacting);
    if non_interacting != oracle_small {
        return Trial::fail(
            1.0,
            format!(
                "verdict {verdict:?} disagrees with bracket norm {:.3e} (scale {:.3e}) for n1={n1} n2={n2}",
                bracket.norm(),
                scale
            ),
        );
    }
    let mut deviation = if oracle_small {
        bracket.norm() / scale
    } else {
        0.0
    };
    if let InteractionCase::CaseEqualRadius { gamma } = verdict {
        let rot = rotation_geodesic(
            Vec3(n1.to_f64()).normalized(),
            Vec3(n2.to_f64()).normalized(),
        )
        .expect("equal-radius case implies distinct directions");
        let err = (u2 - rot.apply_complex(u1).scale(gamma)).norm() / u2.norm().max(1e-300);
        deviation = deviation.max(err);
        if err > 1e-10 {
            return Trial::fail(
                deviation,
                format!("ratio reconstruction error {err:.3e} for n1={n1} n2={n2}"),
            );
        }
    }
    Trial::ok(deviation)
}

fn random_small_circle_polygon(rng: &mut impl Rng, sides: usize) -> SphericalPolygon {
    loop {
        let axis = random_unit(rng);
        let offset: f64 = rng.gen_range(0.1..0.9) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let radius = (1.0 - offset * offset).sqrt();
        let mut angles: Vec<f64> = (0..sides).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let min_gap = (0..sides)
            .map(|i| (angles[(i + 1) % sides] - angles[i]).rem_euclid(2.0 * PI))
            .fold(f64::INFINITY, f64::min);
        if min_gap < 0.15 {
            continue;
        }
        let seed_axis = axis.least_aligned_axis();
        let mut e = Vec3::ZERO;
        e.0[seed_axis] = 1.0;
        let t1 = (e - axis.scale(e.dot(axis))).normalized();
        let t2 = axis.cross(t1);
        let vertices: Vec<Vec3> = angles
            .iter()
            .map(|phi| {
                axis.scale(offset) + (t1.scale(phi.cos()) + t2.scale(phi.sin())).scale(radius)
            })
            .collect();
        match SphericalPolygon::new(vertices) {
            Ok(polygon) => return polygon,
            Err(_) => continue,
        }
    }
}

fn rotation_loop_trial(rng: &mut impl Rng) -> Trial {
    let sides = rng.gen_range(3..=8);
    let polygon = random_small_circle_polygon(rng, sides);
    let (rotation, angle) = match rotation_loop(&polygon) {
        Ok(r) => r,
        Err(e) => return Trial::fail(1.0, format!("loop failed: {e}")),
    };
    let area = polygon.area();
    // The loop turns by +-area; atan2 folds that onto [0, pi], so compare
    // against the circle distance of the area from zero.
    let wrapped = area.rem_euclid(2.0 * PI);
    let folded_area = wrapped.min(2.0 * PI - wrapped);
    let deviation = (angle.abs() - folded_area).abs();
    let fix_error = (rotation.apply(polygon.vertices[0]) - polygon.vertices[0]).norm();
    let worst = deviation.max(fix_error);
    if deviation > 1e-9 {
        return Trial::fail(
            worst,
            format!("|angle| = {:.12} vs area {area:.12}", angle.abs()),
        );
    }
    if fix_error > 1e-10 {
        return Trial::fail(worst, format!("loop moved its base vertex by {fix_error:.3e}"));
    }
    Trial::ok(worst)
}

/// Brute-force oracle: enumerate every index pair of the support.
fn sip_oracle(support: &[Frequency], set: &BTreeSet<Frequency>, n1: &Frequency, n2: &Frequency) -> bool {
    let sum = n1.add(n2);
    if set.contains(&sum) {
        return false;
    }
    for i in 0..support.len() {
        for j in (i + 1)..support.len() {
            let a = &support[i];
            let b = &support[j];
            if a.add(b) != sum {
                continue;
            }
            if (a == n1 && b == n2) || (a == n2 && b == n1) {
                continue;
            }
            return false;
        }
    }
    true
}

fn sip_trial(rng: &mut impl Rng, index: usize) -> Trial {
    let set: BTreeSet<Frequency> = if index == 0 {
        // Parallelogram: two pairs share the sum (1,1,0), so neither is
        // simple even though the sum is outside the support.
        [
            int_mode(1, 0, 0),
            int_mode(-1, 0, 0),
            int_mode(0, 1, 0),
            int_mode(0, -1, 0),
            int_mode(1, 1, 1),
            int_mode(-1, -1, -1),
            int_mode(0, 0, 1),
            int_mode(0, 0, -1),
        ]
        .into()
    } else {
        let pairs = rng.gen_range(2..=15);
        let mut set = BTreeSet::new();
        while set.len() < 2 * pairs {
            let n = random_frequency(rng, 2);
            set.insert(n.neg());
            set.insert(n);
        }
        set
    };
    let support: Vec<Frequency> = set.iter().cloned().collect();
    let checks = 8.min(support.len() * (support.len() - 1) / 2);
    for _ in 0..checks {
        let i = rng.gen_range(0..support.len());
        let j = loop {
            let j = rng.gen_range(0..support.len());
            if j != i {
                break j;
            }
        };
        let (n1, n2) = (&support[i], &support[j]);
        let got = match is_sip(&set, n1, n2) {
            Ok(b) => b,
            Err(e) => return Trial::fail(1.0, format!("sip test errored: {e}")),
        };
        let want = sip_oracle(&support, &set, n1, n2);
        if got != want {
            return Trial::fail(
                1.0,
                format!("is_sip({n1}, {n2}) = {got} but enumeration says {want}"),
            );
        }
    }
    if index == 0 {
        // The fixed case must also expose one genuinely simple pair.
        let n1 = int_mode(1, 0, 0);
        let n2 = int_mode(1, 1, 1);
        match is_sip(&set, &n1, &n2) {
            Ok(true) => {}
            other => return Trial::fail(1.0, format!("expected SIP for (2,1,1) sum, got {other:?}")),
        }
        let d1 = int_mode(1, 0, 0);
        let d2 = int_mode(0, 1, 0);
        match is_sip(&set, &d1, &d2) {
            Ok(false) => {}
            other => {
                return Trial::fail(
                    1.0,
                    format!("parallelogram diagonal should not be simple, got {other:?}"),
                )
            }
        }
    }
    Trial::ok(0.0)
}

fn beltrami_trial(rng: &mut impl Rng) -> Trial {
    let shell = SPHERE_SHELLS[rng.gen_range(0..SPHERE_SHELLS.len())];
    let points = shell_points(shell);
    let n1 = points[rng.gen_range(0..points.len())].clone();
    let n2 = loop {
        let n = points[rng.gen_range(0..points.len())].clone();
        if n != n1 && !n.add(&n1).is_zero() {
            break n;
        }
    };
    let sign = if rng.gen_bool(0.5) {
        BeltramiSign::Plus
    } else {
        BeltramiSign::Minus
    };
    let u1 = make_beltrami_coeff(&n1, sign, random_complex(rng)).expect("nonzero");
    let u2 = make_beltrami_coeff(&n2, sign, random_complex(rng)).expect("nonzero");
    let bracket = match pair_bracket(&n1, u1, &n2, u2) {
        Ok(b) => b,
        Err(e) => return Trial::fail(1.0, format!("bracket failed: {e}")),
    };
    let scale = u1.norm()
        * u2.norm()
        * Vec3(n1.to_f64())
            .norm()
            .max(Vec3(n2.to_f64()).norm());
    let relative = bracket.norm() / scale;
    if relative > 1e-11 {
        return Trial::fail(
            relative,
            format!("same-sign eigenvectors interact: |bracket|/scale = {relative:.3e} at n1={n1} n2={n2}"),
        );
    }
    match classify_pair(&n1, u1, &n2, u2, PAIR_TOL) {
        Ok(InteractionCase::Interacting) => Trial::fail(
            relative,
            format!("classify says interacting for same-sign pair n1={n1} n2={n2}"),
        ),
        Ok(_) => Trial::ok(relative),
        Err(e) => Trial::fail(relative, format!("classify failed: {e}")),
    }
}

fn gauss_bonnet_trial(rng: &mut impl Rng) -> Trial {
    let sides = rng.gen_range(3..=8);
    let polygon = random_small_circle_polygon(rng, sides);
    let excess = polygon.area();
    let triangulated = polygon.area_by_triangulation();
    let deviation = (excess - triangulated).abs();
    if deviation > 1e-9 {
        return Trial::fail(
            deviation,
            format!("excess {excess:.12} vs triangulation {triangulated:.12}"),
        );
    }
    Trial::ok(deviation)
}
