//! Galerkin-truncated evolution on a symmetric frequency set: the right-hand
//! side assembled from a precomputed triad index, pressure recovery, the
//! closed-form linear viscous-rotating evolution, fixed-step fourth-order
//! Runge-Kutta integration with conjugate-symmetry enforcement, and
//! support-growth diagnostics.
//!
//! The truncation discards nonlinear outputs outside the chosen set, which
//! keeps the ODE well posed and makes "finite-mode solution" observable as
//! the absence of support growth.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::interaction::raw_bracket;
use crate::linalg::{CVec3, Mat3, Vec3, C};
use crate::rat::Frequency;
use crate::spectral_field::{norm_sq_f64, SpectralField, ZeroModeTrajectory, PRUNE_REL};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("truncation set is empty")]
    EmptyTruncation,
    #[error("truncation contains the zero frequency")]
    ZeroInTruncation,
    #[error("truncation is not symmetric: missing -n for n = {0}")]
    AsymmetricTruncation(Frequency),
    #[error("truncation coordinates do not fit the integer index range")]
    TruncationRange,
    #[error("support frequency {0} outside the truncation")]
    SupportOutsideTruncation(Frequency),
    #[error("zero frequency has no pressure coefficient")]
    ZeroFrequency,
    #[error("field carries a nonzero mean; split the drift off before integrating")]
    MeanDrift,
    #[error("step size must be positive and finite")]
    BadStep,
}

/// `S union (S+S) minus 0`: every frequency the quadratic term can reach
/// from `S`, including the doubled frequencies. Symmetric when `S` is.
pub fn extended_support<'a, I>(support: I) -> BTreeSet<Frequency>
where
    I: IntoIterator<Item = &'a Frequency>,
{
    let freqs: Vec<&Frequency> = support.into_iter().collect();
    let mut out: BTreeSet<Frequency> = freqs.iter().map(|n| (*n).clone()).collect();
    for i in 0..freqs.len() {
        for j in i..freqs.len() {
            let sum = freqs[i].add(freqs[j]);
            if !sum.is_zero() {
                out.insert(sum);
            }
        }
    }
    out
}

/// Projected action of `e3 x` on the tangent plane of `n`: `P (e3 x) P`.
/// On tangent vectors this equals `(n3 / |n|^2) (n x)`, so modes with a
/// horizontal frequency feel no rotation at all.
pub fn coriolis_matrix(n: &Frequency) -> Result<Mat3, DynamicsError> {
    if n.is_zero() {
        return Err(DynamicsError::ZeroFrequency);
    }
    let hat = Vec3(n.to_f64()).normalized();
    let projector = Mat3::IDENTITY.add(Mat3::outer(hat, hat).scale(-1.0));
    let e3 = Vec3::new(0.0, 0.0, 1.0);
    Ok(projector * Mat3::skew(e3) * projector)
}

/// Pressure coefficient at `n`: the quadratic ordered-pair sum over the
/// support plus the rotational correction,
/// `p_n = |n|^-2 [ i omega (n2 u1_n - n1 u2_n) - sum (u_a . b)(u_b . a) ]`
/// over ordered pairs `a + b = n`. Conjugate-symmetric for real fields.
pub fn pressure(field: &SpectralField, n: &Frequency, omega: f64) -> Result<C, DynamicsError> {
    if n.is_zero() {
        return Err(DynamicsError::ZeroFrequency);
    }
    let mut sum = C::new(0.0, 0.0);
    for (a, ua) in field.modes() {
        let b = n.sub(a);
        if b.is_zero() {
            continue;
        }
        if let Some(ub) = field.coefficient(&b) {
            sum += ua.dot_real(Vec3(b.to_f64())) * ub.dot_real(Vec3(a.to_f64()));
        }
    }
    let mut p = -sum;
    if omega != 0.0 {
        let u = field.coefficient(n).unwrap_or(CVec3::ZERO);
        let nf = n.to_f64();
        p += C::i() * omega * (nf[1] * u.0[0] - nf[0] * u.0[1]);
    }
    Ok(p / norm_sq_f64(n))
}

/// Mode-wise closed form `u_n(t) = e^(-nu t |n|^2) e^(-omega t J_n) u_n(0)`,
/// where the rotation factor is `cos(theta) u - sin(theta) (n_hat x u)` with
/// `theta = omega t n3 / |n|`. The zero mode follows its own horizontal
/// rotation. Exact for fields whose nonlinear term vanishes; computed for
/// any field regardless.
pub fn nsc_linear_evolution(field: &SpectralField, nu: f64, omega: f64, t: f64) -> SpectralField {
    let mut out = SpectralField::new();
    out.real_valued = field.real_valued;
    for (n, u) in field.modes() {
        let nf = Vec3(n.to_f64());
        let norm = nf.norm();
        let decay = (-nu * t * norm * norm).exp();
        let theta = omega * t * nf.0[2] / norm;
        let (s, c) = theta.sin_cos();
        let hat = nf.scale(1.0 / norm);
        let value = (u.scale_re(c) - u.cross_from_real(hat).scale_re(s)).scale_re(decay);
        out.insert_mode(n.clone(), value)
            .expect("support frequencies are nonzero");
    }
    out.zero_mode = field.zero_mode.map(|z| {
        ZeroModeTrajectory {
            u_star: z,
            t_star: 0.0,
            omega,
        }
        .eval(t)
    });
    out
}

/// Fixed symmetric truncation with a precomputed triad index: for every
/// output frequency the unordered pairs inside the truncation summing to it
/// (self-pairs weighted one half, matching the ordered-sum convention).
pub struct GalerkinSystem {
    frequencies: Vec<Frequency>,
    reals: Vec<Vec3>,
    hats: Vec<Vec3>,
    damping: Vec<f64>,
    coriolis: Vec<Mat3>,
    negation: Vec<usize>,
    index: HashMap<[i64; 3], usize>,
    scale: BigInt,
    triads: Vec<Vec<(u32, u32, f64)>>,
    triad_entries: usize,
    pub nu: f64,
    pub omega: f64,
}

impl GalerkinSystem {
    pub fn new(
        truncation: &BTreeSet<Frequency>,
        nu: f64,
        omega: f64,
    ) -> Result<GalerkinSystem, DynamicsError> {
        if truncation.is_empty() {
            return Err(DynamicsError::EmptyTruncation);
        }
        let mut scale: BigInt = BigInt::one();
        for n in truncation {
            if n.is_zero() {
                return Err(DynamicsError::ZeroInTruncation);
            }
            if !truncation.contains(&n.neg()) {
                return Err(DynamicsError::AsymmetricTruncation(n.clone()));
            }
            for k in 0..3 {
                scale = scale.lcm(n.0[k].denom());
            }
        }
        let frequencies: Vec<Frequency> = truncation.iter().cloned().collect();
        let keys: Vec<[i64; 3]> = frequencies
            .iter()
            .map(|n| scaled_key(n, &scale).ok_or(DynamicsError::TruncationRange))
            .collect::<Result<_, _>>()?;
        let index: HashMap<[i64; 3], usize> =
            keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let negation: Vec<usize> = keys
            .iter()
            .map(|k| index[&[-k[0], -k[1], -k[2]]])
            .collect();

        let mut triads: Vec<Vec<(u32, u32, f64)>> = vec![Vec::new(); frequencies.len()];
        let mut triad_entries = 0usize;
        for i in 0..frequencies.len() {
            for j in i..frequencies.len() {
                let sum = [
                    keys[i][0] + keys[j][0],
                    keys[i][1] + keys[j][1],
                    keys[i][2] + keys[j][2],
                ];
                if sum == [0, 0, 0] {
                    continue;
                }
                if let Some(&out) = index.get(&sum) {
                    let weight = if i == j { 0.5 } else { 1.0 };
                    triads[out].push((i as u32, j as u32, weight));
                    triad_entries += 1;
                }
            }
        }

        let reals: Vec<Vec3> = frequencies.iter().map(|n| Vec3(n.to_f64())).collect();
        let hats: Vec<Vec3> = reals.iter().map(|f| f.normalized()).collect();
        let damping: Vec<f64> = frequencies.iter().map(norm_sq_f64).collect();
        let coriolis: Vec<Mat3> = frequencies
            .iter()
            .map(|n| coriolis_matrix(n).expect("truncation frequencies are nonzero"))
            .collect();
        Ok(GalerkinSystem {
            frequencies,
            reals,
            hats,
            damping,
            coriolis,
            negation,
            index,
            scale,
            triads,
            triad_entries,
            nu,
            omega,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[Frequency] {
        &self.frequencies
    }

    fn position(&self, n: &Frequency) -> Option<usize> {
        scaled_key(n, &self.scale).and_then(|k| self.index.get(&k).copied())
    }

    /// Dense state vector in truncation order; support must stay inside.
    pub fn state_from_field(&self, field: &SpectralField) -> Result<Vec<CVec3>, DynamicsError> {
        let mut state = vec![CVec3::ZERO; self.frequencies.len()];
        for (n, u) in field.modes() {
            let pos = self
                .position(n)
                .ok_or_else(|| DynamicsError::SupportOutsideTruncation(n.clone()))?;
            state[pos] = *u;
        }
        Ok(state)
    }

    pub fn field_from_state(&self, state: &[CVec3], real_valued: bool) -> SpectralField {
        let mut field = SpectralField::new();
        field.real_valued = real_valued;
        for (pos, u) in state.iter().enumerate() {
            if u.norm_sq() > 0.0 {
                field
                    .insert_mode(self.frequencies[pos].clone(), *u)
                    .expect("truncation frequencies are nonzero");
            }
        }
        field
    }

    fn nonlinear_at(&self, state: &[CVec3], out: usize) -> CVec3 {
        let mut acc = CVec3::ZERO;
        for &(i, j, w) in &self.triads[out] {
            let ui = state[i as usize];
            let uj = state[j as usize];
            if ui.norm_sq() == 0.0 || uj.norm_sq() == 0.0 {
                continue;
            }
            let raw = raw_bracket(self.reals[i as usize], ui, self.reals[j as usize], uj);
            acc = acc + raw.scale_re(w);
        }
        // Project onto the tangent plane and apply the -i of the convection.
        let hat = self.hats[out];
        let tangent = acc - hat.to_complex().scale(acc.dot_real(hat));
        tangent.scale(C::new(0.0, -1.0))
    }

    /// Truncated nonlinear term `N_n(u)` alone (no damping, no rotation).
    pub fn nonlinear_term(&self, state: &[CVec3]) -> Vec<CVec3> {
        if self.triad_entries >= 8192 {
            (0..self.frequencies.len())
                .into_par_iter()
                .map(|out| self.nonlinear_at(state, out))
                .collect()
        } else {
            (0..self.frequencies.len())
                .map(|out| self.nonlinear_at(state, out))
                .collect()
        }
    }

    /// `du_n/dt = -nu |n|^2 u_n - omega J_n u_n + N_n(u)`.
    pub fn rhs(&self, state: &[CVec3]) -> Vec<CVec3> {
        let mut out = self.nonlinear_term(state);
        for (pos, du) in out.iter_mut().enumerate() {
            let u = state[pos];
            if self.nu != 0.0 {
                *du = *du - u.scale_re(self.nu * self.damping[pos]);
            }
            if self.omega != 0.0 {
                *du = *du - self.coriolis[pos].apply_complex(u).scale_re(self.omega);
            }
        }
        out
    }

    /// `Re sum_n conj(u_n) . N_n(u)`; vanishes identically on symmetric
    /// truncations (the Galerkin energy identity), so its size is a direct
    /// measure of assembly error.
    pub fn nonlinear_energy_production(&self, state: &[CVec3]) -> f64 {
        let n = self.nonlinear_term(state);
        state
            .iter()
            .zip(&n)
            .map(|(u, d)| u.dot_herm(*d).re)
            .sum()
    }
}

fn scaled_key(n: &Frequency, scale: &BigInt) -> Option<[i64; 3]> {
    let mut key = [0i64; 3];
    for k in 0..3 {
        let r = &n.0[k];
        let (quot, rem) = (r.numer() * scale).div_rem(r.denom());
        if !rem.is_zero() {
            return None;
        }
        key[k] = quot.to_i64()?;
    }
    Some(key)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub helicity: f64,
    pub realness_drift: f64,
    pub active_modes: usize,
}

#[derive(Debug, Clone)]
pub struct ActivationEvent {
    pub frequency: Frequency,
    pub first_time: f64,
    pub peak: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<DiagnosticsRow>,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub final_field: SpectralField,
    pub final_time: f64,
    pub activations: Vec<ActivationEvent>,
    pub max_realness_drift: f64,
    /// Set when non-finite values appeared; `final_field` is then the last
    /// finite state and `final_time` the time it was reached.
    pub aborted: bool,
}

pub struct IntegrationOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Keep a full snapshot every this many steps (0: endpoints only).
    pub snapshot_every: usize,
}

struct ActivationTracker {
    watched: Vec<bool>,
    events: BTreeMap<usize, (f64, f64)>,
}

impl ActivationTracker {
    fn new(initial_active: &[bool]) -> Self {
        ActivationTracker {
            watched: initial_active.iter().map(|a| !a).collect(),
            events: BTreeMap::new(),
        }
    }

    fn observe(&mut self, state: &[CVec3], threshold: f64, t: f64) {
        for (pos, u) in state.iter().enumerate() {
            let norm = u.norm();
            if self.watched[pos] && norm > threshold {
                self.events.insert(pos, (t, norm));
                self.watched[pos] = false;
            } else if let Some(entry) = self.events.get_mut(&pos) {
                entry.1 = entry.1.max(norm);
            }
        }
    }
}

fn state_axpy(state: &[CVec3], k: &[CVec3], h: f64) -> Vec<CVec3> {
    state
        .iter()
        .zip(k)
        .map(|(u, d)| *u + d.scale_re(h))
        .collect()
}

fn state_max_norm(state: &[CVec3]) -> f64 {
    state.iter().map(|u| u.norm()).fold(0.0, f64::max)
}

fn state_is_finite(state: &[CVec3]) -> bool {
    state.iter().all(|u| u.is_finite())
}

/// Classic fourth-order Runge-Kutta with a fixed step. Conjugate symmetry is
/// re-enforced after every step for real-valued fields, with the
/// pre-symmetrization deviation logged; frequencies outside the initial
/// support are watched and their first crossing of the pruning threshold
/// recorded. Non-finite values abort the run, keeping the last finite state.
pub fn integrate(
    system: &GalerkinSystem,
    initial: &SpectralField,
    options: &IntegrationOptions,
) -> Result<Trajectory, DynamicsError> {
    if !(options.dt > 0.0) || !options.dt.is_finite() || !options.t_end.is_finite() {
        return Err(DynamicsError::BadStep);
    }
    if let Some(mean) = initial.zero_mode {
        if Vec3(mean).norm() > 0.0 {
            return Err(DynamicsError::MeanDrift);
        }
    }
    let mut state = system.state_from_field(initial)?;
    let real_valued = initial.real_valued;

    let initial_active: Vec<bool> = state.iter().map(|u| u.norm_sq() > 0.0).collect();
    let mut tracker = ActivationTracker::new(&initial_active);
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    let mut max_realness_drift = 0.0f64;
    let mut aborted = false;

    let diagnostics = |state: &[CVec3], t: f64, drift: f64| -> DiagnosticsRow {
        let energy: f64 = 0.5 * state.iter().map(|u| u.norm_sq()).sum::<f64>();
        let helicity: f64 = state
            .iter()
            .zip(&system.hats)
            .zip(&system.damping)
            .map(|((u, hat), norm_sq)| {
                let curl = u.cross_from_real(hat.scale(norm_sq.sqrt())).scale(C::i());
                u.dot_herm(curl).re
            })
            .sum();
        let threshold = PRUNE_REL * state_max_norm(state);
        let active = state.iter().filter(|u| u.norm() > threshold).count();
        DiagnosticsRow {
            t,
            energy,
            helicity,
            realness_drift: drift,
            active_modes: active,
        }
    };

    rows.push(diagnostics(&state, 0.0, 0.0));
    if options.snapshot_every > 0 {
        snapshots.push((0.0, system.field_from_state(&state, real_valued)));
    }

    let mut t = 0.0f64;
    let mut step = 0usize;
    let eps = options.dt * 1e-9;
    while t + eps < options.t_end {
        let h = options.dt.min(options.t_end - t);
        let k1 = system.rhs(&state);
        let k2 = system.rhs(&state_axpy(&state, &k1, 0.5 * h));
        let k3 = system.rhs(&state_axpy(&state, &k2, 0.5 * h));
        let k4 = system.rhs(&state_axpy(&state, &k3, h));
        let mut next: Vec<CVec3> = (0..state.len())
            .map(|p| {
                let incr = k1[p] + (k2[p] + k3[p]).scale_re(2.0) + k4[p];
                state[p] + incr.scale_re(h / 6.0)
            })
            .collect();
        if !state_is_finite(&next) {
            aborted = true;
            break;
        }

        let mut drift = 0.0f64;
        if real_valued {
            // u_n and conj(u_{-n}) should agree; average the pair.
            for p in 0..next.len() {
                let q = system.negation[p];
                if q < p {
                    continue;
                }
                let avg = (next[p] + next[q].conj()).scale_re(0.5);
                drift = drift.max((next[p] - avg).norm());
                next[p] = avg;
                next[q] = avg.conj();
            }
            max_realness_drift = max_realness_drift.max(drift);
        }

        t += h;
        step += 1;
        state = next;
        let threshold = PRUNE_REL * state_max_norm(&state);
        tracker.observe(&state, threshold, t);
        rows.push(diagnostics(&state, t, drift));
        if options.snapshot_every > 0 && step % options.snapshot_every == 0 {
            snapshots.push((t, system.field_from_state(&state, real_valued)));
        }
    }

    let final_field = system.field_from_state(&state, real_valued);
    let activations = tracker
        .events
        .iter()
        .map(|(pos, (first_time, peak))| ActivationEvent {
            frequency: system.frequencies[*pos].clone(),
            first_time: *first_time,
            peak: *peak,
        })
        .collect();
    Ok(Trajectory {
        rows,
        snapshots,
        final_field,
        final_time: t,
        activations,
        max_realness_drift,
        aborted,
    })
}

/// Activation events restricted to frequencies outside `original`; empty iff
/// the trajectory support never left it.
pub fn support_growth_report(
    trajectory: &Trajectory,
    original: &BTreeSet<Frequency>,
) -> Vec<ActivationEvent> {
    trajectory
        .activations
        .iter()
        .filter(|event| !original.contains(&event.frequency))
        .cloned()
        .collect()
}

pub fn write_diagnostics_csv<W: Write>(mut out: W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(out, "t,energy,helicity,realness_drift,active_modes")?;
    for row in &trajectory.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.t, row.energy, row.helicity, row.realness_drift, row.active_modes
        )?;
    }
    Ok(())
}

pub fn write_diagnostics_jsonl<W: Write>(mut out: W, trajectory: &Trajectory) -> io::Result<()> {
    for row in &trajectory.rows {
        serde_json::to_writer(&mut out, row)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Largest truncation mismatch between two fields over the union of their
/// supports; `None` when a support frequency is outside the truncation.
pub fn max_coefficient_distance(a: &SpectralField, b: &SpectralField) -> f64 {
    let keys: BTreeSet<&Frequency> = a.support().chain(b.support()).collect();
    keys.into_iter()
        .map(|n| {
            let ua = a.coefficient(n).unwrap_or(CVec3::ZERO);
            let ub = b.coefficient(n).unwrap_or(CVec3::ZERO);
            (ua - ub).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{beltrami_sign, helmholtz_project, make_beltrami_coeff, BeltramiSign};
    use crate::spectral_field::int_mode;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sym_insert(field: &mut SpectralField, n: Frequency, u: CVec3) {
        field.insert_mode(n.clone(), u).unwrap();
        field.insert_mode(n.neg(), u.conj()).unwrap();
    }

    fn abc_field(a: f64, b: f64, c_amp: f64) -> SpectralField {
        let mut field = SpectralField::new();
        let entries = [
            (
                int_mode(0, 0, 1),
                CVec3::new(c(0.0, -a / 2.0), c(a / 2.0, 0.0), c(0.0, 0.0)),
            ),
            (
                int_mode(1, 0, 0),
                CVec3::new(c(0.0, 0.0), c(0.0, -b / 2.0), c(b / 2.0, 0.0)),
            ),
            (
                int_mode(0, 1, 0),
                CVec3::new(c(c_amp / 2.0, 0.0), c(0.0, 0.0), c(0.0, -c_amp / 2.0)),
            ),
        ];
        for (n, u) in entries {
            if u.norm() == 0.0 {
                continue;
            }
            sym_insert(&mut field, n, u);
        }
        field
    }

    fn random_symmetric_field(rng: &mut impl Rng, pool: &[Frequency], count: usize) -> SpectralField {
        let mut field = SpectralField::new();
        let mut chosen = BTreeSet::new();
        while chosen.len() < count {
            let n = pool[rng.gen_range(0..pool.len())].clone();
            if chosen.contains(&n) || chosen.contains(&n.neg()) {
                continue;
            }
            let raw = CVec3::new(
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
            let u = helmholtz_project(&n, raw).unwrap();
            if u.norm() < 1e-3 {
                continue;
            }
            sym_insert(&mut field, n.clone(), u);
            chosen.insert(n);
        }
        field
    }

    fn integer_pool(reach: i64) -> Vec<Frequency> {
        let mut pool = Vec::new();
        for x in -reach..=reach {
            for y in -reach..=reach {
                for z in -reach..=reach {
                    if (x, y, z) != (0, 0, 0) {
                        pool.push(int_mode(x, y, z));
                    }
                }
            }
        }
        pool
    }

    #[test]
    fn extended_support_matches_frozen_counts() {
        let single: BTreeSet<Frequency> = [int_mode(1, 0, 0), int_mode(-1, 0, 0)].into();
        let ext = extended_support(&single);
        let expected: BTreeSet<Frequency> = [
            int_mode(1, 0, 0),
            int_mode(-1, 0, 0),
            int_mode(2, 0, 0),
            int_mode(-2, 0, 0),
        ]
        .into();
        assert_eq!(ext, expected);

        let abc = abc_field(1.0, 1.0, 1.0);
        let ext = extended_support(abc.support());
        assert_eq!(ext.len(), 24);
        for n in &ext {
            assert!(ext.contains(&n.neg()));
        }
    }

    #[test]
    fn extended_support_is_symmetric_on_random_sets() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pool = integer_pool(2);
        for _ in 0..50 {
            let mut set = BTreeSet::new();
            for _ in 0..6 {
                let n = pool[rng.gen_range(0..pool.len())].clone();
                set.insert(n.neg());
                set.insert(n);
            }
            let ext = extended_support(&set);
            for n in &ext {
                assert!(ext.contains(&n.neg()));
                assert!(!n.is_zero());
            }
        }
    }

    #[test]
    fn rhs_vanishes_on_eigenfields_and_decays_single_pairs() {
        let abc = abc_field(1.0, 2.0, 3.0);
        let truncation = extended_support(abc.support());
        let system = GalerkinSystem::new(&truncation, 0.0, 0.0).unwrap();
        let state = system.state_from_field(&abc).unwrap();
        let du = system.rhs(&state);
        assert!(state_max_norm(&du) < 1e-12);

        // Pure decay on a lone pair: no triads reach the support.
        let mut field = SpectralField::new();
        sym_insert(
            &mut field,
            int_mode(1, 0, 0),
            CVec3::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        );
        let truncation = extended_support(field.support());
        let system = GalerkinSystem::new(&truncation, 1.0, 0.0).unwrap();
        let state = system.state_from_field(&field).unwrap();
        let du = system.rhs(&state);
        for (pos, n) in system.frequencies().iter().enumerate() {
            let expected = state[pos].scale_re(-1.0);
            assert!(
                (du[pos] - expected).norm() < 1e-14,
                "unexpected derivative at {n}"
            );
        }
    }

    #[test]
    fn rhs_matches_the_hand_enumerated_two_mode_pair() {
        let mut field = SpectralField::new();
        sym_insert(
            &mut field,
            int_mode(1, 0, 0),
            CVec3::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        );
        sym_insert(
            &mut field,
            int_mode(0, 2, 0),
            CVec3::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        );
        let truncation = extended_support(field.support());
        let system = GalerkinSystem::new(&truncation, 0.0, 0.0).unwrap();
        let state = system.state_from_field(&field).unwrap();
        let du = system.rhs(&state);
        let expected: BTreeMap<Frequency, CVec3> = [
            (
                int_mode(1, 2, 0),
                CVec3::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, -2.0)),
            ),
            (
                int_mode(-1, -2, 0),
                CVec3::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)),
            ),
            (
                int_mode(1, -2, 0),
                CVec3::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)),
            ),
            (
                int_mode(-1, 2, 0),
                CVec3::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, -2.0)),
            ),
        ]
        .into();
        for (pos, n) in system.frequencies().iter().enumerate() {
            match expected.get(n) {
                Some(want) => assert!((du[pos] - *want).norm() < 1e-13, "wrong value at {n}"),
                None => assert!(du[pos].norm() < 1e-14, "spurious output at {n}"),
            }
        }
    }

    #[test]
    fn nonlinear_term_produces_no_energy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let pool = integer_pool(1);
        for _ in 0..10 {
            let field = random_symmetric_field(&mut rng, &pool, 5);
            let truncation = extended_support(field.support());
            let system = GalerkinSystem::new(&truncation, 0.0, 0.0).unwrap();
            let state = system.state_from_field(&field).unwrap();
            let production = system.nonlinear_energy_production(&state);
            let energy: f64 = 0.5 * state.iter().map(|u| u.norm_sq()).sum::<f64>();
            assert!(
                production.abs() < 1e-12 * energy.max(1.0),
                "production {production} too large"
            );
        }
    }

    #[test]
    fn truncation_validation_rejects_bad_sets_and_outside_support() {
        assert!(matches!(
            GalerkinSystem::new(&BTreeSet::new(), 0.0, 0.0),
            Err(DynamicsError::EmptyTruncation)
        ));
        let asym: BTreeSet<Frequency> = [int_mode(1, 0, 0)].into();
        assert!(matches!(
            GalerkinSystem::new(&asym, 0.0, 0.0),
            Err(DynamicsError::AsymmetricTruncation(_))
        ));
        let zero: BTreeSet<Frequency> =
            [int_mode(0, 0, 0), int_mode(1, 0, 0), int_mode(-1, 0, 0)].into();
        assert!(matches!(
            GalerkinSystem::new(&zero, 0.0, 0.0),
            Err(DynamicsError::ZeroInTruncation)
        ));

        let truncation: BTreeSet<Frequency> = [int_mode(1, 0, 0), int_mode(-1, 0, 0)].into();
        let system = GalerkinSystem::new(&truncation, 0.0, 0.0).unwrap();
        let mut field = SpectralField::new();
        sym_insert(
            &mut field,
            int_mode(0, 1, 0),
            CVec3::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
        );
        assert!(matches!(
            system.state_from_field(&field),
            Err(DynamicsError::SupportOutsideTruncation(_))
        ));
    }

    #[test]
    fn coriolis_matrix_matches_the_printed_entries_and_the_axis_identity() {
        let j = coriolis_matrix(&int_mode(0, 0, 1)).unwrap();
        let rows = j.0;
        let want = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        for r in 0..3 {
            for s in 0..3 {
                assert!((rows[r][s] - want[r][s]).abs() < 1e-15);
            }
        }
        assert!((j.apply(Vec3::new(1.0, 0.0, 0.0)) - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);

        // Horizontal frequencies feel nothing on their tangent plane.
        let j = coriolis_matrix(&int_mode(1, 0, 0)).unwrap();
        assert!(j.apply(Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!(j.apply(Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);

        // On tangent vectors J_n = (n3 / |n|^2) (n x), and it is skew there.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = int_mode(
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
            );
            if n.is_zero() {
                continue;
            }
            let nf = Vec3(n.to_f64());
            let raw = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let v = raw - nf.scale(raw.dot(nf) / nf.dot(nf));
            let j = coriolis_matrix(&n).unwrap();
            let got = j.apply(v);
            let want = nf.cross(v).scale(nf.0[2] / nf.dot(nf));
            assert!((got - want).norm() < 1e-12);
            assert!(got.dot(v).abs() < 1e-12);
        }
    }

    #[test]
    fn pressure_reproduces_hand_derived_coefficients() {
        // For the unit eigenfield the pressure is -|u|^2/2, whose
        // off-constant coefficients are i/4 on the mixed-axis pairs.
        let abc = abc_field(1.0, 1.0, 1.0);
        let p = pressure(&abc, &int_mode(0, 1, 1), 0.0).unwrap();
        assert!((p - c(0.0, 0.25)).norm() < 1e-14);
        let p = pressure(&abc, &int_mode(1, 1, 0), 0.0).unwrap();
        assert!((p - c(0.0, 0.25)).norm() < 1e-14);
        // Conjugate symmetry.
        let q = pressure(&abc, &int_mode(0, -1, -1), 0.0).unwrap();
        assert!((q - p.conj()).norm() < 1e-14);

        // Line supports carry no quadratic pressure at all.
        let mut line = SpectralField::new();
        sym_insert(
            &mut line,
            int_mode(1, 0, 0),
            CVec3::new(c(0.0, 0.0), c(0.7, -0.2), c(0.1, 0.4)),
        );
        sym_insert(
            &mut line,
            int_mode(2, 0, 0),
            CVec3::new(c(0.0, 0.0), c(-0.3, 0.0), c(0.2, 0.2)),
        );
        for n in [int_mode(1, 0, 0), int_mode(2, 0, 0), int_mode(3, 0, 0)] {
            assert!(pressure(&line, &n, 0.0).unwrap().norm() < 1e-15);
        }
        assert!(matches!(
            pressure(&line, &int_mode(0, 0, 0), 0.0),
            Err(DynamicsError::ZeroFrequency)
        ));
    }

    #[test]
    fn linear_evolution_rotates_decays_and_keeps_eigen_structure() {
        let n = int_mode(0, 0, 1);
        let u = make_beltrami_coeff(&n, BeltramiSign::Plus, c(1.0, 0.0)).unwrap();
        let mut field = SpectralField::new();
        sym_insert(&mut field, n.clone(), u);
        // Angle pi about the vertical axis: every coefficient flips.
        let evolved = nsc_linear_evolution(&field, 0.0, std::f64::consts::PI, 1.0);
        let got = evolved.coefficient(&n).unwrap();
        assert!((got + u).norm() < 1e-12);
        assert_eq!(beltrami_sign(&n, got, 1e-10), BeltramiSign::Plus);

        // Horizontal frequencies only decay.
        let abc = abc_field(0.0, 1.0, 1.0);
        let evolved = nsc_linear_evolution(&abc, 1.0, 2.0, 0.5);
        for (n, u) in abc.modes() {
            if n.0[2].is_zero() {
                let got = evolved.coefficient(n).unwrap();
                assert!((got - u.scale_re((-0.5f64).exp())).norm() < 1e-14);
            }
        }

        // The mean rotates horizontally at rate omega.
        let mut with_mean = SpectralField::new();
        with_mean.zero_mode = Some([1.0, 0.0, 0.5]);
        sym_insert(
            &mut with_mean,
            int_mode(1, 0, 0),
            CVec3::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        );
        let evolved = nsc_linear_evolution(&with_mean, 0.0, std::f64::consts::FRAC_PI_2, 1.0);
        let mean = evolved.zero_mode.unwrap();
        assert!((mean[0] - 0.0).abs() < 1e-12);
        assert!((mean[1] + 1.0).abs() < 1e-12);
        assert!((mean[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn integration_keeps_eigenfields_inert() {
        let abc = abc_field(1.0, 1.0, 1.0);
        let truncation = extended_support(abc.support());
        let system = GalerkinSystem::new(&truncation, 0.0, 0.0).unwrap();
        let options = IntegrationOptions {
            t_end: 0.2,
            dt: 1e-3,
            snapshot_every: 0,
        };
        let trajectory = integrate(&system, &abc, &options).unwrap();
        assert!(!trajectory.aborted);
        assert!(trajectory.activations.is_empty());
        assert!(max_coefficient_distance(&trajectory.final_field, &abc) < 1e-10);
        assert!(trajectory.max_realness_drift < 1e-13);
        assert!(support_growth_report(&trajectory, &abc.support_set()).is_empty());
    }

    #[test]
    fn integration_reports_first_step_activation_on_broken_fields() {
        let mut broken = abc_field(1.0, 1.0, 1.0);
        let n = int_mode(1, 0, 0);
        let u = CVec3::new(c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0));
        broken.insert_mode(n.clone(), u).unwrap();
        broken.insert_mode(n.neg(), u.conj()).unwrap();
        let truncation = extended_support(broken.support());
        let system = GalerkinSystem::new(&truncation, 0.0, 0.0).unwrap();
        let options = IntegrationOptions {
            t_end: 0.05,
            dt: 1e-3,
            snapshot_every: 0,
        };
        let trajectory = integrate(&system, &broken, &options).unwrap();
        let growth = support_growth_report(&trajectory, &broken.support_set());
        assert!(!growth.is_empty());
        for event in &growth {
            assert!((event.first_time - 1e-3).abs() < 1e-12);
            assert!(event.peak > 0.0);
        }
        // Truncated convection still conserves energy.
        let e0 = trajectory.rows.first().unwrap().energy;
        let e1 = trajectory.rows.last().unwrap().energy;
        assert!(((e1 - e0) / e0).abs() < 1e-8);
    }

    #[test]
    fn integration_matches_the_linear_closed_form_at_fourth_order() {
        let abc = abc_field(1.0, 2.0, 3.0);
        let truncation = extended_support(abc.support());
        let t_end = 0.1;
        let mut errors = Vec::new();
        for dt in [2e-3, 1e-3] {
            let system = GalerkinSystem::new(&truncation, 1.0, 2.0).unwrap();
            let options = IntegrationOptions {
                t_end,
                dt,
                snapshot_every: 0,
            };
            let trajectory = integrate(&system, &abc, &options).unwrap();
            let exact = nsc_linear_evolution(&abc, 1.0, 2.0, t_end);
            errors.push(max_coefficient_distance(&trajectory.final_field, &exact));
        }
        assert!(errors[1] < 1e-10);
        let order = (errors[0] / errors[1]).log2();
        assert!(order > 3.5, "observed order {order}");
    }

    #[test]
    fn diagnostics_writers_emit_one_row_per_step() {
        let abc = abc_field(1.0, 1.0, 1.0);
        let truncation = extended_support(abc.support());
        let system = GalerkinSystem::new(&truncation, 0.0, 0.0).unwrap();
        let options = IntegrationOptions {
            t_end: 5e-3,
            dt: 1e-3,
            snapshot_every: 2,
        };
        let trajectory = integrate(&system, &abc, &options).unwrap();
        assert_eq!(trajectory.rows.len(), 6);
        assert_eq!(trajectory.snapshots.len(), 3);

        let mut csv = Vec::new();
        write_diagnostics_csv(&mut csv, &trajectory).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("t,energy,helicity,realness_drift,active_modes"));

        let mut jsonl = Vec::new();
        write_diagnostics_jsonl(&mut jsonl, &trajectory).unwrap();
        let text = String::from_utf8(jsonl).unwrap();
        for line in text.lines() {
            let value: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(value["energy"].is_number());
        }
    }

    #[test]
    fn integration_requires_a_clean_mean() {
        let mut field = abc_field(1.0, 1.0, 1.0);
        field.zero_mode = Some([0.3, 0.0, 0.0]);
        let truncation = extended_support(field.support());
        let system = GalerkinSystem::new(&truncation, 0.0, 0.0).unwrap();
        let options = IntegrationOptions {
            t_end: 1e-2,
            dt: 1e-3,
            snapshot_every: 0,
        };
        assert!(matches!(
            integrate(&system, &field, &options),
            Err(DynamicsError::MeanDrift)
        ));
    }
}
